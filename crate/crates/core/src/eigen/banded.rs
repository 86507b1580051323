//! Complex banded LU with partial pivoting (LAPACK band-storage layout),
//! plus a bordered variant for operators that are banded except for a small
//! set of rows/columns (periodic meshes: the wrap-around slice).

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::operator::SparseHermitianOperator;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// LU factors of a banded matrix, LAPACK-style band storage with room for
/// pivot fill: entry (i, j) lives at `ab[j * ldab + off + i − j]` with
/// off = kl + ku and ldab = 2kl + ku + 1. Row interchanges widen the upper
/// bandwidth to kl + ku.
pub struct BandedLU {
    n: usize,
    kl: usize,
    /// Upper bandwidth of the factored U (= kl + ku of the input).
    ku_fact: usize,
    /// Diagonal offset in band storage (= kl + ku of the input).
    off: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandedLU {
    /// Factor a banded matrix given in triplet form. `kl`/`ku` are the lower
    /// and upper bandwidths of the unfactored matrix.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        triplets: impl Iterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let off = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C0; n * ldab];
        for (i, j, v) in triplets {
            debug_assert!(i < n && j < n);
            debug_assert!(
                (i as isize - j as isize) <= kl as isize
                    && (j as isize - i as isize) <= ku as isize,
                "entry ({i},{j}) outside declared band"
            );
            ab[j * ldab + off + i - j] += v;
        }
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            // pivot search in column j among rows j..=j+kl
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = ab[j * ldab + off].norm_sqr();
            for q in 1..=km {
                let mag = ab[j * ldab + off + q].norm_sqr();
                if mag > best {
                    best = mag;
                    p = q;
                }
            }
            ipiv[j] = j + p;
            if best == 0.0 {
                return Err(CoreError::Factorization {
                    shift: f64::NAN,
                    detail: format!("zero pivot column {j}"),
                });
            }
            let jmax = (j + off).min(n - 1);
            if p > 0 {
                // swap rows j and j+p across columns j..=jmax
                for c in j..=jmax {
                    ab.swap(c * ldab + off + j - c, c * ldab + off + j + p - c);
                }
            }
            let piv = ab[j * ldab + off];
            for q in 1..=km {
                ab[j * ldab + off + q] /= piv;
            }
            for c in j + 1..=jmax {
                let f = ab[c * ldab + off + j - c];
                if f != C0 {
                    for q in 1..=km {
                        let m = ab[j * ldab + off + q];
                        ab[c * ldab + off + j + q - c] -= m * f;
                    }
                }
            }
        }
        Ok(BandedLU { n, kl, ku_fact: off, off, ldab, ab, ipiv })
    }

    /// Solve LUx = Pb in place.
    pub fn solve(&self, x: &mut [Complex64]) {
        let (n, kl, off) = (self.n, self.kl, self.off);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != C0 {
                let km = kl.min(n - 1 - j);
                for q in 1..=km {
                    let m = self.ab[j * self.ldab + off + q];
                    x[j + q] -= m * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let lo = j.saturating_sub(self.ku_fact);
            let piv = self.ab[j * self.ldab + off];
            let xj = x[j] / piv;
            x[j] = xj;
            if xj != C0 {
                for i in lo..j {
                    let v = self.ab[j * self.ldab + off + i - j];
                    x[i] -= v * xj;
                }
            }
        }
    }

    /// Solve for several right-hand sides stored contiguously.
    pub fn solve_many(&self, cols: &mut [Vec<Complex64>]) {
        for c in cols.iter_mut() {
            self.solve(c);
        }
    }
}

/// Dense LU with partial pivoting for the small Schur complement.
pub struct DenseLU {
    n: usize,
    a: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl DenseLU {
    pub fn factor(n: usize, mut a: Vec<Complex64>) -> Result<Self> {
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].norm_sqr();
            for i in k + 1..n {
                let m = a[i * n + k].norm_sqr();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            ipiv[k] = p;
            if best == 0.0 {
                return Err(CoreError::Factorization {
                    shift: f64::NAN,
                    detail: format!("singular Schur complement at column {k}"),
                });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / piv;
                a[i * n + k] = m;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= m * akj;
                }
            }
        }
        Ok(DenseLU { n, a, ipiv })
    }

    pub fn solve(&self, x: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != C0 {
                for i in k + 1..n {
                    let m = self.a[i * n + k];
                    x[i] -= m * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut v = x[k];
            for j in k + 1..n {
                v -= self.a[k * n + j] * x[j];
            }
            x[k] = v / self.a[k * n + k];
        }
    }
}

/// Solver for (H − σ) when H is banded apart from a designated border set
/// (e.g. the wrap slice of a periodic mesh). Block elimination:
///
/// ```text
/// [B E] [x1]   [b1]        S = D − F B⁻¹E
/// [F D] [x2] = [b2],       x2 = S⁻¹(b2 − F B⁻¹ b1),  x1 = B⁻¹b1 − (B⁻¹E) x2
/// ```
pub struct ShiftedSolver {
    /// position of each original index: Ok(core position) or Err(border position)
    place: Vec<std::result::Result<usize, usize>>,
    core: Vec<usize>,
    border: Vec<usize>,
    banded: BandedLU,
    /// B⁻¹E, column-major (nb columns of length nc)
    binv_e: Vec<Vec<Complex64>>,
    /// F in triplet rows: (border_pos, core_pos, value)
    f_rows: Vec<(usize, usize, Complex64)>,
    schur: Option<DenseLU>,
    scratch1: std::cell::RefCell<Vec<Complex64>>,
}

impl ShiftedSolver {
    /// Factor (op − shift·I). `border` lists node indices treated as the
    /// dense border; pass an empty slice for a plainly banded operator.
    pub fn factor(op: &SparseHermitianOperator, shift: f64) -> Result<Self> {
        let n = op.dim();
        let border: Vec<usize> = op.border_hint().to_vec();
        let mut is_border = vec![false; n];
        for &b in &border {
            is_border[b] = true;
        }
        let core: Vec<usize> = (0..n).filter(|&i| !is_border[i]).collect();
        let mut place = vec![Ok(0usize); n];
        for (pos, &i) in core.iter().enumerate() {
            place[i] = Ok(pos);
        }
        for (pos, &i) in border.iter().enumerate() {
            place[i] = Err(pos);
        }
        let nc = core.len();
        let nb = border.len();

        // split entries; also measure the core bandwidth
        let mut bw = 0usize;
        let mut b_trip: Vec<(usize, usize, Complex64)> = Vec::new();
        let mut e_cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nb];
        let mut f_rows: Vec<(usize, usize, Complex64)> = Vec::new();
        let mut d_dense = vec![C0; nb * nb];
        for (i, j, mut v) in op.triplets() {
            if i == j {
                v -= Complex64::new(shift, 0.0);
            }
            match (place[i], place[j]) {
                (Ok(ci), Ok(cj)) => {
                    bw = bw.max(ci.abs_diff(cj));
                    b_trip.push((ci, cj, v));
                }
                (Ok(ci), Err(bj)) => e_cols[bj].push((ci, v)),
                (Err(bi), Ok(cj)) => f_rows.push((bi, cj, v)),
                (Err(bi), Err(bj)) => d_dense[bi * nb + bj] += v,
            }
        }
        let banded = BandedLU::factor(nc, bw, bw, b_trip.into_iter()).map_err(|e| match e {
            CoreError::Factorization { detail, .. } => CoreError::Factorization { shift, detail },
            other => other,
        })?;

        // B⁻¹E and Schur complement
        let mut binv_e: Vec<Vec<Complex64>> = Vec::with_capacity(nb);
        for col in &e_cols {
            let mut x = vec![C0; nc];
            for &(ci, v) in col {
                x[ci] = v;
            }
            banded.solve(&mut x);
            binv_e.push(x);
        }
        let schur = if nb > 0 {
            let mut s = d_dense;
            for &(bi, cj, v) in &f_rows {
                for (bj, col) in binv_e.iter().enumerate() {
                    s[bi * nb + bj] -= v * col[cj];
                }
            }
            Some(DenseLU::factor(nb, s).map_err(|e| match e {
                CoreError::Factorization { detail, .. } => {
                    CoreError::Factorization { shift, detail }
                }
                other => other,
            })?)
        } else {
            None
        };
        Ok(ShiftedSolver {
            place,
            core,
            border,
            banded,
            binv_e,
            f_rows,
            schur,
            scratch1: std::cell::RefCell::new(vec![C0; n]),
        })
    }

    /// x ← (H − σ)⁻¹ x.
    pub fn solve(&self, x: &mut [Complex64]) {
        let nc = self.core.len();
        let nb = self.border.len();
        let mut scratch = self.scratch1.borrow_mut();
        let (b1, b2) = scratch.split_at_mut(nc);
        for (pos, &i) in self.core.iter().enumerate() {
            b1[pos] = x[i];
        }
        for (pos, &i) in self.border.iter().enumerate() {
            b2[pos] = x[i];
        }
        self.banded.solve(b1);
        if let Some(schur) = &self.schur {
            for &(bi, cj, v) in &self.f_rows {
                b2[bi] -= v * b1[cj];
            }
            schur.solve(&mut b2[..nb]);
            for (bj, col) in self.binv_e.iter().enumerate() {
                let y = b2[bj];
                if y != C0 {
                    for (pos, c) in col.iter().enumerate() {
                        b1[pos] -= c * y;
                    }
                }
            }
        }
        for (pos, &i) in self.core.iter().enumerate() {
            x[i] = b1[pos];
        }
        for (pos, &i) in self.border.iter().enumerate() {
            x[i] = b2[pos];
        }
        let _ = self.place.len();
    }
}
