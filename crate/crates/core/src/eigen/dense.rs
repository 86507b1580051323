//! Dense complex Hermitian eigensolver: Householder tridiagonalization,
//! diagonal phase rotation to a real symmetric tridiagonal, then Sturm
//! bisection (and inverse iteration + back-transform when eigenvectors are
//! requested). O(n³); intended for oracle duty on small operators and for
//! the block-Lanczos projected problem.

use num_complex::Complex64;

use super::tridiag;

/// Row-major dense Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DenseHermitian {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl DenseHermitian {
    pub fn zeros(n: usize) -> Self {
        DenseHermitian { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }
}

/// Householder reduction A = Q T Q*. Returns (diagonal, |offdiagonal|,
/// phases, Q if requested) where `phases` is the diagonal unitary turning
/// the complex tridiagonal real: T_real = P* T P.
struct Reduction {
    diag: Vec<f64>,
    off: Vec<f64>,
    phases: Vec<Complex64>,
    q: Option<DenseHermitian>,
}

fn householder_reduce(mut m: DenseHermitian, want_q: bool) -> Reduction {
    let n = m.n;
    let mut q = want_q.then(|| {
        let mut id = DenseHermitian::zeros(n);
        for i in 0..n {
            id.set(i, i, Complex64::new(1.0, 0.0));
        }
        id
    });
    let mut offs = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];

    for k in 0..n.saturating_sub(2) {
        // column x = A[k+1.., k]
        let mut norm2 = 0.0f64;
        for i in k + 1..n {
            norm2 += m.at(i, k).norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            offs[k] = Complex64::new(0.0, 0.0);
            continue;
        }
        let x0 = m.at(k + 1, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        // u = x − α e₁, normalized
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for i in k + 1..n {
            u[i] = m.at(i, k);
        }
        u[k + 1] -= alpha;
        let unorm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if unorm < 1e-300 {
            offs[k] = alpha;
            continue;
        }
        for z in u.iter_mut() {
            *z /= unorm;
        }
        // v = A u on the trailing block, β = u* v, w = 2v − 2βu
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in k + 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                acc += m.at(i, j) * u[j];
            }
            v[i] = acc;
        }
        let beta: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let w: Vec<Complex64> =
            v.iter().zip(&u).map(|(vi, ui)| 2.0 * vi - 2.0 * beta * ui).collect();
        // A ← A − u w* − w u* on the trailing block
        for i in k + 1..n {
            for j in k + 1..n {
                let delta = u[i] * w[j].conj() + w[i] * u[j].conj();
                let val = m.at(i, j) - delta;
                m.set(i, j, val);
            }
        }
        offs[k] = alpha;
        m.set(k + 1, k, alpha);
        for i in k + 2..n {
            m.set(i, k, Complex64::new(0.0, 0.0));
        }
        // accumulate Q ← Q (I − 2uu*)
        if let Some(qm) = q.as_mut() {
            for r in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for j in k + 1..n {
                    dot += qm.at(r, j) * u[j];
                }
                let dot2 = 2.0 * dot;
                for j in k + 1..n {
                    let val = qm.at(r, j) - dot2 * u[j].conj();
                    qm.set(r, j, val);
                }
            }
        }
    }
    if n >= 2 {
        offs[n - 2] = m.at(n - 1, n - 2);
    }

    let diag: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    // phase rotation: P₀ = 1, P_{j+1} = e_j P_j / |e_j|
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut off = vec![0.0f64; n.saturating_sub(1)];
    for j in 0..n.saturating_sub(1) {
        let e = offs[j];
        let r = e.norm();
        off[j] = r;
        phases[j + 1] = if r > 0.0 { e * phases[j] / r } else { phases[j] };
    }
    Reduction { diag, off, phases, q }
}

/// All eigenvalues of a dense Hermitian matrix, ascending.
pub fn eigenvalues(m: &DenseHermitian) -> Vec<f64> {
    if m.n == 0 {
        return Vec::new();
    }
    if m.n == 1 {
        return vec![m.at(0, 0).re];
    }
    let red = householder_reduce(m.clone(), false);
    tridiag::all_eigenvalues(&red.diag, &red.off)
}

/// Full eigendecomposition; eigenvectors are returned column-wise, matching
/// the ascending eigenvalue order.
pub fn eigen_decomposition(m: &DenseHermitian) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = m.n;
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    if n == 1 {
        return (vec![m.at(0, 0).re], vec![vec![Complex64::new(1.0, 0.0)]]);
    }
    let red = householder_reduce(m.clone(), true);
    let vals = tridiag::all_eigenvalues(&red.diag, &red.off);
    let q = red.q.expect("accumulated");
    let mut vectors = Vec::with_capacity(n);
    let mut cluster: Vec<Vec<f64>> = Vec::new();
    let mut cluster_val = f64::NAN;
    let scale = red
        .diag
        .iter()
        .map(|d| d.abs())
        .chain(red.off.iter().map(|o| o.abs()))
        .fold(1.0f64, f64::max);
    for &lam in &vals {
        // orthogonalize within near-degenerate clusters only
        if (lam - cluster_val).abs() > 1e-10 * scale {
            cluster.clear();
            cluster_val = lam;
        }
        let vt = tridiag::eigenvector(&red.diag, &red.off, lam, &cluster);
        cluster.push(vt.clone());
        // back-transform: v = Q · (P · vt)
        let mut vp = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            vp[i] = red.phases[i] * vt[i];
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += q.at(i, j) * vp[j];
            }
            v[i] = acc;
        }
        vectors.push(v);
    }
    (vals, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermitize(m: &mut DenseHermitian) {
        for i in 0..m.n {
            for j in 0..i {
                let v = m.at(i, j);
                m.set(j, i, v.conj());
            }
            let d = m.at(i, i);
            m.set(i, i, Complex64::new(d.re, 0.0));
        }
    }

    fn random_hermitian(n: usize, seed: u64) -> DenseHermitian {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseHermitian::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                m.set(i, j, v);
            }
        }
        hermitize(&mut m);
        m
    }

    #[test]
    fn two_by_two_pauli_like() {
        let mut m = DenseHermitian::zeros(2);
        m.set(0, 0, Complex64::new(1.0, 0.0));
        m.set(1, 1, Complex64::new(-1.0, 0.0));
        m.set(0, 1, Complex64::new(0.0, -2.0));
        m.set(1, 0, Complex64::new(0.0, 2.0));
        let ev = eigenvalues(&m);
        let r = 5.0f64.sqrt();
        assert!((ev[0] + r).abs() < 1e-12 && (ev[1] - r).abs() < 1e-12, "{ev:?}");
    }

    #[test]
    fn residuals_of_full_decomposition() {
        let n = 40;
        let m = random_hermitian(n, 7);
        let (vals, vecs) = eigen_decomposition(&m);
        let scale = vals.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for (lam, v) in vals.iter().zip(&vecs) {
            let mut rnorm = 0.0;
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += m.at(i, j) * v[j];
                }
                acc -= lam * v[i];
                rnorm += acc.norm_sqr();
            }
            assert!(rnorm.sqrt() / scale < 1e-10, "residual {}", rnorm.sqrt());
        }
        // trace check
        let tr: f64 = (0..n).map(|i| m.at(i, i).re).sum();
        let sum: f64 = vals.iter().sum();
        assert!((tr - sum).abs() < 1e-9 * scale.max(1.0));
    }

    #[test]
    fn orthonormal_eigenvectors() {
        let n = 24;
        let m = random_hermitian(n, 3);
        let (_, vecs) = eigen_decomposition(&m);
        for i in 0..n {
            for j in 0..=i {
                let dot: Complex64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot.norm() - expect).abs() < 1e-8, "({i},{j}): {dot}");
            }
        }
    }
}
