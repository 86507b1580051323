//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues (by index or window), inverse iteration for eigenvectors.
//!
//! Bisection localizes each eigenvalue to a machine-precision bracket, which
//! doubles as its error certificate; the path is deterministic and immune to
//! clustering. Complexity O(n log ε⁻¹) per eigenvalue.

/// Count eigenvalues strictly below `lambda` via the LDLᵀ pivot recurrence.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0usize;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < 1e-300 {
            if q >= 0.0 { 1e-300 } else { -1e-300 }
        } else {
            q
        };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds enclosing the whole spectrum.
pub fn spectral_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo - 1.0, hi + 1.0)
}

/// k-th eigenvalue (0-based, ascending) by bisection. Returns the midpoint
/// of the final bracket; the bracket width is ≤ 4·ε·max(1,|λ|).
pub fn eigenvalue_by_index(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let (mut a, mut b) = spectral_bounds(diag, off);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(diag, off, mid) <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Lowest `count` eigenvalues, ascending.
pub fn lowest(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let count = count.min(diag.len());
    (0..count).map(|k| eigenvalue_by_index(diag, off, k)).collect()
}

/// All eigenvalues in [lo, hi], ascending, capped at `max_count`.
pub fn eigenvalues_in_window(
    diag: &[f64],
    off: &[f64],
    lo: f64,
    hi: f64,
    max_count: usize,
) -> Vec<f64> {
    let below_lo = sturm_count(diag, off, lo);
    let below_hi = sturm_count(diag, off, hi);
    let count = (below_hi - below_lo).min(max_count);
    (below_lo..below_lo + count)
        .map(|k| eigenvalue_by_index(diag, off, k))
        .collect()
}

/// All eigenvalues, ascending.
pub fn all_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    lowest(diag, off, diag.len())
}

/// Solve (T − λ)x = b by Gaussian elimination with partial pivoting
/// (tridiagonal, one fill diagonal). Overwrites `x` with the solution.
/// Rows carry (d, e, f) = entries in columns (i, i+1, i+2); c[i] is the
/// subdiagonal entry A[i+1, i]. Arrays are zero-padded so edge cases vanish.
fn shifted_solve(diag: &[f64], off: &[f64], lambda: f64, x: &mut [f64]) {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&v| v - lambda).collect();
    let mut e = vec![0.0f64; n];
    let mut f = vec![0.0f64; n];
    let mut c = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(off);
    c[..n - 1].copy_from_slice(off);
    for i in 0..n - 1 {
        if c[i].abs() > d[i].abs() {
            let upper = (d[i], e[i], f[i]);
            let lower = (c[i], d[i + 1], e[i + 1]);
            d[i] = lower.0;
            e[i] = lower.1;
            f[i] = lower.2;
            c[i] = upper.0;
            d[i + 1] = upper.1;
            e[i + 1] = upper.2;
            x.swap(i, i + 1);
        }
        let piv = safeguard(d[i]);
        let m = c[i] / piv;
        d[i + 1] -= m * e[i];
        e[i + 1] -= m * f[i];
        x[i + 1] -= m * x[i];
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        if i + 1 < n {
            v -= e[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= f[i] * x[i + 2];
        }
        x[i] = v / safeguard(d[i]);
    }
}

fn safeguard(p: f64) -> f64 {
    if p.abs() < 1e-300 {
        1e-300_f64.copysign(p)
    } else {
        p
    }
}

/// Eigenvector for eigenvalue `lambda` by inverse iteration, orthogonalized
/// against `prior` (previously computed vectors of the same cluster).
pub fn eigenvector(diag: &[f64], off: &[f64], lambda: f64, prior: &[Vec<f64>]) -> Vec<f64> {
    let n = diag.len();
    // deterministic start with a mild profile to avoid symmetry traps
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.37 * ((i * 2654435761usize) % 1024) as f64 / 1024.0)
        .collect();
    normalize(&mut v);
    for _ in 0..4 {
        shifted_solve(diag, off, lambda, &mut v);
        for p in prior {
            let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
        }
        normalize(&mut v);
    }
    v
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// ‖Tv − λv‖₂ for a computed pair.
pub fn residual_norm(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * v[i];
        if i > 0 {
            r += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += off[i] * v[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_only_returns_sorted_diagonal() {
        let diag = vec![3.0, -1.0, 2.0, 7.0];
        let off = vec![0.0, 0.0, 0.0];
        let ev = all_eigenvalues(&diag, &off);
        assert_eq!(ev.len(), 4);
        let expect = [-1.0, 2.0, 3.0, 7.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn free_laplacian_sine_modes() {
        // −f″ on [0, π] with Dirichlet ends: eigenvalues m²
        let n = 4000;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let ev = lowest(&diag, &off, 3);
        for (i, &e) in ev.iter().enumerate() {
            let m = (i + 1) as f64;
            assert!((e - m * m).abs() < 1e-5 * m * m + 1e-5, "{e} vs {}", m * m);
        }
    }

    #[test]
    fn harmonic_oscillator_levels() {
        // −f″ + s² on [−L, L], L = 12: levels 1, 3, 5
        let l = 12.0;
        let n = 6000;
        let h = 2.0 * l / (n as f64 + 1.0);
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let s = -l + (i as f64 + 1.0) * h;
            diag.push(2.0 / (h * h) + s * s);
        }
        let off = vec![-1.0 / (h * h); n - 1];
        let ev = lowest(&diag, &off, 3);
        for (m, &e) in ev.iter().enumerate() {
            let t = (2 * m + 1) as f64;
            assert!((e - t).abs() < 1e-6 + 1e-4 * t, "{e} vs {t}");
        }
    }

    #[test]
    fn window_agrees_with_index_path() {
        let diag: Vec<f64> = (0..50).map(|i| (i as f64) * 0.3).collect();
        let off = vec![0.11; 49];
        let full = all_eigenvalues(&diag, &off);
        let inside: Vec<f64> = full.iter().copied().filter(|&e| (2.0..8.0).contains(&e)).collect();
        let win = eigenvalues_in_window(&diag, &off, 2.0, 8.0, 100);
        assert_eq!(win.len(), inside.len());
        for (a, b) in win.iter().zip(&inside) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_residual_small() {
        let n = 500;
        let h = 1.0 / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let lam = eigenvalue_by_index(&diag, &off, 0);
        let v = eigenvector(&diag, &off, lam, &[]);
        let scale = spectral_bounds(&diag, &off).1.abs();
        assert!(residual_norm(&diag, &off, lam, &v) / scale < 1e-12);
    }

    #[test]
    fn degenerate_cluster_vectors_orthogonal() {
        // two exactly degenerate 2x2 blocks
        let diag = vec![1.0, 1.0, 5.0, 5.0];
        let off = vec![0.0, 0.0, 0.0];
        let l0 = eigenvalue_by_index(&diag, &off, 0);
        let v0 = eigenvector(&diag, &off, l0, &[]);
        let v1 = eigenvector(&diag, &off, l0, &[v0.clone()]);
        let dot: f64 = v0.iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
    }
}
