//! Eigenvalue engines and the request/result contract.
//!
//! Two paths share one interface: a dense, deterministic
//! bisection/inverse-iteration solver for symmetric tridiagonal problems
//! ([`tridiag`]), and an iterative shift-invert block Lanczos with certified
//! residuals for large sparse Hermitian operators ([`lanczos`]). The dense
//! Householder route ([`dense`]) serves as the independent oracle on small
//! instances.

pub mod banded;
pub mod dense;
pub mod lanczos;
pub mod tridiag;

use num_complex::Complex64;

use crate::channels::Tridiag1DProblem;
use crate::error::Result;
use crate::operator::SparseHermitianOperator;

/// What part of the spectrum is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenMode {
    LowestCount(usize),
    Window { lo: f64, hi: f64, max_count: usize },
}

/// Solver request; defaults match the acceptance runs.
#[derive(Debug, Clone)]
pub struct EigenRequest {
    pub mode: EigenMode,
    /// Relative residual target ‖Hv−λv‖/‖H‖.
    pub tolerance: f64,
    /// Lanczos iterations per restart round (0 = auto).
    pub max_iterations: usize,
    /// Lanczos block size (≥ 4 to resolve Landau clusters).
    pub block_size: usize,
    pub restart_rounds: usize,
    /// Seed for randomized start blocks; recorded in the result.
    pub seed: u64,
    /// Optional support set biasing the start block.
    pub start_support: Option<Vec<usize>>,
    pub compute_vectors: bool,
}

impl EigenRequest {
    pub fn lowest(count: usize) -> Self {
        EigenRequest { mode: EigenMode::LowestCount(count), ..Self::base() }
    }

    pub fn window(lo: f64, hi: f64, max_count: usize) -> Self {
        assert!(lo < hi, "window needs lo < hi");
        EigenRequest { mode: EigenMode::Window { lo, hi, max_count }, ..Self::base() }
    }

    fn base() -> Self {
        EigenRequest {
            mode: EigenMode::LowestCount(1),
            tolerance: 1e-8,
            max_iterations: 0,
            block_size: 4,
            restart_rounds: 2,
            seed: 0x1ab5eed,
            start_support: None,
            compute_vectors: false,
        }
    }
}

/// Eigenvalues with certificates; vectors when requested.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
    /// Certified relative residual (dense path: bisection bracket width).
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub seed: u64,
}

impl EigenResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Dense deterministic solve of a symmetric tridiagonal channel problem.
pub fn solve_tridiagonal(problem: &Tridiag1DProblem, request: &EigenRequest) -> EigenResult {
    let diag = &problem.diagonal;
    let off = &problem.offdiagonal;
    let scale = {
        let (lo, hi) = tridiag::spectral_bounds(diag, off);
        lo.abs().max(hi.abs()).max(1.0)
    };
    let values = match request.mode {
        EigenMode::LowestCount(c) => tridiag::lowest(diag, off, c),
        EigenMode::Window { lo, hi, max_count } => {
            tridiag::eigenvalues_in_window(diag, off, lo, hi, max_count)
        }
    };
    let mut vectors: Option<Vec<Vec<Complex64>>> = None;
    let mut residuals = Vec::with_capacity(values.len());
    if request.compute_vectors {
        let mut vecs = Vec::with_capacity(values.len());
        let mut cluster: Vec<Vec<f64>> = Vec::new();
        let mut cluster_val = f64::NAN;
        for &lam in &values {
            if (lam - cluster_val).abs() > 1e-10 * scale {
                cluster.clear();
                cluster_val = lam;
            }
            let v = tridiag::eigenvector(diag, off, lam, &cluster);
            residuals.push(tridiag::residual_norm(diag, off, lam, &v) / scale);
            cluster.push(v.clone());
            vecs.push(v.into_iter().map(|x| Complex64::new(x, 0.0)).collect());
        }
        vectors = Some(vecs);
    } else {
        // bisection brackets certify to a few ulps of the spectral scale
        residuals.extend(values.iter().map(|&lam| {
            4.0 * f64::EPSILON * lam.abs().max(1.0) / scale
        }));
    }
    let converged = residuals.iter().map(|&r| r <= request.tolerance.max(1e-12)).collect();
    EigenResult { eigenvalues: values, eigenvectors: vectors, residuals, converged, seed: request.seed }
}

/// Window-mode (or lowest-count) solve of a sparse Hermitian operator via
/// shift-invert block Lanczos with residual certificates.
pub fn eigs_window(op: &SparseHermitianOperator, request: &EigenRequest) -> Result<EigenResult> {
    let opts = |max_count: usize| lanczos::LanczosOptions {
        block_size: request.block_size.max(1),
        max_iterations: if request.max_iterations > 0 {
            request.max_iterations
        } else {
            (3 * max_count / request.block_size.max(1) + 24).min(op.dim())
        },
        rounds: request.restart_rounds.max(1),
        tolerance: request.tolerance,
        seed: request.seed,
        start_support: request.start_support.clone(),
    };
    let pairs = match request.mode {
        EigenMode::Window { lo, hi, max_count } => {
            let sigma = 0.5 * (lo + hi);
            let mut p = lanczos::shift_invert_pairs(
                op,
                sigma,
                max_count,
                |l| (lo..=hi).contains(&l),
                &opts(max_count),
            )?;
            p.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
            p
        }
        EigenMode::LowestCount(count) => lanczos::lowest_pairs(op, count, &opts(count))?,
    };
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let residuals: Vec<f64> = pairs.iter().map(|p| p.residual).collect();
    let converged: Vec<bool> = residuals.iter().map(|&r| r <= request.tolerance).collect();
    let eigenvectors = request
        .compute_vectors
        .then(|| pairs.into_iter().map(|p| p.vector).collect());
    Ok(EigenResult { eigenvalues, eigenvectors, residuals, converged, seed: request.seed })
}
