//! Numerical spectral laboratory for Landau Hamiltonians (magnetic
//! Laplacians) on the Euclidean and hyperbolic planes and their half-plane
//! restrictions.
//!
//! The crate builds H_θ = (d − iA)*(d − iA) for a uniform field dA = θ·ω in
//! several charts, computes spectra by separated 1D channels and by direct
//! 2D lattice-gauge discretization, and analyses the results against the
//! closed-form Landau levels, the supersymmetric ladder identities, and the
//! gap-filling behaviour of half-plane boundaries — including imperfect
//! (corrugated) boundaries where no closed form exists.
//!
//! Module map:
//! - [`geometry`]: charts, metric weights, gauge 1-forms, distances, flux audit
//! - [`channels`]: radial sectors, boundary-momentum channels, band sweeps
//! - [`mesh`] / [`operator`]: 2D domains and sparse Hermitian assembly
//! - [`eigen`]: tridiagonal bisection, dense Householder oracle, banded LU,
//!   shift-invert block Lanczos with residual certificates
//! - [`analysis`]: reference spectra, clustering, coverage, gap verdicts,
//!   localization, ladder/partner identities

pub mod analysis;
pub mod channels;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod operator;
pub mod parallel;

pub use analysis::{
    band_coverage, boundary_localization, closed_form_spectrum, cluster_levels,
    gap_filling_verdict, ladder_identity_check, susy_partner_check, CoverageReport, GapReport,
    LandauCluster, ReferenceSpectrum,
};
pub use channels::{
    build_channel_problem, build_radial_problem, sweep_bands, sweep_bands_adaptive,
    BandStructure, BoundaryCondition, Sector, Tridiag1DProblem,
};
pub use error::{CoreError, Result};
pub use eigen::{eigs_window, solve_tridiagonal, EigenMode, EigenRequest, EigenResult};
pub use geometry::{verify_flux, ChartKind, FluxGrid, GaugeChart, GeometryKind, Point};
pub use mesh::{build_domain, BoundaryProfile, DomainMesh, MeshRegion, NodeClass};
pub use operator::{
    assemble_magnetic_laplacian, assemble_with_twist, plaquette_flux_max_residual,
    SparseHermitianOperator,
};
