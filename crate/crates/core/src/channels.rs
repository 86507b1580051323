//! Separated-variable 1D channels: radial sectors and boundary-momentum
//! channels, as symmetric tridiagonal problems.
//!
//! In a rotationally or translationally symmetric chart the magnetic
//! Laplacian splits per angular sector ℓ ∈ ℤ (geodesic polar) or boundary
//! momentum k ∈ ℝ (Fermi), leaving a half-line operator
//!
//! ```text
//!   f ↦ −(1/J)(J f′)′ + ((σ − θ·a(s))/J)² f,      σ = ℓ or k,
//! ```
//!
//! with fiber Jacobian J and gauge profile a from [`crate::geometry`].
//!
//! Discretization: half-offset grid s_j = (j+½)h, finite-volume fluxes
//! J(s_{j±½}), then the discrete measure symmetrization D^{1/2} H D^{-1/2}
//! with D = diag(J(s_j)), giving a symmetric tridiagonal matrix. The
//! half-offset grid regularizes the polar coordinate origin: J(0) = 0 kills
//! the inner flux, so no boundary condition is needed there beyond
//! regularity. At a physical wall (channels, s = 0) Dirichlet places the
//! zero of f exactly on the wall via the ghost −f₀; Neumann drops the wall
//! flux, which is the vanishing normal derivative of the original
//! (untransformed) function. The truncation end S_max is always Dirichlet.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::GeometryKind;
use crate::parallel;

/// Boundary condition at a physical wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// Radial problems have no wall at s = 0.
    NotApplicable,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::NotApplicable => "none",
        }
    }
}

/// Which separated sector a 1D problem represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sector {
    /// Angular momentum ℓ of a radial sector.
    Radial(i64),
    /// Boundary momentum k of a half-plane channel.
    Channel(f64),
}

/// Half-offset uniform grid on (0, S_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n: usize,
    pub h: f64,
    /// Nodes sit at (j + ½)h.
    pub half_offset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub geometry: GeometryKind,
    pub theta: f64,
    pub sector: Sector,
    pub boundary_condition: BoundaryCondition,
    pub s_max: f64,
}

/// Symmetric tridiagonal realization of one separated channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tridiag1DProblem {
    pub grid: Grid1D,
    pub diagonal: Vec<f64>,
    pub offdiagonal: Vec<f64>,
    pub meta: ChannelMeta,
}

impl Tridiag1DProblem {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Node coordinate s_j.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.grid.h
    }
}

fn validate(n: usize, s_max: f64) -> Result<()> {
    if n < 16 {
        return Err(CoreError::Parameter(format!("n = {n} too small (need n >= 16)")));
    }
    if !(s_max > 0.0) {
        return Err(CoreError::Parameter(format!("S_max = {s_max} must be positive")));
    }
    Ok(())
}

/// Assemble the FV-symmetrized tridiagonal for potential V and fluxes J,
/// with `wall` describing the s = 0 end.
fn assemble_1d(
    n: usize,
    h: f64,
    jac: impl Fn(f64) -> f64,
    potential: impl Fn(f64) -> f64,
    wall: BoundaryCondition,
) -> (Vec<f64>, Vec<f64>) {
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for j in 0..n {
        let s = (j as f64 + 0.5) * h;
        let jc = jac(s);
        let jp = jac(s + 0.5 * h);
        let jm = jac(s - 0.5 * h);
        let mut d = (jp + jm) / jc * inv_h2 + potential(s);
        if j == 0 {
            match wall {
                // ghost −f₀: zero of f at s = 0, flux term doubled
                BoundaryCondition::Dirichlet => d += jm / jc * inv_h2,
                // zero wall flux
                BoundaryCondition::Neumann => d -= jm / jc * inv_h2,
                // polar origin: J(0) = 0 already removed the flux
                BoundaryCondition::NotApplicable => {}
            }
        }
        if j == n - 1 {
            // truncation end: Dirichlet, zero of f at S_max
            d += jp / jc * inv_h2;
        }
        diag.push(d);
        if j + 1 < n {
            let jn = jac(s + h);
            off.push(-jp * inv_h2 / (jc * jn).sqrt());
        }
    }
    (diag, off)
}

/// Radial sector ℓ of the bulk Landau Hamiltonian in geodesic polar
/// coordinates, truncated at S_max.
pub fn build_radial_problem(
    geometry: GeometryKind,
    theta: f64,
    ell: i64,
    n: usize,
    s_max: f64,
) -> Result<Tridiag1DProblem> {
    validate(n, s_max)?;
    let h = s_max / n as f64;
    let jac = move |s: f64| geometry.radial_jacobian(s);
    let gauge = move |s: f64| geometry.radial_gauge(s);
    let l = ell as f64;
    let potential = move |s: f64| {
        let m = (l - theta * gauge(s)) / jac(s);
        m * m
    };
    let (diagonal, offdiagonal) = assemble_1d(n, h, jac, potential, BoundaryCondition::NotApplicable);
    Ok(Tridiag1DProblem {
        grid: Grid1D { n, h, half_offset: true },
        diagonal,
        offdiagonal,
        meta: ChannelMeta {
            geometry,
            theta,
            sector: Sector::Radial(ell),
            boundary_condition: BoundaryCondition::NotApplicable,
            s_max,
        },
    })
}

/// Boundary-momentum channel k of the half-plane Landau Hamiltonian in Fermi
/// coordinates on s ∈ [0, S_max], with `bc` at the wall s = 0.
pub fn build_channel_problem(
    geometry: GeometryKind,
    theta: f64,
    k: f64,
    bc: BoundaryCondition,
    n: usize,
    s_max: f64,
) -> Result<Tridiag1DProblem> {
    validate(n, s_max)?;
    if bc == BoundaryCondition::NotApplicable {
        return Err(CoreError::Parameter(
            "channel problems need Dirichlet or Neumann at the wall".into(),
        ));
    }
    let h = s_max / n as f64;
    let jac = move |s: f64| geometry.channel_jacobian(s);
    let gauge = move |s: f64| geometry.channel_gauge(s);
    let potential = move |s: f64| {
        let m = (k - theta * gauge(s)) / jac(s);
        m * m
    };
    let (diagonal, offdiagonal) = assemble_1d(n, h, jac, potential, bc);
    Ok(Tridiag1DProblem {
        grid: Grid1D { n, h, half_offset: true },
        diagonal,
        offdiagonal,
        meta: ChannelMeta {
            geometry,
            theta,
            sector: Sector::Channel(k),
            boundary_condition: bc,
            s_max,
        },
    })
}

/// Sampled dispersion branches E_m(k) of the half-plane channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandStructure {
    pub geometry: GeometryKind,
    pub theta: f64,
    pub boundary_condition: BoundaryCondition,
    pub k_samples: Vec<f64>,
    /// `bands[m][i]` = m-th eigenvalue at `k_samples[i]`, sorted per k.
    pub bands: Vec<Vec<f64>>,
    /// Discretization used for every channel solve.
    pub n: usize,
    pub s_max: f64,
    /// Largest |ΔE|/|Δk| observed between adjacent samples, per band.
    pub max_slope: Vec<f64>,
}

impl BandStructure {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Check per-band continuity: every jump between adjacent samples must
    /// stay below `lipschitz × Δk + slack`.
    pub fn check_continuity(&self, lipschitz: f64, slack: f64) -> bool {
        for band in &self.bands {
            for i in 1..band.len() {
                let dk = (self.k_samples[i] - self.k_samples[i - 1]).abs();
                if (band[i] - band[i - 1]).abs() > lipschitz * dk + slack {
                    return false;
                }
            }
        }
        true
    }

    /// CSV rows `k, E_0, E_1, …` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for m in 0..self.bands.len() {
            out.push_str(&format!(",E_{m}"));
        }
        out.push('\n');
        for (i, k) in self.k_samples.iter().enumerate() {
            out.push_str(&format!("{k:e}"));
            for band in &self.bands {
                out.push_str(&format!(",{:e}", band[i]));
            }
            out.push('\n');
        }
        out
    }

    /// JSON sidecar with everything except the samples themselves.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "geometry": self.geometry.name(),
            "theta": self.theta,
            "boundary_condition": self.boundary_condition.name(),
            "bands": self.bands.len(),
            "k_min": self.k_samples.first(),
            "k_max": self.k_samples.last(),
            "k_count": self.k_samples.len(),
            "n": self.n,
            "s_max": self.s_max,
            "max_slope": self.max_slope,
        })
    }
}

fn lowest_eigenvalues(problem: &Tridiag1DProblem, count: usize) -> Vec<f64> {
    crate::eigen::tridiag::lowest(&problem.diagonal, &problem.offdiagonal, count)
}

/// Solve the lowest `bands` eigenvalues for every k in `k_grid`
/// (independent solves run in parallel, output order follows `k_grid`).
pub fn sweep_bands(
    geometry: GeometryKind,
    theta: f64,
    bc: BoundaryCondition,
    k_grid: &[f64],
    bands: usize,
    n: usize,
    s_max: f64,
) -> Result<BandStructure> {
    if k_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(CoreError::Parameter("k_grid must be sorted ascending".into()));
    }
    if bands == 0 {
        return Err(CoreError::Parameter("need at least one band".into()));
    }
    validate(n, s_max)?;
    let per_k: Vec<Vec<f64>> = parallel::map_collect(k_grid, |&k| {
        let problem = build_channel_problem(geometry, theta, k, bc, n, s_max)
            .expect("validated above");
        lowest_eigenvalues(&problem, bands)
    });
    Ok(collect_bands(geometry, theta, bc, k_grid.to_vec(), per_k, bands, n, s_max))
}

#[allow(clippy::too_many_arguments)]
fn collect_bands(
    geometry: GeometryKind,
    theta: f64,
    bc: BoundaryCondition,
    k_samples: Vec<f64>,
    per_k: Vec<Vec<f64>>,
    bands: usize,
    n: usize,
    s_max: f64,
) -> BandStructure {
    let mut band_vecs = vec![Vec::with_capacity(k_samples.len()); bands];
    for evs in &per_k {
        for (m, band) in band_vecs.iter_mut().enumerate() {
            band.push(evs[m]);
        }
    }
    let mut max_slope = vec![0.0f64; bands];
    for (m, band) in band_vecs.iter().enumerate() {
        for i in 1..band.len() {
            let dk = k_samples[i] - k_samples[i - 1];
            if dk > 0.0 {
                max_slope[m] = max_slope[m].max((band[i] - band[i - 1]).abs() / dk);
            }
        }
    }
    BandStructure {
        geometry,
        theta,
        boundary_condition: bc,
        k_samples,
        bands: band_vecs,
        n,
        s_max,
        max_slope,
    }
}

/// Controls for [`sweep_bands_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSweep {
    /// Refine intervals whose band values jump by more than this.
    pub max_jump: f64,
    /// Only refine where a band value lands inside [lo, hi] (+ margin).
    pub window: (f64, f64),
    pub window_margin: f64,
    /// Stop refining below this k spacing.
    pub min_dk: f64,
    /// Hard cap on total sample count.
    pub max_points: usize,
}

impl Default for AdaptiveSweep {
    fn default() -> Self {
        AdaptiveSweep {
            max_jump: 0.04,
            window: (f64::NEG_INFINITY, f64::INFINITY),
            window_margin: 0.3,
            min_dk: 1e-5,
            max_points: 40_000,
        }
    }
}

/// Band sweep with local bisection refinement: intervals where any band
/// jumps by more than `max_jump` (and touches the window of interest) are
/// split until resolved. Serves gap-coverage runs where sampling holes must
/// be smaller than the coverage resolution.
#[allow(clippy::too_many_arguments)]
pub fn sweep_bands_adaptive(
    geometry: GeometryKind,
    theta: f64,
    bc: BoundaryCondition,
    k_start: &[f64],
    bands: usize,
    n: usize,
    s_max: f64,
    opts: AdaptiveSweep,
) -> Result<BandStructure> {
    if bands == 0 {
        return Err(CoreError::Parameter("need at least one band".into()));
    }
    validate(n, s_max)?;
    let solve = |ks: &[f64]| -> Vec<Vec<f64>> {
        parallel::map_collect(ks, |&k| {
            let problem = build_channel_problem(geometry, theta, k, bc, n, s_max)
                .expect("validated above");
            lowest_eigenvalues(&problem, bands)
        })
    };
    let mut ks: Vec<f64> = k_start.to_vec();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ks.dedup();
    let mut vals = solve(&ks);

    let (w_lo, w_hi) = opts.window;
    let relevant = |a: &[f64], b: &[f64]| -> bool {
        a.iter()
            .chain(b.iter())
            .any(|&e| e >= w_lo - opts.window_margin && e <= w_hi + opts.window_margin)
    };
    loop {
        let mut midpoints = Vec::new();
        for i in 1..ks.len() {
            let dk = ks[i] - ks[i - 1];
            if dk <= opts.min_dk {
                continue;
            }
            if !relevant(&vals[i - 1], &vals[i]) {
                continue;
            }
            let jump = (0..bands)
                .map(|m| (vals[i][m] - vals[i - 1][m]).abs())
                .fold(0.0f64, f64::max);
            if jump > opts.max_jump {
                midpoints.push(0.5 * (ks[i] + ks[i - 1]));
            }
        }
        if midpoints.is_empty() || ks.len() + midpoints.len() > opts.max_points {
            break;
        }
        let new_vals = solve(&midpoints);
        // merge, keeping ks sorted
        let mut merged_k = Vec::with_capacity(ks.len() + midpoints.len());
        let mut merged_v = Vec::with_capacity(ks.len() + midpoints.len());
        let mut it_new = midpoints.iter().zip(new_vals.into_iter()).peekable();
        for (k, v) in ks.iter().zip(vals.into_iter()) {
            while let Some((nk, _)) = it_new.peek() {
                if **nk < *k {
                    let (nk, nv) = it_new.next().unwrap();
                    merged_k.push(*nk);
                    merged_v.push(nv);
                } else {
                    break;
                }
            }
            merged_k.push(*k);
            merged_v.push(v);
        }
        for (nk, nv) in it_new {
            merged_k.push(*nk);
            merged_v.push(nv);
        }
        ks = merged_k;
        vals = merged_v;
    }
    Ok(collect_bands(geometry, theta, bc, ks, vals, bands, n, s_max))
}
