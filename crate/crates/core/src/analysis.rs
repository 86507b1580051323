//! Spectral analysis: closed-form reference spectra, Landau-level
//! clustering, band-union coverage, gap verdicts, boundary localization and
//! the supersymmetric ladder identities.
//!
//! Reference spectra:
//! - Euclidean, θ ≠ 0: λ_m = (2m+1)|θ|, m = 0, 1, …, no continuum.
//! - Hyperbolic, θ ≠ 0: λ_m = (2m+1)|θ| − m(m+1) for m < |θ| − ½, plus the
//!   continuum [¼ + θ², ∞).
//! - θ = 0: pure continuum, [0, ∞) and [¼, ∞) respectively.
//!
//! The ladder identity λ_{m,θ} − 2θ + 1 = λ_{m−1,θ−1} and the partner
//! statement that H_θ − θ and H_{θ−1} + θ − 1 share their nonzero spectrum
//! below the continuum are checked both on closed forms and on computed
//! spectra.

use serde::{Deserialize, Serialize};

use crate::channels::BandStructure;
use crate::error::{CoreError, Result};
use crate::geometry::GeometryKind;
use crate::mesh::DomainMesh;

/// Closed-form bulk spectrum of H_θ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceSpectrum {
    pub geometry: GeometryKind,
    pub theta: f64,
    /// Discrete Landau levels (all of them for hyperbolic; the first
    /// `EUCLIDEAN_LEVEL_CAP` for Euclidean θ ≠ 0).
    pub discrete_levels: Vec<f64>,
    pub continuum_start: Option<f64>,
    /// Largest admissible level index, None when no discrete levels exist
    /// (or when the ladder is infinite, Euclidean θ ≠ 0 — see `infinite`).
    pub m_max: Option<u32>,
    /// Euclidean θ ≠ 0: infinitely many levels exist beyond the stored cap.
    pub infinite: bool,
}

const EUCLIDEAN_LEVEL_CAP: u32 = 64;

/// Landau level λ_{m,θ} of the given geometry, if admissible.
pub fn landau_level(geometry: GeometryKind, theta: f64, m: u32) -> Option<f64> {
    let t = theta.abs();
    if t == 0.0 {
        return None;
    }
    let mf = m as f64;
    match geometry {
        GeometryKind::Euclidean => Some((2.0 * mf + 1.0) * t),
        GeometryKind::Hyperbolic => {
            if mf < t - 0.5 {
                Some((2.0 * mf + 1.0) * t - mf * (mf + 1.0))
            } else {
                None
            }
        }
    }
}

/// Build the reference spectrum for (geometry, θ).
pub fn closed_form_spectrum(geometry: GeometryKind, theta: f64) -> ReferenceSpectrum {
    let t = theta.abs();
    match geometry {
        GeometryKind::Euclidean => {
            if t == 0.0 {
                ReferenceSpectrum {
                    geometry,
                    theta,
                    discrete_levels: Vec::new(),
                    continuum_start: Some(0.0),
                    m_max: None,
                    infinite: false,
                }
            } else {
                let levels =
                    (0..EUCLIDEAN_LEVEL_CAP).map(|m| (2.0 * m as f64 + 1.0) * t).collect();
                ReferenceSpectrum {
                    geometry,
                    theta,
                    discrete_levels: levels,
                    continuum_start: None,
                    m_max: None,
                    infinite: true,
                }
            }
        }
        GeometryKind::Hyperbolic => {
            let continuum = Some(0.25 + t * t);
            let mut levels = Vec::new();
            let mut m = 0u32;
            while let Some(l) = landau_level(geometry, theta, m) {
                levels.push(l);
                m += 1;
            }
            let m_max = if levels.is_empty() { None } else { Some(m - 1) };
            ReferenceSpectrum {
                geometry,
                theta,
                discrete_levels: levels,
                continuum_start: continuum,
                m_max,
                infinite: false,
            }
        }
    }
}

impl ReferenceSpectrum {
    /// Spectral gaps (a, b) above the lowest Landau level, clipped to
    /// `window_top`. Gaps between consecutive levels, and — hyperbolic —
    /// between the last level and the continuum onset.
    pub fn gaps_above_lowest(&self, window_top: f64) -> Vec<(f64, f64)> {
        let mut gaps = Vec::new();
        let levels = &self.discrete_levels;
        for w in levels.windows(2) {
            if w[0] >= window_top {
                break;
            }
            gaps.push((w[0], w[1].min(window_top)));
        }
        if let (Some(cont), Some(&last)) = (self.continuum_start, levels.last()) {
            if last < cont && last < window_top {
                gaps.push((last, cont.min(window_top)));
            }
        }
        gaps.retain(|(a, b)| b > a);
        gaps
    }
}

/// A detected near-degenerate cluster of eigenvalues.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandauCluster {
    pub center: f64,
    pub members: Vec<f64>,
    pub multiplicity: usize,
    pub max_spread: f64,
}

/// Greedy merge of sorted eigenvalues: a value joins the current cluster
/// while it stays within `tol` of the cluster minimum, so spreads stay
/// ≤ tol. Deterministic.
pub fn cluster_levels(eigenvalues: &[f64], tol: f64) -> Vec<LandauCluster> {
    assert!(tol > 0.0, "clustering tolerance must be positive");
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters = Vec::new();
    let mut start = 0usize;
    for i in 0..=sorted.len() {
        let flush = i == sorted.len() || (sorted[i] - sorted[start]) > tol;
        if flush && i > start {
            let members: Vec<f64> = sorted[start..i].to_vec();
            let center = members.iter().sum::<f64>() / members.len() as f64;
            clusters.push(LandauCluster {
                center,
                multiplicity: members.len(),
                max_spread: members.last().unwrap() - members.first().unwrap(),
                members,
            });
            start = i;
        }
    }
    clusters
}

/// Coverage of an energy window by the union of swept band intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub window: (f64, f64),
    /// Merged covered subintervals, ascending.
    pub covered: Vec<(f64, f64)>,
    /// Maximal uncovered subintervals.
    pub uncovered: Vec<(f64, f64)>,
    pub largest_uncovered: Option<(f64, f64)>,
    pub largest_uncovered_width: f64,
    /// Bridging resolution δ of this report.
    pub delta: f64,
    /// Set when the window pokes past the trustworthy range.
    pub warning: Option<String>,
}

/// Union of per-band swept intervals against `window`, bridging adjacent
/// k-samples whose values differ by less than `delta`.
pub fn band_coverage(
    bands: &BandStructure,
    window: (f64, f64),
    delta: f64,
    trust_top: Option<f64>,
) -> Result<CoverageReport> {
    if delta <= 0.0 {
        return Err(CoreError::Parameter("coverage resolution must be positive".into()));
    }
    let (w_lo, w_hi) = window;
    if w_hi <= w_lo {
        return Err(CoreError::Parameter("coverage window must be nonempty".into()));
    }
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for band in &bands.bands {
        for i in 1..band.len() {
            let (a, b) = (band[i - 1].min(band[i]), band[i - 1].max(band[i]));
            if b - a < delta {
                intervals.push((a, b));
            } else {
                // sampling hole: samples themselves are spectral points
                intervals.push((a, a));
                intervals.push((b, b));
            }
        }
        if band.len() == 1 {
            intervals.push((band[0], band[0]));
        }
    }
    // widen samples to the resolution and clip to the window
    let mut clipped: Vec<(f64, f64)> = intervals
        .iter()
        .map(|&(a, b)| (a - 0.5 * delta, b + 0.5 * delta))
        .filter(|&(a, b)| b > w_lo && a < w_hi)
        .map(|(a, b)| (a.max(w_lo), b.min(w_hi)))
        .collect();
    clipped.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for (a, b) in clipped {
        match covered.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => covered.push((a, b)),
        }
    }
    let mut uncovered = Vec::new();
    let mut cursor = w_lo;
    for &(a, b) in &covered {
        if a > cursor {
            uncovered.push((cursor, a));
        }
        cursor = cursor.max(b);
    }
    if cursor < w_hi {
        uncovered.push((cursor, w_hi));
    }
    let largest = uncovered
        .iter()
        .copied()
        .max_by(|x, y| (x.1 - x.0).partial_cmp(&(y.1 - y.0)).unwrap());
    let warning = trust_top.and_then(|t| {
        (w_hi > t).then(|| format!("window top {w_hi} exceeds trustworthy range {t}"))
    });
    Ok(CoverageReport {
        window,
        covered,
        uncovered,
        largest_uncovered: largest,
        largest_uncovered_width: largest.map(|(a, b)| b - a).unwrap_or(0.0),
        delta,
        warning,
    })
}

/// Weighted probability mass of `vec` (symmetrized coordinates, flat-norm
/// normalized) within geodesic distance `cutoff` of the physical boundary.
pub fn boundary_localization(
    vec: &[num_complex::Complex64],
    mesh: &DomainMesh,
    cutoff: f64,
) -> Result<f64> {
    let distances = mesh.distance_to_physical_boundary()?;
    boundary_localization_with_distances(vec, &distances, cutoff)
}

/// Same as [`boundary_localization`] with a precomputed distance field.
pub fn boundary_localization_with_distances(
    vec: &[num_complex::Complex64],
    distances: &[f64],
    cutoff: f64,
) -> Result<f64> {
    if vec.len() != distances.len() {
        return Err(CoreError::Parameter(format!(
            "vector length {} != node count {}",
            vec.len(),
            distances.len()
        )));
    }
    let mut total = 0.0;
    let mut near = 0.0;
    for (v, &d) in vec.iter().zip(distances) {
        let m = v.norm_sqr();
        total += m;
        if d <= cutoff {
            near += m;
        }
    }
    if total <= 0.0 {
        return Err(CoreError::Parameter("zero vector".into()));
    }
    Ok(near / total)
}

/// One row of the ladder identity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderRow {
    pub m: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Verify λ_{m,θ} − 2θ + 1 = λ_{m−1,θ−1} for all 1 ≤ m ≤ m_max of `ref_a`
/// (hyperbolic closed forms). `ref_b` must be the spectrum at θ − 1.
pub fn ladder_identity_check(
    ref_a: &ReferenceSpectrum,
    ref_b: &ReferenceSpectrum,
    tol: f64,
) -> Result<Vec<LadderRow>> {
    if (ref_a.theta - 1.0 - ref_b.theta).abs() > 1e-12 {
        return Err(CoreError::Parameter(format!(
            "ladder check needs theta_b = theta_a - 1 (got {} and {})",
            ref_a.theta, ref_b.theta
        )));
    }
    let mut rows = Vec::new();
    for (m, &lam) in ref_a.discrete_levels.iter().enumerate().skip(1) {
        let lhs = lam - 2.0 * ref_a.theta + 1.0;
        let Some(&rhs) = ref_b.discrete_levels.get(m - 1) else {
            rows.push(LadderRow { m: m as u32, lhs, rhs: f64::NAN, pass: false });
            continue;
        };
        rows.push(LadderRow { m: m as u32, lhs, rhs, pass: (lhs - rhs).abs() <= tol });
    }
    Ok(rows)
}

/// Pairing of the nonzero shifted spectra of two supersymmetric partners.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SusyReport {
    pub theta: f64,
    /// (shifted A value, matched shifted B value, |difference|)
    pub matches: Vec<(f64, f64, f64)>,
    pub unmatched_a: Vec<f64>,
    pub unmatched_b: Vec<f64>,
    pub max_mismatch: f64,
    /// Zero modes of side A (the lowest-Landau-level kernel) excluded from
    /// the pairing.
    pub kernel_excluded: usize,
}

/// Compare the nonzero spectrum of H_θ − θ against H_{θ−1} + θ − 1 below
/// the shared continuum threshold ¼ + θ² − θ. `spec_a` and `spec_b` are
/// computed spectra of H_θ and H_{θ−1}; values within `kernel_tol` of zero
/// on side A are kernel modes and exempt.
pub fn susy_partner_check(
    spec_a: &[f64],
    spec_b: &[f64],
    theta: f64,
    kernel_tol: f64,
) -> SusyReport {
    let threshold = 0.25 + theta * theta - theta - 1e-6;
    let mut a_vals: Vec<f64> = spec_a.iter().map(|&l| l - theta).collect();
    let mut b_vals: Vec<f64> = spec_b.iter().map(|&l| l + theta - 1.0).collect();
    a_vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b_vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let kernel_excluded = a_vals.iter().filter(|v| v.abs() <= kernel_tol).count();
    a_vals.retain(|v| v.abs() > kernel_tol && *v < threshold);
    b_vals.retain(|v| v.abs() > kernel_tol && *v < threshold);
    let mut matches = Vec::new();
    let mut unmatched_a = Vec::new();
    let mut used = vec![false; b_vals.len()];
    let mut max_mismatch: f64 = 0.0;
    for &a in &a_vals {
        let best = b_vals
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, x), (_, y)| (a - *x).abs().partial_cmp(&(a - *y).abs()).unwrap());
        match best {
            Some((i, &b)) => {
                used[i] = true;
                matches.push((a, b, (a - b).abs()));
                max_mismatch = max_mismatch.max((a - b).abs());
            }
            None => unmatched_a.push(a),
        }
    }
    let unmatched_b: Vec<f64> = b_vals
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(v, _)| *v)
        .collect();
    if !unmatched_a.is_empty() || !unmatched_b.is_empty() {
        max_mismatch = f64::INFINITY;
    }
    SusyReport { theta, matches, unmatched_a, unmatched_b, max_mismatch, kernel_excluded }
}

/// Verdict for one bulk gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapVerdict {
    pub gap: (f64, f64),
    pub filled: bool,
    pub largest_hole: f64,
}

/// Per-gap FILLED / NOT-FILLED verdicts at resolution δ, plus the overall
/// no-gaps-above-the-lowest-level verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub geometry: GeometryKind,
    pub theta: f64,
    pub delta: f64,
    pub verdicts: Vec<GapVerdict>,
    pub all_filled: bool,
}

/// Judge each bulk gap above the lowest level against the half-plane
/// coverage: FILLED when its largest uncovered subinterval (shrunk by δ at
/// the gap edges, where the band terminates on the Landau level itself) is
/// below δ.
pub fn gap_filling_verdict(bulk: &ReferenceSpectrum, coverage: &CoverageReport) -> GapReport {
    let delta = coverage.delta;
    let mut verdicts = Vec::new();
    for (a, b) in bulk.gaps_above_lowest(coverage.window.1) {
        // interior of the gap, clipped to the coverage window
        let lo = (a + delta).max(coverage.window.0);
        let hi = (b - delta).min(coverage.window.1);
        if hi <= lo {
            continue;
        }
        let mut largest = 0.0f64;
        for &(ua, ub) in &coverage.uncovered {
            let oa = ua.max(lo);
            let ob = ub.min(hi);
            if ob > oa {
                largest = largest.max(ob - oa);
            }
        }
        verdicts.push(GapVerdict { gap: (a, b), filled: largest < delta, largest_hole: largest });
    }
    let all_filled = !verdicts.is_empty() && verdicts.iter().all(|v| v.filled);
    GapReport { geometry: bulk.geometry, theta: bulk.theta, delta, verdicts, all_filled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::BoundaryCondition;

    #[test]
    fn reference_spectrum_hyperbolic_22() {
        let r = closed_form_spectrum(GeometryKind::Hyperbolic, 2.2);
        assert_eq!(r.discrete_levels.len(), 2);
        assert!((r.discrete_levels[0] - 2.2).abs() < 1e-12);
        assert!((r.discrete_levels[1] - 4.6).abs() < 1e-12);
        assert!((r.continuum_start.unwrap() - 5.09).abs() < 1e-12);
        assert_eq!(r.m_max, Some(1));
    }

    #[test]
    fn reference_spectrum_small_theta_empty() {
        let r = closed_form_spectrum(GeometryKind::Hyperbolic, 0.2);
        assert!(r.discrete_levels.is_empty());
        assert!((r.continuum_start.unwrap() - 0.29).abs() < 1e-12);
        assert_eq!(r.m_max, None);
    }

    #[test]
    fn reference_spectrum_euclidean() {
        let r = closed_form_spectrum(GeometryKind::Euclidean, 1.5);
        assert!(r.infinite);
        assert!(r.continuum_start.is_none());
        assert!((r.discrete_levels[0] - 1.5).abs() < 1e-12);
        assert!((r.discrete_levels[1] - 4.5).abs() < 1e-12);
        assert!((r.discrete_levels[2] - 7.5).abs() < 1e-12);
        let z = closed_form_spectrum(GeometryKind::Euclidean, 0.0);
        assert_eq!(z.continuum_start, Some(0.0));
        let h0 = closed_form_spectrum(GeometryKind::Hyperbolic, 0.0);
        assert_eq!(h0.continuum_start, Some(0.25));
    }

    #[test]
    fn levels_increase_and_stay_below_continuum() {
        // spec invariant over a θ-grid in (0.6, 10)
        let mut theta = 0.6;
        while theta < 10.0 {
            let r = closed_form_spectrum(GeometryKind::Hyperbolic, theta);
            let cont = r.continuum_start.unwrap();
            for w in r.discrete_levels.windows(2) {
                assert!(w[1] > w[0], "theta={theta}");
            }
            for &l in &r.discrete_levels {
                assert!(l < cont, "theta={theta}: level {l} >= continuum {cont}");
            }
            theta += 0.097;
        }
    }

    #[test]
    fn reflection_symmetry_in_theta() {
        let a = closed_form_spectrum(GeometryKind::Hyperbolic, 2.2);
        let b = closed_form_spectrum(GeometryKind::Hyperbolic, -2.2);
        assert_eq!(a.discrete_levels, b.discrete_levels);
        assert_eq!(a.continuum_start, b.continuum_start);
    }

    #[test]
    fn cluster_simple() {
        let c = cluster_levels(&[0.999, 1.000, 1.001, 3.0], 0.01);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].multiplicity, 3);
        assert!((c[0].center - 1.0).abs() < 1e-9);
        assert_eq!(c[1].multiplicity, 1);
        assert!(c[0].max_spread <= 0.01);
    }

    #[test]
    fn cluster_empty() {
        assert!(cluster_levels(&[], 0.1).is_empty());
    }

    #[test]
    fn coverage_full_and_hole() {
        let bands = BandStructure {
            geometry: GeometryKind::Hyperbolic,
            theta: 2.2,
            boundary_condition: BoundaryCondition::Dirichlet,
            k_samples: (0..100).map(|i| i as f64 * 0.1).collect(),
            bands: vec![(0..100).map(|i| 2.2 + 0.025 * i as f64).collect()],
            n: 100,
            s_max: 10.0,
            max_slope: vec![0.25],
        };
        let full = band_coverage(&bands, (2.3, 4.6), 0.05, None).unwrap();
        assert!(full.largest_uncovered_width < 1e-12, "{:?}", full.uncovered);

        // bands with a hole (2.9, 3.1)
        let holey = BandStructure {
            bands: vec![(0..100)
                .map(|i| {
                    let e = 2.2 + 0.025 * i as f64;
                    if e > 2.9 && e < 3.1 { e + 0.2 } else { e }
                })
                .collect()],
            ..bands
        };
        let rep = band_coverage(&holey, (2.3, 4.6), 0.05, None).unwrap();
        assert!((rep.largest_uncovered_width - 0.2).abs() < 0.06, "{:?}", rep.largest_uncovered);
    }

    #[test]
    fn coverage_monotone_under_more_samples() {
        let mk = |n: usize| BandStructure {
            geometry: GeometryKind::Euclidean,
            theta: 1.0,
            boundary_condition: BoundaryCondition::Dirichlet,
            k_samples: (0..n).map(|i| i as f64).collect(),
            bands: vec![(0..n).map(|i| 1.0 + 0.03 * i as f64).collect()],
            n: 10,
            s_max: 1.0,
            max_slope: vec![0.03],
        };
        let small = band_coverage(&mk(50), (1.0, 4.0), 0.05, None).unwrap();
        let big = band_coverage(&mk(120), (1.0, 4.0), 0.05, None).unwrap();
        // enlarging the sweep never shrinks coverage
        let covered_len =
            |r: &CoverageReport| r.covered.iter().map(|(a, b)| b - a).sum::<f64>();
        assert!(covered_len(&big) >= covered_len(&small) - 1e-12);
    }

    #[test]
    fn ladder_closed_forms() {
        let t22 = closed_form_spectrum(GeometryKind::Hyperbolic, 2.2);
        let t12 = closed_form_spectrum(GeometryKind::Hyperbolic, 1.2);
        let rows = ladder_identity_check(&t22, &t12, 1e-12).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].pass);
        assert!((rows[0].lhs - 1.2).abs() < 1e-12);

        let t32 = closed_form_spectrum(GeometryKind::Hyperbolic, 3.2);
        let rows = ladder_identity_check(&t32, &t22, 1e-12).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.pass));
        // m=2: 10.0 − 6.4 + 1 = 4.6
        assert!((rows[1].lhs - 4.6).abs() < 1e-12);

        // θ=1.2 has no m ≥ 1 levels: empty check passes
        let t02 = closed_form_spectrum(GeometryKind::Hyperbolic, 0.2);
        let rows = ladder_identity_check(&t12, &t02, 1e-12).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn susy_closed_forms() {
        let a = closed_form_spectrum(GeometryKind::Hyperbolic, 2.2).discrete_levels;
        let b = closed_form_spectrum(GeometryKind::Hyperbolic, 1.2).discrete_levels;
        let rep = susy_partner_check(&a, &b, 2.2, 1e-9);
        assert_eq!(rep.kernel_excluded, 1);
        assert_eq!(rep.matches.len(), 1);
        assert!(rep.max_mismatch < 1e-12);
        assert!(rep.unmatched_a.is_empty() && rep.unmatched_b.is_empty());
    }

    #[test]
    fn verdict_negative_control() {
        // artificial band data with a hole inside the (2.2, 4.6) gap
        let bands = BandStructure {
            geometry: GeometryKind::Hyperbolic,
            theta: 2.2,
            boundary_condition: BoundaryCondition::Dirichlet,
            k_samples: (0..200).map(|i| i as f64 * 0.05).collect(),
            bands: vec![(0..200)
                .map(|i| {
                    let e = 2.2 + 0.02 * i as f64;
                    if e > 3.0 && e < 3.8 { e + 0.8 } else { e }
                })
                .collect()],
            n: 100,
            s_max: 10.0,
            max_slope: vec![1.0],
        };
        let bulk = closed_form_spectrum(GeometryKind::Hyperbolic, 2.2);
        let cov = band_coverage(&bands, (2.25, 5.5), 0.05, None).unwrap();
        let rep = gap_filling_verdict(&bulk, &cov);
        assert!(!rep.all_filled);
        assert!(rep.verdicts.iter().any(|v| !v.filled && v.largest_hole > 0.5));
    }
}
