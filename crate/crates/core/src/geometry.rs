//! Geometries, coordinate charts and gauge potentials.
//!
//! Everything downstream works on one of two surfaces: the Euclidean plane
//! (scalar curvature 0) or the hyperbolic plane (scalar curvature −2,
//! Gaussian curvature −1). A uniform magnetic field of strength θ is the
//! two-form θ·ω, with ω the Riemannian volume form, and each chart carries a
//! fixed gauge 1-form A with dA = θ·ω:
//!
//! | chart               | metric                  | gauge A                  |
//! |---------------------|-------------------------|--------------------------|
//! | Cartesian (𝔼)       | dx² + dy²               | θ·x dy                   |
//! | UpperHalfPlane (ℍ)  | (dx² + dy²)/y²          | θ dx / y                 |
//! | GeodesicPolar (ℍ)   | ds² + sinh²s dφ²        | θ(cosh s − 1) dφ         |
//! | GeodesicPolar (𝔼)   | ds² + s² dφ²            | θ s²/2 dφ                |
//! | Fermi (ℍ)           | ds² + cosh²s dt²        | θ sinh s dt              |
//! | Fermi (𝔼)           | ds² + dt²               | θ s dt                   |
//!
//! Fermi coordinates (s, t) put a reference geodesic at s = 0 with t the
//! arclength along it and s the signed normal distance; half-plane domains
//! are cut there. Gauge choice is spectrally irrelevant (any two choices are
//! related by a unitary), so fixing these charts costs no generality.
//!
//! Edge integrals of A use the midpoint rule, which pairs with the O(h²)
//! five-point discretization downstream; `verify_flux` audits the discrete
//! flux dA = θ·ω plaquette by plaquette.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// The two constant-curvature model surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometryKind {
    Euclidean,
    Hyperbolic,
}

impl GeometryKind {
    /// Scalar curvature R (twice the Gaussian curvature).
    pub fn scalar_curvature(self) -> f64 {
        match self {
            GeometryKind::Euclidean => 0.0,
            GeometryKind::Hyperbolic => -2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Euclidean => "euclidean",
            GeometryKind::Hyperbolic => "hyperbolic",
        }
    }

    /// Radial fiber Jacobian J(s): circumference density of the circle at
    /// geodesic radius s (volume form J(s) ds∧dφ).
    pub fn radial_jacobian(self, s: f64) -> f64 {
        match self {
            GeometryKind::Euclidean => s,
            GeometryKind::Hyperbolic => s.sinh(),
        }
    }

    /// Radial gauge profile a(s) with A = θ·a(s) dφ, chosen so a(0) = 0
    /// (regular at the origin) and a′ = J.
    pub fn radial_gauge(self, s: f64) -> f64 {
        match self {
            GeometryKind::Euclidean => 0.5 * s * s,
            GeometryKind::Hyperbolic => s.cosh() - 1.0,
        }
    }

    /// Fermi fiber Jacobian J(s) (volume form J(s) ds∧dt).
    pub fn channel_jacobian(self, s: f64) -> f64 {
        match self {
            GeometryKind::Euclidean => 1.0,
            GeometryKind::Hyperbolic => s.cosh(),
        }
    }

    /// Fermi gauge profile b(s) with A = θ·b(s) dt, b(0) = 0, b′ = J.
    pub fn channel_gauge(self, s: f64) -> f64 {
        match self {
            GeometryKind::Euclidean => s,
            GeometryKind::Hyperbolic => s.sinh(),
        }
    }
}

/// Coordinate charts. Validity of a (geometry, chart) pair is enforced by
/// [`GaugeChart::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    Cartesian,
    UpperHalfPlane,
    GeodesicPolar,
    FermiAlongGeodesic,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Cartesian => "cartesian",
            ChartKind::UpperHalfPlane => "upper-half-plane",
            ChartKind::GeodesicPolar => "geodesic-polar",
            ChartKind::FermiAlongGeodesic => "fermi",
        }
    }
}

/// A point in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub q1: f64,
    pub q2: f64,
}

impl Point {
    pub fn new(q1: f64, q2: f64) -> Self {
        Point { q1, q2 }
    }
}

/// Diagonal metric coefficients and volume density at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricWeights {
    /// Coefficient of dq1².
    pub edge_weight_1: f64,
    /// Coefficient of dq2².
    pub edge_weight_2: f64,
    /// Volume density √(g₁g₂).
    pub volume_weight: f64,
}

/// A chart on 𝔼 or ℍ together with the fixed gauge 1-form A with dA = θ·ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeChart {
    geometry: GeometryKind,
    chart: ChartKind,
    /// Field strength θ (inverse squared length, model length unit 1).
    theta: f64,
}

impl GaugeChart {
    pub fn new(geometry: GeometryKind, chart: ChartKind, theta: f64) -> Result<Self> {
        let ok = match (geometry, chart) {
            (GeometryKind::Euclidean, ChartKind::Cartesian) => true,
            (GeometryKind::Euclidean, ChartKind::UpperHalfPlane) => false,
            (GeometryKind::Hyperbolic, ChartKind::Cartesian) => false,
            (GeometryKind::Hyperbolic, ChartKind::UpperHalfPlane) => true,
            (_, ChartKind::GeodesicPolar) | (_, ChartKind::FermiAlongGeodesic) => true,
        };
        if !ok {
            return Err(CoreError::InvalidChart {
                geometry: geometry.name(),
                chart: chart.name(),
            });
        }
        if !theta.is_finite() {
            return Err(CoreError::Parameter(format!("theta must be finite, got {theta}")));
        }
        Ok(GaugeChart { geometry, chart, theta })
    }

    pub fn geometry(&self) -> GeometryKind {
        self.geometry
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Chart validity region in native coordinates.
    pub fn is_valid(&self, p: Point) -> bool {
        match self.chart {
            ChartKind::Cartesian | ChartKind::FermiAlongGeodesic => {
                p.q1.is_finite() && p.q2.is_finite()
            }
            ChartKind::UpperHalfPlane => p.q1.is_finite() && p.q2 > 0.0,
            ChartKind::GeodesicPolar => p.q1 > 0.0 && p.q2.is_finite(),
        }
    }

    fn check(&self, p: Point) -> Result<()> {
        if self.is_valid(p) {
            Ok(())
        } else {
            Err(CoreError::InvalidPoint(p.q1, p.q2, self.chart.name()))
        }
    }

    /// Diagonal metric coefficients and volume density at `p` (native
    /// coordinates).
    pub fn metric_weights(&self, p: Point) -> Result<MetricWeights> {
        self.check(p)?;
        let w = match (self.geometry, self.chart) {
            (_, ChartKind::Cartesian) => MetricWeights {
                edge_weight_1: 1.0,
                edge_weight_2: 1.0,
                volume_weight: 1.0,
            },
            (_, ChartKind::UpperHalfPlane) => {
                let inv_y2 = 1.0 / (p.q2 * p.q2);
                MetricWeights {
                    edge_weight_1: inv_y2,
                    edge_weight_2: inv_y2,
                    volume_weight: inv_y2,
                }
            }
            (g, ChartKind::GeodesicPolar) => {
                let j = g.radial_jacobian(p.q1);
                MetricWeights { edge_weight_1: 1.0, edge_weight_2: j * j, volume_weight: j }
            }
            (g, ChartKind::FermiAlongGeodesic) => {
                let j = g.channel_jacobian(p.q1);
                MetricWeights { edge_weight_1: 1.0, edge_weight_2: j * j, volume_weight: j }
            }
        };
        Ok(w)
    }

    /// Components of the gauge 1-form A at `p` in native coordinates.
    pub fn gauge_potential(&self, p: Point) -> Result<[f64; 2]> {
        self.check(p)?;
        let th = self.theta;
        let a = match (self.geometry, self.chart) {
            (_, ChartKind::Cartesian) => [0.0, th * p.q1],
            (_, ChartKind::UpperHalfPlane) => [th / p.q2, 0.0],
            (g, ChartKind::GeodesicPolar) => [0.0, th * g.radial_gauge(p.q1)],
            (g, ChartKind::FermiAlongGeodesic) => [0.0, th * g.channel_gauge(p.q1)],
        };
        Ok(a)
    }

    /// Midpoint-rule line integral of A along the axis-aligned segment from
    /// `from` to `to` (native coordinates).
    pub fn edge_integral(&self, from: Point, to: Point) -> Result<f64> {
        let mid = Point::new(0.5 * (from.q1 + to.q1), 0.5 * (from.q2 + to.q2));
        let a = self.gauge_potential(mid)?;
        Ok(a[0] * (to.q1 - from.q1) + a[1] * (to.q2 - from.q2))
    }

    /// Exact model geodesic distance between two points of this chart.
    pub fn geodesic_distance(&self, p: Point, q: Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        let d = match (self.geometry, self.chart) {
            (_, ChartKind::Cartesian) | (GeometryKind::Euclidean, ChartKind::FermiAlongGeodesic) => {
                (p.q1 - q.q1).hypot(p.q2 - q.q2)
            }
            (_, ChartKind::UpperHalfPlane) => {
                let num = (p.q1 - q.q1).powi(2) + (p.q2 - q.q2).powi(2);
                acosh1p(num / (2.0 * p.q2 * q.q2))
            }
            (GeometryKind::Euclidean, ChartKind::GeodesicPolar) => {
                let c = (p.q2 - q.q2).cos();
                (p.q1 * p.q1 + q.q1 * q.q1 - 2.0 * p.q1 * q.q1 * c).max(0.0).sqrt()
            }
            (GeometryKind::Hyperbolic, ChartKind::GeodesicPolar) => {
                // cosh d − 1 = 2 sinh²(Δs/2) + 2 sinh s₁ sinh s₂ sin²(Δφ/2)
                let u = 2.0 * (0.5 * (p.q1 - q.q1)).sinh().powi(2)
                    + 2.0 * p.q1.sinh() * q.q1.sinh() * (0.5 * (p.q2 - q.q2)).sin().powi(2);
                acosh1p(u)
            }
            (GeometryKind::Hyperbolic, ChartKind::FermiAlongGeodesic) => {
                fermi_distance_hyperbolic(p, q)
            }
        };
        Ok(d)
    }

    // Mesh coordinates: identical to native coordinates except for the
    // UpperHalfPlane chart, whose 2D meshes are uniform in (x, w = ln y) so
    // that per-cell hyperbolic size stays bounded along the boundary
    // geodesic.

    /// Map mesh coordinates to native chart coordinates.
    pub fn mesh_to_native(&self, q: [f64; 2]) -> Point {
        match self.chart {
            ChartKind::UpperHalfPlane => Point::new(q[0], q[1].exp()),
            _ => Point::new(q[0], q[1]),
        }
    }

    pub fn mesh_valid(&self, q: [f64; 2]) -> bool {
        match self.chart {
            ChartKind::UpperHalfPlane => q[0].is_finite() && q[1].is_finite(),
            _ => self.is_valid(Point::new(q[0], q[1])),
        }
    }

    /// Metric weights in mesh coordinates.
    pub fn mesh_metric(&self, q: [f64; 2]) -> MetricWeights {
        match self.chart {
            ChartKind::UpperHalfPlane => {
                // metric e^{-2w} dx² + dw², volume e^{-w}
                let e = (-q[1]).exp();
                MetricWeights {
                    edge_weight_1: e * e,
                    edge_weight_2: 1.0,
                    volume_weight: e,
                }
            }
            _ => self
                .metric_weights(Point::new(q[0], q[1]))
                .expect("mesh point inside validity region"),
        }
    }

    /// Gauge 1-form components in mesh coordinates.
    pub fn mesh_gauge(&self, q: [f64; 2]) -> [f64; 2] {
        match self.chart {
            ChartKind::UpperHalfPlane => [self.theta * (-q[1]).exp(), 0.0],
            _ => self
                .gauge_potential(Point::new(q[0], q[1]))
                .expect("mesh point inside validity region"),
        }
    }

    /// Midpoint-rule edge integral of A in mesh coordinates.
    pub fn mesh_edge_integral(&self, from: [f64; 2], to: [f64; 2]) -> f64 {
        let mid = [0.5 * (from[0] + to[0]), 0.5 * (from[1] + to[1])];
        let a = self.mesh_gauge(mid);
        a[0] * (to[0] - from[0]) + a[1] * (to[1] - from[1])
    }

    /// Geodesic distance between two mesh-coordinate points.
    pub fn mesh_distance(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        self.geodesic_distance(self.mesh_to_native(p), self.mesh_to_native(q))
            .expect("mesh points inside validity region")
    }
}

/// acosh(1 + u) for u ≥ 0 without cancellation near u = 0.
fn acosh1p(u: f64) -> f64 {
    let u = u.max(0.0);
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// Distance in hyperbolic Fermi coordinates, from the hyperboloid embedding
/// X(s,t) = (cosh s cosh t, cosh s sinh t, sinh s):
/// cosh d = cosh s₁ cosh s₂ cosh Δt − sinh s₁ sinh s₂, rearranged to
/// cosh d − 1 = 2 sinh²(Δs/2) + 2 cosh s₁ cosh s₂ sinh²(Δt/2).
fn fermi_distance_hyperbolic(p: Point, q: Point) -> f64 {
    let u = 2.0 * (0.5 * (p.q1 - q.q1)).sinh().powi(2)
        + 2.0 * p.q1.cosh() * q.q1.cosh() * (0.5 * (p.q2 - q.q2)).sinh().powi(2);
    acosh1p(u)
}

/// Uniform grid of plaquettes for the flux audit.
#[derive(Debug, Clone, Copy)]
pub struct FluxGrid {
    /// Lower-left corner in native chart coordinates.
    pub origin: Point,
    /// Spacing along q1 and q2.
    pub spacing: [f64; 2],
    /// Plaquette counts along q1 and q2.
    pub cells: [usize; 2],
}

/// Compare, on every plaquette of `grid`, the loop sum of edge-integrated A
/// against θ × (Riemannian plaquette area by midpoint quadrature). Returns
/// the maximum relative residual; O(h²) under refinement.
pub fn verify_flux(chart: &GaugeChart, grid: FluxGrid) -> Result<f64> {
    let [h1, h2] = grid.spacing;
    if h1 <= 0.0 || h2 <= 0.0 {
        return Err(CoreError::Parameter("flux grid spacing must be positive".into()));
    }
    let mut max_residual = 0.0f64;
    for i in 0..grid.cells[0] {
        for j in 0..grid.cells[1] {
            let x0 = grid.origin.q1 + i as f64 * h1;
            let y0 = grid.origin.q2 + j as f64 * h2;
            let p00 = Point::new(x0, y0);
            let p10 = Point::new(x0 + h1, y0);
            let p11 = Point::new(x0 + h1, y0 + h2);
            let p01 = Point::new(x0, y0 + h2);
            let loop_sum = chart.edge_integral(p00, p10)?
                + chart.edge_integral(p10, p11)?
                + chart.edge_integral(p11, p01)?
                + chart.edge_integral(p01, p00)?;
            let center = Point::new(x0 + 0.5 * h1, y0 + 0.5 * h2);
            let area = chart.metric_weights(center)?.volume_weight * h1 * h2;
            let target = chart.theta() * area;
            let denom = target.abs().max(f64::MIN_POSITIVE);
            let residual = if chart.theta() == 0.0 {
                loop_sum.abs()
            } else {
                (loop_sum - target).abs() / denom
            };
            max_residual = max_residual.max(residual);
        }
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hyper(chart: ChartKind, theta: f64) -> GaugeChart {
        GaugeChart::new(GeometryKind::Hyperbolic, chart, theta).unwrap()
    }

    fn euclid(chart: ChartKind, theta: f64) -> GaugeChart {
        GaugeChart::new(GeometryKind::Euclidean, chart, theta).unwrap()
    }

    #[test]
    fn metric_weights_flat() {
        let c = euclid(ChartKind::Cartesian, 1.0);
        let w = c.metric_weights(Point::new(3.0, -7.0)).unwrap();
        assert_eq!((w.edge_weight_1, w.edge_weight_2, w.volume_weight), (1.0, 1.0, 1.0));
    }

    #[test]
    fn metric_weights_upper_half_plane() {
        let c = hyper(ChartKind::UpperHalfPlane, 1.0);
        let w = c.metric_weights(Point::new(0.0, 2.0)).unwrap();
        assert_relative_eq!(w.edge_weight_1, 0.25);
        assert_relative_eq!(w.edge_weight_2, 0.25);
        assert_relative_eq!(w.volume_weight, 0.25);
    }

    #[test]
    fn metric_weights_geodesic_polar() {
        let c = hyper(ChartKind::GeodesicPolar, 1.0);
        let w = c.metric_weights(Point::new(1.0, 0.3)).unwrap();
        assert_relative_eq!(w.edge_weight_2, 1.0f64.sinh().powi(2), max_relative = 1e-15);
        assert_relative_eq!(w.volume_weight, 1.0f64.sinh(), max_relative = 1e-15);
    }

    #[test]
    fn metric_weights_fermi() {
        let c = hyper(ChartKind::FermiAlongGeodesic, 1.0);
        let w = c.metric_weights(Point::new(0.7, 5.0)).unwrap();
        assert_relative_eq!(w.edge_weight_2, 0.7f64.cosh().powi(2), max_relative = 1e-15);
        let e = euclid(ChartKind::FermiAlongGeodesic, 1.0);
        let we = e.metric_weights(Point::new(0.7, 5.0)).unwrap();
        assert_eq!((we.edge_weight_1, we.edge_weight_2, we.volume_weight), (1.0, 1.0, 1.0));
    }

    #[test]
    fn gauge_cartesian() {
        let c = euclid(ChartKind::Cartesian, 1.0);
        assert_eq!(c.gauge_potential(Point::new(2.0, 5.0)).unwrap(), [0.0, 2.0]);
    }

    #[test]
    fn gauge_polar_regular_at_origin() {
        let c = hyper(ChartKind::GeodesicPolar, 2.0);
        let a = c.gauge_potential(Point::new(1e-12, 0.0)).unwrap();
        assert!(a[0] == 0.0 && a[1].abs() < 1e-20);
    }

    #[test]
    fn gauge_upper_half_plane() {
        let c = hyper(ChartKind::UpperHalfPlane, 1.0);
        let a = c.gauge_potential(Point::new(3.0, 2.0)).unwrap();
        assert_eq!(a, [0.5, 0.0]);
    }

    #[test]
    fn invalid_point_rejected() {
        let c = hyper(ChartKind::UpperHalfPlane, 1.0);
        assert!(c.metric_weights(Point::new(0.0, -1.0)).is_err());
        assert!(c.gauge_potential(Point::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn invalid_chart_combinations_rejected() {
        assert!(GaugeChart::new(GeometryKind::Hyperbolic, ChartKind::Cartesian, 1.0).is_err());
        assert!(GaugeChart::new(GeometryKind::Euclidean, ChartKind::UpperHalfPlane, 1.0).is_err());
    }

    #[test]
    fn distance_cartesian_345() {
        let c = euclid(ChartKind::Cartesian, 0.0);
        assert_relative_eq!(
            c.geodesic_distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)).unwrap(),
            5.0
        );
    }

    #[test]
    fn distance_uhp_vertical() {
        let c = hyper(ChartKind::UpperHalfPlane, 0.0);
        let d = c
            .geodesic_distance(Point::new(0.0, 1.0), Point::new(0.0, std::f64::consts::E))
            .unwrap();
        assert_relative_eq!(d, 1.0, max_relative = 1e-12);
        let z = c
            .geodesic_distance(Point::new(0.4, 2.0), Point::new(0.4, 2.0))
            .unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn distance_fermi_axis_is_arclength() {
        let c = hyper(ChartKind::FermiAlongGeodesic, 0.0);
        let d = c
            .geodesic_distance(Point::new(0.0, 1.0), Point::new(0.0, 4.5)).unwrap();
        assert_relative_eq!(d, 3.5, max_relative = 1e-12);
        // normal geodesics: distance along s at fixed t
        let d2 = c
            .geodesic_distance(Point::new(-1.0, 2.0), Point::new(2.0, 2.0)).unwrap();
        assert_relative_eq!(d2, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn flux_cartesian_exact() {
        let c = euclid(ChartKind::Cartesian, 1.0);
        let g = FluxGrid { origin: Point::new(-2.0, -2.0), spacing: [1.0, 1.0], cells: [4, 4] };
        assert!(verify_flux(&c, g).unwrap() < 1e-14);
    }

    #[test]
    fn flux_uhp_small_residual() {
        let c = hyper(ChartKind::UpperHalfPlane, 2.2);
        let g = FluxGrid { origin: Point::new(0.0, 1.0), spacing: [0.01, 0.01], cells: [20, 20] };
        let r = verify_flux(&c, g).unwrap();
        assert!(r < 1e-3, "residual {r}");
        // analytic-area oracle: exact integral of dx dy / y² per plaquette
        let h = 0.01;
        for j in 0..20 {
            let y = 1.0 + j as f64 * h;
            let loop_sum = 2.2 * h * (1.0 / y - 1.0 / (y + h));
            let exact_area = h * h / (y * (y + h));
            assert_relative_eq!(loop_sum, 2.2 * exact_area, max_relative = 1e-12);
        }
    }

    #[test]
    fn flux_refinement_is_second_order() {
        let c = hyper(ChartKind::GeodesicPolar, 1.0);
        let r1 = verify_flux(
            &c,
            FluxGrid { origin: Point::new(0.5, 0.0), spacing: [0.01, 0.01], cells: [10, 10] },
        )
        .unwrap();
        let r2 = verify_flux(
            &c,
            FluxGrid { origin: Point::new(0.5, 0.0), spacing: [0.005, 0.005], cells: [20, 20] },
        )
        .unwrap();
        let rate = r1 / r2;
        assert!((3.0..5.0).contains(&rate), "rate {rate} should be ~4");
    }

    #[test]
    fn flux_fermi_euclidean_exact() {
        let c = euclid(ChartKind::FermiAlongGeodesic, 1.3);
        let g = FluxGrid { origin: Point::new(-1.0, 0.0), spacing: [0.25, 0.5], cells: [8, 4] };
        assert!(verify_flux(&c, g).unwrap() < 1e-13);
    }

    #[test]
    fn discrete_gauge_freedom_leaves_plaquette_flux_unchanged() {
        // adding the discrete gradient of any scalar to the edge integrals
        // telescopes to zero around every plaquette, exactly
        let chi = |p: Point| (1.7 * p.q1).sin() * (0.9 * p.q2).cos() + 0.3 * p.q1 * p.q2;
        let c = hyper(ChartKind::UpperHalfPlane, 1.0);
        let h = 0.1;
        for i in 0..5 {
            for j in 0..5 {
                let x0 = -0.2 + i as f64 * h;
                let y0 = 1.0 + j as f64 * h;
                let p = [
                    Point::new(x0, y0),
                    Point::new(x0 + h, y0),
                    Point::new(x0 + h, y0 + h),
                    Point::new(x0, y0 + h),
                ];
                let mut plain = 0.0;
                let mut gauged = 0.0;
                for k in 0..4 {
                    let (a, b) = (p[k], p[(k + 1) % 4]);
                    let e = c.edge_integral(a, b).unwrap();
                    plain += e;
                    gauged += e + (chi(b) - chi(a));
                }
                assert!((plain - gauged).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn volume_weight_positive_on_samples() {
        let charts = [
            euclid(ChartKind::Cartesian, 1.0),
            euclid(ChartKind::GeodesicPolar, 1.0),
            euclid(ChartKind::FermiAlongGeodesic, 1.0),
            hyper(ChartKind::UpperHalfPlane, 1.0),
            hyper(ChartKind::GeodesicPolar, 1.0),
            hyper(ChartKind::FermiAlongGeodesic, 1.0),
        ];
        for chart in charts {
            for i in 1..20 {
                let p = Point::new(0.17 * i as f64, 0.29 * i as f64);
                if chart.is_valid(p) {
                    assert!(chart.metric_weights(p).unwrap().volume_weight > 0.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn distance_axioms_uhp(
            x1 in -3.0f64..3.0, y1 in 0.1f64..5.0,
            x2 in -3.0f64..3.0, y2 in 0.1f64..5.0,
            x3 in -3.0f64..3.0, y3 in 0.1f64..5.0,
        ) {
            let c = hyper(ChartKind::UpperHalfPlane, 0.0);
            let p = Point::new(x1, y1);
            let q = Point::new(x2, y2);
            let r = Point::new(x3, y3);
            let dpq = c.geodesic_distance(p, q).unwrap();
            let dqp = c.geodesic_distance(q, p).unwrap();
            let dpr = c.geodesic_distance(p, r).unwrap();
            let drq = c.geodesic_distance(r, q).unwrap();
            prop_assert!((dpq - dqp).abs() <= 1e-12);
            prop_assert!(c.geodesic_distance(p, p).unwrap() <= 1e-12);
            prop_assert!(dpq <= dpr + drq + 1e-12);
        }

        #[test]
        fn distance_axioms_fermi(
            s1 in -2.0f64..2.0, t1 in -3.0f64..3.0,
            s2 in -2.0f64..2.0, t2 in -3.0f64..3.0,
            s3 in -2.0f64..2.0, t3 in -3.0f64..3.0,
        ) {
            let c = hyper(ChartKind::FermiAlongGeodesic, 0.0);
            let p = Point::new(s1, t1);
            let q = Point::new(s2, t2);
            let r = Point::new(s3, t3);
            let dpq = c.geodesic_distance(p, q).unwrap();
            prop_assert!((dpq - c.geodesic_distance(q, p).unwrap()).abs() <= 1e-12);
            prop_assert!(c.geodesic_distance(p, p).unwrap() <= 1e-12);
            prop_assert!(dpq <= c.geodesic_distance(p, r).unwrap() + c.geodesic_distance(r, q).unwrap() + 1e-12);
        }
    }

    #[test]
    fn fermi_uhp_distance_agree_through_models() {
        // the Fermi axis maps to the UHP vertical geodesic x=0 with t = ln y;
        // points on the axis must agree between charts
        let f = hyper(ChartKind::FermiAlongGeodesic, 0.0);
        let u = hyper(ChartKind::UpperHalfPlane, 0.0);
        let df = f.geodesic_distance(Point::new(0.0, 0.2), Point::new(0.0, 1.7)).unwrap();
        let du = u
            .geodesic_distance(Point::new(0.0, 0.2f64.exp()), Point::new(0.0, 1.7f64.exp()))
            .unwrap();
        assert_relative_eq!(df, du, max_relative = 1e-12);
    }
}
