//! Uniform-grid domain meshes for the 2D discretization, including
//! half-plane domains with imperfect (non-geodesic) boundaries.
//!
//! A mesh lives in the chart's *mesh coordinates* (identical to native
//! coordinates except UpperHalfPlane, which grids (x, ln y)). Nodes sit at
//! half-offset positions q = origin + (i+½)h so that a geodesic profile at
//! q1 = 0 falls exactly between the ghost row and the first node row — the
//! same convention as the 1D channels.
//!
//! The domain W is the part of the box on the ≥ side of the boundary
//! profile q1 = p(q2). Nodes adjacent to the profile are classified
//! physical boundary; nodes adjacent to the box edge are truncation
//! boundary. The q2 direction can optionally wrap (cylinder topology),
//! which removes the two q2 truncation edges; the wrap slice is recorded so
//! shifted solvers can treat it as a dense border.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{ChartKind, GaugeChart};
use crate::parallel;

/// Shape of the physical boundary ∂W in mesh coordinates, q1 = p(q2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryProfile {
    /// No physical boundary: the whole box is domain (bulk runs).
    None,
    /// The reference geodesic q1 = 0.
    Geodesic,
    /// q1 = amplitude · sin(2π q2 / wavelength).
    Sinusoidal { amplitude: f64, wavelength: f64 },
    /// Square wave: q1 = ±amplitude switching every half wavelength.
    Step { amplitude: f64, wavelength: f64 },
}

impl BoundaryProfile {
    /// Boundary offset at coordinate q2, or None for bulk meshes.
    pub fn offset(&self, q2: f64) -> Option<f64> {
        match *self {
            BoundaryProfile::None => None,
            BoundaryProfile::Geodesic => Some(0.0),
            BoundaryProfile::Sinusoidal { amplitude, wavelength } => {
                Some(amplitude * (2.0 * std::f64::consts::PI * q2 / wavelength).sin())
            }
            BoundaryProfile::Step { amplitude, wavelength } => {
                let phase = (q2 / wavelength).rem_euclid(1.0);
                Some(if phase < 0.5 { amplitude } else { -amplitude })
            }
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        match *self {
            BoundaryProfile::None | BoundaryProfile::Geodesic => 0.0,
            BoundaryProfile::Sinusoidal { amplitude, .. }
            | BoundaryProfile::Step { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            BoundaryProfile::None => "bulk".into(),
            BoundaryProfile::Geodesic => "geodesic".into(),
            BoundaryProfile::Sinusoidal { amplitude, wavelength } => {
                format!("sinusoidal(a={amplitude}, l={wavelength})")
            }
            BoundaryProfile::Step { amplitude, wavelength } => {
                format!("step(a={amplitude}, l={wavelength})")
            }
        }
    }
}

/// Node classification per the domain decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    PhysicalBoundary,
    TruncationBoundary,
}

/// Rectangular region and grid spec in mesh coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshRegion {
    pub q1_min: f64,
    pub q1_max: f64,
    pub q2_min: f64,
    pub q2_max: f64,
}

/// What a grid edge leaving a node runs into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Node(usize),
    PhysicalGhost,
    TruncationGhost,
}

/// Uniform-grid discretization of a domain W inside a coordinate box.
#[derive(Debug, Clone)]
pub struct DomainMesh {
    chart: GaugeChart,
    region: MeshRegion,
    h: [f64; 2],
    n1: usize,
    n2: usize,
    periodic_q2: bool,
    profile: BoundaryProfile,
    /// grid cell (i1 + n1·i2) → node id
    index: Vec<Option<usize>>,
    /// node id → (i1, i2)
    nodes: Vec<(usize, usize)>,
    class: Vec<NodeClass>,
}

/// Build the mesh for domain W = {q1 ≥ p(q2)} ∩ box.
///
/// Non-geodesic profiles are only meaningful where the q2-translates of the
/// q1 coordinate are isometries (Fermi charts and the UpperHalfPlane
/// vertical-geodesic cut); geodesic-polar charts take bulk meshes only.
pub fn build_domain(
    chart: GaugeChart,
    region: MeshRegion,
    profile: BoundaryProfile,
    h: [f64; 2],
    periodic_q2: bool,
) -> Result<DomainMesh> {
    if h[0] <= 0.0 || h[1] <= 0.0 {
        return Err(CoreError::Parameter("mesh spacing must be positive".into()));
    }
    if region.q1_max <= region.q1_min || region.q2_max <= region.q2_min {
        return Err(CoreError::Parameter("mesh region must have positive extent".into()));
    }
    match chart.chart() {
        ChartKind::GeodesicPolar => {
            if profile != BoundaryProfile::None {
                return Err(CoreError::Parameter(
                    "geodesic-polar meshes support bulk domains only".into(),
                ));
            }
        }
        ChartKind::UpperHalfPlane | ChartKind::Cartesian => {
            if !matches!(profile, BoundaryProfile::None | BoundaryProfile::Geodesic) {
                return Err(CoreError::Parameter(format!(
                    "profile {} not supported in the {} chart",
                    profile.describe(),
                    chart.chart().name()
                )));
            }
        }
        ChartKind::FermiAlongGeodesic => {}
    }
    if profile.max_amplitude() > 0.0
        && (region.q1_min > -profile.max_amplitude() || region.q1_max < profile.max_amplitude())
    {
        return Err(CoreError::Parameter("boundary profile leaves the mesh region".into()));
    }
    let n1 = ((region.q1_max - region.q1_min) / h[0]).round() as usize;
    let n2 = ((region.q2_max - region.q2_min) / h[1]).round() as usize;
    if n1 < 2 || n2 < 2 {
        return Err(CoreError::Parameter("mesh needs at least 2 cells per direction".into()));
    }
    if periodic_q2 {
        if let BoundaryProfile::Sinusoidal { wavelength, .. }
        | BoundaryProfile::Step { wavelength, .. } = profile
        {
            let span = region.q2_max - region.q2_min;
            let periods = span / wavelength;
            if (periods - periods.round()).abs() > 1e-9 {
                return Err(CoreError::Parameter(
                    "periodic q2 needs an integer number of profile wavelengths".into(),
                ));
            }
        }
    }

    let q1 = |i: usize| region.q1_min + (i as f64 + 0.5) * h[0];
    let q2 = |j: usize| region.q2_min + (j as f64 + 0.5) * h[1];
    let mut index = vec![None; n1 * n2];
    let mut nodes = Vec::new();
    for j in 0..n2 {
        let cut = profile.offset(q2(j));
        for i in 0..n1 {
            let pos = [q1(i), q2(j)];
            let inside = match cut {
                Some(c) => pos[0] >= c,
                None => true,
            } && chart.mesh_valid(pos);
            if inside {
                index[j * n1 + i] = Some(nodes.len());
                nodes.push((i, j));
            }
        }
    }
    if nodes.is_empty() {
        return Err(CoreError::EmptyDomain(format!(
            "profile {} in box [{}, {}]x[{}, {}]",
            profile.describe(),
            region.q1_min,
            region.q1_max,
            region.q2_min,
            region.q2_max
        )));
    }
    let mut mesh = DomainMesh {
        chart,
        region,
        h,
        n1,
        n2,
        periodic_q2,
        profile,
        index,
        nodes,
        class: Vec::new(),
    };
    mesh.class = mesh.classify();
    Ok(mesh)
}

impl DomainMesh {
    fn classify(&self) -> Vec<NodeClass> {
        let mut class = vec![NodeClass::Interior; self.nodes.len()];
        for (id, &(i, j)) in self.nodes.iter().enumerate() {
            let mut phys = false;
            let mut trunc = false;
            for dir in 0..4 {
                match self.neighbor_of(i, j, dir) {
                    Neighbor::Node(_) => {}
                    Neighbor::PhysicalGhost => phys = true,
                    Neighbor::TruncationGhost => trunc = true,
                }
            }
            if phys {
                class[id] = NodeClass::PhysicalBoundary;
            } else if trunc {
                class[id] = NodeClass::TruncationBoundary;
            }
        }
        class
    }

    /// dir: 0 = +q1, 1 = −q1, 2 = +q2, 3 = −q2.
    pub fn neighbor_of(&self, i: usize, j: usize, dir: usize) -> Neighbor {
        let (ni, nj, wrapped) = match dir {
            0 => {
                if i + 1 >= self.n1 {
                    return Neighbor::TruncationGhost;
                }
                (i + 1, j, false)
            }
            1 => {
                if i == 0 {
                    // below the box: physical if the ghost position is on the
                    // far side of the profile, truncation otherwise
                    let ghost_q1 = self.q1_of(0) - self.h[0];
                    return match self.profile.offset(self.q2_of(j)) {
                        Some(cut) if ghost_q1 < cut => Neighbor::PhysicalGhost,
                        _ => Neighbor::TruncationGhost,
                    };
                }
                (i - 1, j, false)
            }
            2 => {
                if j + 1 >= self.n2 {
                    if self.periodic_q2 {
                        (i, 0, true)
                    } else {
                        return Neighbor::TruncationGhost;
                    }
                } else {
                    (i, j + 1, false)
                }
            }
            3 => {
                if j == 0 {
                    if self.periodic_q2 {
                        (i, self.n2 - 1, true)
                    } else {
                        return Neighbor::TruncationGhost;
                    }
                } else {
                    (i, j - 1, false)
                }
            }
            _ => unreachable!(),
        };
        let _ = wrapped;
        match self.index[nj * self.n1 + ni] {
            Some(id) => Neighbor::Node(id),
            // a missing in-box neighbor can only be on the far side of the profile
            None => Neighbor::PhysicalGhost,
        }
    }

    pub fn chart(&self) -> &GaugeChart {
        &self.chart
    }

    pub fn profile(&self) -> BoundaryProfile {
        self.profile
    }

    pub fn region(&self) -> MeshRegion {
        self.region
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn periodic_q2(&self) -> bool {
        self.periodic_q2
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_grid(&self, id: usize) -> (usize, usize) {
        self.nodes[id]
    }

    pub fn node_class(&self, id: usize) -> NodeClass {
        self.class[id]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    fn q1_of(&self, i: usize) -> f64 {
        self.region.q1_min + (i as f64 + 0.5) * self.h[0]
    }

    fn q2_of(&self, j: usize) -> f64 {
        self.region.q2_min + (j as f64 + 0.5) * self.h[1]
    }

    /// Mesh coordinates of a node.
    pub fn node_coords(&self, id: usize) -> [f64; 2] {
        let (i, j) = self.nodes[id];
        [self.q1_of(i), self.q2_of(j)]
    }

    /// Volume weight at a node (the measure for the physical inner product).
    pub fn volume_weight(&self, id: usize) -> f64 {
        self.chart.mesh_metric(self.node_coords(id)).volume_weight
    }

    /// The q2 period when the mesh wraps.
    pub fn q2_period(&self) -> f64 {
        self.region.q2_max - self.region.q2_min
    }

    /// Polyline sampling of the physical boundary curve, in mesh
    /// coordinates, spaced ≤ h2/2 along q2.
    pub fn boundary_polyline(&self) -> Result<Vec<[f64; 2]>> {
        if self.profile == BoundaryProfile::None {
            return Err(CoreError::NoPhysicalBoundary);
        }
        let samples = 2 * self.n2 + 1;
        let span = self.region.q2_max - self.region.q2_min;
        let pts = (0..samples)
            .map(|k| {
                let t = self.region.q2_min + span * k as f64 / (samples - 1) as f64;
                [self.profile.offset(t).unwrap(), t]
            })
            .collect();
        Ok(pts)
    }

    /// Geodesic distance from every node to the physical boundary curve.
    pub fn distance_to_physical_boundary(&self) -> Result<Vec<f64>> {
        let mut polyline = self.boundary_polyline()?;
        if self.periodic_q2 {
            let period = self.q2_period();
            let shifted: Vec<[f64; 2]> = polyline
                .iter()
                .flat_map(|p| [[p[0], p[1] - period], [p[0], p[1] + period]])
                .collect();
            polyline.extend(shifted);
        }
        let ids: Vec<usize> = (0..self.node_count()).collect();
        Ok(parallel::map_collect(&ids, |&id| {
            let p = self.node_coords(id);
            polyline
                .iter()
                .map(|b| self.chart.mesh_distance(p, *b))
                .fold(f64::INFINITY, f64::min)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Point};

    fn fermi_chart(theta: f64) -> GaugeChart {
        GaugeChart::new(GeometryKind::Hyperbolic, ChartKind::FermiAlongGeodesic, theta).unwrap()
    }

    #[test]
    fn geodesic_profile_boundary_is_bottom_edge() {
        let mesh = build_domain(
            fermi_chart(1.0),
            MeshRegion { q1_min: 0.0, q1_max: 10.0, q2_min: 0.0, q2_max: 20.0 },
            BoundaryProfile::Geodesic,
            [0.5, 0.5],
            false,
        )
        .unwrap();
        for id in 0..mesh.node_count() {
            let (i, j) = mesh.node_grid(id);
            let (n1, n2) = mesh.grid_shape();
            let expected = if i == 0 {
                NodeClass::PhysicalBoundary
            } else if i + 1 == n1 || j == 0 || j + 1 == n2 {
                NodeClass::TruncationBoundary
            } else {
                NodeClass::Interior
            };
            assert_eq!(mesh.node_class(id), expected, "node {:?}", (i, j));
        }
    }

    #[test]
    fn zero_amplitude_profile_equals_geodesic() {
        let region = MeshRegion { q1_min: 0.0, q1_max: 4.0, q2_min: 0.0, q2_max: 8.0 };
        let a = build_domain(
            fermi_chart(1.0), region,
            BoundaryProfile::Sinusoidal { amplitude: 0.0, wavelength: 4.0 },
            [0.25, 0.25], false,
        )
        .unwrap();
        let b = build_domain(fermi_chart(1.0), region, BoundaryProfile::Geodesic, [0.25, 0.25], false)
            .unwrap();
        assert_eq!(a.node_count(), b.node_count());
        assert_eq!(a.classes(), b.classes());
    }

    #[test]
    fn sinusoidal_boundary_nodes_near_reference_geodesic() {
        // Remark-style audit: physical boundary nodes stay within
        // amplitude + h of the reference geodesic s = 0
        let h = 0.2;
        let mesh = build_domain(
            fermi_chart(2.2),
            MeshRegion { q1_min: -1.2, q1_max: 4.0, q2_min: 0.0, q2_max: 8.0 },
            BoundaryProfile::Sinusoidal { amplitude: 1.0, wavelength: 4.0 },
            [h, h],
            false,
        )
        .unwrap();
        let chart = *mesh.chart();
        let mut seen = 0;
        for id in 0..mesh.node_count() {
            if mesh.node_class(id) == NodeClass::PhysicalBoundary {
                let q = mesh.node_coords(id);
                let p = chart.mesh_to_native(q);
                // distance to the geodesic s=0 in Fermi coordinates is |s|
                let d = p.q1.abs();
                assert!(d <= 1.0 + h + 1e-12, "node at s={} too far", p.q1);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn interior_nodes_have_four_neighbors() {
        let mesh = build_domain(
            fermi_chart(1.0),
            MeshRegion { q1_min: -1.2, q1_max: 3.0, q2_min: 0.0, q2_max: 8.0 },
            BoundaryProfile::Sinusoidal { amplitude: 1.0, wavelength: 4.0 },
            [0.2, 0.2],
            false,
        )
        .unwrap();
        for id in 0..mesh.node_count() {
            if mesh.node_class(id) == NodeClass::Interior {
                let (i, j) = mesh.node_grid(id);
                for dir in 0..4 {
                    assert!(matches!(mesh.neighbor_of(i, j, dir), Neighbor::Node(_)));
                }
            }
        }
    }

    #[test]
    fn periodic_mesh_has_no_q2_truncation() {
        let mesh = build_domain(
            fermi_chart(2.2),
            MeshRegion { q1_min: -1.0, q1_max: 3.0, q2_min: 0.0, q2_max: 8.0 },
            BoundaryProfile::Sinusoidal { amplitude: 1.0, wavelength: 4.0 },
            [0.2, 0.2],
            true,
        )
        .unwrap();
        for id in 0..mesh.node_count() {
            let (i, j) = mesh.node_grid(id);
            if j == 0 || j + 1 == mesh.grid_shape().1 {
                // the wrap direction itself never truncates
                assert!(!matches!(mesh.neighbor_of(i, j, 2), Neighbor::TruncationGhost));
                assert!(!matches!(mesh.neighbor_of(i, j, 3), Neighbor::TruncationGhost));
            }
        }
    }

    #[test]
    fn empty_domain_rejected() {
        let r = build_domain(
            fermi_chart(1.0),
            MeshRegion { q1_min: -3.0, q1_max: -1.0, q2_min: 0.0, q2_max: 4.0 },
            BoundaryProfile::Sinusoidal { amplitude: 1.0, wavelength: 4.0 },
            [0.2, 0.2],
            false,
        );
        assert!(r.is_err());
    }

    #[test]
    fn distance_field_matches_s_for_geodesic_profile() {
        let mesh = build_domain(
            fermi_chart(1.0),
            MeshRegion { q1_min: 0.0, q1_max: 3.0, q2_min: 0.0, q2_max: 6.0 },
            BoundaryProfile::Geodesic,
            [0.25, 0.25],
            false,
        )
        .unwrap();
        let d = mesh.distance_to_physical_boundary().unwrap();
        for id in 0..mesh.node_count() {
            let q = mesh.node_coords(id);
            // distance to the sampled polyline ≥ |s|, and close to it for
            // nodes not near the q2 ends
            let s = q[0];
            assert!(d[id] >= s - 1e-9);
            if q[1] > 1.0 && q[1] < 5.0 {
                assert!((d[id] - s).abs() < 0.02, "s={s} d={}", d[id]);
            }
        }
    }

    #[test]
    fn bulk_mesh_has_no_boundary_polyline() {
        let chart =
            GaugeChart::new(GeometryKind::Euclidean, ChartKind::Cartesian, 1.0).unwrap();
        let mesh = build_domain(
            chart,
            MeshRegion { q1_min: -2.0, q1_max: 2.0, q2_min: -2.0, q2_max: 2.0 },
            BoundaryProfile::None,
            [0.5, 0.5],
            false,
        )
        .unwrap();
        assert!(mesh.distance_to_physical_boundary().is_err());
        assert!(mesh.classes().iter().all(|c| *c != NodeClass::PhysicalBoundary));
    }

    #[test]
    fn uhp_mesh_uses_log_coordinates() {
        let chart =
            GaugeChart::new(GeometryKind::Hyperbolic, ChartKind::UpperHalfPlane, 1.0).unwrap();
        let mesh = build_domain(
            chart,
            MeshRegion { q1_min: 0.0, q1_max: 2.0, q2_min: -1.0, q2_max: 1.0 },
            BoundaryProfile::Geodesic,
            [0.25, 0.25],
            false,
        )
        .unwrap();
        // native y = exp(w) stays positive even for w < 0
        for id in 0..mesh.node_count() {
            let p = mesh.chart().mesh_to_native(mesh.node_coords(id));
            assert!(p.q2 > 0.0);
        }
        // volume weight is e^{-w}
        let id0 = 0;
        let q = mesh.node_coords(id0);
        assert!((mesh.volume_weight(id0) - (-q[1]).exp()).abs() < 1e-14);
        let _ = Point::new(0.0, 1.0);
    }
}
