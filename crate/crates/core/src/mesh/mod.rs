//! Admissible triangulations, the regular background mesh, and piecewise-affine fields.

mod adapt;
mod background;
mod validate;

pub use adapt::{adapt_mesh, Band, StrainHint};
pub use background::{build_background_mesh, lattice_anchor, lattice_spacing};
pub use validate::{check_admissible, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::geometry::{self, Point, Rect};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_OMEGA_FACTOR: f64 = 1e6;
pub const DEFAULT_BG_DIST_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    /// Minimal interior angle in radians.
    pub theta0: f64,
    /// Minimal edge length.
    pub eps: f64,
    /// Maximal edge length is `omega_factor * eps`.
    pub omega_factor: f64,
    /// Distance multiplier of the background-mesh clause in crack classification.
    pub bg_dist_factor: f64,
}

impl MeshParams {
    pub fn new(theta0: f64, eps: f64) -> Self {
        MeshParams {
            theta0,
            eps,
            omega_factor: DEFAULT_OMEGA_FACTOR,
            bg_dist_factor: DEFAULT_BG_DIST_FACTOR,
        }
    }

    pub fn with_omega_factor(mut self, f: f64) -> Self {
        self.omega_factor = f;
        self
    }

    pub fn with_bg_dist_factor(mut self, f: f64) -> Self {
        self.bg_dist_factor = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0 && self.theta0 <= PI / 3.0 + 1e-15) {
            return Err(Error::InadmissibleParams(format!(
                "theta0 = {} must lie in (0, pi/3]",
                self.theta0
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InadmissibleParams(format!(
                "eps = {} must be positive",
                self.eps
            )));
        }
        if !(self.omega_factor >= 6.0) {
            return Err(Error::InadmissibleParams(format!(
                "omega_factor = {} must be at least 6",
                self.omega_factor
            )));
        }
        if !(self.bg_dist_factor > 0.0) {
            return Err(Error::InadmissibleParams(format!(
                "bg_dist_factor = {} must be positive",
                self.bg_dist_factor
            )));
        }
        Ok(())
    }

    /// ω(ε).
    pub fn omega(&self) -> f64 {
        self.omega_factor * self.eps
    }

    /// Absolute tolerance for coincidence predicates.
    pub fn tol(&self) -> f64 {
        1e-9 * self.eps
    }
}

/// Body Ω inside the enclosing rectangle Ω′, with optional notches cut from both.
///
/// A notch is a simple polygon; mesh triangles whose centroid falls inside it are
/// dropped, so the notch is resolved to a union of lattice triangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub omega: Rect,
    pub omega_prime: Rect,
    #[serde(default)]
    pub notches: Vec<Vec<Point>>,
}

impl Domain {
    pub fn new(omega: Rect, omega_prime: Rect) -> Result<Self> {
        let d = Domain {
            omega,
            omega_prime,
            notches: Vec::new(),
        };
        d.validate()?;
        Ok(d)
    }

    /// Ω′ = Ω padded by `pad` on the sides flagged in `sides` (left, bottom, right, top).
    pub fn padded(omega: Rect, pad: f64, sides: [bool; 4]) -> Result<Self> {
        let mut op = omega;
        if sides[0] {
            op.min[0] -= pad;
        }
        if sides[1] {
            op.min[1] -= pad;
        }
        if sides[2] {
            op.max[0] += pad;
        }
        if sides[3] {
            op.max[1] += pad;
        }
        Domain::new(omega, op)
    }

    /// Whole bounding box, no Dirichlet collar. Used for meshes read without a domain.
    pub fn unconstrained(bbox: Rect) -> Self {
        Domain {
            omega: bbox,
            omega_prime: bbox,
            notches: Vec::new(),
        }
    }

    pub fn with_notch(mut self, polygon: Vec<Point>) -> Self {
        self.notches.push(polygon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(Error::InvalidDomain("omega has no area".into()));
        }
        if !self.omega_prime.contains_rect(&self.omega, 0.0) {
            return Err(Error::InvalidDomain(
                "omega is not contained in omega_prime".into(),
            ));
        }
        if self.omega_prime.area() - self.omega.area() <= 0.0 {
            return Err(Error::InvalidDomain(
                "the Dirichlet collar has no area".into(),
            ));
        }
        for n in &self.notches {
            if n.len() < 3 {
                return Err(Error::InvalidDomain(
                    "notch polygon needs 3 vertices".into(),
                ));
            }
        }
        Ok(())
    }

    /// Sides of Ω lying inside Ω′ (left, bottom, right, top); these carry the boundary datum.
    pub fn dirichlet_sides(&self) -> [bool; 4] {
        [
            self.omega_prime.min[0] < self.omega.min[0],
            self.omega_prime.min[1] < self.omega.min[1],
            self.omega_prime.max[0] > self.omega.max[0],
            self.omega_prime.max[1] > self.omega.max[1],
        ]
    }

    pub fn in_notch(&self, p: Point) -> bool {
        self.notches
            .iter()
            .any(|n| geometry::point_in_polygon(p, n))
    }
}

/// Bit-exact geometric identity of a triangle, stable across meshes sharing its nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriangleKey(pub [[u64; 2]; 3]);

impl TriangleKey {
    pub fn from_points(p: &[Point; 3]) -> Self {
        let mut k = [
            [(p[0][0] + 0.0).to_bits(), (p[0][1] + 0.0).to_bits()],
            [(p[1][0] + 0.0).to_bits(), (p[1][1] + 0.0).to_bits()],
            [(p[2][0] + 0.0).to_bits(), (p[2][1] + 0.0).to_bits()],
        ];
        k.sort();
        TriangleKey(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v: [usize; 2],
    /// Incident triangles; the second is `None` on the mesh boundary.
    pub tris: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tris[1].is_none()
    }

    pub fn other(&self, t: usize) -> Option<usize> {
        if self.tris[0] == Some(t) {
            self.tris[1]
        } else {
            self.tris[0]
        }
    }
}

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Immutable triangulation of Ω′ with cached geometric data.
#[derive(Clone, Debug)]
pub struct Triangulation {
    id: u64,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    node_tris: Vec<Vec<usize>>,
    params: MeshParams,
    domain: Domain,
    notch_area: f64,
    background: Vec<bool>,
    area: Vec<f64>,
    omega_area: Vec<f64>,
    prime_area: Vec<f64>,
    collar: Vec<bool>,
    pinned: Vec<bool>,
    keys: HashMap<TriangleKey, usize>,
}

impl Triangulation {
    /// Builds adjacency and cached data. Clockwise triangles are reoriented.
    pub fn new(
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        params: MeshParams,
        domain: Domain,
        notch_area: f64,
    ) -> Result<Self> {
        params.validate()?;
        let nn = nodes.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= nn) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a missing node"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a node")));
            }
            let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            if geometry::triangle_area(&p) < 0.0 {
                tri.swap(1, 2);
            }
        }
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut node_tris = vec![Vec::new(); nn];
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_map.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        v: [key.0, key.1],
                        tris: [None, None],
                    });
                    edges.len() - 1
                });
                let slot = &mut edges[e].tris;
                if slot[0].is_none() {
                    slot[0] = Some(t);
                } else if slot[1].is_none() {
                    slot[1] = Some(t);
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) has more than two triangles",
                        key.0, key.1
                    )));
                }
                te[i] = e;
                node_tris[a].push(t);
            }
            tri_edges.push(te);
        }
        let h = lattice_spacing(&params);
        let anchor = lattice_anchor(&domain, &params);
        let tol = params.tol();
        let mut background = Vec::with_capacity(triangles.len());
        let mut area = Vec::with_capacity(triangles.len());
        let mut omega_area = Vec::with_capacity(triangles.len());
        let mut prime_area = Vec::with_capacity(triangles.len());
        let mut collar = Vec::with_capacity(triangles.len());
        let omega_poly = domain.omega.corners();
        for tri in &triangles {
            let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            background.push(is_lattice_triangle(&p, anchor, h, tol));
            area.push(geometry::triangle_area(&p));
            omega_area.push(geometry::triangle_rect_area(&p, &domain.omega));
            prime_area.push(geometry::triangle_rect_area(&p, &domain.omega_prime));
            collar.push(geometry::convex_distance(&p, &omega_poly) > tol);
        }
        let mut pinned = vec![false; nn];
        for (t, tri) in triangles.iter().enumerate() {
            if collar[t] {
                for &i in tri {
                    pinned[i] = true;
                }
            }
        }
        let mut keys = HashMap::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            keys.insert(
                TriangleKey::from_points(&[nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]),
                t,
            );
        }
        Ok(Triangulation {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            nodes,
            triangles,
            edges,
            tri_edges,
            node_tris,
            params,
            domain,
            notch_area,
            background,
            area,
            omega_area,
            prime_area,
            collar,
            pinned,
            keys,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn params(&self) -> &MeshParams {
        &self.params
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn notch_area(&self) -> f64 {
        self.notch_area
    }

    /// Edge ids of triangle `t`; edge `i` joins local vertices `i` and `i+1`.
    pub fn tri_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn node_triangles(&self, v: usize) -> &[usize] {
        &self.node_tris[v]
    }

    pub fn points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn key(&self, t: usize) -> TriangleKey {
        TriangleKey::from_points(&self.points(t))
    }

    pub fn find(&self, key: &TriangleKey) -> Option<usize> {
        self.keys.get(key).copied()
    }

    /// Edge-neighbors of `t` (None across mesh-boundary edges).
    pub fn neighbors(&self, t: usize) -> [Option<usize>; 3] {
        let te = self.tri_edges[t];
        [
            self.edges[te[0]].other(t),
            self.edges[te[1]].other(t),
            self.edges[te[2]].other(t),
        ]
    }

    pub fn is_background(&self, t: usize) -> bool {
        self.background[t]
    }
    pub fn area(&self, t: usize) -> f64 {
        self.area[t]
    }
    /// |T ∩ Ω|.
    pub fn omega_area(&self, t: usize) -> f64 {
        self.omega_area[t]
    }
    /// |T ∩ Ω′|.
    pub fn prime_area(&self, t: usize) -> f64 {
        self.prime_area[t]
    }
    /// T ∩ Ω̄ = ∅: the triangle lies in the Dirichlet collar.
    pub fn is_collar(&self, t: usize) -> bool {
        self.collar[t]
    }
    pub fn is_pinned(&self, v: usize) -> bool {
        self.pinned[v]
    }
    pub fn pinned(&self) -> &[bool] {
        &self.pinned
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let ed = self.edges[e];
        geometry::dist(self.nodes[ed.v[0]], self.nodes[ed.v[1]])
    }

    pub fn bbox(&self) -> Rect {
        let (lo, hi) = geometry::bbox(&self.nodes);
        Rect { min: lo, max: hi }
    }

    /// Distance from triangle `t` to ∂Ω′ (0 if it crosses or touches it).
    pub fn dist_to_prime_boundary(&self, t: usize) -> f64 {
        self.points(t)
            .iter()
            .map(|&p| self.domain.omega_prime.depth(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Same node positions, new connectivity-preserving copy with moved nodes.
    pub(crate) fn with_nodes(&self, nodes: Vec<Point>) -> Result<Self> {
        Triangulation::new(
            nodes,
            self.triangles.clone(),
            self.params,
            self.domain.clone(),
            self.notch_area,
        )
    }

    pub fn zero_field(&self) -> DisplacementField {
        DisplacementField {
            mesh_id: self.id,
            values: vec![[0.0; 2]; self.nodes.len()],
        }
    }

    pub fn check_field(&self, u: &DisplacementField) -> Result<()> {
        if u.mesh_id != self.id || u.values.len() != self.nodes.len() {
            return Err(Error::MeshFieldMismatch {
                mesh: self.id,
                field: u.mesh_id,
            });
        }
        Ok(())
    }

    /// Reinterprets nodal values (e.g. read from disk) as a field on this mesh.
    pub fn field_from_values(&self, values: Vec<[f64; 2]>) -> Result<DisplacementField> {
        if values.len() != self.nodes.len() {
            return Err(Error::MeshFieldMismatch {
                mesh: self.id,
                field: 0,
            });
        }
        Ok(DisplacementField {
            mesh_id: self.id,
            values,
        })
    }
}

fn is_lattice_triangle(p: &[Point; 3], anchor: Point, h: f64, tol: f64) -> bool {
    let mut ij = [[0i64; 2]; 3];
    for (k, q) in p.iter().enumerate() {
        for a in 0..2 {
            let s = (q[a] - anchor[a]) / h;
            let r = s.round();
            if ((s - r) * h).abs() > tol {
                return false;
            }
            ij[k][a] = r as i64;
        }
    }
    let i0 = ij.iter().map(|c| c[0]).min().unwrap();
    let j0 = ij.iter().map(|c| c[1]).min().unwrap();
    let mut rel: Vec<(i64, i64)> = ij.iter().map(|c| (c[0] - i0, c[1] - j0)).collect();
    rel.sort();
    rel == [(0, 0), (1, 0), (1, 1)] || rel == [(0, 0), (0, 1), (1, 1)]
}

/// Continuous piecewise-affine displacement: one 2-vector per node of its mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub mesh_id: u64,
    pub values: Vec<[f64; 2]>,
}

impl DisplacementField {
    pub fn value_at(&self, mesh: &Triangulation, t: usize, x: Point) -> [f64; 2] {
        let tri = mesh.triangles()[t];
        let p = mesh.points(t);
        let a = geometry::triangle_area(&p);
        let l1 = geometry::orient(x, p[1], p[2]) * 0.5 / a;
        let l2 = geometry::orient(p[0], x, p[2]) * 0.5 / a;
        let l0 = 1.0 - l1 - l2;
        let u = &self.values;
        [
            l0 * u[tri[0]][0] + l1 * u[tri[1]][0] + l2 * u[tri[2]][0],
            l0 * u[tri[0]][1] + l1 * u[tri[1]][1] + l2 * u[tri[2]][1],
        ]
    }

    /// Same nodal values attached to another mesh with identical node numbering.
    pub fn transfer(&self, mesh: &Triangulation) -> Result<DisplacementField> {
        mesh.field_from_values(self.values.clone())
    }

    pub fn axpy(&mut self, a: f64, other: &DisplacementField) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            x[0] += a * y[0];
            x[1] += a * y[1];
        }
    }
}

/// Time-dependent displacement datum g(t, x) defined on all of Ω′.
pub trait BoundaryProgram {
    fn displacement(&self, t: f64, x: Point) -> [f64; 2];
}

impl<F: Fn(f64, Point) -> [f64; 2]> BoundaryProgram for F {
    fn displacement(&self, t: f64, x: Point) -> [f64; 2] {
        self(t, x)
    }
}

/// Nodal interpolation g_T of g(t, ·).
pub fn interpolate<G: BoundaryProgram + ?Sized>(
    mesh: &Triangulation,
    g: &G,
    t: f64,
) -> DisplacementField {
    DisplacementField {
        mesh_id: mesh.id(),
        values: mesh.nodes().iter().map(|&x| g.displacement(t, x)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_mesh(eps: f64) -> Triangulation {
        let dom =
            Domain::new(Rect::new(0.2, 0.2, 0.8, 0.8), Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        build_background_mesh(&dom, &MeshParams::new(20f64.to_radians(), eps)).unwrap()
    }

    #[test]
    fn adjacency_is_consistent() {
        let m = unit_mesh(0.125);
        for (e, ed) in m.edges().iter().enumerate() {
            for t in ed.tris.iter().flatten() {
                assert!(m.tri_edges(*t).contains(&e));
            }
        }
        let interior = m.edges().iter().filter(|e| !e.is_boundary()).count();
        assert_eq!(
            2 * interior + (m.edges().len() - interior),
            3 * m.n_triangles()
        );
    }

    #[test]
    fn interpolation_of_shear_gives_quarter_strain() {
        let m = unit_mesh(0.125);
        let g = |t: f64, x: Point| [t * x[1], 0.0];
        let u = interpolate(&m, &g, 0.5);
        for t in 0..m.n_triangles() {
            let e = crate::energy::triangle_strain(&m, &u, t).unwrap();
            assert!((e.xy - 0.25).abs() < 1e-12);
            assert!(e.xx.abs() < 1e-12 && e.yy.abs() < 1e-12);
        }
    }

    #[test]
    fn keys_round_trip() {
        let m = unit_mesh(0.25);
        for t in 0..m.n_triangles() {
            assert_eq!(m.find(&m.key(t)), Some(t));
        }
    }

    #[test]
    fn collar_nodes_are_pinned() {
        let m = unit_mesh(0.125);
        let n_collar = (0..m.n_triangles()).filter(|&t| m.is_collar(t)).count();
        assert!(n_collar > 0);
        for t in 0..m.n_triangles() {
            if m.is_collar(t) {
                assert_eq!(m.omega_area(t), 0.0);
            }
        }
    }
}
