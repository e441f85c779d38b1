//! Candidate meshes for a time step.
//!
//! Every mesh produced here shares the node numbering and connectivity of the background
//! lattice; only node positions differ. Locked triangles keep their previous coordinates,
//! surrounded by a ring of nodes that also keep theirs, and hinted bands attract a chain
//! of lattice nodes onto the band axis.

use super::{build_background_mesh, lattice_spacing, Triangulation};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::triset::TriangleSet;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const MAX_RING: usize = 6;
const SNAP_FRACTIONS: [f64; 5] = [1.0, 0.75, 0.5, 0.35, 0.2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub a: Point,
    pub b: Point,
    pub half_width: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StrainHint {
    pub bands: Vec<Band>,
}

impl StrainHint {
    pub fn empty() -> Self {
        StrainHint { bands: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// One band along the principal axis of the centroids of `ids`.
    pub fn from_triangles(mesh: &Triangulation, ids: &[usize]) -> Self {
        if ids.len() < 2 {
            return StrainHint::empty();
        }
        let cs: Vec<Point> = ids
            .iter()
            .map(|&t| geometry::centroid(&mesh.points(t)))
            .collect();
        let n = cs.len() as f64;
        let m = [
            cs.iter().map(|c| c[0]).sum::<f64>() / n,
            cs.iter().map(|c| c[1]).sum::<f64>() / n,
        ];
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for c in &cs {
            let d = geometry::sub(*c, m);
            sxx += d[0] * d[0];
            sxy += d[0] * d[1];
            syy += d[1] * d[1];
        }
        let ang = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let dir = [ang.cos(), ang.sin()];
        let nrm = [-dir[1], dir[0]];
        let (mut lo, mut hi, mut w) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for c in &cs {
            let d = geometry::sub(*c, m);
            let s = geometry::dot(d, dir);
            lo = lo.min(s);
            hi = hi.max(s);
            w = w.max(geometry::dot(d, nrm).abs());
        }
        if hi - lo < 1e-12 {
            return StrainHint::empty();
        }
        StrainHint {
            bands: vec![Band {
                a: [m[0] + lo * dir[0], m[1] + lo * dir[1]],
                b: [m[0] + hi * dir[0], m[1] + hi * dir[1]],
                half_width: w + lattice_spacing(mesh.params()),
            }],
        }
    }
}

/// Background mesh merged with the locked triangles of `prev`, then snapped to `hint`.
pub fn adapt_mesh(
    prev: &Triangulation,
    locked: &TriangleSet,
    hint: &StrainHint,
) -> Result<Triangulation> {
    if locked.mesh_id() != prev.id() {
        return Err(Error::AdaptationFailed(
            "locked set belongs to another mesh".into(),
        ));
    }
    let bg = build_background_mesh(prev.domain(), prev.params())?;
    if locked.is_empty() && hint.is_empty() {
        return Ok(bg);
    }
    if bg.triangles() != prev.triangles() {
        return Err(Error::AdaptationFailed(
            "previous mesh does not share the lattice connectivity".into(),
        ));
    }
    let nn = bg.n_nodes();
    let mut frozen = vec![false; nn];
    for &t in locked.ids() {
        for &v in &prev.triangles()[t] {
            frozen[v] = true;
        }
    }
    let mut pos: Vec<Point> = bg.nodes().to_vec();
    let mut keep = frozen.clone();
    let mut merged = false;
    for _ in 0..=MAX_RING {
        for v in 0..nn {
            if keep[v] {
                pos[v] = prev.nodes()[v];
            }
        }
        if (0..bg.n_triangles()).all(|t| triangle_ok(&bg, &pos, t)) {
            merged = true;
            break;
        }
        keep = grow_ring(&bg, &keep);
    }
    if !merged {
        return Err(Error::AdaptationFailed(
            "no admissible transition ring around locked triangles".into(),
        ));
    }
    let boundary = boundary_nodes(&bg);
    for band in &hint.bands {
        let path = band_path(&bg, &pos, band);
        let movable: Vec<usize> = path
            .into_iter()
            .filter(|&v| !frozen[v] && !boundary[v])
            .collect();
        if movable.is_empty() {
            continue;
        }
        let dir = geometry::sub(band.b, band.a);
        let l2 = geometry::dot(dir, dir);
        // node by node along the path, largest admissible fraction of the projection
        for &v in &movable {
            let p = pos[v];
            let s = geometry::dot(geometry::sub(p, band.a), dir) / l2;
            let q = [band.a[0] + s * dir[0], band.a[1] + s * dir[1]];
            for &lam in &SNAP_FRACTIONS {
                pos[v] = [p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])];
                if bg
                    .node_triangles(v)
                    .iter()
                    .all(|&t| triangle_ok(&bg, &pos, t))
                {
                    break;
                }
                pos[v] = p;
            }
        }
    }
    bg.with_nodes(pos)
}

/// Kept nodes grown by one ring of neighbours.
fn grow_ring(mesh: &Triangulation, keep: &[bool]) -> Vec<bool> {
    let mut out = keep.to_vec();
    for v in (0..mesh.n_nodes()).filter(|&v| keep[v]) {
        for &t in mesh.node_triangles(v) {
            for &w in &mesh.triangles()[t] {
                out[w] = true;
            }
        }
    }
    out
}

fn boundary_nodes(mesh: &Triangulation) -> Vec<bool> {
    let mut b = vec![false; mesh.n_nodes()];
    for e in mesh.edges() {
        if e.is_boundary() {
            b[e.v[0]] = true;
            b[e.v[1]] = true;
        }
    }
    b
}

fn triangle_ok(mesh: &Triangulation, pos: &[Point], t: usize) -> bool {
    let tri = mesh.triangles()[t];
    let p = [pos[tri[0]], pos[tri[1]], pos[tri[2]]];
    let prm = mesh.params();
    let area = geometry::triangle_area(&p);
    if area <= 0.0 {
        return false;
    }
    if geometry::triangle_angles(&p)
        .iter()
        .any(|&a| a < prm.theta0 * (1.0 - 1e-12))
    {
        return false;
    }
    let l = geometry::edge_lengths(&p);
    let tol = prm.tol();
    if l.iter()
        .any(|&x| x < prm.eps - tol || x > prm.omega() + tol)
    {
        return false;
    }
    let lmax = l.into_iter().fold(0.0, f64::max);
    area >= 0.5 * prm.eps * prm.theta0.sin() * lmax * (1.0 - 1e-12)
}

#[derive(PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then(o.1.cmp(&self.1))
    }
}

/// Shortest edge path between the nodes nearest to the band ends, penalized by the
/// distance of each edge midpoint from the band axis.
fn band_path(mesh: &Triangulation, pos: &[Point], band: &Band) -> Vec<usize> {
    let h = lattice_spacing(mesh.params());
    let reach = band.half_width + h;
    let near = |p: Point| geometry::point_segment_distance(p, band.a, band.b) <= reach;
    let nearest = |x: Point| {
        (0..pos.len()).filter(|&v| near(pos[v])).min_by(|&a, &b| {
            geometry::dist(pos[a], x)
                .partial_cmp(&geometry::dist(pos[b], x))
                .unwrap()
                .then(a.cmp(&b))
        })
    };
    let (Some(s), Some(g)) = (nearest(band.a), nearest(band.b)) else {
        return Vec::new();
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); pos.len()];
    for e in mesh.edges() {
        adj[e.v[0]].push(e.v[1]);
        adj[e.v[1]].push(e.v[0]);
    }
    let line_dist = |p: Point| {
        let d = geometry::sub(band.b, band.a);
        let n = d[0].hypot(d[1]);
        geometry::cross(d, geometry::sub(p, band.a)).abs() / n
    };
    let mut dist = vec![f64::INFINITY; pos.len()];
    let mut from = vec![usize::MAX; pos.len()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, v)) = heap.pop() {
        if v == g {
            break;
        }
        if d > dist[v] {
            continue;
        }
        for &w in &adj[v] {
            if !near(pos[w]) {
                continue;
            }
            let mid = [(pos[v][0] + pos[w][0]) * 0.5, (pos[v][1] + pos[w][1]) * 0.5];
            let c = geometry::dist(pos[v], pos[w]) * (1.0 + 4.0 * line_dist(mid) / h);
            if d + c < dist[w] {
                dist[w] = d + c;
                from[w] = v;
                heap.push(Entry(d + c, w));
            }
        }
    }
    if dist[g].is_infinite() {
        return Vec::new();
    }
    let mut path = vec![g];
    let mut v = g;
    while v != s {
        v = from[v];
        path.push(v);
    }
    path.reverse();
    path
}
