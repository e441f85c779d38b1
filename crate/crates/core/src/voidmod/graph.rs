use crate::mesh::Triangulation;
use crate::triset::{edge_components_of_mask, TriangleSet, UnionFind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Planar graph formed by the boundary edges of a triangle set H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGraph {
    /// Node ids on ∂H, sorted.
    pub vertices: Vec<usize>,
    /// n(v), aligned with `vertices`.
    pub degree: Vec<usize>,
    /// Mesh edge ids of ∂H, sorted.
    pub edges: Vec<usize>,
    /// Bounded faces: components of H plus bounded components of the complement.
    pub n_faces: usize,
    /// Connected components of the graph itself.
    pub n_graph_components: usize,
    /// Edge-connected components of H, each sorted, ordered by smallest id.
    pub components: Vec<Vec<usize>>,
    /// Per component, the concatenated boundary cycles as tail vertices of
    /// counter-clockwise directed boundary edges.
    pub cycles: Vec<Vec<usize>>,
    /// Per component, the number of cycle entries with n(v) ≥ 4.
    pub l: Vec<usize>,
}

impl BoundaryGraph {
    pub fn degree_of(&self, v: usize) -> usize {
        self.vertices
            .binary_search(&v)
            .map_or(0, |i| self.degree[i])
    }

    /// #𝒱_{2k}.
    pub fn n_v2k(&self, k: usize) -> usize {
        self.degree.iter().filter(|&&d| d == 2 * k).count()
    }

    /// Map l ↦ indices of components whose cycle has l entries of degree ≥ 4.
    pub fn d_classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in self.l.iter().enumerate() {
            m.entry(l).or_default().push(i);
        }
        m
    }

    pub fn n_d(&self, l: usize) -> usize {
        self.l.iter().filter(|&&x| x == l).count()
    }

    /// Checks V − E + F = ν, #E = Σ k#𝒱_{2k} and Σ l#𝒟_l = Σ_{k≥2} k#𝒱_{2k}.
    pub fn check_identities(&self) -> Result<(), String> {
        let v = self.vertices.len() as i64;
        let e = self.edges.len() as i64;
        let f = self.n_faces as i64;
        if v - e + f != self.n_graph_components as i64 {
            return Err(format!(
                "Euler: {v} - {e} + {f} != {}",
                self.n_graph_components
            ));
        }
        if self.degree.iter().any(|d| d % 2 == 1) {
            return Err("odd vertex degree".into());
        }
        let half: usize = self.degree.iter().map(|d| d / 2).sum();
        if half != self.edges.len() {
            return Err(format!("edge count {} != {half}", self.edges.len()));
        }
        let lhs: usize = self.l.iter().sum();
        let rhs: usize = self.degree.iter().filter(|&&d| d >= 4).map(|d| d / 2).sum();
        if lhs != rhs {
            return Err(format!("sum of l = {lhs} != {rhs}"));
        }
        Ok(())
    }
}

/// Counter-clockwise vertex order of triangle `t`.
fn ccw(mesh: &Triangulation, t: usize) -> [usize; 3] {
    let tri = mesh.triangles()[t];
    let p = mesh.points(t);
    if crate::geometry::orient(p[0], p[1], p[2]) > 0.0 {
        tri
    } else {
        [tri[0], tri[2], tri[1]]
    }
}

/// Triangle across the edge {a, b} of `t`, if any.
fn across(mesh: &Triangulation, t: usize, a: usize, b: usize) -> Option<usize> {
    for e in mesh.tri_edges(t) {
        let ed = &mesh.edges()[e];
        if (ed.v[0] == a && ed.v[1] == b) || (ed.v[0] == b && ed.v[1] == a) {
            return ed.other(t);
        }
    }
    None
}

/// Next vertex after `a` in the counter-clockwise order of `t`.
fn next_in(tri: [usize; 3], a: usize) -> usize {
    let i = tri.iter().position(|&x| x == a).unwrap();
    tri[(i + 1) % 3]
}

pub(crate) fn build_from_mask(mesh: &Triangulation, mask: &[bool]) -> BoundaryGraph {
    let inside = |t: Option<usize>| t.is_some_and(|t| mask[t]);
    let mut edges = Vec::new();
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    let mut uf = UnionFind::new(mesh.n_nodes());
    for (i, e) in mesh.edges().iter().enumerate() {
        if inside(e.tris[0]) != inside(e.tris[1]) {
            edges.push(i);
            *deg.entry(e.v[0]).or_default() += 1;
            *deg.entry(e.v[1]).or_default() += 1;
            uf.union(e.v[0], e.v[1]);
        }
    }
    let vertices: Vec<usize> = deg.keys().copied().collect();
    let degree: Vec<usize> = deg.values().copied().collect();
    let mut roots: Vec<usize> = vertices.iter().map(|&v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();

    let components = edge_components_of_mask(mesh, mask);
    let comp_mask: Vec<bool> = mask.iter().map(|m| !m).collect();
    let bounded_holes = edge_components_of_mask(mesh, &comp_mask)
        .iter()
        .filter(|c| {
            c.iter()
                .all(|&t| mesh.neighbors(t).iter().all(|n| n.is_some()))
        })
        .count();

    let mut comp_of = vec![usize::MAX; mask.len()];
    for (i, c) in components.iter().enumerate() {
        for &t in c {
            comp_of[t] = i;
        }
    }
    // directed boundary edges a→b with H on the left, keyed by the owning triangle
    let mut cycles = vec![Vec::new(); components.len()];
    let mut l = vec![0usize; components.len()];
    let mut used: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for c in &components {
        for &t0 in c {
            let tri0 = ccw(mesh, t0);
            for k in 0..3 {
                let (a0, b0) = (tri0[k], tri0[(k + 1) % 3]);
                if inside(across(mesh, t0, a0, b0)) || used.contains(&(t0, a0)) {
                    continue;
                }
                // walk the boundary cycle through (t0, a0 → b0)
                let (mut t, mut a) = (t0, a0);
                loop {
                    used.insert((t, a));
                    let ci = comp_of[t];
                    cycles[ci].push(a);
                    if deg.get(&a).copied().unwrap_or(0) >= 4 {
                        l[ci] += 1;
                    }
                    let b = next_in(ccw(mesh, t), a);
                    // rotate around b through H triangles until a boundary edge leaves b
                    let mut cur = t;
                    loop {
                        let w = next_in(ccw(mesh, cur), b);
                        match across(mesh, cur, b, w) {
                            Some(n) if mask[n] => cur = n,
                            _ => break,
                        }
                    }
                    t = cur;
                    a = b;
                    if t == t0 && a == a0 {
                        break;
                    }
                }
            }
        }
    }
    BoundaryGraph {
        n_faces: components.len() + bounded_holes,
        n_graph_components: roots.len(),
        vertices,
        degree,
        edges,
        components,
        cycles,
        l,
    }
}

/// Boundary graph (𝒱(H), ℰ(H)) with degrees, faces, boundary cycles and the 𝒟_l classes.
pub fn build_boundary_graph(mesh: &Triangulation, h: &TriangleSet) -> BoundaryGraph {
    build_from_mask(mesh, &h.mask(mesh.n_triangles()))
}
