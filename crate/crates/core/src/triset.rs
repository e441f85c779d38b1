//! Sets of triangles of one triangulation, with area, boundary and component views.

use crate::error::{Error, Result};
use crate::mesh::{TriangleKey, Triangulation};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleSet {
    mesh_id: u64,
    ids: Vec<usize>,
}

impl TriangleSet {
    pub fn new(mesh: &Triangulation, ids: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut ids: Vec<usize> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        if let Some(&last) = ids.last() {
            if last >= mesh.n_triangles() {
                return Err(Error::InvalidMesh(format!(
                    "triangle id {last} out of range"
                )));
            }
        }
        Ok(TriangleSet {
            mesh_id: mesh.id(),
            ids,
        })
    }

    pub fn empty(mesh: &Triangulation) -> Self {
        TriangleSet {
            mesh_id: mesh.id(),
            ids: Vec::new(),
        }
    }

    pub fn all(mesh: &Triangulation) -> Self {
        TriangleSet {
            mesh_id: mesh.id(),
            ids: (0..mesh.n_triangles()).collect(),
        }
    }

    pub fn from_mask(mesh: &Triangulation, mask: &[bool]) -> Self {
        TriangleSet {
            mesh_id: mesh.id(),
            ids: mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// Resolves geometric keys against `mesh`; fails if any triangle is absent.
    pub fn from_keys<'a>(
        mesh: &Triangulation,
        keys: impl IntoIterator<Item = &'a TriangleKey>,
    ) -> Result<Self> {
        let mut ids = Vec::new();
        for k in keys {
            match mesh.find(k) {
                Some(t) => ids.push(t),
                None => {
                    return Err(Error::InconsistentHistory(format!(
                        "locked triangle {:?} is not part of mesh {}",
                        k.0,
                        mesh.id()
                    )))
                }
            }
        }
        TriangleSet::new(mesh, ids)
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }
    pub fn len(&self) -> usize {
        self.ids.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
    pub fn contains(&self, t: usize) -> bool {
        self.ids.binary_search(&t).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &t in &self.ids {
            m[t] = true;
        }
        m
    }

    pub fn keys(&self, mesh: &Triangulation) -> Vec<TriangleKey> {
        self.ids.iter().map(|&t| mesh.key(t)).collect()
    }

    pub fn union(&self, other: &TriangleSet) -> TriangleSet {
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        ids.sort_unstable();
        ids.dedup();
        TriangleSet {
            mesh_id: self.mesh_id,
            ids,
        }
    }

    pub fn difference(&self, other: &TriangleSet) -> TriangleSet {
        TriangleSet {
            mesh_id: self.mesh_id,
            ids: self
                .ids
                .iter()
                .copied()
                .filter(|&t| !other.contains(t))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &TriangleSet) -> bool {
        self.ids.iter().all(|&t| other.contains(t))
    }

    /// |A| = Σ|T|.
    pub fn area(&self, mesh: &Triangulation) -> f64 {
        self.ids.iter().map(|&t| mesh.area(t)).sum()
    }

    /// Edges incident to exactly one member triangle.
    pub fn boundary_edges(&self, mesh: &Triangulation) -> Vec<usize> {
        boundary_edges_of_mask(mesh, &self.mask(mesh.n_triangles()))
    }

    pub fn boundary_length(&self, mesh: &Triangulation) -> f64 {
        self.boundary_edges(mesh)
            .iter()
            .map(|&e| mesh.edge_length(e))
            .sum()
    }

    /// Components under edge adjacency, 𝒞(A).
    pub fn edge_components(&self, mesh: &Triangulation) -> Vec<Vec<usize>> {
        edge_components_of_mask(mesh, &self.mask(mesh.n_triangles()))
    }

    /// Components of the closure Ā, where triangles sharing a vertex are connected.
    pub fn vertex_components(&self, mesh: &Triangulation) -> Vec<Vec<usize>> {
        vertex_components_of_mask(mesh, &self.mask(mesh.n_triangles()))
    }
}

pub(crate) fn boundary_edges_of_mask(mesh: &Triangulation, mask: &[bool]) -> Vec<usize> {
    mesh.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let a = e.tris[0].is_some_and(|t| mask[t]);
            let b = e.tris[1].is_some_and(|t| mask[t]);
            a != b
        })
        .map(|(i, _)| i)
        .collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, keeping labels deterministic
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Groups members of `mask` by a union-find, ordered by smallest id.
fn collect_groups(mask: &[bool], uf: &mut UnionFind) -> Vec<Vec<usize>> {
    let mut slot = vec![usize::MAX; mask.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for t in 0..mask.len() {
        if !mask[t] {
            continue;
        }
        let r = uf.find(t);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(t);
    }
    groups
}

pub(crate) fn edge_components_of_mask(mesh: &Triangulation, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(mask.len());
    for e in mesh.edges() {
        if let [Some(a), Some(b)] = e.tris {
            if mask[a] && mask[b] {
                uf.union(a, b);
            }
        }
    }
    collect_groups(mask, &mut uf)
}

pub(crate) fn vertex_components_of_mask(mesh: &Triangulation, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(mask.len());
    for v in 0..mesh.n_nodes() {
        let mut first = None;
        for &t in mesh.node_triangles(v) {
            if mask[t] {
                match first {
                    None => first = Some(t),
                    Some(f) => uf.union(f, t),
                }
            }
        }
    }
    collect_groups(mask, &mut uf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::mesh::{build_background_mesh, Domain, MeshParams};

    fn mesh() -> Triangulation {
        let d = Domain::new(Rect::new(0.1, 0.1, 0.9, 0.9), Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        build_background_mesh(&d, &MeshParams::new(20f64.to_radians(), 1.0 / 8.0)).unwrap()
    }

    #[test]
    fn single_triangle_perimeter() {
        let m = mesh();
        let s = TriangleSet::new(&m, [0]).unwrap();
        let h = crate::mesh::lattice_spacing(m.params());
        assert!((s.boundary_length(&m) - h * (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((s.area(&m) - 0.5 * h * h).abs() < 1e-15);
    }

    #[test]
    fn edge_components_refine_vertex_components() {
        let m = mesh();
        // two triangles touching only at a vertex: lower-right half of cell (0,0) and
        // upper-left half of cell (1,1) share the lattice node (1,1)
        let a = 0;
        let b = m
            .node_triangles(m.triangles()[0][2])
            .iter()
            .copied()
            .find(|&t| {
                t != a
                    && m.triangles()[t]
                        .iter()
                        .filter(|v| m.triangles()[a].contains(v))
                        .count()
                        == 1
            })
            .unwrap();
        let s = TriangleSet::new(&m, [a, b]).unwrap();
        assert_eq!(s.edge_components(&m).len(), 2);
        assert_eq!(s.vertex_components(&m).len(), 1);
    }
}
