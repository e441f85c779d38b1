use super::graph::build_from_mask;
use crate::mesh::Triangulation;
use crate::triset::{edge_components_of_mask, vertex_components_of_mask};
use rayon::prelude::*;
use std::collections::{HashSet, VecDeque};

/// Adds every bounded complement component of area ≤ `limit`.
pub(crate) fn fill_mask(mesh: &Triangulation, a: &[bool], limit: f64) -> Vec<bool> {
    let comp: Vec<bool> = a.iter().map(|m| !m).collect();
    let mut b = a.to_vec();
    for c in edge_components_of_mask(mesh, &comp) {
        let bounded = c
            .iter()
            .all(|&t| mesh.neighbors(t).iter().all(|n| n.is_some()));
        let area: f64 = c.iter().map(|&t| mesh.area(t)).sum();
        if bounded && area <= limit {
            for t in c {
                b[t] = true;
            }
        }
    }
    b
}

/// sat(Z) for Z given as a sorted triangle list. Returns None as soon as the area
/// exceeds `cap`.
pub(crate) fn saturate(mesh: &Triangulation, z: &[usize], cap: f64) -> Option<Vec<usize>> {
    let mut area: f64 = z.iter().map(|&t| mesh.area(t)).sum();
    if area > cap {
        return None;
    }
    let inz: HashSet<usize> = z.iter().copied().collect();
    let tol = mesh.params().tol();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &t in z {
        for p in mesh.points(t) {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
    }
    let outside_box = |t: usize| {
        mesh.points(t)
            .iter()
            .any(|p| (0..2).any(|a| p[a] < lo[a] - tol || p[a] > hi[a] + tol))
    };
    let mut seen: HashSet<usize> = HashSet::new();
    let mut out = z.to_vec();
    for &t in z {
        for n in mesh.neighbors(t).into_iter().flatten() {
            if inz.contains(&n) || seen.contains(&n) {
                continue;
            }
            // flood one complement component; a bounded one stays inside the box of Z
            let mut comp = vec![n];
            let mut queue = VecDeque::from([n]);
            seen.insert(n);
            let mut bounded = true;
            while let Some(s) = queue.pop_front() {
                if outside_box(s) {
                    bounded = false;
                    break;
                }
                for m in mesh.neighbors(s) {
                    match m {
                        None => {
                            bounded = false;
                            break;
                        }
                        Some(m) if !inz.contains(&m) && seen.insert(m) => {
                            comp.push(m);
                            queue.push_back(m);
                        }
                        _ => {}
                    }
                }
                if !bounded {
                    break;
                }
            }
            if bounded {
                area += comp.iter().map(|&t| mesh.area(t)).sum::<f64>();
                if area > cap {
                    return None;
                }
                out.extend(comp);
            }
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Component of `seed` in the closure of `mask` with the points `cut` removed: triangles
/// are linked through shared edges and through shared vertices outside `cut`.
fn piece_from(
    mesh: &Triangulation,
    mask: &[bool],
    seed: usize,
    cut: &[usize],
    cap: f64,
) -> Option<Vec<usize>> {
    let mut seen: HashSet<usize> = HashSet::from([seed]);
    let mut queue = VecDeque::from([seed]);
    let mut area = mesh.area(seed);
    let mut out = vec![seed];
    while let Some(t) = queue.pop_front() {
        let tri = mesh.triangles()[t];
        let mut push = |m: usize, out: &mut Vec<usize>, area: &mut f64| {
            if mask[m] && seen.insert(m) {
                *area += mesh.area(m);
                out.push(m);
                queue.push_back(m);
            }
        };
        for &v in &tri {
            if !cut.contains(&v) {
                for &m in mesh.node_triangles(v) {
                    push(m, &mut out, &mut area);
                }
            }
        }
        for n in mesh.neighbors(t).into_iter().flatten() {
            push(n, &mut out, &mut area);
        }
        if area > cap {
            return None;
        }
    }
    out.sort_unstable();
    Some(out)
}

pub(crate) struct PieceRule {
    pub limit: f64,
    pub margin: f64,
}

impl PieceRule {
    fn accepts(&self, mesh: &Triangulation, piece: &[usize]) -> bool {
        piece
            .iter()
            .all(|&t| mesh.dist_to_prime_boundary(t) >= self.margin)
            && saturate(mesh, piece, self.limit).is_some()
    }
}

/// Union of all small pieces of the closure of `mask` cut at up to `max_cut` vertices of
/// degree ≥ 4, that keep at least `margin` from ∂Ω′. Returns the removal mask.
pub(crate) fn small_pieces(
    mesh: &Triangulation,
    mask: &[bool],
    max_cut: usize,
    rule: &PieceRule,
) -> Vec<bool> {
    let mut remove = vec![false; mask.len()];
    for c in vertex_components_of_mask(mesh, mask) {
        let area: f64 = c.iter().map(|&t| mesh.area(t)).sum();
        if area <= rule.limit && rule.accepts(mesh, &c) {
            for t in c {
                remove[t] = true;
            }
        }
    }
    if max_cut == 0 {
        return remove;
    }
    let graph = build_from_mask(mesh, mask);
    let pinch: Vec<usize> = graph
        .vertices
        .iter()
        .zip(&graph.degree)
        .filter(|(_, &d)| d >= 4)
        .map(|(&v, _)| v)
        .collect();
    // any piece with both cut points on it has diameter at most this
    let members: Vec<usize> = (0..mask.len()).filter(|&t| mask[t]).collect();
    let min_area = members
        .iter()
        .map(|&t| mesh.area(t))
        .fold(f64::INFINITY, f64::min);
    let max_edge = members
        .iter()
        .flat_map(|&t| mesh.tri_edges(t))
        .map(|e| mesh.edge_length(e))
        .fold(0.0, f64::max);
    let reach = (rule.limit / min_area).floor() * max_edge * 1.000_001;
    let cuts: Vec<Vec<usize>> = pinch
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| {
            let mut v = vec![vec![p]];
            if max_cut >= 2 {
                let x = mesh.nodes()[p];
                for &q in &pinch[i + 1..] {
                    if crate::geometry::dist(x, mesh.nodes()[q]) <= reach {
                        v.push(vec![p, q]);
                    }
                }
            }
            v
        })
        .collect();
    let found: Vec<Vec<usize>> = cuts
        .par_iter()
        .flat_map_iter(|cut| {
            let mut pieces: Vec<Vec<usize>> = Vec::new();
            for &t in mesh.node_triangles(cut[0]) {
                if !mask[t] || pieces.iter().any(|p| p.binary_search(&t).is_ok()) {
                    continue;
                }
                if let Some(p) = piece_from(mesh, mask, t, cut, rule.limit) {
                    pieces.push(p);
                }
            }
            pieces.into_iter().filter(|p| rule.accepts(mesh, p))
        })
        .collect();
    for p in found {
        for t in p {
            remove[t] = true;
        }
    }
    remove
}
