use super::Triangulation;
use crate::geometry;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Orientation { tri: usize, area: f64 },
    Angle { tri: usize, angle: f64 },
    EdgeLength { edge: usize, length: f64 },
    AreaBound { tri: usize, area: f64, bound: f64 },
    Overlap { a: usize, b: usize },
    Coverage { covered: f64, expected: f64 },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated admissibility constraint; empty report means admissible.
pub fn check_admissible(mesh: &Triangulation) -> ValidationReport {
    let p = mesh.params();
    let theta0 = p.theta0;
    let (eps, omega) = (p.eps, p.omega());
    let sin0 = theta0.sin();
    let mut violations: Vec<Violation> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let pts = mesh.points(t);
            let mut v = Vec::new();
            let area = geometry::triangle_area(&pts);
            if area <= 1e-14 * eps * eps {
                v.push(Violation::Orientation { tri: t, area });
                return v;
            }
            for a in geometry::triangle_angles(&pts) {
                if a < theta0 * (1.0 - 1e-12) {
                    v.push(Violation::Angle { tri: t, angle: a });
                }
            }
            let lmax = geometry::edge_lengths(&pts).into_iter().fold(0.0, f64::max);
            let bound = 0.5 * eps * sin0 * lmax;
            if area < bound * (1.0 - 1e-12) {
                v.push(Violation::AreaBound {
                    tri: t,
                    area,
                    bound,
                });
            }
            v
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let tol = p.tol();
    for e in 0..mesh.edges().len() {
        let l = mesh.edge_length(e);
        if l < eps - tol || l > omega + tol {
            violations.push(Violation::EdgeLength { edge: e, length: l });
        }
    }
    violations.extend(find_overlaps(mesh));
    let covered: f64 = (0..mesh.n_triangles())
        .map(|t| mesh.prime_area(t))
        .sum::<f64>()
        + mesh.notch_area();
    let expected = mesh.domain().omega_prime.area();
    // area-based coverage; overlaps are reported separately
    if (covered - expected).abs() > 1e-10 * eps * expected.sqrt().max(eps) {
        violations.push(Violation::Coverage { covered, expected });
    }
    ValidationReport { violations }
}

fn find_overlaps(mesh: &Triangulation) -> Vec<Violation> {
    let n = mesh.n_triangles();
    if n == 0 {
        return Vec::new();
    }
    let bb = mesh.bbox();
    let cell = (mesh.params().eps * 2.0).max(bb.width().max(bb.height()) / 512.0);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |x: f64, y: f64| {
        (
            ((x - bb.min[0]) / cell).floor() as i64,
            ((y - bb.min[1]) / cell).floor() as i64,
        )
    };
    let boxes: Vec<_> = (0..n).map(|t| geometry::bbox(&mesh.points(t))).collect();
    for (t, (lo, hi)) in boxes.iter().enumerate() {
        let (i0, j0) = key(lo[0], lo[1]);
        let (i1, j1) = key(hi[0], hi[1]);
        for i in i0..=i1 {
            for j in j0..=j1 {
                grid.entry((i, j)).or_default().push(t);
            }
        }
    }
    let tol = mesh.params().tol();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for bucket in grid.values() {
        for (k, &a) in bucket.iter().enumerate() {
            for &b in &bucket[k + 1..] {
                let (a, b) = (a.min(b), a.max(b));
                let (la, ha) = boxes[a];
                let (lb, hb) = boxes[b];
                if ha[0] <= lb[0] || hb[0] <= la[0] || ha[1] <= lb[1] || hb[1] <= la[1] {
                    continue;
                }
                if geometry::triangles_overlap(&mesh.points(a), &mesh.points(b), tol) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
        .into_iter()
        .map(|(a, b)| Violation::Overlap { a, b })
        .collect()
}
