use super::{Domain, MeshParams, Triangulation};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use std::f64::consts::FRAC_PI_4;

/// Grid spacing ε′ = 2ε cos θ0 of the background mesh.
pub fn lattice_spacing(params: &MeshParams) -> f64 {
    2.0 * params.eps * params.theta0.cos()
}

/// Regular background mesh Z: the square grid of spacing ε′ covering Ω′, each square cut
/// along its rising diagonal.
///
/// Along each axis the grid is shifted so that the first grid lines outside Ω lie at the same
/// distance from it on both sides. Triangles straddling ∂Ω then have at least 40% of their
/// width inside Ω: on a Dirichlet side they transmit the boundary datum, on a free side no
/// almost-unconstrained slivers appear.
pub fn build_background_mesh(domain: &Domain, params: &MeshParams) -> Result<Triangulation> {
    params.validate()?;
    domain.validate()?;
    if params.theta0 > FRAC_PI_4 + 1e-15 {
        return Err(Error::InadmissibleParams(format!(
            "theta0 = {:.6} rad exceeds the 45 degree angle of the half-square",
            params.theta0
        )));
    }
    let h = lattice_spacing(params);
    let hyp = h * std::f64::consts::SQRT_2;
    if h < params.eps * (1.0 - 1e-12) || hyp > params.omega() {
        return Err(Error::InadmissibleParams(format!(
            "half-square edges {h} and {hyp} violate [eps, omega]"
        )));
    }
    let op = domain.omega_prime;
    let [x0, y0] = lattice_anchor(domain, params);
    let nx = cells(op.max[0] - x0, h);
    let ny = cells(op.max[1] - y0, h);
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([x0 + i as f64 * h, y0 + j as f64 * h]);
        }
    }
    let mut tris = Vec::with_capacity(2 * nx * ny);
    let mut notch_area = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            for tri in [[a, b, c], [a, c, d]] {
                let p: [Point; 3] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
                if domain.in_notch(geometry::centroid(&p)) {
                    notch_area += geometry::triangle_rect_area(&p, &domain.omega_prime);
                } else {
                    tris.push(tri);
                }
            }
        }
    }
    let (nodes, tris) = compact(nodes, tris);
    Triangulation::new(nodes, tris, *params, domain.clone(), notch_area)
}

/// Lower-left node of the background grid.
pub fn lattice_anchor(domain: &Domain, params: &MeshParams) -> Point {
    let h = lattice_spacing(params);
    let (op, om) = (domain.omega_prime, domain.omega);
    [
        lattice_origin(op.min[0], om.min[0], om.max[0], h),
        lattice_origin(op.min[1], om.min[1], om.max[1], h),
    ]
}

/// First grid line at or below `lo_prime` along one axis, placed so that the outermost
/// grid lines around [lo, hi] lie at equal distance outside it.
fn lattice_origin(lo_prime: f64, lo: f64, hi: f64, h: f64) -> f64 {
    let r = ((hi - lo) / h).fract();
    let d = if 1.0 - r >= 0.2 {
        0.5 * (1.0 - r)
    } else {
        0.5 * (2.0 - r)
    };
    let line = lo - d * h;
    line - h * ((line - lo_prime) / h - 1e-9).ceil()
}

fn cells(len: f64, h: f64) -> usize {
    let r = len / h;
    let n = (r - 1e-9).ceil();
    (n.max(1.0)) as usize
}

fn compact(nodes: Vec<Point>, tris: Vec<[usize; 3]>) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut map = vec![usize::MAX; nodes.len()];
    let mut out = Vec::new();
    let mut tris = tris;
    for tri in tris.iter_mut() {
        for v in tri.iter_mut() {
            if map[*v] == usize::MAX {
                map[*v] = out.len();
                out.push(nodes[*v]);
            }
            *v = map[*v];
        }
    }
    // keep lattice (row-major) node order for readability of exported files
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (out[a], out[b]);
        pa[1]
            .partial_cmp(&pb[1])
            .unwrap()
            .then(pa[0].partial_cmp(&pb[0]).unwrap())
    });
    let mut inv = vec![0; out.len()];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    let nodes: Vec<Point> = order.iter().map(|&o| out[o]).collect();
    for tri in tris.iter_mut() {
        for v in tri.iter_mut() {
            *v = inv[*v];
        }
    }
    (nodes, tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    fn dom() -> Domain {
        Domain::new(Rect::new(0.1, 0.1, 0.9, 0.9), Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn spacing_matches_formula() {
        let p = MeshParams::new(20f64.to_radians(), 0.25);
        let m = build_background_mesh(&dom(), &p).unwrap();
        let expect = 2.0 * 0.25 * 20f64.to_radians().cos();
        assert!((expect - 0.469_846_310_392_954).abs() < 1e-12);
        let dx = m.nodes()[1][0] - m.nodes()[0][0];
        assert!((dx - expect).abs() < 1e-12);
    }

    #[test]
    fn triangle_count_on_lattice_aligned_rectangle() {
        let p = MeshParams::new(20f64.to_radians(), 1.0 / 16.0);
        let h = lattice_spacing(&p);
        let op = Rect::new(0.0, 0.0, 7.0 * h, 5.0 * h);
        let d = Domain::new(Rect::new(h * 0.5, h * 0.5, 6.5 * h, 4.5 * h), op).unwrap();
        let m = build_background_mesh(&d, &p).unwrap();
        assert_eq!(m.n_triangles(), 2 * 7 * 5);
        assert!((0..m.n_triangles()).all(|t| m.is_background(t)));
    }

    #[test]
    fn rejects_theta_above_45_degrees() {
        let p = MeshParams::new(50f64.to_radians(), 0.125);
        assert!(matches!(
            build_background_mesh(&dom(), &p),
            Err(Error::InadmissibleParams(_))
        ));
    }

    #[test]
    fn notch_removes_centroid_triangles() {
        let p = MeshParams::new(20f64.to_radians(), 1.0 / 16.0);
        let full = build_background_mesh(&dom(), &p).unwrap();
        let d = dom().with_notch(Rect::new(0.0, 0.45, 0.4, 0.55).corners().to_vec());
        let m = build_background_mesh(&d, &p).unwrap();
        assert!(m.n_triangles() < full.n_triangles());
        let covered: f64 = (0..m.n_triangles()).map(|t| m.prime_area(t)).sum();
        assert!((covered + m.notch_area() - 1.0).abs() < 1e-12);
    }
}
