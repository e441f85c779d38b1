use approx::assert_relative_eq;
use fracture::energy::triangle_strain;
use fracture::geometry::{Point, Rect};
use fracture::mesh::{
    adapt_mesh, build_background_mesh, check_admissible, interpolate, lattice_anchor,
    lattice_spacing, Domain, MeshParams, StrainHint, Triangulation,
};
use fracture::{Error, TriangleSet};
use proptest::prelude::*;

fn params(eps: f64) -> MeshParams {
    MeshParams::new(20f64.to_radians(), eps)
}

fn plate(eps: f64) -> Triangulation {
    let p = params(eps);
    let h = lattice_spacing(&p);
    build_background_mesh(
        &Domain::padded(Rect::new(0.0, 0.0, 1.0, 0.7), 1.5 * h, [true; 4]).unwrap(),
        &p,
    )
    .unwrap()
}

#[test]
fn background_triangles_are_right_isoceles_half_squares() {
    let m = plate(1.0 / 16.0);
    let h = lattice_spacing(m.params());
    for t in 0..m.n_triangles() {
        let p = m.points(t);
        let mut l: Vec<f64> = (0..3)
            .map(|i| fracture::geometry::dist(p[i], p[(i + 1) % 3]))
            .collect();
        l.sort_by(f64::total_cmp);
        assert_relative_eq!(l[0], h, max_relative = 1e-12);
        assert_relative_eq!(l[1], h, max_relative = 1e-12);
        assert_relative_eq!(l[2], h * 2f64.sqrt(), max_relative = 1e-12);
        assert!(m.is_background(t));
    }
}

#[test]
fn background_mesh_is_admissible() {
    for eps in [0.25, 1.0 / 16.0, 1.0 / 64.0] {
        let rep = check_admissible(&plate(eps));
        assert!(
            rep.is_admissible(),
            "eps {eps}: {:?}",
            &rep.violations[..rep.violations.len().min(3)]
        );
    }
}

#[test]
fn wide_minimal_angle_is_rejected() {
    let p = MeshParams::new(50f64.to_radians(), 0.1);
    let d = Domain::padded(Rect::new(0.0, 0.0, 1.0, 1.0), 0.2, [true; 4]).unwrap();
    assert!(matches!(
        build_background_mesh(&d, &p),
        Err(Error::InadmissibleParams(_))
    ));
}

#[test]
fn coverage_accounts_for_the_notch() {
    let p = params(1.0 / 32.0);
    let h = lattice_spacing(&p);
    let notch = vec![[-1.0, 0.3], [0.4, 0.5], [-1.0, 0.7]];
    let d = Domain::padded(
        Rect::new(0.0, 0.0, 1.0, 1.0),
        1.5 * h,
        [false, true, false, true],
    )
    .unwrap()
    .with_notch(notch);
    let m = build_background_mesh(&d, &p).unwrap();
    let covered: f64 = (0..m.n_triangles()).map(|t| m.prime_area(t)).sum();
    assert_relative_eq!(
        covered + m.notch_area(),
        d.omega_prime.area(),
        max_relative = 1e-12
    );
    assert!(m.notch_area() > 0.0);
    for t in 0..m.n_triangles() {
        assert!(!d.in_notch(fracture::geometry::centroid(&m.points(t))));
    }
}

#[test]
fn grid_is_centred_on_omega() {
    for (w, eps) in [(1.0, 1.0 / 16.0), (0.73, 1.0 / 32.0), (2.0, 0.1)] {
        let p = params(eps);
        let h = lattice_spacing(&p);
        let omega = Rect::new(0.1, -0.2, 0.1 + w, 0.5);
        let d = Domain::padded(omega, 1.5 * h, [true, false, true, false]).unwrap();
        let o = lattice_anchor(&d, &p);
        for axis in 0..2 {
            let (lo, hi) = (omega.min[axis], omega.max[axis]);
            let below = lo - (o[axis] + h * ((lo - o[axis]) / h - 1e-9).floor());
            let above = o[axis] + h * ((hi - o[axis]) / h + 1e-9).ceil() - hi;
            assert!(
                (below - above).abs() < 1e-9 * h,
                "axis {axis}: {below} vs {above}"
            );
            assert!(
                below >= 0.1 * h - 1e-9 && below <= 0.6 * h + 1e-9,
                "{}",
                below / h
            );
        }
    }
}

#[test]
fn collar_triangles_carry_no_body_weight() {
    let m = plate(1.0 / 16.0);
    let omega = m.domain().omega;
    for t in 0..m.n_triangles() {
        let inside = m
            .points(t)
            .iter()
            .filter(|&&x| omega.contains(x, 1e-12))
            .count();
        if m.is_collar(t) {
            assert_eq!(m.omega_area(t), 0.0);
            assert!(m.triangles()[t].iter().all(|&v| m.is_pinned(v)));
        } else if inside == 3 {
            assert_relative_eq!(m.omega_area(t), m.area(t), max_relative = 1e-12);
        }
    }
}

#[test]
fn adapted_mesh_keeps_locked_triangles() {
    let m = plate(1.0 / 16.0);
    let c = [0.5, 0.35];
    let ids: Vec<usize> = (0..m.n_triangles())
        .filter(|&t| fracture::geometry::dist(fracture::geometry::centroid(&m.points(t)), c) < 0.15)
        .collect();
    let locked = TriangleSet::new(&m, ids[..4].to_vec()).unwrap();
    let hint = StrainHint::from_triangles(&m, &ids);
    let a = adapt_mesh(&m, &locked, &hint).unwrap();
    assert!(check_admissible(&a).is_admissible());
    for &t in locked.ids() {
        let k = m.key(t);
        let s = a.find(&k).expect("locked triangle kept");
        assert_eq!(a.points(s), m.points(t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn interpolation_of_affine_data_is_exact(
        a in prop::array::uniform4(-2.0f64..2.0),
        b in prop::array::uniform2(-1.0f64..1.0),
        t in 0.0f64..3.0,
    ) {
        let m = plate(0.125);
        let g = move |t: f64, x: Point| [t * (a[0] * x[0] + a[1] * x[1]) + b[0], t * (a[2] * x[0] + a[3] * x[1]) + b[1]];
        let u = interpolate(&m, &g, t);
        for tri in 0..m.n_triangles() {
            let e = triangle_strain(&m, &u, tri).unwrap();
            prop_assert!((e.xx - t * a[0]).abs() < 1e-11);
            prop_assert!((e.yy - t * a[3]).abs() < 1e-11);
            prop_assert!((e.xy - 0.5 * t * (a[1] + a[2])).abs() < 1e-11);
            let c = fracture::geometry::centroid(&m.points(tri));
            let v = u.value_at(&m, tri, c);
            let w = g(t, c);
            prop_assert!((v[0] - w[0]).abs() < 1e-11 && (v[1] - w[1]).abs() < 1e-11);
        }
    }
}
