use approx::assert_relative_eq;
use fracture::energy::{
    energy_lower_bound, history_energy, static_energy, CrackHistory, ElasticityTensor, FProfile,
    MaterialModel, TabulatedProfile,
};
use fracture::geometry::{Point, Rect};
use fracture::mesh::{
    build_background_mesh, interpolate, lattice_spacing, Domain, MeshParams, Triangulation,
};
use proptest::prelude::*;

fn mesh(eps: f64) -> Triangulation {
    let p = MeshParams::new(20f64.to_radians(), eps);
    let h = lattice_spacing(&p);
    build_background_mesh(
        &Domain::padded(Rect::new(0.0, 0.0, 1.0, 1.0), 1.5 * h, [true; 4]).unwrap(),
        &p,
    )
    .unwrap()
}

fn body_area(m: &Triangulation) -> f64 {
    (0..m.n_triangles()).map(|t| m.omega_area(t)).sum()
}

#[test]
fn uniform_stretch_below_and_above_threshold() {
    let m = mesh(1.0 / 16.0);
    let eps = m.params().eps;
    let mat = MaterialModel::truncated(1.0);
    assert_relative_eq!(body_area(&m), 1.0, max_relative = 1e-12);
    // |e|² = s², cracked iff ε s² ≥ κ
    for (s, cracked) in [(2.0, false), (5.0, true)] {
        let u = interpolate(&m, &move |_t: f64, x: Point| [s * x[0], 0.0], 0.0);
        let r = static_energy(&m, &u, &mat).unwrap();
        if cracked {
            assert_relative_eq!(r.total, 1.0 / eps, max_relative = 1e-12);
            assert_eq!(r.elastic_part, 0.0);
        } else {
            assert_relative_eq!(r.total, s * s, max_relative = 1e-12);
            assert_eq!(r.crack_part, 0.0);
        }
    }
}

#[test]
fn isotropic_tensor_contracts_like_lame() {
    let (l, mu) = (0.6, 1.7);
    let c = ElasticityTensor::isotropic(l, mu);
    let m = mesh(0.125);
    let u = interpolate(
        &m,
        &|_t: f64, x: Point| [0.3 * x[0] + 0.2 * x[1], -0.1 * x[0] + 0.4 * x[1]],
        0.0,
    );
    let e = fracture::energy::triangle_strain(&m, &u, 0).unwrap();
    let expect =
        l * (e.xx + e.yy).powi(2) + 2.0 * mu * (e.xx * e.xx + e.yy * e.yy + 2.0 * e.xy * e.xy);
    assert_relative_eq!(c.norm2(&e), expect, max_relative = 1e-14);
}

#[test]
fn history_counts_locked_triangles_as_cracked() {
    let m = mesh(1.0 / 16.0);
    let eps = m.params().eps;
    let mat = MaterialModel::truncated(1.0);
    let u = interpolate(&m, &|_t: f64, x: Point| [0.5 * x[1], 0.0], 0.0);
    let mut h = CrackHistory::new();
    let ids = [10usize, 11, 40];
    h.push(ids.iter().map(|&t| m.key(t)));
    let r = history_energy(&m, &u, &h, &mat).unwrap();
    let locked_prime: f64 = ids.iter().map(|&t| m.prime_area(t)).sum();
    let locked_body: f64 = ids.iter().map(|&t| m.omega_area(t)).sum();
    assert_eq!(r.n_cracked, 3);
    assert_relative_eq!(r.crack_part, locked_prime / eps, max_relative = 1e-12);
    // |e|² = 2·(¼)² for the shear
    assert_relative_eq!(
        r.elastic_part,
        0.125 * (body_area(&m) - locked_body),
        max_relative = 1e-12
    );
}

#[test]
fn tabulated_profile_saturates_at_kappa() {
    let tab = TabulatedProfile {
        t: vec![0.0, 0.5, 2.0],
        f: vec![0.0, 0.5, 1.0],
    };
    let mat = MaterialModel::new(
        1.0,
        ElasticityTensor::identity(),
        FProfile::Custom(tab.clone()),
    )
    .unwrap();
    assert_eq!(mat.threshold(), 2.0);
    assert_relative_eq!(mat.f(0.25), 0.25);
    assert_relative_eq!(mat.f(1.25), 0.75);
    assert_eq!(mat.f(7.0), 1.0);
    // steeper than the quadratic at the origin
    let bad = TabulatedProfile {
        f: vec![0.0, 0.8, 1.0],
        ..tab
    };
    assert!(MaterialModel::new(1.0, ElasticityTensor::identity(), FProfile::Custom(bad)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_and_bounds_hold_for_random_fields(seed in any::<u64>(), scale in 0.01f64..20.0, r in 0.1f64..2.0) {
        use rand::{Rng, SeedableRng};
        let m = mesh(1.0 / 16.0);
        let eps = m.params().eps;
        let mat = MaterialModel::truncated(0.7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..m.n_nodes()).map(|_| [scale * eps * rng.gen_range(-1.0..1.0), scale * eps * rng.gen_range(-1.0..1.0)]).collect();
        let u = m.field_from_values(vals).unwrap();
        let e = static_energy(&m, &u, &mat).unwrap();
        prop_assert!((e.total - e.elastic_part - e.crack_part).abs() <= 1e-12 * e.total.max(1e-300));
        prop_assert!(e.total <= 0.7 * body_area(&m) / eps * (1.0 + 1e-12));
        prop_assert!(energy_lower_bound(&m, &u, &mat, r * 0.7).unwrap() <= e.total * (1.0 + 1e-12));
    }
}
