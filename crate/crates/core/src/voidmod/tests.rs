use super::*;
use crate::geometry::{Point, Rect};
use crate::mesh::{build_background_mesh, interpolate, lattice_spacing, Domain, MeshParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(eps: f64, w: f64, h: f64) -> Triangulation {
    let p = MeshParams::new(20f64.to_radians(), eps);
    let d = Domain::new(
        Rect::new(0.01, 0.01, w - 0.01, h - 0.01),
        Rect::new(0.0, 0.0, w, h),
    )
    .unwrap();
    build_background_mesh(&d, &p).unwrap()
}

/// Lower-right (`upper = false`) or upper-left half of lattice cell (i, j).
fn cell(m: &Triangulation, i: usize, j: usize, upper: bool) -> usize {
    let h = lattice_spacing(m.params());
    let o = m.bbox().min;
    let c = if upper {
        [
            o[0] + (i as f64 + 1.0 / 3.0) * h,
            o[1] + (j as f64 + 2.0 / 3.0) * h,
        ]
    } else {
        [
            o[0] + (i as f64 + 2.0 / 3.0) * h,
            o[1] + (j as f64 + 1.0 / 3.0) * h,
        ]
    };
    (0..m.n_triangles())
        .find(|&t| crate::geometry::dist(crate::geometry::centroid(&m.points(t)), c) < 1e-6 * h)
        .unwrap()
}

fn block(m: &Triangulation, i0: usize, j0: usize, ni: usize, nj: usize) -> Vec<usize> {
    let mut v = Vec::new();
    for i in i0..i0 + ni {
        for j in j0..j0 + nj {
            v.push(cell(m, i, j, false));
            v.push(cell(m, i, j, true));
        }
    }
    v
}

fn set(m: &Triangulation, ids: impl IntoIterator<Item = usize>) -> TriangleSet {
    TriangleSet::new(m, ids).unwrap()
}

fn free_params(eta: f64) -> VoidModParams {
    VoidModParams::new(eta).with_margin(0.0)
}

#[test]
fn single_triangle_graph() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    let g = build_boundary_graph(&m, &set(&m, [cell(&m, 3, 3, false)]));
    assert_eq!(g.vertices.len(), 3);
    assert!(g.degree.iter().all(|&d| d == 2));
    assert_eq!(g.edges.len(), 3);
    assert_eq!(g.n_faces, 1);
    assert_eq!(g.d_classes().get(&0).unwrap(), &vec![0]);
    g.check_identities().unwrap();
}

#[test]
fn vertex_touching_pair_is_in_d1() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    // share only the lattice node (3, 3)
    let h = set(&m, [cell(&m, 2, 2, true), cell(&m, 3, 3, false)]);
    let g = build_boundary_graph(&m, &h);
    assert_eq!(g.components.len(), 2);
    assert_eq!(g.n_v2k(2), 1);
    assert_eq!(g.l, vec![1, 1]);
    assert_eq!(g.n_d(1), 2);
    g.check_identities().unwrap();
}

#[test]
fn patch_with_hole_has_one_extra_face() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    let hole = cell(&m, 3, 3, true);
    let h = set(&m, block(&m, 2, 2, 3, 3).into_iter().filter(|&t| t != hole));
    let g = build_boundary_graph(&m, &h);
    assert_eq!(g.n_faces, g.components.len() + 1);
    assert_eq!(g.cycles[0].len(), g.edges.len());
    g.check_identities().unwrap();
}

#[test]
fn fill_holes_examples() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let p = VoidModParams::new(0.5);
    let plain = set(&m, block(&m, 4, 4, 2, 2));
    assert_eq!(fill_holes(&m, &plain, &p).unwrap(), plain);

    let hole = cell(&m, 5, 5, true);
    let ring = set(&m, block(&m, 4, 4, 3, 3).into_iter().filter(|&t| t != hole));
    let filled = fill_holes(&m, &ring, &p).unwrap();
    assert!(filled.contains(hole));
    assert_eq!(filled.len(), ring.len() + 1);

    // a 2×2-cell hole has area 4h² > ε²/η²
    let inner = block(&m, 5, 5, 2, 2);
    let big = set(
        &m,
        block(&m, 4, 4, 4, 4)
            .into_iter()
            .filter(|t| !inner.contains(t)),
    );
    assert_eq!(fill_holes(&m, &big, &p).unwrap(), big);
}

#[test]
fn heal_triangles_examples() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    let p = free_params(0.2);
    let u = m.zero_field();
    let lone = set(&m, [cell(&m, 3, 3, false)]);
    let (kept, _, rep) = heal_triangles(&m, &lone, &u, &p).unwrap();
    assert!(kept.is_empty());
    assert_eq!(rep.healed.len(), 1);

    // spike: the upper-left half of (4,4) hangs off the block across its left edge; its
    // two exposed edges meet at (5,5), which another H triangle also uses
    let mut ids = block(&m, 2, 2, 2, 3);
    let spike = cell(&m, 4, 4, true);
    ids.push(spike);
    ids.push(cell(&m, 5, 5, false));
    let h = set(&m, ids);
    let (kept, _, _) = heal_triangles(&m, &h, &u, &p).unwrap();
    assert!(kept.contains(spike), "vertex-sharing spike must stay");
    ids = block(&m, 2, 2, 2, 3);
    ids.push(spike);
    let (kept, _, _) = heal_triangles(&m, &set(&m, ids), &u, &p).unwrap();
    assert!(!kept.contains(spike));

    let disk = set(&m, block(&m, 2, 2, 3, 3));
    // only the two acute corners of the staircase square qualify
    let (kept, _, rep) = heal_triangles(&m, &disk, &u, &p).unwrap();
    let corners = vec![cell(&m, 4, 2, false), cell(&m, 2, 4, true)]
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>();
    assert_eq!(
        rep.healed
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>(),
        corners
    );
    assert_eq!(kept.len(), disk.len() - 2);
}

#[test]
fn heal_triangles_respects_margin() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    let lone = set(&m, [cell(&m, 3, 3, false)]);
    let (kept, _, _) =
        heal_triangles(&m, &lone, &m.zero_field(), &VoidModParams::new(0.2)).unwrap();
    assert_eq!(kept, lone);
}

#[test]
fn separating_vertex_removal() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let p = free_params(0.2);
    let u = m.zero_field();
    // two 4×4 blocks meeting at the node (8, 8), and one triangle hanging at (12, 12)
    let mut ids = block(&m, 4, 4, 4, 4);
    ids.extend(block(&m, 8, 8, 4, 4));
    let tail = cell(&m, 12, 12, false);
    ids.push(tail);
    let b = set(&m, ids.clone());
    let (bs, _) = remove_separating_small(&m, &b, &u, &p).unwrap();
    assert!(!bs.contains(tail));
    assert_eq!(bs.len(), b.len() - 1);
    let g = build_boundary_graph(&m, &bs);
    let node = m.triangles()[tail]
        .iter()
        .copied()
        .find(|&v| g.degree_of(v) > 0);
    assert_eq!(node.map(|v| g.degree_of(v)), Some(2));

    let big = set(&m, block(&m, 4, 4, 5, 5));
    assert_eq!(remove_separating_small(&m, &big, &u, &p).unwrap().0, big);

    let small = set(&m, block(&m, 4, 4, 1, 2));
    assert!(remove_separating_small(&m, &small, &u, &p)
        .unwrap()
        .0
        .is_empty());
}

#[test]
fn heal_component_reproduces_affine_and_rigid_data() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let z = set(&m, block(&m, 6, 6, 2, 1));
    let y = TriangleSet::empty(&m);
    let aff = |_t: f64, x: Point| [0.3 * x[0] - 0.1 * x[1] + 0.05, 0.2 * x[0] + 0.4 * x[1]];
    let exact = interpolate(&m, &aff, 0.0);
    let h = heal_component(&m, &z, &exact, &y, &free_params(0.2)).unwrap();
    assert!(h.ratio <= 1.0 + 1e-9, "{}", h.ratio);
    for v in 0..m.n_nodes() {
        assert!((h.u.values[v][0] - exact.values[v][0]).abs() < 1e-12);
    }

    let rigid = |_t: f64, x: Point| [0.01 - 0.2 * x[1], 0.3 + 0.2 * x[0]];
    let r = interpolate(&m, &rigid, 0.0);
    let h = heal_component(&m, &z, &r, &y, &free_params(0.2)).unwrap();
    assert_eq!(h.ratio, 0.0);
}

#[test]
fn heal_component_extends_into_a_void() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let z = set(&m, block(&m, 6, 6, 3, 3));
    let y = TriangleSet::empty(&m);
    let aff = |_t: f64, x: Point| [0.3 * x[0] - 0.1 * x[1], 0.2 * x[0] + 0.4 * x[1]];
    let exact = interpolate(&m, &aff, 0.0);
    let mut u = exact.clone();
    let h = lattice_spacing(m.params());
    let o = m.bbox().min;
    for v in 0..m.n_nodes() {
        let x = [m.nodes()[v][0] - o[0], m.nodes()[v][1] - o[1]];
        if x[0] > 6.5 * h && x[0] < 8.5 * h && x[1] > 6.5 * h && x[1] < 8.5 * h {
            u.values[v] = [5.0, -2.0];
        }
    }
    let healed = heal_component(&m, &z, &u, &y, &free_params(0.2)).unwrap();
    for v in 0..m.n_nodes() {
        for c in 0..2 {
            assert!((healed.u.values[v][c] - exact.values[v][c]).abs() < 1e-9);
        }
    }
    // the Lipschitz extension is not exact for affine data but stays bounded
    let p = free_params(0.2).with_heal_mode(HealMode::McShane);
    let healed = heal_component(&m, &z, &u, &y, &p).unwrap();
    assert!(
        healed.ratio.is_finite() && healed.ratio < 10.0,
        "{}",
        healed.ratio
    );
}

#[test]
fn heal_component_checks_touch_points() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let z = set(&m, block(&m, 6, 6, 1, 2));
    // Y shares the three left nodes of Z
    let y = set(&m, block(&m, 5, 5, 1, 3));
    let e = heal_component(&m, &z, &m.zero_field(), &y, &free_params(0.2));
    assert!(matches!(e, Err(Error::PreconditionViolated(_))));
    let hole = cell(&m, 7, 7, true);
    let ring = set(&m, block(&m, 6, 6, 3, 3).into_iter().filter(|&t| t != hole));
    let e = heal_component(
        &m,
        &ring,
        &m.zero_field(),
        &TriangleSet::empty(&m),
        &free_params(0.2),
    );
    assert!(matches!(e, Err(Error::PreconditionViolated(_))));
}

#[test]
fn empty_input_is_unchanged() {
    let m = mesh(1.0 / 16.0, 1.0, 1.0);
    let u = interpolate(&m, &|_t: f64, x: Point| [x[0], x[1] * x[1]], 0.0);
    let r = modify_voids(&m, &TriangleSet::empty(&m), &u, &free_params(0.2)).unwrap();
    assert!(r.a_mod.is_empty());
    assert_eq!(r.u_mod, u);
    assert_eq!(r.stats.perim_amod, 0.0);
}

#[test]
fn crack_band_loses_its_end_triangles() {
    let m = mesh(1.0 / 16.0, 3.0, 1.5);
    let h = lattice_spacing(m.params());
    let k = 16;
    let band = set(&m, block(&m, 3, 5, k, 1));
    let r = modify_voids(&m, &band, &m.zero_field(), &free_params(0.2)).unwrap();
    assert_eq!(r.a_mod.len(), 2 * k - 2);
    assert!(!r.a_mod.contains(cell(&m, 3, 5, true)));
    assert!(!r.a_mod.contains(cell(&m, 3 + k - 1, 5, false)));
    let perim = 2.0 * (k as f64 - 1.0) * h + 2.0 * 2f64.sqrt() * h;
    assert!((r.stats.perim_amod - perim).abs() < 1e-12);
    assert!(r.stats.c_perimeter < 0.0);
    assert_eq!(r.stats.n_components, 1);
}

#[test]
fn filled_triangles_stay_covered() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    // the hole F = upper-left half of (7,7) is closed by three triangles; the one above
    // it, R, has F as its only neighbour and a free tip; healing R exposes F, which then
    // goes back to the material
    let hole = cell(&m, 7, 7, true);
    let r = cell(&m, 7, 8, false);
    let mut ids = block(&m, 2, 2, 6, 5);
    ids.extend([cell(&m, 6, 7, false), cell(&m, 7, 7, false), r]);
    let a = set(&m, ids);
    let out = modify_voids(&m, &a, &m.zero_field(), &free_params(0.2)).unwrap();
    assert!(out.filled.contains(hole));
    assert!(!out.a_mod.contains(hole) && !out.a_mod.contains(r));
    assert_eq!(out.stats.reopened_hole_count, 1);
    let bnd = out.a_mod.boundary_edges(&m);
    for t in out.a_mod.ids().iter().filter(|&&t| !a.contains(t)) {
        assert!(m.tri_edges(*t).iter().all(|e| !bnd.contains(e)));
    }
}

#[test]
fn nested_inputs_give_nested_outputs() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let p = free_params(0.2);
    let u = m.zero_field();
    let n = m.n_triangles();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d1: f64 = rng.gen_range(0.05..0.3);
        let a1: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < d1).collect();
        let extra: f64 = rng.gen_range(0.02..0.2);
        let a2: Vec<usize> = (0..n)
            .filter(|t| a1.contains(t) || rng.gen::<f64>() < extra)
            .collect();
        let (s1, s2) = (set(&m, a1), set(&m, a2));
        let r1 = modify_voids(&m, &s1, &u, &p).unwrap();
        let r2 = modify_voids(&m, &s2, &u, &p).unwrap();
        assert!(r1.filled.is_subset(&r2.filled), "seed {seed}: fill");
        assert!(r1.b_sep.is_subset(&r2.b_sep), "seed {seed}: sep");
        assert!(r1.b_hat.is_subset(&r2.b_hat), "seed {seed}: hat");
        assert!(r1.a_mod.is_subset(&r2.a_mod), "seed {seed}: mod");
        assert!(r1.t_mod.is_subset(&r2.t_mod), "seed {seed}: t_mod");
    }
}

#[test]
fn random_subsets_satisfy_graph_identities() {
    let m = mesh(1.0 / 32.0, 1.0, 1.0);
    let n = m.n_triangles();
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: f64 = rng.gen_range(0.05..0.5);
        let h = set(&m, (0..n).filter(|_| rng.gen::<f64>() < d));
        build_boundary_graph(&m, &h).check_identities().unwrap();
    }
}
