//! Compares the alternate minimization with enumeration of every crack pattern on a
//! 12-triangle mesh.

use fracture::energy::MaterialModel;
use fracture::geometry::{Point, Rect};
use fracture::mesh::{build_background_mesh, interpolate, lattice_spacing, Domain, MeshParams};
use fracture::solver::{exhaustive_oracle, minimize_step, EnergyKind, SolveOptions};
use fracture::TriangleSet;

fn main() -> fracture::Result<()> {
    let p = MeshParams::new(20f64.to_radians(), 0.25);
    let h = lattice_spacing(&p);
    // two cells wide, one high, with clamped rows above and below
    let dom = Domain::padded(
        Rect::new(0.0, 0.0, 1.75 * h, 0.75 * h),
        0.5 * h,
        [false, true, false, true],
    )?;
    let mesh = build_background_mesh(&dom, &p)?;
    let material = MaterialModel::truncated(1.0);
    let none = TriangleSet::empty(&mesh);
    let opts = SolveOptions::default();

    for s in [0.5, 1.5, 3.0] {
        let bc = interpolate(
            &mesh,
            &move |_t: f64, x: Point| [0.1 * s * x[1], s * x[1]],
            0.0,
        );
        let o = exhaustive_oracle(&mesh, &none, &bc, EnergyKind::History, &material, &opts)?;
        let m = minimize_step(&mesh, &none, &bc, &material, &opts)?;
        println!(
            "stretch {s}: oracle {:.6} over {} patterns ({} cracked), solver {:.6} ({} cracked)",
            o.energy.total, o.patterns, o.energy.n_cracked, m.energy.total, m.energy.n_cracked
        );
    }
    Ok(())
}
