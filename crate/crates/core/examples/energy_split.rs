//! Static energy of a uniform stretch across the crack threshold.

use fracture::energy::{static_energy, MaterialModel};
use fracture::geometry::{Point, Rect};
use fracture::mesh::{build_background_mesh, interpolate, lattice_spacing, Domain, MeshParams};

fn main() -> fracture::Result<()> {
    let eps = 1.0 / 32.0;
    let p = MeshParams::new(20f64.to_radians(), eps);
    let h = lattice_spacing(&p);
    let mesh = build_background_mesh(
        &Domain::padded(Rect::new(0.0, 0.0, 1.0, 1.0), 1.5 * h, [true; 4])?,
        &p,
    )?;
    let material = MaterialModel::truncated(1.0);

    // ε|e|² crosses κ = 1 at a stretch of √(1/ε)
    let crit = (1.0 / eps).sqrt();
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>8}",
        "stretch", "total", "elastic", "crack", "cracked"
    );
    for f in [0.25, 0.5, 0.9, 1.1, 2.0] {
        let s = f * crit;
        let u = interpolate(
            &mesh,
            &move |_t: f64, x: Point| [s * (x[0] - 0.5), 0.0],
            0.0,
        );
        let r = static_energy(&mesh, &u, &material)?;
        println!(
            "{:>8.3} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            s, r.total, r.elastic_part, r.crack_part, r.n_cracked
        );
    }
    Ok(())
}
