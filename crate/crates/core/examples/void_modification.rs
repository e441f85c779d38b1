//! A thin crack band with scattered dust and a small hole, before and after void
//! modification.

use fracture::geometry::{centroid, point_segment_distance, Point, Rect};
use fracture::mesh::{build_background_mesh, interpolate, lattice_spacing, Domain, MeshParams};
use fracture::voidmod::{build_boundary_graph, modify_voids, VoidModParams};
use fracture::TriangleSet;

fn main() -> fracture::Result<()> {
    let p = MeshParams::new(20f64.to_radians(), 1.0 / 32.0);
    let h = lattice_spacing(&p);
    let mesh = build_background_mesh(
        &Domain::padded(Rect::new(0.0, 0.0, 1.0, 1.0), 1.5 * h, [true; 4])?,
        &p,
    )?;

    let (a, b): (Point, Point) = ([0.2, 0.45], [0.8, 0.55]);
    let mut ids = Vec::new();
    for t in 0..mesh.n_triangles() {
        let c = centroid(&mesh.points(t));
        let band = point_segment_distance(c, a, b) < 0.8 * h;
        // every 97th triangle as dust, and a gap in the band around x = 0.5
        if (band && (c[0] - 0.5).abs() > 0.3 * h) || t % 97 == 0 {
            ids.push(t);
        }
    }
    let set = TriangleSet::new(&mesh, ids)?;
    let u = interpolate(&mesh, &|_t: f64, x: Point| [0.01 * x[1], 0.02 * x[0]], 0.0);

    let g = build_boundary_graph(&mesh, &set);
    println!(
        "input: {} triangles, {} components, boundary {:.3}",
        set.len(),
        g.components.len(),
        set.boundary_length(&mesh)
    );
    let r = modify_voids(&mesh, &set, &u, &VoidModParams::new(0.2).with_margin(0.0))?;
    let s = &r.stats;
    println!(
        "A_mod: {} triangles, {} components, boundary {:.3}",
        r.a_mod.len(),
        s.n_components,
        s.perim_amod
    );
    println!(
        "filled {}, removed groups {}, healed {}, reopened holes {}",
        s.filled_triangle_count,
        s.removed_component_count,
        s.healed_triangle_count,
        s.reopened_hole_count
    );
    println!(
        "perimeter constant {:.3}, area constant {:.3}",
        s.c_perimeter, s.c_area
    );
    Ok(())
}
