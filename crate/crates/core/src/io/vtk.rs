use crate::energy::all_strains;
use crate::error::{Error, Result};
use crate::mesh::{DisplacementField, Triangulation};
use crate::triset::TriangleSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};

/// Data attached to an exported mesh.
#[derive(Clone, Debug)]
pub struct VtkFields {
    /// Nodal displacement.
    pub displacement: Vec<[f64; 2]>,
    /// |e(u)_T|, Frobenius.
    pub strain_norm: Vec<f64>,
    /// Triangle cracked by the current classification.
    pub crack: Vec<bool>,
    /// Triangle in the accumulated crack set.
    pub history: Vec<bool>,
}

impl VtkFields {
    pub fn new(
        mesh: &Triangulation,
        u: &DisplacementField,
        crack: &TriangleSet,
        history: &TriangleSet,
    ) -> Result<Self> {
        let n = mesh.n_triangles();
        Ok(VtkFields {
            displacement: u.values.clone(),
            strain_norm: all_strains(mesh, u)?
                .iter()
                .map(|e| e.frobenius2().sqrt())
                .collect(),
            crack: crack.mask(n),
            history: history.mask(n),
        })
    }
}

fn array<T: std::fmt::Display>(
    out: &mut String,
    ty: &str,
    name: Option<&str>,
    comps: usize,
    values: impl Iterator<Item = T>,
) {
    let name = name.map(|n| format!(" Name=\"{n}\"")).unwrap_or_default();
    let comps = if comps > 1 {
        format!(" NumberOfComponents=\"{comps}\"")
    } else {
        String::new()
    };
    let _ = writeln!(
        out,
        "        <DataArray type=\"{ty}\"{name}{comps} format=\"ascii\">"
    );
    out.push_str("         ");
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push_str("\n        </DataArray>\n");
}

fn f(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// VTK XML unstructured grid as text.
pub fn vtu_string(mesh: &Triangulation, fields: &VtkFields) -> Result<String> {
    let (nn, nt) = (mesh.n_nodes(), mesh.n_triangles());
    if fields.displacement.len() != nn
        || [
            fields.strain_norm.len(),
            fields.crack.len(),
            fields.history.len(),
        ] != [nt; 3]
    {
        return Err(Error::Validation {
            key: "fields".into(),
            reason: "sizes do not match the mesh".into(),
        });
    }
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(
        s,
        "    <Piece NumberOfPoints=\"{nn}\" NumberOfCells=\"{nt}\">"
    );
    s.push_str("      <PointData Vectors=\"displacement\">\n");
    array(
        &mut s,
        "Float64",
        Some("displacement"),
        3,
        fields
            .displacement
            .iter()
            .flat_map(|u| [f(u[0]), f(u[1]), f(0.0)]),
    );
    s.push_str("      </PointData>\n      <CellData Scalars=\"strain_norm\">\n");
    array(
        &mut s,
        "Float64",
        Some("strain_norm"),
        1,
        fields.strain_norm.iter().map(|&x| f(x)),
    );
    array(
        &mut s,
        "Int32",
        Some("crack"),
        1,
        fields.crack.iter().map(|&b| b as i32),
    );
    array(
        &mut s,
        "Int32",
        Some("history"),
        1,
        fields.history.iter().map(|&b| b as i32),
    );
    s.push_str("      </CellData>\n      <Points>\n");
    array(
        &mut s,
        "Float64",
        None,
        3,
        mesh.nodes().iter().flat_map(|p| [f(p[0]), f(p[1]), f(0.0)]),
    );
    s.push_str("      </Points>\n      <Cells>\n");
    array(
        &mut s,
        "Int64",
        Some("connectivity"),
        1,
        mesh.triangles().iter().flatten(),
    );
    array(&mut s, "Int64", Some("offsets"), 1, (1..=nt).map(|i| 3 * i));
    array(
        &mut s,
        "UInt8",
        Some("types"),
        1,
        std::iter::repeat_n(5, nt),
    );
    s.push_str("      </Cells>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");
    Ok(s)
}

/// ∂A as a VTK XML polydata of line segments.
pub fn vtp_string(mesh: &Triangulation, a: &TriangleSet) -> String {
    let edges = a.boundary_edges(mesh);
    let mut nodes: Vec<usize> = edges.iter().flat_map(|&e| mesh.edges()[e].v).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let local = |v: usize| nodes.binary_search(&v).unwrap();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n<VTKFile type=\"PolyData\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <PolyData>\n");
    let _ = writeln!(
        s,
        "    <Piece NumberOfPoints=\"{}\" NumberOfVerts=\"0\" NumberOfLines=\"{}\" NumberOfStrips=\"0\" NumberOfPolys=\"0\">",
        nodes.len(),
        edges.len()
    );
    s.push_str("      <Points>\n");
    let x = mesh.nodes();
    array(
        &mut s,
        "Float64",
        None,
        3,
        nodes.iter().flat_map(|&v| [f(x[v][0]), f(x[v][1]), f(0.0)]),
    );
    s.push_str("      </Points>\n      <Lines>\n");
    array(
        &mut s,
        "Int64",
        Some("connectivity"),
        1,
        edges.iter().flat_map(|&e| mesh.edges()[e].v.map(local)),
    );
    array(
        &mut s,
        "Int64",
        Some("offsets"),
        1,
        (1..=edges.len()).map(|i| 2 * i),
    );
    s.push_str("      </Lines>\n    </Piece>\n  </PolyData>\n</VTKFile>\n");
    s
}

/// Writes `path` (.vtu) and the crack polyline next to it with extension .vtp. Returns
/// the .vtp path.
pub fn export_vtu(
    mesh: &Triangulation,
    fields: &VtkFields,
    crack: &TriangleSet,
    path: &Path,
) -> Result<PathBuf> {
    std::fs::write(path, vtu_string(mesh, fields)?)?;
    let vtp = path.with_extension("vtp");
    std::fs::write(&vtp, vtp_string(mesh, crack))?;
    Ok(vtp)
}
