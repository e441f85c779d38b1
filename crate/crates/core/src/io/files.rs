use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{DisplacementField, Domain, MeshParams, Triangulation};
use crate::triset::TriangleSet;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// JSON form of a triangulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub params: MeshParams,
    pub domain: Domain,
    #[serde(default)]
    pub notch_area: f64,
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &Triangulation) -> Self {
        MeshFile {
            params: *mesh.params(),
            domain: mesh.domain().clone(),
            notch_area: mesh.notch_area(),
            nodes: mesh.nodes().to_vec(),
            triangles: mesh.triangles().to_vec(),
        }
    }

    pub fn to_mesh(&self) -> Result<Triangulation> {
        Triangulation::new(
            self.nodes.clone(),
            self.triangles.clone(),
            self.params,
            self.domain.clone(),
            self.notch_area,
        )
    }
}

/// JSON form of a displacement field: one [u₁, u₂] per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub values: Vec<[f64; 2]>,
}

pub fn read_mesh(path: &Path) -> Result<Triangulation> {
    let f: MeshFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    f.to_mesh()
}

pub fn write_mesh(mesh: &Triangulation, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string(&MeshFile::from_mesh(mesh))?)?;
    Ok(())
}

pub fn read_field(mesh: &Triangulation, path: &Path) -> Result<DisplacementField> {
    let f: FieldFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    mesh.field_from_values(f.values)
}

pub fn write_field(u: &DisplacementField, path: &Path) -> Result<()> {
    let f = FieldFile {
        values: u.values.clone(),
    };
    std::fs::write(path, serde_json::to_string(&f)?)?;
    Ok(())
}

/// Triangle ids separated by whitespace or commas; `#` starts a comment.
pub fn parse_ids(mesh: &Triangulation, text: &str) -> Result<TriangleSet> {
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap();
        for w in body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
        {
            let id: usize = w.parse().map_err(|_| Error::Parse {
                line: i + 1,
                key: w.into(),
                reason: "not a triangle id".into(),
            })?;
            ids.push(id);
        }
    }
    TriangleSet::new(mesh, ids)
}
