//! Modification of the void set of a displacement–void pair: small holes are filled,
//! small pieces hanging off the rest at one or two points are removed and healed, and
//! exposed triangles are healed, so that the perimeter of the result is controlled by
//! the area of the input.

mod graph;
mod heal;
mod pieces;

pub use graph::{build_boundary_graph, BoundaryGraph};
pub use heal::{heal_component, heal_triangles, Healed, TriangleHealing};

use crate::error::{Error, Result};
use crate::mesh::{DisplacementField, Triangulation};
use crate::triset::{edge_components_of_mask, vertex_components_of_mask, TriangleSet};
use heal::{heal_unchecked, strain_energy};
use pieces::{fill_mask, saturate, small_pieces, PieceRule};
use serde::{Deserialize, Serialize};

/// Largest admissible η.
pub const ETA_MAX: f64 = 0.5;
pub const DEFAULT_ETA: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HealMode {
    /// Minimal symmetric-gradient energy on the component with the surrounding values fixed.
    ElasticExtension,
    /// Rotation from a reference triangle plus a componentwise Lipschitz extension.
    McShane,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoidModParams {
    pub eta: f64,
    pub heal_mode: HealMode,
    /// Pieces and triangles closer than this to ∂Ω′ are never removed. None means ω(ε).
    pub margin: Option<f64>,
}

impl Default for VoidModParams {
    fn default() -> Self {
        VoidModParams {
            eta: DEFAULT_ETA,
            heal_mode: HealMode::ElasticExtension,
            margin: None,
        }
    }
}

impl VoidModParams {
    pub fn new(eta: f64) -> Self {
        VoidModParams {
            eta,
            ..Default::default()
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn with_heal_mode(mut self, mode: HealMode) -> Self {
        self.heal_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= ETA_MAX) {
            return Err(Error::Validation {
                key: "eta".into(),
                reason: format!("{} must lie in (0, {ETA_MAX}]", self.eta),
            });
        }
        if let Some(m) = self.margin {
            if !(m >= 0.0) {
                return Err(Error::Validation {
                    key: "voidmod_margin".into(),
                    reason: format!("{m} must be nonnegative"),
                });
            }
        }
        Ok(())
    }

    /// ε²/η².
    pub fn small_area(&self, mesh: &Triangulation) -> f64 {
        let e = mesh.params().eps;
        e * e / (self.eta * self.eta)
    }

    pub fn margin_for(&self, mesh: &Triangulation) -> f64 {
        self.margin.unwrap_or_else(|| mesh.params().omega())
    }

    /// Depth inside Ω′ beyond which the bounds are asserted: 2·margin + ε/η³.
    pub fn interior_depth(&self, mesh: &Triangulation) -> f64 {
        2.0 * self.margin_for(mesh) + mesh.params().eps / self.eta.powi(3)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModStats {
    pub area_a: f64,
    pub area_amod: f64,
    pub perim_amod: f64,
    /// Edge-connected components of A_mod.
    pub n_components: usize,
    pub filled_triangle_count: usize,
    pub removed_component_count: usize,
    pub healed_triangle_count: usize,
    /// Σ_{T∉A}|T∩Ω||e(u)|².
    pub energy_in: f64,
    /// Same for u_mod off A_mod, restricted to the interior region.
    pub energy_out: f64,
    /// Area of the triangles on which u_mod differs from u.
    pub changed_area: f64,
    /// Largest healing amplification ratio.
    pub max_amplification: f64,
    /// Removed groups touching the remaining void at more than two points.
    pub precondition_violations: usize,
    /// Filled holes returned to the material after a neighbouring triangle was healed.
    pub reopened_hole_count: usize,
    /// (ℋ¹(∂A_mod) − 2|A|/(ε sinθ0))/η.
    pub c_perimeter: f64,
    /// |A_mod|/ε.
    pub c_area: f64,
    /// #components · ε/η.
    pub c_components: f64,
}

#[derive(Clone, Debug)]
pub struct ModResult {
    pub a_mod: TriangleSet,
    pub u_mod: DisplacementField,
    /// A with small holes filled.
    pub filled: TriangleSet,
    /// After removal of small pieces cut off at one point.
    pub b_sep: TriangleSet,
    /// After removal of small pieces cut off at up to two points.
    pub b_hat: TriangleSet,
    /// Input triangles that are part of A_mod.
    pub t_mod: TriangleSet,
    pub stats: ModStats,
}

/// A together with every bounded component of its complement of area ≤ ε²/η².
pub fn fill_holes(
    mesh: &Triangulation,
    a: &TriangleSet,
    params: &VoidModParams,
) -> Result<TriangleSet> {
    params.validate()?;
    let b = fill_mask(mesh, &a.mask(mesh.n_triangles()), params.small_area(mesh));
    Ok(TriangleSet::from_mask(mesh, &b))
}

/// sat(Z): Z with the bounded components of its complement added.
pub fn saturation(mesh: &Triangulation, z: &TriangleSet) -> TriangleSet {
    let s = saturate(mesh, z.ids(), f64::INFINITY).unwrap();
    TriangleSet::new(mesh, s).unwrap()
}

struct Removal {
    kept: Vec<bool>,
    u: DisplacementField,
    groups: usize,
    max_ratio: f64,
    violations: usize,
}

fn remove_stage(
    mesh: &Triangulation,
    b: &[bool],
    u: &DisplacementField,
    params: &VoidModParams,
    max_cut: usize,
) -> Result<Removal> {
    let rule = PieceRule {
        limit: params.small_area(mesh),
        margin: params.margin_for(mesh),
    };
    let remove = small_pieces(mesh, b, max_cut, &rule);
    let kept: Vec<bool> = b.iter().zip(&remove).map(|(&x, &r)| x && !r).collect();
    let mut u = u.clone();
    let mut done = vec![false; b.len()];
    let mut max_ratio = 0.0f64;
    let mut violations = 0;
    let groups = vertex_components_of_mask(mesh, &remove);
    for g in &groups {
        if g.iter().all(|&t| done[t]) {
            continue;
        }
        let z: Vec<usize> = saturate(mesh, g, f64::INFINITY)
            .unwrap()
            .into_iter()
            .filter(|&t| !kept[t])
            .collect();
        let mut touch: Vec<usize> = z
            .iter()
            .flat_map(|&t| mesh.triangles()[t])
            .filter(|&v| mesh.node_triangles(v).iter().any(|&s| kept[s]))
            .collect();
        touch.sort_unstable();
        touch.dedup();
        if touch.len() > 2 {
            violations += 1;
        }
        let h = heal_unchecked(mesh, &z, &u, &kept, params.heal_mode)?;
        max_ratio = max_ratio.max(h.ratio);
        u = h.u;
        for t in z {
            done[t] = true;
        }
    }
    Ok(Removal {
        kept,
        u,
        groups: groups.len(),
        max_ratio,
        violations,
    })
}

/// Removes the small pieces of B̄ that hang off the rest at a single vertex, and small
/// isolated components, healing the field on each. Pieces within the margin of ∂Ω′ stay.
pub fn remove_separating_small(
    mesh: &Triangulation,
    b: &TriangleSet,
    u: &DisplacementField,
    params: &VoidModParams,
) -> Result<(TriangleSet, DisplacementField)> {
    params.validate()?;
    mesh.check_field(u)?;
    let r = remove_stage(mesh, &b.mask(mesh.n_triangles()), u, params, 1)?;
    Ok((TriangleSet::from_mask(mesh, &r.kept), r.u))
}

/// Like [`remove_separating_small`], with pieces cut off at up to two vertices.
pub fn remove_two_point_small(
    mesh: &Triangulation,
    b: &TriangleSet,
    u: &DisplacementField,
    params: &VoidModParams,
) -> Result<(TriangleSet, DisplacementField)> {
    params.validate()?;
    mesh.check_field(u)?;
    let r = remove_stage(mesh, &b.mask(mesh.n_triangles()), u, params, 2)?;
    Ok((TriangleSet::from_mask(mesh, &r.kept), r.u))
}

/// Healing a triangle next to a filled hole exposes the hole; such holes go back to
/// the intact material they came from.
fn drop_exposed_fill(
    mesh: &Triangulation,
    h: &TriangleSet,
    amask: &[bool],
    b: &[bool],
) -> (TriangleSet, usize) {
    let n = mesh.n_triangles();
    let mut reopened = 0;
    let mut mask = h.mask(n);
    let fill: Vec<bool> = (0..n).map(|t| b[t] && !amask[t]).collect();
    for c in edge_components_of_mask(mesh, &fill) {
        let exposed = c
            .iter()
            .any(|&t| mesh.neighbors(t).iter().any(|s| s.is_none_or(|s| !mask[s])));
        if exposed && c.iter().all(|&t| mask[t]) {
            reopened += 1;
            for t in c {
                mask[t] = false;
            }
        }
    }
    (TriangleSet::from_mask(mesh, &mask), reopened)
}

fn weighted_energy(mesh: &Triangulation, u: &DisplacementField, t: usize) -> Result<f64> {
    let a = mesh.area(t);
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(strain_energy(mesh, u, t)? * mesh.omega_area(t) / a)
}

/// Full pipeline: fill holes, remove small one-point and two-point pieces, heal exposed
/// triangles. Deterministic and monotone in A.
pub fn modify_voids(
    mesh: &Triangulation,
    a: &TriangleSet,
    u: &DisplacementField,
    params: &VoidModParams,
) -> Result<ModResult> {
    params.validate()?;
    mesh.check_field(u)?;
    if a.mesh_id() != mesh.id() {
        return Err(Error::MeshFieldMismatch {
            mesh: mesh.id(),
            field: a.mesh_id(),
        });
    }
    let n = mesh.n_triangles();
    let amask = a.mask(n);
    let b = fill_mask(mesh, &amask, params.small_area(mesh));
    let first = remove_stage(mesh, &b, u, params, 1)?;
    let second = remove_stage(mesh, &first.kept, &first.u, params, 2)?;
    let b_hat = TriangleSet::from_mask(mesh, &second.kept);
    let (healed, u_mod, tri) = heal_triangles(mesh, &b_hat, &second.u, params)?;
    let (a_mod, reopened_hole_count) = drop_exposed_fill(mesh, &healed, &amask, &b);

    let p = mesh.params();
    let amod_mask = a_mod.mask(n);
    let area_a = a.area(mesh);
    let area_amod = a_mod.area(mesh);
    let perim_amod = a_mod.boundary_length(mesh);
    let n_components = edge_components_of_mask(mesh, &amod_mask).len();
    let depth = params.interior_depth(mesh);
    let omega = mesh.domain().omega;
    let tol = p.tol();
    let interior = |t: usize| {
        mesh.points(t)
            .iter()
            .all(|&x| omega.contains(x, tol) && mesh.domain().omega_prime.depth(x) > depth)
    };
    let mut energy_in = 0.0;
    let mut energy_out = 0.0;
    let mut changed_area = 0.0;
    for t in 0..n {
        if !amask[t] {
            energy_in += weighted_energy(mesh, u, t)?;
        }
        if !amod_mask[t] && interior(t) {
            energy_out += weighted_energy(mesh, &u_mod, t)?;
        }
        if mesh.triangles()[t]
            .iter()
            .any(|&v| u.values[v] != u_mod.values[v])
        {
            changed_area += mesh.area(t);
        }
    }
    let eta = params.eta;
    let stats = ModStats {
        area_a,
        area_amod,
        perim_amod,
        n_components,
        filled_triangle_count: b.iter().zip(&amask).filter(|(&x, &y)| x && !y).count(),
        removed_component_count: first.groups + second.groups,
        healed_triangle_count: tri.healed.len(),
        energy_in,
        energy_out,
        changed_area,
        max_amplification: first.max_ratio.max(second.max_ratio).max(tri.max_ratio),
        precondition_violations: first.violations + second.violations,
        reopened_hole_count,
        c_perimeter: (perim_amod - 2.0 * area_a / (p.eps * p.theta0.sin())) / eta,
        c_area: area_amod / p.eps,
        c_components: n_components as f64 * p.eps / eta,
    };
    let t_mod = TriangleSet::new(mesh, a.ids().iter().copied().filter(|&t| amod_mask[t]))?;
    Ok(ModResult {
        a_mod,
        u_mod,
        filled: TriangleSet::from_mask(mesh, &b),
        b_sep: TriangleSet::from_mask(mesh, &first.kept),
        b_hat,
        t_mod,
        stats,
    })
}

#[cfg(test)]
mod tests;
