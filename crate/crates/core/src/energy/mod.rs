//! Truncated finite-element energies, crack classification and the history energy.

mod material;

pub use material::{ElasticityTensor, FProfile, MaterialModel, Sym2, TabulatedProfile};

use crate::error::{Error, Result};
use crate::geometry;
use crate::mesh::{DisplacementField, TriangleKey, Triangulation};
use crate::triset::TriangleSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// e(u)_T = sym ∇u on triangle `t`.
pub fn triangle_strain(mesh: &Triangulation, u: &DisplacementField, t: usize) -> Result<Sym2> {
    mesh.check_field(u)?;
    strain_unchecked(mesh, u, t)
}

pub(crate) fn gradient(
    mesh: &Triangulation,
    u: &DisplacementField,
    t: usize,
) -> Result<[[f64; 2]; 2]> {
    let tri = mesh.triangles()[t];
    let p = mesh.points(t);
    let d1 = geometry::sub(p[1], p[0]);
    let d2 = geometry::sub(p[2], p[0]);
    let det = geometry::cross(d1, d2);
    let eps = mesh.params().eps;
    if det.abs() < 2e-14 * eps * eps {
        return Err(Error::DegenerateTriangle(t));
    }
    let v = &u.values;
    let mut g = [[0.0; 2]; 2];
    for c in 0..2 {
        let a1 = v[tri[1]][c] - v[tri[0]][c];
        let a2 = v[tri[2]][c] - v[tri[0]][c];
        g[c][0] = (d2[1] * a1 - d1[1] * a2) / det;
        g[c][1] = (-d2[0] * a1 + d1[0] * a2) / det;
    }
    Ok(g)
}

fn strain_unchecked(mesh: &Triangulation, u: &DisplacementField, t: usize) -> Result<Sym2> {
    let g = gradient(mesh, u, t)?;
    Ok(Sym2 {
        xx: g[0][0],
        yy: g[1][1],
        xy: 0.5 * (g[0][1] + g[1][0]),
    })
}

/// Strains of every triangle, in id order.
pub fn all_strains(mesh: &Triangulation, u: &DisplacementField) -> Result<Vec<Sym2>> {
    mesh.check_field(u)?;
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| strain_unchecked(mesh, u, t))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub elastic_part: f64,
    pub crack_part: f64,
    pub cracked_area: f64,
    pub n_cracked: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_triangle: Option<Vec<f64>>,
}

/// E_ε(u) = Σ_T |T∩Ω|/ε · f(ε ℂe:e), with the split into the elastic part over
/// triangles below the threshold and κ|Ω_big|/ε.
pub fn static_energy(
    mesh: &Triangulation,
    u: &DisplacementField,
    material: &MaterialModel,
) -> Result<EnergyReport> {
    let strains = all_strains(mesh, u)?;
    Ok(static_energy_from(mesh, &strains, material, false))
}

pub(crate) fn static_energy_from(
    mesh: &Triangulation,
    strains: &[Sym2],
    material: &MaterialModel,
    keep_per_triangle: bool,
) -> EnergyReport {
    let eps = mesh.params().eps;
    let thr = material.threshold();
    let truncated = matches!(material.f_profile, FProfile::TruncatedQuadratic);
    let mut r = EnergyReport::default();
    let mut per = Vec::new();
    for (t, e) in strains.iter().enumerate() {
        let w = mesh.omega_area(t);
        let q = material.elasticity.norm2(e);
        let x = eps * q;
        let c = w * material.f(x) / eps;
        r.total += c;
        if keep_per_triangle {
            per.push(c);
        }
        if x >= thr {
            r.crack_part += c;
            r.cracked_area += w;
            r.n_cracked += 1;
        } else if truncated {
            r.elastic_part += w * q;
        } else {
            r.elastic_part += c;
        }
    }
    if keep_per_triangle {
        r.per_triangle = Some(per);
    }
    r
}

/// Σ_{x<R} |T∩Ω| f(x)/ε + f(R)·|{x ≥ R}|/ε with x = ε|e|²_ℂ; never exceeds the static energy.
pub fn energy_lower_bound(
    mesh: &Triangulation,
    u: &DisplacementField,
    material: &MaterialModel,
    r: f64,
) -> Result<f64> {
    let strains = all_strains(mesh, u)?;
    let eps = mesh.params().eps;
    let fr = material.f(r);
    Ok(strains
        .iter()
        .enumerate()
        .map(|(t, e)| {
            let x = eps * material.elasticity.norm2(e);
            let w = mesh.omega_area(t);
            if x < r {
                w * material.f(x) / eps
            } else {
                w * fr / eps
            }
        })
        .sum())
}

/// Cracked triangles: ε|e|²_ℂ ≥ threshold, or farther than bg_dist_factor·ε from every
/// background triangle of the mesh.
pub fn classify_cracked(
    mesh: &Triangulation,
    u: &DisplacementField,
    material: &MaterialModel,
) -> Result<TriangleSet> {
    let strains = all_strains(mesh, u)?;
    let mask = classify_from_strains(mesh, &strains, material);
    Ok(TriangleSet::from_mask(mesh, &mask))
}

pub(crate) fn classify_from_strains(
    mesh: &Triangulation,
    strains: &[Sym2],
    material: &MaterialModel,
) -> Vec<bool> {
    let eps = mesh.params().eps;
    let thr = material.threshold();
    let far = far_from_background(mesh);
    strains
        .iter()
        .enumerate()
        .map(|(t, e)| far[t] || eps * material.elasticity.norm2(e) >= thr)
        .collect()
}

/// Triangles at distance ≥ bg_dist_factor·ε from the background part of the mesh.
pub fn far_from_background(mesh: &Triangulation) -> Vec<bool> {
    let n = mesh.n_triangles();
    let bg: Vec<usize> = (0..n).filter(|&t| mesh.is_background(t)).collect();
    if bg.is_empty() {
        return vec![true; n];
    }
    let limit = mesh.params().bg_dist_factor * mesh.params().eps;
    let bb = mesh.bbox();
    if limit > bb.width().hypot(bb.height()) {
        return vec![false; n];
    }
    (0..n)
        .into_par_iter()
        .map(|t| {
            if mesh.is_background(t) {
                return false;
            }
            let p = mesh.points(t);
            !bg.iter()
                .any(|&b| geometry::convex_distance(&p, &mesh.points(b)) < limit)
        })
        .collect()
}

/// Accumulated cracked triangles per time step, stored by geometric key so that they can
/// be resolved on any later mesh containing them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrackHistory {
    pub steps: Vec<Vec<TriangleKey>>,
}

impl CrackHistory {
    pub fn new() -> Self {
        CrackHistory::default()
    }

    /// Appends the accumulated set after a step (union with the previous one).
    pub fn push(&mut self, cracked: impl IntoIterator<Item = TriangleKey>) {
        let mut acc: BTreeSet<TriangleKey> = self
            .steps
            .last()
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        acc.extend(cracked);
        self.steps.push(acc.into_iter().collect());
    }

    pub fn accumulated(&self) -> &[TriangleKey] {
        self.steps.last().map(|s| s.as_slice()).unwrap_or(&[])
    }

    pub fn resolve(&self, mesh: &Triangulation) -> Result<TriangleSet> {
        TriangleSet::from_keys(mesh, self.accumulated())
    }
}

/// 𝓔(u) = ∫_{Ω∖Ω_crack}|e(u)|²_ℂ + κ|Ω_crack ∩ Ω′|/ε, with Ω_crack the history union the
/// current classification.
pub fn history_energy(
    mesh: &Triangulation,
    u: &DisplacementField,
    history: &CrackHistory,
    material: &MaterialModel,
) -> Result<EnergyReport> {
    let locked = history.resolve(mesh)?;
    history_energy_locked(mesh, u, &locked, material)
}

pub fn history_energy_locked(
    mesh: &Triangulation,
    u: &DisplacementField,
    locked: &TriangleSet,
    material: &MaterialModel,
) -> Result<EnergyReport> {
    let strains = all_strains(mesh, u)?;
    let mut crack = classify_from_strains(mesh, &strains, material);
    for &t in locked.ids() {
        crack[t] = true;
    }
    Ok(history_energy_from(mesh, &strains, &crack, material))
}

pub(crate) fn history_energy_from(
    mesh: &Triangulation,
    strains: &[Sym2],
    crack: &[bool],
    material: &MaterialModel,
) -> EnergyReport {
    let eps = mesh.params().eps;
    let mut r = EnergyReport::default();
    for (t, e) in strains.iter().enumerate() {
        if crack[t] {
            r.cracked_area += mesh.prime_area(t);
            r.n_cracked += 1;
        } else {
            r.elastic_part += mesh.omega_area(t) * material.elasticity.norm2(e);
        }
    }
    r.crack_part = material.kappa * r.cracked_area / eps;
    r.total = r.elastic_part + r.crack_part;
    r
}
