use super::pieces::saturate;
use super::{HealMode, VoidModParams};
use crate::energy::{gradient, ElasticityTensor};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::mesh::{DisplacementField, Triangulation};
use crate::solver::{solve_subset, Floating};
use crate::triset::{vertex_components_of_mask, TriangleSet};

const HEAL_CG_TOL: f64 = 1e-12;

/// |T||e(u)_T|² with the Frobenius norm.
pub(crate) fn strain_energy(mesh: &Triangulation, u: &DisplacementField, t: usize) -> Result<f64> {
    let g = gradient(mesh, u, t)?;
    let s = 0.5 * (g[0][1] + g[1][0]);
    Ok(mesh.area(t) * (g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * s * s))
}

fn sum_energy(mesh: &Triangulation, u: &DisplacementField, tris: &[usize]) -> Result<f64> {
    tris.iter().map(|&t| strain_energy(mesh, u, t)).sum()
}

/// Ratio of mean energy densities; 0/0 counts as 0. Densities below round-off level
/// for strains of order one count as zero.
pub(crate) fn amplification(num: f64, den: f64) -> f64 {
    let tiny = 1e-24;
    if den <= tiny {
        if num <= tiny {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[derive(Clone, Debug)]
pub struct Healed {
    pub u: DisplacementField,
    /// Mean of |e(u_heal)|² over Z ∪ (N_Z∖Y) divided by the mean of |e(u)|² over N_Z∖Y.
    pub ratio: f64,
}

/// Triangles outside `z` sharing a vertex with it.
fn neighbourhood(mesh: &Triangulation, zmask: &[bool]) -> Vec<usize> {
    let mut n = Vec::new();
    let mut seen = vec![false; zmask.len()];
    for t in (0..zmask.len()).filter(|&t| zmask[t]) {
        for &v in &mesh.triangles()[t] {
            for &s in mesh.node_triangles(v) {
                if !zmask[s] && !seen[s] {
                    seen[s] = true;
                    n.push(s);
                }
            }
        }
    }
    n.sort_unstable();
    n
}

/// Re-extends `u` over the triangles of `z` from the intact neighbourhood N_Z∖Y.
/// Does not check preconditions.
pub(crate) fn heal_unchecked(
    mesh: &Triangulation,
    z: &[usize],
    u: &DisplacementField,
    ymask: &[bool],
    mode: HealMode,
) -> Result<Healed> {
    let n = mesh.n_triangles();
    let mut zmask = vec![false; n];
    for &t in z {
        zmask[t] = true;
    }
    let intact: Vec<usize> = neighbourhood(mesh, &zmask)
        .into_iter()
        .filter(|&t| !ymask[t])
        .collect();
    let mut fixed = vec![false; mesh.n_nodes()];
    for &t in &intact {
        for &v in &mesh.triangles()[t] {
            fixed[v] = true;
        }
    }
    let mut zn: Vec<usize> = z.iter().flat_map(|&t| mesh.triangles()[t]).collect();
    zn.sort_unstable();
    zn.dedup();
    let mut values = u.values.clone();
    match mode {
        HealMode::ElasticExtension => {
            let w: Vec<f64> = z.iter().map(|&t| mesh.area(t)).collect();
            solve_subset(
                mesh,
                z,
                &w,
                &fixed,
                &mut values,
                &ElasticityTensor::identity(),
                HEAL_CG_TOL,
                20 * zn.len() + 100,
                Floating::Mean,
            )?;
        }
        HealMode::McShane => {
            let data: Vec<usize> = zn.iter().copied().filter(|&v| fixed[v]).collect();
            let free: Vec<usize> = zn.iter().copied().filter(|&v| !fixed[v]).collect();
            if data.is_empty() {
                let k = free.len() as f64;
                let mean = [
                    free.iter().map(|&v| values[v][0]).sum::<f64>() / k,
                    free.iter().map(|&v| values[v][1]).sum::<f64>() / k,
                ];
                for &v in &free {
                    values[v] = mean;
                }
            } else {
                // skew part of the gradient on the largest intact neighbour
                let reference = intact
                    .iter()
                    .copied()
                    .fold(None, |best: Option<usize>, t| match best {
                        Some(b) if mesh.area(b) >= mesh.area(t) => Some(b),
                        _ => Some(t),
                    })
                    .unwrap();
                let g = gradient(mesh, u, reference)?;
                let s = 0.5 * (g[0][1] - g[1][0]);
                let rot = |x: Point| [s * x[1], -s * x[0]];
                let x = mesh.nodes();
                let w: Vec<[f64; 2]> = data
                    .iter()
                    .map(|&v| {
                        let r = rot(x[v]);
                        [values[v][0] - r[0], values[v][1] - r[1]]
                    })
                    .collect();
                let mut lip = [0.0f64; 2];
                for i in 0..data.len() {
                    for j in i + 1..data.len() {
                        let d = geometry::dist(x[data[i]], x[data[j]]);
                        for c in 0..2 {
                            lip[c] = lip[c].max((w[i][c] - w[j][c]).abs() / d);
                        }
                    }
                }
                for &v in &free {
                    let r = rot(x[v]);
                    for c in 0..2 {
                        let ext = data
                            .iter()
                            .zip(&w)
                            .map(|(&y, wy)| wy[c] + lip[c] * geometry::dist(x[v], x[y]))
                            .fold(f64::INFINITY, f64::min);
                        values[v][c] = ext + r[c];
                    }
                }
            }
        }
    }
    let healed = mesh.field_from_values(values)?;
    let den = sum_energy(mesh, u, &intact)?;
    let num = sum_energy(mesh, &healed, &intact)? + sum_energy(mesh, &healed, z)?;
    let a_in: f64 = intact.iter().map(|&t| mesh.area(t)).sum();
    let a_z: f64 = z.iter().map(|&t| mesh.area(t)).sum();
    Ok(Healed {
        u: healed,
        ratio: amplification(num / (a_in + a_z), den / a_in.max(f64::MIN_POSITIVE)),
    })
}

/// Extends `u` over the component Z from the triangles around it that are not in Y.
pub fn heal_component(
    mesh: &Triangulation,
    z: &TriangleSet,
    u: &DisplacementField,
    y: &TriangleSet,
    params: &VoidModParams,
) -> Result<Healed> {
    params.validate()?;
    mesh.check_field(u)?;
    if z.is_empty() {
        return Err(Error::PreconditionViolated("Z is empty".into()));
    }
    let n = mesh.n_triangles();
    let zmask = z.mask(n);
    if vertex_components_of_mask(mesh, &zmask).len() != 1 {
        return Err(Error::PreconditionViolated("Z is not connected".into()));
    }
    let sat = saturate(mesh, z.ids(), f64::INFINITY).unwrap();
    if sat.len() != z.len() {
        return Err(Error::PreconditionViolated(format!(
            "Z is not saturated: {} hole triangles",
            sat.len() - z.len()
        )));
    }
    let ymask = y.mask(n);
    if z.ids().iter().any(|&t| ymask[t]) {
        return Err(Error::PreconditionViolated("Y overlaps Z".into()));
    }
    let mut touch: Vec<usize> = y
        .ids()
        .iter()
        .flat_map(|&t| mesh.triangles()[t])
        .filter(|&v| mesh.node_triangles(v).iter().any(|&t| zmask[t]))
        .collect();
    touch.sort_unstable();
    touch.dedup();
    if touch.len() > 2 {
        return Err(Error::PreconditionViolated(format!(
            "Y touches Z at {} points",
            touch.len()
        )));
    }
    heal_unchecked(mesh, z.ids(), u, &ymask, params.heal_mode)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleHealing {
    pub healed: Vec<usize>,
    /// Largest ratio of |e_T|² to the mean of |e|² over the intact triangles around T.
    pub max_ratio: f64,
}

/// Triangles of H with at most one edge-neighbour in H and a vertex not shared with any
/// other triangle of H, except those within `margin` of ∂Ω′.
pub(crate) fn healable(mesh: &Triangulation, mask: &[bool], margin: f64) -> Vec<usize> {
    (0..mask.len())
        .filter(|&t| mask[t])
        .filter(|&t| {
            let nb = mesh.neighbors(t);
            if nb.iter().flatten().filter(|&&s| mask[s]).count() > 1 {
                return false;
            }
            let exclusive = mesh.triangles()[t]
                .iter()
                .any(|&v| mesh.node_triangles(v).iter().all(|&s| s == t || !mask[s]));
            exclusive && mesh.dist_to_prime_boundary(t) >= margin
        })
        .collect()
}

/// Removes the healable exposed triangles from H. The field is left as it is: with two
/// or three edges facing intact material, its strain on a healed triangle is fixed by
/// the tangential derivatives along those edges.
pub fn heal_triangles(
    mesh: &Triangulation,
    h: &TriangleSet,
    u: &DisplacementField,
    params: &VoidModParams,
) -> Result<(TriangleSet, DisplacementField, TriangleHealing)> {
    params.validate()?;
    mesh.check_field(u)?;
    let n = mesh.n_triangles();
    let mask = h.mask(n);
    let margin = params.margin_for(mesh);
    let healed = healable(mesh, &mask, margin);
    let mut kept = mask.clone();
    for &t in &healed {
        kept[t] = false;
    }
    let mut max_ratio = 0.0f64;
    for &t in &healed {
        let mut around: Vec<usize> = mesh.triangles()[t]
            .iter()
            .flat_map(|&v| mesh.node_triangles(v).iter().copied())
            .filter(|&s| !mask[s])
            .collect();
        around.sort_unstable();
        around.dedup();
        let a_around: f64 = around.iter().map(|&s| mesh.area(s)).sum();
        let den = sum_energy(mesh, u, &around)? / a_around.max(f64::MIN_POSITIVE);
        let num = strain_energy(mesh, u, t)? / mesh.area(t);
        max_ratio = max_ratio.max(amplification(num, den));
    }
    Ok((
        TriangleSet::from_mask(mesh, &kept),
        u.clone(),
        TriangleHealing { healed, max_ratio },
    ))
}
