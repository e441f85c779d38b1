//! Checks of the discrete estimates on evolution traces, and refinement studies.

use crate::energy::{all_strains, MaterialModel};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, LoadProgram};
use crate::io::{run_config, RunConfig};
use crate::mesh::{interpolate, DisplacementField, Triangulation};
use crate::solver::{solve_elastic, SolveOptions};
use crate::triset::TriangleSet;
use rayon::prelude::*;
use serde::Serialize;

/// Relative tolerance of the energy balance, scaled by the largest energy of the trace.
pub const BALANCE_REL_TOL: f64 = 1e-6;
/// Largest admissible relative change of the crack energy over the last refinement.
pub const CAUCHY_TOL: f64 = 0.2;
/// Largest admissible ratio between the energy bound of any run and of the coarsest.
pub const ENERGY_BOUND_FACTOR: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceRow {
    pub k: usize,
    pub t: f64,
    /// 𝓔(u_k) − E(u_0).
    pub lhs: f64,
    /// 2∫₀^{t_k}∫_Ω e(u):ℂe(∂ₜg).
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub rows: Vec<BalanceRow>,
    /// max(0, −min slack).
    pub beta_fit: f64,
    pub max_energy: f64,
    pub tol_abs: f64,
    pub passed: bool,
}

/// ∫ e(u):ℂe(w) over the triangles of `mesh` outside `cracked`, weighted by |T∩Ω|.
fn work(
    mesh: &Triangulation,
    u: &DisplacementField,
    w: &DisplacementField,
    cracked: &TriangleSet,
    material: &MaterialModel,
) -> Result<f64> {
    let eu = all_strains(mesh, u)?;
    let ew = all_strains(mesh, w)?;
    let mask = cracked.mask(mesh.n_triangles());
    Ok((0..mesh.n_triangles())
        .filter(|&t| !mask[t])
        .map(|t| mesh.omega_area(t) * material.elasticity.contract(&eu[t], &ew[t]))
        .sum())
}

/// Energy estimate along the trace.
///
/// Within a step the crack set is held at its value from the start of the step and cracks
/// grow at the end of it. The time integral over step k is the trapezoidal rule between
/// u_{k−1} and the elastic response at t_k with the crack set of step k−1, each on its
/// own mesh. For loads affine in time and elastic responses it is exact.
pub fn check_energy_balance(
    trace: &EvolutionTrace,
    load: &LoadProgram,
    material: &MaterialModel,
) -> Result<BalanceReport> {
    if trace.snapshots.len() != trace.steps.len() {
        return Err(Error::Validation {
            key: "trace".into(),
            reason: "snapshots are missing".into(),
        });
    }
    let opts = SolveOptions {
        cg_rel_tol: 1e-12,
        ..SolveOptions::default()
    };
    let mut rows = Vec::with_capacity(trace.steps.len());
    let e0 = trace.steps.first().map_or(0.0, |s| s.energy.total);
    let mut rhs = 0.0;
    for (k, s) in trace.steps.iter().enumerate() {
        if k > 0 {
            let (t0, t1) = (trace.steps[k - 1].t, s.t);
            let (prev, cur) = (&trace.snapshots[k - 1], &trace.snapshots[k]);
            let frozen = TriangleSet::from_keys(&cur.mesh, &prev.cracked.keys(&prev.mesh))?;
            let bc = interpolate(&cur.mesh, load, t1);
            let end = solve_elastic(&cur.mesh, &frozen, &bc, material, &opts)?;
            for (m, u, cracked) in [
                (&*prev.mesh, &prev.u, &prev.cracked),
                (&*cur.mesh, &end, &frozen),
            ] {
                let mut dg = interpolate(m, load, t1);
                dg.axpy(-1.0, &interpolate(m, load, t0));
                rhs += work(m, u, &dg, cracked, material)?;
            }
        }
        let lhs = s.energy.total - e0;
        rows.push(BalanceRow {
            k: s.k,
            t: s.t,
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }
    let max_energy = trace.max_energy();
    let tol_abs = BALANCE_REL_TOL * max_energy;
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(BalanceReport {
        beta_fit: if rows.is_empty() {
            0.0
        } else {
            (-min_slack).max(0.0)
        },
        passed: rows.iter().all(|r| r.slack >= -tol_abs),
        rows,
        max_energy,
        tol_abs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrackLength {
    /// ℋ¹(∂A_mod).
    pub raw: f64,
    /// ℋ¹(∂A_mod)/2, the length carried by the limit crack.
    pub halved: f64,
}

pub fn crack_length(mesh: &Triangulation, a_mod: &TriangleSet) -> CrackLength {
    let raw = a_mod.boundary_length(mesh);
    CrackLength {
        raw,
        halved: 0.5 * raw,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub eps: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub completed: bool,
    pub crack_length_raw: f64,
    pub crack_length: f64,
    /// κ sinθ0·ℋ¹(∂A_mod)/2 at the final time.
    pub crack_energy: f64,
    /// κ|Ω_crack|/ε at the final time.
    pub crack_part: f64,
    pub elastic_energy: f64,
    pub max_energy: f64,
    pub beta_fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    /// Relative change of the crack energy over the last pair, 0 with fewer than two rows.
    pub last_pair_change: f64,
    pub cauchy_ok: bool,
    pub energy_bound_ok: bool,
    pub beta_decreasing: bool,
}

impl ConvergenceStudy {
    pub fn passed(&self) -> bool {
        self.cauchy_ok && self.energy_bound_ok && self.rows.iter().all(|r| r.completed)
    }
}

/// Relative difference |a − b|/max(|a|, |b|), 0 when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// The base run and `refinements` runs with ε and δ halved each time.
pub fn run_convergence_study(base: &RunConfig, refinements: usize) -> Result<ConvergenceStudy> {
    base.validate()?;
    let configs: Vec<RunConfig> = (0..=refinements).map(|i| base.refined(i)).collect();
    let rows: Vec<StudyRow> = configs
        .par_iter()
        .map(|cfg| -> Result<StudyRow> {
            let trace = run_config(cfg)?;
            let material = cfg.material()?;
            let load = cfg.load()?;
            let bal = check_energy_balance(&trace, &load, &material)?;
            let last = trace.steps.last();
            let raw = last.map_or(0.0, |s| s.k_length_raw);
            Ok(StudyRow {
                eps: cfg.eps,
                delta: load.delta(),
                n_steps: load.n_steps,
                completed: trace.completed,
                crack_length_raw: raw,
                crack_length: 0.5 * raw,
                crack_energy: material.kappa * cfg.theta0.sin() * 0.5 * raw,
                crack_part: last.map_or(0.0, |s| s.energy.crack_part),
                elastic_energy: last.map_or(0.0, |s| s.energy.elastic_part),
                max_energy: trace.max_energy(),
                beta_fit: bal.beta_fit,
            })
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    let last_pair_change = if n >= 2 {
        relative_change(rows[n - 2].crack_energy, rows[n - 1].crack_energy)
    } else {
        0.0
    };
    let bound = rows[0].max_energy;
    let energy_bound_ok = rows
        .iter()
        .all(|r| r.max_energy <= ENERGY_BOUND_FACTOR * bound + 1e-12);
    let beta_decreasing = rows.windows(2).all(|w| {
        w[1].beta_fit <= w[0].beta_fit + BALANCE_REL_TOL * w[0].max_energy.max(w[1].max_energy)
    });
    Ok(ConvergenceStudy {
        rows,
        last_pair_change,
        cauchy_ok: last_pair_change < CAUCHY_TOL,
        energy_bound_ok,
        beta_decreasing,
    })
}
