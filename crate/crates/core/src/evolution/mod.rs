//! Quasi-static evolution: load stepping, per-step minimization on candidate meshes that
//! contain the crack history, and extraction of the modified void set after every step.

mod load;

pub use load::{Affine, LoadKind, LoadProgram, TabulatedKnot};

use crate::energy::EnergyReport;
use crate::energy::{
    all_strains, history_energy_locked, static_energy, CrackHistory, MaterialModel,
};
use crate::error::{Error, Result};
use crate::mesh::{
    adapt_mesh, build_background_mesh, interpolate, DisplacementField, Domain, MeshParams,
    StrainHint, TriangleKey, Triangulation,
};
use crate::solver::{minimize, EnergyKind, SolveOptions, SolveResult};
use crate::triset::TriangleSet;
use crate::voidmod::{modify_voids, ModStats, VoidModParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

const ETA_CAP: f64 = 0.2;

/// η(ε) = min(0.2, 1/ln(1/ε)).
pub fn eta_schedule(eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    if l * ETA_CAP <= 1.0 {
        ETA_CAP
    } else {
        1.0 / l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionOptions {
    pub solve: SolveOptions,
    /// Also try adapted meshes next to the previous one.
    pub adapt: bool,
    /// Unlocked triangles with ε|e|²_ℂ at least this fraction of the threshold guide the
    /// hinted candidate mesh.
    pub hint_ratio: f64,
    /// Random competitors per step in the stability spot-check.
    pub stability_checks: usize,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        EvolutionOptions {
            solve: SolveOptions::default(),
            adapt: true,
            hint_ratio: 0.5,
            stability_checks: 50,
        }
    }
}

impl EvolutionOptions {
    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        if !(self.hint_ratio > 0.0 && self.hint_ratio <= 1.0) {
            return Err(Error::Validation {
                key: "hint_ratio".into(),
                reason: format!("{} must lie in (0, 1]", self.hint_ratio),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceHeader {
    pub eps: f64,
    pub delta: f64,
    pub eta: f64,
    pub theta0: f64,
    pub kappa: f64,
    pub elasticity: [[f64; 3]; 3],
    pub seed: u64,
    pub t_end: f64,
    pub n_steps: usize,
    pub load: LoadKind,
    pub voidmod_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverInfo {
    /// "previous", "background" or "hinted".
    pub candidate: String,
    pub candidates: usize,
    pub outer_iters: usize,
    pub converged: bool,
    pub starts: usize,
    pub cg_iters: usize,
    pub max_rel_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StabilityCheck {
    pub competitors: usize,
    pub violations: usize,
    /// Smallest (𝓔(v) − 𝓔(u))/max(|𝓔(u)|, 1e-300) over the competitors.
    pub min_relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    /// Counts distinct meshes along the trace.
    pub mesh_snapshot: usize,
    pub energy: EnergyReport,
    /// Triangles cracked at this step that were not cracked before.
    pub crack_increment: Vec<usize>,
    /// Ω_crack after this step, as triangle ids of this step's mesh.
    pub accumulated: Vec<usize>,
    pub crack_area: f64,
    /// ℋ¹(∂A_mod)/2.
    pub k_length: f64,
    pub k_length_raw: f64,
    pub k_components: usize,
    pub voidmod: ModStats,
    pub t_mod: Vec<usize>,
    /// Ω_crack of the previous step is contained in this one.
    pub crack_nested: bool,
    /// T^mod of the previous step is contained in this one.
    pub t_mod_nested: bool,
    pub solver: SolverInfo,
    pub stability: StabilityCheck,
}

/// Mesh and fields of one step, kept for post-processing.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub mesh: Arc<Triangulation>,
    pub u: DisplacementField,
    /// Ω_crack after the step.
    pub cracked: TriangleSet,
    pub a_mod: TriangleSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionTrace {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord>,
    pub completed: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

impl EvolutionTrace {
    pub fn irreversible(&self) -> bool {
        self.steps.iter().all(|s| s.crack_nested)
    }

    pub fn t_mod_nested(&self) -> bool {
        self.steps.iter().all(|s| s.t_mod_nested)
    }

    pub fn max_energy(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.energy.total.abs())
            .fold(0.0, f64::max)
    }

    pub fn stability_violations(&self) -> usize {
        self.steps.iter().map(|s| s.stability.violations).sum()
    }
}

struct State {
    mesh: Arc<Triangulation>,
    u: DisplacementField,
    index: usize,
    cracked: HashSet<TriangleKey>,
    t_mod: HashSet<TriangleKey>,
}

struct Candidate {
    name: &'static str,
    mesh: Arc<Triangulation>,
    result: SolveResult,
    locked: TriangleSet,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    let (ea, eb) = (a.result.energy.total, b.result.energy.total);
    let tol = 1e-12 * ea.abs().max(eb.abs());
    if ea < eb - tol {
        return true;
    }
    if ea > eb + tol {
        return false;
    }
    match a
        .result
        .energy
        .cracked_area
        .partial_cmp(&b.result.energy.cracked_area)
    {
        Some(Ordering::Less) => return true,
        Some(Ordering::Greater) => return false,
        _ => {}
    }
    for (x, y) in a.result.u.values.iter().zip(&b.result.u.values) {
        for c in 0..2 {
            match x[c].partial_cmp(&y[c]) {
                Some(Ordering::Less) => return true,
                Some(Ordering::Greater) => return false,
                _ => {}
            }
        }
    }
    false
}

fn same_nodes(a: &Triangulation, b: &Triangulation) -> bool {
    a.nodes() == b.nodes()
}

/// prev.u + g(t) − g(t_prev) on `mesh`, which shares the node numbering of prev.mesh.
fn competitor(
    prev: &State,
    mesh: &Triangulation,
    load: &LoadProgram,
    t: f64,
    t_prev: f64,
) -> Result<DisplacementField> {
    let mut w = prev.u.transfer(mesh)?;
    w.axpy(1.0, &interpolate(mesh, load, t));
    w.axpy(-1.0, &interpolate(mesh, load, t_prev));
    Ok(w)
}

fn hint_for(
    prev: &State,
    locked: &TriangleSet,
    load: &LoadProgram,
    t: f64,
    t_prev: f64,
    material: &MaterialModel,
    ratio: f64,
) -> Result<StrainHint> {
    let mesh = &prev.mesh;
    let w = competitor(prev, mesh, load, t, t_prev)?;
    let strains = all_strains(mesh, &w)?;
    let eps = mesh.params().eps;
    let cut = ratio * material.threshold();
    let ids: Vec<usize> = (0..mesh.n_triangles())
        .filter(|&t| !locked.contains(t) && mesh.omega_area(t) > 0.0)
        .filter(|&t| eps * material.elasticity.norm2(&strains[t]) >= cut)
        .collect();
    Ok(StrainHint::from_triangles(mesh, &ids))
}

/// Random perturbations of u on the free nodes of its mesh, compared by energy.
fn stability_check(
    mesh: &Triangulation,
    u: &DisplacementField,
    locked: Option<&TriangleSet>,
    material: &MaterialModel,
    n: usize,
    seed: u64,
) -> Result<StabilityCheck> {
    if n == 0 {
        return Ok(StabilityCheck::default());
    }
    let energy = |v: &DisplacementField| -> Result<f64> {
        Ok(match locked {
            None => static_energy(mesh, v, material)?.total,
            Some(l) => history_energy_locked(mesh, v, l, material)?.total,
        })
    };
    let e0 = energy(u)?;
    let scale = u
        .values
        .iter()
        .flatten()
        .fold(mesh.params().eps, |m, x| m.max(x.abs()));
    let gaps: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add((i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)),
            );
            let amp = scale * 10f64.powi(-((i % 6) as i32) - 1);
            let mut v = u.clone();
            for (j, x) in v.values.iter_mut().enumerate() {
                if !mesh.is_pinned(j) {
                    x[0] += amp * rng.gen_range(-1.0..1.0);
                    x[1] += amp * rng.gen_range(-1.0..1.0);
                }
            }
            Ok((energy(&v)? - e0) / e0.abs().max(1e-300))
        })
        .collect::<Result<_>>()?;
    let tol = 1e-9;
    Ok(StabilityCheck {
        competitors: n,
        violations: gaps.iter().filter(|&&g| g < -tol).count(),
        min_relative_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn keys_of(mesh: &Triangulation, s: &TriangleSet) -> HashSet<TriangleKey> {
    s.keys(mesh).into_iter().collect()
}

/// Runs the incremental scheme on [0, T_end]. A failing step ends the run early; the
/// returned trace then has `completed == false` and the error message.
pub fn run_evolution(
    domain: &Domain,
    params: &MeshParams,
    material: &MaterialModel,
    load: &LoadProgram,
    vm: &VoidModParams,
    opts: &EvolutionOptions,
) -> Result<EvolutionTrace> {
    params.validate()?;
    domain.validate()?;
    load.validate()?;
    vm.validate()?;
    opts.validate()?;
    let mesh0 = Arc::new(build_background_mesh(domain, params)?);
    let mut trace = EvolutionTrace {
        header: TraceHeader {
            eps: params.eps,
            delta: load.delta(),
            eta: vm.eta,
            theta0: params.theta0,
            kappa: material.kappa,
            elasticity: material.elasticity.d,
            seed: opts.solve.seed,
            t_end: load.t_end,
            n_steps: load.n_steps,
            load: load.kind.clone(),
            voidmod_margin: vm.margin_for(&mesh0),
        },
        steps: Vec::new(),
        completed: false,
        error: None,
        snapshots: Vec::new(),
    };
    let mut history = CrackHistory::new();
    let mut prev: Option<State> = None;
    for k in 0..=load.n_steps {
        match step(
            k,
            &mesh0,
            prev.as_ref(),
            &mut history,
            material,
            load,
            vm,
            opts,
        ) {
            Ok((state, record, snap)) => {
                trace.steps.push(record);
                trace.snapshots.push(snap);
                prev = Some(state);
            }
            Err(e) => {
                trace.error = Some(format!("step {k}: {e}"));
                return Ok(trace);
            }
        }
    }
    trace.completed = true;
    Ok(trace)
}

#[allow(clippy::too_many_arguments)]
fn step(
    k: usize,
    mesh0: &Arc<Triangulation>,
    prev: Option<&State>,
    history: &mut CrackHistory,
    material: &MaterialModel,
    load: &LoadProgram,
    vm: &VoidModParams,
    opts: &EvolutionOptions,
) -> Result<(State, StepRecord, Snapshot)> {
    let t = load.time(k);
    let mut so = opts.solve.clone();
    so.seed = opts.solve.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let (best, n_candidates) = match prev {
        None => {
            let bc = interpolate(mesh0, load, t);
            let locked = TriangleSet::empty(mesh0);
            let result = minimize(mesh0, &locked, &bc, &[], EnergyKind::Static, material, &so)?;
            let c = Candidate {
                name: "previous",
                mesh: mesh0.clone(),
                result,
                locked,
            };
            (c, 1)
        }
        Some(p) => {
            let t_prev = load.time(k - 1);
            let locked_prev = history.resolve(&p.mesh)?;
            let mut meshes: Vec<(&'static str, Arc<Triangulation>)> =
                vec![("previous", p.mesh.clone())];
            if opts.adapt {
                let mut push = |name: &'static str, m: Result<Triangulation>| match m {
                    Ok(m) => {
                        if !meshes.iter().any(|(_, x)| same_nodes(x, &m)) {
                            meshes.push((name, Arc::new(m)));
                        }
                        Ok(())
                    }
                    Err(Error::AdaptationFailed(_)) => Ok(()),
                    Err(e) => Err(e),
                };
                push(
                    "background",
                    adapt_mesh(&p.mesh, &locked_prev, &StrainHint::empty()),
                )?;
                let hint = hint_for(p, &locked_prev, load, t, t_prev, material, opts.hint_ratio)?;
                if !hint.is_empty() {
                    push("hinted", adapt_mesh(&p.mesh, &locked_prev, &hint))?;
                }
            }
            let mut best: Option<Candidate> = None;
            let n = meshes.len();
            for (name, mesh) in meshes {
                let locked = history.resolve(&mesh)?;
                let bc = interpolate(&mesh, load, t);
                let start = competitor(p, &mesh, load, t, t_prev)?;
                let result = minimize(
                    &mesh,
                    &locked,
                    &bc,
                    &[start],
                    EnergyKind::History,
                    material,
                    &so,
                )?;
                let c = Candidate {
                    name,
                    mesh,
                    result,
                    locked,
                };
                if best.as_ref().is_none_or(|b| better(&c, b)) {
                    best = Some(c);
                }
            }
            (best.unwrap(), n)
        }
    };
    let mesh = best.mesh.clone();
    let r = best.result;
    let cracked = r.cracked_now.clone();
    let cracked_keys = keys_of(&mesh, &cracked);
    let (index, crack_nested, increment) = match prev {
        None => (0, true, cracked.ids().to_vec()),
        Some(p) => {
            let index = if Arc::ptr_eq(&p.mesh, &mesh) {
                p.index
            } else {
                p.index + 1
            };
            let inc = cracked
                .ids()
                .iter()
                .copied()
                .filter(|&t| !p.cracked.contains(&mesh.key(t)))
                .collect();
            (index, p.cracked.is_subset(&cracked_keys), inc)
        }
    };
    history.push(cracked_keys.iter().copied());

    let m = modify_voids(&mesh, &cracked, &r.u, vm)?;
    let t_mod_keys = keys_of(&mesh, &m.t_mod);
    let t_mod_nested = prev.is_none_or(|p| p.t_mod.is_subset(&t_mod_keys));
    let raw = m.stats.perim_amod;
    let stability = stability_check(
        &mesh,
        &r.u,
        if prev.is_some() {
            Some(&best.locked)
        } else {
            None
        },
        material,
        opts.stability_checks,
        so.seed,
    )?;
    let mut energy = r.energy.clone();
    energy.per_triangle = None;
    let record = StepRecord {
        k,
        t,
        mesh_snapshot: index,
        crack_area: energy.cracked_area,
        energy,
        crack_increment: increment,
        accumulated: cracked.ids().to_vec(),
        k_length: 0.5 * raw,
        k_length_raw: raw,
        k_components: m.stats.n_components,
        voidmod: m.stats.clone(),
        t_mod: m.t_mod.ids().to_vec(),
        crack_nested,
        t_mod_nested,
        solver: SolverInfo {
            candidate: best.name.to_string(),
            candidates: n_candidates,
            outer_iters: r.outer_iters,
            converged: r.converged,
            starts: r.starts,
            cg_iters: r.cg_iters,
            max_rel_residual: r.max_rel_residual,
        },
        stability,
    };
    let state = State {
        mesh: mesh.clone(),
        u: r.u.clone(),
        index,
        cracked: cracked_keys,
        t_mod: t_mod_keys,
    };
    let snap = Snapshot {
        mesh,
        u: r.u,
        cracked,
        a_mod: m.a_mod,
    };
    Ok((state, record, snap))
}
