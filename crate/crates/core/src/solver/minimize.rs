use super::elastic::solve_masked;
use super::{EnergyKind, SolveOptions, SolveResult};
use crate::energy::{
    all_strains, classify_from_strains, history_energy_from, static_energy_from, EnergyReport,
    MaterialModel,
};
use crate::error::{Error, Result};
use crate::mesh::{DisplacementField, Triangulation};
use crate::triset::TriangleSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Ordering;

const LOCAL_SEARCH_MAX_TRIANGLES: usize = 64;
const POOL_RATIO: f64 = 0.25;

struct Ctx<'a> {
    mesh: &'a Triangulation,
    locked: Vec<bool>,
    bc: &'a DisplacementField,
    kind: EnergyKind,
    material: &'a MaterialModel,
    opts: &'a SolveOptions,
}

#[derive(Clone)]
struct Run {
    u: DisplacementField,
    report: EnergyReport,
    crack: Vec<bool>,
    trace: Vec<f64>,
    iters: usize,
    fixed: bool,
    cg_iters: usize,
    residual: f64,
}

enum Init {
    Field(DisplacementField),
    Pattern(Vec<bool>),
}

impl Ctx<'_> {
    fn evaluate(&self, u: &DisplacementField) -> Result<(EnergyReport, Vec<bool>)> {
        let strains = all_strains(self.mesh, u)?;
        let mut crack = classify_from_strains(self.mesh, &strains, self.material);
        Ok(match self.kind {
            EnergyKind::Static => (
                static_energy_from(self.mesh, &strains, self.material, false),
                crack,
            ),
            EnergyKind::History => {
                for (c, &l) in crack.iter_mut().zip(&self.locked) {
                    *c |= l;
                }
                (
                    history_energy_from(self.mesh, &strains, &crack, self.material),
                    crack,
                )
            }
        })
    }

    fn solve(
        &self,
        crack: &[bool],
        guess: &DisplacementField,
    ) -> Result<(DisplacementField, super::linear::CgStats)> {
        let active: Vec<bool> = crack
            .iter()
            .zip(&self.locked)
            .map(|(&c, &l)| !(c || l))
            .collect();
        solve_masked(self.mesh, &active, guess, self.material, self.opts)
    }

    fn with_bc(&self, u: &DisplacementField) -> DisplacementField {
        let mut v = u.clone();
        for (i, val) in v.values.iter_mut().enumerate() {
            if self.mesh.is_pinned(i) {
                *val = self.bc.values[i];
            }
        }
        v
    }

    fn run_pattern(&self, pattern: &[bool]) -> Result<Run> {
        let (u, st) = self.solve(pattern, self.bc)?;
        let (report, crack) = self.evaluate(&u)?;
        Ok(Run {
            trace: vec![report.total],
            u,
            report,
            crack,
            iters: 0,
            fixed: false,
            cg_iters: st.iters,
            residual: st.rel_residual,
        })
    }

    /// Alternate minimization: freeze the cracked set, solve, reclassify.
    fn descend(&self, init: Init) -> Result<Run> {
        let mut cur = match init {
            Init::Field(u0) => {
                let u = self.with_bc(&u0);
                let (report, crack) = self.evaluate(&u)?;
                Run {
                    trace: vec![report.total],
                    u,
                    report,
                    crack,
                    iters: 0,
                    fixed: false,
                    cg_iters: 0,
                    residual: 0.0,
                }
            }
            Init::Pattern(p) => self.run_pattern(&p)?,
        };
        while cur.iters < self.opts.max_outer {
            let (u, st) = self.solve(&cur.crack, &cur.u)?;
            let (report, crack) = self.evaluate(&u)?;
            cur.iters += 1;
            cur.cg_iters += st.iters;
            let slack = 1e-12 * cur.report.total.abs();
            if report.total > cur.report.total + slack {
                break;
            }
            let same = crack == cur.crack;
            cur.trace.push(report.total);
            cur.u = u;
            cur.report = report;
            cur.crack = crack;
            cur.residual = cur.residual.max(st.rel_residual);
            if same {
                cur.fixed = true;
                break;
            }
        }
        Ok(cur)
    }
}

impl Ctx<'_> {
    /// Greedy single-triangle flips of the crack pattern while the energy drops.
    fn flip_search(&self, mut best: Run, flippable: &[usize]) -> Result<Run> {
        let n = self.mesh.n_triangles();
        let mut guard = 0;
        'search: while guard < 4 * n + 4 {
            guard += 1;
            let trials: Vec<Run> = flippable
                .par_iter()
                .map(|&t| {
                    let mut pat = best.crack.clone();
                    pat[t] = !pat[t];
                    self.run_pattern(&pat)
                })
                .collect::<Result<_>>()?;
            for r in trials {
                if compare(&r, &best) == Ordering::Less && r.report.total < best.report.total {
                    let refined = self.descend(Init::Field(r.u.clone()))?;
                    best = if compare(&refined, &r) == Ordering::Less {
                        refined
                    } else {
                        r
                    };
                    continue 'search;
                }
            }
            break;
        }
        Ok(best)
    }
}

/// Lower energy, then smaller cracked area, then lexicographically smaller nodal values.
fn compare(a: &Run, b: &Run) -> Ordering {
    let tol = 1e-12 * a.report.total.abs().max(b.report.total.abs());
    if a.report.total < b.report.total - tol {
        return Ordering::Less;
    }
    if a.report.total > b.report.total + tol {
        return Ordering::Greater;
    }
    match a
        .report
        .cracked_area
        .partial_cmp(&b.report.cracked_area)
        .unwrap_or(Ordering::Equal)
    {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.u.values.iter().zip(&b.u.values) {
        for c in 0..2 {
            match x[c].partial_cmp(&y[c]).unwrap_or(Ordering::Equal) {
                Ordering::Equal => {}
                o => return o,
            }
        }
    }
    Ordering::Equal
}

fn pick(runs: Vec<Run>) -> Run {
    runs.into_iter()
        .reduce(|a, b| {
            if compare(&b, &a) == Ordering::Less {
                b
            } else {
                a
            }
        })
        .unwrap()
}

/// Best of several alternate-minimization runs: every field in `starts`, the elastic
/// solution with only the locked triangles cracked, and seeded random crack patterns.
/// On small meshes every run is finished by a greedy single-triangle flip search.
pub fn minimize(
    mesh: &Triangulation,
    locked: &TriangleSet,
    bc: &DisplacementField,
    starts: &[DisplacementField],
    kind: EnergyKind,
    material: &MaterialModel,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    mesh.check_field(bc)?;
    for s in starts {
        mesh.check_field(s)?;
    }
    if locked.mesh_id() != mesh.id() {
        return Err(Error::InconsistentHistory(
            "locked set belongs to another mesh".into(),
        ));
    }
    let n = mesh.n_triangles();
    let ctx = Ctx {
        mesh,
        locked: locked.mask(n),
        bc,
        kind,
        material,
        opts,
    };
    let elastic = ctx.descend(Init::Pattern(ctx.locked.clone()))?;
    let eps = mesh.params().eps;
    let thr = material.threshold();
    let flippable: Vec<usize> = (0..n)
        .filter(|&t| !ctx.locked[t] && mesh.omega_area(t) > 0.0)
        .collect();
    let pool: Vec<usize> = if n <= LOCAL_SEARCH_MAX_TRIANGLES {
        flippable.clone()
    } else {
        let strains = all_strains(mesh, &elastic.u)?;
        flippable
            .iter()
            .copied()
            .filter(|&t| eps * material.elasticity.norm2(&strains[t]) >= POOL_RATIO * thr)
            .collect()
    };
    let n_random = if pool.is_empty() {
        0
    } else {
        opts.multistarts.saturating_sub(1 + starts.len())
    };
    let mut inits: Vec<Init> = starts.iter().cloned().map(Init::Field).collect();
    for i in 0..n_random {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let p: f64 = rng.gen_range(0.1..0.9);
        let mut pat = ctx.locked.clone();
        for &t in &pool {
            if rng.gen::<f64>() < p {
                pat[t] = true;
            }
        }
        inits.push(Init::Pattern(pat));
    }
    let mut runs: Vec<Run> = inits
        .into_par_iter()
        .map(|i| ctx.descend(i))
        .collect::<Result<_>>()?;
    runs.insert(0, elastic);
    let n_starts = runs.len();
    let total_cg: usize = runs.iter().map(|r| r.cg_iters).sum();
    if n <= LOCAL_SEARCH_MAX_TRIANGLES {
        runs = runs
            .into_iter()
            .map(|r| ctx.flip_search(r, &flippable))
            .collect::<Result<_>>()?;
    }
    let best = pick(runs);
    let cracked_now = TriangleSet::from_mask(mesh, &best.crack);
    Ok(SolveResult {
        u: best.u,
        energy: best.report,
        cracked_now,
        outer_iters: best.iters,
        converged: best.fixed,
        energy_trace: best.trace,
        starts: n_starts,
        cg_iters: total_cg,
        max_rel_residual: best.residual,
    })
}

/// Minimizer of the history energy with `locked` triangles permanently cracked.
pub fn minimize_step(
    mesh: &Triangulation,
    locked: &TriangleSet,
    bc: &DisplacementField,
    material: &MaterialModel,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    minimize(mesh, locked, bc, &[], EnergyKind::History, material, opts)
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub energy: EnergyReport,
    pub u: DisplacementField,
    pub pattern: TriangleSet,
    pub patterns: usize,
}

/// Minimum over every crack pattern of the unlocked triangles of the energy of the
/// elastic solution for that pattern.
pub fn exhaustive_oracle(
    mesh: &Triangulation,
    locked: &TriangleSet,
    bc: &DisplacementField,
    kind: EnergyKind,
    material: &MaterialModel,
    opts: &SolveOptions,
) -> Result<OracleResult> {
    let n = mesh.n_triangles();
    let ctx = Ctx {
        mesh,
        locked: locked.mask(n),
        bc,
        kind,
        material,
        opts,
    };
    let bits: Vec<usize> = (0..n)
        .filter(|&t| !ctx.locked[t] && mesh.omega_area(t) > 0.0)
        .collect();
    if bits.len() > 20 {
        return Err(Error::InvalidMesh(format!(
            "{} free triangles are too many to enumerate",
            bits.len()
        )));
    }
    let total = 1usize << bits.len();
    let runs: Vec<(usize, Run)> = (0..total)
        .into_par_iter()
        .map(|m| {
            let mut pat = ctx.locked.clone();
            for (k, &t) in bits.iter().enumerate() {
                if m >> k & 1 == 1 {
                    pat[t] = true;
                }
            }
            ctx.run_pattern(&pat).map(|r| (m, r))
        })
        .collect::<Result<_>>()?;
    let (m, best) = runs
        .into_iter()
        .reduce(|a, b| {
            if compare(&b.1, &a.1) == Ordering::Less {
                b
            } else {
                a
            }
        })
        .unwrap();
    let pattern = TriangleSet::new(
        mesh,
        bits.iter()
            .enumerate()
            .filter(|(k, _)| m >> k & 1 == 1)
            .map(|(_, &t)| t),
    )?;
    Ok(OracleResult {
        energy: best.report,
        u: best.u,
        pattern: pattern.union(locked),
        patterns: total,
    })
}
