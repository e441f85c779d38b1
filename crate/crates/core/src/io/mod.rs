//! Run configuration, file formats and exports.

mod config;
mod files;
mod vtk;

pub use config::{parse_config, LoadPreset, RunConfig};
pub use files::{parse_ids, read_field, read_mesh, write_field, write_mesh, FieldFile, MeshFile};
pub use vtk::{export_vtu, vtp_string, vtu_string, VtkFields};

use crate::diagnostics::{BalanceReport, ConvergenceStudy};
use crate::energy::classify_cracked;
use crate::error::Result;
use crate::evolution::{run_evolution, EvolutionTrace};
use std::fmt::Write;
use std::path::{Path, PathBuf};

/// Runs the evolution described by `cfg`.
pub fn run_config(cfg: &RunConfig) -> Result<EvolutionTrace> {
    cfg.validate()?;
    run_evolution(
        &cfg.domain()?,
        &cfg.mesh_params(),
        &cfg.material()?,
        &cfg.load()?,
        &cfg.voidmod(),
        &cfg.evolution_options(),
    )
}

fn f(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

pub fn energies_csv(trace: &EvolutionTrace) -> String {
    let mut s = String::from(
        "k,t,total,elastic,crack,cracked_area,n_cracked,k_length,k_length_raw,k_components,area_amod,perim_amod\n",
    );
    for r in &trace.steps {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            f(r.t),
            f(r.energy.total),
            f(r.energy.elastic_part),
            f(r.energy.crack_part),
            f(r.energy.cracked_area),
            r.energy.n_cracked,
            f(r.k_length),
            f(r.k_length_raw),
            r.k_components,
            f(r.voidmod.area_amod),
            f(r.voidmod.perim_amod)
        );
    }
    s
}

pub fn balance_csv(report: &BalanceReport) -> String {
    let mut s = String::from("k,t,lhs,rhs,slack\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.k,
            f(r.t),
            f(r.lhs),
            f(r.rhs),
            f(r.slack)
        );
    }
    s
}

pub fn convergence_csv(study: &ConvergenceStudy) -> String {
    let mut s = String::from(
        "eps,delta,n_steps,completed,crack_length_raw,crack_length,crack_energy,crack_part,elastic_energy,max_energy,beta_fit\n",
    );
    for r in &study.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            f(r.eps),
            f(r.delta),
            r.n_steps,
            r.completed,
            f(r.crack_length_raw),
            f(r.crack_length),
            f(r.crack_energy),
            f(r.crack_part),
            f(r.elastic_energy),
            f(r.max_energy),
            f(r.beta_fit)
        );
    }
    s
}

pub fn trace_json(trace: &EvolutionTrace) -> Result<String> {
    Ok(serde_json::to_string_pretty(trace)?)
}

/// Writes energies.csv, balance.csv, trace.json and, if enabled, step_KKKK.vtu/.vtp into
/// `dir`. Returns the written paths.
pub fn write_run_outputs(
    cfg: &RunConfig,
    trace: &EvolutionTrace,
    balance: &BalanceReport,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        out.push(p);
        Ok(())
    };
    put("energies.csv", energies_csv(trace))?;
    put("balance.csv", balance_csv(balance))?;
    put("trace.json", trace_json(trace)?)?;
    if cfg.export_vtu {
        let material = cfg.material()?;
        for (k, snap) in trace.snapshots.iter().enumerate() {
            if k % cfg.vtu_every != 0 && k + 1 != trace.snapshots.len() {
                continue;
            }
            let now = classify_cracked(&snap.mesh, &snap.u, &material)?;
            let fields = VtkFields::new(&snap.mesh, &snap.u, &now, &snap.cracked)?;
            let p = dir.join(format!("step_{k:04}.vtu"));
            let vtp = export_vtu(&snap.mesh, &fields, &snap.a_mod, &p)?;
            out.push(p);
            out.push(vtp);
        }
    }
    Ok(out)
}
