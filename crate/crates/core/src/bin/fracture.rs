use clap::{Parser, Subcommand};
use fracture::diagnostics::{check_energy_balance, crack_length, run_convergence_study};
use fracture::energy::{static_energy, MaterialModel};
use fracture::io::{
    convergence_csv, parse_config, parse_ids, read_field, read_mesh, run_config, vtp_string,
    write_field, write_mesh, write_run_outputs,
};
use fracture::mesh::check_admissible;
use fracture::voidmod::{modify_voids, HealMode, VoidModParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracture",
    version,
    about = "Quasi-static brittle fracture on adaptive triangulations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an evolution and write energies, balance, trace and VTK files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Modify a void set and report the statistics as JSON.
    Voidmod {
        #[arg(long)]
        mesh: PathBuf,
        /// File with triangle ids.
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        eta: f64,
        /// Distance to ∂Ω′ inside which nothing changes; ω(ε) if omitted.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, default_value = "elastic")]
        heal_mode: String,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write ∂A_mod as VTK polydata.
        #[arg(long)]
        vtp: Option<PathBuf>,
        /// Write the modified field as JSON.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Check a mesh for admissibility.
    CheckMesh { mesh: PathBuf },
    /// Run the configuration at successively halved ε and δ.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 2)]
        refine: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the static energy of a field.
    Energy {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: PathBuf,
        /// Material from this config; κ = 1 and ℂ = identity otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn init_threads() -> fracture::Result<()> {
    if let Ok(v) = std::env::var("FRACTURE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| fracture::Error::Validation {
            key: "FRACTURE_THREADS".into(),
            reason: format!("'{v}' is not a thread count"),
        })?;
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    Ok(())
}

fn run(cli: Cli) -> fracture::Result<bool> {
    match cli.cmd {
        Cmd::Simulate { config, output } => {
            let cfg = parse_config(&std::fs::read_to_string(&config)?)?;
            let dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let trace = run_config(&cfg)?;
            let material = cfg.material()?;
            let balance = check_energy_balance(&trace, &cfg.load()?, &material)?;
            write_run_outputs(&cfg, &trace, &balance, &dir)?;
            if let Some(last) = trace.snapshots.last() {
                write_mesh(&last.mesh, &dir.join("mesh.json"))?;
                write_field(&last.u, &dir.join("field.json"))?;
                let ids: Vec<String> = last.cracked.ids().iter().map(|i| i.to_string()).collect();
                std::fs::write(dir.join("crack_ids.txt"), ids.join("\n") + "\n")?;
            }
            let last = trace.steps.last();
            println!(
                "steps {} / {}, final energy {:.6e}, crack length {:.6e}",
                trace.steps.len(),
                cfg.n_steps()? + 1,
                last.map_or(0.0, |s| s.energy.total) + 0.0,
                last.map_or(0.0, |s| s.k_length) + 0.0
            );
            println!(
                "balance: {} (beta_fit {:.3e}, tolerance {:.3e}); irreversible: {}; t_mod nested: {}",
                if balance.passed { "ok" } else { "FAILED" },
                balance.beta_fit,
                balance.tol_abs,
                trace.irreversible(),
                trace.t_mod_nested()
            );
            if let Some(e) = &trace.error {
                eprintln!("run stopped early: {e}");
            }
            Ok(trace.completed && balance.passed && trace.irreversible() && trace.t_mod_nested())
        }
        Cmd::Voidmod {
            mesh,
            set,
            field,
            eta,
            margin,
            heal_mode,
            out,
            vtp,
            field_out,
        } => {
            let m = read_mesh(&mesh)?;
            let a = parse_ids(&m, &std::fs::read_to_string(&set)?)?;
            let u = read_field(&m, &field)?;
            let mode = match heal_mode.as_str() {
                "elastic" => HealMode::ElasticExtension,
                "mcshane" => HealMode::McShane,
                o => {
                    return Err(fracture::Error::Validation {
                        key: "heal_mode".into(),
                        reason: format!("unknown mode '{o}'"),
                    })
                }
            };
            let mut params = VoidModParams::new(eta).with_heal_mode(mode);
            params.margin = margin;
            let r = modify_voids(&m, &a, &u, &params)?;
            let len = crack_length(&m, &r.a_mod);
            let body = serde_json::json!({
                "a_mod": r.a_mod.ids(),
                "filled": r.filled.ids(),
                "b_sep": r.b_sep.ids(),
                "b_hat": r.b_hat.ids(),
                "t_mod": r.t_mod.ids(),
                "crack_length": len,
                "stats": r.stats,
            });
            let text = serde_json::to_string_pretty(&body)?;
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
            if let Some(p) = vtp {
                std::fs::write(p, vtp_string(&m, &r.a_mod))?;
            }
            if let Some(p) = field_out {
                write_field(&r.u_mod, &p)?;
            }
            Ok(true)
        }
        Cmd::CheckMesh { mesh } => {
            let m = read_mesh(&mesh)?;
            let rep = check_admissible(&m);
            println!("{} nodes, {} triangles", m.n_nodes(), m.n_triangles());
            for v in &rep.violations {
                println!("{v:?}");
            }
            println!(
                "{}",
                if rep.is_admissible() {
                    "admissible"
                } else {
                    "NOT admissible"
                }
            );
            Ok(rep.is_admissible())
        }
        Cmd::Study {
            config,
            refine,
            output,
        } => {
            let cfg = parse_config(&std::fs::read_to_string(&config)?)?;
            let dir = output.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let study = run_convergence_study(&cfg, refine)?;
            std::fs::create_dir_all(&dir)?;
            let csv = convergence_csv(&study);
            std::fs::write(dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
            println!(
                "last-pair change {:.3} (cauchy {}), energy bound {}, beta decreasing {}",
                study.last_pair_change,
                if study.cauchy_ok { "ok" } else { "FAILED" },
                if study.energy_bound_ok {
                    "ok"
                } else {
                    "FAILED"
                },
                study.beta_decreasing
            );
            Ok(study.passed())
        }
        Cmd::Energy {
            mesh,
            field,
            config,
        } => {
            let m = read_mesh(&mesh)?;
            let u = read_field(&m, &field)?;
            let material = match config {
                Some(c) => parse_config(&std::fs::read_to_string(c)?)?.material()?,
                None => MaterialModel::truncated(1.0),
            };
            let r = static_energy(&m, &u, &material)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
