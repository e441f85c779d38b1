//! Minimization of the truncated and history energies on a fixed mesh.

mod elastic;
pub mod linear;
mod minimize;

pub use elastic::solve_elastic;
#[allow(unused_imports)]
pub(crate) use elastic::{local_stiffness, shape_gradients, solve_masked, solve_subset, Floating};
pub use minimize::{exhaustive_oracle, minimize, minimize_step, OracleResult};

use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::mesh::DisplacementField;
use crate::triset::TriangleSet;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyKind {
    /// (1/ε)∫_Ω f(ε|e(u)|²_ℂ), used at the first time step.
    Static,
    /// Elastic energy off the accumulated crack set plus κ|Ω_crack|/ε.
    History,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub cg_rel_tol: f64,
    pub max_outer: usize,
    /// None means 10 × number of nodes.
    pub max_cg: Option<usize>,
    pub multistarts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cg_rel_tol: 1e-10,
            max_outer: 200,
            max_cg: None,
            multistarts: 8,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::Validation {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.cg_rel_tol > 0.0 && self.cg_rel_tol < 1.0) {
            return bad("cg_rel_tol", "must lie in (0, 1)");
        }
        if self.max_outer == 0 {
            return bad("max_outer", "must be at least 1");
        }
        if self.max_cg == Some(0) {
            return bad("max_cg", "must be at least 1");
        }
        if self.multistarts == 0 {
            return bad("multistarts", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub u: DisplacementField,
    pub energy: EnergyReport,
    /// Locked triangles together with the classification of `u`.
    pub cracked_now: TriangleSet,
    pub outer_iters: usize,
    /// False when the alternate minimization stopped without reaching a fixed point.
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    pub starts: usize,
    pub cg_iters: usize,
    pub max_rel_residual: f64,
}
