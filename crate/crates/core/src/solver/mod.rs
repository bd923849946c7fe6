//! Dense primal-dual interior-point solver for dual-form SDPs.
//!
//! The dual-form problem `max ⟨b,y⟩ s.t. F0 + Σ yᵢ Fᵢ ⪰ 0` is solved together
//! with its primal `min ⟨F0,X⟩ s.t. ⟨Fᵢ,X⟩ = −bᵢ, X ⪰ 0` by infeasible-start
//! path following with Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector. Pathological iterates end the run with
//! [`StatusTag::NumericalTrouble`] rather than a possibly wrong "optimal"
//! answer.

mod ipm;
mod presolve;
mod report;

use serde::{Deserialize, Serialize};

use crate::exactnum::Matrix;
use crate::sdp::{Assignment, SdpProblem, SolveStatus, StatusTag, Violation};

pub use report::diagnostics_report;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Relative primal and dual residual tolerance.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Iterates larger than this in absolute value are treated as diverging.
    pub var_bound: f64,
    /// Step lengths below this count as stagnation.
    pub min_step: f64,
    /// Consecutive short steps tolerated before giving up.
    pub stall_iters: usize,
    /// Largest acceptable condition estimate of the scaled Newton system.
    pub cond_limit: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            max_iter: 200,
            var_bound: 1e8,
            min_step: 1e-3,
            stall_iters: 5,
            cond_limit: 1e14,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<(), String> {
        let positive = [
            ("gap_tol", self.gap_tol),
            ("feas_tol", self.feas_tol),
            ("var_bound", self.var_bound),
            ("min_step", self.min_step),
            ("cond_limit", self.cond_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("option {name} must be positive and finite, got {v}"));
            }
        }
        if self.stall_iters == 0 {
            return Err("option stall_iters must be at least 1".into());
        }
        Ok(())
    }
}

/// One row of the iteration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
    pub max_abs_variable: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// `|objective_primal − objective_dual|` at the last iterate.
    pub final_gap: f64,
    /// Largest magnitude among the entries of `y` and `X`.
    pub max_abs_variable: f64,
    /// Smallest eigenvalue of `F0 + Σ yᵢ Fᵢ` at the returned `y`.
    pub min_slack_eigenvalue_estimate: f64,
    /// Condition estimate of the last scaled Newton system (0 if none was
    /// formed). Its square bounds the condition of the Schur complement.
    pub condition_estimate: f64,
    /// Dimension of the kernel shared by all pencil matrices, removed before
    /// iterating. The slack eigenvalue above refers to the compressed pencil.
    pub common_kernel_dim: usize,
    pub history: Vec<IterRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub y: Assignment<f64>,
    pub x: Matrix<f64>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status.tag == StatusTag::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid problem: {}", describe(.0))]
    InvalidProblem(Vec<Violation>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no interior starting point: {0}")]
    NoInteriorStartFound(String),
}

fn describe(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Solves a dual-form problem with double data.
pub fn solve_sdp(prob: &SdpProblem<f64>, opts: &SolverOptions) -> Result<SolveResult, SolveError> {
    let violations = prob.validate();
    if !violations.is_empty() {
        return Err(SolveError::InvalidProblem(violations));
    }
    if prob.form != crate::sdp::Form::DualForm {
        return Err(SolveError::InvalidInput(
            "solver expects a problem in dual form".into(),
        ));
    }
    opts.check().map_err(SolveError::InvalidInput)?;
    let Some(q) = presolve::common_range(prob) else {
        return ipm::run(prob, opts);
    };
    let mut res = ipm::run(&presolve::compress(prob, &q), opts)?;
    res.x = presolve::lift(&res.x, &q);
    let d = &mut res.diagnostics;
    d.common_kernel_dim = prob.dim() - q.ncols();
    let ymax = res.y.values().fold(0.0f64, |m, v| m.max(v.abs()));
    let xmax = (0..res.x.rows())
        .flat_map(|i| res.x.row(i).iter().copied())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    d.max_abs_variable = ymax.max(xmax);
    Ok(res)
}
