use std::fmt::Write;

use super::SolveResult;

/// Iterate magnitude above which a strict-feasibility warning is issued even
/// for an optimal status.
pub const WARN_MAGNITUDE: f64 = 1e6;

/// Plain-text summary of a solve.
pub fn diagnostics_report(res: &SolveResult) -> String {
    let d = &res.diagnostics;
    let mut out = String::new();
    let _ = writeln!(out, "status:              {}", res.status);
    let _ = writeln!(out, "primal objective:    {:.12e}", res.objective_primal);
    let _ = writeln!(out, "dual objective:      {:.12e}", res.objective_dual);
    let _ = writeln!(out, "duality gap:         {:.3e}", d.final_gap);
    let _ = writeln!(out, "iterations:          {}", d.iterations);
    let _ = writeln!(out, "max |variable|:      {:.3e}", d.max_abs_variable);
    let _ = writeln!(out, "min slack eigenvalue {:.3e}", d.min_slack_eigenvalue_estimate);
    let _ = writeln!(out, "newton condition:    {:.3e}", d.condition_estimate);
    if d.common_kernel_dim > 0 {
        let _ = writeln!(out, "common kernel:       {} (removed before solving)", d.common_kernel_dim);
    }
    if !res.is_optimal() || d.max_abs_variable > WARN_MAGNITUDE {
        let _ = writeln!(
            out,
            "WARNING: the iterates suggest the constraint set has no strictly feasible point \
             (status {:?}, max |variable| {:.3e}). The reported objective may be unreliable.",
            res.status.tag, d.max_abs_variable
        );
        let _ = writeln!(
            out,
            "Recommendation: run the facial reduction diagnosis (`strictfeas diagnose`) and \
             solve the reduced problem (`strictfeas reduce`)."
        );
    } else {
        let _ = writeln!(out, "no strict-feasibility warning");
    }
    out
}
