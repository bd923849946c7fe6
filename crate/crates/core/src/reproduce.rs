//! End-to-end runs over the built-in problems: raw solve, diagnosis,
//! reduction, clean solve and exact certification.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::bell::{almost_quantum_pencil, chsh_toy_pencil, BehaviorLine, MU};
use crate::certify::{
    check_eigenvalue_formula, mu2_star, problem1_x_star, problem1_optimal_point, toy_bound_certificate,
    verify_bound_certificate, verify_mu2_bound, verify_objective_bound, verify_primal_point,
    VerdictReport,
};
use crate::exactnum::{same_span, Matrix, QuadExt};
use crate::facial::{
    apply_constraints, certificate_null_vectors, derive_implicit_constraints,
    find_reducing_certificate, Diagnosis, FacialOptions, ImplicitConstraintSet,
};
use crate::sdp::{MatrixPencil, SdpProblem, StatusTag};
use crate::solver::{solve_sdp, SolveResult, SolverOptions};

/// Magnitude threshold of the trouble signature.
pub const TROUBLE_MAGNITUDE: f64 = 1e6;
/// Objective tolerance against certified values.
pub const OBJECTIVE_TOL: f64 = 1e-6;
/// Largest iterate magnitude accepted for a clean solve.
pub const CLEAN_MAGNITUDE: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Problem1,
    Problem2,
    ChshToy,
    All,
}

impl Target {
    pub fn expand(self) -> Vec<Target> {
        match self {
            Target::All => vec![Target::Problem1, Target::Problem2, Target::ChshToy],
            t => vec![t],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Problem1 => "problem1",
            Target::Problem2 => "problem2",
            Target::ChshToy => "chsh-toy",
            Target::All => "all",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "problem1" => Ok(Target::Problem1),
            "problem2" => Ok(Target::Problem2),
            "chsh-toy" => Ok(Target::ChshToy),
            "all" => Ok(Target::All),
            _ => Err(format!("unknown target {s:?} (expected problem1, problem2, chsh-toy or all)")),
        }
    }
}

fn ints(rows: &[&[i64]]) -> Vec<Vec<QuadExt>> {
    rows.iter().map(|r| r.iter().map(|&v| QuadExt::from(v)).collect()).collect()
}

/// Raw problem of a single target.
pub fn raw_problem(t: Target) -> SdpProblem<QuadExt> {
    match t {
        Target::Problem1 => almost_quantum_pencil(&BehaviorLine::l1()),
        Target::Problem2 => almost_quantum_pencil(&BehaviorLine::l2()),
        Target::ChshToy | Target::All => chsh_toy_pencil(),
    }
}

/// Reference null vectors of the raw problem.
pub fn expected_null_vectors(t: Target) -> Vec<Vec<QuadExt>> {
    match t {
        Target::Problem1 => ints(&[&[1, 0, -1, 0, -1, 0, 0, 0, 1], &[0, 0, 0, 1, 0, 0, 0, -1, 0]]),
        Target::Problem2 => ints(&[
            &[0, 0, 0, 0, 0, 0, 0, 0, 1],
            &[0, 0, 0, 1, 0, 0, 0, -1, 0],
            &[0, 1, 0, 0, 0, 0, -1, 0, 0],
        ]),
        Target::ChshToy | Target::All => ints(&[&[0, 0, 0, 1, 0], &[0, 0, 0, 0, 1]]),
    }
}

/// Reference implicit constraints, as `(variable, expression)` in the
/// display syntax of [`crate::facial::Affine`].
pub fn expected_constraints(t: Target) -> Vec<(&'static str, &'static str)> {
    match t {
        Target::Problem1 => vec![
            ("c1_01", "b01"),
            ("c01_01", "c0_01"),
            ("c01_10", "c0_01"),
            ("c01_0", "1/6*mu + 1/3"),
            ("c01_1", "1/6*mu + a01 - 1/6"),
        ],
        Target::Problem2 => vec![
            ("a01", "0"),
            ("b01", "0"),
            ("c01_1", "0"),
            ("c1_01", "0"),
            ("c01_01", "0"),
            ("c01_0", "1/2*mu"),
            ("c0_01", "1/2*mu"),
            ("c01_10", "1/2*mu"),
        ],
        Target::ChshToy | Target::All => vec![
            ("p00", "0"),
            ("p01", "0"),
            ("p10", "0"),
            ("p11", "0"),
            ("b01", "0"),
        ],
    }
}

/// Simplified problem obtained from the reference null vectors, without any
/// numerical step.
pub fn simplified_problem(t: Target) -> SdpProblem<QuadExt> {
    let raw = raw_problem(t);
    let cons = derive_implicit_constraints(&raw, &expected_null_vectors(t))
        .expect("reference null vectors are consistent");
    let mut p = apply_constraints(&raw, &cons).expect("derived constraints apply");
    p.name = format!("{}-simplified", raw.name);
    p
}

/// Exactly certified optimal value.
pub fn certified_value(t: Target) -> QuadExt {
    match t {
        Target::Problem2 => mu2_star(),
        _ => QuadExt::zero(),
    }
}

/// `max y s.t. diag(1 − y, 1 + y) ⪰ 0`, a strictly feasible sample.
pub fn interval_problem() -> SdpProblem<QuadExt> {
    let mut pencil = MatrixPencil::new(Matrix::identity(2));
    pencil.push("y", Matrix::diagonal(vec![-QuadExt::one(), QuadExt::one()]));
    SdpProblem::dual_form("interval", pencil, vec![QuadExt::one()])
        .with_note("strictly feasible sample: maximize y subject to diag(1 - y, 1 + y) >= 0")
}

/// Names accepted by [`builtin_problem`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "problem1-raw",
    "problem1-simplified",
    "problem2-raw",
    "problem2-simplified",
    "chsh-toy-raw",
    "chsh-toy-simplified",
    "interval",
];

pub fn builtin_problem(name: &str) -> Option<SdpProblem<QuadExt>> {
    let (t, simple) = match name {
        "problem1-raw" => (Target::Problem1, false),
        "problem1-simplified" => (Target::Problem1, true),
        "problem2-raw" => (Target::Problem2, false),
        "problem2-simplified" => (Target::Problem2, true),
        "chsh-toy-raw" => (Target::ChshToy, false),
        "chsh-toy-simplified" => (Target::ChshToy, true),
        "interval" => return Some(interval_problem()),
        _ => return None,
    };
    Some(if simple { simplified_problem(t) } else { raw_problem(t) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub status: StatusTag,
    pub message: String,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub iterations: usize,
    pub max_abs_variable: f64,
    pub condition_estimate: f64,
    pub common_kernel_dim: usize,
}

impl From<&SolveResult> for SolveSummary {
    fn from(r: &SolveResult) -> Self {
        SolveSummary {
            status: r.status.tag,
            message: r.status.message.clone(),
            objective_primal: r.objective_primal,
            objective_dual: r.objective_dual,
            iterations: r.diagnostics.iterations,
            max_abs_variable: r.diagnostics.max_abs_variable,
            condition_estimate: r.diagnostics.condition_estimate,
            common_kernel_dim: r.diagnostics.common_kernel_dim,
        }
    }
}

/// Which parts of the trouble signature a solve exhibits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TroubleSignature {
    pub not_optimal: bool,
    pub large_iterates: bool,
    pub objective_off: bool,
}

impl TroubleSignature {
    pub fn of(res: &SolveResult, certified: f64) -> Self {
        TroubleSignature {
            not_optimal: !res.is_optimal(),
            large_iterates: !(res.diagnostics.max_abs_variable <= TROUBLE_MAGNITUDE),
            objective_off: !((res.objective_dual - certified).abs() <= OBJECTIVE_TOL),
        }
    }

    pub fn present(&self) -> bool {
        self.not_optimal || self.large_iterates || self.objective_off
    }
}

/// A solve is clean when it is optimal, within [`OBJECTIVE_TOL`] of the
/// certified value and has iterates below [`CLEAN_MAGNITUDE`].
pub fn is_clean(res: &SolveResult, certified: f64) -> bool {
    res.is_optimal()
        && (res.objective_dual - certified).abs() <= OBJECTIVE_TOL
        && res.diagnostics.max_abs_variable < CLEAN_MAGNITUDE
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemReport {
    pub target: Target,
    pub problem: String,
    pub certified_value: String,
    pub raw_solve: Option<SolveSummary>,
    pub trouble_signature: Option<TroubleSignature>,
    pub diagnosis: Option<Diagnosis>,
    pub null_vectors: Vec<Vec<String>>,
    pub constraints: Option<ImplicitConstraintSet>,
    pub remaining_variables: Vec<String>,
    pub simplified_solve: Option<SolveSummary>,
    pub verdicts: Vec<VerdictReport>,
    pub checks: Vec<Check>,
    /// Milliseconds per stage.
    pub timings_ms: BTreeMap<String, f64>,
}

impl ProblemReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub target: Target,
    pub problems: Vec<ProblemReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReproduceOptions {
    pub solver: SolverOptions,
    pub facial: FacialOptions,
}

struct Stages {
    timings: BTreeMap<String, f64>,
}

impl Stages {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.insert(name.into(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

fn check(checks: &mut Vec<Check>, claim: impl Into<String>, passed: bool, detail: impl Into<String>) {
    checks.push(Check {
        claim: claim.into(),
        passed,
        detail: detail.into(),
    });
}

pub fn reproduce(target: Target, opts: &ReproduceOptions) -> ReproduceReport {
    let problems: Vec<ProblemReport> = target.expand().into_iter().map(|t| reproduce_one(t, opts)).collect();
    let passed = problems.iter().all(ProblemReport::passed);
    ReproduceReport {
        target,
        problems,
        passed,
    }
}

/// Runs every stage for one target. A failing stage is recorded as a failed
/// check and the later stages that depend on it are skipped.
pub fn reproduce_one(t: Target, opts: &ReproduceOptions) -> ProblemReport {
    let mut stages = Stages {
        timings: BTreeMap::new(),
    };
    let raw = stages.time("build", || raw_problem(t));
    let certified = certified_value(t);
    let certified_f = certified.to_f64();
    let mut report = ProblemReport {
        target: t,
        problem: raw.name.clone(),
        certified_value: certified.to_string(),
        raw_solve: None,
        trouble_signature: None,
        diagnosis: None,
        null_vectors: Vec::new(),
        constraints: None,
        remaining_variables: Vec::new(),
        simplified_solve: None,
        verdicts: Vec::new(),
        checks: Vec::new(),
        timings_ms: BTreeMap::new(),
    };
    let checks = &mut report.checks;

    match stages.time("raw_solve", || solve_sdp(&raw.to_f64(), &opts.solver)) {
        Ok(res) => {
            let sig = TroubleSignature::of(&res, certified_f);
            check(
                checks,
                "raw problem shows the trouble signature",
                sig.present(),
                format!("{} (objective {:.10e}, max |variable| {:.3e})", res.status, res.objective_dual, res.diagnostics.max_abs_variable),
            );
            report.raw_solve = Some(SolveSummary::from(&res));
            report.trouble_signature = Some(sig);
        }
        Err(e) => check(checks, "raw problem shows the trouble signature", false, e.to_string()),
    }

    let diagnosis = stages.time("diagnose", || find_reducing_certificate(&raw, &opts.facial));
    let reduced = match diagnosis {
        Ok(Diagnosis::Reducible(cert)) => {
            let vs = certificate_null_vectors(&cert);
            let expected = expected_null_vectors(t);
            check(
                checks,
                "certificate range equals the reference null vectors",
                same_span(&vs, &expected),
                format!("{} vectors recovered", vs.len()),
            );
            report.null_vectors = vs.iter().map(|v| v.iter().map(ToString::to_string).collect()).collect();
            report.diagnosis = Some(Diagnosis::Reducible(cert));
            let derived = stages.time("derive", || derive_implicit_constraints(&raw, &vs));
            match derived {
                Ok(cons) => {
                    let mut got: Vec<(String, String)> = cons
                        .eliminated
                        .iter()
                        .map(|s| (s.var.clone(), s.expr.to_string()))
                        .collect();
                    let mut want: Vec<(String, String)> = expected_constraints(t)
                        .into_iter()
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .collect();
                    got.sort();
                    want.sort();
                    let shown: Vec<String> = cons.eliminated.iter().map(ToString::to_string).collect();
                    check(
                        checks,
                        "implicit constraints match the reference list",
                        got == want,
                        shown.join("; "),
                    );
                    let applied = apply_constraints(&raw, &cons);
                    report.constraints = Some(cons);
                    match applied {
                        Ok(p) => Some(p),
                        Err(e) => {
                            check(checks, "constraints substitute cleanly", false, e.to_string());
                            None
                        }
                    }
                }
                Err(e) => {
                    check(checks, "implicit constraints match the reference list", false, e.to_string());
                    None
                }
            }
        }
        Ok(d @ Diagnosis::StrictlyFeasible(_)) => {
            check(checks, "raw problem is not strictly feasible", false, "diagnosis reported strict feasibility");
            report.diagnosis = Some(d);
            None
        }
        Err(e) => {
            check(checks, "certificate range equals the reference null vectors", false, e.to_string());
            None
        }
    };

    if let Some(reduced) = &reduced {
        report.remaining_variables = reduced.var_names().iter().map(|s| s.to_string()).collect();
        match stages.time("simplified_solve", || solve_sdp(&reduced.to_f64(), &opts.solver)) {
            Ok(res) => {
                check(
                    checks,
                    "simplified problem solves cleanly to the certified value",
                    is_clean(&res, certified_f),
                    format!(
                        "{} (objective {:.12}, certified {certified_f:.12}, max |variable| {:.3e})",
                        res.status, res.objective_dual, res.diagnostics.max_abs_variable
                    ),
                );
                report.simplified_solve = Some(SolveSummary::from(&res));
            }
            Err(e) => check(checks, "simplified problem solves cleanly to the certified value", false, e.to_string()),
        }
    }

    let exact = stages.time("certify", || certify_target(t));
    for v in exact {
        check(checks, v.claim.clone(), v.passed(), v.verdict.clone());
        report.verdicts.push(v);
    }
    report.timings_ms = stages.timings;
    report
}

/// Exact verdicts against the simplified problem built from the reference
/// null vectors.
fn certify_target(t: Target) -> Vec<VerdictReport> {
    let p = simplified_problem(t);
    let mut out = Vec::new();
    match t {
        Target::Problem1 => {
            if let Ok(v) = verify_primal_point(&p, &problem1_optimal_point()) {
                out.push(VerdictReport::primal("(mu, a01, b01, c0_01) = (0, 1/3, 1/6, 1/6) is feasible", &v));
            }
            let b = verify_bound_certificate(&p, &problem1_x_star(), MU);
            let mut r = VerdictReport::bound("X* certifies mu <= 0", &b);
            if b.certificate().is_some_and(|c| !c.certified_bound.is_zero()) {
                r.verdict = "wrong_bound".into();
            }
            out.push(r);
        }
        Target::Problem2 => {
            let point = [(MU.to_string(), mu2_star())].into_iter().collect();
            if let Ok(v) = verify_primal_point(&p, &point) {
                out.push(VerdictReport::primal("mu = 5*sqrt5 - 11 is feasible", &v));
            }
            match verify_mu2_bound(&p) {
                Ok(v) => out.push(VerdictReport::mu2("mu <= 5*sqrt5 - 11 and no larger sample is feasible", &v)),
                Err(e) => out.push(error_verdict("mu <= 5*sqrt5 - 11", e)),
            }
            match check_eigenvalue_formula(&p) {
                Ok(v) => out.push(VerdictReport::formula("closed-form eigenvalue matches the spectrum", &v)),
                Err(e) => out.push(error_verdict("closed-form eigenvalue", e)),
            }
        }
        Target::ChshToy | Target::All => {
            let point = ["pA0", "pA1", "a01"]
                .into_iter()
                .map(|v| (v.to_string(), QuadExt::zero()))
                .collect();
            if let Ok(v) = verify_primal_point(&p, &point) {
                out.push(VerdictReport::primal("the zero assignment is feasible with objective 0", &v));
            }
            let b = verify_objective_bound(&p, &toy_bound_certificate());
            let mut r = VerdictReport::bound("e2 e2^T certifies an objective of at most 0", &b);
            if b.certificate().is_some_and(|c| !c.certified_bound.is_zero()) {
                r.verdict = "wrong_bound".into();
            }
            out.push(r);
        }
    }
    out
}

fn error_verdict(claim: &str, e: impl fmt::Display) -> VerdictReport {
    VerdictReport {
        claim: claim.into(),
        verdict: "error".into(),
        witness: Some(serde_json::Value::String(e.to_string())),
        certified_bound: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_parse() {
        for t in [Target::Problem1, Target::Problem2, Target::ChshToy, Target::All] {
            assert_eq!(t.to_string().parse::<Target>().unwrap(), t);
        }
        assert!("problem3".parse::<Target>().is_err());
        assert_eq!(Target::All.expand().len(), 3);
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let p = builtin_problem(name).unwrap();
            assert!(p.validate().is_empty(), "{name}");
        }
        assert!(builtin_problem("nope").is_none());
        assert_eq!(simplified_problem(Target::Problem2).var_names(), [MU]);
    }

    #[test]
    fn all_targets_pass() {
        let r = reproduce(Target::All, &ReproduceOptions::default());
        for p in &r.problems {
            for c in &p.checks {
                assert!(c.passed, "{}: {} ({})", p.problem, c.claim, c.detail);
            }
        }
        assert!(r.passed);
    }
}
