//! Reducing certificates for SDPs without a strictly feasible point.
//!
//! For a pencil `C + Σ yᵢ Γᵢ` exactly one of the following holds: some `y`
//! makes the pencil positive definite, or some `X ⪰ 0`, `X ≠ 0` is
//! orthogonal to `C` and every `Γᵢ`. In the second case every feasible `y`
//! satisfies `(C + Σ yᵢ Γᵢ) v = 0` for each `v` in the range of `X`, which
//! gives linear equalities among the variables. Substituting them removes
//! the degenerate directions the interior-point method trips over.

mod alternative;
mod constraints;

use serde::Serialize;

use crate::exactnum::{primitive_vector, serde_matrix, ExactMatrix, QuadExt};
use crate::sdp::{Assignment, SdpProblem};
use crate::solver::SolverOptions;

pub use alternative::{
    alternative_violations, build_alternative_problem, find_reducing_certificate, CONST_VAR,
    TRACE_VAR,
};
pub use constraints::{
    apply_constraints, derive_implicit_constraints, Affine, ImplicitConstraintSet, Substitution,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FacialError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("inconsistent implicit constraints: {0}")]
    Inconsistent(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("rounding failed: {0}")]
    RoundingFailed(String),
    #[error("solver failed: {0}")]
    SolverFailed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FacialOptions {
    /// Options for the alternative feasibility problem.
    pub solver: SolverOptions,
    /// Eigenvalues below `eig_threshold · λ_max` count as zero when reading
    /// the range of a numerical solution.
    pub eig_threshold: f64,
    /// Denominator bounds for rounding, tried in order.
    pub max_dens: Vec<u64>,
    /// Entry tolerance when rounding a numerical range basis.
    pub basis_tol: f64,
    /// Cap on diagnosis rounds in [`reduce_until_stable`]; `None` means the
    /// matrix size.
    pub max_rounds: Option<usize>,
}

impl Default for FacialOptions {
    fn default() -> Self {
        FacialOptions {
            solver: SolverOptions::default(),
            eig_threshold: 1e-6,
            max_dens: vec![100, 10_000, 1_000_000],
            basis_tol: 1e-3,
            max_rounds: None,
        }
    }
}

impl FacialOptions {
    /// Uses `max_den` as the largest denominator bound.
    pub fn with_max_den(mut self, max_den: u64) -> Self {
        self.max_dens.retain(|&d| d < max_den);
        self.max_dens.push(max_den);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundingMethod {
    Rational { max_den: u64 },
    QuadExt { max_den: u64 },
    Subspace { max_den: u64 },
}

/// `X ⪰ 0`, `X ≠ 0` with `⟨C,X⟩ = ⟨Γᵢ,X⟩ = 0`, plus a basis of its range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducingCertificate {
    #[serde(with = "serde_matrix")]
    pub x: ExactMatrix,
    #[serde(serialize_with = "serialize_vectors")]
    pub range_vectors: Vec<Vec<QuadExt>>,
    pub method: RoundingMethod,
}

fn serialize_vectors<S: serde::Serializer>(v: &[Vec<QuadExt>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    rows.serialize(s)
}

impl ReducingCertificate {
    /// Violated certificate conditions; empty when valid for `prob`.
    pub fn verify(&self, prob: &SdpProblem<QuadExt>) -> Vec<String> {
        let mut out = alternative_violations(prob, &self.x);
        if !out.is_empty() {
            return out;
        }
        let basis = crate::exactnum::row_space_basis(&self.x);
        if !crate::exactnum::same_span(&basis, &self.range_vectors) {
            out.push("range_vectors do not span range(X)".into());
        }
        out
    }
}

/// Primitive integer-scaled basis of `range(X)`.
pub fn certificate_null_vectors(cert: &ReducingCertificate) -> Vec<Vec<QuadExt>> {
    cert.range_vectors.iter().map(|v| primitive_vector(v)).collect()
}

/// Numerical evidence that the alternative system has no solution. This is
/// not a proof: it carries the tolerance it was obtained with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrictFeasibility {
    pub tolerance: f64,
    pub interior_point: Option<Assignment<f64>>,
    pub min_eigenvalue: Option<f64>,
    pub solver_message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Diagnosis {
    Reducible(ReducingCertificate),
    StrictlyFeasible(StrictFeasibility),
}

impl Diagnosis {
    pub fn certificate(&self) -> Option<&ReducingCertificate> {
        match self {
            Diagnosis::Reducible(c) => Some(c),
            Diagnosis::StrictlyFeasible(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionRound {
    pub diagnosis: Diagnosis,
    #[serde(serialize_with = "serialize_vectors")]
    pub null_vectors: Vec<Vec<QuadExt>>,
    pub constraints: ImplicitConstraintSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionLog {
    pub rounds: Vec<ReductionRound>,
    pub remaining_variables: Vec<String>,
}

impl ReductionLog {
    /// All substitutions, in the order they were applied.
    pub fn substitutions(&self) -> impl Iterator<Item = &Substitution> {
        self.rounds.iter().flat_map(|r| r.constraints.eliminated.iter())
    }
}

/// Diagnoses and substitutes until the diagnosis is `StrictlyFeasible` or
/// yields no new eliminations.
pub fn reduce_until_stable(
    prob: &SdpProblem<QuadExt>,
    opts: &FacialOptions,
) -> Result<(SdpProblem<QuadExt>, ReductionLog), FacialError> {
    let cap = opts.max_rounds.unwrap_or_else(|| prob.dim().max(1));
    let mut current = prob.clone();
    let mut rounds = Vec::new();
    for _ in 0..cap {
        let diagnosis = find_reducing_certificate(&current, opts)?;
        let (null_vectors, constraints) = match diagnosis.certificate() {
            Some(cert) => {
                let vs = certificate_null_vectors(cert);
                let cons = derive_implicit_constraints(&current, &vs)?;
                (vs, cons)
            }
            None => (Vec::new(), ImplicitConstraintSet::default()),
        };
        let done = constraints.is_empty();
        if !done {
            current = apply_constraints(&current, &constraints)?;
        }
        rounds.push(ReductionRound {
            diagnosis,
            null_vectors,
            constraints,
        });
        if done {
            break;
        }
    }
    let remaining_variables = current.var_names().iter().map(|s| s.to_string()).collect();
    Ok((
        current,
        ReductionLog {
            rounds,
            remaining_variables,
        },
    ))
}
