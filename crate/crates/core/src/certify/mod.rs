//! Exact verification of optimal values: primal points, weak-duality bound
//! certificates and the one-variable bound of the second line problem.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bell::MU;
use crate::exactnum::{psd_check_exact, ExactError, ExactMatrix, Matrix, PsdVerdict, PsdWitness, QuadExt, Rational};
use crate::sdp::{Assignment, ModelError, SdpProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("wrong shape: {0}")]
    WrongShape(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PrimalVerdict {
    Feasible,
    Infeasible { witness: PsdWitness },
}

impl PrimalVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PrimalVerdict::Feasible)
    }
}

/// Exact PSD test of the pencil at `point`.
pub fn verify_primal_point(
    prob: &SdpProblem<QuadExt>,
    point: &Assignment<QuadExt>,
) -> Result<PrimalVerdict, CertifyError> {
    let m = prob.pencil.eval(point)?;
    Ok(match psd_check_exact(&m)? {
        PsdVerdict::Psd => PrimalVerdict::Feasible,
        PsdVerdict::NotPsd(witness) => PrimalVerdict::Infeasible { witness },
    })
}

/// `X ⪰ 0` with `⟨Fᵢ, X⟩ = −t·cᵢ` for the objective direction `c` and some
/// `t > 0`. For every feasible `y`,
///
/// ```text
///     0 ≤ ⟨F0 + Σ yᵢ Fᵢ, X⟩ = ⟨F0, X⟩ − t·⟨c, y⟩,
/// ```
///
/// so `⟨c, y⟩ ≤ ⟨F0, X⟩ / t`. With `c = e_μ` this is
/// `μ ≤ −⟨F0, X⟩ / ⟨F_μ, X⟩`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    #[serde(with = "crate::exactnum::serde_matrix")]
    pub x: ExactMatrix,
    /// `⟨F_k, X⟩` for the first variable `k` with nonzero objective weight.
    #[serde(with = "crate::exactnum::serde_scalar")]
    pub normalization: QuadExt,
    /// Upper bound on the objective, including the problem's offset.
    #[serde(with = "crate::exactnum::serde_scalar")]
    pub certified_bound: QuadExt,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundVerdict {
    Valid(BoundCertificate),
    Invalid { violations: Vec<String> },
}

impl BoundVerdict {
    pub fn certificate(&self) -> Option<&BoundCertificate> {
        match self {
            BoundVerdict::Valid(c) => Some(c),
            BoundVerdict::Invalid { .. } => None,
        }
    }
}

/// Checks `X` as a bound certificate for maximizing `objective_var`.
pub fn verify_bound_certificate(
    prob: &SdpProblem<QuadExt>,
    x: &ExactMatrix,
    objective_var: &str,
) -> BoundVerdict {
    let Some(k) = prob.pencil.index_of(objective_var) else {
        return BoundVerdict::Invalid {
            violations: vec![format!("unknown objective variable {objective_var:?}")],
        };
    };
    let mut c = vec![QuadExt::zero(); prob.num_vars()];
    c[k] = QuadExt::one();
    bound_for_direction(prob, x, &c, &QuadExt::zero())
}

/// Checks `X` as a bound certificate for the problem's own objective.
pub fn verify_objective_bound(prob: &SdpProblem<QuadExt>, x: &ExactMatrix) -> BoundVerdict {
    bound_for_direction(prob, x, &prob.objective, &prob.offset)
}

fn bound_for_direction(
    prob: &SdpProblem<QuadExt>,
    x: &ExactMatrix,
    c: &[QuadExt],
    offset: &QuadExt,
) -> BoundVerdict {
    let n = prob.dim();
    if x.rows() != n || x.cols() != n {
        return BoundVerdict::Invalid {
            violations: vec![format!("X is {}x{}, expected {n}x{n}", x.rows(), x.cols())],
        };
    }
    let mut violations = Vec::new();
    match psd_check_exact(x) {
        Ok(PsdVerdict::Psd) => {}
        Ok(PsdVerdict::NotPsd(w)) => violations.push(format!(
            "X is not positive semidefinite: v^T X v = {} for v = ({})",
            w.value,
            join(&w.vector)
        )),
        Err(e) => violations.push(format!("X is not a valid matrix: {e}")),
    }
    let inner: Vec<QuadExt> = prob.pencil.terms.iter().map(|t| t.matrix.inner(x)).collect();
    let Some(lead) = c.iter().position(|v| !v.is_zero()) else {
        violations.push("objective is identically zero".into());
        return BoundVerdict::Invalid { violations };
    };
    let normalization = inner[lead].clone();
    let t = -(&normalization / &c[lead]);
    if crate::exactnum::qsign(&t) <= 0 {
        violations.push(format!(
            "normalization <F_{}, X> = {normalization} does not have the sign opposite to the objective weight",
            prob.pencil.terms[lead].name
        ));
    }
    for (i, term) in prob.pencil.terms.iter().enumerate() {
        let want = -(&t * &c[i]);
        if inner[i] != want {
            violations.push(format!("<F_{}, X> = {} but must be {want}", term.name, inner[i]));
        }
    }
    if !violations.is_empty() {
        return BoundVerdict::Invalid { violations };
    }
    let certified_bound = &(&prob.pencil.constant.inner(x) / &t) + offset;
    BoundVerdict::Valid(BoundCertificate {
        x: x.clone(),
        normalization,
        certified_bound,
    })
}

fn join(v: &[QuadExt]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Dual certificate for the first line problem in its simplified form: the
/// integer matrix below times 1/2.
pub fn problem1_x_star() -> ExactMatrix {
    const UPPER: [[i64; 9]; 9] = [
        [1, -1, -1, 0, -1, 1, 1, 0, 0],
        [0, 4, 1, 0, 1, -4, -4, 0, 3],
        [0, 0, 1, 0, 1, -1, -1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, -1, -1, 0, 0],
        [0, 0, 0, 0, 0, 4, 4, 0, -3],
        [0, 0, 0, 0, 0, 0, 4, 0, -3],
        [0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 3],
    ];
    let half = QuadExt::ratio(1, 2);
    let mut m = Matrix::zeros(9, 9);
    for (i, row) in UPPER.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().skip(i) {
            m.set_sym(i, j, &QuadExt::from(v) * &half);
        }
    }
    m
}

/// The primal point of the first line problem at its optimum.
pub fn problem1_optimal_point() -> Assignment<QuadExt> {
    [
        (MU, QuadExt::zero()),
        ("a01", QuadExt::ratio(1, 3)),
        ("b01", QuadExt::ratio(1, 6)),
        ("c0_01", QuadExt::ratio(1, 6)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Bound certificate for the simplified toy problem: `e₂e₂ᵀ` gives
/// `p_A(0) ≥ 0`, hence an objective of at most 0.
pub fn toy_bound_certificate() -> ExactMatrix {
    let mut m = Matrix::zeros(5, 5);
    m.set_sym(1, 1, QuadExt::one());
    m
}

/// `μ₂* = 5√5 − 11`.
pub fn mu2_star() -> QuadExt {
    QuadExt::new(Rational::new(-11, 1), Rational::new(5, 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSample {
    #[serde(with = "crate::exactnum::serde_scalar")]
    pub mu: QuadExt,
    pub expected_psd: bool,
    pub psd: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Mu2Verdict {
    BoundConfirmed {
        #[serde(with = "crate::exactnum::serde_scalar")]
        bound: QuadExt,
        samples: Vec<BoundSample>,
    },
    Failed {
        detail: String,
        samples: Vec<BoundSample>,
    },
}

impl Mu2Verdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, Mu2Verdict::BoundConfirmed { .. })
    }
}

fn single_variable(prob: &SdpProblem<QuadExt>) -> Result<&str, CertifyError> {
    match prob.var_names().as_slice() {
        [v] => Ok(v),
        names => Err(CertifyError::WrongShape(format!(
            "expected a one-variable pencil, found variables {names:?}"
        ))),
    }
}

fn eval_at(prob: &SdpProblem<QuadExt>, var: &str, mu: &QuadExt) -> Result<ExactMatrix, CertifyError> {
    let point: Assignment<QuadExt> = [(var.to_string(), mu.clone())].into_iter().collect();
    Ok(prob.pencil.eval(&point)?)
}

/// Exact PSD at `μ*`, exact NotPSD at `μ* + δ` for `δ ∈ {1/1000, 1/100,
/// 1/10}` and exact PSD at `0` and `μ*/2`.
///
/// The feasible set of a one-variable pencil is an interval, so PSD at `μ*`
/// and NotPSD just above it fix the maximum at `μ*` up to the smallest `δ`;
/// the first line of the table (δ = 1/1000) is the sharpest sample.
pub fn verify_mu2_bound(prob: &SdpProblem<QuadExt>) -> Result<Mu2Verdict, CertifyError> {
    let var = single_variable(prob)?;
    let star = mu2_star();
    let mut plan = vec![(star.clone(), true)];
    for d in [1000, 100, 10] {
        plan.push((&star + &QuadExt::ratio(1, d), false));
    }
    plan.push((QuadExt::zero(), true));
    plan.push((&star / &QuadExt::from(2), true));

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (mu, expected_psd) in plan {
        let psd = psd_check_exact(&eval_at(prob, var, &mu)?)?.is_psd();
        if psd != expected_psd {
            failures.push(format!(
                "at {var} = {mu} the pencil is {}PSD",
                if psd { "" } else { "not " }
            ));
        }
        samples.push(BoundSample { mu, expected_psd, psd });
    }
    Ok(if failures.is_empty() {
        Mu2Verdict::BoundConfirmed { bound: star, samples }
    } else {
        Mu2Verdict::Failed {
            detail: failures.join("; "),
            samples,
        }
    })
}

/// Tolerance of [`check_eigenvalue_formula`].
pub const FORMULA_TOL: f64 = 1e-10;

/// `A(μ) = (4√5 − 17)μ − 4√5 + 36`.
pub fn formula_a(mu: f64) -> f64 {
    let s5 = 5f64.sqrt();
    (4.0 * s5 - 17.0) * mu - 4.0 * s5 + 36.0
}

/// `B(μ) = (160√5 + 1201)μ² − 16(√5 − 85)μ − 144√5 + 688`.
pub fn formula_b(mu: f64) -> f64 {
    let s5 = 5f64.sqrt();
    (160.0 * s5 + 1201.0) * mu * mu - 16.0 * (s5 - 85.0) * mu - 144.0 * s5 + 688.0
}

/// The closed-form eigenvalue `(A − √B)/76`, a root of
/// `q(λ) = 5776λ² − 152Aλ + A² − B`.
pub fn formula_eigenvalue(mu: f64) -> f64 {
    (formula_a(mu) - formula_b(mu).sqrt()) / 76.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaSample {
    #[serde(with = "crate::exactnum::serde_scalar")]
    pub mu: QuadExt,
    pub formula_value: f64,
    pub nearest_eigenvalue: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FormulaVerdict {
    Confirmed { samples: Vec<FormulaSample> },
    Failed { detail: String, samples: Vec<FormulaSample> },
}

impl FormulaVerdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, FormulaVerdict::Confirmed { .. })
    }
}

/// Sample points of [`check_eigenvalue_formula`].
pub fn formula_sample_points() -> Vec<QuadExt> {
    vec![QuadExt::zero(), QuadExt::ratio(1, 10), mu2_star(), QuadExt::ratio(1, 4)]
}

/// Compares the closed-form eigenvalue against a numerical eigensolver at
/// each sample `μ`; also checks the value is a root of `q`.
pub fn check_eigenvalue_formula(prob: &SdpProblem<QuadExt>) -> Result<FormulaVerdict, CertifyError> {
    let var = single_variable(prob)?;
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for mu in formula_sample_points() {
        let m = eval_at(prob, var, &mu)?;
        let n = m.rows();
        let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)].to_f64());
        let eigs = SymmetricEigen::new(dm).eigenvalues;
        let mf = mu.to_f64();
        let value = formula_eigenvalue(mf);
        let (a, b) = (formula_a(mf), formula_b(mf));
        let q = 5776.0 * value * value - 152.0 * a * value + a * a - b;
        let nearest = eigs
            .iter()
            .copied()
            .min_by(|x, y| (x - value).abs().total_cmp(&(y - value).abs()))
            .unwrap_or(f64::NAN);
        let distance = (nearest - value).abs();
        if !(distance <= FORMULA_TOL) || !(q.abs() <= FORMULA_TOL * (1.0 + a * a + b.abs())) {
            failures.push(format!("at {var} = {mu}: formula {value:.15e}, nearest eigenvalue {nearest:.15e}"));
        }
        samples.push(FormulaSample {
            mu,
            formula_value: value,
            nearest_eigenvalue: nearest,
            distance,
        });
    }
    Ok(if failures.is_empty() {
        FormulaVerdict::Confirmed { samples }
    } else {
        FormulaVerdict::Failed {
            detail: failures.join("; "),
            samples,
        }
    })
}

/// `{claim, verdict, witness?, certified_bound?}` with exact value strings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub claim: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_bound: Option<String>,
}

impl VerdictReport {
    pub fn primal(claim: impl Into<String>, v: &PrimalVerdict) -> Self {
        let (verdict, witness) = match v {
            PrimalVerdict::Feasible => ("feasible", None),
            PrimalVerdict::Infeasible { witness } => ("infeasible", serde_json::to_value(witness).ok()),
        };
        VerdictReport {
            claim: claim.into(),
            verdict: verdict.into(),
            witness,
            certified_bound: None,
        }
    }

    pub fn bound(claim: impl Into<String>, v: &BoundVerdict) -> Self {
        let (verdict, witness, bound) = match v {
            BoundVerdict::Valid(c) => ("valid", None, Some(c.certified_bound.to_string())),
            BoundVerdict::Invalid { violations } => ("invalid", serde_json::to_value(violations).ok(), None),
        };
        VerdictReport {
            claim: claim.into(),
            verdict: verdict.into(),
            witness,
            certified_bound: bound,
        }
    }

    pub fn mu2(claim: impl Into<String>, v: &Mu2Verdict) -> Self {
        let (verdict, bound) = match v {
            Mu2Verdict::BoundConfirmed { bound, .. } => ("bound_confirmed", Some(bound.to_string())),
            Mu2Verdict::Failed { .. } => ("failed", None),
        };
        VerdictReport {
            claim: claim.into(),
            verdict: verdict.into(),
            witness: serde_json::to_value(v).ok(),
            certified_bound: bound,
        }
    }

    pub fn formula(claim: impl Into<String>, v: &FormulaVerdict) -> Self {
        VerdictReport {
            claim: claim.into(),
            verdict: if v.is_confirmed() { "confirmed" } else { "failed" }.into(),
            witness: serde_json::to_value(v).ok(),
            certified_bound: None,
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict.as_str(), "feasible" | "valid" | "bound_confirmed" | "confirmed")
    }
}

#[cfg(test)]
mod tests;
