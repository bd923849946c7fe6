//! SDPs as linear matrix pencils.
//!
//! A problem in [`Form::DualForm`] reads
//!
//! ```text
//!     maximize  ⟨b, y⟩ + offset   s.t.  F0 + Σ yᵢ Fᵢ ⪰ 0
//! ```
//!
//! and its counterpart in [`Form::PrimalForm`] reads
//!
//! ```text
//!     minimize  ⟨F0, X⟩ + offset  s.t.  ⟨Fᵢ, X⟩ = −bᵢ ∀i,  X ⪰ 0.
//! ```
//!
//! Both forms share the same stored data; [`SdpProblem::dualize`] only flips
//! the tag.

pub mod json;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactnum::{Field, Matrix, QuadExt, Rational};

/// Values for named pencil variables.
pub type Assignment<T> = BTreeMap<String, T>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no value for variable {0:?}")]
    MissingVariable(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    DualForm,
    PrimalForm,
}

/// Which scalar type a problem's data is stored in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Double,
    Exact,
}

/// Outcome class of a numerical solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatusTag {
    Optimal,
    NumericalTrouble,
    PrimalInfeasible,
    DualUnboundedSuspected,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStatus {
    pub tag: StatusTag,
    pub message: String,
}

impl SolveStatus {
    pub fn new(tag: StatusTag, message: impl Into<String>) -> Self {
        SolveStatus {
            tag,
            message: message.into(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.tag == StatusTag::Optimal
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.message.is_empty() {
            write!(f, "{:?}", self.tag)
        } else {
            write!(f, "{:?}: {}", self.tag, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PencilTerm<T> {
    pub name: String,
    pub matrix: Matrix<T>,
}

/// `F0 + Σ yᵢ Fᵢ` with named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPencil<T> {
    pub constant: Matrix<T>,
    pub terms: Vec<PencilTerm<T>>,
}

impl<T: Field> MatrixPencil<T> {
    pub fn new(constant: Matrix<T>) -> Self {
        MatrixPencil {
            constant,
            terms: Vec::new(),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Matrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.constant.rows()
    }

    pub fn push(&mut self, name: impl Into<String>, matrix: Matrix<T>) {
        self.terms.push(PencilTerm {
            name: name.into(),
            matrix,
        });
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    pub fn term(&self, name: &str) -> Option<&Matrix<T>> {
        self.terms.iter().find(|t| t.name == name).map(|t| &t.matrix)
    }

    /// `F0 + Σ yᵢ Fᵢ` for positional values.
    pub fn eval_vec(&self, y: &[T]) -> Result<Matrix<T>, ModelError> {
        if y.len() != self.terms.len() {
            return Err(ModelError::WrongLength {
                expected: self.terms.len(),
                got: y.len(),
            });
        }
        let mut m = self.constant.clone();
        for (t, v) in self.terms.iter().zip(y) {
            m.add_scaled(v, &t.matrix);
        }
        Ok(m)
    }

    /// `F0 + Σ yᵢ Fᵢ` for a named assignment covering every variable.
    pub fn eval(&self, y: &Assignment<T>) -> Result<Matrix<T>, ModelError> {
        let vals = self.positional(y)?;
        self.eval_vec(&vals)
    }

    pub fn positional(&self, y: &Assignment<T>) -> Result<Vec<T>, ModelError> {
        self.terms
            .iter()
            .map(|t| {
                y.get(&t.name)
                    .cloned()
                    .ok_or_else(|| ModelError::MissingVariable(t.name.clone()))
            })
            .collect()
    }

    /// `Σ yᵢ Fᵢ` without the constant term.
    pub fn homogeneous(&self, y: &[T]) -> Matrix<T> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for (t, v) in self.terms.iter().zip(y) {
            m.add_scaled(v, &t.matrix);
        }
        m
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U + Copy) -> MatrixPencil<U> {
        MatrixPencil {
            constant: self.constant.map(f),
            terms: self
                .terms
                .iter()
                .map(|t| PencilTerm {
                    name: t.name.clone(),
                    matrix: t.matrix.map(f),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem<T> {
    pub name: String,
    pub note: String,
    pub pencil: MatrixPencil<T>,
    /// Objective coefficients, aligned with `pencil.terms`.
    pub objective: Vec<T>,
    /// Constant added to the objective (arises when variables are eliminated).
    pub offset: T,
    pub form: Form,
}

/// A structural problem with an [`SdpProblem`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    DimensionMismatch { what: String, expected: usize, found: String },
    NotSymmetric { what: String, row: usize, col: usize },
    DuplicateVariable { name: String },
    NonFinite { what: String },
    ObjectiveLength { expected: usize, found: usize },
    EmptyDimension,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { what, expected, found } => {
                write!(f, "{what} is {found}, expected {expected}x{expected}")
            }
            Violation::NotSymmetric { what, row, col } => {
                write!(f, "{what} is not symmetric at ({row}, {col})")
            }
            Violation::DuplicateVariable { name } => write!(f, "variable {name:?} appears twice"),
            Violation::NonFinite { what } => write!(f, "{what} has a non-finite entry"),
            Violation::ObjectiveLength { expected, found } => {
                write!(f, "objective has {found} coefficients for {expected} variables")
            }
            Violation::EmptyDimension => write!(f, "matrix dimension is zero"),
        }
    }
}

impl<T: Field> SdpProblem<T> {
    /// A maximization problem in dual form with zero offset.
    pub fn dual_form(name: impl Into<String>, pencil: MatrixPencil<T>, objective: Vec<T>) -> Self {
        SdpProblem {
            name: name.into(),
            note: String::new(),
            pencil,
            objective,
            offset: T::zero(),
            form: Form::DualForm,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    pub fn num_vars(&self) -> usize {
        self.pencil.terms.len()
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.pencil.var_names()
    }

    pub fn objective_coef(&self, name: &str) -> Option<&T> {
        self.pencil.index_of(name).map(|i| &self.objective[i])
    }

    /// `⟨b, y⟩ + offset`
    pub fn objective_value(&self, y: &[T]) -> T {
        crate::exactnum::dot(&self.objective, y) + self.offset.clone()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.pencil.constant.rows();
        if n == 0 {
            out.push(Violation::EmptyDimension);
        }
        let check = |what: String, m: &Matrix<T>, out: &mut Vec<Violation>| {
            if m.rows() != n || m.cols() != n {
                out.push(Violation::DimensionMismatch {
                    what,
                    expected: n,
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
                return;
            }
            if let Some((row, col)) = m.asymmetry() {
                out.push(Violation::NotSymmetric {
                    what: what.clone(),
                    row,
                    col,
                });
            }
            let finite = (0..n).all(|i| (0..n).all(|j| m[(i, j)].is_finite()));
            if !finite {
                out.push(Violation::NonFinite { what });
            }
        };
        if !self.pencil.constant.is_square() {
            out.push(Violation::DimensionMismatch {
                what: "F0".into(),
                expected: n,
                found: format!("{}x{}", n, self.pencil.constant.cols()),
            });
        } else {
            check("F0".into(), &self.pencil.constant, &mut out);
        }
        for t in &self.pencil.terms {
            check(format!("term {:?}", t.name), &t.matrix, &mut out);
        }
        let mut seen = HashSet::new();
        for t in &self.pencil.terms {
            if !seen.insert(t.name.as_str()) {
                out.push(Violation::DuplicateVariable {
                    name: t.name.clone(),
                });
            }
        }
        if self.objective.len() != self.pencil.terms.len() {
            out.push(Violation::ObjectiveLength {
                expected: self.pencil.terms.len(),
                found: self.objective.len(),
            });
        }
        if self.objective.iter().any(|b| !b.is_finite()) || !self.offset.is_finite() {
            out.push(Violation::NonFinite {
                what: "objective".into(),
            });
        }
        out
    }

    /// Switches between the dual-form and primal-form readings of the same
    /// data. Applying it twice returns the original problem.
    pub fn dualize(&self) -> Self {
        let mut p = self.clone();
        p.form = match self.form {
            Form::DualForm => Form::PrimalForm,
            Form::PrimalForm => Form::DualForm,
        };
        p
    }

    /// Primal objective `⟨F0, X⟩ + offset`.
    pub fn primal_objective(&self, x: &Matrix<T>) -> T {
        self.pencil.constant.inner(x) + self.offset.clone()
    }

    /// Primal constraint residuals `⟨Fᵢ, X⟩ + bᵢ`, zero exactly when `X`
    /// satisfies the equality constraints.
    pub fn primal_residuals(&self, x: &Matrix<T>) -> Vec<T> {
        self.pencil
            .terms
            .iter()
            .zip(&self.objective)
            .map(|(t, b)| t.matrix.inner(x) + b.clone())
            .collect()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U + Copy) -> SdpProblem<U> {
        SdpProblem {
            name: self.name.clone(),
            note: self.note.clone(),
            pencil: self.pencil.map(f),
            objective: self.objective.iter().map(f).collect(),
            offset: f(&self.offset),
            form: self.form,
        }
    }

    /// Lossy downcast for the numeric solver.
    pub fn to_f64(&self) -> SdpProblem<f64> {
        self.map(T::to_f64)
    }
}

impl SdpProblem<f64> {
    /// Exact rational image of a double problem (every finite double is a
    /// dyadic rational). Non-finite entries become zero; `validate` reports
    /// them beforehand.
    pub fn to_exact(&self) -> SdpProblem<QuadExt> {
        self.map(|v| QuadExt::from(Rational::from_f64(*v).unwrap_or_default()))
    }
}
