use std::fmt;

use serde::{Serialize, Serializer};

use super::FacialError;
use crate::exactnum::{rref_in_order, Matrix, QuadExt};
use crate::sdp::SdpProblem;

/// `constant + Σ coefᵢ·varᵢ` over named variables. Terms keep the order of
/// the problem's variables and never carry a zero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Affine {
    pub constant: QuadExt,
    pub terms: Vec<(String, QuadExt)>,
}

impl Affine {
    pub fn constant(c: QuadExt) -> Self {
        Affine {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        Affine {
            constant: QuadExt::zero(),
            terms: vec![(name.to_string(), QuadExt::one())],
        }
    }

    pub fn coef(&self, name: &str) -> QuadExt {
        self.terms
            .iter()
            .find(|(n, _)| n == name)
            .map_or_else(QuadExt::zero, |(_, c)| c.clone())
    }

    pub fn eval(&self, values: &crate::sdp::Assignment<QuadExt>) -> Option<QuadExt> {
        let mut acc = self.constant.clone();
        for (n, c) in &self.terms {
            acc = &acc + &(c * values.get(n)?);
        }
        Some(acc)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: bool, c: &QuadExt, name: Option<&str>) -> fmt::Result {
    let text = c.to_string();
    let (neg, body) = match text.strip_prefix('-') {
        // A leading minus on a two-term value applies to its first term only.
        Some(rest) if c.is_rational() || c.a.is_zero() => (true, rest.to_string()),
        _ => (false, text.clone()),
    };
    let body = if c.is_rational() || c.a.is_zero() {
        body
    } else {
        format!("({text})")
    };
    match (first, neg) {
        (true, true) => write!(f, "-")?,
        (false, true) => write!(f, " - ")?,
        (false, false) => write!(f, " + ")?,
        (true, false) => {}
    }
    match name {
        Some(n) if body == "1" => write!(f, "{n}"),
        Some(n) => write!(f, "{body}*{n}"),
        None => write!(f, "{body}"),
    }
}

/// `1/6*mu + 1/3`, `a01 + 1/6*mu - 1/6`, `0`.
impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.terms {
            write_term(f, first, c, Some(n))?;
            first = false;
        }
        if !self.constant.is_zero() || first {
            write_term(f, first, &self.constant, None)?;
        }
        Ok(())
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `var = expr`, where `expr` mentions only variables that stay in the
/// problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub var: String,
    pub expr: Affine,
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.var, self.expr)
    }
}

/// Linear relations implied by a set of null vectors, in reduced row echelon
/// form (each `equations[k]` reads `Σ terms + constant = 0` with a unit
/// coefficient on `eliminated[k].var`).
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct ImplicitConstraintSet {
    pub equations: Vec<Affine>,
    pub eliminated: Vec<Substitution>,
}

impl ImplicitConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.eliminated.is_empty()
    }

    pub fn get(&self, var: &str) -> Option<&Affine> {
        self.eliminated.iter().find(|s| s.var == var).map(|s| &s.expr)
    }
}

/// Stacks `(C v)ⱼ + Σᵢ yᵢ (Γᵢ v)ⱼ = 0` over every vector and row and reduces
/// the system exactly. Variables without objective weight are eliminated
/// first, later variables before earlier ones; objective variables are
/// eliminated only when nothing else is solvable.
pub fn derive_implicit_constraints(
    prob: &SdpProblem<QuadExt>,
    vectors: &[Vec<QuadExt>],
) -> Result<ImplicitConstraintSet, FacialError> {
    let n = prob.dim();
    let m = prob.num_vars();
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(FacialError::InvalidProblem(format!(
            "vector of length {} for a {n}x{n} pencil",
            v.len()
        )));
    }
    let images: Vec<Vec<Vec<QuadExt>>> = vectors
        .iter()
        .map(|v| {
            let mut cols: Vec<Vec<QuadExt>> =
                prob.pencil.terms.iter().map(|t| t.matrix.mul_vec(v)).collect();
            cols.push(prob.pencil.constant.mul_vec(v));
            cols
        })
        .collect();
    let mut rows = Vec::new();
    for cols in &images {
        for j in 0..n {
            let row: Vec<QuadExt> = cols.iter().map(|c| c[j].clone()).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Ok(ImplicitConstraintSet::default());
    }
    let mut sys = Matrix::from_rows(rows).expect("rows share the column count");

    let is_objective = |i: usize| !prob.objective[i].is_zero();
    let mut order: Vec<usize> = (0..m).rev().filter(|&i| !is_objective(i)).collect();
    order.extend((0..m).rev().filter(|&i| is_objective(i)));
    order.push(m);
    let pivots = rref_in_order(&mut sys, &order);
    if pivots.contains(&m) {
        return Err(FacialError::Inconsistent(
            "the null vectors force 0 = 1; the problem has no feasible point".into(),
        ));
    }

    let names = prob.var_names();
    let mut pairs: Vec<(usize, Affine, Substitution)> = pivots
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            let row = sys.row(r);
            let terms = |sign: bool| -> Vec<(String, QuadExt)> {
                (0..m)
                    .filter(|&c| (c != p || !sign) && !row[c].is_zero())
                    .map(|c| {
                        let v = if sign { -row[c].clone() } else { row[c].clone() };
                        (names[c].to_string(), v)
                    })
                    .collect()
            };
            let equation = Affine {
                constant: row[m].clone(),
                terms: terms(false),
            };
            let expr = Affine {
                constant: -row[m].clone(),
                terms: terms(true),
            };
            let sub = Substitution {
                var: names[p].to_string(),
                expr,
            };
            (p, equation, sub)
        })
        .collect();
    pairs.sort_by_key(|(p, _, _)| *p);
    let (equations, eliminated) = pairs.into_iter().map(|(_, e, s)| (e, s)).unzip();
    Ok(ImplicitConstraintSet {
        equations,
        eliminated,
    })
}

/// Substitutes each eliminated variable, in order, into the pencil and the
/// objective. Later substitutions may mention variables eliminated after
/// them; an expression naming an already removed variable is rejected.
pub fn apply_constraints(
    prob: &SdpProblem<QuadExt>,
    cons: &ImplicitConstraintSet,
) -> Result<SdpProblem<QuadExt>, FacialError> {
    let mut out = prob.clone();
    for sub in &cons.eliminated {
        let k = out
            .pencil
            .index_of(&sub.var)
            .ok_or_else(|| FacialError::UnknownVariable(sub.var.clone()))?;
        for (name, _) in &sub.expr.terms {
            if name == &sub.var || out.pencil.index_of(name).is_none() {
                return Err(FacialError::UnknownVariable(name.clone()));
            }
        }
        let term = out.pencil.terms.remove(k);
        let b = out.objective.remove(k);
        out.pencil.constant.add_scaled(&sub.expr.constant, &term.matrix);
        out.offset = &out.offset + &(&b * &sub.expr.constant);
        for (name, c) in &sub.expr.terms {
            let i = out.pencil.index_of(name).expect("checked above");
            out.pencil.terms[i].matrix.add_scaled(c, &term.matrix);
            out.objective[i] = &out.objective[i] + &(&b * c);
        }
    }
    Ok(out)
}
