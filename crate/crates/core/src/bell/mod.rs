//! Two-party, two-setting, two-outcome behaviours and their moment-matrix
//! SDPs.

mod moment;

use std::fmt;

use serde::Serialize;

use crate::exactnum::{qsign, QuadExt};

pub use moment::{
    almost_quantum_pencil, chsh_toy_pencil, moment_matrix_labels, MomentLabel,
    AQ_BASIS, LEVEL1_BASIS, MU,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BellError {
    #[error("parameter {0} outside [0, 1]")]
    ParameterOutOfRange(QuadExt),
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// Behaviour in Collins-Gisin form:
///
/// ```text
///     1        p_B(0)   p_B(1)
///     p_A(0)   p(0,0)   p(0,1)
///     p_A(1)   p(1,0)   p(1,1)
/// ```
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollinsGisinTable {
    #[serde(with = "table_serde")]
    pub entries: [[QuadExt; 3]; 3],
}

mod table_serde {
    use super::QuadExt;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(t: &[[QuadExt; 3]; 3], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = t
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }
}

impl CollinsGisinTable {
    pub fn new(entries: [[QuadExt; 3]; 3]) -> Result<Self, BellError> {
        let t = CollinsGisinTable { entries };
        t.validate()?;
        Ok(t)
    }

    pub fn p_a(&self, x: usize) -> &QuadExt {
        &self.entries[1 + x][0]
    }

    pub fn p_b(&self, y: usize) -> &QuadExt {
        &self.entries[0][1 + y]
    }

    /// Probability that both parties output 0 for settings `x`, `y`.
    pub fn p(&self, x: usize, y: usize) -> &QuadExt {
        &self.entries[1 + x][1 + y]
    }

    /// Full distribution `p(a, b | x, y)` indexed `[x][y][a][b]`.
    pub fn full_distribution(&self) -> [[[[QuadExt; 2]; 2]; 2]; 2] {
        let one = QuadExt::one();
        std::array::from_fn(|x| {
            std::array::from_fn(|y| {
                let p00 = self.p(x, y).clone();
                let p01 = self.p_a(x) - &p00;
                let p10 = self.p_b(y) - &p00;
                let p11 = &(&(&one - self.p_a(x)) - self.p_b(y)) + &p00;
                [[p00, p01], [p10, p11]]
            })
        })
    }

    /// Checks the unit corner, that every entry lies in [0, 1] and that the
    /// implied full distribution is nonnegative.
    pub fn validate(&self) -> Result<(), BellError> {
        if self.entries[0][0] != QuadExt::one() {
            return Err(BellError::InvalidTable("entry (0,0) must be 1".into()));
        }
        let one = QuadExt::one();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if qsign(v) < 0 || qsign(&(&one - v)) < 0 {
                    return Err(BellError::InvalidTable(format!(
                        "entry ({i},{j}) = {v} outside [0, 1]"
                    )));
                }
            }
        }
        for (x, by_y) in self.full_distribution().iter().enumerate() {
            for (y, by_a) in by_y.iter().enumerate() {
                for (a, by_b) in by_a.iter().enumerate() {
                    for (b, v) in by_b.iter().enumerate() {
                        if qsign(v) < 0 {
                            return Err(BellError::InvalidTable(format!(
                                "p({a},{b}|{x},{y}) = {v} is negative"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn combine(&self, other: &Self, s: &QuadExt) -> Self {
        // s·self + (1 − s)·other
        let t = &QuadExt::one() - s;
        CollinsGisinTable {
            entries: std::array::from_fn(|i| {
                std::array::from_fn(|j| &(s * &self.entries[i][j]) + &(&t * &other.entries[i][j]))
            }),
        }
    }
}

impl fmt::Display for CollinsGisinTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

/// The built-in behaviours: the PR box `P`, the local points `L` and `H`,
/// and the constant `α = (9 − √5)/38` appearing in `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltinPoints {
    pub p: CollinsGisinTable,
    pub l: CollinsGisinTable,
    pub h: CollinsGisinTable,
    pub alpha: QuadExt,
}

pub fn alpha() -> QuadExt {
    QuadExt::new(
        crate::exactnum::Rational::new(9, 38),
        crate::exactnum::Rational::new(-1, 38),
    )
}

pub fn builtin_points() -> BuiltinPoints {
    let r = QuadExt::ratio;
    let a = alpha();
    let a2 = &a + &a;
    let z = QuadExt::zero();
    let table = |e| CollinsGisinTable::new(e).expect("built-in table is valid");
    BuiltinPoints {
        p: table([
            [r(1, 1), r(1, 2), r(1, 2)],
            [r(1, 2), r(1, 2), r(1, 2)],
            [r(1, 2), r(1, 2), z.clone()],
        ]),
        l: table([
            [r(1, 1), r(1, 2), r(1, 2)],
            [r(1, 2), r(1, 3), r(1, 3)],
            [r(2, 3), r(1, 2), r(1, 6)],
        ]),
        h: table([
            [r(1, 1), a.clone(), a2.clone()],
            [a.clone(), z.clone(), a.clone()],
            [a2, a.clone(), z],
        ]),
        alpha: a,
    }
}

/// `l(μ) = μ·P + (1 − μ)·Q` for `μ ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorLine {
    pub name: String,
    pub endpoint_p: CollinsGisinTable,
    pub endpoint_q: CollinsGisinTable,
}

impl BehaviorLine {
    pub fn new(name: impl Into<String>, p: CollinsGisinTable, q: CollinsGisinTable) -> Self {
        BehaviorLine {
            name: name.into(),
            endpoint_p: p,
            endpoint_q: q,
        }
    }

    /// The line from `L` to the PR box.
    pub fn l1() -> Self {
        let b = builtin_points();
        BehaviorLine::new("l1", b.p, b.l)
    }

    /// The line from `H` to the PR box.
    pub fn l2() -> Self {
        let b = builtin_points();
        BehaviorLine::new("l2", b.p, b.h)
    }

    pub fn at(&self, mu: &QuadExt) -> Result<CollinsGisinTable, BellError> {
        line_behavior(self, mu)
    }

    /// Entry `(i, j)` of `l(μ)` as `(constant, coefficient of μ)`.
    pub fn affine_entry(&self, i: usize, j: usize) -> (QuadExt, QuadExt) {
        let q = &self.endpoint_q.entries[i][j];
        (q.clone(), &self.endpoint_p.entries[i][j] - q)
    }
}

/// Exact point of the line; errors outside `[0, 1]`.
pub fn line_behavior(line: &BehaviorLine, mu: &QuadExt) -> Result<CollinsGisinTable, BellError> {
    if qsign(mu) < 0 || qsign(&(&QuadExt::one() - mu)) < 0 {
        return Err(BellError::ParameterOutOfRange(mu.clone()));
    }
    Ok(line.endpoint_p.combine(&line.endpoint_q, mu))
}

#[cfg(test)]
mod tests;
