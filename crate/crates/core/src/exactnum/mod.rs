//! Exact arithmetic over ℚ and ℚ(√5) and the exact linear algebra used to
//! check certificates.

mod field;
mod matrix;
mod quad;
mod rational;
pub mod reconstruct;

pub use field::Field;
pub use matrix::{
    dot, is_positive_definite, kernel_basis_exact, outer, psd_check_exact, rank, row_space_basis,
    rref, rref_in_order, same_span, ExactMatrix, Matrix, PsdVerdict, PsdWitness,
};
pub use quad::{qsign, QuadExt};
pub use rational::Rational;
pub use reconstruct::{reconstruct_quadext, reconstruct_rational, ReconstructError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse {input:?}: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: String,
}

impl ParseScalarError {
    pub fn new(input: &str, reason: &str) -> Self {
        ParseScalarError {
            input: input.to_string(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExactError {
    #[error("matrix is not symmetric at ({row}, {col})")]
    NonSymmetric { row: usize, col: usize },
    #[error("shape error: {0}")]
    Shape(String),
}

/// Scales an exact vector to a primitive integer vector when all entries are
/// rational (gcd 1, first nonzero entry positive). Vectors with irrational
/// entries are scaled so that the first nonzero entry is 1 and then cleared
/// of common denominators in both coordinates.
pub fn primitive_vector(v: &[QuadExt]) -> Vec<QuadExt> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Zero};

    let Some(first) = v.iter().find(|x| !x.is_zero()) else {
        return v.to_vec();
    };
    let mut w: Vec<QuadExt> = if v.iter().all(QuadExt::is_rational) {
        v.to_vec()
    } else {
        v.iter().map(|x| x / first).collect()
    };
    let mut lcm = BigInt::one();
    for x in &w {
        lcm = lcm.lcm(x.a.denom()).lcm(x.b.denom());
    }
    let scale = QuadExt::from(Rational::from_bigint(lcm));
    w = w.iter().map(|x| x * &scale).collect();
    let mut g = BigInt::zero();
    for x in &w {
        g = g.gcd(x.a.numer()).gcd(x.b.numer());
    }
    let lead_negative = w.iter().find(|x| !x.is_zero()).is_some_and(|x| qsign(x) < 0);
    if lead_negative {
        g = -g;
    }
    let div = QuadExt::from(Rational::from_bigint(g));
    w.iter().map(|x| x / &div).collect()
}

/// Serde adapter: an exact scalar as its canonical string.
pub mod serde_scalar {
    use super::QuadExt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &QuadExt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<QuadExt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serde adapter: a vector of exact scalars as strings.
pub mod serde_vec {
    use super::QuadExt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[QuadExt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<QuadExt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse().map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter: an exact matrix as a list of rows of strings.
pub mod serde_matrix {
    use super::{ExactMatrix, QuadExt};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &ExactMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..m.rows())
            .map(|i| m.row(i).iter().map(ToString::to_string).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactMatrix, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        let rows: Result<Vec<Vec<QuadExt>>, _> = raw
            .iter()
            .map(|r| r.iter().map(|s| s.parse::<QuadExt>()).collect())
            .collect();
        ExactMatrix::from_rows(rows.map_err(D::Error::custom)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_scaling() {
        let v: Vec<QuadExt> = [-2, 0, 4, 6].iter().map(|&x| QuadExt::from(x)).collect();
        let p = primitive_vector(&v);
        let expect: Vec<QuadExt> = [1, 0, -2, -3].iter().map(|&x| QuadExt::from(x)).collect();
        assert_eq!(p, expect);
        let h = vec![QuadExt::ratio(1, 2), QuadExt::ratio(-1, 3)];
        assert_eq!(p_str(&primitive_vector(&h)), ["3", "-2"]);
    }

    fn p_str(v: &[QuadExt]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }
}
