use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use super::{ParseScalarError, Rational};

/// An element `a + b·√5` of ℚ(√5).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuadExt {
    pub a: Rational,
    pub b: Rational,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadExt { a, b }
    }

    pub fn zero() -> Self {
        QuadExt::default()
    }

    pub fn one() -> Self {
        QuadExt::from(Rational::one())
    }

    pub fn sqrt5() -> Self {
        QuadExt::new(Rational::zero(), Rational::one())
    }

    /// `p/q` embedded with zero irrational part.
    pub fn ratio(p: i64, q: i64) -> Self {
        QuadExt::from(Rational::new(p, q))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a − b·√5`.
    pub fn conj(&self) -> Self {
        QuadExt::new(self.a.clone(), -&self.b)
    }

    /// Field norm `a² − 5b²`.
    pub fn norm(&self) -> Rational {
        &(&self.a * &self.a) - &(&Rational::from_integer(5) * &(&self.b * &self.b))
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(QuadExt::new(&self.a / &n, -(&self.b / &n)))
    }

    pub fn abs(&self) -> Self {
        if qsign(self) < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest double. When the two terms have opposite signs the value is
    /// computed as `norm / conj` to avoid cancellation.
    pub fn to_f64(&self) -> f64 {
        let s5 = 5f64.sqrt();
        let (a, b) = (self.a.to_f64(), self.b.to_f64());
        if self.a.signum() * self.b.signum() < 0 {
            self.norm().to_f64() / (a - b * s5)
        } else {
            a + b * s5
        }
    }

    /// Height over a common denominator: writing the value as
    /// `(A + B·√5) / d` in lowest terms, the largest of `|A|`, `|B|` and `d`.
    pub fn height(&self) -> num_bigint::BigInt {
        use num_integer::Integer;
        use num_traits::Signed;
        let d = self.a.denom().lcm(self.b.denom());
        let big_a = self.a.numer() * (&d / self.a.denom());
        let big_b = self.b.numer() * (&d / self.b.denom());
        [big_a.abs(), big_b.abs(), d].into_iter().max().unwrap()
    }
}

/// Exact sign of `a + b·√5`.
///
/// When `a` and `b` have opposite signs the term with the larger square
/// (comparing `a²` with `5b²`) decides; they can never be equal unless both
/// vanish because √5 is irrational.
pub fn qsign(x: &QuadExt) -> i8 {
    let sa = x.a.signum();
    let sb = x.b.signum();
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    let a2 = &x.a * &x.a;
    let b2 = &(&x.b * &x.b) * &Rational::from_integer(5);
    match a2.cmp(&b2) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => unreachable!("a² = 5b² with a, b nonzero rationals"),
    }
}

impl From<Rational> for QuadExt {
    fn from(a: Rational) -> Self {
        QuadExt::new(a, Rational::zero())
    }
}

impl From<i64> for QuadExt {
    fn from(v: i64) -> Self {
        QuadExt::from(Rational::from_integer(v))
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        qsign(&(self - other)).cmp(&0)
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &'a QuadExt) -> QuadExt {
        QuadExt::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &'a QuadExt) -> QuadExt {
        QuadExt::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &'a QuadExt) -> QuadExt {
        if self.b.is_zero() && rhs.b.is_zero() {
            return QuadExt::from(&self.a * &rhs.a);
        }
        let five = Rational::from_integer(5);
        let a = &(&self.a * &rhs.a) + &(&five * &(&self.b * &rhs.b));
        let b = &(&self.a * &rhs.b) + &(&self.b * &rhs.a);
        QuadExt::new(a, b)
    }
}

impl<'a> Div<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn div(self, rhs: &'a QuadExt) -> QuadExt {
        if rhs.b.is_zero() {
            return QuadExt::new(&self.a / &rhs.a, &self.b / &rhs.a);
        }
        let inv = rhs.recip().expect("division by zero in Q(sqrt5)");
        self * &inv
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a, -self.b)
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-&self.a, -&self.b)
    }
}

/// `p/q+r/s*sqrt5`; either term may be omitted and signs are written inline,
/// e.g. `-11+5*sqrt5`, `9/38-1/38*sqrt5`, `-sqrt5`, `0`.
impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{}", self.a)?;
            if self.b.signum() > 0 {
                write!(f, "+")?;
            }
        }
        write!(f, "{}*sqrt5", self.b)
    }
}

impl FromStr for QuadExt {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(head) = s.strip_suffix("sqrt5") else {
            return Ok(QuadExt::from(s.parse::<Rational>()?));
        };
        let (head, starred) = match head.strip_suffix('*') {
            Some(h) => (h, true),
            None => (head, false),
        };
        // Split "a" from the signed coefficient of sqrt5 at the last sign that
        // is not the leading one.
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (a_part, b_part) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("", head),
        };
        let a = if a_part.is_empty() {
            Rational::zero()
        } else {
            a_part.parse::<Rational>()?
        };
        let b = match b_part {
            "" | "+" if !starred => Rational::one(),
            "-" if !starred => -Rational::one(),
            "" | "+" | "-" => return Err(ParseScalarError::new(s, "missing coefficient before '*sqrt5'")),
            t => t.parse::<Rational>()?,
        };
        Ok(QuadExt::new(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    #[test]
    fn sign_examples() {
        assert_eq!(qsign(&QuadExt::zero()), 0);
        assert_eq!(qsign(&q("-11+5*sqrt5")), 1);
        assert_eq!(qsign(&q("9/38-1/38*sqrt5")), 1);
        assert_eq!(qsign(&q("11-5*sqrt5")), -1);
        assert_eq!(qsign(&q("-sqrt5")), -1);
        assert_eq!(qsign(&q("3-sqrt5")), 1);
        assert_eq!(qsign(&q("2-sqrt5")), -1);
    }

    #[test]
    fn display_grammar() {
        for s in [
            "0",
            "-11+5*sqrt5",
            "9/38-1/38*sqrt5",
            "1/2*sqrt5",
            "-3*sqrt5",
            "7/3",
        ] {
            assert_eq!(q(s).to_string(), s);
        }
        assert_eq!(q("sqrt5"), QuadExt::sqrt5());
        assert_eq!(q("2-sqrt5").to_string(), "2-1*sqrt5");
        assert!("*sqrt5".parse::<QuadExt>().is_err());
        assert!("1+*sqrt5".parse::<QuadExt>().is_err());
        assert!("1 + sqrt5".parse::<QuadExt>().is_err());
    }

    #[test]
    fn inverse_and_float() {
        let x = q("-11+5*sqrt5");
        assert_eq!(&x * &x.recip().unwrap(), QuadExt::one());
        assert!((x.to_f64() - 0.180_339_887_498_948_5).abs() < 1e-15);
        let alpha = q("9/38-1/38*sqrt5");
        assert!((alpha.to_f64() - 0.177_998_211_118_426_6).abs() < 1e-15);
    }
}
