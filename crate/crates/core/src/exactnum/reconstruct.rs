//! Recovering exact values from floating-point solver output.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{QuadExt, Rational};

/// Acceptance tolerance for reconstructed values.
pub const RECONSTRUCT_TOL: f64 = 1e-6;
/// Default bound on denominators.
pub const DEFAULT_MAX_DEN: u64 = 1_000_000;
/// Largest height of the √5 coefficient tried by [`reconstruct_quadext`].
const QUAD_SEARCH_HEIGHT: u64 = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error("input {0} is not finite")]
    NonFinite(f64),
    #[error("max_den must be at least 1")]
    InvalidMaxDen,
    #[error("no candidate within {tol:e} of {x}")]
    NoMatch { x: f64, tol: f64 },
}

/// Best continued-fraction convergent of `x` with denominator at most
/// `max_den`, accepted only if it lies within [`RECONSTRUCT_TOL`] of `x`.
pub fn reconstruct_rational(x: f64, max_den: u64) -> Result<Rational, ReconstructError> {
    reconstruct_rational_tol(x, max_den, RECONSTRUCT_TOL)
}

pub fn reconstruct_rational_tol(
    x: f64,
    max_den: u64,
    tol: f64,
) -> Result<Rational, ReconstructError> {
    if !x.is_finite() {
        return Err(ReconstructError::NonFinite(x));
    }
    if max_den == 0 {
        return Err(ReconstructError::InvalidMaxDen);
    }
    let best = last_convergent(&Rational::from_f64(x).unwrap(), &BigInt::from(max_den));
    if (best.to_f64() - x).abs() <= tol {
        Ok(best)
    } else {
        Err(ReconstructError::NoMatch { x, tol })
    }
}

/// Runs the continued-fraction expansion of the exact value `r` and returns
/// the last convergent whose denominator does not exceed `max_den`.
fn last_convergent(r: &Rational, max_den: &BigInt) -> Rational {
    // h_{-1}/k_{-1} = 1/0, h_{-2}/k_{-2} = 0/1
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rem = r.clone();
    let mut best = Rational::from_bigint(r.floor());
    loop {
        let a = rem.floor();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        if &k_next > max_den {
            break;
        }
        best = Rational::new(h_next.clone(), k_next.clone());
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let frac = &rem - &Rational::from_bigint(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
    }
    best
}

/// Finds `a + b·√5` of small height within [`RECONSTRUCT_TOL`] of `x`.
///
/// Candidate coefficients `b` are enumerated in order of increasing height
/// (capped by `max_den` and an internal search limit); for each one, `a` is
/// recovered from the convergents of `x − b·√5`. The candidate of smallest
/// [`QuadExt::height`] wins; ties go to the first found.
pub fn reconstruct_quadext(x: f64, max_den: u64) -> Result<QuadExt, ReconstructError> {
    if !x.is_finite() {
        return Err(ReconstructError::NonFinite(x));
    }
    if max_den == 0 {
        return Err(ReconstructError::InvalidMaxDen);
    }
    let s5 = 5f64.sqrt();
    let limit = max_den.min(QUAD_SEARCH_HEIGHT);
    // (height, a = h/k, b = p/q)
    type Best = Option<(i128, (i64, i64), (i64, i64))>;
    let mut best: Best = None;

    let try_b = |best: &mut Best, p: i64, q: i64| {
        let rest = x - (p as f64 / q as f64) * s5;
        let Some((h, k)) = float_convergent(rest, max_den) else {
            return;
        };
        let value = h as f64 / k as f64 + (p as f64 / q as f64) * s5;
        if (value - x).abs() > RECONSTRUCT_TOL {
            return;
        }
        let l = i128::from(num_integer::lcm(k, q));
        let height = (i128::from(h).abs() * (l / i128::from(k)))
            .max(i128::from(p).abs() * (l / i128::from(q)))
            .max(l);
        if best.is_none_or(|(bh, _, _)| height < bh) {
            *best = Some((height, (h, k), (p, q)));
        }
    };

    try_b(&mut best, 0, 1);
    for height in 1..=limit {
        if best.is_some_and(|(bh, _, _)| i128::from(height) >= bh) {
            break;
        }
        // All reduced p/q with max(|p|, q) == height.
        for q in 1..=height {
            for p in 1..=height {
                if p.max(q) != height || num_integer::gcd(p, q) != 1 {
                    continue;
                }
                try_b(&mut best, p as i64, q as i64);
                try_b(&mut best, -(p as i64), q as i64);
            }
        }
    }
    best.map(|(_, (h, k), (p, q))| QuadExt::new(Rational::new(h, k), Rational::new(p, q)))
        .ok_or(ReconstructError::NoMatch { x, tol: RECONSTRUCT_TOL })
}

/// Last continued-fraction convergent `h/k` of `y` with `k ≤ max_den`, in
/// integer arithmetic on the float expansion; `None` when it misses `y` by
/// more than [`RECONSTRUCT_TOL`] or overflows.
fn float_convergent(y: f64, max_den: u64) -> Option<(i64, i64)> {
    const LIMIT: f64 = 9.0e15;
    let (mut h_prev, mut h) = (0i64, 1i64);
    let (mut k_prev, mut k) = (1i64, 0i64);
    let mut rem = y;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > LIMIT {
            break;
        }
        let a = a as i64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next as u64 > max_den || k_next <= 0 {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        let frac = rem - rem.floor();
        if frac <= 0.0 || (h as f64 / k as f64 - y).abs() == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    (k > 0 && (h as f64 / k as f64 - y).abs() <= RECONSTRUCT_TOL).then_some((h, k))
}

/// Height of a rational: `max(|p|, q)`.
pub fn rational_height(r: &Rational) -> BigInt {
    r.numer().abs().max(r.denom().clone())
}
