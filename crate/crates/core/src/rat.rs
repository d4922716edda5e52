//! Exact rational scalars and the small amount of vector plumbing built on them.
//!
//! Every quantity that reaches a certificate goes through [`Rat`]; there is no
//! floating point anywhere in the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rat = BigRational;
pub type RatVec = Vec<Rat>;
pub type RatMat = Vec<RatVec>;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn ints(vals: &[i64]) -> RatVec {
    vals.iter().map(|&v| int(v)).collect()
}

pub fn zeros(len: usize) -> RatVec {
    vec![Rat::zero(); len]
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Denominators must be nonzero.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add_into(acc: &mut [Rat], v: &[Rat]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Rat, v: &[Rat]) -> RatVec {
    v.iter().map(|x| c * x).collect()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

pub fn is_nonnegative(v: &[Rat]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

/// Componentwise `a <= b`.
pub fn leq(a: &[Rat], b: &[Rat]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn to_i64(r: &Rat) -> Option<i64> {
    if !is_integer(r) {
        return None;
    }
    i64::try_from(r.numer()).ok()
}

pub fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}
