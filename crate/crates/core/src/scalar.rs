//! Coefficient rings for sparse exterior forms.
//!
//! The default ring is [`Rat`], an arbitrary-precision rational: every
//! arithmetic operation is exact and values stay in canonical reduced form.
//! Structure constants for L = 6 already overflow 128-bit integers, so there
//! is no fixed-width fast path. `f64` implements the same interface for the
//! large stretch configurations and is tagged inexact; nothing in the exact
//! pipelines accepts it silently.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

/// Exact scalar: arbitrary-precision rational in reduced form.
pub type Rat = BigRational;

/// Ring of coefficients a sparse form can carry.
///
/// Implementations must be exact (`EXACT = true`) unless the whole pipeline
/// is explicitly running in float mode. All operations are pure; addition and
/// multiplication must be associative and commutative so parallel reductions
/// are order-independent (bit-identical for exact rings).
pub trait Ring: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    /// False for float-backed rings; reports and caches carry the tag.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn sub_assign_ref(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg(self) -> Self;
    /// Embed an exact rational into the ring.
    fn from_rat(r: &Rat) -> Self;

    fn scale_rat(&self, r: &Rat) -> Self {
        self.mul_ref(&Self::from_rat(r))
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Ring for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn is_zero(&self) -> bool {
        <Rat as Zero>::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

impl Ring for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().expect("rational out of f64 range")
    }
}

/// Exact rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact rational `p / q`, `q != 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    assert!(q != 0, "zero denominator");
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Binomial coefficient `C(n, k)` as a big integer (0 for k < 0 or k > n).
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    let mut out = BigInt::one();
    for i in 2..=n as i64 {
        out *= i;
    }
    out
}

/// Parse a rational from `"p"` or `"p/q"` decimal notation.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}

/// Render a rational as `"p"` or `"p/q"`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nonzero random rational with small numerator and denominator, for
/// seeded generic-position moment backgrounds.
pub fn random_nonzero_rat<R: Rng>(rng: &mut R) -> Rat {
    let numer = loop {
        let n = rng.random_range(-9i64..=9);
        if n != 0 {
            break n;
        }
    };
    let denom = rng.random_range(1i64..=4);
    ratio(numer, denom)
}

/// True if the rational is a (possibly negative) integer.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Signed decimal digest-friendly rendering of a big integer.
pub fn bigint_to_string(n: &BigInt) -> String {
    n.to_string()
}

/// Magnitude heuristic used by float conversions in reports.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back on sign * inf for values beyond f64 range.
        match r.numer().sign() {
            Sign::Minus => f64::NEG_INFINITY,
            Sign::NoSign => 0.0,
            Sign::Plus => f64::INFINITY,
        }
    })
}
