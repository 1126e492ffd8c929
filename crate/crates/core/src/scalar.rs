//! Exact rational scalars.
//!
//! Every coefficient in the crate is a `BigRational`: arbitrary-precision,
//! always in lowest terms with positive denominator, no rounding anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

/// Integer scalar.
pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational scalar `p/q`. Panics on `q == 0`.
pub fn frac(p: i64, q: i64) -> Scalar {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_scalar(s: &Scalar) -> String {
    if s.denom().is_one() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Parses `p` or `p/q` with optional sign.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::parse(format!("bad numerator in scalar `{text}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::parse(format!("bad denominator in scalar `{text}`")))?;
    if d.is_zero() {
        return Err(Error::parse(format!("zero denominator in scalar `{text}`")));
    }
    Ok(BigRational::new(n, d))
}

/// 1/n!
pub fn inv_factorial(n: u32) -> Scalar {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k);
    }
    BigRational::new(BigInt::one(), f)
}

pub fn is_nonnegative(s: &Scalar) -> bool {
    !s.is_negative()
}
