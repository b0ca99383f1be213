use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::linalg;

/// Number backend for probability computations.
///
/// Two implementations exist: [`BigRational`] (exact, no rounding ever) and
/// [`f64`] (IEEE double). Verification paths require the exact backend;
/// table sweeps normally use doubles. The backend is chosen per computation
/// through the type parameter.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Human-readable backend name, used in reports and table output.
    const NAME: &'static str;

    fn from_u64(v: u64) -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;

    /// num/den as a scalar; `den` must be nonzero.
    fn ratio(num: i64, den: u64) -> Self;

    /// Nearest double, for reporting.
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    fn is_positive(&self) -> bool;

    /// False only for float non-finites; rationals are always finite.
    fn is_finite(&self) -> bool;

    /// Parse from text. The exact backend parses `p/q`, integers, decimals
    /// and scientific notation without rounding; the float backend defers to
    /// `f64::from_str`.
    fn parse(text: &str) -> Result<Self>;

    /// Solve the square system `matrix * x = rhs`.
    ///
    /// Fraction-free Bareiss elimination under the exact backend, Gaussian
    /// elimination with partial pivoting under the float backend.
    fn solve_dense(matrix: Vec<Vec<Self>>, rhs: Vec<Self>) -> Result<Vec<Self>>;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn parse(text: &str) -> Result<Self> {
        // Accept p/q fractions here too so run files work on both backends.
        if let Some((num, den)) = text.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|e| Error::Parameter(format!("bad number {text:?}: {e}")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|e| Error::Parameter(format!("bad number {text:?}: {e}")))?;
            if den == 0.0 {
                return Err(Error::Parameter(format!("zero denominator in {text:?}")));
            }
            return Ok(num / den);
        }
        f64::from_str(text.trim()).map_err(|e| Error::Parameter(format!("bad number {text:?}: {e}")))
    }

    fn solve_dense(matrix: Vec<Vec<Self>>, rhs: Vec<Self>) -> Result<Vec<Self>> {
        linalg::solve_float(matrix, rhs)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back through a scaled quotient when numer/denom overflow f64.
            let scaled = (self * BigInt::from(1u64 << 60)).to_integer();
            scaled.to_f64().unwrap_or(f64::NAN) / (1u64 << 60) as f64
        })
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn parse(text: &str) -> Result<Self> {
        parse_exact(text)
    }

    fn solve_dense(matrix: Vec<Vec<Self>>, rhs: Vec<Self>) -> Result<Vec<Self>> {
        linalg::solve_bareiss(matrix, rhs)
    }
}

/// Parse `p/q`, integers, decimals (`0.25`) and scientific notation
/// (`1e6`, `2.5e-3`) into an exact rational.
fn parse_exact(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = |why: &str| Error::Parameter(format!("bad number {text:?}: {why}"));
    if text.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad("bad numerator"))?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, i64::from_str(e).map_err(|_| bad("bad exponent"))?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad("no digits"));
    }
    let value = BigInt::from_str(&digits).map_err(|_| bad("bad mantissa"))?;
    let shift = exponent - frac_part.len() as i64;
    let scale = BigInt::from(10u32).pow(shift.unsigned_abs() as u32);
    Ok(if shift >= 0 {
        BigRational::from_integer(value * scale)
    } else {
        BigRational::new(value, scale)
    })
}

/// Runtime tag for choosing a [`Scalar`] backend at a CLI or table boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Rational,
    #[default]
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Rational => BigRational::NAME,
            Backend::Float => f64::NAME,
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Backend::Rational),
            "float" => Ok(Backend::Float),
            other => Err(Error::Parameter(format!(
                "unknown backend {other:?}; expected rational or float"
            ))),
        }
    }
}
