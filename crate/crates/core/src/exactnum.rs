//! Exact scalars: arbitrary-precision rationals and the quadratic field ℚ(√3).
//!
//! The optimal protocol parameters are irrational (`(3-√3)/2` and `√3-1`), so
//! every decision path in this crate runs over [`QuadraticScalar`] or
//! [`Rational`]. Floats only appear through [`Field::to_f64`] for reporting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
}

/// Ordered field operations shared by the exact scalars and `f64`.
pub trait Field:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(&rat(n, d))
    }
}

/// Marker for fields with exact, total comparisons. The simplex solver and all
/// protocol decisions require this.
pub trait ExactField: Field + Ord + Eq + std::hash::Hash {
    fn signum_i8(&self) -> i8 {
        match self.cmp(&Self::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Field for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl ExactField for Rational {}

impl Field for f64 {
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-0.125`.
pub fn parse_rational(text: &str) -> Result<Rational, ExactError> {
    let s = text.trim();
    let err = || ExactError::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(err());
        }
        let digits = format!("{int_digits}{frac_part}");
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| err())
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An element `a + b·√3` of ℚ(√3). The representation is unique.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuadraticScalar {
    a: Rational,
    b: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl QuadraticScalar {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Self { a, b: Rational::zero() }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn sqrt3() -> Self {
        Self { a: Rational::zero(), b: Rational::one() }
    }

    /// Rational part.
    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// Coefficient of √3.
    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn conjugate(&self) -> Self {
        Self { a: self.a.clone(), b: -self.b.clone() }
    }

    /// `a² - 3b²`, the field norm.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(3.into()) * &self.b * &self.b
    }

    /// Exact sign of `a + b√3`.
    pub fn sign(&self) -> i8 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with 3b².
        let n = sign_of(&self.norm());
        if sa > 0 {
            n
        } else {
            -n
        }
    }

    pub fn checked_recip(&self) -> Result<Self, ExactError> {
        let n = self.norm();
        if n.is_zero() {
            // a² = 3b² has only the trivial rational solution.
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self { a: &self.a / &n, b: -(&self.b / &n) })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ExactError> {
        Ok(self * &rhs.checked_recip()?)
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

fn sign_of(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Field operation with an explicit division-by-zero error.
pub fn q3_arith(
    x: &QuadraticScalar,
    y: &QuadraticScalar,
    op: ArithOp,
) -> Result<QuadraticScalar, ExactError> {
    Ok(match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x.checked_div(y)?,
    })
}

pub fn q3_sign(x: &QuadraticScalar) -> i8 {
    x.sign()
}

/// The optimal parameters `λ* = (3-√3)/2` and `w* = √3-1`.
pub fn canonical_params() -> (QuadraticScalar, QuadraticScalar) {
    let lambda = QuadraticScalar::new(rat(3, 2), rat(-1, 2));
    let w = QuadraticScalar::new(rat(-1, 1), rat(1, 1));
    (lambda, w)
}

impl Ord for QuadraticScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign().cmp(&0)
    }
}

impl PartialOrd for QuadraticScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a QuadraticScalar> for &'a QuadraticScalar {
    type Output = QuadraticScalar;
    fn add(self, rhs: &QuadraticScalar) -> QuadraticScalar {
        QuadraticScalar { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl<'a> Sub<&'a QuadraticScalar> for &'a QuadraticScalar {
    type Output = QuadraticScalar;
    fn sub(self, rhs: &QuadraticScalar) -> QuadraticScalar {
        QuadraticScalar { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl<'a> Mul<&'a QuadraticScalar> for &'a QuadraticScalar {
    type Output = QuadraticScalar;
    fn mul(self, rhs: &QuadraticScalar) -> QuadraticScalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return QuadraticScalar::rational(&self.a * &rhs.a);
        }
        let three = Rational::from_integer(3.into());
        QuadraticScalar {
            a: &self.a * &rhs.a + three * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl<'a> Div<&'a QuadraticScalar> for &'a QuadraticScalar {
    type Output = QuadraticScalar;
    fn div(self, rhs: &QuadraticScalar) -> QuadraticScalar {
        if rhs.b.is_zero() {
            assert!(!rhs.a.is_zero(), "division by zero");
            return QuadraticScalar { a: &self.a / &rhs.a, b: &self.b / &rhs.a };
        }
        self.checked_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for QuadraticScalar {
            type Output = QuadraticScalar;
            fn $method(self, rhs: QuadraticScalar) -> QuadraticScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadraticScalar> for QuadraticScalar {
            type Output = QuadraticScalar;
            fn $method(self, rhs: &QuadraticScalar) -> QuadraticScalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<QuadraticScalar> for &'a QuadraticScalar {
            type Output = QuadraticScalar;
            fn $method(self, rhs: QuadraticScalar) -> QuadraticScalar {
                self.$method(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for QuadraticScalar {
    type Output = QuadraticScalar;
    fn neg(self) -> QuadraticScalar {
        QuadraticScalar { a: -self.a, b: -self.b }
    }
}

impl Neg for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn neg(self) -> QuadraticScalar {
        QuadraticScalar { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl Zero for QuadraticScalar {
    fn zero() -> Self {
        Self::default()
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadraticScalar {
    fn one() -> Self {
        Self::int(1)
    }
}

impl From<Rational> for QuadraticScalar {
    fn from(a: Rational) -> Self {
        Self::rational(a)
    }
}

impl From<i64> for QuadraticScalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Field for QuadraticScalar {
    fn from_rational(r: &Rational) -> Self {
        Self::rational(r.clone())
    }

    fn to_f64(&self) -> f64 {
        Field::to_f64(&self.a) + Field::to_f64(&self.b) * 3f64.sqrt()
    }
}

impl ExactField for QuadraticScalar {}

impl fmt::Display for QuadraticScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        let surd = if self.b.is_one() {
            "√3".to_string()
        } else if (-&self.b).is_one() {
            "-√3".to_string()
        } else {
            format!("{}√3", format_rational(&self.b))
        };
        if self.a.is_zero() {
            f.write_str(&surd)
        } else if self.b.is_positive() {
            write!(f, "{}+{}", format_rational(&self.a), surd)
        } else {
            write!(f, "{}{}", format_rational(&self.a), surd)
        }
    }
}

const SURD_SPELLINGS: [&str; 4] = ["*sqrt(3)", "sqrt(3)", "√3", "sqrt3"];

impl FromStr for QuadraticScalar {
    type Err = ExactError;

    /// Accepts `p/q`, `p/q+r/s√3`, `√3`, `-1/2√3` and the ASCII spelling
    /// `sqrt3` / `sqrt(3)` in place of `√3`.
    fn from_str(text: &str) -> Result<Self, ExactError> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ExactError::Parse(text.to_string()));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, c) in s.char_indices() {
            if i > 0 && (c == '+' || c == '-') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);

        let mut out = QuadraticScalar::zero();
        for term in terms {
            let surd = SURD_SPELLINGS.iter().find_map(|sp| term.strip_suffix(sp));
            match surd {
                Some(coef) => {
                    let coef = match coef.trim_end_matches('*') {
                        "" | "+" => Rational::one(),
                        "-" => -Rational::one(),
                        c => parse_rational(c).map_err(|_| ExactError::Parse(text.to_string()))?,
                    };
                    out.b += coef;
                }
                None => {
                    out.a += parse_rational(term).map_err(|_| ExactError::Parse(text.to_string()))?;
                }
            }
        }
        Ok(out)
    }
}
