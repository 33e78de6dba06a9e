//! Exact scalars: arbitrary-precision rationals and the quadratic field Q(sqrt 3).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Reduced fraction with positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("double factorial undefined for {0}")]
    DoubleFactorialDomain(i64),
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// Binary operation selector for [`rat_arith`] and [`quad_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_rational(s: &str) -> Result<Rational, CoeffError> {
    Rational::from_str(s.trim()).map_err(|_| CoeffError::Parse(s.to_string()))
}

pub fn rat_arith(a: &Rational, b: &Rational, op: ArithOp) -> Result<Rational, CoeffError> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => {
            if b.is_zero() {
                return Err(CoeffError::DivisionByZero);
            }
            a / b
        }
    })
}

/// `n!!` with the conventions `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> Result<Rational, CoeffError> {
    if n < -1 {
        return Err(CoeffError::DoubleFactorialDomain(n));
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(Rational::from_integer(acc))
}

pub fn factorial(n: u64) -> Rational {
    Rational::from_integer((1..=n).fold(BigInt::one(), |acc, k| acc * k))
}

/// Generalized binomial coefficient `top (top-1) ... (top-k+1) / k!`.
pub fn gen_binomial(top: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= top - int(i as i64);
        acc /= int(i as i64 + 1);
    }
    acc
}

pub fn binomial(n: i64, k: i64) -> Rational {
    if k < 0 || n < 0 || k > n {
        return Rational::zero();
    }
    gen_binomial(&int(n), k as u32)
}

/// Integer power; negative exponents of zero panic.
pub fn pow_rational(base: &Rational, exp: i32) -> Rational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// Element `rat + irr * sqrt(3)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub rat: Rational,
    pub irr: Rational,
}

impl QuadExt {
    pub fn new(rat: Rational, irr: Rational) -> Self {
        Self { rat, irr }
    }

    pub fn sqrt3() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.rat.clone(), -self.irr.clone())
    }

    /// `a^2 - 3 b^2`.
    pub fn norm(&self) -> Rational {
        &self.rat * &self.rat - int(3) * &self.irr * &self.irr
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn checked_inv(&self) -> Result<Self, CoeffError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(Self::new(&self.rat / &n, -&self.irr / &n))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, CoeffError> {
        Ok(self.clone() * other.checked_inv()?)
    }
}

impl From<Rational> for QuadExt {
    fn from(r: Rational) -> Self {
        Self::new(r, Rational::zero())
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, o: QuadExt) -> QuadExt {
        QuadExt::new(self.rat + o.rat, self.irr + o.irr)
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, o: QuadExt) -> QuadExt {
        QuadExt::new(self.rat - o.rat, self.irr - o.irr)
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, o: QuadExt) -> QuadExt {
        let rat = &self.rat * &o.rat + int(3) * &self.irr * &o.irr;
        let irr = &self.rat * &o.irr + &self.irr * &o.rat;
        QuadExt::new(rat, irr)
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.rat, -self.irr)
    }
}

impl Zero for QuadExt {
    fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }
}

impl One for QuadExt {
    fn one() -> Self {
        Self::new(Rational::one(), Rational::zero())
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt3", self.rat, self.irr)
    }
}

impl FromStr for QuadExt {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CoeffError::Parse(s.to_string());
        let (a, b) = s.split_once(" + ").ok_or_else(err)?;
        let b = b.strip_suffix("*sqrt3").ok_or_else(err)?;
        Ok(Self::new(parse_rational(a)?, parse_rational(b)?))
    }
}

pub fn quad_arith(a: &QuadExt, b: &QuadExt, op: ArithOp) -> Result<QuadExt, CoeffError> {
    Ok(match op {
        ArithOp::Add => a.clone() + b.clone(),
        ArithOp::Sub => a.clone() - b.clone(),
        ArithOp::Mul => a.clone() * b.clone(),
        ArithOp::Div => a.checked_div(b)?,
    })
}

/// Coefficient fields usable by the series module.
pub trait Field:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn checked_inv(&self) -> Result<Self, CoeffError>;
    fn from_rational(r: Rational) -> Self;
    fn to_json(&self) -> serde_json::Value;
}

impl Field for Rational {
    fn checked_inv(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            Err(CoeffError::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }

    fn from_rational(r: Rational) -> Self {
        r
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl Field for QuadExt {
    fn checked_inv(&self) -> Result<Self, CoeffError> {
        QuadExt::checked_inv(self)
    }

    fn from_rational(r: Rational) -> Self {
        QuadExt::from(r)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "rat": self.rat.to_string(), "irr": self.irr.to_string() })
    }
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> QuadExt {
        QuadExt::new(rat(a, b), rat(c, d))
    }

    #[test]
    fn rational_examples() {
        assert_eq!(rat_arith(&rat(1, 2), &rat(1, 3), ArithOp::Add).unwrap(), rat(5, 6));
        assert_eq!(rat_arith(&int(7), &int(7), ArithOp::Div).unwrap(), int(1));
        assert_eq!(rat_arith(&int(60), &int(72), ArithOp::Div).unwrap(), rat(5, 6));
        assert_eq!(
            rat_arith(&int(1), &int(0), ArithOp::Div),
            Err(CoeffError::DivisionByZero)
        );
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(rat(-6, 4).to_string(), "-3/2");
        assert_eq!(parse_rational("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("10/4").unwrap(), rat(5, 2));
        assert!(parse_rational("1/0").is_err() || parse_rational("abc").is_err());
    }

    #[test]
    fn quad_examples() {
        let s = QuadExt::sqrt3();
        assert_eq!(quad_arith(&s, &s, ArithOp::Mul).unwrap(), QuadExt::from(int(3)));
        // 2/sqrt3 = (2/3) sqrt3
        let two_over = q(0, 1, 2, 3);
        assert_eq!(quad_arith(&two_over, &s, ArithOp::Mul).unwrap(), QuadExt::from(int(2)));
        assert_eq!(
            quad_arith(&q(1, 1, 1, 1), &q(1, 1, -1, 1), ArithOp::Mul).unwrap(),
            QuadExt::from(int(-2))
        );
        assert_eq!(
            quad_arith(&s, &QuadExt::zero(), ArithOp::Div),
            Err(CoeffError::DivisionByZero)
        );
        assert_eq!(QuadExt::from(int(2)).checked_div(&s).unwrap(), two_over);
    }

    #[test]
    fn quad_text() {
        let x = q(1, 2, -2, 3);
        assert_eq!(x.to_string(), "1/2 + -2/3*sqrt3");
        assert_eq!(x.to_string().parse::<QuadExt>().unwrap(), x);
    }

    #[test]
    fn double_factorial_examples() {
        assert_eq!(double_factorial(5).unwrap(), int(15));
        assert_eq!(double_factorial(-1).unwrap(), int(1));
        assert_eq!(double_factorial(0).unwrap(), int(1));
        assert_eq!(double_factorial(11).unwrap(), int(10395));
        assert!(double_factorial(-3).is_err());
    }

    /// Perfect matchings of 12 labelled points, counted by recursion on the first point.
    fn matchings(n: u64) -> u64 {
        if n == 0 {
            1
        } else {
            (n - 1) * matchings(n - 2)
        }
    }

    #[test]
    fn double_factorial_counts_matchings() {
        assert_eq!(double_factorial(11).unwrap(), int(matchings(12) as i64));
    }

    #[test]
    fn double_factorial_identity() {
        for m in 0..=20u64 {
            let lhs = double_factorial(2 * m as i64 - 1).unwrap()
                * pow_rational(&int(2), m as i32)
                * factorial(m);
            assert_eq!(lhs, factorial(2 * m));
        }
    }

    #[test]
    fn gen_binomial_examples() {
        assert_eq!(gen_binomial(&int(3), 2), int(3));
        assert_eq!(gen_binomial(&rat(3, 2), 2), rat(3, 8));
        assert_eq!(gen_binomial(&rat(-1, 2), 3), rat(-5, 16));
        assert_eq!(gen_binomial(&rat(7, 3), 0), int(1));
    }

    #[test]
    fn gen_binomial_matches_series_of_inverse_sqrt() {
        // (1+x)^(-1/2): c_0 = 1, c_{k+1} = c_k * (-(2k+1)) / (2k+2)
        let mut c = int(1);
        for k in 0..8u32 {
            assert_eq!(gen_binomial(&rat(-1, 2), k), c);
            c *= rat(-(2 * k as i64 + 1), 2 * k as i64 + 2);
        }
    }

    #[test]
    fn gen_binomial_integer_case() {
        for n in 0..15u64 {
            for k in 0..=n {
                let expected = factorial(n) / (factorial(k) * factorial(n - k));
                assert_eq!(gen_binomial(&int(n as i64), k as u32), expected);
            }
        }
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
    }

    fn small_quad() -> impl Strategy<Value = QuadExt> {
        (small_rat(), small_rat()).prop_map(|(a, b)| QuadExt::new(a, b))
    }

    proptest! {
        #[test]
        fn rational_field_axioms(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            if !a.is_zero() {
                prop_assert_eq!(&a * Field::checked_inv(&a).unwrap(), int(1));
            }
        }

        #[test]
        fn quad_field_axioms(a in small_quad(), b in small_quad(), c in small_quad()) {
            prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
            prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
            prop_assert_eq!(
                a.clone() * (b.clone() + c.clone()),
                a.clone() * b.clone() + a.clone() * c.clone()
            );
            if !a.is_zero() {
                prop_assert_eq!(a.clone() * a.checked_inv().unwrap(), QuadExt::one());
            }
        }

        #[test]
        fn quad_norm_multiplicative(a in small_quad(), b in small_quad()) {
            prop_assert_eq!((a.clone() * b.clone()).norm(), a.norm() * b.norm());
            prop_assert_eq!(a.clone() * a.conjugate(), QuadExt::from(a.norm()));
        }

        #[test]
        fn rational_embedding_is_homomorphism(a in small_rat(), b in small_rat()) {
            prop_assert_eq!(QuadExt::from(&a * &b), QuadExt::from(a.clone()) * QuadExt::from(b.clone()));
            prop_assert_eq!(QuadExt::from(&a + &b), QuadExt::from(a) + QuadExt::from(b));
        }
    }
}
