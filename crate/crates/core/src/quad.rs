//! Exact arithmetic in the quadratic field Q(1/sqrt(m)).
//!
//! A [`QuadValue`] stores `a + b*theta` with `theta = 1/sqrt(m)` and
//! arbitrary-precision rational coefficients kept in lowest terms. When m is
//! a perfect square theta itself is rational and the theta-part is folded
//! into the rational part at construction, so the representation is unique
//! and structural equality agrees with numeric equality for every m.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact element `a + b*theta` of Q(1/sqrt(m)), with `theta^2 = 1/m`.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadValue {
    a: BigRational,
    b: BigRational,
    m: u64,
}

impl fmt::Debug for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadValue({} + {}*theta, m={})", self.a, self.b, self.m)
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*theta", self.b);
        }
        if self.b.is_negative() {
            write!(f, "{} - {}*theta", self.a, -&self.b)
        } else {
            write!(f, "{} + {}*theta", self.a, self.b)
        }
    }
}

/// Integer square root check: returns `r` when `m = r^2`.
fn exact_sqrt(m: u64) -> Option<u64> {
    let r = (m as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&c| c * c == m)
}

impl QuadValue {
    /// Builds `a + b*theta` in the field with `theta^2 = 1/m`.
    pub fn new(a: BigRational, b: BigRational, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus(m));
        }
        // theta rational: fold b/r into the rational part so the
        // representation is unique.
        if let Some(r) = exact_sqrt(m) {
            let folded = a + b / BigRational::from_integer(BigInt::from(r));
            return Ok(QuadValue {
                a: folded,
                b: BigRational::zero(),
                m,
            });
        }
        Ok(QuadValue { a, b, m })
    }

    /// Builds a value from integer numerators and denominators.
    pub fn from_parts(
        a_num: impl Into<BigInt>,
        a_den: impl Into<BigInt>,
        b_num: impl Into<BigInt>,
        b_den: impl Into<BigInt>,
        m: u64,
    ) -> Result<Self> {
        let (an, ad, bn, bd) = (a_num.into(), a_den.into(), b_num.into(), b_den.into());
        if ad.is_zero() || bd.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Self::new(BigRational::new(an, ad), BigRational::new(bn, bd), m)
    }

    /// The rational value `n/d` embedded in Q(1/sqrt(m)).
    pub fn from_ratio(n: impl Into<BigInt>, d: impl Into<BigInt>, m: u64) -> Result<Self> {
        Self::from_parts(n, d, 0, 1, m)
    }

    pub fn from_integer(n: impl Into<BigInt>, m: u64) -> Result<Self> {
        Self::from_ratio(n, 1, m)
    }

    pub fn zero(m: u64) -> Result<Self> {
        Self::from_integer(0, m)
    }

    pub fn one(m: u64) -> Result<Self> {
        Self::from_integer(1, m)
    }

    /// `theta = 1/sqrt(m)` itself.
    pub fn theta(m: u64) -> Result<Self> {
        Self::from_parts(0, 1, 1, 1, m)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn theta_part(&self) -> &BigRational {
        &self.b
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the value is rational (b = 0 after folding).
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn check_same_field(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::MismatchedModulus(self.m, other.m));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        Ok(QuadValue {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            m: self.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        Ok(QuadValue {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            m: self.m,
        })
    }

    pub fn neg(&self) -> Self {
        QuadValue {
            a: -&self.a,
            b: -&self.b,
            m: self.m,
        }
    }

    /// `(a+b*theta)(c+d*theta) = (ac + bd/m) + (ad+bc)*theta`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        let inv_m = BigRational::new(BigInt::one(), BigInt::from(self.m));
        Ok(QuadValue {
            a: &self.a * &other.a + &self.b * &other.b * inv_m,
            b: &self.a * &other.b + &self.b * &other.a,
            m: self.m,
        })
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        QuadValue {
            a: &self.a * &k,
            b: &self.b * &k,
            m: self.m,
        }
    }

    /// `1/(a+b*theta) = (a - b*theta) / (a^2 - b^2/m)`, exact.
    pub fn invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv_m = BigRational::new(BigInt::one(), BigInt::from(self.m));
        let norm = &self.a * &self.a - &self.b * &self.b * inv_m;
        debug_assert!(!norm.is_zero());
        Ok(QuadValue {
            a: &self.a / &norm,
            b: -&self.b / &norm,
            m: self.m,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.invert()?)
    }

    /// Exact sign of `a + b*theta`, using only integer arithmetic:
    /// if sign(a) == sign(b) that sign wins, otherwise the sign is
    /// sign(a) * sign(a^2*m - b^2).
    pub fn sign(&self) -> Ordering {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        let m = BigRational::from_integer(BigInt::from(self.m));
        let disc = &self.a * &self.a * m - &self.b * &self.b;
        match (sa, rational_sign(&disc)) {
            (Ordering::Greater, s) => s,
            (Ordering::Less, s) => s.reverse(),
            (Ordering::Equal, _) => unreachable!(),
        }
    }

    /// Exact ordering of two values in the same field.
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        Ok(self.sub(other)?.sign())
    }

    /// Exact floor of the value.
    ///
    /// Seeds a candidate from a certified decimal approximation, then
    /// adjusts with exact comparisons until `candidate <= v < candidate+1`.
    pub fn floor(&self) -> Result<BigInt> {
        if self.b.is_zero() {
            return Ok(self.a.floor().to_integer());
        }
        let dec = self.to_decimal(2)?;
        let int_part = dec.split('.').next().unwrap();
        let mut n: BigInt = int_part.parse().expect("decimal integer part");
        loop {
            let upper = QuadValue::from_integer(&n + 1, self.m)?;
            if self.compare(&upper)? != Ordering::Less {
                n += 1;
                continue;
            }
            let lower = QuadValue::from_integer(n.clone(), self.m)?;
            if self.compare(&lower)? == Ordering::Less {
                n -= 1;
                continue;
            }
            return Ok(n);
        }
    }

    /// `floor(1/(x*theta))`, the digit map integrand. Requires `0 < x <= theta`.
    pub fn floor_times_inv_theta(&self) -> Result<u64> {
        let theta = QuadValue::theta(self.m)?;
        if self.sign() != Ordering::Greater || self.compare(&theta)? == Ordering::Greater {
            return Err(Error::OutOfDomain {
                what: "floor_times_inv_theta input",
                detail: format!("need 0 < x <= theta, got {self}"),
            });
        }
        let y = self.mul(&theta)?.invert()?;
        let n = y.floor()?;
        n.to_u64().ok_or_else(|| Error::OutOfDomain {
            what: "digit",
            detail: format!("{n} does not fit in u64"),
        })
    }

    /// Correctly rounded decimal rendering with `precision` fractional
    /// digits; the printed value differs from the exact one by less than
    /// 10^-precision.
    pub fn to_decimal(&self, precision: usize) -> Result<String> {
        if precision == 0 {
            return Err(Error::InvalidParameter(
                "precision must be >= 1".to_string(),
            ));
        }
        let scaled = if self.b.is_zero() {
            // rational: round-half-even on the exact scaled value
            round_half_even(&(&self.a * pow10(precision)))
        } else {
            self.scaled_round_irrational(precision)
        };
        Ok(render_scaled_decimal(&scaled, precision))
    }

    /// Rounds `v * 10^p` to the nearest integer for irrational v (no ties).
    fn scaled_round_irrational(&self, precision: usize) -> BigInt {
        let mut guard = 12usize;
        loop {
            let (lo, hi) = self.scaled_bounds(precision + guard);
            let g = pow10(guard);
            let r_lo = round_half_even(&BigRational::new(lo, g.clone()));
            let r_hi = round_half_even(&BigRational::new(hi, g));
            if r_lo == r_hi {
                return r_lo;
            }
            guard += 16;
        }
    }

    /// Integer window `[lo, hi]` with `lo <= v*10^scale <= hi`.
    fn scaled_bounds(&self, scale: usize) -> (BigInt, BigInt) {
        let t = pow10(scale);
        let ra = &self.a * &BigRational::from_integer(t.clone());
        let (mut lo, mut hi) = (ra.floor().to_integer(), ra.ceil().to_integer());
        if !self.b.is_zero() {
            // bound b*10^scale / sqrt(m) using an integer sqrt enclosure;
            // the enclosure must out-resolve the size of b or the window
            // never tightens
            let extra = 10 + scale + self.b.numer().magnitude().bits() as usize / 3;
            let g = pow10(extra);
            let s = (BigInt::from(self.m) * &g * &g).sqrt();
            debug_assert!(&s * &s <= BigInt::from(self.m) * &g * &g);
            let c = self.b.numer() * &t * &g;
            let d = self.b.denom();
            let (b_lo, b_hi) = if self.b.is_positive() {
                (
                    floor_div(&c, &(d * (&s + 1u32))),
                    ceil_div(&c, &(d * &s)),
                )
            } else {
                (
                    floor_div(&c, &(d * &s)),
                    ceil_div(&c, &(d * (&s + 1u32))),
                )
            };
            lo += b_lo;
            hi += b_hi;
        }
        (lo, hi)
    }

    /// Approximate f64 value via a 25-digit decimal rendering.
    pub fn to_f64(&self) -> f64 {
        match self.to_decimal(25) {
            Ok(s) => s.parse().unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }
}

fn rational_sign(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn pow10(n: usize) -> BigInt {
    BigInt::from(10u32).pow(n as u32)
}

fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_ceil(d)
}

/// Nearest integer with ties to even.
fn round_half_even(v: &BigRational) -> BigInt {
    let f = v.floor().to_integer();
    let frac = v - BigRational::from_integer(f.clone());
    let twice = &frac * BigRational::from_integer(BigInt::from(2));
    match twice.cmp(&BigRational::one()) {
        Ordering::Less => f,
        Ordering::Greater => f + 1,
        Ordering::Equal => {
            if f.is_even() {
                f
            } else {
                f + 1
            }
        }
    }
}

/// Renders `scaled = round(v*10^p)` as a decimal string with p digits.
fn render_scaled_decimal(scaled: &BigInt, precision: usize) -> String {
    let neg = scaled.is_negative();
    let digits = scaled.magnitude().to_string();
    let digits = if digits.len() <= precision {
        format!("{}{}", "0".repeat(precision + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - precision;
    let (int_part, frac_part) = digits.split_at(split);
    format!("{}{int_part}.{frac_part}", if neg { "-" } else { "" })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(an: i64, ad: i64, bn: i64, bd: i64, m: u64) -> QuadValue {
        QuadValue::from_parts(an, ad, bn, bd, m).unwrap()
    }

    #[test]
    fn make_folds_square_moduli() {
        // theta = 1 when m = 1
        let v = QuadValue::theta(1).unwrap();
        assert!(v.is_rational());
        assert_eq!(v.rational_part(), &BigRational::from_integer(1.into()));
        // theta = 1/2 when m = 4
        let v = QuadValue::theta(4).unwrap();
        assert_eq!(v.to_decimal(3).unwrap(), "0.500");
        // pure rational embedding
        let v = QuadValue::from_ratio(3, 10, 4).unwrap();
        assert_eq!(v.to_decimal(1).unwrap(), "0.3");
    }

    #[test]
    fn make_rejects_bad_inputs() {
        assert!(matches!(
            QuadValue::from_parts(1, 0, 0, 1, 2),
            Err(Error::ZeroDenominator)
        ));
        assert!(matches!(
            QuadValue::from_parts(1, 1, 0, 1, 0),
            Err(Error::InvalidModulus(0))
        ));
    }

    #[test]
    fn arithmetic_examples() {
        // theta^2 = 1/m
        let theta = QuadValue::theta(2).unwrap();
        let sq = theta.mul(&theta).unwrap();
        assert_eq!(sq, QuadValue::from_ratio(1, 2, 2).unwrap());
        // (1+theta)(1-theta) = 0 when m = 1
        let x = q(1, 1, 1, 1, 1);
        let y = q(1, 1, -1, 1, 1);
        assert!(x.mul(&y).unwrap().is_zero());
        // componentwise addition
        let s = q(1, 1, 2, 1, 3).add(&q(2, 1, -1, 1, 3)).unwrap();
        assert_eq!(s, q(3, 1, 1, 1, 3));
        // mismatched moduli
        assert!(matches!(
            q(1, 1, 0, 1, 2).add(&q(1, 1, 0, 1, 3)),
            Err(Error::MismatchedModulus(2, 3))
        ));
    }

    #[test]
    fn invert_examples() {
        // 1/theta = sqrt(m) = 2 for m = 4
        let inv = QuadValue::theta(4).unwrap().invert().unwrap();
        assert_eq!(inv, QuadValue::from_integer(2, 4).unwrap());
        // rational reciprocal
        let inv = QuadValue::from_ratio(3, 10, 4).unwrap().invert().unwrap();
        assert_eq!(inv, QuadValue::from_ratio(10, 3, 4).unwrap());
        // 1/(1+theta) = 2 - 2*theta for m = 2, checked by multiplication
        let x = q(1, 1, 1, 1, 2);
        let inv = x.invert().unwrap();
        assert_eq!(inv, q(2, 1, -2, 1, 2));
        assert_eq!(x.mul(&inv).unwrap(), QuadValue::one(2).unwrap());
        assert!(matches!(
            QuadValue::zero(2).unwrap().invert(),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn compare_examples() {
        let theta = QuadValue::theta(2).unwrap();
        let one = QuadValue::one(2).unwrap();
        assert_eq!(theta.compare(&one).unwrap(), Ordering::Less);
        // 1 - theta = 0 at m = 1
        assert_eq!(q(1, 1, -1, 1, 1).sign(), Ordering::Equal);
        // 7/5 - theta > 0 at m = 2 since (7/5)^2 > 1/2
        assert_eq!(q(7, 5, -1, 1, 2).sign(), Ordering::Greater);
    }

    #[test]
    fn floor_times_inv_theta_examples() {
        for m in [1u64, 2, 3, 4, 7] {
            let theta = QuadValue::theta(m).unwrap();
            assert_eq!(theta.floor_times_inv_theta().unwrap(), m);
        }
        let x = QuadValue::from_ratio(3, 10, 4).unwrap();
        assert_eq!(x.floor_times_inv_theta().unwrap(), 6);
        let x = QuadValue::from_ratio(3, 10, 1).unwrap();
        assert_eq!(x.floor_times_inv_theta().unwrap(), 3);
        assert!(QuadValue::zero(1).unwrap().floor_times_inv_theta().is_err());
    }

    #[test]
    fn decimal_examples() {
        assert_eq!(q(0, 1, 1, 1, 2).to_decimal(6).unwrap(), "0.707107");
        assert_eq!(q(1, 1, 0, 1, 5).to_decimal(3).unwrap(), "1.000");
        assert_eq!(q(1, 1, 1, 1, 1).to_decimal(2).unwrap(), "2.00");
        // negative value
        assert_eq!(q(0, 1, -1, 1, 2).to_decimal(4).unwrap(), "-0.7071");
        // sqrt(2) to many digits
        let s = q(0, 1, 2, 1, 2).to_decimal(20).unwrap();
        assert_eq!(s, "1.41421356237309504880");
    }

    #[test]
    fn floor_works_on_irrationals() {
        // 1/theta = sqrt(2) -> floor 1
        let v = QuadValue::theta(2).unwrap().invert().unwrap();
        assert_eq!(v.floor().unwrap(), BigInt::from(1));
        // 10*sqrt(2) -> 14
        let v = q(0, 1, 20, 1, 2);
        assert_eq!(v.floor().unwrap(), BigInt::from(14));
        // negative: -sqrt(2) -> -2
        let v = q(0, 1, -2, 1, 2);
        assert_eq!(v.floor().unwrap(), BigInt::from(-2));
    }
}
