//! Bridge from exact values to extended-precision floats.
//!
//! Covering-sum powers |I|^s and similar transcendental quantities are
//! computed here: exact lengths are converted to `astro_float::BigFloat`
//! at well over 40 significant digits and only then raised to real powers.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::quad::QuadValue;

/// Default working precision in bits (about 58 decimal digits).
pub const DEFAULT_PREC: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

/// Shared precision and constants cache for BigFloat computations.
pub struct FloatCtx {
    pub prec: usize,
    cc: Consts,
}

impl FloatCtx {
    pub fn new(prec: usize) -> Self {
        FloatCtx {
            prec,
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn bigint(&mut self, n: &BigInt) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, self.prec, RM, &mut self.cc)
    }

    pub fn rational(&mut self, r: &BigRational) -> BigFloat {
        let num = self.bigint(r.numer());
        let den = self.bigint(r.denom());
        num.div(&den, self.prec, RM)
    }

    /// `a + b/sqrt(m)` of a quadratic value.
    pub fn quad(&mut self, x: &QuadValue) -> BigFloat {
        let a = self.rational(x.rational_part());
        if x.theta_part().is_zero() {
            return a;
        }
        let b = self.rational(x.theta_part());
        let root = BigFloat::from_u64(x.modulus(), self.prec).sqrt(self.prec, RM);
        a.add(&b.div(&root, self.prec, RM), self.prec, RM)
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.prec)
    }

    pub fn pow(&mut self, x: &BigFloat, s: &BigFloat) -> BigFloat {
        x.pow(s, self.prec, RM, &mut self.cc)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.prec, RM, &mut self.cc)
    }

    pub fn add(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.add(y, self.prec, RM)
    }

    pub fn sub(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.sub(y, self.prec, RM)
    }

    pub fn mul(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.mul(y, self.prec, RM)
    }

    pub fn div(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.div(y, self.prec, RM)
    }
}

/// Lossy conversion to f64 (returns 0/inf beyond the f64 exponent range).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _n, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let len = words.len();
    let mut frac = words[len - 1] as f64 / 2f64.powi(64);
    if len >= 2 {
        frac += words[len - 2] as f64 / 2f64.powi(64).powi(2);
    }
    let mag = frac * 2f64.powf(e as f64);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        let mut ctx = FloatCtx::new(DEFAULT_PREC);
        let v = ctx.rational(&BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert!((to_f64(&v) - 1.0 / 3.0).abs() < 1e-15);

        let big = BigInt::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let v = ctx.bigint(&big);
        assert!((to_f64(&v) - 1.2345678901234568e29).abs() / 1e29 < 1e-12);

        let neg = ctx.from_f64(-0.125);
        assert_eq!(to_f64(&neg), -0.125);
    }

    #[test]
    fn quad_value_conversion() {
        let mut ctx = FloatCtx::new(DEFAULT_PREC);
        // 1 + 1/sqrt(2)
        let x = QuadValue::from_parts(1, 1, 1, 1, 2).unwrap();
        let v = to_f64(&ctx.quad(&x));
        assert!((v - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        // folded square modulus: theta(4) = 1/2
        let x = QuadValue::theta(4).unwrap();
        assert_eq!(to_f64(&ctx.quad(&x)), 0.5);
    }

    #[test]
    fn pow_and_ln() {
        let mut ctx = FloatCtx::new(DEFAULT_PREC);
        let x = ctx.from_f64(0.5);
        let s = ctx.from_f64(0.5);
        let r = ctx.pow(&x, &s);
        assert!((to_f64(&r) - 0.5f64.sqrt()).abs() < 1e-15);
        let l = ctx.ln(&x);
        assert!((to_f64(&l) + std::f64::consts::LN_2).abs() < 1e-15);
    }
}
