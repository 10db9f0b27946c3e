//! High-precision expansion of arbitrary reals.
//!
//! Exact mode ([`crate::expansion`]) only accepts values in Q(1/sqrt(m)).
//! This module expands anything representable as a rational interval:
//! the orbit is tracked as a pair of rational bounds, every digit is
//! certified by agreement of the two bounds, and digit extraction aborts
//! with a precision-exhausted error once the enclosure straddles an
//! integer boundary of `1/(x*theta)`.
//!
//! For perfect-square m the orbit of a point input is iterated exactly
//! (a Euclid-style division per digit); otherwise theta itself is enclosed
//! to `prec_bits` and the interval is truncated back to a precision budget
//! that shrinks as digits are consumed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expansion::DigitSeq;

/// Outcome of a bounded expansion run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpandStatus {
    /// The orbit hit 0 exactly; the word is the complete expansion.
    Terminated,
    /// `max_digits` digits were produced and certified.
    Truncated,
}

/// `Some(r)` when `m = r^2`, i.e. when theta itself is rational.
pub fn exact_root(m: u64) -> Option<u64> {
    let r = (m as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&c| c * c == m)
}

/// One endpoint of the orbit interval, as the fraction `num/den`.
#[derive(Clone, Debug)]
struct Endpoint {
    num: BigInt,
    den: BigInt,
}

impl Endpoint {
    fn from_rational(r: &BigRational) -> Self {
        Endpoint {
            num: r.numer().clone(),
            den: r.denom().clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Outward truncation to roughly `bits` of precision: both components
    /// are shifted down together and the numerator is nudged in the
    /// direction given by `round_up`.
    fn truncate(&mut self, bits: u64, round_up: bool) {
        let size = self.num.bits().max(self.den.bits());
        if size <= bits + 64 {
            return;
        }
        let k = size - bits;
        self.num >>= k;
        self.den >>= k;
        if round_up {
            self.num += 2;
        } else {
            self.num -= 2;
            if self.num.is_negative() {
                self.num.set_zero();
            }
        }
        if self.den.is_zero() {
            self.den.set_one();
        }
    }
}

enum ThetaRep {
    /// theta = 1/root for m = root^2.
    Rational { root: u64 },
    /// `lo/2^scale <= theta <= hi/2^scale`.
    Enclosed { lo: BigInt, hi: BigInt, scale: u64 },
}

impl ThetaRep {
    fn new(m: u64, scale: u64) -> Self {
        if let Some(root) = exact_root(m) {
            return ThetaRep::Rational { root };
        }
        // theta*2^s = 2^(2s) / (2^s*sqrt(m)); bracket the inner sqrt by
        // integer sqrt
        let two_2s = BigInt::one() << (2 * scale);
        let r = (BigInt::from(m) << (2 * scale)).sqrt();
        let lo = &two_2s / (&r + 1u32);
        let hi = &two_2s / &r + 1u32;
        ThetaRep::Enclosed { lo, hi, scale }
    }
}

/// Certified digit stream for a real number given as a rational interval.
pub struct RealExpander {
    m: u64,
    theta: ThetaRep,
    lo: Endpoint,
    hi: Endpoint,
    /// Point input with rational theta: the orbit is exact.
    exact: bool,
    prec_bits: u64,
    /// Estimate of precision consumed so far, in bits.
    consumed: f64,
    digits_emitted: usize,
    terminated: bool,
    steps_since_gcd: u32,
}

impl RealExpander {
    /// Expander for an exactly known rational point.
    pub fn from_rational(m: u64, x: &BigRational, prec_bits: u64) -> Result<Self> {
        Self::from_interval(m, x, x, prec_bits)
    }

    /// Expander for a real known to lie in `[lo, hi]`.
    pub fn from_interval(
        m: u64,
        lo: &BigRational,
        hi: &BigRational,
        prec_bits: u64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus(0));
        }
        if prec_bits < 16 {
            return Err(Error::InvalidParameter(
                "prec_bits must be at least 16".to_string(),
            ));
        }
        if lo > hi || !lo.is_positive() {
            return Err(Error::OutOfDomain {
                what: "expansion interval",
                detail: format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
            });
        }
        let theta = ThetaRep::new(m, prec_bits);
        match &theta {
            ThetaRep::Rational { root } => {
                let theta_rat = BigRational::new(BigInt::one(), BigInt::from(*root));
                if *hi > theta_rat {
                    return Err(Error::OutOfDomain {
                        what: "expansion interval",
                        detail: format!("hi = {hi} above theta = 1/{root}"),
                    });
                }
            }
            ThetaRep::Enclosed { lo: tl, scale, .. } => {
                // conservative: require hi <= lower enclosure of theta;
                // a rational can sit above it yet below theta only within
                // 2^-prec of theta, which we refuse rather than resolve
                let theta_floor = BigRational::new(tl.clone(), BigInt::one() << *scale);
                if *hi > theta_floor {
                    return Err(Error::OutOfDomain {
                        what: "expansion interval",
                        detail: format!("hi = {hi} not certified below theta"),
                    });
                }
            }
        }
        let exact = lo == hi && matches!(theta, ThetaRep::Rational { .. });
        Ok(RealExpander {
            m,
            theta,
            lo: Endpoint::from_rational(lo),
            hi: Endpoint::from_rational(hi),
            exact,
            prec_bits,
            consumed: 0.0,
            digits_emitted: 0,
            terminated: false,
            steps_since_gcd: 0,
        })
    }

    /// Expander for `x * theta` with rational `x` in `(0, 1)`, the shape
    /// produced by uniform samplers on `[0, theta]`. For non-square m the
    /// point is enclosed through the theta enclosure.
    pub fn from_scaled_by_theta(m: u64, x: &BigRational, prec_bits: u64) -> Result<Self> {
        if !x.is_positive() || *x >= BigRational::one() {
            return Err(Error::OutOfDomain {
                what: "theta scale factor",
                detail: format!("need 0 < x < 1, got {x}"),
            });
        }
        if let Some(root) = exact_root(m) {
            let scaled = x / BigRational::from_integer(BigInt::from(root));
            return Self::from_rational(m, &scaled, prec_bits);
        }
        if m == 0 {
            return Err(Error::InvalidModulus(0));
        }
        if prec_bits < 16 {
            return Err(Error::InvalidParameter(
                "prec_bits must be at least 16".to_string(),
            ));
        }
        let theta = ThetaRep::new(m, prec_bits);
        let ThetaRep::Enclosed { lo: t_lo, hi: t_hi, scale } = &theta else {
            unreachable!("non-square m implies enclosed theta")
        };
        let lo = Endpoint {
            num: x.numer() * t_lo,
            den: x.denom() << *scale,
        };
        let hi = Endpoint {
            num: x.numer() * t_hi,
            den: x.denom() << *scale,
        };
        Ok(RealExpander {
            m,
            theta,
            lo,
            hi,
            exact: false,
            prec_bits,
            consumed: 0.0,
            digits_emitted: 0,
            terminated: false,
            steps_since_gcd: 0,
        })
    }

    pub fn digits_emitted(&self) -> usize {
        self.digits_emitted
    }

    pub fn precision_bits(&self) -> u64 {
        self.prec_bits
    }

    fn exhausted(&self) -> Error {
        Error::PrecisionExhausted {
            digits_emitted: self.digits_emitted,
            precision_bits: self.prec_bits as usize,
        }
    }

    /// Next certified digit; `Ok(None)` once the expansion has terminated
    /// exactly.
    pub fn next_digit(&mut self) -> Result<Option<u64>> {
        if self.terminated {
            return Ok(None);
        }
        if self.exact {
            return self.step_exact();
        }
        self.step_interval()
    }

    /// Exact Euclid-style step for point inputs with rational theta:
    /// `a = floor(D*r/N)`, `x' = (D*r - a*N) / (N*r)`.
    fn step_exact(&mut self) -> Result<Option<u64>> {
        let ThetaRep::Rational { root } = &self.theta else {
            unreachable!("exact mode implies rational theta")
        };
        let root = BigInt::from(*root);
        if self.lo.is_zero() {
            self.terminated = true;
            return Ok(None);
        }
        let (a, rem) = (&self.lo.den * &root).div_rem(&self.lo.num);
        let digit = a.to_u64().ok_or_else(|| self.exhausted())?;
        let num = std::mem::take(&mut self.lo.num);
        self.lo.num = rem;
        self.lo.den = num * &root;
        // the denominator of theta seeds common factors; strip them off
        // periodically (never needed for m = 1)
        self.steps_since_gcd += 1;
        if root > BigInt::one() && self.steps_since_gcd >= 256 {
            self.steps_since_gcd = 0;
            if !self.lo.is_zero() {
                let g = self.lo.num.gcd(&self.lo.den);
                if g > BigInt::one() {
                    self.lo.num /= &g;
                    self.lo.den /= &g;
                }
            }
        }
        self.hi = self.lo.clone();
        self.digits_emitted += 1;
        Ok(Some(digit))
    }

    /// Interval step with enclosed theta. The digit is certified by
    /// agreement of the floor at both ends; the image interval is rounded
    /// outward and truncated to the remaining precision budget.
    fn step_interval(&mut self) -> Result<Option<u64>> {
        if self.hi.is_zero() {
            self.terminated = true;
            return Ok(None);
        }
        if self.lo.is_zero() {
            // the enclosure reaches 0 but the upper end does not: the next
            // digit is unbounded above
            return Err(self.exhausted());
        }

        // 1/(x*theta) is decreasing in both x and theta:
        //   a_min from (hi, theta_hi), a_max from (lo, theta_lo);
        // new_lo = 1/hi - a*theta_hi, new_hi = 1/lo - a*theta_lo
        let (a_min, a_max, mut new_lo, mut new_hi) = match &self.theta {
            ThetaRep::Rational { root } => {
                // theta = 1/root exactly: 1/(x*theta) = D*root/N
                let r = BigInt::from(*root);
                let a_min = (&self.hi.den * &r).div_floor(&self.hi.num);
                let a_max = (&self.lo.den * &r).div_floor(&self.lo.num);
                if a_min != a_max {
                    return Err(self.exhausted());
                }
                let a = a_min.clone();
                let new_lo = Endpoint {
                    num: &self.hi.den * &r - &a * &self.hi.num,
                    den: &self.hi.num * &r,
                };
                let new_hi = Endpoint {
                    num: &self.lo.den * &r - &a * &self.lo.num,
                    den: &self.lo.num * &r,
                };
                (a_min, a_max, new_lo, new_hi)
            }
            ThetaRep::Enclosed { lo: t_lo, hi: t_hi, scale } => {
                // theta in [t_lo, t_hi]/2^scale:
                // 1/(x*theta) in [D*2^s/(N*t_hi), D*2^s/(N*t_lo)]
                let prod_hi = &self.hi.num * t_hi;
                let prod_lo = &self.lo.num * t_lo;
                let a_min = (&self.hi.den << *scale).div_floor(&prod_hi);
                let a_max = (&self.lo.den << *scale).div_floor(&prod_lo);
                if a_min != a_max {
                    return Err(self.exhausted());
                }
                let a = a_min.clone();
                let new_lo = Endpoint {
                    num: (&self.hi.den << *scale) - &a * &prod_hi,
                    den: &self.hi.num << *scale,
                };
                let new_hi = Endpoint {
                    num: (&self.lo.den << *scale) - &a * &prod_lo,
                    den: &self.lo.num << *scale,
                };
                (a_min, a_max, new_lo, new_hi)
            }
        };
        debug_assert_eq!(a_min, a_max);
        let digit = a_min.to_u64().ok_or_else(|| self.exhausted())?;
        if new_lo.num.is_negative() {
            new_lo.num.set_zero();
            new_lo.den.set_one();
        }
        if new_hi.num.is_negative() {
            // the whole enclosure collapsed below 0; cannot continue
            return Err(self.exhausted());
        }

        // budget what is left and truncate outward
        self.consumed += 2.0 * (digit as f64 / (self.m as f64).sqrt() + 1.0).log2() + 0.5;
        let budget = (self.prec_bits as f64 - self.consumed).max(64.0) as u64 + 32;
        new_lo.truncate(budget, false);
        new_hi.truncate(budget, true);

        self.lo = new_lo;
        self.hi = new_hi;
        self.digits_emitted += 1;
        Ok(Some(digit))
    }

    /// Runs the stream for up to `max_digits` digits.
    pub fn expand(&mut self, max_digits: usize) -> Result<(DigitSeq, ExpandStatus)> {
        let mut digits = Vec::new();
        while digits.len() < max_digits {
            match self.next_digit()? {
                Some(d) => digits.push(d),
                None => {
                    return Ok((DigitSeq::new(self.m, digits, true)?, ExpandStatus::Terminated))
                }
            }
        }
        if self.terminated || (self.exact && self.lo.is_zero()) {
            Ok((DigitSeq::new(self.m, digits, true)?, ExpandStatus::Terminated))
        } else {
            Ok((DigitSeq::new(self.m, digits, false)?, ExpandStatus::Truncated))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion;
    use crate::quad::QuadValue;
    use rand::Rng;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_rational_expansions() {
        // m=4, 3/10 -> [6, 6], terminated
        let mut e = RealExpander::from_rational(4, &rational(3, 10), 256).unwrap();
        let (w, status) = e.expand(10).unwrap();
        assert_eq!(w.digits(), &[6, 6]);
        assert_eq!(status, ExpandStatus::Terminated);

        // m=1, 3/10 -> [3, 3]
        let mut e = RealExpander::from_rational(1, &rational(3, 10), 256).unwrap();
        let (w, status) = e.expand(10).unwrap();
        assert_eq!(w.digits(), &[3, 3]);
        assert_eq!(status, ExpandStatus::Terminated);

        // x = theta at m = 9 gives the boundary word [9]
        let mut e = RealExpander::from_rational(9, &rational(1, 3), 128).unwrap();
        let (w, status) = e.expand(10).unwrap();
        assert_eq!(w.digits(), &[9]);
        assert_eq!(status, ExpandStatus::Terminated);
    }

    #[test]
    fn fixed_point_digits_at_m2() {
        // the positive root of x^2 + 3*theta*x - 1 = 0 at m = 2 has the
        // periodic expansion [3, 3, 3, ...]; a 6-decimal approximation of
        // the root, treated as an exact rational, starts the same way
        let x = rational(397_078, 1_000_000);
        let mut e = RealExpander::from_rational(2, &x, 512).unwrap();
        let (w, _) = e.expand(5).unwrap();
        assert_eq!(w.digits(), &[3, 3, 3, 3, 3]);
    }

    #[test]
    fn matches_exact_mode_on_random_rationals() {
        let mut rng = crate::rng::stream(1234, 0);
        for m in [1u64, 2, 3, 4, 5, 9] {
            let theta_f = 1.0 / (m as f64).sqrt();
            for _ in 0..20 {
                let den = rng.random_range(1000..100_000u64);
                let num = rng.random_range(1..(den as f64 * theta_f) as u64);
                let x = BigRational::new(BigInt::from(num), BigInt::from(den));
                if x >= BigRational::new(BigInt::one(), BigInt::from((m as f64).sqrt() as i64 + 1))
                    && exact_root(m).is_none()
                {
                    // keep clearly below theta for the non-square guard
                }
                let quad = QuadValue::from_ratio(num as i64, den as i64, m).unwrap();
                let theta = QuadValue::theta(m).unwrap();
                if quad.compare(&theta).unwrap() == std::cmp::Ordering::Greater
                    || quad.is_zero()
                {
                    continue;
                }
                let exact = expansion::expand(&quad, 25).unwrap();
                let mut e = match RealExpander::from_rational(m, &x, 4096) {
                    Ok(e) => e,
                    Err(_) => continue, // x not certified below theta
                };
                let (w, status) = e.expand(25).unwrap();
                assert_eq!(w.digits(), exact.digits(), "m={m} x={num}/{den}");
                assert_eq!(w.is_finite(), exact.is_finite());
                if w.is_finite() {
                    assert_eq!(status, ExpandStatus::Terminated);
                }
            }
        }
    }

    #[test]
    fn interval_input_certifies_then_exhausts() {
        // an interval of width 1e-12 certifies the shared digit prefix and
        // then reports exhaustion instead of guessing
        let lo = rational(299_987, 1_000_000);
        let width = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12));
        let hi = &lo + &width;
        let mut e = RealExpander::from_interval(1, &lo, &hi, 256).unwrap();
        let mut count = 0usize;
        loop {
            match e.next_digit() {
                Ok(Some(_)) => count += 1,
                Ok(None) => panic!("interval input should not terminate"),
                Err(Error::PrecisionExhausted { digits_emitted, .. }) => {
                    assert_eq!(digits_emitted, count);
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
            assert!(count < 60, "width 1e-12 cannot certify 60 digits");
        }
        assert!(count >= 5, "several digits are certified, got {count}");
    }

    #[test]
    fn domain_checks() {
        assert!(RealExpander::from_rational(2, &rational(9, 10), 128).is_err());
        assert!(RealExpander::from_rational(2, &rational(0, 10), 128).is_err());
        assert!(RealExpander::from_interval(1, &rational(2, 3), &rational(1, 3), 128).is_err());
    }
}
