//! The theta-expansion engine: Gauss map iteration, digit extraction,
//! convergent recursions and admissibility enforcement.
//!
//! Digits are produced by `a(x) = floor(1/(x*theta))` and the shift
//! `T(x) = 1/x - theta*a(x)` on `[0, theta]`. Exact mode accepts only
//! [`QuadValue`] inputs; arbitrary reals go through [`crate::highprec`].

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::quad::QuadValue;

/// A finite word of partial quotients, or a finite prefix of an infinite
/// expansion (`finite = false`).
///
/// Invariants enforced at construction: every digit is >= m, and a finite
/// expansion ends in a digit >= m+1 except for the distinguished single-digit
/// word `[m]` that represents `x = theta` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSeq {
    m: u64,
    digits: Vec<u64>,
    finite: bool,
}

impl DigitSeq {
    pub fn new(m: u64, digits: Vec<u64>, finite: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus(m));
        }
        for (i, &d) in digits.iter().enumerate() {
            if d < m {
                return Err(Error::InadmissibleDigit {
                    digit: d,
                    position: i + 1,
                    min: m,
                });
            }
        }
        if finite {
            match digits.last() {
                None => return Err(Error::EmptySequence),
                // the lone exception: the word [m] encodes x = theta
                Some(&last) if last < m + 1 && digits.len() != 1 => {
                    return Err(Error::InadmissibleTermination { last, min: m + 1 });
                }
                _ => {}
            }
        }
        Ok(DigitSeq { m, digits, finite })
    }

    /// A prefix of an infinite expansion (no terminating-digit rule).
    pub fn prefix(m: u64, digits: Vec<u64>) -> Result<Self> {
        Self::new(m, digits, false)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// True for the distinguished boundary word `[m]` representing theta.
    pub fn is_theta_boundary(&self) -> bool {
        self.finite && self.digits.len() == 1 && self.digits[0] == self.m
    }
}

/// The pair `(p_n, q_n)` of convergent numerator and denominator, both
/// exact values in Q(1/sqrt(m)).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergentPair {
    pub n: usize,
    pub p: QuadValue,
    pub q: QuadValue,
}

/// Streams `(p_n, q_n)` for n = 1, 2, ... via
/// `p_n = a_n*theta*p_{n-1} + p_{n-2}`, `q_n = a_n*theta*q_{n-1} + q_{n-2}`
/// with seeds `p_{-1} = 1, p_0 = 0, q_{-1} = 0, q_0 = 1`.
pub struct Convergents<'a> {
    digits: std::slice::Iter<'a, u64>,
    theta: QuadValue,
    n: usize,
    p_prev: QuadValue,
    p_curr: QuadValue,
    q_prev: QuadValue,
    q_curr: QuadValue,
}

impl<'a> Convergents<'a> {
    pub fn new(word: &'a DigitSeq) -> Self {
        let m = word.m();
        Convergents {
            digits: word.digits().iter(),
            theta: QuadValue::theta(m).expect("validated m"),
            n: 0,
            p_prev: QuadValue::one(m).expect("validated m"),
            p_curr: QuadValue::zero(m).expect("validated m"),
            q_prev: QuadValue::zero(m).expect("validated m"),
            q_curr: QuadValue::one(m).expect("validated m"),
        }
    }
}

impl Iterator for Convergents<'_> {
    type Item = ConvergentPair;

    fn next(&mut self) -> Option<Self::Item> {
        let &a = self.digits.next()?;
        let step = |curr: &QuadValue, prev: &QuadValue| {
            self.theta
                .mul_u64(a)
                .mul(curr)
                .and_then(|t| t.add(prev))
                .expect("same field")
        };
        let p_next = step(&self.p_curr, &self.p_prev);
        let q_next = step(&self.q_curr, &self.q_prev);
        self.p_prev = std::mem::replace(&mut self.p_curr, p_next);
        self.q_prev = std::mem::replace(&mut self.q_curr, q_next);
        self.n += 1;
        Some(ConvergentPair {
            n: self.n,
            p: self.p_curr.clone(),
            q: self.q_curr.clone(),
        })
    }
}

/// Convergents of a word.
pub fn convergents(word: &DigitSeq) -> Convergents<'_> {
    Convergents::new(word)
}

/// `(p_n, q_n, p_{n-1}, q_{n-1})` after consuming `depth` digits.
/// `depth = 0` yields the seeds `(0, 1, 1, 0)`.
pub fn convergent_state(
    word: &DigitSeq,
    depth: usize,
) -> Result<(QuadValue, QuadValue, QuadValue, QuadValue)> {
    if depth > word.len() {
        return Err(Error::IndexOutOfRange(format!(
            "depth {depth} > word length {}",
            word.len()
        )));
    }
    let m = word.m();
    let mut it = Convergents::new(word);
    let mut p_prev = QuadValue::one(m)?;
    let mut q_prev = QuadValue::zero(m)?;
    let mut p_curr = QuadValue::zero(m)?;
    let mut q_curr = QuadValue::one(m)?;
    for _ in 0..depth {
        let pair = it.next().expect("depth <= len");
        p_prev = std::mem::replace(&mut p_curr, pair.p);
        q_prev = std::mem::replace(&mut q_curr, pair.q);
    }
    Ok((p_curr, q_curr, p_prev, q_prev))
}

fn check_unit_interval(x: &QuadValue, theta: &QuadValue, what: &'static str) -> Result<()> {
    if x.sign() == Ordering::Less || x.compare(theta)? == Ordering::Greater {
        return Err(Error::OutOfDomain {
            what,
            detail: format!("need 0 <= x <= theta, got {x}"),
        });
    }
    Ok(())
}

/// One step of the Gauss-type shift `T(x) = 1/x - theta*floor(1/(x*theta))`,
/// with `T(0) = 0`. Exact; the result lies in `[0, theta]`.
pub fn gauss_map(x: &QuadValue) -> Result<QuadValue> {
    let theta = QuadValue::theta(x.modulus())?;
    check_unit_interval(x, &theta, "gauss_map input")?;
    if x.is_zero() {
        return QuadValue::zero(x.modulus());
    }
    let a = x.floor_times_inv_theta()?;
    let next = x.invert()?.sub(&theta.mul_u64(a))?;
    debug_assert!(next.sign() != Ordering::Less);
    debug_assert!(next.compare(&theta)? != Ordering::Greater);
    Ok(next)
}

/// First digit `a_1(x)`; `None` is the infinity marker for `x = 0`.
pub fn digit(x: &QuadValue) -> Result<Option<u64>> {
    let theta = QuadValue::theta(x.modulus())?;
    check_unit_interval(x, &theta, "digit input")?;
    if x.is_zero() {
        return Ok(None);
    }
    Ok(Some(x.floor_times_inv_theta()?))
}

/// Expands `x` into at most `max_digits` partial quotients.
///
/// The orbit is iterated exactly; the word is marked finite when it hits 0.
/// `x = theta` is returned as the distinguished boundary word `[m]`.
pub fn expand(x: &QuadValue, max_digits: usize) -> Result<DigitSeq> {
    let m = x.modulus();
    let theta = QuadValue::theta(m)?;
    if x.sign() != Ordering::Greater || x.compare(&theta)? == Ordering::Greater {
        return Err(Error::OutOfDomain {
            what: "expand input",
            detail: format!("need 0 < x <= theta, got {x}"),
        });
    }
    let mut digits = Vec::new();
    let mut current = x.clone();
    while digits.len() < max_digits {
        if current.is_zero() {
            return DigitSeq::new(m, digits, true);
        }
        let a = current.floor_times_inv_theta()?;
        digits.push(a);
        current = current.invert()?.sub(&theta.mul_u64(a))?;
    }
    if current.is_zero() {
        DigitSeq::new(m, digits, true)
    } else {
        DigitSeq::new(m, digits, false)
    }
}

/// The depth-th convergent `p_depth / q_depth` as an exact value.
pub fn evaluate(word: &DigitSeq, depth: usize) -> Result<QuadValue> {
    if word.is_empty() {
        return Err(Error::EmptySequence);
    }
    if depth == 0 || depth > word.len() {
        return Err(Error::IndexOutOfRange(format!(
            "depth {depth} not in 1..={}",
            word.len()
        )));
    }
    let (p, q, _, _) = convergent_state(word, depth)?;
    p.div(&q)
}

/// Checks the denominator ratio bounds exactly:
/// `(a_k+m)*theta/2 <= q_n(a_1..a_n) / q_{n-1}(word with a_k removed)
///  <= (a_k+m)*theta`.
pub fn check_q_ratio_bounds(word: &DigitSeq, n: usize, k: usize) -> Result<bool> {
    if k == 0 || n == 0 || k > n || n > word.len() {
        return Err(Error::IndexOutOfRange(format!(
            "need 1 <= k <= n <= {}, got k={k}, n={n}",
            word.len()
        )));
    }
    let m = word.m();
    let full = DigitSeq::prefix(m, word.digits()[..n].to_vec())?;
    let mut reduced_digits = word.digits()[..n].to_vec();
    let a_k = reduced_digits.remove(k - 1);
    let reduced = DigitSeq::prefix(m, reduced_digits)?;

    let (_, q_n, _, _) = convergent_state(&full, n)?;
    let (_, q_red, _, _) = convergent_state(&reduced, n - 1)?;
    let ratio = q_n.div(&q_red)?;

    let upper = QuadValue::theta(m)?.mul_u64(a_k + m);
    let half = QuadValue::from_ratio(1, 2, m)?;
    let lower = upper.mul(&half)?;
    Ok(ratio.compare(&lower)? != Ordering::Less && ratio.compare(&upper)? != Ordering::Greater)
}
