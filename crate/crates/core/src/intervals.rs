//! Exact geometry of fundamental (cylinder) intervals: endpoints, lengths,
//! child lengths and admissible-word enumeration.
//!
//! Endpoint inclusion alternates with the parity of the word length; all
//! length and measure logic ignores endpoint inclusion since single points
//! carry no length.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::expansion::{convergent_state, DigitSeq};
use crate::quad::QuadValue;

/// Full enumeration is refused above this many words; callers are pointed
/// at sampled mode instead.
pub const DEFAULT_ENUM_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// The n-th order fundamental interval of a word, with exact endpoints.
#[derive(Clone, Debug)]
pub struct FundamentalInterval {
    pub word: DigitSeq,
    pub left: QuadValue,
    pub right: QuadValue,
    pub parity: Parity,
    /// True when the left endpoint is included (even n: `[p/q, ...)`);
    /// odd n intervals are `(..., p/q]`.
    pub left_closed: bool,
}

impl FundamentalInterval {
    /// Exact length `right - left`.
    pub fn width(&self) -> QuadValue {
        self.right.sub(&self.left).expect("same field")
    }

    /// Whether `x` lies inside, honouring endpoint inclusion.
    pub fn contains(&self, x: &QuadValue) -> Result<bool> {
        let lo = x.compare(&self.left)?;
        let hi = x.compare(&self.right)?;
        let left_ok = if self.left_closed {
            lo != Ordering::Less
        } else {
            lo == Ordering::Greater
        };
        let right_ok = if self.left_closed {
            hi == Ordering::Less
        } else {
            hi != Ordering::Greater
        };
        Ok(left_ok && right_ok)
    }
}

/// Builds the fundamental interval of an admissible word (n >= 1):
/// endpoints `p_n/q_n` and `(p_n + theta*p_{n-1}) / (q_n + theta*q_{n-1})`,
/// ordered by the parity of n.
pub fn interval(word: &DigitSeq) -> Result<FundamentalInterval> {
    if word.is_empty() {
        return Err(Error::EmptySequence);
    }
    let m = word.m();
    let theta = QuadValue::theta(m)?;
    let (p, q, p_prev, q_prev) = convergent_state(word, word.len())?;
    let corner = p.div(&q)?;
    let mixed = p
        .add(&theta.mul(&p_prev)?)?
        .div(&q.add(&theta.mul(&q_prev)?)?)?;
    let (parity, left, right, left_closed) = if word.len().is_multiple_of(2) {
        (Parity::Even, corner, mixed, true)
    } else {
        (Parity::Odd, mixed, corner, false)
    };
    debug_assert_eq!(left.compare(&right).unwrap(), Ordering::Less);
    Ok(FundamentalInterval {
        word: word.clone(),
        left,
        right,
        parity,
        left_closed,
    })
}

/// Length from a convergent state `(q_n, q_{n-1})` directly.
pub fn length_from_parts(
    theta: &QuadValue,
    q: &QuadValue,
    q_prev: &QuadValue,
) -> Result<QuadValue> {
    theta.div(&q.mul(&q.add(&theta.mul(q_prev)?)?)?)
}

/// Exact length `theta / (q_n * (q_n + theta*q_{n-1}))`.
///
/// The empty word is allowed and yields `theta`, the length of the order-0
/// interval `[0, theta]`.
pub fn length(word: &DigitSeq) -> Result<QuadValue> {
    let theta = QuadValue::theta(word.m())?;
    let (_, q, _, q_prev) = convergent_state(word, word.len())?;
    length_from_parts(&theta, &q, &q_prev)
}

/// Length of the child `word ++ [k]` without building the child word:
/// `theta / ((k*theta*q_n + q_{n-1}) * ((k+1)*theta*q_n + q_{n-1}))`.
pub fn child_length(word: &DigitSeq, k: u64) -> Result<QuadValue> {
    let m = word.m();
    if k < m {
        return Err(Error::InadmissibleDigit {
            digit: k,
            position: word.len() + 1,
            min: m,
        });
    }
    let theta = QuadValue::theta(m)?;
    let (_, q, _, q_prev) = convergent_state(word, word.len())?;
    let lo = theta.mul_u64(k).mul(&q)?.add(&q_prev)?;
    let hi = theta.mul_u64(k + 1).mul(&q)?.add(&q_prev)?;
    theta.div(&lo.mul(&hi)?)
}

/// Lexicographic enumeration of all words in `{m..M}^n`.
pub struct WordIter {
    m: u64,
    big_m: u64,
    current: Option<Vec<u64>>,
}

impl Iterator for WordIter {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Self::Item> {
        let word = self.current.clone()?;
        // odometer increment
        let mut next = word.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.big_m {
                next[i] += 1;
                for d in next.iter_mut().skip(i + 1) {
                    *d = self.m;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(word)
    }
}

/// Number of words in `{m..M}^n`, if it fits in u128.
pub fn word_count(n: usize, m: u64, big_m: u64) -> Option<u128> {
    let base = (big_m - m + 1) as u128;
    base.checked_pow(n as u32)
}

/// All `(M-m+1)^n` words over the digit alphabet `{m, ..., M}` in
/// lexicographic order, refusing enumerations above `budget`.
pub fn enumerate_words_with_budget(
    n: usize,
    m: u64,
    big_m: u64,
    budget: u128,
) -> Result<WordIter> {
    if m == 0 {
        return Err(Error::InvalidModulus(0));
    }
    if big_m < m {
        return Err(Error::InvalidParameter(format!(
            "digit bound M = {big_m} below m = {m}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".to_string()));
    }
    match word_count(n, m, big_m) {
        Some(words) if words <= budget => Ok(WordIter {
            m,
            big_m,
            current: Some(vec![m; n]),
        }),
        Some(words) => Err(Error::BudgetExceeded { words, budget }),
        None => Err(Error::BudgetExceeded {
            words: u128::MAX,
            budget,
        }),
    }
}

/// Enumeration with the default budget of 10^7 words.
pub fn enumerate_words(n: usize, m: u64, big_m: u64) -> Result<WordIter> {
    enumerate_words_with_budget(n, m, big_m, DEFAULT_ENUM_BUDGET)
}
