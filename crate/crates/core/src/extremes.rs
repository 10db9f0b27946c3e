//! Extreme-value statistics of partial quotients: the max-digit series
//! `L_n`, streams with prescribed big digits at square positions, the
//! digit-erasing map between those streams and bounded-digit words, the
//! gap constant between adjacent fundamental sub-intervals, Holder-property
//! checks, and Monte Carlo exploration of the liminf law.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bigfloat::{self, FloatCtx};
use crate::error::{Error, Result};
use crate::expansion::{evaluate, DigitSeq};
use crate::highprec::RealExpander;
use crate::intervals;
use crate::measure::MeasureParams;
use crate::quad::QuadValue;
use crate::rng;

/// `log log n` with natural logarithms; positive for n > e.
pub fn loglog(n: f64) -> f64 {
    n.ln().ln()
}

/// Ratios `L_n loglog n / n` are flagged pre-asymptotic below this n
/// (loglog n <= 1 up to n = e^e).
pub const PRE_ASYMPTOTIC_N: u64 = 15;

/// Construction parameters for streams with prescribed big partial
/// quotients: position `k^2` (k >= 2) carries
/// `floor(eta * k^2 / loglog(k^2))`, all other digits lie in `[m, M]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EtaSpec {
    pub eta: f64,
    pub m: u64,
    pub big_m: u64,
}

impl EtaSpec {
    pub fn new(eta: f64, m: u64, big_m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus(0));
        }
        if big_m < m {
            return Err(Error::InvalidParameter(format!(
                "digit bound M = {big_m} below m = {m}"
            )));
        }
        if eta.is_nan() || eta <= 0.0 || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be a positive real, got {eta}"
            )));
        }
        let spec = EtaSpec { eta, m, big_m };
        // inserted digits must be admissible; the smallest values sit at
        // the first few k (the sequence grows like k^2 afterwards)
        for k in 2..=64u64 {
            if spec.insert_value(k) < m {
                return Err(Error::InvalidParameter(format!(
                    "insert value {} at k = {k} below m = {m}; eta too small",
                    spec.insert_value(k)
                )));
            }
        }
        spec.k0()?; // must exist
        Ok(spec)
    }

    /// The digit inserted at position `k^2`.
    pub fn insert_value(&self, k: u64) -> u64 {
        let kk = (k * k) as f64;
        (self.eta * kk / loglog(kk)).floor() as u64
    }

    /// `Some(k)` when `pos = k^2` for some k >= 2.
    pub fn insert_position(pos: u64) -> Option<u64> {
        if pos < 4 {
            return None;
        }
        let r = (pos as f64).sqrt().round() as u64;
        [r.saturating_sub(1), r, r + 1]
            .into_iter()
            .find(|&c| c >= 2 && c * c == pos)
    }

    /// Number of insert positions among the first n: `#{k >= 2 : k^2 <= n}`.
    pub fn insert_count(n: u64) -> u64 {
        if n < 4 {
            0
        } else {
            (n as f64).sqrt().floor() as u64 - 1
        }
    }

    /// The explicit "large enough" threshold: the least k >= 2 with
    /// `insert_value(k) >= M` and `t^2/loglog(t^2)` increasing at k.
    pub fn k0(&self) -> Result<u64> {
        let g = |k: u64| {
            let kk = (k * k) as f64;
            kk / loglog(kk)
        };
        for k in 2..=10_000_000u64 {
            if self.insert_value(k) >= self.big_m && g(k + 1) >= g(k) {
                return Ok(k);
            }
        }
        Err(Error::InvalidParameter(
            "no k0 below 1e7; eta too small relative to M".to_string(),
        ))
    }

    /// `N_0 = (k0+1)^2`, the order from which the insert dominates.
    pub fn n0(&self) -> Result<u64> {
        let k0 = self.k0()?;
        Ok((k0 + 1) * (k0 + 1))
    }
}

/// Digit source for the non-insert positions.
#[derive(Clone, Copy, Debug)]
pub enum Filler {
    Constant(u64),
    /// Seeded uniform digits in `[m, M]`.
    Random { seed: u64 },
}

/// Lazy stream of digits for a point of the eta-construction.
pub struct EtaStream {
    spec: EtaSpec,
    filler: Filler,
    rng: Option<ChaCha8Rng>,
    pos: u64,
}

impl EtaStream {
    pub fn spec(&self) -> &EtaSpec {
        &self.spec
    }
}

impl Iterator for EtaStream {
    type Item = u64;

    fn next(&mut self) -> Option<Self::Item> {
        self.pos += 1;
        if let Some(k) = EtaSpec::insert_position(self.pos) {
            return Some(self.spec.insert_value(k));
        }
        Some(match self.filler {
            Filler::Constant(d) => d,
            Filler::Random { .. } => {
                let rng = self.rng.as_mut().expect("random filler has rng");
                rng.random_range(self.spec.m..=self.spec.big_m)
            }
        })
    }
}

/// The stream with inserted digits at square positions and filler digits
/// elsewhere. Admissible by construction.
pub fn construct_eta_stream(spec: &EtaSpec, filler: Filler) -> Result<EtaStream> {
    if let Filler::Constant(d) = filler {
        if d < spec.m || d > spec.big_m {
            return Err(Error::InvalidParameter(format!(
                "filler {d} outside [{}, {}]",
                spec.m, spec.big_m
            )));
        }
    }
    let rng = match filler {
        Filler::Random { seed } => Some(rng::stream(seed, 0)),
        Filler::Constant(_) => None,
    };
    Ok(EtaStream {
        spec: *spec,
        filler,
        rng,
        pos: 0,
    })
}

/// `L_n = max(a_1..a_n)` of a word.
pub fn max_digit_prefix(word: &DigitSeq, n: usize) -> Result<u64> {
    if n == 0 || word.is_empty() {
        return Err(Error::EmptySequence);
    }
    if n > word.len() {
        return Err(Error::IndexOutOfRange(format!(
            "n = {n} > available digits {}",
            word.len()
        )));
    }
    Ok(*word.digits()[..n].iter().max().expect("nonempty"))
}

/// The series `L_n loglog n / n` for n = 3..n_max with its running minimum.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSeries {
    /// First n of the grid (always 3; loglog is not positive before).
    pub n_start: u64,
    pub ratios: Vec<f64>,
    pub running_min: Vec<f64>,
    /// Ratios at n <= this are computed but pre-asymptotic.
    pub pre_asymptotic_until: u64,
}

impl RatioSeries {
    pub fn ratio_at(&self, n: u64) -> Option<f64> {
        let idx = n.checked_sub(self.n_start)? as usize;
        self.ratios.get(idx).copied()
    }

    pub fn last_n(&self) -> u64 {
        self.n_start + self.ratios.len() as u64 - 1
    }

    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("n,ratio,running_min\n");
        for (i, (r, m)) in self.ratios.iter().zip(&self.running_min).enumerate() {
            if i % stride == 0 || i + 1 == self.ratios.len() {
                out.push_str(&format!("{},{},{}\n", self.n_start + i as u64, r, m));
            }
        }
        out
    }
}

/// Consumes `n_max` digits of a stream (admissibility-checked against m)
/// and records the rescaled max series.
pub fn ratio_series(
    digits: impl IntoIterator<Item = u64>,
    m: u64,
    n_max: u64,
) -> Result<RatioSeries> {
    if n_max < 3 {
        return Err(Error::InvalidParameter(
            "n_max must be >= 3 (loglog n is not positive before)".to_string(),
        ));
    }
    let mut ratios = Vec::with_capacity((n_max - 2) as usize);
    let mut running_min = Vec::with_capacity((n_max - 2) as usize);
    let mut l_n = 0u64;
    let mut min_so_far = f64::INFINITY;
    let mut it = digits.into_iter();
    for n in 1..=n_max {
        let d = it.next().ok_or_else(|| {
            Error::IndexOutOfRange(format!("stream ended at {} < n_max = {n_max}", n - 1))
        })?;
        if d < m {
            return Err(Error::InadmissibleDigit {
                digit: d,
                position: n as usize,
                min: m,
            });
        }
        l_n = l_n.max(d);
        if n >= 3 {
            let ratio = l_n as f64 * loglog(n as f64) / n as f64;
            min_so_far = min_so_far.min(ratio);
            ratios.push(ratio);
            running_min.push(min_so_far);
        }
    }
    Ok(RatioSeries {
        n_start: 3,
        ratios,
        running_min,
        pre_asymptotic_until: PRE_ASYMPTOTIC_N,
    })
}

/// Removes the inserted positions `{k^2 : k >= 2, k^2 <= n}` from the
/// first n digits. The result has length `n - c(n)`.
pub fn erase_inserted(word: &DigitSeq, _spec: &EtaSpec, n: usize) -> Result<DigitSeq> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".to_string()));
    }
    if n > word.len() {
        return Err(Error::IndexOutOfRange(format!(
            "n = {n} > available digits {}",
            word.len()
        )));
    }
    let kept: Vec<u64> = word.digits()[..n]
        .iter()
        .enumerate()
        .filter(|(i, _)| EtaSpec::insert_position((i + 1) as u64).is_none())
        .map(|(_, &d)| d)
        .collect();
    debug_assert_eq!(kept.len() as u64, n as u64 - EtaSpec::insert_count(n as u64));
    DigitSeq::prefix(word.m(), kept)
}

/// The gap constant `K(theta, M) = m / (theta (M(M+1) + (M+1)theta + m)
/// (M + theta + 1))` as an exact value.
pub fn gap_constant_quad(m: u64, big_m: u64) -> Result<QuadValue> {
    let theta = QuadValue::theta(m)?;
    let t2 = QuadValue::from_parts(big_m * (big_m + 1) + m, 1, big_m + 1, 1, m)?;
    let t3 = QuadValue::from_parts(big_m + 1, 1, 1, 1, m)?;
    QuadValue::from_integer(m, m)?.div(&theta.mul(&t2)?.mul(&t3)?)
}

/// [`gap_constant_quad`] as f64.
pub fn gap_constant(m: u64, big_m: u64) -> Result<f64> {
    Ok(gap_constant_quad(m, big_m)?.to_f64())
}

/// Outcome of the adjacent-gap verification.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub m: u64,
    pub big_m: u64,
    pub eta: f64,
    pub depth: usize,
    pub pairs_checked: u64,
    pub violations: u64,
    /// Smallest observed gap / (K * |I_n|); below 1 would be a violation.
    pub min_margin: f64,
}

struct GapChecker {
    spec: EtaSpec,
    theta: QuadValue,
    k_quad: QuadValue,
    one: QuadValue,
    budget: u64,
    pairs: u64,
    violations: u64,
    min_margin: Option<QuadValue>,
}

impl GapChecker {
    /// J_{n+1}(w, c): the union of admissible order-(n+2) children of the
    /// child c, as an exact endpoint pair (unordered).
    fn j_set(
        &self,
        p: &QuadValue,
        q: &QuadValue,
        p_child: &QuadValue,
        q_child: &QuadValue,
        next_pos: u64,
    ) -> Result<(QuadValue, QuadValue)> {
        if let Some(k) = EtaSpec::insert_position(next_pos) {
            // forced digit: J is the single cylinder I_{n+2}(w, c, beta_k)
            let beta = self.spec.insert_value(k);
            let p2 = self.theta.mul_u64(beta).mul(p_child)?.add(p)?;
            let q2 = self.theta.mul_u64(beta).mul(q_child)?.add(q)?;
            let e1 = p2.div(&q2)?;
            let e2 = p2.add(&self.theta.mul(p_child)?)?.div(&q2.add(&self.theta.mul(q_child)?)?)?;
            Ok((e1, e2))
        } else {
            // digits m..M: endpoints at the shift values theta and
            // 1/((M+1) theta)
            let e1 = p_child
                .add(&self.theta.mul(p)?)?
                .div(&q_child.add(&self.theta.mul(q)?)?)?;
            let mm1 = self.theta.mul_u64(self.spec.big_m + 1);
            let e2 = mm1.mul(p_child)?.add(p)?.div(&mm1.mul(q_child)?.add(q)?)?;
            Ok((e1, e2))
        }
    }

    /// Recursive walk over admissible prefixes; checks all adjacent child
    /// pairs at each non-insert position.
    fn walk(
        &mut self,
        pos: u64,
        depth: usize,
        p: &QuadValue,
        q: &QuadValue,
        p_prev: &QuadValue,
        q_prev: &QuadValue,
    ) -> Result<()> {
        // children of this prefix sit at position pos
        if pos as usize > depth {
            return Ok(());
        }
        let forced = EtaSpec::insert_position(pos).map(|k| self.spec.insert_value(k));
        if forced.is_none() {
            // interval length |I_n| of the prefix, n = pos-1
            let len = crate::intervals::length_from_parts(&self.theta, q, q_prev)?;
            let k_len = self.k_quad.mul(&len)?;
            let mut prev_child: Option<(QuadValue, QuadValue, QuadValue, QuadValue)> = None;
            for c in self.spec.m..=self.spec.big_m {
                let p_c = self.theta.mul_u64(c).mul(p)?.add(p_prev)?;
                let q_c = self.theta.mul_u64(c).mul(q)?.add(q_prev)?;
                let j = self.j_set(p, q, &p_c, &q_c, pos + 1)?;
                if let Some((_, _, j1_lo, j1_hi)) = &prev_child {
                    if self.budget > 0 && self.pairs >= self.budget {
                        return Err(Error::BudgetExceeded {
                            words: self.pairs as u128 + 1,
                            budget: self.budget as u128,
                        });
                    }
                    self.pairs += 1;
                    let gap = gap_between(&(j1_lo.clone(), j1_hi.clone()), &j)?;
                    let ratio = gap.div(&k_len)?;
                    if ratio.compare(&self.one)? == Ordering::Less {
                        self.violations += 1;
                    }
                    let smaller = match &self.min_margin {
                        Some(best) => ratio.compare(best)? == Ordering::Less,
                        None => true,
                    };
                    if smaller {
                        self.min_margin = Some(ratio);
                    }
                }
                prev_child = Some((p_c, q_c, j.0, j.1));
            }
        }
        if (pos as usize) < depth {
            match forced {
                Some(d) => {
                    let p_c = self.theta.mul_u64(d).mul(p)?.add(p_prev)?;
                    let q_c = self.theta.mul_u64(d).mul(q)?.add(q_prev)?;
                    self.walk(pos + 1, depth, &p_c, &q_c, p, q)?;
                }
                None => {
                    for c in self.spec.m..=self.spec.big_m {
                        let p_c = self.theta.mul_u64(c).mul(p)?.add(p_prev)?;
                        let q_c = self.theta.mul_u64(c).mul(q)?.add(q_prev)?;
                        self.walk(pos + 1, depth, &p_c, &q_c, p, q)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exact gap between two disjoint intervals given as unordered endpoint
/// pairs.
fn gap_between(
    a: &(QuadValue, QuadValue),
    b: &(QuadValue, QuadValue),
) -> Result<QuadValue> {
    let (a_lo, a_hi) = sorted(&a.0, &a.1)?;
    let (b_lo, b_hi) = sorted(&b.0, &b.1)?;
    // the lower interval's top against the upper interval's bottom
    if a_hi.compare(b_lo)? != Ordering::Greater {
        b_lo.sub(a_hi)
    } else if b_hi.compare(a_lo)? != Ordering::Greater {
        a_lo.sub(b_hi)
    } else {
        Err(Error::InvalidParameter(
            "fundamental sub-intervals overlap; gap undefined".to_string(),
        ))
    }
}

fn sorted<'a>(x: &'a QuadValue, y: &'a QuadValue) -> Result<(&'a QuadValue, &'a QuadValue)> {
    Ok(if x.compare(y)? == Ordering::Greater {
        (y, x)
    } else {
        (x, y)
    })
}

/// Verifies the separation of adjacent fundamental sub-intervals:
/// for every admissible prefix up to `depth` and every adjacent child pair,
/// the gap between the corresponding J-sets is at least `K(theta, M) *
/// |I_n|`, all in exact arithmetic.
pub fn check_gap_property(spec: &EtaSpec, depth: usize, budget: u64) -> Result<GapReport> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".to_string()));
    }
    let m = spec.m;
    let mut checker = GapChecker {
        spec: *spec,
        theta: QuadValue::theta(m)?,
        k_quad: gap_constant_quad(m, spec.big_m)?,
        one: QuadValue::one(m)?,
        budget,
        pairs: 0,
        violations: 0,
        min_margin: None,
    };
    let p0 = QuadValue::zero(m)?;
    let q0 = QuadValue::one(m)?;
    let p_m1 = QuadValue::one(m)?;
    let q_m1 = QuadValue::zero(m)?;
    checker.walk(1, depth, &p0, &q0, &p_m1, &q_m1)?;
    Ok(GapReport {
        m,
        big_m: spec.big_m,
        eta: spec.eta,
        depth,
        pairs_checked: checker.pairs,
        violations: checker.violations,
        min_margin: checker
            .min_margin
            .map(|r| r.to_f64())
            .unwrap_or(f64::INFINITY),
    })
}

/// Outcome of the Holder-property sampling check.
#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub epsilon: f64,
    pub pairs: u64,
    pub violations: u64,
    /// Max of (upper bound on lhs) / (lower bound on rhs); above 1 would
    /// be a violation.
    pub worst_quotient: f64,
    pub n0: u64,
    pub k1: f64,
}

/// Samples pairs `x, y` of truncated streams with `|x - y|` below the
/// small-scale constant `K1(theta, M)` and verifies
/// `|f(x) - f(y)| <= ((1+theta^2)/K) |x - y|^{1/(1+eps)}`,
/// where f erases the inserted digits. Both sides are evaluated from exact
/// convergents with certified truncation error.
pub fn check_holder(
    spec: &EtaSpec,
    epsilon: f64,
    sample_pairs: u64,
    seed: u64,
) -> Result<HolderReport> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    let m = spec.m;
    let k_quad = gap_constant_quad(m, spec.big_m)?;
    let one_plus_theta_sq = QuadValue::from_parts(1, 1, 0, 1, m)?
        .add(&QuadValue::from_ratio(1, m as i64, m)?)?;
    // K1 = K/(1+theta^2) * min |I_{N0}| over admissible words; q grows in
    // every digit, so the minimum is at the all-M word with inserts
    let n0 = spec.n0()?;
    let word_min: Vec<u64> = (1..=n0)
        .map(|pos| match EtaSpec::insert_position(pos) {
            Some(k) => spec.insert_value(k),
            None => spec.big_m,
        })
        .collect();
    let min_len = intervals::length(&DigitSeq::prefix(m, word_min)?)?;
    let k1_quad = k_quad.div(&one_plus_theta_sq)?.mul(&min_len)?;

    let mut fx = FloatCtx::new(bigfloat::DEFAULT_PREC);
    let holder_coeff = {
        let c = one_plus_theta_sq.div(&k_quad)?;
        fx.quad(&c)
    };
    let exponent = fx.from_f64(1.0 / (1.0 + epsilon));

    let mut rng = rng::stream(seed, 0);
    let mut violations = 0u64;
    let mut worst: f64 = 0.0;

    for _ in 0..sample_pairs {
        // shared admissible prefix, extended until its cylinder is
        // shorter than K1 and the next position is free
        let mut shared: Vec<u64> = Vec::new();
        loop {
            let pos = shared.len() as u64 + 1;
            let next_free = EtaSpec::insert_position(pos + 1).is_none();
            let d = match EtaSpec::insert_position(pos) {
                Some(k) => spec.insert_value(k),
                None => rng.random_range(m..=spec.big_m),
            };
            shared.push(d);
            if shared.len() as u64 >= n0 && next_free {
                let len = intervals::length(&DigitSeq::prefix(m, shared.clone())?)?;
                if len.compare(&k1_quad)? == Ordering::Less {
                    break;
                }
            }
        }
        let ell = shared.len();
        // differing digits at the free position ell+1
        let u = rng.random_range(m..=spec.big_m);
        let v = loop {
            let v = rng.random_range(m..=spec.big_m);
            if v != u {
                break v;
            }
        };
        // independent admissible tails to the truncation depth
        let mut depth_t = ell + 48;
        loop {
            let extend = |rng: &mut ChaCha8Rng, first: u64| -> Vec<u64> {
                let mut w = shared.clone();
                w.push(first);
                while w.len() < depth_t {
                    let pos = w.len() as u64 + 1;
                    w.push(match EtaSpec::insert_position(pos) {
                        Some(k) => spec.insert_value(k),
                        None => rng.random_range(m..=spec.big_m),
                    });
                }
                w
            };
            let wx = extend(&mut rng, u);
            let wy = extend(&mut rng, v);

            let word_x = DigitSeq::prefix(m, wx)?;
            let word_y = DigitSeq::prefix(m, wy)?;
            let x_hat = evaluate(&word_x, depth_t)?;
            let y_hat = evaluate(&word_y, depth_t)?;
            let x_err = intervals::length(&word_x)?;
            let y_err = intervals::length(&word_y)?;

            let fx_word = erase_inserted(&word_x, spec, depth_t)?;
            let fy_word = erase_inserted(&word_y, spec, depth_t)?;
            let fx_hat = evaluate(&fx_word, fx_word.len())?;
            let fy_hat = evaluate(&fy_word, fy_word.len())?;
            let fx_err = intervals::length(&fx_word)?;
            let fy_err = intervals::length(&fy_word)?;

            // lhs upper bound and rhs lower bound, both in BigFloat
            let lhs_core = abs_quad(&fx_hat.sub(&fy_hat)?);
            let lhs_high = {
                let v = lhs_core.add(&fx_err)?.add(&fy_err)?;
                fx.quad(&v)
            };
            let dist_core = abs_quad(&x_hat.sub(&y_hat)?);
            let dist_low = dist_core.sub(&x_err)?.sub(&y_err)?;
            if dist_low.sign() != Ordering::Greater {
                depth_t += 16;
                continue;
            }
            let dist_low_bf = fx.quad(&dist_low);
            let rhs_low = {
                let powed = fx.pow(&dist_low_bf, &exponent);
                fx.mul(&holder_coeff, &powed)
            };

            // truncation error must stay below 1e-3 of the slack; deepen
            // the truncation until it does (bounded; a genuinely failing
            // pair is then counted as a violation)
            let err_total = {
                let v = x_err.add(&y_err)?.add(&fx_err)?.add(&fy_err)?;
                fx.quad(&v)
            };
            let slack = fx.sub(&rhs_low, &lhs_high);
            let budgeted = fx.mul(&slack, &fx.from_f64(1e-3));
            let too_coarse = !slack.is_positive()
                || matches!(err_total.cmp(&budgeted), Some(c) if c > 0);
            if too_coarse && depth_t < ell + 300 {
                depth_t += 16;
                continue;
            }

            let quotient = bigfloat::to_f64(&fx.div(&lhs_high, &rhs_low));
            if quotient > worst {
                worst = quotient;
            }
            if matches!(lhs_high.cmp(&rhs_low), Some(c) if c > 0) {
                violations += 1;
            }
            break;
        }
    }
    Ok(HolderReport {
        epsilon,
        pairs: sample_pairs,
        violations,
        worst_quotient: worst,
        n0,
        k1: k1_quad.to_f64(),
    })
}

fn abs_quad(x: &QuadValue) -> QuadValue {
    if x.sign() == Ordering::Less {
        x.neg()
    } else {
        x.clone()
    }
}

/// Result of one liminf trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub min_ratio: f64,
    /// Extra precision rounds needed before n_max digits were certified.
    pub retries: u32,
    /// Sanity flag: the running minimum was non-increasing.
    pub monotone: bool,
}

/// Summary of a liminf Monte Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct LiminfSummary {
    pub m: u64,
    pub n_max: u64,
    pub trials: u64,
    pub seed: u64,
    /// The a.e. constant `1/log(1+theta^2)`.
    pub target: f64,
    pub median_min_ratio: f64,
    pub per_trial: Vec<TrialResult>,
}

impl LiminfSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,min_ratio\n");
        for t in &self.per_trial {
            out.push_str(&format!("{},{},{}\n", t.trial, self.seed, t.min_ratio));
        }
        out
    }
}

/// Lévy-type denominator growth rate `h/2` with
/// `h = 2 * integral of log(1/x) d gamma`, used to size the sampling
/// precision. Simpson quadrature with an analytic head for the
/// logarithmic singularity at 0.
fn growth_rate(params: &MeasureParams) -> f64 {
    let theta = params.theta();
    let log_norm = (theta * theta).ln_1p();
    let w = |x: f64| theta / (log_norm * (1.0 + theta * x));
    let f = |x: f64| (1.0 / x).ln() * w(x);
    let eps = 1e-8 * theta;
    // head: integral of ln(1/x)*w(x) over [0, eps], w approximately w(0)
    let head = w(0.0) * eps * (1.0 + (1.0 / eps).ln());
    let n = 20_000usize;
    let h = (theta - eps) / n as f64;
    let mut acc = f(eps) + f(theta);
    for i in 1..n {
        let x = eps + i as f64 * h;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    head + acc * h / 3.0
}

fn draw_big_uniform(rng: &mut ChaCha8Rng, bits: u64) -> BigInt {
    let bytes = (bits as usize).div_ceil(8);
    let mut buf = vec![0u8; bytes];
    rng.fill_bytes(&mut buf);
    let mut v = BigInt::from_bytes_le(Sign::Plus, &buf);
    let excess = 8 * bytes as u64 - bits;
    v >>= excess;
    v
}

/// Samples a point of the invariant measure to `bits` of precision by
/// rejection (uniform proposal on `[0, theta]`, acceptance proportional to
/// the density `1/(1 + theta*x)`) and returns a certified digit stream
/// for it. Deterministic for a fixed generator state.
pub fn sample_gamma_expander(
    m: u64,
    bits: u64,
    rng: &mut ChaCha8Rng,
) -> Result<RealExpander> {
    let params = MeasureParams::new(m)?;
    let theta = params.theta();
    let upper = loop {
        let u = draw_big_uniform(rng, bits);
        let v: f64 = rng.random();
        let shift = bits.saturating_sub(53);
        let u_f = (&u >> shift).to_f64().unwrap_or(0.0) / 2f64.powi((bits - shift) as i32);
        if u_f <= 0.0 {
            continue;
        }
        if v * (1.0 + theta * theta * u_f) <= 1.0 {
            break u;
        }
    };
    // x = upper * theta / 2^bits
    match crate::highprec::exact_root(m) {
        Some(root) => {
            let x = BigRational::new(upper, BigInt::from(root) << bits);
            RealExpander::from_rational(m, &x, bits)
        }
        None => {
            let den = BigInt::one() << bits;
            let x = BigRational::new(upper, den);
            RealExpander::from_scaled_by_theta(m, &x, bits)
        }
    }
}

/// Precision needed to certify about `n_max` digits at modulus m, with
/// 30% headroom: denominators grow like `exp(rate * n)`, so a fraction
/// with a b-bit denominator carries about `b * ln 2 / rate` digits.
pub fn recommended_bits(m: u64, n_max: u64) -> Result<u64> {
    let params = MeasureParams::new(m)?;
    let rate = growth_rate(&params);
    Ok((1.3 * n_max as f64 * rate / std::f64::consts::LN_2) as u64 + 4096)
}

/// One trajectory: sample a point of the invariant measure at `bits` of
/// precision, expand it and record the min of `L_n loglog n / n` over
/// `n in [1000, n_max]`.
fn liminf_trial(
    m: u64,
    n_max: u64,
    rng: &mut ChaCha8Rng,
    bits: u64,
) -> Result<(f64, bool)> {
    let mut expander = sample_gamma_expander(m, bits, rng)?;
    let mut l_n = 0u64;
    let mut min_ratio = f64::INFINITY;
    let mut prev_running = f64::INFINITY;
    let mut monotone = true;
    for n in 1..=n_max {
        match expander.next_digit()? {
            Some(d) => {
                l_n = l_n.max(d);
                if n >= 1000 {
                    let ratio = l_n as f64 * loglog(n as f64) / n as f64;
                    min_ratio = min_ratio.min(ratio);
                    if min_ratio > prev_running {
                        monotone = false;
                    }
                    prev_running = min_ratio;
                }
            }
            None => {
                return Err(Error::PrecisionExhausted {
                    digits_emitted: n as usize - 1,
                    precision_bits: bits as usize,
                })
            }
        }
    }
    Ok((min_ratio, monotone))
}

/// Monte Carlo over the liminf law: `trials` trajectories sampled from the
/// invariant measure, each expanded to `n_max` digits in high-precision
/// mode; reports per-trajectory minima of the rescaled max series and
/// their median. Trial `i` uses stream `i+1` of the seed, so the result is
/// independent of the thread count.
pub fn liminf_monte_carlo(
    m: u64,
    n_max: u64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<LiminfSummary> {
    if n_max < 1000 {
        return Err(Error::InvalidParameter(
            "n_max must be >= 1000".to_string(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".to_string()));
    }
    let params = MeasureParams::new(m)?;
    let base_bits = recommended_bits(m, n_max)?;

    let threads = threads.max(1).min(trials as usize);
    let run_trial = |t: u64| -> Result<TrialResult> {
        let mut bits = base_bits;
        let mut retries = 0u32;
        let mut rng = rng::stream(seed, t + 1);
        loop {
            match liminf_trial(m, n_max, &mut rng, bits) {
                Ok((min_ratio, monotone)) => {
                    return Ok(TrialResult {
                        trial: t,
                        min_ratio,
                        retries,
                        monotone,
                    })
                }
                Err(Error::PrecisionExhausted { .. }) if retries < 4 => {
                    retries += 1;
                    bits = (bits as f64 * 1.6) as u64;
                }
                Err(e) => return Err(e),
            }
        }
    };

    let mut per_trial: Vec<TrialResult> = if threads <= 1 {
        (0..trials).map(run_trial).collect::<Result<_>>()?
    } else {
        let mut results: Vec<Option<Result<TrialResult>>> =
            (0..trials).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunks: Vec<Vec<u64>> = (0..threads)
                .map(|w| (0..trials).filter(|t| *t as usize % threads == w).collect())
                .collect();
            let mut handles = Vec::new();
            for chunk in chunks {
                handles.push(scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|t| (t, run_trial(t)))
                        .collect::<Vec<_>>()
                }));
            }
            for h in handles {
                for (t, r) in h.join().expect("worker panicked") {
                    results[t as usize] = Some(r);
                }
            }
        });
        results
            .into_iter()
            .map(|r| r.expect("all trials scheduled"))
            .collect::<Result<_>>()?
    };
    per_trial.sort_by_key(|t| t.trial);

    let mut minima: Vec<f64> = per_trial.iter().map(|t| t.min_ratio).collect();
    minima.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let median = if minima.len() % 2 == 1 {
        minima[minima.len() / 2]
    } else {
        0.5 * (minima[minima.len() / 2 - 1] + minima[minima.len() / 2])
    };

    Ok(LiminfSummary {
        m,
        n_max,
        trials,
        seed,
        target: params.normalizer(),
        median_min_ratio: median,
        per_trial,
    })
}
