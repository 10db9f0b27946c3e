//! Jarnik-type dimension bounds for bounded-digit sets, covering-condition
//! verifiers, a finite-depth covering-sum dimension estimator and table
//! emission.
//!
//! The covering conditions compare `|I_{n-1}|^s` against the sum of
//! `|I_n|^s` over all children. Powers are taken on exact cylinder lengths
//! rendered at 192-bit precision (about 58 decimal digits), and the
//! pass/fail comparison allows 1e-20 relative slack in favour of "no
//! violation" so that rounding can never manufacture one.

use astro_float::BigFloat;
use rand::Rng;
use serde::Serialize;

use crate::bigfloat::{self, FloatCtx};
use crate::error::{Error, Result};
use crate::expansion::{convergent_state, DigitSeq};
use crate::intervals::{self, DEFAULT_ENUM_BUDGET};
use crate::quad::QuadValue;
use crate::rng;

/// Relative slack granted to the passing side of a covering condition.
const CONDITION_SLACK: f64 = 1e-20;

/// One row of a bounds table.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsRow {
    pub m: u64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub s_low: f64,
    pub s_up: f64,
    pub jarnik_low: Option<f64>,
    pub jarnik_up: Option<f64>,
}

/// Which side of the covering condition is being verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `|I_{n-1}|^s <= sum_k |I_n(.., k)|^s` (dimension >= s when it holds
    /// for every prefix).
    Lower,
    /// `|I_{n-1}|^s >= sum_k |I_n(.., k)|^s` (dimension <= s).
    Upper,
}

/// Exhaustive or seeded-sample verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum VerifyMode {
    Exhaustive,
    Sampled { size: usize, seed: u64 },
}

/// Outcome of a covering-condition verification.
#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub s: f64,
    pub depth: usize,
    pub side: Side,
    pub mode: VerifyMode,
    pub prefixes_checked: u64,
    pub violations: u64,
    /// Max over prefixes of the failing-direction ratio; above 1 means a
    /// violation (ratios indistinguishable from 1 at f64 width print as 1).
    pub worst_ratio: f64,
    pub worst_prefix: Option<Vec<u64>>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn csv_header() -> &'static str {
        "s,depth,side,mode,prefixes_checked,violations,worst_ratio"
    }

    pub fn to_csv_row(&self) -> String {
        let mode = match self.mode {
            VerifyMode::Exhaustive => "exhaustive".to_string(),
            VerifyMode::Sampled { size, seed } => format!("sampled[{size};seed={seed}]"),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.s,
            self.depth,
            match self.side {
                Side::Lower => "lower",
                Side::Upper => "upper",
            },
            mode,
            self.prefixes_checked,
            self.violations,
            self.worst_ratio
        )
    }
}

fn check_pair(m: u64, big_m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidModulus(0));
    }
    if big_m < m {
        return Err(Error::InvalidParameter(format!(
            "digit bound M = {big_m} below m = {m}"
        )));
    }
    Ok(())
}

/// Closed-form lower bound `1 - 2(m+1) / ((M+1) log(m+1))`, valid for
/// `M > 2m+1`.
pub fn s_lower(m: u64, big_m: u64) -> Result<f64> {
    check_pair(m, big_m)?;
    if big_m <= 2 * m + 1 {
        return Err(Error::InvalidParameter(format!(
            "lower bound needs M > 2m+1 (m = {m}, M = {big_m})"
        )));
    }
    Ok(1.0 - 2.0 * (m as f64 + 1.0) / ((big_m as f64 + 1.0) * ((m as f64) + 1.0).ln()))
}

/// Closed-form upper bound `1 - (m/(M+2)) / log(2M(M+1)/m)`, valid for
/// `M >= m`.
pub fn s_upper(m: u64, big_m: u64) -> Result<f64> {
    check_pair(m, big_m)?;
    let mf = m as f64;
    let mm = big_m as f64;
    Ok(1.0 - mf / (mm + 2.0) / (2.0 * mm * (mm + 1.0) / mf).ln())
}

/// Jarnik's classical bounds for regular continued fractions (m = 1):
/// `(1 - 4/(M log 2), 1 - 1/(8M log M))`, valid for `M > 8`.
pub fn jarnik_classic_bounds(big_m: u64) -> Result<(f64, f64)> {
    if big_m <= 8 {
        return Err(Error::InvalidParameter(format!(
            "Jarnik bounds need M > 8 (got {big_m})"
        )));
    }
    let mm = big_m as f64;
    Ok((
        1.0 - 4.0 / (mm * std::f64::consts::LN_2),
        1.0 - 1.0 / (8.0 * mm * mm.ln()),
    ))
}

/// Rows for a list of `(m, M)` pairs.
///
/// Errors when a closed form is undefined or lands outside `(0, 1)` (the
/// row invariant), e.g. `(1, 4)` where the lower formula is negative.
pub fn bounds_table(specs: &[(u64, u64)]) -> Result<Vec<BoundsRow>> {
    specs
        .iter()
        .map(|&(m, big_m)| {
            let s_low = s_lower(m, big_m)?;
            let s_up = s_upper(m, big_m)?;
            for (name, v) in [("s_low", s_low), ("s_up", s_up)] {
                if !(0.0 < v && v < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} = {v} outside (0,1) for (m, M) = ({m}, {big_m})"
                    )));
                }
            }
            let (jarnik_low, jarnik_up) = if m == 1 && big_m > 8 {
                let (lo, up) = jarnik_classic_bounds(big_m)?;
                (Some(lo), Some(up))
            } else {
                (None, None)
            };
            Ok(BoundsRow {
                m,
                big_m,
                s_low,
                s_up,
                jarnik_low,
                jarnik_up,
            })
        })
        .collect()
}

/// The `(m, M)` pairs of the published tables.
pub const TABLE41_SPECS: [(u64, u64); 3] = [(1, 9), (1, 100), (1, 10_000)];
pub const TABLE42_SPECS: [(u64, u64); 3] = [(2, 7), (100, 203), (10_000, 30_000)];

/// CSV emission with the fixed header and 9-decimal rendering.
pub fn bounds_rows_to_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from("m,M,s_low,s_up,jarnik_low,jarnik_up\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.9},{:.9},{},{}\n",
            r.m,
            r.big_m,
            r.s_low,
            r.s_up,
            opt(r.jarnik_low),
            opt(r.jarnik_up)
        ));
    }
    out
}

/// Working state for condition checks: the exact pair `(q_n, q_{n-1})`
/// plus shared BigFloat context.
struct ConditionCtx {
    m: u64,
    big_m: u64,
    s: BigFloat,
    theta: QuadValue,
    theta_bf: BigFloat,
    slack: BigFloat,
    fx: FloatCtx,
    side: Side,
    violations: u64,
    prefixes: u64,
    worst_ratio: f64,
    worst_prefix: Option<Vec<u64>>,
}

impl ConditionCtx {
    fn new(s: f64, m: u64, big_m: u64, side: Side) -> Result<Self> {
        let mut fx = FloatCtx::new(bigfloat::DEFAULT_PREC);
        let theta = QuadValue::theta(m)?;
        let theta_bf = fx.quad(&theta);
        let s_bf = fx.from_f64(s);
        let one = fx.from_f64(1.0);
        let slack = fx.add(&one, &fx.from_f64(CONDITION_SLACK));
        Ok(ConditionCtx {
            m,
            big_m,
            s: s_bf,
            theta,
            theta_bf,
            slack,
            fx,
            side,
            violations: 0,
            prefixes: 0,
            worst_ratio: 0.0,
            worst_prefix: None,
        })
    }

    /// `|I|^s` from the exact linear factors `u*v` of the length
    /// denominator: `|I| = theta/(u*v)`.
    fn length_pow(&mut self, u: &QuadValue, v: &QuadValue) -> BigFloat {
        let u_bf = self.fx.quad(u);
        let v_bf = self.fx.quad(v);
        let len = self.fx.div(&self.theta_bf, &self.fx.mul(&u_bf, &v_bf));
        self.fx.pow(&len, &self.s.clone())
    }

    /// Checks one prefix given its exact `(q_n, q_{n-1})` state. Children
    /// share linear factors `c_k = k*theta*q + q_prev`, with
    /// `|I_child(k)| = theta / (c_k * c_{k+1})`.
    fn check_prefix(&mut self, prefix: &[u64], q: &QuadValue, q_prev: &QuadValue) -> Result<()> {
        let theta_q_prev = self.theta.mul(q_prev)?;
        let parent_v = q.add(&theta_q_prev)?;
        let lhs = self.length_pow(&q.clone(), &parent_v);

        let mut rhs = self.fx.from_f64(0.0);
        let mut factor = self.theta.mul_u64(self.m).mul(q)?.add(q_prev)?;
        for k in self.m..=self.big_m {
            let next = self.theta.mul_u64(k + 1).mul(q)?.add(q_prev)?;
            let child_pow = self.length_pow(&factor, &next);
            rhs = self.fx.add(&rhs, &child_pow);
            factor = next;
        }

        self.prefixes += 1;
        let (num, den) = match self.side {
            Side::Lower => (&lhs, &rhs),
            Side::Upper => (&rhs, &lhs),
        };
        let ratio = self.fx.div(num, den);
        let violated = matches!(ratio.cmp(&self.slack), Some(c) if c > 0);
        let ratio_f64 = bigfloat::to_f64(&ratio);
        if ratio_f64 > self.worst_ratio {
            self.worst_ratio = ratio_f64;
            if violated {
                self.worst_prefix = Some(prefix.to_vec());
            }
        }
        if violated {
            self.violations += 1;
            if self.worst_prefix.is_none() {
                self.worst_prefix = Some(prefix.to_vec());
            }
        }
        Ok(())
    }

    fn walk(
        &mut self,
        prefix: &mut Vec<u64>,
        q: &QuadValue,
        q_prev: &QuadValue,
        depth: usize,
    ) -> Result<()> {
        self.check_prefix(prefix, q, q_prev)?;
        if prefix.len() + 1 >= depth {
            return Ok(());
        }
        for k in self.m..=self.big_m {
            let q_child = self.theta.mul_u64(k).mul(q)?.add(q_prev)?;
            prefix.push(k);
            self.walk(prefix, &q_child, q, depth)?;
            prefix.pop();
        }
        Ok(())
    }

    fn into_report(self, s: f64, depth: usize, mode: VerifyMode) -> CoverReport {
        CoverReport {
            s,
            depth,
            side: self.side,
            mode,
            prefixes_checked: self.prefixes,
            violations: self.violations,
            worst_ratio: self.worst_ratio,
            worst_prefix: self.worst_prefix,
        }
    }
}

fn verify_condition(
    s: f64,
    m: u64,
    big_m: u64,
    depth: usize,
    mode: VerifyMode,
    side: Side,
) -> Result<CoverReport> {
    check_pair(m, big_m)?;
    if !(0.0 < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s must lie in (0,1), got {s}"
        )));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".to_string()));
    }
    let mut ctx = ConditionCtx::new(s, m, big_m, side)?;
    match mode {
        VerifyMode::Exhaustive => {
            // prefixes of length 0..depth-1
            let base = (big_m - m + 1) as u128;
            let mut total: u128 = 0;
            for level in 0..depth {
                total = total.saturating_add(base.saturating_pow(level as u32));
            }
            if total > DEFAULT_ENUM_BUDGET {
                return Err(Error::BudgetExceeded {
                    words: total,
                    budget: DEFAULT_ENUM_BUDGET,
                });
            }
            let q0 = QuadValue::one(m)?;
            let q_m1 = QuadValue::zero(m)?;
            let mut prefix = Vec::new();
            ctx.walk(&mut prefix, &q0, &q_m1, depth)?;
        }
        VerifyMode::Sampled { size, seed } => {
            let mut rng = rng::stream(seed, 0);
            let per_level = size.div_ceil(depth);
            for level in 0..depth {
                let exhaustive_count = intervals::word_count(level.max(1), m, big_m);
                let small = level == 0
                    || matches!(exhaustive_count, Some(c) if c <= per_level as u128);
                if small {
                    // cheap levels are verified exhaustively
                    if level == 0 {
                        let q0 = QuadValue::one(m)?;
                        let q_m1 = QuadValue::zero(m)?;
                        ctx.check_prefix(&[], &q0, &q_m1)?;
                    } else {
                        for digits in intervals::enumerate_words(level, m, big_m)? {
                            let word = DigitSeq::prefix(m, digits.clone())?;
                            let (_, q, _, q_prev) = convergent_state(&word, level)?;
                            ctx.check_prefix(&digits, &q, &q_prev)?;
                        }
                    }
                } else {
                    for _ in 0..per_level {
                        let digits: Vec<u64> =
                            (0..level).map(|_| rng.random_range(m..=big_m)).collect();
                        let word = DigitSeq::prefix(m, digits.clone())?;
                        let (_, q, _, q_prev) = convergent_state(&word, level)?;
                        ctx.check_prefix(&digits, &q, &q_prev)?;
                    }
                }
            }
        }
    }
    Ok(ctx.into_report(s, depth, mode))
}

/// Verifies the lower covering condition
/// `|I_{n-1}|^s <= sum_{k=m}^{M} |I_n(.., k)|^s` for every admissible
/// prefix up to `depth` (or a seeded sample).
pub fn verify_lower_condition(
    s: f64,
    m: u64,
    big_m: u64,
    depth: usize,
    mode: VerifyMode,
) -> Result<CoverReport> {
    verify_condition(s, m, big_m, depth, mode, Side::Lower)
}

/// Mirror image of [`verify_lower_condition`] with `>=` in place of `<=`.
pub fn verify_upper_condition(
    s: f64,
    m: u64,
    big_m: u64,
    depth: usize,
    mode: VerifyMode,
) -> Result<CoverReport> {
    verify_condition(s, m, big_m, depth, mode, Side::Upper)
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let t = *sum + term;
    *comp += if sum.abs() >= term.abs() {
        (*sum - t) + term
    } else {
        (term - t) + *sum
    };
    *sum = t;
}

/// Collects `ln |I_w|` over all words of the two deepest levels in one
/// walk over the word tree.
fn collect_ln_lengths(
    m: u64,
    big_m: u64,
    depth: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    struct Walker {
        m: u64,
        big_m: u64,
        depth: usize,
        theta: QuadValue,
        theta_bf: BigFloat,
        fx: FloatCtx,
        at_depth: Vec<f64>,
        at_prev: Vec<f64>,
    }
    impl Walker {
        fn ln_length(&mut self, q: &QuadValue, q_prev: &QuadValue) -> Result<f64> {
            let v = q.mul(&q.add(&self.theta.mul(q_prev)?)?)?;
            let v_bf = self.fx.quad(&v);
            let len = self.fx.div(&self.theta_bf.clone(), &v_bf);
            let ln = self.fx.ln(&len);
            Ok(bigfloat::to_f64(&ln))
        }
        fn walk(&mut self, level: usize, q: &QuadValue, q_prev: &QuadValue) -> Result<()> {
            if level == self.depth - 1 {
                let ln = self.ln_length(q, q_prev)?;
                self.at_prev.push(ln);
            }
            if level == self.depth {
                let ln = self.ln_length(q, q_prev)?;
                self.at_depth.push(ln);
                return Ok(());
            }
            for k in self.m..=self.big_m {
                let q_child = self.theta.mul_u64(k).mul(q)?.add(q_prev)?;
                self.walk(level + 1, &q_child, q)?;
            }
            Ok(())
        }
    }
    let mut fx = FloatCtx::new(bigfloat::DEFAULT_PREC);
    let theta = QuadValue::theta(m)?;
    let theta_bf = fx.quad(&theta);
    let mut w = Walker {
        m,
        big_m,
        depth,
        theta,
        theta_bf,
        fx,
        at_depth: Vec::new(),
        at_prev: Vec::new(),
    };
    let q0 = QuadValue::one(m)?;
    let q_m1 = QuadValue::zero(m)?;
    w.walk(0, &q0, &q_m1)?;
    Ok((w.at_prev, w.at_depth))
}

/// `sum over words in {m..M}^depth of |I_word|^s`.
///
/// Powers are taken on exact lengths at extended precision; accumulation is
/// Neumaier-compensated in word order, so the result is deterministic.
pub fn covering_sum(s: f64, m: u64, big_m: u64, depth: usize) -> Result<f64> {
    check_pair(m, big_m)?;
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".to_string()));
    }
    match intervals::word_count(depth, m, big_m) {
        Some(words) if words <= DEFAULT_ENUM_BUDGET => {}
        Some(words) => {
            return Err(Error::BudgetExceeded {
                words,
                budget: DEFAULT_ENUM_BUDGET,
            })
        }
        None => {
            return Err(Error::BudgetExceeded {
                words: u128::MAX,
                budget: DEFAULT_ENUM_BUDGET,
            })
        }
    }

    struct Walker {
        m: u64,
        big_m: u64,
        depth: usize,
        theta: QuadValue,
        theta_bf: BigFloat,
        s: BigFloat,
        fx: FloatCtx,
        sum: f64,
        comp: f64,
    }
    impl Walker {
        fn walk(&mut self, level: usize, q: &QuadValue, q_prev: &QuadValue) -> Result<()> {
            if level == self.depth {
                let v = q.mul(&q.add(&self.theta.mul(q_prev)?)?)?;
                let v_bf = self.fx.quad(&v);
                let len = self.fx.div(&self.theta_bf.clone(), &v_bf);
                let p = self.fx.pow(&len, &self.s.clone());
                neumaier_add(&mut self.sum, &mut self.comp, bigfloat::to_f64(&p));
                return Ok(());
            }
            for k in self.m..=self.big_m {
                let q_child = self.theta.mul_u64(k).mul(q)?.add(q_prev)?;
                self.walk(level + 1, &q_child, q)?;
            }
            Ok(())
        }
    }
    let mut fx = FloatCtx::new(bigfloat::DEFAULT_PREC);
    let theta = QuadValue::theta(m)?;
    let theta_bf = fx.quad(&theta);
    let s_bf = fx.from_f64(s);
    let mut w = Walker {
        m,
        big_m,
        depth,
        theta,
        theta_bf,
        s: s_bf,
        fx,
        sum: 0.0,
        comp: 0.0,
    };
    let q0 = QuadValue::one(m)?;
    let q_m1 = QuadValue::zero(m)?;
    w.walk(0, &q0, &q_m1)?;
    Ok(w.sum + w.comp)
}

/// A finite-depth dimension estimate with its certified bisection bracket.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub s_star: f64,
    pub bracket: (f64, f64),
    pub depth: usize,
    /// Closed-form bracket when defined, for at-a-glance comparison.
    pub closed_form: Option<(f64, f64)>,
}

/// Bisects on `s` for the depth-stability point of the covering sums: the
/// `s` where `Delta_s(depth)` stops growing relative to `Delta_s(depth-1)`.
///
/// This is an estimate, not a certified dimension; the returned bracket is
/// the final bisection interval of width <= tol.
pub fn estimate_dimension(m: u64, big_m: u64, depth: usize, tol: f64) -> Result<DimensionEstimate> {
    check_pair(m, big_m)?;
    if depth < 2 {
        return Err(Error::InvalidParameter("depth must be >= 2".to_string()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".to_string()));
    }
    match intervals::word_count(depth, m, big_m) {
        Some(words) if words <= DEFAULT_ENUM_BUDGET => {}
        _ => {
            return Err(Error::BudgetExceeded {
                words: intervals::word_count(depth, m, big_m).unwrap_or(u128::MAX),
                budget: DEFAULT_ENUM_BUDGET,
            })
        }
    }

    let (ln_prev, ln_depth) = collect_ln_lengths(m, big_m, depth)?;
    // h(s) = ln Delta_s(depth) - ln Delta_s(depth-1), decreasing in s;
    // its zero is where the covering sum is depth-stationary.
    let log_sum = |lns: &[f64], s: f64| -> f64 {
        // stabilized log-sum-exp with compensated accumulation
        let peak = lns.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(s * b));
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &l in lns {
            neumaier_add(&mut sum, &mut comp, (s * l - peak).exp());
        }
        peak + (sum + comp).ln()
    };
    let h = |s: f64| log_sum(&ln_depth, s) - log_sum(&ln_prev, s);

    let (mut lo, mut hi) = (0.01, 0.99);
    let h_lo = h(lo);
    let h_hi = h(hi);
    if h_lo <= 0.0 {
        // covering sums shrink with depth already at tiny s: the finite
        // construction is degenerate (e.g. a single word per depth) and the
        // estimate collapses to 0
        return Ok(DimensionEstimate {
            s_star: 0.0,
            bracket: (0.0, lo),
            depth,
            closed_form: None,
        });
    }
    if h_hi >= 0.0 {
        return Err(Error::NonBracketing {
            lo,
            hi,
            h_lo,
            h_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let closed_form = match (s_lower(m, big_m), s_upper(m, big_m)) {
        (Ok(a), Ok(b)) => Some((a, b)),
        _ => None,
    };
    Ok(DimensionEstimate {
        s_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        depth,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_published_values() {
        // Table 4.1 (m = 1)
        assert!((s_lower(1, 9).unwrap() - 0.422921983).abs() < 5e-9);
        assert!((s_upper(1, 9).unwrap() - 0.982493771).abs() < 5e-9);
        assert!((s_lower(1, 100).unwrap() - 0.942863562).abs() < 5e-9);
        assert!((s_upper(1, 100).unwrap() - 0.999011047).abs() < 5e-9);
        assert!((s_lower(1, 10_000).unwrap() - 0.999422979).abs() < 5e-9);
        assert!((s_upper(1, 10_000).unwrap() - 0.999994769).abs() < 5e-9);
        // Table 4.2
        assert!((s_lower(2, 7).unwrap() - 0.31732058).abs() < 5e-9);
        assert!((s_upper(2, 7).unwrap() - 0.944794333).abs() < 5e-9);
        assert!((s_lower(100, 203).unwrap() - 0.785445239).abs() < 5e-9);
        assert!((s_upper(100, 203).unwrap() - 0.927402458).abs() < 5e-9);
        assert!((s_lower(10_000, 30_000).unwrap() - 0.927613546).abs() < 5e-9);
        assert!((s_upper(10_000, 30_000).unwrap() - 0.972455324).abs() < 5e-9);
        // Jarnik columns
        let (lo, up) = jarnik_classic_bounds(9).unwrap();
        assert!((lo - 0.358802204).abs() < 5e-9);
        assert!((up - 0.993678894).abs() < 5e-9);
        let (lo, up) = jarnik_classic_bounds(10_000).unwrap();
        assert!((lo - 0.999422922).abs() < 5e-9);
        assert!((up - 0.999998642).abs() < 5e-9);
    }

    #[test]
    fn preconditions() {
        assert!(s_lower(1, 3).is_err());
        assert!(s_upper(3, 2).is_err());
        assert!(jarnik_classic_bounds(8).is_err());
        // (1, 4): formula defined but lands below 0, so the row is refused
        assert!(s_lower(1, 4).unwrap() < 0.0);
        assert!(bounds_table(&[(1, 4)]).is_err());
    }

    #[test]
    fn table_csv_layout() {
        let rows = bounds_table(&TABLE41_SPECS).unwrap();
        let csv = bounds_rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "m,M,s_low,s_up,jarnik_low,jarnik_up");
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,9,0.422921984,0.982493771,0.358802204,0.993678894"));

        let rows = bounds_table(&TABLE42_SPECS).unwrap();
        let csv = bounds_rows_to_csv(&rows);
        // no Jarnik columns away from m=1
        assert!(csv.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn verify_conditions_small() {
        let s = s_lower(1, 9).unwrap();
        let rep = verify_lower_condition(s, 1, 9, 2, VerifyMode::Exhaustive).unwrap();
        assert!(rep.passed(), "worst ratio {}", rep.worst_ratio);
        assert_eq!(rep.prefixes_checked, 10); // empty word + 9 first digits

        let rep = verify_lower_condition(0.999, 1, 9, 2, VerifyMode::Exhaustive).unwrap();
        assert!(!rep.passed());
        assert!(rep.worst_prefix.is_some());

        let s = s_upper(1, 9).unwrap();
        let rep = verify_upper_condition(s, 1, 9, 2, VerifyMode::Exhaustive).unwrap();
        assert!(rep.passed(), "worst ratio {}", rep.worst_ratio);

        let rep = verify_upper_condition(0.2, 1, 9, 2, VerifyMode::Exhaustive).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn verify_sampled_mode_is_deterministic() {
        let s = s_upper(1, 40).unwrap();
        let mode = VerifyMode::Sampled { size: 50, seed: 11 };
        let a = verify_upper_condition(s, 1, 40, 3, mode).unwrap();
        let b = verify_upper_condition(s, 1, 40, 3, mode).unwrap();
        assert_eq!(a.prefixes_checked, b.prefixes_checked);
        assert_eq!(a.worst_ratio, b.worst_ratio);
        assert!(a.passed());
    }

    #[test]
    fn covering_sum_examples() {
        // s = 0 counts words
        assert_eq!(covering_sum(0.0, 1, 3, 2).unwrap().round(), 9.0);
        // s = 1 is the Lebesgue size of the cover, below theta
        for (m, big_m) in [(1u64, 5u64), (2, 6)] {
            let total = covering_sum(1.0, m, big_m, 3).unwrap();
            assert!(total > 0.0 && total < 1.0 / (m as f64).sqrt());
        }
        // budget
        assert!(matches!(
            covering_sum(0.5, 1, 100, 5),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn covering_sum_monotone_between_bounds() {
        // below the dimension the sums grow with depth, above they shrink
        let grow = covering_sum(0.7, 1, 9, 5).unwrap() / covering_sum(0.7, 1, 9, 4).unwrap();
        assert!(grow > 1.0);
        let shrink = covering_sum(0.99, 1, 9, 5).unwrap() / covering_sum(0.99, 1, 9, 4).unwrap();
        assert!(shrink < 1.0);
    }

    #[test]
    fn estimate_dimension_basics() {
        // single-digit alphabet: countable set, estimate collapses to 0
        let est = estimate_dimension(1, 1, 4, 1e-3).unwrap();
        assert_eq!(est.s_star, 0.0);

        let est = estimate_dimension(1, 9, 4, 1e-3).unwrap();
        assert!(est.bracket.1 - est.bracket.0 <= 1e-3);
        let (lo, up) = est.closed_form.unwrap();
        assert!(est.s_star >= lo - 0.05 && est.s_star <= up + 0.05);
    }
}
