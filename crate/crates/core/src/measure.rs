//! The invariant probability of the theta-shift: density, CDF,
//! inverse-CDF sampling, interval measure, and a numerical check of
//! invariance under the map.
//!
//! Everything here runs in double precision; the closed forms are log
//! based, so 1e-12 level accuracy is available throughout.

use rand::Rng;

use crate::error::{Error, Result};
use crate::expansion::DigitSeq;
use crate::intervals;

/// Parameters of the invariant measure for a fixed `theta^2 = 1/m`:
/// density `theta / (log(1+theta^2) * (1 + theta*x))` on `[0, theta]`.
#[derive(Clone, Copy, Debug)]
pub struct MeasureParams {
    m: u64,
    theta: f64,
    /// `log(1 + theta^2)`, the normalizing constant's reciprocal log.
    log_norm: f64,
}

impl MeasureParams {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus(0));
        }
        let theta = 1.0 / (m as f64).sqrt();
        Ok(MeasureParams {
            m,
            theta,
            log_norm: (theta * theta).ln_1p(),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `1/log(1+theta^2)`, the liminf constant of the extreme-value law.
    pub fn normalizer(&self) -> f64 {
        1.0 / self.log_norm
    }

    fn check_domain(&self, x: f64, what: &'static str) -> Result<()> {
        if x.is_nan() || x < 0.0 || x > self.theta * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                what,
                detail: format!("need 0 <= x <= theta = {}, got {x}", self.theta),
            });
        }
        Ok(())
    }
}

/// Invariant density at `x`.
pub fn density(x: f64, params: &MeasureParams) -> Result<f64> {
    params.check_domain(x, "density input")?;
    Ok(params.theta / (params.log_norm * (1.0 + params.theta * x)))
}

/// `gamma([0, x]) = log(1 + theta*x) / log(1 + theta^2)`.
pub fn cdf(x: f64, params: &MeasureParams) -> Result<f64> {
    params.check_domain(x, "cdf input")?;
    Ok((params.theta * x).ln_1p() / params.log_norm)
}

/// Inverse of [`cdf`]: `((1+theta^2)^u - 1) / theta`.
pub fn inverse_cdf(u: f64, params: &MeasureParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfDomain {
            what: "inverse_cdf input",
            detail: format!("need 0 <= u <= 1, got {u}"),
        });
    }
    Ok((u * params.log_norm).exp_m1() / params.theta)
}

/// `gamma((a, b)) = cdf(b) - cdf(a)`.
pub fn measure_of_interval(a: f64, b: f64, params: &MeasureParams) -> Result<f64> {
    if a > b {
        return Err(Error::OutOfDomain {
            what: "interval",
            detail: format!("need a <= b, got a = {a}, b = {b}"),
        });
    }
    Ok(cdf(b, params)? - cdf(a, params)?)
}

/// i.i.d. draws from the invariant measure via inverse-CDF sampling.
/// Deterministic for a fixed generator state.
pub fn sample<R: Rng>(params: &MeasureParams, rng: &mut R, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".to_string()));
    }
    (0..count)
        .map(|_| inverse_cdf(rng.random::<f64>(), params))
        .collect()
}

/// Tuning knobs for [`check_invariance_with`].
#[derive(Clone, Copy, Debug)]
pub struct InvarianceOptions {
    /// Fundamental intervals use digits in `[m, m+cutoff]`.
    pub cutoff: u64,
    /// Hard cap on explicitly summed preimage branches.
    pub max_branches: u64,
    /// Branch summation also stops once a single branch measure drops
    /// below this bound; the remaining tail is added analytically.
    pub branch_floor: f64,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        InvarianceOptions {
            cutoff: 3,
            max_branches: 1_000_000,
            branch_floor: 1e-14,
        }
    }
}

/// Measure of `T^{-1}((a,b))` by summing preimage branches
/// `x = 1/(y + k*theta), y in (a,b)` for `k >= m` through the CDF, plus the
/// telescoped analytic tail of the neglected branches.
fn preimage_measure(a: f64, b: f64, params: &MeasureParams, opts: &InvarianceOptions) -> f64 {
    let theta = params.theta;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Neumaier compensation
    let mut k = params.m;
    loop {
        let hi = cdf(1.0 / (a + k as f64 * theta), params).expect("in range");
        let lo = cdf(1.0 / (b + k as f64 * theta), params).expect("in range");
        let term = hi - lo;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        k += 1;
        if term < opts.branch_floor || k - params.m >= opts.max_branches {
            break;
        }
    }
    // branches >= k telescope to gamma of (1/(b+k*theta), 1/(a+k*theta))
    // collapsed across k: log((b+k*theta)/(a+k*theta)) / log_norm
    let kt = k as f64 * theta;
    let tail = ((b + kt) / (a + kt)).ln() / params.log_norm;
    sum + comp + tail
}

/// Maximum absolute difference between `gamma(A)` and `gamma(T^{-1}A)` over
/// every fundamental interval `A` of order <= depth with digits in
/// `[m, m+cutoff]`.
pub fn check_invariance_with(
    params: &MeasureParams,
    depth: usize,
    opts: &InvarianceOptions,
) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".to_string()));
    }
    let m = params.m;
    let mut worst = 0.0f64;
    for order in 1..=depth {
        for digits in intervals::enumerate_words(order, m, m + opts.cutoff)? {
            let word = DigitSeq::prefix(m, digits)?;
            let iv = intervals::interval(&word)?;
            let (a, b) = (iv.left.to_f64(), iv.right.to_f64());
            let direct = measure_of_interval(a, b, params)?;
            let pulled_back = preimage_measure(a, b, params, opts);
            worst = worst.max((direct - pulled_back).abs());
        }
    }
    Ok(worst)
}

/// [`check_invariance_with`] under default options.
pub fn check_invariance(params: &MeasureParams, depth: usize) -> Result<f64> {
    check_invariance_with(params, depth, &InvarianceOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn p(m: u64) -> MeasureParams {
        MeasureParams::new(m).unwrap()
    }

    #[test]
    fn density_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((density(0.0, &p(1)).unwrap() - 1.0 / ln2).abs() < 1e-12);
        assert!((density(1.0, &p(1)).unwrap() - 1.0 / (2.0 * ln2)).abs() < 1e-12);
        assert!((density(0.0, &p(4)).unwrap() - 0.5 / (1.25f64).ln()).abs() < 1e-12);
        assert!(density(-0.1, &p(1)).is_err());
        assert!(density(0.9, &p(4)).is_err());
    }

    #[test]
    fn cdf_examples() {
        for m in [1u64, 2, 4, 9] {
            let params = p(m);
            assert!((cdf(params.theta(), &params).unwrap() - 1.0).abs() < 1e-14);
            assert_eq!(cdf(0.0, &params).unwrap(), 0.0);
        }
        // m=1: inverse_cdf(1/2) = sqrt(2) - 1
        let x = inverse_cdf(0.5, &p(1)).unwrap();
        assert!((x - (2f64.sqrt() - 1.0)).abs() < 1e-14);
        // m=1, gamma((0, 1/2)) = log(3/2)/log 2
        let v = measure_of_interval(0.0, 0.5, &p(1)).unwrap();
        assert!((v - 1.5f64.ln() / std::f64::consts::LN_2).abs() < 1e-14);
        assert!(measure_of_interval(0.5, 0.1, &p(1)).is_err());
    }

    #[test]
    fn cdf_inverse_round_trip() {
        // a 10^4-point grid across four moduli
        for m in [1u64, 3, 4, 10] {
            let params = p(m);
            for i in 0..=2500 {
                let x = params.theta() * i as f64 / 2500.0;
                let u = cdf(x, &params).unwrap();
                let back = inverse_cdf(u, &params).unwrap();
                assert!((back - x).abs() < 1e-12, "m={m} x={x} back={back}");
            }
        }
    }

    #[test]
    fn invariance_whole_space_and_first_cylinders() {
        // full space: both sides are 1
        let params = p(1);
        let whole = preimage_measure(0.0, 1.0, &params, &InvarianceOptions::default());
        assert!((whole - 1.0).abs() < 1e-12);

        // first cylinders I_1(m) at m = 1 and m = 2
        for m in [1u64, 2] {
            let params = p(m);
            let disc = check_invariance(&params, 1).unwrap();
            assert!(disc < 1e-10, "m={m} disc={disc}");
        }
    }

    #[test]
    fn sampling_is_in_range_and_reproducible() {
        let params = p(2);
        let mut rng = rng::stream(42, 0);
        let xs = sample(&params, &mut rng, 1000).unwrap();
        assert!(xs.iter().all(|&x| (0.0..=params.theta()).contains(&x)));
        let mut rng = rng::stream(42, 0);
        let ys = sample(&params, &mut rng, 1000).unwrap();
        assert_eq!(xs, ys);
        assert!(sample(&params, &mut rng, 0).is_err());
    }
}
