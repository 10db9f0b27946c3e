//! Python bindings for the theta-expansion toolkit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use num_rational::BigRational;
use num_traits::Zero;

use thetacf_core::bounds::{self, VerifyMode};
use thetacf_core::error::Error;
use thetacf_core::expansion::{self, DigitSeq};
use thetacf_core::extremes::{self, EtaSpec, Filler};
use thetacf_core::highprec::{ExpandStatus, RealExpander};
use thetacf_core::measure::{self, MeasureParams};
use thetacf_core::quad::QuadValue;
use thetacf_core::{intervals, rng};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rational(text: &str) -> PyResult<BigRational> {
    let bad = || PyValueError::new_err(format!("cannot parse rational `{text}`"));
    if let Some((n, d)) = text.split_once('/') {
        let n = n.trim().parse().map_err(|_| bad())?;
        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(PyValueError::new_err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, f)) = text.split_once('.') {
        let neg = i.trim_start().starts_with('-');
        let whole: num_bigint::BigInt = i.trim().parse().map_err(|_| bad())?;
        let frac_digits: num_bigint::BigInt = f.trim().parse().map_err(|_| bad())?;
        let scale = num_bigint::BigInt::from(10u32).pow(f.trim().len() as u32);
        let frac = BigRational::new(frac_digits, scale);
        let whole = BigRational::from_integer(whole);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let n: num_bigint::BigInt = text.trim().parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Exact element `a + b*theta` of Q(1/sqrt(m)) with `theta^2 = 1/m`.
#[pyclass(frozen)]
struct Quad {
    inner: QuadValue,
}

#[pymethods]
impl Quad {
    /// Quad("3/10", "0", 4) or Quad("1", "1/2", 2); a and b are rationals.
    #[new]
    #[pyo3(signature = (a, b, m))]
    fn new(a: &str, b: &str, m: u64) -> PyResult<Self> {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        Ok(Quad {
            inner: QuadValue::new(a, b, m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn theta(m: u64) -> PyResult<Self> {
        Ok(Quad {
            inner: QuadValue::theta(m).map_err(err)?,
        })
    }

    fn add(&self, other: &Quad) -> PyResult<Self> {
        Ok(Quad {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn sub(&self, other: &Quad) -> PyResult<Self> {
        Ok(Quad {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn mul(&self, other: &Quad) -> PyResult<Self> {
        Ok(Quad {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn invert(&self) -> PyResult<Self> {
        Ok(Quad {
            inner: self.inner.invert().map_err(err)?,
        })
    }

    fn neg(&self) -> Self {
        Quad {
            inner: self.inner.neg(),
        }
    }

    /// Exact comparison: -1, 0 or 1.
    fn cmp(&self, other: &Quad) -> PyResult<i32> {
        Ok(match self.inner.compare(&other.inner).map_err(err)? {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        })
    }

    /// Correctly rounded decimal string with `precision` fractional digits.
    fn decimal(&self, precision: usize) -> PyResult<String> {
        self.inner.to_decimal(precision).map_err(err)
    }

    /// floor(1/(x*theta)), the digit map.
    fn digit(&self) -> PyResult<u64> {
        self.inner.floor_times_inv_theta().map_err(err)
    }

    fn __float__(&self) -> f64 {
        self.inner.to_f64()
    }

    fn __repr__(&self) -> String {
        format!("Quad({}, m={})", self.inner, self.inner.modulus())
    }

    fn __eq__(&self, other: &Quad) -> bool {
        self.inner == other.inner
    }
}

/// Expand a point (rational string, decimal string) into digits.
#[pyfunction]
#[pyo3(signature = (m, x, count=30, precision=200))]
fn expand<'py>(py: Python<'py>, m: u64, x: &str, count: usize, precision: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = parse_rational(x)?;
    let (word, terminated) = if x.contains('.') {
        let bits = (precision as f64 * 3.33) as u64 + 64;
        let mut e = RealExpander::from_rational(m, &r, bits).map_err(err)?;
        let (word, status) = e.expand(count).map_err(err)?;
        (word, status == ExpandStatus::Terminated)
    } else {
        let v = QuadValue::new(r, BigRational::zero(), m).map_err(err)?;
        let word = expansion::expand(&v, count).map_err(err)?;
        let fin = word.is_finite();
        (word, fin)
    };
    let out = PyDict::new(py);
    out.set_item("digits", word.digits())?;
    out.set_item("terminated", terminated)?;
    Ok(out)
}

/// Exact convergent p_n/q_n of a digit word as decimal and exact strings.
#[pyfunction]
#[pyo3(signature = (m, digits, depth=None))]
fn evaluate<'py>(
    py: Python<'py>,
    m: u64,
    digits: Vec<u64>,
    depth: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let word = DigitSeq::prefix(m, digits).map_err(err)?;
    let depth = depth.unwrap_or(word.len());
    let (p, q, _, _) = expansion::convergent_state(&word, depth).map_err(err)?;
    let value = p.div(&q).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("p", p.to_string())?;
    out.set_item("q", q.to_string())?;
    out.set_item("value", value.to_decimal(15).map_err(err)?)?;
    Ok(out)
}

/// Exact cylinder-interval endpoints and length (decimal strings).
#[pyfunction]
fn interval<'py>(py: Python<'py>, m: u64, digits: Vec<u64>) -> PyResult<Bound<'py, PyDict>> {
    let word = DigitSeq::prefix(m, digits).map_err(err)?;
    let iv = intervals::interval(&word).map_err(err)?;
    let len = intervals::length(&word).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("left", iv.left.to_decimal(15).map_err(err)?)?;
    out.set_item("right", iv.right.to_decimal(15).map_err(err)?)?;
    out.set_item("length", len.to_decimal(15).map_err(err)?)?;
    out.set_item("left_closed", iv.left_closed)?;
    Ok(out)
}

#[pyfunction]
fn s_lower(m: u64, big_m: u64) -> PyResult<f64> {
    bounds::s_lower(m, big_m).map_err(err)
}

#[pyfunction]
fn s_upper(m: u64, big_m: u64) -> PyResult<f64> {
    bounds::s_upper(m, big_m).map_err(err)
}

#[pyfunction]
fn jarnik_bounds(big_m: u64) -> PyResult<(f64, f64)> {
    bounds::jarnik_classic_bounds(big_m).map_err(err)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (side, s, m, big_m, depth, samples=None, seed=0))]
fn verify_condition<'py>(
    py: Python<'py>,
    side: &str,
    s: f64,
    m: u64,
    big_m: u64,
    depth: usize,
    samples: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match samples {
        Some(size) => VerifyMode::Sampled { size, seed },
        None => VerifyMode::Exhaustive,
    };
    let report = match side {
        "lower" => bounds::verify_lower_condition(s, m, big_m, depth, mode).map_err(err)?,
        "upper" => bounds::verify_upper_condition(s, m, big_m, depth, mode).map_err(err)?,
        other => {
            return Err(PyValueError::new_err(format!(
                "side must be `lower` or `upper`, got `{other}`"
            )))
        }
    };
    let out = PyDict::new(py);
    out.set_item("passed", report.passed())?;
    out.set_item("violations", report.violations)?;
    out.set_item("prefixes_checked", report.prefixes_checked)?;
    out.set_item("worst_ratio", report.worst_ratio)?;
    Ok(out)
}

#[pyfunction]
fn covering_sum(s: f64, m: u64, big_m: u64, depth: usize) -> PyResult<f64> {
    bounds::covering_sum(s, m, big_m, depth).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, big_m, depth, tol=1e-3))]
fn estimate_dimension<'py>(
    py: Python<'py>,
    m: u64,
    big_m: u64,
    depth: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let est = bounds::estimate_dimension(m, big_m, depth, tol).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("s_star", est.s_star)?;
    out.set_item("bracket", est.bracket)?;
    out.set_item("closed_form", est.closed_form)?;
    Ok(out)
}

#[pyfunction]
fn density(m: u64, x: f64) -> PyResult<f64> {
    let params = MeasureParams::new(m).map_err(err)?;
    measure::density(x, &params).map_err(err)
}

#[pyfunction]
fn cdf(m: u64, x: f64) -> PyResult<f64> {
    let params = MeasureParams::new(m).map_err(err)?;
    measure::cdf(x, &params).map_err(err)
}

#[pyfunction]
fn inverse_cdf(m: u64, u: f64) -> PyResult<f64> {
    let params = MeasureParams::new(m).map_err(err)?;
    measure::inverse_cdf(u, &params).map_err(err)
}

#[pyfunction]
fn sample_measure(m: u64, count: usize, seed: u64) -> PyResult<Vec<f64>> {
    let params = MeasureParams::new(m).map_err(err)?;
    let mut r = rng::stream(seed, 0);
    measure::sample(&params, &mut r, count).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, depth, cutoff=3, branches=1_000_000))]
fn check_invariance(m: u64, depth: usize, cutoff: u64, branches: u64) -> PyResult<f64> {
    let params = MeasureParams::new(m).map_err(err)?;
    let opts = measure::InvarianceOptions {
        cutoff,
        max_branches: branches,
        branch_floor: 1e-14,
    };
    measure::check_invariance_with(&params, depth, &opts).map_err(err)
}

#[pyfunction]
fn gap_constant(m: u64, big_m: u64) -> PyResult<f64> {
    extremes::gap_constant(m, big_m).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (eta, m, big_m, depth, budget=10_000_000))]
fn check_gap_property<'py>(
    py: Python<'py>,
    eta: f64,
    m: u64,
    big_m: u64,
    depth: usize,
    budget: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = EtaSpec::new(eta, m, big_m).map_err(err)?;
    let report = extremes::check_gap_property(&spec, depth, budget).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("pairs_checked", report.pairs_checked)?;
    out.set_item("violations", report.violations)?;
    out.set_item("min_margin", report.min_margin)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (eta, m, big_m, epsilon, pairs=100, seed=0))]
fn check_holder<'py>(
    py: Python<'py>,
    eta: f64,
    m: u64,
    big_m: u64,
    epsilon: f64,
    pairs: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = EtaSpec::new(eta, m, big_m).map_err(err)?;
    let report = extremes::check_holder(&spec, epsilon, pairs, seed).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("pairs", report.pairs)?;
    out.set_item("violations", report.violations)?;
    out.set_item("worst_quotient", report.worst_quotient)?;
    out.set_item("n0", report.n0)?;
    Ok(out)
}

/// Ratio series of the eta-construction: returns (k0, final_ratio,
/// final_running_min).
#[pyfunction]
#[pyo3(signature = (eta, m, big_m, n_max, filler=None, seed=0))]
fn construct_ratio(
    eta: f64,
    m: u64,
    big_m: u64,
    n_max: u64,
    filler: Option<u64>,
    seed: u64,
) -> PyResult<(u64, f64, f64)> {
    let spec = EtaSpec::new(eta, m, big_m).map_err(err)?;
    let policy = match filler {
        Some(d) => Filler::Constant(d),
        None => Filler::Random { seed },
    };
    let stream = extremes::construct_eta_stream(&spec, policy).map_err(err)?;
    let series = extremes::ratio_series(stream, m, n_max).map_err(err)?;
    Ok((
        spec.k0().map_err(err)?,
        series.ratio_at(n_max).unwrap(),
        *series.running_min.last().unwrap(),
    ))
}

#[pyfunction]
#[pyo3(signature = (m, n_max, trials, seed=0, threads=1))]
fn liminf_monte_carlo<'py>(
    py: Python<'py>,
    m: u64,
    n_max: u64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let summary = extremes::liminf_monte_carlo(m, n_max, trials, seed, threads).map_err(err)?;
    let minima: Vec<f64> = summary.per_trial.iter().map(|t| t.min_ratio).collect();
    let out = PyDict::new(py);
    out.set_item("target", summary.target)?;
    out.set_item("median_min_ratio", summary.median_min_ratio)?;
    out.set_item("minima", minima)?;
    Ok(out)
}

#[pymodule]
fn thetacf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Quad>()?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(interval, m)?)?;
    m.add_function(wrap_pyfunction!(s_lower, m)?)?;
    m.add_function(wrap_pyfunction!(s_upper, m)?)?;
    m.add_function(wrap_pyfunction!(jarnik_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(verify_condition, m)?)?;
    m.add_function(wrap_pyfunction!(covering_sum, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(sample_measure, m)?)?;
    m.add_function(wrap_pyfunction!(check_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(gap_constant, m)?)?;
    m.add_function(wrap_pyfunction!(check_gap_property, m)?)?;
    m.add_function(wrap_pyfunction!(check_holder, m)?)?;
    m.add_function(wrap_pyfunction!(construct_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(liminf_monte_carlo, m)?)?;
    Ok(())
}
