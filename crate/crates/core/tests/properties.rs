//! Cross-module invariants checked on randomized corpora: exact arithmetic
//! laws, interval identities, measure calibration, sampler quality, and
//! the extreme-value construction.

use std::cmp::Ordering;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::Rng;
use thetacf_core::expansion::{self, DigitSeq};
use thetacf_core::extremes::{self, EtaSpec, Filler};
use thetacf_core::intervals;
use thetacf_core::measure::{self, MeasureParams};
use thetacf_core::quad::QuadValue;
use thetacf_core::rng;

fn random_quad(r: &mut impl Rng, m: u64) -> QuadValue {
    let an = r.random_range(-1000i64..=1000);
    let ad = r.random_range(1i64..=1000);
    let bn = r.random_range(-1000i64..=1000);
    let bd = r.random_range(1i64..=1000);
    QuadValue::from_parts(an, ad, bn, bd, m).unwrap()
}

#[test]
fn quad_field_laws_on_random_values() {
    let moduli = [1u64, 2, 3, 4, 5, 8, 9, 12];
    let mut r = rng::stream(101, 0);
    let mut checked = 0usize;
    while checked < 10_000 {
        let m = moduli[r.random_range(0..moduli.len())];
        let x = random_quad(&mut r, m);
        if x.is_zero() {
            continue;
        }
        // invert is an involution and a true inverse
        let inv = x.invert().unwrap();
        assert_eq!(inv.invert().unwrap(), x);
        assert_eq!(x.mul(&inv).unwrap(), QuadValue::one(m).unwrap());
        checked += 1;
    }
}

#[test]
fn compare_agrees_with_decimal_rendering() {
    let mut r = rng::stream(102, 0);
    for _ in 0..2000 {
        let m = [2u64, 3, 5, 7][r.random_range(0..4)];
        let x = random_quad(&mut r, m);
        let y = random_quad(&mut r, m);
        let fx: f64 = x.to_decimal(20).unwrap().parse().unwrap();
        let fy: f64 = y.to_decimal(20).unwrap().parse().unwrap();
        if (fx - fy).abs() > 1e-9 {
            let expected = if fx < fy {
                Ordering::Less
            } else {
                Ordering::Greater
            };
            assert_eq!(x.compare(&y).unwrap(), expected, "{x} vs {y}");
        }
    }
}

#[test]
fn floor_certificate_holds_exactly() {
    // floor_times_inv_theta(x) = n implies n <= 1/(x*theta) < n+1
    let mut r = rng::stream(103, 0);
    for _ in 0..500 {
        let m = [1u64, 2, 4, 7][r.random_range(0..4)];
        let den = r.random_range(50i64..5000);
        let num = r.random_range(1i64..=((den as f64 / (m as f64).sqrt()) as i64).max(1));
        let x = QuadValue::from_ratio(num, den, m).unwrap();
        let theta = QuadValue::theta(m).unwrap();
        if x.compare(&theta).unwrap() == Ordering::Greater || x.is_zero() {
            continue;
        }
        let n = x.floor_times_inv_theta().unwrap();
        let y = x.mul(&theta).unwrap().invert().unwrap();
        let lo = QuadValue::from_integer(n as i64, m).unwrap();
        let hi = QuadValue::from_integer(n as i64 + 1, m).unwrap();
        assert_ne!(y.compare(&lo).unwrap(), Ordering::Less);
        assert_eq!(y.compare(&hi).unwrap(), Ordering::Less);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn expand_evaluate_round_trip(
        m in prop::sample::select(vec![1u64, 2, 3, 5]),
        body in prop::collection::vec(0u64..6, 0..10),
        last in 1u64..7,
    ) {
        let mut digits: Vec<u64> = body.iter().map(|d| d + m).collect();
        digits.push(m + last);
        let word = DigitSeq::new(m, digits, true).unwrap();
        let x = expansion::evaluate(&word, word.len()).unwrap();
        let back = expansion::expand(&x, word.len() + 5).unwrap();
        prop_assert_eq!(back, word);
    }

    #[test]
    fn gauss_map_shifts_the_expansion(
        m in prop::sample::select(vec![1u64, 2, 4]),
        body in prop::collection::vec(0u64..5, 1..8),
        last in 1u64..6,
    ) {
        let mut digits: Vec<u64> = body.iter().map(|d| d + m).collect();
        digits.push(m + last);
        let word = DigitSeq::new(m, digits, true).unwrap();
        let x = expansion::evaluate(&word, word.len()).unwrap();
        let shifted = expansion::gauss_map(&x).unwrap();
        if !shifted.is_zero() {
            let tail = expansion::expand(&shifted, word.len() + 5).unwrap();
            prop_assert_eq!(tail.digits(), &word.digits()[1..]);
        }
    }
}

#[test]
fn interval_identities_on_random_words() {
    // exact length/endpoint agreement, nesting, sibling disjointness and
    // the two-sided q^2 bounds on deeper random words
    let mut r = rng::stream(104, 0);
    let theta = QuadValue::theta(1).unwrap();
    let one_plus_theta_sq = QuadValue::from_integer(2, 1).unwrap();
    for _ in 0..100 {
        let depth = r.random_range(5..=9);
        let digits: Vec<u64> = (0..depth).map(|_| r.random_range(1..=4)).collect();
        let word = DigitSeq::prefix(1, digits.clone()).unwrap();
        let iv = intervals::interval(&word).unwrap();
        let len = intervals::length(&word).unwrap();
        assert_eq!(iv.width(), len);

        // nesting in the parent
        let parent = DigitSeq::prefix(1, digits[..depth - 1].to_vec()).unwrap();
        let parent_iv = intervals::interval(&parent).unwrap();
        assert_ne!(iv.left.compare(&parent_iv.left).unwrap(), Ordering::Less);
        assert_ne!(
            iv.right.compare(&parent_iv.right).unwrap(),
            Ordering::Greater
        );

        // sibling disjointness around the last digit
        let mut sib_digits = digits.clone();
        sib_digits[depth - 1] += 1;
        let sibling = intervals::interval(&DigitSeq::prefix(1, sib_digits).unwrap()).unwrap();
        let (first, second) = if iv.left.compare(&sibling.left).unwrap() == Ordering::Less {
            (&iv, &sibling)
        } else {
            (&sibling, &iv)
        };
        assert_ne!(
            second.left.compare(&first.right).unwrap(),
            Ordering::Less
        );

        // theta/((1+theta^2) q^2) <= |I| <= theta/q^2
        let (_, q, _, _) = expansion::convergent_state(&word, depth).unwrap();
        let q_sq = q.mul(&q).unwrap();
        let upper = theta.div(&q_sq).unwrap();
        let lower = theta.div(&one_plus_theta_sq.mul(&q_sq).unwrap()).unwrap();
        assert_ne!(len.compare(&lower).unwrap(), Ordering::Less);
        assert_ne!(len.compare(&upper).unwrap(), Ordering::Greater);
    }
}

#[test]
fn q_ratio_bounds_on_random_words() {
    let mut r = rng::stream(105, 0);
    for _ in 0..200 {
        let m = [1u64, 2, 3][r.random_range(0..3)];
        let n = r.random_range(2..=8usize);
        let digits: Vec<u64> = (0..n).map(|_| m + r.random_range(0..6)).collect();
        let word = DigitSeq::prefix(m, digits).unwrap();
        let k = r.random_range(1..=n);
        assert!(expansion::check_q_ratio_bounds(&word, n, k).unwrap());
    }
}

#[test]
fn cdf_normalization_for_all_small_moduli() {
    for m in 1..=100u64 {
        let params = MeasureParams::new(m).unwrap();
        let v = measure::cdf(params.theta(), &params).unwrap();
        assert!((v - 1.0).abs() < 1e-14, "m={m}: cdf(theta) = {v}");
    }
}

#[test]
fn invariance_discrepancy_small_moduli() {
    for m in [1u64, 2, 4] {
        let params = MeasureParams::new(m).unwrap();
        let disc = measure::check_invariance(&params, 2).unwrap();
        assert!(disc < 1e-9, "m={m}: discrepancy {disc}");
    }
}

#[test]
fn sampler_matches_cdf_in_ks_distance() {
    let params = MeasureParams::new(1).unwrap();
    let mut r = rng::stream(7, 0);
    let mut xs = measure::sample(&params, &mut r, 1_000_000).unwrap();
    assert!(xs.iter().all(|&x| (0.0..=params.theta()).contains(&x)));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = measure::cdf(x, &params).unwrap();
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    assert!(d < 0.002, "KS distance {d}");
}

#[test]
fn sampler_golden_triple() {
    let params = MeasureParams::new(1).unwrap();
    let mut r = rng::stream(42, 0);
    let xs = measure::sample(&params, &mut r, 3).unwrap();
    let expected = [
        0.6042468965548167,
        0.9322414837791372,
        0.3449163116321706,
    ];
    for (got, want) in xs.iter().zip(expected) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
}

#[test]
fn ergodic_orbit_frequency_of_first_cylinder() {
    // frequency of the orbit visiting I_1(m), i.e. of digit m, over 1e5
    // iterations of 20 sampled points, within 0.01 of gamma(I_1(m))
    let m = 1u64;
    let params = MeasureParams::new(m).unwrap();
    let iv = intervals::interval(&DigitSeq::prefix(m, vec![m]).unwrap()).unwrap();
    let expected = measure::measure_of_interval(iv.left.to_f64(), iv.right.to_f64(), &params).unwrap();
    let n = 100_000u64;
    let bits = extremes::recommended_bits(m, n).unwrap();
    for trial in 0..20u64 {
        let mut r = rng::stream(4242, trial);
        let mut expander = extremes::sample_gamma_expander(m, bits, &mut r).unwrap();
        let mut hits = 0u64;
        for _ in 0..n {
            match expander.next_digit().unwrap() {
                Some(d) => {
                    if d == m {
                        hits += 1;
                    }
                }
                None => panic!("sampled point terminated"),
            }
        }
        let freq = hits as f64 / n as f64;
        assert!(
            (freq - expected).abs() < 0.01,
            "trial {trial}: freq {freq} vs gamma {expected}"
        );
    }
}

#[test]
fn covering_conditions_hold_sampled_at_m1_m100() {
    use thetacf_core::bounds::{self, VerifyMode};
    let mode = VerifyMode::Sampled {
        size: 300,
        seed: 2024,
    };
    let s = bounds::s_lower(1, 100).unwrap();
    let rep = bounds::verify_lower_condition(s, 1, 100, 3, mode).unwrap();
    assert_eq!(rep.violations, 0, "worst {}", rep.worst_ratio);
    let s = bounds::s_upper(1, 100).unwrap();
    let rep = bounds::verify_upper_condition(s, 1, 100, 3, mode).unwrap();
    assert_eq!(rep.violations, 0, "worst {}", rep.worst_ratio);
}

#[test]
fn closed_form_bounds_beat_jarnik_for_rcf() {
    use thetacf_core::bounds;
    for big_m in 9..=10_000u64 {
        let (j_lo, j_up) = bounds::jarnik_classic_bounds(big_m).unwrap();
        assert!(bounds::s_lower(1, big_m).unwrap() >= j_lo, "M = {big_m}");
        assert!(bounds::s_upper(1, big_m).unwrap() <= j_up, "M = {big_m}");
    }
}

#[test]
fn bracket_validity_scan() {
    use thetacf_core::bounds;
    for m in 1..=10_000u64 {
        for big_m in [2 * m + 2, 3 * m + 1, 10 * m, 100 * m] {
            let lo = bounds::s_lower(m, big_m).unwrap();
            let up = bounds::s_upper(m, big_m).unwrap();
            assert!(lo < up, "(m, M) = ({m}, {big_m}): {lo} vs {up}");
        }
    }
}

#[test]
fn lower_bound_trend_reaches_full_dimension() {
    use thetacf_core::bounds;
    for m in [1u64, 2, 10] {
        let mut prev = f64::NEG_INFINITY;
        let mut big_m = 2 * m + 2;
        let mut reached = false;
        while big_m < 2_000 * (m + 1) {
            let v = bounds::s_lower(m, big_m).unwrap();
            assert!(v > prev, "not increasing at (m, M) = ({m}, {big_m})");
            prev = v;
            if v > 0.99 {
                reached = true;
                break;
            }
            big_m += 1;
        }
        assert!(reached, "m = {m}: never exceeded 1 - 0.01");
    }
}

#[test]
fn insert_dominates_the_max_after_n0() {
    let spec = EtaSpec::new(1.0, 1, 5).unwrap();
    let n0 = spec.n0().unwrap();
    let digits: Vec<u64> = extremes::construct_eta_stream(&spec, Filler::Constant(1))
        .unwrap()
        .take(10_000)
        .collect();
    let word = DigitSeq::prefix(1, digits).unwrap();
    for n in (n0 as usize..=10_000).step_by(97) {
        let l_n = extremes::max_digit_prefix(&word, n).unwrap();
        let best_insert = (2..)
            .take_while(|k| k * k <= n as u64)
            .map(|k| spec.insert_value(k))
            .max()
            .unwrap();
        assert_eq!(l_n, best_insert.max(5), "n = {n}");
    }
}

#[test]
fn insert_count_bound_and_erase_inverse() {
    // c(n) < sqrt(n)
    for n in 1..=1_000_000u64 {
        assert!((EtaSpec::insert_count(n) as f64) < (n as f64).sqrt());
    }
    // erase(construct) is the filler word of length n - c(n)
    let spec = EtaSpec::new(1.0, 1, 5).unwrap();
    let digits: Vec<u64> = extremes::construct_eta_stream(&spec, Filler::Constant(1))
        .unwrap()
        .take(10_000)
        .collect();
    let word = DigitSeq::prefix(1, digits).unwrap();
    for n in 1..=10_000usize {
        let erased = extremes::erase_inserted(&word, &spec, n).unwrap();
        assert_eq!(erased.len() as u64, n as u64 - EtaSpec::insert_count(n as u64));
        assert!(erased.digits().iter().all(|&d| d == 1));
    }
}

#[test]
fn liminf_single_trial_golden() {
    let s = extremes::liminf_monte_carlo(1, 2000, 1, 7, 1).unwrap();
    assert!((s.per_trial[0].min_ratio - 7.696259074276224).abs() < 1e-12);
    assert!(s.per_trial[0].monotone);
}

#[test]
fn quad_floor_on_large_values() {
    // floor via decimal seed stays exact on big magnitudes
    let big = BigInt::from(10u64).pow(30);
    let x = QuadValue::from_parts(big.clone(), 1, 1, 3, 2).unwrap();
    assert_eq!(x.floor().unwrap(), big);
}
