//! Monte-Carlo behavior: determinism, power scaling, refusals and slope targets.

use irdof::sim::{estimate_dof, noise_amplification, run_trial, Scheme, SimOptions};
use irdof::SchemeParams;

fn reference() -> Scheme {
    Scheme::build(&SchemeParams::cir(3, 2, 2), 7).unwrap()
}

#[test]
fn fixed_seed_is_reproducible() {
    let s = reference();
    let a = estimate_dof(&s, (40.0, 60.0), 10, 3, SimOptions::default()).unwrap();
    let b = estimate_dof(&s, (40.0, 60.0), 10, 3, SimOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn refuses_short_or_low_snr_pairs() {
    let s = reference();
    let opts = SimOptions::default();
    assert!(estimate_dof(&s, (40.0, 60.0), 9, 0, opts).is_err());
    assert!(estimate_dof(&s, (20.0, 60.0), 10, 0, opts).is_err());
    assert!(estimate_dof(&s, (40.0, 50.0), 10, 0, opts).is_err());
    assert!(estimate_dof(&s, (40.0, 60.0), 10, 0, SimOptions { noise: false, ..opts }).is_err());
}

/// The spread between streams is a fixed zero-forcing noise-enhancement offset: every
/// stream's SINR tracks the SNR one for one, so no residual interference limits it.
#[test]
fn sinr_offsets_are_snr_independent() {
    let s = reference();
    let lo = run_trial(&s, 40.0, 0, 4, SimOptions::default()).unwrap();
    let hi = run_trial(&s, 60.0, 0, 4, SimOptions::default()).unwrap();
    assert_eq!(hi.sinr_db.len(), 5);
    for (a, b) in lo.sinr_db.iter().zip(&hi.sinr_db) {
        assert!((b - a - 20.0).abs() < 0.5, "{a} dB -> {b} dB");
    }
}

#[test]
fn three_db_more_power_adds_one_bit_per_stream_at_high_snr() {
    let s = reference();
    let a = run_trial(&s, 60.0, 2, 1, SimOptions::default()).unwrap();
    let b = run_trial(&s, 60.0 + 10.0 * 2f64.log10(), 2, 1, SimOptions::default()).unwrap();
    for (x, y) in a.stream_rates.iter().zip(&b.stream_rates) {
        assert!((y - x - 1.0).abs() < 0.05, "{x} -> {y}");
    }
}

#[test]
fn single_slot_scheme_three_users_has_slope_two() {
    let s = Scheme::build(&SchemeParams::simple(3, 2, 2), 4).unwrap();
    let quiet = run_trial(&s, 40.0, 0, 4, SimOptions { noise: false, ..SimOptions::default() }).unwrap();
    assert!(quiet.residual <= 1e-12);
    let est = estimate_dof(&s, (40.0, 60.0), 20, 4, SimOptions::default()).unwrap();
    assert!((est.dof_hat - 2.0).abs() <= 0.2, "{}", est.dof_hat);
}

#[test]
fn single_stream_baseline_has_unit_slope() {
    let s = Scheme::build(&SchemeParams::simple(2, 1, 1), 9).unwrap();
    let est = estimate_dof(&s, (40.0, 60.0), 20, 9, SimOptions::default()).unwrap();
    assert!((est.dof_hat - 1.0).abs() <= 0.05, "{}", est.dof_hat);
}

#[test]
fn analytic_noise_ratio_is_at_least_one() {
    for s in [reference(), Scheme::build(&SchemeParams::simple(6, 4, 4), 2).unwrap()] {
        let n = noise_amplification(&s);
        assert!(n.ratio >= 1.0);
        assert!(!n.flagged);
    }
}
