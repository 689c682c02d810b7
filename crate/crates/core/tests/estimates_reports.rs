//! Lab-level properties: determinism of the reports, the constant-1
//! interpolation oracle at scale, and stability of fitted constants under
//! sample doubling, grid doubling, and amplitude rescaling.

use hnls_core::estimates::{
    reports_to_csv, verify_difference_lemma, verify_fractional_chain, verify_interpolation,
    verify_taylor_lemma, EstimateReport, FieldSampler,
};
use hnls_core::grid::{Grid, TorusGrid};
use hnls_core::nonlin::Power;

fn sampler(seed: u64, n: usize, gamma: f64, amplitude: f64) -> FieldSampler {
    FieldSampler::new(seed, Grid::Torus(TorusGrid::new(n).unwrap()), gamma, amplitude)
}

#[test]
fn reports_are_byte_identical_under_the_same_seed() {
    let p = Power::new(3.0).unwrap();
    let run = || -> String {
        let s = sampler(12345, 64, 2.0, 1.0);
        let mut reports: Vec<EstimateReport> = Vec::new();
        reports.push(verify_fractional_chain(&s, &p, 2.0, 64).unwrap());
        reports.extend(verify_difference_lemma(&s, &p, 64).unwrap());
        reports.extend(verify_taylor_lemma(&s, &p, 64).unwrap());
        reports.push(verify_interpolation(&s, &p, 3.0, 64).unwrap());
        reports_to_csv(&reports)
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "identical seeds must give identical CSV bytes");
    assert!(a.starts_with(EstimateReport::CSV_HEADER));
    assert_eq!(a.lines().count(), 1 + 7);
}

#[test]
fn interpolation_oracle_sees_no_violation_over_ten_thousand_samples() {
    let p = Power::new(3.0).unwrap();
    let s = sampler(2024, 256, 1.5, 1.0);
    let q = (2.0 + (p.value() + 1.0)) / 2.0;
    let report = verify_interpolation(&s, &p, q, 10_000).unwrap();
    assert!(
        !report.violated,
        "constant-1 inequality violated: max ratio {}",
        report.max_ratio
    );
    assert!(report.max_ratio <= 1.0 + 1e-12);
    assert_eq!(report.samples, 10_000);
}

#[test]
fn fractional_chain_constant_is_stable_under_sample_and_grid_doubling() {
    let p = Power::new(3.0).unwrap();
    let s = 2.0;
    let base = verify_fractional_chain(&sampler(31415, 64, 2.0, 1.0), &p, s, 1000).unwrap();
    let doubled = verify_fractional_chain(&sampler(31415, 64, 2.0, 1.0), &p, s, 2000).unwrap();
    let rel_samples = (doubled.max_ratio - base.max_ratio).abs() / base.max_ratio;
    assert!(
        rel_samples < 0.2,
        "sample doubling moved the constant {rel_samples:.3}: {} -> {}",
        base.max_ratio,
        doubled.max_ratio
    );

    let finer = verify_fractional_chain(&sampler(31415, 128, 2.0, 1.0), &p, s, 1000).unwrap();
    let rel_grid = (finer.max_ratio - base.max_ratio).abs() / base.max_ratio;
    assert!(
        rel_grid < 0.2,
        "grid doubling moved the constant {rel_grid:.3}: {} -> {}",
        base.max_ratio,
        finer.max_ratio
    );
}

#[test]
fn difference_and_taylor_constants_are_stable_under_doubling() {
    let p = Power::new(3.0).unwrap();
    let diff_base = verify_difference_lemma(&sampler(99, 64, 2.0, 1.0), &p, 500).unwrap();
    let diff_more = verify_difference_lemma(&sampler(99, 64, 2.0, 1.0), &p, 1000).unwrap();
    let diff_fine = verify_difference_lemma(&sampler(99, 128, 2.0, 1.0), &p, 500).unwrap();
    for ((a, b), c) in diff_base.iter().zip(&diff_more).zip(&diff_fine) {
        let rel_b = (b.max_ratio - a.max_ratio).abs() / a.max_ratio;
        let rel_c = (c.max_ratio - a.max_ratio).abs() / a.max_ratio;
        assert!(rel_b < 0.2, "{}: sample doubling {rel_b:.3}", a.lemma.as_str());
        assert!(rel_c < 0.2, "{}: grid doubling {rel_c:.3}", a.lemma.as_str());
    }

    let tay_base = verify_taylor_lemma(&sampler(7, 64, 2.0, 1.0), &p, 500).unwrap();
    let tay_more = verify_taylor_lemma(&sampler(7, 64, 2.0, 1.0), &p, 1000).unwrap();
    let tay_fine = verify_taylor_lemma(&sampler(7, 128, 2.0, 1.0), &p, 500).unwrap();
    for ((a, b), c) in tay_base.iter().zip(&tay_more).zip(&tay_fine) {
        let rel_b = (b.max_ratio - a.max_ratio).abs() / a.max_ratio;
        let rel_c = (c.max_ratio - a.max_ratio).abs() / a.max_ratio;
        assert!(rel_b < 0.2, "{}: sample doubling {rel_b:.3}", a.lemma.as_str());
        assert!(rel_c < 0.2, "{}: grid doubling {rel_c:.3}", a.lemma.as_str());
    }
}

#[test]
fn fitted_constants_are_finite_across_powers() {
    for p_val in [3.0, 4.0, 5.0] {
        let p = Power::new(p_val).unwrap();
        let s = sampler(555, 64, 2.0, 1.0);
        for r in verify_taylor_lemma(&s, &p, 200).unwrap() {
            assert!(
                r.max_ratio.is_finite() && r.max_ratio > 0.0,
                "p = {p_val}, {}: {}",
                r.lemma.as_str(),
                r.max_ratio
            );
        }
        for r in verify_difference_lemma(&s, &p, 200).unwrap() {
            assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        }
    }
}

#[test]
fn quantiles_are_ordered_and_below_the_max() {
    let p = Power::new(3.0).unwrap();
    let s = sampler(888, 64, 2.0, 1.0);
    let r = verify_fractional_chain(&s, &p, 1.0, 500).unwrap();
    assert!(r.q50 <= r.q90 && r.q90 <= r.q99 && r.q99 <= r.max_ratio);
}
