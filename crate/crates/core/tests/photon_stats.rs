mod common;

use common::nbar;
use photon_discrim_core::photon_stats::{pmf, FEATURE_LEN};
use photon_discrim_core::{
    coherent_pmf, sample_counts, theoretical_feature_pmf, thermal_pmf, SourceKind, CANONICAL_NBAR,
};
use proptest::prelude::*;

const MILLION: usize = 1_000_000;

fn tv_distance_to_pmf(source: SourceKind, x: f64, counts: &[u32]) -> f64 {
    let mut hist = [0usize; 21];
    for &c in counts {
        hist[(c as usize).min(20)] += 1;
    }
    let n = counts.len() as f64;
    let mut analytic: Vec<f64> = (0..20).map(|k| pmf(source, k, nbar(x))).collect();
    analytic.push(1.0 - analytic.iter().sum::<f64>());
    0.5 * hist
        .iter()
        .zip(&analytic)
        .map(|(&h, p)| (h as f64 / n - p).abs())
        .sum::<f64>()
}

#[test]
fn coherent_sample_mean_within_three_standard_errors() {
    let s = sample_counts(SourceKind::Coherent, nbar(0.40), MILLION, 2024).unwrap();
    // sqrt(0.40 / 1e6) = 6.3e-4
    assert!((s.mean() - 0.40).abs() < 0.002, "mean {}", s.mean());
}

#[test]
fn dispersion_ratios_within_three_standard_errors() {
    // Delta-method standard errors of variance/mean from exact moments
    // (mpmath): 0.0037275 for thermal at 0.77, 0.0014142 for coherent at 0.40.
    let th = sample_counts(SourceKind::Thermal, nbar(0.77), MILLION, 7).unwrap();
    let ratio = th.variance() / th.mean();
    assert!(
        (ratio - 1.77).abs() < 3.0 * 0.003_727_5,
        "thermal ratio {ratio}"
    );

    let coh = sample_counts(SourceKind::Coherent, nbar(0.40), MILLION, 8).unwrap();
    let ratio = coh.variance() / coh.mean();
    assert!(
        (ratio - 1.0).abs() < 3.0 * 0.001_414_2,
        "coherent ratio {ratio}"
    );
}

#[test]
fn empirical_histograms_match_pmfs() {
    for (i, x) in CANONICAL_NBAR.into_iter().enumerate() {
        for source in SourceKind::ALL {
            let s = sample_counts(source, nbar(x), MILLION, 100 + i as u64).unwrap();
            let tv = tv_distance_to_pmf(source, x, s.counts());
            assert!(tv < 0.005, "{source} n̄={x}: TV {tv}");
        }
    }
}

#[test]
fn feature_pmfs_are_normalized_at_canonical_nbar() {
    for x in CANONICAL_NBAR {
        for source in SourceKind::ALL {
            let f = theoretical_feature_pmf(source, nbar(x));
            assert_eq!(f.len(), FEATURE_LEN);
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn pmfs_are_bounded_and_sum_to_one(x in 0.01f64..=1.0) {
        for source in SourceKind::ALL {
            let mut total = 0.0;
            for n in 0..=200 {
                let p = pmf(source, n, nbar(x));
                prop_assert!((0.0..=1.0).contains(&p));
                total += p;
            }
            prop_assert!(total >= 1.0 - 1e-12);
            prop_assert!(total <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn thermal_vacuum_exceeds_coherent_vacuum(x in 1e-6f64..50.0) {
        prop_assert!(thermal_pmf(0, nbar(x)) > coherent_pmf(0, nbar(x)));
    }

    #[test]
    fn sampler_is_a_pure_function(x in 0.05f64..3.0, m in 1usize..200, seed: u64, thermal: bool) {
        let source = if thermal { SourceKind::Thermal } else { SourceKind::Coherent };
        let a = sample_counts(source, nbar(x), m, seed).unwrap();
        let b = sample_counts(source, nbar(x), m, seed).unwrap();
        prop_assert_eq!(a.len(), m);
        prop_assert_eq!(a, b);
    }
}
