mod common;

use common::nbar;
use photon_discrim_core::{
    count_photons, sample_counts, synthesize_trace, PulseShape, RiseModel, Sampling, SourceKind,
    VoltageTrace,
};
use proptest::prelude::*;

fn round_trip(counts: &[u32], pulse: &PulseShape, seed: u64) -> Vec<u32> {
    let trace = synthesize_trace(counts, pulse, &Sampling::default(), seed).unwrap();
    count_photons(&trace, 0.5, 1e-6).unwrap().into_counts()
}

#[test]
fn thermal_counts_survive_the_detector_chain() {
    let truth = sample_counts(SourceKind::Thermal, nbar(0.77), 1000, 31).unwrap();
    let got = round_trip(truth.counts(), &PulseShape::default(), 32);
    assert_eq!(got, truth.counts());
}

#[test]
fn ten_thousand_bins_at_the_noise_limit() {
    let truth = sample_counts(SourceKind::Thermal, nbar(0.77), 10_000, 41).unwrap();
    let pulse = PulseShape {
        noise_sigma: 0.05,
        ..PulseShape::default()
    };
    assert_eq!(round_trip(truth.counts(), &pulse, 42), truth.counts());
}

fn pulse_strategy() -> impl Strategy<Value = PulseShape> {
    (0.0f64..=0.05, any::<bool>()).prop_map(|(noise_sigma, cosine)| PulseShape {
        noise_sigma,
        rise: if cosine {
            RiseModel::RaisedCosine
        } else {
            RiseModel::Rectangular
        },
        ..PulseShape::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_identity_within_capacity(
        counts in prop::collection::vec(0u32..=16, 1..60),
        pulse in pulse_strategy(),
        seed: u64,
    ) {
        prop_assert_eq!(round_trip(&counts, &pulse, seed), counts);
    }

    /// Run splitting can break this on arbitrary waveforms (a dip between
    /// two threshold levels); on detector-like traces it holds.
    #[test]
    fn raising_the_threshold_never_adds_events(
        counts in prop::collection::vec(0u32..=8, 1..40),
        pulse in pulse_strategy(),
        lo in 0.3f64..0.7,
        delta in 0.0f64..0.4,
        seed: u64,
    ) {
        let hi = (lo + delta).min(0.7);
        let trace = synthesize_trace(&counts, &pulse, &Sampling::default(), seed).unwrap();
        let a = count_photons(&trace, lo, 1e-6).unwrap();
        let b = count_photons(&trace, hi, 1e-6).unwrap();
        for (x, y) in a.counts().iter().zip(b.counts()) {
            prop_assert!(y <= x);
        }
    }

    #[test]
    fn output_length_is_whole_bins(n_samples in 1usize..2000, per_bin in 1usize..150) {
        let trace = VoltageTrace::new(vec![0.0; n_samples], 10e-9).unwrap();
        let bin = per_bin as f64 * 10e-9;
        match count_photons(&trace, 0.5, bin) {
            Ok(c) => prop_assert_eq!(c.len(), n_samples / per_bin),
            Err(_) => prop_assert_eq!(n_samples / per_bin, 0),
        }
    }
}
