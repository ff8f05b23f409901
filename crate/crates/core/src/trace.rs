//! Synthetic single-photon detector traces and threshold photon counting.
//!
//! Each photon becomes one voltage pulse inside its time bin. Counting walks
//! the sampled trace, splits it into bins of fixed duration and counts the
//! maximal runs of samples above the threshold. A run that crosses a bin
//! boundary belongs to the bin holding its first above-threshold sample.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::photon_stats::PhotonCountSequence;
use crate::seed;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_BIN_DURATION: f64 = 1e-6;
pub const DEFAULT_SAMPLE_PERIOD: f64 = 10e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiseModel {
    Rectangular,
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    /// Peak voltage.
    pub amplitude: f64,
    /// Pulse duration in seconds.
    pub width: f64,
    /// Dead space kept after every pulse, in seconds.
    pub min_gap: f64,
    pub rise: RiseModel,
    /// Standard deviation of additive Gaussian noise, volts.
    pub noise_sigma: f64,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            width: 40e-9,
            min_gap: 20e-9,
            rise: RiseModel::Rectangular,
            noise_sigma: 0.02,
        }
    }
}

impl PulseShape {
    fn validate(&self) -> Result<()> {
        let ok = self.amplitude.is_finite()
            && self.amplitude > 0.0
            && self.width.is_finite()
            && self.width > 0.0
            && self.min_gap.is_finite()
            && self.min_gap >= 0.0
            && self.noise_sigma.is_finite()
            && self.noise_sigma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(
                "pulse shape parameters must be finite and positive",
            ))
        }
    }

    /// Voltage of sample `i` (0-based) of a pulse spanning `len` samples.
    fn sample(&self, i: usize, len: usize) -> f64 {
        match self.rise {
            RiseModel::Rectangular => self.amplitude,
            RiseModel::RaisedCosine => {
                let phase = (i as f64 + 0.5) / len as f64;
                self.amplitude * 0.5 * (1.0 - libm::cos(core::f64::consts::TAU * phase))
            }
        }
    }
}

/// Sampling grid of a trace: sample period and counting-bin duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub sample_period: f64,
    pub bin_duration: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            sample_period: DEFAULT_SAMPLE_PERIOD,
            bin_duration: DEFAULT_BIN_DURATION,
        }
    }
}

impl Sampling {
    /// Samples per bin; the bin duration must be an integer multiple of the period.
    pub fn samples_per_bin(&self) -> Result<usize> {
        samples_in(self.bin_duration, self.sample_period).ok_or_else(|| {
            Error::config(alloc::format!(
                "bin duration {} s is not an integer multiple of sample period {} s",
                self.bin_duration,
                self.sample_period
            ))
        })
    }
}

fn samples_in(duration: f64, period: f64) -> Option<usize> {
    if !(period.is_finite() && period > 0.0 && duration.is_finite() && duration > 0.0) {
        return None;
    }
    let ratio = duration / period;
    let rounded = libm::round(ratio);
    if rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * rounded {
        Some(rounded as usize)
    } else {
        None
    }
}

/// Sampled detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageTrace {
    pub samples: Vec<f32>,
    pub sample_period: f64,
    pub bin_duration: f64,
    pub ground_truth: Option<Vec<u32>>,
}

impl VoltageTrace {
    pub fn new(samples: Vec<f32>, sample_period: f64) -> Result<Self> {
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::config("sample period must be finite and > 0"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("voltage samples"));
        }
        Ok(Self {
            samples,
            sample_period,
            bin_duration: DEFAULT_BIN_DURATION,
            ground_truth: None,
        })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_period
    }
}

/// Renders photon counts as a voltage trace.
///
/// Pulses in a bin are placed at random, non-overlapping offsets, each
/// followed by at least `min_gap` of baseline, so neither neighbouring pulses
/// nor pulses in adjacent bins can merge.
pub fn synthesize_trace(
    counts: &[u32],
    pulse: &PulseShape,
    sampling: &Sampling,
    seed: u64,
) -> Result<VoltageTrace> {
    pulse.validate()?;
    let per_bin = sampling.samples_per_bin()?;
    let width = samples_in_at_least_one(pulse.width, sampling.sample_period);
    let gap = libm::ceil(pulse.min_gap / sampling.sample_period - 1e-9) as usize;
    let slot = width + gap;
    let capacity = per_bin / slot;

    if let Some((bin, &count)) = counts
        .iter()
        .enumerate()
        .find(|(_, &c)| c as usize > capacity)
    {
        return Err(Error::BinCapacity {
            bin,
            count,
            capacity,
        });
    }

    let mut rng = seed::rng(seed);
    let mut samples = vec![0.0f32; counts.len() * per_bin];
    let mut offsets = Vec::new();
    for (bin, &count) in counts.iter().enumerate() {
        let k = count as usize;
        if k == 0 {
            continue;
        }
        let free = per_bin - k * slot;
        offsets.clear();
        offsets.extend((0..k).map(|_| rng.random_range(0..=free)));
        offsets.sort_unstable();
        let base = bin * per_bin;
        for (j, &off) in offsets.iter().enumerate() {
            let start = base + off + j * slot;
            for i in 0..width {
                samples[start + i] = pulse.sample(i, width) as f32;
            }
        }
    }

    if pulse.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, pulse.noise_sigma)
            .map_err(|_| Error::config("invalid noise sigma"))?;
        for v in samples.iter_mut() {
            *v += noise.sample(&mut rng) as f32;
        }
    }

    Ok(VoltageTrace {
        samples,
        sample_period: sampling.sample_period,
        bin_duration: sampling.bin_duration,
        ground_truth: Some(counts.to_vec()),
    })
}

fn samples_in_at_least_one(duration: f64, period: f64) -> usize {
    (libm::round(duration / period) as usize).max(1)
}

/// Counts photon events per bin as maximal above-threshold runs.
pub fn count_photons(
    trace: &VoltageTrace,
    threshold: f64,
    bin_duration: f64,
) -> Result<PhotonCountSequence> {
    if trace.samples.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::config("threshold must be finite and > 0"));
    }
    let per_bin = Sampling {
        sample_period: trace.sample_period,
        bin_duration,
    }
    .samples_per_bin()?;
    let n_bins = trace.samples.len() / per_bin;
    let mut counts = vec![0u32; n_bins];
    let mut above = false;
    for (i, &v) in trace.samples[..n_bins * per_bin].iter().enumerate() {
        let now = f64::from(v) > threshold;
        if now && !above {
            counts[i / per_bin] += 1;
        }
        above = now;
    }
    PhotonCountSequence::new(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> PulseShape {
        PulseShape {
            noise_sigma: 0.0,
            ..PulseShape::default()
        }
    }

    #[test]
    fn empty_bins_stay_below_noise_floor() {
        let trace =
            synthesize_trace(&[0, 0, 0], &PulseShape::default(), &Sampling::default(), 3).unwrap();
        assert_eq!(trace.samples.len(), 300);
        assert!(trace.samples.iter().all(|v| v.abs() < 0.2));
    }

    #[test]
    fn noiseless_pulses_form_disjoint_runs() {
        let trace = synthesize_trace(&[3], &noiseless(), &Sampling::default(), 9).unwrap();
        let mut runs = 0;
        let mut prev = false;
        for &v in &trace.samples {
            let now = v > 0.5;
            if now && !prev {
                runs += 1;
            }
            prev = now;
        }
        assert_eq!(runs, 3);
        assert_eq!(trace.ground_truth.as_deref(), Some(&[3u32][..]));
    }

    #[test]
    fn overcrowded_bin_names_the_bin() {
        let err = synthesize_trace(&[1, 40, 2], &noiseless(), &Sampling::default(), 0).unwrap_err();
        assert_eq!(
            err,
            Error::BinCapacity {
                bin: 1,
                count: 40,
                capacity: 16
            }
        );
    }

    #[test]
    fn full_bin_round_trips() {
        let counts = [16, 0, 16, 1];
        let trace = synthesize_trace(&counts, &noiseless(), &Sampling::default(), 5).unwrap();
        let got = count_photons(&trace, 0.5, 1e-6).unwrap();
        assert_eq!(got.counts(), &counts);
    }

    #[test]
    fn flat_trace_counts_nothing() {
        let trace = VoltageTrace::new(vec![0.0; 1000], 10e-9).unwrap();
        let got = count_photons(&trace, 0.5, 1e-6).unwrap();
        assert_eq!(got.counts(), &[0u32; 10]);
    }

    #[test]
    fn straddling_pulse_goes_to_its_first_bin() {
        let mut samples = vec![0.0f32; 300];
        for v in &mut samples[95..108] {
            *v = 1.0;
        }
        let trace = VoltageTrace::new(samples, 10e-9).unwrap();
        let got = count_photons(&trace, 0.5, 1e-6).unwrap();
        assert_eq!(got.counts(), &[1, 0, 0]);
    }

    #[test]
    fn partial_trailing_bin_is_dropped() {
        let mut samples = vec![0.0f32; 250];
        samples[220] = 1.0;
        let trace = VoltageTrace::new(samples, 10e-9).unwrap();
        assert_eq!(count_photons(&trace, 0.5, 1e-6).unwrap().len(), 2);
    }

    #[test]
    fn bin_must_be_a_multiple_of_the_period() {
        let trace = VoltageTrace::new(vec![0.0; 1000], 10e-9).unwrap();
        assert!(matches!(
            count_photons(&trace, 0.5, 1.005e-6),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn raised_cosine_round_trips() {
        let pulse = PulseShape {
            rise: RiseModel::RaisedCosine,
            ..PulseShape::default()
        };
        let counts: Vec<u32> = (0..500).map(|i| (i % 5) as u32).collect();
        let trace = synthesize_trace(&counts, &pulse, &Sampling::default(), 11).unwrap();
        assert_eq!(
            count_photons(&trace, 0.5, 1e-6).unwrap().counts(),
            &counts[..]
        );
    }

    #[test]
    fn rejects_bad_threshold_and_empty_trace() {
        let trace = VoltageTrace::new(vec![0.0; 100], 10e-9).unwrap();
        assert!(count_photons(&trace, 0.0, 1e-6).is_err());
        let empty = VoltageTrace::new(Vec::new(), 10e-9).unwrap();
        assert_eq!(count_photons(&empty, 0.5, 1e-6), Err(Error::EmptySequence));
    }
}
