//! Coherent (Poisson) and thermal (Bose-Einstein) photon-number statistics.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::seed;

/// Mean photon numbers used throughout the reproduction grid.
pub const CANONICAL_NBAR: [f64; 4] = [0.40, 0.53, 0.67, 0.77];

/// Number of photon-number features: P(0)..P(5) and the overflow bucket P(>=6).
pub const FEATURE_LEN: usize = 7;

/// Below this photon number the pmfs are evaluated by direct products.
const DIRECT_EVAL_LIMIT: u32 = 20;

/// Expected photons per coherence-time bin. Always finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeanPhotonNumber(f64);

impl MeanPhotonNumber {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidMeanPhotonNumber(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn canonical() -> [MeanPhotonNumber; 4] {
        CANONICAL_NBAR.map(MeanPhotonNumber)
    }
}

impl fmt::Display for MeanPhotonNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<f64> for MeanPhotonNumber {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKind {
    Coherent,
    Thermal,
}

impl SourceKind {
    pub const ALL: [SourceKind; 2] = [SourceKind::Coherent, SourceKind::Thermal];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Coherent => "coherent",
            SourceKind::Thermal => "thermal",
        }
    }

    /// Output index in two-way softmax layers and stream id for seeding.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            SourceKind::Coherent => 0,
            SourceKind::Thermal => 1,
        }
    }

    /// Regression target for the linear neuron: Coherent is +1, Thermal is -1.
    #[inline]
    pub fn target(self) -> f64 {
        match self {
            SourceKind::Coherent => 1.0,
            SourceKind::Thermal => -1.0,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(SourceKind::Coherent),
            1 => Some(SourceKind::Thermal),
            _ => None,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" | "Coherent" => Ok(SourceKind::Coherent),
            "thermal" | "Thermal" => Ok(SourceKind::Thermal),
            other => Err(Error::config(alloc::format!(
                "unknown source kind `{other}`"
            ))),
        }
    }
}

/// Photon counts, one per time bin, for one subset of measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonCountSequence {
    counts: Vec<u32>,
    pub source: Option<SourceKind>,
    pub nbar: Option<MeanPhotonNumber>,
    pub seed: Option<u64>,
}

impl PhotonCountSequence {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            counts,
            source: None,
            nbar: None,
            seed: None,
        })
    }

    pub fn with_provenance(
        mut self,
        source: SourceKind,
        nbar: MeanPhotonNumber,
        seed: u64,
    ) -> Self {
        self.source = Some(source);
        self.nbar = Some(nbar);
        self.seed = Some(seed);
        self
    }

    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// Always false; sequences are non-empty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn into_counts(self) -> Vec<u32> {
        self.counts
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| f64::from(c)).sum::<f64>() / self.counts.len() as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.counts
            .iter()
            .map(|&c| {
                let d = f64::from(c) - mean;
                d * d
            })
            .sum::<f64>()
            / self.counts.len() as f64
    }
}

/// ln(n!), exact product for small n and `lgamma` above.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= DIRECT_EVAL_LIMIT {
        // 20! < 2^62 and carries enough factors of two to be exact in f64.
        libm::log((1..=u64::from(n)).product::<u64>() as f64)
    } else {
        libm::lgamma(f64::from(n) + 1.0)
    }
}

/// Poisson mass e^(-n̄) n̄^n / n!.
pub fn coherent_pmf(n: u32, nbar: MeanPhotonNumber) -> f64 {
    let x = nbar.get();
    if n <= DIRECT_EVAL_LIMIT {
        let mut term = libm::exp(-x);
        for k in 1..=n {
            term *= x / f64::from(k);
        }
        term
    } else {
        libm::exp(coherent_ln_pmf(n, nbar))
    }
}

pub fn coherent_ln_pmf(n: u32, nbar: MeanPhotonNumber) -> f64 {
    let x = nbar.get();
    -x + f64::from(n) * libm::log(x) - ln_factorial(n)
}

/// Bose-Einstein mass n̄^n / (n̄+1)^(n+1).
pub fn thermal_pmf(n: u32, nbar: MeanPhotonNumber) -> f64 {
    let x = nbar.get();
    if n <= DIRECT_EVAL_LIMIT {
        let ratio = x / (x + 1.0);
        let mut term = 1.0 / (x + 1.0);
        for _ in 0..n {
            term *= ratio;
        }
        term
    } else {
        libm::exp(thermal_ln_pmf(n, nbar))
    }
}

pub fn thermal_ln_pmf(n: u32, nbar: MeanPhotonNumber) -> f64 {
    let x = nbar.get();
    f64::from(n) * libm::log(x) - (f64::from(n) + 1.0) * libm::log1p(x)
}

pub fn pmf(source: SourceKind, n: u32, nbar: MeanPhotonNumber) -> f64 {
    match source {
        SourceKind::Coherent => coherent_pmf(n, nbar),
        SourceKind::Thermal => thermal_pmf(n, nbar),
    }
}

pub fn ln_pmf(source: SourceKind, n: u32, nbar: MeanPhotonNumber) -> f64 {
    match source {
        SourceKind::Coherent => coherent_ln_pmf(n, nbar),
        SourceKind::Thermal => thermal_ln_pmf(n, nbar),
    }
}

/// Analytic feature vector [P(0), ..., P(5), P(>=6)].
///
/// The overflow bucket is evaluated without cancellation: as a closed form
/// for thermal light (the geometric tail (n̄/(n̄+1))^6) and as a direct tail
/// sum for coherent light whenever the head mass dominates.
pub fn theoretical_feature_pmf(source: SourceKind, nbar: MeanPhotonNumber) -> [f64; FEATURE_LEN] {
    let mut probs = [0.0; FEATURE_LEN];
    for (n, p) in probs.iter_mut().take(FEATURE_LEN - 1).enumerate() {
        *p = pmf(source, n as u32, nbar);
    }
    let head: f64 = probs[..FEATURE_LEN - 1].iter().sum();
    let last = (FEATURE_LEN - 1) as u32;
    probs[FEATURE_LEN - 1] = match source {
        SourceKind::Thermal => {
            let x = nbar.get();
            libm::pow(x / (x + 1.0), f64::from(last))
        }
        SourceKind::Coherent if head > 0.5 => coherent_tail(last, nbar),
        SourceKind::Coherent => 1.0 - head,
    };
    probs
}

fn coherent_tail(from: u32, nbar: MeanPhotonNumber) -> f64 {
    let x = nbar.get();
    let mut term = coherent_pmf(from, nbar);
    let mut sum = 0.0;
    let mut n = from;
    loop {
        sum += term;
        n += 1;
        term *= x / f64::from(n);
        if f64::from(n) > x && term <= sum * 1e-18 {
            return sum;
        }
    }
}

/// Draws `m` independent photon counts for one source.
///
/// Coherent light uses a Poisson sampler. Thermal light inverts the
/// geometric law P(n) = p(1-p)^n with p = 1/(n̄+1): n = ⌊ln U / ln(1-p)⌋
/// for U uniform on (0, 1].
pub fn sample_counts(
    source: SourceKind,
    nbar: MeanPhotonNumber,
    m: usize,
    seed: u64,
) -> Result<PhotonCountSequence> {
    if m == 0 {
        return Err(Error::EmptySequence);
    }
    let mut rng = seed::rng(seed);
    let counts: Vec<u32> = match source {
        SourceKind::Coherent => {
            let poisson =
                Poisson::new(nbar.get()).map_err(|_| Error::InvalidMeanPhotonNumber(nbar.get()))?;
            (0..m)
                .map(|_| {
                    let draw: f64 = poisson.sample(&mut rng);
                    draw as u32
                })
                .collect()
        }
        SourceKind::Thermal => {
            let x = nbar.get();
            let ln_q = libm::log(x / (x + 1.0));
            (0..m)
                .map(|_| {
                    let u = 1.0 - rng.random::<f64>();
                    libm::floor(libm::log(u) / ln_q) as u32
                })
                .collect()
        }
    };
    Ok(PhotonCountSequence::new(counts)?.with_provenance(source, nbar, seed))
}
