//! Subset dataset protocol: per-source measurement subsets of size `m`,
//! featurized into empirical photon-number distributions and split into
//! stratified train/test collections.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::photon_stats::{
    sample_counts, MeanPhotonNumber, PhotonCountSequence, SourceKind, FEATURE_LEN,
};
use crate::seed;

/// Empirical [P(0), ..., P(5), P(>=6)] of one subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub probs: [f64; FEATURE_LEN],
    pub m: usize,
    pub label: Option<SourceKind>,
    pub nbar: Option<MeanPhotonNumber>,
}

pub fn featurize(counts: &PhotonCountSequence) -> Result<FeatureVector> {
    if counts.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut histogram = [0usize; FEATURE_LEN];
    for &c in counts.counts() {
        histogram[(c as usize).min(FEATURE_LEN - 1)] += 1;
    }
    let m = counts.len();
    Ok(FeatureVector {
        probs: histogram.map(|h| h as f64 / m as f64),
        m,
        label: counts.source,
        nbar: counts.nbar,
    })
}

/// One labelled subset: its raw counts and their features.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub id: u64,
    pub label: SourceKind,
    pub counts: PhotonCountSequence,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCollection {
    pub subsets: Vec<Subset>,
    pub m: usize,
    pub nbar: MeanPhotonNumber,
    pub n_subsets_per_class: usize,
    pub split_fraction: f64,
}

impl SubsetCollection {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Subset> {
        self.subsets.iter()
    }

    pub fn count(&self, label: SourceKind) -> usize {
        self.subsets.iter().filter(|s| s.label == label).count()
    }

    pub fn is_balanced(&self) -> bool {
        self.count(SourceKind::Coherent) == self.count(SourceKind::Thermal)
    }

    pub fn labels(&self) -> impl Iterator<Item = SourceKind> + '_ {
        self.subsets.iter().map(|s| s.label)
    }

    /// Concatenates two collections built with the same `m` and n̄.
    pub fn merged(mut self, other: SubsetCollection) -> Result<SubsetCollection> {
        if self.m != other.m || self.nbar != other.nbar {
            return Err(Error::config(
                "cannot merge collections with different m or nbar",
            ));
        }
        self.subsets.extend(other.subsets);
        Ok(self)
    }
}

impl<'a> IntoIterator for &'a SubsetCollection {
    type Item = &'a Subset;
    type IntoIter = core::slice::Iter<'a, Subset>;

    fn into_iter(self) -> Self::IntoIter {
        self.subsets.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Every subset is an independent fresh draw.
    #[default]
    Fresh,
    /// One pool of `n * m` measurements per source, cut into disjoint subsets.
    PoolPartition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionParams {
    pub nbar: MeanPhotonNumber,
    pub m: usize,
    pub n_subsets_per_class: usize,
    pub split_fraction: f64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl CollectionParams {
    pub fn new(nbar: MeanPhotonNumber, m: usize, seed: u64) -> Self {
        Self {
            nbar,
            m,
            n_subsets_per_class: 1000,
            split_fraction: 0.7,
            seed,
            mode: SamplingMode::Fresh,
        }
    }

    /// Number of subsets of each class that land in the training split.
    pub fn train_per_class(&self) -> usize {
        libm::round(self.split_fraction * self.n_subsets_per_class as f64) as usize
    }
}

const STREAM_SUBSET: u64 = 1;
const STREAM_POOL: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

/// Builds balanced, stratified train and test collections.
///
/// Subset `i` of class `c` is drawn from seed `derive(seed, [c, i])`, so the
/// contents of a subset do not depend on how many others are generated.
/// Subset ids are `c * n + i` and are unique within one build.
pub fn build_collection(params: &CollectionParams) -> Result<(SubsetCollection, SubsetCollection)> {
    let n = params.n_subsets_per_class;
    if params.m == 0 {
        return Err(Error::config("subset size m must be >= 1"));
    }
    if n < 2 {
        return Err(Error::config("need at least 2 subsets per class"));
    }
    if !(params.split_fraction > 0.0 && params.split_fraction < 1.0) {
        return Err(Error::config("split fraction must lie in (0, 1)"));
    }
    let n_train = params.train_per_class();
    if n_train == 0 || n_train >= n {
        return Err(Error::config(alloc::format!(
            "split fraction {} of {n} subsets leaves an empty partition",
            params.split_fraction
        )));
    }

    let mut train = Vec::with_capacity(2 * n_train);
    let mut test = Vec::with_capacity(2 * (n - n_train));
    for source in SourceKind::ALL {
        let mut subsets = draw_subsets(params, source)?;
        let mut rng = seed::rng(seed::derive(
            params.seed,
            &[STREAM_SHUFFLE, source.index() as u64],
        ));
        subsets.shuffle(&mut rng);
        let rest = subsets.split_off(n_train);
        train.extend(subsets);
        test.extend(rest);
    }

    let wrap = |subsets| SubsetCollection {
        subsets,
        m: params.m,
        nbar: params.nbar,
        n_subsets_per_class: n,
        split_fraction: params.split_fraction,
    };
    Ok((wrap(train), wrap(test)))
}

fn draw_subsets(params: &CollectionParams, source: SourceKind) -> Result<Vec<Subset>> {
    let n = params.n_subsets_per_class;
    let class = source.index() as u64;
    let make = |i: usize, counts: PhotonCountSequence| -> Result<Subset> {
        let features = featurize(&counts)?;
        Ok(Subset {
            id: class * n as u64 + i as u64,
            label: source,
            counts,
            features,
        })
    };
    match params.mode {
        SamplingMode::Fresh => (0..n)
            .map(|i| {
                let s = seed::derive(params.seed, &[STREAM_SUBSET, class, i as u64]);
                make(i, sample_counts(source, params.nbar, params.m, s)?)
            })
            .collect(),
        SamplingMode::PoolPartition => {
            let s = seed::derive(params.seed, &[STREAM_POOL, class]);
            let pool = sample_counts(source, params.nbar, n * params.m, s)?;
            pool.counts()
                .chunks_exact(params.m)
                .enumerate()
                .map(|(i, chunk)| {
                    let counts = PhotonCountSequence::new(chunk.to_vec())?.with_provenance(
                        source,
                        params.nbar,
                        s,
                    );
                    make(i, counts)
                })
                .collect()
        }
    }
}
