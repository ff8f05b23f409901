//! Photon-number statistics and few-shot light-source discrimination.
//!
//! This crate holds the pure algorithmic pieces: analytic coherent and
//! thermal photon-number distributions with seeded samplers, a synthetic
//! single-photon detector trace and its threshold counter, the subset
//! dataset protocol, and the classifiers that tell coherent from thermal
//! light given a handful of measurements (ADALINE, naive Bayes, a small
//! multilayer network and a 1D convolutional network).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the sweep
//! harness and the command line live in the `photon-discrim` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod nn;
pub mod photon_stats;
pub mod seed;
pub mod trace;

pub use classifiers::{
    accuracy, evaluate, AdalineConfig, AdalineModel, Classifier, InputScaling, NaiveBayesModel,
    WeightInit,
};
pub use dataset::{
    build_collection, featurize, CollectionParams, FeatureVector, SamplingMode, Subset,
    SubsetCollection,
};
pub use error::{Error, Result};
pub use nn::{CnnArchitecture, CnnModel, MnnModel, NetTrainConfig};
pub use photon_stats::{
    coherent_pmf, sample_counts, theoretical_feature_pmf, thermal_pmf, MeanPhotonNumber,
    PhotonCountSequence, SourceKind, CANONICAL_NBAR, FEATURE_LEN,
};
pub use trace::{count_photons, synthesize_trace, PulseShape, RiseModel, Sampling, VoltageTrace};
