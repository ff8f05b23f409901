//! Binary coherent-vs-thermal classifiers and their evaluation.

mod adaline;
mod naive_bayes;

pub use adaline::{
    adaline_predict, delta_update, AdalineConfig, AdalineModel, InputScaling, WeightInit,
};
pub use naive_bayes::{estimate_nbar, nb_classify, NaiveBayesModel};

use crate::dataset::{Subset, SubsetCollection};
use crate::error::{Error, Result};
use crate::photon_stats::SourceKind;

/// Anything that labels a subset.
pub trait Classifier {
    fn classify(&self, subset: &Subset) -> Result<SourceKind>;
}

/// Fraction of positions where `predicted` and `actual` agree.
pub fn accuracy(predicted: &[SourceKind], actual: &[SourceKind]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::EmptySequence);
    }
    if predicted.len() != actual.len() {
        return Err(Error::config("prediction and label counts differ"));
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Accuracy of `model` over a labelled collection.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, collection: &SubsetCollection) -> Result<f64> {
    evaluate_subsets(model, &collection.subsets)
}

pub fn evaluate_subsets<C: Classifier + ?Sized>(model: &C, subsets: &[Subset]) -> Result<f64> {
    if subsets.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut hits = 0usize;
    for s in subsets {
        if model.classify(s)? == s.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / subsets.len() as f64)
}
