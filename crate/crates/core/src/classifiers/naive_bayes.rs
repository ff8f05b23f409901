use super::Classifier;
use crate::dataset::Subset;
use crate::error::{Error, Result};
use crate::photon_stats::{
    coherent_ln_pmf, thermal_ln_pmf, MeanPhotonNumber, PhotonCountSequence, SourceKind,
};

/// Naive Bayes over raw count sequences with analytic likelihoods.
///
/// `prior` is p(Coherent); p(Thermal) is `1 - prior`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBayesModel {
    pub nbar: MeanPhotonNumber,
    pub prior: f64,
}

impl NaiveBayesModel {
    pub fn new(nbar: MeanPhotonNumber) -> Self {
        Self { nbar, prior: 0.5 }
    }

    pub fn with_prior(nbar: MeanPhotonNumber, prior: f64) -> Result<Self> {
        if !(prior > 0.0 && prior < 1.0) {
            return Err(Error::config("class prior must lie in (0, 1)"));
        }
        Ok(Self { nbar, prior })
    }

    /// Unnormalized log-posteriors (coherent, thermal).
    pub fn log_posteriors(&self, counts: &[u32]) -> (f64, f64) {
        let mut coherent = libm::log(self.prior);
        let mut thermal = libm::log(1.0 - self.prior);
        for &x in counts {
            coherent += coherent_ln_pmf(x, self.nbar);
            thermal += thermal_ln_pmf(x, self.nbar);
        }
        (coherent, thermal)
    }

    pub fn classify_counts(&self, counts: &PhotonCountSequence) -> Result<(SourceKind, f64)> {
        nb_classify(counts, self)
    }
}

/// Picks the class with the larger log-posterior and returns the winning
/// margin. Exact ties go to Thermal.
pub fn nb_classify(
    counts: &PhotonCountSequence,
    model: &NaiveBayesModel,
) -> Result<(SourceKind, f64)> {
    if counts.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (coherent, thermal) = model.log_posteriors(counts.counts());
    if !coherent.is_finite() || !thermal.is_finite() {
        return Err(Error::NonFinite("naive Bayes log-posterior"));
    }
    Ok(decide(coherent, thermal))
}

fn decide(coherent: f64, thermal: f64) -> (SourceKind, f64) {
    if coherent > thermal {
        (SourceKind::Coherent, coherent - thermal)
    } else {
        (SourceKind::Thermal, thermal - coherent)
    }
}

/// Maximum-likelihood n̄ (the sample mean) over a set of sequences, shared by
/// both hypotheses. Fails when every count is zero.
pub fn estimate_nbar<'a>(
    sequences: impl IntoIterator<Item = &'a PhotonCountSequence>,
) -> Result<MeanPhotonNumber> {
    let (mut total, mut bins) = (0.0, 0usize);
    for s in sequences {
        total += s.counts().iter().map(|&c| f64::from(c)).sum::<f64>();
        bins += s.len();
    }
    if bins == 0 {
        return Err(Error::EmptySequence);
    }
    MeanPhotonNumber::new(total / bins as f64)
}

impl Classifier for NaiveBayesModel {
    fn classify(&self, subset: &Subset) -> Result<SourceKind> {
        nb_classify(&subset.counts, self).map(|(label, _)| label)
    }
}
