//! Trained models as versioned JSON documents tagged by `"type"`.

use std::path::Path;

use photon_discrim_core::nn::Standardizer;
use photon_discrim_core::{
    featurize, AdalineModel, Classifier, CnnArchitecture, CnnModel, MeanPhotonNumber, MnnModel,
    NaiveBayesModel, PhotonCountSequence, SourceKind, Subset, FEATURE_LEN,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const SCHEMA: u32 = 1;

/// Layer order of the convolutional network, recorded with its parameters.
pub const CNN_LAYERS: &str =
    "conv-relu,conv-relu,maxpool,conv-relu,maxpool,flatten,dense-relu,dense-softmax";

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Adaline(AdalineModel),
    NaiveBayes(NaiveBayesModel),
    Mnn(MnnModel),
    Cnn(CnnModel),
}

impl Classifier for TrainedModel {
    fn classify(&self, subset: &Subset) -> photon_discrim_core::Result<SourceKind> {
        match self {
            Self::Adaline(m) => m.classify(subset),
            Self::NaiveBayes(m) => m.classify(subset),
            Self::Mnn(m) => m.classify(subset),
            Self::Cnn(m) => m.classify(subset),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema: u32,
    #[serde(flatten)]
    model: ModelDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum ModelDoc {
    Adaline {
        weights: [f64; FEATURE_LEN],
        bias: f64,
        learning_rate: f64,
        epochs_trained: usize,
        nbar: Option<f64>,
        m: usize,
        seed: u64,
    },
    #[serde(rename = "nb")]
    NaiveBayes { nbar: f64, prior: f64 },
    Mnn {
        hidden: usize,
        standardizer: StandardizerDoc,
        epochs_trained: usize,
        seed: u64,
        params: Vec<f64>,
    },
    Cnn {
        architecture: ArchitectureDoc,
        standardizer: StandardizerDoc,
        epochs_trained: usize,
        seed: u64,
        params: Vec<f64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct StandardizerDoc {
    mean: [f64; FEATURE_LEN],
    scale: [f64; FEATURE_LEN],
}

#[derive(Debug, Serialize, Deserialize)]
struct ArchitectureDoc {
    layers: String,
    input_len: usize,
    kernel: usize,
    channels: [usize; 3],
    pool: usize,
    dense: usize,
}

impl From<&Standardizer> for StandardizerDoc {
    fn from(s: &Standardizer) -> Self {
        Self {
            mean: s.mean,
            scale: s.scale,
        }
    }
}

impl From<StandardizerDoc> for Standardizer {
    fn from(s: StandardizerDoc) -> Self {
        Self {
            mean: s.mean,
            scale: s.scale,
        }
    }
}

impl TrainedModel {
    fn to_doc(&self) -> ModelDoc {
        match self {
            Self::Adaline(m) => ModelDoc::Adaline {
                weights: m.weights,
                bias: m.bias,
                learning_rate: m.learning_rate,
                epochs_trained: m.epochs_trained,
                nbar: m.nbar.map(MeanPhotonNumber::get),
                m: m.m,
                seed: m.seed,
            },
            Self::NaiveBayes(m) => ModelDoc::NaiveBayes {
                nbar: m.nbar.get(),
                prior: m.prior,
            },
            Self::Mnn(m) => ModelDoc::Mnn {
                hidden: m.hidden,
                standardizer: (&m.input).into(),
                epochs_trained: m.epochs_trained,
                seed: m.seed,
                params: m.params().to_vec(),
            },
            Self::Cnn(m) => ModelDoc::Cnn {
                architecture: ArchitectureDoc {
                    layers: CNN_LAYERS.to_string(),
                    input_len: m.arch.input_len,
                    kernel: m.arch.kernel,
                    channels: m.arch.channels,
                    pool: m.arch.pool,
                    dense: m.arch.dense,
                },
                standardizer: (&m.input).into(),
                epochs_trained: m.epochs_trained,
                seed: m.seed,
                params: m.params().to_vec(),
            },
        }
    }

    fn from_doc(doc: ModelDoc) -> std::result::Result<Self, String> {
        let err = |e: photon_discrim_core::Error| e.to_string();
        Ok(match doc {
            ModelDoc::Adaline {
                weights,
                bias,
                learning_rate,
                epochs_trained,
                nbar,
                m,
                seed,
            } => {
                let mut model = AdalineModel::from_parts(weights, bias);
                if !model.is_finite() {
                    return Err("non-finite ADALINE weights".into());
                }
                model.learning_rate = learning_rate;
                model.epochs_trained = epochs_trained;
                model.nbar = nbar.map(MeanPhotonNumber::new).transpose().map_err(err)?;
                model.m = m;
                model.seed = seed;
                Self::Adaline(model)
            }
            ModelDoc::NaiveBayes { nbar, prior } => Self::NaiveBayes(
                NaiveBayesModel::with_prior(MeanPhotonNumber::new(nbar).map_err(err)?, prior)
                    .map_err(err)?,
            ),
            ModelDoc::Mnn {
                hidden,
                standardizer,
                epochs_trained,
                seed,
                params,
            } => {
                let mut model =
                    MnnModel::from_params(hidden, params, standardizer.into()).map_err(err)?;
                model.epochs_trained = epochs_trained;
                model.seed = seed;
                Self::Mnn(model)
            }
            ModelDoc::Cnn {
                architecture: a,
                standardizer,
                epochs_trained,
                seed,
                params,
            } => {
                if a.layers != CNN_LAYERS {
                    return Err(format!("unsupported CNN layer order `{}`", a.layers));
                }
                let arch = CnnArchitecture {
                    input_len: a.input_len,
                    kernel: a.kernel,
                    channels: a.channels,
                    pool: a.pool,
                    dense: a.dense,
                };
                let mut model =
                    CnnModel::from_params(arch, params, standardizer.into()).map_err(err)?;
                model.epochs_trained = epochs_trained;
                model.seed = seed;
                Self::Cnn(model)
            }
        })
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema: SCHEMA,
            model: self.to_doc(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.schema != SCHEMA {
            return Err(format!("unsupported schema {}", file.schema));
        }
        Self::from_doc(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        }
        std::fs::write(path, self.to_json() + "\n").map_err(|e| AppError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text).map_err(|reason| AppError::format(path, reason))
    }
}

impl TrainedModel {
    /// Classifies one count sequence as a single subset.
    pub fn classify_counts(
        &self,
        counts: &PhotonCountSequence,
    ) -> photon_discrim_core::Result<SourceKind> {
        let fv = featurize(counts)?;
        Ok(match self {
            Self::Adaline(m) => m.predict(&fv),
            Self::NaiveBayes(m) => m.classify_counts(counts)?.0,
            Self::Mnn(m) => m.predict(&fv).0,
            Self::Cnn(m) => m.predict(&fv).0,
        })
    }
}
