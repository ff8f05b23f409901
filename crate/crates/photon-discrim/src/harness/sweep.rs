use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use photon_discrim_core::{
    build_collection, evaluate, seed, AdalineConfig, AdalineModel, Classifier, CnnArchitecture,
    CnnModel, CollectionParams, MeanPhotonNumber, MnnModel, NaiveBayesModel, NetTrainConfig,
    SourceKind, Subset, SubsetCollection, CANONICAL_NBAR,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{AccuracyReport, AccuracyRow};
use crate::error::{AppError, Result};
use crate::formats::dataset::Sampling;

pub const SEED_ENV: &str = "PHOTON_DISCRIM_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const REPORT_FILE: &str = "accuracy.csv";
pub const PLOT_FILE: &str = "accuracy.gp";

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Adaline,
    Nb,
    Mnn,
    Cnn,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Adaline => "adaline",
            Self::Nb => "nb",
            Self::Mnn => "mnn",
            Self::Cnn => "cnn",
        }
    }

    /// Error-bar convention used unless the config overrides it.
    pub fn default_error_bars(self) -> ErrorBars {
        match self {
            Self::Nb => ErrorBars::Partition,
            _ => ErrorBars::Retrain,
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a cell's spread is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorBars {
    /// One dataset; the evaluation subsets are split into `repetitions`
    /// class-balanced groups and scored separately.
    Partition,
    /// `repetitions` independent datasets and trainings.
    Retrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdalineSettings {
    pub learning_rate: f64,
    pub max_epochs: usize,
}

impl Default for AdalineSettings {
    fn default() -> Self {
        let d = AdalineConfig::default();
        Self {
            learning_rate: d.learning_rate,
            max_epochs: d.max_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetSettings {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Hidden width; only read for the MNN.
    pub hidden: usize,
}

impl Default for NetSettings {
    fn default() -> Self {
        let d = NetTrainConfig::mnn(0);
        Self {
            max_epochs: d.max_epochs,
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            hidden: photon_discrim_core::nn::DEFAULT_HIDDEN,
        }
    }
}

impl NetSettings {
    fn train_config(&self, seed: u64) -> NetTrainConfig {
        NetTrainConfig {
            max_epochs: self.max_epochs,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            seed,
        }
    }
}

/// Sweep description as read from JSON. Every field except `schema` may be
/// omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: u32,
    #[serde(default = "default_nbar")]
    pub nbar: Vec<f64>,
    #[serde(default = "default_m")]
    pub m: Vec<usize>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierKind>,
    #[serde(default = "default_subsets")]
    pub n_subsets_per_class: usize,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; absent means one per core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_sampling")]
    pub sampling: Sampling,
    #[serde(default)]
    pub error_bars: BTreeMap<ClassifierKind, ErrorBars>,
    #[serde(default)]
    pub adaline: AdalineSettings,
    #[serde(default)]
    pub mnn: NetSettings,
    #[serde(default)]
    pub cnn: NetSettings,
    /// Also write a gnuplot script next to the report.
    #[serde(default)]
    pub plot: bool,
}

fn default_nbar() -> Vec<f64> {
    CANONICAL_NBAR.to_vec()
}

fn default_m() -> Vec<usize> {
    (1..=16).map(|k| 10 * k).collect()
}

fn default_classifiers() -> Vec<ClassifierKind> {
    vec![ClassifierKind::Adaline, ClassifierKind::Nb]
}

fn default_subsets() -> usize {
    1000
}

fn default_split() -> f64 {
    0.7
}

fn default_repetitions() -> usize {
    10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_sampling() -> Sampling {
    Sampling::Fresh
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schema: 1,
            nbar: default_nbar(),
            m: default_m(),
            classifiers: default_classifiers(),
            n_subsets_per_class: default_subsets(),
            split_fraction: default_split(),
            repetitions: default_repetitions(),
            seed: None,
            output_dir: default_output_dir(),
            workers: None,
            sampling: default_sampling(),
            error_bars: BTreeMap::new(),
            adaline: AdalineSettings::default(),
            mnn: NetSettings::default(),
            cnn: NetSettings::default(),
            plot: false,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let config: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file. Any failure, including a missing
    /// file, is a configuration error naming the path.
    pub fn load(path: &Path) -> Result<Self> {
        let fail = |reason: String| AppError::ConfigFile {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        Self::from_json(&text).map_err(fail)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.schema != 1 {
            return Err(format!("unsupported schema {} (expected 1)", self.schema));
        }
        if self.nbar.is_empty() || self.m.is_empty() || self.classifiers.is_empty() {
            return Err("nbar, m and classifiers must be non-empty".into());
        }
        for &x in &self.nbar {
            MeanPhotonNumber::new(x).map_err(|e| e.to_string())?;
        }
        if self.m.contains(&0) {
            return Err("every m must be >= 1".into());
        }
        if has_duplicates(self.nbar.iter().map(|x| x.to_bits()))
            || has_duplicates(self.m.iter().copied())
            || has_duplicates(self.classifiers.iter().copied())
        {
            return Err("nbar, m and classifiers must not repeat".into());
        }
        if self.repetitions < 2 {
            return Err("repetitions must be >= 2 to form error bars".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be >= 1".into());
        }
        Ok(())
    }

    pub fn error_bars(&self, kind: ClassifierKind) -> ErrorBars {
        self.error_bars
            .get(&kind)
            .copied()
            .unwrap_or_else(|| kind.default_error_bars())
    }

    pub fn report_path(&self) -> PathBuf {
        self.output_dir.join(REPORT_FILE)
    }
}

fn has_duplicates<T: Ord>(items: impl Iterator<Item = T>) -> bool {
    let mut v: Vec<T> = items.collect();
    let n = v.len();
    v.sort();
    v.dedup();
    v.len() != n
}

/// Master seed by precedence: explicit flag, config file, the
/// `PHOTON_DISCRIM_SEED` environment variable, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| AppError::Config(format!("{SEED_ENV}={v:?} is not a u64 seed"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Seed shared by every classifier at one (n̄, m) cell.
pub fn cell_seed(master: u64, nbar: f64, m: usize) -> u64 {
    seed::derive(master, &[nbar.to_bits(), m as u64])
}

/// (classifier, n̄ bits, m); n̄ bits sort like n̄ for positive values.
type CellKey = (ClassifierKind, u64, usize);
/// (n̄, accuracies, first error).
type CellResult = (f64, Vec<f64>, Option<String>);

#[derive(Debug, Clone, Copy)]
struct Task {
    kind: ClassifierKind,
    nbar: f64,
    m: usize,
    /// Repetition index for [`ErrorBars::Retrain`]; 0 for a partition cell.
    rep: usize,
}

/// Runs every (classifier, n̄, m) cell and returns rows in canonical order
/// (classifier, then n̄, then m). Cell failures become NaN rows.
pub fn compute_sweep(config: &SweepConfig, master_seed: u64) -> Result<AccuracyReport> {
    config.validate().map_err(AppError::Config)?;
    let mut tasks = Vec::new();
    for &kind in &config.classifiers {
        for &nbar in &config.nbar {
            for &m in &config.m {
                let reps = match config.error_bars(kind) {
                    ErrorBars::Partition => 1,
                    ErrorBars::Retrain => config.repetitions,
                };
                tasks.extend((0..reps).map(|rep| Task { kind, nbar, m, rep }));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| AppError::Config(e.to_string()))?;
    let results: Vec<photon_discrim_core::Result<Vec<f64>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| run_task(config, master_seed, t))
            .collect()
    });

    let mut cells: BTreeMap<CellKey, CellResult> = BTreeMap::new();
    for (task, result) in tasks.iter().zip(results) {
        let entry = cells
            .entry((task.kind, task.nbar.to_bits(), task.m))
            .or_insert_with(|| (task.nbar, Vec::new(), None));
        match result {
            Ok(accs) => entry.1.extend(accs),
            Err(e) => {
                entry.2.get_or_insert_with(|| e.to_string());
            }
        }
    }

    let mut rows: Vec<AccuracyRow> = cells
        .into_iter()
        .map(|((kind, _, m), (nbar, accs, error))| {
            let seed = cell_seed(master_seed, nbar, m);
            match error {
                None => {
                    let (mean, std) = mean_and_std(&accs);
                    AccuracyRow::new(kind, nbar, m, mean, std, config.repetitions, seed)
                }
                Some(e) => AccuracyRow::failed(kind, nbar, m, config.repetitions, seed, e),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.classifier
            .cmp(&b.classifier)
            .then(a.nbar.total_cmp(&b.nbar))
            .then(a.m.cmp(&b.m))
    });
    Ok(AccuracyReport { rows })
}

/// [`compute_sweep`], then writes the report (and optionally a gnuplot
/// script) into the configured output directory.
pub fn run_sweep(config: &SweepConfig, master_seed: u64) -> Result<AccuracyReport> {
    let report = compute_sweep(config, master_seed)?;
    report.write_csv(&config.report_path())?;
    if config.plot {
        let script = super::report::gnuplot_script(REPORT_FILE, &report);
        let path = config.output_dir.join(PLOT_FILE);
        std::fs::write(&path, script).map_err(|e| AppError::io(&path, e))?;
    }
    Ok(report)
}

fn collection_params(
    config: &SweepConfig,
    nbar: MeanPhotonNumber,
    m: usize,
    seed: u64,
) -> CollectionParams {
    CollectionParams {
        nbar,
        m,
        n_subsets_per_class: config.n_subsets_per_class,
        split_fraction: config.split_fraction,
        seed,
        mode: config.sampling.into(),
    }
}

/// Accuracies contributed by one task: one per group for a partition
/// cell, a single value for one re-training.
fn run_task(
    config: &SweepConfig,
    master: u64,
    task: &Task,
) -> photon_discrim_core::Result<Vec<f64>> {
    let nbar = MeanPhotonNumber::new(task.nbar)?;
    let cell = cell_seed(master, task.nbar, task.m);
    let data_seed = seed::derive(cell, &[task.rep as u64]);
    let train_seed = seed::derive(data_seed, &[task.kind.tag()]);
    let (train, test) = build_collection(&collection_params(config, nbar, task.m, data_seed))?;

    // Naive Bayes has nothing to fit, so every subset is an evaluation subset.
    let (model, eval): (Box<dyn Classifier + Send>, SubsetCollection) = match task.kind {
        ClassifierKind::Nb => (Box::new(NaiveBayesModel::new(nbar)), train.merged(test)?),
        ClassifierKind::Adaline => {
            let cfg = AdalineConfig {
                learning_rate: config.adaline.learning_rate,
                max_epochs: config.adaline.max_epochs,
                seed: train_seed,
                ..AdalineConfig::default()
            };
            (Box::new(AdalineModel::train(&train, &cfg)?), test)
        }
        ClassifierKind::Mnn => {
            let cfg = config.mnn.train_config(train_seed);
            (
                Box::new(MnnModel::train(&train, config.mnn.hidden, &cfg)?),
                test,
            )
        }
        ClassifierKind::Cnn => {
            let cfg = config.cnn.train_config(train_seed);
            let arch = CnnArchitecture::default();
            (Box::new(CnnModel::train(&train, arch, &cfg)?), test)
        }
    };

    match config.error_bars(task.kind) {
        ErrorBars::Retrain => Ok(vec![evaluate(model.as_ref(), &eval)?]),
        ErrorBars::Partition => partition(&eval, config.repetitions)?
            .iter()
            .map(|group| photon_discrim_core::classifiers::evaluate_subsets(model.as_ref(), group))
            .collect(),
    }
}

/// Splits a collection into `groups` class-balanced groups, dealing each
/// class out round-robin.
fn partition(
    coll: &SubsetCollection,
    groups: usize,
) -> photon_discrim_core::Result<Vec<Vec<Subset>>> {
    let smallest = SourceKind::ALL
        .map(|k| coll.count(k))
        .into_iter()
        .min()
        .unwrap_or(0);
    if smallest < groups {
        return Err(photon_discrim_core::Error::Config(format!(
            "cannot split {smallest} subsets per class into {groups} groups"
        )));
    }
    let mut out = vec![Vec::new(); groups];
    for kind in SourceKind::ALL {
        for (i, s) in coll.iter().filter(|s| s.label == kind).enumerate() {
            out[i % groups].push(s.clone());
        }
    }
    Ok(out)
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
