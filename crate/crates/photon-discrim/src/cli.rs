//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photon_discrim_core::{
    build_collection, count_photons, evaluate, sample_counts, seed, synthesize_trace,
    AdalineConfig, AdalineModel, CnnArchitecture, CnnModel, CollectionParams, MeanPhotonNumber,
    MnnModel, NaiveBayesModel, NetTrainConfig, PulseShape, RiseModel, Sampling, SourceKind,
};

use crate::error::{AppError, Result};
use crate::formats::dataset::{self, Manifest, Sampling as SamplingMode};
use crate::formats::model::TrainedModel;
use crate::formats::trace::{load_trace, save_trace};
use crate::harness::{self, ClassifierKind, SweepConfig};

#[derive(Debug, Parser)]
#[command(
    name = "photon-discrim",
    version,
    about = "Discriminate coherent from thermal light with few photon-number measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Photon-number histograms, simulated and analytic, for n = 0..12.
    Simulate(SimulateArgs),
    /// Render counts as a detector trace and count them back.
    Trace(TraceArgs),
    /// Accuracy against subset size for each classifier and n̄.
    Sweep(SweepArgs),
    /// (P(0), P(1), P(2)) of every subset, for 3D scatter plots.
    Project(ProjectArgs),
    /// Write a train/test feature dataset to a directory.
    Dataset(DatasetArgs),
    /// Train one classifier and save it as JSON.
    Train(TrainArgs),
    /// Apply a saved model to a dataset or a voltage trace.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed [default: $PHOTON_DISCRIM_SEED, else 1].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.77)]
    nbar: f64,
    /// Measurements per source.
    #[arg(long = "n", default_value_t = 1_000_000)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "histograms.csv")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    Coherent,
    Thermal,
}

impl From<Source> for SourceKind {
    fn from(s: Source) -> Self {
        match s {
            Source::Coherent => SourceKind::Coherent,
            Source::Thermal => SourceKind::Thermal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rise {
    Rectangular,
    RaisedCosine,
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Count an existing trace (`.csv` or binary) instead of simulating one.
    #[arg(long, conflicts_with_all = ["source", "bins", "noise", "rise", "out"])]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Source::Thermal)]
    source: Source,
    #[arg(long, default_value_t = 0.77)]
    nbar: f64,
    #[arg(long, default_value_t = 1000)]
    bins: usize,
    /// Gaussian noise standard deviation in volts.
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = Rise::Rectangular)]
    rise: Rise,
    /// Discriminator level in volts.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Where to write the simulated trace (`.csv` or binary).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep configuration; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Classifiers to run, overriding the config.
    #[arg(long, value_enum, value_delimiter = ',')]
    classifiers: Option<Vec<ClassifierKind>>,
    /// Worker threads, overriding the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a gnuplot script.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long, default_value_t = 0.77)]
    nbar: f64,
    #[arg(long, default_value_t = 60)]
    m: usize,
    #[arg(long, default_value_t = 1000)]
    n_subsets: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value = "projection.csv")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CollectionArgs {
    #[arg(long, default_value_t = 0.40)]
    nbar: f64,
    #[arg(long, default_value_t = 160)]
    m: usize,
    /// Subsets per class.
    #[arg(long, default_value_t = 1000)]
    n_subsets: usize,
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long, value_enum, default_value_t = Mode::Fresh)]
    mode: Mode,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Fresh,
    PoolPartition,
}

impl CollectionArgs {
    fn params(&self) -> Result<CollectionParams> {
        let mode = match self.mode {
            Mode::Fresh => SamplingMode::Fresh,
            Mode::PoolPartition => SamplingMode::PoolPartition,
        };
        Ok(CollectionParams {
            nbar: MeanPhotonNumber::new(self.nbar)?,
            m: self.m,
            n_subsets_per_class: self.n_subsets,
            split_fraction: self.split,
            seed: harness::resolve_seed(self.seed.seed, None)?,
            mode: mode.into(),
        })
    }
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[command(flatten)]
    collection: CollectionArgs,
    #[arg(long, default_value = "dataset")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = ClassifierKind::Adaline)]
    classifier: ClassifierKind,
    /// Train on a saved dataset instead of simulating one.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[command(flatten)]
    collection: CollectionArgs,
    /// MNN hidden width.
    #[arg(long, default_value_t = photon_discrim_core::nn::DEFAULT_HIDDEN)]
    hidden: usize,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false)]
struct ClassifyInput {
    /// Dataset directory; the test split is scored.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Voltage trace to count and classify as one subset.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: ClassifyInput,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

/// Parses `args` and runs the command. Returns the process exit status:
/// 0 on success, 1 on usage or configuration errors, 2 on I/O errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Trace(a) => trace(a),
        Command::Sweep(a) => sweep(a),
        Command::Project(a) => project(a),
        Command::Dataset(a) => write_dataset(a),
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(AppError::Config("--n must be >= 1".into()));
    }
    let nbar = MeanPhotonNumber::new(a.nbar)?;
    let rows = harness::emit_histograms(nbar, a.n, harness::resolve_seed(a.seed.seed, None)?)?;
    harness::write_histograms(&a.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}

fn trace(a: TraceArgs) -> Result<()> {
    let master = harness::resolve_seed(a.seed.seed, None)?;
    if let Some(path) = &a.input {
        let trace = load_trace(path)?;
        let counts = count_photons(&trace, a.threshold, trace.bin_duration)?;
        println!(
            "{}: {} bins, mean count {}",
            path.display(),
            counts.len(),
            counts.mean()
        );
        return Ok(());
    }
    let source = SourceKind::from(a.source);
    let truth = sample_counts(
        source,
        MeanPhotonNumber::new(a.nbar)?,
        a.bins,
        seed::derive(master, &[1]),
    )?;
    let pulse = PulseShape {
        noise_sigma: a.noise,
        rise: match a.rise {
            Rise::Rectangular => RiseModel::Rectangular,
            Rise::RaisedCosine => RiseModel::RaisedCosine,
        },
        ..PulseShape::default()
    };
    let sampling = Sampling::default();
    let trace = synthesize_trace(
        truth.counts(),
        &pulse,
        &sampling,
        seed::derive(master, &[2]),
    )?;
    if let Some(out) = &a.out {
        save_trace(out, &trace)?;
        println!("wrote {} samples to {}", trace.samples.len(), out.display());
    }
    let counted = count_photons(&trace, a.threshold, sampling.bin_duration)?;
    let mismatched = truth
        .counts()
        .iter()
        .zip(counted.counts())
        .filter(|(a, b)| a != b)
        .count();
    println!(
        "{source} n̄={}: {} bins, {} photons, {mismatched} bins miscounted",
        a.nbar,
        truth.len(),
        truth.counts().iter().map(|&c| u64::from(c)).sum::<u64>()
    );
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    if let Some(out) = a.out {
        config.output_dir = out;
    }
    if let Some(classifiers) = a.classifiers {
        config.classifiers = classifiers;
    }
    if a.workers.is_some() {
        config.workers = a.workers;
    }
    config.plot |= a.plot;
    config.validate().map_err(AppError::Config)?;
    let master = harness::resolve_seed(a.seed.seed, config.seed)?;
    let report = harness::run_sweep(&config, master)?;
    for row in report.failures() {
        eprintln!(
            "cell {} n̄={} m={} failed: {}",
            row.classifier,
            row.nbar,
            row.m,
            row.error.as_deref().unwrap_or("unknown error")
        );
    }
    println!(
        "wrote {} rows to {}",
        report.rows.len(),
        config.report_path().display()
    );
    Ok(())
}

fn project(a: ProjectArgs) -> Result<()> {
    let nbar = MeanPhotonNumber::new(a.nbar)?;
    let master = harness::resolve_seed(a.seed.seed, None)?;
    let rows = harness::export_projection(nbar, a.m, a.n_subsets, master)?;
    harness::write_projection(&a.out, &rows)?;
    println!(
        "wrote {} rows to {}; centroid distance {}",
        rows.len(),
        a.out.display(),
        harness::centroid_distance(&rows)
    );
    Ok(())
}

fn write_dataset(a: DatasetArgs) -> Result<()> {
    let params = a.collection.params()?;
    let (train, test) = build_collection(&params)?;
    dataset::write_dataset(&a.out, &Manifest::new(&params), &train, &test)?;
    println!(
        "wrote {} training and {} test subsets to {}",
        train.len(),
        test.len(),
        a.out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let (train, test, master) = match &a.dataset {
        Some(dir) => {
            let (manifest, train, test) = dataset::read_dataset(dir)?;
            let master = harness::resolve_seed(a.collection.seed.seed, Some(manifest.seed))?;
            (train, test, master)
        }
        None => {
            let params = a.collection.params()?;
            let (train, test) = build_collection(&params)?;
            (train, test, params.seed)
        }
    };
    let train_seed = seed::derive(master, &[u64::MAX]);
    let model = match a.classifier {
        ClassifierKind::Adaline => TrainedModel::Adaline(AdalineModel::train(
            &train,
            &AdalineConfig {
                seed: train_seed,
                ..AdalineConfig::default()
            },
        )?),
        ClassifierKind::Nb => TrainedModel::NaiveBayes(NaiveBayesModel::new(train.nbar)),
        ClassifierKind::Mnn => TrainedModel::Mnn(MnnModel::train(
            &train,
            a.hidden,
            &NetTrainConfig::mnn(train_seed),
        )?),
        ClassifierKind::Cnn => TrainedModel::Cnn(CnnModel::train(
            &train,
            CnnArchitecture::default(),
            &NetTrainConfig::cnn(train_seed),
        )?),
    };
    model.save(&a.out)?;
    println!(
        "{} test accuracy {} on {} subsets; saved to {}",
        a.classifier,
        evaluate(&model, &test)?,
        test.len(),
        a.out.display()
    );
    Ok(())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let model = TrainedModel::load(&a.model)?;
    if let Some(dir) = &a.input.dataset {
        let (_, _, test) = dataset::read_dataset(dir)?;
        println!(
            "accuracy {} on {} test subsets",
            evaluate(&model, &test)?,
            test.len()
        );
    }
    if let Some(path) = &a.input.trace {
        let trace = load_trace(path)?;
        let counts = count_photons(&trace, a.threshold, trace.bin_duration)?;
        let label = model.classify_counts(&counts)?;
        println!("{label} ({} bins)", counts.len());
    }
    Ok(())
}
