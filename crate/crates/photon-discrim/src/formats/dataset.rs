//! Feature datasets as a directory of CSV files plus a JSON manifest:
//!
//! - `manifest.json`: generation parameters
//! - `train.csv`, `test.csv`: one feature vector per subset
//! - `train_counts.csv`, `test_counts.csv`: the raw counts behind them

use std::collections::BTreeMap;
use std::path::Path;

use photon_discrim_core::{
    featurize, CollectionParams, MeanPhotonNumber, PhotonCountSequence, SamplingMode, SourceKind,
    Subset, SubsetCollection, FEATURE_LEN,
};
use serde::{Deserialize, Serialize};

use super::{read_rows, write_rows};
use crate::error::{AppError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const GENERATOR: &str = concat!("photon-discrim ", env!("CARGO_PKG_VERSION"));

/// Largest tolerated gap between stored and recomputed features.
const FEATURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: u32,
    pub generator: String,
    pub seed: u64,
    pub nbar: f64,
    pub m: usize,
    pub n_subsets_per_class: usize,
    pub split_fraction: f64,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Fresh,
    PoolPartition,
}

impl From<SamplingMode> for Sampling {
    fn from(mode: SamplingMode) -> Self {
        match mode {
            SamplingMode::Fresh => Self::Fresh,
            SamplingMode::PoolPartition => Self::PoolPartition,
        }
    }
}

impl From<Sampling> for SamplingMode {
    fn from(mode: Sampling) -> Self {
        match mode {
            Sampling::Fresh => Self::Fresh,
            Sampling::PoolPartition => Self::PoolPartition,
        }
    }
}

impl Manifest {
    pub fn new(params: &CollectionParams) -> Self {
        Self {
            schema: 1,
            generator: GENERATOR.to_string(),
            seed: params.seed,
            nbar: params.nbar.get(),
            m: params.m,
            n_subsets_per_class: params.n_subsets_per_class,
            split_fraction: params.split_fraction,
            sampling: params.mode.into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureRow {
    subset_id: u64,
    #[serde(with = "super::source_kind")]
    class: SourceKind,
    nbar: f64,
    m: usize,
    p0: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    p5: f64,
    p6plus: f64,
}

impl FeatureRow {
    fn probs(&self) -> [f64; FEATURE_LEN] {
        [
            self.p0,
            self.p1,
            self.p2,
            self.p3,
            self.p4,
            self.p5,
            self.p6plus,
        ]
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CountRow {
    subset_id: u64,
    bin_index: usize,
    count: u32,
}

pub fn write_dataset(
    dir: &Path,
    manifest: &Manifest,
    train: &SubsetCollection,
    test: &SubsetCollection,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    let path = dir.join(MANIFEST);
    std::fs::write(&path, json + "\n").map_err(|e| AppError::io(&path, e))?;
    for (name, coll) in [("train", train), ("test", test)] {
        write_split(dir, name, coll)?;
    }
    Ok(())
}

fn write_split(dir: &Path, name: &str, coll: &SubsetCollection) -> Result<()> {
    let features: Vec<FeatureRow> = coll
        .iter()
        .map(|s| {
            let [p0, p1, p2, p3, p4, p5, p6plus] = s.features.probs;
            FeatureRow {
                subset_id: s.id,
                class: s.label,
                nbar: coll.nbar.get(),
                m: coll.m,
                p0,
                p1,
                p2,
                p3,
                p4,
                p5,
                p6plus,
            }
        })
        .collect();
    write_rows(&dir.join(format!("{name}.csv")), &features)?;
    let counts: Vec<CountRow> = coll
        .iter()
        .flat_map(|s| {
            s.counts
                .counts()
                .iter()
                .enumerate()
                .map(|(bin_index, &count)| CountRow {
                    subset_id: s.id,
                    bin_index,
                    count,
                })
        })
        .collect();
    write_rows(&dir.join(format!("{name}_counts.csv")), &counts)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| AppError::format(&path, e))?;
    if manifest.schema != 1 {
        return Err(AppError::format(
            &path,
            format!("unsupported schema {}", manifest.schema),
        ));
    }
    Ok(manifest)
}

/// Reads a dataset directory back into (manifest, train, test). Features are
/// recomputed from the raw counts and checked against the stored ones.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, SubsetCollection, SubsetCollection)> {
    let manifest = read_manifest(dir)?;
    let nbar = MeanPhotonNumber::new(manifest.nbar)
        .map_err(|e| AppError::format(dir.join(MANIFEST), e))?;
    let train = read_split(dir, "train", &manifest, nbar)?;
    let test = read_split(dir, "test", &manifest, nbar)?;
    Ok((manifest, train, test))
}

fn read_split(
    dir: &Path,
    name: &str,
    manifest: &Manifest,
    nbar: MeanPhotonNumber,
) -> Result<SubsetCollection> {
    let feature_path = dir.join(format!("{name}.csv"));
    let counts_path = dir.join(format!("{name}_counts.csv"));
    let features: Vec<FeatureRow> = read_rows(&feature_path)?;
    let count_rows: Vec<CountRow> = read_rows(&counts_path)?;

    let mut counts: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for row in count_rows {
        let bins = counts.entry(row.subset_id).or_default();
        if row.bin_index != bins.len() {
            return Err(AppError::format(
                &counts_path,
                format!(
                    "subset {} bins out of order at {}",
                    row.subset_id, row.bin_index
                ),
            ));
        }
        bins.push(row.count);
    }

    let mut subsets = Vec::with_capacity(features.len());
    for row in features {
        let raw = counts.remove(&row.subset_id).ok_or_else(|| {
            AppError::format(
                &counts_path,
                format!("no counts for subset {}", row.subset_id),
            )
        })?;
        if raw.len() != manifest.m || row.m != manifest.m {
            return Err(AppError::format(
                &feature_path,
                format!("subset {} does not have m = {}", row.subset_id, manifest.m),
            ));
        }
        let seq = PhotonCountSequence::new(raw).map_err(|e| AppError::format(&counts_path, e))?;
        let mut fv = featurize(&seq).map_err(|e| AppError::format(&counts_path, e))?;
        if fv
            .probs
            .iter()
            .zip(row.probs())
            .any(|(a, b)| (a - b).abs() > FEATURE_TOLERANCE)
        {
            return Err(AppError::format(
                &feature_path,
                format!(
                    "features of subset {} disagree with its counts",
                    row.subset_id
                ),
            ));
        }
        fv.label = Some(row.class);
        fv.nbar = Some(nbar);
        subsets.push(Subset {
            id: row.subset_id,
            label: row.class,
            counts: seq,
            features: fv,
        });
    }
    if let Some(id) = counts.keys().next() {
        return Err(AppError::format(
            &counts_path,
            format!("counts for unknown subset {id}"),
        ));
    }
    Ok(SubsetCollection {
        subsets,
        m: manifest.m,
        nbar,
        n_subsets_per_class: manifest.n_subsets_per_class,
        split_fraction: manifest.split_fraction,
    })
}
