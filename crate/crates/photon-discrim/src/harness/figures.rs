use std::path::Path;

use photon_discrim_core::photon_stats::pmf;
use photon_discrim_core::{
    build_collection, evaluate, sample_counts, seed, CollectionParams, MeanPhotonNumber, MnnModel,
    NetTrainConfig, SourceKind,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formats::write_rows;

/// Histograms cover photon numbers 0..=HISTOGRAM_MAX_N.
pub const HISTOGRAM_MAX_N: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub n: u32,
    pub empirical_coherent: f64,
    pub analytic_coherent: f64,
    pub empirical_thermal: f64,
    pub analytic_thermal: f64,
}

/// Empirical and analytic photon-number probabilities for both sources
/// from `n_measurements` simulated bins each.
pub fn emit_histograms(
    nbar: MeanPhotonNumber,
    n_measurements: usize,
    master_seed: u64,
) -> Result<Vec<HistogramRow>> {
    let mut empirical = [[0.0; HISTOGRAM_MAX_N as usize + 1]; 2];
    for source in SourceKind::ALL {
        let s = seed::derive(master_seed, &[source.index() as u64]);
        let counts = sample_counts(source, nbar, n_measurements, s)?;
        let hist = &mut empirical[source.index()];
        for &c in counts.counts() {
            if let Some(h) = hist.get_mut(c as usize) {
                *h += 1.0;
            }
        }
        hist.iter_mut().for_each(|h| *h /= n_measurements as f64);
    }
    Ok((0..=HISTOGRAM_MAX_N)
        .map(|n| HistogramRow {
            n,
            empirical_coherent: empirical[0][n as usize],
            analytic_coherent: pmf(SourceKind::Coherent, n, nbar),
            empirical_thermal: empirical[1][n as usize],
            analytic_thermal: pmf(SourceKind::Thermal, n, nbar),
        })
        .collect())
}

pub fn write_histograms(path: &Path, rows: &[HistogramRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    #[serde(with = "crate::formats::source_kind")]
    pub class: SourceKind,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

/// (P(0), P(1), P(2)) of every subset in a freshly built collection,
/// training and test subsets alike.
pub fn export_projection(
    nbar: MeanPhotonNumber,
    m: usize,
    n_subsets_per_class: usize,
    master_seed: u64,
) -> Result<Vec<ProjectionRow>> {
    let params = CollectionParams {
        n_subsets_per_class,
        ..CollectionParams::new(nbar, m, master_seed)
    };
    let (train, test) = build_collection(&params)?;
    Ok(train
        .iter()
        .chain(&test)
        .map(|s| {
            let p = s.features.probs;
            ProjectionRow {
                class: s.label,
                p0: p[0],
                p1: p[1],
                p2: p[2],
            }
        })
        .collect())
}

pub fn write_projection(path: &Path, rows: &[ProjectionRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Euclidean distance between the coherent and thermal centroids in
/// (P(0), P(1), P(2)).
pub fn centroid_distance(rows: &[ProjectionRow]) -> f64 {
    let centroid = |kind: SourceKind| {
        let mut sum = [0.0; 3];
        let mut n = 0.0;
        for r in rows.iter().filter(|r| r.class == kind) {
            sum[0] += r.p0;
            sum[1] += r.p1;
            sum[2] += r.p2;
            n += 1.0;
        }
        sum.map(|v| v / n)
    };
    let (c, t) = (
        centroid(SourceKind::Coherent),
        centroid(SourceKind::Thermal),
    );
    c.iter()
        .zip(&t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPoint {
    pub hidden: usize,
    pub accuracy: f64,
}

/// Test accuracy of the MNN at each hidden width, all trained on the same
/// collection for the same number of epochs.
pub fn width_sweep(
    nbar: MeanPhotonNumber,
    m: usize,
    widths: &[usize],
    n_subsets_per_class: usize,
    master_seed: u64,
) -> Result<Vec<WidthPoint>> {
    let params = CollectionParams {
        n_subsets_per_class,
        ..CollectionParams::new(
            nbar,
            m,
            seed::derive(master_seed, &[nbar.get().to_bits(), m as u64]),
        )
    };
    let (train, test) = build_collection(&params)?;
    widths
        .iter()
        .map(|&hidden| {
            let cfg = NetTrainConfig::mnn(seed::derive(master_seed, &[hidden as u64]));
            let model = MnnModel::train(&train, hidden, &cfg)?;
            Ok(WidthPoint {
                hidden,
                accuracy: evaluate(&model, &test)?,
            })
        })
        .collect()
}
