use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::ClassifierKind;
use crate::error::{AppError, Result};
use crate::formats::{csv_error, read_rows};

/// One (classifier, n̄, m) cell. A failed cell has NaN accuracies and keeps
/// its error message in memory only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub classifier: ClassifierKind,
    pub nbar: f64,
    pub m: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(skip)]
    pub error: Option<String>,
}

impl AccuracyRow {
    pub fn new(
        classifier: ClassifierKind,
        nbar: f64,
        m: usize,
        mean_accuracy: f64,
        std_accuracy: f64,
        repetitions: usize,
        seed: u64,
    ) -> Self {
        Self {
            classifier,
            nbar,
            m,
            mean_accuracy,
            std_accuracy,
            repetitions,
            seed,
            error: None,
        }
    }

    pub fn failed(
        classifier: ClassifierKind,
        nbar: f64,
        m: usize,
        repetitions: usize,
        seed: u64,
        error: String,
    ) -> Self {
        Self {
            error: Some(error),
            ..Self::new(classifier, nbar, m, f64::NAN, f64::NAN, repetitions, seed)
        }
    }

    pub fn is_failure(&self) -> bool {
        self.mean_accuracy.is_nan()
    }
}

/// Equal when every CSV column matches; NaN equals NaN.
impl PartialEq for AccuracyRow {
    fn eq(&self, other: &Self) -> bool {
        let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.classifier == other.classifier
            && self.nbar == other.nbar
            && self.m == other.m
            && same(self.mean_accuracy, other.mean_accuracy)
            && same(self.std_accuracy, other.std_accuracy)
            && self.repetitions == other.repetitions
            && self.seed == other.seed
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyReport {
    pub fn get(&self, classifier: ClassifierKind, nbar: f64, m: usize) -> Option<&AccuracyRow> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.nbar == nbar && r.m == m)
    }

    /// Rows for one classifier and n̄, in increasing m.
    pub fn curve(&self, classifier: ClassifierKind, nbar: f64) -> Vec<&AccuracyRow> {
        let mut rows: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.classifier == classifier && r.nbar == nbar)
            .collect();
        rows.sort_by_key(|r| r.m);
        rows
    }

    pub fn failures(&self) -> impl Iterator<Item = &AccuracyRow> {
        self.rows.iter().filter(|r| r.is_failure())
    }

    /// The report as CSV text with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory CSV write");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = crate::formats::create(path)?;
        std::io::Write::write_all(&mut out, self.to_csv().as_bytes())
            .and_then(|_| std::io::Write::flush(&mut out))
            .map_err(|e| AppError::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Ok(Self {
            rows: read_rows(path)?,
        })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| csv_error(Path::new("<report>"), e))?;
        Ok(Self { rows })
    }
}

/// Least-squares slope of y against x.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// A gnuplot script drawing accuracy against m with error bars, one curve
/// per (classifier, n̄), reading the report CSV from `csv_name`.
pub fn gnuplot_script(csv_name: &str, report: &AccuracyReport) -> String {
    let mut curves: Vec<(ClassifierKind, f64)> =
        report.rows.iter().map(|r| (r.classifier, r.nbar)).collect();
    curves.dedup();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead bottom right\n");
    s.push_str("set xlabel 'data points per subset (m)'\n");
    s.push_str("set ylabel 'accuracy'\n");
    s.push_str("set yrange [0.4:1.02]\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'accuracy.png'\n");
    let plots: Vec<String> = curves
        .iter()
        .map(|(kind, nbar)| {
            format!(
                "'{csv_name}' using (strcol(1) eq '{kind}' && $2 == {nbar} ? $3 : 1/0):4:5 \
                 with yerrorlines title '{kind} n={nbar}'"
            )
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let report = AccuracyReport {
            rows: vec![
                AccuracyRow::new(ClassifierKind::Nb, 0.4, 10, 0.6125, 0.025, 10, 42),
                AccuracyRow::failed(ClassifierKind::Cnn, 0.77, 160, 10, 7, "diverged".into()),
            ],
        };
        let text = report.to_csv();
        assert_eq!(
            text,
            "classifier,nbar,m,mean_accuracy,std_accuracy,repetitions,seed\n\
             nb,0.4,10,0.6125,0.025,10,42\n\
             cnn,0.77,160,NaN,NaN,10,7\n"
        );
        assert_eq!(AccuracyReport::from_csv(&text).unwrap(), report);
    }

    #[test]
    fn least_squares_slope() {
        assert!((slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-15);
    }
}
