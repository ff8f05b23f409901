//! Sweep engine and figure data: accuracy-vs-m curves, photon-number
//! histograms, feature-space projections and the hidden-width sweep.

mod figures;
mod report;
mod sweep;

pub use figures::{
    centroid_distance, emit_histograms, export_projection, width_sweep, write_histograms,
    write_projection, HistogramRow, ProjectionRow, WidthPoint, HISTOGRAM_MAX_N,
};
pub use report::{gnuplot_script, slope, AccuracyReport, AccuracyRow};
pub use sweep::{
    cell_seed, compute_sweep, mean_and_std, resolve_seed, run_sweep, AdalineSettings,
    ClassifierKind, ErrorBars, NetSettings, SweepConfig, DEFAULT_SEED, PLOT_FILE, REPORT_FILE,
    SEED_ENV,
};
