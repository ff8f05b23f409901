//! Acceptance criteria 1 to 8. Each test prints a `criterion N: PASS` or
//! `criterion N: FAIL` line followed by the measured values, then asserts.
//!
//! Every random quantity is drawn from `DEFAULT_SEED`; no seed was tuned.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use photon_discrim::harness::{
    centroid_distance, compute_sweep, export_projection, slope, width_sweep, AccuracyReport,
    ClassifierKind, SweepConfig, DEFAULT_SEED,
};
use photon_discrim_core::classifiers::{delta_update, nb_classify};
use photon_discrim_core::nn::{examples, Standardizer};
use photon_discrim_core::photon_stats::pmf;
use photon_discrim_core::{
    build_collection, coherent_pmf, count_photons, sample_counts, seed, synthesize_trace,
    thermal_pmf, CnnArchitecture, CnnModel, CollectionParams, MeanPhotonNumber, MnnModel,
    NaiveBayesModel, PhotonCountSequence, PulseShape, Sampling, SourceKind, CANONICAL_NBAR,
    FEATURE_LEN,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn nbar(x: f64) -> MeanPhotonNumber {
    MeanPhotonNumber::new(x).unwrap()
}

/// Prints the verdict block and fails the test when any check failed.
///
/// The block is written to the process stdout directly rather than through
/// `println!`, so it appears even for passing tests, whose `println!`
/// output the test harness captures.
fn verdict(criterion: u32, checks: &[(bool, String)]) {
    let ok = checks.iter().all(|c| c.0);
    let mut block = format!(
        "\ncriterion {criterion}: {}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    for (pass, detail) in checks {
        let mark = if *pass { "ok" } else { "FAILED" };
        block += &format!("  [{mark}] {detail}\n");
    }
    let mut out = std::io::stdout().lock();
    out.write_all(block.as_bytes()).unwrap();
    out.flush().unwrap();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.0)
        .map(|c| c.1.as_str())
        .collect();
    assert!(ok, "criterion {criterion} failed: {}", failed.join("; "));
}

fn default_report() -> &'static AccuracyReport {
    static REPORT: OnceLock<AccuracyReport> = OnceLock::new();
    REPORT.get_or_init(|| compute_sweep(&SweepConfig::default(), DEFAULT_SEED).unwrap())
}

/// Total variation distance between the empirical distribution of `counts`
/// and the analytic pmf, including analytic mass beyond the largest count.
fn tv_distance(source: SourceKind, x: MeanPhotonNumber, counts: &[u32]) -> f64 {
    let max = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0.0; max + 1];
    for &c in counts {
        hist[c as usize] += 1.0 / counts.len() as f64;
    }
    let mut covered = 0.0;
    let mut sum = 0.0;
    for (n, h) in hist.iter().enumerate() {
        let p = pmf(source, n as u32, x);
        covered += p;
        sum += (h - p).abs();
    }
    0.5 * (sum + (1.0 - covered).max(0.0))
}

#[test]
fn criterion_1_distribution_fidelity() {
    let mut checks = Vec::new();
    for x in CANONICAL_NBAR {
        for source in SourceKind::ALL {
            let start = Instant::now();
            let s = seed::derive(DEFAULT_SEED, &[x.to_bits(), source.index() as u64]);
            let counts = sample_counts(source, nbar(x), 1_000_000, s).unwrap();
            let tv = tv_distance(source, nbar(x), counts.counts());
            let elapsed = start.elapsed();
            checks.push((
                tv < 0.005 && elapsed < Duration::from_secs(10),
                format!("{source} n̄={x}: TV {tv:.5} (< 0.005) in {elapsed:.2?} (< 10 s)"),
            ));
        }
    }
    verdict(1, &checks);
}

#[test]
fn criterion_2_naive_bayes_curve() {
    let config = SweepConfig {
        nbar: vec![0.40],
        m: vec![10, 160],
        classifiers: vec![ClassifierKind::Nb],
        ..SweepConfig::default()
    };
    let start = Instant::now();
    let report = compute_sweep(&config, DEFAULT_SEED).unwrap();
    let elapsed = start.elapsed();
    let acc = |m| {
        report
            .get(ClassifierKind::Nb, 0.40, m)
            .unwrap()
            .mean_accuracy
    };
    let (lo, hi) = (acc(10), acc(160));
    verdict(
        2,
        &[
            (
                (0.67..=0.77).contains(&lo),
                format!("n̄=0.40 m=10: accuracy {lo:.4} (0.72 ± 0.05)"),
            ),
            (
                (0.83..=0.93).contains(&hi),
                format!("n̄=0.40 m=160: accuracy {hi:.4} (0.88 ± 0.05)"),
            ),
            (
                elapsed < Duration::from_secs(60),
                format!("runtime {elapsed:.2?} (< 1 min)"),
            ),
        ],
    );
}

#[test]
fn criterion_3_adaline_curve() {
    let config = SweepConfig {
        classifiers: vec![ClassifierKind::Adaline],
        ..SweepConfig::default()
    };
    let start = Instant::now();
    let report = compute_sweep(&config, DEFAULT_SEED).unwrap();
    let elapsed = start.elapsed();
    let acc = |m| {
        report
            .get(ClassifierKind::Adaline, 0.40, m)
            .unwrap()
            .mean_accuracy
    };
    let (lo, hi) = (acc(10), acc(160));
    verdict(
        3,
        &[
            (
                (0.56..=0.70).contains(&lo),
                format!("n̄=0.40 m=10: accuracy {lo:.4} (in [0.56, 0.70])"),
            ),
            (
                hi > 0.88,
                format!("n̄=0.40 m=160: accuracy {hi:.4} (> 0.88)"),
            ),
            (
                report.failures().count() == 0,
                format!("{} grid cells, none failed", report.rows.len()),
            ),
            (
                elapsed < Duration::from_secs(300),
                format!("full 4 n̄ × 16 m grid in {elapsed:.2?} (< 5 min)"),
            ),
        ],
    );
}

fn monotonicity_checks(report: &AccuracyReport, kind: ClassifierKind) -> Vec<(bool, String)> {
    let mut checks = Vec::new();
    for x in CANONICAL_NBAR {
        let points: Vec<(f64, f64)> = report
            .curve(kind, x)
            .iter()
            .map(|r| (r.m as f64, r.mean_accuracy))
            .collect();
        let s = slope(&points);
        checks.push((
            s > 0.0,
            format!(
                "{kind} n̄={x}: slope {s:.3e} per data point over {} m values",
                points.len()
            ),
        ));
    }
    let at_160: Vec<f64> = CANONICAL_NBAR
        .iter()
        .map(|&x| report.get(kind, x, 160).unwrap().mean_accuracy)
        .collect();
    checks.push((
        at_160.windows(2).all(|w| w[1] >= w[0]),
        format!("{kind} m=160 across n̄ {CANONICAL_NBAR:?}: {at_160:.4?}"),
    ));
    checks
}

#[test]
fn criterion_4_monotonicity() {
    let mut checks = Vec::new();
    let report = default_report();
    for kind in [ClassifierKind::Adaline, ClassifierKind::Nb] {
        checks.extend(monotonicity_checks(report, kind));
    }

    // The networks are slower to train: the MNN runs the full m grid with
    // three re-trainings per cell, the CNN a coarser grid with two.
    let mnn = SweepConfig {
        classifiers: vec![ClassifierKind::Mnn],
        repetitions: 3,
        ..SweepConfig::default()
    };
    checks.extend(monotonicity_checks(
        &compute_sweep(&mnn, DEFAULT_SEED).unwrap(),
        ClassifierKind::Mnn,
    ));
    let cnn = SweepConfig {
        classifiers: vec![ClassifierKind::Cnn],
        m: vec![10, 80, 160],
        repetitions: 2,
        ..SweepConfig::default()
    };
    checks.extend(monotonicity_checks(
        &compute_sweep(&cnn, DEFAULT_SEED).unwrap(),
        ClassifierKind::Cnn,
    ));
    verdict(4, &checks);
}

#[test]
fn criterion_5_separability() {
    let distance = |x: f64, m: usize| {
        centroid_distance(&export_projection(nbar(x), m, 1000, DEFAULT_SEED).unwrap())
    };
    let across_nbar: Vec<f64> = CANONICAL_NBAR.iter().map(|&x| distance(x, 60)).collect();
    let ms = [10, 60, 160, 600];
    let across_m: Vec<f64> = ms.iter().map(|&m| distance(0.77, m)).collect();
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    verdict(
        5,
        &[
            (
                increasing(&across_nbar),
                format!("M=60, n̄ {CANONICAL_NBAR:?}: distances {across_nbar:.5?}"),
            ),
            (
                increasing(&across_m),
                format!("n̄=0.77, M {ms:?}: distances {across_m:.5?}"),
            ),
        ],
    );
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn naive_bayes_oracle() -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 512,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (prop::collection::vec(0u32..=10, 1..=20), 0.1f64..2.0);
    runner
        .run(&strategy, |(counts, x)| {
            let model = NaiveBayesModel::new(nbar(x));
            let seq = PhotonCountSequence::new(counts.clone()).unwrap();
            let (label, margin) = nb_classify(&seq, &model).unwrap();
            let pc: f64 = 0.5
                * counts
                    .iter()
                    .map(|&n| coherent_pmf(n, nbar(x)))
                    .product::<f64>();
            let pt: f64 = 0.5
                * counts
                    .iter()
                    .map(|&n| thermal_pmf(n, nbar(x)))
                    .product::<f64>();
            let direct = (pc / pt).ln();
            prop_assume!(direct.abs() > 1e-6);
            let expected = if direct > 0.0 {
                SourceKind::Coherent
            } else {
                SourceKind::Thermal
            };
            prop_assert_eq!(label, expected);
            prop_assert!(relative_gap(margin, direct.abs()) <= 1e-10);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn delta_rule_oracle() -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 512,
        failure_persistence: None,
        ..Config::default()
    });
    let v = prop::array::uniform7(-1.0f64..1.0);
    let strategy = (v.clone(), -1.0f64..1.0, v, any::<bool>(), 1e-4f64..0.1);
    let loss = |w: &[f64; FEATURE_LEN], b: f64, x: &[f64; FEATURE_LEN], d: f64| {
        let y: f64 = w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b;
        0.5 * (d - y) * (d - y)
    };
    runner
        .run(&strategy, |(w, b, x, positive, eta)| {
            let d = if positive { 1.0 } else { -1.0 };
            let (mut w2, mut b2) = (w, b);
            delta_update(&mut w2, &mut b2, &x, d, eta);
            let h = 1e-4;
            for i in 0..FEATURE_LEN {
                let (mut up, mut down) = (w, w);
                up[i] += h;
                down[i] -= h;
                let g = (loss(&up, b, &x, d) - loss(&down, b, &x, d)) / (2.0 * h);
                prop_assert!(relative_gap(w2[i] - w[i], -eta * g) <= 1e-6);
            }
            let g = (loss(&w, b + h, &x, d) - loss(&w, b - h, &x, d)) / (2.0 * h);
            prop_assert!(relative_gap(b2 - b, -eta * g) <= 1e-6);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Central differences with step 1e-6; a component passes at `rel`
/// relative error or 1e-9 absolute.
fn gradient_check(
    analytic: &[f64],
    params: &[f64],
    loss: impl Fn(&[f64]) -> f64,
    rel: f64,
) -> Result<(), String> {
    let h = 1e-6;
    let mut p = params.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss(&p);
        p[i] = orig - h;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let diff = (analytic[i] - numeric).abs();
        if diff > 1e-9 && diff > rel * analytic[i].abs().max(numeric.abs()) {
            return Err(format!(
                "param {i}: analytic {:e} vs numeric {numeric:e}",
                analytic[i]
            ));
        }
    }
    Ok(())
}

fn network_oracles() -> Result<(), String> {
    for s in [1, 2, 3] {
        let params = CollectionParams {
            n_subsets_per_class: 20,
            ..CollectionParams::new(nbar(0.77), 20, s)
        };
        let (train, _) = build_collection(&params).unwrap();
        let batch = examples(&train);

        let mut mnn = MnnModel::initialized(10, s);
        mnn.input = Standardizer::fit(&batch);
        let (_, grad) = mnn.loss_and_grad(&batch);
        gradient_check(
            &grad,
            mnn.params(),
            |p| {
                let mut m = mnn.clone();
                m.params_mut().copy_from_slice(p);
                m.loss(&batch)
            },
            1e-5,
        )
        .map_err(|e| format!("MNN seed {s}: {e}"))?;

        let mut cnn = CnnModel::initialized(CnnArchitecture::default(), s).unwrap();
        cnn.input = Standardizer::fit(&batch);
        let (_, grad) = cnn.loss_and_grad(&batch);
        gradient_check(
            &grad,
            cnn.params(),
            |p| {
                let mut m = cnn.clone();
                m.params_mut().copy_from_slice(p);
                m.loss(&batch)
            },
            1e-5,
        )
        .map_err(|e| format!("CNN seed {s}: {e}"))?;
    }
    Ok(())
}

fn trace_oracle() -> Result<(), String> {
    let truth = sample_counts(SourceKind::Thermal, nbar(0.77), 10_000, DEFAULT_SEED).unwrap();
    let trace = synthesize_trace(
        truth.counts(),
        &PulseShape::default(),
        &Sampling::default(),
        seed::derive(DEFAULT_SEED, &[1]),
    )
    .unwrap();
    let counted = count_photons(&trace, 0.5, 1e-6).unwrap();
    let wrong = truth
        .counts()
        .iter()
        .zip(counted.counts())
        .filter(|(a, b)| a != b)
        .count();
    if counted.len() == truth.len() && wrong == 0 {
        Ok(())
    } else {
        Err(format!("{wrong} of {} bins miscounted", truth.len()))
    }
}

#[test]
fn criterion_6_oracle_equivalences() {
    let describe = |name: &str, r: Result<(), String>| match r {
        Ok(()) => (true, name.to_string()),
        Err(e) => (false, format!("{name}: {e}")),
    };
    verdict(
        6,
        &[
            describe(
                "(a) naive Bayes log space vs direct product, 512 sequences of length <= 20, 1e-10 relative",
                naive_bayes_oracle(),
            ),
            describe(
                "(b) delta update vs finite-difference gradient of (d - y)^2 / 2, 512 cases, 1e-6 relative",
                delta_rule_oracle(),
            ),
            describe(
                "(c) MNN and CNN full gradient checks at seeds 1, 2, 3, 1e-5 relative",
                network_oracles(),
            ),
            describe(
                "(d) count_photons(synthesize_trace(c)) == c over 10^4 thermal bins at noise 0.02",
                trace_oracle(),
            ),
        ],
    );
}

#[test]
fn criterion_7_mnn_width_sweep() {
    let mut checks = Vec::new();
    for x in [0.40, 0.77] {
        let points = width_sweep(nbar(x), 160, &[10, 200], 1000, DEFAULT_SEED).unwrap();
        let (narrow, wide) = (points[0].accuracy, points[1].accuracy);
        checks.push((
            narrow >= wide - 0.02,
            format!("n̄={x} m=160: width 10 accuracy {narrow:.4}, width 200 accuracy {wide:.4}"),
        ));
    }
    verdict(7, &checks);
}

#[test]
fn criterion_8_determinism() {
    let first = default_report().to_csv();
    let again = SweepConfig {
        workers: Some(3),
        ..SweepConfig::default()
    };
    let second = compute_sweep(&again, DEFAULT_SEED).unwrap().to_csv();
    verdict(
        8,
        &[(
            first.as_bytes() == second.as_bytes(),
            format!(
                "default sweep ({} bytes) repeated on 3 workers is byte-identical",
                first.len()
            ),
        )],
    );
}
