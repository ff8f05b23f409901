#![allow(dead_code)]

use photon_discrim_core::dataset::{featurize, Subset, SubsetCollection};
use photon_discrim_core::{MeanPhotonNumber, PhotonCountSequence, SourceKind};

pub fn nbar(x: f64) -> MeanPhotonNumber {
    MeanPhotonNumber::new(x).unwrap()
}

/// Two tight, far-apart clouds of feature vectors, `n` per class, with a
/// deterministic jitter of at most ±0.01 per coordinate.
pub fn separable_collection(n: usize) -> SubsetCollection {
    let centers = [
        (SourceKind::Coherent, [0.80, 0.15, 0.05, 0.0, 0.0, 0.0, 0.0]),
        (
            SourceKind::Thermal,
            [0.45, 0.30, 0.15, 0.06, 0.04, 0.0, 0.0],
        ),
    ];
    let mut subsets = Vec::new();
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    let mut jitter = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 0.02 - 0.01
    };
    for (class, (label, center)) in centers.into_iter().enumerate() {
        for i in 0..n {
            let counts = PhotonCountSequence::new(vec![0]).unwrap();
            let mut features = featurize(&counts).unwrap();
            features.probs = center;
            for p in features.probs.iter_mut().take(3) {
                *p += jitter();
            }
            features.label = Some(label);
            subsets.push(Subset {
                id: (class * n + i) as u64,
                label,
                counts,
                features,
            });
        }
    }
    SubsetCollection {
        subsets,
        m: 1,
        nbar: nbar(0.5),
        n_subsets_per_class: n,
        split_fraction: 0.5,
    }
}

/// Central-difference check of an analytic gradient.
///
/// Passes when every component agrees to `rel` relative error, or to 1e-9
/// absolute for components that are numerically zero. The step is small
/// enough that ReLU and max-pool kinks are rarely inside the stencil.
pub fn check_gradient(
    analytic: &[f64],
    params: &mut [f64],
    mut loss: impl FnMut(&[f64]) -> f64,
    rel: f64,
) -> Result<(), String> {
    let h = 1e-6;
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + h;
        let up = loss(params);
        params[i] = orig - h;
        let down = loss(params);
        params[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let diff = (a - numeric).abs();
        let scale = a.abs().max(numeric.abs());
        if diff > 1e-9 && diff > rel * scale {
            return Err(format!(
                "param {i}: analytic {a:e} vs numeric {numeric:e} (rel {:e})",
                diff / scale
            ));
        }
    }
    Ok(())
}
