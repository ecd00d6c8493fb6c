use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, LabelMatrix, MultiModalDataset};
use crate::error::{Error, Result};
use crate::seed;

const MAX_LATENT_DRAWS: usize = 10_000;

/// Parameters of the synthetic multi-modal generator.
///
/// Every class owns one latent vector; an instance is its class latent plus
/// isotropic Gaussian noise, and each modality observes that point through
/// its own fixed random affine map followed by a fixed elementwise
/// nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub dims: Vec<usize>,
    pub class_separation: f64,
    pub intra_noise_std: f64,
    #[serde(default = "SynthSpec::default_latent_dim")]
    pub latent_dim: usize,
    pub seed: u64,
}

impl SynthSpec {
    fn default_latent_dim() -> usize {
        16
    }

    /// The desk-scale benchmark: 2000 instances, 8 classes, two modalities
    /// of 64 and 48 features.
    pub fn benchmark(seed: u64) -> Self {
        SynthSpec {
            n: 2000,
            k: 8,
            m: 2,
            dims: vec![64, 48],
            class_separation: 5.0,
            intra_noise_std: 1.0,
            latent_dim: Self::default_latent_dim(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param(
                "k",
                format!("need at least 2 classes, got {}", self.k),
            ));
        }
        if self.n < self.k {
            return Err(Error::param(
                "n",
                format!("N={} is smaller than K={}", self.n, self.k),
            ));
        }
        if self.m < 2 {
            return Err(Error::param(
                "m",
                format!("need at least 2 modalities, got {}", self.m),
            ));
        }
        if self.dims.len() != self.m {
            return Err(Error::param(
                "dims",
                format!("{} dimensions given for {} modalities", self.dims.len(), self.m),
            ));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::param(
                "dims",
                format!("every dimension must be >= 2, got {d}"),
            ));
        }
        if !(self.class_separation > 0.0 && self.class_separation.is_finite()) {
            return Err(Error::param(
                "class_separation",
                "must be a positive finite number",
            ));
        }
        if !(self.intra_noise_std > 0.0 && self.intra_noise_std.is_finite()) {
            return Err(Error::param(
                "intra_noise_std",
                "must be a positive finite number",
            ));
        }
        if self.latent_dim < 2 {
            return Err(Error::param("latent_dim", "must be >= 2"));
        }
        Ok(())
    }
}

fn nonlinearity(modality: usize) -> fn(f64) -> f64 {
    match modality % 3 {
        0 => f64::tanh,
        1 => |x| x + 0.5 * (2.0 * x).sin(),
        _ => |x| x / (1.0 + x.abs()),
    }
}

fn class_latents(spec: &SynthSpec, rng: &mut seed::Rng) -> Result<Vec<Array1<f64>>> {
    let mut latents: Vec<Array1<f64>> = Vec::with_capacity(spec.k);
    let mut draws = 0;
    while latents.len() < spec.k {
        draws += 1;
        if draws > MAX_LATENT_DRAWS {
            return Err(Error::param(
                "class_separation",
                "could not place class latents at the requested separation",
            ));
        }
        let dir: Array1<f64> = (0..spec.latent_dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.dot(&dir).sqrt();
        if norm == 0.0 {
            continue;
        }
        let z = dir * (spec.class_separation / norm);
        let far_enough = latents.iter().all(|c| {
            let diff = c - &z;
            diff.dot(&diff).sqrt() >= spec.class_separation
        });
        if far_enough {
            latents.push(z);
        }
    }
    Ok(latents)
}

/// Generates a clean (noise-free) dataset; deterministic for a fixed seed.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<MultiModalDataset> {
    spec.validate()?;
    let mut rng = seed::rng(seed::derive_str(spec.seed, "synth"));

    let mut classes: Vec<usize> = (0..spec.n).map(|i| i % spec.k).collect();
    classes.shuffle(&mut rng);

    let latents = class_latents(spec, &mut rng)?;
    let noise = Normal::new(0.0, spec.intra_noise_std).expect("validated std");
    let points: Vec<Array1<f64>> = classes
        .iter()
        .map(|&c| latents[c].mapv(|v| v + noise.sample(&mut rng)))
        .collect();

    let proj_scale = 1.0 / (spec.latent_dim as f64).sqrt();
    let mut modalities = Vec::with_capacity(spec.m);
    for (m, &d) in spec.dims.iter().enumerate() {
        let weights = Array2::from_shape_fn((spec.latent_dim, d), |_| {
            rng.sample::<f64, _>(StandardNormal) * proj_scale
        });
        let bias = Array1::from_shape_fn(d, |_| rng.sample::<f64, _>(StandardNormal) * 0.5);
        let act = nonlinearity(m);
        let mut out = Array2::<f32>::zeros((spec.n, d));
        for (i, p) in points.iter().enumerate() {
            let pre = p.dot(&weights) + &bias;
            out.row_mut(i).assign(&pre.mapv(|v| act(v) as f32));
        }
        modalities.push(FeatureMatrix::new(out)?);
    }

    let labels = LabelMatrix::from_classes(&classes, spec.k)?;
    MultiModalDataset::new(modalities, labels.clone(), labels, vec![false; spec.n], spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec {
            n: 100,
            k: 4,
            m: 2,
            dims: vec![32, 16],
            class_separation: 3.0,
            intra_noise_std: 0.5,
            latent_dim: 8,
            seed,
        }
    }

    #[test]
    fn shapes_and_balance() {
        let ds = generate_synthetic(&small(1)).unwrap();
        assert_eq!(ds.dims(), vec![32, 16]);
        assert_eq!(ds.len(), 100);
        assert!(ds.labels.is_single_label());
        let mut counts = [0usize; 4];
        for c in ds.labels.classes() {
            counts[c] += 1;
        }
        assert_eq!(counts, [25; 4]);
        assert!(ds.noise_mask.iter().all(|&b| !b));
    }

    #[test]
    fn uneven_counts_differ_by_at_most_one() {
        let mut spec = small(3);
        spec.n = 103;
        let ds = generate_synthetic(&spec).unwrap();
        let mut counts = [0usize; 4];
        for c in ds.labels.classes() {
            counts[c] += 1;
        }
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1, "{counts:?}");
    }

    #[test]
    fn n_below_k_is_rejected() {
        let mut spec = small(1);
        spec.n = 3;
        match generate_synthetic(&spec) {
            Err(Error::Param { field, .. }) => assert_eq!(field, "n"),
            other => panic!("expected parameter error, got {other:?}"),
        }
    }

    #[test]
    fn bad_dims_name_the_field() {
        let mut spec = small(1);
        spec.dims = vec![32, 1];
        assert!(matches!(
            generate_synthetic(&spec),
            Err(Error::Param { field: "dims", .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&small(9)).unwrap();
        let b = generate_synthetic(&small(9)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&small(10)).unwrap();
        assert_ne!(a.modalities[0], c.modalities[0]);
    }

    #[test]
    fn latents_respect_separation() {
        let spec = small(4);
        let mut rng = seed::rng(0);
        let lat = class_latents(&spec, &mut rng).unwrap();
        for a in 0..lat.len() {
            for b in a + 1..lat.len() {
                let d = &lat[a] - &lat[b];
                assert!(d.dot(&d).sqrt() >= spec.class_separation);
            }
        }
    }
}
