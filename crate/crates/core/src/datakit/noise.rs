use rand::seq::index;
use rand::Rng as _;

use super::LabelMatrix;
use crate::error::{Error, Result};
use crate::seed;

/// Symmetric label noise with a deterministic flip count.
///
/// Exactly `round(rate * N)` rows, chosen uniformly without replacement,
/// get their class replaced by one drawn uniformly from the other `K - 1`
/// classes. Returns the corrupted labels and the mask of flipped rows.
pub fn inject_symmetric_noise(
    labels: &LabelMatrix,
    rate: f64,
    seed: u64,
) -> Result<(LabelMatrix, Vec<bool>)> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::param("noise_rate", format!("{rate} is outside [0, 1]")));
    }
    if !labels.is_single_label() {
        return Err(Error::UnsupportedLabels(
            "symmetric noise needs single-label (one-hot) rows".into(),
        ));
    }
    let n = labels.rows();
    let k = labels.class_count();
    let flips = (rate * n as f64).round() as usize;
    if flips > 0 && k < 2 {
        return Err(Error::UnsupportedLabels(
            "cannot flip labels with a single class".into(),
        ));
    }

    let mut rng = seed::rng(seed::derive_str(seed, "symmetric-noise"));
    let mut classes = labels.classes();
    let mut mask = vec![false; n];
    let mut chosen = index::sample(&mut rng, n, flips).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        let original = classes[i];
        let draw = rng.random_range(0..k - 1);
        classes[i] = if draw >= original { draw + 1 } else { draw };
        mask[i] = true;
    }
    Ok((LabelMatrix::from_classes(&classes, k)?, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn one_hot(n: usize, k: usize) -> LabelMatrix {
        let classes: Vec<usize> = (0..n).map(|i| i % k).collect();
        LabelMatrix::from_classes(&classes, k).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let labels = one_hot(20, 3);
        let (noisy, mask) = inject_symmetric_noise(&labels, 0.0, 5).unwrap();
        assert_eq!(noisy, labels);
        assert!(mask.iter().all(|&b| !b));
    }

    #[test]
    fn exact_flip_count_and_new_class_differs() {
        let labels = one_hot(10, 4);
        let (noisy, mask) = inject_symmetric_noise(&labels, 0.4, 11).unwrap();
        assert_eq!(mask.iter().filter(|&&b| b).count(), 4);
        let (before, after) = (labels.classes(), noisy.classes());
        for i in 0..10 {
            assert_eq!(mask[i], before[i] != after[i]);
        }
    }

    #[test]
    fn full_rate_flips_everything() {
        let labels = one_hot(30, 5);
        let (noisy, mask) = inject_symmetric_noise(&labels, 1.0, 2).unwrap();
        assert!(mask.iter().all(|&b| b));
        assert!(labels.classes().iter().zip(noisy.classes()).all(|(a, b)| *a != b));
    }

    #[test]
    fn rate_out_of_range() {
        let labels = one_hot(10, 2);
        assert!(matches!(
            inject_symmetric_noise(&labels, 1.5, 0),
            Err(Error::Param { .. })
        ));
        assert!(matches!(
            inject_symmetric_noise(&labels, -0.1, 0),
            Err(Error::Param { .. })
        ));
    }

    #[test]
    fn multi_hot_is_unsupported() {
        let labels = LabelMatrix::new(array![[1u8, 1, 0], [0, 1, 0]]).unwrap();
        assert!(matches!(
            inject_symmetric_noise(&labels, 0.5, 0),
            Err(Error::UnsupportedLabels(_))
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let labels = one_hot(200, 7);
        let a = inject_symmetric_noise(&labels, 0.3, 42).unwrap();
        let b = inject_symmetric_noise(&labels, 0.3, 42).unwrap();
        assert_eq!(a, b);
    }
}
