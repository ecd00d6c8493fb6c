//! Shared oracles for the integration suites: central finite differences
//! and random problem generators.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphash::datakit::LabelMatrix;
use sphash::encoder::{init_centers, init_params, HashCenters};
use sphash::losses::{
    cal_loss, chl_loss, nsh_loss, total_loss, BatchCodes, LossConfig, LossGrad, PaceInput, Phase,
};

pub const FD_STEP: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `max |a - n| / max(max |a|, max |n|)`, the scale-aware error between an
/// analytic and a numeric gradient.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max);
    let scale = analytic
        .iter()
        .chain(numeric)
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

/// Central differences of `f` with respect to every code entry.
pub fn numeric_code_grad(codes: &BatchCodes, f: impl Fn(&BatchCodes) -> f64) -> Vec<f64> {
    let mut probe = codes.clone();
    let mut out = Vec::new();
    for m in 0..codes.codes.len() {
        for idx in 0..codes.codes[m].len() {
            let (r, c) = (idx / codes.code_length(), idx % codes.code_length());
            let orig = probe.codes[m][[r, c]];
            probe.codes[m][[r, c]] = orig + FD_STEP;
            let up = f(&probe);
            probe.codes[m][[r, c]] = orig - FD_STEP;
            let down = f(&probe);
            probe.codes[m][[r, c]] = orig;
            out.push((up - down) / (2.0 * FD_STEP));
        }
    }
    out
}

pub fn flatten(grads: &[Array2<f64>]) -> Vec<f64> {
    grads.iter().flat_map(|g| g.iter().copied()).collect()
}

/// A random gradient-check problem: relaxed codes in (-1, 1), centers,
/// one-hot labels, weights in [0, 1] and a loss configuration.
pub struct Problem {
    pub codes: BatchCodes,
    pub centers: HashCenters,
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub cfg: LossConfig,
}

pub fn random_problem(seed: u64) -> Problem {
    let mut rng = rng(seed);
    let b = rng.random_range(2..=8);
    let l = rng.random_range(3..=8);
    let k = rng.random_range(2..=5);
    let m = rng.random_range(1..=3);
    let codes = (0..m)
        .map(|_| Array2::from_shape_fn((b, l), |_| rng.random_range(-0.95..0.95)))
        .collect();
    let classes: Vec<usize> = (0..b).map(|_| rng.random_range(0..k)).collect();
    let labels = LabelMatrix::from_classes(&classes, k).unwrap();
    let centers = init_centers(k, l, seed).unwrap();
    let weights = (0..b).map(|_| rng.random_range(0.0..=1.0)).collect();
    let cfg = LossConfig {
        tau: rng.random_range(0.3..2.0),
        r: [0.1, 0.5, 1.0][rng.random_range(0..3)],
        alpha: rng.random_range(0.0..2.0),
        r_contrastive: None,
        tau_contrastive: if rng.random_bool(0.5) {
            None
        } else {
            Some(rng.random_range(0.5..20.0))
        },
    };
    Problem {
        codes: BatchCodes::new(codes, labels).unwrap(),
        centers,
        weights,
        gamma: rng.random_range(0.1..3.0),
        cfg,
    }
}

/// Relative error of each loss kernel's code gradient on one problem:
/// `[contrastive, aggregation, self-paced, total (warm-up), total (self-paced)]`.
pub fn loss_gradient_errors(p: &Problem) -> [f64; 5] {
    let check = |analytic: LossGrad, f: &dyn Fn(&BatchCodes) -> f64| {
        relative_error(&flatten(&analytic.grads), &numeric_code_grad(&p.codes, f))
    };
    let pace = PaceInput {
        weights: &p.weights,
        gamma: p.gamma,
    };
    let total = |phase: Phase| {
        let t = total_loss(phase, &p.codes, &p.centers, Some(pace), &p.cfg).unwrap();
        let numeric = numeric_code_grad(&p.codes, |c| {
            total_loss(phase, c, &p.centers, Some(pace), &p.cfg)
                .unwrap()
                .value
        });
        relative_error(&flatten(&t.grads), &numeric)
    };
    [
        check(chl_loss(&p.codes, &p.cfg).unwrap(), &|c| {
            chl_loss(c, &p.cfg).unwrap().value
        }),
        check(cal_loss(&p.codes, &p.centers, &p.cfg).unwrap(), &|c| {
            cal_loss(c, &p.centers, &p.cfg).unwrap().value
        }),
        check(
            nsh_loss(&p.codes, &p.centers, &p.weights, p.gamma, &p.cfg).unwrap(),
            &|c| {
                nsh_loss(c, &p.centers, &p.weights, p.gamma, &p.cfg)
                    .unwrap()
                    .value
            },
        ),
        total(Phase::Warmup),
        total(Phase::SelfPaced),
    ]
}

/// Relative error of the encoder's parameter gradient for the scalar
/// `sum(G .* codes)` with a random upstream `G`.
pub fn encoder_gradient_error(seed: u64) -> f64 {
    let mut rng = rng(seed ^ 0xE4C0);
    let (b, d, h, l) = (
        rng.random_range(1..=8),
        rng.random_range(2..=6),
        rng.random_range(2..=6),
        rng.random_range(2..=8),
    );
    let params = init_params(&[d], h, l, seed).unwrap();
    let mut layer = params.modalities[0].clone();
    // push weights away from zero so the hidden layer is not linear
    for s in layer.slices_mut() {
        for v in s {
            *v += rng.random_range(-0.5..0.5);
        }
    }
    let x = Array2::from_shape_fn((b, d), |_| rng.random_range(-2.0..2.0));
    let g = Array2::from_shape_fn((b, l), |_| rng.random_range(-1.0..1.0));
    let analytic = layer.backward(x.view(), g.view()).unwrap();
    let objective = |p: &sphash::encoder::ModalityParams| (p.encode_batch(x.view()).unwrap() * &g).sum();

    let mut probe = layer.clone();
    let mut numeric = Vec::new();
    for part in 0..4 {
        for idx in 0..layer.slices()[part].len() {
            let orig = layer.slices()[part][idx];
            probe.slices_mut()[part][idx] = orig + FD_STEP;
            let up = objective(&probe);
            probe.slices_mut()[part][idx] = orig - FD_STEP;
            let down = objective(&probe);
            probe.slices_mut()[part][idx] = orig;
            numeric.push((up - down) / (2.0 * FD_STEP));
        }
    }
    let analytic: Vec<f64> = analytic.slices().iter().flat_map(|s| s.iter().copied()).collect();
    relative_error(&analytic, &numeric)
}

/// Independent average precision: precision at every relevant rank,
/// accumulated in rank order, divided by the relevant count.
pub fn naive_average_precision(relevance: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (idx, &rel) in relevance.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (idx + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// A random single-label retrieval problem kept as plain sign vectors so the
/// oracle below never touches the library's packed codes.
pub struct SignTask {
    pub queries: Vec<Vec<i8>>,
    pub query_classes: Vec<usize>,
    pub gallery: Vec<Vec<i8>>,
    pub gallery_classes: Vec<usize>,
    pub class_count: usize,
}

pub fn random_sign_task(seed: u64, max_queries: usize, max_gallery: usize, max_len: usize) -> SignTask {
    let mut rng = rng(seed ^ 0x5167);
    let l = rng.random_range(1..=max_len);
    let k = rng.random_range(1..=4);
    let q = rng.random_range(1..=max_queries);
    let g = rng.random_range(1..=max_gallery);
    let code = |rng: &mut ChaCha8Rng| -> Vec<i8> {
        (0..l)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect()
    };
    let queries = (0..q).map(|_| code(&mut rng)).collect();
    let gallery = (0..g).map(|_| code(&mut rng)).collect();
    SignTask {
        queries,
        query_classes: (0..q).map(|_| rng.random_range(0..k)).collect(),
        gallery,
        gallery_classes: (0..g).map(|_| rng.random_range(0..k)).collect(),
        class_count: k,
    }
}

impl SignTask {
    pub fn to_task(&self) -> sphash::evaluator::RetrievalTask {
        use sphash::encoder::BinaryCode;
        let codes = |v: &[Vec<i8>]| v.iter().map(|s| BinaryCode::from_signs(s)).collect();
        sphash::evaluator::RetrievalTask::new(
            sphash::evaluator::Direction::I2T,
            codes(&self.queries),
            LabelMatrix::from_classes(&self.query_classes, self.class_count).unwrap(),
            codes(&self.gallery),
            LabelMatrix::from_classes(&self.gallery_classes, self.class_count).unwrap(),
        )
        .unwrap()
    }

    /// The same task with the gallery reordered: new position `p` holds old
    /// item `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> SignTask {
        SignTask {
            queries: self.queries.clone(),
            query_classes: self.query_classes.clone(),
            gallery: perm.iter().map(|&j| self.gallery[j].clone()).collect(),
            gallery_classes: perm.iter().map(|&j| self.gallery_classes[j]).collect(),
            class_count: self.class_count,
        }
    }
}

/// Hamming distance from the dot product of sign vectors.
pub fn dot_distance(a: &[i8], b: &[i8]) -> u32 {
    let dot: i64 = a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum();
    ((a.len() as i64 - dot) / 2) as u32
}

/// Brute-force MAP: full comparison sort of the gallery by
/// `(distance, tie_key[j])`, then precision at every relevant rank.
pub fn naive_map(task: &SignTask, tie_key: &[usize]) -> f64 {
    let mut total = 0.0;
    for (q, code) in task.queries.iter().enumerate() {
        let mut order: Vec<usize> = (0..task.gallery.len()).collect();
        order.sort_by_key(|&j| (dot_distance(code, &task.gallery[j]), tie_key[j]));
        let relevance: Vec<bool> = order
            .iter()
            .map(|&j| task.gallery_classes[j] == task.query_classes[q])
            .collect();
        total += naive_average_precision(&relevance);
    }
    total / task.queries.len() as f64
}
