//! Per-modality hash functions: one-hidden-layer MLPs with `tanh` hidden
//! units and a `tanh` output that yields relaxed codes in `(-1, 1)^L`.

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;

/// Largest `f64` below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `tanh` kept strictly inside `(-1, 1)`: it rounds to exactly `±1` for
/// arguments beyond about 19, which would put a relaxed code on the corner
/// of the box.
fn strict_tanh(z: f64) -> f64 {
    z.tanh().clamp(-BELOW_ONE, BELOW_ONE)
}

/// Weights of a single modality's hash function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityParams {
    /// `d_m x H`
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// `H x L`
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub hidden: Array2<f64>,
    pub codes: Array2<f64>,
}

impl ModalityParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize, code_length: usize) -> Self {
        ModalityParams {
            w1: Array2::zeros((input_dim, hidden_dim)),
            b1: Array1::zeros(hidden_dim),
            w2: Array2::zeros((hidden_dim, code_length)),
            b2: Array1::zeros(code_length),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn code_length(&self) -> usize {
        self.w2.ncols()
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {cols} features, encoder expects {}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        self.check_input(x.ncols())?;
        let hidden = (x.dot(&self.w1) + &self.b1).mapv_into(f64::tanh);
        let codes = (hidden.dot(&self.w2) + &self.b2).mapv_into(strict_tanh);
        Ok(ForwardCache { hidden, codes })
    }

    /// Relaxed codes for a batch, one row per input row.
    pub fn encode_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.forward(x)?.codes)
    }

    pub fn encode(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let row = x.insert_axis(Axis(0));
        Ok(self.encode_batch(row)?.row(0).to_owned())
    }

    /// Parameter gradients of `sum(grad_codes .* codes)` given a cached
    /// forward pass over `x`.
    pub fn backward_cached(
        &self,
        x: ArrayView2<'_, f64>,
        cache: &ForwardCache,
        grad_codes: ArrayView2<'_, f64>,
    ) -> Result<ModalityParams> {
        if grad_codes.dim() != cache.codes.dim() {
            return Err(Error::Shape(format!(
                "upstream gradient is {:?}, codes are {:?}",
                grad_codes.dim(),
                cache.codes.dim()
            )));
        }
        self.check_input(x.ncols())?;
        let dz2 = &grad_codes * &cache.codes.mapv(|c| 1.0 - c * c);
        let w2 = cache.hidden.t().dot(&dz2);
        let b2 = dz2.sum_axis(Axis(0));
        let dh = dz2.dot(&self.w2.t());
        let dz1 = dh * cache.hidden.mapv(|h| 1.0 - h * h);
        let w1 = x.t().dot(&dz1);
        let b1 = dz1.sum_axis(Axis(0));
        Ok(ModalityParams { w1, b1, w2, b2 })
    }

    pub fn backward(
        &self,
        x: ArrayView2<'_, f64>,
        grad_codes: ArrayView2<'_, f64>,
    ) -> Result<ModalityParams> {
        let cache = self.forward(x)?;
        self.backward_cached(x, &cache, grad_codes)
    }

    pub fn slices(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }
}

/// Hash functions for all modalities, sharing `H` and `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashEncoderParams {
    pub modalities: Vec<ModalityParams>,
    pub hidden_dim: usize,
    pub code_length: usize,
}

impl HashEncoderParams {
    pub fn from_modalities(modalities: Vec<ModalityParams>) -> Result<Self> {
        let first = modalities
            .first()
            .ok_or_else(|| Error::param("modalities", "no modality parameters"))?;
        let (hidden_dim, code_length) = (first.hidden_dim(), first.code_length());
        for (m, p) in modalities.iter().enumerate() {
            if p.b1.len() != p.hidden_dim()
                || p.w2.nrows() != p.hidden_dim()
                || p.b2.len() != p.code_length()
                || p.hidden_dim() != hidden_dim
                || p.code_length() != code_length
            {
                return Err(Error::Shape(format!(
                    "modality {m} parameter shapes are inconsistent"
                )));
            }
            if p.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
                return Err(Error::param(
                    "params",
                    format!("modality {m} has non-finite weights"),
                ));
            }
        }
        Ok(HashEncoderParams {
            modalities,
            hidden_dim,
            code_length,
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modalities.iter().map(ModalityParams::input_dim).collect()
    }

    pub fn zeros_like(&self) -> Self {
        HashEncoderParams {
            modalities: self
                .modalities
                .iter()
                .map(|p| ModalityParams::zeros(p.input_dim(), self.hidden_dim, self.code_length))
                .collect(),
            hidden_dim: self.hidden_dim,
            code_length: self.code_length,
        }
    }

    pub fn encode(&self, modality: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.modality(modality)?.encode(x)
    }

    pub fn encode_batch(&self, modality: usize, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.modality(modality)?.encode_batch(x)
    }

    pub fn modality(&self, m: usize) -> Result<&ModalityParams> {
        self.modalities
            .get(m)
            .ok_or_else(|| Error::Shape(format!("modality {m} out of range ({})", self.modalities.len())))
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.modalities.iter().flat_map(|p| p.slices())
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.modalities.iter_mut().flat_map(|p| p.slices_mut())
    }
}

/// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, zero biases.
pub fn init_params(
    dims: &[usize],
    hidden_dim: usize,
    code_length: usize,
    seed: u64,
) -> Result<HashEncoderParams> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::param("dims", "modality dimensions must be positive"));
    }
    if hidden_dim == 0 {
        return Err(Error::param("hidden_dim", "must be positive"));
    }
    if code_length == 0 {
        return Err(Error::param("code_length", "must be positive"));
    }
    let mut rng = seed::rng(seed::derive_str(seed, "encoder-init"));
    let mut uniform = |rows: usize, cols: usize| {
        let bound = 1.0 / (rows as f64).sqrt();
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..=bound))
    };
    let modalities = dims
        .iter()
        .map(|&d| ModalityParams {
            w1: uniform(d, hidden_dim),
            b1: Array1::zeros(hidden_dim),
            w2: uniform(hidden_dim, code_length),
            b2: Array1::zeros(code_length),
        })
        .collect();
    Ok(HashEncoderParams {
        modalities,
        hidden_dim,
        code_length,
    })
}

/// A code of `L` logical `+1/-1` values, bit-packed (bit set = `+1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    words: Vec<u64>,
    len: usize,
}

impl BinaryCode {
    pub fn from_signs(signs: &[i8]) -> Self {
        let mut words = vec![0u64; signs.len().div_ceil(64)];
        for (i, &s) in signs.iter().enumerate() {
            if s > 0 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        BinaryCode {
            words,
            len: signs.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> i8 {
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len).map(|i| f64::from(self.get(i))).collect()
    }
}

/// Componentwise sign with `sign(0) = +1`.
pub fn binarize(code: &[f64]) -> BinaryCode {
    let signs: Vec<i8> = code.iter().map(|&c| if c >= 0.0 { 1 } else { -1 }).collect();
    BinaryCode::from_signs(&signs)
}

pub fn binarize_rows(codes: ArrayView2<'_, f64>) -> Vec<BinaryCode> {
    codes
        .rows()
        .into_iter()
        .map(|r| {
            let signs: Vec<i8> = r.iter().map(|&c| if c >= 0.0 { 1 } else { -1 }).collect();
            BinaryCode::from_signs(&signs)
        })
        .collect()
}

/// One fixed `+1/-1` prototype per class; rows are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct HashCenters(Array2<f64>);

impl HashCenters {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::param("centers", "entries must be +1 or -1"));
        }
        let mut seen = HashSet::new();
        for row in values.rows() {
            let key: Vec<bool> = row.iter().map(|&v| v > 0.0).collect();
            if !seen.insert(key) {
                return Err(Error::param("centers", "rows must be pairwise distinct"));
            }
        }
        Ok(HashCenters(values))
    }

    pub fn class_count(&self) -> usize {
        self.0.nrows()
    }

    pub fn code_length(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.0.row(k)
    }
}

/// Random `+1/-1` centers, each entry a fair coin; duplicate rows are redrawn.
pub fn init_centers(class_count: usize, code_length: usize, seed: u64) -> Result<HashCenters> {
    if code_length == 0 {
        return Err(Error::param("code_length", "must be positive"));
    }
    if code_length < usize::BITS as usize && class_count > (1usize << code_length) {
        return Err(Error::Capacity {
            classes: class_count,
            bits: code_length,
        });
    }
    let mut rng = seed::rng(seed::derive_str(seed, "hash-centers"));
    let mut seen = HashSet::new();
    let mut values = Array2::zeros((class_count, code_length));
    for k in 0..class_count {
        loop {
            let row: Vec<bool> = (0..code_length).map(|_| rng.random_bool(0.5)).collect();
            if seen.insert(row.clone()) {
                for (j, &bit) in row.iter().enumerate() {
                    values[[k, j]] = if bit { 1.0 } else { -1.0 };
                }
                break;
            }
        }
    }
    HashCenters::new(values)
}
