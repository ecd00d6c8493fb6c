//! Multi-modal datasets: in-memory representation, the synthetic generator,
//! symmetric label noise, stratified splitting and the on-disk formats.

mod io;
mod manifest;
mod noise;
mod split;
mod synth;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub use io::{load_features, load_labels, load_mask, save_features, save_labels, save_mask};
pub use manifest::{load_dataset, save_dataset, DatasetFiles, DatasetManifest};
pub use noise::inject_symmetric_noise;
pub use split::{split, split_indices};
pub use synth::{generate_synthetic, SynthSpec};

/// `N x d` matrix of finite `f32` features, one row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Array2<f32>);

impl FeatureMatrix {
    pub fn new(values: Array2<f32>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "feature matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("features", "contains a non-finite value"));
        }
        Ok(FeatureMatrix(values.as_standard_layout().into_owned()))
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        let values = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(values)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f32> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.0.row(i)
    }

    /// Features widened to `f64` for the numeric kernels.
    pub fn to_f64(&self) -> Array2<f64> {
        self.0.mapv(f64::from)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix(self.0.select(ndarray::Axis(0), idx))
    }

    pub fn as_slice(&self) -> &[f32] {
        self.0.as_slice().expect("standard layout")
    }
}

/// `N x K` matrix of 0/1 class memberships.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix(Array2<u8>);

impl LabelMatrix {
    pub fn new(values: Array2<u8>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Shape("label matrix must be non-empty".into()));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::Label("entries must be exactly 0 or 1".into()));
        }
        if let Some(i) = values.rows().into_iter().position(|r| r.iter().all(|&v| v == 0)) {
            return Err(Error::Label(format!("row {i} has no positive class")));
        }
        Ok(LabelMatrix(values.as_standard_layout().into_owned()))
    }

    /// One-hot labels from class indices.
    pub fn from_classes(classes: &[usize], class_count: usize) -> Result<Self> {
        let mut values = Array2::zeros((classes.len(), class_count));
        for (i, &c) in classes.iter().enumerate() {
            if c >= class_count {
                return Err(Error::Label(format!(
                    "class {c} out of range for K={class_count}"
                )));
            }
            values[[i, c]] = 1;
        }
        Self::new(values)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, u8> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, u8> {
        self.0.row(i)
    }

    pub fn is_single_label(&self) -> bool {
        self.0
            .rows()
            .into_iter()
            .all(|r| r.iter().filter(|&&v| v == 1).count() == 1)
    }

    /// First positive class of each row.
    pub fn classes(&self) -> Vec<usize> {
        self.0
            .rows()
            .into_iter()
            .map(|r| r.iter().position(|&v| v == 1).expect("validated row"))
            .collect()
    }

    /// Whether rows `i` of `self` and `j` of `other` share a class.
    pub fn shares_class(&self, i: usize, other: &LabelMatrix, j: usize) -> bool {
        self.0
            .row(i)
            .iter()
            .zip(other.0.row(j))
            .any(|(&a, &b)| a == 1 && b == 1)
    }

    pub fn select_rows(&self, idx: &[usize]) -> LabelMatrix {
        LabelMatrix(self.0.select(ndarray::Axis(0), idx))
    }

    pub fn as_slice(&self) -> &[u8] {
        self.0.as_slice().expect("standard layout")
    }
}

/// `M >= 2` aligned modalities sharing one (possibly noisy) label matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModalDataset {
    pub modalities: Vec<FeatureMatrix>,
    pub labels: LabelMatrix,
    pub true_labels: LabelMatrix,
    /// `true` where the observed label differs from the true one.
    pub noise_mask: Vec<bool>,
    pub class_count: usize,
    pub seed: u64,
}

impl MultiModalDataset {
    pub fn new(
        modalities: Vec<FeatureMatrix>,
        labels: LabelMatrix,
        true_labels: LabelMatrix,
        noise_mask: Vec<bool>,
        seed: u64,
    ) -> Result<Self> {
        if modalities.len() < 2 {
            return Err(Error::param(
                "modalities",
                format!("need at least 2, got {}", modalities.len()),
            ));
        }
        let n = modalities[0].rows();
        if let Some(m) = modalities.iter().position(|f| f.rows() != n) {
            return Err(Error::Shape(format!(
                "modality {m} has {} rows, modality 0 has {n}",
                modalities[m].rows()
            )));
        }
        if labels.rows() != n || true_labels.rows() != n || noise_mask.len() != n {
            return Err(Error::Shape(format!(
                "labels ({}), true labels ({}) and mask ({}) must all have {n} rows",
                labels.rows(),
                true_labels.rows(),
                noise_mask.len()
            )));
        }
        if labels.class_count() != true_labels.class_count() {
            return Err(Error::Shape("label and true-label class counts differ".into()));
        }
        for (i, &flag) in noise_mask.iter().enumerate() {
            if flag != (labels.row(i) != true_labels.row(i)) {
                return Err(Error::Label(format!(
                    "noise mask disagrees with labels at row {i}"
                )));
            }
        }
        Ok(MultiModalDataset {
            class_count: labels.class_count(),
            modalities,
            labels,
            true_labels,
            noise_mask,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn modality_count(&self) -> usize {
        self.modalities.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modalities.iter().map(FeatureMatrix::cols).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> MultiModalDataset {
        MultiModalDataset {
            modalities: self.modalities.iter().map(|f| f.select_rows(idx)).collect(),
            labels: self.labels.select_rows(idx),
            true_labels: self.true_labels.select_rows(idx),
            noise_mask: idx.iter().map(|&i| self.noise_mask[i]).collect(),
            class_count: self.class_count,
            seed: self.seed,
        }
    }

    /// Replaces the observed labels, recomputing the noise mask.
    pub fn with_labels(mut self, labels: LabelMatrix) -> Result<Self> {
        if labels.rows() != self.len() || labels.class_count() != self.class_count {
            return Err(Error::Shape("replacement labels have the wrong shape".into()));
        }
        self.noise_mask = (0..self.len())
            .map(|i| labels.row(i) != self.true_labels.row(i))
            .collect();
        self.labels = labels;
        Ok(self)
    }
}
