use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{load_features, load_labels, load_mask, save_features, save_labels, save_mask};
use super::{MultiModalDataset, SynthSpec};
use crate::error::{Error, Result};

/// File set of one dataset split. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub modalities: Vec<PathBuf>,
    pub labels: PathBuf,
    pub true_labels: PathBuf,
    pub mask: PathBuf,
}

/// TOML manifest describing a generated train/validation/test dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub class_count: usize,
    pub seed: u64,
    pub noise_rate: f64,
    pub train_frac: f64,
    pub val_frac: f64,
    pub synth: Option<SynthSpec>,
    pub train: DatasetFiles,
    pub val: DatasetFiles,
    pub test: DatasetFiles,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
            )
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = toml::to_string(self).expect("manifest serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Writes `dataset` under `dir` with file names prefixed by `name`.
pub fn save_dataset(dataset: &MultiModalDataset, dir: impl AsRef<Path>, name: &str) -> Result<DatasetFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut modalities = Vec::new();
    for (m, feats) in dataset.modalities.iter().enumerate() {
        let rel = PathBuf::from(format!("{name}_x{m}.fmat"));
        save_features(feats, dir.join(&rel))?;
        modalities.push(rel);
    }
    let files = DatasetFiles {
        modalities,
        labels: PathBuf::from(format!("{name}_labels.lmat")),
        true_labels: PathBuf::from(format!("{name}_true_labels.lmat")),
        mask: PathBuf::from(format!("{name}_mask.lmat")),
    };
    save_labels(&dataset.labels, dir.join(&files.labels))?;
    save_labels(&dataset.true_labels, dir.join(&files.true_labels))?;
    save_mask(&dataset.noise_mask, dir.join(&files.mask))?;
    Ok(files)
}

/// Loads one split; relative paths resolve against `base`.
pub fn load_dataset(files: &DatasetFiles, base: impl AsRef<Path>, seed: u64) -> Result<MultiModalDataset> {
    let base = base.as_ref();
    let modalities = files
        .modalities
        .iter()
        .map(|p| load_features(base.join(p)))
        .collect::<Result<Vec<_>>>()?;
    let labels = load_labels(base.join(&files.labels))?;
    let true_labels = load_labels(base.join(&files.true_labels))?;
    let mask = load_mask(base.join(&files.mask))?;
    MultiModalDataset::new(modalities, labels, true_labels, mask, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::generate_synthetic;

    #[test]
    fn dataset_round_trip_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = SynthSpec::benchmark(5);
        spec.n = 40;
        spec.k = 4;
        let ds = generate_synthetic(&spec).unwrap();
        let files = save_dataset(&ds, dir.path(), "train").unwrap();
        let manifest = DatasetManifest {
            class_count: 4,
            seed: 5,
            noise_rate: 0.0,
            train_frac: 0.7,
            val_frac: 0.1,
            synth: Some(spec),
            train: files.clone(),
            val: files.clone(),
            test: files,
        };
        let path = dir.path().join("dataset.toml");
        manifest.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back, manifest);
        let loaded = load_dataset(&back.train, dir.path(), 5).unwrap();
        assert_eq!(loaded, ds);
    }
}
