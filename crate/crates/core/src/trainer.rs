//! Training loop: warm-up on the center aggregation loss, then self-paced
//! epochs that refresh the instance weights with the parameters frozen and
//! train on the weighted loss with the weights frozen.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::checkpoint::save_checkpoint;
use crate::datakit::{LabelMatrix, MultiModalDataset};
use crate::encoder::{binarize_rows, init_centers, init_params, HashCenters, HashEncoderParams};
use crate::error::{Error, Result};
use crate::evaluator::{mean_average_precision, Direction, RetrievalTask};
use crate::exec::Exec;
use crate::losses::{per_instance_loss, total_loss, BatchCodes, LossConfig, PaceInput, Phase};
use crate::pacer::{self, gamma_at, refresh_weights, PaceSchedule, SampleWeights};
use crate::seed;

/// Instances per chunk when refreshing weights over the training set.
const REFRESH_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// No warm-up epochs.
    NoWarmup,
    /// Contrastive term removed (`alpha = 0`).
    NoChl,
    /// Self-paced weighting removed (`w = 1` for everyone).
    NoSpl,
    /// Every non-zero weight raised to one.
    BinarizeWeights,
    /// Pace parameter replaced by `gamma_override`, typically above the
    /// largest attainable loss so every instance is admitted.
    GammaOverride,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Full,
        Variant::NoWarmup,
        Variant::NoChl,
        Variant::NoSpl,
        Variant::BinarizeWeights,
        Variant::GammaOverride,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoWarmup => "no_warmup",
            Variant::NoChl => "no_chl",
            Variant::NoSpl => "no_spl",
            Variant::BinarizeWeights => "binarize_weights",
            Variant::GammaOverride => "gamma_override",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::param("variant", format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    /// Adam-style first/second moment estimates (0.9 / 0.999, eps 1e-8).
    AdaptiveMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub code_length: usize,
    pub hidden_dim: usize,
    pub batch_size: usize,
    pub warmup_epochs: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub loss: LossConfig,
    /// `None` resolves to a fixed pace at half the largest attainable loss.
    pub pace: Option<PaceSchedule>,
    /// Pace parameter used by [`Variant::GammaOverride`].
    pub gamma_override: f64,
    pub seed: u64,
    pub variant: Variant,
    pub eval_every: usize,
    /// Score validation retrieval with true rather than observed labels.
    pub clean_val: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            code_length: 32,
            hidden_dim: 256,
            batch_size: 128,
            warmup_epochs: 5,
            max_epochs: 100,
            learning_rate: 1e-3,
            optimizer: Optimizer::AdaptiveMoments,
            loss: LossConfig::default(),
            pace: None,
            gamma_override: 200.0,
            seed: 0,
            variant: Variant::Full,
            eval_every: 1,
            clean_val: false,
        }
    }
}

impl TrainConfig {
    /// Applies the variant's overrides and materializes the default pace.
    pub fn resolved(&self, modalities: usize) -> Result<TrainConfig> {
        let mut cfg = self.clone();
        match cfg.variant {
            Variant::NoWarmup => cfg.warmup_epochs = 0,
            Variant::NoChl => cfg.loss.alpha = 0.0,
            _ => {}
        }
        if cfg.pace.is_none() {
            cfg.pace = Some(PaceSchedule::midpoint(modalities, cfg.loss.r)?);
        }
        cfg.validate(modalities)?;
        Ok(cfg)
    }

    pub fn validate(&self, modalities: usize) -> Result<()> {
        if self.code_length == 0 {
            return Err(Error::param("code_length", "must be positive"));
        }
        if self.hidden_dim == 0 {
            return Err(Error::param("hidden_dim", "must be positive"));
        }
        if self.batch_size < 2 {
            return Err(Error::param(
                "batch_size",
                "need at least 2 (one negative per instance)",
            ));
        }
        if self.warmup_epochs >= self.max_epochs {
            return Err(Error::param("warmup_epochs", "must be below max_epochs"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate", "must be non-negative"));
        }
        if self.eval_every == 0 {
            return Err(Error::param("eval_every", "must be positive"));
        }
        self.loss.validate()?;
        let upper = pacer::max_instance_loss(modalities, self.loss.r)?;
        if let Some(pace) = &self.pace {
            pace.validate(upper)?;
        }
        if self.variant == Variant::GammaOverride && !(self.gamma_override > 0.0) {
            return Err(Error::param("gamma_override", "must be positive"));
        }
        Ok(())
    }

    fn schedule(&self) -> PaceSchedule {
        self.pace.expect("resolved config")
    }
}

/// Moment estimates for [`Optimizer::AdaptiveMoments`].
#[derive(Debug, Clone)]
pub struct OptimizerState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: u64,
}

impl OptimizerState {
    pub fn new(params: &HashEncoderParams) -> Self {
        let zeros: Vec<Vec<f64>> = params.slices().map(|s| vec![0.0; s.len()]).collect();
        OptimizerState {
            second: zeros.clone(),
            first: zeros,
            steps: 0,
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

fn apply_update(
    params: &mut HashEncoderParams,
    grads: &HashEncoderParams,
    state: &mut OptimizerState,
    optimizer: Optimizer,
    lr: f64,
) {
    state.steps += 1;
    let t = state.steps as i32;
    let (c1, c2) = (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t));
    for (((p, g), m), v) in params
        .slices_mut()
        .zip(grads.slices())
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        match optimizer {
            Optimizer::Sgd => {
                for (pi, gi) in p.iter_mut().zip(g) {
                    *pi -= lr * gi;
                }
            }
            Optimizer::AdaptiveMoments => {
                for (((pi, gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                    *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
                    *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
                    *pi -= lr * (*mi / c1) / ((*vi / c2).sqrt() + EPSILON);
                }
            }
        }
    }
}

/// One mini-batch: features per modality and the observed labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub features: Vec<Array2<f64>>,
    pub labels: LabelMatrix,
}

impl Batch {
    pub fn from_rows(features: &[Array2<f64>], labels: &LabelMatrix, rows: &[usize]) -> Batch {
        Batch {
            features: features.iter().map(|f| f.select(Axis(0), rows)).collect(),
            labels: labels.select_rows(rows),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLosses {
    pub total: f64,
    pub contrastive: Option<f64>,
    pub data: f64,
}

/// Forward, backward and one optimizer update on the phased objective.
pub fn step(
    params: &mut HashEncoderParams,
    state: &mut OptimizerState,
    centers: &HashCenters,
    batch: &Batch,
    phase: Phase,
    pace: Option<PaceInput<'_>>,
    config: &TrainConfig,
) -> Result<BatchLosses> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    if batch.features.len() != params.modalities.len() {
        return Err(Error::Shape(format!(
            "batch has {} modalities, encoder has {}",
            batch.features.len(),
            params.modalities.len()
        )));
    }
    let caches = params
        .modalities
        .iter()
        .zip(&batch.features)
        .map(|(p, x)| p.forward(x.view()))
        .collect::<Result<Vec<_>>>()?;
    let codes = BatchCodes::new(
        caches.iter().map(|c| c.codes.clone()).collect(),
        batch.labels.clone(),
    )?;
    let loss = total_loss(phase, &codes, centers, pace, &config.loss)?;
    let grads = params
        .modalities
        .iter()
        .zip(&batch.features)
        .zip(&caches)
        .zip(&loss.grads)
        .map(|(((p, x), cache), g)| p.backward_cached(x.view(), cache, g.view()))
        .collect::<Result<Vec<_>>>()?;
    let grads = HashEncoderParams {
        modalities: grads,
        hidden_dim: params.hidden_dim,
        code_length: params.code_length,
    };
    apply_update(params, &grads, state, config.optimizer, config.learning_rate);
    Ok(BatchLosses {
        total: loss.value,
        contrastive: loss.contrastive,
        data: loss.data,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: Phase,
    pub total_loss: f64,
    pub contrastive_loss: Option<f64>,
    /// Center aggregation loss in warm-up, self-paced loss afterwards.
    pub data_loss: f64,
    pub gamma: Option<f64>,
    pub zero_weights: Option<usize>,
    pub mean_retained_loss: Option<f64>,
    pub val_map_i2t: Option<f64>,
    pub val_map_t2i: Option<f64>,
}

impl EpochRecord {
    pub fn val_map(&self) -> Option<f64> {
        Some(0.5 * (self.val_map_i2t? + self.val_map_t2i?))
    }
}

/// Per-instance losses and refreshed weights of one self-paced epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSnapshot {
    pub epoch: usize,
    pub losses: Vec<f64>,
    pub weights: SampleWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub checkpoint: Option<PathBuf>,
    pub weight_snapshots: Vec<WeightSnapshot>,
    /// The configuration after variant overrides and defaults.
    pub config: TrainConfig,
}

impl TrainReport {
    pub fn snapshot_at(&self, epoch: usize) -> Option<&WeightSnapshot> {
        self.weight_snapshots.iter().find(|s| s.epoch == epoch)
    }

    pub const CSV_HEADER: &'static str = "epoch,phase,total_loss,contrastive_loss,data_loss,gamma,zero_weights,mean_retained_loss,val_map_i2t,val_map_t2i";

    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.6}")).unwrap_or_default()
        }
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{:.6},{},{:.6},{},{},{},{},{}",
                r.epoch,
                r.phase,
                r.total_loss,
                opt(r.contrastive_loss),
                r.data_loss,
                opt(r.gamma),
                r.zero_weights.map(|z| z.to_string()).unwrap_or_default(),
                opt(r.mean_retained_loss),
                opt(r.val_map_i2t),
                opt(r.val_map_t2i),
            )?;
        }
        Ok(())
    }
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub report: TrainReport,
    /// Parameters at the epoch with the best validation MAP.
    pub best_params: HashEncoderParams,
    pub final_params: HashEncoderParams,
    pub centers: HashCenters,
}

/// Relaxed codes of every row of every modality.
pub fn encode_all(params: &HashEncoderParams, features: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
    params
        .modalities
        .iter()
        .zip(features)
        .map(|(p, x)| p.encode_batch(x.view()))
        .collect()
}

/// Per-instance aggregation losses of a whole split, computed in chunks.
pub fn instance_losses(
    params: &HashEncoderParams,
    centers: &HashCenters,
    features: &[Array2<f64>],
    labels: &LabelMatrix,
    cfg: &LossConfig,
    exec: Exec,
) -> Result<Vec<f64>> {
    let n = labels.rows();
    let chunks = n.div_ceil(REFRESH_CHUNK);
    let parts = exec.map(chunks, |c| {
        let rows: Vec<usize> = (c * REFRESH_CHUNK..((c + 1) * REFRESH_CHUNK).min(n)).collect();
        let batch = Batch::from_rows(features, labels, &rows);
        let codes = BatchCodes::new(encode_all(params, &batch.features)?, batch.labels)?;
        per_instance_loss(&codes, centers, cfg).map(|l| l.0)
    });
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// The I2T and T2I retrieval tasks of `dataset` against itself, with
/// binarized codes and relevance from `labels`.
pub fn retrieval_tasks(
    params: &HashEncoderParams,
    dataset: &MultiModalDataset,
    labels: &LabelMatrix,
) -> Result<[RetrievalTask; 2]> {
    let features: Vec<Array2<f64>> = dataset.modalities.iter().map(|f| f.to_f64()).collect();
    let codes: Vec<_> = encode_all(params, &features)?
        .iter()
        .map(|c| binarize_rows(c.view()))
        .collect();
    let task = |direction: Direction| {
        let (q, g) = direction.modalities();
        RetrievalTask::new(
            direction,
            codes[q].clone(),
            labels.clone(),
            codes[g].clone(),
            labels.clone(),
        )
    };
    Ok([task(Direction::I2T)?, task(Direction::T2I)?])
}

/// I2T and T2I MAP of `dataset` retrieving within itself, with relevance
/// from `labels`.
pub fn retrieval_map(
    params: &HashEncoderParams,
    dataset: &MultiModalDataset,
    labels: &LabelMatrix,
    exec: Exec,
) -> Result<(f64, f64)> {
    let [i2t, t2i] = retrieval_tasks(params, dataset, labels)?;
    Ok((
        mean_average_precision(&i2t, exec),
        mean_average_precision(&t2i, exec),
    ))
}

fn check_dataset(dataset: &MultiModalDataset, dims: &[usize], what: &str) -> Result<()> {
    if dataset.dims() != dims {
        return Err(Error::Shape(format!(
            "{what} split has modality dims {:?}, expected {dims:?}",
            dataset.dims()
        )));
    }
    Ok(())
}

/// Trains on `train`, selecting the epoch with the best validation MAP
/// (mean of I2T and T2I) on `val`. Optionally writes that model to
/// `checkpoint`.
pub fn train(
    train: &MultiModalDataset,
    val: &MultiModalDataset,
    config: &TrainConfig,
    checkpoint: Option<PathBuf>,
    exec: Exec,
) -> Result<TrainOutcome> {
    let m = train.modality_count();
    let cfg = config.resolved(m)?;
    let dims = train.dims();
    check_dataset(val, &dims, "validation")?;
    if val.class_count != train.class_count {
        return Err(Error::Shape("train and validation class counts differ".into()));
    }
    let n = train.len();
    if n < 2 {
        return Err(Error::Shape("training split needs at least 2 instances".into()));
    }

    let centers = init_centers(
        train.class_count,
        cfg.code_length,
        seed::derive_str(cfg.seed, "centers"),
    )?;
    let mut params = init_params(
        &dims,
        cfg.hidden_dim,
        cfg.code_length,
        seed::derive_str(cfg.seed, "params"),
    )?;
    let mut state = OptimizerState::new(&params);
    let features: Vec<Array2<f64>> = train.modalities.iter().map(|f| f.to_f64()).collect();
    let val_labels = if cfg.clean_val {
        &val.true_labels
    } else {
        &val.labels
    };
    let schedule = cfg.schedule();

    let mut epochs = Vec::with_capacity(cfg.max_epochs);
    let mut snapshots = Vec::new();
    let mut best: Option<(usize, f64, HashEncoderParams)> = None;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.max_epochs {
        let phase = Phase::at_epoch(epoch, cfg.warmup_epochs);
        let weights = match phase {
            Phase::Warmup => None,
            Phase::SelfPaced => {
                let scheduled = gamma_at(&schedule, epoch - cfg.warmup_epochs);
                let losses = instance_losses(&params, &centers, &features, &train.labels, &cfg.loss, exec)?;
                let weights = match cfg.variant {
                    Variant::NoSpl => SampleWeights::ones(n, scheduled),
                    Variant::GammaOverride => refresh_weights(&losses, cfg.gamma_override, exec)?,
                    Variant::BinarizeWeights => {
                        let mut w = refresh_weights(&losses, scheduled, exec)?;
                        pacer::binarize_weights(&mut w);
                        w
                    }
                    _ => refresh_weights(&losses, scheduled, exec)?,
                };
                snapshots.push(WeightSnapshot {
                    epoch,
                    losses,
                    weights: weights.clone(),
                });
                Some(weights)
            }
        };

        let mut rng = seed::rng(seed::derive(cfg.seed, &[0x5348_5546, epoch as u64]));
        order.shuffle(&mut rng);
        let mut bounds: Vec<(usize, usize)> = (0..n)
            .step_by(cfg.batch_size)
            .map(|s| (s, (s + cfg.batch_size).min(n)))
            .collect();
        if bounds.len() > 1 && bounds[bounds.len() - 1].1 - bounds[bounds.len() - 1].0 < 2 {
            let (_, end) = bounds.pop().expect("non-empty");
            bounds.last_mut().expect("non-empty").1 = end;
        }

        let (mut total, mut contrastive, mut data) = (0.0, 0.0, 0.0);
        for (b, &(start, end)) in bounds.iter().enumerate() {
            let rows = &order[start..end];
            let batch = Batch::from_rows(&features, &train.labels, rows);
            let batch_weights: Option<Vec<f64>> =
                weights.as_ref().map(|w| rows.iter().map(|&i| w.w[i]).collect());
            let pace = weights
                .as_ref()
                .zip(batch_weights.as_deref())
                .map(|(w, bw)| PaceInput {
                    weights: bw,
                    gamma: w.gamma,
                });
            let losses = step(&mut params, &mut state, &centers, &batch, phase, pace, &cfg)?;
            if !losses.total.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    what: "total loss",
                });
            }
            total += losses.total;
            contrastive += losses.contrastive.unwrap_or(0.0);
            data += losses.data;
        }
        if params.slices().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged {
                epoch,
                batch: bounds.len() - 1,
                what: "parameter",
            });
        }
        let nb = bounds.len() as f64;

        let evaluate = (epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.max_epochs;
        let (val_i2t, val_t2i) = if evaluate {
            let (a, b) = retrieval_map(&params, val, val_labels, exec)?;
            (Some(a), Some(b))
        } else {
            (None, None)
        };

        let snapshot = snapshots.last().filter(|s| s.epoch == epoch);
        let mean_retained = snapshot.and_then(|s| {
            let kept: Vec<f64> = s
                .losses
                .iter()
                .zip(&s.weights.w)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&l, _)| l)
                .collect();
            (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64)
        });
        let record = EpochRecord {
            epoch,
            phase,
            total_loss: total / nb,
            contrastive_loss: (cfg.loss.alpha > 0.0).then_some(contrastive / nb),
            data_loss: data / nb,
            gamma: weights.as_ref().map(|w| w.gamma),
            zero_weights: weights.as_ref().map(SampleWeights::zero_count),
            mean_retained_loss: mean_retained,
            val_map_i2t: val_i2t,
            val_map_t2i: val_t2i,
        };
        if let (Some(now), Some(earlier)) = (
            record.mean_retained_loss,
            epochs
                .len()
                .checked_sub(5)
                .and_then(|i: usize| epochs.get(i))
                .and_then(|r: &EpochRecord| r.mean_retained_loss),
        ) {
            if now > earlier {
                log::warn!(
                    "epoch {epoch}: mean retained loss rose from {earlier:.4} to {now:.4} over 5 epochs"
                );
            }
        }
        log::debug!(
            "epoch {epoch} [{phase}] loss {:.4} val map {:?} zero weights {:?}",
            record.total_loss,
            record.val_map(),
            record.zero_weights
        );
        if let Some(score) = record.val_map() {
            if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                best = Some((epoch, score, params.clone()));
            }
        }
        epochs.push(record);
    }

    let (best_epoch, _, best_params) = best.expect("last epoch is always evaluated");
    if let Some(path) = &checkpoint {
        save_checkpoint(&best_params, &centers, path)?;
    }
    Ok(TrainOutcome {
        report: TrainReport {
            epochs,
            best_epoch,
            checkpoint,
            weight_snapshots: snapshots,
            config: cfg,
        },
        best_params,
        final_params: params,
        centers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::{generate_synthetic, split, SynthSpec};

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            code_length: 8,
            hidden_dim: 16,
            batch_size: 16,
            warmup_epochs: 2,
            max_epochs: 5,
            ..TrainConfig::default()
        }
    }

    fn tiny_data() -> (MultiModalDataset, MultiModalDataset) {
        let ds = generate_synthetic(&SynthSpec {
            n: 90,
            k: 3,
            m: 2,
            dims: vec![6, 5],
            class_separation: 3.0,
            intra_noise_std: 0.5,
            latent_dim: 4,
            seed: 1,
        })
        .unwrap();
        let (tr, va, _) = split(&ds, 0.6, 0.2, 1).unwrap();
        (tr, va)
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("rshnl".parse::<Variant>().is_err());
    }

    #[test]
    fn resolved_applies_variant_overrides() {
        let cfg = TrainConfig {
            variant: Variant::NoWarmup,
            ..TrainConfig::default()
        };
        let r = cfg.resolved(2).unwrap();
        assert_eq!(r.warmup_epochs, 0);
        assert_eq!(r.pace.unwrap().gamma_start, 1.5);
        let r = TrainConfig {
            variant: Variant::NoChl,
            ..TrainConfig::default()
        }
        .resolved(2)
        .unwrap();
        assert_eq!(r.loss.alpha, 0.0);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = TrainConfig::default();
        cfg.batch_size = 1;
        assert!(cfg.resolved(2).is_err());
        let mut cfg = TrainConfig::default();
        cfg.warmup_epochs = 100;
        assert!(cfg.resolved(2).is_err());
        let mut cfg = TrainConfig::default();
        cfg.pace = Some(PaceSchedule::fixed(3.0));
        assert!(cfg.resolved(2).is_err());
    }

    #[test]
    fn phase_switch_and_report_shape() {
        let (tr, va) = tiny_data();
        let out = train(&tr, &va, &tiny_config(), None, Exec::Sequential).unwrap();
        let r = &out.report;
        assert_eq!(r.epochs.len(), 5);
        for rec in &r.epochs {
            if rec.epoch < 2 {
                assert_eq!(rec.phase, Phase::Warmup);
                assert!(rec.gamma.is_none());
            } else {
                assert_eq!(rec.phase, Phase::SelfPaced);
                assert_eq!(rec.gamma, Some(1.5));
            }
            assert!(rec.val_map().is_some());
        }
        assert_eq!(r.weight_snapshots.len(), 3);
        assert_eq!(r.weight_snapshots[0].epoch, 2);
    }

    #[test]
    fn training_is_deterministic_across_exec_modes() {
        let (tr, va) = tiny_data();
        let a = train(&tr, &va, &tiny_config(), None, Exec::Sequential).unwrap();
        let b = train(&tr, &va, &tiny_config(), None, Exec::Parallel).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.best_params, b.best_params);
    }

    #[test]
    fn no_spl_keeps_everyone() {
        let (tr, va) = tiny_data();
        let cfg = TrainConfig {
            variant: Variant::NoSpl,
            ..tiny_config()
        };
        let out = train(&tr, &va, &cfg, None, Exec::Sequential).unwrap();
        for rec in out.report.epochs.iter().filter(|r| r.phase == Phase::SelfPaced) {
            assert_eq!(rec.zero_weights, Some(0));
        }
    }

    #[test]
    fn gamma_override_admits_everyone() {
        let (tr, va) = tiny_data();
        let cfg = TrainConfig {
            variant: Variant::GammaOverride,
            ..tiny_config()
        };
        let out = train(&tr, &va, &cfg, None, Exec::Sequential).unwrap();
        for snap in &out.report.weight_snapshots {
            assert_eq!(snap.weights.gamma, 200.0);
            assert!(snap.weights.w.iter().all(|&w| w > 0.9));
        }
    }

    #[test]
    fn csv_has_one_row_per_epoch() {
        let (tr, va) = tiny_data();
        let out = train(&tr, &va, &tiny_config(), None, Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        out.report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(3).unwrap().starts_with("2,selfpaced,"));
    }
}
