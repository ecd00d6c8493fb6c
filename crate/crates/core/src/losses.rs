//! Loss kernels on relaxed codes: the contrastive instance loss, the
//! center aggregation loss, the weighted self-paced loss and the phased
//! objective. Every kernel returns its value together with the exact
//! gradient with respect to each modality's code matrix.
//!
//! All probabilities are ratios of softmax partition sums and are handled in
//! the log domain, so large logits never overflow and the GCE-form transform
//! `(1 - r)(1 - p^r)/r + r(1 - p)` never divides by a vanishing `p`.

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, s, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::datakit::LabelMatrix;
use crate::encoder::HashCenters;
use crate::error::{Error, Result};

/// Floor applied to the aggregation probability before the power transform.
pub const PROB_FLOOR: f64 = 1e-12;

/// Default temperature of the contrastive term.
pub const DEFAULT_CONTRASTIVE_TAU: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Softmax temperature.
    pub tau: f64,
    /// GCE weight factor in `(0, 1]`.
    pub r: f64,
    /// Weight of the contrastive term.
    pub alpha: f64,
    /// Separate weight factor for the contrastive term; `r` when absent.
    #[serde(default)]
    pub r_contrastive: Option<f64>,
    /// Separate temperature for the contrastive term; `tau` when absent.
    /// Contrastive logits are code-by-code products of magnitude up to `L`,
    /// so a temperature tuned for the center softmax makes instance
    /// discrimination dominate; the default keeps them within a few units
    /// at 32 bits.
    #[serde(default)]
    pub tau_contrastive: Option<f64>,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            tau: 0.5,
            r: 0.5,
            alpha: 1.0,
            r_contrastive: None,
            tau_contrastive: Some(DEFAULT_CONTRASTIVE_TAU),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param("tau", format!("must be positive, got {}", self.tau)));
        }
        for (field, r) in [("r", Some(self.r)), ("r_contrastive", self.r_contrastive)] {
            if let Some(r) = r {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::param(field, format!("must lie in (0, 1], got {r}")));
                }
            }
        }
        if let Some(t) = self.tau_contrastive {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::param(
                    "tau_contrastive",
                    format!("must be positive, got {t}"),
                ));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(
                "alpha",
                format!("must be non-negative, got {}", self.alpha),
            ));
        }
        Ok(())
    }

    pub fn contrastive_r(&self) -> f64 {
        self.r_contrastive.unwrap_or(self.r)
    }

    pub fn contrastive_tau(&self) -> f64 {
        self.tau_contrastive.unwrap_or(self.tau)
    }
}

/// Relaxed codes of one mini-batch: `M` matrices of shape `B x L` plus the
/// batch's (observed) label rows.
#[derive(Debug, Clone)]
pub struct BatchCodes {
    pub codes: Vec<Array2<f64>>,
    pub labels: LabelMatrix,
}

impl BatchCodes {
    pub fn new(codes: Vec<Array2<f64>>, labels: LabelMatrix) -> Result<Self> {
        let first = codes
            .first()
            .ok_or_else(|| Error::Shape("batch has no modalities".into()))?;
        let dim = first.dim();
        if dim.0 == 0 {
            return Err(Error::Shape("batch is empty".into()));
        }
        if let Some(m) = codes.iter().position(|c| c.dim() != dim) {
            return Err(Error::Shape(format!(
                "modality {m} codes are {:?}, expected {dim:?}",
                codes[m].dim()
            )));
        }
        if labels.rows() != dim.0 {
            return Err(Error::Shape(format!(
                "{} label rows for a batch of {}",
                labels.rows(),
                dim.0
            )));
        }
        Ok(BatchCodes { codes, labels })
    }

    pub fn batch_size(&self) -> usize {
        self.codes[0].nrows()
    }

    pub fn modality_count(&self) -> usize {
        self.codes.len()
    }

    pub fn code_length(&self) -> usize {
        self.codes[0].ncols()
    }

    fn zero_grads(&self) -> Vec<Array2<f64>> {
        self.codes.iter().map(|c| Array2::zeros(c.dim())).collect()
    }
}

/// Value and code gradients of a loss term.
#[derive(Debug, Clone)]
pub struct LossGrad {
    pub value: f64,
    pub grads: Vec<Array2<f64>>,
}

/// Per-instance aggregation losses `l_i`, one per batch row.
#[derive(Debug, Clone, PartialEq)]
pub struct PerInstanceLoss(pub Vec<f64>);

/// `(1 - r)(1 - p^r)/r + r(1 - p)`.
pub fn gce(p: f64, r: f64) -> f64 {
    (1.0 - r) * (1.0 - p.powf(r)) / r + r * (1.0 - p)
}

/// GCE value and its derivative with respect to `ln p`.
fn gce_log(log_p: f64, r: f64) -> (f64, f64) {
    let p = log_p.exp();
    let p_r = (r * log_p).exp();
    let value = (1.0 - r) * (1.0 - p_r) / r + r * (1.0 - p);
    let dlog = -(1.0 - r) * p_r - r * p;
    (value, dlog)
}

fn log_sum_exp<I: IntoIterator<Item = f64> + Clone>(values: I) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.into_iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(sum_{a in pos} e^{s_a} / sum_a e^{s_a})` and its gradient in `s`.
fn log_ratio(logits: ArrayView1<'_, f64>, positive: impl Fn(usize) -> bool) -> (f64, Vec<f64>) {
    let all = log_sum_exp(logits.iter().copied());
    let pos = log_sum_exp(
        logits
            .iter()
            .enumerate()
            .filter(|(a, _)| positive(*a))
            .map(|(_, &s)| s),
    );
    let grad = logits
        .iter()
        .enumerate()
        .map(|(a, &s)| {
            let inside = if positive(a) { (s - pos).exp() } else { 0.0 };
            inside - (s - all).exp()
        })
        .collect();
    (pos - all, grad)
}

/// Codes of all modalities stacked row-wise: row `j * B + z` is `b_z^j`.
fn stacked(codes: &BatchCodes) -> Array2<f64> {
    let views: Vec<_> = codes.codes.iter().map(|c| c.view()).collect();
    concatenate(Axis(0), &views).expect("equal shapes")
}

fn check_index(codes: &BatchCodes, i: usize, m: usize) -> Result<()> {
    if i >= codes.batch_size() || m >= codes.modality_count() {
        return Err(Error::Shape(format!(
            "instance {i} / modality {m} out of range for B={}, M={}",
            codes.batch_size(),
            codes.modality_count()
        )));
    }
    Ok(())
}

/// Softmax of `b_i^m . b_z^j / tau` over all `(j, z)`, in stacked order.
pub fn instance_softmax(codes: &BatchCodes, i: usize, m: usize, cfg: &LossConfig) -> Result<Vec<f64>> {
    check_index(codes, i, m)?;
    let all = stacked(codes);
    let logits = all.dot(&codes.codes[m].row(i)) / cfg.contrastive_tau();
    let lse = log_sum_exp(logits.iter().copied());
    Ok(logits.iter().map(|&s| (s - lse).exp()).collect())
}

/// Probability that `x_i^m` is identified as instance `i` among all codes of
/// the batch, positives being instance `i` in every modality (itself
/// included).
pub fn instance_prob(codes: &BatchCodes, i: usize, m: usize, cfg: &LossConfig) -> Result<f64> {
    check_index(codes, i, m)?;
    let b = codes.batch_size();
    let all = stacked(codes);
    let logits = all.dot(&codes.codes[m].row(i)) / cfg.contrastive_tau();
    let (log_q, _) = log_ratio(logits.view(), |a| a % b == i);
    Ok(log_q.exp())
}

/// Contrastive hashing loss over the batch.
pub fn chl_loss(codes: &BatchCodes, cfg: &LossConfig) -> Result<LossGrad> {
    cfg.validate()?;
    let (b, m_count) = (codes.batch_size(), codes.modality_count());
    let r = cfg.contrastive_r();
    let all = stacked(codes);
    let scale = 1.0 / b as f64;
    let mut grads = codes.zero_grads();
    let mut grad_all = Array2::<f64>::zeros(all.dim());
    let mut value = 0.0;
    for m in 0..m_count {
        let logits = codes.codes[m].dot(&all.t()) / cfg.contrastive_tau();
        let mut coef = Array2::<f64>::zeros(logits.dim());
        for i in 0..b {
            let (log_q, dlog) = log_ratio(logits.row(i), |a| a % b == i);
            let (term, dterm) = gce_log(log_q, r);
            value += term;
            let upstream = dterm * scale / cfg.contrastive_tau();
            for (c, d) in coef.row_mut(i).iter_mut().zip(dlog) {
                *c = upstream * d;
            }
        }
        grads[m] += &coef.dot(&all);
        grad_all += &coef.t().dot(&codes.codes[m]);
    }
    for (j, g) in grads.iter_mut().enumerate() {
        *g += &grad_all.slice(s![j * b..(j + 1) * b, ..]);
    }
    Ok(LossGrad {
        value: value * scale,
        grads,
    })
}

fn center_logits(
    code: ArrayView1<'_, f64>,
    centers: &HashCenters,
    cfg: &LossConfig,
) -> Result<ndarray::Array1<f64>> {
    if code.len() != centers.code_length() {
        return Err(Error::Shape(format!(
            "code length {} vs center length {}",
            code.len(),
            centers.code_length()
        )));
    }
    Ok(centers.view().dot(&code) / cfg.tau)
}

/// Softmax over the hash centers of `b . c_k / tau`.
pub fn center_probs(code: ArrayView1<'_, f64>, centers: &HashCenters, cfg: &LossConfig) -> Result<Vec<f64>> {
    let logits = center_logits(code, centers, cfg)?;
    let lse = log_sum_exp(logits.iter().copied());
    Ok(logits.iter().map(|&s| (s - lse).exp()).collect())
}

pub fn center_prob(
    code: ArrayView1<'_, f64>,
    centers: &HashCenters,
    k: usize,
    cfg: &LossConfig,
) -> Result<f64> {
    if k >= centers.class_count() {
        return Err(Error::Shape(format!(
            "center {k} out of range ({})",
            centers.class_count()
        )));
    }
    Ok(center_probs(code, centers, cfg)?[k])
}

fn check_label_row(label_row: ArrayView1<'_, u8>, centers: &HashCenters) -> Result<()> {
    if label_row.len() != centers.class_count() {
        return Err(Error::Shape(format!(
            "label row has {} classes, there are {} centers",
            label_row.len(),
            centers.class_count()
        )));
    }
    if !label_row.iter().any(|&y| y == 1) {
        return Err(Error::Label("label row has no positive class".into()));
    }
    Ok(())
}

/// Probability mass the center softmax puts on the labelled classes.
pub fn aggregation_prob(
    code: ArrayView1<'_, f64>,
    centers: &HashCenters,
    label_row: ArrayView1<'_, u8>,
    cfg: &LossConfig,
) -> Result<f64> {
    check_label_row(label_row, centers)?;
    let logits = center_logits(code, centers, cfg)?;
    let (log_v, _) = log_ratio(logits.view(), |k| label_row[k] == 1);
    Ok(log_v.exp())
}

/// `l_i` for every row together with `d l_i / d b_i^m` (row `i` of each
/// returned matrix).
fn aggregation_terms(
    codes: &BatchCodes,
    centers: &HashCenters,
    cfg: &LossConfig,
) -> Result<(Vec<f64>, Vec<Array2<f64>>)> {
    cfg.validate()?;
    if codes.code_length() != centers.code_length() {
        return Err(Error::Shape(format!(
            "code length {} vs center length {}",
            codes.code_length(),
            centers.code_length()
        )));
    }
    if codes.labels.class_count() != centers.class_count() {
        return Err(Error::Shape(format!(
            "labels have {} classes, there are {} centers",
            codes.labels.class_count(),
            centers.class_count()
        )));
    }
    let b = codes.batch_size();
    let log_floor = PROB_FLOOR.ln();
    let mut ell = vec![0.0; b];
    let mut grads = codes.zero_grads();
    for (m, mat) in codes.codes.iter().enumerate() {
        let logits = mat.dot(&centers.view().t()) / cfg.tau;
        let mut coef = Array2::<f64>::zeros(logits.dim());
        for i in 0..b {
            let label = codes.labels.row(i);
            let (log_v, dlog) = log_ratio(logits.row(i), |k| label[k] == 1);
            let clamped = log_v < log_floor;
            let (term, dterm) = gce_log(log_v.max(log_floor), cfg.r);
            ell[i] += term;
            if !clamped {
                for (c, d) in coef.row_mut(i).iter_mut().zip(dlog) {
                    *c = dterm * d / cfg.tau;
                }
            }
        }
        grads[m] = coef.dot(&centers.view());
    }
    Ok((ell, grads))
}

pub fn per_instance_loss(
    codes: &BatchCodes,
    centers: &HashCenters,
    cfg: &LossConfig,
) -> Result<PerInstanceLoss> {
    Ok(PerInstanceLoss(aggregation_terms(codes, centers, cfg)?.0))
}

/// Center aggregation loss: mean of `l_i` over the batch.
pub fn cal_loss(codes: &BatchCodes, centers: &HashCenters, cfg: &LossConfig) -> Result<LossGrad> {
    let (ell, mut grads) = aggregation_terms(codes, centers, cfg)?;
    let scale = 1.0 / ell.len() as f64;
    for g in &mut grads {
        *g *= scale;
    }
    Ok(LossGrad {
        value: ell.iter().sum::<f64>() * scale,
        grads,
    })
}

fn check_weights(weights: &[f64], b: usize, gamma: f64) -> Result<()> {
    if weights.len() != b {
        return Err(Error::Shape(format!(
            "{} weights for a batch of {b}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::param("weights", format!("{w} is outside [0, 1]")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(())
}

/// Self-paced loss `mean(w_i l_i) + mean(gamma (w_i^2 / 2 - w_i))`.
/// The weights are constants: gradients flow to the codes only.
pub fn nsh_loss(
    codes: &BatchCodes,
    centers: &HashCenters,
    weights: &[f64],
    gamma: f64,
    cfg: &LossConfig,
) -> Result<LossGrad> {
    let b = codes.batch_size();
    check_weights(weights, b, gamma)?;
    let (ell, mut grads) = aggregation_terms(codes, centers, cfg)?;
    let scale = 1.0 / b as f64;
    for g in &mut grads {
        for (mut row, &w) in g.rows_mut().into_iter().zip(weights) {
            row *= w * scale;
        }
    }
    let data: f64 = ell.iter().zip(weights).map(|(l, w)| w * l).sum();
    let reg: f64 = weights.iter().map(|&w| gamma * (0.5 * w * w - w)).sum();
    Ok(LossGrad {
        value: (data + reg) * scale,
        grads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Warmup,
    SelfPaced,
}

impl Phase {
    /// Warm-up strictly before epoch `warmup_epochs`, self-paced after.
    pub fn at_epoch(epoch: usize, warmup_epochs: usize) -> Phase {
        if epoch < warmup_epochs {
            Phase::Warmup
        } else {
            Phase::SelfPaced
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Warmup => "warmup",
            Phase::SelfPaced => "selfpaced",
        })
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warmup" => Ok(Phase::Warmup),
            "selfpaced" => Ok(Phase::SelfPaced),
            other => Err(Error::param("phase", format!("unknown phase `{other}`"))),
        }
    }
}

/// Self-paced weights of the batch rows and the pace parameter.
#[derive(Debug, Clone, Copy)]
pub struct PaceInput<'a> {
    pub weights: &'a [f64],
    pub gamma: f64,
}

/// Breakdown of the phased objective.
#[derive(Debug, Clone)]
pub struct TotalLoss {
    pub value: f64,
    /// Unweighted contrastive loss, `None` when `alpha == 0`.
    pub contrastive: Option<f64>,
    /// Center aggregation loss (warm-up) or self-paced loss.
    pub data: f64,
    pub grads: Vec<Array2<f64>>,
}

/// `L_p + alpha L_C` during warm-up, `L_S + alpha L_C` afterwards.
pub fn total_loss(
    phase: Phase,
    codes: &BatchCodes,
    centers: &HashCenters,
    pace: Option<PaceInput<'_>>,
    cfg: &LossConfig,
) -> Result<TotalLoss> {
    let data = match phase {
        Phase::Warmup => cal_loss(codes, centers, cfg)?,
        Phase::SelfPaced => {
            let pace = pace.ok_or_else(|| Error::param("weights", "self-paced phase needs weights"))?;
            nsh_loss(codes, centers, pace.weights, pace.gamma, cfg)?
        }
    };
    let mut grads = data.grads;
    let mut value = data.value;
    let contrastive = if cfg.alpha > 0.0 {
        let c = chl_loss(codes, cfg)?;
        for (g, gc) in grads.iter_mut().zip(&c.grads) {
            g.scaled_add(cfg.alpha, gc);
        }
        value += cfg.alpha * c.value;
        Some(c.value)
    } else {
        None
    };
    Ok(TotalLoss {
        value,
        contrastive,
        data: data.value,
        grads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn cfg(tau: f64, r: f64) -> LossConfig {
        LossConfig {
            tau,
            r,
            alpha: 1.0,
            r_contrastive: None,
            tau_contrastive: None,
        }
    }

    fn one_hot(classes: &[usize], k: usize) -> LabelMatrix {
        LabelMatrix::from_classes(classes, k).unwrap()
    }

    #[test]
    fn single_element_batch_has_unit_probability() {
        let codes = BatchCodes::new(vec![array![[0.3, -0.7]]], one_hot(&[0], 2)).unwrap();
        assert_eq!(instance_prob(&codes, 0, 0, &cfg(0.5, 0.5)).unwrap(), 1.0);
        let multi = BatchCodes::new(vec![array![[0.3, -0.7]]; 3], one_hot(&[0], 2)).unwrap();
        let loss = chl_loss(&multi, &cfg(0.5, 0.5)).unwrap();
        assert_eq!(loss.value, 0.0);
    }

    #[test]
    fn two_instance_probability() {
        let codes = BatchCodes::new(vec![array![[0.9, 0.9], [-0.9, -0.9]]], one_hot(&[0, 1], 2)).unwrap();
        let q = instance_prob(&codes, 0, 0, &cfg(1.0, 0.5)).unwrap();
        // e^{1.62} / (e^{1.62} + e^{-1.62})
        assert!((q - 0.962_312_5).abs() < 1e-6, "{q}");
    }

    #[test]
    fn r_one_is_one_minus_probability() {
        for p in [0.0, 0.1, 0.5, 0.93, 1.0] {
            assert!((gce(p, 1.0) - (1.0 - p)).abs() < 1e-15);
        }
        let codes = BatchCodes::new(
            vec![
                array![[0.2, -0.5], [0.9, 0.1], [-0.3, 0.4]],
                array![[0.1, 0.3], [0.6, -0.6], [0.0, 0.8]],
            ],
            one_hot(&[0, 1, 0], 2),
        )
        .unwrap();
        let c = cfg(0.7, 1.0);
        let loss = chl_loss(&codes, &c).unwrap();
        let mut expected = 0.0;
        for i in 0..3 {
            for m in 0..2 {
                expected += 1.0 - instance_prob(&codes, i, m, &c).unwrap();
            }
        }
        assert!((loss.value - expected / 3.0).abs() < 1e-12);
    }

    #[test]
    fn center_probability_cases() {
        let centers = HashCenters::new(array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        let p = center_probs(array![0.0, 0.0].view(), &centers, &cfg(0.5, 0.5)).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));

        // b . c1 / tau = 1, b . c2 / tau = 0
        let two = HashCenters::new(array![[1.0, 1.0], [1.0, -1.0]]).unwrap();
        let p = center_prob(array![0.25, 0.25].view(), &two, 0, &cfg(0.5, 0.5)).unwrap();
        assert!((p - 0.731_058_578_630_004_9).abs() < 1e-12, "{p}");
        assert!(center_prob(array![0.0, 0.0].view(), &two, 2, &cfg(0.5, 0.5)).is_err());
    }

    #[test]
    fn aggregation_probability_selects_labels() {
        let centers = HashCenters::new(array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let c = cfg(0.5, 0.5);
        let code = array![0.4, -0.1];
        let p = center_probs(code.view(), &centers, &c).unwrap();
        let v = aggregation_prob(code.view(), &centers, array![0u8, 1, 0].view(), &c).unwrap();
        assert!((v - p[1]).abs() < 1e-15);
        let v = aggregation_prob(code.view(), &centers, array![1u8, 1, 0].view(), &c).unwrap();
        assert!((v - (p[0] + p[1])).abs() < 1e-15);
        let v = aggregation_prob(code.view(), &centers, array![1u8, 1, 1].view(), &c).unwrap();
        assert_eq!(v, 1.0);
        assert!(matches!(
            aggregation_prob(code.view(), &centers, array![0u8, 0, 0].view(), &c),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn per_instance_loss_extremes() {
        assert_eq!(gce(1.0, 0.5), 0.0);
        assert!((2.0 * gce(0.0, 0.5) - 3.0).abs() < 1e-15);
        assert!((gce(0.4, 1.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_and_unit_weights() {
        let centers = HashCenters::new(array![[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let codes = BatchCodes::new(
            vec![array![[0.5, -0.2], [-0.3, 0.9]], array![[0.1, 0.1], [0.7, -0.4]]],
            one_hot(&[0, 0], 2),
        )
        .unwrap();
        let c = cfg(0.5, 0.5);
        let zero = nsh_loss(&codes, &centers, &[0.0, 0.0], 1.3, &c).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(zero.grads.iter().all(|g| g.iter().all(|&v| v == 0.0)));
        let cal = cal_loss(&codes, &centers, &c).unwrap();
        let one = nsh_loss(&codes, &centers, &[1.0, 1.0], 1.3, &c).unwrap();
        assert!((one.value - (cal.value - 0.65)).abs() < 1e-12);
        assert!(matches!(
            nsh_loss(&codes, &centers, &[1.2, 0.0], 1.3, &c),
            Err(Error::Param { .. })
        ));
    }

    #[test]
    fn cal_is_mean_of_per_instance() {
        let centers = HashCenters::new(array![[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]]).unwrap();
        let codes = BatchCodes::new(
            vec![
                array![[0.5, -0.2, 0.1], [-0.3, 0.9, 0.0]],
                array![[0.1, 0.1, -0.8], [0.7, -0.4, 0.3]],
            ],
            one_hot(&[1, 0], 2),
        )
        .unwrap();
        let c = cfg(0.5, 0.3);
        let ell = per_instance_loss(&codes, &centers, &c).unwrap().0;
        let cal = cal_loss(&codes, &centers, &c).unwrap();
        assert!((cal.value - (ell[0] + ell[1]) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn phase_parsing() {
        assert_eq!("warmup".parse::<Phase>().unwrap(), Phase::Warmup);
        assert_eq!("selfpaced".parse::<Phase>().unwrap(), Phase::SelfPaced);
        assert!(matches!("cooldown".parse::<Phase>(), Err(Error::Param { .. })));
        assert_eq!(Phase::at_epoch(4, 5), Phase::Warmup);
        assert_eq!(Phase::at_epoch(5, 5), Phase::SelfPaced);
    }

    #[test]
    fn alpha_zero_skips_contrastive() {
        let centers = HashCenters::new(array![[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let codes = BatchCodes::new(
            vec![array![[0.5, -0.2], [-0.3, 0.9]], array![[0.1, 0.1], [0.7, -0.4]]],
            one_hot(&[0, 1], 2),
        )
        .unwrap();
        let c = LossConfig {
            alpha: 0.0,
            ..cfg(0.5, 0.5)
        };
        let warm = total_loss(Phase::Warmup, &codes, &centers, None, &c).unwrap();
        assert!(warm.contrastive.is_none());
        assert_eq!(warm.value, cal_loss(&codes, &centers, &c).unwrap().value);
        let pace = PaceInput {
            weights: &[0.3, 0.8],
            gamma: 2.0,
        };
        let sp = total_loss(Phase::SelfPaced, &codes, &centers, Some(pace), &c).unwrap();
        assert_eq!(
            sp.value,
            nsh_loss(&codes, &centers, &[0.3, 0.8], 2.0, &c).unwrap().value
        );
        assert!(total_loss(Phase::SelfPaced, &codes, &centers, None, &c).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 0.5).validate().is_err());
        assert!(cfg(0.5, 0.0).validate().is_err());
        assert!(cfg(0.5, 1.5).validate().is_err());
        assert!(LossConfig {
            alpha: -1.0,
            ..cfg(0.5, 0.5)
        }
        .validate()
        .is_err());
        assert!(LossConfig::default().validate().is_ok());
    }
}
