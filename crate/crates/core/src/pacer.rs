//! Self-paced weighting: the closed-form weight minimizer of
//! `w l + gamma (w^2/2 - w)` over `[0, 1]`, the admissible range of the
//! pace parameter, pace schedules and the clean/noisy partition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Per-instance self-paced weights plus the pace parameter that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights {
    pub w: Vec<f64>,
    pub gamma: f64,
}

impl SampleWeights {
    pub fn ones(n: usize, gamma: f64) -> Self {
        SampleWeights {
            w: vec![1.0; n],
            gamma,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.w.iter().filter(|&&w| w == 0.0).count()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.w.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::param("weights", format!("{w} is outside [0, 1]")));
        }
        Ok(())
    }
}

/// `max(0, 1 - l / gamma)`.
pub fn optimal_weight(loss: f64, gamma: f64) -> Result<f64> {
    if !(loss >= 0.0) {
        return Err(Error::param("loss", format!("must be non-negative, got {loss}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    Ok((1.0 - loss / gamma).max(0.0))
}

/// The self-paced regularizer `gamma (w^2 / 2 - w)`.
pub fn regularizer(w: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::param("w", format!("{w} is outside [0, 1]")));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(gamma * (0.5 * w * w - w))
}

/// Largest attainable per-instance loss, `M (r^2 - r + 1) / r`.
pub fn max_instance_loss(modalities: usize, r: f64) -> Result<f64> {
    Ok(gamma_bounds(modalities, r)?.1)
}

/// Exclusive bounds `(0, l_max)` on a pace parameter that can separate
/// instances.
pub fn gamma_bounds(modalities: usize, r: f64) -> Result<(f64, f64)> {
    if modalities == 0 {
        return Err(Error::param("modalities", "need at least one modality"));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::param("r", format!("must lie in (0, 1], got {r}")));
    }
    Ok((0.0, modalities as f64 * (r * r - r + 1.0) / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaceMode {
    Fixed,
    LinearRamp,
}

/// How `gamma` evolves over the self-paced epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaceSchedule {
    pub mode: PaceMode,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub ramp_epochs: usize,
}

impl PaceSchedule {
    pub fn fixed(gamma: f64) -> Self {
        PaceSchedule {
            mode: PaceMode::Fixed,
            gamma_start: gamma,
            gamma_end: gamma,
            ramp_epochs: 1,
        }
    }

    pub fn ramp(gamma_start: f64, gamma_end: f64, ramp_epochs: usize) -> Self {
        PaceSchedule {
            mode: PaceMode::LinearRamp,
            gamma_start,
            gamma_end,
            ramp_epochs,
        }
    }

    /// Half of the largest attainable loss, held fixed.
    pub fn midpoint(modalities: usize, r: f64) -> Result<Self> {
        Ok(Self::fixed(0.5 * max_instance_loss(modalities, r)?))
    }

    /// Checks `0 < gamma_start <= gamma_end < upper`.
    pub fn validate(&self, upper: f64) -> Result<()> {
        if !(self.gamma_start > 0.0) {
            return Err(Error::param("gamma_start", "must be positive"));
        }
        if self.gamma_end < self.gamma_start {
            return Err(Error::param("gamma_end", "must not be below gamma_start"));
        }
        if !(self.gamma_end < upper) {
            return Err(Error::param(
                "gamma_end",
                format!(
                    "{} is not below the largest attainable loss {upper}",
                    self.gamma_end
                ),
            ));
        }
        if self.ramp_epochs == 0 {
            return Err(Error::param("ramp_epochs", "must be positive"));
        }
        Ok(())
    }
}

pub fn gamma_at(schedule: &PaceSchedule, epoch: usize) -> f64 {
    match schedule.mode {
        PaceMode::Fixed => schedule.gamma_start,
        PaceMode::LinearRamp => {
            let t = (epoch as f64 / schedule.ramp_epochs as f64).min(1.0);
            schedule.gamma_start + (schedule.gamma_end - schedule.gamma_start) * t
        }
    }
}

/// Recomputes every weight from the current per-instance losses.
pub fn refresh_weights(losses: &[f64], gamma: f64, exec: Exec) -> Result<SampleWeights> {
    if let Some(l) = losses.iter().find(|l| !l.is_finite()) {
        return Err(Error::param("losses", format!("non-finite loss {l}")));
    }
    let w = exec
        .map(losses.len(), |i| optimal_weight(losses[i], gamma))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleWeights { w, gamma })
}

/// Sets every non-zero weight to one, dropping the easy-to-hard grading.
pub fn binarize_weights(weights: &mut SampleWeights) {
    for w in &mut weights.w {
        if *w > 0.0 {
            *w = 1.0;
        }
    }
}

/// `(clean, noisy)` index sets; noisy means a zero weight.
pub fn partition(weights: &SampleWeights) -> (Vec<usize>, Vec<usize>) {
    (0..weights.len()).partition(|&i| weights.w[i] > 0.0)
}

/// Appends one epoch of `epoch,instance_index,loss,weight,is_noisy_ground_truth`
/// rows.
pub fn write_weight_dump<W: Write>(
    out: &mut W,
    epoch: usize,
    losses: &[f64],
    weights: &SampleWeights,
    mask: &[bool],
) -> std::io::Result<()> {
    for (i, ((l, w), noisy)) in losses.iter().zip(&weights.w).zip(mask).enumerate() {
        writeln!(out, "{epoch},{i},{l:.6},{w:.6},{}", u8::from(*noisy))?;
    }
    Ok(())
}

pub const WEIGHT_DUMP_HEADER: &str = "epoch,instance_index,loss,weight,is_noisy_ground_truth";
