//! Hamming-space retrieval evaluation and training diagnostics.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::datakit::LabelMatrix;
use crate::encoder::BinaryCode;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pacer::SampleWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Modality 0 queries, modality 1 gallery.
    I2T,
    /// Modality 1 queries, modality 0 gallery.
    T2I,
}

impl Direction {
    pub fn modalities(self) -> (usize, usize) {
        match self {
            Direction::I2T => (0, 1),
            Direction::T2I => (1, 0),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::I2T => "I2T",
            Direction::T2I => "T2I",
        })
    }
}

/// Query and gallery codes with the labels that define relevance: a gallery
/// item is relevant to a query when they share at least one class.
#[derive(Debug, Clone)]
pub struct RetrievalTask {
    pub direction: Direction,
    pub queries: Vec<BinaryCode>,
    pub query_labels: LabelMatrix,
    pub gallery: Vec<BinaryCode>,
    pub gallery_labels: LabelMatrix,
}

impl RetrievalTask {
    pub fn new(
        direction: Direction,
        queries: Vec<BinaryCode>,
        query_labels: LabelMatrix,
        gallery: Vec<BinaryCode>,
        gallery_labels: LabelMatrix,
    ) -> Result<Self> {
        if queries.is_empty() || gallery.is_empty() {
            return Err(Error::Shape(
                "retrieval needs at least one query and one gallery item".into(),
            ));
        }
        if queries.len() != query_labels.rows() || gallery.len() != gallery_labels.rows() {
            return Err(Error::Shape("codes and labels disagree in length".into()));
        }
        if query_labels.class_count() != gallery_labels.class_count() {
            return Err(Error::Shape("query and gallery label spaces differ".into()));
        }
        let len = queries[0].len();
        if queries.iter().chain(&gallery).any(|c| c.len() != len) {
            return Err(Error::Shape("all codes must share one length".into()));
        }
        Ok(RetrievalTask {
            direction,
            queries,
            query_labels,
            gallery,
            gallery_labels,
        })
    }

    /// Relevance flags of the gallery for query `q`, in ranked order.
    pub fn ranked_relevance(&self, q: usize) -> Vec<bool> {
        rank_gallery(&self.queries[q], &self.gallery)
            .into_iter()
            .map(|g| self.query_labels.shares_class(q, &self.gallery_labels, g))
            .collect()
    }
}

/// Number of disagreeing positions.
pub fn hamming_distance(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "code lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    Ok(packed_distance(a, b))
}

fn packed_distance(a: &BinaryCode, b: &BinaryCode) -> u32 {
    a.words()
        .iter()
        .zip(b.words())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

/// Gallery indices by ascending distance, ties by ascending index.
pub fn rank_gallery(query: &BinaryCode, gallery: &[BinaryCode]) -> Vec<usize> {
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); query.len() + 1];
    for (g, code) in gallery.iter().enumerate() {
        buckets[packed_distance(query, code) as usize].push(g);
    }
    buckets.into_iter().flatten().collect()
}

/// Mean of precision@k over the ranks `k` of relevant items; 0 when nothing
/// is relevant.
pub fn average_precision(relevance: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, &rel) in relevance.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// MAP over the full gallery ranking. Queries without relevant items score
/// zero and still count.
pub fn mean_average_precision(task: &RetrievalTask, exec: Exec) -> f64 {
    let aps = exec.map(task.queries.len(), |q| {
        average_precision(&task.ranked_relevance(q))
    });
    aps.iter().sum::<f64>() / aps.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
}

/// Interpolated precision-recall curve at `num_points` evenly spaced recall
/// levels from 0 to 1: at level `t`, each query contributes its best
/// precision over all cut-offs reaching recall `>= t`. Queries without
/// relevant items are left out of the average.
pub fn pr_curve(task: &RetrievalTask, num_points: usize, exec: Exec) -> Result<Vec<CurvePoint>> {
    if num_points < 2 {
        return Err(Error::param("num_points", "need at least 2 points"));
    }
    let levels: Vec<f64> = (0..num_points)
        .map(|j| j as f64 / (num_points - 1) as f64)
        .collect();
    let per_query: Vec<Option<Vec<f64>>> = exec.map(task.queries.len(), |q| {
        let rel = task.ranked_relevance(q);
        let total = rel.iter().filter(|&&r| r).count();
        if total == 0 {
            return None;
        }
        // precision at the rank of each relevant item, best-from-here-on
        let mut prec_at_hit = Vec::with_capacity(total);
        let mut hits = 0usize;
        for (k, &r) in rel.iter().enumerate() {
            if r {
                hits += 1;
                prec_at_hit.push(hits as f64 / (k + 1) as f64);
            }
        }
        for h in (0..total - 1).rev() {
            prec_at_hit[h] = prec_at_hit[h].max(prec_at_hit[h + 1]);
        }
        Some(
            levels
                .iter()
                .map(|&t| {
                    let needed = ((t * total as f64).ceil() as usize).clamp(1, total);
                    prec_at_hit[needed - 1]
                })
                .collect(),
        )
    });
    let counted: Vec<&Vec<f64>> = per_query.iter().flatten().collect();
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let y = if counted.is_empty() {
                0.0
            } else {
                counted.iter().map(|p| p[j]).sum::<f64>() / counted.len() as f64
            };
            CurvePoint { x, y }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDetection {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

/// Scores the zero-weight set as a detector of the injected noise.
///
/// Conventions: with no predictions precision is 1; with no noisy instances
/// recall is 1 (and precision 0 if anything was predicted); AUC is 0.5 when
/// either class is absent. The AUC ranks instances by ascending weight, with
/// ties counted as one half.
pub fn noise_detection_score(weights: &SampleWeights, mask: &[bool]) -> Result<NoiseDetection> {
    if weights.len() != mask.len() {
        return Err(Error::Shape(format!(
            "{} weights vs {} mask entries",
            weights.len(),
            mask.len()
        )));
    }
    let predicted: Vec<bool> = weights.w.iter().map(|&w| w == 0.0).collect();
    let tp = predicted.iter().zip(mask).filter(|(p, m)| **p && **m).count() as f64;
    let n_pred = predicted.iter().filter(|&&p| p).count() as f64;
    let n_pos = mask.iter().filter(|&&m| m).count() as f64;
    let precision = if n_pred == 0.0 { 1.0 } else { tp / n_pred };
    let recall = if n_pos == 0.0 { 1.0 } else { tp / n_pos };
    let precision = if n_pos == 0.0 && n_pred > 0.0 {
        0.0
    } else {
        precision
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(NoiseDetection {
        precision,
        recall,
        f1,
        auc: ranking_auc(&weights.w, mask),
    })
}

/// Probability that a random noisy instance has a lower weight than a random
/// clean one (Mann-Whitney with average ranks).
fn ranking_auc(weights: &[f64], mask: &[bool]) -> f64 {
    let n_pos = mask.iter().filter(|&&m| m).count();
    let n_neg = mask.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    // score = -weight; rank ascending by score
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && weights[order[end + 1]] == weights[order[start]] {
            end += 1;
        }
        let avg_rank = (start + end) as f64 / 2.0 + 1.0;
        rank_sum += order[start..=end].iter().filter(|&&i| mask[i]).count() as f64 * avg_rank;
        start = end + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    /// Fraction of instances in the bin.
    pub mass: f64,
}

/// Normalized histogram of weights over `[0, 1]`; the last bin is closed.
pub fn weight_density(weights: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins < 2 {
        return Err(Error::param("bins", "need at least 2 bins"));
    }
    if weights.is_empty() {
        return Err(Error::param("weights", "no weights to histogram"));
    }
    let mut counts = vec![0usize; bins];
    for &w in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::param("weights", format!("{w} is outside [0, 1]")));
        }
        counts[((w * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let n = weights.len() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(b, &c)| HistogramBin {
            left: b as f64 / bins as f64,
            right: (b + 1) as f64 / bins as f64,
            mass: c as f64 / n,
        })
        .collect())
}

pub fn write_pr_csv<W: Write>(out: &mut W, curve: &[CurvePoint]) -> std::io::Result<()> {
    writeln!(out, "recall,precision")?;
    for p in curve {
        writeln!(out, "{:.6},{:.6}", p.x, p.y)?;
    }
    Ok(())
}

pub fn write_map_curve_csv<W: Write>(out: &mut W, rows: &[(usize, f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "epoch,map_i2t,map_t2i")?;
    for (epoch, i2t, t2i) in rows {
        writeln!(out, "{epoch},{i2t:.6},{t2i:.6}")?;
    }
    Ok(())
}

pub fn write_density_csv<W: Write>(out: &mut W, hist: &[HistogramBin]) -> std::io::Result<()> {
    writeln!(out, "bin_left,bin_right,density")?;
    for b in hist {
        writeln!(out, "{:.6},{:.6},{:.6}", b.left, b.right, b.mass)?;
    }
    Ok(())
}
