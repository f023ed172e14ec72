//! Longitudinal analyses: saturation curves, subsampling, greedy selection.
//!
//! These answer "how many images does a template actually need, and which
//! ones?":
//!
//! - [`plateau_curve`] walks a person's image sequence and plots how far each
//!   next image sits from the running mean template — the curve flattens once
//!   new images stop adding variation, and upticks mark genuinely new
//!   appearance (pose, lighting, accessories).
//! - [`rolling_template_curve`] plots match error against a held-out test set
//!   as the template grows one image at a time.
//! - [`subsample_every_nth`] thins an image sequence (every n-th frame), the
//!   cheap alternative to using everything.
//! - [`greedy_select`] picks template images one at a time, always taking the
//!   candidate that lowers match error the most.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{l1_unchecked, l2_unchecked, Embedding};

/// Errors from curve construction and greedy selection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    /// A plateau curve needs at least two images.
    #[error("need at least 2 images, got {0}")]
    TooFewImages(usize),
    /// Curves and selections need non-empty inputs.
    #[error("empty input sequence")]
    EmptyInput,
    /// Greedy selection cannot pick more images than exist.
    #[error("k must be between 1 and {candidates}, got {k}")]
    KTooLarge { k: usize, candidates: usize },
    /// All embeddings involved must share one dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// One point of a curve: `index` counts images folded into the template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub index: usize,
    pub value: f64,
}

/// A labeled series of curve points with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

impl CurveSeries {
    /// Same points under a new label (labels usually become person ids).
    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Distance definition for [`plateau_curve_with_metric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateauMetric {
    /// Euclidean distance; the default, same metric used for matching.
    L2,
    /// Sum of absolute coordinate differences, for replicating analyses that
    /// accumulate per-dimension differences instead.
    L1,
}

impl std::fmt::Display for PlateauMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlateauMetric::L2 => "l2",
            PlateauMetric::L1 => "l1",
        })
    }
}

impl std::str::FromStr for PlateauMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(PlateauMetric::L2),
            "l1" => Ok(PlateauMetric::L1),
            other => Err(format!("unknown metric '{other}' (expected l2 or l1)")),
        }
    }
}

fn uniform_dim(embeddings: &[Embedding]) -> Result<usize, AnalysisError> {
    let first = embeddings.first().ok_or(AnalysisError::EmptyInput)?;
    let dim = first.dim();
    for e in embeddings {
        if e.dim() != dim {
            return Err(AnalysisError::DimensionMismatch {
                expected: dim,
                actual: e.dim(),
            });
        }
    }
    Ok(dim)
}

/// Distance from the running mean template to each next image.
///
/// Point `k` (for `k` in `1..n`) is the distance between the mean of
/// `images[0..k]` and `images[k]`: how "new" image `k` looks given everything
/// enrolled before it. Uses the L2 metric; see
/// [`plateau_curve_with_metric`] for L1.
pub fn plateau_curve(images: &[Embedding]) -> Result<CurveSeries, AnalysisError> {
    plateau_curve_with_metric(images, PlateauMetric::L2)
}

/// [`plateau_curve`] with an explicit distance metric.
pub fn plateau_curve_with_metric(
    images: &[Embedding],
    metric: PlateauMetric,
) -> Result<CurveSeries, AnalysisError> {
    uniform_dim(images)?;
    if images.len() < 2 {
        return Err(AnalysisError::TooFewImages(images.len()));
    }
    // Maintain the running mean incrementally; each step folds in one image.
    let mut mean: Vec<f64> = images[0].values().to_vec();
    let mut points = Vec::with_capacity(images.len() - 1);
    for (k, next) in images.iter().enumerate().skip(1) {
        let value = match metric {
            PlateauMetric::L2 => l2_unchecked(&mean, next.values()),
            PlateauMetric::L1 => l1_unchecked(&mean, next.values()),
        };
        points.push(CurvePoint { index: k, value });
        if k + 1 < images.len() {
            let new_count = (k + 1) as f64;
            for (m, v) in mean.iter_mut().zip(next.values()) {
                *m += (v - *m) / new_count;
            }
        }
    }
    Ok(CurveSeries {
        label: "plateau".into(),
        points,
    })
}

/// Match error against a fixed test set as the template grows.
///
/// Point `k` (for `k` in `1..=n`) is the mean L2 distance from the mean of
/// `template_images[0..k]` to every test embedding. The first point is the
/// single-image template; the last uses every template image.
pub fn rolling_template_curve(
    template_images: &[Embedding],
    test_embs: &[Embedding],
) -> Result<CurveSeries, AnalysisError> {
    let dim = uniform_dim(template_images)?;
    let test_dim = uniform_dim(test_embs)?;
    if dim != test_dim {
        return Err(AnalysisError::DimensionMismatch {
            expected: dim,
            actual: test_dim,
        });
    }
    let mut mean: Vec<f64> = vec![0.0; dim];
    let mut points = Vec::with_capacity(template_images.len());
    for (i, image) in template_images.iter().enumerate() {
        let count = (i + 1) as f64;
        for (m, v) in mean.iter_mut().zip(image.values()) {
            *m += (v - *m) / count;
        }
        let value = test_embs
            .iter()
            .map(|t| l2_unchecked(&mean, t.values()))
            .sum::<f64>()
            / test_embs.len() as f64;
        points.push(CurvePoint {
            index: i + 1,
            value,
        });
    }
    Ok(CurveSeries {
        label: "rolling-template".into(),
        points,
    })
}

/// Keeps every n-th element, starting with the first.
///
/// `n = 1` returns the input unchanged; the result is never empty for
/// non-empty input.
pub fn subsample_every_nth<T: Clone>(items: &[T], n: NonZeroUsize) -> Vec<T> {
    items.iter().step_by(n.get()).cloned().collect()
}

/// Trace of a greedy template-image selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    /// Indices into the candidate sequence, in pick order; no duplicates.
    pub selected: Vec<usize>,
    /// Match error after each pick; non-increasing.
    pub distances: Vec<f64>,
    /// True when selection stopped before `k` picks because no remaining
    /// candidate improved the match error.
    pub stopped_early: bool,
}

/// Greedily picks up to `k` candidate images for a mean template.
///
/// Each step evaluates, for every unselected candidate, the match error of
/// the mean over (selected ∪ candidate) against `test_embs`, and takes the
/// candidate with the lowest error — lowest index on ties. Selection stops
/// early (and says so) when the best remaining candidate would make things
/// strictly worse.
///
/// A running coordinate sum of the selected embeddings makes each candidate's
/// mean an O(dim) update instead of a rescan of everything selected so far.
pub fn greedy_select(
    candidates: &[Embedding],
    test_embs: &[Embedding],
    k: usize,
) -> Result<GreedyTrace, AnalysisError> {
    let dim = uniform_dim(candidates)?;
    let test_dim = uniform_dim(test_embs)?;
    if dim != test_dim {
        return Err(AnalysisError::DimensionMismatch {
            expected: dim,
            actual: test_dim,
        });
    }
    if k == 0 || k > candidates.len() {
        return Err(AnalysisError::KTooLarge {
            k,
            candidates: candidates.len(),
        });
    }

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut distances: Vec<f64> = Vec::with_capacity(k);
    let mut taken = vec![false; candidates.len()];
    let mut sum = vec![0.0f64; dim];
    let mut mean_buf = vec![0.0f64; dim];
    let mut current = f64::INFINITY;
    let mut stopped_early = false;

    for step in 0..k {
        let divisor = (step + 1) as f64;
        let mut best: Option<(usize, f64)> = None;
        for (c, candidate) in candidates.iter().enumerate() {
            if taken[c] {
                continue;
            }
            for ((m, s), v) in mean_buf.iter_mut().zip(&sum).zip(candidate.values()) {
                *m = (s + v) / divisor;
            }
            let score = test_embs
                .iter()
                .map(|t| l2_unchecked(&mean_buf, t.values()))
                .sum::<f64>()
                / test_embs.len() as f64;
            // Strict < keeps the lowest index on ties.
            if best.is_none_or(|(_, b)| score < b) {
                best = Some((c, score));
            }
        }
        let (pick, score) = best.expect("k <= candidates leaves at least one unselected");
        if score > current {
            stopped_early = true;
            break;
        }
        taken[pick] = true;
        selected.push(pick);
        distances.push(score);
        current = score;
        for (s, v) in sum.iter_mut().zip(candidates[pick].values()) {
            *s += v;
        }
    }

    Ok(GreedyTrace {
        selected,
        distances,
        stopped_early,
    })
}
