//! Embedding vectors, validation, and the L2 match metric.
//!
//! An [`Embedding`] is a fixed-dimension vector of finite `f64` values as
//! produced by an upstream face-recognition model. Two embeddings match when
//! their L2 distance is at or below a [`MatchThreshold`]. Values are kept
//! exactly as ingested: nothing here renormalizes implicitly, and callers that
//! want unit-length vectors must ask for them via
//! [`Embedding::unit_normalized`].

use thiserror::Error;

/// Errors from embedding construction, comparison, and normalization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    /// The number of values does not match the required dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// A value is NaN or infinite; `index` is the offending coordinate.
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    /// Embeddings must contain at least one value.
    #[error("embedding must not be empty")]
    Empty,
    /// The zero vector has no unit-length counterpart.
    #[error("cannot unit-normalize an embedding with zero norm")]
    ZeroNorm,
    /// Match thresholds must be finite and non-negative.
    #[error("invalid match threshold {value}: must be finite and non-negative")]
    InvalidThreshold { value: f64 },
}

/// A face-embedding vector of finite `f64` values.
///
/// The dimension is the vector length and is fixed at construction; all
/// values are guaranteed finite. Equality is element-wise numeric equality.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Validates `values` against `expected_dim` and wraps them.
    ///
    /// Fails with [`EmbeddingError::DimensionMismatch`] when the length is
    /// wrong and [`EmbeddingError::NonFiniteValue`] for the first NaN or
    /// infinite entry.
    pub fn new(values: Vec<f64>, expected_dim: usize) -> Result<Self, EmbeddingError> {
        if values.len() != expected_dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: expected_dim,
                actual: values.len(),
            });
        }
        Self::from_values(values)
    }

    /// Wraps `values` taking the dimension from the vector length.
    pub fn from_values(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue { index });
        }
        Ok(Self { values })
    }

    /// Internal constructor for values that are finite by construction.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    /// The vector values, in coordinate order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Returns the unit-length copy of this embedding.
    ///
    /// This is the only normalization the toolkit performs, and only when
    /// explicitly requested; stored and aggregated embeddings keep their
    /// original scale. Fails with [`EmbeddingError::ZeroNorm`] on the zero
    /// vector.
    pub fn unit_normalized(&self) -> Result<Self, EmbeddingError> {
        // Scale by the largest magnitude first so the sum of squares cannot
        // overflow even for extreme inputs.
        let max_abs = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_abs == 0.0 {
            return Err(EmbeddingError::ZeroNorm);
        }
        let sum_sq: f64 = self
            .values
            .iter()
            .map(|v| {
                let s = v / max_abs;
                s * s
            })
            .sum();
        let norm = max_abs * sum_sq.sqrt();
        Ok(Self::from_values_unchecked(
            self.values.iter().map(|v| v / norm).collect(),
        ))
    }
}

/// Decision boundary for [`is_same_person`]: finite, non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchThreshold(f64);

impl MatchThreshold {
    pub fn new(value: f64) -> Result<Self, EmbeddingError> {
        if !value.is_finite() || value < 0.0 {
            return Err(EmbeddingError::InvalidThreshold { value });
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Euclidean (L2) distance between two embeddings of equal dimension.
pub fn l2_distance(a: &Embedding, b: &Embedding) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(l2_unchecked(a.values(), b.values()))
}

/// L2 distance over raw slices; callers must have checked dimensions.
pub(crate) fn l2_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    sum.sqrt()
}

/// L1 (sum of absolute differences) distance over raw slices.
pub(crate) fn l1_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Whether two embeddings are close enough to be considered the same person.
///
/// The comparison is inclusive: a distance exactly on the threshold counts
/// as a match.
pub fn is_same_person(
    a: &Embedding,
    b: &Embedding,
    threshold: MatchThreshold,
) -> Result<bool, EmbeddingError> {
    Ok(l2_distance(a, b)? <= threshold.value())
}
