//! Aggregation of an embedding set into a single template.
//!
//! The non-oracle strategies reduce a set of embeddings dimension by
//! dimension: coordinate `j` of the template is a statistic (mean, median,
//! min, max, percentile) of coordinate `j` across the input embeddings. Two
//! oracle strategies — [`AggregationStrategy::Optimal`] and
//! [`AggregationStrategy::BestPerComparison`] — peek at test data and exist
//! only as upper-bound references; they are flagged so reports can mark them
//! as unavailable in production.
//!
//! [`RollingMeanState`] maintains the mean template incrementally so a
//! deployed system can fold in a newly captured image without revisiting the
//! full history.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{l2_unchecked, Embedding};

/// Errors from template aggregation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    /// Cannot aggregate an empty set of embeddings.
    #[error("cannot aggregate an empty set of embeddings")]
    EmptyInput,
    /// Inputs must all share one dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// Oracle strategies derive their template from test data, not from the
    /// template set, so they cannot be used as a dimension-wise reduction.
    #[error("oracle strategy {0} cannot be applied as a dimension-wise reduction")]
    OracleStrategyMisuse(AggregationStrategy),
    /// The strategy selects a single image rather than reducing a set.
    #[error("strategy {0} selects a single image and does not reduce a set")]
    NotAReduction(AggregationStrategy),
}

/// How a set of embeddings is turned into one template.
///
/// Declared in canonical report order. `Baseline` is not a reduction — it
/// stands for "use the first enrolled image as-is" and is resolved by the
/// evaluation layer. `Optimal` and `BestPerComparison` are oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggregationStrategy {
    Baseline,
    Mean,
    Median,
    Min,
    Max,
    Percentile25,
    Percentile75,
    Optimal,
    BestPerComparison,
}

impl AggregationStrategy {
    /// All strategies in canonical report order.
    pub const ALL: [AggregationStrategy; 9] = [
        AggregationStrategy::Baseline,
        AggregationStrategy::Mean,
        AggregationStrategy::Median,
        AggregationStrategy::Min,
        AggregationStrategy::Max,
        AggregationStrategy::Percentile25,
        AggregationStrategy::Percentile75,
        AggregationStrategy::Optimal,
        AggregationStrategy::BestPerComparison,
    ];

    /// Whether the strategy uses test data (and is therefore unavailable to a
    /// production system at enrollment time).
    pub fn is_oracle(self) -> bool {
        matches!(
            self,
            AggregationStrategy::Optimal | AggregationStrategy::BestPerComparison
        )
    }

    /// Whether [`aggregate`] accepts the strategy as a dimension-wise
    /// reduction over the template set.
    pub fn is_reduction(self) -> bool {
        matches!(
            self,
            AggregationStrategy::Mean
                | AggregationStrategy::Median
                | AggregationStrategy::Min
                | AggregationStrategy::Max
                | AggregationStrategy::Percentile25
                | AggregationStrategy::Percentile75
        )
    }
}

impl fmt::Display for AggregationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            AggregationStrategy::Baseline => "Baseline",
            AggregationStrategy::Mean => "Avg",
            AggregationStrategy::Median => "Median",
            AggregationStrategy::Min => "Min",
            AggregationStrategy::Max => "Max",
            AggregationStrategy::Percentile25 => "25th percentile",
            AggregationStrategy::Percentile75 => "75th percentile",
            AggregationStrategy::Optimal => "Optimal",
            AggregationStrategy::BestPerComparison => "Best template per comp",
        };
        f.write_str(label)
    }
}

impl FromStr for AggregationStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(AggregationStrategy::Baseline),
            "mean" | "avg" | "average" => Ok(AggregationStrategy::Mean),
            "median" => Ok(AggregationStrategy::Median),
            "min" => Ok(AggregationStrategy::Min),
            "max" => Ok(AggregationStrategy::Max),
            "p25" | "percentile25" => Ok(AggregationStrategy::Percentile25),
            "p75" | "percentile75" => Ok(AggregationStrategy::Percentile75),
            "optimal" => Ok(AggregationStrategy::Optimal),
            "best-per-comparison" | "bestpercomparison" | "best" => {
                Ok(AggregationStrategy::BestPerComparison)
            }
            other => Err(format!(
                "unknown strategy '{other}' (expected one of: baseline, mean, median, min, \
                 max, p25, p75, optimal, best-per-comparison)"
            )),
        }
    }
}

/// Checks that all embeddings share a dimension and returns it.
fn uniform_dim(embeddings: &[Embedding]) -> Result<usize, AggregationError> {
    let first = embeddings.first().ok_or(AggregationError::EmptyInput)?;
    let dim = first.dim();
    for e in embeddings {
        if e.dim() != dim {
            return Err(AggregationError::DimensionMismatch {
                expected: dim,
                actual: e.dim(),
            });
        }
    }
    Ok(dim)
}

/// Linear interpolation between closest ranks at position `p * (n - 1)` of a
/// sorted column. The result is clamped to the bracketing order statistics so
/// that float rounding can never push it outside them; this keeps the
/// min ≤ p25 ≤ median ≤ p75 ≤ max chain exact.
fn percentile_of_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    let raw = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    raw.clamp(sorted[lo], sorted[hi])
}

/// Reduces `embeddings` into one template, dimension by dimension.
///
/// Only the six reduction strategies are accepted; `Baseline` fails with
/// [`AggregationError::NotAReduction`] and the oracles with
/// [`AggregationError::OracleStrategyMisuse`]. The output dimension equals the
/// input dimension, a single-element input is returned unchanged for every
/// strategy, and the result does not depend on input order.
pub fn aggregate(
    strategy: AggregationStrategy,
    embeddings: &[Embedding],
) -> Result<Embedding, AggregationError> {
    if strategy.is_oracle() {
        return Err(AggregationError::OracleStrategyMisuse(strategy));
    }
    if !strategy.is_reduction() {
        return Err(AggregationError::NotAReduction(strategy));
    }
    let dim = uniform_dim(embeddings)?;
    let n = embeddings.len();

    let mut out = Vec::with_capacity(dim);
    let mut column = vec![0.0f64; n];
    for j in 0..dim {
        for (slot, e) in column.iter_mut().zip(embeddings) {
            *slot = e.values()[j];
        }
        // Sorting makes every reduction a function of the value multiset:
        // permutations of the input cannot change the result, and summing in
        // sorted order gives the mean one canonical rounding.
        column.sort_unstable_by(f64::total_cmp);
        let (lo, hi) = (column[0], column[n - 1]);
        let value = match strategy {
            AggregationStrategy::Min => lo,
            AggregationStrategy::Max => hi,
            AggregationStrategy::Median => percentile_of_sorted(&column, 0.5),
            AggregationStrategy::Percentile25 => percentile_of_sorted(&column, 0.25),
            AggregationStrategy::Percentile75 => percentile_of_sorted(&column, 0.75),
            AggregationStrategy::Mean => {
                let sum: f64 = column.iter().sum();
                // The true mean lies between the extremes; clamp away any
                // accumulated rounding so betweenness holds exactly.
                (sum / n as f64).clamp(lo, hi)
            }
            _ => unreachable!("non-reduction strategies rejected above"),
        };
        out.push(value);
    }
    Ok(Embedding::from_values_unchecked(out))
}

/// Incrementally maintained mean template.
///
/// An empty state has no mean; folding embeddings in with
/// [`RollingMeanState::updated`] keeps the mean of everything seen so far
/// without storing the history. Agrees with `aggregate(Mean, ·)` over the same
/// inputs to within 1e-9 relative.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RollingMeanState {
    mean: Option<Embedding>,
    count: usize,
}

impl RollingMeanState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of embeddings folded in so far.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Mean of everything folded in; `None` while the state is empty.
    pub fn mean(&self) -> Option<&Embedding> {
        self.mean.as_ref()
    }

    /// Returns the state after also absorbing `x`.
    ///
    /// Uses the running update `m + (x - m) / n`, which keeps the mean exact
    /// for constant input and never revisits earlier embeddings.
    pub fn updated(&self, x: &Embedding) -> Result<Self, AggregationError> {
        match &self.mean {
            None => Ok(Self {
                mean: Some(x.clone()),
                count: 1,
            }),
            Some(mean) => {
                if mean.dim() != x.dim() {
                    return Err(AggregationError::DimensionMismatch {
                        expected: mean.dim(),
                        actual: x.dim(),
                    });
                }
                let new_count = self.count + 1;
                let values = mean
                    .values()
                    .iter()
                    .zip(x.values())
                    .map(|(m, v)| m + (v - m) / new_count as f64)
                    .collect();
                Ok(Self {
                    mean: Some(Embedding::from_values_unchecked(values)),
                    count: new_count,
                })
            }
        }
    }
}

/// Oracle template: the mean of the *test* embeddings themselves.
///
/// Among all fixed templates this one minimizes the mean squared distance to
/// the test set, so it lower-bounds what any enrollment-time strategy can
/// achieve on that metric.
pub fn optimal_template(test_embeddings: &[Embedding]) -> Result<Embedding, AggregationError> {
    aggregate(AggregationStrategy::Mean, test_embeddings)
}

/// Oracle selection: the candidate closest to this particular probe.
///
/// Returns `(index, distance)` of the closest candidate, preferring the
/// lowest index on ties. No single template exists here — a fresh choice is
/// made per comparison, which is what makes it an oracle.
pub fn best_template_per_comparison(
    candidates: &[Embedding],
    probe: &Embedding,
) -> Result<(usize, f64), AggregationError> {
    let dim = uniform_dim(candidates)?;
    if probe.dim() != dim {
        return Err(AggregationError::DimensionMismatch {
            expected: dim,
            actual: probe.dim(),
        });
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let d = l2_unchecked(c.values(), probe.values());
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::l2_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn emb(values: &[f64]) -> Embedding {
        Embedding::from_values(values.to_vec()).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Embedding> {
        (0..n)
            .map(|_| {
                Embedding::from_values((0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn test_mean_of_two_embeddings() {
        let got = aggregate(AggregationStrategy::Mean, &[emb(&[1.0, 3.0]), emb(&[3.0, 5.0])])
            .unwrap();
        assert_eq!(got.values(), &[2.0, 4.0]);
    }

    #[test]
    fn test_max_is_per_dimension() {
        let got = aggregate(AggregationStrategy::Max, &[emb(&[1.0, 5.0]), emb(&[3.0, 2.0])])
            .unwrap();
        assert_eq!(got.values(), &[3.0, 5.0]);
    }

    #[test]
    fn test_median_odd_count_is_middle_value() {
        let got = aggregate(
            AggregationStrategy::Median,
            &[emb(&[1.0]), emb(&[9.0]), emb(&[5.0])],
        )
        .unwrap();
        assert_eq!(got.values(), &[5.0]);
    }

    #[test]
    fn test_median_even_count_averages_the_middle_pair() {
        let got = aggregate(
            AggregationStrategy::Median,
            &[emb(&[1.0]), emb(&[2.0]), emb(&[3.0]), emb(&[10.0])],
        )
        .unwrap();
        assert_eq!(got.values(), &[2.5]);
    }

    #[test]
    fn test_single_input_returned_unchanged_for_every_reduction() {
        let e = emb(&[0.1, -2.75, 3.25, 0.0]);
        for strategy in AggregationStrategy::ALL {
            if !strategy.is_reduction() {
                continue;
            }
            let got = aggregate(strategy, std::slice::from_ref(&e)).unwrap();
            for (a, b) in got.values().iter().zip(e.values()) {
                assert_eq!(a.to_bits(), b.to_bits(), "{strategy}");
            }
        }
    }

    #[test]
    fn test_empty_input_rejected() {
        assert_eq!(
            aggregate(AggregationStrategy::Mean, &[]).unwrap_err(),
            AggregationError::EmptyInput
        );
    }

    #[test]
    fn test_oracle_strategies_rejected_as_reductions() {
        let set = [emb(&[1.0]), emb(&[2.0])];
        assert_eq!(
            aggregate(AggregationStrategy::Optimal, &set).unwrap_err(),
            AggregationError::OracleStrategyMisuse(AggregationStrategy::Optimal)
        );
        assert_eq!(
            aggregate(AggregationStrategy::BestPerComparison, &set).unwrap_err(),
            AggregationError::OracleStrategyMisuse(AggregationStrategy::BestPerComparison)
        );
        assert_eq!(
            aggregate(AggregationStrategy::Baseline, &set).unwrap_err(),
            AggregationError::NotAReduction(AggregationStrategy::Baseline)
        );
    }

    #[test]
    fn test_mixed_dimensions_rejected() {
        let err = aggregate(AggregationStrategy::Mean, &[emb(&[1.0, 2.0]), emb(&[1.0])])
            .unwrap_err();
        assert_eq!(
            err,
            AggregationError::DimensionMismatch {
                expected: 2,
                actual: 1
            }
        );
    }

    #[test]
    fn test_percentile25_matches_order_statistics_oracle() {
        // Independent oracle: sort each column and interpolate between the
        // two closest ranks at position 0.25 * (n - 1), computed with its own
        // arithmetic ((1 - f) * lo + f * hi rather than lo + f * (hi - lo)).
        fn oracle_percentile(values: &mut [f64], p: f64) -> f64 {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let pos = p * (values.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let f = pos - lo as f64;
            (1.0 - f) * values[lo] + f * values[hi]
        }
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        // n = 9 puts the 25th percentile exactly on an order statistic
        // (rank 2); n = 10 exercises true interpolation.
        for n in [9usize, 10] {
            let set = random_set(&mut rng, n, 512);
            for (strategy, p) in [
                (AggregationStrategy::Percentile25, 0.25),
                (AggregationStrategy::Median, 0.5),
                (AggregationStrategy::Percentile75, 0.75),
            ] {
                let got = aggregate(strategy, &set).unwrap();
                for j in 0..512 {
                    let mut col: Vec<f64> = set.iter().map(|e| e.values()[j]).collect();
                    let want = oracle_percentile(&mut col, p);
                    let tol = 1e-12 * want.abs().max(1.0);
                    assert!(
                        (got.values()[j] - want).abs() <= tol,
                        "{strategy} dim {j}: {} vs {}",
                        got.values()[j],
                        want
                    );
                }
            }
        }
        // With n = 9 the 25th percentile must be the third-smallest exactly.
        let set = random_set(&mut rng, 9, 64);
        let got = aggregate(AggregationStrategy::Percentile25, &set).unwrap();
        for j in 0..64 {
            let mut col: Vec<f64> = set.iter().map(|e| e.values()[j]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got.values()[j].to_bits(), col[2].to_bits());
        }
    }

    #[test]
    fn test_rolling_mean_starts_empty() {
        let state = RollingMeanState::new();
        assert_eq!(state.count(), 0);
        assert!(state.mean().is_none());
    }

    #[test]
    fn test_rolling_mean_single_update_is_the_embedding() {
        let state = RollingMeanState::new().updated(&emb(&[2.0, 4.0])).unwrap();
        assert_eq!(state.count(), 1);
        assert_eq!(state.mean().unwrap().values(), &[2.0, 4.0]);
    }

    #[test]
    fn test_rolling_mean_two_updates() {
        let state = RollingMeanState::new()
            .updated(&emb(&[2.0, 4.0]))
            .unwrap()
            .updated(&emb(&[4.0, 8.0]))
            .unwrap();
        assert_eq!(state.mean().unwrap().values(), &[3.0, 6.0]);
    }

    #[test]
    fn test_rolling_mean_dimension_mismatch() {
        let state = RollingMeanState::new().updated(&emb(&[1.0, 2.0])).unwrap();
        assert!(matches!(
            state.updated(&emb(&[1.0])),
            Err(AggregationError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn test_rolling_mean_tracks_batch_mean() {
        // Dual route: fold the incremental update, compare against the batch
        // reduction, across many seeded sequences.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.random_range(2..60);
            let set = random_set(&mut rng, n, 32);
            let mut state = RollingMeanState::new();
            for e in &set {
                state = state.updated(e).unwrap();
            }
            let rolling = state.mean().unwrap();
            let batch = aggregate(AggregationStrategy::Mean, &set).unwrap();
            for (r, b) in rolling.values().iter().zip(batch.values()) {
                let rel = (r - b).abs() / b.abs().max(1e-12);
                assert!(rel <= 1e-9, "rolling {r} vs batch {b}");
            }
        }
    }

    #[test]
    fn test_optimal_template_is_mean_of_tests() {
        let tests = [emb(&[0.0, 2.0]), emb(&[2.0, 6.0])];
        let got = optimal_template(&tests).unwrap();
        assert_eq!(got.values(), &[1.0, 4.0]);
    }

    #[test]
    fn test_optimal_template_minimizes_mean_squared_distance() {
        // Oracle: no perturbed template may do better on mean *squared*
        // distance than the mean of the test set.
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..20 {
            let tests = random_set(&mut rng, 12, 16);
            let optimal = optimal_template(&tests).unwrap();
            let msd = |t: &Embedding| -> f64 {
                tests
                    .iter()
                    .map(|e| l2_distance(t, e).unwrap().powi(2))
                    .sum::<f64>()
                    / tests.len() as f64
            };
            let base = msd(&optimal);
            for _ in 0..50 {
                let noisy = Embedding::from_values(
                    optimal
                        .values()
                        .iter()
                        .map(|v| v + rng.random_range(-0.5..0.5))
                        .collect(),
                )
                .unwrap();
                assert!(msd(&noisy) >= base - 1e-12 * base.max(1.0));
            }
        }
    }

    #[test]
    fn test_best_per_comparison_picks_closest_candidate() {
        let candidates = [emb(&[0.0, 0.0]), emb(&[1.0, 1.0]), emb(&[5.0, 5.0])];
        let (idx, dist) = best_template_per_comparison(&candidates, &emb(&[1.1, 1.0])).unwrap();
        assert_eq!(idx, 1);
        assert!((dist - 0.1).abs() < 1e-12);
    }

    #[test]
    fn test_best_per_comparison_ties_go_to_lowest_index() {
        let candidates = [emb(&[1.0]), emb(&[3.0]), emb(&[1.0])];
        let (idx, dist) = best_template_per_comparison(&candidates, &emb(&[2.0])).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(dist, 1.0);
    }

    #[test]
    fn test_best_per_comparison_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        for _ in 0..100 {
            let candidates = random_set(&mut rng, 10, 24);
            let probe = random_set(&mut rng, 1, 24).pop().unwrap();
            let (idx, dist) = best_template_per_comparison(&candidates, &probe).unwrap();
            // Oracle: independent full scan keeping the first minimum.
            let mut want_idx = 0usize;
            let mut want = f64::INFINITY;
            for (i, c) in candidates.iter().enumerate() {
                let d = l2_distance(c, &probe).unwrap();
                if d < want {
                    want = d;
                    want_idx = i;
                }
            }
            assert_eq!(idx, want_idx);
            assert_eq!(dist.to_bits(), want.to_bits());
        }
    }

    #[test]
    fn test_strategy_labels_round_trip_from_cli_names() {
        for (name, strategy) in [
            ("baseline", AggregationStrategy::Baseline),
            ("mean", AggregationStrategy::Mean),
            ("avg", AggregationStrategy::Mean),
            ("median", AggregationStrategy::Median),
            ("min", AggregationStrategy::Min),
            ("max", AggregationStrategy::Max),
            ("p25", AggregationStrategy::Percentile25),
            ("p75", AggregationStrategy::Percentile75),
            ("optimal", AggregationStrategy::Optimal),
            ("best-per-comparison", AggregationStrategy::BestPerComparison),
        ] {
            assert_eq!(name.parse::<AggregationStrategy>().unwrap(), strategy);
        }
        assert!("frobnicate".parse::<AggregationStrategy>().is_err());
    }

    mod properties {
        use super::*;
        use proptest::collection::vec;
        use proptest::prelude::*;

        const REDUCTIONS: [AggregationStrategy; 6] = [
            AggregationStrategy::Mean,
            AggregationStrategy::Median,
            AggregationStrategy::Min,
            AggregationStrategy::Max,
            AggregationStrategy::Percentile25,
            AggregationStrategy::Percentile75,
        ];

        /// A non-empty set of same-dimension embeddings.
        fn embedding_set() -> impl Strategy<Value = Vec<Embedding>> {
            (1usize..8, 1usize..12).prop_flat_map(|(dim, n)| {
                vec(vec(-1.0e3..1.0e3f64, dim), n).prop_map(|rows| {
                    rows.into_iter()
                        .map(|r| Embedding::from_values(r).unwrap())
                        .collect()
                })
            })
        }

        fn bits(e: &Embedding) -> Vec<u64> {
            e.values().iter().map(|v| v.to_bits()).collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(192))]

            #[test]
            fn prop_permutation_invariance_is_exact(set in embedding_set(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                let mut shuffled = set.clone();
                shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                for strategy in REDUCTIONS {
                    let a = aggregate(strategy, &set).unwrap();
                    let b = aggregate(strategy, &shuffled).unwrap();
                    prop_assert_eq!(bits(&a), bits(&b), "{}", strategy);
                }
            }

            #[test]
            fn prop_constant_input_is_a_fixed_point(
                row in vec(-1.0e3..1.0e3f64, 1..8),
                n in 1usize..10,
            ) {
                let e = Embedding::from_values(row).unwrap();
                let set = vec![e.clone(); n];
                for strategy in REDUCTIONS {
                    let got = aggregate(strategy, &set).unwrap();
                    prop_assert_eq!(bits(&got), bits(&e), "{}", strategy);
                }
            }

            #[test]
            fn prop_order_statistic_chain_holds_exactly(set in embedding_set()) {
                let min = aggregate(AggregationStrategy::Min, &set).unwrap();
                let p25 = aggregate(AggregationStrategy::Percentile25, &set).unwrap();
                let med = aggregate(AggregationStrategy::Median, &set).unwrap();
                let p75 = aggregate(AggregationStrategy::Percentile75, &set).unwrap();
                let max = aggregate(AggregationStrategy::Max, &set).unwrap();
                let mean = aggregate(AggregationStrategy::Mean, &set).unwrap();
                for j in 0..min.dim() {
                    prop_assert!(min.values()[j] <= p25.values()[j]);
                    prop_assert!(p25.values()[j] <= med.values()[j]);
                    prop_assert!(med.values()[j] <= p75.values()[j]);
                    prop_assert!(p75.values()[j] <= max.values()[j]);
                    prop_assert!(mean.values()[j] >= min.values()[j]);
                    prop_assert!(mean.values()[j] <= max.values()[j]);
                }
            }

            #[test]
            fn prop_rolling_matches_batch_mean(set in embedding_set()) {
                let mut state = RollingMeanState::new();
                for e in &set {
                    state = state.updated(e).unwrap();
                }
                let batch = aggregate(AggregationStrategy::Mean, &set).unwrap();
                for (r, b) in state.mean().unwrap().values().iter().zip(batch.values()) {
                    let rel = (r - b).abs() / b.abs().max(1e-12);
                    prop_assert!(rel <= 1e-9, "{} vs {}", r, b);
                }
            }

            #[test]
            fn prop_best_per_comparison_lower_bounds_every_candidate(
                set in embedding_set(),
                probe_seed in any::<u64>(),
            ) {
                let dim = set[0].dim();
                let mut rng = ChaCha8Rng::seed_from_u64(probe_seed);
                let probe = Embedding::from_values(
                    (0..dim).map(|_| rng.random_range(-1.0e3..1.0e3)).collect(),
                ).unwrap();
                let (_, best) = best_template_per_comparison(&set, &probe).unwrap();
                for c in &set {
                    prop_assert!(best <= l2_distance(c, &probe).unwrap());
                }
            }
        }
    }
}
