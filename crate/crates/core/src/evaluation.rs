//! Strategy evaluation over per-person image galleries.
//!
//! Each person's gallery is split into a template pool (the first
//! `n_template` images, optionally narrowed by tags) and a test set (the
//! remainder). A strategy's *match* error is the mean L2 distance from the
//! person's template to their own test images; its *non-match* error is the
//! mean distance from the template to other persons' test images. Lower match
//! error and higher non-match error both help, so each is also expressed as a
//! factor relative to the single-image baseline.
//!
//! Persons are evaluated independently and may fan out across worker threads;
//! per-person results are reduced in dataset order, so reports are identical
//! regardless of worker count.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{aggregate, AggregationError, AggregationStrategy};
use crate::embedding::{l2_unchecked, Embedding, EmbeddingError};

/// Errors from splitting galleries and evaluating strategies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    /// The person does not have enough images to populate both sides of the
    /// split.
    #[error("person {person_id}: has {available} images, needs more than {n_template}")]
    TooFewImages {
        person_id: String,
        available: usize,
        n_template: usize,
    },
    /// The template tag filter left no usable template images.
    #[error("person {person_id}: tag filter removed every template image")]
    EmptyTemplateAfterFilter { person_id: String },
    /// The configured baseline index points past the eligible template images.
    #[error("person {person_id}: baseline index {index} out of range ({eligible} eligible template images)")]
    BaselineIndexOutOfRange {
        person_id: String,
        index: usize,
        eligible: usize,
    },
    /// Strategy comparison needs at least two persons for non-match probes.
    #[error("need at least 2 evaluable persons, got {0}")]
    InsufficientPersons(usize),
    /// A split spec must reserve at least one template image and point its
    /// baseline index inside the template pool.
    #[error("invalid split spec: {0}")]
    InvalidSplitSpec(String),
    /// No strategies were requested.
    #[error("no aggregation strategies requested")]
    NoStrategies,
    /// The probe set is empty.
    #[error("cannot average distances over an empty probe set")]
    EmptyInput,
    /// Factors are only defined for positive error values.
    #[error("factor undefined for non-positive error {0}")]
    NonPositiveInput(f64),
    /// Embeddings across the dataset must share one dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// A gallery contains no images.
    #[error("person {person_id}: gallery has no images")]
    EmptyGallery { person_id: String },
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// One enrolled or probed image: its embedding plus identifying metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GalleryImage {
    /// Name of the originating image file or frame; unique within a person.
    pub source_name: String,
    /// Free-form labels such as capture setting or expression.
    pub tags: BTreeSet<String>,
    pub embedding: Embedding,
}

/// All images of one person, in ingestion order.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonGallery {
    pub person_id: String,
    pub images: Vec<GalleryImage>,
}

/// How each gallery is divided into template pool and test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// The first `n_template` images form the template pool.
    pub n_template: usize,
    /// When set, only pool images carrying at least one of these tags are
    /// eligible as template images. Test images are never filtered.
    pub template_tag_filter: Option<BTreeSet<String>>,
    /// Index of the baseline image within the *eligible* template images.
    pub baseline_index: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            n_template: 10,
            template_tag_filter: None,
            baseline_index: 0,
        }
    }
}

impl SplitSpec {
    fn validate(&self) -> Result<(), EvaluationError> {
        if self.n_template == 0 {
            return Err(EvaluationError::InvalidSplitSpec(
                "n_template must be at least 1".into(),
            ));
        }
        if self.baseline_index >= self.n_template {
            return Err(EvaluationError::InvalidSplitSpec(format!(
                "baseline index {} must be below n_template {}",
                self.baseline_index, self.n_template
            )));
        }
        Ok(())
    }
}

/// Borrowed view of one person's split gallery.
#[derive(Debug)]
pub struct GallerySplit<'a> {
    /// Eligible template images (tag filter already applied), in order.
    pub template: Vec<&'a GalleryImage>,
    /// Everything after the template pool, unfiltered.
    pub test: Vec<&'a GalleryImage>,
    /// The baseline image; always one of `template`.
    pub baseline: &'a GalleryImage,
}

/// Keeps the images eligible as templates: those carrying at least one of
/// `tags`. Order is preserved.
pub fn filter_templates_by_tag<'a>(
    images: &[&'a GalleryImage],
    tags: &BTreeSet<String>,
) -> Vec<&'a GalleryImage> {
    images
        .iter()
        .filter(|img| img.tags.iter().any(|t| tags.contains(t)))
        .copied()
        .collect()
}

/// Splits a gallery into template pool and test set per `spec`.
///
/// The first `spec.n_template` images are the pool (narrowed by the tag
/// filter when present) and the rest are test images; a person must have
/// strictly more images than `n_template` to be evaluable.
pub fn split_gallery<'a>(
    gallery: &'a PersonGallery,
    spec: &SplitSpec,
) -> Result<GallerySplit<'a>, EvaluationError> {
    spec.validate()?;
    if gallery.images.len() <= spec.n_template {
        return Err(EvaluationError::TooFewImages {
            person_id: gallery.person_id.clone(),
            available: gallery.images.len(),
            n_template: spec.n_template,
        });
    }
    let pool: Vec<&GalleryImage> = gallery.images[..spec.n_template].iter().collect();
    let template = match &spec.template_tag_filter {
        Some(tags) => {
            let filtered = filter_templates_by_tag(&pool, tags);
            if filtered.is_empty() {
                return Err(EvaluationError::EmptyTemplateAfterFilter {
                    person_id: gallery.person_id.clone(),
                });
            }
            filtered
        }
        None => pool,
    };
    let baseline = *template.get(spec.baseline_index).ok_or_else(|| {
        EvaluationError::BaselineIndexOutOfRange {
            person_id: gallery.person_id.clone(),
            index: spec.baseline_index,
            eligible: template.len(),
        }
    })?;
    let test = gallery.images[spec.n_template..].iter().collect();
    Ok(GallerySplit {
        template,
        test,
        baseline,
    })
}

/// Mean L2 distance from a template to the same person's test embeddings.
pub fn match_error(template: &Embedding, test_embs: &[Embedding]) -> Result<f64, EvaluationError> {
    mean_distance(template, test_embs.iter())
}

/// Mean L2 distance from a template to *other* persons' test embeddings.
///
/// Computationally identical to [`match_error`]; the probe set differs. A
/// good strategy drives match error down without dragging non-match error
/// down with it.
pub fn nonmatch_error(
    template: &Embedding,
    other_test_embs: &[Embedding],
) -> Result<f64, EvaluationError> {
    mean_distance(template, other_test_embs.iter())
}

fn mean_distance<'a, I>(template: &Embedding, probes: I) -> Result<f64, EvaluationError>
where
    I: Iterator<Item = &'a Embedding>,
{
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for probe in probes {
        if probe.dim() != template.dim() {
            return Err(EvaluationError::DimensionMismatch {
                expected: template.dim(),
                actual: probe.dim(),
            });
        }
        sum += l2_unchecked(template.values(), probe.values());
        count += 1;
    }
    if count == 0 {
        return Err(EvaluationError::EmptyInput);
    }
    Ok(sum / count as f64)
}

/// Ratio of baseline error to strategy error: above 1.0 means the strategy
/// beats the single-image baseline.
pub fn factor_vs_baseline(baseline_err: f64, strategy_err: f64) -> Result<f64, EvaluationError> {
    if !(baseline_err.is_finite() && baseline_err > 0.0) {
        return Err(EvaluationError::NonPositiveInput(baseline_err));
    }
    if !(strategy_err.is_finite() && strategy_err > 0.0) {
        return Err(EvaluationError::NonPositiveInput(strategy_err));
    }
    Ok(baseline_err / strategy_err)
}

/// How non-match probes are drawn for each person.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonmatchSampling {
    /// Full cross-product up to [`AUTO_FULL_PERSON_LIMIT`] persons, sampled
    /// above it.
    Auto,
    /// Every template is compared against every other person's test images.
    Full,
    /// Per person, a seeded sample of this many probes from the union of the
    /// other persons' test images.
    SampledPerPerson { probes_per_person: usize },
}

/// Largest person count for which [`NonmatchSampling::Auto`] stays exhaustive.
pub const AUTO_FULL_PERSON_LIMIT: usize = 500;

/// Probes drawn per person when `Auto` falls back to sampling.
pub const AUTO_SAMPLED_PROBES: usize = 200;

/// Everything [`evaluate_strategies`] needs besides the galleries.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    /// Name recorded in the report (usually the dataset name from its
    /// manifest).
    pub dataset_name: String,
    /// Strategies to report on; deduplicated and reordered canonically.
    pub strategies: Vec<AggregationStrategy>,
    pub split: SplitSpec,
    pub sampling: NonmatchSampling,
    /// Governs all sampling; irrelevant under full cross-product but still
    /// recorded.
    pub seed: u64,
}

impl EvaluationConfig {
    /// All strategies, default split, automatic sampling.
    pub fn new(dataset_name: impl Into<String>) -> Self {
        Self {
            dataset_name: dataset_name.into(),
            strategies: AggregationStrategy::ALL.to_vec(),
            split: SplitSpec::default(),
            sampling: NonmatchSampling::Auto,
            seed: 42,
        }
    }
}

/// Match / non-match result for one strategy, averaged over persons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: AggregationStrategy,
    /// True for strategies that peek at test data.
    pub oracle: bool,
    pub match_distance: f64,
    pub nonmatch_distance: f64,
    /// `baseline_error / strategy_error`; `None` when either error is zero.
    pub match_factor: Option<f64>,
    pub nonmatch_factor: Option<f64>,
}

/// A person left out of the evaluation, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPerson {
    pub person_id: String,
    pub reason: String,
}

/// Non-match sampling actually used, after resolving `Auto`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ResolvedSampling {
    Full,
    SampledPerPerson { probes_per_person: usize, seed: u64 },
}

/// Provenance and bookkeeping attached to every evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub dataset_name: String,
    pub dim: usize,
    pub persons_evaluated: usize,
    pub persons_skipped: Vec<SkippedPerson>,
    pub split: SplitSpec,
    pub sampling: ResolvedSampling,
    /// How per-person errors are combined into the reported figure.
    pub averaging: String,
}

/// Side-by-side comparison of aggregation strategies on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<StrategyRow>,
}

/// Per-person intermediate: one (match, non-match) pair per strategy slot.
struct PersonOutcome {
    per_strategy: Vec<(f64, f64)>,
    baseline: (f64, f64),
}

/// Evaluates the requested strategies over all galleries.
///
/// Persons that cannot be split (too few images, or a tag filter that empties
/// their template pool) are skipped and listed in the report metadata; at
/// least two persons must survive. The baseline is always computed internally
/// so every row carries factors, whether or not `Baseline` itself was
/// requested. Averaging is per person first, then across persons, and the
/// whole computation is deterministic for a fixed (dataset, config) pair.
pub fn evaluate_strategies(
    galleries: &[PersonGallery],
    config: &EvaluationConfig,
) -> Result<EvaluationReport, EvaluationError> {
    config.split.validate()?;
    let strategies = canonical_strategies(&config.strategies)?;
    let dim = uniform_dataset_dim(galleries)?;

    // Split every gallery up front; skips are recorded, real errors surface.
    let mut splits: Vec<(usize, GallerySplit)> = Vec::new();
    let mut skipped = Vec::new();
    for (idx, gallery) in galleries.iter().enumerate() {
        match split_gallery(gallery, &config.split) {
            Ok(split) => splits.push((idx, split)),
            Err(
                err @ (EvaluationError::TooFewImages { .. }
                | EvaluationError::EmptyTemplateAfterFilter { .. }
                | EvaluationError::BaselineIndexOutOfRange { .. }),
            ) => skipped.push(SkippedPerson {
                person_id: gallery.person_id.clone(),
                reason: err.to_string(),
            }),
            Err(other) => return Err(other),
        }
    }
    if splits.len() < 2 {
        return Err(EvaluationError::InsufficientPersons(splits.len()));
    }

    let sampling = resolve_sampling(config.sampling, splits.len(), config.seed);

    // Per-person evaluation fans out; the collect preserves dataset order, so
    // the sequential reduction below is independent of worker count.
    let outcomes: Vec<Result<PersonOutcome, EvaluationError>> = splits
        .par_iter()
        .enumerate()
        .map(|(pos, (idx, split))| {
            let probes = nonmatch_probes(&splits, pos, &sampling, &galleries[*idx].person_id);
            evaluate_person(split, &probes, &strategies)
        })
        .collect();

    let mut per_strategy_sums = vec![(0.0f64, 0.0f64); strategies.len()];
    let mut baseline_sum = (0.0f64, 0.0f64);
    for outcome in outcomes {
        let outcome = outcome?;
        for (sum, value) in per_strategy_sums.iter_mut().zip(&outcome.per_strategy) {
            sum.0 += value.0;
            sum.1 += value.1;
        }
        baseline_sum.0 += outcome.baseline.0;
        baseline_sum.1 += outcome.baseline.1;
    }
    let n = splits.len() as f64;
    let baseline = (baseline_sum.0 / n, baseline_sum.1 / n);

    let rows = strategies
        .iter()
        .zip(&per_strategy_sums)
        .map(|(&strategy, &(match_sum, nonmatch_sum))| {
            let match_distance = match_sum / n;
            let nonmatch_distance = nonmatch_sum / n;
            let (match_factor, nonmatch_factor) = if strategy == AggregationStrategy::Baseline {
                (Some(1.0), Some(1.0))
            } else {
                (
                    factor_vs_baseline(baseline.0, match_distance).ok(),
                    factor_vs_baseline(baseline.1, nonmatch_distance).ok(),
                )
            };
            StrategyRow {
                strategy,
                oracle: strategy.is_oracle(),
                match_distance,
                nonmatch_distance,
                match_factor,
                nonmatch_factor,
            }
        })
        .collect();

    Ok(EvaluationReport {
        metadata: ReportMetadata {
            dataset_name: config.dataset_name.clone(),
            dim,
            persons_evaluated: splits.len(),
            persons_skipped: skipped,
            split: config.split.clone(),
            sampling,
            averaging: "per-person mean distance, then mean across persons".into(),
        },
        rows,
    })
}

/// Deduplicates and orders the requested strategies canonically.
fn canonical_strategies(
    requested: &[AggregationStrategy],
) -> Result<Vec<AggregationStrategy>, EvaluationError> {
    if requested.is_empty() {
        return Err(EvaluationError::NoStrategies);
    }
    Ok(AggregationStrategy::ALL
        .into_iter()
        .filter(|s| requested.contains(s))
        .collect())
}

fn uniform_dataset_dim(galleries: &[PersonGallery]) -> Result<usize, EvaluationError> {
    let mut dim = None;
    for gallery in galleries {
        if gallery.images.is_empty() {
            return Err(EvaluationError::EmptyGallery {
                person_id: gallery.person_id.clone(),
            });
        }
        for image in &gallery.images {
            match dim {
                None => dim = Some(image.embedding.dim()),
                Some(d) if d != image.embedding.dim() => {
                    return Err(EvaluationError::DimensionMismatch {
                        expected: d,
                        actual: image.embedding.dim(),
                    });
                }
                _ => {}
            }
        }
    }
    dim.ok_or(EvaluationError::InsufficientPersons(0))
}

fn resolve_sampling(sampling: NonmatchSampling, persons: usize, seed: u64) -> ResolvedSampling {
    match sampling {
        NonmatchSampling::Full => ResolvedSampling::Full,
        NonmatchSampling::SampledPerPerson { probes_per_person } => {
            ResolvedSampling::SampledPerPerson {
                probes_per_person,
                seed,
            }
        }
        NonmatchSampling::Auto => {
            if persons <= AUTO_FULL_PERSON_LIMIT {
                ResolvedSampling::Full
            } else {
                ResolvedSampling::SampledPerPerson {
                    probes_per_person: AUTO_SAMPLED_PROBES,
                    seed,
                }
            }
        }
    }
}

/// FNV-1a over the person id, folded into the global seed, so each person's
/// probe sample is fixed no matter how work is scheduled.
fn person_sub_seed(seed: u64, person_id: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in person_id.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    seed ^ hash
}

/// The non-match probe set for the person at `pos`: all other persons' test
/// embeddings, either in full or as a seeded per-person sample (order-stable:
/// sampled indices are sorted back into dataset order).
fn nonmatch_probes<'a>(
    splits: &'a [(usize, GallerySplit)],
    pos: usize,
    sampling: &ResolvedSampling,
    person_id: &str,
) -> Vec<&'a Embedding> {
    let universe: Vec<&Embedding> = splits
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos)
        .flat_map(|(_, (_, split))| split.test.iter().map(|img| &img.embedding))
        .collect();
    match sampling {
        ResolvedSampling::Full => universe,
        ResolvedSampling::SampledPerPerson {
            probes_per_person,
            seed,
        } => {
            if *probes_per_person >= universe.len() {
                return universe;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(person_sub_seed(*seed, person_id));
            let mut chosen =
                rand::seq::index::sample(&mut rng, universe.len(), *probes_per_person)
                    .into_vec();
            chosen.sort_unstable();
            chosen.into_iter().map(|i| universe[i]).collect()
        }
    }
}

/// Match / non-match means for every strategy, for one person.
fn evaluate_person(
    split: &GallerySplit,
    probes: &[&Embedding],
    strategies: &[AggregationStrategy],
) -> Result<PersonOutcome, EvaluationError> {
    let template_embs: Vec<Embedding> = split
        .template
        .iter()
        .map(|img| img.embedding.clone())
        .collect();
    let test_embs: Vec<Embedding> = split.test.iter().map(|img| img.embedding.clone()).collect();

    let score =
        |template: &Embedding| -> Result<(f64, f64), EvaluationError> {
            Ok((
                mean_distance(template, test_embs.iter())?,
                mean_distance(template, probes.iter().copied())?,
            ))
        };
    let baseline = score(&split.baseline.embedding)?;

    let mut per_strategy = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let outcome = match strategy {
            AggregationStrategy::Baseline => baseline,
            AggregationStrategy::Optimal => score(&optimal_of(&test_embs)?)?,
            AggregationStrategy::BestPerComparison => (
                best_per_comparison_mean(&template_embs, test_embs.iter())?,
                best_per_comparison_mean(&template_embs, probes.iter().copied())?,
            ),
            reduction => score(&aggregate(reduction, &template_embs)?)?,
        };
        per_strategy.push(outcome);
    }
    Ok(PersonOutcome {
        per_strategy,
        baseline,
    })
}

fn optimal_of(test_embs: &[Embedding]) -> Result<Embedding, EvaluationError> {
    Ok(crate::aggregation::optimal_template(test_embs)?)
}

/// Mean over probes of the distance to each probe's *closest* template image.
fn best_per_comparison_mean<'a, I>(
    template_embs: &[Embedding],
    probes: I,
) -> Result<f64, EvaluationError>
where
    I: Iterator<Item = &'a Embedding>,
{
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for probe in probes {
        let (_, dist) = crate::aggregation::best_template_per_comparison(template_embs, probe)?;
        sum += dist;
        count += 1;
    }
    if count == 0 {
        return Err(EvaluationError::EmptyInput);
    }
    Ok(sum / count as f64)
}
