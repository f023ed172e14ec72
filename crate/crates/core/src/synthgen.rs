//! Deterministic synthetic embedding datasets with known ground truth.
//!
//! Each person is a latent center on a sphere; each image is that center plus
//! independent zero-mean Gaussian noise per coordinate. Because the mean of
//! the noise vanishes, averaging more images pulls the template toward the
//! center — the synthetic counterpart of what aggregation does on real
//! embeddings, and a ground truth tests can check templates against.
//!
//! Determinism is structural: every random draw comes from a ChaCha8 stream
//! keyed by `(seed, domain, person, image)`, so any image can be regenerated
//! in isolation and the dataset is identical no matter how generation is
//! ordered or parallelized. Gaussians come from a fixed Box–Muller transform
//! over that stream, not from a distribution library whose internals may
//! change between releases.
//!
//! The optional semantic-variation mode splits each person's images into a
//! few sub-clusters (think: distinct poses or accessories) by adding a
//! per-cluster offset. That gives greedy selection structure to exploit —
//! its best moves are one image from each sub-cluster.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;
use crate::evaluation::{GalleryImage, PersonGallery};

/// Errors from dataset generation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Sub-cluster structure for the semantic-variation mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticVariation {
    /// Number of sub-clusters per person; images are assigned round-robin.
    pub clusters: usize,
    /// Per-coordinate scale of each sub-cluster's offset from the center.
    pub offset_scale: f64,
}

/// Parameters of a synthetic dataset. Output is fully determined by this
/// struct — same spec, same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_persons: usize,
    pub images_per_person: usize,
    pub dim: usize,
    /// Radius of the sphere the latent person centers are drawn on.
    pub center_scale: f64,
    /// Standard deviation of the per-coordinate image noise.
    pub intra_noise: f64,
    pub seed: u64,
    pub semantic: Option<SemanticVariation>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_persons: 50,
            images_per_person: 30,
            dim: 64,
            center_scale: 1.0,
            intra_noise: 0.05,
            seed: 42,
            semantic: None,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_persons == 0 {
            return Err(SynthError::InvalidSpec("n_persons must be at least 1".into()));
        }
        if self.images_per_person == 0 {
            return Err(SynthError::InvalidSpec(
                "images_per_person must be at least 1".into(),
            ));
        }
        if self.dim == 0 {
            return Err(SynthError::InvalidSpec("dim must be at least 1".into()));
        }
        if !(self.center_scale.is_finite() && self.center_scale > 0.0) {
            return Err(SynthError::InvalidSpec(format!(
                "center_scale must be finite and positive, got {}",
                self.center_scale
            )));
        }
        if !(self.intra_noise.is_finite() && self.intra_noise >= 0.0) {
            return Err(SynthError::InvalidSpec(format!(
                "intra_noise must be finite and non-negative, got {}",
                self.intra_noise
            )));
        }
        if let Some(semantic) = &self.semantic {
            if semantic.clusters == 0 {
                return Err(SynthError::InvalidSpec(
                    "semantic clusters must be at least 1".into(),
                ));
            }
            if !(semantic.offset_scale.is_finite() && semantic.offset_scale >= 0.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "semantic offset_scale must be finite and non-negative, got {}",
                    semantic.offset_scale
                )));
            }
        }
        Ok(())
    }
}

/// A generated dataset plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub galleries: Vec<PersonGallery>,
    /// True latent center of each person, index-aligned with `galleries`.
    /// For assertions and experiments only — never written to disk.
    pub centers: Vec<Embedding>,
}

// Independent RNG stream domains; each (domain, a, b) pair under one seed is
// a separate ChaCha8 key.
const DOMAIN_CENTER: u64 = 0;
const DOMAIN_IMAGE_NOISE: u64 = 1;
const DOMAIN_CLUSTER_OFFSET: u64 = 2;

/// One ChaCha8 stream per (seed, domain, a, b); the 32-byte key is the four
/// words in little-endian order.
fn stream_rng(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform in [0, 1) from the top 53 bits of one u64 draw.
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via the Box–Muller transform.
///
/// Consumes exactly two u64 draws and uses only the cosine branch, keeping
/// the mapping from stream position to output trivially fixed.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - uniform01(rng); // (0, 1]: safe for ln
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn normal_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| standard_normal(rng)).collect()
}

/// Generates the dataset described by `spec`.
///
/// Persons are `p0000`, `p0001`, …; image source names are
/// `<person>_img<index>`. In semantic mode every image is tagged with its
/// sub-cluster (`cluster:<c>`). Calling this twice with the same spec yields
/// bit-identical embeddings.
pub fn generate_dataset(spec: &SynthSpec) -> Result<SyntheticDataset, SynthError> {
    spec.validate()?;
    let mut galleries = Vec::with_capacity(spec.n_persons);
    let mut centers = Vec::with_capacity(spec.n_persons);

    for p in 0..spec.n_persons {
        let person_id = format!("p{p:04}");
        let center = draw_center(spec, p as u64)?;

        let cluster_offsets: Vec<Vec<f64>> = match &spec.semantic {
            Some(semantic) => (0..semantic.clusters)
                .map(|c| {
                    let mut rng =
                        stream_rng(spec.seed, DOMAIN_CLUSTER_OFFSET, p as u64, c as u64);
                    normal_vec(&mut rng, spec.dim)
                        .into_iter()
                        .map(|z| semantic.offset_scale * z)
                        .collect()
                })
                .collect(),
            None => Vec::new(),
        };

        let mut images = Vec::with_capacity(spec.images_per_person);
        for i in 0..spec.images_per_person {
            let mut rng = stream_rng(spec.seed, DOMAIN_IMAGE_NOISE, p as u64, i as u64);
            let mut values = Vec::with_capacity(spec.dim);
            let cluster = spec.semantic.as_ref().map(|s| i % s.clusters);
            for (j, &c_val) in center.values().iter().enumerate() {
                let mut v = c_val + spec.intra_noise * standard_normal(&mut rng);
                if let Some(c) = cluster {
                    v += cluster_offsets[c][j];
                }
                values.push(v);
            }
            let mut tags = BTreeSet::new();
            if let Some(c) = cluster {
                tags.insert(format!("cluster:{c}"));
            }
            images.push(GalleryImage {
                source_name: format!("{person_id}_img{i:04}"),
                tags,
                embedding: Embedding::from_values_unchecked(values),
            });
        }
        galleries.push(PersonGallery { person_id, images });
        centers.push(center);
    }
    Ok(SyntheticDataset { galleries, centers })
}

/// Person center: an isotropic Gaussian draw scaled onto the sphere of
/// radius `center_scale`.
fn draw_center(spec: &SynthSpec, person: u64) -> Result<Embedding, SynthError> {
    let mut rng = stream_rng(spec.seed, DOMAIN_CENTER, person, 0);
    let raw = normal_vec(&mut rng, spec.dim);
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        // Unreachable in practice for a Gaussian draw; fail loudly anyway.
        return Err(SynthError::InvalidSpec(format!(
            "degenerate zero-norm center for person {person}"
        )));
    }
    let scale = spec.center_scale / norm;
    Ok(Embedding::from_values_unchecked(
        raw.into_iter().map(|v| v * scale).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate, AggregationStrategy};
    use crate::embedding::l2_distance;
    use crate::evaluation::match_error;

    #[test]
    fn test_generation_shape_and_naming() {
        let spec = SynthSpec {
            n_persons: 3,
            images_per_person: 5,
            dim: 8,
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        assert_eq!(dataset.galleries.len(), 3);
        assert_eq!(dataset.centers.len(), 3);
        assert_eq!(dataset.galleries[1].person_id, "p0001");
        assert_eq!(dataset.galleries[1].images.len(), 5);
        assert_eq!(dataset.galleries[1].images[2].source_name, "p0001_img0002");
        assert!(dataset.galleries[1].images[2].tags.is_empty());
        assert_eq!(dataset.galleries[2].images[0].embedding.dim(), 8);
    }

    #[test]
    fn test_same_spec_generates_identical_datasets() {
        let spec = SynthSpec {
            n_persons: 4,
            images_per_person: 6,
            dim: 16,
            semantic: Some(SemanticVariation {
                clusters: 2,
                offset_scale: 0.1,
            }),
            ..SynthSpec::default()
        };
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        for (ga, gb) in a.galleries.iter().zip(&b.galleries) {
            for (ia, ib) in ga.images.iter().zip(&gb.images) {
                let bits_a: Vec<u64> =
                    ia.embedding.values().iter().map(|v| v.to_bits()).collect();
                let bits_b: Vec<u64> =
                    ib.embedding.values().iter().map(|v| v.to_bits()).collect();
                assert_eq!(bits_a, bits_b);
            }
        }
        let c = generate_dataset(&SynthSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(
            a.galleries[0].images[0].embedding.values(),
            c.galleries[0].images[0].embedding.values()
        );
    }

    #[test]
    fn test_zero_noise_collapses_every_image_onto_the_center() {
        let spec = SynthSpec {
            n_persons: 2,
            images_per_person: 8,
            dim: 12,
            intra_noise: 0.0,
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        for (gallery, center) in dataset.galleries.iter().zip(&dataset.centers) {
            for image in &gallery.images {
                assert_eq!(l2_distance(&image.embedding, center).unwrap(), 0.0);
            }
            // Every reduction of identical images is the center, and match
            // error against further identical images is exactly zero.
            let embs: Vec<Embedding> = gallery
                .images
                .iter()
                .map(|i| i.embedding.clone())
                .collect();
            for strategy in AggregationStrategy::ALL {
                if !strategy.is_reduction() {
                    continue;
                }
                let template = aggregate(strategy, &embs).unwrap();
                assert_eq!(l2_distance(&template, center).unwrap(), 0.0, "{strategy}");
                assert_eq!(match_error(&template, &embs).unwrap(), 0.0, "{strategy}");
            }
        }
    }

    #[test]
    fn test_centers_lie_on_the_requested_sphere() {
        let spec = SynthSpec {
            n_persons: 10,
            images_per_person: 1,
            dim: 32,
            center_scale: 2.5,
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        for center in &dataset.centers {
            let norm = center.values().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 2.5).abs() <= 1e-12 * 2.5);
        }
    }

    #[test]
    fn test_mean_template_converges_to_center_with_many_images() {
        // Law of large numbers: with 200 images the mean template lands well
        // inside intra_noise * sqrt(dim) / 10 of the true center.
        let spec = SynthSpec {
            n_persons: 5,
            images_per_person: 200,
            dim: 64,
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        let bound = spec.intra_noise * (spec.dim as f64).sqrt() / 10.0;
        for (gallery, center) in dataset.galleries.iter().zip(&dataset.centers) {
            let embs: Vec<Embedding> = gallery
                .images
                .iter()
                .map(|i| i.embedding.clone())
                .collect();
            let template = aggregate(AggregationStrategy::Mean, &embs).unwrap();
            let dist = l2_distance(&template, center).unwrap();
            assert!(dist < bound, "{}: {dist} >= {bound}", gallery.person_id);
        }
    }

    #[test]
    fn test_semantic_mode_tags_images_with_their_cluster() {
        let spec = SynthSpec {
            n_persons: 1,
            images_per_person: 7,
            dim: 8,
            semantic: Some(SemanticVariation {
                clusters: 3,
                offset_scale: 0.2,
            }),
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        let gallery = &dataset.galleries[0];
        for (i, image) in gallery.images.iter().enumerate() {
            let want = format!("cluster:{}", i % 3);
            assert!(image.tags.contains(&want), "image {i} missing {want}");
        }
        // Images of the same cluster sit closer together than images of
        // different clusters (offsets dominate the intra noise).
        let d_same = l2_distance(
            &gallery.images[0].embedding,
            &gallery.images[3].embedding,
        )
        .unwrap();
        let d_cross = l2_distance(
            &gallery.images[0].embedding,
            &gallery.images[1].embedding,
        )
        .unwrap();
        assert!(d_same < d_cross);
    }

    #[test]
    fn test_invalid_specs_are_rejected() {
        for spec in [
            SynthSpec { n_persons: 0, ..SynthSpec::default() },
            SynthSpec { images_per_person: 0, ..SynthSpec::default() },
            SynthSpec { dim: 0, ..SynthSpec::default() },
            SynthSpec { center_scale: 0.0, ..SynthSpec::default() },
            SynthSpec { center_scale: f64::NAN, ..SynthSpec::default() },
            SynthSpec { intra_noise: -0.1, ..SynthSpec::default() },
            SynthSpec {
                semantic: Some(SemanticVariation { clusters: 0, offset_scale: 0.1 }),
                ..SynthSpec::default()
            },
        ] {
            assert!(matches!(
                generate_dataset(&spec),
                Err(SynthError::InvalidSpec(_))
            ));
        }
    }

    #[test]
    fn test_noise_scale_is_plausible() {
        // Mean distance between two images of one person should be near
        // sqrt(2 * dim) * intra_noise; a loose sanity window is enough.
        let spec = SynthSpec {
            n_persons: 3,
            images_per_person: 40,
            ..SynthSpec::default()
        };
        let dataset = generate_dataset(&spec).unwrap();
        let expected = (2.0 * spec.dim as f64).sqrt() * spec.intra_noise;
        for gallery in &dataset.galleries {
            let mut sum = 0.0;
            let mut count = 0;
            for pair in gallery.images.windows(2) {
                sum += l2_distance(&pair[0].embedding, &pair[1].embedding).unwrap();
                count += 1;
            }
            let mean = sum / count as f64;
            assert!(mean > expected * 0.7 && mean < expected * 1.3);
        }
    }
}
