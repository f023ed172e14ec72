//! Dataset persistence: JSON manifest + binary f32 matrix, and delimited
//! text import/export.
//!
//! The manifest is versioned, human-readable JSON describing persons, image
//! metadata, and where each image's embedding lives as a row of the matrix
//! file. The matrix itself is headerless little-endian `f32`, row-major —
//! trivially readable from any language. Values are widened to `f64` on load;
//! all computation happens in `f64` and narrowing back to `f32` happens only
//! on save. Writes are atomic (temp file + rename), so a crash cannot leave a
//! half-written dataset behind.
//!
//! The delimited format is for exchanging embeddings with other tooling: one
//! row per image — `person_id`, `source_name`, a (possibly empty)
//! `;`-separated tags cell, then the embedding values.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;
use crate::evaluation::{GalleryImage, PersonGallery};
use crate::io::sha256_hex;

/// Manifest schema version this build reads and writes.
pub const FORMAT_VERSION: u32 = 1;

/// File names used inside a dataset directory.
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MATRIX_FILE: &str = "embeddings.f32le";

/// The only matrix encoding currently defined.
pub const MATRIX_DTYPE: &str = "f32le";

/// Errors from reading, writing, and converting datasets.
#[derive(Debug, Error)]
pub enum DatasetIoError {
    /// The manifest is not valid JSON or is internally inconsistent.
    #[error("manifest parse error: {0}")]
    ManifestParseError(String),
    /// The manifest came from a newer (or unknown) toolkit.
    #[error("unsupported format version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedFormatVersion(u32),
    /// The matrix file size disagrees with the manifest.
    #[error("matrix size mismatch: manifest implies {expected} bytes, file has {actual}")]
    MatrixSizeMismatch { expected: u64, actual: u64 },
    /// A stored value decoded to NaN or infinity.
    #[error("non-finite value in {person_id}/{source_name} at dimension {index}")]
    NonFiniteValue {
        person_id: String,
        source_name: String,
        index: usize,
    },
    /// Source names must be unique within a person.
    #[error("duplicate source name '{source_name}' for person {person_id}")]
    DuplicateSourceName {
        person_id: String,
        source_name: String,
    },
    /// Nothing to save.
    #[error("nothing to save: {0}")]
    EmptyInput(String),
    /// Embeddings in one dataset must share a dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// A delimited row could not be interpreted.
    #[error("delimited input line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Reference to the binary matrix holding the embedding rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRef {
    /// Path relative to the manifest's directory.
    pub file: String,
    /// Value encoding; always little-endian f32 in this version.
    pub dtype: String,
    pub rows: usize,
}

/// One image entry: metadata plus its row in the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub source_name: String,
    pub row: usize,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPerson {
    pub person_id: String,
    pub images: Vec<ManifestImage>,
}

/// The dataset manifest as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub dataset_name: String,
    pub dim: usize,
    pub matrix: MatrixRef,
    pub persons: Vec<ManifestPerson>,
}

/// A dataset loaded into memory, with input fingerprints for provenance.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub galleries: Vec<PersonGallery>,
    pub manifest_path: PathBuf,
    pub manifest_sha256: String,
    pub matrix_sha256: String,
}

/// Writes `bytes` to `dir/name` atomically (temp file, then rename).
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, DatasetIoError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| DatasetIoError::Io(e.error))?;
    Ok(path)
}

/// Saves galleries as `manifest.json` + `embeddings.f32le` under `dir`.
///
/// Values are narrowed to `f32`; loading them back yields exactly the same
/// 32-bit values. Returns the manifest path. The directory is created if
/// missing; both files are written atomically.
pub fn save_dataset(
    galleries: &[PersonGallery],
    dataset_name: &str,
    dir: &Path,
) -> Result<PathBuf, DatasetIoError> {
    if galleries.is_empty() {
        return Err(DatasetIoError::EmptyInput("dataset has no persons".into()));
    }
    let mut dim = None;
    for gallery in galleries {
        if gallery.images.is_empty() {
            return Err(DatasetIoError::EmptyInput(format!(
                "person {} has no images",
                gallery.person_id
            )));
        }
        let mut seen = BTreeSet::new();
        for image in &gallery.images {
            if !seen.insert(image.source_name.as_str()) {
                return Err(DatasetIoError::DuplicateSourceName {
                    person_id: gallery.person_id.clone(),
                    source_name: image.source_name.clone(),
                });
            }
            match dim {
                None => dim = Some(image.embedding.dim()),
                Some(d) if d != image.embedding.dim() => {
                    return Err(DatasetIoError::DimensionMismatch {
                        expected: d,
                        actual: image.embedding.dim(),
                    });
                }
                _ => {}
            }
        }
    }
    let dim = dim.expect("non-empty galleries have a dimension");

    let mut matrix = Vec::new();
    let mut persons = Vec::with_capacity(galleries.len());
    let mut row = 0usize;
    for gallery in galleries {
        let mut images = Vec::with_capacity(gallery.images.len());
        for image in &gallery.images {
            for value in image.embedding.values() {
                matrix.extend_from_slice(&(*value as f32).to_le_bytes());
            }
            images.push(ManifestImage {
                source_name: image.source_name.clone(),
                row,
                tags: image.tags.iter().cloned().collect(),
            });
            row += 1;
        }
        persons.push(ManifestPerson {
            person_id: gallery.person_id.clone(),
            images,
        });
    }

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        dataset_name: dataset_name.to_string(),
        dim,
        matrix: MatrixRef {
            file: MATRIX_FILE.to_string(),
            dtype: MATRIX_DTYPE.to_string(),
            rows: row,
        },
        persons,
    };

    fs::create_dir_all(dir)?;
    write_atomic(dir, MATRIX_FILE, &matrix)?;
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| DatasetIoError::ManifestParseError(e.to_string()))?;
    manifest_bytes.push(b'\n');
    write_atomic(dir, MANIFEST_FILE, &manifest_bytes)
}

/// Loads a dataset from its manifest path.
///
/// Checks the format version, the matrix size, row bounds/uniqueness, and
/// that every stored value is finite. Stored `f32` values are widened to
/// `f64` exactly.
pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset, DatasetIoError> {
    let manifest_bytes = fs::read(manifest_path)?;
    let manifest: DatasetManifest = serde_json::from_slice(&manifest_bytes)
        .map_err(|e| DatasetIoError::ManifestParseError(e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(DatasetIoError::UnsupportedFormatVersion(
            manifest.format_version,
        ));
    }
    if manifest.matrix.dtype != MATRIX_DTYPE {
        return Err(DatasetIoError::ManifestParseError(format!(
            "unsupported matrix dtype '{}' (this build reads {MATRIX_DTYPE})",
            manifest.matrix.dtype
        )));
    }
    if manifest.dim == 0 {
        return Err(DatasetIoError::ManifestParseError(
            "dim must be at least 1".into(),
        ));
    }

    let matrix_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.matrix.file);
    let matrix_bytes = fs::read(&matrix_path)?;
    let expected = manifest.matrix.rows as u64 * manifest.dim as u64 * 4;
    if matrix_bytes.len() as u64 != expected {
        return Err(DatasetIoError::MatrixSizeMismatch {
            expected,
            actual: matrix_bytes.len() as u64,
        });
    }

    let mut seen_rows = vec![false; manifest.matrix.rows];
    let mut galleries = Vec::with_capacity(manifest.persons.len());
    for person in &manifest.persons {
        let mut seen_names = BTreeSet::new();
        let mut images = Vec::with_capacity(person.images.len());
        for entry in &person.images {
            if !seen_names.insert(entry.source_name.as_str()) {
                return Err(DatasetIoError::DuplicateSourceName {
                    person_id: person.person_id.clone(),
                    source_name: entry.source_name.clone(),
                });
            }
            if entry.row >= manifest.matrix.rows {
                return Err(DatasetIoError::ManifestParseError(format!(
                    "row {} of {}/{} is out of bounds ({} rows)",
                    entry.row, person.person_id, entry.source_name, manifest.matrix.rows
                )));
            }
            if seen_rows[entry.row] {
                return Err(DatasetIoError::ManifestParseError(format!(
                    "matrix row {} referenced more than once",
                    entry.row
                )));
            }
            seen_rows[entry.row] = true;

            let offset = entry.row * manifest.dim * 4;
            let mut values = Vec::with_capacity(manifest.dim);
            for j in 0..manifest.dim {
                let start = offset + j * 4;
                let raw: [u8; 4] = matrix_bytes[start..start + 4].try_into().unwrap();
                let value = f32::from_le_bytes(raw) as f64;
                if !value.is_finite() {
                    return Err(DatasetIoError::NonFiniteValue {
                        person_id: person.person_id.clone(),
                        source_name: entry.source_name.clone(),
                        index: j,
                    });
                }
                values.push(value);
            }
            images.push(GalleryImage {
                source_name: entry.source_name.clone(),
                tags: entry.tags.iter().cloned().collect(),
                embedding: Embedding::from_values_unchecked(values),
            });
        }
        galleries.push(PersonGallery {
            person_id: person.person_id.clone(),
            images,
        });
    }

    Ok(LoadedDataset {
        manifest,
        galleries,
        manifest_path: manifest_path.to_path_buf(),
        manifest_sha256: sha256_hex(&manifest_bytes),
        matrix_sha256: sha256_hex(&matrix_bytes),
    })
}

/// Whether the third delimited column holds tags or the first value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TagsColumn {
    /// Tags when the first data row's third field does not parse as a number.
    #[default]
    Auto,
    Yes,
    No,
}

impl std::str::FromStr for TagsColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(TagsColumn::Auto),
            "yes" => Ok(TagsColumn::Yes),
            "no" => Ok(TagsColumn::No),
            other => Err(format!("expected auto, yes, or no; got '{other}'")),
        }
    }
}

/// Separator between tags inside the delimited tags cell.
pub const TAG_SEPARATOR: char = ';';

/// Reads galleries from delimited text (no header row).
///
/// Row layout: `person_id`, `source_name`, optionally a tags cell (tags
/// joined by `;`), then the embedding values. Rows are grouped by person in
/// first-appearance order; the embedding dimension is taken from the first
/// row and enforced on the rest.
pub fn import_delimited(
    path: &Path,
    delimiter: u8,
    tags_column: TagsColumn,
) -> Result<Vec<PersonGallery>, DatasetIoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)?;

    let mut order: Vec<String> = Vec::new();
    let mut galleries: std::collections::BTreeMap<String, PersonGallery> =
        std::collections::BTreeMap::new();
    let mut has_tags: Option<bool> = match tags_column {
        TagsColumn::Auto => None,
        TagsColumn::Yes => Some(true),
        TagsColumn::No => Some(false),
    };
    let mut dim: Option<usize> = None;

    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let record = record.map_err(|e| DatasetIoError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if record.len() < 3 {
            return Err(DatasetIoError::MalformedRow {
                line,
                reason: format!("need at least 3 columns, got {}", record.len()),
            });
        }
        let person_id = record[0].to_string();
        let source_name = record[1].to_string();
        let tags_present = *has_tags
            .get_or_insert_with(|| record[2].trim().parse::<f64>().is_err());
        let value_start = if tags_present { 3 } else { 2 };
        let tags: BTreeSet<String> = if tags_present {
            record[2]
                .split(TAG_SEPARATOR)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        } else {
            BTreeSet::new()
        };
        if record.len() <= value_start {
            return Err(DatasetIoError::MalformedRow {
                line,
                reason: "row has no embedding values".into(),
            });
        }
        let mut values = Vec::with_capacity(record.len() - value_start);
        for (j, field) in record.iter().enumerate().skip(value_start) {
            let value: f64 = field.trim().parse().map_err(|_| {
                DatasetIoError::MalformedRow {
                    line,
                    reason: format!("column {} is not a number: '{}'", j + 1, field),
                }
            })?;
            if !value.is_finite() {
                return Err(DatasetIoError::NonFiniteValue {
                    person_id: person_id.clone(),
                    source_name: source_name.clone(),
                    index: j - value_start,
                });
            }
            values.push(value);
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(DatasetIoError::MalformedRow {
                    line,
                    reason: format!("expected {d} embedding values, got {}", values.len()),
                });
            }
            _ => {}
        }

        let gallery = galleries.entry(person_id.clone()).or_insert_with(|| {
            order.push(person_id.clone());
            PersonGallery {
                person_id: person_id.clone(),
                images: Vec::new(),
            }
        });
        if gallery
            .images
            .iter()
            .any(|img| img.source_name == source_name)
        {
            return Err(DatasetIoError::DuplicateSourceName {
                person_id,
                source_name,
            });
        }
        gallery.images.push(GalleryImage {
            source_name,
            tags,
            embedding: Embedding::from_values_unchecked(values),
        });
    }

    if order.is_empty() {
        return Err(DatasetIoError::EmptyInput(
            "delimited input has no rows".into(),
        ));
    }
    Ok(order
        .into_iter()
        .map(|id| galleries.remove(&id).expect("ordered ids exist"))
        .collect())
}

/// Writes galleries as delimited text (the inverse of [`import_delimited`]).
///
/// Always writes the tags cell; values use the shortest representation that
/// parses back to the identical `f64`.
pub fn export_delimited(
    galleries: &[PersonGallery],
    path: &Path,
    delimiter: u8,
) -> Result<(), DatasetIoError> {
    if galleries.is_empty() {
        return Err(DatasetIoError::EmptyInput("dataset has no persons".into()));
    }
    let mut buffer = Vec::new();
    {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .delimiter(delimiter)
            .from_writer(&mut buffer);
        for gallery in galleries {
            for image in &gallery.images {
                let mut record = Vec::with_capacity(3 + image.embedding.dim());
                record.push(gallery.person_id.clone());
                record.push(image.source_name.clone());
                record.push(
                    image
                        .tags
                        .iter()
                        .cloned()
                        .collect::<Vec<_>>()
                        .join(&TAG_SEPARATOR.to_string()),
                );
                for value in image.embedding.values() {
                    record.push(format!("{value}"));
                }
                writer
                    .write_record(&record)
                    .map_err(|e| DatasetIoError::MalformedRow {
                        line: 0,
                        reason: e.to_string(),
                    })?;
            }
        }
        writer
            .flush()
            .map_err(DatasetIoError::Io)?;
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| DatasetIoError::EmptyInput("output path has no file name".into()))?;
    fs::create_dir_all(dir)?;
    write_atomic(dir, name, &buffer)?;
    Ok(())
}
