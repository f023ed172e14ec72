//! On-disk formats and report emission.
//!
//! A dataset on disk is a JSON manifest next to a headerless binary matrix of
//! little-endian `f32` values, one row per image ([`dataset`]). Reports go
//! out as a text table, delimited values, or JSON, each stamped with a
//! provenance block ([`report`]).

pub mod dataset;
pub mod report;

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256, used to fingerprint inputs in provenance blocks.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
