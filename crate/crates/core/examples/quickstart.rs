//! Fold a few embeddings into a mean template and match a probe against it.
//!
//! This is the snippet from the repository README; run it with
//! `cargo run -p faceagg --example quickstart`.

use faceagg::aggregation::{aggregate, AggregationStrategy};
use faceagg::embedding::{l2_distance, Embedding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let images = vec![
        Embedding::from_values(vec![0.9, 0.1])?,
        Embedding::from_values(vec![1.1, -0.1])?,
        Embedding::from_values(vec![1.0, 0.0])?,
    ];
    let template = aggregate(AggregationStrategy::Mean, &images)?;
    let probe = Embedding::from_values(vec![1.0, 0.05])?;
    println!("match distance: {}", l2_distance(&template, &probe)?);
    Ok(())
}
