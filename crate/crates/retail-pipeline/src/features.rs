use std::collections::HashMap;
use std::io::Read;

use crate::RetailError;

/// Where task context features come from: hashing the product description
/// into a fixed-width signed bag of tokens, or a precomputed embedding
/// file (product_id -> vector) that overrides hashing when provided.
#[derive(Debug, Clone)]
pub enum FeatureSource {
    HashedDescription { dim: usize },
    Precomputed { dim: usize, table: HashMap<String, Vec<f64>> },
}

impl FeatureSource {
    pub fn hashed(dim: usize) -> Self {
        FeatureSource::HashedDescription { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureSource::HashedDescription { dim } => *dim,
            FeatureSource::Precomputed { dim, .. } => *dim,
        }
    }

    /// Features for one product; products absent from a precomputed table
    /// get the zero vector.
    pub fn features_for(&self, product_id: &str, description: &str) -> Vec<f64> {
        match self {
            FeatureSource::HashedDescription { dim } => hash_description(description, *dim),
            FeatureSource::Precomputed { dim, table } => table
                .get(product_id)
                .cloned()
                .unwrap_or_else(|| vec![0.0; *dim]),
        }
    }
}

/// FNV-1a over a token; a fixed algorithmic hash keeps features identical
/// across runs and platforms (the std hasher is randomized per process).
fn fnv1a(token: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in token.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Signed token hashing of the description, L2-normalized.
pub fn hash_description(description: &str, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for token in description
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let h = fnv1a(&token.to_ascii_lowercase());
        let idx = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        out[idx] += sign;
    }
    let norm: f64 = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in out.iter_mut() {
            *v /= norm;
        }
    }
    out
}

/// Load a precomputed-embedding sidecar: CSV with columns
/// `product_id,f_0..f_{d-1}`.
pub fn load_embeddings_csv<R: Read>(reader: R) -> Result<FeatureSource, RetailError> {
    let mut r = csv::Reader::from_reader(reader);
    let dim = r.headers()?.len().saturating_sub(1);
    if dim == 0 {
        return Err(RetailError::BadEmbedding {
            row: 1,
            reason: "need at least one feature column".into(),
        });
    }
    let mut table = HashMap::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let product = record
            .get(0)
            .ok_or_else(|| RetailError::BadEmbedding {
                row: i + 2,
                reason: "missing product_id".into(),
            })?
            .to_string();
        let mut vec = Vec::with_capacity(dim);
        for j in 0..dim {
            let v: f64 = record
                .get(j + 1)
                .unwrap_or("")
                .parse()
                .map_err(|e| RetailError::BadEmbedding {
                    row: i + 2,
                    reason: format!("f_{j}: {e}"),
                })?;
            vec.push(v);
        }
        table.insert(product, vec);
    }
    Ok(FeatureSource::Precomputed { dim, table })
}
