use crate::error::{Error, Result};

fn shared(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Cosine similarity of two binary vectors given as sorted index sets:
/// `|a ∩ b| / sqrt(|a| · |b|)`, the share of labels the two sentences have in common.
pub fn cosine(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(shared(a, b) as f64 / ((a.len() as f64) * (b.len() as f64)).sqrt())
}

/// Shared labels over the product of the two label counts, `|a ∩ b| / (|a| · |b|)`.
/// Not a cosine; kept for side-by-side comparison with [`cosine`].
pub fn cosine_product_norm(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(shared(a, b) as f64 / (a.len() as f64 * b.len() as f64))
}

/// Cosine similarity of real vectors.
pub fn cosine_dense(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.len(), b.len())));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::EmptyVector);
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb))
}

/// Sentence-pair features `[a ⊙ b ; |a − b|]`.
pub fn pair_features(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.len(), b.len())));
    }
    let mut out = Vec::with_capacity(2 * a.len());
    out.extend(a.iter().zip(b).map(|(x, y)| x * y));
    out.extend(a.iter().zip(b).map(|(x, y)| (x - y).abs()));
    Ok(out)
}
