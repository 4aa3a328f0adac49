//! Re-ranking of text hits by structure matches.
//!
//! Candidates are ordered by number of matched query compounds, then by
//! min-max normalized BM25 score, then raw BM25 score, then id.

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<K> {
    pub key: K,
    pub text_score: f64,
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fused<K> {
    pub key: K,
    pub text_score: f64,
    pub normalized: f64,
    pub matched: usize,
}

/// Scales scores into `[0, 1]` by the candidate minimum and maximum. With
/// no spread every positive score maps to 1 and zero stays 0.
pub fn min_max_normalize(scores: &[f64]) -> Vec<f64> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|&s| {
            if max > min {
                (s - min) / (max - min)
            } else if s > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn fuse<K: Ord>(candidates: Vec<Candidate<K>>) -> Vec<Fused<K>> {
    let raw: Vec<f64> = candidates.iter().map(|c| c.text_score).collect();
    let normalized = min_max_normalize(&raw);
    let mut fused: Vec<Fused<K>> = candidates
        .into_iter()
        .zip(normalized)
        .map(|(c, normalized)| Fused {
            key: c.key,
            text_score: c.text_score,
            normalized,
            matched: c.matched,
        })
        .collect();
    fused.sort_by(|a, b| {
        b.matched
            .cmp(&a.matched)
            .then(b.normalized.total_cmp(&a.normalized))
            .then(b.text_score.total_cmp(&a.text_score))
            .then(a.key.cmp(&b.key))
    });
    fused
}
