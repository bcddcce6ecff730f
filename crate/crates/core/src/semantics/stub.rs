//! Offline deterministic backends.

use super::{cosine, BackendError, CoherenceScorer, EmbeddingBackend, TranslationBackend};
use crate::Real;

pub const STUB_DIM: usize = 256;
/// FNV-1a 64-bit offset basis, used as the hashing seed.
pub const STUB_SEED: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Feature-hashed character 3-gram counts, L2-normalized. Texts shorter than
/// three characters hash as a single gram.
#[derive(Debug, Clone, Copy)]
pub struct StubEmbedding {
    pub dim: usize,
    pub seed: u64,
}

impl Default for StubEmbedding {
    fn default() -> Self {
        Self { dim: STUB_DIM, seed: STUB_SEED }
    }
}

impl StubEmbedding {
    pub fn bucket(&self, gram: &str) -> usize {
        let mut h = self.seed;
        for b in gram.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        (h % self.dim as u64) as usize
    }

    pub fn grams(text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() < 3 {
            return vec![text.to_owned()];
        }
        chars.windows(3).map(|w| w.iter().collect()).collect()
    }

    pub fn vector(&self, text: &str) -> Vec<Real> {
        let mut v = vec![0.0; self.dim];
        for g in Self::grams(text) {
            v[self.bucket(&g)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

impl EmbeddingBackend for StubEmbedding {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Real>>, BackendError> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl TranslationBackend for IdentityTranslator {
    fn translate(&self, texts: &[String], _source: &str, _target: &str) -> Result<Vec<String>, BackendError> {
        Ok(texts.to_vec())
    }
}

/// `(1 + cos) / 2` of the stub embeddings of the two lines.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubCoherence {
    pub embedding: StubEmbedding,
}

impl CoherenceScorer for StubCoherence {
    fn score(&self, prev: &str, next: &str) -> Result<Real, BackendError> {
        let c = cosine(&self.embedding.vector(prev), &self.embedding.vector(next));
        Ok(((1.0 + c) / 2.0).clamp(0.0, 1.0))
    }
}

/// Scores every pair with the same probability.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub Real);

impl CoherenceScorer for ConstantScorer {
    fn score(&self, _prev: &str, _next: &str) -> Result<Real, BackendError> {
        Ok(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn vectors_are_unit_norm_and_deterministic() {
        let e = StubEmbedding::default();
        for t in ["", "a", "ab", "hello world", "사랑해 baby"] {
            let v = e.vector(t);
            assert_eq!(v.len(), STUB_DIM);
            let n: Real = v.iter().map(|x| x * x).sum::<Real>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
            assert_eq!(v, e.vector(t));
        }
    }

    #[test]
    fn disjoint_grams_are_orthogonal() {
        let e = StubEmbedding::default();
        let (a, b) = ("abcabc", "xyzxyz");
        // independent check: neither grams nor buckets overlap
        let ga: HashSet<String> = StubEmbedding::grams(a).into_iter().collect();
        let gb: HashSet<String> = StubEmbedding::grams(b).into_iter().collect();
        assert!(ga.is_disjoint(&gb));
        let ba: HashSet<usize> = ga.iter().map(|g| e.bucket(g)).collect();
        let bb: HashSet<usize> = gb.iter().map(|g| e.bucket(g)).collect();
        assert!(ba.is_disjoint(&bb));
        assert!(cosine(&e.vector(a), &e.vector(b)).abs() < 1e-6);
    }

    #[test]
    fn stub_coherence_in_range() {
        let s = StubCoherence::default();
        let same = s.score("hello", "hello").unwrap();
        assert!((same - 1.0).abs() < 1e-12);
        let x = s.score("abcabc", "xyzxyz").unwrap();
        assert!((0.0..=1.0).contains(&x));
    }
}
