//! Semantic similarity between aligned lyrics and line-to-line coherence.
//!
//! Korean text is translated to English before embedding; similarity is the
//! cosine of the two embeddings. Line-wise similarity averages over lines;
//! section-wise similarity weights each section by its line count.

mod remote;
mod stub;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AlignedSong, LinePair};
use crate::hangul::contains_hangul;
use crate::num;
use crate::text::comparison_key;
use crate::Real;

pub use remote::{RemoteBackend, RemoteConfig};
pub use stub::{ConstantScorer, IdentityTranslator, StubCoherence, StubEmbedding, STUB_DIM, STUB_SEED};

pub const SOURCE_LANG: &str = "ko";
pub const TARGET_LANG: &str = "en";

#[derive(Debug, Error)]
pub enum BackendError {
    /// Network or service failure; `retriable` is false for client errors
    /// such as 401/404 that will not go away on retry.
    #[error("transport error from {endpoint}: {message}")]
    Transport { endpoint: String, message: String, retriable: bool },
    #[error("backend returned unusable data: {0}")]
    Data(String),
}

impl BackendError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, BackendError::Transport { retriable: true, .. })
    }
}

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("song {0}: no lines to score")]
    NoLines(String),
    #[error("need two lines, got {0}")]
    NeedTwoLines(usize),
}

/// Sentence embedder. Vectors are L2-normalized and of a fixed dimension.
pub trait EmbeddingBackend: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Real>>, BackendError>;
}

/// Machine translation; output has the same length and order as the input.
pub trait TranslationBackend: Send + Sync {
    fn translate(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>, BackendError>;
}

/// Probability in [0,1] that `next` follows `prev`.
pub trait CoherenceScorer: Send + Sync {
    fn score(&self, prev: &str, next: &str) -> Result<Real, BackendError>;

    fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<Real>, BackendError> {
        pairs.iter().map(|(p, n)| self.score(p, n)).collect()
    }
}

pub fn cosine(a: &[Real], b: &[Real]) -> Real {
    let dot: Real = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: Real = a.iter().map(|x| x * x).sum::<Real>().sqrt();
    let nb: Real = b.iter().map(|x| x * x).sum::<Real>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Translate every Hangul-bearing text to English and embed all texts,
/// each distinct text once. Returns one vector per input, in order.
pub fn embed_for_comparison(
    texts: &[String],
    emb: &dyn EmbeddingBackend,
    tr: &dyn TranslationBackend,
) -> Result<Vec<Vec<Real>>, BackendError> {
    let mut to_translate: Vec<String> = Vec::new();
    let mut seen = HashMap::new();
    for t in texts.iter().filter(|t| contains_hangul(t)) {
        seen.entry(t.clone()).or_insert_with(|| {
            to_translate.push(t.clone());
            to_translate.len() - 1
        });
    }
    let translated = if to_translate.is_empty() { Vec::new() } else { tr.translate(&to_translate, SOURCE_LANG, TARGET_LANG)? };
    if translated.len() != to_translate.len() {
        return Err(BackendError::Data(format!("translation returned {} texts for {} inputs", translated.len(), to_translate.len())));
    }
    let english: Vec<&String> = texts.iter().map(|t| seen.get(t).map_or(t, |&i| &translated[i])).collect();

    let mut unique: Vec<String> = Vec::new();
    let mut slot = HashMap::new();
    let index: Vec<usize> = english
        .iter()
        .map(|t| {
            *slot.entry((*t).clone()).or_insert_with(|| {
                unique.push((*t).clone());
                unique.len() - 1
            })
        })
        .collect();
    let vectors = if unique.is_empty() { Vec::new() } else { emb.embed(&unique)? };
    if vectors.len() != unique.len() {
        return Err(BackendError::Data(format!("embedding returned {} vectors for {} texts", vectors.len(), unique.len())));
    }
    Ok(index.into_iter().map(|i| vectors[i].clone()).collect())
}

/// Semantic textual similarity of two texts.
pub fn sts(a: &str, b: &str, emb: &dyn EmbeddingBackend, tr: &dyn TranslationBackend) -> Result<Real, BackendError> {
    let v = embed_for_comparison(&[a.to_owned(), b.to_owned()], emb, tr)?;
    Ok(cosine(&v[0], &v[1]))
}

/// Remove line pairs left untranslated (both sides equal after NFC, case
/// folding, punctuation removal and whitespace collapsing). Sections that
/// become empty are dropped and indices re-derived. Returns the original
/// indices of the removed lines.
pub fn filter_untranslated(song: &AlignedSong) -> (AlignedSong, Vec<usize>) {
    let mut excluded = Vec::new();
    let mut out = song.clone();
    for section in &mut out.sections {
        section.lines.retain(|l| {
            let keep = !is_untranslated(l);
            if !keep {
                excluded.push(l.line_index);
            }
            keep
        });
    }
    out.sections.retain(|s| !s.lines.is_empty());
    out.reindex();
    (out, excluded)
}

pub fn is_untranslated(line: &LinePair) -> bool {
    comparison_key(&line.en) == comparison_key(&line.kr)
}

/// Line- and section-wise similarity of one song.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemReport {
    pub sem_line: Real,
    pub sem_sec: Real,
    pub excluded_line_count: usize,
    /// Per scored line, in line order.
    pub per_line_sts: Vec<Real>,
    /// `(line count, sts)` per scored section.
    pub per_section: Vec<(usize, Real)>,
}

fn section_text<'a>(lines: impl Iterator<Item = &'a str>) -> String {
    lines.map(str::trim).collect::<Vec<_>>().join(" ")
}

pub fn semantic_report(
    song: &AlignedSong,
    emb: &dyn EmbeddingBackend,
    tr: &dyn TranslationBackend,
    exclude_untranslated: bool,
) -> Result<SemReport, SemanticsError> {
    let (scored, excluded) = if exclude_untranslated { filter_untranslated(song) } else { (song.clone(), Vec::new()) };
    let n = scored.line_count();
    if n == 0 {
        return Err(SemanticsError::NoLines(song.song_id.clone()));
    }
    let mut texts = Vec::with_capacity(2 * (n + scored.section_count()));
    for line in scored.lines() {
        texts.push(line.en.trim().to_owned());
        texts.push(line.kr.trim().to_owned());
    }
    for section in &scored.sections {
        texts.push(section_text(section.lines.iter().map(|l| l.en.as_str())));
        texts.push(section_text(section.lines.iter().map(|l| l.kr.as_str())));
    }
    let vectors = embed_for_comparison(&texts, emb, tr)?;
    let sims: Vec<Real> = vectors.chunks(2).map(|p| cosine(&p[0], &p[1])).collect();
    let (per_line_sts, section_sts) = sims.split_at(n);
    let per_section: Vec<(usize, Real)> = scored.sections.iter().zip(section_sts).map(|(s, &v)| (s.lines.len(), v)).collect();
    Ok(SemReport {
        sem_line: num::line_mean(per_line_sts).expect("n > 0"),
        sem_sec: num::size_weighted(&per_section).expect("sections are non-empty"),
        excluded_line_count: excluded.len(),
        per_line_sts: per_line_sts.to_vec(),
        per_section,
    })
}

pub fn sem_line(
    song: &AlignedSong,
    emb: &dyn EmbeddingBackend,
    tr: &dyn TranslationBackend,
    exclude_untranslated: bool,
) -> Result<SemReport, SemanticsError> {
    semantic_report(song, emb, tr, exclude_untranslated)
}

pub fn sem_sec(
    song: &AlignedSong,
    emb: &dyn EmbeddingBackend,
    tr: &dyn TranslationBackend,
    exclude_untranslated: bool,
) -> Result<SemReport, SemanticsError> {
    semantic_report(song, emb, tr, exclude_untranslated)
}

/// Consecutive `(prev, next)` pairs of a line sequence.
pub fn consecutive_pairs<S: AsRef<str>>(lines: &[S]) -> Vec<(String, String)> {
    lines.windows(2).map(|w| (w[0].as_ref().to_owned(), w[1].as_ref().to_owned())).collect()
}

/// Pair scores for consecutive lines, validated to lie in [0,1].
pub fn coherence_scores<S: AsRef<str>>(lines: &[S], scorer: &dyn CoherenceScorer) -> Result<Vec<Real>, SemanticsError> {
    if lines.len() < 2 {
        return Err(SemanticsError::NeedTwoLines(lines.len()));
    }
    let pairs = consecutive_pairs(lines);
    let scores = scorer.score_pairs(&pairs)?;
    if scores.len() != pairs.len() {
        return Err(BackendError::Data(format!("{} scores for {} pairs", scores.len(), pairs.len())).into());
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(BackendError::Data(format!("score {bad} outside [0,1]")).into());
    }
    Ok(scores)
}

/// Mean next-line probability over the `n - 1` consecutive pairs.
pub fn coherence_nsp<S: AsRef<str>>(lines: &[S], scorer: &dyn CoherenceScorer) -> Result<Real, SemanticsError> {
    let scores = coherence_scores(lines, scorer)?;
    Ok(num::mean(&scores).expect("at least one pair"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{test_song, AlignedSong};
    use approx::assert_abs_diff_eq;

    /// Embeds each text as a fixed 2-d vector from a lookup table.
    struct TableEmbedding(HashMap<String, Vec<Real>>);

    impl EmbeddingBackend for TableEmbedding {
        fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Real>>, BackendError> {
            texts.iter().map(|t| self.0.get(t).cloned().ok_or_else(|| BackendError::Data(format!("no vector for {t:?}")))).collect()
        }
    }

    struct FixedScores(Vec<Real>);

    impl CoherenceScorer for FixedScores {
        fn score(&self, _: &str, _: &str) -> Result<Real, BackendError> {
            unreachable!()
        }
        fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<Real>, BackendError> {
            assert_eq!(pairs.len(), self.0.len());
            Ok(self.0.clone())
        }
    }

    struct Failing;

    impl TranslationBackend for Failing {
        fn translate(&self, _: &[String], _: &str, _: &str) -> Result<Vec<String>, BackendError> {
            Err(BackendError::Transport { endpoint: "x".into(), message: "down".into(), retriable: true })
        }
    }

    fn unit(angle: Real) -> Vec<Real> {
        vec![angle.cos(), angle.sin()]
    }

    #[test]
    fn sts_of_identical_texts_is_one() {
        let v = sts("You don't know me", "You don't know me", &StubEmbedding::default(), &IdentityTranslator).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn translate_then_embed_path() {
        let v = sts("a world encapsulated as one", "log in together as one", &StubEmbedding::default(), &IdentityTranslator).unwrap();
        assert!((-1.0..=1.0).contains(&v));
        // Hangul side goes through the translator
        let err = sts("하나로 담긴 세상", "log in together as one", &StubEmbedding::default(), &Failing).unwrap_err();
        assert!(err.is_retriable());
        assert!(sts("no hangul", "here", &StubEmbedding::default(), &Failing).is_ok());
    }

    #[test]
    fn sem_line_mean_of_mocked_sts() {
        // line 1 identical (sts 1.0), line 2 at 60 degrees (sts 0.5)
        let table = HashMap::from([
            ("a".to_string(), unit(0.0)),
            ("b".to_string(), unit(0.0)),
            ("c".to_string(), unit(0.0)),
            ("d".to_string(), unit(std::f64::consts::FRAC_PI_3)),
            ("a c".to_string(), unit(0.0)),
            ("b d".to_string(), unit(0.0)),
        ]);
        let song = test_song("s", &[&[("a", "b"), ("c", "d")]]);
        let r = semantic_report(&song, &TableEmbedding(table), &IdentityTranslator, false).unwrap();
        assert_abs_diff_eq!(r.sem_line, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sem_sec, 1.0, epsilon = 1e-12);
        assert_eq!(r.per_line_sts.len(), 2);
    }

    #[test]
    fn sem_sec_weights_by_section_size() {
        let a08 = (0.8 as Real).acos();
        let a04 = (0.4 as Real).acos();
        let mut table = HashMap::new();
        for t in ["e1", "e2", "e3", "k1", "k2", "k3", "e4", "k4"] {
            table.insert(t.to_string(), unit(0.0));
        }
        table.insert("e1 e2 e3".into(), unit(0.0));
        table.insert("k1 k2 k3".into(), unit(a08));
        table.insert("e4".into(), unit(0.0));
        table.insert("k4".into(), unit(a04));
        let song = test_song("s", &[&[("e1", "k1"), ("e2", "k2"), ("e3", "k3")], &[("e4", "k4")]]);
        let r = semantic_report(&song, &TableEmbedding(table), &IdentityTranslator, false).unwrap();
        assert_eq!(r.per_section.iter().map(|p| p.0).collect::<Vec<_>>(), [3, 1]);
        assert_abs_diff_eq!(r.sem_sec, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn single_section_sem_sec_is_joined_sts() {
        let song = test_song("s", &[&[("you and me", "너와 나"), ("tonight", "오늘밤")]]);
        let emb = StubEmbedding::default();
        let r = semantic_report(&song, &emb, &IdentityTranslator, false).unwrap();
        let joined = sts("you and me tonight", "너와 나 오늘밤", &emb, &IdentityTranslator).unwrap();
        assert_abs_diff_eq!(r.sem_sec, joined, epsilon = 1e-15);
    }

    #[test]
    fn all_identical_lines_score_one() {
        let song = test_song("s", &[&[("la la", "la la"), ("oh", "oh")], &[("hey", "hey")]]);
        let r = semantic_report(&song, &StubEmbedding::default(), &IdentityTranslator, false).unwrap();
        assert_abs_diff_eq!(r.sem_line, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sem_sec, 1.0, epsilon = 1e-12);
        let err = semantic_report(&song, &StubEmbedding::default(), &IdentityTranslator, true).unwrap_err();
        assert!(matches!(err, SemanticsError::NoLines(_)));
    }

    #[test]
    fn untranslated_filter_examples() {
        let song: AlignedSong = test_song(
            "cry",
            &[
                &[("You don't know me", "You don't know me")],
                &[
                    ("Baby no more real love", "Baby, no more real love"),
                    ("Then at the end, break your heart", "마지막엔 break your heart"),
                ],
            ],
        );
        let (kept, excluded) = filter_untranslated(&song);
        assert_eq!(excluded, [1, 2]);
        assert_eq!(kept.section_count(), 1);
        assert_eq!(kept.sections[0].section_index, 1);
        assert_eq!(kept.sections[0].lines[0].line_index, 1);
        assert_eq!(kept.sections[0].lines[0].kr, "마지막엔 break your heart");
    }

    #[test]
    fn nsp_aggregation() {
        assert_abs_diff_eq!(coherence_nsp(&["a", "b", "c"], &ConstantScorer(0.5)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(coherence_nsp(&["a", "b", "c"], &FixedScores(vec![0.9, 0.3])).unwrap(), 0.6, epsilon = 1e-12);
        assert!(matches!(coherence_nsp(&["a"], &ConstantScorer(0.5)), Err(SemanticsError::NeedTwoLines(1))));
        assert!(matches!(coherence_nsp(&["a", "b"], &FixedScores(vec![1.5])), Err(SemanticsError::Backend(BackendError::Data(_)))));
    }
}
