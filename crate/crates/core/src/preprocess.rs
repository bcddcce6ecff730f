//! Training-data construction with syllable control tokens.
//!
//! Every span of the English target is prefixed on both sides by `<SYLn>`,
//! where `n` is the English span's syllable count; the Korean side never
//! influences `n`. Without syllable tokens, section-level records separate
//! their spans with `<SEP>` instead. Section lines may be shuffled with one
//! seeded permutation shared by both languages.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AlignedSong;
use crate::semantics::{BackendError, TranslationBackend};
use crate::syllable::SyllableCounter;

pub const SEP: &str = "<SEP>";
const SYL_PREFIX: &str = "<SYL";

pub fn syl_token(n: usize) -> String {
    format!("<SYL{n}>")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GeneralLine,
    GeneralSection,
    LyricsLine,
    LyricsSection,
}

impl Scheme {
    pub fn is_section(self) -> bool {
        matches!(self, Scheme::GeneralSection | Scheme::LyricsSection)
    }

    pub fn is_general(self) -> bool {
        matches!(self, Scheme::GeneralLine | Scheme::GeneralSection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SylMode {
    WithSyl,
    WithoutSyl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrainingPair {
    /// Korean side.
    pub source: String,
    /// English side.
    pub target: String,
    pub scheme: Scheme,
    pub syl_mode: SylMode,
}

/// Seed for every random choice in a preprocessing run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShuffleSeed(pub u64);

impl ShuffleSeed {
    /// Independent generator for record `index`, so records can be produced
    /// in any order with identical results.
    pub fn rng_for(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("target {0:?} has no syllables")]
    ZeroSyllables(String),
    #[error("section has no line with a non-zero syllable count")]
    EmptySection,
    #[error("empty sentence")]
    EmptySentence,
    #[error("TSV line {line}: expected 2 tab-separated columns, found {found}")]
    Tsv { line: usize, found: usize },
    #[error("scheme {0:?} needs {1}")]
    SchemeInput(Scheme, &'static str),
    #[error("cannot write {path}: {source}")]
    Sink {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// One line pair as a training record. With syllable tokens both sides get
/// `<SYLs> ` where `s` is the English line's count.
pub fn annotate_line(kr: &str, en: &str, syl_mode: SylMode, counter: &SyllableCounter) -> Result<TrainingPair, PreprocessError> {
    annotate_line_as(kr, en, syl_mode, counter, Scheme::LyricsLine)
}

fn annotate_line_as(
    kr: &str,
    en: &str,
    syl_mode: SylMode,
    counter: &SyllableCounter,
    scheme: Scheme,
) -> Result<TrainingPair, PreprocessError> {
    let (kr, en) = (kr.trim(), en.trim());
    let s = counter.count_line(en).value;
    if s == 0 {
        return Err(PreprocessError::ZeroSyllables(en.to_owned()));
    }
    let (source, target) = match syl_mode {
        SylMode::WithSyl => {
            let tok = syl_token(s);
            (format!("{tok} {kr}"), format!("{tok} {en}"))
        }
        SylMode::WithoutSyl => (kr.to_owned(), en.to_owned()),
    };
    Ok(TrainingPair { source, target, scheme, syl_mode })
}

/// Join aligned spans, prefixing each with its English syllable count or
/// separating them with `<SEP>`.
fn join_spans<'a>(spans: &[(&'a str, &'a str, usize)], syl_mode: SylMode) -> (String, String) {
    let side = |kr: bool| -> String {
        let text = |sp: &(&'a str, &'a str, usize)| -> &'a str {
            if kr {
                sp.0
            } else {
                sp.1
            }
        };
        match syl_mode {
            SylMode::WithSyl => spans.iter().map(|sp| format!("{} {}", syl_token(sp.2), text(sp))).collect::<Vec<_>>().join(" "),
            SylMode::WithoutSyl => spans.iter().map(text).collect::<Vec<_>>().join(&format!(" {SEP} ")),
        }
    };
    (side(true), side(false))
}

/// A whole section as one record. Zero-syllable English lines are dropped
/// first; with an rng the remaining lines are shuffled by one permutation
/// applied to both languages.
pub fn annotate_section<S: AsRef<str>>(
    lines: &[(S, S)],
    syl_mode: SylMode,
    rng: Option<&mut ChaCha8Rng>,
    counter: &SyllableCounter,
) -> Result<TrainingPair, PreprocessError> {
    let mut kept: Vec<(&str, &str, usize)> = Vec::with_capacity(lines.len());
    for (kr, en) in lines {
        let (kr, en) = (kr.as_ref().trim(), en.as_ref().trim());
        let s = counter.count_line(en).value;
        if s == 0 {
            log::info!("dropping zero-syllable line {en:?} from section");
            continue;
        }
        kept.push((kr, en, s));
    }
    if kept.is_empty() {
        return Err(PreprocessError::EmptySection);
    }
    if let Some(rng) = rng {
        let perm = permutation(kept.len(), rng);
        kept = perm.iter().map(|&i| kept[i]).collect();
    }
    let (source, target) = join_spans(&kept, syl_mode);
    Ok(TrainingPair { source, target, scheme: Scheme::LyricsSection, syl_mode })
}

/// A uniformly random permutation of `0..n`.
pub fn permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Byte spans of whitespace-separated words.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Cut `text` into `n` contiguous word runs at `n - 1` distinct boundaries
/// chosen uniformly.
fn split_words<'a>(text: &'a str, n: usize, rng: &mut impl Rng) -> Vec<&'a str> {
    let spans = word_spans(text);
    debug_assert!(n >= 1 && n <= spans.len());
    let mut cuts: Vec<usize> = index::sample(rng, spans.len() - 1, n - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(spans.len());
    bounds.windows(2).map(|w| &text[spans[w[0]].0..spans[w[1] - 1].1]).collect()
}

/// Upper bound of the uniform segment-count draw.
pub const MAX_SEGMENTS: usize = 4;

/// Split both sentences into `n` segments (`n` uniform in `1..=max_segments`,
/// capped by each side's word count) at independently chosen word
/// boundaries; segment `j` is tagged on both sides with the English
/// segment's count.
pub fn segment_general(
    kr: &str,
    en: &str,
    syl_mode: SylMode,
    max_segments: usize,
    rng: &mut ChaCha8Rng,
    counter: &SyllableCounter,
) -> Result<TrainingPair, PreprocessError> {
    let (kr, en) = (kr.trim(), en.trim());
    let (kr_words, en_words) = (word_spans(kr).len(), word_spans(en).len());
    if kr_words == 0 || en_words == 0 {
        return Err(PreprocessError::EmptySentence);
    }
    if counter.count_line(en).value == 0 {
        return Err(PreprocessError::ZeroSyllables(en.to_owned()));
    }
    let drawn = rng.random_range(1..=max_segments.max(1));
    let n = drawn.min(kr_words).min(en_words);
    let en_parts = split_words(en, n, rng);
    let kr_parts = split_words(kr, n, rng);
    let spans: Vec<(&str, &str, usize)> = kr_parts.iter().zip(&en_parts).map(|(k, e)| (*k, *e, counter.count_line(e).value)).collect();
    let (source, target) = join_spans(&spans, syl_mode);
    Ok(TrainingPair { source, target, scheme: Scheme::GeneralSection, syl_mode })
}

/// Remove `<SYLn>` and `<SEP>` tokens and return the spans between them.
pub fn strip_control_tokens(text: &str) -> Vec<String> {
    let mut spans = Vec::new();
    let mut current = String::new();
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix(SEP) {
            push_span(&mut spans, &mut current);
            rest = after;
        } else if let Some(len) = syl_token_len(rest) {
            push_span(&mut spans, &mut current);
            rest = &rest[len..];
        } else {
            let c = rest.chars().next().expect("non-empty");
            current.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    push_span(&mut spans, &mut current);
    spans
}

fn push_span(spans: &mut Vec<String>, current: &mut String) {
    let t = current.trim();
    if !t.is_empty() {
        spans.push(t.to_owned());
    }
    current.clear();
}

fn syl_token_len(text: &str) -> Option<usize> {
    let digits = text.strip_prefix(SYL_PREFIX)?;
    let n = digits.bytes().take_while(u8::is_ascii_digit).count();
    (n > 0 && digits[n..].starts_with('>')).then_some(SYL_PREFIX.len() + n + 1)
}

/// The `n` values of every `<SYLn>` token, in order.
pub fn syl_values(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find(SYL_PREFIX) {
        rest = &rest[i..];
        match syl_token_len(rest) {
            Some(len) => {
                out.push(rest[SYL_PREFIX.len()..len - 1].parse().expect("digits"));
                rest = &rest[len..];
            }
            None => rest = &rest[SYL_PREFIX.len()..],
        }
    }
    out
}

/// Parse `kr<TAB>en` sentence pairs. Blank lines are skipped.
pub fn parse_sentence_tsv(text: &str) -> Result<Vec<(String, String)>, PreprocessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cols: Vec<&str> = l.trim_end_matches('\r').split('\t').collect();
            match cols.as_slice() {
                [kr, en] => Ok((kr.to_string(), en.to_string())),
                _ => Err(PreprocessError::Tsv { line: i + 1, found: cols.len() }),
            }
        })
        .collect()
}

/// Replace the Korean side of every line with a machine translation of the
/// English side (the non-singable lyrics scheme).
pub fn with_translated_sources(songs: &[AlignedSong], tr: &dyn TranslationBackend) -> Result<Vec<AlignedSong>, PreprocessError> {
    let english: Vec<String> = songs.iter().flat_map(|s| s.lines().map(|l| l.en.clone())).collect();
    let korean = tr.translate(&english, crate::semantics::TARGET_LANG, crate::semantics::SOURCE_LANG)?;
    if korean.len() != english.len() {
        return Err(BackendError::Data(format!("translation returned {} texts for {}", korean.len(), english.len())).into());
    }
    let mut it = korean.into_iter();
    let mut out = songs.to_vec();
    for song in &mut out {
        for section in &mut song.sections {
            for line in &mut section.lines {
                line.kr = it.next().expect("lengths checked");
            }
        }
    }
    Ok(out)
}

pub enum TrainingInput<'a> {
    Corpus(&'a [AlignedSong]),
    /// `(kr, en)` sentence pairs.
    Sentences(&'a [(String, String)]),
}

#[derive(Debug, Clone, Copy)]
pub struct EmitOptions {
    pub scheme: Scheme,
    pub syl_mode: SylMode,
    pub seed: ShuffleSeed,
    /// Shuffle section lines (section schemes only).
    pub shuffle: bool,
    pub max_segments: usize,
}

impl EmitOptions {
    pub fn new(scheme: Scheme, syl_mode: SylMode, seed: u64) -> Self {
        Self { scheme, syl_mode, seed: ShuffleSeed(seed), shuffle: true, max_segments: MAX_SEGMENTS }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EmitSummary {
    pub records: usize,
    pub dropped: usize,
}

#[derive(Serialize)]
struct Record<'a> {
    source: &'a str,
    target: &'a str,
}

/// Build all records for the chosen scheme, in input order. Units that
/// cannot be annotated (zero syllables) are dropped and counted.
pub fn build_records(
    input: &TrainingInput<'_>,
    opts: &EmitOptions,
    counter: &SyllableCounter,
) -> Result<(Vec<TrainingPair>, usize), PreprocessError> {
    let results: Vec<Result<TrainingPair, PreprocessError>> = match (input, opts.scheme) {
        (TrainingInput::Sentences(pairs), Scheme::GeneralLine) => {
            pairs.par_iter().map(|(kr, en)| annotate_line_as(kr, en, opts.syl_mode, counter, Scheme::GeneralLine)).collect()
        }
        (TrainingInput::Sentences(pairs), Scheme::GeneralSection) => pairs
            .par_iter()
            .enumerate()
            .map(|(i, (kr, en))| {
                let mut rng = opts.seed.rng_for(i as u64);
                segment_general(kr, en, opts.syl_mode, opts.max_segments, &mut rng, counter)
            })
            .collect(),
        (TrainingInput::Corpus(songs), Scheme::LyricsLine) => {
            let lines: Vec<(&str, &str)> = songs.iter().flat_map(|s| s.lines().map(|l| (l.kr.as_str(), l.en.as_str()))).collect();
            lines.par_iter().map(|(kr, en)| annotate_line(kr, en, opts.syl_mode, counter)).collect()
        }
        (TrainingInput::Corpus(songs), Scheme::LyricsSection) => {
            let sections: Vec<Vec<(&str, &str)>> = songs
                .iter()
                .flat_map(|s| s.sections.iter().map(|sec| sec.lines.iter().map(|l| (l.kr.as_str(), l.en.as_str())).collect()))
                .collect();
            sections
                .par_iter()
                .enumerate()
                .map(|(i, lines)| {
                    let mut rng = opts.seed.rng_for(i as u64);
                    annotate_section(lines, opts.syl_mode, opts.shuffle.then_some(&mut rng), counter)
                })
                .collect()
        }
        (TrainingInput::Corpus(_), s) => return Err(PreprocessError::SchemeInput(s, "sentence pairs (TSV)")),
        (TrainingInput::Sentences(_), s) => return Err(PreprocessError::SchemeInput(s, "a lyrics corpus")),
    };
    let mut records = Vec::with_capacity(results.len());
    let mut dropped = 0;
    for r in results {
        match r {
            Ok(p) => records.push(p),
            Err(PreprocessError::ZeroSyllables(_) | PreprocessError::EmptySection | PreprocessError::EmptySentence) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if dropped > 0 {
        log::info!("dropped {dropped} units with no countable syllables");
    }
    Ok((records, dropped))
}

pub fn write_jsonl(records: &[TrainingPair], mut sink: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut sink, &Record { source: &r.source, target: &r.target })?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

/// Build records and write them as JSONL (`{"source":..,"target":..}` per line).
pub fn emit_training_file(
    input: &TrainingInput<'_>,
    opts: &EmitOptions,
    counter: &SyllableCounter,
    sink: impl Write,
    sink_path: &Path,
) -> Result<EmitSummary, PreprocessError> {
    let (records, dropped) = build_records(input, opts, counter)?;
    write_jsonl(&records, sink).map_err(|source| PreprocessError::Sink { path: sink_path.to_path_buf(), source })?;
    Ok(EmitSummary { records: records.len(), dropped })
}
