//! Line- and section-aligned bilingual song model, its JSON/JSONL format,
//! alignment validation and corpus statistics.
//!
//! One song per JSON object:
//!
//! ```json
//! {"song_id": "...", "artist": "...", "track": "...", "genre": "kpop",
//!  "translation_status": "official", "original_language": "kr",
//!  "sections": [{"lines": [{"en": "...", "kr": "..."}]}]}
//! ```
//!
//! A corpus is either a JSON array of such objects or JSONL. Section and
//! line indices are implicit (1-based, array order). Text is NFC-normalized
//! on load.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::nfc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Kpop,
    Animation,
    Theatre,
    Other,
}

impl Genre {
    pub const ALL: [Genre; 4] = [Genre::Kpop, Genre::Animation, Genre::Theatre, Genre::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Kpop => "kpop",
            Genre::Animation => "animation",
            Genre::Theatre => "theatre",
            Genre::Other => "other",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslationStatus {
    Official,
    Unofficial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Kr,
}

impl Language {
    pub fn other(self) -> Language {
        match self {
            Language::En => Language::Kr,
            Language::Kr => Language::En,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePair {
    pub en: String,
    pub kr: String,
    /// 1-based, global within the song.
    pub line_index: usize,
}

impl LinePair {
    pub fn text(&self, language: Language) -> &str {
        match language {
            Language::En => &self.en,
            Language::Kr => &self.kr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    /// 1-based.
    pub section_index: usize,
    pub lines: Vec<LinePair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedSong {
    pub song_id: String,
    pub artist: String,
    pub track: String,
    pub genre: Genre,
    pub translation_status: TranslationStatus,
    pub original_language: Language,
    pub sections: Vec<Section>,
}

/// Song metadata without the lyrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SongMeta {
    pub song_id: String,
    pub artist: String,
    pub track: String,
    pub genre: Genre,
    pub translation_status: TranslationStatus,
    pub original_language: Language,
}

impl SongMeta {
    pub fn new(song_id: impl Into<String>, genre: Genre) -> Self {
        Self {
            song_id: song_id.into(),
            artist: String::new(),
            track: String::new(),
            genre,
            translation_status: TranslationStatus::Official,
            original_language: Language::Kr,
        }
    }
}

impl AlignedSong {
    /// Build a song from `(en, kr)` pairs grouped by section, assigning
    /// contiguous indices.
    pub fn from_pairs<S: AsRef<str>>(meta: SongMeta, sections: &[Vec<(S, S)>]) -> Self {
        let mut line_index = 0;
        let sections = sections
            .iter()
            .enumerate()
            .map(|(i, lines)| Section {
                section_index: i + 1,
                lines: lines
                    .iter()
                    .map(|(en, kr)| {
                        line_index += 1;
                        LinePair { en: en.as_ref().to_owned(), kr: kr.as_ref().to_owned(), line_index }
                    })
                    .collect(),
            })
            .collect();
        Self {
            song_id: meta.song_id,
            artist: meta.artist,
            track: meta.track,
            genre: meta.genre,
            translation_status: meta.translation_status,
            original_language: meta.original_language,
            sections,
        }
    }

    pub fn meta(&self) -> SongMeta {
        SongMeta {
            song_id: self.song_id.clone(),
            artist: self.artist.clone(),
            track: self.track.clone(),
            genre: self.genre,
            translation_status: self.translation_status,
            original_language: self.original_language,
        }
    }

    /// Total line count `n`.
    pub fn line_count(&self) -> usize {
        self.sections.iter().map(|s| s.lines.len()).sum()
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    pub fn lines(&self) -> impl Iterator<Item = &LinePair> {
        self.sections.iter().flat_map(|s| s.lines.iter())
    }

    /// Reassign section and line indices from array order.
    pub fn reindex(&mut self) {
        let mut line_index = 0;
        for (i, section) in self.sections.iter_mut().enumerate() {
            section.section_index = i + 1;
            for line in &mut section.lines {
                line_index += 1;
                line.line_index = line_index;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    NonEmptyLine,
    OneSidedLine,
    EmptySection,
    ContiguousSections,
    ContiguousLines,
    EmptySong,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::NonEmptyLine => "non-empty-line",
            Rule::OneSidedLine => "one-sided-line",
            Rule::EmptySection => "empty-section",
            Rule::ContiguousSections => "contiguous-sections",
            Rule::ContiguousLines => "contiguous-lines",
            Rule::EmptySong => "empty-song",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One broken alignment invariant. Indices are 1-based; `None` when the
/// violation is not tied to a section or line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub song_id: String,
    pub section_index: Option<usize>,
    pub line_index: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.song_id)?;
        if let Some(s) = self.section_index {
            write!(f, "\tsection {s}")?;
        }
        if let Some(l) = self.line_index {
            write!(f, "\tline {l}")?;
        }
        write!(f, "\t{}", self.rule)
    }
}

pub fn validate_alignment(song: &AlignedSong) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |section: Option<usize>, line: Option<usize>, rule| Violation {
        song_id: song.song_id.clone(),
        section_index: section,
        line_index: line,
        rule,
    };
    if song.sections.is_empty() {
        out.push(v(None, None, Rule::EmptySong));
    }
    let mut expected_line = 1;
    for (i, section) in song.sections.iter().enumerate() {
        let s = section.section_index;
        if s != i + 1 {
            out.push(v(Some(s), None, Rule::ContiguousSections));
        }
        if section.lines.is_empty() {
            out.push(v(Some(s), None, Rule::EmptySection));
        }
        for line in &section.lines {
            if line.line_index != expected_line {
                out.push(v(Some(s), Some(line.line_index), Rule::ContiguousLines));
            }
            expected_line = line.line_index + 1;
            if line.en.trim().is_empty() || line.kr.trim().is_empty() {
                out.push(v(Some(s), Some(line.line_index), Rule::NonEmptyLine));
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("alignment error in song {song_id}{}: {rule}", section.map(|s| format!(" section {s}")).unwrap_or_default())]
    Alignment { song_id: String, section: Option<usize>, line: Option<usize>, rule: Rule },
    #[error("corpus is not valid UTF-8: {0}")]
    Encoding(#[from] std::str::Utf8Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Violation> for CorpusError {
    fn from(v: Violation) -> Self {
        CorpusError::Alignment { song_id: v.song_id, section: v.section_index, line: v.line_index, rule: v.rule }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawLine {
    #[serde(default)]
    en: Option<String>,
    #[serde(default)]
    kr: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSection {
    lines: Vec<RawLine>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSong {
    song_id: String,
    artist: String,
    track: String,
    genre: Genre,
    translation_status: TranslationStatus,
    original_language: Language,
    sections: Vec<RawSection>,
}

impl RawSong {
    fn into_song(self) -> (AlignedSong, Vec<Violation>) {
        let mut one_sided = Vec::new();
        let mut line_index = 0;
        let sections = self
            .sections
            .into_iter()
            .enumerate()
            .map(|(i, s)| Section {
                section_index: i + 1,
                lines: s
                    .lines
                    .into_iter()
                    .map(|l| {
                        line_index += 1;
                        if l.en.is_none() || l.kr.is_none() {
                            one_sided.push((i + 1, line_index));
                        }
                        LinePair { en: nfc(l.en.as_deref().unwrap_or("")), kr: nfc(l.kr.as_deref().unwrap_or("")), line_index }
                    })
                    .collect(),
            })
            .collect();
        let song = AlignedSong {
            song_id: self.song_id,
            artist: nfc(&self.artist),
            track: nfc(&self.track),
            genre: self.genre,
            translation_status: self.translation_status,
            original_language: self.original_language,
            sections,
        };
        let mut violations: Vec<Violation> = one_sided
            .iter()
            .map(|&(s, l)| Violation {
                song_id: song.song_id.clone(),
                section_index: Some(s),
                line_index: Some(l),
                rule: Rule::OneSidedLine,
            })
            .collect();
        for v in validate_alignment(&song) {
            let dup = v.rule == Rule::NonEmptyLine && one_sided.contains(&(v.section_index.unwrap_or(0), v.line_index.unwrap_or(0)));
            if !dup {
                violations.push(v);
            }
        }
        violations.sort_by_key(|v| (v.section_index, v.line_index));
        (song, violations)
    }
}

impl From<&AlignedSong> for RawSong {
    fn from(song: &AlignedSong) -> Self {
        RawSong {
            song_id: song.song_id.clone(),
            artist: song.artist.clone(),
            track: song.track.clone(),
            genre: song.genre,
            translation_status: song.translation_status,
            original_language: song.original_language,
            sections: song
                .sections
                .iter()
                .map(|s| RawSection { lines: s.lines.iter().map(|l| RawLine { en: Some(l.en.clone()), kr: Some(l.kr.clone()) }).collect() })
                .collect(),
        }
    }
}

/// A structurally parsed song and everything wrong with its alignment.
#[derive(Debug, Clone)]
pub struct CheckedSong {
    pub song: AlignedSong,
    pub violations: Vec<Violation>,
}

/// Parse a corpus without rejecting alignment problems; each song comes back
/// with its violations. Syntax and schema errors still fail.
pub fn parse_corpus_lenient(bytes: &[u8]) -> Result<Vec<CheckedSong>, CorpusError> {
    let text = std::str::from_utf8(bytes)?;
    let raw = parse_raw(text)?;
    Ok(raw
        .into_iter()
        .map(|r| {
            let (song, violations) = r.into_song();
            CheckedSong { song, violations }
        })
        .collect())
}

/// Parse and fully validate a corpus. Fails on the first alignment violation.
pub fn parse_corpus(bytes: &[u8]) -> Result<Vec<AlignedSong>, CorpusError> {
    parse_corpus_lenient(bytes)?
        .into_iter()
        .map(|c| match c.violations.into_iter().next() {
            Some(v) => Err(v.into()),
            None => Ok(c.song),
        })
        .collect()
}

pub fn read_corpus(mut reader: impl Read) -> Result<Vec<AlignedSong>, CorpusError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    parse_corpus(&buf)
}

fn parse_raw(text: &str) -> Result<Vec<RawSong>, CorpusError> {
    let bom = if text.starts_with('\u{feff}') { '\u{feff}'.len_utf8() } else { 0 };
    let body = &text[bom..];
    if body.trim_start().starts_with('[') {
        return deserialize_at(body, bom, "");
    }
    // JSONL: one song per non-blank line.
    let mut songs = Vec::new();
    let mut offset = bom;
    for (n, line) in body.split_inclusive('\n').enumerate() {
        if !line.trim().is_empty() {
            songs.push(deserialize_at(line, offset, &format!("line {}", n + 1))?);
        }
        offset += line.len();
    }
    Ok(songs)
}

fn deserialize_at<T: for<'de> Deserialize<'de>>(chunk: &str, base: usize, prefix: &str) -> Result<T, CorpusError> {
    let mut de = serde_json::Deserializer::from_str(chunk);
    let syntax = |inner: serde_json::Error| CorpusError::Syntax {
        offset: base + byte_offset(chunk, inner.line(), inner.column()),
        message: strip_position(&inner.to_string()),
    };
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            let path = match (prefix.is_empty(), path.as_str()) {
                (true, p) => p.to_owned(),
                (false, ".") => prefix.to_owned(),
                (false, p) => format!("{prefix}: {p}"),
            };
            CorpusError::Schema { path, message: strip_position(&inner.to_string()) }
        } else {
            syntax(inner)
        }
    })?;
    de.end().map_err(syntax)?;
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

/// serde_json reports 1-based line and column (column in bytes); convert to
/// a 0-based byte offset into `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Serialize a corpus as a pretty JSON array.
pub fn to_json(songs: &[AlignedSong]) -> String {
    let raw: Vec<RawSong> = songs.iter().map(RawSong::from).collect();
    serde_json::to_string_pretty(&raw).expect("corpus serializes")
}

/// Serialize a corpus as JSONL, one song per line.
pub fn to_jsonl(songs: &[AlignedSong]) -> String {
    songs.iter().map(|s| serde_json::to_string(&RawSong::from(s)).expect("song serializes") + "\n").collect()
}

/// Corpus-level counts of songs, sections, lines and English vocabulary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub songs: usize,
    pub total_sections: usize,
    pub unique_sections_kr: usize,
    pub unique_sections_en: usize,
    pub total_lines: usize,
    pub unique_lines_kr: usize,
    pub unique_lines_en: usize,
    pub vocab_en: usize,
}

fn stat_key(text: &str) -> String {
    nfc(text.trim())
}

/// Uniqueness is exact string equality after NFC and trimming (no case
/// folding). English vocabulary is the set of whitespace-separated tokens.
pub fn corpus_stats(corpus: &[AlignedSong]) -> CorpusStats {
    let mut lines_en = HashSet::new();
    let mut lines_kr = HashSet::new();
    let mut sections_en = HashSet::new();
    let mut sections_kr = HashSet::new();
    let mut vocab = HashSet::new();
    let mut stats = CorpusStats { songs: corpus.len(), ..Default::default() };
    for song in corpus {
        for section in &song.sections {
            stats.total_sections += 1;
            let en: Vec<String> = section.lines.iter().map(|l| stat_key(&l.en)).collect();
            let kr: Vec<String> = section.lines.iter().map(|l| stat_key(&l.kr)).collect();
            for l in &en {
                vocab.extend(l.split_whitespace().map(str::to_owned));
            }
            stats.total_lines += en.len();
            lines_en.extend(en.iter().cloned());
            lines_kr.extend(kr.iter().cloned());
            sections_en.insert(en);
            sections_kr.insert(kr);
        }
    }
    stats.unique_lines_en = lines_en.len();
    stats.unique_lines_kr = lines_kr.len();
    stats.unique_sections_en = sections_en.len();
    stats.unique_sections_kr = sections_kr.len();
    stats.vocab_en = vocab.len();
    stats
}

#[cfg(test)]
pub(crate) fn test_song(id: &str, sections: &[&[(&str, &str)]]) -> AlignedSong {
    let sections: Vec<Vec<(&str, &str)>> = sections.iter().map(|s| s.to_vec()).collect();
    AlignedSong::from_pairs(SongMeta::new(id, Genre::Kpop), &sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BY_TWO: &str = r#"{"song_id":"s1","artist":"A","track":"T","genre":"kpop","translation_status":"official","original_language":"kr","sections":[{"lines":[{"en":"a","kr":"가"},{"en":"b","kr":"나"}]},{"lines":[{"en":"c","kr":"다"},{"en":"d","kr":"라"}]}]}"#;

    #[test]
    fn parses_two_by_two() {
        let songs = parse_corpus(TWO_BY_TWO.as_bytes()).unwrap();
        assert_eq!(songs.len(), 1);
        assert_eq!(songs[0].section_count(), 2);
        assert_eq!(songs[0].line_count(), 4);
        assert_eq!(songs[0].sections[1].lines[0].line_index, 3);
    }

    #[test]
    fn array_and_jsonl_agree() {
        let arr = format!("[{TWO_BY_TWO}, {}]", TWO_BY_TWO.replace("s1", "s2"));
        let jsonl = format!("{TWO_BY_TWO}\n\n{}\n", TWO_BY_TWO.replace("s1", "s2"));
        assert_eq!(parse_corpus(arr.as_bytes()).unwrap(), parse_corpus(jsonl.as_bytes()).unwrap());
    }

    #[test]
    fn one_sided_line_names_section() {
        let broken = TWO_BY_TWO.replace(r#"{"en":"d","kr":"라"}"#, r#"{"en":"d"}"#);
        match parse_corpus(broken.as_bytes()).unwrap_err() {
            CorpusError::Alignment { song_id, section, line, rule } => {
                assert_eq!(song_id, "s1");
                assert_eq!(section, Some(2));
                assert_eq!(line, Some(4));
                assert_eq!(rule, Rule::OneSidedLine);
            }
            e => panic!("unexpected {e}"),
        }
        let checked = parse_corpus_lenient(broken.as_bytes()).unwrap();
        assert_eq!(checked[0].violations.len(), 1);
    }

    #[test]
    fn syntax_error_reports_byte_offset() {
        let text = "[{\"song_id\": }]";
        match parse_corpus(text.as_bytes()).unwrap_err() {
            CorpusError::Syntax { offset, .. } => assert_eq!(offset, 13),
            e => panic!("unexpected {e}"),
        }
        let jsonl = format!("{TWO_BY_TWO}\n{{\"song_id\": x}}\n");
        match parse_corpus(jsonl.as_bytes()).unwrap_err() {
            CorpusError::Syntax { offset, .. } => assert_eq!(offset, TWO_BY_TWO.len() + 1 + 12),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn schema_error_reports_field_path() {
        let bad = TWO_BY_TWO.replace("\"kpop\"", "\"jazz\"");
        match parse_corpus(bad.as_bytes()).unwrap_err() {
            CorpusError::Schema { path, .. } => assert_eq!(path, "line 1: genre"),
            e => panic!("unexpected {e}"),
        }
        let bad = format!("[{}]", TWO_BY_TWO.replace(r#""en":"c""#, r#""en":3"#));
        match parse_corpus(bad.as_bytes()).unwrap_err() {
            CorpusError::Schema { path, .. } => assert_eq!(path, "[0].sections[1].lines[0].en"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn validate_clean_and_broken() {
        let song = test_song("s", &[&[("a", "가"), ("b", "나")], &[("c", "다")]]);
        assert!(validate_alignment(&song).is_empty());

        let mut empty_kr = song.clone();
        empty_kr.sections[1].lines[0].kr = "  ".into();
        let v = validate_alignment(&empty_kr);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::NonEmptyLine);
        assert_eq!(v[0].line_index, Some(3));

        let mut gap = song.clone();
        gap.sections[1].section_index = 3;
        let v = validate_alignment(&gap);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::ContiguousSections);

        let mut no_lines = song.clone();
        no_lines.sections[1].lines.clear();
        assert_eq!(validate_alignment(&no_lines)[0].rule, Rule::EmptySection);

        let mut skipped = song;
        skipped.sections[0].lines[1].line_index = 5;
        assert!(validate_alignment(&skipped).iter().any(|v| v.rule == Rule::ContiguousLines));
    }

    #[test]
    fn nfc_on_load() {
        // "가" as conjoining jamo U+1100 U+1161
        let decomposed = TWO_BY_TWO.replace("가", "\u{1100}\u{1161}");
        let songs = parse_corpus(decomposed.as_bytes()).unwrap();
        assert_eq!(songs[0].sections[0].lines[0].kr, "가");
    }

    #[test]
    fn stats_empty_and_shared_section() {
        assert_eq!(corpus_stats(&[]), CorpusStats::default());
        let shared: &[(&str, &str)] = &[("la la", "라라"), ("oh", "오")];
        let a = test_song("a", &[shared, &[("hello there", "안녕")]]);
        let b = test_song("b", &[shared, &[("bye now", "잘가")]]);
        let s = corpus_stats(&[a, b]);
        assert_eq!(s.songs, 2);
        assert_eq!(s.total_sections, 4);
        assert_eq!(s.unique_sections_en, 3);
        assert_eq!(s.unique_sections_kr, 3);
        assert_eq!(s.total_lines, 6);
        assert_eq!(s.unique_lines_en, 4);
        // la, oh, hello, there, bye, now
        assert_eq!(s.vocab_en, 6);
    }
}
