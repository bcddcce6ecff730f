//! Grapheme-to-phoneme conversion and phoneme distinct-2 repetition metrics.
//!
//! English words use the first dictionary pronunciation with stress digits
//! removed, falling back to greedy letter-to-sound rules. Hangul blocks are
//! split into jamo arithmetically and each jamo maps to one phone label; no
//! cross-syllable sound changes are modelled. Every line ends with `<eos>`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AlignedSong, Language};
use crate::dict::{strip_stress, PronouncingDict};
use crate::hangul::{self, JamoPosition};
use crate::num::{self, Scalar};
use crate::syllable::{silent_final_e, vowel_mask};
use crate::text::{self, Piece, Run};

pub const EOS: &str = "<eos>";

#[derive(Debug, Error)]
pub enum PhoneticsError {
    #[error("cannot read jamo table {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("jamo table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error("song {song_id}: no scorable sections")]
    NoScorableSections { song_id: String },
}

/// Phone labels for one or more lines, each line terminated by [`EOS`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PhonemeSequence {
    pub tokens: Vec<String>,
    pub line_count: usize,
}

impl PhonemeSequence {
    pub fn line(mut phones: Vec<String>) -> Self {
        phones.push(EOS.to_owned());
        Self { tokens: phones, line_count: 1 }
    }

    /// Concatenate sequences in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a PhonemeSequence>) -> Self {
        let mut out = Self::default();
        for p in parts {
            out.tokens.extend(p.tokens.iter().cloned());
            out.line_count += p.line_count;
        }
        out
    }

    pub fn phones(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| *t != EOS)
    }
}

const INITIAL_PHONES: [&str; 19] = ["G", "KK", "N", "D", "TT", "R", "M", "B", "PP", "S", "SS", "", "J", "JJ", "CH", "K", "T", "P", "H"];
const MEDIAL_PHONES: [&str; 21] =
    ["A", "AE", "YA", "YAE", "EO", "E", "YEO", "YE", "O", "WA", "WAE", "OE", "YO", "U", "WO", "WE", "WI", "YU", "EU", "UI", "I"];
const FINAL_PHONES: [&str; 28] = [
    "", "K", "K", "K", "N", "N", "N", "T", "L", "K", "M", "L", "L", "L", "P", "L", "M", "P", "P", "T", "T", "NG", "T", "T", "K", "T", "P",
    "T",
];

/// Jamo-to-phone table: 19 initials, 21 medials, 28 finals (index 0 = none).
/// An empty label means the jamo is silent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JamoTable {
    initial: Vec<String>,
    medial: Vec<String>,
    final_: Vec<String>,
}

impl Default for JamoTable {
    fn default() -> Self {
        let own = |t: &[&str]| t.iter().map(|s| s.to_string()).collect();
        Self { initial: own(&INITIAL_PHONES), medial: own(&MEDIAL_PHONES), final_: own(&FINAL_PHONES) }
    }
}

impl JamoTable {
    /// Apply overrides from a TSV file: `jamo<TAB>label` per line, where
    /// `jamo` is a conjoining jamo (U+1100 initials, U+1161 medials,
    /// U+11A8 finals) and `label` is upper-case ASCII or `-` for silent.
    /// Blank lines and `#` comments are ignored.
    pub fn with_overrides(mut self, tsv: &str) -> Result<Self, PhoneticsError> {
        for (i, raw) in tsv.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |reason: String| PhoneticsError::Table { line: i + 1, reason };
            let (jamo, label) = line.split_once('\t').ok_or_else(|| err("expected jamo<TAB>label".into()))?;
            let mut chars = jamo.trim().chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(err(format!("{jamo:?} is not a single jamo"))),
            };
            let (pos, idx) = hangul::jamo_slot(c).ok_or_else(|| err(format!("{c:?} is not a conjoining jamo")))?;
            let label = label.trim();
            let label = if label == "-" { "" } else { label };
            if !label.chars().all(|ch| ch.is_ascii_uppercase() || ch.is_ascii_digit()) || label == EOS {
                return Err(err(format!("invalid phone label {label:?}")));
            }
            let slot = match pos {
                JamoPosition::Initial => &mut self.initial,
                JamoPosition::Medial => &mut self.medial,
                JamoPosition::Final => &mut self.final_,
            };
            slot[idx as usize] = label.to_owned();
        }
        Ok(self)
    }

    pub fn load_overrides(self, path: &Path) -> Result<Self, PhoneticsError> {
        let text = fs::read_to_string(path).map_err(|source| PhoneticsError::Io { path: path.to_path_buf(), source })?;
        self.with_overrides(&text)
    }

    fn phones_for_block(&self, c: char, out: &mut Vec<String>) {
        if let Some(j) = hangul::decompose(c) {
            for label in [&self.initial[j.initial as usize], &self.medial[j.medial as usize], &self.final_[j.final_ as usize]] {
                if !label.is_empty() {
                    out.push(label.clone());
                }
            }
        }
    }
}

/// Greedy letter-to-sound conversion for words missing from the dictionary.
/// Each vowel group yields one vowel phone; a silent final e yields nothing.
pub fn letter_to_sound(word: &str) -> Vec<String> {
    let letters: Vec<char> = word.chars().filter(|&c| text::is_latin_side_letter(c)).map(fold_accent).collect();
    if letters.is_empty() {
        return Vec::new();
    }
    let vowel = vowel_mask(&letters);
    let end = if silent_final_e(&letters, &vowel) { letters.len() - 1 } else { letters.len() };
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < end {
        if vowel[i] {
            let mut j = i;
            while j < end && vowel[j] {
                j += 1;
            }
            let group: String = letters[i..j].iter().collect();
            out.push(vowel_group_phone(&group).to_owned());
            i = j;
            continue;
        }
        let next = letters.get(i + 1).copied().filter(|_| i + 1 < end);
        if let Some(n) = next {
            if let Some(p) = consonant_digraph(letters[i], n) {
                out.extend(p.iter().map(|s| s.to_string()));
                i += 2;
                continue;
            }
        }
        if i > 0 && letters[i - 1] == letters[i] && !vowel[i - 1] {
            i += 1;
            continue;
        }
        out.extend(consonant(letters[i], next).iter().map(|s| s.to_string()));
        i += 1;
    }
    out
}

fn fold_accent(c: char) -> char {
    match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'æ' => 'a',
        'è' | 'é' | 'ê' | 'ë' => 'e',
        'ì' | 'í' | 'î' | 'ï' => 'i',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' => 'o',
        'ù' | 'ú' | 'û' | 'ü' => 'u',
        'ý' | 'ÿ' => 'y',
        'ç' => 'c',
        'ñ' => 'n',
        _ => c,
    }
}

fn vowel_group_phone(group: &str) -> &'static str {
    match group {
        "ee" | "ea" | "ie" | "ey" => "IY",
        "oo" | "ue" | "ew" => "UW",
        "ou" | "ow" => "AW",
        "ai" | "ay" | "ei" => "EY",
        "oa" | "oe" => "OW",
        "oi" | "oy" => "OY",
        "au" | "aw" => "AO",
        _ => match group.chars().next() {
            Some('a') => "AE",
            Some('e') => "EH",
            Some('i') => "IH",
            Some('o') => "AA",
            Some('u') => "AH",
            Some('y') => "IY",
            _ => "AH",
        },
    }
}

fn consonant_digraph(a: char, b: char) -> Option<&'static [&'static str]> {
    Some(match (a, b) {
        ('c', 'h') => &["CH"],
        ('s', 'h') => &["SH"],
        ('n', 'g') => &["NG"],
        ('t', 'h') => &["TH"],
        ('p', 'h') => &["F"],
        ('w', 'h') => &["W"],
        ('c', 'k') => &["K"],
        ('q', 'u') => &["K", "W"],
        ('g', 'h') => &[],
        _ => return None,
    })
}

fn consonant(c: char, next: Option<char>) -> &'static [&'static str] {
    match c {
        'b' => &["B"],
        'c' if matches!(next, Some('e' | 'i' | 'y')) => &["S"],
        'c' | 'k' | 'q' => &["K"],
        'd' => &["D"],
        'f' => &["F"],
        'g' => &["G"],
        'h' => &["HH"],
        'j' => &["JH"],
        'l' => &["L"],
        'm' => &["M"],
        'n' => &["N"],
        'p' => &["P"],
        'r' => &["R"],
        's' => &["S"],
        't' => &["T"],
        'v' => &["V"],
        'w' => &["W"],
        'x' => &["K", "S"],
        'z' => &["Z"],
        _ => &[],
    }
}

/// Converts lyric lines to phone sequences for either language.
#[derive(Debug, Clone)]
pub struct Phonemizer {
    dict: Arc<PronouncingDict>,
    jamo: JamoTable,
}

impl Default for Phonemizer {
    fn default() -> Self {
        Self::new(PronouncingDict::embedded(), JamoTable::default())
    }
}

impl Phonemizer {
    pub fn new(dict: Arc<PronouncingDict>, jamo: JamoTable) -> Self {
        Self { dict, jamo }
    }

    pub fn english(&self, line: &str) -> PhonemeSequence {
        let mut phones = Vec::new();
        self.english_phones(line, &mut phones);
        PhonemeSequence::line(phones)
    }

    /// Hangul blocks through the jamo table; other runs via the English path.
    pub fn korean(&self, line: &str) -> PhonemeSequence {
        let mut phones = Vec::new();
        for run in text::script_runs(line) {
            match run {
                Run::Hangul(s) => s.chars().for_each(|c| self.jamo.phones_for_block(c, &mut phones)),
                Run::Other(s) => self.english_phones(s, &mut phones),
            }
        }
        PhonemeSequence::line(phones)
    }

    pub fn line(&self, line: &str, language: Language) -> PhonemeSequence {
        match language {
            Language::En => self.english(line),
            Language::Kr => self.korean(line),
        }
    }

    fn english_phones(&self, text: &str, out: &mut Vec<String>) {
        for token in text.split_whitespace() {
            for piece in text::pieces(token) {
                let word = match piece {
                    Piece::Word(w) => w,
                    Piece::SpelledLetter(c) => c.to_string(),
                    Piece::Number(_) => continue,
                };
                self.word_phones(&word, out);
            }
        }
    }

    fn word_phones(&self, word: &str, out: &mut Vec<String>) {
        let bare: String;
        let entry = match self.dict.first(word) {
            Some(p) => Some(p),
            None if word.contains('\'') => {
                bare = word.replace('\'', "");
                self.dict.first(&bare)
            }
            None => None,
        };
        match entry {
            Some(p) => out.extend(p.iter().map(|ph| strip_stress(ph).to_owned())),
            None => out.extend(letter_to_sound(word)),
        }
    }
}

pub fn phonemize_english(line: &str) -> PhonemeSequence {
    Phonemizer::default().english(line)
}

pub fn phonemize_korean(line: &str) -> PhonemeSequence {
    Phonemizer::default().korean(line)
}

/// Bigram counts of the concatenated stream: `(unique, total)`.
pub fn bigram_counts(stream: &[String]) -> (usize, usize) {
    let total = stream.len().saturating_sub(1);
    let unique: HashSet<(&str, &str)> = stream.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
    (unique.len(), total)
}

/// Phoneme distinct-2 of one section: unique over total bigrams of the
/// lines' concatenated streams (bigrams cross `<eos>`). `None` when the
/// stream has fewer than two tokens.
pub fn pho<F: Scalar>(section: &[PhonemeSequence]) -> Option<F> {
    let stream = PhonemeSequence::concat(section).tokens;
    let (unique, total) = bigram_counts(&stream);
    (total > 0).then(|| num::ratio(unique, total))
}

/// Per-section pho values with their mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhoProfileOf<F> {
    pub per_section: Vec<F>,
    pub pho_deg: F,
    pub pho_var: F,
}

impl<F: Scalar> PhoProfileOf<F> {
    /// `None` when no section was scorable.
    pub fn from_values(per_section: Vec<F>) -> Option<Self> {
        let (pho_deg, pho_var) = num::mean_std(&per_section)?;
        Some(Self { per_section, pho_deg, pho_var })
    }
}

/// Pho of every scorable section of one side of a song.
pub fn section_phos<F: Scalar>(song: &AlignedSong, language: Language, g2p: &Phonemizer) -> Vec<F> {
    song.sections
        .iter()
        .filter_map(|section| {
            let seqs: Vec<PhonemeSequence> = section.lines.iter().map(|l| g2p.line(l.text(language), language)).collect();
            pho(&seqs)
        })
        .collect()
}

pub fn pho_profile<F: Scalar>(song: &AlignedSong, language: Language, g2p: &Phonemizer) -> Result<PhoProfileOf<F>, PhoneticsError> {
    PhoProfileOf::from_values(section_phos(song, language, g2p))
        .ok_or_else(|| PhoneticsError::NoScorableSections { song_id: song.song_id.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{test_song, LinePair};
    use approx::assert_abs_diff_eq;

    fn toks(s: &PhonemeSequence) -> Vec<&str> {
        s.tokens.iter().map(String::as_str).collect()
    }

    #[test]
    fn english_anchors() {
        assert_eq!(toks(&phonemize_english("change")), ["CH", "EY", "N", "JH", EOS]);
        assert_eq!(toks(&phonemize_english("walking")), ["W", "AO", "K", "IH", "NG", EOS]);
        assert_eq!(toks(&phonemize_english("")), [EOS]);
        assert_eq!(toks(&phonemize_english("!!! 42")), [EOS]);
    }

    #[test]
    fn korean_anchors() {
        assert_eq!(toks(&phonemize_korean("숨")), ["S", "U", "M", EOS]);
        assert_eq!(toks(&phonemize_korean("안")), ["A", "N", EOS]);
        assert_eq!(toks(&phonemize_korean("")), [EOS]);
        assert_eq!(toks(&phonemize_korean("안 change")), ["A", "N", "CH", "EY", "N", "JH", EOS]);
    }

    #[test]
    fn letter_to_sound_fallback() {
        assert_eq!(letter_to_sound("woah"), ["W", "OW", "HH"]);
        assert_eq!(letter_to_sound("shing"), ["SH", "IH", "NG"]);
        assert_eq!(letter_to_sound("brrr"), ["B", "R"]);
        assert_eq!(letter_to_sound("imma"), ["IH", "M", "AE"]);
        // silent final e
        assert_eq!(letter_to_sound("blaze"), ["B", "L", "AE", "Z"]);
    }

    #[test]
    fn na_na_fixture_is_four_ninths() {
        let g2p = Phonemizer::default();
        let section = [g2p.english("na na"), g2p.english("na na")];
        assert_eq!(bigram_counts(&PhonemeSequence::concat(&section).tokens), (4, 9));
        assert_abs_diff_eq!(pho::<f64>(&section).unwrap(), 4.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn unscorable_sections() {
        assert_eq!(pho::<f64>(&[phonemize_english("")]), None);
        assert_eq!(pho::<f64>(&[]), None);
        assert_eq!(pho::<f64>(&[phonemize_english("change")]), Some(1.0));
    }

    #[test]
    fn constant_sections_have_zero_spread() {
        let song = test_song("s", &[&[("la la la", "la la la")], &[("la la la", "la la la")], &[("la la la", "la la la")]]);
        let p: PhoProfileOf<f64> = pho_profile(&song, Language::En, &Phonemizer::default()).unwrap();
        assert_eq!(p.per_section.len(), 3);
        assert_eq!(p.pho_var, 0.0);
    }

    #[test]
    fn profile_of_two_values() {
        let p = PhoProfileOf::from_values(vec![0.5f64, 0.7]).unwrap();
        assert_abs_diff_eq!(p.pho_deg, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pho_var, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn no_scorable_sections_is_an_error() {
        let mut song = test_song("empty", &[&[("x", "y")]]);
        song.sections[0].lines = vec![LinePair { en: "!!".into(), kr: "..".into(), line_index: 1 }];
        let err = pho_profile::<f64>(&song, Language::En, &Phonemizer::default()).unwrap_err();
        assert!(matches!(err, PhoneticsError::NoScorableSections { .. }));
    }

    #[test]
    fn jamo_overrides() {
        let t = JamoTable::default().with_overrides("# comment\n\u{1109}\tSH\n\u{11B7}\t-\n").unwrap();
        let g2p = Phonemizer::new(PronouncingDict::embedded(), t);
        assert_eq!(toks(&g2p.korean("숨")), ["SH", "U", EOS]);
        assert!(JamoTable::default().with_overrides("ㅅ\tS\n").is_err());
        assert!(JamoTable::default().with_overrides("\u{1109}\ts\n").is_err());
        assert!(JamoTable::default().with_overrides("\u{1109} S\n").is_err());
    }
}
