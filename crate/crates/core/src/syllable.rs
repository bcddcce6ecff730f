//! Syllable counting for Korean, English and mixed-script lyric lines.
//!
//! Korean: one syllable per precomposed Hangul block. English: vowel phones
//! of the first dictionary pronunciation, else a vowel-group heuristic.
//! Mixed lines are split into Hangul and non-Hangul runs and summed.

use std::sync::Arc;

use serde::Serialize;

use crate::dict::{is_vowel_phone, PronouncingDict};
use crate::hangul;
use crate::text::{self, Piece, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hangul,
    Dictionary,
    Heuristic,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Breakdown {
    pub token: String,
    pub count: usize,
    pub method: Method,
}

/// A syllable total together with the per-token contributions behind it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SyllableCount {
    pub value: usize,
    pub breakdown: Vec<Breakdown>,
}

impl SyllableCount {
    fn push(&mut self, token: impl Into<String>, count: usize, method: Method) {
        self.value += count;
        self.breakdown.push(Breakdown { token: token.into(), count, method });
    }

    fn extend(&mut self, other: SyllableCount) {
        self.value += other.value;
        self.breakdown.extend(other.breakdown);
    }
}

/// Hangul-block count of `text`; every other character contributes zero.
pub fn count_syllables_korean(text: &str) -> SyllableCount {
    let mut out = SyllableCount::default();
    for token in text.split_whitespace() {
        let n = hangul::count_syllable_blocks(token);
        out.push(token, n, if n > 0 { Method::Hangul } else { Method::Zero });
    }
    out
}

/// Vowel-group estimate for a lower-case word with no dictionary entry.
///
/// Vowels are a, e, i, o, u (plus accented forms) and y, except a
/// word-initial y followed by a vowel. A final consonant + e is silent
/// unless the word ends in consonant + "le". Any word with a letter has at
/// least one syllable.
pub fn heuristic_syllables(word: &str) -> usize {
    let letters: Vec<char> = word.chars().filter(|&c| text::is_latin_side_letter(c)).collect();
    if letters.is_empty() {
        return 0;
    }
    let vowel = vowel_mask(&letters);
    let mut groups = 0usize;
    let mut prev = false;
    for &v in &vowel {
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if silent_final_e(&letters, &vowel) {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

pub(crate) fn is_plain_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e'
            | 'i'
            | 'o'
            | 'u'
            | 'à'
            | 'á'
            | 'â'
            | 'ã'
            | 'ä'
            | 'å'
            | 'æ'
            | 'è'
            | 'é'
            | 'ê'
            | 'ë'
            | 'ì'
            | 'í'
            | 'î'
            | 'ï'
            | 'ò'
            | 'ó'
            | 'ô'
            | 'õ'
            | 'ö'
            | 'ø'
            | 'ù'
            | 'ú'
            | 'û'
            | 'ü'
    )
}

/// Per-letter vowel flags under the heuristic's rules.
pub(crate) fn vowel_mask(letters: &[char]) -> Vec<bool> {
    letters
        .iter()
        .enumerate()
        .map(|(i, &c)| match c {
            'y' | 'ý' | 'ÿ' => !(i == 0 && letters.get(1).is_some_and(|&n| is_plain_vowel(n))),
            _ => is_plain_vowel(c),
        })
        .collect()
}

pub(crate) fn silent_final_e(letters: &[char], vowel: &[bool]) -> bool {
    let n = letters.len();
    if n < 2 || letters[n - 1] != 'e' || vowel[n - 2] {
        return false;
    }
    // consonant + "le" keeps its syllable (table, simple)
    let consonant_le = letters[n - 2] == 'l' && n >= 3 && !vowel[n - 3];
    !consonant_le
}

/// English/Latin-script syllable counting backed by a pronouncing dictionary.
#[derive(Debug, Clone)]
pub struct SyllableCounter {
    dict: Arc<PronouncingDict>,
    exclude_parenthesized: bool,
}

impl Default for SyllableCounter {
    fn default() -> Self {
        Self::new(PronouncingDict::embedded())
    }
}

impl SyllableCounter {
    pub fn new(dict: Arc<PronouncingDict>) -> Self {
        Self { dict, exclude_parenthesized: false }
    }

    /// Drop parenthesized ad-libs before counting. Off by default.
    pub fn exclude_parenthesized(mut self, yes: bool) -> Self {
        self.exclude_parenthesized = yes;
        self
    }

    pub fn dict(&self) -> &Arc<PronouncingDict> {
        &self.dict
    }

    pub fn count_english(&self, text: &str) -> SyllableCount {
        let text = self.prepare(text);
        self.count_latin_run(&text)
    }

    /// Hangul runs by block count, everything else through the English path.
    pub fn count_line(&self, text: &str) -> SyllableCount {
        let text = self.prepare(text);
        let mut out = SyllableCount::default();
        for run in text::script_runs(&text) {
            match run {
                Run::Hangul(s) => out.push(s, s.chars().count(), Method::Hangul),
                Run::Other(s) => out.extend(self.count_latin_run(s)),
            }
        }
        out
    }

    pub fn count_korean(&self, text: &str) -> SyllableCount {
        count_syllables_korean(&self.prepare(text))
    }

    /// Dictionary count for a single lower-case word, if listed.
    pub fn dictionary_count(&self, word: &str) -> Option<usize> {
        self.dict.first(word).map(|p| p.iter().filter(|ph| is_vowel_phone(ph)).count())
    }

    fn prepare(&self, text: &str) -> String {
        if self.exclude_parenthesized {
            text::strip_parenthesized(text)
        } else {
            text.to_owned()
        }
    }

    fn count_latin_run(&self, text: &str) -> SyllableCount {
        let mut out = SyllableCount::default();
        for token in text.split_whitespace() {
            let pieces = text::pieces(token);
            if pieces.is_empty() {
                out.push(token, 0, Method::Zero);
                continue;
            }
            for piece in pieces {
                match piece {
                    Piece::SpelledLetter(c) => {
                        let n = if c == 'w' { 3 } else { 1 };
                        out.push(c.to_string(), n, Method::Heuristic);
                    }
                    Piece::Word(w) => self.count_word(&w, &mut out),
                    Piece::Number(d) => {
                        for w in text::number_words(&d) {
                            self.count_word(w, &mut out);
                        }
                    }
                }
            }
        }
        out
    }

    fn count_word(&self, word: &str, out: &mut SyllableCount) {
        if let Some(n) = self.dictionary_count(word).filter(|&n| n > 0) {
            out.push(word, n, Method::Dictionary);
            return;
        }
        if word.contains('\'') {
            let bare: String = word.chars().filter(|&c| c != '\'').collect();
            if let Some(n) = self.dictionary_count(&bare).filter(|&n| n > 0) {
                out.push(word, n, Method::Dictionary);
                return;
            }
        }
        out.push(word, heuristic_syllables(word), Method::Heuristic);
    }
}

/// Counts with the embedded dictionary.
pub fn count_syllables_english(text: &str) -> SyllableCount {
    SyllableCounter::default().count_english(text)
}

pub fn count_syllables_line(text: &str) -> SyllableCount {
    SyllableCounter::default().count_line(text)
}
