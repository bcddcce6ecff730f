//! Text normalization and word splitting shared by the syllable counter and
//! the phonemizer.

use unicode_normalization::UnicodeNormalization;

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Any Hangul letter: precomposed blocks, conjoining jamo, compatibility jamo.
pub fn is_hangul_letter(c: char) -> bool {
    matches!(c as u32,
        0xAC00..=0xD7A3 | 0x1100..=0x11FF | 0x3130..=0x318F | 0xA960..=0xA97F | 0xD7B0..=0xD7FF)
}

/// Letters handled by the English path (everything alphabetic except Hangul).
pub fn is_latin_side_letter(c: char) -> bool {
    c.is_alphabetic() && !is_hangul_letter(c)
}

/// Key used to decide whether an aligned pair was left untranslated:
/// NFC, lower-cased, punctuation/symbols dropped, whitespace collapsed.
pub fn comparison_key(text: &str) -> String {
    let folded: String = nfc(text).chars().flat_map(char::to_lowercase).map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Replace every parenthesized span (nesting allowed) by a single space.
/// An unmatched `)` is kept; an unmatched `(` drops the rest of the text.
pub fn strip_parenthesized(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '(' => {
                if depth == 0 {
                    out.push(' ');
                }
                depth += 1;
            }
            ')' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Maximal runs of precomposed Hangul vs. everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Run<'a> {
    Hangul(&'a str),
    Other(&'a str),
}

pub fn script_runs(text: &str) -> Vec<Run<'_>> {
    let mut runs = Vec::new();
    let mut start = 0;
    let mut current: Option<bool> = None;
    for (i, c) in text.char_indices() {
        let h = crate::hangul::is_syllable(c);
        match current {
            Some(prev) if prev != h => {
                runs.push(make_run(&text[start..i], prev));
                start = i;
            }
            _ => {}
        }
        current = Some(h);
    }
    if let Some(h) = current {
        runs.push(make_run(&text[start..], h));
    }
    runs
}

fn make_run(s: &str, hangul: bool) -> Run<'_> {
    if hangul {
        Run::Hangul(s)
    } else {
        Run::Other(s)
    }
}

/// One countable piece of an English whitespace token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    /// Lower-cased word, internal apostrophes kept (`i'll`).
    Word(String),
    /// A lone letter from a hyphen-spelled token such as `L-O-V-E`.
    SpelledLetter(char),
    /// A run of ASCII digits.
    Number(String),
}

/// Split a whitespace token into pieces: hyphen-separated parts, then letter
/// and digit runs inside each part. Punctuation is discarded.
pub fn pieces(token: &str) -> Vec<Piece> {
    let token = token.replace(['\u{2019}', '\u{2018}', '`'], "'");
    let parts: Vec<&str> = token
        .split(['-', '\u{2010}', '\u{2011}', '\u{2013}', '\u{2014}', '/'])
        .filter(|p| p.chars().any(|c| is_latin_side_letter(c) || c.is_ascii_digit()))
        .collect();
    let spelled = parts.len() > 1;
    let mut out = Vec::new();
    for part in parts {
        let mut word = String::new();
        let mut digits = String::new();
        let chars: Vec<char> = part.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            if is_latin_side_letter(c) {
                flush_digits(&mut digits, &mut out);
                word.extend(c.to_lowercase());
            } else if c.is_ascii_digit() {
                flush_word(&mut word, &mut out, false);
                digits.push(c);
            } else if c == '\'' && !word.is_empty() && chars.get(i + 1).is_some_and(|n| is_latin_side_letter(*n)) {
                word.push('\'');
            } else {
                flush_word(&mut word, &mut out, false);
                flush_digits(&mut digits, &mut out);
            }
        }
        flush_digits(&mut digits, &mut out);
        flush_word(&mut word, &mut out, spelled);
    }
    out
}

fn flush_word(word: &mut String, out: &mut Vec<Piece>, spelled: bool) {
    if word.is_empty() {
        return;
    }
    let w = std::mem::take(word);
    let mut it = w.chars();
    match (it.next(), it.next()) {
        (Some(c), None) if spelled => out.push(Piece::SpelledLetter(c)),
        _ => out.push(Piece::Word(w)),
    }
}

fn flush_digits(digits: &mut String, out: &mut Vec<Piece>) {
    if !digits.is_empty() {
        out.push(Piece::Number(std::mem::take(digits)));
    }
}

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
const SCALES: [(u64, &str); 3] = [(1_000_000_000, "billion"), (1_000_000, "million"), (1_000, "thousand")];

/// English number words for a digit string. Values with a leading zero or
/// above 999,999,999,999 are read digit by digit.
pub fn number_words(digits: &str) -> Vec<&'static str> {
    let by_digit = || digits.bytes().map(|b| ONES[(b - b'0') as usize]).collect();
    if digits.len() > 1 && digits.starts_with('0') {
        return by_digit();
    }
    match digits.parse::<u64>() {
        Ok(n) if n < 1_000_000_000_000 => {
            let mut out = Vec::new();
            cardinal(n, &mut out);
            out
        }
        _ => by_digit(),
    }
}

fn cardinal(mut n: u64, out: &mut Vec<&'static str>) {
    if n == 0 {
        out.push(ONES[0]);
        return;
    }
    for (scale, name) in SCALES {
        if n >= scale {
            below_thousand(n / scale, out);
            out.push(name);
            n %= scale;
        }
    }
    if n > 0 {
        below_thousand(n, out);
    }
}

fn below_thousand(n: u64, out: &mut Vec<&'static str>) {
    debug_assert!(n < 1000);
    let (h, rest) = (n / 100, n % 100);
    if h > 0 {
        out.push(ONES[h as usize]);
        out.push("hundred");
    }
    if rest >= 20 {
        out.push(TENS[(rest / 10) as usize]);
        if rest % 10 > 0 {
            out.push(ONES[(rest % 10) as usize]);
        }
    } else if rest > 0 {
        out.push(ONES[rest as usize]);
    }
}
