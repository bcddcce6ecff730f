//! Pronouncing dictionary in the CMUdict text format.
//!
//! One entry per line: `word PH1 PH2 ...`. Alternate pronunciations carry a
//! `(2)`, `(3)` suffix on the word. Lines starting with `;;;` and trailing
//! `# ...` annotations are ignored. Words are case-folded on load, so both the
//! upper-case classic release and the lower-case packaged release load.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, LazyLock};

use thiserror::Error;

/// Subset of CMUdict (1,000 frequent words) compiled into the crate.
pub const EMBEDDED_SUBSET: &str = include_str!("../fixtures/cmudict-subset.dict");

/// Environment variable naming a dictionary file to load instead of the
/// embedded subset.
pub const DICT_ENV: &str = "LYR_DICT";

#[derive(Debug, Error)]
pub enum DictError {
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dictionary line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// ARPABET phones with stress digits retained (`AA1`).
pub type Pronunciation = Vec<String>;

#[derive(Debug, Clone, Default)]
pub struct PronouncingDict {
    entries: HashMap<String, Vec<Pronunciation>>,
}

static EMBEDDED: LazyLock<Arc<PronouncingDict>> =
    LazyLock::new(|| Arc::new(PronouncingDict::parse(EMBEDDED_SUBSET).expect("embedded dictionary is well formed")));

impl PronouncingDict {
    pub fn embedded() -> Arc<PronouncingDict> {
        Arc::clone(&EMBEDDED)
    }

    pub fn load(path: &Path) -> Result<Self, DictError> {
        let text = fs::read_to_string(path).map_err(|source| DictError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Explicit path if given, else `$LYR_DICT`, else the embedded subset.
    pub fn resolve(path: Option<&Path>) -> Result<Arc<Self>, DictError> {
        match path {
            Some(p) => Ok(Arc::new(Self::load(p)?)),
            None => match std::env::var_os(DICT_ENV) {
                Some(p) if !p.is_empty() => Ok(Arc::new(Self::load(Path::new(&p))?)),
                _ => Ok(Self::embedded()),
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self, DictError> {
        let mut entries: HashMap<String, Vec<Pronunciation>> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            if raw.starts_with(";;;") {
                continue;
            }
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line has a first field");
            let phones: Pronunciation = parts.map(str::to_owned).collect();
            if phones.is_empty() {
                return Err(DictError::Format { line: lineno + 1, reason: format!("entry {word:?} has no phones") });
            }
            let base = strip_variant(word).to_lowercase();
            entries.entry(base).or_default().push(phones);
        }
        Ok(Self { entries })
    }

    /// First listed pronunciation of a (case-folded) word.
    pub fn first(&self, word: &str) -> Option<&Pronunciation> {
        self.entries.get(word).and_then(|p| p.first())
    }

    pub fn pronunciations(&self, word: &str) -> &[Pronunciation] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words in sorted order.
    pub fn words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        w.sort_unstable();
        w
    }
}

fn strip_variant(word: &str) -> &str {
    match word.rfind('(') {
        Some(i) if word.ends_with(')') && word[i + 1..word.len() - 1].chars().all(|c| c.is_ascii_digit()) => &word[..i],
        _ => word,
    }
}

/// ARPABET vowels carry a stress digit; consonants never do.
pub fn is_vowel_phone(phone: &str) -> bool {
    phone.ends_with(|c: char| c.is_ascii_digit())
}

pub fn strip_stress(phone: &str) -> &str {
    phone.trim_end_matches(|c: char| c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_variants_comments_and_case() {
        let d = PronouncingDict::parse(";;; comment\nREAD  R IY1 D\nREAD(2)  R EH1 D\naalborg AO1 L B AO0 R G # place\n").unwrap();
        assert_eq!(d.pronunciations("read").len(), 2);
        assert_eq!(d.first("read").unwrap(), &vec!["R", "IY1", "D"]);
        assert_eq!(d.first("aalborg").unwrap().len(), 6);
    }

    #[test]
    fn rejects_entry_without_phones() {
        assert!(matches!(PronouncingDict::parse("hello\n"), Err(DictError::Format { line: 1, .. })));
    }

    #[test]
    fn embedded_subset_has_anchor_words() {
        let d = PronouncingDict::embedded();
        assert_eq!(d.len(), 1000);
        assert_eq!(d.first("change").unwrap(), &vec!["CH", "EY1", "N", "JH"]);
        assert_eq!(d.first("walking").unwrap(), &vec!["W", "AO1", "K", "IH0", "NG"]);
        assert_eq!(d.first("hello").unwrap().iter().filter(|p| is_vowel_phone(p)).count(), 2);
    }

    #[test]
    fn variant_suffix_only_when_numeric() {
        assert_eq!(strip_variant("a(2)"), "a");
        assert_eq!(strip_variant("(paren)"), "(paren)");
        assert_eq!(strip_stress("AO1"), "AO");
        assert!(!is_vowel_phone("NG"));
    }
}
