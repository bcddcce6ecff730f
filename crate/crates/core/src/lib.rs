//! Bilingual (Korean–English) lyric corpora and the measurements used to
//! study singable translation: semantic similarity, phoneme repetition,
//! syllable-count distance and line coherence, plus `<SYLn>`-annotated
//! training data construction.
//!
//! Metric kernels are generic over the float type (`f32` or `f64`); the
//! aliases below fix them to [`Real`].

pub mod corpus;
pub mod dict;
pub mod hangul;
pub mod num;
pub mod phonetics;
pub mod preprocess;
pub mod report;
pub mod scd;
pub mod semantics;
pub mod syllable;
pub mod text;

/// Scalar used by the concrete API.
pub type Real = f64;

pub type PhoProfile = phonetics::PhoProfileOf<Real>;
pub type ScdReport = scd::ScdReport<Real>;
pub type CorpusScd = scd::CorpusScd<Real>;
pub type ScdRow = scd::ScdRow<Real>;

pub use corpus::{AlignedSong, CorpusError, CorpusStats, Genre, Language, LinePair, Section, TranslationStatus, Violation};
pub use dict::PronouncingDict;
pub use num::Scalar;
pub use phonetics::{PhonemeSequence, Phonemizer};
pub use preprocess::{Scheme, SylMode, TrainingPair};
pub use report::{MetricReport, Variant};
pub use scd::CountPairSeries;
pub use syllable::{SyllableCount, SyllableCounter};
