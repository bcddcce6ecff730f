//! Per-genre aggregation of song metrics, and per-line similarity data for
//! density plots.
//!
//! Every metric is computed per song first. By default a genre row is the
//! unweighted mean over its songs; in pooled mode lines (or sections, or
//! line pairs) of all songs in the genre are aggregated directly.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AlignedSong, Genre, Language, TranslationStatus};
use crate::num;
use crate::phonetics::{section_phos, Phonemizer};
use crate::scd::{self, CountPairSeries};
use crate::semantics::{
    coherence_scores, filter_untranslated, semantic_report, BackendError, CoherenceScorer, EmbeddingBackend, SemanticsError,
    TranslationBackend,
};
use crate::syllable::SyllableCounter;
use crate::Real;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("song {song_id}: {source}")]
    Semantics {
        song_id: String,
        #[source]
        source: SemanticsError,
    },
    #[error("metric {0} requested but no backend configured for it")]
    MissingBackend(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// All lines.
    Included,
    /// Untranslated lines removed.
    Excluded,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Included, Variant::Excluded];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Included => "included",
            Variant::Excluded => "excluded",
        }
    }
}

/// Which metric families to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSet {
    pub sem: bool,
    pub pho: bool,
    pub scd: bool,
    pub nsp: bool,
}

impl MetricSet {
    pub const ALL: MetricSet = MetricSet { sem: true, pho: true, scd: true, nsp: true };
    pub const NONE: MetricSet = MetricSet { sem: false, pho: false, scd: false, nsp: false };
}

/// Services and tools used to score songs. Semantic and coherence backends
/// are only needed when those metrics are selected.
#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub embedding: Option<&'a dyn EmbeddingBackend>,
    pub translation: Option<&'a dyn TranslationBackend>,
    pub coherence: Option<&'a dyn CoherenceScorer>,
    pub phonemizer: &'a Phonemizer,
    pub counter: &'a SyllableCounter,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub metrics: MetricSet,
    pub variants: Vec<Variant>,
    pub pooled: bool,
    /// Keep only songs with an official translation.
    pub official_only: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { metrics: MetricSet::ALL, variants: Variant::BOTH.to_vec(), pooled: false, official_only: false }
    }
}

/// Everything measured on one song under one variant. Raw per-line and
/// per-section values are kept for pooled aggregation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SongMetrics {
    pub song_id: String,
    pub genre: Genre,
    pub variant: Variant,
    pub n_lines: usize,
    pub excluded_lines: usize,
    pub sem_line: Option<Real>,
    pub sem_sec: Option<Real>,
    pub pho_deg_en: Option<Real>,
    pub pho_deg_kr: Option<Real>,
    pub pho_var_en: Option<Real>,
    pub pho_var_kr: Option<Real>,
    pub scd: Option<Real>,
    pub error_rate: Option<Real>,
    pub nsp: Option<Real>,
    #[serde(skip)]
    pub line_sts: Vec<Real>,
    #[serde(skip)]
    pub section_sts: Vec<(usize, Real)>,
    #[serde(skip)]
    pub section_pho_en: Vec<Real>,
    #[serde(skip)]
    pub section_pho_kr: Vec<Real>,
    #[serde(skip)]
    pub count_pairs: CountPairSeries,
    #[serde(skip)]
    pub nsp_scores: Vec<Real>,
}

fn semantic_error(song_id: &str, source: impl Into<SemanticsError>) -> ReportError {
    ReportError::Semantics { song_id: song_id.to_owned(), source: source.into() }
}

/// Score one song. The excluded variant scores every metric on the song
/// with untranslated lines removed.
pub fn song_metrics(song: &AlignedSong, variant: Variant, backends: &Backends<'_>, metrics: MetricSet) -> Result<SongMetrics, ReportError> {
    let (scored, excluded) = match variant {
        Variant::Included => (song.clone(), Vec::new()),
        Variant::Excluded => filter_untranslated(song),
    };
    let mut m = SongMetrics {
        song_id: song.song_id.clone(),
        genre: song.genre,
        variant,
        n_lines: scored.line_count(),
        excluded_lines: excluded.len(),
        sem_line: None,
        sem_sec: None,
        pho_deg_en: None,
        pho_deg_kr: None,
        pho_var_en: None,
        pho_var_kr: None,
        scd: None,
        error_rate: None,
        nsp: None,
        line_sts: Vec::new(),
        section_sts: Vec::new(),
        section_pho_en: Vec::new(),
        section_pho_kr: Vec::new(),
        count_pairs: CountPairSeries::new(),
        nsp_scores: Vec::new(),
    };
    if metrics.sem {
        let emb = backends.embedding.ok_or(ReportError::MissingBackend("sem"))?;
        let tr = backends.translation.ok_or(ReportError::MissingBackend("sem"))?;
        match semantic_report(&scored, emb, tr, false) {
            Ok(r) => {
                m.sem_line = Some(r.sem_line);
                m.sem_sec = Some(r.sem_sec);
                m.line_sts = r.per_line_sts;
                m.section_sts = r.per_section;
            }
            Err(SemanticsError::NoLines(_)) => log::info!("song {} ({}): no lines left to score", song.song_id, variant.as_str()),
            Err(e) => return Err(semantic_error(&song.song_id, e)),
        }
    }
    if metrics.pho {
        m.section_pho_en = section_phos(&scored, Language::En, backends.phonemizer);
        m.section_pho_kr = section_phos(&scored, Language::Kr, backends.phonemizer);
        (m.pho_deg_en, m.pho_var_en) = num::mean_std(&m.section_pho_en).unzip();
        (m.pho_deg_kr, m.pho_var_kr) = num::mean_std(&m.section_pho_kr).unzip();
    }
    if metrics.scd {
        // Korean original as reference, English lyric as the candidate.
        let kr: Vec<&str> = scored.lines().map(|l| l.kr.as_str()).collect();
        let en: Vec<&str> = scored.lines().map(|l| l.en.as_str()).collect();
        m.count_pairs = scd::count_series(backends.counter, &kr, &en);
        if let Ok(r) = scd::scd_report::<Real>(&m.count_pairs) {
            m.scd = Some(r.scd);
            m.error_rate = Some(r.error_rate);
        }
    }
    if metrics.nsp {
        let scorer = backends.coherence.ok_or(ReportError::MissingBackend("nsp"))?;
        let en: Vec<&str> = scored.lines().map(|l| l.en.as_str()).collect();
        match coherence_scores(&en, scorer) {
            Ok(scores) => {
                m.nsp = num::mean(&scores);
                m.nsp_scores = scores;
            }
            Err(SemanticsError::NeedTwoLines(_)) => {}
            Err(e) => return Err(semantic_error(&song.song_id, e)),
        }
    }
    Ok(m)
}

/// Metrics of every song under every requested variant, ordered by
/// song_id then variant regardless of evaluation order.
pub fn per_song_metrics(corpus: &[AlignedSong], backends: &Backends<'_>, options: &ReportOptions) -> Result<Vec<SongMetrics>, ReportError> {
    let songs: Vec<&AlignedSong> =
        corpus.iter().filter(|s| !options.official_only || s.translation_status == TranslationStatus::Official).collect();
    let jobs: Vec<(&AlignedSong, Variant)> = songs.iter().flat_map(|s| options.variants.iter().map(move |&v| (*s, v))).collect();
    let mut out = jobs.par_iter().map(|(song, v)| song_metrics(song, *v, backends, options.metrics)).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.song_id.cmp(&b.song_id).then(a.variant.cmp(&b.variant)));
    Ok(out)
}

/// One aggregated (genre, variant) row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub genre: Genre,
    pub variant: Variant,
    pub sem_line: Option<Real>,
    pub sem_sec: Option<Real>,
    pub pho_deg_en: Option<Real>,
    pub pho_deg_kr: Option<Real>,
    pub pho_var_en: Option<Real>,
    pub pho_var_kr: Option<Real>,
    pub scd: Option<Real>,
    pub error_rate: Option<Real>,
    pub nsp: Option<Real>,
    pub songs: usize,
    pub lines: usize,
    pub excluded_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub pooled: bool,
    pub rows: Vec<MetricRow>,
}

pub const REPORT_CSV_HEADER: &str =
    "genre,variant,sem_line,sem_sec,pho_deg_en,pho_deg_kr,pho_var_en,pho_var_kr,scd,error_rate,nsp,songs,lines,excluded_lines";

/// Quote a CSV field when it holds a comma, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn opt(v: Option<Real>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.genre,
                r.variant.as_str(),
                opt(r.sem_line),
                opt(r.sem_sec),
                opt(r.pho_deg_en),
                opt(r.pho_deg_kr),
                opt(r.pho_var_en),
                opt(r.pho_var_kr),
                opt(r.scd),
                opt(r.error_rate),
                opt(r.nsp),
                r.songs,
                r.lines,
                r.excluded_lines
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn row(&self, genre: Genre, variant: Variant) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.genre == genre && r.variant == variant)
    }
}

fn mean_of(songs: &[&SongMetrics], f: impl Fn(&SongMetrics) -> Option<Real>) -> Option<Real> {
    let vals: Vec<Real> = songs.iter().filter_map(|s| f(s)).collect();
    num::mean(&vals)
}

fn aggregate(genre: Genre, variant: Variant, songs: &[&SongMetrics], pooled: bool) -> MetricRow {
    let mut row = MetricRow {
        genre,
        variant,
        sem_line: None,
        sem_sec: None,
        pho_deg_en: None,
        pho_deg_kr: None,
        pho_var_en: None,
        pho_var_kr: None,
        scd: None,
        error_rate: None,
        nsp: None,
        songs: songs.len(),
        lines: songs.iter().map(|s| s.n_lines).sum(),
        excluded_lines: songs.iter().map(|s| s.excluded_lines).sum(),
    };
    if pooled {
        let collect = |f: fn(&SongMetrics) -> &[Real]| songs.iter().flat_map(|s| f(s).iter().copied()).collect::<Vec<Real>>();
        row.sem_line = num::line_mean(&collect(|s| &s.line_sts));
        let sections: Vec<(usize, Real)> = songs.iter().flat_map(|s| s.section_sts.iter().copied()).collect();
        row.sem_sec = num::size_weighted(&sections);
        (row.pho_deg_en, row.pho_var_en) = num::mean_std(&collect(|s| &s.section_pho_en)).unzip();
        (row.pho_deg_kr, row.pho_var_kr) = num::mean_std(&collect(|s| &s.section_pho_kr)).unzip();
        let mut pairs = CountPairSeries::new();
        songs.iter().for_each(|s| pairs.extend_from(&s.count_pairs));
        row.scd = scd::scd(&pairs).ok();
        row.error_rate = scd::error_rate(&pairs).ok();
        row.nsp = num::mean(&collect(|s| &s.nsp_scores));
    } else {
        row.sem_line = mean_of(songs, |s| s.sem_line);
        row.sem_sec = mean_of(songs, |s| s.sem_sec);
        row.pho_deg_en = mean_of(songs, |s| s.pho_deg_en);
        row.pho_deg_kr = mean_of(songs, |s| s.pho_deg_kr);
        row.pho_var_en = mean_of(songs, |s| s.pho_var_en);
        row.pho_var_kr = mean_of(songs, |s| s.pho_var_kr);
        row.scd = mean_of(songs, |s| s.scd);
        row.error_rate = mean_of(songs, |s| s.error_rate);
        row.nsp = mean_of(songs, |s| s.nsp);
    }
    row
}

/// Group per-song metrics into (genre, variant) rows, genres in their
/// declaration order.
pub fn aggregate_rows(per_song: &[SongMetrics], variants: &[Variant], pooled: bool) -> MetricReport {
    let mut rows = Vec::new();
    for genre in Genre::ALL {
        for &variant in variants {
            let bucket: Vec<&SongMetrics> = per_song.iter().filter(|s| s.genre == genre && s.variant == variant).collect();
            if !bucket.is_empty() {
                rows.push(aggregate(genre, variant, &bucket, pooled));
            }
        }
    }
    MetricReport { pooled, rows }
}

pub fn genre_report(corpus: &[AlignedSong], backends: &Backends<'_>, options: &ReportOptions) -> Result<MetricReport, ReportError> {
    let per_song = per_song_metrics(corpus, backends, options)?;
    for genre in Genre::ALL {
        let present = corpus.iter().any(|s| s.genre == genre);
        if present && !per_song.iter().any(|s| s.genre == genre) {
            log::warn!("genre {genre}: no songs left after filtering, row omitted");
        }
    }
    Ok(aggregate_rows(&per_song, &options.variants, options.pooled))
}

pub const SONG_CSV_HEADER: &str =
    "song_id,genre,variant,sem_line,sem_sec,pho_deg_en,pho_deg_kr,pho_var_en,pho_var_kr,scd,error_rate,nsp,lines,excluded_lines";

pub fn song_metrics_csv(per_song: &[SongMetrics]) -> String {
    let mut out = String::from(SONG_CSV_HEADER);
    out.push('\n');
    for s in per_song {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&s.song_id),
            s.genre,
            s.variant.as_str(),
            opt(s.sem_line),
            opt(s.sem_sec),
            opt(s.pho_deg_en),
            opt(s.pho_deg_kr),
            opt(s.pho_var_en),
            opt(s.pho_var_kr),
            opt(s.scd),
            opt(s.error_rate),
            opt(s.nsp),
            s.n_lines,
            s.excluded_lines
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub genre: Genre,
    pub variant: Variant,
    pub sts: Real,
}

pub const DENSITY_CSV_HEADER: &str = "genre,variant,sts";

/// One row per scored line: its genre, variant and similarity. Songs in
/// song_id order, lines in line order.
pub fn density_data(
    corpus: &[AlignedSong],
    embedding: &dyn EmbeddingBackend,
    translation: &dyn TranslationBackend,
    variants: &[Variant],
) -> Result<Vec<DensityRow>, ReportError> {
    let mut order: Vec<&AlignedSong> = corpus.iter().collect();
    order.sort_by(|a, b| a.song_id.cmp(&b.song_id));
    let per_song = order
        .par_iter()
        .map(|song| {
            let mut rows = Vec::new();
            for &variant in variants {
                match semantic_report(song, embedding, translation, variant == Variant::Excluded) {
                    Ok(r) => rows.extend(r.per_line_sts.into_iter().map(|sts| DensityRow { genre: song.genre, variant, sts })),
                    Err(SemanticsError::NoLines(_)) => {}
                    Err(e) => return Err(semantic_error(&song.song_id, e)),
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>, ReportError>>()?;
    Ok(per_song.into_iter().flatten().collect())
}

pub fn density_csv(rows: &[DensityRow]) -> String {
    let mut out = String::from(DENSITY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.genre, r.variant.as_str(), r.sts);
    }
    out
}

impl From<BackendError> for ReportError {
    fn from(e: BackendError) -> Self {
        ReportError::Semantics { song_id: String::new(), source: e.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{test_song, SongMeta};
    use crate::semantics::{IdentityTranslator, StubCoherence, StubEmbedding};
    use approx::assert_abs_diff_eq;

    struct Kit {
        emb: StubEmbedding,
        tr: IdentityTranslator,
        nsp: StubCoherence,
        g2p: Phonemizer,
        counter: SyllableCounter,
    }

    impl Kit {
        fn new() -> Self {
            Self {
                emb: StubEmbedding::default(),
                tr: IdentityTranslator,
                nsp: StubCoherence::default(),
                g2p: Phonemizer::default(),
                counter: SyllableCounter::default(),
            }
        }

        fn backends(&self) -> Backends<'_> {
            Backends {
                embedding: Some(&self.emb),
                translation: Some(&self.tr),
                coherence: Some(&self.nsp),
                phonemizer: &self.g2p,
                counter: &self.counter,
            }
        }
    }

    fn songs() -> Vec<AlignedSong> {
        vec![
            test_song("b", &[&[("You don't know me", "You don't know me"), ("I do not know you", "나는 너를 몰라")], &[("hello", "안녕")]]),
            test_song("a", &[&[("I'll stray off the path I'm walking", "하늘을 피해 숨지"), ("sing it", "노래해")]]),
        ]
    }

    #[test]
    fn rows_are_means_of_song_values() {
        let kit = Kit::new();
        let corpus = songs();
        let opts = ReportOptions::default();
        let per_song = per_song_metrics(&corpus, &kit.backends(), &opts).unwrap();
        assert_eq!(per_song.iter().map(|s| s.song_id.as_str()).collect::<Vec<_>>(), ["a", "a", "b", "b"]);
        let report = genre_report(&corpus, &kit.backends(), &opts).unwrap();
        assert_eq!(report.rows.len(), 2);
        let inc = report.row(Genre::Kpop, Variant::Included).unwrap();
        let a = &per_song[0];
        let b = &per_song[2];
        assert_abs_diff_eq!(inc.sem_line.unwrap(), (a.sem_line.unwrap() + b.sem_line.unwrap()) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inc.scd.unwrap(), (a.scd.unwrap() + b.scd.unwrap()) / 2.0, epsilon = 1e-12);
        assert_eq!((inc.songs, inc.lines, inc.excluded_lines), (2, 5, 0));
        let exc = report.row(Genre::Kpop, Variant::Excluded).unwrap();
        assert_eq!((exc.lines, exc.excluded_lines), (4, 1));
        assert!(exc.sem_line.unwrap() <= inc.sem_line.unwrap());
    }

    #[test]
    fn identical_lines_give_unit_similarity() {
        let kit = Kit::new();
        let corpus = vec![test_song("x", &[&[("same line", "same line"), ("another", "another")]])];
        let opts = ReportOptions { variants: vec![Variant::Included], ..Default::default() };
        let report = genre_report(&corpus, &kit.backends(), &opts).unwrap();
        assert_abs_diff_eq!(report.rows[0].sem_line.unwrap(), 1.0, epsilon = 1e-12);
        // every line excluded: no similarity, but the row still exists
        let opts = ReportOptions { variants: vec![Variant::Excluded], ..Default::default() };
        let report = genre_report(&corpus, &kit.backends(), &opts).unwrap();
        assert_eq!(report.rows[0].sem_line, None);
    }

    #[test]
    fn pho_only_needs_no_backends() {
        let kit = Kit::new();
        let b = Backends { embedding: None, translation: None, coherence: None, phonemizer: &kit.g2p, counter: &kit.counter };
        let opts = ReportOptions { metrics: MetricSet { pho: true, ..MetricSet::NONE }, ..Default::default() };
        let report = genre_report(&songs(), &b, &opts).unwrap();
        assert!(report.rows[0].pho_deg_en.is_some());
        assert!(report.rows[0].sem_line.is_none());
        let opts = ReportOptions { metrics: MetricSet { sem: true, ..MetricSet::NONE }, ..Default::default() };
        assert!(matches!(genre_report(&songs(), &b, &opts), Err(ReportError::MissingBackend("sem"))));
    }

    #[test]
    fn official_only_and_genre_order() {
        let kit = Kit::new();
        let mut corpus = songs();
        corpus[0].genre = Genre::Theatre;
        corpus[1].translation_status = TranslationStatus::Unofficial;
        let opts = ReportOptions { official_only: true, variants: vec![Variant::Included], ..Default::default() };
        let report = genre_report(&corpus, &kit.backends(), &opts).unwrap();
        assert_eq!(report.rows.iter().map(|r| r.genre).collect::<Vec<_>>(), [Genre::Theatre]);
    }

    #[test]
    fn pooled_weights_lines() {
        let kit = Kit::new();
        let corpus = songs();
        let opts = ReportOptions { pooled: true, variants: vec![Variant::Included], ..Default::default() };
        let per_song = per_song_metrics(&corpus, &kit.backends(), &opts).unwrap();
        let report = genre_report(&corpus, &kit.backends(), &opts).unwrap();
        let all: Vec<Real> = per_song.iter().flat_map(|s| s.line_sts.clone()).collect();
        assert_abs_diff_eq!(report.rows[0].sem_line.unwrap(), all.iter().sum::<Real>() / all.len() as Real, epsilon = 1e-12);
    }

    #[test]
    fn csv_shapes() {
        let kit = Kit::new();
        let report = genre_report(&songs(), &kit.backends(), &ReportOptions::default()).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(REPORT_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("kpop,included,"));
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn density_rows_per_line() {
        let kit = Kit::new();
        let song = AlignedSong::from_pairs(SongMeta::new("d", Genre::Animation), &[vec![("one", "하나"), ("two", "둘"), ("three", "셋")]]);
        let rows = density_data(std::slice::from_ref(&song), &kit.emb, &kit.tr, &[Variant::Included]).unwrap();
        assert_eq!(rows.len(), 3);
        let csv = density_csv(&rows);
        assert!(csv.starts_with("genre,variant,sts\nanimation,included,"));
        assert_eq!(csv, density_csv(&density_data(&[song], &kit.emb, &kit.tr, &[Variant::Included]).unwrap()));
    }
}
