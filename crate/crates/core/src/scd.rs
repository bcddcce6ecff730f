//! Syllable count distance and error rate between aligned line sequences.

use serde::Serialize;
use thiserror::Error;

use crate::num::{self, Scalar};
use crate::syllable::SyllableCounter;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScdError {
    #[error("empty series")]
    EmptySeries,
    #[error("song {song_id}: {source_lines} source lines but {generated_lines} generated lines")]
    Misaligned { song_id: String, source_lines: usize, generated_lines: usize },
}

/// Per-line `(s, s~)` syllable counts. Pairs where either count is zero are
/// not stored; they only bump `skipped`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountPairSeries {
    pairs: Vec<(usize, usize)>,
    skipped: usize,
}

impl CountPairSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: usize, s_tilde: usize) {
        if s == 0 || s_tilde == 0 {
            self.skipped += 1;
        } else {
            self.pairs.push((s, s_tilde));
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn extend_from(&mut self, other: &CountPairSeries) {
        self.pairs.extend_from_slice(&other.pairs);
        self.skipped += other.skipped;
    }
}

impl FromIterator<(usize, usize)> for CountPairSeries {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut s = Self::new();
        for (a, b) in iter {
            s.push(a, b);
        }
        s
    }
}

/// `|s - s~| * (1/s + 1/s~) / 2` for one pair.
pub fn line_term<F: Scalar>(s: usize, s_tilde: usize) -> F {
    let diff = F::from_count(s.abs_diff(s_tilde));
    let two = F::one() + F::one();
    diff * (F::one() / F::from_count(s) + F::one() / F::from_count(s_tilde)) / two
}

/// `(1 / 2n) * sum_i (|s_i - s~_i| / s_i + |s_i - s~_i| / s~_i)`.
pub fn scd<F: Scalar>(series: &CountPairSeries) -> Result<F, ScdError> {
    if series.is_empty() {
        return Err(ScdError::EmptySeries);
    }
    let sum: F = series.pairs.iter().map(|&(s, t)| line_term::<F>(s, t)).sum();
    Ok(sum / F::from_count(series.len()))
}

/// Fraction of stored pairs whose counts differ.
pub fn error_rate<F: Scalar>(series: &CountPairSeries) -> Result<F, ScdError> {
    if series.is_empty() {
        return Err(ScdError::EmptySeries);
    }
    let wrong = series.pairs.iter().filter(|(s, t)| s != t).count();
    Ok(num::ratio(wrong, series.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScdReport<F> {
    pub scd: F,
    pub error_rate: F,
    pub n_lines: usize,
    pub skipped: usize,
}

pub fn scd_report<F: Scalar>(series: &CountPairSeries) -> Result<ScdReport<F>, ScdError> {
    Ok(ScdReport { scd: scd(series)?, error_rate: error_rate(series)?, n_lines: series.len(), skipped: series.skipped() })
}

/// Count syllables on both sides of aligned line lists.
pub fn count_series<S: AsRef<str>, G: AsRef<str>>(counter: &SyllableCounter, source: &[S], generated: &[G]) -> CountPairSeries {
    source.iter().zip(generated).map(|(a, b)| (counter.count_line(a.as_ref()).value, counter.count_line(b.as_ref()).value)).collect()
}

/// Source lines of one song and the lines generated for them.
#[derive(Debug, Clone)]
pub struct SongLines {
    pub song_id: String,
    pub source: Vec<String>,
    pub generated: Vec<String>,
}

/// One CSV row: `song_id,n_lines,scd,error_rate,skipped`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScdRow<F> {
    pub song_id: String,
    pub n_lines: usize,
    pub scd: F,
    pub error_rate: F,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusScd<F> {
    pub rows: Vec<ScdRow<F>>,
    pub scd_mean: F,
    pub scd_std: F,
    /// Mean of per-song error rates.
    pub error_rate_mean: F,
    /// Error rate over all lines of all songs.
    pub error_rate_pooled: F,
    /// Songs with no scorable line pair, or misaligned inputs.
    pub skipped_songs: Vec<String>,
}

pub const SCD_CSV_HEADER: &str = "song_id,n_lines,scd,error_rate,skipped";

impl<F: Scalar + std::fmt::Display> CorpusScd<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCD_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", crate::report::csv_field(&r.song_id), r.n_lines, r.scd, r.error_rate, r.skipped));
        }
        out
    }
}

/// Per-song SCD and error rate, aggregated as mean and population standard
/// deviation over songs. `None` when no song had a scorable line.
pub fn corpus_scd<F: Scalar>(songs: &[SongLines], counter: &SyllableCounter) -> Option<CorpusScd<F>> {
    let mut rows = Vec::new();
    let mut skipped_songs = Vec::new();
    let mut pooled = CountPairSeries::new();
    for song in songs {
        if song.source.len() != song.generated.len() {
            log::warn!(
                "{}",
                ScdError::Misaligned {
                    song_id: song.song_id.clone(),
                    source_lines: song.source.len(),
                    generated_lines: song.generated.len(),
                }
            );
            skipped_songs.push(song.song_id.clone());
            continue;
        }
        let series = count_series(counter, &song.source, &song.generated);
        match scd_report::<F>(&series) {
            Ok(r) => {
                pooled.extend_from(&series);
                rows.push(ScdRow {
                    song_id: song.song_id.clone(),
                    n_lines: r.n_lines,
                    scd: r.scd,
                    error_rate: r.error_rate,
                    skipped: r.skipped,
                });
            }
            Err(_) => {
                log::warn!("song {}: no scorable lines, skipped", song.song_id);
                skipped_songs.push(song.song_id.clone());
            }
        }
    }
    let scds: Vec<F> = rows.iter().map(|r| r.scd).collect();
    let errs: Vec<F> = rows.iter().map(|r| r.error_rate).collect();
    let (scd_mean, scd_std) = num::mean_std(&scds)?;
    Some(CorpusScd {
        scd_mean,
        scd_std,
        error_rate_mean: num::mean(&errs)?,
        error_rate_pooled: error_rate(&pooled).ok()?,
        rows,
        skipped_songs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(p: &[(usize, usize)]) -> CountPairSeries {
        p.iter().copied().collect()
    }

    #[test]
    fn scd_examples() {
        assert_eq!(scd::<f64>(&series(&[(3, 3), (5, 5)])).unwrap(), 0.0);
        assert_abs_diff_eq!(scd::<f64>(&series(&[(8, 7)])).unwrap(), 0.5 * (1.0 / 8.0 + 1.0 / 7.0), epsilon = 1e-15);
        assert_abs_diff_eq!(scd::<f64>(&series(&[(4, 2), (6, 6)])).unwrap(), 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(scd::<f32>(&series(&[(4, 2), (6, 6)])).unwrap(), 0.375, epsilon = 1e-6);
        assert_eq!(scd::<f64>(&CountPairSeries::new()), Err(ScdError::EmptySeries));
    }

    #[test]
    fn error_rate_examples() {
        assert_eq!(error_rate::<f64>(&series(&[(2, 2)])).unwrap(), 0.0);
        assert_eq!(error_rate::<f64>(&series(&[(2, 3), (5, 4)])).unwrap(), 1.0);
        assert_eq!(error_rate::<f64>(&series(&[(5, 5), (7, 6), (3, 3), (4, 2)])).unwrap(), 0.5);
        assert_eq!(error_rate::<f64>(&CountPairSeries::new()), Err(ScdError::EmptySeries));
    }

    #[test]
    fn zero_counts_are_skipped() {
        let s = series(&[(0, 3), (3, 0), (4, 4)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.skipped(), 2);
        let r = scd_report::<f64>(&s).unwrap();
        assert_eq!((r.n_lines, r.skipped), (1, 2));
    }

    #[test]
    fn identical_generation_scores_zero() {
        let lines: Vec<String> = ["I'll stray off the path I'm walking", "하늘을 피해 숨지", "..."].map(String::from).to_vec();
        let c =
            corpus_scd::<f64>(&[SongLines { song_id: "a".into(), source: lines.clone(), generated: lines }], &SyllableCounter::default())
                .unwrap();
        assert_eq!(c.scd_mean, 0.0);
        assert_eq!(c.error_rate_mean, 0.0);
        assert_eq!(c.rows[0].skipped, 1);
    }

    #[test]
    fn misaligned_and_empty_songs_are_reported() {
        let c = corpus_scd::<f64>(
            &[
                SongLines { song_id: "bad".into(), source: vec!["a".into()], generated: vec![] },
                SongLines { song_id: "zero".into(), source: vec!["!!".into()], generated: vec!["??".into()] },
                SongLines { song_id: "ok".into(), source: vec!["hello".into()], generated: vec!["hi".into()] },
            ],
            &SyllableCounter::default(),
        )
        .unwrap();
        assert_eq!(c.skipped_songs, ["bad", "zero"]);
        assert_eq!(c.rows.len(), 1);
        assert!(c.to_csv().starts_with("song_id,n_lines,scd,error_rate,skipped\nok,1,0.75,1,0\n"));
    }
}
