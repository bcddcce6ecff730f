use lyr_core::corpus::{self, AlignedSong, Genre, SongMeta};
use lyr_core::dict::{is_vowel_phone, PronouncingDict};
use lyr_core::hangul;
use lyr_core::num;
use lyr_core::phonetics::{bigram_counts, pho, PhonemeSequence, EOS};
use lyr_core::preprocess::{annotate_section, segment_general, strip_control_tokens, syl_values, ShuffleSeed, SylMode};
use lyr_core::scd::{error_rate, scd, CountPairSeries};
use lyr_core::SyllableCounter;
use proptest::prelude::*;

fn latin_word() -> impl Strategy<Value = String> {
    "[a-z]{1,9}"
}

fn hangul_word() -> impl Strategy<Value = String> {
    prop::collection::vec(0u32..11172, 1..6).prop_map(|v| v.into_iter().map(|i| char::from_u32(0xAC00 + i).unwrap()).collect())
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![latin_word(), hangul_word()]
}

fn line() -> impl Strategy<Value = String> {
    prop::collection::vec(latin_word(), 1..7).prop_map(|w| w.join(" "))
}

fn phones() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["AA", "B", "K", "N", "IY"]).prop_map(String::from), 0..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn syllables_add_over_whitespace(words in prop::collection::vec(word(), 1..8)) {
        let c = SyllableCounter::default();
        let whole = c.count_line(&words.join(" ")).value;
        let parts: usize = words.iter().map(|w| c.count_line(w).value).sum();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn appending_words_never_lowers_the_count(a in line(), b in word()) {
        let c = SyllableCounter::default();
        let longer = format!("{a} {b}");
        prop_assert!(c.count_line(&longer).value >= c.count_line(&a).value);
    }

    #[test]
    fn each_hangul_block_is_one_syllable(w in hangul_word()) {
        prop_assert_eq!(SyllableCounter::default().count_line(&w).value, w.chars().count());
    }

    #[test]
    fn jamo_round_trip(i in 0u32..11172) {
        let c = char::from_u32(0xAC00 + i).unwrap();
        prop_assert_eq!(hangul::compose(hangul::decompose(c).unwrap()), Some(c));
    }

    #[test]
    fn pho_is_a_ratio_and_repetition_never_raises_it(lines in prop::collection::vec(phones(), 1..5)) {
        let section: Vec<PhonemeSequence> = lines.into_iter().map(PhonemeSequence::line).collect();
        let Some(p) = pho::<f64>(&section) else { return Ok(()) };
        prop_assert!(p > 0.0 && p <= 1.0);
        let doubled: Vec<PhonemeSequence> = section.iter().chain(&section).cloned().collect();
        prop_assert!(pho::<f64>(&doubled).unwrap() <= p);
        // stream always ends with an end-of-line marker per line
        let stream = PhonemeSequence::concat(&section).tokens;
        prop_assert_eq!(stream.iter().filter(|t| *t == EOS).count(), section.len());
        let (u, t) = bigram_counts(&stream);
        prop_assert_eq!(t, stream.len() - 1);
        prop_assert!(u <= t);
    }

    #[test]
    fn scd_is_symmetric_and_zero_iff_exact(pairs in prop::collection::vec((1usize..20, 1usize..20), 1..30)) {
        let a: CountPairSeries = pairs.iter().copied().collect();
        let b: CountPairSeries = pairs.iter().map(|&(s, t)| (t, s)).collect();
        let (sa, sb) = (scd::<f64>(&a).unwrap(), scd::<f64>(&b).unwrap());
        prop_assert!((sa - sb).abs() < 1e-12);
        prop_assert!(sa >= 0.0);
        prop_assert_eq!(sa == 0.0, error_rate::<f64>(&a).unwrap() == 0.0);
    }

    #[test]
    fn section_records_keep_token_parity(lines in prop::collection::vec((hangul_word(), line()), 1..6), seed in any::<u64>()) {
        let c = SyllableCounter::default();
        let mut rng = ShuffleSeed(seed).rng_for(0);
        let p = annotate_section(&lines, SylMode::WithSyl, Some(&mut rng), &c).unwrap();
        let (src_vals, tgt_vals) = (syl_values(&p.source), syl_values(&p.target));
        prop_assert_eq!(&src_vals, &tgt_vals);
        let spans = strip_control_tokens(&p.target);
        prop_assert_eq!(spans.len(), lines.len());
        for (span, n) in spans.iter().zip(&tgt_vals) {
            prop_assert_eq!(c.count_line(span).value, *n);
        }
        let mut got = spans.clone();
        let mut want: Vec<String> = lines.iter().map(|l| l.1.clone()).collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn general_segments_round_trip(kr in prop::collection::vec(hangul_word(), 1..8), en in line(), seed in any::<u64>()) {
        let c = SyllableCounter::default();
        let kr = kr.join(" ");
        let mut rng = ShuffleSeed(seed).rng_for(3);
        let p = segment_general(&kr, &en, SylMode::WithSyl, 4, &mut rng, &c).unwrap();
        prop_assert_eq!(strip_control_tokens(&p.source).join(" "), kr);
        prop_assert_eq!(strip_control_tokens(&p.target).join(" "), en.clone());
        prop_assert_eq!(syl_values(&p.target).iter().sum::<usize>(), c.count_line(&en).value);
        prop_assert_eq!(syl_values(&p.source), syl_values(&p.target));
    }

    #[test]
    fn corpus_serialization_round_trips(
        sections in prop::collection::vec(prop::collection::vec(("[A-Za-z][A-Za-z ,']{0,12}", "[가-힣a-z][가-힣a-z ]{0,8}"), 1..4), 1..4),
        id in "[a-z0-9-]{1,10}",
    ) {
        let song = AlignedSong::from_pairs(SongMeta::new(id, Genre::Theatre), &sections);
        prop_assert!(corpus::validate_alignment(&song).is_empty());
        let songs = vec![song];
        prop_assert_eq!(&corpus::parse_corpus(corpus::to_json(&songs).as_bytes()).unwrap(), &songs);
        prop_assert_eq!(&corpus::parse_corpus(corpus::to_jsonl(&songs).as_bytes()).unwrap(), &songs);
    }

    #[test]
    fn section_weights_sum_to_one(sizes in prop::collection::vec(1usize..30, 1..12)) {
        let n: usize = sizes.iter().sum();
        prop_assert_eq!(num::weight_total(sizes.iter().copied()), n);
        let ones: Vec<(usize, f64)> = sizes.iter().map(|&s| (s, 1.0)).collect();
        prop_assert!((num::size_weighted(&ones).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dictionary_counts_match_vowel_phones() {
    let dict = PronouncingDict::embedded();
    let c = SyllableCounter::new(dict.clone());
    // every 7th entry; entries with apostrophes or digits go through other paths
    for word in dict.words().into_iter().step_by(7).filter(|w| w.chars().all(|ch| ch.is_ascii_lowercase())) {
        let vowels = dict.first(word).unwrap().iter().filter(|p| is_vowel_phone(p)).count();
        assert_eq!(c.dictionary_count(word), Some(vowels), "{word}");
    }
}
