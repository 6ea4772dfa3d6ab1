//! Library-level pipeline tests: corpus-scale parsing, end-to-end
//! recovery, model persistence on realistic corpora, and the decoding
//! time guard.

use std::io::BufReader;
use std::time::Instant;

use tritag::synth::{deterministic_corpus, micro_corpus, tagged_corpus_with_tokens, SynthConfig};
use tritag::{
    evaluate, model_file, parse_tsv, tag_corpus_serial, to_tsv, train, viterbi_decode,
    DecodeOptions, EvalMode, NeKind, NeTag, ObservationTriplet, TrainOptions,
};

#[test]
fn corpus_scale_parse_preserves_token_count() {
    let cfg = SynthConfig {
        seed: 11,
        word_types: 4000,
        ..SynthConfig::default()
    };
    let corpus = tagged_corpus_with_tokens(&cfg, 43_732, 17);
    assert_eq!(corpus.token_count(), 43_732);
    let text = to_tsv(&corpus);
    let non_blank = text.lines().filter(|l| !l.is_empty()).count();
    assert_eq!(non_blank, 43_732);
    let parsed = parse_tsv(&text).unwrap();
    assert_eq!(parsed.token_count(), non_blank);
    assert_eq!(parsed, corpus);
}

#[test]
fn deterministic_corpus_recovery_through_library() {
    let gold = deterministic_corpus(3, 60, 8);
    let model = train(&gold, &TrainOptions::default()).unwrap();
    let tagged =
        tag_corpus_serial(&model, &gold.stripped(), &DecodeOptions::default()).unwrap();
    let report = evaluate(&gold, &tagged, EvalMode::Span).unwrap();
    assert_eq!(report.overall.f_measure(), 1.0);
    assert_eq!(tagged, gold);
}

#[test]
fn model_file_round_trip_on_synthetic_corpus() {
    let cfg = SynthConfig {
        seed: 23,
        sentences: 120,
        ..SynthConfig::default()
    };
    let gold = tritag::synth::tagged_corpus(&cfg);
    let model = train(&gold, &TrainOptions::default()).unwrap();
    let bytes = model_file::to_string(&model);
    let reloaded = model_file::load(BufReader::new(bytes.as_bytes())).unwrap();
    assert_eq!(model_file::to_string(&reloaded), bytes);

    let probe_cfg = SynthConfig {
        seed: 24,
        sentences: 40,
        word_types: 400,
        ..SynthConfig::default()
    };
    let probe = tritag::synth::tagged_corpus(&probe_cfg).stripped();
    let opts = DecodeOptions::default();
    assert_eq!(
        tag_corpus_serial(&model, &probe, &opts).unwrap(),
        tag_corpus_serial(&reloaded, &probe, &opts).unwrap()
    );
}

/// Multibyte text flows through training, suffix harvesting, decoding
/// and model persistence; suffix lengths count characters, not bytes.
#[test]
fn multibyte_corpora_round_trip() {
    let text = "কলকাতা\tNNP\tB-NP\tB-LOC\nশহর\tNN\tI-NP\tO\n\n\
                রবীন্দ্রনাথ\tNNP\tB-NP\tB-PER\nঠাকুর\tNNP\tI-NP\tE-PER\n\n\
                বৃষ্টি\tNN\tB-NP\tO\nকলকাতা\tNNP\tB-NP\tB-LOC\n";
    let gold = parse_tsv(text).unwrap();
    let model = train(&gold, &TrainOptions::default()).unwrap();

    // Unknown word sharing a script suffix with training words.
    let probe = parse_tsv("ঢাকা\tNNP\tB-NP\nশহর\tNN\tI-NP\n").unwrap();
    let opts = DecodeOptions::default();
    let tagged = tag_corpus_serial(&model, &probe, &opts).unwrap();
    assert_eq!(tagged.token_count(), 2);

    // Suffix keys are valid UTF-8 slices of whole characters.
    for (suffix, _) in model.suffixes().suffixes() {
        assert!(suffix.chars().count() <= model.suffixes().max_len());
    }

    let bytes = model_file::to_string(&model);
    let reloaded = model_file::load(BufReader::new(bytes.as_bytes())).unwrap();
    assert_eq!(model_file::to_string(&reloaded), bytes);
    assert_eq!(
        tag_corpus_serial(&reloaded, &probe, &opts).unwrap(),
        tagged
    );
    assert_eq!(parse_tsv(&to_tsv(&gold)).unwrap(), gold);
}

/// Decoding one 100-token sentence against a 50-tag inventory stays
/// comfortably inside one second.
#[test]
fn decode_time_guard() {
    // 16 categories with B/I/E forms, plus O and one extra B: 50 tags.
    let mut pool: Vec<NeTag> = vec![NeTag::outside()];
    for c in 0..16 {
        for kind in [NeKind::Begin, NeKind::Inside, NeKind::End] {
            pool.push(NeTag::new(kind, format!("C{c}")).unwrap());
        }
    }
    pool.push(NeTag::new(NeKind::Begin, "EXTRA").unwrap());
    assert_eq!(pool.len(), 50);

    let corpus = micro_corpus(5, 400, 20, &pool, 3000);
    let model = train(&corpus, &TrainOptions::default()).unwrap();
    assert_eq!(model.inventory().len(), 50, "all 50 tags must be observed");

    let tokens: Vec<ObservationTriplet> = (0..100)
        .map(|i| {
            // Half known vocabulary, half unknown.
            let word = if i % 2 == 0 {
                format!("w{}", i % 8)
            } else {
                format!("unseen{i}")
            };
            ObservationTriplet::new(word, "p0", "c0").unwrap()
        })
        .collect();

    let started = Instant::now();
    let tags = viterbi_decode(&model, &tokens, &DecodeOptions::default()).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(tags.len(), 100);
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "decode took {elapsed:?}, budget is 1s"
    );
}
