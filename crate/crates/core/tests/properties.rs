//! Property tests over randomly generated tag sequences and corpora.

use proptest::prelude::*;

use tritag::spans::augment_sentence_tags;
use tritag::{
    parse_tsv, postprocess, tags_to_spans, to_tsv, train, Corpus, NeKind, NeTag,
    ObservationTriplet, Sentence, SpanMode, TrainOptions,
};
use tritag::{spans_to_tags, Error, Hist, Next};

fn category(i: u8) -> &'static str {
    ["PER", "LOC"][i as usize % 2]
}

fn arb_tag() -> impl Strategy<Value = NeTag> {
    (0..4u8, 0..2u8).prop_map(|(kind, cat)| match kind {
        0 => NeTag::outside(),
        1 => NeTag::new(NeKind::Begin, category(cat)).unwrap(),
        2 => NeTag::new(NeKind::Inside, category(cat)).unwrap(),
        _ => NeTag::new(NeKind::End, category(cat)).unwrap(),
    })
}

/// Folds raw bytes into a well-formed plain B/I/O sequence: I only ever
/// continues a same-category entity.
fn plain_iob(seed: &[u8]) -> Vec<NeTag> {
    let mut tags: Vec<NeTag> = Vec::with_capacity(seed.len());
    for &s in seed {
        let prev = tags.last();
        let can_continue = prev.is_some_and(|p| !p.is_outside());
        let tag = match s % 4 {
            0 => NeTag::outside(),
            1 => NeTag::new(NeKind::Begin, category(s / 4)).unwrap(),
            2 if can_continue => {
                NeTag::new(NeKind::Inside, prev.unwrap().category()).unwrap()
            }
            _ => NeTag::outside(),
        };
        tags.push(tag);
    }
    tags
}

fn arb_sentence() -> impl Strategy<Value = Sentence> {
    (
        prop::collection::vec((0..12u8, 0..2u8, 0..2u8), 1..8),
        prop::collection::vec(0..8u8, 1..8),
    )
        .prop_map(|(tokens, seed)| {
            let n = tokens.len().min(seed.len());
            let triplets: Vec<ObservationTriplet> = tokens[..n]
                .iter()
                .map(|(w, p, c)| {
                    ObservationTriplet::new(format!("w{w}"), format!("p{p}"), format!("c{c}"))
                        .unwrap()
                })
                .collect();
            let tags = plain_iob(&seed[..n]);
            Sentence::tagged(triplets, tags).unwrap()
        })
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(arb_sentence(), 1..6).prop_map(Corpus::new)
}

proptest! {
    /// Repair output never contains a sentence-initial I or an O->I
    /// transition.
    #[test]
    fn postprocess_is_sound(tags in prop::collection::vec(arb_tag(), 1..40)) {
        let fixed = postprocess(&tags);
        prop_assert_eq!(fixed.len(), tags.len());
        prop_assert!(fixed[0].kind() != NeKind::Inside);
        for w in fixed.windows(2) {
            prop_assert!(!(w[0].is_outside() && w[1].kind() == NeKind::Inside));
        }
        // Idempotent.
        prop_assert_eq!(postprocess(&fixed), fixed.clone());
    }

    /// Lenient extraction is stable under rendering for arbitrary tag
    /// sequences, and canonical renderings pass strict extraction.
    #[test]
    fn span_extraction_is_stable(tags in prop::collection::vec(arb_tag(), 1..25)) {
        let spans = tags_to_spans(&tags, SpanMode::Lenient).unwrap();
        let rendered = spans_to_tags(&spans, tags.len()).unwrap();
        let again = tags_to_spans(&rendered, SpanMode::Lenient).unwrap();
        prop_assert_eq!(&spans, &again);
        prop_assert!(tags_to_spans(&rendered, SpanMode::Strict).is_ok());
    }

    /// Well-formed plain IOB round-trips through spans after end-tag
    /// normalization.
    #[test]
    fn canonical_form_round_trips(seed in prop::collection::vec(0..8u8, 1..30)) {
        let plain = plain_iob(&seed);
        let canonical = augment_sentence_tags(&plain).unwrap();
        let spans = tags_to_spans(&canonical, SpanMode::Strict).unwrap();
        let back = spans_to_tags(&spans, canonical.len()).unwrap();
        prop_assert_eq!(back, canonical);
    }

    /// Canonical TSV is a fixed point of parse-then-serialize.
    #[test]
    fn tsv_serialization_is_canonical(corpus in arb_corpus()) {
        let text = to_tsv(&corpus);
        let parsed = parse_tsv(&text).unwrap();
        prop_assert_eq!(&parsed, &corpus);
        prop_assert_eq!(to_tsv(&parsed), text);
    }

    /// Trained models satisfy the normalization contracts: transition
    /// distributions over seen histories, suffix conditionals, and
    /// posterior emission rows all sum to one.
    #[test]
    fn trained_models_are_normalized(corpus in arb_corpus()) {
        let model = match train(&corpus, &TrainOptions::default()) {
            Ok(model) => model,
            // Corpora without rare observations cannot build the
            // suffix model; nothing to check.
            Err(Error::NoRareWords) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let inv = model.inventory();
        let transitions = model.transitions();
        let counts = transitions.counts();
        let mut hists: Vec<Hist> = inv.ids().map(Hist::Tag).collect();
        hists.push(Hist::Start);
        for &h2 in &hists {
            for &h1 in &hists {
                if counts.hist2(h2, h1) == 0 || counts.hist1(h1) == 0 {
                    continue;
                }
                let mut sum: f64 = inv.ids().map(|t| transitions.prob(h2, h1, Next::Tag(t))).sum();
                sum += transitions.prob(h2, h1, Next::End);
                prop_assert!((sum - 1.0).abs() <= 1e-9);
            }
        }
        for (suffix, probs) in model.suffixes().suffixes() {
            let sum: f64 = probs.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "suffix {:?} sums to {}", suffix, sum);
        }
        for (o, _) in model.emissions().observation_counts() {
            let sum: f64 = inv.ids().map(|t| model.emissions().prob(o, t).unwrap()).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
        let lambdas = transitions.lambdas();
        prop_assert!((lambdas.sum() - 1.0).abs() <= 1e-12);
    }
}
