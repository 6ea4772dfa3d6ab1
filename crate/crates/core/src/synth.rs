//! Seeded synthetic corpora for tests and benchmarks. Everything here is
//! deterministic in the seed.

use rand_chacha::ChaCha8Rng;
use rand::{Rng, SeedableRng};

use crate::corpus::{Corpus, NeKind, NeTag, ObservationTriplet, Sentence};

/// Shape of a generated corpus.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub sentences: usize,
    /// Sentence lengths are drawn uniformly from 1..=max_len.
    pub max_len: usize,
    /// Word types; drawn with a quadratic skew so a sizable rare tail
    /// exists alongside frequent types.
    pub word_types: usize,
    pub pos_types: usize,
    pub chunk_types: usize,
    pub categories: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            sentences: 50,
            max_len: 12,
            word_types: 200,
            pos_types: 6,
            chunk_types: 4,
            categories: vec!["PER".into(), "LOC".into(), "ORG".into()],
        }
    }
}

fn skewed(rng: &mut ChaCha8Rng, types: usize) -> usize {
    let u: f64 = rng.random();
    ((u * u) * types as f64) as usize % types
}

fn token(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> ObservationTriplet {
    ObservationTriplet::new(
        format!("w{}", skewed(rng, cfg.word_types)),
        format!("p{}", rng.random_range(0..cfg.pos_types)),
        format!("c{}", rng.random_range(0..cfg.chunk_types)),
    )
    .unwrap()
}

/// Canonical B/I/E/O tags for a sentence: entities start with probability
/// ~1/4 at any free position and run one to three tokens.
fn well_formed_tags(rng: &mut ChaCha8Rng, len: usize, categories: &[String]) -> Vec<NeTag> {
    let mut tags = Vec::with_capacity(len);
    let mut i = 0;
    while i < len {
        if rng.random_range(0..4) == 0 {
            let cat = &categories[rng.random_range(0..categories.len())];
            let run = rng.random_range(1..=3usize).min(len - i);
            tags.push(NeTag::new(NeKind::Begin, cat).unwrap());
            for k in 1..run {
                let kind = if k == run - 1 { NeKind::End } else { NeKind::Inside };
                tags.push(NeTag::new(kind, cat).unwrap());
            }
            i += run;
        } else {
            tags.push(NeTag::outside());
            i += 1;
        }
    }
    tags
}

/// A tagged corpus with well-formed B/I/E/O annotation.
pub fn tagged_corpus(cfg: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sentences = (0..cfg.sentences)
        .map(|_| {
            let len = rng.random_range(1..=cfg.max_len);
            let tokens = (0..len).map(|_| token(&mut rng, cfg)).collect();
            let tags = well_formed_tags(&mut rng, len, &cfg.categories);
            Sentence::tagged(tokens, tags).unwrap()
        })
        .collect();
    Corpus::new(sentences)
}

/// A tagged corpus with exactly `total_tokens` tokens, in sentences of
/// roughly `sentence_len` tokens.
pub fn tagged_corpus_with_tokens(
    cfg: &SynthConfig,
    total_tokens: usize,
    sentence_len: usize,
) -> Corpus {
    assert!(total_tokens >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sentences = Vec::new();
    let mut remaining = total_tokens;
    while remaining > 0 {
        let len = sentence_len.min(remaining).max(1);
        let tokens = (0..len).map(|_| token(&mut rng, cfg)).collect();
        let tags = well_formed_tags(&mut rng, len, &cfg.categories);
        sentences.push(Sentence::tagged(tokens, tags).unwrap());
        remaining -= len;
    }
    Corpus::new(sentences)
}

/// A micro-corpus over at most `tag_pool.len()` tags with unconstrained
/// tag order, for oracle comparisons.
pub fn micro_corpus(
    seed: u64,
    sentences: usize,
    max_len: usize,
    tag_pool: &[NeTag],
    word_types: usize,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = (0..sentences)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            let tokens = (0..len)
                .map(|_| {
                    ObservationTriplet::new(
                        format!("w{}", skewed(&mut rng, word_types)),
                        format!("p{}", rng.random_range(0..2u32)),
                        format!("c{}", rng.random_range(0..2u32)),
                    )
                    .unwrap()
                })
                .collect();
            let tags = (0..len)
                .map(|_| tag_pool[rng.random_range(0..tag_pool.len())].clone())
                .collect();
            Sentence::tagged(tokens, tags).unwrap()
        })
        .collect();
    Corpus::new(out)
}

/// A corpus in which every triplet maps to exactly one tag: the word
/// encodes the tag, so retagging the token stream must reproduce the
/// training annotation exactly.
pub fn deterministic_corpus(seed: u64, sentences: usize, max_len: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories = ["PER".to_string(), "LOC".to_string()];
    let out = (0..sentences)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            let tags = well_formed_tags(&mut rng, len, &categories);
            let tokens = tags
                .iter()
                .map(|tag| {
                    // A few word variants per tag keep the vocabulary
                    // non-trivial while preserving the unique mapping.
                    let variant = rng.random_range(0..3u32);
                    ObservationTriplet::new(
                        format!("w_{}_{variant}", tag.surface()),
                        "P",
                        "C",
                    )
                    .unwrap()
                })
                .collect();
            Sentence::tagged(tokens, tags).unwrap()
        })
        .collect();
    Corpus::new(out)
}
