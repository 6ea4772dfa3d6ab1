//! Trigram Viterbi decoding over the trained model, the orphan-run
//! output repair, and the batch tagging wrappers.
//!
//! All scoring happens in natural-log space with `-inf` standing for
//! zero probability. Ties resolve to the lexicographically smallest tag
//! sequence under the inventory's stable index order, which makes decode
//! results reproducible and directly comparable against exhaustive
//! enumeration.

use crate::corpus::{Corpus, NeKind, NeTag, ObservationTriplet, Sentence};
use crate::emission::{EmissionModel, SuffixModel};
use crate::error::{Error, Result};
use crate::transition::{Hist, Next, TagId, TagInventory, TransitionModel};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Version string of the model container format.
pub const FORMAT_VERSION: &str = "1";

/// How the sentence-final transition is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndTransition {
    /// Smoothed trigram conditioned on the last two tags (default).
    #[default]
    Trigram,
    /// Bigram form conditioned on the last tag only: the trigram term of
    /// the smoothed mixture is dropped.
    Bigram,
}

/// Decode-time options.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecodeOptions {
    pub end_transition: EndTransition,
}

/// An immutable trained model: tag inventory plus the transition,
/// emission and suffix submodels, with dense log-score caches built at
/// construction. Safe to share across threads; decoding is a pure
/// function of the model and the input sentence.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    inventory: TagInventory,
    transitions: TransitionModel,
    emissions: EmissionModel,
    suffixes: SuffixModel,
    version: String,
    cache: DecodeCache,
}

#[derive(Debug, Clone)]
struct DecodeCache {
    /// `log P(t | h2, h1)` with history index `n_tags` meaning the start
    /// boundary and predicted index `n_tags` meaning the end boundary.
    log_trans: Vec<f64>,
    /// Bigram-form end score per final tag.
    log_end_bigram: Vec<f64>,
    dim: usize,
}

impl DecodeCache {
    fn build(inventory: &TagInventory, transitions: &TransitionModel) -> Self {
        let n = inventory.len();
        let dim = n + 1;
        let hist_of = |i: usize| {
            if i == n {
                Hist::Start
            } else {
                Hist::Tag(TagId::new(i))
            }
        };
        let next_of = |i: usize| {
            if i == n {
                Next::End
            } else {
                Next::Tag(TagId::new(i))
            }
        };
        let mut log_trans = vec![f64::NEG_INFINITY; dim * dim * dim];
        for h2 in 0..dim {
            for h1 in 0..dim {
                for t in 0..dim {
                    log_trans[(h2 * dim + h1) * dim + t] =
                        transitions.prob(hist_of(h2), hist_of(h1), next_of(t)).ln();
                }
            }
        }
        let log_end_bigram = (0..n)
            .map(|t| {
                transitions
                    .prob_bigram_backoff(Hist::Tag(TagId::new(t)), Next::End)
                    .ln()
            })
            .collect();
        DecodeCache {
            log_trans,
            log_end_bigram,
            dim,
        }
    }

    #[inline]
    fn trans(&self, h2: usize, h1: usize, t: usize) -> f64 {
        self.log_trans[(h2 * self.dim + h1) * self.dim + t]
    }
}

impl TrainedModel {
    pub fn new(
        inventory: TagInventory,
        transitions: TransitionModel,
        emissions: EmissionModel,
        suffixes: SuffixModel,
        version: String,
    ) -> Result<Self> {
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion { found: version });
        }
        if inventory.is_empty() {
            return Err(Error::InvalidInput("empty tag inventory".into()));
        }
        if suffixes.priors().len() != inventory.len() {
            return Err(Error::InvalidInput(
                "suffix model does not match the tag inventory".into(),
            ));
        }
        let cache = DecodeCache::build(&inventory, &transitions);
        Ok(TrainedModel {
            inventory,
            transitions,
            emissions,
            suffixes,
            version,
            cache,
        })
    }

    pub fn inventory(&self) -> &TagInventory {
        &self.inventory
    }

    pub fn transitions(&self) -> &TransitionModel {
        &self.transitions
    }

    pub fn emissions(&self) -> &EmissionModel {
        &self.emissions
    }

    pub fn suffixes(&self) -> &SuffixModel {
        &self.suffixes
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    fn suffix_log_scores(&self, o: &ObservationTriplet) -> Vec<f64> {
        self.inventory
            .ids()
            .map(|t| self.suffixes.score(o, t).ln())
            .collect()
    }

    /// Log emission scores for one position: the known-observation
    /// estimate when the triplet was seen in training, the suffix score
    /// otherwise. The flag reports whether the known path was used.
    fn emission_log_scores(&self, o: &ObservationTriplet) -> (Vec<f64>, bool) {
        if self.emissions.is_known(o) {
            let scores = self
                .inventory
                .ids()
                .map(|t| self.emissions.prob(o, t).expect("known observation").ln())
                .collect();
            (scores, true)
        } else {
            (self.suffix_log_scores(o), false)
        }
    }
}

/// Reconstructs the tag-index path ending in state `(a, b)` at position
/// `pos`, walking the recorded backpointers. `bps[k]` holds the
/// predecessors for position `k + 2`.
fn path_of(mut a: usize, mut b: usize, pos: usize, bps: &[Vec<u32>], n_tags: usize) -> Vec<u32> {
    debug_assert!(pos >= 1);
    let mut rev = vec![b as u32, a as u32];
    let mut i = pos;
    while i >= 2 {
        let p = bps[i - 2][a * n_tags + b] as usize;
        rev.push(p as u32);
        b = a;
        a = p;
        i -= 1;
    }
    rev.reverse();
    rev
}

/// Finds the most probable tag sequence for a sentence of observation
/// triplets. Interior transitions are the smoothed trigram; the end
/// transition follows [`DecodeOptions::end_transition`]. When a known
/// triplet's emission scores dead-end the lattice the position falls
/// back to the suffix model before the decoder gives up.
pub fn viterbi_decode(
    model: &TrainedModel,
    tokens: &[ObservationTriplet],
    opts: &DecodeOptions,
) -> Result<Vec<NeTag>> {
    let n = tokens.len();
    if n == 0 {
        return Err(Error::EmptySentence);
    }
    let t_count = model.inventory.len();
    let start = t_count;
    let end = t_count;
    let cache = &model.cache;

    // Position 0, predecessor history (start, start).
    let (mut e0, known0) = model.emission_log_scores(&tokens[0]);
    let mut v0: Vec<f64> = (0..t_count)
        .map(|t| cache.trans(start, start, t) + e0[t])
        .collect();
    if v0.iter().all(|v| *v == f64::NEG_INFINITY) && known0 {
        e0 = model.suffix_log_scores(&tokens[0]);
        v0 = (0..t_count)
            .map(|t| cache.trans(start, start, t) + e0[t])
            .collect();
    }
    if v0.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::NoViablePath { position: 0 });
    }

    if n == 1 {
        let mut best = f64::NEG_INFINITY;
        let mut best_t = 0usize;
        for (t, &v) in v0.iter().enumerate() {
            let end_score = match opts.end_transition {
                EndTransition::Trigram => cache.trans(start, t, end),
                EndTransition::Bigram => cache.log_end_bigram[t],
            };
            let cand = v + end_score;
            if cand > best {
                best = cand;
                best_t = t;
            }
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::NoViablePath { position: 0 });
        }
        return Ok(vec![model.inventory.tag(TagId::new(best_t)).clone()]);
    }

    // Position 1: cells (t1, t2) reached from the unique history
    // (start, t1); no tie choice exists yet.
    let mut m: Vec<f64> = vec![f64::NEG_INFINITY; t_count * t_count];
    {
        let (mut e1, known1) = model.emission_log_scores(&tokens[1]);
        let fill = |m: &mut Vec<f64>, e1: &[f64]| {
            for tp in 0..t_count {
                for t in 0..t_count {
                    m[tp * t_count + t] = v0[tp] + cache.trans(start, tp, t) + e1[t];
                }
            }
        };
        fill(&mut m, &e1);
        if m.iter().all(|v| *v == f64::NEG_INFINITY) && known1 {
            e1 = model.suffix_log_scores(&tokens[1]);
            fill(&mut m, &e1);
        }
        if m.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::NoViablePath { position: 1 });
        }
    }

    // Positions 2..n with backpointers.
    let mut bps: Vec<Vec<u32>> = Vec::with_capacity(n.saturating_sub(2));
    for (i, token) in tokens.iter().enumerate().skip(2) {
        let (mut e, known) = model.emission_log_scores(token);
        let mut retried = !known;
        loop {
            let mut new_m = vec![f64::NEG_INFINITY; t_count * t_count];
            let mut bp = vec![0u32; t_count * t_count];
            for tp in 0..t_count {
                for t in 0..t_count {
                    let et = e[t];
                    let mut best = f64::NEG_INFINITY;
                    let mut best_pred = 0u32;
                    let mut have = false;
                    for pp in 0..t_count {
                        let cand = m[pp * t_count + tp] + cache.trans(pp, tp, t) + et;
                        if !have || cand > best {
                            best = cand;
                            best_pred = pp as u32;
                            have = true;
                        } else if cand == best && cand != f64::NEG_INFINITY {
                            // Exact tie: keep whichever predecessor path
                            // is lexicographically smaller.
                            let cur = path_of(best_pred as usize, tp, i - 1, &bps, t_count);
                            let alt = path_of(pp, tp, i - 1, &bps, t_count);
                            if alt < cur {
                                best_pred = pp as u32;
                            }
                        }
                    }
                    new_m[tp * t_count + t] = best;
                    bp[tp * t_count + t] = best_pred;
                }
            }
            if new_m.iter().all(|v| *v == f64::NEG_INFINITY) {
                if !retried {
                    retried = true;
                    e = model.suffix_log_scores(token);
                    continue;
                }
                return Err(Error::NoViablePath { position: i });
            }
            m = new_m;
            bps.push(bp);
            break;
        }
    }

    // End transition and final cell selection.
    let mut best = f64::NEG_INFINITY;
    let mut best_cell: Option<(usize, usize)> = None;
    for tp in 0..t_count {
        for t in 0..t_count {
            let end_score = match opts.end_transition {
                EndTransition::Trigram => cache.trans(tp, t, end),
                EndTransition::Bigram => cache.log_end_bigram[t],
            };
            let cand = m[tp * t_count + t] + end_score;
            if cand == f64::NEG_INFINITY {
                continue;
            }
            match best_cell {
                None => {
                    best = cand;
                    best_cell = Some((tp, t));
                }
                Some((btp, bt)) => {
                    if cand > best {
                        best = cand;
                        best_cell = Some((tp, t));
                    } else if cand == best {
                        let cur = path_of(btp, bt, n - 1, &bps, t_count);
                        let alt = path_of(tp, t, n - 1, &bps, t_count);
                        if alt < cur {
                            best_cell = Some((tp, t));
                        }
                    }
                }
            }
        }
    }
    let Some((tp, t)) = best_cell else {
        return Err(Error::NoViablePath { position: n - 1 });
    };
    let path = path_of(tp, t, n - 1, &bps, t_count);
    Ok(path
        .into_iter()
        .map(|idx| model.inventory.tag(TagId::new(idx as usize)).clone())
        .collect())
}

/// Erases orphan I runs: every maximal run of I tags whose effective
/// predecessor is O (or the start of the sentence) is replaced by O
/// tags, together with the single E tag that may terminate it. Runs
/// preceded by an entity opener are untouched.
pub fn postprocess(tags: &[NeTag]) -> Vec<NeTag> {
    let mut out: Vec<NeTag> = Vec::with_capacity(tags.len());
    let mut i = 0;
    while i < tags.len() {
        let orphan = tags[i].kind() == NeKind::Inside
            && out.last().is_none_or(|prev| prev.is_outside());
        if !orphan {
            out.push(tags[i].clone());
            i += 1;
            continue;
        }
        let mut j = i;
        while j < tags.len() && tags[j].kind() == NeKind::Inside {
            j += 1;
        }
        if j < tags.len() && tags[j].kind() == NeKind::End {
            j += 1;
        }
        for _ in i..j {
            out.push(NeTag::outside());
        }
        i = j;
    }
    out
}

fn decode_sentence(
    model: &TrainedModel,
    sentence: &Sentence,
    opts: &DecodeOptions,
) -> Result<Vec<NeTag>> {
    viterbi_decode(model, sentence.tokens(), opts).map(|tags| postprocess(&tags))
}

fn assemble(corpus: &Corpus, results: Vec<Result<Vec<NeTag>>>) -> Result<Corpus> {
    let mut sentences = Vec::with_capacity(corpus.len());
    for (i, (sentence, result)) in corpus.sentences().iter().zip(results).enumerate() {
        let tags = result.map_err(|e| e.in_sentence(i))?;
        sentences.push(sentence.with_tags(tags).map_err(|e| e.in_sentence(i))?);
    }
    Ok(Corpus::new(sentences))
}

/// Tags every sentence of a corpus sequentially: decode, repair, attach.
/// Existing tags, if any, are ignored and replaced.
pub fn tag_corpus_serial(
    model: &TrainedModel,
    corpus: &Corpus,
    opts: &DecodeOptions,
) -> Result<Corpus> {
    let results = corpus
        .sentences()
        .iter()
        .map(|s| decode_sentence(model, s, opts))
        .collect();
    assemble(corpus, results)
}

/// Tags every sentence of a corpus, decoding sentences in parallel.
/// Output order matches input order and is byte-identical to the serial
/// path.
#[cfg(feature = "parallel")]
pub fn tag_corpus(model: &TrainedModel, corpus: &Corpus, opts: &DecodeOptions) -> Result<Corpus> {
    let results = corpus
        .sentences()
        .par_iter()
        .map(|s| decode_sentence(model, s, opts))
        .collect();
    assemble(corpus, results)
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn tag_corpus(model: &TrainedModel, corpus: &Corpus, opts: &DecodeOptions) -> Result<Corpus> {
    tag_corpus_serial(model, corpus, opts)
}
