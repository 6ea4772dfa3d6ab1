//! Tag inventory, n-gram statistics and smoothed trigram transition
//! probabilities.
//!
//! Every sentence contributes the padded tag sequence
//! `<s> <s> t1 .. tn </s>` to trigram counting and `<s> t1 .. tn </s>`
//! to bigram counting. Unigram counts cover `t1..tn` and the end marker
//! but not the start marker; the start-history denominators `C(<s>)` and
//! `C(<s>,<s>)` both equal the number of sentences, which keeps every
//! conditional normalizable over tags plus the end marker.

use std::collections::HashMap;

use crate::corpus::{Corpus, NeTag};
use crate::error::{Error, Result};

/// Reserved surface form of the start boundary symbol.
pub const START_SURFACE: &str = "<s>";
/// Reserved surface form of the end boundary symbol.
pub const END_SURFACE: &str = "</s>";

/// Dense index of a tag in a [`TagInventory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(u32);

impl TagId {
    pub(crate) fn new(index: usize) -> Self {
        TagId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// History symbol of a transition: a real tag or the start boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hist {
    Tag(TagId),
    Start,
}

/// Predicted symbol of a transition: a real tag or the end boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Next {
    Tag(TagId),
    End,
}

impl Hist {
    fn as_next(self) -> Option<Next> {
        match self {
            Hist::Tag(t) => Some(Next::Tag(t)),
            Hist::Start => None,
        }
    }
}

/// The NE tags observed in training, with dense, stable indices in
/// first-seen order. The boundary symbols are never members.
#[derive(Debug, Clone)]
pub struct TagInventory {
    tags: Vec<NeTag>,
    surfaces: Vec<String>,
    index: HashMap<String, TagId>,
}

impl TagInventory {
    /// Collects the inventory from a fully tagged corpus in first-seen
    /// order.
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut inv = TagInventory {
            tags: Vec::new(),
            surfaces: Vec::new(),
            index: HashMap::new(),
        };
        for (si, sentence) in corpus.sentences().iter().enumerate() {
            let tags = sentence
                .tags()
                .ok_or(Error::UntaggedSentence { sentence: si })?;
            for tag in tags {
                inv.intern(tag);
            }
        }
        Ok(inv)
    }

    /// Rebuilds an inventory from serialized surfaces, preserving order.
    pub fn from_surfaces<I, S>(surfaces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut inv = TagInventory {
            tags: Vec::new(),
            surfaces: Vec::new(),
            index: HashMap::new(),
        };
        for surface in surfaces {
            let surface = surface.as_ref();
            let tag = NeTag::parse(surface)?;
            if inv.index.contains_key(surface) {
                return Err(Error::InvalidInput(format!(
                    "duplicate tag {surface:?} in inventory"
                )));
            }
            inv.intern(&tag);
        }
        if inv.tags.is_empty() {
            return Err(Error::InvalidInput("empty tag inventory".into()));
        }
        Ok(inv)
    }

    fn intern(&mut self, tag: &NeTag) -> TagId {
        let surface = tag.surface();
        if let Some(&id) = self.index.get(&surface) {
            return id;
        }
        let id = TagId::new(self.tags.len());
        self.tags.push(tag.clone());
        self.index.insert(surface.clone(), id);
        self.surfaces.push(surface);
        id
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn id(&self, surface: &str) -> Option<TagId> {
        self.index.get(surface).copied()
    }

    pub fn tag(&self, id: TagId) -> &NeTag {
        &self.tags[id.index()]
    }

    pub fn surface(&self, id: TagId) -> &str {
        &self.surfaces[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = TagId> + '_ {
        (0..self.tags.len()).map(TagId::new)
    }

    /// Resolves a surface form as a history symbol (`<s>` or a tag).
    pub fn hist(&self, surface: &str) -> Result<Hist> {
        if surface == START_SURFACE {
            return Ok(Hist::Start);
        }
        self.id(surface).map(Hist::Tag).ok_or(Error::UnknownTag {
            tag: surface.to_string(),
        })
    }

    /// Resolves a surface form as a predicted symbol (`</s>` or a tag).
    pub fn next(&self, surface: &str) -> Result<Next> {
        if surface == END_SURFACE {
            return Ok(Next::End);
        }
        self.id(surface).map(Next::Tag).ok_or(Error::UnknownTag {
            tag: surface.to_string(),
        })
    }

    pub fn hist_surface(&self, h: Hist) -> &str {
        match h {
            Hist::Start => START_SURFACE,
            Hist::Tag(t) => self.surface(t),
        }
    }

    pub fn next_surface(&self, n: Next) -> &str {
        match n {
            Next::End => END_SURFACE,
            Next::Tag(t) => self.surface(t),
        }
    }
}

/// Raw tag n-gram counts plus the sentence count that backs the
/// start-boundary history denominators.
#[derive(Debug, Clone, Default)]
pub struct TransitionCounts {
    unigrams: HashMap<Next, u64>,
    bigrams: HashMap<(Hist, Next), u64>,
    trigrams: HashMap<(Hist, Hist, Next), u64>,
    total: u64,
    sentences: u64,
}

impl TransitionCounts {
    pub fn unigram(&self, t: Next) -> u64 {
        self.unigrams.get(&t).copied().unwrap_or(0)
    }

    pub fn bigram(&self, h: Hist, t: Next) -> u64 {
        self.bigrams.get(&(h, t)).copied().unwrap_or(0)
    }

    pub fn trigram(&self, h2: Hist, h1: Hist, t: Next) -> u64 {
        self.trigrams.get(&(h2, h1, t)).copied().unwrap_or(0)
    }

    /// Count of a unigram history; `C(<s>)` is the sentence count.
    pub fn hist1(&self, h: Hist) -> u64 {
        match h.as_next() {
            Some(next) => self.unigram(next),
            None => self.sentences,
        }
    }

    /// Count of a bigram history; `C(<s>,<s>)` is the sentence count.
    pub fn hist2(&self, h2: Hist, h1: Hist) -> u64 {
        match h1.as_next() {
            Some(next) => self.bigram(h2, next),
            None => match h2 {
                Hist::Start => self.sentences,
                Hist::Tag(_) => 0,
            },
        }
    }

    /// N: tag emissions including one end marker per sentence.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (Next, u64)> + '_ {
        self.unigrams.iter().map(|(&k, &v)| (k, v))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = ((Hist, Next), u64)> + '_ {
        self.bigrams.iter().map(|(&k, &v)| (k, v))
    }

    pub fn trigrams(&self) -> impl Iterator<Item = ((Hist, Hist, Next), u64)> + '_ {
        self.trigrams.iter().map(|(&k, &v)| (k, v))
    }

    /// Rebuilds counts from serialized records.
    pub fn from_records(
        unigrams: impl IntoIterator<Item = (Next, u64)>,
        bigrams: impl IntoIterator<Item = ((Hist, Next), u64)>,
        trigrams: impl IntoIterator<Item = ((Hist, Hist, Next), u64)>,
        sentences: u64,
    ) -> Self {
        let unigrams: HashMap<Next, u64> = unigrams.into_iter().collect();
        let total = unigrams.values().sum();
        TransitionCounts {
            unigrams,
            bigrams: bigrams.into_iter().collect(),
            trigrams: trigrams.into_iter().collect(),
            total,
            sentences,
        }
    }
}

/// Accumulates the padded n-gram counts of a fully tagged corpus.
pub fn count_ngrams(corpus: &Corpus, inventory: &TagInventory) -> Result<TransitionCounts> {
    let mut counts = TransitionCounts::default();
    for (si, sentence) in corpus.sentences().iter().enumerate() {
        let tags = sentence
            .tags()
            .ok_or(Error::UntaggedSentence { sentence: si })?;
        let ids: Vec<TagId> = tags
            .iter()
            .map(|tag| {
                inventory.id(&tag.surface()).ok_or(Error::UnknownTag {
                    tag: tag.surface(),
                })
            })
            .collect::<Result<_>>()?;
        let n = ids.len();
        for &t in &ids {
            *counts.unigrams.entry(Next::Tag(t)).or_default() += 1;
        }
        *counts.unigrams.entry(Next::End).or_default() += 1;
        counts.total += n as u64 + 1;
        counts.sentences += 1;

        let hist = |i: usize| {
            if i == 0 {
                Hist::Start
            } else {
                Hist::Tag(ids[i - 1])
            }
        };
        for i in 0..=n {
            let next = if i < n { Next::Tag(ids[i]) } else { Next::End };
            let h1 = hist(i);
            let h2 = if i >= 2 { Hist::Tag(ids[i - 2]) } else { Hist::Start };
            *counts.bigrams.entry((h1, next)).or_default() += 1;
            *counts.trigrams.entry((h2, h1, next)).or_default() += 1;
        }
    }
    Ok(counts)
}

/// Interpolation weights of the smoothed trigram transition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambdas {
    pub trigram: f64,
    pub bigram: f64,
    pub unigram: f64,
}

impl Lambdas {
    pub fn sum(&self) -> f64 {
        self.trigram + self.bigram + self.unigram
    }
}

fn held_out_ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Deleted interpolation: each trigram type's count is added to the
/// accumulator of whichever lowered-count estimate is largest (trigram
/// preferred over bigram over unigram on ties), and the accumulators are
/// normalized to sum to one.
pub fn estimate_lambdas(counts: &TransitionCounts) -> Result<Lambdas> {
    if counts.total <= 1 {
        return Err(Error::DegenerateCorpus);
    }
    // Integer accumulators keep the result independent of map order.
    let mut acc = [0u64; 3];
    for (&(h2, h1, t), &c) in &counts.trigrams {
        debug_assert!(c >= 1);
        let tri = held_out_ratio(c - 1, counts.hist2(h2, h1) - 1);
        let bi = held_out_ratio(counts.bigram(h1, t) - 1, counts.hist1(h1) - 1);
        let uni = held_out_ratio(counts.unigram(t) - 1, counts.total - 1);
        let mut best = tri;
        let mut which = 0;
        if bi > best {
            best = bi;
            which = 1;
        }
        if uni > best {
            which = 2;
        }
        acc[which] += c;
    }
    let sum: u64 = acc.iter().sum();
    if sum == 0 {
        return Err(Error::DegenerateCorpus);
    }
    Ok(Lambdas {
        trigram: acc[0] as f64 / sum as f64,
        bigram: acc[1] as f64 / sum as f64,
        unigram: acc[2] as f64 / sum as f64,
    })
}

/// Finalized transition model: counts plus interpolation weights.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    counts: TransitionCounts,
    lambdas: Lambdas,
}

impl TransitionModel {
    pub fn new(counts: TransitionCounts, lambdas: Lambdas) -> Result<Self> {
        if !(lambdas.sum() - 1.0).abs().le(&1e-12)
            || [lambdas.trigram, lambdas.bigram, lambdas.unigram]
                .iter()
                .any(|l| !(0.0..=1.0).contains(l))
        {
            return Err(Error::InvalidInput(format!(
                "interpolation weights must be in [0,1] and sum to 1, got {lambdas:?}"
            )));
        }
        Ok(TransitionModel { counts, lambdas })
    }

    /// Counts and estimates weights in one step.
    pub fn from_corpus(corpus: &Corpus, inventory: &TagInventory) -> Result<Self> {
        let counts = count_ngrams(corpus, inventory)?;
        let lambdas = estimate_lambdas(&counts)?;
        TransitionModel::new(counts, lambdas)
    }

    pub fn counts(&self) -> &TransitionCounts {
        &self.counts
    }

    pub fn lambdas(&self) -> Lambdas {
        self.lambdas
    }

    /// Smoothed transition probability, mixing the maximum-likelihood
    /// trigram, bigram and unigram estimates. Ratios with zero
    /// denominators contribute zero.
    pub fn prob(&self, h2: Hist, h1: Hist, t: Next) -> f64 {
        let c = &self.counts;
        let tri = held_out_ratio(c.trigram(h2, h1, t), c.hist2(h2, h1));
        let bi = held_out_ratio(c.bigram(h1, t), c.hist1(h1));
        let uni = held_out_ratio(c.unigram(t), c.total);
        self.lambdas.trigram * tri + self.lambdas.bigram * bi + self.lambdas.unigram * uni
    }

    /// Like [`TransitionModel::prob`] but dropping the trigram term, for
    /// scoring a transition whose second history symbol is unavailable.
    pub fn prob_bigram_backoff(&self, h1: Hist, t: Next) -> f64 {
        let c = &self.counts;
        let bi = held_out_ratio(c.bigram(h1, t), c.hist1(h1));
        let uni = held_out_ratio(c.unigram(t), c.total);
        self.lambdas.bigram * bi + self.lambdas.unigram * uni
    }

    /// Surface-form convenience: resolves symbols through the inventory.
    pub fn prob_by_surface(
        &self,
        inventory: &TagInventory,
        h2: &str,
        h1: &str,
        t: &str,
    ) -> Result<f64> {
        Ok(self.prob(inventory.hist(h2)?, inventory.hist(h1)?, inventory.next(t)?))
    }
}
