//! Observation statistics for known triplets and the rare-suffix model
//! that scores unknown ones.
//!
//! Unknown triplets are scored through a pseudo-word built by appending
//! the POS and chunk tags to the word, with a unit-separator control
//! character between the fields so suffixes cannot straddle field
//! boundaries. Suffix statistics are harvested from rare triplets only
//! (frequency at or below the rare threshold) and smoothed level by
//! level from the empty suffix upward; the resulting conditional is
//! turned into an emission-style score by dividing by the tag prior.

use std::collections::HashMap;

use crate::corpus::{Corpus, ObservationTriplet};
use crate::error::{Error, Result};
use crate::transition::{TagId, TagInventory};

/// Separator placed between word, POS and chunk in pseudo-words. Counts
/// as an ordinary character for suffix lengths.
pub const FIELD_SEPARATOR: char = '\u{1f}';

/// Which denominator turns a joint observation/tag count into a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionMode {
    /// `C(o,t) / C(o)`: rows over tags sum to one for every known
    /// observation. The default configuration.
    Posterior,
    /// `C(o,t) / C(t)`: the conventional likelihood estimate.
    Likelihood,
}

impl EmissionMode {
    /// Token used by the CLI and the model file.
    pub fn token(self) -> &'static str {
        match self {
            EmissionMode::Posterior => "paper",
            EmissionMode::Likelihood => "standard",
        }
    }

    pub fn from_token(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(EmissionMode::Posterior),
            "standard" => Ok(EmissionMode::Likelihood),
            _ => Err(Error::InvalidInput(format!("unknown emission mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct ObsEntry {
    total: u64,
    /// Sparse per-tag counts, sorted by tag id.
    per_tag: Vec<(TagId, u64)>,
}

impl ObsEntry {
    fn add(&mut self, tag: TagId, count: u64) {
        self.total += count;
        match self.per_tag.binary_search_by_key(&tag, |&(t, _)| t) {
            Ok(i) => self.per_tag[i].1 += count,
            Err(i) => self.per_tag.insert(i, (tag, count)),
        }
    }

    fn count(&self, tag: TagId) -> u64 {
        self.per_tag
            .binary_search_by_key(&tag, |&(t, _)| t)
            .map(|i| self.per_tag[i].1)
            .unwrap_or(0)
    }
}

/// Joint observation/tag counts plus per-tag totals.
#[derive(Debug, Clone)]
pub struct EmissionModel {
    mode: EmissionMode,
    entries: HashMap<ObservationTriplet, ObsEntry>,
    /// Token-position counts per tag, dense by tag id.
    tag_counts: Vec<u64>,
}

impl EmissionModel {
    /// Accumulates counts over every token position of a tagged corpus.
    pub fn build(corpus: &Corpus, inventory: &TagInventory, mode: EmissionMode) -> Result<Self> {
        let mut model = EmissionModel {
            mode,
            entries: HashMap::new(),
            tag_counts: vec![0; inventory.len()],
        };
        for (si, sentence) in corpus.sentences().iter().enumerate() {
            let tags = sentence
                .tags()
                .ok_or(Error::UntaggedSentence { sentence: si })?;
            for (token, tag) in sentence.tokens().iter().zip(tags) {
                let id = inventory.id(&tag.surface()).ok_or(Error::UnknownTag {
                    tag: tag.surface(),
                })?;
                model.add(token.clone(), id, 1);
            }
        }
        Ok(model)
    }

    /// Rebuilds a model from serialized joint counts.
    pub fn from_records(
        mode: EmissionMode,
        records: impl IntoIterator<Item = (ObservationTriplet, TagId, u64)>,
        inventory: &TagInventory,
    ) -> Self {
        let mut model = EmissionModel {
            mode,
            entries: HashMap::new(),
            tag_counts: vec![0; inventory.len()],
        };
        for (triplet, tag, count) in records {
            model.add(triplet, tag, count);
        }
        model
    }

    fn add(&mut self, triplet: ObservationTriplet, tag: TagId, count: u64) {
        self.tag_counts[tag.index()] += count;
        self.entries.entry(triplet).or_default().add(tag, count);
    }

    pub fn mode(&self) -> EmissionMode {
        self.mode
    }

    pub fn is_known(&self, o: &ObservationTriplet) -> bool {
        self.entries.contains_key(o)
    }

    /// Total count of an observation, zero if unseen.
    pub fn obs_count(&self, o: &ObservationTriplet) -> u64 {
        self.entries.get(o).map(|e| e.total).unwrap_or(0)
    }

    pub fn joint_count(&self, o: &ObservationTriplet, t: TagId) -> u64 {
        self.entries.get(o).map(|e| e.count(t)).unwrap_or(0)
    }

    pub fn tag_count(&self, t: TagId) -> u64 {
        self.tag_counts[t.index()]
    }

    /// Emission score of a known observation; zero when the pair was
    /// never seen. Unknown observations must take the suffix path.
    pub fn prob(&self, o: &ObservationTriplet, t: TagId) -> Result<f64> {
        let entry = self.entries.get(o).ok_or_else(|| Error::UnknownObservation {
            surface: o.to_string(),
        })?;
        let joint = entry.count(t);
        if joint == 0 {
            return Ok(0.0);
        }
        let denom = match self.mode {
            EmissionMode::Posterior => entry.total,
            EmissionMode::Likelihood => self.tag_counts[t.index()],
        };
        if denom == 0 {
            return Ok(0.0);
        }
        Ok(joint as f64 / denom as f64)
    }

    /// All stored (observation, tag, count) records, unordered.
    pub fn records(&self) -> impl Iterator<Item = (&ObservationTriplet, TagId, u64)> + '_ {
        self.entries
            .iter()
            .flat_map(|(o, e)| e.per_tag.iter().map(move |&(t, c)| (o, t, c)))
    }

    /// All stored (observation, total) pairs, unordered.
    pub fn observation_counts(&self) -> impl Iterator<Item = (&ObservationTriplet, u64)> + '_ {
        self.entries.iter().map(|(o, e)| (o, e.total))
    }
}

/// Build parameters for the suffix model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuffixParams {
    /// Maximum suffix length in characters.
    pub max_len: usize,
    /// Triplets with frequency at or below this contribute to the model.
    pub rare_max: u64,
}

/// Smoothed `P(tag | suffix)` estimates over rare pseudo-words, with the
/// tag priors needed to invert them into emission-style scores.
#[derive(Debug, Clone)]
pub struct SuffixModel {
    max_len: usize,
    rare_max: u64,
    theta: f64,
    /// `P(t)` over all token positions, dense by tag id.
    priors: Vec<f64>,
    /// Suffix string to dense conditional distribution over tags.
    table: HashMap<String, Vec<f64>>,
}

impl SuffixModel {
    /// The pseudo-word a triplet is reduced to for suffix analysis.
    pub fn pseudo_word(o: &ObservationTriplet) -> String {
        let mut pw = String::with_capacity(
            o.word().len() + o.pos().len() + o.chunk().len() + 2 * FIELD_SEPARATOR.len_utf8(),
        );
        pw.push_str(o.word());
        pw.push(FIELD_SEPARATOR);
        pw.push_str(o.pos());
        pw.push(FIELD_SEPARATOR);
        pw.push_str(o.chunk());
        pw
    }

    /// Harvests suffix statistics from every token whose triplet
    /// frequency is at most `rare_max` and smooths them bottom-up.
    pub fn build(corpus: &Corpus, inventory: &TagInventory, params: SuffixParams) -> Result<Self> {
        let n_tags = inventory.len();

        // Tag priors over the whole training corpus.
        let mut tag_counts = vec![0u64; n_tags];
        let mut token_total = 0u64;
        let mut obs_counts: HashMap<&ObservationTriplet, u64> = HashMap::new();
        for (si, sentence) in corpus.sentences().iter().enumerate() {
            let tags = sentence
                .tags()
                .ok_or(Error::UntaggedSentence { sentence: si })?;
            for (token, tag) in sentence.tokens().iter().zip(tags) {
                let id = inventory.id(&tag.surface()).ok_or(Error::UnknownTag {
                    tag: tag.surface(),
                })?;
                tag_counts[id.index()] += 1;
                token_total += 1;
                *obs_counts.entry(token).or_default() += 1;
            }
        }
        let priors: Vec<f64> = tag_counts
            .iter()
            .map(|&c| c as f64 / token_total as f64)
            .collect();
        let theta = sample_stddev(&priors);

        // Raw suffix/tag counts from rare tokens. Every suffix of length
        // 0..=min(max_len, |pseudo-word|) contributes, so the table is
        // closed under shortening.
        let mut raw: HashMap<String, Vec<u64>> = HashMap::new();
        let mut rare_seen = false;
        for sentence in corpus.sentences() {
            let tags = sentence.tags().unwrap();
            for (token, tag) in sentence.tokens().iter().zip(tags) {
                if obs_counts[token] > params.rare_max {
                    continue;
                }
                rare_seen = true;
                let id = inventory.id(&tag.surface()).unwrap();
                let pw = Self::pseudo_word(token);
                let offsets: Vec<usize> = pw.char_indices().map(|(i, _)| i).collect();
                let n_chars = offsets.len();
                for len in 0..=n_chars.min(params.max_len) {
                    let start = if len == 0 {
                        pw.len()
                    } else {
                        offsets[n_chars - len]
                    };
                    let suffix = &pw[start..];
                    match raw.get_mut(suffix) {
                        Some(counts) => counts[id.index()] += 1,
                        None => {
                            let mut counts = vec![0u64; n_tags];
                            counts[id.index()] += 1;
                            raw.insert(suffix.to_string(), counts);
                        }
                    }
                }
            }
        }
        if !rare_seen {
            return Err(Error::NoRareWords);
        }

        // Smooth level by level: the empty suffix is the raw rare-word
        // distribution, each longer suffix mixes its own estimate with
        // its one-character-shorter parent.
        let mut keys: Vec<(usize, String)> = raw
            .keys()
            .map(|k| (k.chars().count(), k.clone()))
            .collect();
        keys.sort();
        let mut table: HashMap<String, Vec<f64>> = HashMap::with_capacity(raw.len());
        for (len, key) in keys {
            let counts = &raw[&key];
            let total: u64 = counts.iter().sum();
            let ml: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
            let probs = if len == 0 {
                ml
            } else {
                let first_char_len = key.chars().next().unwrap().len_utf8();
                let parent = &table[&key[first_char_len..]];
                ml.iter()
                    .zip(parent)
                    .map(|(&p_ml, &p_parent)| (p_ml + theta * p_parent) / (1.0 + theta))
                    .collect()
            };
            table.insert(key, probs);
        }

        Ok(SuffixModel {
            max_len: params.max_len,
            rare_max: params.rare_max,
            theta,
            priors,
            table,
        })
    }

    /// Rebuilds a model from serialized parts.
    pub fn from_parts(
        max_len: usize,
        rare_max: u64,
        theta: f64,
        priors: Vec<f64>,
        records: impl IntoIterator<Item = (String, TagId, f64)>,
        inventory: &TagInventory,
    ) -> Result<Self> {
        if priors.len() != inventory.len() {
            return Err(Error::InvalidInput(
                "tag prior table does not match the inventory".into(),
            ));
        }
        if theta < 0.0 {
            return Err(Error::InvalidInput("theta must be non-negative".into()));
        }
        let mut table: HashMap<String, Vec<f64>> = HashMap::new();
        for (suffix, tag, prob) in records {
            table
                .entry(suffix)
                .or_insert_with(|| vec![0.0; inventory.len()])[tag.index()] = prob;
        }
        if !table.contains_key("") {
            return Err(Error::InvalidInput(
                "suffix table is missing the empty suffix".into(),
            ));
        }
        Ok(SuffixModel {
            max_len,
            rare_max,
            theta,
            priors,
            table,
        })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn rare_max(&self) -> u64 {
        self.rare_max
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn prior(&self, t: TagId) -> f64 {
        self.priors[t.index()]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// The longest stored suffix of the pseudo-word, capped at
    /// `max_len`. The empty suffix always matches.
    pub fn matched_suffix<'a>(&self, pseudo_word: &'a str) -> &'a str {
        let offsets: Vec<usize> = pseudo_word.char_indices().map(|(i, _)| i).collect();
        let n_chars = offsets.len();
        for len in (1..=n_chars.min(self.max_len)).rev() {
            let suffix = &pseudo_word[offsets[n_chars - len]..];
            if self.table.contains_key(suffix) {
                return suffix;
            }
        }
        ""
    }

    /// The smoothed conditional for a stored suffix.
    pub fn suffix_prob(&self, suffix: &str, t: TagId) -> Option<f64> {
        self.table.get(suffix).map(|probs| probs[t.index()])
    }

    /// Emission-style score for an unknown observation: the suffix
    /// conditional divided by the tag prior. The observation-probability
    /// factor is constant across tags at a fixed position and is
    /// dropped, so scores are comparable only within one position.
    pub fn score(&self, o: &ObservationTriplet, t: TagId) -> f64 {
        let pw = Self::pseudo_word(o);
        let suffix = self.matched_suffix(&pw);
        let cond = self.table[suffix][t.index()];
        let prior = self.priors[t.index()];
        if prior == 0.0 {
            0.0
        } else {
            cond / prior
        }
    }

    /// All stored (suffix, distribution) pairs, unordered.
    pub fn suffixes(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.table.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Sample standard deviation (denominator `n - 1`); zero when fewer than
/// two values.
fn sample_stddev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n - 1) as f64;
    var.sqrt()
}
