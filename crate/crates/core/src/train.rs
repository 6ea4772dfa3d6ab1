//! One-call training: builds the tag inventory and all submodels from a
//! tagged corpus.

use crate::corpus::Corpus;
use crate::decoder::{TrainedModel, FORMAT_VERSION};
use crate::emission::{EmissionMode, EmissionModel, SuffixModel, SuffixParams};
use crate::error::{Error, Result};
use crate::transition::{TagInventory, TransitionModel};

/// Maximum suffix length used when neither a language nor an explicit
/// length is given.
pub const DEFAULT_SUFFIX_LEN: usize = 9;
/// Default rare-observation threshold.
pub const DEFAULT_RARE_MAX: u64 = 2;

/// Languages with tuned maximum suffix lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lang {
    Bengali,
    English,
    Hindi,
    Marathi,
    Punjabi,
    Tamil,
    Telugu,
}

impl Lang {
    pub const ALL: [Lang; 7] = [
        Lang::Bengali,
        Lang::English,
        Lang::Hindi,
        Lang::Marathi,
        Lang::Punjabi,
        Lang::Tamil,
        Lang::Telugu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lang::Bengali => "bengali",
            Lang::English => "english",
            Lang::Hindi => "hindi",
            Lang::Marathi => "marathi",
            Lang::Punjabi => "punjabi",
            Lang::Tamil => "tamil",
            Lang::Telugu => "telugu",
        }
    }

    /// The tuned maximum suffix length for this language.
    pub fn default_suffix_len(self) -> usize {
        match self {
            Lang::Bengali => 8,
            Lang::English => 9,
            Lang::Hindi => 9,
            Lang::Marathi => 9,
            Lang::Punjabi => 9,
            Lang::Tamil => 16,
            Lang::Telugu => 13,
        }
    }
}

impl std::str::FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lang::ALL
            .iter()
            .find(|lang| lang.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown language {s:?}")))
    }
}

/// Training configuration. An explicit suffix length overrides the
/// per-language default, which overrides [`DEFAULT_SUFFIX_LEN`].
#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub emission_mode: EmissionMode,
    pub rare_max: u64,
    pub suffix_len: Option<usize>,
    pub lang: Option<Lang>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            emission_mode: EmissionMode::Posterior,
            rare_max: DEFAULT_RARE_MAX,
            suffix_len: None,
            lang: None,
        }
    }
}

impl TrainOptions {
    pub fn resolved_suffix_len(&self) -> usize {
        self.suffix_len
            .or_else(|| self.lang.map(Lang::default_suffix_len))
            .unwrap_or(DEFAULT_SUFFIX_LEN)
    }
}

/// Trains a complete model on a fully tagged corpus.
pub fn train(corpus: &Corpus, opts: &TrainOptions) -> Result<TrainedModel> {
    let inventory = TagInventory::from_corpus(corpus)?;
    let transitions = TransitionModel::from_corpus(corpus, &inventory)?;
    let emissions = EmissionModel::build(corpus, &inventory, opts.emission_mode)?;
    let suffixes = SuffixModel::build(
        corpus,
        &inventory,
        SuffixParams {
            max_len: opts.resolved_suffix_len(),
            rare_max: opts.rare_max,
        },
    )?;
    TrainedModel::new(
        inventory,
        transitions,
        emissions,
        suffixes,
        FORMAT_VERSION.to_string(),
    )
}
