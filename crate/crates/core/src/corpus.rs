//! Corpus data model: observation triplets, NE tags, sentences.
//!
//! The tagger never looks at raw text. Its observed symbol is a *triplet*
//! of word, POS tag and chunk tag, and its hidden state is a named-entity
//! tag in the B/I/E/O scheme (B opens an entity, I continues it, E marks
//! the last token of a multi-token entity, O is outside any entity).

use std::fmt;

use crate::error::{Error, Result};

fn check_field(field: &'static str, value: &str) -> Result<()> {
    if value.contains('\t') || value.contains('\n') {
        return Err(Error::InvalidInput(format!(
            "{field} must not contain tab or newline characters"
        )));
    }
    Ok(())
}

/// The observed symbol emitted by the model: a word together with its POS
/// tag and chunk tag. Equality is exact byte equality on all three fields;
/// this identity keys every emission statistic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObservationTriplet {
    word: String,
    pos: String,
    chunk: String,
}

impl ObservationTriplet {
    /// Builds a triplet. The word must be non-empty and no field may
    /// contain tab or newline characters.
    pub fn new(
        word: impl Into<String>,
        pos: impl Into<String>,
        chunk: impl Into<String>,
    ) -> Result<Self> {
        let (word, pos, chunk) = (word.into(), pos.into(), chunk.into());
        if word.is_empty() {
            return Err(Error::InvalidInput("word must be non-empty".into()));
        }
        check_field("word", &word)?;
        check_field("pos", &pos)?;
        check_field("chunk", &chunk)?;
        Ok(Self { word, pos, chunk })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn pos(&self) -> &str {
        &self.pos
    }

    pub fn chunk(&self) -> &str {
        &self.chunk
    }
}

impl fmt::Display for ObservationTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.word, self.pos, self.chunk)
    }
}

/// Position of a token relative to an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeKind {
    /// Not part of any entity (`O`).
    Outside,
    /// First token of an entity (`B-XXX`).
    Begin,
    /// Interior token of an entity (`I-XXX`).
    Inside,
    /// Last token of a multi-token entity (`E-XXX`).
    End,
}

impl NeKind {
    fn prefix(self) -> &'static str {
        match self {
            NeKind::Outside => "O",
            NeKind::Begin => "B",
            NeKind::Inside => "I",
            NeKind::End => "E",
        }
    }
}

pub(crate) fn check_category(category: &str) -> Result<()> {
    if category.is_empty() {
        return Err(Error::InvalidInput("category must be non-empty".into()));
    }
    if category.contains(char::is_whitespace) || category.contains('-') {
        return Err(Error::InvalidInput(format!(
            "category {category:?} must not contain whitespace or '-'"
        )));
    }
    Ok(())
}

/// A named-entity tag: a kind plus the entity category it carries.
/// The category is empty exactly for `O` tags, and never contains
/// whitespace or the `-` separator used by the surface form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeTag {
    kind: NeKind,
    category: String,
}

impl NeTag {
    /// The `O` tag.
    pub fn outside() -> Self {
        Self {
            kind: NeKind::Outside,
            category: String::new(),
        }
    }

    /// Builds a categorized tag (`B-`, `I-` or `E-`).
    pub fn new(kind: NeKind, category: impl Into<String>) -> Result<Self> {
        let category = category.into();
        if kind == NeKind::Outside {
            if !category.is_empty() {
                return Err(Error::InvalidInput(
                    "O tags must not carry a category".into(),
                ));
            }
            return Ok(Self::outside());
        }
        check_category(&category)?;
        Ok(Self { kind, category })
    }

    /// Parses a surface form: `O`, `B-CAT`, `I-CAT` or `E-CAT`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Self::outside());
        }
        let kind = match s.as_bytes().first() {
            Some(b'B') => NeKind::Begin,
            Some(b'I') => NeKind::Inside,
            Some(b'E') => NeKind::End,
            _ => {
                return Err(Error::InvalidInput(format!("invalid NE tag {s:?}")));
            }
        };
        match s[1..].strip_prefix('-') {
            Some(category) if !category.is_empty() => Self::new(kind, category)
                .map_err(|_| Error::InvalidInput(format!("invalid NE tag {s:?}"))),
            _ => Err(Error::InvalidInput(format!("invalid NE tag {s:?}"))),
        }
    }

    pub fn kind(&self) -> NeKind {
        self.kind
    }

    /// The entity category; empty for `O`.
    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn is_outside(&self) -> bool {
        self.kind == NeKind::Outside
    }

    /// Canonical surface form (`O` or `KIND-CAT`).
    pub fn surface(&self) -> String {
        match self.kind {
            NeKind::Outside => "O".to_string(),
            kind => format!("{}-{}", kind.prefix(), self.category),
        }
    }
}

impl fmt::Display for NeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NeKind::Outside => f.write_str("O"),
            kind => write!(f, "{}-{}", kind.prefix(), self.category),
        }
    }
}

impl std::str::FromStr for NeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// A sentence: a non-empty token sequence, optionally tagged. When tags
/// are present there is exactly one per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<ObservationTriplet>,
    tags: Option<Vec<NeTag>>,
}

impl Sentence {
    pub fn untagged(tokens: Vec<ObservationTriplet>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput(
                "sentence must contain at least one token".into(),
            ));
        }
        Ok(Self {
            tokens,
            tags: None,
        })
    }

    pub fn tagged(tokens: Vec<ObservationTriplet>, tags: Vec<NeTag>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput(
                "sentence must contain at least one token".into(),
            ));
        }
        if tokens.len() != tags.len() {
            return Err(Error::InvalidInput(format!(
                "sentence has {} tokens but {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        Ok(Self {
            tokens,
            tags: Some(tags),
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[ObservationTriplet] {
        &self.tokens
    }

    pub fn tags(&self) -> Option<&[NeTag]> {
        self.tags.as_deref()
    }

    pub fn is_tagged(&self) -> bool {
        self.tags.is_some()
    }

    /// A copy of the sentence without its tags.
    pub fn stripped(&self) -> Sentence {
        Sentence {
            tokens: self.tokens.clone(),
            tags: None,
        }
    }

    /// A copy of the sentence with the given tags attached.
    pub fn with_tags(&self, tags: Vec<NeTag>) -> Result<Sentence> {
        Sentence::tagged(self.tokens.clone(), tags)
    }
}

/// An ordered collection of sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Self { sentences }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn is_fully_tagged(&self) -> bool {
        self.sentences.iter().all(Sentence::is_tagged)
    }

    /// A copy of the corpus with all tags removed.
    pub fn stripped(&self) -> Corpus {
        Corpus {
            sentences: self.sentences.iter().map(Sentence::stripped).collect(),
        }
    }
}

impl FromIterator<Sentence> for Corpus {
    fn from_iter<I: IntoIterator<Item = Sentence>>(iter: I) -> Self {
        Corpus {
            sentences: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_rejects_tabs_and_empty_word() {
        assert!(ObservationTriplet::new("a\tb", "N", "C").is_err());
        assert!(ObservationTriplet::new("a", "N\n", "C").is_err());
        assert!(ObservationTriplet::new("", "N", "C").is_err());
        assert!(ObservationTriplet::new("a", "", "").is_ok());
    }

    #[test]
    fn tag_surface_round_trip() {
        for s in ["O", "B-PER", "I-LOCATION", "E-X"] {
            assert_eq!(NeTag::parse(s).unwrap().surface(), s);
        }
    }

    #[test]
    fn tag_parse_rejects_bad_surfaces() {
        for s in ["", "B", "B-", "Q-PER", "B-A-B", "B-A B", "o", "I-"] {
            assert!(NeTag::parse(s).is_err(), "{s:?} should be rejected");
        }
    }

    #[test]
    fn outside_tag_has_empty_category() {
        let tag = NeTag::outside();
        assert_eq!(tag.kind(), NeKind::Outside);
        assert_eq!(tag.category(), "");
        assert!(NeTag::new(NeKind::Outside, "PER").is_err());
        assert!(NeTag::new(NeKind::Begin, "").is_err());
    }

    #[test]
    fn sentence_requires_matching_lengths() {
        let t = ObservationTriplet::new("w", "N", "C").unwrap();
        assert!(Sentence::untagged(vec![]).is_err());
        assert!(Sentence::tagged(vec![t.clone()], vec![]).is_err());
        let s = Sentence::tagged(vec![t], vec![NeTag::outside()]).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.is_tagged());
        assert!(!s.stripped().is_tagged());
    }
}
