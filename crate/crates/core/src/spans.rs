//! Conversions between per-token tag sequences and entity spans, and the
//! end-tag augmentation that turns plain B/I/O annotation into B/I/E/O.

use crate::corpus::{check_category, Corpus, NeKind, NeTag};
use crate::error::{Error, Result};

/// A typed entity occupying the token range `start..=end` of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    category: String,
    start: usize,
    end: usize,
}

impl EntitySpan {
    pub fn new(category: impl Into<String>, start: usize, end: usize) -> Result<Self> {
        let category = category.into();
        check_category(&category)?;
        if start > end {
            return Err(Error::InvalidInput(format!(
                "span start {start} exceeds end {end}"
            )));
        }
        Ok(Self {
            category,
            start,
            end,
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    /// First token index (inclusive).
    pub fn start(&self) -> usize {
        self.start
    }

    /// Last token index (inclusive).
    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// How span extraction treats I/E tags that do not continue an open
/// same-category entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanMode {
    /// Orphan I/E tags open a new span at that token. Model output may
    /// contain such runs before post-processing, so this is the default.
    Lenient,
    /// Orphan I/E tags are an error; used to validate gold corpora.
    Strict,
}

/// Extracts maximal entity spans from a tag sequence.
///
/// A span begins at a B tag and continues through same-category I/E tags;
/// an E tag closes its span; a category change, O, or a new B closes the
/// previous span. Under [`SpanMode::Lenient`] an orphan I/E starts a new
/// span at its own token and the function is total.
pub fn tags_to_spans(tags: &[NeTag], mode: SpanMode) -> Result<Vec<EntitySpan>> {
    let mut spans = Vec::new();
    // Category and start index of the currently open span.
    let mut open: Option<(&str, usize)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag.kind() {
            NeKind::Outside => {
                if let Some((cat, start)) = open.take() {
                    spans.push(EntitySpan::new(cat, start, i - 1)?);
                }
            }
            NeKind::Begin => {
                if let Some((cat, start)) = open.take() {
                    spans.push(EntitySpan::new(cat, start, i - 1)?);
                }
                open = Some((tag.category(), i));
            }
            NeKind::Inside => match open {
                Some((cat, _)) if cat == tag.category() => {}
                _ => {
                    if mode == SpanMode::Strict {
                        return Err(Error::InvalidScheme {
                            position: i,
                            reason: format!("orphan {} tag", tag.surface()),
                        });
                    }
                    if let Some((cat, start)) = open.take() {
                        spans.push(EntitySpan::new(cat, start, i - 1)?);
                    }
                    open = Some((tag.category(), i));
                }
            },
            NeKind::End => match open.take() {
                Some((cat, start)) if cat == tag.category() => {
                    spans.push(EntitySpan::new(cat, start, i)?);
                }
                other => {
                    if mode == SpanMode::Strict {
                        return Err(Error::InvalidScheme {
                            position: i,
                            reason: format!("orphan {} tag", tag.surface()),
                        });
                    }
                    if let Some((cat, start)) = other {
                        spans.push(EntitySpan::new(cat, start, i - 1)?);
                    }
                    spans.push(EntitySpan::new(tag.category(), i, i)?);
                }
            },
        }
    }
    if let Some((cat, start)) = open {
        spans.push(EntitySpan::new(cat, start, tags.len() - 1)?);
    }
    Ok(spans)
}

/// Renders non-overlapping spans as a canonical B/I/E/O tag sequence of
/// the given length. Inverse of [`tags_to_spans`] on well-formed input.
pub fn spans_to_tags(spans: &[EntitySpan], len: usize) -> Result<Vec<NeTag>> {
    let mut sorted: Vec<&EntitySpan> = spans.iter().collect();
    sorted.sort_by_key(|s| s.start());
    let mut tags = vec![NeTag::outside(); len];
    let mut prev_end: Option<usize> = None;
    for span in sorted {
        if span.end() >= len {
            return Err(Error::SpanOutOfBounds {
                end: span.end(),
                len,
            });
        }
        if let Some(end) = prev_end {
            if span.start() <= end {
                return Err(Error::OverlappingSpans {
                    position: span.start(),
                });
            }
        }
        prev_end = Some(span.end());
        tags[span.start()] = NeTag::new(NeKind::Begin, span.category())?;
        if span.len() >= 2 {
            for slot in tags.iter_mut().take(span.end()).skip(span.start() + 1) {
                *slot = NeTag::new(NeKind::Inside, span.category())?;
            }
            tags[span.end()] = NeTag::new(NeKind::End, span.category())?;
        }
    }
    Ok(tags)
}

/// Rewrites the final token of every entity of length two or more from I
/// to E, leaving everything else untouched. Single-token entities keep
/// their B tag. Errors if an E tag is already present.
pub fn augment_sentence_tags(tags: &[NeTag]) -> Result<Vec<NeTag>> {
    if let Some(pos) = tags.iter().position(|t| t.kind() == NeKind::End) {
        return Err(Error::InvalidScheme {
            position: pos,
            reason: "E tag already present; input must be plain B/I/O".into(),
        });
    }
    let mut out = tags.to_vec();
    let mut i = 0;
    while i < tags.len() {
        let starts_entity = match tags[i].kind() {
            NeKind::Begin => true,
            // Orphan I runs count as entities here too: only their final
            // token changes, matching the lenient span reading.
            NeKind::Inside => {
                i == 0
                    || tags[i - 1].is_outside()
                    || tags[i - 1].category() != tags[i].category()
            }
            _ => false,
        };
        if !starts_entity {
            i += 1;
            continue;
        }
        let cat = tags[i].category();
        let mut j = i + 1;
        while j < tags.len() && tags[j].kind() == NeKind::Inside && tags[j].category() == cat {
            j += 1;
        }
        if j - i >= 2 {
            out[j - 1] = NeTag::new(NeKind::End, cat)?;
        }
        i = j;
    }
    Ok(out)
}

/// Applies [`augment_sentence_tags`] to every tagged sentence of a corpus.
/// Untagged sentences pass through unchanged.
pub fn augment_end_tags(corpus: &Corpus) -> Result<Corpus> {
    let mut sentences = Vec::with_capacity(corpus.len());
    for (idx, sentence) in corpus.sentences().iter().enumerate() {
        match sentence.tags() {
            Some(tags) => {
                let augmented =
                    augment_sentence_tags(tags).map_err(|e| e.in_sentence(idx))?;
                sentences.push(sentence.with_tags(augmented).map_err(|e| e.in_sentence(idx))?);
            }
            None => sentences.push(sentence.clone()),
        }
    }
    Ok(Corpus::new(sentences))
}
