//! Reader for the supported SSF subset: `<Sentence id="N">` blocks holding
//! numbered token lines (`index<TAB>word<TAB>POS`), numbered group-open
//! lines (`index<TAB>((<TAB>LABEL[<TAB><fs ne=CAT>]`) and group-close
//! lines (`index?<TAB>))`). Groups supply each token's chunk tag as B-/I-
//! of the group label; the innermost group carrying an `ne` attribute
//! supplies the NE tag. Anything outside this subset must be converted to
//! TSV before ingestion.

use crate::corpus::{check_category, Corpus, NeKind, NeTag, ObservationTriplet, Sentence};
use crate::error::{Error, Result};

struct Frame {
    label: String,
    ne: Option<String>,
    /// Tokens emitted anywhere inside this group so far.
    tokens_emitted: usize,
    /// Index of the last direct child, for monotonicity checks.
    last_child: Option<Vec<u64>>,
}

struct SentenceState {
    tokens: Vec<ObservationTriplet>,
    tags: Vec<NeTag>,
    stack: Vec<Frame>,
    top_last_child: Option<Vec<u64>>,
}

fn parse_index(s: &str) -> Option<Vec<u64>> {
    if s.is_empty() {
        return None;
    }
    s.split('.').map(|part| part.parse::<u64>().ok()).collect()
}

fn check_sibling_order(
    last: &mut Option<Vec<u64>>,
    index: Vec<u64>,
    line: usize,
) -> Result<()> {
    if let Some(prev) = last {
        if *prev >= index {
            return Err(Error::MalformedTokenLine {
                line,
                reason: format!(
                    "index {} does not follow {} within its level",
                    render_index(&index),
                    render_index(prev)
                ),
            });
        }
    }
    *last = Some(index);
    Ok(())
}

fn render_index(index: &[u64]) -> String {
    index
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(".")
}

fn parse_ne_attr(field: &str, line: usize) -> Result<String> {
    let inner = field
        .strip_prefix("<fs ne=")
        .and_then(|rest| rest.strip_suffix('>'))
        .ok_or_else(|| Error::MalformedTokenLine {
            line,
            reason: format!("expected <fs ne=CAT>, got {field:?}"),
        })?;
    check_category(inner).map_err(|e| Error::MalformedTokenLine {
        line,
        reason: e.to_string(),
    })?;
    Ok(inner.to_string())
}

fn parse_sentence_open(line: &str) -> Option<()> {
    let id = line.strip_prefix("<Sentence id=\"")?.strip_suffix("\">")?;
    if !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()) {
        Some(())
    } else {
        None
    }
}

/// Parses an SSF-subset document into a fully tagged corpus (tokens in
/// sentences without NE groups all receive `O`).
pub fn parse_ssf(text: &str) -> Result<Corpus> {
    let mut sentences: Vec<Sentence> = Vec::new();
    let mut state: Option<SentenceState> = None;
    let mut lineno = 0;

    for (idx, line) in text.lines().enumerate() {
        lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let Some(current) = state.as_mut() else {
            if parse_sentence_open(line).is_some() {
                state = Some(SentenceState {
                    tokens: Vec::new(),
                    tags: Vec::new(),
                    stack: Vec::new(),
                    top_last_child: None,
                });
                continue;
            }
            return Err(Error::MissingSentenceDelimiter { line: lineno });
        };

        if line == "</Sentence>" {
            if !current.stack.is_empty() {
                return Err(Error::UnbalancedGroup { line: lineno });
            }
            if current.tokens.is_empty() {
                return Err(Error::MalformedTokenLine {
                    line: lineno,
                    reason: "sentence contains no tokens".into(),
                });
            }
            let done = state.take().unwrap();
            sentences.push(Sentence::tagged(done.tokens, done.tags)?);
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();

        // Group close: `))` optionally preceded by an index field.
        if fields.last() == Some(&"))") && fields.len() <= 2 {
            if fields.len() == 2 && !fields[0].is_empty() && parse_index(fields[0]).is_none() {
                return Err(Error::MalformedTokenLine {
                    line: lineno,
                    reason: format!("invalid index {:?}", fields[0]),
                });
            }
            if current.stack.pop().is_none() {
                return Err(Error::UnbalancedGroup { line: lineno });
            }
            continue;
        }

        // Group open: `index<TAB>((<TAB>LABEL[<TAB><fs ne=CAT>]`.
        if fields.len() >= 2 && fields[1] == "((" {
            if fields.len() < 3 || fields.len() > 4 || fields[2].is_empty() {
                return Err(Error::MalformedTokenLine {
                    line: lineno,
                    reason: "group open must be index, ((, LABEL and an optional <fs ne=CAT>"
                        .into(),
                });
            }
            let index = parse_index(fields[0]).ok_or_else(|| Error::MalformedTokenLine {
                line: lineno,
                reason: format!("invalid index {:?}", fields[0]),
            })?;
            let level_last = match current.stack.last_mut() {
                Some(frame) => &mut frame.last_child,
                None => &mut current.top_last_child,
            };
            check_sibling_order(level_last, index, lineno)?;
            let ne = if fields.len() == 4 {
                Some(parse_ne_attr(fields[3], lineno)?)
            } else {
                None
            };
            current.stack.push(Frame {
                label: fields[2].to_string(),
                ne,
                tokens_emitted: 0,
                last_child: None,
            });
            continue;
        }

        // Token line: `index<TAB>word<TAB>POS`.
        if fields.len() != 3 {
            return Err(Error::MalformedTokenLine {
                line: lineno,
                reason: format!("expected index, word and POS, got {} fields", fields.len()),
            });
        }
        let index = parse_index(fields[0]).ok_or_else(|| Error::MalformedTokenLine {
            line: lineno,
            reason: format!("invalid index {:?}", fields[0]),
        })?;
        let level_last = match current.stack.last_mut() {
            Some(frame) => &mut frame.last_child,
            None => &mut current.top_last_child,
        };
        check_sibling_order(level_last, index, lineno)?;

        let chunk = match current.stack.last() {
            Some(frame) => format!(
                "{}-{}",
                if frame.tokens_emitted == 0 { "B" } else { "I" },
                frame.label
            ),
            None => "O".to_string(),
        };
        let ne_tag = match current
            .stack
            .iter()
            .rev()
            .find(|frame| frame.ne.is_some())
        {
            Some(frame) => {
                let kind = if frame.tokens_emitted == 0 {
                    NeKind::Begin
                } else {
                    NeKind::Inside
                };
                NeTag::new(kind, frame.ne.clone().unwrap())?
            }
            None => NeTag::outside(),
        };
        let triplet =
            ObservationTriplet::new(fields[1], fields[2], chunk).map_err(|e| {
                Error::MalformedTokenLine {
                    line: lineno,
                    reason: e.to_string(),
                }
            })?;
        for frame in &mut current.stack {
            frame.tokens_emitted += 1;
        }
        current.tokens.push(triplet);
        current.tags.push(ne_tag);
    }

    if state.is_some() {
        return Err(Error::MissingSentenceDelimiter { line: lineno + 1 });
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus::new(sentences))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface_tags(corpus: &Corpus, i: usize) -> Vec<String> {
        corpus.sentences()[i]
            .tags()
            .unwrap()
            .iter()
            .map(NeTag::surface)
            .collect()
    }

    fn chunks(corpus: &Corpus, i: usize) -> Vec<String> {
        corpus.sentences()[i]
            .tokens()
            .iter()
            .map(|t| t.chunk().to_string())
            .collect()
    }

    #[test]
    fn two_token_ne_group() {
        let text = "<Sentence id=\"1\">\n\
                    1\t((\tNP\t<fs ne=PERSON>\n\
                    1.1\tRabindranath\tNNP\n\
                    1.2\tTagore\tNNP\n\
                    \t))\n\
                    </Sentence>\n";
        let corpus = parse_ssf(text).unwrap();
        assert_eq!(surface_tags(&corpus, 0), vec!["B-PERSON", "I-PERSON"]);
        assert_eq!(chunks(&corpus, 0), vec!["B-NP", "I-NP"]);
    }

    #[test]
    fn sentence_without_ne_groups_is_all_outside() {
        let text = "<Sentence id=\"1\">\n\
                    1\t((\tNP\n\
                    1.1\train\tNN\n\
                    1.2\tfell\tVBD\n\
                    \t))\n\
                    </Sentence>\n";
        let corpus = parse_ssf(text).unwrap();
        assert_eq!(surface_tags(&corpus, 0), vec!["O", "O"]);
    }

    #[test]
    fn nested_group_inherits_outer_ne() {
        let text = "<Sentence id=\"1\">\n\
                    1\t((\tNP\t<fs ne=ORG>\n\
                    1.1\tJadavpur\tNNP\n\
                    1.2\t((\tNP\n\
                    1.2.1\tUniversity\tNNP\n\
                    \t))\n\
                    \t))\n\
                    </Sentence>\n";
        let corpus = parse_ssf(text).unwrap();
        assert_eq!(surface_tags(&corpus, 0), vec!["B-ORG", "I-ORG"]);
        // The chunk tag comes from the innermost group.
        assert_eq!(chunks(&corpus, 0), vec!["B-NP", "B-NP"]);
    }

    #[test]
    fn bare_tokens_get_outside_chunk() {
        let text = "<Sentence id=\"1\">\n\
                    1\tpublished\tVBD\n\
                    </Sentence>\n";
        let corpus = parse_ssf(text).unwrap();
        assert_eq!(chunks(&corpus, 0), vec!["O"]);
        assert_eq!(surface_tags(&corpus, 0), vec!["O"]);
    }

    #[test]
    fn unbalanced_groups_are_rejected() {
        let open_only = "<Sentence id=\"1\">\n\
                         1\t((\tNP\n\
                         1.1\ta\tNN\n\
                         </Sentence>\n";
        assert!(matches!(
            parse_ssf(open_only),
            Err(Error::UnbalancedGroup { line: 4 })
        ));
        let close_only = "<Sentence id=\"1\">\n\
                          1\ta\tNN\n\
                          \t))\n\
                          </Sentence>\n";
        assert!(matches!(
            parse_ssf(close_only),
            Err(Error::UnbalancedGroup { line: 3 })
        ));
    }

    #[test]
    fn stray_lines_and_eof_need_delimiters() {
        assert!(matches!(
            parse_ssf("1\ta\tNN\n"),
            Err(Error::MissingSentenceDelimiter { line: 1 })
        ));
        assert!(matches!(
            parse_ssf("<Sentence id=\"1\">\n1\ta\tNN\n"),
            Err(Error::MissingSentenceDelimiter { line: 3 })
        ));
    }

    #[test]
    fn sibling_indices_must_increase_within_a_level() {
        let text = "<Sentence id=\"1\">\n\
                    2\ta\tNN\n\
                    1\tb\tNN\n\
                    </Sentence>\n";
        assert!(matches!(
            parse_ssf(text),
            Err(Error::MalformedTokenLine { line: 3, .. })
        ));
        // Nested levels restart their own numbering.
        let nested = "<Sentence id=\"1\">\n\
                      1\t((\tNP\n\
                      1.1\ta\tNN\n\
                      \t))\n\
                      2\t((\tNP\n\
                      2.1\tb\tNN\n\
                      \t))\n\
                      </Sentence>\n";
        assert!(parse_ssf(nested).is_ok());
    }

    #[test]
    fn malformed_fs_attribute_is_rejected() {
        let text = "<Sentence id=\"1\">\n\
                    1\t((\tNP\t<fs af=x>\n\
                    1.1\ta\tNN\n\
                    \t))\n\
                    </Sentence>\n";
        assert!(matches!(
            parse_ssf(text),
            Err(Error::MalformedTokenLine { line: 2, .. })
        ));
    }

    #[test]
    fn empty_sentence_is_rejected() {
        assert!(matches!(
            parse_ssf("<Sentence id=\"1\">\n</Sentence>\n"),
            Err(Error::MalformedTokenLine { line: 2, .. })
        ));
    }

    #[test]
    fn empty_document_is_empty_corpus() {
        assert!(matches!(parse_ssf(""), Err(Error::EmptyCorpus)));
    }
}
