//! Column corpus format: one token per line as `word<TAB>pos<TAB>chunk`
//! with an optional fourth NE-tag field, sentences separated by blank
//! lines. The serializer emits the canonical form (single blank-line
//! separators, trailing newline) so parse-then-serialize is byte-identical
//! on canonical input.

use crate::corpus::{Corpus, NeTag, ObservationTriplet, Sentence};
use crate::error::{Error, Result};

fn flush(
    sentences: &mut Vec<Sentence>,
    tokens: &mut Vec<ObservationTriplet>,
    tags: &mut Vec<NeTag>,
    tagged: Option<bool>,
) -> Result<()> {
    if tokens.is_empty() {
        return Ok(());
    }
    let sentence = if tagged == Some(true) {
        Sentence::tagged(std::mem::take(tokens), std::mem::take(tags))?
    } else {
        tags.clear();
        Sentence::untagged(std::mem::take(tokens))?
    };
    sentences.push(sentence);
    Ok(())
}

/// Parses a TSV document into a corpus. Lines must carry three fields
/// (untagged) or four (tagged); mixing field counts within one sentence
/// is an error, as is an empty document.
pub fn parse_tsv(text: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<ObservationTriplet> = Vec::new();
    let mut tags: Vec<NeTag> = Vec::new();
    // Whether the sentence under construction is tagged; None before its
    // first token line.
    let mut tagged: Option<bool> = None;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            flush(&mut sentences, &mut tokens, &mut tags, tagged)?;
            tagged = None;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: format!("expected 3 or 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let line_tagged = fields.len() == 4;
        match tagged {
            None => tagged = Some(line_tagged),
            Some(t) if t != line_tagged => {
                return Err(Error::MalformedLine {
                    line: lineno,
                    reason: "mixed 3- and 4-field lines within one sentence".into(),
                });
            }
            _ => {}
        }
        let triplet = ObservationTriplet::new(fields[0], fields[1], fields[2]).map_err(|e| {
            Error::MalformedLine {
                line: lineno,
                reason: e.to_string(),
            }
        })?;
        tokens.push(triplet);
        if line_tagged {
            let tag = NeTag::parse(fields[3]).map_err(|e| Error::MalformedLine {
                line: lineno,
                reason: e.to_string(),
            })?;
            tags.push(tag);
        }
    }
    flush(&mut sentences, &mut tokens, &mut tags, tagged)?;
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus::new(sentences))
}

/// Serializes a corpus in canonical TSV form.
pub fn to_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (k, sentence) in corpus.sentences().iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for (i, token) in sentence.tokens().iter().enumerate() {
            out.push_str(token.word());
            out.push('\t');
            out.push_str(token.pos());
            out.push('\t');
            out.push_str(token.chunk());
            if let Some(tags) = sentence.tags() {
                out.push('\t');
                out.push_str(&tags[i].surface());
            }
            out.push('\n');
        }
    }
    out
}

/// Serializes a fully tagged corpus keeping only the word and NE columns.
pub fn to_tsv_stripped(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for (k, sentence) in corpus.sentences().iter().enumerate() {
        let tags = sentence
            .tags()
            .ok_or(Error::UntaggedSentence { sentence: k })?;
        if k > 0 {
            out.push('\n');
        }
        for (token, tag) in sentence.tokens().iter().zip(tags) {
            out.push_str(token.word());
            out.push('\t');
            out.push_str(&tag.surface());
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_round_trip() {
        let corpus = parse_tsv("Kolkata\tNNP\tB-NP\tB-LOCATION\n\n").unwrap();
        assert_eq!(corpus.len(), 1);
        let s = &corpus.sentences()[0];
        assert_eq!(s.len(), 1);
        assert_eq!(s.tokens()[0].word(), "Kolkata");
        assert_eq!(s.tags().unwrap()[0].surface(), "B-LOCATION");
        assert_eq!(to_tsv(&corpus), "Kolkata\tNNP\tB-NP\tB-LOCATION\n");
    }

    #[test]
    fn repeated_blank_lines_are_ignored() {
        let corpus = parse_tsv("a\tN\tC\n\n\n\nb\tN\tC\n\n\n").unwrap();
        assert_eq!(corpus.len(), 2);
        assert!(!corpus.sentences()[0].is_tagged());
    }

    #[test]
    fn canonical_serialization_is_stable() {
        let text = "a\tN\tB-NP\tO\nb\tV\tB-VG\tB-PER\n\nc\tN\tO\tO\n";
        let corpus = parse_tsv(text).unwrap();
        assert_eq!(to_tsv(&corpus), text);
    }

    #[test]
    fn mixed_arity_within_sentence_is_an_error() {
        let err = parse_tsv("a\tN\tC\tO\nb\tN\tC\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
        // Different sentences may differ in arity.
        assert!(parse_tsv("a\tN\tC\tO\n\nb\tN\tC\n").is_ok());
    }

    #[test]
    fn field_count_errors_carry_line_numbers() {
        let err = parse_tsv("a\tN\tC\n\nx\ty\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 3, .. }));
        let err = parse_tsv("a\tb\tc\td\te\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn bad_tags_and_empty_words_are_rejected() {
        assert!(matches!(
            parse_tsv("a\tN\tC\tB-\n").unwrap_err(),
            Error::MalformedLine { line: 1, .. }
        ));
        assert!(matches!(
            parse_tsv("\tN\tC\n").unwrap_err(),
            Error::MalformedLine { line: 1, .. }
        ));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_tsv(""), Err(Error::EmptyCorpus)));
        assert!(matches!(parse_tsv("\n\n\n"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn stripped_output_keeps_word_and_tag() {
        let corpus = parse_tsv("a\tN\tC\tO\nb\tN\tC\tB-PER\n").unwrap();
        assert_eq!(to_tsv_stripped(&corpus).unwrap(), "a\tO\nb\tB-PER\n");
        let untagged = parse_tsv("a\tN\tC\n").unwrap();
        assert!(to_tsv_stripped(&untagged).is_err());
    }
}
