//! Span-level scoring of predicted corpora against gold: exact-match
//! precision, recall and F-measure, per category and micro-averaged.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::spans::{tags_to_spans, SpanMode};

/// What counts as a matchable item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Entity spans; a true positive is an exact match of category,
    /// start and end. The default.
    #[default]
    Span,
    /// Individual non-O tokens matched on category alone, for
    /// diagnostics.
    Token,
}

/// True-positive, predicted and gold item counts for one category or for
/// the pooled overall row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalCounts {
    pub tp: u64,
    pub predicted: u64,
    pub gold: u64,
}

impl EvalCounts {
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            0.0
        } else {
            self.tp as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0 {
            0.0
        } else {
            self.tp as f64 / self.gold as f64
        }
    }

    /// Harmonic mean of precision and recall; zero when their sum is.
    pub fn f_measure(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Per-category and pooled counts for one evaluation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalReport {
    pub per_category: BTreeMap<String, EvalCounts>,
    pub overall: EvalCounts,
}

impl EvalReport {
    fn bump(&mut self, category: &str, tp: u64, predicted: u64, gold: u64) {
        let row = self.per_category.entry(category.to_string()).or_default();
        row.tp += tp;
        row.predicted += predicted;
        row.gold += gold;
        self.overall.tp += tp;
        self.overall.predicted += predicted;
        self.overall.gold += gold;
    }
}

/// Scores a predicted corpus against gold. Both corpora must align
/// sentence by sentence with identical triplet streams; gold spans are
/// extracted strictly, predicted ones leniently.
pub fn evaluate(gold: &Corpus, pred: &Corpus, mode: EvalMode) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::CorpusMismatch {
            sentence: gold.len().min(pred.len()),
            reason: format!("sentence counts differ ({} vs {})", gold.len(), pred.len()),
        });
    }
    let mut report = EvalReport::default();
    for (i, (g, p)) in gold.sentences().iter().zip(pred.sentences()).enumerate() {
        if g.len() != p.len() {
            return Err(Error::CorpusMismatch {
                sentence: i,
                reason: format!("sentence lengths differ ({} vs {})", g.len(), p.len()),
            });
        }
        if g.tokens() != p.tokens() {
            return Err(Error::CorpusMismatch {
                sentence: i,
                reason: "token streams differ".into(),
            });
        }
        let g_tags = g.tags().ok_or(Error::UntaggedSentence { sentence: i })?;
        let p_tags = p.tags().ok_or(Error::UntaggedSentence { sentence: i })?;
        match mode {
            EvalMode::Span => {
                let g_spans =
                    tags_to_spans(g_tags, SpanMode::Strict).map_err(|e| e.in_sentence(i))?;
                let p_spans = tags_to_spans(p_tags, SpanMode::Lenient)?;
                let gold_set: HashSet<_> = g_spans.iter().collect();
                for span in &g_spans {
                    report.bump(span.category(), 0, 0, 1);
                }
                for span in &p_spans {
                    let tp = u64::from(gold_set.contains(span));
                    report.bump(span.category(), tp, 1, 0);
                }
            }
            EvalMode::Token => {
                for (gt, pt) in g_tags.iter().zip(p_tags) {
                    if !gt.is_outside() {
                        report.bump(gt.category(), 0, 0, 1);
                    }
                    if !pt.is_outside() {
                        let tp = u64::from(!gt.is_outside() && gt.category() == pt.category());
                        report.bump(pt.category(), tp, 1, 0);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn push_row(out: &mut String, label: &str, c: &EvalCounts) {
    out.push_str(&format!(
        "{label}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
        c.tp,
        c.predicted,
        c.gold,
        c.precision(),
        c.recall(),
        c.f_measure()
    ));
}

/// Machine-readable block: `CATEGORY<TAB>TP<TAB>PRED<TAB>GOLD<TAB>P<TAB>R<TAB>F`
/// per category, with the pooled row labeled `ALL` last.
pub fn render_tsv(report: &EvalReport) -> String {
    let mut out = String::new();
    for (category, counts) in &report.per_category {
        push_row(&mut out, category, counts);
    }
    push_row(&mut out, "ALL", &report.overall);
    out
}

/// Aligned human-readable table.
pub fn render_text(report: &EvalReport) -> String {
    let width = report
        .per_category
        .keys()
        .map(|c| c.len())
        .chain([8usize])
        .max()
        .unwrap();
    let mut out = String::new();
    out.push_str(&format!(
        "{:width$}  {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}\n",
        "category", "tp", "pred", "gold", "precision", "recall", "f"
    ));
    let mut line = |label: &str, c: &EvalCounts| {
        out.push_str(&format!(
            "{label:width$}  {:>8} {:>8} {:>8} {:>9.4} {:>9.4} {:>9.4}\n",
            c.tp,
            c.predicted,
            c.gold,
            c.precision(),
            c.recall(),
            c.f_measure()
        ));
    };
    for (category, counts) in &report.per_category {
        line(category, counts);
    }
    line("ALL", &report.overall);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{NeTag, ObservationTriplet, Sentence};

    /// Builds aligned gold/pred corpora from per-sentence tag surfaces;
    /// tokens are shared placeholders.
    fn pair(gold: &[&[&str]], pred: &[&[&str]]) -> (Corpus, Corpus) {
        let build = |tagss: &[&[&str]]| {
            Corpus::new(
                tagss
                    .iter()
                    .map(|tags| {
                        let tokens = (0..tags.len())
                            .map(|i| {
                                ObservationTriplet::new(format!("w{i}"), "P", "C").unwrap()
                            })
                            .collect();
                        let tags = tags.iter().map(|t| NeTag::parse(t).unwrap()).collect();
                        Sentence::tagged(tokens, tags).unwrap()
                    })
                    .collect(),
            )
        };
        (build(gold), build(pred))
    }

    #[test]
    fn identical_corpora_score_one() {
        let tags: &[&[&str]] = &[&["B-PER", "E-PER", "O"], &["O", "B-LOC"]];
        let (gold, pred) = pair(tags, tags);
        let report = evaluate(&gold, &pred, EvalMode::Span).unwrap();
        assert_eq!(report.overall.precision(), 1.0);
        assert_eq!(report.overall.recall(), 1.0);
        assert_eq!(report.overall.f_measure(), 1.0);
    }

    #[test]
    fn all_outside_predictions_score_zero() {
        let (gold, pred) = pair(&[&["B-PER", "O"]], &[&["O", "O"]]);
        let report = evaluate(&gold, &pred, EvalMode::Span).unwrap();
        assert_eq!(report.overall.precision(), 0.0);
        assert_eq!(report.overall.recall(), 0.0);
        assert_eq!(report.overall.f_measure(), 0.0);
        assert_eq!(report.overall.gold, 1);
        assert_eq!(report.overall.predicted, 0);
    }

    /// Hand-built fixture: four gold spans, three predicted, two exact
    /// matches. p = 2/3, r = 1/2, f = 4/7.
    #[test]
    fn hand_fixture() {
        let gold: &[&[&str]] = &[
            &["B-PER", "E-PER", "O"],
            &["B-LOC", "O"],
            &["O", "B-ORG", "E-ORG"],
            &["B-PER"],
            &["O", "O"],
        ];
        let pred: &[&[&str]] = &[
            &["B-PER", "E-PER", "O"],
            &["O", "O"],
            &["O", "B-ORG", "E-ORG"],
            &["O"],
            &["B-LOC", "O"],
        ];
        let (gold, pred) = pair(gold, pred);
        let report = evaluate(&gold, &pred, EvalMode::Span).unwrap();
        assert_eq!(report.overall.tp, 2);
        assert_eq!(report.overall.predicted, 3);
        assert_eq!(report.overall.gold, 4);
        assert_eq!(report.overall.precision(), 2.0 / 3.0);
        assert_eq!(report.overall.recall(), 0.5);
        assert!((report.overall.f_measure() - 4.0 / 7.0).abs() <= 1e-12);

        let per = &report.per_category;
        assert_eq!(per["PER"], EvalCounts { tp: 1, predicted: 1, gold: 2 });
        assert_eq!(per["ORG"], EvalCounts { tp: 1, predicted: 1, gold: 1 });
        assert_eq!(per["LOC"], EvalCounts { tp: 0, predicted: 1, gold: 1 });

        // Micro-average consistency.
        let tp: u64 = per.values().map(|c| c.tp).sum();
        let predicted: u64 = per.values().map(|c| c.predicted).sum();
        let gold_n: u64 = per.values().map(|c| c.gold).sum();
        assert_eq!(tp, report.overall.tp);
        assert_eq!(predicted, report.overall.predicted);
        assert_eq!(gold_n, report.overall.gold);

        let tsv = render_tsv(&report);
        assert!(tsv.contains("ALL\t2\t3\t4\t0.6667\t0.5000\t0.5714"));
        assert!(tsv.lines().last().unwrap().starts_with("ALL\t"));
    }

    #[test]
    fn mismatches_are_rejected_with_first_divergence() {
        let (gold, pred) = pair(&[&["O"], &["O"]], &[&["O"]]);
        assert!(matches!(
            evaluate(&gold, &pred, EvalMode::Span),
            Err(Error::CorpusMismatch { sentence: 1, .. })
        ));
        let (gold, pred) = pair(&[&["O"], &["O", "O"]], &[&["O"], &["O"]]);
        assert!(matches!(
            evaluate(&gold, &pred, EvalMode::Span),
            Err(Error::CorpusMismatch { sentence: 1, .. })
        ));
        // Same shape, different tokens.
        let (gold, _) = pair(&[&["O"]], &[&["O"]]);
        let other = Corpus::new(vec![Sentence::tagged(
            vec![ObservationTriplet::new("different", "P", "C").unwrap()],
            vec![NeTag::outside()],
        )
        .unwrap()]);
        assert!(matches!(
            evaluate(&gold, &other, EvalMode::Span),
            Err(Error::CorpusMismatch { sentence: 0, .. })
        ));
    }

    #[test]
    fn malformed_gold_is_rejected_lenient_predictions_pass() {
        // Orphan I in gold: strict extraction fails.
        let (gold, pred) = pair(&[&["O", "I-PER"]], &[&["O", "O"]]);
        assert!(matches!(
            evaluate(&gold, &pred, EvalMode::Span),
            Err(Error::InSentence { sentence: 0, .. })
        ));
        // Orphan I in predictions is scored leniently.
        let (gold, pred) = pair(&[&["B-PER", "I-PER"]], &[&["O", "I-PER"]]);
        let report = evaluate(&gold, &pred, EvalMode::Span).unwrap();
        assert_eq!(report.overall.predicted, 1);
        assert_eq!(report.overall.tp, 0);
    }

    #[test]
    fn removing_a_false_positive_never_hurts_precision() {
        let (gold, with_fp) = pair(
            &[&["B-PER", "O", "O"]],
            &[&["B-PER", "O", "B-LOC"]],
        );
        let (_, without_fp) = pair(&[&["B-PER", "O", "O"]], &[&["B-PER", "O", "O"]]);
        let a = evaluate(&gold, &with_fp, EvalMode::Span).unwrap();
        let b = evaluate(&gold, &without_fp, EvalMode::Span).unwrap();
        assert!(b.overall.precision() >= a.overall.precision());
    }

    #[test]
    fn f_measure_bounds() {
        let cases = [
            EvalCounts { tp: 2, predicted: 3, gold: 4 },
            EvalCounts { tp: 1, predicted: 1, gold: 10 },
            EvalCounts { tp: 5, predicted: 9, gold: 6 },
        ];
        for c in cases {
            let (p, r, f) = (c.precision(), c.recall(), c.f_measure());
            assert!(f <= 2.0 * p.min(r) + 1e-12);
            assert!(f <= (p + r) / 2.0 + 1e-12);
        }
    }

    #[test]
    fn token_mode_counts_tokens() {
        let (gold, pred) = pair(
            &[&["B-PER", "I-PER", "O"]],
            &[&["B-PER", "O", "B-PER"]],
        );
        let report = evaluate(&gold, &pred, EvalMode::Token).unwrap();
        assert_eq!(report.overall.gold, 2);
        assert_eq!(report.overall.predicted, 2);
        assert_eq!(report.overall.tp, 1);
    }

    #[test]
    fn untagged_sentences_are_rejected() {
        let token = ObservationTriplet::new("w0", "P", "C").unwrap();
        let untagged = Corpus::new(vec![Sentence::untagged(vec![token]).unwrap()]);
        let (gold, _) = pair(&[&["O"]], &[&["O"]]);
        assert!(matches!(
            evaluate(&gold, &untagged, EvalMode::Span),
            Err(Error::UntaggedSentence { sentence: 0 })
        ));
    }
}
