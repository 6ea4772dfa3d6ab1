//! Sectioned, line-oriented text serialization of trained models.
//!
//! Sections appear in a fixed order, each introduced by a `#SECTION NAME`
//! line: HEADER, LAMBDAS, TAGS, UNIGRAM, BIGRAM, TRIGRAM, EMIT, OBSCOUNT,
//! TAGPRIOR, THETA, MAXSUFLEN, SUFFIX. Records are tab-separated UTF-8;
//! counts are decimal integers and floats carry 17 significant digits so
//! reloading reproduces them bit for bit. In text fields a backslash is
//! written `\\` and the unit separator U+001F is written `\x1f`. Records
//! are emitted in a fixed sort order, so equal models serialize to equal
//! bytes.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::corpus::ObservationTriplet;
use crate::decoder::{TrainedModel, FORMAT_VERSION};
use crate::emission::{EmissionMode, EmissionModel, SuffixModel};
use crate::error::{Error, Result};
use crate::transition::{
    Hist, Next, TagId, TagInventory, TransitionCounts, TransitionModel, END_SURFACE,
    START_SURFACE,
};

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for ch in field.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\u{1f}' => out.push_str("\\x1f"),
            ch => out.push(ch),
        }
    }
    out
}

fn unescape(field: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('x') => {
                let rest: String = chars.by_ref().take(2).collect();
                if rest != "1f" {
                    return Err(Error::ModelFormat {
                        line,
                        reason: format!("unknown escape \\x{rest}"),
                    });
                }
                out.push('\u{1f}');
            }
            other => {
                return Err(Error::ModelFormat {
                    line,
                    reason: format!("unknown escape \\{}", other.map(String::from).unwrap_or_default()),
                });
            }
        }
    }
    Ok(out)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_hist(inventory: &TagInventory, h: Hist) -> String {
    escape(inventory.hist_surface(h))
}

fn fmt_next(inventory: &TagInventory, n: Next) -> String {
    escape(inventory.next_surface(n))
}

fn sort_key_hist(h: Hist, n_tags: usize) -> usize {
    match h {
        Hist::Tag(t) => t.index(),
        Hist::Start => n_tags,
    }
}

fn sort_key_next(n: Next, n_tags: usize) -> usize {
    match n {
        Next::Tag(t) => t.index(),
        Next::End => n_tags,
    }
}

/// Serializes a model. The writer receives the complete canonical byte
/// stream; callers wanting atomic file updates should write to a
/// temporary location and rename.
pub fn save(model: &TrainedModel, mut w: impl Write) -> Result<()> {
    let inv = model.inventory();
    let n_tags = inv.len();
    let counts = model.transitions().counts();
    let lambdas = model.transitions().lambdas();
    let suffixes = model.suffixes();

    writeln!(w, "#SECTION HEADER")?;
    writeln!(w, "version\t{}", model.version())?;
    writeln!(w, "emission\t{}", model.emissions().mode().token())?;
    writeln!(w, "rare_max\t{}", suffixes.rare_max())?;
    writeln!(w, "suffix_len\t{}", suffixes.max_len())?;
    writeln!(w, "sentences\t{}", counts.sentences())?;
    writeln!(w, "tokens\t{}", counts.total())?;

    writeln!(w, "#SECTION LAMBDAS")?;
    writeln!(
        w,
        "{}\t{}\t{}",
        fmt_f64(lambdas.trigram),
        fmt_f64(lambdas.bigram),
        fmt_f64(lambdas.unigram)
    )?;

    writeln!(w, "#SECTION TAGS")?;
    for t in inv.ids() {
        writeln!(w, "{}", escape(inv.surface(t)))?;
    }

    writeln!(w, "#SECTION UNIGRAM")?;
    for t in inv.ids() {
        writeln!(w, "{}\t{}", escape(inv.surface(t)), counts.unigram(Next::Tag(t)))?;
    }
    writeln!(w, "{}\t{}", END_SURFACE, counts.unigram(Next::End))?;

    writeln!(w, "#SECTION BIGRAM")?;
    let mut bigrams: Vec<((Hist, Next), u64)> = counts.bigrams().collect();
    bigrams.sort_by_key(|&((h, t), _)| (sort_key_hist(h, n_tags), sort_key_next(t, n_tags)));
    for ((h, t), c) in bigrams {
        writeln!(w, "{}\t{}\t{}", fmt_hist(inv, h), fmt_next(inv, t), c)?;
    }

    writeln!(w, "#SECTION TRIGRAM")?;
    let mut trigrams: Vec<((Hist, Hist, Next), u64)> = counts.trigrams().collect();
    trigrams.sort_by_key(|&((h2, h1, t), _)| {
        (
            sort_key_hist(h2, n_tags),
            sort_key_hist(h1, n_tags),
            sort_key_next(t, n_tags),
        )
    });
    for ((h2, h1, t), c) in trigrams {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            fmt_hist(inv, h2),
            fmt_hist(inv, h1),
            fmt_next(inv, t),
            c
        )?;
    }

    writeln!(w, "#SECTION EMIT")?;
    let mut emits: Vec<(&ObservationTriplet, TagId, u64)> = model.emissions().records().collect();
    emits.sort_by_key(|&(o, t, _)| (o, t.index()));
    for (o, t, c) in emits {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            escape(o.word()),
            escape(o.pos()),
            escape(o.chunk()),
            escape(inv.surface(t)),
            c
        )?;
    }

    writeln!(w, "#SECTION OBSCOUNT")?;
    let mut obs: Vec<(&ObservationTriplet, u64)> = model.emissions().observation_counts().collect();
    obs.sort_by_key(|&(o, _)| o);
    for (o, c) in obs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            escape(o.word()),
            escape(o.pos()),
            escape(o.chunk()),
            c
        )?;
    }

    writeln!(w, "#SECTION TAGPRIOR")?;
    for t in inv.ids() {
        writeln!(
            w,
            "{}\t{}",
            escape(inv.surface(t)),
            fmt_f64(suffixes.prior(t))
        )?;
    }

    writeln!(w, "#SECTION THETA")?;
    writeln!(w, "{}", fmt_f64(suffixes.theta()))?;

    writeln!(w, "#SECTION MAXSUFLEN")?;
    writeln!(w, "{}", suffixes.max_len())?;

    writeln!(w, "#SECTION SUFFIX")?;
    let mut suffix_rows: Vec<(&str, usize, f64)> = Vec::new();
    for (suffix, probs) in suffixes.suffixes() {
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                suffix_rows.push((suffix, i, p));
            }
        }
    }
    suffix_rows.sort_by_key(|&(s, t, _)| (s.as_bytes().to_vec(), t));
    for (suffix, t, p) in suffix_rows {
        writeln!(
            w,
            "{}\t{}\t{}",
            escape(suffix),
            escape(inv.surface(TagId::new(t))),
            fmt_f64(p)
        )?;
    }

    Ok(())
}

/// Serializes a model into a string.
pub fn to_string(model: &TrainedModel) -> String {
    let mut buf = Vec::new();
    save(model, &mut buf).expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("model files are UTF-8")
}

struct Cursor<'a> {
    lines: &'a [String],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn expect_section(&mut self, name: &str) -> Result<()> {
        match self.lines.get(self.pos) {
            Some(line) if line.strip_prefix("#SECTION ") == Some(name) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::ModelFormat {
                line: self.pos + 1,
                reason: format!("expected section header #SECTION {name}"),
            }),
        }
    }

    /// Next record line within the current section, with its 1-based
    /// line number.
    fn next_record(&mut self) -> Option<(&'a str, usize)> {
        match self.lines.get(self.pos) {
            Some(line) if !line.starts_with("#SECTION ") => {
                self.pos += 1;
                Some((line.as_str(), self.pos))
            }
            _ => None,
        }
    }

    fn single_record(&mut self, what: &str) -> Result<(&'a str, usize)> {
        let got = self.next_record().ok_or(Error::ModelFormat {
            line: self.pos + 1,
            reason: format!("missing {what}"),
        })?;
        if self.next_record().is_some() {
            return Err(Error::ModelFormat {
                line: self.pos,
                reason: format!("expected a single {what} record"),
            });
        }
        Ok(got)
    }
}

fn parse_u64(s: &str, line: usize, what: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::ModelFormat {
        line,
        reason: format!("invalid {what} {s:?}"),
    })
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::ModelFormat {
        line,
        reason: format!("invalid {what} {s:?}"),
    })
}

fn fields_of(line: &str, expected: usize, lineno: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != expected {
        return Err(Error::ModelFormat {
            line: lineno,
            reason: format!("expected {expected} fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

fn resolve_hist(inv: &TagInventory, s: &str, line: usize) -> Result<Hist> {
    if s == START_SURFACE {
        return Ok(Hist::Start);
    }
    inv.id(s).map(Hist::Tag).ok_or(Error::ModelFormat {
        line,
        reason: format!("unknown tag {s:?}"),
    })
}

fn resolve_next(inv: &TagInventory, s: &str, line: usize) -> Result<Next> {
    if s == END_SURFACE {
        return Ok(Next::End);
    }
    inv.id(s).map(Next::Tag).ok_or(Error::ModelFormat {
        line,
        reason: format!("unknown tag {s:?}"),
    })
}

fn resolve_tag(inv: &TagInventory, s: &str, line: usize) -> Result<TagId> {
    inv.id(s).ok_or(Error::ModelFormat {
        line,
        reason: format!("unknown tag {s:?}"),
    })
}

/// Loads a model from its serialized form.
pub fn load(reader: impl BufRead) -> Result<TrainedModel> {
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut cur = Cursor {
        lines: &lines,
        pos: 0,
    };

    // HEADER
    cur.expect_section("HEADER")?;
    let mut header: HashMap<String, String> = HashMap::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 2, lineno)?;
        header.insert(fields[0].to_string(), fields[1].to_string());
    }
    let get = |key: &str| -> Result<&str> {
        header.get(key).map(String::as_str).ok_or(Error::ModelFormat {
            line: 1,
            reason: format!("header is missing {key:?}"),
        })
    };
    let version = get("version")?.to_string();
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: version });
    }
    let mode = EmissionMode::from_token(get("emission")?).map_err(|e| Error::ModelFormat {
        line: 1,
        reason: e.to_string(),
    })?;
    let rare_max = parse_u64(get("rare_max")?, 1, "rare_max")?;
    let suffix_len = parse_u64(get("suffix_len")?, 1, "suffix_len")? as usize;
    let sentences = parse_u64(get("sentences")?, 1, "sentences")?;
    let tokens = parse_u64(get("tokens")?, 1, "tokens")?;

    // LAMBDAS
    cur.expect_section("LAMBDAS")?;
    let (line, lineno) = cur.single_record("lambda")?;
    let fields = fields_of(line, 3, lineno)?;
    let lambdas = crate::transition::Lambdas {
        trigram: parse_f64(fields[0], lineno, "lambda")?,
        bigram: parse_f64(fields[1], lineno, "lambda")?,
        unigram: parse_f64(fields[2], lineno, "lambda")?,
    };

    // TAGS
    cur.expect_section("TAGS")?;
    let mut surfaces = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        surfaces.push(unescape(line, lineno)?);
    }
    let inventory = TagInventory::from_surfaces(&surfaces).map_err(|e| Error::ModelFormat {
        line: 1,
        reason: e.to_string(),
    })?;

    // UNIGRAM
    cur.expect_section("UNIGRAM")?;
    let mut unigrams = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 2, lineno)?;
        let sym = resolve_next(&inventory, &unescape(fields[0], lineno)?, lineno)?;
        unigrams.push((sym, parse_u64(fields[1], lineno, "count")?));
    }

    // BIGRAM
    cur.expect_section("BIGRAM")?;
    let mut bigrams = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 3, lineno)?;
        let h = resolve_hist(&inventory, &unescape(fields[0], lineno)?, lineno)?;
        let t = resolve_next(&inventory, &unescape(fields[1], lineno)?, lineno)?;
        bigrams.push(((h, t), parse_u64(fields[2], lineno, "count")?));
    }

    // TRIGRAM
    cur.expect_section("TRIGRAM")?;
    let mut trigrams = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 4, lineno)?;
        let h2 = resolve_hist(&inventory, &unescape(fields[0], lineno)?, lineno)?;
        let h1 = resolve_hist(&inventory, &unescape(fields[1], lineno)?, lineno)?;
        let t = resolve_next(&inventory, &unescape(fields[2], lineno)?, lineno)?;
        trigrams.push(((h2, h1, t), parse_u64(fields[3], lineno, "count")?));
    }

    let counts = TransitionCounts::from_records(unigrams, bigrams, trigrams, sentences);
    if counts.total() != tokens {
        return Err(Error::ModelFormat {
            line: 1,
            reason: format!(
                "header token count {tokens} does not match unigram total {}",
                counts.total()
            ),
        });
    }
    let transitions =
        TransitionModel::new(counts, lambdas).map_err(|e| Error::ModelFormat {
            line: 1,
            reason: e.to_string(),
        })?;

    // EMIT
    cur.expect_section("EMIT")?;
    let mut emit_records = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 5, lineno)?;
        let triplet = ObservationTriplet::new(
            unescape(fields[0], lineno)?,
            unescape(fields[1], lineno)?,
            unescape(fields[2], lineno)?,
        )
        .map_err(|e| Error::ModelFormat {
            line: lineno,
            reason: e.to_string(),
        })?;
        let tag = resolve_tag(&inventory, &unescape(fields[3], lineno)?, lineno)?;
        emit_records.push((triplet, tag, parse_u64(fields[4], lineno, "count")?));
    }
    let emissions = EmissionModel::from_records(mode, emit_records, &inventory);

    // OBSCOUNT: validated against the EMIT totals.
    cur.expect_section("OBSCOUNT")?;
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 4, lineno)?;
        let triplet = ObservationTriplet::new(
            unescape(fields[0], lineno)?,
            unescape(fields[1], lineno)?,
            unescape(fields[2], lineno)?,
        )
        .map_err(|e| Error::ModelFormat {
            line: lineno,
            reason: e.to_string(),
        })?;
        let count = parse_u64(fields[3], lineno, "count")?;
        if emissions.obs_count(&triplet) != count {
            return Err(Error::ModelFormat {
                line: lineno,
                reason: format!(
                    "observation count {count} disagrees with emission records ({})",
                    emissions.obs_count(&triplet)
                ),
            });
        }
    }

    // TAGPRIOR
    cur.expect_section("TAGPRIOR")?;
    let mut priors = vec![0.0; inventory.len()];
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 2, lineno)?;
        let tag = resolve_tag(&inventory, &unescape(fields[0], lineno)?, lineno)?;
        priors[tag.index()] = parse_f64(fields[1], lineno, "prior")?;
    }

    // THETA
    cur.expect_section("THETA")?;
    let (line, lineno) = cur.single_record("theta")?;
    let theta = parse_f64(line, lineno, "theta")?;

    // MAXSUFLEN
    cur.expect_section("MAXSUFLEN")?;
    let (line, lineno) = cur.single_record("maximum suffix length")?;
    let max_len = parse_u64(line, lineno, "maximum suffix length")? as usize;
    if max_len != suffix_len {
        return Err(Error::ModelFormat {
            line: lineno,
            reason: format!(
                "MAXSUFLEN {max_len} disagrees with header suffix_len {suffix_len}"
            ),
        });
    }

    // SUFFIX
    cur.expect_section("SUFFIX")?;
    let mut suffix_records = Vec::new();
    while let Some((line, lineno)) = cur.next_record() {
        let fields = fields_of(line, 3, lineno)?;
        let suffix = unescape(fields[0], lineno)?;
        let tag = resolve_tag(&inventory, &unescape(fields[1], lineno)?, lineno)?;
        suffix_records.push((suffix, tag, parse_f64(fields[2], lineno, "probability")?));
    }
    if cur.pos != lines.len() {
        return Err(Error::ModelFormat {
            line: cur.pos + 1,
            reason: "unexpected content after SUFFIX section".into(),
        });
    }
    let suffixes = SuffixModel::from_parts(
        max_len,
        rare_max,
        theta,
        priors,
        suffix_records,
        &inventory,
    )
    .map_err(|e| Error::ModelFormat {
        line: 1,
        reason: e.to_string(),
    })?;

    TrainedModel::new(inventory, transitions, emissions, suffixes, version)
}
