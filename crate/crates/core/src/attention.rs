//! Attention inspection over MWE spans.
//!
//! Records come in as subword units (`autobu@@ se`). [`merge_bpe`] glues
//! them into words: source columns of a word are summed (attention the word
//! receives), target rows are averaged (where the word looks), so rows stay
//! stochastic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus_io::{AttentionRecord, LexiconEntry};
use crate::{par, Error, Execution, Result};

pub const CONTINUATION: &str = "@@";

/// Shade ramp for text rendering, lowest bin first.
pub const SHADES: [char; 10] = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordAttention {
    pub id: String,
    pub src_words: Vec<String>,
    pub trg_words: Vec<String>,
    /// `trg_words.len()` rows × `src_words.len()` columns.
    pub matrix: Vec<Vec<f64>>,
    /// Subword unit range each source word was built from.
    pub src_map: Vec<Range<usize>>,
    pub trg_map: Vec<Range<usize>>,
}

impl WordAttention {
    /// Uses the units as-is, one word per unit.
    pub fn unmerged(record: &AttentionRecord) -> Self {
        WordAttention {
            id: record.id.clone(),
            src_words: record.src_units.clone(),
            trg_words: record.trg_units.clone(),
            matrix: record.matrix.clone(),
            src_map: (0..record.src_units.len()).map(|i| i..i + 1).collect(),
            trg_map: (0..record.trg_units.len()).map(|i| i..i + 1).collect(),
        }
    }
}

fn group_units(
    units: &[String],
    id: &str,
    side: &'static str,
) -> Result<(Vec<String>, Vec<Range<usize>>)> {
    let mut words = Vec::new();
    let mut map = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, unit) in units.iter().enumerate() {
        match unit.strip_suffix(CONTINUATION) {
            Some(stem) => current.push_str(stem),
            None => {
                current.push_str(unit);
                words.push(std::mem::take(&mut current));
                map.push(start..i + 1);
                start = i + 1;
            }
        }
    }
    if start != units.len() {
        return Err(Error::DanglingContinuation {
            id: id.to_string(),
            side,
        });
    }
    Ok((words, map))
}

/// Merges BPE units marked with a trailing `@@` into words.
pub fn merge_bpe(record: &AttentionRecord) -> Result<WordAttention> {
    let (src_words, src_map) = group_units(&record.src_units, &record.id, "source")?;
    let (trg_words, trg_map) = group_units(&record.trg_units, &record.id, "target")?;
    let matrix = trg_map
        .iter()
        .map(|rows| {
            let k = rows.len() as f64;
            src_map
                .iter()
                .map(|cols| {
                    let total: f64 = rows
                        .clone()
                        .map(|r| cols.clone().map(|c| record.matrix[r][c]).sum::<f64>())
                        .sum();
                    total / k
                })
                .collect()
        })
        .collect();
    Ok(WordAttention {
        id: record.id.clone(),
        src_words,
        trg_words,
        matrix,
        src_map,
        trg_map,
    })
}

/// Shannon entropy in bits of each row, with `0·log 0 = 0`.
pub fn row_entropy(matrix: &[Vec<f64>]) -> Vec<f64> {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.log2())
                .sum::<f64>()
                .max(0.0)
        })
        .collect()
}

/// Attention statistics for one source/target span pair. Spans are 0-based
/// inclusive word ranges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanReport {
    pub src_span: (usize, usize),
    pub trg_span: (usize, usize),
    /// Mean attention mass from the target span's rows into the source span.
    pub concentration: f64,
    pub mean_entropy_bits: f64,
}

fn check_span(span: (usize, usize), len: usize, side: &'static str) -> Result<()> {
    if span.0 > span.1 || span.1 >= len {
        return Err(Error::Span {
            side,
            start: span.0,
            end: span.1,
            len,
        });
    }
    Ok(())
}

pub fn span_concentration(
    wa: &WordAttention,
    src_span: (usize, usize),
    trg_span: (usize, usize),
) -> Result<SpanReport> {
    check_span(src_span, wa.src_words.len(), "source")?;
    check_span(trg_span, wa.trg_words.len(), "target")?;
    let rows = &wa.matrix[trg_span.0..=trg_span.1];
    let k = rows.len() as f64;
    let mass: f64 = rows
        .iter()
        .map(|row| row[src_span.0..=src_span.1].iter().sum::<f64>())
        .sum();
    let mean_entropy_bits = row_entropy(rows).iter().sum::<f64>() / k;
    Ok(SpanReport {
        src_span,
        trg_span,
        concentration: (mass / k).clamp(0.0, 1.0),
        mean_entropy_bits,
    })
}

fn find_words(words: &[String], needle: &[String]) -> Option<(usize, usize)> {
    if needle.is_empty() || needle.len() > words.len() {
        return None;
    }
    let folded: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    folded
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|s| (s, s + needle.len() - 1))
}

/// First case-insensitive occurrence of the entry's source phrase among the
/// source words and of its target phrase among the target words.
pub fn locate_mwe_spans(
    wa: &WordAttention,
    entry: &LexiconEntry,
) -> Option<((usize, usize), (usize, usize))> {
    let src: Vec<String> = entry.src_tokens().map(str::to_lowercase).collect();
    let trg: Vec<String> = entry.trg_tokens().map(str::to_lowercase).collect();
    Some((
        find_words(&wa.src_words, &src)?,
        find_words(&wa.trg_words, &trg)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Svg,
    Html,
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(RenderFormat::Text),
            "svg" => Ok(RenderFormat::Svg),
            "html" => Ok(RenderFormat::Html),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Index into [`SHADES`] for a probability: ten equal bins over [0, 1],
/// with 1.0 in the top bin.
pub fn shade_bin(p: f64) -> usize {
    ((p * 10.0).floor().max(0.0) as usize).min(SHADES.len() - 1)
}

pub fn render_matrix(wa: &WordAttention, format: RenderFormat) -> String {
    match format {
        RenderFormat::Text => render_text(wa),
        RenderFormat::Svg => render_svg(wa),
        RenderFormat::Html => render_html(wa),
    }
}

fn render_text(wa: &WordAttention) -> String {
    let mut out = String::new();
    writeln!(out, "# {}", wa.id).unwrap();
    for (c, word) in wa.src_words.iter().enumerate() {
        writeln!(out, "# col {c}: {word}").unwrap();
    }
    let width = wa
        .trg_words
        .iter()
        .map(|w| w.chars().count())
        .max()
        .unwrap_or(0);
    for (word, row) in wa.trg_words.iter().zip(&wa.matrix) {
        let pad = width - word.chars().count();
        let cells: String = row.iter().map(|&p| SHADES[shade_bin(p)]).collect();
        writeln!(out, "{}{word} |{cells}|", " ".repeat(pad)).unwrap();
    }
    out
}

const CELL: usize = 20;
const CHAR_W: usize = 7;

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(wa: &WordAttention) -> String {
    let label_w =
        |words: &[String]| 10 + CHAR_W * words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
    let left = label_w(&wa.trg_words);
    let top = label_w(&wa.src_words);
    let width = left + CELL * wa.src_words.len() + 10;
    let height = top + CELL * wa.trg_words.len() + 10;
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    for (c, word) in wa.src_words.iter().enumerate() {
        let x = left + CELL * c + CELL / 2 + 4;
        let y = top - 4;
        writeln!(
            out,
            "<text transform=\"translate({x},{y}) rotate(-90)\">{}</text>",
            escape_xml(word)
        )
        .unwrap();
    }
    for (r, (word, row)) in wa.trg_words.iter().zip(&wa.matrix).enumerate() {
        let y = top + CELL * r;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            left - 4,
            y + CELL / 2 + 4,
            escape_xml(word)
        )
        .unwrap();
        for (c, p) in row.iter().enumerate() {
            writeln!(
                out,
                "<rect x=\"{}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"#000000\" fill-opacity=\"{:.4}\" stroke=\"#cccccc\"/>",
                left + CELL * c,
                p.clamp(0.0, 1.0)
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

fn render_html(wa: &WordAttention) -> String {
    let title = escape_xml(&wa.id);
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>\n</head>\n<body>\n<h1>{title}</h1>\n{}</body>\n</html>\n",
        render_svg(wa)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MweSpanStats {
    pub src_surface: String,
    pub trg_surface: String,
    pub report: SpanReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordStats {
    pub id: String,
    pub src_words: usize,
    pub trg_words: usize,
    pub mean_entropy_bits: f64,
    pub mwes: Vec<MweSpanStats>,
}

fn mwe_reports(wa: &WordAttention, lexicon: &[LexiconEntry]) -> Result<Vec<MweSpanStats>> {
    let mut out = Vec::new();
    for entry in lexicon {
        if let Some((s, t)) = locate_mwe_spans(wa, entry) {
            out.push(MweSpanStats {
                src_surface: entry.src_surface.clone(),
                trg_surface: entry.trg_surface.clone(),
                report: span_concentration(wa, s, t)?,
            });
        }
    }
    Ok(out)
}

/// Per-record entropy and the reports of every lexicon MWE found in it.
pub fn attention_stats(
    records: &[AttentionRecord],
    lexicon: &[LexiconEntry],
) -> Result<Vec<RecordStats>> {
    attention_stats_with(records, lexicon, Execution::default())
}

pub fn attention_stats_with(
    records: &[AttentionRecord],
    lexicon: &[LexiconEntry],
    exec: Execution,
) -> Result<Vec<RecordStats>> {
    par::map(exec, records, |record| {
        let wa = merge_bpe(record)?;
        let h = row_entropy(&wa.matrix);
        Ok(RecordStats {
            id: wa.id.clone(),
            src_words: wa.src_words.len(),
            trg_words: wa.trg_words.len(),
            mean_entropy_bits: h.iter().sum::<f64>() / h.len().max(1) as f64,
            mwes: mwe_reports(&wa, lexicon)?,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub id: String,
    pub src_surface: String,
    pub trg_surface: String,
    pub a: SpanReport,
    pub b: SpanReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Record ids present in only one of the two dumps.
    pub unmatched_ids: usize,
}

impl Comparison {
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("id\tsrc\ttrg\tconcentration_a\tconcentration_b\tentropy_a\tentropy_b\n");
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                r.id,
                r.src_surface,
                r.trg_surface,
                r.a.concentration,
                r.b.concentration,
                r.a.mean_entropy_bits,
                r.b.mean_entropy_bits
            )
            .unwrap();
        }
        out
    }
}

fn index_by_id(records: &[AttentionRecord]) -> Result<BTreeMap<&str, &AttentionRecord>> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(r.id.as_str(), r).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate attention record id {:?}",
                r.id
            )));
        }
    }
    Ok(map)
}

pub fn compare_systems(
    a: &[AttentionRecord],
    b: &[AttentionRecord],
    lexicon: &[LexiconEntry],
) -> Result<Comparison> {
    compare_systems_with(a, b, lexicon, Execution::default())
}

/// Pairs records by id and, for every lexicon entry located in both
/// systems' versions of a sentence, reports both systems' span statistics.
/// Rows are ordered by id, then lexicon order.
pub fn compare_systems_with(
    a: &[AttentionRecord],
    b: &[AttentionRecord],
    lexicon: &[LexiconEntry],
    exec: Execution,
) -> Result<Comparison> {
    let (ia, ib) = (index_by_id(a)?, index_by_id(b)?);
    let shared: Vec<(&AttentionRecord, &AttentionRecord)> = ia
        .iter()
        .filter_map(|(id, ra)| ib.get(id).map(|rb| (*ra, *rb)))
        .collect();
    let unmatched_ids = ia.len() + ib.len() - 2 * shared.len();
    let per_record = par::map(exec, &shared, |(ra, rb)| -> Result<Vec<ComparisonRow>> {
        let (wa, wb) = (merge_bpe(ra)?, merge_bpe(rb)?);
        let mut rows = Vec::new();
        for entry in lexicon {
            if let (Some((sa, ta)), Some((sb, tb))) =
                (locate_mwe_spans(&wa, entry), locate_mwe_spans(&wb, entry))
            {
                rows.push(ComparisonRow {
                    id: wa.id.clone(),
                    src_surface: entry.src_surface.clone(),
                    trg_surface: entry.trg_surface.clone(),
                    a: span_concentration(&wa, sa, ta)?,
                    b: span_concentration(&wb, sb, tb)?,
                });
            }
        }
        Ok(rows)
    });
    let mut rows = Vec::new();
    for r in per_record {
        rows.extend(r?);
    }
    Ok(Comparison {
        rows,
        unmatched_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, src: &[&str], trg: &[&str], matrix: Vec<Vec<f64>>) -> AttentionRecord {
        AttentionRecord {
            id: id.into(),
            src_units: src.iter().map(|s| s.to_string()).collect(),
            trg_units: trg.iter().map(|s| s.to_string()).collect(),
            matrix,
        }
    }

    #[test]
    fn source_units_sum() {
        let r = record(
            "s",
            &["m\u{11b}st@@", "sk\u{e9}m", "autobu@@", "se"],
            &["city", "bus"],
            vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.25, 0.25]],
        );
        let wa = merge_bpe(&r).unwrap();
        assert_eq!(wa.src_words, ["m\u{11b}stsk\u{e9}m", "autobuse"]);
        assert_eq!(wa.src_map, [0..2, 2..4]);
        assert!((wa.matrix[0][1] - 0.7).abs() < 1e-12);
        assert!((wa.matrix[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_continuations_is_identity() {
        let r = record(
            "s",
            &["a", "b"],
            &["x", "y"],
            vec![vec![0.3, 0.7], vec![1.0, 0.0]],
        );
        let wa = merge_bpe(&r).unwrap();
        assert_eq!(wa.matrix, r.matrix);
        assert_eq!(wa, WordAttention::unmerged(&r));
    }

    #[test]
    fn target_rows_average() {
        let r = record(
            "s",
            &["a", "b"],
            &["autobu@@", "se"],
            vec![vec![0.2, 0.8], vec![0.6, 0.4]],
        );
        let wa = merge_bpe(&r).unwrap();
        assert_eq!(wa.trg_words, ["autobuse"]);
        assert!((wa.matrix[0][0] - 0.4).abs() < 1e-12);
        assert!((wa.matrix[0][1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn dangling_continuation() {
        let r = record("d", &["a", "b@@"], &["x"], vec![vec![0.5, 0.5]]);
        assert!(matches!(
            merge_bpe(&r),
            Err(Error::DanglingContinuation { side: "source", .. })
        ));
    }

    #[test]
    fn entropy_values() {
        let h = row_entropy(&[vec![0.0, 1.0, 0.0], vec![0.25; 4], vec![0.5, 0.25, 0.25]]);
        assert_eq!(h, [0.0, 2.0, 1.5]);
    }

    #[test]
    fn concentration_cases() {
        let wa = WordAttention::unmerged(&record(
            "c",
            &["a", "b", "c", "d"],
            &["x", "y", "z"],
            vec![
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.25; 4],
                vec![0.1, 0.2, 0.3, 0.4],
            ],
        ));
        let r = span_concentration(&wa, (0, 1), (0, 0)).unwrap();
        assert_eq!(r.concentration, 1.0);
        assert_eq!(r.mean_entropy_bits, 1.0);
        let r = span_concentration(&wa, (0, 2), (1, 1)).unwrap();
        assert_eq!(r.concentration, 0.75);
        assert!(span_concentration(&wa, (0, 4), (0, 0)).is_err());
        assert!(span_concentration(&wa, (2, 1), (0, 0)).is_err());
        assert!(span_concentration(&wa, (0, 0), (0, 3)).is_err());
    }

    #[test]
    fn locate_spans() {
        let wa = WordAttention::unmerged(&record(
            "l",
            &["network", "users", "see"],
            &["tīkla", "lietotāji", "redz"],
            vec![vec![1.0, 0.0, 0.0]; 3],
        ));
        let entry = LexiconEntry {
            src_surface: "network users".into(),
            trg_surface: "Tīkla lietotāji".into(),
            score: 1.0,
            src_freq: 1,
            trg_freq: 1,
            cooc: 1,
        };
        assert_eq!(locate_mwe_spans(&wa, &entry), Some(((0, 1), (0, 1))));
        let missing = LexiconEntry {
            src_surface: "city bus".into(),
            ..entry
        };
        assert_eq!(locate_mwe_spans(&wa, &missing), None);
    }

    #[test]
    fn text_render_bins() {
        let wa = WordAttention::unmerged(&record("one", &["x"], &["y"], vec![vec![1.0]]));
        let text = render_matrix(&wa, RenderFormat::Text);
        assert!(text.ends_with("y |@|\n"), "{text}");
        assert_eq!(SHADES[shade_bin(0.0)], ' ');
        assert_eq!(SHADES[shade_bin(1.0)], '@');
        assert_eq!(SHADES[shade_bin(0.55)], '+');
        assert_eq!(SHADES[shade_bin(0.0999)], ' ');
        assert!("pdf".parse::<RenderFormat>().is_err());
    }

    #[test]
    fn svg_escapes_labels() {
        let wa = WordAttention::unmerged(&record("e", &["<a>"], &["&"], vec![vec![1.0]]));
        let svg = render_matrix(&wa, RenderFormat::Svg);
        assert!(svg.contains("&lt;a&gt;") && svg.contains("&amp;"));
        assert!(svg.contains("fill-opacity=\"1.0000\""));
        let html = render_matrix(&wa, RenderFormat::Html);
        assert!(html.starts_with("<!DOCTYPE html>") && html.contains(&svg));
    }

    #[test]
    fn compare_identical_and_sharpened() {
        let uniform = record(
            "s1",
            &["city", "bus", "x"],
            &["m", "a"],
            vec![vec![1.0 / 3.0; 3]; 2],
        );
        let sharp = record(
            "s1",
            &["city", "bus", "x"],
            &["m", "a"],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        );
        let extra = record("s2", &["q"], &["r"], vec![vec![1.0]]);
        let lex = [LexiconEntry {
            src_surface: "city bus".into(),
            trg_surface: "m a".into(),
            score: 1.0,
            src_freq: 1,
            trg_freq: 1,
            cooc: 1,
        }];
        let same = compare_systems(
            std::slice::from_ref(&uniform),
            std::slice::from_ref(&uniform),
            &lex,
        )
        .unwrap();
        assert_eq!(same.rows[0].a, same.rows[0].b);
        let cmp = compare_systems(&[uniform, extra], &[sharp], &lex).unwrap();
        assert_eq!(cmp.unmatched_ids, 1);
        assert_eq!(cmp.rows[0].b.concentration, 1.0);
        assert!(cmp.rows[0].a.concentration < 1.0);
        assert!(cmp
            .to_tsv()
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("s1\tcity bus\tm a\t0.666667\t1.000000"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = record("s", &["a"], &["b"], vec![vec![1.0]]);
        assert!(compare_systems(&[r.clone(), r.clone()], &[r], &[]).is_err());
    }
}
