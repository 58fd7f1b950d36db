//! Text formats: grammar files, the column-per-pattern alignment rendering,
//! and a line-oriented alignment file.
//!
//! Grammar file, one pattern per line:
//!
//! ```text
//! # comment
//! PATTERN_ID | FREQ | ID_PREFIX_LEN | sym sym ...
//! PATTERN_ID | sym sym ...
//! ```
//!
//! Frequency defaults to 1 and the ID prefix to 2 when omitted; the two must
//! be given together. Blank lines are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alignment::{Alignment, Cell, Column, Instance, Row};
use crate::grammar::Grammar;
use crate::pattern::RawPattern;

pub const DEFAULT_FREQUENCY: u64 = 1;
pub const DEFAULT_ID_PREFIX_LEN: usize = 2;

/// Minimum gap between the widest symbol of one pattern and the next pattern.
const GAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate pattern id `{id}`")]
    DuplicatePatternId { line: usize, id: String },
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        line,
        message: message.into(),
    })
}

pub fn parse_grammar(text: &str) -> Result<Vec<RawPattern>, ParseError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split('|').map(str::trim).collect();
        let (id, freq, prefix, body) = match fields.as_slice() {
            [id, body] => (*id, DEFAULT_FREQUENCY, DEFAULT_ID_PREFIX_LEN, *body),
            [id, f, p, body] => {
                let Ok(freq) = f.parse::<u64>() else {
                    return syntax(line, format!("bad frequency `{f}`"));
                };
                let Ok(prefix) = p.parse::<usize>() else {
                    return syntax(line, format!("bad id prefix length `{p}`"));
                };
                (*id, freq, prefix, *body)
            }
            _ => {
                return syntax(
                    line,
                    "expected `ID | FREQ | ID_PREFIX_LEN | symbols` or `ID | symbols`",
                )
            }
        };
        if id.is_empty() || id.contains(char::is_whitespace) {
            return syntax(line, format!("bad pattern id `{id}`"));
        }
        if freq == 0 {
            return syntax(line, "frequency must be at least 1");
        }
        let symbols: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        if symbols.is_empty() {
            return syntax(line, "pattern has no symbols");
        }
        if let Some(s) = symbols.iter().find(|s| s.contains('|')) {
            return syntax(line, format!("symbol `{s}` contains `|`"));
        }
        if prefix > symbols.len() {
            return syntax(
                line,
                format!(
                    "id prefix length {prefix} exceeds {} symbols",
                    symbols.len()
                ),
            );
        }
        if !ids.insert(id.to_string()) {
            return Err(ParseError::DuplicatePatternId {
                line,
                id: id.to_string(),
            });
        }
        out.push(RawPattern {
            id: id.to_string(),
            frequency: freq,
            id_prefix_len: prefix,
            symbols,
        });
    }
    Ok(out)
}

/// Canonical form: every field explicit, single spaces, LF line endings.
pub fn serialize_grammar(records: &[RawPattern]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(
            s,
            "{} | {} | {} | {}",
            r.id,
            r.frequency,
            r.id_prefix_len,
            r.symbols.join(" ")
        );
    }
    s
}

/// Layers grammar files: a record whose id already exists replaces the earlier
/// record in place; other records are appended in order.
pub fn overlay(layers: &[Vec<RawPattern>]) -> Vec<RawPattern> {
    let mut out: Vec<RawPattern> = Vec::new();
    for layer in layers {
        for r in layer {
            match out.iter_mut().find(|o| o.id == r.id) {
                Some(o) => *o = r.clone(),
                None => out.push(r.clone()),
            }
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("symbol `{symbol}` is wider than the {width} characters allowed for pattern column {column}")]
    WidthOverflow {
        column: usize,
        symbol: String,
        width: usize,
    },
    #[error("expected {expected} column widths, got {got}")]
    WidthCount { expected: usize, got: usize },
}

fn rows_in_order(a: &Alignment) -> Vec<Row> {
    a.rows().collect()
}

/// Width of each pattern column: its widest symbol or its index label.
fn natural_widths(a: &Alignment, g: &Grammar) -> Vec<usize> {
    rows_in_order(a)
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let p = a.row_pattern(row, g);
            let widest = p
                .symbols
                .iter()
                .map(|&s| a.symbol_name(s, g).len())
                .max()
                .unwrap_or(0);
            widest.max(k.to_string().len())
        })
        .collect()
}

/// Renders with each pattern column as wide as it needs to be.
pub fn render_alignment(a: &Alignment, g: &Grammar) -> String {
    let widths = natural_widths(a, g);
    render_with_widths(a, g, &widths).expect("natural widths always fit")
}

/// Renders with fixed widths, one per row (New first, then instances).
///
/// Pattern `k` is printed at horizontal offset `x_k`, where `x_0 = 0` and
/// `x_{k+1} = x_k + width_k + 3`. The first and last lines number the rows.
/// Each alignment column is one line: its cells at their rows' offsets,
/// joined left to right by ` --- ` runs that end one space short of the next
/// cell. Lines carry no trailing spaces.
pub fn render_with_widths(
    a: &Alignment,
    g: &Grammar,
    widths: &[usize],
) -> Result<String, RenderError> {
    let rows = rows_in_order(a);
    if widths.len() != rows.len() {
        return Err(RenderError::WidthCount {
            expected: rows.len(),
            got: widths.len(),
        });
    }
    for (k, &row) in rows.iter().enumerate() {
        let p = a.row_pattern(row, g);
        for &s in p.symbols.iter() {
            let name = a.symbol_name(s, g);
            if name.len() > widths[k] {
                return Err(RenderError::WidthOverflow {
                    column: k,
                    symbol: name.to_string(),
                    width: widths[k],
                });
            }
        }
        if k.to_string().len() > widths[k] {
            return Err(RenderError::WidthOverflow {
                column: k,
                symbol: k.to_string(),
                width: widths[k],
            });
        }
    }
    let mut x = Vec::with_capacity(rows.len());
    let mut at = 0;
    for w in widths {
        x.push(at);
        at += w + GAP;
    }
    let slot = |r: Row| match r {
        Row::New => 0,
        Row::Instance(i) => i + 1,
    };

    let mut header = String::new();
    for (k, &at) in x.iter().enumerate() {
        pad_to(&mut header, at);
        header.push_str(&k.to_string());
    }
    let mut out = String::new();
    out.push_str(&header);
    out.push_str("\n\n");
    for col in &a.columns {
        let name = a.symbol_name(col.symbol, g);
        let mut line = String::new();
        let mut cells: Vec<usize> = col.cells.iter().map(|c| slot(c.row)).collect();
        cells.sort_unstable();
        for (n, &k) in cells.iter().enumerate() {
            if n > 0 {
                line.push(' ');
                let dashes = x[k] - line.len() - 1;
                line.extend(std::iter::repeat_n('-', dashes));
                line.push(' ');
            } else {
                pad_to(&mut line, x[k]);
            }
            line.push_str(name);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&header);
    out.push('\n');
    Ok(out)
}

fn pad_to(s: &mut String, x: usize) {
    while s.len() < x {
        s.push(' ');
    }
}

/// Alignment file: one directive per line, `#` comments.
///
/// ```text
/// new f o r t u n e
/// instance N4
/// column f 0:0 1:2
/// ```
///
/// `new` gives the New pattern's words, each `instance` adds a row (numbered
/// from 1 in order), and each `column` names its symbol followed by
/// `row:symbol_index` cells, row 0 being the New pattern.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignmentFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn afe<T>(line: usize, message: impl Into<String>) -> Result<T, AlignmentFileError> {
    Err(AlignmentFileError::Syntax {
        line,
        message: message.into(),
    })
}

pub fn serialize_alignment(a: &Alignment, g: &Grammar) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "new {}", a.new.words.join(" "));
    for inst in &a.instances {
        let _ = writeln!(s, "instance {}", g.pattern(inst.pattern).name);
    }
    for col in &a.columns {
        let _ = write!(s, "column {}", a.symbol_name(col.symbol, g));
        for c in &col.cells {
            let r = match c.row {
                Row::New => 0,
                Row::Instance(i) => i + 1,
            };
            let _ = write!(s, " {}:{}", r, c.index);
        }
        s.push('\n');
    }
    s
}

/// Reads an alignment file. Only the syntax and the names are checked here;
/// structural validity is left to `validate_alignment`.
pub fn parse_alignment(text: &str, g: &Grammar) -> Result<Alignment, AlignmentFileError> {
    let mut new = None;
    let mut instances = Vec::new();
    let mut columns = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut parts = t.split_whitespace();
        match parts.next() {
            Some("new") => {
                if new.is_some() {
                    return afe(line, "second `new` line");
                }
                let words: Vec<&str> = parts.collect();
                if words.is_empty() {
                    return afe(line, "empty New pattern");
                }
                new = Some(g.new_pattern(&words));
            }
            Some("instance") => {
                let (Some(name), None) = (parts.next(), parts.next()) else {
                    return afe(line, "expected `instance PATTERN_ID`");
                };
                let Some(p) = g.index_of(name) else {
                    return afe(line, format!("unknown pattern `{name}`"));
                };
                instances.push(Instance { pattern: p });
            }
            Some("column") => {
                let Some(np) = new.as_ref() else {
                    return afe(line, "`column` before `new`");
                };
                let Some(sym) = parts.next() else {
                    return afe(line, "column without a symbol");
                };
                let symbol = match g.table().lookup(sym) {
                    Some(s) => s,
                    None => match np.words.iter().position(|w| w == sym) {
                        Some(p) => np.pattern.symbols[p],
                        None => return afe(line, format!("unknown symbol `{sym}`")),
                    },
                };
                let mut cells = Vec::new();
                for c in parts {
                    let Some((r, i)) = c.split_once(':') else {
                        return afe(line, format!("bad cell `{c}`"));
                    };
                    let (Ok(r), Ok(index)) = (r.parse::<usize>(), i.parse::<usize>()) else {
                        return afe(line, format!("bad cell `{c}`"));
                    };
                    let row = if r == 0 {
                        Row::New
                    } else {
                        Row::Instance(r - 1)
                    };
                    cells.push(Cell { row, index });
                }
                if cells.is_empty() {
                    return afe(line, "column without cells");
                }
                cells.sort();
                columns.push(Column { symbol, cells });
            }
            Some(other) => return afe(line, format!("unknown directive `{other}`")),
            None => unreachable!("blank lines are skipped"),
        }
    }
    let Some(new) = new else {
        return afe(text.lines().count().max(1), "missing `new` line");
    };
    Ok(Alignment {
        new,
        instances,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::build_grammar;

    #[test]
    fn parses_full_and_short_lines() {
        let recs = parse_grammar(
            "# c\n\nP1 | 1 | 2 | N n3 councilmen COUNCILMEN PEACE_LOVING #N\nP2 | a  b\n",
        )
        .unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].symbols.len(), 6);
        assert_eq!(recs[0].symbols[..2], ["N", "n3"]);
        assert_eq!((recs[1].frequency, recs[1].id_prefix_len), (1, 2));
        assert_eq!(recs[1].symbols, ["a", "b"]);
    }

    #[test]
    fn empty_input_is_empty_grammar() {
        assert!(parse_grammar("").unwrap().is_empty());
        assert_eq!(serialize_grammar(&[]), "");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let e = parse_grammar("a | 1 | 2 | x y\nb | 1 | 7 | a b c d e f\n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 2, .. }));
        assert!(matches!(
            parse_grammar("x | 0 | 0 | a"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_grammar("x | 1 | a"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_grammar("x | 1 | 0 |"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        let dup = parse_grammar("x | a b\nx | b c").unwrap_err();
        assert_eq!(
            dup,
            ParseError::DuplicatePatternId {
                line: 2,
                id: "x".into()
            }
        );
    }

    #[test]
    fn canonical_form() {
        let text = "p |3|1|  X   a b\n";
        let recs = parse_grammar(text).unwrap();
        let canon = serialize_grammar(&recs);
        assert_eq!(canon, "p | 3 | 1 | X a b\n");
        assert_eq!(serialize_grammar(&parse_grammar(&canon).unwrap()), canon);
    }

    #[test]
    fn bare_render() {
        let g = build_grammar(&[RawPattern::new("p", 1, 0, "a")]).unwrap();
        let a = Alignment::bare(g.new_pattern(&["a", "b"]));
        assert_eq!(render_alignment(&a, &g), "0\n\na\nb\n\n0\n");
    }

    #[test]
    fn narrow_width_overflows() {
        let g = build_grammar(&[RawPattern::new("p", 1, 0, "a")]).unwrap();
        let a = Alignment::bare(g.new_pattern(&["abc"]));
        assert!(matches!(
            render_with_widths(&a, &g, &[2]),
            Err(RenderError::WidthOverflow { column: 0, .. })
        ));
        assert_eq!(render_with_widths(&a, &g, &[5]).unwrap(), "0\n\nabc\n\n0\n");
    }

    #[test]
    fn alignment_file_round_trip() {
        let g = build_grammar(&[RawPattern::new("D8", 1, 2, "D 8 t h e #D")]).unwrap();
        let a = Alignment::bare(g.new_pattern(&["t", "h", "e", "zz"]));
        let a = crate::search::merge(&a, 0, &vec![(0, 2), (1, 3), (2, 4)], &g).unwrap();
        let text = serialize_alignment(&a, &g);
        assert_eq!(parse_alignment(&text, &g).unwrap(), a);
    }

    #[test]
    fn alignment_file_errors() {
        let g = build_grammar(&[RawPattern::new("p", 1, 0, "a")]).unwrap();
        assert!(parse_alignment("instance q\n", &g).is_err());
        assert!(parse_alignment("new a\ncolumn a 0\n", &g).is_err());
        assert!(parse_alignment("new a\ncolumn b 0:0\n", &g).is_err());
        assert!(parse_alignment("", &g).is_err());
    }
}
