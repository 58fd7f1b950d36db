//! Compression scoring.
//!
//! * `BN`: bits of the New pattern that the alignment explains, i.e. the cost
//!   of every New symbol whose column is a hit column.
//! * `BE`: bits of the code, i.e. the cost of every ID-symbol of an instance
//!   left unmatched. An ID-symbol is matched by a non-ID cell in its column (a
//!   contents symbol of another pattern, or a New symbol), and each such cell
//!   matches one ID-symbol: codes aligned only with other codes explain
//!   nothing, and one slot cannot hold two chunks.
//! * `CD = BN - BE`. The best alignment maximises `CD`.

use thiserror::Error;

use crate::alignment::{validate_alignment, Alignment, Cell, Column, Row, Violation};
use crate::grammar::Grammar;
use crate::search::{check_hits, HitSet, MergeError, Projection};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub bn: f64,
    pub be: f64,
    pub cd: f64,
}

impl Score {
    pub const ZERO: Score = Score {
        bn: 0.0,
        be: 0.0,
        cd: 0.0,
    };

    pub fn new(bn: f64, be: f64) -> Score {
        Score {
            bn,
            be,
            cd: bn - be,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("invalid alignment: {0}")]
    InvalidAlignment(#[from] Violation),
    #[error("empty list of alternatives")]
    EmptyInput,
    #[error(transparent)]
    Merge(#[from] MergeError),
}

/// Symbol cost of a code symbol `(instance, index)`, the quantity summed into
/// `BE` while that ID-symbol stays unmatched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodeSymbol {
    pub instance: usize,
    pub index: usize,
    pub cost: f64,
}

fn is_id_cell(a: &Alignment, c: &Cell, g: &Grammar) -> bool {
    match c.row {
        Row::New => false,
        Row::Instance(i) => g.pattern(a.instances[i].pattern).is_id(c.index),
    }
}

/// `(ID cells, non-ID cells)` in `col`.
pub(crate) fn id_balance(a: &Alignment, col: &Column, g: &Grammar) -> (usize, usize) {
    let ids = col.cells.iter().filter(|c| is_id_cell(a, c, g)).count();
    (ids, col.cells.len() - ids)
}

/// Unmatched ID-symbols of all instances, in column order. Within a column
/// the non-ID cells match ID cells in row order; the rest are unmatched.
pub fn code_symbols(a: &Alignment, g: &Grammar) -> Vec<CodeSymbol> {
    let mut out = Vec::new();
    for col in &a.columns {
        let (_, content) = id_balance(a, col, g);
        let unmatched = col
            .cells
            .iter()
            .filter(|c| is_id_cell(a, c, g))
            .skip(content);
        for c in unmatched {
            if let Row::Instance(i) = c.row {
                out.push(CodeSymbol {
                    instance: i,
                    index: c.index,
                    cost: g.cost(col.symbol),
                });
            }
        }
    }
    out
}

/// Contribution of one column to `(BN, BE)`.
pub(crate) fn column_bits(a: &Alignment, col: &Column, g: &Grammar) -> (f64, f64) {
    let cost = g.cost(col.symbol);
    let bn = if col.is_hit() && col.cell(Row::New).is_some() {
        cost
    } else {
        0.0
    };
    let (ids, content) = id_balance(a, col, g);
    (bn, cost * ids.saturating_sub(content) as f64)
}

/// `(BN, BE)` contribution of each column, in column order.
pub fn column_costs(a: &Alignment, g: &Grammar) -> Vec<(f64, f64)> {
    a.columns.iter().map(|col| column_bits(a, col, g)).collect()
}

/// Scores without validating; callers guarantee `a` is well formed.
pub(crate) fn score_unchecked(a: &Alignment, g: &Grammar) -> Score {
    let (mut bn, mut be) = (0.0, 0.0);
    for col in &a.columns {
        let (n, e) = column_bits(a, col, g);
        bn += n;
        be += e;
    }
    Score::new(bn, be)
}

pub fn score(a: &Alignment, g: &Grammar) -> Result<Score, ScoreError> {
    validate_alignment(a, g)?;
    Ok(score_unchecked(a, g))
}

/// Change in `CD` from merging a fresh instance of `pattern` along `hits`,
/// computed from the projection without building the merged alignment.
pub fn delta_cd(
    a: &Alignment,
    pattern: usize,
    hits: &HitSet,
    g: &Grammar,
) -> Result<f64, ScoreError> {
    let proj = Projection::of(a, g);
    check_hits(&proj, g.pattern(pattern), hits)?;
    Ok(delta_from_projection(&proj, pattern, hits, g))
}

pub(crate) fn delta_from_projection(
    proj: &Projection,
    pattern: usize,
    hits: &HitSet,
    g: &Grammar,
) -> f64 {
    let p = g.pattern(pattern);
    let id_total: f64 = p.id_symbols().iter().map(|&s| g.cost(s)).sum();
    let gained: f64 = hits
        .iter()
        .map(|&(pos, j)| proj.entries[pos].gain(p.is_id(j), g))
        .sum();
    gained - id_total
}

/// `p_i = 2^-BE_i / sum_j 2^-BE_j`.
pub fn relative_probabilities(scores: &[Score]) -> Result<Vec<f64>, ScoreError> {
    if scores.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    let min_be = scores.iter().map(|s| s.be).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = scores.iter().map(|s| (min_be - s.be).exp2()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Rounds to a 1e-9 bit grid so that ties compare exactly.
pub fn quantize(bits: f64) -> i64 {
    (bits * 1e9).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::build_grammar;
    use crate::pattern::RawPattern;
    use crate::search::merge;

    #[test]
    fn bare_alignment_scores_zero() {
        let g = build_grammar(&[RawPattern::new("p", 1, 0, "a b")]).unwrap();
        let a = Alignment::bare(g.new_pattern(&["a", "b"]));
        assert_eq!(score(&a, &g).unwrap(), Score::ZERO);
    }

    #[test]
    fn id_prefix_pattern_fully_matched() {
        let g = build_grammar(&[RawPattern::new("x", 1, 1, "X1 a b")]).unwrap();
        let a = Alignment::bare(g.new_pattern(&["a", "b"]));
        let hits = vec![(0, 1), (1, 2)];
        let d = delta_cd(&a, 0, &hits, &g).unwrap();
        let m = merge(&a, 0, &hits, &g).unwrap();
        let s = score(&m, &g).unwrap();
        let l3 = 3f64.log2();
        assert!((s.bn - 2.0 * l3).abs() < 1e-12);
        assert!((s.be - l3).abs() < 1e-12);
        assert!((s.cd - l3).abs() < 1e-12);
        assert_eq!(s.cd, s.bn - s.be);
        assert!((d - s.cd).abs() < 1e-12);
    }

    #[test]
    fn probabilities() {
        assert_eq!(
            relative_probabilities(&[Score::new(3.0, 2.0)]).unwrap(),
            vec![1.0]
        );
        let p = relative_probabilities(&[Score::new(5.0, 2.0), Score::new(1.0, 2.0)]).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
        let p = relative_probabilities(&[Score::new(0.0, 1.0), Score::new(0.0, 2.0)]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            relative_probabilities(&[]).unwrap_err(),
            ScoreError::EmptyInput
        );
    }
}
