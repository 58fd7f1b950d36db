//! The bundled grammars, the table of Winograd-schema items they cover, and
//! an exhaustive enumerator of alignments for small problems.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::alignment::{Alignment, Cell, Column, Instance, Row};
use crate::grammar::{build_grammar, Grammar, GrammarError, NewPattern};
use crate::io::{overlay, parse_grammar, ParseError};
use crate::score::{quantize, score_unchecked};
use crate::search::{rank_order, Scored};
use crate::symbol::SymbolId;

/// Bundled grammar files by name.
pub const CORPUS_FILES: &[(&str, &str)] = &[
    (
        "fortune_brave.spg",
        include_str!("../corpus/fortune_brave.spg"),
    ),
    ("councilmen.spg", include_str!("../corpus/councilmen.spg")),
    (
        "councilmen_direct.spg",
        include_str!("../corpus/councilmen_direct.spg"),
    ),
    (
        "councilmen_inherit.spg",
        include_str!("../corpus/councilmen_inherit.spg"),
    ),
    ("pete_martin.spg", include_str!("../corpus/pete_martin.spg")),
    ("fish_worm.spg", include_str!("../corpus/fish_worm.spg")),
];

const MANIFEST: &str = include_str!("../corpus/manifest.txt");

/// Text of a bundled grammar file.
pub fn corpus_text(name: &str) -> Option<&'static str> {
    CORPUS_FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no bundled grammar named `{0}`")]
    UnknownFile(String),
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Builds a grammar from bundled files, later files overriding earlier
/// records with the same id.
pub fn load_corpus(files: &[&str]) -> Result<Grammar, CorpusError> {
    let mut layers = Vec::with_capacity(files.len());
    for &f in files {
        let text = corpus_text(f).ok_or_else(|| CorpusError::UnknownFile(f.to_string()))?;
        layers.push(parse_grammar(text).map_err(|source| CorpusError::Parse {
            file: f.to_string(),
            source,
        })?);
    }
    Ok(build_grammar(&overlay(&layers))?)
}

/// One Winograd-schema item of the bundled corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub grammar: String,
    pub sentence: Vec<String>,
    pub pronoun: String,
    pub referent: String,
    pub bridge: String,
}

/// The six bundled items, in file order.
pub fn corpus_manifest() -> Vec<ManifestEntry> {
    MANIFEST
        .split("\n\n")
        .filter_map(|block| {
            let field = |key: &str| {
                block
                    .lines()
                    .filter(|l| !l.starts_with('#'))
                    .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                    .map(str::trim)
            };
            Some(ManifestEntry {
                grammar: field("grammar")?.to_string(),
                sentence: field("sentence")?
                    .split_whitespace()
                    .map(str::to_string)
                    .collect(),
                pronoun: field("pronoun")?.to_string(),
                referent: field("referent")?.to_string(),
                bridge: field("bridge")?.to_string(),
            })
        })
        .collect()
}

pub const ORACLE_MAX_PATTERNS: usize = 5;
pub const ORACLE_MAX_SYMBOLS: usize = 6;
pub const ORACLE_MAX_NEW: usize = 8;
pub const ORACLE_MAX_INSTANCES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("bounds exceeded: {0}")]
    BoundsExceeded(String),
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best_cd: f64,
    /// Distinct valid alignments, the bare one included. Alignments that
    /// differ only by swapping instances of the same pattern count once.
    pub count: u64,
    pub best: Scored,
}

/// Enumerates every valid alignment of `new` with up to `max_instances`
/// instances and returns the best under the search's rank order.
///
/// An alignment is valid when its columns hold equal symbols with at most one
/// cell per row, some column order preserves every row's order, and every
/// instance is linked to the New pattern through shared columns (the
/// alignments a sequence of merges can build).
pub fn oracle_enumerate(
    new: &NewPattern,
    g: &Grammar,
    max_instances: usize,
) -> Result<OracleResult, OracleError> {
    if max_instances > ORACLE_MAX_INSTANCES {
        return Err(OracleError::BoundsExceeded(format!(
            "{max_instances} instances > {ORACLE_MAX_INSTANCES}"
        )));
    }
    if g.len() > ORACLE_MAX_PATTERNS {
        return Err(OracleError::BoundsExceeded(format!(
            "{} patterns > {ORACLE_MAX_PATTERNS}",
            g.len()
        )));
    }
    if let Some(p) = g.patterns().iter().find(|p| p.len() > ORACLE_MAX_SYMBOLS) {
        return Err(OracleError::BoundsExceeded(format!(
            "pattern `{}` has {} symbols > {ORACLE_MAX_SYMBOLS}",
            p.name,
            p.len()
        )));
    }
    if new.len() > ORACLE_MAX_NEW {
        return Err(OracleError::BoundsExceeded(format!(
            "New has {} symbols > {ORACLE_MAX_NEW}",
            new.len()
        )));
    }
    let mut run = Enumeration {
        new,
        g,
        count: 0,
        best: None,
    };
    let mut multiset = Vec::new();
    run.multisets(0, max_instances, &mut multiset);
    let best = run.best.expect("the bare alignment is always valid");
    Ok(OracleResult {
        best_cd: best.score.cd,
        count: run.count,
        best,
    })
}

struct Enumeration<'a> {
    new: &'a NewPattern,
    g: &'a Grammar,
    count: u64,
    best: Option<Scored>,
}

/// Columns under construction. Row 0 is the New pattern, row `r > 0` the
/// instance `r - 1`.
struct Partial {
    symbols: Vec<u32>,
    costs: Vec<f64>,
    cells: Vec<Vec<(usize, usize)>>,
    /// Precedence edges between columns.
    after: Vec<Vec<usize>>,
    /// Column of each cell, by row and symbol index.
    column_of: Vec<Vec<usize>>,
    /// Whether each cell is an ID-symbol.
    is_id: Vec<Vec<bool>>,
    /// Row permutations other than the identity that swap rows of the same
    /// pattern.
    symmetries: Vec<Vec<usize>>,
    stack: Vec<usize>,
    mark: Vec<u32>,
    epoch: u32,
    image: Vec<usize>,
}

impl Partial {
    fn reaches(&mut self, from: usize, to: usize) -> bool {
        self.epoch += 1;
        if self.mark.len() < self.cells.len() {
            self.mark.resize(self.cells.len(), 0);
        }
        self.stack.clear();
        self.stack.push(from);
        while let Some(c) = self.stack.pop() {
            if c == to {
                return true;
            }
            if self.mark[c] != self.epoch {
                self.mark[c] = self.epoch;
                self.stack.extend(&self.after[c]);
            }
        }
        false
    }

    fn push_column(&mut self, sym: u32, cost: f64, cell: (usize, usize)) -> usize {
        let c = self.cells.len();
        self.symbols.push(sym);
        self.costs.push(cost);
        self.cells.push(vec![cell]);
        self.after.push(Vec::new());
        self.column_of[cell.0][cell.1] = c;
        c
    }

    fn pop_column(&mut self) {
        self.symbols.pop();
        self.costs.pop();
        self.cells.pop();
        self.after.pop();
    }

    /// Whether renaming rows by `perm` maps the partition onto itself.
    fn fixed_by(&mut self, perm: &[usize]) -> bool {
        self.image.clear();
        self.image.resize(self.cells.len(), usize::MAX);
        for (r, &s) in perm.iter().enumerate().take(self.column_of.len()) {
            for k in 0..self.column_of[r].len() {
                let (a, b) = (self.column_of[r][k], self.column_of[s][k]);
                if self.image[a] == usize::MAX {
                    self.image[a] = b;
                } else if self.image[a] != b {
                    return false;
                }
            }
        }
        true
    }

    fn connected(&self) -> bool {
        let rows = self.column_of.len();
        let mut parent = [0usize; ORACLE_MAX_INSTANCES + 1];
        for (r, p) in parent.iter_mut().enumerate().take(rows) {
            *p = r;
        }
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                x = parent[x];
            }
            x
        }
        for cells in &self.cells {
            for w in cells.windows(2) {
                let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..rows).all(|r| find(&mut parent, r) == root)
    }

    fn cd(&self) -> f64 {
        let (mut bn, mut be) = (0.0, 0.0);
        for (cells, &cost) in self.cells.iter().zip(&self.costs) {
            if cells.len() >= 2 && cells[0].0 == 0 {
                bn += cost;
            }
            let ids = cells.iter().filter(|&&(r, i)| self.is_id[r][i]).count();
            be += cost * ids.saturating_sub(cells.len() - ids) as f64;
        }
        bn - be
    }
}

impl Enumeration<'_> {
    /// Pattern multisets as non-decreasing index lists.
    fn multisets(&mut self, from: usize, left: usize, chosen: &mut Vec<usize>) {
        self.partitions(chosen);
        if left == 0 {
            return;
        }
        for p in from..self.g.len() {
            chosen.push(p);
            self.multisets(p, left - 1, chosen);
            chosen.pop();
        }
    }

    /// Counts the multiset's alignments up to swaps of same-pattern rows:
    /// by Burnside's lemma, the number of orbits is the number of labelled
    /// alignments fixed by each row swap, summed and divided by the number
    /// of swaps.
    fn partitions(&mut self, patterns: &[usize]) {
        let n = self.new.len();
        let mut symmetries = Vec::new();
        permutations(
            &mut (0..patterns.len()).collect(),
            0,
            &mut |perm: &[usize]| {
                if perm
                    .iter()
                    .enumerate()
                    .all(|(i, &j)| patterns[i] == patterns[j])
                    && perm.iter().enumerate().any(|(i, &j)| i != j)
                {
                    symmetries.push(
                        std::iter::once(0)
                            .chain(perm.iter().map(|&j| j + 1))
                            .collect(),
                    );
                }
            },
        );
        let group = symmetries.len() as u64 + 1;
        let mut part = Partial {
            symbols: self.new.pattern.symbols.iter().map(|s| s.0).collect(),
            costs: self
                .new
                .pattern
                .symbols
                .iter()
                .map(|&s| self.g.cost(s))
                .collect(),
            cells: (0..n).map(|i| vec![(0, i)]).collect(),
            after: (0..n)
                .map(|i| if i + 1 < n { vec![i + 1] } else { Vec::new() })
                .collect(),
            column_of: std::iter::once((0..n).collect())
                .chain(patterns.iter().map(|&p| vec![0; self.g.pattern(p).len()]))
                .collect(),
            is_id: std::iter::once(vec![false; n])
                .chain(patterns.iter().map(|&p| {
                    let pat = self.g.pattern(p);
                    (0..pat.len()).map(|i| pat.is_id(i)).collect()
                }))
                .collect(),
            symmetries,
            stack: Vec::new(),
            mark: Vec::new(),
            epoch: 0,
            image: Vec::new(),
        };
        let rows: Vec<Vec<u32>> = patterns
            .iter()
            .map(|&p| self.g.pattern(p).symbols.iter().map(|s| s.0).collect())
            .collect();
        let mut fixed = 0;
        self.place(patterns, &rows, 0, 0, None, &mut part, &mut fixed);
        debug_assert_eq!(fixed % group, 0);
        self.count += fixed / group;
    }

    /// Places cell `index` of instance row `row + 1`; `prev` is the column of
    /// the row's previous cell.
    #[allow(clippy::too_many_arguments)]
    fn place(
        &mut self,
        patterns: &[usize],
        rows: &[Vec<u32>],
        row: usize,
        index: usize,
        prev: Option<usize>,
        part: &mut Partial,
        fixed: &mut u64,
    ) {
        if row == rows.len() {
            self.evaluate(patterns, part, fixed);
            return;
        }
        if index == rows[row].len() {
            self.place(patterns, rows, row + 1, 0, None, part, fixed);
            return;
        }
        let r = row + 1;
        let sym = rows[row][index];
        // Join an existing column without a cell in this row.
        for c in 0..part.cells.len() {
            if part.symbols[c] != sym || part.cells[c].last().is_some_and(|&(cr, _)| cr == r) {
                continue;
            }
            if let Some(p) = prev {
                if part.reaches(c, p) {
                    continue;
                }
                part.after[p].push(c);
            }
            part.cells[c].push((r, index));
            part.column_of[r][index] = c;
            self.place(patterns, rows, row, index + 1, Some(c), part, fixed);
            part.cells[c].pop();
            if let Some(p) = prev {
                part.after[p].pop();
            }
        }
        // Or open a fresh column.
        let c = part.push_column(sym, self.g.cost(SymbolId(sym)), (r, index));
        if let Some(p) = prev {
            part.after[p].push(c);
        }
        self.place(patterns, rows, row, index + 1, Some(c), part, fixed);
        if let Some(p) = prev {
            part.after[p].pop();
        }
        part.pop_column();
    }

    fn evaluate(&mut self, patterns: &[usize], part: &mut Partial, fixed: &mut u64) {
        if !part.connected() {
            return;
        }
        *fixed += 1;
        for s in 0..part.symmetries.len() {
            let perm = std::mem::take(&mut part.symmetries[s]);
            if part.fixed_by(&perm) {
                *fixed += 1;
            }
            part.symmetries[s] = perm;
        }
        // Cheap score first; only contenders are built and fully ranked.
        if self
            .best
            .as_ref()
            .is_some_and(|b| quantize(part.cd()) < quantize(b.score.cd))
        {
            return;
        }
        let a = self.build(patterns, part);
        let score = score_unchecked(&a, self.g);
        let cand = Scored {
            alignment: a,
            score,
        };
        if self
            .best
            .as_ref()
            .is_none_or(|b| rank_order(&cand, b, self.g) == Ordering::Less)
        {
            self.best = Some(cand);
        }
    }

    /// The alignment with columns in a topological order (smallest column
    /// index first among the ready ones).
    fn build(&self, patterns: &[usize], part: &Partial) -> Alignment {
        let n = part.cells.len();
        let mut indegree = vec![0usize; n];
        for outs in &part.after {
            for &c in outs {
                indegree[c] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&c| indegree[c] == 0).collect();
        let mut columns = Vec::with_capacity(n);
        while let Some(c) = ready.pop_first() {
            for &d in &part.after[c] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.insert(d);
                }
            }
            let mut cells: Vec<Cell> = part.cells[c]
                .iter()
                .map(|&(r, index)| Cell {
                    row: if r == 0 {
                        Row::New
                    } else {
                        Row::Instance(r - 1)
                    },
                    index,
                })
                .collect();
            cells.sort();
            columns.push(Column {
                symbol: SymbolId(part.symbols[c]),
                cells,
            });
        }
        Alignment {
            new: self.new.clone(),
            instances: patterns
                .iter()
                .map(|&pattern| Instance { pattern })
                .collect(),
            columns,
        }
    }
}

fn permutations(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permutations(items, at + 1, visit);
        items.swap(at, i);
    }
}
