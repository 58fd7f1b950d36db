//! Heuristic construction of multiple alignments.
//!
//! A partial alignment is viewed as a single sequence, its [`Projection`]
//! (one symbol per column). Each Old pattern is aligned pairwise against that
//! sequence, and the best hit sets are merged in as fresh instances. A beam of
//! the best partial alignments is grown this way until no member improves.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::alignment::{Alignment, Cell, Column, Instance, Row};
use crate::grammar::{Grammar, NewPattern};
use crate::pattern::Pattern;
use crate::score::{id_balance, quantize, score_unchecked, Score};
use crate::symbol::SymbolId;

/// Pairs of `(projection position, symbol index in the pattern)`, strictly
/// increasing in both coordinates.
pub type HitSet = Vec<(usize, usize)>;

const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("hit set is empty")]
    EmptyHitSet,
    #[error("hit ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("hit ({0}, {1}) pairs different symbols")]
    SymbolMismatch(usize, usize),
    #[error("hits cross or repeat; row order cannot be preserved")]
    MergeOrderConflict,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionEntry {
    pub column: usize,
    pub symbol: SymbolId,
    /// Cost of the New symbol if this column would become a hit by gaining
    /// a cell; zero otherwise.
    pub new_gain: f64,
    /// ID cells in the column.
    pub ids: usize,
    /// Non-ID cells in the column; each matches one ID cell.
    pub contents: usize,
}

impl ProjectionEntry {
    /// Bits `CD` gains when a cell joins this column, not counting the
    /// joining pattern's own ID cost (charged once per merge).
    pub fn gain(&self, joining_is_id: bool, g: &Grammar) -> f64 {
        let matched = if joining_is_id {
            self.ids < self.contents
        } else {
            self.ids > self.contents
        };
        self.new_gain + if matched { g.cost(self.symbol) } else { 0.0 }
    }
}

/// One entry per column of an alignment, in column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub entries: Vec<ProjectionEntry>,
}

impl Projection {
    pub fn of(a: &Alignment, g: &Grammar) -> Projection {
        let entries = a
            .columns
            .iter()
            .enumerate()
            .map(|(ci, col)| {
                let cost = g.cost(col.symbol);
                let new_gain = if !col.is_hit() && col.cells[0].row == Row::New {
                    cost
                } else {
                    0.0
                };
                let (ids, contents) = id_balance(a, col, g);
                ProjectionEntry {
                    column: ci,
                    symbol: col.symbol,
                    new_gain,
                    ids,
                    contents,
                }
            })
            .collect();
        Projection { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn symbols(&self) -> Vec<SymbolId> {
        self.entries.iter().map(|e| e.symbol).collect()
    }
}

pub fn projection(a: &Alignment, g: &Grammar) -> Projection {
    Projection::of(a, g)
}

pub(crate) fn check_hits(proj: &Projection, p: &Pattern, hits: &HitSet) -> Result<(), MergeError> {
    if hits.is_empty() {
        return Err(MergeError::EmptyHitSet);
    }
    let mut prev: Option<(usize, usize)> = None;
    for &(pos, j) in hits {
        if pos >= proj.len() || j >= p.len() {
            return Err(MergeError::OutOfRange(pos, j));
        }
        if proj.entries[pos].symbol != p.symbols[j] {
            return Err(MergeError::SymbolMismatch(pos, j));
        }
        if let Some((pp, pj)) = prev {
            if pos <= pp || j <= pj {
                return Err(MergeError::MergeOrderConflict);
            }
        }
        prev = Some((pos, j));
    }
    Ok(())
}

/// A candidate hit set with the `CD` change it would produce.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredHits {
    pub hits: HitSet,
    pub delta: f64,
}

#[cfg(test)]
fn hits_order(a: &ScoredHits, b: &ScoredHits) -> Ordering {
    quantize(b.delta)
        .cmp(&quantize(a.delta))
        .then(b.hits.len().cmp(&a.hits.len()))
        .then_with(|| a.hits.cmp(&b.hits))
}

/// Number of non-empty monotone matchings between `proj` and `p`
/// (saturating).
pub fn count_hit_sets(proj: &Projection, p: &Pattern) -> u64 {
    let pairs = match_pairs(proj, p);
    let mut ways = vec![0u64; pairs.len()];
    let mut total = 0u64;
    for i in (0..pairs.len()).rev() {
        let (pi, pj) = pairs[i];
        let mut w = 1u64;
        for k in i + 1..pairs.len() {
            let (qi, qj) = pairs[k];
            if qi > pi && qj > pj {
                w = w.saturating_add(ways[k]);
            }
        }
        ways[i] = w;
        total = total.saturating_add(w);
    }
    total
}

fn match_pairs(proj: &Projection, p: &Pattern) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (pos, e) in proj.entries.iter().enumerate() {
        for (j, &s) in p.symbols.iter().enumerate() {
            if s == e.symbol {
                pairs.push((pos, j));
            }
        }
    }
    pairs
}

/// The best `k` hit sets aligning `g.pattern(pattern)` against `proj`, best
/// first: higher `CD` change, then more hits, then lexicographically smaller
/// coordinates. Exact for that order.
///
/// `best[pos][j]` holds the top `k` chains using only projection positions
/// `>= pos` and pattern indices `>= j`. Prepending a pair to chains adds the
/// same weight and length to each and keeps their lexicographic order, so the
/// chains starting at `(pos, j)` are that pair alone or that pair in front of
/// one of `best[pos + 1][j + 1]`.
pub fn pairwise_align(proj: &Projection, pattern: usize, g: &Grammar, k: usize) -> Vec<ScoredHits> {
    let p = g.pattern(pattern);
    if k == 0 {
        return Vec::new();
    }
    // Only positions holding one of the pattern's symbols can take part.
    let positions: Vec<usize> = (0..proj.len())
        .filter(|&pos| p.symbols.contains(&proj.entries[pos].symbol))
        .collect();
    let (n, m) = (positions.len(), p.len());
    if n == 0 {
        return Vec::new();
    }
    let own: f64 = p.id_symbols().iter().map(|&s| g.cost(s)).sum();
    let mut arena: Vec<ChainNode> = Vec::new();
    let width = m + 1;
    let mut best: Vec<Vec<u32>> = vec![Vec::new(); (n + 1) * width];
    let mut cands: Vec<u32> = Vec::new();
    for r in (0..n).rev() {
        let pos = positions[r];
        for j in (0..m).rev() {
            cands.clear();
            if proj.entries[pos].symbol == p.symbols[j] {
                let w = proj.entries[pos].gain(p.is_id(j), g);
                let add = |next: u32, arena: &mut Vec<ChainNode>| {
                    let (weight, len) = match arena.get(next as usize) {
                        Some(t) => (t.weight + w, t.len + 1),
                        None => (w, 1),
                    };
                    arena.push(ChainNode {
                        pos,
                        j,
                        next,
                        weight,
                        len,
                    });
                    (arena.len() - 1) as u32
                };
                cands.push(add(NIL, &mut arena));
                for &tail in &best[(r + 1) * width + j + 1] {
                    cands.push(add(tail, &mut arena));
                }
            }
            cands.extend_from_slice(&best[(r + 1) * width + j]);
            cands.extend_from_slice(&best[r * width + j + 1]);
            cands.sort_unstable_by(|&x, &y| chain_order(&arena, x, y));
            cands.dedup();
            cands.truncate(k);
            best[r * width + j] = cands.clone();
        }
    }
    best[0]
        .iter()
        .map(|&id| {
            let mut hits = Vec::with_capacity(arena[id as usize].len as usize);
            let mut at = id;
            while at != NIL {
                let node = &arena[at as usize];
                hits.push((node.pos, node.j));
                at = node.next;
            }
            ScoredHits {
                hits,
                delta: arena[id as usize].weight - own,
            }
        })
        .collect()
}

const NIL: u32 = u32::MAX;

/// A chain of hits stored as a linked list; `weight` and `len` cover the
/// whole chain from this node on.
struct ChainNode {
    pos: usize,
    j: usize,
    next: u32,
    weight: f64,
    len: u32,
}

fn chain_order(arena: &[ChainNode], x: u32, y: u32) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    let (a, b) = (&arena[x as usize], &arena[y as usize]);
    quantize(b.weight)
        .cmp(&quantize(a.weight))
        .then(b.len.cmp(&a.len))
        .then_with(|| {
            let (mut p, mut q) = (x, y);
            while p != NIL && q != NIL {
                let (u, v) = (&arena[p as usize], &arena[q as usize]);
                match (u.pos, u.j).cmp(&(v.pos, v.j)) {
                    Ordering::Equal => {}
                    o => return o,
                }
                if p == q {
                    return Ordering::Equal;
                }
                p = u.next;
                q = v.next;
            }
            (p != NIL).cmp(&(q != NIL))
        })
}

/// Adds a fresh instance of `pattern`, joining each hit symbol to its
/// projection column. Unhit symbols get new single-cell columns: those before
/// a hit sit immediately before that hit's column, trailing ones immediately
/// after the last hit.
pub fn merge(
    a: &Alignment,
    pattern: usize,
    hits: &HitSet,
    g: &Grammar,
) -> Result<Alignment, MergeError> {
    let proj = Projection::of(a, g);
    let p = g.pattern(pattern);
    check_hits(&proj, p, hits)?;
    let row = Row::Instance(a.instances.len());
    let mut columns = Vec::with_capacity(a.columns.len() + p.len() - hits.len());
    let mut next_col = 0;
    let mut next_sym = 0;
    let fresh = |j: usize| Column {
        symbol: p.symbols[j],
        cells: vec![Cell { row, index: j }],
    };
    for &(pos, j) in hits {
        columns.extend_from_slice(&a.columns[next_col..pos]);
        columns.extend((next_sym..j).map(fresh));
        let mut col = a.columns[pos].clone();
        col.cells.push(Cell { row, index: j });
        col.cells.sort();
        columns.push(col);
        next_col = pos + 1;
        next_sym = j + 1;
    }
    columns.extend((next_sym..p.len()).map(fresh));
    columns.extend_from_slice(&a.columns[next_col..]);
    let mut instances = a.instances.clone();
    instances.push(Instance { pattern });
    Ok(Alignment {
        new: a.new.clone(),
        instances,
        columns,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub beam_width: usize,
    pub pairwise_k: usize,
    pub max_instances: usize,
    pub max_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam_width: 50,
            pairwise_k: 10,
            max_instances: 32,
            max_iterations: 20,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("search parameter `{0}` must be at least 1")]
pub struct ConfigError(pub &'static str);

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("beam_width", self.beam_width),
            ("pairwise_k", self.pairwise_k),
            ("max_instances", self.max_instances),
            ("max_iterations", self.max_iterations),
        ] {
            if v == 0 {
                return Err(ConfigError(name));
            }
        }
        Ok(())
    }
}

/// A scored alignment as returned by [`search`].
#[derive(Clone, Debug)]
pub struct Scored {
    pub alignment: Alignment,
    pub score: Score,
}

/// Sorted pattern ids and hit signature: alignments equal on both are one.
type DedupKey = (Vec<String>, Vec<Vec<(usize, usize)>>);

/// Precomputed sort key for the search's total order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct RankKey {
    cd: i64,
    instances: usize,
    gaps: usize,
    piled: usize,
    columns: usize,
    names: Vec<String>,
    signature: Vec<Vec<(usize, usize)>>,
}

impl RankKey {
    fn of(a: &Alignment, s: &Score, g: &Grammar) -> RankKey {
        RankKey {
            cd: quantize(s.cd),
            instances: a.instances.len(),
            gaps: Yields::of(a, g).total_gap(),
            piled: a
                .columns
                .iter()
                .map(|c| c.cells.len().saturating_sub(2))
                .sum(),
            columns: a.columns.len(),
            names: a.sorted_pattern_names(g),
            signature: a.hit_signature(),
        }
    }

    /// The key without its final tie-breaks on pattern list and signature.
    fn primary(&self) -> (std::cmp::Reverse<i64>, usize, usize, usize, usize) {
        (
            std::cmp::Reverse(self.cd),
            self.instances,
            self.gaps,
            self.piled,
            self.columns,
        )
    }

    fn dedup_key(&self) -> DedupKey {
        (self.names.clone(), self.signature.clone())
    }
}

impl Ord for RankKey {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cd.cmp(&self.cd)
            .then(self.instances.cmp(&o.instances))
            .then(self.gaps.cmp(&o.gaps))
            .then(self.piled.cmp(&o.piled))
            .then(self.columns.cmp(&o.columns))
            .then_with(|| self.names.cmp(&o.names))
            .then_with(|| self.signature.cmp(&o.signature))
    }
}

impl PartialOrd for RankKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone)]
struct State {
    alignment: Alignment,
    score: Score,
    key: RankKey,
    /// Skipped New words summed over instance yields.
    gaps: usize,
}

impl State {
    fn new(alignment: Alignment, g: &Grammar) -> State {
        let score = score_unchecked(&alignment, g);
        let key = RankKey::of(&alignment, &score, g);
        let gaps = key.gaps;
        State {
            alignment,
            score,
            key,
            gaps,
        }
    }

    fn guided(&self) -> f64 {
        self.score.cd - GAP_PENALTY * self.gaps as f64
    }
}

/// The order used to rank alignments: higher `CD`, then fewer instances,
/// fewer New words skipped inside instance yields, fewer cells beyond two per
/// column (one-to-one matches over piled-up ones), fewer columns, smaller
/// sorted pattern-id list, smaller hit signature.
pub fn rank_order(a: &Scored, b: &Scored, g: &Grammar) -> Ordering {
    RankKey::of(&a.alignment, &a.score, g).cmp(&RankKey::of(&b.alignment, &b.score, g))
}

/// A proposed expansion, not yet materialised.
struct Move {
    parent: usize,
    /// Grammar level of the (first) pattern added.
    level: usize,
    cd: f64,
    /// Estimated skipped New words after the move, for beam guidance.
    gaps: usize,
    steps: Vec<(usize, HitSet)>,
    /// Position in the iteration's move list.
    origin: usize,
}

impl Move {
    /// Copy without the hit sets, for ranking.
    fn clone_meta(&self) -> Move {
        Move {
            parent: self.parent,
            level: self.level,
            cd: self.cd,
            gaps: self.gaps,
            steps: Vec::new(),
            origin: self.origin,
        }
    }

    fn guided(&self) -> f64 {
        self.cd - GAP_PENALTY * self.gaps as f64
    }
}

/// Bits charged per skipped New word when steering half of the beam.
const GAP_PENALTY: f64 = 10.0;

/// Patterns containing each symbol, split by whether the occurrence is an
/// ID-symbol.
struct SymbolIndex {
    any: HashMap<SymbolId, Vec<usize>>,
    id: HashMap<SymbolId, Vec<usize>>,
    content: HashMap<SymbolId, Vec<usize>>,
}

impl SymbolIndex {
    fn of(g: &Grammar) -> SymbolIndex {
        let mut ix = SymbolIndex {
            any: HashMap::new(),
            id: HashMap::new(),
            content: HashMap::new(),
        };
        for (pi, p) in g.patterns().iter().enumerate() {
            for (j, &s) in p.symbols.iter().enumerate() {
                for map in [
                    &mut ix.any,
                    if p.is_id(j) {
                        &mut ix.id
                    } else {
                        &mut ix.content
                    },
                ] {
                    let v = map.entry(s).or_default();
                    if v.last() != Some(&pi) {
                        v.push(pi);
                    }
                }
            }
        }
        ix
    }

    /// Patterns with at least one hit that could raise `CD` against `proj`.
    fn promising(&self, proj: &Projection) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &proj.entries {
            let maps: &[&HashMap<SymbolId, Vec<usize>>] = if e.new_gain > 0.0 {
                &[&self.any]
            } else if e.ids > e.contents {
                &[&self.content]
            } else if e.contents > e.ids {
                &[&self.id]
            } else {
                &[]
            };
            for m in maps {
                out.extend(m.get(&e.symbol).into_iter().flatten().copied());
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// New positions covered by each instance, directly or through the instances
/// whose ID-symbols its contents match, as bit sets.
struct Yields {
    sets: Vec<Vec<u64>>,
    /// New position of each column, if any.
    col_new: Vec<Option<usize>>,
    /// Instances with an ID cell in each column.
    col_ids: Vec<Vec<usize>>,
}

fn bit_words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn set_gap(set: &[u64]) -> usize {
    let count: usize = set.iter().map(|w| w.count_ones() as usize).sum();
    if count == 0 {
        return 0;
    }
    let first = set.iter().position(|&w| w != 0).expect("non-empty");
    let last = set.iter().rposition(|&w| w != 0).expect("non-empty");
    let lo = first * 64 + set[first].trailing_zeros() as usize;
    let hi = last * 64 + 63 - set[last].leading_zeros() as usize;
    hi - lo + 1 - count
}

impl Yields {
    fn of(a: &Alignment, g: &Grammar) -> Yields {
        let n = a.instances.len();
        let words = bit_words(a.new.len());
        let mut direct = vec![vec![0u64; words]; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut col_new = Vec::with_capacity(a.columns.len());
        let mut col_ids = Vec::with_capacity(a.columns.len());
        for col in &a.columns {
            let new = col.cell(Row::New).map(|c| c.index);
            let mut ids = Vec::new();
            let mut contents = Vec::new();
            for cell in &col.cells {
                if let Row::Instance(i) = cell.row {
                    if let Some(p) = new {
                        direct[i][p / 64] |= 1 << (p % 64);
                    }
                    if a.row_pattern(cell.row, g).is_id(cell.index) {
                        ids.push(i);
                    } else {
                        contents.push(i);
                    }
                }
            }
            for &c in &contents {
                children[c].extend(ids.iter().copied().filter(|&i| i != c));
            }
            col_new.push(new);
            col_ids.push(ids);
        }
        let mut sets: Vec<Option<Vec<u64>>> = vec![None; n];
        let mut visiting = vec![false; n];
        fn fill(
            i: usize,
            direct: &[Vec<u64>],
            children: &[Vec<usize>],
            sets: &mut [Option<Vec<u64>>],
            visiting: &mut [bool],
        ) {
            if sets[i].is_some() || visiting[i] {
                return;
            }
            visiting[i] = true;
            let mut s = direct[i].clone();
            for &c in &children[i] {
                fill(c, direct, children, sets, visiting);
                if let Some(cs) = &sets[c] {
                    for (w, x) in s.iter_mut().zip(cs) {
                        *w |= x;
                    }
                }
            }
            visiting[i] = false;
            sets[i] = Some(s);
        }
        for i in 0..n {
            fill(i, &direct, &children, &mut sets, &mut visiting);
        }
        let sets = sets.into_iter().map(|s| s.expect("filled")).collect();
        Yields {
            sets,
            col_new,
            col_ids,
        }
    }

    fn total_gap(&self) -> usize {
        self.sets.iter().map(|s| set_gap(s)).sum()
    }

    /// Skipped New words inside the yield a fresh instance of `p` would have.
    fn gap_of(&self, p: &Pattern, hits: &HitSet) -> usize {
        let mut s = vec![
            0u64;
            self.sets
                .first()
                .map_or(1, Vec::len)
                .max(bit_words(self.col_new.len()))
        ];
        for &(pos, j) in hits {
            if let Some(np) = self.col_new[pos] {
                if np / 64 < s.len() {
                    s[np / 64] |= 1 << (np % 64);
                }
            }
            if !p.is_id(j) {
                for &c in &self.col_ids[pos] {
                    for (w, x) in s.iter_mut().zip(&self.sets[c]) {
                        *w |= x;
                    }
                }
            }
        }
        set_gap(&s)
    }
}

/// Beam search for the alignments that encode `new` most economically.
///
/// Every iteration expands each beam member by one Old pattern (top
/// `pairwise_k` hit sets per pattern). Only expansions that raise `CD` are
/// kept, except from the bare New alignment. When a single expansion does not
/// pay for its own ID-symbols, a second pattern that matches one of them is
/// tried on top of it and the pair is kept if together they raise `CD`.
/// Half of the next beam is the best expansions in rank order; the other half
/// favours expansions whose instances cover runs of adjacent New words.
/// Members with no improving expansion are terminal. Returns all distinct
/// terminal alignments (plus the bare one and any survivors of the last
/// iteration), best first.
pub fn search(new: &NewPattern, g: &Grammar, cfg: &SearchConfig) -> Vec<Scored> {
    let bare = State::new(Alignment::bare(new.clone()), g);
    let index = SymbolIndex::of(g);
    let levels = pattern_levels(g);
    let mut seen: HashSet<DedupKey> = HashSet::new();
    seen.insert(bare.key.dedup_key());
    let mut results: Vec<State> = vec![bare.clone()];
    let mut beam = vec![(bare, true)];

    for iteration in 0..cfg.max_iterations {
        let mut moves: Vec<Move> = Vec::new();
        for (si, (state, _)) in beam.iter().enumerate() {
            let before = moves.len();
            expand(
                state,
                si,
                iteration == 0,
                g,
                cfg,
                &index,
                &levels,
                &mut moves,
            );
            if moves.len() == before {
                results.push(state.clone());
            }
        }
        if moves.is_empty() {
            beam.clear();
            break;
        }
        let ranked = select(&moves, cfg.beam_width, |m| m.cd);
        let lowest = lowest_levels(&moves, beam.len());
        let bottom_up: Vec<Move> = moves
            .iter()
            .filter(|m| beam[m.parent].1 && m.level == lowest[m.parent])
            .map(Move::clone_meta)
            .collect();
        let guided: Vec<usize> = select(&bottom_up, cfg.beam_width, Move::guided)
            .into_iter()
            .map(|i| bottom_up[i].origin)
            .collect();
        let mut fresh: Vec<(State, bool)> = Vec::new();
        let mut keys = HashSet::new();
        for (mi, bottom) in guided
            .iter()
            .map(|&m| (m, true))
            .chain(ranked.iter().map(|&m| (m, false)))
        {
            let m = &moves[mi];
            let mut a = beam[m.parent].0.alignment.clone();
            for (pattern, hits) in &m.steps {
                a = merge(&a, *pattern, hits, g).expect("hits come from pairwise_align");
            }
            let st = State::new(a, g);
            let dk = st.key.dedup_key();
            if seen.contains(&dk) || !keys.insert(dk) {
                continue;
            }
            fresh.push((st, bottom));
        }
        beam = fill_beam(fresh, cfg.beam_width);
        for (st, _) in &beam {
            seen.insert(st.key.dedup_key());
        }
    }
    results.extend(beam.into_iter().map(|(st, _)| st));

    results.sort_by(|a, b| a.key.cmp(&b.key));
    results.truncate(cfg.beam_width.max(1) * RESULT_FACTOR);
    for st in results.iter_mut() {
        reseat(st, g, cfg);
    }
    let mut out: Vec<State> = Vec::new();
    let mut keys = HashSet::new();
    results.sort_by(|a, b| a.key.cmp(&b.key));
    for st in results {
        if keys.insert(st.key.dedup_key()) {
            out.push(st);
        }
    }
    out.into_iter()
        .map(|s| Scored {
            alignment: s.alignment,
            score: s.score,
        })
        .collect()
}

/// Results kept per beam slot for the final refinement.
const RESULT_FACTOR: usize = 4;

/// The alignment with one instance taken out: its cells are dropped, columns
/// left empty disappear and later instances move up one row.
pub fn without_instance(a: &Alignment, i: usize) -> Alignment {
    let mut instances = a.instances.clone();
    instances.remove(i);
    let columns = a
        .columns
        .iter()
        .filter_map(|c| {
            let cells: Vec<Cell> = c
                .cells
                .iter()
                .filter(|cell| cell.row != Row::Instance(i))
                .map(|cell| match cell.row {
                    Row::Instance(r) if r > i => Cell {
                        row: Row::Instance(r - 1),
                        index: cell.index,
                    },
                    _ => *cell,
                })
                .collect();
            (!cells.is_empty()).then_some(Column {
                symbol: c.symbol,
                cells,
            })
        })
        .collect();
    Alignment {
        new: a.new.clone(),
        instances,
        columns,
    }
}

/// Local refinement: each instance in turn is taken out and aligned again
/// against the rest. Placements that rank higher replace the alignment;
/// placements that tie on everything but the pattern list and signature are
/// explored too, up to `PLATEAU_LIMIT` alignments.
fn reseat(st: &mut State, g: &Grammar, cfg: &SearchConfig) {
    let mut visited: HashSet<DedupKey> = HashSet::new();
    visited.insert(st.key.dedup_key());
    let mut queue: Vec<State> = vec![st.clone()];
    while let Some(cur) = queue.pop() {
        for i in 0..cur.alignment.instances.len() {
            let pi = cur.alignment.instances[i].pattern;
            let rest = without_instance(&cur.alignment, i);
            let proj = Projection::of(&rest, g);
            for sh in pairwise_align(&proj, pi, g, cfg.pairwise_k) {
                let merged = merge(&rest, pi, &sh.hits, g).expect("hits come from pairwise_align");
                // Removing an instance can strand those attached through it.
                if !merged.is_connected() {
                    continue;
                }
                let cand = State::new(merged, g);
                if visited.len() >= PLATEAU_LIMIT || !visited.insert(cand.key.dedup_key()) {
                    continue;
                }
                if cand.key.primary() < st.key.primary() {
                    *st = cand.clone();
                    queue.clear();
                    queue.push(cand);
                } else if cand.key.primary() == st.key.primary() {
                    if cand.key < st.key {
                        *st = cand.clone();
                    }
                    queue.push(cand);
                }
            }
        }
    }
}

/// Alignments visited by one refinement.
const PLATEAU_LIMIT: usize = 256;

/// Lowest pattern level among each parent's moves.
fn lowest_levels(moves: &[Move], parents: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; parents];
    for m in moves {
        out[m.parent] = out[m.parent].min(m.level);
    }
    out
}

/// Height of each pattern in the grammar's reference structure: 0 for
/// patterns whose contents name no class, otherwise one more than the highest
/// pattern whose class symbol appears among its contents. Cycles are cut off
/// at the number of patterns. Patterns without ID-symbols sit above all others.
pub fn pattern_levels(g: &Grammar) -> Vec<usize> {
    let n = g.len();
    let mut by_class: HashMap<SymbolId, Vec<usize>> = HashMap::new();
    for (pi, p) in g.patterns().iter().enumerate() {
        if p.id_prefix_len > 0 {
            by_class.entry(p.symbols[0]).or_default().push(pi);
        }
    }
    let mut level = vec![0usize; n];
    for _ in 0..n {
        let mut changed = false;
        for (pi, p) in g.patterns().iter().enumerate() {
            for &s in p.contents() {
                for &q in by_class.get(&s).into_iter().flatten() {
                    if q != pi && level[q] + 1 > level[pi] && level[q] < n {
                        level[pi] = level[q] + 1;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let top = level.iter().max().map_or(0, |m| m + 1);
    for (pi, p) in g.patterns().iter().enumerate() {
        if p.id_prefix_len == 0 {
            level[pi] = top;
        }
    }
    level
}

/// Indices of the moves with the highest `metric`: at least `width` of them
/// when available, plus any that tie with the last one taken.
fn select(moves: &[Move], width: usize, metric: impl Fn(&Move) -> f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..moves.len()).collect();
    order.sort_by(|&a, &b| {
        quantize(metric(&moves[b]))
            .cmp(&quantize(metric(&moves[a])))
            .then(moves[a].parent.cmp(&moves[b].parent))
    });
    // Several moves may materialise to the same alignment, so take extra.
    let want = width.saturating_mul(2);
    let mut out = Vec::new();
    for mi in order {
        if out.len() >= want
            && quantize(metric(&moves[mi]))
                < quantize(metric(&moves[*out.last().expect("non-empty")]))
        {
            break;
        }
        out.push(mi);
    }
    out
}

/// The next beam: the best half of `fresh` in rank order, the rest from the
/// bottom-up lineage by the gap-penalised metric, topped up from the
/// remainder by the same metric. Sorted in rank order; the flag marks the
/// bottom-up lineage.
fn fill_beam(mut fresh: Vec<(State, bool)>, width: usize) -> Vec<(State, bool)> {
    fresh.sort_by(|a, b| a.0.key.cmp(&b.0.key));
    let ranked_part = width.div_ceil(2).min(fresh.len());
    let mut rest = fresh.split_off(ranked_part);
    rest.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(quantize(b.0.guided()).cmp(&quantize(a.0.guided())))
            .then_with(|| a.0.key.cmp(&b.0.key))
    });
    rest.truncate(width - ranked_part);
    fresh.extend(rest);
    fresh.sort_by(|a, b| a.0.key.cmp(&b.0.key));
    fresh
}

#[allow(clippy::too_many_arguments)]
fn expand(
    state: &State,
    si: usize,
    seeding: bool,
    g: &Grammar,
    cfg: &SearchConfig,
    index: &SymbolIndex,
    levels: &[usize],
    moves: &mut Vec<Move>,
) {
    let a = &state.alignment;
    if a.instances.len() >= cfg.max_instances {
        return;
    }
    let proj = Projection::of(a, g);
    let yields = Yields::of(a, g);
    let room_for_two = a.instances.len() + 2 <= cfg.max_instances;
    let candidates: Vec<usize> = if seeding {
        (0..g.len()).collect()
    } else {
        index.promising(&proj)
    };
    for pi in candidates {
        let p = g.pattern(pi);
        let mut valley_level: Option<i64> = None;
        let mut essentials: HashSet<Vec<(usize, usize)>> = HashSet::new();
        for sh in pairwise_align(&proj, pi, g, cfg.pairwise_k) {
            // Hit sets that differ only in cost-neutral hits are one move:
            // the first (longest) stands for the rest.
            let essential: Vec<(usize, usize)> = sh
                .hits
                .iter()
                .copied()
                .filter(|&(pos, j)| proj.entries[pos].gain(p.is_id(j), g) > 0.0 || p.is_id(j))
                .collect();
            if !essentials.insert(essential) {
                continue;
            }
            let cd = state.score.cd + sh.delta;
            if seeding || sh.delta > EPS {
                let gaps = state.gaps + yields.gap_of(p, &sh.hits);
                let origin = moves.len();
                moves.push(Move {
                    parent: si,
                    level: levels[pi],
                    cd,
                    gaps,
                    steps: vec![(pi, sh.hits)],
                    origin,
                });
            } else if room_for_two
                && pays_once_coded(p, &sh, g)
                && *valley_level.get_or_insert(quantize(sh.delta)) == quantize(sh.delta)
            {
                // Only the best non-improving hit sets of each pattern (all
                // tied) get a second step.
                valley(state, si, pi, levels, sh, g, cfg, index, moves);
            }
        }
    }
}

/// Whether a hit set would raise `CD` if its unhit ID-symbols were matched.
fn pays_once_coded(p: &Pattern, sh: &ScoredHits, g: &Grammar) -> bool {
    let open: f64 = (0..p.id_prefix_len)
        .filter(|j| !sh.hits.iter().any(|h| h.1 == *j))
        .map(|j| g.cost(p.symbols[j]))
        .sum();
    sh.delta + open > EPS
}

/// Tries to rescue a non-improving merge by immediately matching one of the
/// new instance's unmatched ID-symbols with a second pattern.
#[allow(clippy::too_many_arguments)]
fn valley(
    state: &State,
    si: usize,
    pi: usize,
    levels: &[usize],
    first: ScoredHits,
    g: &Grammar,
    cfg: &SearchConfig,
    index: &SymbolIndex,
    moves: &mut Vec<Move>,
) {
    let mid = merge(&state.alignment, pi, &first.hits, g).expect("hits come from pairwise_align");
    let new_row = Row::Instance(mid.instances.len() - 1);
    let p = g.pattern(pi);
    let level = levels[pi];
    let open: Vec<usize> = mid
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_hit() && c.cells[0].row == new_row && p.is_id(c.cells[0].index))
        .map(|(ci, _)| ci)
        .collect();
    if open.is_empty() {
        return;
    }
    let mut candidates: Vec<usize> = open
        .iter()
        .flat_map(|&ci| {
            index
                .content
                .get(&mid.columns[ci].symbol)
                .into_iter()
                .flatten()
                .copied()
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let proj = Projection::of(&mid, g);
    let yields = Yields::of(&mid, g);
    let first_gap = yields.sets.last().map_or(0, |s| set_gap(s));
    for qi in candidates {
        for sh in pairwise_align(&proj, qi, g, cfg.pairwise_k) {
            let total = first.delta + sh.delta;
            if total > EPS && sh.hits.iter().any(|(pos, _)| open.contains(pos)) {
                let gaps = state.gaps + first_gap + yields.gap_of(g.pattern(qi), &sh.hits);
                let origin = moves.len();
                moves.push(Move {
                    parent: si,
                    level: level.max(levels[qi]),
                    cd: state.score.cd + total,
                    gaps,
                    steps: vec![(pi, first.hits.clone()), (qi, sh.hits)],
                    origin,
                });
            }
        }
    }
}
