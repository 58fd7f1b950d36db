//! Pronoun resolution for Winograd-schema sentences: parse the sentence, then
//! follow a bridge pattern from the pronoun's slot to the noun it designates.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::alignment::{Alignment, Row};
use crate::grammar::Grammar;
use crate::score::{relative_probabilities, score_unchecked, Score};
use crate::search::{merge, pairwise_align, search, ConfigError, Projection, Scored, SearchConfig};
use crate::symbol::SymbolId;

/// Class symbol of lexical noun patterns.
pub const NOUN_CLASS: &str = "N";
/// Most class links an inheritance chain may traverse.
pub const MAX_CHAIN_DEPTH: usize = 4;
/// Alignments consulted when computing confidence.
pub const CONFIDENCE_ALTERNATIVES: usize = 10;

const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WsError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("pronoun `{0}` does not occur in the sentence")]
    PronounNotInSentence(String),
    #[error("the two sentences are identical")]
    IdenticalSentences,
    #[error("the two queries use different grammars")]
    DifferentGrammars,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(#[from] ConfigError),
    #[error("NoPronounInstance: the pronoun is not matched in the best alignment")]
    NoPronounInstance,
    #[error("NoBridge: no pattern links the pronoun to a referent")]
    NoBridge,
    #[error("AmbiguousBridge: bridges designate {0:?}")]
    AmbiguousBridge(Vec<String>),
}

impl WsError {
    /// Short variant name, as printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            WsError::EmptySentence => "EmptySentence",
            WsError::PronounNotInSentence(_) => "PronounNotInSentence",
            WsError::IdenticalSentences => "IdenticalSentences",
            WsError::DifferentGrammars => "DifferentGrammars",
            WsError::InvalidConfig(_) => "InvalidConfig",
            WsError::NoPronounInstance => "NoPronounInstance",
            WsError::NoBridge => "NoBridge",
            WsError::AmbiguousBridge(_) => "AmbiguousBridge",
        }
    }
}

/// A sentence, the pronoun to resolve and the grammar to resolve it with.
#[derive(Clone, Debug)]
pub struct WsQuery<'g> {
    pub grammar: &'g Grammar,
    pub sentence: Vec<String>,
    pub pronoun: String,
}

impl<'g> WsQuery<'g> {
    pub fn new(grammar: &'g Grammar, sentence: &[&str], pronoun: &str) -> Result<Self, WsError> {
        if sentence.is_empty() {
            return Err(WsError::EmptySentence);
        }
        if !sentence.contains(&pronoun) {
            return Err(WsError::PronounNotInSentence(pronoun.to_string()));
        }
        Ok(WsQuery {
            grammar,
            sentence: sentence.iter().map(|w| w.to_string()).collect(),
            pronoun: pronoun.to_string(),
        })
    }
}

/// How the bridge reaches the referent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainKind {
    /// A symbol of the bridge aligned into the referent's pattern, possibly
    /// through class patterns.
    Attribute,
    /// A `X #X` pair of the bridge aligned with a clause pattern's role slot
    /// that spans the referent.
    RoleSlot,
}

#[derive(Clone, Debug)]
pub struct Resolution {
    pub referent_word: String,
    pub referent_pattern_id: String,
    pub bridge_pattern_id: String,
    pub attribute_symbol: SymbolId,
    pub attribute_name: String,
    pub kind: ChainKind,
    /// Pattern ids from the referent's pattern to the pattern holding the
    /// attribute; a single entry when the link is direct.
    pub chain: Vec<String>,
    pub best_alignment: Alignment,
    pub score: Score,
    pub confidence: f64,
}

#[derive(Clone, Debug)]
pub struct PairReport {
    pub first: Resolution,
    pub second: Resolution,
    pub flipped: bool,
}

/// Resolves with direct attribute links only.
pub fn resolve(q: &WsQuery, cfg: &SearchConfig) -> Result<Resolution, WsError> {
    resolve_at_depth(q, cfg, 0)
}

/// Resolves allowing attribute links through up to `MAX_CHAIN_DEPTH` class
/// patterns.
pub fn resolve_with_inheritance(q: &WsQuery, cfg: &SearchConfig) -> Result<Resolution, WsError> {
    resolve_at_depth(q, cfg, MAX_CHAIN_DEPTH)
}

/// Resolves through direct links, falling back to links through class
/// patterns when there are none.
pub fn resolve_with_fallback(q: &WsQuery, cfg: &SearchConfig) -> Result<Resolution, WsError> {
    match resolve(q, cfg) {
        Err(WsError::NoBridge) => resolve_with_inheritance(q, cfg),
        r => r,
    }
}

/// Resolves both sentences of a schema pair.
pub fn schema_pair_report(
    a: &WsQuery,
    b: &WsQuery,
    cfg: &SearchConfig,
) -> Result<PairReport, WsError> {
    if !std::ptr::eq(a.grammar, b.grammar) {
        return Err(WsError::DifferentGrammars);
    }
    if a.sentence == b.sentence {
        return Err(WsError::IdenticalSentences);
    }
    let first = resolve(a, cfg)?;
    let second = resolve(b, cfg)?;
    let flipped = first.referent_word != second.referent_word;
    Ok(PairReport {
        first,
        second,
        flipped,
    })
}

fn resolve_at_depth(q: &WsQuery, cfg: &SearchConfig, depth: usize) -> Result<Resolution, WsError> {
    cfg.validate()?;
    let g = q.grammar;
    let words: Vec<&str> = q.sentence.iter().map(String::as_str).collect();
    let results = search(&g.new_pattern(&words), g, cfg);
    let best = &results[0];
    let completed = complete(&best.alignment, g, cfg, depth > 0);
    let link = find_link(&completed, g, &q.pronoun, depth)?;
    let confidence = confidence(&results, &link.referent_word, g, cfg, &q.pronoun, depth);
    let score = score_unchecked(&completed, g);
    Ok(Resolution {
        referent_word: link.referent_word,
        referent_pattern_id: link.referent_pattern_id,
        bridge_pattern_id: link.bridge_pattern_id,
        attribute_symbol: link.attribute_symbol,
        attribute_name: g
            .symbol_name(link.attribute_symbol)
            .unwrap_or("?")
            .to_string(),
        kind: link.kind,
        chain: link.chain,
        best_alignment: completed,
        score,
        confidence,
    })
}

/// Relative probability of the best alignment against the top alternatives
/// whose bridges designate a different referent.
fn confidence(
    results: &[Scored],
    referent: &str,
    g: &Grammar,
    cfg: &SearchConfig,
    pronoun: &str,
    depth: usize,
) -> f64 {
    let mut scores = vec![results[0].score];
    for alt in results.iter().skip(1).take(CONFIDENCE_ALTERNATIVES - 1) {
        let completed = complete(&alt.alignment, g, cfg, depth > 0);
        if let Ok(link) = find_link(&completed, g, pronoun, depth) {
            if link.referent_word != referent {
                scores.push(alt.score);
            }
        }
    }
    relative_probabilities(&scores).map_or(1.0, |p| p[0])
}

/// Adds patterns not yet present that align without loss of compression and
/// either match on every symbol or, with `slot_fill`, fill a content slot with
/// their whole code and their closing symbol. Repeats until nothing changes.
pub fn complete(a: &Alignment, g: &Grammar, cfg: &SearchConfig, slot_fill: bool) -> Alignment {
    let mut a = a.clone();
    for _ in 0..g.len() {
        let proj = Projection::of(&a, g);
        let present: BTreeSet<usize> = a.instances.iter().map(|i| i.pattern).collect();
        let found = (0..g.len()).filter(|p| !present.contains(p)).find_map(|p| {
            let pat = g.pattern(p);
            pairwise_align(&proj, p, g, cfg.pairwise_k)
                .into_iter()
                .find(|c| {
                    let full = c.hits.len() == pat.len();
                    let slot = slot_fill && pat.id_prefix_len > 0 && {
                        let js: BTreeSet<usize> = c.hits.iter().map(|&(_, j)| j).collect();
                        (0..pat.id_prefix_len).all(|j| js.contains(&j))
                            && js.contains(&(pat.len() - 1))
                    };
                    c.delta >= -EPS && (full || slot)
                })
                .map(|c| (p, c.hits))
        });
        match found {
            Some((p, hits)) => a = merge(&a, p, &hits, g).expect("pairwise hit sets are legal"),
            None => break,
        }
    }
    a
}

struct Link {
    referent_word: String,
    referent_pattern_id: String,
    bridge_pattern_id: String,
    attribute_symbol: SymbolId,
    kind: ChainKind,
    chain: Vec<String>,
}

struct View<'a> {
    a: &'a Alignment,
    g: &'a Grammar,
    /// Column indices per row, in symbol order.
    cols: Vec<Vec<usize>>,
    /// Whether each instance hits a New symbol.
    lexical: Vec<bool>,
    category: BTreeSet<SymbolId>,
}

impl<'a> View<'a> {
    fn new(a: &'a Alignment, g: &'a Grammar) -> Self {
        let n = a.instances.len();
        let mut cols = vec![Vec::new(); n];
        let mut lexical = vec![false; n];
        for (c, col) in a.columns.iter().enumerate() {
            let has_new = col.cell(Row::New).is_some();
            for cell in &col.cells {
                if let Row::Instance(i) = cell.row {
                    cols[i].push(c);
                    lexical[i] |= has_new;
                }
            }
        }
        let mut category = BTreeSet::new();
        for p in g.patterns() {
            category.extend(p.id_symbols().iter().copied());
            for &s in &p.symbols {
                if g.symbol_name(s).is_some_and(|n| n.starts_with('#')) {
                    category.insert(s);
                }
            }
        }
        View {
            a,
            g,
            cols,
            lexical,
            category,
        }
    }

    fn pattern_of(&self, i: usize) -> &crate::pattern::Pattern {
        self.g.pattern(self.a.instances[i].pattern)
    }

    fn is_noun(&self, i: usize) -> bool {
        self.lexical[i]
            && self
                .pattern_of(i)
                .symbols
                .first()
                .is_some_and(|&s| self.g.symbol_name(s) == Some(NOUN_CLASS))
    }

    /// First New word matched by instance `i`.
    fn surface(&self, i: usize) -> Option<String> {
        self.cols[i].iter().find_map(|&c| {
            self.a.columns[c]
                .cell(Row::New)
                .map(|cell| self.a.new.words[cell.index].clone())
        })
    }

    /// Instances with a non-ID cell in column `c`, other than `skip`.
    fn content_cells(&self, c: usize, skip: usize) -> impl Iterator<Item = usize> + '_ {
        self.a.columns[c]
            .cells
            .iter()
            .filter_map(move |cell| match cell.row {
                Row::Instance(i) if i != skip && !self.pattern_of(i).is_id(cell.index) => Some(i),
                _ => None,
            })
    }

    /// Nouns reached from an attribute cell of `from` in column `c`, with the
    /// class patterns traversed on the way.
    fn nouns_from(
        &self,
        c: usize,
        from: usize,
        depth: usize,
        trail: &mut Vec<usize>,
        out: &mut Vec<(usize, Vec<usize>)>,
    ) {
        for r in self.content_cells(c, from).collect::<Vec<_>>() {
            if trail.contains(&r) {
                continue;
            }
            if self.is_noun(r) {
                let mut chain = vec![r];
                chain.extend(trail.iter().rev());
                out.push((r, chain));
            } else if trail.len() < depth && !self.lexical[r] {
                trail.push(r);
                let id_cols: Vec<usize> = self.cols[r]
                    .iter()
                    .copied()
                    .take(self.pattern_of(r).id_prefix_len)
                    .collect();
                for col in id_cols {
                    self.nouns_from(col, r, depth, trail, out);
                }
                trail.pop();
            }
        }
    }
}

fn find_link(a: &Alignment, g: &Grammar, pronoun: &str, depth: usize) -> Result<Link, WsError> {
    let v = View::new(a, g);
    let pron_cols: BTreeSet<usize> = a
        .columns
        .iter()
        .enumerate()
        .filter(|(_, col)| {
            col.cell(Row::New)
                .is_some_and(|cell| a.new.words[cell.index] == pronoun)
        })
        .map(|(c, _)| c)
        .collect();
    let l = (0..a.instances.len())
        .find(|&i| v.cols[i].iter().any(|c| pron_cols.contains(c)))
        .ok_or(WsError::NoPronounInstance)?;
    let l_cols: BTreeSet<usize> = v.cols[l].iter().copied().collect();

    let mut links = Vec::new();
    for b in 0..a.instances.len() {
        // Only fully matched bridges count: a partly matched one asserts
        // nothing about the sentence.
        if b == l || v.lexical[b] || v.cols[b].iter().any(|&c| !a.columns[c].is_hit()) {
            continue;
        }
        let Some(&first) = v.cols[b].iter().find(|c| l_cols.contains(c)) else {
            continue;
        };
        let bp = v.pattern_of(b);
        let before: Vec<(usize, usize)> = v.cols[b]
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c < first)
            .map(|(j, &c)| (j, c))
            .collect();
        let mut found = None;
        for &(j, c) in &before {
            let s = bp.symbols[j];
            if bp.is_id(j) || v.category.contains(&s) {
                continue;
            }
            let mut out = Vec::new();
            v.nouns_from(c, b, depth, &mut Vec::new(), &mut out);
            if let Some((r, chain)) = out.into_iter().next() {
                found = Some((r, s, ChainKind::Attribute, chain));
                break;
            }
        }
        if found.is_none() {
            found = role_slot(&v, b, &before);
        }
        if let Some((r, s, kind, chain)) = found {
            links.push(Link {
                referent_word: v.surface(r).unwrap_or_default(),
                referent_pattern_id: v.pattern_of(r).name.clone(),
                bridge_pattern_id: bp.name.clone(),
                attribute_symbol: s,
                kind,
                chain: chain
                    .iter()
                    .map(|&i| v.pattern_of(i).name.clone())
                    .collect(),
            });
        }
    }
    let referents: BTreeSet<&str> = links.iter().map(|l| l.referent_word.as_str()).collect();
    match referents.len() {
        0 => Err(WsError::NoBridge),
        1 => Ok(links.into_iter().next().expect("one referent")),
        _ => Err(WsError::AmbiguousBridge(
            referents.into_iter().map(str::to_string).collect(),
        )),
    }
}

/// A `X #X` pair among the bridge's cells before the pronoun, aligned with a
/// clause pattern's slot; the referent is the last noun inside the slot.
fn role_slot(
    v: &View,
    b: usize,
    before: &[(usize, usize)],
) -> Option<(usize, SymbolId, ChainKind, Vec<usize>)> {
    let bp = v.pattern_of(b);
    for w in before.windows(2) {
        let ((j0, c0), (j1, c1)) = (w[0], w[1]);
        let (x, y) = (bp.symbols[j0], bp.symbols[j1]);
        if v.category.contains(&x) {
            continue;
        }
        let (Some(xn), Some(yn)) = (v.g.symbol_name(x), v.g.symbol_name(y)) else {
            continue;
        };
        if yn.strip_prefix('#') != Some(xn) {
            continue;
        }
        let clause = v
            .content_cells(c0, b)
            .find(|&s| v.content_cells(c1, b).any(|t| t == s));
        if clause.is_none() {
            continue;
        }
        let noun = (c0 + 1..c1).rev().find_map(|c| {
            let col = &v.a.columns[c];
            col.cell(Row::New)?;
            col.cells.iter().find_map(|cell| match cell.row {
                Row::Instance(i) if v.is_noun(i) => Some(i),
                _ => None,
            })
        });
        if let Some(r) = noun {
            return Some((r, x, ChainKind::RoleSlot, vec![r]));
        }
    }
    None
}
