//! The repository of Old patterns and the symbol statistics derived from it.

use std::collections::HashMap;

use thiserror::Error;

use crate::pattern::{Pattern, RawPattern, Status};
use crate::symbol::{SymbolId, SymbolTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("duplicate pattern id `{0}`")]
    DuplicatePatternId(String),
    #[error("pattern `{0}` has no symbols")]
    EmptyPattern(String),
    #[error("pattern `{id}`: id prefix length {prefix} exceeds {len} symbols")]
    BadIdPrefix {
        id: String,
        prefix: usize,
        len: usize,
    },
    #[error("pattern `{0}` has frequency 0")]
    ZeroFrequency(String),
}

/// An immutable set of Old patterns with an interned symbol table.
#[derive(Clone, Debug)]
pub struct Grammar {
    patterns: Vec<Pattern>,
    table: SymbolTable,
    by_name: HashMap<String, usize>,
}

pub fn build_grammar(records: &[RawPattern]) -> Result<Grammar, GrammarError> {
    let mut table = SymbolTable::default();
    let mut patterns = Vec::with_capacity(records.len());
    let mut by_name = HashMap::new();
    for r in records {
        if r.symbols.is_empty() {
            return Err(GrammarError::EmptyPattern(r.id.clone()));
        }
        if r.id_prefix_len > r.symbols.len() {
            return Err(GrammarError::BadIdPrefix {
                id: r.id.clone(),
                prefix: r.id_prefix_len,
                len: r.symbols.len(),
            });
        }
        if r.frequency == 0 {
            return Err(GrammarError::ZeroFrequency(r.id.clone()));
        }
        if by_name.insert(r.id.clone(), patterns.len()).is_some() {
            return Err(GrammarError::DuplicatePatternId(r.id.clone()));
        }
        let symbols: Vec<SymbolId> = r.symbols.iter().map(|s| table.intern(s)).collect();
        for &s in &symbols {
            table.add_occurrences(s, r.frequency);
        }
        patterns.push(Pattern {
            name: r.id.clone(),
            symbols,
            frequency: r.frequency,
            id_prefix_len: r.id_prefix_len,
            status: Status::Old,
        });
    }
    table.finish();
    Ok(Grammar {
        patterns,
        table,
        by_name,
    })
}

impl Grammar {
    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, index: usize) -> &Pattern {
        &self.patterns[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn cost(&self, s: SymbolId) -> f64 {
        self.table.cost(s)
    }

    pub fn symbol_name(&self, s: SymbolId) -> Option<&str> {
        self.table.name(s)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Records that rebuild this grammar exactly.
    pub fn records(&self) -> Vec<RawPattern> {
        self.patterns
            .iter()
            .map(|p| RawPattern {
                id: p.name.clone(),
                frequency: p.frequency,
                id_prefix_len: p.id_prefix_len,
                symbols: p
                    .symbols
                    .iter()
                    .map(|&s| self.table.name(s).unwrap().to_string())
                    .collect(),
            })
            .collect()
    }

    /// Same patterns with every frequency multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Grammar {
        let mut recs = self.records();
        for r in &mut recs {
            r.frequency *= k;
        }
        build_grammar(&recs).expect("scaling preserves validity")
    }

    /// Same grammar minus the named pattern (no-op when absent).
    pub fn without(&self, name: &str) -> Grammar {
        let recs: Vec<_> = self
            .records()
            .into_iter()
            .filter(|r| r.id != name)
            .collect();
        build_grammar(&recs).expect("removal preserves validity")
    }

    /// Builds a New pattern from words. Words the grammar has never seen get
    /// fresh ids past the end of the table.
    pub fn new_pattern(&self, words: &[&str]) -> NewPattern {
        let mut unknown: Vec<&str> = Vec::new();
        let symbols = words
            .iter()
            .map(|w| match self.table.lookup(w) {
                Some(id) => id,
                None => {
                    let k = match unknown.iter().position(|u| u == w) {
                        Some(k) => k,
                        None => {
                            unknown.push(w);
                            unknown.len() - 1
                        }
                    };
                    SymbolId((self.table.len() + k) as u32)
                }
            })
            .collect();
        NewPattern {
            pattern: Pattern {
                name: "NEW".to_string(),
                symbols,
                frequency: 1,
                id_prefix_len: 0,
                status: Status::New,
            },
            words: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    /// Frequencies recomputed from the pattern list, for checking the table.
    pub fn recount(&self) -> HashMap<SymbolId, u64> {
        let mut out = HashMap::new();
        for p in &self.patterns {
            for &s in &p.symbols {
                *out.entry(s).or_insert(0) += p.frequency;
            }
        }
        out
    }
}

/// A New pattern together with its surface words (needed to name symbols the
/// grammar does not know).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NewPattern {
    pub pattern: Pattern,
    pub words: Vec<String>,
}

impl NewPattern {
    pub fn len(&self) -> usize {
        self.pattern.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.symbols.is_empty()
    }
}
