//! Interned symbols and their frequency-derived bit costs.

use std::collections::HashMap;
use std::fmt;

/// Dense handle for an interned symbol.
///
/// Ids below [`SymbolTable::len`] name grammar symbols. Ids at or above it are
/// reserved for words of a New pattern that the grammar has never seen; each
/// such word gets its own id so that distinct strings never share one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    frequency: u64,
    cost: f64,
}

/// Symbol strings with their weighted occurrence counts over the Old patterns.
///
/// `cost(s) = -log2(freq(s) / F)` where `F` is the sum of all frequencies.
/// Symbols outside the table cost `log2(F + 1)`.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    entries: Vec<Entry>,
    index: HashMap<String, SymbolId>,
    total: u64,
}

impl SymbolTable {
    pub(crate) fn intern(&mut self, name: &str) -> SymbolId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = SymbolId(self.entries.len() as u32);
        self.entries.push(Entry {
            name: name.to_string(),
            frequency: 0,
            cost: 0.0,
        });
        self.index.insert(name.to_string(), id);
        id
    }

    pub(crate) fn add_occurrences(&mut self, id: SymbolId, count: u64) {
        self.entries[id.index()].frequency += count;
        self.total += count;
    }

    pub(crate) fn finish(&mut self) {
        let total = self.total as f64;
        for e in &mut self.entries {
            e.cost = if e.frequency == 0 {
                0.0
            } else {
                (total / e.frequency as f64).log2()
            };
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    /// `None` for ids that belong to unseen New-pattern words.
    pub fn name(&self, id: SymbolId) -> Option<&str> {
        self.entries.get(id.index()).map(|e| e.name.as_str())
    }

    pub fn frequency(&self, id: SymbolId) -> u64 {
        self.entries.get(id.index()).map_or(0, |e| e.frequency)
    }

    pub fn total_frequency(&self) -> u64 {
        self.total
    }

    pub fn is_known(&self, id: SymbolId) -> bool {
        id.index() < self.entries.len()
    }

    pub fn cost(&self, id: SymbolId) -> f64 {
        match self.entries.get(id.index()) {
            Some(e) => e.cost,
            None => self.unknown_cost(),
        }
    }

    pub fn unknown_cost(&self) -> f64 {
        ((self.total + 1) as f64).log2()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &str, u64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (SymbolId(i as u32), e.name.as_str(), e.frequency))
    }
}
