use crate::symbol::SymbolId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    New,
    Old,
}

/// A one-dimensional pattern: an ordered, non-empty run of symbols.
///
/// The first `id_prefix_len` symbols are ID-symbols (class plus
/// discriminator, e.g. `N n3`). They act as the code for the pattern; the
/// rest are its contents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub name: String,
    pub symbols: Vec<SymbolId>,
    pub frequency: u64,
    pub id_prefix_len: usize,
    pub status: Status,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_id(&self, index: usize) -> bool {
        index < self.id_prefix_len
    }

    pub fn id_symbols(&self) -> &[SymbolId] {
        &self.symbols[..self.id_prefix_len]
    }

    pub fn contents(&self) -> &[SymbolId] {
        &self.symbols[self.id_prefix_len..]
    }
}

/// An unvalidated pattern record as it appears in a grammar file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPattern {
    pub id: String,
    pub frequency: u64,
    pub id_prefix_len: usize,
    pub symbols: Vec<String>,
}

impl RawPattern {
    pub fn new(id: impl Into<String>, frequency: u64, id_prefix_len: usize, symbols: &str) -> Self {
        RawPattern {
            id: id.into(),
            frequency,
            id_prefix_len,
            symbols: symbols.split_whitespace().map(str::to_string).collect(),
        }
    }
}
