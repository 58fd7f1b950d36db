//! Multiple alignments: one New pattern plus Old-pattern instances laid out in
//! ordered columns of identical symbols.

use std::fmt;

use crate::grammar::{Grammar, NewPattern};
use crate::pattern::Pattern;
use crate::symbol::SymbolId;

/// A row of the alignment: the New pattern, or an instance by position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Row {
    New,
    Instance(usize),
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Row::New => write!(f, "new"),
            Row::Instance(i) => write!(f, "instance {i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: Row,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Column {
    pub symbol: SymbolId,
    /// Sorted by row.
    pub cells: Vec<Cell>,
}

impl Column {
    pub fn is_hit(&self) -> bool {
        self.cells.len() >= 2
    }

    pub fn cell(&self, row: Row) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row)
    }
}

/// An instance of an Old pattern; `pattern` indexes into the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub pattern: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alignment {
    pub new: NewPattern,
    pub instances: Vec<Instance>,
    pub columns: Vec<Column>,
}

impl Alignment {
    /// The New pattern alone, one column per symbol.
    pub fn bare(new: NewPattern) -> Self {
        let columns = new
            .pattern
            .symbols
            .iter()
            .enumerate()
            .map(|(i, &s)| Column {
                symbol: s,
                cells: vec![Cell {
                    row: Row::New,
                    index: i,
                }],
            })
            .collect();
        Alignment {
            new,
            instances: Vec::new(),
            columns,
        }
    }

    pub fn row_pattern<'a>(&'a self, row: Row, g: &'a Grammar) -> &'a Pattern {
        match row {
            Row::New => &self.new.pattern,
            Row::Instance(i) => g.pattern(self.instances[i].pattern),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> {
        std::iter::once(Row::New).chain((0..self.instances.len()).map(Row::Instance))
    }

    pub fn hit_count(&self) -> usize {
        self.columns.iter().filter(|c| c.is_hit()).count()
    }

    /// Name of a symbol in this alignment, falling back to the New pattern's
    /// own words for symbols the grammar does not know.
    pub fn symbol_name<'a>(&'a self, s: SymbolId, g: &'a Grammar) -> &'a str {
        if let Some(n) = g.symbol_name(s) {
            return n;
        }
        let pos = self.new.pattern.symbols.iter().position(|&x| x == s);
        pos.map_or("?", |p| self.new.words[p].as_str())
    }

    /// Pattern names of all instances, sorted.
    pub fn sorted_pattern_names(&self, g: &Grammar) -> Vec<String> {
        let mut v: Vec<String> = self
            .instances
            .iter()
            .map(|i| g.pattern(i.pattern).name.clone())
            .collect();
        v.sort();
        v
    }

    /// Whether every instance is linked to the New pattern through a chain of
    /// hit columns, as in any alignment built by successive merges.
    pub fn is_connected(&self) -> bool {
        let slot = |r: Row| match r {
            Row::New => 0,
            Row::Instance(i) => i + 1,
        };
        let mut parent: Vec<usize> = (0..=self.instances.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for col in &self.columns {
            for w in col.cells.windows(2) {
                let (a, b) = (
                    find(&mut parent, slot(w[0].row)),
                    find(&mut parent, slot(w[1].row)),
                );
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..parent.len()).all(|r| find(&mut parent, r) == root)
    }

    /// Layout- and numbering-independent description of the hit structure:
    /// the sorted multiset of hit columns, each as sorted
    /// `(pattern index or New, symbol index)` cells. Pattern index `usize::MAX`
    /// stands for the New row.
    pub fn hit_signature(&self) -> Vec<Vec<(usize, usize)>> {
        let mut cols: Vec<Vec<(usize, usize)>> = self
            .columns
            .iter()
            .filter(|c| c.is_hit())
            .map(|c| {
                let mut v: Vec<(usize, usize)> = c
                    .cells
                    .iter()
                    .map(|cell| match cell.row {
                        Row::New => (usize::MAX, cell.index),
                        Row::Instance(i) => (self.instances[i].pattern, cell.index),
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        cols.sort_unstable();
        cols
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownPattern,
    EmptyColumn,
    RepeatedRow,
    SymbolMismatch,
    IndexOutOfRange,
    OrderPreservation,
    Coverage,
    FreeFloating,
    NotNewPattern,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::UnknownPattern => "unknown pattern",
            ViolationKind::EmptyColumn => "empty column",
            ViolationKind::RepeatedRow => "one cell per row",
            ViolationKind::SymbolMismatch => "identical symbols",
            ViolationKind::IndexOutOfRange => "symbol index in range",
            ViolationKind::OrderPreservation => "order preservation",
            ViolationKind::Coverage => "coverage",
            ViolationKind::FreeFloating => "no free-floating instances",
            ViolationKind::NotNewPattern => "new pattern status",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub column: Option<usize>,
    pub row: Option<Row>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let Some(c) = self.column {
            write!(f, " (column {c}")?;
            if let Some(r) = self.row {
                write!(f, ", {r}")?;
            }
            write!(f, ")")?;
        } else if let Some(r) = self.row {
            write!(f, " ({r})")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violation {}

fn violation(
    kind: ViolationKind,
    column: Option<usize>,
    row: Option<Row>,
) -> Result<(), Violation> {
    Err(Violation { kind, column, row })
}

/// Checks every structural invariant of `a`; reports the first one broken.
pub fn validate_alignment(a: &Alignment, g: &Grammar) -> Result<(), Violation> {
    use ViolationKind::*;
    if a.new.pattern.status != crate::pattern::Status::New {
        return violation(NotNewPattern, None, Some(Row::New));
    }
    for (i, inst) in a.instances.iter().enumerate() {
        if inst.pattern >= g.len() {
            return violation(UnknownPattern, None, Some(Row::Instance(i)));
        }
    }
    let nrows = a.instances.len() + 1;
    let row_slot = |r: Row| match r {
        Row::New => 0,
        Row::Instance(i) => i + 1,
    };
    // Last symbol index seen per row, for the order check.
    let mut last: Vec<Option<usize>> = vec![None; nrows];
    let mut seen: Vec<Vec<bool>> = a
        .rows()
        .map(|r| vec![false; a.row_pattern(r, g).len()])
        .collect();
    let mut hit_rows = vec![false; nrows];
    for (ci, col) in a.columns.iter().enumerate() {
        if col.cells.is_empty() {
            return violation(EmptyColumn, Some(ci), None);
        }
        for (k, cell) in col.cells.iter().enumerate() {
            if let Row::Instance(i) = cell.row {
                if i >= a.instances.len() {
                    return violation(UnknownPattern, Some(ci), Some(cell.row));
                }
            }
            if col.cells[..k].iter().any(|c| c.row == cell.row) {
                return violation(RepeatedRow, Some(ci), Some(cell.row));
            }
            let p = a.row_pattern(cell.row, g);
            if cell.index >= p.len() {
                return violation(IndexOutOfRange, Some(ci), Some(cell.row));
            }
            if p.symbols[cell.index] != col.symbol {
                return violation(SymbolMismatch, Some(ci), Some(cell.row));
            }
            let slot = row_slot(cell.row);
            if let Some(prev) = last[slot] {
                if cell.index <= prev {
                    return violation(OrderPreservation, Some(ci), Some(cell.row));
                }
            }
            last[slot] = Some(cell.index);
            seen[slot][cell.index] = true;
            if col.is_hit() {
                hit_rows[slot] = true;
            }
        }
    }
    for (slot, row) in a.rows().enumerate() {
        if seen[slot].iter().any(|s| !s) {
            return violation(Coverage, None, Some(row));
        }
        if slot > 0 && !hit_rows[slot] {
            return violation(FreeFloating, None, Some(row));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::build_grammar;
    use crate::pattern::RawPattern;

    fn grammar() -> Grammar {
        build_grammar(&[RawPattern::new("ab", 1, 0, "a b")]).unwrap()
    }

    #[test]
    fn bare_alignment_is_valid() {
        let g = grammar();
        let a = Alignment::bare(g.new_pattern(&["a", "b", "c"]));
        assert_eq!(validate_alignment(&a, &g), Ok(()));
    }

    #[test]
    fn crossing_hits_violate_order() {
        let g = grammar();
        let new = g.new_pattern(&["b", "a"]);
        let (a_sym, b_sym) = (
            g.table().lookup("a").unwrap(),
            g.table().lookup("b").unwrap(),
        );
        let inst = Row::Instance(0);
        let a = Alignment {
            new,
            instances: vec![Instance { pattern: 0 }],
            columns: vec![
                Column {
                    symbol: b_sym,
                    cells: vec![
                        Cell {
                            row: Row::New,
                            index: 0,
                        },
                        Cell {
                            row: inst,
                            index: 1,
                        },
                    ],
                },
                Column {
                    symbol: a_sym,
                    cells: vec![
                        Cell {
                            row: Row::New,
                            index: 1,
                        },
                        Cell {
                            row: inst,
                            index: 0,
                        },
                    ],
                },
            ],
        };
        let v = validate_alignment(&a, &g).unwrap_err();
        assert_eq!(v.kind, ViolationKind::OrderPreservation);
        assert_eq!(v.column, Some(1));
        assert!(v.to_string().starts_with("order preservation"));
    }

    #[test]
    fn free_floating_instance_rejected() {
        let g = grammar();
        let new = g.new_pattern(&["c"]);
        let inst = Row::Instance(0);
        let (a_sym, b_sym) = (
            g.table().lookup("a").unwrap(),
            g.table().lookup("b").unwrap(),
        );
        let mut a = Alignment::bare(new);
        a.instances.push(Instance { pattern: 0 });
        a.columns.push(Column {
            symbol: a_sym,
            cells: vec![Cell {
                row: inst,
                index: 0,
            }],
        });
        a.columns.push(Column {
            symbol: b_sym,
            cells: vec![Cell {
                row: inst,
                index: 1,
            }],
        });
        assert_eq!(
            validate_alignment(&a, &g).unwrap_err().kind,
            ViolationKind::FreeFloating
        );
    }

    #[test]
    fn instances_hitting_only_each_other_are_valid_but_not_connected() {
        let g = grammar();
        let (a_sym, b_sym) = (
            g.table().lookup("a").unwrap(),
            g.table().lookup("b").unwrap(),
        );
        let (i0, i1) = (Row::Instance(0), Row::Instance(1));
        let mut a = Alignment::bare(g.new_pattern(&["c"]));
        a.instances = vec![Instance { pattern: 0 }, Instance { pattern: 0 }];
        a.columns.push(Column {
            symbol: a_sym,
            cells: vec![Cell { row: i0, index: 0 }, Cell { row: i1, index: 0 }],
        });
        a.columns.push(Column {
            symbol: b_sym,
            cells: vec![Cell { row: i0, index: 1 }, Cell { row: i1, index: 1 }],
        });
        assert_eq!(validate_alignment(&a, &g), Ok(()));
        assert!(!a.is_connected());
        assert!(Alignment::bare(g.new_pattern(&["c"])).is_connected());
    }

    #[test]
    fn mismatched_symbol_and_missing_cells_rejected() {
        let g = grammar();
        let new = g.new_pattern(&["a", "b"]);
        let mut a = Alignment::bare(new.clone());
        a.columns[0].symbol = g.table().lookup("b").unwrap();
        assert_eq!(
            validate_alignment(&a, &g).unwrap_err().kind,
            ViolationKind::SymbolMismatch
        );
        let mut a = Alignment::bare(new);
        a.columns.pop();
        assert_eq!(
            validate_alignment(&a, &g).unwrap_err().kind,
            ViolationKind::Coverage
        );
    }
}
