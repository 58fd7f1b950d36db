//! Multiple alignment of symbol patterns scored by compression, and pronoun
//! resolution for Winograd schemas built on top of it.

pub mod alignment;
pub mod corpus;
pub mod grammar;
pub mod io;
pub mod pattern;
pub mod score;
pub mod search;
pub mod symbol;
pub mod ws;

pub use alignment::{
    validate_alignment, Alignment, Cell, Column, Instance, Row, Violation, ViolationKind,
};
pub use corpus::{
    corpus_manifest, load_corpus, oracle_enumerate, ManifestEntry, OracleError, OracleResult,
};
pub use grammar::{build_grammar, Grammar, GrammarError, NewPattern};
pub use io::{
    overlay, parse_alignment, parse_grammar, render_alignment, serialize_alignment,
    serialize_grammar,
};
pub use pattern::{Pattern, RawPattern, Status};
pub use score::{
    column_costs, delta_cd, quantize, relative_probabilities, score, Score, ScoreError,
};
pub use search::{
    merge, pairwise_align, search, HitSet, MergeError, Projection, Scored, SearchConfig,
};
pub use symbol::{SymbolId, SymbolTable};
pub use ws::{
    resolve, resolve_with_fallback, resolve_with_inheritance, schema_pair_report, ChainKind,
    PairReport, Resolution, WsError, WsQuery,
};
