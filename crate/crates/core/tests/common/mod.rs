#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spalign::io::parse_alignment;
use spalign::{build_grammar, load_corpus, Alignment, Grammar, RawPattern, SearchConfig};

pub const FIGURE_SENTENCE: &str = "f o r t u n e f a v o u r s t h e b r a v e";
pub const FIGURE_RENDER: &str = include_str!("../golden/fortune_brave.txt");
pub const FIGURE_ALIGNMENT: &str = include_str!("../golden/fortune_brave.aln");

pub fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

pub fn fortune() -> Grammar {
    load_corpus(&["fortune_brave.spg"]).unwrap()
}

pub fn figure(g: &Grammar) -> Alignment {
    parse_alignment(FIGURE_ALIGNMENT, g).unwrap()
}

/// Search settings matching the oracle's instance bound.
pub fn bounded_config() -> SearchConfig {
    SearchConfig {
        max_instances: 3,
        ..SearchConfig::default()
    }
}

/// A random problem inside the oracle's bounds, shaped like a grammar: up to
/// five patterns of up to six symbols, each led by a class code and an
/// optional discriminator, with distinct content symbols that may include
/// other patterns' class codes, and a New pattern of up to eight words.
pub fn random_problem(seed: u64) -> (Grammar, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let content = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let classes = ["X", "Y", "Z"];
    let n_patterns = rng.gen_range(1..=5);
    let mut recs = Vec::new();
    for p in 0..n_patterns {
        let prefix = rng.gen_range(0..=2);
        let len = rng.gen_range(prefix + 1..=6);
        let mut syms: Vec<String> = Vec::with_capacity(len);
        if prefix >= 1 {
            syms.push(classes.choose(&mut rng).unwrap().to_string());
        }
        if prefix == 2 {
            syms.push(format!("p{p}"));
        }
        let mut pool: Vec<&str> = content.to_vec();
        pool.shuffle(&mut rng);
        while syms.len() < len {
            if rng.gen_bool(0.2) {
                syms.push(classes.choose(&mut rng).unwrap().to_string());
            } else {
                syms.push(pool.pop().unwrap().to_string());
            }
        }
        recs.push(RawPattern::new(
            format!("P{p}"),
            rng.gen_range(1..=5),
            prefix,
            &syms.join(" "),
        ));
    }
    let new_len = rng.gen_range(1..=8);
    let new = (0..new_len)
        .map(|_| content.choose(&mut rng).unwrap().to_string())
        .collect();
    (build_grammar(&recs).unwrap(), new)
}

fn grammar(lines: &[(&str, u64, usize, &str)]) -> Grammar {
    build_grammar(
        &lines
            .iter()
            .map(|&(id, f, k, s)| RawPattern::new(id, f, k, s))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Hand-built problems at the corners of the oracle's bounds.
pub fn edge_cases() -> Vec<(&'static str, Grammar, Vec<&'static str>)> {
    vec![
        ("single symbol", grammar(&[("X1", 1, 1, "X1 a")]), vec!["a"]),
        ("empty grammar", grammar(&[]), vec!["a", "b"]),
        (
            "no shared symbols",
            grammar(&[("P", 3, 1, "P x y")]),
            vec!["a", "b", "c"],
        ),
        (
            "repeated subsequence",
            grammar(&[("Q", 1, 0, "q a b a r")]),
            vec!["a", "b", "a"],
        ),
        (
            "word repeated in New",
            grammar(&[("D", 2, 1, "D the"), ("N", 1, 1, "N cat")]),
            vec!["the", "cat", "the"],
        ),
        (
            "crossing order",
            grammar(&[("P", 1, 0, "b a")]),
            vec!["a", "b"],
        ),
        (
            "two-level hierarchy",
            grammar(&[
                ("N", 2, 2, "N n1 a b #N"),
                ("S", 1, 1, "S N #N c #S"),
                ("M", 1, 2, "N n2 c #N"),
            ]),
            vec!["a", "b", "c"],
        ),
        (
            "code matched by content",
            grammar(&[
                ("X", 1, 1, "X a"),
                ("Y", 1, 1, "Y X b"),
                ("Z", 4, 1, "Z a b"),
            ]),
            vec!["a", "b"],
        ),
        (
            "full bounds",
            grammar(&[
                ("A", 1, 2, "A a1 a b c d"),
                ("B", 2, 2, "B b1 e f g h"),
                ("C", 3, 1, "C A B d e"),
                ("D", 1, 0, "a c e g h b"),
                ("E", 5, 1, "E h g f e d"),
            ]),
            vec!["a", "b", "c", "d", "e", "f", "g", "h"],
        ),
        (
            "identical pattern",
            grammar(&[("W", 1, 0, "w x y z")]),
            vec!["w", "x", "y", "z"],
        ),
    ]
}
