use std::path::PathBuf;
use std::process::{Command, Output};

const FISH_TASTY: &str = "the fish ate the worm it was tasty";
const FISH_HUNGRY: &str = "the fish ate the worm it was hungry";
const FEARED: &str =
    "the city councilmen refused the demonstrators a permit because they feared violence";
const ADVOCATED: &str =
    "the city councilmen refused the demonstrators a permit because they advocated revolution";
const FIGURE_SENTENCE: &str = "f o r t u n e f a v o u r s t h e b r a v e";

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn spalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spalign"))
        .args(args)
        .output()
        .unwrap()
}

fn with_sentence(head: &[&str], sentence: &str) -> Output {
    let mut args = head.to_vec();
    args.extend(sentence.split_whitespace());
    spalign(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes `text` to a file unique to this process and test.
fn scratch(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("spalign-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in `{line}`"))
}

#[test]
fn parse_prints_header_and_render_block() {
    let o = with_sentence(&["--grammar", "fortune_brave", "parse"], FIGURE_SENTENCE);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("== alignment 1 bn="));
    assert!(lines.next().unwrap().trim_start().starts_with('0'));
}

#[test]
fn text_and_records_report_the_same_numbers() {
    let text = stdout(&with_sentence(
        &["--grammar", "fortune_brave", "--top", "3", "parse"],
        FIGURE_SENTENCE,
    ));
    let recs = stdout(&with_sentence(
        &[
            "--grammar",
            "fortune_brave",
            "--top",
            "3",
            "--format",
            "records",
            "parse",
        ],
        FIGURE_SENTENCE,
    ));
    let headers: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("== alignment"))
        .collect();
    let records: Vec<&str> = recs.lines().collect();
    assert_eq!(headers.len(), 3);
    assert_eq!(records.len(), 3);
    for (h, r) in headers.iter().zip(&records) {
        for key in ["bn", "be", "cd", "p"] {
            assert_eq!(field(h, key), field(r, key));
        }
    }
    let p: f64 = records
        .iter()
        .map(|r| field(r, "p").parse::<f64>().unwrap())
        .sum();
    assert!((p - 1.0).abs() < 1e-5);
}

#[test]
fn empty_sentence_is_a_usage_error() {
    let o = spalign(&["--grammar", "fortune_brave", "parse"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn nonsense_sentence_finds_no_compression() {
    let o = spalign(&["--grammar", "councilmen", "parse", "zorp", "blick", "quux"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_flag_and_bad_config_are_usage_errors() {
    assert_eq!(
        spalign(&["--frobnicate", "parse", "a"]).status.code(),
        Some(1)
    );
    assert_eq!(
        spalign(&[
            "--grammar",
            "fortune_brave",
            "--beam",
            "0",
            "parse",
            "t",
            "h",
            "e"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        spalign(&["--grammar", "no_such_grammar", "parse", "a"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn malformed_grammar_file_is_a_syntax_error() {
    let p = scratch("bad.spg", "P1 | 1 | 7 | a b c d e f\n");
    let o = spalign(&["--grammar", p.to_str().unwrap(), "parse", "a"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn case_is_folded_unless_asked_not_to() {
    let folded = spalign(&["--grammar", "fish_worm", "parse", "The", "Worm"]);
    assert_eq!(folded.status.code(), Some(0));
    let kept = spalign(&[
        "--grammar",
        "fish_worm",
        "--no-lowercase",
        "parse",
        "The",
        "Worm",
    ]);
    assert_eq!(kept.status.code(), Some(3));
}

#[test]
fn resolve_feared_violence() {
    let o = with_sentence(
        &[
            "--grammar",
            "councilmen",
            "--format",
            "records",
            "resolve",
            "--pronoun",
            "they",
        ],
        FEARED,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(out.trim(), "referent"), "councilmen");
    assert_eq!(field(out.trim(), "attribute"), "PEACE_LOVING");
}

#[test]
fn resolve_although_sentence() {
    let o = with_sentence(
        &[
            "--grammar",
            "pete_martin",
            "--format",
            "records",
            "resolve",
            "--pronoun",
            "he",
        ],
        "pete envies martin although he is very successful",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(stdout(&o).trim(), "referent"), "pete");
}

#[test]
fn resolve_can_show_the_alignment() {
    let o = with_sentence(
        &[
            "--grammar",
            "fish_worm",
            "resolve",
            "--pronoun",
            "it",
            "--show-alignment",
        ],
        FISH_TASTY,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("referent: worm\n"));
    assert!(out.lines().count() > 7);
}

#[test]
fn pronoun_missing_from_sentence_is_a_usage_error() {
    let o = with_sentence(
        &["--grammar", "fish_worm", "resolve", "--pronoun", "she"],
        FISH_TASTY,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sentence_without_a_bridge_is_a_resolution_failure() {
    let o = spalign(&[
        "--grammar",
        "fish_worm",
        "resolve",
        "--pronoun",
        "it",
        "it",
        "was",
        "tasty",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("NoBridge"), "{}", stderr(&o));
}

#[test]
fn fish_pair_flips() {
    let o = spalign(&[
        "--grammar",
        "fish_worm",
        "--format",
        "records",
        "schema",
        "--pronoun",
        "it",
        FISH_TASTY,
        FISH_HUNGRY,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(out.trim(), "first"), "worm");
    assert_eq!(field(out.trim(), "second"), "fish");
    assert_eq!(field(out.trim(), "flipped"), "true");
}

#[test]
fn councilmen_pair_flips() {
    let o = spalign(&[
        "--grammar",
        "councilmen",
        "--format",
        "records",
        "schema",
        "--pronoun",
        "they",
        FEARED,
        ADVOCATED,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(out.trim(), "first"), "councilmen");
    assert_eq!(field(out.trim(), "second"), "demonstrators");
    assert_eq!(field(out.trim(), "flipped"), "true");
}

#[test]
fn identical_sentences_are_a_usage_error() {
    let o = spalign(&[
        "--grammar",
        "fish_worm",
        "schema",
        "--pronoun",
        "it",
        FISH_TASTY,
        FISH_TASTY,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bare_alignment_scores_zero() {
    let g = scratch("bare.spg", "P | 1 | 0 | a b\n");
    let a = scratch("bare.aln", "new a b\ncolumn a 0:0\ncolumn b 0:1\n");
    let o = spalign(&[
        "--grammar",
        g.to_str().unwrap(),
        "--format",
        "records",
        "score",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let head = out.lines().next().unwrap();
    assert_eq!(field(head, "cd").parse::<f64>().unwrap(), 0.0);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn reference_alignment_scores_like_the_parse() {
    let aln = golden("fortune_brave.aln");
    let scored = stdout(&spalign(&[
        "--grammar",
        "fortune_brave",
        "--format",
        "records",
        "score",
        aln.to_str().unwrap(),
    ]));
    let parsed = stdout(&with_sentence(
        &["--grammar", "fortune_brave", "--format", "records", "parse"],
        FIGURE_SENTENCE,
    ));
    let cd = |s: &str| field(s.lines().next().unwrap(), "cd").to_string();
    assert_eq!(cd(&scored), cd(&parsed));
}

#[test]
fn crossing_hits_fail_validation() {
    let g = scratch("cross.spg", "P | 1 | 0 | a b\n");
    let a = scratch(
        "cross.aln",
        "new b a\ninstance P\ncolumn b 0:0 1:1\ncolumn a 0:1 1:0\n",
    );
    let o = spalign(&[
        "--grammar",
        g.to_str().unwrap(),
        "score",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("order preservation"), "{}", stderr(&o));
}

#[test]
fn malformed_alignment_file_is_a_syntax_error() {
    let a = scratch("bad.aln", "instance S0\n");
    let o = spalign(&["--grammar", "fortune_brave", "score", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
