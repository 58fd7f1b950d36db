use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spalign::corpus::corpus_text;
use spalign::io::{overlay, parse_alignment, parse_grammar, render_alignment};
use spalign::ws::{resolve_with_fallback, schema_pair_report, WsError, WsQuery};
use spalign::{
    build_grammar, column_costs, relative_probabilities, score, search, validate_alignment,
    Grammar, SearchConfig,
};

const EXIT_USAGE: u8 = 1;
const EXIT_SYNTAX: u8 = 2;
const EXIT_NO_COMPRESSION: u8 = 3;
const EXIT_RESOLUTION: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "spalign",
    version,
    about = "Compression-scored multiple alignment and pronoun resolution"
)]
struct Cli {
    /// Grammar file, or the name of a bundled grammar. Repeat to overlay;
    /// later files replace earlier records with the same id.
    #[arg(long = "grammar", value_name = "PATH", global = true)]
    grammars: Vec<String>,
    #[arg(long, value_name = "N", global = true)]
    beam: Option<usize>,
    #[arg(long = "pairwise-k", value_name = "N", global = true)]
    pairwise_k: Option<usize>,
    #[arg(long = "max-instances", value_name = "N", global = true)]
    max_instances: Option<usize>,
    #[arg(long = "max-iterations", value_name = "N", global = true)]
    max_iterations: Option<usize>,
    /// Number of alignments to print.
    #[arg(long, value_name = "N", default_value_t = 1, global = true)]
    top: usize,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Keep the sentence's case as given.
    #[arg(long = "no-lowercase", global = true)]
    no_lowercase: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the best alignments of a sentence.
    Parse {
        #[arg(value_name = "WORD")]
        sentence: Vec<String>,
    },
    /// Find the referent of a pronoun.
    Resolve {
        #[arg(long, value_name = "WORD")]
        pronoun: String,
        /// Also print the alignment the resolution rests on.
        #[arg(long)]
        show_alignment: bool,
        #[arg(value_name = "WORD")]
        sentence: Vec<String>,
    },
    /// Resolve both sentences of a schema pair.
    Schema {
        #[arg(long, value_name = "WORD")]
        pronoun: String,
        sentence_a: String,
        sentence_b: String,
    },
    /// Score an alignment file.
    Score { alignment: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail<T>(code: u8, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code,
        message: message.into(),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let cfg = config(cli)?;
    let g = load_grammar(&cli.grammars)?;
    match &cli.command {
        Command::Parse { sentence } => cmd_parse(cli, &g, &words(cli, sentence)?, &cfg),
        Command::Resolve {
            pronoun,
            show_alignment,
            sentence,
        } => cmd_resolve(
            cli,
            &g,
            &words(cli, sentence)?,
            &token(cli, pronoun),
            *show_alignment,
            &cfg,
        ),
        Command::Schema {
            pronoun,
            sentence_a,
            sentence_b,
        } => cmd_schema(
            cli,
            &g,
            &words(cli, std::slice::from_ref(sentence_a))?,
            &words(cli, std::slice::from_ref(sentence_b))?,
            &token(cli, pronoun),
            &cfg,
        ),
        Command::Score { alignment } => cmd_score(cli, &g, alignment),
    }
}

fn config(cli: &Cli) -> Result<SearchConfig, Failure> {
    let mut cfg = SearchConfig::default();
    cfg.beam_width = cli.beam.unwrap_or(cfg.beam_width);
    cfg.pairwise_k = cli.pairwise_k.unwrap_or(cfg.pairwise_k);
    cfg.max_instances = cli.max_instances.unwrap_or(cfg.max_instances);
    cfg.max_iterations = cli.max_iterations.unwrap_or(cfg.max_iterations);
    match cfg.validate() {
        Ok(()) => Ok(cfg),
        Err(e) => fail(EXIT_USAGE, e.to_string()),
    }
}

fn load_grammar(names: &[String]) -> Result<Grammar, Failure> {
    if names.is_empty() {
        return fail(EXIT_USAGE, "at least one --grammar is required");
    }
    let mut layers = Vec::with_capacity(names.len());
    for name in names {
        let path = Path::new(name);
        let text = if path.exists() {
            match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_USAGE, format!("{name}: {e}")),
            }
        } else if let Some(t) = corpus_text(name).or_else(|| corpus_text(&format!("{name}.spg"))) {
            t.to_string()
        } else {
            return fail(
                EXIT_USAGE,
                format!("{name}: no such file or bundled grammar"),
            );
        };
        match parse_grammar(&text) {
            Ok(recs) => layers.push(recs),
            Err(e) => return fail(EXIT_SYNTAX, format!("{name}: {e}")),
        }
    }
    build_grammar(&overlay(&layers)).or_else(|e| fail(EXIT_SYNTAX, e.to_string()))
}

fn token(cli: &Cli, w: &str) -> String {
    if cli.no_lowercase {
        w.to_string()
    } else {
        w.to_lowercase()
    }
}

fn words(cli: &Cli, parts: &[String]) -> Result<Vec<String>, Failure> {
    let ws: Vec<String> = parts
        .iter()
        .flat_map(|p| p.split_whitespace())
        .map(|w| token(cli, w))
        .collect();
    if ws.is_empty() {
        return fail(EXIT_USAGE, "empty sentence");
    }
    Ok(ws)
}

fn cmd_parse(
    cli: &Cli,
    g: &Grammar,
    words: &[String],
    cfg: &SearchConfig,
) -> Result<String, Failure> {
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let results = search(&g.new_pattern(&refs), g, cfg);
    if results[0].score.cd <= 0.0 {
        return fail(EXIT_NO_COMPRESSION, "no alignment compresses the sentence");
    }
    let top: Vec<_> = results.iter().take(cli.top.max(1)).collect();
    let scores: Vec<_> = top.iter().map(|r| r.score).collect();
    let probs = relative_probabilities(&scores).unwrap_or_else(|_| vec![0.0; scores.len()]);
    let mut out = String::new();
    for (rank, (r, p)) in top.iter().zip(&probs).enumerate() {
        let s = r.score;
        match cli.format {
            Format::Text => {
                let _ = writeln!(
                    out,
                    "== alignment {} bn={:.6} be={:.6} cd={:.6} p={:.6}",
                    rank + 1,
                    s.bn,
                    s.be,
                    s.cd,
                    p
                );
                out.push_str(&render_alignment(&r.alignment, g));
            }
            Format::Records => {
                let _ = writeln!(
                    out,
                    "rank={} bn={:.6} be={:.6} cd={:.6} p={:.6} patterns={}",
                    rank + 1,
                    s.bn,
                    s.be,
                    s.cd,
                    p,
                    r.alignment
                        .instances
                        .iter()
                        .map(|i| g.pattern(i.pattern).name.as_str())
                        .collect::<Vec<_>>()
                        .join(",")
                );
            }
        }
    }
    Ok(out)
}

fn query<'g>(g: &'g Grammar, words: &[String], pronoun: &str) -> Result<WsQuery<'g>, Failure> {
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    WsQuery::new(g, &refs, pronoun).or_else(|e| fail(EXIT_USAGE, e.to_string()))
}

fn resolution_failure<T>(e: WsError) -> Result<T, Failure> {
    let code = match e {
        WsError::InvalidConfig(_)
        | WsError::EmptySentence
        | WsError::PronounNotInSentence(_)
        | WsError::IdenticalSentences => EXIT_USAGE,
        _ => EXIT_RESOLUTION,
    };
    fail(code, format!("{}: {e}", e.name()))
}

fn cmd_resolve(
    cli: &Cli,
    g: &Grammar,
    words: &[String],
    pronoun: &str,
    show: bool,
    cfg: &SearchConfig,
) -> Result<String, Failure> {
    let q = query(g, words, pronoun)?;
    let r = resolve_with_fallback(&q, cfg).or_else(resolution_failure)?;
    let mut out = String::new();
    match cli.format {
        Format::Text => {
            let _ = writeln!(out, "referent: {}", r.referent_word);
            let _ = writeln!(out, "referent pattern: {}", r.referent_pattern_id);
            let _ = writeln!(out, "bridge: {}", r.bridge_pattern_id);
            let _ = writeln!(out, "attribute: {}", r.attribute_name);
            let _ = writeln!(out, "chain: {}", r.chain.join(" "));
            let _ = writeln!(out, "confidence: {:.6}", r.confidence);
            let _ = writeln!(out, "cd: {:.6}", r.score.cd);
            if show {
                out.push_str(&render_alignment(&r.best_alignment, g));
            }
        }
        Format::Records => {
            let _ = writeln!(
                out,
                "referent={} referent_pattern={} bridge={} attribute={} chain={} confidence={:.6} cd={:.6}",
                r.referent_word,
                r.referent_pattern_id,
                r.bridge_pattern_id,
                r.attribute_name,
                r.chain.join(","),
                r.confidence,
                r.score.cd
            );
        }
    }
    Ok(out)
}

fn cmd_schema(
    cli: &Cli,
    g: &Grammar,
    a: &[String],
    b: &[String],
    pronoun: &str,
    cfg: &SearchConfig,
) -> Result<String, Failure> {
    let (qa, qb) = (query(g, a, pronoun)?, query(g, b, pronoun)?);
    let report = schema_pair_report(&qa, &qb, cfg).or_else(resolution_failure)?;
    let mut out = String::new();
    let (x, y) = (&report.first, &report.second);
    match cli.format {
        Format::Text => {
            let _ = writeln!(
                out,
                "first: {} (bridge {}, confidence {:.6})",
                x.referent_word, x.bridge_pattern_id, x.confidence
            );
            let _ = writeln!(
                out,
                "second: {} (bridge {}, confidence {:.6})",
                y.referent_word, y.bridge_pattern_id, y.confidence
            );
            let _ = writeln!(out, "flipped: {}", report.flipped);
        }
        Format::Records => {
            let _ = writeln!(
                out,
                "first={} first_bridge={} first_confidence={:.6} second={} second_bridge={} second_confidence={:.6} flipped={}",
                x.referent_word, x.bridge_pattern_id, x.confidence, y.referent_word, y.bridge_pattern_id, y.confidence, report.flipped
            );
        }
    }
    Ok(out)
}

fn cmd_score(cli: &Cli, g: &Grammar, path: &Path) -> Result<String, Failure> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    let a = parse_alignment(&text, g)
        .or_else(|e| fail(EXIT_SYNTAX, format!("{}: {e}", path.display())))?;
    validate_alignment(&a, g)
        .or_else(|v| fail(EXIT_VALIDATION, format!("invalid alignment: {v}")))?;
    let s = score(&a, g).or_else(|e| fail(EXIT_VALIDATION, e.to_string()))?;
    let mut out = String::new();
    match cli.format {
        Format::Text => {
            let _ = writeln!(out, "bn={:.6} be={:.6} cd={:.6}", s.bn, s.be, s.cd);
            let _ = writeln!(
                out,
                "{:>6}  {:<20} {:>10} {:>10}",
                "column", "symbol", "bn", "be"
            );
            for (i, (col, (bn, be))) in a.columns.iter().zip(column_costs(&a, g)).enumerate() {
                let _ = writeln!(
                    out,
                    "{:>6}  {:<20} {:>10.6} {:>10.6}",
                    i,
                    a.symbol_name(col.symbol, g),
                    bn,
                    be
                );
            }
        }
        Format::Records => {
            let _ = writeln!(out, "bn={:.6} be={:.6} cd={:.6}", s.bn, s.be, s.cd);
            for (i, (col, (bn, be))) in a.columns.iter().zip(column_costs(&a, g)).enumerate() {
                let _ = writeln!(
                    out,
                    "column={} symbol={} bn={:.6} be={:.6}",
                    i,
                    a.symbol_name(col.symbol, g),
                    bn,
                    be
                );
            }
        }
    }
    Ok(out)
}
