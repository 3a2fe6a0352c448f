//! Command-line front end: validation, bounded enumeration,
//! normalization, equivalence checking, and example generation over
//! grammar files.
//!
//! Exit status: 0 success, 1 check failed, 2 usage or input error. The
//! first stdout line is machine-parseable: `OK`, `FAIL <code>`, or
//! `ERROR <code>`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dcfg::format::{parse_grammar, print_grammar};
use dcfg::grammar::{enumerate, equiv_up_to, Grammar};
use dcfg::normalization::{run_pass, PassSelect};
use dcfg::{emit_example, EquivResult};

const MAX_LEN_GUARD: usize = 20;

#[derive(Parser)]
#[command(name = "dcfg", about = "Displacement context-free grammar toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a grammar file against every grammar invariant.
    Validate { path: PathBuf },
    /// List all derivable tuples of a nonterminal up to a length bound.
    Enumerate {
        path: PathBuf,
        #[command(flatten)]
        max_len: MaxLen,
        /// Nonterminal to enumerate (default: the start symbol).
        #[arg(long)]
        nonterminal: Option<String>,
    },
    /// Transform a linear grammar through the normal-form pipeline.
    Normalize {
        path: PathBuf,
        /// Pass to run on the input grammar.
        #[arg(long, value_enum, default_value_t = Pass::All)]
        pass: Pass,
        /// Write the transformed grammar here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit the transformation trace (to `<output>.trace`, or stderr).
        #[arg(long)]
        trace: bool,
    },
    /// Compare the bounded languages of two grammars.
    Equiv {
        path1: PathBuf,
        path2: PathBuf,
        #[command(flatten)]
        max_len: MaxLen,
    },
    /// Write the example grammar G_k.
    Example {
        /// Displacement bound (k >= 1).
        #[arg(long)]
        k: usize,
        /// Write the grammar here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MaxLen {
    /// Length bound for the enumeration oracle (at most 20).
    #[arg(long, default_value_t = 8)]
    max_len: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pass {
    Wellformed,
    Eps,
    Bridges,
    Strip,
    All,
}

impl From<Pass> for PassSelect {
    fn from(p: Pass) -> PassSelect {
        match p {
            Pass::Wellformed => PassSelect::WellFormed,
            Pass::Eps => PassSelect::Eps,
            Pass::Bridges => PassSelect::Bridges,
            Pass::Strip => PassSelect::Strip,
            Pass::All => PassSelect::All,
        }
    }
}

/// A finished command: the exit status together with the first line
/// already printed.
enum Outcome {
    Ok,
    Fail,
    Error,
}

impl Outcome {
    fn code(self) -> ExitCode {
        match self {
            Outcome::Ok => ExitCode::from(0),
            Outcome::Fail => ExitCode::from(1),
            Outcome::Error => ExitCode::from(2),
        }
    }
}

fn error(code: &str, detail: impl std::fmt::Display) -> Outcome {
    println!("ERROR {code}");
    eprintln!("{detail}");
    Outcome::Error
}

fn read_grammar(path: &Path) -> Result<Grammar, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| error("io", format!("{}: {e}", path.display())))?;
    parse_grammar(&text).map_err(|e| error("parse", format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<Grammar, Outcome> {
    let g = read_grammar(path)?;
    let issues = g.validate();
    if issues.is_empty() {
        Ok(g)
    } else {
        println!("FAIL {}", violation_code(&issues[0]));
        for issue in issues {
            eprintln!("{issue}");
        }
        Err(Outcome::Fail)
    }
}

fn violation_code(issue: &str) -> &'static str {
    if issue.contains("rank mismatch") {
        "rank-mismatch"
    } else if issue.contains("start symbol") {
        "bad-start"
    } else if issue.contains("not in the alphabet") {
        "unknown-symbol"
    } else if issue.contains("declared") {
        "undeclared"
    } else if issue.contains("correct") {
        "not-k-correct"
    } else {
        "invalid"
    }
}

fn check_bound(max_len: usize) -> Result<(), Outcome> {
    if max_len > MAX_LEN_GUARD {
        Err(error(
            "too-large",
            format!("--max-len {max_len} exceeds the guard ({MAX_LEN_GUARD})"),
        ))
    } else {
        Ok(())
    }
}

fn cmd_validate(path: &Path) -> Outcome {
    let g = match load_valid(path) {
        Ok(g) => g,
        Err(o) => return o,
    };
    println!("OK");
    println!(
        "k: {}  nonterminals: {}  rules: {}  linear: {}",
        g.k,
        g.nonterminals.len(),
        g.rules.len(),
        if g.is_linear() { "yes" } else { "no" }
    );
    Outcome::Ok
}

fn cmd_enumerate(path: &Path, max_len: usize, nonterminal: Option<&str>) -> Outcome {
    if let Err(o) = check_bound(max_len) {
        return o;
    }
    let g = match load_valid(path) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let target = nonterminal.unwrap_or(&g.start);
    if !g.has_nonterm(target) {
        return error("usage", format!("unknown nonterminal {target}"));
    }
    let table = enumerate(&g, max_len);
    println!("OK");
    for tuple in table.entry(target) {
        println!("{tuple}");
    }
    Outcome::Ok
}

fn cmd_normalize(path: &Path, pass: Pass, output: Option<&Path>, trace: bool) -> Outcome {
    let g = match load_valid(path) {
        Ok(g) => g,
        Err(o) => return o,
    };
    if !g.is_linear() {
        println!("FAIL not-linear");
        return Outcome::Fail;
    }
    let (out, trace_log) = match run_pass(&g, pass.into()) {
        Ok(result) => result,
        Err(e @ dcfg::DcfgError::WrongStage { .. }) => {
            println!("FAIL wrong-stage");
            eprintln!("{e}");
            return Outcome::Fail;
        }
        Err(e) => return error("internal", e),
    };
    println!("OK {} -> {} rules", g.rules.len(), out.rules.len());
    let rendered = print_grammar(&out);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                return error("io", format!("{}: {e}", path.display()));
            }
            if trace {
                let mut trace_path = path.as_os_str().to_owned();
                trace_path.push(".trace");
                if let Err(e) = std::fs::write(&trace_path, trace_log.render()) {
                    return error("io", format!("{}: {e}", Path::new(&trace_path).display()));
                }
            }
        }
        None => {
            print!("{rendered}");
            if trace {
                eprint!("{}", trace_log.render());
            }
        }
    }
    Outcome::Ok
}

fn cmd_equiv(path1: &Path, path2: &Path, max_len: usize) -> Outcome {
    if let Err(o) = check_bound(max_len) {
        return o;
    }
    let g1 = match load_valid(path1) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let g2 = match load_valid(path2) {
        Ok(g) => g,
        Err(o) => return o,
    };
    match equiv_up_to(&g1, &g2, max_len) {
        EquivResult::Equal => {
            println!("OK");
            Outcome::Ok
        }
        EquivResult::Differs { witness, in_first } => {
            println!("FAIL witness {witness}");
            eprintln!(
                "tuple derivable only from {}",
                if in_first { path1.display() } else { path2.display() }
            );
            Outcome::Fail
        }
    }
}

fn cmd_example(k: usize, output: Option<&Path>) -> Outcome {
    let g = match emit_example(k) {
        Ok(g) => g,
        Err(e) => return error("usage", e),
    };
    println!("OK");
    let rendered = print_grammar(&g);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                return error("io", format!("{}: {e}", path.display()));
            }
        }
        None => print!("{rendered}"),
    }
    Outcome::Ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Enumerate { path, max_len, nonterminal } => {
            cmd_enumerate(&path, max_len.max_len, nonterminal.as_deref())
        }
        Command::Normalize { path, pass, output, trace } => {
            cmd_normalize(&path, pass, output.as_deref(), trace)
        }
        Command::Equiv { path1, path2, max_len } => cmd_equiv(&path1, &path2, max_len.max_len),
        Command::Example { k, output } => cmd_example(k, output.as_deref()),
    };
    outcome.code()
}
