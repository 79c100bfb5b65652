//! Command-line front end.
//!
//! Exit status: 0 success, 1 a verification check failed, 2 usage, input
//! or budget errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::elements::Params;
use crate::finengine::{self, Congruence, FinError, FiniteAlgebra};
use crate::syntax::parse_term;
use crate::terms::{eval_term, Assignment};
use crate::verifier::{self, Budget, Outcome, SuiteConfig, VerificationReport};

#[derive(Debug, Parser)]
#[command(name = "commlab", version, about = "Higher commutators of finite algebras and a bounded verifier for a simple algebra with supernilpotence class n")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Arity parameter of the constructed algebra.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=24))]
    pub n: u32,
    /// Largest second index j of a_{i,j}, b_{i,j} in the verification domain.
    #[arg(long, global = true)]
    pub j_max: Option<u32>,
    /// Rounds of closure of the base atoms under f, u and u_pqr.
    #[arg(long, global = true)]
    pub closure_depth: Option<u32>,
    /// Maximum depth of enumerated terms.
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Length of each block tuple in witness searches.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub block_len: Option<u64>,
    /// Resource cap: elements, terms and cubes at N, value tables at 64 N.
    #[arg(long, global = true, env = "COMMLAB_BUDGET", value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Spread witness searches over worker threads.
    #[arg(long, global = true)]
    pub parallel: bool,
    /// Report 0 ms for every check, making output byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the bounded verification suite for the constructed algebra.
    PaperVerify {
        /// Number of random simplicity chains to round-trip.
        #[arg(long, default_value_t = 64)]
        chains: usize,
    },
    /// Evaluate a closed term or element, e.g. "f(a(1,0), b(2,0))".
    Eval { expr: String },
    /// Finite-algebra engine; FILE is a JSON algebra or "-" for stdin.
    Fin {
        #[command(subcommand)]
        command: FinCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum FinCommand {
    /// The m-ary higher commutator (all arguments full unless --alpha is given).
    Commutator {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Argument congruence as a JSON block list; repeat once per argument.
        #[arg(long)]
        alpha: Vec<String>,
        file: String,
    },
    /// The descending central series theta_2 .. theta_max_m.
    Series {
        #[arg(long, default_value_t = 3)]
        max_m: usize,
        file: String,
    },
    /// Whether the algebra is simple.
    Simple { file: String },
    /// Whether the m-dimensional term condition holds relative to delta.
    Tc {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// JSON block list; defaults to the identity congruence.
        #[arg(long)]
        delta: Option<String>,
        file: String,
    },
}

/// A failure that maps to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn budget(g: &GlobalOpts) -> Budget {
    g.budget.map(Budget::uniform).unwrap_or_default()
}

fn read_algebra(file: &str) -> Result<FiniteAlgebra, UsageError> {
    let text = if file == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(file).map_err(|e| UsageError(format!("{file}: {e}")))?
    };
    FiniteAlgebra::from_json(&text).map_err(|e| UsageError(format!("{file}: {e}")))
}

fn parse_congruence(text: &str, size: usize) -> Result<Congruence, UsageError> {
    let blocks: Vec<Vec<usize>> = serde_json::from_str(text).map_err(|e| UsageError(format!("congruence '{text}': {e}")))?;
    let c = Congruence::from_blocks(blocks).map_err(|e| UsageError(format!("congruence '{text}': {e}")))?;
    if c.size() != size {
        return Err(UsageError(format!("congruence '{text}' covers {} elements, algebra has {size}", c.size())));
    }
    Ok(c)
}

fn fin_error(e: FinError) -> UsageError {
    UsageError(e.to_string())
}

fn text_report(r: &VerificationReport) -> String {
    let status = match r.outcome {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::Budget => "BUDGET",
    };
    let counts: Vec<String> = r.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let mut line = format!("{status} {} ({}) {} ms", r.name, counts.join(", "), r.millis);
    if !r.note.is_empty() {
        line.push_str(&format!("\n    note: {}", r.note));
    }
    if let Some(c) = &r.counterexample {
        line.push_str(&format!("\n    counterexample: {c}"));
    }
    if let Some(d) = &r.detail {
        line.push_str(&format!("\n    detail: {d}"));
    }
    line
}

fn run_inner(cli: &Cli, out: &mut dyn Write) -> Result<i32, UsageError> {
    let g = &cli.global;
    let params = Params::new(g.n as usize)?;
    match &cli.command {
        Command::PaperVerify { chains } => {
            let mut cfg = SuiteConfig::defaults(params);
            if let Some(v) = g.j_max {
                cfg.j_max = v;
            }
            if let Some(v) = g.closure_depth {
                cfg.closure_depth = v;
            }
            if let Some(v) = g.max_depth {
                cfg.max_depth = v;
            }
            if let Some(v) = g.block_len {
                cfg.block_len = v as usize;
            }
            cfg.budget = budget(g);
            cfg.seed = g.seed;
            cfg.chains = *chains;
            cfg.parallel = g.parallel;
            cfg.timing = !g.no_timing;
            let reports = verifier::run_suite(&cfg);
            for r in &reports {
                match g.format {
                    Format::Json => writeln!(out, "{}", r.to_json_line())?,
                    Format::Text => writeln!(out, "{}", text_report(r))?,
                }
            }
            Ok(verifier::exit_code(&reports))
        }
        Command::Eval { expr } => {
            let t = parse_term(expr, &params)?;
            if t.max_var().is_some() {
                return Err(UsageError(format!("'{expr}' has free variables; eval takes closed terms")));
            }
            let v = eval_term(&t, &Assignment(vec![]), &params)?;
            match g.format {
                Format::Text => writeln!(out, "{v}")?,
                Format::Json => writeln!(out, "{}", json!({"expr": expr, "value": v.to_string()}))?,
            }
            Ok(0)
        }
        Command::Fin { command } => {
            let cap = budget(g).cubes;
            let (record, text) = match command {
                FinCommand::Commutator { m, alpha, file } => {
                    let alg = read_algebra(file)?;
                    let general = !alpha.is_empty();
                    let alphas = if general {
                        if alpha.len() != *m {
                            return Err(UsageError(format!("--m {m} needs {m} --alpha values, got {}", alpha.len())));
                        }
                        alpha.iter().map(|a| parse_congruence(a, alg.size())).collect::<Result<Vec<_>, _>>()?
                    } else {
                        vec![Congruence::full(alg.size()); *m]
                    };
                    let c = finengine::higher_commutator(&alg, &alphas, cap).map_err(fin_error)?;
                    let kind = if general { "term-condition commutator" } else { "higher commutator of full congruences" };
                    (
                        json!({"command": "commutator", "m": m, "kind": kind, "result": c}),
                        format!("{kind}, m = {m}: {c}"),
                    )
                }
                FinCommand::Series { max_m, file } => {
                    let alg = read_algebra(file)?;
                    let series = finengine::central_series(&alg, *max_m, cap).map_err(fin_error)?;
                    let degree = series.iter().position(Congruence::is_identity).map(|i| i + 2);
                    let mut text = String::new();
                    for (i, t) in series.iter().enumerate() {
                        text.push_str(&format!("theta_{} = {t}\n", i + 2));
                    }
                    match degree {
                        Some(d) => text.push_str(&format!("supernilpotent: theta_{d} is the identity")),
                        None => text.push_str(&format!("no theta_m with m <= {max_m} is the identity")),
                    }
                    (
                        json!({"command": "series", "max_m": max_m, "series": series, "supernilpotence_degree": degree}),
                        text,
                    )
                }
                FinCommand::Simple { file } => {
                    let alg = read_algebra(file)?;
                    let simple = finengine::is_simple(&alg).map_err(fin_error)?;
                    (json!({"command": "simple", "simple": simple}), format!("simple: {simple}"))
                }
                FinCommand::Tc { m, delta, file } => {
                    let alg = read_algebra(file)?;
                    let delta = match delta {
                        Some(d) => parse_congruence(d, alg.size())?,
                        None => Congruence::identity(alg.size()),
                    };
                    let holds = finengine::tc_holds(&alg, *m, &delta, cap).map_err(fin_error)?;
                    (
                        json!({"command": "tc", "m": m, "delta": delta, "holds": holds}),
                        format!("term condition, m = {m}, relative to {delta}: {}", if holds { "holds" } else { "fails" }),
                    )
                }
            };
            match g.format {
                Format::Json => writeln!(out, "{record}")?,
                Format::Text => writeln!(out, "{text}")?,
            }
            Ok(0)
        }
    }
}

/// Runs the CLI on parsed arguments; returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let mut buffer: Vec<u8> = Vec::new();
    let code = match run_inner(&cli, &mut buffer) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let written = match &cli.global.out {
        Some(path) => fs::write(path, &buffer).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().write_all(&buffer).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
