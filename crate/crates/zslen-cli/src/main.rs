//! `zslen`: exact zero-sum arithmetic over finite abelian groups from the
//! command line. Groups are written as `C6`, `C2xC4`, or `C3^3`; sequences
//! as `[coords]^mult` terms over the group's cyclic factors, e.g.
//! `"[1]^6 [5]^6"` over `C6` or `"[1,0] [0,1]^2"` over `C3^2`.
//!
//! Exit codes: 0 success, 1 failed verification (or internal error),
//! 2 usage error, 3 exhausted search budget.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use zslen::atoms::{cache_load, cache_store, enumerate_atoms_with, AtomSearchConfig};
use zslen::catalog::suite_ids;
use zslen::lengths::{
    delta_g_bounded, delta_star_bounded, enumerate_factorizations, rho_k, set_of_lengths_with,
    LengthConfig, LengthSet,
};
use zslen::structure::classify;
use zslen::{
    compare_systems, enumerate_atoms, system_enumerate, verify_suite, AtomSet, Error, GroupElement,
    GroupSpec, Sequence, SuiteConfig,
};

#[derive(Parser)]
#[command(
    name = "zslen",
    version,
    about = "Atoms, Davenport constants, and sets of factorization lengths over finite abelian groups",
    long_about = "Group descriptors: C1, C6, C2xC4, C3^3 (cyclic factors joined by `x`, \
powers abbreviating repetition). Sequence descriptors: whitespace-separated terms \
`[c1,...,cr]^m` giving an element by its coordinates in the cyclic factors and its \
multiplicity (`^1` may be omitted); `()` is the empty sequence.\n\n\
Environment: ZSLEN_CACHE_DIR (atom cache root), ZSLEN_THREADS (worker pool size)."
)]
struct Cli {
    /// Output format. `json` is a single document with stable key order;
    /// `csv` flattens to `;`-joined rows; `plain` is human-oriented.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Worker pool size (overrides ZSLEN_THREADS; default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Args)]
struct Budgets {
    /// Cap on search nodes; exceeding it exits with code 3.
    #[arg(long)]
    budget_nodes: Option<u64>,
    /// Cap on memo-table bytes for the length-set engine.
    #[arg(long)]
    memo_bytes: Option<u64>,
}

impl Budgets {
    fn length_config(&self) -> LengthConfig {
        LengthConfig { node_budget: self.budget_nodes, memo_bytes: self.memo_bytes }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the atoms (minimal zero-sum sequences) over a support.
    Atoms {
        group: String,
        /// Support as a sequence descriptor; multiplicities are ignored.
        /// Default: every nonzero element of the group.
        support: Option<String>,
        /// Cap on atom length (default: the group order).
        #[arg(long)]
        bound: Option<u64>,
        /// Read/write the atom cache (default: only when ZSLEN_CACHE_DIR is set).
        #[arg(long, overrides_with = "no_cache")]
        cache: bool,
        /// Never touch the atom cache.
        #[arg(long)]
        no_cache: bool,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Print the Davenport constant D(G).
    Davenport { group: String },
    /// Compute the set of factorization lengths L(A) of a zero-sum sequence.
    Lengths {
        group: String,
        sequence: String,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// List all factorizations of a zero-sum sequence into atoms.
    Factorizations {
        group: String,
        sequence: String,
        /// Cap on the number of factorizations; exceeding it exits with code 3.
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
    },
    /// Classify L(A) as a singleton, AP, AMP, AAP, or AAMP.
    Classify {
        group: String,
        sequence: String,
        /// Comma-separated candidate differences d (default: the distances of L(A), or 1).
        #[arg(long, value_delimiter = ',')]
        d: Vec<u64>,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Elasticity rho_k(G): the largest max L(A) over A with k in L(A).
    Rho {
        group: String,
        #[arg(long, default_value_t = 2)]
        k: u64,
    },
    /// Distances Delta(G) realized by sequences of length at most the bound.
    Delta {
        group: String,
        /// Size bound on |A| (default: twice the group exponent).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Distances Delta*(G) over cyclic supports, up to the size bound.
    DeltaStar {
        group: String,
        /// Size bound on |A| (default: twice the group exponent).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Enumerate the system of sets of lengths {L(A) : |A| <= bound}.
    System {
        group: String,
        #[arg(long, default_value_t = 8)]
        bound: u64,
    },
    /// Compare the bounded systems of two groups.
    Compare {
        group: String,
        other: String,
        #[arg(long, default_value_t = 8)]
        bound: u64,
    },
    /// Run a verification suite; exits 1 when any case fails.
    Verify {
        /// Suite id; pass `list` to print the available ids.
        suite: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
        /// Echoed into the report; the sweeps themselves are exhaustive.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budgets: Budgets,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("ZSLEN_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("zslen: could not size the worker pool");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("zslen: {e}");
            match e {
                Error::BudgetExhausted(_) => ExitCode::from(3),
                Error::BadGroupDescriptor(..)
                | Error::BadSequenceDescriptor(..)
                | Error::GroupMismatch(..)
                | Error::InvalidParameter(_)
                | Error::UnknownId(_)
                | Error::UnsupportedGroup(_)
                | Error::NotZeroSum(_)
                | Error::SupportNotContained(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn parse_group(desc: &str) -> Result<GroupSpec, Error> {
    desc.parse()
}

fn parse_sequence(group: &GroupSpec, text: &str) -> Result<Sequence, Error> {
    Sequence::parse(group, text)
}

fn print_json(value: &serde_json::Value) {
    println!("{value}");
}

fn length_set_csv(l: &LengthSet) -> String {
    l.values().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn emit_length_set(l: &LengthSet, format: Format) {
    match format {
        Format::Plain => println!("{l}"),
        Format::Json => print_json(&json!(l)),
        Format::Csv => println!("{}", length_set_csv(l)),
    }
}

fn emit_scalar(label: &str, value: u64, format: Format) {
    match format {
        Format::Plain | Format::Csv => println!("{value}"),
        Format::Json => print_json(&json!({ label: value })),
    }
}

fn emit_distance_set(set: &BTreeSet<u64>, format: Format) {
    match format {
        Format::Plain => {
            let strs: Vec<String> = set.iter().map(|v| v.to_string()).collect();
            println!("{{{}}}", strs.join(","));
        }
        Format::Json => print_json(&json!(set)),
        Format::Csv => {
            println!("{}", set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"))
        }
    }
}

/// Atoms over the full nonzero support, for sequence-level operations.
fn full_atoms(group: &GroupSpec) -> Result<AtomSet, Error> {
    let support: Vec<GroupElement> = group
        .enumerate_elements()?
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    enumerate_atoms(group, &support)
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let format = cli.format;
    match &cli.command {
        Command::Atoms { group, support, bound, cache, no_cache, budgets } => {
            let group = parse_group(group)?;
            let support: Vec<GroupElement> = match support {
                Some(text) => parse_sequence(&group, text)?.support().cloned().collect(),
                None => group
                    .enumerate_elements()?
                    .into_iter()
                    .filter(|e| !e.is_zero())
                    .collect(),
            };
            let use_cache = !*no_cache && (*cache || std::env::var_os("ZSLEN_CACHE_DIR").is_some());
            let cached = if use_cache { cache_load(&group, &support, None)? } else { None };
            let atoms = match cached {
                Some(set) => set,
                None => {
                    let cfg = AtomSearchConfig {
                        max_len: *bound,
                        node_budget: budgets.budget_nodes,
                    };
                    let set = enumerate_atoms_with(&group, &support, &cfg)?;
                    if use_cache {
                        cache_store(&set, None)?;
                    }
                    set
                }
            };
            match format {
                Format::Plain | Format::Csv => {
                    for a in atoms.atoms() {
                        println!("{a}");
                    }
                }
                Format::Json => print_json(&json!({
                    "group": group.descriptor(),
                    "support": support.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "atoms": atoms.atoms(),
                    "davenport": atoms.davenport(),
                })),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Davenport { group } => {
            let group = parse_group(group)?;
            emit_scalar("davenport", zslen::atoms::davenport(&group)?, format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lengths { group, sequence, budgets } => {
            let group = parse_group(group)?;
            let a = parse_sequence(&group, sequence)?;
            let atoms = full_atoms(&group)?;
            let l = set_of_lengths_with(&a, &atoms, &budgets.length_config())?;
            emit_length_set(&l, format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Factorizations { group, sequence, bound } => {
            let group = parse_group(group)?;
            let a = parse_sequence(&group, sequence)?;
            let atoms = full_atoms(&group)?;
            let list = enumerate_factorizations(&a, &atoms, *bound as usize)?;
            if list.truncated {
                return Err(Error::BudgetExhausted(format!(
                    "more than {bound} factorizations; raise --bound"
                )));
            }
            let rendered: Vec<Vec<String>> = list
                .factorizations
                .iter()
                .map(|z| z.parts().iter().map(|&i| atoms.atoms()[i].to_string()).collect())
                .collect();
            match format {
                Format::Plain => {
                    for parts in &rendered {
                        println!("{}", parts.join(" * "));
                    }
                }
                Format::Json => print_json(&json!(rendered)),
                Format::Csv => {
                    for parts in &rendered {
                        println!("{}", parts.join(";"));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { group, sequence, d, budgets } => {
            let group = parse_group(group)?;
            let a = parse_sequence(&group, sequence)?;
            let atoms = full_atoms(&group)?;
            let l = set_of_lengths_with(&a, &atoms, &budgets.length_config())?;
            let allowed: BTreeSet<u64> = if d.is_empty() {
                let deltas = l.delta();
                if deltas.is_empty() { BTreeSet::from([1]) } else { deltas }
            } else {
                d.iter().copied().collect()
            };
            let form = classify(&l, &allowed)?;
            match format {
                Format::Plain => println!("{l} -> {}", serde_json::to_string(&form).unwrap()),
                Format::Json => print_json(&json!({
                    "lengths": l,
                    "form": form,
                })),
                Format::Csv => println!(
                    "{};{}",
                    length_set_csv(&l),
                    serde_json::to_string(&form).unwrap()
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rho { group, k } => {
            let group = parse_group(group)?;
            emit_scalar("rho", rho_k(&group, *k)?, format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Delta { group, bound } => {
            let group = parse_group(group)?;
            let bound = bound.unwrap_or(2 * group.invariants().exponent);
            emit_distance_set(&delta_g_bounded(&group, bound)?, format);
            Ok(ExitCode::SUCCESS)
        }
        Command::DeltaStar { group, bound } => {
            let group = parse_group(group)?;
            let bound = bound.unwrap_or(2 * group.invariants().exponent);
            emit_distance_set(&delta_star_bounded(&group, bound)?, format);
            Ok(ExitCode::SUCCESS)
        }
        Command::System { group, bound } => {
            let group = parse_group(group)?;
            let system = system_enumerate(&group, *bound)?;
            match format {
                Format::Plain => {
                    for l in &system {
                        println!("{l}");
                    }
                }
                Format::Json => print_json(&json!(system.iter().collect::<Vec<_>>())),
                Format::Csv => {
                    for l in &system {
                        println!("{}", length_set_csv(l));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { group, other, bound } => {
            let g = parse_group(group)?;
            let h = parse_group(other)?;
            let report = compare_systems(&g, &h, *bound)?;
            match format {
                Format::Plain => {
                    if report.equal {
                        println!("equal at bound {bound}");
                    } else {
                        println!(
                            "differ at bound {bound}: {} only in {}",
                            report.witness.as_ref().unwrap(),
                            report.witness_in.as_ref().unwrap()
                        );
                    }
                }
                Format::Json => print_json(&serde_json::to_value(&report).unwrap()),
                Format::Csv => println!(
                    "{};{};{};{}",
                    bound,
                    report.equal,
                    report.witness.as_ref().map(length_set_csv).unwrap_or_default(),
                    report.witness_in.clone().unwrap_or_default()
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, n, k, bound, seed, budgets } => {
            if suite == "list" {
                for id in suite_ids() {
                    println!("{id}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let cfg = SuiteConfig {
                n: *n,
                k: *k,
                bound: *bound,
                seed: *seed,
                length: budgets.length_config(),
            };
            let report = verify_suite(suite, &cfg)?;
            match format {
                Format::Plain => {
                    for case in &report.cases {
                        let verdict = if case.pass { "PASS" } else { "FAIL" };
                        println!(
                            "{verdict} {}: expected {} | computed {}",
                            case.id, case.expected, case.computed
                        );
                    }
                    println!(
                        "suite {}: {}",
                        report.suite,
                        if report.pass { "PASS" } else { "FAIL" }
                    );
                }
                Format::Json => print_json(&serde_json::to_value(&report).unwrap()),
                Format::Csv => {
                    for case in &report.cases {
                        println!(
                            "{};{};{};{}",
                            case.id, case.expected, case.computed, case.pass
                        );
                    }
                }
            }
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
