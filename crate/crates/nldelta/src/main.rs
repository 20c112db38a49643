//! Command-line front end: derive sentences against a lexicon, print each
//! reading as an index-notation equation with its evaluated tensor, compare
//! readings, or cross-check the two evaluation routes.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nldelta::formula::Formula;
use nldelta::lexicon::{Lexicon, LoadOptions};
use nldelta::pipeline::{
    run_check_equivalence, run_compare, run_derive, Bracketing, CheckOptions, CheckReport,
    CompareReport, DeriveOptions, PipelineError, RunReport,
};
use nldelta::proofs::{Postulate, DEFAULT_MAX_DEPTH};

#[derive(Parser)]
#[command(
    name = "nldelta",
    version,
    about = "Derivations in the modal Lambek calculus NL◇ with tensor semantics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for derivations of a sentence and evaluate every reading
    Derive(DeriveArgs),
    /// Check delta contraction against explicit matrix composition for
    /// every proof of the sentence
    CheckEquivalence(CheckArgs),
    /// Derive an ambiguous sentence and report cosine similarities between
    /// its reading vectors
    Compare(DeriveArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Lexicon file (spaces, atom interpretations, typed words)
    #[arg(long)]
    lexicon: PathBuf,

    /// Goal formula the sentence must derive, e.g. `n` or `s`
    #[arg(long)]
    goal: String,

    /// Structural postulate package for gap movement
    #[arg(long, value_enum, default_value_t = PostulateChoice::Left)]
    postulates: PostulateChoice,

    /// Antecedent shape: `right`, `all`, or `explicit:(tree over the words)`
    #[arg(long, default_value = "right", value_parser = parse_bracketing)]
    bracketing: Bracketing,

    /// Bound on rule applications along one search branch
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,

    /// Stop after this many proofs per sequent
    #[arg(long)]
    max_proofs: Option<usize>,

    /// XORed into every `seed` source in the lexicon
    #[arg(long)]
    seed_override: Option<u64>,

    /// Replacement space dimensions, e.g. `N=2,S=2`
    #[arg(long, value_parser = parse_dims)]
    dims: Option<DimsSpec>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// The sentence, one word per argument
    #[arg(required = true)]
    words: Vec<String>,
}

#[derive(Args)]
struct DeriveArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Maximum allowed max-abs deviation between the two routes
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,

    /// Also compare the routes as full matrices (every basis vector)
    #[arg(long)]
    basis: bool,

    /// Rewire each delta before comparing so the check must fail
    /// (negative control)
    #[arg(long, hide = true)]
    corrupt: bool,

    /// Per-node size bound for the matrix route
    #[arg(long)]
    dim_cap: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PostulateChoice {
    /// α̂ˡ and σ̂ˡ — leftward gaps (Dutch relativisation)
    Left,
    /// α̂ʳ and σ̂ʳ — rightward gaps (English object relativisation)
    Right,
    /// All four postulates
    Both,
    /// Pure residuation logic, no movement
    None,
}

impl PostulateChoice {
    fn set(self) -> BTreeSet<Postulate> {
        match self {
            PostulateChoice::Left => Postulate::leftward(),
            PostulateChoice::Right => Postulate::rightward(),
            PostulateChoice::Both => Postulate::all(),
            PostulateChoice::None => BTreeSet::new(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone)]
struct DimsSpec(Vec<(String, usize)>);

fn parse_dims(arg: &str) -> Result<DimsSpec, String> {
    let mut dims = Vec::new();
    for part in arg.split(',') {
        let (label, dim) = part
            .split_once('=')
            .ok_or_else(|| format!("`{part}` is not of the form LABEL=DIM"))?;
        let dim: usize =
            dim.trim().parse().map_err(|_| format!("`{dim}` is not a dimension"))?;
        dims.push((label.trim().to_string(), dim));
    }
    Ok(DimsSpec(dims))
}

fn parse_bracketing(arg: &str) -> Result<Bracketing, String> {
    match arg {
        "right" => Ok(Bracketing::RightBranching),
        "all" => Ok(Bracketing::All),
        _ => match arg.strip_prefix("explicit:") {
            Some(tree) => Ok(Bracketing::Explicit(tree.to_string())),
            None => Err("expected `right`, `all`, or `explicit:<tree>`".into()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Derive(args) => {
            let (lexicon, goal) = load(&args.common)?;
            let report =
                run_derive(&lexicon, &args.common.words, &goal, &derive_options(&args.common))?;
            match args.common.format {
                Format::Text => print_run(&report),
                Format::Structured => print_json(&report),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let (lexicon, goal) = load(&args.common)?;
            let report =
                run_compare(&lexicon, &args.common.words, &goal, &derive_options(&args.common))?;
            match args.common.format {
                Format::Text => print_compare(&report),
                Format::Structured => print_json(&report),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckEquivalence(args) => {
            let (lexicon, goal) = load(&args.common)?;
            let options = CheckOptions {
                derive: derive_options(&args.common),
                tolerance: Some(args.tolerance),
                basis: args.basis,
                corrupt: args.corrupt,
                dim_cap: args.dim_cap,
            };
            let report = run_check_equivalence(&lexicon, &args.common.words, &goal, &options)?;
            match args.common.format {
                Format::Text => print_check(&report),
                Format::Structured => print_json(&report),
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
    }
}

fn load(common: &CommonArgs) -> Result<(Lexicon, Formula), PipelineError> {
    let options = LoadOptions {
        seed_override: common.seed_override,
        space_dims: common.dims.clone().map(|d| d.0).unwrap_or_default(),
    };
    let lexicon = Lexicon::load_with(&common.lexicon, &options)?;
    let goal: Formula = common.goal.parse()?;
    Ok((lexicon, goal))
}

fn derive_options(common: &CommonArgs) -> DeriveOptions {
    DeriveOptions {
        postulates: common.postulates.set(),
        bracketing: common.bracketing.clone(),
        max_depth: common.max_depth,
        max_proofs: common.max_proofs,
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn print_run(report: &RunReport) {
    println!("sequent   {}", report.sequent);
    println!(
        "proofs    {} in {} reading(s); bound hit: {}; {:.1} ms",
        report.proofs_found,
        report.readings.len(),
        if report.bound_hit { "yes" } else { "no" },
        report.elapsed_ms
    );
    for (k, reading) in report.readings.iter().enumerate() {
        println!("reading {}  [{} proof(s)]", k + 1, reading.proof_count);
        println!("  {}", reading.einstein);
        println!("  x {:?} = {}", reading.result_shape, render_values(&reading.result));
    }
}

fn print_compare(report: &CompareReport) {
    print_run(&report.run);
    for entry in &report.similarities {
        println!(
            "similarity  reading {} ~ reading {}: {:.6}",
            entry.left + 1,
            entry.right + 1,
            entry.cosine
        );
    }
}

fn print_check(report: &CheckReport) {
    println!("sequent   {}", report.sequent);
    println!("proofs checked: {}", report.checks.len());
    for (k, check) in report.checks.iter().enumerate() {
        let basis = match check.deviation_on_basis {
            Some(dev) => format!(", on basis {:.3e}", dev),
            None => String::new(),
        };
        println!("  proof {}: deviation on inputs {:.3e}{}", k + 1, check.deviation_on_inputs, basis);
    }
    println!(
        "max deviation {:.3e} vs tolerance {:.1e}: {}",
        report.max_deviation,
        report.tolerance,
        if report.passed { "PASS" } else { "FAIL" }
    );
}

fn render_values(values: &[f64]) -> String {
    let body: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", body.join(", "))
}
