use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dtw_core::chain::min_width_via_chains_capped;
use dtw_core::decomp::{ordering_to_decomposition, ordering_width};
use dtw_core::dp::{solve, Verdict};
use dtw_core::families::{generate, Family};
use dtw_core::game::treewidth_via_game;
use dtw_core::oracle::brute_force_truth;
use dtw_core::proof::{check_refutation, PosetCheck};
use dtw_core::{parse_qdimacs, DependencyPoset, EliminationOrdering, Error, PrimalGraph, QbfInstance};

const EXIT_TRUE: u8 = 10;
const EXIT_FALSE: u8 = 20;

/// Algorithms for bounded dependency treewidth of QBF instances.
///
/// Poset files are trusted: only the prefix order is checked, not whether
/// reordering along the poset preserves the truth value.
#[derive(Parser)]
#[command(name = "dtw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an instance along a minimum-width dependency elimination ordering.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        width: WidthArgs,
        /// Write a Q-resolution refutation here when the instance is false.
        #[arg(long, value_name = "OUT")]
        proof: Option<PathBuf>,
        /// Write the elimination ordering used.
        #[arg(long, value_name = "OUT")]
        ordering: Option<PathBuf>,
    },
    /// Print the dependency treewidth.
    Width {
        input: PathBuf,
        #[command(flatten)]
        width: WidthArgs,
    },
    /// Print a minimum-width dependency tree decomposition in `s td` format.
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        width: WidthArgs,
    },
    /// Check a refutation in `dqrp` format.
    Check {
        input: PathBuf,
        proof: PathBuf,
        /// Also require the proof ordering to be compatible with this poset.
        #[arg(long, value_name = "FILE")]
        poset: Option<PathBuf>,
    },
    /// Decide an instance by exhaustive expansion (at most 20 variables).
    Oracle { input: PathBuf },
    /// Print a member of a benchmark family in QDIMACS format.
    Gen {
        family: String,
        index: usize,
        /// Write the family's refined poset here, if it has one.
        #[arg(long, value_name = "FILE")]
        poset_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct WidthArgs {
    /// Dependency poset file with `u v` lines meaning u ≤ v.
    #[arg(long, value_name = "FILE", conflicts_with = "scheme")]
    poset: Option<PathBuf>,
    /// Dependency scheme used when no poset file is given.
    #[arg(long, value_enum, default_value_t = Scheme::Trivial)]
    scheme: Scheme,
    #[arg(long, value_enum, default_value_t = Algo::Auto)]
    algo: Algo,
    /// Give up above this width.
    #[arg(long, value_name = "W")]
    max_width: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Trivial,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Game,
    Chain,
    Auto,
}

const AUTO_CHAIN_LIMIT: usize = 4;

enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(
                Error::InvalidDecomposition(_)
                | Error::InvalidStrategy(_)
                | Error::RobberWins
                | Error::Precondition(_)
                | Error::Incompatible { .. },
            ) => Failure::Internal(e),
            _ => Failure::Input(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<QbfInstance> {
    let text = read_input(path)?;
    let (instance, _) = parse_qdimacs(&text).with_context(|| path.display().to_string())?;
    Ok(instance)
}

fn load_poset(path: &Path, instance: &QbfInstance) -> anyhow::Result<DependencyPoset> {
    let text = read_input(path)?;
    DependencyPoset::parse(&text, instance).with_context(|| path.display().to_string())
}

fn select_poset(args: &WidthArgs, instance: &QbfInstance) -> anyhow::Result<DependencyPoset> {
    match (&args.poset, args.scheme) {
        (Some(path), _) => load_poset(path, instance),
        (None, Scheme::Trivial) => Ok(DependencyPoset::trivial(instance)),
    }
}

struct WidthReport {
    width: Option<usize>,
    ordering: Option<EliminationOrdering>,
    algo: &'static str,
    cap: usize,
}

fn compute_width(g: &PrimalGraph, p: &DependencyPoset, args: &WidthArgs) -> anyhow::Result<WidthReport> {
    let cap = args.max_width.unwrap_or(g.len().saturating_sub(1));
    let use_chain = match args.algo {
        Algo::Chain => true,
        Algo::Game => false,
        Algo::Auto => p.width() <= AUTO_CHAIN_LIMIT,
    };
    if use_chain {
        let res = min_width_via_chains_capped(g, p, cap)?;
        Ok(WidthReport {
            width: res.width,
            ordering: res.ordering,
            algo: "chain",
            cap,
        })
    } else {
        let res = treewidth_via_game(g, p, cap)?;
        Ok(WidthReport {
            width: res.width,
            ordering: res.ordering,
            algo: "game",
            cap,
        })
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn run_solve(
    input: &Path,
    args: &WidthArgs,
    proof_out: Option<&Path>,
    ordering_out: Option<&Path>,
    out: &mut String,
) -> Outcome {
    let instance = load_instance(input)?;
    let poset = select_poset(args, &instance)?;
    let g = PrimalGraph::from_instance(&instance);
    let report = compute_width(&g, &poset, args)?;
    let ordering = match (&report.width, report.ordering) {
        (Some(w), Some(o)) => {
            writeln!(out, "c width {w} ({})", report.algo).unwrap();
            o
        }
        _ => {
            // The reversed prefix is always compatible with a prefix-respecting poset.
            let o = EliminationOrdering::new(instance.prefix().iter().rev().map(|&(v, _)| v).collect());
            let w = ordering_width(&g, &o).map_err(anyhow::Error::from)?;
            writeln!(out, "c width > {} ({}); using reversed prefix of width {w}", report.cap, report.algo).unwrap();
            o
        }
    };
    writeln!(out, "c ordering {}", join(ordering.as_slice())).unwrap();
    let outcome = solve(&instance, &poset, &ordering).map_err(anyhow::Error::from)?;
    let stats = &outcome.stats;
    writeln!(
        out,
        "c clauses input {} total {} max-live {} max-length {}",
        stats.input_clauses, stats.total_clauses, stats.max_clauses, stats.max_clause_width
    )
    .unwrap();
    if let Some(path) = ordering_out {
        write_file(path, &format!("{ordering}\n"))?;
    }
    match outcome.verdict {
        Verdict::True => {
            out.push_str("s TRUE\n");
            Ok(EXIT_TRUE)
        }
        Verdict::False => {
            if let (Some(path), Some(proof)) = (proof_out, &outcome.refutation) {
                write_file(path, &proof.to_text())?;
            }
            out.push_str("s FALSE\n");
            Ok(EXIT_FALSE)
        }
    }
}

fn run_width(input: &Path, args: &WidthArgs, out: &mut String) -> Outcome {
    let instance = load_instance(input)?;
    let poset = select_poset(args, &instance)?;
    let g = PrimalGraph::from_instance(&instance);
    let report = compute_width(&g, &poset, args)?;
    match report.width {
        Some(w) => writeln!(out, "{w}").unwrap(),
        None => writeln!(out, "> {}", report.cap).unwrap(),
    }
    Ok(0)
}

fn run_decompose(input: &Path, args: &WidthArgs, out: &mut String) -> Outcome {
    let instance = load_instance(input)?;
    let poset = select_poset(args, &instance)?;
    let g = PrimalGraph::from_instance(&instance);
    let report = compute_width(&g, &poset, args)?;
    let Some(ordering) = report.ordering else {
        return Err(Failure::Input(anyhow!("dependency treewidth exceeds {}", report.cap)));
    };
    let td = ordering_to_decomposition(&g, &poset, &ordering).map_err(anyhow::Error::from)?;
    writeln!(out, "c ordering {}", join(ordering.as_slice())).unwrap();
    out.push_str(&td.to_text(g.len()));
    Ok(0)
}

fn run_check(input: &Path, proof: &Path, poset: Option<&Path>, out: &mut String) -> Outcome {
    let instance = load_instance(input)?;
    let poset = poset.map(|p| load_poset(p, &instance)).transpose()?;
    let text = read_input(proof)?;
    let report = match check_refutation(&instance, &text, poset.as_ref()) {
        Ok(report) => report,
        Err(e) => {
            writeln!(out, "c {}: {e}", proof.display()).unwrap();
            out.push_str("s REJECTED\n");
            return Ok(1);
        }
    };
    for problem in &report.problems {
        writeln!(out, "c {problem}").unwrap();
    }
    if let PosetCheck::Incompatible { later, earlier } = report.poset {
        writeln!(out, "c ordering eliminates {earlier} before {later}, against the poset").unwrap();
    }
    if report.verified() {
        out.push_str("s VERIFIED\n");
        Ok(0)
    } else {
        out.push_str("s REJECTED\n");
        Ok(1)
    }
}

fn run_oracle(input: &Path, out: &mut String) -> Outcome {
    let instance = load_instance(input)?;
    if brute_force_truth(&instance).map_err(anyhow::Error::from)? {
        out.push_str("s TRUE\n");
        Ok(EXIT_TRUE)
    } else {
        out.push_str("s FALSE\n");
        Ok(EXIT_FALSE)
    }
}

fn run_gen(family: &str, index: usize, poset_out: Option<&Path>, out: &mut String) -> Outcome {
    let family: Family = family.parse().map_err(anyhow::Error::from)?;
    let (instance, poset) = generate(family, index).map_err(anyhow::Error::from)?;
    out.push_str(&instance.to_qdimacs());
    if let Some(path) = poset_out {
        match poset {
            Some(p) => write_file(path, &p.to_text())?,
            None => eprintln!("c family {family} has no refined poset; {} not written", path.display()),
        }
    }
    Ok(0)
}

fn join(vars: &[u32]) -> String {
    vars.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli, out: &mut String) -> Outcome {
    match cli.command {
        Command::Solve {
            input,
            width,
            proof,
            ordering,
        } => run_solve(&input, &width, proof.as_deref(), ordering.as_deref(), out),
        Command::Width { input, width } => run_width(&input, &width, out),
        Command::Decompose { input, width } => run_decompose(&input, &width, out),
        Command::Check { input, proof, poset } => run_check(&input, &proof, poset.as_deref(), out),
        Command::Oracle { input } => run_oracle(&input, out),
        Command::Gen {
            family,
            index,
            poset_out,
        } => run_gen(&family, index, poset_out.as_deref(), out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = String::new();
    let result = run(cli, &mut out);
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}
