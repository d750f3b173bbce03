//! `gboost`: build, enhance, score and evaluate grammar graphs.
//!
//! Exit codes: 0 success, 1 usage (bad flags, missing files, I/O), 2 input
//! format, 3 invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gboost::atomic::write_atomic;
use gboost::sweep::{baseline_json, baseline_tsv};
use gboost::{
    read_cases, read_fst, read_pairs, read_symbols, sweep, write_diff, write_fst, write_symbols,
    Weights,
};
use gboost_core::{build_g, diff, enhance_in_place, parse_arpa, run_ranking, GraphScorer, Wfst};

#[derive(Parser)]
#[command(
    name = "gboost",
    version,
    about = "Similar-pair enhancement of n-gram grammar graphs"
)]
struct Cli {
    /// Weight sign convention of FST files.
    #[arg(long, global = true, env = "GBOOST_WEIGHTS", default_value = "logprob")]
    weights: Weights,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Errors only.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an ARPA model into a grammar graph.
    BuildG {
        #[arg(long)]
        arpa: PathBuf,
        #[arg(long)]
        out_fst: PathBuf,
        #[arg(long)]
        out_syms: PathBuf,
    },
    /// Add or raise target-word arcs from similar-pair groups.
    Enhance {
        #[command(flatten)]
        input: GraphIn,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out_fst: PathBuf,
        #[arg(long)]
        out_syms: PathBuf,
        #[arg(long)]
        diff: PathBuf,
    },
    /// Score sentences, one per line: `<logprob>\t<sentence>`.
    Score {
        #[arg(long)]
        fst: PathBuf,
        #[arg(long)]
        syms: PathBuf,
        #[arg(long)]
        text: PathBuf,
    },
    /// Focus-token ranking, optionally over a theta x ChNum grid.
    Eval {
        #[arg(long)]
        fst: PathBuf,
        #[arg(long)]
        syms: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Comma-separated; defaults to the pairs file's theta.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            requires = "pairs"
        )]
        theta_list: Vec<f64>,
        /// Comma-separated; defaults to the pairs file's max_predictors.
        #[arg(long, value_delimiter = ',', requires = "pairs")]
        chnum_list: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the arc differences between two graphs.
    DiffFst {
        #[arg(long)]
        before_fst: PathBuf,
        #[arg(long)]
        before_syms: PathBuf,
        #[arg(long)]
        after_fst: PathBuf,
        #[arg(long)]
        after_syms: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphIn {
    #[arg(long)]
    in_fst: PathBuf,
    #[arg(long)]
    in_syms: PathBuf,
}

enum Failure {
    Usage(String),
    Format(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Format(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Format(m) | Failure::Invariant(m) => m,
        }
    }
}

type Run<T> = Result<T, Failure>;

fn format_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Format(format!("{}: {e}", path.display()))
}

fn invariant(e: impl std::fmt::Display) -> Failure {
    Failure::Invariant(e.to_string())
}

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Run<()> {
    write_atomic(path, contents.as_bytes())
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_graph(fst: &Path, syms: &Path, weights: Weights) -> Run<Wfst> {
    let table = read_symbols(&read(syms)?).map_err(|e| format_err(syms, e))?;
    read_fst(&read(fst)?, table, weights).map_err(|e| format_err(fst, e))
}

fn save_graph(g: &Wfst, fst: &Path, syms: &Path, weights: Weights) -> Run<()> {
    let text = write_fst(g, weights).map_err(invariant)?;
    write(syms, &write_symbols(g.symbols()))?;
    write(fst, &text)
}

fn inputs(cmd: &Command) -> Vec<&Path> {
    match cmd {
        Command::BuildG { arpa, .. } => vec![arpa],
        Command::Enhance { input, pairs, .. } => vec![&input.in_fst, &input.in_syms, pairs],
        Command::Score { fst, syms, text } => vec![fst, syms, text],
        Command::Eval {
            fst,
            syms,
            cases,
            pairs,
            ..
        } => {
            let mut v: Vec<&Path> = vec![fst, syms, cases];
            v.extend(pairs.as_deref());
            v
        }
        Command::DiffFst {
            before_fst,
            before_syms,
            after_fst,
            after_syms,
            ..
        } => vec![before_fst, before_syms, after_fst, after_syms],
    }
}

fn run(cli: Cli) -> Run<()> {
    if let Some(missing) = inputs(&cli.command).into_iter().find(|p| !p.is_file()) {
        return Err(Failure::Usage(format!(
            "input file {} does not exist",
            missing.display()
        )));
    }
    let weights = cli.weights;
    match cli.command {
        Command::BuildG {
            arpa,
            out_fst,
            out_syms,
        } => {
            let model = parse_arpa(&read(&arpa)?).map_err(|e| format_err(&arpa, e))?;
            let (g, _) = build_g(&model).map_err(invariant)?;
            log::info!("{} states, {} arcs", g.num_states(), g.num_arcs());
            save_graph(&g, &out_fst, &out_syms, weights)
        }
        Command::Enhance {
            input,
            pairs,
            out_fst,
            out_syms,
            diff,
        } => {
            let mut g = load_graph(&input.in_fst, &input.in_syms, weights)?;
            let cfg = read_pairs(&read(&pairs)?).map_err(|e| format_err(&pairs, e))?;
            let out = enhance_in_place(&mut g, &cfg).map_err(invariant)?;
            if out.above_source > 0 {
                log::warn!(
                    "{} candidate arcs are more probable than the predictor arc they came from (theta = {})",
                    out.above_source,
                    cfg.theta
                );
            }
            log::info!(
                "{} arcs added, {} raised, {} new words",
                out.diff.added_arcs.len(),
                out.diff.reweighted_arcs.len(),
                out.diff.added_symbols.len()
            );
            save_graph(&g, &out_fst, &out_syms, weights)?;
            write(&diff, &write_diff(&out.diff, &g, weights))
        }
        Command::Score { fst, syms, text } => {
            let g = load_graph(&fst, &syms, weights)?;
            let scorer = GraphScorer::new(&g);
            let mut out = String::new();
            for (i, line) in read(&text)?.lines().enumerate() {
                let words: Vec<&str> = line.split_whitespace().collect();
                let s = scorer.score(&words).map_err(|e| {
                    Failure::Invariant(format!("{} line {}: {e}", text.display(), i + 1))
                })?;
                out.push_str(&format!(
                    "{}\t{}\n",
                    gboost::format_weight(s),
                    words.join(" ")
                ));
            }
            print!("{out}");
            Ok(())
        }
        Command::Eval {
            fst,
            syms,
            cases,
            pairs,
            theta_list,
            chnum_list,
            out,
        } => {
            let g = load_graph(&fst, &syms, weights)?;
            let cases_v = read_cases(&read(&cases)?).map_err(|e| format_err(&cases, e))?;
            fs::create_dir_all(&out)
                .map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            let (tsv, json) = match pairs {
                None => {
                    let r = run_ranking(&g, &cases_v).map_err(|e| format_err(&cases, e))?;
                    (baseline_tsv(&r), baseline_json(&r))
                }
                Some(p) => {
                    let cfg = read_pairs(&read(&p)?).map_err(|e| format_err(&p, e))?;
                    let thetas = if theta_list.is_empty() {
                        vec![cfg.theta]
                    } else {
                        theta_list
                    };
                    let chnums = if chnum_list.is_empty() {
                        vec![cfg.max_predictors]
                    } else {
                        chnum_list
                    };
                    let grid = sweep(&g, &cfg, &thetas, &chnums, &cases_v)
                        .map_err(|e| format_err(&cases, e))?;
                    for c in &grid.cells {
                        if let gboost::CellOutcome::Failed(m) = &c.outcome {
                            log::error!("cell theta={} ChNum={}: {m}", c.theta, c.chnum);
                        }
                        if c.above_source > 0 {
                            log::warn!(
                                "cell theta={} ChNum={}: {} candidates beat their predictor arc",
                                c.theta,
                                c.chnum,
                                c.above_source
                            );
                        }
                    }
                    (grid.to_tsv(), grid.to_json())
                }
            };
            write(&out.join("report.tsv"), &tsv)?;
            write(&out.join("cases.json"), &json)?;
            print!("{tsv}");
            Ok(())
        }
        Command::DiffFst {
            before_fst,
            before_syms,
            after_fst,
            after_syms,
            out,
        } => {
            let before = load_graph(&before_fst, &before_syms, weights)?;
            let after = load_graph(&after_fst, &after_syms, weights)?;
            let d = diff(&before, &after).map_err(invariant)?;
            let text = write_diff(&d, &after, weights);
            match out {
                Some(p) => write(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
