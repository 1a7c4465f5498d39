//! Batch front door: generate instances, factorize graph files, verify
//! factorization files.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 pipeline stage
//! failure or verification violations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onefactor::factorizer::{factorize, FactorizeError, PipelineConfig};
use onefactor::instances;
use onefactor::io;
use onefactor::multigraph::Multigraph;
use onefactor::verify;

#[derive(Parser)]
#[command(name = "onefactor", version, about = "1-factorization of dense regular multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file
    Gen {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Factorize a graph file into perfect matchings
    Factorize(FactorizeArgs),
    /// Check a factorization file against its graph file
    Verify {
        /// graph file
        graph: PathBuf,
        /// factorization file
        factorization: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// The extremal family: two complete halves joined by a sparse matching
    Extremal {
        /// half order (odd, >= 3)
        #[arg(long)]
        n: usize,
        /// multiplicity
        #[arg(long)]
        r: usize,
        /// output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Union of d round-robin factors of K_{n2}, each used at most r times
    Factors {
        /// order (even, >= 2)
        #[arg(long)]
        n2: usize,
        /// degree
        #[arg(long)]
        d: usize,
        /// multiplicity cap
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// double-edge shuffle attempts applied after generation
        #[arg(long, default_value_t = 0)]
        swaps: usize,
        /// output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FactorizeArgs {
    /// graph file
    input: PathBuf,
    /// factorization output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// enforce the analytic degree and size preconditions
    #[arg(long)]
    strict: bool,
    /// good-degree cap, default ceil(n^(5/6))
    #[arg(long)]
    gamma: Option<usize>,
    /// residual palette size, default gamma + r + 1
    #[arg(long)]
    residual_palette: Option<usize>,
    /// split deviation cap, default n^(2/3)
    #[arg(long)]
    split_bound: Option<f64>,
    #[arg(long, default_value_t = 50)]
    split_retries: usize,
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &PathBuf) -> Result<Multigraph, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    io::read_graph(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_gen(generator: Generator) -> Result<(), String> {
    match generator {
        Generator::Extremal { n, r, output } => {
            let g = instances::extremal_graph(n, r).map_err(|e| e.to_string())?;
            let comments = vec![format!("extremal n={n} r={r}")];
            emit(&output, &io::write_graph(&g, &comments))
        }
        Generator::Factors { n2, d, r, seed, swaps, output } => {
            let g = instances::regular_from_factors(n2, d, r, seed).map_err(|e| e.to_string())?;
            let g = if swaps > 0 {
                instances::double_edge_shuffle(&g, r, swaps, seed)
            } else {
                g
            };
            let comments = vec![format!("factors n2={n2} d={d} r={r} seed={seed} swaps={swaps}")];
            emit(&output, &io::write_graph(&g, &comments))
        }
    }
}

fn run_factorize(args: FactorizeArgs) -> ExitCode {
    let g = match load_graph(&args.input) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut config = PipelineConfig::for_graph(&g);
    config.seed = args.seed;
    config.split_retries = args.split_retries;
    config.strict_preconditions = args.strict;
    if let Some(gamma) = args.gamma {
        config.good_degree_cap = gamma;
        config.residual_palette = gamma + config.r + 1;
    }
    if let Some(j) = args.residual_palette {
        config.residual_palette = j;
    }
    if let Some(b) = args.split_bound {
        config.split_bound = b;
    }

    match factorize(&g, &config) {
        Ok((f, stats)) => {
            println!("status=ok");
            println!("order={}", stats.order);
            println!("degree={}", stats.degree);
            println!("k={}", stats.k);
            println!("j={}", stats.j);
            println!("split_max_deviation={}", stats.split_max_deviation);
            println!("exchanges={}", stats.exchanges);
            println!("direct_colorings={}", stats.direct_colorings);
            println!("triple_exchanges={}", stats.triple_exchanges);
            println!("residual_edges={}", stats.residual_edges);
            let comments = vec![format!("seed={}", config.seed)];
            let text = io::write_factorization(&g, &f, &comments);
            if let Err(e) = emit(&args.output, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(FactorizeError::Failure(report)) => {
            println!("status=failed");
            println!("stage={}", report.stage);
            println!("detail={}", report.detail);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run_verify(graph: PathBuf, factorization: PathBuf) -> ExitCode {
    let g = match load_graph(&graph) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match std::fs::read_to_string(&factorization) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", factorization.display());
            return ExitCode::from(1);
        }
    };
    let (factors, nv) = match io::read_factorization(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            eprintln!("error: {}: {e}", factorization.display());
            return ExitCode::from(1);
        }
    };
    if nv != g.num_vertices() {
        eprintln!(
            "error: vertex counts differ: graph has {}, factorization declares {nv}",
            g.num_vertices()
        );
        return ExitCode::from(1);
    }
    let report = verify::verify_pairing(&g, &factors);
    if report.ok {
        println!("ok");
        ExitCode::SUCCESS
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { generator } => match run_gen(generator) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Factorize(args) => run_factorize(args),
        Command::Verify { graph, factorization } => run_verify(graph, factorization),
    }
}
