mod commands;
mod demo;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{CliError, Out};

/// Labelled forests, the Grossman–Larson Hopf algebra, free generator bases
/// and branched rough path numerics.
#[derive(Parser, Debug)]
#[command(name = "branched", version)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap the number of worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate labelled rooted trees or forests.
    #[command(subcommand)]
    Trees(TreesCmd),
    /// Products and coproducts in the forest Hopf algebra.
    #[command(subcommand)]
    Hopf(HopfCmd),
    /// Free generator bases.
    #[command(subcommand)]
    Basis(BasisCmd),
    /// Rewrite a series as ⋆-words in the generators.
    Rewrite(RewriteArgs),
    /// Simulate sample paths.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Lift sample paths to branched rough paths.
    #[command(subcommand)]
    Lift(LiftCmd),
    /// Signature of a lifted path.
    Sig(SigArgs),
    /// Expected signature of Brownian motion.
    #[command(subcommand)]
    Esig(EsigCmd),
    /// Rough differential equations.
    #[command(subcommand)]
    Rde(RdeCmd),
    /// Unitary representations and characteristic functions.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Scripted end-to-end walkthroughs.
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Subcommand, Debug)]
pub enum TreesCmd {
    /// List all trees (or forests) with exactly `--nodes` nodes.
    Enum {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        labels: u32,
        /// Enumerate forests instead of trees.
        #[arg(long)]
        forests: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum HopfCmd {
    /// `a ⋆ b`.
    Star {
        a: String,
        b: String,
        /// Truncate the product at this many nodes.
        #[arg(long)]
        level: Option<usize>,
    },
    /// The coproduct δ(a).
    Cop { a: String },
    /// `exp_⋆(a)` truncated at `--level`.
    Exp {
        a: String,
        #[arg(long)]
        level: usize,
    },
    /// `log_⋆(g)` truncated at `--level`.
    Log {
        g: String,
        #[arg(long)]
        level: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum BasisCmd {
    /// Compute free generators and their rewrite tables.
    Gen {
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        labels: u32,
        /// Write the basis as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct BasisSource {
    /// Load the basis from a JSON file.
    #[arg(long, conflicts_with_all = ["max_degree", "labels"])]
    basis: Option<PathBuf>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    labels: Option<u32>,
}

#[derive(Args, Debug)]
pub struct RewriteArgs {
    /// Series or forest in text form.
    series: String,
    #[command(flatten)]
    source: BasisSource,
}

#[derive(Subcommand, Debug)]
pub enum SimCmd {
    /// Brownian motion sampled exactly on a uniform grid of [0, 1].
    Bm {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        steps: usize,
        /// Covariance rows separated by `;`, entries by `,` (default identity).
        #[arg(long)]
        cov: Option<String>,
        #[arg(long)]
        seed: u64,
        /// Total time represented by the grid.
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Write path.json here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct PathLiftArgs {
    /// path.json produced by `sim bm`.
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value = "5/2")]
    p: String,
    /// Round sample values to multiples of 2^-bits before lifting.
    #[arg(long, default_value_t = 16)]
    bits: i32,
}

#[derive(Subcommand, Debug)]
pub enum LiftCmd {
    /// Itô lift at level 2, p in (2, 3).
    Ito {
        #[command(flatten)]
        from: PathLiftArgs,
        /// Write lift.json here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SigArgs {
    #[arg(long)]
    level: usize,
    /// lift.json produced by `lift ito`.
    #[arg(long, conflicts_with = "path")]
    lift: Option<PathBuf>,
    /// path.json to lift on the fly (Itô lift).
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long, default_value = "5/2")]
    p: String,
    #[arg(long, default_value_t = 16)]
    bits: i32,
    /// Also compute the signature in the tensor algebra and compare.
    #[arg(long)]
    check: bool,
    /// Write sig.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BmLaw {
    /// Covariance rows separated by `;`, entries by `,`; rationals allowed.
    #[arg(long)]
    cov: String,
    #[arg(long, default_value = "1")]
    t: String,
}

#[derive(Subcommand, Debug)]
pub enum EsigCmd {
    /// Closed form `exp_⋆(tL)`.
    Closed {
        #[command(flatten)]
        law: BmLaw,
        #[arg(long)]
        level: usize,
    },
    /// Monte Carlo estimate compared with the closed form.
    Mc {
        #[command(flatten)]
        law: BmLaw,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        /// Fail (exit 5) when a coefficient is further than this many
        /// standard errors from the closed form.
        #[arg(long, default_value_t = 4.0)]
        band: f64,
    },
    /// Word-length profile of the sub-multiplicative seminorm on ESig.
    Bound {
        #[command(flatten)]
        law: BmLaw,
        /// Scale K.
        #[arg(long, default_value_t = 2.0)]
        big_k: f64,
        /// Generator cutoff k.
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Draw signatures of lifted Brownian paths into sigs.json.
    Sample {
        #[command(flatten)]
        law: BmLaw,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum RdeCmd {
    /// Branched and geometric Euler schemes on the same driver.
    ///
    /// Both run in exact rational arithmetic. With nonlinear fields the size
    /// of the iterates grows geometrically in the number of steps, so keep
    /// drivers short or coarsen them with `--bits`.
    Compare {
        /// path.json used as the driver (Itô lift).
        #[arg(long)]
        driver: PathBuf,
        /// fields.json with one polynomial vector field per driver component.
        #[arg(long)]
        fields: PathBuf,
        #[arg(long, default_value = "5/2")]
        p: String,
        /// Initial state, comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        y0: String,
        #[arg(long, default_value_t = 16)]
        bits: i32,
    },
}

#[derive(Subcommand, Debug)]
pub enum FourierCmd {
    /// Sample mean of `U(g)` over a signature sample.
    Eval {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        sigs: PathBuf,
    },
    /// Compare two signature samples through one or more representations.
    Compare {
        /// rep.json, repeatable.
        #[arg(long, required = true)]
        rep: Vec<PathBuf>,
        #[arg(long)]
        sigs: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        band: f64,
    },
    /// Random anti-Hermitian representation written as rep.json.
    Random {
        #[arg(long)]
        dim: usize,
        /// Generator indices, comma separated.
        #[arg(long)]
        generators: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// Basic identity, the d = 2 basis, the Itô/Stratonovich decomposition
    /// of a simulated path, and the expected signature table.
    Section6 {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    let out = Out { json: cli.json };
    match cli.command {
        Command::Trees(c) => commands::trees(&out, c),
        Command::Hopf(c) => commands::hopf(&out, c),
        Command::Basis(c) => commands::basis(&out, c),
        Command::Rewrite(a) => commands::rewrite(&out, a),
        Command::Sim(c) => commands::sim(&out, c),
        Command::Lift(c) => commands::lift(&out, c),
        Command::Sig(a) => commands::sig(&out, a),
        Command::Esig(c) => commands::esig(&out, c),
        Command::Rde(c) => commands::rde(&out, c),
        Command::Fourier(c) => commands::fourier(&out, c),
        Command::Demo(DemoCmd::Section6 { seed, steps, samples }) => demo::section6(&out, seed, steps, samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
