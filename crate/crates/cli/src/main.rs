//! `cubic`: census, torsion, Heegner-point and constant reports on the
//! command line.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cubic_core::asymptotics::Theorem;
use cubic_core::{Scope, Sign};

use commands::Route;
use output::Format;

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "cubic", version, about = "Cubic field counts and their companions")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Cache directory for enumerated forms (default from CUBIC_CACHE_DIR).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical form classes with 0 < +-disc < X.
    Fields {
        #[arg(long, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long)]
        max_disc: u64,
        /// Include reducible classes.
        #[arg(long)]
        all: bool,
    },
    /// Cubic field counts by residue class of the discriminant.
    Census {
        #[arg(long, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long)]
        max_disc: u64,
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Residue-class tables mod 5 and 7 for totally real fields.
    Tables {
        #[arg(long, default_value_t = 2_000_000)]
        max_disc: u64,
        /// Compare against the embedded reference tables at 2e6.
        #[arg(long)]
        reproduce_paper: bool,
    },
    /// 3-torsion of quadratic class groups per fundamental discriminant.
    Torsion {
        #[arg(long, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long)]
        max_disc: u64,
        #[arg(long, value_enum, default_value = "both")]
        route: Route,
    },
    /// Ideals with principal k-th power and their Heegner points.
    Hough {
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long)]
        max_d: u64,
        #[arg(long, default_value_t = 200)]
        norm_bound: u64,
        /// Count points in the region Im z > 1/Y.
        #[arg(long)]
        region: Option<f64>,
        /// Vertical histogram with this many bins.
        #[arg(long)]
        histogram: Option<usize>,
    },
    /// Absolute sums of the dual nonmaximality indicator.
    Phihat {
        #[arg(long, value_delimiter = ',', default_value = "2,5,7,10,14")]
        q: Vec<u64>,
    },
    /// Special values with error bounds, as JSON.
    Constants {
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
    /// Least-squares A X + B X^(5/6) fit of an `X,count` file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Compare with the formula coefficients for this sign.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<Sign>,
        #[arg(long, default_value = "cubic")]
        theorem: Theorem,
    },
    /// Check the nonmaximality identity at p.
    BstCheck {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long)]
        max_disc: u64,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            anyhow::bail!(cubic_core::Error::InvalidArgument("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cache = commands::cache_dir(cli.cache.as_deref());
    let cache = cache.as_deref();
    let text = match cli.command {
        Command::Constants { precision } => {
            let text = commands::constants(precision)?;
            return emit(cli.output, &text).map(|_| true);
        }
        Command::Fields { sign, max_disc, all } => {
            let scope = if all { Scope::All } else { Scope::Irreducible };
            commands::fields(sign, max_disc, scope, cache)?
        }
        Command::Census { sign, max_disc, modulus } => {
            commands::census_cmd(sign, max_disc, modulus, cache)?
        }
        Command::Tables { max_disc, reproduce_paper } => {
            commands::tables(max_disc, reproduce_paper, cache)?
        }
        Command::Torsion { sign, max_disc, route } => {
            commands::torsion(sign, max_disc, route, cache)?
        }
        Command::Hough { k, max_d, norm_bound, region, histogram } => {
            commands::hough(k, max_d, norm_bound, region, histogram)?
        }
        Command::Phihat { q } => commands::phihat(&q)?,
        Command::Fit { input, sign, theorem } => commands::fit(&input, sign.map(|s| (s, theorem)))?,
        Command::BstCheck { p, sign, max_disc } => commands::bst_check(p, sign, max_disc)?,
    };
    emit(cli.output, &text.table.render(cli.format))?;
    Ok(text.verified)
}

fn emit(path: Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<cubic_core::Error>() {
        Some(cubic_core::Error::Internal(_)) => EXIT_MISMATCH,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification mismatch");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
