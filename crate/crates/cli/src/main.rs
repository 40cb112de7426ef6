//! `spiderwalk`: Grover walks on spidernets from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use spiderwalk::reduction::PqParams;
use spiderwalk::spidernet::SpidernetParams;

use commands::{Model, FIGURE_RANGE};
use output::{render, resolve_output, write_text, Format};

#[derive(Parser, Debug)]
#[command(name = "spiderwalk", version, about = "Grover walks on spidernets and their free Meixner spectra")]
struct Cli {
    /// Output format for tables.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write to this file instead of stdout. Relative paths resolve against the output directory.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Directory for relative `--output` paths.
    #[arg(long, env = "SPIDERWALK_OUTPUT_DIR", global = true, hide_env_values = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// `A B C` positionally, or `--pqr P Q R`.
#[derive(Args, Debug)]
struct ModelArgs {
    /// Spidernet parameters a b c.
    #[arg(num_args = 3, value_names = ["A", "B", "C"], required_unless_present = "pqr")]
    abc: Option<Vec<usize>>,

    /// Raw ladder-walk parameters p q r.
    #[arg(long, num_args = 3, value_names = ["P", "Q", "R"], conflicts_with = "abc", allow_negative_numbers = true)]
    pqr: Option<Vec<f64>>,
}

impl ModelArgs {
    fn model(&self) -> Result<Model> {
        match (&self.abc, &self.pqr) {
            (Some(v), None) => Ok(Model::Spidernet(SpidernetParams::new(v[0], v[1], v[2])?)),
            (None, Some(v)) => Ok(Model::Pq(PqParams::with_r(v[0], v[1], v[2])?)),
            _ => bail!("give either A B C or --pqr P Q R"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Origin and stratum probabilities of the isotropic walk.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        steps: usize,
        /// Evolve the full graph of radius steps + 2.
        #[arg(long, conflicts_with = "reduced")]
        full: bool,
        /// Evolve the ladder walk (default).
        #[arg(long)]
        reduced: bool,
        /// Number of strata V_1..V_L to report.
        #[arg(long, default_value_t = 3)]
        strata: usize,
    },
    /// Eigenphases of the cutoff ladder walk U_N.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        cutoff: usize,
    },
    /// <Ψ_l, Uⁿ Ψ_m> from the spectral integral and from the ladder walk.
    Amplitude {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long)]
        n_max: usize,
        /// Quadrature nodes; chosen from the integrand when absent.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Localization constants, for one spidernet or a sweep over (b, c).
    Localize {
        #[arg(num_args = 3, value_names = ["A", "B", "C"], required_unless_present_any = ["pqr", "sweep"])]
        abc: Option<Vec<usize>>,
        #[arg(long, num_args = 3, value_names = ["P", "Q", "R"], conflicts_with = "abc")]
        pqr: Option<Vec<f64>>,
        /// Sweep 2 <= b <= BMAX, 1 <= c <= min(CMAX, b-1).
        #[arg(long, num_args = 2, value_names = ["BMAX", "CMAX"], conflicts_with_all = ["abc", "pqr"])]
        sweep: Option<Vec<usize>>,
    },
    /// Return probability on S(4,6,3) against the envelope (1/4)cos²(nθ).
    Figure2 {
        #[arg(long, default_value_t = FIGURE_RANGE.0)]
        from: usize,
        #[arg(long, default_value_t = FIGURE_RANGE.1)]
        to: usize,
    },
    /// Return probabilities ∫λⁿ dμ of the isotropic random walk.
    Rwalk {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Run a quick self-test of the library.
    Verify,
    /// Edge list of the truncated spidernet, one `u v` pair per line.
    Graph {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        radius: usize,
    },
}

/// Runs the command and returns whether it succeeded.
fn run(cli: Cli) -> Result<bool> {
    let output = cli.output.as_deref().map(|p| resolve_output(p, cli.output_dir.as_deref()));
    let mut ok = true;
    let text = match cli.command {
        Command::Simulate { model, steps, full, strata, .. } => {
            render(&commands::simulate(model.model()?, steps, strata, full)?, cli.format)
        }
        Command::Spectrum { model, cutoff } => render(&commands::spectrum(model.model()?, cutoff)?, cli.format),
        Command::Amplitude { model, l, m, n_max, nodes } => {
            render(&commands::amplitude(model.model()?, l, m, n_max, nodes)?, cli.format)
        }
        Command::Localize { abc, pqr, sweep } => {
            let table = match sweep {
                Some(s) => commands::localize_sweep(s[0], s[1])?,
                None => commands::localize(ModelArgs { abc, pqr }.model()?)?,
            };
            render(&table, cli.format)
        }
        Command::Figure2 { from, to } => render(&commands::figure2(from, to)?, cli.format),
        Command::Rwalk { model, n_max, nodes } => render(&commands::rwalk(model.model()?, n_max, nodes)?, cli.format),
        Command::Verify => {
            let (table, passed) = commands::verify()?;
            ok = passed;
            render(&table, cli.format)
        }
        Command::Graph { model, radius } => commands::graph(model.model()?, radius)?,
    };
    write_text(&text, output.as_deref())?;
    Ok(ok)
}

fn error_json(err: &anyhow::Error) -> String {
    let kind = err.downcast_ref::<spiderwalk::Error>().map_or("Error", |e| e.kind());
    let message = format!("{err:#}");
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::from(1)
        }
    }
}
