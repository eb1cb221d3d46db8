//! `mpdesign`: optimal two-stage sampling designs for microplastic
//! monitoring, posterior summaries of campaign data, and the data behind the
//! design figures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mpdesign::config::Config;

mod commands;
mod replicate;
mod table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mpdesign", version, about, long_about = None)]
struct Cli {
    /// JSON configuration file (defaults to the built-in baseline).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed, overriding `mc.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Monte Carlo draws per design, overriding `mc.draws`.
    #[arg(long, global = true, value_name = "N")]
    draws: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file (a directory for `replicate`). Without it, results go to
    /// $MPDESIGN_OUT_DIR/<command>.<ext> if that is set, else to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize the number of quadrants.
    ///
    /// CSV columns: m,area,L1_star,E_L2_star,E_L2_se,L_star,L_star_se.
    /// A `# key: value` block before the header gives m_star, the sampled
    /// area, the typical outcome (n, q, n_bar) and its budget split.
    Design,

    /// Second-stage performance of one design over true abundances.
    ///
    /// CSV columns: lambda,n,q,n_bar,L2_star.
    Curves {
        /// Number of quadrants (defaults to the optimal design).
        #[arg(long)]
        m: Option<usize>,
        /// Explicit abundance values, comma separated; replaces the grid.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        lambda: Option<Vec<f64>>,
        /// Upper end of the abundance grid (default 4 x prior mode).
        #[arg(long, value_name = "X")]
        lambda_max: Option<f64>,
        /// Number of evenly spaced grid points over (0, lambda-max].
        #[arg(long, default_value_t = mpdesign::design::DEFAULT_GRID_POINTS)]
        points: usize,
    },

    /// Posterior summaries for a campaign data file.
    ///
    /// Long-format CSV columns: quantity,class,statistic,value. With
    /// --grid-points, density rows follow with the evaluation point in the
    /// statistic column (quantity abundance_density or composition_density).
    Posterior {
        /// Campaign CSV: quadrant_id,suspected_count rows, then optionally
        /// class_name,categorized_count rows.
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Probability mass of the highest posterior density interval.
        #[arg(long, default_value_t = 0.95)]
        hpd_mass: f64,
        /// Also emit posterior densities on this many grid points.
        #[arg(long)]
        grid_points: Option<usize>,
    },

    /// Re-optimize while varying one input.
    ///
    /// CSV columns: value,m_star,typical_n_bar,budget_slack. For axis r2 the
    /// values multiply the configured categorization ratio; for budget they
    /// are quadrant equivalents; for prior-mode they set the abundance prior
    /// mode at fixed shape.
    Sensitivity {
        #[arg(long, value_parser = ["r2", "budget", "prior-mode"])]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true, value_name = "LIST")]
        values: Vec<f64>,
    },

    /// Regenerate the data behind a figure from the built-in configurations.
    ///
    /// Writes CSV files and manifest.json (configuration, seed, draws and a
    /// SHA-256 per file) into the --out directory.
    Replicate {
        #[arg(value_parser = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "all"])]
        figure: String,
    },
}

pub const OUT_DIR_ENV: &str = "MPDESIGN_OUT_DIR";

fn load_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            Config::from_json(&text)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        None => Config::baseline(),
    };
    if let Some(seed) = cli.seed {
        config.design.seed = seed;
    }
    if let Some(draws) = cli.draws {
        config.design.mc_draws = draws;
    }
    config.design.validate()?;
    if config.design.low_draws_warning() {
        eprintln!(
            "warning: {} Monte Carlo draws is low; the expected loss curve may be noisy",
            config.design.mc_draws
        );
    }
    if config.design.cost.budget_warning() {
        eprintln!("warning: the budget does not cover a single quadrant");
    }
    Ok(config)
}

/// Write a single result to --out, the default output directory, or stdout.
fn emit(cli: &Cli, command: &str, contents: &str) -> Result<()> {
    let target = cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| Path::new(&dir).join(format!("{command}.{}", cli.format.extension())))
    });
    match target {
        Some(path) => table::write_atomic(&path, contents),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    if cli.print_config {
        println!("{}", config.to_json_pretty());
        return Ok(());
    }
    let Some(command) = &cli.command else {
        anyhow::bail!("no subcommand given; see `mpdesign --help`");
    };
    let format = cli.format;
    match command {
        Command::Design => emit(cli, "design", &commands::design(&config)?.render(format)?),
        Command::Curves {
            m,
            lambda,
            lambda_max,
            points,
        } => {
            let table = commands::curves(&config, *m, lambda.as_deref(), *lambda_max, *points)?;
            emit(cli, "curves", &table.render(format)?)
        }
        Command::Posterior {
            data,
            hpd_mass,
            grid_points,
        } => {
            let table = commands::posterior(&config, data, *hpd_mass, *grid_points)?;
            emit(cli, "posterior", &table.render(format)?)
        }
        Command::Sensitivity { axis, values } => {
            let table = commands::sensitivity(&config, axis, values)?;
            emit(cli, "sensitivity", &table.render(format)?)
        }
        Command::Replicate { figure } => {
            let dir = cli
                .out
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("replication"));
            let files = replicate::replicate(figure, &config.design, &dir)?;
            eprintln!("wrote {} files to {}", files, dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
