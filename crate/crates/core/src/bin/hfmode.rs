use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hfmode::experiment::output::{self, OutputFile};
use hfmode::experiment::{self, ExperimentConfig, Figure, SweepParameter};
use hfmode::operator::{assemble, Matrix};
use hfmode::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hfmode",
    version,
    about = "Highest-frequency eigenmodes of finite-difference Schrödinger operators"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: config output.path, then $HFMODE_OUT_DIR, then ./out)
    #[arg(long, global = true)]
    out: Option<String>,

    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,

    /// cd or numerov
    #[arg(long, global = true)]
    scheme: Option<String>,

    /// Number of top modes
    #[arg(long, global = true)]
    k: Option<String>,

    /// Oracle grid refinement factor
    #[arg(long, global = true)]
    refine: Option<String>,

    /// Worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[arg(long = "grid.x_min", global = true, allow_hyphen_values = true)]
    grid_x_min: Option<String>,

    #[arg(long = "grid.L", global = true)]
    grid_length: Option<String>,

    #[arg(long = "grid.h", global = true)]
    grid_h: Option<String>,

    /// sech or tabulated
    #[arg(long = "potential.kind", global = true)]
    potential_kind: Option<String>,

    #[arg(long = "potential.A", global = true, allow_hyphen_values = true)]
    potential_amplitude: Option<String>,

    #[arg(long = "potential.w", global = true)]
    potential_width: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Top-k eigenvalues with localization verdicts
    Spectrum {
        /// Also write the stiffness and mass matrices as i,j,value CSV
        #[arg(long)]
        dump_operator: bool,
    },
    /// Data behind the envelope figures
    Reproduce {
        /// fig1 or fig2
        figure: String,
    },
    /// Bound states of the envelope problem, compared with the discrete modes
    Predict,
    /// Localized counts across a parameter range
    Sweep {
        /// A, w or h
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
    },
    /// Amplitude of a resolved mode against the WKB prefactor
    Wkb {
        /// Mode rank (default: highest mode inside the WKB band)
        #[arg(long)]
        rank: Option<usize>,
    },
}

fn build_config(c: &Common) -> Result<ExperimentConfig> {
    let mut config = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = [
        ("grid.x_min", &c.grid_x_min),
        ("grid.L", &c.grid_length),
        ("grid.h", &c.grid_h),
        ("potential.kind", &c.potential_kind),
        ("potential.A", &c.potential_amplitude),
        ("potential.w", &c.potential_width),
        ("scheme", &c.scheme),
        ("k", &c.k),
        ("refine", &c.refine),
        ("output.format", &c.format),
        ("output.path", &c.out),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            config.set(field, v)?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn emit(config: &ExperimentConfig, files: &[OutputFile]) -> Result<()> {
    for path in output::write_all(&config.out_dir(), files)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = build_config(&cli.common)?;
    let format = config.output.format;
    match cli.command {
        Command::Spectrum { dump_operator } => {
            let report = experiment::spectrum(&config)?;
            print!("{}", output::spectrum_table(&report));
            emit(&config, &output::spectrum_files(&report, format))?;
            if dump_operator {
                let op = assemble(config.scheme, &config.potential()?, &config.grid()?)?;
                let dir = config.out_dir();
                for (which, name) in [(Matrix::Stiffness, "stiffness.csv"), (Matrix::Mass, "mass.csv")] {
                    let path = dir.join(name);
                    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                    op.dump_csv(which, BufWriter::new(file))
                        .map_err(|e| Error::io(&path, e))?;
                    eprintln!("wrote {}", path.display());
                }
            }
        }
        Command::Reproduce { figure } => {
            let figure: Figure = figure.parse()?;
            let data = experiment::reproduce(&config, figure)?;
            for m in &data.modes {
                println!(
                    "{} rank {}: lambda = {}, delta_lambda = {}, localized = {}",
                    m.potential,
                    m.rank,
                    output::short(m.lambda),
                    output::short(m.delta_lambda),
                    m.localized
                );
            }
            emit(&config, &output::figure_files(&data, format))?;
        }
        Command::Predict => {
            let report = experiment::run_predict(&config)?;
            println!(
                "bound states: {} (discrete localized: {})",
                report.bound_states.len(),
                report.fd_localized
            );
            for (b, c) in report.bound_states.iter().zip(&report.comparisons) {
                println!(
                    "{:>4}  {:>20}  nodes {}  gap {}  correlation {}",
                    b.rank,
                    output::short(b.delta_lambda_pred),
                    b.node_count,
                    output::short(c.gap),
                    output::short(c.correlation)
                );
            }
            emit(&config, &output::predict_files(&report, format))?;
        }
        Command::Sweep { param, values } => {
            let parameter: SweepParameter = param.parse()?;
            let report = experiment::sweep(&config, parameter, &values, cli.common.workers)?;
            for r in &report.rows {
                println!(
                    "{} = {}: fd {} oracle {} lambda_1 {}",
                    parameter,
                    r.value,
                    r.fd_count,
                    r.oracle_count,
                    output::short(r.lambda_1)
                );
            }
            if let Some(m) = report.monotone {
                println!("monotone: {m}");
            }
            if !report.gap_ratios.is_empty() {
                let ratios: Vec<String> = report.gap_ratios.iter().map(|r| output::short(*r)).collect();
                println!("gap ratios: {}", ratios.join(", "));
            }
            emit(&config, &output::sweep_files(&report, format))?;
        }
        Command::Wkb { rank } => {
            let out = experiment::run_wkb(&config, rank)?;
            let files = output::wkb_files(&out);
            print!("{}", files[0].contents);
            emit(&config, &files)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
