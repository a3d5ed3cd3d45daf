use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptychosc::experiments::{parse_f64, write_svd_table};
use ptychosc::{
    add_noise, build_masks, forward_measure, random_signal, relative_error, run_blockpr, run_blockpr_sc, run_sweep,
    run_wirtinger_flow, Algorithm, BlockSvd, Error, ExperimentConfig, MagnitudeMode, WindowKind, WindowSpec,
    WirtingerConfig,
};

#[derive(Parser)]
#[command(name = "ptychosc", version, about = "Ptychographic phase retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Geometry {
    /// Signal length.
    #[arg(long, default_value_t = 64)]
    d: usize,
    /// Window support size.
    #[arg(long, default_value_t = 8)]
    delta: usize,
    /// Window family, `gaussian:<sigma>` or `exp:<a>`.
    #[arg(long, default_value = "gaussian:0.3")]
    window: WindowKind,
}

impl Geometry {
    fn spec(&self) -> ptychosc::Result<WindowSpec> {
        WindowSpec::new(self.window.clone(), self.d, self.delta)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the binned distribution of relative singular values as CSV.
    SvdTable {
        #[command(flatten)]
        geometry: Geometry,
    },
    /// Reconstruct one random signal and print its relative error.
    Recover {
        #[command(flatten)]
        geometry: Geometry,
        /// Truncation threshold relative to the largest singular value.
        #[arg(long, default_value = "0", value_parser = number)]
        epsilon: f64,
        /// Noise level in dB, or `inf` for noiseless data.
        #[arg(long, default_value = "inf", value_parser = number)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One of blockpr, blockpr_sc, wirtinger_flow.
        #[arg(long, default_value = "blockpr_sc")]
        algorithm: Algorithm,
        /// Magnitude estimate, `block` or `diagonal`.
        #[arg(long, default_value = "block")]
        magnitude_mode: MagnitudeMode,
    },
    /// Run a Monte Carlo sweep described by a config file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn number(s: &str) -> Result<f64, String> {
    parse_f64(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> ptychosc::Result<()> {
    match cli.command {
        Command::SvdTable { geometry } => {
            let svd = BlockSvd::new(&geometry.spec()?, 0.0)?;
            write_svd_table(&svd, io::stdout().lock())?;
        }
        Command::Recover {
            geometry,
            epsilon,
            snr,
            seed,
            algorithm,
            magnitude_mode,
        } => {
            let window = geometry.spec()?;
            let masks = build_masks(&window);
            let x0 = random_signal(geometry.d, seed);
            let y = add_noise(&forward_measure(x0.as_slice(), &masks)?, snr, seed.wrapping_add(1))?;
            let (x, complete) = match algorithm {
                Algorithm::BlockPr => (
                    run_blockpr(&y, &BlockSvd::new(&window, epsilon)?, magnitude_mode)?,
                    None,
                ),
                Algorithm::BlockPrSc => {
                    let rec = run_blockpr_sc(&y, &BlockSvd::new(&window, epsilon)?, magnitude_mode)?;
                    (rec.signal, Some(rec.complete))
                }
                Algorithm::WirtingerFlow => (run_wirtinger_flow(&y, &masks, &WirtingerConfig::default())?, None),
            };
            let mut out = io::stdout().lock();
            writeln!(out, "relative_error={:e}", relative_error(&x, &x0)?)?;
            if let Some(c) = complete {
                writeln!(out, "complete={c}")?;
            }
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let result = run_sweep(&cfg)?;
            match out {
                Some(path) => result.save(path)?,
                None => result.write_csv(io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parameter(_) | Error::Dimension(_) | Error::IndexOutOfRange { .. } => 2,
        Error::NoConvergence { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
