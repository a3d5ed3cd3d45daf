//! Reconstruction pipelines and the Monte Carlo harness.

mod config;
mod sweep;
mod wirtinger;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::completion::{complete, extract_known_coefficients};
use crate::error::{Error, Result};
use crate::masks::MeasurementGrid;
use crate::signal::{inner, norm, phase, Signal};
use crate::spectral::BlockSvd;
use crate::sync::{assemble_signal_with, MagnitudeMode, PowerIteration};

pub use config::{parse_f64, ExperimentConfig};
pub use sweep::{run_sweep, svd_table_csv, write_svd_table, SweepResult, SweepRow};
pub use wirtinger::{run_wirtinger_flow, WirtingerConfig};

/// i.i.d. entries with real and imaginary parts drawn from `N(0, 1/2)`.
pub fn random_signal(d: usize, seed: u64) -> Signal {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..d)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    Signal::new(v).expect("finite entries")
}

/// `min_θ ‖x - e^{iθ} x0‖ / ‖x0‖`
pub fn relative_error(x: &Signal, x0: &Signal) -> Result<f64> {
    if x.len() != x0.len() {
        return Err(Error::Dimension("signals differ in length".into()));
    }
    let n0 = x0.norm();
    if n0 == 0.0 {
        return Err(Error::ZeroReference);
    }
    let p = phase(inner(x.as_slice(), x0.as_slice()));
    let diff: Vec<Complex64> = x.iter().zip(x0.iter()).map(|(a, b)| a - b * p).collect();
    Ok(norm(&diff) / n0)
}

/// Independent seed for slot `slot` of trial `trial`, taken from a separate
/// ChaCha stream per trial so that trials can run in any order.
pub fn derive_seed(master: u64, trial: u64, slot: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.set_word_pos(2 * slot as u128);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    BlockPr,
    BlockPrSc,
    WirtingerFlow,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::BlockPr, Algorithm::BlockPrSc, Algorithm::WirtingerFlow];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BlockPr => "blockpr",
            Algorithm::BlockPrSc => "blockpr_sc",
            Algorithm::WirtingerFlow => "wirtinger_flow",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "blockpr" => Ok(Algorithm::BlockPr),
            "blockpr_sc" => Ok(Algorithm::BlockPrSc),
            "wirtinger_flow" | "wf" => Ok(Algorithm::WirtingerFlow),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// A reconstructed signal plus whether subspace completion was exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub signal: Signal,
    pub complete: bool,
}

/// Regularized inversion, phase synchronization and magnitude estimation.
pub fn run_blockpr(y: &MeasurementGrid, svd: &BlockSvd, mode: MagnitudeMode) -> Result<Signal> {
    run_blockpr_with(y, svd, mode, &PowerIteration::default())
}

pub fn run_blockpr_with(
    y: &MeasurementGrid,
    svd: &BlockSvd,
    mode: MagnitudeMode,
    power: &PowerIteration,
) -> Result<Signal> {
    let x_s = svd.apply_regularized_inverse(y)?;
    assemble_signal_with(&x_s, mode, power)
}

/// [`run_blockpr`] with subspace completion after the inversion.
pub fn run_blockpr_sc(y: &MeasurementGrid, svd: &BlockSvd, mode: MagnitudeMode) -> Result<Reconstruction> {
    run_blockpr_sc_with(y, svd, mode, &PowerIteration::default())
}

pub fn run_blockpr_sc_with(
    y: &MeasurementGrid,
    svd: &BlockSvd,
    mode: MagnitudeMode,
    power: &PowerIteration,
) -> Result<Reconstruction> {
    let x_s = svd.apply_regularized_inverse(y)?;
    let problem = extract_known_coefficients(&x_s, svd)?;
    let outcome = complete(&problem);
    Ok(Reconstruction {
        signal: assemble_signal_with(&outcome.assemble(), mode, power)?,
        complete: outcome.complete,
    })
}
