use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::Result;
use crate::masks::{add_noise, build_masks, forward_measure};
use crate::spectral::{singular_value_table, BlockSvd};
use crate::sync::PowerIteration;

use super::{derive_seed, random_signal, relative_error, run_blockpr_sc_with, run_blockpr_with, run_wirtinger_flow};
use super::{Algorithm, ExperimentConfig};

/// Mean relative error of one `(algorithm, ε, snr)` cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub snr: f64,
    pub mean_error: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, algorithm: Algorithm, epsilon: f64, snr: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.epsilon == epsilon && r.snr == snr)
    }

    /// CSV with header `algorithm,epsilon,snr,mean_error,trials`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "algorithm,epsilon,snr,mean_error,trials")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.algorithm, r.epsilon, r.snr, r.mean_error, r.trials
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// Runs every configured cell over `trials` random signals.
///
/// Trial `t` draws its signal and its noise from seeds derived from
/// `(seed, t)`, so all algorithms and thresholds see the same data and the
/// result does not depend on scheduling. Wirtinger Flow ignores `ε`; its
/// values are repeated for every threshold. When the power iteration hits
/// its cap the last iterate is used, since near-ties between the two top
/// eigenvalues occur on heavily truncated data.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let window = config.window_spec()?;
    let masks = build_masks(&window);
    let mut epsilons = config.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();
    let mut snrs = config.snrs.clone();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let algorithms = {
        let mut a = config.algorithms.clone();
        a.sort();
        a.dedup();
        a
    };
    let svds = epsilons
        .iter()
        .map(|&e| BlockSvd::new(&window, e))
        .collect::<Result<Vec<_>>>()?;

    let power = PowerIteration {
        accept_unconverged: true,
        ..Default::default()
    };
    let (ne, ns) = (epsilons.len(), snrs.len());
    let cell = |a: usize, e: usize, s: usize| (a * ne + e) * ns + s;
    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut errors = vec![0.0; algorithms.len() * ne * ns];
            let x0 = random_signal(config.d, derive_seed(config.seed, t as u64, 0));
            let clean = forward_measure(x0.as_slice(), &masks)?;
            for (s, &snr) in snrs.iter().enumerate() {
                let y = add_noise(&clean, snr, derive_seed(config.seed, t as u64, 1 + s as u64))?;
                for (a, &alg) in algorithms.iter().enumerate() {
                    if alg == Algorithm::WirtingerFlow {
                        let x = run_wirtinger_flow(&y, &masks, &config.wirtinger)?;
                        let err = relative_error(&x, &x0)?;
                        (0..ne).for_each(|e| errors[cell(a, e, s)] = err);
                        continue;
                    }
                    for (e, svd) in svds.iter().enumerate() {
                        let x = match alg {
                            Algorithm::BlockPr => run_blockpr_with(&y, svd, config.magnitude_mode, &power)?,
                            _ => run_blockpr_sc_with(&y, svd, config.magnitude_mode, &power)?.signal,
                        };
                        errors[cell(a, e, s)] = relative_error(&x, &x0)?;
                    }
                }
            }
            Ok(errors)
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; algorithms.len() * ne * ns];
    for errors in &per_trial {
        sums.iter_mut().zip(errors).for_each(|(s, e)| *s += e);
    }
    let mut rows = Vec::with_capacity(sums.len());
    for (a, &algorithm) in algorithms.iter().enumerate() {
        for (e, &epsilon) in epsilons.iter().enumerate() {
            for (s, &snr) in snrs.iter().enumerate() {
                rows.push(SweepRow {
                    algorithm,
                    epsilon,
                    snr,
                    mean_error: sums[cell(a, e, s)] / config.trials as f64,
                    trials: config.trials,
                });
            }
        }
    }
    Ok(SweepResult { rows })
}

/// Singular value distribution as CSV `bin_lo,bin_hi,count`; the first row
/// (`0,0`) counts the numerically zero values.
pub fn write_svd_table<W: Write>(svd: &BlockSvd, mut out: W) -> Result<()> {
    writeln!(out, "bin_lo,bin_hi,count")?;
    for bin in singular_value_table(svd) {
        writeln!(out, "{},{},{}", bin.lo, bin.hi, bin.count)?;
    }
    Ok(())
}

pub fn svd_table_csv(svd: &BlockSvd) -> String {
    let mut buf = Vec::new();
    write_svd_table(svd, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
