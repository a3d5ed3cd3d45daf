//! Angular synchronization and magnitude estimation.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::banded::BandedHermitian;
use crate::error::{Error, Result};
use crate::signal::{inner, norm, phase, Signal};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Entries below this magnitude are structural zeros of the phase matrix.
pub const PHASE_TOLERANCE: f64 = 1e-12;

/// A banded Hermitian matrix whose nonzero entries have unit modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatrix(BandedHermitian);

impl PhaseMatrix {
    pub fn matrix(&self) -> &BandedHermitian {
        &self.0
    }

    pub fn into_inner(self) -> BandedHermitian {
        self.0
    }

    pub fn scaled(&self, c: f64) -> BandedHermitian {
        self.0.map_entries(|v| v * c)
    }
}

/// `x/|x|` on every entry of the band, zero where `|x| < 1e-12`.
pub fn normalize_phases(x: &BandedHermitian) -> PhaseMatrix {
    PhaseMatrix(x.map_entries(|v| if v.norm() < PHASE_TOLERANCE { ZERO } else { v / v.norm() }))
}

/// Settings for the shifted power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIteration {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Return the last iterate instead of [`Error::NoConvergence`] when the
    /// cap is reached.
    pub accept_unconverged: bool,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tolerance: 1e-10,
            max_iterations: 10_000,
            accept_unconverged: false,
        }
    }
}

impl PowerIteration {
    /// Top eigenvector of `x`, scaled to norm `√d`.
    ///
    /// Iterates with `x + 2δ I`, which is positive semidefinite whenever the
    /// entries of `x` are bounded by one in modulus, so the dominant
    /// eigenvector of the shifted matrix is the one of the largest eigenvalue.
    pub fn top_eigenvector(&self, x: &BandedHermitian) -> Result<Vec<Complex64>> {
        let d = x.d();
        let shift = 2.0 * x.delta() as f64;
        let mut v: Vec<Complex64> = (0..d)
            .map(|j| {
                let t = j as f64 * 0.618_033_988_749_895;
                Complex64::new(1.0, 0.0) + Complex64::from_polar(1e-6, 2.0 * std::f64::consts::PI * t.fract())
            })
            .collect();
        scale_to(&mut v, 1.0);
        for _ in 0..self.max_iterations {
            let mut next = x.apply(&v);
            next.iter_mut().zip(&v).for_each(|(a, b)| *a += b * shift);
            let n = norm(&next);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::NonFinite("power iteration"));
            }
            next.iter_mut().for_each(|a| *a /= n);
            let align = phase(inner(&v, &next));
            let diff = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a * align - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            v = next;
            if diff < self.tolerance {
                scale_to(&mut v, (d as f64).sqrt());
                return Ok(v);
            }
        }
        scale_to(&mut v, (d as f64).sqrt());
        if self.accept_unconverged {
            return Ok(v);
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
            last: v,
        })
    }
}

fn scale_to(v: &mut [Complex64], target: f64) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a *= target / n);
    }
}

/// Top eigenvector of the phase matrix with the default power iteration.
pub fn top_eigenvector(x: &PhaseMatrix) -> Result<Vec<Complex64>> {
    PowerIteration::default().top_eigenvector(&x.0)
}

/// `√max(X_jj, 0)`
pub fn magnitudes_diagonal(x: &BandedHermitian) -> Vec<f64> {
    x.band(0).iter().map(|v| v.re.max(0.0).sqrt()).collect()
}

/// Averages magnitude estimates from the top eigenvectors of the circular
/// `b × b` principal blocks, one block per starting index.
pub fn magnitudes_block(x: &BandedHermitian, block_size: usize) -> Result<Vec<f64>> {
    let d = x.d();
    if block_size == 0 || block_size > x.delta() {
        return Err(Error::Parameter(format!(
            "block size must lie in 1..={}, got {block_size}",
            x.delta()
        )));
    }
    let estimates: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|start| block_estimate(x, start, block_size))
        .collect();
    let mut sum = vec![0.0; d];
    for (start, est) in estimates.iter().enumerate() {
        for (a, e) in est.iter().enumerate() {
            sum[(start + a) % d] += e;
        }
    }
    Ok(sum.into_iter().map(|s| s / block_size as f64).collect())
}

fn block_estimate(x: &BandedHermitian, start: usize, b: usize) -> Vec<f64> {
    let d = x.d();
    let block = DMatrix::from_fn(b, b, |i, j| x.get((start + i) % d, (start + j) % d));
    let trace: f64 = (0..b).map(|i| block[(i, i)].re).sum();
    if b == 1 {
        return vec![trace.max(0.0).sqrt()];
    }
    let eig = block.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let scale = trace.max(0.0).sqrt();
    eig.eigenvectors.column(top).iter().map(|u| u.norm() * scale).collect()
}

/// How entry magnitudes are estimated from the lifted matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MagnitudeMode {
    Diagonal,
    /// Blocks of size `δ`.
    #[default]
    Block,
}

impl fmt::Display for MagnitudeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MagnitudeMode::Diagonal => "diagonal",
            MagnitudeMode::Block => "block",
        })
    }
}

impl FromStr for MagnitudeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "diagonal" => Ok(MagnitudeMode::Diagonal),
            "block" => Ok(MagnitudeMode::Block),
            other => Err(Error::Config(format!("unknown magnitude mode '{other}'"))),
        }
    }
}

pub fn magnitudes(x: &BandedHermitian, mode: MagnitudeMode) -> Vec<f64> {
    match mode {
        MagnitudeMode::Diagonal => magnitudes_diagonal(x),
        MagnitudeMode::Block => magnitudes_block(x, x.delta()).expect("δ is a valid block size"),
    }
}

/// `x_j = m_j · phase(v_j)` with `v` the top eigenvector of the phase matrix.
pub fn assemble_signal(x: &BandedHermitian, mode: MagnitudeMode) -> Result<Signal> {
    assemble_signal_with(x, mode, &PowerIteration::default())
}

pub fn assemble_signal_with(x: &BandedHermitian, mode: MagnitudeMode, power: &PowerIteration) -> Result<Signal> {
    let v = power.top_eigenvector(&normalize_phases(x).0)?;
    let m = magnitudes(x, mode);
    Signal::new(m.iter().zip(&v).map(|(a, p)| phase(*p) * *a).collect())
}
