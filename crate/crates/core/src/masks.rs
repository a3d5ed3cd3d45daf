//! Windows, masks, the forward measurement map and additive noise.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::banded::BandShape;
use crate::error::{Error, Result};
use crate::signal::unit_phase;

/// Window profile on the support `1..=delta`.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowKind {
    /// `w_n = exp(-(n - (δ+1)/2)² / (2σ²δ²))`
    Gaussian { sigma: f64 },
    /// `w_n = exp(-n / a)`
    Exponential { a: f64 },
    /// Explicit values on the support; length must equal `delta`.
    Custom(Vec<Complex64>),
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowKind::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            WindowKind::Exponential { a } => write!(f, "exp:{a}"),
            WindowKind::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    /// Parses `gaussian:<sigma>` or `exp:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("window `{s}` must look like gaussian:0.3 or exp:1.0")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad window parameter in `{s}`")))?;
        match name.trim() {
            "gaussian" | "gauss" => Ok(WindowKind::Gaussian { sigma: value }),
            "exp" | "exponential" => Ok(WindowKind::Exponential { a: value }),
            other => Err(Error::Config(format!("unknown window kind `{other}`"))),
        }
    }
}

/// A compactly supported window on `1..=delta` inside a signal of length `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSpec {
    kind: WindowKind,
    shape: BandShape,
    values: Vec<Complex64>,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, d: usize, delta: usize) -> Result<Self> {
        if delta > d {
            return Err(Error::Dimension(format!(
                "window support {delta} exceeds dimension {d}"
            )));
        }
        let shape = BandShape::new(d, delta)?;
        let values: Vec<Complex64> = match &kind {
            WindowKind::Gaussian { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "gaussian sigma must be positive, got {sigma}"
                    )));
                }
                let center = (delta as f64 + 1.0) / 2.0;
                let denom = 2.0 * sigma * sigma * (delta * delta) as f64;
                (1..=delta)
                    .map(|n| {
                        let t = n as f64 - center;
                        Complex64::new((-t * t / denom).exp(), 0.0)
                    })
                    .collect()
            }
            WindowKind::Exponential { a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::Parameter(format!("exponential rate must be positive, got {a}")));
                }
                (1..=delta)
                    .map(|n| Complex64::new((-(n as f64) / a).exp(), 0.0))
                    .collect()
            }
            WindowKind::Custom(v) => {
                if v.len() != delta {
                    return Err(Error::Dimension(format!(
                        "custom window has {} values, expected {delta}",
                        v.len()
                    )));
                }
                if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("window"));
                }
                v.clone()
            }
        };
        Ok(WindowSpec { kind, shape, values })
    }

    pub fn gaussian(d: usize, delta: usize, sigma: f64) -> Result<Self> {
        Self::new(WindowKind::Gaussian { sigma }, d, delta)
    }

    pub fn exponential(d: usize, delta: usize, a: f64) -> Result<Self> {
        Self::new(WindowKind::Exponential { a }, d, delta)
    }

    pub fn custom(d: usize, values: Vec<Complex64>) -> Result<Self> {
        let delta = values.len();
        Self::new(WindowKind::Custom(values), d, delta)
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn shape(&self) -> BandShape {
        self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    pub fn delta(&self) -> usize {
        self.shape.delta()
    }

    /// Values on the support, `w_1 ..= w_δ`.
    pub fn support(&self) -> &[Complex64] {
        &self.values
    }

    /// `w_n = conj(w_{δ-n+1})` for all `n` on the support.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let delta = self.values.len();
        (0..delta).all(|n| (self.values[n] - self.values[delta - 1 - n].conj()).norm() <= tol)
    }
}

/// The full length-`d` window, zero outside `1..=delta`.
pub fn make_window(spec: &WindowSpec) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(0.0, 0.0); spec.d()];
    w[..spec.delta()].copy_from_slice(spec.support());
    w
}

/// The `2δ-1` frequency-subsampled masks
/// `(m_j)_n = (2δ-1)^{-1/4} conj(w_n) e^{2πi (n-1)(j-1)/(2δ-1)}` for `n <= δ`.
#[derive(Clone, Debug)]
pub struct MaskSet {
    window: WindowSpec,
    // masks[j][n] for n < delta; zero beyond the support.
    masks: Vec<Vec<Complex64>>,
}

impl MaskSet {
    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn shape(&self) -> BandShape {
        self.window.shape()
    }

    pub fn count(&self) -> usize {
        self.masks.len()
    }

    /// Mask `j` (0-based) restricted to its support.
    pub fn support(&self, j: usize) -> &[Complex64] {
        &self.masks[j]
    }

    /// Mask `j` (0-based) as a length-`d` vector.
    pub fn mask(&self, j: usize) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); self.window.d()];
        m[..self.window.delta()].copy_from_slice(&self.masks[j]);
        m
    }
}

pub fn build_masks(window: &WindowSpec) -> MaskSet {
    let delta = window.delta();
    let k = 2 * delta - 1;
    let scale = (k as f64).powf(-0.25);
    let masks = (0..k)
        .map(|j| {
            window
                .support()
                .iter()
                .enumerate()
                .map(|(n, w)| w.conj() * unit_phase((n * j) % k, k) * scale)
                .collect()
        })
        .collect();
    MaskSet {
        window: window.clone(),
        masks,
    }
}

/// Intensities `(y_l)_j` for shifts `l in 0..d` and frequencies `j in 0..2δ-1`,
/// stored row-major by shift.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementGrid {
    shape: BandShape,
    values: Vec<f64>,
}

impl MeasurementGrid {
    pub fn new(shape: BandShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.vec_len() {
            return Err(Error::Dimension(format!(
                "grid has {} values, expected {}",
                values.len(),
                shape.vec_len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurements"));
        }
        Ok(MeasurementGrid { shape, values })
    }

    pub fn zeros(shape: BandShape) -> Self {
        MeasurementGrid {
            shape,
            values: vec![0.0; shape.vec_len()],
        }
    }

    pub fn shape(&self) -> BandShape {
        self.shape
    }

    /// Number of frequencies per shift, `2δ-1`.
    pub fn frequencies(&self) -> usize {
        self.shape.diagonals()
    }

    pub fn get(&self, shift: usize, freq: usize) -> f64 {
        self.values[shift * self.frequencies() + freq]
    }

    pub fn row(&self, shift: usize) -> &[f64] {
        let k = self.frequencies();
        &self.values[shift * k..(shift + 1) * k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// CSV with header `shift,freq,value`; shifts are 0-based, frequencies
    /// 1-based, values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "shift,freq,value")?;
        let k = self.frequencies();
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", i / k, i % k + 1, v)?;
        }
        Ok(())
    }
}

/// `(y_l)_j = |<S_l x, m_j>|²`, using only the `δ` support entries per product.
pub fn forward_measure(x: &[Complex64], masks: &MaskSet) -> Result<MeasurementGrid> {
    let shape = masks.shape();
    let d = shape.d();
    if x.len() != d {
        return Err(Error::Dimension(format!(
            "signal length {} does not match mask dimension {d}",
            x.len()
        )));
    }
    let k = masks.count();
    let values: Vec<f64> = (0..d)
        .into_par_iter()
        .flat_map_iter(|shift| {
            (0..k).map(move |j| {
                let v: Complex64 = masks
                    .support(j)
                    .iter()
                    .enumerate()
                    .map(|(n, m)| x[(n + shift) % d] * m.conj())
                    .sum();
                v.norm_sqr()
            })
        })
        .collect();
    Ok(MeasurementGrid { shape, values })
}

/// Noise variance giving the requested SNR (in dB) for the given grid.
pub fn noise_variance(y: &MeasurementGrid, snr_db: f64) -> f64 {
    let n = y.values.len() as f64;
    y.energy() / (n * 10f64.powf(snr_db / 10.0))
}

/// Adds i.i.d. real Gaussian noise with the variance that realises `snr_db`.
/// A non-finite `snr_db` means noiseless. Results may be negative.
pub fn add_noise(y: &MeasurementGrid, snr_db: f64, seed: u64) -> Result<MeasurementGrid> {
    if !snr_db.is_finite() {
        return Ok(y.clone());
    }
    let variance = noise_variance(y, snr_db);
    if variance == 0.0 {
        return Err(Error::Parameter(
            "cannot set a finite SNR for all-zero measurements".into(),
        ));
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::Parameter(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = y.values.iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(MeasurementGrid { shape: y.shape, values })
}
