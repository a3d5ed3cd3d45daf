//! Wirtinger Flow baseline for the same local measurements.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::masks::{MaskSet, MeasurementGrid};
use crate::signal::Signal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Step schedule `μ_τ = min(1 - e^{-τ/τ₀}, μ_max)` and the iteration cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WirtingerConfig {
    pub iterations: usize,
    pub tau0: f64,
    pub mu_max: f64,
}

impl Default for WirtingerConfig {
    fn default() -> Self {
        WirtingerConfig {
            iterations: 2500,
            tau0: 330.0,
            mu_max: 0.4,
        }
    }
}

impl WirtingerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || !(self.tau0 > 0.0) || !(self.mu_max > 0.0) {
            return Err(Error::Parameter(format!("invalid Wirtinger Flow settings {self:?}")));
        }
        Ok(())
    }

    pub fn step(&self, tau: usize) -> f64 {
        (1.0 - (-(tau as f64) / self.tau0).exp()).min(self.mu_max)
    }
}

/// `a*z` for every measurement vector `a = S_l* m_j`, row-major by shift.
fn project(z: &[Complex64], masks: &MaskSet, out: &mut [Complex64]) {
    let d = z.len();
    let k = masks.count();
    for l in 0..d {
        for j in 0..k {
            out[l * k + j] = masks
                .support(j)
                .iter()
                .enumerate()
                .map(|(n, m)| z[(n + l) % d] * m.conj())
                .sum();
        }
    }
}

/// `Σ c_{l,j} a_{l,j}`
fn back_project(c: &[Complex64], masks: &MaskSet, out: &mut [Complex64]) {
    let d = out.len();
    let k = masks.count();
    out.iter_mut().for_each(|v| *v = ZERO);
    for l in 0..d {
        for j in 0..k {
            let cj = c[l * k + j];
            for (n, m) in masks.support(j).iter().enumerate() {
                out[(n + l) % d] += cj * m;
            }
        }
    }
}

/// Spectral initialization: top eigenvector of `(1/m) Σ y a a*`, scaled to
/// `√(d Σy / Σ‖a‖²)`. Also returns the top eigenvalue.
fn initialize(y: &MeasurementGrid, masks: &MaskSet) -> (Vec<Complex64>, f64) {
    let shape = masks.shape();
    let (d, k) = (shape.d(), masks.count());
    let m = (d * k) as f64;
    let mut big_y = DMatrix::<Complex64>::zeros(d, d);
    let mut a_energy = 0.0;
    for l in 0..d {
        for j in 0..k {
            let yv = y.get(l, j);
            let support = masks.support(j);
            for (n, an) in support.iter().enumerate() {
                a_energy += an.norm_sqr();
                for (p, ap) in support.iter().enumerate() {
                    big_y[((n + l) % d, (p + l) % d)] += an * ap.conj() * (yv / m);
                }
            }
        }
    }
    let total: f64 = y.values().iter().sum();
    let eig = big_y.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[top];
    let scale = (d as f64 * total / a_energy).max(0.0).sqrt();
    if !(lambda > 0.0) || scale == 0.0 {
        return (vec![ZERO; d], 0.0);
    }
    let z = eig.eigenvectors.column(top).iter().map(|v| v * scale).collect();
    (z, lambda)
}

/// Gradient descent on `(1/2m) Σ (|a*z|² - y)²` from the spectral start.
///
/// The step is `2μ_τ/λ` with `λ` the top eigenvalue of the initialization
/// matrix, which for Gaussian designs is about `2‖x‖²`. The iterate with the
/// smallest loss is returned.
pub fn run_wirtinger_flow(y: &MeasurementGrid, masks: &MaskSet, config: &WirtingerConfig) -> Result<Signal> {
    config.validate()?;
    let shape = masks.shape();
    if y.shape() != shape {
        return Err(Error::Dimension("measurements do not match the masks".into()));
    }
    let (d, k) = (shape.d(), masks.count());
    let m = (d * k) as f64;
    let (mut z, lambda) = initialize(y, masks);
    if lambda == 0.0 {
        return Signal::new(z);
    }
    let mut az = vec![ZERO; d * k];
    let mut grad = vec![ZERO; d];
    let mut best = (f64::INFINITY, z.clone());
    for tau in 1..=config.iterations + 1 {
        project(&z, masks, &mut az);
        let mut loss = 0.0;
        for (a, yv) in az.iter_mut().zip(y.values()) {
            let r = a.norm_sqr() - yv;
            loss += r * r;
            *a *= r / m;
        }
        if loss < best.0 {
            best = (loss, z.clone());
        }
        if tau > config.iterations || !loss.is_finite() {
            break;
        }
        back_project(&az, masks, &mut grad);
        let step = 2.0 * config.step(tau) / lambda;
        z.iter_mut().zip(&grad).for_each(|(zi, g)| *zi -= g * step);
    }
    Signal::new(best.1)
}
