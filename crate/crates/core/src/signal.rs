//! Signals and the circular shift / modulation operators.
//!
//! Indices in this crate are 0-based in code; the operator parameters below
//! keep the 1-based modulation index `k` (`W_1` is the identity) because the
//! shift/modulation identity `dft(S_l u) = W_{l+1} dft(u)` reads naturally
//! that way.

use std::f64::consts::PI;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex signal of length `d >= 2` with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal(Vec<Complex64>);

impl Signal {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Dimension(format!(
                "signal length must be at least 2, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("signal"));
        }
        Ok(Signal(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Signal(vec![Complex64::new(0.0, 0.0); d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }
}

impl Index<usize> for Signal {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl AsRef<[Complex64]> for Signal {
    fn as_ref(&self) -> &[Complex64] {
        &self.0
    }
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ a_i conj(b_i)`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Reduces `i` modulo `d` into `0..d`.
#[inline]
pub fn wrap(i: i64, d: usize) -> usize {
    i.rem_euclid(d as i64) as usize
}

/// `(S_l u)_j = u_{j+l}` with circular indexing.
pub fn circular_shift(u: &[Complex64], shift: i64) -> Vec<Complex64> {
    let d = u.len();
    (0..d).map(|j| u[wrap(j as i64 + shift, d)]).collect()
}

/// `(W_k u)_j = e^{2πi (k-1) j / d} u_j` for 0-based `j`.
pub fn modulate(u: &[Complex64], k: i64) -> Vec<Complex64> {
    let d = u.len();
    let step = wrap(k - 1, d);
    u.iter()
        .enumerate()
        .map(|(j, v)| v * unit_phase((step * j) % d, d))
        .collect()
}

/// `e^{2πi m/d}`
#[inline]
pub fn unit_phase(m: usize, d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * m as f64 / d as f64)
}

/// `z/|z|`, with the convention that the phase of zero is 1.
#[inline]
pub fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}
