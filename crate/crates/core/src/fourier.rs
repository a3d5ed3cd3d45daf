//! Discrete Fourier transform primitives.
//!
//! Convention: the forward transform is unnormalized,
//! `û_k = Σ_n u_n e^{-2πi nk/d}` (0-based), and the inverse carries `1/d`.
//! Under this convention the convolution theorem reads
//! `dft(u ∘ v) = dft(u) ⊛ dft(v) / d`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// A planned length-`d` DFT.
///
/// Lengths whose prime factors are all in {2, 3, 5, 7} go through rustfft;
/// other lengths use the direct `O(d²)` sum with a precomputed twiddle table.
#[derive(Clone)]
pub struct Dft {
    len: usize,
    kind: DftKind,
}

#[derive(Clone)]
enum DftKind {
    Fast {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    Direct {
        // twiddles[m] = e^{-2πi m/d}
        twiddles: Vec<Complex64>,
    },
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DftKind::Fast { .. } => "fast",
            DftKind::Direct { .. } => "direct",
        };
        f.debug_struct("Dft")
            .field("len", &self.len)
            .field("kind", &kind)
            .finish()
    }
}

/// True when every prime factor of `n` is at most 7.
pub fn is_smooth(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    for p in [2, 3, 5, 7] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

impl Dft {
    pub fn new(len: usize) -> Self {
        if is_smooth(len) {
            Self::fast(len)
        } else {
            Self::direct(len)
        }
    }

    pub fn fast(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            len,
            kind: DftKind::Fast {
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            },
        }
    }

    pub fn direct(len: usize) -> Self {
        let twiddles = (0..len)
            .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / len as f64))
            .collect();
        Dft {
            len,
            kind: DftKind::Direct { twiddles },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_fast(&self) -> bool {
        matches!(self.kind, DftKind::Fast { .. })
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            DftKind::Fast { forward, .. } => forward.process(buf),
            DftKind::Direct { twiddles } => direct_transform(buf, twiddles, false),
        }
    }

    /// In-place inverse transform, including the `1/d` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            DftKind::Fast { inverse, .. } => inverse.process(buf),
            DftKind::Direct { twiddles } => direct_transform(buf, twiddles, true),
        }
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward_vec(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = u.to_vec();
        self.forward(&mut out);
        out
    }

    pub fn inverse_vec(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = u.to_vec();
        self.inverse(&mut out);
        out
    }
}

fn direct_transform(buf: &mut [Complex64], twiddles: &[Complex64], conjugate: bool) {
    let d = buf.len();
    let input = buf.to_vec();
    for (k, out) in buf.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, u) in input.iter().enumerate() {
            let t = twiddles[(n * k) % d];
            acc += u * if conjugate { t.conj() } else { t };
        }
        *out = acc;
    }
}

/// Unnormalized forward DFT.
pub fn dft(u: &[Complex64]) -> Vec<Complex64> {
    Dft::new(u.len()).forward_vec(u)
}

/// Inverse DFT with the `1/d` factor, so `idft(dft(u)) == u`.
pub fn idft(u: &[Complex64]) -> Vec<Complex64> {
    Dft::new(u.len()).inverse_vec(u)
}

pub fn hadamard(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).collect()
}

/// Circular convolution `(u ⊛ v)_l = Σ_k u_{l-k} v_k`, computed directly.
pub fn circular_convolution(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let d = u.len();
    assert_eq!(d, v.len());
    (0..d)
        .map(|l| (0..d).map(|k| u[(l + d - k) % d] * v[k]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn pseudo_random(d: usize, salt: u64) -> Vec<Complex64> {
        (0..d)
            .map(|i| {
                let t = (i as f64 + 1.0) * (salt as f64 * 0.618 + 0.37);
                c(t.sin() * 1.3, (t * 1.7).cos() - 0.2)
            })
            .collect()
    }

    #[test]
    fn impulse_transforms_to_ones() {
        let mut e1 = vec![c(0.0, 0.0); 5];
        e1[0] = c(1.0, 0.0);
        let out = dft(&e1);
        assert!(max_diff(&out, &[c(1.0, 0.0); 5]) < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        for d in [2, 7, 8, 11, 12, 64, 97] {
            let u = pseudo_random(d, d as u64);
            assert!(max_diff(&idft(&dft(&u)), &u) < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn fast_and_direct_agree() {
        for d in [4, 6, 12, 16, 63, 64, 256] {
            let u = pseudo_random(d, 3);
            let a = Dft::fast(d).forward_vec(&u);
            let b = Dft::direct(d).forward_vec(&u);
            assert!(max_diff(&a, &b) < 1e-10, "d = {d}");
            let a = Dft::fast(d).inverse_vec(&u);
            let b = Dft::direct(d).inverse_vec(&u);
            assert!(max_diff(&a, &b) < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn plan_selection() {
        assert!(Dft::new(64).is_fast());
        assert!(Dft::new(63).is_fast());
        assert!(!Dft::new(97).is_fast());
        assert!(!Dft::new(22).is_fast());
    }

    #[test]
    fn convolution_theorem_four_point_by_hand() {
        // u = (1, 2, 0, -1), v = (0, 1, 1, 0)
        // u ∘ v = (0, 2, 0, 0), so dft(u ∘ v)_k = 2 e^{-iπk/2} = (2, -2i, -2, 2i).
        let u = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)];
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let lhs = dft(&hadamard(&u, &v));
        let expected = [c(2.0, 0.0), c(0.0, -2.0), c(-2.0, 0.0), c(0.0, 2.0)];
        assert!(max_diff(&lhs, &expected) < 1e-14);

        // dft(u) = (2, 1-3i, 0, 1+3i), dft(v) = (2, -1-i, 0, -1+i)
        let du = dft(&u);
        let dv = dft(&v);
        assert!(max_diff(&du, &[c(2.0, 0.0), c(1.0, -3.0), c(0.0, 0.0), c(1.0, 3.0)]) < 1e-14);
        assert!(max_diff(&dv, &[c(2.0, 0.0), c(-1.0, -1.0), c(0.0, 0.0), c(-1.0, 1.0)]) < 1e-14);
        let rhs: Vec<_> = circular_convolution(&du, &dv).into_iter().map(|x| x / 4.0).collect();
        assert!(max_diff(&rhs, &expected) < 1e-14);
    }
}
