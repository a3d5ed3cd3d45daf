//! Banded Hermitian matrices, their circulant diagonals and the lifted
//! vectorization.
//!
//! A [`BandedHermitian`] of dimension `d` and band parameter `delta` has
//! nonzero entries only where the circular offset `k - j (mod d)` lies in
//! `(-delta, delta)`. Only the offsets `0..delta` are stored:
//! `band(s)[z] = X[z + s, z]` (indices mod `d`). The remaining entries
//! follow from `X[j, k] = conj(X[k, j])`, and the main diagonal is real.
//!
//! For `X = T_δ(x x*)` this orientation makes `band(s)[z] = conj(x_z) x_{z+s}`,
//! which is exactly the circulant diagonal `L^s` of the lifted signal.
//!
//! The `2δ-1` diagonals and the vectorization of length `D = d(2δ-1)` use the
//! 0-based layout `vec[(2δ-1) ξ + r] = L^r_ξ` where
//!
//! * `L^r_z = conj(x_z) x_{z+r}` for `r < δ`,
//! * `L^r_z = conj(x_{z+1}) x_{z+1+r-(2δ-1)}` for `δ <= r < 2δ-1`.
//!
//! The second family wraps circularly in `z + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::wrap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Validated `(d, delta)` pair with `delta >= 1` and `2 delta - 1 <= d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BandShape {
    d: usize,
    delta: usize,
}

impl BandShape {
    pub fn new(d: usize, delta: usize) -> Result<Self> {
        if delta == 0 {
            return Err(Error::Dimension("delta must be positive".into()));
        }
        if d < 2 || 2 * delta - 1 > d {
            return Err(Error::Dimension(format!(
                "need d >= 2 and 2*delta - 1 <= d, got d = {d}, delta = {delta}"
            )));
        }
        Ok(BandShape { d, delta })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Number of circulant diagonals, `2δ - 1`.
    #[inline]
    pub fn diagonals(&self) -> usize {
        2 * self.delta - 1
    }

    /// Length of the vectorization, `d(2δ - 1)`.
    #[inline]
    pub fn vec_len(&self) -> usize {
        self.d * self.diagonals()
    }

    /// The upper offset `s` and start index `i` such that lower diagonal `r`
    /// at position `z` equals `conj(band(s)[i])`.
    #[inline]
    fn lower_source(&self, r: usize, z: usize) -> (usize, usize) {
        debug_assert!(r >= self.delta && r < self.diagonals());
        let s = self.diagonals() - r;
        (s, wrap(z as i64 + 1 - s as i64, self.d))
    }
}

/// Position `q` of the vectorization split into frequency/position `xi` and
/// diagonal `r`, all 1-based: `q = (2δ-1)(xi-1) + r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VecIndex {
    pub xi: usize,
    pub r: usize,
}

impl VecIndex {
    pub fn from_q(q: usize, shape: BandShape) -> Result<Self> {
        let max = shape.vec_len();
        if q == 0 || q > max {
            return Err(Error::IndexOutOfRange { index: q, max });
        }
        let k = shape.diagonals();
        Ok(VecIndex {
            xi: (q - 1) / k + 1,
            r: (q - 1) % k + 1,
        })
    }

    pub fn to_q(self, shape: BandShape) -> usize {
        shape.diagonals() * (self.xi - 1) + self.r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandedHermitian {
    shape: BandShape,
    bands: Vec<Vec<Complex64>>,
}

impl BandedHermitian {
    pub fn zeros(shape: BandShape) -> Self {
        BandedHermitian {
            shape,
            bands: vec![vec![ZERO; shape.d]; shape.delta],
        }
    }

    /// `T_δ(x x*)`
    pub fn from_signal(x: &[Complex64], delta: usize) -> Result<Self> {
        let shape = BandShape::new(x.len(), delta)?;
        let d = shape.d;
        let bands = (0..delta)
            .map(|s| (0..d).map(|z| x[z].conj() * x[(z + s) % d]).collect())
            .collect();
        Ok(BandedHermitian { shape, bands })
    }

    /// Builds from raw upper bands; the main diagonal is forced real.
    pub fn from_bands(shape: BandShape, mut bands: Vec<Vec<Complex64>>) -> Result<Self> {
        if bands.len() != shape.delta || bands.iter().any(|b| b.len() != shape.d) {
            return Err(Error::Dimension("band table has the wrong shape".into()));
        }
        bands[0].iter_mut().for_each(|v| v.im = 0.0);
        Ok(BandedHermitian { shape, bands })
    }

    /// `T_δ(A)` for a dense matrix, taking the Hermitian part of `A` on the band.
    pub fn project(a: &DMatrix<Complex64>, delta: usize) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension("matrix must be square".into()));
        }
        let shape = BandShape::new(a.nrows(), delta)?;
        let d = shape.d;
        let bands = (0..delta)
            .map(|s| {
                (0..d)
                    .map(|z| {
                        let k = (z + s) % d;
                        let v = (a[(k, z)] + a[(z, k)].conj()) * 0.5;
                        if s == 0 {
                            Complex64::new(v.re, 0.0)
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(BandedHermitian { shape, bands })
    }

    pub fn shape(&self) -> BandShape {
        self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn delta(&self) -> usize {
        self.shape.delta
    }

    /// Stored band `s < delta`: `band(s)[z] = X[z + s, z]`.
    pub fn band(&self, s: usize) -> &[Complex64] {
        &self.bands[s]
    }

    pub fn bands(&self) -> &[Vec<Complex64>] {
        &self.bands
    }

    /// Entry `X[k, j]` (0-based).
    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        let d = self.shape.d;
        let s = (k + d - j) % d;
        if s < self.shape.delta {
            self.bands[s][j]
        } else if d - s < self.shape.delta {
            self.bands[d - s][k].conj()
        } else {
            ZERO
        }
    }

    /// True if `X[k, j]` lies on the band.
    pub fn in_band(&self, k: usize, j: usize) -> bool {
        let d = self.shape.d;
        let s = (k + d - j) % d;
        s < self.shape.delta || d - s < self.shape.delta
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.shape.d;
        DMatrix::from_fn(d, d, |k, j| self.get(k, j))
    }

    /// `X v`
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.shape.d;
        assert_eq!(v.len(), d);
        let mut out: Vec<Complex64> = self.bands[0].iter().zip(v).map(|(a, b)| a * b).collect();
        for s in 1..self.shape.delta {
            let band = &self.bands[s];
            for z in 0..d {
                let k = (z + s) % d;
                // X[k, z] = band[z] and X[z, k] = conj(band[z])
                out[k] += band[z] * v[z];
                out[z] += band[z].conj() * v[k];
            }
        }
        out
    }

    pub fn map_entries(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let bands = self.bands.iter().map(|b| b.iter().map(|&v| f(v)).collect()).collect();
        BandedHermitian {
            shape: self.shape,
            bands,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let main: f64 = self.bands[0].iter().map(|v| v.norm_sqr()).sum();
        let off: f64 = self.bands[1..]
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v.norm_sqr())
            .sum();
        (main + 2.0 * off).sqrt()
    }

    /// Largest entrywise difference over the band.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.bands
            .iter()
            .flatten()
            .zip(other.bands.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// The vectorization `vec(X)` of length `d(2δ-1)`.
    pub fn vec(&self) -> Vec<Complex64> {
        let k = self.shape.diagonals();
        let mut out = vec![ZERO; self.shape.vec_len()];
        for xi in 0..self.shape.d {
            for r in 0..k {
                out[k * xi + r] = self.diagonal_entry(r, xi);
            }
        }
        out
    }

    /// Inverse of [`vec`](Self::vec). Upper and lower copies of each entry are
    /// averaged, which makes the result Hermitian for any input.
    pub fn from_vec(v: &[Complex64], shape: BandShape) -> Result<Self> {
        if v.len() != shape.vec_len() {
            return Err(Error::Dimension(format!(
                "vectorization length {} does not match {}",
                v.len(),
                shape.vec_len()
            )));
        }
        let k = shape.diagonals();
        let mut bands = vec![vec![ZERO; shape.d]; shape.delta];
        for xi in 0..shape.d {
            bands[0][xi] = Complex64::new(v[k * xi].re, 0.0);
            for s in 1..shape.delta {
                bands[s][xi] += v[k * xi + s] * 0.5;
            }
            for r in shape.delta..k {
                let (s, i) = shape.lower_source(r, xi);
                bands[s][i] += v[k * xi + r].conj() * 0.5;
            }
        }
        Ok(BandedHermitian { shape, bands })
    }

    /// `L^r_z` for `r < 2δ-1` (0-based).
    pub fn diagonal_entry(&self, r: usize, z: usize) -> Complex64 {
        if r < self.shape.delta {
            self.bands[r][z]
        } else {
            let (s, i) = self.shape.lower_source(r, z);
            self.bands[s][i].conj()
        }
    }

    /// All `2δ-1` circulant diagonals.
    pub fn diagonals(&self) -> DiagonalSet {
        let k = self.shape.diagonals();
        let diagonals = (0..k)
            .map(|r| (0..self.shape.d).map(|z| self.diagonal_entry(r, z)).collect())
            .collect();
        DiagonalSet::new(self.shape, diagonals).expect("shape is consistent")
    }
}

/// The `2δ-1` circulant diagonals of a banded Hermitian matrix, with flags
/// recording which DFT coefficients of each diagonal are known.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSet {
    shape: BandShape,
    diagonals: Vec<Vec<Complex64>>,
    fourier_known: Vec<Vec<bool>>,
}

impl DiagonalSet {
    /// Diagonals with every Fourier coefficient marked known.
    pub fn new(shape: BandShape, diagonals: Vec<Vec<Complex64>>) -> Result<Self> {
        let known = vec![vec![true; shape.d]; shape.diagonals()];
        Self::with_flags(shape, diagonals, known)
    }

    pub fn with_flags(shape: BandShape, diagonals: Vec<Vec<Complex64>>, fourier_known: Vec<Vec<bool>>) -> Result<Self> {
        let k = shape.diagonals();
        let ok = diagonals.len() == k
            && diagonals.iter().all(|v| v.len() == shape.d)
            && fourier_known.len() == k
            && fourier_known.iter().all(|v| v.len() == shape.d);
        if !ok {
            return Err(Error::Dimension("diagonal table has the wrong shape".into()));
        }
        Ok(DiagonalSet {
            shape,
            diagonals,
            fourier_known,
        })
    }

    pub fn shape(&self) -> BandShape {
        self.shape
    }

    pub fn diagonal(&self, r: usize) -> &[Complex64] {
        &self.diagonals[r]
    }

    pub fn diagonals(&self) -> &[Vec<Complex64>] {
        &self.diagonals
    }

    pub fn fourier_known(&self, r: usize) -> &[bool] {
        &self.fourier_known[r]
    }

    /// True when every flag is set.
    pub fn is_fully_known(&self) -> bool {
        self.fourier_known.iter().flatten().all(|&b| b)
    }

    /// Assembles the matrix from `L^0, .., L^{δ-1}`; the lower family is
    /// implied by Hermitian symmetry and the main diagonal is made real.
    pub fn assemble(&self) -> BandedHermitian {
        let bands = self.diagonals[..self.shape.delta].to_vec();
        BandedHermitian::from_bands(self.shape, bands).expect("shape is consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, salt: f64) -> Vec<Complex64> {
        (0..d)
            .map(|i| {
                let t = i as f64 + salt;
                Complex64::new((1.3 * t).sin() + 0.2, (0.7 * t + 0.4).cos())
            })
            .collect()
    }

    fn random_banded(d: usize, delta: usize) -> BandedHermitian {
        let shape = BandShape::new(d, delta).unwrap();
        let bands = (0..delta).map(|s| sample(d, s as f64 * 3.1)).collect();
        BandedHermitian::from_bands(shape, bands).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(BandShape::new(5, 3).is_ok());
        assert!(BandShape::new(4, 3).is_err());
        assert!(BandShape::new(8, 0).is_err());
    }

    #[test]
    fn vec_index_examples() {
        let shape = BandShape::new(4, 2).unwrap();
        assert_eq!(VecIndex::from_q(1, shape).unwrap(), VecIndex { xi: 1, r: 1 });
        assert_eq!(VecIndex::from_q(5, shape).unwrap(), VecIndex { xi: 2, r: 2 });
        assert!(VecIndex::from_q(0, shape).is_err());
        assert!(VecIndex::from_q(13, shape).is_err());
    }

    #[test]
    fn vec_index_is_bijective() {
        let shape = BandShape::new(8, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for q in 1..=shape.vec_len() {
            let idx = VecIndex::from_q(q, shape).unwrap();
            assert!(idx.xi >= 1 && idx.xi <= 8 && idx.r >= 1 && idx.r <= 5);
            assert_eq!(idx.to_q(shape), q);
            assert!(seen.insert(idx));
        }
        assert_eq!(seen.len(), 40);
    }

    #[test]
    fn vec_of_lifted_signal() {
        let x = sample(4, 0.5);
        let xm = BandedHermitian::from_signal(&x, 2).unwrap();
        let v = xm.vec();
        // q = 1: |x_1|^2
        assert!((v[0] - Complex64::new(x[0].norm_sqr(), 0.0)).norm() < 1e-15);
        // q = 5 -> (xi = 2, r = 2): conj(x_2) x_3 (1-based)
        assert!((v[4] - x[1].conj() * x[2]).norm() < 1e-15);
        // lower diagonal r = 3 (1-based), xi = 4: conj(x_{5}) x_{4+3-4+1} -> conj(x_1) x_4
        assert!((v[3 * 3 + 2] - x[0].conj() * x[3]).norm() < 1e-15);
    }

    #[test]
    fn vec_round_trip() {
        let xm = random_banded(8, 3);
        let back = BandedHermitian::from_vec(&xm.vec(), xm.shape()).unwrap();
        assert!(back.max_abs_diff(&xm) < 1e-15);
    }

    #[test]
    fn diagonals_match_outer_product() {
        let x = sample(6, 1.7);
        let xm = BandedHermitian::from_signal(&x, 3).unwrap();
        let set = xm.diagonals();
        for r in 0..3 {
            for z in 0..6 {
                let expected = x[z].conj() * x[(z + r) % 6];
                assert!((set.diagonal(r)[z] - expected).norm() < 1e-15);
            }
        }
        for r in 3..5 {
            for z in 0..6 {
                let expected = x[(z + 1) % 6].conj() * x[wrap(z as i64 + 1 + r as i64 - 5, 6)];
                assert!((set.diagonal(r)[z] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_signal_diagonals() {
        let x = vec![Complex64::new(1.0, 0.0); 5];
        let set = BandedHermitian::from_signal(&x, 2).unwrap().diagonals();
        for r in 0..3 {
            assert!(set.diagonal(r).iter().all(|v| (v - 1.0).norm() < 1e-15));
        }
    }

    #[test]
    fn diagonals_round_trip() {
        let xm = random_banded(8, 3);
        assert!(xm.diagonals().assemble().max_abs_diff(&xm) < 1e-15);
    }

    #[test]
    fn dense_round_trip_and_hermitian() {
        let xm = random_banded(7, 3);
        let dense = xm.to_dense();
        assert!((&dense - dense.adjoint()).norm() < 1e-14);
        for k in 0..7 {
            for j in 0..7 {
                if !xm.in_band(k, j) {
                    assert_eq!(dense[(k, j)], ZERO);
                }
            }
        }
        let back = BandedHermitian::project(&dense, 3).unwrap();
        assert!(back.max_abs_diff(&xm) < 1e-15);
        let v = sample(7, 9.0);
        let fast = xm.apply(&v);
        let slow = &dense * nalgebra::DVector::from_vec(v);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((xm.frobenius_norm() - dense.norm()).abs() < 1e-12);
    }
}
