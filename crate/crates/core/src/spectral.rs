//! Analytic SVD of the lifted measurement matrix.
//!
//! With `K = 2δ-1` frequencies the measurement matrix `M` (size `D × D`,
//! `D = dK`) is block circulant: block row `l` holds `M_{o+1}` at block column
//! `l + o` for the offsets `o in 0..δ`. A block DFT over shifts,
//! `U_K = (e^{2πi ξk/d} I_K / √d)_{ξ,k}`, diagonalizes it into blocks
//! `J_k = Σ_o M_{o+1} e^{2πi k o/d}`, and each block factors as
//! `J_k = F_K diag(z_{k,·})` with the unitary DFT `F_K`. Hence
//!
//! ```text
//! M = [U_K blockdiag(F_K) sgn(Z)] |Z| U_K*
//! ```
//!
//! is an SVD whose singular values are `|z_{k,r}|` and whose right singular
//! vectors are the columns of `U_K`.
//!
//! Truncation thresholds are relative: a triple is kept by the inverse when
//! `|z_{k,r}| > ε · max|z|`, so `ε = 0` inverts every numerically nonzero
//! singular value. The lost set handed to completion also counts values
//! below [`ZERO_TOLERANCE`] as lost.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::banded::{BandShape, BandedHermitian};
use crate::error::{Error, Result};
use crate::fourier::Dft;
use crate::masks::{MeasurementGrid, WindowSpec};
use crate::signal::{phase, unit_phase};

/// A singular value is treated as zero when `|z| <= ZERO_TOLERANCE · max|z|`.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Largest `D` accepted by [`dense_m`].
pub const DENSE_LIMIT: usize = 2000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Block `M_l` for `l in 1..=δ`, a `(2δ-1) × (2δ-1)` matrix indexed by
/// (frequency, diagonal).
pub fn build_block(l: usize, window: &WindowSpec) -> Result<DMatrix<Complex64>> {
    let delta = window.delta();
    if l == 0 || l > delta {
        return Err(Error::IndexOutOfRange { index: l, max: delta });
    }
    let k = 2 * delta - 1;
    let w = window.support();
    let o = l - 1;
    let scale = 1.0 / (k as f64).sqrt();
    let mut block = DMatrix::from_element(k, k, ZERO);
    for r in 0..k {
        let coeff = if r + o < delta {
            // conj(w_l) w_{l+r}
            w[o].conj() * w[o + r]
        } else if o + 1 < delta && r + o + 1 >= k {
            // conj(w_{l+1}) w_{l+1-s} with s = K - r
            let s = k - r;
            w[o + 1].conj() * w[o + 1 - s]
        } else {
            continue;
        };
        for n in 0..k {
            block[(n, r)] = coeff * unit_phase((k - (n * r) % k) % k, k) * scale;
        }
    }
    Ok(block)
}

/// The explicit `D × D` measurement matrix, `y = M vec(T_δ(x x*))`.
pub fn dense_m(window: &WindowSpec) -> Result<DMatrix<Complex64>> {
    let shape = window.shape();
    let size = shape.vec_len();
    if size > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            size,
            limit: DENSE_LIMIT,
        });
    }
    let (d, k) = (shape.d(), shape.diagonals());
    let mut m = DMatrix::from_element(size, size, ZERO);
    for o in 0..shape.delta() {
        let block = build_block(o + 1, window)?;
        for l in 0..d {
            let col = ((l + o) % d) * k;
            m.view_mut((l * k, col), (k, k)).copy_from(&block);
        }
    }
    Ok(m)
}

/// The unitary block Fourier matrix `U_{2δ-1}`; column `(2δ-1)k + r` is the
/// right singular vector for `z_{k,r}`.
pub fn block_fourier_unitary(shape: BandShape) -> Result<DMatrix<Complex64>> {
    let size = shape.vec_len();
    if size > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            size,
            limit: DENSE_LIMIT,
        });
    }
    let (d, k) = (shape.d(), shape.diagonals());
    let scale = 1.0 / (d as f64).sqrt();
    Ok(DMatrix::from_fn(size, size, |row, col| {
        if row % k != col % k {
            return ZERO;
        }
        let (xi, freq) = (row / k, col / k);
        unit_phase((xi * freq) % d, d) * scale
    }))
}

/// Unitary DFT matrix `F_K[j, r] = e^{-2πi jr/K} / √K`.
pub fn unitary_dft(k: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (k as f64).sqrt();
    DMatrix::from_fn(k, k, |j, r| unit_phase((k - (j * r) % k) % k, k) * scale)
}

/// The `d × (2δ-1)` table `z_{k,r}` (row-major by `k`), computed as the
/// diagonals of `F_K* J_k`.
pub fn compute_z(window: &WindowSpec) -> Vec<Complex64> {
    let shape = window.shape();
    let (d, k) = (shape.d(), shape.diagonals());
    let blocks: Vec<_> = (1..=shape.delta())
        .map(|l| build_block(l, window).expect("offset in range"))
        .collect();
    let f = unitary_dft(k);
    let mut z = vec![ZERO; d * k];
    for freq in 0..d {
        let mut jk = DMatrix::from_element(k, k, ZERO);
        for (o, block) in blocks.iter().enumerate() {
            jk += block * unit_phase((freq * o) % d, d);
        }
        for r in 0..k {
            z[freq * k + r] = f.column(r).dotc(&jk.column(r));
        }
    }
    z
}

/// `z_{k,r}` for an upper diagonal `r < δ` from the closed form
/// `Σ_l conj(w_l) w_{l+r} e^{2πi k l/d}` (0-based).
pub fn closed_form_z(window: &WindowSpec, k: usize, r: usize) -> Complex64 {
    let (d, delta) = (window.d(), window.delta());
    assert!(r < delta);
    let w = window.support();
    (0..delta - r)
        .map(|l| w[l].conj() * w[l + r] * unit_phase((k * l) % d, d))
        .sum()
}

/// Singular triples `(k, r)` (0-based) discarded by the truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LostIndexSet {
    shape: BandShape,
    pairs: Vec<(usize, usize)>,
}

impl LostIndexSet {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, k: usize, r: usize) -> bool {
        self.pairs.binary_search(&(k, r)).is_ok()
    }

    /// 1-based column indices `q = (2δ-1)(ξ-1) + r` of `V_2`.
    pub fn columns(&self) -> Vec<usize> {
        let k = self.shape.diagonals();
        self.pairs.iter().map(|&(xi, r)| k * xi + r + 1).collect()
    }
}

/// Block-diagonal SVD of the measurement matrix with an ε-partition.
#[derive(Clone, Debug)]
pub struct BlockSvd {
    window: WindowSpec,
    z: Vec<Complex64>,
    max_abs: f64,
    epsilon: f64,
    kept: Vec<bool>,
    lost: Vec<bool>,
    dft: Dft,
}

impl BlockSvd {
    pub fn new(window: &WindowSpec, epsilon: f64) -> Result<Self> {
        let z = compute_z(window);
        let max_abs = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut svd = BlockSvd {
            dft: Dft::new(window.d()),
            window: window.clone(),
            z,
            max_abs,
            epsilon: 0.0,
            kept: Vec::new(),
            lost: Vec::new(),
        };
        svd.set_epsilon(epsilon)?;
        Ok(svd)
    }

    /// Same factorization with a different truncation level.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut out = self.clone();
        out.set_epsilon(epsilon)?;
        Ok(out)
    }

    fn set_epsilon(&mut self, epsilon: f64) -> Result<()> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        let threshold = self.threshold();
        let lost_threshold = self.lost_threshold();
        self.kept = self.z.iter().map(|v| v.norm() > threshold).collect();
        self.lost = self.z.iter().map(|v| v.norm() <= lost_threshold).collect();
        Ok(())
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn shape(&self) -> BandShape {
        self.window.shape()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Absolute cut of the inverse: `ε · max|z|`.
    pub fn threshold(&self) -> f64 {
        self.epsilon * self.max_abs
    }

    /// Absolute cut of the lost set: `max(ε, ZERO_TOLERANCE) · max|z|`.
    pub fn lost_threshold(&self) -> f64 {
        self.epsilon.max(ZERO_TOLERANCE) * self.max_abs
    }

    pub fn max_singular_value(&self) -> f64 {
        self.max_abs
    }

    pub fn z(&self, k: usize, r: usize) -> Complex64 {
        self.z[k * self.shape().diagonals() + r]
    }

    pub fn z_table(&self) -> &[Complex64] {
        &self.z
    }

    pub fn is_kept(&self, k: usize, r: usize) -> bool {
        self.kept[k * self.shape().diagonals() + r]
    }

    /// The triple is discarded or numerically zero; its coefficient is
    /// treated as unknown by completion.
    pub fn is_lost(&self, k: usize, r: usize) -> bool {
        self.lost[k * self.shape().diagonals() + r]
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&b| b).count()
    }

    /// `|z_{k,r}| / max|z|`, the quantity compared against ε.
    pub fn relative_singular_values(&self) -> Vec<f64> {
        self.z.iter().map(|v| v.norm() / self.max_abs).collect()
    }

    pub fn sorted_singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.z.iter().map(|v| v.norm()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `min_k |z_{k,r}|` for diagonal `r`.
    pub fn min_singular_on_diagonal(&self, r: usize) -> f64 {
        (0..self.shape().d())
            .map(|k| self.z(k, r).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lost_indices(&self) -> LostIndexSet {
        let k = self.shape().diagonals();
        let pairs = self
            .lost
            .iter()
            .enumerate()
            .filter(|(_, &lost)| lost)
            .map(|(i, _)| (i / k, i % k))
            .collect();
        LostIndexSet {
            shape: self.shape(),
            pairs,
        }
    }

    /// `M_S^{-1} y` on a complex vector of length `D` (rows ordered by shift,
    /// then frequency). Runs in `O(dδ(log d + δ))` for smooth `d`.
    pub fn pseudo_inverse_vec(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let shape = self.shape();
        let (d, k) = (shape.d(), shape.diagonals());
        if y.len() != shape.vec_len() {
            return Err(Error::Dimension(format!(
                "measurement length {} does not match {}",
                y.len(),
                shape.vec_len()
            )));
        }
        // U_K* y: DFT over shifts for every frequency.
        let mut spectrum = vec![ZERO; d * k];
        let mut column = vec![ZERO; d];
        for j in 0..k {
            for l in 0..d {
                column[l] = y[l * k + j];
            }
            self.dft.forward(&mut column);
            for freq in 0..d {
                spectrum[freq * k + j] = column[freq];
            }
        }
        // F_K* per block, then divide by z on the kept triples.
        let f_scale = 1.0 / (k as f64).sqrt();
        let mut coeffs = vec![ZERO; d * k];
        for freq in 0..d {
            let block = &spectrum[freq * k..(freq + 1) * k];
            for r in 0..k {
                let idx = freq * k + r;
                if !self.kept[idx] {
                    continue;
                }
                let g: Complex64 = block
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * unit_phase((j * r) % k, k))
                    .sum();
                coeffs[idx] = g * f_scale / self.z[idx];
            }
        }
        // U_K back: inverse DFT over frequencies per diagonal.
        let mut out = vec![ZERO; d * k];
        for r in 0..k {
            for freq in 0..d {
                column[freq] = coeffs[freq * k + r];
            }
            self.dft.inverse(&mut column);
            for xi in 0..d {
                out[xi * k + r] = column[xi];
            }
        }
        Ok(out)
    }

    /// The regularized inverse applied to measurements, embedded as a banded
    /// Hermitian matrix. Discarded triples contribute nothing.
    pub fn apply_regularized_inverse(&self, y: &MeasurementGrid) -> Result<BandedHermitian> {
        if y.shape() != self.shape() {
            return Err(Error::Dimension(
                "measurement grid does not match the factorization".into(),
            ));
        }
        let yc: Vec<Complex64> = y.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let v = self.pseudo_inverse_vec(&yc)?;
        BandedHermitian::from_vec(&v, self.shape())
    }

    /// Dense `(U, σ, V)` with `M = U diag(σ) V*`, in the `(k, r)` ordering.
    pub fn dense_factors(&self) -> Result<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
        let shape = self.shape();
        let (d, k) = (shape.d(), shape.diagonals());
        let v = block_fourier_unitary(shape)?;
        let f = unitary_dft(k);
        let mut blockdiag = DMatrix::from_element(d * k, d * k, ZERO);
        for freq in 0..d {
            for r in 0..k {
                let sign = phase(self.z[freq * k + r]);
                for j in 0..k {
                    blockdiag[(freq * k + j, freq * k + r)] = f[(j, r)] * sign;
                }
            }
        }
        let u = &v * blockdiag;
        let sigma = self.z.iter().map(|z| z.norm()).collect();
        Ok((u, sigma, v))
    }
}

/// Bin edges of the singular value table, relative to the largest value.
pub const TABLE_EDGES: [f64; 7] = [0.0, 1e-4, 1e-3, 0.003_162_277_660_168_379_4, 1e-2, 1e-1, 10.0];

/// One row of the singular value distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinCount {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Distribution of the relative singular values: first the exact zeros
/// (`lo = hi = 0`), then the half-open bins `(lo, hi]` of [`TABLE_EDGES`].
pub fn singular_value_table(svd: &BlockSvd) -> Vec<BinCount> {
    let rel = svd.relative_singular_values();
    let zero = rel.iter().filter(|&&v| v <= ZERO_TOLERANCE).count();
    let mut out = vec![BinCount {
        lo: 0.0,
        hi: 0.0,
        count: zero,
    }];
    for pair in TABLE_EDGES.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let count = rel.iter().filter(|&&v| v > ZERO_TOLERANCE && v > lo && v <= hi).count();
        out.push(BinCount { lo, hi, count });
    }
    out
}

/// The set `I` of diagonals (1-based) with `z_{d/2+1, r} = 0` for even `d`
/// and a symmetric window.
pub fn parity_zero_set(delta: usize) -> Vec<usize> {
    let upper = (1..=delta).filter(|j| (delta - j) % 2 == 1);
    let lower = (delta + 1..2 * delta).filter(|j| (j - delta).is_multiple_of(2));
    upper.chain(lower).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::BandedHermitian;
    use crate::masks::{build_masks, forward_measure};
    use nalgebra::DVector;

    fn sample(d: usize, salt: f64) -> Vec<Complex64> {
        (0..d)
            .map(|i| {
                let t = i as f64 + salt;
                Complex64::new((1.9 * t).sin() + 0.1, (0.45 * t * t + 0.3).cos())
            })
            .collect()
    }

    fn gaussian(d: usize, delta: usize) -> WindowSpec {
        WindowSpec::gaussian(d, delta, 0.3).unwrap()
    }

    #[test]
    fn last_block_has_single_column() {
        let w = gaussian(16, 4);
        let b = build_block(4, &w).unwrap();
        for n in 0..7 {
            assert!(b[(n, 0)].norm() > 0.0);
            for j in 1..7 {
                assert_eq!(b[(n, j)], ZERO);
            }
        }
        assert!(build_block(0, &w).is_err());
        assert!(build_block(5, &w).is_err());
    }

    #[test]
    fn block_for_constant_window() {
        let one = Complex64::new(1.0, 0.0);
        let w = WindowSpec::custom(5, vec![one, one]).unwrap();
        let b = build_block(1, &w).unwrap();
        let s = 1.0 / 3f64.sqrt();
        // Every column is populated: the third one is the wrap-around entry
        // conj(w_2) w_1 of the lower diagonal.
        for n in 0..3 {
            for j in 0..3 {
                let expected = Complex64::from_polar(s, -2.0 * std::f64::consts::PI * (n * j) as f64 / 3.0);
                assert!((b[(n, j)] - expected).norm() < 1e-15);
            }
        }
        let last = build_block(2, &w).unwrap();
        for n in 0..3 {
            assert!((last[(n, 0)] - Complex64::new(s, 0.0)).norm() < 1e-15);
            assert_eq!(last[(n, 1)], ZERO);
            assert_eq!(last[(n, 2)], ZERO);
        }
    }

    #[test]
    fn dense_m_reproduces_measurements() {
        for (d, delta) in [(6, 2), (7, 3), (8, 3)] {
            let w = gaussian(d, delta);
            let m = dense_m(&w).unwrap();
            let masks = build_masks(&w);
            let x = sample(d, 0.3 * d as f64);
            let v = DVector::from_vec(BandedHermitian::from_signal(&x, delta).unwrap().vec());
            let y = forward_measure(&x, &masks).unwrap();
            let my = &m * v;
            for (a, b) in my.iter().zip(y.values()) {
                assert!((a - Complex64::new(*b, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_m_guard() {
        let w = gaussian(256, 8);
        assert!(matches!(dense_m(&w), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn block_fourier_is_unitary_and_diagonalizes() {
        let w = gaussian(8, 3);
        let u = block_fourier_unitary(w.shape()).unwrap();
        let eye = DMatrix::<Complex64>::identity(40, 40);
        assert!((u.adjoint() * &u - eye).norm() < 1e-12);
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        let (left, sigma, right) = svd.dense_factors().unwrap();
        let m = dense_m(&w).unwrap();
        let sig = DMatrix::from_diagonal(&DVector::from_iterator(
            40,
            sigma.iter().map(|s| Complex64::new(*s, 0.0)),
        ));
        assert!((&left * sig * right.adjoint() - m).norm() < 1e-10);
        assert!((left.adjoint() * &left - DMatrix::identity(40, 40)).norm() < 1e-10);
    }

    #[test]
    fn z_matches_closed_form_on_upper_diagonals() {
        let w = gaussian(12, 4);
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        for k in 0..12 {
            for r in 0..4 {
                assert!((svd.z(k, r) - closed_form_z(&w, k, r)).norm() < 1e-12);
            }
        }
        let energy: f64 = w.support().iter().map(|v| v.norm_sqr()).sum();
        assert!((svd.z(0, 0) - Complex64::new(energy, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dense_svd_matches_z() {
        let w = gaussian(8, 3);
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        let dense = dense_m(&w).unwrap().svd(false, false);
        let mut expected: Vec<f64> = dense.singular_values.iter().copied().collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        let got = svd.sorted_singular_values();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_window_zeros_at_half_frequency() {
        for delta in [4, 6, 8] {
            let d = 4 * delta;
            let svd = BlockSvd::new(&gaussian(d, delta), 0.0).unwrap();
            let zeros = parity_zero_set(delta);
            assert_eq!(zeros.len(), delta - 1);
            for r in 1..2 * delta {
                let v = svd.z(d / 2, r - 1).norm();
                if zeros.contains(&r) {
                    assert!(v < 1e-12, "delta {delta} r {r}: {v}");
                } else {
                    assert!(v > 1e-6, "delta {delta} r {r}: {v}");
                }
            }
        }
    }

    #[test]
    fn lost_index_examples() {
        let svd = BlockSvd::new(&gaussian(64, 8), 0.0).unwrap();
        let lost = svd.lost_indices();
        let expected: Vec<_> = [1, 3, 5, 7, 10, 12, 14].iter().map(|&r| (32, r - 1)).collect();
        assert_eq!(lost.pairs(), expected.as_slice());
        assert_eq!(lost.columns()[0], 15 * 32 + 1);

        let odd = BlockSvd::new(&gaussian(63, 8), 0.0).unwrap();
        assert!(odd.lost_indices().is_empty());

        let coarse = svd.with_epsilon(0.1).unwrap();
        assert_eq!(coarse.lost_indices().len(), 665);
    }

    #[test]
    fn table_counts() {
        let svd = BlockSvd::new(&gaussian(64, 8), 0.0).unwrap();
        let counts: Vec<usize> = singular_value_table(&svd).iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![7, 0, 8, 22, 50, 578, 295]);
    }

    #[test]
    fn exact_inversion_without_zero_singular_values() {
        let w = gaussian(7, 2);
        let masks = build_masks(&w);
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        assert!(svd.lost_indices().is_empty());
        let x = sample(7, 1.1);
        let y = forward_measure(&x, &masks).unwrap();
        let xs = svd.apply_regularized_inverse(&y).unwrap();
        let truth = BandedHermitian::from_signal(&x, 2).unwrap();
        assert!(xs.max_abs_diff(&truth) < 1e-8);
        let zero = svd
            .apply_regularized_inverse(&MeasurementGrid::zeros(w.shape()))
            .unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);
    }

    #[test]
    fn fast_and_direct_block_dft_agree() {
        // d = 23 is prime and takes the direct path.
        let w = gaussian(23, 3);
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        let mut fast = svd.clone();
        fast.dft = Dft::fast(23);
        let y: Vec<Complex64> = sample(23 * 5, 0.7);
        let a = svd.pseudo_inverse_vec(&y).unwrap();
        let b = fast.pseudo_inverse_vec(&y).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn pseudo_inverse_times_m_projects() {
        let w = gaussian(8, 3);
        let svd = BlockSvd::new(&w, 0.05).unwrap();
        assert!(svd.kept_count() < 40 && svd.kept_count() > 0);
        let m = dense_m(&w).unwrap();
        let mut pinv_m = DMatrix::from_element(40, 40, ZERO);
        for c in 0..40 {
            let col: Vec<Complex64> = m.column(c).iter().copied().collect();
            let out = svd.pseudo_inverse_vec(&col).unwrap();
            pinv_m.set_column(c, &DVector::from_vec(out));
        }
        let v = block_fourier_unitary(w.shape()).unwrap();
        let mut v1 = v.clone();
        for c in 0..40 {
            if !svd.is_kept(c / 5, c % 5) {
                v1.column_mut(c).fill(ZERO);
            }
        }
        let proj = &v1 * v1.adjoint();
        assert!((&pinv_m - &proj).norm() < 1e-10);
        assert!((&m * &pinv_m - &m * &proj).norm() < 1e-10);
    }
}
