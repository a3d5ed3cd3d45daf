//! Subspace completion.
//!
//! The regularized inverse recovers the DFT coefficient `L̂^r_ξ` of diagonal
//! `r` exactly when the singular triple `(ξ, r)` is kept; discarded triples
//! read as zero. The rank-one structure of `T_δ(x x*)` ties the diagonals
//! together through
//!
//! ```text
//! L^r ∘ S_t conj(L^r) = L^t ∘ S_r conj(L^t)      (offsets r, t < δ)
//! ```
//!
//! Given one fully known reference diagonal `r` and a target diagonal `t`
//! missing a single coefficient `q`, the DFT of this identity is linear in
//! `(Re L̂^t_q, Im L̂^t_q)` for every frequency `j != 0`:
//!
//! ```text
//! d·c_j - z_j = a_j L̂^t_q + b_j conj(L̂^t_q)
//! ```
//!
//! with `c = dft(L^r ∘ S_t conj(L^r))`, the known part of the convolution
//! sum `z_j`, `a_j = e^{2πi r(j-q)/d} conj(L̂^t_{q-j})` and
//! `b_j = e^{-2πi rq/d} L̂^t_{j+q}`. The factor `d` comes from the
//! unnormalized DFT. Stacking the real 2×2 blocks gives an overdetermined
//! system solved by least squares.
//!
//! Only the upper diagonals `0..δ` are completed; the rest follow from
//! Hermitian symmetry.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::banded::{BandShape, BandedHermitian, DiagonalSet};
use crate::error::{Error, Result};
use crate::fourier::Dft;
use crate::signal::unit_phase;
use crate::spectral::BlockSvd;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative singular value cut below which a coefficient system is rank
/// deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Fourier coefficients of the upper diagonals of `X_S` together with the
/// positions lost to truncation.
#[derive(Clone, Debug)]
pub struct CompletionProblem {
    shape: BandShape,
    coeffs: Vec<Vec<Complex64>>,
    missing: Vec<Vec<usize>>,
    conditioning: Vec<f64>,
}

impl CompletionProblem {
    /// Builds a problem from explicit coefficients. `conditioning[s]` ranks
    /// candidate reference diagonals (larger is better).
    pub fn new(
        shape: BandShape,
        coeffs: Vec<Vec<Complex64>>,
        missing: Vec<Vec<usize>>,
        conditioning: Vec<f64>,
    ) -> Result<Self> {
        let delta = shape.delta();
        let ok = coeffs.len() == delta
            && coeffs.iter().all(|c| c.len() == shape.d())
            && missing.len() == delta
            && missing.iter().flatten().all(|&q| q < shape.d())
            && conditioning.len() == delta;
        if !ok {
            return Err(Error::Dimension("completion problem has the wrong shape".into()));
        }
        let missing = missing
            .into_iter()
            .map(|mut m| {
                m.sort_unstable();
                m.dedup();
                m
            })
            .collect();
        Ok(CompletionProblem {
            shape,
            coeffs,
            missing,
            conditioning,
        })
    }

    pub fn shape(&self) -> BandShape {
        self.shape
    }

    /// DFT coefficients of upper diagonal `s`; missing entries read as zero.
    pub fn coefficients(&self, s: usize) -> &[Complex64] {
        &self.coeffs[s]
    }

    /// Missing frequencies (0-based) of upper diagonal `s`.
    pub fn missing(&self, s: usize) -> &[usize] {
        &self.missing[s]
    }

    pub fn is_full(&self, s: usize) -> bool {
        self.missing[s].is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().map(Vec::len).sum()
    }

    /// At least one diagonal is fully known.
    pub fn has_reference(&self) -> bool {
        (0..self.shape.delta()).any(|s| self.is_full(s))
    }

    /// No diagonal misses more than one coefficient.
    pub fn at_most_one_missing(&self) -> bool {
        self.missing.iter().all(|m| m.len() <= 1)
    }

    /// Best-conditioned full diagonal; ties go to the smaller offset.
    pub fn reference(&self) -> Option<usize> {
        (0..self.shape.delta())
            .filter(|&s| self.is_full(s))
            .fold(None, |best: Option<usize>, s| match best {
                Some(b) if self.conditioning[b] >= self.conditioning[s] => Some(b),
                _ => Some(s),
            })
    }
}

/// Reads the recovered Fourier coefficients of the diagonals of `x_s`.
///
/// Upper diagonal `s` at frequency `k` is missing when the triple `(k, s)` or
/// its Hermitian partner `(-k, 2δ-1-s)` is in the lost set of `svd`; such
/// positions are set to zero.
pub fn extract_known_coefficients(x_s: &BandedHermitian, svd: &BlockSvd) -> Result<CompletionProblem> {
    let shape = svd.shape();
    if x_s.shape() != shape {
        return Err(Error::Dimension("matrix does not match the factorization".into()));
    }
    let (d, kk) = (shape.d(), shape.diagonals());
    let dft = Dft::new(d);
    let mut coeffs = Vec::with_capacity(shape.delta());
    let mut missing = Vec::with_capacity(shape.delta());
    let mut conditioning = Vec::with_capacity(shape.delta());
    for s in 0..shape.delta() {
        let mut c = dft.forward_vec(x_s.band(s));
        let lost: Vec<usize> = (0..d)
            .filter(|&k| svd.is_lost(k, s) || (s > 0 && svd.is_lost((d - k) % d, kk - s)))
            .collect();
        for &k in &lost {
            c[k] = ZERO;
        }
        coeffs.push(c);
        missing.push(lost);
        conditioning.push(svd.min_singular_on_diagonal(s) / svd.max_singular_value());
    }
    CompletionProblem::new(shape, coeffs, missing, conditioning)
}

/// The stacked real system `Q [Re; Im] = v` for one missing coefficient.
#[derive(Clone, Debug)]
pub struct LinearCoefficientSystem {
    q: DMatrix<f64>,
    v: DVector<f64>,
    target: usize,
    position: usize,
}

impl LinearCoefficientSystem {
    pub fn from_parts(q: DMatrix<f64>, v: DVector<f64>, target: usize, position: usize) -> Result<Self> {
        if q.ncols() != 2 || q.nrows() != v.len() {
            return Err(Error::Dimension(
                "coefficient system must be n x 2 with a length-n rhs".into(),
            ));
        }
        Ok(LinearCoefficientSystem { q, v, target, position })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.v
    }

    /// `(diagonal, frequency)` of the unknown.
    pub fn target(&self) -> (usize, usize) {
        (self.target, self.position)
    }

    /// `‖Q [Re z; Im z] - v‖`
    pub fn residual(&self, z: Complex64) -> f64 {
        (&self.q * DVector::from_vec(vec![z.re, z.im]) - &self.v).norm()
    }

    /// Least-squares solution.
    pub fn solve(&self) -> Result<Complex64> {
        let svd = self.q.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        if !(s_max > 0.0) || s_min <= RANK_TOLERANCE * s_max {
            return Err(Error::RankDeficient { sigma_min: s_min });
        }
        let x = svd.solve(&self.v, 0.0).map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(Complex64::new(x[0], x[1]))
    }
}

/// Builds the system for the coefficient `position` of diagonal `target`
/// using the full diagonal `reference` (offsets are 0-based, `< δ`).
pub fn build_linear_system(
    problem: &CompletionProblem,
    reference: usize,
    target: usize,
    position: usize,
) -> Result<LinearCoefficientSystem> {
    let delta = problem.shape.delta();
    if reference >= delta || target >= delta || position >= problem.shape.d() {
        return Err(Error::Parameter(format!(
            "reference {reference}, target {target}, position {position} out of range"
        )));
    }
    if reference == target {
        return Err(Error::Parameter("reference and target must differ".into()));
    }
    if !problem.is_full(reference) {
        return Err(Error::Assumption(format!(
            "reference diagonal {reference} is not fully known"
        )));
    }
    match problem.missing(target) {
        [q] if *q == position => {}
        [_] | [] => {
            return Err(Error::Parameter(format!(
                "coefficient {position} of diagonal {target} is not missing"
            )))
        }
        more => {
            return Err(Error::Assumption(format!(
                "diagonal {target} misses {} coefficients",
                more.len()
            )))
        }
    }
    let dft = Dft::new(problem.shape.d());
    Ok(assemble_system(
        &dft,
        &problem.coeffs[reference],
        &problem.coeffs[target],
        reference,
        target,
        position,
    ))
}

/// Same construction without precondition checks; other unknown
/// coefficients of the target enter with whatever value they currently hold.
fn assemble_system(
    dft: &Dft,
    reference_coeffs: &[Complex64],
    target_coeffs: &[Complex64],
    reference: usize,
    target: usize,
    q: usize,
) -> LinearCoefficientSystem {
    let d = target_coeffs.len();
    let lr = dft.inverse_vec(reference_coeffs);
    let lhs: Vec<Complex64> = (0..d).map(|z| lr[z] * lr[(z + target) % d].conj()).collect();
    let c = dft.forward_vec(&lhs);
    let lt = target_coeffs;
    let ramp = |m: usize| unit_phase((reference * m) % d, d);

    let rows = 2 * (d - 1);
    let mut qm = DMatrix::zeros(rows, 2);
    let mut v = DVector::zeros(rows);
    for j in 1..d {
        let p1 = (j + d - q) % d;
        let p2 = (d - q) % d;
        let z: Complex64 = (0..d)
            .filter(|&p| p != p1 && p != p2)
            .map(|p| ramp(p) * lt[(j + d - p) % d] * lt[(d - p) % d].conj())
            .sum();
        let a = ramp(p1) * lt[(q + d - j) % d].conj();
        let b = ramp(p2) * lt[(j + q) % d];
        let rhs = c[j] * d as f64 - z;
        let row = 2 * (j - 1);
        qm[(row, 0)] = a.re + b.re;
        qm[(row, 1)] = -a.im + b.im;
        qm[(row + 1, 0)] = a.im + b.im;
        qm[(row + 1, 1)] = a.re - b.re;
        v[row] = rhs.re;
        v[row + 1] = rhs.im;
    }
    LinearCoefficientSystem {
        q: qm,
        v,
        target,
        position: q,
    }
}

pub fn solve_missing(system: &LinearCoefficientSystem) -> Result<Complex64> {
    system.solve()
}

/// One solved coefficient and the residual of its system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolvedCoefficient {
    pub diagonal: usize,
    pub position: usize,
    pub value: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct CompletionOutcome {
    pub diagonals: DiagonalSet,
    /// Both completion assumptions held and every system was solved.
    pub complete: bool,
    pub solved: Vec<SolvedCoefficient>,
}

impl CompletionOutcome {
    pub fn assemble(&self) -> BandedHermitian {
        self.diagonals.assemble()
    }
}

/// Recovers the missing coefficients.
///
/// With a fully known reference diagonal and at most one missing coefficient
/// per diagonal, every gap is solved exactly (noiseless) by least squares.
/// Otherwise a single sequential pass runs: diagonals in ascending order of
/// missing count (then offset), each missing coefficient solved against the
/// best reference with the still-unknown ones held at zero. Coefficients
/// whose system is rank deficient, or all of them when no reference exists,
/// stay zero.
pub fn complete(problem: &CompletionProblem) -> CompletionOutcome {
    let shape = problem.shape;
    let (d, delta) = (shape.d(), shape.delta());
    let dft = Dft::new(d);
    let mut coeffs = problem.coeffs.clone();
    let mut known: Vec<Vec<bool>> = problem
        .missing
        .iter()
        .map(|m| {
            let mut k = vec![true; d];
            m.iter().for_each(|&q| k[q] = false);
            k
        })
        .collect();
    let mut solved = Vec::new();
    let mut complete = problem.has_reference() && problem.at_most_one_missing();

    if let Some(reference) = problem.reference() {
        let mut order: Vec<usize> = (0..delta).filter(|&s| !problem.is_full(s)).collect();
        order.sort_by_key(|&s| (problem.missing[s].len(), s));
        for s in order {
            for &q in &problem.missing[s] {
                let system = assemble_system(&dft, &coeffs[reference], &coeffs[s], reference, s, q);
                match system.solve() {
                    Ok(value) => {
                        coeffs[s][q] = value;
                        known[s][q] = true;
                        solved.push(SolvedCoefficient {
                            diagonal: s,
                            position: q,
                            value,
                            residual: system.residual(value),
                        });
                    }
                    Err(_) => complete = false,
                }
            }
        }
    }

    let bands: Vec<Vec<Complex64>> = coeffs.iter().map(|c| dft.inverse_vec(c)).collect();
    let matrix = BandedHermitian::from_bands(shape, bands).expect("shape is consistent");
    let all = matrix.diagonals();
    let kk = shape.diagonals();
    let mut flags = vec![vec![true; d]; kk];
    for s in 0..delta {
        for k in 0..d {
            if !known[s][k] {
                flags[s][k] = false;
                if s > 0 {
                    flags[kk - s][(d - k) % d] = false;
                }
            }
        }
    }
    let diagonals = DiagonalSet::with_flags(shape, all.diagonals().to_vec(), flags).expect("shape is consistent");
    CompletionOutcome {
        diagonals,
        complete,
        solved,
    }
}
