use nalgebra::DMatrix;
use proptest::prelude::*;
use ptychosc::{
    build_masks, forward_measure, random_signal, relative_error, run_blockpr_sc, BandShape, BandedHermitian, BlockSvd,
    Complex64, MagnitudeMode, MeasurementGrid, WindowSpec,
};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)),
        len,
    )
}

fn dense(d: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    complex_vec(d * d).prop_map(move |v| DMatrix::from_vec(d, d, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent(a in dense(9), delta in 1usize..=5) {
        let once = BandedHermitian::project(&a, delta).unwrap();
        let twice = BandedHermitian::project(&once.to_dense(), delta).unwrap();
        prop_assert!(once.max_abs_diff(&twice) < 1e-14);
    }

    #[test]
    fn projection_is_self_adjoint(a in dense(8), b in dense(8), delta in 1usize..=4) {
        // <T(A), B> = <A, T(B)> in the real Frobenius inner product
        let ip = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| {
            x.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>()
        };
        let ta = BandedHermitian::project(&a, delta).unwrap().to_dense();
        let tb = BandedHermitian::project(&b, delta).unwrap().to_dense();
        prop_assert!((ip(&ta, &b) - ip(&a, &tb)).abs() < 1e-12);
    }

    #[test]
    fn vec_round_trips(a in dense(10), delta in 1usize..=5) {
        let x = BandedHermitian::project(&a, delta).unwrap();
        let back = BandedHermitian::from_vec(&x.vec(), x.shape()).unwrap();
        prop_assert!(x.max_abs_diff(&back) < 1e-15);
    }

    #[test]
    fn regularized_inverse_is_linear(
        u in prop::collection::vec(0.0..1.0f64, 11 * 5),
        v in prop::collection::vec(0.0..1.0f64, 11 * 5),
        alpha in -2.0..2.0f64,
        eps in prop::sample::select(vec![0.0, 1e-3, 1e-1]),
    ) {
        let w = WindowSpec::gaussian(11, 3, 0.3).unwrap();
        let svd = BlockSvd::new(&w, eps).unwrap();
        let shape = BandShape::new(11, 3).unwrap();
        let grid = |vals: Vec<f64>| MeasurementGrid::new(shape, vals).unwrap();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + b).collect();
        let lhs = svd.apply_regularized_inverse(&grid(mix)).unwrap();
        let xu = svd.apply_regularized_inverse(&grid(u)).unwrap();
        let xv = svd.apply_regularized_inverse(&grid(v)).unwrap();
        let rhs = BandedHermitian::from_bands(
            shape,
            xu.bands()
                .iter()
                .zip(xv.bands())
                .map(|(p, q)| p.iter().zip(q).map(|(a, b)| a * alpha + b).collect())
                .collect(),
        )
        .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * (1.0 + rhs.frobenius_norm()));
    }
}

#[test]
fn noiseless_recovery_across_dimensions() {
    for (d, delta) in [(15, 4), (16, 4), (63, 8), (64, 8)] {
        let w = WindowSpec::gaussian(d, delta, 0.3).unwrap();
        let svd = BlockSvd::new(&w, 0.0).unwrap();
        let masks = build_masks(&w);
        for seed in 0..3 {
            let x0 = random_signal(d, 100 + seed);
            let y = forward_measure(x0.as_slice(), &masks).unwrap();
            let rec = run_blockpr_sc(&y, &svd, MagnitudeMode::Block).unwrap();
            assert!(rec.complete, "d={d}");
            let err = relative_error(&rec.signal, &x0).unwrap();
            assert!(err < 1e-8, "d={d} seed={seed} err={err}");
        }
    }
}

#[test]
fn global_phase_does_not_change_measurements() {
    let w = WindowSpec::gaussian(20, 5, 0.3).unwrap();
    let masks = build_masks(&w);
    let x0 = random_signal(20, 4);
    let turned: Vec<Complex64> = x0.iter().map(|v| v * Complex64::from_polar(1.0, 2.1)).collect();
    let a = forward_measure(x0.as_slice(), &masks).unwrap();
    let b = forward_measure(&turned, &masks).unwrap();
    let diff = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-12);
}
