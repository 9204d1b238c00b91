use marec::{
    ar_to_ma, classify_invertibility, fit_ar_ols, invertible_sibling, ma_to_ar, restricted_ols, simulate_ma, ArModel,
    Invertibility, MaModel, Real,
};

fn pipeline<T: Real>() -> Vec<f64> {
    let truth = MaModel::new(vec![T::lit(0.5), T::lit(0.3)]).unwrap();
    let y = simulate_ma(&truth, 4_000, 21).unwrap();
    restricted_ols(&y, 2, 40)
        .unwrap()
        .psi_hat
        .iter()
        .map(|v| v.as_f64())
        .collect()
}

#[test]
fn f32_and_f64_pipelines_agree() {
    let a = pipeline::<f64>();
    let b = pipeline::<f32>();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-3, "{a:?} vs {b:?}");
    }
    assert!((a[0] - 0.5).abs() < 0.1 && (a[1] - 0.3).abs() < 0.1);
}

#[test]
fn f32_recursions_and_roots() {
    let psi = ar_to_ma(&ArModel::new(vec![0.5f32, 0.3]).unwrap(), 3).unwrap();
    assert!((psi[2] - 0.425).abs() < 1e-6);
    let phi = ma_to_ar(&MaModel::new(vec![0.5f32]).unwrap(), 4).unwrap();
    assert_eq!(phi, vec![0.5, -0.25, 0.125, -0.0625]);

    let m = MaModel::new(vec![2.0f32]).unwrap();
    assert_eq!(classify_invertibility(&m, 1e-6).class, Invertibility::Noninvertible);
    let s = invertible_sibling(&m).unwrap();
    assert!((s.psi()[0] - 0.5).abs() < 1e-6 && (s.sigma2() - 4.0).abs() < 1e-5);
}

#[test]
fn f32_overflow_limit_is_lower() {
    let err = ar_to_ma(&ArModel::new(vec![1e10f32]).unwrap(), 10).unwrap_err();
    assert!(matches!(err, marec::Error::Overflow { index: 4, .. }), "{err:?}");
    let y = simulate_ma(&MaModel::new(vec![0.0f32]).unwrap(), 50, 1).unwrap();
    assert!(fit_ar_ols(&y, 2).is_ok());
}
