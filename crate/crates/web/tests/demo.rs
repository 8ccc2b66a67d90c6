use accretive::majorant::ThetaFunction;
use accretive_web::demo::*;

#[test]
fn profile_is_piecewise() {
    let v = coalbedo_profile(0.3, 0.8, 0.1, -1.0, 1.0, 201).unwrap();
    assert_eq!(v.len(), 201);
    assert_eq!(v[0], 0.3);
    assert_eq!(v[200], 0.8);
    assert!(v.windows(2).all(|w| w[1] >= w[0]));
    let c = coalbedo_constant(0.3, 0.8, 0.1).unwrap();
    assert!((c - 0.5 / (0.1 * 10f64.ln())).abs() < 1e-12);
    assert!(coalbedo_profile(0.8, 0.3, 0.1, -1.0, 1.0, 10).is_err());
}

#[test]
fn linear_majorant_is_exponential() {
    let v = majorant_curve(&ThetaFunction::Identity, 1.0, 1.0, 1.0, 10).unwrap();
    assert_eq!(v.len(), 11);
    for (k, u) in v.iter().enumerate() {
        let t = k as f64 / 10.0;
        assert!((u - t.exp()).abs() < 1e-8 * t.exp(), "k={k} {u} {}", t.exp());
    }
    assert_eq!(
        blowup_time(&ThetaFunction::Identity, 1.0, 1.0).unwrap(),
        f64::INFINITY
    );
}

#[test]
fn quadratic_majorant_blows_up_at_one() {
    let theta = theta_from_name("power", 2.0).unwrap();
    let h = blowup_time(&theta, 1.0, 1.0).unwrap();
    assert!((h - 1.0).abs() < 1e-8);
    let v = majorant_curve(&theta, 1.0, 1.0, 2.0, 100).unwrap();
    assert!(v.len() < 101);
    assert!(v.len() >= 50);
    assert!(theta_from_name("cubic", 3.0).is_err());
}

#[test]
fn p_laplace_flow_smooths_and_keeps_range() {
    let x = bump(33, 1.05).unwrap();
    let y = p_laplace_flow(3.0, 33, 1.05, 0.5, 50).unwrap();
    let (lo, hi) = x
        .as_slice()
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(y.iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9));
    let spread =
        |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread(&y) < spread(x.as_slice()));
    assert_eq!(p_laplace_flow(3.0, 33, 1.05, 0.0, 5).unwrap(), x.into_vec());
    assert!(p_laplace_flow(3.0, 33, 1.05, 0.5, 0).is_err());
}
