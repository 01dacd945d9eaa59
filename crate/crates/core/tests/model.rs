use bequest_core::model::{
    characteristic_residual, derive_constants, simulate_paths, validate_assumptions, ModelParams, SimConfig,
    Violation,
};
use bequest_core::{Error, Model};

fn baseline() -> ModelParams {
    ModelParams::baseline()
}

#[test]
fn baseline_derived_constants() {
    let d = derive_constants(&baseline()).unwrap();
    // θ = (μ − r)/σ and κ = r − μ_y + σ_y θ by hand.
    let theta = (0.05 - 0.01) / 0.22;
    let kappa = 0.01 - 0.01 + 0.1 * theta;
    assert!((d.theta - theta).abs() < 1e-15);
    assert!((d.kappa - kappa).abs() < 1e-15);
    assert!((1.0 / d.kappa - 55.0).abs() < 1e-12);
    assert!((d.k - 0.02671).abs() < 5e-6);
    assert!((d.alpha1 + 1.3196).abs() < 5e-5);
    assert!((d.h - 0.0875).abs() < 1e-15);
    assert!(d.integrable);
}

#[test]
fn characteristic_roots_solve_the_quadratic() {
    let d = derive_constants(&baseline()).unwrap();
    let p = baseline();
    for a in [d.alpha1, d.alpha2] {
        assert!(characteristic_residual(d.theta, p.r, p.rho, p.m, a).abs() < 1e-14);
    }
    assert!(d.alpha1 < 0.0 && d.alpha2 > 1.0);
}

#[test]
fn gamma_one_rejected() {
    let p = ModelParams { gamma: 1.0, ..baseline() };
    assert!(validate_assumptions(&p, true).contains(&Violation::GammaIsOne));
    assert!(matches!(Model::new(p), Err(Error::InvalidParams(_))));
}

#[test]
fn nonpositive_kappa_named() {
    let p = ModelParams { mu_y: 0.2, ..baseline() };
    let v = validate_assumptions(&p, true);
    assert!(v.contains(&Violation::KappaNonPositive), "{v:?}");
    assert!(v.iter().any(|x| x.to_string().starts_with("KAPPA_NON_POSITIVE")));
}

#[test]
fn low_discount_named() {
    let p = ModelParams { rho: 0.001, m: 0.001, ..baseline() };
    let v = validate_assumptions(&p, false);
    assert!(v.contains(&Violation::DiscountTooLow), "{v:?}");
}

#[test]
fn every_bad_field_reported() {
    let p = ModelParams { sigma: -1.0, l: 0.0, bequest_b: -2.0, ..baseline() };
    let codes: Vec<String> = validate_assumptions(&p, true).iter().map(|v| v.to_string()).collect();
    assert!(codes.iter().any(|c| c.contains("sigma")));
    assert!(codes.iter().any(|c| c.contains(" l ")));
    assert!(codes.iter().any(|c| c.contains("bequest_B")));
}

fn sim(n: usize) -> SimConfig {
    SimConfig { n_paths: n, dt: 0.1, horizon_t: 5.0, seed: 11, antithetic: true, stretch: 0.0 }
}

#[test]
fn paths_are_seed_deterministic() {
    let m = Model::baseline();
    let a = simulate_paths(&m, &sim(8), 0.7).unwrap();
    let b = simulate_paths(&m, &sim(8), 0.7).unwrap();
    assert_eq!(a, b);
    let c = simulate_paths(&m, &SimConfig { seed: 12, ..sim(8) }, 0.7).unwrap();
    assert_ne!(a.z, c.z);
}

#[test]
fn path_moments_match_lognormal_means() {
    let m = Model::baseline();
    let s = sim(4000);
    let bundle = simulate_paths(&m, &s, 1.0).unwrap();
    let last = bundle.n_times() - 1;
    let t = bundle.times[last];
    let (mut ey, mut exi) = (0.0, 0.0);
    for p in 0..bundle.n_paths {
        ey += bundle.y_path(p)[last];
        exi += bundle.xi_path(p)[last];
    }
    ey /= bundle.n_paths as f64;
    exi /= bundle.n_paths as f64;
    assert!((ey / (0.01 * t).exp() - 1.0).abs() < 0.01, "E[Y_T] = {ey}");
    assert!((exi / (-0.01 * t).exp() - 1.0).abs() < 0.02, "E[xi_T] = {exi}");
}

#[test]
fn path_csv_header() {
    let m = Model::baseline();
    let bundle = simulate_paths(&m, &sim(2), 1.0).unwrap();
    let mut buf = Vec::new();
    bundle.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t,path_id,W,Y,xi,Z"));
    assert_eq!(text.lines().count(), 1 + 2 * bundle.n_times());

    let g = m.with(|p| p.gompertz_a = 0.03).unwrap();
    let mut buf = Vec::new();
    simulate_paths(&g, &sim(2), 1.0).unwrap().write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,path_id,W,Y,xi,Z,M\n"));
}

#[test]
fn invalid_sim_config_rejected() {
    let m = Model::baseline();
    assert!(simulate_paths(&m, &SimConfig { n_paths: 0, ..sim(1) }, 1.0).is_err());
    assert!(simulate_paths(&m, &SimConfig { dt: -1.0, ..sim(2) }, 1.0).is_err());
    assert!(simulate_paths(&m, &sim(2), 0.0).is_err());
}
