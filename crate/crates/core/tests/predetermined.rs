use bequest_core::model::ModelParams;
use bequest_core::predetermined::{self, Region};
use bequest_core::Model;

fn model_with(bequest: f64) -> Model {
    Model::new(ModelParams { bequest_b: bequest, ..ModelParams::baseline() }).unwrap()
}

/// Value of waiting with an arbitrary threshold c, evaluated at z > c, from the
/// expected discounted flow h Z − m u(lB) killed on hitting c.
fn wait_value(m: &Model, c: f64, z: f64) -> f64 {
    let p = &m.p;
    let a1 = {
        let th = m.dc.theta;
        let (a, b, cc) = (0.5 * th * th, p.rho - p.r + p.m - 0.5 * th * th, -(p.rho + p.m));
        (-b - (b * b - 4.0 * a * cc).sqrt()) / (2.0 * a)
    };
    let gain = |s: f64| m.dc.h * s / p.r - p.m * m.u(p.l * p.bequest_b) / (p.rho + p.m);
    gain(z) - gain(c) * (z / c).powf(a1)
}

fn argmax(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn boundary_maximises_the_value_of_waiting() {
    let m = Model::baseline();
    let sol = predetermined::solve(&m).unwrap();
    let b = sol.b().unwrap();
    let best = argmax(|c| wait_value(&m, c, 3.0 * b), 1e-3 * b, 2.9 * b);
    assert!((best / b - 1.0).abs() < 1e-6, "{best} vs {b}");
    assert!((b - 0.24847).abs() < 5e-6);
}

#[test]
fn policy_rows_fixed_bequest() {
    let sol = predetermined::solve(&model_with(5.0)).unwrap();
    let d = sol.policy(1.0, 1.0).unwrap();
    assert_eq!(d.region, Region::Continue);
    assert!((d.investment - 33.482).abs() < 5e-3, "{}", d.investment);
    assert!((d.consumption - 1.477).abs() < 5e-3, "{}", d.consumption);

    let sol = predetermined::solve(&model_with(0.351)).unwrap();
    let d = sol.policy(1.0, 1.0).unwrap();
    assert_eq!(d.region, Region::Stop);
    assert!((d.investment - 32.216).abs() < 5e-3, "{}", d.investment);
    assert!((d.consumption - 1.479).abs() < 5e-3, "{}", d.consumption);
}

#[test]
fn value_is_the_dual_minimum() {
    let sol = predetermined::solve(&Model::baseline()).unwrap();
    for (x, y) in [(1.0, 1.0), (150.0, 1.0), (300.0, 1.0), (-20.0, 0.8)] {
        let v = sol.value(x, y).unwrap();
        let f = |lz: f64| -(sol.dual_v(lz.exp(), y) + lz.exp() * x);
        let lz = argmax(f, -20.0, 20.0);
        let direct = -f(lz);
        assert!((v / direct - 1.0).abs() < 1e-10, "({x}, {y}): {v} vs {direct}");
    }
    assert!((sol.value(1.0, 1.0).unwrap() - 203.294012).abs() < 1e-5);
}

#[test]
fn stopping_region_uses_merton_after_purchase() {
    let m = Model::baseline();
    let sol = predetermined::solve(&m).unwrap();
    let t = sol.wealth_threshold().unwrap();
    let x = t + 20.0 - 55.0;
    let d = sol.policy(x, 1.0).unwrap();
    assert_eq!(d.region, Region::Stop);
    let (c, pi) = m.post_purchase_policy(x, 1.0, 5.0).unwrap();
    assert!((d.consumption - c).abs() < 1e-10 * c);
    assert!((d.investment - pi).abs() < 1e-10 * pi.abs());
}

#[test]
fn wealth_threshold_matches_primal_boundary() {
    let sol = predetermined::solve(&Model::baseline()).unwrap();
    let t = sol.wealth_threshold().unwrap();
    for y in [0.5, 1.0, 2.0] {
        let bh = sol.primal_boundary(y).unwrap();
        assert!((bh + y * 55.0 - t).abs() < 1e-9 * t);
    }
    // The policy switches at the boundary.
    let bh = sol.primal_boundary(1.0).unwrap();
    assert_eq!(sol.policy(bh * 0.999, 1.0).unwrap().region, Region::Continue);
    assert_eq!(sol.policy(bh * 1.001, 1.0).unwrap().region, Region::Stop);
}

#[test]
fn value_continuous_and_increasing_across_boundary() {
    let sol = predetermined::solve(&Model::baseline()).unwrap();
    let bh = sol.primal_boundary(1.0).unwrap();
    let (a, b) = (sol.value(bh - 1e-6, 1.0).unwrap(), sol.value(bh + 1e-6, 1.0).unwrap());
    assert!(b > a && b - a < 1e-6);
    let (ca, cb) = (sol.policy(bh - 1e-6, 1.0).unwrap(), sol.policy(bh + 1e-6, 1.0).unwrap());
    assert!((ca.consumption / cb.consumption - 1.0).abs() < 1e-5);
}

#[test]
fn gamma_above_one_is_immediate() {
    let m = Model::new(ModelParams { gamma: 1.8, ..ModelParams::baseline() }).unwrap();
    let sol = predetermined::solve(&m).unwrap();
    assert!(sol.immediate_purchase());
    assert!(sol.primal_boundary(1.0).is_err());
    assert_eq!(sol.policy(1.0, 1.0).unwrap().region, Region::Stop);
}

#[test]
fn inadmissible_wealth_rejected() {
    let sol = predetermined::solve(&Model::baseline()).unwrap();
    assert!(sol.value(-56.0, 1.0).is_err());
    assert!(sol.value(1.0, -1.0).is_err());
}
