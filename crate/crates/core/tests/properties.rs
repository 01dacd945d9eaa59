use bequest_core::model::ModelParams;
use bequest_core::oracle::duality::duality_gap;
use bequest_core::{controlled, earmarked, predetermined, Model};
use proptest::prelude::*;

fn model(f: impl FnOnce(&mut ModelParams)) -> Model {
    let mut p = ModelParams::baseline();
    f(&mut p);
    Model::new(p).unwrap()
}

fn b_hat(m: &Model) -> f64 {
    predetermined::solve(m).unwrap().primal_boundary(1.0).unwrap()
}

fn b0(m: &Model) -> f64 {
    controlled::solve(m).unwrap().policy(1.0, 1.0).unwrap().bequest
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_decreasing_in_income(y1 in 0.05f64..5.0, dy in 0.01f64..2.0) {
        let sol = predetermined::solve(&Model::baseline()).unwrap();
        prop_assert!(sol.primal_boundary(y1 + dy).unwrap() < sol.primal_boundary(y1).unwrap());
    }

    #[test]
    fn threshold_decreasing_in_bequest_weight(l1 in 0.05f64..2.9, dl in 0.01f64..0.1) {
        let a = b_hat(&model(|p| p.l = l1));
        let b = b_hat(&model(|p| p.l = l1 + dl));
        prop_assert!(b < a, "{} {}", a, b);
    }

    #[test]
    fn threshold_decreasing_in_risk_aversion(g1 in 0.5f64..0.98, dg in 0.001f64..0.01) {
        let a = b_hat(&model(|p| p.gamma = g1));
        let b = b_hat(&model(|p| p.gamma = g1 + dg));
        prop_assert!(b < a, "{} {}", a, b);
    }

    #[test]
    fn threshold_increasing_in_bequest(b1 in 0.05f64..49.0, db in 0.01f64..1.0) {
        let a = b_hat(&model(|p| p.bequest_b = b1));
        let b = b_hat(&model(|p| p.bequest_b = b1 + db));
        prop_assert!(b > a, "{} {}", a, b);
    }

    #[test]
    fn chosen_bequest_increasing_in_weight_and_risk_aversion(l1 in 0.05f64..2.9, dl in 0.01f64..0.1,
                                                             g1 in 0.5f64..0.98, dg in 0.001f64..0.01) {
        prop_assert!(b0(&model(|p| p.l = l1 + dl)) > b0(&model(|p| p.l = l1)));
        prop_assert!(b0(&model(|p| p.gamma = g1 + dg)) > b0(&model(|p| p.gamma = g1)));
    }

    #[test]
    fn smooth_fit_everywhere(g in 0.5f64..0.99, l in 0.05f64..3.0, bq in 0.05f64..50.0) {
        let m = model(|p| { p.gamma = g; p.l = l; p.bequest_b = bq; });
        let sol = predetermined::solve(&m).unwrap();
        let [v, d] = sol.pasting_residuals().unwrap();
        let scale = sol.bequest_flow().abs().max(1.0);
        prop_assert!(v.abs() < 1e-9 * scale && d.abs() < 1e-9 * scale, "{} {}", v, d);
        prop_assert!(sol.b().unwrap() > 0.0);
    }

    #[test]
    fn value_increasing_and_concave_in_wealth(g in 0.5f64..0.99, x in -50.0f64..500.0) {
        let m = model(|p| p.gamma = g);
        let sol = predetermined::solve(&m).unwrap();
        let h = 1e-2 * (1.0 + x.abs());
        let (a, b, c) = (sol.value(x - h, 1.0).unwrap(), sol.value(x, 1.0).unwrap(), sol.value(x + h, 1.0).unwrap());
        prop_assert!(c > b && b > a);
        prop_assert!(a + c - 2.0 * b <= 1e-9 * b.abs());
        let d = sol.policy(x, 1.0).unwrap();
        prop_assert!(d.consumption > 0.0);
    }

    #[test]
    fn duality_gap_small(g in 0.5f64..0.99, x in -40.0f64..400.0, y in 0.2f64..3.0) {
        let sol = predetermined::solve(&model(|p| p.gamma = g)).unwrap();
        prop_assert!(duality_gap(&sol, x, y).unwrap().relative() < 1e-6);
    }

    #[test]
    fn choosing_the_bequest_never_hurts(g in 0.5f64..0.99, bq in 0.05f64..50.0, x in 0.0f64..400.0) {
        let m = model(|p| { p.gamma = g; p.bequest_b = bq; });
        let ctl = controlled::solve(&m).unwrap().value(x, 1.0).unwrap();
        let pre = predetermined::solve(&m).unwrap().value(x, 1.0).unwrap();
        prop_assert!(ctl >= pre - 1e-9 * pre.abs());
    }

    #[test]
    fn earmarking_lowers_the_fixed_bequest_boundary(g in 0.5f64..0.99, q in 1e-6f64..2.0) {
        let m = model(|p| p.gamma = g);
        let b = predetermined::solve(&m).unwrap().b().unwrap();
        let e = earmarked::earmarked_boundary(&m, q, 5.0).unwrap();
        prop_assert!(e.b_bar < b);
        let [v, d] = e.pasting_residuals();
        prop_assert!(v.abs() < 1e-9 * e.gain.abs().max(1.0) && d.abs() < 1e-9);
    }
}
