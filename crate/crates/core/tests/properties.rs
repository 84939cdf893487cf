mod common;

use proptest::prelude::*;
use sfif_core::eval::{depth_for_tolerance, eval_at_depth, MAX_DEPTH};
use sfif_core::functions::DataFunction;
use sfif_core::model::{address_of, check_join_up, uniform_grid};
use sfif_core::spline::{admissible_limit, build_sifs_spline, JOIN_UP_TOL};
use sfif_core::{BoundaryCondition, CodeWord, InterpolationData};

fn gammas(n: usize) -> impl Strategy<Value = Vec<f64>> {
    let lim = 0.95 * admissible_limit(n);
    prop::collection::vec(-lim..lim, 1..4).prop_filter("distinct", |g| {
        g.iter()
            .enumerate()
            .all(|(i, a)| g[i + 1..].iter().all(|b| (a - b).abs() > 1e-6))
    })
}

fn data() -> impl Strategy<Value = InterpolationData> {
    (2usize..10, 0.5f64..3.0).prop_flat_map(|(n, len)| {
        prop::collection::vec(-2.0f64..2.0, n + 1)
            .prop_map(move |y| InterpolationData::new(uniform_grid(0.0, len, n + 1), y).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn address_round_trip(n in 2usize..9, len in 0.1f64..5.0, t in 0.0f64..=1.0, depth in 1usize..12) {
        let d = InterpolationData::new(uniform_grid(0.0, len, n + 1), vec![0.0; n + 1]).unwrap();
        let x = t * len;
        let addr = address_of(&d, x, depth).unwrap();
        prop_assert_eq!(addr.depth(), depth);
        let back = addr.reconstruct(&sfif_core::model::build_maps(&d));
        prop_assert!((back - x).abs() <= 1e-12 * len.max(1.0));
    }

    #[test]
    fn built_pools_join_up(d in data(), seed in 0u64..1000, raw in gammas(10)) {
        let scale = admissible_limit(d.n()) / admissible_limit(10);
        let g: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let model = build_sifs_spline(&d, &g, BoundaryCondition::Natural).unwrap();
        prop_assert!(check_join_up(model.sifs(), JOIN_UP_TOL).passes());
        let sigma = CodeWord::seeded(seed, MAX_DEPTH, model.m()).unwrap();
        let v = eval_at_depth(&model, &sigma, 0, 6, d.knots()).unwrap();
        for (a, b) in v.iter().zip(d.ordinates()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn cubic_data_reproduced_by_every_word(n in 2usize..12, seed in 0u64..1000, raw in gammas(12)) {
        let f = DataFunction::Poly3;
        let d = InterpolationData::from_fn(0.0, 1.0, n, |x| f.value(x)).unwrap();
        let scale = 0.5 * admissible_limit(n) / admissible_limit(12);
        let g: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let boundary = BoundaryCondition::Clamped { d0: f.derivative(1, 0.0), dn: f.derivative(1, 1.0) };
        let model = build_sifs_spline(&d, &g, boundary).unwrap();
        let sigma = CodeWord::seeded(seed, MAX_DEPTH, model.m()).unwrap();
        let grid = uniform_grid(0.0, 1.0, 97);
        for j in 0..3 {
            let k = depth_for_tolerance(&model, j, 1e-11).unwrap();
            let v = eval_at_depth(&model, &sigma, j, k, &grid).unwrap();
            for (x, y) in grid.iter().zip(&v) {
                prop_assert!((y - f.derivative(j, *x)).abs() <= 1e-9, "j = {} x = {}", j, x);
            }
        }
    }

    #[test]
    fn lines_reproduced_under_natural_ends(n in 2usize..12, c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, seed in 0u64..1000) {
        let d = InterpolationData::from_fn(0.0, 2.0, n, |x| c0 + c1 * x).unwrap();
        let lim = admissible_limit(n);
        let model = build_sifs_spline(&d, &[0.5 * lim, -0.3 * lim], BoundaryCondition::Natural).unwrap();
        let sigma = CodeWord::seeded(seed, MAX_DEPTH, 2).unwrap();
        let grid = uniform_grid(0.0, 2.0, 61);
        let v = eval_at_depth(&model, &sigma, 0, 8, &grid).unwrap();
        for (x, y) in grid.iter().zip(&v) {
            prop_assert!((y - (c0 + c1 * x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn exact_lipschitz_constants_dominate_samples(d in data(), raw in gammas(10)) {
        let scale = admissible_limit(d.n()) / admissible_limit(10);
        let g: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let model = build_sifs_spline(&d, &g, BoundaryCondition::Natural).unwrap();
        let a = model.constants().a;
        let b = model.constants().b;
        let sifs = model.sifs();
        for x in d.uniform_grid(257) {
            for n in 0..d.n() {
                for k in 0..model.m() {
                    for j in 0..3 {
                        let qk = sifs.q(n, k).eval_derivative(j, x);
                        if k == model.k0() {
                            prop_assert!(qk.abs() <= b[j] * (1.0 + 1e-12) + 1e-12);
                        }
                        for l in k + 1..model.m() {
                            let r = (qk - sifs.q(n, l).eval_derivative(j, x)).abs() / (g[k] - g[l]).abs();
                            prop_assert!(r <= a[j] * (1.0 + 1e-12) + 1e-9);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn second_derivative_jump_under_mixing_matches_prediction() {
    let f = DataFunction::Exp;
    let n = 4;
    let d = InterpolationData::from_fn(0.0, 1.0, n, |x| f.value(x)).unwrap();
    let boundary = BoundaryCondition::Clamped {
        d0: 1.0,
        dn: 1f64.exp(),
    };
    let model = build_sifs_spline(&d, &[0.005, 0.01], boundary).unwrap();
    let sigma = CodeWord::parse("2121122121", 2).unwrap().cycled(40);
    let shifted = CodeWord::new(sigma.symbols()[1..].to_vec(), 2).unwrap();
    let k = sigma.get(0);
    let gamma = model.sifs().gammas()[k];
    let ends = eval_at_depth(&model, &shifted, 2, 30, &[0.0, 1.0]).unwrap();
    let [m0, mn] = model.moments()[k];
    let predicted = (n * n) as f64 * gamma * ((ends[1] - mn) - (ends[0] - m0));
    assert!(
        predicted.abs() > 1e-4,
        "asymmetric data should leave a visible jump"
    );

    let delta = 1e-5;
    for &x in &d.knots()[1..n] {
        let pts = [x - 2.0 * delta, x - delta, x, x + delta, x + 2.0 * delta];
        let v = eval_at_depth(&model, &sigma, 1, 30, &pts).unwrap();
        let left = (3.0 * v[2] - 4.0 * v[1] + v[0]) / (2.0 * delta);
        let right = (-3.0 * v[2] + 4.0 * v[3] - v[4]) / (2.0 * delta);
        assert!(
            ((left - right) - predicted).abs() < 1e-3 * predicted.abs(),
            "knot {x}: {} vs {predicted}",
            left - right
        );
    }

    for k in 0..2 {
        let constant = CodeWord::constant(k, 40, 2).unwrap();
        let x = d.knots()[2];
        let pts = [x - 2.0 * delta, x - delta, x, x + delta, x + 2.0 * delta];
        let v = eval_at_depth(&model, &constant, 1, 30, &pts).unwrap();
        let left = (3.0 * v[2] - 4.0 * v[1] + v[0]) / (2.0 * delta);
        let right = (-3.0 * v[2] + 4.0 * v[3] - v[4]) / (2.0 * delta);
        assert!((left - right).abs() < 1e-7, "IFS {k}: {}", left - right);
    }
}

#[test]
fn symmetric_data_has_no_jump() {
    let model = common::demo_model();
    let sigma = CodeWord::seeded(5, MAX_DEPTH, 3).unwrap();
    let ends = eval_at_depth(
        &model,
        &CodeWord::new(sigma.symbols()[1..].to_vec(), 3).unwrap(),
        2,
        30,
        &[0.0, 1.0],
    )
    .unwrap();
    let [m0, mn] = model.moments()[sigma.get(0)];
    assert!(((ends[1] - mn) - (ends[0] - m0)).abs() < 1e-9);
}
