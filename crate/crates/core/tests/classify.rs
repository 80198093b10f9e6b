use cfmm_axioms::classify::{
    check_equal_weights, check_slices, default_starts, fit_log_hyperplane, fit_log_line,
    random_weights, sample_orbit, verify_level_sets, ClassifyConfig, Verdict,
};
use cfmm_axioms::sampling::trial_rng;
use cfmm_axioms::{swap, BuiltinRule, LogPoint, ReserveN, SwapRule};

fn rule(text: &str) -> BuiltinRule {
    text.parse().unwrap()
}

fn cfg(seed: u64) -> ClassifyConfig {
    ClassifyConfig {
        seed,
        ..ClassifyConfig::default()
    }
}

fn wprod(w: &[f64]) -> BuiltinRule {
    let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("wprod:{}", parts.join(",")).parse().unwrap()
}

#[test]
fn recovers_every_grid_weight() {
    for k in 1..=9 {
        let w = k as f64 / 10.0;
        let report = verify_level_sets(
            &rule(&format!("wgm:{w}")),
            &default_starts(2, 5, 7),
            &cfg(7),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.failures);
        assert!((report.w_hat.unwrap() - w).abs() <= 1e-9);
        assert!(report.residual_max <= 1e-9);
        assert!(report.slope_spread <= 1e-9);
        assert_eq!(report.per_orbit.len(), 5);
    }
}

#[test]
fn orbits_through_different_starts_are_parallel() {
    let starts: Vec<ReserveN> = [[1.0, 1.0], [2.0, 2.0], [0.5, 3.0]]
        .iter()
        .map(|s| ReserveN::new(s.to_vec()).unwrap())
        .collect();
    let report = verify_level_sets(&rule("wgm:0.8"), &starts, &cfg(1)).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert!((report.w_hat.unwrap() - 0.8).abs() <= 1e-9);
    let slopes: Vec<f64> = report.per_orbit.iter().map(|o| o.slope.unwrap()).collect();
    for s in &slopes {
        assert!((s + 4.0).abs() <= 1e-9, "{slopes:?}");
    }
    // distinct starts give distinct intercepts
    let icpts: Vec<f64> = report
        .per_orbit
        .iter()
        .map(|o| o.intercept.unwrap())
        .collect();
    assert!((icpts[0] - icpts[1]).abs() > 1.0);
}

#[test]
fn constant_sum_is_not_classified() {
    let report = verify_level_sets(&rule("csum"), &default_starts(2, 5, 7), &cfg(7)).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    assert!(!report.failures.is_empty());
}

#[test]
fn unit_orbit_lies_in_the_anti_diagonal_quadrants() {
    for k in 1..=9 {
        let r = rule(&format!("wgm:{}", k as f64 / 10.0));
        let o = sample_orbit(&r, &ReserveN::ones(2).unwrap(), 256, 5).unwrap();
        for z in &o.log_points {
            let (u, v) = (z.as_slice()[0], z.as_slice()[1]);
            assert!(u * v <= 1e-12, "u={u} v={v}");
        }
    }
}

#[test]
fn every_log_coordinate_is_reached() {
    for k in 1..=9 {
        let w = k as f64 / 10.0;
        let r = rule(&format!("wgm:{w}"));
        let one = ReserveN::ones(2).unwrap();
        for u in -5..=5 {
            let u = u as f64;
            let t = if u >= 0.0 {
                swap(&r, &one, 0, 1, u.exp_m1()).unwrap()
            } else {
                // a Y-in trade pushes x down to e^u
                swap(&r, &one, 1, 0, (-u * w / (1.0 - w)).exp_m1()).unwrap()
            };
            let z = t.log_map().unwrap();
            assert!(
                (z.as_slice()[0] - u).abs() <= 1e-12,
                "w={w} u={u}: {}",
                z.as_slice()[0]
            );
            let v = z.as_slice()[1];
            assert!((v + w / (1.0 - w) * u).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn orbit_displacements_are_closed_under_addition() {
    for k in 1..=9 {
        let w = k as f64 / 10.0;
        let r = rule(&format!("wgm:{w}"));
        let weights = r.weights().unwrap();
        let o = sample_orbit(&r, &ReserveN::ones(2).unwrap(), 32, 9).unwrap();
        for (a, b) in o.log_points.iter().zip(o.log_points.iter().rev()) {
            let sum: Vec<f64> = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| x + y)
                .collect();
            let phi = LogPoint::new(sum)
                .unwrap()
                .exp_map()
                .unwrap()
                .phi(&weights)
                .unwrap();
            assert!((phi - 1.0).abs() <= 1e-12, "w={w}: phi={phi}");
        }
    }
}

#[test]
fn slices_match_global_weights_across_dimensions() {
    let mut rng = trial_rng(2024, 0);
    for n in [3usize, 4, 6] {
        let w = random_weights(&mut rng, n, 0.05).unwrap();
        let r = wprod(w.as_slice());
        let weights = r.weights().unwrap();
        let o = sample_orbit(&r, &ReserveN::ones(n).unwrap(), 64, 3).unwrap();
        let fit = fit_log_hyperplane(&o).unwrap();
        for (got, want) in fit.weights.as_slice().iter().zip(weights.as_slice()) {
            assert!(
                (got - want).abs() <= 1e-8,
                "n={n}: {:?} vs {:?}",
                fit.weights,
                weights
            );
        }
        let slices = check_slices(&r, &ReserveN::ones(n).unwrap(), &cfg(3)).unwrap();
        assert!(slices.passed);
        assert_eq!(slices.pairs.len(), n * (n - 1) / 2);
        let ws = weights.as_slice();
        for p in &slices.pairs {
            let want = -ws[p.i] / ws[p.j];
            assert!(
                (p.slope.unwrap() - want).abs() <= 1e-9 * want.abs(),
                "({}, {})",
                p.i,
                p.j
            );
        }
    }
}

#[test]
fn slice_slopes_do_not_depend_on_the_base_point() {
    let r = rule("wprod:0.5,0.3,0.2");
    let a = check_slices(&r, &ReserveN::ones(3).unwrap(), &cfg(0)).unwrap();
    let b = check_slices(&r, &ReserveN::new(vec![2.0, 5.0, 0.1]).unwrap(), &cfg(0)).unwrap();
    for (i, j, want) in [(0, 1, -5.0 / 3.0), (0, 2, -5.0 / 2.0), (1, 2, -3.0 / 2.0)] {
        assert!((a.slope(i, j).unwrap() - want).abs() <= 1e-9);
        assert!((b.slope(i, j).unwrap() - want).abs() <= 1e-9);
    }
}

#[test]
fn equal_weights_are_detected() {
    for n in [3usize, 4, 6] {
        let r = wprod(&vec![1.0 / n as f64; n]);
        let o = sample_orbit(&r, &ReserveN::ones(n).unwrap(), 64, 1).unwrap();
        let fit = fit_log_hyperplane(&o).unwrap();
        assert!(check_equal_weights(&fit, 1e-9));
    }
    let o = sample_orbit(
        &rule("wprod:0.5,0.3,0.2"),
        &ReserveN::ones(3).unwrap(),
        64,
        1,
    )
    .unwrap();
    assert!(!check_equal_weights(&fit_log_hyperplane(&o).unwrap(), 1e-9));
}

#[test]
fn higher_dimensional_level_sets_verify() {
    let r = rule("wprod:0.5,0.3,0.2");
    let report = verify_level_sets(&r, &default_starts(3, 4, 11), &cfg(11)).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.failures);
    let w = report.weights.unwrap();
    for (got, want) in w.iter().zip([0.5, 0.3, 0.2]) {
        assert!((got - want).abs() <= 1e-9);
    }
}

#[test]
fn line_fit_of_a_single_orbit() {
    let o = sample_orbit(&rule("wgm:0.1"), &ReserveN::ones(2).unwrap(), 64, 0).unwrap();
    let fit = fit_log_line(&o).unwrap();
    assert!((fit.slope + 1.0 / 9.0).abs() <= 1e-12);
    assert!(fit.intercept.abs() <= 1e-12);
    assert!(fit.residual <= 1e-12);
}

#[test]
fn classification_is_deterministic() {
    let starts = default_starts(2, 5, 3);
    let a = verify_level_sets(&rule("wgm:0.3"), &starts, &cfg(3)).unwrap();
    let b = verify_level_sets(&rule("wgm:0.3"), &starts, &cfg(3)).unwrap();
    assert_eq!(a, b);
}
