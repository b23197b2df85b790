mod common;

use common::{branching_extinction, three_sigma};
use proptest::prelude::*;
use rand_distr::{Binomial, Distribution, Poisson};
use rumor_source::analytics::{
    bessel_i0, extinction_series_binomial, extinction_series_poisson, prob_all_children_activated, yv_distribution,
    AnalyticsError, CandidateRole, TreeFamily, YvSpec,
};
use rumor_source::stream_rng;
use rumor_source::tree_sim::{simulate_tree, TreeKind};

fn closest(d: u32, p: f64, k: u32, t_star: usize) -> YvSpec {
    YvSpec {
        family: TreeFamily::DRegular { d },
        p,
        k,
        t_star,
        role: CandidateRole::ClosestCandidate,
    }
}

#[test]
fn series_examples() {
    assert_eq!(extinction_series_binomial(2, 0.5, 3).unwrap().values[1], 0.5);
    let sub = extinction_series_binomial(4, 1.0 / 3.0, 10).unwrap();
    assert!((sub.fixed_point - 1.0).abs() < 1e-9);
    let zero = extinction_series_poisson(0.0, 3).unwrap();
    assert_eq!(zero.values[1], 1.0);
    assert_eq!(extinction_series_poisson(1.0, 5).unwrap().fixed_point, 1.0);
    assert_eq!(extinction_series_poisson(0.7, 5).unwrap().fixed_point, 1.0);
    assert!(extinction_series_binomial(1, 0.5, 3).is_err());
    assert!(extinction_series_poisson(-1.0, 3).is_err());
}

#[test]
fn fixed_points_match_branching_simulation() {
    let runs = 200_000;
    let bin = extinction_series_binomial(4, 0.5, 0).unwrap().fixed_point;
    let mc = branching_extinction(runs, 60, 10_000, 1, |n, rng| Binomial::new(3 * n, 0.5).unwrap().sample(rng));
    assert!((mc - bin).abs() <= three_sigma(bin, runs), "{mc} vs {bin}");

    let po = extinction_series_poisson(2.0, 0).unwrap().fixed_point;
    let mc = branching_extinction(runs, 60, 10_000, 2, |n, rng| Poisson::new(2.0 * n as f64).unwrap().sample(rng) as u64);
    assert!((mc - po).abs() <= three_sigma(po, runs), "{mc} vs {po}");
    // 1 - q = 1 - e^{-2(1 - q)} has root q = 0.2031878699...
    assert!((po - 0.203_187_869_979_979).abs() < 1e-9);
}

#[test]
fn convergence_rates() {
    let sub = extinction_series_poisson(0.8, 200).unwrap();
    // compare while 1 - x_t is well above rounding noise
    for t in (1..200).take_while(|&t| 1.0 - sub.values[t + 1] > 1e-8) {
        let (a, b) = (1.0 - sub.values[t], 1.0 - sub.values[t + 1]);
        assert!(b <= (0.8 + 0.01) * a, "t={t}: ratio {}", b / a);
    }
    let crit = extinction_series_poisson(1.0, 10_000).unwrap();
    let scaled: Vec<f64> = (1..=10_000).map(|t| t as f64 * (1.0 - crit.values[t])).collect();
    // t (1 - x_t) tends to 2 / σ² = 2 for Po(1)
    assert!(scaled.iter().all(|&s| s <= 2.5), "max {}", scaled.iter().cloned().fold(0.0, f64::max));
}

#[test]
fn yv_examples_and_errors() {
    let full = extinction_series_binomial(4, 1.0, 5).unwrap();
    assert!((yv_distribution(&closest(4, 1.0, 4, 3), &full).unwrap() - 1.0).abs() < 1e-15);

    let s = extinction_series_binomial(4, 0.5, 20).unwrap();
    let x = s.values[9];
    let pgf = (0.5 + 0.5 * x).powi(4);
    assert!((yv_distribution(&closest(4, 0.5, 0, 10), &s).unwrap() - pgf).abs() < 1e-15);

    assert!(matches!(
        yv_distribution(&closest(4, 0.5, 1, 30), &s),
        Err(AnalyticsError::IndexOutOfRange { .. })
    ));
    assert!(matches!(
        yv_distribution(&closest(3, 0.5, 1, 3), &s),
        Err(AnalyticsError::KindMismatch { .. })
    ));
    let other = YvSpec {
        role: CandidateRole::OtherCandidate,
        ..closest(4, 0.5, 2, 5)
    };
    assert!(yv_distribution(&other, &s).is_err());
    let other = YvSpec { k: 1, ..other };
    let closest_one = yv_distribution(&closest(4, 0.5, 1, 5), &s).unwrap();
    assert!((yv_distribution(&other, &s).unwrap() - closest_one).abs() < 1e-15);

    let po = extinction_series_poisson(1.5, 10).unwrap();
    let gw = YvSpec {
        family: TreeFamily::GwPoisson { lambda: 3.0 },
        p: 0.5,
        k: 0,
        t_star: 4,
        role: CandidateRole::ClosestCandidate,
    };
    let want = (-1.5 * (1.0 - po.values[3])).exp();
    assert!((yv_distribution(&gw, &po).unwrap() - want).abs() < 1e-14);
    let total: f64 = (0..60).map(|k| yv_distribution(&YvSpec { k, ..gw }, &po).unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn yv_matches_tree_simulation() {
    // root spawns Bin(4, 0.5) children; count those whose subtree reaches depth 10
    let (d, p, t_star, k) = (4u32, 0.5, 10u32, 2u32);
    let series = extinction_series_binomial(d, p, 20).unwrap();
    let want = yv_distribution(&closest(d, p, k, t_star as usize), &series).unwrap();
    let runs = 1_000_000u64;
    let mut rng = stream_rng(31, 0);
    let kind = TreeKind::DRegular { d };
    let mut hits = 0u64;
    let mut bearing = Vec::new();
    for _ in 0..runs {
        let tree = simulate_tree(&kind, p, t_star, &mut rng).unwrap();
        bearing.clear();
        bearing.resize(tree.children(0).len(), false);
        for mut v in tree.frontier() {
            while tree.depth(v) > 1 {
                v = tree.parent(v).unwrap();
            }
            bearing[v - tree.children(0).start] = true;
        }
        if bearing.iter().filter(|&&b| b).count() == k as usize {
            hits += 1;
        }
    }
    let freq = hits as f64 / runs as f64;
    assert!((freq - want).abs() <= three_sigma(want, runs), "{freq} vs {want}");
}

#[test]
fn bessel_and_all_children() {
    let asymptotic = |x: f64| x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
    let rel = |x: f64| (bessel_i0(x).unwrap().value() / asymptotic(x) - 1.0).abs();
    assert!(rel(20.0) < 1e-3);
    assert!(rel(40.0) < rel(20.0));
    assert!(bessel_i0(800.0).unwrap().is_log());
    assert!(bessel_i0(-1.0).is_err());

    assert_eq!(prob_all_children_activated(2.0, 0.0).unwrap(), 0.0);
    let (lambda, p) = (3.0f64, 0.5f64);
    let mut term = 1.0;
    let mut series = 0.0;
    for k in 1..=200 {
        term *= lambda * lambda * p / (k as f64 * k as f64);
        series += term;
    }
    series *= (-lambda * (1.0 + p)).exp();
    assert!((prob_all_children_activated(lambda, p).unwrap() - series).abs() < 1e-14);
    assert!(prob_all_children_activated(0.0, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn binomial_series_properties(d in 2u32..10, p in 0.0f64..=1.0, steps in 1usize..60) {
        let s = extinction_series_binomial(d, p, steps).unwrap();
        prop_assert_eq!(s.values[0], 0.0);
        for w in s.values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-15);
            prop_assert!((0.0..=1.0).contains(&w[1]));
        }
        let supercritical = (d - 1) as f64 * p > 1.0 + 1e-9;
        let subcritical = (d - 1) as f64 * p < 1.0 - 1e-9;
        if supercritical { prop_assert!(s.fixed_point < 1.0 - 1e-9); }
        if subcritical { prop_assert!((s.fixed_point - 1.0).abs() < 1e-9); }
        prop_assert!(s.values.iter().all(|&x| x <= s.fixed_point + 1e-9));

        for t_star in 1..=steps.min(20) {
            let total: f64 = (0..=d).map(|k| yv_distribution(&closest(d, p, k, t_star), &s).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn poisson_series_properties(mu in 0.0f64..6.0, steps in 1usize..60) {
        let s = extinction_series_poisson(mu, steps).unwrap();
        for w in s.values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-15);
        }
        if mu > 1.0 + 1e-9 { prop_assert!(s.fixed_point < 1.0 - 1e-9); }
        if mu <= 1.0 { prop_assert_eq!(s.fixed_point, 1.0); }
    }

    #[test]
    fn bessel_matches_series_below_guard(x in 0.0f64..50.0) {
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..400 {
            term *= (x / 2.0) * (x / 2.0) / (k as f64 * k as f64);
            sum += term;
        }
        let got = bessel_i0(x).unwrap().value();
        prop_assert!((got / sum - 1.0).abs() < 1e-13);
    }
}
