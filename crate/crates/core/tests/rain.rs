mod common;

use bmhull::hull::count_w;
use bmhull::integrals::{enlargement, phi};
use bmhull::linalg::dist;
use bmhull::paths::sample_brownian;
use bmhull::rain::{check_n, check_r, coupled_grid, generate_rain, level};
use bmhull::{Rain, SimRng};
use common::{ks_critical_99, ks_uniform, mean_se};
use proptest::prelude::*;

fn rains(seed: u64, cap: f64, count: u64) -> impl Iterator<Item = Rain<f64>> {
    (0..count).map(move |i| generate_rain(cap, &mut SimRng::substream(seed, 0, i)).unwrap())
}

#[test]
fn point_count_has_poisson_mean() {
    let counts: Vec<f64> = rains(1, 50.0, 10_000).map(|r| r.len() as f64).collect();
    let (m, se) = mean_se(&counts);
    assert!((m - 50.0).abs() <= 3.0 * se, "{m} +- {se}");
}

#[test]
fn positions_are_uniform() {
    let xs: Vec<f64> = rains(2, 50.0, 200).flat_map(|r| r.points().iter().map(|p| p.x).collect::<Vec<_>>()).collect();
    let d = ks_uniform(&xs);
    assert!(d < ks_critical_99(xs.len() as f64), "KS {d} over {}", xs.len());
    let ys: Vec<f64> = rains(3, 50.0, 200).flat_map(|r| r.points().iter().map(|p| p.y / 50.0).collect::<Vec<_>>()).collect();
    assert!(ks_uniform(&ys) < ks_critical_99(ys.len() as f64));
}

#[test]
fn level_count_has_mean_alpha() {
    let counts: Vec<f64> = rains(4, 50.0, 10_000).map(|r| (level(&r, 30.0).unwrap().len() - 2) as f64).collect();
    let (m, se) = mean_se(&counts);
    assert!((m - 30.0).abs() <= 3.0 * se, "{m} +- {se}");
}

#[test]
fn candidate_tuples_match_factorial_moments() {
    // E C(N + 2, 2) with N ~ Poisson(20) is (400 + 80 + 2) / 2
    let w: Vec<f64> = rains(5, 20.0, 10_000)
        .map(|r| count_w(&level(&r, 20.0).unwrap(), 2, |_| true).unwrap() as f64)
        .collect();
    let (m, se) = mean_se(&w);
    assert!((m - 241.0).abs() <= 3.0 * se, "{m} +- {se}");
}

#[test]
fn r_event_rarely_fails_at_moderate_alpha() {
    let failures = (0..10_000u64)
        .filter(|&i| {
            let mut rng = SimRng::substream(6, 0, i);
            let rain: Rain<f64> = generate_rain(100.0, &mut rng).unwrap();
            let lv = level(&rain, 100.0).unwrap();
            let grid = coupled_grid(&lv, 1025).unwrap();
            let path = sample_brownian(2, &grid, &mut rng).unwrap();
            !check_r(&lv, &path, 100.0, (0.0, 1.0), 2).unwrap()
        })
        .count();
    assert!(failures < 100, "{failures} failures in 10^4");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn levels_are_nested_on_one_rain(seed in any::<u64>(), a in 0.0f64..60.0, b in 0.0f64..60.0) {
        let rain: Rain<f64> = generate_rain(60.0, &mut SimRng::new(seed)).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = level(&rain, lo).unwrap();
        let big = level(&rain, hi).unwrap();
        prop_assert!(small.times().iter().all(|t| big.times().binary_search_by(|u| u.total_cmp(t)).is_ok()));
    }

    #[test]
    fn endpoints_always_belong(seed in any::<u64>(), alpha in 0.0f64..30.0) {
        let rain: Rain<f64> = generate_rain(30.0, &mut SimRng::new(seed)).unwrap();
        let lv = level(&rain, alpha).unwrap();
        prop_assert_eq!(lv.times()[0], 0.0);
        prop_assert_eq!(*lv.times().last().unwrap(), 1.0);
    }

    #[test]
    fn n_event_matches_gap_criterion(seed in any::<u64>(), alpha in 3.0f64..200.0) {
        let rain: Rain<f64> = generate_rain(alpha, &mut SimRng::new(seed)).unwrap();
        let lv = level(&rain, alpha).unwrap();
        let h = phi(alpha).unwrap() / alpha;
        let by_gaps = lv.times().windows(2).all(|w| w[1] - w[0] <= 2.0 * h);
        prop_assert_eq!(check_n(&lv, alpha, (0.0, 1.0)).unwrap(), by_gaps);
    }

    #[test]
    fn r_event_gives_dense_level_values(seed in any::<u64>(), alpha in 5.0f64..80.0) {
        let mut rng = SimRng::new(seed);
        let rain: Rain<f64> = generate_rain(alpha, &mut rng).unwrap();
        let lv = level(&rain, alpha).unwrap();
        let grid = coupled_grid(&lv, 257).unwrap();
        let path = sample_brownian(2, &grid, &mut rng).unwrap();
        if check_r(&lv, &path, alpha, (0.0, 1.0), 2).unwrap() {
            let radius = enlargement(alpha).unwrap();
            let level_values = path.values_at(lv.times()).unwrap();
            for p in path.points() {
                let nearest = level_values.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest <= radius, "{} > {}", nearest, radius);
            }
        }
    }
}
