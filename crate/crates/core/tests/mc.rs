use bmhull::mc::{
    bridge_stay_prob, bridge_stay_vs_bound, conditional_h_prob, discordant_prob, e_tilde_direct, e_tilde_product,
    fit_exit_exponent, normal_cdf, planted_geometry, prob_r_complement, prop6_rhs, stay_prob_wedge, Estimate,
    EstimatorConfig, HCase, IntervalKind,
};
use bmhull::{SimRng, SimplexTimes, Wedge2D};
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// `1F1(a; b; z)` for `z >= 0` by its power series.
fn hyp1f1(a: f64, b: f64, z: f64) -> f64 {
    let (mut sum, mut term) = (1.0, 1.0);
    for k in 0..10_000 {
        let k = k as f64;
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Survival probability up to time `t` of planar Brownian motion in a wedge
/// of full opening `big_theta`, started at radius `r` and angle `theta0` from
/// one edge: the Bessel series summed over odd modes.
fn wedge_survival(big_theta: f64, theta0: f64, r: f64, t: f64) -> f64 {
    let z = r * r / (2.0 * t);
    (0..400)
        .map(|j| {
            let m = (2 * j + 1) as f64;
            let nu = m * PI / big_theta;
            let log_radial = ln_gamma(nu / 2.0 + 1.0) - ln_gamma(nu + 1.0) + nu / 2.0 * z.ln() - z;
            4.0 / (m * PI) * (nu * theta0).sin() * log_radial.exp() * hyp1f1(nu / 2.0 + 1.0, nu + 1.0, z)
        })
        .sum()
}

fn erf_like(x: f64) -> f64 {
    2.0 * normal_cdf(x) - 1.0
}

fn cfg(replicas: usize, seed: u64) -> EstimatorConfig {
    EstimatorConfig::new(replicas, seed)
}

#[test]
fn series_oracle_reduces_to_reflection_forms() {
    for x in [0.3, 1.0, 2.0] {
        let half = wedge_survival(PI, FRAC_PI_2, x, 1.0) - erf_like(x);
        let c = x / 2f64.sqrt();
        let quarter = wedge_survival(FRAC_PI_2, FRAC_PI_4, x, 1.0) - erf_like(c).powi(2);
        assert!(half.abs() < 1e-9 && quarter.abs() < 1e-9, "{half} {quarter}");
    }
}

#[test]
fn half_plane_stay_matches_reflection() {
    let half_plane = Wedge2D::new([0.0, 0.0], 0.0, FRAC_PI_2).unwrap();
    let est = stay_prob_wedge(&half_plane, [1.0, 0.3], 1.0, &cfg(20_000, 1)).unwrap();
    assert!(est.z_score(erf_like(1.0)) <= 3.0, "{}", est.mean);
    let short = stay_prob_wedge(&half_plane, [1.0, 0.0], 1e-6, &cfg(1000, 2)).unwrap();
    assert!(short.mean >= 0.999);
}

#[test]
fn quarter_plane_is_a_product_of_half_planes() {
    let quadrant = Wedge2D::new([0.0, 0.0], FRAC_PI_4, FRAC_PI_4).unwrap();
    for (start, t) in [([0.5, 1.0], 1.0f64), ([0.1 / 2f64.sqrt(), 0.1 / 2f64.sqrt()], 1.0)] {
        let exact = erf_like(start[0] / t.sqrt()) * erf_like(start[1] / t.sqrt());
        let est = stay_prob_wedge(&quadrant, start, t, &cfg(20_000, 3)).unwrap();
        assert!(est.z_score(exact) <= 3.0, "{start:?}: {} vs {exact}", est.mean);
    }
}

#[test]
fn obtuse_wedge_matches_bessel_series() {
    let beta = 3.0 * PI / 8.0;
    let wedge = Wedge2D::new([0.0, 0.0], 0.0, beta).unwrap();
    for t in [0.25, 1.0, 4.0] {
        let exact = wedge_survival(2.0 * beta, beta, 1.0, t);
        let est = stay_prob_wedge(&wedge, [1.0, 0.0], t, &cfg(20_000, 4)).unwrap();
        assert!(est.z_score(exact) <= 4.0, "t={t}: {} vs {exact}", est.mean);
    }
}

#[test]
fn exit_exponents_match_spitzer() {
    for beta in [FRAC_PI_2, FRAC_PI_4, 3.0 * PI / 8.0] {
        let fit = fit_exit_exponent(beta, &cfg(20_000, 5)).unwrap();
        assert!(fit.relative_error() <= 0.1, "beta={beta}: {}", fit.exponent);
        assert!(fit.decays_at_least_lower(0.1));
    }
}

#[test]
fn half_plane_bridge_matches_reflection() {
    let half_plane = Wedge2D::new([0.0, 0.0], 0.0, FRAC_PI_2).unwrap();
    let est = bridge_stay_prob(&half_plane, [1.0, 0.0], [1.0, 0.0], &cfg(20_000, 6)).unwrap();
    assert!(est.z_score(1.0 - (-2.0f64).exp()) <= 3.0, "{}", est.mean);
    let deep = Wedge2D::new([0.0, 0.0], 0.0, FRAC_PI_4).unwrap();
    let far = [20.0, 0.0];
    assert!(bridge_stay_prob(&deep, far, far, &cfg(2000, 7)).unwrap().mean >= 0.999);
}

#[test]
fn bridge_stays_below_lemma6_bound() {
    let theta: f64 = 1.0;
    let wedge = Wedge2D::new([0.0, 0.0], 0.0, (PI - theta) / 2.0).unwrap();
    for r in [0.02, 0.05, 0.1] {
        let cmp = bridge_stay_vs_bound(&wedge, [r, 0.0], [1.0, 0.0], 1e4, 0.1, theta, &cfg(20_000, 8)).unwrap();
        assert!(cmp.holds_within(4.0), "r={r}: {} vs {}", cmp.estimate.mean, cmp.bound);
    }
}

#[test]
fn conditional_bounds_hold_for_planted_cases() {
    let (eps, n) = (0.2, 2);
    for case in [HCase::Interior, HCase::Edge] {
        let geom = planted_geometry(case, n, 1.0).unwrap();
        // at alpha = 1e3 the enlargement phi^2/sqrt(alpha) is about 6, so the event is almost sure
        let small = conditional_h_prob(case, &geom, 1e3, eps, &cfg(2000, 9)).unwrap();
        assert!(small.rain_included);
        assert!(small.comparison.estimate.ci_low > small.comparison.bound, "{case:?}");
        let large = conditional_h_prob(case, &geom, 500f64.exp(), eps, &cfg(5000, 9)).unwrap();
        assert!(!large.rain_included);
        let cmp = &large.comparison;
        assert!(cmp.holds_within(4.0), "{case:?}: {} vs {}", cmp.estimate.mean, cmp.bound);
    }
    let alpha = 1e3;
    let interior = prop6_rhs(HCase::Interior, 0.25, alpha, 1.0, eps, n);
    assert!((interior - alpha.powf(eps) / (0.25 * alpha)).abs() < 1e-12 * interior);
    for gap in [0.01, 0.25] {
        assert_eq!(prop6_rhs(HCase::InteriorSpecial, gap, alpha, 0.0, eps, n), prop6_rhs(HCase::Interior, gap, alpha, 0.0, eps, n));
        assert_eq!(prop6_rhs(HCase::EdgeSpecial, gap, alpha, 0.0, eps, n), prop6_rhs(HCase::Edge, gap, alpha, 0.0, eps, n));
    }
}

fn st(v: &[f64]) -> SimplexTimes<f64> {
    SimplexTimes::new(v.to_vec()).unwrap()
}

#[test]
fn wide_discordance_has_no_successes() {
    let res = discordant_prob(&st(&[0.2, 0.6]), &st(&[0.4, 0.8]), 1e30, 3.1, &cfg(100_000, 10)).unwrap();
    let est = &res.comparison.estimate;
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.interval, IntervalKind::ClopperPearson);
    assert!((est.ci_high - 4.6e-5).abs() < 1e-6, "{}", est.ci_high);
}

#[test]
fn discordant_probability_below_bound() {
    let pairs = [
        ([0.1, 0.5], [0.3, 0.7]),
        ([0.2, 0.4], [0.6, 0.8]),
        ([0.15, 0.85], [0.35, 0.55]),
        ([0.05, 0.3], [0.5, 0.95]),
        ([0.25, 0.45], [0.35, 0.65]),
    ];
    for (r, s) in pairs {
        let res = discordant_prob(&st(&r), &st(&s), 1e30, 1.0, &cfg(2000, 11)).unwrap();
        assert!(res.comparison.holds_within(4.0), "{r:?} {s:?}");
    }
}

#[test]
fn e_tilde_routes_agree() {
    let (r, s) = (st(&[0.2, 0.6]), st(&[0.4, 0.8]));
    let config = cfg(4000, 12).with_grid(256);
    let direct = e_tilde_direct(&r, &s, 1e9, &config).unwrap();
    let product = e_tilde_product(&r, &s, 1e9, 8, &config).unwrap();
    assert!(direct.mean > 0.0 && product.mean > 0.0);
    assert!(direct.overlaps(&product), "{} +- {} vs {} +- {}", direct.mean, direct.std_error, product.mean, product.std_error);
}

#[test]
fn r_complement_is_a_probability_and_grid_stable() {
    let low = prob_r_complement(10.0, 2, &cfg(2000, 13)).unwrap();
    assert!((0.0..=1.0).contains(&low.mean) && low.ci_low <= low.mean && low.mean <= low.ci_high);
    let coarse = prob_r_complement(20.0, 2, &cfg(10_000, 14).with_grid(512)).unwrap();
    let fine = prob_r_complement(20.0, 2, &cfg(10_000, 14).with_grid(1024)).unwrap();
    let width = (coarse.ci_high - coarse.ci_low).max(fine.ci_high - fine.ci_low);
    assert!((coarse.mean - fine.mean).abs() < 2.0 * width);
}

#[test]
fn confidence_intervals_are_calibrated() {
    let level = 0.95;
    let config = cfg(200, 0).with_confidence(level);
    let p = 0.3;
    let (mut binary_hits, mut normal_hits) = (0, 0);
    for trial in 0..500u64 {
        let mut rng = SimRng::substream(15, 0, trial);
        let coins: Vec<f64> = (0..200).map(|_| f64::from(rng.uniform() < p)).collect();
        let e = Estimate::from_values("bernoulli", &coins, &config).unwrap();
        binary_hits += usize::from(e.ci_low <= p && p <= e.ci_high);
        let draws: Vec<f64> = (0..200).map(|_| rng.uniform()).collect();
        let e = Estimate::from_values("uniform", &draws, &config).unwrap();
        normal_hits += usize::from(e.ci_low <= 0.5 && 0.5 <= e.ci_high);
    }
    for hits in [binary_hits, normal_hits] {
        let rate = hits as f64 / 500.0;
        assert!((rate - level).abs() <= 0.02, "coverage {rate}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimates_do_not_depend_on_workers(seed in any::<u64>(), workers in 2usize..6) {
        let one = prob_r_complement(15.0, 2, &cfg(200, seed).with_grid(128).with_workers(1)).unwrap();
        let many = prob_r_complement(15.0, 2, &cfg(200, seed).with_grid(128).with_workers(workers)).unwrap();
        prop_assert_eq!(one.mean.to_bits(), many.mean.to_bits());
        prop_assert_eq!(one.ci_high.to_bits(), many.ci_high.to_bits());
        let wedge = Wedge2D::new([0.0, 0.0], 0.0, 1.0).unwrap();
        let a = stay_prob_wedge(&wedge, [1.0, 0.0], 1.0, &cfg(200, seed).with_workers(1)).unwrap();
        let b = stay_prob_wedge(&wedge, [1.0, 0.0], 1.0, &cfg(200, seed).with_workers(workers)).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
