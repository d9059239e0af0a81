//! Verification suites. Each check produces [`CheckResult`] rows tagged with
//! the acceptance criterion they belong to.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use anyhow::Result;
use bmhull::hull::build_hull;
use bmhull::integrals::{final_assembly, final_assembly_ln, integral_za_bound, integral_za_quadrature, single_constraint_fraction};
use bmhull::mc::{
    bridge_stay_prob, campbell_check, conditional_h_prob, fit_exit_exponent, planted_geometry, prob_r_complement, stay_prob_wedge, BoundComparison, Estimate, HCase,
};
use bmhull::rain::{generate_rain, level};
use bmhull::wedge::{find_discordant, random_special_instance, random_wedge_instance, special_index, verify_special_index};
use bmhull::{Error, SimRng, Wedge2D64};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Spitzer,
    Campbell,
    Lemma8,
    Lemma3,
    Lemma4,
    Bounds,
    Hull,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Spitzer => "spitzer",
            Suite::Campbell => "campbell",
            Suite::Lemma8 => "lemma8",
            Suite::Lemma3 => "lemma3",
            Suite::Lemma4 => "lemma4",
            Suite::Bounds => "bounds",
            Suite::Hull => "hull",
        }
    }
}

/// One verified statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub criterion: u8,
    pub check: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn flag(criterion: u8, check: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            criterion,
            check: check.into(),
            estimate: None,
            std_error: None,
            bound: None,
            margin: None,
            pass,
            detail: detail.into(),
        }
    }

    fn against_target(criterion: u8, check: impl Into<String>, est: &Estimate, target: f64, max_z: f64) -> Self {
        let z = est.z_score(target);
        Self {
            criterion,
            check: check.into(),
            estimate: Some(est.mean),
            std_error: Some(est.std_error),
            bound: Some(target),
            margin: Some(max_z - z),
            pass: z <= max_z,
            detail: format!("|z| = {z:.3} (limit {max_z})"),
        }
    }

    fn against_bound(criterion: u8, check: impl Into<String>, cmp: &BoundComparison, k: f64) -> Self {
        Self {
            criterion,
            check: check.into(),
            estimate: Some(cmp.estimate.mean),
            std_error: Some(cmp.estimate.std_error),
            bound: Some(cmp.bound),
            margin: Some(cmp.margin),
            pass: cmp.holds_within(k),
            detail: format!("estimate <= bound + {k} se"),
        }
    }

    pub const HEADER: [&'static str; 8] = ["criterion", "check", "estimate", "std_error", "bound", "margin", "verdict", "detail"];

    pub fn row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        vec![
            self.criterion.to_string(),
            self.check.clone(),
            opt(self.estimate),
            opt(self.std_error),
            opt(self.bound),
            opt(self.margin),
            verdict(self.pass).to_string(),
            self.detail.clone(),
        ]
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn table(results: &[CheckResult]) -> Table {
    let mut t = Table::new(&CheckResult::HEADER);
    for r in results {
        t.push(r.row());
    }
    t
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    Ok(match suite {
        Suite::Spitzer => [half_plane_stay(cfg)?, exit_exponents(cfg)?, bridge_closed_form(cfg)?].concat(),
        Suite::Campbell => campbell(cfg)?,
        Suite::Lemma8 => lemma8(cfg)?,
        Suite::Lemma3 => lemma3(cfg)?,
        Suite::Lemma4 => lemma4(cfg)?,
        Suite::Bounds => bounds(cfg)?,
        Suite::Hull => hull_invariants(cfg)?,
    })
}

fn half_plane() -> Wedge2D64 {
    Wedge2D64::new([0.0, 0.0], 0.0, FRAC_PI_2).expect("valid wedge")
}

/// Criterion 1: half-plane stay probability at `r / sqrt(t) = 1`.
pub fn half_plane_stay(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let est = stay_prob_wedge(&half_plane(), [1.0, 0.0], 1.0, &cfg.estimator(100_000))?;
    let target = 2.0 * bmhull::mc::normal_cdf(1.0) - 1.0;
    Ok(vec![CheckResult::against_target(1, "half-plane stay r/sqrt(t)=1", &est, target, 3.0)])
}

/// Criterion 2: fitted exit exponents within 10% of `pi / (2 beta)`.
pub fn exit_exponents(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (label, beta) in [("pi/2", FRAC_PI_2), ("pi/4", FRAC_PI_4), ("3pi/8", 3.0 * PI / 8.0)] {
        let fit = fit_exit_exponent(beta, &cfg.estimator(100_000))?;
        let rel = fit.relative_error();
        out.push(CheckResult {
            criterion: 2,
            check: format!("exit exponent beta={label}"),
            estimate: Some(fit.exponent),
            std_error: None,
            bound: Some(fit.spitzer_exponent),
            margin: Some(0.1 - rel),
            pass: rel <= 0.1,
            detail: format!(
                "relative error {rel:.4}; decay at least 1+theta/(2pi) = {:.4}: {}",
                fit.lower_exponent,
                fit.decays_at_least_lower(0.05)
            ),
        });
    }
    Ok(out)
}

/// Criterion 3: half-plane bridge with `r = 1` at unit horizon.
pub fn bridge_closed_form(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let est = bridge_stay_prob(&half_plane(), [1.0, 0.0], [1.0, 0.0], &cfg.estimator(100_000))?;
    Ok(vec![CheckResult::against_target(3, "half-plane bridge r=1", &est, 1.0 - (-2.0f64).exp(), 3.0)])
}

/// Criterion 4: both sides of the facet-count identity.
pub fn campbell(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for alpha in [10.0, 20.0] {
        let c = campbell_check(alpha, 2, &cfg.estimator(100_000))?;
        let ok = c.overlaps();
        out.push(CheckResult {
            criterion: 4,
            check: format!("campbell alpha={alpha}"),
            estimate: Some(c.lhs.mean),
            std_error: Some(c.lhs.std_error),
            bound: Some(c.rhs.mean),
            margin: None,
            pass: ok,
            detail: format!(
                "lhs [{:.4}, {:.4}] rhs {:.4} [{:.4}, {:.4}] at level {}",
                c.lhs.ci_low, c.lhs.ci_high, c.rhs.mean, c.rhs.ci_low, c.rhs.ci_high, c.lhs.config.confidence_level
            ),
        });
    }
    Ok(out)
}

/// Quadrature resolution per axis used for the `Z_a` integral.
pub const ZA_RESOLUTION: usize = 64;

/// Criterion 5: `int_{Z_a} = |ln a|^(2n)` and the single-constraint measure.
pub fn lemma8(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (label, a) in [("e^-1", (-1.0f64).exp()), ("e^-2", (-2.0f64).exp())] {
        for n in [1, 2] {
            let q = integral_za_quadrature(a, n, ZA_RESOLUTION)?;
            let exact = integral_za_bound(a, n)?;
            let rel = (q - exact).abs() / exact;
            out.push(CheckResult {
                criterion: 5,
                check: format!("za integral a={label} n={n}"),
                estimate: Some(q),
                std_error: None,
                bound: Some(exact),
                margin: Some(1e-2 - rel),
                pass: rel <= 1e-2,
                detail: format!("relative error {rel:.2e} at resolution {ZA_RESOLUTION}"),
            });
        }
        let est = single_constraint_fraction(a, 2, &cfg.estimator(100_000))?;
        out.push(CheckResult::against_target(5, format!("single constraint a={label}"), &est, a, 3.0));
    }
    Ok(out)
}

/// Points per random polytope in the discordant-witness search.
pub const WITNESS_POINTS: usize = 30;

/// Criterion 6: certified discordant witnesses in random wedge instances.
pub fn lemma3(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let total = cfg.count(1000);
    let kappas = [0.3, 0.8, 1.5];
    let mut out = Vec::new();
    for (k, &kappa) in kappas.iter().enumerate() {
        let count = total / kappas.len() + usize::from(k < total % kappas.len());
        let (mut certified, mut violations, mut rejected) = (0, 0, 0);
        for i in 0..count {
            let mut rng = SimRng::substream(cfg.seed, 100 + k as u16, i as u64);
            let (wedge, hull, s) = random_wedge_instance(3, kappa, WITNESS_POINTS, &mut rng)?;
            match find_discordant(&hull, &wedge, kappa, s) {
                Ok(w) if w.verify(&hull, kappa, s)? => certified += 1,
                Ok(_) => rejected += 1,
                Err(Error::LemmaViolation(_)) => violations += 1,
                Err(e) => return Err(e.into()),
            }
        }
        out.push(CheckResult::flag(
            6,
            format!("discordant witness kappa={kappa}"),
            certified == count,
            format!("{certified}/{count} certified, {violations} lemma violations, {rejected} failed re-verification"),
        ));
    }
    Ok(out)
}

fn special_index_run(cfg: &RunConfig, criterion: u8, alpha: f64, label: &str, stream: u16) -> Result<CheckResult> {
    let count = cfg.count(10_000);
    let (mut found, mut none, mut disagreements) = (0, 0, 0);
    for i in 0..count {
        let mut rng = SimRng::substream(cfg.seed, stream, i as u64);
        let (t, pb, w0) = random_special_instance(2, alpha, 1.0, &mut rng)?;
        let got = special_index(&t, &pb, w0, alpha, 1.0, 2)?;
        let brute = (0..=4).find(|&j| verify_special_index(&t, &pb, w0, alpha, 2, j));
        if got != brute {
            disagreements += 1;
        }
        match got {
            Some(j) if verify_special_index(&t, &pb, w0, alpha, 2, j) => found += 1,
            Some(_) => disagreements += 1,
            None => none += 1,
        }
    }
    Ok(CheckResult::flag(
        criterion,
        format!("special index alpha={label}"),
        found == count && disagreements == 0,
        format!("{found}/{count} valid, {none} without a special index, {disagreements} brute-force disagreements"),
    ))
}

/// Criterion 7 at `alpha = 1e6`, plus the same run at `alpha = 1e15` where
/// the asymptotic guarantee has taken hold.
pub fn lemma4(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut main = special_index_run(cfg, 7, 1e6, "1e6", 200)?;
    let mut large = special_index_run(cfg, 7, 1e15, "1e15", 201)?;
    main.check.push_str(" (criterion)");
    large.check.push_str(" (large-alpha companion)");
    Ok(vec![main, large])
}

/// Criterion 8: hull invariants on random Gaussian clouds and monotonicity of
/// the coupled hulls `K_alpha`.
pub fn hull_invariants(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let total = cfg.count(1000);
    let dims = [2usize, 3, 4];
    let mut out = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        let count = total / dims.len() + usize::from(k < total % dims.len());
        let mut failures = Vec::new();
        for i in 0..count {
            let mut rng = SimRng::substream(cfg.seed, 300 + d as u16, i as u64);
            let m = 10 + (rng.uniform() * 40.0) as usize;
            let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.normal()).collect()).collect();
            let p = build_hull(&pts)?;
            let eps = p.eps_geom;
            if !pts.iter().all(|q| p.contains(q, eps)) {
                failures.push(format!("#{i}: containment"));
            }
            if !p.facets.iter().all(|f| (bmhull::linalg::norm(&f.normal) - 1.0).abs() <= 1e-12) {
                failures.push(format!("#{i}: normal length"));
            }
            if d == 3 && p.euler_characteristic()? != 2 {
                failures.push(format!("#{i}: Euler"));
            }
        }
        out.push(CheckResult::flag(
            8,
            format!("hull invariants d={d}"),
            failures.is_empty(),
            format!("{} of {count} hulls failed {:?}", failures.len(), failures.iter().take(5).collect::<Vec<_>>()),
        ));
    }
    let levels = [5.0, 10.0, 20.0, 40.0];
    let realizations = (total / 10).max(1);
    for d in [2usize, 3] {
        let (mut pairs, mut bad) = (0, 0);
        for i in 0..realizations {
            let mut rng = SimRng::substream(cfg.seed, 310 + d as u16, i as u64);
            let rain = generate_rain::<f64>(levels[levels.len() - 1], &mut rng)?;
            let top = level(&rain, levels[levels.len() - 1])?;
            let path = bmhull::paths::sample_brownian(d, &top.grid(), &mut rng)?;
            let mut hulls = Vec::new();
            for &a in &levels {
                let pts = path.values_at(level(&rain, a)?.times())?;
                hulls.push(if pts.len() > d { build_hull(&pts).ok() } else { None });
            }
            for lo in 0..levels.len() {
                for hi in lo + 1..levels.len() {
                    if let (Some(a), Some(b)) = (&hulls[lo], &hulls[hi]) {
                        pairs += 1;
                        let eps = b.eps_geom;
                        if !a.vertex_points().iter().all(|v| b.contains(v, eps)) {
                            bad += 1;
                        }
                    }
                }
            }
        }
        out.push(CheckResult::flag(
            8,
            format!("coupled monotonicity d={d}"),
            bad == 0 && pairs > 0,
            format!("{bad} of {pairs} nested pairs violated over {realizations} realizations"),
        ));
    }
    Ok(out)
}

/// `ln alpha` values of the conditional-bound grid.
pub const PROP6_LN_ALPHA: [f64; 2] = [500.0, 600.0];
pub const PROP6_EPS: f64 = 0.2;
pub const PROP6_THETAS: [f64; 2] = [0.0, 1.0];

/// Criterion 9: conditional bounds, the decay of `P(R_alpha^C)` and the
/// monotonicity of the final assembly.
pub fn bounds(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for la in PROP6_LN_ALPHA {
        for case in HCase::ALL {
            for theta in PROP6_THETAS {
                let geom = planted_geometry(case, 2, theta)?;
                let r = conditional_h_prob(case, &geom, la.exp(), PROP6_EPS, &cfg.estimator(10_000))?;
                let mut row = CheckResult::against_bound(
                    9,
                    format!("conditional bound {case:?} ln(alpha)={la} theta={theta}"),
                    &r.comparison,
                    4.0,
                );
                row.detail.push_str(if r.rain_included { "; rain simulated" } else { "; N_alpha omitted" });
                out.push(row);
            }
        }
    }
    let alphas = [20.0, 50.0, 100.0];
    let ests: Vec<Estimate> = alphas
        .iter()
        .map(|&a| prob_r_complement(a, 2, &cfg.estimator(10_000)))
        .collect::<bmhull::Result<_>>()?;
    let nonincreasing = ests.windows(2).all(|w| w[1].ci_low <= w[0].ci_high);
    out.push(CheckResult::flag(
        9,
        "P(R^C) nonincreasing in alpha",
        nonincreasing,
        ests.iter()
            .zip(alphas)
            .map(|(e, a)| format!("alpha={a}: {:.2e} [{:.2e}, {:.2e}]", e.mean, e.ci_low, e.ci_high))
            .collect::<Vec<_>>()
            .join("; "),
    ));
    let grid = [1e3, 1e6, 1e9, 1e12];
    let vals: Vec<f64> = grid.iter().map(|&a| final_assembly(a, 1.0, 2)).collect::<bmhull::Result<_>>()?;
    out.push(CheckResult::flag(
        9,
        "final assembly decreasing (criterion)",
        vals.windows(2).all(|w| w[1] < w[0]),
        format!("kappa=1 n=2 values {} at alpha {}", sci(&vals), sci(&grid)),
    ));
    let ln_grid = [2e5, 4e5, 8e5, 1.6e6, 3.2e6];
    let vals: Vec<f64> = ln_grid.iter().map(|&l| final_assembly_ln(l, 1.0, 2)).collect::<bmhull::Result<_>>()?;
    out.push(CheckResult::flag(
        9,
        "final assembly decreasing (large-alpha companion)",
        vals.windows(2).all(|w| w[1] < w[0]),
        format!("kappa=1 n=2 values {} at ln(alpha) {}", sci(&vals), sci(&ln_grid)),
    ));
    Ok(out)
}


fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}
