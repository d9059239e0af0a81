//! `simulate`, `verify` and `sweep`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bmhull::hull::build_hull;
use bmhull::integrals::{integral_za_bound, integral_za_quadrature};
use bmhull::mc::{campbell_check, prob_r_complement, Estimate};
use bmhull::paths::sample_brownian;
use bmhull::rain::{coupled_grid, generate_rain, level};
use bmhull::{Polytope64, SimRng};
use serde::Serialize;

use crate::config::{OutFormat, RunConfig, KEYS};
use crate::report::{emit, json_document, write_text, Metadata, Table};
use crate::suites::{run_suite, table, CheckResult, Suite, ZA_RESOLUTION};

/// Stream tag of the coupled realization written by `simulate`.
const SIMULATE_TAG: u16 = 400;

#[derive(Debug, Serialize)]
struct HullRecord {
    alpha: f64,
    level_times: Vec<f64>,
    /// Times of the hull vertices, ascending.
    vertex_times: Vec<f64>,
    hull: Option<Polytope64>,
    degenerate: Option<String>,
}

/// Writes the path, the rain and one hull per level for one coupled
/// realization; returns the files written.
pub fn simulate(cfg: &RunConfig, timestamp: Option<u64>) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let meta = Metadata::new("simulate", cfg, timestamp);
    let dir = cfg.out_dir();
    let cap = cfg.alpha.iter().copied().fold(1.0, f64::max);
    let mut rng = SimRng::substream(cfg.seed, SIMULATE_TAG, 0);
    let rain = generate_rain::<f64>(cap, &mut rng)?;
    let top = level(&rain, cap)?;
    let grid = coupled_grid(&top, cfg.grid + 1)?;
    let path = sample_brownian(cfg.dim, &grid, &mut rng)?;

    let mut files = Vec::new();
    let mut buf = meta.csv_preamble().into_bytes();
    path.write_csv(&mut buf)?;
    let p = dir.join("path.csv");
    write_text(&p, std::str::from_utf8(&buf)?)?;
    files.push(p);

    let mut buf = meta.csv_preamble().into_bytes();
    rain.write_csv(&mut buf)?;
    let p = dir.join("rain.csv");
    write_text(&p, std::str::from_utf8(&buf)?)?;
    files.push(p);

    for &alpha in &cfg.alpha {
        let lv = level(&rain, alpha)?;
        let pts = path.values_at(lv.times())?;
        let (hull, degenerate) = match build_hull(&pts) {
            Ok(h) => (Some(h), None),
            Err(e @ (bmhull::Error::Degenerate { .. } | bmhull::Error::InvalidArgument(_))) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        let vertex_times = hull
            .as_ref()
            .map(|h| h.vertices.iter().map(|&i| lv.times()[i]).collect())
            .unwrap_or_else(|| lv.times().to_vec());
        let record = HullRecord {
            alpha,
            level_times: lv.times().to_vec(),
            vertex_times,
            hull,
            degenerate,
        };
        let p = dir.join(format!("hull_alpha_{alpha}.json"));
        write_text(&p, &json_document(&meta, &record)?)?;
        files.push(p);
    }
    Ok(files)
}

/// Runs a suite and writes its report; returns whether every check passed.
pub fn verify(suite: Suite, cfg: &RunConfig, timestamp: Option<u64>) -> Result<bool> {
    cfg.validate()?;
    let results = run_suite(suite, cfg)?;
    let pass = results.iter().all(|r| r.pass);
    let meta = Metadata::new(&format!("verify {}", suite.name()), cfg, timestamp);
    let text = render_checks(&results, pass, &meta, cfg.format)?;
    emit(cfg.out_file(&format!("verify-{}", suite.name())).as_deref(), &text)?;
    Ok(pass)
}

fn render_checks(results: &[CheckResult], pass: bool, meta: &Metadata, format: OutFormat) -> Result<String> {
    Ok(match format {
        OutFormat::Csv => table(results).to_csv(meta),
        OutFormat::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                verdict: &'static str,
                checks: &'a [CheckResult],
            }
            json_document(
                meta,
                &Report {
                    verdict: crate::suites::verdict(pass),
                    checks: results,
                },
            )?
        }
    })
}

/// Inner computation of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepInner {
    /// `P(R_alpha^C)` at `alpha`, `dim`.
    RComplement,
    /// Quadrature of the `Z_a` integral at `a`, `n` against `|ln a|^(2n)`.
    ZaIntegral,
    /// Facet-count identity at `alpha`, `dim` (reports the left side, right side as reference).
    Campbell,
}

pub const SWEEP_HEADER: [&str; 12] = [
    "parameter", "value", "estimand", "mean", "std_error", "ci_low", "ci_high", "reference", "replicas", "seed", "grid", "confidence",
];

fn estimate_row(param: &str, value: &str, e: &Estimate, reference: Option<f64>) -> Vec<String> {
    vec![
        param.to_string(),
        value.to_string(),
        e.estimand.clone(),
        format!("{:e}", e.mean),
        format!("{:e}", e.std_error),
        format!("{:e}", e.ci_low),
        format!("{:e}", e.ci_high),
        reference.map(|r| format!("{r:e}")).unwrap_or_default(),
        e.replicas.to_string(),
        e.config.master_seed.to_string(),
        e.config.grid_points_per_unit_time.to_string(),
        e.config.confidence_level.to_string(),
    ]
}

/// One row per value of `param`.
pub fn sweep_table(param: &str, values: &[String], inner: SweepInner, cfg: &RunConfig) -> Result<Table> {
    if !KEYS.contains(&param) || matches!(param, "out" | "format" | "workers") {
        bail!("unknown sweep parameter {param:?}");
    }
    let mut t = Table::new(&SWEEP_HEADER);
    for v in values {
        let mut c = cfg.clone();
        c.set(param, v).with_context(|| format!("sweep value {v:?}"))?;
        c.validate()?;
        let row = match inner {
            SweepInner::RComplement => {
                let e = prob_r_complement(c.alpha(), c.dim, &c.estimator(10_000))?;
                estimate_row(param, v, &e, None)
            }
            SweepInner::Campbell => {
                let r = campbell_check(c.alpha(), c.dim, &c.estimator(10_000))?;
                estimate_row(param, v, &r.lhs, Some(r.rhs.mean))
            }
            SweepInner::ZaIntegral => {
                let q = integral_za_quadrature(c.a, c.n, ZA_RESOLUTION)?;
                let exact = integral_za_bound(c.a, c.n)?;
                vec![
                    param.to_string(),
                    v.clone(),
                    "za_integral".into(),
                    format!("{q:e}"),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("{exact:e}"),
                    String::new(),
                    c.seed.to_string(),
                    ZA_RESOLUTION.to_string(),
                    String::new(),
                ]
            }
        };
        t.push(row);
    }
    Ok(t)
}

pub fn sweep(param: &str, values: &[String], inner: SweepInner, cfg: &RunConfig, timestamp: Option<u64>) -> Result<()> {
    cfg.validate()?;
    let t = sweep_table(param, values, inner, cfg)?;
    let meta = Metadata::new(&format!("sweep {param}"), cfg, timestamp);
    let text = match cfg.format {
        OutFormat::Csv => t.to_csv(&meta),
        OutFormat::Json => t.to_json(&meta),
    };
    emit(cfg.out_file(&format!("sweep-{param}")).as_deref(), &text)
}
