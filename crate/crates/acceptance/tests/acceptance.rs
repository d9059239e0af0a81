//! One PASS/FAIL line per acceptance criterion. Tolerances and sample sizes
//! are the defaults of the verification suites.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bmhull_cli::commands::{simulate, sweep, verify, SweepInner};
use bmhull_cli::config::{OutFormat, RunConfig};
use bmhull_cli::suites::{self, verdict, CheckResult, Suite};

type Runner = fn(&RunConfig) -> anyhow::Result<Vec<CheckResult>>;

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
    run: Runner,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "half-plane stay probability matches 2 Phi(1) - 1",
        budget: Some(Duration::from_secs(60)),
        run: suites::half_plane_stay,
    },
    Criterion {
        id: 2,
        title: "exit exponents within 10% of pi/(2 beta)",
        budget: Some(Duration::from_secs(600)),
        run: suites::exit_exponents,
    },
    Criterion {
        id: 3,
        title: "half-plane bridge matches 1 - e^-2",
        budget: None,
        run: suites::bridge_closed_form,
    },
    Criterion {
        id: 4,
        title: "facet-count identity: 99% intervals overlap at alpha 10, 20",
        budget: Some(Duration::from_secs(600)),
        run: suites::campbell,
    },
    Criterion {
        id: 5,
        title: "Z_a integral and single-constraint measure",
        budget: Some(Duration::from_secs(5)),
        run: suites::lemma8,
    },
    Criterion {
        id: 6,
        title: "discordant witnesses certified in 1000 wedge instances",
        budget: None,
        run: suites::lemma3,
    },
    Criterion {
        id: 7,
        title: "special index found and re-verified at alpha = 1e6",
        budget: None,
        run: suites::lemma4,
    },
    Criterion {
        id: 8,
        title: "hull invariants and coupled monotonicity",
        budget: None,
        run: suites::hull_invariants,
    },
    Criterion {
        id: 9,
        title: "conditional bounds, P(R^C) trend, final assembly monotone",
        budget: None,
        run: suites::bounds,
    },
    Criterion {
        id: 10,
        title: "byte-identical outputs across worker counts",
        budget: None,
        run: determinism,
    },
];

fn read_dir_sorted(dir: &Path) -> anyhow::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)?
        .map(|e| {
            let e = e?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path())?))
        })
        .collect::<std::io::Result<_>>()?;
    files.sort();
    Ok(files)
}

/// Runs each command twice with different worker counts and compares bytes.
fn determinism(base: &RunConfig) -> anyhow::Result<Vec<CheckResult>> {
    let tmp = tempfile::tempdir()?;
    let mut out = Vec::new();
    let mut record = |check: &str, same: bool, detail: String| {
        out.push(CheckResult {
            criterion: 10,
            check: check.to_string(),
            estimate: None,
            std_error: None,
            bound: None,
            margin: None,
            pass: same,
            detail,
        });
    };

    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let mut c = base.clone();
        c.alpha = vec![5.0, 10.0];
        c.seed = 7;
        c.workers = Some(workers);
        c.out = Some(tmp.path().join("simulate"));
        simulate(&c, Some(0))?;
        outputs.push(read_dir_sorted(c.out.as_ref().unwrap())?);
        std::fs::remove_dir_all(c.out.as_ref().unwrap())?;
    }
    record("simulate", outputs[0] == outputs[1], format!("{} files", outputs[0].len()));

    let jobs: [(&str, Suite, usize); 3] = [
        ("verify campbell", Suite::Campbell, 1000),
        ("verify spitzer", Suite::Spitzer, 5000),
        ("verify lemma3", Suite::Lemma3, 300),
    ];
    for (name, suite, replicas) in jobs {
        let mut texts = Vec::new();
        for workers in [1, 3] {
            let mut c = base.clone();
            c.replicas = Some(replicas);
            c.workers = Some(workers);
            c.out = Some(tmp.path().join(format!("{}.json", suite.name())));
            verify(suite, &c, Some(0))?;
            texts.push(std::fs::read(c.out.as_ref().unwrap())?);
        }
        record(name, texts[0] == texts[1], format!("{} bytes", texts[0].len()));
    }

    let mut texts = Vec::new();
    for workers in [1, 2] {
        let mut c = base.clone();
        c.replicas = Some(300);
        c.workers = Some(workers);
        c.format = OutFormat::Csv;
        c.out = Some(tmp.path().join("sweep.csv"));
        sweep("alpha", &["20".into(), "50".into()], SweepInner::RComplement, &c, Some(0))?;
        texts.push(std::fs::read(c.out.as_ref().unwrap())?);
    }
    record("sweep alpha r-complement", texts[0] == texts[1], format!("{} bytes", texts[0].len()));
    Ok(out)
}

fn fmt_opt(label: &str, v: Option<f64>) -> String {
    v.map(|x| format!(" {label}={x:.6e}")).unwrap_or_default()
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut passed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = (c.run)(&cfg);
        let elapsed = start.elapsed();
        let (ok, lines) = match result {
            Ok(checks) => {
                let in_time = c.budget.map_or(true, |b| elapsed <= b);
                let mut lines: Vec<String> = checks
                    .iter()
                    .map(|r| {
                        format!(
                            "        [{}] {}:{}{} {}",
                            verdict(r.pass).to_lowercase(),
                            r.check,
                            fmt_opt("estimate", r.estimate),
                            fmt_opt("reference", r.bound),
                            r.detail
                        )
                    })
                    .collect();
                if let Some(b) = c.budget {
                    lines.push(format!("        [{}] runtime {:.1}s within {}s", verdict(in_time).to_lowercase(), elapsed.as_secs_f64(), b.as_secs()));
                }
                (in_time && !checks.is_empty() && checks.iter().all(|r| r.pass), lines)
            }
            Err(e) => (false, vec![format!("        [error] {e:#}")]),
        };
        println!("{} {:>2}  {} ({:.1}s)", verdict(ok), c.id, c.title, elapsed.as_secs_f64());
        for l in lines {
            println!("{l}");
        }
        passed += usize::from(ok);
    }
    println!("acceptance: {passed}/{} criteria passed", CRITERIA.len());
    if passed == CRITERIA.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
