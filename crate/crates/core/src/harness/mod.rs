//! Batch front end: configs, sample plans, verification suites and reports.

pub mod checks;
pub mod config;
pub mod report;
pub mod sampling;
pub mod scan;

use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::registry::{self, BuiltFamily, Cone};

pub use checks::{Bound, CheckReport, Item};
pub use config::{CheckKind, CheckSpec, Format, RunConfig, SamplePlan};
pub use report::{strip_timing, Header, Report};
pub use scan::{parse_grid, scan, ScanTable};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "FINSLER_THREADS";

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol_overrides: BTreeMap<String, f64>,
}

/// Exit status for an error raised before any check ran.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParams(_) | Error::Dimension { .. } => 2,
        _ => 3,
    }
}

pub(crate) fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                ))
            })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

pub(crate) fn sampling_region(cfg: &RunConfig, fam: &BuiltFamily) -> (Vec<(f64, f64)>, Cone) {
    let x_box = match &cfg.samples.x_box {
        Some(b) => b.iter().map(|&[lo, hi]| (lo, hi)).collect(),
        None => fam.info.x_box.clone(),
    };
    (x_box, cfg.samples.cone.unwrap_or(fam.info.cone))
}

pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let fam = registry::build(&cfg.family, &cfg.params)?;
    let dim = fam.dim();
    if cfg.checks.is_empty() {
        return Err(Error::Config("no checks requested".into()));
    }
    for c in &cfg.checks {
        if c.kind().surface_only() && dim != 2 {
            return Err(Error::Config(format!(
                "check `{}` needs a surface, `{}` has dimension {dim}",
                c.kind().name(),
                cfg.family
            )));
        }
        if c.sigma().is_some() && c.kind() != CheckKind::SigmaT {
            return Err(Error::Config(format!(
                "`sigma` applies to sigma_t only, not `{}`",
                c.kind().name()
            )));
        }
    }
    let tol = config::resolve_tolerances(&[&cfg.tolerances, &opts.tol_overrides])?;
    let seed = opts.seed.unwrap_or(cfg.samples.seed);
    let (x_box, cone) = sampling_region(cfg, &fam);
    let plan = sampling::place_samples(
        fam.metric.as_ref(),
        &x_box,
        &cone,
        cfg.samples.count,
        cfg.samples.directions,
        seed,
        cfg.samples.domain_margin,
    )?;
    let ctx = checks::Ctx {
        fam: &fam,
        plan: &plan,
        tol: &tol,
    };
    let pool = thread_pool()?;
    let reports: Vec<CheckReport> = pool.install(|| {
        cfg.checks
            .iter()
            .map(|c| checks::run_check(&ctx, c))
            .collect()
    });
    let passed = reports.iter().all(|c| c.passed);
    Ok(Report {
        header: Header {
            family: cfg.family.clone(),
            metric: fam.metric.label(),
            dim,
            seed,
            x_samples: cfg.samples.count,
            directions: cfg.samples.directions,
            domain_margin: cfg.samples.domain_margin,
            result: if passed { "PASS" } else { "FAIL" }.into(),
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        checks: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: &str, checks: &[CheckKind]) -> RunConfig {
        let mut c = RunConfig::new(family, checks);
        c.samples.count = 3;
        c.samples.directions = 6;
        c
    }

    #[test]
    fn euclidean_trivially_passes() {
        let r = run(
            &small("euclidean", &[CheckKind::T, CheckKind::Landsberg]),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(r.exit_code(), 0, "{r:#?}");
        for c in &r.checks {
            for i in &c.items {
                assert!(i.value < 1e-12, "{}: {}", i.key, i.value);
            }
        }
    }

    #[test]
    fn randers_fails_the_t_check() {
        let r = run(&small("randers", &[CheckKind::T]), &RunOptions::default()).unwrap();
        assert_eq!(r.exit_code(), 1);
        let t = r.check("t").unwrap();
        assert_eq!(t.outcome, Some(false));
        assert!(t.items[0].value > 1e-3);
    }

    #[test]
    fn class2_passes_t_and_identities() {
        let r = run(
            &small("class2", &[CheckKind::T, CheckKind::ClassIdentities]),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(r.exit_code(), 0, "{}", r.render(Format::Txt).unwrap());
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small("randers", &[CheckKind::T, CheckKind::SigmaT]);
        let a = run(&cfg, &RunOptions::default()).unwrap();
        let b = run(&cfg, &RunOptions::default()).unwrap();
        for f in [Format::Txt, Format::Csv, Format::JsonLines] {
            assert_eq!(
                strip_timing(&a.render(f).unwrap()),
                strip_timing(&b.render(f).unwrap())
            );
        }
        let c = run(
            &cfg,
            &RunOptions {
                seed: Some(9),
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(
            strip_timing(&a.render(Format::Txt).unwrap()),
            strip_timing(&c.render(Format::Txt).unwrap())
        );
    }

    #[test]
    fn configuration_errors_map_to_exit_2() {
        let e = run(&small("nope", &[CheckKind::T]), &RunOptions::default()).unwrap_err();
        assert_eq!(error_exit_code(&e), 2);
        let e = run(
            &small("example1", &[CheckKind::PdeResidual]),
            &RunOptions::default(),
        )
        .unwrap_err();
        assert_eq!(error_exit_code(&e), 2);
        let mut cfg = small("euclidean", &[CheckKind::T]);
        cfg.samples.domain_margin = 5.0;
        let e = run(&cfg, &RunOptions::default()).unwrap_err();
        assert_eq!(error_exit_code(&e), 3);
    }

    #[test]
    fn strip_timing_blanks_only_the_value() {
        assert_eq!(
            strip_timing("a = 1\nwall_time_s = 0.25\n"),
            "a = 1\nwall_time_s = _\n"
        );
        assert_eq!(
            strip_timing("{\"wall_time_s\":1.5e-3,\"x\":1}"),
            "{\"wall_time_s\":_,\"x\":1}"
        );
    }
}
