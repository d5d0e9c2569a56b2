//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every shipped config under `configs/` once, reads residuals out of
//! the reports and compares them with pinned limits. Exits non-zero when any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use finsler::conditions::t_tensor;
use finsler::geometry::PointGeometry;
use finsler::harness::sampling::place_samples;
use finsler::harness::{self, strip_timing, Format, Item, Report, RunConfig, RunOptions};
use finsler::registry;

struct Run {
    name: String,
    dim: usize,
    family: String,
    report: Report,
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn suite_configs() -> Vec<(String, RunConfig)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .expect("configs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .filter(|p| !p.file_stem().unwrap().to_string_lossy().ends_with("_scan"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let cfg = RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (name, cfg)
        })
        .collect()
}

fn run_suite(configs: &[(String, RunConfig)]) -> Vec<Run> {
    configs
        .iter()
        .map(|(name, cfg)| {
            let report =
                harness::run(cfg, &RunOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
            Run {
                name: name.clone(),
                dim: report.header.dim,
                family: cfg.family.clone(),
                report,
            }
        })
        .collect()
}

/// Limits on named report items across a set of runs.
struct Limits<'a> {
    runs: Vec<&'a Run>,
    failures: Vec<String>,
    worst: Vec<String>,
}

impl<'a> Limits<'a> {
    fn over(runs: impl IntoIterator<Item = &'a Run>) -> Self {
        Limits {
            runs: runs.into_iter().collect(),
            failures: Vec::new(),
            worst: Vec::new(),
        }
    }

    fn items(&mut self, check: &str, key: &str) -> Vec<(&'a str, &'a Item)> {
        let mut found = Vec::new();
        for r in &self.runs {
            match r.report.check(check) {
                Some(c) => match c.items.iter().find(|i| i.key == key) {
                    Some(i) => found.push((r.name.as_str(), i)),
                    None => self
                        .failures
                        .push(format!("{}: {check}.{key} missing", r.name)),
                },
                None => self
                    .failures
                    .push(format!("{}: check {check} missing", r.name)),
            }
        }
        found
    }

    fn below(&mut self, check: &str, key: &str, limit: f64) -> &mut Self {
        let found = self.items(check, key);
        let mut worst = 0.0f64;
        for (name, i) in found {
            worst = worst.max(i.value);
            if !(i.value < limit) {
                self.failures.push(format!(
                    "{name}: {key} = {:.3e} at {} (limit {limit:e})",
                    i.value, i.at
                ));
            }
        }
        self.worst.push(format!("{key} {worst:.2e}"));
        self
    }

    fn above(&mut self, check: &str, key: &str, limit: f64) -> &mut Self {
        let found = self.items(check, key);
        let mut worst = f64::INFINITY;
        for (name, i) in found {
            worst = worst.min(i.value);
            if !(i.value > limit) {
                self.failures.push(format!(
                    "{name}: {key} = {:.3e} at {} (must exceed {limit:e})",
                    i.value, i.at
                ));
            }
        }
        self.worst.push(format!("{key} {worst:.2e}"));
        self
    }

    fn verdict(&self) -> Verdict {
        if self.failures.is_empty() {
            Verdict {
                ok: true,
                detail: self.worst.join(", "),
            }
        } else {
            Verdict {
                ok: false,
                detail: self.failures.join("; "),
            }
        }
    }
}

fn named<'a>(runs: &'a [Run], names: &[&str]) -> Vec<&'a Run> {
    let picked: Vec<&Run> = runs
        .iter()
        .filter(|r| names.contains(&r.name.as_str()))
        .collect();
    assert_eq!(picked.len(), names.len(), "missing configs among {names:?}");
    picked
}

fn with_check<'a>(runs: &'a [Run], check: &str) -> Vec<&'a Run> {
    runs.iter()
        .filter(|r| r.report.check(check).is_some())
        .collect()
}

fn riemannian_nullity() -> Verdict {
    const LIMIT: f64 = 1e-10;
    const SECONDS: f64 = 5.0;
    let start = Instant::now();
    let quadratic =
        RunConfig::load(&configs_dir().join("quadratic.toml")).expect("quadratic config");
    let mut n3 = registry::Params::new();
    n3.insert("n".into(), finsler::params::ParamValue::Number(3.0));
    let cases = [
        ("euclidean", registry::Params::new()),
        ("euclidean", n3),
        ("quadratic", quadratic.params),
    ];
    let mut worst = [0.0f64; 4];
    let mut samples = 0;
    for (key, params) in &cases {
        let fam = registry::build(key, params).expect("family builds");
        let metric = fam.metric.as_ref();
        let plan = place_samples(metric, &fam.info.x_box, &fam.info.cone, 16, 16, 0, 1e-3)
            .expect("samples");
        for p in &plan {
            for y in &p.dirs {
                let pg = PointGeometry::new(metric, &p.x, y).expect("geometry");
                let c = pg.cartan_data().expect("cartan").c.max_abs();
                let t = t_tensor(metric, &p.x, y).expect("T").t.max_abs();
                let l = pg.landsberg().expect("landsberg").max_abs();
                let g = pg
                    .spray_data()
                    .expect("spray")
                    .g_h_ijk
                    .expect("berwald curvature")
                    .max_abs();
                for (w, v) in worst.iter_mut().zip([c, t, l, g]) {
                    *w = w.max(v);
                }
                samples += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.iter().all(|&w| w < LIMIT) && secs < SECONDS && samples == 3 * 256;
    Verdict {
        ok,
        detail: format!(
            "{samples} samples, C {:.2e}, T {:.2e}, L {:.2e}, G^h_ijk {:.2e} (limit {LIMIT:e}), {secs:.2} s (limit {SECONDS} s)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

fn surface_form_consistency(runs: &[Run]) -> Verdict {
    let surfaces: Vec<&Run> = runs.iter().filter(|r| r.dim == 2).collect();
    let mut lim = Limits::over(surfaces.iter().copied());
    lim.below("cross_oracles", "spray_fform", 1e-9)
        .below("cross_oracles", "landsberg_fform", 1e-8);
    for f in registry::families().iter().filter(|f| f.dim == 2) {
        if !surfaces
            .iter()
            .any(|r| r.family == f.key && r.report.check("cross_oracles").is_some())
        {
            lim.failures.push(format!("family {} not covered", f.key));
        }
    }
    lim.verdict()
}

fn berwald_frame_identities(runs: &[Run]) -> Verdict {
    let names = [
        "randers",
        "randers_x",
        "class1",
        "class1_x",
        "class2",
        "class2_x",
    ];
    let mut lim = Limits::over(named(runs, &names));
    lim.below("class_identities", "frame_cartan", 1e-7)
        .below("class_identities", "frame_berwald", 1e-5)
        .below("class_identities", "frame_landsberg", 1e-7)
        .below("class_identities", "frame_t", 1e-7);
    lim.verdict()
}

fn classification_vanishing_t(runs: &[Run]) -> Verdict {
    let names = ["class1", "class1_x", "class2", "class2_x"];
    let mut lim = Limits::over(named(runs, &names));
    lim.below("t", "T_normalized", 1e-7)
        .below("class_identities", "I_spread", 1e-7);
    for (name, i) in lim.items("t", "T_normalized") {
        if i.count < 256 {
            lim.failures
                .push(format!("{name}: only {} samples", i.count));
        }
    }
    lim.verdict()
}

fn surface_dichotomy(runs: &[Run]) -> Verdict {
    let mut lim = Limits::over(named(
        runs,
        &[
            "randers",
            "randers_x",
            "class1",
            "class1_x",
            "class2",
            "class2_x",
        ],
    ));
    let mut dims = Vec::new();
    for (name, i) in lim.items("sigma_t", "kernel_dim") {
        let want = if name.starts_with("randers") {
            0.0
        } else {
            2.0
        };
        // The item holds the minimum; a mean equal to it means every point agrees.
        if i.value != want || i.mean != want {
            lim.failures.push(format!(
                "{name}: kernel dimension min {} mean {} (want {want})",
                i.value, i.mean
            ));
        }
        dims.push(format!("{name} {want}"));
    }
    let surfaces: Vec<&Run> = runs
        .iter()
        .filter(|r| r.dim == 2 && r.report.check("sigma_t").is_some())
        .collect();
    for r in &surfaces {
        if r.report.header.directions < 3 {
            lim.failures
                .push(format!("{}: fewer than 3 directions", r.name));
        }
    }
    let mut all = Limits::over(surfaces);
    all.below("sigma_t", "dichotomy_violation", 0.5);
    lim.failures.extend(all.failures);
    let mut v = lim.verdict();
    if v.ok {
        v.detail = format!("kernel dims {}; dimension 1 never seen", dims.join(", "));
    }
    v
}

fn three_dim_inequivalence(runs: &[Run]) -> Verdict {
    let mut lim = Limits::over(named(runs, &["example1"]));
    lim.below("t", "T_normalized", 1e-7);
    let mut ex2 = Limits::over(named(runs, &["example2"]));
    ex2.above("t", "T_normalized", 1e-3)
        .below("sigma_t", "sigma_T", 1e-7);
    lim.failures.extend(ex2.failures);
    lim.worst = lim.worst.iter().map(|w| format!("example1 {w}")).collect();
    lim.worst
        .extend(ex2.worst.iter().map(|w| format!("example2 {w}")));
    lim.verdict()
}

fn conformal_laws(runs: &[Run]) -> Verdict {
    let mut targets: Vec<&Run> = runs.iter().filter(|r| r.dim == 2).collect();
    targets.extend(named(runs, &["example2"]));
    let mut lim = Limits::over(targets.iter().copied());
    lim.below("conformal", "landsberg_law", 1e-7)
        .below("conformal", "b_tensor", 1e-6)
        .below("conformal", "homothety_B", 1e-12);
    let mut surfaces = Limits::over(targets.into_iter().filter(|r| r.dim == 2));
    surfaces.below("conformal", "q_law", 1e-8);
    lim.failures.extend(surfaces.failures);
    lim.worst.extend(surfaces.worst);
    lim.verdict()
}

fn q_machinery(runs: &[Run]) -> Verdict {
    let mut lim = Limits::over(named(runs, &["class1", "class1_x", "class2", "class2_x"]));
    lim.below("class_identities", "round_trip", 1e-8)
        .above("class_identities", "Q1_min", 1e-6);
    let mut one = Limits::over(named(runs, &["class1", "class1_x"]));
    one.below("class_identities", "Q_ode", 1e-9);
    let mut two = Limits::over(named(runs, &["class2", "class2_x"]));
    two.below("class_identities", "Q2", 1e-9);
    for l in [one, two] {
        lim.failures.extend(l.failures);
        lim.worst.extend(l.worst);
    }
    lim.verdict()
}

fn differentiation_substrate(runs: &[Run]) -> Verdict {
    let targets = with_check(runs, "cross_oracles");
    let mut lim = Limits::over(targets.iter().copied());
    lim.below("cross_oracles", "fd_F", 1e-5)
        .below("cross_oracles", "fd_E", 1e-5)
        .below("cross_oracles", "b_fd", 1e-5);
    let mut v = lim.verdict();
    v.detail = format!("{} configs: {}", targets.len(), v.detail);
    v
}

fn full_suite(configs: &[(String, RunConfig)], runs: &[Run], secs: f64) -> Verdict {
    const SECONDS: f64 = 60.0;
    let mut failures = Vec::new();
    for r in runs.iter().filter(|r| !r.report.passed()) {
        let failed: Vec<&str> = r
            .report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        failures.push(format!("{} failed {}", r.name, failed.join(",")));
    }
    let families: std::collections::BTreeSet<&str> =
        runs.iter().map(|r| r.family.as_str()).collect();
    for f in registry::families() {
        if !families.contains(f.key) {
            failures.push(format!("family {} not run", f.key));
        }
    }
    if secs >= SECONDS {
        failures.push(format!("{secs:.1} s (limit {SECONDS} s)"));
    }
    let again = run_suite(configs);
    for (a, b) in runs.iter().zip(&again) {
        for f in [Format::Txt, Format::Csv, Format::JsonLines] {
            let (ra, rb) = (
                a.report.render(f).expect("render"),
                b.report.render(f).expect("render"),
            );
            if strip_timing(&ra) != strip_timing(&rb) {
                failures.push(format!("{} differs between runs ({f:?})", a.name));
            }
        }
    }
    if failures.is_empty() {
        Verdict {
            ok: true,
            detail: format!(
                "{} configs over {} families in {secs:.1} s, identical on rerun",
                runs.len(),
                families.len()
            ),
        }
    } else {
        Verdict {
            ok: false,
            detail: failures.join("; "),
        }
    }
}

fn main() {
    let configs = suite_configs();
    let start = Instant::now();
    let runs = run_suite(&configs);
    let suite_secs = start.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn FnOnce() -> Verdict + '_>)> = vec![
        ("riemannian_nullity", Box::new(riemannian_nullity)),
        (
            "surface_form_consistency",
            Box::new(|| surface_form_consistency(&runs)),
        ),
        (
            "berwald_frame_identities",
            Box::new(|| berwald_frame_identities(&runs)),
        ),
        (
            "classification_vanishing_t",
            Box::new(|| classification_vanishing_t(&runs)),
        ),
        ("surface_dichotomy", Box::new(|| surface_dichotomy(&runs))),
        (
            "three_dim_inequivalence",
            Box::new(|| three_dim_inequivalence(&runs)),
        ),
        ("conformal_laws", Box::new(|| conformal_laws(&runs))),
        ("q_machinery", Box::new(|| q_machinery(&runs))),
        (
            "differentiation_substrate",
            Box::new(|| differentiation_substrate(&runs)),
        ),
        (
            "full_suite",
            Box::new(|| full_suite(&configs, &runs, suite_secs)),
        ),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let v = criterion();
        println!(
            "{} {name}: {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.ok {
            failed += 1;
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
