//! The verification suites. Each suite fans out over base points and folds
//! the per-sample residuals into named items in a fixed order.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{
    check_sigma_t, check_t_condition, frame_residuals, SigmaTVerdict, TTensor,
};
use crate::conformal::{
    b_tensor, b_tensor_oracle, conformal_scale, landsberg_law_residual_from, q_law_check,
    surface_conformal_f12, BData, ConformalFactor, DerivativeMethod,
};
use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{landsberg_pde_residual, landsberg_surface, spray, FForm, PointGeometry};
use crate::metric::{energy, lift, FinslerMetric};
use crate::params::XFunction;
use crate::registry::BuiltFamily;
use crate::surface_class::{
    f_from_q, q_from_f, q_ode_residual, q_prime_identity_residual, ClassParams,
};

use super::config::{CheckKind, CheckSpec};
use super::sampling::PointSamples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// The largest value must stay below the tolerance.
    Max,
    /// The smallest value must stay above the tolerance.
    Min,
    /// Reported only.
    Info,
}

/// Statistics of one residual over the samples that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Item {
    pub key: String,
    pub bound: Bound,
    /// Maximum for `Max` and `Info` items, minimum for `Min` items.
    pub value: f64,
    pub mean: f64,
    pub count: usize,
    /// Sample where `value` was attained.
    pub at: String,
    pub tol: Option<f64>,
    pub ok: Option<bool>,
    /// Hard items must hold whatever outcome is expected.
    pub hard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: String,
    /// Whether the tested property holds; `None` when undecided.
    pub outcome: Option<bool>,
    pub expected: bool,
    pub passed: bool,
    pub items: Vec<Item>,
    pub notes: Vec<String>,
}

struct Obs {
    key: &'static str,
    value: f64,
    at: String,
}

fn obs(key: &'static str, value: f64, at: &str) -> Obs {
    Obs {
        key,
        value,
        at: at.to_string(),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn loc(x: &[f64], y: &[f64]) -> String {
    format!("x={} y={}", fmt_vec(x), fmt_vec(y))
}

struct Items {
    items: Vec<Item>,
}

impl Items {
    fn new() -> Self {
        Items { items: Vec::new() }
    }

    fn declare(&mut self, key: &str, bound: Bound, tol: Option<f64>, hard: bool) -> &mut Self {
        self.items.push(Item {
            key: key.to_string(),
            bound,
            value: 0.0,
            mean: 0.0,
            count: 0,
            at: String::new(),
            tol,
            ok: None,
            hard,
        });
        self
    }

    fn max(&mut self, key: &str, tol: f64) -> &mut Self {
        self.declare(key, Bound::Max, Some(tol), false)
    }

    fn min(&mut self, key: &str, tol: f64) -> &mut Self {
        self.declare(key, Bound::Min, Some(tol), false)
    }

    fn info(&mut self, key: &str) -> &mut Self {
        self.declare(key, Bound::Info, None, false)
    }

    fn hard(&mut self, key: &str, tol: f64) -> &mut Self {
        self.declare(key, Bound::Max, Some(tol), true)
    }

    fn push(&mut self, o: Obs) {
        let item = self
            .items
            .iter_mut()
            .find(|i| i.key == o.key)
            .expect("item declared before use");
        let v = if o.value.is_nan() {
            match item.bound {
                Bound::Min => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            }
        } else {
            o.value
        };
        item.count += 1;
        item.mean += (v - item.mean) / item.count as f64;
        let better = match item.bound {
            Bound::Min => v < item.value,
            _ => v > item.value,
        };
        if item.count == 1 || better {
            item.value = v;
            item.at = o.at;
        }
    }

    fn extend(&mut self, batches: Vec<Vec<Obs>>) {
        for o in batches.into_iter().flatten() {
            self.push(o);
        }
    }

    fn get(&self, key: &str) -> &Item {
        self.items
            .iter()
            .find(|i| i.key == key)
            .expect("item declared before use")
    }

    fn finish(mut self) -> Vec<Item> {
        for item in &mut self.items {
            item.ok = match (item.tol, item.count) {
                (Some(t), c) if c > 0 => Some(match item.bound {
                    Bound::Max => item.value < t,
                    Bound::Min => item.value > t,
                    Bound::Info => true,
                }),
                _ => None,
            };
        }
        self.items
    }
}

/// Everything a suite needs: the family, the samples and resolved tolerances.
pub struct Ctx<'a> {
    pub fam: &'a BuiltFamily,
    pub plan: &'a [PointSamples],
    pub tol: &'a BTreeMap<String, f64>,
}

impl Ctx<'_> {
    fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }

    fn metric(&self) -> &Arc<dyn FinslerMetric> {
        &self.fam.metric
    }

    fn dim(&self) -> usize {
        self.fam.metric.dim()
    }

    /// Runs `f` on every base point in parallel; results keep sample order.
    fn per_point<F>(&self, f: F) -> Result<Vec<Vec<Obs>>>
    where
        F: Fn(&PointSamples) -> Result<Vec<Obs>> + Sync + Send,
    {
        self.plan.par_iter().map(f).collect()
    }
}

fn assemble(
    kind: CheckKind,
    expected: bool,
    verdict: String,
    outcome: Option<bool>,
    items: Vec<Item>,
    notes: Vec<String>,
) -> CheckReport {
    let hard_ok = items.iter().filter(|i| i.hard).all(|i| i.ok != Some(false));
    let passed = hard_ok && outcome == Some(expected);
    CheckReport {
        name: kind.name().to_string(),
        verdict,
        outcome,
        expected,
        passed,
        items,
        notes,
    }
}

/// Outcome from all non-hard toleranced items; undecided if none was evaluated.
fn default_outcome(items: &[Item]) -> Option<bool> {
    let evaluated: Vec<bool> = items
        .iter()
        .filter(|i| !i.hard)
        .filter_map(|i| i.ok)
        .collect();
    if evaluated.is_empty() {
        None
    } else {
        Some(evaluated.iter().all(|&b| b))
    }
}

/// Runs one suite; evaluation errors become a failed report.
pub fn run_check(ctx: &Ctx<'_>, spec: &CheckSpec) -> CheckReport {
    let kind = spec.kind();
    let expected = spec.expect();
    let result = match kind {
        CheckKind::T => check_t(ctx, expected),
        CheckKind::SigmaT => check_sigma(ctx, spec, expected),
        CheckKind::Landsberg => check_landsberg(ctx, expected),
        CheckKind::Berwald => check_berwald(ctx, expected),
        CheckKind::Conformal => check_conformal(ctx, expected),
        CheckKind::ClassIdentities => check_class(ctx, expected),
        CheckKind::PdeResidual => check_pde(ctx, expected),
        CheckKind::CrossOracles => check_cross(ctx, expected),
    };
    result.unwrap_or_else(|e| CheckReport {
        name: kind.name().to_string(),
        verdict: "error".into(),
        outcome: None,
        expected,
        passed: false,
        items: Vec::new(),
        notes: vec![format!("evaluation failed: {e}")],
    })
}

fn check_t(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    let tol = ctx.tol("t");
    let nonzero = ctx.tol("t.nonzero");
    let m = ctx.metric();
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in &p.dirs {
            let r = check_t_condition(m.as_ref(), &[(p.x.clone(), y.clone())], tol)?;
            let at = loc(&p.x, y);
            out.push(obs("T_normalized", r.max_normalized, &at));
            out.push(obs("T_raw", r.max_raw, &at));
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    items.max("T_normalized", tol).info("T_raw");
    items.extend(batches);
    let worst = items.get("T_normalized").value;
    let (verdict, outcome) = if worst < tol {
        ("T vanishes", Some(true))
    } else if worst > nonzero {
        ("T does not vanish", Some(false))
    } else {
        ("indeterminate", None)
    };
    let mut notes = vec!["T is normalized by max|l_i| (max|C^h_ij| + 1/|y|)".to_string()];
    if outcome != Some(true) {
        notes.push(format!(
            "non-vanishing is declared above {nonzero:e}, an implementation threshold"
        ));
    }
    Ok(assemble(
        CheckKind::T,
        expected,
        verdict.into(),
        outcome,
        items.finish(),
        notes,
    ))
}

struct SigmaPoint {
    verdict: SigmaTVerdict,
    kernel: usize,
    witness: Option<Vec<f64>>,
    max_t: f64,
    max_sigma_t: Option<f64>,
    at: String,
}

fn check_sigma(ctx: &Ctx<'_>, spec: &CheckSpec, expected: bool) -> Result<CheckReport> {
    let tol = ctx.tol("sigma_t");
    let n = ctx.dim();
    let sigma: Option<XFunction> = match spec.sigma() {
        Some(v) => Some(XFunction::from_param(v)?),
        None => ctx.fam.sigma_witness.clone(),
    };
    let m = ctx.metric();
    let points: Vec<SigmaPoint> = ctx
        .plan
        .par_iter()
        .map(|p| {
            let grad = sigma.as_ref().map(|s| {
                let mut g = s.gradient(&p.x);
                g.resize(n, 0.0);
                g
            });
            let r = check_sigma_t(m.as_ref(), &p.x, &p.dirs, grad.as_deref(), tol)?;
            Ok(SigmaPoint {
                verdict: r.verdict,
                kernel: r.kernel_dim,
                witness: r.witness,
                max_t: r.max_t,
                max_sigma_t: r.max_sigma_t,
                at: format!("x={}", fmt_vec(&p.x)),
            })
        })
        .collect::<Result<_>>()?;

    let mut items = Items::new();
    items.info("max_T");
    if sigma.is_some() {
        items.max("sigma_T", tol).info("kernel_dim");
    } else {
        items
            .min("kernel_dim", 0.5)
            .max("witness_angle", ctx.tol("sigma_t.angle"));
    }
    if n == 2 {
        items.hard("dichotomy_violation", 0.5);
    }
    let first_witness = points.iter().find_map(|p| p.witness.clone());
    for p in &points {
        items.push(obs("max_T", p.max_t, &p.at));
        items.push(obs("kernel_dim", p.kernel as f64, &p.at));
        if let Some(v) = p.max_sigma_t {
            items.push(obs("sigma_T", v, &p.at));
        }
        if let (None, Some(w), Some(w0)) = (&sigma, &p.witness, &first_witness) {
            let dot: f64 = w
                .iter()
                .zip(w0)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
                .min(1.0);
            items.push(obs("witness_angle", dot.acos(), &p.at));
        }
        if n == 2 {
            items.push(obs(
                "dichotomy_violation",
                if p.kernel == 1 { 1.0 } else { 0.0 },
                &p.at,
            ));
        }
    }
    let count = |v: SigmaTVerdict| points.iter().filter(|p| p.verdict == v).count();
    let total = points.len();
    let (tc, st, ne) = (
        count(SigmaTVerdict::T_CONDITION),
        count(SigmaTVerdict::SIGMA_T_ONLY),
        count(SigmaTVerdict::NEITHER),
    );
    let verdict = if tc == total {
        "T_CONDITION".to_string()
    } else if ne == 0 {
        let w = first_witness.as_deref().map(fmt_vec).unwrap_or_default();
        format!("SIGMA_T_ONLY at {st}/{total} base points, witness {w}")
    } else {
        format!("NEITHER at {ne}/{total} base points")
    };
    let mut notes = Vec::new();
    if let Some(s) = &sigma {
        notes.push(format!("sigma = {}", s.describe()));
    } else if st > 0 {
        notes.push(
            "pointwise kernel only: integrability of the witness field is not checked".into(),
        );
    }
    let items = items.finish();
    let outcome = default_outcome(&items);
    Ok(assemble(
        CheckKind::SigmaT,
        expected,
        verdict,
        outcome,
        items,
        notes,
    ))
}

fn check_landsberg(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    let tol = ctx.tol("landsberg");
    let m = ctx.metric();
    let surface = ctx.dim() == 2;
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in &p.dirs {
            let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
            let at = loc(&p.x, y);
            out.push(obs("L", pg.landsberg()?.max_abs(), &at));
            if surface {
                out.push(obs("I_1", pg.main_scalar_derivatives()?.i_1.abs(), &at));
            }
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    items.max("L", tol);
    if surface {
        items.info("I_1");
    }
    items.extend(batches);
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "Landsberg"
    } else {
        "not Landsberg"
    };
    Ok(assemble(
        CheckKind::Landsberg,
        expected,
        verdict.into(),
        outcome,
        items,
        Vec::new(),
    ))
}

fn check_berwald(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    let tol = ctx.tol("berwald");
    let m = ctx.metric();
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in &p.dirs {
            let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
            let b = pg.spray_data()?.g_h_ijk.expect("curvature requested");
            out.push(obs("F_G_hijk", pg.f() * b.max_abs(), &loc(&p.x, y)));
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    items.max("F_G_hijk", tol);
    items.extend(batches);
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "Berwald"
    } else {
        "not Berwald"
    };
    Ok(assemble(
        CheckKind::Berwald,
        expected,
        verdict.into(),
        outcome,
        items,
        Vec::new(),
    ))
}

fn is_degenerate(e: &Error) -> bool {
    matches!(e, Error::DegenerateFForm(_))
}

fn check_conformal(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    let m = ctx.metric();
    let surface = ctx.dim() == 2;
    let q1_min = ctx.tol("conformal.q1_min");
    let battery = ConformalFactor::battery();
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in &p.dirs {
            let at = loc(&p.x, y);
            let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
            let l = pg.landsberg()?;
            let tt = TTensor::new(pg.f(), &pg.l_low()?, &pg.metric, &pg.cartan_data()?);
            let g = pg.spray_data()?.g_h_ijk.expect("curvature requested");
            let bd = BData::new(m.as_ref(), &p.x, y, DerivativeMethod::Jet)?;
            for cf in &battery {
                let tag = format!("{at} sigma={}", cf.label);
                let bar = conformal_scale(m.clone(), cf.clone());
                let pgb = PointGeometry::new(&bar, &p.x, y)?;
                let lb = pgb.landsberg()?;
                out.push(obs(
                    "landsberg_law",
                    landsberg_law_residual_from(pg.f(), &l, &tt, &lb, cf, &p.x)?,
                    &tag,
                ));
                let gb = pgb.spray_data()?.g_h_ijk.expect("curvature requested");
                let b = bd.groups(&cf.grad(&p.x)).total();
                out.push(obs("b_tensor", (&(&gb - &g) - &b).max_abs(), &tag));
                if cf.is_homothety() {
                    out.push(obs("homothety_B", b.max_abs(), &tag));
                }
                if surface && y[0] > 0.0 {
                    let u = y[1] / y[0];
                    match q_law_check(m, cf, &p.x, u) {
                        Ok(e) if e.q1.abs() > q1_min => out.push(obs("q_law", e.residual(), &tag)),
                        Ok(_) => {}
                        Err(e) if is_degenerate(&e) => {}
                        Err(e) => return Err(e),
                    }
                    let ff = FForm::new(m, 1.0)?;
                    let ffb = FForm::new(&bar, 1.0)?;
                    match surface_conformal_f12(&ff, cf, &p.x, u) {
                        Ok((f1, f2)) => {
                            let (d1, d2) = ffb.spray_factor_jets(&p.x, u, 3)?;
                            let mut worst = 0.0f64;
                            for k in 0..=3 {
                                let mi = [0, 0, k];
                                for (a, b) in [(&f1, &d1), (&f2, &d2)] {
                                    let (va, vb) =
                                        (a.extract_derivative(&mi)?, b.extract_derivative(&mi)?);
                                    worst = worst.max((va - vb).abs() / vb.abs().max(1.0));
                                }
                            }
                            out.push(obs("f12_formulas", worst, &tag));
                        }
                        Err(e) if is_degenerate(&e) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    items
        .max("landsberg_law", ctx.tol("conformal.landsberg_law"))
        .max("b_tensor", ctx.tol("conformal.b_tensor"))
        .max("homothety_B", ctx.tol("conformal.homothety"));
    if surface {
        items
            .max("q_law", ctx.tol("conformal.q_law"))
            .max("f12_formulas", ctx.tol("conformal.f12"));
    }
    items.extend(batches);
    let labels: Vec<&str> = battery.iter().map(|c| c.label.as_str()).collect();
    let mut notes = vec![format!("sigma battery: {}", labels.join(", "))];
    if surface {
        notes.push("S vanishes identically on surfaces; q_law and f12 use samples with y1 > 0 and |Q'| above conformal.q1_min".into());
    } else {
        notes.push(
            "S-group placements: S^{ir}_{tk} = g^{ia} g^{rb} S_tabk and S_tj^r_k = g^{rb} S_tjbk"
                .into(),
        );
    }
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "transformation laws hold"
    } else {
        "transformation laws violated"
    };
    Ok(assemble(
        CheckKind::Conformal,
        expected,
        verdict.into(),
        outcome,
        items,
        notes,
    ))
}

/// Closed-form `Q` on the branch `ε`: `Q_ε(w) = εQ(εw)`.
fn class_q(params: &ClassParams, x: &[f64], eps: f64, w: f64) -> f64 {
    eps * params.q(x, eps * w)
}

fn require_surface(ctx: &Ctx<'_>, kind: CheckKind) -> Result<()> {
    if ctx.dim() != 2 {
        return Err(Error::Config(format!(
            "{} needs a surface, the family has dimension {}",
            kind.name(),
            ctx.dim()
        )));
    }
    Ok(())
}

fn check_class(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    require_surface(ctx, CheckKind::ClassIdentities)?;
    let m = ctx.metric();
    let class = ctx.fam.class.as_ref();
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        let mut scalars = Vec::with_capacity(p.dirs.len());
        for y in &p.dirs {
            let at = loc(&p.x, y);
            let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
            let lr = frame_residuals(&pg)?;
            out.push(obs("frame_cartan", lr.cartan, &at));
            out.push(obs("frame_berwald", lr.berwald, &at));
            out.push(obs("frame_landsberg", lr.landsberg, &at));
            out.push(obs("frame_t", lr.t_tensor, &at));
            let d = pg.main_scalar_derivatives()?;
            scalars.push(d.i);
            if class.is_some() {
                out.push(obs("I_v2", d.i_v2.abs(), &at));
            }
            if y[0] == 0.0 {
                continue;
            }
            let eps = y[0].signum();
            let w = y[1] / y[0].abs();
            let ff = FForm::new(m, eps)?;
            let qp = match q_from_f(&ff, &p.x, w) {
                Ok(q) => q,
                Err(e) if is_degenerate(&e) => continue,
                Err(e) => return Err(e),
            };
            out.push(obs("Q1_min", qp.q1.abs(), &at));
            out.push(obs(
                "Q1_identity",
                q_prime_identity_residual(&ff, &p.x, w)?,
                &at,
            ));
            if let Some(c) = class {
                let closed = class_q(c, &p.x, eps, w);
                out.push(obs(
                    "Q_closed",
                    (qp.q - closed).abs() / closed.abs().max(1.0),
                    &at,
                ));
                match c {
                    ClassParams::One { .. } => {
                        out.push(obs("Q_ode", q_ode_residual(&qp).abs(), &at))
                    }
                    ClassParams::Two { .. } => out.push(obs("Q2", qp.q2.abs(), &at)),
                }
            }
            if m.in_domain(&p.x, &[eps, 0.0]) {
                let q = |t: f64| -> Result<f64> {
                    let [f, fp, _] = ff.f_derivs(&p.x, t)?;
                    Ok(fp / (f - t * fp))
                };
                let rebuilt = f_from_q(q, w, 0.0)?;
                let direct = ff.f(&p.x, w)? / ff.f(&p.x, 0.0)?;
                out.push(obs(
                    "round_trip",
                    (rebuilt - direct).abs() / direct.abs(),
                    &at,
                ));
            }
        }
        if class.is_some() {
            let lo = scalars.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = scalars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            out.push(obs("I_spread", hi - lo, &format!("x={}", fmt_vec(&p.x))));
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    let frame = ctx.tol("class.frame");
    items
        .max("frame_cartan", frame)
        .max("frame_berwald", ctx.tol("class.frame_berwald"))
        .max("frame_landsberg", frame)
        .max("frame_t", frame)
        .min("Q1_min", ctx.tol("class.q1_min"))
        .max("Q1_identity", ctx.tol("class.q_identity"))
        .max("round_trip", ctx.tol("class.round_trip"));
    if let Some(c) = class {
        items
            .max("I_spread", ctx.tol("class.spread"))
            .max("I_v2", ctx.tol("class.i_v2"));
        items.max("Q_closed", ctx.tol("class.q_closed"));
        match c {
            ClassParams::One { .. } => items.max("Q_ode", ctx.tol("class.q_ode")),
            ClassParams::Two { .. } => items.max("Q2", ctx.tol("class.q2")),
        };
    }
    items.extend(batches);
    let mut notes = Vec::new();
    match class {
        Some(c) => {
            let x0 = &ctx.plan[0].x;
            let route = if c.uses_quadrature(x0) {
                "quadrature"
            } else {
                "closed form"
            };
            notes.push(format!(
                "branch {}, evaluated by {route} at the first base point",
                c.branch()
            ));
        }
        None => notes.push("no class parameters: class-specific items skipped".into()),
    }
    notes.push("round trip normalizes f at u = 0 and needs (±1, 0) in the domain".into());
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "identities hold"
    } else {
        "identities violated"
    };
    Ok(assemble(
        CheckKind::ClassIdentities,
        expected,
        verdict.into(),
        outcome,
        items,
        notes,
    ))
}

fn check_pde(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    require_surface(ctx, CheckKind::PdeResidual)?;
    let m = ctx.metric();
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in &p.dirs {
            if y[0] == 0.0 {
                continue;
            }
            let eps = y[0].signum();
            let ff = FForm::new(m, eps)?;
            let at = loc(&p.x, y);
            let (res, fac) = landsberg_pde_residual(&ff, &p.x, y[1] / y[0].abs())?;
            out.push(obs("pde", res.abs(), &at));
            out.push(obs("factored", (res - fac).abs() / res.abs().max(1.0), &at));
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    items
        .max("pde", ctx.tol("pde"))
        .hard("factored", ctx.tol("pde.factored"));
    items.extend(batches);
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "Landsberg PDE satisfied"
    } else {
        "Landsberg PDE violated"
    };
    Ok(assemble(
        CheckKind::PdeResidual,
        expected,
        verdict.into(),
        outcome,
        items,
        Vec::new(),
    ))
}

/// Directions per base point used by the cross-oracle suite.
const CROSS_DIRECTIONS: usize = 2;

/// Largest relative gap between jet derivatives of total order at most 3
/// (x-order at most 2) and central differences.
fn fd_gap<F>(jet: &crate::jet::Jet, eval: F, x: &[f64], y: &[f64]) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let n = x.len();
    let point: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut worst = 0.0f64;
    for mi in fd::multi_indices(2 * n, 3) {
        if mi[..n].iter().sum::<usize>() > 2 {
            continue;
        }
        let exact = jet.extract_derivative(&mi)?;
        let approx = fd::partial(|p: &[f64]| eval(&p[..n], &p[n..]), &point, &mi)?;
        worst = worst.max((exact - approx).abs() / approx.abs().max(1.0));
    }
    Ok(worst)
}

fn check_cross(ctx: &Ctx<'_>, expected: bool) -> Result<CheckReport> {
    let m = ctx.metric();
    let surface = ctx.dim() == 2;
    let cf = ConformalFactor::battery()
        .into_iter()
        .find(|c| c.label == "x1+x2")
        .expect("battery member");
    let batches = ctx.per_point(|p| {
        let mut out = Vec::new();
        for y in p.dirs.iter().take(CROSS_DIRECTIONS) {
            let at = loc(&p.x, y);
            if surface && y[0] > 0.0 {
                let ff = FForm::new(m, 1.0)?;
                let general = spray(m.as_ref(), &p.x, y, false)?.g;
                let fform = ff.spray_values(&p.x, y)?;
                let scale = general.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                let gap = general
                    .iter()
                    .zip(&fform)
                    .fold(0.0f64, |a, (g, h)| a.max((g - h).abs()));
                out.push(obs("spray_fform", gap / scale, &at));
                let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
                out.push(obs(
                    "landsberg_fform",
                    landsberg_surface(&ff, &p.x, y)?.max_abs_diff(&pg.landsberg()?),
                    &at,
                ));
            }
            let jet = b_tensor(m.as_ref(), &cf, &p.x, y, DerivativeMethod::Jet)?;
            let scale = jet.max_abs().max(1.0);
            let oracle = b_tensor_oracle(m.as_ref(), &cf, &p.x, y)?;
            out.push(obs("b_oracle", jet.max_abs_diff(&oracle) / scale, &at));
            let fdb = b_tensor(m.as_ref(), &cf, &p.x, y, DerivativeMethod::FiniteDifference)?;
            out.push(obs("b_fd", jet.max_abs_diff(&fdb) / scale, &at));
            let fj = lift(m.as_ref(), &p.x, y, 3, 2)?;
            out.push(obs("fd_F", fd_gap(&fj, |x, y| m.eval(x, y), &p.x, y)?, &at));
            let ej = energy(m.as_ref(), &p.x, y, 3, 2)?;
            let e = |x: &[f64], y: &[f64]| m.eval(x, y).map(|f| 0.5 * f * f);
            out.push(obs("fd_E", fd_gap(&ej, e, &p.x, y)?, &at));
        }
        Ok(out)
    })?;
    let mut items = Items::new();
    if surface {
        items
            .max("spray_fform", ctx.tol("cross.spray"))
            .max("landsberg_fform", ctx.tol("cross.landsberg_fform"));
    }
    let fd_tol = ctx.tol("cross.fd");
    items
        .max("b_oracle", ctx.tol("cross.b_oracle"))
        .max("b_fd", ctx.tol("cross.b_fd"))
        .max("fd_F", fd_tol)
        .max("fd_E", fd_tol);
    items.extend(batches);
    let mut notes = vec![format!(
        "first {CROSS_DIRECTIONS} directions per base point; B uses sigma = {}; FD covers total order <= 3, x-order <= 2",
        cf.label
    )];
    if surface {
        notes.push("f-form oracles use samples with y1 > 0".into());
    }
    let items = items.finish();
    let outcome = default_outcome(&items);
    let verdict = if outcome == Some(true) {
        "oracles agree"
    } else {
        "oracles disagree"
    };
    Ok(assemble(
        CheckKind::CrossOracles,
        expected,
        verdict.into(),
        outcome,
        items,
        notes,
    ))
}
