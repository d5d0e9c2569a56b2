//! Parameter sweeps: T-residual and Landsberg-law residual over a grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{check_t_condition, TTensor};
use crate::conformal::{conformal_scale, landsberg_law_residual_from, ConformalFactor};
use crate::error::{Error, Result};
use crate::geometry::PointGeometry;
use crate::params::ParamValue;
use crate::registry::{self, BuiltFamily};

use super::config::{Format, RunConfig};
use super::report::json_line;
use super::sampling::{place_samples, PointSamples};
use super::RunOptions;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Parses `a=0.5:3:6,b=0:3:7`: each axis is `lo:hi:count` (inclusive
/// linspace) or a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<GridAxis>> {
    let mut axes = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("grid axis `{part}` is not name=range")))?;
        let nums: Vec<&str> = range.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("grid axis `{name}`: `{s}` is not a number")))
        };
        let values = match nums.as_slice() {
            [v] => vec![num(v)?],
            [lo, hi, count] => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                let count: usize = count.trim().parse().map_err(|_| {
                    Error::Config(format!("grid axis `{name}`: bad count `{count}`"))
                })?;
                match count {
                    0 => return Err(Error::Config(format!("grid axis `{name}` has no points"))),
                    1 => vec![lo],
                    _ => (0..count)
                        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                        .collect(),
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "grid axis `{name}` must be value or lo:hi:count"
                )))
            }
        };
        axes.push(GridAxis {
            name: name.trim().to_string(),
            values,
        });
    }
    if axes.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(axes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub params: Vec<(String, f64)>,
    pub status: String,
    /// `closed form` or `quadrature` for the surface classes.
    pub route: Option<String>,
    pub t_max: Option<f64>,
    pub t_ok: Option<bool>,
    pub landsberg_law_max: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub family: String,
    pub t_tol: f64,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::JsonLines => {
                let mut out = String::new();
                for r in &self.rows {
                    out.push_str(&json_line("scan", r)?);
                }
                Ok(out)
            }
            Format::Csv | Format::Txt => self.csv(),
        }
    }

    fn csv(&self) -> Result<String> {
        let map = |e: csv::Error| Error::Config(format!("scan serialization: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head: Vec<String> = self
            .rows
            .first()
            .map(|r| r.params.iter().map(|(k, _)| k.clone()).collect())
            .unwrap_or_default();
        head.extend(
            [
                "status",
                "route",
                "t_max",
                "t_ok",
                "landsberg_law_max",
                "reason",
            ]
            .map(String::from),
        );
        w.write_record(&head).map_err(map)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let mut rec: Vec<String> = r.params.iter().map(|(_, v)| v.to_string()).collect();
            rec.push(r.status.clone());
            rec.push(r.route.clone().unwrap_or_default());
            rec.push(opt(r.t_max));
            rec.push(r.t_ok.map(|b| b.to_string()).unwrap_or_default());
            rec.push(opt(r.landsberg_law_max));
            rec.push(r.reason.clone().unwrap_or_default());
            w.write_record(&rec).map_err(map)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn grid_points(axes: &[GridAxis]) -> Vec<Vec<(String, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.name.clone(), v));
                    q
                })
            })
            .collect();
    }
    points
}

fn measure(fam: &BuiltFamily, plan: &[PointSamples], t_tol: f64) -> Result<(f64, f64)> {
    let m = &fam.metric;
    let battery: Vec<ConformalFactor> = ConformalFactor::battery()
        .into_iter()
        .filter(|c| !c.is_homothety())
        .collect();
    let per_point: Vec<(f64, f64)> = plan
        .par_iter()
        .map(|p| {
            let (mut t, mut law) = (0.0f64, 0.0f64);
            for y in &p.dirs {
                t = t.max(
                    check_t_condition(m.as_ref(), &[(p.x.clone(), y.clone())], t_tol)?
                        .max_normalized,
                );
                let pg = PointGeometry::new(m.as_ref(), &p.x, y)?;
                let l = pg.landsberg()?;
                let tt = TTensor::new(pg.f(), &pg.l_low()?, &pg.metric, &pg.cartan_data()?);
                for cf in &battery {
                    let bar = conformal_scale(m.clone(), cf.clone());
                    let lb = PointGeometry::new(&bar, &p.x, y)?.landsberg()?;
                    law = law.max(landsberg_law_residual_from(pg.f(), &l, &tt, &lb, cf, &p.x)?);
                }
            }
            Ok((t, law))
        })
        .collect::<Result<_>>()?;
    Ok(per_point
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &(t, l)| (a.max(t), b.max(l))))
}

/// Sweeps `grid` over the config's family. Points where the family cannot be
/// built or sampled are recorded as skipped.
pub fn scan(cfg: &RunConfig, grid: &str, opts: &RunOptions) -> Result<ScanTable> {
    let axes = parse_grid(grid)?;
    let info = registry::family(&cfg.family)?;
    for a in &axes {
        if !info.params.iter().any(|s| s.name == a.name) {
            return Err(Error::Config(format!(
                "family `{}` has no parameter `{}`",
                cfg.family, a.name
            )));
        }
    }
    let tol = super::config::resolve_tolerances(&[&cfg.tolerances, &opts.tol_overrides])?;
    let t_tol = tol["t"];
    let seed = opts.seed.unwrap_or(cfg.samples.seed);
    let pool = super::thread_pool()?;
    let rows = pool.install(|| {
        grid_points(&axes)
            .into_iter()
            .map(|point| {
                let mut params = cfg.params.clone();
                for (k, v) in &point {
                    params.insert(k.clone(), ParamValue::Number(*v));
                }
                let skipped = |e: Error| ScanRow {
                    params: point.clone(),
                    status: "skipped".into(),
                    route: None,
                    t_max: None,
                    t_ok: None,
                    landsberg_law_max: None,
                    reason: Some(e.to_string()),
                };
                let fam = match registry::build(&cfg.family, &params) {
                    Ok(f) => f,
                    Err(e) => return skipped(e),
                };
                let (x_box, cone) = super::sampling_region(cfg, &fam);
                let plan = match place_samples(
                    fam.metric.as_ref(),
                    &x_box,
                    &cone,
                    cfg.samples.count,
                    cfg.samples.directions,
                    seed,
                    cfg.samples.domain_margin,
                ) {
                    Ok(p) => p,
                    Err(e) => return skipped(e),
                };
                let route = fam.class.as_ref().map(|c| {
                    if c.uses_quadrature(&plan[0].x) {
                        "quadrature"
                    } else {
                        "closed form"
                    }
                    .to_string()
                });
                match measure(&fam, &plan, t_tol) {
                    Ok((t, law)) => ScanRow {
                        params: point.clone(),
                        status: "ok".into(),
                        route,
                        t_max: Some(t),
                        t_ok: Some(t < t_tol),
                        landsberg_law_max: Some(law),
                        reason: None,
                    },
                    Err(e) => skipped(e),
                }
            })
            .collect()
    });
    Ok(ScanTable {
        family: cfg.family.clone(),
        t_tol,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("a=0.5:3:6, b=2").unwrap();
        assert_eq!(g[0].values.len(), 6);
        assert_eq!(g[0].values[5], 3.0);
        assert_eq!(g[1].values, vec![2.0]);
        assert_eq!(grid_points(&g).len(), 6);
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("a=1:2").is_err());
        assert!(parse_grid("a=1:2:0").is_err());
    }
}
