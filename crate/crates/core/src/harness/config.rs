use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParamValue;
use crate::registry::{Cone, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    T,
    SigmaT,
    Landsberg,
    Berwald,
    Conformal,
    ClassIdentities,
    PdeResidual,
    CrossOracles,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::T,
        CheckKind::SigmaT,
        CheckKind::Landsberg,
        CheckKind::Berwald,
        CheckKind::Conformal,
        CheckKind::ClassIdentities,
        CheckKind::PdeResidual,
        CheckKind::CrossOracles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::T => "t",
            CheckKind::SigmaT => "sigma_t",
            CheckKind::Landsberg => "landsberg",
            CheckKind::Berwald => "berwald",
            CheckKind::Conformal => "conformal",
            CheckKind::ClassIdentities => "class_identities",
            CheckKind::PdeResidual => "pde_residual",
            CheckKind::CrossOracles => "cross_oracles",
        }
    }

    /// Checks built on the f-form or the Berwald frame exist only for surfaces.
    pub fn surface_only(self) -> bool {
        matches!(self, CheckKind::ClassIdentities | CheckKind::PdeResidual)
    }
}

/// One entry of `checks`: a bare name, or a table with an expected outcome
/// and, for `sigma_t`, an explicit σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    Name(CheckKind),
    Detailed {
        name: CheckKind,
        #[serde(default)]
        expect: Option<bool>,
        #[serde(default)]
        sigma: Option<ParamValue>,
    },
}

impl CheckSpec {
    pub fn kind(&self) -> CheckKind {
        match self {
            CheckSpec::Name(k) | CheckSpec::Detailed { name: k, .. } => *k,
        }
    }

    pub fn expect(&self) -> bool {
        match self {
            CheckSpec::Detailed {
                expect: Some(e), ..
            } => *e,
            _ => true,
        }
    }

    pub fn sigma(&self) -> Option<&ParamValue> {
        match self {
            CheckSpec::Detailed { sigma, .. } => sigma.as_ref(),
            CheckSpec::Name(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePlan {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_count")]
    pub directions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the family's default box, one `[lo, hi]` per coordinate.
    #[serde(default)]
    pub x_box: Option<Vec<[f64; 2]>>,
    /// Overrides the family's default direction cone.
    #[serde(default)]
    pub cone: Option<Cone>,
    #[serde(default = "default_margin")]
    pub domain_margin: f64,
}

fn default_count() -> usize {
    16
}

fn default_margin() -> f64 {
    1e-3
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: default_count(),
            directions: default_count(),
            seed: 0,
            x_box: None,
            cone: None,
            domain_margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Txt,
    Csv,
    JsonLines,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "txt" => Ok(Format::Txt),
            "csv" => Ok(Format::Csv),
            "json-lines" => Ok(Format::JsonLines),
            _ => Err(Error::Config(format!(
                "unknown format `{s}`, expected txt, csv or json-lines"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub samples: SamplePlan,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// A config running `checks` on `family` with default sampling.
    pub fn new(family: &str, checks: &[CheckKind]) -> Self {
        RunConfig {
            family: family.to_string(),
            params: Params::new(),
            samples: SamplePlan::default(),
            checks: checks.iter().map(|&k| CheckSpec::Name(k)).collect(),
            tolerances: BTreeMap::new(),
            output: OutputSpec::default(),
        }
    }
}

/// Default tolerances, keyed by check item.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("t", 1e-7),
        ("t.nonzero", 1e-3),
        ("sigma_t", 1e-7),
        ("sigma_t.angle", 1e-6),
        ("landsberg", 1e-10),
        ("berwald", 1e-10),
        ("conformal.landsberg_law", 1e-7),
        ("conformal.b_tensor", 1e-6),
        ("conformal.q_law", 1e-8),
        ("conformal.q1_min", 1e-6),
        ("conformal.f12", 1e-8),
        ("conformal.homothety", 1e-12),
        ("class.frame", 1e-7),
        ("class.frame_berwald", 1e-5),
        ("class.spread", 1e-7),
        ("class.i_v2", 1e-7),
        ("class.q_closed", 1e-9),
        ("class.q_ode", 1e-9),
        ("class.q2", 1e-9),
        ("class.q1_min", 1e-6),
        ("class.q_identity", 1e-10),
        ("class.round_trip", 1e-8),
        ("pde", 1e-9),
        ("pde.factored", 1e-9),
        ("cross.spray", 1e-9),
        ("cross.landsberg_fform", 1e-8),
        ("cross.b_oracle", 1e-9),
        ("cross.b_fd", 1e-6),
        ("cross.fd", 1e-5),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Applies overrides on top of the defaults, rejecting unknown keys.
pub fn resolve_tolerances(overrides: &[&BTreeMap<String, f64>]) -> Result<BTreeMap<String, f64>> {
    let mut tol = default_tolerances();
    for layer in overrides {
        for (k, &v) in layer.iter() {
            let slot = tol
                .get_mut(k)
                .ok_or_else(|| Error::Config(format!("unknown tolerance `{k}`")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance `{k}` must be positive, got {v}"
                )));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

/// Parses `key=value,key=value`.
pub fn parse_tol_overrides(spec: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::Config(format!("tolerance override `{part}` is not key=value"))
        })?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("tolerance `{k}` is not a number")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::parse(
            r#"
            family = "class1"
            checks = ["t", { name = "sigma_t", expect = true }, "class_identities"]

            [params]
            c1 = { poly = [[0.1, 0, 0], [0.02, 1, 0], [0.01, 0, 2]] }
            c2 = 1.0

            [samples]
            count = 8
            seed = 7
            x_box = [[-0.2, 0.2], [-0.2, 0.2]]

            [tolerances]
            t = 1e-8

            [output]
            format = "json-lines"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.family, "class1");
        assert_eq!(cfg.checks.len(), 3);
        assert_eq!(cfg.checks[1].kind(), CheckKind::SigmaT);
        assert_eq!(cfg.samples.count, 8);
        assert_eq!(cfg.samples.directions, 16);
        assert_eq!(cfg.output.format, Format::JsonLines);
        assert!(matches!(cfg.params["c1"], ParamValue::Table { .. }));
    }

    #[test]
    fn schema_violations_are_config_errors() {
        assert!(RunConfig::parse("family = \"x\"").is_err());
        assert!(RunConfig::parse("family = \"x\"\nchecks = [\"nope\"]").is_err());
        assert!(RunConfig::parse("family = \"x\"\nchecks = []\n[samples]\nbogus = 1").is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let o = parse_tol_overrides("t=1e-6, conformal.b_tensor=2e-6").unwrap();
        let tol = resolve_tolerances(&[&o]).unwrap();
        assert_eq!(tol["t"], 1e-6);
        assert_eq!(tol["conformal.b_tensor"], 2e-6);
        let bad = parse_tol_overrides("nope=1").unwrap();
        assert!(resolve_tolerances(&[&bad]).is_err());
        assert!(parse_tol_overrides("t").is_err());
    }
}
