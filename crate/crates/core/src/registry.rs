//! Built-in metric families keyed by name, with parameter schemas and
//! default sampling regions.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Euclidean, QuadraticForm, Randers};
use crate::metric::FinslerMetric;
use crate::params::{ParamValue, XFunction};
use crate::surface_class::{build_alpha_beta, build_class, AlphaBetaKind, ClassParams};

pub type Params = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    /// A real constant.
    Scalar,
    /// A constant or a polynomial table in the base coordinates.
    Function,
    /// A small positive integer.
    Integer,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: f64,
    pub doc: &'static str,
}

/// Directions are drawn from this cone. In two dimensions `y = (cos θ, sin θ)`;
/// in three `y = (cos θ, sin θ cos φ, sin θ sin φ)`, θ measured from the y¹ axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cone {
    Arc { theta: (f64, f64) },
    Cap { theta: (f64, f64), phi: (f64, f64) },
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyInfo {
    pub key: &'static str,
    /// Dimension; families with an `n` parameter report their default.
    pub dim: usize,
    pub formula: &'static str,
    pub reference: &'static str,
    pub params: Vec<ParamSpec>,
    pub x_box: Vec<(f64, f64)>,
    pub cone: Cone,
}

const TAU: f64 = std::f64::consts::TAU;

fn p(name: &'static str, kind: ParamKind, default: f64, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
        doc,
    }
}

fn cap() -> Cone {
    Cone::Cap {
        theta: (0.1, 1.45),
        phi: (0.0, TAU),
    }
}

pub fn families() -> Vec<FamilyInfo> {
    use ParamKind::*;
    let box2 = vec![(-0.5, 0.5); 2];
    let box3 = vec![(-0.5, 0.5); 3];
    let full = Cone::Arc { theta: (0.0, TAU) };
    vec![
        FamilyInfo {
            key: "euclidean",
            dim: 2,
            formula: "F = |y|",
            reference: "Riemannian reference",
            params: vec![p("n", Integer, 2.0, "dimension, 2 or 3")],
            x_box: box2.clone(),
            cone: full,
        },
        FamilyInfo {
            key: "quadratic",
            dim: 2,
            formula: "F = sqrt(a_ij(x) y^i y^j)",
            reference: "Riemannian reference",
            params: vec![
                p("n", Integer, 2.0, "dimension, 2 or 3"),
                p("a11", Function, 1.0, ""),
                p("a12", Function, 0.0, ""),
                p("a13", Function, 0.0, "n = 3 only"),
                p("a22", Function, 1.0, ""),
                p("a23", Function, 0.0, "n = 3 only"),
                p("a33", Function, 1.0, "n = 3 only"),
            ],
            x_box: box2.clone(),
            cone: full,
        },
        FamilyInfo {
            key: "randers",
            dim: 2,
            formula: "F = |y| + B(x) y^1",
            reference: "Randers metric with Euclidean alpha",
            params: vec![p("n", Integer, 2.0, "dimension, 2 or 3"), p("B", Function, 0.3, "|B| < 1 on the box")],
            x_box: box2.clone(),
            cone: full,
        },
        FamilyInfo {
            key: "class1",
            dim: 2,
            formula: "F = |y1| f, ln f = 1/2 ln P - (K/2) int du/P, P = c3 u^2 + (c2 c3 - 4 c1 + 1) u + c2, \
                      K = -c2 c3 + 4 c1 + 1; Q = c3 - 4 c1/(u + c2)",
            reference: "vanishing T-tensor, first class (Q'' != 0, 2Q'Q''' = 3Q''^2)",
            params: vec![
                p("c1", Function, 0.1, ""),
                p("c2", Function, 1.0, ""),
                p("c3", Function, 0.5, ""),
                p("u_min", Scalar, f64::NEG_INFINITY, "optional working u-interval"),
                p("u_max", Scalar, f64::INFINITY, "optional working u-interval"),
            ],
            x_box: box2.clone(),
            cone: Cone::Arc { theta: (-0.5, 0.95) },
        },
        FamilyInfo {
            key: "class2",
            dim: 2,
            formula: "F = |y1| f, ln f = 1/2 ln(a u^2 + b u + 1) - b/sqrt(b^2 - 4a) artanh((2au + b)/sqrt(b^2 - 4a)); Q = au + b",
            reference: "vanishing T-tensor, second class (Q'' = 0)",
            params: vec![
                p("a", Function, 2.0, ""),
                p("b", Function, 3.0, ""),
                p("u_min", Scalar, f64::NEG_INFINITY, "optional working u-interval"),
                p("u_max", Scalar, f64::INFINITY, "optional working u-interval"),
            ],
            x_box: box2,
            cone: Cone::Arc { theta: (-0.35, 1.2) },
        },
        FamilyInfo {
            key: "example1",
            dim: 3,
            formula: "F = alpha phi(s), phi(s) = sqrt(s) (1 - s^2)^(1/4), alpha = |y|, s = y1/|y|",
            reference: "(alpha, beta) metric satisfying the T-condition",
            params: vec![],
            x_box: box3.clone(),
            cone: cap(),
        },
        FamilyInfo {
            key: "example2",
            dim: 3,
            formula: "F = (a beta + sqrt(alpha^2 - beta^2)) exp(a beta/(a beta + sqrt(alpha^2 - beta^2))), \
                      beta = f(x1) y1, alpha = f(x1) sqrt(y1^2 + p22 y2^2 + 2 p23 y2 y3 + p33 y3^2)",
            reference: "(alpha, beta) metric satisfying the sigma T-condition with sigma_r = (f(x1), 0, 0)",
            params: vec![
                p("a", Scalar, 1.0, ""),
                p("f", Function, 0.0, "defaults to exp(x1)"),
                p("p22", Scalar, 1.0, ""),
                p("p23", Scalar, 0.0, ""),
                p("p33", Scalar, 1.0, ""),
            ],
            x_box: box3.clone(),
            cone: cap(),
        },
        FamilyInfo {
            key: "ab_t_class",
            dim: 3,
            formula: "F = alpha phi(s), phi = f(x) s^((c b^2 - 1)/(c b^2)) (b^2 - s^2)^(1/(2 c b^2)), beta = b y1",
            reference: "(alpha, beta) class with vanishing T-tensor",
            params: vec![p("c", Scalar, 2.0, "nonzero"), p("b", Scalar, 1.0, "positive"), p("f", Function, 1.0, "")],
            x_box: box3.clone(),
            cone: cap(),
        },
        FamilyInfo {
            key: "ab_sigma_t_class",
            dim: 3,
            formula: "F = alpha phi(s), phi = c3 exp(int_0^s (c1 sqrt(b^2 - t^2) + c2 t)/(t (c1 sqrt(b^2 - t^2) + c2 t) + 1) dt), beta = b y1",
            reference: "(alpha, beta) class with the sigma T-property",
            params: vec![
                p("c1", Scalar, 1.0, ""),
                p("c2", Scalar, 0.0, ""),
                p("c3", Scalar, 1.0, ""),
                p("b", Scalar, 1.0, "positive"),
            ],
            x_box: box3,
            cone: cap(),
        },
    ]
}

pub fn family(key: &str) -> Result<FamilyInfo> {
    families()
        .into_iter()
        .find(|f| f.key == key)
        .ok_or_else(|| Error::Config(format!("unknown family `{key}`")))
}

/// A built metric together with what the checks need to know about it.
#[derive(Debug, Clone)]
pub struct BuiltFamily {
    pub info: FamilyInfo,
    pub metric: Arc<dyn FinslerMetric>,
    pub class: Option<ClassParams>,
    /// Gradient of the witness σ for the σT check, when the family has one.
    pub sigma_witness: Option<XFunction>,
}

impl BuiltFamily {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

struct Reader<'a> {
    info: &'a FamilyInfo,
    params: &'a Params,
}

impl Reader<'_> {
    fn spec(&self, name: &str) -> &ParamSpec {
        self.info
            .params
            .iter()
            .find(|s| s.name == name)
            .expect("parameter declared in the schema")
    }

    fn function(&self, name: &str) -> Result<XFunction> {
        match self.params.get(name) {
            Some(v) => XFunction::from_param(v),
            None => Ok(XFunction::constant(self.spec(name).default)),
        }
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        match self.params.get(name) {
            Some(ParamValue::Number(v)) => Ok(*v),
            Some(_) => Err(Error::Config(format!(
                "parameter `{name}` must be a number"
            ))),
            None => Ok(self.spec(name).default),
        }
    }

    fn dim(&self) -> Result<usize> {
        let n = self.scalar("n")?;
        if n == 2.0 || n == 3.0 {
            Ok(n as usize)
        } else {
            Err(Error::Config(format!("n must be 2 or 3, got {n}")))
        }
    }

    fn u_range(&self) -> Result<Option<(f64, f64)>> {
        let (lo, hi) = (self.scalar("u_min")?, self.scalar("u_max")?);
        Ok(if lo.is_finite() || hi.is_finite() {
            Some((lo, hi))
        } else {
            None
        })
    }
}

fn check_names(info: &FamilyInfo, params: &Params) -> Result<()> {
    for name in params.keys() {
        if !info.params.iter().any(|s| s.name == name) {
            return Err(Error::Config(format!(
                "family `{}` has no parameter `{name}`",
                info.key
            )));
        }
    }
    Ok(())
}

fn with_dim(mut info: FamilyInfo, n: usize) -> FamilyInfo {
    info.dim = n;
    if n == 3 {
        info.x_box = vec![(-0.5, 0.5); 3];
        info.cone = Cone::Cap {
            theta: (0.0, std::f64::consts::PI),
            phi: (0.0, TAU),
        };
    }
    info
}

pub fn build(key: &str, params: &Params) -> Result<BuiltFamily> {
    let info = family(key)?;
    check_names(&info, params)?;
    let r = Reader {
        info: &info,
        params,
    };
    let mut class = None;
    let mut sigma_witness = None;
    let (metric, info): (Arc<dyn FinslerMetric>, FamilyInfo) = match key {
        "euclidean" => {
            let n = r.dim()?;
            (Arc::new(Euclidean::new(n)), with_dim(info.clone(), n))
        }
        "quadratic" => {
            let n = r.dim()?;
            let names: &[&str] = if n == 2 {
                &["a11", "a12", "a22"]
            } else {
                &["a11", "a12", "a13", "a22", "a23", "a33"]
            };
            let entries = names
                .iter()
                .map(|s| r.function(s))
                .collect::<Result<Vec<_>>>()?;
            (
                Arc::new(QuadraticForm::new(n, entries)?),
                with_dim(info.clone(), n),
            )
        }
        "randers" => {
            let n = r.dim()?;
            (
                Arc::new(Randers::new(n, r.function("B")?)),
                with_dim(info.clone(), n),
            )
        }
        "class1" | "class2" => {
            let params = if key == "class1" {
                ClassParams::One {
                    c1: r.function("c1")?,
                    c2: r.function("c2")?,
                    c3: r.function("c3")?,
                }
            } else {
                ClassParams::Two {
                    a: r.function("a")?,
                    b: r.function("b")?,
                }
            };
            class = Some(params.clone());
            (Arc::new(build_class(params, r.u_range()?)?), info.clone())
        }
        "example1" => (
            Arc::new(build_alpha_beta(AlphaBetaKind::Example1)?),
            info.clone(),
        ),
        "example2" => {
            let f = if params.contains_key("f") {
                r.function("f")?
            } else {
                XFunction::poly(&[(1.0, &[1])]).exp_of()
            };
            let a = r.scalar("a")?;
            // σ with ∂σ/∂x¹ = f(x¹) is only needed up to scale: σ_r ∝ (1, 0, 0)
            sigma_witness = Some(XFunction::poly(&[(1.0, &[1])]));
            let kind = AlphaBetaKind::Example2 {
                a,
                f,
                p22: r.scalar("p22")?,
                p23: r.scalar("p23")?,
                p33: r.scalar("p33")?,
            };
            (Arc::new(build_alpha_beta(kind)?), info.clone())
        }
        "ab_t_class" => {
            let kind = AlphaBetaKind::TClass {
                c: r.scalar("c")?,
                b: r.scalar("b")?,
                f: r.function("f")?,
            };
            (Arc::new(build_alpha_beta(kind)?), info.clone())
        }
        "ab_sigma_t_class" => {
            sigma_witness = Some(XFunction::poly(&[(1.0, &[1])]));
            let kind = AlphaBetaKind::SigmaTClass {
                c1: r.scalar("c1")?,
                c2: r.scalar("c2")?,
                c3: r.scalar("c3")?,
                b: r.scalar("b")?,
            };
            (Arc::new(build_alpha_beta(kind)?), info.clone())
        }
        _ => unreachable!("family() rejected unknown keys"),
    };
    Ok(BuiltFamily {
        info,
        metric,
        class,
        sigma_witness,
    })
}
