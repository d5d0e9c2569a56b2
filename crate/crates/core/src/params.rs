//! Scalar functions of the base point used as family parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// `c · ∏ x_i^{p_i}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Polynomial in the base coordinates, optionally exponentiated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XFunction {
    pub terms: Vec<Monomial>,
    #[serde(default)]
    pub exp: bool,
}

/// Config-file form: a bare number or a coefficient table
/// `{ poly = [[c, p1, p2], ...], exp = false }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Table {
        poly: Vec<Vec<f64>>,
        #[serde(default)]
        exp: bool,
    },
}

impl XFunction {
    pub fn constant(c: f64) -> Self {
        XFunction {
            terms: vec![Monomial {
                coeff: c,
                powers: vec![],
            }],
            exp: false,
        }
    }

    /// Polynomial from `(coeff, powers)` pairs.
    pub fn poly(terms: &[(f64, &[u32])]) -> Self {
        XFunction {
            terms: terms
                .iter()
                .map(|&(coeff, p)| Monomial {
                    coeff,
                    powers: p.to_vec(),
                })
                .collect(),
            exp: false,
        }
    }

    pub fn exp_of(mut self) -> Self {
        self.exp = true;
        self
    }

    pub fn from_param(value: &ParamValue) -> Result<Self> {
        match value {
            ParamValue::Number(c) => Ok(XFunction::constant(*c)),
            ParamValue::Table { poly, exp } => {
                let mut terms = Vec::with_capacity(poly.len());
                for row in poly {
                    let (&coeff, powers) = row
                        .split_first()
                        .ok_or_else(|| Error::Config("empty polynomial term".into()))?;
                    let powers = powers
                        .iter()
                        .map(|&p| {
                            if p >= 0.0 && p.fract() == 0.0 && p <= 8.0 {
                                Ok(p as u32)
                            } else {
                                Err(Error::Config(format!("invalid exponent {p}")))
                            }
                        })
                        .collect::<Result<Vec<u32>>>()?;
                    terms.push(Monomial { coeff, powers });
                }
                Ok(XFunction { terms, exp: *exp })
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.powers.iter().all(|&p| p == 0) || t.coeff == 0.0)
    }

    /// Number of base coordinates the function reads.
    pub fn arity(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.powers.iter().rposition(|&p| p > 0).map_or(0, |i| i + 1))
            .max()
            .unwrap_or(0)
    }

    fn poly_value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| x[i].powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = self.poly_value(x);
        if self.exp {
            v.exp()
        } else {
            v
        }
    }

    /// Evaluates on coordinate jets; all `x` share a configuration.
    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let config = x[0].config();
        let mut acc = Jet::zero(config);
        for t in &self.terms {
            let mut term = Jet::constant(config, t.coeff);
            for (i, &p) in t.powers.iter().enumerate() {
                for _ in 0..p {
                    term = &term * &x[i];
                }
            }
            acc += &term;
        }
        if self.exp {
            acc.exp()
        } else {
            acc
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let outer = if self.exp { self.eval(x) } else { 1.0 };
        (0..x.len())
            .map(|r| {
                let d: f64 = self
                    .terms
                    .iter()
                    .filter(|t| t.powers.get(r).copied().unwrap_or(0) > 0)
                    .map(|t| {
                        t.coeff
                            * t.powers
                                .iter()
                                .enumerate()
                                .map(|(i, &p)| {
                                    if i == r {
                                        p as f64 * x[i].powi(p as i32 - 1)
                                    } else {
                                        x[i].powi(p as i32)
                                    }
                                })
                                .product::<f64>()
                    })
                    .sum();
                outer * d
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        let body = if self.terms.is_empty() {
            "0".to_string()
        } else {
            self.terms
                .iter()
                .map(|t| {
                    let mono: Vec<String> = t
                        .powers
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0)
                        .map(|(i, &p)| {
                            if p == 1 {
                                format!("x{}", i + 1)
                            } else {
                                format!("x{}^{}", i + 1, p)
                            }
                        })
                        .collect();
                    if mono.is_empty() {
                        format!("{}", t.coeff)
                    } else {
                        format!("{}*{}", t.coeff, mono.join("*"))
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        if self.exp {
            format!("exp({body})")
        } else {
            body
        }
    }
}

impl From<f64> for XFunction {
    fn from(c: f64) -> Self {
        XFunction::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{JetConfig, Var};

    #[test]
    fn polynomial_and_gradient() {
        let f = XFunction::poly(&[(1.0, &[]), (2.0, &[1]), (0.5, &[0, 2])]);
        let x = [0.3, -0.4];
        assert!((f.eval(&x) - (1.0 + 0.6 + 0.08)).abs() < 1e-15);
        let g = f.gradient(&x);
        assert!((g[0] - 2.0).abs() < 1e-15);
        assert!((g[1] + 0.4).abs() < 1e-15);
        assert_eq!(f.arity(), 2);
        assert!(!f.is_constant());
    }

    #[test]
    fn jet_evaluation_matches_gradient() {
        let f = XFunction::poly(&[(0.2, &[1, 1]), (-0.3, &[2])]).exp_of();
        let cfg = JetConfig::fiber(2, 0, 1).unwrap();
        let x = [0.7, 0.1];
        let xs: Vec<Jet> = (0..2)
            .map(|i| Jet::variable(cfg, Var::X(i), x[i]).unwrap())
            .collect();
        let j = f.eval_jet(&xs);
        let g = f.gradient(&x);
        assert!((j.value() - f.eval(&x)).abs() < 1e-15);
        assert!((j.extract_derivative(&[1, 0, 0, 0]).unwrap() - g[0]).abs() < 1e-14);
        assert!((j.extract_derivative(&[0, 1, 0, 0]).unwrap() - g[1]).abs() < 1e-14);
    }

    #[test]
    fn parses_config_tables() {
        let v: ParamValue =
            toml::from_str::<toml::Table>("p = { poly = [[1.0, 0, 2]], exp = true }").unwrap()["p"]
                .clone()
                .try_into()
                .unwrap();
        let f = XFunction::from_param(&v).unwrap();
        assert!(f.exp);
        assert_eq!(f.terms[0].powers, vec![0, 2]);
        let bad = ParamValue::Table {
            poly: vec![vec![1.0, 0.5]],
            exp: false,
        };
        assert!(XFunction::from_param(&bad).is_err());
    }
}
