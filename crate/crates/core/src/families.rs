//! Concrete Finsler functions: Riemannian references, Randers metrics and
//! surfaces given by a profile `F = |y¹| f(x, y²/y¹)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::metric::FinslerMetric;
use crate::params::XFunction;

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sum_squares(y: &[Jet]) -> Jet {
    let mut acc = Jet::zero(y[0].config());
    for v in y {
        acc += &v.square();
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Euclidean { dim }
    }
}

impl FinslerMetric for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }
    fn label(&self) -> String {
        format!("euclidean(n={})", self.dim)
    }
    fn domain_margin(&self, _x: &[f64], y: &[f64]) -> f64 {
        if norm(y) > 0.0 {
            1.0
        } else {
            0.0
        }
    }
    fn eval_jet(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(sum_squares(y).sqrt()?)
    }
}

/// Riemannian `F = sqrt(a_ij(x) y^i y^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    dim: usize,
    /// Upper triangle `a_ij`, `i <= j`, row-major.
    entries: Vec<XFunction>,
}

impl QuadraticForm {
    pub fn new(dim: usize, entries: Vec<XFunction>) -> Result<Self> {
        if entries.len() != dim * (dim + 1) / 2 {
            return Err(Error::InvalidParams(format!(
                "quadratic form of dimension {dim} needs {} entries, got {}",
                dim * (dim + 1) / 2,
                entries.len()
            )));
        }
        Ok(QuadraticForm { dim, entries })
    }

    fn entry(&self, i: usize, j: usize) -> &XFunction {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row i of the upper triangle starts after sum_{r<i} (dim - r) entries
        let start: usize = (0..i).map(|r| self.dim - r).sum();
        &self.entries[start + (j - i)]
    }
}

impl FinslerMetric for QuadraticForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn label(&self) -> String {
        format!("quadratic(n={})", self.dim)
    }
    fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64 {
        let q: f64 = (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| self.entry(i, j).eval(x) * y[i] * y[j])
            .sum();
        let n2 = norm(y).powi(2);
        if n2 > 0.0 {
            q / n2
        } else {
            0.0
        }
    }
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let mut q = Jet::zero(y[0].config());
        for i in 0..self.dim {
            for j in 0..self.dim {
                q += &(self.entry(i, j).eval_jet(x) * &y[i] * &y[j]);
            }
        }
        Ok(q.sqrt()?)
    }
}

/// Randers metric `F = |y| + B(x) y¹` with Euclidean `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Randers {
    dim: usize,
    b: XFunction,
}

impl Randers {
    pub fn new(dim: usize, b: XFunction) -> Self {
        Randers { dim, b }
    }
}

impl FinslerMetric for Randers {
    fn dim(&self) -> usize {
        self.dim
    }
    fn label(&self) -> String {
        format!("randers(n={}, B={})", self.dim, self.b.describe())
    }
    fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64 {
        if norm(y) > 0.0 {
            1.0 - self.b.eval(x).abs()
        } else {
            0.0
        }
    }
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(sum_squares(y).sqrt()? + self.b.eval_jet(x) * &y[0])
    }
}

/// The `f(x, u)` of a surface metric `F = |y¹| f(x, y²/y¹)`.
pub trait Profile: Send + Sync + fmt::Debug {
    fn label(&self) -> String;
    fn f_jet(&self, x: &[Jet], u: &Jet) -> Result<Jet>;
    /// Positive where the profile is defined and regular.
    fn margin(&self, x: &[f64], u: f64) -> f64;
}

/// Surface metric `F = |y¹| f(x, u)`, `u = y²/y¹`, on the cone `y¹ ≠ 0`.
#[derive(Debug, Clone)]
pub struct SurfaceMetric<P> {
    pub profile: P,
}

impl<P: Profile> SurfaceMetric<P> {
    pub fn new(profile: P) -> Self {
        SurfaceMetric { profile }
    }
}

impl<P: Profile> FinslerMetric for SurfaceMetric<P> {
    fn dim(&self) -> usize {
        2
    }
    fn label(&self) -> String {
        self.profile.label()
    }
    fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = norm(y);
        if n == 0.0 || y[0] == 0.0 {
            return 0.0;
        }
        (y[0].abs() / n).min(self.profile.margin(x, y[1] / y[0]))
    }
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let u = y[1].div(&y[0])?;
        let abs_y1 = if y[0].value() < 0.0 {
            -&y[0]
        } else {
            y[0].clone()
        };
        Ok(abs_y1 * self.profile.f_jet(x, &u)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::lift;

    #[test]
    fn quadratic_entry_layout() {
        let q = QuadraticForm::new(3, (1..=6).map(|v| XFunction::constant(v as f64)).collect())
            .unwrap();
        let e = |i, j| q.entry(i, j).eval(&[0.0; 3]);
        assert_eq!(
            [e(0, 0), e(0, 1), e(0, 2), e(1, 1), e(1, 2), e(2, 2)],
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        );
        assert_eq!(e(2, 1), 5.0);
    }

    #[test]
    fn randers_value() {
        let m = Randers::new(2, XFunction::constant(0.3));
        assert!((m.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.3).abs() < 1e-15);
        assert!(!m.in_domain(&[0.0, 0.0], &[0.0, 0.0]));
    }

    #[derive(Debug)]
    struct RoundProfile;
    impl Profile for RoundProfile {
        fn label(&self) -> String {
            "round".into()
        }
        fn f_jet(&self, _x: &[Jet], u: &Jet) -> Result<Jet> {
            Ok((u.square() + 1.0).sqrt()?)
        }
        fn margin(&self, _x: &[f64], _u: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn surface_metric_is_reversible_euclidean() {
        let m = SurfaceMetric::new(RoundProfile);
        for y in [[3.0, 4.0], [-3.0, 4.0], [-1.0, -2.0]] {
            let v = lift(&m, &[0.0, 0.0], &y, 2, 0).unwrap();
            assert!((v.value() - norm(&y)).abs() < 1e-14);
            assert!((v.extract_derivative(&[0, 0, 1, 0]).unwrap() - y[0] / norm(&y)).abs() < 1e-14);
        }
        assert!(!m.in_domain(&[0.0, 0.0], &[0.0, 1.0]));
    }
}
