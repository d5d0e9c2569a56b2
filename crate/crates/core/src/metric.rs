//! Finsler functions and their pointwise fundamental objects.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetConfig, Var};
use crate::tensor::{det_adjugate, Matrix, Tensor, Tensor3, Tensor4};

/// A Finsler function `F(x, y)` on an open cone of directions.
pub trait FinslerMetric: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn label(&self) -> String;

    /// Positive inside the conic domain and non-positive outside; 0-homogeneous
    /// in `y`, so it doubles as a distance-to-boundary measure for sampling.
    fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64;

    fn in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        y.iter().any(|&v| v != 0.0) && self.domain_margin(x, y) > 0.0
    }

    /// `F` evaluated on coordinate jets sharing one configuration.
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet>;

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(lift(self, x, y, 0, 0)?.value())
    }
}

macro_rules! forward_metric {
    ($($ty:ty),*) => {$(
        impl<M: FinslerMetric + ?Sized> FinslerMetric for $ty {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn label(&self) -> String {
                (**self).label()
            }
            fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64 {
                (**self).domain_margin(x, y)
            }
            fn in_domain(&self, x: &[f64], y: &[f64]) -> bool {
                (**self).in_domain(x, y)
            }
            fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
                (**self).eval_jet(x, y)
            }
        }
    )*};
}
forward_metric!(&M, Box<M>, std::sync::Arc<M>);

fn check_point<M: FinslerMetric + ?Sized>(metric: &M, x: &[f64], y: &[f64]) -> Result<()> {
    let n = metric.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len().max(y.len()),
        });
    }
    if !metric.in_domain(x, y) {
        return Err(Error::Domain {
            label: metric.label(),
            x: x.to_vec(),
            y: y.to_vec(),
        });
    }
    Ok(())
}

/// Coordinate jets `(x^1..x^n, y^1..y^n)` about `(x, y)`.
pub fn coordinate_jets(config: JetConfig, x: &[f64], y: &[f64]) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let xs = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(config, Var::X(i), v))
        .collect::<std::result::Result<_, _>>()?;
    let ys = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(config, Var::Y(i), v))
        .collect::<std::result::Result<_, _>>()?;
    Ok((xs, ys))
}

/// Jet of `F` about `(x, y)` with the given truncation orders.
pub fn lift<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    y: &[f64],
    order_y: usize,
    order_x: usize,
) -> Result<Jet> {
    check_point(metric, x, y)?;
    let config = JetConfig::fiber(metric.dim(), order_y, order_x)?;
    let (xs, ys) = coordinate_jets(config, x, y)?;
    metric.eval_jet(&xs, &ys)
}

/// Jet of the energy `E = F^2 / 2`.
pub fn energy<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    y: &[f64],
    order_y: usize,
    order_x: usize,
) -> Result<Jet> {
    let f = lift(metric, x, y, order_y, order_x)?;
    Ok(f.square().scale(0.5))
}

/// Jets of `F` and `E` at one point, the source of every fiber tensor.
#[derive(Debug, Clone)]
pub struct FiberJets {
    pub dim: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: Jet,
    pub e: Jet,
}

impl FiberJets {
    pub fn new<M: FinslerMetric + ?Sized>(
        metric: &M,
        x: &[f64],
        y: &[f64],
        order_y: usize,
        order_x: usize,
    ) -> Result<Self> {
        let f = lift(metric, x, y, order_y, order_x)?;
        if f.value() <= 0.0 {
            return Err(Error::Domain {
                label: metric.label(),
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        let e = f.square().scale(0.5);
        Ok(FiberJets {
            dim: metric.dim(),
            x: x.to_vec(),
            y: y.to_vec(),
            f,
            e,
        })
    }

    pub fn order_y(&self) -> usize {
        self.e.config().order_y
    }

    pub fn order_x(&self) -> usize {
        self.e.config().order_x
    }

    pub fn value(&self) -> f64 {
        self.f.value()
    }

    /// The coordinate `y^i` as a jet on the given orders.
    pub fn y_coord(&self, i: usize, order_y: usize, order_x: usize) -> Result<Jet> {
        let config = JetConfig::fiber(self.dim, order_y, order_x)?;
        Ok(Jet::variable(config, Var::Y(i), self.y[i])?)
    }

    /// `ℓ_i = ∂̇_i F`
    pub fn l_low(&self) -> Result<Tensor<Jet, 1>> {
        Tensor::try_from_fn(self.dim, |[i]| self.f.dy(i).map_err(Error::from))
    }

    /// `g_ij = ∂̇_i ∂̇_j E`
    pub fn g(&self) -> Result<Tensor<Jet, 2>> {
        let de: Vec<Jet> = (0..self.dim)
            .map(|i| self.e.dy(i))
            .collect::<std::result::Result<_, _>>()?;
        Tensor::try_from_fn(self.dim, |[i, j]| de[i].dy(j).map_err(Error::from))
    }

    /// `C_ijk = ½ ∂̇_k g_ij`
    pub fn cartan(&self, g: &Tensor<Jet, 2>) -> Result<Tensor<Jet, 3>> {
        Tensor::try_from_fn(self.dim, |[i, j, k]| Ok(g[[i, j]].dy(k)?.scale(0.5)))
    }

    /// `C_ijkh = ∂̇_h C_ijk`
    pub fn cartan_dot(&self, c: &Tensor<Jet, 3>) -> Result<Tensor<Jet, 4>> {
        Tensor::try_from_fn(self.dim, |[i, j, k, h]| Ok(c[[i, j, k]].dy(h)?))
    }
}

fn singular_threshold(g: &Matrix) -> f64 {
    let n = g.dim();
    let mean_diag = (0..n).map(|i| g[[i, i]].abs()).sum::<f64>() / n as f64;
    1e-12 * mean_diag.powi(n as i32)
}

/// Inverse of a jet-valued metric, failing on a singular point value.
pub fn invert_jets(g: &Tensor<Jet, 2>) -> Result<Tensor<Jet, 2>> {
    let values = g.values();
    let (det, adj) = det_adjugate(g);
    let threshold = singular_threshold(&values);
    if !(det.value().abs() >= threshold) || det.value() == 0.0 {
        return Err(Error::SingularMetric {
            det: det.value(),
            threshold,
        });
    }
    let inv_det = det.recip()?;
    Ok(adj.map(|a| a * &inv_det))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub g: Matrix,
    pub g_inv: Matrix,
    pub det: f64,
}

impl MetricTensor {
    pub fn from_matrix(g: Matrix) -> Result<Self> {
        let (det, adj) = det_adjugate(&g);
        let threshold = singular_threshold(&g);
        if !(det.abs() >= threshold) || det == 0.0 {
            return Err(Error::SingularMetric { det, threshold });
        }
        let g_inv = adj.scale(1.0 / det);
        Ok(MetricTensor { g, g_inv, det })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Raises the first index of a covariant tensor.
    pub fn raise_first3(&self, t: &Tensor3) -> Tensor3 {
        let n = self.dim();
        Tensor::from_fn(n, |[h, i, j]| {
            (0..n).map(|r| self.g_inv[[h, r]] * t[[r, i, j]]).sum()
        })
    }

    pub fn raise_first4(&self, t: &Tensor4) -> Tensor4 {
        let n = self.dim();
        Tensor::from_fn(n, |[h, i, j, k]| {
            (0..n).map(|r| self.g_inv[[h, r]] * t[[r, i, j, k]]).sum()
        })
    }

    pub fn raise_vec(&self, v: &[f64]) -> Vec<f64> {
        crate::tensor::mat_vec(&self.g_inv, v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanData {
    pub c: Tensor3,
    /// `C_ijkh = ∂̇_h C_ijk`, stored `[i, j, k, h]`.
    pub c_dot: Tensor4,
    /// `C^h_ij`, stored `[h, i, j]`.
    pub c_up: Tensor3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularMetric {
    pub h: Matrix,
    /// `h^i_j`, stored `[i, j]`.
    pub h_mixed: Matrix,
    pub h_up: Matrix,
}

/// Frame `(ℓ, m)` of a Finsler surface with signature `eps` and main scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct BerwaldFrame {
    pub l_low: Vec<f64>,
    pub l_up: Vec<f64>,
    pub m_low: Vec<f64>,
    pub m_up: Vec<f64>,
    pub eps: f64,
    pub main_scalar: f64,
}

/// Jet-valued Berwald frame; the main scalar keeps `order_y - 3` orders in `y`.
#[derive(Debug, Clone)]
pub struct FrameJets {
    pub l_low: Vec<Jet>,
    pub l_up: Vec<Jet>,
    pub m_low: Vec<Jet>,
    pub m_up: Vec<Jet>,
    pub eps: f64,
    pub main_scalar: Jet,
}

impl FrameJets {
    pub fn new(fj: &FiberJets, g_inv: &Tensor<Jet, 2>, c: &Tensor<Jet, 3>) -> Result<Self> {
        if fj.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: fj.dim,
            });
        }
        let l = fj.l_low()?;
        let cfg = fj.f.config();
        let inv_f = fj.f.recip()?;
        let l_up: Vec<Jet> = (0..2)
            .map(|i| Ok(fj.y_coord(i, cfg.order_y, cfg.order_x)? * &inv_f))
            .collect::<Result<_>>()?;
        let mt = [l_up[1].clone(), -&l_up[0]];
        let mut rho = Jet::zero(g_inv[[0, 0]].config());
        for i in 0..2 {
            for j in 0..2 {
                rho += &(&g_inv[[i, j]] * &mt[i] * &mt[j]);
            }
        }
        if rho.value().abs() < 1e-14 {
            return Err(Error::DegenerateFrame(rho.value()));
        }
        let eps = rho.value().signum();
        let norm = rho.scale(eps).sqrt()?.recip()?;
        let m_low: Vec<Jet> = mt.iter().map(|v| v * &norm).collect();
        let m_up: Vec<Jet> = (0..2)
            .map(|i| &g_inv[[i, 0]] * &m_low[0] + &g_inv[[i, 1]] * &m_low[1])
            .collect();
        let mut cmmm = Jet::zero(c[[0, 0, 0]].config());
        for (idx, cv) in c.iter() {
            cmmm += &(cv * &m_up[idx[0]] * &m_up[idx[1]] * &m_up[idx[2]]);
        }
        let main_scalar = (&fj.f * &cmmm).scale(eps);
        Ok(FrameJets {
            l_low: l.as_slice().to_vec(),
            l_up,
            m_low,
            m_up,
            eps,
            main_scalar,
        })
    }

    pub fn values(&self) -> BerwaldFrame {
        let v = |js: &[Jet]| js.iter().map(Jet::value).collect::<Vec<f64>>();
        BerwaldFrame {
            l_low: v(&self.l_low),
            l_up: v(&self.l_up),
            m_low: v(&self.m_low),
            m_up: v(&self.m_up),
            eps: self.eps,
            main_scalar: self.main_scalar.value(),
        }
    }
}

pub fn metric_tensor<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    y: &[f64],
) -> Result<MetricTensor> {
    let fj = FiberJets::new(metric, x, y, 2, 0)?;
    MetricTensor::from_matrix(fj.g()?.values())
}

/// Cartan data from an existing fiber jet with `order_y >= 4`.
pub fn cartan_from(fj: &FiberJets, mt: &MetricTensor) -> Result<CartanData> {
    let g = fj.g()?;
    let cj = fj.cartan(&g)?;
    let c = cj.values();
    let c_dot = fj.cartan_dot(&cj)?.values();
    let c_up = mt.raise_first3(&c);
    Ok(CartanData { c, c_dot, c_up })
}

pub fn cartan<M: FinslerMetric + ?Sized>(metric: &M, x: &[f64], y: &[f64]) -> Result<CartanData> {
    let fj = FiberJets::new(metric, x, y, 4, 0)?;
    let mt = MetricTensor::from_matrix(fj.g()?.values())?;
    cartan_from(&fj, &mt)
}

/// `h_ij = g_ij - ℓ_i ℓ_j` with its raised variants.
pub fn angular_metric(mt: &MetricTensor, l_low: &[f64]) -> AngularMetric {
    let n = mt.dim();
    let h = Tensor::from_fn(n, |[i, j]| mt.g[[i, j]] - l_low[i] * l_low[j]);
    let h_mixed = Tensor::from_fn(n, |[i, j]| {
        (0..n).map(|a| mt.g_inv[[i, a]] * h[[a, j]]).sum()
    });
    let h_up = Tensor::from_fn(n, |[i, j]| {
        (0..n).map(|b| h_mixed[[i, b]] * mt.g_inv[[b, j]]).sum()
    });
    AngularMetric { h, h_mixed, h_up }
}

pub fn berwald_frame<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    y: &[f64],
) -> Result<BerwaldFrame> {
    if metric.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: metric.dim(),
        });
    }
    let fj = FiberJets::new(metric, x, y, 3, 0)?;
    let g = fj.g()?;
    let g_inv = invert_jets(&g)?;
    let c = fj.cartan(&g)?;
    Ok(FrameJets::new(&fj, &g_inv, &c)?.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Euclidean, Randers};
    use crate::params::XFunction;

    #[test]
    fn euclidean_energy_and_metric() {
        let m = Euclidean::new(2);
        let e = energy(&m, &[0.1, 0.2], &[3.0, 4.0], 2, 0).unwrap();
        assert!((e.value() - 12.5).abs() < 1e-14);
        let mt = metric_tensor(&m, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!(mt.g.max_abs_diff(&Matrix::from_vec(2, vec![1.0, 0.0, 0.0, 1.0])) < 1e-14);
        let ang = angular_metric(&mt, &[1.0, 0.0]);
        assert!(
            ang.h
                .max_abs_diff(&Matrix::from_vec(2, vec![0.0, 0.0, 0.0, 1.0]))
                < 1e-14
        );
    }

    #[test]
    fn randers_energy_and_contraction() {
        let m = Randers::new(2, XFunction::constant(0.3));
        let (x, y) = ([0.0, 0.0], [1.0, 0.0]);
        let e = energy(&m, &x, &y, 2, 0).unwrap();
        assert!((e.value() - 0.845).abs() < 1e-14);
        let mt = metric_tensor(&m, &x, &y).unwrap();
        let gyy: f64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| mt.g[[i, j]] * y[i] * y[j])
            .sum();
        assert!((gyy - 1.69).abs() < 1e-13);
        // hand-derived: g = ℓℓ + F·Hess|y| with ℓ = (1.3, 0), Hess|y| = diag(0, 1) at (1, 0)
        assert!(mt.g.max_abs_diff(&Matrix::from_vec(2, vec![1.69, 0.0, 0.0, 1.3])) < 1e-13);
    }

    #[test]
    fn linear_form_is_singular() {
        #[derive(Debug)]
        struct Linear;
        impl FinslerMetric for Linear {
            fn dim(&self) -> usize {
                2
            }
            fn label(&self) -> String {
                "linear".into()
            }
            fn domain_margin(&self, _x: &[f64], y: &[f64]) -> f64 {
                y[0] + 0.5 * y[1]
            }
            fn eval_jet(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet> {
                Ok(&y[0] + &y[1].scale(0.5))
            }
        }
        assert!(matches!(
            metric_tensor(&Linear, &[0.0, 0.0], &[1.0, 0.2]),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn euclidean_frame() {
        let f = berwald_frame(&Euclidean::new(2), &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(f.eps, 1.0);
        assert!((f.l_low[0] - 1.0).abs() < 1e-15 && f.l_low[1].abs() < 1e-15);
        assert!(f.m_low[0].abs() < 1e-15 && (f.m_low[1].abs() - 1.0).abs() < 1e-15);
        assert!(f.main_scalar.abs() < 1e-14);
    }

    #[test]
    fn domain_violation_reported() {
        let m = Randers::new(2, XFunction::constant(0.3));
        assert!(matches!(
            lift(&m, &[0.0, 0.0], &[0.0, 0.0], 1, 0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            lift(&m, &[0.0], &[1.0, 0.0], 1, 0),
            Err(Error::Dimension { .. })
        ));
    }
}
