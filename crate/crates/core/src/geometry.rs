//! Spray, Berwald and Landsberg tensors, horizontal derivatives of scalars,
//! and the f-form description of Finsler surfaces.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetConfig, Var};
use crate::metric::{invert_jets, CartanData, FiberJets, FinslerMetric, FrameJets, MetricTensor};
use crate::tensor::{Matrix, Tensor, Tensor3, Tensor4};

/// Spray coefficients and their successive `y`-derivatives at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayData {
    pub g: Vec<f64>,
    /// `G^i_j`, stored `[i, j]`.
    pub g_i_j: Matrix,
    /// `G^h_ij`, stored `[h, i, j]`.
    pub g_h_ij: Tensor3,
    /// Berwald curvature `G^h_ijk`, stored `[h, i, j, k]`.
    pub g_h_ijk: Option<Tensor4>,
}

/// `G^i = ½ g^{il}(y^k ∂_{x^k}∂̇_l E − ∂_{x^l} E)` as jets in `y` with
/// `order_y - 2` orders left and no `x` order.
pub fn spray_jets(fj: &FiberJets, g_inv: &Tensor<Jet, 2>) -> Result<Vec<Jet>> {
    if fj.order_x() < 1 || fj.order_y() < 2 {
        return Err(Error::InvalidParams(
            "spray needs jets with x-order 1 and y-order >= 2".into(),
        ));
    }
    let n = fj.dim;
    let oy = fj.order_y();
    let g_inv0 = g_inv.try_map(|j| j.truncate(j.config().order_y, 0))?;
    let ys: Vec<Jet> = (0..n)
        .map(|k| fj.y_coord(k, oy - 1, 0))
        .collect::<Result<_>>()?;
    let mut rhs = Vec::with_capacity(n);
    for l in 0..n {
        let dyl = fj.e.dy(l)?;
        let mut acc = -fj.e.dx(l)?;
        for (k, yk) in ys.iter().enumerate() {
            acc = acc + yk * &dyl.dx(k)?;
        }
        rhs.push(acc);
    }
    Ok((0..n)
        .map(|i| {
            let mut gi = Jet::zero(g_inv0[[i, 0]].config());
            for (l, r) in rhs.iter().enumerate() {
                gi += &(&g_inv0[[i, l]] * r);
            }
            gi.scale(0.5)
        })
        .collect())
}

pub fn spray_from_jets(gj: &[Jet], curvature: bool) -> Result<SprayData> {
    let n = gj.len();
    let d1: Vec<Vec<Jet>> = gj
        .iter()
        .map(|g| (0..n).map(|j| g.dy(j)).collect())
        .collect::<std::result::Result<_, _>>()?;
    let g_i_j = Tensor::from_fn(n, |[i, j]| d1[i][j].value());
    let d2 = Tensor::<Jet, 3>::try_from_fn(n, |[h, i, j]| d1[h][i].dy(j).map_err(Error::from))?;
    let g_h_ij = d2.values();
    let g_h_ijk = if curvature {
        Some(Tensor::try_from_fn(n, |[h, i, j, k]| {
            Ok::<f64, Error>(d2[[h, i, j]].dy(k)?.value())
        })?)
    } else {
        None
    };
    Ok(SprayData {
        g: gj.iter().map(Jet::value).collect(),
        g_i_j,
        g_h_ij,
        g_h_ijk,
    })
}

/// Spray data at a point; `curvature` additionally computes `G^h_ijk`.
pub fn spray<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    y: &[f64],
    curvature: bool,
) -> Result<SprayData> {
    let fj = FiberJets::new(metric, x, y, if curvature { 5 } else { 4 }, 1)?;
    let g_inv = invert_jets(&fj.g()?)?;
    spray_from_jets(&spray_jets(&fj, &g_inv)?, curvature)
}

/// `L_ijk = −½ F G^h_ijk ℓ_h`
pub fn landsberg_general(sd: &SprayData, f: f64, l_low: &[f64]) -> Result<Tensor3> {
    let b = sd.g_h_ijk.as_ref().ok_or_else(|| {
        Error::InvalidParams("Landsberg tensor needs the Berwald curvature".into())
    })?;
    let n = b.dim();
    Ok(Tensor::from_fn(n, |[i, j, k]| {
        -0.5 * f * (0..n).map(|h| b[[h, i, j, k]] * l_low[h]).sum::<f64>()
    }))
}

/// Horizontal gradient `L_{|i} = ∂_{x^i} L − G^j_i ∂̇_j L` of a jet scalar.
pub fn horizontal_gradient(l: &Jet, spray: &[Jet]) -> Result<Vec<Jet>> {
    let n = spray.len();
    let dl: Vec<Jet> = (0..n)
        .map(|j| l.dy(j))
        .collect::<std::result::Result<_, _>>()?;
    (0..n)
        .map(|i| {
            let mut acc = l.dx(i)?;
            for (j, dlj) in dl.iter().enumerate() {
                let gji = spray[j].dy(i)?;
                acc = acc - gji * dlj.truncate(dlj.config().order_y, 0)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Everything needed for the surface identities at one point, computed from
/// a single jet of `E` with `y`-order 5 and `x`-order 1.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub fj: FiberJets,
    pub g: Tensor<Jet, 2>,
    pub g_inv: Tensor<Jet, 2>,
    pub metric: MetricTensor,
    pub cartan: Tensor<Jet, 3>,
    pub spray: Vec<Jet>,
}

impl PointGeometry {
    pub fn new<M: FinslerMetric + ?Sized>(metric: &M, x: &[f64], y: &[f64]) -> Result<Self> {
        let fj = FiberJets::new(metric, x, y, 5, 1)?;
        let g = fj.g()?;
        let g_inv = invert_jets(&g)?;
        let metric = MetricTensor::from_matrix(g.values())?;
        let cartan = fj.cartan(&g)?;
        let spray = spray_jets(&fj, &g_inv)?;
        Ok(PointGeometry {
            fj,
            g,
            g_inv,
            metric,
            cartan,
            spray,
        })
    }

    pub fn dim(&self) -> usize {
        self.fj.dim
    }

    pub fn f(&self) -> f64 {
        self.fj.value()
    }

    pub fn l_low(&self) -> Result<Vec<f64>> {
        Ok(self.fj.l_low()?.values().as_slice().to_vec())
    }

    pub fn l_up(&self) -> Vec<f64> {
        self.fj.y.iter().map(|v| v / self.f()).collect()
    }

    pub fn spray_data(&self) -> Result<SprayData> {
        spray_from_jets(&self.spray, true)
    }

    pub fn cartan_data(&self) -> Result<CartanData> {
        let c = self.cartan.values();
        let c_dot = self.fj.cartan_dot(&self.cartan)?.values();
        let c_up = self.metric.raise_first3(&c);
        Ok(CartanData { c, c_dot, c_up })
    }

    pub fn landsberg(&self) -> Result<Tensor3> {
        landsberg_general(&self.spray_data()?, self.f(), &self.l_low()?)
    }

    pub fn frame(&self) -> Result<FrameJets> {
        FrameJets::new(&self.fj, &self.g_inv, &self.cartan)
    }

    /// Main scalar and its frame derivatives, all exact in jets.
    pub fn main_scalar_derivatives(&self) -> Result<MainScalarDerivatives> {
        let frame = self.frame()?;
        let fr = frame.values();
        let i_jet = &frame.main_scalar;
        let grad = horizontal_gradient(i_jet, &self.spray)?;
        let f = &self.fj.f;
        let eps = frame.eps;
        let ord = grad[0].config().order_y;
        let l_up: Vec<Jet> = frame
            .l_up
            .iter()
            .map(|j| j.truncate(ord.min(j.config().order_y), 0))
            .collect::<std::result::Result<_, _>>()?;
        let mut i1 = Jet::zero(grad[0].config());
        for (li, gi) in l_up.iter().zip(&grad) {
            i1 = i1 + li * gi;
        }
        let i2: f64 = eps * (0..2).map(|i| fr.m_up[i] * grad[i].value()).sum::<f64>();
        let vertical = |s: &Jet, along: &[f64]| -> Result<f64> {
            let mut acc = 0.0;
            for (i, a) in along.iter().enumerate() {
                acc += a * s.dy(i)?.value();
            }
            Ok(acc * f.value())
        };
        Ok(MainScalarDerivatives {
            i: fr.main_scalar,
            i_1: i1.value(),
            i_2: i2,
            i_v1: vertical(i_jet, &fr.l_up)?,
            i_v2: eps * vertical(i_jet, &fr.m_up)?,
            i_1_v2: eps * vertical(&i1, &fr.m_up)?,
            frame: fr,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MainScalarDerivatives {
    pub i: f64,
    /// `I_{,1}`
    pub i_1: f64,
    /// `I_{,2}`
    pub i_2: f64,
    /// `I_{;1}`, zero for a 0-homogeneous scalar.
    pub i_v1: f64,
    /// `I_{;2}`
    pub i_v2: f64,
    /// `I_{,1;2}`
    pub i_1_v2: f64,
    pub frame: crate::metric::BerwaldFrame,
}

/// Scalar frame components of the horizontal and vertical derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDerivatives {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub v1: f64,
    pub v2: f64,
}

/// Frame derivatives of a 0-homogeneous scalar `L(x, y)` on a surface.
/// `scalar` receives coordinate jets, like [`FinslerMetric::eval_jet`].
pub fn horizontal_scalar_derivatives<M, S>(
    metric: &M,
    scalar: S,
    x: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<ScalarDerivatives>
where
    M: FinslerMetric + ?Sized,
    S: Fn(&[Jet], &[Jet]) -> Result<Jet>,
{
    if metric.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: metric.dim(),
        });
    }
    let fj = FiberJets::new(metric, x, y, 3, 1)?;
    let g = fj.g()?;
    let g_inv = invert_jets(&g)?;
    let frame = FrameJets::new(&fj, &g_inv, &fj.cartan(&g)?)?.values();
    let spray = spray_jets(&fj, &g_inv)?;
    let config = JetConfig::fiber(2, 1, 1)?;
    let (xs, ys) = crate::metric::coordinate_jets(config, x, y)?;
    let l = scalar(&xs, &ys)?;
    let grad = horizontal_gradient(&l, &spray)?;
    let f = fj.value();
    let comp = |v: &[f64], w: &[f64]| v[0] * w[0] + v[1] * w[1];
    let dl: Vec<f64> = (0..2)
        .map(|i| Ok(l.dy(i)?.value()))
        .collect::<Result<_>>()?;
    let gv: Vec<f64> = grad.iter().map(Jet::value).collect();
    let v1 = f * comp(&frame.l_up, &dl);
    if v1.abs() > tol {
        return Err(Error::NotZeroHomogeneous(v1));
    }
    Ok(ScalarDerivatives {
        value: l.value(),
        d1: comp(&frame.l_up, &gv),
        d2: frame.eps * comp(&frame.m_up, &gv),
        v1,
        v2: frame.eps * f * comp(&frame.m_up, &dl),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFlags {
    pub is_landsberg: bool,
    pub is_berwald: bool,
    pub max_i1: f64,
    pub max_i2: f64,
    pub max_landsberg: f64,
    pub max_berwald: f64,
    /// Whether the tensor magnitudes agree with the scalar verdicts.
    pub consistent: bool,
}

/// Landsberg (`I_{,1} = 0`) and Berwald (`I_{,1} = I_{,2} = 0`) verdicts over samples.
pub fn surface_flags<M: FinslerMetric + ?Sized>(
    metric: &M,
    samples: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<SurfaceFlags> {
    let mut flags = SurfaceFlags {
        is_landsberg: true,
        is_berwald: true,
        max_i1: 0.0,
        max_i2: 0.0,
        max_landsberg: 0.0,
        max_berwald: 0.0,
        consistent: true,
    };
    for (x, y) in samples {
        let pg = PointGeometry::new(metric, x, y)?;
        let d = pg.main_scalar_derivatives()?;
        flags.max_i1 = flags.max_i1.max(d.i_1.abs());
        flags.max_i2 = flags.max_i2.max(d.i_2.abs());
        flags.max_landsberg = flags.max_landsberg.max(pg.landsberg()?.max_abs());
        let b = pg.spray_data()?.g_h_ijk.expect("curvature requested");
        flags.max_berwald = flags.max_berwald.max(pg.f() * b.max_abs());
    }
    flags.is_landsberg = flags.max_i1 < tol;
    flags.is_berwald = flags.is_landsberg && flags.max_i2 < tol;
    flags.consistent = flags.is_landsberg == (flags.max_landsberg < tol)
        && flags.is_berwald == (flags.max_berwald < tol);
    Ok(flags)
}

/// Values and first three `u`-derivatives of the spray factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprayFactors {
    pub f1: [f64; 4],
    pub f2: [f64; 4],
}

/// The description `F = |y¹| f(x, εu)` of a surface metric, `u = y²/y¹`,
/// on the branch `ε = sign y¹`, with `f(x, w) = F(x, ε, w)`.
#[derive(Debug, Clone, Copy)]
pub struct FForm<'a, M: ?Sized> {
    metric: &'a M,
    eps: f64,
}

impl<'a, M: FinslerMetric + ?Sized> FForm<'a, M> {
    pub fn new(metric: &'a M, eps: f64) -> Result<Self> {
        if metric.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: metric.dim(),
            });
        }
        if eps != 1.0 && eps != -1.0 {
            return Err(Error::InvalidParams(format!(
                "branch sign must be ±1, got {eps}"
            )));
        }
        Ok(FForm { metric, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Jet of `f` over `(x¹, x², w)` about `(x, w)`.
    pub fn f_jet(&self, x: &[f64], w: f64, order_u: usize, order_x: usize) -> Result<Jet> {
        let y = [self.eps, w];
        if !self.metric.in_domain(x, &y) {
            return Err(Error::Domain {
                label: self.metric.label(),
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        let config = JetConfig::new(2, 1, order_u, order_x)?;
        let xs = (0..2)
            .map(|i| Jet::variable(config, Var::X(i), x[i]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let ys = [
            Jet::constant(config, self.eps),
            Jet::variable(config, Var::Y(0), w)?,
        ];
        self.metric.eval_jet(&xs, &ys)
    }

    pub fn f(&self, x: &[f64], w: f64) -> Result<f64> {
        Ok(self.f_jet(x, w, 0, 0)?.value())
    }

    /// `|y¹| f(x, εu)`; only valid for `y` on this form's branch.
    pub fn reconstruct(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if y[0] * self.eps <= 0.0 {
            return Err(Error::DegenerateFForm(format!(
                "y = {y:?} is not on the branch eps = {}",
                self.eps
            )));
        }
        Ok(y[0].abs() * self.f(x, y[1] / y[0].abs())?)
    }

    /// `f₁`, `f₂` as jets in `u` (no `x` order) keeping `order_u` orders.
    pub fn spray_factor_jets(&self, x: &[f64], u: f64, order_u: usize) -> Result<(Jet, Jet)> {
        let f = self.f_jet(x, u, order_u + 2, 1)?;
        let fp = f.dy(0)?;
        let fpp = fp.dy(0)?;
        let f0 = f.truncate(order_u, 0)?;
        let fp0 = fp.truncate(order_u, 0)?;
        let d1 = f.dx(0)?;
        let d2 = f.dx(1)?;
        let d1p = fp.dx(0)?;
        let d2p = fp.dx(1)?;
        let uj = Jet::variable(f0.config(), Var::Y(0), u)?;
        let a = &d1 + &(&uj * &d2);
        let b = &d1p + &(&uj * &d2p) - &d2;
        if fpp.value().abs() < 1e-14 {
            return Err(Error::DegenerateFForm(format!(
                "f'' = {:e} at u = {u}",
                fpp.value()
            )));
        }
        let denom = (&f0 * &fpp).scale(2.0).recip()?;
        let f1 = (&a * &fpp - &b * &fp0) * &denom;
        let f2 = (&uj * &a * &fpp + &b * &(&f0 - &(&uj * &fp0))) * &denom;
        Ok((f1, f2))
    }

    pub fn spray_factors(&self, x: &[f64], u: f64) -> Result<SprayFactors> {
        let (f1, f2) = self.spray_factor_jets(x, u, 3)?;
        let d = |j: &Jet| -> Result<[f64; 4]> {
            let mut out = [0.0; 4];
            for (k, o) in out.iter_mut().enumerate() {
                *o = j.extract_derivative(&[0, 0, k])?;
            }
            Ok(out)
        };
        Ok(SprayFactors {
            f1: d(&f1)?,
            f2: d(&f2)?,
        })
    }

    /// `(f, f′, f″)` at `(x, u)`.
    pub fn f_derivs(&self, x: &[f64], u: f64) -> Result<[f64; 3]> {
        let f = self.f_jet(x, u, 2, 0)?;
        Ok([
            f.value(),
            f.extract_derivative(&[0, 0, 1])?,
            f.extract_derivative(&[0, 0, 2])?,
        ])
    }

    /// Spray from the f-form: `G¹ = f₁ (y¹)²`, `G² = f₂ (y¹)²`.
    pub fn spray_values(&self, x: &[f64], y: &[f64]) -> Result<[f64; 2]> {
        let u = y[1] / y[0];
        let sf = self.spray_factors(x, u)?;
        Ok([sf.f1[0] * y[0] * y[0], sf.f2[0] * y[0] * y[0]])
    }
}

/// Landsberg components from the f-form (branch `ε = +1`), with the sign
/// pattern `L₁₁₁ : L₁₁₂ : L₁₂₂ : L₂₂₂ = u³ : −u² : u : −1`.
pub fn landsberg_surface<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    x: &[f64],
    y: &[f64],
) -> Result<Tensor3> {
    if y[0] == 0.0 {
        return Err(Error::DegenerateFForm("y¹ = 0".into()));
    }
    let u = y[1] / y[0];
    let (res, _) = landsberg_pde_residual(ff, x, u)?;
    let [f, _, _] = ff.f_derivs(x, u)?;
    let half = 0.5 * f * res;
    let l111 = u * u * u * half;
    let l112 = -u * u * half;
    let l122 = u * half;
    let l222 = -half;
    Ok(Tensor::from_fn(2, |idx| {
        match idx.iter().filter(|&&i| i == 1).count() {
            0 => l111,
            1 => l112,
            2 => l122,
            _ => l222,
        }
    }))
}

/// Landsberg PDE residual `f₁‴ℓ₁ + f₂‴ℓ₂` and its factored form
/// `ε(f − uf′)(f₁‴ + Q f₂‴)`.
pub fn landsberg_pde_residual<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    x: &[f64],
    u: f64,
) -> Result<(f64, f64)> {
    let sf = ff.spray_factors(x, u)?;
    let [f, fp, _] = ff.f_derivs(x, u)?;
    let eps = ff.eps();
    let l1 = eps * (f - u * fp);
    let l2 = eps * fp;
    let residual = sf.f1[3] * l1 + sf.f2[3] * l2;
    let q = fp / (f - u * fp);
    let factored = eps * (f - u * fp) * (sf.f1[3] + q * sf.f2[3]);
    Ok((residual, factored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Euclidean, QuadraticForm, Randers};
    use crate::params::XFunction;

    fn randers_x() -> Randers {
        Randers::new(
            2,
            XFunction::poly(&[(0.3, &[]), (0.1, &[1]), (0.05, &[0, 1])]),
        )
    }

    #[test]
    fn minkowski_spray_vanishes() {
        let m = Randers::new(2, XFunction::constant(0.3));
        let sd = spray(&m, &[0.3, 0.1], &[1.0, 0.4], true).unwrap();
        assert!(sd.g.iter().all(|v| v.abs() < 1e-14));
        assert!(sd.g_h_ijk.unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn spray_homogeneity_and_euler() {
        let m = randers_x();
        let (x, y) = ([0.2, -0.1], [1.0, 0.4]);
        let sd = spray(&m, &x, &y, true).unwrap();
        for i in 0..2 {
            let e: f64 = (0..2).map(|j| sd.g_i_j[[i, j]] * y[j]).sum();
            assert!((e - 2.0 * sd.g[i]).abs() < 1e-12);
            for h in 0..2 {
                let e2: f64 = (0..2).map(|j| sd.g_h_ij[[h, i, j]] * y[j]).sum();
                assert!((e2 - sd.g_i_j[[h, i]]).abs() < 1e-12);
            }
        }
        let sd2 = spray(&m, &x, &[2.0, 0.8], false).unwrap();
        for i in 0..2 {
            assert!((sd2.g[i] - 4.0 * sd.g[i]).abs() < 1e-12);
        }
        assert!(sd.g_h_ijk.unwrap().symmetry_defect_from(1) < 1e-12);
    }

    #[test]
    fn riemannian_spray_matches_christoffel() {
        // a = diag(1 + x1^2, 1): G^i = ½ Γ^i_jk y^j y^k
        let q = QuadraticForm::new(
            2,
            vec![
                XFunction::poly(&[(1.0, &[]), (1.0, &[2])]),
                XFunction::constant(0.0),
                XFunction::constant(1.0),
            ],
        )
        .unwrap();
        let (x, y) = ([0.5, 0.0], [0.3, 0.7]);
        let sd = spray(&q, &x, &y, true).unwrap();
        let a11 = 1.0 + x[0] * x[0];
        let g111 = 0.5 * 2.0 * x[0] / a11;
        assert!((sd.g[0] - 0.5 * g111 * y[0] * y[0]).abs() < 1e-14);
        assert!(sd.g[1].abs() < 1e-14);
        assert!(sd.g_h_ijk.unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn landsberg_paths_agree() {
        let m = randers_x();
        let ff = FForm::new(&m, 1.0).unwrap();
        for (x, y) in [([0.2, -0.1], [1.0, 0.4]), ([-0.3, 0.5], [0.7, -1.1])] {
            let pg = PointGeometry::new(&m, &x, &y).unwrap();
            let lg = pg.landsberg().unwrap();
            let ls = landsberg_surface(&ff, &x, &y).unwrap();
            assert!(lg.max_abs() > 1e-4);
            assert!(lg.max_abs_diff(&ls) < 1e-10, "{lg:?} vs {ls:?}");
            assert!(lg.symmetry_defect() < 1e-12);
        }
    }

    #[test]
    fn f_form_of_randers() {
        let m = Randers::new(2, XFunction::constant(0.3));
        let ff = FForm::new(&m, 1.0).unwrap();
        let u = 0.7;
        assert!((ff.f(&[0.0, 0.0], u).unwrap() - ((1.0 + u * u).sqrt() + 0.3)).abs() < 1e-15);
        let sf = ff.spray_factors(&[0.0, 0.0], u).unwrap();
        assert!(sf.f1.iter().chain(&sf.f2).all(|v| v.abs() < 1e-14));
        let back = FForm::new(&m, -1.0).unwrap();
        let y = [-1.5, 0.6];
        assert!(
            (back.reconstruct(&[0.0, 0.0], &y).unwrap() - m.eval(&[0.0, 0.0], &y).unwrap()).abs()
                < 1e-14
        );
    }

    #[test]
    fn f_form_spray_matches_general() {
        let m = randers_x();
        let ff = FForm::new(&m, 1.0).unwrap();
        let (x, y) = ([0.2, -0.1], [1.3, 0.4]);
        let general = spray(&m, &x, &y, false).unwrap().g;
        let from_f = ff.spray_values(&x, &y).unwrap();
        for i in 0..2 {
            assert!((general[i] - from_f[i]).abs() < 1e-12 * general[i].abs().max(1.0));
        }
        let (res, fac) = landsberg_pde_residual(&ff, &x, 0.4 / 1.3).unwrap();
        assert!((res - fac).abs() < 1e-12);
    }

    #[test]
    fn horizontal_derivatives_of_point_functions() {
        let m = randers_x();
        let (x, y) = ([0.2, -0.1], [1.0, 0.4]);
        let c = horizontal_scalar_derivatives(
            &m,
            |xs, _| Ok(Jet::constant(xs[0].config(), 2.5)),
            &x,
            &y,
            1e-9,
        )
        .unwrap();
        assert_eq!((c.d1, c.d2, c.v2), (0.0, 0.0, 0.0));
        let s =
            horizontal_scalar_derivatives(&m, |xs, _| Ok(&xs[0] * &xs[1]), &x, &y, 1e-9).unwrap();
        assert_eq!(s.v2, 0.0);
        assert!(s.d1.abs() > 0.0);
        let bad = horizontal_scalar_derivatives(&m, |_, ys| Ok(ys[0].clone()), &x, &y, 1e-9);
        assert!(matches!(bad, Err(Error::NotZeroHomogeneous(_))));
    }

    #[test]
    fn euclidean_is_berwald() {
        let samples = vec![
            (vec![0.1, 0.2], vec![1.0, 0.3]),
            (vec![-0.4, 0.0], vec![0.2, -1.0]),
        ];
        let flags = surface_flags(&Euclidean::new(2), &samples, 1e-9).unwrap();
        assert!(flags.is_berwald && flags.is_landsberg && flags.consistent);
        let mink = Randers::new(2, XFunction::constant(0.3));
        let flags = surface_flags(&mink, &samples, 1e-9).unwrap();
        assert!(flags.is_berwald);
        let pg = PointGeometry::new(&mink, &samples[0].0, &samples[0].1).unwrap();
        assert!(pg.main_scalar_derivatives().unwrap().i.abs() > 1e-3);
    }
}
