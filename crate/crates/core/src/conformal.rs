//! Conformal changes `F̄ = e^{σ(x)} F` and the transformation laws of the
//! Landsberg and Berwald tensors.

use crate::conditions::{raise_cartan, t_formula, t_tensor, TTensor};
use crate::error::{Error, Result};
use crate::geometry::{spray, FForm, PointGeometry};
use crate::jet::{Jet, Var};
use crate::metric::{invert_jets, FiberJets, FinslerMetric};
use crate::params::XFunction;
use crate::stats::ResidualStats;
use crate::surface_class::{q_from_f, q_jet};
use crate::tensor::{Matrix, Tensor, Tensor3, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    pub label: String,
    pub sigma: XFunction,
}

impl ConformalFactor {
    pub fn new(label: impl Into<String>, sigma: XFunction) -> Self {
        ConformalFactor {
            label: label.into(),
            sigma,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.sigma.eval(x)
    }

    /// `σ_r = ∂σ/∂x^r`
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.sigma.gradient(x)
    }

    pub fn is_homothety(&self) -> bool {
        self.sigma.is_constant()
    }

    /// `{0, ln 2, x¹, x¹ + x², (x¹)²/2}`
    pub fn battery() -> Vec<ConformalFactor> {
        vec![
            ConformalFactor::new("0", XFunction::constant(0.0)),
            ConformalFactor::new("ln2", XFunction::constant(std::f64::consts::LN_2)),
            ConformalFactor::new("x1", XFunction::poly(&[(1.0, &[1])])),
            ConformalFactor::new("x1+x2", XFunction::poly(&[(1.0, &[1]), (1.0, &[0, 1])])),
            ConformalFactor::new("x1^2/2", XFunction::poly(&[(0.5, &[2])])),
        ]
    }
}

/// `F̄ = e^{σ(x)} F`, on the same conic domain.
#[derive(Debug, Clone)]
pub struct ConformalMetric<M> {
    pub base: M,
    pub factor: ConformalFactor,
}

pub fn conformal_scale<M: FinslerMetric>(base: M, factor: ConformalFactor) -> ConformalMetric<M> {
    ConformalMetric { base, factor }
}

impl<M: FinslerMetric> FinslerMetric for ConformalMetric<M> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn label(&self) -> String {
        format!("{} [sigma={}]", self.base.label(), self.factor.label)
    }
    fn domain_margin(&self, x: &[f64], y: &[f64]) -> f64 {
        self.base.domain_margin(x, y)
    }
    fn in_domain(&self, x: &[f64], y: &[f64]) -> bool {
        self.base.in_domain(x, y)
    }
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(self.factor.sigma.eval_jet(x).exp() * self.base.eval_jet(x, y)?)
    }
}

/// `max |L̄_jkh − e^{2σ}L_jkh − e^{2σ}F σ_r T^r_jkh|` at one point.
pub fn landsberg_law_residual<M: FinslerMetric>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let bar = conformal_scale(metric, cf.clone());
    let l_bar = PointGeometry::new(&bar, x, y)?.landsberg()?;
    let pg = PointGeometry::new(metric, x, y)?;
    let tt = TTensor::new(pg.f(), &pg.l_low()?, &pg.metric, &pg.cartan_data()?);
    landsberg_law_residual_from(pg.f(), &pg.landsberg()?, &tt, &l_bar, cf, x)
}

/// `max |L̄ − e^{2σ}L − e^{2σ}F σ_r T^r|` from precomputed base data, so the
/// base geometry can be shared across factors.
pub fn landsberg_law_residual_from(
    f: f64,
    l: &Tensor3,
    tt: &TTensor,
    l_bar: &Tensor3,
    cf: &ConformalFactor,
    x: &[f64],
) -> Result<f64> {
    let s = cf.grad(x);
    let e2s = (2.0 * cf.value(x)).exp();
    let n = l.dim();
    let mut worst = 0.0f64;
    for (idx, &lb) in l_bar.iter() {
        let [j, k, h] = idx;
        let st: f64 = (0..n).map(|r| s[r] * tt.t_up[[r, j, k, h]]).sum();
        worst = worst.max((lb - e2s * l[idx] - e2s * f * st).abs());
    }
    Ok(worst)
}

pub fn verify_landsberg_law<M: FinslerMetric>(
    metric: &M,
    cf: &ConformalFactor,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<ResidualStats> {
    let mut stats = ResidualStats::default();
    for (i, (x, y)) in samples.iter().enumerate() {
        stats.push(i, landsberg_law_residual(metric, cf, x, y)?);
    }
    Ok(stats)
}

/// How `∂̇_h T^{ri}_{jk}` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    /// Exact, from `F` lifted to y-order 5.
    #[default]
    Jet,
    /// Central differences of `T^{ri}_{jk}` at relative step `1e-5`.
    FiniteDifference,
}

/// Pointwise data entering the Berwald-tensor transformation law. It does
/// not depend on σ, so one value serves a whole battery of factors.
pub struct BData {
    f: f64,
    l: Vec<f64>,
    lu: Vec<f64>,
    g: Matrix,
    gi: Matrix,
    c: Tensor3,
    cup1: Tensor3,
    cup2: Tensor3,
    t_up1: Tensor4,
    t_up2: Tensor4,
    /// `∂̇_h T^{ri}_{jk}` stored `[r, i, j, k, h]`.
    dt_up2: Tensor<f64, 5>,
}

fn raise_two(gi: &Matrix, t: &Tensor4) -> Tensor4 {
    let n = gi.dim();
    Tensor::from_fn(n, |[r, i, j, k]| {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += gi[[r, a]] * gi[[i, b]] * t[[a, b, j, k]];
            }
        }
        acc
    })
}

impl BData {
    pub fn new<M: FinslerMetric + ?Sized>(
        metric: &M,
        x: &[f64],
        y: &[f64],
        method: DerivativeMethod,
    ) -> Result<Self> {
        let n = metric.dim();
        let fj = FiberJets::new(metric, x, y, 5, 0)?;
        let g = fj.g()?;
        let gi = invert_jets(&g)?;
        let c = fj.cartan(&g)?;
        let (gv, giv, cv) = (g.values(), gi.values(), c.values());
        let f = fj.value();
        let l = fj.l_low()?;
        let cup1 = raise_cartan(&giv, &cv);
        let cup2 = Tensor::from_fn(n, |[s, r, k]| {
            (0..n).map(|b| giv[[r, b]] * cup1[[s, b, k]]).sum()
        });
        let (t_low, dt_up2) = match method {
            DerivativeMethod::Jet => {
                let cd = fj.cartan_dot(&c)?;
                let c_up = raise_cartan(&gi, &c);
                let t = t_formula(&fj.f, l.as_slice(), &c, &c_up, &cd);
                let t_up2 = Tensor::from_fn(n, |[r, i, j, k]| {
                    let mut acc = Jet::zero(t[[0, 0, 0, 0]].config());
                    for a in 0..n {
                        for b in 0..n {
                            acc += &(&gi[[r, a]] * &gi[[i, b]] * &t[[a, b, j, k]]);
                        }
                    }
                    acc
                });
                let dt = Tensor::try_from_fn(n, |[r, i, j, k, h]| {
                    t_up2[[r, i, j, k]].dy(h).map(|d| d.value())
                })?;
                (t.values(), dt)
            }
            DerivativeMethod::FiniteDifference => {
                let cd = fj.cartan_dot(&c)?.values();
                let t = t_formula(&f, l.values().as_slice(), &cv, &cup1, &cd);
                let step = 1e-5 * y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
                let shifted = |h: usize, sign: f64| -> Result<Tensor4> {
                    let mut ys = y.to_vec();
                    ys[h] += sign * step;
                    Ok(t_tensor(metric, x, &ys)?.t_up2)
                };
                let mut dt = Tensor::<f64, 5>::from_fn(n, |_| 0.0);
                for h in 0..n {
                    let (p, m) = (shifted(h, 1.0)?, shifted(h, -1.0)?);
                    for (idx, v) in p.iter() {
                        let [r, i, j, k] = idx;
                        dt[[r, i, j, k, h]] = (v - m[idx]) / (2.0 * step);
                    }
                }
                (t, dt)
            }
        };
        let t_up1 = Tensor::from_fn(n, |[r, j, k, h]| {
            (0..n).map(|a| giv[[r, a]] * t_low[[a, j, k, h]]).sum()
        });
        let t_up2 = raise_two(&giv, &t_low);
        let lu = y.iter().map(|v| v / f).collect();
        Ok(BData {
            f,
            l: l.values().as_slice().to_vec(),
            lu,
            g: gv,
            gi: giv,
            c: cv,
            cup1,
            cup2,
            t_up1,
            t_up2,
            dt_up2,
        })
    }
}

/// The five groups of the Berwald-tensor transformation law, each stored
/// `[i, j, k, h]` for `B^i_jkh`: the `F σ_r ∂̇_h T^{ri}_{jk}` term, the
/// ℓ-weighted T terms, the C·T products, the angular-metric group and the
/// `F² σ_r (C·S)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct BTensorGroups {
    pub groups: [Tensor4; 5],
}

impl BTensorGroups {
    pub fn total(&self) -> Tensor4 {
        let mut acc = self.groups[0].clone();
        for g in &self.groups[1..] {
            acc = &acc + g;
        }
        acc
    }
}

pub fn b_tensor_groups<M: FinslerMetric + ?Sized>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    y: &[f64],
    method: DerivativeMethod,
) -> Result<BTensorGroups> {
    let d = BData::new(metric, x, y, method)?;
    Ok(d.groups(&cf.grad(x)))
}

impl BData {
    /// The five groups for the gradient `s = σ_r`.
    pub fn groups(&self, s: &[f64]) -> BTensorGroups {
        let d = self;
        let n = d.l.len();
        let f = d.f;
        let h = Tensor::from_fn(n, |[a, b]| d.g[[a, b]] - d.l[a] * d.l[b]);
        let h_mixed = Tensor::from_fn(n, |[i, b]| {
            (0..n).map(|a| d.gi[[i, a]] * h[[a, b]]).sum::<f64>()
        });
        let h_up = Tensor::from_fn(n, |[i, r]| {
            (0..n).map(|b| h_mixed[[i, b]] * d.gi[[b, r]]).sum::<f64>()
        });
        // S_abcd = C^r_ad C_brc − C^r_ac C_brd
        let s_low: Tensor4 = Tensor::from_fn(n, |[a, b, c, e]| {
            (0..n)
                .map(|r| d.cup1[[r, a, e]] * d.c[[b, r, c]] - d.cup1[[r, a, c]] * d.c[[b, r, e]])
                .sum()
        });
        // S_t^{ir}_k and S_{tj}^r_k
        let wu: Tensor4 = Tensor::from_fn(n, |[t, i, r, k]| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += d.gi[[i, a]] * d.gi[[r, b]] * s_low[[t, a, b, k]];
                }
            }
            acc
        });
        let wr: Tensor4 = Tensor::from_fn(n, |[t, j, r, k]| {
            (0..n).map(|b| d.gi[[r, b]] * s_low[[t, j, b, k]]).sum()
        });
        let sum_r = |term: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(|r| s[r] * term(r)).sum() };
        let sum2 = |term: &dyn Fn(usize, usize) -> f64| -> f64 {
            let mut acc = 0.0;
            for r in 0..n {
                for t in 0..n {
                    acc += s[r] * term(r, t);
                }
            }
            acc
        };
        let (tu1, tu2, cu1, cu2, l, lu) = (&d.t_up1, &d.t_up2, &d.cup1, &d.cup2, &d.l, &d.lu);
        let g1 = Tensor::from_fn(n, |[i, j, k, hh]| {
            f * sum_r(&|r| d.dt_up2[[r, i, j, k, hh]])
        });
        let g2 = Tensor::from_fn(n, |[i, j, k, hh]| {
            sum_r(&|r| {
                tu2[[r, i, j, hh]] * l[k] + tu2[[r, i, k, hh]] * l[j] + tu2[[r, i, j, k]] * l[hh]
                    - tu1[[r, j, k, hh]] * lu[i]
                    - tu1[[i, j, k, hh]] * lu[r]
            })
        });
        let g3 = Tensor::from_fn(n, |[i, j, k, hh]| {
            -f * sum2(&|r, t| {
                tu1[[i, t, j, hh]] * cu2[[t, r, k]]
                    + tu1[[r, t, k, hh]] * cu2[[t, i, j]]
                    + tu1[[r, t, j, hh]] * cu2[[t, i, k]]
                    + tu1[[i, t, k, hh]] * cu2[[t, r, j]]
                    - tu2[[r, i, t, hh]] * cu1[[t, j, k]]
                    - tu1[[t, j, k, hh]] * cu2[[r, i, t]]
            })
        });
        let g4 = Tensor::from_fn(n, |[i, j, k, hh]| {
            sum_r(&|r| {
                cu2[[r, i, j]] * h[[k, hh]]
                    + cu2[[r, i, k]] * h[[j, hh]]
                    + 2.0 * cu2[[i, r, hh]] * h[[j, k]]
                    - cu1[[r, j, k]] * h_mixed[[i, hh]]
                    - cu1[[i, j, k]] * h_mixed[[r, hh]]
                    - 2.0 * d.c[[j, k, hh]] * h_up[[i, r]]
            })
        });
        let g5 = Tensor::from_fn(n, |[i, j, k, hh]| {
            f * f
                * sum2(&|r, t| {
                    cu1[[t, hh, j]] * wu[[t, i, r, k]]
                        + cu1[[t, hh, k]] * wu[[t, r, i, j]]
                        + cu2[[t, i, hh]] * wr[[t, j, r, k]]
                        + cu2[[t, r, hh]] * wr[[t, k, i, j]]
                        + cu2[[t, i, j]] * wr[[t, hh, r, k]]
                        + cu2[[t, r, k]] * wr[[t, hh, i, j]]
                })
        });
        BTensorGroups {
            groups: [g1, g2, g3, g4, g5],
        }
    }
}

/// `B^i_jkh` stored `[i, j, k, h]`.
pub fn b_tensor<M: FinslerMetric + ?Sized>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    y: &[f64],
    method: DerivativeMethod,
) -> Result<Tensor4> {
    Ok(b_tensor_groups(metric, cf, x, y, method)?.total())
}

/// `Ḡ^i_jkh − G^i_jkh` from two independent spray computations.
pub fn berwald_difference<M: FinslerMetric>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    y: &[f64],
) -> Result<Tensor4> {
    let bar = conformal_scale(metric, cf.clone());
    let gb = spray(&bar, x, y, true)?
        .g_h_ijk
        .expect("curvature requested");
    let g = spray(metric, x, y, true)?
        .g_h_ijk
        .expect("curvature requested");
    Ok(&gb - &g)
}

/// `B^i_jkh = −σ_r ∂̇_j ∂̇_k ∂̇_h (E g^{ir})`, from the exact spray law
/// `Ḡ^i = G^i + σ_r y^r y^i − E σ^i`.
pub fn b_tensor_oracle<M: FinslerMetric + ?Sized>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    y: &[f64],
) -> Result<Tensor4> {
    let n = metric.dim();
    let fj = FiberJets::new(metric, x, y, 5, 0)?;
    let gi = invert_jets(&fj.g()?)?;
    let s = cf.grad(x);
    let v: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = Jet::zero(gi[[0, 0]].config());
            for (r, sr) in s.iter().enumerate() {
                acc += &(&gi[[i, r]] * &fj.e).scale(-sr);
            }
            acc
        })
        .collect();
    Tensor::try_from_fn(n, |[i, j, k, h]| Ok(v[i].dy(j)?.dy(k)?.dy(h)?.value()))
}

/// Spray factors of `e^σ F` from those of `F` via `Q`, as jets in `u`.
pub fn surface_conformal_f12<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    cf: &ConformalFactor,
    x: &[f64],
    u: f64,
) -> Result<(Jet, Jet)> {
    let (f1, f2) = ff.spray_factor_jets(x, u, 3)?;
    let cfg = f1.config();
    let q4 = q_jet(ff, x, u, 4)?;
    let q1 = q4.dy(0)?;
    if q1.value().abs() < 1e-12 {
        return Err(Error::DegenerateFForm(format!(
            "Q′ = {:e} at u = {u}",
            q1.value()
        )));
    }
    let q = q4.truncate(cfg.order_y, cfg.order_x)?;
    let s = cf.grad(x);
    let uj = Jet::variable(cfg, Var::Y(0), u)?;
    let half = (uj.scale(s[1]) + s[0]).scale(0.5);
    let q_over = q.div(&q1)?;
    let f1b = &(&f1 + &half) + &(q_over.scale(0.5 * s[1]) - (&q * &q_over).scale(0.5 * s[0]));
    let f2b = &(&f2 + &(&uj * &half)) + &(q_over.scale(0.5 * s[0]) - q1.recip()?.scale(0.5 * s[1]));
    Ok((f1b, f2b))
}

/// Both sides of the conformal law for `f₁‴ + Q f₂‴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLawCheck {
    /// `f̄₁‴ + Q f̄₂‴ − f₁‴ − Q f₂‴`, with `f̄` from the scaled metric directly.
    pub lhs: f64,
    /// `(2σ₁QQ′Q‴ − 3σ₁QQ″² − 2σ₂Q′Q‴ + 3σ₂Q″²)/(2Q′²)`
    pub rhs: f64,
    pub q1: f64,
}

impl QLawCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn q_law_check<M: FinslerMetric>(
    metric: &M,
    cf: &ConformalFactor,
    x: &[f64],
    u: f64,
) -> Result<QLawCheck> {
    let ff = FForm::new(metric, 1.0)?;
    let bar = conformal_scale(metric, cf.clone());
    let ffb = FForm::new(&bar, 1.0)?;
    let sf = ff.spray_factors(x, u)?;
    let sfb = ffb.spray_factors(x, u)?;
    let qp = q_from_f(&ff, x, u)?;
    let s = cf.grad(x);
    let lhs = sfb.f1[3] + qp.q * sfb.f2[3] - sf.f1[3] - qp.q * sf.f2[3];
    let rhs = (2.0 * s[0] * qp.q * qp.q1 * qp.q3
        - 3.0 * s[0] * qp.q * qp.q2 * qp.q2
        - 2.0 * s[1] * qp.q1 * qp.q3
        + 3.0 * s[1] * qp.q2 * qp.q2)
        / (2.0 * qp.q1 * qp.q1);
    Ok(QLawCheck {
        lhs,
        rhs,
        q1: qp.q1,
    })
}
