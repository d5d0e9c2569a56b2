//! The T-tensor, the v-curvature, and the T- and σT-conditions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::PointGeometry;
use crate::metric::{CartanData, FiberJets, FinslerMetric, MetricTensor};
use crate::tensor::{Ring, Tensor, Tensor3, Tensor4};

/// `C^h_ij = g^{hr} C_rij`
pub fn raise_cartan<S: Ring>(g_inv: &Tensor<S, 2>, c: &Tensor<S, 3>) -> Tensor<S, 3> {
    let n = c.dim();
    Tensor::from_fn(n, |[h, i, j]| {
        let mut acc = g_inv[[h, 0]].clone() * c[[0, i, j]].clone();
        for r in 1..n {
            acc = acc + g_inv[[h, r]].clone() * c[[r, i, j]].clone();
        }
        acc
    })
}

/// `T_hijk` from `F`, `ℓ`, the Cartan tensor and its derivative.
pub fn t_formula<S: Ring>(
    f: &S,
    l: &[S],
    c: &Tensor<S, 3>,
    c_up: &Tensor<S, 3>,
    c_dot: &Tensor<S, 4>,
) -> Tensor<S, 4> {
    let n = c.dim();
    let contract = |a: [usize; 2], b: [usize; 2]| {
        // C_{r a0 a1} C^r_{b0 b1}
        let mut acc = c[[0, a[0], a[1]]].clone() * c_up[[0, b[0], b[1]]].clone();
        for r in 1..n {
            acc = acc + c[[r, a[0], a[1]]].clone() * c_up[[r, b[0], b[1]]].clone();
        }
        acc
    };
    Tensor::from_fn(n, |[h, i, j, k]| {
        let quad = contract([i, j], [h, k]) + contract([j, h], [i, k]) + contract([i, h], [j, k]);
        f.clone() * (c_dot[[h, i, j, k]].clone() - quad)
            + c[[h, i, j]].clone() * l[k].clone()
            + c[[h, i, k]].clone() * l[j].clone()
            + c[[h, j, k]].clone() * l[i].clone()
            + c[[i, j, k]].clone() * l[h].clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTensor {
    /// `T_hijk`
    pub t: Tensor4,
    /// `T^h_ijk`, stored `[h, i, j, k]`.
    pub t_up: Tensor4,
    /// `T^{ri}_jk`, stored `[r, i, j, k]`.
    pub t_up2: Tensor4,
}

impl TTensor {
    pub fn new(f: f64, l_low: &[f64], mt: &MetricTensor, cd: &CartanData) -> Self {
        let t = t_formula(&f, l_low, &cd.c, &cd.c_up, &cd.c_dot);
        let t_up = mt.raise_first4(&t);
        let n = mt.dim();
        let t_up2 = Tensor::from_fn(n, |[r, i, j, k]| {
            (0..n).map(|b| mt.g_inv[[i, b]] * t_up[[r, b, j, k]]).sum()
        });
        TTensor { t, t_up, t_up2 }
    }
}

/// T-tensor at a point.
pub fn t_tensor<M: FinslerMetric + ?Sized>(metric: &M, x: &[f64], y: &[f64]) -> Result<TTensor> {
    let fj = FiberJets::new(metric, x, y, 4, 0)?;
    let mt = MetricTensor::from_matrix(fj.g()?.values())?;
    let cd = crate::metric::cartan_from(&fj, &mt)?;
    let l = fj.l_low()?.values();
    Ok(TTensor::new(fj.value(), l.as_slice(), &mt, &cd))
}

/// Scale for T-residuals: `max|ℓ_i| (max|C^h_ij| + 1/|y|)`, which has the
/// same homogeneity in `y` and under `F → λF` as `T^h_ijk`.
pub fn t_scale(l_low: &[f64], c_up: &Tensor3, y: &[f64]) -> f64 {
    let lmax = l_low.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    lmax * (c_up.max_abs() + 1.0 / ynorm)
}

/// `S_abcd = C^r_ad C_brc − C^r_ac C_brd`, the fully lowered v-curvature.
/// `S^h_ijk = C^r_ik C^h_rj − C^r_ij C^h_rk` is `S_abcd` with `b = h` raised and `a = i`.
pub fn v_curvature_lowered(cd: &CartanData) -> Tensor4 {
    let n = cd.c.dim();
    Tensor::from_fn(n, |[a, b, c, d]| {
        (0..n)
            .map(|r| cd.c_up[[r, a, d]] * cd.c[[b, r, c]] - cd.c_up[[r, a, c]] * cd.c[[b, r, d]])
            .sum()
    })
}

/// `S^h_ijk = C^r_ik C^h_rj − C^r_ij C^h_rk`, stored `[h, i, j, k]`.
pub fn v_curvature(cd: &CartanData) -> Tensor4 {
    let n = cd.c.dim();
    Tensor::from_fn(n, |[h, i, j, k]| {
        (0..n)
            .map(|r| {
                cd.c_up[[r, i, k]] * cd.c_up[[h, r, j]] - cd.c_up[[r, i, j]] * cd.c_up[[h, r, k]]
            })
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TConditionReport {
    pub passed: bool,
    pub tol: f64,
    pub max_raw: f64,
    pub max_normalized: f64,
    pub mean_normalized: f64,
    /// Sample index of the largest normalized residual.
    pub worst_sample: usize,
}

pub fn check_t_condition<M: FinslerMetric + ?Sized>(
    metric: &M,
    samples: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<TConditionReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples(
            "T-condition check needs at least one sample".into(),
        ));
    }
    let mut rep = TConditionReport {
        passed: true,
        tol,
        max_raw: 0.0,
        max_normalized: 0.0,
        mean_normalized: 0.0,
        worst_sample: 0,
    };
    for (s, (x, y)) in samples.iter().enumerate() {
        let fj = FiberJets::new(metric, x, y, 4, 0)?;
        let mt = MetricTensor::from_matrix(fj.g()?.values())?;
        let cd = crate::metric::cartan_from(&fj, &mt)?;
        let l = fj.l_low()?.values();
        let tt = TTensor::new(fj.value(), l.as_slice(), &mt, &cd);
        let raw = tt.t_up.max_abs();
        let norm = raw / t_scale(l.as_slice(), &cd.c_up, y);
        rep.max_raw = rep.max_raw.max(raw);
        rep.mean_normalized += norm / samples.len() as f64;
        if norm > rep.max_normalized {
            rep.max_normalized = norm;
            rep.worst_sample = s;
        }
    }
    rep.passed = rep.max_normalized < tol;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[allow(non_camel_case_types)]
pub enum SigmaTVerdict {
    T_CONDITION,
    SIGMA_T_ONLY,
    NEITHER,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTReport {
    pub kernel_dim: usize,
    pub verdict: SigmaTVerdict,
    pub witness: Option<Vec<f64>>,
    /// Singular values of the normalized constraint stack, descending.
    pub singular_values: Vec<f64>,
    /// Largest normalized `|T^h_ijk|` over the directions.
    pub max_t: f64,
    /// Largest normalized `|σ_r T^r_jkl|` when a gradient was supplied.
    pub max_sigma_t: Option<f64>,
}

/// Decides the σT-condition at a fixed base point from sampled directions.
///
/// Rows `T^r_jkl(x, y_a) / scale_a` are stacked over all `(a, j, k, l)`; the
/// kernel is the span of right singular vectors whose singular value falls
/// below `max(tol, 1e-8 σ_max)`.
pub fn check_sigma_t<M: FinslerMetric + ?Sized>(
    metric: &M,
    x: &[f64],
    directions: &[Vec<f64>],
    sigma_grad: Option<&[f64]>,
    tol: f64,
) -> Result<SigmaTReport> {
    let n = metric.dim();
    if directions.len() < 2 * n {
        return Err(Error::InsufficientSamples(format!(
            "σT check needs at least {} directions, got {}",
            2 * n,
            directions.len()
        )));
    }
    let mut rows: Vec<f64> = Vec::new();
    let mut max_t = 0.0f64;
    let mut max_sigma_t = 0.0f64;
    for y in directions {
        let fj = FiberJets::new(metric, x, y, 4, 0)?;
        let mt = MetricTensor::from_matrix(fj.g()?.values())?;
        let cd = crate::metric::cartan_from(&fj, &mt)?;
        let l = fj.l_low()?.values();
        let tt = TTensor::new(fj.value(), l.as_slice(), &mt, &cd);
        let scale = t_scale(l.as_slice(), &cd.c_up, y);
        max_t = max_t.max(tt.t_up.max_abs() / scale);
        for j in 0..n {
            for k in j..n {
                for m in k..n {
                    let row: Vec<f64> = (0..n).map(|r| tt.t_up[[r, j, k, m]] / scale).collect();
                    if let Some(s) = sigma_grad {
                        let v: f64 = row.iter().zip(s).map(|(a, b)| a * b).sum();
                        max_sigma_t = max_sigma_t.max(v.abs());
                    }
                    rows.extend(row);
                }
            }
        }
    }
    let m = DMatrix::from_row_slice(rows.len() / n, n, &rows);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let (kernel_dim, verdict, witness) = if max_t < tol {
        (n, SigmaTVerdict::T_CONDITION, None)
    } else {
        let cutoff = tol.max(1e-8 * smax);
        let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
        let kernel = n - rank;
        if kernel == 0 {
            (0, SigmaTVerdict::NEITHER, None)
        } else {
            let last = *order.last().expect("non-empty spectrum");
            let mut w: Vec<f64> = v_t.row(last).iter().copied().collect();
            // fix the sign by the largest component
            let big = w
                .iter()
                .copied()
                .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if big < 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
            (kernel, SigmaTVerdict::SIGMA_T_ONLY, Some(w))
        }
    };
    Ok(SigmaTReport {
        kernel_dim,
        verdict,
        witness,
        singular_values,
        max_t,
        max_sigma_t: sigma_grad.map(|_| max_sigma_t),
    })
}

/// Residuals of the surface decompositions in terms of the main scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameResiduals {
    /// `C_ijk − (I/F) m_i m_j m_k`
    pub cartan: f64,
    /// `G^h_ijk − (1/F){−2 I_{,1} ℓ^h + (I_{,2} + I_{,1;2}) m^h} m_i m_j m_k`
    pub berwald: f64,
    /// `L_ijk − I_{,1} m_i m_j m_k`
    pub landsberg: f64,
    /// `T^h_ijk − (I_{;2}/F) m^h m_i m_j m_k`
    pub t_tensor: f64,
}

pub fn frame_residuals(pg: &PointGeometry) -> Result<FrameResiduals> {
    if pg.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: pg.dim(),
        });
    }
    let d = pg.main_scalar_derivatives()?;
    let fr = &d.frame;
    let f = pg.f();
    let (m, mu, lu) = (&fr.m_low, &fr.m_up, &fr.l_up);
    let cd = pg.cartan_data()?;
    let sd = pg.spray_data()?;
    let b = sd.g_h_ijk.as_ref().expect("curvature requested");
    let l = pg.landsberg()?;
    let tt = TTensor::new(f, &fr.l_low, &pg.metric, &cd);
    let mmm = |i: usize, j: usize, k: usize| m[i] * m[j] * m[k];
    let mut r = FrameResiduals {
        cartan: 0.0,
        berwald: 0.0,
        landsberg: 0.0,
        t_tensor: 0.0,
    };
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                r.cartan = r
                    .cartan
                    .max((cd.c[[i, j, k]] - d.i / f * mmm(i, j, k)).abs());
                r.landsberg = r.landsberg.max((l[[i, j, k]] - d.i_1 * mmm(i, j, k)).abs());
                for h in 0..2 {
                    let bw = (-2.0 * d.i_1 * lu[h] + (d.i_2 + d.i_1_v2) * mu[h]) * mmm(i, j, k) / f;
                    r.berwald = r.berwald.max((b[[h, i, j, k]] - bw).abs());
                    let tm = d.i_v2 / f * mu[h] * mmm(i, j, k);
                    r.t_tensor = r.t_tensor.max((tt.t_up[[h, i, j, k]] - tm).abs());
                }
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Euclidean, Randers};
    use crate::jet::Jet;
    use crate::params::XFunction;

    fn randers_x() -> Randers {
        Randers::new(
            2,
            XFunction::poly(&[(0.3, &[]), (0.1, &[1]), (0.05, &[0, 1])]),
        )
    }

    #[test]
    fn euclidean_t_vanishes() {
        let tt = t_tensor(&Euclidean::new(3), &[0.0; 3], &[1.0, 2.0, -0.5]).unwrap();
        assert!(tt.t.max_abs() < 1e-14);
    }

    #[test]
    fn randers_t_is_symmetric_indicatory_and_nonzero() {
        let m = randers_x();
        let y = [1.0, 0.4];
        let tt = t_tensor(&m, &[0.2, -0.1], &y).unwrap();
        assert!(tt.t.max_abs() > 1e-2);
        assert!(tt.t.symmetry_defect() < 1e-12);
        for h in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let c: f64 = (0..2).map(|k| tt.t[[h, i, j, k]] * y[k]).sum();
                    assert!(c.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn surface_v_curvature_vanishes() {
        let cd = crate::metric::cartan(&randers_x(), &[0.2, -0.1], &[1.0, 0.4]).unwrap();
        assert!(v_curvature(&cd).max_abs() < 1e-13);
        assert!(v_curvature_lowered(&cd).max_abs() < 1e-13);
    }

    #[test]
    fn v_curvature_antisymmetry_in_three_dimensions() {
        let m = Randers::new(3, XFunction::constant(0.4));
        let cd = crate::metric::cartan(&m, &[0.0; 3], &[1.0, 0.3, -0.6]).unwrap();
        let s = v_curvature(&cd);
        assert!(s.max_abs() > 1e-3);
        for (idx, v) in s.iter() {
            let [h, i, j, k] = idx;
            assert_eq!(*v, -s[[h, i, k, j]]);
        }
    }

    #[test]
    fn frame_identities_on_randers() {
        let m = randers_x();
        for (x, y) in [([0.2, -0.1], [1.0, 0.4]), ([-0.5, 0.3], [-0.2, 1.0])] {
            let pg = PointGeometry::new(&m, &x, &y).unwrap();
            let r = frame_residuals(&pg).unwrap();
            assert!(
                r.cartan < 1e-12 && r.landsberg < 1e-12 && r.t_tensor < 1e-12 && r.berwald < 1e-11,
                "{r:?}"
            );
        }
    }

    /// Indefinite surface: `F = sqrt(y1² − y2²) + B(x) y1` on `|y2| < |y1|`.
    #[derive(Debug)]
    struct Lorentz;
    impl FinslerMetric for Lorentz {
        fn dim(&self) -> usize {
            2
        }
        fn label(&self) -> String {
            "lorentz-randers".into()
        }
        fn domain_margin(&self, _x: &[f64], y: &[f64]) -> f64 {
            y[0].abs() - y[1].abs()
        }
        fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
            let b = &x[0].scale(0.1) + 0.2;
            Ok((y[0].square() - y[1].square()).sqrt()? + b * &y[0])
        }
    }

    #[test]
    fn frame_identities_with_negative_signature() {
        let pg = PointGeometry::new(&Lorentz, &[0.3, 0.1], &[1.0, 0.3]).unwrap();
        let d = pg.main_scalar_derivatives().unwrap();
        assert_eq!(d.frame.eps, -1.0);
        let r = frame_residuals(&pg).unwrap();
        assert!(
            r.cartan < 1e-12 && r.landsberg < 1e-12 && r.t_tensor < 1e-12 && r.berwald < 1e-11,
            "{r:?}"
        );
    }

    #[test]
    fn sigma_t_on_surfaces() {
        let dirs: Vec<Vec<f64>> = (0..6).map(|k| vec![1.0, -0.8 + 0.3 * k as f64]).collect();
        let rep = check_sigma_t(&randers_x(), &[0.1, 0.2], &dirs, None, 1e-7).unwrap();
        assert_eq!(rep.verdict, SigmaTVerdict::NEITHER);
        assert_eq!(rep.kernel_dim, 0);
        let rep = check_sigma_t(
            &Euclidean::new(2),
            &[0.1, 0.2],
            &dirs,
            Some(&[1.0, 0.0]),
            1e-7,
        )
        .unwrap();
        assert_eq!(rep.verdict, SigmaTVerdict::T_CONDITION);
        assert_eq!(rep.kernel_dim, 2);
        assert!(check_sigma_t(&randers_x(), &[0.1, 0.2], &dirs[..3], None, 1e-7).is_err());
    }
}
