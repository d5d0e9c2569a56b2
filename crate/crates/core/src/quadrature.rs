//! Adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued integrands,
//! and antiderivative jets built on top of it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetConfig, Var};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, width: usize) -> Result<Panel>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; width];
    let mut gauss = vec![0.0; width];
    let mut eval = |t: f64| -> Result<Vec<f64>> {
        let v = f(t)?;
        if v.len() != width || v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Quadrature(format!(
                "integrand not finite at t = {t}"
            )));
        }
        Ok(v)
    };
    let fc = eval(center)?;
    for c in 0..width {
        kron[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        for c in 0..width {
            let s = f1[c] + f2[c];
            kron[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0f64;
    for c in 0..width {
        kron[c] *= half;
        gauss[c] *= half;
        error = error.max((kron[c] - gauss[c]).abs());
    }
    Ok(Panel {
        a,
        b,
        value: kron,
        error,
    })
}

/// Integrates a vector-valued function over `[a, b]` to an absolute tolerance
/// on every component, bisecting the worst panel first.
pub fn integrate_vec<F>(mut f: F, width: usize, a: f64, b: f64, abs_tol: f64) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0; width],
            error: 0.0,
            panels: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(gk15(&mut f, a, b, width)?);
    let mut total_err = heap.peek().map_or(0.0, |p| p.error);
    while total_err > abs_tol {
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {MAX_PANELS} panels (error {total_err:e})"
            )));
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&mut f, worst.a, mid, width)?;
        let right = gk15(&mut f, mid, worst.b, width)?;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // guard against drift of the running sum
        if total_err <= abs_tol {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let panels = heap.len();
    let mut value = vec![0.0; width];
    let mut error = 0.0;
    // deterministic summation order
    let mut all: Vec<Panel> = heap.into_vec();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    for p in &all {
        for (v, pv) in value.iter_mut().zip(&p.value) {
            *v += pv;
        }
        error += p.error;
    }
    Ok(QuadResult {
        value,
        error,
        panels,
    })
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(integrate_vec(|t| Ok(vec![f(t)?]), 1, a, b, abs_tol)?.value[0])
}

fn x_indices(n_x: usize, order_x: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n_x]];
    if order_x >= 1 {
        for i in 0..n_x {
            let mut e = vec![0; n_x];
            e[i] = 1;
            out.push(e);
        }
    }
    if order_x >= 2 {
        for i in 0..n_x {
            for j in i..n_x {
                let mut e = vec![0; n_x];
                e[i] += 1;
                e[j] += 1;
                out.push(e);
            }
        }
    }
    out
}

/// Jet over `(x^1..x^m, t)` of `Φ(x, t) = ∫_{t0}^{t} h(x, τ) dτ`.
///
/// Coefficients free of `t` come from quadrature of the `x`-jet of `h`;
/// the rest follow from the Taylor expansion of `h` at `(x, t)`.
pub fn antiderivative_jet<H>(
    h: H,
    x: &[f64],
    t0: f64,
    t: f64,
    order_t: usize,
    order_x: usize,
) -> Result<Jet>
where
    H: Fn(&[Jet], &Jet) -> Result<Jet>,
{
    if order_x > 2 {
        return Err(Error::InvalidParams(
            "antiderivative jets support x-order up to 2".into(),
        ));
    }
    let n_x = x.len();
    let c0 = JetConfig::new(n_x, 1, 0, order_x)?;
    let xs0 = (0..n_x)
        .map(|i| Jet::variable(c0, Var::X(i), x[i]))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let xidx = x_indices(n_x, order_x);
    let full = |e: &[usize], k: usize| {
        let mut v = e.to_vec();
        v.push(k);
        v
    };
    let quad = integrate_vec(
        |tau| {
            let tj = Jet::constant(c0, tau);
            let hj = h(&xs0, &tj)?;
            xidx.iter()
                .map(|e| Ok(hj.coefficient(&full(e, 0))?))
                .collect()
        },
        xidx.len(),
        t0,
        t,
        DEFAULT_ABS_TOL,
    )?;
    let slope = if order_t >= 1 {
        let c1 = JetConfig::new(n_x, 1, order_t - 1, order_x)?;
        let xs1 = (0..n_x)
            .map(|i| Jet::variable(c1, Var::X(i), x[i]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let tj = Jet::variable(c1, Var::Y(0), t)?;
        Some(h(&xs1, &tj)?)
    } else {
        None
    };
    let config = JetConfig::new(n_x, 1, order_t, order_x)?;
    let mut failure = None;
    let jet = Jet::from_coefficients(config, |mi| {
        let k = mi[n_x];
        if k == 0 {
            let pos = xidx
                .iter()
                .position(|e| e[..] == mi[..n_x])
                .expect("x multi-index");
            quad.value[pos]
        } else {
            let mut lower = mi.to_vec();
            lower[n_x] = k - 1;
            match slope.as_ref().expect("slope jet").coefficient(&lower) {
                Ok(c) => c / k as f64,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        }
    });
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(jet),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // G7K15 is exact for degree <= 22
        let v = integrate(|t| Ok(t.powi(10) - 3.0 * t.powi(3)), -1.0, 2.0, 1e-12).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_refinement_on_peaked_integrand() {
        let r = integrate_vec(|t| Ok(vec![1.0 / (1e-4 + t * t)]), 1, -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!(r.panels > 1);
        assert!((r.value[0] - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn pole_is_reported() {
        assert!(matches!(
            integrate(|t| Ok(1.0 / t), -1.0, 1.0, 1e-10),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn antiderivative_jet_of_log() {
        // ∫_0^t (x + τ)^{-1} dτ = ln(x + t) - ln x
        let phi =
            antiderivative_jet(|x, t| Ok((&x[0] + t).recip()?), &[2.0], 0.0, 0.5, 3, 1).unwrap();
        assert!((phi.value() - (2.5f64 / 2.0).ln()).abs() < 1e-12);
        assert!((phi.extract_derivative(&[0, 1]).unwrap() - 1.0 / 2.5).abs() < 1e-14);
        assert!((phi.extract_derivative(&[0, 3]).unwrap() - 2.0 / 2.5f64.powi(3)).abs() < 1e-13);
        // ∂x Φ = 1/(x+t) - 1/x
        assert!((phi.extract_derivative(&[1, 0]).unwrap() - (1.0 / 2.5 - 0.5)).abs() < 1e-11);
        assert!((phi.extract_derivative(&[1, 1]).unwrap() + 1.0 / 6.25).abs() < 1e-13);
    }
}
