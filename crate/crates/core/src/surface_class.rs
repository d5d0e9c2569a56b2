//! The `Q` invariant of a surface, the two classified families of surfaces
//! with vanishing T-tensor, and the three-dimensional `(α, β)` examples.
//!
//! Both surface branches share one shape. With `P = λu² + μu + c₀` and a
//! constant `k`, `(ln f)′ = (P′/2 + k)/P`, hence
//! `Q = (P′/2 + k)/(P − u(P′/2 + k))` and `f″/f = (k² − D/4)/P²` where
//! `D = μ² − 4λc₀`.

use crate::error::{Error, Result};
use crate::families::{Profile, SurfaceMetric};
use crate::geometry::FForm;
use crate::jet::{Jet, Var};
use crate::metric::FinslerMetric;
use crate::params::XFunction;
use crate::quadrature::{antiderivative_jet, integrate, DEFAULT_ABS_TOL};

/// `Q` and its first three `u`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QProfile {
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// `Q = f′/(f − uf′)` as a jet in `u` (x-order 0).
pub fn q_jet<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    x: &[f64],
    u: f64,
    order: usize,
) -> Result<Jet> {
    let f = ff.f_jet(x, u, order + 1, 0)?;
    let fp = f.dy(0)?;
    let f0 = f.truncate(order, 0)?;
    let uj = Jet::variable(f0.config(), Var::Y(0), u)?;
    let den = &f0 - &(&uj * &fp);
    if den.value().abs() < 1e-12 * f0.value().abs() {
        return Err(Error::DegenerateFForm(format!(
            "f − uf′ = {:e} at u = {u}",
            den.value()
        )));
    }
    Ok(fp.div(&den)?)
}

pub fn q_from_f<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    x: &[f64],
    u: f64,
) -> Result<QProfile> {
    let q = q_jet(ff, x, u, 3)?;
    let d = |k: usize| q.extract_derivative(&[0, 0, k]);
    Ok(QProfile {
        q: d(0)?,
        q1: d(1)?,
        q2: d(2)?,
        q3: d(3)?,
    })
}

/// `|Q′ − f f″/(f − uf′)²|`
pub fn q_prime_identity_residual<M: FinslerMetric + ?Sized>(
    ff: &FForm<'_, M>,
    x: &[f64],
    u: f64,
) -> Result<f64> {
    let qp = q_from_f(ff, x, u)?;
    let [f, fp, fpp] = ff.f_derivs(x, u)?;
    Ok((qp.q1 - f * fpp / (f - u * fp).powi(2)).abs())
}

/// `f(u) = exp ∫_{u0}^{u} Q/(1 + tQ) dt`, normalized by `f(u0) = 1`.
pub fn f_from_q<Q>(q: Q, u: f64, u0: f64) -> Result<f64>
where
    Q: Fn(f64) -> Result<f64>,
{
    let integral = integrate(
        |t| {
            let qt = q(t)?;
            let den = 1.0 + t * qt;
            if den.abs() < 1e-12 {
                return Err(Error::Quadrature(format!("1 + tQ vanishes at t = {t}")));
            }
            Ok(qt / den)
        },
        u0,
        u,
        DEFAULT_ABS_TOL,
    )?;
    Ok(integral.exp())
}

/// `2Q′Q‴ − 3Q″²`
pub fn q_ode_residual(qp: &QProfile) -> f64 {
    2.0 * qp.q1 * qp.q3 - 3.0 * qp.q2 * qp.q2
}

/// Parameters of the two classified families.
///
/// `One`: `ln f = ½ ln P − (K/2) ∫du/P` with `P = c₃u² + (c₂c₃ − 4c₁ + 1)u + c₂`,
/// `K = −c₂c₃ + 4c₁ + 1`, and `Q = c₃ − 4c₁/(u + c₂)`.
/// `Two`: `ln f = ½ ln P + (b/2) ∫du/P` with `P = au² + bu + 1`, and `Q = au + b`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassParams {
    One {
        c1: XFunction,
        c2: XFunction,
        c3: XFunction,
    },
    Two {
        a: XFunction,
        b: XFunction,
    },
}

impl ClassParams {
    /// Branch one from constants of `Q = c₂/(2c₁ − u) + c₃`.
    pub fn from_proof_constants(c1: f64, c2: f64, c3: f64) -> Self {
        ClassParams::One {
            c1: XFunction::constant(c2 / 4.0),
            c2: XFunction::constant(-2.0 * c1),
            c3: XFunction::constant(c3),
        }
    }

    pub fn branch(&self) -> &'static str {
        match self {
            ClassParams::One { .. } => "one",
            ClassParams::Two { .. } => "two",
        }
    }

    /// `[λ, μ, c₀, k]` as jets.
    fn shape_jets(&self, x: &[Jet]) -> [Jet; 4] {
        match self {
            ClassParams::One { c1, c2, c3 } => {
                let (c1, c2, c3) = (c1.eval_jet(x), c2.eval_jet(x), c3.eval_jet(x));
                let c23 = &c2 * &c3;
                let mid = (&c23 - &c1.scale(4.0)) + 1.0;
                let k = ((&c23 - &c1.scale(4.0)) + -1.0).scale(0.5);
                [c3, mid, c2, k]
            }
            ClassParams::Two { a, b } => {
                let b = b.eval_jet(x);
                let one = Jet::constant(b.config(), 1.0);
                [a.eval_jet(x), b.clone(), one, b.scale(0.5)]
            }
        }
    }

    /// `[λ, μ, c₀, k]`
    pub fn shape(&self, x: &[f64]) -> [f64; 4] {
        match self {
            ClassParams::One { c1, c2, c3 } => {
                let (c1, c2, c3) = (c1.eval(x), c2.eval(x), c3.eval(x));
                [
                    c3,
                    c2 * c3 - 4.0 * c1 + 1.0,
                    c2,
                    0.5 * (c2 * c3 - 4.0 * c1 - 1.0),
                ]
            }
            ClassParams::Two { a, b } => {
                let b = b.eval(x);
                [a.eval(x), b, 1.0, 0.5 * b]
            }
        }
    }

    pub fn p(&self, x: &[f64], u: f64) -> f64 {
        let [l, m, c0, _] = self.shape(x);
        (l * u + m) * u + c0
    }

    pub fn discriminant(&self, x: &[f64]) -> f64 {
        let [l, m, c0, _] = self.shape(x);
        m * m - 4.0 * l * c0
    }

    /// `f f″ / f² · P² = k² − D/4`; the metric degenerates where it vanishes.
    pub fn convexity(&self, x: &[f64]) -> f64 {
        let [_, _, _, k] = self.shape(x);
        k * k - 0.25 * self.discriminant(x)
    }

    /// Closed-form `Q` of the branch.
    pub fn q(&self, x: &[f64], u: f64) -> f64 {
        let [l, m, c0, k] = self.shape(x);
        let n = l * u + 0.5 * m + k;
        n / ((l * u + m) * u + c0 - u * n)
    }

    /// The closed form needs a quadratic `P` with a nonzero discriminant.
    pub fn uses_quadrature(&self, x: &[f64]) -> bool {
        let [l, ..] = self.shape(x);
        l.abs() < 1e-10 || self.discriminant(x).abs() < 1e-10
    }

    fn describe(&self) -> String {
        match self {
            ClassParams::One { c1, c2, c3 } => {
                format!(
                    "class1(c1={}, c2={}, c3={})",
                    c1.describe(),
                    c2.describe(),
                    c3.describe()
                )
            }
            ClassParams::Two { a, b } => format!("class2(a={}, b={})", a.describe(), b.describe()),
        }
    }
}

/// `f(x, u)` of a classified surface; the closed form where available, else
/// `exp ∫_{u0}^{u} Q/(1 + tQ) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub params: ClassParams,
    /// Base point of the quadrature form.
    pub u0: f64,
    pub u_range: Option<(f64, f64)>,
}

impl ClassProfile {
    /// `ln f(u) − ln f(u0)` from `½ ln|P| + kJ`. The normalization keeps `f`
    /// continuous in `x` across `D = 0`, where the arctangent branch carries
    /// a constant `±π/√(−D)`.
    fn closed_form(&self, x: &[Jet], u: &Jet) -> Result<Jet> {
        let [l, m, c0, k] = self.params.shape_jets(x);
        let d = &m.square() - &(&l * &c0).scale(4.0);
        let ln_f = |t: &Jet| -> Result<Jet> {
            let p = (&(&l * t) + &m) * t + &c0;
            let pp = &l.scale(2.0) * t + &m;
            let j = if d.value() > 0.0 {
                let sd = d.sqrt()?;
                (pp.div(&sd)?.atanh_real()? * sd.recip()?).scale(-2.0)
            } else {
                let sd = d.scale(-1.0).sqrt()?;
                (pp.div(&sd)?.atan() * sd.recip()?).scale(2.0)
            };
            let sign = p.value().signum();
            Ok(p.scale(sign).ln()?.scale(0.5) + &k * &j)
        };
        let u0 = Jet::zero(u.config()) + self.u0;
        Ok((ln_f(u)? - ln_f(&u0)?).exp())
    }

    fn quadrature_form(&self, x: &[Jet], u: &Jet) -> Result<Jet> {
        let cfg = u.config();
        let xv: Vec<f64> = x.iter().map(Jet::value).collect();
        let params = &self.params;
        let phi = antiderivative_jet(
            |xs, t| {
                let [l, m, c0, k] = params.shape_jets(xs);
                let p = (&(&l * t) + &m) * t + &c0;
                let num = &l * t + &(m.scale(0.5) + &k);
                Ok(num.div(&p)?)
            },
            &xv,
            self.u0,
            u.value(),
            cfg.order_y + cfg.order_x,
            cfg.order_x,
        )?;
        let mut args = x.to_vec();
        args.push(u.clone());
        Ok(phi.compose(&args)?.exp())
    }

    /// `P` has no root between `u0` and `u`.
    fn same_component(&self, x: &[f64], u: f64) -> bool {
        let [l, m, c0, _] = self.params.shape(x);
        let (lo, hi) = if u < self.u0 {
            (u, self.u0)
        } else {
            (self.u0, u)
        };
        let roots: Vec<f64> = if l.abs() < 1e-14 {
            if m.abs() < 1e-14 {
                vec![]
            } else {
                vec![-c0 / m]
            }
        } else {
            let d = m * m - 4.0 * l * c0;
            if d < 0.0 {
                vec![]
            } else {
                vec![(-m - d.sqrt()) / (2.0 * l), (-m + d.sqrt()) / (2.0 * l)]
            }
        };
        roots.iter().all(|&r| r < lo || r > hi)
    }
}

impl Profile for ClassProfile {
    fn label(&self) -> String {
        self.params.describe()
    }

    fn f_jet(&self, x: &[Jet], u: &Jet) -> Result<Jet> {
        let xv: Vec<f64> = x.iter().map(Jet::value).collect();
        if self.params.uses_quadrature(&xv) {
            self.quadrature_form(x, u)
        } else {
            self.closed_form(x, u)
        }
    }

    fn margin(&self, x: &[f64], u: f64) -> f64 {
        if let Some((lo, hi)) = self.u_range {
            if u <= lo || u >= hi {
                return -1.0;
            }
        }
        if self.params.uses_quadrature(x) && !self.same_component(x, u) {
            return -1.0;
        }
        let p = self.params.p(x, u).abs() / (1.0 + u * u);
        let conv = self.params.convexity(x).abs();
        p.min(conv / (1.0 + conv))
    }
}

pub type ClassMetric = SurfaceMetric<ClassProfile>;

/// Builds a classified surface metric `F = |y¹| f(x, y²/y¹)`. With a declared
/// `u`-interval, `P ≠ 0` and nondegeneracy are checked on it at `x = 0`.
pub fn build_class(params: ClassParams, u_range: Option<(f64, f64)>) -> Result<ClassMetric> {
    let u0 = match u_range {
        Some((lo, hi)) if !(lo < 0.0 && 0.0 < hi) => 0.5 * (lo + hi),
        _ => 0.0,
    };
    let profile = ClassProfile {
        params,
        u0,
        u_range,
    };
    if let Some((lo, hi)) = u_range {
        if lo >= hi {
            return Err(Error::InvalidParams(format!(
                "empty u-interval [{lo}, {hi}]"
            )));
        }
        for k in 1..64 {
            let u = lo + (hi - lo) * k as f64 / 64.0;
            if profile.margin(&[0.0, 0.0], u) <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{}: P or the convexity vanishes near u = {u}",
                    profile.params.describe()
                )));
            }
        }
    }
    Ok(SurfaceMetric::new(profile))
}

/// The `(α, β)` families in three dimensions with `α = |y|` unless noted.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaBetaKind {
    /// `φ = f(x) s^{(cb²−1)/(cb²)} (b² − s²)^{1/(2cb²)}`, `β = b y¹`.
    TClass { c: f64, b: f64, f: XFunction },
    /// `φ = c₃ exp ∫_0^s (c₁√(b²−t²) + c₂t)/(t(c₁√(b²−t²) + c₂t) + 1) dt`, `β = b y¹`.
    SigmaTClass { c1: f64, c2: f64, c3: f64, b: f64 },
    /// `φ = √s (1 − s²)^{1/4}`, `β = y¹`.
    Example1,
    /// `F = (aβ + √(α² − β²)) exp(aβ/(aβ + √(α² − β²)))` with `β = f(x¹)y¹`,
    /// `α = f(x¹)√((y¹)² + φ(ŷ))`, `φ = p22 (y²)² + 2 p23 y²y³ + p33 (y³)²`.
    Example2 {
        a: f64,
        f: XFunction,
        p22: f64,
        p23: f64,
        p33: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBeta {
    pub kind: AlphaBetaKind,
}

pub fn build_alpha_beta(kind: AlphaBetaKind) -> Result<AlphaBeta> {
    match &kind {
        AlphaBetaKind::TClass { c, b, .. } if *c == 0.0 || *b <= 0.0 => {
            return Err(Error::InvalidParams(format!(
                "T-class needs c ≠ 0 and b > 0, got c = {c}, b = {b}"
            )));
        }
        AlphaBetaKind::SigmaTClass { b, .. } if *b <= 0.0 => {
            return Err(Error::InvalidParams(format!(
                "σT-class needs b > 0, got {b}"
            )));
        }
        AlphaBetaKind::Example2 { p22, p23, p33, .. }
            if *p22 <= 0.0 || p22 * p33 - p23 * p23 <= 0.0 =>
        {
            return Err(Error::InvalidParams(
                "Example 2 needs a positive definite φ".into(),
            ));
        }
        _ => {}
    }
    Ok(AlphaBeta { kind })
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn alpha_jet(y: &[Jet]) -> Result<Jet> {
    Ok((&(&y[0].square() + &y[1].square()) + &y[2].square()).sqrt()?)
}

impl AlphaBeta {
    fn b(&self) -> f64 {
        match self.kind {
            AlphaBetaKind::TClass { b, .. } | AlphaBetaKind::SigmaTClass { b, .. } => b,
            _ => 1.0,
        }
    }

    fn phi_hat(p22: f64, p23: f64, p33: f64, y2: f64, y3: f64) -> f64 {
        p22 * y2 * y2 + 2.0 * p23 * y2 * y3 + p33 * y3 * y3
    }

    fn sigma_t_phi(&self, s: &Jet) -> Result<Jet> {
        let AlphaBetaKind::SigmaTClass { c1, c2, c3, b } = self.kind else {
            unreachable!("only called for the σT class")
        };
        let cfg = s.config();
        let phi = antiderivative_jet(
            |_, t| {
                let root = (t.square().scale(-1.0) + b * b).sqrt()?;
                let num = root.scale(c1) + &t.scale(c2);
                Ok(num.div(&((t * &num) + 1.0))?)
            },
            &[],
            0.0,
            s.value(),
            cfg.max_total_order(),
            0,
        )?;
        Ok(phi.compose(std::slice::from_ref(s))?.exp() * c3)
    }
}

impl FinslerMetric for AlphaBeta {
    fn dim(&self) -> usize {
        3
    }

    fn label(&self) -> String {
        match &self.kind {
            AlphaBetaKind::TClass { c, b, f } => {
                format!("ab_t_class(c={c}, b={b}, f={})", f.describe())
            }
            AlphaBetaKind::SigmaTClass { c1, c2, c3, b } => {
                format!("ab_sigma_t_class(c1={c1}, c2={c2}, c3={c3}, b={b})")
            }
            AlphaBetaKind::Example1 => "example1".into(),
            AlphaBetaKind::Example2 {
                a,
                f,
                p22,
                p23,
                p33,
            } => {
                format!(
                    "example2(a={a}, f={}, phi=[{p22}, {p23}, {p33}])",
                    f.describe()
                )
            }
        }
    }

    fn domain_margin(&self, _x: &[f64], y: &[f64]) -> f64 {
        let n = norm(y);
        if n == 0.0 {
            return 0.0;
        }
        match &self.kind {
            AlphaBetaKind::Example2 {
                a, p22, p23, p33, ..
            } => {
                let ph = Self::phi_hat(*p22, *p23, *p33, y[1], y[2]);
                if ph <= 0.0 {
                    return ph / (n * n);
                }
                (ph / (n * n)).min((a * y[0] + ph.sqrt()) / n)
            }
            _ => {
                let b = self.b();
                let s = b * y[0] / n;
                s.min(b - s) / b
            }
        }
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        match &self.kind {
            AlphaBetaKind::Example1 => {
                let alpha = alpha_jet(y)?;
                let s = y[0].div(&alpha)?;
                let phi = s.sqrt()? * (s.square().scale(-1.0) + 1.0).powf(0.25)?;
                Ok(alpha * phi)
            }
            AlphaBetaKind::TClass { c, b, f } => {
                let alpha = alpha_jet(y)?;
                let s = y[0].scale(*b).div(&alpha)?;
                let cb2 = c * b * b;
                let phi = s.powf((cb2 - 1.0) / cb2)?
                    * (s.square().scale(-1.0) + b * b).powf(1.0 / (2.0 * cb2))?;
                Ok(alpha * phi * f.eval_jet(x))
            }
            AlphaBetaKind::SigmaTClass { b, .. } => {
                let alpha = alpha_jet(y)?;
                let s = y[0].scale(*b).div(&alpha)?;
                Ok(alpha * self.sigma_t_phi(&s)?)
            }
            AlphaBetaKind::Example2 {
                a,
                f,
                p22,
                p23,
                p33,
            } => {
                let fx = f.eval_jet(x);
                let ph = (&y[1].square().scale(*p22) + &(&y[1] * &y[2]).scale(2.0 * p23))
                    + &y[2].square().scale(*p33);
                let beta = &fx * &y[0];
                let root = &fx * &ph.sqrt()?;
                let ab = beta.scale(*a);
                let den = &ab + &root;
                let ex = ab.div(&den)?.exp();
                Ok(den * ex)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_t_condition;
    use crate::families::Euclidean;
    use crate::geometry::{FForm, PointGeometry};
    use crate::jet::JetConfig;
    use crate::metric::lift;

    fn two(a: f64, b: f64) -> ClassMetric {
        build_class(
            ClassParams::Two {
                a: a.into(),
                b: b.into(),
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn q_of_round_profile() {
        let e = Euclidean::new(2);
        let ff = FForm::new(&e, 1.0).unwrap();
        let qp = q_from_f(&ff, &[0.0, 0.0], 0.7).unwrap();
        assert!((qp.q - 0.7).abs() < 1e-14 && (qp.q1 - 1.0).abs() < 1e-13 && qp.q2.abs() < 1e-12);
        assert!(q_prime_identity_residual(&ff, &[0.0, 0.0], 0.7).unwrap() < 1e-12);
    }

    #[test]
    fn f_from_q_recovers_round_profile() {
        let f = f_from_q(Ok, 1.3, 0.0).unwrap();
        assert!((f - (1.0f64 + 1.3 * 1.3).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn ode_residual_examples() {
        // Q = 1/(2 − u)
        let u: f64 = 0.4;
        let w = 2.0 - u;
        let qp = QProfile {
            q: 1.0 / w,
            q1: 1.0 / w.powi(2),
            q2: 2.0 / w.powi(3),
            q3: 6.0 / w.powi(4),
        };
        assert!(q_ode_residual(&qp).abs() < 1e-14);
        let cube = QProfile {
            q: 1.0,
            q1: 3.0,
            q2: 6.0,
            q3: 6.0,
        };
        assert_eq!(q_ode_residual(&cube), -72.0);
    }

    #[test]
    fn class_two_round_case_is_euclidean() {
        let m = two(1.0, 0.0);
        for y in [[1.0, 0.5], [-2.0, 0.3]] {
            let v = m.eval(&[0.3, 0.2], &y).unwrap();
            assert!((v - norm(&y)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_q_matches_jets() {
        let cases = [
            ClassParams::Two {
                a: 2.0.into(),
                b: 3.0.into(),
            },
            ClassParams::Two {
                a: 2.0.into(),
                b: 1.0.into(),
            },
            ClassParams::One {
                c1: 0.1.into(),
                c2: 1.0.into(),
                c3: 0.5.into(),
            },
            ClassParams::One {
                c1: 0.3.into(),
                c2: 2.0.into(),
                c3: 1.0.into(),
            },
        ];
        for p in cases {
            let m = build_class(p.clone(), None).unwrap();
            let ff = FForm::new(&m, 1.0).unwrap();
            for u in [0.1, 0.4] {
                let x = [0.2, -0.1];
                if !m.in_domain(&x, &[1.0, u]) {
                    continue;
                }
                let qp = q_from_f(&ff, &x, u).unwrap();
                assert!((qp.q - p.q(&x, u)).abs() < 1e-12, "{p:?} at u = {u}");
                match p {
                    ClassParams::One { .. } => assert!(q_ode_residual(&qp).abs() < 1e-9),
                    ClassParams::Two { .. } => assert!(qp.q2.abs() < 1e-9),
                }
            }
        }
    }

    #[test]
    fn proof_constants_route_to_quadrature() {
        let p = ClassParams::from_proof_constants(1.0, 1.0, 0.0);
        assert!(p.uses_quadrature(&[0.0, 0.0]));
        let m = build_class(p, Some((-0.5, 1.5))).unwrap();
        let ff = FForm::new(&m, 1.0).unwrap();
        for u in [0.0, 0.6, 1.2] {
            let qp = q_from_f(&ff, &[0.1, 0.1], u).unwrap();
            assert!((qp.q - 1.0 / (2.0 - u)).abs() < 1e-10);
            assert!(q_ode_residual(&qp).abs() < 1e-9);
        }
        // f = e^{u/2}
        assert!((ff.f(&[0.0, 0.0], 0.8).unwrap() - 0.4f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_and_closed_forms_agree_up_to_normalization() {
        let p = ClassParams::Two {
            a: XFunction::poly(&[(2.0, &[]), (0.2, &[1])]),
            b: XFunction::poly(&[(3.0, &[]), (0.1, &[0, 2])]),
        };
        let closed = ClassProfile {
            params: p.clone(),
            u0: 0.0,
            u_range: None,
        };
        let x = [0.3, -0.2];
        let cfg = JetConfig::new(2, 1, 3, 1).unwrap();
        let xs: Vec<Jet> = (0..2)
            .map(|i| Jet::variable(cfg, Var::X(i), x[i]).unwrap())
            .collect();
        let uj = Jet::variable(cfg, Var::Y(0), 0.5).unwrap();
        let u0 = Jet::constant(cfg, 0.0);
        let lc = closed.closed_form(&xs, &uj).unwrap().ln().unwrap()
            - closed.closed_form(&xs, &u0).unwrap().ln().unwrap();
        let lq = closed.quadrature_form(&xs, &uj).unwrap().ln().unwrap();
        for mi in [
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [0, 0, 3],
            [1, 0, 2],
        ] {
            let (a, b) = (
                lc.extract_derivative(&mi).unwrap(),
                lq.extract_derivative(&mi).unwrap(),
            );
            assert!((a - b).abs() < 1e-9, "{mi:?}: {a} vs {b}");
        }
    }

    #[test]
    fn negative_discriminant_uses_arctan_form() {
        let m = two(2.0, 1.0);
        let ff = FForm::new(&m, 1.0).unwrap();
        let x = [0.0, 0.0];
        // ∫_0^u dt/(2t² + t + 1), exact
        let j = |u: f64| {
            2.0 / 7f64.sqrt()
                * (((4.0 * u + 1.0) / 7f64.sqrt()).atan() - (1.0 / 7f64.sqrt()).atan())
        };
        let u = 0.9;
        let expected = (0.5 * (2.0 * u * u + u + 1.0f64).ln() + 0.5 * j(u)).exp();
        let f0 = ff.f(&x, 0.0).unwrap();
        assert!((ff.f(&x, u).unwrap() / f0 - expected).abs() < 1e-13);
    }

    #[test]
    fn class_metrics_have_vanishing_t() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = [0.1, 0.5, 1.2]
            .iter()
            .map(|&u| (vec![0.2, 0.1], vec![1.0, u]))
            .collect();
        let rep = check_t_condition(&two(2.0, 3.0), &samples, 1e-7).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn example1_matches_t_class() {
        let e1 = build_alpha_beta(AlphaBetaKind::Example1).unwrap();
        let tc = build_alpha_beta(AlphaBetaKind::TClass {
            c: 2.0,
            b: 1.0,
            f: 1.0.into(),
        })
        .unwrap();
        let y = [1.0, 0.5, 0.5];
        let s = 1.0 / 1.5f64.sqrt();
        let expected = 1.5f64.sqrt() * s.sqrt() * (1.0 - s * s).powf(0.25);
        assert!((e1.eval(&[0.0; 3], &y).unwrap() - expected).abs() < 1e-14);
        assert!((tc.eval(&[0.0; 3], &y).unwrap() - expected).abs() < 1e-14);
        assert!(!e1.in_domain(&[0.0; 3], &[-1.0, 0.2, 0.0]));
    }

    #[test]
    fn sigma_t_phi_derivative_is_the_integrand() {
        let m = build_alpha_beta(AlphaBetaKind::SigmaTClass {
            c1: 1.0,
            c2: 0.0,
            c3: 1.0,
            b: 1.0,
        })
        .unwrap();
        let y = [0.6, 0.8, 0.0];
        let v = lift(&m, &[0.0; 3], &y, 1, 0).unwrap();
        assert!(v.value() > 0.0);
        // Euler: y·∂̇F = F
        let e: f64 = (0..3)
            .map(|i| {
                y[i] * v
                    .extract_derivative(&[
                        0,
                        0,
                        0,
                        (i == 0) as usize,
                        (i == 1) as usize,
                        (i == 2) as usize,
                    ])
                    .unwrap()
            })
            .sum();
        assert!((e - v.value()).abs() < 1e-12);
        let pg = PointGeometry::new(&m, &[0.0; 3], &y);
        assert!(pg.is_ok());
    }
}
