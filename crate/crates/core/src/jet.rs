//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] holds the Taylor coefficients of a scalar function about a base
//! point, over two groups of variables: base coordinates `x` and fiber
//! coordinates `y`. The two groups are truncated independently, so a lattice
//! with `order_y = 5, order_x = 1` keeps every monomial `x^a y^b` with
//! `|a| <= 1` and `|b| <= 5`. All arithmetic is exact up to floating point
//! rounding for the retained monomials.
//!
//! Differentiating a jet lowers the order of the differentiated group by one;
//! binary operations between jets over the same variables but different
//! orders truncate to the common (smaller) lattice.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

const MAX_VARS: usize = 12;
const MAX_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("invalid jet configuration: {0}")]
    InvalidConfig(String),
    #[error("jet configurations over different variables: {0:?} vs {1:?}")]
    ConfigMismatch(JetConfig, JetConfig),
    #[error("division by a jet with zero constant term")]
    ZeroDivisor,
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("multi-index {index:?} is outside the lattice of {config:?}")]
    IndexOutOfBounds {
        index: Vec<usize>,
        config: JetConfig,
    },
    #[error("no derivative order left in {var:?} for {config:?}")]
    OrderExhausted { var: Var, config: JetConfig },
}

/// Shape of a jet lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub order_y: usize,
    pub order_x: usize,
}

impl JetConfig {
    pub fn new(n_x: usize, n_y: usize, order_y: usize, order_x: usize) -> Result<Self, JetError> {
        let config = JetConfig {
            n_x,
            n_y,
            order_y,
            order_x,
        };
        if n_x + n_y == 0 || n_x + n_y > MAX_VARS {
            return Err(JetError::InvalidConfig(format!("{} variables", n_x + n_y)));
        }
        if order_y > MAX_ORDER || order_x > MAX_ORDER {
            return Err(JetError::InvalidConfig(format!(
                "orders y={order_y}, x={order_x} exceed {MAX_ORDER}"
            )));
        }
        Ok(config)
    }

    /// Lattice over `(x^1..x^n, y^1..y^n)` for an `n`-dimensional manifold.
    pub fn fiber(dim: usize, order_y: usize, order_x: usize) -> Result<Self, JetError> {
        Self::new(dim, dim, order_y, order_x)
    }

    pub fn n_vars(&self) -> usize {
        self.n_x + self.n_y
    }

    pub fn max_total_order(&self) -> usize {
        self.order_x + self.order_y
    }

    fn var_index(&self, var: Var) -> Option<usize> {
        match var {
            Var::X(i) if i < self.n_x => Some(i),
            Var::Y(i) if i < self.n_y => Some(self.n_x + i),
            _ => None,
        }
    }

    fn same_vars(&self, other: &JetConfig) -> bool {
        self.n_x == other.n_x && self.n_y == other.n_y
    }
}

/// A jet variable: base coordinate `X(i)` or fiber coordinate `Y(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
}

type Exps = [u8; MAX_VARS];

fn pack(exps: &Exps) -> u64 {
    exps.iter().fold(0u64, |acc, &e| (acc << 4) | u64::from(e))
}

struct DerivMap {
    target: Arc<Lattice>,
    // (target index, source index, factor)
    entries: Vec<(u32, u32, f64)>,
}

struct Lattice {
    config: JetConfig,
    exps: Vec<Exps>,
    index: HashMap<u64, usize>,
    factorial: Vec<f64>,
    // products grouped by left factor: row_start[i]..row_start[i+1] into `products`
    row_start: Vec<usize>,
    products: Vec<(u32, u32)>,
    derivs: Vec<OnceLock<Arc<DerivMap>>>,
    projections: Vec<OnceLock<(Arc<Lattice>, Vec<u32>)>>,
}

fn group_exponents(n: usize, max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; n]];
    for degree in 1..=max {
        let mut cur = vec![0u8; n];
        fill(&mut out, &mut cur, 0, degree);
    }
    fn fill(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
        if pos + 1 >= cur.len() {
            if !cur.is_empty() {
                cur[pos] = left as u8;
                out.push(cur.clone());
                cur[pos] = 0;
            }
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u8;
            fill(out, cur, pos + 1, left - e);
        }
        cur[pos] = 0;
    }
    if n == 0 {
        out.truncate(1);
    }
    out
}

impl Lattice {
    fn build(config: JetConfig) -> Lattice {
        let xs = group_exponents(config.n_x, config.order_x);
        let ys = group_exponents(config.n_y, config.order_y);
        let mut exps = Vec::with_capacity(xs.len() * ys.len());
        for xe in &xs {
            for ye in &ys {
                let mut e = [0u8; MAX_VARS];
                e[..config.n_x].copy_from_slice(xe);
                e[config.n_x..config.n_vars()].copy_from_slice(ye);
                exps.push(e);
            }
        }
        // graded order keeps the constant term at index 0
        exps.sort_by_key(|e| e.iter().map(|&v| v as usize).sum::<usize>());
        let index: HashMap<u64, usize> =
            exps.iter().enumerate().map(|(i, e)| (pack(e), i)).collect();
        let factorial = exps
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&k| (1..=k as u32).map(f64::from).product::<f64>())
                    .product()
            })
            .collect();

        let n_x = config.n_x;
        let in_bounds = |e: &Exps| {
            let ox: usize = e[..n_x].iter().map(|&v| v as usize).sum();
            let oy: usize = e[n_x..].iter().map(|&v| v as usize).sum();
            ox <= config.order_x && oy <= config.order_y
        };
        let mut row_start = Vec::with_capacity(exps.len() + 1);
        let mut products = Vec::new();
        for a in &exps {
            row_start.push(products.len());
            for (j, b) in exps.iter().enumerate() {
                let mut s = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    s[v] = a[v] + b[v];
                }
                if in_bounds(&s) {
                    products.push((j as u32, index[&pack(&s)] as u32));
                }
            }
        }
        row_start.push(products.len());

        let n_proj = (config.order_y + 1) * (config.order_x + 1);
        Lattice {
            config,
            exps,
            index,
            factorial,
            row_start,
            products,
            derivs: (0..config.n_vars()).map(|_| OnceLock::new()).collect(),
            projections: (0..n_proj).map(|_| OnceLock::new()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }

    fn lookup(&self, exps: &Exps) -> Option<usize> {
        self.index.get(&pack(exps)).copied()
    }

    fn deriv_map(&self, var: Var) -> Result<&Arc<DerivMap>, JetError> {
        let v = self
            .config
            .var_index(var)
            .ok_or(JetError::InvalidConfig(format!(
                "{var:?} not in {:?}",
                self.config
            )))?;
        let mut target_cfg = self.config;
        match var {
            Var::X(_) if self.config.order_x == 0 => {
                return Err(JetError::OrderExhausted {
                    var,
                    config: self.config,
                })
            }
            Var::Y(_) if self.config.order_y == 0 => {
                return Err(JetError::OrderExhausted {
                    var,
                    config: self.config,
                })
            }
            Var::X(_) => target_cfg.order_x -= 1,
            Var::Y(_) => target_cfg.order_y -= 1,
        }
        Ok(self.derivs[v].get_or_init(|| {
            let target = lattice(target_cfg);
            let entries = target
                .exps
                .iter()
                .enumerate()
                .map(|(ti, e)| {
                    let mut s = *e;
                    s[v] += 1;
                    let si = self.lookup(&s).expect("shifted monomial in source lattice");
                    (ti as u32, si as u32, f64::from(s[v]))
                })
                .collect();
            Arc::new(DerivMap { target, entries })
        }))
    }

    fn projection(&self, order_y: usize, order_x: usize) -> &(Arc<Lattice>, Vec<u32>) {
        let slot = order_y * (self.config.order_x + 1) + order_x;
        self.projections[slot].get_or_init(|| {
            let mut cfg = self.config;
            cfg.order_y = order_y;
            cfg.order_x = order_x;
            let target = lattice(cfg);
            let src = target
                .exps
                .iter()
                .map(|e| self.lookup(e).expect("sub-lattice monomial") as u32)
                .collect();
            (target, src)
        })
    }
}

fn lattice(config: JetConfig) -> Arc<Lattice> {
    static CACHE: OnceLock<Mutex<HashMap<JetConfig, Arc<Lattice>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("lattice cache poisoned");
    guard
        .entry(config)
        .or_insert_with(|| Arc::new(Lattice::build(config)))
        .clone()
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sqrt,
    Exp,
    Ln,
    Recip,
    Powf(f64),
    /// Inverse hyperbolic tangent, constant term in (-1, 1).
    Atanh,
    /// Inverse hyperbolic cotangent, constant term outside [-1, 1].
    Acoth,
    Atan,
    Sin,
    Cos,
}

/// Taylor coefficients `f^(k)(c) / k!` for `k = 0..=order`.
pub fn taylor_coefficients(func: Elementary, c: f64, order: usize) -> Result<Vec<f64>, JetError> {
    let mut a = vec![0.0; order + 1];
    match func {
        Elementary::Exp => {
            let e = c.exp();
            let mut fact = 1.0;
            for (k, ak) in a.iter_mut().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                *ak = e / fact;
            }
        }
        Elementary::Ln => {
            if c <= 0.0 {
                return Err(JetError::Domain {
                    func: "ln",
                    value: c,
                });
            }
            a[0] = c.ln();
            for k in 1..=order {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                a[k] = sign / (k as f64 * c.powi(k as i32));
            }
        }
        Elementary::Recip => {
            if c == 0.0 {
                return Err(JetError::ZeroDivisor);
            }
            let r = 1.0 / c;
            let mut term = r;
            for ak in a.iter_mut() {
                *ak = term;
                term *= -r;
            }
        }
        Elementary::Sqrt => return taylor_coefficients(Elementary::Powf(0.5), c, order),
        Elementary::Powf(p) => {
            if c <= 0.0 {
                return Err(JetError::Domain {
                    func: "powf",
                    value: c,
                });
            }
            a[0] = c.powf(p);
            for k in 1..=order {
                a[k] = a[k - 1] * (p - (k as f64) + 1.0) / (k as f64 * c);
            }
        }
        Elementary::Atanh | Elementary::Acoth | Elementary::Atan => {
            let (value, sign) = match func {
                Elementary::Atanh => {
                    if c.abs() >= 1.0 {
                        return Err(JetError::Domain {
                            func: "atanh",
                            value: c,
                        });
                    }
                    (c.atanh(), -1.0)
                }
                Elementary::Acoth => {
                    if c.abs() <= 1.0 {
                        return Err(JetError::Domain {
                            func: "acoth",
                            value: c,
                        });
                    }
                    (0.5 * ((c + 1.0) / (c - 1.0)).ln(), -1.0)
                }
                _ => (c.atan(), 1.0),
            };
            // derivative is 1 / (1 + sign (c + h)^2) = 1 / (s0 + s1 h + s2 h^2)
            let (s0, s1, s2) = (1.0 + sign * c * c, 2.0 * sign * c, sign);
            let mut r = vec![0.0; order.max(1)];
            r[0] = 1.0 / s0;
            for n in 1..r.len() {
                let prev2 = if n >= 2 { r[n - 2] } else { 0.0 };
                r[n] = -(s1 * r[n - 1] + s2 * prev2) / s0;
            }
            a[0] = value;
            for k in 1..=order {
                a[k] = r[k - 1] / k as f64;
            }
        }
        Elementary::Sin | Elementary::Cos => {
            let (s, co) = c.sin_cos();
            // derivatives cycle through sin, cos, -sin, -cos
            let cycle = match func {
                Elementary::Sin => [s, co, -s, -co],
                _ => [co, -s, -co, s],
            };
            let mut fact = 1.0;
            for (k, ak) in a.iter_mut().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                *ak = cycle[k % 4] / fact;
            }
        }
    }
    Ok(a)
}

/// Truncated Taylor expansion of a scalar about a base point.
#[derive(Clone)]
pub struct Jet {
    lat: Arc<Lattice>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("config", &self.lat.config)
            .field("value", &self.coeffs[0])
            .finish()
    }
}

impl Jet {
    pub fn constant(config: JetConfig, value: f64) -> Jet {
        let lat = lattice(config);
        let mut coeffs = vec![0.0; lat.len()];
        coeffs[0] = value;
        Jet { lat, coeffs }
    }

    pub fn zero(config: JetConfig) -> Jet {
        Jet::constant(config, 0.0)
    }

    /// The coordinate function `var` expanded about `value`.
    pub fn variable(config: JetConfig, var: Var, value: f64) -> Result<Jet, JetError> {
        let v = config
            .var_index(var)
            .ok_or(JetError::InvalidConfig(format!(
                "{var:?} not in {config:?}"
            )))?;
        let mut jet = Jet::constant(config, value);
        let group_order = match var {
            Var::X(_) => config.order_x,
            Var::Y(_) => config.order_y,
        };
        if group_order > 0 {
            let mut e = [0u8; MAX_VARS];
            e[v] = 1;
            let i = jet.lat.lookup(&e).expect("linear monomial");
            jet.coeffs[i] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from a closure returning the Taylor coefficient of each monomial.
    pub fn from_coefficients(config: JetConfig, mut coeff: impl FnMut(&[usize]) -> f64) -> Jet {
        let lat = lattice(config);
        let n = config.n_vars();
        let coeffs = lat
            .exps
            .iter()
            .map(|e| {
                let mi: Vec<usize> = e[..n].iter().map(|&v| v as usize).collect();
                coeff(&mi)
            })
            .collect();
        Jet { lat, coeffs }
    }

    pub fn config(&self) -> JetConfig {
        self.lat.config
    }

    /// Constant term: the function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn exps_of(&self, multi_index: &[usize]) -> Result<Exps, JetError> {
        let cfg = self.lat.config;
        let oob = || JetError::IndexOutOfBounds {
            index: multi_index.to_vec(),
            config: cfg,
        };
        if multi_index.len() != cfg.n_vars() || multi_index.iter().any(|&k| k > MAX_ORDER) {
            return Err(oob());
        }
        let mut e = [0u8; MAX_VARS];
        for (slot, &k) in e.iter_mut().zip(multi_index) {
            *slot = k as u8;
        }
        Ok(e)
    }

    /// Taylor coefficient of the monomial `multi_index` (ordered `x` then `y`).
    pub fn coefficient(&self, multi_index: &[usize]) -> Result<f64, JetError> {
        let e = self.exps_of(multi_index)?;
        let i = self.lat.lookup(&e).ok_or(JetError::IndexOutOfBounds {
            index: multi_index.to_vec(),
            config: self.lat.config,
        })?;
        Ok(self.coeffs[i])
    }

    /// Partial derivative: coefficient times the multi-index factorial.
    pub fn extract_derivative(&self, multi_index: &[usize]) -> Result<f64, JetError> {
        let e = self.exps_of(multi_index)?;
        let i = self.lat.lookup(&e).ok_or(JetError::IndexOutOfBounds {
            index: multi_index.to_vec(),
            config: self.lat.config,
        })?;
        Ok(self.coeffs[i] * self.lat.factorial[i])
    }

    /// Exact partial derivative in one variable; the result lives on the
    /// lattice with that group's order lowered by one.
    pub fn derivative(&self, var: Var) -> Result<Jet, JetError> {
        let map = self.lat.deriv_map(var)?;
        let mut coeffs = vec![0.0; map.target.len()];
        for &(t, s, fac) in &map.entries {
            coeffs[t as usize] = fac * self.coeffs[s as usize];
        }
        Ok(Jet {
            lat: map.target.clone(),
            coeffs,
        })
    }

    /// `derivative(Var::Y(i))`
    pub fn dy(&self, i: usize) -> Result<Jet, JetError> {
        self.derivative(Var::Y(i))
    }

    /// `derivative(Var::X(i))`
    pub fn dx(&self, i: usize) -> Result<Jet, JetError> {
        self.derivative(Var::X(i))
    }

    /// Drops monomials above the given orders.
    pub fn truncate(&self, order_y: usize, order_x: usize) -> Result<Jet, JetError> {
        let cfg = self.lat.config;
        if order_y > cfg.order_y || order_x > cfg.order_x {
            return Err(JetError::InvalidConfig(format!(
                "cannot raise {cfg:?} to orders y={order_y}, x={order_x}"
            )));
        }
        if order_y == cfg.order_y && order_x == cfg.order_x {
            return Ok(self.clone());
        }
        let (target, src) = self.lat.projection(order_y, order_x);
        let coeffs = src.iter().map(|&s| self.coeffs[s as usize]).collect();
        Ok(Jet {
            lat: target.clone(),
            coeffs,
        })
    }

    fn aligned<'a>(a: &'a Jet, b: &'a Jet) -> Result<(Cow<'a, Jet>, Cow<'a, Jet>), JetError> {
        if Arc::ptr_eq(&a.lat, &b.lat) {
            return Ok((Cow::Borrowed(a), Cow::Borrowed(b)));
        }
        let (ca, cb) = (a.lat.config, b.lat.config);
        if !ca.same_vars(&cb) {
            return Err(JetError::ConfigMismatch(ca, cb));
        }
        let oy = ca.order_y.min(cb.order_y);
        let ox = ca.order_x.min(cb.order_x);
        let ta = if (ca.order_y, ca.order_x) == (oy, ox) {
            Cow::Borrowed(a)
        } else {
            Cow::Owned(a.truncate(oy, ox)?)
        };
        let tb = if (cb.order_y, cb.order_x) == (oy, ox) {
            Cow::Borrowed(b)
        } else {
            Cow::Owned(b.truncate(oy, ox)?)
        };
        Ok((ta, tb))
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        let (a, b) = Jet::aligned(self, other)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(p, q)| p + q).collect();
        Ok(Jet {
            lat: a.lat.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        let (a, b) = Jet::aligned(self, other)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(p, q)| p - q).collect();
        Ok(Jet {
            lat: a.lat.clone(),
            coeffs,
        })
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        let (a, b) = Jet::aligned(self, other)?;
        let lat = &a.lat;
        let mut out = vec![0.0; lat.len()];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for &(j, k) in &lat.products[lat.row_start[i]..lat.row_start[i + 1]] {
                out[k as usize] += ai * b.coeffs[j as usize];
            }
        }
        Ok(Jet {
            lat: lat.clone(),
            coeffs: out,
        })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.try_mul(&other.recip()?)
    }

    /// Division; fails when the divisor's constant term is zero.
    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.try_div(other)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            lat: self.lat.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn square(&self) -> Jet {
        self * self
    }

    /// Composes an elementary function with this jet.
    pub fn apply(&self, func: Elementary) -> Result<Jet, JetError> {
        let order = self.lat.config.max_total_order();
        let a = taylor_coefficients(func, self.value(), order)?;
        let mut d = self.clone();
        d.coeffs[0] = 0.0;
        let mut r = Jet::constant(self.lat.config, a[order]);
        for k in (0..order).rev() {
            r = &r * &d;
            r.coeffs[0] += a[k];
        }
        Ok(r)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Sqrt)
    }
    pub fn exp(&self) -> Jet {
        self.apply(Elementary::Exp).expect("exp is entire")
    }
    pub fn ln(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Ln)
    }
    pub fn recip(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Recip)
    }
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        self.apply(Elementary::Powf(p))
    }
    pub fn atanh(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Atanh)
    }
    pub fn acoth(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Acoth)
    }
    pub fn atan(&self) -> Jet {
        self.apply(Elementary::Atan).expect("atan is entire")
    }
    pub fn sin(&self) -> Jet {
        self.apply(Elementary::Sin).expect("sin is entire")
    }
    pub fn cos(&self) -> Jet {
        self.apply(Elementary::Cos).expect("cos is entire")
    }

    /// Real antiderivative of `1/(1 - z^2)`: `atanh` inside (-1, 1), `acoth` outside.
    pub fn atanh_real(&self) -> Result<Jet, JetError> {
        if self.value().abs() < 1.0 {
            self.atanh()
        } else {
            self.acoth()
        }
    }

    /// Treats `self` as a Taylor polynomial in `args.len()` variables about
    /// the base values of `args` and substitutes the jets `args`.
    pub fn compose(&self, args: &[Jet]) -> Result<Jet, JetError> {
        let outer = self.lat.config;
        if args.len() != outer.n_vars() || args.is_empty() {
            return Err(JetError::InvalidConfig(format!(
                "compose expects {} arguments, got {}",
                outer.n_vars(),
                args.len()
            )));
        }
        // bring all arguments to a common lattice
        let mut common = args[0].clone();
        for a in &args[1..] {
            let (c, _) = Jet::aligned(&common, a)?;
            common = c.into_owned();
        }
        let inner = common.lat.config;
        let deltas: Vec<Jet> = args
            .iter()
            .map(|a| {
                let mut d = a.truncate(inner.order_y, inner.order_x)?;
                d.coeffs[0] = 0.0;
                Ok(d)
            })
            .collect::<Result<_, JetError>>()?;
        let max_pow = outer.max_total_order().min(inner.max_total_order());
        let powers: Vec<Vec<Jet>> = deltas
            .iter()
            .map(|d| {
                let mut p = vec![Jet::constant(inner, 1.0)];
                for k in 1..=max_pow {
                    let next = &p[k - 1] * d;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut out = Jet::zero(inner);
        for (i, e) in self.lat.exps.iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            let total: usize = e.iter().map(|&v| v as usize).sum();
            if total > max_pow {
                continue;
            }
            let mut term: Option<Jet> = None;
            for (v, &k) in e[..outer.n_vars()].iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let p = &powers[v][k as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => &t * p,
                });
            }
            match term {
                None => out.coeffs[0] += c,
                Some(t) => out += &t.scale(c),
            }
        }
        Ok(out)
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.lat.config == other.lat.config && self.coeffs == other.coeffs
    }
}

// Operator impls panic only on a variable-count mismatch, which is a
// programming error; order mismatches truncate to the common lattice.
macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$try(rhs)
                    .expect("jet operands over different variables")
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self)
                    .$try(&rhs)
                    .expect("jet operands over different variables")
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self)
                    .$try(rhs)
                    .expect("jet operands over different variables")
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$try(&rhs)
                    .expect("jet operands over different variables")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_scalar(-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if Arc::ptr_eq(&self.lat, &rhs.lat) {
            for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *a += b;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}
