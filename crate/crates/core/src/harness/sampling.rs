//! Sample placement: seeded uniform base points and low-discrepancy
//! directions inside the family's cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FinslerMetric;
use crate::registry::Cone;

/// A base point with its accepted unit directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSamples {
    pub x: Vec<f64>,
    pub dirs: Vec<Vec<f64>>,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Attempts per requested direction before giving up.
const TRIES_PER_DIRECTION: usize = 64;

fn van_der_corput(mut k: usize, base: usize) -> f64 {
    let mut v = 0.0;
    let mut denom = 1.0;
    while k > 0 {
        denom *= base as f64;
        v += (k % base) as f64 / denom;
        k /= base;
    }
    v
}

/// The `k`-th direction of the cone's low-discrepancy sequence.
pub fn cone_direction(cone: &Cone, k: usize) -> Vec<f64> {
    match *cone {
        Cone::Arc { theta: (lo, hi) } => {
            let t = lo + (hi - lo) * (0.5 + k as f64 * GOLDEN).fract();
            vec![t.cos(), t.sin()]
        }
        Cone::Cap {
            theta: (tlo, thi),
            phi: (plo, phi),
        } => {
            let t = tlo + (thi - tlo) * van_der_corput(k + 1, 2);
            let p = plo + (phi - plo) * van_der_corput(k + 1, 3);
            vec![t.cos(), t.sin() * p.cos(), t.sin() * p.sin()]
        }
    }
}

/// Places `count` base points uniformly in `x_box` (ChaCha8 seeded by
/// `seed`) and `directions` cone directions at each with margin at least
/// `margin`.
pub fn place_samples(
    metric: &dyn FinslerMetric,
    x_box: &[(f64, f64)],
    cone: &Cone,
    count: usize,
    directions: usize,
    seed: u64,
    margin: f64,
) -> Result<Vec<PointSamples>> {
    if count == 0 || directions == 0 {
        return Err(Error::Config("sample counts must be positive".into()));
    }
    let n = metric.dim();
    if x_box.len() != n {
        return Err(Error::Config(format!(
            "x_box has {} intervals, the metric has dimension {n}",
            x_box.len()
        )));
    }
    let cone_dim = match cone {
        Cone::Arc { .. } => 2,
        Cone::Cap { .. } => 3,
    };
    if cone_dim != n {
        return Err(Error::Config(format!(
            "cone is {cone_dim}-dimensional, the metric has dimension {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x: Vec<f64> = x_box
            .iter()
            .map(|&(lo, hi)| {
                if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                }
            })
            .collect();
        let mut dirs = Vec::with_capacity(directions);
        let mut k = 0;
        while dirs.len() < directions {
            if k >= TRIES_PER_DIRECTION * directions {
                return Err(Error::Sampling(format!(
                    "placed {} of {directions} directions at x = {x:?} with margin {margin:e}",
                    dirs.len()
                )));
            }
            let y = cone_direction(cone, k);
            k += 1;
            if metric.domain_margin(&x, &y) >= margin {
                dirs.push(y);
            }
        }
        out.push(PointSamples { x, dirs });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Euclidean, Randers};
    use crate::params::XFunction;

    #[test]
    fn deterministic_and_inside_the_box() {
        let m = Euclidean::new(2);
        let cone = Cone::Arc {
            theta: (0.0, std::f64::consts::TAU),
        };
        let b = [(-0.5, 0.5), (0.0, 1.0)];
        let a = place_samples(&m, &b, &cone, 8, 5, 3, 1e-3).unwrap();
        let c = place_samples(&m, &b, &cone, 8, 5, 3, 1e-3).unwrap();
        assert_eq!(a, c);
        assert_ne!(a, place_samples(&m, &b, &cone, 8, 5, 4, 1e-3).unwrap());
        for p in &a {
            assert!((-0.5..0.5).contains(&p.x[0]) && (0.0..1.0).contains(&p.x[1]));
            assert_eq!(p.dirs.len(), 5);
            for y in &p.dirs {
                assert!((y[0].hypot(y[1]) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cap_directions_are_unit_and_spread() {
        let cone = Cone::Cap {
            theta: (0.1, 1.45),
            phi: (0.0, std::f64::consts::TAU),
        };
        let ys: Vec<Vec<f64>> = (0..16).map(|k| cone_direction(&cone, k)).collect();
        for y in &ys {
            let n: f64 = y.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-14);
            let theta = y[0].acos();
            assert!((0.1..=1.45).contains(&theta));
        }
        let distinct = ys.windows(2).all(|w| w[0] != w[1]);
        assert!(distinct);
    }

    #[test]
    fn exhausted_domain_is_a_sampling_error() {
        // no direction reaches a margin of 10
        let m = Randers::new(2, XFunction::constant(0.3));
        let cone = Cone::Arc {
            theta: (0.0, std::f64::consts::TAU),
        };
        let r = place_samples(&m, &[(0.0, 0.1); 2], &cone, 1, 4, 0, 10.0);
        assert!(matches!(r, Err(Error::Sampling(_))));
    }
}
