//! Central finite differences, used only as an independent oracle for jets.

use crate::error::Result;

/// `(offset in steps, weight)` pairs for a central difference of order `m`,
/// before division by `h^m`.
fn stencil(m: usize) -> &'static [(i32, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => panic!("stencils are tabulated up to order 3"),
    }
}

fn product_stencil<F>(f: &F, point: &[f64], mi: &[usize], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let active: Vec<usize> = (0..mi.len()).filter(|&i| mi[i] > 0).collect();
    let order: usize = mi.iter().sum();
    let mut acc = 0.0;
    let mut shifted = point.to_vec();
    // odometer over the stencils of the active variables
    let sizes: Vec<usize> = active.iter().map(|&i| stencil(mi[i]).len()).collect();
    let mut pos = vec![0usize; active.len()];
    loop {
        let mut w = 1.0;
        for (slot, &var) in active.iter().enumerate() {
            let (off, wt) = stencil(mi[var])[pos[slot]];
            shifted[var] = point[var] + off as f64 * h;
            w *= wt;
        }
        acc += w * f(&shifted)?;
        let mut k = 0;
        loop {
            if k == active.len() {
                return Ok(acc / h.powi(order as i32));
            }
            pos[k] += 1;
            if pos[k] < sizes[k] {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

/// Mixed partial derivative `∂^mi f(point)` of total order at most 3.
///
/// Orders 1 and 2 use step `1e-4·max(1, |point|)`. Order 3 uses a step 100
/// times larger with one Richardson extrapolation, since a third difference
/// at `1e-4` loses about twelve digits to cancellation.
pub fn partial<F>(f: F, point: &[f64], mi: &[usize]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let order: usize = mi.iter().sum();
    assert!(
        order <= 3 && mi.iter().all(|&m| m <= 3),
        "orders up to 3 only"
    );
    let scale = point.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if order == 0 {
        return f(point);
    }
    if order < 3 {
        return product_stencil(&f, point, mi, 1e-4 * scale);
    }
    let h = 1e-2 * scale;
    let coarse = product_stencil(&f, point, mi, h)?;
    let fine = product_stencil(&f, point, mi, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// All multi-indices over `n` variables with total order in `1..=max_order`.
pub fn multi_indices(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            if cur.iter().sum::<usize>() > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=left {
            cur[i] = m;
            rec(i + 1, left - m, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, max_order, &mut cur, &mut out);
    out.sort_by_key(|m| m.iter().sum::<usize>());
    out
}
