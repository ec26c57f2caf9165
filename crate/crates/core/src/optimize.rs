//! One-dimensional maximization on a logarithmic axis.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// Set when the coarse scan peaked at a bracket end, in which case `x`
    /// is that end, or found several local maxima, in which case only the
    /// highest one is refined.
    pub warning: bool,
    pub evaluations: usize,
}

/// Maximizes `f` over `[lo, hi]` (both positive): a scan over `grid_points`
/// logarithmically spaced points, then golden-section search in `ln x`
/// around the best one until the bracket is narrower than `rel_tol`
/// relative.
pub fn maximize_log<F>(mut f: F, lo: f64, hi: f64, grid_points: usize, rel_tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    if grid_points < 3 {
        return Err(invalid("the coarse scan needs at least 3 points"));
    }
    if !(rel_tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..grid_points).map(|i| a + (b - a) * i as f64 / (grid_points - 1) as f64).collect();
    let ys = xs.iter().map(|&u| f(u.exp())).collect::<Result<Vec<f64>>>()?;
    let mut evaluations = grid_points;
    let best = (0..grid_points).fold(0, |m, i| if ys[i] > ys[m] { i } else { m });
    let interior_maxima = (1..grid_points - 1).filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]).count();
    if best == 0 || best == grid_points - 1 {
        return Ok(Maximum { x: xs[best].exp(), value: ys[best], warning: true, evaluations });
    }
    let warning = interior_maxima > 1;

    let (mut l, mut r) = (xs[best - 1], xs[best + 1]);
    let tol = rel_tol.ln_1p();
    let mut c = r - INV_PHI * (r - l);
    let mut d = l + INV_PHI * (r - l);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    evaluations += 2;
    while r - l > tol {
        if fc >= fd {
            r = d;
            d = c;
            fd = fc;
            c = r - INV_PHI * (r - l);
            fc = f(c.exp())?;
        } else {
            l = c;
            c = d;
            fc = fd;
            d = l + INV_PHI * (r - l);
            fd = f(d.exp())?;
        }
        evaluations += 1;
    }
    let (x, value) = [(c, fc), (d, fd), (xs[best], ys[best])]
        .into_iter()
        .fold((c, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(Maximum { x: x.exp(), value, warning, evaluations })
}
