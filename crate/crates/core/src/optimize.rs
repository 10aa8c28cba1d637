//! One-dimensional extremum search: grid seeding, golden-section refinement
//! and a final three-point parabolic step.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|i| if i == points - 1 { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on [a, b].
pub fn golden_section<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { Extremum { x: c, value: fc } } else { Extremum { x: d, value: fd } })
}

/// Vertex of the parabola through three points, if it opens upward.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if !(curvature > 0.0) {
        return None;
    }
    let v = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature);
    v.is_finite().then_some(v)
}

/// A refined minimum together with the seeding grid and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub best: Extremum,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Minimum of `f` over [lo, hi], seeded by a `points`-grid.
///
/// The best grid point's neighbours bracket a golden-section search, which is
/// polished by one parabolic step on the final three-point stencil.
pub fn refine_minimum<F>(f: F, lo: f64, hi: f64, points: usize) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(refine_minimum_grid(f, lo, hi, points)?.best)
}

/// [`refine_minimum`] that also returns the sampled grid.
pub fn refine_minimum_grid<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<GridSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    if hi <= lo || points < 3 {
        let value = f(lo)?;
        return Ok(GridSearch { best: Extremum { x: lo, value }, xs: vec![lo], ys: vec![value] });
    }
    let xs = linspace(lo, hi, points);
    let mut ys = Vec::with_capacity(points);
    for &x in &xs {
        ys.push(f(x)?);
    }
    let i = argmin(&ys);
    let best_grid = Extremum { x: xs[i], value: ys[i] };
    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(points - 1)];
    let tol = 1e-7 * (b - a).abs().max(1e-300);
    let g = golden_section(&mut f, a, b, tol)?;
    let h = 0.5 * tol.max(1e-9 * g.x.abs().max(1e-300));
    let mut best = if g.value < best_grid.value { g } else { best_grid };
    if g.x - h > a && g.x + h < b {
        let y = [f(g.x - h)?, g.value, f(g.x + h)?];
        if let Some(v) = parabola_vertex([g.x - h, g.x, g.x + h], y) {
            if (v - g.x).abs() <= h {
                let fv = f(v)?;
                if fv <= best.value {
                    best = Extremum { x: v, value: fv };
                }
            }
        }
    }
    Ok(GridSearch { best, xs, ys })
}

/// Maximum counterpart of [`refine_minimum`].
pub fn refine_maximum<F>(mut f: F, lo: f64, hi: f64, points: usize) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let e = refine_minimum(|x| f(x).map(|v| -v), lo, hi, points)?;
    Ok(Extremum { x: e.x, value: -e.value })
}

pub fn argmin(ys: &[f64]) -> usize {
    let mut best = 0;
    for (i, y) in ys.iter().enumerate() {
        if *y < ys[best] {
            best = i;
        }
    }
    best
}

pub fn argmax(ys: &[f64]) -> usize {
    let mut best = 0;
    for (i, y) in ys.iter().enumerate() {
        if *y > ys[best] {
            best = i;
        }
    }
    best
}

/// Indices of interior strict local maxima of a sampled curve.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1)).filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.95, 1.03, 201);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.95);
        assert_eq!(g[200], 1.03);
    }

    #[test]
    fn finds_narrow_lorentzian_dip() {
        let (c, w) = (0.98731, 1e-4);
        let f = |x: f64| Ok(1.0 - 0.8 * (w * w / 4.0) / ((x - c) * (x - c) + w * w / 4.0));
        let e = refine_minimum(f, 0.9, 1.1, 201).unwrap();
        assert!((e.x - c).abs() < 1e-8, "{}", e.x);
    }

    #[test]
    fn maximum_of_parabola() {
        let e = refine_maximum(|x: f64| Ok(3.0 - (x - 0.3).powi(2)), -1.0, 1.0, 21).unwrap();
        assert!((e.x - 0.3).abs() < 1e-7);
        assert!((e.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_window_returns_endpoint() {
        let e = refine_minimum(|x: f64| Ok(x * x), 0.5, 0.5, 201).unwrap();
        assert_eq!(e.x, 0.5);
        assert_eq!(e.value, 0.25);
    }

    #[test]
    fn local_maxima_of_double_peak() {
        let ys = [0.0, 1.0, 0.5, 0.2, 0.7, 0.3];
        assert_eq!(local_maxima(&ys), vec![1, 4]);
    }
}
