//! Least-squares Lorentzian fits of dips and peaks.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{storage::Owned, DVector, Dyn, OMatrix, Vector4, U4};

use crate::error::{QwbError, Result};

/// y(x) = tail + (center_value − tail) · (w²/4) / ((x − center)² + w²/4).
///
/// `width` is the full width at half depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    pub width: f64,
    pub center_value: f64,
    pub tail_value: f64,
}

impl Lorentzian {
    pub fn eval(&self, x: f64) -> f64 {
        let q = self.width * self.width / 4.0;
        let d = x - self.center;
        self.tail_value + (self.center_value - self.tail_value) * q / (d * d + q)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LorentzFit {
    pub model: Lorentzian,
    pub rms_residual: f64,
    pub evaluations: usize,
}

/// Gradient tolerance of the Levenberg–Marquardt iteration.
pub const FIT_GTOL: f64 = 1e-10;

/// Problem in scaled coordinates u = (x − x₀)/s, v = y/t so that all four
/// parameters are of order one.
struct Problem {
    u: Vec<f64>,
    v: Vec<f64>,
    params: Vector4<f64>,
}

impl Problem {
    fn model(p: &Vector4<f64>, u: f64) -> (f64, [f64; 4]) {
        let (c, w, a, b) = (p[0], p[1], p[2], p[3]);
        let q = w * w / 4.0;
        let d = u - c;
        let den = d * d + q;
        let l = q / den;
        let val = b + (a - b) * l;
        let dl_dc = 2.0 * q * d / (den * den);
        let dl_dw = (w / 2.0) * (d * d) / (den * den);
        (val, [(a - b) * dl_dc, (a - b) * dl_dw, l, 1.0 - l])
    }
}

impl LeastSquaresProblem<f64, Dyn, U4> for Problem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, p: &Vector4<f64>) {
        self.params = *p;
    }

    fn params(&self) -> Vector4<f64> {
        self.params
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        Some(DVector::from_iterator(
            self.u.len(),
            self.u.iter().zip(&self.v).map(|(&u, &v)| Self::model(&self.params, u).0 - v),
        ))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U4>> {
        let mut j = OMatrix::<f64, Dyn, U4>::zeros(self.u.len());
        for (r, &u) in self.u.iter().enumerate() {
            let (_, g) = Self::model(&self.params, u);
            for k in 0..4 {
                j[(r, k)] = g[k];
            }
        }
        Some(j)
    }
}

/// Fits a Lorentzian to samples, starting from `initial`.
pub fn fit_lorentzian(xs: &[f64], ys: &[f64], initial: Lorentzian) -> Result<LorentzFit> {
    if xs.len() != ys.len() || xs.len() < 5 {
        return Err(QwbError::Fit("need at least five matching samples".into()));
    }
    if !(initial.width > 0.0) {
        return Err(QwbError::Fit("initial width must be positive".into()));
    }
    let x0 = initial.center;
    let s = initial.width;
    let t = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
    let problem = Problem {
        u: xs.iter().map(|x| (x - x0) / s).collect(),
        v: ys.iter().map(|y| y / t).collect(),
        params: Vector4::new(0.0, 1.0, initial.center_value / t, initial.tail_value / t),
    };
    let (solved, report) =
        LevenbergMarquardt::new().with_gtol(FIT_GTOL).with_ftol(1e-14).with_xtol(1e-14).minimize(problem);
    if !report.termination.was_successful() {
        return Err(QwbError::Fit(format!("{:?}", report.termination)));
    }
    let p = solved.params;
    let model =
        Lorentzian { center: x0 + p[0] * s, width: p[1].abs() * s, center_value: p[2] * t, tail_value: p[3] * t };
    let rms = (xs.iter().zip(ys).map(|(x, y)| (model.eval(*x) - y).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(LorentzFit { model, rms_residual: rms, evaluations: report.number_of_evaluations })
}

/// Starting point for a dip (or, with `peak`, a peak) read off the samples:
/// the extreme sample, the larger (smaller) end value and the span of
/// samples past half depth.
pub fn initial_guess(xs: &[f64], ys: &[f64], peak: bool) -> Option<Lorentzian> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    let sign = if peak { -1.0 } else { 1.0 };
    let i = crate::optimize::argmin(&ys.iter().map(|y| sign * y).collect::<Vec<_>>());
    let (first, last) = (ys[0], ys[ys.len() - 1]);
    let tail = if peak { first.min(last) } else { first.max(last) };
    let half = 0.5 * (tail + ys[i]);
    let inside: Vec<f64> = xs.iter().zip(ys).filter(|(_, y)| sign * **y <= sign * half).map(|(x, _)| *x).collect();
    let spacing = (xs[xs.len() - 1] - xs[0]).abs() / (xs.len() - 1) as f64;
    let width = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => spacing,
    };
    Some(Lorentzian { center: xs[i], width, center_value: ys[i], tail_value: tail })
}

/// [`fit_lorentzian`] from [`initial_guess`].
pub fn fit_dip(xs: &[f64], ys: &[f64], peak: bool) -> Result<LorentzFit> {
    let start = initial_guess(xs, ys, peak).ok_or_else(|| QwbError::Fit("need at least three samples".into()))?;
    fit_lorentzian(xs, ys, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::linspace;

    #[test]
    fn recovers_exact_dip() {
        let truth = Lorentzian { center: 0.9875, width: 0.0242, center_value: 0.2, tail_value: 1.0 };
        let xs = linspace(0.9875 - 0.121, 0.9875 + 0.121, 201);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(x)).collect();
        let start = Lorentzian { center: 0.985, width: 0.03, center_value: 0.3, tail_value: 0.9 };
        let fit = fit_lorentzian(&xs, &ys, start).unwrap();
        assert!((fit.model.center - truth.center).abs() < 1e-9);
        assert!((fit.model.width - truth.width).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-10);
    }

    #[test]
    fn recovers_small_peak() {
        let truth = Lorentzian { center: 1.0125, width: 0.0242, center_value: 0.0188, tail_value: 1.17e-4 };
        let xs = linspace(0.9, 1.1, 101);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(x)).collect();
        let start = Lorentzian { center: 1.01, width: 0.02, center_value: 0.015, tail_value: 0.0 };
        let fit = fit_lorentzian(&xs, &ys, start).unwrap();
        assert!((fit.model.width / truth.width - 1.0).abs() < 1e-8);
        assert!((fit.model.tail_value / truth.tail_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn half_width_point() {
        let l = Lorentzian { center: 0.0, width: 2.0, center_value: 0.2, tail_value: 1.0 };
        assert!((l.eval(1.0) - 0.6).abs() < 1e-15);
    }
}
