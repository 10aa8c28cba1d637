//! Quantum and classical Fisher information of the steady state with respect
//! to Jx, and the search for the QFI maxima around the dip.

use crate::bridge::BridgeModel;
use crate::error::{QwbError, Result};
use crate::linalg::{frobenius, hermitian_eigen, identity, kron, trace, Operator};
use crate::model::QwbParams;
use crate::optimize::{refine_maximum, Extremum};
use crate::ratemodel::derived_scales;
use crate::spinops::{embed_local, excited_projector, interface_states, SiteLayout};

/// Eigenvalue pairs with p_k + p_l at or below this are left out of the QFI sum.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Outcome probabilities closer than this to 0 or 1 drop their CFI term.
pub const CFI_EPS: f64 = 1e-12;
/// Relative step/half-step disagreement above which a QFI is flagged.
pub const RICHARDSON_WARN: f64 = 0.05;

/// max(1e-4·Λ, 1e-7·J); falls back to 1e-7·J where Λ is singular.
pub fn default_fd_step(p: &QwbParams) -> f64 {
    let floor = 1e-7 * p.j.abs().max(f64::MIN_POSITIVE);
    match derived_scales(p).lambda.value() {
        Some(l) => (1e-4 * l).max(floor),
        None => floor,
    }
}

/// ρ_ss at Jx with its central-difference derivative.
#[derive(Debug, Clone)]
pub struct SteadyDerivative {
    pub jx: f64,
    pub step: f64,
    pub rho: Operator,
    pub drho: Operator,
}

pub fn steady_derivative<M: BridgeModel + ?Sized>(model: &M, jx: f64, step: f64) -> Result<SteadyDerivative> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(QwbError::param("fd_step", "must be positive and finite"));
    }
    let rho = model.steady_state_at(jx)?.rho.into_matrix();
    let plus = model.steady_state_at(jx + step)?.rho.into_matrix();
    let minus = model.steady_state_at(jx - step)?.rho.into_matrix();
    let drho = (plus - minus).mapv(|z| z / (2.0 * step));
    Ok(SteadyDerivative { jx, step, rho, drho })
}

/// 2 Σ |⟨k|∂ρ|l⟩|²/(p_k + p_l) over eigenpairs of ρ with p_k + p_l > [`EIGEN_FLOOR`].
pub fn qfi_from_states(rho: &Operator, drho: &Operator) -> Result<f64> {
    let (p, v) = hermitian_eigen(rho)?;
    let vd = v.t().mapv(|z| z.conj());
    let d = vd.dot(drho).dot(&v);
    let n = p.len();
    let mut f = 0.0;
    for k in 0..n {
        for l in 0..n {
            let s = p[k] + p[l];
            if s > EIGEN_FLOOR {
                f += d[(k, l)].norm_sqr() / s;
            }
        }
    }
    Ok(2.0 * f)
}

/// Two-outcome CFI (∂P)²/P + (∂P)²/(1 − P) with P = tr(Π ρ).
pub fn cfi_from_states(rho: &Operator, drho: &Operator, projector: &Operator) -> f64 {
    let prob = trace(&projector.dot(rho)).re;
    let dp = trace(&projector.dot(drho)).re;
    let mut i = 0.0;
    if prob > CFI_EPS {
        i += dp * dp / prob;
    }
    if 1.0 - prob > CFI_EPS {
        i += dp * dp / (1.0 - prob);
    }
    i
}

fn check_projector(projector: &Operator, dim: usize) -> Result<()> {
    if projector.dim() != (dim, dim) {
        return Err(QwbError::Dimension(format!("projector {:?} against dimension {dim}", projector.dim())));
    }
    let defect = frobenius(&(projector.dot(projector) - projector));
    if defect > 1e-10 {
        return Err(QwbError::param("projector", format!("not idempotent, defect {defect:e}")));
    }
    Ok(())
}

/// A QFI value with its step-halving check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiEstimate {
    pub value: f64,
    pub step: f64,
    pub half_step_value: f64,
    pub richardson_rel: f64,
    pub warning: bool,
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// QFI at Jx from central differences at `step` (default [`default_fd_step`]),
/// checked against step/2.
pub fn qfi<M: BridgeModel + ?Sized>(model: &M, jx: f64, step: Option<f64>) -> Result<QfiEstimate> {
    let h = step.unwrap_or_else(|| default_fd_step(&model.params().with_jx(jx)));
    let full = steady_derivative(model, jx, h)?;
    let value = qfi_from_states(&full.rho, &full.drho)?;
    let half = steady_derivative(model, jx, h / 2.0)?;
    let half_step_value = qfi_from_states(&half.rho, &half.drho)?;
    let richardson_rel = relative_change(value, half_step_value);
    Ok(QfiEstimate { value, step: h, half_step_value, richardson_rel, warning: richardson_rel > RICHARDSON_WARN })
}

/// QFI at a fixed step with no convergence check.
pub fn qfi_at_step<M: BridgeModel + ?Sized>(model: &M, jx: f64, step: f64) -> Result<f64> {
    let d = steady_derivative(model, jx, step)?;
    qfi_from_states(&d.rho, &d.drho)
}

pub fn cfi_projective<M: BridgeModel + ?Sized>(
    model: &M,
    jx: f64,
    projector: &Operator,
    step: Option<f64>,
) -> Result<f64> {
    let h = step.unwrap_or_else(|| default_fd_step(&model.params().with_jx(jx)));
    let d = steady_derivative(model, jx, h)?;
    check_projector(projector, d.rho.nrows())?;
    Ok(cfi_from_states(&d.rho, &d.drho, projector))
}

/// |E−⟩⟨E−| on spins 2 and 3, identity elsewhere.
pub fn e_minus_projector(p: &QwbParams, layout: &SiteLayout) -> Result<Operator> {
    if layout.n_sites() < 3 || !(layout.is_qubit(1) && layout.is_qubit(2)) {
        return Err(QwbError::Dimension("spins 2 and 3 must be qubits".into()));
    }
    let em = interface_states(p.h2, p.j23)?.minus.projector();
    let rest: usize = layout.local_dims()[3..].iter().product();
    Ok(kron(&kron(&identity(layout.local_dims()[0]), &em), &identity(rest)))
}

/// |↑⟩⟨↑| on one site.
pub fn up_projector(site: usize, layout: &SiteLayout) -> Result<Operator> {
    embed_local(&excited_projector(), site, layout)
}

/// The projectors compared against the QFI: |E−⟩, |↑⟩ on spin 2, and identity.
pub fn standard_projectors(p: &QwbParams, layout: &SiteLayout) -> Result<Vec<(String, Operator)>> {
    Ok(vec![
        ("E_minus".to_string(), e_minus_projector(p, layout)?),
        ("up_2".to_string(), up_projector(1, layout)?),
        ("identity".to_string(), identity(layout.total_dim())),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    pub jx: f64,
    pub qfi: f64,
    pub cfi: Vec<(String, f64)>,
    /// 1/qfi; infinite when the QFI vanishes.
    pub cramer_rao_var: f64,
    pub fd_step: f64,
    pub richardson_rel: f64,
    pub richardson_warning: bool,
}

impl FisherReport {
    pub fn cfi(&self, label: &str) -> Option<f64> {
        self.cfi.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }
}

pub fn fisher_report<M: BridgeModel + ?Sized>(
    model: &M,
    jx: f64,
    projectors: &[(String, Operator)],
    step: Option<f64>,
) -> Result<FisherReport> {
    let est = qfi(model, jx, step)?;
    let d = steady_derivative(model, jx, est.step)?;
    let mut cfi = Vec::with_capacity(projectors.len());
    for (label, op) in projectors {
        check_projector(op, d.rho.nrows())?;
        cfi.push((label.clone(), cfi_from_states(&d.rho, &d.drho, op)));
    }
    Ok(FisherReport {
        jx,
        qfi: est.value,
        cfi,
        cramer_rao_var: 1.0 / est.value,
        fd_step: est.step,
        richardson_rel: est.richardson_rel,
        richardson_warning: est.warning,
    })
}

/// Both QFI maxima around the dip and the larger of the two.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxQfi {
    pub left: Option<Extremum>,
    pub right: Option<Extremum>,
    pub best: Extremum,
    pub richardson_rel: f64,
    pub warnings: Vec<String>,
}

/// Grid-seeded maximization of the QFI over Jx in [lo, hi], split at Jx,0.
pub fn max_qfi_search<M: BridgeModel + ?Sized>(model: &M, lo: f64, hi: f64, points: usize) -> Result<MaxQfi> {
    let p = *model.params();
    let step = default_fd_step(&p);
    let scales = derived_scales(&p);
    let mut warnings = Vec::new();
    if let Some(l) = scales.lambda.value() {
        let outside = (lo - scales.jx0).max(scales.jx0 - hi);
        if outside > 10.0 * l {
            warnings.push(format!("window [{lo}, {hi}] misses Jx0 = {} by more than 10 Lambda", scales.jx0));
        }
    }
    let f = |x: f64| qfi_at_step(model, x, step);
    if hi <= lo {
        let best = Extremum { x: lo, value: f(lo)? };
        return Ok(MaxQfi { left: None, right: None, best, richardson_rel: 0.0, warnings });
    }
    let (left, right) = if scales.jx0 > lo && scales.jx0 < hi {
        (Some(refine_maximum(f, lo, scales.jx0, points)?), Some(refine_maximum(f, scales.jx0, hi, points)?))
    } else {
        (Some(refine_maximum(f, lo, hi, points)?), None)
    };
    let best = match (left, right) {
        (Some(a), Some(b)) => {
            if b.value > a.value {
                b
            } else {
                a
            }
        }
        (Some(a), None) => a,
        _ => unreachable!(),
    };
    let est = qfi(model, best.x, Some(step))?;
    if est.warning {
        warnings
            .push(format!("finite-difference QFI changed by {:.2}% on halving the step", 100.0 * est.richardson_rel));
    }
    Ok(MaxQfi { left, right, best, richardson_rel: est.richardson_rel, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::FourSpin;
    use crate::linalg::re;
    use crate::ratemodel::{n_function, qfi_approx};
    use ndarray::Array2;

    fn diag(p: &[f64]) -> Operator {
        let mut m = Array2::zeros((p.len(), p.len()));
        for (i, v) in p.iter().enumerate() {
            m[(i, i)] = re(*v);
        }
        m
    }

    #[test]
    fn diagonal_family_reduces_to_classical_fisher() {
        // p(θ) ∝ exp(θ·c_k) at θ = 0.3
        let c = [0.0, 1.0, -0.5, 2.0];
        let t: f64 = 0.3;
        let w: Vec<f64> = c.iter().map(|ck| (t * ck).exp()).collect();
        let z: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / z).collect();
        let mean: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        let dp: Vec<f64> = p.iter().zip(&c).map(|(pk, ck)| pk * (ck - mean)).collect();
        let expected: f64 = dp.iter().zip(&p).map(|(d, pk)| d * d / pk).sum();
        let got = qfi_from_states(&diag(&p), &diag(&dp)).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn pure_state_family() {
        // |ψ(θ)⟩ = cos θ|0⟩ + sin θ|1⟩ has QFI 4
        let t: f64 = 0.4;
        let (c, s) = (t.cos(), t.sin());
        let rho = Array2::from_shape_vec((2, 2), vec![re(c * c), re(c * s), re(c * s), re(s * s)]).unwrap();
        let drho = Array2::from_shape_vec(
            (2, 2),
            vec![re(-2.0 * c * s), re(c * c - s * s), re(c * c - s * s), re(2.0 * c * s)],
        )
        .unwrap();
        assert!((qfi_from_states(&rho, &drho).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cfi_edge_cases() {
        let rho = diag(&[1.0, 0.0]);
        let drho = diag(&[0.0, 0.0]);
        assert_eq!(cfi_from_states(&rho, &drho, &identity(2)), 0.0);
        let drho = diag(&[-0.1, 0.1]);
        // P = 0 on the second outcome: only the well-defined term survives
        assert!((cfi_from_states(&rho, &drho, &diag(&[0.0, 1.0])) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn parameter_independent_state_has_zero_qfi() {
        let p = QwbParams { j: 0.0, jc: 0.0, ..Default::default() };
        let m = FourSpin::new(p);
        let est = qfi(&m, 1.0, Some(1e-4)).unwrap();
        assert!(est.value.abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn rejects_non_projector() {
        let m = FourSpin::new(QwbParams::default());
        let bad = identity(16).mapv(|z| z * 0.5);
        assert!(cfi_projective(&m, 1.0, &bad, None).is_err());
        assert!(steady_derivative(&m, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_maximum_matches_n_function() {
        let p = QwbParams::default();
        let d = derived_scales(&p);
        let l = d.lambda.value().unwrap();
        let e = refine_maximum(|x| qfi_approx(&p, x), d.jx0 + 1e-6 * l, d.jx0 + 5.0 * l, 201).unwrap();
        let expected = 4.0 * n_function(p.n) / (l * l);
        assert!((e.value - expected).abs() < 1e-6 * expected, "{} vs {expected}", e.value);
    }

    #[test]
    fn projectors_are_idempotent() {
        let p = QwbParams::default();
        let layout = SiteLayout::qubits(4);
        for (_, op) in standard_projectors(&p, &layout).unwrap() {
            check_projector(&op, 16).unwrap();
        }
    }
}
