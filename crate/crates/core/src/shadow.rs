//! Readout through a shadow spin: a fifth, undamped spin weakly exchanged
//! with spin 2 whose excited population tracks P(E−).

use crate::bridge::{BridgeModel, ShadowBridge};
use crate::error::{QwbError, Result};
use crate::metrology::{cfi_from_states, default_fd_step, qfi_from_states, steady_derivative, up_projector};
use crate::model::{QwbParams, ShadowSpec, SHADOW_SITE};
use crate::observables::interface_populations;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowRow {
    pub jx: f64,
    pub p_minus: f64,
    pub p_shadow_up: f64,
    /// Present when the study was run with Fisher information.
    pub cfi_shadow: Option<f64>,
    pub qfi: Option<f64>,
}

pub fn shadow_bridge(p: &QwbParams, s: &ShadowSpec) -> Result<ShadowBridge> {
    if !(s.j2s > 0.0) {
        return Err(QwbError::param("J2S", "an uncoupled shadow has no unique steady state"));
    }
    p.validate()?;
    Ok(ShadowBridge { params: *p, shadow: *s })
}

/// One row of the study at coupling Jx.
pub fn shadow_row(model: &ShadowBridge, jx: f64, fisher: bool) -> Result<ShadowRow> {
    let layout = model.layout();
    let up = up_projector(SHADOW_SITE, &layout)?;
    let p = model.params().with_jx(jx);
    let (rho, cfi_shadow, qfi) = if fisher {
        let d = steady_derivative(model, jx, default_fd_step(&p))?;
        let cfi = cfi_from_states(&d.rho, &d.drho, &up);
        let qfi = qfi_from_states(&d.rho, &d.drho)?;
        (crate::liouville::DensityMatrix::from_unnormalized(&d.rho)?, Some(cfi), Some(qfi))
    } else {
        (model.steady_state_at(jx)?.rho, None, None)
    };
    let pops = interface_populations(&rho, &p)?;
    Ok(ShadowRow { jx, p_minus: pops.p_minus, p_shadow_up: rho.expectation(&up).re, cfi_shadow, qfi })
}

pub fn shadow_overlap_study(p: &QwbParams, s: &ShadowSpec, jxs: &[f64], fisher: bool) -> Result<Vec<ShadowRow>> {
    let model = shadow_bridge(p, s)?;
    jxs.iter().map(|&jx| shadow_row(&model, jx, fisher)).collect()
}

/// Pearson correlation coefficient; `None` when either series is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Correlation of the P(E−) and P(↑_S) curves of a study.
pub fn overlap_correlation(rows: &[ShadowRow]) -> Option<f64> {
    let a: Vec<f64> = rows.iter().map(|r| r.p_minus).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.p_shadow_up).collect();
    pearson(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::commutator;
    use crate::linalg::frobenius;
    use crate::model::shadow_network;
    use crate::spinops::{total_sz, SiteLayout};

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 2.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn five_spin_hamiltonian_conserves_sz() {
        let p = QwbParams::default();
        let h = shadow_network(&p, &ShadowSpec::new(0.02).unwrap()).hamiltonian().unwrap();
        let sz = total_sz(&SiteLayout::qubits(5)).unwrap();
        assert!(frobenius(&commutator(&h, &sz)) <= 1e-12);
    }

    #[test]
    fn uncoupled_shadow_rejected() {
        assert!(shadow_bridge(&QwbParams::default(), &ShadowSpec { j2s: 0.0 }).is_err());
    }

    #[test]
    fn omega_drops_out() {
        let s = ShadowSpec::new(0.02).unwrap();
        let a = shadow_row(&shadow_bridge(&QwbParams::default(), &s).unwrap(), 0.99, false).unwrap();
        let q = QwbParams { omega: 3.0, ..Default::default() };
        let b = shadow_row(&shadow_bridge(&q, &s).unwrap(), 0.99, false).unwrap();
        assert!((a.p_minus - b.p_minus).abs() < 1e-8);
        assert!((a.p_shadow_up - b.p_shadow_up).abs() < 1e-8);
    }
}
