//! Interface populations, spin and heat currents extracted from steady states.

use crate::error::{QwbError, Result};
use crate::linalg::Operator;
use crate::liouville::DensityMatrix;
use crate::model::QwbParams;
use crate::spinops::{
    embed_local, excited_projector, interface_states, partial_trace, psi_minus, sigma_minus, sigma_plus, PureState,
    SiteLayout,
};

/// Populations of the interface eigenstates, ordered as [E↓↓, E−, E+, E↑↑].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePopulations {
    pub p_downdown: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub p_upup: f64,
    /// 1 − Σp.
    pub leakage: f64,
    /// Frobenius norm of the off-diagonal part of ρ₂₃ in the interface basis.
    pub coherence: f64,
}

impl InterfacePopulations {
    pub fn from_array(p: [f64; 4]) -> Self {
        InterfacePopulations {
            p_downdown: p[0],
            p_minus: p[1],
            p_plus: p[2],
            p_upup: p[3],
            leakage: 1.0 - p.iter().sum::<f64>(),
            coherence: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_downdown, self.p_minus, self.p_plus, self.p_upup]
    }
}

fn qubit_layout(rho: &DensityMatrix) -> Result<SiteLayout> {
    let d = rho.dim();
    if !d.is_power_of_two() || d < 16 {
        return Err(QwbError::Dimension(format!("{d} is not a four- or five-spin dimension")));
    }
    Ok(SiteLayout::qubits(d.trailing_zeros() as usize))
}

/// Reduced state of spins 2 and 3 (indices 1 and 2).
pub fn interface_state(rho: &DensityMatrix) -> Result<Operator> {
    partial_trace(rho.matrix(), &[1, 2], &qubit_layout(rho)?)
}

fn population(rho23: &Operator, s: &PureState) -> f64 {
    s.amplitudes().mapv(|z| z.conj()).dot(&rho23.dot(s.amplitudes())).re
}

pub fn interface_populations(rho: &DensityMatrix, p: &QwbParams) -> Result<InterfacePopulations> {
    let rho23 = interface_state(rho)?;
    let states = interface_states(p.h2, p.j23)?;
    let basis = states.ordered();
    let mut pops = [0.0; 4];
    let mut off = 0.0;
    for (k, a) in basis.iter().enumerate() {
        pops[k] = population(&rho23, a);
        for (l, b) in basis.iter().enumerate() {
            if k != l {
                let z = a.amplitudes().mapv(|z| z.conj()).dot(&rho23.dot(b.amplitudes()));
                off += z.norm_sqr();
            }
        }
    }
    Ok(InterfacePopulations { coherence: off.sqrt(), ..InterfacePopulations::from_array(pops) })
}

/// ⟨Ψ−|ρ₂₃|Ψ−⟩, the bare singlet population used when h2 = 0.
pub fn psi_minus_population(rho: &DensityMatrix) -> Result<f64> {
    Ok(population(&interface_state(rho)?, &psi_minus()))
}

/// Excitation flow through the bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentReport {
    /// γ1 ⟨σ₊σ₋⟩₁: excitations absorbed by the cold bath per unit time.
    pub spin_current: f64,
    /// Net excitations entering from the hot bath, γ4[n⟨σ₋σ₊⟩₄ − (n+1)⟨σ₊σ₋⟩₄].
    pub hot_influx: f64,
    /// ω · spin_current, reported only for ω > 0.
    pub heat_current: Option<f64>,
}

pub fn spin_current(rho: &DensityMatrix, p: &QwbParams) -> Result<CurrentReport> {
    let layout = qubit_layout(rho)?;
    let up1 = rho.expectation(&embed_local(&excited_projector(), 0, &layout)?).re;
    let up4 = rho.expectation(&embed_local(&excited_projector(), 3, &layout)?).re;
    let mp = sigma_minus().dot(&sigma_plus());
    let down4 = rho.expectation(&embed_local(&mp, 3, &layout)?).re;
    let spin_current = p.gamma1 * up1;
    Ok(CurrentReport {
        spin_current,
        hot_influx: p.gamma4 * (p.n * down4 - (p.n + 1.0) * up4),
        heat_current: (p.omega > 0.0).then_some(p.omega * spin_current),
    })
}
