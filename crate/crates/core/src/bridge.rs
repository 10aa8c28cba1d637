//! Steady-state solves for the four-spin bridge and its shadow extension,
//! parametrized by the unknown coupling Jx.

use crate::error::Result;
use crate::liouville::{steady_state, Lindbladian, SteadyState};
use crate::model::{add_noise, shadow_network, NoiseSpec, QwbParams, ShadowSpec, SpinNetwork};
use crate::spinops::SiteLayout;

/// A bridge variant whose steady state can be evaluated at any Jx.
pub trait BridgeModel: Sync {
    fn params(&self) -> &QwbParams;

    fn network_at(&self, jx: f64) -> SpinNetwork;

    fn noise(&self) -> NoiseSpec {
        NoiseSpec::disabled()
    }

    fn layout(&self) -> SiteLayout {
        self.network_at(self.params().jx).layout()
    }

    fn lindbladian_at(&self, jx: f64) -> Result<Lindbladian> {
        self.params().with_jx(jx).validate()?;
        let net = self.network_at(jx);
        let layout = net.layout();
        let dissipators = add_noise(net.dissipators()?, &self.noise(), &layout)?;
        Lindbladian::new(net.hamiltonian()?, dissipators)
    }

    fn steady_state_at(&self, jx: f64) -> Result<SteadyState> {
        steady_state(&self.lindbladian_at(jx)?.superoperator())
    }
}

/// The four-spin bridge, optionally with decoherence on spins 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourSpin {
    pub params: QwbParams,
    pub noise: NoiseSpec,
}

impl FourSpin {
    pub fn new(params: QwbParams) -> Self {
        FourSpin { params, noise: NoiseSpec::disabled() }
    }

    pub fn with_noise(params: QwbParams, noise: NoiseSpec) -> Self {
        FourSpin { params, noise }
    }
}

impl BridgeModel for FourSpin {
    fn params(&self) -> &QwbParams {
        &self.params
    }

    fn network_at(&self, jx: f64) -> SpinNetwork {
        self.params.with_jx(jx).network()
    }

    fn noise(&self) -> NoiseSpec {
        self.noise
    }
}

/// The bridge with a shadow spin attached to spin 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowBridge {
    pub params: QwbParams,
    pub shadow: ShadowSpec,
}

impl BridgeModel for ShadowBridge {
    fn params(&self) -> &QwbParams {
        &self.params
    }

    fn network_at(&self, jx: f64) -> SpinNetwork {
        shadow_network(&self.params.with_jx(jx), &self.shadow)
    }
}

/// Steady state of the noiseless four-spin bridge at `p`.
pub fn solve(p: &QwbParams) -> Result<SteadyState> {
    FourSpin::new(*p).steady_state_at(p.jx)
}
