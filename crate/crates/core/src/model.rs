//! Hamiltonian and bath construction for the four-spin bridge.
//!
//! Spins 1–4 map to indices 0–3; the optional shadow spin is index 4.
//! Internal units: ħ = k_B = 1 and energies, rates in units of J.

use ndarray::Array2;

use crate::error::{QwbError, Result};
use crate::linalg::{Operator, C64};
use crate::spinops::{embed_local, sigma_minus, sigma_plus, sigma_z, xx_exchange, SiteLayout};

/// Physical parameters of the bridge. All values in units of J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QwbParams {
    pub j: f64,
    pub jx: f64,
    pub jc: f64,
    pub j23: f64,
    pub h1: f64,
    pub h2: f64,
    pub omega: f64,
    pub gamma1: f64,
    pub gamma4: f64,
    pub n: f64,
}

impl Default for QwbParams {
    fn default() -> Self {
        QwbParams {
            j: 1.0,
            jx: 1.0,
            jc: 1.0,
            j23: 20.0,
            h1: 20.0,
            h2: 0.5,
            omega: 0.0,
            gamma1: 1.0,
            gamma4: 10.0,
            n: 0.5,
        }
    }
}

impl QwbParams {
    /// Names accepted by [`QwbParams::set`], in declaration order.
    pub const NAMES: [&'static str; 10] = ["J", "Jx", "Jc", "J23", "h1", "h2", "omega", "gamma1", "gamma4", "n"];

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.values()) {
            if !v.is_finite() {
                return Err(QwbError::param(*name, "must be finite"));
            }
        }
        if !(self.j23 > 0.0) {
            return Err(QwbError::param("J23", "must be positive"));
        }
        if !(self.gamma1 > 0.0) {
            return Err(QwbError::param("gamma1", "must be positive"));
        }
        if !(self.gamma4 > 0.0) {
            return Err(QwbError::param("gamma4", "must be positive"));
        }
        if self.n < 0.0 {
            return Err(QwbError::param("n", "must be non-negative"));
        }
        Ok(())
    }

    pub fn values(&self) -> [f64; 10] {
        [self.j, self.jx, self.jc, self.j23, self.h1, self.h2, self.omega, self.gamma1, self.gamma4, self.n]
    }

    /// Sets a parameter by name (case-insensitive).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name.to_ascii_lowercase().as_str() {
            "j" => &mut self.j,
            "jx" => &mut self.jx,
            "jc" => &mut self.jc,
            "j23" => &mut self.j23,
            "h1" => &mut self.h1,
            "h2" => &mut self.h2,
            "omega" => &mut self.omega,
            "gamma1" => &mut self.gamma1,
            "gamma4" => &mut self.gamma4,
            "n" => &mut self.n,
            _ => return Err(QwbError::param(name, "unknown parameter")),
        };
        *slot = value;
        Ok(())
    }

    pub fn with_jx(mut self, jx: f64) -> Self {
        self.jx = jx;
        self
    }

    pub fn with_jc(mut self, jc: f64) -> Self {
        self.jc = jc;
        self
    }

    pub fn with_h2(mut self, h2: f64) -> Self {
        self.h2 = h2;
        self
    }

    /// Hot-bath temperature ω/ln(1 + 1/n). Display only; the simulations use n.
    pub fn hot_temperature(&self) -> Option<f64> {
        (self.omega > 0.0 && self.n > 0.0).then(|| self.omega / (1.0 + 1.0 / self.n).ln())
    }

    /// The bridge as a general spin network.
    pub fn network(&self) -> SpinNetwork {
        let w = self.omega;
        SpinNetwork {
            fields: vec![w + 2.0 * self.h1, w + 2.0 * self.h2, w, w],
            couplings: vec![
                Coupling::new(0, 1, self.jx),
                Coupling::new(0, 2, self.jc),
                Coupling::new(1, 2, self.j23),
                Coupling::new(1, 3, self.j),
                Coupling::new(2, 3, self.j),
            ],
            baths: vec![BathAttachment::cold(0, self.gamma1), BathAttachment::thermal(3, self.gamma4, self.n)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    ColdDecay,
    Thermal,
}

/// A local Lindblad bath on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathAttachment {
    pub site: usize,
    pub kind: BathKind,
    pub gamma: f64,
    pub n: f64,
}

impl BathAttachment {
    pub fn cold(site: usize, gamma: f64) -> Self {
        BathAttachment { site, kind: BathKind::ColdDecay, gamma, n: 0.0 }
    }

    pub fn thermal(site: usize, gamma: f64, n: f64) -> Self {
        BathAttachment { site, kind: BathKind::Thermal, gamma, n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(QwbError::param("gamma", format!("bath on site {} needs a positive rate", self.site)));
        }
        if !(self.n >= 0.0) || !self.n.is_finite() {
            return Err(QwbError::param("n", "must be non-negative"));
        }
        if self.kind == BathKind::ColdDecay && self.n != 0.0 {
            return Err(QwbError::param("n", "a cold decay bath has zero occupation"));
        }
        Ok(())
    }

    /// Decay at γ(n+1) and, when n > 0, excitation at γn.
    pub fn dissipators(&self, layout: &SiteLayout) -> Result<Vec<Dissipator>> {
        self.validate()?;
        let s = self.site;
        let mut out = vec![Dissipator::new(
            embed_local(&sigma_minus(), s, layout)?,
            self.gamma * (self.n + 1.0),
            format!("decay[{s}]"),
        )];
        if self.n > 0.0 {
            out.push(Dissipator::new(
                embed_local(&sigma_plus(), s, layout)?,
                self.gamma * self.n,
                format!("excite[{s}]"),
            ));
        }
        Ok(out)
    }
}

/// XX coupling `strength · X̂ᵢⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

impl Coupling {
    pub fn new(i: usize, j: usize, strength: f64) -> Self {
        Coupling { i, j, strength }
    }
}

/// Spin-½ graph with XX couplings, z-fields and local baths.
///
/// `fields[i]` multiplies σ_z⁽ⁱ⁾/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    pub fields: Vec<f64>,
    pub couplings: Vec<Coupling>,
    pub baths: Vec<BathAttachment>,
}

impl SpinNetwork {
    pub fn layout(&self) -> SiteLayout {
        SiteLayout::qubits(self.fields.len())
    }

    pub fn hamiltonian(&self) -> Result<Operator> {
        let layout = self.layout();
        let d = layout.total_dim();
        let mut h = Array2::<C64>::zeros((d, d));
        for (site, &f) in self.fields.iter().enumerate() {
            if f != 0.0 {
                h.scaled_add(C64::new(0.5 * f, 0.0), &embed_local(&sigma_z(), site, &layout)?);
            }
        }
        for c in &self.couplings {
            if c.strength != 0.0 {
                h.scaled_add(C64::new(c.strength, 0.0), &xx_exchange(c.i, c.j, &layout)?);
            }
        }
        Ok(h)
    }

    pub fn dissipators(&self) -> Result<Vec<Dissipator>> {
        let layout = self.layout();
        let mut out = Vec::new();
        for b in &self.baths {
            out.extend(b.dissipators(&layout)?);
        }
        Ok(out)
    }
}

/// Jump operator with its rate, entering as `rate · ℳ[operator]`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub operator: Operator,
    pub rate: f64,
    pub label: String,
}

impl Dissipator {
    pub fn new(operator: Operator, rate: f64, label: impl Into<String>) -> Self {
        Dissipator { operator, rate, label: label.into() }
    }
}

/// H = Σᵢ fieldᵢ σ_z⁽ⁱ⁾/2 + Jx X̂₁₂ + Jc X̂₁₃ + J23 X̂₂₃ + J X̂₂₄ + J X̂₃₄.
pub fn build_hamiltonian(p: &QwbParams) -> Result<Operator> {
    p.validate()?;
    p.network().hamiltonian()
}

/// [(σ₋⁽¹⁾, γ1), (σ₋⁽⁴⁾, γ4(n+1)), (σ₊⁽⁴⁾, γ4 n)], the last pruned at n = 0.
pub fn build_dissipators(p: &QwbParams) -> Result<Vec<Dissipator>> {
    p.validate()?;
    p.network().dissipators()
}

/// Shadow spin weakly coupled to spin 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowSpec {
    pub j2s: f64,
}

impl ShadowSpec {
    pub fn new(j2s: f64) -> Result<Self> {
        if !(j2s >= 0.0) || !j2s.is_finite() {
            return Err(QwbError::param("J2S", "must be non-negative"));
        }
        Ok(ShadowSpec { j2s })
    }

    /// Coefficient of σ_z⁽ˢ⁾, (ω − 2 J23)/2.
    pub fn shadow_field(&self, p: &QwbParams) -> f64 {
        (p.omega - 2.0 * p.j23) / 2.0
    }
}

/// Index of the shadow spin in the five-site layout.
pub const SHADOW_SITE: usize = 4;

pub fn shadow_network(p: &QwbParams, s: &ShadowSpec) -> SpinNetwork {
    let mut net = p.network();
    // fields are σ_z/2 coefficients
    net.fields.push(2.0 * s.shadow_field(p));
    net.couplings.push(Coupling::new(1, SHADOW_SITE, s.j2s));
    net
}

/// H′ = H + J2S X̂₂ₛ + ((ω − 2J23)/2) σ_z⁽ˢ⁾ on 32 dimensions; baths unchanged.
pub fn extend_with_shadow(p: &QwbParams, s: &ShadowSpec) -> Result<(Operator, Vec<Dissipator>)> {
    p.validate()?;
    ShadowSpec::new(s.j2s)?;
    let net = shadow_network(p, s);
    Ok((net.hamiltonian()?, net.dissipators()?))
}

/// Decay and σ_z/2 dephasing at rate 1/T on spins 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub coherence_time: f64,
    pub enabled: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { coherence_time: 4.0e4, enabled: true }
    }
}

impl NoiseSpec {
    pub fn disabled() -> Self {
        NoiseSpec { enabled: false, ..Default::default() }
    }

    pub fn with_time(coherence_time: f64) -> Self {
        NoiseSpec { coherence_time, enabled: true }
    }
}

/// Appends the decoherence channels of `noise` acting on indices 1 and 2.
pub fn add_noise(mut dissipators: Vec<Dissipator>, noise: &NoiseSpec, layout: &SiteLayout) -> Result<Vec<Dissipator>> {
    if !noise.enabled {
        return Ok(dissipators);
    }
    if !(noise.coherence_time > 0.0) {
        return Err(QwbError::param("T", "coherence time must be positive"));
    }
    let rate = 1.0 / noise.coherence_time;
    let half_z = sigma_z().mapv(|z| z * 0.5);
    for site in [1, 2] {
        dissipators.push(Dissipator::new(
            embed_local(&sigma_minus(), site, layout)?,
            rate,
            format!("noise-decay[{site}]"),
        ));
        dissipators.push(Dissipator::new(embed_local(&half_z, site, layout)?, rate, format!("noise-dephase[{site}]")));
    }
    Ok(dissipators)
}
