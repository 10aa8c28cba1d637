//! Calibration-error Monte Carlo: seeded disorder on every parameter except
//! Jx and h2, with decoherence, and the location of the resulting Jc dip.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QwbError, Result};
use crate::fit::{fit_dip, LorentzFit};
use crate::liouville::{steady_state, Lindbladian};
use crate::model::{add_noise, BathAttachment, Coupling, NoiseSpec, QwbParams, SpinNetwork};
use crate::observables::psi_minus_population;
use crate::optimize::refine_minimum_grid;

/// Standard deviations of the parameter errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub sigma_coupling: f64,
    pub sigma_field: f64,
    pub sigma_bath_rate: f64,
    pub sigma_n: f64,
    pub seed: u64,
    pub samples: usize,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        DisorderSpec {
            sigma_coupling: 0.02,
            sigma_field: 0.2,
            sigma_bath_rate: 0.1,
            sigma_n: 0.1,
            seed: 0,
            samples: 10,
        }
    }
}

impl DisorderSpec {
    pub fn none() -> Self {
        DisorderSpec { sigma_coupling: 0.0, sigma_field: 0.0, sigma_bath_rate: 0.0, sigma_n: 0.0, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_coupling", self.sigma_coupling),
            ("sigma_field", self.sigma_field),
            ("sigma_bath_rate", self.sigma_bath_rate),
            ("sigma_n", self.sigma_n),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(QwbError::param(name, "must be finite and non-negative"));
            }
        }
        if self.samples == 0 {
            return Err(QwbError::param("samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// Bridge parameters with independent J₂₄, J₃₄ and per-site splittings.
///
/// `fields` are σz/2 coefficients, as in [`SpinNetwork`]. Jc is left free
/// because it is the swept coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderedParams {
    pub fields: [f64; 4],
    pub jx: f64,
    pub j23: f64,
    pub j24: f64,
    pub j34: f64,
    pub gamma1: f64,
    pub gamma4: f64,
    pub n: f64,
    /// Draws rejected because a bath rate came out negative.
    pub rejections: u32,
}

impl DisorderedParams {
    pub fn from_params(p: &QwbParams) -> Self {
        let w = p.omega;
        DisorderedParams {
            fields: [w + 2.0 * p.h1, w + 2.0 * p.h2, w, w],
            jx: p.jx,
            j23: p.j23,
            j24: p.j,
            j34: p.j,
            gamma1: p.gamma1,
            gamma4: p.gamma4,
            n: p.n,
            rejections: 0,
        }
    }

    pub fn network(&self, jc: f64) -> SpinNetwork {
        SpinNetwork {
            fields: self.fields.to_vec(),
            couplings: vec![
                Coupling::new(0, 1, self.jx),
                Coupling::new(0, 2, jc),
                Coupling::new(1, 2, self.j23),
                Coupling::new(1, 3, self.j24),
                Coupling::new(2, 3, self.j34),
            ],
            baths: vec![BathAttachment::cold(0, self.gamma1), BathAttachment::thermal(3, self.gamma4, self.n)],
        }
    }

    /// The field offset between spins 2 and 3, 2h2 for an undisordered bridge.
    pub fn interface_splitting(&self) -> f64 {
        self.fields[1] - self.fields[2]
    }
}

/// Standard normal by the Marsaglia polar method.
pub fn polar_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

const MAX_RETRIES: u32 = 100;

fn positive_draw<R: Rng>(rng: &mut R, mean: f64, sigma: f64, name: &str, rejections: &mut u32) -> Result<f64> {
    for _ in 0..=MAX_RETRIES {
        let x = mean + sigma * polar_normal(rng);
        if x >= 0.0 {
            return Ok(x);
        }
        *rejections += 1;
    }
    Err(QwbError::param(name, format!("no non-negative draw in {MAX_RETRIES} retries")))
}

/// The generator for sample `k`: ChaCha8 seeded from `seed`, stream `k`.
pub fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Disordered copy of `base` for sample `k`.
///
/// Draw order: J23, J24, J34, spin-1 field, shared spin-2/3 field, spin-4
/// field, γ1, γ4, n. Field errors shift the site splitting directly.
pub fn sample_disordered_params(base: &QwbParams, d: &DisorderSpec, k: u64) -> Result<DisorderedParams> {
    d.validate()?;
    base.validate()?;
    let mut rng = sample_rng(d.seed, k);
    let mut out = DisorderedParams::from_params(base);
    let mut draw = |sigma: f64| sigma * polar_normal(&mut rng);
    out.j23 += draw(d.sigma_coupling);
    out.j24 += draw(d.sigma_coupling);
    out.j34 += draw(d.sigma_coupling);
    out.fields[0] += draw(d.sigma_field);
    let shared = draw(d.sigma_field);
    out.fields[1] += shared;
    out.fields[2] += shared;
    out.fields[3] += draw(d.sigma_field);
    let mut rejections = 0;
    out.gamma1 = positive_draw(&mut rng, base.gamma1, d.sigma_bath_rate, "gamma1", &mut rejections)?;
    out.gamma4 = positive_draw(&mut rng, base.gamma4, d.sigma_bath_rate, "gamma4", &mut rejections)?;
    out.n = (base.n + d.sigma_n * polar_normal(&mut rng)).max(0.0);
    out.rejections = rejections;
    Ok(out)
}

/// P(|Ψ−⟩) of the disordered bridge at coupling Jc.
pub fn psi_minus_at(q: &DisorderedParams, jc: f64, noise: &NoiseSpec) -> Result<f64> {
    let net = q.network(jc);
    let layout = net.layout();
    let l = Lindbladian::new(net.hamiltonian()?, add_noise(net.dissipators()?, noise, &layout)?)?;
    psi_minus_population(&steady_state(&l.superoperator())?.rho)
}

/// Jc sweep window and grid for the dip search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepWindow {
    pub half_width: f64,
    pub points: usize,
}

impl Default for SweepWindow {
    fn default() -> Self {
        SweepWindow { half_width: 0.05, points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipSample {
    pub index: usize,
    pub params: DisorderedParams,
    pub jc_min: f64,
    pub p_min: f64,
    /// (Jc, P(|Ψ−⟩)) on the seeding grid.
    pub curve: Vec<(f64, f64)>,
}

/// The dip of one disordered sample across Jx ± half_width.
pub fn dip_for_sample(q: &DisorderedParams, index: usize, noise: &NoiseSpec, w: &SweepWindow) -> Result<DipSample> {
    let g = refine_minimum_grid(|jc| psi_minus_at(q, jc, noise), q.jx - w.half_width, q.jx + w.half_width, w.points)?;
    Ok(DipSample {
        index,
        params: *q,
        jc_min: g.best.x,
        p_min: g.best.value,
        curve: g.xs.into_iter().zip(g.ys).collect(),
    })
}

/// Departures from the calibration protocol, which holds h2 at zero.
pub fn protocol_warnings(base: &QwbParams) -> Vec<String> {
    if base.h2 != 0.0 {
        vec![format!("h2 = {} is nonzero; the dip is tracked in P(Psi-) regardless", base.h2)]
    } else {
        vec![]
    }
}

/// All samples of `d`, in sample order.
pub fn dip_location_study(
    base: &QwbParams,
    d: &DisorderSpec,
    noise: &NoiseSpec,
    w: &SweepWindow,
) -> Result<Vec<DipSample>> {
    (0..d.samples).map(|k| dip_for_sample(&sample_disordered_params(base, d, k as u64)?, k, noise, w)).collect()
}

/// Offsets Jc_min − Jx summarized over samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipSummary {
    pub median_offset: f64,
    pub max_abs_offset: f64,
}

pub fn summarize(samples: &[DipSample]) -> DipSummary {
    let mut offs: Vec<f64> = samples.iter().map(|s| s.jc_min - s.params.jx).collect();
    offs.sort_by(f64::total_cmp);
    let m = offs.len();
    let median_offset = match m {
        0 => 0.0,
        _ if m % 2 == 1 => offs[m / 2],
        _ => 0.5 * (offs[m / 2 - 1] + offs[m / 2]),
    };
    DipSummary { median_offset, max_abs_offset: offs.iter().fold(0.0f64, |a, o| a.max(o.abs())) }
}

/// Lorentzian fit of an undisordered dip, used to track its width.
pub fn dip_width(base: &QwbParams, noise: &NoiseSpec, w: &SweepWindow) -> Result<LorentzFit> {
    let s = dip_for_sample(&DisorderedParams::from_params(base), 0, noise, w)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = s.curve.iter().copied().unzip();
    fit_dip(&xs, &ys, false)
}
