//! Superconducting-circuit realization: three transmons and a resonator with
//! capacitive couplings and a flux-tunable junction between nodes 1 and 3.
//!
//! Inputs and reports are SI (farads, joules, henries, rad/s, seconds). The
//! Lindblad problem is solved in rad/ns with times in ns.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Inverse, UPLO};

use crate::error::{QwbError, Result};
use crate::krylov::GmresOptions;
use crate::linalg::{dagger, identity, kron, Operator, C64, I, ZERO};
use crate::liouville::{steady_state, steady_state_iterative, DensityMatrix, Lindbladian, SteadyState};
use crate::model::Dissipator;
use crate::spinops::{partial_trace, SiteLayout};

pub const HBAR: f64 = 1.054_571_817e-34;
/// Magnetic flux quantum h/2e in webers.
pub const PHI0: f64 = 2.067_833_848e-15;
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Joules per unit of the internal energy scale, ħ·1 rad/ns.
pub const ENERGY_UNIT: f64 = HBAR * 1e9;

/// 2πħ·f in joules.
pub fn energy_from_frequency(f_hz: f64) -> f64 {
    TWO_PI * HBAR * f_hz
}

/// Angular frequency (rad/s) to the internal rad/ns.
pub fn to_internal_rate(omega: f64) -> f64 {
    omega * 1e-9
}

pub fn from_internal_rate(omega: f64) -> f64 {
    omega * 1e9
}

/// Seconds to the internal ns.
pub fn to_internal_time(t: f64) -> f64 {
    t * 1e9
}

pub fn from_internal_time(t: f64) -> f64 {
    t * 1e-9
}

/// Hilbert dimensions up to which the dense bordered solve is used.
pub const DENSE_MAX_DIM: usize = 32;
/// Extra levels kept per mode while forming powers of ladder operators.
const PAD_LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSpec {
    /// Bare node capacitances C1..C4.
    pub c: [f64; 4],
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    pub c24: f64,
    pub c34: f64,
    /// Josephson energies E1, E2, E3.
    pub e: [f64; 3],
    /// Josephson energy of the coupler junction.
    pub e_c: f64,
    pub l4: f64,
    /// External flux as a fraction of Φ₀.
    pub phi_c: f64,
    pub trunc: [usize; 4],
    /// Cold and hot bath rates, rad/s.
    pub gamma1: f64,
    pub gamma4: f64,
    pub n: f64,
    /// Coherence time of qubits 2 and 3 in seconds; `None` switches the noise off.
    pub coherence_time: Option<f64>,
    /// Keep the quartic transmon terms.
    pub quartic: bool,
    /// Drop the coupler shift of qubit 3 so that ω₂ = ω₃.
    pub equalize_qubit3: bool,
}

/// Effective node capacitance shared by all four nodes by default.
pub const DEFAULT_C_TILDE: f64 = 80e-15;

impl Default for CircuitSpec {
    fn default() -> Self {
        let e = energy_from_frequency(20e9);
        let (c12, c13, c23, c24, c34) = (1e-15, 0.95e-15, 7e-15, 1e-15, 1e-15);
        let ct = DEFAULT_C_TILDE;
        CircuitSpec {
            c: [ct - c12 - c13, ct - c12 - c23 - c24, ct - c13 - c23 - c34, ct - c24 - c34],
            c12,
            c13,
            c23,
            c24,
            c34,
            e: [energy_from_frequency(24e9), e, e],
            e_c: energy_from_frequency(2e9),
            l4: PHI0 * PHI0 / (4.0 * std::f64::consts::PI.powi(2) * e),
            phi_c: 0.25,
            trunc: [3, 3, 3, 4],
            gamma1: TWO_PI * 10e6,
            gamma4: TWO_PI * 500e6,
            n: 0.3,
            coherence_time: Some(50e-6),
            quartic: true,
            equalize_qubit3: false,
        }
    }
}

impl CircuitSpec {
    /// Effective capacitances C̃ᵢ: bare plus attached cross capacitances.
    pub fn c_tilde(&self) -> [f64; 4] {
        [
            self.c[0] + self.c12 + self.c13,
            self.c[1] + self.c12 + self.c23 + self.c24,
            self.c[2] + self.c13 + self.c23 + self.c34,
            self.c[3] + self.c24 + self.c34,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let crosses = [self.c12, self.c13, self.c23, self.c24, self.c34];
        for (i, v) in self.c.iter().enumerate() {
            if !(*v > 0.0) {
                return Err(QwbError::param(format!("C{}", i + 1), "must be positive"));
            }
        }
        if crosses.iter().any(|v| !(*v >= 0.0)) {
            return Err(QwbError::param("cross capacitance", "must be non-negative"));
        }
        if self.e.iter().any(|v| !(*v > 0.0)) || !(self.e_c >= 0.0) || !(self.l4 > 0.0) {
            return Err(QwbError::param("E", "Josephson energies and L4 must be positive"));
        }
        if self.trunc.iter().any(|&t| t < 2) {
            return Err(QwbError::param("trunc", "each mode needs at least two levels"));
        }
        if !(self.gamma1 >= 0.0) || !(self.gamma4 >= 0.0) || !(self.n >= 0.0) {
            return Err(QwbError::param("bath", "rates and n must be non-negative"));
        }
        if let Some(t) = self.coherence_time {
            if !(t > 0.0) {
                return Err(QwbError::param("T", "coherence time must be positive"));
            }
        }
        Ok(())
    }

    /// Configuration warnings: weak cross capacitances and the transmon regime.
    pub fn warnings(&self) -> Result<Vec<String>> {
        let mut w = Vec::new();
        let crosses = [self.c12, self.c13, self.c23, self.c24, self.c34];
        let max_cross = crosses.iter().fold(0.0f64, |a, b| a.max(*b));
        let min_bare = self.c.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        if max_cross > 0.0 && min_bare / max_cross < 10.0 {
            w.push(format!("bare/cross capacitance ratio {:.2} is below 10", min_bare / max_cross));
        }
        for (k, r) in transmon_ratios(self)?.iter().enumerate() {
            if !(60.0..=100.0).contains(r) {
                w.push(format!("transmon {} ratio {r:.1} outside [60, 100]", k + 1));
            }
        }
        Ok(w)
    }
}

pub fn build_capacitance_matrix(spec: &CircuitSpec) -> Result<Array2<f64>> {
    let ct = spec.c_tilde();
    let m = ndarray::arr2(&[
        [ct[0], -spec.c12, -spec.c13, 0.0],
        [-spec.c12, ct[1], -spec.c23, -spec.c24],
        [-spec.c13, -spec.c23, ct[2], -spec.c34],
        [0.0, -spec.c24, -spec.c34, ct[3]],
    ]);
    // rescale to fF so the Cholesky test is well conditioned
    if (&m * 1e15).cholesky(UPLO::Lower).is_err() {
        return Err(QwbError::param("capacitance", "matrix is not positive definite"));
    }
    Ok(m)
}

pub fn capacitance_inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    Ok((m * 1e15).inv()? * 1e15)
}

/// Ẽ₁ = E1 + 2E_C|cos 2πΦ_C|, Ẽ₂ = E2, Ẽ₃ = E3 + 2E_C|cos 2πΦ_C|.
pub fn effective_josephson(spec: &CircuitSpec) -> [f64; 3] {
    let shift = 2.0 * spec.e_c * (TWO_PI * spec.phi_c).cos().abs();
    [spec.e[0] + shift, spec.e[1], spec.e[2] + shift]
}

/// 8Ẽₙ/[C⁻¹]ₙₙ · Φ₀²/(4π²ħ²) for the three transmons.
pub fn transmon_ratios(spec: &CircuitSpec) -> Result<[f64; 3]> {
    let ci = capacitance_inverse(&build_capacitance_matrix(spec)?)?;
    let et = effective_josephson(spec);
    let f = PHI0 * PHI0 / (4.0 * std::f64::consts::PI.powi(2) * HBAR * HBAR);
    Ok([0, 1, 2].map(|k| 8.0 * et[k] / ci[(k, k)] * f))
}

/// Approximate frequencies and exchange couplings, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCircuit {
    pub omega1: f64,
    pub omega23: f64,
    pub omega4: f64,
    /// J₁₂ with Ẽ ≃ E on both nodes.
    pub j12: f64,
    /// J₁₂ with the node-1 Josephson energy E1 kept.
    pub j12_e1: f64,
    pub j23: f64,
    pub j24: f64,
    pub j34: f64,
}

/// Small-coupling estimates with Ẽₙ ≃ E and a nearly diagonal C.
pub fn derived_frequencies_couplings(spec: &CircuitSpec) -> DerivedCircuit {
    let ct = spec.c_tilde();
    let pi = std::f64::consts::PI;
    let e = spec.e[1];
    let transmon = |ej: f64, c: f64| (TWO_PI / PHI0) * (ej / c).sqrt() - pi * pi * HBAR / (PHI0 * PHI0 * c);
    // the resonator plays the role of a node with E = Φ₀²/(4π²L4)
    let e4 = PHI0 * PHI0 / (4.0 * pi * pi * spec.l4);
    let coupling =
        |c: f64, ca: f64, ea: f64, cb: f64, eb: f64| (pi / PHI0) * c / (ca * cb) * (ca * ea * cb * eb).powf(0.25);
    DerivedCircuit {
        omega1: transmon(spec.e[0], ct[0]),
        omega23: transmon(e, ct[1]),
        omega4: 1.0 / (ct[3] * spec.l4).sqrt(),
        j12: coupling(spec.c12, ct[0], e, ct[1], spec.e[1]),
        j12_e1: coupling(spec.c12, ct[0], spec.e[0], ct[1], spec.e[1]),
        j23: coupling(spec.c23, ct[1], spec.e[1], ct[2], spec.e[2]),
        j24: coupling(spec.c24, ct[1], spec.e[1], ct[3], e4),
        j34: coupling(spec.c34, ct[2], spec.e[2], ct[3], e4),
    }
}

/// Φ_C,0/Φ₀ where the 1–3 hopping equals the 1–2 hopping, keeping the two
/// lowest orders of C⁻¹. Uses C̃ of node 1.
pub fn balance_flux(spec: &CircuitSpec) -> Result<f64> {
    let ct = spec.c_tilde()[0];
    let e = spec.e[1];
    let arg = (e * spec.e[0]).sqrt() / (2.0 * spec.e_c * ct * ct) * (spec.c13 - spec.c12) * (ct - spec.c23);
    if !(arg.abs() <= 1.0) {
        return Err(QwbError::FluxBalance(arg));
    }
    Ok(arg.acos() / TWO_PI)
}

fn ladder(d: usize) -> Operator {
    Array2::from_shape_fn((d, d), |(i, j)| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO })
}

fn truncate(m: &Operator, d: usize) -> Operator {
    m.slice(ndarray::s![..d, ..d]).to_owned()
}

fn power(m: &Operator, k: u32) -> Operator {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = out.dot(m);
    }
    out
}

/// Kronecker product over the four modes, identity where `ops` has no entry.
fn embed(ops: &[(usize, Operator)], trunc: &[usize; 4]) -> Operator {
    let mut out = identity(1);
    for (k, &t) in trunc.iter().enumerate() {
        let local = ops.iter().find(|(m, _)| *m == k).map(|(_, o)| o.clone()).unwrap_or_else(|| identity(t));
        out = kron(&out, &local);
    }
    out
}

/// The truncated bosonic model at one flux point.
#[derive(Debug, Clone)]
pub struct QuantizedCircuit {
    pub cap_matrix: Array2<f64>,
    pub cap_inverse: Array2<f64>,
    pub effective_josephson: [f64; 3],
    /// Quartic coefficients Ẽₙ/24·(2πΦ_zpf/Φ₀)⁴ in rad/ns.
    pub anharmonicities: [f64; 3],
    /// In rad/ns.
    pub hamiltonian: Operator,
    /// Embedded truncated lowering operators of the four modes.
    pub lowering: Vec<Operator>,
    pub trunc: [usize; 4],
}

impl QuantizedCircuit {
    pub fn layout(&self) -> SiteLayout {
        SiteLayout::new(self.trunc.to_vec(), ["q1", "q2", "q3", "r4"].map(String::from).to_vec())
            .expect("truncations are validated")
    }

    pub fn dim(&self) -> usize {
        self.trunc.iter().product()
    }

    /// Lindblad channels: decay of mode 1, thermal mode 4, decay and number
    /// dephasing of modes 2 and 3. Rates in 1/ns.
    pub fn dissipators(&self, spec: &CircuitSpec) -> Vec<Dissipator> {
        let a = &self.lowering;
        let g1 = to_internal_rate(spec.gamma1);
        let g4 = to_internal_rate(spec.gamma4);
        let mut out = vec![
            Dissipator::new(a[0].clone(), g1, "cold[1]"),
            Dissipator::new(a[3].clone(), g4 * (spec.n + 1.0), "hot-decay[4]"),
        ];
        if spec.n > 0.0 {
            out.push(Dissipator::new(dagger(&a[3]), g4 * spec.n, "hot-excite[4]"));
        }
        if let Some(t) = spec.coherence_time {
            let rate = 1.0 / to_internal_time(t);
            for k in [1, 2] {
                out.push(Dissipator::new(a[k].clone(), rate, format!("decay[{}]", k + 1)));
                out.push(Dissipator::new(dagger(&a[k]).dot(&a[k]), rate, format!("dephase[{}]", k + 1)));
            }
        }
        out
    }

    /// Energies and exchange couplings of the single-excitation manifold, rad/ns.
    pub fn single_excitation_block(&self) -> Array2<f64> {
        let layout = self.layout();
        let idx: Vec<usize> = (0..4)
            .map(|k| {
                let mut digits = vec![0; 4];
                digits[k] = 1;
                layout.index_of(&digits)
            })
            .collect();
        Array2::from_shape_fn((4, 4), |(i, j)| self.hamiltonian[(idx[i], idx[j])].re)
    }
}

pub fn build_circuit_hamiltonian(spec: &CircuitSpec) -> Result<QuantizedCircuit> {
    spec.validate()?;
    let cap = build_capacitance_matrix(spec)?;
    let ci = capacitance_inverse(&cap)?;
    let mut et = effective_josephson(spec);
    if spec.equalize_qubit3 {
        et[2] = spec.e[2];
    }
    let pi = std::f64::consts::PI;
    let t = spec.trunc;
    // flux (as 2πΦ/Φ₀ for transmons, Φ for the resonator) and charge per mode
    let mut x = Vec::with_capacity(4);
    let mut q = Vec::with_capacity(4);
    for k in 0..4 {
        let a = ladder(t[k] + PAD_LEVELS);
        let ad = dagger(&a);
        let (phi_zpf, q_zpf) = if k < 3 {
            let r = 4.0 * pi * pi * et[k] / (PHI0 * PHI0 * ci[(k, k)]);
            ((r / (HBAR * HBAR)).powf(-0.25), (r * HBAR * HBAR).powf(0.25))
        } else {
            ((HBAR * HBAR * spec.l4 * ci[(3, 3)]).powf(0.25), (HBAR * HBAR / (spec.l4 * ci[(3, 3)])).powf(0.25))
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phase = if k < 3 { TWO_PI / PHI0 } else { 1.0 };
        x.push((&ad + &a).mapv(|z| z * s * phi_zpf * phase));
        q.push((&ad - &a).mapv(|z| z * I * s * q_zpf));
    }
    let d: usize = t.iter().product();
    let mut h = Array2::<C64>::zeros((d, d));
    let mut add = |coef: f64, ops: Vec<(usize, Operator)>| {
        h.scaled_add(C64::new(coef, 0.0), &embed(&ops, &t));
    };
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                add(0.5 * ci[(i, i)], vec![(i, truncate(&q[i].dot(&q[i]), t[i]))]);
            } else if ci[(i, j)] != 0.0 {
                add(0.5 * ci[(i, j)], vec![(i, truncate(&q[i], t[i])), (j, truncate(&q[j], t[j]))]);
            }
        }
    }
    for k in 0..3 {
        add(0.5 * et[k], vec![(k, truncate(&power(&x[k], 2), t[k]))]);
        if spec.quartic {
            add(-et[k] / 24.0, vec![(k, truncate(&power(&x[k], 4), t[k]))]);
        }
    }
    add(1.0 / (2.0 * spec.l4), vec![(3, truncate(&power(&x[3], 2), t[3]))]);
    let c = spec.e_c * (TWO_PI * spec.phi_c).cos().abs();
    if c != 0.0 {
        let p = |k: usize, n: u32| truncate(&power(&x[k], n), t[k]);
        add(-2.0 * c, vec![(0, p(0, 1)), (2, p(2, 1))]);
        add(2.0 * c / 12.0, vec![(0, p(0, 3)), (2, p(2, 1))]);
        add(-3.0 * c / 12.0, vec![(0, p(0, 2)), (2, p(2, 2))]);
        add(2.0 * c / 12.0, vec![(0, p(0, 1)), (2, p(2, 3))]);
    }
    let h = h.mapv(|z| z / ENERGY_UNIT);
    let anharmonicities = [0, 1, 2].map(|k| {
        let zpf4 = x[k][(0, 1)].norm().powi(4);
        et[k] / 24.0 * zpf4 / ENERGY_UNIT
    });
    let lowering = (0..4).map(|k| embed(&[(k, ladder(t[k]))], &t)).collect();
    Ok(QuantizedCircuit {
        cap_matrix: cap,
        cap_inverse: ci,
        effective_josephson: et,
        anharmonicities,
        hamiltonian: h,
        lowering,
        trunc: t,
    })
}

/// One flux point of the circuit simulation.
#[derive(Debug, Clone)]
pub struct CircuitPoint {
    pub phi_c: f64,
    pub p_psi_minus: f64,
    /// ħω₁γ₁⟨a₁†a₁⟩ in watts, with ω₁ from [`derived_frequencies_couplings`].
    pub heat_current_watts: f64,
    pub residual: f64,
    pub state: SteadyState,
}

/// ⟨Ψ−|ρ₂₃|Ψ−⟩ with |Ψ−⟩ = (|10⟩ − |01⟩)/√2 in the lowest two levels of modes 2 and 3.
pub fn psi_minus_two_level(rho: &DensityMatrix, layout: &SiteLayout) -> Result<f64> {
    let r23 = partial_trace(rho.matrix(), &[1, 2], layout)?;
    let t3 = layout.local_dims()[2];
    let mut v = Array1::<C64>::zeros(r23.nrows());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[t3] = C64::new(s, 0.0);
    v[1] = C64::new(-s, 0.0);
    Ok(v.mapv(|z| z.conj()).dot(&r23.dot(&v)).re)
}

/// Steady state at `spec.phi_c`, warm-started from `guess` on the iterative path.
pub fn simulate_point(spec: &CircuitSpec, guess: Option<&Operator>, opts: &GmresOptions) -> Result<CircuitPoint> {
    let qc = build_circuit_hamiltonian(spec)?;
    let l = Lindbladian::new(qc.hamiltonian.clone(), qc.dissipators(spec))?;
    let state = if qc.dim() <= DENSE_MAX_DIM {
        steady_state(&l.superoperator())?
    } else {
        steady_state_iterative(&l, guess, opts)?
    };
    let layout = qc.layout();
    let p_psi_minus = psi_minus_two_level(&state.rho, &layout)?;
    let n1 = state.rho.expectation(&dagger(&qc.lowering[0]).dot(&qc.lowering[0])).re;
    let omega1 = derived_frequencies_couplings(spec).omega1;
    Ok(CircuitPoint {
        phi_c: spec.phi_c,
        p_psi_minus,
        heat_current_watts: HBAR * omega1 * spec.gamma1 * n1,
        residual: state.residual,
        state,
    })
}

/// Flux sweep in grid order, each point warm-started from its predecessor.
pub fn simulate_circuit(spec: &CircuitSpec, phis: &[f64], opts: &GmresOptions) -> Result<Vec<CircuitPoint>> {
    let mut out: Vec<CircuitPoint> = Vec::with_capacity(phis.len());
    for &phi in phis {
        let guess = out.last().map(|p| p.state.rho.matrix().clone());
        out.push(simulate_point(&CircuitSpec { phi_c: phi, ..*spec }, guess.as_ref(), opts)?);
    }
    Ok(out)
}

/// `points` flux values across Φ_C,0 ± half_width.
pub fn flux_window(center: f64, half_width: f64, points: usize) -> Vec<f64> {
    crate::optimize::linspace(center - half_width, center + half_width, points)
}
