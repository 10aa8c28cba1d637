//! Four-state golden-rule reduction of the bridge and its closed-form scales.
//!
//! State ordering everywhere is [E↓↓, E−, E+, E↑↑]. Interface energies to
//! linear order: E↑↑ = ω + h2, E± = ±2J23, E↓↓ = −ω − h2.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;

use crate::error::{QwbError, Result};
use crate::linalg::{identity, kron, Operator};
use crate::model::QwbParams;
use crate::observables::InterfacePopulations;
use crate::spinops::{interface_states, sigma_minus, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Golden-rule rates with exact matrix elements.
    ExactGoldenRule,
    /// The leading-order closed forms around Jx,0.
    Asymptotic,
}

/// The eight spin-allowed transition rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub upup_to_minus: f64,
    pub minus_to_downdown: f64,
    pub upup_to_plus: f64,
    pub plus_to_downdown: f64,
    pub downdown_to_minus: f64,
    pub minus_to_upup: f64,
    pub downdown_to_plus: f64,
    pub plus_to_upup: f64,
    pub mode: RateMode,
}

impl RateSet {
    pub const LABELS: [&'static str; 8] = [
        "E_upup->E_minus",
        "E_minus->E_downdown",
        "E_upup->E_plus",
        "E_plus->E_downdown",
        "E_downdown->E_minus",
        "E_minus->E_upup",
        "E_downdown->E_plus",
        "E_plus->E_upup",
    ];

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.upup_to_minus,
            self.minus_to_downdown,
            self.upup_to_plus,
            self.plus_to_downdown,
            self.downdown_to_minus,
            self.minus_to_upup,
            self.downdown_to_plus,
            self.plus_to_upup,
        ]
    }

    pub fn from_array(r: [f64; 8], mode: RateMode) -> Self {
        RateSet {
            upup_to_minus: r[0],
            minus_to_downdown: r[1],
            upup_to_plus: r[2],
            plus_to_downdown: r[3],
            downdown_to_minus: r[4],
            minus_to_upup: r[5],
            downdown_to_plus: r[6],
            plus_to_upup: r[7],
            mode,
        }
    }
}

/// η² = 4J23² + (2n+1)²γ4²/4.
pub fn eta_sq(p: &QwbParams) -> f64 {
    4.0 * p.j23 * p.j23 + (2.0 * p.n + 1.0).powi(2) * p.gamma4 * p.gamma4 / 4.0
}

/// Interface energies in the order [E↓↓, E−, E+, E↑↑].
pub fn interface_energies(p: &QwbParams) -> [f64; 4] {
    [-p.omega - p.h2, -2.0 * p.j23, 2.0 * p.j23, p.omega + p.h2]
}

fn matrix_element(op: &Operator, bra: &PureState, ket: &PureState) -> f64 {
    bra.amplitudes().mapv(|z| z.conj()).dot(&op.dot(ket.amplitudes())).norm_sqr()
}

/// Golden-rule rates. `self_broadening` keeps |M|² in the cold-bath denominator.
///
/// The reverse hot-bath process uses the same detuning and |matrix element|²
/// as the forward one, weighted by n instead of n + 1.
pub fn golden_rule_rates(p: &QwbParams, self_broadening: bool) -> Result<RateSet> {
    p.validate()?;
    let s = interface_states(p.h2, p.j23)?;
    let basis = s.ordered();
    let e = interface_energies(p);
    let sm2 = kron(&sigma_minus(), &identity(2));
    let sm3 = kron(&identity(2), &sigma_minus());
    let cold_op = (&sm2 * p.jx + &sm3 * p.jc).mapv(|z| z * 2.0);
    let hot_op = (&sm2 + &sm3).mapv(|z| z * 2.0 * p.j);
    let hot_width = p.gamma4 * p.gamma4 * (2.0 * p.n + 1.0).powi(2) / 4.0;

    // (from, to) pairs of the higher-excitation state E and the lower E′
    let pairs = [(3usize, 1usize), (1, 0), (3, 2), (2, 0)];
    let mut forward = [0.0; 4];
    let mut reverse = [0.0; 4];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let (hi, lo) = (basis[a], basis[b]);
        let mc = matrix_element(&cold_op, lo, hi);
        let cold_det = p.omega + 2.0 * p.h1 + e[b] - e[a];
        let cold_den = if self_broadening { mc } else { 0.0 } + cold_det * cold_det + p.gamma1 * p.gamma1 / 4.0;
        let cold = mc * p.gamma1 / cold_den;
        let mh = matrix_element(&hot_op, lo, hi);
        let hot_det = p.omega + e[b] - e[a];
        let hot_den = hot_det * hot_det + hot_width;
        forward[k] = cold + mh * p.gamma4 * (p.n + 1.0) / hot_den;
        reverse[k] = mh * p.gamma4 * p.n / hot_den;
    }
    Ok(RateSet {
        upup_to_minus: forward[0],
        minus_to_downdown: forward[1],
        upup_to_plus: forward[2],
        plus_to_downdown: forward[3],
        minus_to_upup: reverse[0],
        downdown_to_minus: reverse[1],
        plus_to_upup: reverse[2],
        downdown_to_plus: reverse[3],
        mode: RateMode::ExactGoldenRule,
    })
}

/// Golden-rule rates with the cold-bath self-broadening term kept.
pub fn golden_rule_rates_exact(p: &QwbParams) -> Result<RateSet> {
    golden_rule_rates(p, true)
}

/// Conditions under which the closed forms apply; each violated one is listed.
pub fn validity_warnings(p: &QwbParams, jx: f64) -> Vec<String> {
    let mut w = Vec::new();
    let tenth = p.j23 / 10.0;
    if p.h2.abs() > tenth {
        w.push(format!("h2 = {} exceeds J23/10 = {tenth}", p.h2));
    }
    if p.j.abs() > tenth {
        w.push(format!("J = {} exceeds J23/10 = {tenth}", p.j));
    }
    if p.gamma1 > p.gamma4 / 10.0 {
        w.push(format!("gamma1 = {} is not much smaller than gamma4 = {}", p.gamma1, p.gamma4));
    }
    let cap = 4.0 * p.j23 / (2.0 * p.n + 1.0);
    if p.gamma4 > cap {
        w.push(format!("gamma4 = {} exceeds 4 J23/(2n+1) = {cap}", p.gamma4));
    }
    let delta = jx - jx0(p);
    if delta.abs() > p.j.abs() / 10.0 {
        w.push(format!("|Jx - Jx0| = {} exceeds J/10", delta.abs()));
    }
    w
}

/// Asymptotic rates with any applicable validity warnings.
#[derive(Debug, Clone)]
pub struct AsymptoticRates {
    pub rates: RateSet,
    pub warnings: Vec<String>,
}

pub fn rates_asymptotic(p: &QwbParams, jx: f64) -> AsymptoticRates {
    let eta2 = eta_sq(p);
    let delta = jx - jx0(p);
    let det = 2.0 * p.h1 - 2.0 * p.j23 - p.h2;
    let j2 = p.j * p.j;
    let weak = p.h2 * p.h2 * j2 * p.gamma4 / (2.0 * p.j23 * p.j23 * eta2);
    let strong = 8.0 * j2 * p.gamma4 / eta2;
    let rates = RateSet {
        upup_to_minus: 2.0 * p.gamma1 * delta * delta / (det * det + p.gamma1 * p.gamma1 / 4.0),
        minus_to_downdown: weak * (p.n + 1.0),
        upup_to_plus: strong * (p.n + 1.0),
        plus_to_downdown: p.gamma1,
        downdown_to_minus: weak * p.n,
        minus_to_upup: weak * p.n,
        downdown_to_plus: strong * p.n,
        plus_to_upup: strong * p.n,
        mode: RateMode::Asymptotic,
    };
    AsymptoticRates { rates, warnings: validity_warnings(p, jx) }
}

/// Generator of Ṗ = W P over [E↓↓, E−, E+, E↑↑]; columns sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrixW {
    pub matrix: Array2<f64>,
}

impl RateMatrixW {
    /// Rate from state `from` to state `to`.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.matrix[(to, from)]
    }

    pub fn column_sums(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = self.matrix.column(j).sum();
        }
        s
    }
}

pub fn build_w(r: &RateSet) -> RateMatrixW {
    let mut m = Array2::<f64>::zeros((4, 4));
    let entries = [
        (0, 1, r.downdown_to_minus),
        (0, 2, r.downdown_to_plus),
        (1, 0, r.minus_to_downdown),
        (1, 3, r.minus_to_upup),
        (2, 0, r.plus_to_downdown),
        (2, 3, r.plus_to_upup),
        (3, 1, r.upup_to_minus),
        (3, 2, r.upup_to_plus),
    ];
    for (from, to, g) in entries {
        m[(to, from)] = g;
    }
    // diagonal as the negative column sum of the off-diagonal entries, so the
    // columns cancel exactly
    for j in 0..4 {
        let out: f64 = (0..4).filter(|&i| i != j).map(|i| m[(i, j)]).sum();
        m[(j, j)] = -out;
    }
    RateMatrixW { matrix: m }
}

/// The unnormalized product-of-rates stationary vector of the four-state chain.
pub fn product_of_rates_vector(w: &RateMatrixW) -> [f64; 4] {
    let a = w.rate(3, 1); // E↑↑ → E−
    let b = w.rate(1, 0); // E− → E↓↓
    let c = w.rate(3, 2); // E↑↑ → E+
    let d = w.rate(2, 0); // E+ → E↓↓
    let e = w.rate(0, 1); // E↓↓ → E−
    let f = w.rate(1, 3); // E− → E↑↑
    let g = w.rate(0, 2); // E↓↓ → E+
    let k = w.rate(2, 3); // E+ → E↑↑
    [
        a * b * k + a * b * d + b * c * d + c * d * f,
        a * k * g + a * k * e + a * d * e + c * d * e,
        a * b * g + b * c * g + c * g * f + c * f * e,
        b * k * g + k * g * f + k * f * e + d * f * e,
    ]
}

/// Relative agreement required between the linear solve and the product vector.
pub const MARKOV_AGREEMENT: f64 = 1e-10;

/// Stationary populations of W, by a bordered linear solve cross-checked
/// against the product-of-rates vector.
pub fn markov_steady_state(w: &RateMatrixW) -> Result<InterfacePopulations> {
    let prod = product_of_rates_vector(w);
    let total: f64 = prod.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(QwbError::DisconnectedChain);
    }
    let mut m = w.matrix.clone();
    m.row_mut(0).fill(1.0);
    let mut rhs = Array1::<f64>::zeros(4);
    rhs[0] = 1.0;
    let x = m.solve_into(rhs).map_err(|_| QwbError::DisconnectedChain)?;
    let reference: Vec<f64> = prod.iter().map(|v| v / total).collect();
    let scale = reference.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let diff = x.iter().zip(&reference).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    if !(diff <= MARKOV_AGREEMENT * scale) {
        return Err(QwbError::DisconnectedChain);
    }
    Ok(InterfacePopulations::from_array([x[0], x[1], x[2], x[3]]))
}

/// A closed-form scale or the reason it does not exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Value(f64),
    Singular(&'static str),
}

impl Scale {
    pub fn value(&self) -> Option<f64> {
        match self {
            Scale::Value(v) => Some(*v),
            Scale::Singular(_) => None,
        }
    }

    fn require(&self, name: &str) -> Result<f64> {
        match self {
            Scale::Value(v) => Ok(*v),
            Scale::Singular(why) => Err(QwbError::param(name, *why)),
        }
    }
}

const N_ZERO: &str = "singular at n = 0";

/// Closed-form scales of the rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub jx0: f64,
    pub jc0: f64,
    pub lambda: Scale,
    pub eta_sq: f64,
    pub p0_minus: f64,
    pub j_zero: f64,
    pub j_inf: Scale,
    pub current_ratio: Scale,
    pub n_of_n: Scale,
    pub k1: Scale,
    pub k2: Scale,
    pub k3: f64,
}

/// Jx,0 = Jc(1 − h2/2J23).
pub fn jx0(p: &QwbParams) -> f64 {
    p.jc * (1.0 - p.h2 / (2.0 * p.j23))
}

/// Jc,0 = Jx(1 + h2/2J23).
pub fn jc0(p: &QwbParams) -> f64 {
    p.jx * (1.0 + p.h2 / (2.0 * p.j23))
}

/// N(n) with s = √(n(25n + 8)); defined for n > 0.
pub fn n_function(n: f64) -> f64 {
    let s = (n * (25.0 * n + 8.0)).sqrt();
    64.0 * (2.0 * n + 1.0) * (3.0 * n + 1.0) * (s - n) / ((3.0 * n + s) * (11.0 * n + s + 4.0).powi(2))
}

pub fn derived_scales(p: &QwbParams) -> DerivedScales {
    let n = p.n;
    let eta2 = eta_sq(p);
    let det = 2.0 * p.h1 - 2.0 * p.j23 - p.h2;
    let j2 = p.j * p.j;
    let j23sq = p.j23 * p.j23;
    let lambda = if n > 0.0 {
        Scale::Value(
            ((n + 1.0) * (3.0 * n + 1.0) / (2.0 * n * n)).sqrt()
                * p.h2
                * (det * det + p.gamma1 * p.gamma1 / 4.0).sqrt()
                / (2.0 * p.j23),
        )
    } else {
        Scale::Singular(N_ZERO)
    };
    let j_zero = 8.0 * n * (2.0 * n + 1.0) * p.gamma4 * j2 / ((3.0 * n + 1.0) * eta2);
    let (j_inf, current_ratio) = if n > 0.0 {
        let ji = (n + 1.0) * p.gamma1 * p.h2 * p.h2 / (16.0 * n * j23sq);
        let ratio = 128.0 * n * n * (2.0 * n + 1.0) * p.gamma4 * j2 * j23sq
            / ((n + 1.0) * (3.0 * n + 1.0) * p.h2 * p.h2 * p.gamma1 * eta2);
        (Scale::Value(ji), Scale::Value(ratio))
    } else {
        (Scale::Singular(N_ZERO), Scale::Singular(N_ZERO))
    };
    let common = p.h2 * p.h2 * p.gamma1 / (32.0 * j2 * p.gamma4) * eta2 / (4.0 * j23sq);
    let (k1, k2, n_of_n) = if n > 0.0 {
        (Scale::Value(1.0 + (n + 1.0) / (n * n) * common), Scale::Value(1.0 + common / n), Scale::Value(n_function(n)))
    } else {
        (Scale::Singular(N_ZERO), Scale::Singular(N_ZERO), Scale::Singular(N_ZERO))
    };
    DerivedScales {
        jx0: jx0(p),
        jc0: jc0(p),
        lambda,
        eta_sq: eta2,
        p0_minus: n / (3.0 * n + 1.0),
        j_zero,
        j_inf,
        current_ratio,
        n_of_n,
        k1,
        k2,
        k3: 1.0 + common / (2.0 * n + 1.0),
    }
}

/// P(E−) = (δ² + P⁰Λ²/4)/(δ² + Λ²/4) with δ = Jx − Jx,0.
pub fn population_lorentzian(p: &QwbParams, jx: f64) -> Result<f64> {
    let d = derived_scales(p);
    let q = d.lambda.require("n")?.powi(2) / 4.0;
    let delta = jx - d.jx0;
    if q == 0.0 && delta == 0.0 {
        return Ok(d.p0_minus);
    }
    Ok((delta * delta + d.p0_minus * q) / (delta * delta + q))
}

/// 𝒥 = (𝒥∞δ² + 𝒥₀Λ²/4)/(δ² + Λ²/4) with δ = Jc − Jc,0.
pub fn current_lorentzian(p: &QwbParams, jc: f64) -> Result<f64> {
    let d = derived_scales(p);
    let q = d.lambda.require("n")?.powi(2) / 4.0;
    let j_inf = d.j_inf.require("n")?;
    let delta = jc - d.jc0;
    if q == 0.0 && delta == 0.0 {
        return Ok(d.j_zero);
    }
    Ok((j_inf * delta * delta + d.j_zero * q) / (delta * delta + q))
}

/// All four populations including the O(J²/J23²) corrections and K₁–K₃.
///
/// These closed forms are approximate, so their sum is 1 only to leading order.
pub fn full_steady_state_vector(p: &QwbParams, jx: f64) -> Result<InterfacePopulations> {
    let d = derived_scales(p);
    let n = p.n;
    let lam = d.lambda.require("n")?;
    let (k1, k2) = (d.k1.require("n")?, d.k2.require("n")?);
    let q = lam * lam / 4.0;
    let delta = jx - d.jx0;
    let d2 = delta * delta;
    let den = (k1 + k2 - 1.0) * d2 + q;
    let base = 8.0 * p.j * p.j * p.gamma4 / (d.eta_sq * p.gamma1);
    let pops = [
        ((k1 - 1.0) * d2 + (2.0 * n + 1.0) / (3.0 * n + 1.0) * q) / den,
        (k2 * d2 + d.p0_minus * q) / den,
        ((n + 1.0) * p.h2 * p.h2 / (16.0 * n * p.j23 * p.j23) * d2 + n * (2.0 * n + 1.0) / (3.0 * n + 1.0) * base * q)
            / den,
        d.k3 * n * n * (2.0 * n + 1.0) / ((n + 1.0) * (3.0 * n + 1.0)) * base * q / den,
    ];
    Ok(InterfacePopulations::from_array(pops))
}

/// Spin current implied by the rate model: every cold-bath transition
/// weighted by the population of its initial state.
pub fn rate_model_current(r: &RateSet, pops: &InterfacePopulations) -> f64 {
    (r.upup_to_plus + r.upup_to_minus) * pops.p_upup
        + r.plus_to_downdown * pops.p_plus
        + r.minus_to_downdown * pops.p_minus
}

/// Approximate QFI, 4δ²Λ²(2n+1)/[(δ² + Λ²/4)²(nΛ² + 4(3n+1)δ²)], δ = Jx − Jx,0.
pub fn qfi_approx(p: &QwbParams, jx: f64) -> Result<f64> {
    let d = derived_scales(p);
    let lam = d.lambda.require("n")?;
    let n = p.n;
    let delta = jx - d.jx0;
    let d2 = delta * delta;
    let l2 = lam * lam;
    let den = (d2 + l2 / 4.0).powi(2) * (n * l2 + 4.0 * (3.0 * n + 1.0) * d2);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * d2 * l2 * (2.0 * n + 1.0) / den)
}
