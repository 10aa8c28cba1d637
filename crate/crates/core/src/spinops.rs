//! Operator algebra on multi-site Hilbert spaces.
//!
//! Basis ordering: site 0 is the slowest-varying tensor factor, and each qubit
//! uses the order (|↑⟩, |↓⟩). A basis index written in binary is therefore the
//! spin pattern with `1` meaning ↓, e.g. index 0b0100 of four qubits is |↑↓↑↑⟩.

use ndarray::{Array1, Array2};

use crate::error::{QwbError, Result};
use crate::linalg::{identity, kron, re, Operator, C64, I, ONE, ZERO};

/// Local dimensions and labels of a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteLayout {
    local_dims: Vec<usize>,
    labels: Vec<String>,
}

impl SiteLayout {
    pub fn new(local_dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if local_dims.is_empty() || local_dims.len() != labels.len() {
            return Err(QwbError::Dimension(format!(
                "{} local dimensions for {} labels",
                local_dims.len(),
                labels.len()
            )));
        }
        if local_dims.contains(&0) {
            return Err(QwbError::Dimension("zero local dimension".into()));
        }
        let layout = SiteLayout { local_dims, labels };
        if layout.total_dim() < 2 {
            return Err(QwbError::Dimension("total dimension below 2".into()));
        }
        Ok(layout)
    }

    /// `n` qubits labelled `s0 .. s{n-1}`.
    pub fn qubits(n: usize) -> Self {
        SiteLayout { local_dims: vec![2; n], labels: (0..n).map(|i| format!("s{i}")).collect() }
    }

    pub fn n_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn is_qubit(&self, site: usize) -> bool {
        self.local_dims.get(site) == Some(&2)
    }

    /// Mixed-radix digits of a basis index, most significant (site 0) first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_sites()];
        for (k, &d) in self.local_dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.local_dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

pub fn sigma_x() -> Operator {
    Array2::from_shape_vec((2, 2), vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn sigma_y() -> Operator {
    Array2::from_shape_vec((2, 2), vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> Operator {
    Array2::from_shape_vec((2, 2), vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

/// Raising operator |↑⟩⟨↓|.
pub fn sigma_plus() -> Operator {
    Array2::from_shape_vec((2, 2), vec![ZERO, ONE, ZERO, ZERO]).unwrap()
}

/// Lowering operator |↓⟩⟨↑|.
pub fn sigma_minus() -> Operator {
    Array2::from_shape_vec((2, 2), vec![ZERO, ZERO, ONE, ZERO]).unwrap()
}

/// Projector onto the excited state, σ₊σ₋ = |↑⟩⟨↑|.
pub fn excited_projector() -> Operator {
    sigma_plus().dot(&sigma_minus())
}

/// Places `op` at `site` with identities elsewhere.
pub fn embed_local(op: &Operator, site: usize, layout: &SiteLayout) -> Result<Operator> {
    if site >= layout.n_sites() {
        return Err(QwbError::Dimension(format!("site {site} outside a {}-site layout", layout.n_sites())));
    }
    let d = layout.local_dims[site];
    if op.nrows() != d || op.ncols() != d {
        return Err(QwbError::Dimension(format!(
            "operator is {}x{} but site {site} has dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let left: usize = layout.local_dims[..site].iter().product();
    let right: usize = layout.local_dims[site + 1..].iter().product();
    Ok(kron(&kron(&identity(left), op), &identity(right)))
}

/// X̂ᵢⱼ = σₓσₓ + σ_yσ_y = 2(σ₊σ₋ + σ₋σ₊).
pub fn xx_exchange(i: usize, j: usize, layout: &SiteLayout) -> Result<Operator> {
    if i == j {
        return Err(QwbError::Dimension(format!("exchange needs two sites, got {i} twice")));
    }
    for s in [i, j] {
        if !layout.is_qubit(s) {
            return Err(QwbError::Dimension(format!("site {s} is not a qubit")));
        }
    }
    let pm = embed_local(&sigma_plus(), i, layout)?.dot(&embed_local(&sigma_minus(), j, layout)?);
    let mp = embed_local(&sigma_minus(), i, layout)?.dot(&embed_local(&sigma_plus(), j, layout)?);
    Ok((pm + mp).mapv(|z| z * 2.0))
}

/// Σᵢ σ_z⁽ⁱ⁾ over the qubit sites.
pub fn total_sz(layout: &SiteLayout) -> Result<Operator> {
    let n = layout.total_dim();
    let mut acc = Array2::zeros((n, n));
    for s in 0..layout.n_sites() {
        if layout.is_qubit(s) {
            acc += &embed_local(&sigma_z(), s, layout)?;
        }
    }
    Ok(acc)
}

/// Reduced operator on the `keep` sites (kept in ascending site order).
pub fn partial_trace(rho: &Operator, keep: &[usize], layout: &SiteLayout) -> Result<Operator> {
    if keep.is_empty() {
        return Err(QwbError::Dimension("partial trace with an empty keep set".into()));
    }
    let n = layout.total_dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(QwbError::Dimension(format!(
            "matrix is {}x{} but layout dimension is {n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut sites = keep.to_vec();
    sites.sort_unstable();
    sites.dedup();
    if sites.len() != keep.len() || *sites.last().unwrap() >= layout.n_sites() {
        return Err(QwbError::Dimension(format!("invalid keep set {keep:?}")));
    }
    let kept_dims: Vec<usize> = sites.iter().map(|&s| layout.local_dims[s]).collect();
    let traced: Vec<usize> = (0..layout.n_sites()).filter(|s| !sites.contains(s)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| layout.local_dims[s]).collect();
    let compose = |digits: &[usize], which: &[usize], dims: &[usize]| {
        which.iter().zip(dims).fold(0, |acc, (&s, &d)| acc * d + digits[s])
    };
    let mut kept_index = Vec::with_capacity(n);
    let mut traced_index = Vec::with_capacity(n);
    for idx in 0..n {
        let digits = layout.digits(idx);
        kept_index.push(compose(&digits, &sites, &kept_dims));
        traced_index.push(compose(&digits, &traced, &traced_dims));
    }
    let m: usize = kept_dims.iter().product();
    let mut out = Array2::<C64>::zeros((m, m));
    for a in 0..n {
        for b in 0..n {
            if traced_index[a] == traced_index[b] {
                out[(kept_index[a], kept_index[b])] += rho[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Array1<C64>,
}

impl PureState {
    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QwbError::Dimension("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(PureState { amplitudes: amplitudes.mapv(|z| z / norm) })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Array1::zeros(dim);
        v[index] = ONE;
        PureState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// |ψ⟩⟨ψ|.
    pub fn projector(&self) -> Operator {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(i, j)| self.amplitudes[i] * self.amplitudes[j].conj())
    }
}

/// The two-spin interface eigenbasis for sites (2, 3).
#[derive(Debug, Clone)]
pub struct InterfaceStates {
    pub down_down: PureState,
    pub minus: PureState,
    pub plus: PureState,
    pub up_up: PureState,
}

impl InterfaceStates {
    /// States in the rate-model ordering [E↓↓, E−, E+, E↑↑].
    pub fn ordered(&self) -> [&PureState; 4] {
        [&self.down_down, &self.minus, &self.plus, &self.up_up]
    }
}

fn two_qubit(a: [f64; 4]) -> Array1<C64> {
    a.iter().map(|&x| re(x)).collect()
}

/// |Ψ±⟩ = (|↑↓⟩ ± |↓↑⟩)/√2.
pub fn psi_plus() -> PureState {
    PureState::normalized(two_qubit([0.0, 1.0, 1.0, 0.0])).unwrap()
}

pub fn psi_minus() -> PureState {
    PureState::normalized(two_qubit([0.0, 1.0, -1.0, 0.0])).unwrap()
}

/// First-order interface eigenstates with ε = h2/(4 J23):
/// |E₊⟩ ∝ |Ψ₊⟩ + ε|Ψ−⟩ and |E−⟩ ∝ |Ψ−⟩ − ε|Ψ₊⟩, each normalized.
pub fn interface_states(h2: f64, j23: f64) -> Result<InterfaceStates> {
    if !(j23 > 0.0) {
        return Err(QwbError::param("J23", "must be positive"));
    }
    let eps = h2 / (4.0 * j23);
    let p = psi_plus();
    let m = psi_minus();
    let plus = PureState::normalized(p.amplitudes() + &m.amplitudes().mapv(|z| z * eps))?;
    let minus = PureState::normalized(m.amplitudes() - &p.amplitudes().mapv(|z| z * eps))?;
    Ok(InterfaceStates { down_down: PureState::basis(4, 3), minus, plus, up_up: PureState::basis(4, 0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, trace};

    fn apply(op: &Operator, s: &PureState) -> Array1<C64> {
        op.dot(s.amplitudes())
    }

    #[test]
    fn sigma_z_on_first_of_two() {
        let l = SiteLayout::qubits(2);
        let z = embed_local(&sigma_z(), 0, &l).unwrap();
        let d: Vec<f64> = z.diag().iter().map(|x| x.re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(frobenius(&(z.clone() - Array2::from_diag(&z.diag()))), 0.0);
    }

    #[test]
    fn embedded_identity_is_identity() {
        let l = SiteLayout::qubits(3);
        for s in 0..3 {
            assert_eq!(embed_local(&identity(2), s, &l).unwrap(), identity(8));
        }
    }

    #[test]
    fn sigma_x_flips_second_spin() {
        let l = SiteLayout::qubits(2);
        let x = embed_local(&sigma_x(), 1, &l).unwrap();
        let out = apply(&x, &PureState::basis(4, 0));
        assert_eq!(out, PureState::basis(4, 1).amplitudes().clone());
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let l = SiteLayout::new(vec![2, 3], vec!["a".into(), "b".into()]).unwrap();
        assert!(embed_local(&sigma_x(), 1, &l).is_err());
        assert!(embed_local(&sigma_x(), 2, &l).is_err());
    }

    #[test]
    fn exchange_hops_and_conserves() {
        let l = SiteLayout::qubits(2);
        let x = xx_exchange(0, 1, &l).unwrap();
        // |↑↓⟩ -> 2|↓↑⟩
        let out = apply(&x, &PureState::basis(4, 1));
        assert_eq!(out, PureState::basis(4, 2).amplitudes().mapv(|z| z * 2.0));
        let out = apply(&x, &PureState::basis(4, 0));
        assert!(out.iter().all(|z| z.norm() == 0.0));
        let m = psi_minus();
        let val = m.amplitudes().mapv(|z| z.conj()).dot(&apply(&x, &m));
        assert!((val.re + 2.0).abs() < 1e-14 && val.im.abs() < 1e-14);
    }

    #[test]
    fn exchange_matches_pauli_form() {
        let l = SiteLayout::qubits(3);
        let xx = embed_local(&sigma_x(), 0, &l).unwrap().dot(&embed_local(&sigma_x(), 2, &l).unwrap());
        let yy = embed_local(&sigma_y(), 0, &l).unwrap().dot(&embed_local(&sigma_y(), 2, &l).unwrap());
        let x = xx_exchange(0, 2, &l).unwrap();
        assert!(frobenius(&(x - xx - yy)) < 1e-14);
    }

    #[test]
    fn exchange_rejects_bad_sites() {
        let l = SiteLayout::new(vec![2, 3, 2], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert!(xx_exchange(0, 0, &l).is_err());
        assert!(xx_exchange(0, 1, &l).is_err());
        assert!(xx_exchange(0, 2, &l).is_ok());
    }

    #[test]
    fn marginals_of_simple_states() {
        let l = SiteLayout::qubits(2);
        let mixed = identity(4).mapv(|z| z * 0.25);
        let r = partial_trace(&mixed, &[0], &l).unwrap();
        assert!(frobenius(&(r - identity(2).mapv(|z| z * 0.5))) < 1e-15);

        let bell = psi_minus().projector();
        let r = partial_trace(&bell, &[0], &l).unwrap();
        assert!(frobenius(&(r - identity(2).mapv(|z| z * 0.5))) < 1e-15);

        let rho_b =
            Array2::from_shape_vec((2, 2), vec![re(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), re(0.7)]).unwrap();
        let up = PureState::basis(2, 0).projector();
        let r = partial_trace(&kron(&up, &rho_b), &[1], &l).unwrap();
        assert!(frobenius(&(r - rho_b)) < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_ascending_order() {
        let l = SiteLayout::qubits(3);
        let a = PureState::basis(2, 0).projector();
        let b = PureState::basis(2, 1).projector();
        let c = identity(2).mapv(|z| z * 0.5);
        let full = kron(&kron(&a, &b), &c);
        let r = partial_trace(&full, &[2, 0], &l).unwrap();
        assert!(frobenius(&(r - kron(&a, &c))) < 1e-15);
        assert!((trace(&partial_trace(&full, &[1], &l).unwrap()) - ONE).norm() < 1e-15);
        assert!(partial_trace(&full, &[], &l).is_err());
        assert!(partial_trace(&full, &[3], &l).is_err());
    }

    #[test]
    fn interface_states_limits() {
        let s = interface_states(0.0, 20.0).unwrap();
        assert!((s.minus.inner(&psi_minus()).re - 1.0).abs() < 1e-15);
        assert!((s.plus.inner(&psi_plus()).re - 1.0).abs() < 1e-15);
        let s = interface_states(0.5, 20.0).unwrap();
        // |E−⟩ ∝ |Ψ−⟩ − 0.00625|Ψ₊⟩
        let ratio = s.minus.inner(&psi_plus()).re / s.minus.inner(&psi_minus()).re;
        assert!((ratio + 0.00625).abs() < 1e-15);
        assert!(s.plus.inner(&s.minus).norm() < 1e-12);
        assert!(interface_states(0.5, 0.0).is_err());
    }
}
