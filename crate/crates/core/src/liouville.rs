//! Lindblad generator, steady-state solvers and a time-evolution oracle.
//!
//! Superoperators use column stacking, vec(AXB) = (Bᵀ ⊗ A) vec(X), so
//! −i[H, ρ] becomes −i(I ⊗ H − Hᵀ ⊗ I) and γℳ[L] becomes
//! γ(L* ⊗ L − ½ I ⊗ L†L − ½ (L†L)ᵀ ⊗ I).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, FactorizeInto, Inverse, ReciprocalConditionNum, Solve};

use crate::error::{QwbError, Result};
use crate::krylov::{gmres, GmresOptions};
use crate::linalg::{
    dagger, frobenius, hermitian_eigenvalues, hermiticity_defect, hermitize, identity, kron, trace, trace_distance,
    unvectorize, vectorize, Operator, C64, I, ONE, ZERO,
};
use crate::model::Dissipator;
use crate::spinops::PureState;

/// Hermitian, unit-trace state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity (−1e-8).
    pub fn new(m: Operator) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(QwbError::Dimension("density matrix must be square".into()));
        }
        let defect = hermiticity_defect(&m);
        if defect > 1e-10 {
            return Err(QwbError::NonHermitian(defect));
        }
        let tr = trace(&m);
        if (tr - ONE).norm() > 1e-10 {
            return Err(QwbError::param("rho", format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigenvalues(&m)?[0];
        if min < -1e-8 {
            return Err(QwbError::param("rho", format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { m })
    }

    /// Hermitizes and rescales to unit trace without the positivity check.
    pub fn from_unnormalized(m: &Operator) -> Result<Self> {
        let h = hermitize(m);
        let tr = trace(&h).re;
        if tr.abs() < 1e-12 {
            return Err(QwbError::TracelessNullVector(tr.abs()));
        }
        Ok(DensityMatrix { m: h.mapv(|z| z / tr) })
    }

    pub fn pure(state: &PureState) -> Self {
        DensityMatrix { m: state.projector() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { m: identity(dim).mapv(|z| z / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.m
    }

    pub fn into_matrix(self) -> Operator {
        self.m
    }

    /// tr(op ρ).
    pub fn expectation(&self, op: &Operator) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += op[(i, k)] * self.m[(k, i)];
            }
        }
        acc
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.m)?[0])
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_distance(&self.m, &other.m)
    }
}

/// Jump operator in coordinate form, for cheap L X L† products.
#[derive(Debug, Clone)]
struct SparseJump {
    rate: f64,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseJump {
    fn new(d: &Dissipator) -> Self {
        let entries =
            d.operator.indexed_iter().filter(|(_, z)| z.norm() != 0.0).map(|((i, j), z)| (i, j, *z)).collect();
        SparseJump { rate: d.rate, entries }
    }

    /// acc += rate · L X L†.
    fn sandwich_into(&self, x: &Operator, acc: &mut Operator) {
        let n = x.nrows();
        let mut lx = Array2::<C64>::zeros((n, n));
        for &(a, k, v) in &self.entries {
            let row = x.row(k);
            let mut out = lx.row_mut(a);
            out.scaled_add(v, &row);
        }
        for &(b, c, v) in &self.entries {
            let w = v.conj() * self.rate;
            for a in 0..n {
                acc[(a, b)] += lx[(a, c)] * w;
            }
        }
    }
}

/// The generator ρ ↦ −i[H, ρ] + Σ γ ℳ[L] in operator form.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    hamiltonian: Operator,
    dissipators: Vec<Dissipator>,
    /// A = −iH − ½ Σ γ L†L, so that ℒ(ρ) = Aρ + ρA† + Σ γ LρL†.
    effective: Operator,
    effective_dagger: Operator,
    jumps: Vec<SparseJump>,
}

impl Lindbladian {
    pub fn new(hamiltonian: Operator, dissipators: Vec<Dissipator>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(QwbError::Dimension("Hamiltonian must be square".into()));
        }
        let defect = hermiticity_defect(&hamiltonian);
        if defect > 1e-10 {
            return Err(QwbError::NonHermitian(defect));
        }
        let dissipators: Vec<Dissipator> = dissipators.into_iter().filter(|d| d.rate != 0.0).collect();
        let mut effective = hamiltonian.mapv(|z| -I * z);
        for d in &dissipators {
            if d.operator.dim() != (n, n) {
                return Err(QwbError::Dimension(format!("jump `{}` has the wrong shape", d.label)));
            }
            if !(d.rate > 0.0) || !d.rate.is_finite() {
                return Err(QwbError::param("rate", format!("jump `{}` has rate {}", d.label, d.rate)));
            }
            let ldl = dagger(&d.operator).dot(&d.operator);
            effective.scaled_add(C64::new(-0.5 * d.rate, 0.0), &ldl);
        }
        let jumps = dissipators.iter().map(SparseJump::new).collect();
        let effective_dagger = dagger(&effective);
        Ok(Lindbladian { hamiltonian, dissipators, effective, effective_dagger, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// ℒ(ρ) evaluated directly, without a superoperator matrix.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let mut out = self.effective.dot(rho) + rho.dot(&self.effective_dagger);
        self.apply_jumps_into(rho, &mut out);
        out
    }

    fn apply_jumps_into(&self, rho: &Operator, acc: &mut Operator) {
        for j in &self.jumps {
            j.sandwich_into(rho, acc);
        }
    }

    /// Dense N² × N² matrix of the generator.
    pub fn superoperator(&self) -> Superoperator {
        let n = self.dim();
        let id = identity(n);
        let h = &self.hamiltonian;
        let mut m = (kron(&id, h) - kron(&h.t().to_owned(), &id)).mapv(|z| -I * z);
        for d in &self.dissipators {
            let l = &d.operator;
            let ldl = dagger(l).dot(l);
            let g = C64::new(d.rate, 0.0);
            m.scaled_add(g, &kron(&l.mapv(|z| z.conj()), l));
            m.scaled_add(-g * 0.5, &kron(&id, &ldl));
            m.scaled_add(-g * 0.5, &kron(&ldl.t().to_owned(), &id));
        }
        Superoperator { n, matrix: m }
    }
}

/// Builds the dense superoperator of −i[H, ·] + Σ γ ℳ[L].
pub fn build_liouvillian(h: &Operator, dissipators: &[Dissipator]) -> Result<Superoperator> {
    Ok(Lindbladian::new(h.clone(), dissipators.to_vec())?.superoperator())
}

/// Column-stacked matrix form of a Lindblad generator.
#[derive(Debug, Clone)]
pub struct Superoperator {
    n: usize,
    matrix: Array2<C64>,
}

impl Superoperator {
    /// Hilbert-space dimension N (the matrix is N² × N²).
    pub fn hilbert_dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        unvectorize(&self.matrix.dot(&vectorize(rho)), self.n)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// Eigenvalues sorted by increasing magnitude.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        let (w, _) = self.matrix.eig()?;
        let mut w = w.to_vec();
        w.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        Ok(w)
    }
}

/// Null-space solution of ℒ(ρ) = 0.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖ℒ(ρ)‖_F.
    pub residual: f64,
    pub null_dim: usize,
}

/// Reciprocal condition number below which the bordered system is treated as singular.
const BORDERED_RCOND_FLOOR: f64 = 1e-14;
const REFINEMENT_STEPS: usize = 2;

fn residual_of(l: &Superoperator, rho: &DensityMatrix) -> f64 {
    frobenius(&l.apply(rho.matrix()))
}

/// Steady state by a direct solve of ℒ with the ρ₀₀ row replaced by the trace row.
///
/// That row is redundant because the trace functional is a left null vector.
/// A second null direction makes the bordered matrix singular, which is
/// detected through its reciprocal condition number.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    let n = l.n;
    let dim = n * n;
    let mut m = l.matrix.clone();
    m.row_mut(0).fill(ZERO);
    for i in 0..n {
        m[(0, i + i * n)] = ONE;
    }
    let mut rhs = Array1::<C64>::zeros(dim);
    rhs[0] = ONE;
    let lu = m.clone().factorize_into().map_err(|_| QwbError::DegenerateSteadyState(2))?;
    let rcond = lu.rcond()?;
    if !(rcond > BORDERED_RCOND_FLOOR) {
        return Err(QwbError::DegenerateSteadyState(2));
    }
    let mut x = lu.solve(&rhs)?;
    // iterative refinement keeps finite differences of ρ_ss clean
    for _ in 0..REFINEMENT_STEPS {
        let r = &rhs - &m.dot(&x);
        x += &lu.solve_into(r)?;
    }
    let rho = DensityMatrix::from_unnormalized(&unvectorize(&x, n))?;
    let residual = residual_of(l, &rho);
    Ok(SteadyState { rho, residual, null_dim: 1 })
}

/// Steady state from the eigenvector of the smallest-magnitude eigenvalue.
///
/// The eigenvector is polished by inverse iteration with a shift just off
/// the eigenvalue. `null_dim` counts eigenvalues below 1e-10·‖ℒ‖_F.
pub fn steady_state_eig(l: &Superoperator) -> Result<SteadyState> {
    let n = l.n;
    let dim = n * n;
    let scale = l.frobenius_norm();
    let (w, v) = l.matrix.eig()?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| w[a].norm().partial_cmp(&w[b].norm()).unwrap());
    let null_dim = order.iter().take_while(|&&k| w[k].norm() < 1e-10 * scale).count().max(1);
    if null_dim > 1 {
        return Err(QwbError::DegenerateSteadyState(null_dim));
    }
    let k = order[0];
    let mut x = v.column(k).to_owned();
    let shift = w[k] - C64::new(1e-12 * scale, 0.0);
    let shifted = &l.matrix - &Array2::from_diag(&Array1::from_elem(dim, shift));
    let lu = shifted.factorize_into()?;
    for _ in 0..3 {
        let y = lu.solve(&x)?;
        let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = y.mapv(|z| z / nrm);
    }
    let tr: C64 = (0..n).map(|i| x[i + i * n]).sum();
    if tr.norm() < 1e-12 {
        return Err(QwbError::TracelessNullVector(tr.norm()));
    }
    let rho = DensityMatrix::from_unnormalized(&unvectorize(&x.mapv(|z| z / tr), n))?;
    let residual = residual_of(l, &rho);
    Ok(SteadyState { rho, residual, null_dim })
}

/// Preconditioned Krylov steady state for spaces too large for a dense superoperator.
///
/// ℒ is split as 𝒮(X) + 𝒥(X) with 𝒮(X) = AX + XA† and 𝒥(X) = Σ γ LXL†.
/// 𝒮 is inverted exactly through the eigenbasis of A, and GMRES solves
/// (I + 𝒥𝒮⁻¹) z = −ℒ(x₀); then ρ ∝ x₀ + 𝒮⁻¹ z.
pub fn steady_state_iterative(l: &Lindbladian, guess: Option<&Operator>, opts: &GmresOptions) -> Result<SteadyState> {
    let n = l.dim();
    let (d, v) = l.effective.eig()?;
    let vinv = v.inv()?;
    let vh = dagger(&v);
    let vinv_h = dagger(&vinv);
    let denom = Array2::from_shape_fn((n, n), |(i, j)| ONE / (d[i] + d[j].conj()));
    let sylvester_inverse = |y: &Operator| -> Operator {
        let w = vinv.dot(y).dot(&vinv_h) * &denom;
        v.dot(&w).dot(&vh)
    };
    let x0 = match guess {
        Some(g) if g.dim() == (n, n) => DensityMatrix::from_unnormalized(g)?.into_matrix(),
        _ => identity(n).mapv(|z| z / n as f64),
    };
    let b = vectorize(&l.apply(&x0).mapv(|z| -z));
    let scale = frobenius(&l.effective);
    let opts = GmresOptions { abs_tol: opts.abs_tol.max(1e-15 * scale), ..*opts };
    let out = gmres(
        |zv| {
            let z = unvectorize(zv, n);
            let mut acc = z.clone();
            l.apply_jumps_into(&sylvester_inverse(&z), &mut acc);
            vectorize(&acc)
        },
        &b,
        Array1::zeros(n * n),
        &opts,
    );
    if !out.converged {
        return Err(QwbError::IterativeSolve { iterations: out.iterations, residual: out.residual });
    }
    let rho = DensityMatrix::from_unnormalized(&(&x0 + &sylvester_inverse(&unvectorize(&out.x, n))))?;
    let residual = frobenius(&l.apply(rho.matrix()));
    Ok(SteadyState { rho, residual, null_dim: 1 })
}

/// Final state of [`evolve_to_steady`] or [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub rho: DensityMatrix,
    pub time: f64,
    pub steps: usize,
    pub residual: f64,
}

/// Absolute local error tolerance of the embedded Runge–Kutta pair.
pub const RK_ABS_TOL: f64 = 1e-10;

/// Integrates dρ/dt = ℒ(ρ) with the Dormand–Prince 5(4) pair and a PI step
/// controller until ‖ℒ(ρ)‖_F < `tol`.
///
/// The residual cannot fall much below RK_ABS_TOL·‖ℒ‖; follow with [`evolve`]
/// to let slow modes decay further.
pub fn evolve_to_steady(l: &Lindbladian, rho0: &DensityMatrix, t_max: f64, tol: f64) -> Result<Evolution> {
    if !(tol > 0.0) {
        return Err(QwbError::param("tol", "must be positive"));
    }
    integrate(l, rho0, t_max, Some(tol))
}

/// Integrates over exactly `duration`.
pub fn evolve(l: &Lindbladian, rho0: &DensityMatrix, duration: f64) -> Result<Evolution> {
    if !(duration >= 0.0) {
        return Err(QwbError::param("duration", "must be non-negative"));
    }
    integrate(l, rho0, duration, None)
}

fn integrate(l: &Lindbladian, rho0: &DensityMatrix, t_max: f64, tol: Option<f64>) -> Result<Evolution> {
    if rho0.dim() != l.dim() {
        return Err(QwbError::Dimension("initial state does not match the generator".into()));
    }
    const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // fifth-order weights minus fourth-order weights
    const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let mut y = rho0.matrix().clone();
    let mut k1 = l.apply(&y);
    let mut residual = frobenius(&k1);
    let mut t = 0.0;
    let mut steps = 0;
    let mut h = (1e-3 / (residual + 1e-300)).min(t_max).max(1e-12);
    let mut err_prev: f64 = 1.0;
    let (alpha, beta) = (0.7 / 5.0, 0.4 / 5.0);
    while tol.map_or(t < t_max, |tol| residual >= tol) {
        if t >= t_max {
            return Err(QwbError::NotConverged { time: t, residual });
        }
        h = h.min(t_max - t);
        let mut ks: Vec<Operator> = vec![k1.clone()];
        for row in A.iter() {
            let mut stage = y.clone();
            for (a, k) in row.iter().zip(&ks) {
                if *a != 0.0 {
                    stage.scaled_add(C64::new(h * a, 0.0), k);
                }
            }
            ks.push(l.apply(&stage));
        }
        // FSAL: the sixth stage argument is the new solution
        let mut y_new = y.clone();
        for (a, k) in A[5].iter().zip(&ks) {
            if *a != 0.0 {
                y_new.scaled_add(C64::new(h * a, 0.0), k);
            }
        }
        let mut err = 0.0f64;
        let n = y.nrows();
        for i in 0..n {
            for j in 0..n {
                let mut e = ZERO;
                for (w, k) in E.iter().zip(&ks) {
                    e += k[(i, j)] * *w;
                }
                err = err.max((e * h).norm() / RK_ABS_TOL);
            }
        }
        if err <= 1.0 {
            t += h;
            steps += 1;
            y = y_new;
            k1 = ks.pop().unwrap();
            residual = frobenius(&k1);
            let factor = 0.9 * err.max(1e-10).powf(-alpha) * err_prev.powf(beta);
            h *= factor.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            h *= (0.9 * err.powf(-1.0 / 5.0)).clamp(0.1, 1.0);
        }
    }
    Ok(Evolution { rho: DensityMatrix::from_unnormalized(&y)?, time: t, steps, residual })
}
