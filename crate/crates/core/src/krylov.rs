//! Restarted GMRES for complex linear systems given as closures.

use ndarray::{Array1, Array2};

use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    /// Stop once the residual falls below `rel_tol · ‖b‖` ...
    pub rel_tol: f64,
    /// ... or below this absolute floor, whichever is larger.
    pub abs_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { restart: 150, max_iter: 5000, rel_tol: 1e-10, abs_tol: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Array1<C64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Givens rotation zeroing `b` in (a, b).
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b.norm() == 0.0 {
        return (1.0, ZERO);
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Solves `apply(x) = b` starting from `x0`.
pub fn gmres<F>(mut apply: F, b: &Array1<C64>, x0: Array1<C64>, opts: &GmresOptions) -> GmresOutcome
where
    F: FnMut(&Array1<C64>) -> Array1<C64>,
{
    let n = b.len();
    let target = (opts.rel_tol * norm(b)).max(opts.abs_tol);
    let mut x = x0;
    let mut iterations = 0;
    let m = opts.restart.max(1);
    loop {
        let r = b - &apply(&x);
        let beta = norm(&r);
        if beta <= target || iterations >= opts.max_iter {
            return GmresOutcome { converged: beta <= target, x, iterations, residual: beta };
        }
        let mut basis: Vec<Array1<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.mapv(|z| z / beta));
        let mut h = Array2::<C64>::zeros((m + 1, m));
        let mut cs = vec![0.0; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&basis[k]);
            iterations += 1;
            for (i, v) in basis.iter().enumerate() {
                let hik = dotc(v, &w);
                h[(i, k)] = hik;
                w.scaled_add(-hik, v);
            }
            // second pass for orthogonality
            for (i, v) in basis.iter().enumerate() {
                let corr = dotc(v, &w);
                h[(i, k)] += corr;
                w.scaled_add(-corr, v);
            }
            let hn = norm(&w);
            h[(k + 1, k)] = C64::new(hn, 0.0);
            for i in 0..k {
                let (a, bb) = (h[(i, k)], h[(i + 1, k)]);
                h[(i, k)] = a * cs[i] + sn[i] * bb;
                h[(i + 1, k)] = -sn[i].conj() * a + bb * cs[i];
            }
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            cs[k] = c;
            sn[k] = s;
            h[(k, k)] = h[(k, k)] * c + s * h[(k + 1, k)];
            h[(k + 1, k)] = ZERO;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            k_used = k + 1;
            let breakdown = hn <= 1e-300;
            if !breakdown {
                basis.push(w.mapv(|z| z / hn));
            }
            if g[k + 1].norm() <= target || iterations >= opts.max_iter || breakdown {
                break;
            }
        }
        // back substitution on the k_used × k_used triangle
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[(i, j)] * y[j];
            }
            y[i] = acc / h[(i, i)];
        }
        for (j, yj) in y.iter().enumerate() {
            x.scaled_add(*yj, &basis[j]);
        }
        debug_assert_eq!(x.len(), n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 30;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                C64::new(4.0 + i as f64 * 0.1, 0.5)
            } else {
                C64::new(((i * 7 + j * 3) % 5) as f64 * 0.05, ((i + 2 * j) % 3) as f64 * 0.03)
            }
        });
        let truth: Array1<C64> = (0..n).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let b = a.dot(&truth);
        let opts = GmresOptions { restart: 7, rel_tol: 1e-13, ..Default::default() };
        let out = gmres(|v| a.dot(v), &b, Array1::from_elem(n, re(0.0)), &opts);
        assert!(out.converged);
        let err = norm(&(&out.x - &truth)) / norm(&truth);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn exact_guess_returns_immediately() {
        let b: Array1<C64> = (0..5).map(|i| re(i as f64)).collect();
        let out = gmres(|v| v.clone(), &b, b.clone(), &GmresOptions::default());
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }
}
