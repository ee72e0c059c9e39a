use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{check_marginals, Coupling};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub max_iter: usize,
    /// Stop once the row marginals deviate by less than this in L1.
    pub tol: f64,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-9,
        }
    }
}

/// Dual potentials `(f, g)`; reused between calls to warm-start.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Potentials {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SinkhornReport {
    pub coupling: Coupling,
    pub iterations: usize,
    pub converged: bool,
    pub marginal_error: f64,
    /// `<f, a> + <g, b>` after each full sweep; nondecreasing.
    pub dual_trace: Vec<f64>,
}

/// Entropic projection `argmin <cost, pi> + eps KL(pi | a b^T)` over the
/// couplings of `a` and `b`.
pub fn sinkhorn(
    cost: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    eps: f64,
    opts: SinkhornOptions,
) -> Result<Coupling> {
    let mut pot = Potentials::default();
    sinkhorn_with(cost, a, b, eps, opts, &mut pot).map(|r| r.coupling)
}

fn log_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        libm::log(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// `-eps * log sum_j w[j] exp((pot[j] - c[j]) / eps)` over positive weights.
#[inline]
fn soft_min(eps: f64, w: &[f64], pot: &[f64], c: &[f64]) -> f64 {
    let inv = 1.0 / eps;
    let mut hi = f64::NEG_INFINITY;
    for ((&wj, &pj), &cj) in w.iter().zip(pot).zip(c) {
        if wj > 0.0 {
            hi = hi.max((pj - cj) * inv);
        }
    }
    if hi == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut acc = 0.0;
    for ((&wj, &pj), &cj) in w.iter().zip(pot).zip(c) {
        let z = (pj - cj) * inv - hi;
        // terms below e^-60 cannot change a double-precision sum that
        // already holds one term of order one
        if wj > 0.0 && z > -60.0 {
            acc += wj * libm::exp(z);
        }
    }
    -eps * (hi + libm::log(acc))
}

/// Log-domain Sinkhorn starting from (and updating) `pot`.
pub fn sinkhorn_with(
    cost: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    eps: f64,
    opts: SinkhornOptions,
    pot: &mut Potentials,
) -> Result<SinkhornReport> {
    let (m, n) = cost.shape();
    if a.len() != m || b.len() != n {
        return Err(Error::ShapeMismatch {
            context: "sinkhorn marginals",
            expected: (m, n),
            found: (a.len(), b.len()),
        });
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter("sinkhorn eps must be positive".into()));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("sinkhorn cost"));
    }
    let total = check_marginals(a, b)?;
    if total == 0.0 || m == 0 || n == 0 {
        return Ok(SinkhornReport {
            coupling: Coupling::new(DMatrix::zeros(m, n), a.clone(), b.clone()),
            iterations: 0,
            converged: true,
            marginal_error: 0.0,
            dual_trace: Vec::new(),
        });
    }

    let log_a: Vec<f64> = a.iter().map(|&x| log_or_neg_inf(x)).collect();
    let log_b: Vec<f64> = b.iter().map(|&x| log_or_neg_inf(x)).collect();
    if pot.f.len() != m || pot.g.len() != n {
        pot.f = alloc::vec![0.0; m];
        pot.g = alloc::vec![0.0; n];
    }
    // row-major copy for cache-friendly row sweeps
    let cost_t = cost.transpose();
    let col_major = cost.as_slice();
    let row_major = cost_t.as_slice();

    let update_g = |f: &[f64], g: &mut [f64]| {
        for j in 0..n {
            g[j] = if log_b[j] > f64::NEG_INFINITY {
                soft_min(eps, a.as_slice(), f, &col_major[j * m..(j + 1) * m])
            } else {
                0.0
            };
        }
    };
    let update_f = |g: &[f64], f: &mut [f64]| {
        for i in 0..m {
            f[i] = if log_a[i] > f64::NEG_INFINITY {
                soft_min(eps, b.as_slice(), g, &row_major[i * n..(i + 1) * n])
            } else {
                0.0
            };
        }
    };
    let dual = |f: &[f64], g: &[f64]| -> f64 {
        let fa: f64 = f.iter().zip(a.iter()).map(|(x, w)| x * w).sum();
        let gb: f64 = g.iter().zip(b.iter()).map(|(x, w)| x * w).sum();
        fa + gb
    };

    let mut f_next = alloc::vec![0.0; m];
    update_g(&pot.f, &mut pot.g);
    let mut dual_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut err = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        update_f(&pot.g, &mut f_next);
        // with g just updated the columns are exact; rows are off by
        // a_i (exp((f_i - f_next_i)/eps) - 1)
        err = (0..m)
            .filter(|&i| log_a[i] > f64::NEG_INFINITY)
            .map(|i| (a[i] * (libm::exp((pot.f[i] - f_next[i]) / eps) - 1.0)).abs())
            .sum();
        if err <= opts.tol {
            converged = true;
            break;
        }
        pot.f.copy_from_slice(&f_next);
        update_g(&pot.f, &mut pot.g);
        dual_trace.push(dual(&pot.f, &pot.g));
    }
    log::trace!("sinkhorn: {iterations} iterations, marginal error {err:e}");
    if !converged {
        log::warn!("sinkhorn stopped after {iterations} iterations with marginal error {err:e} (eps = {eps})");
    }

    let plan = DMatrix::from_fn(m, n, |i, j| {
        if log_a[i] == f64::NEG_INFINITY || log_b[j] == f64::NEG_INFINITY {
            0.0
        } else {
            a[i] * b[j] * libm::exp((pot.f[i] + pot.g[j] - cost[(i, j)]) / eps)
        }
    });
    Ok(SinkhornReport {
        coupling: Coupling::new(plan, a.clone(), b.clone()),
        iterations,
        converged,
        marginal_error: err,
        dual_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_cost_returns_product() {
        let a = DVector::from_column_slice(&[0.25, 0.25, 0.5]);
        let b = DVector::from_column_slice(&[0.5, 0.5]);
        let pi = sinkhorn(&DMatrix::zeros(3, 2), &a, &b, 0.1, SinkhornOptions::default()).unwrap();
        assert_eq!(pi.plan, &a * b.transpose());
    }

    #[test]
    fn small_eps_concentrates_on_cheap_diagonal() {
        let a = DVector::from_element(2, 0.5);
        let cost = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let pi = sinkhorn(&cost, &a, &a, 0.01, SinkhornOptions::default()).unwrap();
        assert!(pi.plan[(0, 1)] < 0.05 && pi.plan[(1, 0)] < 0.05);
        // closed form for this symmetric 2x2 system
        let k = libm::exp(-1.0 / 0.01);
        let off = 0.5 * k / (1.0 + k);
        assert!((pi.plan[(0, 1)] - off).abs() < 1e-12);
    }

    #[test]
    fn random_problem_is_feasible_and_improves_on_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cost = DMatrix::from_fn(6, 7, |_, _| rng.random_range(0.0..1.0));
        let a = DVector::from_fn(6, |_, _| rng.random_range(0.1..1.0));
        let b = DVector::from_fn(7, |_, _| rng.random_range(0.1..1.0));
        let b = &b * (a.sum() / b.sum());
        let report = sinkhorn_with(
            &cost,
            &a,
            &b,
            0.05,
            SinkhornOptions::default(),
            &mut Potentials::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert!(report.coupling.marginal_error() < 1e-6);
        let product = Coupling::product(&a, &b);
        assert!(report.coupling.cost(&cost) <= product.cost(&cost));
        for w in report.dual_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn mismatched_totals_rejected() {
        let a = DVector::from_element(2, 0.5);
        let b = DVector::from_element(2, 0.6);
        assert!(matches!(
            sinkhorn(&DMatrix::zeros(2, 2), &a, &b, 0.1, SinkhornOptions::default()),
            Err(Error::MassMismatch(..))
        ));
        assert!(sinkhorn(&DMatrix::zeros(2, 2), &a, &a, 0.0, SinkhornOptions::default()).is_err());
    }

    #[test]
    fn zero_mass_rows_stay_empty() {
        let a = DVector::from_column_slice(&[0.5, 0.0, 0.5]);
        let b = DVector::from_column_slice(&[0.5, 0.5]);
        let cost = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 0.3, 0.2, 1.0, 0.0]);
        let pi = sinkhorn(&cost, &a, &b, 0.05, SinkhornOptions::default()).unwrap();
        assert_eq!(pi.plan.row(1).sum(), 0.0);
        assert!(pi.marginal_error() < 1e-8);
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let a = DVector::from_element(3, 1.0 / 3.0);
        let cost = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, 0.9, 0.4, 0.0, 0.2, 0.7, 0.5, 0.0]);
        let opts = SinkhornOptions { max_iter: 1, tol: 0.0 };
        let r = sinkhorn_with(&cost, &a, &a, 0.5, opts, &mut Potentials::default()).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }
}
