use alloc::vec::Vec;

use super::{relative_change, CouplingPair, TpotParams, TpotProblem, TpotSolution};
use crate::error::Result;
use crate::network::MeasureTopologicalNetwork;
use crate::ot::{round_to_vertex, sinkhorn_with, Coupling, Potentials};

/// Entropic solver: alternating KL projections of the two gradients.
///
/// Starts from the product couplings. The reported pair is rounded to
/// polytope vertices; `raw` keeps the entropic iterate. Every objective value
/// is the unregularized one.
pub fn solve_entropic(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    params: &TpotParams,
) -> Result<TpotSolution> {
    params.validate()?;
    let prob = TpotProblem::new(p, q);
    let (alpha, beta) = (params.alpha, params.beta);
    let (mu, mu2) = (p.point_mass(), q.point_mass());
    let (nu, nu2) = (&prob.source_side().mass, &prob.target_side().mass);

    let mut pair = CouplingPair::new(Coupling::product(mu, mu2), Coupling::product(nu, nu2));
    let mut pot_v = Potentials::default();
    let mut pot_e = Potentials::default();
    let mut trace = Vec::new();
    let mut regularized_trace = Vec::new();
    let mut prev = prob.objective(&pair, alpha, beta)?;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let gv = prob.grad_v(&pair, alpha, beta)?;
        let ge_jacobi = if params.gauss_seidel {
            None
        } else {
            Some(prob.grad_e(&pair, alpha, beta)?)
        };
        let pi_v = sinkhorn_with(&gv, mu, mu2, params.eps_v, params.sinkhorn, &mut pot_v)?.coupling;
        pair.pi_v = pi_v;
        let ge = match ge_jacobi {
            Some(g) => g,
            None => prob.grad_e(&pair, alpha, beta)?,
        };
        pair.pi_e = sinkhorn_with(&ge, nu, nu2, params.eps_e, params.sinkhorn, &mut pot_e)?.coupling;

        let cur = prob.objective(&pair, alpha, beta)?;
        log::debug!("entropic iteration {iterations}: objective {cur:.6e}");
        trace.push(cur);
        regularized_trace
            .push(cur + params.eps_v * kl_to_product(&pair.pi_v) + params.eps_e * kl_to_product(&pair.pi_e));
        if relative_change(prev, cur) <= params.tol {
            converged = true;
            break;
        }
        prev = cur;
    }
    if !converged {
        log::warn!(
            "entropic solver reached max_iter = {} without converging",
            params.max_iter
        );
    }

    log::debug!("rounding entropic couplings after {iterations} iterations");
    let rounded = CouplingPair::new(round_to_vertex(&pair.pi_v)?, round_to_vertex(&pair.pi_e)?).canonical();
    let terms = prob.terms(&rounded)?;
    Ok(TpotSolution {
        objective: terms.weighted(alpha, beta),
        terms,
        pair: rounded,
        raw: Some(pair.canonical()),
        trace,
        regularized_trace,
        iterations,
        converged,
    })
}

/// Generalized `KL(pi | a b^T)`.
fn kl_to_product(pi: &Coupling) -> f64 {
    let (a, b) = (&pi.row_marginal, &pi.col_marginal);
    let mut kl = a.sum() * b.sum() - pi.plan.sum();
    for j in 0..b.len() {
        for i in 0..a.len() {
            let x = pi.plan[(i, j)];
            if x > 0.0 {
                kl += x * libm::log(x / (a[i] * b[j]));
            }
        }
    }
    kl
}
