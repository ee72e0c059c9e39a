use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{relative_change, CouplingPair, TpotParams, TpotProblem, TpotSolution};
use crate::error::Result;
use crate::network::MeasureTopologicalNetwork;
use crate::ot::{exact_ot, squared_loss_contraction, Coupling};

const CG_MAX_ITER: usize = 200;

/// Block-coordinate descent from the product couplings.
pub fn solve_bcd(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    params: &TpotParams,
) -> Result<TpotSolution> {
    solve_bcd_from(p, q, params, None)
}

/// Block-coordinate descent from `init` (product couplings when `None`).
///
/// Each outer step runs conditional gradient on the point plan with the
/// feature plan fixed, then solves the linear problem in the feature plan
/// exactly. The trace records the objective after every half-step, so it is
/// nonincreasing.
pub fn solve_bcd_from(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    params: &TpotParams,
    init: Option<CouplingPair>,
) -> Result<TpotSolution> {
    params.validate()?;
    let prob = TpotProblem::new(p, q);
    let (alpha, beta) = (params.alpha, params.beta);
    let (mu, mu2) = (p.point_mass(), q.point_mass());
    let (nu, nu2) = (&prob.source_side().mass, &prob.target_side().mass);

    let mut pair = match init {
        Some(pair) => {
            prob.check(&pair)?;
            pair.with_corner()
        }
        None => CouplingPair::new(Coupling::product(mu, mu2), Coupling::product(nu, nu2)),
    };
    let mut trace = Vec::new();
    let mut prev = prob.objective(&pair, alpha, beta)?;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let linear = if beta != 0.0 {
            prob.cross_part_v(&pair.pi_e.plan)? * beta
        } else {
            DMatrix::zeros(mu.len(), mu2.len())
        };
        pair.pi_v = fused_gw(&prob, &pair.pi_v, &linear, alpha)?;
        trace.push(prob.objective(&pair, alpha, beta)?);

        let me = prob.grad_e(&pair, alpha, beta)?;
        let pi_e = exact_ot(&me, nu, nu2)?;
        // keep the incumbent on ties so the trace cannot creep upward
        if me.dot(&pi_e.plan) < me.dot(&pair.pi_e.plan) {
            pair.pi_e = pi_e;
        }
        let cur = prob.objective(&pair, alpha, beta)?;
        trace.push(cur);
        if relative_change(prev, cur) <= params.tol {
            converged = true;
            break;
        }
        prev = cur;
    }
    if !converged {
        log::warn!(
            "block-coordinate descent reached max_iter = {} without converging",
            params.max_iter
        );
    }
    let pair = pair.canonical();
    let terms = prob.terms(&pair)?;
    Ok(TpotSolution {
        objective: terms.weighted(alpha, beta),
        terms,
        pair,
        raw: None,
        trace,
        regularized_trace: Vec::new(),
        iterations,
        converged,
    })
}

/// Conditional gradient for `alpha <L(C, C'), pi (x) pi> + <linear, pi>`.
fn fused_gw(prob: &TpotProblem<'_>, start: &Coupling, linear: &DMatrix<f64>, alpha: f64) -> Result<Coupling> {
    let c = prob.source().affinity();
    let c2 = prob.target().affinity();
    let mut pi = start.clone();
    let value = |pi: &DMatrix<f64>, t: &DMatrix<f64>| alpha * t.dot(pi) + linear.dot(pi);
    let mut t = squared_loss_contraction(c, c2, &pi.plan)?;
    let mut f = value(&pi.plan, &t);
    for _ in 0..CG_MAX_ITER {
        let grad = &t * (2.0 * alpha) + linear;
        let vertex = exact_ot(&grad, &pi.row_marginal, &pi.col_marginal)?;
        let dir = &vertex.plan - &pi.plan;
        let slope = grad.dot(&dir);
        if slope >= -1e-12 * f.abs().max(1e-12) {
            break;
        }
        let curv = alpha * squared_loss_contraction(c, c2, &dir)?.dot(&dir);
        let gamma = if curv > 0.0 {
            (-slope / (2.0 * curv)).min(1.0)
        } else {
            1.0
        };
        let plan = &pi.plan + &dir * gamma;
        let t_new = squared_loss_contraction(c, c2, &plan)?;
        let f_new = value(&plan, &t_new);
        if !(f_new < f) {
            break;
        }
        pi.plan = plan;
        t = t_new;
        f = f_new;
    }
    Ok(pi)
}
