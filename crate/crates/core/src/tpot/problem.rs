use nalgebra::DMatrix;

use super::CouplingPair;
use crate::error::{Error, Result};
use crate::network::{augment_pair, AugmentedDiagramSide, MeasureTopologicalNetwork};
use crate::ot::{coot_tensor, gw_tensor, pd_cost_matrix};

/// Unweighted inner products making up the objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermBreakdown {
    /// `<L(C, C'), pi_v (x) pi_v>`.
    pub gw: f64,
    /// `<C~, pi_e>`.
    pub pd: f64,
    /// `<L(w~, w~'), pi_v (x) pi_e>`.
    pub cross: f64,
}

impl TermBreakdown {
    pub fn weighted(&self, alpha: f64, beta: f64) -> f64 {
        alpha * self.gw + (1.0 - alpha) * self.pd + beta * self.cross
    }
}

/// Precomputed augmented structures for a pair of networks.
#[derive(Debug, Clone)]
pub struct TpotProblem<'a> {
    source: &'a MeasureTopologicalNetwork,
    target: &'a MeasureTopologicalNetwork,
    side_s: AugmentedDiagramSide,
    side_t: AugmentedDiagramSide,
    pd_cost: DMatrix<f64>,
    w_s_t: DMatrix<f64>,
    w_t_t: DMatrix<f64>,
}

impl<'a> TpotProblem<'a> {
    pub fn new(source: &'a MeasureTopologicalNetwork, target: &'a MeasureTopologicalNetwork) -> Self {
        let (side_s, side_t) = augment_pair(source, target);
        let pd_cost = pd_cost_matrix(source.diagram(), target.diagram());
        let w_s_t = side_s.incidence.transpose();
        let w_t_t = side_t.incidence.transpose();
        Self {
            source,
            target,
            side_s,
            side_t,
            pd_cost,
            w_s_t,
            w_t_t,
        }
    }

    pub fn source(&self) -> &MeasureTopologicalNetwork {
        self.source
    }

    pub fn target(&self) -> &MeasureTopologicalNetwork {
        self.target
    }

    pub fn source_side(&self) -> &AugmentedDiagramSide {
        &self.side_s
    }

    pub fn target_side(&self) -> &AugmentedDiagramSide {
        &self.side_t
    }

    /// Augmented diagram cost `C~`.
    pub fn pd_cost(&self) -> &DMatrix<f64> {
        &self.pd_cost
    }

    pub fn check(&self, pair: &CouplingPair) -> Result<()> {
        let v = (self.source.n_points(), self.target.n_points());
        if pair.pi_v.shape() != v {
            return Err(Error::ShapeMismatch {
                context: "point coupling",
                expected: v,
                found: pair.pi_v.shape(),
            });
        }
        let e = self.pd_cost.shape();
        if pair.pi_e.shape() != e {
            return Err(Error::ShapeMismatch {
                context: "feature coupling",
                expected: e,
                found: pair.pi_e.shape(),
            });
        }
        Ok(())
    }

    /// `T(C, C', pi_v)`.
    pub fn gw_part(&self, pi_v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        gw_tensor(self.source.affinity(), self.target.affinity(), pi_v)
    }

    /// `T(w~, w~', pi_e)`, an `N x N'` matrix.
    pub fn cross_part_v(&self, pi_e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        coot_tensor(&self.side_s.incidence, &self.side_t.incidence, pi_e)
    }

    /// `T(w~^T, w~'^T, pi_v)`, an `(M + 1) x (M' + 1)` matrix.
    pub fn cross_part_e(&self, pi_v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        coot_tensor(&self.w_s_t, &self.w_t_t, pi_v)
    }

    pub fn terms(&self, pair: &CouplingPair) -> Result<TermBreakdown> {
        self.check(pair)?;
        let (pv, pe) = (&pair.pi_v.plan, &pair.pi_e.plan);
        Ok(TermBreakdown {
            gw: self.gw_part(pv)?.dot(pv),
            pd: self.pd_cost.dot(pe),
            cross: self.cross_part_v(pe)?.dot(pv),
        })
    }

    pub fn objective(&self, pair: &CouplingPair, alpha: f64, beta: f64) -> Result<f64> {
        Ok(self.terms(pair)?.weighted(alpha, beta))
    }

    /// `2 alpha T(C, C', pi_v) + beta T(w~, w~', pi_e)`.
    pub fn grad_v(&self, pair: &CouplingPair, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
        self.check(pair)?;
        let mut g = self.gw_part(&pair.pi_v.plan)? * (2.0 * alpha);
        if beta != 0.0 {
            g += self.cross_part_v(&pair.pi_e.plan)? * beta;
        }
        Ok(g)
    }

    /// `(1 - alpha) C~ + beta T(w~^T, w~'^T, pi_v)`.
    pub fn grad_e(&self, pair: &CouplingPair, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
        self.check(pair)?;
        let mut g = &self.pd_cost * (1.0 - alpha);
        if beta != 0.0 {
            g += self.cross_part_e(&pair.pi_v.plan)? * beta;
        }
        Ok(g)
    }
}

/// `alpha <L(C, C'), pi_v (x) pi_v> + (1 - alpha) <C~, pi_e> + beta <L(w~, w~'), pi_v (x) pi_e>`.
pub fn objective(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    pair: &CouplingPair,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    TpotProblem::new(p, q).objective(pair, alpha, beta)
}

pub fn grad_v(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    pair: &CouplingPair,
    alpha: f64,
    beta: f64,
) -> Result<DMatrix<f64>> {
    TpotProblem::new(p, q).grad_v(pair, alpha, beta)
}

pub fn grad_e(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    pair: &CouplingPair,
    alpha: f64,
    beta: f64,
) -> Result<DMatrix<f64>> {
    TpotProblem::new(p, q).grad_e(pair, alpha, beta)
}
