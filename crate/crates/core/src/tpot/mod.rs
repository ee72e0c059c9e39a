//! The topological transport objective, its gradients and two solvers.

mod baseline;
mod bcd;
mod entropic;
mod problem;

pub use baseline::{pd_wasserstein_baseline, PdBaseline};
pub use bcd::{solve_bcd, solve_bcd_from};
pub use entropic::solve_entropic;
pub use problem::{grad_e, grad_v, objective, TermBreakdown, TpotProblem};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::MeasureTopologicalNetwork;
use crate::ot::{Coupling, SinkhornOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Entropic mirror steps with Sinkhorn projections.
    #[default]
    Entropic,
    /// Block-coordinate descent with exact transport subproblems.
    Bcd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpotParams {
    /// Weight of the point-geometry term against the diagram term.
    pub alpha: f64,
    /// Weight of the incidence term.
    pub beta: f64,
    pub eps_v: f64,
    pub eps_e: f64,
    pub max_iter: usize,
    /// Relative objective change that ends the outer loop.
    pub tol: f64,
    pub algorithm: Algorithm,
    /// Use the freshly updated point plan when forming the feature gradient.
    pub gauss_seidel: bool,
    pub sinkhorn: SinkhornOptions,
}

impl Default for TpotParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 1.0,
            eps_v: 3e-3,
            eps_e: 1e-2,
            max_iter: 1000,
            tol: 1e-7,
            algorithm: Algorithm::Entropic,
            gauss_seidel: false,
            sinkhorn: SinkhornOptions::default(),
        }
    }
}

impl TpotParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return bad("beta must be a finite nonnegative number");
        }
        if self.algorithm == Algorithm::Entropic
            && !(self.eps_v > 0.0 && self.eps_e > 0.0 && self.eps_v.is_finite() && self.eps_e.is_finite())
        {
            return bad("entropic solver needs eps_v > 0 and eps_e > 0");
        }
        if !(self.tol >= 0.0) {
            return bad("tol must be nonnegative");
        }
        Ok(())
    }
}

/// A point plan and an augmented feature plan.
///
/// `pi_e` is indexed by the augmented diagrams: the last row and column stand
/// for the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPair {
    pub pi_v: Coupling,
    pub pi_e: Coupling,
}

impl CouplingPair {
    pub fn new(pi_v: Coupling, pi_e: Coupling) -> Self {
        Self { pi_v, pi_e }
    }

    /// `diag(mu)` on the points and `diag(nu~)` on the augmented diagram of a
    /// network matched with itself.
    pub fn identity(p: &MeasureTopologicalNetwork) -> Self {
        let (side, _) = crate::network::augment_pair(p, p);
        Self::new(Coupling::identity(p.point_mass()), Coupling::identity(&side.mass)).canonical()
    }

    /// Corner mass (diagonal to diagonal) removed; marginals are kept.
    pub fn canonical(mut self) -> Self {
        let (r, c) = self.pi_e.shape();
        if r > 0 && c > 0 {
            self.pi_e.plan[(r - 1, c - 1)] = 0.0;
        }
        self
    }

    /// Puts back the corner mass needed to satisfy the stored marginals.
    pub fn with_corner(mut self) -> Self {
        let (r, c) = self.pi_e.shape();
        if r > 0 && c > 0 {
            let rest: f64 = (0..c - 1).map(|j| self.pi_e.plan[(r - 1, j)]).sum();
            self.pi_e.plan[(r - 1, c - 1)] = (self.pi_e.row_marginal[r - 1] - rest).max(0.0);
        }
        self
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.pi_v.transpose(), self.pi_e.transpose())
    }
}

#[derive(Debug, Clone)]
pub struct TpotSolution {
    /// Final coupling pair in canonical form; rounded to vertices for the
    /// entropic solver.
    pub pair: CouplingPair,
    /// Entropic iterate before rounding.
    pub raw: Option<CouplingPair>,
    /// Objective after each outer iteration (after each half-step for BCD).
    pub trace: Vec<f64>,
    /// Entropic solver only: the trace plus the KL penalties of the raw
    /// iterates, the quantity the mirror steps decrease.
    pub regularized_trace: Vec<f64>,
    pub objective: f64,
    pub terms: TermBreakdown,
    pub iterations: usize,
    pub converged: bool,
}

/// Dispatches on [`TpotParams::algorithm`].
pub fn solve(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    params: &TpotParams,
) -> Result<TpotSolution> {
    match params.algorithm {
        Algorithm::Entropic => solve_entropic(p, q, params),
        Algorithm::Bcd => solve_bcd(p, q, params),
    }
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    (cur - prev).abs() / prev.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;
    use crate::network::{build_network, NetworkOptions};
    use crate::ot::exact_ot;
    use crate::test_support::random_network;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noisy_circle(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
        let noise = Normal::new(0.0, 0.05).unwrap();
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let a = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
                vec![libm::cos(a) + noise.sample(rng), libm::sin(a) + noise.sample(rng)]
            })
            .collect();
        PointCloud::new(&pts).unwrap()
    }

    fn circle_network(seed: u64) -> MeasureTopologicalNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = NetworkOptions {
            top_k: Some(1),
            ..NetworkOptions::default()
        };
        build_network(&noisy_circle(&mut rng, 30), &opts).unwrap()
    }

    fn random_vertex_pair(rng: &mut ChaCha8Rng, prob: &TpotProblem<'_>) -> CouplingPair {
        let (mu, mu2) = (prob.source().point_mass(), prob.target().point_mass());
        let (nu, nu2) = (&prob.source_side().mass, &prob.target_side().mass);
        let cv = DMatrix::from_fn(mu.len(), mu2.len(), |_, _| rng.random_range(0.0..1.0));
        let ce = DMatrix::from_fn(nu.len(), nu2.len(), |_, _| rng.random_range(0.0..1.0));
        CouplingPair::new(exact_ot(&cv, mu, mu2).unwrap(), exact_ot(&ce, nu, nu2).unwrap())
    }

    use nalgebra::DMatrix;

    #[test]
    fn params_validation() {
        assert!(TpotParams::default().validate().is_ok());
        let bad = TpotParams {
            alpha: 1.5,
            ..TpotParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = TpotParams {
            eps_e: 0.0,
            ..TpotParams::default()
        };
        assert!(bad.validate().is_err());
        let ok = TpotParams {
            eps_e: 0.0,
            algorithm: Algorithm::Bcd,
            ..TpotParams::default()
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn canonical_and_corner_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_network(&mut rng, 4, 2);
        let pair = CouplingPair::identity(&p);
        assert_eq!(pair.pi_e.plan[(2, 2)], 0.0);
        let full = pair.clone().with_corner();
        assert!(full.pi_e.marginal_error() < 1e-15);
        assert_eq!(full.canonical(), pair);
    }

    #[test]
    fn entropic_self_match_on_circle() {
        let p = circle_network(3);
        assert_eq!(p.n_features(), 1);
        let params = TpotParams::default();
        let sol = solve_entropic(&p, &p, &params).unwrap();
        let prob = TpotProblem::new(&p, &p);
        let product = CouplingPair::new(
            Coupling::product(p.point_mass(), p.point_mass()),
            Coupling::product(&prob.source_side().mass, &prob.target_side().mass),
        );
        let product_obj = prob.objective(&product, 0.5, 1.0).unwrap();
        assert!(sol.objective <= product_obj);
        assert!(sol.objective <= 1e-2, "objective {}", sol.objective);
        assert!(sol.pair.pi_v.marginal_error() < 1e-10);
    }

    #[test]
    fn entropic_pd_only_rounds_to_lp_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_network(&mut rng, 5, 3);
        let q = random_network(&mut rng, 6, 2);
        let params = TpotParams {
            beta: 0.0,
            eps_e: 1e-3,
            ..TpotParams::default()
        };
        let sol = solve_entropic(&p, &q, &params).unwrap();
        let prob = TpotProblem::new(&p, &q);
        let lp = exact_ot(prob.pd_cost(), &prob.source_side().mass, &prob.target_side().mass).unwrap();
        assert!((sol.terms.pd - lp.cost(prob.pd_cost())).abs() < 1e-6);
    }

    #[test]
    fn entropic_gw_trace_without_features() {
        use crate::geometry::{gaussian_affinity, Bandwidth};
        use crate::network::NetworkMeta;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut kernel_network = |n: usize| {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
                .collect();
            let pc = PointCloud::new(&pts).unwrap();
            MeasureTopologicalNetwork::new(
                gaussian_affinity(&pc, Bandwidth::Median).unwrap(),
                nalgebra::DVector::from_element(n, 1.0 / n as f64),
                Vec::new(),
                nalgebra::DVector::zeros(0),
                DMatrix::zeros(n, 0),
                NetworkMeta::default(),
            )
            .unwrap()
        };
        for _ in 0..10 {
            let p = kernel_network(6);
            let q = kernel_network(7);
            let params = TpotParams {
                alpha: 1.0,
                beta: 0.0,
                eps_v: 0.01,
                ..TpotParams::default()
            };
            let sol = solve_entropic(&p, &q, &params).unwrap();
            for w in sol.regularized_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn bcd_fixed_point_at_identity() {
        let p = circle_network(4);
        let params = TpotParams {
            algorithm: Algorithm::Bcd,
            ..TpotParams::default()
        };
        let sol = solve_bcd_from(&p, &p, &params, Some(CouplingPair::identity(&p))).unwrap();
        assert!(sol.objective <= 1e-8);
    }

    #[test]
    fn bcd_pd_half_step_is_exact_without_coupling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_network(&mut rng, 5, 3);
        let q = random_network(&mut rng, 4, 3);
        let params = TpotParams {
            beta: 0.0,
            max_iter: 1,
            algorithm: Algorithm::Bcd,
            ..TpotParams::default()
        };
        let sol = solve_bcd(&p, &q, &params).unwrap();
        let prob = TpotProblem::new(&p, &q);
        let lp = exact_ot(prob.pd_cost(), &prob.source_side().mass, &prob.target_side().mass).unwrap();
        assert!((sol.terms.pd - lp.cost(prob.pd_cost())).abs() < 1e-14);
    }

    #[test]
    fn bcd_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let p = random_network(&mut rng, 6, 2);
            let q = random_network(&mut rng, 5, 3);
            let params = TpotParams {
                algorithm: Algorithm::Bcd,
                ..TpotParams::default()
            };
            let sol = solve_bcd(&p, &q, &params).unwrap();
            for w in sol.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn bcd_multistart_reaches_best_stationary_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_network(&mut rng, 5, 2);
        let q = random_network(&mut rng, 5, 2);
        let prob = TpotProblem::new(&p, &q);
        let params = TpotParams {
            algorithm: Algorithm::Bcd,
            ..TpotParams::default()
        };
        let mut best_init = f64::INFINITY;
        let mut best_final = f64::INFINITY;
        for _ in 0..50 {
            let init = random_vertex_pair(&mut rng, &prob);
            let start = prob.objective(&init, params.alpha, params.beta).unwrap();
            best_init = best_init.min(start);
            let sol = solve_bcd_from(&p, &q, &params, Some(init)).unwrap();
            assert!(sol.objective <= start + 1e-9);
            best_final = best_final.min(sol.objective);
        }
        assert!(best_final <= best_init + 1e-9);
    }

    #[test]
    fn baseline_examples() {
        use crate::analysis::MatchTarget;
        use crate::persistence::DiagramPoint;
        let d = [DiagramPoint::new(0.0, 2.0)];
        let b = pd_wasserstein_baseline(&d, &[]).unwrap();
        assert!((b.distance - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.matching.target_of(0), Some(MatchTarget::Diagonal));
        let d = [DiagramPoint::new(0.0, 2.0), DiagramPoint::new(0.5, 0.9)];
        let b = pd_wasserstein_baseline(&d, &d).unwrap();
        assert_eq!(b.distance, 0.0);
        let got: Vec<_> = b.matching.real_pairs().collect();
        assert_eq!(got, [(0, 0), (1, 1)]);
    }
}
