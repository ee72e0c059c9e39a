//! Serialized forms of networks, persistence, solver results and reports.
//!
//! Matrices are stored as arrays of rows. A matched target of `null` means
//! the diagonal.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use tpot_core::analysis::{GeneratorMatching, MatchTarget};
use tpot_core::geometry::{Bandwidth, SymmetricMatrix};
use tpot_core::network::{Kernel, MeasureTopologicalNetwork, NetworkMeta};
use tpot_core::ot::Coupling;
use tpot_core::persistence::{DiagramPoint, PersistenceResult};
use tpot_core::tpot::{Algorithm, TermBreakdown, TpotParams, TpotSolution};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum KernelName {
    /// Gaussian kernel with `h^2 = N^2 / sum |x_i - x_j|^2`.
    Gaussian,
    /// Gaussian kernel with the median squared distance as `h^2`.
    GaussianMedian,
    /// Squared Euclidean distances.
    SqDist,
}

impl From<KernelName> for Kernel {
    fn from(k: KernelName) -> Self {
        match k {
            KernelName::Gaussian => Kernel::Gaussian(Bandwidth::Paper),
            KernelName::GaussianMedian => Kernel::Gaussian(Bandwidth::Median),
            KernelName::SqDist => Kernel::SqDist,
        }
    }
}

impl From<Kernel> for KernelName {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Gaussian(Bandwidth::Paper) => KernelName::Gaussian,
            Kernel::Gaussian(Bandwidth::Median) => KernelName::GaussianMedian,
            Kernel::SqDist => KernelName::SqDist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AlgorithmName {
    Entropic,
    Bcd,
}

impl From<AlgorithmName> for Algorithm {
    fn from(a: AlgorithmName) -> Self {
        match a {
            AlgorithmName::Entropic => Algorithm::Entropic,
            AlgorithmName::Bcd => Algorithm::Bcd,
        }
    }
}

impl From<Algorithm> for AlgorithmName {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Entropic => AlgorithmName::Entropic,
            Algorithm::Bcd => AlgorithmName::Bcd,
        }
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Rebuilds a matrix from rows; `ncols` is used when there are no rows.
pub fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(ncols, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(AppError::Input(format!(
            "{what}: row {i} has {} entries, expected {ncols}",
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFile {
    pub degree: usize,
    pub kernel: KernelName,
    pub smoothing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub affinity: Vec<Vec<f64>>,
    pub point_mass: Vec<f64>,
    /// `[birth, death]` pairs.
    pub diagram: Vec<[f64; 2]>,
    pub diagram_mass: Vec<f64>,
    /// One row per point, one column per diagram point.
    pub incidence: Vec<Vec<f64>>,
    pub meta: MetaFile,
}

impl From<&MeasureTopologicalNetwork> for NetworkFile {
    fn from(net: &MeasureTopologicalNetwork) -> Self {
        let meta = net.meta();
        Self {
            affinity: matrix_rows(net.affinity().as_matrix()),
            point_mass: net.point_mass().iter().copied().collect(),
            diagram: net.diagram().iter().map(|d| [d.birth, d.death]).collect(),
            diagram_mass: net.diagram_mass().iter().copied().collect(),
            incidence: matrix_rows(net.incidence()),
            meta: MetaFile {
                degree: meta.degree,
                kernel: meta.kernel.into(),
                smoothing: meta.smoothing,
            },
        }
    }
}

impl TryFrom<NetworkFile> for MeasureTopologicalNetwork {
    type Error = AppError;

    fn try_from(f: NetworkFile) -> Result<Self> {
        let n = f.point_mass.len();
        let affinity = matrix_from_rows(&f.affinity, n, "affinity")?;
        let incidence = matrix_from_rows(&f.incidence, f.diagram.len(), "incidence")?;
        Ok(MeasureTopologicalNetwork::new(
            SymmetricMatrix::new(affinity)?,
            DVector::from_vec(f.point_mass),
            f.diagram
                .iter()
                .map(|&[b, d]| DiagramPoint { birth: b, death: d })
                .collect(),
            DVector::from_vec(f.diagram_mass),
            incidence,
            NetworkMeta {
                degree: f.meta.degree,
                kernel: f.meta.kernel.into(),
                smoothing: f.meta.smoothing,
            },
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceFile {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    /// Vertex indices of each representative cycle.
    pub generators: Vec<Vec<usize>>,
}

impl From<&PersistenceResult> for PersistenceFile {
    fn from(r: &PersistenceResult) -> Self {
        Self {
            degree: r.degree,
            points: r.points.iter().map(|d| [d.birth, d.death]).collect(),
            generators: r.generators.clone(),
        }
    }
}

impl TryFrom<PersistenceFile> for PersistenceResult {
    type Error = AppError;

    fn try_from(f: PersistenceFile) -> Result<Self> {
        let points = f
            .points
            .iter()
            .map(|&[b, d]| DiagramPoint { birth: b, death: d })
            .collect();
        Ok(PersistenceResult::new(f.degree, points, f.generators)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub alpha: f64,
    pub beta: f64,
    pub eps_v: f64,
    pub eps_e: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub algorithm: AlgorithmName,
    pub gauss_seidel: bool,
    pub sinkhorn_max_iter: usize,
    pub sinkhorn_tol: f64,
}

impl From<&TpotParams> for ParamsFile {
    fn from(p: &TpotParams) -> Self {
        Self {
            alpha: p.alpha,
            beta: p.beta,
            eps_v: p.eps_v,
            eps_e: p.eps_e,
            max_iter: p.max_iter,
            tol: p.tol,
            algorithm: p.algorithm.into(),
            gauss_seidel: p.gauss_seidel,
            sinkhorn_max_iter: p.sinkhorn.max_iter,
            sinkhorn_tol: p.sinkhorn.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermsFile {
    pub gw: f64,
    pub pd: f64,
    pub cross: f64,
}

impl From<TermBreakdown> for TermsFile {
    fn from(t: TermBreakdown) -> Self {
        Self {
            gw: t.gw,
            pd: t.pd,
            cross: t.cross,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingsFile {
    pub pi_v: Vec<Vec<f64>>,
    /// Augmented diagram plan with the diagonal-to-diagonal corner zeroed.
    pub pi_e: Vec<Vec<f64>>,
}

impl CouplingsFile {
    fn new(pi_v: &Coupling, pi_e: &Coupling) -> Self {
        Self {
            pi_v: matrix_rows(&pi_v.plan),
            pi_e: matrix_rows(&pi_e.plan),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveFile {
    pub objective: f64,
    pub term_breakdown: TermsFile,
    /// Rounded couplings.
    #[serde(flatten)]
    pub couplings: CouplingsFile,
    /// Couplings before rounding, when the solver produces them.
    pub raw: Option<CouplingsFile>,
    pub objective_trace: Vec<f64>,
    pub regularized_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub params: ParamsFile,
}

impl SolveFile {
    pub fn new(sol: &TpotSolution, params: &TpotParams) -> Self {
        Self {
            objective: sol.objective,
            term_breakdown: sol.terms.into(),
            couplings: CouplingsFile::new(&sol.pair.pi_v, &sol.pair.pi_e),
            raw: sol.raw.as_ref().map(|r| CouplingsFile::new(&r.pi_v, &r.pi_e)),
            objective_trace: sol.trace.clone(),
            regularized_trace: sol.regularized_trace.clone(),
            iterations: sol.iterations,
            converged: sol.converged,
            params: params.into(),
        }
    }
}

/// Generator matching with per-pair mass and optional quality scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    /// `[source, target]`; a `null` target is the diagonal.
    pub pairs: Vec<(usize, Option<usize>)>,
    pub masses: Vec<f64>,
    /// One value per real-to-real pair, in pair order.
    pub correlations: Vec<f64>,
    pub accuracy: Option<f64>,
}

impl ReportFile {
    pub fn new(m: &GeneratorMatching, correlations: Vec<f64>, accuracy: Option<f64>) -> Self {
        Self {
            pairs: m
                .pairs
                .iter()
                .map(|p| {
                    let t = match p.target {
                        MatchTarget::Feature(j) => Some(j),
                        MatchTarget::Diagonal => None,
                    };
                    (p.source, t)
                })
                .collect(),
            masses: m.pairs.iter().map(|p| p.mass).collect(),
            correlations,
            accuracy,
        }
    }

    pub fn mean_correlation(&self) -> Option<f64> {
        mean(&self.correlations)
    }
}

pub(crate) fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFile {
    pub distance: f64,
    #[serde(flatten)]
    pub report: ReportFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLine {
    pub t: f64,
    /// Support of the point plan; frame point `k` interpolates the pair
    /// `support[k]`.
    pub support: Vec<(usize, usize)>,
    pub coords: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackStep {
    pub from: usize,
    pub to: usize,
    pub objective: f64,
    pub tpot: ReportFile,
    pub baseline: BaselineFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub tpot_mean_correlation: Option<f64>,
    pub baseline_mean_correlation: Option<f64>,
    pub tpot_mean_accuracy: Option<f64>,
    pub baseline_mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageFile {
    pub snapshots: Vec<String>,
    /// How the per-pair correlations were computed.
    pub correlation: String,
    pub steps: Vec<TrackStep>,
    /// One row per lineage: the feature index in each snapshot, or `null`.
    pub lineages: Vec<Vec<Option<usize>>>,
    pub summary: TrackSummary,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_names_round_trip() {
        for k in [KernelName::Gaussian, KernelName::GaussianMedian, KernelName::SqDist] {
            assert_eq!(KernelName::from(Kernel::from(k)), k);
        }
        assert_eq!(serde_json::to_string(&KernelName::SqDist).unwrap(), "\"sq_dist\"");
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matrix_from_rows(&[vec![1.0], vec![1.0, 2.0]], 1, "m").is_err());
        assert_eq!(matrix_from_rows(&[], 3, "m").unwrap().shape(), (0, 3));
    }

    #[test]
    fn report_encodes_diagonal_as_null() {
        use tpot_core::analysis::MatchedPair;
        let m = GeneratorMatching {
            pairs: vec![
                MatchedPair {
                    source: 0,
                    target: MatchTarget::Feature(2),
                    mass: 0.5,
                },
                MatchedPair {
                    source: 1,
                    target: MatchTarget::Diagonal,
                    mass: 0.5,
                },
            ],
        };
        let json = serde_json::to_string(&ReportFile::new(&m, vec![0.9], None)).unwrap();
        assert_eq!(
            json,
            r#"{"pairs":[[0,2],[1,null]],"masses":[0.5,0.5],"correlations":[0.9],"accuracy":null}"#
        );
    }
}
