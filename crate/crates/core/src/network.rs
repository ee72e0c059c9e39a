//! Discrete measure topological networks: a gauged measure space on the
//! points, a measured persistence diagram, and a point-to-feature incidence.

use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    gaussian_affinity, pairwise_dists, pairwise_sq_dists, sym_normalized_laplacian, Bandwidth, PointCloud,
    SymmetricMatrix,
};
use crate::persistence::{
    enclosing_radius, persistent_homology, rips_filtration, top_k_features, DiagramPoint, PersistenceResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Gaussian(Bandwidth),
    SqDist,
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Gaussian(Bandwidth::Paper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum IncidenceMode {
    #[default]
    Binary,
    /// `(I + lambda L)^{-1} w_binary` with `L` the normalized Laplacian of a
    /// Gaussian kernel on the same cloud.
    Smoothed { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagramMass {
    /// Uniform weights summing to one.
    #[default]
    Uniform,
    /// Unit weight per diagram point.
    Counting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOptions {
    pub kernel: Kernel,
    /// Bandwidth rule for the Laplacian used by smoothed incidence.
    pub laplacian_bandwidth: Bandwidth,
    pub degree: usize,
    pub top_k: Option<usize>,
    /// Rips threshold; `None` means the enclosing radius.
    pub threshold: Option<f64>,
    pub incidence: IncidenceMode,
    pub diagram_mass: DiagramMass,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            kernel: Kernel::default(),
            laplacian_bandwidth: Bandwidth::Paper,
            degree: 1,
            top_k: None,
            threshold: None,
            incidence: IncidenceMode::Binary,
            diagram_mass: DiagramMass::Uniform,
        }
    }
}

/// Provenance recorded alongside a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMeta {
    pub degree: usize,
    pub kernel: Kernel,
    /// Smoothing strength, `None` for binary incidence.
    pub smoothing: Option<f64>,
}

impl Default for NetworkMeta {
    fn default() -> Self {
        Self {
            degree: 1,
            kernel: Kernel::default(),
            smoothing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTopologicalNetwork {
    affinity: SymmetricMatrix,
    point_mass: DVector<f64>,
    diagram: Vec<DiagramPoint>,
    diagram_mass: DVector<f64>,
    incidence: DMatrix<f64>,
    meta: NetworkMeta,
}

impl MeasureTopologicalNetwork {
    /// Validates and assembles a network.
    pub fn new(
        affinity: SymmetricMatrix,
        point_mass: DVector<f64>,
        diagram: Vec<DiagramPoint>,
        diagram_mass: DVector<f64>,
        incidence: DMatrix<f64>,
        meta: NetworkMeta,
    ) -> Result<Self> {
        let n = affinity.size();
        let m = diagram.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("no points".to_string()));
        }
        if point_mass.len() != n {
            return Err(Error::ShapeMismatch {
                context: "point mass",
                expected: (n, 1),
                found: (point_mass.len(), 1),
            });
        }
        if point_mass.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::NegativeMass("point mass"));
        }
        let total = point_mass.sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidNetwork(alloc::format!(
                "point mass sums to {total}, expected 1"
            )));
        }
        if let Some(p) = diagram.iter().find(|p| !(p.death > p.birth) || !p.death.is_finite()) {
            return Err(Error::InvalidNetwork(alloc::format!(
                "diagram point ({}, {}) is not above the diagonal",
                p.birth,
                p.death
            )));
        }
        if diagram_mass.len() != m {
            return Err(Error::ShapeMismatch {
                context: "diagram mass",
                expected: (m, 1),
                found: (diagram_mass.len(), 1),
            });
        }
        if diagram_mass.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::NegativeMass("diagram mass"));
        }
        if incidence.shape() != (n, m) {
            return Err(Error::ShapeMismatch {
                context: "incidence",
                expected: (n, m),
                found: incidence.shape(),
            });
        }
        if incidence.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidNetwork(
                "incidence must be finite and nonnegative".to_string(),
            ));
        }
        Ok(Self::from_parts_unchecked(
            affinity,
            point_mass,
            diagram,
            diagram_mass,
            incidence,
            meta,
        ))
    }

    /// Interpolated networks may carry diagram points on the diagonal and
    /// skip validation.
    pub(crate) fn from_parts_unchecked(
        affinity: SymmetricMatrix,
        point_mass: DVector<f64>,
        diagram: Vec<DiagramPoint>,
        diagram_mass: DVector<f64>,
        incidence: DMatrix<f64>,
        meta: NetworkMeta,
    ) -> Self {
        Self {
            affinity,
            point_mass,
            diagram,
            diagram_mass,
            incidence,
            meta,
        }
    }

    pub fn n_points(&self) -> usize {
        self.affinity.size()
    }

    pub fn n_features(&self) -> usize {
        self.diagram.len()
    }

    pub fn affinity(&self) -> &SymmetricMatrix {
        &self.affinity
    }

    pub fn point_mass(&self) -> &DVector<f64> {
        &self.point_mass
    }

    pub fn diagram(&self) -> &[DiagramPoint] {
        &self.diagram
    }

    pub fn diagram_mass(&self) -> &DVector<f64> {
        &self.diagram_mass
    }

    pub fn incidence(&self) -> &DMatrix<f64> {
        &self.incidence
    }

    pub fn meta(&self) -> &NetworkMeta {
        &self.meta
    }

    /// Relabels points so that new point `i` is old point `perm[i]`.
    pub fn permute_points(&self, perm: &[usize]) -> Self {
        let n = self.n_points();
        let m = self.n_features();
        Self {
            affinity: self.affinity.select(perm),
            point_mass: DVector::from_iterator(n, perm.iter().map(|&p| self.point_mass[p])),
            diagram: self.diagram.clone(),
            diagram_mass: self.diagram_mass.clone(),
            incidence: DMatrix::from_fn(n, m, |i, c| self.incidence[(perm[i], c)]),
            meta: self.meta.clone(),
        }
    }
}

/// `w[i][c] = 1` iff point `i` belongs to generator `c`.
pub fn binary_incidence(n: usize, generators: &[Vec<usize>]) -> Result<DMatrix<f64>> {
    let mut w = DMatrix::zeros(n, generators.len());
    for (c, g) in generators.iter().enumerate() {
        for &i in g {
            if i >= n {
                return Err(Error::InvalidParameter(alloc::format!(
                    "generator vertex {i} out of range for {n} points"
                )));
            }
            w[(i, c)] = 1.0;
        }
    }
    Ok(w)
}

/// Solves `(I + lambda L) w = w_binary` column by column.
pub fn smoothed_incidence(binary: &DMatrix<f64>, laplacian: &SymmetricMatrix, lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter("smoothing lambda must be >= 0".to_string()));
    }
    let n = binary.nrows();
    if laplacian.size() != n {
        return Err(Error::ShapeMismatch {
            context: "laplacian",
            expected: (n, n),
            found: laplacian.shape(),
        });
    }
    if lambda == 0.0 || binary.ncols() == 0 {
        return Ok(binary.clone());
    }
    let system = DMatrix::identity(n, n) + laplacian.as_matrix() * lambda;
    let chol = system
        .cholesky()
        .ok_or(Error::SolverFailure("smoothing system is not positive definite"))?;
    let mut out = chol.solve(binary);
    for v in out.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(Error::SolverFailure("smoothed incidence has negative entries"));
            }
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Computes persistence and assembles the network in one step.
pub fn build_network(pc: &PointCloud, opts: &NetworkOptions) -> Result<MeasureTopologicalNetwork> {
    let persistence = compute_persistence(pc, opts)?;
    assemble_network(pc, &persistence, opts)
}

/// Rips persistence in `opts.degree`, truncated to `opts.top_k`.
pub fn compute_persistence(pc: &PointCloud, opts: &NetworkOptions) -> Result<PersistenceResult> {
    if opts.degree < 1 {
        return Err(Error::InvalidParameter(
            "homology degree must be at least 1".to_string(),
        ));
    }
    let dists = pairwise_dists(pc);
    let threshold = opts.threshold.unwrap_or_else(|| enclosing_radius(&dists));
    let n = pc.len();
    let result = if opts.degree >= n || !(threshold > 0.0) {
        PersistenceResult {
            degree: opts.degree,
            ..Default::default()
        }
    } else {
        let f = rips_filtration(&dists, opts.degree, threshold)?;
        persistent_homology(&f, opts.degree)?
    };
    Ok(match opts.top_k {
        Some(k) => top_k_features(&result, k),
        None => result,
    })
}

/// Builds a network from a cloud and a (possibly external) persistence result.
pub fn assemble_network(
    pc: &PointCloud,
    persistence: &PersistenceResult,
    opts: &NetworkOptions,
) -> Result<MeasureTopologicalNetwork> {
    let n = pc.len();
    persistence.validate(Some(n))?;
    let affinity = match opts.kernel {
        Kernel::Gaussian(rule) => gaussian_affinity(pc, rule)?,
        Kernel::SqDist => pairwise_sq_dists(pc),
    };
    let binary = binary_incidence(n, &persistence.generators)?;
    let (incidence, smoothing) = match opts.incidence {
        IncidenceMode::Binary => (binary, None),
        IncidenceMode::Smoothed { lambda } => {
            let kernel = match opts.kernel {
                Kernel::Gaussian(rule) if rule == opts.laplacian_bandwidth => affinity.clone(),
                _ => gaussian_affinity(pc, opts.laplacian_bandwidth)?,
            };
            let lap = sym_normalized_laplacian(&kernel)?;
            (smoothed_incidence(&binary, &lap, lambda)?, Some(lambda))
        }
    };
    let m = persistence.points.len();
    let diagram_mass = match opts.diagram_mass {
        DiagramMass::Uniform => DVector::from_element(m, 1.0 / m.max(1) as f64),
        DiagramMass::Counting => DVector::from_element(m, 1.0),
    };
    MeasureTopologicalNetwork::new(
        affinity,
        DVector::from_element(n, 1.0 / n as f64),
        persistence.points.clone(),
        diagram_mass,
        incidence,
        NetworkMeta {
            degree: persistence.degree,
            kernel: opts.kernel,
            smoothing,
        },
    )
}

/// One side of a diagram pair extended by a virtual diagonal slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDiagramSide {
    pub diagram: Vec<DiagramPoint>,
    /// Length `M + 1`; the last entry carries the other side's total mass.
    pub mass: DVector<f64>,
    /// `N x (M + 1)` with an all-zero last column.
    pub incidence: DMatrix<f64>,
}

impl AugmentedDiagramSide {
    fn build(own: &MeasureTopologicalNetwork, other_total: f64) -> Self {
        let (n, m) = own.incidence.shape();
        let mut mass = DVector::zeros(m + 1);
        mass.rows_mut(0, m).copy_from(&own.diagram_mass);
        mass[m] = other_total;
        let mut incidence = DMatrix::zeros(n, m + 1);
        incidence.columns_mut(0, m).copy_from(&own.incidence);
        Self {
            diagram: own.diagram.clone(),
            mass,
            incidence,
        }
    }

    pub fn n_features(&self) -> usize {
        self.diagram.len()
    }
}

/// Adds the diagonal slot to both diagrams so that their masses balance.
pub fn augment_pair(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
) -> (AugmentedDiagramSide, AugmentedDiagramSide) {
    (
        AugmentedDiagramSide::build(p, q.diagram_mass.sum()),
        AugmentedDiagramSide::build(q, p.diagram_mass.sum()),
    )
}
