use nalgebra::DVector;

use crate::analysis::{extract_matching, GeneratorMatching};
use crate::error::Result;
use crate::ot::{exact_ot, pd_cost_matrix, Coupling};
use crate::persistence::DiagramPoint;

/// Optimal partial matching between two diagrams under the 2-Wasserstein cost.
#[derive(Debug, Clone)]
pub struct PdBaseline {
    /// Vertex plan on the augmented diagrams with the corner zeroed.
    pub coupling: Coupling,
    pub matching: GeneratorMatching,
    pub distance: f64,
}

/// 2-Wasserstein distance between diagrams with unit mass per point.
///
/// Each diagram gets a diagonal slot holding as much mass as the other
/// diagram has points, which turns the partial matching problem into a
/// balanced transport problem with a vertex solution.
pub fn pd_wasserstein_baseline(d: &[DiagramPoint], d2: &[DiagramPoint]) -> Result<PdBaseline> {
    let (m, m2) = (d.len(), d2.len());
    let cost = pd_cost_matrix(d, d2);
    let a = DVector::from_fn(m + 1, |i, _| if i < m { 1.0 } else { m2 as f64 });
    let b = DVector::from_fn(m2 + 1, |j, _| if j < m2 { 1.0 } else { m as f64 });
    let mut coupling = exact_ot(&cost, &a, &b)?;
    let total = coupling.cost(&cost).max(0.0);
    coupling.plan[(m, m2)] = 0.0;
    let matching = extract_matching(&coupling.plan);
    Ok(PdBaseline {
        coupling,
        matching,
        distance: libm::sqrt(total),
    })
}
