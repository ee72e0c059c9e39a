//! Transport primitives shared by the solvers.

mod coupling;
mod exact;
mod pd_cost;
mod sinkhorn;
mod tensor;

pub use coupling::Coupling;
pub use exact::{exact_ot, exact_ot_with_cap, round_to_vertex, DEFAULT_SIZE_CAP};
pub use pd_cost::pd_cost_matrix;
pub use sinkhorn::{sinkhorn, sinkhorn_with, Potentials, SinkhornOptions, SinkhornReport};
pub use tensor::{coot_tensor, gw_tensor, squared_loss_contraction};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Checks nonnegativity and that both marginals carry the same total mass.
pub(crate) fn check_marginals(a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    if a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::NegativeMass("row marginal"));
    }
    if b.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::NegativeMass("column marginal"));
    }
    let (sa, sb) = (a.sum(), b.sum());
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1.0) {
        return Err(Error::MassMismatch(sa, sb));
    }
    Ok(sa)
}
