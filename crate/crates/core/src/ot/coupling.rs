use nalgebra::{DMatrix, DVector};

/// A transport plan together with the marginals it is meant to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub plan: DMatrix<f64>,
    pub row_marginal: DVector<f64>,
    pub col_marginal: DVector<f64>,
}

impl Coupling {
    pub fn new(plan: DMatrix<f64>, row_marginal: DVector<f64>, col_marginal: DVector<f64>) -> Self {
        debug_assert_eq!(plan.nrows(), row_marginal.len());
        debug_assert_eq!(plan.ncols(), col_marginal.len());
        Self {
            plan,
            row_marginal,
            col_marginal,
        }
    }

    /// The independent coupling `a b^T / total`.
    pub fn product(a: &DVector<f64>, b: &DVector<f64>) -> Self {
        let total = a.sum();
        let plan = if total > 0.0 {
            a * b.transpose() / total
        } else {
            DMatrix::zeros(a.len(), b.len())
        };
        Self::new(plan, a.clone(), b.clone())
    }

    /// Diagonal plan `diag(a)` between a measure and itself.
    pub fn identity(a: &DVector<f64>) -> Self {
        Self::new(DMatrix::from_diagonal(a), a.clone(), a.clone())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.plan.shape()
    }

    /// `<cost, plan>`.
    pub fn cost(&self, cost: &DMatrix<f64>) -> f64 {
        cost.dot(&self.plan)
    }

    /// Largest absolute deviation of the plan's row and column sums.
    pub fn marginal_error(&self) -> f64 {
        let rows = self.plan.column_sum() - &self.row_marginal;
        let cols = self.plan.row_sum().transpose() - &self.col_marginal;
        rows.amax().max(cols.amax())
    }

    pub fn nonzeros(&self, tol: f64) -> usize {
        self.plan.iter().filter(|v| v.abs() > tol).count()
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.plan.transpose(),
            self.col_marginal.clone(),
            self.row_marginal.clone(),
        )
    }
}
