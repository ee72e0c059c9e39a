//! Hard generator matchings read off a feature coupling, and scores for them.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ot::Coupling;

/// Where a source feature is sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchTarget {
    Feature(usize),
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub source: usize,
    pub target: MatchTarget,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorMatching {
    pub pairs: Vec<MatchedPair>,
}

impl GeneratorMatching {
    pub fn target_of(&self, source: usize) -> Option<MatchTarget> {
        self.pairs.iter().find(|p| p.source == source).map(|p| p.target)
    }

    /// `(source, target)` for pairs between two real features.
    pub fn real_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().filter_map(|p| match p.target {
            MatchTarget::Feature(t) => Some((p.source, t)),
            MatchTarget::Diagonal => None,
        })
    }
}

/// Mass below this is treated as absent when hardening a plan.
pub const MATCH_MASS_FLOOR: f64 = 1e-9;

/// Row-wise argmax of an augmented feature plan.
///
/// Rows `0..M` are real features, the last column is the diagonal slot and the
/// last row is ignored. Ties go to the lower column.
pub fn extract_matching(pi_e: &DMatrix<f64>) -> GeneratorMatching {
    let (rows, cols) = pi_e.shape();
    if rows == 0 || cols == 0 {
        return GeneratorMatching::default();
    }
    let diagonal = cols - 1;
    let mut pairs = Vec::new();
    for i in 0..rows - 1 {
        let mut best = 0;
        for j in 1..cols {
            if pi_e[(i, j)] > pi_e[(i, best)] {
                best = j;
            }
        }
        let mass = pi_e[(i, best)];
        if mass < MATCH_MASS_FLOOR {
            continue;
        }
        let target = if best == diagonal {
            MatchTarget::Diagonal
        } else {
            MatchTarget::Feature(best)
        };
        pairs.push(MatchedPair {
            source: i,
            target,
            mass,
        });
    }
    GeneratorMatching { pairs }
}

/// Pearson correlation; zero when either side is constant.
pub fn pearson(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len() as f64;
    if x.len() != y.len() || x.is_empty() {
        return 0.0;
    }
    let mx = x.sum() / n;
    let my = y.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

/// Pushes each matched source incidence column through the row-normalized
/// point plan and correlates it with the matched target column.
///
/// One value per real-to-real pair, in matching order.
pub fn matching_correlation(
    pi_v: &Coupling,
    w: &DMatrix<f64>,
    w2: &DMatrix<f64>,
    m: &GeneratorMatching,
) -> Result<Vec<f64>> {
    let (n, n2) = pi_v.shape();
    if w.nrows() != n || w2.nrows() != n2 {
        return Err(Error::ShapeMismatch {
            context: "incidence rows vs point plan",
            expected: (n, n2),
            found: (w.nrows(), w2.nrows()),
        });
    }
    let mut transfer = pi_v.plan.clone();
    for i in 0..n {
        let mu = pi_v.row_marginal[i];
        let scale = if mu > 0.0 { 1.0 / mu } else { 0.0 };
        transfer.row_mut(i).scale_mut(scale);
    }
    let mut out = Vec::new();
    for (c, c2) in m.real_pairs() {
        if c >= w.ncols() || c2 >= w2.ncols() {
            return Err(Error::InvalidParameter(alloc::format!(
                "matched pair ({c}, {c2}) outside incidence columns"
            )));
        }
        let pushed = transfer.tr_mul(&w.column(c));
        out.push(pearson(&pushed, &w2.column(c2).into_owned()));
    }
    Ok(out)
}

/// Fraction of `truth` reproduced by the real-to-real pairs of `m`.
///
/// `truth[s]` is the correct target of source feature `s`. An empty truth
/// scores 1.
pub fn permutation_accuracy(m: &GeneratorMatching, truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hits = m.real_pairs().filter(|&(s, t)| truth.get(s) == Some(&t)).count();
    hits as f64 / truth.len() as f64
}
