use nalgebra::DMatrix;

use crate::persistence::DiagramPoint;

/// Augmented squared-Euclidean cost between two diagrams.
///
/// Shape `(M + 1) x (M' + 1)`. The last row and column hold the squared
/// distance of each point to its diagonal projection; the corner is zero.
pub fn pd_cost_matrix(d: &[DiagramPoint], d2: &[DiagramPoint]) -> DMatrix<f64> {
    let (m, m2) = (d.len(), d2.len());
    let mut c = DMatrix::zeros(m + 1, m2 + 1);
    for (j, q) in d2.iter().enumerate() {
        for (i, p) in d.iter().enumerate() {
            c[(i, j)] = p.sq_dist(q);
        }
        c[(m, j)] = q.sq_dist_to_diagonal();
    }
    for (i, p) in d.iter().enumerate() {
        c[(i, m2)] = p.sq_dist_to_diagonal();
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_to_diagonal() {
        let c = pd_cost_matrix(&[DiagramPoint::new(0.0, 2.0)], &[]);
        assert_eq!(c.shape(), (2, 1));
        assert_eq!(c[(0, 0)], 2.0);
        assert_eq!(c[(1, 0)], 0.0);
    }

    #[test]
    fn identical_diagrams_have_zero_matching_entries() {
        let d = [DiagramPoint::new(0.1, 0.7), DiagramPoint::new(0.3, 0.4)];
        let c = pd_cost_matrix(&d, &d);
        assert_eq!(c[(0, 0)], 0.0);
        assert_eq!(c[(1, 1)], 0.0);
        assert_eq!(c[(2, 2)], 0.0);
    }

    #[test]
    fn matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut diag = |n: usize| -> Vec<DiagramPoint> {
            (0..n)
                .map(|_| {
                    let b: f64 = rng.random_range(0.0..1.0);
                    DiagramPoint::new(b, b + rng.random_range(0.01..1.0))
                })
                .collect()
        };
        let (d, d2) = (diag(4), diag(6));
        let c = pd_cost_matrix(&d, &d2);
        for i in 0..=4 {
            for j in 0..=6 {
                let expected = match (i < 4, j < 6) {
                    (true, true) => (d[i].birth - d2[j].birth).powi(2) + (d[i].death - d2[j].death).powi(2),
                    (true, false) => (d[i].death - d[i].birth).powi(2) / 2.0,
                    (false, true) => (d2[j].death - d2[j].birth).powi(2) / 2.0,
                    (false, false) => 0.0,
                };
                assert_eq!(c[(i, j)], expected);
            }
        }
    }
}
