use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `T[i, j] = sum_{k, l} 1/2 (x[i, k] - y[j, l])^2 pi[k, l]`.
///
/// Expands the square as `x^2/2 + y^2/2 - x y`, so the cost is three dense
/// products rather than a four-index sum. The row and column sums of `pi` are
/// used for the quadratic parts, so `pi` need not be feasible for any marginal.
pub fn squared_loss_contraction(x: &DMatrix<f64>, y: &DMatrix<f64>, pi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    let (n2, l) = y.shape();
    if pi.shape() != (k, l) {
        return Err(Error::ShapeMismatch {
            context: "tensor contraction plan",
            expected: (k, l),
            found: pi.shape(),
        });
    }
    let p: DVector<f64> = pi.column_sum();
    let q: DVector<f64> = pi.row_sum().transpose();

    let mut c1 = DVector::<f64>::zeros(n);
    for kk in 0..k {
        for i in 0..n {
            let v = x[(i, kk)];
            c1[i] += (v * p[kk]) * v;
        }
    }
    let mut c2 = DVector::<f64>::zeros(n2);
    for ll in 0..l {
        for j in 0..n2 {
            let v = y[(j, ll)];
            c2[j] += (v * q[ll]) * v;
        }
    }

    // a = x pi, accumulated over k in ascending order
    let mut a = DMatrix::<f64>::zeros(n, l);
    for ll in 0..l {
        for kk in 0..k {
            let w = pi[(kk, ll)];
            if w != 0.0 {
                let src = x.column(kk);
                let mut dst = a.column_mut(ll);
                for i in 0..n {
                    dst[i] += src[i] * w;
                }
            }
        }
    }
    // cross = a y^T, accumulated over l in ascending order
    let mut out = DMatrix::<f64>::zeros(n, n2);
    for j in 0..n2 {
        let mut dst = out.column_mut(j);
        for ll in 0..l {
            let w = y[(j, ll)];
            if w != 0.0 {
                let src = a.column(ll);
                for i in 0..n {
                    dst[i] += src[i] * w;
                }
            }
        }
    }
    for j in 0..n2 {
        for i in 0..n {
            out[(i, j)] = 0.5 * c1[i] + 0.5 * c2[j] - out[(i, j)];
        }
    }
    Ok(out)
}

/// Contraction of the Gromov-Wasserstein loss `1/2 |c[i, k] - c2[j, l]|^2`
/// against a point coupling.
pub fn gw_tensor(c: &DMatrix<f64>, c2: &DMatrix<f64>, pi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !c.is_square() || !c2.is_square() {
        return Err(Error::InvalidParameter("gw_tensor expects square matrices".into()));
    }
    squared_loss_contraction(c, c2, pi)
}

/// Co-optimal transport contraction: rows of `w` and `w2` are compared through
/// a coupling `pi` of their columns.
pub fn coot_tensor(w: &DMatrix<f64>, w2: &DMatrix<f64>, pi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    squared_loss_contraction(w, w2, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &DMatrix<f64>, y: &DMatrix<f64>, pi: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), y.nrows(), |i, j| {
            let mut s = 0.0;
            for k in 0..x.ncols() {
                for l in 0..y.ncols() {
                    let d = x[(i, k)] - y[(j, l)];
                    s += 0.5 * d * d * pi[(k, l)];
                }
            }
            s
        })
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(0.0..2.0))
    }

    #[test]
    fn matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (n, k, n2, l) = (
                rng.random_range(1..9),
                rng.random_range(1..9),
                rng.random_range(1..9),
                rng.random_range(1..9),
            );
            let x = random(&mut rng, n, k);
            let y = random(&mut rng, n2, l);
            let pi = random(&mut rng, k, l);
            let fast = squared_loss_contraction(&x, &y, &pi).unwrap();
            assert!((fast - naive(&x, &y, &pi)).amax() < 1e-10);
        }
    }

    #[test]
    fn zero_plan_gives_zero() {
        let c = DMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        let t = gw_tensor(&c, &c, &DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(t, DMatrix::zeros(3, 3));
    }

    #[test]
    fn self_matching_diagonal_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(&mut rng, 6, 6);
        let c = (&x + x.transpose()) * 0.5;
        let a = DVector::from_fn(6, |_, _| rng.random_range(0.1..1.0));
        let t = gw_tensor(&c, &c, &DMatrix::from_diagonal(&a)).unwrap();
        for i in 0..6 {
            assert_eq!(t[(i, i)], 0.0);
        }
    }

    #[test]
    fn single_feature_table() {
        // one real edge on each side containing only point 0, plus the
        // zero diagonal column
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let pi_v = DMatrix::from_diagonal_element(2, 2, 0.5);
        let t = coot_tensor(&w.transpose(), &w.transpose(), &pi_v).unwrap();
        // real-real: identical columns; real-diagonal: 1/2 |column|^2 weighted
        assert_eq!(t[(0, 0)], 0.0);
        assert_eq!(t[(0, 1)], 0.25);
        assert_eq!(t[(1, 0)], 0.25);
        assert_eq!(t[(1, 1)], 0.0);
    }

    #[test]
    fn rejects_bad_plan_shape() {
        let x = DMatrix::zeros(2, 3);
        assert!(squared_loss_contraction(&x, &x, &DMatrix::zeros(2, 2)).is_err());
    }
}
