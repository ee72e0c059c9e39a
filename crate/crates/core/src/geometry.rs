//! Pairwise structure on point clouds: squared distances, Gaussian affinities
//! and the symmetric normalized graph Laplacian.

use alloc::vec::Vec;
use core::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyPointCloud)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                index: 0,
                expected: 1,
                found: 0,
            });
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a cloud from row-major coordinates; `coords.len()` must be a
    /// nonzero multiple of `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyPointCloud);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                index: coords.len() / dim,
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Returns the cloud whose `i`-th point is `self.point(perm[i])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &p in perm {
            coords.extend_from_slice(self.point(p));
        }
        Self { dim: self.dim, coords }
    }
}

/// Square matrix with exactly equal mirrored entries and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::ShapeMismatch {
                context: "symmetric matrix",
                expected: (values.nrows(), values.nrows()),
                found: values.shape(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let n = values.nrows();
        for j in 0..n {
            for i in 0..j {
                if values[(i, j)] != values[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self(values))
    }

    /// Evaluates `f(i, j)` for `i <= j` only and mirrors the result.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Restriction to the rows and columns listed in `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_upper_fn(idx.len(), |a, b| self.0[(idx[a], idx[b])])
    }
}

impl Deref for SymmetricMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Rule used to pick the Gaussian bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bandwidth {
    /// `h^2 = N^2 / sum_ij |x_i - x_j|^2`, read literally from the source
    /// construction; the bandwidth shrinks as the cloud spreads.
    #[default]
    Paper,
    /// `h^2` is the median squared distance over distinct pairs.
    Median,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn pairwise_sq_dists(pc: &PointCloud) -> SymmetricMatrix {
    SymmetricMatrix::from_upper_fn(
        pc.len(),
        |i, j| {
            if i == j {
                0.0
            } else {
                sq_dist(pc.point(i), pc.point(j))
            }
        },
    )
}

/// Euclidean (not squared) distances, the scale used by Rips filtrations.
pub fn pairwise_dists(pc: &PointCloud) -> SymmetricMatrix {
    let sq = pairwise_sq_dists(pc);
    SymmetricMatrix::from_upper_fn(pc.len(), |i, j| libm::sqrt(sq[(i, j)]))
}

/// Squared bandwidth `h^2` for a matrix of squared distances.
pub fn bandwidth_sq(sq_dists: &SymmetricMatrix, rule: Bandwidth) -> Result<f64> {
    let n = sq_dists.size();
    let h2 = match rule {
        Bandwidth::Paper => {
            let total: f64 = sq_dists.iter().sum();
            if total <= 0.0 {
                return Err(Error::DegenerateBandwidth);
            }
            (n * n) as f64 / total
        }
        Bandwidth::Median => {
            let mut off: Vec<f64> = (0..n)
                .flat_map(|j| (0..j).map(move |i| (i, j)))
                .map(|(i, j)| sq_dists[(i, j)])
                .collect();
            if off.is_empty() {
                return Err(Error::DegenerateBandwidth);
            }
            off.sort_by(f64::total_cmp);
            let m = off.len();
            if m % 2 == 1 {
                off[m / 2]
            } else {
                0.5 * (off[m / 2 - 1] + off[m / 2])
            }
        }
    };
    if !(h2 > 0.0) || !h2.is_finite() {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(h2)
}

/// `exp(-|x_i - x_j|^2 / h^2)` with `h` chosen by `rule`; unit diagonal.
pub fn gaussian_affinity(pc: &PointCloud, rule: Bandwidth) -> Result<SymmetricMatrix> {
    let sq = pairwise_sq_dists(pc);
    let h2 = bandwidth_sq(&sq, rule)?;
    Ok(SymmetricMatrix::from_upper_fn(pc.len(), |i, j| {
        if i == j {
            1.0
        } else {
            libm::exp(-sq[(i, j)] / h2)
        }
    }))
}

/// `I - D^{-1/2} A D^{-1/2}` with `D` the row sums of `A` (diagonal included).
pub fn sym_normalized_laplacian(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = a.size();
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let row = a.row(i);
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "affinity row {i} has negative entries"
            )));
        }
        let deg: f64 = row.iter().sum();
        if !(deg > 0.0) {
            return Err(Error::ZeroDegree(i));
        }
        inv_sqrt.push(1.0 / libm::sqrt(deg));
    }
    Ok(SymmetricMatrix::from_upper_fn(n, |i, j| {
        let off = inv_sqrt[i] * a[(i, j)] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        PointCloud::new(&pts).unwrap()
    }

    #[test]
    fn rejects_ragged_and_non_finite_input() {
        assert!(matches!(
            PointCloud::new(&[vec![0.0, 1.0], vec![1.0]]),
            Err(Error::DimensionMismatch { index: 1, .. })
        ));
        assert!(PointCloud::new(&[vec![f64::NAN]]).is_err());
        assert!(matches!(PointCloud::new(&[]), Err(Error::EmptyPointCloud)));
    }

    #[test]
    fn single_point_has_zero_distance_matrix() {
        let pc = PointCloud::new(&[vec![3.0, -1.0]]).unwrap();
        let d = pairwise_sq_dists(&pc);
        assert_eq!(d.size(), 1);
        assert_eq!(d[(0, 0)], 0.0);
    }

    #[test]
    fn three_four_five() {
        let pc = PointCloud::new(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = pairwise_sq_dists(&pc);
        assert_eq!(d[(0, 1)], 25.0);
        assert_eq!(d[(1, 0)], 25.0);
    }

    #[test]
    fn sq_dists_match_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pc = random_cloud(&mut rng, 10, 3);
        let d = pairwise_sq_dists(&pc);
        for i in 0..10 {
            for j in 0..10 {
                let mut acc = 0.0;
                for k in 0..3 {
                    let diff = pc.point(i)[k] - pc.point(j)[k];
                    acc += diff * diff;
                }
                assert_eq!(d[(i, j)], acc);
            }
        }
    }

    #[test]
    fn two_point_affinity_follows_bandwidth_rule() {
        let r: f64 = 0.8;
        let pc = PointCloud::new(&[vec![0.0, 0.0], vec![r, 0.0]]).unwrap();
        let k = gaussian_affinity(&pc, Bandwidth::Paper).unwrap();
        let expected = libm::exp(-r * r * r * r / 2.0);
        assert!((k[(0, 1)] - expected).abs() < 1e-15);
        assert_eq!(k[(0, 0)], 1.0);
    }

    #[test]
    fn coincident_points_have_degenerate_bandwidth() {
        let pc = PointCloud::new(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            gaussian_affinity(&pc, Bandwidth::Paper),
            Err(Error::DegenerateBandwidth)
        );
        assert_eq!(
            gaussian_affinity(&pc, Bandwidth::Median),
            Err(Error::DegenerateBandwidth)
        );
    }

    #[test]
    fn affinity_is_translation_invariant() {
        // dyadic coordinates keep the translated differences exact
        let pts = vec![vec![0.25, 0.5], vec![1.5, -0.75], vec![-1.0, 2.0], vec![0.125, 0.0]];
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + 3.0, p[1] - 5.0]).collect();
        let a = gaussian_affinity(&PointCloud::new(&pts).unwrap(), Bandwidth::Paper).unwrap();
        let b = gaussian_affinity(&PointCloud::new(&moved).unwrap(), Bandwidth::Paper).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn affinity_is_rigid_motion_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pc = random_cloud(&mut rng, 15, 2);
        let (s, c) = (libm::sin(0.7), libm::cos(0.7));
        let moved: Vec<Vec<f64>> = pc
            .points()
            .map(|p| vec![c * p[0] - s * p[1] + 1.3, s * p[0] + c * p[1] - 0.4])
            .collect();
        for rule in [Bandwidth::Paper, Bandwidth::Median] {
            let a = gaussian_affinity(&pc, rule).unwrap();
            let b = gaussian_affinity(&PointCloud::new(&moved).unwrap(), rule).unwrap();
            assert!((a.as_matrix() - b.as_matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn affinity_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pc = random_cloud(&mut rng, 20, 2);
        let k = gaussian_affinity(&pc, Bandwidth::Paper).unwrap();
        for i in 0..20 {
            assert_eq!(k[(i, i)], 1.0);
            for j in 0..20 {
                assert!(k[(i, j)] > 0.0 && k[(i, j)] <= 1.0);
            }
        }
    }

    #[test]
    fn laplacian_of_identity_vanishes() {
        let a = SymmetricMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let l = sym_normalized_laplacian(&a).unwrap();
        assert_eq!(l.as_matrix(), &DMatrix::zeros(4, 4));
    }

    #[test]
    fn laplacian_rejects_zero_degree() {
        let a = SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(sym_normalized_laplacian(&a), Err(Error::ZeroDegree(1)));
    }

    #[test]
    fn two_node_laplacian_spectrum() {
        let a = SymmetricMatrix::new(DMatrix::from_element(2, 2, 1.0)).unwrap();
        let l = sym_normalized_laplacian(&a).unwrap();
        let eig = l.as_matrix().clone().symmetric_eigen();
        for &v in eig.eigenvalues.iter() {
            assert!((-1e-12..=2.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn laplacian_null_vector_and_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pc = random_cloud(&mut rng, 8, 2);
        let a = gaussian_affinity(&pc, Bandwidth::Median).unwrap();
        let l = sym_normalized_laplacian(&a).unwrap();
        let sqrt_deg = nalgebra::DVector::from_iterator(8, (0..8).map(|i| libm::sqrt(a.row(i).iter().sum::<f64>())));
        let null = l.as_matrix() * &sqrt_deg;
        assert!(null.amax() < 1e-12);
        let eig = l.as_matrix().clone().symmetric_eigen();
        for &v in eig.eigenvalues.iter() {
            assert!((-1e-10..=2.0 + 1e-10).contains(&v));
        }
        for _ in 0..20 {
            let v = nalgebra::DVector::from_iterator(8, (0..8).map(|_| rng.random_range(-1.0..1.0)));
            assert!(v.dot(&(l.as_matrix() * &v)) >= -1e-10);
        }
    }
}
