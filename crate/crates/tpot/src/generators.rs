//! Seeded synthetic point clouds used by the examples and the acceptance
//! suite. Every generator adds isotropic Gaussian noise with standard
//! deviation `0.05 * scale`, where `scale` is the radius (or minor radius) of
//! the loop being sampled.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use tpot_core::geometry::PointCloud;

/// Relative noise level applied by every generator.
pub const NOISE: f64 = 0.05;

/// A cloud whose points carry the index of the loop they were sampled from.
#[derive(Debug, Clone)]
pub struct LabeledCloud {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
}

impl LabeledCloud {
    fn from_parts(points: Vec<Vec<f64>>, labels: Vec<usize>) -> Self {
        let cloud = PointCloud::new(&points).expect("generators emit finite, nonempty clouds");
        Self { cloud, labels }
    }

    pub fn n_labels(&self) -> usize {
        self.labels.iter().max().map_or(0, |&l| l + 1)
    }
}

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    Normal::new(0.0, sigma).expect("sigma is finite").sample(rng)
}

/// `n` points evenly spaced in angle on an ellipse with semi-axes `(a, b)`,
/// rotated by `rot` and centred at `c`.
fn ellipse<R: Rng>(rng: &mut R, n: usize, c: [f64; 2], a: f64, b: f64, rot: f64) -> Vec<Vec<f64>> {
    let sigma = NOISE * a.min(b);
    let phase = rng.random_range(0.0..TAU);
    let (s, co) = rot.sin_cos();
    (0..n)
        .map(|k| {
            let th = phase + TAU * k as f64 / n as f64;
            let (x, y) = (a * th.cos(), b * th.sin());
            vec![
                c[0] + co * x - s * y + gaussian(rng, sigma),
                c[1] + s * x + co * y + gaussian(rng, sigma),
            ]
        })
        .collect()
}

fn concat(parts: Vec<Vec<Vec<f64>>>) -> LabeledCloud {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (l, part) in parts.into_iter().enumerate() {
        labels.extend(std::iter::repeat_n(l, part.len()));
        points.extend(part);
    }
    LabeledCloud::from_parts(points, labels)
}

/// Four circles of radius 0.25 in a row, 0.8 apart.
pub fn four_circles<R: Rng>(rng: &mut R, n_per: usize) -> LabeledCloud {
    concat(
        (0..4)
            .map(|k| ellipse(rng, n_per, [0.8 * k as f64, 0.0], 0.25, 0.25, 0.0))
            .collect(),
    )
}

/// Four elliptic petals with semi-axes 0.4 by 0.15 whose inner tips meet at
/// the origin.
pub fn flower<R: Rng>(rng: &mut R, n_per: usize) -> LabeledCloud {
    let (a, b) = (0.4, 0.15);
    let hub = 0.05;
    concat(
        (0..4)
            .map(|k| {
                let th = PI / 4.0 + k as f64 * PI / 2.0;
                let r = a + hub;
                ellipse(rng, n_per, [r * th.cos(), r * th.sin()], a, b, th)
            })
            .collect(),
    )
}

/// Three loops of radii 0.5, 0.3 and 0.15. Layout `0` places them in a row;
/// any other layout puts them on a triangle in a different order.
pub fn noisy_loops<R: Rng>(rng: &mut R, layout: u8) -> LabeledCloud {
    let radii = [0.5, 0.3, 0.15];
    let counts = [90, 60, 40];
    let centers: [[f64; 2]; 3] = if layout == 0 {
        [[0.0, 0.0], [1.2, 0.0], [2.0, 0.0]]
    } else {
        [[1.6, 1.1], [0.0, 0.0], [1.4, -0.2]]
    };
    concat(
        (0..3)
            .map(|i| ellipse(rng, counts[i], centers[i], radii[i], radii[i], 0.0))
            .collect(),
    )
}

/// A chain of `n_loops` circles of radius 0.1 along a gently bending
/// path with growing gaps, so the chain has no mirror symmetry.
pub fn loop_chain<R: Rng>(rng: &mut R, n_loops: usize, n_per: usize) -> LabeledCloud {
    let r = 0.1;
    let mut x = 0.0;
    let parts = (0..n_loops)
        .map(|k| {
            let t = k as f64 / n_loops.max(2).saturating_sub(1) as f64;
            let y = 0.25 * t * t;
            let c = [x, y];
            x += 0.3 + 0.06 * t;
            ellipse(rng, n_per, c, r, r, 0.0)
        })
        .collect();
    concat(parts)
}

/// A torus with radii `(0.6, 0.25)`, sampled uniformly in both angles.
pub fn torus<R: Rng>(rng: &mut R, n: usize) -> PointCloud {
    let (big, small) = (0.6, 0.25);
    let sigma = NOISE * small;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let u = rng.random_range(0.0..TAU);
            let v = rng.random_range(0.0..TAU);
            let w = big + small * v.cos();
            vec![
                w * u.cos() + gaussian(rng, sigma),
                w * u.sin() + gaussian(rng, sigma),
                small * v.sin() + gaussian(rng, sigma),
            ]
        })
        .collect();
    PointCloud::new(&points).expect("finite torus")
}

/// A mug: an open cylinder (radius 0.5, height 1.2) with a half-ring handle
/// of radius 0.3 and tube radius 0.06 attached to its side.
pub fn mug<R: Rng>(rng: &mut R, n: usize) -> PointCloud {
    let (radius, height) = (0.5, 1.2);
    let n_handle = n / 4;
    let mut points = Vec::with_capacity(n);
    let sigma = NOISE * 0.1;
    for _ in 0..n - n_handle {
        let u = rng.random_range(0.0..TAU);
        let z = rng.random_range(0.0..height);
        points.push(vec![
            radius * u.cos() + gaussian(rng, sigma),
            radius * u.sin() + gaussian(rng, sigma),
            z + gaussian(rng, sigma),
        ]);
    }
    let (hr, tube) = (0.3, 0.06);
    for _ in 0..n_handle {
        let u = rng.random_range(-PI / 2.0..PI / 2.0);
        let v = rng.random_range(0.0..TAU);
        let w = hr + tube * v.cos();
        points.push(vec![
            radius + w * u.cos() + gaussian(rng, sigma),
            tube * v.sin() + gaussian(rng, sigma),
            height / 2.0 + w * u.sin() + gaussian(rng, sigma),
        ]);
    }
    PointCloud::new(&points).expect("finite mug")
}

fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|v| v / norm);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// A discretized trefoil knot followed through `steps` snapshots.
///
/// Vertex `i` of every snapshot comes from the same curve parameter, so the
/// point correspondence between snapshots is the identity. Each snapshot
/// rotates the whole curve rigidly, and a swelling travels once around the
/// knot over the sequence, so the three lobes keep trading places in size.
/// The swelling profile is lopsided, which leaves the curve without
/// symmetries.
/// Fresh noise with `sigma = 0.01` is drawn at every step.
pub fn trefoil_sequence<R: Rng>(rng: &mut R, steps: usize, n: usize) -> Vec<PointCloud> {
    let sigma = NOISE * 0.2;
    (0..steps)
        .map(|s| {
            let time = s as f64 / steps.max(1) as f64;
            let rot = rotation([1.0, 0.7, 0.4], 0.35 * s as f64);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let phase = t - TAU * time;
                    let swell = 1.0 + 0.45 * phase.cos() + 0.2 * (2.0 * phase).sin();
                    let p = [
                        swell * (t.sin() + 2.0 * (2.0 * t).sin()) / 3.0,
                        swell * (t.cos() - 2.0 * (2.0 * t).cos()) / 3.0,
                        -(3.0 * t).sin() / 3.0,
                    ];
                    (0..3)
                        .map(|r| rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2] + gaussian(rng, sigma))
                        .collect()
                })
                .collect();
            PointCloud::new(&points).expect("finite trefoil")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes_and_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = four_circles(&mut rng, 50);
        assert_eq!(c.cloud.len(), 200);
        assert_eq!(c.n_labels(), 4);
        assert_eq!(flower(&mut rng, 50).cloud.len(), 200);
        assert_eq!(loop_chain(&mut rng, 9, 22).n_labels(), 9);
        assert_eq!(noisy_loops(&mut rng, 1).cloud.len(), 190);
        assert_eq!(torus(&mut rng, 100).dim(), 3);
        assert_eq!(mug(&mut rng, 100).len(), 100);
        let seq = trefoil_sequence(&mut rng, 3, 60);
        assert_eq!(seq.len(), 3);
        assert!(seq.iter().all(|pc| pc.len() == 60 && pc.dim() == 3));
    }

    #[test]
    fn same_seed_same_cloud() {
        let a = four_circles(&mut ChaCha8Rng::seed_from_u64(9), 20);
        let b = four_circles(&mut ChaCha8Rng::seed_from_u64(9), 20);
        assert_eq!(a.cloud, b.cloud);
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = rotation([0.3, -1.0, 2.0], 1.1);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
