use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::geometry::SymmetricMatrix;
use crate::network::{MeasureTopologicalNetwork, NetworkMeta};
use crate::persistence::DiagramPoint;

pub fn random_network<R: Rng>(rng: &mut R, n: usize, m: usize) -> MeasureTopologicalNetwork {
    let affinity = SymmetricMatrix::from_upper_fn(n, |i, j| if i == j { 1.0 } else { rng.random_range(0.0..1.0) });
    let mass: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(0.2..1.0));
    let mass = &mass / mass.sum();
    let diagram: Vec<DiagramPoint> = (0..m)
        .map(|_| {
            let b = rng.random_range(0.0..1.0);
            DiagramPoint::new(b, b + rng.random_range(0.05..1.0))
        })
        .collect();
    let dmass: DVector<f64> = DVector::from_fn(m, |_, _| rng.random_range(0.2..1.0));
    let dmass = &dmass / dmass.sum().max(1e-300);
    let incidence = DMatrix::from_fn(n, m, |_, _| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
    MeasureTopologicalNetwork::new(affinity, mass, diagram, dmass, incidence, NetworkMeta::default()).unwrap()
}
