//! Convex interpolation between matched networks, and frames for display.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::SymmetricMatrix;
use crate::network::{MeasureTopologicalNetwork, NetworkMeta};
use crate::persistence::DiagramPoint;
use crate::tpot::{CouplingPair, TpotProblem};

/// Positive entries of a plan in row-major order.
pub fn plan_support(plan: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let (r, c) = plan.shape();
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if plan[(i, j)] > 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// The network at time `t` on the geodesic determined by `pair`.
///
/// Points are the support of `pi_v` weighted by the plan, features are the
/// support of the canonical `pi_e`. Affinities, incidences and diagram
/// points move linearly; a feature matched to the diagonal moves toward (or
/// comes from) its projection.
pub fn interpolate(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    pair: &CouplingPair,
    t: f64,
) -> Result<MeasureTopologicalNetwork> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(alloc::format!("t = {t} outside [0, 1]")));
    }
    let prob = TpotProblem::new(p, q);
    prob.check(pair)?;
    let pair = pair.clone().canonical();
    let sv = plan_support(&pair.pi_v.plan);
    if sv.is_empty() {
        return Err(Error::EmptySupport);
    }
    let se = plan_support(&pair.pi_e.plan);
    let (m, m2) = (p.n_features(), q.n_features());
    let (c, c2) = (p.affinity(), q.affinity());

    let affinity = SymmetricMatrix::from_upper_fn(sv.len(), |a, b| {
        let ((i, j), (k, l)) = (sv[a], sv[b]);
        (1.0 - t) * c[(i, k)] + t * c2[(j, l)]
    });
    let point_mass = DVector::from_iterator(sv.len(), sv.iter().map(|&(i, j)| pair.pi_v.plan[(i, j)]));

    let diagram: Vec<DiagramPoint> = se
        .iter()
        .map(|&(a, b)| {
            let x = if a < m {
                p.diagram()[a]
            } else {
                q.diagram()[b].diagonal_projection()
            };
            let y = if b < m2 {
                q.diagram()[b]
            } else {
                p.diagram()[a].diagonal_projection()
            };
            x.lerp(&y, t)
        })
        .collect();
    let diagram_mass = DVector::from_iterator(se.len(), se.iter().map(|&(a, b)| pair.pi_e.plan[(a, b)]));
    let w = &prob.source_side().incidence;
    let w2 = &prob.target_side().incidence;
    let incidence = DMatrix::from_fn(sv.len(), se.len(), |r, s| {
        let ((i, j), (a, b)) = (sv[r], se[s]);
        (1.0 - t) * w[(i, a)] + t * w2[(j, b)]
    });
    let meta = NetworkMeta {
        degree: p.meta().degree,
        kernel: p.meta().kernel,
        smoothing: None,
    };
    Ok(MeasureTopologicalNetwork::from_parts_unchecked(
        affinity,
        point_mass,
        diagram,
        diagram_mass,
        incidence,
        meta,
    ))
}

/// `(lhs, rhs)` with `lhs` the objective between the geodesic networks at `s`
/// and `t` under their identity couplings and `rhs = (t - s)^2` times the
/// objective of `pair`. The two agree along a geodesic.
pub fn geodesic_cost_identity(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    pair: &CouplingPair,
    s: f64,
    t: f64,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    if !(s <= t) {
        return Err(Error::InvalidParameter("expected s <= t".into()));
    }
    let ps = interpolate(p, q, pair, s)?;
    let pt = interpolate(p, q, pair, t)?;
    let identity = CouplingPair::identity(&ps);
    let lhs = TpotProblem::new(&ps, &pt).objective(&identity, alpha, beta)?;
    let base = TpotProblem::new(p, q).objective(&pair.clone().canonical(), alpha, beta)?;
    Ok((lhs, (t - s) * (t - s) * base))
}

/// Classical multidimensional scaling of a matrix of squared dissimilarities.
///
/// Returns `n x d` coordinates. The first clearly nonzero loading of every
/// axis is made positive. Missing positive eigenvalues give zero columns.
pub fn mds_embed(sq: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    let n = sq.nrows();
    if !sq.is_square() {
        return Err(Error::ShapeMismatch {
            context: "mds input",
            expected: (n, n),
            found: sq.shape(),
        });
    }
    let mut coords = DMatrix::zeros(n, d);
    if n <= 1 || d == 0 {
        return Ok(coords);
    }
    let row_mean = sq.column_mean();
    let col_mean = sq.row_mean();
    let mean = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - col_mean[j] + mean));
    let b = (&b + b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let top = eig.eigenvalues[order[0]].abs().max(eig.eigenvalues.amax());
    let floor = 1e-12 * top.max(f64::MIN_POSITIVE);
    let mut kept = 0;
    for (axis, &k) in order.iter().take(d).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= floor {
            break;
        }
        let mut v = eig.eigenvectors.column(k).into_owned();
        let vmax = v.amax();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * vmax) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        coords.column_mut(axis).copy_from(&(v * libm::sqrt(lambda)));
        kept += 1;
    }
    if kept < d {
        log::warn!("mds: only {kept} of {d} requested axes have positive eigenvalues");
    }
    Ok(coords)
}

/// Best rigid motion (orthogonal map plus translation, no scaling) of `x`
/// onto `reference` in the Frobenius norm.
pub fn procrustes_align(reference: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if reference.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            context: "procrustes",
            expected: reference.shape(),
            found: x.shape(),
        });
    }
    let (n, d) = x.shape();
    if n == 0 || d == 0 {
        return Ok(x.clone());
    }
    let mr = reference.row_mean();
    let mx = x.row_mean();
    let mut rc = reference.clone();
    let mut xc = x.clone();
    for i in 0..n {
        let mut r = rc.row_mut(i);
        r -= &mr;
        let mut r = xc.row_mut(i);
        r -= &mx;
    }
    let h = xc.tr_mul(&rc);
    let svd = h.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::SolverFailure("procrustes svd"));
    };
    let rot = u * v_t;
    let mut out = xc * rot;
    for i in 0..n {
        let mut r = out.row_mut(i);
        r += &mr;
    }
    Ok(out)
}

/// One interpolation frame: display dissimilarities and their embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicFrame {
    pub t: f64,
    pub support: Vec<(usize, usize)>,
    pub interp_cost: DMatrix<f64>,
    pub coords: DMatrix<f64>,
}

/// `n_frames` evenly spaced frames on `[0, 1]`.
///
/// `gauge` and `gauge2` are the squared dissimilarities used for display,
/// interpolated over the support of `pi_v`. Each frame is aligned to the
/// previous one.
pub fn geodesic_frames(
    pair: &CouplingPair,
    gauge: &DMatrix<f64>,
    gauge2: &DMatrix<f64>,
    n_frames: usize,
    d_embed: usize,
) -> Result<Vec<GeodesicFrame>> {
    let (n, n2) = pair.pi_v.shape();
    if gauge.shape() != (n, n) || gauge2.shape() != (n2, n2) {
        return Err(Error::ShapeMismatch {
            context: "display gauge",
            expected: (n, n2),
            found: (gauge.nrows(), gauge2.nrows()),
        });
    }
    if n_frames == 0 {
        return Ok(Vec::new());
    }
    let support = plan_support(&pair.pi_v.plan);
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut frames: Vec<GeodesicFrame> = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let t = if n_frames == 1 {
            0.0
        } else {
            k as f64 / (n_frames - 1) as f64
        };
        let cost = interp_gauge(gauge, gauge2, &support, t);
        let mut coords = mds_embed(&cost, d_embed)?;
        if let Some(prev) = frames.last() {
            coords = procrustes_align(&prev.coords, &coords)?;
        }
        frames.push(GeodesicFrame {
            t,
            support: support.clone(),
            interp_cost: cost,
            coords,
        });
    }
    Ok(frames)
}

fn interp_gauge(g: &DMatrix<f64>, g2: &DMatrix<f64>, support: &[(usize, usize)], t: f64) -> DMatrix<f64> {
    let k = support.len();
    let mut out = DMatrix::zeros(k, k);
    for b in 0..k {
        for a in 0..=b {
            let ((i, j), (i2, j2)) = (support[a], support[b]);
            let v = (1.0 - t) * g[(i, i2)] + t * g2[(j, j2)];
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}

/// Kernel-induced squared distance `k_ii + k_jj - 2 k_ij`.
pub fn kernel_sq_distance(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i != j {
                out[(i, j)] = (k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)]).max(0.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::exact_ot;
    use crate::test_support::random_network;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vertex_pair(rng: &mut ChaCha8Rng, p: &MeasureTopologicalNetwork, q: &MeasureTopologicalNetwork) -> CouplingPair {
        let prob = TpotProblem::new(p, q);
        let (mu, mu2) = (p.point_mass(), q.point_mass());
        let (nu, nu2) = (&prob.source_side().mass, &prob.target_side().mass);
        let cv = DMatrix::from_fn(mu.len(), mu2.len(), |_, _| rng.random_range(0.0..1.0));
        let ce = DMatrix::from_fn(nu.len(), nu2.len(), |_, _| rng.random_range(0.0..1.0));
        CouplingPair::new(exact_ot(&cv, mu, mu2).unwrap(), exact_ot(&ce, nu, nu2).unwrap()).canonical()
    }

    fn pairwise_sq(x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.nrows(), |i, j| (x.row(i) - x.row(j)).norm_squared())
    }

    #[test]
    fn endpoints_are_pullbacks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_network(&mut rng, 5, 2);
        let q = random_network(&mut rng, 4, 3);
        let pair = vertex_pair(&mut rng, &p, &q);
        let sv = plan_support(&pair.pi_v.plan);
        let p0 = interpolate(&p, &q, &pair, 0.0).unwrap();
        let p1 = interpolate(&p, &q, &pair, 1.0).unwrap();
        for (a, &(i, j)) in sv.iter().enumerate() {
            for (b, &(k, l)) in sv.iter().enumerate() {
                assert_eq!(p0.affinity()[(a, b)], p.affinity()[(i, k)]);
                assert_eq!(p1.affinity()[(a, b)], q.affinity()[(j, l)]);
            }
        }
        assert!((p0.point_mass().sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_path_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_network(&mut rng, 5, 2);
        let pair = CouplingPair::identity(&p);
        let mid = interpolate(&p, &p, &pair, 0.5).unwrap();
        assert_eq!(mid.affinity().as_matrix(), p.affinity().as_matrix());
        assert_eq!(mid.diagram(), p.diagram());
        assert_eq!(mid.incidence(), p.incidence());
        assert_eq!(mid.point_mass(), p.point_mass());
    }

    #[test]
    fn cost_identity_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        for _ in 0..3 {
            let p = random_network(&mut rng, 5, 2);
            let q = random_network(&mut rng, 5, 3);
            let pair = vertex_pair(&mut rng, &p, &q);
            for &s in &grid {
                for &t in grid.iter().filter(|&&t| t >= s) {
                    let (lhs, rhs) = geodesic_cost_identity(&p, &q, &pair, s, t, 0.5, 1.0).unwrap();
                    assert!((lhs - rhs).abs() < 1e-10, "s={s} t={t}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn empty_support_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_network(&mut rng, 3, 1);
        let mut pair = CouplingPair::identity(&p);
        pair.pi_v.plan.fill(0.0);
        assert!(matches!(interpolate(&p, &p, &pair, 0.5), Err(Error::EmptySupport)));
    }

    #[test]
    fn mds_equilateral_triangle() {
        let c = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        let x = mds_embed(&c, 2).unwrap();
        assert!((pairwise_sq(&x) - c).amax() < 1e-8);
    }

    #[test]
    fn mds_single_point_and_padding() {
        assert_eq!(mds_embed(&DMatrix::zeros(1, 1), 2).unwrap(), DMatrix::zeros(1, 2));
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 4.0, 0.0]);
        let x = mds_embed(&c, 3).unwrap();
        assert_eq!(x.column(1).amax(), 0.0);
        assert!((pairwise_sq(&x) - c).amax() < 1e-10);
    }

    #[test]
    fn mds_round_trip_and_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = DMatrix::from_fn(12, 2, |_, _| rng.random_range(-1.0..1.0));
        let c = pairwise_sq(&pts);
        let x = mds_embed(&c, 2).unwrap();
        assert!((pairwise_sq(&x) - &c).amax() < 1e-8);
        for k in 0..2 {
            let col = x.column(k);
            let first = col.iter().find(|v| v.abs() > 1e-8).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn procrustes_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = DMatrix::from_fn(10, 2, |_, _| rng.random_range(-1.0..1.0));
        assert!((procrustes_align(&r, &r).unwrap() - &r).amax() < 1e-12);

        let th: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let mut x = &r * rot;
        for mut row in x.row_iter_mut() {
            row[0] += 3.0;
            row[1] -= 1.0;
        }
        assert!((procrustes_align(&r, &x).unwrap() - &r).norm() < 1e-10);

        let noisy = &r + DMatrix::from_fn(10, 2, |_, _| rng.random_range(-0.01..0.01));
        let before = (&noisy - &r).norm();
        let after = (procrustes_align(&r, &noisy).unwrap() - &r).norm();
        assert!(after <= before);
    }

    #[test]
    fn frames_are_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_network(&mut rng, 6, 1);
        let q = random_network(&mut rng, 6, 1);
        let pair = vertex_pair(&mut rng, &p, &q);
        let xa = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let xb = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let (g, g2) = (pairwise_sq(&xa), pairwise_sq(&xb));
        let coarse = geodesic_frames(&pair, &g, &g2, 11, 2).unwrap();
        let fine = geodesic_frames(&pair, &g, &g2, 101, 2).unwrap();
        assert_eq!(coarse.len(), 11);
        let step = |f: &[GeodesicFrame]| {
            f.windows(2)
                .map(|w| (&w[1].coords - &w[0].coords).norm())
                .fold(0.0, f64::max)
        };
        // a ten times finer grid should shrink the largest step markedly
        assert!(step(&fine) < 0.5 * step(&coarse) + 1e-12);
        let ends = geodesic_frames(&pair, &g, &g2, 2, 2).unwrap();
        let sv = plan_support(&pair.pi_v.plan);
        for (a, &(i, _)) in sv.iter().enumerate() {
            for (b, &(k, _)) in sv.iter().enumerate() {
                assert_eq!(ends[0].interp_cost[(a, b)], g[(i, k)]);
            }
        }
    }
}
