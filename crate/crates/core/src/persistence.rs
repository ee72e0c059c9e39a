//! Vietoris-Rips filtrations and Z/2 persistent homology with representative
//! cycles taken from the reduction chains.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::SymmetricMatrix;

/// A point `(birth, death)` of a persistence diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub const fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Orthogonal projection onto the diagonal.
    pub fn diagonal_projection(&self) -> Self {
        let m = 0.5 * (self.birth + self.death);
        Self::new(m, m)
    }

    pub fn sq_dist(&self, other: &Self) -> f64 {
        let db = self.birth - other.birth;
        let dd = self.death - other.death;
        db * db + dd * dd
    }

    /// Squared distance to the diagonal, `(death - birth)^2 / 2`.
    pub fn sq_dist_to_diagonal(&self) -> f64 {
        let p = self.persistence();
        0.5 * p * p
    }

    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self::new(
            (1.0 - t) * self.birth + t * other.birth,
            (1.0 - t) * self.death + t * other.death,
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    offset: usize,
    dim: usize,
    value: f64,
}

/// Simplices sorted by `(value, dimension, vertex tuple)`.
#[derive(Debug, Clone)]
pub struct Filtration {
    n_points: usize,
    max_dim: usize,
    entries: Vec<Entry>,
    vertices: Vec<u32>,
}

impl Filtration {
    /// Builds a filtration from an explicit simplex list. Vertex tuples are
    /// sorted; every face must be present with a value no larger than its
    /// coface. `max_dim` is the highest homology degree the filtration
    /// supports, so simplices up to dimension `max_dim + 1` are accepted.
    pub fn from_simplices(n_points: usize, max_dim: usize, simplices: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut entries = Vec::with_capacity(simplices.len());
        for (mut s, value) in simplices {
            if s.is_empty() || s.len() > max_dim + 2 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "simplex of size {} outside dimension range",
                    s.len()
                )));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite("filtration value"));
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) || *s.last().unwrap() as usize >= n_points {
                return Err(Error::InvalidParameter("invalid simplex vertices".into()));
            }
            entries.push(Entry {
                offset: vertices.len(),
                dim: s.len() - 1,
                value,
            });
            vertices.extend_from_slice(&s);
        }
        let f = Self::sorted(n_points, max_dim, entries, vertices);
        f.check_closure()?;
        Ok(f)
    }

    fn sorted(n_points: usize, max_dim: usize, mut entries: Vec<Entry>, vertices: Vec<u32>) -> Self {
        entries.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.dim.cmp(&b.dim))
                .then_with(|| vertices[a.offset..=a.offset + a.dim].cmp(&vertices[b.offset..=b.offset + b.dim]))
        });
        // compact so that vertex storage follows filtration order
        let mut packed = Vec::with_capacity(vertices.len());
        for e in entries.iter_mut() {
            let start = packed.len();
            packed.extend_from_slice(&vertices[e.offset..=e.offset + e.dim]);
            e.offset = start;
        }
        Self {
            n_points,
            max_dim,
            entries,
            vertices: packed,
        }
    }

    fn check_closure(&self) -> Result<()> {
        let index = self.face_index(0, self.max_dim + 1);
        let mut face = Vec::new();
        for (pos, e) in self.entries.iter().enumerate() {
            if e.dim == 0 {
                continue;
            }
            let s = self.simplex(pos);
            for omit in 0..s.len() {
                face.clear();
                face.extend(s.iter().enumerate().filter(|&(k, _)| k != omit).map(|(_, &v)| v));
                match index.get(&self.key(&face)) {
                    Some(&fp) if fp < pos => {}
                    _ => {
                        return Err(Error::InvalidParameter(alloc::format!(
                            "face of simplex {pos} missing or out of order"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn simplex(&self, pos: usize) -> &[u32] {
        let e = &self.entries[pos];
        &self.vertices[e.offset..=e.offset + e.dim]
    }

    pub fn value(&self, pos: usize) -> f64 {
        self.entries[pos].value
    }

    pub fn dim(&self, pos: usize) -> usize {
        self.entries[pos].dim
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.len()).map(move |p| (self.simplex(p), self.value(p)))
    }

    /// Number of simplices in each dimension `0..=max_dim + 1`.
    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for e in &self.entries {
            counts[e.dim] += 1;
        }
        counts
    }

    /// Combinatorial-number-system key of a sorted vertex tuple.
    fn key(&self, s: &[u32]) -> u128 {
        s.iter()
            .enumerate()
            .map(|(k, &v)| binomial(v as u128, k as u128 + 1))
            .sum::<u128>()
            + ((s.len() as u128) << 120)
    }

    fn face_index(&self, lo: usize, hi: usize) -> BTreeMap<u128, usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.dim >= lo && e.dim <= hi)
            .map(|(p, _)| (self.key(self.simplex(p)), p))
            .collect()
    }

    fn boundary(&self, pos: usize, index: &BTreeMap<u128, usize>, buf: &mut Vec<u32>) -> Vec<usize> {
        let s = self.simplex(pos);
        if s.len() == 1 {
            return Vec::new();
        }
        let mut col: Vec<usize> = (0..s.len())
            .map(|omit| {
                buf.clear();
                buf.extend(s.iter().enumerate().filter(|&(k, _)| k != omit).map(|(_, &v)| v));
                index[&self.key(buf)]
            })
            .collect();
        col.sort_unstable();
        col
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All simplices of dimension `<= max_dim + 1` whose pairwise distances are
/// at most `threshold`; each enters at its largest pairwise distance.
pub fn rips_filtration(dists: &SymmetricMatrix, max_dim: usize, threshold: f64) -> Result<Filtration> {
    let n = dists.size();
    if max_dim < 1 {
        return Err(Error::InvalidParameter("max_dim must be at least 1".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter("threshold must be positive".into()));
    }
    if max_dim >= n {
        return Err(Error::DegenerateComplex { max_dim, points: n });
    }
    let top = max_dim + 1;
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (i + 1..n)
                .filter(|&j| dists[(i, j)] <= threshold)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut entries = Vec::new();
    let mut vertices = Vec::new();
    let mut stack: Vec<u32> = Vec::with_capacity(top + 1);
    for v in 0..n as u32 {
        stack.clear();
        stack.push(v);
        entries.push(Entry {
            offset: vertices.len(),
            dim: 0,
            value: 0.0,
        });
        vertices.push(v);
        let cands = upper[v as usize].clone();
        expand(dists, top, &upper, &mut stack, 0.0, &cands, &mut entries, &mut vertices);
    }
    Ok(Filtration::sorted(n, max_dim, entries, vertices))
}

#[allow(clippy::too_many_arguments)]
fn expand(
    dists: &SymmetricMatrix,
    top: usize,
    upper: &[Vec<u32>],
    stack: &mut Vec<u32>,
    value: f64,
    cands: &[u32],
    entries: &mut Vec<Entry>,
    vertices: &mut Vec<u32>,
) {
    for (ci, &u) in cands.iter().enumerate() {
        let v = stack
            .iter()
            .map(|&w| dists[(w as usize, u as usize)])
            .fold(value, f64::max);
        stack.push(u);
        entries.push(Entry {
            offset: vertices.len(),
            dim: stack.len() - 1,
            value: v,
        });
        vertices.extend_from_slice(stack);
        if stack.len() <= top {
            let nbrs = &upper[u as usize];
            let next: Vec<u32> = cands[ci + 1..]
                .iter()
                .copied()
                .filter(|c| nbrs.binary_search(c).is_ok())
                .collect();
            if !next.is_empty() {
                expand(dists, top, upper, stack, v, &next, entries, vertices);
            }
        }
        stack.pop();
    }
}

/// `min_i max_j d(i, j)`; above this scale the Rips complex is a cone.
pub fn enclosing_radius(dists: &SymmetricMatrix) -> f64 {
    (0..dists.size())
        .map(|i| dists.row(i).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// One finite persistence pair with its representative chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    /// Filtration position of the creating simplex.
    pub birth_index: usize,
    /// Filtration position of the destroying simplex.
    pub death_index: usize,
    /// Filtration positions of the simplices in the representative cycle.
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Reduction {
    pub pairs: Vec<PersistencePair>,
    /// Birth positions of classes that never die within the filtration.
    pub essential: Vec<usize>,
}

fn xor_into(acc: &mut Vec<usize>, other: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    core::mem::swap(acc, scratch);
}

const NONE: u32 = u32::MAX;

/// Standard column reduction in degrees `degree` and `degree + 1`.
///
/// Degree columns carry their reduction chains; the chain of a zero column
/// is a cycle. Coface columns are reduced until every cycle has been paired
/// or the filtration is exhausted.
pub fn reduce(f: &Filtration, degree: usize) -> Result<Reduction> {
    if degree > f.max_dim() {
        return Err(Error::InvalidParameter(alloc::format!(
            "degree {degree} exceeds filtration max_dim {}",
            f.max_dim()
        )));
    }
    let index = f.face_index(degree.saturating_sub(1), degree);
    let mut buf = Vec::new();
    let mut scratch = Vec::new();

    // degree columns with chain bookkeeping
    let mut owner = vec![NONE; f.len()];
    let mut reduced: Vec<Vec<usize>> = Vec::new();
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut cycles: Vec<(usize, usize)> = Vec::new(); // (birth position, chain slot)
    for pos in (0..f.len()).filter(|&p| f.dim(p) == degree) {
        let mut col = f.boundary(pos, &index, &mut buf);
        let mut chain = vec![pos];
        while let Some(&low) = col.last() {
            let o = owner[low];
            if o == NONE {
                break;
            }
            xor_into(&mut col, &reduced[o as usize], &mut scratch);
            xor_into(&mut chain, &chains[o as usize], &mut scratch);
        }
        let slot = reduced.len();
        if let Some(&low) = col.last() {
            owner[low] = slot as u32;
        } else {
            cycles.push((pos, slot));
        }
        reduced.push(col);
        chains.push(chain);
    }

    // coface columns: only the pivots matter
    let mut death_of = vec![NONE; f.len()];
    let mut owner_up = vec![NONE; f.len()];
    let mut reduced_up: Vec<Vec<usize>> = Vec::new();
    let mut paired = 0;
    for pos in (0..f.len()).filter(|&p| f.dim(p) == degree + 1) {
        if paired == cycles.len() {
            break;
        }
        let mut col = f.boundary(pos, &index, &mut buf);
        while let Some(&low) = col.last() {
            let o = owner_up[low];
            if o == NONE {
                break;
            }
            xor_into(&mut col, &reduced_up[o as usize], &mut scratch);
        }
        if let Some(&low) = col.last() {
            owner_up[low] = reduced_up.len() as u32;
            death_of[low] = pos as u32;
            reduced_up.push(col);
            paired += 1;
        }
    }

    let mut out = Reduction::default();
    for (birth, slot) in cycles {
        match death_of[birth] {
            NONE => out.essential.push(birth),
            d => out.pairs.push(PersistencePair {
                birth_index: birth,
                death_index: d as usize,
                cycle: core::mem::take(&mut chains[slot]),
            }),
        }
    }
    Ok(out)
}

/// Diagram points of one homology degree and a generating vertex set for each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceResult {
    pub degree: usize,
    pub points: Vec<DiagramPoint>,
    pub generators: Vec<Vec<usize>>,
}

impl PersistenceResult {
    pub fn new(degree: usize, points: Vec<DiagramPoint>, generators: Vec<Vec<usize>>) -> Result<Self> {
        let r = Self {
            degree,
            points,
            generators,
        };
        r.validate(None)?;
        Ok(r)
    }

    /// Checks the diagram invariants and, when given, the vertex range.
    pub fn validate(&self, n_points: Option<usize>) -> Result<()> {
        if self.points.len() != self.generators.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} diagram points but {} generators",
                self.points.len(),
                self.generators.len()
            )));
        }
        for (p, g) in self.points.iter().zip(&self.generators) {
            if !p.birth.is_finite() || !p.death.is_finite() {
                return Err(Error::NonFinite("diagram point"));
            }
            if !(p.death > p.birth) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "diagram point ({}, {}) is not above the diagonal",
                    p.birth,
                    p.death
                )));
            }
            if g.is_empty() {
                return Err(Error::InvalidParameter("empty generator".into()));
            }
            if let Some(n) = n_points {
                if let Some(&bad) = g.iter().find(|&&v| v >= n) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "generator vertex {bad} out of range for {n} points"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Persistence diagram of `f` in `degree`, keeping pairs with positive
/// persistence. Essential classes are dropped.
pub fn persistent_homology(f: &Filtration, degree: usize) -> Result<PersistenceResult> {
    let red = reduce(f, degree)?;
    if !red.essential.is_empty() {
        log::warn!(
            "dropping {} essential degree-{} classes below the filtration threshold",
            red.essential.len(),
            degree
        );
    }
    let mut out = PersistenceResult {
        degree,
        ..Default::default()
    };
    for pair in red.pairs {
        let (b, d) = (f.value(pair.birth_index), f.value(pair.death_index));
        if d > b {
            let mut verts: Vec<usize> = pair
                .cycle
                .iter()
                .flat_map(|&p| f.simplex(p).iter().map(|&v| v as usize))
                .collect();
            verts.sort_unstable();
            verts.dedup();
            out.points.push(DiagramPoint::new(b, d));
            out.generators.push(verts);
        }
    }
    Ok(out)
}

/// Keeps the `k` most persistent points, ordered by decreasing persistence
/// with ties broken by earlier birth, then lower original index.
pub fn top_k_features(r: &PersistenceResult, k: usize) -> PersistenceResult {
    let mut order: Vec<usize> = (0..r.points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&r.points[a], &r.points[b]);
        pb.persistence()
            .total_cmp(&pa.persistence())
            .then(pa.birth.total_cmp(&pb.birth))
            .then(a.cmp(&b))
    });
    order.truncate(k);
    PersistenceResult {
        degree: r.degree,
        points: order.iter().map(|&i| r.points[i]).collect(),
        generators: order.iter().map(|&i| r.generators[i].clone()).collect(),
    }
}
