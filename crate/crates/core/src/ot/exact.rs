use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{check_marginals, Coupling};
use crate::error::{Error, Result};

/// Largest side length accepted by [`exact_ot`].
pub const DEFAULT_SIZE_CAP: usize = 512;

/// Exact optimal transport `min <cost, pi>` over the couplings of `a` and `b`.
///
/// Transportation network simplex started from the northwest-corner basis.
/// The result is a vertex of the transportation polytope, so it has at most
/// `m + n - 1` nonzero entries.
pub fn exact_ot(cost: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Result<Coupling> {
    exact_ot_with_cap(cost, a, b, DEFAULT_SIZE_CAP)
}

pub fn exact_ot_with_cap(cost: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>, cap: usize) -> Result<Coupling> {
    let (m, n) = cost.shape();
    if a.len() != m || b.len() != n {
        return Err(Error::ShapeMismatch {
            context: "exact_ot marginals",
            expected: (m, n),
            found: (a.len(), b.len()),
        });
    }
    if m > cap || n > cap {
        return Err(Error::SizeCap { rows: m, cols: n, cap });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("exact_ot cost"));
    }
    check_marginals(a, b)?;
    if m == 0 || n == 0 {
        return Ok(Coupling::new(DMatrix::zeros(m, n), a.clone(), b.clone()));
    }
    let mut simplex = Simplex::northwest(cost, a, b);
    simplex.run()?;
    let mut plan = DMatrix::zeros(m, n);
    for e in &simplex.edges {
        plan[(e.row, e.col)] += e.flow;
    }
    Ok(Coupling::new(plan, a.clone(), b.clone()))
}

/// Moves an entropic plan to a vertex of its polytope by maximizing `<pi_eps, pi>`.
pub fn round_to_vertex(pi: &Coupling) -> Result<Coupling> {
    let neg = -&pi.plan;
    exact_ot(&neg, &pi.row_marginal, &pi.col_marginal)
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    row: usize,
    col: usize,
    flow: f64,
}

const NONE: usize = usize::MAX;

struct Simplex<'a> {
    cost: &'a DMatrix<f64>,
    m: usize,
    n: usize,
    edges: Vec<Edge>,
    /// Edge ids incident to each node; rows are `0..m`, columns `m..m + n`.
    adj: Vec<Vec<usize>>,
    basic: Vec<bool>,
    u: Vec<f64>,
    v: Vec<f64>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    tol: f64,
}

impl<'a> Simplex<'a> {
    fn northwest(cost: &'a DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Self {
        let (m, n) = cost.shape();
        let mut edges = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a[0], b[0]);
        loop {
            let x = ra.min(rb);
            edges.push(Edge {
                row: i,
                col: j,
                flow: x,
            });
            ra -= x;
            rb -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra <= rb) {
                i += 1;
                ra = a[i];
            } else {
                j += 1;
                rb = b[j];
            }
        }
        let mut adj = vec![Vec::new(); m + n];
        let mut basic = vec![false; m * n];
        for (id, e) in edges.iter().enumerate() {
            adj[e.row].push(id);
            adj[m + e.col].push(id);
            basic[e.row * n + e.col] = true;
        }
        let scale = cost.amax();
        Self {
            cost,
            m,
            n,
            edges,
            adj,
            basic,
            u: vec![0.0; m],
            v: vec![0.0; n],
            parent_edge: vec![NONE; m + n],
            depth: vec![0; m + n],
            tol: 1e-13 * scale.max(f64::MIN_POSITIVE),
        }
    }

    fn other(&self, id: usize, node: usize) -> usize {
        let e = self.edges[id];
        if node < self.m {
            self.m + e.col
        } else {
            e.row
        }
    }

    /// Dual potentials and a rooted spanning tree (root: row 0).
    fn refresh_tree(&mut self) {
        let m = self.m;
        self.parent_edge.fill(NONE);
        let mut seen = vec![false; m + self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        self.u[0] = 0.0;
        self.depth[0] = 0;
        queue.push_back(0);
        while let Some(node) = queue.pop_front() {
            for k in 0..self.adj[node].len() {
                let id = self.adj[node][k];
                let next = self.other(id, node);
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                self.parent_edge[next] = id;
                self.depth[next] = self.depth[node] + 1;
                let e = self.edges[id];
                let c = self.cost[(e.row, e.col)];
                if next < m {
                    self.u[next] = c - self.v[e.col];
                } else {
                    self.v[e.col] = c - self.u[e.row];
                }
                queue.push_back(next);
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, usize)> {
        let mut best = None;
        let mut best_rc = -self.tol;
        for i in 0..self.m {
            let base = i * self.n;
            for j in 0..self.n {
                if self.basic[base + j] {
                    continue;
                }
                let rc = self.cost[(i, j)] - self.u[i] - self.v[j];
                if rc < best_rc {
                    if bland {
                        return Some((i, j));
                    }
                    best_rc = rc;
                    best = Some((i, j));
                }
            }
        }
        best
    }

    /// Tree edges on the cycle closed by `(i, j)`, starting next to column `j`.
    fn cycle(&self, i: usize, j: usize) -> Vec<usize> {
        let (mut x, mut y) = (self.m + j, i);
        let mut from_col = Vec::new();
        let mut from_row = Vec::new();
        while self.depth[x] > self.depth[y] {
            let id = self.parent_edge[x];
            from_col.push(id);
            x = self.other(id, x);
        }
        while self.depth[y] > self.depth[x] {
            let id = self.parent_edge[y];
            from_row.push(id);
            y = self.other(id, y);
        }
        while x != y {
            let id = self.parent_edge[x];
            from_col.push(id);
            x = self.other(id, x);
            let id = self.parent_edge[y];
            from_row.push(id);
            y = self.other(id, y);
        }
        from_col.extend(from_row.into_iter().rev());
        from_col
    }

    fn run(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let max_pivots = 50 * (m + n) * (m + n) + 1000;
        let degenerate_limit = 2 * (m + n);
        let mut degenerate_run = 0;
        for _ in 0..max_pivots {
            self.refresh_tree();
            let Some((i, j)) = self.entering(degenerate_run > degenerate_limit) else {
                return Ok(());
            };
            let cycle = self.cycle(i, j);
            // signs alternate -, +, -, ... starting from the column side
            let mut theta = f64::INFINITY;
            let mut leave = NONE;
            for &id in cycle.iter().step_by(2) {
                let f = self.edges[id].flow;
                if f < theta || (f == theta && id < leave) {
                    theta = f;
                    leave = id;
                }
            }
            debug_assert!(leave != NONE);
            if theta > 0.0 {
                degenerate_run = 0;
                for (pos, &id) in cycle.iter().enumerate() {
                    if pos % 2 == 0 {
                        self.edges[id].flow -= theta;
                    } else {
                        self.edges[id].flow += theta;
                    }
                }
            } else {
                degenerate_run += 1;
            }
            let old = self.edges[leave];
            self.basic[old.row * n + old.col] = false;
            self.adj[old.row].retain(|&x| x != leave);
            self.adj[m + old.col].retain(|&x| x != leave);
            self.edges[leave] = Edge {
                row: i,
                col: j,
                flow: theta,
            };
            self.basic[i * n + j] = true;
            self.adj[i].push(leave);
            self.adj[m + j].push(leave);
        }
        Err(Error::SolverFailure("network simplex exceeded its pivot budget"))
    }
}
