//! Vertex-expansion certificates via network flow.
//!
//! Given a graph, a Dirichlet set `U` and an expansion parameter `c`, the
//! network has a source, a sink, an out-copy `y'` of every `y` in `Y = V - U`
//! and an in-copy `v''` of every vertex, with arcs
//!
//! * `s -> y'` of capacity `1 + c`,
//! * `y' -> y''` and `y' -> v''` (for every edge `yv`) of capacity 1,
//! * `v'' -> t` of capacity 1.
//!
//! The max flow equals `(1 + c)|Y|` exactly when every `W` inside `Y` has
//! `|N(W) - W| >= c|W|`. From a saturating flow, cancelling antiparallel
//! flow and reading off the middle arcs gives an edge orientation with
//! weights `h` in `[0, 1]` whose net outflow is at least `c` on `Y`.
//!
//! All arithmetic is exact: capacities are scaled by the denominator of `c`
//! and the flow runs on integers.

use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::torus_graph::{TorusGraphSpec, VertexSet};

/// Largest `|V - U|` accepted by [`certified_c`].
pub const CERTIFIED_C_MAX_INTERIOR: usize = 22;
/// Largest `|V|` accepted by [`certified_c`].
pub const CERTIFIED_C_MAX_VERTICES: usize = 128;

/// Finite simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    len: n,
                });
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SimpleGraph { adj })
    }

    pub fn from_torus(spec: &TorusGraphSpec) -> Self {
        let adj = (0..spec.vertex_count())
            .map(|u| {
                let mut buf = Vec::new();
                spec.neighbor_indices(u, &mut buf);
                buf
            })
            .collect();
        SimpleGraph { adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edges as `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// `sum_{uv in E} (x_u - x_v)^2`.
    pub fn laplacian_form(&self, x: &[f64]) -> f64 {
        self.edges()
            .iter()
            .map(|&(u, v)| (x[u] - x[v]).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowNode {
    Source,
    Sink,
    /// `y'` for `y` in `Y`.
    Out(usize),
    /// `v''` for `v` in `V`.
    In(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub from: FlowNode,
    pub to: FlowNode,
    pub capacity: Rational64,
}

#[derive(Debug, Clone)]
pub struct DirichletFlowNetwork {
    graph: SimpleGraph,
    dirichlet: VertexSet,
    c: Rational64,
    interior: Vec<usize>,
    arcs: Vec<FlowArc>,
    arc_index: HashMap<(FlowNode, FlowNode), usize>,
}

impl DirichletFlowNetwork {
    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn dirichlet(&self) -> &VertexSet {
        &self.dirichlet
    }

    pub fn c(&self) -> Rational64 {
        self.c
    }

    /// `Y = V - U`, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        2 + self.interior.len() + self.graph.vertex_count()
    }

    pub fn arc(&self, from: FlowNode, to: FlowNode) -> Option<usize> {
        self.arc_index.get(&(from, to)).copied()
    }

    /// `(1 + c)|Y|`.
    pub fn saturating_value(&self) -> Rational64 {
        (Rational64::one() + self.c) * Rational64::from_integer(self.interior.len() as i64)
    }

    fn node_id(&self, node: FlowNode) -> usize {
        let y = self.interior.len();
        match node {
            FlowNode::Source => 0,
            FlowNode::Sink => 1,
            FlowNode::Out(v) => 2 + self.interior.binary_search(&v).expect("out-copy of Y"),
            FlowNode::In(v) => 2 + y + v,
        }
    }
}

/// Arcs in order: for each `y` in `Y`, `s->y'`, `y'->y''`, then `y'->v''` for
/// neighbors `v` ascending; afterwards `v''->t` for every `v`.
pub fn build_network(
    graph: &SimpleGraph,
    dirichlet: &VertexSet,
    c: Rational64,
) -> Result<DirichletFlowNetwork> {
    if c.is_negative() {
        return Err(Error::NegativeExpansion);
    }
    if dirichlet.universe() != graph.vertex_count() {
        return Err(Error::InvalidParameter(
            "Dirichlet set does not match the graph".into(),
        ));
    }
    let one = Rational64::one();
    let interior: Vec<usize> = (0..graph.vertex_count())
        .filter(|&v| !dirichlet.contains(v))
        .collect();
    let mut arcs = Vec::new();
    for &y in &interior {
        arcs.push(FlowArc {
            from: FlowNode::Source,
            to: FlowNode::Out(y),
            capacity: one + c,
        });
        arcs.push(FlowArc {
            from: FlowNode::Out(y),
            to: FlowNode::In(y),
            capacity: one,
        });
        for &v in graph.neighbors(y) {
            arcs.push(FlowArc {
                from: FlowNode::Out(y),
                to: FlowNode::In(v),
                capacity: one,
            });
        }
    }
    for v in 0..graph.vertex_count() {
        arcs.push(FlowArc {
            from: FlowNode::In(v),
            to: FlowNode::Sink,
            capacity: one,
        });
    }
    let arc_index = arcs
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.from, a.to), i))
        .collect();
    Ok(DirichletFlowNetwork {
        graph: graph.clone(),
        dirichlet: dirichlet.clone(),
        c,
        interior,
        arcs,
        arc_index,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: Rational64,
    /// Flow on each arc, aligned with [`DirichletFlowNetwork::arcs`].
    pub flows: Vec<Rational64>,
}

/// Exact max flow by shortest augmenting paths (Edmonds-Karp). Residual arcs
/// are scanned in arc-insertion order, so the result is deterministic.
pub fn max_flow(net: &DirichletFlowNetwork) -> MaxFlow {
    let scale = *net.c.denom();
    let nodes = net.node_count();
    // residual edges stored pairwise: 2k forward, 2k+1 backward
    let mut to = Vec::with_capacity(2 * net.arcs.len());
    let mut cap: Vec<i64> = Vec::with_capacity(2 * net.arcs.len());
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for arc in &net.arcs {
        let scaled = arc.capacity * Rational64::from_integer(scale);
        debug_assert!(scaled.is_integer());
        let (a, b) = (net.node_id(arc.from), net.node_id(arc.to));
        out[a].push(to.len());
        to.push(b);
        cap.push(scaled.to_integer());
        out[b].push(to.len());
        to.push(a);
        cap.push(0);
    }
    let original: Vec<i64> = cap.clone();
    let (source, sink) = (0, 1);
    let mut total: i64 = 0;
    let mut pred = vec![usize::MAX; nodes];
    loop {
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        let mut queue = VecDeque::from([source]);
        let mut seen = vec![false; nodes];
        seen[source] = true;
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &e in &out[u] {
                let v = to[e];
                if !seen[v] && cap[e] > 0 {
                    seen[v] = true;
                    pred[v] = e;
                    queue.push_back(v);
                }
            }
        }
        if !seen[sink] {
            break;
        }
        let mut push = i64::MAX;
        let mut v = sink;
        while v != source {
            let e = pred[v];
            push = push.min(cap[e]);
            v = to[e ^ 1];
        }
        let mut v = sink;
        while v != source {
            let e = pred[v];
            cap[e] -= push;
            cap[e ^ 1] += push;
            v = to[e ^ 1];
        }
        total += push;
    }
    let flows = (0..net.arcs.len())
        .map(|k| Ratio::new(original[2 * k] - cap[2 * k], scale))
        .collect();
    MaxFlow {
        value: Ratio::new(total, scale),
        flows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedEdge {
    pub from: usize,
    pub to: usize,
    pub h: Rational64,
}

/// Outcome of checking the four orientation properties (plus `h` in `[0,1]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InvariantReport {
    /// `sum_j h(i,j) <= 1 + c` for `i` in `Y`.
    pub out_bounded: bool,
    /// `sum_j h(j,i) <= 1` for every `i`.
    pub in_bounded: bool,
    /// `out(i) - in(i) >= c` for `i` in `Y`.
    pub net_outflow: bool,
    /// Every edge appears once, with a single orientation.
    pub single_direction: bool,
    pub unit_interval: bool,
}

impl InvariantReport {
    pub fn all(&self) -> bool {
        self.out_bounded
            && self.in_bounded
            && self.net_outflow
            && self.single_direction
            && self.unit_interval
    }
}

#[derive(Debug, Clone)]
pub struct OrientationWeights {
    pub edges: Vec<OrientedEdge>,
    /// Network flow after antiparallel cancellation.
    pub flow: Vec<Rational64>,
    pub checks: InvariantReport,
}

impl OrientationWeights {
    pub fn out_sum(&self, v: usize) -> Rational64 {
        self.edges.iter().filter(|e| e.from == v).map(|e| e.h).sum()
    }

    pub fn in_sum(&self, v: usize) -> Rational64 {
        self.edges.iter().filter(|e| e.to == v).map(|e| e.h).sum()
    }
}

pub fn check_orientation(
    graph: &SimpleGraph,
    dirichlet: &VertexSet,
    c: Rational64,
    edges: &[OrientedEdge],
) -> InvariantReport {
    let n = graph.vertex_count();
    let mut out = vec![Rational64::zero(); n];
    let mut inn = vec![Rational64::zero(); n];
    let mut report = InvariantReport {
        unit_interval: true,
        ..Default::default()
    };
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for e in edges {
        if e.h.is_negative() || e.h > Rational64::one() {
            report.unit_interval = false;
        }
        out[e.from] += e.h;
        inn[e.to] += e.h;
        *seen
            .entry((e.from.min(e.to), e.from.max(e.to)))
            .or_default() += 1;
    }
    let graph_edges = graph.edges();
    report.single_direction =
        seen.len() == graph_edges.len() && graph_edges.iter().all(|k| seen.get(k) == Some(&1));
    let interior = |v: usize| !dirichlet.contains(v);
    let cap_out = Rational64::one() + c;
    report.out_bounded = (0..n).filter(|&v| interior(v)).all(|v| out[v] <= cap_out);
    report.in_bounded = inn.iter().all(|&s| s <= Rational64::one());
    report.net_outflow = (0..n)
        .filter(|&v| interior(v))
        .all(|v| out[v] - inn[v] >= c);
    report
}

/// Cancels antiparallel flow on `y' -> v''` / `v' -> y''` pairs and reads off
/// the orientation. Zero-flow edges are oriented from the lower index.
pub fn extract_orientation(
    net: &DirichletFlowNetwork,
    flow: &MaxFlow,
) -> Result<OrientationWeights> {
    let required = net.saturating_value();
    if flow.value < required {
        return Err(Error::NotSaturated {
            value: flow.value.to_string(),
            required: required.to_string(),
        });
    }
    let mut f = flow.flows.clone();
    let arc = |a: FlowNode, b: FlowNode| net.arc(a, b).expect("arc present by construction");
    let interior = |v: usize| !net.dirichlet.contains(v);
    let edges = net.graph.edges();
    for &(i, j) in &edges {
        if !(interior(i) && interior(j)) {
            continue;
        }
        let ij = arc(FlowNode::Out(i), FlowNode::In(j));
        let ji = arc(FlowNode::Out(j), FlowNode::In(i));
        let common = f[ij].min(f[ji]);
        if common.is_zero() {
            continue;
        }
        for k in [
            ij,
            ji,
            arc(FlowNode::Source, FlowNode::Out(i)),
            arc(FlowNode::In(j), FlowNode::Sink),
            arc(FlowNode::Source, FlowNode::Out(j)),
            arc(FlowNode::In(i), FlowNode::Sink),
        ] {
            f[k] -= common;
        }
    }
    let middle = |a: usize, b: usize| -> Rational64 {
        if interior(a) {
            f[arc(FlowNode::Out(a), FlowNode::In(b))]
        } else {
            Rational64::zero()
        }
    };
    let oriented: Vec<OrientedEdge> = edges
        .iter()
        .map(|&(i, j)| {
            let (fij, fji) = (middle(i, j), middle(j, i));
            debug_assert!(fij.is_zero() || fji.is_zero());
            if fji.is_positive() {
                OrientedEdge {
                    from: j,
                    to: i,
                    h: fji,
                }
            } else {
                OrientedEdge {
                    from: i,
                    to: j,
                    h: fij,
                }
            }
        })
        .collect();
    let checks = check_orientation(&net.graph, &net.dirichlet, net.c, &oriented);
    Ok(OrientationWeights {
        edges: oriented,
        flow: f,
        checks,
    })
}

/// Scalar type for the two quadratic inequalities: `f64` compares with a
/// relative tolerance, `BigRational` exactly.
pub trait FlowScalar:
    Clone
    + PartialOrd
    + Zero
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn from_rational(r: &Rational64) -> Self;
    fn slack(scale: &Self) -> Self;
}

impl FlowScalar for f64 {
    fn from_rational(r: &Rational64) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }

    fn slack(scale: &Self) -> Self {
        1e-12 * scale.abs()
    }
}

impl FlowScalar for BigRational {
    fn from_rational(r: &Rational64) -> Self {
        BigRational::new((*r.numer()).into(), (*r.denom()).into())
    }

    fn slack(_: &Self) -> Self {
        BigRational::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck<T> {
    /// `sum h(i,j)^2 (x_i + x_j)^2`
    pub lhs_square: T,
    /// `(4 + 2c^2) sum x_i^2`
    pub rhs_square: T,
    /// `sum h(i,j) (x_i^2 - x_j^2)`
    pub lhs_telescoping: T,
    /// `c sum x_i^2`
    pub rhs_telescoping: T,
    pub pass: bool,
}

pub fn verify_inequalities<T: FlowScalar>(
    graph: &SimpleGraph,
    dirichlet: &VertexSet,
    c: Rational64,
    h: &OrientationWeights,
    x: &[T],
) -> Result<InequalityCheck<T>> {
    if x.len() != graph.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "vector has {} entries, graph has {} vertices",
            x.len(),
            graph.vertex_count()
        )));
    }
    if let Some(v) = dirichlet.iter().find(|&v| !x[v].is_zero()) {
        return Err(Error::DirichletViolation(v));
    }
    let norm = x
        .iter()
        .fold(T::zero(), |acc, xi| acc + xi.clone() * xi.clone());
    let mut lhs_square = T::zero();
    let mut lhs_telescoping = T::zero();
    for e in &h.edges {
        let w = T::from_rational(&e.h);
        let (xi, xj) = (x[e.from].clone(), x[e.to].clone());
        let sum = xi.clone() + xj.clone();
        lhs_square = lhs_square + w.clone() * w.clone() * sum.clone() * sum;
        lhs_telescoping = lhs_telescoping + w * (xi.clone() * xi - xj.clone() * xj);
    }
    let c_t = T::from_rational(&c);
    let four_plus = T::from_rational(&Rational64::from_integer(4)) + T::from_rational(&(c * c * 2));
    let rhs_square = four_plus * norm.clone();
    let rhs_telescoping = c_t * norm;
    let pass = lhs_square <= rhs_square.clone() + T::slack(&rhs_square)
        && lhs_telescoping.clone() + T::slack(&rhs_telescoping) >= rhs_telescoping;
    Ok(InequalityCheck {
        lhs_square,
        rhs_square,
        lhs_telescoping,
        rhs_telescoping,
        pass,
    })
}

/// `min |N(W) - W| / |W|` over nonempty `W` inside `V - U`, by enumeration.
pub fn certified_c(graph: &SimpleGraph, dirichlet: &VertexSet) -> Result<Rational64> {
    let n = graph.vertex_count();
    let interior: Vec<usize> = (0..n).filter(|&v| !dirichlet.contains(v)).collect();
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if interior.len() > CERTIFIED_C_MAX_INTERIOR {
        return Err(Error::TooLarge {
            what: "|V - U|",
            size: interior.len() as u128,
            cap: CERTIFIED_C_MAX_INTERIOR as u128,
        });
    }
    if n > CERTIFIED_C_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "|V|",
            size: n as u128,
            cap: CERTIFIED_C_MAX_VERTICES as u128,
        });
    }
    let neighbor_masks: Vec<u128> = interior
        .iter()
        .map(|&y| graph.neighbors(y).iter().fold(0u128, |m, &v| m | (1 << v)))
        .collect();
    let member: Vec<u128> = interior.iter().map(|&y| 1u128 << y).collect();

    struct Search<'a> {
        neighbor_masks: &'a [u128],
        member: &'a [u128],
        best: (u32, u32),
    }
    impl Search<'_> {
        fn visit(&mut self, k: usize, body: u128, reach: u128) {
            if k == self.member.len() {
                let size = body.count_ones();
                if size > 0 {
                    let bd = (reach & !body).count_ones();
                    // bd / size < best.0 / best.1
                    if (bd as u64) * (self.best.1 as u64) < (self.best.0 as u64) * (size as u64) {
                        self.best = (bd, size);
                    }
                }
                return;
            }
            self.visit(k + 1, body, reach);
            self.visit(k + 1, body | self.member[k], reach | self.neighbor_masks[k]);
        }
    }
    let mut search = Search {
        neighbor_masks: &neighbor_masks,
        member: &member,
        best: (u32::MAX, 1),
    };
    search.visit(0, 0, 0);
    Ok(Ratio::new(search.best.0 as i64, search.best.1 as i64))
}
