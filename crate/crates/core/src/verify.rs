//! Exact spine verification.
//!
//! A closed walk is nontrivial when its total displacement `m * w` has a
//! nonzero winding vector `w`. The lifting verifier lifts every residual
//! component into `Z^d` along a BFS tree; a non-tree edge whose endpoints'
//! lifts disagree closes a nontrivial cycle, and if none disagree every
//! closed walk has zero winding.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::torus_graph::{Power, TorusGraphSpec, VertexSet};

/// Largest residual vertex count handled by [`cycle_enum_oracle`].
pub const CYCLE_ENUM_MAX_VERTICES: usize = 12;
/// Candidate budget for [`brute_force_min_spine`].
pub const BRUTE_FORCE_MAX_CANDIDATES: u128 = 10_000_000;

/// Set of undirected edges stored as `(min, max)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSet(BTreeSet<(usize, usize)>);

impl EdgeSet {
    pub fn new() -> Self {
        EdgeSet::default()
    }

    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        self.0.insert((u.min(v), u.max(v)))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.0.contains(&(u.min(v), u.max(v)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut set = EdgeSet::new();
        for (u, v) in iter {
            set.insert(u, v);
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindingWitness {
    /// Closed vertex sequence; the first vertex is repeated at the end.
    pub cycle: Vec<usize>,
    pub winding: Vec<i64>,
}

#[derive(Debug, Clone, Copy)]
pub enum SpineCandidate<'a> {
    Edges(&'a EdgeSet),
    Vertices(&'a VertexSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpineCheck {
    pub is_spine: bool,
    pub witness: Option<WindingWitness>,
}

fn removed_vertex(removed: Option<&VertexSet>, v: usize) -> bool {
    removed.is_some_and(|r| r.contains(v))
}

/// Lifting verifier on the graph with the given edges and vertices removed.
pub fn has_nontrivial_cycle(
    spec: &TorusGraphSpec,
    removed_edges: &EdgeSet,
    removed_vertices: &VertexSet,
) -> Option<WindingWitness> {
    lift(spec, Some(removed_edges), Some(removed_vertices))
}

fn lift(
    spec: &TorusGraphSpec,
    removed_edges: Option<&EdgeSet>,
    removed_vertices: Option<&VertexSet>,
) -> Option<WindingWitness> {
    let (n, d) = (spec.vertex_count(), spec.d());
    let mut potential = vec![0i64; n * d];
    let mut visited = vec![false; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut step = vec![0i64; d];
    let mut buf = Vec::with_capacity(spec.degree());
    let mut queue = VecDeque::new();

    for root in 0..n {
        if visited[root] || removed_vertex(removed_vertices, root) {
            continue;
        }
        visited[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            spec.neighbor_indices(u, &mut buf);
            for &v in &buf {
                if removed_vertex(removed_vertices, v)
                    || removed_edges.is_some_and(|e| e.contains(u, v))
                {
                    continue;
                }
                spec.step_into(u, v, &mut step)
                    .expect("neighbors are adjacent");
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    for s in 0..d {
                        potential[v * d + s] = potential[u * d + s] + step[s];
                    }
                    queue.push_back(v);
                    continue;
                }
                let consistent =
                    (0..d).all(|s| potential[u * d + s] + step[s] == potential[v * d + s]);
                if !consistent {
                    let winding = (0..d)
                        .map(|s| {
                            let gap = potential[u * d + s] + step[s] - potential[v * d + s];
                            debug_assert_eq!(gap % spec.m() as i64, 0);
                            gap / spec.m() as i64
                        })
                        .collect();
                    let cycle = tree_cycle(&parent, &depth, u, v);
                    return Some(WindingWitness { cycle, winding });
                }
            }
        }
    }
    None
}

/// `lca -> ... -> u -> v -> ... -> lca` along BFS-tree paths.
fn tree_cycle(parent: &[usize], depth: &[usize], u: usize, v: usize) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let mut up_from_u = vec![a];
    let mut up_from_v = vec![b];
    while depth[a] > depth[b] {
        a = parent[a];
        up_from_u.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b];
        up_from_v.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        up_from_u.push(a);
        up_from_v.push(b);
    }
    // both lists now end at the common ancestor
    let mut cycle: Vec<usize> = up_from_u.into_iter().rev().collect();
    cycle.extend(up_from_v);
    cycle
}

/// Independent check of a witness: consecutive pairs are residual edges and
/// the displacement sum is `m * winding` with `winding != 0`.
pub fn witness_is_valid(
    spec: &TorusGraphSpec,
    removed_edges: &EdgeSet,
    removed_vertices: &VertexSet,
    witness: &WindingWitness,
) -> bool {
    let cycle = &witness.cycle;
    if cycle.len() < 4 || cycle.first() != cycle.last() || witness.winding.len() != spec.d() {
        return false;
    }
    if witness.winding.iter().all(|&w| w == 0) {
        return false;
    }
    let d = spec.d();
    let mut total = vec![0i64; d];
    let mut step = vec![0i64; d];
    for pair in cycle.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        if removed_vertices.contains(u) || removed_edges.contains(u, v) {
            return false;
        }
        if spec.step_into(u, v, &mut step).is_none() {
            return false;
        }
        for s in 0..d {
            total[s] += step[s];
        }
    }
    (0..d).all(|s| total[s] == spec.m() as i64 * witness.winding[s])
}

pub fn is_spine(spec: &TorusGraphSpec, candidate: SpineCandidate<'_>) -> SpineCheck {
    let witness = match candidate {
        SpineCandidate::Edges(edges) => lift(spec, Some(edges), None),
        SpineCandidate::Vertices(vertices) => lift(spec, None, Some(vertices)),
    };
    SpineCheck {
        is_spine: witness.is_none(),
        witness,
    }
}

/// Nontrivial cycle inside the subgraph induced by `body`, if any.
pub fn induced_nontrivial_cycle(spec: &TorusGraphSpec, body: &VertexSet) -> Option<WindingWitness> {
    lift(spec, None, Some(&body.complement()))
}

/// Enumerates every simple cycle of the residual graph (each from its
/// smallest vertex) and reports whether one has nonzero winding.
pub fn cycle_enum_oracle(
    spec: &TorusGraphSpec,
    removed_edges: &EdgeSet,
    removed_vertices: &VertexSet,
) -> Result<bool> {
    let alive: Vec<usize> = (0..spec.vertex_count())
        .filter(|&v| !removed_vertices.contains(v))
        .collect();
    if alive.len() > CYCLE_ENUM_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "residual vertex count",
            size: alive.len() as u128,
            cap: CYCLE_ENUM_MAX_VERTICES as u128,
        });
    }
    let d = spec.d();
    let mut adj: HashMap<usize, Vec<(usize, Vec<i64>)>> = HashMap::new();
    let mut buf = Vec::new();
    for &u in &alive {
        spec.neighbor_indices(u, &mut buf);
        let list = buf
            .iter()
            .filter(|&&v| !removed_vertices.contains(v) && !removed_edges.contains(u, v))
            .map(|&v| {
                let mut step = vec![0i64; d];
                spec.step_into(u, v, &mut step)
                    .expect("neighbors are adjacent");
                (v, step)
            })
            .collect();
        adj.insert(u, list);
    }

    struct Dfs<'a> {
        adj: &'a HashMap<usize, Vec<(usize, Vec<i64>)>>,
        start: usize,
        on_path: Vec<usize>,
        sum: Vec<i64>,
    }
    impl Dfs<'_> {
        fn closes_nontrivial(&mut self, u: usize) -> bool {
            for (v, step) in &self.adj[&u] {
                let v = *v;
                if v == self.start && self.on_path.len() >= 3 {
                    if self.sum.iter().zip(step).any(|(s, t)| s + t != 0) {
                        return true;
                    }
                } else if v > self.start && !self.on_path.contains(&v) {
                    self.on_path.push(v);
                    self.sum.iter_mut().zip(step).for_each(|(s, t)| *s += t);
                    let found = self.closes_nontrivial(v);
                    self.sum.iter_mut().zip(step).for_each(|(s, t)| *s -= t);
                    self.on_path.pop();
                    if found {
                        return true;
                    }
                }
            }
            false
        }
    }
    for &start in &alive {
        let mut dfs = Dfs {
            adj: &adj,
            start,
            on_path: vec![start],
            sum: vec![0; d],
        };
        if dfs.closes_nontrivial(start) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Number of pairwise edge-disjoint nontrivial axis cycles, a lower bound on
/// any edge spine; for vertex spines the `m^(d-1)` axis-0 cycles are vertex
/// disjoint.
pub fn disjoint_cycle_lower_bound(spec: &TorusGraphSpec, kind: SpineKind) -> usize {
    let layer = spec.vertex_count() / spec.m();
    match kind {
        SpineKind::Edge => spec.d() * layer,
        SpineKind::Vertex => layer,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpineKind {
    Edge,
    Vertex,
}

impl SpineKind {
    pub fn name(self) -> &'static str {
        match self {
            SpineKind::Edge => "edge",
            SpineKind::Vertex => "vertex",
        }
    }
}

impl std::str::FromStr for SpineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge" => Ok(SpineKind::Edge),
            "vertex" => Ok(SpineKind::Vertex),
            other => Err(Error::InvalidParameter(format!("unknown kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    /// Start the search at [`disjoint_cycle_lower_bound`] instead of 0.
    pub prune_lower_bound: bool,
    pub max_candidates: u128,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            prune_lower_bound: true,
            max_candidates: BRUTE_FORCE_MAX_CANDIDATES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub size: usize,
    /// First minimal spine found, as edge pairs or vertex indices.
    pub example: Vec<(usize, usize)>,
    pub candidates_checked: u128,
}

pub fn brute_force_min_spine(spec: &TorusGraphSpec, kind: SpineKind) -> Result<usize> {
    brute_force_min_spine_with(spec, kind, BruteForceOptions::default()).map(|r| r.size)
}

/// Exhaustive search over candidate sets by increasing size.
pub fn brute_force_min_spine_with(
    spec: &TorusGraphSpec,
    kind: SpineKind,
    opts: BruteForceOptions,
) -> Result<BruteForceResult> {
    let items: Vec<(usize, usize)> = match kind {
        SpineKind::Edge => spec.edges(),
        SpineKind::Vertex => (0..spec.vertex_count()).map(|v| (v, v)).collect(),
    };
    let n = items.len();
    let start = if opts.prune_lower_bound {
        disjoint_cycle_lower_bound(spec, kind).min(n)
    } else {
        0
    };
    let mut checked: u128 = 0;
    for k in start..=n {
        let count = binomial(n, k);
        if checked.saturating_add(count) > opts.max_candidates {
            return Err(Error::TooLarge {
                what: "brute-force candidates",
                size: checked.saturating_add(count),
                cap: opts.max_candidates,
            });
        }
        let mut pick: Vec<usize> = (0..k).collect();
        loop {
            checked += 1;
            let spine = match kind {
                SpineKind::Edge => {
                    let set: EdgeSet = pick.iter().map(|&i| items[i]).collect();
                    is_spine(spec, SpineCandidate::Edges(&set)).is_spine
                }
                SpineKind::Vertex => {
                    let set = VertexSet::from_indices(spec.vertex_count(), pick.iter().copied())?;
                    is_spine(spec, SpineCandidate::Vertices(&set)).is_spine
                }
            };
            if spine {
                return Ok(BruteForceResult {
                    size: k,
                    example: pick.iter().map(|&i| items[i]).collect(),
                    candidates_checked: checked,
                });
            }
            if !next_combination(&mut pick, n) {
                break;
            }
        }
    }
    unreachable!("removing every edge or vertex leaves no cycle")
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] < n - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct CycleCover {
    /// Closed vertex sequences, one per (axis, base point).
    pub cycles: Vec<Vec<usize>>,
    pub windings: Vec<Vec<i64>>,
    pub partitions_edges: bool,
    pub all_nontrivial: bool,
}

impl CycleCover {
    pub fn passed(&self) -> bool {
        self.partitions_edges && self.all_nontrivial
    }
}

/// Builds the `d m^(d-1)` axis-parallel cycles of the sum power and checks
/// that they partition the edge set and each winds once around its axis.
pub fn edge_disjoint_cycle_cover_check(spec: &TorusGraphSpec) -> Result<CycleCover> {
    spec.require_power(Power::One)?;
    let (m, d) = (spec.m(), spec.d());
    let mut cycles = Vec::new();
    let mut windings = Vec::new();
    let mut used: HashMap<(usize, usize), usize> = HashMap::new();
    let mut all_nontrivial = true;
    let mut step = vec![0i64; d];
    for axis in 0..d {
        let mut shift = vec![0; d];
        shift[axis] = 1;
        for base in (0..spec.vertex_count()).filter(|&v| spec.coord(v, axis) == 0) {
            let mut cycle = Vec::with_capacity(m + 1);
            let mut v = base;
            for _ in 0..m {
                cycle.push(v);
                v = spec.translate(v, &shift);
            }
            cycle.push(base);
            let mut total = vec![0i64; d];
            for pair in cycle.windows(2) {
                *used
                    .entry((pair[0].min(pair[1]), pair[0].max(pair[1])))
                    .or_default() += 1;
                if spec.step_into(pair[0], pair[1], &mut step).is_none() {
                    all_nontrivial = false;
                    continue;
                }
                total.iter_mut().zip(&step).for_each(|(t, s)| *t += s);
            }
            let winding: Vec<i64> = total.iter().map(|t| t / m as i64).collect();
            let unit = (0..d).all(|s| winding[s] == i64::from(s == axis));
            all_nontrivial &= unit && total.iter().all(|t| t % m as i64 == 0);
            windings.push(winding);
            cycles.push(cycle);
        }
    }
    let edges = spec.edges();
    let partitions_edges = used.len() == edges.len()
        && edges.iter().all(|e| used.get(e) == Some(&1))
        && cycles.len() == d * spec.vertex_count() / m;
    Ok(CycleCover {
        cycles,
        windings,
        partitions_edges,
        all_nontrivial,
    })
}
