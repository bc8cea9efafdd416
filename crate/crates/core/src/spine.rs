//! Random-shift spine constructions and the trivial baselines.
//!
//! Both constructions translate a cycle-free body `W` by uniformly random
//! vectors `v_1, v_2, ...` until the translates cover the torus. The edge
//! spine collects, for each `W_i = v_i + W`, the edges leaving `W_i` from
//! vertices first covered by `W_i`. The vertex spine collects the part of
//! `N(W_i) - W_i` not yet covered by earlier closed neighborhoods.
//!
//! Shifts are drawn from ChaCha8 seeded with `seed_from_u64`; residues come
//! from `gen_range`, which rejects rather than reducing modulo `m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::mean_stderr;
use crate::torus_graph::{Power, TorusGraphSpec, TorusVertex, VertexSet};
use crate::verify::{is_spine, EdgeSet, SpineCandidate};

/// Generator identity recorded in reports.
pub const PRNG: &str = "ChaCha8Rng (rand_chacha 0.3) via SeedableRng::seed_from_u64";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftTrace {
    /// `None` when the shifts were supplied by the caller.
    pub seed: Option<u64>,
    pub shifts: Vec<TorusVertex>,
    /// `|E_i|` or `|B_i|` for each shift.
    pub per_shift_contribution: Vec<usize>,
    pub shifts_used: usize,
}

impl ShiftTrace {
    fn empty() -> Self {
        ShiftTrace {
            seed: None,
            shifts: Vec::new(),
            per_shift_contribution: Vec::new(),
            shifts_used: 0,
        }
    }

    pub fn contribution_sum(&self) -> usize {
        self.per_shift_contribution.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct EdgeSpine {
    pub edges: EdgeSet,
    pub trace: ShiftTrace,
}

impl EdgeSpine {
    /// `|union E_i|`
    pub fn total_size(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone)]
pub struct VertexSpine {
    pub vertices: VertexSet,
    pub trace: ShiftTrace,
}

impl VertexSpine {
    pub fn total_size(&self) -> usize {
        self.vertices.len()
    }
}

/// Uniform shift vectors in `Z_m^d`.
#[derive(Debug, Clone)]
pub struct ShiftSampler {
    rng: ChaCha8Rng,
    m: usize,
    d: usize,
}

impl ShiftSampler {
    pub fn new(spec: &TorusGraphSpec, seed: u64) -> Self {
        ShiftSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            m: spec.m(),
            d: spec.d(),
        }
    }

    pub fn next_shift(&mut self) -> Vec<usize> {
        (0..self.d).map(|_| self.rng.gen_range(0..self.m)).collect()
    }
}

/// `ceil(64 * m^d / |W| * ln(m^d + 1))`; the construction gives up after this
/// many shifts.
pub fn shift_cap(vertex_count: usize, body_size: usize) -> usize {
    let n = vertex_count as f64;
    (64.0 * n / body_size as f64 * (n + 1.0).ln()).ceil() as usize
}

fn check_body(spec: &TorusGraphSpec, body: &VertexSet) -> Result<()> {
    spec.check_set(body)?;
    if body.is_empty() {
        return Err(Error::EmptyBody);
    }
    Ok(())
}

/// Edge construction with a caller-supplied shift sequence. Fails with
/// `CoverageFailed` if the sequence ends (or the cap is hit) before the
/// translates cover every vertex.
pub fn build_edge_spine_from_shifts(
    spec: &TorusGraphSpec,
    body: &VertexSet,
    mut shifts: impl FnMut() -> Option<Vec<usize>>,
) -> Result<EdgeSpine> {
    check_body(spec, body)?;
    let n = spec.vertex_count();
    let cap = shift_cap(n, body.len());
    let mut covered = VertexSet::new(n);
    let mut edges = EdgeSet::new();
    let mut trace = ShiftTrace::empty();
    let mut buf = Vec::with_capacity(spec.degree());
    while !covered.is_full() {
        if trace.shifts.len() >= cap {
            return Err(Error::CoverageFailed { cap });
        }
        let shift = shifts().ok_or(Error::CoverageFailed {
            cap: trace.shifts.len(),
        })?;
        let back = spec.negate(&TorusVertex(shift.clone()));
        let in_translate = |x: usize| body.contains(spec.translate(x, &back.0));
        let mut contribution = 0;
        for w in body.iter() {
            let x = spec.translate(w, &shift);
            if covered.contains(x) {
                continue;
            }
            spec.neighbor_indices(x, &mut buf);
            for &y in buf.iter().filter(|&&y| !in_translate(y)) {
                edges.insert(x, y);
                contribution += 1;
            }
        }
        for w in body.iter() {
            covered.insert(spec.translate(w, &shift));
        }
        trace.shifts.push(TorusVertex(shift));
        trace.per_shift_contribution.push(contribution);
    }
    trace.shifts_used = trace.shifts.len();
    Ok(EdgeSpine { edges, trace })
}

pub fn build_edge_spine(spec: &TorusGraphSpec, body: &VertexSet, seed: u64) -> Result<EdgeSpine> {
    let mut sampler = ShiftSampler::new(spec, seed);
    let mut spine = build_edge_spine_from_shifts(spec, body, || Some(sampler.next_shift()))?;
    spine.trace.seed = Some(seed);
    Ok(spine)
}

/// Vertex construction with a caller-supplied shift sequence.
pub fn build_vertex_spine_from_shifts(
    spec: &TorusGraphSpec,
    body: &VertexSet,
    mut shifts: impl FnMut() -> Option<Vec<usize>>,
) -> Result<VertexSpine> {
    check_body(spec, body)?;
    let n = spec.vertex_count();
    let cap = shift_cap(n, body.len());
    let mut covered = VertexSet::new(n);
    let mut spine = VertexSet::new(n);
    let mut trace = ShiftTrace::empty();
    let mut buf = Vec::with_capacity(spec.degree());
    // epoch marks dedupe N(W_i) - W_i without clearing a set per shift
    let mut mark = vec![0u32; n];
    let mut epoch = 0u32;
    let mut outer = Vec::new();
    while !covered.is_full() {
        if trace.shifts.len() >= cap {
            return Err(Error::CoverageFailed { cap });
        }
        let shift = shifts().ok_or(Error::CoverageFailed {
            cap: trace.shifts.len(),
        })?;
        epoch += 1;
        let back = spec.negate(&TorusVertex(shift.clone()));
        let in_translate = |x: usize| body.contains(spec.translate(x, &back.0));
        outer.clear();
        for w in body.iter() {
            let x = spec.translate(w, &shift);
            spec.neighbor_indices(x, &mut buf);
            for &y in &buf {
                if mark[y] != epoch && !in_translate(y) {
                    mark[y] = epoch;
                    outer.push(y);
                }
            }
        }
        let mut contribution = 0;
        for &y in &outer {
            if !covered.contains(y) {
                let fresh = spine.insert(y);
                assert!(fresh, "B_i sets must be pairwise disjoint");
                contribution += 1;
            }
        }
        for w in body.iter() {
            covered.insert(spec.translate(w, &shift));
        }
        for &y in &outer {
            covered.insert(y);
        }
        trace.shifts.push(TorusVertex(shift));
        trace.per_shift_contribution.push(contribution);
    }
    trace.shifts_used = trace.shifts.len();
    Ok(VertexSpine {
        vertices: spine,
        trace,
    })
}

pub fn build_vertex_spine(
    spec: &TorusGraphSpec,
    body: &VertexSet,
    seed: u64,
) -> Result<VertexSpine> {
    let mut sampler = ShiftSampler::new(spec, seed);
    let mut spine = build_vertex_spine_from_shifts(spec, body, || Some(sampler.next_shift()))?;
    spine.trace.seed = Some(seed);
    Ok(spine)
}

/// Edges crossing from residue `m - 1` to residue 0 along each axis.
pub fn trivial_edge_spine(spec: &TorusGraphSpec) -> Result<EdgeSpine> {
    spec.require_power(Power::One)?;
    let mut edges = EdgeSet::new();
    for axis in 0..spec.d() {
        let mut unit = vec![0; spec.d()];
        unit[axis] = 1;
        for v in (0..spec.vertex_count()).filter(|&v| spec.coord(v, axis) == spec.m() - 1) {
            edges.insert(v, spec.translate(v, &unit));
        }
    }
    Ok(EdgeSpine {
        edges,
        trace: ShiftTrace::empty(),
    })
}

/// Vertices with some zero coordinate.
pub fn trivial_vertex_spine(spec: &TorusGraphSpec) -> Result<VertexSpine> {
    spec.require_power(Power::Inf)?;
    Ok(VertexSpine {
        vertices: spec.zero_label_set(),
        trace: ShiftTrace::empty(),
    })
}

/// Common view of both spine kinds for Monte Carlo aggregation.
pub trait BuiltSpine {
    fn total_size(&self) -> usize;
    fn trace(&self) -> &ShiftTrace;
    fn verify(&self, spec: &TorusGraphSpec) -> bool;
}

impl BuiltSpine for EdgeSpine {
    fn total_size(&self) -> usize {
        self.edges.len()
    }

    fn trace(&self) -> &ShiftTrace {
        &self.trace
    }

    fn verify(&self, spec: &TorusGraphSpec) -> bool {
        is_spine(spec, SpineCandidate::Edges(&self.edges)).is_spine
    }
}

impl BuiltSpine for VertexSpine {
    fn total_size(&self) -> usize {
        self.vertices.len()
    }

    fn trace(&self) -> &ShiftTrace {
        &self.trace
    }

    fn verify(&self, spec: &TorusGraphSpec) -> bool {
        is_spine(spec, SpineCandidate::Vertices(&self.vertices)).is_spine
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub runs: usize,
    pub base_seed: u64,
    /// Mean of `|union E_i|` (edge) or `|union B_i|` (vertex).
    pub mean_size: f64,
    pub stderr: f64,
    /// Mean of `sum_i |E_i|` (equal to `mean_size` for vertex spines).
    pub mean_contribution_sum: f64,
    pub contribution_stderr: f64,
    pub mean_shifts: f64,
    pub bound: f64,
    pub per_run_sizes: Vec<usize>,
    pub per_run_contribution_sums: Vec<usize>,
    pub per_run_shifts: Vec<usize>,
}

/// Runs `build` for seeds `base_seed .. base_seed + runs`, verifies every
/// spine, and aggregates in seed order. `jobs > 1` runs seeds in parallel;
/// the result does not depend on it.
pub fn monte_carlo<S, F>(
    spec: &TorusGraphSpec,
    runs: usize,
    base_seed: u64,
    bound: f64,
    jobs: usize,
    build: F,
) -> Result<RunStats>
where
    S: BuiltSpine + Send,
    F: Fn(u64) -> Result<S> + Sync,
{
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let one = |i: usize| -> Result<(usize, usize, usize)> {
        let seed = base_seed.wrapping_add(i as u64);
        let spine = build(seed)?;
        if !spine.verify(spec) {
            return Err(Error::VerificationFailed { seed });
        }
        let t = spine.trace();
        Ok((spine.total_size(), t.contribution_sum(), t.shifts_used))
    };
    let results: Vec<Result<(usize, usize, usize)>> = if jobs <= 1 {
        (0..runs).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..runs).into_par_iter().map(one).collect())
    };
    let results: Vec<(usize, usize, usize)> = results.into_iter().collect::<Result<_>>()?;
    let sizes: Vec<usize> = results.iter().map(|r| r.0).collect();
    let sums: Vec<usize> = results.iter().map(|r| r.1).collect();
    let shifts: Vec<usize> = results.iter().map(|r| r.2).collect();
    let as_f = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let (mean_size, stderr) = mean_stderr(&as_f(&sizes));
    let (mean_contribution_sum, contribution_stderr) = mean_stderr(&as_f(&sums));
    let (mean_shifts, _) = mean_stderr(&as_f(&shifts));
    Ok(RunStats {
        runs,
        base_seed,
        mean_size,
        stderr,
        mean_contribution_sum,
        contribution_stderr,
        mean_shifts,
        bound,
        per_run_sizes: sizes,
        per_run_contribution_sums: sums,
        per_run_shifts: shifts,
    })
}
