//! Level-set sweeps of the sine tensor profile.
//!
//! The level sets `W_t = {v : f(v)^2 >= t}` for `t > 0` avoid every vertex
//! with a zero coordinate, so each one lives inside a (m-1)^d box and carries
//! no wrapping cycle. The sweep walks the distinct positive levels from the
//! top down, maintaining edge and vertex boundaries incrementally, and keeps
//! the level with the smallest boundary/size ratio.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::spectral::{SpectralConstants, TensorProfile};
use crate::torus_graph::{Power, TorusGraphSpec, VertexSet};

/// Slack added to float bounds before the exact comparison.
pub const BOUND_SLACK: f64 = 1e-12;

/// Squared profile values closer than this (relative) are the same level.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// `e(W, V - W)`
    Edge,
    /// `|N(W) - W|`
    Vertex,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Edge => "edge",
            BoundaryKind::Vertex => "vertex",
        }
    }
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge" => Ok(BoundaryKind::Edge),
            "vertex" => Ok(BoundaryKind::Vertex),
            other => Err(Error::InvalidParameter(format!("unknown kind `{other}`"))),
        }
    }
}

pub fn boundary(spec: &TorusGraphSpec, body: &VertexSet, kind: BoundaryKind) -> Result<usize> {
    spec.check_set(body)?;
    let mut buf = Vec::with_capacity(spec.degree());
    Ok(match kind {
        BoundaryKind::Edge => {
            let mut count = 0;
            for u in body.iter() {
                spec.neighbor_indices(u, &mut buf);
                count += buf.iter().filter(|&&v| !body.contains(v)).count();
            }
            count
        }
        BoundaryKind::Vertex => {
            let mut outside = VertexSet::new(spec.vertex_count());
            for u in body.iter() {
                spec.neighbor_indices(u, &mut buf);
                for &v in &buf {
                    if !body.contains(v) {
                        outside.insert(v);
                    }
                }
            }
            outside.len()
        }
    })
}

/// `{v : f(v)^2 >= threshold}`.
pub fn level_set(profile: &TensorProfile, threshold: f64) -> VertexSet {
    let sq = profile.squared_values();
    VertexSet::from_fn(sq.len(), |v| sq[v] >= threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Level cutoff `t`: the smallest squared value in the level.
    pub threshold: f64,
    pub size: usize,
    pub boundary: usize,
    /// `boundary / size`, exact.
    pub ratio: Ratio<u64>,
}

#[derive(Debug, Clone)]
pub struct CutCertificate {
    pub body: VertexSet,
    pub kind: BoundaryKind,
    pub boundary_size: usize,
    pub ratio: Ratio<u64>,
    /// Theorem-derived bound the certificate is compared against: on the
    /// ratio itself for edge boundaries, on `c / (1 + c)` for vertex ones.
    pub bound: f64,
    pub bound_satisfied: bool,
    pub threshold: f64,
    /// Closed-form Rayleigh quotient of the profile on this graph.
    pub rayleigh: f64,
}

impl CutCertificate {
    /// The quantity compared against `bound`.
    pub fn compared_value(&self) -> Ratio<u64> {
        match self.kind {
            BoundaryKind::Edge => self.ratio,
            BoundaryKind::Vertex => vertex_fraction(self.ratio),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub best: CutCertificate,
    /// One row per distinct positive level, ascending in threshold.
    pub table: Vec<SweepRow>,
}

/// `c / (1 + c)` for `c = b / w`, i.e. `b / (w + b)`.
pub fn vertex_fraction(c: Ratio<u64>) -> Ratio<u64> {
    Ratio::new(*c.numer(), c.numer() + c.denom())
}

/// Exact test `value <= bound + BOUND_SLACK`, with the float converted to the
/// rational it represents.
pub fn ratio_within(value: Ratio<u64>, bound: f64) -> bool {
    let Some(limit) = BigRational::from_float(bound + BOUND_SLACK) else {
        return false;
    };
    let value = BigRational::new(BigInt::from(*value.numer()), BigInt::from(*value.denom()));
    value <= limit
}

/// Bound a level-set certificate of the given kind is expected to meet.
pub fn certificate_bound(spec: &TorusGraphSpec, kind: BoundaryKind) -> (f64, f64) {
    let k = SpectralConstants::new(spec.m(), spec.d()).expect("spec parameters are validated");
    let rayleigh = match spec.power() {
        Power::Inf => k.rayleigh_inf,
        Power::One => k.rayleigh_one,
    };
    let bound = match (kind, spec.power()) {
        (BoundaryKind::Edge, Power::Inf) => k.mu,
        (BoundaryKind::Edge, Power::One) => k.mu_sum_power(),
        // (1/4)(c/(1+c))^2 <= c^2/(4+2c^2) <= R
        (BoundaryKind::Vertex, _) => 2.0 * rayleigh.sqrt(),
    };
    (bound, rayleigh)
}

/// Every positive level with its boundary, ascending in threshold.
pub fn incremental_sweep_ratio_table(
    spec: &TorusGraphSpec,
    profile: &TensorProfile,
    kind: BoundaryKind,
) -> Result<Vec<SweepRow>> {
    if profile.m() != spec.m() || profile.d() != spec.d() {
        return Err(Error::InvalidParameter(
            "profile does not match the graph".into(),
        ));
    }
    let sq = profile.squared_values();
    let mut order: Vec<usize> = (0..sq.len()).filter(|&v| sq[v] > 0.0).collect();
    order.sort_by(|&a, &b| sq[b].total_cmp(&sq[a]).then(a.cmp(&b)));

    let n = spec.vertex_count();
    let mut inside = VertexSet::new(n);
    // vertex case: number of neighbors each vertex has inside W
    let mut inner_neighbors = vec![0u32; if kind == BoundaryKind::Vertex { n } else { 0 }];
    let mut boundary: i64 = 0;
    let mut buf = Vec::with_capacity(spec.degree());
    let mut rows = Vec::new();

    let mut i = 0;
    while i < order.len() {
        let top = sq[order[i]];
        let mut j = i;
        while j < order.len() && sq[order[j]] >= top * (1.0 - TIE_TOLERANCE) {
            j += 1;
        }
        for &v in &order[i..j] {
            spec.neighbor_indices(v, &mut buf);
            match kind {
                BoundaryKind::Edge => {
                    let inner = buf.iter().filter(|&&u| inside.contains(u)).count() as i64;
                    boundary += buf.len() as i64 - 2 * inner;
                }
                BoundaryKind::Vertex => {
                    if inner_neighbors[v] > 0 {
                        boundary -= 1;
                    }
                    for &u in &buf {
                        if inner_neighbors[u] == 0 && !inside.contains(u) {
                            boundary += 1;
                        }
                        inner_neighbors[u] += 1;
                    }
                }
            }
            inside.insert(v);
        }
        let size = inside.len();
        rows.push(SweepRow {
            threshold: sq[order[j - 1]],
            size,
            boundary: boundary as usize,
            ratio: Ratio::new(boundary as u64, size as u64),
        });
        i = j;
    }
    rows.reverse();
    Ok(rows)
}

/// Minimum-ratio level set, ties broken toward the larger set.
pub fn sweep(spec: &TorusGraphSpec, profile: &TensorProfile, kind: BoundaryKind) -> Result<Sweep> {
    let table = incremental_sweep_ratio_table(spec, profile, kind)?;
    let best_row = table
        .iter()
        .min_by(|a, b| a.ratio.cmp(&b.ratio))
        .ok_or(Error::EmptyBody)?
        .clone();
    let (bound, rayleigh) = certificate_bound(spec, kind);
    let body = level_set(profile, best_row.threshold);
    debug_assert_eq!(body.len(), best_row.size);
    let compared = match kind {
        BoundaryKind::Edge => best_row.ratio,
        BoundaryKind::Vertex => vertex_fraction(best_row.ratio),
    };
    debug_assert!(!compared.numer().is_zero() || best_row.boundary == 0);
    let best = CutCertificate {
        body,
        kind,
        boundary_size: best_row.boundary,
        ratio: best_row.ratio,
        bound,
        bound_satisfied: ratio_within(compared, bound),
        threshold: best_row.threshold,
        rayleigh,
    };
    Ok(Sweep { best, table })
}
