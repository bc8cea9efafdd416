//! Implicit discrete tori `(C_m^d)_1` and `(C_m^d)_inf`.
//!
//! Vertices are d-tuples of residues `0..m`, encoded as a linear index in base
//! `m` with coordinate 0 least significant. Residue 0 plays the role of the
//! "last" cycle vertex, so the set of vertices with some zero coordinate is
//! the natural trivial vertex spine and the zero set of the sine profile.
//!
//! Graphs are never materialized: neighbors are generated on demand from a
//! precomputed list of unit displacements.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Largest vertex count any spec may describe.
pub const MAX_VERTICES: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Power {
    /// Sum power: adjacent in exactly one coordinate, equal in the others.
    One,
    /// AND power: adjacent or equal in every coordinate.
    Inf,
}

impl Power {
    pub fn name(self) -> &'static str {
        match self {
            Power::One => "one",
            Power::Inf => "inf",
        }
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Power {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one" | "1" | "sum" => Ok(Power::One),
            "inf" | "infinity" | "and" => Ok(Power::Inf),
            other => Err(Error::InvalidParameter(format!("unknown power `{other}`"))),
        }
    }
}

/// A vertex given by its residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusVertex(pub Vec<usize>);

impl TorusVertex {
    pub fn zero(d: usize) -> Self {
        TorusVertex(vec![0; d])
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for TorusVertex {
    fn from(coords: Vec<usize>) -> Self {
        TorusVertex(coords)
    }
}

/// Per-coordinate step of an edge, each entry in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Displacement(pub Vec<i8>);

impl Displacement {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&s| s == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGraphSpec {
    m: usize,
    d: usize,
    power: Power,
    vertex_count: usize,
    strides: Vec<usize>,
    /// Nonzero unit displacements generating the edges, in lexicographic order.
    steps: Vec<Vec<i8>>,
}

impl TorusGraphSpec {
    pub fn new(m: usize, d: usize, power: Power) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidM(m));
        }
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        let vertex_count = checked_power(m, d).filter(|&n| n <= MAX_VERTICES as u128);
        let Some(vertex_count) = vertex_count else {
            return Err(Error::TooLarge {
                what: "m^d",
                size: checked_power(m, d).unwrap_or(u128::MAX),
                cap: MAX_VERTICES as u128,
            });
        };
        let vertex_count = vertex_count as usize;
        let mut strides = Vec::with_capacity(d);
        let mut stride = 1usize;
        for _ in 0..d {
            strides.push(stride);
            stride *= m;
        }
        let steps = match power {
            Power::One => (0..d)
                .flat_map(|s| {
                    [-1i8, 1].into_iter().map(move |sign| {
                        let mut step = vec![0i8; d];
                        step[s] = sign;
                        step
                    })
                })
                .collect(),
            Power::Inf => {
                let mut steps = Vec::with_capacity(3usize.pow(d as u32) - 1);
                let mut step = vec![-1i8; d];
                loop {
                    if step.iter().any(|&s| s != 0) {
                        steps.push(step.clone());
                    }
                    // odometer over {-1, 0, 1}^d
                    let mut k = 0;
                    while k < d && step[k] == 1 {
                        step[k] = -1;
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                    step[k] += 1;
                }
                steps
            }
        };
        Ok(TorusGraphSpec {
            m,
            d,
            power,
            vertex_count,
            strides,
            steps,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn power(&self) -> Power {
        self.power
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn degree(&self) -> usize {
        self.steps.len()
    }

    /// `m^d * d` for the sum power, `m^d * (3^d - 1) / 2` for the AND power.
    pub fn edge_count(&self) -> usize {
        self.vertex_count * self.degree() / 2
    }

    pub fn require_power(&self, expected: Power) -> Result<()> {
        if self.power == expected {
            Ok(())
        } else {
            Err(Error::WrongPower {
                expected: expected.name(),
                got: self.power.name(),
            })
        }
    }

    pub fn check_vertex(&self, v: &TorusVertex) -> Result<()> {
        if v.0.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: v.0.len(),
            });
        }
        if let Some(&coord) = v.0.iter().find(|&&c| c >= self.m) {
            return Err(Error::CoordinateOutOfRange { coord, m: self.m });
        }
        Ok(())
    }

    pub fn index_of(&self, v: &TorusVertex) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.encode(&v.0))
    }

    pub fn vertex(&self, index: usize) -> TorusVertex {
        debug_assert!(index < self.vertex_count);
        let mut coords = vec![0; self.d];
        self.decode_into(index, &mut coords);
        TorusVertex(coords)
    }

    pub(crate) fn encode(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub(crate) fn decode_into(&self, mut index: usize, coords: &mut [usize]) {
        for c in coords.iter_mut() {
            *c = index % self.m;
            index /= self.m;
        }
    }

    /// Coordinate `axis` of the vertex with the given index.
    pub fn coord(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % self.m
    }

    /// Neighbor indices of `u`, sorted ascending, written into `out`.
    pub fn neighbor_indices(&self, u: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut coords = vec![0; self.d];
        self.decode_into(u, &mut coords);
        for step in &self.steps {
            let mut idx = 0;
            for s in 0..self.d {
                let c = (coords[s] + self.m).wrapping_add_signed(step[s] as isize) % self.m;
                idx += c * self.strides[s];
            }
            out.push(idx);
        }
        out.sort_unstable();
    }

    pub fn neighbors(&self, v: &TorusVertex) -> Result<Vec<TorusVertex>> {
        let u = self.index_of(v)?;
        let mut out = Vec::with_capacity(self.degree());
        self.neighbor_indices(u, &mut out);
        Ok(out.into_iter().map(|i| self.vertex(i)).collect())
    }

    /// Calls `f(u, v)` once per edge with `u < v`, in lexicographic order.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize)) {
        let mut buf = Vec::with_capacity(self.degree());
        for u in 0..self.vertex_count {
            self.neighbor_indices(u, &mut buf);
            for &v in buf.iter().filter(|&&v| v > u) {
                f(u, v);
            }
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        self.for_each_edge(|u, v| out.push((u, v)));
        out
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.step_between(u, v).is_some()
    }

    /// Unique {-1,0,1} representative of `coord_v - coord_u (mod m)`.
    fn coord_step(&self, cu: usize, cv: usize) -> Option<i8> {
        let diff = (cv + self.m - cu) % self.m;
        if diff == 0 {
            Some(0)
        } else if diff == 1 {
            Some(1)
        } else if diff == self.m - 1 {
            Some(-1)
        } else {
            None
        }
    }

    /// Writes the displacement of edge `u -> v` into `out` (length `d`);
    /// returns `None` when `(u, v)` is not an edge.
    pub(crate) fn step_into(&self, u: usize, v: usize, out: &mut [i64]) -> Option<()> {
        let mut nonzero = 0;
        for (s, slot) in out.iter_mut().enumerate().take(self.d) {
            let step = self.coord_step(self.coord(u, s), self.coord(v, s))?;
            if step != 0 {
                nonzero += 1;
            }
            *slot = step as i64;
        }
        let ok = match self.power {
            Power::One => nonzero == 1,
            Power::Inf => nonzero >= 1,
        };
        ok.then_some(())
    }

    fn step_between(&self, u: usize, v: usize) -> Option<Displacement> {
        let mut buf = vec![0i64; self.d];
        self.step_into(u, v, &mut buf)?;
        Some(Displacement(buf.into_iter().map(|s| s as i8).collect()))
    }

    pub fn displacement(&self, u: &TorusVertex, v: &TorusVertex) -> Result<Displacement> {
        let (ui, vi) = (self.index_of(u)?, self.index_of(v)?);
        self.step_between(ui, vi)
            .ok_or(Error::NotAnEdge { u: ui, v: vi })
    }

    /// Index of `u + shift` (coordinatewise mod m).
    pub fn translate(&self, u: usize, shift: &[usize]) -> usize {
        let mut idx = 0;
        let mut rest = u;
        for (&delta, &stride) in shift.iter().zip(&self.strides) {
            let c = rest % self.m;
            rest /= self.m;
            idx += ((c + delta) % self.m) * stride;
        }
        idx
    }

    /// Coordinatewise inverse `-v (mod m)`.
    pub fn negate(&self, v: &TorusVertex) -> TorusVertex {
        TorusVertex(
            v.0.iter()
                .map(|&c| (self.m - c % self.m) % self.m)
                .collect(),
        )
    }

    /// `{v + w : w in W}`.
    pub fn shift_set(&self, set: &VertexSet, v: &TorusVertex) -> Result<VertexSet> {
        self.check_vertex(v)?;
        self.check_set(set)?;
        let mut out = VertexSet::new(self.vertex_count);
        for w in set.iter() {
            out.insert(self.translate(w, &v.0));
        }
        Ok(out)
    }

    pub fn check_set(&self, set: &VertexSet) -> Result<()> {
        if set.universe() != self.vertex_count {
            return Err(Error::InvalidParameter(format!(
                "vertex set over {} vertices used with a graph on {}",
                set.universe(),
                self.vertex_count
            )));
        }
        Ok(())
    }

    /// Vertices with at least one zero coordinate.
    pub fn zero_label_set(&self) -> VertexSet {
        VertexSet::from_fn(self.vertex_count, |v| {
            (0..self.d).any(|s| self.coord(v, s) == 0)
        })
    }
}

fn checked_power(m: usize, d: usize) -> Option<u128> {
    let exp = u32::try_from(d).ok()?;
    (m as u128).checked_pow(exp)
}

/// Dense membership set over `0..universe` with a cached cardinality.
#[derive(Clone, PartialEq, Eq)]
pub struct VertexSet {
    bits: FixedBitSet,
    len: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            bits: FixedBitSet::with_capacity(universe),
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        VertexSet {
            bits,
            len: universe,
        }
    }

    pub fn from_fn(universe: usize, mut member: impl FnMut(usize) -> bool) -> Self {
        let mut set = VertexSet::new(universe);
        for v in 0..universe {
            if member(v) {
                set.insert(v);
            }
        }
        set
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = VertexSet::new(universe);
        for i in indices {
            if i >= universe {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: universe,
                });
            }
            set.insert(i);
        }
        Ok(set)
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.universe()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    /// Returns true when `v` was newly added.
    pub fn insert(&mut self, v: usize) -> bool {
        let was = self.bits.put(v);
        if !was {
            self.len += 1;
        }
        !was
    }

    pub fn remove(&mut self, v: usize) -> bool {
        let was = self.bits.contains(v);
        if was {
            self.bits.set(v, false);
            self.len -= 1;
        }
        was
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
        self.len = self.bits.count_ones(..);
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet {
            len: self.universe() - self.len,
            bits,
        }
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
