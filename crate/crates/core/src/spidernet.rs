//! Canonical, rotationally symmetric spidernets `S(a,b,c)` truncated at a
//! finite radius.
//!
//! A spidernet is stratified by graph distance from the root `o`. The root has
//! `a` children; every other vertex has one parent, `c` children and
//! `b - c - 1` neighbours inside its own stratum, so `|V_j| = a·c^{j-1}`.
//!
//! The family does not pin down a unique graph. The instance built here is:
//!
//! * the parent of `(j+1, i)` is `(j, ⌊i/c⌋)` (the root for `j = 0`);
//! * stratum `j ≥ 1` carries a circulant: `(j,i) ~ (j, i±k mod |V_j|)` for
//!   `k = 1..⌊d/2⌋` with `d = b-c-1`, plus the antipodal edge
//!   `(j, i + |V_j|/2)` when `d` is odd.
//!
//! Vertices are numbered stratum by stratum. Inside a vertex block the
//! half-edges are ordered backward, intra (ascending), forward (ascending).

use std::fmt;
use std::io::{self, Write};
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default cap on the number of half-edges a builder will allocate.
pub const DEFAULT_HALF_EDGE_BUDGET: usize = 1 << 27;

/// The `(a, b, c)` triple of a spidernet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SpidernetParams {
    a: usize,
    b: usize,
    c: usize,
}

impl SpidernetParams {
    /// Validates `a ≥ 1`, `b ≥ 2`, `1 ≤ c ≤ b-1`.
    pub fn new(a: usize, b: usize, c: usize) -> Result<Self> {
        if a < 1 {
            return Err(Error::InvalidParams(format!("a = {a} must be at least 1")));
        }
        if b < 2 {
            return Err(Error::InvalidParams(format!("b = {b} must be at least 2")));
        }
        if c < 1 || c > b - 1 {
            return Err(Error::InvalidParams(format!(
                "c = {c} must satisfy 1 <= c <= b-1 = {}",
                b - 1
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Number of neighbours a non-root vertex has inside its own stratum.
    pub fn intra_degree(&self) -> usize {
        self.b - self.c - 1
    }

    pub fn is_tree(&self) -> bool {
        self.intra_degree() == 0
    }

    /// `|V_j|`, or `None` on overflow.
    pub fn stratum_size(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return Some(1);
        }
        let exp = u32::try_from(j - 1).ok()?;
        self.c.checked_pow(exp)?.checked_mul(self.a)
    }
}

impl fmt::Display for SpidernetParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S({},{},{})", self.a, self.b, self.c)
    }
}

/// A vertex named by its stratum and its position inside the stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub stratum: usize,
    pub index: usize,
}

impl Vertex {
    pub const ROOT: Vertex = Vertex { stratum: 0, index: 0 };

    pub fn new(stratum: usize, index: usize) -> Self {
        Self { stratum, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.stratum, self.index)
    }
}

/// Where a neighbour sits relative to a vertex: one stratum out, one stratum
/// in, or the same stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
    Intra,
}

/// Dense numbering of the ordered pairs `(u, v)` with `u ~ v`.
///
/// Half-edges leaving the same vertex occupy one contiguous block, so the
/// coin can be applied block by block.
#[derive(Clone, Debug)]
pub struct HalfEdgeIndex {
    offsets: Vec<usize>,
    heads: Vec<u32>,
    reverse: Vec<u32>,
}

impl HalfEdgeIndex {
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Number of vertices covered by the index.
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// The half-edges `(u, ·)` leaving vertex id `u`.
    pub fn block(&self, u: usize) -> Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn head(&self, e: usize) -> usize {
        self.heads[e] as usize
    }

    pub fn tail(&self, e: usize) -> usize {
        // offsets is non-decreasing; the tail is the last vertex whose block starts at or before e
        self.offsets.partition_point(|&o| o <= e) - 1
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.tail(e), self.head(e))
    }

    /// Index of `(v, u)` given the index of `(u, v)`.
    pub fn reverse(&self, e: usize) -> usize {
        self.reverse[e] as usize
    }

    pub fn reverse_permutation(&self) -> &[u32] {
        &self.reverse
    }

    pub fn index_of(&self, u: usize, v: usize) -> Option<usize> {
        if u + 1 >= self.offsets.len() {
            return None;
        }
        self.block(u).find(|&e| self.heads[e] as usize == v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }
}

/// A radius-`R` truncation of the canonical spidernet.
///
/// Vertices in strata `< R` carry their full neighbourhood; stratum `R`
/// vertices only keep their backward and intra-stratum edges.
#[derive(Clone, Debug)]
pub struct Spidernet {
    params: SpidernetParams,
    radius: usize,
    strata: Vec<usize>,
    stratum_offsets: Vec<usize>,
    half_edges: HalfEdgeIndex,
}

/// Builds the canonical spidernet of the given radius with the default
/// half-edge budget.
pub fn build_spidernet(params: SpidernetParams, radius: usize) -> Result<Spidernet> {
    Spidernet::build(params, radius)
}

impl Spidernet {
    pub fn build(params: SpidernetParams, radius: usize) -> Result<Self> {
        Self::build_with_budget(params, radius, DEFAULT_HALF_EDGE_BUDGET)
    }

    pub fn build_with_budget(params: SpidernetParams, radius: usize, budget: usize) -> Result<Self> {
        let d = params.intra_degree();
        check_wiring(&params, radius)?;

        let total = half_edge_total(&params, radius);
        if total > budget as u128 {
            return Err(Error::MemoryBudget { half_edges: total, budget });
        }

        let strata: Vec<usize> = (0..=radius)
            .map(|j| params.stratum_size(j).expect("bounded by the budget check"))
            .collect();
        let mut stratum_offsets = Vec::with_capacity(radius + 2);
        let mut acc = 0usize;
        for &n in &strata {
            stratum_offsets.push(acc);
            acc += n;
        }
        stratum_offsets.push(acc);
        let vertex_count = acc;

        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut heads: Vec<u32> = Vec::with_capacity(total as usize);
        let mut intra = Vec::with_capacity(d);
        offsets.push(0);
        for (j, &n) in strata.iter().enumerate() {
            for i in 0..n {
                if j >= 1 {
                    let parent = if j == 1 { 0 } else { stratum_offsets[j - 1] + i / params.c };
                    heads.push(parent as u32);
                }
                if j >= 1 && d > 0 {
                    intra.clear();
                    for k in 1..=d / 2 {
                        intra.push((i + k) % n);
                        intra.push((i + n - k) % n);
                    }
                    if d % 2 == 1 {
                        intra.push((i + n / 2) % n);
                    }
                    intra.sort_unstable();
                    heads.extend(intra.iter().map(|&k| (stratum_offsets[j] + k) as u32));
                }
                if j < radius {
                    let first = if j == 0 { 0 } else { params.c * i };
                    let count = if j == 0 { params.a } else { params.c };
                    let base = stratum_offsets[j + 1] + first;
                    heads.extend((base..base + count).map(|v| v as u32));
                }
                offsets.push(heads.len());
            }
        }
        debug_assert_eq!(heads.len() as u128, total);

        let mut reverse = vec![0u32; heads.len()];
        for u in 0..vertex_count {
            for e in offsets[u]..offsets[u + 1] {
                let v = heads[e] as usize;
                let back = (offsets[v]..offsets[v + 1])
                    .find(|&f| heads[f] as usize == u)
                    .expect("adjacency is symmetric");
                reverse[e] = back as u32;
            }
        }

        Ok(Self {
            params,
            radius,
            strata,
            stratum_offsets,
            half_edges: HalfEdgeIndex { offsets, heads, reverse },
        })
    }

    pub fn params(&self) -> SpidernetParams {
        self.params
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Stratum sizes `|V_0|, …, |V_R|`.
    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    pub fn vertex_count(&self) -> usize {
        *self.stratum_offsets.last().unwrap()
    }

    pub fn half_edge_count(&self) -> usize {
        self.half_edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.half_edges.len() / 2
    }

    pub fn half_edges(&self) -> &HalfEdgeIndex {
        &self.half_edges
    }

    /// Global ids of the vertices in stratum `j`.
    pub fn stratum_ids(&self, j: usize) -> Range<usize> {
        self.stratum_offsets[j]..self.stratum_offsets[j + 1]
    }

    pub fn vertex_id(&self, v: Vertex) -> Option<usize> {
        if v.stratum > self.radius || v.index >= self.strata[v.stratum] {
            return None;
        }
        Some(self.stratum_offsets[v.stratum] + v.index)
    }

    pub fn vertex(&self, id: usize) -> Vertex {
        let j = self.stratum_offsets.partition_point(|&o| o <= id) - 1;
        Vertex::new(j, id - self.stratum_offsets[j])
    }

    pub fn neighbors(&self, v: Vertex) -> Result<impl Iterator<Item = Vertex> + '_> {
        let id = self.require(v)?;
        Ok(self.half_edges.block(id).map(move |e| self.vertex(self.half_edges.head(e))))
    }

    pub fn degree(&self, v: Vertex) -> Result<usize> {
        Ok(self.half_edges.degree(self.require(v)?))
    }

    /// Counts the neighbours of `v` one stratum out, one stratum in, or in
    /// the same stratum.
    pub fn omega(&self, v: Vertex, direction: Direction) -> Result<usize> {
        let id = self.require(v)?;
        if v.stratum >= self.radius {
            return Err(Error::BoundaryVertex(v.to_string()));
        }
        let target = match direction {
            Direction::Forward => Some(v.stratum + 1),
            Direction::Backward => v.stratum.checked_sub(1),
            Direction::Intra => Some(v.stratum),
        };
        let Some(target) = target else { return Ok(0) };
        let range = self.stratum_ids(target);
        Ok(self
            .half_edges
            .block(id)
            .filter(|&e| range.contains(&self.half_edges.head(e)))
            .count())
    }

    /// Rotation automorphism fixing the root: `(j, i) ↦ (j, i + k·c^{j-1})`.
    ///
    /// One step rotates `V_1` by one position and every deeper stratum by the
    /// amount needed to keep the parent map intact. The generator has order `a`.
    pub fn rotate(&self, v: Vertex, k: usize) -> Vertex {
        if v.stratum == 0 {
            return v;
        }
        let n = self.strata[v.stratum];
        let block = n / self.params.a;
        Vertex::new(v.stratum, (v.index + (k % self.params.a) * block) % n)
    }

    /// Writes one `"j:i j':i'"` line per undirected edge, lower id first.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        for u in 0..self.vertex_count() {
            for e in self.half_edges.block(u) {
                let v = self.half_edges.head(e);
                if u < v {
                    writeln!(w, "{} {}", self.vertex(u), self.vertex(v))?;
                }
            }
        }
        Ok(())
    }

    fn require(&self, v: Vertex) -> Result<usize> {
        self.vertex_id(v)
            .ok_or_else(|| Error::InvalidParams(format!("vertex {v} is not part of the graph")))
    }
}

fn check_wiring(params: &SpidernetParams, radius: usize) -> Result<()> {
    let d = params.intra_degree();
    if d == 0 || radius == 0 {
        return Ok(());
    }
    // |V_1| = a is the smallest non-root stratum
    if params.a <= d {
        return Err(Error::UnrealizableWiring(format!(
            "a = {} must exceed the intra-stratum degree b-c-1 = {d}",
            params.a
        )));
    }
    if d % 2 == 1 {
        for j in 1..=radius {
            // parity only, so stop once a stratum is known to be even
            match params.stratum_size(j) {
                Some(n) if n % 2 == 1 => {
                    return Err(Error::UnrealizableWiring(format!(
                        "odd intra-stratum degree {d} needs even strata, but |V_{j}| = {n}"
                    )))
                }
                _ => break,
            }
        }
    }
    Ok(())
}

fn half_edge_total(params: &SpidernetParams, radius: usize) -> u128 {
    if radius == 0 {
        return 0;
    }
    let (a, b, c) = (params.a as u128, params.b as u128, params.c as u128);
    let d = params.intra_degree() as u128;
    let mut total = a;
    let mut n = a;
    for j in 1..=radius {
        total = total.saturating_add(n.saturating_mul(if j < radius { b } else { 1 + d }));
        n = n.saturating_mul(c);
    }
    total
}
