//! The Grover walk `U = SC` on the half-edge space `ℓ²(A(G))` of a built
//! spidernet.
//!
//! Nothing is materialized as a matrix: the coin is applied vertex block by
//! vertex block (`2/deg(u)·Σ − x` inside each block) and the shift is the
//! reversal permutation of the [`HalfEdgeIndex`](crate::spidernet::HalfEdgeIndex).
//! This module is the ground truth the reduced and spectral routes are checked
//! against, so evolution refuses to run close enough to the truncation radius
//! for the boundary to matter.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spidernet::{Spidernet, Vertex};

/// Complex amplitudes indexed by half-edge.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    amplitudes: Vec<C64>,
}

impl WalkState {
    pub fn zeros(len: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); len] }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// `δ_e` for half-edge index `e`.
    pub fn basis(len: usize, e: usize) -> Self {
        let mut s = Self::zeros(len);
        s.amplitudes[e] = C64::new(1.0, 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &WalkState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &WalkState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// `P(X_n = u)` for every vertex id `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexDistribution {
    probabilities: Vec<f64>,
}

impl VertexDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn at(&self, g: &Spidernet, v: Vertex) -> Option<f64> {
        g.vertex_id(v).map(|id| self.probabilities[id])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// `P(X_n ∈ V_j)`.
    pub fn stratum(&self, g: &Spidernet, j: usize) -> f64 {
        if j > g.radius() {
            return 0.0;
        }
        self.probabilities[g.stratum_ids(j)].iter().sum()
    }
}

fn check_len(g: &Spidernet, s: &WalkState) -> Result<()> {
    if s.len() != g.half_edge_count() {
        return Err(Error::DimensionMismatch { expected: g.half_edge_count(), got: s.len() });
    }
    Ok(())
}

/// Blockwise Grover coin `C`.
pub fn coin_apply(g: &Spidernet, s: &WalkState) -> Result<WalkState> {
    check_len(g, s)?;
    let h = g.half_edges();
    let mut out = WalkState::zeros(s.len());
    for u in 0..h.vertex_count() {
        let block = h.block(u);
        if block.is_empty() {
            continue;
        }
        let scale = 2.0 / block.len() as f64;
        let mean: C64 = s.amplitudes[block.clone()].iter().sum::<C64>() * scale;
        for e in block {
            out.amplitudes[e] = mean - s.amplitudes[e];
        }
    }
    Ok(out)
}

/// Flip-flop shift `S δ_(u,v) = δ_(v,u)`.
pub fn shift_apply(g: &Spidernet, s: &WalkState) -> Result<WalkState> {
    check_len(g, s)?;
    let rev = g.half_edges().reverse_permutation();
    let mut out = WalkState::zeros(s.len());
    for (e, &r) in rev.iter().enumerate() {
        out.amplitudes[r as usize] = s.amplitudes[e];
    }
    Ok(out)
}

/// One step of `U = SC`.
pub fn step(g: &Spidernet, s: &WalkState) -> Result<WalkState> {
    check_len(g, s)?;
    let mut out = WalkState::zeros(s.len());
    step_into(g, &s.amplitudes, &mut out.amplitudes);
    Ok(out)
}

// fused coin + shift; src and dst have the half-edge length
fn step_into(g: &Spidernet, src: &[C64], dst: &mut [C64]) {
    let h = g.half_edges();
    let rev = h.reverse_permutation();
    for u in 0..h.vertex_count() {
        let block = h.block(u);
        if block.is_empty() {
            continue;
        }
        let scale = 2.0 / block.len() as f64;
        let mean: C64 = src[block.clone()].iter().sum::<C64>() * scale;
        for e in block {
            dst[rev[e] as usize] = mean - src[e];
        }
    }
}

/// `ψ₀⁺ = a^{-1/2} Σ_{v~o} δ_(o,v)`.
pub fn isotropic_initial_state(g: &Spidernet) -> Result<WalkState> {
    if g.radius() == 0 {
        return Err(Error::RadiusTooSmall { needed: 1, radius: 0 });
    }
    let h = g.half_edges();
    let block = h.block(0);
    let amp = C64::new(1.0 / (block.len() as f64).sqrt(), 0.0);
    let mut s = WalkState::zeros(h.len());
    for e in block {
        s.amplitudes[e] = amp;
    }
    Ok(s)
}

fn require_radius(g: &Spidernet, steps: usize) -> Result<()> {
    let needed = steps + 2;
    if g.radius() < needed {
        return Err(Error::RadiusTooSmall { needed, radius: g.radius() });
    }
    Ok(())
}

/// Evolves on the full graph while keeping double buffers.
pub struct GroverWalk<'g> {
    graph: &'g Spidernet,
    state: Vec<C64>,
    scratch: Vec<C64>,
    time: usize,
}

impl<'g> GroverWalk<'g> {
    pub fn new(graph: &'g Spidernet, initial: &WalkState) -> Result<Self> {
        check_len(graph, initial)?;
        Ok(Self {
            graph,
            state: initial.amplitudes.clone(),
            scratch: vec![C64::new(0.0, 0.0); initial.len()],
            time: 0,
        })
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// Advances one step; fails once another step could reach the boundary.
    pub fn advance(&mut self) -> Result<()> {
        require_radius(self.graph, self.time + 1)?;
        step_into(self.graph, &self.state, &mut self.scratch);
        std::mem::swap(&mut self.state, &mut self.scratch);
        self.time += 1;
        Ok(())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.state
    }

    pub fn state(&self) -> WalkState {
        WalkState { amplitudes: self.state.clone() }
    }

    pub fn distribution(&self) -> VertexDistribution {
        distribution_of(self.graph, &self.state)
    }
}

/// `Uⁿ s₀`; requires `n + 2 ≤ R`.
pub fn evolve(g: &Spidernet, s0: &WalkState, n: usize) -> Result<WalkState> {
    require_radius(g, n)?;
    let mut walk = GroverWalk::new(g, s0)?;
    for _ in 0..n {
        walk.advance()?;
    }
    Ok(walk.state())
}

fn distribution_of(g: &Spidernet, amps: &[C64]) -> VertexDistribution {
    let h = g.half_edges();
    let probabilities = (0..h.vertex_count())
        .map(|u| amps[h.block(u)].iter().map(|z| z.norm_sqr()).sum())
        .collect();
    VertexDistribution { probabilities }
}

/// `P(X = u) = Σ_{v~u} |Φ(u,v)|²`.
pub fn vertex_distribution(g: &Spidernet, s: &WalkState) -> Result<VertexDistribution> {
    check_len(g, s)?;
    Ok(distribution_of(g, &s.amplitudes))
}

/// Cesàro mean of the vertex distributions at times `0..N`.
pub fn time_averaged_distribution(g: &Spidernet, s0: &WalkState, n_avg: usize) -> Result<VertexDistribution> {
    if n_avg == 0 {
        return Err(Error::InvalidParams("time average needs N >= 1".into()));
    }
    require_radius(g, n_avg - 1)?;
    let mut walk = GroverWalk::new(g, s0)?;
    let mut acc = vec![0.0; g.vertex_count()];
    for n in 0..n_avg {
        if n > 0 {
            walk.advance()?;
        }
        for (a, p) in acc.iter_mut().zip(walk.distribution().probabilities) {
            *a += p;
        }
    }
    let inv = 1.0 / n_avg as f64;
    Ok(VertexDistribution { probabilities: acc.into_iter().map(|a| a * inv).collect() })
}

/// Permutes half-edges by the rotation automorphism `k` times.
pub fn rotate_state(g: &Spidernet, s: &WalkState, k: usize) -> Result<WalkState> {
    check_len(g, s)?;
    let h = g.half_edges();
    let mut out = WalkState::zeros(s.len());
    for e in 0..h.len() {
        let (u, v) = h.endpoints(e);
        let ru = g.vertex_id(g.rotate(g.vertex(u), k)).unwrap();
        let rv = g.vertex_id(g.rotate(g.vertex(v), k)).unwrap();
        let target = h.index_of(ru, rv).expect("rotation is an automorphism");
        out.amplitudes[target] = s.amplitudes[e];
    }
    Ok(out)
}
