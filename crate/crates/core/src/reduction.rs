//! The `(p,q)`-quantum walk on `Z₊` and on the path of length `N`.
//!
//! The ladder space has basis `ψ₀⁺` and triples `(ψₙ⁺, ψₙ°, ψₙ⁻)` for
//! `n ≥ 1`. The coin is the reflection `2Π − I` about the span of
//! `Ψₙ = √p ψₙ⁺ + √r ψₙ° + √q ψₙ⁻`, and the shift sends `ψₙ⁺ → ψ⁻ₙ₊₁`,
//! `ψₙ° → ψₙ°`, `ψₙ⁻ → ψ⁺ₙ₋₁`. On a spidernet the isotropic vectors span
//! an invariant subspace on which the Grover walk is exactly this walk, see
//! [`embed`].
//!
//! The cutoff walk keeps levels `1..N-1` and only `ψ_N⁻` at level `N`, with
//! `Cψ_N⁻ = ψ_N⁻`. Its spectrum follows from the Jacobi matrix `T_N`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grover::WalkState;
use crate::spidernet::{Spidernet, SpidernetParams};
use crate::tridiag::SymTridiagonal;

const PROB_TOL: f64 = 1e-14;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PqParams {
    p: f64,
    q: f64,
    r: f64,
}

impl PqParams {
    /// `r = 1 − p − q`; values of `r` within `1e-14` below zero are clamped.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Self::with_r(p, q, 1.0 - p - q)
    }

    /// Explicit `r`, which must agree with `1 − p − q` to `1e-14`.
    pub fn with_r(p: f64, q: f64, r: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite() && r.is_finite()) {
            return Err(Error::InvalidParams(format!("need p > 0 and q > 0, got p = {p}, q = {q}")));
        }
        if (p + q + r - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidParams(format!("p + q + r = {} is not 1", p + q + r)));
        }
        if r < -PROB_TOL {
            return Err(Error::InvalidParams(format!("r = {r} is negative")));
        }
        Ok(Self { p, q, r: r.max(0.0) })
    }

    /// `p = c/b`, `q = 1/b`, `r = (b−c−1)/b`. Trees get `r = 0` exactly.
    pub fn from_spidernet(sp: SpidernetParams) -> Self {
        let b = sp.b() as f64;
        Self {
            p: sp.c() as f64 / b,
            q: 1.0 / b,
            r: sp.intra_degree() as f64 / b,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(√p, √r, √q)`, the direction of `Ψₙ` inside a triple.
    pub fn psi_direction(&self) -> [f64; 3] {
        [self.p.sqrt(), self.r.sqrt(), self.q.sqrt()]
    }
}

pub fn params_from_spidernet(sp: SpidernetParams) -> PqParams {
    PqParams::from_spidernet(sp)
}

/// Slot of a ladder basis vector within its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Plus = 0,
    Circ = 1,
    Minus = 2,
}

/// Amplitudes `x₀⁺` and `(xₙ⁺, xₙ°, xₙ⁻)` for `n = 1..=L`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    origin: C64,
    ladder: Vec<[C64; 3]>,
}

impl ReducedState {
    pub fn zero() -> Self {
        Self { origin: ZERO, ladder: Vec::new() }
    }

    pub fn new(origin: C64, ladder: Vec<[C64; 3]>) -> Self {
        Self { origin, ladder }
    }

    /// `ψₙ^slot`; `ψ₀` only exists in the plus slot.
    pub fn basis(n: usize, slot: Slot) -> Result<Self> {
        let mut s = Self::zero();
        if n == 0 {
            if slot != Slot::Plus {
                return Err(Error::InvalidParams(format!("level 0 has no {slot:?} slot")));
            }
            s.origin = C64::new(1.0, 0.0);
        } else {
            s.ladder = vec![[ZERO; 3]; n];
            s.ladder[n - 1][slot as usize] = C64::new(1.0, 0.0);
        }
        Ok(s)
    }

    /// `ψ₀⁺`.
    pub fn initial() -> Self {
        Self { origin: C64::new(1.0, 0.0), ladder: Vec::new() }
    }

    /// `Ψₙ` on `Z₊`.
    pub fn big_psi(params: &PqParams, n: usize) -> Self {
        if n == 0 {
            return Self::initial();
        }
        let mut s = Self::zero();
        s.ladder = vec![[ZERO; 3]; n];
        let d = params.psi_direction();
        s.ladder[n - 1] = [C64::new(d[0], 0.0), C64::new(d[1], 0.0), C64::new(d[2], 0.0)];
        s
    }

    /// `Ψₙ` on the path of length `N`, where `Ψ_N = ψ_N⁻`.
    pub fn big_psi_cutoff(params: &PqParams, n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::DimensionMismatch { expected: cutoff, got: n });
        }
        if n == cutoff && n > 0 {
            return Self::basis(n, Slot::Minus);
        }
        Ok(Self::big_psi(params, n))
    }

    /// Active length `L`: the highest level stored.
    pub fn len(&self) -> usize {
        self.ladder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ladder.is_empty() && self.origin == ZERO
    }

    pub fn origin(&self) -> C64 {
        self.origin
    }

    /// Triple at level `n ≥ 1`; zero beyond the active length.
    pub fn level(&self, n: usize) -> [C64; 3] {
        assert!(n >= 1, "level 0 is the origin slot");
        self.ladder.get(n - 1).copied().unwrap_or([ZERO; 3])
    }

    pub fn get(&self, n: usize, slot: Slot) -> C64 {
        if n == 0 {
            return if slot == Slot::Plus { self.origin } else { ZERO };
        }
        self.level(n)[slot as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.origin.norm_sqr() + self.ladder.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = self.origin.conj() * other.origin;
        for (x, y) in self.ladder.iter().zip(&other.ladder) {
            for k in 0..3 {
                acc += x[k].conj() * y[k];
            }
        }
        acc
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            origin: self.origin * z,
            ladder: self.ladder.iter().map(|t| [t[0] * z, t[1] * z, t[2] * z]).collect(),
        }
    }

    /// `self + z·other`.
    pub fn axpy(&self, z: C64, other: &Self) -> Self {
        let len = self.len().max(other.len());
        let ladder = (1..=len)
            .map(|n| {
                let (x, y) = (self.level(n), other.level(n));
                [x[0] + z * y[0], x[1] + z * y[1], x[2] + z * y[2]]
            })
            .collect();
        Self { origin: self.origin + z * other.origin, ladder }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.len().max(other.len());
        let mut m = (self.origin - other.origin).norm();
        for n in 1..=len {
            let (x, y) = (self.level(n), other.level(n));
            for k in 0..3 {
                m = m.max((x[k] - y[k]).norm());
            }
        }
        m
    }

    /// Coefficient vector on the basis of the path of length `N`:
    /// `ψ₀⁺, (ψ₁⁺, ψ₁°, ψ₁⁻), …, (ψ⁺_{N−1}, ψ°_{N−1}, ψ⁻_{N−1}), ψ_N⁻`.
    pub fn to_cutoff_vec(&self, cutoff: usize) -> Result<Vec<C64>> {
        check_cutoff_support(self, cutoff)?;
        let mut v = Vec::with_capacity(3 * cutoff - 1);
        v.push(self.origin);
        for n in 1..cutoff {
            v.extend_from_slice(&self.level(n));
        }
        v.push(self.level(cutoff)[Slot::Minus as usize]);
        Ok(v)
    }

    pub fn from_cutoff_vec(v: &[C64], cutoff: usize) -> Result<Self> {
        if cutoff < 1 || v.len() != 3 * cutoff - 1 {
            return Err(Error::DimensionMismatch { expected: 3 * cutoff.max(1) - 1, got: v.len() });
        }
        let mut ladder: Vec<[C64; 3]> = v[1..v.len() - 1].chunks(3).map(|t| [t[0], t[1], t[2]]).collect();
        ladder.push([ZERO, ZERO, v[v.len() - 1]]);
        Ok(Self { origin: v[0], ladder })
    }

    fn trim(&mut self) {
        while self.ladder.last().is_some_and(|t| t.iter().all(|z| *z == ZERO)) {
            self.ladder.pop();
        }
    }
}

/// Dimension `3N − 1` of the path space.
pub fn cutoff_dim(cutoff: usize) -> usize {
    3 * cutoff - 1
}

fn check_cutoff_support(s: &ReducedState, cutoff: usize) -> Result<()> {
    if cutoff < 1 {
        return Err(Error::InvalidParams("cutoff must be at least 1".into()));
    }
    if s.len() > cutoff {
        return Err(Error::DimensionMismatch { expected: cutoff, got: s.len() });
    }
    if s.len() == cutoff {
        let top = s.level(cutoff);
        if top[0] != ZERO || top[1] != ZERO {
            return Err(Error::Unrepresentable(format!(
                "level {cutoff} of the path only carries the minus slot"
            )));
        }
    }
    Ok(())
}

fn coin_triple(d: &[f64; 3], t: &[C64; 3]) -> [C64; 3] {
    let proj = (t[0] * d[0] + t[1] * d[1] + t[2] * d[2]) * 2.0;
    [proj * d[0] - t[0], proj * d[1] - t[1], proj * d[2] - t[2]]
}

/// The walk on `Z₊` (`cutoff = None`) or on the path of length `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedWalk {
    params: PqParams,
    cutoff: Option<usize>,
}

impl ReducedWalk {
    pub fn infinite(params: PqParams) -> Self {
        Self { params, cutoff: None }
    }

    /// Path of length `N ≥ 2`.
    pub fn cutoff(params: PqParams, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("cutoff N = {n} must be at least 2")));
        }
        Ok(Self { params, cutoff: Some(n) })
    }

    pub fn params(&self) -> PqParams {
        self.params
    }

    pub fn cutoff_len(&self) -> Option<usize> {
        self.cutoff
    }

    fn check(&self, s: &ReducedState) -> Result<()> {
        match self.cutoff {
            Some(n) => check_cutoff_support(s, n),
            None => Ok(()),
        }
    }

    pub fn coin(&self, s: &ReducedState) -> Result<ReducedState> {
        self.check(s)?;
        let d = self.params.psi_direction();
        let mut out = s.clone();
        for (i, t) in out.ladder.iter_mut().enumerate() {
            if self.cutoff == Some(i + 1) {
                continue;
            }
            *t = coin_triple(&d, t);
        }
        Ok(out)
    }

    pub fn shift(&self, s: &ReducedState) -> Result<ReducedState> {
        self.check(s)?;
        Ok(shift_unchecked(s, self.cutoff))
    }

    /// `U = SC`.
    pub fn step(&self, s: &ReducedState) -> Result<ReducedState> {
        let c = self.coin(s)?;
        Ok(shift_unchecked(&c, self.cutoff))
    }

    pub fn evolve(&self, s0: &ReducedState, n: usize) -> Result<ReducedState> {
        self.check(s0)?;
        let mut s = s0.clone();
        let mut scratch = ReducedState::zero();
        for _ in 0..n {
            self.step_into(&s, &mut scratch);
            std::mem::swap(&mut s, &mut scratch);
        }
        Ok(s)
    }

    // fused coin + shift into a reusable buffer; `src` must already be valid
    fn step_into(&self, src: &ReducedState, dst: &mut ReducedState) {
        let d = self.params.psi_direction();
        let len = src.ladder.len();
        let coined = |i: usize| -> [C64; 3] {
            if self.cutoff == Some(i + 1) {
                src.ladder[i]
            } else {
                coin_triple(&d, &src.ladder[i])
            }
        };
        let grow = self.cutoff.map_or(true, |n| len < n);
        let new_len = if grow && (len > 0 || src.origin != ZERO) { len + 1 } else { len };
        dst.ladder.clear();
        dst.ladder.resize(new_len, [ZERO; 3]);
        dst.origin = if len > 0 { coined(0)[2] } else { ZERO };
        // ψ₀⁺ is fixed by the coin and moves to ψ₁⁻
        if new_len > 0 {
            dst.ladder[0][2] = src.origin;
        }
        for i in 0..len {
            let t = coined(i);
            if i > 0 {
                dst.ladder[i - 1][0] = t[2];
            }
            dst.ladder[i][1] = t[1];
            if i + 1 < new_len {
                dst.ladder[i + 1][2] = t[0];
            }
        }
    }
}

fn shift_unchecked(s: &ReducedState, cutoff: Option<usize>) -> ReducedState {
    let len = s.ladder.len();
    let top_plus = s.ladder.last().map_or(s.origin, |t| t[0]);
    let grow = top_plus != ZERO && cutoff.map_or(true, |n| len < n);
    let new_len = if grow { len + 1 } else { len };
    let mut out = ReducedState { origin: ZERO, ladder: vec![[ZERO; 3]; new_len] };
    out.origin = s.level_or_zero(1)[2];
    if new_len > 0 {
        out.ladder[0][2] = s.origin;
    }
    for i in 0..len {
        let t = s.ladder[i];
        if i > 0 {
            out.ladder[i - 1][0] = t[2];
        }
        out.ladder[i][1] = t[1];
        if i + 1 < new_len {
            out.ladder[i + 1][2] = t[0];
        }
    }
    out
}

impl ReducedState {
    fn level_or_zero(&self, n: usize) -> [C64; 3] {
        self.ladder.get(n - 1).copied().unwrap_or([ZERO; 3])
    }
}

pub fn reduced_coin(params: &PqParams, s: &ReducedState) -> ReducedState {
    ReducedWalk::infinite(*params).coin(s).expect("infinite line accepts every state")
}

pub fn reduced_shift(params: &PqParams, s: &ReducedState) -> ReducedState {
    ReducedWalk::infinite(*params).shift(s).expect("infinite line accepts every state")
}

pub fn reduced_step(params: &PqParams, s: &ReducedState) -> ReducedState {
    ReducedWalk::infinite(*params).step(s).expect("infinite line accepts every state")
}

pub fn reduced_evolve(params: &PqParams, s0: &ReducedState, n: usize) -> ReducedState {
    ReducedWalk::infinite(*params).evolve(s0, n).expect("infinite line accepts every state")
}

/// `|x₀⁺|²`.
pub fn origin_probability(s: &ReducedState) -> f64 {
    s.origin.norm_sqr()
}

/// `|x_l⁺|² + |x_l°|² + |x_l⁻|²`, which is `P(X ∈ V_l)` for an embedded state.
pub fn stratum_probability(s: &ReducedState, l: usize) -> f64 {
    if l == 0 {
        return origin_probability(s);
    }
    s.level(l).iter().map(|z| z.norm_sqr()).sum()
}

/// Successive states `Uⁿs₀` for `n = 0, 1, …` on the infinite line.
pub struct ReducedEvolution {
    walk: ReducedWalk,
    state: ReducedState,
    scratch: ReducedState,
    time: usize,
}

impl ReducedEvolution {
    pub fn new(walk: ReducedWalk, s0: ReducedState) -> Result<Self> {
        walk.check(&s0)?;
        Ok(Self { walk, state: s0, scratch: ReducedState::zero(), time: 0 })
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn state(&self) -> &ReducedState {
        &self.state
    }

    pub fn advance(&mut self) {
        self.walk.step_into(&self.state, &mut self.scratch);
        std::mem::swap(&mut self.state, &mut self.scratch);
        self.time += 1;
    }

    /// Drops levels above `len`.
    ///
    /// Amplitude moves at most one level per step, so levels above
    /// `l + k` cannot influence levels `≤ l` during the next `k` steps; the
    /// truncated evolution stays exact there while costing less.
    pub fn truncate(&mut self, len: usize) {
        self.state.ladder.truncate(len);
    }
}

// isotropic normalizations of ψₙ⁺, ψₙ°, ψₙ⁻ on the graph
fn ladder_norms(sp: &SpidernetParams, n: usize) -> [f64; 3] {
    let (a, c, d) = (sp.a() as f64, sp.c() as f64, sp.intra_degree() as f64);
    if n == 0 {
        return [(1.0 / a).sqrt(), 0.0, 0.0];
    }
    let cn1 = c.powi(n as i32 - 1);
    let circ = if d > 0.0 { (1.0 / (a * d * cn1)).sqrt() } else { 0.0 };
    [(1.0 / (a * cn1 * c)).sqrt(), circ, (1.0 / (a * cn1)).sqrt()]
}

/// Isometric embedding of the ladder into `ℓ²(A(G))`.
///
/// Needs `R ≥ L + 1` so every stored level has its forward half-edges.
pub fn embed(g: &Spidernet, s: &ReducedState) -> Result<WalkState> {
    let needed = s.len() + 1;
    if g.radius() < needed {
        return Err(Error::RadiusTooSmall { needed, radius: g.radius() });
    }
    let sp = g.params();
    if sp.is_tree() && s.ladder.iter().any(|t| t[1] != ZERO) {
        return Err(Error::Unrepresentable("a tree has no intra-stratum half-edges".into()));
    }
    let h = g.half_edges();
    let mut out = WalkState::zeros(h.len());
    let amps = out.amplitudes_mut();
    for j in 0..=s.len() {
        let norms = ladder_norms(&sp, j);
        let coeff = if j == 0 {
            [s.origin * norms[0], ZERO, ZERO]
        } else {
            let t = s.level(j);
            [t[0] * norms[0], t[1] * norms[1], t[2] * norms[2]]
        };
        let same = g.stratum_ids(j);
        for u in same.clone() {
            for e in h.block(u) {
                let v = h.head(e);
                let slot = if same.contains(&v) {
                    Slot::Circ
                } else if v >= same.end {
                    Slot::Plus
                } else {
                    Slot::Minus
                };
                amps[e] = coeff[slot as usize];
            }
        }
    }
    Ok(out)
}

/// Orthogonal projection of a graph state onto the ladder, levels `< R`.
pub fn project(g: &Spidernet, w: &WalkState) -> Result<ReducedState> {
    if w.len() != g.half_edge_count() {
        return Err(Error::DimensionMismatch { expected: g.half_edge_count(), got: w.len() });
    }
    let sp = g.params();
    let h = g.half_edges();
    let levels = g.radius().saturating_sub(1);
    let mut out = ReducedState { origin: ZERO, ladder: vec![[ZERO; 3]; levels] };
    for j in 0..=levels {
        let norms = ladder_norms(&sp, j);
        let same = g.stratum_ids(j);
        let mut sums = [ZERO; 3];
        for u in same.clone() {
            for e in h.block(u) {
                let v = h.head(e);
                let slot = if same.contains(&v) {
                    Slot::Circ
                } else if v >= same.end {
                    Slot::Plus
                } else {
                    Slot::Minus
                };
                sums[slot as usize] += w.amplitudes()[e];
            }
        }
        if j == 0 {
            out.origin = sums[0] * norms[0];
        } else {
            out.ladder[j - 1] = [sums[0] * norms[0], sums[1] * norms[1], sums[2] * norms[2]];
        }
    }
    out.trim();
    Ok(out)
}

/// `T_N = ΠUΠ` restricted to `span{Ψ₀, …, Ψ_N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrixT {
    params: PqParams,
    cutoff: usize,
    matrix: SymTridiagonal,
}

impl JacobiMatrixT {
    pub fn params(&self) -> PqParams {
        self.params
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    /// Dense copy, rows of length `N + 1`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.matrix.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.matrix.diag()[i];
            if i + 1 < n {
                m[i][i + 1] = self.matrix.off()[i];
                m[i + 1][i] = self.matrix.off()[i];
            }
        }
        m
    }
}

/// Diagonal `(0, r, …, r, 0)`, off-diagonal `(√q, √(pq), …, √(pq), √p)`.
#[allow(non_snake_case)]
pub fn build_T(params: &PqParams, cutoff: usize) -> Result<JacobiMatrixT> {
    if cutoff < 2 {
        return Err(Error::InvalidParams(format!("cutoff N = {cutoff} must be at least 2")));
    }
    let mut diag = vec![params.r; cutoff + 1];
    diag[0] = 0.0;
    diag[cutoff] = 0.0;
    let mut off = vec![(params.p * params.q).sqrt(); cutoff];
    off[0] = params.q.sqrt();
    off[cutoff - 1] = params.p.sqrt();
    Ok(JacobiMatrixT { params: *params, cutoff, matrix: SymTridiagonal::new(diag, off)? })
}

/// Eigenpairs of `T_N`, eigenvalues descending, `Ω_j[0] > 0`.
#[derive(Clone, Debug)]
pub struct TEigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;

#[allow(non_snake_case)]
pub fn eigensystem_T(t: &JacobiMatrixT, tol: f64) -> Result<TEigensystem> {
    let e = t.matrix.eigen(tol)?;
    let mut vectors = e.vectors;
    for v in &mut vectors {
        if v[0] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(TEigensystem { values: e.values, vectors })
}

/// Complete eigensystem of the cutoff walk `U_N`.
#[derive(Clone, Debug)]
pub struct UEigensystem {
    pub params: PqParams,
    pub cutoff: usize,
    /// Eigenvalues `λ₀ = 1 > λ₁ > … > λ_N` of `T_N`.
    pub t_values: Vec<f64>,
    /// Eigenvectors `Ω_j` of `T_N` in the `Ψ` basis.
    pub t_vectors: Vec<Vec<f64>>,
    /// `θ_j ∈ (0, π)` for the non-real pairs, ascending.
    pub thetas: Vec<f64>,
    /// `Ω_j⁺` with eigenvalue `e^{iθ_j}`.
    pub plus_vectors: Vec<ReducedState>,
    /// `Ω_j⁻` with eigenvalue `e^{−iθ_j}`.
    pub minus_vectors: Vec<ReducedState>,
    /// `Ω₀` embedded in the ladder, eigenvalue 1.
    pub unit_vector: ReducedState,
    pub minus_one_multiplicity: usize,
}

impl UEigensystem {
    /// All `3N − 1` eigenvalues with multiplicity.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let mut out = vec![C64::new(1.0, 0.0)];
        for &t in &self.thetas {
            out.push(C64::from_polar(1.0, t));
            out.push(C64::from_polar(1.0, -t));
        }
        out.extend(std::iter::repeat(C64::new(-1.0, 0.0)).take(self.minus_one_multiplicity));
        out
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.re).sum()
    }

    /// Largest `‖UΩ − λΩ‖` over the `1` and `e^{±iθ_j}` eigenvectors.
    pub fn residual(&self) -> Result<f64> {
        let walk = ReducedWalk::cutoff(self.params, self.cutoff)?;
        let mut worst = walk.step(&self.unit_vector)?.max_abs_diff(&self.unit_vector);
        for (k, &t) in self.thetas.iter().enumerate() {
            for (v, sign) in [(&self.plus_vectors[k], 1.0), (&self.minus_vectors[k], -1.0)] {
                let uv = walk.step(v)?;
                worst = worst.max(uv.max_abs_diff(&v.scale(C64::from_polar(1.0, sign * t))));
            }
        }
        Ok(worst)
    }
}

fn omega_state(params: &PqParams, coeffs: &[f64], cutoff: usize) -> ReducedState {
    let d = params.psi_direction();
    let mut s = ReducedState { origin: C64::new(coeffs[0], 0.0), ladder: vec![[ZERO; 3]; cutoff] };
    for n in 1..cutoff {
        s.ladder[n - 1] = [
            C64::new(coeffs[n] * d[0], 0.0),
            C64::new(coeffs[n] * d[1], 0.0),
            C64::new(coeffs[n] * d[2], 0.0),
        ];
    }
    s.ladder[cutoff - 1][2] = C64::new(coeffs[cutoff], 0.0);
    s
}

pub fn u_eigensystem(params: &PqParams, cutoff: usize) -> Result<UEigensystem> {
    let t = build_T(params, cutoff)?;
    let eig = eigensystem_T(&t, DEFAULT_EIGEN_TOL)?;
    let walk = ReducedWalk::cutoff(*params, cutoff)?;
    let minus_one = params.r == 0.0;
    let pair_count = if minus_one { cutoff - 1 } else { cutoff };

    let mut thetas = Vec::with_capacity(pair_count);
    let mut plus_vectors = Vec::with_capacity(pair_count);
    let mut minus_vectors = Vec::with_capacity(pair_count);
    for j in 1..=pair_count {
        let theta = eig.values[j].clamp(-1.0, 1.0).acos();
        let omega = omega_state(params, &eig.vectors[j], cutoff);
        let s_omega = walk.shift(&omega)?;
        let denom = std::f64::consts::SQRT_2 * theta.sin();
        for (sign, out) in [(1.0, &mut plus_vectors), (-1.0, &mut minus_vectors)] {
            let phase = C64::from_polar(1.0, sign * theta);
            out.push(omega.axpy(-phase, &s_omega).scale(C64::new(1.0 / denom, 0.0)));
        }
        thetas.push(theta);
    }
    let unit_vector = omega_state(params, &eig.vectors[0], cutoff);
    let minus_one_multiplicity = cutoff_dim(cutoff) - 1 - 2 * pair_count;
    Ok(UEigensystem {
        params: *params,
        cutoff,
        t_values: eig.values,
        t_vectors: eig.vectors,
        thetas,
        plus_vectors,
        minus_vectors,
        unit_vector,
        minus_one_multiplicity,
    })
}

/// `Tr U_N` summed from the diagonal matrix elements `⟨e, U_N e⟩`.
pub fn cutoff_trace(params: &PqParams, cutoff: usize) -> Result<f64> {
    let walk = ReducedWalk::cutoff(*params, cutoff)?;
    let dim = cutoff_dim(cutoff);
    let mut trace = 0.0;
    for k in 0..dim {
        let mut e = vec![ZERO; dim];
        e[k] = C64::new(1.0, 0.0);
        let s = ReducedState::from_cutoff_vec(&e, cutoff)?;
        trace += walk.step(&s)?.to_cutoff_vec(cutoff)?[k].re;
    }
    Ok(trace)
}

/// `μ_N = Σ_j Ω_j[0]² δ_{λ_j}` as `(λ_j, weight)` pairs, `λ` descending.
pub fn discrete_spectral_measure(params: &PqParams, cutoff: usize) -> Result<Vec<(f64, f64)>> {
    let t = build_T(params, cutoff)?;
    let eig = eigensystem_T(&t, DEFAULT_EIGEN_TOL)?;
    Ok(eig.values.iter().zip(&eig.vectors).map(|(&l, v)| (l, v[0] * v[0])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn sixty_three() -> PqParams {
        PqParams::from_spidernet(SpidernetParams::new(4, 6, 3).unwrap())
    }

    fn random_state(len: usize, seed: u64) -> ReducedState {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut z = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = ReducedState::new(z(), (0..len).map(|_| [z(), z(), z()]).collect());
        let n = s.norm_sqr().sqrt();
        s.scale(C64::new(1.0 / n, 0.0))
    }

    #[test]
    fn params_from_graphs() {
        let p = sixty_three();
        assert!((p.p() - 0.5).abs() < 1e-16 && (p.q() - 1.0 / 6.0).abs() < 1e-16);
        assert!((p.r() - 1.0 / 3.0).abs() < 1e-16);
        let tree = PqParams::from_spidernet(SpidernetParams::new(3, 5, 4).unwrap());
        assert_eq!(tree.r(), 0.0);
        let p = PqParams::from_spidernet(SpidernetParams::new(2, 4, 1).unwrap());
        assert_eq!((p.p(), p.q(), p.r()), (0.25, 0.25, 0.5));
    }

    #[test]
    fn params_validation() {
        assert!(PqParams::new(0.0, 0.5).is_err());
        assert!(PqParams::new(0.6, 0.6).is_err());
        assert!(PqParams::with_r(0.5, 0.25, 0.3).is_err());
        assert_eq!(PqParams::new(0.5, 0.5).unwrap().r(), 0.0);
    }

    #[test]
    fn coin_fixes_big_psi() {
        let p = sixty_three();
        for n in 0..5 {
            let psi = ReducedState::big_psi(&p, n);
            assert!(reduced_coin(&p, &psi).max_abs_diff(&psi) < 1e-15);
        }
    }

    #[test]
    fn coin_negates_orthogonal_complement() {
        let p = sixty_three();
        let d = p.psi_direction();
        // (√r, −√p, 0) is orthogonal to (√p, √r, √q)
        let t = [C64::new(d[1], 0.0), C64::new(-d[0], 0.0), ZERO];
        let s = ReducedState::new(ZERO, vec![[ZERO; 3], t]);
        let out = reduced_coin(&p, &s);
        assert!(out.max_abs_diff(&s.scale(C64::new(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn coin_and_shift_are_involutions() {
        let p = sixty_three();
        let s = random_state(6, 3);
        assert!(reduced_coin(&p, &reduced_coin(&p, &s)).max_abs_diff(&s) < 1e-14);
        assert!(reduced_shift(&p, &reduced_shift(&p, &s)).max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn shift_of_basis_vectors() {
        let p = sixty_three();
        let s = reduced_shift(&p, &ReducedState::initial());
        assert_eq!(s, ReducedState::basis(1, Slot::Minus).unwrap());
        let c = ReducedState::basis(3, Slot::Circ).unwrap();
        assert_eq!(reduced_shift(&p, &c), c);
        let plus = ReducedState::basis(2, Slot::Plus).unwrap();
        assert_eq!(reduced_shift(&p, &plus).get(3, Slot::Minus), C64::new(1.0, 0.0));
        let minus = ReducedState::basis(2, Slot::Minus).unwrap();
        assert_eq!(reduced_shift(&p, &minus).get(1, Slot::Plus), C64::new(1.0, 0.0));
    }

    #[test]
    fn first_step_leaves_origin() {
        let p = sixty_three();
        let s = reduced_evolve(&p, &ReducedState::initial(), 1);
        assert_eq!(origin_probability(&s), 0.0);
        assert_eq!(stratum_probability(&s, 1), 1.0);
    }

    #[test]
    fn fused_step_matches_composition() {
        let p = sixty_three();
        let s = random_state(7, 11);
        let composed = reduced_shift(&p, &reduced_coin(&p, &s));
        let fused = reduced_evolve(&p, &s, 1);
        assert!(composed.max_abs_diff(&fused) < 1e-15);
        let walk = ReducedWalk::cutoff(p, 5).unwrap();
        let mut s = random_state(4, 12).to_cutoff_vec(5).unwrap();
        s[13] = C64::new(0.3, 0.1);
        let s = ReducedState::from_cutoff_vec(&s, 5).unwrap();
        let composed = walk.shift(&walk.coin(&s).unwrap()).unwrap();
        assert!(composed.max_abs_diff(&walk.evolve(&s, 1).unwrap()) < 1e-15);
    }

    #[test]
    fn norm_preserved_over_long_runs() {
        let p = sixty_three();
        let mut e = ReducedEvolution::new(ReducedWalk::infinite(p), ReducedState::initial()).unwrap();
        for _ in 0..10_000 {
            e.advance();
        }
        assert!((e.state().norm_sqr() - 1.0).abs() < 1e-10);
        assert_eq!(e.state().len(), 10_000);
    }

    #[test]
    fn cutoff_rejects_states_above_the_path() {
        let walk = ReducedWalk::cutoff(sixty_three(), 3).unwrap();
        assert!(walk.step(&random_state(4, 1)).is_err());
        assert!(matches!(walk.step(&random_state(3, 1)), Err(Error::Unrepresentable(_))));
        assert!(ReducedWalk::cutoff(sixty_three(), 1).is_err());
    }

    #[test]
    fn cutoff_vec_round_trip() {
        let s = random_state(3, 5);
        let v = s.to_cutoff_vec(4).unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(ReducedState::from_cutoff_vec(&v, 4).unwrap().max_abs_diff(&s), 0.0);
    }

    #[test]
    fn t_for_two() {
        let p = PqParams::new(0.5, 0.25).unwrap();
        let t = build_T(&p, 2).unwrap().to_dense();
        let expect = [[0.0, 0.5, 0.0], [0.5, 0.25, 0.5f64.sqrt()], [0.0, 0.5f64.sqrt(), 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((t[i][j] - expect[i][j]).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn t_is_pi_u_pi() {
        let p = sixty_three();
        let n = 6;
        let t = build_T(&p, n).unwrap().to_dense();
        let walk = ReducedWalk::cutoff(p, n).unwrap();
        for j in 0..=n {
            let uj = walk.step(&ReducedState::big_psi_cutoff(&p, j, n).unwrap()).unwrap();
            for i in 0..=n {
                let psi_i = ReducedState::big_psi_cutoff(&p, i, n).unwrap();
                assert!((psi_i.inner(&uj).re - t[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn t_has_eigenvalue_one() {
        for p in [sixty_three(), PqParams::new(0.75, 0.25).unwrap()] {
            for n in [2, 5, 9] {
                let t = build_T(&p, n).unwrap();
                let e = eigensystem_T(&t, 1e-12).unwrap();
                assert!((e.values[0] - 1.0).abs() < 1e-13);
                let last = *e.values.last().unwrap();
                if p.r() > 0.0 {
                    assert!(last > -1.0 + 1e-6);
                } else {
                    assert!((last + 1.0).abs() < 1e-13);
                }
                let sum: f64 = e.values.iter().sum();
                assert!((sum - p.r() * (n as f64 - 1.0)).abs() < 1e-13);
                assert!(e.vectors.iter().all(|v| v[0] > 0.0));
            }
        }
    }

    #[test]
    fn u_eigensystem_multiplicities_and_residuals() {
        let tree = PqParams::new(0.8, 0.2).unwrap();
        for (p, mult) in [(sixty_three(), 3), (tree, 5)] {
            let u = u_eigensystem(&p, 5).unwrap();
            assert_eq!(u.minus_one_multiplicity, mult);
            assert_eq!(u.eigenvalues().len(), cutoff_dim(5));
            assert!(u.residual().unwrap() < 1e-10);
            assert!((u.trace() - (2.0 * p.r() - 1.0) * 4.0).abs() < 1e-12);
            for v in u.plus_vectors.iter().chain(&u.minus_vectors) {
                assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_from_diagonal() {
        for (p, n) in [(sixty_three(), 4), (PqParams::new(0.5, 0.5).unwrap(), 7)] {
            let tr = cutoff_trace(&p, n).unwrap();
            assert!((tr - (2.0 * p.r() - 1.0) * (n as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_measure_small_case() {
        let p = PqParams::new(0.5, 0.5).unwrap();
        let mu = discrete_spectral_measure(&p, 2).unwrap();
        let atoms: Vec<f64> = mu.iter().map(|x| x.0).collect();
        for (a, e) in atoms.iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - e).abs() < 1e-13);
        }
        // T = [[0,s,0],[s,0,s],[0,s,0]] with s = 1/√2: weights 1/4, 1/2, 1/4
        for ((_, w), e) in mu.iter().zip([0.25, 0.5, 0.25]) {
            assert!((w - e).abs() < 1e-13);
        }
    }

    #[test]
    fn discrete_measure_moments_are_t_moments() {
        let p = sixty_three();
        let n = 8;
        let mu = discrete_spectral_measure(&p, n).unwrap();
        assert!((mu.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        let t = build_T(&p, n).unwrap();
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        for m in 0..20 {
            let moment: f64 = mu.iter().map(|(l, w)| w * l.powi(m)).sum();
            assert!((moment - v[0]).abs() < 1e-12, "m = {m}");
            v = t.matrix().mul_vec(&v);
        }
    }

    #[test]
    fn spectral_reconstruction_of_return_amplitude() {
        let p = sixty_three();
        for n in [0usize, 1, 2, 7, 30, 50] {
            let cutoff = n + 2;
            let mu = discrete_spectral_measure(&p, cutoff).unwrap();
            let spectral: f64 = mu.iter().map(|(l, w)| w * (n as f64 * l.clamp(-1.0, 1.0).acos()).cos()).sum();
            let walk = ReducedWalk::cutoff(p, cutoff).unwrap();
            let direct = walk.evolve(&ReducedState::initial(), n).unwrap().origin();
            assert!((spectral - direct.re).abs() < 1e-10, "n = {n}");
            let infinite = reduced_evolve(&p, &ReducedState::initial(), n).origin();
            assert!((infinite - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn tree_embedding_rejects_circ_slot() {
        let g = crate::spidernet::build_spidernet(SpidernetParams::new(2, 3, 2).unwrap(), 4).unwrap();
        let s = ReducedState::basis(1, Slot::Circ).unwrap();
        assert!(matches!(embed(&g, &s), Err(Error::Unrepresentable(_))));
    }

    #[test]
    fn embedding_is_isometric_and_projects_back() {
        let g = crate::spidernet::build_spidernet(SpidernetParams::new(4, 6, 3).unwrap(), 5).unwrap();
        let s = random_state(4, 9);
        let w = embed(&g, &s).unwrap();
        assert!((w.norm_sqr() - s.norm_sqr()).abs() < 1e-13);
        assert!(project(&g, &w).unwrap().max_abs_diff(&s) < 1e-14);
        assert!(matches!(embed(&g, &random_state(5, 9)), Err(Error::RadiusTooSmall { .. })));
        let psi0 = crate::grover::isotropic_initial_state(&g).unwrap();
        assert!(embed(&g, &ReducedState::initial()).unwrap().max_abs_diff(&psi0) < 1e-16);
    }

    proptest! {
        #[test]
        fn step_is_unitary(seed in 0u64..1000, len in 0usize..12, pq in (0.05f64..0.9, 0.05f64..0.9)) {
            prop_assume!(pq.0 + pq.1 <= 1.0);
            let p = PqParams::new(pq.0, pq.1).unwrap();
            let s = random_state(len, seed);
            let out = reduced_evolve(&p, &s, 5);
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn coin_is_symmetric(seed in 0u64..1000) {
            let p = sixty_three();
            let x = random_state(4, seed);
            let y = random_state(4, seed + 1);
            let lhs = x.inner(&reduced_coin(&p, &y));
            let rhs = reduced_coin(&p, &x).inner(&y);
            prop_assert!((lhs - rhs).norm() < 1e-14);
        }
    }
}
