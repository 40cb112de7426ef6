//! The free Meixner law and its orthogonal polynomials.
//!
//! A law is fixed by its Jacobi coefficients `ω₁ = ω₁`, `ω₂ = ω₃ = … = ω`,
//! `α₁ = 0`, `α₂ = α₃ = … = α`. The walk with parameters `(p, q, r)` has
//! spectral measure `(ω₁, ω, α) = (q, pq, r)`, which is a density on
//! `[α − 2√ω, α + 2√ω]` plus at most one atom at `ξ = −q/(1−p)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduction::PqParams;

/// Slack, relative to the support half-width, for points on the endpoints.
const SUPPORT_SLACK: f64 = 4.0 * f64::EPSILON;
/// Atom masses at or below this are rounding residue and dropped.
const MASS_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FreeMeixnerLaw {
    omega1: f64,
    omega: f64,
    alpha: f64,
    atom: Option<Atom>,
}

impl FreeMeixnerLaw {
    /// The spectral law of the `(p,q)` walk; needs `p ≥ q`.
    pub fn from_pq(params: &PqParams) -> Result<Self> {
        let (p, q, r) = (params.p(), params.q(), params.r());
        if p < q {
            return Err(Error::ParamsOutOfRange(format!(
                "p = {p} < q = {q}: the atom structure is only known for p >= q"
            )));
        }
        let mass = ((1.0 - p).powi(2) - p * q) / ((1.0 - p) * (1.0 - p + q));
        // on the boundary (1−p)² = pq the atom merges into the support edge
        let atom = (mass > MASS_FLOOR).then(|| Atom { location: -q / (1.0 - p), mass });
        Ok(Self { omega1: q, omega: p * q, alpha: r, atom })
    }

    /// A law given by raw Jacobi data; only atomless laws are accepted.
    pub fn from_jacobi(omega1: f64, omega: f64, alpha: f64) -> Result<Self> {
        if !(omega1 > 0.0 && omega > 0.0 && omega1.is_finite() && omega.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need ω₁ > 0 and ω > 0, got ω₁ = {omega1}, ω = {omega}"
            )));
        }
        let law = Self { omega1, omega, alpha, atom: None };
        if let Some(z) = law.atom_candidates().into_iter().find(|&z| law.is_atom(z)) {
            return Err(Error::ParamsOutOfRange(format!(
                "law has an atom at {z}; only atomless Jacobi data are supported"
            )));
        }
        Ok(law)
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn atom(&self) -> Option<Atom> {
        self.atom
    }

    /// `(α − 2√ω, α + 2√ω)`.
    pub fn support(&self) -> (f64, f64) {
        let h = 2.0 * self.omega.sqrt();
        (self.alpha - h, self.alpha + h)
    }

    /// `(αₙ, ωₙ)` for `n ≥ 1`.
    pub fn jacobi(&self, n: usize) -> (f64, f64) {
        assert!(n >= 1, "Jacobi coefficients start at n = 1");
        if n == 1 {
            (0.0, self.omega1)
        } else {
            (self.alpha, self.omega)
        }
    }

    /// Denominator `(ω − ω₁)x² + ω₁αx + ω₁²` of the density.
    pub fn denominator(&self, x: f64) -> f64 {
        (self.omega - self.omega1) * x * x + self.omega1 * self.alpha * x + self.omega1 * self.omega1
    }

    // real roots of the denominator
    fn atom_candidates(&self) -> Vec<f64> {
        let a = self.omega - self.omega1;
        let b = self.omega1 * self.alpha;
        let c = self.omega1 * self.omega1;
        if a == 0.0 {
            return if b == 0.0 { vec![] } else { vec![-c / b] };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return vec![];
        }
        let s = disc.sqrt();
        // numerically stable pair
        let t = -0.5 * (b + b.signum() * s);
        if t == 0.0 {
            return vec![0.0];
        }
        vec![t / a, c / t]
    }

    // `z` is an atom when it solves `z = ω₁G(z)` on the physical branch of
    // the tail transform `G`
    fn is_atom(&self, z: f64) -> bool {
        let (lo, hi) = self.support();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if z >= lo - slack && z <= hi + slack {
            return false;
        }
        let u = z - self.alpha;
        let s = u - 2.0 * self.omega * z / self.omega1;
        u != 0.0 && s != 0.0 && s.signum() == u.signum()
    }

    /// Absolutely continuous density on the closed support; `+∞` where the
    /// denominator vanishes on an endpoint.
    pub fn density(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let slack = SUPPORT_SLACK * (hi - lo).max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutOfSupport { x, lo, hi });
        }
        let d = x - self.alpha;
        let rad = (4.0 * self.omega - d * d).max(0.0).sqrt();
        let den = self.denominator(x);
        if den == 0.0 {
            return Ok(if rad == 0.0 { f64::INFINITY } else { f64::NAN });
        }
        Ok(self.omega1 / (2.0 * PI) * rad / den)
    }

    /// Precomputed quadrature nodes and weights for `∫ f dμ`.
    pub fn rule(&self, spec: &QuadratureSpec) -> QuadratureRule {
        let m = spec.nodes;
        let h = PI / m as f64;
        let half = 2.0 * self.omega.sqrt();
        let scale = self.omega1 / (2.0 * PI) * 4.0 * self.omega * h;
        let mut nodes = Vec::with_capacity(m + 1);
        let mut weights = Vec::with_capacity(m + 1);
        for k in 0..m {
            let phi = (k as f64 + 0.5) * h;
            let x = self.alpha + half * phi.cos();
            let s = phi.sin();
            nodes.push(x);
            weights.push(scale * s * s / self.denominator(x));
        }
        if let Some(a) = self.atom {
            nodes.push(a.location);
            weights.push(a.mass);
        }
        QuadratureRule { nodes, weights }
    }

    /// First `m_max + 1` moments `⟨e₀, Jᵐe₀⟩` of the Jacobi matrix.
    pub fn jacobi_moments(&self, m_max: usize) -> Vec<f64> {
        jacobi_moments(self, m_max)
    }
}

pub fn law_from_pq(params: &PqParams) -> Result<FreeMeixnerLaw> {
    FreeMeixnerLaw::from_pq(params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadratureScheme {
    /// Midpoint rule in `φ` after `x = α + 2√ω cos φ`.
    CosineMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadratureSpec {
    nodes: usize,
    scheme: QuadratureScheme,
}

pub const MIN_QUADRATURE_NODES: usize = 2048;

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParams(format!("quadrature needs at least 2 nodes, got {nodes}")));
        }
        Ok(Self { nodes, scheme: QuadratureScheme::CosineMidpoint })
    }

    /// `max(2048, 16·(n_osc + degree))` nodes.
    pub fn for_integrand(n_osc: usize, degree: usize) -> Self {
        let nodes = MIN_QUADRATURE_NODES.max(16 * (n_osc + degree));
        Self { nodes, scheme: QuadratureScheme::CosineMidpoint }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::for_integrand(0, 0)
    }
}

/// Nodes and weights with the atom (if any) as the last node.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `∫ f dμ = ∫ f ρ dx + w f(ξ)`.
pub fn integrate<F: FnMut(f64) -> f64>(law: &FreeMeixnerLaw, f: F, spec: &QuadratureSpec) -> f64 {
    law.rule(spec).integrate(f)
}

/// Chebyshev polynomial of the second kind `Uₙ(x)`.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `Ũₙ(x) = Uₙ(x/2)`, extended by `Ũ₋₁ = 0`, `Ũ₋₂ = −1`.
fn u_tilde(n: i64, x: f64) -> f64 {
    match n {
        -1 => 0.0,
        -2 => -1.0,
        n if n >= 0 => chebyshev_u(n as usize, 0.5 * x),
        _ => unreachable!("index below -2"),
    }
}

/// Monic `Pₙ(x)` from `xPₙ = Pₙ₊₁ + αₙ₊₁Pₙ + ωₙPₙ₋₁`.
pub fn orth_poly_recurrence(law: &FreeMeixnerLaw, n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let (a_next, w_k) = (law.jacobi(k + 1).0, law.jacobi(k).1);
        let next = (x - a_next) * cur - w_k * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev form of `Pₙ` with `y = (x − α)/√ω`.
pub fn orth_poly_closed_cheb(law: &FreeMeixnerLaw, n: usize, x: f64) -> f64 {
    if n <= 1 {
        return if n == 0 { 1.0 } else { x };
    }
    let (w1, w, a) = (law.omega1, law.omega, law.alpha);
    let sq = w.sqrt();
    let y = (x - a) / sq;
    let n = n as i64;
    sq.powi(n as i32) * u_tilde(n, y)
        + a * sq.powi(n as i32 - 1) * u_tilde(n - 1, y)
        + (w - w1) * sq.powi(n as i32 - 2) * u_tilde(n - 2, y)
}

/// `R±` form of `Pₙ`; defined only for `(x − α)² > 4ω`.
pub fn orth_poly_closed_r(law: &FreeMeixnerLaw, n: usize, x: f64) -> Result<f64> {
    let d = x - law.alpha;
    let disc = d * d - 4.0 * law.omega;
    if !(disc > 0.0) {
        return Err(Error::OutOfDomain(x));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let root = disc.sqrt();
    let (rp, rm) = (d + root, d - root);
    let w1 = law.omega1;
    let e = n as i32 - 1;
    let num = (x * rp - 2.0 * w1) * rp.powi(e) - (x * rm - 2.0 * w1) * rm.powi(e);
    Ok(num / (2f64.powi(e) * (rp - rm)))
}

/// Orthonormal `pₙ = Pₙ/√(ω₁ωⁿ⁻¹)`, evaluated by the normalized recurrence.
///
/// Stable on the support. Outside it, at an atom `pₙ` is the decaying
/// solution of the recurrence and rounding errors grow like `|t₊|ⁿ`, where
/// `t₊ = R₊/(2√ω)` is the dominant characteristic root.
pub fn normalized_p(law: &FreeMeixnerLaw, n: usize, x: f64) -> f64 {
    let mut out = 1.0;
    normalized_p_all(law, n, x, |k, v| {
        if k == n {
            out = v;
        }
    });
    out
}

/// Calls `sink(k, p_k(x))` for `k = 0..=n`.
pub fn normalized_p_all<F: FnMut(usize, f64)>(law: &FreeMeixnerLaw, n: usize, x: f64, mut sink: F) {
    sink(0, 1.0);
    if n == 0 {
        return;
    }
    let s1 = law.omega1.sqrt();
    let s = law.omega.sqrt();
    let (mut prev, mut cur) = (1.0, x / s1);
    sink(1, cur);
    for k in 1..n {
        let sk = if k == 1 { s1 } else { s };
        let a_next = law.jacobi(k + 1).0;
        let next = ((x - a_next) * cur - sk * prev) / s;
        prev = cur;
        cur = next;
        sink(k + 1, cur);
    }
}

/// `pₙ(−q/(1−p)) = (1/√p)(−√(pq)/(1−p))ⁿ` for `n ≥ 1`, `p₀ = 1`.
pub fn special_value(params: &PqParams, n: usize) -> Result<f64> {
    let (p, q) = (params.p(), params.q());
    if !((1.0 - p).powi(2) - p * q > 0.0) {
        return Err(Error::ParamsOutOfRange(format!(
            "(1-p)^2 - pq must be positive, got p = {p}, q = {q}"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    Ok((-(p * q).sqrt() / (1.0 - p)).powi(n as i32) / p.sqrt())
}

/// `⟨e₀, Jᵐe₀⟩` for `m = 0..=m_max`, with `J` the Jacobi matrix truncated
/// to size `m_max + 2`.
pub fn jacobi_moments(law: &FreeMeixnerLaw, m_max: usize) -> Vec<f64> {
    let size = m_max + 2;
    let diag: Vec<f64> = (1..=size).map(|n| law.jacobi(n).0).collect();
    let off: Vec<f64> = (1..size).map(|n| law.jacobi(n).1.sqrt()).collect();
    let mut v = vec![0.0; size];
    v[0] = 1.0;
    let mut out = Vec::with_capacity(m_max + 1);
    for _ in 0..=m_max {
        out.push(v[0]);
        let mut next = vec![0.0; size];
        for i in 0..size {
            next[i] = diag[i] * v[i];
            if i > 0 {
                next[i] += off[i - 1] * v[i - 1];
            }
            if i + 1 < size {
                next[i] += off[i] * v[i + 1];
            }
        }
        v = next;
    }
    out
}
