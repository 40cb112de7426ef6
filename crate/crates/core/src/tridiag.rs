//! Symmetric tridiagonal eigensolver.
//!
//! Eigenvalues come from bisection on Sturm counts, eigenvectors from inverse
//! iteration against a partially pivoted LU of `T - λI`. Vectors belonging to
//! close eigenvalues are re-orthogonalized inside their cluster during the
//! iteration.

use crate::error::{Error, Result};

/// Eigenvalues closer than this fraction of `‖T‖` share a cluster.
const CLUSTER_GAP: f64 = 1e-3;
const INVERSE_ITERATIONS: usize = 4;
const MAX_BISECTIONS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Eigenpairs sorted by descending eigenvalue.
#[derive(Clone, Debug)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`, first non-negligible
    /// component positive.
    pub vectors: Vec<Vec<f64>>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        if diag.iter().chain(&off).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("matrix entries must be finite".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues in ascending order.
    ///
    /// `tol` is the accepted relative bracket width; bisection always runs to
    /// the resolution of the Sturm count, the tolerance only decides whether
    /// the result is reported as converged.
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
        }
        let (glo, ghi) = self.gershgorin();
        let norm = self.norm();
        let pad = 2.0 * f64::EPSILON * norm + self.pivmin();
        let (glo, ghi) = (glo - pad, ghi + pad);
        let n = self.dim();
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            // invariant: count_below(lo) <= k < count_below(hi)
            let mut lo = values.last().copied().unwrap_or(glo).max(glo);
            if self.count_below(lo) > k {
                lo = glo;
            }
            let mut hi = ghi;
            let mut iterations = 0;
            loop {
                let mid = 0.5 * (lo + hi);
                let width = hi - lo;
                let resolution = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin();
                if width <= resolution || mid <= lo || mid >= hi {
                    break;
                }
                if iterations == MAX_BISECTIONS {
                    break;
                }
                if self.count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iterations += 1;
            }
            let lambda = 0.5 * (lo + hi);
            if hi - lo > tol * lambda.abs().max(norm) {
                return Err(Error::ConvergenceFailure(format!(
                    "eigenvalue {k}: bracket [{lo}, {hi}] wider than tolerance {tol}"
                )));
            }
            values.push(lambda);
        }
        Ok(values)
    }

    /// Full eigensystem, eigenvalues descending.
    pub fn eigen(&self, tol: f64) -> Result<TridiagEigen> {
        let mut ascending = self.eigenvalues(tol)?;
        ascending.reverse();
        let values = ascending;
        let n = self.dim();
        let norm = self.norm();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut cluster_start = 0;
        for (k, &lambda) in values.iter().enumerate() {
            if k > 0 && values[k - 1] - lambda > CLUSTER_GAP * norm {
                cluster_start = k;
            }
            let lu = ShiftedLu::factor(self, lambda, norm);
            // deterministic start vector with no special symmetry
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + k * 3) % 11) as f64).collect();
            for _ in 0..INVERSE_ITERATIONS {
                lu.solve(&mut x);
                for v in &vectors[cluster_start..k] {
                    let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
                }
                normalize(&mut x).map_err(|_| {
                    Error::ConvergenceFailure(format!("inverse iteration collapsed for eigenvalue {lambda}"))
                })?;
            }
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if let Some(first) = x.iter().find(|v| v.abs() > 1e-14 * scale) {
                if *first < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
            }
            vectors.push(x);
        }
        Ok(TridiagEigen { values, vectors })
    }
}

fn normalize(x: &mut [f64]) -> std::result::Result<(), ()> {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(());
    }
    x.iter_mut().for_each(|v| *v /= scale);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

/// LU factors of `T - λI` with partial pivoting (upper factor has two
/// super-diagonals).
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, lambda: f64, norm: f64) -> Self {
        let n = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|a| a - lambda).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        // an exact shift leaves a zero pivot; perturb it at roundoff level
        let tiny = f64::EPSILON * norm;
        for di in d.iter_mut() {
            if di.abs() < tiny {
                *di = if *di < 0.0 { -tiny } else { tiny };
            }
        }
        Self { d, du, du2, dl, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // rescale to keep the next solve away from overflow
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 1e100 {
            b.iter_mut().for_each(|v| *v /= scale);
        }
    }
}
