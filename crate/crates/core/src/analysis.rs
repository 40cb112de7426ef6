//! Transition amplitudes, their asymptotics and localization constants.
//!
//! Amplitudes `⟨Ψ_l, UⁿΨ_m⟩` are spectral integrals
//! `∫ T_|n|(λ) p_l(λ) p_m(λ) μ(dλ)` against the free Meixner law `μ`; the
//! atom of `μ` at `ξ = cos θ̃` carries the non-decaying part
//! `w p_l(ξ) p_m(ξ) cos nθ̃`, everything else vanishes as `n → ∞`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meixner::{normalized_p, FreeMeixnerLaw, QuadratureRule, QuadratureSpec};
use crate::reduction::{PqParams, ReducedEvolution, ReducedState, ReducedWalk};
use crate::spidernet::SpidernetParams;

/// `T_|n|(λ) = cos(|n| arccos λ)`.
pub fn chebyshev_t(n: i64, x: f64) -> f64 {
    (n.unsigned_abs() as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

/// `⟨Ψ_l, UⁿΨ_m⟩ = ∫ T_|n|(λ) p_l p_m dμ`.
pub fn amplitude(law: &FreeMeixnerLaw, l: usize, m: usize, n: i64, spec: &QuadratureSpec) -> f64 {
    amplitude_with_rule(law, &law.rule(spec), l, m, n)
}

/// As [`amplitude`], reusing a precomputed rule.
pub fn amplitude_with_rule(law: &FreeMeixnerLaw, rule: &QuadratureRule, l: usize, m: usize, n: i64) -> f64 {
    rule.integrate(|x| chebyshev_t(n, x) * normalized_p(law, l, x) * normalized_p(law, m, x))
}

/// Quadrature spec sized for `amplitude(l, m, n)`.
pub fn amplitude_spec(l: usize, m: usize, n: i64) -> QuadratureSpec {
    QuadratureSpec::for_integrand(n.unsigned_abs() as usize, l + m)
}

/// Where the shift `S` is inserted in `⟨·, Uⁿ·⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ShiftSide {
    /// `⟨SΨ_l, UⁿΨ_m⟩`
    Left,
    /// `⟨Ψ_l, UⁿSΨ_m⟩`
    Right,
    /// `⟨SΨ_l, UⁿSΨ_m⟩`
    Both,
}

impl ShiftSide {
    /// Time index the shifted amplitude reduces to.
    pub fn effective_time(self, n: i64) -> i64 {
        match self {
            ShiftSide::Left => n - 1,
            ShiftSide::Right => n + 1,
            ShiftSide::Both => n,
        }
    }
}

pub fn amplitude_shifted(
    law: &FreeMeixnerLaw,
    l: usize,
    m: usize,
    n: i64,
    side: ShiftSide,
    spec: &QuadratureSpec,
) -> f64 {
    amplitude(law, l, m, side.effective_time(n), spec)
}

/// `⟨Ψ_l, UⁿΨ_m⟩` by evolving `Ψ_m` on the half-line, `n ≥ 0`.
pub fn reduced_amplitude(params: &PqParams, l: usize, m: usize, n: usize) -> C64 {
    let walk = ReducedWalk::infinite(*params);
    let evolved = walk.evolve(&ReducedState::big_psi(params, m), n).expect("infinite line");
    ReducedState::big_psi(params, l).inner(&evolved)
}

/// `⟨Ψ₀, UⁿΨ₀⟩` for `n = 0..=n_max`.
pub fn return_amplitudes(params: &PqParams, n_max: usize) -> Vec<C64> {
    let mut evo = evolution(params);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(evo.state().origin());
    for _ in 0..n_max {
        evo.advance();
        out.push(evo.state().origin());
    }
    out
}

fn evolution(params: &PqParams) -> ReducedEvolution {
    ReducedEvolution::new(ReducedWalk::infinite(*params), ReducedState::initial()).expect("infinite line")
}

fn atom_of(params: &PqParams) -> Result<Option<(f64, f64, FreeMeixnerLaw)>> {
    let law = FreeMeixnerLaw::from_pq(params)?;
    Ok(law.atom().map(|a| (a.location, a.mass, law)))
}

/// `w p_l(ξ) cos nθ̃`; zero when the law has no atom.
pub fn asymptotic_amplitude(params: &PqParams, l: usize, n: i64) -> Result<f64> {
    asymptotic_amplitude_lm(params, l, 0, n)
}

/// `w p_l(ξ) p_m(ξ) cos nθ̃`.
pub fn asymptotic_amplitude_lm(params: &PqParams, l: usize, m: usize, n: i64) -> Result<f64> {
    Ok(match atom_of(params)? {
        Some((xi, w, law)) => w * normalized_p(&law, l, xi) * normalized_p(&law, m, xi) * chebyshev_t(n, xi),
        None => 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    /// Weight of the atom, `max{((b−c)² − c)/((b−c)(b−c+1)), 0}`.
    pub w: f64,
    /// `ξ = cos θ̃ = −1/(b−c)`.
    pub xi: f64,
    pub theta: f64,
    pub localized: bool,
    /// Time-averaged return probability `w²/2`.
    pub qbar_origin: f64,
}

/// Closed-form localization constants of `S(a,b,c)`.
pub fn classify(sp: SpidernetParams) -> LocalizationReport {
    let k = (sp.b() - sp.c()) as i64;
    let num = k * k - sp.c() as i64;
    let w = if num > 0 { num as f64 / (k * (k + 1)) as f64 } else { 0.0 };
    let xi = -1.0 / k as f64;
    LocalizationReport { w, xi, theta: xi.acos(), localized: num > 0, qbar_origin: 0.5 * w * w }
}

/// Localization constants read off the atom of the free Meixner law.
pub fn classify_pq(params: &PqParams) -> Result<LocalizationReport> {
    let (p, q) = (params.p(), params.q());
    let xi = -q / (1.0 - p);
    let w = atom_of(params)?.map_or(0.0, |(_, w, _)| w);
    Ok(LocalizationReport { w, xi, theta: xi.acos(), localized: w > 0.0, qbar_origin: 0.5 * w * w })
}

/// `(1/N) Σ_{n<N} |⟨Ψ₀, UⁿΨ₀⟩|²`.
pub fn cesaro_origin(params: &PqParams, n_avg: usize) -> Result<f64> {
    Ok(*cesaro_origin_running(params, n_avg)?.last().unwrap())
}

/// Running averages `C(1), …, C(N)` of the origin probability.
pub fn cesaro_origin_running(params: &PqParams, n_avg: usize) -> Result<Vec<f64>> {
    if n_avg == 0 {
        return Err(Error::InvalidParams("Cesàro average needs N >= 1".into()));
    }
    let mut evo = evolution(params);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(n_avg);
    for n in 0..n_avg {
        if n > 0 {
            evo.advance();
            evo.truncate(n_avg - 1 - n);
        }
        sum += evo.state().origin().norm_sqr();
        out.push(sum / (n + 1) as f64);
    }
    Ok(out)
}

/// `(1/N) Σ_{n<N} P(X_n ∈ V_l)` for `l = 0..=l_max`.
pub fn cesaro_strata(params: &PqParams, n_avg: usize, l_max: usize) -> Result<Vec<f64>> {
    if n_avg == 0 {
        return Err(Error::InvalidParams("Cesàro average needs N >= 1".into()));
    }
    let mut evo = evolution(params);
    let mut acc = vec![0.0; l_max + 1];
    for n in 0..n_avg {
        if n > 0 {
            evo.advance();
            evo.truncate(l_max + n_avg - 1 - n);
        }
        for (l, a) in acc.iter_mut().enumerate() {
            *a += crate::reduction::stratum_probability(evo.state(), l);
        }
    }
    Ok(acc.into_iter().map(|a| a / n_avg as f64).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalizationBound {
    /// Lower bound on the time-averaged `P(X ∈ V_l)`.
    pub stratum: f64,
    /// Lower bound on the time-averaged `P(X = u)` for `∂(u,o) = l`.
    pub per_vertex: f64,
}

/// Exponential lower bounds on time-averaged probabilities at distance `l ≥ 1`.
pub fn exp_localization_bound(sp: SpidernetParams, l: usize) -> Result<LocalizationBound> {
    let report = classify(sp);
    if !report.localized {
        return Err(Error::NotLocalized(format!("{sp} has b <= c + sqrt(c)")));
    }
    if l == 0 {
        return Err(Error::InvalidParams("the bound holds for l >= 1".into()));
    }
    let (a, b, c) = (sp.a() as f64, sp.b() as f64, sp.c() as f64);
    let k2 = (b - c) * (b - c);
    let w2 = report.w * report.w;
    Ok(LocalizationBound {
        stratum: b / (2.0 * c) * w2 * (c / k2).powi(l as i32),
        per_vertex: b / (2.0 * a) * w2 * (1.0 / k2).powi(l as i32),
    })
}

/// Return probability `∫ λⁿ μ(dλ)` of the isotropic random walk.
pub fn random_walk_return(law: &FreeMeixnerLaw, n: usize, spec: &QuadratureSpec) -> f64 {
    law.rule(spec).integrate(|x| x.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sixty_three() -> (SpidernetParams, PqParams, FreeMeixnerLaw) {
        let sp = SpidernetParams::new(4, 6, 3).unwrap();
        let p = PqParams::from_spidernet(sp);
        (sp, p, FreeMeixnerLaw::from_pq(&p).unwrap())
    }

    #[test]
    fn trivial_amplitudes() {
        let (_, _, law) = sixty_three();
        let spec = QuadratureSpec::default();
        assert!((amplitude(&law, 0, 0, 0, &spec) - 1.0).abs() < 1e-12);
        assert!(amplitude(&law, 0, 1, 0, &spec).abs() < 1e-12);
        assert!(amplitude(&law, 0, 0, 1, &spec).abs() < 1e-12);
    }

    #[test]
    fn integral_matches_reduced_walk() {
        let (_, p, law) = sixty_three();
        let direct = return_amplitudes(&p, 50);
        let rule = law.rule(&amplitude_spec(0, 0, 50));
        for (n, z) in direct.iter().enumerate() {
            assert!(z.im.abs() < 1e-14);
            let integral = amplitude_with_rule(&law, &rule, 0, 0, n as i64);
            assert!((integral - z.re).abs() < 1e-8, "n = {n}");
        }
        for (l, m, n) in [(1, 0, 7), (2, 3, 11), (4, 1, 20)] {
            let integral = amplitude(&law, l, m, n as i64, &amplitude_spec(l, m, n as i64));
            assert!((integral - reduced_amplitude(&p, l, m, n).re).abs() < 1e-8);
        }
    }

    #[test]
    fn shifted_amplitudes_match_explicit_shifts() {
        let (_, p, law) = sixty_three();
        let walk = ReducedWalk::infinite(p);
        let spec = QuadratureSpec::for_integrand(40, 10);
        for (l, m, n) in [(0usize, 0usize, 1usize), (1, 2, 5), (3, 1, 9)] {
            let sl = walk.shift(&ReducedState::big_psi(&p, l)).unwrap();
            let sm = walk.shift(&ReducedState::big_psi(&p, m)).unwrap();
            let pl = ReducedState::big_psi(&p, l);
            let um = walk.evolve(&ReducedState::big_psi(&p, m), n).unwrap();
            let usm = walk.evolve(&sm, n).unwrap();
            let cases = [
                (ShiftSide::Left, sl.inner(&um)),
                (ShiftSide::Right, pl.inner(&usm)),
                (ShiftSide::Both, sl.inner(&usm)),
            ];
            for (side, want) in cases {
                let got = amplitude_shifted(&law, l, m, n as i64, side, &spec);
                assert!((got - want.re).abs() < 1e-8, "{side:?} ({l},{m},{n})");
            }
        }
        let plain = amplitude(&law, 2, 1, 0, &spec);
        assert!((amplitude_shifted(&law, 2, 1, 1, ShiftSide::Left, &spec) - plain).abs() < 1e-14);
    }

    #[test]
    fn asymptotics_of_sixty_three() {
        let (_, p, _) = sixty_three();
        let theta = (-1.0f64 / 3.0).acos();
        for n in [0i64, 1, 5, 100] {
            let want = 0.5 * (n as f64 * theta).cos();
            assert!((asymptotic_amplitude(&p, 0, n).unwrap() - want).abs() < 1e-14);
        }
        let tree = PqParams::from_spidernet(SpidernetParams::new(3, 3, 2).unwrap());
        assert_eq!(asymptotic_amplitude(&tree, 0, 17).unwrap(), 0.0);
    }

    #[test]
    fn late_amplitudes_approach_asymptotics() {
        let (_, p, law) = sixty_three();
        let direct = return_amplitudes(&p, 1000);
        let worst = (900..=1000)
            .map(|n| (direct[n].re - asymptotic_amplitude(&p, 0, n as i64).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-2, "{worst}");
        let rule = law.rule(&amplitude_spec(0, 0, 1000));
        assert!((amplitude_with_rule(&law, &rule, 0, 0, 1000) - direct[1000].re).abs() < 1e-8);
    }

    #[test]
    fn classify_known_cases() {
        let r = classify(SpidernetParams::new(4, 6, 3).unwrap());
        assert_eq!((r.w, r.xi, r.qbar_origin, r.localized), (0.5, -1.0 / 3.0, 0.125, true));
        let r = classify(SpidernetParams::new(10, 12, 9).unwrap());
        assert!(!r.localized && r.w == 0.0);
        for b in 2..20 {
            assert!(!classify(SpidernetParams::new(2, b, b - 1).unwrap()).localized);
        }
    }

    #[test]
    fn classify_pq_agrees_with_closed_form() {
        for b in 2..=30usize {
            for c in 1..b {
                let sp = SpidernetParams::new(1, b, c).unwrap();
                let a = classify(sp);
                let z = classify_pq(&PqParams::from_spidernet(sp)).unwrap();
                assert_eq!(a.localized, z.localized, "{sp}");
                assert!((a.w - z.w).abs() < 1e-14 && (a.xi - z.xi).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cesaro_small_cases() {
        let (_, p, _) = sixty_three();
        assert_eq!(cesaro_origin(&p, 1).unwrap(), 1.0);
        assert_eq!(cesaro_origin(&p, 2).unwrap(), 0.5);
        assert!(cesaro_origin(&p, 0).is_err());
        let strata = cesaro_strata(&p, 50, 3).unwrap();
        assert!((strata[0] - cesaro_origin(&p, 50).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn truncated_averages_are_exact() {
        let (_, p, _) = sixty_three();
        let n_avg = 300;
        let mut evo = evolution(&p);
        let mut sums = [0.0; 4];
        for n in 0..n_avg {
            if n > 0 {
                evo.advance();
            }
            for (l, s) in sums.iter_mut().enumerate() {
                *s += crate::reduction::stratum_probability(evo.state(), l);
            }
        }
        let strata = cesaro_strata(&p, n_avg, 3).unwrap();
        for l in 0..4 {
            assert!((strata[l] - sums[l] / n_avg as f64).abs() < 1e-15);
        }
        assert!((cesaro_origin(&p, n_avg).unwrap() - sums[0] / n_avg as f64).abs() < 1e-15);
    }

    #[test]
    fn bounds() {
        let sp = SpidernetParams::new(4, 6, 3).unwrap();
        let b = exp_localization_bound(sp, 1).unwrap();
        assert!((b.stratum - 1.0 / 12.0).abs() < 1e-15);
        assert!((b.per_vertex - 1.0 / 12.0 * 3.0 / 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            exp_localization_bound(SpidernetParams::new(3, 3, 2).unwrap(), 1),
            Err(Error::NotLocalized(_))
        ));
    }

    #[test]
    fn random_walk_moments() {
        let (_, _, law) = sixty_three();
        let spec = QuadratureSpec::default();
        let oracle = law.jacobi_moments(20);
        for (n, want) in oracle.iter().enumerate() {
            assert!((random_walk_return(&law, n, &spec) - want).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn amplitude_symmetries(l in 0usize..6, m in 0usize..6, n in 0i64..40) {
            let (_, _, law) = sixty_three();
            let spec = amplitude_spec(l, m, n);
            let a = amplitude(&law, l, m, n, &spec);
            prop_assert!(a.abs() <= 1.0 + 1e-10);
            prop_assert!((a - amplitude(&law, m, l, n, &spec)).abs() < 1e-12);
            prop_assert!((a - amplitude(&law, l, m, -n, &spec)).abs() < 1e-15);
        }

        #[test]
        fn classifier_boundary(b in 2usize..=50, c_frac in 0.0f64..1.0) {
            let c = 1 + ((b - 2) as f64 * c_frac) as usize;
            let r = classify(SpidernetParams::new(1, b, c).unwrap());
            prop_assert_eq!(r.localized, b as f64 > c as f64 + (c as f64).sqrt());
            prop_assert!(r.qbar_origin >= 0.0 && r.qbar_origin <= 0.5);
        }
    }
}
