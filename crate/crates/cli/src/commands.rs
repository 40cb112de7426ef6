//! Subcommand bodies. Each returns a [`Table`].

use anyhow::{bail, Result};

use spiderwalk::analysis::{
    amplitude_spec, amplitude_with_rule, asymptotic_amplitude_lm, cesaro_origin, classify, classify_pq,
    random_walk_return, return_amplitudes,
};
use spiderwalk::grover::{isotropic_initial_state, GroverWalk};
use spiderwalk::meixner::{
    normalized_p, orth_poly_closed_cheb, orth_poly_recurrence, special_value, FreeMeixnerLaw, QuadratureSpec,
};
use spiderwalk::reduction::{
    cutoff_trace, embed, origin_probability, stratum_probability, u_eigensystem, PqParams, ReducedEvolution,
    ReducedState, ReducedWalk,
};
use spiderwalk::spidernet::{build_spidernet, SpidernetParams};
use spiderwalk::C64;

use crate::output::{Cell, Table};

/// A walk given either as a spidernet or as raw `(p, q, r)`.
#[derive(Clone, Copy, Debug)]
pub enum Model {
    Spidernet(SpidernetParams),
    Pq(PqParams),
}

impl Model {
    pub fn params(&self) -> PqParams {
        match self {
            Model::Spidernet(sp) => PqParams::from_spidernet(*sp),
            Model::Pq(p) => *p,
        }
    }

    pub fn spidernet(&self, what: &str) -> Result<SpidernetParams> {
        match self {
            Model::Spidernet(sp) => Ok(*sp),
            Model::Pq(_) => bail!("{what} needs a spidernet `A B C`, not --pqr"),
        }
    }
}

fn stratum_columns(strata: usize) -> Vec<String> {
    let mut cols = vec!["n".to_string(), "p_origin".to_string()];
    cols.extend((1..=strata).map(|l| format!("p_v{l}")));
    cols
}

pub fn simulate(model: Model, steps: usize, strata: usize, full: bool) -> Result<Table> {
    let cols = stratum_columns(strata);
    let mut table = Table { columns: cols, rows: Vec::with_capacity(steps + 1) };
    if full {
        let sp = model.spidernet("--full")?;
        let g = build_spidernet(sp, steps + 2)?;
        let psi0 = isotropic_initial_state(&g)?;
        let mut walk = GroverWalk::new(&g, &psi0)?;
        for n in 0..=steps {
            if n > 0 {
                walk.advance()?;
            }
            let dist = walk.distribution();
            let mut row: Vec<Cell> = vec![n.into(), dist.stratum(&g, 0).into()];
            row.extend((1..=strata).map(|l| Cell::from(if l <= g.radius() { dist.stratum(&g, l) } else { 0.0 })));
            table.push(row);
        }
    } else {
        let mut ev = ReducedEvolution::new(ReducedWalk::infinite(model.params()), ReducedState::initial())?;
        for n in 0..=steps {
            if n > 0 {
                ev.advance();
            }
            let s = ev.state();
            let mut row: Vec<Cell> = vec![n.into(), origin_probability(s).into()];
            row.extend((1..=strata).map(|l| Cell::from(stratum_probability(s, l))));
            table.push(row);
        }
    }
    Ok(table)
}

pub fn spectrum(model: Model, cutoff: usize) -> Result<Table> {
    let params = model.params();
    let eig = u_eigensystem(&params, cutoff)?;
    let trace = cutoff_trace(&params, cutoff)?;
    let expected = (2.0 * params.r() - 1.0) * (cutoff as f64 - 1.0);
    let mut table = Table::new(&["phase", "re", "im", "multiplicity", "trace", "trace_expected"]);
    let mut phases: Vec<(f64, usize)> = vec![(0.0, 1)];
    for &t in &eig.thetas {
        phases.push((t, 1));
        phases.push((-t, 1));
    }
    if eig.minus_one_multiplicity > 0 {
        phases.push((std::f64::consts::PI, eig.minus_one_multiplicity));
    }
    phases.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (phase, mult) in phases {
        let z = if mult > 1 || phase == std::f64::consts::PI { C64::new(-1.0, 0.0) } else { C64::from_polar(1.0, phase) };
        table.push(vec![phase.into(), z.re.into(), z.im.into(), mult.into(), trace.into(), expected.into()]);
    }
    Ok(table)
}

pub fn amplitude(model: Model, l: usize, m: usize, n_max: usize, nodes: Option<usize>) -> Result<Table> {
    let params = model.params();
    let law = FreeMeixnerLaw::from_pq(&params)?;
    let spec = match nodes {
        Some(k) => QuadratureSpec::new(k)?,
        None => amplitude_spec(l, m, n_max as i64),
    };
    let rule = law.rule(&spec);
    let psi_l = ReducedState::big_psi(&params, l);
    let mut ev = ReducedEvolution::new(ReducedWalk::infinite(params), ReducedState::big_psi(&params, m))?;
    let mut table = Table::new(&["n", "integral", "reduced", "abs_diff", "asymptotic"]);
    for n in 0..=n_max {
        if n > 0 {
            ev.advance();
        }
        let integral = amplitude_with_rule(&law, &rule, l, m, n as i64);
        let reduced = psi_l.inner(ev.state());
        let asym = asymptotic_amplitude_lm(&params, l, m, n as i64)?;
        table.push(vec![
            n.into(),
            integral.into(),
            reduced.re.into(),
            (reduced - integral).norm().into(),
            asym.into(),
        ]);
    }
    Ok(table)
}

const LOCALIZE_COLUMNS: [&str; 8] = ["a", "b", "c", "w", "xi", "theta", "localized", "qbar_origin"];

fn localize_row(a: Cell, b: Cell, c: Cell, rep: spiderwalk::analysis::LocalizationReport) -> Vec<Cell> {
    vec![a, b, c, rep.w.into(), rep.xi.into(), rep.theta.into(), rep.localized.into(), rep.qbar_origin.into()]
}

pub fn localize(model: Model) -> Result<Table> {
    let mut table = Table::new(&LOCALIZE_COLUMNS);
    match model {
        Model::Spidernet(sp) => {
            table.push(localize_row(sp.a().into(), sp.b().into(), sp.c().into(), classify(sp)));
        }
        Model::Pq(p) => {
            let row = localize_row("".into(), (1.0 / p.q()).into(), (p.p() / p.q()).into(), classify_pq(&p)?);
            table.push(row);
        }
    }
    Ok(table)
}

/// Every `2 ≤ b ≤ b_max`, `1 ≤ c ≤ min(c_max, b − 1)`; the answer does not depend on `a`.
pub fn localize_sweep(b_max: usize, c_max: usize) -> Result<Table> {
    let mut table = Table::new(&LOCALIZE_COLUMNS);
    for b in 2..=b_max {
        for c in 1..=c_max.min(b - 1) {
            // a = b − c = d + 1 always admits the circulant wiring
            let sp = SpidernetParams::new(b - c, b, c)?;
            table.push(localize_row("".into(), b.into(), c.into(), classify(sp)));
        }
    }
    Ok(table)
}

pub const FIGURE_RANGE: (usize, usize) = (620, 650);

/// `P(X_n = o)` on `S(4,6,3)` beside the envelope `(1/4) cos²(nθ̃)`.
pub fn figure2(from: usize, to: usize) -> Result<Table> {
    if from > to {
        bail!("empty range {from}..={to}");
    }
    let sp = SpidernetParams::new(4, 6, 3)?;
    let params = PqParams::from_spidernet(sp);
    let rep = classify(sp);
    let amps = return_amplitudes(&params, to);
    let mut table = Table::new(&["n", "p_origin", "envelope", "qbar"]);
    for (n, amp) in amps.iter().enumerate().take(to + 1).skip(from) {
        let env = 0.25 * (n as f64 * rep.theta).cos().powi(2);
        table.push(vec![n.into(), amp.norm_sqr().into(), env.into(), rep.qbar_origin.into()]);
    }
    Ok(table)
}

pub fn rwalk(model: Model, n_max: usize, nodes: Option<usize>) -> Result<Table> {
    let law = FreeMeixnerLaw::from_pq(&model.params())?;
    let spec = match nodes {
        Some(k) => QuadratureSpec::new(k)?,
        None => QuadratureSpec::for_integrand(0, n_max),
    };
    let moments = law.jacobi_moments(n_max);
    let mut table = Table::new(&["n", "return_probability", "moment", "abs_diff"]);
    for n in 0..=n_max {
        let quad = random_walk_return(&law, n, &spec);
        table.push(vec![n.into(), quad.into(), moments[n].into(), (quad - moments[n]).abs().into()]);
    }
    Ok(table)
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

fn run_checks() -> Result<Vec<Check>> {
    let sp = SpidernetParams::new(4, 6, 3)?;
    let params = PqParams::from_spidernet(sp);
    let law = FreeMeixnerLaw::from_pq(&params)?;
    let mut checks = vec![];

    let rep = classify(sp);
    checks.push(Check { name: "classify S(4,6,3) w = 1/2", value: (rep.w - 0.5).abs(), tol: 1e-15 });
    checks.push(Check { name: "classify S(4,6,3) qbar = 1/8", value: (rep.qbar_origin - 0.125).abs(), tol: 1e-15 });
    let boundary = [(6, 4), (12, 9), (20, 16)]
        .iter()
        .filter(|&&(b, c)| classify(SpidernetParams::new(2, b, c).unwrap()).localized)
        .count();
    checks.push(Check { name: "classifier boundary b = c + sqrt(c)", value: boundary as f64, tol: 0.0 });

    let g = build_spidernet(sp, 10)?;
    let psi0 = isotropic_initial_state(&g)?;
    let mut walk = GroverWalk::new(&g, &psi0)?;
    let mut ev = ReducedEvolution::new(ReducedWalk::infinite(params), ReducedState::initial())?;
    let rule = law.rule(&amplitude_spec(0, 0, 8));
    let mut full_vs_reduced: f64 = 0.0;
    let mut reduced_vs_integral: f64 = 0.0;
    for n in 0..=8 {
        if n > 0 {
            walk.advance()?;
            ev.advance();
        }
        full_vs_reduced = full_vs_reduced.max(embed(&g, ev.state())?.max_abs_diff(&walk.state()));
        let integral = amplitude_with_rule(&law, &rule, 0, 0, n);
        reduced_vs_integral = reduced_vs_integral.max((ev.state().origin() - integral).norm());
    }
    checks.push(Check { name: "full graph vs ladder walk, n <= 8", value: full_vs_reduced, tol: 1e-12 });
    checks.push(Check { name: "ladder walk vs spectral integral, n <= 8", value: reduced_vs_integral, tol: 1e-10 });

    let cutoff = 6;
    let eig = u_eigensystem(&params, cutoff)?;
    let expected = (2.0 * params.r() - 1.0) * (cutoff as f64 - 1.0);
    checks.push(Check { name: "Tr U_6 = (2r-1)(N-1)", value: (cutoff_trace(&params, cutoff)? - expected).abs(), tol: 1e-12 });
    checks.push(Check {
        name: "multiplicity of -1 is N-2",
        value: (eig.minus_one_multiplicity as f64 - (cutoff - 2) as f64).abs(),
        tol: 0.0,
    });
    checks.push(Check { name: "U_6 eigenvector residual", value: eig.residual()?, tol: 1e-12 });

    let mut op: f64 = 0.0;
    for n in 0..=10 {
        for x in [-0.9, -0.3, 0.2, 0.7] {
            op = op.max((orth_poly_recurrence(&law, n, x) - orth_poly_closed_cheb(&law, n, x)).abs());
        }
    }
    checks.push(Check { name: "orthogonal polynomial closed form", value: op, tol: 1e-12 });

    let mass = random_walk_return(&law, 0, &QuadratureSpec::default());
    checks.push(Check { name: "spectral measure total mass", value: (mass - 1.0).abs(), tol: 1e-12 });

    let xi = law.atom().map_or(0.0, |a| a.location);
    let mut sv: f64 = 0.0;
    for n in 0..=12 {
        sv = sv.max((special_value(&params, n)? - normalized_p(&law, n, xi)).abs());
    }
    checks.push(Check { name: "normalized polynomials at the atom", value: sv, tol: 1e-9 });

    let cesaro = cesaro_origin(&params, 4000)?;
    checks.push(Check { name: "Cesaro origin average near 1/8", value: (cesaro - 0.125).abs(), tol: 2e-3 });
    Ok(checks)
}

/// Quick self-test; the `passed` column decides the exit status.
pub fn verify() -> Result<(Table, bool)> {
    let mut table = Table::new(&["check", "value", "tolerance", "passed"]);
    let mut all = true;
    for c in run_checks()? {
        let ok = c.value <= c.tol;
        all &= ok;
        table.push(vec![c.name.into(), c.value.into(), c.tol.into(), ok.into()]);
    }
    Ok((table, all))
}

pub fn graph(model: Model, radius: usize) -> Result<String> {
    let g = build_spidernet(model.spidernet("graph")?, radius)?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(a: usize, b: usize, c: usize) -> Model {
        Model::Spidernet(SpidernetParams::new(a, b, c).unwrap())
    }

    #[test]
    fn full_and_reduced_simulations_agree() {
        let full = simulate(sp(4, 6, 3), 6, 3, true).unwrap();
        let reduced = simulate(sp(4, 6, 3), 6, 3, false).unwrap();
        for (x, y) in full.rows.iter().zip(&reduced.rows) {
            for (u, v) in x.iter().zip(y).skip(1) {
                let (Cell::Num(u), Cell::Num(v)) = (u, v) else { panic!() };
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn figure_has_thirty_one_rows() {
        let t = figure2(FIGURE_RANGE.0, FIGURE_RANGE.1).unwrap();
        assert_eq!(t.rows.len(), 31);
        assert_eq!(t.rows[0][0], Cell::Int(620));
    }

    #[test]
    fn spectrum_counts_every_eigenvalue() {
        let t = spectrum(sp(4, 6, 3), 5).unwrap();
        let total: i64 = t.rows.iter().map(|r| if let Cell::Int(k) = r[3] { k } else { 0 }).sum();
        assert_eq!(total, 14);
    }

    #[test]
    fn sweep_skips_nothing() {
        let t = localize_sweep(6, 5).unwrap();
        assert_eq!(t.rows.len(), 1 + 2 + 3 + 4 + 5);
    }

    #[test]
    fn verify_passes() {
        let (t, ok) = verify().unwrap();
        assert!(ok, "{}", t.to_csv());
    }

    #[test]
    fn pq_models_reject_graph_commands() {
        let m = Model::Pq(PqParams::new(0.5, 1.0 / 6.0).unwrap());
        assert!(graph(m, 2).is_err());
        assert!(simulate(m, 3, 1, true).is_err());
        assert_eq!(simulate(m, 3, 1, false).unwrap().rows.len(), 4);
    }
}
