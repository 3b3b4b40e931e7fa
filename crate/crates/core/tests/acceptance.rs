//! Acceptance criteria 1–8. Prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails. Tolerances are pinned here, next to each check.

use biharmonic_certify::cli::tables::{table, EPSILONS, TABLE1, TABLE2, TABLE3};
use biharmonic_certify::expr::{differentiate, Expr, Point, Var, VarSet};
use biharmonic_certify::fields::{div_div, hessian, Domain, PiecewiseScalarField};
use biharmonic_certify::majorant::{beta_grid, majorant_components, majorant_eval};
use biharmonic_certify::measures::{
    check_feasibility, energy_dual, energy_primal, exact_energy, identity_rhs, mu_dual, mu_primal, verify_identity,
};
use biharmonic_certify::problems::{builtin, builtin_ids, ApproximationHandle, ProblemInstance};
use biharmonic_certify::quadrature::{integrate_1d, integrate_region, Geometry, QuadratureConfig};

/// Collects failed sub-checks of one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    count: usize,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// `|got − want| ≤ rel·|want|`.
    fn rel(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        let dev = (got - want).abs() / want.abs();
        self.expect(dev <= rel, || format!("{name}: {got:.6} vs {want} (rel {dev:.2e} > {rel:.0e})"));
    }

    /// `|got − want| ≤ abs`.
    fn abs(&mut self, name: &str, got: f64, want: f64, abs: f64) {
        let dev = (got - want).abs();
        self.expect(dev <= abs, || format!("{name}: {got:.6} vs {want} (abs {dev:.2e} > {abs:.0e})"));
    }
}

type Outcome = Result<Check, Box<dyn std::error::Error>>;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn primal<'a>(h: &'a ApproximationHandle) -> &'a PiecewiseScalarField {
    h.primal().expect("primal approximation")
}

/// Criterion 1: error identity for (v₁, n*) in 1D.
fn criterion_1() -> Outcome {
    const TOL: f64 = 5e-3;
    let p = builtin("model_1d")?;
    let (v, n) = (p.approx("v1", None)?, p.approx("nstar", None)?);
    let r = verify_identity(&p, primal(&v), n.dual().unwrap(), &cfg())?;
    let mut c = Check::default();
    c.rel("mu quadratic", r.lhs_primal.quadratic.value, 125.156, TOL);
    c.rel("mu_phi", r.lhs_primal.nonlinear.value, 152.89, TOL);
    c.rel("mu* quadratic", r.lhs_dual.quadratic.value, 74.74, TOL);
    c.rel("mu*_phi", r.lhs_dual.nonlinear.value, 156.8, TOL);
    c.rel("rhs quadratic", r.rhs.quadratic.value, 23.063, TOL);
    c.rel("rhs obstacle", r.rhs.obstacle.value, 486.515, TOL);
    let gap = (r.lhs_total.value - r.rhs.total.value).abs();
    c.expect(gap <= 1e-6 * r.rhs.total.value, || format!("|lhs - rhs| = {gap:.2e}"));
    c.expect(r.feasible, || "n* reported infeasible".into());
    Ok(c)
}

/// Compares a printed cell; printed zeros are compared absolutely.
fn cell(c: &mut Check, name: String, got: f64, printed: f64) {
    if printed == 0.0 {
        c.abs(&name, got, 0.0, 1e-9);
    } else {
        c.rel(&name, got, printed, 5e-3);
    }
}

/// Criterion 2: tables 1–3.
fn criterion_2() -> Outcome {
    let p = builtin("model_1d")?;
    let ju = exact_energy(&p, &cfg())?;
    let mut c = Check::default();
    for (i, &eps) in EPSILONS.iter().enumerate() {
        let v = p.approx("v_eps", Some(eps))?;
        let n = p.approx("n_eps", Some(eps))?;
        let (v, n) = (primal(&v), n.dual().unwrap());

        let m = mu_primal(&p, v, &cfg())?;
        let t1 = TABLE1[i];
        cell(&mut c, format!("T1 eps={eps} quadratic"), m.quadratic.value, t1[0]);
        cell(&mut c, format!("T1 eps={eps} mu_phi"), m.nonlinear.value, t1[1]);
        cell(&mut c, format!("T1 eps={eps} J gap"), (energy_primal(&p, v, &cfg())? - ju).value, t1[2]);
        // the printed share at eps = 0.05 contradicts its own columns; use the ratio of the printed columns
        let k_ref = if eps == 0.05 { 100.0 * t1[1] / t1[2] } else { t1[3] };
        cell(&mut c, format!("T1 eps={eps} k"), m.nonlinear_percent(), k_ref);

        let d = mu_dual(&p, n, &cfg())?;
        let t2 = TABLE2[i];
        cell(&mut c, format!("T2 eps={eps} quadratic"), d.breakdown.quadratic.value, t2[0]);
        cell(&mut c, format!("T2 eps={eps} mu*_phi"), d.breakdown.nonlinear.value, t2[1]);
        let dual = energy_dual(&p, n, &cfg())?.finite().ok_or("n_eps infeasible")?;
        cell(&mut c, format!("T2 eps={eps} I* gap"), (ju - dual).value, t2[2]);
        cell(&mut c, format!("T2 eps={eps} k"), d.breakdown.nonlinear_percent(), t2[3]);

        let rhs = identity_rhs(&p, v, n, &cfg())?;
        let lhs = m.total.value + d.breakdown.total.value;
        let t3 = TABLE3[i];
        cell(&mut c, format!("T3 eps={eps} quadratic"), rhs.quadratic.value, t3[0]);
        cell(&mut c, format!("T3 eps={eps} N"), rhs.obstacle.value, t3[1]);
        cell(&mut c, format!("T3 eps={eps} rhs"), rhs.total.value, t3[2]);
        cell(&mut c, format!("T3 eps={eps} mu+mu*"), lhs, t3[3]);
        let dev = (lhs - rhs.total.value).abs() / rhs.total.value;
        c.expect(dev <= 1e-6, || format!("T3 eps={eps}: lhs/rhs rel {dev:.2e}"));
    }
    let rows = table(1, &cfg())?;
    let flagged = rows.iter().find(|r| r.quantity == "eps=0.05 k_percent").is_some_and(|r| !r.note.is_empty());
    c.expect(flagged, || "k(0.05) discrepancy not flagged in table 1 output".into());
    Ok(c)
}

/// Fits `A₀ + A₁β + A₂/β` through three points.
fn fit(points: [(f64, f64); 3]) -> [f64; 3] {
    let mut m: Vec<[f64; 4]> = points.iter().map(|&(b, y)| [1.0, b, 1.0 / b, y]).collect();
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

/// Criterion 3: majorant coefficients for (v₁, ñ*).
fn criterion_3() -> Outcome {
    let p = builtin("model_1d")?;
    let (v, n) = (p.approx("v1", None)?, p.approx("ntilde", None)?);
    let mut points = [(0.25, 0.0), (0.5, 0.0), (1.0, 0.0)];
    for pt in &mut points {
        pt.1 = majorant_eval(&p, primal(&v), n.dual().unwrap(), pt.0, &cfg())?.majorant_total.value;
    }
    let [a0, a1, a2] = fit(points);
    let mut c = Check::default();
    c.rel("A0", a0, 352.44, 5e-3);
    c.rel("A1", a1, 33.08, 5e-3);
    c.rel("A2", a2, 189.22, 5e-3);
    Ok(c)
}

fn built_in_pairs(p: &ProblemInstance) -> Result<Vec<(ApproximationHandle, ApproximationHandle)>, Box<dyn std::error::Error>> {
    let mut primals = Vec::new();
    let mut duals = Vec::new();
    for spec in p.approximations() {
        let handles: Vec<ApproximationHandle> = if spec.params.is_empty() {
            vec![p.approx(&spec.name, None)?]
        } else {
            EPSILONS.iter().chain([&0.5]).map(|&e| p.approx(&spec.name, Some(e))).collect::<Result<_, _>>()?
        };
        for h in handles {
            if h.primal().is_some() {
                primals.push(h);
            } else {
                duals.push(h);
            }
        }
    }
    Ok(primals.iter().flat_map(|v| duals.iter().map(move |n| (v.clone(), n.clone()))).collect())
}

/// Criterion 4: the majorant bounds the literal lhs; the compatibility lhs vs the printed line.
fn criterion_4() -> Outcome {
    let mut c = Check::default();
    let betas = beta_grid(0.05, 1.0, 20)?;
    for id in builtin_ids() {
        let p = builtin(id)?;
        for (v, n) in built_in_pairs(&p)? {
            let comps = majorant_components(&p, primal(&v), n.dual().unwrap(), &cfg())?;
            for &beta in &betas {
                let r = comps.report(beta)?;
                let lhs = r.lhs_total.unwrap();
                let budget = r.majorant_total.error + lhs.error + 64.0 * f64::EPSILON * lhs.value.abs();
                c.expect(lhs.value <= r.majorant_total.value + budget, || {
                    format!("{id} ({}, {}) beta={beta}: lhs {} > M {}", v.label(), n.label(), lhs.value, r.majorant_total.value)
                });
            }
        }
    }
    let p = builtin("model_1d")?;
    let (v, n) = (p.approx("v1", None)?, p.approx("ntilde", None)?);
    let comps = majorant_components(&p, primal(&v), n.dual().unwrap(), &cfg())?;
    c.rel("compat lhs at beta=0", comps.exact.unwrap().lhs_compat(0.0).value, 524.95, 5e-3);
    c.rel("compat efficiency beta=0.5", comps.report(0.5)?.efficiency_compat.unwrap(), 1.66, 1e-2);
    c.rel("compat efficiency beta=1", comps.report(1.0)?.efficiency_compat.unwrap(), 1.53, 1e-2);
    Ok(c)
}

/// Criterion 5: circular plate values (published to two decimals).
fn criterion_5() -> Outcome {
    const TOL: f64 = 0.05;
    let p = builtin("circular_plate")?;
    let (v, n) = (p.approx("v2", None)?, p.approx("nhat", None)?);
    let r = verify_identity(&p, primal(&v), n.dual().unwrap(), &cfg())?;
    let mut c = Check::default();
    c.abs("1/2 |hess(u - v2)|^2", r.lhs_primal.quadratic.value, 157.19, TOL);
    c.abs("mu* quadratic", r.lhs_dual.quadratic.value, 14.84, TOL);
    c.abs("mu*_phi", r.lhs_dual.nonlinear.value, 63.46, TOL);
    c.abs("lhs", r.lhs_total.value, 235.49, TOL);
    c.abs("rhs", r.rhs.total.value, 235.49, TOL);
    c.abs("rhs quadratic", r.rhs.quadratic.value, 111.15, TOL);
    c.abs("rhs obstacle", r.rhs.obstacle.value, 124.34, TOL);
    Ok(c)
}

/// Criterion 6: the violation set of ñ*.
fn criterion_6() -> Outcome {
    let p = builtin("model_1d")?;
    let n = p.approx("ntilde", None)?;
    let report = check_feasibility(n.dual().unwrap(), &p.f)?;
    let mut c = Check::default();
    c.expect(!report.feasible, || "ntilde reported feasible".into());
    let comps = report.violation.components();
    c.expect(comps.len() == 2, || format!("violation set {}", report.violation));
    if comps.len() == 2 {
        c.abs("left component end", comps[0].1, -17.0 / 18.0, 1e-6);
        c.abs("right component start", comps[1].0, 17.0 / 18.0, 1e-6);
        c.abs("left boundary", comps[0].0, -1.0, 1e-12);
        c.abs("right boundary", comps[1].1, 1.0, 1e-12);
    }
    Ok(c)
}

/// Criterion 7: measures equal the primal and dual energy gaps.
fn criterion_7() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut c = Check::default();
    for id in builtin_ids() {
        let p = builtin(id)?;
        let ju = exact_energy(&p, &cfg())?.value;
        let mut seen = std::collections::BTreeSet::new();
        for (v, n) in built_in_pairs(&p)? {
            if seen.insert(v.label()) {
                let mu = mu_primal(&p, primal(&v), &cfg())?.total.value;
                let gap = energy_primal(&p, primal(&v), &cfg())?.value - ju;
                c.rel(&format!("{id} mu({})", v.label()), gap, mu, TOL);
            }
            if seen.insert(n.label()) {
                if let Some(dual) = energy_dual(&p, n.dual().unwrap(), &cfg())?.finite() {
                    let mu = mu_dual(&p, n.dual().unwrap(), &cfg())?.breakdown.total.value;
                    c.rel(&format!("{id} mu*({})", n.label()), ju - dual.value, mu, TOL);
                }
            }
        }
    }
    Ok(c)
}

/// Every piece expression of every built-in field.
fn built_in_expressions() -> Result<Vec<(String, Domain, f64, f64, Expr)>, Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    for id in builtin_ids() {
        let p = builtin(id)?;
        let mut scalars = vec![("f".to_string(), p.f.clone()), ("phi".to_string(), p.phi.clone())];
        let mut matrices = Vec::new();
        if let Some(e) = &p.exact {
            scalars.push(("u".into(), e.u.clone()));
            matrices.push(("pstar".to_string(), e.p_star.clone()));
        }
        for (v, n) in built_in_pairs(&p)? {
            scalars.push((v.label(), primal(&v).clone()));
            matrices.push((n.label(), n.dual().unwrap().clone()));
        }
        for (name, field) in scalars {
            for piece in field.pieces() {
                out.push((format!("{id}/{name}"), p.domain, piece.lo, piece.hi, piece.expr.clone()));
            }
        }
        for (name, field) in matrices {
            for piece in field.pieces() {
                for (k, e) in piece.entries.iter().into_iter().enumerate() {
                    out.push((format!("{id}/{name}[{k}]"), p.domain, piece.lo, piece.hi, e.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// Five-point central difference of `g` at `s`.
fn fd(g: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (-g(s + 2.0 * h) + 8.0 * g(s + h) - 8.0 * g(s - h) + g(s - 2.0 * h)) / (12.0 * h)
}

/// A Cartesian polynomial `Σ c·xⁱyʲ` with its bilaplacian computed term by term.
struct Poly(Vec<(f64, u32, u32)>);

impl Poly {
    fn expr(&self, vars: VarSet) -> Expr {
        let (x, y) = match vars {
            VarSet::Line => (Expr::x(), Expr::zero()),
            VarSet::Polar => (Expr::r() * Expr::theta().cos(), Expr::r() * Expr::theta().sin()),
        };
        self.0.iter().fold(Expr::zero(), |acc, &(c, i, j)| acc + c * x.powi(i) * y.powi(j))
    }

    fn eval_derivative(&self, x: f64, y: f64, dx: u32, dy: u32) -> f64 {
        let falling = |n: u32, k: u32| (0..k).map(|t| n as f64 - t as f64).product::<f64>();
        self.0
            .iter()
            .filter(|&&(_, i, j)| i >= dx && j >= dy)
            .map(|&(c, i, j)| c * falling(i, dx) * falling(j, dy) * x.powi((i - dx) as i32) * y.powi((j - dy) as i32))
            .sum()
    }

    fn bilaplacian(&self, x: f64, y: f64) -> f64 {
        self.eval_derivative(x, y, 4, 0) + 2.0 * self.eval_derivative(x, y, 2, 2) + self.eval_derivative(x, y, 0, 4)
    }
}

fn test_polynomials() -> Vec<(VarSet, Poly)> {
    let line = |t: &[(f64, u32)]| (VarSet::Line, Poly(t.iter().map(|&(c, i)| (c, i, 0)).collect()));
    let plane = |t: &[(f64, u32, u32)]| (VarSet::Polar, Poly(t.to_vec()));
    vec![
        line(&[(1.0, 4)]),
        line(&[(-48.0, 4), (-128.0, 3), (-120.0, 2), (-48.0, 1), (-8.0, 0)]),
        line(&[(0.5, 6), (-2.0, 5), (3.0, 1)]),
        line(&[(1.0, 7), (1.0, 3)]),
        line(&[(2.0, 5), (-1.0, 4), (7.0, 2)]),
        plane(&[(1.0, 2, 2)]),
        plane(&[(1.0, 4, 0), (1.0, 0, 4)]),
        plane(&[(1.0, 3, 1), (-2.0, 1, 3), (0.5, 2, 0)]),
        plane(&[(0.25, 4, 2), (1.0, 1, 1), (-1.0, 0, 5)]),
        plane(&[(1.0, 6, 0), (-3.0, 2, 4), (2.0, 3, 3), (1.0, 0, 2)]),
    ]
}

/// Criterion 8: structural oracles.
fn criterion_8() -> Outcome {
    let mut c = Check::default();
    // derivatives vs finite differences
    for (name, domain, lo, hi, e) in built_in_expressions()? {
        let vars: &[Var] = match domain {
            Domain::Interval { .. } => &[Var::X],
            Domain::Disk { .. } => &[Var::R, Var::Theta],
        };
        for &var in vars {
            let d = differentiate(&e, var);
            for k in 1..=5 {
                let s = lo + (hi - lo) * k as f64 / 6.0;
                let theta = 0.3 + 1.1 * k as f64;
                let e = &e;
                let (point, g): (Point, Box<dyn Fn(f64) -> f64>) = match var {
                    Var::X => (Point::Line(s), Box::new(|t| e.evaluate(Point::Line(t)).unwrap())),
                    Var::R => (Point::Polar { r: s, theta }, Box::new(move |t| e.evaluate(Point::Polar { r: t, theta }).unwrap())),
                    Var::Theta => (Point::Polar { r: s, theta }, Box::new(move |t| e.evaluate(Point::Polar { r: s, theta: t }).unwrap())),
                };
                let coord = if var == Var::Theta { theta } else { s };
                let exact = d.evaluate(point)?;
                let approx = fd(g, coord, 1e-3 * (hi - lo).min(1.0));
                let dev = (exact - approx).abs() / exact.abs().max(1.0);
                c.expect(dev <= 1e-6, || format!("d/d{} of {name} at {coord}: {exact} vs FD {approx}", var.name()));
            }
        }
    }
    // div Div ∘ ∇∇ = Δ² on polynomial fields, checked against Cartesian coefficients
    for (vars, poly) in test_polynomials() {
        let domain = match vars {
            VarSet::Line => Domain::Interval { a: -1.0, b: 1.0 },
            VarSet::Polar => Domain::Disk { radius: 3.0 },
        };
        let w = PiecewiseScalarField::uniform(domain, poly.expr(vars))?;
        let dd = div_div(&hessian(&w));
        for k in 1..=7 {
            let s = match vars {
                VarSet::Line => -1.0 + 2.0 * k as f64 / 8.0,
                VarSet::Polar => 0.35 * k as f64,
            };
            let theta = 0.7 * k as f64;
            let (point, x, y) = match vars {
                VarSet::Line => (Point::Line(s), s, 0.0),
                VarSet::Polar => (Point::Polar { r: s, theta }, s * theta.cos(), s * theta.sin()),
            };
            let got = dd.evaluate(point)?;
            let want = poly.bilaplacian(x, y);
            let dev = (got - want).abs() / want.abs().max(1.0);
            c.expect(dev <= 1e-6, || format!("bilaplacian at {point:?}: {got} vs {want}"));
        }
    }
    // quadrature: polynomial exactness and additivity
    let q = cfg();
    for k in 0..=13 {
        let r = integrate_1d(|x| x.powi(k), -0.5, 2.0, &[], &q)?;
        let want = (2f64.powi(k + 1) - (-0.5f64).powi(k + 1)) / (k + 1) as f64;
        c.rel(&format!("int x^{k}"), r.value, want, 1e-12);
        let disk = integrate_region(Geometry::Disk, &[(0.0, 2.0)], &[], |p| match p {
            Point::Polar { r, .. } => r.powi(k),
            _ => unreachable!(),
        }, &q)?;
        c.rel(&format!("disk int r^{k}"), disk.value, 2.0 * std::f64::consts::PI * 2f64.powi(k + 2) / (k + 2) as f64, 1e-12);
    }
    let smooth = |x: f64| (3.0 * x).sin() * (-x * x).exp() + x.abs().sqrt();
    for split in [-0.3, 0.0, 0.41, 0.9] {
        let whole = integrate_1d(smooth, -1.0, 1.0, &[0.0], &q)?.value;
        let parts = integrate_1d(smooth, -1.0, split, &[0.0], &q)?.value + integrate_1d(smooth, split, 1.0, &[0.0], &q)?.value;
        c.abs(&format!("additivity at {split}"), parts, whole, 1e-10);
    }
    Ok(c)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("error identity, 1D", criterion_1),
        ("tables 1-3", criterion_2),
        ("majorant coefficients, 1D", criterion_3),
        ("majorant validity and published lhs line", criterion_4),
        ("circular plate", criterion_5),
        ("feasibility detection", criterion_6),
        ("duality-gap equivalence", criterion_7),
        ("structural oracles", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let (ok, detail) = match run() {
            Ok(c) if c.failures.is_empty() => (true, format!("{} checks", c.count)),
            Ok(c) => (false, format!("{} of {} checks failed: {}", c.failures.len(), c.count, c.failures.join("; "))),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {name} ({detail}) [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
