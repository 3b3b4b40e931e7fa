//! Recomputation of the three published tables for the `v_ε` / `n*_ε` families.

use crate::measures::{energy_dual, energy_primal, exact_energy, identity_rhs, mu_dual, mu_primal};
use crate::problems::{model_1d, ProblemInstance};
use crate::quadrature::QuadratureConfig;

use super::report::{relative_deviation, Row};
use super::CliError;

pub const EPSILONS: [f64; 5] = [0.35, 0.25, 0.15, 0.05, 0.0];

/// Printed values, one row per entry of [`EPSILONS`].
pub const TABLE1: [[f64; 4]; 5] = [
    [134.060, 250.280, 384.340, 65.12],
    [125.156, 152.889, 278.044, 54.99],
    [109.904, 68.192, 178.096, 38.29],
    [81.474, 9.852, 91.326, 1.06],
    [57.60, 0.0, 57.60, 0.0],
];
pub const TABLE2: [[f64; 4]; 5] = [
    [119.444, 422.937, 542.381, 77.98],
    [109.443, 400.119, 509.562, 78.52],
    [95.972, 357.378, 453.349, 78.83],
    [78.510, 270.053, 348.563, 77.48],
    [68.571, 192.0, 260.571, 73.68],
];
pub const TABLE3: [[f64; 4]; 5] = [
    [10.049, 916.672, 926.721, 926.721],
    [14.629, 772.978, 787.606, 787.606],
    [22.472, 608.973, 631.445, 631.445],
    [37.094, 402.796, 439.890, 439.890],
    [49.371, 268.800, 318.171, 318.171],
];

/// The printed share for ε = 0.05 disagrees with the printed components it is derived from.
pub const K_PRINT_NOTE: &str = "printed 1.06% contradicts its own columns: 100*9.852/91.326 = 10.79%";

/// Rows for table `id`; the ε = 0.05 share in table 1 carries [`K_PRINT_NOTE`].
pub fn table(id: u8, cfg: &QuadratureConfig) -> Result<Vec<Row>, CliError> {
    let p = model_1d()?;
    match id {
        1 => table1(&p, cfg),
        2 => table2(&p, cfg),
        3 => table3(&p, cfg),
        _ => Err(CliError::Usage(format!("no table {id}; expected 1, 2 or 3"))),
    }
}

fn label(eps: f64, what: &str) -> String {
    format!("eps={eps:.2} {what}")
}

fn table1(p: &ProblemInstance, cfg: &QuadratureConfig) -> Result<Vec<Row>, CliError> {
    let ju = exact_energy(p, cfg)?;
    let mut rows = Vec::new();
    for (eps, refs) in EPSILONS.iter().zip(TABLE1) {
        let v = p.approx("v_eps", Some(*eps))?;
        let v = v.primal().expect("primal family");
        let m = mu_primal(p, v, cfg)?;
        let gap = energy_primal(p, v, cfg)? - ju;
        rows.push(Row::new(label(*eps, "half_hess_err_sq"), m.quadratic).reference(Some(refs[0])));
        rows.push(Row::new(label(*eps, "mu_phi"), m.nonlinear).reference(Some(refs[1])));
        rows.push(Row::new(label(*eps, "J(v)-J(u)"), gap).reference(Some(refs[2])));
        let k = Row::exact(label(*eps, "k_percent"), m.nonlinear_percent()).reference(Some(refs[3]));
        rows.push(if *eps == 0.05 { k.note(K_PRINT_NOTE) } else { k });
    }
    Ok(rows)
}

fn table2(p: &ProblemInstance, cfg: &QuadratureConfig) -> Result<Vec<Row>, CliError> {
    let ju = exact_energy(p, cfg)?;
    let mut rows = Vec::new();
    for (eps, refs) in EPSILONS.iter().zip(TABLE2) {
        let n = p.approx("n_eps", Some(*eps))?;
        let n = n.dual().expect("dual family");
        let m = mu_dual(p, n, cfg)?;
        let gap = match energy_dual(p, n, cfg)?.finite() {
            Some(dual) => Row::new(label(*eps, "I*(p*)-I*(n)"), ju - dual),
            None => Row::exact(label(*eps, "I*(p*)-I*(n)"), f64::INFINITY).note("FAIL: infeasible"),
        };
        rows.push(Row::new(label(*eps, "half_moment_err_sq"), m.breakdown.quadratic).reference(Some(refs[0])));
        rows.push(Row::new(label(*eps, "mu_star_phi"), m.breakdown.nonlinear).reference(Some(refs[1])));
        rows.push(gap.reference(Some(refs[2])));
        rows.push(Row::exact(label(*eps, "k_percent"), m.breakdown.nonlinear_percent()).reference(Some(refs[3])));
    }
    Ok(rows)
}

/// Relative tolerance for `rhs = μ + μ*` in each row of table 3.
pub const IDENTITY_TOL: f64 = 1e-6;

fn table3(p: &ProblemInstance, cfg: &QuadratureConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for (eps, refs) in EPSILONS.iter().zip(TABLE3) {
        let v = p.approx("v_eps", Some(*eps))?;
        let n = p.approx("n_eps", Some(*eps))?;
        let (v, n) = (v.primal().expect("primal family"), n.dual().expect("dual family"));
        let rhs = identity_rhs(p, v, n, cfg)?;
        let lhs = mu_primal(p, v, cfg)?.total + mu_dual(p, n, cfg)?.breakdown.total;
        rows.push(Row::new(label(*eps, "half_hess_minus_n_sq"), rhs.quadratic).reference(Some(refs[0])));
        rows.push(Row::new(label(*eps, "N_obstacle"), rhs.obstacle).reference(Some(refs[1])));
        rows.push(Row::new(label(*eps, "rhs"), rhs.total).reference(Some(refs[2])));
        let sum = Row::new(label(*eps, "mu+mu_star"), lhs).reference(Some(refs[3]));
        let dev = relative_deviation(lhs.value, rhs.total.value);
        rows.push(if dev > IDENTITY_TOL { sum.note(format!("FAIL: identity off by rel {dev:.2e}")) } else { sum });
    }
    Ok(rows)
}
