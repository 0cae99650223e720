use nalgebra::DMatrix;
use netmodel::{build_operators, PowerNetwork};
use num_complex::Complex64;
use sdpform::{build_form, FormOptions, ObjectiveTerms, RegionSpec};
use sdpsolve::{solve, SolveReport, SolveStatus, SolverSettings};

use crate::error::{BaselineError, Result};

/// Global optimum of the relaxed OPF over the whole network.
#[derive(Clone, Debug)]
pub struct CentralSolution {
    /// z*, fuel cost at the optimum
    pub objective: f64,
    /// W = X + jZ over all buses
    pub w: DMatrix<Complex64>,
    pub rank1_residual: f64,
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    pub voltages: Vec<Complex64>,
    /// largest |A(X) − b| over all constraints
    pub max_residual: f64,
    pub report: SolveReport,
    pub warnings: Vec<String>,
}

pub fn solve_centralized(net: &PowerNetwork, settings: &SolverSettings) -> Result<CentralSolution> {
    let ops = build_operators(net);
    let form = build_form(net, &ops, &RegionSpec::central(net), FormOptions { prox: false });
    let terms = ObjectiveTerms { duals: &[], signs: &[], alpha: 0.0, prox_weight: 0.0, prox_center: &[] };
    let problem = form.objective_problem(&terms)?;
    let (it, report) = solve(&problem, None, settings)?;
    if report.status != SolveStatus::Optimal {
        return Err(BaselineError::NotOptimal(report.status));
    }
    let max_residual = problem.primal_residual(&it.x).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let sol = form.extract_solution(&it.x);
    let w = DMatrix::from_fn(sol.x.nrows(), sol.x.ncols(), |i, j| Complex64::new(sol.x[(i, j)], sol.z[(i, j)]));
    Ok(CentralSolution {
        objective: sol.cost,
        w,
        rank1_residual: sol.rank1_residual,
        p_g: sol.p_g,
        q_g: sol.q_g,
        voltages: sol.voltages,
        max_residual,
        report,
        warnings: sol.warnings,
    })
}

/// gap₁ = 100·(z_p − z*)/z_p, distributed cost against the central optimum.
pub fn gap1(distributed: f64, central: f64) -> f64 {
    100.0 * (distributed - central) / distributed
}

/// gap₂ = 100·(z_p − z_d)/z_p, encrypted run against the plaintext ADMM run.
pub fn gap2(encrypted: f64, plain: f64) -> f64 {
    100.0 * (encrypted - plain) / encrypted
}
