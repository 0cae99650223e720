use sdpform::{ObjectiveTerms, RegionSolution, SdpStandardForm};
use sdpsolve::{solve, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::config::AdmmConfig;
use crate::error::{AdmmError, Result};
use crate::exchange::Exchange;
use crate::state::{DualState, InnerStop, RegionState};

/// One sign message as delivered to a region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRecord {
    pub t: usize,
    pub k: usize,
    pub region: usize,
    pub signs: Vec<i8>,
}

fn solve_region(form: &SdpStandardForm, terms: &ObjectiveTerms, cfg: &AdmmConfig, t: usize, k: usize) -> Result<(RegionSolution, Vec<String>)> {
    let problem = form.objective_problem(terms)?;
    let (it, report) = solve(&problem, None, &cfg.solver())?;
    let mut warnings = Vec::new();
    if report.status != SolveStatus::Optimal {
        // a stalled solve whose best iterate is close to the tolerance is still usable
        let worst = report.primal_infeasibility.max(report.dual_infeasibility).max(report.duality_gap);
        if worst > 100.0 * cfg.solver_tol {
            return Err(AdmmError::SolveFailed { region: form.spec.region, t, k, status: report.status });
        }
        warnings.push(format!("t={t} k={k}: regional solve stopped with {:?} at residual {worst:.1e}", report.status));
    }
    let sol = form.extract_solution(&it.x);
    warnings.extend(sol.warnings.iter().cloned());
    Ok((sol, warnings))
}

/// S1 for one region. The ℓ1 subgradient coefficient g of every boundary scalar is
/// located by bisection on [−1, 1] driven by the sign messages: +1 means the own value
/// still exceeds the neighbour's, so g must grow.
pub fn primal_update(
    form: &SdpStandardForm,
    duals: &DualState,
    prev: &RegionState,
    t: usize,
    exchange: &mut dyn Exchange,
    cfg: &AdmmConfig,
    log: &mut Vec<SignRecord>,
) -> Result<RegionState> {
    let r = form.spec.region;
    let nb = form.spec.boundary.len();
    let mut lo = vec![-1.0; nb];
    let mut hi = vec![1.0; nb];
    let mut g = vec![0.0; nb];
    let mut warnings = Vec::new();
    let mut k = 0;
    let (sol, stop) = loop {
        let terms = ObjectiveTerms {
            duals: &duals.values,
            signs: &g,
            alpha: cfg.alpha,
            prox_weight: cfg.prox_weight,
            prox_center: &prev.boundary,
        };
        let (sol, w) = solve_region(form, &terms, cfg, t, k)?;
        warnings.extend(w);
        k += 1;
        if nb == 0 {
            break (sol, InnerStop::Isolated);
        }
        let reply = exchange.primal_signs(t, k - 1, r, &sol.boundary)?;
        if reply.signs.len() != nb {
            return Err(AdmmError::Exchange(format!("region {r}: {} signs for {nb} boundary scalars", reply.signs.len())));
        }
        log.push(SignRecord { t, k: k - 1, region: r, signs: reply.signs.clone() });
        if reply.converged {
            break (sol, InnerStop::Converged);
        }
        for e in 0..nb {
            match reply.signs[e] {
                1 => lo[e] = g[e],
                -1 => hi[e] = g[e],
                _ => {
                    lo[e] = g[e];
                    hi[e] = g[e];
                }
            }
            g[e] = 0.5 * (lo[e] + hi[e]);
        }
        if (0..nb).all(|e| hi[e] - lo[e] <= cfg.bracket_tol) {
            break (sol, InnerStop::Bracketed);
        }
        if k >= cfg.max_inner {
            warnings.push(format!("t={t}: inner loop stopped at the cap of {} iterations", cfg.max_inner));
            break (sol, InnerStop::Cap);
        }
    };
    Ok(RegionState {
        region: r,
        t: t + 1,
        x: sol.x,
        z: sol.z,
        p_g: sol.p_g,
        q_g: sol.q_g,
        boundary: sol.boundary,
        cost: sol.cost,
        rank1_residual: sol.rank1_residual,
        inner_iterations: k,
        inner_stop: stop,
        warnings,
    })
}
