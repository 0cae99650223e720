use std::io::Write;

use netmodel::{build_operators, PowerNetwork, RegionPartition};
use sdpform::{build_form, FormOptions, SdpStandardForm};
use sdpsolve::sig12;
use serde::{Deserialize, Serialize};

use crate::config::{AdmmConfig, Staleness};
use crate::error::{AdmmError, Result};
use crate::exchange::Exchange;
use crate::primal::{primal_update, SignRecord};
use crate::state::{converged, dual_update, residual, DualState, RegionState};
use crate::topology::Topology;

/// Per-region standard forms over a fixed partition.
#[derive(Clone, Debug)]
pub struct AdmmProblem {
    pub topo: Topology,
    pub forms: Vec<SdpStandardForm>,
}

impl AdmmProblem {
    pub fn new(net: &PowerNetwork, p: &RegionPartition, cfg: &AdmmConfig) -> Self {
        Self::from_topology(net, Topology::new(p), cfg)
    }

    pub fn from_topology(net: &PowerNetwork, topo: Topology, cfg: &AdmmConfig) -> Self {
        let ops = build_operators(net);
        let options = FormOptions { prox: cfg.prox_weight > 0.0 };
        let forms = topo.specs.iter().map(|s| build_form(net, &ops, s, options)).collect();
        AdmmProblem { topo, forms }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// outer iteration, from 1
    pub t: usize,
    pub psi_max: f64,
    pub total_cost: f64,
    pub region_costs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualRecord {
    pub t: usize,
    pub region: usize,
    pub increments: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub states: Vec<RegionState>,
    pub duals: Vec<DualState>,
    pub psi: Vec<f64>,
    pub signs: Vec<SignRecord>,
    pub dual_log: Vec<DualRecord>,
}

impl RunResult {
    pub fn final_cost(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.total_cost)
    }
}

/// Runs outer iterations until Ψ_r ≤ ε for every region or `max_outer` is reached.
pub fn run(problem: &AdmmProblem, cfg: &AdmmConfig, exchange: &mut dyn Exchange) -> Result<RunResult> {
    cfg.validate()?;
    let topo = &problem.topo;
    let nr = topo.n_regions();
    let flat = topo.flat_start();
    let mut states: Vec<RegionState> = topo.specs.iter().zip(&flat).map(|(s, b)| RegionState::flat(s, b.clone())).collect();
    let mut duals: Vec<DualState> = topo.specs.iter().map(DualState::zeros).collect();
    let mut lagged = flat;
    let mut trace = Vec::new();
    let mut signs = Vec::new();
    let mut dual_log = Vec::new();
    let mut psi = vec![f64::INFINITY; nr];
    let mut done = false;
    let mut t = 0;
    while t < cfg.max_outer && !done {
        let current: Vec<Vec<f64>> = states.iter().map(|s| s.boundary.clone()).collect();
        let constants = match cfg.staleness {
            Staleness::Synchronous => current.clone(),
            Staleness::LagOne => std::mem::replace(&mut lagged, current.clone()),
        };
        exchange.begin_outer(t, &constants)?;
        let mut next = Vec::with_capacity(nr);
        for r in 0..nr {
            next.push(primal_update(&problem.forms[r], &duals[r], &states[r], t, exchange, cfg, &mut signs)?);
        }
        let values: Vec<Vec<f64>> = next.iter().map(|s| s.boundary.clone()).collect();
        psi = (0..nr).map(|r| residual(&topo.specs[r], &values[r], &topo.neighbor_view(r, &values))).collect();
        let sent: Vec<Vec<f64>> = if cfg.extrapolate {
            values.iter().zip(&current).map(|(v, p)| v.iter().zip(p).map(|(a, b)| 2.0 * a - b).collect()).collect()
        } else {
            values.clone()
        };
        let increments = exchange.dual_increments(t, &sent)?;
        if increments.len() != nr {
            return Err(AdmmError::Exchange(format!("{} increment vectors for {nr} regions", increments.len())));
        }
        for r in 0..nr {
            duals[r] = dual_update(&duals[r], &increments[r])?;
            if !increments[r].is_empty() {
                dual_log.push(DualRecord { t, region: r, increments: increments[r].clone() });
            }
        }
        states = next;
        let region_costs: Vec<f64> = states.iter().map(|s| s.cost).collect();
        let row = TraceRow { t: t + 1, psi_max: psi.iter().cloned().fold(0.0, f64::max), total_cost: region_costs.iter().sum(), region_costs };
        trace.push(row);
        done = converged(&psi, cfg.epsilon);
        t += 1;
    }
    Ok(RunResult { converged: done, iterations: t, trace, states, duals, psi, signs, dual_log })
}

/// `run,t,psi_max,total_cost,cost_r0,...` with 12 significant digits.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], label: &str, out: W) -> Result<()> {
    let io = |e: csv::Error| AdmmError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let nr = rows.first().map_or(0, |r| r.region_costs.len());
    let mut header = vec!["run".to_string(), "t".into(), "psi_max".into(), "total_cost".into()];
    header.extend((0..nr).map(|r| format!("cost_r{r}")));
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let mut rec = vec![label.to_string(), row.t.to_string(), sig12(row.psi_max), sig12(row.total_cost)];
        rec.extend(row.region_costs.iter().map(|&c| sig12(c)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| AdmmError::Io(e.to_string()))
}
