use std::fs;
use std::io::Write;
use std::path::Path;

use admm::{plain_exchange, run as run_admm, write_trace_csv, AdmmProblem, RunResult};
use baseline::{gap1, gap2, run_dp_baseline, solve_centralized, CentralSolution, NoiseKind, NoiseSchedule};
use netmodel::partition;
use protocol::twin_run;
use sdpsolve::{sig12, SolverSettings};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Mode, RunConfig, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigError>),
    #[error("network: {0}")]
    Net(#[from] netmodel::NetError),
    #[error("admm: {0}")]
    Admm(#[from] admm::AdmmError),
    #[error("centralized solve: {0}")]
    Baseline(#[from] baseline::BaselineError),
    #[error("writing {path}: {msg}")]
    Io { path: String, msg: String },
}

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_cost: f64,
    pub gap1_percent: f64,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    /// the mode's primary run converged (and, in audit mode, the audit passed)
    pub success: bool,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    mode: Mode,
    files: &'a [String],
}

#[derive(Serialize)]
struct CentralReport<'a> {
    objective: f64,
    rank1_residual: f64,
    max_residual: f64,
    solver_iterations: usize,
    p_g: &'a [f64],
    q_g: &'a [f64],
    voltage_magnitudes: Vec<f64>,
    voltage_angles: Vec<f64>,
}

#[derive(Serialize)]
struct TwinReport {
    signs_identical: bool,
    max_increment_gap: f64,
    max_state_gap: f64,
    messages: usize,
    encryptions: usize,
    decryptions: usize,
    key_rotations: usize,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, content: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| RunError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn trace(&mut self, label: &str, res: &RunResult) -> Result<(), RunError> {
        let mut buf = Vec::new();
        write_trace_csv(&res.trace, label, &mut buf)?;
        self.put(&format!("trace_{label}.csv"), &buf)
    }
}

fn row(run: &str, res: &RunResult, central: f64) -> SummaryRow {
    SummaryRow {
        run: run.into(),
        converged: res.converged,
        iterations: res.iterations,
        final_cost: res.final_cost(),
        gap1_percent: gap1(res.final_cost(), central),
        note: String::new(),
    }
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("run,converged,iterations,final_cost,gap1_percent,note\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{},{}\n", r.run, r.converged, r.iterations, sig12(r.final_cost), sig12(r.gap1_percent), r.note));
    }
    s
}

fn central_json(c: &CentralSolution) -> String {
    let report = CentralReport {
        objective: c.objective,
        rank1_residual: c.rank1_residual,
        max_residual: c.max_residual,
        solver_iterations: c.report.iterations,
        p_g: &c.p_g,
        q_g: &c.q_g,
        voltage_magnitudes: c.voltages.iter().map(|v| v.norm()).collect(),
        voltage_angles: c.voltages.iter().map(|v| v.arg()).collect(),
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

/// Runs the configured experiment and writes every artifact into `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, RunError> {
    cfg.validate().map_err(RunError::Config)?;
    fs::create_dir_all(&cfg.out).map_err(|e| RunError::Io { path: cfg.out.display().to_string(), msg: e.to_string() })?;
    let mut w = Writer { dir: &cfg.out, files: Vec::new() };
    w.put("config.json", cfg.to_json().as_bytes())?;

    let net = cfg.network().map_err(|e| RunError::Config(vec![e]))?;
    let assignment = cfg.assignment().map_err(|e| RunError::Config(vec![e]))?;
    let part = partition(&net, &assignment)?;
    let admm_cfg = cfg.admm();
    let problem = AdmmProblem::new(&net, &part, &admm_cfg);

    let central = solve_centralized(&net, &SolverSettings { beta: admm_cfg.beta, ..SolverSettings::default() })?;
    w.put("central.json", central_json(&central).as_bytes())?;
    let z = central.objective;
    let mut rows = vec![SummaryRow {
        run: "centralized".into(),
        converged: true,
        iterations: central.report.iterations,
        final_cost: z,
        gap1_percent: 0.0,
        note: format!("rank1 {}", sig12(central.rank1_residual)),
    }];
    let mut success = true;

    if cfg.mode == Mode::Plain {
        let res = run_admm(&problem, &admm_cfg, &mut plain_exchange(&problem.topo, &admm_cfg))?;
        w.trace("plain", &res)?;
        rows.push(row("plain", &res, z));
        success = res.converged;
    }

    if matches!(cfg.mode, Mode::Phe | Mode::Audit | Mode::Compare) {
        let twin = twin_run(&problem, &admm_cfg, &cfg.protocol())?;
        w.trace("phe", &twin.encrypted)?;
        w.trace("plain", &twin.plain)?;
        w.put("transcript.jsonl", twin.exchange.transcript().as_bytes())?;
        let stats = twin.exchange.stats();
        let report = TwinReport {
            signs_identical: twin.signs_identical(),
            max_increment_gap: twin.max_increment_gap(),
            max_state_gap: twin.max_state_gap(),
            messages: stats.messages,
            encryptions: stats.encryptions,
            decryptions: stats.decryptions,
            key_rotations: stats.key_rotations,
        };
        w.put("twin.json", serde_json::to_string_pretty(&report).expect("report serializes").as_bytes())?;
        let audit = twin.exchange.audit(admm_cfg.penalty_range);
        w.put("audit.json", audit.to_json().as_bytes())?;
        let (zp, zd) = (twin.encrypted.final_cost(), twin.plain.final_cost());
        let gaps = format!(
            "metric,value\ncentral_objective,{}\nphe_cost,{}\nplain_cost,{}\ngap1_percent,{}\ngap2_percent,{}\n",
            sig12(z),
            sig12(zp),
            sig12(zd),
            sig12(gap1(zp, z)),
            sig12(gap2(zp, zd))
        );
        w.put("gap_report.csv", gaps.as_bytes())?;
        let mut phe = row("phe", &twin.encrypted, z);
        let failures = audit.failures();
        phe.note = if failures.is_empty() { "audit passed".into() } else { format!("audit failed: {}", failures.join("; ")) };
        rows.push(phe);
        rows.push(row("plain", &twin.plain, z));
        success = twin.encrypted.converged && (cfg.mode != Mode::Audit || failures.is_empty());
    }

    if matches!(cfg.mode, Mode::Dp | Mode::Compare) {
        let mut all = true;
        for kind in NoiseKind::ALL {
            let schedule = NoiseSchedule::new(kind, cfg.noise_n0)?;
            let label = format!("dp_{}", kind.label());
            match run_dp_baseline(&problem, &admm_cfg, schedule) {
                Ok(res) => {
                    w.trace(&label, &res)?;
                    all &= res.converged;
                    rows.push(row(&label, &res, z));
                }
                Err(e) => {
                    all = false;
                    rows.push(SummaryRow { run: label, converged: false, iterations: 0, final_cost: f64::NAN, gap1_percent: f64::NAN, note: e.to_string().replace(',', ";") });
                }
            }
        }
        if cfg.mode == Mode::Dp {
            success = all;
        }
    }

    w.put("summary.csv", summary_csv(&rows).as_bytes())?;
    let mut files = w.files.clone();
    files.push("manifest.json".into());
    let manifest = Manifest { schema_version: SCHEMA_VERSION, mode: cfg.mode, files: &files };
    w.put("manifest.json", serde_json::to_string_pretty(&manifest).expect("manifest serializes").as_bytes())?;
    Ok(Outcome { success, summary: rows, files })
}

/// The summary table as aligned text for the terminal.
pub fn print_summary<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{:<22} {:>9} {:>10} {:>16} {:>12}", "run", "converged", "iterations", "cost", "gap1 %")?;
    for r in rows {
        writeln!(out, "{:<22} {:>9} {:>10} {:>16.9} {:>12.6}", r.run, r.converged, r.iterations, r.final_cost, r.gap1_percent)?;
    }
    Ok(())
}
