use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cli::{execute, print_summary, Mode, RunConfig, RunError, Scheduling};

/// Privacy-preserving distributed optimal power flow.
#[derive(Debug, Parser)]
#[command(name = "ppopf", version)]
struct Args {
    #[arg(long, env = "PPOPF_MODE", value_enum)]
    mode: Option<Mode>,
    /// JSON config to start from; flags override its fields
    #[arg(long, env = "PPOPF_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "PPOPF_CASE")]
    case: Option<PathBuf>,
    #[arg(long, env = "PPOPF_PARTITION")]
    partition: Option<PathBuf>,
    #[arg(long, env = "PPOPF_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "PPOPF_ALPHA")]
    alpha: Option<f64>,
    #[arg(long, env = "PPOPF_EPSILON")]
    epsilon: Option<f64>,
    #[arg(long, env = "PPOPF_PENALTY_MIN")]
    penalty_min: Option<u64>,
    #[arg(long, env = "PPOPF_PENALTY_MAX")]
    penalty_max: Option<u64>,
    #[arg(long, env = "PPOPF_KEY_BITS")]
    key_bits: Option<u64>,
    #[arg(long, env = "PPOPF_SCALE")]
    scale: Option<u64>,
    #[arg(long, env = "PPOPF_WORD_BITS")]
    word_bits: Option<u32>,
    #[arg(long, env = "PPOPF_BETA")]
    beta: Option<f64>,
    #[arg(long, env = "PPOPF_MAX_OUTER")]
    max_outer: Option<usize>,
    #[arg(long, env = "PPOPF_NOISE_N0")]
    noise_n0: Option<f64>,
    #[arg(long, env = "PPOPF_SCHEDULING", value_enum)]
    scheduling: Option<Scheduling>,
    #[arg(long, env = "PPOPF_OUT")]
    out: Option<PathBuf>,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident, $($f:ident),*) => {
        $(if let Some(v) = $args.$f { $cfg.$f = v; })*
    };
}

fn build(args: Args) -> Result<RunConfig, RunError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| RunError::Config(vec![e]))?,
        None => RunConfig::default(),
    };
    if args.case.is_some() {
        cfg.case = args.case;
    }
    if args.partition.is_some() {
        cfg.partition = args.partition;
    }
    overlay!(cfg, args, mode, seed, alpha, epsilon, penalty_min, penalty_max, key_bits, scale, word_bits, beta, max_outer, noise_n0, scheduling, out);
    Ok(cfg)
}

fn main() -> ExitCode {
    let result = build(Args::parse()).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => {
            print_summary(&outcome.summary, std::io::stdout()).ok();
            if outcome.success { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
