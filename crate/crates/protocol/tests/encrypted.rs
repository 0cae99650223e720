use admm::{AdmmConfig, AdmmProblem, Exchange};
use netmodel::canonical::{feeder8, feeder8_three_regions, feeder8_two_regions};
use netmodel::partition;
use protocol::{twin_run, Delivery, Observer, Party, Payload, ProtocolConfig, ProtocolExchange};

fn problem(three: bool, cfg: &AdmmConfig) -> AdmmProblem {
    let net = feeder8();
    let a = if three { feeder8_three_regions() } else { feeder8_two_regions() };
    AdmmProblem::new(&net, &partition(&net, &a).unwrap(), cfg)
}

fn short(seed: u64) -> AdmmConfig {
    AdmmConfig { max_outer: 2, seed, ..AdmmConfig::default() }
}

#[test]
fn twin_runs_agree_across_seeds() {
    for seed in [11, 12, 13] {
        let cfg = short(seed);
        let twin = twin_run(&problem(false, &cfg), &cfg, &ProtocolConfig::default()).unwrap();
        assert!(!twin.plain.signs.is_empty());
        assert!(twin.signs_identical(), "seed {seed}");
        assert!(twin.max_increment_gap() <= 1e-10, "seed {seed}: {}", twin.max_increment_gap());
        assert_eq!(twin.max_state_gap(), 0.0);
    }
}

#[test]
fn audit_passes_on_three_regions() {
    let cfg = short(5);
    let twin = twin_run(&problem(true, &cfg), &cfg, &ProtocolConfig::default()).unwrap();
    assert!(twin.signs_identical());
    let report = twin.exchange.audit(cfg.penalty_range);
    assert!(report.passed(), "{:?}\n{}", report.failures(), report.to_json());
    assert!(report.counting.iter().any(|c| c.observer == "operator" && c.streams > 0));
    for a in &report.alternatives {
        assert!(a.byte_identical, "{a:?}");
    }
    assert_eq!(report.signs.mismatches, 0);
    assert!(report.signs.entries > 0);
    assert!(report.eavesdropper.ciphertexts > 0);
}

#[test]
fn shuffled_delivery_gives_the_same_run() {
    let cfg = short(3);
    let p = problem(false, &cfg);
    let (a, ex_a) = protocol::run_encrypted(&p, &cfg, &ProtocolConfig::default()).unwrap();
    let shuffled = ProtocolConfig { delivery: Delivery::Shuffled { seed: 99 }, ..ProtocolConfig::default() };
    let (b, ex_b) = protocol::run_encrypted(&p, &cfg, &shuffled).unwrap();
    assert_eq!(a.signs, b.signs);
    assert_eq!(a.dual_log, b.dual_log);
    assert_eq!(ex_a.transcript(), ex_b.transcript());
}

#[test]
fn transcripts_are_reproducible() {
    let cfg = AdmmConfig { max_outer: 1, ..short(8) };
    let p = problem(false, &cfg);
    let (_, a) = protocol::run_encrypted(&p, &cfg, &ProtocolConfig::default()).unwrap();
    let (_, b) = protocol::run_encrypted(&p, &cfg, &ProtocolConfig::default()).unwrap();
    assert_eq!(a.transcript(), b.transcript());
    let line = a.transcript().lines().next().unwrap().to_string();
    assert!(line.contains("\"public_key\""), "{line}");
    assert!(!a.transcript().contains("lambda"));
}

#[test]
fn identical_values_trigger_the_convergence_signal() {
    let cfg = AdmmConfig::default();
    let p = problem(false, &cfg);
    let mut ex = ProtocolExchange::new(&p.topo, &cfg, &ProtocolConfig::default()).unwrap();
    let flat = p.topo.flat_start();
    ex.begin_outer(0, &flat).unwrap();
    let reply = ex.primal_signs(0, 0, 0, &flat[0]).unwrap();
    assert!(reply.converged);
    assert!(reply.signs.iter().all(|&s| s == 0));
    let signals = ex.network().log().iter().filter(|e| e.payload == Payload::ConvergenceSignal).count();
    assert_eq!(signals, 2);

    let mut moved = flat[0].clone();
    moved[0] += 0.01;
    let reply = ex.primal_signs(0, 1, 0, &moved).unwrap();
    assert!(!reply.converged);
    assert_eq!(reply.signs[0], 1);
}

#[test]
fn dual_oracle_through_the_protocol() {
    // zero difference freezes the duals; a shift of 0.001 realizes ρ·0.001 with ρ = a_rl·a_lr
    let cfg = AdmmConfig::default();
    let p = problem(false, &cfg);
    let mut ex = ProtocolExchange::new(&p.topo, &cfg, &ProtocolConfig::default()).unwrap();
    let flat = p.topo.flat_start();
    ex.begin_outer(4, &flat).unwrap();
    let inc = ex.dual_increments(4, &flat).unwrap();
    assert!(inc.iter().flatten().all(|&x| x == 0.0));
    let mut moved = flat.clone();
    moved[0][0] += 0.001;
    let inc = ex.dual_increments(4, &moved).unwrap();
    let rho = inc[0][0] / 0.001;
    assert!((10_000.0..=40_000.0).contains(&rho), "{rho}");
    assert!((rho - rho.round()).abs() < 1e-6);
    let back = p.topo.counterpart[0][0];
    assert!((inc[1][back] + inc[0][0]).abs() < 1e-9);
}

#[test]
fn operator_never_sees_state_ciphertexts_or_other_keys() {
    let cfg = AdmmConfig { max_outer: 1, ..short(2) };
    let (_, ex) = protocol::run_encrypted(&problem(false, &cfg), &cfg, &ProtocolConfig::default()).unwrap();
    for e in ex.network().log().iter().filter(|e| e.visible_to(Observer::Party(Party::Operator))) {
        assert!(
            matches!(e.payload.name(), "public_key" | "private_key_handoff" | "encrypted_weighted_diff" | "sign_message" | "convergence_signal"),
            "{}",
            e.payload.name()
        );
    }
    for e in ex.network().log().iter().filter(|e| e.payload.name() == "private_key_handoff") {
        assert!(e.secure);
        assert_eq!(e.to, Party::Operator);
    }
}
