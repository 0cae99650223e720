use baseline::{gap1, gap2, solve_centralized};
use netmodel::canonical::feeder8;
use netmodel::{Bus, Generator, PowerNetwork};
use num_complex::Complex64;
use sdpsolve::SolverSettings;

/// Relaxed OPF optimum of feeder8 from an independent conic solve.
const FEEDER8_OPTIMUM: f64 = 8.543874593;

fn settings() -> SolverSettings {
    SolverSettings { tol: 1e-9, ..SolverSettings::default() }
}

#[test]
fn single_bus_toy() {
    // P_G = 1 meets the demand: 0.2·1 + 2·1 + 2 = 4.2
    let bus = Bus { id: 1, p_demand: 1.0, q_demand: 0.0, v_min: 0.9, v_max: 1.1, shunt: Complex64::new(0.0, 0.0) };
    let gen = Generator { bus_id: 1, p_min: 0.0, p_max: 5.0, q_min: -5.0, q_max: 5.0, cost_a: 0.2, cost_b: 2.0, cost_c: 2.0 };
    let net = PowerNetwork::new("toy", 100.0, vec![bus], vec![gen], vec![]).unwrap();
    let sol = solve_centralized(&net, &settings()).unwrap();
    assert!((sol.objective - 4.2).abs() < 1e-6, "{}", sol.objective);
    assert!((sol.p_g[0] - 1.0).abs() < 1e-6);
    assert!(sol.q_g[0].abs() < 1e-6);
}

#[test]
fn zero_demand_costs_only_the_constants() {
    let mut net = feeder8();
    for b in &mut net.buses {
        b.p_demand = 0.0;
        b.q_demand = 0.0;
    }
    let net = PowerNetwork::new("idle", net.base_mva, net.buses, net.generators, net.lines).unwrap();
    let sol = solve_centralized(&net, &settings()).unwrap();
    assert!((sol.objective - 4.0).abs() < 1e-6, "{}", sol.objective);
    assert!(sol.p_g.iter().all(|p| p.abs() < 1e-6));
}

#[test]
fn feeder8_is_exact() {
    let net = feeder8();
    let sol = solve_centralized(&net, &settings()).unwrap();
    assert!((sol.objective - FEEDER8_OPTIMUM).abs() < 1e-6);
    assert!(sol.rank1_residual <= 1e-6);
    assert!(sol.max_residual <= 1e-8, "{}", sol.max_residual);
    assert!(sol.warnings.is_empty());
    assert_eq!(sol.w.nrows(), 8);
    for i in 0..8 {
        for j in 0..8 {
            assert!((sol.w[(i, j)] - sol.w[(j, i)].conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn gap_formulas() {
    assert!((gap1(10.0, 9.9) - 1.0).abs() < 1e-12);
    assert!((gap2(10.0, 9.95) - 0.5).abs() < 1e-12);
    assert_eq!(gap1(5.0, 5.0), 0.0);
}
