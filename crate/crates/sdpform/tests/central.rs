use netmodel::build_operators;
use netmodel::canonical::feeder8;
use sdpform::{build_form, FormOptions, ObjectiveTerms, RegionSpec};
use sdpsolve::{solve, SolveStatus, SolverSettings};

/// Optimal cost of the relaxed feeder8 OPF, from an independent splitting-cone solver run
/// on the complex Hermitian formulation (eps 1e-10).
const FEEDER8_OPTIMUM: f64 = 8.543874593;
const FEEDER8_P: [f64; 2] = [1.02864902, 1.03114947];

#[test]
fn central_feeder8_matches_reference() {
    let net = feeder8();
    let ops = build_operators(&net);
    let form = build_form(&net, &ops, &RegionSpec::central(&net), FormOptions { prox: false });
    let t = ObjectiveTerms { duals: &[], signs: &[], alpha: 0.0, prox_weight: 0.0, prox_center: &[] };
    let problem = form.objective_problem(&t).unwrap();
    let settings = SolverSettings { tol: 1e-9, ..SolverSettings::default() };
    let (it, report) = solve(&problem, None, &settings).unwrap();
    assert_eq!(report.status, SolveStatus::Optimal);
    assert!((report.objective - FEEDER8_OPTIMUM).abs() < 1e-6, "{}", report.objective);
    assert!((report.objective - report.dual_objective).abs() < 1e-6);

    let sol = form.extract_solution(&it.x);
    assert!(sol.warnings.is_empty(), "{:?}", sol.warnings);
    assert!(sol.rank1_residual <= 1e-6, "{}", sol.rank1_residual);
    assert!((sol.cost - report.objective).abs() < 1e-6);
    for (p, r) in sol.p_g.iter().zip(FEEDER8_P) {
        assert!((p - r).abs() < 1e-6, "{p} vs {r}");
    }

    // the recovered voltages drive an exact power flow
    let s = net.injections(&sol.voltages);
    let mut net_p = vec![0.0; 8];
    let mut net_q = vec![0.0; 8];
    for (k, g) in form.layout.gens.iter().enumerate() {
        net_p[g.bus] += sol.p_g[k];
        net_q[g.bus] += sol.q_g[k];
    }
    for (i, bus) in net.buses.iter().enumerate() {
        assert!((s[i].re * net.base_mva - (net_p[i] - bus.p_demand)).abs() < 1e-6, "P at {i}");
        assert!((s[i].im * net.base_mva - (net_q[i] - bus.q_demand)).abs() < 1e-6, "Q at {i}");
        let m = sol.voltages[i].norm();
        assert!(m >= bus.v_min - 1e-7 && m <= bus.v_max + 1e-7);
    }
}

#[test]
fn triplet_dump_round_trips_dimensions() {
    let net = feeder8();
    let ops = build_operators(&net);
    let form = build_form(&net, &ops, &RegionSpec::central(&net), FormOptions { prox: false });
    let t = ObjectiveTerms { duals: &[], signs: &[], alpha: 0.0, prox_weight: 0.0, prox_center: &[] };
    let dump = form.objective_problem(&t).unwrap().triplet_dump();
    let first = dump.lines().next().unwrap();
    assert!(first.starts_with("# dims"));
    let b_lines = dump.lines().filter(|l| l.starts_with("b ")).count();
    assert_eq!(b_lines, form.n_constraints());
}
