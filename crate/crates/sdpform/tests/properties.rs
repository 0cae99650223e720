use nalgebra::DMatrix;
use netmodel::canonical::{feeder8, feeder8_three_regions, feeder8_two_regions};
use netmodel::{build_operators, partition, PowerNetwork};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdpform::embed::embed_hermitian;
use sdpform::{build_form, check_psd_embedding, EntryKind, FormOptions, ObjectiveTerms, RegionSpec, SdpStandardForm};
use sdpsolve::{solve, SolveStatus, SolverSettings};

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, rank: usize, shift: f64) -> DMatrix<Complex64> {
    let mut w = DMatrix::<Complex64>::identity(n, n) * Complex64::new(shift, 0.0);
    for _ in 0..rank {
        let v = DMatrix::from_fn(n, 1, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        w += &v * v.adjoint();
    }
    w
}

fn complex_min_eig(w: &DMatrix<Complex64>) -> f64 {
    nalgebra::SymmetricEigen::new(w.clone()).eigenvalues.min()
}

#[test]
fn embedding_psd_iff_hermitian_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 2];
    for k in 0..200 {
        let n = 1 + k % 6;
        let rank = rng.gen_range(0..=n);
        let shift = if k % 2 == 0 { 0.05 } else { -rng.gen_range(0.05..2.0) };
        let w = random_hermitian(&mut rng, n, rank, shift);
        let e = embed_hermitian(&w).unwrap();
        let mut ce: Vec<f64> = nalgebra::SymmetricEigen::new(w.clone()).eigenvalues.iter().flat_map(|&l| [l, l]).collect();
        let mut re: Vec<f64> = nalgebra::SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        ce.sort_by(f64::total_cmp);
        re.sort_by(f64::total_cmp);
        for (a, b) in ce.iter().zip(&re) {
            assert!((a - b).abs() < 1e-10);
        }
        let x = w.map(|c| c.re);
        let z = w.map(|c| c.im);
        let psd = complex_min_eig(&w) >= -1e-9;
        assert_eq!(check_psd_embedding(&x, &z).unwrap(), psd);
        seen[psd as usize] += 1;
    }
    assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
}

proptest! {
    #[test]
    fn symmetric_dual_is_blind_to_skew_part(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let g = &g + g.transpose();
        let z = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let z = &z - z.transpose();
        prop_assert!((g.transpose() * z).trace().abs() < 1e-12);
    }
}

fn central_voltages(net: &PowerNetwork) -> (Vec<Complex64>, Vec<f64>, Vec<f64>) {
    let ops = build_operators(net);
    let form = build_form(net, &ops, &RegionSpec::central(net), FormOptions { prox: false });
    let t = ObjectiveTerms { duals: &[], signs: &[], alpha: 0.0, prox_weight: 0.0, prox_center: &[] };
    let (it, _) = solve(&form.objective_problem(&t).unwrap(), None, &SolverSettings::default()).unwrap();
    let sol = form.extract_solution(&it.x);
    let mut p = vec![0.0; net.generators.len()];
    let mut q = vec![0.0; net.generators.len()];
    for (k, g) in form.layout.gens.iter().enumerate() {
        p[g.gen] = sol.p_g[k];
        q[g.gen] = sol.q_g[k];
    }
    (sol.voltages, p, q)
}

fn regional_point(form: &SdpStandardForm, v: &[Complex64], p: &[f64], q: &[f64], center: &[f64]) -> sdpsolve::BlockMat {
    let local_v: Vec<Complex64> = form.spec.buses.iter().map(|&i| v[i]).collect();
    let lp: Vec<f64> = form.layout.gens.iter().map(|g| p[g.gen]).collect();
    let lq: Vec<f64> = form.layout.gens.iter().map(|g| q[g.gen]).collect();
    form.rank_one_point(&local_v, &lp, &lq, center)
}

#[test]
fn central_solution_plugs_into_every_region() {
    let net = feeder8();
    let ops = build_operators(&net);
    let (v, p, q) = central_voltages(&net);
    for assignment in [feeder8_two_regions(), feeder8_three_regions()] {
        let part = partition(&net, &assignment).unwrap();
        for r in 0..part.n_regions {
            let spec = RegionSpec::from_partition(&part, r);
            let form = build_form(&net, &ops, &spec, FormOptions { prox: true });
            let center = vec![0.1; spec.boundary.len()];
            let x = regional_point(&form, &v, &p, &q, &center);
            let prob = form.problem(form.cost.clone(), &center).unwrap();
            for (m, res) in prob.primal_residual(&x).iter().enumerate() {
                assert!(res.abs() < 1e-8, "region {r} row {m} {:?}: {res}", form.kinds[m]);
            }
            for blk in &x.blocks {
                assert!(sdpsolve::min_eig(blk) > -1e-9 || blk.nrows() == 1 && blk[(0, 0)] > -1e-9);
            }
        }
    }
}

#[test]
fn objective_matrix_matches_scalar_objective() {
    let net = feeder8();
    let ops = build_operators(&net);
    let (v, p, q) = central_voltages(&net);
    let part = partition(&net, &feeder8_three_regions()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for r in 0..part.n_regions {
        let spec = RegionSpec::from_partition(&part, r);
        let form = build_form(&net, &ops, &spec, FormOptions { prox: true });
        let nb = spec.boundary.len();
        let center: Vec<f64> = (0..nb).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = regional_point(&form, &v, &p, &q, &center);
        let values = form.boundary_values(&x);
        let neighbor: Vec<f64> = values.iter().map(|b| b + rng.gen_range(-0.1..0.1)).collect();
        let signs: Vec<f64> = values.iter().zip(&neighbor).map(|(a, b)| (a - b).signum()).collect();
        let duals: Vec<f64> = (0..nb).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let t = ObjectiveTerms { duals: &duals, signs: &signs, alpha: 0.48, prox_weight: 1e5, prox_center: &center };
        let a0 = form.build_objective(&t).unwrap();
        let lp: Vec<f64> = form.layout.gens.iter().map(|g| p[g.gen]).collect();
        // α|v − c| = α·g·(v − c), so A_0 carries the α·g·c terms as a constant offset
        let offset: f64 = spec.boundary.iter().enumerate().map(|(k, e)| e.kind.weight() * 0.48 * signs[k] * neighbor[k]).sum();
        let direct = form.scalar_objective(&lp, &values, &neighbor, &t) + offset;
        let lhs = a0.dot(&x) + form.objective_offset(&t);
        assert!((lhs - direct).abs() < 1e-6 * direct.abs().max(1.0), "{lhs} vs {direct}");
    }
}

#[test]
fn boundary_forms_read_the_right_entries() {
    let net = feeder8();
    let ops = build_operators(&net);
    let part = partition(&net, &feeder8_two_regions()).unwrap();
    let spec = RegionSpec::from_partition(&part, 1);
    let form = build_form(&net, &ops, &spec, FormOptions { prox: false });
    let v: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(1.0 + 0.01 * k as f64, -0.03 * k as f64)).collect();
    let local: Vec<Complex64> = spec.buses.iter().map(|&i| v[i]).collect();
    let x = form.rank_one_point(&local, &[1.0], &[0.0], &[]);
    for (k, e) in spec.boundary.iter().enumerate() {
        let got = form.boundary_values(&x)[k];
        let want = match e.kind {
            EntryKind::Diag(i) => v[i].norm_sqr(),
            EntryKind::Re(i, j) => (v[i] * v[j].conj()).re,
            EntryKind::Im(i, j) => (v[i] * v[j].conj()).im,
        };
        assert!((got - want).abs() < 1e-12, "{}", e.kind.label());
    }
}

#[test]
fn regional_prox_problem_solves() {
    let net = feeder8();
    let ops = build_operators(&net);
    let (v, p, q) = central_voltages(&net);
    let part = partition(&net, &feeder8_two_regions()).unwrap();
    for r in 0..2 {
        let spec = RegionSpec::from_partition(&part, r);
        let form = build_form(&net, &ops, &spec, FormOptions { prox: true });
        let nb = spec.boundary.len();
        let center = form.boundary_values(&regional_point(&form, &v, &p, &q, &vec![0.0; nb]));
        let zeros = vec![0.0; nb];
        let t = ObjectiveTerms { duals: &zeros, signs: &zeros, alpha: 0.48, prox_weight: 1e5, prox_center: &center };
        let (it, report) = solve(&form.objective_problem(&t).unwrap(), None, &SolverSettings::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal, "region {r}");
        let sol = form.extract_solution(&it.x);
        assert!(sol.warnings.is_empty());
        for (a, b) in sol.boundary.iter().zip(&center) {
            assert!((a - b).abs() < 1e-2, "region {r}: {a} vs {b}");
        }
    }
}
