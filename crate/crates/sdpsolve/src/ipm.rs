use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdpError};
use crate::problem::{min_eig, BlockMat, SdpProblem, SparseSym};

#[derive(Clone, Debug, PartialEq)]
pub struct SdpIterate {
    pub x: BlockMat,
    pub y: Vec<f64>,
    pub z: BlockMat,
    /// Tr(XZ)/D
    pub mu_barrier: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// centering weight in βμI − XZ
    pub beta: f64,
    /// fraction-to-boundary factor
    pub eta: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// diagonal regularization of the Schur matrix when its factorization fails
    pub regularization: f64,
    pub record_trace: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            beta: 0.3,
            eta: 0.95,
            max_iter: 200,
            tol: 1e-8,
            regularization: 1e-12,
            record_trace: false,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(SdpError::Settings("beta must lie in (0, 1)".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SdpError::Settings("eta must lie in (0, 1)".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SdpError::Settings("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(SdpError::Settings("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub mu: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub duality_gap: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

/// Residuals are relative: ‖A(X) − b‖∞/(1 + ‖b‖∞), ‖C − Σ yA − Z‖max/(1 + ‖C‖max)
/// and Tr(XZ)/(1 + |pobj| + |dobj|).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub duality_gap: f64,
    pub status: SolveStatus,
    pub trace: Vec<TraceRow>,
}

impl SolveReport {
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "mu", "primal_infeasibility", "dual_infeasibility", "duality_gap", "step_primal", "step_dual"])
            .map_err(|e| SdpError::Io(e.to_string()))?;
        for r in &self.trace {
            w.write_record([
                r.k.to_string(),
                sig12(r.mu),
                sig12(r.primal_infeasibility),
                sig12(r.dual_infeasibility),
                sig12(r.duality_gap),
                sig12(r.step_primal),
                sig12(r.step_dual),
            ])
            .map_err(|e| SdpError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| SdpError::Io(e.to_string()))
    }
}

pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Constraint data grouped by block, in the internally scaled units.
struct Scaled {
    dims: Vec<usize>,
    c: SparseSym,
    a: Vec<SparseSym>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    c_scale: f64,
    /// per constraint: (block, entry indices into a[m].entries)
    by_block: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Scaled {
    fn new(p: &SdpProblem) -> Self {
        let row_scale: Vec<f64> = p
            .a
            .iter()
            .map(|a| {
                let f = a.frobenius();
                if f > 0.0 { f } else { 1.0 }
            })
            .collect();
        let c_scale = p.c.max_abs().max(1.0);
        let a: Vec<SparseSym> = p.a.iter().zip(&row_scale).map(|(a, s)| a.scaled(1.0 / s)).collect();
        let b = p.b.iter().zip(&row_scale).map(|(b, s)| b / s).collect();
        let by_block = a
            .iter()
            .map(|am| {
                let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
                for (k, e) in am.entries.iter().enumerate() {
                    match groups.iter_mut().find(|(b, _)| *b == e.block) {
                        Some((_, v)) => v.push(k),
                        None => groups.push((e.block, vec![k])),
                    }
                }
                groups
            })
            .collect();
        Scaled {
            dims: p.dims.clone(),
            c: p.c.scaled(1.0 / c_scale),
            a,
            b,
            row_scale,
            c_scale,
            by_block,
        }
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// η times the largest α keeping M + α·D positive definite, capped at 1.
fn step_to_boundary(m: &DMatrix<f64>, d: &DMatrix<f64>, eta: f64) -> Option<f64> {
    let n = m.nrows();
    if n == 1 {
        let (a, b) = (m[(0, 0)], d[(0, 0)]);
        return Some(if b < 0.0 { (eta * a / -b).min(1.0) } else { 1.0 });
    }
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l();
    let t = l.solve_lower_triangular(d)?;
    let s = l.solve_lower_triangular(&t.transpose())?;
    let s = (&s + s.transpose()) * 0.5;
    let lmin = min_eig(&s);
    Some(if lmin < 0.0 { (eta / -lmin).min(1.0) } else { 1.0 })
}

fn is_pd(m: &BlockMat) -> bool {
    m.blocks.iter().all(|b| if b.nrows() == 1 { b[(0, 0)] > 0.0 } else { Cholesky::new(b.clone()).is_some() })
}

struct Residuals {
    rp: Vec<f64>,
    rd: BlockMat,
    primal: f64,
    dual: f64,
    gap: f64,
    pobj: f64,
    dobj: f64,
    mu: f64,
}

fn residuals(s: &Scaled, p: &SdpProblem, x: &BlockMat, y: &[f64], z: &BlockMat) -> Residuals {
    let rp: Vec<f64> = s.a.iter().zip(&s.b).map(|(a, b)| b - a.dot(x)).collect();
    let mut rd = s.c.to_dense(&s.dims);
    for (a, &ym) in s.a.iter().zip(y) {
        a.add_to(&mut rd, -ym);
    }
    rd.axpy(-1.0, z);
    let b_max = p.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let primal = rp.iter().zip(&s.row_scale).fold(0.0f64, |a, (r, sc)| a.max((r * sc).abs())) / (1.0 + b_max);
    let dual = s.c_scale * rd.max_abs() / (1.0 + p.c.max_abs());
    let pobj = s.c_scale * s.c.dot(x);
    let dobj = s.c_scale * s.b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
    let xz = x.dot(z);
    let gap = s.c_scale * xz / (1.0 + pobj.abs() + dobj.abs());
    Residuals { rp, rd, primal, dual, gap, pobj, dobj, mu: xz / x.dim() as f64 }
}

/// Infeasible-start primal-dual path following with the HKM search direction:
///
///   B Δy = r,   B_mn = Tr(A_m X A_n Z⁻¹),
///   r_m = (b_m − Tr(A_m X)) − Tr(A_m (βμZ⁻¹ − X − X R_d Z⁻¹)),
///   ΔZ = R_d − Σ Δy_m A_m,   ΔX = sym(βμZ⁻¹ − X − X ΔZ Z⁻¹),
///
/// with R_d = C − Σ y_m A_m − Z and separate fraction-to-boundary steps for X and (y, Z).
/// Constraints are scaled to unit Frobenius norm and C to unit max-norm internally.
pub fn solve(problem: &SdpProblem, warm: Option<&SdpIterate>, settings: &SolverSettings) -> Result<(SdpIterate, SolveReport)> {
    problem.validate()?;
    settings.validate()?;
    let s = Scaled::new(problem);
    let m = s.a.len();
    let d = problem.dim() as f64;

    let (mut x, mut y, mut z) = match warm {
        Some(w) if w.x.dims() == s.dims && w.z.dims() == s.dims && w.y.len() == m => {
            let mut x = w.x.clone();
            let mut z = w.z.clone();
            z.scale(1.0 / s.c_scale);
            let y: Vec<f64> = w.y.iter().zip(&s.row_scale).map(|(y, r)| y * r / s.c_scale).collect();
            for mat in [&mut x, &mut z] {
                for b in &mut mat.blocks {
                    let shift = 1e-6 - min_eig(b);
                    if shift > 0.0 {
                        for k in 0..b.nrows() {
                            b[(k, k)] += shift;
                        }
                    }
                }
            }
            (x, y, z)
        }
        _ => {
            let tau = 1.0 + s.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            (BlockMat::scaled_identity(&s.dims, tau), vec![0.0; m], BlockMat::scaled_identity(&s.dims, tau))
        }
    };

    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    let mut last_steps = (0.0, 0.0);
    let mut res = residuals(&s, problem, &x, &y, &z);
    let merit = |r: &Residuals| r.primal.max(r.dual).max(r.gap);
    // near the optimum rounding can undo primal feasibility; keep the best iterate seen
    let mut best = (merit(&res), x.clone(), y.clone(), z.clone());
    loop {
        if settings.record_trace {
            trace.push(TraceRow {
                k: iterations,
                mu: res.mu * s.c_scale,
                primal_infeasibility: res.primal,
                dual_infeasibility: res.dual,
                duality_gap: res.gap,
                step_primal: last_steps.0,
                step_dual: last_steps.1,
            });
        }
        if res.primal <= settings.tol && res.dual <= settings.tol && res.gap <= settings.tol {
            status = SolveStatus::Optimal;
            break;
        }
        if iterations >= settings.max_iter {
            break;
        }
        match newton_step(&s, &x, &y, &z, &res, settings, d) {
            Some((nx, ny, nz, steps)) => {
                x = nx;
                y = ny;
                z = nz;
                last_steps = steps;
            }
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        }
        iterations += 1;
        res = residuals(&s, problem, &x, &y, &z);
        if merit(&res) < best.0 {
            best = (merit(&res), x.clone(), y.clone(), z.clone());
        }
    }
    if status != SolveStatus::Optimal && best.0 < merit(&res) {
        (_, x, y, z) = best;
        res = residuals(&s, problem, &x, &y, &z);
    }

    let mu_barrier = x.dot(&z) * s.c_scale / d;
    let y_out: Vec<f64> = y.iter().zip(&s.row_scale).map(|(y, r)| y * s.c_scale / r).collect();
    z.scale(s.c_scale);
    let report = SolveReport {
        objective: res.pobj,
        dual_objective: res.dobj,
        iterations,
        primal_infeasibility: res.primal,
        dual_infeasibility: res.dual,
        duality_gap: res.gap,
        status,
        trace,
    };
    Ok((SdpIterate { x, y: y_out, z, mu_barrier, beta: settings.beta }, report))
}

type Step = (BlockMat, Vec<f64>, BlockMat, (f64, f64));

fn newton_step(s: &Scaled, x: &BlockMat, y: &[f64], z: &BlockMat, res: &Residuals, st: &SolverSettings, d: f64) -> Option<Step> {
    let m = s.a.len();
    let zinv = BlockMat {
        blocks: z.blocks.iter().map(spd_inverse).collect::<Option<Vec<_>>>()?,
    };
    let sigma_mu = st.beta * x.dot(z) / d;

    // G_m = X A_m Z⁻¹ restricted to the blocks A_m touches
    let mut g: Vec<Vec<(usize, DMatrix<f64>)>> = Vec::with_capacity(m);
    for (am, groups) in s.a.iter().zip(&s.by_block) {
        let mut per = Vec::with_capacity(groups.len());
        for (blk, idx) in groups {
            let xb = &x.blocks[*blk];
            let n = xb.nrows();
            let mut xa = DMatrix::<f64>::zeros(n, n);
            let mut cols = Vec::new();
            for &k in idx {
                let e = am.entries[k];
                for (src, dst) in [(e.i, e.j), (e.j, e.i)] {
                    let mut col = xa.column_mut(dst);
                    col.axpy(e.v, &xb.column(src), 1.0);
                    if !cols.contains(&dst) {
                        cols.push(dst);
                    }
                    if e.i == e.j {
                        break;
                    }
                }
            }
            let zi = &zinv.blocks[*blk];
            let mut gm = DMatrix::<f64>::zeros(n, n);
            for &c in &cols {
                gm.ger(1.0, &xa.column(c), &zi.row(c).transpose(), 1.0);
            }
            per.push((*blk, gm));
        }
        g.push(per);
    }

    let mut bmat = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let mut v = 0.0;
            for (blk, gm) in &g[a] {
                if let Some((_, idx)) = s.by_block[b].iter().find(|(bb, _)| bb == blk) {
                    for &k in idx {
                        let e = s.a[b].entries[k];
                        v += if e.i == e.j { e.v * gm[(e.i, e.i)] } else { e.v * (gm[(e.i, e.j)] + gm[(e.j, e.i)]) };
                    }
                }
            }
            bmat[(a, b)] = v;
            bmat[(b, a)] = v;
        }
    }

    // H = σμZ⁻¹ − X − X R_d Z⁻¹
    let mut h = zinv.clone();
    h.scale(sigma_mu);
    h.axpy(-1.0, x);
    for (k, hb) in h.blocks.iter_mut().enumerate() {
        *hb -= &x.blocks[k] * &res.rd.blocks[k] * &zinv.blocks[k];
    }
    let rhs = DVector::from_iterator(m, s.a.iter().zip(&res.rp).map(|(a, rp)| rp - a.dot(&h)));

    let dy = solve_schur(bmat, &rhs, st.regularization)?;

    let mut dz = res.rd.clone();
    for (a, &v) in s.a.iter().zip(dy.iter()) {
        a.add_to(&mut dz, -v);
    }
    let mut dx = zinv.clone();
    dx.scale(sigma_mu);
    dx.axpy(-1.0, x);
    for (k, b) in dx.blocks.iter_mut().enumerate() {
        *b -= &x.blocks[k] * &dz.blocks[k] * &zinv.blocks[k];
    }
    dx.symmetrize();
    debug_assert!(dz.blocks.iter().all(|b| b == &b.transpose()));
    if !dx.is_finite() || !dz.is_finite() {
        return None;
    }

    let mut ap = 1.0f64;
    let mut ad = 1.0f64;
    for k in 0..s.dims.len() {
        ap = ap.min(step_to_boundary(&x.blocks[k], &dx.blocks[k], st.eta)?);
        ad = ad.min(step_to_boundary(&z.blocks[k], &dz.blocks[k], st.eta)?);
    }
    // guard against rounding at the boundary
    for _ in 0..30 {
        let mut nx = x.clone();
        nx.axpy(ap, &dx);
        let mut nz = z.clone();
        nz.axpy(ad, &dz);
        if is_pd(&nx) && is_pd(&nz) {
            let ny: Vec<f64> = y.iter().zip(dy.iter()).map(|(y, d)| y + ad * d).collect();
            return Some((nx, ny, nz, (ap, ad)));
        }
        ap *= 0.8;
        ad *= 0.8;
    }
    None
}

fn solve_schur(b: DMatrix<f64>, rhs: &DVector<f64>, reg: f64) -> Option<DVector<f64>> {
    if let Some(c) = Cholesky::new(b.clone()) {
        if let Some(x) = refine(&b, rhs, |r| c.solve(r)) {
            return Some(x);
        }
    }
    let scale = b.diagonal().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for k in 0..6 {
        let mut br = b.clone();
        let delta = reg * scale * 100f64.powi(k);
        for i in 0..br.nrows() {
            br[(i, i)] += delta;
        }
        if let Some(c) = Cholesky::new(br) {
            if let Some(x) = refine(&b, rhs, |r| c.solve(r)) {
                return Some(x);
            }
        }
    }
    let lu = b.clone().lu();
    refine(&b, rhs, |r| lu.solve(r).unwrap_or_else(|| DVector::from_element(r.len(), f64::NAN)))
}

/// Iterative refinement against the unshifted matrix: the factorization may be
/// regularized or lose digits when B is ill-conditioned near the optimum.
fn refine(b: &DMatrix<f64>, rhs: &DVector<f64>, solve: impl Fn(&DVector<f64>) -> DVector<f64>) -> Option<DVector<f64>> {
    let mut x = solve(rhs);
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    let mut r = rhs - b * &x;
    let mut norm = r.amax();
    for _ in 0..5 {
        if norm <= 1e-15 * rhs.amax() {
            break;
        }
        let cand = &x + solve(&r);
        let rc = rhs - b * &cand;
        let nc = rc.amax();
        if !(nc < 0.5 * norm) {
            break;
        }
        x = cand;
        r = rc;
        norm = nc;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_eig_program(c: DMatrix<f64>) -> SdpProblem {
        let n = c.nrows();
        let mut cs = SparseSym::new();
        for i in 0..n {
            for j in i..n {
                if c[(i, j)] != 0.0 {
                    cs.push(0, i, j, c[(i, j)]);
                }
            }
        }
        let mut tr = SparseSym::new();
        for i in 0..n {
            tr.push(0, i, i, 1.0);
        }
        SdpProblem { dims: vec![n], c: cs, a: vec![tr], b: vec![1.0] }
    }

    #[test]
    fn diag_min_eigenvalue() {
        let p = min_eig_program(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        let (it, rep) = solve(&p, None, &SolverSettings::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective - 1.0).abs() < 1e-7);
        assert!((it.x.blocks[0][(0, 0)] - 1.0).abs() < 1e-6);
        assert!(it.x.blocks[0][(1, 1)].abs() < 1e-6);
        assert!((it.y[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn identity_cost_is_one() {
        let p = min_eig_program(DMatrix::identity(3, 3));
        let (_, rep) = solve(&p, None, &SolverSettings::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn three_by_three_matches_eigen() {
        let c = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, -1.0]);
        let lmin = c.clone().symmetric_eigenvalues().min();
        let (_, rep) = solve(&min_eig_program(c), None, &SolverSettings::default()).unwrap();
        assert!((rep.objective - lmin).abs() < 1e-7);
        assert!((rep.dual_objective - lmin).abs() < 1e-7);
    }

    #[test]
    fn block_diagonal_lp() {
        // min x0 + 2 x1 s.t. x0 + x1 = 1, x0, x1 ≥ 0 as two 1×1 blocks
        let p = SdpProblem {
            dims: vec![1, 1],
            c: SparseSym::new().with(0, 0, 0, 1.0).with(1, 0, 0, 2.0),
            a: vec![SparseSym::new().with(0, 0, 0, 1.0).with(1, 0, 0, 1.0)],
            b: vec![1.0],
        };
        let (it, rep) = solve(&p, None, &SolverSettings::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective - 1.0).abs() < 1e-7);
        assert!(it.x.blocks[1][(0, 0)] < 1e-7);
    }

    #[test]
    fn trace_is_recorded_and_written() {
        let p = min_eig_program(DMatrix::identity(2, 2));
        let settings = SolverSettings { record_trace: true, ..Default::default() };
        let (_, rep) = solve(&p, None, &settings).unwrap();
        assert_eq!(rep.trace.len(), rep.iterations + 1);
        let mut buf = Vec::new();
        rep.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,mu,primal_infeasibility"));
        assert_eq!(text.lines().count(), rep.trace.len() + 1);
    }

    #[test]
    fn bad_settings_rejected() {
        let p = min_eig_program(DMatrix::identity(2, 2));
        let bad = SolverSettings { beta: 1.5, ..Default::default() };
        assert!(solve(&p, None, &bad).is_err());
    }

    #[test]
    fn max_iters_reported() {
        let p = min_eig_program(DMatrix::identity(4, 4) * 3.0);
        let few = SolverSettings { max_iter: 2, ..Default::default() };
        let (_, rep) = solve(&p, None, &few).unwrap();
        assert_eq!(rep.status, SolveStatus::MaxIters);
        assert_eq!(rep.iterations, 2);
    }
}
