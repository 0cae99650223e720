use nalgebra::DMatrix;
use netmodel::operators::{basis_m, n_skew, n_sym, restrict, CMatrix};
use netmodel::{AdmittanceOperators, PowerNetwork};
use num_complex::Complex64;
use sdpsolve::{BlockMat, SdpProblem, SparseSym};
use serde::{Deserialize, Serialize};

use crate::embed::{half_embedding, to_complex, unembed};
use crate::error::{FormError, Result};
use crate::layout::VariableLayout;
use crate::region::{EntryKind, RegionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// P_G·d − P_D = base·Tr(𝐘_i W) at an own bus
    PBalance(usize),
    QBalance(usize),
    /// Tr(M_i W) + u² = V̄²
    VUpper(usize),
    /// Tr(M_i W) − l² = V̲²
    VLower(usize),
    PUpper(usize),
    PLower(usize),
    /// (P·d)² slot bounded by max(P̲², P̄²)
    PSquare(usize),
    QUpper(usize),
    QLower(usize),
    QSquare(usize),
    /// d² = 1 in the x1 and x2 blocks of a generator
    DNormP(usize),
    DNormQ(usize),
    /// e − v = −c for boundary scalar k (prox centre c)
    ProxLink(usize),
    ProxUnit(usize),
}

/// Options fixed when the form is built.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormOptions {
    /// include the proximal epigraph blocks (x7)
    pub prox: bool,
}

/// Inputs that change between solves; they enter only A_0 and the prox rows of b.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveTerms<'a> {
    /// dual coefficient per boundary scalar (Γ or Λ entry)
    pub duals: &'a [f64],
    /// subgradient coefficient per boundary scalar in [−1, 1]
    pub signs: &'a [f64],
    pub alpha: f64,
    pub prox_weight: f64,
    /// prox centre per boundary scalar
    pub prox_center: &'a [f64],
}

/// The standard form for one region: fixed A_m, b_m and the hooks for A_0.
#[derive(Clone, Debug)]
pub struct SdpStandardForm {
    pub spec: RegionSpec,
    pub layout: VariableLayout,
    pub a: Vec<SparseSym>,
    pub b: Vec<f64>,
    pub kinds: Vec<ConstraintKind>,
    /// cost part of A_0 (x1 cost blocks)
    pub cost: SparseSym,
    /// linear form of each boundary scalar on the x5 block; these are the sign slots of A_0
    pub forms: Vec<SparseSym>,
    prox_rows: Vec<usize>,
    pub options: FormOptions,
    pub base_mva: f64,
    gen_costs: Vec<[f64; 3]>,
}

/// Hermitian matrix on the local bus set, realized on the embedding block.
fn sparse_from_hermitian(block: usize, h: &CMatrix, scale: f64, out: &mut SparseSym) {
    let e = half_embedding(h);
    for i in 0..e.nrows() {
        for j in i..e.ncols() {
            let v = e[(i, j)] * scale;
            if v != 0.0 {
                out.push(block, i, j, v);
            }
        }
    }
}

#[derive(Default)]
struct Rows {
    a: Vec<SparseSym>,
    b: Vec<f64>,
    kinds: Vec<ConstraintKind>,
}

impl Rows {
    fn push(&mut self, m: SparseSym, rhs: f64, k: ConstraintKind) -> usize {
        self.a.push(m);
        self.b.push(rhs);
        self.kinds.push(k);
        self.a.len() - 1
    }
}

fn local_operator(global: &CMatrix, idx: &[usize]) -> CMatrix {
    restrict(global, idx)
}

pub fn entry_form(spec: &RegionSpec, kind: EntryKind, block: usize) -> SparseSym {
    let n = spec.buses.len();
    let h = match kind {
        EntryKind::Diag(i) => basis_m(spec.local(i), n),
        EntryKind::Re(i, j) => n_sym(spec.local(i), spec.local(j), n),
        EntryKind::Im(i, j) => n_skew(spec.local(i), spec.local(j), n),
    };
    let mut s = SparseSym::new();
    sparse_from_hermitian(block, &h, 1.0, &mut s);
    s
}

pub fn build_form(net: &PowerNetwork, ops: &AdmittanceOperators, spec: &RegionSpec, options: FormOptions) -> SdpStandardForm {
    let n = spec.buses.len();
    let gens: Vec<(usize, usize)> = net
        .generators
        .iter()
        .enumerate()
        .filter_map(|(k, g)| {
            let bus = net.bus_index(g.bus_id).expect("validated generator bus");
            spec.own.contains(&bus).then_some((k, bus))
        })
        .collect();
    let n_prox = if options.prox { spec.boundary.len() } else { 0 };
    let layout = VariableLayout::build(&gens, n, n_prox);
    let wb = layout.w_block;
    let base = net.base_mva;

    let mut rows = Rows::default();
    let mut push = |m: SparseSym, rhs: f64, k: ConstraintKind| rows.push(m, rhs, k);

    for &i in &spec.own {
        let bus = &net.buses[i];
        let slot = layout.gens.iter().find(|g| g.bus == i);
        let mut p = SparseSym::new();
        let mut q = SparseSym::new();
        if let Some(g) = slot {
            p.push(g.x1, 0, 1, 0.5);
            q.push(g.x2, 0, 1, 0.5);
        }
        sparse_from_hermitian(wb, &local_operator(&ops.y_herm[i], &spec.buses), -base, &mut p);
        sparse_from_hermitian(wb, &local_operator(&ops.y_skew[i], &spec.buses), -base, &mut q);
        push(p, bus.p_demand, ConstraintKind::PBalance(i));
        push(q, bus.q_demand, ConstraintKind::QBalance(i));
    }
    for (k, &i) in spec.buses.iter().enumerate() {
        let bus = &net.buses[i];
        let (up, lo) = layout.volt_slacks[k];
        let mut m = SparseSym::new();
        sparse_from_hermitian(wb, &basis_m(k, n), 1.0, &mut m);
        push(m.clone().with(up, 0, 0, 1.0), bus.v_max * bus.v_max, ConstraintKind::VUpper(i));
        push(m.with(lo, 0, 0, -1.0), bus.v_min * bus.v_min, ConstraintKind::VLower(i));
    }
    let mut gen_costs = Vec::new();
    for g in &layout.gens {
        let gen = &net.generators[g.gen];
        let pd = SparseSym::new().with(g.x1, 0, 1, 0.5);
        let qd = SparseSym::new().with(g.x2, 0, 1, 0.5);
        push(pd.clone().with(g.p_upper, 0, 0, 1.0), gen.p_max, ConstraintKind::PUpper(g.gen));
        push(pd.with(g.p_lower, 0, 0, -1.0), gen.p_min, ConstraintKind::PLower(g.gen));
        let psq = gen.p_min.powi(2).max(gen.p_max.powi(2));
        push(SparseSym::new().with(g.x1, 0, 0, 1.0).with(g.p_square, 0, 0, 1.0), psq, ConstraintKind::PSquare(g.gen));
        push(qd.clone().with(g.q_upper, 0, 0, 1.0), gen.q_max, ConstraintKind::QUpper(g.gen));
        push(qd.with(g.q_lower, 0, 0, -1.0), gen.q_min, ConstraintKind::QLower(g.gen));
        let qsq = gen.q_min.powi(2).max(gen.q_max.powi(2));
        push(SparseSym::new().with(g.x2, 0, 0, 1.0).with(g.q_square, 0, 0, 1.0), qsq, ConstraintKind::QSquare(g.gen));
        push(SparseSym::new().with(g.x1, 1, 1, 1.0), 1.0, ConstraintKind::DNormP(g.gen));
        push(SparseSym::new().with(g.x2, 1, 1, 1.0), 1.0, ConstraintKind::DNormQ(g.gen));
        gen_costs.push([gen.cost_a, gen.cost_b, gen.cost_c]);
    }

    let forms: Vec<SparseSym> = spec.boundary.iter().map(|e| entry_form(spec, e.kind, wb)).collect();
    let mut prox_rows = Vec::new();
    for (k, &blk) in layout.prox_blocks.iter().enumerate() {
        let mut link = SparseSym::new().with(blk, 0, 1, 0.5);
        for e in &forms[k].entries {
            link.push(e.block, e.i, e.j, -e.v);
        }
        prox_rows.push(push(link, 0.0, ConstraintKind::ProxLink(k)));
        push(SparseSym::new().with(blk, 1, 1, 1.0), 1.0, ConstraintKind::ProxUnit(k));
    }

    let mut cost = SparseSym::new();
    for (g, c) in layout.gens.iter().zip(&gen_costs) {
        cost.push(g.x1, 0, 0, c[0]);
        cost.push(g.x1, 0, 1, c[1] / 2.0);
        cost.push(g.x1, 1, 1, c[2]);
    }

    let Rows { a, b, kinds } = rows;
    SdpStandardForm {
        spec: spec.clone(),
        layout,
        a,
        b,
        kinds,
        cost,
        forms,
        prox_rows,
        options,
        base_mva: base,
        gen_costs,
    }
}

/// Values extracted from a solved (or hand-built) X.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSolution {
    /// MW per generator in layout order
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    /// d_g read from the x1 block
    pub d_g: Vec<f64>,
    /// W = X + jZ over B_r
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// λ₂/λ₁ of W
    pub rank1_residual: f64,
    /// principal-eigenvector voltages over B_r, first bus rotated to zero angle
    pub voltages: Vec<Complex64>,
    /// boundary scalars in `spec.boundary` order
    pub boundary: Vec<f64>,
    /// Σ a P² + b P + c over the region's generators
    pub cost: f64,
    pub warnings: Vec<String>,
}

impl SdpStandardForm {
    pub fn n_constraints(&self) -> usize {
        self.a.len()
    }

    /// A_0 = cost + Σ_k w_k (dual_k + α·g_k)·v_k + Σ_k w_k (τ/2)·s_k. With the prox blocks
    /// present v_k is replaced by e_k, see [`Self::objective_offset`].
    pub fn build_objective(&self, t: &ObjectiveTerms) -> Result<SparseSym> {
        let nb = self.spec.boundary.len();
        if t.duals.len() != nb || t.signs.len() != nb {
            return Err(FormError::Shape(format!("expected {nb} duals and signs, got {} and {}", t.duals.len(), t.signs.len())));
        }
        if let Some(k) = t.signs.iter().position(|s| !(-1.0..=1.0).contains(s)) {
            return Err(FormError::Invalid(format!("sign coefficient {} outside [-1, 1] at {k}", t.signs[k])));
        }
        let mut c = self.cost.clone();
        for (k, e) in self.spec.boundary.iter().enumerate() {
            let coef = e.kind.weight() * (t.duals[k] + t.alpha * t.signs[k]);
            if self.options.prox {
                // v = e + centre, so the linear term rides on e and the objective stays small near consensus
                let blk = self.layout.prox_blocks[k];
                c.push(blk, 0, 0, e.kind.weight() * t.prox_weight / 2.0);
                if coef != 0.0 {
                    c.push(blk, 0, 1, coef / 2.0);
                }
            } else if coef != 0.0 {
                for en in &self.forms[k].entries {
                    c.push(en.block, en.i, en.j, coef * en.v);
                }
            }
        }
        Ok(c)
    }

    /// Constant dropped from A_0 when the linear boundary terms are carried by the prox
    /// variables: Tr(A_0 X) + offset equals the objective written in the boundary values.
    pub fn objective_offset(&self, t: &ObjectiveTerms) -> f64 {
        if !self.options.prox {
            return 0.0;
        }
        self.spec
            .boundary
            .iter()
            .enumerate()
            .map(|(k, e)| e.kind.weight() * (t.duals[k] + t.alpha * t.signs[k]) * t.prox_center[k])
            .sum()
    }

    /// The solver problem for a given A_0 and prox centre.
    pub fn problem(&self, a0: SparseSym, prox_center: &[f64]) -> Result<SdpProblem> {
        let mut b = self.b.clone();
        if self.options.prox {
            if prox_center.len() != self.prox_rows.len() {
                return Err(FormError::Shape(format!("expected {} prox centres, got {}", self.prox_rows.len(), prox_center.len())));
            }
            for (&row, &c) in self.prox_rows.iter().zip(prox_center) {
                b[row] = -c;
            }
        }
        Ok(SdpProblem { dims: self.layout.block_dims.clone(), c: a0, a: self.a.clone(), b })
    }

    pub fn objective_problem(&self, t: &ObjectiveTerms) -> Result<SdpProblem> {
        let a0 = self.build_objective(t)?;
        self.problem(a0, t.prox_center)
    }

    pub fn boundary_values(&self, x: &BlockMat) -> Vec<f64> {
        self.forms.iter().map(|f| f.dot(x)).collect()
    }

    pub fn extract_solution(&self, x: &BlockMat) -> RegionSolution {
        let mut warnings = Vec::new();
        let mut p_g = Vec::new();
        let mut q_g = Vec::new();
        let mut d_g = Vec::new();
        let mut cost = 0.0;
        for (g, c) in self.layout.gens.iter().zip(&self.gen_costs) {
            let x1 = &x.blocks[g.x1];
            let x2 = &x.blocks[g.x2];
            let d2 = x1[(1, 1)];
            if (d2 - 1.0).abs() > 1e-4 || (x2[(1, 1)] - 1.0).abs() > 1e-4 {
                warnings.push(format!("generator {}: d² = {d2:.6} (relaxation inexact)", g.gen));
            }
            let p = x1[(0, 1)];
            p_g.push(p);
            q_g.push(x2[(0, 1)]);
            d_g.push(d2.max(0.0).sqrt());
            cost += c[0] * p * p + c[1] * p + c[2];
        }
        let (xr, zr) = unembed(&x.blocks[self.layout.w_block]);
        let w = to_complex(&xr, &zr);
        let eig = nalgebra::SymmetricEigen::new(w);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let l1 = eig.eigenvalues[order[0]];
        let l2 = order.get(1).map_or(0.0, |&k| eig.eigenvalues[k]);
        let rank1_residual = if l1 > 0.0 { l2.max(0.0) / l1 } else { f64::INFINITY };
        let u = eig.eigenvectors.column(order[0]);
        let phase = if u[0].norm() > 0.0 { u[0].conj() / u[0].norm() } else { Complex64::new(1.0, 0.0) };
        let voltages = u.iter().map(|c| c * phase * l1.max(0.0).sqrt()).collect();
        RegionSolution {
            p_g,
            q_g,
            d_g,
            x: xr,
            z: zr,
            rank1_residual,
            voltages,
            boundary: self.boundary_values(x),
            cost,
            warnings,
        }
    }

    /// Builds the rank-one X for a given operating point: voltages over B_r,
    /// dispatch per generator slot and the prox centre.
    pub fn rank_one_point(&self, v: &[Complex64], p_g: &[f64], q_g: &[f64], prox_center: &[f64]) -> BlockMat {
        let mut x = BlockMat::zeros(&self.layout.block_dims);
        let net_demand = |k: usize| (p_g[k], q_g[k]);
        for (k, g) in self.layout.gens.iter().enumerate() {
            let (p, q) = net_demand(k);
            x.blocks[g.x1] = DMatrix::from_row_slice(2, 2, &[p * p, p, p, 1.0]);
            x.blocks[g.x2] = DMatrix::from_row_slice(2, 2, &[q * q, q, q, 1.0]);
        }
        let n = v.len();
        let wr = DMatrix::from_fn(n, n, |i, j| (v[i] * v[j].conj()).re);
        let wi = DMatrix::from_fn(n, n, |i, j| (v[i] * v[j].conj()).im);
        x.blocks[self.layout.w_block] = crate::embed::embed_real(&wr, &wi).expect("outer product is Hermitian");
        // slacks take whatever value closes each equality
        for (m, kind) in self.kinds.iter().enumerate() {
            let slack_block = match kind {
                ConstraintKind::VUpper(i) => Some((self.layout.volt_slacks[self.spec.local(*i)].0, 1.0)),
                ConstraintKind::VLower(i) => Some((self.layout.volt_slacks[self.spec.local(*i)].1, -1.0)),
                ConstraintKind::PUpper(g) => self.gen_slot(*g).map(|s| (s.p_upper, 1.0)),
                ConstraintKind::PLower(g) => self.gen_slot(*g).map(|s| (s.p_lower, -1.0)),
                ConstraintKind::PSquare(g) => self.gen_slot(*g).map(|s| (s.p_square, 1.0)),
                ConstraintKind::QUpper(g) => self.gen_slot(*g).map(|s| (s.q_upper, 1.0)),
                ConstraintKind::QLower(g) => self.gen_slot(*g).map(|s| (s.q_lower, -1.0)),
                ConstraintKind::QSquare(g) => self.gen_slot(*g).map(|s| (s.q_square, 1.0)),
                _ => None,
            };
            if let Some((blk, sign)) = slack_block {
                let without: f64 = self.a[m].entries.iter().filter(|e| e.block != blk).map(|e| {
                    let b = &x.blocks[e.block];
                    if e.i == e.j { e.v * b[(e.i, e.i)] } else { e.v * (b[(e.i, e.j)] + b[(e.j, e.i)]) }
                }).sum();
                x.blocks[blk][(0, 0)] = sign * (self.b[m] - without);
            }
        }
        if self.options.prox {
            let vals = self.boundary_values(&x);
            for (k, &blk) in self.layout.prox_blocks.iter().enumerate() {
                let e = vals[k] - prox_center[k];
                x.blocks[blk] = DMatrix::from_row_slice(2, 2, &[e * e, e, e, 1.0]);
            }
        }
        x
    }

    fn gen_slot(&self, gen: usize) -> Option<&crate::layout::GenSlots> {
        self.layout.gens.iter().find(|s| s.gen == gen)
    }

    /// Regional fuel cost plus Σ_k w_k (dual_k·v_k + α|v_k − c_k|) + Σ_k w_k (τ/2)(v_k − o_k)²,
    /// evaluated directly from an operating point.
    pub fn scalar_objective(&self, p_g: &[f64], boundary: &[f64], neighbor_values: &[f64], t: &ObjectiveTerms) -> f64 {
        let fuel: f64 = self.gen_costs.iter().zip(p_g).map(|(c, p)| c[0] * p * p + c[1] * p + c[2]).sum();
        let mut rest = 0.0;
        for (k, e) in self.spec.boundary.iter().enumerate() {
            let w = e.kind.weight();
            rest += w * (t.duals[k] * boundary[k] + t.alpha * (boundary[k] - neighbor_values[k]).abs());
            if self.options.prox {
                rest += w * t.prox_weight / 2.0 * (boundary[k] - t.prox_center[k]).powi(2);
            }
        }
        fuel + rest
    }
}
