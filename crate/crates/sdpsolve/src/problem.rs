use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdpError};

/// One stored coefficient of a symmetric block-diagonal matrix; `i <= j`
/// and the value sits at both (i, j) and (j, i).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub v: f64,
}

/// Sparse symmetric block-diagonal matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub entries: Vec<Entry>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds v at (i, j) and (j, i); repeated positions accumulate.
    pub fn push(&mut self, block: usize, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if let Some(e) = self.entries.iter_mut().find(|e| e.block == block && e.i == i && e.j == j) {
            e.v += v;
        } else {
            self.entries.push(Entry { block, i, j, v });
        }
    }

    pub fn with(mut self, block: usize, i: usize, j: usize, v: f64) -> Self {
        self.push(block, i, j, v);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|e| e.v == 0.0)
    }

    /// ⟨A, M⟩ = Tr(A M) for a (not necessarily symmetric) block matrix M.
    pub fn dot(&self, m: &BlockMat) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let b = &m.blocks[e.block];
                if e.i == e.j {
                    e.v * b[(e.i, e.i)]
                } else {
                    e.v * (b[(e.i, e.j)] + b[(e.j, e.i)])
                }
            })
            .sum()
    }

    /// M += s·A
    pub fn add_to(&self, m: &mut BlockMat, s: f64) {
        for e in &self.entries {
            let b = &mut m.blocks[e.block];
            b[(e.i, e.j)] += s * e.v;
            if e.i != e.j {
                b[(e.j, e.i)] += s * e.v;
            }
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| if e.i == e.j { e.v * e.v } else { 2.0 * e.v * e.v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.v.abs()))
    }

    pub fn scaled(&self, s: f64) -> SparseSym {
        SparseSym {
            entries: self.entries.iter().map(|e| Entry { v: e.v * s, ..*e }).collect(),
        }
    }

    pub fn to_dense(&self, dims: &[usize]) -> BlockMat {
        let mut m = BlockMat::zeros(dims);
        self.add_to(&mut m, 1.0);
        m
    }
}

/// Block-diagonal dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMat {
    pub blocks: Vec<DMatrix<f64>>,
}

impl BlockMat {
    pub fn zeros(dims: &[usize]) -> Self {
        BlockMat {
            blocks: dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
        }
    }

    pub fn scaled_identity(dims: &[usize], s: f64) -> Self {
        BlockMat {
            blocks: dims.iter().map(|&d| DMatrix::identity(d, d) * s).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    /// Tr(Aᵀ B)
    pub fn dot(&self, other: &BlockMat) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn axpy(&mut self, s: f64, other: &BlockMat) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * s;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in &mut self.blocks {
            *a *= s;
        }
    }

    pub fn symmetrize(&mut self) {
        for a in &mut self.blocks {
            let t = a.transpose();
            *a += t;
            *a *= 0.5;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter()).fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| min_eig(b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    /// Assembles the full D×D matrix.
    pub fn to_full(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut off = 0;
        for b in &self.blocks {
            let n = b.nrows();
            m.view_mut((off, off), (n, n)).copy_from(b);
            off += n;
        }
        m
    }
}

pub fn min_eig(b: &DMatrix<f64>) -> f64 {
    match b.nrows() {
        0 => f64::INFINITY,
        1 => b[(0, 0)],
        _ => b.clone().symmetric_eigenvalues().min(),
    }
}

/// min Tr(C X)  s.t.  Tr(A_m X) = b_m,  X ⪰ 0, X block-diagonal with block sizes `dims`.
/// The dual is max bᵀy s.t. C − Σ y_m A_m ⪰ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub dims: Vec<usize>,
    pub c: SparseSym,
    pub a: Vec<SparseSym>,
    pub b: Vec<f64>,
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn n_constraints(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(SdpError::Invalid("every block needs a positive size".into()));
        }
        if self.a.is_empty() {
            return Err(SdpError::Invalid("at least one constraint is required".into()));
        }
        if self.a.len() != self.b.len() {
            return Err(SdpError::Invalid(format!("{} constraint matrices but {} right-hand sides", self.a.len(), self.b.len())));
        }
        for (m, s) in std::iter::once(&self.c).chain(&self.a).enumerate() {
            for e in &s.entries {
                if e.block >= self.dims.len() || e.j >= self.dims[e.block] || e.i > e.j {
                    return Err(SdpError::Invalid(format!("matrix {m}: entry {e:?} outside the block structure")));
                }
                if !e.v.is_finite() {
                    return Err(SdpError::Invalid(format!("matrix {m}: non-finite coefficient")));
                }
            }
        }
        if let Some(m) = self.b.iter().position(|v| !v.is_finite()) {
            return Err(SdpError::Invalid(format!("b[{m}] is not finite")));
        }
        Ok(())
    }

    pub fn primal_objective(&self, x: &BlockMat) -> f64 {
        self.c.dot(x)
    }

    /// A(X) − b
    pub fn primal_residual(&self, x: &BlockMat) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a.dot(x) - b).collect()
    }

    /// C − Σ y_m A_m
    pub fn dual_slack(&self, y: &[f64]) -> BlockMat {
        let mut s = self.c.to_dense(&self.dims);
        for (a, &ym) in self.a.iter().zip(y) {
            a.add_to(&mut s, -ym);
        }
        s
    }

    /// One line per nonzero: `m block i j value`, with m = 0 for the objective,
    /// then `b m value` lines for the right-hand side.
    pub fn triplet_dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# dims {}\n", self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")));
        for (m, s) in std::iter::once(&self.c).chain(&self.a).enumerate() {
            for e in &s.entries {
                if e.v != 0.0 {
                    out.push_str(&format!("{m} {} {} {} {:.17e}\n", e.block, e.i, e.j, e.v));
                }
            }
        }
        for (m, b) in self.b.iter().enumerate() {
            out.push_str(&format!("b {} {:.17e}\n", m + 1, b));
        }
        out
    }
}

pub fn dual_objective(problem: &SdpProblem, y: &[f64]) -> f64 {
    problem.b.iter().zip(y).map(|(b, y)| b * y).sum()
}

/// Smallest eigenvalue of C − Σ y_m A_m; nonnegative iff y is dual feasible.
pub fn dual_feasibility(problem: &SdpProblem, y: &[f64]) -> f64 {
    problem.dual_slack(y).min_eigenvalue()
}
