use std::collections::BTreeSet;

use nalgebra::DMatrix;
use sdpform::{EntryKind, RegionSpec};
use serde::{Deserialize, Serialize};

use crate::error::{AdmmError, Result};

/// Why the inner S1 loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerStop {
    /// operator reported every weighted difference zero at codec resolution
    Converged,
    /// every subgradient bracket is narrower than the configured tolerance
    Bracketed,
    /// inner iteration cap reached
    Cap,
    /// region has no neighbours; one plain regional solve
    Isolated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionState {
    pub region: usize,
    /// outer iteration this state belongs to
    pub t: usize,
    /// Re W and Im W over B_r
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    /// boundary scalars in the region spec's order
    pub boundary: Vec<f64>,
    pub cost: f64,
    pub rank1_residual: f64,
    pub inner_iterations: usize,
    pub inner_stop: InnerStop,
    pub warnings: Vec<String>,
}

impl RegionState {
    /// Flat profile v = 1∠0 over B_r with no dispatch.
    pub fn flat(spec: &RegionSpec, boundary: Vec<f64>) -> Self {
        let n = spec.buses.len();
        RegionState {
            region: spec.region,
            t: 0,
            x: DMatrix::from_element(n, n, 1.0),
            z: DMatrix::zeros(n, n),
            p_g: Vec::new(),
            q_g: Vec::new(),
            boundary,
            cost: 0.0,
            rank1_residual: 0.0,
            inner_iterations: 0,
            inner_stop: InnerStop::Isolated,
            warnings: Vec::new(),
        }
    }
}

/// Γ^r_l and Λ^r_l stored once per boundary scalar; an off-diagonal scalar
/// stands for the (i,j) and (j,i) entries, which always move together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub values: Vec<f64>,
}

impl DualState {
    pub fn zeros(spec: &RegionSpec) -> Self {
        DualState { values: vec![0.0; spec.boundary.len()] }
    }

    /// Γ^r_l (symmetric) and Λ^r_l (skew-symmetric) over the tie buses shared with l.
    pub fn matrices(&self, spec: &RegionSpec, l: usize) -> (Vec<usize>, DMatrix<f64>, DMatrix<f64>) {
        let mut buses = BTreeSet::new();
        for e in spec.boundary.iter().filter(|e| e.neighbor == l) {
            match e.kind {
                EntryKind::Diag(i) => {
                    buses.insert(i);
                }
                EntryKind::Re(i, j) | EntryKind::Im(i, j) => {
                    buses.extend([i, j]);
                }
            }
        }
        let buses: Vec<usize> = buses.into_iter().collect();
        let pos = |i: usize| buses.binary_search(&i).unwrap();
        let n = buses.len();
        let mut gamma = DMatrix::zeros(n, n);
        let mut lambda = DMatrix::zeros(n, n);
        for (k, e) in spec.boundary.iter().enumerate().filter(|(_, e)| e.neighbor == l) {
            let v = self.values[k];
            match e.kind {
                EntryKind::Diag(i) => gamma[(pos(i), pos(i))] = v,
                EntryKind::Re(i, j) => {
                    gamma[(pos(i), pos(j))] = v;
                    gamma[(pos(j), pos(i))] = v;
                }
                EntryKind::Im(i, j) => {
                    lambda[(pos(i), pos(j))] = v;
                    lambda[(pos(j), pos(i))] = -v;
                }
            }
        }
        (buses, gamma, lambda)
    }
}

/// S2: add the realized ρ∘(X^r − X^l) and κ∘(Z^r − Z^l) increments.
pub fn dual_update(duals: &DualState, increments: &[f64]) -> Result<DualState> {
    if increments.len() != duals.values.len() {
        return Err(AdmmError::Contract(format!("{} increments for {} dual entries", increments.len(), duals.values.len())));
    }
    if let Some(k) = increments.iter().position(|v| !v.is_finite()) {
        return Err(AdmmError::Contract(format!("non-finite dual increment at entry {k}")));
    }
    Ok(DualState { values: duals.values.iter().zip(increments).map(|(a, b)| a + b).collect() })
}

/// Ψ_r = ‖stack(X^r_l, Z^r_l) − stack(X^l_r, Z^l_r)‖₂ over all of r's blocks, counting
/// each off-diagonal scalar for both of its matrix entries.
pub fn residual(spec: &RegionSpec, own: &[f64], neighbor: &[f64]) -> f64 {
    spec.boundary
        .iter()
        .zip(own.iter().zip(neighbor))
        .map(|(e, (a, b))| e.kind.weight() * (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn converged(psi: &[f64], epsilon: f64) -> bool {
    psi.iter().all(|&p| p <= epsilon)
}

/// Entrywise sign of the plain difference; 0 on ties.
pub fn subgradient_signs_plain(own: &[f64], neighbor: &[f64]) -> Vec<i8> {
    own.iter()
        .zip(neighbor)
        .map(|(a, b)| match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use netmodel::canonical::{feeder8, feeder8_two_regions};
    use netmodel::partition;

    fn spec() -> RegionSpec {
        let p = partition(&feeder8(), &feeder8_two_regions()).unwrap();
        RegionSpec::from_partition(&p, 0)
    }

    #[test]
    fn residual_examples() {
        let s = spec();
        let a = vec![1.0, 0.9, 0.95, 0.01];
        assert_eq!(residual(&s, &a, &a), 0.0);
        let mut b = a.clone();
        b[0] += 1e-3;
        assert!((residual(&s, &a, &b) - 1e-3).abs() < 1e-15);
        // an off-diagonal scalar carries two matrix entries
        let mut c = a.clone();
        c[2] += 1e-3;
        assert!((residual(&s, &a, &c) - 2f64.sqrt() * 1e-3).abs() < 1e-15);
        assert!(converged(&[1e-7, 5e-7], 1e-6));
        assert!(!converged(&[1e-7, 2e-6], 1e-6));
    }

    #[test]
    fn dual_update_examples() {
        let s = spec();
        let d = DualState::zeros(&s);
        assert_eq!(dual_update(&d, &[0.0; 4]).unwrap(), d);
        let d1 = dual_update(&d, &[20000.0 * 1e-3, 0.0, 0.0, 0.0]).unwrap();
        assert!((d1.values[0] - 20.0).abs() < 1e-12);
        assert!(dual_update(&d, &[0.0; 3]).is_err());
        assert!(dual_update(&d, &[f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn dual_matrices_keep_symmetry_classes() {
        let s = spec();
        let d = DualState { values: vec![1.0, 2.0, 3.0, 4.0] };
        let (buses, g, l) = d.matrices(&s, 1);
        assert_eq!(buses, vec![2, 3]);
        assert_eq!(g, g.transpose());
        assert_eq!(l, -l.transpose());
        assert_eq!(g[(0, 1)], 3.0);
        assert_eq!(l[(0, 1)], 4.0);
        assert_eq!(l[(1, 0)], -4.0);
    }

    #[test]
    fn plain_signs() {
        assert_eq!(subgradient_signs_plain(&[2.0, 3.0], &[1.0, 1.0]), vec![1, 1]);
        assert_eq!(subgradient_signs_plain(&[1.0, 1.0], &[1.0, 1.0]), vec![0, 0]);
        assert_eq!(subgradient_signs_plain(&[0.0, 2.0, 1.0], &[1.0, 1.0, 1.0]), vec![-1, 1, 0]);
    }
}
