use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{schema, NetError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: i64,
    /// MW
    pub p_demand: f64,
    /// MVAr
    pub q_demand: f64,
    /// per-unit magnitude bounds
    pub v_min: f64,
    pub v_max: f64,
    /// shunt admittance to ground in per unit (g + jb)
    #[serde(default)]
    pub shunt: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus_id: i64,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub cost_a: f64,
    pub cost_b: f64,
    pub cost_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from_bus: i64,
    pub to_bus: i64,
    /// 1/(r + jx) in per unit
    pub series_admittance: Complex64,
    /// total line charging, split evenly between both ends
    pub shunt: Complex64,
}

impl Line {
    pub fn from_impedance(from_bus: i64, to_bus: i64, r: f64, x: f64, charging_b: f64) -> Self {
        Line {
            from_bus,
            to_bus,
            series_admittance: Complex64::new(1.0, 0.0) / Complex64::new(r, x),
            shunt: Complex64::new(0.0, charging_b),
        }
    }
}

/// Validated network with the nodal admittance matrix assembled.
/// Buses are addressed internally by position 0..N in `buses`.
#[derive(Clone, Debug)]
pub struct PowerNetwork {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub y: DMatrix<Complex64>,
    index: BTreeMap<i64, usize>,
    gen_at: Vec<Option<usize>>,
    adjacency: Vec<Vec<usize>>,
}

impl PowerNetwork {
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        generators: Vec<Generator>,
        lines: Vec<Line>,
    ) -> Result<Self> {
        if !(base_mva > 0.0) {
            return Err(schema("base_mva", "must be positive"));
        }
        if buses.is_empty() {
            return Err(schema("buses", "at least one bus is required"));
        }
        let mut index = BTreeMap::new();
        for (k, b) in buses.iter().enumerate() {
            let path = format!("buses[{k}]");
            if index.insert(b.id, k).is_some() {
                return Err(schema(format!("{path}.id"), format!("duplicate bus id {}", b.id)));
            }
            for (field, v) in [("p_demand", b.p_demand), ("q_demand", b.q_demand), ("v_min", b.v_min), ("v_max", b.v_max)] {
                if !v.is_finite() {
                    return Err(schema(format!("{path}.{field}"), "not a finite number"));
                }
            }
            if !(b.v_min > 0.0) {
                return Err(schema(format!("{path}.v_min"), "must be positive"));
            }
            if b.v_min > b.v_max {
                return Err(schema(format!("{path}.v_min"), format!("v_min {} exceeds v_max {}", b.v_min, b.v_max)));
            }
        }
        let n = buses.len();
        let mut gen_at = vec![None; n];
        for (k, g) in generators.iter().enumerate() {
            let path = format!("generators[{k}]");
            let &bi = index
                .get(&g.bus_id)
                .ok_or_else(|| schema(format!("{path}.bus_id"), format!("unknown bus {}", g.bus_id)))?;
            if gen_at[bi].is_some() {
                return Err(schema(format!("{path}.bus_id"), format!("second generator at bus {}", g.bus_id)));
            }
            gen_at[bi] = Some(k);
            if g.p_min > g.p_max {
                return Err(schema(format!("{path}.p_min"), "p_min exceeds p_max"));
            }
            if g.q_min > g.q_max {
                return Err(schema(format!("{path}.q_min"), "q_min exceeds q_max"));
            }
            for (field, v) in [("cost_a", g.cost_a), ("cost_b", g.cost_b), ("cost_c", g.cost_c)] {
                if !(v >= 0.0) {
                    return Err(schema(format!("{path}.{field}"), "cost coefficients must be nonnegative"));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for (k, l) in lines.iter().enumerate() {
            let path = format!("lines[{k}]");
            let &i = index
                .get(&l.from_bus)
                .ok_or_else(|| schema(format!("{path}.from_bus"), format!("unknown bus {}", l.from_bus)))?;
            let &j = index
                .get(&l.to_bus)
                .ok_or_else(|| schema(format!("{path}.to_bus"), format!("unknown bus {}", l.to_bus)))?;
            if i == j {
                return Err(schema(path, "line connects a bus to itself"));
            }
            if !(l.series_admittance.norm() > 0.0) || !l.series_admittance.is_finite() {
                return Err(schema(format!("{path}.series_admittance"), "must be finite and nonzero"));
            }
            let ys = l.series_admittance;
            let half = l.shunt * 0.5;
            y[(i, i)] += ys + half;
            y[(j, j)] += ys + half;
            y[(i, j)] -= ys;
            y[(j, i)] -= ys;
            if !adjacency[i].contains(&j) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for (k, b) in buses.iter().enumerate() {
            y[(k, k)] += b.shunt;
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }
        let net = PowerNetwork {
            name: name.into(),
            base_mva,
            buses,
            generators,
            lines,
            y,
            index,
            gen_at,
            adjacency,
        };
        net.check_connected()?;
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.n_buses();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(k) => Err(NetError::Disconnected(self.buses[k].id)),
            None => Ok(()),
        }
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// Internal position of a bus id.
    pub fn bus_index(&self, id: i64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Undirected edges (i < j) in internal indices, deduplicated and sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (0..self.n_buses())
            .flat_map(|i| self.adjacency[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn is_tree(&self) -> bool {
        self.edges().len() + 1 == self.n_buses()
    }

    pub fn generator_at(&self, i: usize) -> Option<&Generator> {
        self.gen_at[i].map(|k| &self.generators[k])
    }

    /// Generator bounds at bus i; all zero on non-generator buses.
    pub fn bounds_at(&self, i: usize) -> (f64, f64, f64, f64) {
        match self.generator_at(i) {
            Some(g) => (g.p_min, g.p_max, g.q_min, g.q_max),
            None => (0.0, 0.0, 0.0, 0.0),
        }
    }

    pub fn total_demand(&self) -> (f64, f64) {
        self.buses.iter().fold((0.0, 0.0), |(p, q), b| (p + b.p_demand, q + b.q_demand))
    }

    /// Fuel cost of a dispatch given per generator (same order as `generators`).
    pub fn cost(&self, p_g: &[f64]) -> f64 {
        self.generators
            .iter()
            .zip(p_g)
            .map(|(g, &p)| g.cost_a * p * p + g.cost_b * p + g.cost_c)
            .sum()
    }

    /// Complex injections S_i = V_i (Σ_j Y_ij V_j)* in per unit.
    pub fn injections(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_buses();
        (0..n)
            .map(|i| {
                let current: Complex64 = (0..n).map(|j| self.y[(i, j)] * v[j]).sum();
                v[i] * current.conj()
            })
            .collect()
    }
}
