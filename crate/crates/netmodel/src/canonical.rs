//! The 8-bus radial feeder used throughout the tests and examples.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::network::{Bus, Generator, Line, PowerNetwork};

pub const FEEDER8_LINES: [(i64, i64); 7] = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (6, 7)];
const P_DEMAND: [f64; 8] = [0.0, 0.3, 0.4, 0.2, 0.1, 0.35, 0.3, 0.4];
const Q_DEMAND: [f64; 8] = [0.0, 0.1, 0.15, 0.08, 0.05, 0.12, 0.1, 0.15];

pub fn feeder8() -> PowerNetwork {
    let buses = (0..8)
        .map(|k| Bus {
            id: k as i64,
            p_demand: P_DEMAND[k],
            q_demand: Q_DEMAND[k],
            v_min: 0.95,
            v_max: 1.05,
            shunt: Complex64::new(0.0, 0.0),
        })
        .collect();
    let generators = [0, 4]
        .into_iter()
        .map(|bus_id| Generator {
            bus_id,
            p_min: 0.0,
            p_max: 3.0,
            q_min: -2.0,
            q_max: 2.0,
            cost_a: 0.2,
            cost_b: 2.0,
            cost_c: 2.0,
        })
        .collect();
    let lines = FEEDER8_LINES
        .iter()
        .map(|&(a, b)| Line::from_impedance(a, b, 0.2, 0.3, 0.0))
        .collect();
    PowerNetwork::new("feeder8", 100.0, buses, generators, lines).expect("canonical feeder is valid")
}

fn assignment(groups: &[&[i64]]) -> BTreeMap<i64, usize> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(r, g)| g.iter().map(move |&b| (b, r)))
        .collect()
}

pub fn feeder8_two_regions() -> BTreeMap<i64, usize> {
    assignment(&[&[0, 1, 2, 5, 6, 7], &[3, 4]])
}

pub fn feeder8_three_regions() -> BTreeMap<i64, usize> {
    assignment(&[&[0, 1, 2], &[3, 4], &[5, 6, 7]])
}
