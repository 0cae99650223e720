//! Native JSON case and partition files.
//!
//! A case file looks like
//! ```json
//! {
//!   "format": "ppopf-case", "version": 1, "name": "feeder8", "base_mva": 100.0,
//!   "buses": [{"id": 0, "p_demand": 0.0, "q_demand": 0.0, "v_min": 0.95, "v_max": 1.05}],
//!   "generators": [{"bus": 0, "p_min": 0.0, "p_max": 3.0, "q_min": -2.0, "q_max": 2.0, "cost": [0.2, 2.0, 2.0]}],
//!   "lines": [{"from": 0, "to": 1, "r": 0.2, "x": 0.3, "b": 0.0}]
//! }
//! ```
//! Demands and generator limits are in MW/MVAr, impedances in per unit on `base_mva`.
//! Optional bus fields `gs`, `bs` give shunts in MW/MVAr at 1 pu voltage.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{schema, NetError, Result};
use crate::network::{Bus, Generator, Line, PowerNetwork};

pub const CASE_FORMAT: &str = "ppopf-case";
pub const PARTITION_FORMAT: &str = "ppopf-partition";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    #[serde(default)]
    pub generators: Vec<GenRecord>,
    pub lines: Vec<LineRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: i64,
    pub p_demand: f64,
    pub q_demand: f64,
    pub v_min: f64,
    pub v_max: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub gs: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub bs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenRecord {
    pub bus: i64,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// [a, b, c] of a·P² + b·P + c
    pub cost: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub from: i64,
    pub to: i64,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl CaseFile {
    pub fn into_network(self) -> Result<PowerNetwork> {
        if self.format != CASE_FORMAT {
            return Err(schema("format", format!("expected \"{CASE_FORMAT}\", found \"{}\"", self.format)));
        }
        if self.version != SCHEMA_VERSION {
            return Err(schema("version", format!("unsupported version {}", self.version)));
        }
        let base = self.base_mva;
        let buses = self
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                p_demand: b.p_demand,
                q_demand: b.q_demand,
                v_min: b.v_min,
                v_max: b.v_max,
                shunt: Complex64::new(b.gs, b.bs) / base,
            })
            .collect();
        let generators = self
            .generators
            .iter()
            .map(|g| Generator {
                bus_id: g.bus,
                p_min: g.p_min,
                p_max: g.p_max,
                q_min: g.q_min,
                q_max: g.q_max,
                cost_a: g.cost[0],
                cost_b: g.cost[1],
                cost_c: g.cost[2],
            })
            .collect();
        let mut lines = Vec::with_capacity(self.lines.len());
        for (k, l) in self.lines.iter().enumerate() {
            if l.r == 0.0 && l.x == 0.0 {
                return Err(schema(format!("lines[{k}].r"), "zero impedance"));
            }
            lines.push(Line::from_impedance(l.from, l.to, l.r, l.x, l.b));
        }
        PowerNetwork::new(self.name, base, buses, generators, lines)
    }

    pub fn from_network(net: &PowerNetwork) -> Self {
        CaseFile {
            format: CASE_FORMAT.into(),
            version: SCHEMA_VERSION,
            name: net.name.clone(),
            base_mva: net.base_mva,
            buses: net
                .buses
                .iter()
                .map(|b| BusRecord {
                    id: b.id,
                    p_demand: b.p_demand,
                    q_demand: b.q_demand,
                    v_min: b.v_min,
                    v_max: b.v_max,
                    gs: b.shunt.re * net.base_mva,
                    bs: b.shunt.im * net.base_mva,
                })
                .collect(),
            generators: net
                .generators
                .iter()
                .map(|g| GenRecord {
                    bus: g.bus_id,
                    p_min: g.p_min,
                    p_max: g.p_max,
                    q_min: g.q_min,
                    q_max: g.q_max,
                    cost: [g.cost_a, g.cost_b, g.cost_c],
                })
                .collect(),
            lines: net
                .lines
                .iter()
                .map(|l| {
                    let z = Complex64::new(1.0, 0.0) / l.series_admittance;
                    LineRecord {
                        from: l.from_bus,
                        to: l.to_bus,
                        r: z.re,
                        x: z.im,
                        b: l.shunt.im,
                    }
                })
                .collect(),
        }
    }
}

/// Parses a JSON case; serde errors carry line and column plus the offending field name.
pub fn parse_case(text: &str) -> Result<PowerNetwork> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))?;
    file.into_network()
}

pub fn load_case(path: &Path) -> Result<PowerNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "m") {
        crate::matpower::parse_matpower(&text)
    } else {
        parse_case(&text)
    }
}

pub fn case_to_json(net: &PowerNetwork) -> String {
    serde_json::to_string_pretty(&CaseFile::from_network(net)).expect("case serializes")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub format: String,
    pub version: u32,
    pub assignment: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub bus: i64,
    pub region: usize,
}

impl PartitionFile {
    pub fn from_map(map: &BTreeMap<i64, usize>) -> Self {
        PartitionFile {
            format: PARTITION_FORMAT.into(),
            version: SCHEMA_VERSION,
            assignment: map.iter().map(|(&bus, &region)| Assignment { bus, region }).collect(),
        }
    }

    pub fn into_map(self) -> Result<BTreeMap<i64, usize>> {
        if self.format != PARTITION_FORMAT {
            return Err(schema("format", format!("expected \"{PARTITION_FORMAT}\", found \"{}\"", self.format)));
        }
        if self.version != SCHEMA_VERSION {
            return Err(schema("version", format!("unsupported version {}", self.version)));
        }
        let mut map = BTreeMap::new();
        for (k, a) in self.assignment.iter().enumerate() {
            if map.insert(a.bus, a.region).is_some() {
                return Err(schema(format!("assignment[{k}].bus"), format!("bus {} assigned twice", a.bus)));
            }
        }
        Ok(map)
    }
}

pub fn parse_partition(text: &str) -> Result<BTreeMap<i64, usize>> {
    let file: PartitionFile = serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))?;
    file.into_map()
}

pub fn load_partition(path: &Path) -> Result<BTreeMap<i64, usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
    parse_partition(&text)
}

pub fn partition_to_json(map: &BTreeMap<i64, usize>) -> String {
    serde_json::to_string_pretty(&PartitionFile::from_map(map)).expect("partition serializes")
}
