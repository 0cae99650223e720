use netmodel::{PowerNetwork, RegionPartition};
use serde::{Deserialize, Serialize};

/// Which scalar of the boundary block an entry refers to (global bus indices).
/// For off-diagonal kinds `i` lies in the lower-numbered region of the tie, so both
/// sides of a tie agree on the orientation of Z_ij.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryKind {
    /// X_ii
    Diag(usize),
    /// X_ij = X_ji
    Re(usize, usize),
    /// Z_ij = −Z_ji
    Im(usize, usize),
}

impl EntryKind {
    /// Matrix entries represented by this scalar: 1 on the diagonal, 2 off it.
    pub fn weight(&self) -> f64 {
        match self {
            EntryKind::Diag(_) => 1.0,
            _ => 2.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            EntryKind::Diag(i) => format!("X[{i},{i}]"),
            EntryKind::Re(i, j) => format!("X[{i},{j}]"),
            EntryKind::Im(i, j) => format!("Z[{i},{j}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub neighbor: usize,
    pub kind: EntryKind,
}

/// What one region optimizes over: B_r (sorted global indices), R_r, and the
/// boundary scalars it must agree on with each neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    pub region: usize,
    pub buses: Vec<usize>,
    pub own: Vec<usize>,
    pub boundary: Vec<BoundaryEntry>,
}

/// Boundary scalars shared by regions r and l, in an order both sides reproduce.
pub fn boundary_entries(p: &RegionPartition, r: usize, l: usize) -> Vec<EntryKind> {
    let mut out: Vec<EntryKind> = Vec::new();
    for t in p.ties_between(r, l) {
        for k in [EntryKind::Diag(t.i), EntryKind::Diag(t.j), EntryKind::Re(t.i, t.j), EntryKind::Im(t.i, t.j)] {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    out
}

impl RegionSpec {
    pub fn from_partition(p: &RegionPartition, r: usize) -> Self {
        let boundary = p.neighbors[r]
            .iter()
            .flat_map(|&l| boundary_entries(p, r, l).into_iter().map(move |kind| BoundaryEntry { neighbor: l, kind }))
            .collect();
        RegionSpec {
            region: r,
            buses: p.extended[r].clone(),
            own: p.region_buses[r].clone(),
            boundary,
        }
    }

    /// The whole network as a single region.
    pub fn central(net: &PowerNetwork) -> Self {
        let all: Vec<usize> = (0..net.n_buses()).collect();
        RegionSpec { region: 0, buses: all.clone(), own: all, boundary: Vec::new() }
    }

    pub fn local(&self, i: usize) -> usize {
        self.buses.binary_search(&i).expect("bus belongs to the region")
    }

    pub fn entries_with(&self, l: usize) -> Vec<usize> {
        (0..self.boundary.len()).filter(|&k| self.boundary[k].neighbor == l).collect()
    }

    pub fn neighbors(&self) -> Vec<usize> {
        let mut n: Vec<usize> = self.boundary.iter().map(|e| e.neighbor).collect();
        n.dedup();
        n
    }
}
