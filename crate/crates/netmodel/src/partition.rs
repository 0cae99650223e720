use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::error::{NetError, Result};
use crate::network::PowerNetwork;

/// A line whose endpoints lie in different regions; `i ∈ R_r`, `j ∈ R_l`, `r < l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tie {
    pub i: usize,
    pub j: usize,
    pub r: usize,
    pub l: usize,
}

/// Regions over internal bus indices. `extended[r]` is B_r sorted ascending,
/// which also fixes the local ordering of region r's matrix variable.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPartition {
    pub n_regions: usize,
    pub region_of: Vec<usize>,
    pub region_buses: Vec<Vec<usize>>,
    pub extended: Vec<Vec<usize>>,
    pub neighbors: Vec<Vec<usize>>,
    pub ties: Vec<Tie>,
}

pub fn partition(net: &PowerNetwork, assignment: &BTreeMap<i64, usize>) -> Result<RegionPartition> {
    let n = net.n_buses();
    let mut region_of = vec![usize::MAX; n];
    for (&id, &r) in assignment {
        let i = net
            .bus_index(id)
            .ok_or_else(|| NetError::Partition(format!("bus {id} is not in the network")))?;
        region_of[i] = r;
    }
    if let Some(k) = region_of.iter().position(|&r| r == usize::MAX) {
        return Err(NetError::Partition(format!("bus {} has no region", net.buses[k].id)));
    }
    let n_regions = region_of.iter().max().map_or(0, |m| m + 1);
    let mut region_buses = vec![Vec::new(); n_regions];
    for (i, &r) in region_of.iter().enumerate() {
        region_buses[r].push(i);
    }
    if let Some(r) = region_buses.iter().position(|b| b.is_empty()) {
        return Err(NetError::Partition(format!("region {r} is empty; labels must be 0..R-1")));
    }

    let mut extended = vec![BTreeSet::new(); n_regions];
    let mut ties = Vec::new();
    for (i, j) in net.edges() {
        let (ri, rj) = (region_of[i], region_of[j]);
        extended[ri].extend([i, j]);
        extended[rj].extend([i, j]);
        if ri != rj {
            ties.push(if ri < rj {
                Tie { i, j, r: ri, l: rj }
            } else {
                Tie { i: j, j: i, r: rj, l: ri }
            });
        }
    }
    for (r, buses) in region_buses.iter().enumerate() {
        extended[r].extend(buses.iter().copied());
    }
    ties.sort();
    let mut neighbors = vec![BTreeSet::new(); n_regions];
    for t in &ties {
        neighbors[t.r].insert(t.l);
        neighbors[t.l].insert(t.r);
    }
    let part = RegionPartition {
        n_regions,
        region_of,
        region_buses,
        extended: extended.into_iter().map(|s| s.into_iter().collect()).collect(),
        neighbors: neighbors.into_iter().map(|s| s.into_iter().collect()).collect(),
        ties,
    };
    part.check_clique_cover(net)?;
    Ok(part)
}

impl RegionPartition {
    /// Position of global bus `i` inside B_r.
    pub fn local_index(&self, r: usize, i: usize) -> Option<usize> {
        self.extended[r].binary_search(&i).ok()
    }

    pub fn ties_between(&self, r: usize, l: usize) -> Vec<Tie> {
        let (a, b) = (r.min(l), r.max(l));
        self.ties.iter().filter(|t| t.r == a && t.l == b).copied().collect()
    }

    /// B_r ∩ B_l, ascending global indices.
    pub fn shared(&self, r: usize, l: usize) -> Vec<usize> {
        self.extended[r]
            .iter()
            .filter(|i| self.extended[l].binary_search(i).is_ok())
            .copied()
            .collect()
    }

    /// O_rl: the index pairs (i,i), (i,j), (j,i), (j,j) of every tie between r and l.
    pub fn boundary_pairs(&self, r: usize, l: usize) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for t in self.ties_between(r, l) {
            set.extend([(t.i, t.i), (t.i, t.j), (t.j, t.i), (t.j, t.j)]);
        }
        set.into_iter().collect()
    }

    /// E_{r↦l}: rows pick the shared buses out of region r's local ordering.
    pub fn selection(&self, r: usize, l: usize) -> DMatrix<f64> {
        let shared = self.shared(r, l);
        let mut e = DMatrix::zeros(shared.len(), self.extended[r].len());
        for (row, &i) in shared.iter().enumerate() {
            e[(row, self.local_index(r, i).expect("shared bus is local"))] = 1.0;
        }
        e
    }

    /// E_{r↦l} M E_{r↦l}ᵀ computed by index selection.
    pub fn extract_boundary<T: nalgebra::Scalar + Copy>(&self, m: &DMatrix<T>, r: usize, l: usize) -> Result<DMatrix<T>> {
        let d = self.extended[r].len();
        if m.nrows() != d || m.ncols() != d {
            return Err(NetError::Dimension { expected: d, got: m.nrows().max(m.ncols()) });
        }
        let idx: Vec<usize> = self
            .shared(r, l)
            .iter()
            .map(|&i| self.local_index(r, i).expect("shared bus is local"))
            .collect();
        Ok(DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]))
    }

    /// Every maximal clique of the network graph must lie inside some B_r.
    pub fn check_clique_cover(&self, net: &PowerNetwork) -> Result<()> {
        let sets: Vec<BTreeSet<usize>> = self.extended.iter().map(|b| b.iter().copied().collect()).collect();
        for clique in maximal_cliques(net) {
            if !sets.iter().any(|s| clique.iter().all(|i| s.contains(i))) {
                return Err(NetError::CliqueCover {
                    clique: clique.iter().map(|&i| net.buses[i].id).collect(),
                });
            }
        }
        Ok(())
    }
}

/// Bron–Kerbosch with pivoting. Each clique is returned sorted.
pub fn maximal_cliques(net: &PowerNetwork) -> Vec<Vec<usize>> {
    let n = net.n_buses();
    let adj: Vec<BTreeSet<usize>> = (0..n).map(|i| net.neighbors(i).iter().copied().collect()).collect();
    let mut out = Vec::new();
    bron_kerbosch(&adj, &mut Vec::new(), (0..n).collect(), BTreeSet::new(), &mut out);
    out.sort();
    out
}

fn bron_kerbosch(
    adj: &[BTreeSet<usize>],
    r: &mut Vec<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        let mut c = r.clone();
        c.sort_unstable();
        out.push(c);
        return;
    }
    let pivot = *p
        .iter()
        .chain(&x)
        .max_by_key(|u| p.intersection(&adj[**u]).count())
        .expect("p or x is nonempty");
    let candidates: Vec<usize> = p.difference(&adj[pivot]).copied().collect();
    for v in candidates {
        r.push(v);
        bron_kerbosch(
            adj,
            r,
            p.intersection(&adj[v]).copied().collect(),
            x.intersection(&adj[v]).copied().collect(),
            out,
        );
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}
