use netmodel::{PowerNetwork, RegionPartition};
use sdpform::{EntryKind, RegionSpec};

/// Region specs plus the pairing of boundary scalars across each tie.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub specs: Vec<RegionSpec>,
    /// `counterpart[r][k]` is the index of region r's k-th boundary scalar in its neighbour's list
    pub counterpart: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(p: &RegionPartition) -> Self {
        let specs: Vec<RegionSpec> = (0..p.n_regions).map(|r| RegionSpec::from_partition(p, r)).collect();
        let counterpart = specs
            .iter()
            .map(|s| {
                s.boundary
                    .iter()
                    .map(|e| {
                        let other = &specs[e.neighbor];
                        other
                            .boundary
                            .iter()
                            .position(|o| o.neighbor == s.region && o.kind == e.kind)
                            .expect("both sides list the same boundary scalars")
                    })
                    .collect()
            })
            .collect();
        Topology { specs, counterpart }
    }

    /// The whole network as one isolated region.
    pub fn single(net: &PowerNetwork) -> Self {
        Topology { specs: vec![RegionSpec::central(net)], counterpart: vec![Vec::new()] }
    }

    pub fn n_regions(&self) -> usize {
        self.specs.len()
    }

    /// Boundary indices of region r shared with l, in the order both sides use.
    pub fn entries_with(&self, r: usize, l: usize) -> Vec<usize> {
        self.specs[r].entries_with(l)
    }

    pub fn kinds_with(&self, r: usize, l: usize) -> Vec<EntryKind> {
        self.entries_with(r, l).into_iter().map(|k| self.specs[r].boundary[k].kind).collect()
    }

    /// Value the neighbour holds for each of region r's boundary scalars.
    pub fn neighbor_view(&self, r: usize, values: &[Vec<f64>]) -> Vec<f64> {
        self.specs[r]
            .boundary
            .iter()
            .zip(&self.counterpart[r])
            .map(|(e, &k)| values[e.neighbor][k])
            .collect()
    }

    /// Boundary scalars at the flat voltage profile v = 1∠0 (X = 11ᵀ, Z = 0).
    pub fn flat_start(&self) -> Vec<Vec<f64>> {
        self.specs
            .iter()
            .map(|s| {
                s.boundary
                    .iter()
                    .map(|e| match e.kind {
                        EntryKind::Diag(_) | EntryKind::Re(..) => 1.0,
                        EntryKind::Im(..) => 0.0,
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use netmodel::canonical::{feeder8, feeder8_three_regions};
    use netmodel::partition;

    #[test]
    fn counterparts_are_mutual() {
        let net = feeder8();
        let p = partition(&net, &feeder8_three_regions()).unwrap();
        let topo = Topology::new(&p);
        for (r, s) in topo.specs.iter().enumerate() {
            for (k, e) in s.boundary.iter().enumerate() {
                let back = topo.counterpart[e.neighbor][topo.counterpart[r][k]];
                assert_eq!(back, k);
                assert_eq!(topo.specs[e.neighbor].boundary[topo.counterpart[r][k]].kind, e.kind);
            }
        }
        // region 0 touches two ties with four scalars each
        assert_eq!(topo.specs[0].boundary.len(), 8);
        assert_eq!(topo.specs[1].boundary.len(), 4);
    }
}
