use serde::{Deserialize, Serialize};

/// Contiguous slice of the full D×D variable that one group occupies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub offset: usize,
    pub size: usize,
    /// solver blocks belonging to this group
    pub first_block: usize,
    pub n_blocks: usize,
}

/// Solver block indices for one generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSlots {
    /// index into the network's generator list
    pub gen: usize,
    /// global bus index
    pub bus: usize,
    /// [[P², P·d], [P·d, d²]]
    pub x1: usize,
    /// [[Q², Q·d], [Q·d, d²]]
    pub x2: usize,
    pub p_upper: usize,
    pub p_lower: usize,
    pub p_square: usize,
    pub q_upper: usize,
    pub q_lower: usize,
    pub q_square: usize,
}

/// Groups x1..x7 in order: x1 (P_G, d_g), x2 (Q_G, d_g), x3 (u_g, l_g, w_g),
/// x4 (u_r, l_r, w_r), x5 (embedded voltages over B_r), x6 (u_b, l_b),
/// x7 (proximal epigraph blocks, one per boundary scalar).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub groups: Vec<Group>,
    pub block_dims: Vec<usize>,
    pub gens: Vec<GenSlots>,
    pub w_block: usize,
    /// (upper, lower) slack blocks per local bus
    pub volt_slacks: Vec<(usize, usize)>,
    pub prox_blocks: Vec<usize>,
    pub dim: usize,
}

impl VariableLayout {
    /// `gens` pairs (generator index, global bus); `n_buses` = |B_r|.
    pub fn build(gens: &[(usize, usize)], n_buses: usize, n_prox: usize) -> Self {
        let mut dims = Vec::new();
        let mut groups = Vec::new();
        let mut offset = 0;
        let mut open = |name: &str, dims: &mut Vec<usize>, sizes: &[usize]| -> usize {
            let first = dims.len();
            let size: usize = sizes.iter().sum();
            groups.push(Group { name: name.into(), offset, size, first_block: first, n_blocks: sizes.len() });
            offset += size;
            dims.extend_from_slice(sizes);
            first
        };
        let ng = gens.len();
        let x1 = open("x1", &mut dims, &vec![2; ng]);
        let x2 = open("x2", &mut dims, &vec![2; ng]);
        let x3 = open("x3", &mut dims, &vec![1; 3 * ng]);
        let x4 = open("x4", &mut dims, &vec![1; 3 * ng]);
        let w_block = open("x5", &mut dims, &[2 * n_buses]);
        let x6 = open("x6", &mut dims, &vec![1; 2 * n_buses]);
        let x7 = open("x7", &mut dims, &vec![2; n_prox]);
        let gen_slots = gens
            .iter()
            .enumerate()
            .map(|(k, &(gen, bus))| GenSlots {
                gen,
                bus,
                x1: x1 + k,
                x2: x2 + k,
                p_upper: x3 + 3 * k,
                p_lower: x3 + 3 * k + 1,
                p_square: x3 + 3 * k + 2,
                q_upper: x4 + 3 * k,
                q_lower: x4 + 3 * k + 1,
                q_square: x4 + 3 * k + 2,
            })
            .collect();
        let dim = offset;
        VariableLayout {
            groups,
            block_dims: dims,
            gens: gen_slots,
            w_block,
            volt_slacks: (0..n_buses).map(|k| (x6 + 2 * k, x6 + 2 * k + 1)).collect(),
            prox_blocks: (0..n_prox).map(|k| x7 + k).collect(),
            dim,
        }
    }

    pub fn group(&self, name: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// Offset of a solver block inside the full D×D matrix.
    pub fn block_offset(&self, block: usize) -> usize {
        self.block_dims[..block].iter().sum()
    }
}
