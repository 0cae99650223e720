use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::network::PowerNetwork;

pub type CMatrix = DMatrix<Complex64>;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Per-bus matrices derived from the nodal admittance matrix, for W = v vᴴ:
/// P_i = Tr(𝐘_i W), Q_i = Tr(Ȳ_i W), |v_i|² = Tr(M_i W).
#[derive(Clone, Debug)]
pub struct AdmittanceOperators {
    pub y: CMatrix,
    /// Y_i = e_i e_iᵀ Y
    pub y_row: Vec<CMatrix>,
    /// 𝐘_i = ½(Y_iᴴ + Y_i)
    pub y_herm: Vec<CMatrix>,
    /// Ȳ_i = (j/2)(Y_i − Y_iᴴ)
    pub y_skew: Vec<CMatrix>,
}

pub fn build_operators(net: &PowerNetwork) -> AdmittanceOperators {
    let n = net.n_buses();
    let y = net.y.clone();
    let mut y_row = Vec::with_capacity(n);
    let mut y_herm = Vec::with_capacity(n);
    let mut y_skew = Vec::with_capacity(n);
    for i in 0..n {
        let mut yi = CMatrix::zeros(n, n);
        yi.set_row(i, &y.row(i));
        let yh = yi.adjoint();
        y_herm.push((&yh + &yi) * Complex64::new(0.5, 0.0));
        y_skew.push((&yi - &yh) * (J * 0.5));
        y_row.push(yi);
    }
    AdmittanceOperators { y, y_row, y_herm, y_skew }
}

impl AdmittanceOperators {
    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn m(&self, i: usize) -> CMatrix {
        basis_m(i, self.n())
    }

    /// Real and imaginary parts (G_i, B_i) of 𝐘_i.
    pub fn g_b(&self, i: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        split(&self.y_herm[i])
    }

    /// Real and imaginary parts (Ḡ_i, B̄_i) of Ȳ_i.
    pub fn g_b_bar(&self, i: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        split(&self.y_skew[i])
    }

    /// Largest deviation from Hermitian symmetry over all 𝐘_i and Ȳ_i.
    pub fn hermitian_defect(&self) -> f64 {
        self.y_herm
            .iter()
            .chain(&self.y_skew)
            .map(|h| (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

pub fn split(h: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (h.map(|z| z.re), h.map(|z| z.im))
}

/// M_i = e_i e_iᵀ
pub fn basis_m(i: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, i)] = Complex64::new(1.0, 0.0);
    m
}

/// N_ij = ½(e_i e_jᵀ + e_j e_iᵀ); Tr(N_ij W) = Re W_ij.
pub fn n_sym(i: usize, j: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] += Complex64::new(0.5, 0.0);
    m[(j, i)] += Complex64::new(0.5, 0.0);
    m
}

/// N̂_ij = (j/2)(e_i e_jᵀ − e_j e_iᵀ); Tr(N̂_ij W) = Im W_ij.
pub fn n_skew(i: usize, j: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] += J * 0.5;
    m[(j, i)] -= J * 0.5;
    m
}

/// Principal submatrix on the given index list.
pub fn restrict<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Tr(A B) for square matrices of equal size, without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn outer(v: &[Complex64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, Line};

    fn bus(id: i64) -> Bus {
        Bus { id, p_demand: 0.0, q_demand: 0.0, v_min: 0.9, v_max: 1.1, shunt: Complex64::new(0.0, 0.0) }
    }

    #[test]
    fn single_bus_hermitian_part() {
        let mut b = bus(1);
        b.shunt = Complex64::new(0.3, -0.7);
        let net = PowerNetwork::new("one", 1.0, vec![b], vec![], vec![]).unwrap();
        let ops = build_operators(&net);
        assert_eq!(ops.y_herm[0][(0, 0)], Complex64::new(0.3, 0.0));
        // Q = |v|²·(−Im y)
        assert!((ops.y_skew[0][(0, 0)] - Complex64::new(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn flat_voltage_injection_is_zero() {
        let net = PowerNetwork::new(
            "two",
            1.0,
            vec![bus(1), bus(2)],
            vec![],
            vec![Line::from_impedance(1, 2, 0.2, 0.4, 0.0)],
        )
        .unwrap();
        let ops = build_operators(&net);
        let w = outer(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(trace_product(&ops.y_herm[0], &w).norm() < 1e-15);
        assert!(trace_product(&ops.y_skew[1], &w).norm() < 1e-15);
    }

    #[test]
    fn basis_shapes() {
        let m = basis_m(1, 3);
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 0.0]));
        assert_eq!(split(&m).0, expect);
        assert_eq!(split(&m).1, DMatrix::zeros(3, 3));
        let ns = n_sym(0, 2, 3);
        assert_eq!(ns, ns.transpose());
        let nh = n_skew(0, 2, 3);
        assert_eq!(nh, nh.adjoint());
        assert_eq!(nh[(0, 2)], Complex64::new(0.0, 0.5));
    }

    #[test]
    fn trace_of_pair_matrices_reads_entries() {
        let v = [Complex64::new(1.0, 0.2), Complex64::new(0.9, -0.3), Complex64::new(1.05, 0.1)];
        let w = outer(&v);
        let x = trace_product(&n_sym(0, 2, 3), &w);
        let z = trace_product(&n_skew(0, 2, 3), &w);
        assert!((x.re - w[(0, 2)].re).abs() < 1e-15 && x.im.abs() < 1e-15);
        assert!((z.re - w[(0, 2)].im).abs() < 1e-15 && z.im.abs() < 1e-15);
    }

    #[test]
    fn restrict_picks_principal_block() {
        let m = DMatrix::from_fn(4, 4, |i, j| (10 * i + j) as f64);
        let r = restrict(&m, &[1, 3]);
        assert_eq!(r, DMatrix::from_row_slice(2, 2, &[11.0, 13.0, 31.0, 33.0]));
    }
}
