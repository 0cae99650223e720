//! Real embedding of Hermitian matrices: W = X + jZ ↦ [[X, −Z], [Z, X]].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FormError, Result};

pub const PSD_FLOOR: f64 = -1e-9;

pub fn embed_real(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if x.ncols() != n || z.nrows() != n || z.ncols() != n {
        return Err(FormError::Shape(format!("X is {}×{}, Z is {}×{}", x.nrows(), x.ncols(), z.nrows(), z.ncols())));
    }
    let sym = (x - x.transpose()).amax();
    let skew = (z + z.transpose()).amax();
    let tol = 1e-12 * (1.0 + x.amax() + z.amax());
    if sym > tol {
        return Err(FormError::Symmetry(format!("X is not symmetric (defect {sym:e})")));
    }
    if skew > tol {
        return Err(FormError::Symmetry(format!("Z is not skew-symmetric (defect {skew:e})")));
    }
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    e.view_mut((0, 0), (n, n)).copy_from(x);
    e.view_mut((n, n), (n, n)).copy_from(x);
    e.view_mut((n, 0), (n, n)).copy_from(z);
    e.view_mut((0, n), (n, n)).copy_from(&(-z));
    Ok(e)
}

pub fn embed_hermitian(w: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    embed_real(&w.map(|c| c.re), &w.map(|c| c.im))
}

/// PSD verdict of the real embedding, eigenvalue floor −1e−9.
pub fn check_psd_embedding(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<bool> {
    let e = embed_real(x, z)?;
    Ok(e.symmetric_eigenvalues().min() >= PSD_FLOOR)
}

/// Recovers (X, Z) from a 2n×2n real symmetric matrix by averaging the two
/// copies, which projects onto the embedding structure.
pub fn unembed(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m.nrows() / 2;
    let a = m.view((0, 0), (n, n));
    let d = m.view((n, n), (n, n));
    let b = m.view((0, n), (n, n));
    let c = m.view((n, 0), (n, n));
    let x = (a + d) * 0.5;
    let x = (&x + x.transpose()) * 0.5;
    let z = (c - b) * 0.5;
    let z = (&z - z.transpose()) * 0.5;
    (x, z)
}

pub fn to_complex(x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| Complex64::new(x[(i, j)], z[(i, j)]))
}

/// ½·embed(H), so that Tr(A·embed(W)) = Re Tr(H W) for Hermitian H, W.
pub fn half_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    let g = h.map(|c| c.re);
    let b = h.map(|c| c.im);
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    e.view_mut((0, 0), (n, n)).copy_from(&g);
    e.view_mut((n, n), (n, n)).copy_from(&g);
    e.view_mut((n, 0), (n, n)).copy_from(&b);
    e.view_mut((0, n), (n, n)).copy_from(&(-&b));
    e * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_psd_and_negative_is_not() {
        let z = DMatrix::zeros(3, 3);
        assert!(check_psd_embedding(&DMatrix::identity(3, 3), &z).unwrap());
        assert!(!check_psd_embedding(&(-DMatrix::<f64>::identity(3, 3)), &z).unwrap());
    }

    #[test]
    fn symmetry_violations_rejected() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(embed_real(&x, &DMatrix::zeros(2, 2)), Err(FormError::Symmetry(_))));
        let z = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert!(matches!(embed_real(&DMatrix::identity(2, 2), &z), Err(FormError::Symmetry(_))));
        assert!(matches!(embed_real(&DMatrix::identity(2, 2), &DMatrix::zeros(3, 3)), Err(FormError::Shape(_))));
    }

    #[test]
    fn half_embedding_reproduces_trace() {
        let h = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(2.0, 0.0), Complex64::new(1.0, -3.0),
            Complex64::new(1.0, 3.0), Complex64::new(-1.0, 0.0),
        ]);
        let v = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.8)];
        let w = DMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj());
        let direct = (&h * &w).trace();
        let e = embed_hermitian(&w).unwrap();
        let via = (half_embedding(&h) * e).trace();
        assert!((direct.re - via).abs() < 1e-14 && direct.im.abs() < 1e-14);
    }

    #[test]
    fn unembed_inverts() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let z = DMatrix::from_row_slice(2, 2, &[0.0, -0.4, 0.4, 0.0]);
        let (x2, z2) = unembed(&embed_real(&x, &z).unwrap());
        assert_eq!(x, x2);
        assert_eq!(z, z2);
    }
}
