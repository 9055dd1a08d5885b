//! Dense Hermitian eigensolver for sector operators.

use crate::error::{Error, Result};
use delone_fermions::fock::SectorOperator;
use delone_fermions::sparse::SparseMatrix;
use delone_fermions::C64;
use nalgebra::{DMatrix, SymmetricEigen};

pub const DEFAULT_CAP: usize = 6000;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Option<DMatrix<C64>>,
    /// Largest `‖Hv − λv‖` over the computed pairs (zero when vectors were not requested).
    pub max_residual: f64,
}

fn frobenius(m: &SparseMatrix) -> f64 {
    m.entries.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense eigendecomposition with a per-pair residual check `‖Hv − λv‖ ≤ 1e-8 ‖H‖_F`.
pub fn eigensolve(op: &SectorOperator, with_vectors: bool, cap: usize) -> Result<Spectrum> {
    eigensolve_matrix(&op.matrix, with_vectors, cap)
}

pub fn eigensolve_matrix(m: &SparseMatrix, with_vectors: bool, cap: usize) -> Result<Spectrum> {
    if m.rows != m.cols {
        return Err(delone_fermions::Error::DimensionMismatch(m.rows, m.cols).into());
    }
    if m.rows > cap {
        return Err(delone_fermions::Error::DimensionCap(m.rows, cap).into());
    }
    let dev = m.hermitian_deviation();
    let scale = frobenius(m);
    if dev > HERMITIAN_TOL * (1.0 + scale) {
        return Err(delone_fermions::Error::NotHermitian(dev).into());
    }
    if m.rows == 0 {
        return Ok(Spectrum { values: vec![], vectors: with_vectors.then(|| DMatrix::zeros(0, 0)), max_residual: 0.0 });
    }
    let dense = m.to_dense();
    let dense = (&dense + dense.adjoint()) * C64::new(0.5, 0.0);
    let real = dense.iter().all(|v| v.im == 0.0);
    let (values, vectors) = if real {
        let re = dense.map(|v| v.re);
        if with_vectors {
            let e = SymmetricEigen::new(re);
            (e.eigenvalues.as_slice().to_vec(), Some(e.eigenvectors.map(|v| C64::new(v, 0.0))))
        } else {
            (re.symmetric_eigenvalues().as_slice().to_vec(), None)
        }
    } else if with_vectors {
        let e = SymmetricEigen::new(dense.clone());
        (e.eigenvalues.as_slice().to_vec(), Some(e.eigenvectors))
    } else {
        (dense.clone().symmetric_eigenvalues().as_slice().to_vec(), None)
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut max_residual: f64 = 0.0;
    let vectors = vectors.map(|v| {
        let cols: Vec<_> = order.iter().map(|&k| v.column(k).into_owned()).collect();
        DMatrix::from_columns(&cols)
    });
    if let Some(v) = &vectors {
        for (k, lam) in sorted.iter().enumerate() {
            let col = v.column(k);
            let r = (&dense * col - col * C64::new(*lam, 0.0)).norm();
            max_residual = max_residual.max(r);
        }
        let bound = RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE);
        if max_residual > bound && max_residual > 1e-300 {
            return Err(Error::Residual(max_residual, bound));
        }
    }
    Ok(Spectrum { values: sorted, vectors, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use delone_fermions::rng;
    use rand::Rng;

    #[test]
    fn closed_forms() {
        let id = SparseMatrix::identity(5);
        assert!(eigensolve_matrix(&id, true, 10).unwrap().values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let t = 0.75;
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(t, 0.0)), (1, 0, C64::new(t, 0.0))]);
        let s = eigensolve_matrix(&m, false, 10).unwrap();
        assert!((s.values[0] + t).abs() < 1e-15 && (s.values[1] - t).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_residual_and_trace() {
        let mut r = rng::seeded(1);
        let n = 50;
        let mut m = SparseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = C64::new(r.gen_range(-1.0..1.0), if i == j { 0.0 } else { r.gen_range(-1.0..1.0) });
                m.add_entry(i, j, v);
                if i != j {
                    m.add_entry(j, i, v.conj());
                }
            }
        }
        let s = eigensolve_matrix(&m, true, 100).unwrap();
        assert!(s.max_residual <= 1e-8 * frobenius(&m));
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = s.values.iter().sum();
        assert!((tr - m.trace().re).abs() <= 1e-8 * (1.0 + tr.abs()));
    }

    #[test]
    fn rejects_bad_input() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(1.0, 0.0))]);
        assert!(matches!(eigensolve_matrix(&m, false, 10), Err(Error::Core(delone_fermions::Error::NotHermitian(_)))));
        assert!(matches!(eigensolve_matrix(&SparseMatrix::identity(20), false, 10), Err(Error::Core(delone_fermions::Error::DimensionCap(20, 10)))));
    }
}
