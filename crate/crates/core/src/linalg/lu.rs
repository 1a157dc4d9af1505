use log::warn;
use nalgebra::DMatrix;

use super::{ComplexMatrix, LinalgError, C64};

/// Relative pivot floor: a pivot below `PIVOT_FLOOR * ‖M‖_F` is treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-14;
/// Condition estimates above this only produce a warning.
pub const CONDITION_WARN: f64 = 1e12;

/// LU factorization with partial pivoting that passed the pivot guard.
pub struct LuFactors {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuFactors {
    pub fn new(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::Dimension(format!("LU of a {:?} matrix", m.shape())));
        }
        let n = m.rows();
        let scale = m.norm_fro();
        let lu = m.as_dmatrix().clone().lu();
        let floor = PIVOT_FLOOR * scale;
        let u = lu.u();
        for i in 0..n {
            let p = u[(i, i)].norm();
            if p <= floor || p == 0.0 {
                return Err(LinalgError::Singular { pivot: p, floor });
            }
        }
        Ok(Self { lu, n })
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if rhs.rows() != self.n {
            return Err(LinalgError::Dimension(format!(
                "rhs has {} rows, system has {}",
                rhs.rows(),
                self.n
            )));
        }
        self.lu
            .solve(rhs.as_dmatrix())
            .map(ComplexMatrix::from_dmatrix)
            .ok_or(LinalgError::Singular { pivot: 0.0, floor: 0.0 })
    }

    pub fn determinant(&self) -> C64 {
        self.lu.determinant()
    }

    pub fn inverse(&self) -> Result<ComplexMatrix, LinalgError> {
        self.solve(&ComplexMatrix::identity(self.n))
    }
}

fn norm1(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number `‖M‖₁ ‖M⁻¹‖₁` (exact inverse; matrices are small).
pub fn condition_estimate(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    let inv = LuFactors::new(m)?.inverse()?;
    Ok(norm1(m.as_dmatrix()) * norm1(inv.as_dmatrix()))
}

/// Solves `M·Y = RHS`.
pub fn lu_solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let lu = LuFactors::new(m)?;
    let y = lu.solve(rhs)?;
    if log::log_enabled!(log::Level::Warn) {
        if let Ok(inv) = lu.inverse() {
            let cond = norm1(m.as_dmatrix()) * norm1(inv.as_dmatrix());
            if cond > CONDITION_WARN {
                warn!("lu_solve: ill-conditioned system (cond ≈ {cond:.2e})");
            }
        }
    }
    Ok(y)
}

/// Determinant as the signed product of LU pivots. Singular inputs give 0.
pub fn det_lu(m: &ComplexMatrix) -> C64 {
    assert!(m.is_square(), "det_lu of a non-square matrix");
    if m.rows() == 1 {
        return m.get(0, 0);
    }
    m.as_dmatrix().clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn two_soliton_x0() -> ComplexMatrix {
        let off = 2.0 * 2f64.sqrt() / 3.0;
        ComplexMatrix::real2(2.0, off, off, 2.0)
    }

    #[test]
    fn identity_solve() {
        let r = ComplexMatrix::mat2(1.0.into(), I, (-2.0).into(), C64::new(0.5, 0.25));
        let y = lu_solve(&ComplexMatrix::identity(2), &r).unwrap();
        assert!(y.dist(&r) < 1e-15);
    }

    #[test]
    fn scalar_matrix_solve() {
        let y = lu_solve(&ComplexMatrix::identity(3).scale_re(2.0), &ComplexMatrix::identity(3)).unwrap();
        assert!(y.dist(&ComplexMatrix::identity(3).scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn two_soliton_inverse() {
        let x = two_soliton_x0();
        let inv = lu_solve(&x, &ComplexMatrix::identity(2)).unwrap();
        // closed-form 2x2 inverse: [[d, -b], [-c, a]] / det
        let det = 28.0 / 9.0;
        let off = 2.0 * 2f64.sqrt() / 3.0;
        let expect = ComplexMatrix::real2(2.0 / det, -off / det, -off / det, 2.0 / det);
        assert!(inv.dist(&expect) < 1e-14);
    }

    #[test]
    fn determinants() {
        assert_eq!(det_lu(&ComplexMatrix::identity(4)), C64::new(1.0, 0.0));
        let d = det_lu(&ComplexMatrix::diag(&[2.0.into(), 3.0.into()]));
        assert!((d - C64::new(6.0, 0.0)).norm() < 1e-15);
        let d = det_lu(&two_soliton_x0());
        assert!((d - C64::new(28.0 / 9.0, 0.0)).norm() < 1e-14);
        assert_eq!(det_lu(&ComplexMatrix::diag(&[I])), I);
    }

    #[test]
    fn singular_is_rejected() {
        let m = ComplexMatrix::real2(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(
            lu_solve(&m, &ComplexMatrix::identity(2)),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn condition_of_identity() {
        let c = condition_estimate(&ComplexMatrix::identity(5)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }
}
