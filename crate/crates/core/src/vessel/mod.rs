//! Finite-dimensional KdV vessels.
//!
//! A vessel at a point `(x, t)` is the triple `(A, B, X)` with `A: N×N`,
//! `B: N×2`, `X: N×N`, together with `X0 = X(0, 0)` and the constant 2×2
//! parameters `σ₁, σ₂, γ`. The x-dependence is fixed by
//!
//! ```text
//! B'_x = −(A B σ₂ + B γ) σ₁⁻¹        X'_x = B σ₂ B*
//! ```
//!
//! and the Lyapunov equation `AX + XA* + Bσ₁B* = 0` plus `X = X*` hold at every
//! point. Scalar fields come out as `τ = det(X0⁻¹X)` and `β = −τ'/τ`.

mod evolve;
mod fields;
mod soliton;

use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, LuFactors, C64, I};

pub use evolve::{assemble_x, evolve_general_step, propagate_b, transport, EvolutionSpec, QUAD_TOL};
pub use fields::{
    beta_jet, convolution_residual, dmoment_dx, dmoment_dx2, gamma_star, input_lde_solution, kmoment, moment,
    moments, scalar_fields, transfer_at, type0_closed_beta, GammaMethod, ScalarFields, MAX_JET_ORDER, MAX_MOMENT,
    SPECTRUM_GUARD,
};
pub use soliton::{soliton_vessel, SolitonSpec, K_SEPARATION};

/// Largest supported state dimension.
pub const MAX_DIM: usize = 16;

/// A diagonal entry of `X` this small relative to its scale counts as cancelled.
pub const X_CANCEL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VesselError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("X is singular at (x, t) = ({x}, {t}): {source}")]
    SingularX { x: f64, t: f64, source: LinalgError },
    #[error("conditioning guard: {0}")]
    Conditioning(String),
    #[error("requested order {requested} exceeds the cap {cap}")]
    OrderCap { requested: usize, cap: usize },
    #[error("λ = {lambda} lies within {radius:e} of the spectrum of A")]
    NearSpectrum { lambda: C64, radius: f64 },
    #[error("pole of the closed form at t = {t}")]
    Pole { t: f64 },
    #[error("step control failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("quadrature did not converge ({0})")]
    Quadrature(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The constant parameters `σ₁, σ₂, γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselParams {
    pub sigma1: ComplexMatrix,
    pub sigma2: ComplexMatrix,
    pub gamma: ComplexMatrix,
}

impl Default for VesselParams {
    fn default() -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            sigma1: ComplexMatrix::real2(0.0, 1.0, 1.0, 0.0),
            sigma2: ComplexMatrix::real2(1.0, 0.0, 0.0, 0.0),
            gamma: ComplexMatrix::mat2(z, z, z, I),
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<(), VesselError> {
        for (name, m) in [("sigma1", &self.sigma1), ("sigma2", &self.sigma2), ("gamma", &self.gamma)] {
            if m.shape() != (2, 2) {
                return Err(VesselError::Validation(format!("{name} must be 2x2")));
            }
            m.check_finite()?;
        }
        let tol = 1e-14;
        if self.sigma1.dist(&self.sigma1.adjoint()) > tol || self.sigma2.dist(&self.sigma2.adjoint()) > tol {
            return Err(VesselError::Validation("sigma1 and sigma2 must be self-adjoint".into()));
        }
        if self.gamma.dist(&-self.gamma.adjoint()) > tol {
            return Err(VesselError::Validation("gamma must be anti-self-adjoint".into()));
        }
        LuFactors::new(&self.sigma1).map_err(|_| VesselError::Validation("sigma1 must be invertible".into()))?;
        Ok(())
    }

    pub fn sigma1_inv(&self) -> ComplexMatrix {
        LuFactors::new(&self.sigma1)
            .and_then(|lu| lu.inverse())
            .expect("validated sigma1 is invertible")
    }
}

/// Closed-form data carried by soliton-backed states.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonData {
    pub spec: SolitonSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VesselState {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub x: ComplexMatrix,
    pub x0: ComplexMatrix,
    pub params: VesselParams,
    pub at_x: f64,
    pub at_t: f64,
    pub soliton: Option<SolitonData>,
}

impl VesselState {
    /// Checks shapes, finiteness and the dimension cap. The vessel identities
    /// themselves are reported by [`VesselState::lyapunov_residual`] and friends,
    /// not enforced, so deliberately broken states can be inspected.
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        x: ComplexMatrix,
        x0: ComplexMatrix,
        params: VesselParams,
        at: (f64, f64),
    ) -> Result<Self, VesselError> {
        let n = a.rows();
        if n == 0 || n > MAX_DIM {
            return Err(VesselError::Validation(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let shapes_ok = a.shape() == (n, n) && b.shape() == (n, 2) && x.shape() == (n, n) && x0.shape() == (n, n);
        if !shapes_ok {
            return Err(VesselError::Validation(format!(
                "shapes A {:?}, B {:?}, X {:?}, X0 {:?} are inconsistent",
                a.shape(),
                b.shape(),
                x.shape(),
                x0.shape()
            )));
        }
        params.validate()?;
        for m in [&a, &b, &x, &x0] {
            m.check_finite()?;
        }
        Ok(Self { a, b, x, x0, params, at_x: at.0, at_t: at.1, soliton: None })
    }

    /// The trivial vessel `A = [−i]`, `B = 0`, `X = X0 = [1]`.
    pub fn zero(at: (f64, f64)) -> Self {
        let one = ComplexMatrix::identity(1);
        Self::new(ComplexMatrix::diag(&[-I]), ComplexMatrix::zeros(1, 2), one.clone(), one, VesselParams::default(), at)
            .expect("zero vessel is valid")
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `(‖AX + XA* + Bσ₁B*‖_F, ‖A‖‖X‖ + ‖B‖²)`.
    pub fn lyapunov_residual(&self) -> (f64, f64) {
        let bsb = &(&self.b * &self.params.sigma1) * &self.b.adjoint();
        let r = &(&(&self.a * &self.x) + &(&self.x * &self.a.adjoint())) + &bsb;
        let scale = self.a.norm_fro() * self.x.norm_fro() + self.b.norm_fro().powi(2);
        (r.norm_fro(), scale)
    }

    /// `(‖X − X*‖_F, ‖X‖_F)`.
    pub fn self_adjoint_residual(&self) -> (f64, f64) {
        (self.x.dist(&self.x.adjoint()), self.x.norm_fro())
    }

    /// Factors of the equilibrated `X`: solving with it applies `X⁻¹`.
    ///
    /// Equilibration hides a diagonal entry that has cancelled to rounding
    /// level (a 1×1 `X` always scales to `[1]`), so such entries are rejected
    /// first, measured against `max(|X0_ii|, ‖B_i‖²)`.
    pub fn x_solver(&self) -> Result<XSolver, VesselError> {
        let singular = |source| VesselError::SingularX { x: self.at_x, t: self.at_t, source };
        for i in 0..self.dim() {
            let row = self.b.row(i).norm_fro();
            let reference = self.x0.get(i, i).norm().max(row * row);
            let d = self.x.get(i, i).norm();
            if d <= X_CANCEL * reference {
                return Err(singular(LinalgError::Singular { pivot: d, floor: X_CANCEL * reference }));
            }
        }
        XSolver::new(&self.x).map_err(singular)
    }
}

/// `X⁻¹` through the symmetric diagonal scaling `X ↦ DXD`, `D = diag(|X_ii|^{-1/2})`.
///
/// Soliton `X` entries span many orders of magnitude across a grid; the
/// scaled matrix has unit diagonal and an ordinary condition number.
pub struct XSolver {
    d: Vec<f64>,
    lu: LuFactors,
}

impl XSolver {
    pub fn new(x: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = x.rows();
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let v = x.get(i, i).norm();
                if v > 0.0 {
                    1.0 / v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| x.get(i, j) * d[i] * d[j]);
        Ok(Self { d, lu: LuFactors::new(&scaled)? })
    }

    pub fn scaling(&self) -> &[f64] {
        &self.d
    }

    /// `X⁻¹ · rhs`.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        let d = &self.d;
        let scaled = ComplexMatrix::from_fn(rhs.rows(), rhs.cols(), |i, j| rhs.get(i, j) * d[i]);
        let y = self.lu.solve(&scaled)?;
        Ok(ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| y.get(i, j) * d[i]))
    }

    /// `det X`, undoing the scaling.
    pub fn determinant(&self) -> C64 {
        let s: f64 = self.d.iter().map(|v| v * v).product();
        self.lu.determinant() / s
    }
}
