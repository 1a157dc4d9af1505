//! Scalar fields, jets, moments and the transfer function of a vessel state.
//!
//! The algebraic moment derivative and the tau form of `γ*` are written for
//! the default parameters `σ₁ = [[0,1],[1,0]]`, `σ₂ = [[1,0],[0,0]]`,
//! `γ = [[0,0],[0,i]]`.

use crate::diffring::BetaJet;
use crate::linalg::{lu_solve, mat2_exp, ComplexMatrix, MatrixSeries, C64, I};

use super::{VesselError, VesselParams, VesselState};

pub const MAX_JET_ORDER: usize = 12;
pub const MAX_MOMENT: usize = 12;
/// Exclusion radius around the spectrum of `A` for [`transfer_at`].
pub const SPECTRUM_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarFields {
    pub tau: C64,
    pub beta: C64,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `X⁻¹ M` with the equilibrated solver.
fn x_inv(state: &VesselState, m: &ComplexMatrix) -> Result<ComplexMatrix, VesselError> {
    Ok(state.x_solver()?.solve(m)?)
}

/// `τ = det(X0⁻¹X)`, `β = −tr(σ₂ B* X⁻¹ B)`.
pub fn scalar_fields(state: &VesselState) -> Result<ScalarFields, VesselError> {
    let xs = state.x_solver()?;
    let x0s = super::XSolver::new(&state.x0).map_err(|source| VesselError::SingularX { x: 0.0, t: 0.0, source })?;
    let tau = xs.determinant() / x0s.determinant();
    let h0 = &state.b.adjoint() * &xs.solve(&state.b)?;
    let beta = -(&state.params.sigma2 * &h0).trace();
    Ok(ScalarFields { tau, beta })
}

/// x-Taylor coefficients of `X` at the state's point, `p = 0..=order`.
fn x_taylor(state: &VesselState, order: usize) -> Vec<ComplexMatrix> {
    if let Some(sol) = &state.soliton {
        return sol.spec.x_taylor(state.at_x, state.at_t, order);
    }
    // B_{p+1} = −(A B_p σ₂ + B_p γ) σ₁⁻¹ / (p+1),  X_{p+1} = Σ_{a+b=p} B_a σ₂ B_b* / (p+1)
    let p = &state.params;
    let s1inv = p.sigma1_inv();
    let mut bs = vec![state.b.clone()];
    for k in 0..order {
        let next = -&(&(&(&(&state.a * &bs[k]) * &p.sigma2) + &(&bs[k] * &p.gamma)) * &s1inv);
        bs.push(next.scale_re(1.0 / (k as f64 + 1.0)));
    }
    let mut xs = vec![state.x.clone()];
    for k in 0..order {
        let mut acc = ComplexMatrix::zeros(state.dim(), state.dim());
        for a in 0..=k {
            acc += &(&(&bs[a] * &p.sigma2) * &bs[k - a].adjoint());
        }
        xs.push(acc.scale_re(1.0 / (k as f64 + 1.0)));
    }
    xs
}

/// `β, β', …, β^(order)` at the state's point, from the series of `−tr(X⁻¹X')`.
pub fn beta_jet(state: &VesselState, order: usize) -> Result<BetaJet, VesselError> {
    if order > MAX_JET_ORDER {
        return Err(VesselError::OrderCap { requested: order, cap: MAX_JET_ORDER });
    }
    let coeffs = x_taylor(state, order + 1);
    let d: Vec<f64> = state.x_solver()?.scaling().to_vec();
    let dm = ComplexMatrix::diag(&d.iter().map(|&v| c(v)).collect::<Vec<_>>());
    let series = MatrixSeries::new(coeffs)?.sandwich(&dm, &dm)?;
    let inv = series.invert().map_err(|source| VesselError::SingularX { x: state.at_x, t: state.at_t, source })?;
    let tr = inv.mul(&series.derivative()?)?.trace();
    let mut fact = 1.0;
    let values: Vec<C64> = tr
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            -v * fact
        })
        .collect();
    Ok(BetaJet::from_values(&values))
}

/// `Hₙ = B* X⁻¹ Aⁿ B`.
pub fn moment(state: &VesselState, n: usize) -> Result<ComplexMatrix, VesselError> {
    if n > MAX_MOMENT {
        return Err(VesselError::OrderCap { requested: n, cap: MAX_MOMENT });
    }
    Ok(&state.b.adjoint() * &x_inv(state, &(&state.a.pow(n) * &state.b))?)
}

/// `H₀ … H_upto`.
pub fn moments(state: &VesselState, upto: usize) -> Result<Vec<ComplexMatrix>, VesselError> {
    if upto > MAX_MOMENT {
        return Err(VesselError::OrderCap { requested: upto, cap: MAX_MOMENT });
    }
    let xs = state.x_solver()?;
    let b_star = state.b.adjoint();
    let mut anb = state.b.clone();
    let mut out = Vec::with_capacity(upto + 1);
    for _ in 0..=upto {
        out.push(&b_star * &xs.solve(&anb)?);
        anb = &state.a * &anb;
    }
    Ok(out)
}

fn e21() -> ComplexMatrix {
    ComplexMatrix::real2(0.0, 0.0, 1.0, 0.0)
}

fn e12() -> ComplexMatrix {
    ComplexMatrix::real2(0.0, 1.0, 0.0, 0.0)
}

fn f_mat() -> ComplexMatrix {
    ComplexMatrix::mat2(c(0.0), c(0.0), I, c(0.0))
}

fn g_mat(b: C64, b1: C64) -> ComplexMatrix {
    ComplexMatrix::mat2(b, I, -I * (b1 - b * b), -b)
}

fn g_mat_dx(b: C64, b1: C64, b2: C64) -> ComplexMatrix {
    ComplexMatrix::mat2(b1, c(0.0), -I * (b2 - 2.0 * b * b1), -b1)
}

/// `(Hₙ)'_x = E₂₁Hₙ₊₁ − Hₙ₊₁E₁₂ + G Hₙ − Hₙ F`, `G = [[β, i], [−i(β'−β²), −β]]`, `F = [[0,0],[i,0]]`.
pub fn dmoment_dx(state: &VesselState, n: usize) -> Result<ComplexMatrix, VesselError> {
    let hs = moments(state, n + 1)?;
    let jet = beta_jet(state, 1)?;
    Ok(dmoment_from(&hs[n], &hs[n + 1], jet.d(0), jet.d(1)))
}

fn dmoment_from(hn: &ComplexMatrix, hn1: &ComplexMatrix, b: C64, b1: C64) -> ComplexMatrix {
    let g = g_mat(b, b1);
    &(&(&(&e21() * hn1) - &(hn1 * &e12())) + &(&g * hn)) - &(hn * &f_mat())
}

/// `(Hₙ)''_x`, differentiating the algebraic first derivative once more.
pub fn dmoment_dx2(state: &VesselState, n: usize) -> Result<ComplexMatrix, VesselError> {
    let hs = moments(state, n + 2)?;
    let jet = beta_jet(state, 2)?;
    let (b, b1, b2) = (jet.d(0), jet.d(1), jet.d(2));
    let dn = dmoment_from(&hs[n], &hs[n + 1], b, b1);
    let dn1 = dmoment_from(&hs[n + 1], &hs[n + 2], b, b1);
    let g = g_mat(b, b1);
    let gx = g_mat_dx(b, b1, b2);
    let t = &(&(&e21() * &dn1) - &(&dn1 * &e12())) + &(&gx * &hs[n]);
    Ok(&(&t + &(&g * &dn)) - &(&dn * &f_mat()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMethod {
    /// `γ + σ₂B*X⁻¹Bσ₁ − σ₁B*X⁻¹Bσ₂`
    Linkage,
    /// `[[−i(β'−β²), −β], [β, i]]`
    Tau,
}

pub fn gamma_star(state: &VesselState, method: GammaMethod) -> Result<ComplexMatrix, VesselError> {
    let p = &state.params;
    match method {
        GammaMethod::Linkage => {
            let h0 = moment(state, 0)?;
            let l = &(&p.sigma2 * &h0) * &p.sigma1;
            let r = &(&p.sigma1 * &h0) * &p.sigma2;
            Ok(&(&p.gamma + &l) - &r)
        }
        GammaMethod::Tau => {
            let jet = beta_jet(state, 1)?;
            let (b, b1) = (jet.d(0), jet.d(1));
            Ok(ComplexMatrix::mat2(-I * (b1 - b * b), -b, b, I))
        }
    }
}

fn spectrum(a: &ComplexMatrix) -> Vec<C64> {
    if a.is_diagonal() {
        return a.diagonal();
    }
    nalgebra::linalg::Schur::new(a.as_dmatrix().clone())
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

/// `S(λ) = I − B* X⁻¹ (λI − A)⁻¹ B σ₁`.
pub fn transfer_at(state: &VesselState, lambda: C64) -> Result<ComplexMatrix, VesselError> {
    if spectrum(&state.a).iter().any(|&e| (lambda - e).norm() <= SPECTRUM_GUARD) {
        return Err(VesselError::NearSpectrum { lambda, radius: SPECTRUM_GUARD });
    }
    let n = state.dim();
    let shifted = &ComplexMatrix::identity(n).scale(lambda) - &state.a;
    let rb = lu_solve(&shifted, &(&state.b * &state.params.sigma1))?;
    let s = &state.b.adjoint() * &x_inv(state, &rb)?;
    Ok(&ComplexMatrix::identity(2) - &s)
}

/// `K₀ … K_upto` from `Kₙ = Hₙ' + Σ_{i<n} Kᵢ σ₁ H_{n−1−i}`.
pub fn kmoment(state: &VesselState, upto: usize) -> Result<Vec<ComplexMatrix>, VesselError> {
    let hs = moments(state, upto + 1)?;
    let jet = beta_jet(state, 1)?;
    let s1 = &state.params.sigma1;
    let mut ks: Vec<ComplexMatrix> = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        let mut k = dmoment_from(&hs[n], &hs[n + 1], jet.d(0), jet.d(1));
        for i in 0..n {
            k += &(&(&ks[i] * s1) * &hs[n - 1 - i]);
        }
        ks.push(k);
    }
    Ok(ks)
}

/// `Aⁿ⁺¹X + (−1)ⁿX(A*)ⁿ⁺¹ + Σ_{i≤n} (−1)ⁱ A^{n−i} Bσ₁B* (A*)ⁱ` as `(‖·‖_F, scale)`.
pub fn convolution_residual(state: &VesselState, n: usize) -> (f64, f64) {
    let a = &state.a;
    let a_star = a.adjoint();
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lhs = &(&a.pow(n + 1) * &state.x) + &(&state.x * &a_star.pow(n + 1)).scale_re(sign(n));
    let bsb = &(&state.b * &state.params.sigma1) * &state.b.adjoint();
    let mut r = lhs.clone();
    for i in 0..=n {
        r += &(&(&a.pow(n - i) * &bsb) * &a_star.pow(i)).scale_re(sign(i));
    }
    let scale = lhs.norm_fro() + (a.norm_fro().powi(n as i32) * bsb.norm_fro());
    (r.norm_fro(), scale)
}

/// `β(t) = β₀ / (1 + m t β₀)`, the solution of `β'_t = −mβ²`.
pub fn type0_closed_beta(beta0: C64, m: f64, t: f64) -> Result<C64, VesselError> {
    let den = 1.0 + m * t * beta0;
    if den.norm() < 1e-12 {
        return Err(VesselError::Pole { t });
    }
    Ok(beta0 / den)
}

/// `u(x) = exp(x σ₁⁻¹(σ₂λ + γ)) u₀`, solving `λσ₂u − σ₁u' + γu = 0`.
pub fn input_lde_solution(params: &VesselParams, lambda: C64, x: f64, u0: [C64; 2]) -> [C64; 2] {
    let m = &params.sigma1_inv() * &(&params.sigma2.scale(lambda) + &params.gamma);
    let e = mat2_exp(&m, c(x));
    [e.get(0, 0) * u0[0] + e.get(0, 1) * u0[1], e.get(1, 0) * u0[0] + e.get(1, 1) * u0[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::{soliton_vessel, SolitonSpec};

    fn s1() -> SolitonSpec {
        SolitonSpec::new(1, vec![(1.0, c(2f64.sqrt()))]).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn s1_fields_at_origin() {
        let st = soliton_vessel(&s1(), 0.0, 0.0).unwrap();
        let f = scalar_fields(&st).unwrap();
        assert!(close(f.tau, c(1.0), 1e-15));
        assert!(close(f.beta, c(-1.0), 1e-15));
        let jet = beta_jet(&st, 4).unwrap();
        assert!(close(jet.d(0), c(-1.0), 1e-14));
        assert!(close(jet.d(1), c(-1.0), 1e-14));
        assert!(close(jet.d(2), c(0.0), 1e-13));
        // β = −1 − tanh u: β''' = −(4 sech²u − 6 sech⁴u) = 2 at u = 0
        assert!(close(jet.d(3), c(2.0), 1e-12));
    }

    #[test]
    fn s1_beta_closed_form() {
        for &(x, t) in &[(-4.0, 0.0), (0.7, 0.3), (4.5, 1.0)] {
            let st = soliton_vessel(&s1(), x, t).unwrap();
            let f = scalar_fields(&st).unwrap();
            let u: f64 = x + t;
            assert!(close(f.beta, c(-(1.0 + u.tanh())), 1e-13));
            assert!(close(f.tau, c((1.0 + (2.0 * u).exp()) / 2.0), 1e-12 * f.tau.norm()));
        }
    }

    #[test]
    fn generic_jet_matches_closed_form_jet() {
        let spec = SolitonSpec::new(1, vec![(0.5, c(1.0)), (1.0, C64::new(0.3, 0.7)), (1.5, c(-1.0))]).unwrap();
        let st = soliton_vessel(&spec, 0.4, 0.2).unwrap();
        let mut generic = st.clone();
        generic.soliton = None;
        let a = beta_jet(&st, 8).unwrap();
        let b = beta_jet(&generic, 8).unwrap();
        for j in 0..=8 {
            assert!(close(a.d(j), b.d(j), 1e-9 * a.d(j).norm().max(1.0)), "order {j}");
        }
    }

    #[test]
    fn zero_vessel_fields() {
        let z = VesselState::zero((0.0, 0.0));
        let f = scalar_fields(&z).unwrap();
        assert_eq!((f.tau, f.beta), (c(1.0), c(0.0)));
        let jet = beta_jet(&z, 5).unwrap();
        assert!((0..=5).all(|j| jet.d(j) == c(0.0)));
        assert_eq!(moment(&z, 2).unwrap().norm_fro(), 0.0);
        assert_eq!(gamma_star(&z, GammaMethod::Linkage).unwrap(), z.params.gamma);
        assert!(kmoment(&z, 3).unwrap().iter().all(|k| k.norm_fro() == 0.0));
    }

    #[test]
    fn s1_moments() {
        let st = soliton_vessel(&s1(), 0.0, 0.0).unwrap();
        let h0 = moment(&st, 0).unwrap();
        let expect = ComplexMatrix::mat2(c(1.0), I, -I, c(1.0));
        assert!(h0.dist(&expect) < 1e-14);
        assert!(moment(&st, 1).unwrap().dist(&expect.scale(-I)) < 1e-14);
        let dh = dmoment_dx(&st, 0).unwrap();
        assert!(dh.dist(&expect) < 1e-13);
        let k = kmoment(&st, 0).unwrap();
        assert!(k[0].dist(&expect) < 1e-13);
        assert!(matches!(moment(&st, 13), Err(VesselError::OrderCap { .. })));
    }

    #[test]
    fn s1_gamma_star_both_ways() {
        let st = soliton_vessel(&s1(), 0.0, 0.0).unwrap();
        let expect = ComplexMatrix::mat2(2.0 * I, c(1.0), c(-1.0), I);
        assert!(gamma_star(&st, GammaMethod::Tau).unwrap().dist(&expect) < 1e-13);
        assert!(gamma_star(&st, GammaMethod::Linkage).unwrap().dist(&expect) < 1e-13);
    }

    #[test]
    fn s1_transfer_at_i() {
        let st = soliton_vessel(&s1(), 0.0, 0.0).unwrap();
        let s = transfer_at(&st, I).unwrap();
        let expect = ComplexMatrix::mat2(c(0.5), 0.5 * I, 0.5 * I, c(1.5));
        assert!(s.dist(&expect) < 1e-14);
        let s_bar = transfer_at(&st, I).unwrap(); // −conj(i) = i
        let sym = &(&s_bar.adjoint() * &st.params.sigma1) * &s;
        assert!(sym.dist(&st.params.sigma1) < 1e-12);
        let far = transfer_at(&st, C64::new(1e8, 0.0)).unwrap();
        assert!(far.dist(&ComplexMatrix::identity(2)) < 1e-7);
        assert!(matches!(transfer_at(&st, -I), Err(VesselError::NearSpectrum { .. })));
    }

    #[test]
    fn type0_closed_form() {
        assert!(close(type0_closed_beta(c(1.0), 1.0, 1.0).unwrap(), c(0.5), 1e-15));
        assert_eq!(type0_closed_beta(c(0.3), 2.0, 0.0).unwrap(), c(0.3));
        assert_eq!(type0_closed_beta(c(0.3), 0.0, 7.0).unwrap(), c(0.3));
        assert!(matches!(type0_closed_beta(c(-1.0), 1.0, 1.0), Err(VesselError::Pole { .. })));
    }

    #[test]
    fn input_lde_propagator() {
        let p = VesselParams::default();
        let u0 = [c(0.3), C64::new(0.1, -0.4)];
        assert_eq!(input_lde_solution(&p, c(1.0), 0.0, u0), u0);
        let u = input_lde_solution(&p, c(0.0), 2.0, u0);
        assert!(close(u[0], u0[0] + 2.0 * I * u0[1], 1e-15) && close(u[1], u0[1], 1e-15));
    }
}
