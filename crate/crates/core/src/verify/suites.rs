use rand::{Rng, SeedableRng};

use crate::diffring::{DiffPoly, GaussianRational};
use crate::hierarchy::{b_sequence, flow_rhs, phase_candidates, FlowConvention, MAX_LEVEL};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::vessel::{
    beta_jet, convolution_residual, dmoment_dx, dmoment_dx2, gamma_star, input_lde_solution, kmoment, moment,
    moments, scalar_fields, transfer_at, GammaMethod, VesselState, MAX_JET_ORDER,
};

use super::{cnorm, fd_derivative, sweep, GridSpec, ResidualReport, Var, VerifyError, VesselSource};

/// Threshold a candidate must meet in the pinning experiments.
pub const PIN_TOL: f64 = 1e-6;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A few fixed spectral samples off the imaginary-axis spectrum of soliton `A`'s.
pub fn default_lambdas() -> Vec<C64> {
    vec![2.0 * I, C64::new(1.0, 1.0), C64::new(-0.5, 1.5)]
}

/// `count` seeded λ in the box `|re|, |im| ≤ 3`, at least 0.05 away from `spectrum`.
pub fn random_lambdas(count: usize, seed: u64, spectrum: &[C64]) -> Vec<C64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if spectrum.iter().all(|&e| (l - e).norm() > 0.05) {
            out.push(l);
        }
    }
    out
}

fn beta_at(src: &VesselSource, x: f64, t: f64) -> Result<C64, VerifyError> {
    Ok(scalar_fields(&src.state_at(x, t)?)?.beta)
}

fn dbeta_dx_at(src: &VesselSource, x: f64, t: f64) -> Result<C64, VerifyError> {
    Ok(beta_jet(&src.state_at(x, t)?, 1)?.d(1))
}

/// `max |q_t + 3/2 q q_x − 1/4 q_xxx|` with `q = 2β'`.
pub fn residual_kdv(src: &VesselSource, grid: &GridSpec) -> Result<ResidualReport, VerifyError> {
    let steps = src.steps();
    sweep(&grid.points(), vec![("kdv".into(), 1e-6)], |x, t| {
        let jet = beta_jet(&src.state_at(x, t)?, 4)?;
        let q = 2.0 * jet.d(1);
        let qx = 2.0 * jet.d(2);
        let qxxx = 2.0 * jet.d(4);
        let qt = 2.0 * fd_derivative(|x, t| dbeta_dx_at(src, x, t), (x, t), Var::T, 1, steps.ht)?;
        Ok(vec![cnorm(qt + 1.5 * q * qx - 0.25 * qxxx)])
    })
}

/// `(β_t, b_m(jet))` at every grid point.
fn flow_samples(src: &VesselSource, level: usize, grid: &GridSpec) -> Result<Vec<(f64, f64, C64, C64)>, VerifyError> {
    let order = 2 * level + 3;
    if order > MAX_JET_ORDER {
        return Err(VerifyError::Unsupported(format!("level {level} needs jet order {order}")));
    }
    let b = b_sequence(level)?.pop().expect("non-empty");
    let steps = src.steps();
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len());
    let vals: Vec<Result<(C64, C64), VerifyError>> = super::with_pool(|| {
        use rayon::prelude::*;
        pts.par_iter()
            .map(|&(x, t)| {
                let jet = beta_jet(&src.state_at(x, t)?, order)?;
                let bv = b.eval(&jet).map_err(crate::hierarchy::HierarchyError::from)?;
                let bt = fd_derivative(|x, t| beta_at(src, x, t), (x, t), Var::T, 1, steps.ht)?;
                Ok((bt, bv))
            })
            .collect()
    });
    for (v, &(x, t)) in vals.into_iter().zip(&pts) {
        let (bt, bv) = v?;
        out.push((x, t, bt, bv));
    }
    Ok(out)
}

/// `max |β_t − ε_m b_m(jet)|` for the flow at `level` under `conv`.
pub fn residual_hierarchy_flow(
    src: &VesselSource,
    level: usize,
    conv: &FlowConvention,
    grid: &GridSpec,
) -> Result<ResidualReport, VerifyError> {
    let rhs = flow_rhs(level, conv)?;
    let order = 2 * level + 3;
    if order > MAX_JET_ORDER {
        return Err(VerifyError::Unsupported(format!("level {level} needs jet order {order}")));
    }
    let steps = src.steps();
    sweep(&grid.points(), vec![(format!("flow level {level}"), 1e-6)], |x, t| {
        let jet = beta_jet(&src.state_at(x, t)?, order)?;
        let r = rhs.eval(&jet).map_err(crate::hierarchy::HierarchyError::from)?;
        let bt = fd_derivative(|x, t| beta_at(src, x, t), (x, t), Var::T, 1, steps.ht)?;
        Ok(vec![cnorm(bt - r)])
    })
}

/// Outcome of the phase-pinning experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePin {
    pub level: usize,
    pub phase: GaussianRational,
    /// Max residual for every candidate, in candidate order.
    pub residuals: Vec<(GaussianRational, f64)>,
}

fn phase_label(p: &GaussianRational) -> String {
    DiffPoly::constant(p.clone()).render(crate::diffring::RenderFormat::Text)
}

/// Tries every phase in {1, −1, i, −i} for the level driven by the source's
/// evolution type; exactly one must bring the flow residual under [`PIN_TOL`].
pub fn pin_phase(src: &VesselSource, grid: &GridSpec) -> Result<PhasePin, VerifyError> {
    let n = src
        .hierarchy_type()
        .ok_or_else(|| VerifyError::Unsupported("phase pinning needs a hierarchy evolution".into()))?;
    let level = FlowConvention::pinned()
        .level_for_type(n)
        .filter(|&m| m <= MAX_LEVEL)
        .ok_or_else(|| VerifyError::Unsupported(format!("no hierarchy level for type {n}")))?;
    let samples = flow_samples(src, level, grid)?;
    let residuals: Vec<(GaussianRational, f64)> = phase_candidates()
        .into_iter()
        .map(|p| {
            let e = p.to_c64();
            let worst = samples
                .iter()
                .map(|&(_, _, bt, bv)| {
                    let r = cnorm(bt - e * bv);
                    if r.is_nan() {
                        f64::INFINITY
                    } else {
                        r
                    }
                })
                .fold(0.0, f64::max);
            (p, worst)
        })
        .collect();
    let passing: Vec<&(GaussianRational, f64)> = residuals.iter().filter(|(_, r)| *r <= PIN_TOL).collect();
    if passing.len() != 1 {
        return Err(VerifyError::Ambiguous {
            what: format!("phase of level {level}"),
            passing: passing.iter().map(|(p, _)| phase_label(p)).collect(),
        });
    }
    let phase = passing[0].0.clone();
    Ok(PhasePin { level, phase, residuals })
}

fn rel(r: f64, scale: f64) -> f64 {
    r / scale.max(1.0)
}

fn spectrum_of(state: &VesselState) -> Vec<C64> {
    if state.a.is_diagonal() {
        state.a.diagonal()
    } else {
        nalgebra::linalg::Schur::new(state.a.as_dmatrix().clone())
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default()
    }
}

/// `∂_x S` from the ODE `σ₁⁻¹(σ₂λ + γ*)S − Sσ₁⁻¹(σ₂λ + γ)`.
fn ds_dx(state: &VesselState, lambda: C64, s: &ComplexMatrix, gs: &ComplexMatrix) -> ComplexMatrix {
    let p = &state.params;
    let s1i = p.sigma1_inv();
    let left = &(&s1i * &(&p.sigma2.scale(lambda) + gs)) * s;
    let right = &(s * &s1i) * &(&p.sigma2.scale(lambda) + &p.gamma);
    &left - &right
}

const TRANSFER_ODE_LAMBDAS: usize = 3;
const BACKLUND_LAMBDAS: usize = 5;

/// The vessel invariants at every grid point.
pub fn suite_vessel_invariants(src: &VesselSource, grid: &GridSpec) -> Result<ResidualReport, VerifyError> {
    let steps = src.steps();
    let pts = grid.points();
    let spec_state = src.state_at(pts[0].0, pts[0].1)?;
    let lambdas = random_lambdas(20, 7, &spectrum_of(&spec_state));
    let back = backlund_lambdas(&spectrum_of(&spec_state));

    let mut rows: Vec<(String, f64)> = vec![
        ("lyapunov".into(), 1e-7),
        ("x self-adjoint".into(), 1e-8),
        ("transfer symmetry".into(), 1e-8),
        ("transfer symmetry*".into(), 1e-8),
        ("transfer ode".into(), 1e-6),
        ("H0 self-adjoint".into(), 1e-9),
    ];
    for n in 1..=3 {
        rows.push((format!("moment symmetry n={n}"), 1e-9));
    }
    for n in 1..=3 {
        rows.push((format!("moment symmetry* n={n}"), 1e-9));
    }
    for n in 0..=2 {
        rows.push((format!("moment derivative n={n}"), 1e-7));
    }
    rows.extend([
        ("first moment".to_string(), 1e-8),
        ("tr(s1 H0) + tr(A + A*)".to_string(), 1e-9),
        ("tr(s2 H0) + beta".to_string(), 1e-10),
        ("tau'/tau + beta".to_string(), 1e-7),
        ("tr(J H0) - i(beta' - beta^2)".to_string(), 1e-8),
        ("H1 trace identity".to_string(), 1e-7),
    ]);
    for n in 0..=4 {
        rows.push((format!("convolution n={n}"), 1e-8));
    }
    for n in 0..=4 {
        rows.push((format!("kmoment symmetry (-1)^n n={n}"), 1e-8));
    }
    rows.extend([
        ("gamma* linkage vs tau".to_string(), 1e-8),
        ("gamma* anti-self-adjoint".to_string(), 1e-8),
        ("backlund".to_string(), 1e-6),
    ]);

    sweep(&pts, rows, |x, t| {
        let st = src.state_at(x, t)?;
        let p = &st.params;
        let mut out = Vec::with_capacity(48);

        let (r, s) = st.lyapunov_residual();
        out.push(rel(r, s));
        let (r, s) = st.self_adjoint_residual();
        out.push(rel(r, s));

        let s1 = &p.sigma1;
        let s1i = p.sigma1_inv();
        let (mut sym, mut sym_star) = (0.0f64, 0.0f64);
        for &l in &lambdas {
            let s_l = transfer_at(&st, l)?;
            let s_m = transfer_at(&st, -l.conj())?;
            sym = sym.max((&(&s_m.adjoint() * s1) * &s_l).dist(s1));
            sym_star = sym_star.max((&(&s_l * &s1i) * &s_m.adjoint()).dist(&s1i));
        }
        out.push(sym);
        out.push(sym_star);

        let gs = gamma_star(&st, GammaMethod::Linkage)?;
        let mut ode = 0.0f64;
        for &l in lambdas.iter().take(TRANSFER_ODE_LAMBDAS) {
            let s_l = transfer_at(&st, l)?;
            let fd = fd_derivative(|x, t| Ok::<_, VerifyError>(transfer_at(&src.state_at(x, t)?, l)?), (x, t), Var::X, 1, steps.hx)?;
            ode = ode.max(rel(fd.dist(&ds_dx(&st, l, &s_l, &gs)), s_l.norm_fro()));
        }
        out.push(ode);

        let hs = moments(&st, 4)?;
        out.push(hs[0].dist(&hs[0].adjoint()));
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        for n in 1..=3 {
            let mut m = &hs[n] + &hs[n].adjoint().scale_re(sign(n + 1));
            for i in 0..n {
                m += &(&(&hs[i].adjoint() * s1) * &hs[n - 1 - i]).scale_re(sign(i));
            }
            out.push(m.norm_fro());
        }
        for n in 1..=3 {
            let mut m = &hs[n] + &hs[n].adjoint().scale_re(sign(n + 1));
            for i in 0..n {
                m += &(&(&hs[i] * s1) * &hs[n - 1 - i].adjoint()).scale_re(sign(n - 1 + i));
            }
            out.push(m.norm_fro());
        }
        for n in 0..=2 {
            let alg = dmoment_dx(&st, n)?;
            let fd = fd_derivative(|x, t| Ok::<_, VerifyError>(moment(&src.state_at(x, t)?, n)?), (x, t), Var::X, 1, steps.hx)?;
            out.push(rel(fd.dist(&alg), alg.norm_fro()));
        }

        let jet = beta_jet(&st, 2)?;
        let (b, b1, b2) = (jet.d(0), jet.d(1), jet.d(2));
        let h0 = &hs[0];
        let first = [
            cnorm(h0.get(0, 0) + b),
            cnorm(h0.get(0, 1) + I * (b1 - b * b) / 2.0),
            cnorm(h0.get(1, 0) - I * (b1 - b * b) / 2.0),
        ];
        out.push(first.into_iter().fold(0.0, f64::max));
        out.push(cnorm((s1 * h0).trace() + (&st.a + &st.a.adjoint()).trace()));
        let f = scalar_fields(&st)?;
        out.push(cnorm((&p.sigma2 * h0).trace() + f.beta));
        let tau_x = fd_derivative(|x, t| Ok::<_, VerifyError>(scalar_fields(&src.state_at(x, t)?)?.tau), (x, t), Var::X, 1, steps.hx)?;
        out.push(cnorm(tau_x / f.tau + f.beta));
        let j = ComplexMatrix::real2(0.0, 1.0, -1.0, 0.0);
        out.push(cnorm((&j * h0).trace() - I * (b1 - b * b)));
        let e22i = ComplexMatrix::mat2(c(0.0), c(0.0), c(0.0), I);
        let e12 = ComplexMatrix::real2(0.0, 1.0, 0.0, 0.0);
        let h1id = (&p.sigma2 * &hs[1]).trace() - (&e22i * h0).trace() - b * (&e12 * h0).trace()
            + (b2 - 4.0 * b1 * b + 2.0 * b * b * b) / (2.0 * I);
        out.push(cnorm(h1id));

        for n in 0..=4 {
            let (r, s) = convolution_residual(&st, n);
            out.push(rel(r, s));
        }
        let ks = kmoment(&st, 4)?;
        for (n, k) in ks.iter().enumerate() {
            out.push(k.adjoint().dist(&k.scale_re(sign(n))));
        }

        let gt = gamma_star(&st, GammaMethod::Tau)?;
        out.push(gs.max_abs_diff(&gt));
        out.push((&gs + &gs.adjoint()).max_abs());
        out.push(backlund_at(src, &st, &back, steps.hx)?);
        Ok(out)
    })
}

trait MaxAbsDiff {
    fn max_abs_diff(&self, other: &Self) -> f64;
}

impl MaxAbsDiff for ComplexMatrix {
    fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

fn backlund_lambdas(spectrum: &[C64]) -> Vec<C64> {
    random_lambdas(BACKLUND_LAMBDAS, 13, spectrum)
}

/// `max_λ ‖λσ₂y − σ₁y' + γ*y‖ / max(1, ‖y‖)` for `y = S(λ)u`, `u` solving the input LDE.
fn backlund_at(src: &VesselSource, st: &VesselState, lambdas: &[C64], h: f64) -> Result<f64, VerifyError> {
    let p = &st.params;
    let u0 = [c(1.0), 0.5 * I];
    let y_at = |l: C64, x: f64, t: f64| -> Result<ComplexMatrix, VerifyError> {
        let s = transfer_at(&src.state_at(x, t)?, l)?;
        let u = input_lde_solution(p, l, x, u0);
        Ok(&s * &ComplexMatrix::from_fn(2, 1, |i, _| u[i]))
    };
    let gs = gamma_star(st, GammaMethod::Linkage)?;
    let mut worst = 0.0f64;
    for &l in lambdas {
        let y = y_at(l, st.at_x, st.at_t)?;
        let dy = fd_derivative(|x, t| y_at(l, x, t), (st.at_x, st.at_t), Var::X, 1, h)?;
        let r = &(&(&p.sigma2.scale(l) * &y) - &(&p.sigma1 * &dy)) + &(&gs * &y);
        worst = worst.max(rel(r.norm_fro(), y.norm_fro()));
    }
    Ok(worst)
}

/// Only the Bäcklund row, at five seeded λ.
pub fn residual_backlund(src: &VesselSource, grid: &GridSpec) -> Result<ResidualReport, VerifyError> {
    let steps = src.steps();
    let pts = grid.points();
    let st0 = src.state_at(pts[0].0, pts[0].1)?;
    let lambdas = backlund_lambdas(&spectrum_of(&st0));
    sweep(&pts, vec![("backlund".into(), 1e-6)], |x, t| {
        let st = src.state_at(x, t)?;
        Ok(vec![backlund_at(src, &st, &lambdas, steps.hx)?])
    })
}

/// Which coefficient closes the λ-polynomial in the type-n S evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// `Σ_{j=0}^{n−1} λ^{n−1−j} K_j`
    ConstantKnMinus1,
    /// `Σ_{j=0}^{n−2} λ^{n−1−j} K_j + K_n`
    ConstantKn,
}

impl Truncation {
    pub fn pinned() -> Self {
        Self::ConstantKnMinus1
    }

    fn label(self) -> &'static str {
        match self {
            Self::ConstantKnMinus1 => "K_{n-1}",
            Self::ConstantKn => "K_n",
        }
    }
}

/// `(iλ)ⁿ S_x + iⁿ [poly(λ, K)] σ₁ S`.
fn s_rhs_type_n(st: &VesselState, lambda: C64, n: usize, trunc: Truncation) -> Result<ComplexMatrix, VerifyError> {
    let s = transfer_at(st, lambda)?;
    let gs = gamma_star(st, GammaMethod::Linkage)?;
    let sx = ds_dx(st, lambda, &s, &gs);
    let ks = kmoment(st, n)?;
    let mut poly = ComplexMatrix::zeros(2, 2);
    for (j, k) in ks.iter().enumerate().take(n.saturating_sub(1)) {
        poly += &k.scale(lambda.powu((n - 1 - j) as u32));
    }
    poly += match trunc {
        Truncation::ConstantKnMinus1 => &ks[n - 1],
        Truncation::ConstantKn => &ks[n],
    };
    let i_n = I.powu(n as u32);
    Ok(&sx.scale((I * lambda).powu(n as u32)) + &(&(&poly * &st.params.sigma1) * &s).scale(i_n))
}

/// Identities for the t-evolution: the matrix-form KdV identities on type-1
/// sources, and the type-n S evolution with the pinned truncation.
pub fn suite_evolution_identities(
    src: &VesselSource,
    grid: &GridSpec,
    lambdas: &[C64],
) -> Result<ResidualReport, VerifyError> {
    let n = src
        .hierarchy_type()
        .ok_or_else(|| VerifyError::Unsupported("evolution identities need a hierarchy evolution".into()))?;
    let steps = src.steps();
    let mut rows: Vec<(String, f64)> = Vec::new();
    if n == 1 {
        for k in 0..=2 {
            rows.push((format!("dH{k}/dt"), 1e-6));
        }
        rows.push(("dS/dt".into(), 1e-6));
        rows.push(("dgamma*/dt".into(), 1e-6));
    }
    rows.push((format!("dS/dt type {n}"), 1e-6));

    sweep(&grid.points(), rows, |x, t| {
        let st = src.state_at(x, t)?;
        let s1 = &st.params.sigma1;
        let mut out = Vec::new();
        let fd_t = |f: &dyn Fn(&VesselState) -> Result<ComplexMatrix, VerifyError>| {
            fd_derivative(|x, t| f(&src.state_at(x, t)?), (x, t), Var::T, 1, steps.ht)
        };
        if n == 1 {
            let dh0 = dmoment_dx(&st, 0)?;
            let hs = moments(&st, 2)?;
            for (k, hk) in hs.iter().enumerate() {
                let rhs = &dmoment_dx(&st, k + 1)?.scale(I) + &(&(&dh0 * s1) * hk).scale(I);
                let lhs = fd_t(&|s| Ok(moment(s, k)?))?;
                out.push(rel(lhs.dist(&rhs), rhs.norm_fro()));
            }
            let gs = gamma_star(&st, GammaMethod::Linkage)?;
            let mut worst = 0.0f64;
            for &l in lambdas {
                let s = transfer_at(&st, l)?;
                let rhs = &ds_dx(&st, l, &s, &gs).scale(I * l) + &(&(&dh0 * s1) * &s).scale(I);
                let lhs = fd_t(&|s| Ok(transfer_at(s, l)?))?;
                worst = worst.max(rel(lhs.dist(&rhs), rhs.norm_fro()));
            }
            out.push(worst);
            let d2h0 = dmoment_dx2(&st, 0)?;
            let rhs = &(&(&(&gs * &dh0) * s1).scale(-I) + &(&(s1 * &d2h0) * s1).scale(I)) + &(&(s1 * &dh0) * &gs).scale(I);
            let lhs = fd_t(&|s| Ok(gamma_star(s, GammaMethod::Linkage)?))?;
            out.push(rel(lhs.dist(&rhs), rhs.norm_fro()));
        }
        let mut worst = 0.0f64;
        for &l in lambdas {
            let rhs = s_rhs_type_n(&st, l, n, Truncation::pinned())?;
            let lhs = fd_t(&|s| Ok(transfer_at(s, l)?))?;
            worst = worst.max(rel(lhs.dist(&rhs), rhs.norm_fro()));
        }
        out.push(worst);
        Ok(out)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationProbe {
    pub passing: Truncation,
    pub residuals: Vec<(Truncation, f64)>,
}

/// Evaluates both truncation conventions of the type-n S evolution; exactly one must pass.
pub fn probe_truncation(src: &VesselSource, grid: &GridSpec, lambdas: &[C64]) -> Result<TruncationProbe, VerifyError> {
    let n = src
        .hierarchy_type()
        .ok_or_else(|| VerifyError::Unsupported("truncation probe needs a hierarchy evolution".into()))?;
    let steps = src.steps();
    let cands = [Truncation::ConstantKnMinus1, Truncation::ConstantKn];
    let rows = cands.iter().map(|c| (c.label().to_string(), PIN_TOL)).collect();
    let report = sweep(&grid.points(), rows, |x, t| {
        let st = src.state_at(x, t)?;
        let mut out = vec![0.0f64; cands.len()];
        for &l in lambdas {
            let lhs = fd_derivative(|x, t| Ok::<_, VerifyError>(transfer_at(&src.state_at(x, t)?, l)?), (x, t), Var::T, 1, steps.ht)?;
            for (slot, &cand) in out.iter_mut().zip(&cands) {
                let rhs = s_rhs_type_n(&st, l, n, cand)?;
                *slot = slot.max(rel(lhs.dist(&rhs), rhs.norm_fro()));
            }
        }
        Ok(out)
    })?;
    let residuals: Vec<(Truncation, f64)> = cands.iter().copied().zip(report.checks.iter().map(|c| c.max_residual)).collect();
    let passing: Vec<Truncation> = residuals.iter().filter(|(_, r)| *r <= PIN_TOL).map(|(c, _)| *c).collect();
    if passing.len() != 1 {
        return Err(VerifyError::Ambiguous {
            what: format!("S-evolution truncation for type {n}"),
            passing: passing.iter().map(|c| c.label().to_string()).collect(),
        });
    }
    Ok(TruncationProbe { passing: passing[0], residuals })
}
