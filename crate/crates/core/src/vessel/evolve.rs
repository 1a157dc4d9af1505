//! t-evolutions `B'_t σ₁ = A Σ Aⁱ B mᵢ`, `X'_t = −Σ Yᵢ` and the x-flow.

use crate::linalg::{mat2_exp, ComplexMatrix, C64, I};

use super::{VesselError, VesselParams, VesselState};

/// Relative tolerance for quadrature and step control.
pub const QUAD_TOL: f64 = 1e-10;
const RK_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 18;

/// How `B` and `X` move in `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionSpec {
    /// `B'_t σ₁ = (iA)ⁿ B'_x σ₁`, i.e. `m_n = −iⁿσ₂`, `m_{n−1} = −iⁿγ`.
    Hierarchy(usize),
    /// `m₀ = m σ₂ + m₁₂ σ₁`.
    Type0 { m: f64, m12: f64 },
    /// Explicit `m₀, …, m_n`.
    General(Vec<ComplexMatrix>),
}

fn i_pow(n: usize) -> C64 {
    [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I][n % 4]
}

impl EvolutionSpec {
    /// The coefficient list `m₀ … m_n`.
    pub fn coefficients(&self, params: &VesselParams) -> Vec<ComplexMatrix> {
        match self {
            Self::Hierarchy(n) => {
                let n = *n;
                let mut ms = vec![ComplexMatrix::zeros(2, 2); n + 1];
                let c = -i_pow(n);
                ms[n] = params.sigma2.scale(c);
                if n >= 1 {
                    ms[n - 1] = params.gamma.scale(c);
                }
                ms
            }
            Self::Type0 { m, m12 } => vec![&params.sigma2.scale_re(*m) + &params.sigma1.scale_re(*m12)],
            Self::General(ms) => ms.clone(),
        }
    }

    /// Shapes, finiteness and `mᵢ* = (−1)ⁱ mᵢ`.
    pub fn validate(&self) -> Result<(), VesselError> {
        let bad = |m: String| Err(VesselError::Validation(m));
        match self {
            Self::Hierarchy(0) => bad("hierarchy type must be at least 1".into()),
            Self::Hierarchy(_) => Ok(()),
            Self::Type0 { m, m12 } if !(m.is_finite() && m12.is_finite()) => bad("type0 m and m12 must be finite".into()),
            Self::Type0 { .. } => Ok(()),
            Self::General(ms) => {
                if ms.is_empty() {
                    return bad("general evolution needs at least m0".into());
                }
                for (i, m) in ms.iter().enumerate() {
                    if m.shape() != (2, 2) {
                        return bad(format!("m{i} must be 2x2"));
                    }
                    m.check_finite()?;
                    let target = if i % 2 == 0 { m.clone() } else { -m };
                    if m.adjoint().dist(&target) > 1e-12 * m.norm_fro().max(1.0) {
                        let sign = if i % 2 == 0 { "" } else { "-" };
                        return bad(format!("m{i} violates m{i}* = {sign}m{i}"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Row generator of the x-flow for eigenvalue `a`: `r' = r·Mx`.
fn row_gen_x(a: C64, p: &VesselParams, s1inv: &ComplexMatrix) -> ComplexMatrix {
    -&(&(&p.sigma2.scale(a) + &p.gamma) * s1inv)
}

/// Row generator of the t-flow for eigenvalue `a`.
fn row_gen_t(a: C64, ms: &[ComplexMatrix], s1inv: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(2, 2);
    let mut ap = a;
    for m in ms {
        acc += &m.scale(ap);
        ap *= a;
    }
    &acc * s1inv
}

fn flow_x(a: &ComplexMatrix, b: &ComplexMatrix, p: &VesselParams, s1inv: &ComplexMatrix) -> ComplexMatrix {
    -&(&(&(&(a * b) * &p.sigma2) + &(b * &p.gamma)) * s1inv)
}

fn flow_t(a: &ComplexMatrix, b: &ComplexMatrix, ms: &[ComplexMatrix], s1inv: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(b.rows(), 2);
    let mut aib = b.clone();
    for m in ms {
        acc += &(&aib * m);
        aib = a * &aib;
    }
    &(a * &acc) * s1inv
}

/// `−Σ Yᵢ`, `Yᵢ = Σ_{j≤i} (−1)ʲ A^{i−j} B mᵢ B* (A*)ʲ`.
fn x_rate_t(a: &ComplexMatrix, b: &ComplexMatrix, ms: &[ComplexMatrix]) -> ComplexMatrix {
    let n = a.rows();
    let a_star = a.adjoint();
    let b_star = b.adjoint();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, m) in ms.iter().enumerate() {
        let core = &(b * m) * &b_star;
        for j in 0..=i {
            let term = &(&a.pow(i - j) * &core) * &a_star.pow(j);
            if j % 2 == 0 {
                out = &out - &term;
            } else {
                out = &out + &term;
            }
        }
    }
    out
}

fn x_rate_x(b: &ComplexMatrix, p: &VesselParams) -> ComplexMatrix {
    &(b * &p.sigma2) * &b.adjoint()
}

/// Classical RK4 on a tuple of matrices with step doubling.
fn rk4_adaptive(
    y0: Vec<ComplexMatrix>,
    length: f64,
    f: impl Fn(&[ComplexMatrix]) -> Vec<ComplexMatrix>,
) -> Result<Vec<ComplexMatrix>, VesselError> {
    if length == 0.0 {
        return Ok(y0);
    }
    let axpy = |y: &[ComplexMatrix], k: &[ComplexMatrix], h: f64| -> Vec<ComplexMatrix> {
        y.iter().zip(k).map(|(a, b)| a + &b.scale_re(h)).collect()
    };
    let step = |y: &[ComplexMatrix], h: f64| -> Vec<ComplexMatrix> {
        let k1 = f(y);
        let k2 = f(&axpy(y, &k1, h / 2.0));
        let k3 = f(&axpy(y, &k2, h / 2.0));
        let k4 = f(&axpy(y, &k3, h));
        y.iter()
            .enumerate()
            .map(|(i, yi)| {
                let s = &(&(&k1[i] + &k2[i].scale_re(2.0)) + &k3[i].scale_re(2.0)) + &k4[i];
                yi + &s.scale_re(h / 6.0)
            })
            .collect()
    };
    let h_min = length.abs() / f64::from(1u32 << MAX_HALVINGS);
    let mut y = y0;
    let mut s = 0.0;
    let mut h = length / 16.0;
    while (length - s).abs() > 1e-15 * length.abs() {
        if (s + h - length) * length.signum() > 0.0 {
            h = length - s;
        }
        let full = step(&y, h);
        let half = step(&step(&y, h / 2.0), h / 2.0);
        let err = full.iter().zip(&half).map(|(a, b)| a.dist(b)).fold(0.0, f64::max) / 15.0;
        let scale = half.iter().map(ComplexMatrix::norm_fro).fold(1.0, f64::max);
        if err <= RK_TOL * scale {
            // local extrapolation
            y = half.iter().zip(&full).map(|(a, b)| a + &(a - b).scale_re(1.0 / 15.0)).collect();
            s += h;
            if err < RK_TOL * scale / 64.0 {
                h *= 2.0;
            }
        } else {
            h /= 2.0;
            if h.abs() < h_min {
                return Err(VesselError::StepFailure { t: s, reason: format!("error {err:.2e} at step floor") });
            }
        }
        for m in &y {
            m.check_finite()?;
        }
    }
    Ok(y)
}

/// `∫₀^len g(s) ds` by trapezoid halving with Romberg extrapolation.
fn romberg(len: f64, g: impl Fn(f64) -> ComplexMatrix) -> Result<ComplexMatrix, VesselError> {
    let g0 = g(0.0);
    if len == 0.0 {
        return Ok(ComplexMatrix::zeros(g0.rows(), g0.cols()));
    }
    let mut trap = (&g0 + &g(len)).scale_re(len / 2.0);
    let mut simpson_prev: Option<ComplexMatrix> = None;
    let mut n = 1usize;
    for _ in 0..MAX_HALVINGS {
        let h = len / n as f64;
        let mut mid = ComplexMatrix::zeros(g0.rows(), g0.cols());
        for k in 0..n {
            mid += &g((k as f64 + 0.5) * h);
        }
        let trap_next = (&trap + &mid.scale_re(h)).scale_re(0.5);
        let simpson = (&trap_next.scale_re(4.0) - &trap).scale_re(1.0 / 3.0);
        if let Some(prev) = &simpson_prev {
            let diff = simpson.dist(prev);
            if diff <= QUAD_TOL * simpson.norm_fro().max(1.0) {
                return Ok(&simpson + &(&simpson - prev).scale_re(1.0 / 15.0));
            }
        }
        simpson_prev = Some(simpson);
        trap = trap_next;
        n *= 2;
    }
    Err(VesselError::Quadrature(format!("no convergence after {n} intervals")))
}

/// `B` at `(x + dx, t + dt)`: x-leg first, then t-leg.
///
/// Diagonal `A` decouples the rows and each row moves by the 2×2 propagator
/// `exp(dx·Mx(a))·exp(dt·Mt(a))`; otherwise both legs use adaptive RK4.
pub fn propagate_b(state: &VesselState, dx: f64, dt: f64, evo: &EvolutionSpec) -> Result<ComplexMatrix, VesselError> {
    evo.validate()?;
    let p = &state.params;
    let s1inv = p.sigma1_inv();
    let ms = evo.coefficients(p);
    if state.a.is_diagonal() {
        let mut b = state.b.clone();
        for (r, a) in state.a.diagonal().into_iter().enumerate() {
            let ex = mat2_exp(&row_gen_x(a, p, &s1inv), dx.into());
            let et = mat2_exp(&row_gen_t(a, &ms, &s1inv), dt.into());
            let row = &(&state.b.row(r) * &ex) * &et;
            b.set_row(r, &row);
        }
        b.check_finite()?;
        return Ok(b);
    }
    let a = &state.a;
    let bx = rk4_adaptive(vec![state.b.clone()], dx, |y| vec![flow_x(a, &y[0], p, &s1inv)])?;
    let bt = rk4_adaptive(bx, dt, |y| vec![flow_t(a, &y[0], &ms, &s1inv)])?;
    Ok(bt.into_iter().next().expect("one component"))
}

/// `X` at `(x + dx, t + dt)` from the state's `X`: first the t-leg at fixed `x`
/// (integrand `−Σ Yᵢ`), then the x-leg at the new `t` (integrand `Bσ₂B*`).
pub fn assemble_x(state: &VesselState, dx: f64, dt: f64, evo: &EvolutionSpec) -> Result<ComplexMatrix, VesselError> {
    let ms = evo.coefficients(&state.params);
    let t_leg = romberg(dt, |s| {
        let b = propagate_b(state, 0.0, s, evo).expect("validated evolution");
        x_rate_t(&state.a, &b, &ms)
    })?;
    let b_mid = propagate_b(state, 0.0, dt, evo)?;
    let mut mid = state.clone();
    mid.b = b_mid;
    let x_leg = romberg(dx, |y| {
        let b = propagate_b(&mid, y, 0.0, evo).expect("validated evolution");
        x_rate_x(&b, &state.params)
    })?;
    let x = &(&state.x + &t_leg) + &x_leg;
    x.check_finite()?;
    Ok(x)
}

/// One step of a general evolution in `t` at fixed `x`.
pub fn evolve_general_step(state: &VesselState, evo: &EvolutionSpec, dt: f64) -> Result<VesselState, VesselError> {
    evo.validate()?;
    let ms = evo.coefficients(&state.params);
    let (b, x) = if state.a.is_diagonal() {
        (propagate_b(state, 0.0, dt, evo)?, assemble_x(state, 0.0, dt, evo)?)
    } else {
        let a = &state.a;
        let s1inv = state.params.sigma1_inv();
        let y = rk4_adaptive(vec![state.b.clone(), state.x.clone()], dt, |y| {
            vec![flow_t(a, &y[0], &ms, &s1inv), x_rate_t(a, &y[0], &ms)]
        })
        .map_err(|e| match e {
            VesselError::StepFailure { t, reason } => VesselError::StepFailure { t: state.at_t + t, reason },
            other => other,
        })?;
        let mut it = y.into_iter();
        (it.next().expect("B"), it.next().expect("X"))
    };
    let mut out = state.clone();
    out.b = b;
    out.x = x;
    out.at_t += dt;
    out.soliton = None;
    out.x_solver()?;
    Ok(out)
}

/// Moves a state to `(x + dx, t + dt)` along the same path as [`assemble_x`].
pub fn transport(state: &VesselState, dx: f64, dt: f64, evo: &EvolutionSpec) -> Result<VesselState, VesselError> {
    let mut out = state.clone();
    out.b = propagate_b(state, dx, dt, evo)?;
    out.x = assemble_x(state, dx, dt, evo)?;
    out.at_x += dx;
    out.at_t += dt;
    out.soliton = None;
    Ok(out)
}
