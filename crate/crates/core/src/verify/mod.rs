//! Finite differences, residual reports and the verification suites.
//!
//! Every suite sweeps a [`GridSpec`], evaluates named residuals at each point
//! (in parallel, capped by `VESSELKIT_THREADS`) and folds them in grid order,
//! so reports are bit-identical across runs and thread counts.

mod fd;
mod grid;
mod report;
mod suites;

use rayon::prelude::*;
use thiserror::Error;

use crate::hierarchy::HierarchyError;
use crate::linalg::C64;
use crate::vessel::{soliton_vessel, transport, EvolutionSpec, SolitonSpec, VesselError, VesselState};

pub use fd::{fd_derivative, FdValue, Var};
pub use grid::GridSpec;
pub use report::{Check, Location, ResidualReport};
pub use suites::{
    default_lambdas, pin_phase, probe_truncation, random_lambdas, residual_backlund, residual_hierarchy_flow,
    residual_kdv, suite_evolution_identities, suite_vessel_invariants, PhasePin, Truncation, TruncationProbe,
    PIN_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("tau vanishes (X singular) at x = {x}, t = {t}")]
    TauZero { x: f64, t: f64 },
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("{what}: expected exactly one passing candidate, got [{}]", passing.join(", "))]
    Ambiguous { what: String, passing: Vec<String> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Vessel(#[from] VesselError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// Where the states of a sweep come from.
#[derive(Debug, Clone, PartialEq)]
pub enum VesselSource {
    Soliton(SolitonSpec),
    /// `B ≡ 0`; every field is trivial.
    Zero,
    /// A state moved to each grid point by `transport` under `evo`.
    Evolved { base: Box<VesselState>, evo: EvolutionSpec },
}

impl VesselSource {
    pub fn state_at(&self, x: f64, t: f64) -> Result<VesselState, VerifyError> {
        let r = match self {
            Self::Soliton(spec) => soliton_vessel(spec, x, t),
            Self::Zero => Ok(VesselState::zero((x, t))),
            Self::Evolved { base, evo } => transport(base, x - base.at_x, t - base.at_t, evo),
        };
        r.map_err(|e| match e {
            VesselError::SingularX { .. } => VerifyError::TauZero { x, t },
            other => VerifyError::Vessel(other),
        })
    }

    /// Evolution type `n` when the t-flow is a hierarchy flow.
    pub fn hierarchy_type(&self) -> Option<usize> {
        match self {
            Self::Soliton(spec) => Some(spec.n),
            Self::Zero => Some(1),
            Self::Evolved { evo: EvolutionSpec::Hierarchy(n), .. } => Some(*n),
            Self::Evolved { .. } => None,
        }
    }

    /// Largest exponential rates `(x, t)` of the fields, for step sizes.
    pub fn rates(&self) -> (f64, f64) {
        match self {
            Self::Soliton(spec) => spec.rates(),
            Self::Zero => (0.0, 0.0),
            Self::Evolved { base, evo } => {
                let amax = base.a.max_abs();
                let rx = 2.0 * amax.sqrt();
                let ms = evo.coefficients(&base.params);
                let rt = 2.0 * ms.iter().enumerate().map(|(i, m)| amax.powi(i as i32 + 1) * m.max_abs()).sum::<f64>();
                (rx, rt)
            }
        }
    }

    pub fn steps(&self) -> Steps {
        let (rx, rt) = self.rates();
        let shrink = |r: f64| if r > 2.0 { 2.0 / r } else { 1.0 };
        Steps { hx: 1e-2 * shrink(rx), hx3: 2e-2 * shrink(rx), ht: 1e-2 * shrink(rt) }
    }
}

/// Finite-difference steps: first/second x-derivatives, third x-derivatives, t-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub hx: f64,
    pub hx3: f64,
    pub ht: f64,
}

/// Runs `f` inside a pool sized by `VESSELKIT_THREADS` when that is set.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var("VESSELKIT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                f()
            }
        },
        _ => f(),
    }
}

/// Evaluates `f` at every point and folds the residual vectors into one
/// check per entry of `rows`, in grid order. The first failing point (in grid
/// order) aborts the sweep.
pub(crate) fn sweep<F>(points: &[(f64, f64)], rows: Vec<(String, f64)>, f: F) -> Result<ResidualReport, VerifyError>
where
    F: Fn(f64, f64) -> Result<Vec<f64>, VerifyError> + Sync,
{
    let results: Vec<Result<Vec<f64>, VerifyError>> =
        with_pool(|| points.par_iter().map(|&(x, t)| f(x, t)).collect());
    let mut checks: Vec<Check> = rows.into_iter().map(|(n, tol)| Check::new(n, tol)).collect();
    for (r, &(x, t)) in results.into_iter().zip(points) {
        let values = r?;
        debug_assert_eq!(values.len(), checks.len());
        for (c, v) in checks.iter_mut().zip(values) {
            c.observe(v, x, t);
        }
    }
    Ok(ResidualReport { checks })
}

pub(crate) fn cnorm(z: C64) -> f64 {
    z.norm()
}
