use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use vesselkit::diffring::RenderFormat;
use vesselkit::hierarchy::{hierarchy_table, render_table, FlowConvention, HierarchyError};
use vesselkit::linalg::C64;
use vesselkit::verify::{
    default_lambdas, residual_hierarchy_flow, residual_kdv, suite_evolution_identities, suite_vessel_invariants,
    GridSpec, ResidualReport, VerifyError, VesselSource,
};
use vesselkit::vessel::{beta_jet, evolve_general_step, scalar_fields, transport, SolitonSpec, VesselError, VesselState};

use crate::complex::parse_complex_list;
use crate::config::{Field, RunConfig};

/// A failed run: process exit code plus message.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub msg: String,
}

impl Exit {
    pub const VERIFY: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const SINGULAR: u8 = 3;
    pub const GUARD: u8 = 4;

    pub fn validation(msg: impl Into<String>) -> Self {
        Self { code: Self::VALIDATION, msg: msg.into() }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Exit {
    Exit::validation(format!("cannot write {}: {e}", path.display()))
}

fn verify_exit(e: VerifyError) -> Exit {
    let code = match &e {
        VerifyError::TauZero { .. } => Exit::SINGULAR,
        VerifyError::Ambiguous { .. } => Exit::VERIFY,
        VerifyError::Vessel(VesselError::SingularX { .. }) => Exit::SINGULAR,
        VerifyError::Vessel(VesselError::Validation(_)) | VerifyError::Grid(_) | VerifyError::Unsupported(_) => {
            Exit::VALIDATION
        }
        VerifyError::Hierarchy(HierarchyError::LevelCap { .. }) => Exit::VALIDATION,
        _ => Exit::GUARD,
    };
    Exit { code, msg: e.to_string() }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Exit> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

pub fn parse_k_list(s: &str) -> Result<Vec<f64>, Exit> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Exit::validation(format!("--k: bad number {p:?}"))))
        .collect()
}

/// Soliton modes from `--k`/`--b`, each problem reported against its flag.
pub fn soliton_from_flags(k: &str, b: &str, n: usize) -> Result<SolitonSpec, Exit> {
    if n == 0 {
        return Err(Exit::validation("--n: evolution type must be at least 1"));
    }
    let ks = parse_k_list(k)?;
    let bs = parse_complex_list(b).map_err(|m| Exit::validation(format!("--b: {m}")))?;
    if ks.len() != bs.len() {
        return Err(Exit::validation(format!("--b: {} values given for {} wavenumbers in --k", bs.len(), ks.len())));
    }
    for (i, k) in ks.iter().enumerate() {
        if !(k.is_finite() && *k > 0.0) {
            return Err(Exit::validation(format!("--k: wavenumber {k} must be positive")));
        }
        if ks[..i].iter().any(|o| (o - k).abs() <= 1e-9 * k.abs().max(1.0)) {
            return Err(Exit::validation(format!("--k: duplicate wavenumber {k}")));
        }
    }
    if let Some(b) = bs.iter().find(|b| b.norm() == 0.0) {
        return Err(Exit::validation(format!("--b: amplitude {b} must be non-zero")));
    }
    SolitonSpec::new(n, ks.into_iter().zip(bs).collect()).map_err(|e| Exit::validation(format!("--k/--b: {e}")))
}

fn csv_header(fields: &[Field]) -> String {
    let mut h = String::from("x,t");
    for f in fields {
        h.push_str(match f {
            Field::Q => ",re_q,im_q",
            Field::Beta => ",re_beta,im_beta",
            Field::Tau => ",re_tau,im_tau",
        });
    }
    h.push('\n');
    h
}

fn csv_row(out: &mut String, x: f64, t: f64, state: &VesselState, fields: &[Field]) -> Result<(), VesselError> {
    let f = scalar_fields(state)?;
    write!(out, "{x:.16e},{t:.16e}").expect("string write");
    for field in fields {
        let v: C64 = match field {
            Field::Q => 2.0 * beta_jet(state, 1)?.d(1),
            Field::Beta => f.beta,
            Field::Tau => f.tau,
        };
        // + 0.0 folds −0 into 0
        write!(out, ",{:.16e},{:.16e}", v.re + 0.0, v.im + 0.0).expect("string write");
    }
    out.push('\n');
    Ok(())
}

pub fn cmd_soliton(spec: &SolitonSpec, grid: &GridSpec, out: Option<&Path>) -> Result<(), Exit> {
    let src = VesselSource::Soliton(spec.clone());
    let fields = [Field::Q, Field::Beta, Field::Tau];
    let mut text = csv_header(&fields);
    for (x, t) in grid.points() {
        let st = src.state_at(x, t).map_err(verify_exit)?;
        csv_row(&mut text, x, t, &st, &fields).map_err(|e| match e {
            VesselError::SingularX { .. } => Exit { code: Exit::SINGULAR, msg: format!("tau vanishes at x = {x}, t = {t}") },
            other => Exit { code: Exit::GUARD, msg: other.to_string() },
        })?;
    }
    emit(out, &text)
}

pub fn cmd_hierarchy(levels: usize, format: RenderFormat, companions: bool, out: Option<&Path>) -> Result<(), Exit> {
    let table = hierarchy_table(levels).map_err(|e| Exit::validation(format!("--levels: {e}")))?;
    emit(out, &render_table(&table, format, companions))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Vessel,
    Evolution,
    Kdv,
    Hierarchy,
    All,
}

fn hierarchy_level(src: &VesselSource) -> Result<usize, VerifyError> {
    let n = src
        .hierarchy_type()
        .ok_or_else(|| VerifyError::Unsupported("the hierarchy suite needs a hierarchy evolution".into()))?;
    FlowConvention::pinned()
        .level_for_type(n)
        .ok_or_else(|| VerifyError::Unsupported(format!("no hierarchy level for type {n}")))
}

pub fn run_suite(src: &VesselSource, grid: &GridSpec, suite: Suite) -> Result<ResidualReport, VerifyError> {
    let kdv_ok = src.hierarchy_type() == Some(1);
    match suite {
        Suite::Vessel => suite_vessel_invariants(src, grid),
        Suite::Kdv if kdv_ok => residual_kdv(src, grid),
        Suite::Kdv => Err(VerifyError::Unsupported("the KdV suite needs a type-1 evolution".into())),
        Suite::Hierarchy => residual_hierarchy_flow(src, hierarchy_level(src)?, &FlowConvention::pinned(), grid),
        Suite::Evolution => suite_evolution_identities(src, grid, &default_lambdas()),
        Suite::All => {
            let mut r = suite_vessel_invariants(src, grid)?;
            if kdv_ok {
                r.extend(residual_kdv(src, grid)?);
            }
            if src.hierarchy_type().is_some() {
                r.extend(run_suite(src, grid, Suite::Hierarchy)?);
                r.extend(run_suite(src, grid, Suite::Evolution)?);
            }
            Ok(r)
        }
    }
}

pub fn cmd_verify(
    src: &VesselSource,
    grid: &GridSpec,
    suite: Suite,
    tol: Option<f64>,
    json: bool,
) -> Result<(), Exit> {
    let mut report = run_suite(src, grid, suite).map_err(verify_exit)?;
    if let Some(tol) = tol {
        for c in &mut report.checks {
            c.tolerance = tol;
            c.pass = c.max_residual <= tol;
        }
    }
    let text = if json {
        let mut s = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
        s.push('\n');
        s
    } else {
        report.to_text()
    };
    emit(None, &text)?;
    if report.all_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(Exit { code: Exit::VERIFY, msg: format!("failing rows: {}", failed.join(", ")) })
    }
}

/// Steps the configured state through the output times (t-leg at the base
/// x), then moves each time slice along x. Rows up to the last good time are
/// written even when a guard trips.
pub fn cmd_evolve(cfg: &RunConfig, out_flag: Option<PathBuf>) -> Result<(), Exit> {
    let evo = cfg.evolution_spec().map_err(Exit::validation)?;
    let base = cfg.initial_state().map_err(Exit::validation)?;
    let grid = cfg.grid().map_err(Exit::validation)?.unwrap_or_default();
    let fields = cfg.fields();
    let out = out_flag.or_else(|| cfg.out_path().map(PathBuf::from));

    let mut text = csv_header(&fields);
    let mut state = base;
    let mut last_good: Option<f64> = None;
    let mut failure = None;
    'times: for t in grid.ts() {
        let dt = t - state.at_t;
        let stepped = if dt == 0.0 { Ok(state.clone()) } else { evolve_general_step(&state, &evo, dt) };
        state = match stepped {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let (res, scale) = state.lyapunov_residual();
        log::info!("t = {t:.6}: lyapunov residual {:.3e}", res / scale.max(1.0));
        let mut slice = String::new();
        for x in grid.xs() {
            let row = transport(&state, x - state.at_x, 0.0, &evo).and_then(|s| csv_row(&mut slice, x, t, &s, &fields));
            if let Err(e) = row {
                failure = Some(e);
                break 'times;
            }
        }
        text.push_str(&slice);
        last_good = Some(t);
    }
    emit(out.as_deref(), &text)?;
    match failure {
        None => Ok(()),
        Some(VesselError::Validation(m)) => Err(Exit::validation(m)),
        Some(e) => {
            let last = last_good.map_or("none".to_string(), |t| format!("{t}"));
            Err(Exit { code: Exit::GUARD, msg: format!("{e}; last good t = {last}") })
        }
    }
}
