//! KdV hierarchy polynomials `b_m` and their companions `a_m`, `c_m`.
//!
//! Levels are generated from `b_0 = −¼β‴ + 3/2 (β')²` by the Lenard-type
//! recursion
//!
//! ```text
//! 4 b'_{m+1} = −i b‴_m + 8i β' b'_m + 4i β'' b_m
//! ```
//!
//! which is what the a/b/c system
//!
//! ```text
//! b'_m       = 2β b_m − 2i a_m
//! b_{m+1}    = −a'_m + i c_m + i(β' − β²) b_m
//! 2 a_{m+1}  = c'_m + 2i(β' − β²) a_m + 2β c_m
//! ```
//!
//! reduces to after eliminating `a` and `c`. The right-hand side is a total
//! derivative in the ring, and `b_{m+1}` is its antiderivative with zero
//! integration constant. The shorter form `4b'_{m+1} = −i b‴_m + 4i(β' b_m)'`
//! does not close the system; [`printed_relation_residual`] evaluates it so the
//! discrepancy stays visible.
//!
//! Flow convention: level `m` drives vessels of evolution type `m + 1`, with
//! `β'_t = ε_m b_m` and `ε_m = −i^m`.

use thiserror::Error;

use crate::diffring::{DiffPoly, DiffRingError, GaussianRational, RenderFormat};

/// Deepest level [`hierarchy_table`] will build.
pub const MAX_LEVEL: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("level {requested} exceeds the supported maximum {cap}")]
    LevelCap { requested: usize, cap: usize },
    #[error(transparent)]
    Ring(#[from] DiffRingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyEntry {
    pub level: usize,
    pub b: DiffPoly,
    pub a: DiffPoly,
    pub c: DiffPoly,
}

impl HierarchyEntry {
    /// `d_m`, fixed by the normalization `d_m = −a_m`.
    pub fn d(&self) -> DiffPoly {
        -&self.a
    }
}

fn q(n: i64, d: i64) -> GaussianRational {
    GaussianRational::real(n, d)
}

fn im(n: i64, d: i64) -> GaussianRational {
    GaussianRational::imag(n, d)
}

/// `i^k` as an exact Gaussian rational.
pub fn i_pow(k: usize) -> GaussianRational {
    match k % 4 {
        0 => q(1, 1),
        1 => im(1, 1),
        2 => q(-1, 1),
        _ => im(-1, 1),
    }
}

pub fn b0() -> DiffPoly {
    &DiffPoly::monomial(q(-1, 4), &[(3, 1)]) + &DiffPoly::monomial(q(3, 2), &[(1, 2)])
}

/// Right-hand side `−i b‴ + 8i β' b' + 4i β'' b` of the recursion, i.e. `4 b'_{m+1}`.
fn recursion_rhs(b: &DiffPoly) -> DiffPoly {
    let b1 = b.derive();
    let t1 = b.derive_n(3).scale(&im(-1, 1));
    let t2 = (&DiffPoly::beta(1) * &b1).scale(&im(8, 1));
    let t3 = (&DiffPoly::beta(2) * b).scale(&im(4, 1));
    &(&t1 + &t2) + &t3
}

/// `b_{m+1}` from `b_m`. Fails only if `b_m` is not in the image of the
/// recursion, where the right-hand side need not be a total derivative.
pub fn next_b(b: &DiffPoly) -> Result<DiffPoly, HierarchyError> {
    Ok(recursion_rhs(b).integrate()?.scale(&q(1, 4)))
}

/// `4(b_{m+1})' + i(b_m)‴ − 8iβ'(b_m)' − 4iβ''b_m`, exactly zero for consecutive levels.
pub fn defining_residual(b: &DiffPoly, b_next: &DiffPoly) -> DiffPoly {
    &b_next.derive().scale(&q(4, 1)) - &recursion_rhs(b)
}

/// `4(b_{m+1})' + i(b_m)‴ − 4i(β'b_m)'`, the short form of the recursion.
pub fn printed_relation_residual(b: &DiffPoly, b_next: &DiffPoly) -> DiffPoly {
    let lhs = b_next.derive().scale(&q(4, 1));
    let t1 = b.derive_n(3).scale(&im(1, 1));
    let t2 = (&DiffPoly::beta(1) * b).derive().scale(&im(-4, 1));
    &(&lhs + &t1) + &t2
}

/// `β' − β²`, the entry that keeps showing up in the system.
fn beta_gap() -> DiffPoly {
    &DiffPoly::beta(1) - &DiffPoly::monomial(q(1, 1), &[(0, 2)])
}

fn a_from_b(b: &DiffPoly) -> DiffPoly {
    let two_beta_b = (&DiffPoly::beta(0) * b).scale(&q(2, 1));
    // 1/(2i) = −i/2
    (&two_beta_b - &b.derive()).scale(&im(-1, 2))
}

/// `(a_m, c_m)` from `b_m` and `b_{m+1}`.
pub fn abc_from_b(b: &DiffPoly, b_next: &DiffPoly) -> (DiffPoly, DiffPoly) {
    let a = a_from_b(b);
    let gap_b = (&beta_gap() * b).scale(&im(-1, 1));
    let c = (&(b_next + &a.derive()) + &gap_b).scale(&im(-1, 1));
    (a, c)
}

/// `2a_{m+1} − c'_m − 2i(β'−β²)a_m − 2βc_m` for three consecutive `b`'s.
pub fn system_residual(b: &DiffPoly, b_next: &DiffPoly, b_next2: &DiffPoly) -> DiffPoly {
    let (a, c) = abc_from_b(b, b_next);
    let (a_next, _) = abc_from_b(b_next, b_next2);
    let two_a_next = a_next.scale(&q(2, 1));
    let gap_a = (&beta_gap() * &a).scale(&im(2, 1));
    let beta_c = (&DiffPoly::beta(0) * &c).scale(&q(2, 1));
    &(&(&two_a_next - &c.derive()) - &gap_a) - &beta_c
}

/// Closure of the a/b/c system at every level `0..=m` of the sequence `bs`
/// (which must hold `b_0 ..= b_{m+2}`).
pub fn check_system_identity(bs: &[DiffPoly], m: usize) -> bool {
    assert!(bs.len() >= m + 3, "need b_0 ..= b_{{m+2}}");
    (0..=m).all(|k| system_residual(&bs[k], &bs[k + 1], &bs[k + 2]).is_zero())
}

/// `b_0 ..= b_last` by the recursion, without the level cap.
pub fn b_sequence(last: usize) -> Result<Vec<DiffPoly>, HierarchyError> {
    let mut bs = vec![b0()];
    for m in 0..last {
        let next = next_b(&bs[m])?;
        bs.push(next);
    }
    Ok(bs)
}

pub fn hierarchy_table(max_level: usize) -> Result<Vec<HierarchyEntry>, HierarchyError> {
    if max_level > MAX_LEVEL {
        return Err(HierarchyError::LevelCap { requested: max_level, cap: MAX_LEVEL });
    }
    let bs = b_sequence(max_level + 1)?;
    Ok((0..=max_level)
        .map(|m| {
            let (a, c) = abc_from_b(&bs[m], &bs[m + 1]);
            HierarchyEntry { level: m, b: bs[m].clone(), a, c }
        })
        .collect())
}

/// Phase and type offset tying hierarchy levels to vessel evolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConvention {
    phases: Vec<GaussianRational>,
    pub type_offset: usize,
}

/// Phases the pinning experiment chooses from.
pub fn phase_candidates() -> [GaussianRational; 4] {
    [q(1, 1), q(-1, 1), im(1, 1), im(-1, 1)]
}

impl FlowConvention {
    /// The frozen convention: `ε_m = −i^m`, level `m` ↔ type `m + 1`.
    pub fn pinned() -> Self {
        Self {
            phases: (0..=MAX_LEVEL).map(|m| -i_pow(m)).collect(),
            type_offset: 1,
        }
    }

    /// A convention with explicit phases, used when probing candidates.
    pub fn with_phases(phases: Vec<GaussianRational>, type_offset: usize) -> Self {
        Self { phases, type_offset }
    }

    pub fn phase(&self, m: usize) -> Option<&GaussianRational> {
        self.phases.get(m)
    }

    pub fn vessel_type(&self, m: usize) -> usize {
        m + self.type_offset
    }

    /// Level driven by a vessel of type `n`, if any.
    pub fn level_for_type(&self, n: usize) -> Option<usize> {
        n.checked_sub(self.type_offset)
    }
}

impl Default for FlowConvention {
    fn default() -> Self {
        Self::pinned()
    }
}

/// `ε_m · b_m`, the right-hand side of `β'_t` at level `m`.
pub fn flow_rhs(m: usize, conv: &FlowConvention) -> Result<DiffPoly, HierarchyError> {
    if m > MAX_LEVEL {
        return Err(HierarchyError::LevelCap { requested: m, cap: MAX_LEVEL });
    }
    let phase = conv
        .phase(m)
        .ok_or(HierarchyError::LevelCap { requested: m, cap: conv.phases.len().saturating_sub(1) })?;
    let bs = b_sequence(m)?;
    Ok(bs[m].scale(phase))
}

/// Renders a table: bare `b` lines, or labelled `b/a/c/d` blocks with companions.
pub fn render_table(entries: &[HierarchyEntry], format: RenderFormat, companions: bool) -> String {
    match format {
        RenderFormat::Json => {
            let levels: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    let mut v = serde_json::json!({ "level": e.level, "b": e.b.to_json() });
                    if companions {
                        v["a"] = e.a.to_json();
                        v["c"] = e.c.to_json();
                        v["d"] = e.d().to_json();
                    }
                    v
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "levels": levels }))
                .expect("json values always serialize");
            s.push('\n');
            s
        }
        _ => {
            let mut out = String::new();
            for e in entries {
                if companions {
                    for (name, p) in [("b", &e.b), ("a", &e.a), ("c", &e.c), ("d", &e.d())] {
                        out.push_str(&format!("{name}_{} = {}\n", e.level, p.render(format)));
                    }
                } else {
                    out.push_str(&e.b.render(format));
                    out.push('\n');
                }
            }
            out
        }
    }
}
