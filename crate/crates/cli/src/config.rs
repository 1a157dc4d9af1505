//! The TOML run configuration.
//!
//! ```toml
//! mode = "general"                 # or "soliton"
//! [evolution]
//! kind = "hierarchy"               # or "type0" (m, m12) / "general" (coefficients)
//! n = 1
//! [[modes]]
//! k = 1.0
//! b_re = 1.4142135623730951
//! b_im = 0.0
//! [grid]
//! x0 = -5.0
//! x1 = 5.0
//! nx = 101
//! t0 = 0.0
//! t1 = 1.0
//! nt = 21
//! [outputs]
//! fields = ["q", "beta", "tau"]
//! path = "out.csv"
//! ```
//!
//! In general mode an `[initial]` table with complex matrices `A`, `B`, `X`
//! (rows of complex literals) replaces the soliton modes as the starting state.

use std::path::Path;

use serde::Deserialize;
use vesselkit::linalg::{ComplexMatrix, C64};
use vesselkit::verify::{GridSpec, VesselSource};
use vesselkit::vessel::{soliton_vessel, EvolutionSpec, SolitonSpec, VesselParams, VesselState};

use crate::complex::parse_complex;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub modes: Vec<ModeConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub outputs: Option<OutputsConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Soliton,
    General,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvolutionConfig {
    Hierarchy {
        n: usize,
    },
    Type0 {
        m: f64,
        #[serde(default)]
        m12: f64,
    },
    /// `m₀, m₁, …` as 2×2 matrices of complex literals.
    General {
        coefficients: Vec<Vec<Vec<String>>>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: f64,
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Q,
    Beta,
    Tau,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "all_fields")]
    pub fields: Vec<Field>,
    #[serde(default)]
    pub path: Option<String>,
}

fn all_fields() -> Vec<Field> {
    vec![Field::Q, Field::Beta, Field::Tau]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    #[serde(rename = "X")]
    pub x: Vec<Vec<String>>,
    /// Normalization of τ; defaults to `X`.
    #[serde(rename = "X0", default)]
    pub x0: Option<Vec<Vec<String>>>,
    /// The point `(x, t)` the matrices belong to.
    #[serde(default)]
    pub at: Option<[f64; 2]>,
}

fn matrix(name: &str, rows: &[Vec<String>]) -> Result<ComplexMatrix, String> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(format!("{name}: expected a non-empty rectangular matrix"));
    }
    let mut data = Vec::with_capacity(nr * nc);
    for r in rows {
        for e in r {
            data.push(parse_complex(e).map_err(|m| format!("{name}: {m}"))?);
        }
    }
    ComplexMatrix::from_row_slice(nr, nc, &data).map_err(|e| format!("{name}: {e}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.evolution_spec()?;
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn evolution_spec(&self) -> Result<EvolutionSpec, String> {
        let spec = match &self.evolution {
            EvolutionConfig::Hierarchy { n } => EvolutionSpec::Hierarchy(*n),
            EvolutionConfig::Type0 { m, m12 } => EvolutionSpec::Type0 { m: *m, m12: *m12 },
            EvolutionConfig::General { coefficients } => {
                let ms = coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix(&format!("evolution.coefficients[{i}]"), m))
                    .collect::<Result<Vec<_>, _>>()?;
                EvolutionSpec::General(ms)
            }
        };
        spec.validate().map_err(|e| format!("evolution: {e}"))?;
        Ok(spec)
    }

    pub fn grid(&self) -> Result<Option<GridSpec>, String> {
        self.grid
            .map(|g| GridSpec::new(g.x0, g.x1, g.nx, g.t0, g.t1, g.nt).map_err(|e| format!("grid: {e}")))
            .transpose()
    }

    pub fn soliton_spec(&self) -> Result<SolitonSpec, String> {
        let n = match self.evolution {
            EvolutionConfig::Hierarchy { n } => n,
            _ => return Err("evolution: soliton modes need kind = \"hierarchy\"".into()),
        };
        let modes = self.modes.iter().map(|m| (m.k, C64::new(m.b_re, m.b_im))).collect();
        SolitonSpec::new(n, modes).map_err(|e| format!("modes: {e}"))
    }

    /// The starting state of a general-mode run, with no closed form attached.
    pub fn initial_state(&self) -> Result<VesselState, String> {
        let mut st = match &self.initial {
            Some(init) => {
                if !self.modes.is_empty() {
                    return Err("give either [initial] or [[modes]], not both".into());
                }
                let a = matrix("initial.A", &init.a)?;
                let b = matrix("initial.B", &init.b)?;
                let x = matrix("initial.X", &init.x)?;
                let x0 = match &init.x0 {
                    Some(m) => matrix("initial.X0", m)?,
                    None => x.clone(),
                };
                let at = init.at.map_or((0.0, 0.0), |[x, t]| (x, t));
                VesselState::new(a, b, x, x0, VesselParams::default(), at).map_err(|e| format!("initial: {e}"))?
            }
            None => {
                let modes = self.modes.iter().map(|m| (m.k, C64::new(m.b_re, m.b_im))).collect();
                let spec = SolitonSpec::new(1, modes).map_err(|e| format!("modes: {e}"))?;
                soliton_vessel(&spec, 0.0, 0.0).map_err(|e| format!("modes: {e}"))?
            }
        };
        st.soliton = None;
        Ok(st)
    }

    pub fn source(&self) -> Result<VesselSource, String> {
        match self.mode {
            Mode::Soliton => {
                if self.initial.is_some() {
                    return Err("[initial] is only allowed in general mode".into());
                }
                Ok(VesselSource::Soliton(self.soliton_spec()?))
            }
            Mode::General => {
                Ok(VesselSource::Evolved { base: Box::new(self.initial_state()?), evo: self.evolution_spec()? })
            }
        }
    }

    pub fn fields(&self) -> Vec<Field> {
        self.outputs.as_ref().map_or_else(all_fields, |o| o.fields.clone())
    }

    pub fn out_path(&self) -> Option<&str> {
        self.outputs.as_ref().and_then(|o| o.path.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLITON: &str = r#"
mode = "soliton"
[evolution]
kind = "hierarchy"
n = 1
[[modes]]
k = 1.0
b_re = 1.4142135623730951
"#;

    #[test]
    fn parses_soliton_config() {
        let cfg = RunConfig::parse(SOLITON).unwrap();
        assert_eq!(cfg.mode, Mode::Soliton);
        assert!(matches!(cfg.source().unwrap(), VesselSource::Soliton(_)));
        assert_eq!(cfg.fields(), vec![Field::Q, Field::Beta, Field::Tau]);
        assert!(cfg.grid().unwrap().is_none());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(RunConfig::parse(&format!("{SOLITON}\nextra = 1\n")).is_err());
        let bad = SOLITON.replace("b_re", "b_real");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = SOLITON.replace("n = 1", "n = 1\nm = 2");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn general_coefficients_checked() {
        let ok = r#"
mode = "general"
[evolution]
kind = "general"
coefficients = [[["1", "0"], ["0", "0"]], [["0", "1"], ["-1", "0"]]]
[initial]
A = [["-i"]]
B = [["√2", "√2i"]]
X = [["2"]]
"#;
        let cfg = RunConfig::parse(ok).unwrap();
        assert!(matches!(cfg.source().unwrap(), VesselSource::Evolved { .. }));
        // m₁ must be anti-self-adjoint
        let bad = ok.replace(r#"[["0", "1"], ["-1", "0"]]"#, r#"[["0", "1"], ["1", "0"]]"#);
        assert!(RunConfig::parse(&bad).is_err());
    }
}
