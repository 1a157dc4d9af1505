use serde::Serialize;

/// One named check: the worst residual seen and where.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub at: Option<Location>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Location {
    pub x: f64,
    pub t: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self { name: name.into(), max_residual: 0.0, tolerance, pass: true, at: None }
    }

    /// Folds one residual in. NaN counts as an infinite residual.
    pub fn observe(&mut self, residual: f64, x: f64, t: f64) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if self.at.is_none() || r > self.max_residual {
            self.max_residual = r;
            self.at = Some(Location { x, t });
        }
        self.pass = self.max_residual <= self.tolerance;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub checks: Vec<Check>,
}

impl ResidualReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>10}  {:>9}  {:<4}  at\n", "check", "residual", "tol", "");
        for c in &self.checks {
            let at = c.at.map(|l| format!("x={:.4} t={:.4}", l.x, l.t)).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<width$}  {:>10.3e}  {:>9.1e}  {:<4}  {}\n",
                c.name,
                c.max_residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" },
                at
            ));
        }
        out
    }
}
