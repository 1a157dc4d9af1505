use std::fmt;
use std::str::FromStr;

use super::VerifyError;

/// Rectangular grid `[x0, x1] × [t0, t1]` with `nx × nt` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x0: -5.0, x1: 5.0, nx: 101, t0: 0.0, t1: 1.0, nt: 21 }
    }
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, nx: usize, t0: f64, t1: f64, nt: usize) -> Result<Self, VerifyError> {
        let g = Self { x0, x1, nx, t0, t1, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.nx < 2 || self.nt < 2 {
            return Err(VerifyError::Grid("nx and nt must be at least 2".into()));
        }
        if ![self.x0, self.x1, self.t0, self.t1].iter().all(|v| v.is_finite()) {
            return Err(VerifyError::Grid("grid bounds must be finite".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x0, self.x1, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(self.t0, self.t1, self.nt)
    }

    /// All points, t-major then x.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let xs = self.xs();
        self.ts().into_iter().flat_map(|t| xs.iter().map(move |&x| (x, t))).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

impl FromStr for GridSpec {
    type Err = VerifyError;

    /// `x0:x1:nx,t0:t1:nt`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || VerifyError::Grid(format!("expected x0:x1:nx,t0:t1:nt, got {s:?}"));
        let (xp, tp) = s.split_once(',').ok_or_else(bad)?;
        let axis = |p: &str| -> Result<(f64, f64, usize), VerifyError> {
            let parts: Vec<&str> = p.trim().split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let a = parts[0].trim().parse().map_err(|_| bad())?;
            let b = parts[1].trim().parse().map_err(|_| bad())?;
            let n = parts[2].trim().parse().map_err(|_| bad())?;
            Ok((a, b, n))
        };
        let (x0, x1, nx) = axis(xp)?;
        let (t0, t1, nt) = axis(tp)?;
        Self::new(x0, x1, nx, t0, t1, nt)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{},{}:{}:{}", self.x0, self.x1, self.nx, self.t0, self.t1, self.nt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_points() {
        let g: GridSpec = "-5:5:101,0:1:21".parse().unwrap();
        assert_eq!(g, GridSpec::default());
        let p = g.points();
        assert_eq!(p.len(), 2121);
        assert_eq!(p[0], (-5.0, 0.0));
        assert_eq!(p[100], (5.0, 0.0));
        assert_eq!(p[101], (-5.0, 0.05));
        assert_eq!(p[2120], (5.0, 1.0));
        assert!((p[50].0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!("0:1:1,0:1:3".parse::<GridSpec>().is_err());
        assert!("0:1,0:1:3".parse::<GridSpec>().is_err());
        assert!("a:1:3,0:1:3".parse::<GridSpec>().is_err());
        assert!("0:1:3;0:1:3".parse::<GridSpec>().is_err());
        assert_eq!(GridSpec::default().to_string().parse::<GridSpec>().unwrap(), GridSpec::default());
    }
}
