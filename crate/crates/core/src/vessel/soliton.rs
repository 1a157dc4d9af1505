use crate::linalg::{ComplexMatrix, C64, I};

use super::{SolitonData, VesselError, VesselParams, VesselState, MAX_DIM};

/// Smallest allowed gap between two wave numbers.
pub const K_SEPARATION: f64 = 1e-9;

/// Explicit soliton data for an evolution of type `n`: modes `(k_j, b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpec {
    pub n: usize,
    pub modes: Vec<(f64, C64)>,
}

impl SolitonSpec {
    pub fn new(n: usize, modes: Vec<(f64, C64)>) -> Result<Self, VesselError> {
        let s = Self { n, modes };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), VesselError> {
        let bad = |m: String| Err(VesselError::Validation(m));
        if self.n == 0 {
            return bad("soliton type n must be at least 1".into());
        }
        if self.modes.is_empty() {
            return bad("at least one mode is required".into());
        }
        if self.modes.len() > MAX_DIM {
            return bad(format!("at most {MAX_DIM} modes are supported"));
        }
        for (j, &(k, b)) in self.modes.iter().enumerate() {
            if !(k.is_finite() && k > 0.0) {
                return bad(format!("k[{j}] = {k} must be positive and finite"));
            }
            if !(b.re.is_finite() && b.im.is_finite()) || b.norm() == 0.0 {
                return bad(format!("b[{j}] must be finite and nonzero"));
            }
        }
        for i in 0..self.modes.len() {
            for j in 0..i {
                if (self.modes[i].0 - self.modes[j].0).abs() <= K_SEPARATION {
                    return Err(VesselError::Conditioning(format!(
                        "k[{j}] and k[{i}] are closer than {K_SEPARATION:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ks(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.0).collect()
    }

    /// `k^{2n+1}`, the t-rate of mode `j`.
    pub fn t_rate(&self, j: usize) -> f64 {
        self.modes[j].0.powi(2 * self.n as i32 + 1)
    }

    /// Exponent `k_j x + k_j^{2n+1} t`.
    pub fn phase(&self, j: usize, x: f64, t: f64) -> f64 {
        self.modes[j].0 * x + self.t_rate(j) * t
    }

    /// Largest exponential rate in x and in t, for step-size choices.
    pub fn rates(&self) -> (f64, f64) {
        let kx = self.modes.iter().map(|m| 2.0 * m.0).fold(0.0, f64::max);
        let kt = (0..self.modes.len()).map(|j| 2.0 * self.t_rate(j)).fold(0.0, f64::max);
        (kx, kt)
    }

    pub fn a(&self) -> ComplexMatrix {
        ComplexMatrix::diag(&self.modes.iter().map(|&(k, _)| -I * k * k).collect::<Vec<_>>())
    }

    pub fn b_at(&self, x: f64, t: f64) -> ComplexMatrix {
        let n = self.modes.len();
        ComplexMatrix::from_fn(n, 2, |j, c| {
            let (k, b) = self.modes[j];
            let e = self.phase(j, x, t).exp() * b;
            if c == 0 {
                e
            } else {
                e * I * k
            }
        })
    }

    /// The Cauchy-like part `E_ij = e^{θ_i+θ_j} b_i b̄_j / (k_i + k_j)`.
    fn e_part(&self, x: f64, t: f64) -> ComplexMatrix {
        let n = self.modes.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let (ki, bi) = self.modes[i];
            let (kj, bj) = self.modes[j];
            (self.phase(i, x, t) + self.phase(j, x, t)).exp() * bi * bj.conj() / (ki + kj)
        })
    }

    pub fn x_at(&self, x: f64, t: f64) -> ComplexMatrix {
        &ComplexMatrix::identity(self.modes.len()) + &self.e_part(x, t)
    }

    /// x-Taylor coefficients `X_p = ∂_x^p X / p!` for `p = 0..=order`.
    /// Entry `(i, j)` of the exponential part scales by `(k_i + k_j)` per derivative.
    pub fn x_taylor(&self, x: f64, t: f64, order: usize) -> Vec<ComplexMatrix> {
        let e = self.e_part(x, t);
        let n = self.modes.len();
        let mut out = vec![&ComplexMatrix::identity(n) + &e];
        let mut fact = 1.0;
        for p in 1..=order {
            fact *= p as f64;
            out.push(ComplexMatrix::from_fn(n, n, |i, j| {
                e.get(i, j) * (self.modes[i].0 + self.modes[j].0).powi(p as i32) / fact
            }));
        }
        out
    }
}

pub fn soliton_vessel(spec: &SolitonSpec, x: f64, t: f64) -> Result<VesselState, VesselError> {
    spec.validate()?;
    let mut st = VesselState::new(
        spec.a(),
        spec.b_at(x, t),
        spec.x_at(x, t),
        spec.x_at(0.0, 0.0),
        VesselParams::default(),
        (x, t),
    )?;
    st.x_solver()?;
    st.soliton = Some(SolitonData { spec: spec.clone() });
    Ok(st)
}
