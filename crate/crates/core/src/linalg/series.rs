use super::{ComplexMatrix, LinalgError, LuFactors, C64};

/// Truncated matrix power series `Σ_{j≤J} M_j h^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries {
    coeffs: Vec<ComplexMatrix>,
}

/// Truncated scalar power series, coefficient `j` multiplies `h^j`.
pub type ScalarSeries = Vec<C64>;

impl MatrixSeries {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self, LinalgError> {
        let first = coeffs
            .first()
            .ok_or_else(|| LinalgError::Dimension("empty series".into()))?;
        let shape = first.shape();
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != shape) {
            return Err(LinalgError::Dimension(format!(
                "series coefficient {:?} differs from {:?}",
                bad.shape(),
                shape
            )));
        }
        Ok(Self { coeffs })
    }

    /// Order J (number of coefficients minus one).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &ComplexMatrix {
        &self.coeffs[j]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    /// Truncated Cauchy product; the result has the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.shape().1 != other.shape().0 {
            return Err(LinalgError::Dimension("series product shapes".into()));
        }
        let order = self.order().min(other.order());
        let out = (0..=order)
            .map(|k| {
                let mut acc = ComplexMatrix::zeros(self.shape().0, other.shape().1);
                for j in 0..=k {
                    acc += &(&self.coeffs[j] * &other.coeffs[k - j]);
                }
                acc
            })
            .collect();
        Self::new(out)
    }

    /// Series inverse: `Y₀ = M₀⁻¹`, `Y_k = −M₀⁻¹ Σ_{j=1..k} M_j Y_{k−j}`.
    pub fn invert(&self) -> Result<Self, LinalgError> {
        if !self.coeffs[0].is_square() {
            return Err(LinalgError::Dimension("series inverse of a non-square series".into()));
        }
        let lu = LuFactors::new(&self.coeffs[0]).map_err(|_| LinalgError::SingularLeading)?;
        let n = self.shape().0;
        let mut out: Vec<ComplexMatrix> = Vec::with_capacity(self.coeffs.len());
        out.push(lu.inverse()?);
        for k in 1..=self.order() {
            let mut acc = ComplexMatrix::zeros(n, n);
            for j in 1..=k {
                acc += &(&self.coeffs[j] * &out[k - j]);
            }
            out.push(-lu.solve(&acc)?);
        }
        Self::new(out)
    }

    pub fn trace(&self) -> ScalarSeries {
        self.coeffs.iter().map(ComplexMatrix::trace).collect()
    }

    /// Term-wise derivative in `h`; drops one order.
    pub fn derivative(&self) -> Result<Self, LinalgError> {
        if self.order() == 0 {
            return Self::new(vec![ComplexMatrix::zeros(self.shape().0, self.shape().1)]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c.scale_re(j as f64))
                .collect(),
        )
    }

    /// Applies `M ↦ L·M·R` to every coefficient.
    pub fn sandwich(&self, left: &ComplexMatrix, right: &ComplexMatrix) -> Result<Self, LinalgError> {
        Self::new(self.coeffs.iter().map(|c| &(left * c) * right).collect())
    }
}
