use crate::linalg::{ComplexMatrix, C64};

/// Values that finite differences can combine linearly.
pub trait FdValue: Sized {
    /// `Σ wᵢ vᵢ` over `(wᵢ, vᵢ)`; the slice is never empty.
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl FdValue for C64 {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        terms.iter().fold(C64::new(0.0, 0.0), |acc, (w, v)| acc + **v * *w)
    }
}

impl FdValue for ComplexMatrix {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let (r, c) = terms[0].1.shape();
        let mut acc = ComplexMatrix::zeros(r, c);
        for (w, v) in terms {
            acc += &v.scale_re(*w);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    T,
}

/// 4th-order central stencils: offsets (in units of h) and integer weights,
/// plus the denominator. Odd stencils list `±k` pairs adjacently so a constant
/// differentiates to exactly zero.
fn stencil(order: usize) -> (&'static [(f64, f64)], f64) {
    match order {
        1 => (&[(-1.0, -8.0), (1.0, 8.0), (-2.0, 1.0), (2.0, -1.0)], 12.0),
        2 => (&[(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)], 12.0),
        3 => (&[(-1.0, 13.0), (1.0, -13.0), (-2.0, -8.0), (2.0, 8.0), (-3.0, 1.0), (3.0, -1.0)], 8.0),
        _ => panic!("finite differences support orders 1..=3, got {order}"),
    }
}

fn central<V: FdValue, E>(
    sampler: &impl Fn(f64, f64) -> Result<V, E>,
    point: (f64, f64),
    var: Var,
    order: usize,
    h: f64,
) -> Result<V, E> {
    let (weights, denom) = stencil(order);
    let mut samples = Vec::with_capacity(weights.len());
    for &(off, _) in weights {
        let (x, t) = match var {
            Var::X => (point.0 + off * h, point.1),
            Var::T => (point.0, point.1 + off * h),
        };
        samples.push(sampler(x, t)?);
    }
    let terms: Vec<(f64, &V)> = weights.iter().zip(&samples).map(|(&(_, w), v)| (w, v)).collect();
    let sum = V::combine(&terms);
    Ok(V::combine(&[(1.0 / (denom * h.powi(order as i32)), &sum)]))
}

/// `∂^order f / ∂var^order` at `point`: 4th-order central differences at `h`
/// and `h/2`, combined by one Richardson step.
pub fn fd_derivative<V: FdValue, E>(
    sampler: impl Fn(f64, f64) -> Result<V, E>,
    point: (f64, f64),
    var: Var,
    order: usize,
    h: f64,
) -> Result<V, E> {
    assert!(h > 0.0, "step must be positive");
    let coarse = central(&sampler, point, var, order, h)?;
    let fine = central(&sampler, point, var, order, h / 2.0)?;
    Ok(V::combine(&[(16.0 / 15.0, &fine), (-1.0 / 15.0, &coarse)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn scalar(f: impl Fn(f64) -> f64) -> impl Fn(f64, f64) -> Result<C64, Infallible> {
        move |x, _| Ok(C64::new(f(x), 0.0))
    }

    #[test]
    fn polynomial_and_constant() {
        let d = fd_derivative(scalar(|x| x * x), (1.0, 0.0), Var::X, 1, 1e-2).unwrap();
        assert!((d.re - 2.0).abs() < 1e-10);
        for order in [1, 3] {
            let d = fd_derivative(scalar(|_| 0.3), (0.2, 0.0), Var::X, order, 1e-2).unwrap();
            assert_eq!(d.norm(), 0.0);
        }
    }

    #[test]
    fn third_derivative_of_exponential() {
        let d = fd_derivative(scalar(|x| (2.0 * x).exp()), (0.0, 0.0), Var::X, 3, 1e-2).unwrap();
        assert!((d.re - 8.0).abs() < 1e-7);
    }

    #[test]
    fn t_direction_and_matrices() {
        let f = |x: f64, t: f64| -> Result<ComplexMatrix, Infallible> {
            Ok(ComplexMatrix::real2(t.sin(), x * t, t * t * t, 1.0))
        };
        let d = fd_derivative(f, (2.0, 0.5), Var::T, 2, 1e-2).unwrap();
        let expect = ComplexMatrix::real2(-(0.5f64).sin(), 0.0, 3.0, 0.0);
        assert!(d.dist(&expect) < 1e-10);
    }

    #[test]
    fn convergence_order() {
        // without the Richardson step the stencil error falls by 2^4 per halving;
        // with it the combination is well beyond that
        let f = scalar(|x| x.sin());
        let exact = 1.0f64.cos();
        let e1 = (fd_derivative(&f, (1.0, 0.0), Var::X, 1, 0.2).unwrap().re - exact).abs();
        let e2 = (fd_derivative(&f, (1.0, 0.0), Var::X, 1, 0.1).unwrap().re - exact).abs();
        assert!(e1 / e2 >= 16.0, "ratio {}", e1 / e2);
        let c1 = (central(&f, (1.0, 0.0), Var::X, 2, 0.2).unwrap().re + 1.0f64.sin()).abs();
        let c2 = (central(&f, (1.0, 0.0), Var::X, 2, 0.1).unwrap().re + 1.0f64.sin()).abs();
        assert!(c1 / c2 >= 15.0, "ratio {}", c1 / c2);
    }

    #[test]
    fn errors_propagate() {
        let f = |x: f64, _t: f64| if x > 1.0 { Err("pole") } else { Ok(C64::new(x, 0.0)) };
        assert_eq!(fd_derivative(f, (0.99, 0.0), Var::X, 1, 0.1), Err("pole"));
    }
}
