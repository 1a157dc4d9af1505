use super::{ComplexMatrix, C64};

/// `exp(x·M)` for a 2×2 matrix via Cayley–Hamilton.
///
/// With `N = x·M`, `h = tr(N)/2` and the traceless part `N₀ = N − h·I`, one has
/// `N₀² = μ²·I` where `μ² = −det(N₀)`, hence
/// `exp(N) = e^h (cosh μ · I + (sinh μ / μ) · N₀)`.
/// Both `cosh μ` and `sinh μ / μ` are entire in `μ²`, so small `μ²` goes
/// through the power series and no square root is taken there.
pub fn mat2_exp(m: &ComplexMatrix, x: C64) -> ComplexMatrix {
    assert_eq!(m.shape(), (2, 2), "mat2_exp needs a 2x2 matrix");
    let n = m.scale(x);
    let h = (n.get(0, 0) + n.get(1, 1)) * 0.5;
    let a = n.get(0, 0) - h;
    let b = n.get(0, 1);
    let c = n.get(1, 0);
    let mu2 = a * a + b * c;
    let (ch, sh) = cosh_sinhc(mu2);
    let e = h.exp();
    ComplexMatrix::mat2(e * (ch + sh * a), e * sh * b, e * sh * c, e * (ch - sh * a))
}

/// `(cosh μ, sinh μ / μ)` as functions of `μ²`.
fn cosh_sinhc(mu2: C64) -> (C64, C64) {
    if mu2.norm() < 1.0 {
        let mut ch = C64::new(0.0, 0.0);
        let mut sh = C64::new(0.0, 0.0);
        // term_k = μ^{2k}/(2k)!, sterm_k = μ^{2k}/(2k+1)!
        let mut term = C64::new(1.0, 0.0);
        for k in 0..20 {
            ch += term;
            sh += term / (2.0 * k as f64 + 1.0);
            term = term * mu2 / ((2.0 * k as f64 + 1.0) * (2.0 * k as f64 + 2.0));
        }
        (ch, sh)
    } else {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn reference(m: &ComplexMatrix, x: C64) -> ComplexMatrix {
        ComplexMatrix::from_dmatrix(m.scale(x).as_dmatrix().exp())
    }

    fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.dist(b) / b.norm_fro().max(1.0)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = mat2_exp(&ComplexMatrix::zeros(2, 2), C64::new(3.0, 0.0));
        assert!(e.dist(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn nilpotent_is_linear() {
        let n = ComplexMatrix::mat2(0.0.into(), I, 0.0.into(), 0.0.into());
        for x in [0.5, -2.0, 7.0] {
            let e = mat2_exp(&n, x.into());
            let expect = &ComplexMatrix::identity(2) + &n.scale_re(x);
            assert!(e.dist(&expect) < 1e-14);
        }
    }

    #[test]
    fn input_matrix_at_unit_lambda() {
        // σ₁⁻¹(σ₂ + γ) = [[0, i], [1, 0]]
        let m = ComplexMatrix::mat2(0.0.into(), I, 1.0.into(), 0.0.into());
        for x in [-3.0, -0.4, 0.1, 1.0, 2.5] {
            let e = mat2_exp(&m, x.into());
            assert!(rel_err(&e, &reference(&m, x.into())) < 1e-12, "x = {x}");
            // closed form: cosh/sinh of √i·x
            let mu = I.sqrt() * x;
            let expect = ComplexMatrix::mat2(mu.cosh(), I * mu.sinh() / I.sqrt(), mu.sinh() / I.sqrt(), mu.cosh());
            assert!(rel_err(&e, &expect) < 1e-12);
        }
    }

    #[test]
    fn near_degenerate_branch_matches_reference() {
        let m = ComplexMatrix::mat2(C64::new(0.3, 0.1), C64::new(1e-4, 0.0), C64::new(-2e-4, 1e-4), C64::new(0.3, 0.1));
        let e = mat2_exp(&m, C64::new(1.7, 0.0));
        assert!(rel_err(&e, &reference(&m, C64::new(1.7, 0.0))) < 1e-13);
    }

    #[test]
    fn random_matrices_match_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut z = || C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = ComplexMatrix::mat2(z(), z(), z(), z());
            let x = z();
            assert!(rel_err(&mat2_exp(&m, x), &reference(&m, x)) < 1e-12);
        }
    }
}
