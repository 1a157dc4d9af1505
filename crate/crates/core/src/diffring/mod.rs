//! Exact differential polynomials in β and its x-derivatives.
//!
//! A [`DiffPoly`] is a finite sum of monomials `c · Π_j (β^(j))^{e_j}` with
//! Gaussian-rational coefficients. The map from factor signature to
//! coefficient is kept in a `BTreeMap` keyed by [`Factors`], whose ordering is
//! the canonical monomial order: total degree first, then lexicographic on the
//! ascending `(order, exponent)` pairs. Zero coefficients are never stored, so
//! canonical form is structural and `==` is polynomial equality.

mod gaussian;
mod render;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub use gaussian::GaussianRational;
pub use render::RenderFormat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffRingError {
    #[error("jet has no value for derivative order {0}")]
    MissingOrder(u32),
    #[error("polynomial is not a total x-derivative (remainder {0})")]
    NotExact(String),
    #[error("malformed polynomial document: {0}")]
    Json(String),
}

/// Factor signature of a monomial: ascending `(derivative order, exponent)`
/// pairs with every exponent ≥ 1. The empty signature is the constant monomial.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Factors(Vec<(u32, u32)>);

impl Factors {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    /// From arbitrary `(order, exponent)` pairs; merges repeats, drops zero exponents.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &(j, e) in pairs {
            *map.entry(j).or_default() += e;
        }
        Self(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, order: u32) -> u32 {
        self.0
            .iter()
            .find(|&&(j, _)| j == order)
            .map_or(0, |&(_, e)| e)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.0.last().map(|&(j, _)| j)
    }

    fn with_exponent(&self, order: u32, exp: u32) -> Self {
        let mut v: Vec<(u32, u32)> = self.0.iter().copied().filter(|&(j, _)| j != order).collect();
        if exp > 0 {
            v.push((order, exp));
            v.sort_unstable();
        }
        Self(v)
    }

    fn product(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self::from_pairs(&v)
    }
}

impl Ord for Factors {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Factors {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One term `coeff · Π (β^(j))^{e_j}`.
#[derive(Clone, PartialEq, Debug)]
pub struct DiffMonomial {
    pub coeff: GaussianRational,
    pub factors: Factors,
}

/// Numeric values of β^(j) at one point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BetaJet {
    values: BTreeMap<u32, Complex64>,
}

impl BetaJet {
    /// Jet with `values[j]` = β^(j) for `j = 0..values.len()`.
    pub fn from_values(values: &[Complex64]) -> Self {
        Self {
            values: values.iter().enumerate().map(|(j, v)| (j as u32, *v)).collect(),
        }
    }

    pub fn with(mut self, order: u32, value: Complex64) -> Self {
        self.values.insert(order, value);
        self
    }

    pub fn get(&self, order: u32) -> Option<Complex64> {
        self.values.get(&order).copied()
    }

    /// β^(j); panics if the order is absent.
    pub fn d(&self, order: u32) -> Complex64 {
        self.values[&order]
    }

    pub fn max_order(&self) -> Option<u32> {
        self.values.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.values.iter().map(|(j, v)| (*j, *v))
    }
}

/// Element of the differential ring generated by β.
#[derive(Clone, PartialEq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Factors, GaussianRational>,
}

impl std::fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render(RenderFormat::Text))
    }
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, &[])
    }

    /// The generator β^(order).
    pub fn beta(order: u32) -> Self {
        Self::monomial(GaussianRational::one(), &[(order, 1)])
    }

    pub fn monomial(coeff: GaussianRational, pairs: &[(u32, u32)]) -> Self {
        let mut p = Self::zero();
        p.add_term(Factors::from_pairs(pairs), coeff);
        p
    }

    /// Builds a canonical polynomial from terms in any order; like terms merge.
    pub fn from_terms(terms: impl IntoIterator<Item = DiffMonomial>) -> Self {
        let mut p = Self::zero();
        for t in terms {
            p.add_term(t.factors, t.coeff);
        }
        p
    }

    fn add_term(&mut self, factors: Factors, coeff: GaussianRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&factors) {
            Some(c) => {
                *c = &*c + &coeff;
                if c.is_zero() {
                    self.terms.remove(&factors);
                }
            }
            None => {
                self.terms.insert(factors, coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Factors, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<DiffMonomial> {
        self.terms
            .iter()
            .map(|(f, c)| DiffMonomial {
                coeff: c.clone(),
                factors: f.clone(),
            })
            .collect()
    }

    /// Coefficient of the given factor signature (zero if absent).
    pub fn coeff(&self, pairs: &[(u32, u32)]) -> GaussianRational {
        self.terms
            .get(&Factors::from_pairs(pairs))
            .cloned()
            .unwrap_or_default()
    }

    /// Highest derivative order appearing; `None` for constants and zero.
    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(Factors::max_order).max()
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(f, k)| (f.clone(), k * c)).collect(),
        }
    }

    /// d/dx: Leibniz rule per monomial, β^(j) ↦ β^(j+1).
    pub fn derive(&self) -> Self {
        let mut out = Self::zero();
        for (f, c) in &self.terms {
            for &(j, e) in f.pairs() {
                let lowered = f.with_exponent(j, e - 1);
                let raised = lowered.product(&Factors(vec![(j + 1, 1)]));
                out.add_term(raised, c.scale_int(e as i64));
            }
        }
        out
    }

    pub fn derive_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derive())
    }

    /// ∂/∂β^(order), treating the derivatives as independent variables.
    pub fn partial(&self, order: u32) -> Self {
        let mut out = Self::zero();
        for (f, c) in &self.terms {
            let e = f.exponent(order);
            if e > 0 {
                out.add_term(f.with_exponent(order, e - 1), c.scale_int(e as i64));
            }
        }
        out
    }

    /// Antiderivative in the variable β^(order): `∫ p dβ^(order)` with zero constant.
    fn integrate_in(&self, order: u32) -> Self {
        let mut out = Self::zero();
        for (f, c) in &self.terms {
            let e = f.exponent(order);
            out.add_term(f.with_exponent(order, e + 1), c.div_int(e as i64 + 1));
        }
        out
    }

    /// The unique `F` in the ring with `F' = self` and no constant term.
    ///
    /// Peels the highest derivative order: an exact `P` of top order `N` is
    /// linear in β^(N) with coefficient `∂F/∂β^(N−1)`, so `F` picks up
    /// `∫ coeff dβ^(N−1)` and the remainder drops below order `N`.
    pub fn integrate(&self) -> Result<Self, DiffRingError> {
        let mut rem = self.clone();
        let mut anti = Self::zero();
        while !rem.is_zero() {
            let top = match rem.max_order() {
                Some(n) if n > 0 => n,
                _ => return Err(DiffRingError::NotExact(rem.render(RenderFormat::Text))),
            };
            let mut lead = Self::zero();
            for (f, c) in &rem.terms {
                match f.exponent(top) {
                    0 => {}
                    1 => lead.add_term(f.with_exponent(top, 0), c.clone()),
                    _ => return Err(DiffRingError::NotExact(rem.render(RenderFormat::Text))),
                }
            }
            let piece = lead.integrate_in(top - 1);
            rem = &rem - &piece.derive();
            anti = &anti + &piece;
        }
        Ok(anti)
    }

    /// Floating-point evaluation on a jet.
    pub fn eval(&self, jet: &BetaJet) -> Result<Complex64, DiffRingError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (f, c) in &self.terms {
            let mut term = c.to_c64();
            for &(j, e) in f.pairs() {
                let v = jet.get(j).ok_or(DiffRingError::MissingOrder(j))?;
                term *= v.powu(e);
            }
            acc += term;
        }
        Ok(acc)
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &'a DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (f, c) in &rhs.terms {
            out.add_term(f.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &'a DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (f, c) in &rhs.terms {
            out.add_term(f.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &'a DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (f, c) in &self.terms {
            for (g, d) in &rhs.terms {
                out.add_term(f.product(g), c * d);
            }
        }
        out
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &'a GaussianRational) -> DiffPoly {
        self.scale(rhs)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&GaussianRational::real(-1, 1))
    }
}

/// Right operand of [`dp_arith`].
#[derive(Debug, Clone, Copy)]
pub enum Arith<'a> {
    Add(&'a DiffPoly),
    Mul(&'a DiffPoly),
    Scale(&'a GaussianRational),
}

/// Ring operations on canonical polynomials; the result is canonical.
pub fn dp_arith(lhs: &DiffPoly, op: Arith<'_>) -> DiffPoly {
    match op {
        Arith::Add(rhs) => lhs + rhs,
        Arith::Mul(rhs) => lhs * rhs,
        Arith::Scale(c) => lhs.scale(c),
    }
}
