//! Text, LaTeX and JSON forms of [`DiffPoly`].
//!
//! Text: terms in canonical order joined by `" + "`; `β^(j)` is `Bj`, powers
//! are `Bj^e`, factors are joined by `*`. A coefficient other than 1 is written
//! in parentheses in front: `(p/q)`, `(p/q*i)` or `(a+b*i)`. Zero is `"0"`.
//!
//! LaTeX: `\beta`, `\beta'`, `\beta''`, `\beta'''`, then `\beta^{(j)}`;
//! powers as `(\beta')^{2}`; rationals as `\frac{p}{q}`; a negative leading
//! sign is pulled into the joining operator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::{DiffMonomial, DiffPoly, DiffRingError, Factors, GaussianRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Json,
    Latex,
}

impl DiffPoly {
    pub fn render(&self, format: RenderFormat) -> String {
        match format {
            RenderFormat::Text => render_text(self),
            RenderFormat::Latex => render_latex(self),
            RenderFormat::Json => self.to_json().to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        let monomials: Vec<Value> = self
            .terms()
            .map(|(f, c)| {
                json!({
                    "coeff": { "re": ratio_json(c.re()), "im": ratio_json(c.im()) },
                    "factors": f.pairs().iter().map(|&(j, e)| json!({"order": j, "power": e})).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "monomials": monomials })
    }

    /// Parses the polynomial document. Input need not be in canonical order;
    /// the result is canonicalized.
    pub fn from_json(v: &Value) -> Result<Self, DiffRingError> {
        let bad = |m: &str| DiffRingError::Json(m.to_string());
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        if obj.keys().any(|k| k != "monomials") {
            return Err(bad("unknown key at top level"));
        }
        let monos = obj
            .get("monomials")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"monomials\" array"))?;
        let mut terms = Vec::with_capacity(monos.len());
        for m in monos {
            let coeff = m.get("coeff").ok_or_else(|| bad("monomial without coeff"))?;
            let re = parse_ratio(coeff.get("re").ok_or_else(|| bad("coeff without re"))?)?;
            let im = parse_ratio(coeff.get("im").ok_or_else(|| bad("coeff without im"))?)?;
            let mut pairs = Vec::new();
            for f in m
                .get("factors")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("monomial without factors"))?
            {
                let order = f.get("order").and_then(Value::as_u64).ok_or_else(|| bad("factor order"))?;
                let power = f.get("power").and_then(Value::as_u64).ok_or_else(|| bad("factor power"))?;
                if power == 0 {
                    return Err(bad("factor power must be positive"));
                }
                pairs.push((order as u32, power as u32));
            }
            terms.push(DiffMonomial {
                coeff: GaussianRational::new(re, im),
                factors: Factors::from_pairs(&pairs),
            });
        }
        Ok(DiffPoly::from_terms(terms))
    }

    pub fn from_json_str(s: &str) -> Result<Self, DiffRingError> {
        let v: Value = serde_json::from_str(s).map_err(|e| DiffRingError::Json(e.to_string()))?;
        Self::from_json(&v)
    }
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn ratio_json(r: &BigRational) -> Value {
    json!([int_json(r.numer()), int_json(r.denom())])
}

fn parse_int(v: &Value) -> Result<BigInt, DiffRingError> {
    if let Some(i) = v.as_i64() {
        return Ok(i.into());
    }
    if let Some(s) = v.as_str() {
        return s
            .parse()
            .map_err(|_| DiffRingError::Json(format!("bad integer string {s:?}")));
    }
    Err(DiffRingError::Json(format!("expected an integer, got {v}")))
}

fn parse_ratio(v: &Value) -> Result<BigRational, DiffRingError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| DiffRingError::Json("rational must be [num, den]".into()))?;
    let num = parse_int(&arr[0])?;
    let den = parse_int(&arr[1])?;
    if den.is_zero() {
        return Err(DiffRingError::Json("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

fn ratio_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn coeff_text(c: &GaussianRational) -> String {
    let (re, im) = (c.re(), c.im());
    if im.is_zero() {
        return ratio_text(re);
    }
    let imag = if im.is_one() {
        "i".to_string()
    } else if (-im).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", ratio_text(im))
    };
    if re.is_zero() {
        imag
    } else if im.is_negative() {
        format!("{}{}", ratio_text(re), imag)
    } else {
        format!("{}+{}", ratio_text(re), imag)
    }
}

fn render_text(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let terms: Vec<String> = p
        .terms()
        .map(|(f, c)| {
            let factors: Vec<String> = f
                .pairs()
                .iter()
                .map(|&(j, e)| if e == 1 { format!("B{j}") } else { format!("B{j}^{e}") })
                .collect();
            match (c.is_one(), factors.is_empty()) {
                (true, true) => "1".into(),
                (true, false) => factors.join("*"),
                (false, true) => format!("({})", coeff_text(c)),
                (false, false) => format!("({})*{}", coeff_text(c), factors.join("*")),
            }
        })
        .collect();
    terms.join(" + ")
}

fn ratio_latex(r: &BigRational) -> String {
    // magnitude only; sign handled by the caller
    let r = r.abs();
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

fn beta_latex(j: u32) -> String {
    match j {
        0 => "\\beta".into(),
        1..=3 => format!("\\beta{}", "'".repeat(j as usize)),
        _ => format!("\\beta^{{({j})}}"),
    }
}

fn factor_latex(j: u32, e: u32) -> String {
    match (j, e) {
        (_, 1) => beta_latex(j),
        (0, _) => format!("\\beta^{{{e}}}"),
        _ => format!("({})^{{{e}}}", beta_latex(j)),
    }
}

/// Coefficient magnitude in LaTeX (sign pulled out); empty for a unit coefficient
/// in front of factors.
fn coeff_latex(c: &GaussianRational, has_factors: bool) -> String {
    let (re, im) = (c.re(), c.im());
    if im.is_zero() {
        let m = ratio_latex(re);
        if m == "1" && has_factors {
            String::new()
        } else {
            m
        }
    } else if re.is_zero() {
        let m = ratio_latex(im);
        if m == "1" {
            "i".into()
        } else {
            format!("{m}i")
        }
    } else {
        let sign = if im.is_negative() { "-" } else { "+" };
        let re_s = if re.is_negative() {
            format!("-{}", ratio_latex(re))
        } else {
            ratio_latex(re)
        };
        // the whole complex coefficient is kept intact, flip back if we pulled a sign
        format!("\\left({re_s}{sign}{}i\\right)", ratio_latex(im))
    }
}

fn render_latex(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (f, c)) in p.terms().enumerate() {
        let general = !c.re().is_zero() && !c.im().is_zero();
        let negative = !general && c.leading_negative();
        let body = format!(
            "{}{}",
            coeff_latex(c, !f.pairs().is_empty()),
            f.pairs().iter().map(|&(j, e)| factor_latex(j, e)).collect::<String>()
        );
        match (idx, negative) {
            (0, true) => out.push_str(&format!("-{body}")),
            (0, false) => out.push_str(&body),
            (_, true) => out.push_str(&format!(" - {body}")),
            (_, false) => out.push_str(&format!(" + {body}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::real(n, d)
    }

    fn b0() -> DiffPoly {
        &DiffPoly::monomial(q(-1, 4), &[(3, 1)]) + &DiffPoly::monomial(q(3, 2), &[(1, 2)])
    }

    #[test]
    fn text_of_b0() {
        assert_eq!(b0().render(RenderFormat::Text), "(-1/4)*B3 + (3/2)*B1^2");
    }

    #[test]
    fn text_of_zero_and_constants() {
        assert_eq!(DiffPoly::zero().render(RenderFormat::Text), "0");
        assert_eq!(DiffPoly::constant(q(1, 1)).render(RenderFormat::Text), "1");
        assert_eq!(DiffPoly::constant(GaussianRational::imag(-2, 3)).render(RenderFormat::Text), "(-2/3*i)");
        let z = &q(1, 2) + &GaussianRational::imag(-3, 4);
        assert_eq!(DiffPoly::monomial(z, &[(0, 1)]).render(RenderFormat::Text), "(1/2-3/4*i)*B0");
    }

    #[test]
    fn latex_forms() {
        let p = DiffPoly::monomial(GaussianRational::i(), &[(1, 1)]);
        assert_eq!(p.render(RenderFormat::Latex), "i\\beta'");
        assert_eq!(b0().render(RenderFormat::Latex), "-\\frac{1}{4}\\beta''' + \\frac{3}{2}(\\beta')^{2}");
        let p = &DiffPoly::monomial(q(1, 1), &[(0, 2), (5, 1)]) + &DiffPoly::monomial(q(-1, 1), &[(1, 1), (3, 1)]);
        assert_eq!(p.render(RenderFormat::Latex), "-\\beta'\\beta''' + \\beta^{2}\\beta^{(5)}");
        assert_eq!(DiffPoly::zero().render(RenderFormat::Latex), "0");
    }

    #[test]
    fn json_schema_shape() {
        let v = b0().to_json();
        assert_eq!(
            v,
            json!({"monomials": [
                {"coeff": {"re": [-1, 4], "im": [0, 1]}, "factors": [{"order": 3, "power": 1}]},
                {"coeff": {"re": [3, 2], "im": [0, 1]}, "factors": [{"order": 1, "power": 2}]},
            ]})
        );
        assert_eq!(DiffPoly::from_json(&v).unwrap(), b0());
    }

    #[test]
    fn json_accepts_big_integers_as_strings() {
        let v = json!({"monomials": [{"coeff": {"re": ["123456789012345678901234567890", 7], "im": [0, 1]}, "factors": []}]});
        let p = DiffPoly::from_json(&v).unwrap();
        assert_eq!(DiffPoly::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn json_rejects_garbage() {
        assert!(DiffPoly::from_json_str("{\"monomials\": 3}").is_err());
        assert!(DiffPoly::from_json_str("{\"monomials\": [], \"extra\": 1}").is_err());
        assert!(DiffPoly::from_json_str(
            "{\"monomials\": [{\"coeff\": {\"re\": [1, 0], \"im\": [0, 1]}, \"factors\": []}]}"
        )
        .is_err());
    }
}
