//! Complex literals: `a+bi`, `-2.5i`, `i`, `√2`, `3√2-√2i`, `1e-3+4e2i`.

use vesselkit::linalg::C64;

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err("empty complex literal".into());
    }
    let bad = || format!("bad complex literal {s:?}");
    let mut value = C64::new(0.0, 0.0);
    for term in split_terms(&src) {
        let (sign, body) = match term.as_bytes()[0] {
            b'+' => (1.0, &term[1..]),
            b'-' => (-1.0, &term[1..]),
            _ => (1.0, &term[..]),
        };
        let (body, imag) = match body.strip_suffix('i').or_else(|| body.strip_suffix('j')) {
            Some(b) => (b, true),
            None => (body, false),
        };
        let mag = parse_magnitude(body, imag).ok_or_else(bad)?;
        if imag {
            value.im += sign * mag;
        } else {
            value.re += sign * mag;
        }
    }
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(format!("complex literal {s:?} is not finite"))
    }
}

/// Splits at `+`/`-` that start a new term (not the sign of an exponent).
fn split_terms(s: &str) -> Vec<String> {
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for c in s.chars() {
        let exp_sign = matches!(prev, Some('e' | 'E')) && cur.chars().any(|d| d.is_ascii_digit());
        if (c == '+' || c == '-') && !cur.is_empty() && !exp_sign {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(c);
        prev = Some(c);
    }
    terms.push(cur);
    terms
}

/// `x`, `√y`, `x√y`; empty means 1 when the term was imaginary.
fn parse_magnitude(body: &str, imag: bool) -> Option<f64> {
    if body.is_empty() {
        return imag.then_some(1.0);
    }
    match body.split_once('√') {
        Some((coef, rad)) => {
            let c = if coef.is_empty() { 1.0 } else { coef.strip_suffix('*').unwrap_or(coef).parse().ok()? };
            let r: f64 = rad.parse().ok()?;
            (r >= 0.0).then(|| c * r.sqrt())
        }
        None => body.parse().ok(),
    }
}

/// Comma-separated list of complex literals.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').map(parse_complex).collect()
}
