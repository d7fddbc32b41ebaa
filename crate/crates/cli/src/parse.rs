//! Strict flag grammars. Complex numbers use the forms "a", "ai", "a+bi",
//! "a-bi" with plain decimal reals (no exponents); angles are plain radians
//! or decimal multiples of pi via the "pi" suffix; sphere points add the
//! literal "inf".

use num_complex::Complex64;
use qchaos_core::SpherePoint;

/// Digits with an optional fractional part: "4", "0.5", "12.25".
fn is_unsigned_decimal(s: &str) -> bool {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    frac_part.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn signed_decimal(s: &str) -> Result<f64, String> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    if !is_unsigned_decimal(body) {
        return Err(format!("'{s}' is not a plain decimal number"));
    }
    s.parse::<f64>().map_err(|e| format!("'{s}': {e}"))
}

/// "a", "ai", "a+bi", "a-bi" with decimal reals; everything else is
/// rejected (including exponents and "pi" suffixes, which belong to angle
/// flags).
pub fn complex(text: &str) -> Result<Complex64, String> {
    let usage =
        || format!("'{text}' is not a complex number; use forms like 1, 2i, 1+0.5i, 1-0.5i");
    let Some(body) = text.strip_suffix('i') else {
        return Ok(Complex64::new(signed_decimal(text).map_err(|_| usage())?, 0.0));
    };
    // The last sign besides a leading one separates the real and imaginary
    // parts; without one the whole body is the imaginary part.
    let split = body
        .char_indices()
        .rev()
        .find(|&(k, c)| k > 0 && (c == '+' || c == '-'))
        .map(|(k, _)| k);
    match split {
        Some(k) => {
            let re = signed_decimal(&body[..k]).map_err(|_| usage())?;
            let magnitude = &body[k + 1..];
            if !is_unsigned_decimal(magnitude) {
                return Err(usage());
            }
            let im: f64 = magnitude.parse().map_err(|_| usage())?;
            let im = if body.as_bytes()[k] == b'-' { -im } else { im };
            Ok(Complex64::new(re, im))
        }
        None => Ok(Complex64::new(0.0, signed_decimal(body).map_err(|_| usage())?)),
    }
}

/// A complex number, or the literal "inf" for the point at infinity.
pub fn sphere_point(text: &str) -> Result<SpherePoint, String> {
    if text == "inf" {
        return Ok(SpherePoint::Infinity);
    }
    complex(text).map(SpherePoint::finite)
}

/// Plain decimal radians, or a decimal multiple of pi with the "pi"
/// suffix: "0.25pi" is pi/4.
pub fn angle(text: &str) -> Result<f64, String> {
    match text.strip_suffix("pi") {
        Some(multiple) => Ok(signed_decimal(multiple)? * std::f64::consts::PI),
        None => signed_decimal(text),
    }
}

/// Image size as WIDTHxHEIGHT, both positive: "400x400".
pub fn size(text: &str) -> Result<(usize, usize), String> {
    let usage = || format!("'{text}' is not a size; use WIDTHxHEIGHT, e.g. 400x400");
    let (w, h) = text.split_once('x').ok_or_else(usage)?;
    if w.is_empty() || h.is_empty() || ![w, h].iter().all(|s| s.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(usage());
    }
    let w: usize = w.parse().map_err(|_| usage())?;
    let h: usize = h.parse().map_err(|_| usage())?;
    if w == 0 || h == 0 {
        return Err(usage());
    }
    Ok((w, h))
}
