//! Deterministic numeric formatting for CSV and text artifacts.

/// Formats with 9 significant digits, trimming trailing zeros, switching to
/// scientific notation outside the `%g`-style exponent window. Infinite
/// values render as `inf`/`-inf` so they survive a CSV round trip.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent parses");
    if (-4..9).contains(&exp) {
        let prec = (8 - exp).max(0) as usize;
        let mut s = format!("{:.*}", prec, x);
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let mut m = mant.to_string();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        format!("{m}e{exp}")
    }
}

/// Renders a polynomial in conventional descending-degree notation,
/// e.g. `s^2 - s + 8`.
pub fn poly_desc(coeffs: &[f64]) -> String {
    let n = coeffs.len() - 1;
    let mut out = String::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0.0 && !(n == 0 && k == 0) {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        let coeff_part = {
            let rendered = sig9(mag);
            if rendered == "1" && k > 0 {
                String::new()
            } else {
                rendered
            }
        };
        let var_part = match k {
            0 => String::new(),
            1 => "s".to_string(),
            _ => format!("s^{k}"),
        };
        if !coeff_part.is_empty() && !var_part.is_empty() {
            out.push_str(&coeff_part);
            out.push(' ');
            out.push_str(&var_part);
        } else {
            out.push_str(&coeff_part);
            out.push_str(&var_part);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
