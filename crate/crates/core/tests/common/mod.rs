//! Test-side oracles: small, independent reimplementations used to
//! cross-check the library. Everything here works on ascending-degree
//! coefficient slices and deliberately avoids the library's own numerics.

// Each integration-test target compiles this module separately and uses a
// different subset of the helpers.
#![allow(dead_code)]

use num_complex::Complex64;

/// Horner evaluation of an ascending-degree polynomial at a complex point.
pub fn horner(asc: &[f64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in asc.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// Largest `|n(jw)| / |d(jw)|` over an even grid of `points` frequencies
/// covering `[0, w_max]` inclusive.
pub fn grid_peak_gain(num: &[f64], den: &[f64], w_max: f64, points: usize) -> f64 {
    let mut best_sq = 0.0f64;
    for k in 0..points {
        let w = w_max * k as f64 / (points - 1) as f64;
        let s = Complex64::new(0.0, w);
        let m = horner(num, s).norm_sqr() / horner(den, s).norm_sqr();
        if m > best_sq {
            best_sq = m;
        }
    }
    best_sq.sqrt()
}

/// Routh-Hurwitz test: true iff every root of the polynomial lies strictly
/// in the open left half-plane. Degenerate tables (zero or non-finite
/// first-column entries) report false, which is the right verdict for a
/// closed loop that is at best marginal.
pub fn routh_stable(asc: &[f64]) -> bool {
    let mut c: Vec<f64> = asc.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    if c.len() <= 1 {
        return false;
    }
    let mut desc: Vec<f64> = c.iter().rev().copied().collect();
    if desc[0] < 0.0 {
        for x in desc.iter_mut() {
            *x = -*x;
        }
    }
    // Positivity of every coefficient is necessary for strict stability.
    if desc.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return false;
    }
    let n = desc.len() - 1;
    let row0: Vec<f64> = desc.iter().step_by(2).copied().collect();
    let row1: Vec<f64> = desc.iter().skip(1).step_by(2).copied().collect();
    let mut rows = vec![row0, row1];
    for k in 2..=n {
        let pivot = rows[k - 1][0];
        if !(pivot.is_finite() && pivot != 0.0) {
            return false;
        }
        let len = (rows[k - 2].len() - 1).max(1);
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let hi = rows[k - 2].get(i + 1).copied().unwrap_or(0.0);
            let lo = rows[k - 1].get(i + 1).copied().unwrap_or(0.0);
            next.push((pivot * hi - rows[k - 2][0] * lo) / pivot);
        }
        rows.push(next);
    }
    rows.iter().all(|r| r[0].is_finite() && r[0] > 0.0)
}

/// Polynomial product (convolution of ascending coefficient slices).
pub fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Elementwise difference `a - b`, padded to the longer length.
pub fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Scalar multiple of an ascending coefficient slice.
pub fn poly_scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|x| x * k).collect()
}

/// Remainder of an ascending-degree polynomial modulo `s^2 + w2`,
/// returned as `(r0, r1)` with remainder `r1 s + r0`.
pub fn remainder_mod_s2(asc: &[f64], w2: f64) -> (f64, f64) {
    let mut d: Vec<f64> = asc.iter().rev().copied().collect();
    if d.len() < 3 {
        let r1 = if d.len() == 2 { d[0] } else { 0.0 };
        let r0 = *d.last().unwrap_or(&0.0);
        return (r0, r1);
    }
    for i in 0..d.len() - 2 {
        let f = d[i];
        d[i] = 0.0;
        d[i + 2] -= f * w2;
    }
    (d[d.len() - 1], d[d.len() - 2])
}

/// Closed-loop denominator `d(s) - delta n(s)` for a static gain.
pub fn static_closed_loop(num: &[f64], den: &[f64], delta: f64) -> Vec<f64> {
    poly_sub(den, &poly_scale(num, delta))
}

/// The three real roots of a depressed-free cubic
/// `c3 x^3 + c2 x^2 + c1 x + c0` via the trigonometric method, sorted
/// ascending. Panics if the discriminant does not give three real roots.
pub fn cubic_three_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> [f64; 3] {
    let (b, c, d) = (c2 / c3, c1 / c3, c0 / c3);
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    assert!(p < 0.0, "three real roots need p < 0");
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, slot) in roots.iter_mut().enumerate() {
        *slot = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - b / 3.0;
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn routh_matches_known_cases() {
        assert!(routh_stable(&[6.0, 11.0, 6.0, 1.0])); // (s+1)(s+2)(s+3)
        assert!(!routh_stable(&[-1.0, 0.0, 1.0])); // s^2 - 1
        assert!(!routh_stable(&[1.0, 0.0, 1.0])); // s^2 + 1: marginal
        assert!(!routh_stable(&[2.0, -3.0, 1.0, 1.0]));
        assert!(routh_stable(&[0.5, 1.5, 1.0])); // complex stable pair
        // Leading-sign normalization: -(s+1)^2.
        assert!(routh_stable(&[-1.0, -2.0, -1.0]));
    }

    #[test]
    fn quadratic_remainder_matches_direct_evaluation() {
        // p(s) = (s^2 + 4)(s + 3) + (2s - 5) = s^3 + 3 s^2 + 6 s + 7
        let p = [7.0, 6.0, 3.0, 1.0];
        let (r0, r1) = remainder_mod_s2(&p, 4.0);
        assert!((r0 + 5.0).abs() < 1e-12);
        assert!((r1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_roots_match_factored_form() {
        // 2(x + 1)(x - 2)(x - 5) = 2x^3 - 12x^2 + 6x + 20
        let r = cubic_three_real_roots(2.0, -12.0, 6.0, 20.0);
        assert!((r[0] + 1.0).abs() < 1e-12);
        assert!((r[1] - 2.0).abs() < 1e-12);
        assert!((r[2] - 5.0).abs() < 1e-12);
    }
}
