//! Exact instability radii for the second-order class
//! `g(s) = k (r s - 1) / (s^2 + p s + q)` and a one-parameter benchmark
//! family built from an unstable feedback loop.
//!
//! Within this class the radius is known in closed form on two parameter
//! branches: a static branch (`q < 0`) where the optimal perturbation is a
//! constant gain acting at zero frequency, and an oscillatory branch
//! (`q > 0 > p`) where the peak-gain bound is attained by a first-order
//! all-pass perturbation at a strictly positive peak frequency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{report_with, BoundsError, CertTag, ExtReal, GridParams};
use crate::poly::Polynomial;
use crate::xfer::{RationalTF, XferError};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum SecondOrderError {
    #[error("not in the class k(rs - 1)/(s^2 + ps + q) with nonzero k")]
    NotInClass,
    #[error("closed forms require r = 0 on the oscillatory branch")]
    NotApplicable,
    #[error("quantity undefined at z = 0")]
    DivisionByZero,
}

/// Canonical parameters of `g = k (r s - 1) / (s^2 + p s + q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCanonical {
    pub k: f64,
    pub r: f64,
    pub p: f64,
    pub q: f64,
}

/// Extracts canonical parameters: denominator degree two, numerator degree
/// at most one with nonzero constant term. The radius of `g` is the
/// canonical (`k = 1`) radius divided by `|k|`.
pub fn canonicalize(g: &RationalTF) -> Result<SecondOrderCanonical, SecondOrderError> {
    if g.den().degree() != Some(2) || g.num().is_zero() || g.num().degree().unwrap() > 1 {
        return Err(SecondOrderError::NotInClass);
    }
    let c2 = g.den().leading();
    let d = g.den().coeffs();
    let n = g.num().coeffs();
    if n[0] == 0.0 {
        return Err(SecondOrderError::NotInClass);
    }
    let k = -n[0] / c2;
    let r = if n.len() > 1 { -n[1] / n[0] } else { 0.0 };
    Ok(SecondOrderCanonical { k, r, p: d[1] / c2, q: d[0] / c2 })
}

/// Which closed-form branch certified the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactBranch {
    /// `q < 0`, `p + rq > 0`: one real unstable pole, static optimizer.
    Static,
    /// `q > 0 > p`, `r^2 q^2 + 2q - p^2 > 0`: unstable complex pair,
    /// all-pass optimizer at the peak frequency.
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRir {
    pub rho_star: f64,
    pub branch: ExactBranch,
    pub omega_p: f64,
}

/// Exact radius for the second-order class, when one of the two closed-form
/// branches applies.
///
/// * Static branch: radius `|q| / |k|`, optimizer frequency zero.
/// * Oscillatory branch: radius `1 / |g(j omega_p)|` with peak frequency
///   `omega_p^2 = q - p^2/2` for `r = 0` and
///   `omega_p^2 = (sqrt((r^2 q^2 + 2q - p^2) r^2 + 1) - 1) / r^2` otherwise.
pub fn exact_rir_thm1(c: &SecondOrderCanonical) -> Option<ExactRir> {
    let SecondOrderCanonical { k, r, p, q } = *c;
    if q < 0.0 && p + r * q > 0.0 {
        return Some(ExactRir {
            rho_star: q.abs() / k.abs(),
            branch: ExactBranch::Static,
            omega_p: 0.0,
        });
    }
    let cond = r * r * q * q + 2.0 * q - p * p;
    if q > 0.0 && p < 0.0 && cond > 0.0 {
        let w2 = if r == 0.0 {
            q - p * p / 2.0
        } else {
            ((cond * r * r + 1.0).sqrt() - 1.0) / (r * r)
        };
        let w = w2.sqrt();
        // |g(j omega_p)| straight from the canonical parameters.
        let mag2 = (k * k) * (r * r * w2 + 1.0) / ((q - w2).powi(2) + p * p * w2);
        return Some(ExactRir {
            rho_star: 1.0 / mag2.sqrt(),
            branch: ExactBranch::Oscillatory,
            omega_p: w,
        });
    }
    None
}

/// Closed forms for the marginal all-pass perturbation on the oscillatory
/// branch with `r = 0`, stated for the canonical scale `k = 1`: returns
/// `(a, b, x)` where `delta = b (a - s)/(a + s)` is marginal at the peak
/// frequency for `-1/(s^2 + p s + q)`, the stable cofactor is `-(s + x)`,
/// and
///
/// ```text
/// a = (-p + sqrt(4q - p^2)) / 2,
/// b = p sqrt(4q - p^2) / 2,
/// x = (sqrt(4q - p^2) + p) / 2.
/// ```
///
/// For general `k` the marginal gain is `b / k`; `a` and `x` are unchanged.
pub fn appendix_closed_forms(
    c: &SecondOrderCanonical,
) -> Result<(f64, f64, f64), SecondOrderError> {
    if c.r != 0.0 {
        return Err(SecondOrderError::NotApplicable);
    }
    if !(c.q > 0.0 && c.p < 0.0 && 2.0 * c.q - c.p * c.p > 0.0) {
        return Err(SecondOrderError::NotApplicable);
    }
    let qhat = (4.0 * c.q - c.p * c.p).sqrt();
    Ok(((-c.p + qhat) / 2.0, c.p * qhat / 2.0, (qhat + c.p) / 2.0))
}

/// One-parameter benchmark family: the open loop
/// `h = 2 (s - z) / (s^2 + s - 2)` under unity positive feedback gives
/// `g = h / (1 - h) = 2 (s - z) / (s^2 - s + 2(z - 1))`.
///
/// Returns `(h, g)`. Construction fails at the two values of `z` where the
/// numerator cancels against a pole (`z = 1`, also a pole of `g` at the
/// origin, and `z = -2`).
pub fn example_family(z: f64) -> Result<(RationalTF, RationalTF), XferError> {
    let h = RationalTF::from_coeffs(&[-2.0 * z, 2.0], &[-2.0, 1.0, 1.0])?;
    let g = h.complementary()?;
    Ok((h, g))
}

/// Analytic quantities describing the benchmark family as `z` varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactsQuantities {
    /// Static boundary gain `|(z - 1)/z|` (the static-gain bound of `g`).
    pub sigma0: f64,
    /// Discriminant-like product `(z-1)(z+2)(z^2 + 3z - 2)`.
    pub eta: f64,
    /// Candidate interior peak frequency `sqrt(sqrt(eta) - z^2)`, when
    /// defined.
    pub omega1: Option<f64>,
    /// Gain bound at `omega1`, computed numerically as `1/|g(j omega1)|`.
    pub sigma1: Option<f64>,
    /// Switching cubic `mu(z) = 4z^3 - z^2 - 8z + 4`; its sign decides
    /// whether the relevant bound sits at zero frequency or at `omega1`.
    pub mu: f64,
}

pub fn facts_quantities(z: f64) -> Result<FactsQuantities, SecondOrderError> {
    if z == 0.0 {
        return Err(SecondOrderError::DivisionByZero);
    }
    let sigma0 = ((z - 1.0) / z).abs();
    let eta = (z - 1.0) * (z + 2.0) * (z * z + 3.0 * z - 2.0);
    let omega1 = if eta >= 0.0 {
        let d = eta.sqrt() - z * z;
        if d >= 0.0 {
            Some(d.sqrt())
        } else {
            None
        }
    } else {
        None
    };
    // Evaluate |g| from raw polynomials so the cancellation values of z
    // still produce the analytic quantity.
    let sigma1 = omega1.map(|w| {
        let jw = num_complex::Complex64::new(0.0, w);
        let n = Polynomial::new(&[-2.0 * z, 2.0]).eval(jw);
        let d = Polynomial::new(&[2.0 * (z - 1.0), -1.0, 1.0]).eval(jw);
        (d / n).norm()
    });
    let mu = 4.0 * z.powi(3) - z * z - 8.0 * z + 4.0;
    Ok(FactsQuantities { sigma0, eta, omega1, sigma1, mu })
}

/// Real roots of the switching cubic `mu`, ascending.
pub fn mu_breakpoints() -> (f64, f64, f64) {
    let r = Polynomial::new(&[4.0, -8.0, -1.0, 4.0]).roots().expect("cubic roots");
    let mut xs: Vec<f64> = r.iter().map(|z| z.re).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (xs[0], xs[1], xs[2])
}

/// Qualitative regime of a benchmark-family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// `z <= b1`: static bound tight, no interior peak.
    A,
    /// `b1 < z < 0`: static bound tight despite an interior peak.
    B,
    /// `0 <= z < 1`: parity interlacing fails, infinite radius.
    PipViolated,
    /// `1 <= z <= b3`: peak at zero frequency, exact radius open.
    C,
    /// `b3 < z <= 2`: oscillatory peak, real-gain radius infinite.
    D,
    /// `z > 2`: oscillatory peak, finite real-gain radius.
    E,
}

/// Case thresholds: the breakpoints of the switching cubic plus the
/// structural boundaries 0, 1, 2 of the family.
pub fn case_label(z: f64) -> CaseLabel {
    let (b1, _, b3) = mu_breakpoints();
    if z <= b1 {
        CaseLabel::A
    } else if z < 0.0 {
        CaseLabel::B
    } else if z < 1.0 {
        CaseLabel::PipViolated
    } else if z <= b3 {
        CaseLabel::C
    } else if z <= 2.0 {
        CaseLabel::D
    } else {
        CaseLabel::E
    }
}

/// The benchmark z-values of the five-row reference table.
pub const TABLE2_Z: [f64; 5] = [-3.0, -0.5, 1.1, 1.5, 5.0];

/// One row of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub z: f64,
    pub case_label: CaseLabel,
    pub rho_star: Option<ExtReal>,
    pub rho_star_tag: CertTag,
    pub rho_r: Option<ExtReal>,
    pub rho_o: Option<f64>,
    pub rho_p: Option<f64>,
    pub omega_p: Option<f64>,
    /// Construction or analysis failure; the row is kept, flagged.
    pub error: Option<String>,
}

/// Builds the benchmark table rows for the given `z` values; per-row errors
/// flag the row instead of dropping it.
pub fn table2(zs: &[f64]) -> Vec<ExampleRow> {
    table2_with(zs, &GridParams::default())
}

pub fn table2_with(zs: &[f64], grid: &GridParams) -> Vec<ExampleRow> {
    zs.iter()
        .map(|&z| {
            let label = case_label(z);
            let analyzed: Result<_, BoundsError> = example_family(z)
                .map_err(BoundsError::from)
                .and_then(|(_, g)| report_with(&g, grid));
            match analyzed {
                Ok(r) => ExampleRow {
                    z,
                    case_label: label,
                    rho_star: r.rho_star,
                    rho_star_tag: r.rho_star_tag,
                    rho_r: Some(r.rho_r),
                    rho_o: r.rho_o,
                    rho_p: Some(r.rho_p),
                    omega_p: Some(r.omega_p.0),
                    error: None,
                },
                Err(e) => ExampleRow {
                    z,
                    case_label: label,
                    rho_star: None,
                    rho_star_tag: CertTag::Unknown,
                    rho_r: None,
                    rho_o: None,
                    rho_p: None,
                    omega_p: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
