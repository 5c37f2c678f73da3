//! Marginal stabilization by first-order all-pass perturbations.
//!
//! A perturbation `delta(s) = b (a - s) / (a + s)` with `a > 0` has constant
//! gain `|b|` on the imaginary axis. When the closed loop
//! `b (a - s) n(s) - (a + s) d(s)` factors as `(s^2 + omega_c^2) p(s)` with
//! `p` Hurwitz, the loop is marginally stable with a single undamped pair at
//! `omega_c`: the perturbation sits exactly on the stability boundary.
//! Solving for such a `delta` at the peak frequency of `g` with
//! `|b| = 1 / ||g||`, then checking that `(1 + eps) delta` stabilizes while
//! `(1 - eps) delta` does not, certifies the peak-gain lower bound as the
//! exact instability radius.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{PolyError, Polynomial};
use crate::xfer::{RationalTF, XferError};
use crate::TAU_STAB;

/// Relative sharpness margins tried by [`certify_exact_rir`].
pub const DEFAULT_SHARPNESS_EPS: &[f64] = &[1e-3, 1e-4];

/// Residual acceptance threshold of the marginal solve, scaled by
/// `1 + ||den|| + ||num||`.
pub const MARGINAL_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum AllPassError {
    #[error("numerator degree exceeds denominator degree")]
    DegreeMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Xfer(#[from] XferError),
}

/// First-order all-pass perturbation `delta(s) = b (a - s) / (a + s)`
/// produced by a marginal solve at frequency `omega_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllPassPerturbation {
    pub b: f64,
    pub a: f64,
    /// Frequency of the undamped closed-loop pair.
    pub omega_c: f64,
    /// Hurwitz cofactor `p(s)` of the marginal factorization.
    pub psi: Polynomial,
    /// Least-squares residual of the coefficient-matching system.
    pub residual: f64,
}

impl AllPassPerturbation {
    /// Value of `delta` at `s = j omega`.
    pub fn eval_jw(&self, omega: f64) -> Complex64 {
        let jw = Complex64::new(0.0, omega);
        self.b * (self.a - jw) / (self.a + jw)
    }

    /// H-infinity norm: `|b|`, the constant axis gain.
    pub fn hinf_norm(&self) -> f64 {
        self.b.abs()
    }

    /// DC value `delta(0) = b`.
    pub fn dc_gain(&self) -> f64 {
        self.b
    }

    /// Same phase structure, gain scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> AllPassPerturbation {
        AllPassPerturbation { b: factor * self.b, ..self.clone() }
    }
}

/// Exact-radius certificate: the peak-gain bound held sharply from both
/// sides around the marginal all-pass perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRirCertificate {
    pub rho_star: f64,
    pub delta: AllPassPerturbation,
    /// Sharpness margin that passed both one-sided checks.
    pub eps_used: f64,
}

/// Closed-loop polynomial `(a + s) d(s) - scale * b (a - s) n(s)` under the
/// scaled perturbation `scale * delta`.
fn closed_loop(g: &RationalTF, d: &AllPassPerturbation, scale: f64) -> Polynomial {
    let lead_in = Polynomial::new(&[d.a, -1.0]).mul(g.num()).scale(scale * d.b);
    let lead_out = Polynomial::new(&[d.a, 1.0]).mul(g.den());
    lead_out.sub(&lead_in)
}

/// Solves for the marginal all-pass perturbation with prescribed gain `b`
/// and undamped frequency `omega_c`.
///
/// Matching coefficients in
/// `b (a - s) n(s) - (a + s) d(s) = (s^2 + omega_c^2) p(s)` is linear in
/// the unknowns `(p_0 .. p_{n-1}, a)` and overdetermined by one equation;
/// the least-squares solution is accepted only when the residual is
/// negligible, `a > 0` and `p` is Hurwitz. Returns `None` when no
/// admissible perturbation exists at this `(omega_c, b)`, including the
/// degenerate static case `omega_c = 0`.
pub fn solve_marginal(
    g: &RationalTF,
    omega_c: f64,
    b: f64,
) -> Result<Option<AllPassPerturbation>, AllPassError> {
    let n = g.den().degree().unwrap_or(0);
    if g.num().degree().unwrap_or(0) > n {
        return Err(AllPassError::DegreeMismatch);
    }
    if n < 1 || omega_c <= 0.0 || !omega_c.is_finite() || b == 0.0 {
        return Ok(None);
    }
    let alpha = g.den().coeffs();
    let mut beta = g.num().coeffs().to_vec();
    beta.resize(n + 1, 0.0);

    let rows = n + 2;
    let cols = n + 1;
    let w2 = omega_c * omega_c;
    let mut m = vec![vec![0.0f64; cols]; rows];
    let mut rhs = vec![0.0f64; rows];
    for i in 0..rows {
        for j in 0..n {
            let mut v = 0.0;
            if i == j {
                v += w2;
            }
            if i == j + 2 {
                v += 1.0;
            }
            m[i][j] = v;
        }
        if i <= n {
            m[i][n] = -(b * beta[i] - alpha[i]);
        }
        if i >= 1 {
            rhs[i] = -(b * beta[i - 1] + alpha[i - 1]);
        }
    }
    let (x, residual) = lstsq(m, rhs);
    let scale = 1.0 + l2(alpha) + l2(&beta);
    if residual > MARGINAL_RESIDUAL_TOL * scale {
        return Ok(None);
    }
    let a = x[n];
    if a <= 0.0 {
        return Ok(None);
    }
    let psi = Polynomial::new(&x[..n]);
    if !psi.is_hurwitz().unwrap_or(false) {
        return Ok(None);
    }
    Ok(Some(AllPassPerturbation { b, a, omega_c, psi, residual }))
}

/// Checks a claimed marginal perturbation by reconstruction: divides the
/// closed-loop polynomial by `(s^2 + omega_c^2)` and requires a negligible
/// remainder and a Hurwitz quotient.
pub fn verify_marginal(g: &RationalTF, d: &AllPassPerturbation) -> bool {
    let f = closed_loop(g, d, 1.0);
    let divisor = Polynomial::new(&[d.omega_c * d.omega_c, 0.0, 1.0]);
    let (q, r) = f.div_rem(&divisor);
    let scale = 1.0 + l2(g.den().coeffs()) + l2(g.num().coeffs());
    let rem_ok = r.coeffs().iter().all(|c| c.abs() <= 1e-7 * scale);
    rem_ok && q.is_hurwitz().unwrap_or(false)
}

/// Attempts to certify the peak-gain bound `rho_p = 1 / ||g||` as the exact
/// instability radius.
///
/// Tries `b = +/- rho_p` at the peak frequency; for each admissible
/// marginal perturbation and each margin `eps`, requires `(1 + eps) delta`
/// to stabilize strictly and `(1 - eps) delta` to fail. Returns `None`
/// (rather than guessing) when the peak sits at `omega = 0` or infinity, or
/// when no two-sided margin passes.
pub fn certify_exact_rir(
    g: &RationalTF,
    epsilons: &[f64],
) -> Result<Option<ExactRirCertificate>, AllPassError> {
    let (norm, w_peak) = g.linf_norm()?;
    if norm == 0.0 || w_peak == 0.0 || !w_peak.is_finite() {
        return Ok(None);
    }
    let rho_p = 1.0 / norm;
    for b in [rho_p, -rho_p] {
        let Some(d) = solve_marginal(g, w_peak, b)? else {
            continue;
        };
        for &eps in epsilons {
            let inner = closed_loop(g, &d, 1.0 + eps);
            let outer = closed_loop(g, &d, 1.0 - eps);
            let stabilized = max_real_part(&inner).is_some_and(|m| m < -TAU_STAB);
            let still_unstable = max_real_part(&outer).is_some_and(|m| m > TAU_STAB);
            if stabilized && still_unstable {
                return Ok(Some(ExactRirCertificate { rho_star: rho_p, delta: d, eps_used: eps }));
            }
        }
    }
    Ok(None)
}

fn max_real_part(p: &Polynomial) -> Option<f64> {
    p.roots()
        .ok()
        .map(|r| r.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re)))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Householder-QR least squares for a dense overdetermined system; returns
/// the minimizer and the Euclidean residual norm.
fn lstsq(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> (Vec<f64>, f64) {
    let rows = m.len();
    let cols = m[0].len();
    debug_assert!(rows >= cols);
    for k in 0..cols {
        let mut norm = 0.0;
        for i in k..rows {
            norm += m[i][k] * m[i][k];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if m[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| m[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| v[i - k] * m[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..rows {
                m[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..rows).map(|i| v[i - k] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..rows {
            rhs[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = rhs[k];
        for j in k + 1..cols {
            s -= m[k][j] * x[j];
        }
        x[k] = if m[k][k].abs() > 0.0 { s / m[k][k] } else { 0.0 };
    }
    let residual = (cols..rows).map(|i| rhs[i] * rhs[i]).sum::<f64>().sqrt();
    (x, residual)
}
