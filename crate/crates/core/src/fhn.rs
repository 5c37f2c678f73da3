//! Robustness case study on the FitzHugh-Nagumo (FHN) neuron model.
//!
//! The nominal model oscillates because its unique equilibrium is unstable.
//! A stable perturbation `delta(s)` of the recovery-variable coupling
//! `(1 + delta(s)) w` can shift the equilibrium (through its static gain
//! `e = delta(0)`) and render the shifted equilibrium stable, killing the
//! oscillation. This module locates the critical static gain where
//! `|e| = 1 / ||g_e||`, synthesizes the minimum-norm stabilizing all-pass
//! perturbation at that gain, and checks outcomes by nonlinear simulation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allpass::{solve_marginal, AllPassError, AllPassPerturbation};
use crate::fmt::sig9;
use crate::poly::{PolyError, Polynomial};
use crate::xfer::{RationalTF, XferError};

/// Settling band for the converged verdict: every state component of the
/// trajectory tail must stay this close to its tail mean.
pub const SETTLE_BAND: f64 = 1e-3;
/// Minimum terminal peak-to-peak amplitude of `v` for a limit-cycle verdict.
pub const AMPLITUDE_FLOOR: f64 = 0.5;

#[derive(Debug, Error)]
pub enum FhnError {
    #[error("equilibrium uniqueness not guaranteed: 1 + e < beta")]
    NonUnique,
    #[error("equilibrium cubic produced no real root")]
    NoRealRoot,
    #[error("no sign change of |e| - 1/||g_e|| on the search bracket")]
    NoCrossing,
    #[error("marginal all-pass synthesis failed at the critical gain")]
    Synthesis,
    #[error("state diverged during simulation")]
    NonFinite,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Xfer(#[from] XferError),
    #[error(transparent)]
    AllPass(#[from] AllPassError),
}

/// Parameters of `c v' = v - v^3/3 + i - w`, `tau w' = v + alpha - beta w`.
///
/// All parameters are positive and `beta < 1`, which together with the
/// coupling-shift guard keeps the equilibrium unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnModel {
    pub c: f64,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub i: f64,
}

impl Default for FhnModel {
    fn default() -> Self {
        FhnModel { c: 1.0, tau: 10.0, alpha: 0.7, beta: 0.8, i: 0.4 }
    }
}

impl FhnModel {
    pub fn nominal() -> Self {
        Self::default()
    }

    fn psi(&self, v: f64) -> f64 {
        v - v * v * v / 3.0 + self.i
    }
}

/// Fixed point of the model with the coupling scaled to `(1 + e) w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub v: f64,
    pub w: f64,
    /// Static gain of the coupling perturbation that produced this point.
    pub e: f64,
    /// Slope `1 - v^2` of the excitation nonlinearity at the fixed point.
    pub gamma: f64,
    /// Whether the linearization at this point is stable on its own.
    pub stable: bool,
}

/// Solves `psi(v) = (1 + e) w`, `v = beta w - alpha` for the unique fixed
/// point. Unique solvability requires `1 + e >= beta` (the substituted
/// cubic in `v` is then strictly increasing); below that the cubic can
/// fold and the result would be ambiguous.
pub fn equilibrium(m: &FhnModel, e: f64) -> Result<Equilibrium, FhnError> {
    if 1.0 + e < m.beta {
        return Err(FhnError::NonUnique);
    }
    let lam = 3.0 * ((1.0 + e) / m.beta - 1.0);
    let con = 3.0 * ((1.0 + e) * m.alpha / m.beta - m.i);
    let cubic = Polynomial::new(&[con, lam, 0.0, 1.0]);
    let mut v = cubic
        .roots()?
        .into_iter()
        .filter(|r| r.im.abs() < 1e-6 * (1.0 + r.re.abs()))
        .map(|r| r.re)
        .next()
        .ok_or(FhnError::NoRealRoot)?;
    // Newton polish on the original balance equation.
    for _ in 0..30 {
        let h = m.psi(v) - (1.0 + e) * (v + m.alpha) / m.beta;
        let dh = (1.0 - v * v) - (1.0 + e) / m.beta;
        if dh == 0.0 || h.abs() < 1e-15 {
            break;
        }
        v -= h / dh;
    }
    let w = (v + m.alpha) / m.beta;
    let gamma = 1.0 - v * v;
    let den = lin_denominator(m, gamma);
    let stable = den.is_hurwitz()?;
    Ok(Equilibrium { v, w, e, gamma, stable })
}

fn lin_denominator(m: &FhnModel, gamma: f64) -> Polynomial {
    Polynomial::new(&[
        1.0 - m.beta * gamma,
        m.beta * m.c - m.tau * gamma,
        m.c * m.tau,
    ])
}

/// Loop transfer function seen by the coupling perturbation at the given
/// fixed point:
/// `g_e(s) = -1 / (c tau s^2 + (beta c - tau gamma) s + 1 - beta gamma)`.
pub fn linearize(m: &FhnModel, eq: &Equilibrium) -> Result<RationalTF, FhnError> {
    Ok(RationalTF::new(
        Polynomial::new(&[-1.0]),
        lin_denominator(m, eq.gamma),
    )?)
}

/// Line search for the self-consistent critical static gain: the `e0 < 0`
/// where `|e| = 1 / ||g_e||` (the perturbation's own magnitude meets the
/// peak-gain bound of the plant it shifts). Returns `(e0, omega_p)` with
/// `omega_p` the peak frequency of `g_{e0}`.
pub fn critical_static_gain(m: &FhnModel) -> Result<(f64, f64), FhnError> {
    let lo = m.beta - 1.0 + 1e-6;
    let f = |e: f64| -> Result<f64, FhnError> {
        let eq = equilibrium(m, e)?;
        let g = linearize(m, &eq)?;
        let (norm, _) = g.linf_norm()?;
        Ok(-e - 1.0 / norm)
    };
    // Scan from 0 toward the uniqueness boundary for a sign change,
    // skipping samples where the shifted plant is marginal.
    let n = 400;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for k in 0..=n {
        let e = lo * (k as f64) / (n as f64);
        match f(e) {
            Ok(fe) => {
                if let Some((ep, fp)) = prev {
                    if (fp <= 0.0) != (fe <= 0.0) {
                        bracket = Some((ep, fp, e));
                        break;
                    }
                }
                prev = Some((e, fe));
            }
            Err(_) => prev = None,
        }
    }
    let (mut x0, mut f0, mut x1) = bracket.ok_or(FhnError::NoCrossing)?;
    let mut e0 = 0.5 * (x0 + x1);
    for _ in 0..200 {
        e0 = 0.5 * (x0 + x1);
        let fm = f(e0)?;
        if fm.abs() <= 1e-9 {
            break;
        }
        if (fm <= 0.0) == (f0 <= 0.0) {
            x0 = e0;
            f0 = fm;
        } else {
            x1 = e0;
        }
    }
    let eq = equilibrium(m, e0)?;
    let g = linearize(m, &eq)?;
    let (_, omega_p) = g.linf_norm()?;
    Ok((e0, omega_p))
}

/// Builds the minimum-norm stabilizing all-pass perturbation: the marginal
/// `delta0 = b (a - s)/(a + s)` with `b = e0` at the peak frequency of
/// `g_{e0}`, scaled by `1 + eps`. Positive `eps` stabilizes the shifted
/// equilibrium strictly; negative `eps` leaves it unstable.
pub fn synthesize_perturbation(
    m: &FhnModel,
    eps: f64,
) -> Result<AllPassPerturbation, FhnError> {
    let (e0, omega_p) = critical_static_gain(m)?;
    let eq = equilibrium(m, e0)?;
    let g = linearize(m, &eq)?;
    let d0 = solve_marginal(&g, omega_p, e0)?.ok_or(FhnError::Synthesis)?;
    Ok(d0.scaled(1.0 + eps))
}

/// Coupling perturbation applied during simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Unperturbed model.
    Nominal,
    /// Constant gain `delta(s) = d`.
    Static(f64),
    /// First-order all-pass `delta(s) = b (a - s)/(a + s)`, realized with
    /// one state `x` as `x' = -a x + w`, output `u = -b w + 2 a b x`.
    AllPass { a: f64, b: f64 },
}

impl From<&AllPassPerturbation> for Perturbation {
    fn from(d: &AllPassPerturbation) -> Self {
        Perturbation::AllPass { a: d.a, b: d.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Initial `(v, w, x)`; the perturbation state `x` is ignored unless
    /// the perturbation is dynamic.
    pub x0: [f64; 3],
    pub t_end: f64,
    pub dt: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { x0: [0.0; 3], t_end: 200.0, dt: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    LimitCycle,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Peak-to-peak `v` amplitude over the classification window.
    pub terminal_amplitude: f64,
    /// Mean spacing of upward mid-level crossings, when periodic.
    pub period: Option<f64>,
}

/// Classification thresholds, recorded alongside each verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub settle_band: f64,
    pub amplitude_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(v, w, x)` samples; `x` is the all-pass state (zero otherwise).
    pub states: Vec<[f64; 3]>,
    pub outcome: Outcome,
    pub metrics: Metrics,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub outcome: Outcome,
    pub metrics: Metrics,
    pub thresholds: Thresholds,
    pub samples: usize,
    pub t_end: f64,
}

impl Trajectory {
    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            outcome: self.outcome,
            metrics: self.metrics,
            thresholds: self.thresholds,
            samples: self.times.len(),
            t_end: *self.times.last().unwrap_or(&0.0),
        }
    }

    /// CSV rendering with header `t,v,w,x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v,w,x\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig9(*t),
                sig9(s[0]),
                sig9(s[1]),
                sig9(s[2])
            ));
        }
        out
    }
}

/// Integrates the (possibly perturbed) model with fixed-step RK4 and
/// classifies the outcome:
///
/// * `converged`: over the last 20% of the run, every state component
///   stays within [`SETTLE_BAND`] of its own mean;
/// * `limit_cycle`: over the last 60%, the `v` swing exceeds
///   [`AMPLITUDE_FLOOR`], upward mid-level crossings repeat at regular
///   spacing, and the amplitude is steady;
/// * `undecided` otherwise.
pub fn simulate(
    m: &FhnModel,
    d: &Perturbation,
    params: &SimParams,
) -> Result<Trajectory, FhnError> {
    assert!(params.dt > 0.0 && params.t_end > params.dt, "degenerate time grid");
    let rhs = |s: [f64; 3]| -> [f64; 3] {
        let (v, w, x) = (s[0], s[1], s[2]);
        let (u, dx) = match *d {
            Perturbation::Nominal => (0.0, 0.0),
            Perturbation::Static(g) => (g * w, 0.0),
            Perturbation::AllPass { a, b } => (-b * w + 2.0 * a * b * x, -a * x + w),
        };
        [
            (m.psi(v) - w - u) / m.c,
            (v + m.alpha - m.beta * w) / m.tau,
            dx,
        ]
    };
    let steps = (params.t_end / params.dt).round() as usize;
    let mut s = params.x0;
    if !matches!(d, Perturbation::AllPass { .. }) {
        s[2] = 0.0;
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(s);
    let h = params.dt;
    for k in 1..=steps {
        let k1 = rhs(s);
        let k2 = rhs(step(s, &k1, h / 2.0));
        let k3 = rhs(step(s, &k2, h / 2.0));
        let k4 = rhs(step(s, &k3, h));
        for j in 0..3 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if s.iter().any(|c| !c.is_finite() || c.abs() > 1e6) {
            return Err(FhnError::NonFinite);
        }
        times.push(k as f64 * h);
        states.push(s);
    }
    let (outcome, metrics) = classify(&times, &states);
    Ok(Trajectory {
        times,
        states,
        outcome,
        metrics,
        thresholds: Thresholds {
            settle_band: SETTLE_BAND,
            amplitude_floor: AMPLITUDE_FLOOR,
        },
    })
}

fn step(s: [f64; 3], k: &[f64; 3], h: f64) -> [f64; 3] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]]
}

fn peak_to_peak(vs: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vs {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

fn classify(times: &[f64], states: &[[f64; 3]]) -> (Outcome, Metrics) {
    let n = states.len();
    let tail = &states[n - n / 5..];
    let mut settled = true;
    for j in 0..3 {
        let mean = tail.iter().map(|s| s[j]).sum::<f64>() / tail.len() as f64;
        if tail.iter().any(|s| (s[j] - mean).abs() > SETTLE_BAND) {
            settled = false;
            break;
        }
    }
    let window_start = n - 3 * n / 5;
    let vs: Vec<f64> = states[window_start..].iter().map(|s| s[0]).collect();
    let ts = &times[window_start..];
    let pp = peak_to_peak(&vs);
    if settled {
        let tail_v: Vec<f64> = tail.iter().map(|s| s[0]).collect();
        return (
            Outcome::Converged,
            Metrics { terminal_amplitude: peak_to_peak(&tail_v), period: None },
        );
    }
    if pp > AMPLITUDE_FLOOR {
        let mid = vs.iter().copied().fold(f64::INFINITY, f64::min) + pp / 2.0;
        let mut crossings = Vec::new();
        for i in 1..vs.len() {
            if vs[i - 1] < mid && vs[i] >= mid {
                let frac = (mid - vs[i - 1]) / (vs[i] - vs[i - 1]);
                crossings.push(ts[i - 1] + frac * (ts[i] - ts[i - 1]));
            }
        }
        if crossings.len() >= 3 {
            let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let regular = gaps.iter().all(|g| (g - mean).abs() <= 0.2 * mean);
            let half = vs.len() / 2;
            let (pp1, pp2) = (peak_to_peak(&vs[..half]), peak_to_peak(&vs[half..]));
            let steady = (pp1 - pp2).abs() <= 0.25 * pp1.max(pp2);
            if regular && steady {
                return (
                    Outcome::LimitCycle,
                    Metrics { terminal_amplitude: pp, period: Some(mean) },
                );
            }
        }
    }
    (Outcome::Undecided, Metrics { terminal_amplitude: pp, period: None })
}

/// Fixed point of the full simulated loop (model plus perturbation state),
/// convenient for starting converged-verdict runs near their target.
pub fn shifted_state(m: &FhnModel, d: &Perturbation) -> Result<[f64; 3], FhnError> {
    let (e, a) = match *d {
        Perturbation::Nominal => (0.0, None),
        Perturbation::Static(g) => (g, None),
        Perturbation::AllPass { a, b } => (b, Some(a)),
    };
    let eq = equilibrium(m, e)?;
    let x = a.map_or(0.0, |a| eq.w / a);
    Ok([eq.v, eq.w, x])
}
