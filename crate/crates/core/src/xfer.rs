//! Rational transfer functions `g(s) = n(s)/d(s)` with the frequency-domain
//! queries the instability-radius machinery needs: exact L-infinity norm and
//! peak frequency, static gain, unstable pole list, a parity interlacing
//! test over the nonnegative real axis, and Nyquist curve sampling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fmt::sig9;
use crate::poly::{PolyError, Polynomial};

/// Roots closer than this to each other (one from the numerator, one from
/// the denominator) make the fraction ambiguous and are rejected.
pub const CANCEL_TOL: f64 = 1e-9;
/// Pairs closer than this merely set a construction warning flag.
pub const NEAR_CANCEL_TOL: f64 = 1e-7;
/// A root counts as real when its imaginary part is below this relative
/// threshold; the same threshold flags poles as sitting on the imaginary
/// axis.
pub const AXIS_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum XferError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("numerator and denominator share a root near {0} (ambiguous fraction)")]
    Cancellation(f64),
    #[error("complement denominator d(s) - n(s) vanishes identically")]
    DegenerateLoop,
    #[error("pole on the imaginary axis near omega = {0}")]
    PoleOnAxis(f64),
    #[error("pole at the origin")]
    PoleAtOrigin,
    #[error("transfer function is not proper")]
    NotProper,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn is_real_root(z: Complex64) -> bool {
    z.im.abs() < AXIS_TOL * (1.0 + z.re.abs())
}

/// Real-rational transfer function. Construction rejects exact common roots
/// of numerator and denominator and flags near-cancellations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
    near_cancellation: bool,
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, XferError> {
        if den.is_zero() {
            return Err(XferError::ZeroDenominator);
        }
        let mut near = false;
        if num.degree().unwrap_or(0) >= 1 && den.degree().unwrap_or(0) >= 1 {
            let nr = num.roots()?;
            let dr = den.roots()?;
            for a in &nr {
                for b in &dr {
                    let dist = (a - b).norm();
                    if dist < CANCEL_TOL {
                        return Err(XferError::Cancellation(a.re));
                    }
                    if dist < NEAR_CANCEL_TOL {
                        near = true;
                    }
                }
            }
        }
        Ok(RationalTF { num, den, near_cancellation: near })
    }

    /// Builds from ascending-degree coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, XferError> {
        RationalTF::new(Polynomial::new(num), Polynomial::new(den))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// True when some numerator/denominator root pair sits within
    /// [`NEAR_CANCEL_TOL`] without being an outright cancellation.
    pub fn near_cancellation(&self) -> bool {
        self.near_cancellation
    }

    /// Closed-loop map of the unity positive-feedback loop around `h`:
    /// `g = h / (1 - h)` in the raw form `n_h / (d_h - n_h)`.
    pub fn complementary(&self) -> Result<Self, XferError> {
        let den = self.den.sub(&self.num);
        if den.is_zero() {
            return Err(XferError::DegenerateLoop);
        }
        RationalTF::new(self.num.clone(), den)
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Frequency response at `s = j omega`.
    pub fn eval_jw(&self, omega: f64) -> Result<Complex64, XferError> {
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval(s);
        if d.norm() < 1e-12 {
            return Err(XferError::PoleOnAxis(omega));
        }
        Ok(self.num.eval(s) / d)
    }

    /// Numerator/denominator value of `g(0)`.
    pub fn static_gain(&self) -> Result<f64, XferError> {
        let d0 = self.den.eval_real(0.0);
        if d0.abs() < 1e-12 {
            return Err(XferError::PoleAtOrigin);
        }
        Ok(self.num.eval_real(0.0) / d0)
    }

    /// Denominator roots with strictly positive real part.
    pub fn unstable_poles(&self) -> Vec<Complex64> {
        match self.den.roots() {
            Ok(r) => r.into_iter().filter(|z| z.re > 0.0).collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Exact supremum of `|g(j omega)|` over `omega in [0, inf]` together
    /// with the peak frequency (ties resolve to the smallest frequency; a
    /// biproper peak at infinity reports `f64::INFINITY`).
    ///
    /// Works on the squared magnitude as a rational function of
    /// `W = omega^2`: candidates are `W = 0`, the nonnegative real
    /// stationary points of `N(W)/D(W)` (roots of `N'D - ND'`), and the
    /// `W -> inf` limit for biproper systems.
    pub fn linf_norm(&self) -> Result<(f64, f64), XferError> {
        if self.num.is_zero() {
            return Ok((0.0, 0.0));
        }
        if !self.is_proper() {
            return Err(XferError::NotProper);
        }
        if self.den.degree().unwrap_or(0) >= 1 {
            for p in self.den.roots()? {
                if p.re.abs() < AXIS_TOL {
                    return Err(XferError::PoleOnAxis(p.im.abs()));
                }
            }
        }
        let nn = mag_sq_in_omega2(&self.num);
        let dd = mag_sq_in_omega2(&self.den);
        let f = |w2: f64| nn.eval_real(w2) / dd.eval_real(w2);

        let mut candidates: Vec<f64> = vec![0.0];
        let slope = nn.derivative().mul(&dd).sub(&nn.mul(&dd.derivative()));
        if slope.degree().unwrap_or(0) >= 1 {
            let mut st: Vec<f64> = slope
                .roots()?
                .into_iter()
                .filter(|z| is_real_root(*z) && z.re > 1e-12)
                .map(|z| z.re)
                .collect();
            st.sort_by(|a, b| a.partial_cmp(b).unwrap());
            candidates.extend(st);
        }
        let mut best_w2 = 0.0;
        let mut best = f(0.0);
        for &w2 in &candidates[1..] {
            let v = f(w2);
            if v > best {
                best = v;
                best_w2 = w2;
            }
        }
        let mut peak_at_inf = false;
        if self.num.degree() == self.den.degree() {
            let v = (self.num.leading() / self.den.leading()).powi(2);
            if v > best {
                best = v;
                peak_at_inf = true;
            }
        }
        let w_peak = if peak_at_inf { f64::INFINITY } else { best_w2.sqrt() };
        Ok((best.sqrt(), w_peak))
    }

    /// Parity interlacing over the closed right half axis: between every
    /// consecutive pair of real nonnegative zeros of `g` (a single zero at
    /// infinity is appended when the relative degree is at least one) the
    /// number of real unstable poles must be even. A violation means no
    /// stable perturbation can stabilize the loop.
    pub fn pip_holds(&self) -> bool {
        if self.num.is_zero() {
            return true;
        }
        let mut zeros: Vec<f64> = Vec::new();
        if self.num.degree().unwrap_or(0) >= 1 {
            if let Ok(r) = self.num.roots() {
                for z in r {
                    if is_real_root(z) && z.re >= -CANCEL_TOL {
                        zeros.push(z.re.max(0.0));
                    }
                }
            }
        }
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rel_deg = self.den.degree().unwrap_or(0) as i64
            - self.num.degree().unwrap_or(0) as i64;
        let has_inf_zero = rel_deg >= 1;
        let segments = zeros.len() + usize::from(has_inf_zero);
        if segments < 2 {
            return true;
        }
        let mut poles: Vec<f64> = self
            .unstable_poles()
            .into_iter()
            .filter(|z| is_real_root(*z))
            .map(|z| z.re)
            .collect();
        poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..zeros.len().saturating_sub(1) {
            let count = poles.iter().filter(|&&p| p > zeros[k] && p < zeros[k + 1]).count();
            if count % 2 == 1 {
                return false;
            }
        }
        if has_inf_zero && !zeros.is_empty() {
            let last = *zeros.last().unwrap();
            let count = poles.iter().filter(|&&p| p > last).count();
            if count % 2 == 1 {
                return false;
            }
        }
        true
    }
}

/// Coefficients (in `W = omega^2`) of `|p(j omega)|^2`.
pub(crate) fn mag_sq_in_omega2(p: &Polynomial) -> Polynomial {
    let c = p.coeffs();
    let n = c.len() - 1;
    let mut out = vec![0.0; n + 1];
    for i in 0..=n {
        for k in 0..=n {
            if (i + k) % 2 == 0 {
                let m = (i + k) / 2;
                let sign = if (i as i64 - m as i64) % 2 == 0 { 1.0 } else { -1.0 };
                out[m] += sign * c[i] * c[k];
            }
        }
    }
    Polynomial::new(&out)
}

/// Even/odd split of `n(j omega) * conj(d(j omega))` for real `n`, `d`:
/// returns `(R, T)` with real part `R(omega^2)` and imaginary part
/// `omega * T(omega^2)`.
pub(crate) fn cross_parts_in_omega2(n: &Polynomial, d: &Polynomial) -> (Polynomial, Polynomial) {
    let nc = n.coeffs();
    let dc = d.coeffs();
    let deg = nc.len() + dc.len() - 2;
    let mut s = vec![0.0; deg + 1];
    for (i, &a) in nc.iter().enumerate() {
        for (k, &b) in dc.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s[i + k] += sign * a * b;
        }
    }
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (m, &v) in s.iter().enumerate() {
        let t = m / 2;
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        if m % 2 == 0 {
            re.push(sign * v);
        } else {
            im.push(sign * v);
        }
    }
    (Polynomial::new(&re), Polynomial::new(&im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

/// Peak-frequency annotation on a Nyquist curve: where the curve comes
/// closest to the critical point and with what radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
    pub radius: f64,
}

/// Sampled frequency-response curve. Frequencies are strictly increasing;
/// samples that land on an imaginary-axis pole are skipped and recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NyquistCurve {
    pub label: String,
    pub freqs: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub skipped: Vec<f64>,
    pub projection: Option<Projection>,
}

/// Samples `tf` at `n` frequencies covering `[w_min, w_max]` inclusive.
///
/// Preconditions (asserted): `0 <= w_min < w_max`, `n >= 2`, and log
/// spacing requires `w_min > 0`.
pub fn nyquist(
    tf: &RationalTF,
    label: &str,
    w_min: f64,
    w_max: f64,
    n: usize,
    scale: GridScale,
) -> NyquistCurve {
    assert!(n >= 2, "need at least two samples");
    assert!(w_min >= 0.0 && w_min < w_max, "need 0 <= w_min < w_max");
    if scale == GridScale::Log {
        assert!(w_min > 0.0, "log spacing needs w_min > 0");
    }
    let mut freqs = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let w = match scale {
            GridScale::Linear => w_min + t * (w_max - w_min),
            GridScale::Log => (w_min.ln() + t * (w_max.ln() - w_min.ln())).exp(),
        };
        match tf.eval_jw(w) {
            Ok(v) => {
                freqs.push(w);
                points.push((v.re, v.im));
            }
            Err(_) => skipped.push(w),
        }
    }
    NyquistCurve { label: label.to_string(), freqs, points, skipped, projection: None }
}

impl NyquistCurve {
    /// Annotates the curve with the peak of `g`: the point the plotted
    /// function takes at `g`'s peak frequency and the radius `1 / ||g||`.
    /// No annotation is attached when the peak sits at infinity.
    pub fn with_projection(
        mut self,
        plotted: &RationalTF,
        g: &RationalTF,
    ) -> Result<Self, XferError> {
        let (norm, w_peak) = g.linf_norm()?;
        if norm > 0.0 && w_peak.is_finite() {
            let p = plotted.eval_jw(w_peak)?;
            self.projection = Some(Projection {
                omega: w_peak,
                re: p.re,
                im: p.im,
                radius: 1.0 / norm,
            });
        }
        Ok(self)
    }

    /// CSV rendering: `omega,re,im` rows at nine significant digits, with
    /// the projection and any skipped samples as leading comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.label));
        if let Some(p) = &self.projection {
            out.push_str(&format!(
                "# projection omega={} re={} im={} radius={}\n",
                sig9(p.omega),
                sig9(p.re),
                sig9(p.im),
                sig9(p.radius)
            ));
        }
        if !self.skipped.is_empty() {
            let list: Vec<String> = self.skipped.iter().map(|w| sig9(*w)).collect();
            out.push_str(&format!("# skipped omega: {}\n", list.join(" ")));
        }
        out.push_str("omega,re,im\n");
        for (w, (re, im)) in self.freqs.iter().zip(&self.points) {
            out.push_str(&format!("{},{},{}\n", sig9(*w), sig9(*re), sig9(*im)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_coeffs(num, den).unwrap()
    }

    #[test]
    fn rejects_zero_denominator_and_cancellation() {
        assert_eq!(
            RationalTF::from_coeffs(&[1.0], &[0.0]).unwrap_err(),
            XferError::ZeroDenominator
        );
        // (s - 1) over (s - 1): identical roots.
        assert!(matches!(
            RationalTF::from_coeffs(&[-1.0, 1.0], &[-1.0, 1.0]).unwrap_err(),
            XferError::Cancellation(_)
        ));
    }

    #[test]
    fn flags_near_cancellation() {
        // Zero at 1, pole at 1 + 5e-8: inside the warning band, outside the
        // rejection band.
        let den = Polynomial::new(&[-(1.0 + 5e-8), 1.0]).mul(&Polynomial::new(&[2.0, 1.0]));
        let g = RationalTF::new(Polynomial::new(&[-1.0, 1.0]), den).unwrap();
        assert!(g.near_cancellation());
        assert!(!tf(&[-1.0, 1.0], &[2.0, 1.0]).near_cancellation());
    }

    #[test]
    fn complementary_of_benchmark_loop() {
        // h = 2(s - 5)/(s^2 + s - 2) -> g = 2(s - 5)/(s^2 - s + 8).
        let h = tf(&[-10.0, 2.0], &[-2.0, 1.0, 1.0]);
        let g = h.complementary().unwrap();
        assert_eq!(g.num().coeffs(), &[-10.0, 2.0]);
        assert_eq!(g.den().coeffs(), &[8.0, -1.0, 1.0]);
    }

    #[test]
    fn complementary_degenerate_loop() {
        let unity = tf(&[1.0], &[1.0]);
        assert_eq!(unity.complementary().unwrap_err(), XferError::DegenerateLoop);
    }

    #[test]
    fn frequency_response_matches_hand_value() {
        // g = 2(s - 5)/(s^2 - s + 8) near its peak: |g(2.76 j)| ~ 4.098.
        let g = tf(&[-10.0, 2.0], &[8.0, -1.0, 1.0]);
        let v = g.eval_jw(2.76).unwrap();
        assert!((v.norm() - 4.098).abs() < 0.02, "got {}", v.norm());
        assert!(matches!(
            tf(&[1.0], &[1.0, 0.0, 1.0]).eval_jw(1.0).unwrap_err(),
            XferError::PoleOnAxis(_)
        ));
    }

    #[test]
    fn static_gain_and_origin_pole() {
        let g = tf(&[6.0, 2.0], &[-8.0, -1.0, 1.0]);
        assert_relative_eq!(g.static_gain().unwrap(), -0.75, epsilon = 1e-15);
        assert_eq!(
            tf(&[1.0], &[0.0, 1.0]).static_gain().unwrap_err(),
            XferError::PoleAtOrigin
        );
    }

    #[test]
    fn magnitude_square_expansion() {
        // |s^2 - s + 8|^2 on the axis = W^2 - 15W + 64.
        let m = mag_sq_in_omega2(&Polynomial::new(&[8.0, -1.0, 1.0]));
        assert_eq!(m.coeffs(), &[64.0, -15.0, 1.0]);
    }

    #[test]
    fn cross_parts_match_hand_expansion() {
        // n = 2s + 6, d = s^2 - s - 8:
        // n(jw) conj(d(jw)) = (-8w^2 - 48) + j w (-2w^2 - 10).
        let (re, im) = cross_parts_in_omega2(
            &Polynomial::new(&[6.0, 2.0]),
            &Polynomial::new(&[-8.0, -1.0, 1.0]),
        );
        assert_eq!(re.coeffs(), &[-48.0, -8.0]);
        assert_eq!(im.coeffs(), &[-10.0, -2.0]);
    }

    #[test]
    fn linf_norm_first_order() {
        // g = 1/(s - 1): flat-topped at DC, norm 1.
        let (norm, w) = tf(&[1.0], &[-1.0, 1.0]).linf_norm().unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        assert_eq!(w, 0.0);
    }

    #[test]
    fn linf_norm_resonant_peak() {
        // g = 2(s - 5)/(s^2 - s + 8): interior peak.
        let (norm, w) = tf(&[-10.0, 2.0], &[8.0, -1.0, 1.0]).linf_norm().unwrap();
        assert!((1.0 / norm - 0.244).abs() < 0.005, "radius {}", 1.0 / norm);
        assert!((w - 2.76).abs() < 0.01, "peak {w}");
    }

    #[test]
    fn linf_norm_biproper_peak_at_infinity() {
        let (norm, w) = tf(&[1.0, 2.0], &[1.0, 1.0]).linf_norm().unwrap();
        assert_relative_eq!(norm, 2.0, epsilon = 1e-12);
        assert!(w.is_infinite());
    }

    #[test]
    fn linf_norm_rejects_axis_pole_and_improper() {
        assert!(matches!(
            tf(&[1.0], &[1.0, 0.0, 1.0]).linf_norm().unwrap_err(),
            XferError::PoleOnAxis(_)
        ));
        assert_eq!(
            tf(&[0.0, 0.0, 1.0], &[1.0, 1.0]).linf_norm().unwrap_err(),
            XferError::NotProper
        );
    }

    #[test]
    fn unstable_pole_listing() {
        let g = tf(&[-10.0, 2.0], &[8.0, -1.0, 1.0]);
        let p = g.unstable_poles();
        assert_eq!(p.len(), 2);
        assert_relative_eq!(p[0].re, 0.5, epsilon = 1e-12);
        assert!(tf(&[1.0], &[1.0, 1.0]).unstable_poles().is_empty());
    }

    #[test]
    fn parity_interlacing_cases() {
        // One real unstable pole between the zero at 0.5 and infinity.
        let bad = tf(&[-1.0, 2.0], &[-1.0, -1.0, 1.0]);
        assert!(!bad.pip_holds());
        // Complex unstable pair: nothing to interlace.
        let ok = tf(&[-3.0, 2.0], &[1.0, -1.0, 1.0]);
        assert!(ok.pip_holds());
        // Single zero at infinity only.
        assert!(tf(&[1.0], &[-1.0, 1.0]).pip_holds());
        // Zero at the origin counts as a right-half-axis zero.
        let origin_zero = tf(&[0.0, 2.0], &[-2.0, -1.0, 1.0]);
        assert!(!origin_zero.pip_holds());
    }

    #[test]
    fn nyquist_sampling_and_skipping() {
        let g = tf(&[1.0], &[1.0, 0.0, 1.0]);
        let c = nyquist(&g, "test", 0.0, 2.0, 5, GridScale::Linear);
        assert_eq!(c.skipped, vec![1.0]);
        assert_eq!(c.freqs.len(), 4);
        assert_eq!(c.freqs.len(), c.points.len());
        assert!(c.freqs.windows(2).all(|w| w[0] < w[1]));
        // Endpoint values match direct evaluation.
        let v = g.eval_jw(2.0).unwrap();
        let last = *c.points.last().unwrap();
        assert_relative_eq!(last.0, v.re, epsilon = 1e-15);
        assert_relative_eq!(last.1, v.im, epsilon = 1e-15);
    }

    #[test]
    fn nyquist_log_spacing_and_projection() {
        let g = tf(&[-10.0, 2.0], &[8.0, -1.0, 1.0]);
        let c = nyquist(&g, "g", 1e-2, 1e2, 33, GridScale::Log)
            .with_projection(&g, &g)
            .unwrap();
        let p = c.projection.as_ref().unwrap();
        assert!((p.omega - 2.76).abs() < 0.01);
        assert!((p.radius - 0.244).abs() < 0.005);
        let csv = c.to_csv();
        assert!(csv.contains("omega,re,im"));
        assert!(csv.starts_with("# g\n# projection omega="));
    }
}
