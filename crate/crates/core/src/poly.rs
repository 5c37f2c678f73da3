//! Dense real-coefficient polynomials: arithmetic, simultaneous-iteration
//! root finding and a Routh-table Hurwitz test.
//!
//! Coefficients are stored in ascending degree order, so `p.coeffs()[k]` is
//! the coefficient of `s^k`. Trailing zeros are trimmed on construction and
//! the zero polynomial is represented by a single `0.0` with undefined
//! degree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TAU_STAB;

#[derive(Debug, Error, PartialEq, Eq, Clone, Copy)]
pub enum PolyError {
    #[error("the zero polynomial has no roots and no stability verdict")]
    ZeroPolynomial,
    #[error("a nonzero constant has no roots")]
    ConstantPolynomial,
}

/// Univariate polynomial over the reals, ascending coefficient order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending-degree coefficients, trimming
    /// trailing zeros. An empty or all-zero list yields the zero polynomial.
    pub fn new(coeffs: &[f64]) -> Self {
        let mut c: Vec<f64> = coeffs.to_vec();
        while c.len() > 1 && c[c.len() - 1] == 0.0 {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Polynomial { coeffs: c }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    /// Monic product of `(s - r_k)` over the given roots. Complex roots must
    /// come in conjugate pairs (any residual imaginary part is dropped).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, &c) in acc.iter().enumerate() {
                next[k] -= c * r;
                next[k + 1] += c;
            }
            acc = next;
        }
        Polynomial::new(&acc.iter().map(|c| c.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of the highest power (0.0 for the zero polynomial).
    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    /// Horner evaluation at a real point.
    pub fn eval_real(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; n];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = self.coeffs.get(k).copied().unwrap_or(0.0)
                + other.coeffs.get(k).copied().unwrap_or(0.0);
        }
        Polynomial::new(&c)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(&c)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(&self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let c: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| k as f64 * a)
            .collect();
        Polynomial::new(&c)
    }

    /// Euclidean division: returns `(quotient, remainder)` with
    /// `self = quotient * divisor + remainder` and
    /// `deg(remainder) < deg(divisor)`.
    ///
    /// Panics if the divisor is the zero polynomial.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.coeffs.len() - 1;
        if self.is_zero() || self.coeffs.len() - 1 < dd {
            return (Polynomial::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let q = rem[k] / lead;
            quot[k - dd] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k - dd + j] -= q * dc;
            }
        }
        rem.truncate(dd.max(1));
        (Polynomial::new(&quot), Polynomial::new(&rem))
    }

    /// All complex roots. Real inputs produce conjugate-symmetric output:
    /// near-real roots are flattened onto the axis and complex roots are
    /// paired and averaged, then sorted by `(re, im)`.
    pub fn roots(&self) -> Result<Vec<Complex64>, PolyError> {
        match self.degree() {
            None => Err(PolyError::ZeroPolynomial),
            Some(0) => Err(PolyError::ConstantPolynomial),
            Some(_) => {
                let c: Vec<Complex64> = self
                    .coeffs
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect();
                let mut r = roots_complex(&c);
                symmetrize_conjugates(&mut r);
                r.sort_by(|a, b| {
                    a.re.partial_cmp(&b.re)
                        .unwrap()
                        .then(a.im.partial_cmp(&b.im).unwrap())
                });
                Ok(r)
            }
        }
    }

    /// Routh-table Hurwitz test: `true` only when every root lies strictly
    /// in the open left half plane. A zero or negative first-column entry
    /// (marginal or unstable) yields `false`; nonzero constants are
    /// vacuously Hurwitz.
    pub fn is_hurwitz(&self) -> Result<bool, PolyError> {
        let n = match self.degree() {
            None => return Err(PolyError::ZeroPolynomial),
            Some(0) => return Ok(true),
            Some(n) => n,
        };
        // Scale-normalize so the positivity threshold is dimensionless, and
        // orient the leading coefficient positive (roots are unaffected).
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let sgn = if self.leading() < 0.0 { -1.0 } else { 1.0 };
        let c: Vec<f64> = self.coeffs.iter().map(|x| sgn * x / scale).collect();

        // First two rows hold the coefficients in descending order, split by
        // parity of the power.
        let width = n / 2 + 1;
        let mut above: Vec<f64> = (0..width).map(|j| pick(&c, n, 2 * j)).collect();
        let mut cur: Vec<f64> = (0..width).map(|j| pick(&c, n, 2 * j + 1)).collect();
        if above[0] <= TAU_STAB {
            return Ok(false);
        }
        for _ in 0..n {
            if cur[0] <= TAU_STAB {
                return Ok(false);
            }
            let mut next = vec![0.0; width];
            for j in 0..width - 1 {
                next[j] = (cur[0] * above[j + 1] - above[0] * cur[j + 1]) / cur[0];
            }
            above = cur;
            cur = next;
        }
        Ok(true)
    }
}

/// Coefficient of `s^(n-k)` or zero past the end.
fn pick(ascending: &[f64], n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ascending[n - k]
    }
}

/// Roots of a complex-coefficient polynomial (ascending order, leading
/// coefficient nonzero after trailing-zero trim). Closed forms for degrees
/// one and two, Aberth-Ehrlich simultaneous iteration above that.
pub(crate) fn roots_complex(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c[c.len() - 1].norm() == 0.0 {
        c.pop();
    }
    let mut out = Vec::new();
    // Factor out roots at the origin so the iteration starts with c0 != 0.
    let mut lo = 0;
    while lo < c.len() - 1 && c[lo].norm() == 0.0 {
        out.push(Complex64::new(0.0, 0.0));
        lo += 1;
    }
    let c = &c[lo..];
    match c.len() {
        0 | 1 => {}
        2 => out.push(-c[0] / c[1]),
        3 => out.extend(quadratic_roots(c[0], c[1], c[2])),
        _ => out.extend(aberth(c)),
    }
    out
}

/// Numerically stable complex quadratic formula for `c + b s + a s^2`.
pub(crate) fn quadratic_roots(c: Complex64, b: Complex64, a: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation in b +/- disc.
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        [Complex64::new(0.0, 0.0), -b / a]
    } else {
        [q / a, c / q]
    }
}

fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };

    // Start on a circle slightly outside the Cauchy root bound, with an
    // angular offset that breaks conjugate symmetry.
    let bound = 1.0 + monic.iter().take(n).fold(0.0f64, |m, c| m.max(c.norm()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.41;
            bound * Complex64::new(th.cos(), th.sin())
        })
        .collect();

    for _ in 0..300 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 {
                p / dp
            } else {
                Complex64::new(1e-12, 1e-12)
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 1e-300 {
                        sum += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[k] -= step;
            worst = worst.max(step.norm() / (1.0 + z[k].norm()));
        }
        if worst < 1e-14 {
            break;
        }
    }
    // A couple of plain Newton sweeps sharpen simple roots to full precision.
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zk);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.norm() < 1.0 + zk.norm() {
                    *zk -= step;
                }
            }
        }
    }
    z
}

/// Enforces conjugate symmetry on the root set of a real polynomial: tiny
/// imaginary parts collapse onto the real axis and genuine complex roots are
/// greedily paired with their mirror and averaged.
fn symmetrize_conjugates(roots: &mut [Complex64]) {
    let mut used = vec![false; roots.len()];
    for k in 0..roots.len() {
        if used[k] {
            continue;
        }
        if roots[k].im.abs() <= 1e-10 * (1.0 + roots[k].re.abs()) {
            roots[k].im = 0.0;
            used[k] = true;
            continue;
        }
        let target = roots[k].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in k + 1..roots.len() {
            if used[j] || roots[j].im * roots[k].im > 0.0 {
                continue;
            }
            let d = (roots[j] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            let m = 0.5 * (roots[k] + roots[j].conj());
            roots[k] = m;
            roots[j] = m.conj();
            used[k] = true;
            used[j] = true;
        } else {
            // No partner: the imaginary part is spurious.
            roots[k].im = 0.0;
            used[k] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c)
    }

    #[test]
    fn trims_trailing_zeros_and_normalizes_zero() {
        assert_eq!(p(&[1.0, 2.0, 0.0, 0.0]).coeffs(), &[1.0, 2.0]);
        assert_eq!(p(&[0.0, 0.0]).coeffs(), &[0.0]);
        assert_eq!(p(&[]).coeffs(), &[0.0]);
        assert_eq!(p(&[0.0]).degree(), None);
        assert_eq!(p(&[3.0]).degree(), Some(0));
        assert_eq!(p(&[1.0, 0.0, 2.0]).degree(), Some(2));
    }

    #[test]
    fn evaluates_by_horner() {
        // s^2 + s - 2 at s = j is -3 + j.
        let q = p(&[-2.0, 1.0, 1.0]);
        let v = q.eval(Complex64::new(0.0, 1.0));
        assert_relative_eq!(v.re, -3.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 1.0, epsilon = 1e-15);
        assert_relative_eq!(q.eval_real(2.0), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn arithmetic_matches_expansion() {
        let a = p(&[1.0, 1.0]); // 1 + s
        let b = p(&[-2.0, 0.0, 1.0]); // s^2 - 2
        assert_eq!(a.mul(&b).coeffs(), &[-2.0, -2.0, 1.0, 1.0]);
        assert_eq!(a.add(&b).coeffs(), &[-1.0, 1.0, 1.0]);
        assert_eq!(b.sub(&b).coeffs(), &[0.0]);
        assert_eq!(b.derivative().coeffs(), &[0.0, 2.0]);
        assert_eq!(a.scale(3.0).coeffs(), &[3.0, 3.0]);
    }

    #[test]
    fn division_recomposes() {
        // (s^2 + 0.25)(s + 1) + (0.5 - s)
        let d = p(&[0.25, 0.0, 1.0]);
        let q = p(&[1.0, 1.0]);
        let r = p(&[0.5, -1.0]);
        let f = d.mul(&q).add(&r);
        let (qq, rr) = f.div_rem(&d);
        for (a, b) in qq.coeffs().iter().zip(q.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        for (a, b) in rr.coeffs().iter().zip(r.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn quadratic_roots_match_closed_form() {
        // s^2 - s + 8: roots 0.5 +/- j sqrt(31)/2.
        let r = p(&[8.0, -1.0, 1.0]).roots().unwrap();
        let im = 31.0_f64.sqrt() / 2.0;
        assert_relative_eq!(r[0].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r[0].im, -im, epsilon = 1e-12);
        assert_relative_eq!(r[1].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r[1].im, im, epsilon = 1e-12);
    }

    #[test]
    fn roots_of_factored_quartic() {
        // (s+1)(s-2)(s^2 + 2s + 5): roots -1, 2, -1 +/- 2j.
        let f = p(&[1.0, 1.0]).mul(&p(&[-2.0, 1.0])).mul(&p(&[5.0, 2.0, 1.0]));
        let r = f.roots().unwrap();
        let mut reals: Vec<f64> = r.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(reals.len(), 2);
        assert_relative_eq!(reals[0], -1.0, epsilon = 1e-9);
        assert_relative_eq!(reals[1], 2.0, epsilon = 1e-9);
        let pair: Vec<&Complex64> = r.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(pair.len(), 2);
        assert_relative_eq!(pair[0].re, -1.0, epsilon = 1e-9);
        assert_relative_eq!(pair[0].im.abs(), 2.0, epsilon = 1e-9);
        assert_eq!(*pair[0], pair[1].conj());
    }

    #[test]
    fn roots_residuals_stay_small() {
        // Random-ish degree-6 polynomial with desk-scale coefficients.
        let f = p(&[3.0, -1.5, 0.25, 7.0, -2.0, 0.5, 1.0]);
        let scale = 1.0 + 7.0;
        for z in f.roots().unwrap() {
            assert!(f.eval(z).norm() <= 1e-8 * scale, "residual too big at {z}");
        }
    }

    #[test]
    fn roots_handle_origin_and_degenerate_input() {
        let r = p(&[0.0, 0.0, 1.0]).roots().unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|z| z.norm() < 1e-12));
        assert_eq!(p(&[0.0]).roots().unwrap_err(), PolyError::ZeroPolynomial);
        assert_eq!(p(&[4.0]).roots().unwrap_err(), PolyError::ConstantPolynomial);
    }

    #[test]
    fn from_roots_round_trips() {
        let roots = [
            Complex64::new(-1.0, 2.0),
            Complex64::new(-1.0, -2.0),
            Complex64::new(0.5, 0.0),
        ];
        let f = Polynomial::from_roots(&roots);
        // (s^2 + 2s + 5)(s - 0.5)
        let want = p(&[5.0, 2.0, 1.0]).mul(&p(&[-0.5, 1.0]));
        for (a, b) in f.coeffs().iter().zip(want.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn hurwitz_on_known_cases() {
        // (s+1)(s+2)(s+3) = s^3 + 6s^2 + 11s + 6.
        assert!(p(&[6.0, 11.0, 6.0, 1.0]).is_hurwitz().unwrap());
        // One RHP root.
        assert!(!p(&[-2.0, 1.0, 1.0]).is_hurwitz().unwrap());
        // Marginal pair at +/- j: s^2 + 1.
        assert!(!p(&[1.0, 0.0, 1.0]).is_hurwitz().unwrap());
        // Negative leading coefficient, same (stable) roots: -(s+1).
        assert!(p(&[-1.0, -1.0]).is_hurwitz().unwrap());
        // Degree zero is vacuously Hurwitz; zero polynomial is an error.
        assert!(p(&[5.0]).is_hurwitz().unwrap());
        assert_eq!(p(&[0.0]).is_hurwitz().unwrap_err(), PolyError::ZeroPolynomial);
    }

    #[test]
    fn hurwitz_agrees_with_roots_on_seeded_products() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..500 {
            // Product of real and quadratic factors with root real parts
            // bounded away from the axis.
            let mut f = p(&[1.0]);
            let mut any_rhp = false;
            for _ in 0..rng.gen_range(1..=3) {
                if rng.gen_bool(0.5) {
                    let mu: f64 = rng.gen_range(0.01..4.0);
                    let sgn = if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
                    any_rhp |= sgn < 0.0;
                    f = f.mul(&p(&[sgn * mu, 1.0]));
                } else {
                    let re: f64 = rng.gen_range(0.01..3.0);
                    let im: f64 = rng.gen_range(0.0..3.0);
                    let sgn = if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
                    any_rhp |= sgn < 0.0;
                    // (s - (re,im))(s - (re,-im)) with re sign-flipped into
                    // the chosen half plane.
                    f = f.mul(&p(&[re * re + im * im, 2.0 * sgn * re, 1.0]));
                }
            }
            let hurwitz = f.is_hurwitz().unwrap();
            assert_eq!(hurwitz, !any_rhp, "coeffs {:?}", f.coeffs());
            let max_re = f
                .roots()
                .unwrap()
                .iter()
                .fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
            assert_eq!(hurwitz, max_re < 0.0);
        }
    }
}
