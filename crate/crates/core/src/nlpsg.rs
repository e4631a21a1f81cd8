//! Success constraints of the nonlinear sign gate and its optimal operating
//! point.
//!
//! A scattering matrix `S` implements the gate when the heralded amplitudes
//! of zero, one and two photons share a common factor `β` up to the sign flip
//! on the two-photon term:
//!
//! ```text
//! β0 = S22
//! β1 = S11·S22 + S21·S12
//! β2 = -S11·(S11·S22 + 2·S21·S12)
//! ```
//!
//! Equal candidates force `S11 = 1 - √2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{closed_form_resonant, ScatteringMatrix};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Optimal effective transmission of the outer rings, `sqrt(2(√2 - 1))`.
pub const T_OUTER: f64 = 0.910_179_721_124_454_8;

/// Optimal effective transmission of the middle ring, `(1 + 2√2)/7`.
pub const T_MIDDLE: f64 = 0.546_918_160_678_027_2;

/// Reflection amplitude of mode 1 required by the constraints.
pub const S11_TARGET: f64 = 1.0 - SQRT_2;

/// Constant `4(3√2 - 4)` bounding `t1²` on the optimal line.
pub const T1_SQ_MAX: f64 = 4.0 * (3.0 * SQRT_2 - 4.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlpsgVerdict {
    pub beta0: Complex64,
    pub beta1: Complex64,
    pub beta2: Complex64,
    /// Largest pairwise `|βi - βj|`.
    pub residual: f64,
    /// Largest pairwise `||βi| - |βj||`.
    pub magnitude_residual: f64,
    pub s11: Complex64,
    /// `|S11 - (1 - √2)|`.
    pub s11_residual: f64,
    /// `||S11| - (√2 - 1)|`.
    pub s11_magnitude_residual: f64,
    /// `|β0|²`.
    pub success_probability: f64,
    /// `½|S21|²|S12|²`, equal to the success probability when the
    /// constraints hold.
    pub cross_check: f64,
}

impl NlpsgVerdict {
    pub fn betas(&self) -> [Complex64; 3] {
        [self.beta0, self.beta1, self.beta2]
    }

    /// All three candidates equal and `S11 = 1 - √2`.
    pub fn satisfied(&self, tol: f64) -> bool {
        self.residual < tol && self.s11_residual < tol
    }

    /// Constraints judged by magnitudes only, which admits a complex common
    /// factor when the rings run off resonance.
    pub fn satisfied_up_to_phase(&self, tol: f64) -> bool {
        self.magnitude_residual < tol && self.s11_magnitude_residual < tol
    }
}

fn max_pairwise(v: [f64; 3]) -> f64 {
    (v[0] - v[1])
        .abs()
        .max((v[1] - v[2]).abs())
        .max((v[0] - v[2]).abs())
}

pub fn verdict(s: &ScatteringMatrix) -> Result<NlpsgVerdict> {
    if s.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: s.dim(),
        });
    }
    let e = |i: usize, j: usize| s.get(i - 1, j - 1);
    let beta0 = e(2, 2);
    let beta1 = e(1, 1) * e(2, 2) + e(2, 1) * e(1, 2);
    let beta2 = -e(1, 1) * (e(1, 1) * e(2, 2) + 2.0 * e(2, 1) * e(1, 2));
    let residual = (beta0 - beta1)
        .norm()
        .max((beta1 - beta2).norm())
        .max((beta0 - beta2).norm());
    let magnitude_residual = max_pairwise([beta0.norm(), beta1.norm(), beta2.norm()]);
    let s11 = e(1, 1);
    Ok(NlpsgVerdict {
        beta0,
        beta1,
        beta2,
        residual,
        magnitude_residual,
        s11,
        s11_residual: (s11 - S11_TARGET).norm(),
        s11_magnitude_residual: (s11.norm() - (SQRT_2 - 1.0)).abs(),
        success_probability: beta0.norm_sqr(),
        cross_check: 0.5 * e(2, 1).norm_sqr() * e(1, 2).norm_sqr(),
    })
}

/// Effective transmissions of the three rings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl OptimalPoint {
    pub fn closed_form() -> Self {
        Self {
            t1: (2.0 * (SQRT_2 - 1.0)).sqrt(),
            t2: (1.0 + 2.0 * SQRT_2) / 7.0,
            t3: (2.0 * (SQRT_2 - 1.0)).sqrt(),
        }
    }

    /// Maximize the success probability over `t1`, take `t3` from the optimal
    /// line, then solve the gate constraints on the resonant scattering
    /// matrix for `(t2, t3)` by Newton iteration.
    pub fn numerical() -> Result<Self> {
        let (t1, _) = optimize_t1(BetaFormula::Full);
        let (t2, t3) = solve_t2_t3(t1, 0.5, t3_of_t1(t1)?)?;
        Ok(Self { t1, t2, t3 })
    }

    pub fn scattering(&self) -> Result<ScatteringMatrix> {
        closed_form_resonant(self.t1, self.t2, self.t3)
    }
}

/// Real residuals `(S11 - (1-√2), β1 - β0)` of a resonant network.
fn resonant_residuals(t1: f64, t2: f64, t3: f64) -> Result<[f64; 2]> {
    let v = verdict(&closed_form_resonant(t1, t2, t3)?)?;
    Ok([v.s11.re - S11_TARGET, (v.beta1 - v.beta0).re])
}

fn solve_t2_t3(t1: f64, mut t2: f64, mut t3: f64) -> Result<(f64, f64)> {
    const H: f64 = 1e-7;
    for _ in 0..50 {
        let f = resonant_residuals(t1, t2, t3)?;
        if f[0].abs().max(f[1].abs()) < 1e-15 {
            return Ok((t2, t3));
        }
        let d2 = resonant_residuals(t1, t2 + H, t3)?;
        let d2m = resonant_residuals(t1, t2 - H, t3)?;
        let d3 = resonant_residuals(t1, t2, t3 + H)?;
        let d3m = resonant_residuals(t1, t2, t3 - H)?;
        let j = [
            [(d2[0] - d2m[0]) / (2.0 * H), (d3[0] - d3m[0]) / (2.0 * H)],
            [(d2[1] - d2m[1]) / (2.0 * H), (d3[1] - d3m[1]) / (2.0 * H)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dt2 = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dt3 = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let step_norm = dt2.abs().max(dt3.abs());
        t2 = (t2 - dt2).clamp(-0.999_999, 0.999_999);
        t3 = (t3 - dt3).clamp(-0.999_999, 0.999_999);
        if step_norm < 1e-16 {
            return Ok((t2, t3));
        }
    }
    let f = resonant_residuals(t1, t2, t3)?;
    if f[0].abs().max(f[1].abs()) < 1e-13 {
        Ok((t2, t3))
    } else {
        Err(Error::Pole(format!(
            "constraint solve for t2, t3 did not converge (residuals {f:?})"
        )))
    }
}

fn check_t1(t1: f64) -> Result<f64> {
    if t1.is_finite() && t1.abs() < 1.0 && t1 * t1 <= T1_SQ_MAX {
        Ok(t1)
    } else {
        Err(Error::Domain {
            name: "t1",
            value: t1,
            range: "t1² ≤ 4(3√2 - 4)",
        })
    }
}

/// `t3` keeping the gate on its optimal line for a given `t1`:
/// `t3² = (4(3√2-4) - t1²)/(1 - t1²)`.
pub fn t3_of_t1(t1: f64) -> Result<f64> {
    let t1 = check_t1(t1)?;
    Ok(((T1_SQ_MAX - t1 * t1) / (1.0 - t1 * t1)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaFormula {
    /// `(1+√2)(12√2 - 16 - t²)t² / (16(1 - t²))`, peaking at `(√2-1)/4`.
    /// Lacks one factor of `(1+√2)`.
    Reduced,
    /// `Reduced` times `(1+√2)`; equals `|S22|²` on the optimal line.
    Full,
}

impl BetaFormula {
    fn prefactor(self) -> f64 {
        match self {
            BetaFormula::Reduced => (1.0 + SQRT_2) / 16.0,
            BetaFormula::Full => (1.0 + SQRT_2) * (1.0 + SQRT_2) / 16.0,
        }
    }
}

/// Success probability along the optimal line as a function of `t1`.
pub fn beta_sq_of_t1(t1: f64, formula: BetaFormula) -> Result<f64> {
    let t1 = check_t1(t1)?;
    let u = t1 * t1;
    Ok(formula.prefactor() * (T1_SQ_MAX - u) * u / (1.0 - u))
}

/// `d/dt1` of [`beta_sq_of_t1`].
pub fn beta_sq_derivative(t1: f64, formula: BetaFormula) -> Result<f64> {
    let t1 = check_t1(t1)?;
    let u = t1 * t1;
    let du = (T1_SQ_MAX - 2.0 * u + u * u) / ((1.0 - u) * (1.0 - u));
    Ok(formula.prefactor() * du * 2.0 * t1)
}

/// Maximizer and maximum of [`beta_sq_of_t1`] over `t1 ∈ [0, sqrt(4(3√2-4))]`.
///
/// A golden-section search brackets the peak, then the sign change of the
/// analytic derivative is bisected to full precision.
pub fn optimize_t1(formula: BetaFormula) -> (f64, f64) {
    let f = |t: f64| beta_sq_of_t1(t, formula).expect("search stays in the domain");
    let df = |t: f64| beta_sq_derivative(t, formula).expect("search stays in the domain");
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;

    let (mut a, mut b) = (0.0, T1_SQ_MAX.sqrt());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-6 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }

    // widen until the derivative changes sign across the bracket
    let (mut lo, mut hi) = (a, b);
    while df(lo) <= 0.0 && lo > 1e-3 {
        lo -= 1e-3;
    }
    while df(hi) >= 0.0 && hi < T1_SQ_MAX.sqrt() - 1e-3 {
        hi += 1e-3;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if df(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}
