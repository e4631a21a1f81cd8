//! Parameter sets of the three rings that keep the gate at its optimal
//! success probability.
//!
//! On resonance a ring only needs the right effective transmission, which
//! leaves a curve `η(τ)` per ring. Off resonance the outer rings need
//! `|A| = T` (a surface in `(η, τ, θ)`), while the single feedback loop of
//! the network (through rings 1, 3 and 2) must stay phase neutral. For the
//! outer rings that is arranged through the phase partition; for the middle
//! ring it requires `arg A2 = -δ2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{scattering_matrix, NetworkParams};
use crate::nlpsg::{verdict, NlpsgVerdict, T_MIDDLE, T_OUTER};
use crate::ring::{
    default_partition, effective_coupling, invert_effective, reduce_phase, wrap_phase, RingCoupler,
    RingSlot,
};

pub const CURVE_GRID_POINTS: usize = 401;
pub const CURVE_TAU_MAX: f64 = 0.999;
pub const SURFACE_GRID_POINTS: usize = 101;

pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const NEWTON_TOLERANCE: f64 = 1e-12;

/// `|A|` below which the phase of `A` is treated as undefined.
const PHASE_FLOOR: f64 = 1e-12;

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn default_tau_grid() -> Vec<f64> {
    linspace(0.0, CURVE_TAU_MAX, CURVE_GRID_POINTS)
}

/// Optimal effective transmission of a ring slot.
pub fn slot_target(slot: RingSlot) -> f64 {
    match slot {
        RingSlot::Middle => T_MIDDLE,
        RingSlot::First | RingSlot::Last => T_OUTER,
    }
}

/// Through amplitude `A = (η - τe^{-iθ}) / (1 - ητe^{-iθ})` of a ring in its
/// own coupler order.
pub fn ring_a(eta: f64, tau: f64, theta: f64) -> Result<Complex64> {
    Ok(RingCoupler::new(tau, eta, theta, None)?.transfer().a)
}

/// `arg A` in `(-π, π]`.
pub fn ring_phase_arg(eta: f64, tau: f64, theta: f64) -> Result<f64> {
    let a = ring_a(eta, tau, theta)?;
    if a.norm() < PHASE_FLOOR {
        return Err(Error::UndefinedPhase(a.norm()));
    }
    Ok(a.arg())
}

/// Phase partition that keeps the ring's coupling element on the feedback
/// loop real and positive. The middle ring enters the loop through its
/// through amplitude only and keeps the symmetric partition.
pub fn loop_neutral_partition(slot: RingSlot, tau: f64, eta: f64, theta: f64) -> Result<f64> {
    let den = RingCoupler::new(tau, eta, theta, None)?.denominator();
    Ok(match slot {
        RingSlot::First => theta - PI + den.arg(),
        RingSlot::Last => PI - den.arg(),
        RingSlot::Middle => default_partition(theta),
    })
}

/// Ring with its loop-neutral partition.
pub fn neutral_ring(slot: RingSlot, tau: f64, eta: f64, theta: f64) -> Result<RingCoupler> {
    let phi = loop_neutral_partition(slot, tau, eta, theta)?;
    RingCoupler::new(tau, eta, theta, Some(phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|A| - T`.
    pub magnitude: f64,
    /// `arg A + δ`, wrapped; only constrained for the middle ring.
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSample {
    pub slot: RingSlot,
    pub target: f64,
    pub tau: f64,
    pub eta: f64,
    pub theta: f64,
    pub delta: f64,
    /// `arg A`.
    pub theta_a: f64,
    pub residuals: Residuals,
}

impl ManifoldSample {
    fn evaluate(
        slot: RingSlot,
        target: f64,
        tau: f64,
        eta: f64,
        theta: f64,
        delta: f64,
    ) -> Result<Self> {
        let a = ring_a(eta, tau, theta)?;
        if a.norm() < PHASE_FLOOR {
            return Err(Error::UndefinedPhase(a.norm()));
        }
        let phase = match slot {
            RingSlot::Middle => Some(wrap_phase(a.arg() + delta)),
            RingSlot::First | RingSlot::Last => None,
        };
        Ok(Self {
            slot,
            target,
            tau,
            eta,
            theta,
            delta,
            theta_a: a.arg(),
            residuals: Residuals {
                magnitude: a.norm() - target,
                phase,
            },
        })
    }

    pub fn ring(&self) -> Result<RingCoupler> {
        neutral_ring(self.slot, self.tau, self.eta, self.theta)
    }

    /// Full network with this ring in its slot and the other two rings at
    /// their optimal resonant point with `τ = 0`.
    pub fn network(&self) -> Result<NetworkParams> {
        let mut rings = [RingCoupler::resonant(0.0, 0.0)?; 3];
        let mut deltas = [0.0; 3];
        for slot in RingSlot::ALL {
            rings[slot.index()] = if slot == self.slot {
                self.ring()?
            } else {
                RingCoupler::resonant(0.0, slot_target(slot))?
            };
        }
        deltas[self.slot.index()] = self.delta;
        Ok(NetworkParams::new(rings, deltas))
    }

    pub fn verdict(&self) -> Result<NlpsgVerdict> {
        verdict(&scattering_matrix(&self.network()?)?)
    }
}

/// Resonant ring realising effective transmission `target` for each `τ` of
/// the grid, `η = (T + τ)/(1 + Tτ)`.
pub fn curve_eta_of_tau(
    slot: RingSlot,
    target: f64,
    tau_grid: &[f64],
) -> Vec<Result<ManifoldSample>> {
    tau_grid
        .par_iter()
        .map(|&tau| {
            let eta = invert_effective(target, tau)?;
            let t = effective_coupling(tau, eta)?.t;
            let sample = ManifoldSample::evaluate(slot, target, tau, eta, 0.0, 0.0)?;
            debug_assert!((t - target).abs() < 1e-9);
            Ok(sample)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSolutions {
    /// Round-trip phases in `[0, 2π)`, ascending.
    Points(Vec<f64>),
    /// `|A|` does not depend on `θ` and already equals `T`.
    Continuum,
}

/// Round-trip phases with `|A(η, τ, θ)| = T`:
/// `cos θ = (η² + τ² - T² - T²η²τ²) / (2ητ(1 - T²))`.
pub fn surface_theta(target: f64, eta: f64, tau: f64) -> Result<ThetaSolutions> {
    RingCoupler::new(tau, eta, 0.0, None)?;
    let t2 = target * target;
    if eta * tau == 0.0 {
        let a2 = (eta * eta + tau * tau) / (1.0 + eta * eta * tau * tau);
        return Ok(if (a2 - t2).abs() < 1e-12 {
            ThetaSolutions::Continuum
        } else {
            ThetaSolutions::Points(vec![])
        });
    }
    if t2 >= 1.0 {
        return Err(Error::Domain {
            name: "T",
            value: target,
            range: "(-1, 1)",
        });
    }
    let mut cos =
        (eta * eta + tau * tau - t2 - t2 * eta * eta * tau * tau) / (2.0 * eta * tau * (1.0 - t2));
    if cos.abs() > 1.0 {
        if cos.abs() - 1.0 > 1e-12 {
            return Ok(ThetaSolutions::Points(vec![]));
        }
        cos = cos.signum();
    }
    let theta = cos.acos();
    let mut points = vec![reduce_phase(theta)];
    let mirror = reduce_phase(TAU - theta);
    if (mirror - points[0]).abs() > 1e-15 {
        points.push(mirror);
    }
    points.sort_by(f64::total_cmp);
    Ok(ThetaSolutions::Points(points))
}

/// Samples of the off-resonance surface of one outer ring over an `(η, τ)`
/// grid, in grid order (`τ` outer, `η` inner, then ascending `θ`). Grid
/// points without a solution or on the `ητ = 0` lines are skipped; the count
/// of skipped degenerate points is returned alongside.
pub fn surface_samples(
    slot: RingSlot,
    target: f64,
    eta_grid: &[f64],
    tau_grid: &[f64],
) -> Result<(Vec<ManifoldSample>, usize)> {
    let rows: Vec<Result<(Vec<ManifoldSample>, usize)>> = tau_grid
        .par_iter()
        .map(|&tau| {
            let mut samples = Vec::new();
            let mut degenerate = 0;
            for &eta in eta_grid {
                match surface_theta(target, eta, tau)? {
                    ThetaSolutions::Continuum => degenerate += 1,
                    ThetaSolutions::Points(thetas) => {
                        for theta in thetas {
                            samples.push(ManifoldSample::evaluate(
                                slot, target, tau, eta, theta, 0.0,
                            )?);
                        }
                    }
                }
            }
            Ok((samples, degenerate))
        })
        .collect();
    let mut samples = Vec::new();
    let mut degenerate = 0;
    for row in rows {
        let (s, d) = row?;
        samples.extend(s);
        degenerate += d;
    }
    Ok((samples, degenerate))
}

/// Outer ring parameters `(τ, η, θ)` for an off-resonance network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterRing {
    pub tau: f64,
    pub eta: f64,
    pub theta: f64,
}

/// Network with both outer rings off resonance on loop-neutral partitions
/// and the middle ring resonant on its optimal curve at `tau2`.
pub fn off_resonance_network(
    ring1: OuterRing,
    ring3: OuterRing,
    tau2: f64,
) -> Result<NetworkParams> {
    let eta2 = invert_effective(T_MIDDLE, tau2)?;
    Ok(NetworkParams::new(
        [
            neutral_ring(RingSlot::First, ring1.tau, ring1.eta, ring1.theta)?,
            RingCoupler::resonant(tau2, eta2)?,
            neutral_ring(RingSlot::Last, ring3.tau, ring3.eta, ring3.theta)?,
        ],
        [0.0; 3],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffResonanceReport {
    pub verdict: NlpsgVerdict,
    /// `arg A` of rings 1 and 3.
    pub theta_a: [f64; 2],
    /// `-(θ_A1 + θ_A3)`, wrapped.
    pub expected_phase: f64,
    pub beta_phase: f64,
    /// `|arg β0 - expected_phase|`, wrapped.
    pub phase_residual: f64,
}

pub fn off_resonance_check(params: &NetworkParams) -> Result<OffResonanceReport> {
    let v = verdict(&scattering_matrix(params)?)?;
    let arg = |slot: RingSlot| {
        let r = params.ring(slot);
        ring_phase_arg(r.eta(), r.tau(), r.theta())
    };
    let theta_a = [arg(RingSlot::First)?, arg(RingSlot::Last)?];
    let expected_phase = wrap_phase(-(theta_a[0] + theta_a[1]));
    let beta_phase = v.beta0.arg();
    Ok(OffResonanceReport {
        verdict: v,
        theta_a,
        expected_phase,
        beta_phase,
        phase_residual: wrap_phase(beta_phase - expected_phase).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionFailure {
    pub tau: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionTrace {
    pub delta2: f64,
    pub samples: Vec<ManifoldSample>,
    pub failures: Vec<IntersectionFailure>,
}

struct NewtonOutcome {
    eta: f64,
    theta: f64,
}

fn middle_residual(
    tau: f64,
    eta: f64,
    theta: f64,
    target: f64,
    delta: f64,
) -> Option<([f64; 2], Complex64)> {
    let e = Complex64::from_polar(1.0, -theta);
    let den = 1.0 - eta * tau * e;
    if den.norm() < 1e-14 {
        return None;
    }
    let a = (eta - tau * e) / den;
    if a.norm() < PHASE_FLOOR {
        return None;
    }
    Some(([a.norm() - target, wrap_phase(a.arg() + delta)], a))
}

/// Damped Newton on `(|A| - T, arg A + δ)` over `(η, θ)` at fixed `τ`.
fn newton_middle(
    tau: f64,
    target: f64,
    delta: f64,
    seed: (f64, f64),
) -> std::result::Result<NewtonOutcome, String> {
    let (mut eta, mut theta) = seed;
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    let (mut f, mut a) = middle_residual(tau, eta, theta, target, delta)
        .ok_or("seed sits on a pole or a zero of A")?;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if norm(f) < NEWTON_TOLERANCE {
            return Ok(NewtonOutcome { eta, theta });
        }
        let e = Complex64::from_polar(1.0, -theta);
        let n = eta - tau * e;
        let dn = 1.0 - eta * tau * e;
        let da_deta = (dn + tau * e * n) / (dn * dn);
        let da_dtheta = Complex64::i() * tau * e * (dn - eta * n) / (dn * dn);
        let mag = a.norm();
        let grad = |d: Complex64| {
            let w = a.conj() * d;
            (w.re / mag, w.im / (mag * mag))
        };
        let (m_eta, p_eta) = grad(da_deta);
        let (m_theta, p_theta) = grad(da_dtheta);
        let det = m_eta * p_theta - m_theta * p_eta;
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(format!("singular Jacobian at eta = {eta}, theta = {theta}"));
        }
        let d_eta = (f[0] * p_theta - f[1] * m_theta) / det;
        let d_theta = (m_eta * f[1] - p_eta * f[0]) / det;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let eta_new = eta - step * d_eta;
            let theta_new = wrap_phase(theta - step * d_theta);
            if eta_new > 0.0 && eta_new < 1.0 {
                if let Some((f_new, a_new)) =
                    middle_residual(tau, eta_new, theta_new, target, delta)
                {
                    if norm(f_new) < norm(f) || norm(f_new) < NEWTON_TOLERANCE {
                        eta = eta_new;
                        theta = theta_new;
                        f = f_new;
                        a = a_new;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            if norm(f) < 1e-10 {
                // round-off floor reached; let the caller's check decide
                return Ok(NewtonOutcome { eta, theta });
            }
            return Err(format!("line search stalled at residual {:e}", norm(f)));
        }
    }
    if norm(f) < NEWTON_TOLERANCE {
        Ok(NewtonOutcome { eta, theta })
    } else {
        Err(format!(
            "no convergence after {NEWTON_MAX_ITERATIONS} iterations (residual {:e})",
            norm(f)
        ))
    }
}

/// Walk `δ` from zero, where the curve point is known exactly, up to `delta`.
fn homotopy_middle(
    tau: f64,
    target: f64,
    delta: f64,
) -> std::result::Result<NewtonOutcome, String> {
    const STEPS: usize = 32;
    let eta0 = invert_effective(target, tau).map_err(|e| e.to_string())?;
    let mut seed = (eta0, 0.0);
    let mut last = None;
    for k in 1..=STEPS {
        let d = delta * k as f64 / STEPS as f64;
        let out = newton_middle(tau, target, d, seed)?;
        seed = (out.eta, out.theta);
        last = Some(out);
    }
    last.ok_or_else(|| "empty homotopy".to_string())
}

/// Middle-ring parameters with `|A2| = T2` and `arg A2 = -δ2` for each `τ2`
/// in the grid. Points where the solver fails are listed, not filled in.
pub fn intersect_delta2(delta2: f64, tau_grid: &[f64]) -> IntersectionTrace {
    let target = T_MIDDLE;
    let mut samples: Vec<ManifoldSample> = Vec::new();
    let mut failures = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    for &tau in tau_grid {
        if !(tau > 0.0 && tau < 1.0) {
            failures.push(IntersectionFailure {
                tau,
                reason: "tau2 outside (0, 1)".into(),
            });
            continue;
        }
        let solved = previous
            .ok_or_else(String::new)
            .and_then(|seed| newton_middle(tau, target, delta2, seed))
            .or_else(|_| homotopy_middle(tau, target, delta2));
        let outcome = solved.and_then(|out| {
            ManifoldSample::evaluate(
                RingSlot::Middle,
                target,
                tau,
                out.eta,
                reduce_phase(out.theta),
                delta2,
            )
            .map_err(|e| e.to_string())
        });
        match outcome {
            Ok(sample)
                if sample.residuals.magnitude.abs() < 1e-9
                    && sample.residuals.phase.is_some_and(|p| p.abs() < 1e-9) =>
            {
                previous = Some((sample.eta, wrap_phase(sample.theta)));
                samples.push(sample);
            }
            Ok(sample) => {
                previous = None;
                failures.push(IntersectionFailure {
                    tau,
                    reason: format!("residuals too large: {:?}", sample.residuals),
                });
            }
            Err(reason) => {
                previous = None;
                failures.push(IntersectionFailure { tau, reason });
            }
        }
    }
    IntersectionTrace {
        delta2,
        samples,
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compensation {
    pub delta1: f64,
    pub delta3: f64,
    pub verdict: NlpsgVerdict,
}

fn compensation_objective(v: &NlpsgVerdict) -> f64 {
    v.residual.max(v.s11_residual)
}

/// Scan `δ1` (keeping `δ3`) for the value that makes the complex gate
/// constraints hold, refining the best grid point by golden-section search.
pub fn compensate_outer_phases(params: &NetworkParams) -> Result<Compensation> {
    const SCAN: usize = 720;
    let delta3 = params.deltas[2];
    let evaluate = |d1: f64| -> Result<NlpsgVerdict> {
        let p = params.with_deltas([d1, params.deltas[1], delta3]);
        verdict(&scattering_matrix(&p)?)
    };
    let scan: Vec<Result<(f64, f64)>> = linspace(-PI, PI, SCAN + 1)
        .into_par_iter()
        .map(|d| evaluate(d).map(|v| (d, compensation_objective(&v))))
        .collect();
    let mut best = (0.0, f64::INFINITY);
    for entry in scan {
        let (d, f) = entry?;
        if f < best.1 {
            best = (d, f);
        }
    }

    let h = TAU / SCAN as f64;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let obj = |d: f64| evaluate(d).map(|v| compensation_objective(&v));
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (obj(x1)?, obj(x2)?);
    for _ in 0..120 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = obj(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = obj(x2)?;
        }
    }
    let delta1 = wrap_phase(0.5 * (a + b));
    Ok(Compensation {
        delta1,
        delta3,
        verdict: evaluate(delta1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{closed_form_resonant, compose_scattering};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn curve_examples() {
        let s = curve_eta_of_tau(RingSlot::Middle, T_MIDDLE, &[0.0]);
        assert_abs_diff_eq!(s[0].as_ref().unwrap().eta, 0.5469181, epsilon = 1e-7);
        let s = curve_eta_of_tau(RingSlot::First, T_OUTER, &[0.5]);
        let expected = (T_OUTER + 0.5) / (1.0 + 0.5 * T_OUTER);
        assert_abs_diff_eq!(s[0].as_ref().unwrap().eta, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.9691358, epsilon = 1e-7);
        for t in [-0.5, 0.1, 0.9] {
            assert_abs_diff_eq!(invert_effective(t, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        }
        // the τ = η = 1 end decouples the ring
        assert!(curve_eta_of_tau(RingSlot::First, T_OUTER, &[1.0])[0].is_err());
    }

    #[test]
    fn curve_samples_round_trip_and_keep_the_gate() {
        let grid = linspace(0.0, CURVE_TAU_MAX, 41);
        for slot in RingSlot::ALL {
            for s in curve_eta_of_tau(slot, slot_target(slot), &grid) {
                let s = s.unwrap();
                let t = effective_coupling(s.tau, s.eta).unwrap().t;
                assert!((t - slot_target(slot)).abs() < 1e-12);
                let v = s.verdict().unwrap();
                assert!(v.satisfied(1e-9), "{slot:?} tau = {}: {v:?}", s.tau);
            }
        }
    }

    #[test]
    fn surface_examples() {
        // θ = 0 is a solution on the resonant curve
        let eta = invert_effective(T_OUTER, 0.4).unwrap();
        match surface_theta(T_OUTER, eta, 0.4).unwrap() {
            ThetaSolutions::Points(p) => assert!(p.iter().any(|&t| t.min(TAU - t) < 1e-6), "{p:?}"),
            ThetaSolutions::Continuum => panic!("expected points"),
        }

        let ThetaSolutions::Points(p) = surface_theta(T_MIDDLE, 0.9, 0.9).unwrap() else {
            panic!("expected points");
        };
        assert_eq!(p.len(), 2);
        assert_abs_diff_eq!(p[0], 0.1380245, epsilon = 1e-6);
        assert_abs_diff_eq!(p[1], TAU - p[0], epsilon = 1e-15);
        for theta in p {
            let a = ring_a(0.9, 0.9, theta).unwrap();
            assert_abs_diff_eq!(a.norm_sqr(), T_MIDDLE * T_MIDDLE, epsilon = 1e-10);
        }

        assert_eq!(
            surface_theta(0.99, 0.1, 0.1).unwrap(),
            ThetaSolutions::Points(vec![])
        );
        // oracle: |A|² never reaches 0.99² anywhere on a fine θ scan
        let max = linspace(0.0, TAU, 10_001)
            .into_iter()
            .map(|t| ring_a(0.1, 0.1, t).unwrap().norm_sqr())
            .fold(0.0, f64::max);
        assert!(max < 0.99 * 0.99);

        assert_eq!(
            surface_theta(0.6, 0.6, 0.0).unwrap(),
            ThetaSolutions::Continuum
        );
        assert_eq!(
            surface_theta(0.6, 0.5, 0.0).unwrap(),
            ThetaSolutions::Points(vec![])
        );
    }

    #[test]
    fn phase_arg_examples() {
        assert_abs_diff_eq!(ring_phase_arg(0.8, 0.3, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ring_phase_arg(0.3, 0.8, 0.0).unwrap(), PI, epsilon = 1e-15);
        assert!(matches!(
            ring_phase_arg(0.5, 0.5, 0.0),
            Err(Error::UndefinedPhase(_))
        ));
    }

    #[test]
    fn neutral_partitions_are_symmetric_on_resonance() {
        for slot in RingSlot::ALL {
            let phi = loop_neutral_partition(slot, 0.3, 0.7, 0.0).unwrap();
            assert_abs_diff_eq!(reduce_phase(phi), PI, epsilon = 1e-15);
        }
    }

    #[test]
    fn resonant_outer_rings_give_real_beta() {
        let params = off_resonance_network(
            OuterRing {
                tau: 0.0,
                eta: T_OUTER,
                theta: 0.0,
            },
            OuterRing {
                tau: 0.0,
                eta: T_OUTER,
                theta: 0.0,
            },
            0.2,
        )
        .unwrap();
        let r = off_resonance_check(&params).unwrap();
        assert!((r.verdict.beta0 - 0.5).norm() < 1e-12);
        assert!(r.phase_residual < 1e-12);
    }

    fn surface_point(target: f64, eta: f64, tau: f64, branch: usize) -> Option<OuterRing> {
        match surface_theta(target, eta, tau).ok()? {
            ThetaSolutions::Points(p) if !p.is_empty() => Some(OuterRing {
                tau,
                eta,
                theta: p[branch % p.len()],
            }),
            _ => None,
        }
    }

    #[test]
    fn one_ring_off_resonance_keeps_the_magnitude() {
        let ring1 = surface_point(T_OUTER, 0.95, 0.6, 0).unwrap();
        let ring3 = OuterRing {
            tau: 0.0,
            eta: T_OUTER,
            theta: 0.0,
        };
        let r = off_resonance_check(&off_resonance_network(ring1, ring3, 0.3).unwrap()).unwrap();
        assert_abs_diff_eq!(r.verdict.beta0.norm(), 0.5, epsilon = 1e-9);
        assert!(r.verdict.satisfied_up_to_phase(1e-9));
        assert_abs_diff_eq!(r.theta_a[1], 0.0, epsilon = 1e-15);
        assert!(r.theta_a[0].abs() > 1e-3);
    }

    #[test]
    fn symmetric_partition_breaks_the_magnitude_off_resonance() {
        let ring1 = surface_point(T_OUTER, 0.95, 0.6, 0).unwrap();
        let mut params = off_resonance_network(ring1, ring1, 0.3).unwrap();
        params.rings[0] = RingCoupler::new(ring1.tau, ring1.eta, ring1.theta, None).unwrap();
        params.rings[2] = RingCoupler::new(ring1.tau, ring1.eta, ring1.theta, None).unwrap();
        let v = verdict(&compose_scattering(&params).unwrap()).unwrap();
        assert!(!v.satisfied_up_to_phase(1e-6));
    }

    #[test]
    fn intersection_at_zero_recovers_the_curve() {
        let grid = linspace(0.05, 0.95, 19);
        let trace = intersect_delta2(0.0, &grid);
        assert!(trace.failures.is_empty(), "{:?}", trace.failures);
        for s in &trace.samples {
            let eta = invert_effective(T_MIDDLE, s.tau).unwrap();
            assert_abs_diff_eq!(s.eta, eta, epsilon = 1e-9);
            assert_abs_diff_eq!(wrap_phase(s.theta), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn intersection_at_small_delta() {
        let delta2 = PI / 30.0;
        let trace = intersect_delta2(delta2, &linspace(0.05, 0.95, 19));
        assert!(!trace.samples.is_empty());
        for s in &trace.samples {
            assert!(s.residuals.magnitude.abs() < 1e-9);
            assert!(s.residuals.phase.unwrap().abs() < 1e-9);
            // independent oracle for the same two conditions
            let a = ring_a(s.eta, s.tau, s.theta).unwrap();
            assert_abs_diff_eq!(a.norm(), T_MIDDLE, epsilon = 1e-9);
            assert_abs_diff_eq!(wrap_phase(a.arg() + delta2), 0.0, epsilon = 1e-9);
            assert!(s.eta > 0.0 && s.eta < 1.0);
        }
    }

    #[test]
    fn intersection_samples_keep_the_gate_after_compensation() {
        let delta2 = PI / 30.0;
        let trace = intersect_delta2(delta2, &[0.3, 0.6, 0.9]);
        assert_eq!(trace.samples.len(), 3, "{:?}", trace.failures);
        for s in &trace.samples {
            let params = s.network().unwrap();
            let raw = s.verdict().unwrap();
            assert_abs_diff_eq!(raw.beta0.norm(), 0.5, epsilon = 1e-9);
            assert!(raw.satisfied_up_to_phase(1e-9));
            let comp = compensate_outer_phases(&params).unwrap();
            assert!(comp.verdict.satisfied(1e-9), "{comp:?}");
            assert_abs_diff_eq!(comp.verdict.beta0.norm(), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn compensation_is_trivial_on_resonance() {
        let p = NetworkParams::resonant([T_OUTER, T_MIDDLE, T_OUTER], [0.1, 0.2, 0.3]).unwrap();
        let comp = compensate_outer_phases(&p).unwrap();
        assert!(comp.verdict.satisfied(1e-12));
        assert_abs_diff_eq!(comp.delta1, 0.0, epsilon = 1e-9);
        let s = closed_form_resonant(T_OUTER, T_MIDDLE, T_OUTER).unwrap();
        assert!(s.max_abs_diff(&compose_scattering(&p).unwrap()) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn surface_points_satisfy_the_magnitude(eta in 0.05f64..0.99, tau in 0.05f64..0.99) {
            if let ThetaSolutions::Points(p) = surface_theta(T_OUTER, eta, tau).unwrap() {
                for theta in p {
                    let a = ring_a(eta, tau, theta).unwrap();
                    prop_assert!((a.norm_sqr() - T_OUTER * T_OUTER).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn off_resonance_magnitude_holds(
            e1 in 0.05f64..0.99, t1 in 0.05f64..0.99, b1 in 0usize..2,
            e3 in 0.05f64..0.99, t3 in 0.05f64..0.99, b3 in 0usize..2,
            tau2 in 0.0f64..0.95,
        ) {
            let (Some(r1), Some(r3)) = (surface_point(T_OUTER, e1, t1, b1), surface_point(T_OUTER, e3, t3, b3)) else {
                return Ok(());
            };
            let p = off_resonance_network(r1, r3, tau2).unwrap();
            let middle = p.ring(RingSlot::Middle);
            let a2 = ring_a(middle.eta(), middle.tau(), middle.theta()).unwrap();
            prop_assert!((a2 / a2.norm() - 1.0).norm() < 1e-12);
            let r = off_resonance_check(&p).unwrap();
            prop_assert!(r.verdict.satisfied_up_to_phase(1e-9), "{:?}", r.verdict);
            prop_assert!((r.verdict.success_probability - 0.25).abs() < 1e-9);
            prop_assert!((r.verdict.success_probability - r.verdict.cross_check).abs() < 1e-9);
        }
    }
}
