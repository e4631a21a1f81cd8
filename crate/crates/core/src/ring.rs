//! Double-bus microring resonator (MRR) element.
//!
//! A ring couples two bus waveguides through a lower coupler (direct
//! transmission `tau`, cross coupling `kappa`) and an upper coupler (`eta`,
//! `gamma`). With lossless reciprocal couplers and real direct transmissions
//! the cross couplings are fixed to `i·sqrt(1 - tau²)` and `i·sqrt(1 - eta²)`.
//! The 2×2 transfer matrix then depends on the round-trip phase `theta` and
//! the phase partition `phi` between the two ring arcs.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};

/// Position of a ring in the three-ring gate network.
///
/// The middle ring sits with its couplers mirrored relative to the outer two,
/// so its transfer matrix is built with the roles of `tau` and `eta` exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingSlot {
    First,
    Middle,
    Last,
}

impl RingSlot {
    pub const ALL: [RingSlot; 3] = [RingSlot::First, RingSlot::Middle, RingSlot::Last];

    /// 1-based ring number.
    pub fn number(self) -> usize {
        match self {
            RingSlot::First => 1,
            RingSlot::Middle => 2,
            RingSlot::Last => 3,
        }
    }

    pub fn from_number(n: usize) -> Option<Self> {
        match n {
            1 => Some(RingSlot::First),
            2 => Some(RingSlot::Middle),
            3 => Some(RingSlot::Last),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.number() - 1
    }
}

/// Reduce a phase into `[0, 2π)`.
pub fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap a phase into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = reduce_phase(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Symmetric phase partition `θ/2`, taking `θ` on the branch `[π, 3π)` that is
/// centred on the resonance at `2π`. Resonance therefore gives `φ = π`.
pub fn default_partition(theta: f64) -> f64 {
    let centred = reduce_phase(theta + PI) - PI;
    (centred + TAU) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingCoupler {
    tau: f64,
    eta: f64,
    kappa: Complex64,
    gamma: Complex64,
    theta: f64,
    phi: f64,
}

impl RingCoupler {
    /// Builds a ring from real direct transmissions. `phi` defaults to the
    /// symmetric partition; `theta` is stored reduced into `[0, 2π)`.
    pub fn new(tau: f64, eta: f64, theta: f64, phi: Option<f64>) -> Result<Self> {
        let tau = check_unit_interval("tau", tau)?;
        let eta = check_unit_interval("eta", eta)?;
        if !theta.is_finite() {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                range: "finite",
            });
        }
        if let Some(p) = phi {
            if !p.is_finite() {
                return Err(Error::Domain {
                    name: "phi",
                    value: p,
                    range: "finite",
                });
            }
        }
        if (tau * eta).abs() >= 1.0 {
            return Err(Error::Pole(format!(
                "|tau·eta| = {} makes 1 - eta·tau·exp(-iθ) vanish",
                (tau * eta).abs()
            )));
        }
        Ok(Self {
            tau,
            eta,
            kappa: Complex64::new(0.0, (1.0 - tau * tau).sqrt()),
            gamma: Complex64::new(0.0, (1.0 - eta * eta).sqrt()),
            theta: reduce_phase(theta),
            phi: phi.unwrap_or_else(|| default_partition(theta)),
        })
    }

    /// On-resonance ring with the symmetric partition.
    pub fn resonant(tau: f64, eta: f64) -> Result<Self> {
        Self::new(tau, eta, 0.0, None)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kappa(&self) -> Complex64 {
        self.kappa
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// Same ring seen with its two couplers exchanged.
    pub fn flipped(&self) -> Self {
        Self {
            tau: self.eta,
            eta: self.tau,
            kappa: self.gamma,
            gamma: self.kappa,
            ..*self
        }
    }

    /// `1 - η·τ·exp(-iθ)`, the common denominator of the transfer matrix.
    pub fn denominator(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.eta * self.tau * Complex64::from_polar(1.0, -self.theta)
    }

    pub fn transfer(&self) -> RingTransfer {
        let round_trip = Complex64::from_polar(1.0, -self.theta);
        let den = self.denominator();
        let a = (self.eta - self.tau * round_trip) / den;
        let b = -self.gamma * self.kappa.conj() * Complex64::from_polar(1.0, -self.phi) / den;
        let c =
            -self.kappa * self.gamma.conj() * Complex64::from_polar(1.0, -(self.theta - self.phi))
                / den;
        let d = (self.tau - self.eta * round_trip) / den;
        RingTransfer { a, b, c, d }
    }

    /// Transfer matrix as wired into the given network slot.
    pub fn transfer_in_slot(&self, slot: RingSlot) -> RingTransfer {
        match slot {
            RingSlot::Middle => self.flipped().transfer(),
            RingSlot::First | RingSlot::Last => self.transfer(),
        }
    }

    pub fn effective(&self) -> EffectiveCoupling {
        effective_coupling(self.tau, self.eta).expect("validated ring has |tau·eta| < 1")
    }

    pub fn is_resonant(&self, tol: f64) -> bool {
        wrap_phase(self.theta).abs() <= tol
    }
}

/// Entries of the 2×2 ring transfer matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingTransfer {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl RingTransfer {
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.a, self.b, self.c, self.d)
    }

    /// `max |M†M - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.matrix();
        let g = m.adjoint() * m - Matrix2::identity();
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &RingTransfer) -> f64 {
        (self.matrix() - other.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// On-resonance beam-splitter equivalent of a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    pub t: f64,
    pub r: f64,
}

/// `t = (η - τ)/(1 - ητ)`, `r = sqrt((1-τ²)(1-η²))/(1 - ητ)`.
pub fn effective_coupling(tau: f64, eta: f64) -> Result<EffectiveCoupling> {
    let tau = check_unit_interval("tau", tau)?;
    let eta = check_unit_interval("eta", eta)?;
    let den = 1.0 - eta * tau;
    if (eta * tau).abs() >= 1.0 {
        return Err(Error::Pole(format!("1 - eta·tau = {den}")));
    }
    Ok(EffectiveCoupling {
        t: (eta - tau) / den,
        r: ((1.0 - tau * tau) * (1.0 - eta * eta)).sqrt() / den,
    })
}

/// Upper coupler transmission giving effective transmission `t` for a lower
/// coupler `tau`: `η = (t + τ)/(1 + tτ)`.
pub fn invert_effective(t: f64, tau: f64) -> Result<f64> {
    let t = check_unit_interval("t", t)?;
    let tau = check_unit_interval("tau", tau)?;
    let den = 1.0 + t * tau;
    if den.abs() <= f64::EPSILON {
        return Err(Error::Pole(format!("1 + t·tau = {den}")));
    }
    Ok((t + tau) / den)
}

/// Resonant transfer matrix of a ring with effective transmission `t`.
pub fn on_resonance_transfer(t: f64, slot: RingSlot) -> Result<RingTransfer> {
    let t = check_unit_interval("t", t)?;
    let r = (1.0 - t * t).sqrt();
    Ok(match slot {
        RingSlot::Middle => RingTransfer::from_real(-t, r, r, t),
        RingSlot::First | RingSlot::Last => RingTransfer::from_real(t, r, r, -t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;
    const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn cross_couplings_follow_reciprocity() {
        let c = RingCoupler::new(0.5, 0.5, TAU, None).unwrap();
        assert_abs_diff_eq!(c.kappa().re, 0.0);
        assert_abs_diff_eq!(c.kappa().im, HALF_SQRT3, epsilon = TOL);
        assert_abs_diff_eq!(c.gamma().im, HALF_SQRT3, epsilon = TOL);

        let full = RingCoupler::new(0.0, 0.0, 0.0, None).unwrap();
        assert_eq!(full.kappa(), Complex64::i());
        assert_eq!(full.gamma(), Complex64::i());

        for c in [c, full] {
            for (x, t) in [(c.kappa(), c.tau()), (c.gamma(), c.eta())] {
                assert_abs_diff_eq!(x.norm_sqr() + t * t, 1.0, epsilon = TOL);
                assert_abs_diff_eq!((x * t + x.conj() * t).norm(), 0.0, epsilon = TOL);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            RingCoupler::new(1.0, 1.0, 0.0, None),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            RingCoupler::new(-1.0, 1.0, 0.0, None),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            RingCoupler::new(1.2, 0.0, 0.0, None),
            Err(Error::Domain { name: "tau", .. })
        ));
        assert!(matches!(
            RingCoupler::new(0.0, f64::NAN, 0.0, None),
            Err(Error::Domain { name: "eta", .. })
        ));
        assert!(RingCoupler::new(1.0, 0.3, 0.0, None).is_ok());
    }

    #[test]
    fn resonance_is_stored_mod_two_pi() {
        let a = RingCoupler::new(0.3, 0.7, TAU, None).unwrap();
        let b = RingCoupler::new(0.3, 0.7, 0.0, None).unwrap();
        assert_eq!(a.theta(), 0.0);
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.phi(), PI, epsilon = TOL);
        // off resonance the partition is θ/2 on the branch around 2π
        let c = RingCoupler::new(0.3, 0.7, TAU + 0.2, None).unwrap();
        assert_abs_diff_eq!(c.phi(), PI + 0.1, epsilon = TOL);
        let d = RingCoupler::new(0.3, 0.7, TAU - 0.2, None).unwrap();
        assert_abs_diff_eq!(d.phi(), PI - 0.1, epsilon = TOL);
    }

    #[test]
    fn balanced_ring_is_a_swap() {
        let m = RingCoupler::new(0.5, 0.5, TAU, Some(PI))
            .unwrap()
            .transfer();
        let expected = RingTransfer::from_real(0.0, 1.0, 1.0, 0.0);
        assert!(m.max_abs_diff(&expected) < TOL);

        for theta in [TAU, 0.0] {
            let m = RingCoupler::new(0.37, 0.37, theta, None)
                .unwrap()
                .transfer();
            assert!(m.a.norm() < TOL && m.d.norm() < TOL);
        }
    }

    #[test]
    fn resonant_transfer_matches_effective_form() {
        let m = RingCoupler::new(0.5, 0.8, TAU, Some(PI))
            .unwrap()
            .transfer();
        let expected = RingTransfer::from_real(0.5, HALF_SQRT3, HALF_SQRT3, -0.5);
        assert!(m.max_abs_diff(&expected) < TOL, "{m:?}");
    }

    #[test]
    fn effective_coupling_examples() {
        let e = effective_coupling(0.5, 0.8).unwrap();
        assert_abs_diff_eq!(e.t, 0.5, epsilon = TOL);
        assert_abs_diff_eq!(e.r, HALF_SQRT3, epsilon = TOL);

        let e = effective_coupling(0.42, 0.42).unwrap();
        assert_abs_diff_eq!(e.t, 0.0, epsilon = TOL);
        assert_abs_diff_eq!(e.r, 1.0, epsilon = TOL);

        assert_abs_diff_eq!(effective_coupling(0.0, 0.73).unwrap().t, 0.73);
        assert!(matches!(effective_coupling(1.0, 1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn invert_effective_examples() {
        // (0.9101797 + 0.5)/(1 + 0.45508985)
        let eta = invert_effective(0.910_179_7, 0.5).unwrap();
        assert_abs_diff_eq!(eta, 0.969_135_8, epsilon = 1e-7);
        assert_abs_diff_eq!(invert_effective(0.0, 0.31).unwrap(), 0.31);
        assert_abs_diff_eq!(invert_effective(0.64, 0.0).unwrap(), 0.64);
        assert!(matches!(invert_effective(1.0, -1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn on_resonance_forms() {
        let m = on_resonance_transfer(0.5, RingSlot::First).unwrap();
        assert!(m.max_abs_diff(&RingTransfer::from_real(0.5, HALF_SQRT3, HALF_SQRT3, -0.5)) < TOL);
        let m = on_resonance_transfer(0.5, RingSlot::Middle).unwrap();
        assert!(m.max_abs_diff(&RingTransfer::from_real(-0.5, HALF_SQRT3, HALF_SQRT3, 0.5)) < TOL);
        let m = on_resonance_transfer(1.0, RingSlot::Last).unwrap();
        assert!(m.max_abs_diff(&RingTransfer::from_real(1.0, 0.0, 0.0, -1.0)) < TOL);
    }

    #[test]
    fn wrap_and_reduce() {
        assert_eq!(reduce_phase(-1e-300), 0.0);
        assert_abs_diff_eq!(reduce_phase(-0.5), TAU - 0.5, epsilon = TOL);
        assert_abs_diff_eq!(wrap_phase(TAU - 0.5), -0.5, epsilon = TOL);
        assert_abs_diff_eq!(wrap_phase(PI), PI, epsilon = TOL);
    }

    fn coupler_params() -> impl Strategy<Value = (f64, f64, f64)> {
        (-0.99f64..0.99, -0.99f64..0.99, 0.0f64..TAU)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn transfer_is_unitary((tau, eta, theta) in coupler_params()) {
            let c = RingCoupler::new(tau, eta, theta, None).unwrap();
            prop_assert!(c.transfer().unitarity_residual() < TOL);
            prop_assert!(c.transfer_in_slot(RingSlot::Middle).unitarity_residual() < TOL);
        }

        #[test]
        fn effective_coupling_is_normalized((tau, eta, _theta) in coupler_params()) {
            let e = effective_coupling(tau, eta).unwrap();
            prop_assert!((e.r * e.r + e.t * e.t - 1.0).abs() < TOL);
            prop_assert!(e.r >= 0.0 && e.t.abs() <= 1.0 + TOL);
        }

        #[test]
        fn effective_round_trip((tau, eta, _theta) in coupler_params()) {
            let t = effective_coupling(tau, eta).unwrap().t;
            prop_assume!((t * tau).abs() < 0.99);
            let back = invert_effective(t, tau).unwrap();
            prop_assert!((back - eta).abs() < 1e-10);
        }

        #[test]
        fn resonant_transfer_matches_slot_forms(tau in -0.99f64..0.99, eta in -0.99f64..0.99) {
            let c = RingCoupler::new(tau, eta, TAU, None).unwrap();
            let t = effective_coupling(tau, eta).unwrap().t;
            for slot in RingSlot::ALL {
                let expected = on_resonance_transfer(t, slot).unwrap();
                prop_assert!(c.transfer_in_slot(slot).max_abs_diff(&expected) < TOL);
            }
        }
    }
}
