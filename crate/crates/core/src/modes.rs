//! Continuum eigenmodes of the three-port line and the localized cavity mode.
//!
//! Coordinates run outward from the branch point on every port. With the
//! Port 1 amplitude fixed to one, the mode at frequency ω is
//!
//! ```text
//! Port 1:  cos(ω r₁ / v + θ)
//! Port 2:  ratio2 · cos(ω (r₂ − L₂) / v)
//! Port 3:  ratio3 · cos(ω (r₃ − L₃^eff) / v)
//! ```
//!
//! Continuity of flux and current conservation at the branch give
//! tan θ = tan a + tan b with a = ωL₂/v and b = ωL₃^eff/v. θ is taken as the
//! angle of the point (cos a · cos b, sin(a + b)), which has no poles and
//! fixes the quadrant; the ratios then are cos b / √D and cos a / √D with
//! D = cos²a cos²b + sin²(a + b).

use crate::squid::{self, StubState};
use crate::{BoundaryCondition, CouplerError, DeviceParams, Result, Scalar};

/// Branches of the line, each with its coordinate measured from the branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// Semi-infinite feed line (Port 1).
    Feed,
    /// Open-ended finite branch of length L₂ (Port 2).
    Open,
    /// SQUID-terminated finite branch of length L₃ (Port 3).
    Stub,
}

/// Eigenmode at one frequency, normalized to unit amplitude on the feed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution<T> {
    pub omega: T,
    /// Half the reflection phase, in (−π, π].
    pub theta: T,
    /// α⁽²⁾/α⁽¹⁾.
    pub ratio2: T,
    /// α⁽³⁾/α⁽¹⁾.
    pub ratio3: T,
    pub l3_eff: T,
    /// ωL₂/v.
    pub a: T,
    /// ωL₃^eff/v.
    pub b: T,
    velocity: T,
    l2: T,
}

impl<T: Scalar> ModeSolution<T> {
    /// Mode function on `port` at distance `r` from the branch.
    pub fn flux(&self, port: Port, r: T) -> T {
        let k = self.omega / self.velocity;
        match port {
            Port::Feed => (k * r + self.theta).cos(),
            Port::Open => self.ratio2 * (k * (r - self.l2)).cos(),
            Port::Stub => self.ratio3 * (k * (r - self.l3_eff)).cos(),
        }
    }

    /// Spatial derivative of [`ModeSolution::flux`] along the port coordinate.
    pub fn flux_gradient(&self, port: Port, r: T) -> T {
        let k = self.omega / self.velocity;
        match port {
            Port::Feed => -k * (k * r + self.theta).sin(),
            Port::Open => -k * self.ratio2 * (k * (r - self.l2)).sin(),
            Port::Stub => -k * self.ratio3 * (k * (r - self.l3_eff)).sin(),
        }
    }
}

/// Phase arguments a = ωL₂/v and b = ωL₃^eff/v together with the stub state.
pub fn phase_arguments<T: Scalar>(
    dev: &DeviceParams<T>,
    bc: &BoundaryCondition<T>,
    omega: T,
) -> Result<(T, T, StubState<T>)> {
    let stub = squid::effective_length(dev, omega, bc)?;
    let a = omega * dev.l2() / dev.velocity();
    let b = omega * stub.l3_eff / dev.velocity();
    Ok((a, b, stub))
}

/// Solves the branch conditions at `omega`.
///
/// Fails with [`CouplerError::ExactlyDecoupled`] at the isolated point where
/// both finite ports are quarter-wave and the feed amplitude must vanish.
pub fn solve_mode<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, omega: T) -> Result<ModeSolution<T>> {
    let (a, b, stub) = phase_arguments(dev, bc, omega)?;
    let (cos_a, cos_b) = (a.cos(), b.cos());
    let x = cos_a * cos_b;
    let y = (a + b).sin();
    let d = x * x + y * y;
    let floor = T::lit(16.0) * T::epsilon();
    if !(d > floor * floor) {
        return Err(CouplerError::ExactlyDecoupled { freq_ghz: omega.as_f64() / std::f64::consts::TAU / 1e9 });
    }
    let root_d = d.sqrt();
    let mut theta = y.atan2(x);
    if theta <= -T::PI() {
        theta = T::PI();
    }
    Ok(ModeSolution {
        omega,
        theta,
        ratio2: cos_b / root_d,
        ratio3: cos_a / root_d,
        l3_eff: stub.l3_eff,
        a,
        b,
        velocity: dev.velocity(),
        l2: dev.l2(),
    })
}

/// Mode confined to Ports 2 and 3 with a node at the branch point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode<T> {
    /// Equal to ω₂.
    pub omega: T,
    /// Overall flux amplitude, Wb.
    pub phi0: T,
    /// Position of the node, always the branch point r = 0.
    pub node_position: T,
    velocity: T,
}

impl<T: Scalar> CavityMode<T> {
    pub fn with_amplitude(self, phi0: T) -> Self {
        Self { phi0, ..self }
    }

    /// φ_cav(r): zero on the feed, −φ₀ sin(ω₂r/v) on Port 2, φ₀ sin(ω₂r/v) on Port 3.
    pub fn flux(&self, port: Port, r: T) -> T {
        let s = (self.omega * r / self.velocity).sin();
        match port {
            Port::Feed => T::zero(),
            Port::Open => -self.phi0 * s,
            Port::Stub => self.phi0 * s,
        }
    }
}

/// The localized mode at ω₂, available when ω₃ is within `tol` of ω₂.
pub fn cavity_mode<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, tol: T) -> Result<CavityMode<T>> {
    let w2 = dev.omega2();
    let w3 = squid::omega3(dev, bc)?;
    let detuning = w3 - w2;
    if detuning.abs() > tol {
        return Err(CouplerError::NotDecoupled { detuning_hz: detuning.as_f64() / std::f64::consts::TAU });
    }
    Ok(CavityMode { omega: w2, phi0: T::one(), node_position: T::zero(), velocity: dev.velocity() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squid::flux_for_omega3;
    use crate::Device;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn dev() -> Device {
        Device::reference_device()
    }

    fn bc_for_ghz(f3: f64) -> BoundaryCondition<f64> {
        flux_for_omega3(&dev(), TAU * f3 * 1e9).unwrap()
    }

    /// Continuity, current conservation and the tangent relation, as
    /// maximum absolute residual.
    fn branch_residuals(m: &ModeSolution<f64>) -> f64 {
        let (p1, p2, p3) = (m.flux(Port::Feed, 0.0), m.flux(Port::Open, 0.0), m.flux(Port::Stub, 0.0));
        let k = m.omega / 1e8;
        let current =
            (m.flux_gradient(Port::Feed, 0.0) + m.flux_gradient(Port::Open, 0.0) + m.flux_gradient(Port::Stub, 0.0))
                / k;
        let voltage = (p1 - p2).abs().max((p1 - p3).abs());
        let chain = (m.theta.cos() - m.ratio2 * m.a.cos())
            .abs()
            .max((m.theta.cos() - m.ratio3 * m.b.cos()).abs())
            .max((m.theta.sin() - m.ratio2 * m.a.sin() - m.ratio3 * m.b.sin()).abs());
        voltage.max(current.abs()).max(chain)
    }

    #[test]
    fn low_frequency_limit() {
        let m = solve_mode(&dev(), &BoundaryCondition::new(PI), TAU * 1e3).unwrap();
        assert!(m.theta.abs() < 1e-6);
        assert_relative_eq!(m.ratio2, 1.0, epsilon = 1e-6);
        assert_relative_eq!(m.ratio3, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn at_omega2_with_detuned_stub() {
        let d = dev();
        let m = solve_mode(&d, &bc_for_ghz(9.6), d.omega2()).unwrap();
        // a = pi/2: cos a = 0, D = sin^2(a + b) = cos^2 b, so |ratio2| = |cos b| / |sin(a + b)| = 1
        let expected = m.b.cos().abs() / (PI / 2.0 + m.b).sin().abs();
        assert_relative_eq!(expected, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.ratio2.abs(), expected, max_relative = 1e-12);
        assert!(m.ratio3.abs() < 1e-12);
        assert_relative_eq!(m.theta.abs(), PI / 2.0, epsilon = 1e-12);
        assert!(branch_residuals(&m) < 1e-10);
    }

    #[test]
    fn near_resonance_matches_linear_solve() {
        let d = dev();
        let m = solve_mode(&d, &bc_for_ghz(9.9), TAU * 9.95e9).unwrap();
        // independent 2x2 solve of the branch equations for (ratio2, ratio3) given theta
        let (ca, sa, cb, sb) = (m.a.cos(), m.a.sin(), m.b.cos(), m.b.sin());
        // rows: ratio2*ca - ratio3*cb = 0 ; ratio2*sa + ratio3*sb = sin(theta)
        let det = ca * sb + cb * sa;
        let r2 = (cb * m.theta.sin()) / det;
        let r3 = (ca * m.theta.sin()) / det;
        assert_relative_eq!(m.ratio2, r2, max_relative = 1e-10);
        assert_relative_eq!(m.ratio3, r3, max_relative = 1e-10);
        assert!(branch_residuals(&m) < 1e-10);
        assert!(((m.theta.tan()) - (m.a.tan() + m.b.tan())).abs() < 1e-10 * m.theta.tan().abs().max(1.0));
    }

    #[test]
    fn exact_decoupling_is_reported() {
        // synthetic device where both quarter-wave conditions coincide exactly:
        // pick L3 so that L3eff(omega2) = L2 at zero bias
        let d = dev();
        let w2 = d.omega2();
        let bc = BoundaryCondition::new(0.0);
        let s = crate::squid::effective_length(&d, w2, &bc).unwrap();
        let d2 = d.with_l3(d.l3() + d.l2() - s.l3_eff).unwrap();
        let err = solve_mode(&d2, &bc, w2).unwrap_err();
        assert!(matches!(err, CouplerError::ExactlyDecoupled { .. }), "{err:?}");
    }

    #[test]
    fn decoupling_as_stub_approaches_omega2() {
        let d = dev();
        let w2 = d.omega2();
        let (mut prev_d, mut prev_ratio) = (f64::INFINITY, 0.0);
        for f3 in [9.0, 9.9, 9.99, 9.999, 9.9999] {
            let bc = bc_for_ghz(f3);
            // D at omega2 is cos^2 b and closes as omega3 -> omega2
            let m = solve_mode(&d, &bc, w2).unwrap();
            let dd = m.b.cos().powi(2);
            assert!(dd < prev_d);
            prev_d = dd;
            // at the resonance in between, the confined amplitude dominates the feed
            let wc = crate::characterize::extract_from_phase(&d, &bc).unwrap().omega_c;
            let r = solve_mode(&d, &bc, wc).unwrap().ratio2.abs();
            assert!(r > prev_ratio);
            prev_ratio = r;
        }
        assert!(prev_d < 1e-8);
        assert!(prev_ratio > 1e3);
    }

    #[test]
    fn cavity_mode_shape() {
        let d = dev();
        let bc = flux_for_omega3(&d, d.omega2()).unwrap();
        let cav = cavity_mode(&d, &bc, TAU * 1.0).unwrap().with_amplitude(2.0);
        assert_eq!(cav.node_position, 0.0);
        assert_eq!(cav.flux(Port::Open, 0.0), 0.0);
        assert_eq!(cav.flux(Port::Stub, 0.0), 0.0);
        assert_eq!(cav.flux(Port::Feed, 1.0), 0.0);
        assert_relative_eq!(cav.flux(Port::Open, d.l2()), -2.0, max_relative = 1e-15);
        assert_relative_eq!(cav.omega, d.omega2());
    }

    #[test]
    fn cavity_mode_requires_decoupling() {
        let err = cavity_mode(&dev(), &bc_for_ghz(9.9), TAU * 1e6).unwrap_err();
        match err {
            CouplerError::NotDecoupled { detuning_hz } => assert_relative_eq!(detuning_hz, -0.1e9, max_relative = 1e-6),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn branch_conditions_hold(f in 0.05f64..40.0, phi in 0.0f64..TAU) {
            let m = solve_mode(&dev(), &BoundaryCondition::new(phi), TAU * f * 1e9).unwrap();
            prop_assert!(m.theta > -PI && m.theta <= PI);
            prop_assert!(branch_residuals(&m) < 1e-10);
            let (ta, tb) = (m.a.tan(), m.b.tan());
            if ta.abs() < 1e6 && tb.abs() < 1e6 {
                let t = m.theta.tan();
                prop_assert!((t - ta - tb).abs() <= 1e-10 * t.abs().max(1.0));
            }
        }

        #[test]
        fn stable_ratios_match_textbook_forms(f in 0.05f64..40.0, phi in 0.0f64..TAU) {
            let m = solve_mode(&dev(), &BoundaryCondition::new(phi), TAU * f * 1e9).unwrap();
            if m.a.cos().abs() > 0.1 && m.b.cos().abs() > 0.1 {
                prop_assert!((m.ratio2 / (m.theta.cos() / m.a.cos()) - 1.0).abs() < 1e-9);
                prop_assert!((m.ratio3 / (m.theta.cos() / m.b.cos()) - 1.0).abs() < 1e-9);
            }
        }
    }
}
