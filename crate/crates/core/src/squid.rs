//! Linearized SQUID termination of Port 3.
//!
//! The two-junction loop acts as a parallel LC to ground whose inductance
//! is set by the flux bias. For a wave at frequency ω that is equivalent to
//! an open-ended stub of effective length L₃^eff:
//!
//! ```text
//! tan(ω (L₃^eff − L₃) / v) = 2 Z C_s ω − (8 e² Z E_s / ħ² ω) |cos(φ_ex / 2)|
//! ```
//!
//! ω₃ is the lowest frequency at which that stub is a quarter wave,
//! ω₃ L₃^eff / v = π/2.

use crate::device::PhysicalConstants;
use crate::numerics::{self, Bracket};
use crate::{BoundaryCondition, CouplerError, DeviceParams, Result, Scalar};

/// Effective-length solution at one frequency and bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StubState<T> {
    pub omega: T,
    pub phi_ex: T,
    pub l3_eff: T,
    /// Right-hand side of the termination condition.
    pub rhs: T,
}

/// 8 e² Z E_s / ħ², the inductive coefficient of the termination (rad/s).
pub fn josephson_coefficient<T: Scalar>(dev: &DeviceParams<T>) -> T {
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    // grouped to stay inside f32 range
    T::lit(8.0) * (e / hbar) * (e / hbar) * dev.impedance() * dev.es()
}

/// 2 Z C_s ω − (8 e² Z E_s / ħ² ω) |cos(φ_ex/2)| for a given |cos(φ_ex/2)|.
pub fn termination_rhs<T: Scalar>(dev: &DeviceParams<T>, omega: T, abs_cos: T) -> T {
    T::lit(2.0) * dev.impedance() * dev.cs() * omega - josephson_coefficient(dev) * abs_cos / omega
}

fn check_omega<T: Scalar>(omega: T) -> Result<T> {
    if omega.is_finite() && omega > T::zero() {
        Ok(omega)
    } else {
        Err(CouplerError::Invalid { field: "omega", requirement: "positive", value: omega.as_f64() })
    }
}

/// Effective Port 3 length at `omega`, principal arctan branch.
pub fn effective_length<T: Scalar>(dev: &DeviceParams<T>, omega: T, bc: &BoundaryCondition<T>) -> Result<StubState<T>> {
    let omega = check_omega(omega)?;
    let rhs = termination_rhs(dev, omega, bc.abs_cos_half());
    let l3_eff = dev.l3() + dev.velocity() / omega * rhs.atan();
    Ok(StubState { omega, phi_ex: bc.phi_ex(), l3_eff, rhs })
}

/// Quarter-wave frequency of the SQUID-terminated stub.
///
/// Solves cot(ω L₃ / v) = rhs(ω) on the lowest branch (0, πv/L₃): the left
/// side falls from +∞ to −∞ there while the right side increases, so the
/// root is unique.
pub fn omega3<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>) -> Result<T> {
    omega3_for_abs_cos(dev, bc.abs_cos_half())
}

pub(crate) fn omega3_for_abs_cos<T: Scalar>(dev: &DeviceParams<T>, abs_cos: T) -> Result<T> {
    let ceiling = dev.omega3_ceiling();
    let delta = T::lit(1e-6) * ceiling;
    let phase = dev.l3() / dev.velocity();
    let f = |w: T| T::one() / (w * phase).tan() - termination_rhs(dev, w, abs_cos);
    let bracket = Bracket::new(f, delta, ceiling - delta)?;
    // tighter than DEFAULT_REL_TOL: extraction near the decoupling point
    // resolves kappa ~ 5e-9 omega3
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(8.0));
    Ok(numerics::find_root(f, &bracket, tol)?)
}

/// Flux bias that places ω₃ at `target_omega3`.
///
/// Inverts the quarter-wave condition in closed form,
/// |cos(φ_ex/2)| = [2ZC_sω₃ − cot(ω₃L₃/v)] ħ²ω₃ / (8e²ZE_s),
/// and returns φ_ex ∈ [0, π].
pub fn flux_for_omega3<T: Scalar>(dev: &DeviceParams<T>, target_omega3: T) -> Result<BoundaryCondition<T>> {
    let w = check_omega(target_omega3)?;
    let untunable = |abs_cos: T| CouplerError::Untunable {
        target_ghz: w.as_f64() / std::f64::consts::TAU / 1e9,
        abs_cos: abs_cos.as_f64(),
    };
    if w >= dev.omega3_ceiling() {
        return Err(untunable(T::nan()));
    }
    let cot = T::one() / (w * dev.l3() / dev.velocity()).tan();
    let abs_cos = (T::lit(2.0) * dev.impedance() * dev.cs() * w - cot) * w / josephson_coefficient(dev);
    // slack for roundoff at the ends of the tuning range only
    let slack = T::lit(1e-9);
    if !abs_cos.is_finite() || abs_cos < -slack || abs_cos > T::one() + slack {
        return Err(untunable(abs_cos));
    }
    let abs_cos = abs_cos.max(T::zero()).min(T::one());
    Ok(BoundaryCondition::new(T::lit(2.0) * abs_cos.acos()))
}

/// Whether ω₃ can be tuned to `target` by some flux bias.
pub fn is_tunable_to<T: Scalar>(dev: &DeviceParams<T>, target: T) -> bool {
    flux_for_omega3(dev, target).is_ok()
}
