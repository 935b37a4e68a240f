//! Reflection phase and stored-energy spectra seen from the feed line.
//!
//! A stationary wave sent down the feed comes back with phase shift 2θ_ω.
//! The energy it builds up in Ports 2 and 3, normalized by the incident
//! power P = ω² α₁² / 4Z, is
//!
//! ```text
//! E/P = (2/v) [ratio2² L₂ + ratio3² L₃] + E_squid / P
//! ```
//!
//! where the last term is the energy held by the SQUID's junction
//! capacitance 2C_s and linearized Josephson inductance. Without it the
//! peak undershoots 4/κ by roughly 10 %; with it, κ·E/P(ω_c) = 4 as the
//! single-mode lineshape requires. The line-only part is available as
//! [`line_energy_ratio`].

use rayon::prelude::*;

use crate::device::PhysicalConstants;
use crate::modes::{solve_mode, ModeSolution};
use crate::numerics::linspace;
use crate::{BoundaryCondition, CouplerError, DeviceParams, Result, Scalar};

/// Reflection phase 2θ_ω in (−2π, 2π].
pub fn phase_shift<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, omega: T) -> Result<T> {
    Ok(T::lit(2.0) * solve_mode(dev, bc, omega)?.theta)
}

/// Stored energy in Ports 2 and 3 plus the SQUID, per unit incident power (s).
pub fn energy_ratio<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, omega: T) -> Result<T> {
    let m = solve_mode(dev, bc, omega)?;
    Ok(line_part(dev, &m) + squid_part(dev, bc, &m))
}

/// Energy stored on the transmission-line sections alone, per unit incident power (s).
pub fn line_energy_ratio<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, omega: T) -> Result<T> {
    let m = solve_mode(dev, bc, omega)?;
    Ok(line_part(dev, &m))
}

fn line_part<T: Scalar>(dev: &DeviceParams<T>, m: &ModeSolution<T>) -> T {
    T::lit(2.0) / dev.velocity() * (m.ratio2 * m.ratio2 * dev.l2() + m.ratio3 * m.ratio3 * dev.l3())
}

fn squid_part<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, m: &ModeSolution<T>) -> T {
    let two = T::lit(2.0);
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    // flux amplitude at the junctions, r3 = L3
    let phi_s = m.ratio3 * (m.omega * (dev.l3() - m.l3_eff) / dev.velocity()).cos();
    let inductive = T::lit(8.0) * (e / hbar) * (e / hbar) * dev.es() * bc.abs_cos_half() / (m.omega * m.omega);
    two * dev.impedance() * phi_s * phi_s * (two * dev.cs() + inductive)
}

/// Single-mode lineshape κ / ((ω − ω_c)² + κ²/4).
pub fn lorentzian<T: Scalar>(omega: T, omega_c: T, kappa: T) -> Result<T> {
    if !(kappa.is_finite() && kappa > T::zero()) {
        return Err(CouplerError::Invalid { field: "kappa", requirement: "positive", value: kappa.as_f64() });
    }
    let dw = omega - omega_c;
    Ok(kappa / (dw * dw + kappa * kappa / T::lit(4.0)))
}

/// Phase and energy response on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    /// Angular frequencies, rad/s.
    pub omega: Vec<T>,
    /// 2θ in (−2π, 2π].
    pub phase_shift: Vec<T>,
    /// Continuous 2θ, equal to `phase_shift` at the first sample.
    pub phase_unwrapped: Vec<T>,
    /// Total E/P, s.
    pub e_over_p: Vec<T>,
    /// Line-only E/P, s.
    pub e_over_p_lines: Vec<T>,
}

impl<T> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Evaluates the response on `n_points` uniform samples of `[omega_min, omega_max]`.
///
/// Samples within 1e-9 (relative) of a quarter-wave point of either finite
/// port are shifted by 1e-6 of the grid step so the grid keeps its length.
pub fn compute_spectrum<T: Scalar>(
    dev: &DeviceParams<T>,
    bc: &BoundaryCondition<T>,
    omega_min: T,
    omega_max: T,
    n_points: usize,
) -> Result<Spectrum<T>> {
    if n_points < 16 {
        return Err(CouplerError::Invalid { field: "points", requirement: "at least 16", value: n_points as f64 });
    }
    if !(omega_min.is_finite() && omega_min > T::zero()) {
        return Err(CouplerError::Invalid { field: "fmin", requirement: "positive", value: omega_min.as_f64() });
    }
    if !(omega_max.is_finite() && omega_max > omega_min) {
        return Err(CouplerError::Invalid { field: "fmax", requirement: "above fmin", value: omega_max.as_f64() });
    }
    let step = (omega_max - omega_min) / T::from_usize(n_points - 1).unwrap();
    let nudge = step * T::lit(1e-6);

    let grid = linspace(omega_min, omega_max, n_points);
    let rows: Vec<(T, ModeSolution<T>, T, T)> = grid
        .into_par_iter()
        .map(|w| {
            let w = if near_pole(dev, bc, w)? { w + nudge } else { w };
            let m = solve_mode(dev, bc, w)?;
            let line = line_part(dev, &m);
            Ok((w, m, line + squid_part(dev, bc, &m), line))
        })
        .collect::<Result<_>>()?;

    let mut s = Spectrum {
        omega: Vec::with_capacity(n_points),
        phase_shift: Vec::with_capacity(n_points),
        phase_unwrapped: Vec::with_capacity(n_points),
        e_over_p: Vec::with_capacity(n_points),
        e_over_p_lines: Vec::with_capacity(n_points),
    };
    let base = rows.first().map(|r| half_turns(&r.1)).unwrap_or_else(T::zero);
    let four_pi = T::lit(4.0) * T::PI();
    for (w, m, e, el) in rows {
        let phase = T::lit(2.0) * m.theta;
        s.omega.push(w);
        s.phase_shift.push(phase);
        s.phase_unwrapped.push(phase + four_pi * (half_turns(&m) - base));
        s.e_over_p.push(e);
        s.e_over_p_lines.push(el);
    }
    Ok(s)
}

/// Number of times θ has wrapped through π since ω = 0.
///
/// a + b increases strictly with ω, and θ crosses the atan2 branch cut
/// exactly when a + b passes an odd multiple of π (there cos a · cos b =
/// −cos²a < 0). Counting those crossings unwraps the phase exactly, however
/// coarse the grid is compared to the linewidth.
fn half_turns<T: Scalar>(m: &ModeSolution<T>) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let x = (m.a + m.b) / T::PI();
    let mut n = ((x + one) / two).floor();
    // right at a crossing, follow the side atan2 picked
    let nearest_odd = two * ((x - one) / two).round() + one;
    let offset = x - nearest_odd;
    let half_pi = T::FRAC_PI_2();
    if m.theta > half_pi && offset >= T::zero() && offset < T::lit(0.5) {
        n = n - one;
    } else if m.theta < -half_pi && offset < T::zero() && offset > T::lit(-0.5) {
        n = n + one;
    }
    n
}

fn near_pole<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>, w: T) -> Result<bool> {
    let (a, b, _) = crate::modes::phase_arguments(dev, bc, w)?;
    let tol = T::lit(1e-9);
    let off = |x: T| {
        let half_pi = T::FRAC_PI_2();
        let k = ((x - half_pi) / T::PI()).round();
        (x - (half_pi + k * T::PI())).abs() <= tol * x.abs()
    };
    Ok(off(a) || off(b))
}
