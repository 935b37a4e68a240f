//! Extraction of the effective cavity parameters (ω_c, κ) and the critical
//! photon number of the localized mode.
//!
//! Two independent estimators are provided:
//!
//! * [`extract_from_phase`]: ω_c is where the reflection phase returns to
//!   zero (mod 2π) and κ is the distance between the points where it sits
//!   at ±π/2 relative to that crossing.
//! * [`extract_from_energy`]: ω_c and κ are the peak position and full width
//!   at half maximum of E/P.
//!
//! Both search the open interval between ω₂ and ω₃, where the resonance of
//! the lowest branch always lies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::PhysicalConstants;
use crate::modes::phase_arguments;
use crate::numerics::{self, Bracket};
use crate::spectroscopy::{energy_ratio, lorentzian};
use crate::squid::{self, flux_for_omega3};
use crate::{BoundaryCondition, CouplerError, DeviceParams, Result, Scalar};

/// Windows narrower than this (in Hz of ω/2π) are treated as exactly decoupled.
pub const DECOUPLED_FLOOR_HZ: f64 = 1e3;

const ENERGY_GRID_POINTS: usize = 4001;
const MIN_SAMPLES_ABOVE_HALF: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    PhaseShift,
    EnergyLorentzian,
}

/// Effective single-mode parameters, angular units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    pub omega_c: T,
    pub kappa: T,
    pub method: ExtractionMethod,
    /// Search interval (min(ω₂, ω₃), max(ω₂, ω₃)).
    pub window: (T, T),
}

/// Search window between ω₂ and ω₃, or `Decoupled` when it collapses.
pub fn search_window<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>) -> Result<(T, T)> {
    let w2 = dev.omega2();
    let w3 = squid::omega3(dev, bc)?;
    let detuning = w3 - w2;
    if detuning.abs() < T::lit(DECOUPLED_FLOOR_HZ * std::f64::consts::TAU) || detuning.abs() <= T::lit(1e-12) * w2 {
        return Err(CouplerError::Decoupled { detuning_hz: detuning.as_f64() / std::f64::consts::TAU });
    }
    Ok((w2.min(w3), w2.max(w3)))
}

/// ω_c from the phase zero crossing, κ from the ±π/2 points around it.
///
/// All three conditions are solved in pole-free form: the zero crossing is
/// sin(a + b) = 0 and tan θ = ±1 is sin(a + b) ∓ cos a cos b = 0.
pub fn extract_from_phase<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>) -> Result<CavityParams<T>> {
    let (lo, hi) = search_window(dev, bc)?;
    let parts = |w: T| -> T {
        match phase_arguments(dev, bc, w) {
            Ok((a, b, _)) => (a + b).sin(),
            Err(_) => T::nan(),
        }
    };
    let tilted = |sign: T| {
        move |w: T| -> T {
            match phase_arguments(dev, bc, w) {
                Ok((a, b, _)) => (a + b).sin() - sign * a.cos() * b.cos(),
                Err(_) => T::nan(),
            }
        }
    };
    let tol = T::lit(numerics::MIN_REL_TOL).max(T::epsilon() * T::lit(4.0));

    let bracket = Bracket::new(parts, lo, hi).map_err(|_| CouplerError::CrossingNotBracketed { what: "phase zero" })?;
    let omega_c = numerics::find_root(parts, &bracket, tol)?;

    let below = tilted(-T::one());
    let bracket =
        Bracket::new(below, lo, omega_c).map_err(|_| CouplerError::CrossingNotBracketed { what: "phase -pi/2" })?;
    let omega_minus = numerics::find_root(below, &bracket, tol)?;

    let above = tilted(T::one());
    let bracket =
        Bracket::new(above, omega_c, hi).map_err(|_| CouplerError::CrossingNotBracketed { what: "phase +pi/2" })?;
    let omega_plus = numerics::find_root(above, &bracket, tol)?;

    Ok(CavityParams {
        omega_c,
        kappa: omega_plus - omega_minus,
        method: ExtractionMethod::PhaseShift,
        window: (lo, hi),
    })
}

/// ω_c and κ as peak position and FWHM of the stored-energy spectrum.
pub fn extract_from_energy<T: Scalar>(dev: &DeviceParams<T>, bc: &BoundaryCondition<T>) -> Result<CavityParams<T>> {
    let (lo, hi) = search_window(dev, bc)?;
    let ep = |w: T| energy_ratio(dev, bc, w).unwrap_or_else(|_| T::nan());
    let grid = numerics::zoom_to_peak(ep, lo, hi, ENERGY_GRID_POINTS, MIN_SAMPLES_ABOVE_HALF)?;
    let peak = numerics::peak_and_halfmax(&grid, ep)?;
    Ok(CavityParams {
        omega_c: peak.x_peak,
        kappa: peak.full_width(),
        method: ExtractionMethod::EnergyLorentzian,
        window: (lo, hi),
    })
}

/// Largest deviation of E/P from the Lorentzian with `params`, relative to
/// its peak value 4/κ, over |ω − ω_c| ≤ `span` κ.
pub fn lorentzian_deviation<T: Scalar>(
    dev: &DeviceParams<T>,
    bc: &BoundaryCondition<T>,
    params: &CavityParams<T>,
    span: T,
    n_points: usize,
) -> Result<T> {
    let half = span * params.kappa;
    let peak = T::lit(4.0) / params.kappa;
    let mut worst = T::zero();
    for w in numerics::linspace(params.omega_c - half, params.omega_c + half, n_points.max(2)) {
        let dev_ = (energy_ratio(dev, bc, w)? - lorentzian(w, params.omega_c, params.kappa)?).abs() / peak;
        worst = worst.max(dev_);
    }
    Ok(worst)
}

/// Both estimates for one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityPair<T> {
    pub phase: CavityParams<T>,
    pub energy: CavityParams<T>,
}

/// One row of a sweep over ω₃; failures are kept per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub omega3: T,
    pub outcome: Result<CavityPair<T>>,
}

/// Both extractions at the bias that puts ω₃ at `omega3`.
pub fn characterize_at<T: Scalar>(dev: &DeviceParams<T>, omega3: T) -> Result<CavityPair<T>> {
    let bc = flux_for_omega3(dev, omega3)?;
    Ok(CavityPair { phase: extract_from_phase(dev, &bc)?, energy: extract_from_energy(dev, &bc)? })
}

/// Runs [`characterize_at`] for every target, in parallel, keeping input order.
pub fn sweep_vs_boundary<T: Scalar>(dev: &DeviceParams<T>, omega3_values: &[T]) -> Vec<SweepRow<T>> {
    omega3_values.par_iter().map(|&omega3| SweepRow { omega3, outcome: characterize_at(dev, omega3) }).collect()
}

/// Photon-number limit of the linear SQUID description for a given L₃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPhotonResult<T> {
    pub l3: T,
    pub n_crit: T,
    /// Whether some flux bias can bring ω₃ to ω₂ at this L₃.
    pub tunable_to_omega2: bool,
}

fn stub_node_factor<T: Scalar>(dev: &DeviceParams<T>, l3: T) -> Result<T> {
    if !(l3.is_finite() && l3 > T::zero()) {
        return Err(CouplerError::Invalid { field: "l3", requirement: "positive", value: l3.as_f64() });
    }
    let s = (T::PI() * l3 / (T::lit(2.0) * dev.l2())).sin();
    if s.abs() < T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) {
        return Err(CouplerError::DivergentNcrit { l3_m: l3.as_f64() });
    }
    Ok(s)
}

/// Largest cavity amplitude φ₀ keeping the junction flux at ħ/2e:
/// |φ₀ sin(πL₃/2L₂)| = ħ/2e.
pub fn linearization_flux_bound<T: Scalar>(dev: &DeviceParams<T>, l3: T) -> Result<T> {
    let s = stub_node_factor(dev, l3)?;
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    Ok(hbar / (T::lit(2.0) * e) / s.abs())
}

/// Photons in the cavity mode of amplitude `phi0`: N = π(1 + L₃/L₂) φ₀² / (4ħZ).
pub fn photon_number<T: Scalar>(dev: &DeviceParams<T>, l3: T, phi0: T) -> T {
    let hbar = PhysicalConstants::reduced_planck::<T>();
    T::PI() * (T::one() + l3 / dev.l2()) * phi0 * phi0 / (T::lit(4.0) * hbar * dev.impedance())
}

/// N_crit = πħ(1 + L₃/L₂) / (16 e² Z sin²(πL₃/2L₂)).
pub fn critical_photon_number<T: Scalar>(dev: &DeviceParams<T>, l3: T) -> Result<CriticalPhotonResult<T>> {
    let s = stub_node_factor(dev, l3)?;
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    let n_crit = T::PI() * (hbar / e) * (T::one() + l3 / dev.l2()) / (T::lit(16.0) * e * dev.impedance() * s * s);
    let tunable_to_omega2 = match dev.with_l3(l3) {
        Ok(d) => squid::is_tunable_to(&d, d.omega2()),
        Err(_) => false,
    };
    Ok(CriticalPhotonResult { l3, n_crit, tunable_to_omega2 })
}

/// Largest L₃ in `[lo, hi]` for which ω₃ can still reach ω₂, by bisection on
/// the tunability predicate. Assumes tunable at `lo` and not at `hi`.
pub fn tunability_cutoff<T: Scalar>(dev: &DeviceParams<T>, lo: T, hi: T) -> Result<T> {
    let tunable = |l3: T| -> Result<bool> {
        let d = dev.with_l3(l3)?;
        Ok(squid::is_tunable_to(&d, d.omega2()))
    };
    if !tunable(lo)? || tunable(hi)? {
        return Err(CouplerError::CrossingNotBracketed { what: "tunability cutoff" });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > T::lit(1e-12) * b {
        let mid = a + (b - a) / T::lit(2.0);
        if !(mid > a && mid < b) {
            break;
        }
        if tunable(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Device;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn dev() -> Device {
        Device::reference_device()
    }

    fn bc(f3: f64) -> BoundaryCondition<f64> {
        flux_for_omega3(&dev(), TAU * f3 * 1e9).unwrap()
    }

    // 50-digit solve of the tan form of the phase conditions
    const OMEGA_C_9_9: f64 = 62_406_610_787.421_44;
    const KAPPA_9_9: f64 = 2_921_746.542_449_180_3;
    const KAPPA_9_0: f64 = 287_392_547.327_195_94;
    const KAPPA_9_999: f64 = 292.336_634_842_579_64;
    const KAPPA_ENERGY_9_9: f64 = 2_921_880.594_921_009;

    #[test]
    fn phase_method_at_9_9() {
        let p = extract_from_phase(&dev(), &bc(9.9)).unwrap();
        assert!(p.omega_c > TAU * 9.9e9 && p.omega_c < TAU * 10e9);
        assert_relative_eq!(p.omega_c, OMEGA_C_9_9, max_relative = 1e-11);
        assert_relative_eq!(p.kappa, KAPPA_9_9, max_relative = 1e-7);
        assert_eq!(p.method, ExtractionMethod::PhaseShift);
    }

    #[test]
    fn energy_method_at_9_9() {
        let e = extract_from_energy(&dev(), &bc(9.9)).unwrap();
        let p = extract_from_phase(&dev(), &bc(9.9)).unwrap();
        assert_relative_eq!(e.kappa, KAPPA_ENERGY_9_9, max_relative = 1e-6);
        assert!((e.omega_c - p.omega_c).abs() / p.omega_c < 1e-3);
        assert!((e.kappa - p.kappa).abs() / p.kappa < 0.05);
    }

    #[test]
    fn kappa_collapses_toward_omega2() {
        let k = |f3| extract_from_phase(&dev(), &bc(f3)).unwrap().kappa;
        assert_relative_eq!(k(9.0), KAPPA_9_0, max_relative = 1e-7);
        assert_relative_eq!(k(9.999), KAPPA_9_999, max_relative = 1e-4);
        assert!(k(9.99) * 10.0 < k(9.9));
        let e = extract_from_energy(&dev(), &bc(9.99)).unwrap();
        let e9 = extract_from_energy(&dev(), &bc(9.9)).unwrap();
        assert!(e.kappa * 10.0 < e9.kappa);
    }

    #[test]
    fn maximal_detuning_reaches_gigahertz() {
        let d = dev();
        let w3 = squid::omega3(&d, &BoundaryCondition::new(std::f64::consts::PI)).unwrap();
        let p = extract_from_phase(&d, &flux_for_omega3(&d, w3).unwrap()).unwrap();
        let k_ghz = p.kappa / TAU / 1e9;
        assert!(k_ghz > 0.3 && k_ghz < 10.0, "{k_ghz}");
    }

    #[test]
    fn decoupled_point_is_flagged() {
        let d = dev();
        let bc = flux_for_omega3(&d, d.omega2()).unwrap();
        assert!(matches!(extract_from_phase(&d, &bc), Err(CouplerError::Decoupled { .. })));
        assert!(matches!(extract_from_energy(&d, &bc), Err(CouplerError::Decoupled { .. })));
    }

    #[test]
    fn sweep_keeps_order_and_flags_rows() {
        let d = dev();
        let targets: Vec<f64> = [9.0, 9.5, 10.0, 9.9, 12.0].iter().map(|f| TAU * f * 1e9).collect();
        let rows = sweep_vs_boundary(&d, &targets);
        assert_eq!(rows.iter().map(|r| r.omega3).collect::<Vec<_>>(), targets);
        assert!(rows[0].outcome.is_ok() && rows[1].outcome.is_ok() && rows[3].outcome.is_ok());
        assert!(matches!(rows[2].outcome, Err(CouplerError::Decoupled { .. })));
        assert!(matches!(rows[4].outcome, Err(CouplerError::Untunable { .. })));
    }

    #[test]
    fn synthetic_lorentzian_through_energy_estimator() {
        let (wc, k) = (6.2e10, 3.1e6);
        let f = |w: f64| lorentzian(w, wc, k).unwrap();
        let g = numerics::zoom_to_peak(f, 6.0e10, 6.3e10, 4001, 8).unwrap();
        let p = numerics::peak_and_halfmax(&g, f).unwrap();
        assert_relative_eq!(p.x_peak, wc, max_relative = 1e-6);
        assert_relative_eq!(p.full_width(), k, max_relative = 1e-6);
    }

    #[test]
    fn critical_photon_numbers() {
        // 40-digit evaluation
        let d = dev();
        let n25 = critical_photon_number(&d, 2.5e-3).unwrap();
        let n45 = critical_photon_number(&d, 4.5e-3).unwrap();
        assert_relative_eq!(n25.n_crit, 32.266_009_304_360_63, max_relative = 1e-9);
        assert_relative_eq!(n45.n_crit, 473.051_650_624_764_3, max_relative = 1e-9);
        assert!(n45.tunable_to_omega2 && n25.tunable_to_omega2);
        assert!(!critical_photon_number(&d, 4.95e-3).unwrap().tunable_to_omega2);
        assert!(matches!(critical_photon_number(&d, 5.0e-3), Err(CouplerError::DivergentNcrit { .. })));
        assert!(critical_photon_number(&d, 0.0).is_err());
    }

    #[test]
    fn ncrit_equals_bound_into_photon_number() {
        let d = dev();
        for l3 in [0.7e-3, 2.5e-3, 3.3e-3, 4.5e-3, 4.9e-3, 6.1e-3] {
            let direct = critical_photon_number(&d, l3).unwrap().n_crit;
            let composed = photon_number(&d, l3, linearization_flux_bound(&d, l3).unwrap());
            assert_relative_eq!(direct, composed, max_relative = 8.0 * f64::EPSILON);
        }
    }

    #[test]
    fn photon_number_matches_integrated_energy() {
        // trapezoid integral of the energy density of the cavity mode
        let d = dev();
        let l3 = 4.5e-3;
        let (phi0, w2, v) = (1.3e-16, d.omega2(), d.velocity());
        let density = |r: f64| {
            let (s, c) = ((w2 * r / v).sin(), (w2 * r / v).cos());
            let cap = d.cap_per_len() / 2.0 * (w2 * phi0 * s).powi(2);
            let ind = 1.0 / (2.0 * d.ind_per_len()) * (phi0 * w2 / v * c).powi(2);
            cap + ind
        };
        let integrate = |len: f64| {
            let n = 20_000;
            let h = len / n as f64;
            (0..=n).map(|i| density(i as f64 * h) * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h
        };
        let energy = integrate(d.l2()) + integrate(l3);
        let n = energy / (PhysicalConstants::REDUCED_PLANCK * w2);
        assert_relative_eq!(n, photon_number(&d, l3, phi0), max_relative = 1e-8);
    }

    #[test]
    fn cutoff_near_4_93_mm() {
        let l = tunability_cutoff(&dev(), 4.0e-3, 4.999e-3).unwrap();
        assert_relative_eq!(l, 4.932_463_366_236_38e-3, max_relative = 1e-9);
    }
}
