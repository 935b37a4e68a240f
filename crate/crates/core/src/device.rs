//! Physical parameters of the three-port line and the SQUID bias.
//!
//! All values are stored in SI units (m/s, Ω, m, F, J). Display units
//! (mm, fF, μA) only appear in [`DeviceConfig`], which is the on-disk and
//! command-line representation.

use serde::{Deserialize, Serialize};

use crate::{CouplerError, Result, Scalar};

/// CODATA 2018 exact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhysicalConstants;

impl PhysicalConstants {
    /// Elementary charge, C.
    pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant, J s.
    pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

    pub fn electron_charge<T: Scalar>() -> T {
        T::lit(Self::ELECTRON_CHARGE)
    }

    pub fn reduced_planck<T: Scalar>() -> T {
        T::lit(Self::REDUCED_PLANCK)
    }
}

fn check_positive<T: Scalar>(field: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(CouplerError::Invalid { field, requirement: "positive", value: value.as_f64() })
    }
}

/// Josephson energy of a junction with critical current `ic`: ħ I_c / 2e.
pub fn josephson_energy_from_critical_current<T: Scalar>(ic: T) -> Result<T> {
    let ic = check_positive("ic", ic)?;
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    Ok(hbar * ic / (T::lit(2.0) * e))
}

/// Inverse of [`josephson_energy_from_critical_current`].
pub fn critical_current_from_josephson_energy<T: Scalar>(es: T) -> T {
    let e = PhysicalConstants::electron_charge::<T>();
    let hbar = PhysicalConstants::reduced_planck::<T>();
    T::lit(2.0) * e * es / hbar
}

/// Line and junction parameters. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams<T> {
    velocity: T,
    impedance: T,
    l2: T,
    l3: T,
    cs: T,
    es: T,
}

impl<T: Scalar> DeviceParams<T> {
    /// Builds from SI values. `es` is the Josephson energy of one of the two
    /// identical junctions.
    pub fn new(velocity: T, impedance: T, l2: T, l3: T, cs: T, es: T) -> Result<Self> {
        Ok(Self {
            velocity: check_positive("v", velocity)?,
            impedance: check_positive("impedance", impedance)?,
            l2: check_positive("l2", l2)?,
            l3: check_positive("l3", l3)?,
            cs: check_positive("cs", cs)?,
            es: check_positive("es", es)?,
        })
    }

    /// Same as [`DeviceParams::new`] but with the junction critical current in amperes.
    pub fn from_critical_current(velocity: T, impedance: T, l2: T, l3: T, cs: T, ic: T) -> Result<Self> {
        let es = josephson_energy_from_critical_current(ic)?;
        Self::new(velocity, impedance, l2, l3, cs, es)
    }

    /// Parameters of the reference device: v = 1e8 m/s, Z = 50 Ω,
    /// L2 = 2.5 mm, L3 = 4.5 mm, Cs = 100 fF, Ic = 5 μA.
    pub fn reference_device() -> Self {
        DeviceConfig::default().to_device().expect("defaults are valid")
    }

    /// Copy with a different Port 3 length.
    pub fn with_l3(&self, l3: T) -> Result<Self> {
        Ok(Self { l3: check_positive("l3", l3)?, ..*self })
    }

    pub fn velocity(&self) -> T {
        self.velocity
    }

    pub fn impedance(&self) -> T {
        self.impedance
    }

    pub fn l2(&self) -> T {
        self.l2
    }

    pub fn l3(&self) -> T {
        self.l3
    }

    pub fn cs(&self) -> T {
        self.cs
    }

    pub fn es(&self) -> T {
        self.es
    }

    pub fn critical_current(&self) -> T {
        critical_current_from_josephson_energy(self.es)
    }

    /// Capacitance per unit length, 1/(vZ).
    pub fn cap_per_len(&self) -> T {
        T::one() / (self.velocity * self.impedance)
    }

    /// Inductance per unit length, Z/v.
    pub fn ind_per_len(&self) -> T {
        self.impedance / self.velocity
    }

    /// Lowest frequency with a node of Port 2's mode at the branch:
    /// ω₂ L₂ / v = π/2.
    pub fn omega2(&self) -> T {
        T::PI() * self.velocity / (T::lit(2.0) * self.l2)
    }

    /// Upper end of the lowest Port 3 branch, πv/L₃. ω₃ always lies below it.
    pub fn omega3_ceiling(&self) -> T {
        T::PI() * self.velocity / self.l3
    }
}

/// Device parameters in display units, as read from JSON or flags.
///
/// Missing keys take the reference-device values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub v_m_per_s: f64,
    pub impedance_ohm: f64,
    pub l2_mm: f64,
    pub l3_mm: f64,
    pub cs_ff: f64,
    pub ic_ua: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self { v_m_per_s: 1e8, impedance_ohm: 50.0, l2_mm: 2.5, l3_mm: 4.5, cs_ff: 100.0, ic_ua: 5.0 }
    }
}

impl DeviceConfig {
    /// Converts to SI and validates. Field names in errors follow the
    /// display keys without their unit suffix (`cs`, `l2`, ...).
    pub fn to_device<T: Scalar>(&self) -> Result<DeviceParams<T>> {
        let lit = |field: &'static str, x: f64| -> Result<T> {
            check_positive(field, x)?;
            Ok(T::lit(x))
        };
        let v = lit("v", self.v_m_per_s)?;
        let z = lit("impedance", self.impedance_ohm)?;
        let l2 = lit("l2", self.l2_mm)? / T::lit(1e3);
        let l3 = lit("l3", self.l3_mm)? / T::lit(1e3);
        let cs = lit("cs", self.cs_ff)? / T::lit(1e15);
        let ic = lit("ic", self.ic_ua)? / T::lit(1e6);
        DeviceParams::from_critical_current(v, z, l2, l3, cs, ic)
    }

    /// Converts SI parameters back to display units, rounded to 12
    /// significant digits so that values entered in display units come back
    /// unchanged.
    pub fn from_device<T: Scalar>(dev: &DeviceParams<T>) -> Self {
        Self {
            v_m_per_s: round_sig(dev.velocity().as_f64()),
            impedance_ohm: round_sig(dev.impedance().as_f64()),
            l2_mm: round_sig(dev.l2().as_f64() * 1e3),
            l3_mm: round_sig(dev.l3().as_f64() * 1e3),
            cs_ff: round_sig(dev.cs().as_f64() * 1e15),
            ic_ua: round_sig(dev.critical_current().as_f64() * 1e6),
        }
    }
}

/// Rounds to 12 significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// External flux bias of the SQUID, as the phase φ_ex (flux in units of ħ/2e).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition<T> {
    phi_ex: T,
}

impl<T: Scalar> BoundaryCondition<T> {
    /// Panics on a non-finite phase; see [`BoundaryCondition::try_new`].
    pub fn new(phi_ex: T) -> Self {
        Self::try_new(phi_ex).expect("phi_ex must be finite")
    }

    pub fn try_new(phi_ex: T) -> Result<Self> {
        if phi_ex.is_finite() {
            Ok(Self { phi_ex })
        } else {
            Err(CouplerError::Invalid { field: "phi_ex", requirement: "finite", value: phi_ex.as_f64() })
        }
    }

    /// From the loop flux in units of the flux quantum h/2e.
    pub fn from_flux_quanta(flux: T) -> Result<Self> {
        Self::try_new(flux * T::TAU())
    }

    pub fn phi_ex(&self) -> T {
        self.phi_ex
    }

    pub fn flux_over_flux_quantum(&self) -> T {
        self.phi_ex / T::TAU()
    }

    /// |cos(φ_ex/2)|, the only way the bias enters the physics.
    pub fn abs_cos_half(&self) -> T {
        (self.phi_ex / T::lit(2.0)).cos().abs()
    }
}
