//! Tunable cavity-waveguide coupler built from a semi-infinite transmission
//! line with two finite branches: an open-ended port and a stub terminated by
//! a flux-biased SQUID.
//!
//! Moving the SQUID boundary condition shifts the node of the localized mode
//! living in the two finite ports. When the node sits exactly on the branch
//! point the mode decouples from the semi-infinite line; detuning it recovers
//! a galvanic coupling that reaches gigahertz linewidths.
//!
//! The physics is generic over the scalar type (see [`Scalar`]); the aliases
//! below fix it to `f64`, which is what every caller in practice wants.
//!
//! ```
//! use coupler::{Boundary, Device};
//!
//! let dev = Device::reference_device();
//! let f3 = coupler::squid::omega3(&dev, &Boundary::new(0.0)).unwrap() / (2.0 * std::f64::consts::PI);
//! assert!((f3 / 1e9 - 10.946).abs() < 1e-3);
//! ```

// `!(x > y)` is used on purpose so that NaN takes the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characterize;
pub mod device;
mod error;
pub mod modes;
pub mod numerics;
mod scalar;
pub mod spectroscopy;
pub mod squid;

pub use characterize::{CavityPair, CavityParams, CriticalPhotonResult, ExtractionMethod, SweepRow};
pub use device::{BoundaryCondition, DeviceConfig, DeviceParams, PhysicalConstants};
pub use error::{CouplerError, NumericsError};
pub use modes::{CavityMode, ModeSolution, Port};
pub use numerics::{Bracket, GridFunction, PeakWidth};
pub use scalar::Scalar;
pub use spectroscopy::Spectrum;
pub use squid::StubState;

pub type Device = DeviceParams<f64>;
pub type Boundary = BoundaryCondition<f64>;
pub type Mode = ModeSolution<f64>;
pub type Stub = StubState<f64>;
pub type Cavity = CavityParams<f64>;
pub type SpectrumF64 = Spectrum<f64>;

pub type Result<T, E = CouplerError> = std::result::Result<T, E>;
