//! Free-boundary, spherically symmetric compressible Navier-Stokes flow with
//! density-dependent viscosity, written in Lagrangian mass coordinates.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`model`] holds the physical constants, their admissibility checks, the
//!   polytropic pressure law, the power-law viscosity and the forcing terms.
//! * [`stationary`] solves the hydrostatic problem (shooting and fixed-point
//!   iteration), evaluates the static potential energy and the static
//!   stability form.
//! * [`dynamics`] is the semi-discrete difference scheme on the mass grid with
//!   its free-boundary closure, advanced in time by a classical four-stage
//!   Runge-Kutta method.
//! * [`diagnostics`] evaluates the monitored functionals (energy, Lyapunov
//!   functional, dissipation, weighted norms) and runs decay-rate fits and
//!   convergence studies.
//! * [`config`] parses the flat `key = value` run configuration.
//!
//! All quantities are dimensionless.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod model;
pub mod quadrature;
pub mod stationary;

pub use config::{Config, ConfigError};
pub use diagnostics::{DecayFit, DiagnosticsRecord};
pub use dynamics::{DiscreteState, InitialData, SimConfig, Trajectory};
pub use model::{ForcingSpec, ModelParams, ValidationReport};
pub use stationary::StationaryProfile;
