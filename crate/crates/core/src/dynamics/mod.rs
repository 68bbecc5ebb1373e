//! Semi-discrete difference scheme on the mass grid and its time integration.
//!
//! Cells `i = 0..=N` carry densities `rho_i`; nodes `j = 0..=N+1` carry
//! velocities `u_j` and radii `r_j`. Node 0 is the regularised centre with
//! `u_0 = 0` and `r_0^n = h`; node `N + 1` is the free boundary, whose velocity
//! is fixed algebraically by the traction balance at every evaluation.

mod equilibrium;
mod init;
mod scheme;
mod simulate;

pub use equilibrium::{discrete_equilibrium, Equilibrium};
pub use init::{init_state, parse_custom_csv, InitialData, SimConfig};
pub use scheme::{closure_velocity, rhs, stable_dt, step, Derivatives, Stepper};
pub use simulate::{reconstruct, simulate, Abort, SimulateError, Snapshot, Trajectory};

use crate::model::{ModelError, ValidationReport};
use crate::stationary::StationaryError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("parameters rejected: {0}")]
    InvalidParams(ValidationReport),
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
    #[error("initial data: {0}")]
    InitialData(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error("density {value} at cell {index} is not positive")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("radii not increasing at node {index}")]
    NonMonotoneRadius { index: usize },
    #[error("non-finite value in state")]
    NonFinite,
    #[error("boundary closure is degenerate (coefficient {0})")]
    DegenerateClosure(f64),
    #[error("step rejected after {halvings} halvings (last dt = {dt})")]
    StepFailed { halvings: usize, dt: f64 },
    #[error("density fell below the vacuum threshold ({rho_min} < {threshold})")]
    Vacuum { rho_min: f64, threshold: f64 },
    #[error("time step underflow (dt = {0})")]
    DtUnderflow(f64),
    #[error("mass coordinate {x} outside [0, {mass}]")]
    OutOfRange { x: f64, mass: f64 },
    #[error("grids differ ({0} vs {1} cells)")]
    GridMismatch(usize, usize),
}

/// Discrete unknowns at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub t: f64,
    /// Mass step `M / N`.
    pub h: f64,
    /// Space dimension.
    pub dim: u32,
    /// `rho_0..rho_N`
    pub rho: Vec<f64>,
    /// `u_0..u_{N+1}`
    pub u: Vec<f64>,
    /// `r_0..r_{N+1}`
    pub r: Vec<f64>,
}

impl DiscreteState {
    pub fn n_cells(&self) -> usize {
        self.rho.len() - 1
    }

    /// Mass coordinate `j h` of node `j`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn mass(&self) -> f64 {
        self.n_cells() as f64 * self.h
    }

    pub fn boundary_radius(&self) -> f64 {
        *self.r.last().expect("state has nodes")
    }

    pub fn rho_min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i |r_i^n - h - n sum_{l<i} h / rho_l|` over all nodes, which the
    /// semi-discrete system conserves exactly.
    pub fn volume_residual(&self) -> f64 {
        let n = self.dim as i32;
        let nf = self.dim as f64;
        let mut acc = self.h;
        let mut worst: f64 = 0.0;
        for (i, &r) in self.r.iter().enumerate() {
            worst = worst.max((r.powi(n) - acc).abs());
            if i < self.rho.len() {
                acc += nf * self.h / self.rho[i];
            }
        }
        worst
    }

    /// Positivity, monotonicity and finiteness.
    pub fn check(&self) -> Result<(), DynamicsError> {
        if let Some((index, &value)) = self.rho.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            if value.is_nan() {
                return Err(DynamicsError::NonFinite);
            }
            return Err(DynamicsError::NonPositiveDensity { index, value });
        }
        if self.u.iter().chain(&self.r).chain(&self.rho).any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite);
        }
        if let Some(k) = self.r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(DynamicsError::NonMonotoneRadius { index: k + 1 });
        }
        Ok(())
    }

    pub(crate) fn same_grid(&self, other: &DiscreteState) -> Result<(), DynamicsError> {
        if self.rho.len() != other.rho.len() || self.h != other.h {
            Err(DynamicsError::GridMismatch(self.n_cells(), other.n_cells()))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::model::ModelParams;

    pub fn benchmark() -> ModelParams {
        ModelParams {
            n: 3,
            gamma: 5.0 / 3.0,
            pressure_coeff: 1.0,
            theta: 1.0,
            c1: 1.0,
            c2: 1.0,
            gravity: 1.0,
            p_inf: 0.1,
            mass: 1.0,
        }
    }

    pub fn weightless() -> ModelParams {
        ModelParams { gamma: 2.0, gravity: 0.0, p_inf: 4.0, ..benchmark() }
    }

    /// State with the given densities, radii from the volume identity and
    /// velocities `u` (the last entry is left as given).
    pub fn state_from(dim: u32, h: f64, rho: Vec<f64>, u: Vec<f64>) -> DiscreteState {
        let nf = dim as f64;
        let mut r = Vec::with_capacity(rho.len() + 1);
        let mut acc = h;
        r.push(acc.powf(1.0 / nf));
        for &d in &rho {
            acc += nf * h / d;
            r.push(acc.powf(1.0 / nf));
        }
        DiscreteState { t: 0.0, h, dim, rho, u, r }
    }
}
