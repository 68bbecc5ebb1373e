//! Monitored functionals of discrete states.
//!
//! Integrals use the trapezoid rule over the nodes `x_j = j h`, `j = 0..=N`,
//! and derivatives use the scheme's own difference stencils. Two quantities
//! are deliberately the scheme's exact discrete counterparts rather than
//! quadratures: the Lyapunov functional (built on the discrete energy, whose
//! balance the semi-discrete system satisfies exactly) and
//! [`scheme_dissipation`].

mod convergence;
mod fit;

pub use convergence::{convergence_study, ConvergenceReport, FieldConvergence, Order};
pub use fit::{decay_rate_fit, gronwall_constant, DecayFit};

use crate::dynamics::{DiscreteState, DynamicsError, Equilibrium, SimulateError};
use crate::model::{ForcingSpec, ModelParams};
use crate::quadrature::trapezoid_uniform;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("grids differ ({0} vs {1} cells)")]
    GridMismatch(usize, usize),
    #[error("effective velocity needs theta > 0")]
    ThetaZero,
    #[error("fit window holds {0} samples, need at least 10")]
    TooFewSamples(usize),
    #[error("sample {y} at t = {t} is not positive")]
    NonPositiveSample { t: f64, y: f64 },
    #[error("need at least two records in the window")]
    EmptyWindow,
    #[error("need at least 3 grids, got {0}")]
    TooFewGrids(usize),
    #[error("grids must double at each level: {0:?}")]
    NonNestedGrids(Vec<usize>),
    #[error("simulation failed: {0}")]
    Simulation(Box<SimulateError>),
}

impl From<DynamicsError> for DiagnosticsError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::GridMismatch(a, b) => DiagnosticsError::GridMismatch(a, b),
            other => DiagnosticsError::Simulation(Box::new(SimulateError::Setup(other))),
        }
    }
}

fn same_grid(a: &DiscreteState, b: &DiscreteState) -> Result<(), DiagnosticsError> {
    Ok(a.same_grid(b)?)
}

/// Values recorded at each snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Kinetic energy.
    pub e: f64,
    /// Lyapunov functional relative to the rest state.
    pub v1: f64,
    /// Instantaneous dissipation rate.
    pub d: f64,
    /// Weighted functional.
    pub b: f64,
    pub i_sup: f64,
    /// Density inside `[rho_min/2, 3 rho_max/2]` of the rest state.
    pub within_bounds: bool,
    pub mass_vol_residual: f64,
    /// Cumulative energy-balance residual since `t = 0`.
    pub energy_residual: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub boundary_radius: f64,
    pub u_over_r_sup: f64,
    /// `int_0^t D`
    pub dissipated: f64,
    /// `int_0^t` of the external power.
    pub work: f64,
}

/// `int 1/2 u^2 dx`, trapezoid over the nodes `0..=N`.
pub fn kinetic_energy(state: &DiscreteState) -> f64 {
    let n = state.n_cells();
    let vals: Vec<f64> = state.u[..=n].iter().map(|u| 0.5 * u * u).collect();
    trapezoid_uniform(&vals, state.h)
}

/// Kinetic part of the scheme's discrete energy, `sum_{j=1}^N h u_j^2 / 2`.
pub fn scheme_kinetic_energy(state: &DiscreteState) -> f64 {
    let n = state.n_cells();
    state.u[1..=n].iter().map(|u| 0.5 * state.h * u * u).sum()
}

/// Potential part of the scheme's discrete energy:
/// internal energy of the cells, boundary work `P_inf r_{N+1}^n / n` and the
/// gravitational potential of the nodes.
pub fn potential_energy_h(state: &DiscreteState, p: &ModelParams) -> f64 {
    let n = state.n_cells();
    let nf = p.dim();
    let h = state.h;
    let internal: f64 = state.rho.iter().map(|&d| h * p.pressure_coeff * d.powf(p.gamma - 1.0) / (p.gamma - 1.0)).sum();
    let boundary = p.p_inf * state.boundary_radius().powi(p.n as i32) / nf;
    let gravity: f64 = if p.gravity == 0.0 {
        0.0
    } else {
        (1..=n)
            .map(|j| {
                let x = j as f64 * h;
                let r = state.r[j];
                let phi = if p.n == 2 { r.ln() } else { (r.powf(2.0 - nf) - 1.0) / (2.0 - nf) };
                h * p.gravity * x * phi
            })
            .sum()
    };
    internal + boundary + gravity
}

/// Full discrete energy of the scheme.
pub fn discrete_energy(state: &DiscreteState, p: &ModelParams) -> f64 {
    scheme_kinetic_energy(state) + potential_energy_h(state, p)
}

/// Lyapunov functional `V1 = kinetic + S[V] - S[V_inf]`, discretised as the
/// scheme's energy relative to its rest state.
pub fn lyapunov_v1(state: &DiscreteState, reference: &Equilibrium, p: &ModelParams) -> Result<f64, DiagnosticsError> {
    same_grid(state, &reference.state)?;
    Ok(discrete_energy(state, p) - reference.potential)
}

/// `w_i = r_i^(n-1) u_i` at every node.
fn flux(state: &DiscreteState) -> Vec<f64> {
    let ni = state.dim as i32;
    state.r.iter().zip(&state.u).map(|(r, u)| r.powi(ni - 1) * u).collect()
}

/// Dissipation rate in its sum-of-squares form,
/// `(2c1/n + c2) rho^(1+theta) (r^(n-1) u)_x^2
///  + 2(n-1)/n c1 rho^(1+theta) (r^(n-1) u_x - u / (r rho))^2`,
/// with differences across each cell and cell-centred `u` and `r` (mean of
/// `r^n`).
pub fn dissipation(state: &DiscreteState, p: &ModelParams) -> f64 {
    let nf = p.dim();
    let ni = p.n as i32;
    let h = state.h;
    let (k1, k2) = p.dissipation_coefficients();
    let w = flux(state);
    let mut acc = 0.0;
    for (i, &rho) in state.rho.iter().enumerate() {
        let dw = (w[i + 1] - w[i]) / h;
        let du = (state.u[i + 1] - state.u[i]) / h;
        let rc = (0.5 * (state.r[i].powi(ni) + state.r[i + 1].powi(ni))).powf(1.0 / nf);
        let uc = 0.5 * (state.u[i] + state.u[i + 1]);
        let shear = rc.powi(ni - 1) * du - uc / (rc * rho);
        let weight = rho.powf(1.0 + p.theta);
        acc += weight * (k1 * dw * dw + k2 * shear * shear);
    }
    h * acc
}

/// Dissipation exactly as produced by the scheme's energy balance:
/// `h sum_i [rho_i K_i (delta w_i)^2 - 2(n-1) mu_i delta q_i]`,
/// `w = r^(n-1) u`, `q = r^(n-2) u^2`.
pub fn scheme_dissipation(state: &DiscreteState, p: &ModelParams) -> f64 {
    let ni = p.n as i32;
    let h = state.h;
    let w = flux(state);
    let q: Vec<f64> = state.r.iter().zip(&state.u).map(|(r, u)| r.powi(ni - 2) * u * u).collect();
    let mut acc = 0.0;
    for (i, &rho) in state.rho.iter().enumerate() {
        let s = rho.powf(p.theta);
        let dw = (w[i + 1] - w[i]) / h;
        acc += rho * (2.0 * p.c1 + p.c2) * s * dw * dw - 2.0 * (p.dim() - 1.0) * p.c1 * s * (q[i + 1] - q[i]) / h;
    }
    h * acc
}

/// Power of the perturbations:
/// `-dP r_{N+1}^(n-1) u_{N+1} - sum_j h u_j df_j`.
pub fn power_input(state: &DiscreteState, p: &ModelParams, forcing: &ForcingSpec) -> f64 {
    let n = state.n_cells();
    let t = state.t;
    let ni = p.n as i32;
    let mass = n as f64 * state.h;
    let boundary = -forcing.delta_pressure(t) * state.r[n + 1].powi(ni - 1) * state.u[n + 1];
    let body: f64 =
        (1..=n).map(|j| state.h * state.u[j] * forcing.delta_force(j as f64 * state.h / mass, state.r[j], t)).sum();
    boundary - body
}

/// Centred differences with one-sided closures at both ends.
fn derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    (0..=n)
        .map(|j| match j {
            0 => (v[1] - v[0]) / h,
            j if j == n => (v[n] - v[n - 1]) / h,
            j => (v[j + 1] - v[j - 1]) / (2.0 * h),
        })
        .collect()
}

/// Weighted functional with `alpha = 3/2 - n`:
/// `int (rho - rho_inf)^2 + r^(2n-2+alpha) (rho - rho_inf)_x^2 + u^2/r^2
///  + r^(2n-2) u_x^2 + r^(2n-2+alpha) ((rho^(1+theta) (r^(n-1) u)_x)_x)^2`.
pub fn weighted_b(state: &DiscreteState, reference: &Equilibrium, p: &ModelParams) -> Result<f64, DiagnosticsError> {
    same_grid(state, &reference.state)?;
    let n = state.n_cells();
    let h = state.h;
    let ni = p.n as i32;
    let wexp = 2.0 * p.dim() - 2.0 + p.alpha();
    let dev: Vec<f64> = state.rho.iter().zip(reference.rho()).map(|(a, b)| a - b).collect();
    let ddev = derivative(&dev, h);
    let u = &state.u[..=n];
    let du = derivative(u, h);
    let w = flux(state);
    let dw = derivative(&w[..=n], h);
    let g: Vec<f64> = (0..=n).map(|j| state.rho[j].powf(1.0 + p.theta) * dw[j]).collect();
    let dg = derivative(&g, h);
    let vals: Vec<f64> = (0..=n)
        .map(|j| {
            let r = state.r[j];
            let rw = r.powf(wexp);
            dev[j] * dev[j]
                + rw * ddev[j] * ddev[j]
                + (u[j] / r).powi(2)
                + r.powi(2 * ni - 2) * du[j] * du[j]
                + rw * dg[j] * dg[j]
        })
        .collect();
    Ok(trapezoid_uniform(&vals, h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicator {
    /// `max |rho_j - rho_inf_j| + max |u_j / r_j|`
    pub value: f64,
    pub rho_deviation: f64,
    pub u_over_r: f64,
    /// Density inside `[min rho_inf / 2, 3 max rho_inf / 2]`.
    pub within_bounds: bool,
}

pub fn sup_indicator(state: &DiscreteState, reference: &Equilibrium) -> Result<Indicator, DiagnosticsError> {
    same_grid(state, &reference.state)?;
    let n = state.n_cells();
    let rho_deviation = state.rho.iter().zip(reference.rho()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let u_over_r = (1..=n).map(|j| (state.u[j] / state.r[j]).abs()).fold(0.0, f64::max);
    let lo = reference.rho().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = reference.rho().iter().copied().fold(0.0, f64::max);
    let within_bounds = state.rho.iter().all(|&d| d >= 0.5 * lo && d <= 1.5 * hi);
    Ok(Indicator { value: rho_deviation + u_over_r, rho_deviation, u_over_r, within_bounds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveVelocity {
    /// `H_j` for `j = 0..=N`; `H_0 = 0`.
    pub values: Vec<f64>,
    /// `int H^2 dx`
    pub l2: f64,
}

/// `H_j = u_j + ((2c1 + c2)/theta) r_j^(n-1) delta(rho^theta - rho_inf^theta)_{j-1}`.
pub fn effective_velocity(
    state: &DiscreteState,
    reference: &Equilibrium,
    p: &ModelParams,
) -> Result<EffectiveVelocity, DiagnosticsError> {
    if !(p.theta > 0.0) {
        return Err(DiagnosticsError::ThetaZero);
    }
    same_grid(state, &reference.state)?;
    let n = state.n_cells();
    let ni = p.n as i32;
    let c = (2.0 * p.c1 + p.c2) / p.theta;
    let d: Vec<f64> = state.rho.iter().zip(reference.rho()).map(|(a, b)| a.powf(p.theta) - b.powf(p.theta)).collect();
    let mut values = vec![0.0; n + 1];
    for j in 1..=n {
        values[j] = state.u[j] + c * state.r[j].powi(ni - 1) * (d[j] - d[j - 1]) / state.h;
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    Ok(EffectiveVelocity { l2: trapezoid_uniform(&sq, state.h), values })
}

/// `int (u1-u2)^2 + (rho1-rho2)^2 + x^(-2/n) (r1-r2)^2 dx` over the nodes,
/// with `x_0` replaced by `h/2`.
pub fn continuous_dependence_metric(a: &DiscreteState, b: &DiscreteState) -> Result<f64, DiagnosticsError> {
    same_grid(a, b)?;
    let n = a.n_cells();
    let nf = a.dim as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|j| {
            let x = if j == 0 { 0.5 * a.h } else { j as f64 * a.h };
            (a.u[j] - b.u[j]).powi(2) + (a.rho[j] - b.rho[j]).powi(2) + x.powf(-2.0 / nf) * (a.r[j] - b.r[j]).powi(2)
        })
        .collect();
    Ok(trapezoid_uniform(&vals, a.h))
}

/// Normalised balance `|dV1 + int D - work| / int D`; the absolute value
/// when nothing has been dissipated.
fn normalised_balance(dv1: f64, dissipated: f64, work: f64) -> f64 {
    let r = (dv1 + dissipated - work).abs();
    if dissipated.abs() < 1e-30 {
        r
    } else {
        r / dissipated
    }
}

/// Energy-balance residual between the first and last record of a window.
pub fn energy_balance_residual(window: &[DiagnosticsRecord]) -> Result<f64, DiagnosticsError> {
    let (Some(first), Some(last)) = (window.first(), window.last()) else {
        return Err(DiagnosticsError::EmptyWindow);
    };
    if window.len() < 2 {
        return Err(DiagnosticsError::EmptyWindow);
    }
    Ok(normalised_balance(last.v1 - first.v1, last.dissipated - first.dissipated, last.work - first.work))
}

/// Running time integrals of dissipation and external power (trapezoid rule
/// over the accepted steps).
#[derive(Debug, Clone, PartialEq)]
pub struct Totals {
    pub dissipated: f64,
    pub work: f64,
    pub v1_initial: f64,
    d_prev: f64,
    w_prev: f64,
}

impl Totals {
    pub fn start(state: &DiscreteState, reference: &Equilibrium, p: &ModelParams, forcing: &ForcingSpec) -> Self {
        Totals {
            dissipated: 0.0,
            work: 0.0,
            v1_initial: discrete_energy(state, p) - reference.potential,
            d_prev: dissipation(state, p),
            w_prev: power_input(state, p, forcing),
        }
    }

    pub fn advance(&mut self, state: &DiscreteState, p: &ModelParams, forcing: &ForcingSpec, dt: f64) {
        let d = dissipation(state, p);
        let w = power_input(state, p, forcing);
        self.dissipated += 0.5 * dt * (self.d_prev + d);
        self.work += 0.5 * dt * (self.w_prev + w);
        self.d_prev = d;
        self.w_prev = w;
    }
}

/// Evaluates every monitored quantity at `state`.
pub fn record(
    state: &DiscreteState,
    reference: &Equilibrium,
    p: &ModelParams,
    forcing: &ForcingSpec,
    totals: &Totals,
) -> DiagnosticsRecord {
    let _ = forcing;
    let v1 = discrete_energy(state, p) - reference.potential;
    let ind = sup_indicator(state, reference).expect("reference on the simulation grid");
    DiagnosticsRecord {
        t: state.t,
        e: kinetic_energy(state),
        v1,
        d: dissipation(state, p),
        b: weighted_b(state, reference, p).expect("reference on the simulation grid"),
        i_sup: ind.value,
        within_bounds: ind.within_bounds,
        mass_vol_residual: state.volume_residual(),
        energy_residual: normalised_balance(v1 - totals.v1_initial, totals.dissipated, totals.work),
        rho_min: state.rho_min(),
        rho_max: state.rho_max(),
        boundary_radius: state.boundary_radius(),
        u_over_r_sup: ind.u_over_r,
        dissipated: totals.dissipated,
        work: totals.work,
    }
}
