//! Exact rest state of the difference scheme.
//!
//! With `u = 0` the momentum equations reduce to the recursion
//! `P_j = P_{j-1} - G j h^2 / r_j^(2n-2)`, `r_j^n = r_{j-1}^n + n h / rho_{j-1}`,
//! and the closure forces `P_N = P_inf`. The central density is found by
//! bisection exactly as for the continuous profile.

use super::{DiscreteState, DynamicsError};
use crate::model::ModelParams;
use crate::stationary::StationaryError;

const MAX_DOUBLINGS: usize = 60;

/// Discrete hydrostatic state together with its potential energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub params: ModelParams,
    pub state: DiscreteState,
    /// Potential part of the discrete energy at rest.
    pub potential: f64,
}

impl Equilibrium {
    pub fn n_cells(&self) -> usize {
        self.state.n_cells()
    }

    pub fn rho(&self) -> &[f64] {
        &self.state.rho
    }
}

/// Runs the recursion from central density `s`; returns `P_N - P_inf`
/// (or `-P_inf` if the pressure is exhausted) and the state when complete.
fn march(p: &ModelParams, n_cells: usize, s: f64) -> (f64, Option<DiscreteState>) {
    let nf = p.dim();
    let ni = p.n as i32;
    let h = p.mass / n_cells as f64;
    let mut rho = Vec::with_capacity(n_cells + 1);
    let mut rn = Vec::with_capacity(n_cells + 2);
    rho.push(s);
    rn.push(h);
    let mut pr = p.eos(s);
    for j in 1..=n_cells {
        let next = rn[j - 1] + nf * h / rho[j - 1];
        rn.push(next);
        let r = next.powf(1.0 / nf);
        pr -= p.gravity * j as f64 * h * h / r.powi(2 * ni - 2);
        if !(pr > 0.0) {
            return (-p.p_inf, None);
        }
        rho.push((pr / p.pressure_coeff).powf(1.0 / p.gamma));
    }
    rn.push(rn[n_cells] + nf * h / rho[n_cells]);
    let r = rn.iter().map(|v| v.powf(1.0 / nf)).collect();
    let state = DiscreteState { t: 0.0, h, dim: p.n, rho, u: vec![0.0; n_cells + 2], r };
    (pr - p.p_inf, Some(state))
}

/// Rest state of the scheme on `n_cells` cells, to `|P_N - P_inf| <= tol`.
pub fn discrete_equilibrium(p: &ModelParams, n_cells: usize, tol: f64) -> Result<Equilibrium, DynamicsError> {
    let report = p.validate();
    if !report.is_accepted() {
        return Err(DynamicsError::InvalidParams(report));
    }
    if n_cells < 2 {
        return Err(DynamicsError::InvalidConfig(format!("need at least 2 cells, got {n_cells}")));
    }
    let lo0 = p.boundary_density();
    let finish = |state: DiscreteState| {
        let potential = crate::diagnostics::potential_energy_h(&state, p);
        Equilibrium { params: *p, state, potential }
    };
    if let (g, Some(st)) = march(p, n_cells, lo0) {
        if g.abs() <= tol {
            return Ok(finish(st));
        }
    }
    let mut lo = lo0;
    let mut hi = 2.0 * lo0;
    let mut doublings = 0;
    while march(p, n_cells, hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(StationaryError::BracketNotFound { doublings, sigma: hi, residual: -p.p_inf }.into());
        }
    }
    let mut best: Option<(f64, DiscreteState)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (g, st) = march(p, n_cells, mid);
        if let Some(st) = st {
            if g.abs() <= tol {
                return Ok(finish(st));
            }
            if best.as_ref().map_or(true, |(b, _)| g.abs() < *b) {
                best = Some((g.abs(), st));
            }
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    match best {
        // bisection hit the rounding floor; accept the closest state
        Some((g, st)) if g <= 1e3 * tol.max(f64::EPSILON * p.p_inf) => Ok(finish(st)),
        Some((g, _)) => Err(StationaryError::NoConvergence { iterations: 200, residual: g }.into()),
        None => Err(StationaryError::NoConvergence { iterations: 200, residual: f64::INFINITY }.into()),
    }
}
