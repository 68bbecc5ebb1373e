//! Hydrostatic (stationary) states in Lagrangian mass coordinates.
//!
//! The stationary density solves
//! `A (rho^gamma)_x = -G x / r^(2n-2)` with `r^n = n int_0^x 1/rho` and the
//! end condition `A rho(M)^gamma = P_inf`. Two independent solvers are
//! provided: [`shoot`] (the primary one, bisection on the central density)
//! and [`fixed_point_solve`] (damped Picard iteration on the integral form).
//! Both work in the stretched variable `xi = x^(1/n)`, in which the
//! `x^((2-n)/n)` behaviour at the centre becomes smooth.

mod energy;
mod fixed_point;
mod shooting;
mod stability;

pub use energy::{potential_energy, PotentialEnergy};
pub use fixed_point::{fixed_point_solve, FixedPointReport};
pub use shooting::{find_bracket, integrate_cauchy, shoot, CauchySolution, ShootingBracket};
pub use stability::{
    graded_nodes, smallest_generalized_eigenvalue, stability_forms, stability_forms_on, stability_min_eigen,
    StabilityForms, SymTridiagonal, STABILITY_GRADING,
};

use crate::model::{eulerian_samples, EulerianProfile, ModelParams, ValidationReport};
use crate::quadrature::trapezoid;
use thiserror::Error;

/// Smallest admissible grid for the stationary solvers.
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationaryError {
    #[error("parameters rejected: {0}")]
    InvalidParams(ValidationReport),
    #[error("shooting parameter must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("grid too coarse: {0} cells (need at least {MIN_CELLS})")]
    GridTooSmall(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("relaxation must lie in (0, 1], got {0}")]
    BadRelaxation(f64),
    #[error("no shooting bracket after {doublings} doublings (sigma = {sigma}, residual = {residual})")]
    BracketNotFound { doublings: usize, sigma: f64, residual: f64 },
    #[error("bisection stalled after {iterations} iterations (residual = {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fixed-point budget of {iterations} iterations exhausted (last update = {update})")]
    FixedPointBudget { iterations: usize, update: f64 },
    #[error("volume must start at 0 and strictly increase (violated at node {0})")]
    NonMonotoneVolume(usize),
    #[error("weight form is not positive definite")]
    SingularWeight,
}

/// Which solver produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Shooting,
    FixedPoint,
}

/// Discrete hydrostatic state on the nodes `x_j = j M / N`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    pub params: ModelParams,
    pub n_cells: usize,
    /// Central density, the shooting parameter.
    pub sigma: f64,
    pub rho: Vec<f64>,
    /// `V = r^n / n`.
    pub volume: Vec<f64>,
    pub radius: Vec<f64>,
    /// Eulerian radius of the free boundary.
    pub l_inf: f64,
    /// `|A rho(M)^gamma - P_inf|`.
    pub residual: f64,
    pub method: SolveMethod,
    /// `x_j^(2/n)`, the interpolation variable.
    s_nodes: Vec<f64>,
    /// False when the parameters only fall under the existence branch for
    /// small `gamma`.
    pub uniqueness_guaranteed: bool,
}

impl StationaryProfile {
    pub(crate) fn from_nodes(
        params: ModelParams,
        rho: Vec<f64>,
        volume: Vec<f64>,
        method: SolveMethod,
        uniqueness_guaranteed: bool,
    ) -> Self {
        let nf = params.dim();
        let radius: Vec<f64> = volume.iter().map(|v| (nf * v).powf(1.0 / nf)).collect();
        let n_cells = rho.len() - 1;
        let residual = (params.eos(rho[n_cells]) - params.p_inf).abs();
        let h = params.mass / n_cells as f64;
        let s_nodes = (0..=n_cells).map(|j| (j as f64 * h).powf(2.0 / nf)).collect();
        StationaryProfile {
            s_nodes,
            params,
            n_cells,
            sigma: rho[0],
            l_inf: radius[n_cells],
            rho,
            volume,
            radius,
            residual,
            method,
            uniqueness_guaranteed,
        }
    }

    pub fn h(&self) -> f64 {
        self.params.mass / self.n_cells as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.x(j)).collect()
    }

    pub fn rho_min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    /// Eulerian samples `(r, rho, 0)` ending at the boundary radius `l_inf`.
    pub fn eulerian(&self) -> Result<EulerianProfile, crate::model::ModelError> {
        eulerian_samples(&self.radius, &self.rho, &vec![0.0; self.rho.len()])
    }

    /// Samples the profile at mass coordinate `x` by cubic interpolation in
    /// `s = x^(2/n)`, the variable in which the profile is smooth.
    pub fn rho_at(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.params.mass);
        let s = x.powf(2.0 / self.params.dim());
        crate::quadrature::lagrange4(&self.s_nodes, &self.rho, self.cell_of(x), s)
    }

    /// Samples `V` at mass coordinate `x`, interpolating the mean specific
    /// volume `V/x` in `s = x^(2/n)`.
    pub fn volume_at(&self, x: f64) -> f64 {
        let mean: Vec<f64> =
            (0..=self.n_cells).map(|j| if j == 0 { 1.0 / self.sigma } else { self.volume[j] / self.x(j) }).collect();
        let x = x.clamp(0.0, self.params.mass);
        let s = x.powf(2.0 / self.params.dim());
        x * crate::quadrature::lagrange4(&self.s_nodes, &mean, self.cell_of(x), s)
    }

    fn cell_of(&self, x: f64) -> usize {
        ((x / self.h()).floor() as usize).min(self.n_cells - 1)
    }
}

/// Max-norm residual of `A rho^gamma(x) - P_inf - int_x^M G y r^(2-2n) dy`
/// over the profile nodes.
///
/// The integral is evaluated independently of the solvers, by the trapezoid
/// rule in `s = x^(2/n)`; in that variable the integrand
/// `G x r^(2-2n) dx/ds` is bounded and smooth up to the centre.
pub fn verify_stationary_identity(profile: &StationaryProfile) -> f64 {
    let p = &profile.params;
    let nf = p.dim();
    let n = profile.n_cells;
    let s: Vec<f64> = profile.nodes().iter().map(|x| x.powf(2.0 / nf)).collect();
    let g: Vec<f64> = (0..=n)
        .map(|j| {
            if j == 0 {
                0.5 * p.gravity * nf * (nf / profile.rho[0]).powf((2.0 - 2.0 * nf) / nf)
            } else {
                let x = profile.x(j);
                p.gravity * x * profile.radius[j].powf(2.0 - 2.0 * nf) * 0.5 * nf * s[j].powf(0.5 * nf - 1.0)
            }
        })
        .collect();
    let mut tail = 0.0;
    let mut worst: f64 = 0.0;
    for j in (0..=n).rev() {
        if j < n {
            tail += trapezoid(&s[j..j + 2], &g[j..j + 2]);
        }
        let r = (p.eos(profile.rho[j]) - p.p_inf - tail).abs();
        worst = worst.max(r);
    }
    worst
}

/// Radius `delta_1` of the invariant ball `{P_inf/A)^(1/gamma) <= f <= delta_1}`
/// of the fixed-point map: the smallest `delta` above the boundary density with
/// `P_inf + (G/2) delta^((2n-2)/n) n^((2-n)/n) M^(2/n) <= A delta^gamma`.
pub fn invariant_ball_radius(p: &ModelParams) -> Option<f64> {
    let nf = p.dim();
    let c = 0.5 * p.gravity * nf.powf((2.0 - nf) / nf) * p.mass.powf(2.0 / nf);
    let phi = |d: f64| p.pressure_coeff * d.powf(p.gamma) - p.p_inf - c * d.powf((2.0 * nf - 2.0) / nf);
    let mut lo = p.boundary_density();
    if phi(lo) >= 0.0 {
        return Some(lo);
    }
    let mut hi = 2.0 * lo;
    let mut tries = 0;
    while phi(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

pub(crate) fn check_accepted(p: &ModelParams) -> Result<ValidationReport, StationaryError> {
    let report = p.validate();
    if report.is_accepted() {
        Ok(report)
    } else {
        Err(StationaryError::InvalidParams(report))
    }
}

pub(crate) fn check_grid(n_cells: usize) -> Result<(), StationaryError> {
    if n_cells < MIN_CELLS {
        Err(StationaryError::GridTooSmall(n_cells))
    } else {
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_params {
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
}

#[cfg(test)]
mod tests {
    use super::test_params::*;
    use super::*;

    #[test]
    fn identity_exact_for_weightless_profile() {
        let prof = shoot(&weightless(), 64, 1e-12).unwrap();
        assert!(verify_stationary_identity(&prof) < 1e-14);
    }

    #[test]
    fn identity_converges_at_second_order() {
        let p = benchmark();
        let coarse = verify_stationary_identity(&shoot(&p, 1000, 1e-13).unwrap());
        let fine = verify_stationary_identity(&shoot(&p, 2000, 1e-13).unwrap());
        assert!(fine <= 1e-6, "residual {fine}");
        assert!(coarse / fine >= 2.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn invariant_ball_contains_profile() {
        let p = benchmark();
        let d1 = invariant_ball_radius(&p).unwrap();
        let prof = shoot(&p, 400, 1e-12).unwrap();
        assert!(prof.rho_max() <= d1 * (1.0 + 1e-12));
        assert!(prof.rho_min() >= p.boundary_density() * (1.0 - 1e-12));
    }

    #[test]
    fn eulerian_density_decreases_outward() {
        let prof = shoot(&benchmark(), 200, 1e-12).unwrap();
        let e = prof.eulerian().unwrap();
        assert_eq!(e.boundary_radius, prof.l_inf);
        for w in e.samples.windows(2) {
            assert!(w[1].r > w[0].r);
            assert!(w[1].rho < w[0].rho);
        }
    }

    #[test]
    fn lagrangian_eulerian_round_trip() {
        // mass recovered from the Eulerian samples must match the node
        // coordinates to interpolation accuracy; a 10x finer profile
        // tightens the agreement
        let p = benchmark();
        let err = |n: usize| {
            let prof = shoot(&p, n, 1e-13).unwrap();
            let x = crate::model::mass_coordinates(p.n, &prof.eulerian().unwrap().samples);
            x.iter().enumerate().map(|(j, xj)| (xj - prof.x(j)).abs()).fold(0.0, f64::max)
        };
        let coarse = err(100);
        let fine = err(1000);
        assert!(coarse < 1e-3, "{coarse}");
        assert!(fine < coarse / 20.0, "{fine} vs {coarse}");
    }

    #[test]
    fn profile_bounds_by_density_extrema() {
        let prof = shoot(&benchmark(), 400, 1e-12).unwrap();
        let nf = 3.0;
        let (lo, hi) = (prof.rho_min(), prof.rho_max());
        for j in 1..=prof.n_cells {
            let x = prof.x(j);
            let rn = prof.radius[j].powf(nf);
            assert!(rn >= nf * x / hi * (1.0 - 1e-9) && rn <= nf * x / lo * (1.0 + 1e-9));
        }
    }
}
