//! Cauchy problem from the centre and bisection on the central density.

use super::{check_accepted, check_grid, SolveMethod, StationaryError, StationaryProfile};
use crate::model::ModelParams;

/// Starting point of the integration, as a fraction of `M^(1/n)` in the
/// stretched variable.
const XI_START_FRACTION: f64 = 1e-4;
/// Largest step relative to the current `xi`.
const CENTRE_STEP_RATIO: f64 = 0.002;
const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 200;

/// Nodal solution of the Cauchy problem for a given central density.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchySolution {
    pub sigma: f64,
    /// Density at the nodes reached (all `N + 1` when `reached_end`).
    pub rho: Vec<f64>,
    pub volume: Vec<f64>,
    pub reached_end: bool,
    /// Mass coordinate where the pressure hit zero, if it did.
    pub failure_x: Option<f64>,
}

impl CauchySolution {
    /// Shooting residual `A rho(M)^gamma - P_inf`; a run that dies before `M`
    /// counts as `-P_inf`.
    pub fn end_residual(&self, p: &ModelParams) -> f64 {
        if self.reached_end {
            p.eos(*self.rho.last().unwrap()) - p.p_inf
        } else {
            -p.p_inf
        }
    }
}

/// Bracket `[sigma_low, sigma_high]` with residuals of opposite sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingBracket {
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub g_low: f64,
    pub g_high: f64,
}

/// Right-hand side in `xi = x^(1/n)` for the state `(P, V)` with
/// `P = A rho^gamma`. Returns `None` once the pressure is no longer positive.
#[inline]
fn rhs(p: &ModelParams, xi: f64, pr: f64, v: f64) -> Option<(f64, f64)> {
    if !(pr > 0.0) || !(v > 0.0) {
        return None;
    }
    let nf = p.dim();
    let rho = (pr / p.pressure_coeff).powf(1.0 / p.gamma);
    let xi_nm1 = xi.powi(p.n as i32 - 1);
    let dp = -p.gravity * nf * xi_nm1 * xi_nm1 * xi * (nf * v).powf((2.0 - 2.0 * nf) / nf);
    let dv = nf * xi_nm1 / rho;
    Some((dp, dv))
}

/// Series start near the centre: `A rho^gamma ~ A sigma^gamma - (G/2) n^((2-n)/n)
/// sigma^((2n-2)/n) x^(2/n)`, `V ~ x / sigma`.
fn start_state(p: &ModelParams, sigma: f64, x0: f64) -> (f64, f64) {
    let nf = p.dim();
    let pr = p.eos(sigma)
        - 0.5 * p.gravity * nf.powf((2.0 - nf) / nf) * sigma.powf((2.0 * nf - 2.0) / nf) * x0.powf(2.0 / nf);
    (pr, x0 / sigma)
}

/// Integrates the stationary Cauchy problem from the centre with density
/// `sigma`, reporting the state on the nodes `x_j = j M / N`.
pub fn integrate_cauchy(p: &ModelParams, sigma: f64, n_cells: usize) -> Result<CauchySolution, StationaryError> {
    if !(sigma > 0.0) {
        return Err(StationaryError::NonPositiveSigma(sigma));
    }
    check_grid(n_cells)?;
    Ok(integrate(p, sigma, n_cells, 1))
}

/// RK4 in `xi`. No step exceeds the width of the last node interval divided
/// by `refine`, nor a fixed fraction of `xi` itself.
pub(crate) fn integrate(p: &ModelParams, sigma: f64, n_cells: usize, refine: usize) -> CauchySolution {
    let nf = p.dim();
    let h = p.mass / n_cells as f64;
    let xi_node = |j: usize| (j as f64 * h).powf(1.0 / nf);
    let dxi_max = (xi_node(n_cells) - xi_node(n_cells - 1)) / refine as f64;
    let xi0 = (XI_START_FRACTION * p.mass.powf(1.0 / nf)).min(0.5 * xi_node(1));

    let mut rho = Vec::with_capacity(n_cells + 1);
    let mut volume = Vec::with_capacity(n_cells + 1);
    rho.push(sigma);
    volume.push(0.0);
    let (mut pr, mut v) = start_state(p, sigma, xi0.powf(nf));
    let mut xi = xi0;
    let fail = |rho: Vec<f64>, volume: Vec<f64>, xi: f64| CauchySolution {
        sigma,
        rho,
        volume,
        reached_end: false,
        failure_x: Some(xi.powf(nf)),
    };
    if !(pr > 0.0) {
        return fail(rho, volume, xi);
    }
    for j in 1..=n_cells {
        let target = xi_node(j);
        while xi < target {
            // near the centre V ~ xi^n is tiny, so steps are kept proportional to xi
            let room = target - xi;
            let dmax = dxi_max.min(CENTRE_STEP_RATIO * xi);
            let d = if room <= dmax * (1.0 + 1e-9) { room } else { room / (room / dmax).ceil() };
            let Some((k1p, k1v)) = rhs(p, xi, pr, v) else {
                return fail(rho, volume, xi);
            };
            let Some((k2p, k2v)) = rhs(p, xi + 0.5 * d, pr + 0.5 * d * k1p, v + 0.5 * d * k1v) else {
                return fail(rho, volume, xi);
            };
            let Some((k3p, k3v)) = rhs(p, xi + 0.5 * d, pr + 0.5 * d * k2p, v + 0.5 * d * k2v) else {
                return fail(rho, volume, xi);
            };
            let Some((k4p, k4v)) = rhs(p, xi + d, pr + d * k3p, v + d * k3v) else {
                return fail(rho, volume, xi);
            };
            pr += d / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            v += d / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            xi = if d == room { target } else { xi + d };
            if !(pr > 0.0) {
                return fail(rho, volume, xi);
            }
        }
        xi = target;
        rho.push((pr / p.pressure_coeff).powf(1.0 / p.gamma));
        volume.push(v);
    }
    CauchySolution { sigma, rho, volume, reached_end: true, failure_x: None }
}

/// Finds `sigma_high` by doubling from twice the boundary density.
pub fn find_bracket(p: &ModelParams, n_cells: usize) -> Result<ShootingBracket, StationaryError> {
    check_accepted(p)?;
    check_grid(n_cells)?;
    let sigma_low = p.boundary_density();
    let g_low = integrate(p, sigma_low, n_cells, 1).end_residual(p);
    let mut sigma_high = 2.0 * sigma_low;
    for doublings in 0..=MAX_DOUBLINGS {
        let g_high = integrate(p, sigma_high, n_cells, 1).end_residual(p);
        if g_high >= 0.0 {
            return Ok(ShootingBracket { sigma_low, sigma_high, g_low, g_high });
        }
        if doublings == MAX_DOUBLINGS {
            return Err(StationaryError::BracketNotFound { doublings, sigma: sigma_high, residual: g_high });
        }
        sigma_high *= 2.0;
    }
    unreachable!()
}

/// Stationary profile by shooting: bisection on the central density until
/// `|A rho(M)^gamma - P_inf| <= tol`.
pub fn shoot(p: &ModelParams, n_cells: usize, tol: f64) -> Result<StationaryProfile, StationaryError> {
    if !(tol > 0.0) {
        return Err(StationaryError::BadTolerance(tol));
    }
    let report = check_accepted(p)?;
    check_grid(n_cells)?;
    let unique = report.uniqueness_guaranteed();
    let finish =
        |sol: CauchySolution| StationaryProfile::from_nodes(*p, sol.rho, sol.volume, SolveMethod::Shooting, unique);

    let sigma_b = p.boundary_density();
    let at_low = integrate(p, sigma_b, n_cells, 1);
    if at_low.end_residual(p).abs() <= tol {
        return Ok(finish(at_low));
    }
    let bracket = find_bracket(p, n_cells)?;
    let (mut lo, mut hi) = (bracket.sigma_low, bracket.sigma_high);
    let mut best: Option<(f64, CauchySolution)> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let sol = integrate(p, mid, n_cells, 1);
        let g = sol.end_residual(p);
        if g.abs() <= tol {
            return Ok(finish(sol));
        }
        if best.as_ref().map_or(true, |(b, _)| g.abs() < *b) {
            best = Some((g.abs(), sol));
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
    let residual = best.map_or(f64::INFINITY, |(b, _)| b);
    Err(StationaryError::NoConvergence { iterations: MAX_BISECTIONS, residual })
}
