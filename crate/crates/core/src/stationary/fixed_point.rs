//! Damped Picard iteration on the integral form of the stationary problem,
//! `f = [(P_inf + int_x^M G y r_f^(2-2n) dy) / A]^(1/gamma)`.

use super::{check_accepted, check_grid, SolveMethod, StationaryError, StationaryProfile};
use crate::model::ModelParams;
use crate::quadrature::{gauss5, gauss5_points, lagrange4};

const MAX_ITERATIONS: usize = 20_000;
const MIN_RELAXATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub profile: StationaryProfile,
    pub iterations: usize,
    /// `max_j |I(f)_j - f_j|` at the last iterate.
    pub last_update: f64,
    /// Damping factor in use when the iteration stopped.
    pub relaxation: f64,
}

struct Grid {
    xi: Vec<f64>,
    s: Vec<f64>,
}

/// One application of the integral map. Returns `I(f)` and the volume `V_f`
/// on the nodes.
fn apply(p: &ModelParams, grid: &Grid, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nf = p.dim();
    let n = f.len() - 1;
    let q: Vec<f64> = f.iter().map(|v| 1.0 / v).collect();
    let expo = (2.0 - 2.0 * nf) / nf;
    let ni = p.n as i32;
    let mut volume = vec![0.0; n + 1];
    let mut grav = vec![0.0; n];
    for k in 0..n {
        let (a, b) = (grid.xi[k], grid.xi[k + 1]);
        let dv = |eta: f64| nf * eta.powi(ni - 1) * lagrange4(&grid.s, &q, k, eta * eta);
        let mut acc = 0.0;
        for (xg, wg) in gauss5_points(a, b) {
            let vg = volume[k] + gauss5(a, xg, dv);
            acc += wg * p.gravity * nf * xg.powi(2 * ni - 1) * (nf * vg).powf(expo);
        }
        grav[k] = acc;
        volume[k + 1] = volume[k] + gauss5(a, b, dv);
    }
    let mut out = vec![0.0; n + 1];
    let mut tail = 0.0;
    for j in (0..=n).rev() {
        if j < n {
            tail += grav[j];
        }
        out[j] = ((p.p_inf + tail) / p.pressure_coeff).powf(1.0 / p.gamma);
    }
    (out, volume)
}

/// Solves the stationary problem by damped fixed-point iteration, starting
/// from the constant boundary density.
///
/// The map is order-reversing, so plain iteration can oscillate; the damping
/// factor starts at `relax` and is halved whenever the update grows.
pub fn fixed_point_solve(
    p: &ModelParams,
    n_cells: usize,
    tol: f64,
    relax: f64,
) -> Result<FixedPointReport, StationaryError> {
    if !(tol > 0.0) {
        return Err(StationaryError::BadTolerance(tol));
    }
    if !(relax > 0.0 && relax <= 1.0) {
        return Err(StationaryError::BadRelaxation(relax));
    }
    let report = check_accepted(p)?;
    check_grid(n_cells)?;
    let nf = p.dim();
    let h = p.mass / n_cells as f64;
    let grid = Grid {
        xi: (0..=n_cells).map(|j| (j as f64 * h).powf(1.0 / nf)).collect(),
        s: (0..=n_cells).map(|j| (j as f64 * h).powf(2.0 / nf)).collect(),
    };
    let mut f = vec![p.boundary_density(); n_cells + 1];
    let mut omega = relax;
    let mut prev = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let (next, volume) = apply(p, &grid, &f);
        let update = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if update <= tol {
            let profile = StationaryProfile::from_nodes(
                *p,
                next,
                volume,
                SolveMethod::FixedPoint,
                report.uniqueness_guaranteed(),
            );
            return Ok(FixedPointReport { profile, iterations: it, last_update: update, relaxation: omega });
        }
        if update > prev && omega > MIN_RELAXATION {
            omega = (0.5 * omega).max(MIN_RELAXATION);
        }
        prev = update;
        for (fj, nj) in f.iter_mut().zip(&next) {
            *fj += omega * (nj - *fj);
        }
    }
    Err(StationaryError::FixedPointBudget { iterations: MAX_ITERATIONS, update: prev })
}

#[cfg(test)]
mod tests {
    use super::super::test_params::*;
    use super::super::{shoot, verify_stationary_identity};
    use super::*;

    #[test]
    fn weightless_converges_immediately() {
        let r = fixed_point_solve(&weightless(), 32, 1e-12, 1.0).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.profile.rho.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn agrees_with_shooting() {
        let p = benchmark();
        let fp = fixed_point_solve(&p, 200, 1e-12, 1.0).unwrap().profile;
        let sh = shoot(&p, 200, 1e-13).unwrap();
        for (a, b) in fp.rho.iter().zip(&sh.rho) {
            assert!((a - b).abs() <= 1e-7 * b, "{a} vs {b}");
        }
        assert!((fp.l_inf - sh.l_inf).abs() <= 1e-7 * sh.l_inf);
        assert!(verify_stationary_identity(&fp) < 1e-4);
    }

    #[test]
    fn critical_gamma_converges() {
        let p = ModelParams { gamma: 4.0 / 3.0, ..benchmark() };
        let r = fixed_point_solve(&p, 100, 1e-11, 1.0).unwrap();
        assert!(r.profile.residual < 1e-10);
    }

    #[test]
    fn rejects_bad_relaxation() {
        let p = benchmark();
        assert!(matches!(fixed_point_solve(&p, 64, 1e-10, 0.0), Err(StationaryError::BadRelaxation(_))));
        assert!(matches!(fixed_point_solve(&p, 64, 1e-10, 1.5), Err(StationaryError::BadRelaxation(_))));
    }
}
