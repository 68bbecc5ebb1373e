//! Static potential energy of a volume profile `V(x) = r^n / n`.

use super::StationaryError;
use crate::model::ModelParams;
use crate::quadrature::trapezoid_uniform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialEnergy {
    /// `int A/(gamma-1) V_x^(1-gamma)`
    pub internal: f64,
    /// `int P_inf V_x = P_inf V(M)`
    pub boundary: f64,
    /// `int int_1^V G x (n eta)^((2-2n)/n) d eta`
    pub gravity: f64,
}

impl PotentialEnergy {
    pub fn total(&self) -> f64 {
        self.internal + self.boundary + self.gravity
    }
}

/// Gravitational potential density `int_1^V G x (n eta)^((2-2n)/n) d eta`.
pub(crate) fn gravity_density(p: &ModelParams, x: f64, v: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let nf = p.dim();
    if p.n == 2 {
        0.5 * p.gravity * x * v.ln()
    } else {
        p.gravity * x * nf.powf((2.0 - 2.0 * nf) / nf) * nf / (2.0 - nf) * (v.powf((2.0 - nf) / nf) - 1.0)
    }
}

/// Evaluates the static energy of `volume` given on the uniform nodes
/// `x_j = j M / N`. `V_x` is taken cell-wise constant; the gravity term uses
/// the trapezoid rule on the nodes.
pub fn potential_energy(p: &ModelParams, volume: &[f64]) -> Result<PotentialEnergy, StationaryError> {
    let n = volume.len().saturating_sub(1);
    if n == 0 || volume[0] != 0.0 {
        return Err(StationaryError::NonMonotoneVolume(0));
    }
    if let Some(k) = volume.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(StationaryError::NonMonotoneVolume(k + 1));
    }
    let h = p.mass / n as f64;
    let internal = volume
        .windows(2)
        .map(|w| {
            let vx = (w[1] - w[0]) / h;
            h * p.pressure_coeff / (p.gamma - 1.0) * vx.powf(1.0 - p.gamma)
        })
        .sum();
    let g: Vec<f64> = volume.iter().enumerate().map(|(j, &v)| gravity_density(p, j as f64 * h, v)).collect();
    Ok(PotentialEnergy { internal, boundary: p.p_inf * volume[n], gravity: trapezoid_uniform(&g, h) })
}
