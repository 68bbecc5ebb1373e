//! Grid refinement studies.

use super::DiagnosticsError;
use crate::dynamics::{reconstruct, simulate, DiscreteState, SimConfig};
use crate::quadrature::trapezoid_uniform;
use rayon::prelude::*;
use serde::Serialize;

/// Differences below this (relative to the field's size) count as exact.
const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Order {
    Value(f64),
    /// Both differences sit at the rounding floor.
    Exact,
}

impl Order {
    pub fn value(self) -> Option<f64> {
        match self {
            Order::Value(v) => Some(v),
            Order::Exact => None,
        }
    }

    /// True for `Exact` or an order of at least `p`.
    pub fn at_least(self, p: f64) -> bool {
        match self {
            Order::Value(v) => v >= p,
            Order::Exact => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldConvergence {
    pub name: &'static str,
    /// `||f_k - f_{k+1}||` for successive grids.
    pub differences: Vec<f64>,
    /// `log2` of successive difference ratios.
    pub orders: Vec<Order>,
    /// `||f_k - f_finest||` for every grid but the finest.
    pub finest_errors: Vec<f64>,
    pub finest_orders: Vec<Order>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub grids: Vec<usize>,
    pub t_end: f64,
    pub fields: Vec<FieldConvergence>,
}

impl ConvergenceReport {
    pub fn field(&self, name: &str) -> Option<&FieldConvergence> {
        self.fields.iter().find(|f| f.name == name)
    }
}

fn orders(errors: &[f64], scale: f64) -> Vec<Order> {
    errors
        .windows(2)
        .map(|w| {
            let floor = EXACT_FLOOR * scale.max(f64::MIN_POSITIVE);
            if w[0] <= floor && w[1] <= floor {
                Order::Exact
            } else {
                Order::Value((w[0] / w[1]).log2())
            }
        })
        .collect()
}

/// Runs `config` on each grid (in parallel) and compares the final states at
/// the nodes of the coarsest grid. Grids must double at every level.
///
/// Differences are measured in `L^2` with weight `(x/M)^(2/n)`, which
/// discounts the regularised centre. The radius is compared as
/// `(r^n - r_0^n)^(1/n)`, the radius of the shells outside the core
/// `r_0^n = h`, so that rest states agree exactly across grids.
pub fn convergence_study(config: &SimConfig, grids: &[usize]) -> Result<ConvergenceReport, DiagnosticsError> {
    if grids.len() < 3 {
        return Err(DiagnosticsError::TooFewGrids(grids.len()));
    }
    if grids.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(DiagnosticsError::NonNestedGrids(grids.to_vec()));
    }
    let finals: Vec<DiscreteState> = grids
        .par_iter()
        .map(|&n| {
            let mut cfg = config.clone();
            cfg.n_cells = n;
            simulate(&cfg).map(|tr| tr.last().state.clone()).map_err(|e| DiagnosticsError::Simulation(Box::new(e)))
        })
        .collect::<Result<_, _>>()?;

    let nc = grids[0];
    let mass = config.params.mass;
    let hc = mass / nc as f64;
    let nf = config.params.dim();
    let sample = |s: &DiscreteState| -> Result<[Vec<f64>; 3], DiagnosticsError> {
        let mut out = [vec![0.0; nc + 1], vec![0.0; nc + 1], vec![0.0; nc + 1]];
        let core = s.r[0].powf(nf);
        for j in 0..=nc {
            let x = (j as f64 * hc).min(s.mass());
            let (rho, u, r) = reconstruct(s, x)?;
            out[0][j] = rho;
            out[1][j] = u;
            out[2][j] = (r.powf(nf) - core).max(0.0).powf(1.0 / nf);
        }
        Ok(out)
    };
    let weight: Vec<f64> = (0..=nc).map(|j| (j as f64 / nc as f64).powf(2.0 / nf)).collect();
    let sampled: Vec<[Vec<f64>; 3]> = finals.iter().map(sample).collect::<Result<_, _>>()?;
    let norm = |a: &[f64], b: &[f64]| {
        let sq: Vec<f64> = a.iter().zip(b).zip(&weight).map(|((x, y), w)| w * (x - y).powi(2)).collect();
        trapezoid_uniform(&sq, hc).sqrt()
    };

    let last = sampled.len() - 1;
    let fields = ["rho", "u", "r"]
        .iter()
        .enumerate()
        .map(|(f, &name)| {
            let finest = &sampled[last][f];
            let zero = vec![0.0; nc + 1];
            let scale = norm(finest, &zero).max(f64::MIN_POSITIVE);
            let differences: Vec<f64> = sampled.windows(2).map(|w| norm(&w[0][f], &w[1][f])).collect();
            let finest_errors: Vec<f64> = sampled[..last].iter().map(|s| norm(&s[f], finest)).collect();
            FieldConvergence {
                name,
                orders: orders(&differences, scale),
                finest_orders: orders(&finest_errors, scale),
                differences,
                finest_errors,
            }
        })
        .collect();
    Ok(ConvergenceReport { grids: grids.to_vec(), t_end: config.t_end, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InitialData;
    use crate::model::ModelParams;

    fn weightless() -> ModelParams {
        ModelParams {
            n: 3,
            gamma: 2.0,
            pressure_coeff: 1.0,
            theta: 1.0,
            c1: 1.0,
            c2: 1.0,
            gravity: 0.0,
            p_inf: 4.0,
            mass: 1.0,
        }
    }

    #[test]
    fn validates_grid_ladder() {
        let cfg = SimConfig::new(weightless(), 16, 0.0, InitialData::Uniform { rho0: 2.0 });
        assert_eq!(convergence_study(&cfg, &[16, 32]), Err(DiagnosticsError::TooFewGrids(2)));
        assert!(matches!(convergence_study(&cfg, &[16, 32, 48]), Err(DiagnosticsError::NonNestedGrids(_))));
    }

    #[test]
    fn rest_state_is_exact() {
        let cfg = SimConfig::new(weightless(), 16, 0.01, InitialData::Uniform { rho0: 2.0 });
        let rep = convergence_study(&cfg, &[16, 32, 64]).unwrap();
        for f in &rep.fields {
            assert!(f.orders.iter().all(|o| *o == Order::Exact), "{f:?}");
        }
    }

    #[test]
    fn order_from_ratios() {
        let o = orders(&[4e-2, 1e-2, 2.5e-3], 1.0);
        assert!(o.iter().all(|o| (o.value().unwrap() - 2.0).abs() < 1e-12));
        assert_eq!(orders(&[0.0, 0.0], 1.0), vec![Order::Exact]);
    }
}
