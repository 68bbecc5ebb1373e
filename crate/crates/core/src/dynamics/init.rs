//! Simulation setup and initial data.

use super::{closure_velocity, discrete_equilibrium, DiscreteState, DynamicsError};
use crate::model::{ForcingSpec, ModelParams};
use crate::quadrature::gauss5;
use crate::stationary::shoot;
use std::f64::consts::PI;

/// Minimum grid size for a simulation.
pub const MIN_SIM_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Cell averages of the continuous stationary profile, at rest.
    Stationary,
    /// Rest state of the scheme with densities scaled by
    /// `1 + amp cos(mode pi x_j / M)` and velocities
    /// `velocity_amp sin(mode pi x_j / (2M))`.
    PerturbedStationary { amp: f64, mode: u32, velocity_amp: f64 },
    /// Constant density, at rest.
    Uniform { rho0: f64 },
    /// Samples `(x, rho0, u0)` resampled to cell averages.
    Custom(Vec<(f64, f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub forcing: ForcingSpec,
    pub n_cells: usize,
    pub t_end: f64,
    pub dt_safety: f64,
    pub snapshot_every: f64,
    pub initial: InitialData,
    /// Abort once `rho_min` falls below this fraction of its initial value.
    pub vacuum_ratio: f64,
    /// Grid of the continuous profile used by [`InitialData::Stationary`].
    pub stationary_cells: usize,
    pub stationary_tol: f64,
}

impl SimConfig {
    pub fn new(params: ModelParams, n_cells: usize, t_end: f64, initial: InitialData) -> Self {
        SimConfig {
            params,
            forcing: ForcingSpec::none(),
            n_cells,
            t_end,
            dt_safety: 0.25,
            snapshot_every: if t_end > 0.0 { t_end / 100.0 } else { 1.0 },
            initial,
            vacuum_ratio: 1e-3,
            stationary_cells: 2000,
            stationary_tol: 1e-12,
        }
    }

    pub fn h(&self) -> f64 {
        self.params.mass / self.n_cells as f64
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let report = self.params.validate();
        if !report.is_accepted() {
            return Err(DynamicsError::InvalidParams(report));
        }
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        if self.n_cells < MIN_SIM_CELLS {
            return bad(format!("N = {} is below the minimum {MIN_SIM_CELLS}", self.n_cells));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be finite and non-negative, got {}", self.t_end));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety));
        }
        if !(self.snapshot_every > 0.0) {
            return bad(format!("snapshot_every must be positive, got {}", self.snapshot_every));
        }
        if !(0.0..1.0).contains(&self.vacuum_ratio) {
            return bad(format!("vacuum_ratio must lie in [0, 1), got {}", self.vacuum_ratio));
        }
        if !self.forcing.has_valid_rates() {
            return bad("forcing decay rates must be non-negative".into());
        }
        match &self.initial {
            InitialData::PerturbedStationary { amp, .. } if !(amp.abs() < 1.0) => {
                bad(format!("perturbation amplitude must be below 1, got {amp}"))
            }
            InitialData::Uniform { rho0 } if !(*rho0 > 0.0) => bad(format!("rho0 must be positive, got {rho0}")),
            _ => Ok(()),
        }
    }
}

/// Parses custom initial data: CSV rows `x,rho0,u0`, optional header, `#`
/// comments.
pub fn parse_custom_csv(text: &str) -> Result<Vec<(f64, f64, f64)>, DynamicsError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(DynamicsError::InitialData(format!(
                "line {}: expected 3 fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push((v[0], v[1], v[2])),
            Err(_) if rows.is_empty() && lineno == 0 => continue, // header
            Err(e) => return Err(DynamicsError::InitialData(format!("line {}: {e}", lineno + 1))),
        }
    }
    Ok(rows)
}

/// Average of the piecewise-linear interpolant of `(xs, ys)` over `[a, b]`.
fn linear_average(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    let at = |x: f64| {
        let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
        let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        ys[k - 1] + t * (ys[k] - ys[k - 1])
    };
    let mut grid = vec![a];
    grid.extend(xs.iter().copied().filter(|&x| x > a && x < b));
    grid.push(b);
    let vals: Vec<f64> = grid.iter().map(|&x| at(x)).collect();
    crate::quadrature::trapezoid(&grid, &vals) / (b - a)
}

fn custom_cells(
    samples: &[(f64, f64, f64)],
    p: &ModelParams,
    n_cells: usize,
) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    let err = |m: String| Err(DynamicsError::InitialData(m));
    if samples.len() < 2 {
        return err(format!("need at least 2 samples, got {}", samples.len()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if let Some(k) = xs.windows(2).position(|w| !(w[1] > w[0])) {
        return err(format!("x not strictly increasing at row {}", k + 2));
    }
    let tol = 1e-9 * p.mass;
    if xs[0].abs() > tol || (xs[xs.len() - 1] - p.mass).abs() > tol {
        return err(format!("samples must span [0, {}], got [{}, {}]", p.mass, xs[0], xs[xs.len() - 1]));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.1 > 0.0)) {
        return err(format!("non-positive density {} at x = {}", bad.1, bad.0));
    }
    let rho_s: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let u_s: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let h = p.mass / n_cells as f64;
    let mut rho = vec![0.0; n_cells + 1];
    let mut u = vec![0.0; n_cells + 2];
    for j in 1..=n_cells {
        let (a, b) = ((j - 1) as f64 * h, j as f64 * h);
        rho[j] = linear_average(&xs, &rho_s, a, b);
        u[j] = linear_average(&xs, &u_s, a, b);
    }
    rho[0] = rho[1];
    Ok((rho, u))
}

/// Builds the state at `t = 0`: densities and velocities as above, radii from
/// the volume identity `r_i^n = h + n sum_{l<i} h / rho_l`, and the boundary
/// velocity from the closure.
pub fn init_state(config: &SimConfig) -> Result<DiscreteState, DynamicsError> {
    config.validate()?;
    let p = &config.params;
    let n = config.n_cells;
    let h = config.h();
    let nf = p.dim();
    let (rho, u) = match &config.initial {
        InitialData::Uniform { rho0 } => (vec![*rho0; n + 1], vec![0.0; n + 2]),
        InitialData::Stationary => {
            let prof = shoot(p, config.stationary_cells.max(n), config.stationary_tol)?;
            let mut rho = vec![0.0; n + 1];
            for j in 1..=n {
                let (a, b) = ((j - 1) as f64 * h, j as f64 * h);
                rho[j] = gauss5(a, b, |x| prof.rho_at(x)) / h;
            }
            rho[0] = rho[1];
            (rho, vec![0.0; n + 2])
        }
        InitialData::PerturbedStationary { amp, mode, velocity_amp } => {
            let eq = discrete_equilibrium(p, n, 1e-14)?;
            let k = *mode as f64 * PI / p.mass;
            let rho =
                eq.state.rho.iter().enumerate().map(|(j, r)| r * (1.0 + amp * (k * j as f64 * h).cos())).collect();
            let mut u: Vec<f64> = (0..n + 2).map(|j| velocity_amp * (0.5 * k * j as f64 * h).sin()).collect();
            u[0] = 0.0;
            (rho, u)
        }
        InitialData::Custom(samples) => custom_cells(samples, p, n)?,
    };
    let mut r = Vec::with_capacity(n + 2);
    let mut acc = h;
    r.push(acc.powf(1.0 / nf));
    for &d in &rho {
        acc += nf * h / d;
        r.push(acc.powf(1.0 / nf));
    }
    let mut state = DiscreteState { t: 0.0, h, dim: p.n, rho, u, r };
    state.u[n + 1] = closure_velocity(&state, p, &config.forcing, 0.0)?;
    state.check()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn uniform_initial_data() {
        let p = weightless();
        let mut cfg = SimConfig::new(p, 16, 1.0, InitialData::Uniform { rho0: 2.0 });
        cfg.n_cells = 16;
        let s = init_state(&cfg).unwrap();
        let h = 1.0 / 16.0;
        for (i, r) in s.r.iter().enumerate() {
            assert!((r.powi(3) - (h + 3.0 * i as f64 * h / 2.0)).abs() < 1e-14);
        }
        assert!(s.rho.iter().all(|&d| d == 2.0));
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_off_equilibrium_has_nonzero_closure() {
        let p = weightless();
        let s = init_state(&SimConfig::new(p, 16, 1.0, InitialData::Uniform { rho0: 1.0 })).unwrap();
        assert!(s.u[17] != 0.0);
    }

    #[test]
    fn stationary_weightless_start_is_at_rest() {
        let p = weightless();
        let s = init_state(&SimConfig::new(p, 32, 1.0, InitialData::Stationary)).unwrap();
        assert!(s.u[33].abs() < 1e-15);
        assert!(s.rho.iter().all(|&d| (d - 2.0).abs() < 1e-12));
    }

    #[test]
    fn perturbation_has_requested_amplitude() {
        let p = benchmark();
        let amp = 1e-3;
        let cfg = SimConfig::new(p, 64, 1.0, InitialData::PerturbedStationary { amp, mode: 1, velocity_amp: 0.0 });
        let s = init_state(&cfg).unwrap();
        let eq = discrete_equilibrium(&p, 64, 1e-14).unwrap();
        let dev = s.rho.iter().zip(eq.rho()).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max);
        assert!((dev - amp).abs() < 1e-15);
        assert!(s.volume_residual() < 1e-14);
    }

    #[test]
    fn custom_data_is_averaged() {
        let p = weightless();
        let samples: Vec<(f64, f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 1.0 + i as f64 / 10.0, 0.0)).collect();
        let s = init_state(&SimConfig::new(p, 20, 1.0, InitialData::Custom(samples))).unwrap();
        // linear density: the cell average is the midpoint value
        for j in 1..=20 {
            assert!((s.rho[j] - (1.0 + (j as f64 - 0.5) / 20.0)).abs() < 1e-14);
        }
        assert_eq!(s.rho[0], s.rho[1]);
    }

    #[test]
    fn custom_data_errors() {
        let p = weightless();
        let short = vec![(0.0, 1.0, 0.0), (0.5, 1.0, 0.0)];
        assert!(init_state(&SimConfig::new(p, 16, 1.0, InitialData::Custom(short))).is_err());
        let neg = vec![(0.0, 1.0, 0.0), (1.0, -1.0, 0.0)];
        assert!(init_state(&SimConfig::new(p, 16, 1.0, InitialData::Custom(neg))).is_err());
    }

    #[test]
    fn parses_csv() {
        let rows = parse_custom_csv("x,rho0,u0\n0,1,0\n# c\n1, 2, 0.5\n").unwrap();
        assert_eq!(rows, vec![(0.0, 1.0, 0.0), (1.0, 2.0, 0.5)]);
        assert!(parse_custom_csv("0,1\n").is_err());
        assert!(parse_custom_csv("0,1,0\n1,x,0\n").is_err());
    }

    #[test]
    fn config_validation() {
        let p = benchmark();
        let mut cfg = SimConfig::new(p, 8, 1.0, InitialData::Stationary);
        assert!(cfg.validate().is_err());
        cfg.n_cells = 32;
        cfg.dt_safety = 0.0;
        assert!(cfg.validate().is_err());
        cfg.dt_safety = 1.0;
        assert!(cfg.validate().is_ok());
    }
}
