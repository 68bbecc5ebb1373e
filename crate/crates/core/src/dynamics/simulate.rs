//! Time loop with snapshots, diagnostics and abort handling.

use super::{
    discrete_equilibrium, init_state, stable_dt, DiscreteState, DynamicsError, Equilibrium, SimConfig, Stepper,
};
use crate::diagnostics::{self, DiagnosticsRecord, Totals};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: DiscreteState,
    pub record: DiagnosticsRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: SimConfig,
    /// Rest state of the scheme used as reference by the diagnostics.
    pub reference: Equilibrium,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Trajectory {
    pub fn records(&self) -> Vec<DiagnosticsRecord> {
        self.snapshots.iter().map(|s| s.record.clone()).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }
}

/// A run that stopped early, with everything computed up to that point.
#[derive(Debug, Clone, PartialEq)]
pub struct Abort {
    pub t: f64,
    pub error: DynamicsError,
    pub rho_min: f64,
    pub rho_max: f64,
    pub partial: Trajectory,
}

impl fmt::Display for Abort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "aborted at t = {}: {} (rho in [{}, {}])", self.t, self.error, self.rho_min, self.rho_max)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("setup failed: {0}")]
    Setup(#[from] DynamicsError),
    #[error("{0}")]
    Aborted(Box<Abort>),
}

/// Advances `config` to `t_end`, recording a snapshot every
/// `snapshot_every` time units and at the end.
pub fn simulate(config: &SimConfig) -> Result<Trajectory, SimulateError> {
    config.validate()?;
    let p = config.params;
    let forcing = config.forcing;
    let n = config.n_cells;
    let reference = discrete_equilibrium(&p, n, 1e-14)?;
    let mut state = init_state(config)?;
    let mut stepper = Stepper::new(&p, &forcing, n);

    let mut totals = Totals::start(&state, &reference, &p, &forcing);
    let rho_floor = config.vacuum_ratio * state.rho_min();
    let mut traj = Trajectory {
        config: config.clone(),
        reference,
        snapshots: Vec::new(),
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
    };
    let snap = |state: &DiscreteState, totals: &Totals, traj: &mut Trajectory| {
        let record = diagnostics::record(state, &traj.reference, &p, &forcing, totals);
        traj.snapshots.push(Snapshot { state: state.clone(), record });
    };
    snap(&state, &totals, &mut traj);

    let abort = |state: &DiscreteState, error: DynamicsError, traj: Trajectory| {
        SimulateError::Aborted(Box::new(Abort {
            t: state.t,
            error,
            rho_min: state.rho_min(),
            rho_max: state.rho_max(),
            partial: traj,
        }))
    };

    let t_end = config.t_end;
    let every = config.snapshot_every;
    let mut k = 1usize;
    let eps = 1e-12 * t_end.max(1.0);
    while state.t < t_end - eps {
        let target = (k as f64 * every).min(t_end);
        let mut dt = stable_dt(&state, &p, config.dt_safety);
        if !(dt > 1e-15 * t_end.max(1.0)) {
            return Err(abort(&state, DynamicsError::DtUnderflow(dt), traj));
        }
        let lands = state.t + dt >= target - eps;
        if lands {
            dt = target - state.t;
        }
        let taken = match stepper.step(&mut state, dt) {
            Ok(taken) => taken,
            Err(e) => return Err(abort(&state, e, traj)),
        };
        if lands && taken == dt {
            state.t = target;
        }
        traj.steps += 1;
        traj.dt_min = traj.dt_min.min(taken);
        traj.dt_max = traj.dt_max.max(taken);
        totals.advance(&state, &p, &forcing, taken);
        if state.rho_min() < rho_floor {
            let err = DynamicsError::Vacuum { rho_min: state.rho_min(), threshold: rho_floor };
            return Err(abort(&state, err, traj));
        }
        if state.t >= target - eps {
            snap(&state, &totals, &mut traj);
            while k as f64 * every <= state.t + eps {
                k += 1;
            }
        }
    }
    Ok(traj)
}

/// Piecewise-linear reconstruction at mass coordinate `x`: `rho` and `u`
/// linear between nodes `x_j = j h`, `r` linear in `r^n`.
pub fn reconstruct(state: &DiscreteState, x: f64) -> Result<(f64, f64, f64), DynamicsError> {
    let mass = state.mass();
    if !(0.0..=mass).contains(&x) {
        return Err(DynamicsError::OutOfRange { x, mass });
    }
    let n = state.n_cells();
    let j = ((x / state.h).floor() as usize).min(n - 1);
    let th = x / state.h - j as f64;
    let lin = |a: f64, b: f64| a + th * (b - a);
    let ni = state.dim as i32;
    let rn = lin(state.r[j].powi(ni), state.r[j + 1].powi(ni));
    Ok((lin(state.rho[j], state.rho[j + 1]), lin(state.u[j], state.u[j + 1]), rn.powf(1.0 / state.dim as f64)))
}
