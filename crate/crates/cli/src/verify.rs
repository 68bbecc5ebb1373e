//! `verify`: a configurable subset of the numerical checks, printed as a
//! PASS/FAIL/SKIPPED table.

use crate::commands::solve_stationary;
use crate::{CliError, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sphereflow::config::VerifyCheck;
use sphereflow::diagnostics::{decay_rate_fit, dissipation, effective_velocity, energy_balance_residual};
use sphereflow::dynamics::{init_state, simulate, stable_dt, DiscreteState, Stepper, Trajectory};
use sphereflow::stationary::verify_stationary_identity;
use sphereflow::Config;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub check: VerifyCheck,
    pub status: Status,
    pub detail: String,
}

fn row(check: VerifyCheck, pass: bool, detail: String) -> Row {
    Row { check, status: if pass { Status::Pass } else { Status::Fail }, detail }
}

fn identity(config: &Config) -> Row {
    let tol = config.verify.tol_identity;
    match solve_stationary(config) {
        Ok(profile) => {
            let res = verify_stationary_identity(&profile);
            row(VerifyCheck::Identity, res <= tol, format!("residual {res:e} (tol {tol:e}, N = {})", profile.n_cells))
        }
        Err(e) => row(VerifyCheck::Identity, false, e.to_string()),
    }
}

/// States with random densities and velocities whose radii satisfy the
/// volume recursion.
fn random_state(rng: &mut ChaCha8Rng, dim: u32, mass: f64, cells: usize) -> DiscreteState {
    let h = mass / cells as f64;
    let rho: Vec<f64> = (0..=cells).map(|_| rng.gen_range(0.2..3.0)).collect();
    let mut u: Vec<f64> = (0..cells + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    u[0] = 0.0;
    let nf = dim as f64;
    let mut r = vec![h.powf(1.0 / nf)];
    let mut acc = h;
    for &d in &rho {
        acc += nf * h / d;
        r.push(acc.powf(1.0 / nf));
    }
    DiscreteState { t: 0.0, h, dim, rho, u, r }
}

fn dissipation_check(config: &Config) -> Row {
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut negative = 0;
    let mut min_d = f64::INFINITY;
    for _ in 0..config.verify.samples {
        let cells = rng.gen_range(16..64);
        let d = dissipation(&random_state(&mut rng, p.n, p.mass, cells), p);
        min_d = min_d.min(d);
        negative += usize::from(!(d >= 0.0));
    }
    row(
        VerifyCheck::Dissipation,
        negative == 0,
        format!("{} random states, {negative} negative, min D {min_d:e}", config.verify.samples),
    )
}

fn volume(config: &Config) -> Row {
    let tol = config.verify.tol_volume;
    let sim = config.sim_config();
    let mut state = match init_state(&sim) {
        Ok(s) => s,
        Err(e) => return row(VerifyCheck::Volume, false, e.to_string()),
    };
    // a seeded smooth velocity kick so the radii actually move
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let mass = sim.params.mass;
    for (j, u) in state.u.iter_mut().enumerate().skip(1) {
        let x = (j as f64 * state.h).min(mass) / mass;
        *u += amps.iter().enumerate().map(|(m, a)| a * ((m as f64 + 0.5) * PI * x).sin()).sum::<f64>();
    }
    let mut stepper = Stepper::new(&sim.params, &sim.forcing, sim.n_cells);
    let mut worst = state.volume_residual();
    for k in 0..config.verify.steps {
        let dt = stable_dt(&state, &sim.params, 0.1);
        if let Err(e) = stepper.step(&mut state, dt) {
            return row(VerifyCheck::Volume, false, format!("step {k} failed: {e}"));
        }
        worst = worst.max(state.volume_residual());
    }
    row(
        VerifyCheck::Volume,
        worst <= tol,
        format!("max residual {worst:e} over {} steps (tol {tol:e})", config.verify.steps),
    )
}

fn energy(config: &Config, traj: &Trajectory) -> Row {
    let tol = config.verify.tol_energy;
    match energy_balance_residual(&traj.records()) {
        Ok(res) => row(VerifyCheck::Energy, res <= tol, format!("normalised residual {res:e} (tol {tol:e})")),
        Err(e) => row(VerifyCheck::Energy, false, e.to_string()),
    }
}

/// `V1` may only grow by the work done by the forcing, plus the slack.
fn lyapunov(config: &Config, traj: &Trajectory) -> Row {
    let slack = config.verify.tol_v1_slack;
    let recs = traj.records();
    let rise = recs.windows(2).map(|w| (w[1].v1 - w[0].v1) - (w[1].work - w[0].work)).fold(f64::NEG_INFINITY, f64::max);
    if recs.len() < 2 {
        return row(VerifyCheck::Lyapunov, false, "fewer than two snapshots".into());
    }
    row(VerifyCheck::Lyapunov, rise <= slack, format!("largest increase {rise:e} (slack {slack:e})"))
}

fn decay(config: &Config, traj: &Trajectory) -> Row {
    let min_r2 = config.verify.min_r_squared;
    let recs = traj.records();
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let e: Vec<f64> = recs.iter().map(|r| r.e).collect();
    let t_end = config.t_end;
    match decay_rate_fit(&t, &e, 0.5 * t_end, t_end) {
        Ok(fit) => row(
            VerifyCheck::Decay,
            fit.rate > 0.0 && fit.r_squared >= min_r2,
            format!(
                "rate {} r2 {} over [{}, {}] (need rate > 0, r2 >= {min_r2})",
                fit.rate, fit.r_squared, fit.t_start, fit.t_end
            ),
        ),
        Err(e) => row(VerifyCheck::Decay, false, e.to_string()),
    }
}

/// The effective velocity stays bounded by twice its initial size and ends
/// no larger than it started.
fn h_functional(config: &Config, traj: &Trajectory) -> Row {
    let p = &config.params;
    let norms: Result<Vec<f64>, _> =
        traj.snapshots.iter().map(|s| effective_velocity(&s.state, &traj.reference, p).map(|h| h.l2)).collect();
    match norms {
        Ok(h) => {
            let (h0, h_end) = (h[0], h[h.len() - 1]);
            let sup = h.iter().copied().fold(0.0, f64::max);
            row(
                VerifyCheck::HFunctional,
                sup.is_finite() && sup <= 2.0 * h0 && h_end <= h0,
                format!("|H| initial {h0:e}, final {h_end:e}, max {sup:e}"),
            )
        }
        Err(e) => row(VerifyCheck::HFunctional, false, e.to_string()),
    }
}

fn needs_trajectory(check: VerifyCheck) -> bool {
    matches!(check, VerifyCheck::Energy | VerifyCheck::Lyapunov | VerifyCheck::Decay | VerifyCheck::HFunctional)
}

pub fn evaluate(config: &Config) -> Vec<Row> {
    let checks = &config.verify.checks;
    let skip_h = config.params.theta == 0.0;
    let wants_run = checks.iter().any(|&c| needs_trajectory(c) && !(c == VerifyCheck::HFunctional && skip_h));
    let (traj, standalone) = rayon::join(
        || wants_run.then(|| simulate(&config.sim_config())),
        || {
            checks
                .par_iter()
                .filter_map(|&c| match c {
                    VerifyCheck::Identity => Some(identity(config)),
                    VerifyCheck::Dissipation => Some(dissipation_check(config)),
                    VerifyCheck::Volume => Some(volume(config)),
                    _ => None,
                })
                .collect::<Vec<Row>>()
        },
    );
    checks
        .iter()
        .map(|&c| {
            if !needs_trajectory(c) {
                return standalone.iter().find(|r| r.check == c).expect("standalone check evaluated").clone();
            }
            if c == VerifyCheck::HFunctional && skip_h {
                return Row { check: c, status: Status::Skipped, detail: "theta = 0".into() };
            }
            match traj.as_ref().expect("trajectory requested") {
                Err(e) => row(c, false, format!("simulation: {e}")),
                Ok(traj) => match c {
                    VerifyCheck::Energy => energy(config, traj),
                    VerifyCheck::Lyapunov => lyapunov(config, traj),
                    VerifyCheck::Decay => decay(config, traj),
                    _ => h_functional(config, traj),
                },
            }
        })
        .collect()
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let rows = evaluate(&ctx.config);
    for r in &rows {
        ctx.say(format!("{:<8} {:<13} {}", r.status, r.check.name(), r.detail));
    }
    let failed = rows.iter().filter(|r| r.status == Status::Fail).count();
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_volume_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 3] {
            let s = random_state(&mut rng, dim, 1.0, 20);
            assert!(s.volume_residual() < 1e-14);
            s.check().unwrap();
        }
    }

    #[test]
    fn status_pads() {
        assert_eq!(format!("{:<8}|", Status::Pass), "PASS    |");
        assert_eq!(Status::Skipped.to_string(), "SKIPPED");
    }
}
