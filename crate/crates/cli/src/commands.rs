//! `stationary`, `simulate` and `convergence`.

use crate::output::{self, RunManifest};
use crate::{CliError, Context};
use serde::Serialize;
use sphereflow::diagnostics::{convergence_study, decay_rate_fit, DiagnosticsError, Order};
use sphereflow::dynamics::{simulate as run_simulation, SimulateError, Trajectory};
use sphereflow::stationary::{
    fixed_point_solve, shoot, stability_min_eigen, verify_stationary_identity, SolveMethod, StationaryProfile,
};
use sphereflow::Config;
use std::fs;
use std::time::Instant;

pub fn solve_stationary(config: &Config) -> Result<StationaryProfile, CliError> {
    let p = &config.params;
    let res = match config.stationary_method {
        SolveMethod::Shooting => shoot(p, config.stationary_cells, config.stationary_tol),
        SolveMethod::FixedPoint => {
            fixed_point_solve(p, config.stationary_cells, config.stationary_tol, config.stationary_relax)
                .map(|r| r.profile)
        }
    };
    res.map_err(|e| CliError::Stationary(e.to_string()))
}

#[derive(Serialize)]
struct StationarySummary {
    sigma: f64,
    l_inf: f64,
    /// `|A rho(M)^gamma - P_inf|`
    residual: f64,
    identity_residual: f64,
    lambda_min: f64,
    n_cells: usize,
    uniqueness_guaranteed: bool,
}

pub fn stationary(ctx: &Context) -> Result<(), CliError> {
    let profile = solve_stationary(&ctx.config)?;
    let lambda_min = stability_min_eigen(&profile).map_err(|e| CliError::Stationary(e.to_string()))?;
    let summary = StationarySummary {
        sigma: profile.sigma,
        l_inf: profile.l_inf,
        residual: profile.residual,
        identity_residual: verify_stationary_identity(&profile),
        lambda_min,
        n_cells: profile.n_cells,
        uniqueness_guaranteed: profile.uniqueness_guaranteed,
    };
    fs::create_dir_all(&ctx.out)?;
    output::write_profile(&ctx.out.join("profile.csv"), &profile)?;
    output::write_json(&ctx.out.join("summary.json"), &summary)?;
    ctx.say(format!(
        "sigma = {} l_inf = {} residual = {:e} identity_residual = {:e} lambda_min = {}",
        summary.sigma, summary.l_inf, summary.residual, summary.identity_residual, summary.lambda_min
    ));
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    window: [f64; 2],
    rate: f64,
    r_squared: f64,
    samples: usize,
}

/// Writes snapshots, the index, the time series and the decay fit; returns
/// the artifact paths relative to the output directory.
fn write_trajectory(ctx: &Context, traj: &Trajectory) -> Result<Vec<String>, CliError> {
    let snap_dir = ctx.out.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    let mut artifacts = Vec::new();
    let mut index = csv::Writer::from_path(snap_dir.join("index.csv"))?;
    index.write_record(["k", "t", "file"])?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{k:05}.csv");
        output::write_snapshot(&snap_dir.join(&name), &snap.state)?;
        index.write_record([k.to_string(), snap.state.t.to_string(), name.clone()])?;
        artifacts.push(format!("snapshots/{name}"));
    }
    index.flush()?;
    artifacts.push("snapshots/index.csv".into());

    let records = traj.records();
    output::write_series(&ctx.out.join("timeseries.csv"), &records)?;
    artifacts.push("timeseries.csv".into());

    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.e).collect();
    let t_end = t.last().copied().unwrap_or(0.0);
    // too few or non-positive samples just means no fit to report
    if let Ok(fit) = decay_rate_fit(&t, &e, 0.5 * t_end, t_end) {
        let report = FitReport {
            window: [fit.t_start, fit.t_end],
            rate: fit.rate,
            r_squared: fit.r_squared,
            samples: fit.samples,
        };
        output::write_json(&ctx.out.join("decay_fit.json"), &report)?;
        artifacts.push("decay_fit.json".into());
    }
    Ok(artifacts)
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let sim = ctx.config.sim_config();
    fs::create_dir_all(&ctx.out)?;
    let clock = Instant::now();
    let outcome = run_simulation(&sim);
    let wall = clock.elapsed().as_secs_f64();
    let (traj, status, abort_time, failure) = match outcome {
        Ok(traj) => (traj, "ok".to_string(), None, None),
        Err(SimulateError::Aborted(abort)) => {
            let reason = format!("aborted({})", abort.error);
            let msg = abort.to_string();
            (abort.partial, reason, Some(abort.t), Some(CliError::Aborted(msg)))
        }
        Err(SimulateError::Setup(e)) => return Err(CliError::Usage(e.to_string())),
    };
    let mut artifacts = write_trajectory(ctx, &traj)?;
    artifacts.push("manifest.json".into());
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        status,
        abort_time,
        wall_clock_seconds: wall,
        steps: traj.steps,
        dt_min: (traj.steps > 0).then_some(traj.dt_min),
        dt_max: (traj.steps > 0).then_some(traj.dt_max),
        config: ctx.config.echo(),
        artifacts,
    };
    output::write_json(&ctx.out.join("manifest.json"), &manifest)?;
    if let Some(err) = failure {
        return Err(err);
    }
    let last = traj.last().record.clone();
    ctx.say(format!(
        "t = {} steps = {} snapshots = {} E = {} V1 = {} energy_residual = {}",
        last.t,
        traj.steps,
        traj.snapshots.len(),
        last.e,
        last.v1,
        last.energy_residual
    ));
    Ok(())
}

fn parse_grids(list: &str) -> Result<Vec<usize>, CliError> {
    list.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad grid size `{s}` in `{list}`"))))
        .collect()
}

fn order_text(o: Order) -> String {
    match o {
        Order::Exact => "exact".into(),
        Order::Value(v) => v.to_string(),
    }
}

pub fn convergence(ctx: &Context, grids: &str) -> Result<(), CliError> {
    let grids = parse_grids(grids)?;
    let report = convergence_study(&ctx.config.sim_config(), &grids).map_err(|e| match e {
        DiagnosticsError::TooFewGrids(_) | DiagnosticsError::NonNestedGrids(_) => CliError::Usage(e.to_string()),
        DiagnosticsError::Simulation(s) => match *s {
            SimulateError::Aborted(a) => CliError::Aborted(a.to_string()),
            SimulateError::Setup(e) => CliError::Usage(e.to_string()),
        },
        other => CliError::Usage(other.to_string()),
    })?;
    fs::create_dir_all(&ctx.out)?;
    let mut w = csv::Writer::from_path(ctx.out.join("convergence.csv"))?;
    w.write_record(["field", "grid_coarse", "grid_fine", "difference", "order"])?;
    ctx.say(format!("{:<6} {:>8} {:>8} {:>24} {:>20}", "field", "coarse", "fine", "difference", "order"));
    for f in &report.fields {
        for (k, diff) in f.differences.iter().enumerate() {
            // the first pair has no order of its own; orders sit on the finer pair
            let order = if k == 0 { "-".to_string() } else { order_text(f.orders[k - 1]) };
            let (a, b) = (grids[k], grids[k + 1]);
            w.write_record([f.name.to_string(), a.to_string(), b.to_string(), format!("{diff:e}"), order.clone()])?;
            ctx.say(format!("{:<6} {a:>8} {b:>8} {diff:>24e} {order:>20}", f.name));
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_lists() {
        assert_eq!(parse_grids("100, 200,400").unwrap(), vec![100, 200, 400]);
        assert!(matches!(parse_grids("100,x"), Err(CliError::Usage(_))));
        assert_eq!(order_text(Order::Exact), "exact");
        assert_eq!(order_text(Order::Value(0.5)), "0.5");
    }
}
