//! File emission. Floats are written in shortest round-trip form.

use crate::CliError;
use serde::Serialize;
use sphereflow::dynamics::DiscreteState;
use sphereflow::stationary::StationaryProfile;
use sphereflow::DiagnosticsRecord;
use std::fs;
use std::path::Path;

#[derive(Serialize)]
struct ProfileRow {
    x: f64,
    rho_inf: f64,
    #[serde(rename = "V_inf")]
    v_inf: f64,
    r_inf: f64,
}

#[derive(Serialize)]
struct SnapshotRow {
    i: usize,
    x: f64,
    rho: f64,
    u: f64,
    r: f64,
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "V1")]
    v1: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "I_sup")]
    i_sup: f64,
    mass_vol_residual: f64,
    energy_residual: f64,
    rho_min: f64,
    rho_max: f64,
    boundary_radius: f64,
}

pub fn write_profile(path: &Path, profile: &StationaryProfile) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for j in 0..=profile.n_cells {
        w.serialize(ProfileRow {
            x: profile.x(j),
            rho_inf: profile.rho[j],
            v_inf: profile.volume[j],
            r_inf: profile.radius[j],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One row per node `0..=N+1`. Node `j` carries the density of cell `j`; the
/// boundary node repeats the last cell.
pub fn write_snapshot(path: &Path, state: &DiscreteState) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let last = state.rho.len() - 1;
    for i in 0..state.r.len() {
        w.serialize(SnapshotRow { i, x: state.x(i), rho: state.rho[i.min(last)], u: state.u[i], r: state.r[i] })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(SeriesRow {
            t: r.t,
            e: r.e,
            v1: r.v1,
            d: r.d,
            b: r.b,
            i_sup: r.i_sup,
            mass_vol_residual: r.mass_vol_residual,
            energy_residual: r.energy_residual,
            rho_min: r.rho_min,
            rho_max: r.rho_max,
            boundary_radius: r.boundary_radius,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Record of a `simulate` run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    /// `ok` or `aborted(reason)`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_time: Option<f64>,
    pub wall_clock_seconds: f64,
    pub steps: usize,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    /// Every resolved configuration key, in file order.
    #[serde(serialize_with = "as_map")]
    pub config: Vec<(String, String)>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

fn as_map<S: serde::Serializer>(pairs: &[(String, String)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(pairs.iter().map(|(k, v)| (k, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let rec = DiagnosticsRecord {
            t: 0.1,
            e: 1.0 / 3.0,
            v1: 2e-17,
            d: 0.0,
            b: 0.0,
            i_sup: 0.0,
            within_bounds: true,
            mass_vol_residual: 0.0,
            energy_residual: 0.0,
            rho_min: 1.0,
            rho_max: 2.0,
            boundary_radius: std::f64::consts::PI,
            u_over_r_sup: 0.0,
            dissipated: 0.0,
            work: 0.0,
        };
        write_series(&path, &[rec]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,E,V1,D,B,I_sup,mass_vol_residual,energy_residual,rho_min,rho_max,boundary_radius"
        );
        let fields: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[1], 1.0 / 3.0);
        assert_eq!(fields[2], 2e-17);
        assert_eq!(fields[10], std::f64::consts::PI);
    }
}
