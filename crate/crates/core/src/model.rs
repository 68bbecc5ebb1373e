//! Model constants, equation of state, viscosity law, forcing and the
//! Eulerian/Lagrangian change of coordinates.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

/// Relative tolerance used to decide that `gamma` sits exactly on the
/// critical exponent `(2n - 2) / n`.
pub const CRITICAL_GAMMA_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("mass coordinate {x} outside [0, {mass}]")]
    MassOutOfRange { x: f64, mass: f64 },
    #[error("radii not strictly increasing at index {index} ({left} >= {right})")]
    NonMonotoneRadii { index: usize, left: f64, right: f64 },
    #[error("sample arrays have mismatched lengths ({0})")]
    LengthMismatch(String),
}

/// Physical and model constants.
///
/// The Lagrangian domain is `[0, mass]`. Pressure is `pressure_coeff * rho^gamma`,
/// the viscosities are `(c1, c2) * rho^theta`, and self-gravity enters through
/// `gravity * x / r^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub gamma: f64,
    pub pressure_coeff: f64,
    pub theta: f64,
    pub c1: f64,
    pub c2: f64,
    pub gravity: f64,
    pub p_inf: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viscosity {
    pub mu: f64,
    pub lambda: f64,
}

impl ModelParams {
    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Weight exponent `3/2 - n` of the weighted functional.
    pub fn alpha(&self) -> f64 {
        1.5 - self.dim()
    }

    /// `(2n - 2) / n`, the exponent separating the stratification regimes.
    pub fn critical_gamma(&self) -> f64 {
        let n = self.dim();
        (2.0 * n - 2.0) / n
    }

    /// Left-hand side of the viscosity-ratio discriminant condition; admissible
    /// parameters make it negative.
    pub fn discriminant(&self) -> f64 {
        let n = self.dim();
        let a = self.alpha();
        let (c1, c2) = (self.c1, self.c2);
        let b = 2.0 * c1 * a + c2 * (2.0 * n - 2.0 + a);
        let q = 2.0 * c1 * (n - 1.0) + c2 * (n - 1.0) * (n - 1.0 + a);
        b * b - 4.0 * (2.0 * c1 + c2) * q
    }

    /// Coefficients `(2c1/n + c2, 2(n-1)c1/n)` of the two squares in the
    /// dissipation rate.
    pub fn dissipation_coefficients(&self) -> (f64, f64) {
        let n = self.dim();
        (2.0 * self.c1 / n + self.c2, 2.0 * (n - 1.0) * self.c1 / n)
    }

    /// Density at which the polytropic pressure equals the far-field pressure.
    pub fn boundary_density(&self) -> f64 {
        (self.p_inf / self.pressure_coeff).powf(1.0 / self.gamma)
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, ModelError> {
        check_density(rho)?;
        Ok(self.eos(rho))
    }

    pub fn viscosity(&self, rho: f64) -> Result<Viscosity, ModelError> {
        check_density(rho)?;
        let s = rho.powf(self.theta);
        Ok(Viscosity { mu: self.c1 * s, lambda: self.c2 * s })
    }

    /// Gravitational plus perturbing body force at mass coordinate `x`,
    /// radius `r` and time `t`.
    pub fn body_force(&self, forcing: &ForcingSpec, x: f64, r: f64, t: f64) -> Result<f64, ModelError> {
        if !(r > 0.0) {
            return Err(ModelError::NonPositiveRadius(r));
        }
        if !(0.0..=self.mass).contains(&x) {
            return Err(ModelError::MassOutOfRange { x, mass: self.mass });
        }
        Ok(self.gravity * x / r.powi(self.n as i32 - 1) + forcing.delta_force(x / self.mass, r, t))
    }

    #[inline]
    pub(crate) fn eos(&self, rho: f64) -> f64 {
        self.pressure_coeff * rho.powf(self.gamma)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.dim();
        if self.n < 2 {
            violations.push(Violation::Dimension { n: self.n });
        }
        if !(self.gamma > 1.0) {
            violations.push(Violation::Gamma { gamma: self.gamma });
        }
        if !(self.pressure_coeff > 0.0) {
            violations.push(Violation::PressureCoeff { value: self.pressure_coeff });
        }
        if !(self.theta >= 0.0) {
            violations.push(Violation::Theta { value: self.theta });
        }
        if !(self.p_inf > 0.0) {
            violations.push(Violation::FarFieldPressure { value: self.p_inf });
        }
        if !(self.mass > 0.0) {
            violations.push(Violation::Mass { value: self.mass });
        }
        if !(self.gravity >= 0.0) {
            violations.push(Violation::Gravity { value: self.gravity });
        }
        if !(self.c1 > 0.0) {
            violations.push(Violation::ShearViscosity { c1: self.c1 });
        }
        let bulk = 2.0 * self.c1 + n * self.c2;
        if !(bulk > 0.0) {
            violations.push(Violation::BulkViscosity { value: bulk });
        }
        let disc = self.discriminant();
        if !(disc < 0.0) {
            violations.push(Violation::Discriminant { value: disc });
        }

        let regime = if !violations.is_empty() && violations.iter().any(Violation::blocks_regime) {
            None
        } else {
            match self.stratification() {
                Ok(regime) => Some(regime),
                Err(v) => {
                    violations.push(v);
                    None
                }
            }
        };
        ValidationReport { violations, regime }
    }

    fn stratification(&self) -> Result<Regime, Violation> {
        if self.gravity == 0.0 {
            return Ok(Regime::Weightless);
        }
        let n = self.dim();
        let crit = self.critical_gamma();
        let (g, a, m) = (self.gravity, self.pressure_coeff, self.mass);
        if (self.gamma - crit).abs() <= CRITICAL_GAMMA_TOL * crit {
            let lhs = g * n.powf((2.0 - n) / n) * m.powf(2.0 / n);
            if lhs < 2.0 * a {
                Ok(Regime::Critical)
            } else {
                Err(Violation::CriticalMass { lhs, rhs: 2.0 * a })
            }
        } else if self.gamma > crit {
            Ok(Regime::Supercritical)
        } else {
            let delta = (a * self.gamma * n.powf((2.0 * n - 2.0) / n) / ((n - 1.0) * g * m.powf(2.0 / n)))
                .powf(n / (2.0 * n - 2.0 - n * self.gamma));
            let lhs = self.p_inf + 0.5 * g * n.powf((2.0 - n) / n) * m.powf(2.0 / n) * delta.powf((2.0 * n - 2.0) / n);
            let rhs = a * delta.powf(self.gamma);
            if lhs <= rhs {
                Ok(Regime::Subcritical)
            } else {
                Err(Violation::SubcriticalBound { lhs, rhs })
            }
        }
    }
}

fn check_density(rho: f64) -> Result<(), ModelError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveDensity(rho))
    }
}

/// Which branch of the stratification condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `G = 0`: the stationary state is uniform.
    Weightless,
    /// `gamma > (2n - 2) / n`.
    Supercritical,
    /// `gamma = (2n - 2) / n` with the mass bound.
    Critical,
    /// `gamma < (2n - 2) / n` with the invariant-ball bound. Existence only;
    /// uniqueness of the stationary state is not guaranteed.
    Subcritical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension { n: u32 },
    Gamma { gamma: f64 },
    PressureCoeff { value: f64 },
    Theta { value: f64 },
    FarFieldPressure { value: f64 },
    Mass { value: f64 },
    Gravity { value: f64 },
    ShearViscosity { c1: f64 },
    BulkViscosity { value: f64 },
    Discriminant { value: f64 },
    CriticalMass { lhs: f64, rhs: f64 },
    SubcriticalBound { lhs: f64, rhs: f64 },
}

impl Violation {
    // the stratification test needs these to be meaningful
    fn blocks_regime(&self) -> bool {
        matches!(
            self,
            Violation::Dimension { .. }
                | Violation::Gamma { .. }
                | Violation::PressureCoeff { .. }
                | Violation::FarFieldPressure { .. }
                | Violation::Mass { .. }
                | Violation::Gravity { .. }
        )
    }

    /// Short name of the violated condition.
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Dimension { .. } => "n>=2",
            Violation::Gamma { .. } => "gamma>1",
            Violation::PressureCoeff { .. } => "A>0",
            Violation::Theta { .. } => "theta>=0",
            Violation::FarFieldPressure { .. } => "P_inf>0",
            Violation::Mass { .. } => "M>0",
            Violation::Gravity { .. } => "G>=0",
            Violation::ShearViscosity { .. } => "c1>0",
            Violation::BulkViscosity { .. } => "2c1+nc2>0",
            Violation::Discriminant { .. } => "viscosity discriminant<0",
            Violation::CriticalMass { .. } => "G*n^((2-n)/n)*M^(2/n)<2A",
            Violation::SubcriticalBound { .. } => "gamma>=(2n-2)/n or invariant-ball bound",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.condition();
        match self {
            Violation::Dimension { n } => write!(f, "{c} violated: n = {n}"),
            Violation::Gamma { gamma } => write!(f, "{c} violated: gamma = {gamma}"),
            Violation::PressureCoeff { value }
            | Violation::Theta { value }
            | Violation::FarFieldPressure { value }
            | Violation::Mass { value }
            | Violation::Gravity { value } => write!(f, "{c} violated: value = {value}"),
            Violation::ShearViscosity { c1 } => write!(f, "{c} violated: c1 = {c1}"),
            Violation::BulkViscosity { value } => write!(f, "{c} violated: 2c1+nc2 = {value}"),
            Violation::Discriminant { value } => write!(f, "{c} violated: discriminant = {value}"),
            Violation::CriticalMass { lhs, rhs } | Violation::SubcriticalBound { lhs, rhs } => {
                write!(f, "{c} violated: {lhs} vs {rhs}")
            }
        }
    }
}

/// Outcome of [`ModelParams::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub regime: Option<Regime>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }

    /// False when only the existence branch for small `gamma` is available.
    pub fn uniqueness_guaranteed(&self) -> bool {
        matches!(self.regime, Some(Regime::Weightless | Regime::Supercritical | Regime::Critical))
    }

    pub fn violates(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition() == condition)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_accepted() {
            write!(f, "accepted ({:?})", self.regime.expect("accepted report has a regime"))?;
            if !self.uniqueness_guaranteed() {
                write!(f, "; uniqueness not guaranteed")?;
            }
            Ok(())
        } else {
            write!(f, "rejected:")?;
            for v in &self.violations {
                write!(f, "\n  - {v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    None,
    ExpDecay,
}

/// Spatial profile `s(x/M)` of the body-force perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceShape {
    /// `sin^2(pi x / M)`
    Bump,
    Uniform,
}

impl ForceShape {
    fn eval(self, xi: f64) -> f64 {
        match self {
            ForceShape::Bump => (PI * xi).sin().powi(2),
            ForceShape::Uniform => 1.0,
        }
    }
}

/// Decaying perturbations of the boundary pressure and of the body force.
///
/// `delta_pressure(t) = amp * exp(-rate t)` and
/// `delta_force = amp * exp(-rate t) * s(x/M) * min(1, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub pressure_kind: DecayKind,
    pub pressure_amp: f64,
    pub pressure_rate: f64,
    pub force_kind: DecayKind,
    pub force_amp: f64,
    pub force_rate: f64,
    pub force_shape: ForceShape,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::none()
    }
}

impl ForcingSpec {
    pub fn none() -> Self {
        ForcingSpec {
            pressure_kind: DecayKind::None,
            pressure_amp: 0.0,
            pressure_rate: 0.0,
            force_kind: DecayKind::None,
            force_amp: 0.0,
            force_rate: 0.0,
            force_shape: ForceShape::Bump,
        }
    }

    /// Both perturbations decaying at the same rate.
    pub fn exp_decay(pressure_amp: f64, force_amp: f64, rate: f64) -> Self {
        ForcingSpec {
            pressure_kind: DecayKind::ExpDecay,
            pressure_amp,
            pressure_rate: rate,
            force_kind: DecayKind::ExpDecay,
            force_amp,
            force_rate: rate,
            force_shape: ForceShape::Bump,
        }
    }

    pub fn is_none(&self) -> bool {
        self.pressure_kind == DecayKind::None && self.force_kind == DecayKind::None
    }

    pub fn delta_pressure(&self, t: f64) -> f64 {
        match self.pressure_kind {
            DecayKind::None => 0.0,
            DecayKind::ExpDecay => self.pressure_amp * (-self.pressure_rate * t).exp(),
        }
    }

    /// `xi` is the normalised mass coordinate `x / M`.
    pub fn delta_force(&self, xi: f64, r: f64, t: f64) -> f64 {
        match self.force_kind {
            DecayKind::None => 0.0,
            DecayKind::ExpDecay => {
                self.force_amp * (-self.force_rate * t).exp() * self.force_shape.eval(xi) * r.min(1.0)
            }
        }
    }

    pub fn has_valid_rates(&self) -> bool {
        self.pressure_rate >= 0.0 && self.force_rate >= 0.0
    }
}

/// A point of an Eulerian profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerianSample {
    pub r: f64,
    pub rho: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianProfile {
    pub samples: Vec<EulerianSample>,
    /// Free-boundary radius (last sample radius).
    pub boundary_radius: f64,
}

/// Pairs node radii with densities and velocities. Radii must be strictly
/// increasing and densities positive.
pub fn eulerian_samples(radii: &[f64], rho: &[f64], u: &[f64]) -> Result<EulerianProfile, ModelError> {
    if radii.len() != rho.len() || radii.len() != u.len() || radii.is_empty() {
        return Err(ModelError::LengthMismatch(format!("r: {}, rho: {}, u: {}", radii.len(), rho.len(), u.len())));
    }
    for (i, w) in radii.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(ModelError::NonMonotoneRadii { index: i, left: w[0], right: w[1] });
        }
    }
    if let Some(&bad) = rho.iter().find(|&&d| !(d > 0.0)) {
        return Err(ModelError::NonPositiveDensity(bad));
    }
    let samples = radii.iter().zip(rho).zip(u).map(|((&r, &rho), &u)| EulerianSample { r, rho, u }).collect();
    Ok(EulerianProfile { samples, boundary_radius: *radii.last().unwrap() })
}

/// Mass coordinate `x = int_0^r y^(n-1) rho dy` at every sample, using the
/// trapezoid rule in `r^n`. The mass inside the first sample is taken as
/// `rho_0 r_0^n / n`.
pub fn mass_coordinates(n: u32, samples: &[EulerianSample]) -> Vec<f64> {
    let nf = n as f64;
    let mut out = Vec::with_capacity(samples.len());
    let Some(first) = samples.first() else {
        return out;
    };
    let mut x = first.rho * first.r.powi(n as i32) / nf;
    out.push(x);
    for w in samples.windows(2) {
        let dv = (w[1].r.powi(n as i32) - w[0].r.powi(n as i32)) / nf;
        x += 0.5 * (w[0].rho + w[1].rho) * dv;
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn benchmark() -> ModelParams {
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

    #[test]
    fn benchmark_is_accepted() {
        let p = benchmark();
        let report = p.validate();
        assert!(report.is_accepted(), "{report}");
        assert_eq!(report.regime, Some(Regime::Supercritical));
        // [2*(-1.5) + 2.5]^2 - 4*3*[4 + 2*1*0.5] = 0.25 - 60
        assert!((p.discriminant() + 59.75).abs() < 1e-12);
    }

    #[test]
    fn negative_bulk_viscosity_rejected() {
        let p = ModelParams { c2: -1.0, ..benchmark() };
        let report = p.validate();
        assert!(!report.is_accepted());
        assert!(report.violates("2c1+nc2>0"));
        assert!(report.to_string().contains("2c1+nc2 = -1"));
    }

    #[test]
    fn critical_gamma_with_small_mass_accepted() {
        let p = ModelParams { gamma: 4.0 / 3.0, ..benchmark() };
        let report = p.validate();
        assert!(report.is_accepted(), "{report}");
        assert_eq!(report.regime, Some(Regime::Critical));
        let lhs = 3f64.powf(-1.0 / 3.0);
        assert!((lhs - 0.693).abs() < 1e-3);
    }

    #[test]
    fn critical_gamma_with_large_mass_rejected() {
        let p = ModelParams { gamma: 4.0 / 3.0, mass: 10.0, ..benchmark() };
        assert!(p.validate().violates("G*n^((2-n)/n)*M^(2/n)<2A"));
    }

    #[test]
    fn isothermal_rejected() {
        let p = ModelParams { n: 2, gamma: 1.0, ..benchmark() };
        let report = p.validate();
        assert!(report.violates("gamma>1"));
    }

    #[test]
    fn subcritical_branch_flags_uniqueness() {
        // n = 3, gamma = 1.2 < 4/3; small P_inf and G keep the ball bound satisfied
        let p = ModelParams { gamma: 1.2, gravity: 0.1, p_inf: 0.01, ..benchmark() };
        let report = p.validate();
        assert!(report.is_accepted(), "{report}");
        assert_eq!(report.regime, Some(Regime::Subcritical));
        assert!(!report.uniqueness_guaranteed());
        assert!(report.to_string().contains("uniqueness not guaranteed"));
    }

    #[test]
    fn viscosity_ratio_window_for_n3() {
        // admissible c2/c1 lies in (2/3 (13 - 8 sqrt 3), 2/3 (13 + 8 sqrt 3))
        let lo = 2.0 / 3.0 * (13.0 - 8.0 * 3f64.sqrt());
        let hi = 2.0 / 3.0 * (13.0 + 8.0 * 3f64.sqrt());
        for (ratio, ok) in [(lo + 1e-6, true), (hi - 1e-6, true), (lo - 1e-3, false), (hi + 1e-3, false)] {
            let p = ModelParams { c1: 1.0, c2: ratio, ..benchmark() };
            assert_eq!(p.discriminant() < 0.0, ok, "ratio {ratio}");
        }
    }

    #[test]
    fn dissipation_coefficients_positive_when_accepted() {
        for c2 in [-0.5, -0.1, 0.0, 1.0, 10.0] {
            let p = ModelParams { c2, ..benchmark() };
            if p.validate().is_accepted() {
                let (a, b) = p.dissipation_coefficients();
                assert!(a > 0.0 && b > 0.0, "c2 = {c2}");
            }
        }
    }

    #[test]
    fn pressure_values() {
        let p = ModelParams { gamma: 2.0, ..benchmark() };
        assert_eq!(p.pressure(2.0).unwrap(), 4.0);
        assert_eq!(benchmark().pressure(1.0).unwrap(), 1.0);
        let q = ModelParams { pressure_coeff: 2.0, ..benchmark() };
        assert!((q.pressure(8.0).unwrap() - 64.0).abs() < 1e-12);
        assert!(matches!(p.pressure(0.0), Err(ModelError::NonPositiveDensity(_))));
        assert!(p.pressure(-1.0).is_err());
    }

    #[test]
    fn viscosity_values() {
        let p = ModelParams { theta: 0.0, c1: 1.5, c2: 0.3, ..benchmark() };
        let v = p.viscosity(7.0).unwrap();
        assert_eq!((v.mu, v.lambda), (1.5, 0.3));
        let q = ModelParams { c1: 3.0, theta: 0.5, ..benchmark() };
        assert_eq!(q.viscosity(4.0).unwrap().mu, 6.0);
        let v1 = benchmark().viscosity(1.0).unwrap();
        assert_eq!((v1.mu, v1.lambda), (1.0, 1.0));
        assert!(p.viscosity(0.0).is_err());
    }

    #[test]
    fn monotone_in_density() {
        let p = benchmark();
        let rhos = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0];
        for w in rhos.windows(2) {
            assert!(p.pressure(w[1]).unwrap() > p.pressure(w[0]).unwrap());
            assert!(p.viscosity(w[1]).unwrap().mu > p.viscosity(w[0]).unwrap().mu);
        }
    }

    #[test]
    fn body_force_values() {
        let p = ModelParams { mass: 10.0, ..benchmark() };
        let none = ForcingSpec::none();
        assert_eq!(p.body_force(&none, 8.0, 2.0, 0.0).unwrap(), 2.0);
        let weightless = ModelParams { gravity: 0.0, ..p };
        assert_eq!(weightless.body_force(&none, 3.0, 0.5, 1.0).unwrap(), 0.0);
        assert!(p.body_force(&none, 1.0, 0.0, 0.0).is_err());
        assert!(p.body_force(&none, 11.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn forcing_envelope_and_decay() {
        let p = benchmark();
        let f = ForcingSpec::exp_decay(0.2, 0.3, 1.0);
        let grav = p.gravity * 0.5 / 0.8f64.powi(2);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let t = k as f64 * 0.5;
            let df = f.delta_force(0.5, 0.8, t);
            assert!(df.abs() <= 0.3 * (-t).exp() + 1e-15);
            assert!(f.delta_pressure(t).abs() <= 0.2 * (-t).exp() + 1e-15);
            let total = p.body_force(&f, 0.5, 0.8, t).unwrap();
            assert!((total - grav).abs() < last || k == 0);
            last = (total - grav).abs();
        }
        assert!((p.body_force(&f, 0.5, 0.8, 50.0).unwrap() - grav).abs() < 1e-20);
        let none = ForcingSpec::none();
        assert_eq!(none.delta_force(0.3, 2.0, 0.0), 0.0);
        assert_eq!(none.delta_pressure(0.0), 0.0);
    }

    #[test]
    fn eulerian_uniform_density() {
        // rho = 2, n = 3, M = 1 gives r^3 = 3 x / 2
        let n = 3;
        let nodes = 11;
        let radii: Vec<f64> = (0..nodes).map(|j| (1.5 * j as f64 / 10.0).cbrt()).collect();
        let rho = vec![2.0; nodes];
        let u = vec![0.0; nodes];
        let prof = eulerian_samples(&radii, &rho, &u).unwrap();
        assert!((prof.boundary_radius - 1.5f64.cbrt()).abs() < 1e-15);
        let x = mass_coordinates(n, &prof.samples);
        for (j, xj) in x.iter().enumerate() {
            assert!((xj - j as f64 / 10.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eulerian_rejects_bad_input() {
        assert!(matches!(
            eulerian_samples(&[0.0, 1.0, 0.5], &[1.0; 3], &[0.0; 3]),
            Err(ModelError::NonMonotoneRadii { index: 1, .. })
        ));
        assert!(eulerian_samples(&[0.0, 1.0], &[1.0, -1.0], &[0.0; 2]).is_err());
        assert!(eulerian_samples(&[0.0, 1.0], &[1.0], &[0.0; 2]).is_err());
    }
}
