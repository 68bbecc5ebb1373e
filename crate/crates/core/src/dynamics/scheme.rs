//! Right-hand side of the semi-discrete system, boundary closure and the
//! four-stage Runge-Kutta step.

use super::{DiscreteState, DynamicsError};
use crate::model::{ForcingSpec, ModelParams};

const MAX_HALVINGS: usize = 20;

/// `x^e` specialised for the exponents that occur in practice; `powf` is
/// by far the most expensive operation in the right-hand side.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Power {
    Zero,
    One,
    Int(i32),
    Thirds(i32),
    Halves(i32),
    General(f64),
}

impl Power {
    pub(crate) fn new(e: f64) -> Self {
        let near = |v: f64| (v - v.round()).abs() < 1e-14;
        if e == 0.0 {
            Power::Zero
        } else if e == 1.0 {
            Power::One
        } else if near(e) && e.abs() < 64.0 {
            Power::Int(e.round() as i32)
        } else if near(2.0 * e) && e.abs() < 32.0 {
            Power::Halves((2.0 * e).round() as i32)
        } else if near(3.0 * e) && e.abs() < 20.0 {
            Power::Thirds((3.0 * e).round() as i32)
        } else {
            Power::General(e)
        }
    }

    #[inline]
    pub(crate) fn eval(self, x: f64) -> f64 {
        match self {
            Power::Zero => 1.0,
            Power::One => x,
            Power::Int(k) => x.powi(k),
            Power::Halves(k) => x.sqrt().powi(k),
            Power::Thirds(k) => x.cbrt().powi(k),
            Power::General(e) => x.powf(e),
        }
    }
}

/// Time derivatives of the unknowns. `u[0]`, `u[N+1]` and `r[0]` are zero:
/// the centre is fixed and the boundary velocity is algebraic.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    /// Boundary velocity `u_{N+1}` from the closure at the evaluated state.
    pub boundary_velocity: f64,
}

impl Derivatives {
    fn zeros(n_cells: usize) -> Self {
        Derivatives {
            rho: vec![0.0; n_cells + 1],
            u: vec![0.0; n_cells + 2],
            r: vec![0.0; n_cells + 2],
            boundary_velocity: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
struct Work {
    rp1: Vec<f64>,
    mu: Vec<f64>,
    rk: Vec<f64>,
    pr: Vec<f64>,
    w: Vec<f64>,
    sigma: Vec<f64>,
}

impl Work {
    fn new(n_cells: usize) -> Self {
        Work {
            rp1: vec![0.0; n_cells + 2],
            mu: vec![0.0; n_cells + 1],
            rk: vec![0.0; n_cells + 1],
            pr: vec![0.0; n_cells + 1],
            w: vec![0.0; n_cells + 2],
            sigma: vec![0.0; n_cells + 2],
        }
    }
}

/// Boundary velocity solving the traction balance
/// `P_N - rho_N K_N delta(r^(n-1) u)_N + 2(n-1) mu_N u_{N+1} / r_{N+1} = P_Gamma`
/// with `K = lambda + 2 mu`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn closure(
    dim: f64,
    h: f64,
    rho_k: f64,
    mu: f64,
    pressure: f64,
    w_n: f64,
    r_end: f64,
    rp1_end: f64,
    p_gamma: f64,
) -> Result<f64, DynamicsError> {
    let a = -rho_k * rp1_end / h + 2.0 * (dim - 1.0) * mu / r_end;
    if !(a.abs() > 1e-300) || !a.is_finite() {
        return Err(DynamicsError::DegenerateClosure(a));
    }
    Ok((p_gamma - pressure - rho_k * w_n / h) / a)
}

#[derive(Debug, Clone, Copy)]
struct Law {
    dim: f64,
    ni: i32,
    gamma: Power,
    theta: Power,
    a: f64,
    c1: f64,
    k: f64,
}

impl Law {
    fn new(p: &ModelParams) -> Self {
        Law {
            dim: p.dim(),
            ni: p.n as i32,
            gamma: Power::new(p.gamma),
            theta: Power::new(p.theta),
            a: p.pressure_coeff,
            c1: p.c1,
            k: 2.0 * p.c1 + p.c2,
        }
    }
}

/// Evaluates the derivatives at `(rho, u, r)` and time `t`; `u[N+1]` is ignored
/// and replaced by the closure value, which is returned.
#[allow(clippy::too_many_arguments)]
fn eval(
    p: &ModelParams,
    law: &Law,
    forcing: &ForcingSpec,
    t: f64,
    h: f64,
    rho: &[f64],
    u: &[f64],
    r: &[f64],
    ws: &mut Work,
    out: &mut Derivatives,
) -> Result<f64, DynamicsError> {
    let n = rho.len() - 1;
    for (i, &d) in rho.iter().enumerate() {
        if !(d > 0.0) || !d.is_finite() {
            return Err(DynamicsError::NonPositiveDensity { index: i, value: d });
        }
        let s = law.theta.eval(d);
        ws.mu[i] = law.c1 * s;
        ws.rk[i] = d * law.k * s;
        ws.pr[i] = law.a * law.gamma.eval(d);
    }
    for j in 0..=n + 1 {
        ws.rp1[j] = r[j].powi(law.ni - 1);
    }
    for j in 0..=n {
        ws.w[j] = ws.rp1[j] * u[j];
    }
    let p_gamma = p.p_inf + forcing.delta_pressure(t);
    let ub = closure(law.dim, h, ws.rk[n], ws.mu[n], ws.pr[n], ws.w[n], r[n + 1], ws.rp1[n + 1], p_gamma)?;
    ws.w[n + 1] = ws.rp1[n + 1] * ub;

    let inv_h = 1.0 / h;
    for i in 0..=n {
        let dw = (ws.w[i + 1] - ws.w[i]) * inv_h;
        out.rho[i] = -rho[i] * rho[i] * dw;
        // sigma_{i+1} lives on cell i
        ws.sigma[i + 1] = ws.rk[i] * dw - ws.pr[i];
    }
    ws.sigma[n + 1] = -p_gamma + 2.0 * (law.dim - 1.0) * ws.mu[n] * ub / r[n + 1];

    let mass = n as f64 * h;
    let two_nm1 = 2.0 * (law.dim - 1.0);
    let gravity = p.gravity;
    let forced = !matches!(forcing.force_kind, crate::model::DecayKind::None);
    for j in 1..=n {
        let x = j as f64 * h;
        let rj = r[j];
        let mut f = gravity * x / ws.rp1[j];
        if forced {
            f += forcing.delta_force(x / mass, rj, t);
        }
        let rnm2 = if law.ni == 2 { 1.0 } else { ws.rp1[j] / rj };
        out.u[j] = ws.rp1[j] * (ws.sigma[j + 1] - ws.sigma[j]) * inv_h
            - two_nm1 * rnm2 * u[j] * (ws.mu[j] - ws.mu[j - 1]) * inv_h
            - f;
        out.r[j] = u[j];
    }
    out.u[0] = 0.0;
    out.u[n + 1] = 0.0;
    out.r[0] = 0.0;
    out.r[n + 1] = ub;
    out.boundary_velocity = ub;
    Ok(ub)
}

/// Boundary velocity `u_{N+1}` for the current state at time `t`.
pub fn closure_velocity(
    state: &DiscreteState,
    p: &ModelParams,
    forcing: &ForcingSpec,
    t: f64,
) -> Result<f64, DynamicsError> {
    let n = state.n_cells();
    let rho = state.rho[n];
    if !(rho > 0.0) {
        return Err(DynamicsError::NonPositiveDensity { index: n, value: rho });
    }
    let ni = p.n as i32;
    let s = rho.powf(p.theta);
    let rk = rho * (2.0 * p.c1 + p.c2) * s;
    let w_n = state.r[n].powi(ni - 1) * state.u[n];
    let r_end = state.r[n + 1];
    closure(
        p.dim(),
        state.h,
        rk,
        p.c1 * s,
        p.eos(rho),
        w_n,
        r_end,
        r_end.powi(ni - 1),
        p.p_inf + forcing.delta_pressure(t),
    )
}

/// Derivatives of all unknowns at `state` (time `state.t`).
pub fn rhs(state: &DiscreteState, p: &ModelParams, forcing: &ForcingSpec) -> Result<Derivatives, DynamicsError> {
    let n = state.n_cells();
    let mut out = Derivatives::zeros(n);
    let mut ws = Work::new(n);
    eval(p, &Law::new(p), forcing, state.t, state.h, &state.rho, &state.u, &state.r, &mut ws, &mut out)?;
    Ok(out)
}

/// Explicit stability bound
/// `safety h^2 / max_i [(lambda+2mu) rho r^(2n-2) + h c r^(n-1)]_i`, with the
/// acoustic impedance `c = rho sqrt(gamma A rho^(gamma-1))` and `r` the outer
/// radius of each cell.
pub fn stable_dt(state: &DiscreteState, p: &ModelParams, safety: f64) -> f64 {
    let h = state.h;
    let ni = p.n as i32;
    let mut worst: f64 = 0.0;
    for (i, &rho) in state.rho.iter().enumerate() {
        let r = state.r[i + 1];
        let visc = (2.0 * p.c1 + p.c2) * rho.powf(p.theta) * rho * r.powi(2 * ni - 2);
        let sound = rho * (p.gamma * p.pressure_coeff * rho.powf(p.gamma - 1.0)).sqrt();
        worst = worst.max(visc + h * sound * r.powi(ni - 1));
    }
    safety * h * h / worst
}

/// Reusable integrator holding all scratch buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    p: ModelParams,
    law: Law,
    forcing: ForcingSpec,
    ws: Work,
    k: [Derivatives; 4],
    rho: Vec<f64>,
    u: Vec<f64>,
    r: Vec<f64>,
}

impl Stepper {
    pub fn new(p: &ModelParams, forcing: &ForcingSpec, n_cells: usize) -> Self {
        Stepper {
            p: *p,
            law: Law::new(p),
            forcing: *forcing,
            ws: Work::new(n_cells),
            k: std::array::from_fn(|_| Derivatives::zeros(n_cells)),
            rho: vec![0.0; n_cells + 1],
            u: vec![0.0; n_cells + 2],
            r: vec![0.0; n_cells + 2],
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    fn stage(&mut self, idx: usize, state: &DiscreteState, t: f64) -> Result<(), DynamicsError> {
        let (rho, u, r) = (&self.rho, &self.u, &self.r);
        eval(&self.p, &self.law, &self.forcing, t, state.h, rho, u, r, &mut self.ws, &mut self.k[idx])?;
        Ok(())
    }

    /// Loads `y0 + c dt k[idx]` into the stage buffers.
    fn load(&mut self, state: &DiscreteState, c: f64, idx: usize) {
        let k = &self.k[idx];
        for (dst, (y, d)) in self.rho.iter_mut().zip(state.rho.iter().zip(&k.rho)) {
            *dst = y + c * d;
        }
        for (dst, (y, d)) in self.u.iter_mut().zip(state.u.iter().zip(&k.u)) {
            *dst = y + c * d;
        }
        for (dst, (y, d)) in self.r.iter_mut().zip(state.r.iter().zip(&k.r)) {
            *dst = y + c * d;
        }
    }

    fn attempt(&mut self, state: &DiscreteState, dt: f64) -> Result<(), DynamicsError> {
        let t = state.t;
        self.rho.copy_from_slice(&state.rho);
        self.u.copy_from_slice(&state.u);
        self.r.copy_from_slice(&state.r);
        self.stage(0, state, t)?;
        self.load(state, 0.5 * dt, 0);
        self.stage(1, state, t + 0.5 * dt)?;
        self.load(state, 0.5 * dt, 1);
        self.stage(2, state, t + 0.5 * dt)?;
        self.load(state, dt, 2);
        self.stage(3, state, t + dt)?;
        let c = dt / 6.0;
        let [k1, k2, k3, k4] = &self.k;
        let combine = |dst: &mut [f64], y: &[f64], a: &[f64], b: &[f64], cc: &[f64], d: &[f64]| {
            for i in 0..dst.len() {
                dst[i] = y[i] + c * (a[i] + 2.0 * b[i] + 2.0 * cc[i] + d[i]);
            }
        };
        combine(&mut self.rho, &state.rho, &k1.rho, &k2.rho, &k3.rho, &k4.rho);
        combine(&mut self.u, &state.u, &k1.u, &k2.u, &k3.u, &k4.u);
        combine(&mut self.r, &state.r, &k1.r, &k2.r, &k3.r, &k4.r);
        Ok(())
    }

    /// One RK4 step of size at most `dt`. A step that produces a non-positive
    /// density, a non-finite value or crossing radii is retried with half the
    /// step, at most twenty times. Returns the step actually taken.
    pub fn step(&mut self, state: &mut DiscreteState, dt: f64) -> Result<f64, DynamicsError> {
        let n = state.n_cells();
        let mut dt = dt;
        for _ in 0..=MAX_HALVINGS {
            let ok = self.attempt(state, dt).and_then(|_| {
                let mut trial = DiscreteState {
                    t: state.t + dt,
                    h: state.h,
                    dim: state.dim,
                    rho: std::mem::take(&mut self.rho),
                    u: std::mem::take(&mut self.u),
                    r: std::mem::take(&mut self.r),
                };
                let res = closure_velocity(&trial, &self.p, &self.forcing, trial.t).and_then(|ub| {
                    trial.u[n + 1] = ub;
                    trial.check()
                });
                match res {
                    Ok(()) => {
                        std::mem::swap(state, &mut trial);
                        // recycle the old buffers
                        self.rho = trial.rho;
                        self.u = trial.u;
                        self.r = trial.r;
                        Ok(())
                    }
                    Err(e) => {
                        self.rho = trial.rho;
                        self.u = trial.u;
                        self.r = trial.r;
                        Err(e)
                    }
                }
            });
            match ok {
                Ok(()) => return Ok(dt),
                Err(DynamicsError::DegenerateClosure(a)) => return Err(DynamicsError::DegenerateClosure(a)),
                Err(_) => dt *= 0.5,
            }
        }
        Err(DynamicsError::StepFailed { halvings: MAX_HALVINGS, dt })
    }
}

/// One RK4 step from `state` with a fresh [`Stepper`].
pub fn step(
    state: &DiscreteState,
    p: &ModelParams,
    forcing: &ForcingSpec,
    dt: f64,
) -> Result<DiscreteState, DynamicsError> {
    let mut s = state.clone();
    Stepper::new(p, forcing, state.n_cells()).step(&mut s, dt)?;
    Ok(s)
}
