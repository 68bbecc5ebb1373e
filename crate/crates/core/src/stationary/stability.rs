//! Static stability: the quadratic form
//! `J[W] = int gamma A rho^(1+gamma) W_x^2 - (2n-2) G x (nV)^((2-3n)/n) W^2`
//! relative to the weight `int W_x^2 + (W/x)^2`, discretised with linear
//! elements on the profile grid (`W_0 = 0`).

use super::{StationaryError, StationaryProfile};

/// Symmetric tridiagonal matrix; `off[k]` couples unknowns `k` and `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    fn zeros(n: usize) -> Self {
        SymTridiagonal { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds a 2x2 element block on nodes `(j, j+1)` of the full grid, where
    /// grid node 0 is the eliminated centre.
    fn add_block(&mut self, j: usize, a: f64, b: f64, d: f64) {
        if j >= 1 {
            self.diag[j - 1] += a;
            self.off[j - 1] += b;
        }
        self.diag[j] += d;
    }

    /// `W^T M W`
    pub fn quadratic(&self, w: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len() {
            s += self.diag[k] * w[k] * w[k];
            if k + 1 < self.len() {
                s += 2.0 * self.off[k] * w[k] * w[k + 1];
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityForms {
    /// Matrix of `J`.
    pub j_form: SymTridiagonal,
    /// Matrix of the weight.
    pub weight: SymTridiagonal,
}

/// Exponent of the mesh grading `x_j = M (j/N)^q` used for the eigenproblem.
pub const STABILITY_GRADING: f64 = 8.0;

/// Assembles both forms with linear elements on `nodes` (starting at 0 and
/// ending at `M`); the unknowns are `W` at every node but the first.
pub fn stability_forms_on(profile: &StationaryProfile, nodes: &[f64]) -> StabilityForms {
    let p = &profile.params;
    let nf = p.dim();
    let n = nodes.len() - 1;
    let mut jf = SymTridiagonal::zeros(n);
    let mut wf = SymTridiagonal::zeros(n);
    let stiff: Vec<f64> =
        nodes.iter().map(|&x| p.gamma * p.pressure_coeff * profile.rho_at(x).powf(1.0 + p.gamma)).collect();
    for k in 0..n {
        let dx = nodes[k + 1] - nodes[k];
        let c = 0.5 * (stiff[k] + stiff[k + 1]) / dx;
        jf.add_block(k, c, -c, c);
        let xm = 0.5 * (nodes[k] + nodes[k + 1]);
        let m = dx / (4.0 * xm * xm);
        wf.add_block(k, 1.0 / dx + m, -1.0 / dx + m, 1.0 / dx + m);
    }
    for j in 1..=n {
        let x = nodes[j];
        let lump = 0.5 * (x - nodes[j - 1]) + if j < n { 0.5 * (nodes[j + 1] - x) } else { 0.0 };
        let vol = profile.volume_at(x);
        jf.diag[j - 1] -= lump * (2.0 * nf - 2.0) * p.gravity * x * (nf * vol).powf((2.0 - 3.0 * nf) / nf);
    }
    StabilityForms { j_form: jf, weight: wf }
}

/// Graded nodes `x_j = M (j/N)^q`.
pub fn graded_nodes(mass: f64, n_cells: usize, grading: f64) -> Vec<f64> {
    (0..=n_cells).map(|j| mass * (j as f64 / n_cells as f64).powf(grading)).collect()
}

/// Assembles both forms on the graded mesh with as many cells as the profile.
pub fn stability_forms(profile: &StationaryProfile) -> StabilityForms {
    stability_forms_on(profile, &graded_nodes(profile.params.mass, profile.n_cells, STABILITY_GRADING))
}

/// Number of negative pivots of `A - lambda B`, i.e. the number of generalized
/// eigenvalues below `lambda`.
fn count_below(a: &SymTridiagonal, b: &SymTridiagonal, lambda: f64) -> usize {
    let mut count = 0;
    let mut d_prev = 1.0;
    let mut e_prev = 0.0;
    for k in 0..a.len() {
        let mut d = a.diag[k] - lambda * b.diag[k];
        if k > 0 {
            d -= e_prev * e_prev / d_prev;
        }
        if d == 0.0 {
            d = -f64::EPSILON * (a.diag[k].abs() + lambda.abs() * b.diag[k].abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
        if k + 1 < a.len() {
            e_prev = a.off[k] - lambda * b.off[k];
        }
        d_prev = d;
    }
    count
}

/// Smallest eigenvalue of the pencil `A w = lambda B w` with `B` positive
/// definite, by bisection on the inertia count.
pub fn smallest_generalized_eigenvalue(a: &SymTridiagonal, b: &SymTridiagonal) -> Result<f64, StationaryError> {
    if a.is_empty() || a.len() != b.len() || count_below(b, b, 0.0) != 0 {
        return Err(StationaryError::SingularWeight);
    }
    // any Rayleigh quotient bounds the minimum from above
    let mut hi = a.diag[0] / b.diag[0];
    let mut lo = -hi.abs().max(1.0);
    let mut guard = 0;
    while count_below(a, b, lo) > 0 {
        lo *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(StationaryError::SingularWeight);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(a, b, mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest value of `J[W]` over `W` of unit weight; positive means the
/// profile is statically stable.
pub fn stability_min_eigen(profile: &StationaryProfile) -> Result<f64, StationaryError> {
    let f = stability_forms(profile);
    smallest_generalized_eigenvalue(&f.j_form, &f.weight)
}

#[cfg(test)]
mod tests {
    use super::super::shoot;
    use super::super::test_params::*;
    use super::*;
    use crate::model::ModelParams;
    use nalgebra::DMatrix;

    fn dense(m: &SymTridiagonal) -> DMatrix<f64> {
        let n = m.len();
        let mut d = DMatrix::zeros(n, n);
        for k in 0..n {
            d[(k, k)] = m.diag[k];
            if k + 1 < n {
                d[(k, k + 1)] = m.off[k];
                d[(k + 1, k)] = m.off[k];
            }
        }
        d
    }

    /// Dense reference: Cholesky reduction to a standard symmetric problem.
    fn dense_min(f: &StabilityForms) -> f64 {
        let a = dense(&f.j_form);
        let l = dense(&f.weight).cholesky().expect("weight is SPD").l();
        let linv = l.clone().try_inverse().unwrap();
        let c = &linv * a * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        c.symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn matches_dense_solver() {
        for p in [benchmark(), ModelParams { gamma: 4.0 / 3.0, ..benchmark() }, weightless()] {
            let prof = shoot(&p, 120, 1e-13).unwrap();
            let f = stability_forms(&prof);
            let fast = smallest_generalized_eigenvalue(&f.j_form, &f.weight).unwrap();
            let slow = dense_min(&f);
            assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1e-3), "{fast} vs {slow}");
        }
    }

    #[test]
    fn benchmark_is_stable() {
        let lam = stability_min_eigen(&shoot(&benchmark(), 400, 1e-13).unwrap()).unwrap();
        assert!(lam > 0.0, "{lam}");
    }

    #[test]
    fn weight_form_is_positive() {
        let prof = shoot(&benchmark(), 64, 1e-12).unwrap();
        let f = stability_forms(&prof);
        let w: Vec<f64> = (1..=64).map(|j| (j as f64 * 0.37).sin()).collect();
        assert!(f.weight.quadratic(&w) > 0.0);
    }

    #[test]
    fn count_matches_diagonal_spectrum() {
        let a = SymTridiagonal { diag: vec![3.0, -1.0, 2.0], off: vec![0.0, 0.0] };
        let b = SymTridiagonal { diag: vec![1.0, 1.0, 2.0], off: vec![0.0, 0.0] };
        assert_eq!(count_below(&a, &b, 0.0), 1);
        assert_eq!(count_below(&a, &b, 1.5), 2);
        let m = smallest_generalized_eigenvalue(&a, &b).unwrap();
        assert!((m + 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn rayleigh_quotient_bounded_by_minimum(w in proptest::collection::vec(-1.0f64..1.0, 64)) {
            let prof = shoot(&benchmark(), 64, 1e-12).unwrap();
            let f = stability_forms(&prof);
            let lam = smallest_generalized_eigenvalue(&f.j_form, &f.weight).unwrap();
            let (j, b) = (f.j_form.quadratic(&w), f.weight.quadratic(&w));
            proptest::prop_assert!(j >= lam * b - 1e-9 * j.abs().max(b));
        }

        // The symmetric difference removes the first variation, which
        // vanishes at the critical point only up to discretisation error.
        #[test]
        fn energy_rises_by_at_least_the_weighted_norm(c in proptest::collection::vec(-1.0f64..1.0, 3)) {
            use crate::quadrature::gauss5;
            use crate::stationary::potential_energy;
            proptest::prop_assume!(c.iter().any(|v| v.abs() > 0.1));
            let p = benchmark();
            let prof = shoot(&p, 400, 1e-12).unwrap();
            let f = stability_forms(&prof);
            let lam = smallest_generalized_eigenvalue(&f.j_form, &f.weight).unwrap();
            let k = std::f64::consts::PI / (2.0 * p.mass);
            let w = |x: f64| c.iter().enumerate().map(|(m, a)| a * ((2 * m + 1) as f64 * k * x).sin()).sum::<f64>();
            let wx = |x: f64| {
                c.iter().enumerate().map(|(m, a)| a * (2 * m + 1) as f64 * k * ((2 * m + 1) as f64 * k * x).cos()).sum::<f64>()
            };
            let norm: f64 = (0..400)
                .map(|i| {
                    let (a, b) = (i as f64 / 400.0, (i + 1) as f64 / 400.0);
                    gauss5(a, b, |x| wx(x).powi(2) + (w(x) / x).powi(2))
                })
                .sum();
            let eps = 1e-3;
            let shifted = |s: f64| -> f64 {
                let v: Vec<f64> = prof.volume.iter().enumerate().map(|(j, v)| v + s * w(prof.x(j))).collect();
                potential_energy(&p, &v).unwrap().total()
            };
            let base = potential_energy(&p, &prof.volume).unwrap().total();
            let rise = 0.5 * (shifted(eps) + shifted(-eps)) - base;
            proptest::prop_assert!(rise >= 0.5 * lam * eps * eps * norm, "{} {}", rise, 0.5 * lam * eps * eps * norm);
        }
    }
}
