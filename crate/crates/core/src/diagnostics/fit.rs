//! Least-squares fits of exponential decay.

use super::DiagnosticsError;
use serde::Serialize;

const MIN_SAMPLES: usize = 10;

/// `ln y ~ intercept - rate * t` over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub t_start: f64,
    pub t_end: f64,
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits `ln y = c - a t` to the samples with `t` in `[t_start, t_end]`.
/// Needs at least 10 samples, all strictly positive.
pub fn decay_rate_fit(t: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Result<DecayFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> =
        t.iter().zip(y).filter(|(t, _)| (t_start..=t_end).contains(*t)).map(|(&t, &y)| (t, y)).collect();
    if pts.len() < MIN_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples(pts.len()));
    }
    if let Some(&(t, y)) = pts.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(DiagnosticsError::NonPositiveSample { t, y });
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut stl) = (0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - tm) * (t - tm);
        stl += (t - tm) * (y.ln() - lm);
    }
    let slope = stl / stt;
    let intercept = lm - slope * tm;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(t, y) in &pts {
        let l = y.ln();
        ss_res += (l - intercept - slope * t).powi(2);
        ss_tot += (l - lm).powi(2);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { t_start, t_end, rate: -slope, intercept, r_squared, samples: pts.len() })
}

/// Smallest `C` with `d(t) <= d(0) e^(C t)` at every sample.
pub fn gronwall_constant(t: &[f64], d: &[f64]) -> Option<f64> {
    let d0 = *d.first()?;
    let t0 = *t.first()?;
    if !(d0 > 0.0) {
        return None;
    }
    t.iter()
        .zip(d)
        .skip(1)
        .filter(|(t, _)| **t > t0)
        .map(|(t, d)| (d / d0).ln() / (t - t0))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let f = decay_rate_fit(&t, &y, 0.0, 2.0).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_restricts_samples() {
        let t: Vec<f64> = (0..40).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| if t < 20.0 { 1.0 } else { (-(t - 20.0)).exp() }).collect();
        let f = decay_rate_fit(&t, &y, 20.0, 39.0).unwrap();
        assert_eq!(f.samples, 20);
        assert!((f.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_nonpositive() {
        let t: Vec<f64> = (0..9).map(|k| k as f64).collect();
        let y = vec![1.0; 9];
        assert_eq!(decay_rate_fit(&t, &y, 0.0, 10.0), Err(DiagnosticsError::TooFewSamples(9)));
        let t: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let mut y = vec![1.0; 12];
        y[4] = 0.0;
        assert!(matches!(decay_rate_fit(&t, &y, 0.0, 20.0), Err(DiagnosticsError::NonPositiveSample { .. })));
    }

    #[test]
    fn noisy_decay_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| (-0.4 * t + 0.01 * rng.gen_range(-1.0..1.0)).exp()).collect();
        let f = decay_rate_fit(&t, &y, 0.0, 10.0).unwrap();
        assert!((f.rate - 0.4).abs() < 2e-3, "{}", f.rate);
        assert!(f.r_squared > 0.999);
    }

    #[test]
    fn gronwall_bound_holds() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let d = [1.0, 2.0, 3.0, 2.0];
        let c = gronwall_constant(&t, &d).unwrap();
        assert!((c - 2f64.ln()).abs() < 1e-15);
        for (t, d) in t.iter().zip(d) {
            assert!(d <= (c * t).exp() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn recovers_any_rate(rate in -2.0f64..5.0, c in -3.0f64..3.0, m in 10usize..60) {
            let t: Vec<f64> = (0..m).map(|k| 0.3 * k as f64).collect();
            let y: Vec<f64> = t.iter().map(|t| (c - rate * t).exp()).collect();
            let f = decay_rate_fit(&t, &y, 0.0, 1e9).unwrap();
            prop_assert!((f.rate - rate).abs() < 1e-9 * (1.0 + rate.abs()));
            prop_assert!((f.intercept - c).abs() < 1e-8);
        }
    }
}
