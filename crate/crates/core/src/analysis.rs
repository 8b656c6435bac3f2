//! Harmonic analysis, power and phase-angle helpers, and the injection-angle
//! sweep.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::frames::{AlphaBeta, Dq};
use crate::simulator::{run, SimConfig};
use crate::trace::Trace;

/// Default number of harmonics included in the distortion sum.
pub const DEFAULT_HARMONICS: usize = 50;

/// Minimum number of fundamental periods for a THD window.
pub const MIN_PERIODS: usize = 5;

/// RMS magnitudes of the first `N` harmonics of a periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    pub f_fund: f64,
    /// `rms[n - 1]` is the rms value of harmonic `n`.
    pub rms: Vec<f64>,
}

impl HarmonicSpectrum {
    pub fn fundamental(&self) -> f64 {
        self.rms[0]
    }

    /// Total harmonic distortion as a fraction of the fundamental.
    pub fn thd(&self) -> f64 {
        let sum: f64 = self.rms[1..].iter().map(|x| x * x).sum();
        sum.sqrt() / self.rms[0]
    }
}

/// Samples per fundamental period, if that is an integer.
fn samples_per_period(dt: f64, f_fund: f64) -> Result<usize, AnalysisError> {
    let spp = 1.0 / (f_fund * dt);
    let n = spp.round();
    if !spp.is_finite() || n < 2.0 || (spp - n).abs() > 1e-6 * n {
        return Err(AnalysisError::NonIntegerPeriod { samples: spp });
    }
    Ok(n as usize)
}

/// Fourier decomposition over a window of whole fundamental periods.
pub fn spectrum(signal: &[f64], dt: f64, f_fund: f64, harmonics: usize) -> Result<HarmonicSpectrum, AnalysisError> {
    let spp = samples_per_period(dt, f_fund)?;
    let periods = signal.len() / spp;
    if !signal.len().is_multiple_of(spp) {
        return Err(AnalysisError::NonIntegerPeriod { samples: signal.len() as f64 / spp as f64 });
    }
    if periods < MIN_PERIODS {
        return Err(AnalysisError::BadWindow { periods, min: MIN_PERIODS });
    }
    let (sin, cos): (Vec<f64>, Vec<f64>) = (0..spp).map(|m| (2.0 * PI * m as f64 / spp as f64).sin_cos()).unzip();
    let scale = 2.0 / signal.len() as f64;
    let rms = (1..=harmonics.max(1))
        .map(|n| {
            let (mut a, mut b) = (0.0, 0.0);
            let mut idx = 0usize;
            let step = n % spp;
            for &x in signal {
                a += x * cos[idx];
                b += x * sin[idx];
                idx += step;
                if idx >= spp {
                    idx -= spp;
                }
            }
            (a * scale).hypot(b * scale) / 2f64.sqrt()
        })
        .collect::<Vec<_>>();
    let peak = signal.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(rms[0] > 1e-9 * peak) {
        return Err(AnalysisError::NoFundamental);
    }
    Ok(HarmonicSpectrum { f_fund, rms })
}

/// THD of `signal` with harmonics `2..=harmonics`.
pub fn thd(signal: &[f64], dt: f64, f_fund: f64, harmonics: usize) -> Result<f64, AnalysisError> {
    Ok(spectrum(signal, dt, f_fund, harmonics)?.thd())
}

/// THD of a trace column over its last `periods` fundamental periods.
pub fn thd_last_periods(
    trace: &Trace,
    signal: impl Fn(&crate::trace::TraceRecord) -> f64,
    f_fund: f64,
    periods: usize,
) -> Result<f64, AnalysisError> {
    let spp = samples_per_period(trace.dt, f_fund)?;
    let n = periods * spp;
    if trace.len() < n {
        return Err(AnalysisError::BadWindow { periods: trace.len() / spp, min: periods });
    }
    let x: Vec<f64> = trace.records[trace.len() - n..].iter().map(signal).collect();
    thd(&x, trace.dt, f_fund, DEFAULT_HARMONICS)
}

/// Fraction of a sweep run discarded as start-up transient.
pub const STEADY_STATE_DISCARD: f64 = 0.6;
/// Minimum retained periods for a steady-state THD.
pub const STEADY_STATE_PERIODS: usize = 10;

/// THD of phase a over the steady-state part of a run: the first 60 % is
/// dropped and the rest is truncated to whole periods (at least ten).
pub fn steady_state_thd(trace: &Trace, f_fund: f64) -> Result<f64, AnalysisError> {
    let spp = samples_per_period(trace.dt, f_fund)?;
    let first = (trace.len() as f64 * STEADY_STATE_DISCARD).ceil() as usize;
    let periods = trace.len().saturating_sub(first) / spp;
    if periods < STEADY_STATE_PERIODS {
        return Err(AnalysisError::BadWindow { periods, min: STEADY_STATE_PERIODS });
    }
    thd_last_periods(trace, |r| r.i_abc.a, f_fund, periods)
}

/// Instantaneous active and reactive power.
pub fn power_pq(u: Dq, i: Dq) -> (f64, f64) {
    // J i = (-i_q, i_d)
    let p = 1.5 * (u.d * i.d + u.q * i.q);
    let q = 1.5 * (-u.d * i.q + u.q * i.d);
    (p, q)
}

/// Angle in `[0, 2π)` by which `u` leads `i`; `None` for a zero vector.
pub fn phase_angle(u: AlphaBeta, i: AlphaBeta) -> Option<f64> {
    if u.norm() == 0.0 || i.norm() == 0.0 {
        return None;
    }
    let a = (u.angle() - i.angle()).rem_euclid(2.0 * PI);
    Some(if a >= 2.0 * PI { 0.0 } else { a })
}

/// Circular mean of [`phase_angle`] between the voltage reference and the
/// stator current over the given records.
pub fn mean_phase_angle(records: &[crate::trace::TraceRecord]) -> Option<f64> {
    let (mut s, mut c) = (0.0, 0.0);
    for r in records {
        if let Some(a) = phase_angle(r.u_ref, crate::frames::clarke(r.i_abc)) {
            s += a.sin();
            c += a.cos();
        }
    }
    if s == 0.0 && c == 0.0 {
        return None;
    }
    Some(s.atan2(c).rem_euclid(2.0 * PI))
}

/// THD as a function of the injection angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `(φ₀ in degrees, THD fraction)` in grid order.
    pub points: Vec<(f64, f64)>,
    pub argmin_deg: f64,
}

impl SweepResult {
    pub fn thd_at(&self, phi_deg: f64) -> Option<f64> {
        self.points.iter().find(|(p, _)| (p - phi_deg).abs() < 1e-9).map(|&(_, t)| t)
    }

    pub fn min_thd(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

/// Inclusive angle grid `start, start + step, ..` up to `end`.
pub fn angle_grid(start: f64, step: f64, end: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Runs `base` once per injection angle (in degrees) with injection enabled
/// and evaluates the steady-state THD of phase a. The runs are independent
/// and executed in parallel; results keep grid order.
pub fn sweep_phi0(base: &SimConfig, grid_deg: &[f64]) -> Result<SweepResult, AnalysisError> {
    let f_fund = f64::from(base.machine.pole_pairs) * base.initial.omega_m / (2.0 * PI);
    let points = grid_deg
        .par_iter()
        .map(|&deg| {
            let mut cfg = base.clone();
            cfg.phi_0 = deg.to_radians();
            cfg.features.injection = true;
            let trace = run(&cfg)?;
            Ok((deg, steady_state_thd(&trace, f_fund)?))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let argmin_deg = points.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0).unwrap_or(f64::NAN);
    Ok(SweepResult { points, argmin_deg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: f64 = 25.0;
    const DT: f64 = 1e-5;

    fn wave(periods: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = periods * 4000;
        (0..n).map(|k| f(2.0 * PI * F * k as f64 * DT)).collect()
    }

    #[test]
    fn pure_sine_has_no_distortion() {
        for (amp, ph) in [(1.0, 0.0), (17.0, 1.1), (0.003, -2.0)] {
            let x = wave(5, |w| amp * (w + ph).sin());
            assert!(thd(&x, DT, F, 50).unwrap() < 1e-6);
        }
    }

    #[test]
    fn third_harmonic_ten_percent() {
        let x = wave(5, |w| w.sin() + 0.1 * (3.0 * w + 0.4).sin());
        assert!((thd(&x, DT, F, 50).unwrap() - 0.1).abs() < 1e-4);
    }

    fn square(w: f64) -> f64 {
        if w.rem_euclid(2.0 * PI) < PI { 1.0 } else { -1.0 }
    }

    #[test]
    fn square_wave_truncated_series() {
        // Odd harmonics with amplitude 1/n relative to the fundamental.
        let truncated: f64 = (3..=50).step_by(2).map(|n| 1.0 / (n * n) as f64).sum::<f64>().sqrt();
        // sample off the discontinuities
        let spp = 20_000;
        let dt = 1.0 / (F * spp as f64);
        let x: Vec<f64> = (0..5 * spp).map(|k| square(2.0 * PI * (k as f64 + 0.5) / spp as f64)).collect();
        let t = thd(&x, dt, F, 50).unwrap();
        assert!((t - truncated).abs() < 1e-3, "{t} vs {truncated}");
        let t = thd(&x, dt, F, 2000).unwrap();
        let limit = (PI * PI / 8.0 - 1.0).sqrt();
        assert!((t - limit).abs() < 5e-3, "{t} vs {limit}");
    }

    #[test]
    fn window_errors() {
        let x = wave(4, f64::sin);
        assert!(matches!(thd(&x, DT, F, 50), Err(AnalysisError::BadWindow { periods: 4, .. })));
        let x = wave(5, f64::sin);
        assert!(matches!(thd(&x[1..], DT, F, 50), Err(AnalysisError::NonIntegerPeriod { .. })));
        assert!(matches!(thd(&x, DT, 33.3, 50), Err(AnalysisError::NonIntegerPeriod { .. })));
        let x = wave(5, |w| (3.0 * w).sin());
        assert!(matches!(thd(&x, DT, F, 50), Err(AnalysisError::NoFundamental)));
        assert!(matches!(thd(&vec![0.0; 20000], DT, F, 50), Err(AnalysisError::NoFundamental)));
    }

    #[test]
    fn parseval_bound() {
        let x = wave(5, |w| 0.2 + w.sin() + 0.3 * square(7.0 * w) + 0.05 * (80.0 * w).cos());
        let s = spectrum(&x, DT, F, 50).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let ac_rms2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        let sum: f64 = s.rms.iter().map(|r| r * r).sum();
        assert!(sum <= ac_rms2 + 1e-9);
    }

    #[test]
    fn power_examples() {
        assert_eq!(power_pq(Dq::new(0.0, 100.0), Dq::new(0.0, 10.0)), (1500.0, 0.0));
        assert_eq!(power_pq(Dq::new(100.0, 0.0), Dq::new(0.0, 10.0)), (0.0, -1500.0));
        // i lags u by φ0
        for deg in [10.0f64, 60.0, 150.0, 197.0, 300.0] {
            let phi = deg.to_radians();
            let i = Dq::new(3.0, -4.0);
            let (s, c) = phi.sin_cos();
            let u = Dq::new(c * i.d - s * i.q, s * i.d + c * i.q);
            let (p, q) = power_pq(u, i);
            if phi.cos().abs() > 1e-3 {
                assert!((q - p * phi.tan()).abs() < 1e-9 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn phase_angle_examples() {
        assert_eq!(phase_angle(AlphaBeta::new(1.0, 0.0), AlphaBeta::new(1.0, 0.0)), Some(0.0));
        assert!((phase_angle(AlphaBeta::new(-1.0, 0.0), AlphaBeta::new(1.0, 0.0)).unwrap() - PI).abs() < 1e-15);
        let i = AlphaBeta::new(0.3, -2.0);
        let phi = 197f64.to_radians();
        let (s, c) = phi.sin_cos();
        let u = AlphaBeta::new(c * i.alpha - s * i.beta, s * i.alpha + c * i.beta);
        assert!((phase_angle(u, i).unwrap() - phi).abs() < 1e-12);
        assert_eq!(phase_angle(AlphaBeta::default(), i), None);
    }

    #[test]
    fn grid_is_inclusive() {
        let g = angle_grid(150.0, 2.0, 210.0);
        assert_eq!((g.len(), g[0], g[30]), (31, 150.0, 210.0));
    }

    proptest! {
        #[test]
        fn thd_scale_invariant(c in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64], h in 0.0..0.5f64) {
            let x = wave(5, |w| w.sin() + h * (5.0 * w).sin() + 0.02 * (11.0 * w).cos());
            let y: Vec<f64> = x.iter().map(|v| c * v).collect();
            let a = thd(&x, DT, F, 50).unwrap();
            let b = thd(&y, DT, F, 50).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
