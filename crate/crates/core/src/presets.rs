//! Ready-made configurations at the default operating point.
//!
//! The operating point (shaft speed and current reference) is a choice of
//! this crate: 25 Hz electrical (ω_m = 50π/3 rad/s, so one fundamental
//! period is exactly 40 000 steps of 1 µs) and i_q* = −20 A, i_d* = 0.

use std::f64::consts::PI;

use crate::converter::{FaultSpec, Phase};
use crate::frames::Dq;
use crate::simulator::{e3_sequence, ControlStage, Features, LoadMode, SimConfig};

/// Default mechanical speed in rad/s.
pub const OMEGA_M: f64 = 50.0 * PI / 3.0;
/// Default q-current reference in A.
pub const I_Q_REF: f64 = -20.0;
/// Default injection angle in degrees.
pub const PHI_0_DEG: f64 = 197.0;
/// Length of each interval of the event sequence in s.
pub const E3_INTERVAL: f64 = 0.3;

/// Electrical fundamental frequency of a configuration in Hz.
pub fn fundamental_frequency(cfg: &SimConfig) -> f64 {
    f64::from(cfg.machine.pole_pairs) * cfg.initial.omega_m / (2.0 * PI)
}

/// Faulty switch S1 from t = 0, all fault-tolerant features off, 0.5 s,
/// traced every 10 µs.
pub fn operating_point() -> SimConfig {
    let mut cfg = SimConfig::laboratory(OMEGA_M);
    cfg.i_dq_ref = Dq::new(0.0, I_Q_REF);
    cfg.phi_0 = PHI_0_DEG.to_radians();
    cfg.fault = FaultSpec::Upper(Phase::A);
    cfg.fault_on = 0.0;
    cfg.t_end = 0.5;
    cfg.decimate = 10;
    cfg
}

/// One of the four control variants under the S1 fault.
pub fn fault_stage(stage: ControlStage) -> SimConfig {
    let mut cfg = operating_point();
    cfg.features = stage.features();
    cfg
}

/// Healthy converter at the default operating point.
pub fn healthy() -> SimConfig {
    let mut cfg = operating_point();
    cfg.fault = FaultSpec::None;
    cfg.t_end = 0.3;
    cfg
}

/// Base for the injection-angle sweep: long enough for a ten-period
/// steady-state window after discarding 60 % of the run.
pub fn sweep_base() -> SimConfig {
    let mut cfg = operating_point();
    cfg.features = Features::all();
    cfg.t_end = 1.0;
    cfg
}

/// Five-interval event sequence on a stiff shaft.
pub fn e3() -> SimConfig {
    e3_sequence(&operating_point(), FaultSpec::Upper(Phase::A), E3_INTERVAL)
}

/// Event sequence with a speed-controlled drive that lets the shaft
/// speed react to the torque ripple.
pub fn e3_speed_loop() -> SimConfig {
    let mut cfg = e3();
    // start balanced against the reference torque 1.5 n_p ψ i_q*
    let m_init = -1.5 * f64::from(cfg.machine.pole_pairs) * cfg.machine.psi_pm * cfg.i_dq_ref.q;
    cfg.load = LoadMode::SpeedPi { omega_ref: OMEGA_M, kp: 1.0, ki: 10.0, m_max: 100.0, m_init };
    cfg
}
