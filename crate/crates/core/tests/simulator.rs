use std::f64::consts::PI;

use pmsg_fault::analysis::{mean_phase_angle, thd};
use pmsg_fault::converter::{FaultSpec, Phase};
use pmsg_fault::frames::{abc_to_dq, dq_to_abc, Abc, Dq};
use pmsg_fault::ode::rk4_step;
use pmsg_fault::pmsm::{MachineParams, MachineState, Pmsm};
use pmsg_fault::presets;
use pmsg_fault::simulator::{ControlStage, Features, LoadMode};
use pmsg_fault::trace::{Flags, TraceRecord};
use pmsg_fault::{run, SimConfig, SimError};

fn mean(records: &[TraceRecord], f: impl Fn(&TraceRecord) -> f64) -> f64 {
    records.iter().map(f).sum::<f64>() / records.len() as f64
}

fn band(records: &[TraceRecord], f: impl Fn(&TraceRecord) -> f64) -> f64 {
    let (lo, hi) = records.iter().map(f).fold((f64::MAX, f64::MIN), |(l, h), x| (l.min(x), h.max(x)));
    hi - lo
}

#[test]
fn healthy_loop_tracks_reference() {
    let mut cfg = SimConfig::laboratory(52.36);
    cfg.i_dq_ref = Dq::new(0.0, -10.0);
    cfg.t_end = 0.1;
    let trace = run(&cfg).unwrap();
    // last fundamental period
    let period = 2.0 * PI / (3.0 * 52.36);
    let w = trace.window(0.1 - period, 0.1);
    let (d, q) = (mean(w, |r| r.i_dq.d), mean(w, |r| r.i_dq.q));
    assert!((q + 10.0).abs() < 0.05 && d.abs() < 0.05, "d={d} q={q}");
}

#[test]
fn kirchhoff_holds_every_step() {
    for stage in ControlStage::ALL {
        let mut cfg = presets::fault_stage(stage);
        cfg.t_end = 0.05;
        cfg.decimate = 1;
        let trace = run(&cfg).unwrap();
        let peak = trace.records.iter().map(|r| r.i_abc.max_abs()).fold(0.0, f64::max);
        for r in &trace.records {
            assert!(r.i_abc.sum().abs() <= 1e-9 * peak.max(1.0));
            assert!(r.u_abc.sum().abs() <= 1e-9 * 565.0);
        }
    }
}

#[test]
fn identical_configs_give_identical_traces() {
    let mut cfg = presets::fault_stage(ControlStage::Injection);
    cfg.t_end = 0.05;
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a, b);
    cfg.phi_0 += 1e-9;
    assert_ne!(run(&cfg).unwrap().fingerprint(), a.fingerprint());
}

#[test]
fn halving_the_step_keeps_the_result() {
    let mut cfg = presets::healthy();
    cfg.t_end = 0.01;
    cfg.decimate = 1;
    let coarse = run(&cfg).unwrap();
    cfg.step = 0.5e-6;
    cfg.decimate = 2;
    let fine = run(&cfg).unwrap();
    assert_eq!(coarse.len(), fine.len());
    // compare the last recorded samples and the final switching pattern
    let (a, b) = (coarse.records.last().unwrap(), fine.records.last().unwrap());
    assert!((a.i_abc - b.i_abc).max_abs() < 1e-4, "{:?} vs {:?}", a.i_abc, b.i_abc);
    let worst = coarse.records.iter().zip(&fine.records).map(|(a, b)| (a.i_abc - b.i_abc).max_abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

/// Integrates the machine in rotor coordinates, independently of the abc
/// model, for a smooth voltage given in rotor coordinates.
fn dq_model(p: &MachineParams, omega_m: f64, u: impl Fn(f64) -> Dq, t_end: f64, h: f64) -> Vec<Dq> {
    let l = p.stator_inductance();
    let w = f64::from(p.pole_pairs) * omega_m;
    let mut x = [0.0, 0.0];
    let mut out = vec![Dq::default()];
    let n = (t_end / h).round() as usize;
    for k in 0..n {
        x = rk4_step(k as f64 * h, &x, h, |t, x| {
            let u = u(t);
            [(u.d - p.r_s * x[0] + w * l * x[1]) / l, (u.q - p.r_s * x[1] - w * l * x[0] - w * p.psi_pm) / l]
        });
        out.push(Dq::new(x[0], x[1]));
    }
    out
}

#[test]
fn abc_model_matches_rotor_frame_model() {
    let p = MachineParams::laboratory();
    let m = Pmsm::new(p).unwrap();
    let omega = presets::OMEGA_M;
    let u_dq = |t: f64| Dq::new(-40.0 + 30.0 * (200.0 * t).sin(), 120.0 + 10.0 * (90.0 * t).cos());
    let h = 1e-6;
    let reference = dq_model(&p, omega, u_dq, 0.01, h);
    let mut st = MachineState { i: Abc::default(), omega_m: omega, phi_m: 0.0 };
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let t = k as f64 * h;
        let x = [st.i.a, st.i.b, st.i.c, st.phi_m];
        let next = rk4_step(t, &x, h, |t, x| {
            let s = MachineState { i: Abc::new(x[0], x[1], x[2]), omega_m: omega, phi_m: x[3] };
            let u = dq_to_abc(u_dq(t), m.electrical_angle(x[3]));
            let di = m.electrical_derivative(&s, u);
            [di.a, di.b, di.c, omega]
        });
        st = MachineState { i: Abc::new(next[0], next[1], next[2]), omega_m: omega, phi_m: next[3] };
        let dq = abc_to_dq(st.i, m.electrical_angle(st.phi_m));
        worst = worst.max((dq - reference[k + 1]).norm());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn open_upper_switch_removes_positive_half_wave() {
    let trace = run(&presets::fault_stage(ControlStage::Standard)).unwrap();
    let w = trace.window(0.3, 0.5);
    let hi = w.iter().map(|r| r.i_abc.a).fold(f64::MIN, f64::max);
    let lo = w.iter().map(|r| r.i_abc.a).fold(f64::MAX, f64::min);
    assert!(lo < -15.0 && hi < 0.15 * lo.abs(), "i_a in [{lo}, {hi}]");
    assert!(band(w, |r| r.i_dq.q) > 10.0);
}

#[test]
fn open_lower_switch_removes_negative_half_wave() {
    let mut cfg = presets::fault_stage(ControlStage::Standard);
    cfg.fault = FaultSpec::Lower(Phase::B);
    let trace = run(&cfg).unwrap();
    let w = trace.window(0.3, 0.5);
    let hi = w.iter().map(|r| r.i_abc.b).fold(f64::MIN, f64::max);
    let lo = w.iter().map(|r| r.i_abc.b).fold(f64::MAX, f64::min);
    assert!(hi > 15.0 && lo > -0.15 * hi, "i_b in [{lo}, {hi}]");
}

#[test]
fn fault_tolerant_control_helps_for_lower_faults() {
    let f = presets::fundamental_frequency(&presets::operating_point());
    let thd_b = |features: Features| {
        let mut cfg = presets::operating_point();
        cfg.fault = FaultSpec::Lower(Phase::B);
        cfg.features = features;
        cfg.decimate = 10;
        let trace = run(&cfg).unwrap();
        let x: Vec<f64> = trace.window(0.3, 0.5).iter().map(|r| r.i_abc.b).collect();
        thd(&x, trace.dt, f, 50).unwrap()
    };
    let standard = thd_b(Features::default());
    let full = thd_b(Features::all());
    assert!(full < 0.5 * standard, "{full} vs {standard}");
}

#[test]
fn flat_top_never_uses_the_excluded_zero_vector() {
    let mut cfg = presets::fault_stage(ControlStage::FlatTop);
    cfg.decimate = 1;
    let trace = run(&cfg).unwrap();
    assert!(trace.records.iter().all(|r| r.switches.bits() != 0b111));
    cfg.fault = FaultSpec::Lower(Phase::A);
    cfg.t_end = 0.1;
    let trace = run(&cfg).unwrap();
    assert!(trace.records.iter().all(|r| r.switches.bits() != 0b000));
}

#[test]
fn injection_reaches_target_phase_shift() {
    let trace = run(&presets::fault_stage(ControlStage::Injection)).unwrap();
    let w = trace.window(0.3, 0.5);
    let phi = mean_phase_angle(w).unwrap().to_degrees();
    assert!((phi - 197.0).abs() < 5.0, "{phi}");
    assert!(w.iter().all(|r| !r.flags.has(Flags::INJECTION_CLAMPED)));
    assert!((mean(w, |r| r.i_dq_ref.d) + 10.68).abs() < 0.05);
}

#[test]
fn e3_sequence_improves_interval_by_interval() {
    let cfg = presets::e3();
    let f = presets::fundamental_frequency(&cfg);
    let trace = run(&cfg).unwrap();
    let mut thds = Vec::new();
    let mut bands = Vec::new();
    for k in 1..=5 {
        let t1 = k as f64 * presets::E3_INTERVAL;
        let w = trace.window(t1 - 0.2, t1);
        let x: Vec<f64> = w.iter().map(|r| r.i_abc.a).collect();
        thds.push(thd(&x, trace.dt, f, 50).unwrap());
        bands.push(band(w, |r| r.i_dq.q));
    }
    assert!(thds[0] < 0.05, "{thds:?}");
    for k in 1..4 {
        assert!(thds[k + 1] <= thds[k], "{thds:?}");
        assert!(bands[k + 1] < bands[k], "{bands:?}");
    }
    // feature flags follow the timeline
    let at = |t: f64| trace.window(t, t + 1e-4)[0].flags;
    assert!(!at(0.29).has(Flags::FAULT_ACTIVE) && at(0.31).has(Flags::FAULT_ACTIVE));
}

#[test]
fn speed_loop_oscillates_under_fault() {
    let cfg = presets::e3_speed_loop();
    let trace = run(&cfg).unwrap();
    let healthy = band(trace.window(0.1, 0.3), |r| r.omega_m);
    let faulty = band(trace.window(0.4, 0.6), |r| r.omega_m);
    let repaired = band(trace.window(1.3, 1.5), |r| r.omega_m);
    assert!(healthy < 0.5, "{healthy}");
    assert!(faulty > 4.0, "{faulty}");
    assert!(repaired < 0.25 * faulty, "{repaired}");
    // load torque follows the speed controller, not the machine torque
    let w = trace.window(1.3, 1.5);
    assert!((mean(w, |r| r.m_load) + mean(w, |r| r.m_m)).abs() < 1.0);
    assert!(matches!(cfg.load, LoadMode::SpeedPi { .. }));
}

#[test]
fn constant_speed_holds_shaft() {
    let mut cfg = presets::fault_stage(ControlStage::Standard);
    cfg.t_end = 0.02;
    let trace = run(&cfg).unwrap();
    for r in &trace.records {
        assert_eq!(r.omega_m, presets::OMEGA_M);
        assert_eq!(r.m_load, -r.m_m);
    }
}

#[test]
fn non_finite_state_aborts_with_time() {
    let mut cfg = presets::healthy();
    cfg.initial.i = Abc::new(f64::INFINITY, 0.0, 0.0);
    cfg.t_end = 0.001;
    match run(&cfg) {
        Err(SimError::NonFinite { last_good, .. }) => assert_eq!(last_good, 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn header_only_for_zero_duration() {
    let mut cfg = presets::healthy();
    cfg.t_end = 0.0;
    let trace = run(&cfg).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("t[s],i_a[A],i_b[A],i_c[A],i_d[A],i_q[A]"));
}
