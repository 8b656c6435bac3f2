//! Fixed-step closed-loop simulation.
//!
//! The plant is integrated with RK4 at step `h`. The converter voltage is
//! held over each step and recomputed at every step boundary from the
//! current switch vector, the active fault and the instantaneous sign of the
//! faulty-phase current. The controller runs at every switching-period
//! boundary; its gate schedule is snapped to the gate resolution (1 µs by
//! default) and expanded into per-step switch vectors.

use crate::controller::{
    controller_step, AntiWindup, ControlInputs, ControlOutput, ControllerConfig, ControllerState, Injection,
};
use crate::converter::{faulty_voltage, FaultSpec, SwitchVector, DEFAULT_CURRENT_DEADBAND};
use crate::error::{ConfigError, SimError};
use crate::frames::{abc_to_dq, Abc, AlphaBeta, Dq};
use crate::modulation::{dwell_times, gate_schedule, ModulationMode};
use crate::ode::rk4_step;
use crate::pmsm::{MachineParams, MachineState, Pmsm};
use crate::trace::{Flags, Trace, TraceRecord};

/// Idealised speed-regulating load standing in for the load machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadMode {
    /// Infinitely stiff drive: the shaft turns at `omega` (rad/s).
    ConstantSpeed { omega: f64 },
    /// PI speed controller whose clamped output acts as turbine torque.
    /// The integral part starts at `m_init`.
    SpeedPi { omega_ref: f64, kp: f64, ki: f64, m_max: f64, m_init: f64 },
}

/// Integrator memory of [`LoadMode::SpeedPi`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadState {
    pub integral: f64,
}

/// Load torque for the next step. For `ConstantSpeed` this is the torque
/// that balances the machine torque `m_m`.
pub fn load_torque(load: &LoadMode, st: &mut LoadState, omega_m: f64, m_m: f64, dt: f64) -> f64 {
    match *load {
        LoadMode::ConstantSpeed { .. } => -m_m,
        LoadMode::SpeedPi { omega_ref, kp, ki, m_max, .. } => {
            let e = omega_ref - omega_m;
            let unclamped = kp * e + ki * st.integral;
            let m = unclamped.clamp(-m_max, m_max);
            // conditional integration
            if m == unclamped || (unclamped > m_max && e < 0.0) || (unclamped < -m_max && e > 0.0) {
                st.integral += e * dt;
            }
            m
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    ExtendedAntiWindup,
    FlatTop,
    Injection,
}

/// Fault-tolerant features switched on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Features {
    pub extended_anti_windup: bool,
    pub flat_top: bool,
    pub injection: bool,
}

impl Features {
    pub fn set(&mut self, f: Feature, on: bool) {
        match f {
            Feature::ExtendedAntiWindup => self.extended_anti_windup = on,
            Feature::FlatTop => self.flat_top = on,
            Feature::Injection => self.injection = on,
        }
    }

    pub fn all() -> Self {
        Self { extended_anti_windup: true, flat_top: true, injection: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEvent {
    pub t: f64,
    pub feature: Feature,
    pub enabled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiGains {
    pub kp_d: f64,
    pub kp_q: f64,
    pub ki_d: f64,
    pub ki_q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Integration step (s).
    pub step: f64,
    pub t_end: f64,
    /// Time quantum for gate edges (s); a multiple of `step`.
    pub gate_resolution: f64,
    pub u_dc: f64,
    pub f_sw: f64,
    pub current_deadband: f64,
    pub machine: MachineParams,
    pub gains: PiGains,
    pub i_aw_hat: f64,
    /// Target voltage–current phase shift for d-current injection (rad).
    pub phi_0: f64,
    pub full_injection_formula: bool,
    pub i_dq_ref: Dq,
    /// Faulty switch. Also selects the target of the fault-tolerant
    /// features before the fault becomes active.
    pub fault: FaultSpec,
    pub fault_on: f64,
    pub features: Features,
    pub timeline: Vec<TimelineEvent>,
    pub load: LoadMode,
    pub initial: MachineState,
    /// Keep every n-th step in the trace.
    pub decimate: usize,
}

impl SimConfig {
    /// Number of integration steps per switching period.
    pub fn steps_per_period(&self) -> Result<usize, ConfigError> {
        exact_ratio(1.0 / self.f_sw, self.step, "switching period / step")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Simulation(m.to_string()));
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad("step must be > 0");
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad("end time must be >= 0");
        }
        if !(self.u_dc > 0.0) {
            return bad("dc-link voltage must be > 0");
        }
        if !(self.f_sw > 0.0) {
            return bad("switching frequency must be > 0");
        }
        if self.decimate == 0 {
            return bad("decimation factor must be >= 1");
        }
        if !(self.current_deadband >= 0.0) {
            return bad("current dead-band must be >= 0");
        }
        self.steps_per_period()?;
        exact_ratio(self.gate_resolution, self.step, "gate resolution / step")?;
        exact_ratio(1.0 / self.f_sw, self.gate_resolution, "switching period / gate resolution")?;
        self.machine.validate()?;
        self.controller_config(self.features).validate()?;
        if let LoadMode::SpeedPi { m_max, .. } = self.load {
            if !(m_max >= 0.0) {
                return bad("load torque limit must be >= 0");
            }
        }
        Ok(())
    }

    /// Controller configuration for a feature set.
    pub fn controller_config(&self, features: Features) -> ControllerConfig {
        let target = self.fault;
        let modulation = match (features.flat_top, target) {
            (true, FaultSpec::Lower(_)) => ModulationMode::FlatTopZero111,
            (true, _) => ModulationMode::FlatTopZero000,
            (false, _) => ModulationMode::SymmetricSvm,
        };
        ControllerConfig {
            kp_d: self.gains.kp_d,
            kp_q: self.gains.kp_q,
            ki_d: self.gains.ki_d,
            ki_q: self.gains.ki_q,
            i_aw_hat: self.i_aw_hat,
            anti_windup: if features.extended_anti_windup {
                AntiWindup::Extended(target)
            } else {
                AntiWindup::Standard
            },
            injection: if features.injection { Injection::On { phi_0: self.phi_0 } } else { Injection::Off },
            full_injection_formula: self.full_injection_formula,
            modulation,
            f_sw: self.f_sw,
        }
    }

    /// Laboratory machine and converter with magnitude-optimum gains, no
    /// fault, zero references, shaft held at `omega`.
    pub fn laboratory(omega: f64) -> Self {
        let machine = MachineParams::laboratory();
        let f_sw = 8000.0;
        let c = ControllerConfig::magnitude_optimum(&machine, f_sw);
        Self {
            step: 1e-6,
            t_end: 0.1,
            gate_resolution: 1e-6,
            u_dc: 565.0,
            f_sw,
            current_deadband: DEFAULT_CURRENT_DEADBAND,
            machine,
            gains: PiGains { kp_d: c.kp_d, kp_q: c.kp_q, ki_d: c.ki_d, ki_q: c.ki_q },
            i_aw_hat: -1.0,
            phi_0: 197f64.to_radians(),
            full_injection_formula: false,
            i_dq_ref: Dq::default(),
            fault: FaultSpec::None,
            fault_on: 0.0,
            features: Features::default(),
            timeline: Vec::new(),
            load: LoadMode::ConstantSpeed { omega },
            initial: MachineState { omega_m: omega, ..Default::default() },
            decimate: 1,
        }
    }
}

fn exact_ratio(num: f64, den: f64, what: &str) -> Result<usize, ConfigError> {
    let r = num / den;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > 1e-6 * n {
        return Err(ConfigError::Simulation(format!("{what} must be a positive integer, got {r}")));
    }
    Ok(n as usize)
}

/// Runs the closed loop and returns the (decimated) trace.
pub fn run(cfg: &SimConfig) -> Result<Trace, SimError> {
    cfg.validate()?;
    let machine = Pmsm::new(cfg.machine)?;
    let h = cfg.step;
    let steps = (cfg.t_end / h).round() as usize;
    let spp = cfg.steps_per_period()?;
    let ticks = exact_ratio(1.0 / cfg.f_sw, cfg.gate_resolution, "")?;
    let steps_per_tick = spp / ticks;
    let eps = 1e-9 * h;
    let stiff_speed = match cfg.load {
        LoadMode::ConstantSpeed { omega } => Some(omega),
        LoadMode::SpeedPi { .. } => None,
    };

    let mut timeline = cfg.timeline.clone();
    timeline.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut next_event = 0;

    let mut state = cfg.initial;
    if let Some(w) = stiff_speed {
        state.omega_m = w;
    }
    let mut features = cfg.features;
    let mut ctrl_state = ControllerState::default();
    let mut load_state = match cfg.load {
        LoadMode::SpeedPi { ki, m_init, .. } if ki != 0.0 => LoadState { integral: m_init / ki },
        _ => LoadState::default(),
    };
    let mut pattern = vec![SwitchVector::ZERO_LOW; ticks];
    let mut last_out = ControlOutput {
        u_ref: AlphaBeta::default(),
        mode: ModulationMode::SymmetricSvm,
        i_dq_ref: cfg.i_dq_ref,
        saturated: false,
        aw_frozen: false,
        injection_clamped: false,
    };

    let mut trace = Trace { dt: h * cfg.decimate as f64, records: Vec::with_capacity(steps / cfg.decimate + 1) };

    for k in 0..steps {
        let t = k as f64 * h;
        while next_event < timeline.len() && timeline[next_event].t <= t + eps {
            let ev = timeline[next_event];
            features.set(ev.feature, ev.enabled);
            next_event += 1;
        }
        let fault_active = cfg.fault != FaultSpec::None && t + eps >= cfg.fault_on;
        let phi_k = machine.electrical_angle(state.phi_m);

        if k % spp == 0 {
            let ccfg = cfg.controller_config(features);
            let inputs = ControlInputs {
                i_dq: abc_to_dq(state.i, phi_k),
                i_dq_ref: cfg.i_dq_ref,
                omega_k: machine.electrical_speed(state.omega_m),
                phi_k,
                omega_m: state.omega_m,
                u_dc: cfg.u_dc,
                i_abc: state.i.to_array(),
            };
            last_out = controller_step(&ccfg, &cfg.machine, &mut ctrl_state, &inputs);
            let dwell = dwell_times(last_out.u_ref, cfg.u_dc, 1.0 / cfg.f_sw)?;
            pattern = gate_schedule(&dwell, last_out.mode).to_ticks(ticks);
        }

        let s = pattern[(k % spp) / steps_per_tick];
        let fault = if fault_active { cfg.fault } else { FaultSpec::None };
        let u = faulty_voltage(cfg.u_dc, s, fault, state.i, cfg.current_deadband);
        let m_m = machine.torque_abc(state.i, state.phi_m);
        let m_load = load_torque(&cfg.load, &mut load_state, state.omega_m, m_m, h);

        if k % cfg.decimate == 0 {
            let mut flags = Flags::default();
            flags.set(Flags::SATURATED, last_out.saturated);
            flags.set(Flags::AW_FROZEN, last_out.aw_frozen);
            flags.set(Flags::FAULT_ACTIVE, fault_active);
            flags.set(Flags::INJECTION_CLAMPED, last_out.injection_clamped);
            trace.records.push(TraceRecord {
                t,
                i_abc: state.i,
                i_dq: abc_to_dq(state.i, phi_k),
                i_dq_ref: last_out.i_dq_ref,
                u_ref: last_out.u_ref,
                u_abc: u,
                switches: s,
                omega_m: state.omega_m,
                phi_m: state.phi_m,
                m_m,
                m_load,
                flags,
            });
        }

        let x = [state.i.a, state.i.b, state.i.c, state.omega_m, state.phi_m];
        let next = rk4_step(t, &x, h, |_, x| {
            let s = MachineState { i: Abc::new(x[0], x[1], x[2]), omega_m: x[3], phi_m: x[4] };
            let di = machine.electrical_derivative(&s, u);
            let (dw, dphi) = machine.mechanical_derivative(&s, m_load);
            let dw = if stiff_speed.is_some() { 0.0 } else { dw };
            [di.a, di.b, di.c, dw, dphi]
        });
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { t: t + h, last_good: t });
        }
        state = MachineState { i: Abc::new(next[0], next[1], next[2]), omega_m: next[3], phi_m: next[4] };
    }
    Ok(trace)
}

/// Stages of the fault-tolerant control, each adding one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlStage {
    Standard,
    ExtendedAntiWindup,
    FlatTop,
    Injection,
}

impl ControlStage {
    pub const ALL: [ControlStage; 4] =
        [ControlStage::Standard, ControlStage::ExtendedAntiWindup, ControlStage::FlatTop, ControlStage::Injection];

    pub fn features(self) -> Features {
        let level = self as u8;
        Features { extended_anti_windup: level >= 1, flat_top: level >= 2, injection: level >= 3 }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlStage::Standard => "standard",
            ControlStage::ExtendedAntiWindup => "+extended anti-windup",
            ControlStage::FlatTop => "+flat-top",
            ControlStage::Injection => "+d-current injection",
        }
    }
}

/// Five-interval event sequence: fault-free, fault, then extended
/// anti-windup, flat-top modulation and d-current injection enabled one after
/// the other, each interval `interval` seconds long.
pub fn e3_sequence(base: &SimConfig, fault: FaultSpec, interval: f64) -> SimConfig {
    let mut cfg = base.clone();
    cfg.fault = fault;
    cfg.fault_on = interval;
    cfg.features = Features::default();
    cfg.timeline = vec![
        TimelineEvent { t: 2.0 * interval, feature: Feature::ExtendedAntiWindup, enabled: true },
        TimelineEvent { t: 3.0 * interval, feature: Feature::FlatTop, enabled: true },
        TimelineEvent { t: 4.0 * interval, feature: Feature::Injection, enabled: true },
    ];
    cfg.t_end = 5.0 * interval;
    cfg
}

/// Runs [`e3_sequence`].
pub fn run_scenario_e3(base: &SimConfig, fault: FaultSpec, interval: f64) -> Result<Trace, SimError> {
    run(&e3_sequence(base, fault, interval))
}
