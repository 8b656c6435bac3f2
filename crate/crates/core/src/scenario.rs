//! TOML scenario files.
//!
//! Every physical quantity carries its unit in the key name. Unknown keys
//! are rejected. Missing controller gains default to magnitude-optimum
//! tuning of the configured machine.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::converter::{FaultSpec, DEFAULT_CURRENT_DEADBAND};
use crate::error::ConfigError;
use crate::frames::{Abc, Dq};
use crate::pmsm::{MachineParams, MachineState};
use crate::simulator::{Feature, Features, LoadMode, PiGains, SimConfig, TimelineEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub simulation: SimulationSection,
    pub machine: MachineSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub fault: FaultSection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timeline: Vec<TimelineEntry>,
    pub load: LoadSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_step")]
    pub step_seconds: f64,
    pub t_end_seconds: f64,
    #[serde(default = "default_step")]
    pub gate_resolution_seconds: f64,
    pub u_dc_volts: f64,
    pub f_sw_hertz: f64,
    #[serde(default = "default_deadband")]
    pub current_deadband_amperes: f64,
}

fn default_step() -> f64 {
    1e-6
}

fn default_deadband() -> f64 {
    DEFAULT_CURRENT_DEADBAND
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSection {
    pub r_s_ohms: f64,
    pub l_s_henries: f64,
    /// Share of `l_s` that is leakage.
    #[serde(default = "default_leakage")]
    pub leakage_fraction: f64,
    pub psi_pm_volt_seconds: f64,
    pub pole_pairs: u32,
    #[serde(default)]
    pub phi_pm_radians: f64,
    pub inertia_kg_m2: f64,
}

fn default_leakage() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp_d_volts_per_ampere: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp_q_volts_per_ampere: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki_d_volts_per_ampere_second: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki_q_volts_per_ampere_second: Option<f64>,
    #[serde(default = "default_i_aw")]
    pub i_aw_hat_amperes: f64,
    #[serde(default = "default_phi_0")]
    pub phi_0_degrees: f64,
    #[serde(default)]
    pub full_injection_formula: bool,
    #[serde(default)]
    pub i_d_ref_amperes: f64,
    pub i_q_ref_amperes: f64,
}

fn default_i_aw() -> f64 {
    -1.0
}

fn default_phi_0() -> f64 {
    197.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    /// `none`, `S1`..`S3` (upper) or `S1'`..`S3'` (lower switch of phase a..c).
    pub switch: String,
    #[serde(default)]
    pub t_on_seconds: f64,
}

impl Default for FaultSection {
    fn default() -> Self {
        Self { switch: "none".into(), t_on_seconds: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    #[serde(default)]
    pub extended_anti_windup: bool,
    #[serde(default)]
    pub flat_top: bool,
    #[serde(default)]
    pub injection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureName {
    ExtendedAntiWindup,
    FlatTop,
    Injection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineEntry {
    pub t_seconds: f64,
    pub feature: FeatureName,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSection {
    ConstantSpeed {
        omega_rad_per_second: f64,
    },
    SpeedPi {
        omega_ref_rad_per_second: f64,
        kp_newton_meter_seconds: f64,
        ki_newton_meters: f64,
        m_max_newton_meters: f64,
        #[serde(default)]
        m_init_newton_meters: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub i_a_amperes: f64,
    #[serde(default)]
    pub i_b_amperes: f64,
    #[serde(default)]
    pub i_c_amperes: f64,
    /// Defaults to the load speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_rad_per_second: Option<f64>,
    #[serde(default)]
    pub phi_m_radians: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_decimate")]
    pub decimate: usize,
    /// Plot panels written by `run`: any of `dq`, `abc`, `speed`.
    #[serde(default)]
    pub plots: Vec<String>,
}

fn default_decimate() -> usize {
    1
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { decimate: 1, plots: Vec::new() }
    }
}

impl From<FeatureName> for Feature {
    fn from(f: FeatureName) -> Self {
        match f {
            FeatureName::ExtendedAntiWindup => Feature::ExtendedAntiWindup,
            FeatureName::FlatTop => Feature::FlatTop,
            FeatureName::Injection => Feature::Injection,
        }
    }
}

impl From<Feature> for FeatureName {
    fn from(f: Feature) -> Self {
        match f {
            Feature::ExtendedAntiWindup => FeatureName::ExtendedAntiWindup,
            Feature::FlatTop => FeatureName::FlatTop,
            Feature::Injection => FeatureName::Injection,
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Builds and validates the simulation configuration.
    pub fn to_config(&self) -> Result<SimConfig, ConfigError> {
        let m = &self.machine;
        let l_leak = m.leakage_fraction * m.l_s_henries;
        let machine = MachineParams {
            r_s: m.r_s_ohms,
            l_main: (m.l_s_henries - l_leak) * (2.0 / 3.0),
            l_leak,
            psi_pm: m.psi_pm_volt_seconds,
            pole_pairs: m.pole_pairs,
            phi_pm: m.phi_pm_radians,
            inertia: m.inertia_kg_m2,
        };
        let s = &self.simulation;
        let c = &self.controller;
        let tuned = ControllerConfig::magnitude_optimum(&machine, s.f_sw_hertz);
        let fault = FaultSpec::from_label(&self.fault.switch)
            .ok_or_else(|| ConfigError::Simulation(format!("unknown switch label {:?}", self.fault.switch)))?;
        let load = match self.load {
            LoadSection::ConstantSpeed { omega_rad_per_second } => LoadMode::ConstantSpeed { omega: omega_rad_per_second },
            LoadSection::SpeedPi {
                omega_ref_rad_per_second,
                kp_newton_meter_seconds,
                ki_newton_meters,
                m_max_newton_meters,
                m_init_newton_meters,
            } => LoadMode::SpeedPi {
                omega_ref: omega_ref_rad_per_second,
                kp: kp_newton_meter_seconds,
                ki: ki_newton_meters,
                m_max: m_max_newton_meters,
                m_init: m_init_newton_meters,
            },
        };
        let load_speed = match load {
            LoadMode::ConstantSpeed { omega } => omega,
            LoadMode::SpeedPi { omega_ref, .. } => omega_ref,
        };
        let init = &self.initial;
        let cfg = SimConfig {
            step: s.step_seconds,
            t_end: s.t_end_seconds,
            gate_resolution: s.gate_resolution_seconds,
            u_dc: s.u_dc_volts,
            f_sw: s.f_sw_hertz,
            current_deadband: s.current_deadband_amperes,
            machine,
            gains: PiGains {
                kp_d: c.kp_d_volts_per_ampere.unwrap_or(tuned.kp_d),
                kp_q: c.kp_q_volts_per_ampere.unwrap_or(tuned.kp_q),
                ki_d: c.ki_d_volts_per_ampere_second.unwrap_or(tuned.ki_d),
                ki_q: c.ki_q_volts_per_ampere_second.unwrap_or(tuned.ki_q),
            },
            i_aw_hat: c.i_aw_hat_amperes,
            phi_0: c.phi_0_degrees.to_radians(),
            full_injection_formula: c.full_injection_formula,
            i_dq_ref: Dq::new(c.i_d_ref_amperes, c.i_q_ref_amperes),
            fault,
            fault_on: self.fault.t_on_seconds,
            features: Features {
                extended_anti_windup: self.features.extended_anti_windup,
                flat_top: self.features.flat_top,
                injection: self.features.injection,
            },
            timeline: self
                .timeline
                .iter()
                .map(|e| TimelineEvent { t: e.t_seconds, feature: e.feature.into(), enabled: e.enabled })
                .collect(),
            load,
            initial: MachineState {
                i: Abc::new(init.i_a_amperes, init.i_b_amperes, init.i_c_amperes),
                omega_m: init.omega_m_rad_per_second.unwrap_or(load_speed),
                phi_m: init.phi_m_radians,
            },
            decimate: self.output.decimate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scenario describing `cfg` with explicit gains.
    pub fn from_config(cfg: &SimConfig) -> Self {
        let l_s = cfg.machine.stator_inductance();
        let load = match cfg.load {
            LoadMode::ConstantSpeed { omega } => LoadSection::ConstantSpeed { omega_rad_per_second: omega },
            LoadMode::SpeedPi { omega_ref, kp, ki, m_max, m_init } => LoadSection::SpeedPi {
                omega_ref_rad_per_second: omega_ref,
                kp_newton_meter_seconds: kp,
                ki_newton_meters: ki,
                m_max_newton_meters: m_max,
                m_init_newton_meters: m_init,
            },
        };
        Self {
            simulation: SimulationSection {
                step_seconds: cfg.step,
                t_end_seconds: cfg.t_end,
                gate_resolution_seconds: cfg.gate_resolution,
                u_dc_volts: cfg.u_dc,
                f_sw_hertz: cfg.f_sw,
                current_deadband_amperes: cfg.current_deadband,
            },
            machine: MachineSection {
                r_s_ohms: cfg.machine.r_s,
                l_s_henries: l_s,
                leakage_fraction: cfg.machine.l_leak / l_s,
                psi_pm_volt_seconds: cfg.machine.psi_pm,
                pole_pairs: cfg.machine.pole_pairs,
                phi_pm_radians: cfg.machine.phi_pm,
                inertia_kg_m2: cfg.machine.inertia,
            },
            controller: ControllerSection {
                kp_d_volts_per_ampere: Some(cfg.gains.kp_d),
                kp_q_volts_per_ampere: Some(cfg.gains.kp_q),
                ki_d_volts_per_ampere_second: Some(cfg.gains.ki_d),
                ki_q_volts_per_ampere_second: Some(cfg.gains.ki_q),
                i_aw_hat_amperes: cfg.i_aw_hat,
                phi_0_degrees: cfg.phi_0.to_degrees(),
                full_injection_formula: cfg.full_injection_formula,
                i_d_ref_amperes: cfg.i_dq_ref.d,
                i_q_ref_amperes: cfg.i_dq_ref.q,
            },
            fault: FaultSection { switch: cfg.fault.label(), t_on_seconds: cfg.fault_on },
            features: FeatureSection {
                extended_anti_windup: cfg.features.extended_anti_windup,
                flat_top: cfg.features.flat_top,
                injection: cfg.features.injection,
            },
            timeline: cfg
                .timeline
                .iter()
                .map(|e| TimelineEntry { t_seconds: e.t, feature: e.feature.into(), enabled: e.enabled })
                .collect(),
            load,
            initial: InitialSection {
                i_a_amperes: cfg.initial.i.a,
                i_b_amperes: cfg.initial.i.b,
                i_c_amperes: cfg.initial.i.c,
                omega_m_rad_per_second: Some(cfg.initial.omega_m),
                phi_m_radians: cfg.initial.phi_m,
            },
            output: OutputSection { decimate: cfg.decimate, plots: Vec::new() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const MINIMAL: &str = r#"
[simulation]
t_end_seconds = 0.01
u_dc_volts = 565.0
f_sw_hertz = 8000.0

[machine]
r_s_ohms = 0.11
l_s_henries = 3.35e-3
psi_pm_volt_seconds = 0.377
pole_pairs = 3
inertia_kg_m2 = 352e-4

[controller]
i_q_ref_amperes = -20.0

[load]
mode = "constant_speed"
omega_rad_per_second = 52.35987755982988
"#;

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = ScenarioFile::parse(MINIMAL).unwrap().to_config().unwrap();
        assert_eq!(cfg.step, 1e-6);
        assert_eq!(cfg.fault, FaultSpec::None);
        assert!((cfg.gains.kp_d - 8.9333).abs() < 1e-4);
        assert!((cfg.gains.ki_q - 293.333).abs() < 1e-3);
        assert!((cfg.machine.stator_inductance() - 3.35e-3).abs() < 1e-15);
        assert_eq!(cfg.initial.omega_m, 52.35987755982988);
        assert_eq!(cfg.i_aw_hat, -1.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("u_dc_volts", "u_dc");
        let err = ScenarioFile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("u_dc"), "{err}");
        let text = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(ScenarioFile::parse(&text).is_err());
        let text = MINIMAL.replace("mode = \"constant_speed\"", "mode = \"constant_speed\"\nkp_newton_meter_seconds = 1.0");
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn parse_error_has_position() {
        let text = MINIMAL.replace("pole_pairs = 3", "pole_pairs = three");
        let err = ScenarioFile::parse(&text).unwrap_err();
        assert!(err.span().is_some());
    }

    #[test]
    fn bad_values_rejected() {
        let text = MINIMAL.replace("f_sw_hertz = 8000.0", "f_sw_hertz = 7000.0");
        assert!(ScenarioFile::parse(&text).unwrap().to_config().is_err());
        let mut f = ScenarioFile::parse(MINIMAL).unwrap();
        f.fault.switch = "S7".into();
        assert!(f.to_config().is_err());
    }

    #[test]
    fn round_trip_presets() {
        for cfg in [presets::operating_point(), presets::e3(), presets::e3_speed_loop(), presets::sweep_base()] {
            let file = ScenarioFile::from_config(&cfg);
            let text = file.to_toml();
            let parsed = ScenarioFile::parse(&text).unwrap();
            assert_eq!(parsed, file);
            let back = parsed.to_config().unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-15 * a.abs().max(b.abs());
            assert!(rel(back.machine.l_main, cfg.machine.l_main) && rel(back.machine.l_leak, cfg.machine.l_leak));
            assert!(rel(back.phi_0, cfg.phi_0));
            let mut fixed = back.clone();
            fixed.machine = cfg.machine;
            fixed.phi_0 = cfg.phi_0;
            assert_eq!(fixed, cfg);
        }
    }
}
