//! Discrete field-oriented current controller, executed once per switching
//! period.
//!
//! Pipeline: optional d-current injection, PI control with conditional
//! integration, cross-coupling feedforward, transformation to the stationary
//! frame and radial saturation onto the voltage hexagon.

use crate::converter::FaultSpec;
use crate::error::ConfigError;
use crate::frames::{inverse_park, AlphaBeta, Dq};
use crate::modulation::{sector_and_theta, u_max, ModulationMode};
use crate::pmsm::MachineParams;

/// Gains from the magnitude optimum: `k_p = L_s f_sw / 3`, `k_i = R_s f_sw / 3`.
pub fn tune_magnitude_optimum(l_s: f64, r_s: f64, f_sw: f64) -> (f64, f64) {
    (l_s * f_sw / 3.0, r_s * f_sw / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AntiWindup {
    /// Integrate while the reference fits into the hexagon.
    #[default]
    Standard,
    /// Additionally require the faulty phase current to flow in the
    /// direction the faulty leg can still conduct.
    Extended(FaultSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Injection {
    #[default]
    Off,
    /// Inject the d-current that sets the voltage–current phase shift to
    /// `phi_0` (rad).
    On { phi_0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub kp_d: f64,
    pub kp_q: f64,
    pub ki_d: f64,
    pub ki_q: f64,
    /// Anti-windup current threshold (A, negative).
    pub i_aw_hat: f64,
    pub anti_windup: AntiWindup,
    pub injection: Injection,
    /// Use the resistance-aware injection formula instead of the `R_s ≈ 0`
    /// simplification.
    pub full_injection_formula: bool,
    pub modulation: ModulationMode,
    pub f_sw: f64,
}

impl ControllerConfig {
    /// Magnitude-optimum gains for `machine` at `f_sw`, standard control.
    pub fn magnitude_optimum(machine: &MachineParams, f_sw: f64) -> Self {
        let (kp, ki) = tune_magnitude_optimum(machine.stator_inductance(), machine.r_s, f_sw);
        Self {
            kp_d: kp,
            kp_q: kp,
            ki_d: ki,
            ki_q: ki,
            i_aw_hat: -1.0,
            anti_windup: AntiWindup::Standard,
            injection: Injection::Off,
            full_injection_formula: false,
            modulation: ModulationMode::SymmetricSvm,
            f_sw,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let gains = [self.kp_d, self.kp_q, self.ki_d, self.ki_q];
        if gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(ConfigError::Controller("gains must be finite and >= 0".into()));
        }
        if !(self.f_sw > 0.0) {
            return Err(ConfigError::Controller("switching frequency must be > 0".into()));
        }
        if matches!(self.anti_windup, AntiWindup::Extended(_)) && !(self.i_aw_hat < 0.0) {
            return Err(ConfigError::Controller("anti-windup current must be < 0".into()));
        }
        if let Injection::On { phi_0 } = self.injection {
            if !phi_0.is_finite() || phi_0.cos().abs() < 1e-9 {
                return Err(ConfigError::Controller("phase angle must have a finite tangent".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    /// Integrator states (A·s).
    pub xi: Dq,
    /// Saturated stationary reference of the previous period.
    pub last_u_ref: AlphaBeta,
    /// Unsaturated amplitude and hexagon limit of the previous period; the
    /// anti-windup decision is taken on these.
    pub last_u_hat_ref: f64,
    pub last_u_max: f64,
}

/// Quantities sampled at the start of a switching period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInputs {
    pub i_dq: Dq,
    pub i_dq_ref: Dq,
    /// Electrical speed (rad/s).
    pub omega_k: f64,
    /// Electrical angle (rad).
    pub phi_k: f64,
    /// Mechanical speed (rad/s); used by the d-current injection.
    pub omega_m: f64,
    pub u_dc: f64,
    /// Phase currents, for the extended anti-windup decision.
    pub i_abc: [f64; 3],
}

/// One PI step (forward Euler over `dt`). Returns the PI voltage; the
/// integrator is advanced only if `integrate` is set.
pub fn pi_step(cfg: &ControllerConfig, xi: &mut Dq, e: Dq, integrate: bool, dt: f64) -> Dq {
    let u = Dq::new(cfg.kp_d * e.d + cfg.ki_d * xi.d, cfg.kp_q * e.q + cfg.ki_q * xi.q);
    if integrate {
        xi.d += e.d * dt;
        xi.q += e.q * dt;
    }
    u
}

/// Conditional-integration decision.
///
/// `i_abc` holds the phase currents; only the faulty phase is consulted in
/// extended mode. Upper-switch faults integrate while `i_x < î_aw`; for
/// lower-switch faults the mirrored condition `i_x > |î_aw|` is used.
pub fn anti_windup_decide(cfg: &ControllerConfig, u_hat_ref: f64, u_max_now: f64, i_abc: [f64; 3]) -> bool {
    let feasible = u_hat_ref <= u_max_now;
    match cfg.anti_windup {
        AntiWindup::Standard => feasible,
        AntiWindup::Extended(fault) => {
            let conducts = match fault {
                FaultSpec::None => true,
                FaultSpec::Upper(p) => i_abc[p.index()] < cfg.i_aw_hat && cfg.i_aw_hat < 0.0,
                FaultSpec::Lower(p) => i_abc[p.index()] > -cfg.i_aw_hat && cfg.i_aw_hat < 0.0,
            };
            feasible && conducts
        }
    }
}

/// Feedforward `(ω L i_q, −ω L i_d − ω ψ)`, subtracted from the PI output.
pub fn cross_coupling_comp(p: &MachineParams, i_dq: Dq, omega_k: f64) -> Dq {
    let l_s = p.stator_inductance();
    Dq::new(omega_k * l_s * i_dq.q, -omega_k * l_s * i_dq.d - omega_k * p.psi_pm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    pub u: AlphaBeta,
    pub saturated: bool,
    /// Amplitude of the unsaturated reference.
    pub u_hat_ref: f64,
    /// Hexagon limit in the reference direction.
    pub u_max: f64,
}

/// Scales the reference onto the hexagon boundary if it lies outside;
/// the direction is kept.
pub fn saturate_reference(u: AlphaBeta, u_dc: f64) -> Saturation {
    let u_hat_ref = u.norm();
    let Some(loc) = sector_and_theta(u) else {
        return Saturation { u, saturated: false, u_hat_ref, u_max: u_max(u_dc, 0.0) };
    };
    let limit = u_max(u_dc, loc.theta_prime);
    if u_hat_ref <= limit {
        Saturation { u, saturated: false, u_hat_ref, u_max: limit }
    } else {
        Saturation {
            u: AlphaBeta::new(limit * loc.theta.cos(), limit * loc.theta.sin()),
            saturated: true,
            u_hat_ref,
            u_max: limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DCurrentRef {
    pub i_d: f64,
    /// The quadratic had no real root; `i_d` is the vertex value.
    pub clamped: bool,
}

/// d-current reference that sets the steady-state phase shift between
/// reference voltage and current to `phi_0`, using the root of smaller
/// magnitude. `omega_m` must be nonzero.
pub fn d_current_reference(p: &MachineParams, i_q: f64, omega_m: f64, phi_0: f64, full_formula: bool) -> DCurrentRef {
    let tan = phi_0.tan();
    let l_s = p.stator_inductance();
    let psi = p.psi_pm;
    let (vertex, disc) = if full_formula {
        let w = f64::from(p.pole_pairs) * omega_m;
        let a = w * l_s - p.r_s * tan;
        let vertex = -w * psi / (2.0 * a);
        (vertex, vertex * vertex - i_q * i_q + w * psi * i_q * tan / a)
    } else {
        let vertex = -psi / (2.0 * l_s);
        (vertex, vertex * vertex - i_q * i_q + psi / l_s * i_q * tan)
    };
    if disc < 0.0 {
        DCurrentRef { i_d: vertex, clamped: true }
    } else {
        // root nearer to zero; the vertex is positive only when R tan φ0 > ω L
        let root = if vertex <= 0.0 { vertex + disc.sqrt() } else { vertex - disc.sqrt() };
        DCurrentRef { i_d: root, clamped: false }
    }
}

/// Everything the modulator and the trace need from one controller period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Saturated stationary reference for the modulator.
    pub u_ref: AlphaBeta,
    pub mode: ModulationMode,
    /// Current reference actually used (after injection).
    pub i_dq_ref: Dq,
    pub saturated: bool,
    /// Integration was frozen during this period.
    pub aw_frozen: bool,
    pub injection_clamped: bool,
}

/// Runs one controller period and advances `st`.
pub fn controller_step(cfg: &ControllerConfig, p: &MachineParams, st: &mut ControllerState, inputs: &ControlInputs) -> ControlOutput {
    let mut i_ref = inputs.i_dq_ref;
    let mut injection_clamped = false;
    if let Injection::On { phi_0 } = cfg.injection {
        if inputs.omega_m != 0.0 {
            let r = d_current_reference(p, i_ref.q, inputs.omega_m, phi_0, cfg.full_injection_formula);
            i_ref.d = r.i_d;
            injection_clamped = r.clamped;
        }
    }

    let e = i_ref - inputs.i_dq;
    let integrate = anti_windup_decide(cfg, st.last_u_hat_ref, st.last_u_max, inputs.i_abc);
    let u_pi = pi_step(cfg, &mut st.xi, e, integrate, 1.0 / cfg.f_sw);
    let u_k = u_pi - cross_coupling_comp(p, inputs.i_dq, inputs.omega_k);
    let sat = saturate_reference(inverse_park(u_k, inputs.phi_k), inputs.u_dc);

    st.last_u_ref = sat.u;
    st.last_u_hat_ref = sat.u_hat_ref;
    st.last_u_max = sat.u_max;

    ControlOutput {
        u_ref: sat.u,
        mode: cfg.modulation,
        i_dq_ref: i_ref,
        saturated: sat.saturated,
        aw_frozen: !integrate,
        injection_clamped,
    }
}
