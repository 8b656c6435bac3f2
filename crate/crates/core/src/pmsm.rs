//! Isotropic permanent-magnet synchronous machine.
//!
//! The electrical plant is modelled in the three-phase frame with the full
//! coupled inductance matrix; the mechanical part is a single rigid inertia.

use nalgebra::{Matrix3, Vector3};

use crate::error::ConfigError;
use crate::frames::{Abc, Dq};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Electrical and mechanical constants of the machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineParams {
    /// Stator resistance in Ω.
    pub r_s: f64,
    /// Main (magnetising) inductance in H.
    pub l_main: f64,
    /// Leakage inductance in H.
    pub l_leak: f64,
    /// PM flux linkage amplitude in V·s.
    pub psi_pm: f64,
    pub pole_pairs: u32,
    /// Offset angle of the permanent magnet in rad.
    pub phi_pm: f64,
    /// Total drive-train inertia in kg·m².
    pub inertia: f64,
}

impl MachineParams {
    /// Laboratory generator: R_s = 0.11 Ω, L_s = 3.35 mH, ψ = 0.377 V·s,
    /// three pole pairs, inertia of generator plus load machine.
    pub fn laboratory() -> Self {
        Self::from_stator_inductance(0.11, 3.35e-3, 0.377, 3, 163e-4 + 189e-4)
    }

    /// Splits a dq stator inductance into leakage (10 %) and main parts so
    /// that `3/2 L_main + L_leak` reproduces `l_s`.
    pub fn from_stator_inductance(r_s: f64, l_s: f64, psi_pm: f64, pole_pairs: u32, inertia: f64) -> Self {
        let l_leak = 0.1 * l_s;
        Self {
            r_s,
            l_main: (l_s - l_leak) * (2.0 / 3.0),
            l_leak,
            psi_pm,
            pole_pairs,
            phi_pm: 0.0,
            inertia,
        }
    }

    /// Stator inductance seen in the dq frame.
    pub fn stator_inductance(&self) -> f64 {
        1.5 * self.l_main + self.l_leak
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |what: &str| Err(ConfigError::Machine(what.to_string()));
        if !(self.r_s >= 0.0) {
            return bad("stator resistance must be >= 0");
        }
        if !(self.l_main > 0.0) {
            return bad("main inductance must be > 0");
        }
        if !(self.l_leak >= 0.0) {
            return bad("leakage inductance must be >= 0");
        }
        if !(self.psi_pm > 0.0) {
            return bad("PM flux linkage must be > 0");
        }
        if self.pole_pairs == 0 {
            return bad("pole pair count must be positive");
        }
        if !(self.inertia > 0.0) {
            return bad("inertia must be > 0");
        }
        if !self.phi_pm.is_finite() {
            return bad("PM offset angle must be finite");
        }
        Ok(())
    }
}

/// Instantaneous machine state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MachineState {
    pub i: Abc,
    pub omega_m: f64,
    pub phi_m: f64,
}

/// Stator inductance matrix: diagonal `L_main + L_leak`, off-diagonal `-L_main/2`.
pub fn inductance_matrix(p: &MachineParams) -> Matrix3<f64> {
    let diag = p.l_main + p.l_leak;
    let off = -0.5 * p.l_main;
    Matrix3::new(diag, off, off, off, diag, off, off, off, diag)
}

/// Machine model with the inverse inductance matrix precomputed.
#[derive(Debug, Clone)]
pub struct Pmsm {
    params: MachineParams,
    l_inv: Matrix3<f64>,
}

impl Pmsm {
    pub fn new(params: MachineParams) -> Result<Self, ConfigError> {
        params.validate()?;
        if params.l_leak == 0.0 {
            return Err(ConfigError::Machine(
                "inductance matrix is singular (zero leakage inductance)".into(),
            ));
        }
        let l_inv = inductance_matrix(&params)
            .try_inverse()
            .ok_or_else(|| ConfigError::Machine("inductance matrix is singular".into()))?;
        Ok(Self { params, l_inv })
    }

    pub fn params(&self) -> &MachineParams {
        &self.params
    }

    /// Electrical angle `n_p (φ_m + φ_pm)`.
    pub fn electrical_angle(&self, phi_m: f64) -> f64 {
        f64::from(self.params.pole_pairs) * (phi_m + self.params.phi_pm)
    }

    pub fn electrical_speed(&self, omega_m: f64) -> f64 {
        f64::from(self.params.pole_pairs) * omega_m
    }

    fn phase_sines(&self, phi_m: f64) -> [f64; 3] {
        let (s, c) = self.electrical_angle(phi_m).sin_cos();
        let h = 0.5 * SQRT_3 * c;
        [s, -0.5 * s - h, -0.5 * s + h]
    }

    /// Induced back-emf, entering the voltage balance with a positive sign.
    pub fn back_emf(&self, omega_m: f64, phi_m: f64) -> Abc {
        let amp = self.electrical_speed(omega_m) * self.params.psi_pm;
        let s = self.phase_sines(phi_m);
        Abc::new(amp * s[0], amp * s[1], amp * s[2])
    }

    /// Current derivative `L⁻¹ (u − R i + e)` in A/s.
    pub fn electrical_derivative(&self, s: &MachineState, u: Abc) -> Abc {
        let e = self.back_emf(s.omega_m, s.phi_m);
        let r = self.params.r_s;
        let rhs = Vector3::new(
            u.a - r * s.i.a + e.a,
            u.b - r * s.i.b + e.b,
            u.c - r * s.i.c + e.c,
        );
        let di = self.l_inv * rhs;
        Abc::new(di[0], di[1], di[2])
    }

    /// Air-gap torque from phase currents.
    pub fn torque_abc(&self, i: Abc, phi_m: f64) -> f64 {
        let s = self.phase_sines(phi_m);
        -f64::from(self.params.pole_pairs) * self.params.psi_pm * (i.a * s[0] + i.b * s[1] + i.c * s[2])
    }

    /// Air-gap torque from field-oriented currents; only `i_q` contributes.
    pub fn torque_dq(&self, i: Dq) -> f64 {
        1.5 * f64::from(self.params.pole_pairs) * self.params.psi_pm * i.q
    }

    /// Returns `(dω_m/dt, dφ_m/dt)`; `m_load > 0` accelerates the shaft.
    pub fn mechanical_derivative(&self, s: &MachineState, m_load: f64) -> (f64, f64) {
        let m_m = self.torque_abc(s.i, s.phi_m);
        ((m_m + m_load) / self.params.inertia, s.omega_m)
    }
}
