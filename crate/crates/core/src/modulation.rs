//! Space-vector modulation for the two-level converter.
//!
//! A stationary reference is synthesised from the two active vectors bounding
//! its hexagon sector and zero vectors. Symmetric modulation spreads the zero
//! time over both zero vectors (seven segments, center aligned); flat-top
//! modulation uses only one zero vector (five segments).

use std::f64::consts::{FRAC_PI_3, PI};

use crate::converter::{healthy_voltage_ab, SwitchVector};
use crate::error::SimError;
use crate::frames::AlphaBeta;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl Sector {
    pub const ALL: [Sector; 6] = [Sector::I, Sector::II, Sector::III, Sector::IV, Sector::V, Sector::VI];

    /// Sector number 1..=6.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).wrapping_sub(1)).copied()
    }

    /// Active vectors at the lower and upper sector edge, counter-clockwise.
    pub fn boundary_vectors(self) -> (SwitchVector, SwitchVector) {
        const ACTIVE: [u8; 6] = [0b100, 0b110, 0b010, 0b011, 0b001, 0b101];
        let k = self as usize;
        (SwitchVector::from_bits(ACTIVE[k]), SwitchVector::from_bits(ACTIVE[(k + 1) % 6]))
    }

    pub fn roman(self) -> &'static str {
        ["I", "II", "III", "IV", "V", "VI"][self as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModulationMode {
    /// Both zero vectors, seven-segment center-aligned pattern.
    #[default]
    SymmetricSvm,
    /// Only `000` is used (upper-switch faults).
    FlatTopZero000,
    /// Only `111` is used (lower-switch faults).
    FlatTopZero111,
}

/// Location of a nonzero reference in the hexagon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorAngle {
    pub sector: Sector,
    /// Angle in [0, 2π).
    pub theta: f64,
    /// Angle within the sector, in [0, π/3).
    pub theta_prime: f64,
}

/// Sector and angles of `u`; `None` for the zero vector. Angles exactly on a
/// boundary belong to the lower-numbered sector.
pub fn sector_and_theta(u: AlphaBeta) -> Option<SectorAngle> {
    if u.alpha == 0.0 && u.beta == 0.0 {
        return None;
    }
    let mut theta = u.beta.atan2(u.alpha).rem_euclid(2.0 * PI);
    if theta >= 2.0 * PI {
        theta = 0.0;
    }
    let k = ((theta * 3.0 / PI).floor() as usize).min(5);
    let mut theta_prime = theta - k as f64 * FRAC_PI_3;
    if theta_prime < 0.0 {
        theta_prime = 0.0;
    }
    Some(SectorAngle { sector: Sector::ALL[k], theta, theta_prime })
}

/// Largest amplitude the healthy converter can synthesise at `theta_prime`.
pub fn u_max(u_dc: f64, theta_prime: f64) -> f64 {
    SQRT_3 / (theta_prime.sin() + SQRT_3 * theta_prime.cos()) * (2.0 / 3.0) * u_dc
}

/// Dwell times of one switching period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellTimes {
    pub t1: f64,
    pub t2: f64,
    pub t0: f64,
    /// `None` for a zero reference.
    pub sector: Option<Sector>,
}

impl DwellTimes {
    pub fn boundary_vectors(&self) -> (SwitchVector, SwitchVector) {
        self.sector.unwrap_or(Sector::I).boundary_vectors()
    }
}

/// Splits the period so that `(t1·u_k + t2·u_{k+1}) / t_sw = u_ref`.
///
/// The reference must lie inside the hexagon; a negative zero time beyond
/// rounding is reported as [`SimError::InfeasibleReference`].
pub fn dwell_times(u_ref: AlphaBeta, u_dc: f64, t_sw: f64) -> Result<DwellTimes, SimError> {
    let Some(loc) = sector_and_theta(u_ref) else {
        return Ok(DwellTimes { t1: 0.0, t2: 0.0, t0: t_sw, sector: None });
    };
    let (v1, v2) = loc.sector.boundary_vectors();
    let a = healthy_voltage_ab(u_dc, v1);
    let b = healthy_voltage_ab(u_dc, v2);
    let det = a.alpha * b.beta - a.beta * b.alpha;
    let d1 = (u_ref.alpha * b.beta - u_ref.beta * b.alpha) / det;
    let d2 = (a.alpha * u_ref.beta - a.beta * u_ref.alpha) / det;
    let t1 = (d1 * t_sw).max(0.0);
    let t2 = (d2 * t_sw).max(0.0);
    let mut t0 = t_sw - t1 - t2;
    if t0 < 0.0 {
        if t0 < -1e-12 * t_sw {
            return Err(SimError::InfeasibleReference { t0 });
        }
        t0 = 0.0;
    }
    Ok(DwellTimes { t1, t2, t0, sector: Some(loc.sector) })
}

/// Time-ordered switch vectors with their dwell times over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    pub segments: Vec<(SwitchVector, f64)>,
}

impl GateSchedule {
    pub fn period(&self) -> f64 {
        self.segments.iter().map(|(_, dt)| dt).sum()
    }

    pub fn contains(&self, v: SwitchVector) -> bool {
        self.segments.iter().any(|(s, dt)| *s == v && *dt > 0.0)
    }

    /// Volt-seconds of the healthy converter over the period, (α,β).
    pub fn volt_seconds(&self, u_dc: f64) -> AlphaBeta {
        self.segments
            .iter()
            .fold(AlphaBeta::default(), |acc, (s, dt)| acc + *dt * healthy_voltage_ab(u_dc, *s))
    }

    /// Samples the schedule on `ticks` equal slots. Every segment boundary is
    /// rounded to the nearest slot edge.
    pub fn to_ticks(&self, ticks: usize) -> Vec<SwitchVector> {
        let period = self.period();
        let mut out = Vec::with_capacity(ticks);
        let mut elapsed = 0.0;
        for (s, dt) in &self.segments {
            elapsed += dt;
            let edge = if period > 0.0 { ((elapsed / period) * ticks as f64).round() as usize } else { ticks };
            while out.len() < edge.min(ticks) {
                out.push(*s);
            }
        }
        let last = self.segments.last().map(|(s, _)| *s).unwrap_or_default();
        out.resize(ticks, last);
        out
    }
}

/// Expands dwell times into the switching pattern of `mode`.
pub fn gate_schedule(dwell: &DwellTimes, mode: ModulationMode) -> GateSchedule {
    let DwellTimes { t1, t2, t0, .. } = *dwell;
    let (v1, v2) = dwell.boundary_vectors();
    let segments = match mode {
        ModulationMode::SymmetricSvm => {
            // Visit order keeps single-leg transitions: the vector sharing
            // more ones with 000 comes first.
            let (first, t_first, second, t_second) =
                if v1.bits().count_ones() == 1 { (v1, t1, v2, t2) } else { (v2, t2, v1, t1) };
            vec![
                (SwitchVector::ZERO_LOW, t0 / 4.0),
                (first, t_first / 2.0),
                (second, t_second / 2.0),
                (SwitchVector::ZERO_HIGH, t0 / 2.0),
                (second, t_second / 2.0),
                (first, t_first / 2.0),
                (SwitchVector::ZERO_LOW, t0 / 4.0),
            ]
        }
        ModulationMode::FlatTopZero000 => {
            let (first, t_first, second, t_second) =
                if v1.bits().count_ones() == 1 { (v1, t1, v2, t2) } else { (v2, t2, v1, t1) };
            vec![
                (SwitchVector::ZERO_LOW, t0 / 2.0),
                (first, t_first / 2.0),
                (second, t_second),
                (first, t_first / 2.0),
                (SwitchVector::ZERO_LOW, t0 / 2.0),
            ]
        }
        ModulationMode::FlatTopZero111 => {
            let (first, t_first, second, t_second) =
                if v1.bits().count_ones() == 2 { (v1, t1, v2, t2) } else { (v2, t2, v1, t1) };
            vec![
                (SwitchVector::ZERO_HIGH, t0 / 2.0),
                (first, t_first / 2.0),
                (second, t_second),
                (first, t_first / 2.0),
                (SwitchVector::ZERO_HIGH, t0 / 2.0),
            ]
        }
    };
    GateSchedule { segments }
}
