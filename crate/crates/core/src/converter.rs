//! Two-level machine-side converter with at most one permanently open switch.
//!
//! The healthy converter maps a switch vector to phase voltages through
//! `u = u_dc/3 · M · s`. With an open switch the map depends on the sign of
//! the current in the faulty phase and is given by the switching matrices in
//! [`switching_matrix`]; faults in lower switches act on the negated switch
//! vector `1 − s`.

use std::fmt;

use nalgebra::{Matrix3, Vector3};

use crate::frames::{clarke, Abc, AlphaBeta};
use crate::modulation::Sector;

/// Default half-width of the current band treated as "zero current", in A.
pub const DEFAULT_CURRENT_DEADBAND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::A => "a",
            Phase::B => "b",
            Phase::C => "c",
        }
    }
}

/// Three-bit switch command; `true` closes the upper switch of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SwitchVector(pub [bool; 3]);

impl SwitchVector {
    pub const ZERO_LOW: SwitchVector = SwitchVector([false, false, false]);
    pub const ZERO_HIGH: SwitchVector = SwitchVector([true, true, true]);

    pub const fn new(a: bool, b: bool, c: bool) -> Self {
        Self([a, b, c])
    }

    /// Builds the vector from its label bits, `0b100` being `s = (1,0,0)`.
    pub const fn from_bits(bits: u8) -> Self {
        Self([bits & 0b100 != 0, bits & 0b010 != 0, bits & 0b001 != 0])
    }

    pub fn bits(self) -> u8 {
        (u8::from(self.0[0]) << 2) | (u8::from(self.0[1]) << 1) | u8::from(self.0[2])
    }

    pub fn all() -> impl Iterator<Item = SwitchVector> {
        (0u8..8).map(SwitchVector::from_bits)
    }

    pub fn leg(self, phase: Phase) -> bool {
        self.0[phase.index()]
    }

    pub fn negated(self) -> Self {
        Self([!self.0[0], !self.0[1], !self.0[2]])
    }

    pub fn is_zero_vector(self) -> bool {
        self == Self::ZERO_LOW || self == Self::ZERO_HIGH
    }

    pub fn hamming(self, other: SwitchVector) -> u32 {
        (self.bits() ^ other.bits()).count_ones()
    }

    fn as_vector(self) -> Vector3<f64> {
        Vector3::new(f64::from(u8::from(self.0[0])), f64::from(u8::from(self.0[1])), f64::from(u8::from(self.0[2])))
    }
}

impl fmt::Display for SwitchVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for leg in self.0 {
            write!(f, "{}", u8::from(leg))?;
        }
        Ok(())
    }
}

/// Which switch (if any) is permanently open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FaultSpec {
    #[default]
    None,
    Upper(Phase),
    Lower(Phase),
}

impl FaultSpec {
    /// All six single-switch faults, upper switches first.
    pub const ALL_FAULTS: [FaultSpec; 6] = [
        FaultSpec::Upper(Phase::A),
        FaultSpec::Upper(Phase::B),
        FaultSpec::Upper(Phase::C),
        FaultSpec::Lower(Phase::A),
        FaultSpec::Lower(Phase::B),
        FaultSpec::Lower(Phase::C),
    ];

    pub fn phase(self) -> Option<Phase> {
        match self {
            FaultSpec::None => None,
            FaultSpec::Upper(p) | FaultSpec::Lower(p) => Some(p),
        }
    }

    /// Conventional switch label: S1..S3 for upper, S1'..S3' for lower switches.
    pub fn label(self) -> String {
        match self {
            FaultSpec::None => "none".into(),
            FaultSpec::Upper(p) => format!("S{}", p.index() + 1),
            FaultSpec::Lower(p) => format!("S{}'", p.index() + 1),
        }
    }

    /// Inverse of [`FaultSpec::label`].
    pub fn from_label(s: &str) -> Option<Self> {
        if s == "none" {
            return Some(FaultSpec::None);
        }
        std::iter::once(FaultSpec::None).chain(FaultSpec::ALL_FAULTS).find(|f| f.label() == s)
    }
}

/// Direction of the current in the faulty phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentSign {
    Negative,
    Zero,
    Positive,
}

impl CurrentSign {
    pub const ALL: [CurrentSign; 3] = [CurrentSign::Negative, CurrentSign::Zero, CurrentSign::Positive];

    /// Classifies `i` with the band `|i| <= deadband` counted as zero.
    pub fn of(i: f64, deadband: f64) -> Self {
        if i > deadband {
            CurrentSign::Positive
        } else if i < -deadband {
            CurrentSign::Negative
        } else {
            CurrentSign::Zero
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurrentSign::Negative => "i<0",
            CurrentSign::Zero => "i=0",
            CurrentSign::Positive => "i>0",
        }
    }
}

/// The vector a switching matrix multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// The commanded switch vector `s`.
    Direct,
    /// The negated switch vector `1 − s`.
    Negated,
}

type Table = [[f64; 3]; 3];

const HEALTHY: Table = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]];

// Upper switches, indexed [phase][sign] with sign order (i<0, i=0, i>0).
const UPPER: [[Table; 3]; 3] = [
    [
        HEALTHY,
        [[1.0, -1.0, -1.0], [-0.5, 2.0, -1.0], [-0.5, -1.0, 2.0]],
        [[0.0, -1.0, -1.0], [0.0, 2.0, -1.0], [0.0, -1.0, 2.0]],
    ],
    [
        HEALTHY,
        [[2.0, -0.5, -1.0], [-1.0, 1.0, -1.0], [-1.0, -0.5, 2.0]],
        [[2.0, 0.0, -1.0], [-1.0, 0.0, -1.0], [-1.0, 0.0, 2.0]],
    ],
    [
        HEALTHY,
        [[2.0, -1.0, -0.5], [-1.0, 2.0, -0.5], [-1.0, -1.0, 1.0]],
        [[2.0, -1.0, 0.0], [-1.0, 2.0, 0.0], [-1.0, -1.0, 0.0]],
    ],
];

// Lower switches, same indexing, applied to the negated switch vector.
const LOWER: [[Table; 3]; 3] = [
    [
        [[0.0, 1.0, 1.0], [0.0, -2.0, 1.0], [0.0, 1.0, -2.0]],
        [[-1.0, 1.0, 1.0], [0.5, -2.0, 1.0], [0.5, 1.0, -2.0]],
        [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]],
    ],
    [
        [[-2.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 0.0, -2.0]],
        [[-2.0, 0.5, 1.0], [1.0, -1.0, 1.0], [1.0, 0.5, -2.0]],
        [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]],
    ],
    [
        [[-2.0, 1.0, 0.0], [1.0, -2.0, 0.0], [1.0, 1.0, 0.0]],
        [[-2.0, 1.0, 0.5], [1.0, -2.0, 0.5], [1.0, 1.0, -1.0]],
        [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]],
    ],
];

fn sign_index(sign: CurrentSign) -> usize {
    match sign {
        CurrentSign::Negative => 0,
        CurrentSign::Zero => 1,
        CurrentSign::Positive => 2,
    }
}

fn to_matrix(t: &Table) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| t[r][c])
}

/// A full set of faulty-converter switching matrices, indexed by fault and
/// current sign. [`SwitchingTable::builtin`] holds the hard-coded constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingTable {
    upper: [[Table; 3]; 3],
    lower: [[Table; 3]; 3],
}

impl SwitchingTable {
    pub fn builtin() -> Self {
        Self { upper: UPPER, lower: LOWER }
    }

    /// Matrix and selector for a faulty switch. `None` for a healthy
    /// converter.
    pub fn get(&self, fault: FaultSpec, sign: CurrentSign) -> Option<(Matrix3<f64>, Selector)> {
        match fault {
            FaultSpec::None => None,
            FaultSpec::Upper(p) => Some((to_matrix(&self.upper[p.index()][sign_index(sign)]), Selector::Direct)),
            FaultSpec::Lower(p) => Some((to_matrix(&self.lower[p.index()][sign_index(sign)]), Selector::Negated)),
        }
    }

    /// Mutable access to one matrix entry; used to build corrupted tables
    /// when exercising the verifier.
    pub fn entry_mut(&mut self, fault: FaultSpec, sign: CurrentSign, row: usize, col: usize) -> Option<&mut f64> {
        let s = sign_index(sign);
        match fault {
            FaultSpec::None => None,
            FaultSpec::Upper(p) => Some(&mut self.upper[p.index()][s][row][col]),
            FaultSpec::Lower(p) => Some(&mut self.lower[p.index()][s][row][col]),
        }
    }
}

/// Healthy converter phase voltages. Always sums to zero.
pub fn healthy_voltage(u_dc: f64, s: SwitchVector) -> Abc {
    let u = to_matrix(&HEALTHY) * s.as_vector() * (u_dc / 3.0);
    Abc::new(u[0], u[1], u[2])
}

/// Healthy converter output in the stationary frame.
pub fn healthy_voltage_ab(u_dc: f64, s: SwitchVector) -> AlphaBeta {
    clarke(healthy_voltage(u_dc, s))
}

/// Switching matrix for a faulty switch (`fault` must not be `None`).
pub fn switching_matrix(fault: FaultSpec, sign: CurrentSign) -> (Matrix3<f64>, Selector) {
    SwitchingTable::builtin()
        .get(fault, sign)
        .expect("switching_matrix requires a faulty switch")
}

/// Phase voltages of a possibly faulty converter for the instantaneous
/// phase currents `i`.
pub fn faulty_voltage(u_dc: f64, s: SwitchVector, fault: FaultSpec, i: Abc, deadband: f64) -> Abc {
    let Some(phase) = fault.phase() else {
        return healthy_voltage(u_dc, s);
    };
    let sign = CurrentSign::of(i.get(phase.index()), deadband);
    apply(u_dc, s, fault, sign)
}

/// Converter output for a known current sign in the faulty phase.
pub fn apply(u_dc: f64, s: SwitchVector, fault: FaultSpec, sign: CurrentSign) -> Abc {
    match switching_matrix_fast(fault, sign) {
        None => healthy_voltage(u_dc, s),
        Some((m, sel)) => {
            let v = match sel {
                Selector::Direct => s,
                Selector::Negated => s.negated(),
            };
            let u = to_matrix(m) * v.as_vector() * (u_dc / 3.0);
            Abc::new(u[0], u[1], u[2])
        }
    }
}

fn switching_matrix_fast(fault: FaultSpec, sign: CurrentSign) -> Option<(&'static Table, Selector)> {
    match fault {
        FaultSpec::None => None,
        FaultSpec::Upper(p) => Some((&UPPER[p.index()][sign_index(sign)], Selector::Direct)),
        FaultSpec::Lower(p) => Some((&LOWER[p.index()][sign_index(sign)], Selector::Negated)),
    }
}

/// Hexagon sectors whose bounding active vectors and one zero vector are
/// produced unshifted by the converter for the given fault and current sign.
pub fn feasible_sectors(fault: FaultSpec, sign: CurrentSign) -> Vec<Sector> {
    let unshifted = |v: SwitchVector| {
        let healthy = healthy_voltage(1.0, v);
        let actual = apply(1.0, v, fault, sign);
        (healthy - actual).max_abs() < 1e-12
    };
    let zero_ok = unshifted(SwitchVector::ZERO_LOW) || unshifted(SwitchVector::ZERO_HIGH);
    Sector::ALL
        .into_iter()
        .filter(|sector| {
            let (v1, v2) = sector.boundary_vectors();
            zero_ok && unshifted(v1) && unshifted(v2)
        })
        .collect()
}

/// Independent circuit-level model of the converter legs.
///
/// Each leg node potential (relative to the negative rail) is derived from
/// which device conducts: a closed switch clamps the node to its rail; an
/// open leg conducts through the free-wheeling diode selected by the current
/// direction; with zero current in an open leg nothing conducts and the node
/// is taken at mid-link. Phase voltages follow by subtracting the star-point
/// potential (mean of the three node potentials).
pub mod circuit {
    use super::*;

    /// Node potential of one leg in units of `u_dc`.
    ///
    /// `current` is the leg current flowing towards the machine.
    pub fn leg_potential(upper_cmd: bool, upper_ok: bool, lower_ok: bool, current: CurrentSign) -> f64 {
        let upper_closed = upper_cmd && upper_ok;
        let lower_closed = !upper_cmd && lower_ok;
        if upper_closed {
            return 1.0;
        }
        if lower_closed {
            return 0.0;
        }
        // Both transistors of the leg are off: the diodes decide.
        match current {
            // Current towards the machine freewheels through the lower diode.
            CurrentSign::Positive => 0.0,
            // Current from the machine returns through the upper diode.
            CurrentSign::Negative => 1.0,
            CurrentSign::Zero => 0.5,
        }
    }

    /// Phase voltages (in units of `u_dc`) for a single-switch fault.
    pub fn phase_voltages(s: SwitchVector, fault: FaultSpec, sign: CurrentSign) -> [f64; 3] {
        scaled_phase_voltages(s, fault, sign).map(|u| u / 3.0)
    }

    /// Three times [`phase_voltages`]. Node potentials are multiples of 1/2,
    /// so this is exact in floating point.
    pub fn scaled_phase_voltages(s: SwitchVector, fault: FaultSpec, sign: CurrentSign) -> [f64; 3] {
        let mut nodes = [0.0; 3];
        for phase in Phase::ALL {
            let (upper_ok, lower_ok) = match fault {
                FaultSpec::Upper(p) if p == phase => (false, true),
                FaultSpec::Lower(p) if p == phase => (true, false),
                _ => (true, true),
            };
            // Healthy legs always have a closed device; the sign only matters
            // for the faulty leg.
            nodes[phase.index()] = leg_potential(s.leg(phase), upper_ok, lower_ok, sign);
        }
        let sum = nodes[0] + nodes[1] + nodes[2];
        nodes.map(|n| 3.0 * n - sum)
    }

    /// Reconstructs the switching matrix for `fault` and `sign` by probing
    /// the circuit with unit selector vectors, then checks that the affine
    /// map reproduces all eight switch vectors.
    pub fn derive_matrix(fault: FaultSpec, sign: CurrentSign) -> Option<Matrix3<f64>> {
        let negated = matches!(fault, FaultSpec::Lower(_));
        let to_switch = |sel: SwitchVector| if negated { sel.negated() } else { sel };
        let mut m = Matrix3::zeros();
        for col in 0..3 {
            let mut bits = [false; 3];
            bits[col] = true;
            let u = scaled_phase_voltages(to_switch(SwitchVector(bits)), fault, sign);
            for row in 0..3 {
                m[(row, col)] = u[row];
            }
        }
        for sel in SwitchVector::all() {
            let u = scaled_phase_voltages(to_switch(sel), fault, sign);
            let predicted = m * sel.as_vector();
            if (0..3).any(|r| predicted[r] != u[r]) {
                return None;
            }
        }
        Some(m)
    }
}

/// One mismatching entry found by [`verify_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellMismatch {
    pub fault: FaultSpec,
    pub sign: CurrentSign,
    pub row: usize,
    pub col: usize,
    pub table: f64,
    pub oracle: f64,
}

/// Comparison of one switching matrix against the circuit oracle.
#[derive(Debug, Clone)]
pub struct MatrixCheck {
    pub fault: FaultSpec,
    pub sign: CurrentSign,
    pub selector: Selector,
    pub table: Matrix3<f64>,
    pub oracle: Option<Matrix3<f64>>,
    pub mismatches: Vec<CellMismatch>,
}

impl MatrixCheck {
    pub fn ok(&self) -> bool {
        self.oracle.is_some() && self.mismatches.is_empty()
    }
}

/// Compares all 18 switching matrices of `table` with the circuit oracle.
/// Entries are integers or halves, so the comparison is exact.
pub fn verify_table(table: &SwitchingTable) -> Vec<MatrixCheck> {
    let mut out = Vec::with_capacity(18);
    for fault in FaultSpec::ALL_FAULTS {
        for sign in CurrentSign::ALL {
            let (m, selector) = table.get(fault, sign).expect("fault is not None");
            let oracle = circuit::derive_matrix(fault, sign);
            let mut mismatches = Vec::new();
            if let Some(o) = &oracle {
                for row in 0..3 {
                    for col in 0..3 {
                        if m[(row, col)] != o[(row, col)] {
                            mismatches.push(CellMismatch {
                                fault,
                                sign,
                                row,
                                col,
                                table: m[(row, col)],
                                oracle: o[(row, col)],
                            });
                        }
                    }
                }
            }
            out.push(MatrixCheck { fault, sign, selector, table: m, oracle, mismatches });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_abc(u: Abc, expected: [f64; 3], tol: f64) {
        for (k, e) in expected.iter().enumerate() {
            assert!((u.get(k) - e).abs() <= tol, "{u:?} vs {expected:?}");
        }
    }

    #[test]
    fn healthy_examples() {
        assert_abc(healthy_voltage(565.0, SwitchVector::ZERO_LOW), [0.0; 3], 0.0);
        assert_abc(healthy_voltage(565.0, SwitchVector::ZERO_HIGH), [0.0; 3], 1e-12);
        assert_abc(healthy_voltage(565.0, SwitchVector::from_bits(0b100)), [376.6667, -188.3333, -188.3333], 1e-4);
    }

    #[test]
    fn switching_matrix_examples() {
        let (m, sel) = switching_matrix(FaultSpec::Upper(Phase::A), CurrentSign::Negative);
        assert_eq!(m, to_matrix(&HEALTHY));
        assert_eq!(sel, Selector::Direct);
        let (m, _) = switching_matrix(FaultSpec::Upper(Phase::A), CurrentSign::Positive);
        assert_eq!(m, Matrix3::new(0.0, -1.0, -1.0, 0.0, 2.0, -1.0, 0.0, -1.0, 2.0));
        let (m, sel) = switching_matrix(FaultSpec::Lower(Phase::A), CurrentSign::Negative);
        assert_eq!(m, Matrix3::new(0.0, 1.0, 1.0, 0.0, -2.0, 1.0, 0.0, 1.0, -2.0));
        assert_eq!(sel, Selector::Negated);
    }

    #[test]
    fn faulty_voltage_examples() {
        let f = FaultSpec::Upper(Phase::A);
        let pos = Abc::new(5.0, -2.0, -3.0);
        let u = faulty_voltage(565.0, SwitchVector::from_bits(0b100), f, pos, DEFAULT_CURRENT_DEADBAND);
        assert_abc(u, [0.0; 3], 1e-12);
        let u = faulty_voltage(565.0, SwitchVector::from_bits(0b110), f, pos, DEFAULT_CURRENT_DEADBAND);
        let u010 = healthy_voltage(565.0, SwitchVector::from_bits(0b010));
        assert_abc(u, u010.to_array(), 1e-12);
        let zero = Abc::new(5e-5, 1.0, -1.0 - 5e-5);
        let u = faulty_voltage(565.0, SwitchVector::from_bits(0b100), f, zero, DEFAULT_CURRENT_DEADBAND);
        let k = 565.0 / 3.0;
        assert_abc(u, [k, -0.5 * k, -0.5 * k], 1e-12);
        // Shift of the 100 vector in α is -u_dc/3 for i = 0.
        let shift = clarke(u).alpha - healthy_voltage_ab(565.0, SwitchVector::from_bits(0b100)).alpha;
        assert!((shift + 565.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn outputs_sum_to_zero() {
        for s in SwitchVector::all() {
            for fault in std::iter::once(FaultSpec::None).chain(FaultSpec::ALL_FAULTS) {
                for sign in CurrentSign::ALL {
                    assert!(apply(565.0, s, fault, sign).sum().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conducting_direction_reproduces_healthy_converter() {
        // Upper faults are invisible for i < 0, lower faults for i > 0.
        for s in SwitchVector::all() {
            let h = healthy_voltage(565.0, s);
            for p in Phase::ALL {
                assert_eq!(apply(565.0, s, FaultSpec::Upper(p), CurrentSign::Negative), h);
                assert!((apply(565.0, s, FaultSpec::Lower(p), CurrentSign::Positive) - h).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn builtin_table_matches_circuit_oracle() {
        let checks = verify_table(&SwitchingTable::builtin());
        assert_eq!(checks.len(), 18);
        for c in &checks {
            assert!(c.ok(), "{:?} {:?}: {:?}", c.fault, c.sign, c.mismatches);
        }
    }

    #[test]
    fn corrupted_table_names_cell() {
        let mut t = SwitchingTable::builtin();
        *t.entry_mut(FaultSpec::Lower(Phase::B), CurrentSign::Zero, 2, 1).unwrap() = 0.25;
        let bad: Vec<_> = verify_table(&t).into_iter().filter(|c| !c.ok()).collect();
        assert_eq!(bad.len(), 1);
        let m = &bad[0].mismatches[0];
        assert_eq!((m.fault, m.sign, m.row, m.col), (FaultSpec::Lower(Phase::B), CurrentSign::Zero, 2, 1));
        assert_eq!(m.oracle, 0.5);
    }

    #[test]
    fn upper_lower_duality() {
        // Swapping the rails maps an upper fault with current i onto the
        // lower fault of the same phase with current -i, with s -> 1 - s and
        // the voltage negated.
        for p in Phase::ALL {
            for (sign, mirrored) in [
                (CurrentSign::Negative, CurrentSign::Positive),
                (CurrentSign::Zero, CurrentSign::Zero),
                (CurrentSign::Positive, CurrentSign::Negative),
            ] {
                for s in SwitchVector::all() {
                    let up = apply(565.0, s, FaultSpec::Upper(p), sign);
                    let low = apply(565.0, s.negated(), FaultSpec::Lower(p), mirrored);
                    assert!((up + low).max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn feasible_sector_examples() {
        assert_eq!(feasible_sectors(FaultSpec::Upper(Phase::A), CurrentSign::Negative), Sector::ALL.to_vec());
        assert_eq!(
            feasible_sectors(FaultSpec::Upper(Phase::A), CurrentSign::Positive),
            vec![Sector::III, Sector::IV]
        );
        assert_eq!(feasible_sectors(FaultSpec::None, CurrentSign::Positive), Sector::ALL.to_vec());
        assert_eq!(
            feasible_sectors(FaultSpec::Upper(Phase::A), CurrentSign::Zero),
            vec![Sector::III, Sector::IV]
        );
        // Lower fault in phase a with current flowing from the machine keeps
        // only the sectors around the positive a-axis.
        assert_eq!(
            feasible_sectors(FaultSpec::Lower(Phase::A), CurrentSign::Negative),
            vec![Sector::I, Sector::VI]
        );
    }

    #[test]
    fn label_round_trip() {
        for f in std::iter::once(FaultSpec::None).chain(FaultSpec::ALL_FAULTS) {
            assert_eq!(FaultSpec::from_label(&f.label()), Some(f));
        }
        assert_eq!(FaultSpec::from_label("S4"), None);
    }

    #[test]
    fn labels() {
        assert_eq!(SwitchVector::from_bits(0b011).to_string(), "011");
        assert_eq!(FaultSpec::Upper(Phase::A).label(), "S1");
        assert_eq!(FaultSpec::Lower(Phase::C).label(), "S3'");
        assert_eq!(CurrentSign::of(0.0, 1e-4), CurrentSign::Zero);
        assert_eq!(CurrentSign::of(-2e-4, 1e-4), CurrentSign::Negative);
    }
}
