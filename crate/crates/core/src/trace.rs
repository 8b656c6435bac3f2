//! Simulation trace and its CSV export.

use std::hash::{DefaultHasher, Hash, Hasher};
use std::io::Write;

use crate::converter::SwitchVector;
use crate::frames::{Abc, AlphaBeta, Dq};

/// Per-sample status bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags(pub u8);

impl Flags {
    pub const SATURATED: u8 = 1;
    pub const AW_FROZEN: u8 = 2;
    pub const FAULT_ACTIVE: u8 = 4;
    pub const INJECTION_CLAMPED: u8 = 8;

    pub fn has(self, bit: u8) -> bool {
        self.0 & bit != 0
    }

    pub fn set(&mut self, bit: u8, on: bool) {
        if on {
            self.0 |= bit;
        } else {
            self.0 &= !bit;
        }
    }
}

/// State at the start of one integration step and the inputs held over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub i_abc: Abc,
    pub i_dq: Dq,
    pub i_dq_ref: Dq,
    pub u_ref: AlphaBeta,
    /// Converter phase voltages applied during the step.
    pub u_abc: Abc,
    pub switches: SwitchVector,
    pub omega_m: f64,
    pub phi_m: f64,
    pub m_m: f64,
    pub m_load: f64,
    pub flags: Flags,
}

/// Uniformly sampled record of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    /// Sample interval in s.
    pub dt: f64,
    pub records: Vec<TraceRecord>,
}

/// CSV column names with units, in export order.
pub const CSV_HEADER: [&str; 16] = [
    "t[s]",
    "i_a[A]",
    "i_b[A]",
    "i_c[A]",
    "i_d[A]",
    "i_q[A]",
    "i_d_ref[A]",
    "i_q_ref[A]",
    "u_ref_alpha[V]",
    "u_ref_beta[V]",
    "s_a",
    "s_b",
    "s_c",
    "omega_m[rad/s]",
    "m_m[Nm]",
    "flags",
];

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TraceRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Records with `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> &[TraceRecord] {
        let tol = 1e-9 * self.dt;
        let start = self.records.partition_point(|r| r.t < t0 - tol);
        let end = self.records.partition_point(|r| r.t < t1 - tol);
        &self.records[start..end.max(start)]
    }

    /// Hash over the exact bit patterns of every record.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.dt.to_bits().hash(&mut h);
        for r in &self.records {
            for v in [
                r.t, r.i_abc.a, r.i_abc.b, r.i_abc.c, r.i_dq.d, r.i_dq.q, r.i_dq_ref.d, r.i_dq_ref.q, r.u_ref.alpha,
                r.u_ref.beta, r.u_abc.a, r.u_abc.b, r.u_abc.c, r.omega_m, r.phi_m, r.m_m, r.m_load,
            ] {
                v.to_bits().hash(&mut h);
            }
            r.switches.bits().hash(&mut h);
            r.flags.hash(&mut h);
        }
        h.finish()
    }

    /// Writes the trace as CSV with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            let s = r.switches.0;
            w.write_record([
                format!("{:.7}", r.t),
                format!("{:.6}", r.i_abc.a),
                format!("{:.6}", r.i_abc.b),
                format!("{:.6}", r.i_abc.c),
                format!("{:.6}", r.i_dq.d),
                format!("{:.6}", r.i_dq.q),
                format!("{:.6}", r.i_dq_ref.d),
                format!("{:.6}", r.i_dq_ref.q),
                format!("{:.4}", r.u_ref.alpha),
                format!("{:.4}", r.u_ref.beta),
                u8::from(s[0]).to_string(),
                u8::from(s[1]).to_string(),
                u8::from(s[2]).to_string(),
                format!("{:.6}", r.omega_m),
                format!("{:.5}", r.m_m),
                r.flags.0.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
