//! Command-line front-end: scenario runs, the injection-angle sweep,
//! switching-table verification and trace plotting.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use pmsg_fault::analysis::{angle_grid, sweep_phi0, thd_last_periods, SweepResult};
use pmsg_fault::converter::{verify_table, FaultSpec, Selector, SwitchingTable};
use pmsg_fault::presets::fundamental_frequency;
use pmsg_fault::scenario::ScenarioFile;
use pmsg_fault::trace::{Flags, Trace};
use pmsg_fault::{run, SimConfig};

pub mod plot;

use plot::{line_chart, Series};

#[derive(Debug, Parser)]
#[command(name = "pmsg-fault", version, about = "PMSG drive simulator with open-switch converter faults")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write trace.csv, summary.txt and plots.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Keep every n-th step (overrides the scenario).
        #[arg(long)]
        decimate: Option<usize>,
        /// Run twice and fail unless both traces are identical.
        #[arg(long)]
        seedless: bool,
    },
    /// THD of phase a over a grid of injection angles.
    SweepPhi0 {
        #[arg(long)]
        scenario: PathBuf,
        /// Angle grid in degrees, START:STEP:END.
        #[arg(long, default_value = "150:2:210")]
        grid: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seedless: bool,
    },
    /// Check the built-in switching matrices against the circuit model.
    VerifyTables,
    /// Render panels of a trace CSV as SVG.
    Plot {
        /// Trace CSV written by `run`.
        trace: PathBuf,
        /// Comma-separated panels: dq, abc, speed.
        #[arg(long, default_value = "dq,abc,speed")]
        panels: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation (exit 2).
    Usage(String),
    /// The command ran but failed (exit 1).
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out: dir, decimate, seedless } => cmd_run(&scenario, &dir, decimate, seedless, out),
        Command::SweepPhi0 { scenario, grid, out: dir, seedless } => cmd_sweep_phi0(&scenario, &grid, &dir, seedless, out),
        Command::VerifyTables => cmd_verify_tables(&SwitchingTable::builtin(), out),
        Command::Plot { trace, panels, out: dir } => cmd_plot(&trace, &panels, &dir, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<(ScenarioFile, SimConfig), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    let cfg = file.to_config().map_err(|e| domain(format!("{}: {e}", path.display())))?;
    Ok((file, cfg))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| domain(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn run_checked(cfg: &SimConfig, seedless: bool) -> Result<Trace, CliError> {
    let trace = run(cfg).map_err(domain)?;
    if seedless {
        let again = run(cfg).map_err(domain)?;
        if again.fingerprint() != trace.fingerprint() {
            return Err(domain("repeated run produced a different trace"));
        }
    }
    Ok(trace)
}

pub fn cmd_run(
    scenario: &Path,
    dir: &Path,
    decimate: Option<usize>,
    seedless: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (file, mut cfg) = load_scenario(scenario)?;
    if let Some(n) = decimate {
        if n == 0 {
            return Err(CliError::Usage("--decimate must be >= 1".into()));
        }
        cfg.decimate = n;
    }
    let trace = run_checked(&cfg, seedless)?;
    create_dir(dir)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).map_err(domain)?;
    write_file(&dir.join("trace.csv"), &csv)?;
    let summary = summary(&cfg, &trace);
    write_file(&dir.join("summary.txt"), summary.as_bytes())?;
    for panel in &file.output.plots {
        let svg = render_panel(panel, &trace_columns(&trace))?;
        write_file(&dir.join(format!("{panel}.svg")), svg.as_bytes())?;
    }
    let _ = write!(out, "{summary}");
    Ok(())
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Extracts one scalar from a trace record.
type Column = fn(&pmsg_fault::TraceRecord) -> f64;

/// Text report: THD per phase, i_dq statistics and flag counts.
pub fn summary(cfg: &SimConfig, trace: &Trace) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "samples: {}", trace.len());
    let _ = writeln!(s, "fault: {}", cfg.fault.label());
    let f = fundamental_frequency(cfg);
    let spp = if f > 0.0 && trace.dt > 0.0 { (1.0 / (f * trace.dt)).round() as usize } else { 0 };
    let periods = trace.len().checked_div(spp).map_or(0, |n| n.min(5));
    let window = if periods > 0 { periods * spp } else { trace.len() };
    let _ = writeln!(s, "window: last {periods} fundamental periods ({f:.4} Hz)");
    let phases: [(&str, Column); 3] =
        [("a", |r| r.i_abc.a), ("b", |r| r.i_abc.b), ("c", |r| r.i_abc.c)];
    for (name, col) in phases {
        match thd_last_periods(trace, col, f, periods) {
            Ok(t) => {
                let _ = writeln!(s, "thd_i_{name}: {:.2} %", 100.0 * t);
            }
            Err(e) => {
                let _ = writeln!(s, "thd_i_{name}: n/a ({e})");
            }
        }
    }
    let tail = &trace.records[trace.len() - window.min(trace.len())..];
    let (d_mean, d_std) = mean_std(tail.iter().map(|r| r.i_dq.d));
    let (q_mean, q_std) = mean_std(tail.iter().map(|r| r.i_dq.q));
    let _ = writeln!(s, "i_d: mean {d_mean:.4} A, std {d_std:.4} A");
    let _ = writeln!(s, "i_q: mean {q_mean:.4} A, std {q_std:.4} A");
    for (name, bit) in [
        ("saturated", Flags::SATURATED),
        ("aw_frozen", Flags::AW_FROZEN),
        ("fault_active", Flags::FAULT_ACTIVE),
        ("injection_clamped", Flags::INJECTION_CLAMPED),
    ] {
        let n = trace.records.iter().filter(|r| r.flags.has(bit)).count();
        let share = if trace.is_empty() { 0.0 } else { 100.0 * n as f64 / trace.len() as f64 };
        let _ = writeln!(s, "{name}: {n} samples ({share:.1} %)");
    }
    let _ = writeln!(s, "fingerprint: {:016x}", trace.fingerprint());
    s
}

/// Parses `START:STEP:END` in degrees.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let usage = || CliError::Usage(format!("grid must be START:STEP:END in degrees, got {spec:?}"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| usage())?;
    let [a, step, b] = parts[..] else { return Err(usage()) };
    if !(a.is_finite() && b.is_finite() && step > 0.0 && b >= a) {
        return Err(usage());
    }
    Ok(angle_grid(a, step, b))
}

pub fn cmd_sweep_phi0(
    scenario: &Path,
    grid: &str,
    dir: &Path,
    seedless: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let grid = parse_grid(grid)?;
    let (_, cfg) = load_scenario(scenario)?;
    if cfg.fault == FaultSpec::None {
        return Err(domain("sweep needs a scenario with a faulty switch"));
    }
    if !(cfg.features.extended_anti_windup && cfg.features.flat_top) {
        return Err(domain("sweep needs extended anti-windup and flat-top modulation enabled"));
    }
    let result = sweep_phi0(&cfg, &grid).map_err(domain)?;
    if seedless && sweep_phi0(&cfg, &grid).map_err(domain)? != result {
        return Err(domain("repeated sweep produced different values"));
    }
    create_dir(dir)?;
    write_file(&dir.join("sweep.csv"), &sweep_csv(&result)?)?;
    let svg = line_chart(
        "THD of i_a over injection angle",
        "phi_0 [deg]",
        "THD [%]",
        &[Series { name: "THD(i_a)", points: result.points.iter().map(|&(p, t)| (p, 100.0 * t)).collect() }],
    )
    .map_err(domain)?;
    write_file(&dir.join("sweep.svg"), svg.as_bytes())?;
    for (p, t) in &result.points {
        let _ = writeln!(out, "{p:8.3} deg  {:7.3} %", 100.0 * t);
    }
    let _ = writeln!(out, "argmin: {:.3} deg ({:.3} %)", result.argmin_deg, 100.0 * result.min_thd());
    Ok(())
}

fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phi0_deg", "thd"]).map_err(domain)?;
    for (p, t) in &result.points {
        w.write_record([format!("{p}"), format!("{t:.9}")]).map_err(domain)?;
    }
    w.into_inner().map_err(domain)
}

fn fmt_cell(v: f64) -> String {
    if v == v.trunc() {
        format!("{v:>5}")
    } else {
        format!("{v:>5.1}")
    }
}

/// Prints every matrix with its circuit check; fails on any mismatch.
pub fn cmd_verify_tables(table: &SwitchingTable, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = verify_table(table);
    let mut bad = Vec::new();
    for c in &checks {
        let selector = match c.selector {
            Selector::Direct => "s",
            Selector::Negated => "1 - s",
        };
        let status = match (&c.oracle, c.ok()) {
            (None, _) => "no affine circuit model",
            (Some(_), true) => "ok",
            (Some(_), false) => "MISMATCH",
        };
        let _ = writeln!(out, "{} (open {}), {}: selector {selector}: {status}", c.fault.label(), fault_kind(c.fault), c.sign.name());
        for r in 0..3 {
            let row: Vec<String> = (0..3).map(|col| fmt_cell(c.table[(r, col)])).collect();
            let _ = writeln!(out, "    [{}]", row.join(" "));
        }
        for m in &c.mismatches {
            let _ = writeln!(
                out,
                "    cell ({}, {}): table {} circuit {}",
                m.row + 1,
                m.col + 1,
                m.table,
                m.oracle
            );
            bad.push(format!("{} {} cell ({}, {})", m.fault.label(), m.sign.name(), m.row + 1, m.col + 1));
        }
        if c.oracle.is_none() {
            bad.push(format!("{} {}: no circuit model", c.fault.label(), c.sign.name()));
        }
    }
    let good = checks.iter().filter(|c| c.ok()).count();
    let _ = writeln!(out, "{good}/{} matrices verified", checks.len());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(domain(format!("switching table mismatch: {}", bad.join(", "))))
    }
}

fn fault_kind(f: FaultSpec) -> String {
    match f {
        FaultSpec::None => "none".into(),
        FaultSpec::Upper(p) => format!("upper switch, phase {}", p.name()),
        FaultSpec::Lower(p) => format!("lower switch, phase {}", p.name()),
    }
}

/// Columns of a trace keyed by their CSV header names.
type Columns = HashMap<String, Vec<f64>>;

fn trace_columns(trace: &Trace) -> Columns {
    let mut c = Columns::new();
    let cols: [(&str, Column); 9] = [
        ("t[s]", |r| r.t),
        ("i_a[A]", |r| r.i_abc.a),
        ("i_b[A]", |r| r.i_abc.b),
        ("i_c[A]", |r| r.i_abc.c),
        ("i_d[A]", |r| r.i_dq.d),
        ("i_q[A]", |r| r.i_dq.q),
        ("i_d_ref[A]", |r| r.i_dq_ref.d),
        ("i_q_ref[A]", |r| r.i_dq_ref.q),
        ("omega_m[rad/s]", |r| r.omega_m),
    ];
    for (name, f) in cols {
        c.insert(name.to_string(), trace.column(f));
    }
    c
}

fn read_columns(path: &Path) -> Result<Columns, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = rdr.headers().map_err(domain)?.iter().map(str::to_string).collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(domain)?;
        for (k, field) in rec.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| domain(format!("row {}: bad number {field:?}", line + 2)))?;
            cols[k].push(v);
        }
    }
    Ok(headers.into_iter().zip(cols).collect())
}

/// Header names and legend labels of each panel.
fn panel_columns(panel: &str) -> Option<(&'static str, &'static [(&'static str, &'static str)])> {
    match panel {
        "dq" => Some((
            "current [A]",
            &[("i_d[A]", "i_d"), ("i_q[A]", "i_q"), ("i_d_ref[A]", "i_d_ref"), ("i_q_ref[A]", "i_q_ref")],
        )),
        "abc" => Some(("current [A]", &[("i_a[A]", "i_a"), ("i_b[A]", "i_b"), ("i_c[A]", "i_c")])),
        "speed" => Some(("speed [rad/s]", &[("omega_m[rad/s]", "omega_m")])),
        _ => None,
    }
}

fn render_panel(panel: &str, cols: &Columns) -> Result<String, CliError> {
    let (y_label, wanted) =
        panel_columns(panel).ok_or_else(|| CliError::Usage(format!("unknown panel {panel:?} (dq, abc, speed)")))?;
    let t = cols.get("t[s]").ok_or_else(|| domain("missing column t[s]"))?;
    let mut series = Vec::new();
    for (col, label) in wanted {
        let y = cols.get(*col).ok_or_else(|| domain(format!("missing column {col}")))?;
        series.push(Series { name: label, points: t.iter().copied().zip(y.iter().copied()).collect() });
    }
    line_chart(panel, "t [s]", y_label, &series).map_err(domain)
}

pub fn cmd_plot(trace: &Path, panels: &str, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let panels: Vec<&str> = panels.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    for p in &panels {
        if panel_columns(p).is_none() {
            return Err(CliError::Usage(format!("unknown panel {p:?} (dq, abc, speed)")));
        }
    }
    let cols = read_columns(trace)?;
    create_dir(dir)?;
    for p in panels {
        let svg = render_panel(p, &cols)?;
        let path = dir.join(format!("{p}.svg"));
        write_file(&path, svg.as_bytes())?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}
