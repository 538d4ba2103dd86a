//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure (a failed check, an illegal
//! feed/state pair, a failed sweep row), 2 usage or configuration error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::farfield::{radiate_cut, Beam, BeamMetrics, BlockageMask, Simulator};
use crate::geometry::{build_layout, mirror_feed, path_length, Hemisphere, Point3, LENGTH_EPS_MM};
use crate::polarization::{route, PolarizationState};
use crate::synthesis::{bifocal_constituents, bifocal_unwrapped, quantize, synthesize};
use crate::unitcell::{circular_diff_deg, lookup_geometry, pcr, phase_of, uc1_scatter_model, PhaseCurve};
use crate::wavenumber;

/// Reference beam angles measured on the fabricated prototype.
pub const REFERENCE_ANGLES_CSV: &str = include_str!("../data/reference_beam_angles.csv");

/// Beams further than this from the reference angle are flagged.
pub const REFERENCE_OFFSET_DEG: f64 = 3.0;
/// Minimum pointing tolerance against the geometric prediction.
pub const POINTING_TOLERANCE_DEG: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(
    name = "htarray",
    version,
    about = "Bidirectional multibeam hybrid transmitarray designer"
)]
pub struct Cli {
    /// Config file (key = value); defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub theta_step: Option<f64>,
    #[arg(long, global = true)]
    pub phi_step: Option<f64>,
    /// Shadow the feed-board footprint on the FTA.
    #[arg(long, global = true)]
    pub blockage: bool,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gain_offset_db: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check geometry, phase-law and polarization invariants.
    Validate,
    /// Write the TA and FTA phase maps and cell layouts.
    Synthesize,
    /// Simulate one feed in one polarization state.
    Simulate {
        #[arg(long)]
        state: PolarizationState,
        #[arg(long)]
        feed: String,
        #[arg(long)]
        freq: f64,
    },
    /// Run every legal (state, feed, frequency) combination.
    Sweep,
    /// Compare a beam table against geometric predictions.
    Report {
        /// Beam table; defaults to `<out>/beam_table.csv`.
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let code = run(&cli, &mut stdout.lock());
    ExitCode::from(code)
}

/// Runs a parsed command, writing the human-readable report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> u8 {
    let result = load_config(cli).and_then(|cfg| match &cli.command {
        Command::Validate => cmd_validate(&cfg, out),
        Command::Synthesize => cmd_synthesize(&cfg, out),
        Command::Simulate { state, feed, freq } => cmd_simulate(&cfg, *state, feed, *freq, out),
        Command::Sweep => cmd_sweep(&cfg, out),
        Command::Report { table } => {
            let table = table.clone().unwrap_or_else(|| cfg.output_dir.join("beam_table.csv"));
            cmd_report(&cfg, &table, out)
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(t) = cli.theta_step {
        cfg.sim.theta_step_deg = t;
    }
    if let Some(p) = cli.phi_step {
        cfg.sim.phi_step_deg = p;
    }
    if cli.blockage && cfg.sim.illumination.blockage.is_none() {
        cfg.sim.illumination.blockage = Some(BlockageMask::default());
    }
    if let Some(g) = cli.gain_offset_db {
        cfg.sim.gain_offset_db = g;
    }
    cfg.check()?;
    Ok(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn fmt_num(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name, status, detail }
    }

    fn skip(name: &'static str, why: &str) -> Self {
        Check {
            name,
            status: CheckStatus::Skip,
            detail: why.to_string(),
        }
    }
}

fn check_focal(cfg: &RunConfig) -> Check {
    let l = &cfg.layout;
    let (f, h, big_f) = (l.f_mm, l.h_mm, l.folded_focal_mm);
    match (h, big_f) {
        (Some(h), Some(big)) => {
            let expected = 2.0 * f + h;
            let ok = (big - expected).abs() <= LENGTH_EPS_MM * expected.abs().max(1.0);
            Check::new("focal_relation", ok, format!("F = {big} mm, 2f + h = {expected} mm"))
        }
        (Some(h), None) => Check::new("focal_relation", h >= 0.0, format!("F = 2f + h = {} mm", 2.0 * f + h)),
        (None, Some(big)) => {
            let h = big - 2.0 * f;
            Check::new("focal_relation", h >= 0.0, format!("h = F - 2f = {h} mm"))
        }
        (None, None) => Check::new("focal_relation", false, "neither h_mm nor F_mm given".into()),
    }
}

fn check_lookup(name: &'static str, curve: &PhaseCurve) -> Check {
    let mut worst = 0.0f64;
    let mut rotated = 0;
    let mut failure = None;
    for k in 0..360 {
        let want = k as f64;
        let cell = lookup_geometry(curve, want);
        rotated += usize::from(cell.rotated);
        match phase_of(curve, cell) {
            Ok(got) => worst = worst.max(circular_diff_deg(got, want).abs()),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    if let Some(e) = failure {
        return Check::new(name, false, e);
    }
    Check::new(
        name,
        worst <= 1e-6 && rotated == 180,
        format!("max round-trip error {worst:.2e} deg, rotated branch {rotated}/360"),
    )
}

/// Runs the invariant suite on a configuration.
pub fn validation_checks(cfg: &RunConfig) -> Vec<Check> {
    let mut checks = vec![check_focal(cfg)];
    let f0 = cfg.sim.design_frequency_ghz;
    let k0 = wavenumber(f0);

    match build_layout(&cfg.layout) {
        Err(e) => {
            checks.push(Check::new("layout", false, e.to_string()));
            for name in ["mirror_geometry", "bifocal_mean", "feed_legality"] {
                checks.push(Check::skip(name, "layout unavailable"));
            }
        }
        Ok(layout) => {
            checks.push(Check::new(
                "layout",
                true,
                format!(
                    "TA {}x{} cells, FTA {}x{} cells, {} feeds",
                    layout.ta.nx,
                    layout.ta.ny,
                    layout.fta.nx,
                    layout.fta.ny,
                    layout.feeds.len()
                ),
            ));

            let fta_center = Point3::new(0.0, 0.0, layout.fta.plane_z);
            let mut worst = 0.0f64;
            let mut err = None;
            for feed in &layout.feeds {
                match mirror_feed(&layout, feed) {
                    Ok(m) => {
                        let p = feed.position;
                        let want = (p.x * p.x + p.y * p.y + layout.folded_focal.powi(2)).sqrt();
                        worst = worst.max((path_length(m, fta_center) - want).abs() / want);
                    }
                    Err(e) => err = Some(e.to_string()),
                }
            }
            checks.push(match err {
                Some(e) => Check::new("mirror_geometry", false, e),
                None => Check::new(
                    "mirror_geometry",
                    worst <= 1e-12,
                    format!("mirrored path vs sqrt(x^2 + F^2): max rel. error {worst:.1e}"),
                ),
            });

            let [vf1, vf2] = layout.virtual_feeds;
            let bifocal = bifocal_unwrapped(&layout.ta, vf1, vf2, k0).and_then(|b| {
                Ok((
                    b,
                    bifocal_constituents(&layout.ta, vf1, vf2, layout.offset_angle_deg(), k0)?,
                ))
            });
            checks.push(match bifocal {
                Ok((b, (p1, p2))) => {
                    let worst = b
                        .iter()
                        .zip(p1.iter().zip(&p2))
                        .map(|(b, (x, y))| (b - (x + y) / 2.0).abs() / b.abs().max(1e-300))
                        .fold(0.0, f64::max);
                    Check::new(
                        "bifocal_mean",
                        worst <= 1e-9,
                        format!("max rel. deviation from constituent mean {worst:.1e}"),
                    )
                }
                Err(e) => Check::new("bifocal_mean", false, e.to_string()),
            });

            let missing: Vec<_> = cfg
                .sim
                .ta_feed_ids
                .iter()
                .chain(&cfg.sim.active_feed_ids)
                .filter(|id| layout.feed(id).is_err())
                .cloned()
                .collect();
            checks.push(Check::new(
                "feed_legality",
                missing.is_empty(),
                if missing.is_empty() {
                    format!("TA feeds: {}", cfg.sim.ta_feed_ids.join(", "))
                } else {
                    format!("unknown feeds: {}", missing.join(", "))
                },
            ));
        }
    }

    checks.push(check_lookup("uc1_lookup_roundtrip", cfg.sim.uc1.at(f0)));
    checks.push(check_lookup("uc2_lookup_roundtrip", cfg.sim.uc2.at(f0)));

    let mut worst = 0.0f64;
    let mut detail = String::new();
    for state in PolarizationState::ALL {
        let plan = route(state);
        let total = plan.forward_amplitude.powi(2) + plan.backward_amplitude.powi(2);
        worst = worst.max((total - 1.0).abs());
        let _ = write!(
            detail,
            "{}: fwd {:.4} bwd {:.4}; ",
            state.state_name(),
            plan.forward_amplitude,
            plan.backward_amplitude
        );
    }
    checks.push(Check::new(
        "grid_energy_split",
        worst <= 1e-12,
        detail.trim_end_matches("; ").to_string(),
    ));

    match pcr(&uc1_scatter_model(f0)) {
        Ok(p) => checks.push(Check::new("uc1_pcr", p >= 0.928, format!("PCR {p:.4} at {f0} GHz"))),
        Err(e) => checks.push(Check::new("uc1_pcr", false, e.to_string())),
    }
    checks
}

pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let checks = validation_checks(cfg);
    let mut failed = 0;
    for c in &checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => {
                failed += 1;
                "FAIL"
            }
            CheckStatus::Skip => "SKIP",
        };
        writeln!(out, "{tag} {:<22} {}", c.name, c.detail).map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(u8::from(failed > 0))
}

// -------------------------------------------------------------- synthesize

pub fn cmd_synthesize(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let layout = build_layout(&cfg.layout)?;
    let f0 = cfg.sim.design_frequency_ghz;
    let k0 = wavenumber(f0);
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    for (side, prefix, lib) in [
        (Hemisphere::Forward, "ta", &cfg.sim.uc1),
        (Hemisphere::Backward, "fta", &cfg.sim.uc2),
    ] {
        let map = synthesize(&layout, side, cfg.sim.compensation, k0)?;
        let cells = quantize(&map, lib.at(f0), cfg.sim.lookup);
        let mut buf = Vec::new();
        map.write_csv(&mut buf).expect("writing to memory");
        let phase_path = dir.join(format!("{prefix}_phase.csv"));
        write_file(&phase_path, &buf)?;
        buf.clear();
        cells.write_csv(&mut buf).expect("writing to memory");
        let cell_path = dir.join(format!("{prefix}_cells.csv"));
        write_file(&cell_path, &buf)?;
        writeln!(
            out,
            "{}: {}x{} cells, max quantization residual {:.3} deg -> {}, {}",
            prefix.to_uppercase(),
            map.aperture.nx,
            map.aperture.ny,
            cells.max_residual_deg,
            phase_path.display(),
            cell_path.display()
        )
        .map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(0)
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct MetricsRecord<'a> {
    state: &'a str,
    feed_id: &'a str,
    frequency_ghz: f64,
    #[serde(flatten)]
    metrics: &'a BeamMetrics,
}

fn beam_tag(state: PolarizationState, feed: &str, freq: f64, side: Hemisphere) -> String {
    format!("{}_{}_{:.2}GHz_{}", state.label(), feed, freq, side.label())
}

/// Pattern cuts through the peak plane and the three planes 90° apart,
/// as `theta_deg,phi_deg,e_co_db,e_cross_db` normalized to the co-pol peak.
pub fn pattern_cut_csv(beam: &Beam, theta_step: f64, k0: f64) -> Result<String> {
    let phi0 = beam.metrics.peak_phi_deg;
    let phis: Vec<f64> = (0..4).map(|k| (phi0 + 90.0 * k as f64) % 360.0).collect();
    let cuts = radiate_cut(&beam.field, &phis, theta_step, k0)?;
    let grid_peak = beam.pattern.co_power().into_iter().fold(0.0, f64::max);
    let peak = cuts
        .iter()
        .flat_map(|c| c.e_co.iter().map(|e| e.norm_sqr()))
        .fold(grid_peak, f64::max);
    let db = |p: f64| fmt_num(10.0 * (p / peak).log10(), 3);
    let mut s = String::from("theta_deg,phi_deg,e_co_db,e_cross_db\n");
    for c in &cuts {
        for (k, t) in c.theta_deg.iter().enumerate() {
            let _ = writeln!(
                s,
                "{t:.2},{:.2},{},{}",
                c.phi_deg,
                db(c.e_co[k].norm_sqr()),
                db(c.e_cross[k].norm_sqr())
            );
        }
    }
    Ok(s)
}

fn metrics_json(state: PolarizationState, feed: &str, freq: f64, m: &BeamMetrics) -> String {
    let record = MetricsRecord {
        state: state.label(),
        feed_id: feed,
        frequency_ghz: freq,
        metrics: m,
    };
    let mut s = serde_json::to_string_pretty(&record).expect("metrics serialize");
    s.push('\n');
    s
}

fn write_beam_artifacts(
    dir: &Path,
    cfg: &RunConfig,
    state: PolarizationState,
    feed: &str,
    freq: f64,
    beam: &Beam,
) -> Result<(PathBuf, PathBuf)> {
    let side = beam.pattern.hemisphere;
    let tag = beam_tag(state, feed, freq, side);
    let pattern_path = dir.join(format!("pattern_{tag}.csv"));
    let csv = pattern_cut_csv(beam, cfg.cut_theta_step_deg, wavenumber(freq))?;
    write_file(&pattern_path, csv.as_bytes())?;
    let metrics_path = dir.join(format!("metrics_{tag}.json"));
    write_file(&metrics_path, metrics_json(state, feed, freq, &beam.metrics).as_bytes())?;
    Ok((pattern_path, metrics_path))
}

pub fn cmd_simulate(
    cfg: &RunConfig,
    state: PolarizationState,
    feed: &str,
    freq: f64,
    out: &mut dyn Write,
) -> Result<u8> {
    let layout = build_layout(&cfg.layout)?;
    let sim = Simulator::new(layout, cfg.sim.clone())?;
    let result = sim.run(state, feed, freq)?;
    create_dir(&cfg.output_dir)?;
    for beam in result.beams() {
        let (p, m) = write_beam_artifacts(&cfg.output_dir, cfg, state, feed, freq, beam)?;
        let b = &beam.metrics;
        writeln!(
            out,
            "{} {} {:.2} GHz {}: peak theta {:.2} phi {:.1}, D {:.2} dBi, G {:.2} dBi, SLL {} dB -> {}, {}",
            state.state_name(),
            feed,
            freq,
            b.hemisphere,
            b.peak_theta_deg,
            b.peak_phi_deg,
            b.directivity_dbi,
            b.peak_gain_dbi,
            fmt_num(b.sll_db, 2),
            p.display(),
            m.display()
        )
        .map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(0)
}

// ------------------------------------------------------------------- sweep

/// One row of the beam table.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamRow {
    pub state: PolarizationState,
    pub feed_id: String,
    pub feed_x_mm: f64,
    pub frequency_ghz: f64,
    pub hemisphere: Hemisphere,
    pub metrics: Option<BeamMetrics>,
    pub scan_loss_db: f64,
    pub error: Option<String>,
}

pub const BEAM_TABLE_HEADER: &str = "state,feed_id,feed_x_mm,frequency_ghz,hemisphere,peak_theta_deg,peak_phi_deg,\
scan_deg,directivity_dbi,gain_dbi,sll_db,crosspol_db,beamwidth_deg,scan_loss_db,status";

impl BeamRow {
    fn to_csv(&self) -> String {
        let head = format!(
            "{},{},{:.3},{:.3},{}",
            self.state.label(),
            self.feed_id,
            self.feed_x_mm,
            self.frequency_ghz,
            self.hemisphere.label()
        );
        match (&self.metrics, &self.error) {
            (Some(m), None) => format!(
                "{head},{},{},{},{},{},{},{},{},{},ok",
                fmt_num(m.peak_theta_deg, 3),
                fmt_num(m.peak_phi_deg, 3),
                fmt_num(m.signed_scan_deg(), 3),
                fmt_num(m.directivity_dbi, 4),
                fmt_num(m.peak_gain_dbi, 4),
                fmt_num(m.sll_db, 3),
                fmt_num(m.crosspol_peak_db, 3),
                fmt_num(m.beamwidth_3db_deg, 3),
                fmt_num(self.scan_loss_db, 4),
            ),
            (_, err) => format!(
                "{head},,,,,,,,,,failed: {}",
                err.as_deref().unwrap_or("no metrics").replace([',', '\n'], ";")
            ),
        }
    }
}

/// Every legal (state, feed, frequency) combination in table order.
pub fn sweep_jobs(sim: &Simulator, frequencies: &[f64]) -> Vec<(PolarizationState, String, f64)> {
    let mut jobs = Vec::new();
    for state in PolarizationState::ALL {
        for feed in sim.legal_feeds(state) {
            for &f in frequencies {
                jobs.push((state, feed.id.clone(), f));
            }
        }
    }
    jobs
}

fn is_boresight(sim: &Simulator, feed_id: &str) -> bool {
    sim.layout
        .feed(feed_id)
        .map(|f| f.position.x.abs() <= LENGTH_EPS_MM && f.position.y.abs() <= LENGTH_EPS_MM)
        .unwrap_or(false)
}

/// Runs the full sweep and assembles the beam table. Per-beam artifacts
/// go to `artifact_dir` when given.
pub fn run_sweep(sim: &Simulator, cfg: &RunConfig, artifact_dir: Option<&Path>) -> Result<Vec<BeamRow>> {
    let jobs = sweep_jobs(sim, &cfg.frequencies);
    let results: Vec<Result<Vec<BeamRow>>> = jobs
        .par_iter()
        .map(|(state, feed, freq)| {
            let feed_x = sim.layout.feed(feed)?.position.x;
            let plan = route(*state);
            let sides: Vec<Hemisphere> = [Hemisphere::Forward, Hemisphere::Backward]
                .into_iter()
                .filter(|s| plan.is_active(*s))
                .collect();
            let row = |side, metrics, error| BeamRow {
                state: *state,
                feed_id: feed.clone(),
                feed_x_mm: feed_x,
                frequency_ghz: *freq,
                hemisphere: side,
                metrics,
                scan_loss_db: f64::NAN,
                error,
            };
            match sim.run(*state, feed, *freq) {
                Ok(r) => {
                    let mut rows = Vec::new();
                    for beam in r.beams() {
                        if let Some(dir) = artifact_dir {
                            write_beam_artifacts(dir, cfg, *state, feed, *freq, beam)?;
                        }
                        rows.push(row(beam.pattern.hemisphere, Some(beam.metrics), None));
                    }
                    Ok(rows)
                }
                Err(e) if e.is_config_error() => Err(e),
                Err(e) => Ok(sides.into_iter().map(|s| row(s, None, Some(e.to_string()))).collect()),
            }
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    // scan loss against the boresight row of the same (state, frequency, side)
    let reference: Vec<(PolarizationState, f64, Hemisphere, f64)> = rows
        .iter()
        .filter(|r| is_boresight(sim, &r.feed_id))
        .filter_map(|r| {
            r.metrics
                .map(|m| (r.state, r.frequency_ghz, r.hemisphere, m.directivity_dbi))
        })
        .collect();
    for r in &mut rows {
        if let Some(m) = r.metrics {
            if let Some(&(_, _, _, d0)) = reference
                .iter()
                .find(|(s, f, h, _)| *s == r.state && *f == r.frequency_ghz && *h == r.hemisphere)
            {
                r.scan_loss_db = d0 - m.directivity_dbi;
            }
        }
    }
    Ok(rows)
}

pub fn beam_table_csv(rows: &[BeamRow]) -> String {
    let mut s = String::from(BEAM_TABLE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let layout = build_layout(&cfg.layout)?;
    let sim = Simulator::new(layout, cfg.sim.clone())?;
    let beams_dir = cfg.output_dir.join("beams");
    create_dir(&beams_dir)?;
    let rows = run_sweep(&sim, cfg, Some(&beams_dir))?;
    let table = cfg.output_dir.join("beam_table.csv");
    write_file(&table, beam_table_csv(&rows).as_bytes())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let stdout = Path::new("<stdout>");
    writeln!(out, "{} beams -> {} ({} failed)", rows.len(), table.display(), failed).map_err(io_err(stdout))?;
    for &f in &cfg.frequencies {
        let worst = rows
            .iter()
            .filter(|r| r.state == PolarizationState::X && r.frequency_ghz == f && r.scan_loss_db.is_finite())
            .max_by(|a, b| a.scan_loss_db.total_cmp(&b.scan_loss_db));
        if let Some(r) = worst {
            writeln!(
                out,
                "TA max scan loss at {f:.2} GHz: {:.2} dB ({})",
                r.scan_loss_db, r.feed_id
            )
            .map_err(io_err(stdout))?;
        }
    }
    Ok(u8::from(failed > 0))
}

// ------------------------------------------------------------------ report

/// Reference angle keyed by (state label, hemisphere label, feed x).
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAngle {
    pub state: String,
    pub hemisphere: String,
    pub feed_x_mm: f64,
    pub angle_deg: f64,
}

fn split_csv_line(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

pub fn parse_reference_angles(text: &str, origin: &Path) -> Result<Vec<ReferenceAngle>> {
    let fmt = |msg: String| Error::FileFormat {
        path: origin.to_path_buf(),
        msg,
    };
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| fmt("empty file".into()))?;
    if split_csv_line(header) != ["state", "hemisphere", "feed_x_mm", "angle_deg"] {
        return Err(fmt(format!("unexpected header '{header}'")));
    }
    lines
        .map(|l| match split_csv_line(l).as_slice() {
            [s, h, x, a] => Ok(ReferenceAngle {
                state: s.to_string(),
                hemisphere: h.to_string(),
                feed_x_mm: x.parse().map_err(|_| fmt(format!("bad number in '{l}'")))?,
                angle_deg: a.parse().map_err(|_| fmt(format!("bad number in '{l}'")))?,
            }),
            _ => Err(fmt(format!("expected four fields in '{l}'"))),
        })
        .collect()
}

/// Geometric beam angle for a feed at `feed_x`, signed like
/// [`BeamMetrics::signed_scan_deg`]: a feed on +x points the beam to -x.
pub fn predicted_scan_deg(f_mm: f64, folded_mm: f64, side: Hemisphere, feed_x: f64) -> f64 {
    let focal = match side {
        Hemisphere::Forward => f_mm,
        Hemisphere::Backward => folded_mm,
    };
    // + 0.0 turns -0 into 0 for the on-axis feed
    -(feed_x / focal).atan().to_degrees() + 0.0
}

#[derive(Debug, Clone)]
struct TableRow {
    state: String,
    feed_id: String,
    feed_x: f64,
    freq: f64,
    hemisphere: String,
    scan: Option<f64>,
    scan_loss: Option<f64>,
}

fn parse_beam_table(text: &str, origin: &Path) -> Result<Vec<TableRow>> {
    let fmt = |msg: String| Error::FileFormat {
        path: origin.to_path_buf(),
        msg,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = split_csv_line(lines.next().ok_or_else(|| fmt("empty beam table".into()))?);
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| fmt(format!("missing column '{name}'")))
    };
    let (c_state, c_feed, c_x, c_f, c_h, c_scan, c_loss) = (
        col("state")?,
        col("feed_id")?,
        col("feed_x_mm")?,
        col("frequency_ghz")?,
        col("hemisphere")?,
        col("scan_deg")?,
        col("scan_loss_db")?,
    );
    let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    lines
        .map(|l| {
            let v = split_csv_line(l);
            if v.len() != header.len() {
                return Err(fmt(format!("expected {} fields in '{l}'", header.len())));
            }
            Ok(TableRow {
                state: v[c_state].to_string(),
                feed_id: v[c_feed].to_string(),
                feed_x: num(v[c_x]).ok_or_else(|| fmt(format!("bad feed_x_mm in '{l}'")))?,
                freq: num(v[c_f]).ok_or_else(|| fmt(format!("bad frequency in '{l}'")))?,
                hemisphere: v[c_h].to_string(),
                scan: num(v[c_scan]),
                scan_loss: num(v[c_loss]),
            })
        })
        .collect()
}

pub fn cmd_report(cfg: &RunConfig, table: &Path, out: &mut dyn Write) -> Result<u8> {
    let layout = build_layout(&cfg.layout)?;
    let text = fs::read_to_string(table).map_err(io_err(table))?;
    let rows = parse_beam_table(&text, table)?;
    let references = match &cfg.reference_angles {
        Some(p) => parse_reference_angles(&fs::read_to_string(p).map_err(io_err(p))?, p)?,
        None => parse_reference_angles(REFERENCE_ANGLES_CSV, Path::new("reference_beam_angles.csv"))?,
    };
    let tolerance = POINTING_TOLERANCE_DEG.max(cfg.sim.theta_step_deg);
    let stdout = Path::new("<stdout>");
    let mut w = |s: String| writeln!(out, "{s}").map_err(io_err(stdout));

    w(format!(
        "{:<8} {:<5} {:>6} {:<9} {:>9} {:>9} {:>7} {:>9} {:>7} {:>9}  flag",
        "state", "feed", "GHz", "side", "achieved", "predicted", "dev", "reference", "offset", "scan_loss"
    ))?;
    let (mut pointing_flags, mut offsets) = (0, 0);
    for r in &rows {
        let side = match r.hemisphere.as_str() {
            "forward" => Hemisphere::Forward,
            "backward" => Hemisphere::Backward,
            other => {
                return Err(Error::FileFormat {
                    path: table.to_path_buf(),
                    msg: format!("unknown hemisphere '{other}'"),
                })
            }
        };
        let predicted = predicted_scan_deg(layout.f, layout.folded_focal, side, r.feed_x);
        let reference = references
            .iter()
            .find(|a| a.state == r.state && a.hemisphere == r.hemisphere && (a.feed_x_mm - r.feed_x).abs() < 1e-6)
            .map(|a| a.angle_deg);
        let Some(scan) = r.scan else {
            w(format!(
                "{:<8} {:<5} {:>6.2} {:<9} {:>9}  failed",
                r.state, r.feed_id, r.freq, r.hemisphere, "-"
            ))?;
            continue;
        };
        let dev = scan - predicted;
        let mut flags = Vec::new();
        if dev.abs() > tolerance {
            flags.push("POINTING");
            pointing_flags += 1;
        }
        let offset = reference.map(|a| scan - a);
        if offset.is_some_and(|o| o.abs() > REFERENCE_OFFSET_DEG) {
            flags.push("reference offset");
            offsets += 1;
        }
        let opt = |v: Option<f64>, d: usize| v.map_or("-".to_string(), |v| format!("{v:.d$}"));
        w(format!(
            "{:<8} {:<5} {:>6.2} {:<9} {:>9.2} {:>9.2} {:>7.2} {:>9} {:>7} {:>9}  {}",
            r.state,
            r.feed_id,
            r.freq,
            r.hemisphere,
            scan,
            predicted,
            dev,
            opt(reference, 1),
            opt(offset, 2),
            opt(r.scan_loss, 2),
            if flags.is_empty() {
                "ok".to_string()
            } else {
                flags.join(", ")
            }
        ))?;
    }
    w(format!(
        "{} rows; {} beyond the {:.1} deg pointing tolerance; {} more than {:.0} deg from the reference angle",
        rows.len(),
        pointing_flags,
        tolerance,
        offsets,
        REFERENCE_OFFSET_DEG
    ))?;
    Ok(0)
}
