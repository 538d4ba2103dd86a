//! Run configuration: a flat `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a comment. Keys are dotted (`ta.size_mm`); feeds are indexed
//! (`feeds[0].x_mm`). Lists are comma separated. Any `feeds[...]` key
//! replaces the default feed line entirely. Relative curve paths resolve
//! against the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::farfield::{BlockageMask, SimulationConfig};
use crate::geometry::{FeedSpec, LayoutConfig};
use crate::unitcell::{CurveLibrary, PhaseCurve};

/// Where a unit-cell phase curve comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Builtin,
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub layout: LayoutConfig,
    pub sim: SimulationConfig,
    pub frequencies: Vec<f64>,
    pub cut_theta_step_deg: f64,
    pub output_dir: PathBuf,
    pub uc1_source: CurveSource,
    pub uc2_source: CurveSource,
    /// Reference beam-angle table for `report`; `None` uses the shipped one.
    pub reference_angles: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            layout: LayoutConfig::default(),
            sim: SimulationConfig::default(),
            frequencies: crate::unitcell::BUILTIN_FREQUENCIES_GHZ.to_vec(),
            cut_theta_step_deg: 0.25,
            output_dir: PathBuf::from("out"),
            uc1_source: CurveSource::Builtin,
            uc2_source: CurveSource::Builtin,
            reference_angles: None,
        }
    }
}

#[derive(Default)]
struct FeedEntry {
    id: Option<String>,
    x_mm: Option<f64>,
    y_mm: Option<f64>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::ConfigParse {
        line,
        msg: format!("{key}: cannot parse '{value}': {e}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(line, key, s))
        .collect()
}

/// `feeds[3].x_mm` -> (3, "x_mm")
fn feed_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("feeds[")?;
    let (idx, field) = rest.split_once("].")?;
    Some((idx.parse().ok()?, field))
}

fn resolve(base: Option<&Path>, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn check_step(name: &str, step: f64, range: f64) -> Result<()> {
    let n = range / step;
    if !(step > 0.0 && step <= range && (n - n.round()).abs() <= 1e-9 * n) {
        return Err(Error::Config(format!(
            "{name} = {step} does not divide {range} deg evenly"
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    /// Parses config text. `base_dir` anchors relative curve paths.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        let mut feeds: BTreeMap<usize, FeedEntry> = BTreeMap::new();
        let mut blockage = BlockageMask::default();
        let mut blockage_on = false;

        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("expected 'key = value', found '{content}'"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("duplicate key '{key}' (first set on line {prev})"),
                });
            }
            let num = || parse_value::<f64>(line, key, value);
            if let Some((idx, field)) = feed_key(key) {
                let entry = feeds.entry(idx).or_default();
                match field {
                    "id" => entry.id = Some(value.to_string()),
                    "x_mm" => entry.x_mm = Some(num()?),
                    "y_mm" => entry.y_mm = Some(num()?),
                    _ => {
                        return Err(Error::ConfigParse {
                            line,
                            msg: format!("unknown feed field '{field}'"),
                        })
                    }
                }
                continue;
            }
            let sim = &mut cfg.sim;
            let layout = &mut cfg.layout;
            match key {
                "f_mm" => layout.f_mm = num()?,
                "h_mm" => layout.h_mm = Some(num()?),
                "F_mm" => layout.folded_focal_mm = Some(num()?),
                "d_mm" => layout.d_mm = num()?,
                "ta.size_mm" => layout.ta_size_mm = num()?,
                "ta.period_mm" => layout.ta_period_mm = num()?,
                "ta.reference_size_mm" => sim.ta_reference_size_mm = num()?,
                "fta.size_mm" => layout.fta_size_mm = num()?,
                "fta.period_mm" => layout.fta_period_mm = num()?,
                "fta.reference_size_mm" => sim.fta_reference_size_mm = num()?,
                "feed.q" => sim.feed_q = num()?,
                "feed.gain_dbi" => sim.feed_gain_dbi = num()?,
                "feed.crosspol_leakage" => sim.feed_crosspol_leakage = num()?,
                "feed.ta_ids" => sim.ta_feed_ids = parse_list(line, key, value)?,
                "feed.active_ids" => sim.active_feed_ids = parse_list(line, key, value)?,
                "frequencies" => cfg.frequencies = parse_list(line, key, value)?,
                "design_frequency_ghz" => sim.design_frequency_ghz = num()?,
                "curves.uc1" | "curves.uc2" => {
                    let src = if value == "builtin" {
                        CurveSource::Builtin
                    } else {
                        CurveSource::Csv(resolve(base_dir, value))
                    };
                    if key == "curves.uc1" {
                        cfg.uc1_source = src;
                    } else {
                        cfg.uc2_source = src;
                    }
                }
                "curves.lookup" => sim.lookup = parse_value(line, key, value)?,
                "compensation" => sim.compensation = parse_value(line, key, value)?,
                "sampling.theta_step_deg" => sim.theta_step_deg = num()?,
                "sampling.phi_step_deg" => sim.phi_step_deg = num()?,
                "sampling.cut_theta_step_deg" => cfg.cut_theta_step_deg = num()?,
                "blockage.enabled" => blockage_on = parse_value(line, key, value)?,
                "blockage.half_x_mm" => blockage.half_x_mm = num()?,
                "blockage.half_y_mm" => blockage.half_y_mm = num()?,
                "gain_offset_db" => sim.gain_offset_db = num()?,
                "cell.leakage" => sim.illumination.cell_leakage = num()?,
                "grid.reflection_phase_deg" => sim.illumination.reflection_phase_deg = num()?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "report.reference_angles" => cfg.reference_angles = Some(resolve(base_dir, value)),
                _ => {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!("unknown key '{key}'"),
                    })
                }
            }
        }

        if !feeds.is_empty() {
            cfg.layout.feeds = Vec::with_capacity(feeds.len());
            for (expected, (idx, entry)) in feeds.into_iter().enumerate() {
                if idx != expected {
                    return Err(Error::Config(format!("feeds[{expected}] is missing")));
                }
                let x = entry
                    .x_mm
                    .ok_or_else(|| Error::Config(format!("feeds[{idx}].x_mm is required")))?;
                let id = entry.id.unwrap_or_else(|| format!("A{}", idx + 1));
                cfg.layout.feeds.push(FeedSpec::new(id, x, entry.y_mm.unwrap_or(0.0)));
            }
        }
        cfg.sim.illumination.blockage = blockage_on.then_some(blockage);
        cfg.load_curves()?;
        cfg.check()?;
        Ok(cfg)
    }

    fn load_curves(&mut self) -> Result<()> {
        if let CurveSource::Csv(p) = &self.uc1_source {
            self.sim.uc1 = CurveLibrary::parallel(&PhaseCurve::from_csv_path("L", p)?);
        }
        if let CurveSource::Csv(p) = &self.uc2_source {
            self.sim.uc2 = CurveLibrary::parallel(&PhaseCurve::from_csv_path("W", p)?);
        }
        Ok(())
    }

    /// Checks that do not need a built layout.
    pub fn check(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::Config("frequencies must not be empty".into()));
        }
        if let Some(f) = self.frequencies.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::Config(format!("frequency {f} GHz is not positive")));
        }
        if self.sim.design_frequency_ghz.is_nan() || self.sim.design_frequency_ghz <= 0.0 {
            return Err(Error::Config("design_frequency_ghz must be positive".into()));
        }
        check_step("sampling.theta_step_deg", self.sim.theta_step_deg, 90.0)?;
        check_step("sampling.phi_step_deg", self.sim.phi_step_deg, 360.0)?;
        check_step("sampling.cut_theta_step_deg", self.cut_theta_step_deg, 90.0)?;
        if self.sim.gain_offset_db > 0.0 {
            return Err(Error::Config("gain_offset_db must not be positive".into()));
        }
        for (name, v) in [
            ("feed.crosspol_leakage", self.sim.feed_crosspol_leakage),
            ("cell.leakage", self.sim.illumination.cell_leakage),
        ] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}
