use super::metrics::{extract_metrics, BeamMetrics, MetricsOptions};
use super::radiate::{radiate, PatternGrid};
use super::{illuminate, ApertureField, IlluminationOptions};
use crate::error::{Error, Result};
use crate::feed::{FeedExcitation, FeedPattern};
use crate::geometry::{FeedPlacement, Hemisphere, SystemLayout};
use crate::polarization::{route, PolarizationState};
use crate::synthesis::{quantize, synthesize, CellMap, Compensation};
use crate::unitcell::{CurveLibrary, LookupMode, PhaseCurve};
use crate::wavenumber;

/// Everything besides the layout that a scenario run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub design_frequency_ghz: f64,
    pub feed_q: f64,
    pub feed_gain_dbi: f64,
    pub feed_crosspol_leakage: f64,
    pub uc1: CurveLibrary,
    pub uc2: CurveLibrary,
    pub lookup: LookupMode,
    pub compensation: Compensation,
    pub theta_step_deg: f64,
    pub phi_step_deg: f64,
    pub illumination: IlluminationOptions,
    pub gain_offset_db: f64,
    /// Side of the square reference aperture for efficiency, per side.
    pub ta_reference_size_mm: f64,
    pub fta_reference_size_mm: f64,
    /// Feeds allowed in the TA state; the FTA and HTA states use every
    /// active feed.
    pub ta_feed_ids: Vec<String>,
    /// Feeds that may be switched on at all. Empty means all of them.
    pub active_feed_ids: Vec<String>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            design_frequency_ghz: crate::unitcell::DESIGN_FREQUENCY_GHZ,
            feed_q: crate::feed::DEFAULT_Q,
            feed_gain_dbi: crate::feed::DEFAULT_GAIN_DBI,
            feed_crosspol_leakage: 0.0,
            uc1: CurveLibrary::uc1_builtin(),
            uc2: CurveLibrary::uc2_builtin(),
            lookup: LookupMode::Continuous,
            compensation: Compensation::Bifocal,
            theta_step_deg: 0.5,
            phi_step_deg: 2.0,
            illumination: IlluminationOptions::default(),
            gain_offset_db: 0.0,
            ta_reference_size_mm: 240.0,
            fta_reference_size_mm: 360.0,
            ta_feed_ids: ["A2", "A3", "A4", "A5", "A6"].map(String::from).to_vec(),
            active_feed_ids: Vec::new(),
        }
    }
}

/// Pattern and metrics for one radiating side.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub field: ApertureField,
    pub pattern: PatternGrid,
    pub metrics: BeamMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub state: PolarizationState,
    pub feed_id: String,
    pub frequency_ghz: f64,
    pub forward: Option<Beam>,
    pub backward: Option<Beam>,
}

impl ScenarioResult {
    pub fn beams(&self) -> impl Iterator<Item = &Beam> {
        self.forward.iter().chain(self.backward.iter())
    }
}

/// A layout with its cell maps synthesized once at the design frequency.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub layout: SystemLayout,
    pub config: SimulationConfig,
    ta_cells: CellMap,
    fta_cells: CellMap,
}

impl Simulator {
    pub fn new(layout: SystemLayout, config: SimulationConfig) -> Result<Self> {
        if config.gain_offset_db > 0.0 {
            return Err(Error::Config(format!(
                "gain offset {} dB is positive; it models losses",
                config.gain_offset_db
            )));
        }
        for id in config.ta_feed_ids.iter().chain(&config.active_feed_ids) {
            layout.feed(id)?;
        }
        let k0 = wavenumber(config.design_frequency_ghz);
        let f0 = config.design_frequency_ghz;
        let ta_map = synthesize(&layout, Hemisphere::Forward, config.compensation, k0)?;
        let fta_map = synthesize(&layout, Hemisphere::Backward, config.compensation, k0)?;
        let ta_cells = quantize(&ta_map, config.uc1.at(f0), config.lookup);
        let fta_cells = quantize(&fta_map, config.uc2.at(f0), config.lookup);
        Ok(Simulator {
            layout,
            config,
            ta_cells,
            fta_cells,
        })
    }

    pub fn cells(&self, side: Hemisphere) -> &CellMap {
        match side {
            Hemisphere::Forward => &self.ta_cells,
            Hemisphere::Backward => &self.fta_cells,
        }
    }

    pub fn curve(&self, side: Hemisphere, frequency_ghz: f64) -> &PhaseCurve {
        match side {
            Hemisphere::Forward => self.config.uc1.at(frequency_ghz),
            Hemisphere::Backward => self.config.uc2.at(frequency_ghz),
        }
    }

    fn is_active(&self, id: &str) -> bool {
        self.config.active_feed_ids.is_empty() || self.config.active_feed_ids.iter().any(|a| a == id)
    }

    /// Feeds usable in `state`, in layout order.
    pub fn legal_feeds(&self, state: PolarizationState) -> Vec<&FeedPlacement> {
        self.layout
            .feeds
            .iter()
            .filter(|f| self.is_active(&f.id))
            .filter(|f| state != PolarizationState::X || self.config.ta_feed_ids.contains(&f.id))
            .collect()
    }

    pub fn check_legal(&self, state: PolarizationState, feed_id: &str) -> Result<&FeedPlacement> {
        let feed = self.layout.feed(feed_id)?;
        let legal = self.legal_feeds(state);
        if legal.iter().any(|f| f.id == feed_id) {
            Ok(feed)
        } else {
            Err(Error::IllegalFeed {
                feed: feed_id.to_string(),
                state: state.state_name(),
                allowed: legal.iter().map(|f| f.id.as_str()).collect::<Vec<_>>().join(", "),
            })
        }
    }

    pub fn excitation(
        &self,
        feed: &FeedPlacement,
        state: PolarizationState,
        frequency_ghz: f64,
    ) -> Result<FeedExcitation> {
        let pattern = FeedPattern::new(self.config.feed_q, self.config.feed_gain_dbi, frequency_ghz)?;
        let mut exc = FeedExcitation::new(feed.position, pattern, state);
        exc.crosspol_leakage = self.config.feed_crosspol_leakage;
        Ok(exc)
    }

    pub fn aperture_field(
        &self,
        state: PolarizationState,
        feed_id: &str,
        side: Hemisphere,
        frequency_ghz: f64,
    ) -> Result<ApertureField> {
        let feed = self.check_legal(state, feed_id)?;
        let exc = self.excitation(feed, state, frequency_ghz)?;
        illuminate(
            &self.layout,
            feed,
            &exc,
            side,
            self.cells(side),
            self.curve(side, frequency_ghz),
            wavenumber(frequency_ghz),
            &self.config.illumination,
        )
    }

    fn reference_area(&self, side: Hemisphere) -> f64 {
        let s = match side {
            Hemisphere::Forward => self.config.ta_reference_size_mm,
            Hemisphere::Backward => self.config.fta_reference_size_mm,
        };
        s * s
    }

    pub fn run(&self, state: PolarizationState, feed_id: &str, frequency_ghz: f64) -> Result<ScenarioResult> {
        crate::error::ensure_positive("frequency", frequency_ghz)?;
        self.check_legal(state, feed_id)?;
        let plan = route(state);
        let k0 = wavenumber(frequency_ghz);
        let mut sides = Vec::new();
        for side in [Hemisphere::Forward, Hemisphere::Backward] {
            if plan.is_active(side) {
                let field = self.aperture_field(state, feed_id, side, frequency_ghz)?;
                let pattern = radiate(&field, side, self.config.theta_step_deg, self.config.phi_step_deg, k0)?;
                // fraction of the feed power the grids route to this side
                let share = match side {
                    Hemisphere::Forward => plan.forward_amplitude.powi(2),
                    Hemisphere::Backward => plan.backward_amplitude.powi(2),
                };
                sides.push((side, field, pattern, share));
            }
        }
        let mut result = ScenarioResult {
            state,
            feed_id: feed_id.to_string(),
            frequency_ghz,
            forward: None,
            backward: None,
        };
        for (side, field, pattern, share) in sides {
            let options = MetricsOptions {
                reference_area_mm2: self.reference_area(side),
                gain_offset_db: self.config.gain_offset_db,
                power_share: share,
            };
            let metrics = extract_metrics(&pattern, &options)?;
            let beam = Some(Beam {
                field,
                pattern,
                metrics,
            });
            match side {
                Hemisphere::Forward => result.forward = beam,
                Hemisphere::Backward => result.backward = beam,
            }
        }
        Ok(result)
    }
}

/// One-shot convenience wrapper around [`Simulator`].
pub fn run_scenario(
    layout: &SystemLayout,
    state: PolarizationState,
    feed_id: &str,
    frequency_ghz: f64,
    config: &SimulationConfig,
) -> Result<ScenarioResult> {
    Simulator::new(layout.clone(), config.clone())?.run(state, feed_id, frequency_ghz)
}
