//! The detect -> recognize -> track -> forecast -> light control loop,
//! as a deterministic event-driven state machine over a simulated
//! house.
//!
//! Sensing is oracle-based: detection succeeds per frame with a
//! configured probability, position estimates carry Gaussian cell
//! noise, and recognition misidentifies with the complementary
//! probability of its accuracy. Stage latencies are accounting only:
//! they offset the timestamps of emitted commands, they do not block
//! the event loop.
//!
//! Zone lighting rules:
//! - a PIR on a dark zone turns on the default lighting and arms
//!   detection there;
//! - the first recognized resident to arrive claims the zone with
//!   their profile lighting and is never displaced while present —
//!   later entrants change nothing;
//! - unknown persons never change lighting;
//! - a forecast confidently ending in another unclaimed zone lights
//!   that zone preemptively with the resident's profile;
//! - a zone claims-released after its owner has been gone for the
//!   timeout passes to the longest-tracked identified occupant, else
//!   falls back to default lighting;
//! - a zone with no presence signal for the timeout turns off exactly
//!   once.

pub mod scenario;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::forecast::{ForecastConfig, ForecastError, Forecaster, ObservedHistory};
use crate::grid::{GridMap, ZoneId};
use crate::math;
use crate::mdp::{Mdp, StateId};
use crate::protocol::{LightingCommand, ProtocolError};
use crate::rng::SeededRng;

pub use scenario::{run_scenario, RouteStop, Scenario, ScenarioReport, ScriptedResident};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("stale event: tick {event} is before the current tick {now}")]
    StaleEvent { event: u64, now: u64 },
    #[error("unknown zone id {0}")]
    UnknownZone(u8),
    #[error("scenario references unknown profile '{0}'")]
    UnknownProfile(String),
    #[error("duplicate profile id '{0}'")]
    DuplicateId(String),
    #[error("lighting intensity {0} exceeds 100")]
    InvalidLighting(u8),
    #[error("profile id '{0}' must be [A-Za-z0-9_-]+")]
    InvalidPersonId(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// RGB channels plus intensity percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LightingSpec {
    pub red: u8,
    pub green: u8,
    pub blue: u8,
    pub intensity: u8,
}

impl LightingSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.intensity > 100 {
            return Err(PipelineError::InvalidLighting(self.intensity));
        }
        Ok(())
    }
}

/// Soft white, used before anyone is recognized.
pub const DEFAULT_LIGHTING: LightingSpec = LightingSpec {
    red: 255,
    green: 255,
    blue: 255,
    intensity: 60,
};

#[cfg(feature = "serde")]
fn default_lighting() -> LightingSpec {
    DEFAULT_LIGHTING
}

/// One enrolled resident.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidentProfile {
    pub person_id: String,
    pub display_name: String,
    /// Stand-in for a face embedding.
    pub identity_token: String,
    pub lighting: LightingSpec,
}

fn person_id_ok(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Profiles keyed by unique person id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileStore {
    profiles: Vec<ResidentProfile>,
}

impl ProfileStore {
    pub fn new(profiles: Vec<ResidentProfile>) -> Result<Self, PipelineError> {
        for (i, p) in profiles.iter().enumerate() {
            if !person_id_ok(&p.person_id) {
                return Err(PipelineError::InvalidPersonId(p.person_id.clone()));
            }
            p.lighting.validate()?;
            if profiles[..i].iter().any(|q| q.person_id == p.person_id) {
                return Err(PipelineError::DuplicateId(p.person_id.clone()));
            }
        }
        Ok(ProfileStore { profiles })
    }

    pub fn get(&self, person_id: &str) -> Option<&ResidentProfile> {
        self.profiles.iter().find(|p| p.person_id == person_id)
    }

    pub fn profiles(&self) -> &[ResidentProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Detection/recognition oracle parameters and simulated per-stage
/// latencies in milliseconds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SensingOracles {
    pub p_detect: f64,
    /// Localization noise, in cells.
    pub noise_sigma: f64,
    pub p_correct_id: f64,
    pub latency_detect_ms: u64,
    pub latency_recognize_ms: u64,
    pub latency_track_ms: u64,
    pub latency_forecast_ms: u64,
}

impl Default for SensingOracles {
    fn default() -> Self {
        SensingOracles {
            p_detect: 0.95,
            noise_sigma: 0.5,
            p_correct_id: 0.9512,
            latency_detect_ms: 45,
            latency_recognize_ms: 58,
            latency_track_ms: 17,
            latency_forecast_ms: 79,
        }
    }
}

impl SensingOracles {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let probs_ok = (0.0..=1.0).contains(&self.p_detect)
            && (0.0..=1.0).contains(&self.p_correct_id)
            && self.noise_sigma >= 0.0;
        if !probs_ok {
            return Err(PipelineError::InvalidScenario(
                "oracle probabilities must be in [0, 1] and sigma >= 0".to_string(),
            ));
        }
        Ok(())
    }

    /// Perfect sensing with zero latency; handy in tests.
    pub fn perfect() -> Self {
        SensingOracles {
            p_detect: 1.0,
            noise_sigma: 0.0,
            p_correct_id: 1.0,
            latency_detect_ms: 0,
            latency_recognize_ms: 0,
            latency_track_ms: 0,
            latency_forecast_ms: 0,
        }
    }
}

/// Forecast invocation knobs for the tracking loop.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ForecastSettings {
    /// Run the forecaster every this many tracked frames; 0 disables.
    pub stride_frames: u32,
    pub samples: usize,
    pub k: usize,
    pub points: usize,
    /// Goal posterior needed before lighting a zone preemptively.
    pub threshold: f64,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        ForecastSettings {
            stride_frames: 12,
            samples: 64,
            k: 3,
            points: 20,
            threshold: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub default_lighting: LightingSpec,
    pub timeout_ticks: u64,
    pub forecast: ForecastSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            default_lighting: DEFAULT_LIGHTING,
            timeout_ticks: 1000,
            forecast: ForecastSettings::default(),
        }
    }
}

/// Track lifecycle per the control flow graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Sensing,
    Detecting,
    Identifying,
    Tracking,
    Lost,
}

/// What the recognizer believes about a track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identity {
    Unknown,
    Known(String),
}

/// Zone lighting state; profile and preemptive modes carry the owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LightingMode {
    Off,
    Default,
    Profile(String),
    Preemptive(String),
}

impl LightingMode {
    pub fn owner(&self) -> Option<&str> {
        match self {
            LightingMode::Profile(p) | LightingMode::Preemptive(p) => Some(p),
            _ => None,
        }
    }
}

/// Input alphabet of the state machine.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    PirTriggered {
        tick: u64,
        zone: ZoneId,
    },
    /// Ground-truth occupants visible this frame: `(label, cell)`.
    Frame {
        tick: u64,
        occupants: Vec<(String, (usize, usize))>,
    },
    Tick {
        tick: u64,
    },
}

impl Event {
    pub fn tick(&self) -> u64 {
        match self {
            Event::PirTriggered { tick, .. } | Event::Frame { tick, .. } | Event::Tick { tick } => {
                *tick
            }
        }
    }
}

/// Why a command was emitted; profile-kind commands complete episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Default,
    Profile,
    Preemptive,
    Off,
}

/// An outbound lighting command with its simulated emission time.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandRecord {
    pub ts: u64,
    pub kind: CommandKind,
    pub person: Option<String>,
    pub command: LightingCommand,
}

#[derive(Debug, Clone)]
struct ZoneRuntime {
    mode: LightingMode,
    armed: bool,
    last_occupied: Option<u64>,
    owner_gone_since: Option<u64>,
    mode_since: u64,
}

#[derive(Debug, Clone)]
struct Track {
    /// Ground-truth label; the simulator's linkage for oracle draws,
    /// never used for lighting decisions.
    label: String,
    believed: Identity,
    cell: StateId,
    zone: ZoneId,
    history: Vec<(StateId, u64)>,
    status: TrackStatus,
    frames_tracked: u32,
}

/// The full control loop over one house.
pub struct Pipeline<'a> {
    map: &'a GridMap,
    mdp: &'a Mdp,
    profiles: &'a ProfileStore,
    forecaster: Option<&'a Forecaster>,
    oracles: SensingOracles,
    config: PipelineConfig,
    rng: SeededRng,
    now: u64,
    started: bool,
    zones: Vec<ZoneRuntime>,
    /// Creation order; earlier tracks take precedence in claims.
    tracks: Vec<Track>,
    log: Vec<String>,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        map: &'a GridMap,
        mdp: &'a Mdp,
        profiles: &'a ProfileStore,
        forecaster: Option<&'a Forecaster>,
        oracles: SensingOracles,
        config: PipelineConfig,
        seed: u64,
    ) -> Result<Self, PipelineError> {
        oracles.validate()?;
        config.default_lighting.validate()?;
        Ok(Pipeline {
            map,
            mdp,
            profiles,
            forecaster,
            oracles,
            config,
            rng: SeededRng::new(seed),
            now: 0,
            started: false,
            zones: map
                .zones()
                .iter()
                .map(|_| ZoneRuntime {
                    mode: LightingMode::Off,
                    armed: false,
                    last_occupied: None,
                    owner_gone_since: None,
                    mode_since: 0,
                })
                .collect(),
            tracks: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn zone_mode(&self, zone: ZoneId) -> &LightingMode {
        &self.zones[zone.index()].mode
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    /// Append-only event log, one `tick,kind,zone,person,detail` line
    /// per entry.
    pub fn log_lines(&self) -> &[String] {
        &self.log
    }

    pub fn push_log(&mut self, line: String) {
        self.log.push(line);
    }

    fn log_line(&mut self, ts: u64, kind: &str, zone: &str, person: &str, detail: &str) {
        self.log.push(format!("{ts},{kind},{zone},{person},{detail}"));
    }

    fn zone_name(&self, zone: ZoneId) -> &str {
        &self.map.zone(zone).name
    }

    /// Drive one event through the machine.
    pub fn process_event(&mut self, event: &Event) -> Result<Vec<CommandRecord>, PipelineError> {
        let tick = event.tick();
        if self.started && tick < self.now {
            return Err(PipelineError::StaleEvent {
                event: tick,
                now: self.now,
            });
        }
        self.started = true;
        self.now = tick;
        let mut out = Vec::new();
        match event {
            Event::PirTriggered { zone, .. } => {
                if zone.index() >= self.zones.len() {
                    return Err(PipelineError::UnknownZone(zone.0));
                }
                self.log_line(tick, "pir", &self.zone_name(*zone).to_string(), "", "motion");
                let rt = &mut self.zones[zone.index()];
                rt.armed = true;
                rt.last_occupied = Some(tick);
                if rt.mode == LightingMode::Off {
                    self.set_zone_mode(*zone, LightingMode::Default, tick, None, &mut out)?;
                }
                self.housekeeping(tick, &mut out)?;
            }
            Event::Tick { .. } => {
                self.housekeeping(tick, &mut out)?;
            }
            Event::Frame { occupants, .. } => {
                let mut latency = 0u64;
                self.update_tracks(tick, occupants, &mut latency, &mut out)?;
                self.detect_new(tick, occupants, &mut latency, &mut out)?;
                for (_, cell) in occupants {
                    if let Some(zone) = self.map.zone_of(cell.0, cell.1) {
                        self.zones[zone.index()].last_occupied = Some(tick);
                    }
                }
                self.housekeeping(tick + latency, &mut out)?;
            }
        }
        Ok(out)
    }

    fn set_zone_mode(
        &mut self,
        zone: ZoneId,
        mode: LightingMode,
        ts: u64,
        person: Option<&str>,
        out: &mut Vec<CommandRecord>,
    ) -> Result<(), PipelineError> {
        let name = self.zone_name(zone).to_string();
        let (kind, command) = match &mode {
            LightingMode::Off => (CommandKind::Off, LightingCommand::off(&name)?),
            LightingMode::Default => {
                let l = self.config.default_lighting;
                (
                    CommandKind::Default,
                    LightingCommand::set(&name, l.red, l.green, l.blue, l.intensity)?,
                )
            }
            LightingMode::Profile(p) | LightingMode::Preemptive(p) => {
                let l = self
                    .profiles
                    .get(p)
                    .ok_or_else(|| PipelineError::UnknownProfile(p.clone()))?
                    .lighting;
                let kind = if matches!(mode, LightingMode::Profile(_)) {
                    CommandKind::Profile
                } else {
                    CommandKind::Preemptive
                };
                (
                    kind,
                    LightingCommand::set(&name, l.red, l.green, l.blue, l.intensity)?,
                )
            }
        };
        let rt = &mut self.zones[zone.index()];
        rt.mode = mode;
        rt.mode_since = ts;
        rt.owner_gone_since = None;
        let wire = command.encode();
        self.log_line(
            ts,
            "command",
            &name,
            person.unwrap_or(""),
            wire.trim_end_matches('\n'),
        );
        out.push(CommandRecord {
            ts,
            kind,
            person: person.map(|p| p.to_string()),
            command,
        });
        Ok(())
    }

    /// Convert a mode without emitting a command (values already
    /// applied, e.g. preemptive lighting confirmed by arrival).
    fn silently_set_mode(&mut self, zone: ZoneId, mode: LightingMode, ts: u64) {
        let rt = &mut self.zones[zone.index()];
        rt.mode = mode;
        rt.mode_since = ts;
        rt.owner_gone_since = None;
    }

    fn noisy_estimate(&mut self, cell: (usize, usize), fallback: StateId) -> StateId {
        if self.oracles.noise_sigma == 0.0 {
            return self.mdp.state_at(cell.0, cell.1).unwrap_or(fallback);
        }
        let dr = math::round(self.rng.gaussian() * self.oracles.noise_sigma) as isize;
        let dc = math::round(self.rng.gaussian() * self.oracles.noise_sigma) as isize;
        let r = cell.0 as isize + dr;
        let c = cell.1 as isize + dc;
        if r >= 0 && c >= 0 {
            if let Some(s) = self.mdp.state_at(r as usize, c as usize) {
                return s;
            }
        }
        self.mdp.state_at(cell.0, cell.1).unwrap_or(fallback)
    }

    fn update_tracks(
        &mut self,
        tick: u64,
        occupants: &[(String, (usize, usize))],
        latency: &mut u64,
        out: &mut Vec<CommandRecord>,
    ) -> Result<(), PipelineError> {
        let mut lost: Vec<usize> = Vec::new();
        for i in 0..self.tracks.len() {
            *latency += self.oracles.latency_track_ms;
            let label = self.tracks[i].label.clone();
            let present = occupants.iter().find(|(l, _)| *l == label).map(|(_, c)| *c);
            let seen = match present {
                Some(_) => self.rng.uniform() < self.oracles.p_detect,
                None => false,
            };
            if !seen {
                let ts = tick + *latency;
                self.tracks[i].status = TrackStatus::Lost;
                let zone = self.tracks[i].zone;
                let person = self.describe_identity(&self.tracks[i].believed);
                self.log_line(ts, "status", &self.zone_name(zone).to_string(), &person, "lost");
                lost.push(i);
                continue;
            }
            let cell = present.unwrap();
            let previous = self.tracks[i].cell;
            let raw = self.noisy_estimate(cell, previous);
            let estimate = step_toward(self.mdp, previous, raw);
            self.tracks[i].cell = estimate;
            self.tracks[i].history.push((estimate, tick));
            if self.tracks[i].history.len() > 256 {
                self.tracks[i].history.remove(0);
            }
            self.tracks[i].frames_tracked += 1;

            let (r, c) = self.mdp.cell_of(estimate);
            let new_zone = self.map.zone_of(r, c).expect("estimates stay traversable");
            if new_zone != self.tracks[i].zone {
                self.tracks[i].zone = new_zone;
                if let Identity::Known(person) = self.tracks[i].believed.clone() {
                    self.claim_zone(new_zone, &person, tick + *latency, out)?;
                }
            }

            if let Identity::Known(person) = self.tracks[i].believed.clone() {
                let stride = self.config.forecast.stride_frames;
                if stride > 0
                    && self.forecaster.is_some()
                    && self.tracks[i].frames_tracked % stride == 0
                    && self.tracks[i].history.len() >= 2
                {
                    *latency += self.oracles.latency_forecast_ms;
                    self.run_forecast(i, &person, tick + *latency, out)?;
                }
            }
        }
        for &i in lost.iter().rev() {
            self.tracks.remove(i);
        }
        Ok(())
    }

    fn run_forecast(
        &mut self,
        track_index: usize,
        person: &str,
        ts: u64,
        out: &mut Vec<CommandRecord>,
    ) -> Result<(), PipelineError> {
        let forecaster = self.forecaster.expect("checked by caller");
        let track = &self.tracks[track_index];
        let window_start = track
            .history
            .len()
            .saturating_sub(forecaster.horizon() + 1);
        let history =
            ObservedHistory::from_cells(person.to_string(), &track.history[window_start..], self.mdp)?;
        let config = ForecastConfig {
            samples: self.config.forecast.samples,
            k: self.config.forecast.k,
            points: self.config.forecast.points,
            seed: self.rng.next_u64(),
        };
        let (posterior, set) = forecaster.forecast(&history, self.mdp, &config)?;

        // Highest-weight predicted path; its endpoint is a cell center.
        let mut best = 0;
        for i in 1..set.paths.len() {
            if set.weights[i] > set.weights[best] {
                best = i;
            }
        }
        let (x, y) = *set.paths[best].last().unwrap();
        let (row, col) = (math::round(y) as usize, math::round(x) as usize);
        let target_zone = match self.map.zone_of(row, col) {
            Some(z) => z,
            None => return Ok(()),
        };
        let current_zone = self.tracks[track_index].zone;
        if target_zone == current_zone {
            return Ok(());
        }
        if posterior.weight_of(target_zone) < self.config.forecast.threshold {
            return Ok(());
        }
        let mode = self.zones[target_zone.index()].mode.clone();
        if matches!(mode, LightingMode::Off | LightingMode::Default) {
            self.set_zone_mode(
                target_zone,
                LightingMode::Preemptive(person.to_string()),
                ts,
                Some(person),
                out,
            )?;
        }
        Ok(())
    }

    fn detect_new(
        &mut self,
        tick: u64,
        occupants: &[(String, (usize, usize))],
        latency: &mut u64,
        out: &mut Vec<CommandRecord>,
    ) -> Result<(), PipelineError> {
        for (label, cell) in occupants {
            if self.tracks.iter().any(|t| t.label == *label) {
                continue;
            }
            let zone = match self.map.zone_of(cell.0, cell.1) {
                Some(z) => z,
                None => continue,
            };
            if !self.zones[zone.index()].armed {
                continue;
            }
            *latency += self.oracles.latency_detect_ms;
            if self.rng.uniform() >= self.oracles.p_detect {
                continue;
            }
            let fallback = self.mdp.state_at(cell.0, cell.1).expect("occupants stand on floor");
            let estimate = self.noisy_estimate(*cell, fallback);
            let (er, ec) = self.mdp.cell_of(estimate);
            let est_zone = self.map.zone_of(er, ec).expect("estimates stay traversable");
            let ts_detect = tick + *latency;
            self.log_line(
                ts_detect,
                "status",
                &self.zone_name(est_zone).to_string(),
                "",
                "detected",
            );

            *latency += self.oracles.latency_recognize_ms;
            let ts_ident = tick + *latency;
            let believed = self.recognize(label);
            let person = self.describe_identity(&believed);
            self.log_line(
                ts_ident,
                "status",
                &self.zone_name(est_zone).to_string(),
                &person,
                "identified",
            );

            let track = Track {
                label: label.clone(),
                believed: believed.clone(),
                cell: estimate,
                zone: est_zone,
                history: vec![(estimate, tick)],
                status: TrackStatus::Tracking,
                frames_tracked: 0,
            };
            self.tracks.push(track);

            if let Identity::Known(p) = believed {
                self.claim_zone(est_zone, &p, ts_ident, out)?;
            }
        }
        Ok(())
    }

    fn recognize(&mut self, label: &str) -> Identity {
        if self.profiles.get(label).is_none() {
            return Identity::Unknown;
        }
        if self.rng.uniform() < self.oracles.p_correct_id {
            return Identity::Known(label.to_string());
        }
        // Misrecognition substitutes a uniformly random other enrolled
        // identity (falling back to the true one with a single profile).
        let others: Vec<&str> = self
            .profiles
            .profiles()
            .iter()
            .map(|p| p.person_id.as_str())
            .filter(|id| *id != label)
            .collect();
        if others.is_empty() {
            Identity::Known(label.to_string())
        } else {
            Identity::Known(others[self.rng.index(others.len())].to_string())
        }
    }

    fn describe_identity(&self, identity: &Identity) -> String {
        match identity {
            Identity::Unknown => "unknown".to_string(),
            Identity::Known(p) => p.clone(),
        }
    }

    /// A recognized person arrived in a zone: claim it unless an owner
    /// is present-and-protected.
    fn claim_zone(
        &mut self,
        zone: ZoneId,
        person: &str,
        ts: u64,
        out: &mut Vec<CommandRecord>,
    ) -> Result<(), PipelineError> {
        match self.zones[zone.index()].mode.clone() {
            LightingMode::Profile(owner) if owner == person => {}
            LightingMode::Profile(_) => {
                // Occupied territory: the first resident keeps their
                // lighting until they leave.
                let name = self.zone_name(zone).to_string();
                self.log_line(ts, "status", &name, person, "deferred");
            }
            LightingMode::Preemptive(owner) if owner == person => {
                // Lights already show this person's profile.
                let name = self.zone_name(zone).to_string();
                self.silently_set_mode(zone, LightingMode::Profile(person.to_string()), ts);
                self.log_line(ts, "status", &name, person, "arrived");
            }
            _ => {
                self.set_zone_mode(
                    zone,
                    LightingMode::Profile(person.to_string()),
                    ts,
                    Some(person),
                    out,
                )?;
            }
        }
        Ok(())
    }

    /// Timeout bookkeeping: owner release and lights-off.
    fn housekeeping(&mut self, ts: u64, out: &mut Vec<CommandRecord>) -> Result<(), PipelineError> {
        let timeout = self.config.timeout_ticks;
        for zi in 0..self.zones.len() {
            let zone = ZoneId(zi as u8);
            let mode = self.zones[zi].mode.clone();
            if mode == LightingMode::Off {
                continue;
            }

            // Lights-off: no presence signal (occupancy or mode change)
            // for a full timeout.
            let last_signal = self.zones[zi]
                .last_occupied
                .unwrap_or(0)
                .max(self.zones[zi].mode_since);
            if ts.saturating_sub(last_signal) >= timeout {
                self.set_zone_mode(zone, LightingMode::Off, ts, None, out)?;
                self.zones[zi].armed = false;
                continue;
            }

            // Owner release: the owner has been away for a full timeout.
            if let LightingMode::Profile(owner) = &mode {
                let present = self
                    .tracks
                    .iter()
                    .any(|t| t.zone == zone && t.believed == Identity::Known(owner.clone()));
                if present {
                    self.zones[zi].owner_gone_since = None;
                    continue;
                }
                let gone_since = *self.zones[zi].owner_gone_since.get_or_insert(ts);
                if ts.saturating_sub(gone_since) >= timeout {
                    let successor = self
                        .tracks
                        .iter()
                        .filter(|t| t.zone == zone)
                        .find_map(|t| match &t.believed {
                            Identity::Known(p) => Some(p.clone()),
                            Identity::Unknown => None,
                        });
                    match successor {
                        Some(p) => {
                            self.set_zone_mode(
                                zone,
                                LightingMode::Profile(p.clone()),
                                ts,
                                Some(&p),
                                out,
                            )?;
                        }
                        None => {
                            self.set_zone_mode(zone, LightingMode::Default, ts, None, out)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// One legal move (or stay) from `from` toward `target`; keeps tracked
/// positions 4-adjacent between frames even under estimate noise.
fn step_toward(mdp: &Mdp, from: StateId, target: StateId) -> StateId {
    if target == from || mdp.action_between(from, target).is_some() {
        return target;
    }
    let (fr, fc) = mdp.cell_of(from);
    let (tr, tc) = mdp.cell_of(target);
    let mut best = from;
    let mut best_d = fr.abs_diff(tr) + fc.abs_diff(tc);
    for a in crate::mdp::Action::ALL {
        let next = mdp.step(from, a);
        let (nr, nc) = mdp.cell_of(next);
        let d = nr.abs_diff(tr) + nc.abs_diff(tc);
        if d < best_d {
            best_d = d;
            best = next;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;

    fn two_zone_map() -> GridMap {
        GridMap::parse("######\n#AADB#\n######\n\nA=hall,1,1\nB=bay,1,4\nD=bay,1,3\n").unwrap()
    }

    fn profiles() -> ProfileStore {
        ProfileStore::new(vec![
            ResidentProfile {
                person_id: "alice".into(),
                display_name: "Alice".into(),
                identity_token: "tok-a".into(),
                lighting: LightingSpec {
                    red: 255,
                    green: 221,
                    blue: 85,
                    intensity: 80,
                },
            },
            ResidentProfile {
                person_id: "bob".into(),
                display_name: "Bob".into(),
                identity_token: "tok-b".into(),
                lighting: LightingSpec {
                    red: 255,
                    green: 255,
                    blue: 255,
                    intensity: 70,
                },
            },
        ])
        .unwrap()
    }

    #[test]
    fn duplicate_profile_ids_rejected() {
        let p = ResidentProfile {
            person_id: "alice".into(),
            display_name: "A".into(),
            identity_token: "t".into(),
            lighting: DEFAULT_LIGHTING,
        };
        assert_eq!(
            ProfileStore::new(vec![p.clone(), p]).unwrap_err(),
            PipelineError::DuplicateId("alice".into())
        );
    }

    #[test]
    fn pir_on_dark_zone_emits_exactly_one_default_command() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            SensingOracles::perfect(),
            PipelineConfig::default(),
            1,
        )
        .unwrap();
        let zone = map.zone_named("hall").unwrap().id;
        let out = pipeline
            .process_event(&Event::PirTriggered { tick: 10, zone })
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, CommandKind::Default);
        assert_eq!(out[0].command.encode(), "SET hall 255 255 255 60\n");
        // A second trigger on a lit zone changes nothing.
        let out = pipeline
            .process_event(&Event::PirTriggered { tick: 20, zone })
            .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn recognized_resident_gets_profile_lighting_and_keeps_it() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            SensingOracles::perfect(),
            PipelineConfig::default(),
            1,
        )
        .unwrap();
        let zone = map.zone_named("hall").unwrap().id;
        pipeline
            .process_event(&Event::PirTriggered { tick: 0, zone })
            .unwrap();
        let out = pipeline
            .process_event(&Event::Frame {
                tick: 42,
                occupants: vec![("alice".into(), (1, 1))],
            })
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, CommandKind::Profile);
        assert_eq!(out[0].person.as_deref(), Some("alice"));
        assert_eq!(out[0].command.encode(), "SET hall 255 221 85 80\n");

        // Bob walks into Alice's zone: no command.
        let out = pipeline
            .process_event(&Event::Frame {
                tick: 84,
                occupants: vec![("alice".into(), (1, 1)), ("bob".into(), (1, 2))],
            })
            .unwrap();
        assert!(out.is_empty());
        assert_eq!(
            pipeline.zone_mode(zone),
            &LightingMode::Profile("alice".into())
        );
    }

    #[test]
    fn unknown_person_leaves_default_lighting() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            SensingOracles::perfect(),
            PipelineConfig::default(),
            1,
        )
        .unwrap();
        let zone = map.zone_named("hall").unwrap().id;
        pipeline
            .process_event(&Event::PirTriggered { tick: 0, zone })
            .unwrap();
        let out = pipeline
            .process_event(&Event::Frame {
                tick: 42,
                occupants: vec![("stranger".into(), (1, 1))],
            })
            .unwrap();
        assert!(out.is_empty());
        assert_eq!(pipeline.zone_mode(zone), &LightingMode::Default);
    }

    #[test]
    fn stale_events_rejected() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            SensingOracles::perfect(),
            PipelineConfig::default(),
            1,
        )
        .unwrap();
        pipeline.process_event(&Event::Tick { tick: 100 }).unwrap();
        assert_eq!(
            pipeline.process_event(&Event::Tick { tick: 99 }),
            Err(PipelineError::StaleEvent { event: 99, now: 100 })
        );
    }

    #[test]
    fn empty_zone_turns_off_exactly_once() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let config = PipelineConfig {
            timeout_ticks: 100,
            ..PipelineConfig::default()
        };
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            SensingOracles::perfect(),
            config,
            1,
        )
        .unwrap();
        let zone = map.zone_named("hall").unwrap().id;
        pipeline
            .process_event(&Event::PirTriggered { tick: 0, zone })
            .unwrap();
        let out = pipeline.process_event(&Event::Tick { tick: 99 }).unwrap();
        assert!(out.is_empty());
        let out = pipeline.process_event(&Event::Tick { tick: 100 }).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, CommandKind::Off);
        let out = pipeline.process_event(&Event::Tick { tick: 300 }).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn misrecognition_applies_the_other_profile() {
        let map = two_zone_map();
        let mdp = Mdp::build(&map);
        let store = profiles();
        let mut oracles = SensingOracles::perfect();
        oracles.p_correct_id = 0.0;
        let mut pipeline = Pipeline::new(
            &map,
            &mdp,
            &store,
            None,
            oracles,
            PipelineConfig::default(),
            1,
        )
        .unwrap();
        let zone = map.zone_named("hall").unwrap().id;
        pipeline
            .process_event(&Event::PirTriggered { tick: 0, zone })
            .unwrap();
        let out = pipeline
            .process_event(&Event::Frame {
                tick: 42,
                occupants: vec![("alice".into(), (1, 1))],
            })
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].person.as_deref(), Some("bob"));
        assert_eq!(out[0].command.encode(), "SET hall 255 255 255 70\n");
    }
}
