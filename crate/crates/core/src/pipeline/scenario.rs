//! Scripted scenarios: residents entering, walking waypoint routes,
//! dwelling and leaving, replayed as a deterministic event stream.
//!
//! Movement advances one cell per frame along breadth-first shortest
//! paths (tie-broken in fixed action order). Within a tick, the frame
//! event precedes PIR events, so an entry on a frame boundary is first
//! seen one full interval later. An episode measures the span from a
//! person's entry PIR to the first profile command applied for them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::forecast::Forecaster;
use crate::grid::{GridMap, ZoneId};
use crate::mdp::{Action, Mdp};
use crate::pipeline::{
    CommandKind, CommandRecord, Event, ForecastSettings, LightingSpec, Pipeline, PipelineConfig,
    PipelineError, ProfileStore, SensingOracles,
};

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

#[cfg(feature = "serde")]
fn default_timeout() -> u64 {
    1000
}

/// One waypoint plus how many frames to linger there.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouteStop {
    /// `(row, col)`.
    pub cell: (usize, usize),
    #[cfg_attr(feature = "serde", serde(default))]
    pub dwell_frames: u32,
}

/// A scripted person: enters at a tick, walks the route, then leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScriptedResident {
    pub profile: String,
    /// Unenrolled visitors exercise the unknown-person path.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub enrolled: bool,
    pub entry_tick: u64,
    pub route: Vec<RouteStop>,
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub leaves: bool,
}

/// A replayable simulation script.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub frame_interval: u64,
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default = "default_timeout"))]
    pub timeout_ticks: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub oracles: SensingOracles,
    #[cfg_attr(feature = "serde", serde(default))]
    pub forecast: ForecastSettings,
    #[cfg_attr(feature = "serde", serde(default = "super::default_lighting"))]
    pub default_lighting: LightingSpec,
    pub residents: Vec<ScriptedResident>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub end_tick: Option<u64>,
}

impl Scenario {
    fn validate(&self, map: &GridMap) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::InvalidScenario(msg));
        if self.frame_interval == 0 {
            return bad("frame_interval must be >= 1".into());
        }
        if self.timeout_ticks == 0 {
            return bad("timeout_ticks must be >= 1".into());
        }
        self.oracles.validate()?;
        self.default_lighting.validate()?;
        for resident in &self.residents {
            if resident.route.is_empty() {
                return bad(format!("resident '{}' has an empty route", resident.profile));
            }
            for stop in &resident.route {
                let (r, c) = stop.cell;
                if r >= map.height() || c >= map.width() || !map.is_traversable(r, c) {
                    return bad(format!(
                        "resident '{}' waypoint ({r},{c}) is not traversable",
                        resident.profile
                    ));
                }
            }
            if !resident.leaves && self.end_tick.is_none() {
                return bad(format!(
                    "resident '{}' never leaves; an explicit end_tick is required",
                    resident.profile
                ));
            }
        }
        Ok(())
    }
}

/// An entry PIR to profile-command span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub person: String,
    pub pir_tick: u64,
    pub applied_ts: u64,
    pub latency_ms: u64,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    /// Newline-delimited `tick,kind,zone,person,detail` records.
    pub log: String,
    pub episodes: Vec<EpisodeRecord>,
    pub commands: Vec<CommandRecord>,
}

impl ScenarioReport {
    pub fn latency_mean(&self) -> Option<f64> {
        if self.episodes.is_empty() {
            return None;
        }
        let total: u64 = self.episodes.iter().map(|e| e.latency_ms).sum();
        Some(total as f64 / self.episodes.len() as f64)
    }

    pub fn latency_max(&self) -> Option<u64> {
        self.episodes.iter().map(|e| e.latency_ms).max()
    }

    pub fn latency_csv(&self) -> String {
        let mut out = String::from("person,pir_tick,applied_tick,latency_ms\n");
        for e in &self.episodes {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.person, e.pir_tick, e.applied_ts, e.latency_ms
            ));
        }
        if let (Some(mean), Some(max)) = (self.latency_mean(), self.latency_max()) {
            out.push_str(&format!("mean,,,{mean:.3}\n"));
            out.push_str(&format!("max,,,{max}\n"));
        }
        out
    }

    /// The wire lines of all emitted commands, in order.
    pub fn command_lines(&self) -> Vec<String> {
        self.commands
            .iter()
            .map(|c| c.command.encode().trim_end_matches('\n').to_string())
            .collect()
    }
}

struct PersonSim<'a> {
    script: &'a ScriptedResident,
    stop: usize,
    pos: (usize, usize),
    dwell_left: u32,
    alive: bool,
}

struct Router<'a> {
    map: &'a GridMap,
    dist_fields: BTreeMap<(usize, usize), Vec<u32>>,
}

impl<'a> Router<'a> {
    fn new(map: &'a GridMap) -> Self {
        Router {
            map,
            dist_fields: BTreeMap::new(),
        }
    }

    fn dist_field(&mut self, target: (usize, usize)) -> &Vec<u32> {
        let map = self.map;
        self.dist_fields.entry(target).or_insert_with(|| {
            let w = map.width();
            let mut dist = alloc::vec![u32::MAX; w * map.height()];
            let mut queue = alloc::collections::VecDeque::new();
            dist[target.0 * w + target.1] = 0;
            queue.push_back(target);
            while let Some((r, c)) = queue.pop_front() {
                for (nr, nc) in map.neighbors4(r, c) {
                    if map.is_traversable(nr, nc) && dist[nr * w + nc] == u32::MAX {
                        dist[nr * w + nc] = dist[r * w + c] + 1;
                        queue.push_back((nr, nc));
                    }
                }
            }
            dist
        })
    }

    /// One shortest-path step, fixed Up/Down/Left/Right tie-break.
    fn step(&mut self, from: (usize, usize), target: (usize, usize)) -> (usize, usize) {
        if from == target {
            return from;
        }
        let w = self.map.width();
        let h = self.map.height();
        let candidates: Vec<(usize, usize)> = Action::ALL
            .iter()
            .filter_map(|action| {
                let (dr, dc) = match action {
                    Action::Up => (-1isize, 0isize),
                    Action::Down => (1, 0),
                    Action::Left => (0, -1),
                    Action::Right => (0, 1),
                };
                let nr = from.0 as isize + dr;
                let nc = from.1 as isize + dc;
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    return None;
                }
                let cell = (nr as usize, nc as usize);
                self.map.is_traversable(cell.0, cell.1).then_some(cell)
            })
            .collect();
        let dist = self.dist_field(target);
        let here = dist[from.0 * w + from.1];
        for (nr, nc) in candidates {
            if dist[nr * w + nc] < here {
                return (nr, nc); // first strictly-improving action wins
            }
        }
        from
    }
}

/// Expand the script into the totally ordered event stream.
///
/// Returns the events plus each resident's entry PIR `(person, tick)`.
pub fn expand_events(
    scenario: &Scenario,
    map: &GridMap,
) -> Result<(Vec<Event>, Vec<(String, u64)>), PipelineError> {
    scenario.validate(map)?;
    let interval = scenario.frame_interval;
    let mut router = Router::new(map);
    let mut people: Vec<PersonSim> = scenario
        .residents
        .iter()
        .map(|r| PersonSim {
            script: r,
            stop: 0,
            pos: r.route[0].cell,
            dwell_left: r.route[0].dwell_frames,
            alive: true,
        })
        .collect();

    let zone_at = |pos: (usize, usize)| -> ZoneId {
        map.zone_of(pos.0, pos.1).expect("validated traversable")
    };

    // (tick, order-within-tick, event)
    let mut timeline: Vec<(u64, u8, Event)> = Vec::new();
    let mut entries: Vec<(String, u64)> = Vec::new();
    for person in &people {
        let tick = person.script.entry_tick;
        timeline.push((
            tick,
            1,
            Event::PirTriggered {
                tick,
                zone: zone_at(person.pos),
            },
        ));
        entries.push((person.script.profile.clone(), tick));
    }

    let mut last_activity: u64 = scenario
        .residents
        .iter()
        .map(|r| r.entry_tick)
        .max()
        .unwrap_or(0);
    let hard_cap = scenario.end_tick.unwrap_or(u64::MAX);
    let mut frame = 0u64;
    loop {
        let tick = frame * interval;
        if tick > hard_cap {
            break;
        }
        // Movement first: a frame captures positions as of its tick.
        for person in people.iter_mut() {
            if !person.alive || tick <= person.script.entry_tick {
                continue;
            }
            if person.dwell_left > 0 {
                person.dwell_left -= 1;
                continue;
            }
            if person.stop + 1 >= person.script.route.len() {
                if person.script.leaves {
                    person.alive = false;
                    last_activity = last_activity.max(tick);
                }
                continue;
            }
            let target = person.script.route[person.stop + 1].cell;
            let old_zone = zone_at(person.pos);
            person.pos = router.step(person.pos, target);
            last_activity = last_activity.max(tick);
            if person.pos == target {
                person.stop += 1;
                person.dwell_left = person.script.route[person.stop].dwell_frames;
            }
            let new_zone = zone_at(person.pos);
            if new_zone != old_zone {
                timeline.push((tick, 1, Event::PirTriggered { tick, zone: new_zone }));
            }
        }
        let occupants: Vec<(String, (usize, usize))> = people
            .iter()
            .filter(|p| p.alive && p.script.entry_tick <= tick)
            .map(|p| (p.script.profile.clone(), p.pos))
            .collect();
        timeline.push((tick, 0, Event::Frame { tick, occupants }));

        let everyone_done = people.iter().all(|p| !p.alive);
        let end = scenario
            .end_tick
            .unwrap_or(last_activity + scenario.timeout_ticks + 3 * interval);
        if tick >= end && (everyone_done || scenario.end_tick.is_some()) {
            break;
        }
        frame += 1;
        if frame > 2_000_000 {
            return Err(PipelineError::InvalidScenario(
                "scenario never terminates".to_string(),
            ));
        }
    }

    timeline.sort_by_key(|(tick, order, _)| (*tick, *order));
    let events = timeline.into_iter().map(|(_, _, e)| e).collect();
    Ok((events, entries))
}

/// Replay a scenario through the pipeline and collect the log, the
/// command trace, and per-entry episode latencies.
pub fn run_scenario(
    scenario: &Scenario,
    map: &GridMap,
    mdp: &Mdp,
    profiles: &ProfileStore,
    forecaster: Option<&Forecaster>,
) -> Result<ScenarioReport, PipelineError> {
    for resident in &scenario.residents {
        if resident.enrolled && profiles.get(&resident.profile).is_none() {
            return Err(PipelineError::UnknownProfile(resident.profile.clone()));
        }
    }
    if scenario.forecast.stride_frames > 0 && forecaster.is_none() {
        return Err(PipelineError::InvalidScenario(
            "forecasting enabled but no trained model supplied".to_string(),
        ));
    }
    let (events, entries) = expand_events(scenario, map)?;
    let config = PipelineConfig {
        default_lighting: scenario.default_lighting,
        timeout_ticks: scenario.timeout_ticks,
        forecast: scenario.forecast.clone(),
    };
    let mut pipeline = Pipeline::new(
        map,
        mdp,
        profiles,
        forecaster,
        scenario.oracles.clone(),
        config,
        scenario.seed,
    )?;

    let mut pending: BTreeMap<String, u64> = entries.into_iter().collect();
    let mut episodes = Vec::new();
    let mut commands = Vec::new();
    for event in &events {
        let records = pipeline.process_event(event)?;
        for record in records {
            if record.kind == CommandKind::Profile {
                if let Some(person) = &record.person {
                    if let Some(pir_tick) = pending.remove(person) {
                        let latency = record.ts.saturating_sub(pir_tick);
                        pipeline.push_log(format!(
                            "{},episode,{},{},{}",
                            record.ts,
                            record.command.zone(),
                            person,
                            latency
                        ));
                        episodes.push(EpisodeRecord {
                            person: person.clone(),
                            pir_tick,
                            applied_ts: record.ts,
                            latency_ms: latency,
                        });
                    }
                }
            }
            commands.push(record);
        }
    }

    let mut log = pipeline.log_lines().join("\n");
    log.push('\n');
    Ok(ScenarioReport {
        log,
        episodes,
        commands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::pipeline::{ResidentProfile, DEFAULT_LIGHTING};

    fn map() -> GridMap {
        GridMap::parse("######\n#AADB#\n######\n\nA=hall,1,1\nB=bay,1,4\nD=bay,1,3\n").unwrap()
    }

    fn store() -> ProfileStore {
        ProfileStore::new(alloc::vec![ResidentProfile {
            person_id: "alice".into(),
            display_name: "Alice".into(),
            identity_token: "tok-a".into(),
            lighting: LightingSpec {
                red: 10,
                green: 20,
                blue: 30,
                intensity: 40,
            },
        }])
        .unwrap()
    }

    fn basic_scenario() -> Scenario {
        Scenario {
            frame_interval: 42,
            seed: 5,
            timeout_ticks: 200,
            oracles: SensingOracles {
                p_detect: 1.0,
                noise_sigma: 0.0,
                p_correct_id: 1.0,
                ..SensingOracles::default()
            },
            forecast: ForecastSettings {
                stride_frames: 0,
                ..ForecastSettings::default()
            },
            default_lighting: DEFAULT_LIGHTING,
            residents: alloc::vec![ScriptedResident {
                profile: "alice".into(),
                enrolled: true,
                entry_tick: 84,
                route: alloc::vec![
                    RouteStop {
                        cell: (1, 1),
                        dwell_frames: 0,
                    },
                    RouteStop {
                        cell: (1, 2),
                        dwell_frames: 3,
                    },
                ],
                leaves: true,
            }],
            end_tick: None,
        }
    }

    #[test]
    fn frames_precede_pirs_at_the_same_tick() {
        let map = map();
        let (events, entries) = expand_events(&basic_scenario(), &map).unwrap();
        assert_eq!(entries, alloc::vec![("alice".to_string(), 84)]);
        let at_84: Vec<&Event> = events.iter().filter(|e| e.tick() == 84).collect();
        assert!(matches!(at_84[0], Event::Frame { .. }));
        assert!(matches!(at_84[1], Event::PirTriggered { .. }));
        // The entry frame already shows the person.
        if let Event::Frame { occupants, .. } = at_84[0] {
            assert_eq!(occupants.len(), 1);
            assert_eq!(occupants[0].1, (1, 1));
        }
    }

    #[test]
    fn episode_is_one_interval_plus_stage_latencies() {
        let map = map();
        let mdp = Mdp::build(&map);
        let profiles = store();
        let report = run_scenario(&basic_scenario(), &map, &mdp, &profiles, None).unwrap();
        // Entry on a frame boundary: seen on the next frame. Perfect
        // oracles with default latencies: 45 (detect) + 58 (recognize).
        assert_eq!(report.episodes.len(), 1);
        let episode = &report.episodes[0];
        assert_eq!(episode.latency_ms, 42 + 45 + 58);
        assert_eq!(report.latency_max(), Some(145));
    }

    #[test]
    fn zero_latency_episode_is_exactly_one_interval() {
        let map = map();
        let mdp = Mdp::build(&map);
        let profiles = store();
        let mut scenario = basic_scenario();
        scenario.oracles = SensingOracles::perfect();
        let report = run_scenario(&scenario, &map, &mdp, &profiles, None).unwrap();
        assert_eq!(report.episodes[0].latency_ms, scenario.frame_interval);
    }

    #[test]
    fn replay_is_byte_identical() {
        let map = map();
        let mdp = Mdp::build(&map);
        let profiles = store();
        let a = run_scenario(&basic_scenario(), &map, &mdp, &profiles, None).unwrap();
        let b = run_scenario(&basic_scenario(), &map, &mdp, &profiles, None).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.latency_csv(), b.latency_csv());
    }

    #[test]
    fn unknown_profile_rejected() {
        let map = map();
        let mdp = Mdp::build(&map);
        let profiles = store();
        let mut scenario = basic_scenario();
        scenario.residents[0].profile = "nobody".into();
        assert_eq!(
            run_scenario(&scenario, &map, &mdp, &profiles, None).unwrap_err(),
            PipelineError::UnknownProfile("nobody".into())
        );
    }

    #[test]
    fn lights_turn_off_after_departure() {
        let map = map();
        let mdp = Mdp::build(&map);
        let profiles = store();
        let report = run_scenario(&basic_scenario(), &map, &mdp, &profiles, None).unwrap();
        let offs: Vec<&CommandRecord> = report
            .commands
            .iter()
            .filter(|c| c.kind == CommandKind::Off)
            .collect();
        assert_eq!(offs.len(), 1);
        assert_eq!(offs[0].command.encode(), "OFF hall\n");
        // And it is the final command.
        assert_eq!(
            report.commands.last().unwrap().command.encode(),
            "OFF hall\n"
        );
    }
}
