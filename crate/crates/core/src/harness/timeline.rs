//! Wall-clock replay of an episode as two lanes (worker, robot).
//!
//! Joint step `k` starts at `T`. The robot plans, then acts; a restock is a
//! search followed by a bring. The worker moves at `T`, or once the bring
//! ends when the robot restocked. The next step starts when both lanes are
//! free.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{run_episode, EpisodeConfig, EpisodeResult, HarnessError};
use crate::domain::{RobotAction, ScenarioSpec, WorkerEvent};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Durations {
    pub observe: f64,
    pub plan: f64,
    pub search: f64,
    pub bring: f64,
    pub wait: f64,
    /// Length of one worker move.
    pub assemble: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self {
            observe: 5.0,
            plan: 10.0,
            search: 30.0,
            bring: 35.0,
            wait: 5.0,
            assemble: 30.0,
        }
    }
}

impl Durations {
    /// Parses `kind=seconds,...` over the defaults.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut d = Self::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("expected kind=seconds, got `{item}`"))?;
            let secs: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("bad duration `{v}` for `{k}`"))?;
            if !(secs.is_finite() && secs > 0.0) {
                return Err(format!("duration for `{k}` must be positive"));
            }
            let slot = match k.trim() {
                "observe" => &mut d.observe,
                "plan" => &mut d.plan,
                "search" => &mut d.search,
                "bring" => &mut d.bring,
                "wait" => &mut d.wait,
                "assemble" => &mut d.assemble,
                other => return Err(format!("unknown duration kind `{other}`")),
            };
            *slot = secs;
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Worker,
    Robot,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelineEvent {
    pub t: f64,
    pub actor: Actor,
    pub kind: &'static str,
    pub part: Option<String>,
    pub step: u32,
    pub reward: f64,
    pub duration: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TimelineSummary {
    pub total_time: f64,
    /// Worker time spent blocked on missing parts or waiting for a delivery.
    pub worker_waiting: f64,
    pub robot_search_bring: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimelineRun {
    pub episode: EpisodeResult,
    pub events: Vec<TimelineEvent>,
    pub summary: TimelineSummary,
}

pub(crate) fn schedule(spec: &ScenarioSpec, episode: &EpisodeResult, d: &Durations) -> (Vec<TimelineEvent>, TimelineSummary) {
    let mut events = Vec::new();
    let mut summary = TimelineSummary::default();
    let mut t = 0.0;
    let label = |p| Some(spec.label(p).to_string());
    for entry in &episode.event_log {
        let step = entry.step;
        let mut robot = |t: f64, kind, part, reward, duration| {
            events.push(TimelineEvent {
                t,
                actor: Actor::Robot,
                kind,
                part,
                step,
                reward,
                duration,
            });
            t + duration
        };
        let mut r_end = robot(t, "plan", None, 0.0, d.plan);
        let restocked = match entry.action {
            RobotAction::ObserveInventory(p) | RobotAction::ObserveWorkspace(p) => {
                r_end = robot(r_end, "observe", label(p), entry.robot_reward, d.observe);
                false
            }
            RobotAction::Wait => {
                r_end = robot(r_end, "wait", None, entry.robot_reward, d.wait);
                false
            }
            RobotAction::Restock(p) => {
                r_end = robot(r_end, "search", label(p), 0.0, d.search);
                r_end = robot(r_end, "bring", label(p), entry.robot_reward, d.bring);
                summary.robot_search_bring += d.search + d.bring;
                true
            }
        };
        let w_start = if restocked { r_end } else { t };
        let worker_reward = entry.reward - entry.robot_reward;
        let (kind, part) = match entry.worker_events.first() {
            Some(WorkerEvent::Assembled(p)) => ("assemble", label(*p)),
            Some(WorkerEvent::Removed(p)) => ("remove", label(*p)),
            Some(WorkerEvent::Blocked) => {
                summary.worker_waiting += d.assemble;
                ("wait", None)
            }
            _ => ("wait", None),
        };
        if restocked && matches!(entry.worker_events.first(), Some(WorkerEvent::Blocked) | None) {
            summary.worker_waiting += w_start - t;
        }
        events.push(TimelineEvent {
            t: w_start,
            actor: Actor::Worker,
            kind,
            part,
            step,
            reward: worker_reward,
            duration: d.assemble,
        });
        t = r_end.max(w_start + d.assemble);
    }
    summary.total_time = t;
    (events, summary)
}

/// Runs one episode and lays it out on a wall clock.
pub fn timeline_run(
    spec: &ScenarioSpec,
    cfg: &EpisodeConfig,
    seed: u64,
    durations: &Durations,
) -> Result<TimelineRun, HarnessError> {
    let episode = run_episode(spec, cfg, seed)?;
    let (events, summary) = schedule(spec, &episode, durations);
    Ok(TimelineRun {
        episode,
        events,
        summary,
    })
}

/// One JSON object per event, keys `t,actor,kind,part,step,reward,duration`.
pub fn write_jsonl<W: Write>(events: &[TimelineEvent], mut out: W) -> Result<(), HarnessError> {
    for e in events {
        serde_json::to_writer(&mut out, e).map_err(|err| HarnessError::Format(err.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Count of restocks per part label.
pub fn restock_counts(spec: &ScenarioSpec, episode: &EpisodeResult) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for e in &episode.event_log {
        if let RobotAction::Restock(p) = e.action {
            *m.entry(spec.label(p).to_string()).or_insert(0) += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use crate::domain::Observation;
    use crate::harness::LogEntry;

    fn entry(step: u32, action: RobotAction, events: Vec<WorkerEvent>, robot_reward: f64, reward: f64) -> LogEntry {
        LogEntry {
            step,
            action,
            observation: Observation::Null,
            worker_events: events,
            reward,
            robot_reward,
            type_posterior: vec![0.5, 0.5],
        }
    }

    fn episode(log: Vec<LogEntry>) -> EpisodeResult {
        EpisodeResult {
            discounted_return: 0.0,
            undiscounted_return: 0.0,
            steps: log.len() as u32,
            completed: false,
            true_intent: 0,
            failure: None,
            event_log: log,
        }
    }

    #[test]
    fn duration_parsing() {
        let d = Durations::parse("observe=2, bring=40").unwrap();
        assert_eq!((d.observe, d.bring, d.plan), (2.0, 40.0, 10.0));
        assert!(Durations::parse("observe=-1").is_err());
        assert!(Durations::parse("teleport=1").is_err());
        assert!(Durations::parse("observe").is_err());
    }

    #[test]
    fn assembly_cadence_and_restock_pairs() {
        let spec = config::demo_six();
        let p = |l| spec.part_by_label(l).unwrap();
        let log = vec![
            entry(0, RobotAction::ObserveWorkspace(p("red")), vec![WorkerEvent::Assembled(p("red"))], -0.5, 1.5),
            entry(1, RobotAction::ObserveInventory(p("yellow")), vec![WorkerEvent::Assembled(p("purple"))], -0.5, 1.5),
            entry(2, RobotAction::Wait, vec![WorkerEvent::Assembled(p("magenta"))], 0.0, 2.0),
            entry(3, RobotAction::Restock(p("yellow")), vec![WorkerEvent::Assembled(p("yellow"))], 2.0, 4.0),
        ];
        let (events, summary) = schedule(&spec, &episode(log), &Durations::default());
        let assembles: Vec<_> = events.iter().filter(|e| e.kind == "assemble").collect();
        assert_eq!(assembles[0].t, 0.0);
        assert_eq!(assembles[1].t - assembles[0].t, 30.0);
        assert_eq!(assembles[2].t - assembles[1].t, 30.0);
        // Third step starts at 90; the yellow assembly waits for the bring.
        assert_eq!(assembles[3].t, 90.0 + 10.0 + 30.0 + 35.0);
        assert!(assembles.iter().all(|e| e.duration == 30.0));
        let search: Vec<_> = events.iter().filter(|e| e.kind == "search").collect();
        let bring: Vec<_> = events.iter().filter(|e| e.kind == "bring").collect();
        assert_eq!(search.len(), 1);
        assert_eq!(search[0].part, bring[0].part);
        assert_eq!(summary.robot_search_bring, 65.0);
        assert_eq!(summary.total_time, 165.0 + 30.0);
    }

    #[test]
    fn lanes_are_monotone_and_jsonl_keys() {
        let spec = config::demo_six();
        let cfg = EpisodeConfig {
            planner: crate::planner::PlannerConfig::with_variant(crate::planner::Variant::Relevance, 128),
            particles: 500,
            ..Default::default()
        };
        let run = timeline_run(&spec, &cfg, 3, &Durations::default()).unwrap();
        for actor in [Actor::Worker, Actor::Robot] {
            let ts: Vec<f64> = run.events.iter().filter(|e| e.actor == actor).map(|e| e.t).collect();
            assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        }
        let restocks: usize = restock_counts(&spec, &run.episode).values().sum();
        assert_eq!(run.events.iter().filter(|e| e.kind == "bring").count(), restocks);

        let mut buf = Vec::new();
        write_jsonl(&run.events, &mut buf).unwrap();
        let first = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
        let v: serde_json::Value = serde_json::from_str(&first).unwrap();
        for key in ["t", "actor", "kind", "part", "step", "reward"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
