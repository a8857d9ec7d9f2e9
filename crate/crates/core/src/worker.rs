//! Stochastic task model of the human worker.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{is_completed, is_terminal, JointState, PartId, PartSet, ScenarioSpec, WorkerEvent};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkerParams {
    pub p_pause: f64,
    pub p_mistake: f64,
}

impl Default for WorkerParams {
    fn default() -> Self {
        Self {
            p_pause: 0.1,
            p_mistake: 0.05,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum StepError {
    #[error("transition requested from a terminal state")]
    CalledOnTerminalState,
}

/// Result of one worker move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkerStep {
    pub event: WorkerEvent,
    /// The move finished the hotel (reported alongside `Assembled`).
    pub completed: bool,
    pub next: JointState,
    pub reward: f64,
}

impl WorkerStep {
    pub fn events(&self) -> Vec<WorkerEvent> {
        let mut v = vec![self.event];
        if self.completed {
            v.push(WorkerEvent::Completed);
        }
        v
    }
}

#[inline]
pub(crate) fn pick_uniform<R: Rng + ?Sized>(set: PartSet, rng: &mut R) -> PartId {
    let k = rng.random_range(0..set.len());
    set.nth(k).expect("index within set size")
}

fn assemble(s: &JointState, p: PartId, spec: &ScenarioSpec, useful: bool) -> WorkerStep {
    let mut next = *s;
    next.available = next.available.without(p);
    next.assembled = next.assembled.with(p);
    let completed = useful && is_completed(&next, spec);
    let mut reward = if useful { spec.rewards.worker_assembled } else { 0.0 };
    if completed {
        reward += spec.rewards.hotel_completed;
    }
    WorkerStep {
        event: WorkerEvent::Assembled(p),
        completed,
        next,
        reward,
    }
}

fn remove(s: &JointState, p: PartId) -> WorkerStep {
    let mut next = *s;
    next.assembled = next.assembled.without(p);
    next.available = next.available.with(p);
    WorkerStep {
        event: WorkerEvent::Removed(p),
        completed: false,
        next,
        reward: 0.0,
    }
}

fn idle(s: &JointState, event: WorkerEvent, reward: f64) -> WorkerStep {
    WorkerStep {
        event,
        completed: false,
        next: *s,
        reward,
    }
}

/// Samples one worker move. Branches in priority order: pause, remove a wrong
/// part, mistake (probability `p_mistake` of the whole mass, i.e.
/// `p_mistake / (1 - p_pause)` given no pause), progress, blocked.
///
/// The step counter is left untouched; the joint step advances it.
pub fn worker_step<R: Rng + ?Sized>(
    s: &JointState,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Result<WorkerStep, StepError> {
    if is_terminal(s, spec) {
        return Err(StepError::CalledOnTerminalState);
    }
    Ok(sample_move(s, spec, rng))
}

#[inline]
pub(crate) fn sample_move<R: Rng + ?Sized>(s: &JointState, spec: &ScenarioSpec, rng: &mut R) -> WorkerStep {
    let params = spec.worker;
    let u: f64 = rng.random();
    if u < params.p_pause {
        return idle(s, WorkerEvent::Paused, 0.0);
    }
    let required = spec.required(s.intent());
    let wrong = s.assembled.difference(required);
    if !wrong.is_empty() {
        return remove(s, pick_uniform(wrong, rng));
    }
    let distractors = s.available.difference(required);
    if !distractors.is_empty() && u < params.p_pause + params.p_mistake {
        return assemble(s, pick_uniform(distractors, rng), spec, false);
    }
    let needed = required.difference(s.assembled).intersection(s.available);
    if !needed.is_empty() {
        return assemble(s, pick_uniform(needed, rng), spec, true);
    }
    idle(s, WorkerEvent::Blocked, spec.rewards.worker_blocked)
}

/// A move chosen by a human playing the worker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkerMove {
    Assemble(PartId),
    Remove(PartId),
    Pause,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IllegalMove {
    #[error("`{0}` is not in the inventory")]
    NotAvailable(String),
    #[error("`{0}` is not assembled")]
    NotAssembled(String),
    #[error("the hotel is already finished")]
    Terminal,
}

/// Applies a chosen worker move with the same rewards as the stochastic
/// model. Pausing while every needed part is missing counts as blocked.
pub fn apply_worker_move(
    s: &JointState,
    mv: WorkerMove,
    spec: &ScenarioSpec,
) -> Result<WorkerStep, IllegalMove> {
    if is_terminal(s, spec) {
        return Err(IllegalMove::Terminal);
    }
    let required = spec.required(s.intent());
    match mv {
        WorkerMove::Assemble(p) if !s.available.contains(p) => {
            Err(IllegalMove::NotAvailable(spec.label(p).to_string()))
        }
        WorkerMove::Assemble(p) => {
            let useful = required.contains(p) && s.assembled.difference(required).is_empty();
            Ok(assemble(s, p, spec, useful))
        }
        WorkerMove::Remove(p) if !s.assembled.contains(p) => {
            Err(IllegalMove::NotAssembled(spec.label(p).to_string()))
        }
        WorkerMove::Remove(p) => Ok(remove(s, p)),
        WorkerMove::Pause => {
            let wrong = s.assembled.difference(required);
            let needed = required.difference(s.assembled);
            if wrong.is_empty() && needed.intersection(s.available).is_empty() {
                Ok(idle(s, WorkerEvent::Blocked, spec.rewards.worker_blocked))
            } else {
                Ok(idle(s, WorkerEvent::Paused, 0.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use crate::domain::validate_spec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec_with(p_pause: f64, p_mistake: f64) -> ScenarioSpec {
        let mut raw = config::bench_small().to_config();
        raw.worker = WorkerParams { p_pause, p_mistake };
        validate_spec(&raw).unwrap()
    }

    fn part(spec: &ScenarioSpec, l: &str) -> PartId {
        spec.part_by_label(l).unwrap()
    }

    #[test]
    fn single_enabled_branch_assembles() {
        let spec = spec_with(0.0, 0.0);
        let req = spec.required(0);
        let yellow = part(&spec, "yellow");
        let red = part(&spec, "red");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Only yellow missing from the workspace, and available.
        let s = JointState {
            available: PartSet::EMPTY.with(yellow),
            assembled: req.without(yellow),
            intent: 0,
            step: 0,
        };
        let out = worker_step(&s, &spec, &mut rng).unwrap();
        assert_eq!(out.event, WorkerEvent::Assembled(yellow));
        assert!(out.completed);
        assert_eq!(out.reward, 7.0);
        assert_eq!(out.events(), vec![WorkerEvent::Assembled(yellow), WorkerEvent::Completed]);

        // Not the last one: +2 only.
        let s = JointState {
            available: PartSet::EMPTY.with(yellow).with(red),
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        let out = worker_step(&s, &spec, &mut rng).unwrap();
        assert!(matches!(out.event, WorkerEvent::Assembled(_)));
        assert!(!out.completed);
        assert_eq!(out.reward, 2.0);
    }

    #[test]
    fn blocked_when_nothing_needed_is_available() {
        let spec = spec_with(0.0, 0.0);
        let orange = part(&spec, "orange");
        let s = JointState {
            available: PartSet::EMPTY.with(orange),
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        let out = worker_step(&s, &spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(out.event, WorkerEvent::Blocked);
        assert_eq!(out.reward, -2.0);
        assert_eq!(out.next, s);
    }

    #[test]
    fn wrong_part_is_removed_first() {
        let spec = spec_with(0.0, 0.5);
        let orange = part(&spec, "orange");
        let yellow = part(&spec, "yellow");
        let s = JointState {
            available: PartSet::EMPTY.with(yellow),
            assembled: PartSet::EMPTY.with(orange),
            intent: 0,
            step: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let out = worker_step(&s, &spec, &mut rng).unwrap();
            assert_eq!(out.event, WorkerEvent::Removed(orange));
            assert_eq!(out.reward, 0.0);
            assert!(out.next.available.contains(orange));
            assert!(!out.next.assembled.contains(orange));
        }
    }

    #[test]
    fn terminal_state_is_rejected() {
        let spec = spec_with(0.1, 0.05);
        let s = JointState {
            available: PartSet::EMPTY,
            assembled: spec.required(1),
            intent: 1,
            step: 3,
        };
        assert_eq!(
            worker_step(&s, &spec, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(StepError::CalledOnTerminalState)
        );
    }

    #[test]
    fn pause_frequency_matches_parameter() {
        let spec = spec_with(0.1, 0.0);
        let s = JointState {
            available: spec.required(0),
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let paused = (0..n)
            .filter(|_| worker_step(&s, &spec, &mut rng).unwrap().event == WorkerEvent::Paused)
            .count();
        let p = 0.1;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((paused as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn mistake_mass_is_p_mistake() {
        let spec = spec_with(0.2, 0.1);
        let orange = part(&spec, "orange");
        let s = JointState {
            available: spec.required(0).with(orange),
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mistakes = (0..n)
            .filter(|_| {
                worker_step(&s, &spec, &mut rng).unwrap().event == WorkerEvent::Assembled(orange)
            })
            .count();
        let p = 0.1;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((mistakes as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn deterministic_worker_completes_in_missing_count_steps() {
        let spec = spec_with(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..2 {
            let req = spec.required(t);
            let first = req.iter().next().unwrap();
            let mut s = JointState {
                available: req.without(first),
                assembled: PartSet::EMPTY.with(first),
                intent: t as u8,
                step: 0,
            };
            let missing = req.difference(s.assembled).len();
            for k in 1..=missing {
                let out = worker_step(&s, &spec, &mut rng).unwrap();
                assert_eq!(out.completed, k == missing);
                s = out.next;
            }
            assert!(is_completed(&s, &spec));
        }
    }

    #[test]
    fn human_moves_are_validated() {
        let spec = spec_with(0.1, 0.05);
        let yellow = part(&spec, "yellow");
        let s = JointState {
            available: PartSet::EMPTY.with(yellow),
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        let ok = apply_worker_move(&s, WorkerMove::Assemble(yellow), &spec).unwrap();
        assert_eq!(ok.reward, 2.0);
        assert!(ok.next.assembled.contains(yellow));
        assert_eq!(
            apply_worker_move(&ok.next, WorkerMove::Assemble(yellow), &spec),
            Err(IllegalMove::NotAvailable("yellow".into()))
        );
        assert_eq!(
            apply_worker_move(&s, WorkerMove::Remove(yellow), &spec),
            Err(IllegalMove::NotAssembled("yellow".into()))
        );
        let blocked = apply_worker_move(&ok.next, WorkerMove::Pause, &spec).unwrap();
        assert_eq!(blocked.event, WorkerEvent::Blocked);
    }

    proptest::proptest! {
        #[test]
        fn worker_moves_respect_inventory(avail in 0u64..32, asm in 0u64..32, intent in 0u8..2, seed: u64) {
            let spec = spec_with(0.1, 0.3);
            let s = JointState {
                available: PartSet(avail & !asm),
                assembled: PartSet(asm),
                intent,
                step: 0,
            };
            proptest::prop_assume!(!is_terminal(&s, &spec));
            let out = worker_step(&s, &spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            proptest::prop_assert!(out.next.is_consistent());
            match out.event {
                WorkerEvent::Assembled(p) => proptest::prop_assert!(s.available.contains(p)),
                WorkerEvent::Removed(p) => proptest::prop_assert!(s.assembled.contains(p)),
                _ => proptest::prop_assert_eq!(out.next, s),
            }
        }
    }
}
