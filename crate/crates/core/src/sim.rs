//! Generative model of the joint robot/worker system.

use rand::Rng;

use crate::domain::{
    termination, InitialInventory, JointState, Observation, PartSet, RobotAction, ScenarioSpec,
    Termination,
};
use crate::worker::{sample_move, StepError, WorkerStep};

/// Draws a state from the scenario prior. The hidden intent is the
/// scenario's fixed `true_intent` when set.
pub fn sample_initial_state<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> JointState {
    let intent = spec
        .true_intent
        .unwrap_or_else(|| rng.random_range(0..spec.n_types()));
    JointState {
        available: sample_inventory(spec, rng),
        assembled: PartSet::EMPTY,
        intent: intent as u8,
        step: 0,
    }
}

pub(crate) fn sample_inventory<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> PartSet {
    match &spec.initial_inventory {
        InitialInventory::Fixed(set) => *set,
        InitialInventory::Bernoulli(ps) => ps
            .iter()
            .enumerate()
            .filter(|(_, &q)| rng.random::<f64>() < q)
            .fold(PartSet::EMPTY, |s, (i, _)| s.with(crate::domain::PartId(i as u8))),
    }
}

/// Effect of the robot action alone, with the robot's reward.
///
/// Restocking an available or assembled part changes nothing.
#[inline]
pub fn apply_robot_action(s: &JointState, a: RobotAction, spec: &ScenarioSpec) -> (JointState, f64) {
    let r = &spec.rewards;
    match a {
        RobotAction::ObserveInventory(_) | RobotAction::ObserveWorkspace(_) => (*s, r.observe_cost),
        RobotAction::Wait => (*s, r.wait_cost),
        RobotAction::Restock(p) => {
            if s.available.contains(p) || s.assembled.contains(p) {
                (*s, r.restock_redundant)
            } else {
                let mut next = *s;
                next.available = next.available.with(p);
                let reward = if spec.required(s.intent()).contains(p) {
                    r.restock_useful
                } else {
                    r.restock_other
                };
                (next, reward)
            }
        }
    }
}

#[inline]
pub fn sample_observation<R: Rng + ?Sized>(
    a: RobotAction,
    s_post: &JointState,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Observation {
    let truthful = |rng: &mut R| spec.sensor_accuracy >= 1.0 || rng.random::<f64>() < spec.sensor_accuracy;
    match a {
        RobotAction::ObserveInventory(p) => {
            if s_post.available.contains(p) == truthful(rng) {
                Observation::PartPresent(p)
            } else {
                Observation::PartAbsent(p)
            }
        }
        RobotAction::ObserveWorkspace(p) => {
            if s_post.assembled.contains(p) == truthful(rng) {
                Observation::PartAssembled(p)
            } else {
                Observation::PartNotAssembled(p)
            }
        }
        RobotAction::Restock(p) => Observation::RestockAck(p),
        RobotAction::Wait => Observation::Null,
    }
}

/// Exact probability of `o` under [`sample_observation`].
#[inline]
pub fn observation_likelihood(o: Observation, a: RobotAction, s_post: &JointState, spec: &ScenarioSpec) -> f64 {
    let alpha = spec.sensor_accuracy;
    let reading = |claim: bool, truth: bool| if claim == truth { alpha } else { 1.0 - alpha };
    match (a, o) {
        (RobotAction::ObserveInventory(p), Observation::PartPresent(q)) if p == q => {
            reading(true, s_post.available.contains(p))
        }
        (RobotAction::ObserveInventory(p), Observation::PartAbsent(q)) if p == q => {
            reading(false, s_post.available.contains(p))
        }
        (RobotAction::ObserveWorkspace(p), Observation::PartAssembled(q)) if p == q => {
            reading(true, s_post.assembled.contains(p))
        }
        (RobotAction::ObserveWorkspace(p), Observation::PartNotAssembled(q)) if p == q => {
            reading(false, s_post.assembled.contains(p))
        }
        (RobotAction::Restock(p), Observation::RestockAck(q)) if p == q => 1.0,
        (RobotAction::Wait, Observation::Null) => 1.0,
        _ => 0.0,
    }
}

/// Every observation `a` can emit.
pub fn possible_observations(a: RobotAction) -> Vec<Observation> {
    match a {
        RobotAction::ObserveInventory(p) => vec![Observation::PartPresent(p), Observation::PartAbsent(p)],
        RobotAction::ObserveWorkspace(p) => {
            vec![Observation::PartAssembled(p), Observation::PartNotAssembled(p)]
        }
        RobotAction::Restock(p) => vec![Observation::RestockAck(p)],
        RobotAction::Wait => vec![Observation::Null],
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub next: JointState,
    pub observation: Observation,
    /// Robot plus worker reward.
    pub reward: f64,
    pub robot_reward: f64,
    pub worker: WorkerStep,
    pub terminal: Option<Termination>,
}

/// One joint step: robot action, observation of the post-action world,
/// worker move, step counter.
#[inline]
pub fn step<R: Rng + ?Sized>(
    s: &JointState,
    a: RobotAction,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Result<StepOutcome, StepError> {
    if termination(s, spec).is_some() {
        return Err(StepError::CalledOnTerminalState);
    }
    let (post, robot_reward) = apply_robot_action(s, a, spec);
    let observation = sample_observation(a, &post, spec, rng);
    let worker = sample_move(&post, spec, rng);
    let mut next = worker.next;
    next.step += 1;
    let reward = robot_reward + worker.reward;
    debug_assert!(next.is_consistent());
    debug_assert!({
        let (lo, hi) = spec.rewards.step_bounds();
        (lo..=hi).contains(&reward)
    });
    Ok(StepOutcome {
        next,
        observation,
        reward,
        robot_reward,
        worker,
        terminal: termination(&next, spec),
    })
}
