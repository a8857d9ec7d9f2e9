//! Exhaustive Bayes filter for small domains, used to check the particle
//! filter. Worker randomness is summed out by enumerating every branch of
//! the task model, so nothing here samples.

use std::collections::BTreeMap;

use super::{BeliefConfig, BeliefError, Marginals};
use crate::domain::{
    InitialInventory, JointState, Observation, PartId, PartSet, RobotAction, ScenarioSpec,
};

const MAX_PARTS: usize = 5;
const MAX_TYPES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    pub dist: BTreeMap<JointState, f64>,
}

impl ExactPosterior {
    pub fn total(&self) -> f64 {
        self.dist.values().sum()
    }

    pub fn marginals(&self, spec: &ScenarioSpec) -> Marginals {
        Marginals::accumulate(spec, self.dist.iter().map(|(s, &p)| (s, p)))
    }
}

fn subsets(universe: PartSet) -> impl Iterator<Item = PartSet> {
    // Enumerates all submasks of `universe`.
    let full = universe.0;
    let mut sub = Some(full);
    std::iter::from_fn(move || {
        let cur = sub?;
        sub = if cur == 0 { None } else { Some((cur - 1) & full) };
        Some(PartSet(cur))
    })
}

fn prior(spec: &ScenarioSpec) -> BTreeMap<JointState, f64> {
    let types = spec.n_types();
    let inventories: Vec<(PartSet, f64)> = match &spec.initial_inventory {
        InitialInventory::Fixed(set) => vec![(*set, 1.0)],
        InitialInventory::Bernoulli(qs) => subsets(spec.all_parts())
            .map(|set| {
                let p = qs
                    .iter()
                    .enumerate()
                    .map(|(i, q)| if set.contains(PartId(i as u8)) { *q } else { 1.0 - q })
                    .product();
                (set, p)
            })
            .filter(|(_, p)| *p > 0.0)
            .collect(),
    };
    let mut dist = BTreeMap::new();
    for t in 0..types {
        for &(available, p) in &inventories {
            let s = JointState {
                available,
                assembled: PartSet::EMPTY,
                intent: t as u8,
                step: 0,
            };
            *dist.entry(s).or_insert(0.0) += p / types as f64;
        }
    }
    dist
}

fn robot_effect(s: &JointState, a: RobotAction) -> JointState {
    let mut out = *s;
    if let RobotAction::Restock(p) = a {
        if !s.available.contains(p) && !s.assembled.contains(p) {
            out.available = s.available.with(p);
        }
    }
    out
}

fn likelihood(o: Observation, a: RobotAction, s: &JointState, alpha: f64) -> f64 {
    let says = |claim: bool, truth: bool| if claim == truth { alpha } else { 1.0 - alpha };
    match (a, o) {
        (RobotAction::ObserveInventory(p), Observation::PartPresent(q)) if p == q => says(true, s.available.contains(p)),
        (RobotAction::ObserveInventory(p), Observation::PartAbsent(q)) if p == q => says(false, s.available.contains(p)),
        (RobotAction::ObserveWorkspace(p), Observation::PartAssembled(q)) if p == q => says(true, s.assembled.contains(p)),
        (RobotAction::ObserveWorkspace(p), Observation::PartNotAssembled(q)) if p == q => says(false, s.assembled.contains(p)),
        (RobotAction::Restock(p), Observation::RestockAck(q)) if p == q => 1.0,
        (RobotAction::Wait, Observation::Null) => 1.0,
        _ => 0.0,
    }
}

fn place(s: &JointState, p: PartId) -> JointState {
    JointState {
        available: s.available.without(p),
        assembled: s.assembled.with(p),
        ..*s
    }
}

fn take_back(s: &JointState, p: PartId) -> JointState {
    JointState {
        available: s.available.with(p),
        assembled: s.assembled.without(p),
        ..*s
    }
}

/// Full distribution of the worker's move from `s`.
fn worker_branches(s: &JointState, spec: &ScenarioSpec) -> Vec<(JointState, f64)> {
    let pause = spec.worker.p_pause;
    let mistake = spec.worker.p_mistake;
    let req = spec.required(s.intent());
    let mut out = vec![(*s, pause)];
    let active = 1.0 - pause;
    if active <= 0.0 {
        return out;
    }
    let wrong = s.assembled.difference(req);
    if !wrong.is_empty() {
        let each = active / wrong.len() as f64;
        out.extend(wrong.iter().map(|p| (take_back(s, p), each)));
        return out;
    }
    let mut progress = active;
    let distractors = s.available.difference(req);
    if !distractors.is_empty() && mistake > 0.0 {
        let each = mistake / distractors.len() as f64;
        out.extend(distractors.iter().map(|p| (place(s, p), each)));
        progress -= mistake;
    }
    let needed = req.difference(s.assembled).intersection(s.available);
    if needed.is_empty() {
        out.push((*s, progress));
    } else {
        let each = progress / needed.len() as f64;
        out.extend(needed.iter().map(|p| (place(s, p), each)));
    }
    out
}

/// Exact posterior after `history`, using the same ordering as the particle
/// update: robot effect, observation weighting, worker move. Finished hotels
/// are absorbing, or eliminated when `cfg.condition_on_continuation` holds.
pub fn exact_filter(
    spec: &ScenarioSpec,
    history: &[(RobotAction, Observation)],
    cfg: &BeliefConfig,
) -> Result<ExactPosterior, BeliefError> {
    if spec.n_parts() > MAX_PARTS || spec.n_types() > MAX_TYPES {
        return Err(BeliefError::DomainTooLarge {
            parts: spec.n_parts(),
            types: spec.n_types(),
        });
    }
    let mut dist = prior(spec);
    for &(a, o) in history {
        let mut next: BTreeMap<JointState, f64> = BTreeMap::new();
        for (s, &p) in &dist {
            let post = robot_effect(s, a);
            let w = p * likelihood(o, a, &post, spec.sensor_accuracy);
            if w == 0.0 {
                continue;
            }
            let done = post.assembled == spec.required(post.intent());
            let branches = if done { vec![(post, 1.0)] } else { worker_branches(&post, spec) };
            for (mut t, q) in branches {
                if q == 0.0 {
                    continue;
                }
                t.step += 1;
                if cfg.condition_on_continuation && t.assembled == spec.required(t.intent()) {
                    continue;
                }
                *next.entry(t).or_insert(0.0) += w * q;
            }
        }
        let total: f64 = next.values().sum();
        if !(total > 0.0) {
            return Err(BeliefError::ImpossibleHistory);
        }
        next.values_mut().for_each(|v| *v /= total);
        dist = next;
    }
    Ok(ExactPosterior { dist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{self, parse_spec};

    fn one_part(alpha: f64) -> ScenarioSpec {
        parse_spec(&format!(
            r#"
            [parts]
            parts = ["p"]
            common_parts = ["p"]
            initial_inventory = 0.5
            [hotels]
            hotel_types = [{{ name = "T" }}]
            [worker]
            p_pause = 1.0
            p_mistake = 0.0
            [sensor]
            sensor_accuracy = {alpha}
            "#
        ))
        .unwrap()
    }

    #[test]
    fn empty_history_is_prior() {
        let spec = one_part(0.85);
        let post = exact_filter(&spec, &[], &BeliefConfig::default()).unwrap();
        assert_eq!(post.dist.len(), 2);
        assert!(post.dist.values().all(|&p| p == 0.5));
    }

    #[test]
    fn one_present_reading() {
        let spec = one_part(0.85);
        let p = PartId(0);
        let h = [(RobotAction::ObserveInventory(p), Observation::PartPresent(p))];
        let post = exact_filter(&spec, &h, &BeliefConfig::default()).unwrap();
        let m = post.marginals(&spec);
        // 0.5·0.85 / (0.5·0.85 + 0.5·0.15)
        assert!((m.available[0] - 0.85).abs() < 1e-12);
        assert!((post.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_domain_is_rejected() {
        let spec = config::demo_six();
        assert!(matches!(
            exact_filter(&spec, &[], &BeliefConfig::default()),
            Err(BeliefError::DomainTooLarge { parts: 8, types: 2 })
        ));
    }

    #[test]
    fn worker_branches_sum_to_one() {
        let spec = config::bench_small();
        for avail in 0u64..32 {
            for asm in 0u64..32 {
                for t in 0..2u8 {
                    let s = JointState {
                        available: PartSet(avail & !asm),
                        assembled: PartSet(asm),
                        intent: t,
                        step: 0,
                    };
                    if s.assembled == spec.required(t as usize) {
                        continue;
                    }
                    let total: f64 = worker_branches(&s, &spec).iter().map(|b| b.1).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn posterior_normalized_on_random_history() {
        let spec = config::bench_small();
        let y = spec.part_by_label("yellow").unwrap();
        let red = spec.part_by_label("red").unwrap();
        let h = [
            (RobotAction::ObserveInventory(y), Observation::PartAbsent(y)),
            (RobotAction::Restock(y), Observation::RestockAck(y)),
            (RobotAction::ObserveWorkspace(red), Observation::PartAssembled(red)),
            (RobotAction::Wait, Observation::Null),
        ];
        for condition in [false, true] {
            let cfg = BeliefConfig {
                condition_on_continuation: condition,
                ..Default::default()
            };
            let post = exact_filter(&spec, &h, &cfg).unwrap();
            assert!((post.total() - 1.0).abs() < 1e-12);
            assert!(post.dist.keys().all(|s| s.step == 4 && s.is_consistent()));
        }
    }
}
