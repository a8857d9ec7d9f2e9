//! Particle belief over joint states.
//!
//! The update weights each particle by the closed-form observation
//! likelihood and propagates it through one sampled worker move, with
//! systematic resampling when the effective sample size drops and
//! reinvigoration on particle deprivation.

mod exact;

pub use exact::{exact_filter, ExactPosterior};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use thiserror::Error;

use crate::domain::{is_completed, JointState, Observation, PartId, RobotAction, ScenarioSpec};
use crate::sim::{apply_robot_action, observation_likelihood, sample_inventory};
use crate::worker::{pick_uniform, sample_move};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("belief has no particles")]
    EmptyBelief,
    #[error("particle deprivation persisted after reinvigoration at step {step}")]
    BeliefCollapse { step: u32 },
    #[error("exact filter supports at most 5 parts and 3 hotel types (got {parts} parts, {types} types)")]
    DomainTooLarge { parts: usize, types: usize },
    #[error("history has zero probability under the model")]
    ImpossibleHistory,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeliefConfig {
    /// Resample when the effective sample size falls below this fraction of K.
    pub ess_fraction: f64,
    /// Total likelihood mass below which the particle set counts as deprived.
    pub deprivation_threshold: f64,
    /// Probability that a reinvigorated particle redraws its hotel type.
    pub type_redraw_prob: f64,
    /// Zero out hypotheses whose hotel got finished: the caller only
    /// updates while the episode is still running.
    pub condition_on_continuation: bool,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        Self {
            ess_fraction: 0.5,
            deprivation_threshold: 1e-12,
            type_redraw_prob: 0.1,
            condition_on_continuation: true,
        }
    }
}

/// Weighted frequencies of the belief's state variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub available: Vec<f64>,
    pub assembled: Vec<f64>,
    pub hotel_type: Vec<f64>,
    /// P(part is required by the hidden type).
    pub required: Vec<f64>,
    /// P(part is required and not yet assembled), computed jointly.
    pub required_unassembled: Vec<f64>,
}

impl Marginals {
    pub(crate) fn accumulate<'a, I>(spec: &ScenarioSpec, weighted: I) -> Self
    where
        I: IntoIterator<Item = (&'a JointState, f64)>,
    {
        let n = spec.n_parts();
        let mut m = Marginals {
            available: vec![0.0; n],
            assembled: vec![0.0; n],
            hotel_type: vec![0.0; spec.n_types()],
            required: vec![0.0; n],
            required_unassembled: vec![0.0; n],
        };
        let mut total = 0.0;
        for (s, w) in weighted {
            if w == 0.0 {
                continue;
            }
            total += w;
            let req = spec.required(s.intent());
            m.hotel_type[s.intent()] += w;
            for i in 0..n {
                let p = PartId(i as u8);
                if s.available.contains(p) {
                    m.available[i] += w;
                }
                if s.assembled.contains(p) {
                    m.assembled[i] += w;
                }
                if req.contains(p) {
                    m.required[i] += w;
                    if !s.assembled.contains(p) {
                        m.required_unassembled[i] += w;
                    }
                }
            }
        }
        // Dividing by the accumulated mass keeps certain marginals at exactly 0 or 1.
        if total > 0.0 {
            for v in [&mut m.available, &mut m.assembled, &mut m.hotel_type, &mut m.required, &mut m.required_unassembled] {
                v.iter_mut().for_each(|x| *x /= total);
            }
        }
        m
    }

    /// Largest total-variation distance over the per-part Bernoulli
    /// marginals and the hotel-type distribution.
    pub fn max_tv(&self, other: &Marginals) -> f64 {
        let bern = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let types = 0.5
            * self
                .hotel_type
                .iter()
                .zip(&other.hotel_type)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>();
        bern(&self.available, &other.available)
            .max(bern(&self.assembled, &other.assembled))
            .max(types)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleBelief {
    particles: Vec<JointState>,
    weights: Vec<f64>,
}

/// `k` particles from the prior: inventory as in the scenario, hotel type
/// uniform (the robot never knows the worker's fixed intent), empty workspace.
pub fn init_belief<R: Rng + ?Sized>(spec: &ScenarioSpec, k: usize, rng: &mut R) -> ParticleBelief {
    assert!(k >= 1, "belief needs at least one particle");
    let particles = (0..k)
        .map(|_| JointState {
            available: sample_inventory(spec, rng),
            assembled: Default::default(),
            intent: rng.random_range(0..spec.n_types()) as u8,
            step: 0,
        })
        .collect();
    ParticleBelief {
        particles,
        weights: vec![1.0 / k as f64; k],
    }
}

/// Indices drawn by systematic resampling.
pub fn systematic_indices<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / count as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(count);
    let mut cum = 0.0;
    let mut i = 0;
    for _ in 0..count {
        while i + 1 < weights.len() && cum + weights[i] <= u {
            cum += weights[i];
            i += 1;
        }
        out.push(i);
        u += step;
    }
    out
}

impl ParticleBelief {
    pub fn from_weighted(particles: Vec<JointState>, weights: Vec<f64>) -> Result<Self, BeliefError> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(BeliefError::EmptyBelief);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(BeliefError::EmptyBelief);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { particles, weights })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[JointState] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JointState, f64)> {
        self.particles.iter().zip(self.weights.iter().copied())
    }

    pub fn step(&self) -> u32 {
        self.particles.first().map_or(0, |s| s.step)
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn marginals(&self, spec: &ScenarioSpec) -> Result<Marginals, BeliefError> {
        if self.is_empty() {
            return Err(BeliefError::EmptyBelief);
        }
        Ok(Marginals::accumulate(spec, self.iter()))
    }

    /// Sampler over particle indices proportional to weight.
    pub fn sampler(&self) -> Result<WeightedIndex<f64>, BeliefError> {
        WeightedIndex::new(&self.weights).map_err(|_| BeliefError::EmptyBelief)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<JointState, BeliefError> {
        Ok(self.particles[self.sampler()?.sample(rng)])
    }

    fn propagate<R: Rng + ?Sized>(
        particles: &[JointState],
        weights: &[f64],
        a: RobotAction,
        o: Observation,
        spec: &ScenarioSpec,
        cfg: &BeliefConfig,
        rng: &mut R,
    ) -> (Vec<JointState>, Vec<f64>, f64) {
        let mut next = Vec::with_capacity(particles.len());
        let mut next_w = Vec::with_capacity(particles.len());
        let mut total = 0.0;
        for (s, &w) in particles.iter().zip(weights) {
            let (post, _) = apply_robot_action(s, a, spec);
            let mut w = w * observation_likelihood(o, a, &post, spec);
            let mut moved = post;
            if w > 0.0 && !is_completed(&post, spec) {
                moved = sample_move(&post, spec, rng).next;
            }
            moved.step += 1;
            if cfg.condition_on_continuation && is_completed(&moved, spec) {
                w = 0.0;
            }
            debug_assert!(moved.is_consistent());
            total += w;
            next.push(moved);
            next_w.push(w);
        }
        (next, next_w, total)
    }

    fn reinvigorated<R: Rng + ?Sized>(&self, spec: &ScenarioSpec, cfg: &BeliefConfig, rng: &mut R) -> Vec<JointState> {
        let k = self.len();
        systematic_indices(&self.weights, k, rng)
            .into_iter()
            .map(|i| {
                let mut s = self.particles[i];
                let flippable = spec.all_parts().difference(s.assembled);
                if !flippable.is_empty() {
                    let p = pick_uniform(flippable, rng);
                    s.available = if s.available.contains(p) {
                        s.available.without(p)
                    } else {
                        s.available.with(p)
                    };
                }
                if rng.random::<f64>() < cfg.type_redraw_prob {
                    s.intent = rng.random_range(0..spec.n_types()) as u8;
                }
                s
            })
            .collect()
    }

    /// Posterior after executing `a` and receiving `o`, advanced by one
    /// worker move.
    pub fn update<R: Rng + ?Sized>(
        &self,
        a: RobotAction,
        o: Observation,
        spec: &ScenarioSpec,
        cfg: &BeliefConfig,
        rng: &mut R,
    ) -> Result<ParticleBelief, BeliefError> {
        if self.is_empty() {
            return Err(BeliefError::EmptyBelief);
        }
        let (mut particles, mut weights, mut total) =
            Self::propagate(&self.particles, &self.weights, a, o, spec, cfg, rng);
        if total < cfg.deprivation_threshold {
            let fresh = self.reinvigorated(spec, cfg, rng);
            let uniform = vec![1.0 / fresh.len() as f64; fresh.len()];
            (particles, weights, total) = Self::propagate(&fresh, &uniform, a, o, spec, cfg, rng);
            if total < cfg.deprivation_threshold {
                return Err(BeliefError::BeliefCollapse { step: self.step() });
            }
        }
        weights.iter_mut().for_each(|w| *w /= total);
        let mut belief = ParticleBelief { particles, weights };
        let k = belief.len();
        if belief.effective_sample_size() < cfg.ess_fraction * k as f64 {
            let idx = systematic_indices(&belief.weights, k, rng);
            belief.particles = idx.into_iter().map(|i| belief.particles[i]).collect();
            belief.weights = vec![1.0 / k as f64; k];
        }
        Ok(belief)
    }
}

/// Free-function form of [`ParticleBelief::update`] with default settings.
pub fn belief_update<R: Rng + ?Sized>(
    b: &ParticleBelief,
    a: RobotAction,
    o: Observation,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Result<ParticleBelief, BeliefError> {
    b.update(a, o, spec, &BeliefConfig::default(), rng)
}
