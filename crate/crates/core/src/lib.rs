//! Active goal recognition for assistive assembly.
//!
//! A robot assistant watches a worker build one of several insect-hotel
//! variants, tracks part availability, assembly status and the hidden hotel
//! type with a particle belief, and picks observe/restock/wait actions with
//! online Monte-Carlo tree search.
//!
//! - [`domain`]: parts, hotel types, states, actions, observations, scenario validation
//! - [`worker`]: the worker's stochastic task model
//! - [`sim`]: the generative model `G(s, a) -> (s', o, r)`
//! - [`belief`]: particle filter and an exact filter for small domains
//! - [`planner`]: UCB1 tree search, baseline and relevance-biased variants
//! - [`harness`]: episodes, benchmark grid, timeline replay, interactive play

pub mod belief;
pub mod config;
pub mod domain;
pub mod harness;
pub mod planner;
pub mod sim;
pub mod worker;

pub use belief::{init_belief, BeliefConfig, ParticleBelief};
pub use domain::{JointState, Observation, PartId, PartSet, RobotAction, ScenarioSpec, WorkerEvent};
pub use harness::{run_episode, EpisodeConfig, EpisodeResult};
pub use planner::{plan, Planner, PlannerConfig, Variant};
