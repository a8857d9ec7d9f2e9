//! Assembly domain: parts, hotel types, joint states, robot actions,
//! observations, rewards, and scenario validation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{InventoryConfig, ScenarioConfig};
use crate::worker::WorkerParams;

/// Maximum number of parts a scenario may declare (one bit per part).
pub const MAX_PARTS: usize = 64;

/// Index of a part within its scenario's part universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartId(pub u8);

impl PartId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of parts stored as a 64-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartSet(pub u64);

impl PartSet {
    pub const EMPTY: PartSet = PartSet(0);

    pub fn full(n_parts: usize) -> Self {
        if n_parts >= 64 {
            PartSet(u64::MAX)
        } else {
            PartSet((1u64 << n_parts) - 1)
        }
    }

    pub fn from_parts<I: IntoIterator<Item = PartId>>(parts: I) -> Self {
        parts.into_iter().fold(PartSet::EMPTY, |s, p| s.with(p))
    }

    #[inline]
    pub fn contains(self, p: PartId) -> bool {
        self.0 & (1u64 << p.0) != 0
    }

    #[inline]
    pub fn with(self, p: PartId) -> Self {
        PartSet(self.0 | (1u64 << p.0))
    }

    #[inline]
    pub fn without(self, p: PartId) -> Self {
        PartSet(self.0 & !(1u64 << p.0))
    }

    #[inline]
    pub fn union(self, other: PartSet) -> Self {
        PartSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: PartSet) -> Self {
        PartSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: PartSet) -> Self {
        PartSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: PartSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: PartSet) -> bool {
        self.0 & other.0 == 0
    }

    /// The `k`-th member in increasing index order.
    #[inline]
    pub fn nth(self, k: usize) -> Option<PartId> {
        let mut bits = self.0;
        for _ in 0..k {
            if bits == 0 {
                return None;
            }
            bits &= bits - 1;
        }
        if bits == 0 {
            None
        } else {
            Some(PartId(bits.trailing_zeros() as u8))
        }
    }

    pub fn iter(self) -> impl Iterator<Item = PartId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as u8;
                bits &= bits - 1;
                Some(PartId(p))
            }
        })
    }
}

impl fmt::Debug for PartSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|p| p.0)).finish()
    }
}

/// One hotel variant: the worker's hidden goal.
#[derive(Clone, Debug, PartialEq)]
pub struct HotelType {
    pub name: String,
    pub specific_parts: PartSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardTable {
    pub observe_cost: f64,
    pub restock_redundant: f64,
    pub restock_useful: f64,
    pub restock_other: f64,
    pub worker_blocked: f64,
    pub worker_assembled: f64,
    pub hotel_completed: f64,
    pub wait_cost: f64,
}

impl Default for RewardTable {
    fn default() -> Self {
        Self {
            observe_cost: -0.5,
            restock_redundant: -10.0,
            restock_useful: 2.0,
            restock_other: -2.0,
            worker_blocked: -2.0,
            worker_assembled: 2.0,
            hotel_completed: 5.0,
            wait_cost: 0.0,
        }
    }
}

impl RewardTable {
    fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("observe_cost", self.observe_cost),
            ("restock_redundant", self.restock_redundant),
            ("restock_useful", self.restock_useful),
            ("restock_other", self.restock_other),
            ("worker_blocked", self.worker_blocked),
            ("worker_assembled", self.worker_assembled),
            ("hotel_completed", self.hotel_completed),
            ("wait_cost", self.wait_cost),
        ]
    }

    /// Inclusive bounds on the reward of a single joint step (robot + worker).
    pub fn step_bounds(&self) -> (f64, f64) {
        let robot = [
            self.observe_cost,
            self.wait_cost,
            self.restock_redundant,
            self.restock_useful,
            self.restock_other,
        ];
        let worker = [
            0.0,
            self.worker_blocked,
            self.worker_assembled,
            self.worker_assembled + self.hotel_completed,
        ];
        let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min(&robot) + min(&worker), max(&robot) + max(&worker))
    }
}

/// How the initial inventory is drawn.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialInventory {
    /// Exactly these parts are available.
    Fixed(PartSet),
    /// Independent Bernoulli availability per part, indexed by part.
    Bernoulli(Vec<f64>),
}

/// A validated scenario. Construct through [`validate_spec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub parts: Vec<String>,
    pub common_parts: PartSet,
    pub hotel_types: Vec<HotelType>,
    pub worker: WorkerParams,
    pub rewards: RewardTable,
    pub sensor_accuracy: f64,
    pub horizon: u32,
    pub discount: f64,
    pub initial_inventory: InitialInventory,
    /// Hotel type the true worker builds; `None` draws it uniformly per episode.
    pub true_intent: Option<usize>,
    pub master_seed: u64,
    required: Vec<PartSet>,
}

impl ScenarioSpec {
    pub fn n_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn n_types(&self) -> usize {
        self.hotel_types.len()
    }

    pub fn all_parts(&self) -> PartSet {
        PartSet::full(self.parts.len())
    }

    pub fn label(&self, p: PartId) -> &str {
        &self.parts[p.index()]
    }

    pub fn part_by_label(&self, label: &str) -> Option<PartId> {
        self.parts
            .iter()
            .position(|l| l == label)
            .map(|i| PartId(i as u8))
    }

    pub fn hotel_by_name(&self, name: &str) -> Option<usize> {
        self.hotel_types.iter().position(|h| h.name == name)
    }

    /// Required set of hotel type `t`, unchecked (panics on an invalid index).
    #[inline]
    pub fn required(&self, t: usize) -> PartSet {
        self.required[t]
    }

    /// Parts that belong to at least one hotel type.
    pub fn any_required(&self) -> PartSet {
        self.required.iter().fold(PartSet::EMPTY, |a, &r| a.union(r))
    }

    /// Number of robot actions: observe-inventory, observe-workspace and
    /// restock per part, plus wait.
    pub fn n_actions(&self) -> usize {
        3 * self.parts.len() + 1
    }

    pub fn actions(&self) -> impl Iterator<Item = RobotAction> + '_ {
        (0..self.n_actions()).map(move |i| RobotAction::from_index(i, self.n_parts()))
    }

    pub fn with_accuracy(&self, accuracy: f64) -> Result<Self, DomainError> {
        let mut raw = self.to_config();
        raw.sensor.sensor_accuracy = accuracy;
        validate_spec(&raw)
    }

    /// Back to the raw configuration form (labels instead of indices).
    pub fn to_config(&self) -> ScenarioConfig {
        use crate::config::*;
        let labels = |s: PartSet| s.iter().map(|p| self.label(p).to_string()).collect();
        let initial_inventory = match &self.initial_inventory {
            InitialInventory::Fixed(set) => InventoryConfig::Fixed {
                available: labels(*set),
            },
            InitialInventory::Bernoulli(ps) => {
                if ps.windows(2).all(|w| w[0] == w[1]) {
                    InventoryConfig::Uniform(ps.first().copied().unwrap_or(0.5))
                } else {
                    InventoryConfig::PerPart {
                        probabilities: self.parts.iter().cloned().zip(ps.iter().copied()).collect(),
                    }
                }
            }
        };
        ScenarioConfig {
            parts: PartsSection {
                parts: self.parts.clone(),
                common_parts: labels(self.common_parts),
                initial_inventory,
            },
            hotels: HotelsSection {
                hotel_types: self
                    .hotel_types
                    .iter()
                    .map(|h| HotelTypeConfig {
                        name: h.name.clone(),
                        specific_parts: labels(h.specific_parts),
                    })
                    .collect(),
                true_intent: self.true_intent.map(|t| self.hotel_types[t].name.clone()),
            },
            worker: self.worker,
            rewards: self.rewards,
            sensor: SensorSection {
                sensor_accuracy: self.sensor_accuracy,
            },
            run: RunSection {
                horizon: self.horizon,
                discount: self.discount,
                master_seed: self.master_seed,
            },
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("{field}: part `{part}` is listed as specific by more than one hotel type or also as common")]
    DisjointnessViolation { field: String, part: String },
    #[error("{field}: probability {value} out of range")]
    ProbabilityOutOfRange { field: String, value: f64 },
    #[error("{field}: required part set is empty")]
    EmptyRequiredSet { field: String },
    #[error("{field}: unknown part `{label}`")]
    UnknownPartReference { field: String, label: String },
    #[error("{field}: duplicate label `{label}`")]
    DuplicateLabel { field: String, label: String },
    #[error("{field}: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("unknown hotel type {0}")]
    UnknownHotelType(String),
}

fn prob_in(field: &str, value: f64, lo: f64, hi: f64) -> Result<(), DomainError> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(DomainError::ProbabilityOutOfRange {
            field: field.to_string(),
            value,
        })
    }
}

/// Checks every scenario invariant and resolves labels to indices. Parts are
/// indexed in declaration order.
pub fn validate_spec(raw: &ScenarioConfig) -> Result<ScenarioSpec, DomainError> {
    let parts = raw.parts.parts.clone();
    if parts.is_empty() {
        return Err(DomainError::InvalidValue {
            field: "parts.parts".into(),
            reason: "at least one part is required".into(),
        });
    }
    if parts.len() > MAX_PARTS {
        return Err(DomainError::InvalidValue {
            field: "parts.parts".into(),
            reason: format!("at most {MAX_PARTS} parts are supported"),
        });
    }
    let mut index: HashMap<&str, PartId> = HashMap::new();
    for (i, label) in parts.iter().enumerate() {
        if index.insert(label.as_str(), PartId(i as u8)).is_some() {
            return Err(DomainError::DuplicateLabel {
                field: "parts.parts".into(),
                label: label.clone(),
            });
        }
    }
    let resolve = |field: &str, labels: &[String]| -> Result<PartSet, DomainError> {
        labels.iter().try_fold(PartSet::EMPTY, |set, l| {
            index
                .get(l.as_str())
                .map(|&p| set.with(p))
                .ok_or_else(|| DomainError::UnknownPartReference {
                    field: field.to_string(),
                    label: l.clone(),
                })
        })
    };

    let common_parts = resolve("parts.common_parts", &raw.parts.common_parts)?;

    if raw.hotels.hotel_types.is_empty() {
        return Err(DomainError::InvalidValue {
            field: "hotels.hotel_types".into(),
            reason: "at least one hotel type is required".into(),
        });
    }
    let mut hotel_types = Vec::with_capacity(raw.hotels.hotel_types.len());
    let mut claimed = common_parts;
    let mut names = HashMap::new();
    for (t, h) in raw.hotels.hotel_types.iter().enumerate() {
        let field = format!("hotels.hotel_types[{t}].specific_parts");
        if names.insert(h.name.as_str(), t).is_some() {
            return Err(DomainError::DuplicateLabel {
                field: format!("hotels.hotel_types[{t}].name"),
                label: h.name.clone(),
            });
        }
        let specific = resolve(&field, &h.specific_parts)?;
        if let Some(p) = specific.intersection(claimed).iter().next() {
            return Err(DomainError::DisjointnessViolation {
                field,
                part: parts[p.index()].clone(),
            });
        }
        claimed = claimed.union(specific);
        if common_parts.union(specific).is_empty() {
            return Err(DomainError::EmptyRequiredSet {
                field: format!("hotels.hotel_types[{t}]"),
            });
        }
        hotel_types.push(HotelType {
            name: h.name.clone(),
            specific_parts: specific,
        });
    }

    let true_intent = match &raw.hotels.true_intent {
        None => None,
        Some(name) => Some(
            names
                .get(name.as_str())
                .copied()
                .ok_or_else(|| DomainError::UnknownHotelType(name.clone()))?,
        ),
    };

    let w = raw.worker;
    prob_in("worker.p_pause", w.p_pause, 0.0, 1.0)?;
    prob_in("worker.p_mistake", w.p_mistake, 0.0, 1.0)?;
    if w.p_pause + w.p_mistake > 1.0 + 1e-12 {
        return Err(DomainError::ProbabilityOutOfRange {
            field: "worker.p_pause + worker.p_mistake".into(),
            value: w.p_pause + w.p_mistake,
        });
    }

    for (name, v) in raw.rewards.fields() {
        if !v.is_finite() {
            return Err(DomainError::InvalidValue {
                field: format!("rewards.{name}"),
                reason: "must be finite".into(),
            });
        }
    }

    prob_in("sensor.sensor_accuracy", raw.sensor.sensor_accuracy, 0.5, 1.0)?;

    if raw.run.horizon == 0 {
        return Err(DomainError::InvalidValue {
            field: "run.horizon".into(),
            reason: "must be positive".into(),
        });
    }
    let g = raw.run.discount;
    if !(g.is_finite() && g > 0.0 && g <= 1.0) {
        return Err(DomainError::InvalidValue {
            field: "run.discount".into(),
            reason: format!("{g} not in (0, 1]"),
        });
    }

    let initial_inventory = match &raw.parts.initial_inventory {
        InventoryConfig::Uniform(q) => {
            prob_in("parts.initial_inventory", *q, 0.0, 1.0)?;
            InitialInventory::Bernoulli(vec![*q; parts.len()])
        }
        InventoryConfig::PerPart { probabilities } => {
            let mut ps = vec![0.5; parts.len()];
            let sorted: BTreeMap<_, _> = probabilities.iter().collect();
            for (label, &q) in sorted {
                let p = *index.get(label.as_str()).ok_or_else(|| {
                    DomainError::UnknownPartReference {
                        field: "parts.initial_inventory.probabilities".into(),
                        label: label.clone(),
                    }
                })?;
                prob_in(&format!("parts.initial_inventory.probabilities.{label}"), q, 0.0, 1.0)?;
                ps[p.index()] = q;
            }
            InitialInventory::Bernoulli(ps)
        }
        InventoryConfig::Fixed { available } => {
            InitialInventory::Fixed(resolve("parts.initial_inventory.available", available)?)
        }
    };

    let required = hotel_types
        .iter()
        .map(|h| common_parts.union(h.specific_parts))
        .collect();

    Ok(ScenarioSpec {
        parts,
        common_parts,
        hotel_types,
        worker: w,
        rewards: raw.rewards,
        sensor_accuracy: raw.sensor.sensor_accuracy,
        horizon: raw.run.horizon,
        discount: g,
        initial_inventory,
        true_intent,
        master_seed: raw.run.master_seed,
        required,
    })
}

/// Common parts plus the type-specific parts of hotel type `t`.
pub fn required_parts(t: usize, spec: &ScenarioSpec) -> Result<PartSet, DomainError> {
    spec.required
        .get(t)
        .copied()
        .ok_or_else(|| DomainError::UnknownHotelType(t.to_string()))
}

/// Ground truth of one joint step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointState {
    pub available: PartSet,
    pub assembled: PartSet,
    pub intent: u8,
    pub step: u32,
}

impl JointState {
    pub fn intent(&self) -> usize {
        self.intent as usize
    }

    pub fn is_consistent(&self) -> bool {
        self.available.is_disjoint(self.assembled)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Horizon,
}

/// Workspace holds exactly the required set of the intended hotel.
#[inline]
pub fn is_completed(s: &JointState, spec: &ScenarioSpec) -> bool {
    s.assembled == spec.required(s.intent())
}

#[inline]
pub fn termination(s: &JointState, spec: &ScenarioSpec) -> Option<Termination> {
    if is_completed(s, spec) {
        Some(Termination::Completed)
    } else if s.step >= spec.horizon {
        Some(Termination::Horizon)
    } else {
        None
    }
}

#[inline]
pub fn is_terminal(s: &JointState, spec: &ScenarioSpec) -> bool {
    termination(s, spec).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RobotAction {
    ObserveInventory(PartId),
    ObserveWorkspace(PartId),
    Restock(PartId),
    Wait,
}

impl RobotAction {
    /// Dense index: `[observe-inventory × n | observe-workspace × n | restock × n | wait]`.
    #[inline]
    pub fn index(self, n_parts: usize) -> usize {
        match self {
            RobotAction::ObserveInventory(p) => p.index(),
            RobotAction::ObserveWorkspace(p) => n_parts + p.index(),
            RobotAction::Restock(p) => 2 * n_parts + p.index(),
            RobotAction::Wait => 3 * n_parts,
        }
    }

    #[inline]
    pub fn from_index(i: usize, n_parts: usize) -> Self {
        match i / n_parts.max(1) {
            _ if i == 3 * n_parts => RobotAction::Wait,
            0 => RobotAction::ObserveInventory(PartId(i as u8)),
            1 => RobotAction::ObserveWorkspace(PartId((i - n_parts) as u8)),
            2 => RobotAction::Restock(PartId((i - 2 * n_parts) as u8)),
            _ => panic!("action index {i} out of range for {n_parts} parts"),
        }
    }

    pub fn part(self) -> Option<PartId> {
        match self {
            RobotAction::ObserveInventory(p)
            | RobotAction::ObserveWorkspace(p)
            | RobotAction::Restock(p) => Some(p),
            RobotAction::Wait => None,
        }
    }

    pub fn display(self, spec: &ScenarioSpec) -> String {
        match self {
            RobotAction::ObserveInventory(p) => format!("observe-inventory {}", spec.label(p)),
            RobotAction::ObserveWorkspace(p) => format!("observe-workspace {}", spec.label(p)),
            RobotAction::Restock(p) => format!("restock {}", spec.label(p)),
            RobotAction::Wait => "wait".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observation {
    PartPresent(PartId),
    PartAbsent(PartId),
    PartAssembled(PartId),
    PartNotAssembled(PartId),
    RestockAck(PartId),
    Null,
}

impl Observation {
    /// Branch slot under an action node: positive readings and
    /// deterministic acknowledgments map to 0, negative readings to 1.
    #[inline]
    pub fn slot(self) -> usize {
        match self {
            Observation::PartAbsent(_) | Observation::PartNotAssembled(_) => 1,
            _ => 0,
        }
    }

    pub fn display(self, spec: &ScenarioSpec) -> String {
        match self {
            Observation::PartPresent(p) => format!("present {}", spec.label(p)),
            Observation::PartAbsent(p) => format!("absent {}", spec.label(p)),
            Observation::PartAssembled(p) => format!("assembled {}", spec.label(p)),
            Observation::PartNotAssembled(p) => format!("not-assembled {}", spec.label(p)),
            Observation::RestockAck(p) => format!("restock-ack {}", spec.label(p)),
            Observation::Null => "null".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WorkerEvent {
    Assembled(PartId),
    Removed(PartId),
    Blocked,
    Paused,
    Completed,
}

impl WorkerEvent {
    pub fn display(self, spec: &ScenarioSpec) -> String {
        match self {
            WorkerEvent::Assembled(p) => format!("assemble {}", spec.label(p)),
            WorkerEvent::Removed(p) => format!("remove {}", spec.label(p)),
            WorkerEvent::Blocked => "blocked".to_string(),
            WorkerEvent::Paused => "pause".to_string(),
            WorkerEvent::Completed => "completed".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;

    #[test]
    fn bench_small_is_valid() {
        let spec = config::bench_small();
        assert_eq!(spec.n_types(), 2);
        assert_eq!(spec.common_parts.len(), 3);
        for h in &spec.hotel_types {
            assert_eq!(h.specific_parts.len(), 1);
        }
    }

    #[test]
    fn shared_specific_part_is_rejected() {
        let mut raw = config::bench_small().to_config();
        raw.hotels.hotel_types[1].specific_parts = raw.hotels.hotel_types[0].specific_parts.clone();
        match validate_spec(&raw) {
            Err(DomainError::DisjointnessViolation { field, part }) => {
                assert!(field.contains("hotel_types[1]"));
                assert_eq!(part, raw.hotels.hotel_types[0].specific_parts[0]);
            }
            other => panic!("expected disjointness violation, got {other:?}"),
        }
    }

    #[test]
    fn specific_overlapping_common_is_rejected() {
        let mut raw = config::bench_small().to_config();
        raw.hotels.hotel_types[0]
            .specific_parts
            .push(raw.parts.common_parts[0].clone());
        assert!(matches!(
            validate_spec(&raw),
            Err(DomainError::DisjointnessViolation { .. })
        ));
    }

    #[test]
    fn pause_probability_above_one_is_rejected() {
        let mut raw = config::bench_small().to_config();
        raw.worker.p_pause = 1.2;
        match validate_spec(&raw) {
            Err(DomainError::ProbabilityOutOfRange { field, .. }) => {
                assert_eq!(field, "worker.p_pause")
            }
            other => panic!("{other:?}"),
        }
        raw.worker.p_pause = 0.7;
        raw.worker.p_mistake = 0.4;
        assert!(matches!(
            validate_spec(&raw),
            Err(DomainError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn unknown_and_empty_references() {
        let mut raw = config::bench_small().to_config();
        raw.parts.common_parts.push("chartreuse".into());
        assert_eq!(
            validate_spec(&raw),
            Err(DomainError::UnknownPartReference {
                field: "parts.common_parts".into(),
                label: "chartreuse".into()
            })
        );

        let mut raw = config::bench_small().to_config();
        raw.parts.common_parts.clear();
        raw.hotels.hotel_types[0].specific_parts.clear();
        assert!(matches!(
            validate_spec(&raw),
            Err(DomainError::EmptyRequiredSet { .. })
        ));

        let mut raw = config::bench_small().to_config();
        raw.sensor.sensor_accuracy = 0.4;
        assert!(matches!(
            validate_spec(&raw),
            Err(DomainError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn demo_required_sets() {
        let spec = config::demo_six();
        let names = |s: PartSet| {
            let mut v: Vec<_> = s.iter().map(|p| spec.label(p).to_string()).collect();
            v.sort();
            v
        };
        let a = required_parts(spec.hotel_by_name("A").unwrap(), &spec).unwrap();
        let b = required_parts(spec.hotel_by_name("B").unwrap(), &spec).unwrap();
        assert_eq!(
            names(a),
            ["bright-green", "dark-green", "magenta", "purple", "red", "yellow"]
        );
        assert_eq!(
            names(b),
            ["black", "bright-green", "magenta", "orange", "purple", "yellow"]
        );
        assert!(matches!(
            required_parts(7, &spec),
            Err(DomainError::UnknownHotelType(_))
        ));
    }

    #[test]
    fn empty_specific_set_requires_only_common() {
        let mut raw = config::bench_small().to_config();
        raw.hotels.hotel_types[1].specific_parts.clear();
        let spec = validate_spec(&raw).unwrap();
        assert_eq!(required_parts(1, &spec).unwrap(), spec.common_parts);
    }

    #[test]
    fn terminal_requires_exact_workspace() {
        let spec = config::bench_small();
        let req = spec.required(0);
        let mut s = JointState {
            available: PartSet::EMPTY,
            assembled: PartSet::EMPTY,
            intent: 0,
            step: 0,
        };
        assert!(!is_terminal(&s, &spec));
        s.assembled = req;
        assert_eq!(termination(&s, &spec), Some(Termination::Completed));
        let wrong = spec.hotel_types[1].specific_parts.iter().next().unwrap();
        s.assembled = req.with(wrong);
        assert!(!is_terminal(&s, &spec));
        s.step = spec.horizon;
        assert_eq!(termination(&s, &spec), Some(Termination::Horizon));
    }

    #[test]
    fn action_index_roundtrip() {
        for n in 1..10 {
            for i in 0..3 * n + 1 {
                assert_eq!(RobotAction::from_index(i, n).index(n), i);
            }
        }
    }

    #[test]
    fn default_reward_bounds() {
        assert_eq!(RewardTable::default().step_bounds(), (-12.0, 9.0));
    }

    #[test]
    fn partset_nth_matches_iter() {
        let s = PartSet(0b1011_0010);
        let v: Vec<_> = s.iter().collect();
        for (k, p) in v.iter().enumerate() {
            assert_eq!(s.nth(k), Some(*p));
        }
        assert_eq!(s.nth(v.len()), None);
    }
}
