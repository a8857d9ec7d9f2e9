//! Online Monte-Carlo tree search over the joint model.
//!
//! Each simulation samples a state from the root belief, descends the tree
//! with UCB1, adds one node, and estimates the leaf with a rollout. The
//! baseline rolls out uniformly at random; the relevance variant rolls out
//! proportionally to [`relevance_score`] and seeds root action values with
//! [`root_bonus`].

use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefError, Marginals, ParticleBelief};
use crate::domain::{is_completed, termination, JointState, Observation, RobotAction, ScenarioSpec};
use crate::sim::step;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    Relevance,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Relevance => "relevance",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" | "pomcp" => Ok(Variant::Baseline),
            "relevance" => Ok(Variant::Relevance),
            other => Err(format!("unknown planner `{other}` (expected baseline or relevance)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalSelection {
    MaxVisits,
    MaxValue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig {
    /// Simulations per decision.
    pub budget: usize,
    pub ucb_c: f64,
    /// Search depth cap; `None` means the remaining horizon.
    pub max_depth: Option<u32>,
    pub variant: Variant,
    pub lambda_bonus: f64,
    pub n_init: u32,
    pub final_selection: FinalSelection,
    /// Keep the observed subtree between decisions.
    pub reuse_tree: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            budget: 1024,
            ucb_c: 10.0,
            max_depth: None,
            variant: Variant::Baseline,
            lambda_bonus: 2.0,
            n_init: 1,
            final_selection: FinalSelection::MaxVisits,
            reuse_tree: true,
        }
    }
}

impl PlannerConfig {
    pub fn with_variant(variant: Variant, budget: usize) -> Self {
        Self {
            variant,
            budget,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("cannot plan from an empty belief")]
    EmptyBelief,
    #[error("planner configuration: {0}")]
    InvalidConfig(&'static str),
}

impl From<BeliefError> for PlanError {
    fn from(_: BeliefError) -> Self {
        PlanError::EmptyBelief
    }
}

/// Statistics of one action edge. `prior_count` pseudo-visits at value
/// `V_init` are folded into `count` and `value`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeStats {
    pub count: u32,
    pub prior_count: u32,
    pub value: f64,
}

impl EdgeStats {
    #[inline]
    pub fn real_count(&self) -> u32 {
        self.count - self.prior_count
    }
}

/// Inserts `x` into a running argmax, replacing or sharing ties uniformly.
#[inline]
fn offer<R: Rng + ?Sized>(best: &mut Option<(usize, f64)>, ties: &mut u32, i: usize, x: f64, rng: &mut R) {
    match best {
        Some((_, b)) if x < *b => {}
        Some((bi, b)) if x == *b => {
            *ties += 1;
            if rng.random_range(0..*ties) == 0 {
                *bi = i;
            }
        }
        _ => {
            *best = Some((i, x));
            *ties = 1;
        }
    }
}

/// UCB1 over the edges of an expanded node: `Q(a) + c·sqrt(ln N / n(a))`
/// with `N = Σ n(a)`. Actions without real visits go first, highest
/// initial value first. Ties are broken uniformly at random.
pub fn ucb1_select<R: Rng + ?Sized>(edges: &[EdgeStats], ucb_c: f64, rng: &mut R) -> usize {
    select_by(edges.len(), |i| edges[i], ucb_c, rng)
}

#[inline]
fn select_by<R, F>(len: usize, stats: F, ucb_c: f64, rng: &mut R) -> usize
where
    R: Rng + ?Sized,
    F: Fn(usize) -> EdgeStats,
{
    let mut best = None;
    let mut ties = 0;
    let mut total = 0;
    for i in 0..len {
        let e = stats(i);
        total += e.count;
        if e.real_count() == 0 {
            offer(&mut best, &mut ties, i, e.value, rng);
        }
    }
    if let Some((i, _)) = best {
        return i;
    }
    let log_n = (total as f64).ln();
    for i in 0..len {
        let e = stats(i);
        let score = e.value + ucb_c * (log_n / e.count as f64).sqrt();
        offer(&mut best, &mut ties, i, score, rng);
    }
    best.expect("node has at least one action").0
}

/// Rollout preference of `a` in a fully specified state.
#[inline]
pub fn relevance_score(s: &JointState, a: RobotAction, spec: &ScenarioSpec) -> f64 {
    let open = spec.required(s.intent()).difference(s.assembled);
    match a {
        RobotAction::Restock(p) => {
            if !s.available.contains(p) && open.contains(p) {
                1.0
            } else {
                0.05
            }
        }
        RobotAction::ObserveInventory(p) | RobotAction::ObserveWorkspace(p) => {
            if open.contains(p) {
                0.3
            } else {
                0.05
            }
        }
        RobotAction::Wait => 0.1,
    }
}

fn bonus_from_marginals(m: &Marginals, a: RobotAction, cfg: &PlannerConfig) -> f64 {
    match a {
        RobotAction::Restock(p) => {
            let i = p.index();
            cfg.lambda_bonus * (1.0 - m.available[i]) * m.required[i] * (1.0 - m.assembled[i])
        }
        RobotAction::ObserveInventory(p) | RobotAction::ObserveWorkspace(p) => {
            cfg.lambda_bonus * 0.3 * m.required_unassembled[p.index()]
        }
        RobotAction::Wait => 0.0,
    }
}

/// Initial value installed on a root edge by the relevance variant.
pub fn root_bonus(
    b: &ParticleBelief,
    a: RobotAction,
    spec: &ScenarioSpec,
    cfg: &PlannerConfig,
) -> Result<f64, PlanError> {
    Ok(bonus_from_marginals(&b.marginals(spec)?, a, cfg))
}

#[inline]
fn rollout_action<R: Rng + ?Sized>(
    s: &JointState,
    spec: &ScenarioSpec,
    variant: Variant,
    scores: &mut [f64],
    rng: &mut R,
) -> RobotAction {
    let n = spec.n_parts();
    match variant {
        Variant::Baseline => RobotAction::from_index(rng.random_range(0..spec.n_actions()), n),
        Variant::Relevance => {
            let mut total = 0.0;
            for (i, slot) in scores.iter_mut().enumerate() {
                *slot = relevance_score(s, RobotAction::from_index(i, n), spec);
                total += *slot;
            }
            let mut u = rng.random::<f64>() * total;
            for (i, &w) in scores.iter().enumerate() {
                if u < w {
                    return RobotAction::from_index(i, n);
                }
                u -= w;
            }
            RobotAction::Wait
        }
    }
}

/// Discounted return of a default-policy simulation of at most `depth` steps.
pub fn rollout<R: Rng + ?Sized>(
    s: &JointState,
    depth: u32,
    spec: &ScenarioSpec,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> f64 {
    let mut scores = vec![0.0; spec.n_actions()];
    let mut state = *s;
    let mut total = 0.0;
    let mut discount = 1.0;
    for _ in 0..depth {
        if termination(&state, spec).is_some() {
            break;
        }
        let a = rollout_action(&state, spec, cfg.variant, &mut scores, rng);
        let out = step(&state, a, spec, rng).expect("non-terminal state");
        total += discount * out.reward;
        discount *= spec.discount;
        state = out.next;
    }
    total
}

const NO_NODE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Edge {
    stats: EdgeStats,
    children: [u32; 2],
}

impl Default for Edge {
    fn default() -> Self {
        Edge {
            stats: EdgeStats::default(),
            children: [NO_NODE; 2],
        }
    }
}

/// Arena-allocated search tree; node `i` owns edges `i·A .. (i+1)·A`.
#[derive(Clone, Debug)]
pub struct SearchTree {
    n_actions: usize,
    visits: Vec<u32>,
    primed: Vec<bool>,
    edges: Vec<Edge>,
}

impl SearchTree {
    fn new(n_actions: usize) -> Self {
        let mut t = SearchTree {
            n_actions,
            visits: Vec::new(),
            primed: Vec::new(),
            edges: Vec::new(),
        };
        t.add_node();
        t
    }

    fn add_node(&mut self) -> u32 {
        let id = self.visits.len() as u32;
        self.visits.push(0);
        self.primed.push(false);
        self.edges.extend(std::iter::repeat_n(Edge::default(), self.n_actions));
        id
    }

    #[inline]
    fn edge_range(&self, node: u32) -> std::ops::Range<usize> {
        let start = node as usize * self.n_actions;
        start..start + self.n_actions
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Edge statistics of the root.
    pub fn root_edges(&self) -> Vec<EdgeStats> {
        self.edges[self.edge_range(0)].iter().map(|e| e.stats).collect()
    }

    pub fn root_visits(&self) -> u32 {
        self.visits[0]
    }

    /// Every node's visit count equals the real visits of its edges.
    pub fn is_consistent(&self) -> bool {
        (0..self.len() as u32).all(|n| {
            let real: u32 = self.edges[self.edge_range(n)].iter().map(|e| e.stats.real_count()).sum();
            real == self.visits[n as usize]
        })
    }

    /// The subtree under `(a, o)` of the root, compacted into a new arena.
    fn subtree(&self, action: usize, slot: usize) -> Option<SearchTree> {
        let start = self.edges[self.edge_range(0)][action].children[slot];
        if start == NO_NODE {
            return None;
        }
        let mut out = SearchTree {
            n_actions: self.n_actions,
            visits: Vec::new(),
            primed: Vec::new(),
            edges: Vec::new(),
        };
        let mut queue = std::collections::VecDeque::from([(start, out.add_node())]);
        while let Some((old, new)) = queue.pop_front() {
            out.visits[new as usize] = self.visits[old as usize];
            out.primed[new as usize] = self.primed[old as usize];
            for a in 0..self.n_actions {
                let e = self.edges[self.edge_range(old).start + a];
                let mut copy = Edge {
                    stats: e.stats,
                    children: [NO_NODE; 2],
                };
                for (k, &c) in e.children.iter().enumerate() {
                    if c != NO_NODE {
                        let id = out.add_node();
                        copy.children[k] = id;
                        queue.push_back((c, id));
                    }
                }
                let at = out.edge_range(new).start + a;
                out.edges[at] = copy;
            }
        }
        Some(out)
    }
}

struct SearchContext<'a> {
    spec: &'a ScenarioSpec,
    cfg: &'a PlannerConfig,
    max_depth: u32,
    value_bounds: (f64, f64),
    scores: Vec<f64>,
}

/// Planner state carried across decisions of one episode.
#[derive(Clone, Debug)]
pub struct Planner {
    cfg: PlannerConfig,
    tree: SearchTree,
}

impl Planner {
    pub fn new(cfg: PlannerConfig, spec: &ScenarioSpec) -> Self {
        Planner {
            cfg,
            tree: SearchTree::new(spec.n_actions()),
        }
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    /// Root value estimate of `a` (includes any installed initial value).
    pub fn root_value(&self, a: RobotAction, spec: &ScenarioSpec) -> f64 {
        self.tree.edges[a.index(spec.n_parts())].stats.value
    }

    /// Runs `budget` simulations from `belief` and returns the chosen action.
    pub fn plan<R: Rng + ?Sized>(
        &mut self,
        belief: &ParticleBelief,
        spec: &ScenarioSpec,
        rng: &mut R,
    ) -> Result<RobotAction, PlanError> {
        if self.cfg.budget == 0 {
            return Err(PlanError::InvalidConfig("budget must be at least 1"));
        }
        if !(self.cfg.ucb_c > 0.0) {
            return Err(PlanError::InvalidConfig("ucb_c must be positive"));
        }
        let sampler = belief.sampler()?;
        let remaining = spec.horizon.saturating_sub(belief.step());
        let max_depth = self.cfg.max_depth.map_or(remaining, |d| d.min(remaining));
        let (lo, hi) = spec.rewards.step_bounds();
        let value_bounds = if spec.discount < 1.0 {
            (lo / (1.0 - spec.discount), hi / (1.0 - spec.discount))
        } else {
            (lo * spec.horizon as f64, hi * spec.horizon as f64)
        };
        if self.cfg.variant == Variant::Relevance && !self.tree.primed[0] {
            self.install_root_bonus(&belief.marginals(spec)?, spec);
        }
        let mut ctx = SearchContext {
            spec,
            cfg: &self.cfg,
            max_depth,
            value_bounds,
            scores: vec![0.0; spec.n_actions()],
        };
        let particles = belief.particles();
        for _ in 0..self.cfg.budget {
            let s = particles[sampler.sample(rng)];
            simulate(&mut self.tree, &mut ctx, 0, s, 0, rng);
        }
        debug_assert!(self.tree.is_consistent());
        Ok(self.best_action(spec))
    }

    fn install_root_bonus(&mut self, m: &Marginals, spec: &ScenarioSpec) {
        let n_init = self.cfg.n_init;
        let range = self.tree.edge_range(0);
        for (i, e) in self.tree.edges[range].iter_mut().enumerate() {
            let bonus = bonus_from_marginals(m, RobotAction::from_index(i, spec.n_parts()), &self.cfg);
            let total = e.stats.count + n_init;
            if total > 0 {
                e.stats.value = (e.stats.value * e.stats.count as f64 + bonus * n_init as f64) / total as f64;
            }
            e.stats.count = total;
            e.stats.prior_count += n_init;
        }
        self.tree.primed[0] = true;
    }

    fn best_action(&self, spec: &ScenarioSpec) -> RobotAction {
        let edges = &self.tree.edges[self.tree.edge_range(0)];
        let key = |e: &EdgeStats| match self.cfg.final_selection {
            FinalSelection::MaxVisits => (e.real_count() as f64, e.value),
            FinalSelection::MaxValue => (
                if e.real_count() > 0 { e.value } else { f64::NEG_INFINITY },
                e.real_count() as f64,
            ),
        };
        let mut best = 0;
        for i in 1..edges.len() {
            if key(&edges[i].stats) > key(&edges[best].stats) {
                best = i;
            }
        }
        RobotAction::from_index(best, spec.n_parts())
    }

    /// Moves the root to the `(a, o)` child, or starts afresh.
    pub fn advance(&mut self, a: RobotAction, o: Observation, spec: &ScenarioSpec) {
        let reused = if self.cfg.reuse_tree {
            self.tree.subtree(a.index(spec.n_parts()), o.slot())
        } else {
            None
        };
        self.tree = reused.unwrap_or_else(|| SearchTree::new(spec.n_actions()));
    }
}

fn simulate<R: Rng + ?Sized>(
    tree: &mut SearchTree,
    ctx: &mut SearchContext<'_>,
    node: u32,
    s: JointState,
    depth: u32,
    rng: &mut R,
) -> f64 {
    if depth >= ctx.max_depth || termination(&s, ctx.spec).is_some() {
        return 0.0;
    }
    let range = tree.edge_range(node);
    let a = {
        let edges = &tree.edges[range.clone()];
        select_by(edges.len(), |i| edges[i].stats, ctx.cfg.ucb_c, rng)
    };
    let action = RobotAction::from_index(a, ctx.spec.n_parts());
    let out = step(&s, action, ctx.spec, rng).expect("non-terminal state");
    let slot = out.observation.slot();
    let child = tree.edges[range.start + a].children[slot];
    let future = if out.terminal.is_some() {
        0.0
    } else if child == NO_NODE {
        let id = tree.add_node();
        tree.edges[range.start + a].children[slot] = id;
        rollout_from(&out.next, ctx.max_depth - depth - 1, ctx, rng)
    } else {
        simulate(tree, ctx, child, out.next, depth + 1, rng)
    };
    let ret = out.reward + ctx.spec.discount * future;
    let e = &mut tree.edges[range.start + a].stats;
    e.count += 1;
    e.value += (ret - e.value) / e.count as f64;
    debug_assert!(
        e.value >= ctx.value_bounds.0 - 1e-9 && e.value <= ctx.value_bounds.1 + 1e-9,
        "Q out of bounds: {}",
        e.value
    );
    tree.visits[node as usize] += 1;
    ret
}

fn rollout_from<R: Rng + ?Sized>(s: &JointState, depth: u32, ctx: &mut SearchContext<'_>, rng: &mut R) -> f64 {
    let spec = ctx.spec;
    let mut state = *s;
    let mut total = 0.0;
    let mut discount = 1.0;
    for _ in 0..depth {
        if is_completed(&state, spec) || state.step >= spec.horizon {
            break;
        }
        let a = rollout_action(&state, spec, ctx.cfg.variant, &mut ctx.scores, rng);
        let out = step(&state, a, spec, rng).expect("non-terminal state");
        total += discount * out.reward;
        discount *= spec.discount;
        state = out.next;
    }
    total
}

/// Plans one decision from scratch.
pub fn plan<R: Rng + ?Sized>(
    b: &ParticleBelief,
    spec: &ScenarioSpec,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<RobotAction, PlanError> {
    Planner::new(*cfg, spec).plan(b, spec, rng)
}
