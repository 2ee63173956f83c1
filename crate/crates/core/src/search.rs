//! A* over the situation tree with a plan-length bound, and plan validation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::{Duration, Instant};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::bat::{Bat, GroundAction};
use crate::grounding::find_possible_actions;
use crate::heuristic::{estimate, Estimate, GraphKind};
use crate::kb::{entails, Ecq, FgpTheory};
use crate::progression::{progress, progress_sequence, Situation};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannerConfig {
    pub bound: usize,
    pub heuristic_on: bool,
    /// Skip children whose progressed theory was generated before.
    pub duplicate_detection: bool,
    /// Drop children whose relaxed graph hits a fixpoint short of the goal.
    pub dead_end_prune: bool,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Keep each node's progressed theory instead of recomputing it from the
    /// initial theory when popped.
    pub cache_states: bool,
    /// Reuse the estimate of a theory already evaluated with the same
    /// remaining bound. Does not change which nodes are generated or their
    /// order.
    pub cache_heuristic: bool,
    /// Record the length of every popped situation in `SearchStats::pops`.
    pub record_pops: bool,
}

impl PlannerConfig {
    pub fn new(bound: usize) -> Self {
        PlannerConfig {
            bound,
            heuristic_on: true,
            duplicate_detection: false,
            dead_end_prune: false,
            node_limit: None,
            time_limit: None,
            cache_states: false,
            cache_heuristic: true,
            record_pops: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub peak_frontier: u64,
    pub duplicates: u64,
    pub pruned: u64,
    pub fixpoints: u64,
    pub depth_exceeded: u64,
    /// Heuristic values reused from an earlier state with the same theory
    /// and remaining bound.
    pub h_cache_hits: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pops: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Plan(Vec<GroundAction>),
    NoPlanWithinBound,
    ResourceLimit,
}

impl Outcome {
    pub fn plan(&self) -> Option<&[GroundAction]> {
        match self {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub elapsed: Duration,
}

struct Node {
    situation: Situation,
    state: Option<FgpTheory>,
}

/// Finds a situation of length at most `config.bound` whose actions are
/// known possible in turn and after which the goal is known true.
///
/// Situations are popped by ascending `length + h`, ties in insertion order.
pub fn plan(bat: &Bat, init: &FgpTheory, goal: &Ecq, config: &PlannerConfig) -> Result<PlanResult, Error> {
    let start = Instant::now();
    let n = config.bound;
    let mut stats = SearchStats::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut frontier: BinaryHeap<Reverse<(usize, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut seen: FxHashSet<FgpTheory> = FxHashSet::default();
    // The estimate depends only on the state and the remaining bound, and the
    // tree search reaches the same state along many situations.
    let mut h_cache: FxHashMap<(FgpTheory, usize), Estimate> = FxHashMap::default();
    if config.duplicate_detection {
        seen.insert(init.clone());
    }

    nodes.push(Node { situation: Situation::root(), state: config.cache_states.then(|| init.clone()) });
    frontier.push(Reverse((n + 1, seq, 0)));
    seq += 1;
    stats.peak_frontier = 1;

    let finish = |outcome, stats| Ok(PlanResult { outcome, stats, elapsed: start.elapsed() });

    while let Some(Reverse((_, _, id))) = frontier.pop() {
        if config.time_limit.is_some_and(|t| start.elapsed() >= t)
            || config.node_limit.is_some_and(|l| stats.expansions >= l)
        {
            return finish(Outcome::ResourceLimit, stats);
        }
        let node = &mut nodes[id];
        let situation = std::mem::take(&mut node.situation);
        let now = match node.state.take() {
            Some(st) => st,
            None => progress_sequence(init, bat, &situation)?,
        };
        if config.record_pops {
            stats.pops.push(situation.len());
        }
        if entails(&now, goal)? {
            return finish(Outcome::Plan(situation.actions), stats);
        }
        stats.expansions += 1;
        let acts = find_possible_actions(&now, bat)?;
        for a in acts {
            let len = situation.len() + 1;
            if len > n {
                continue;
            }
            let st = progress(&now, bat, &a)?;
            stats.generated += 1;
            if config.duplicate_detection && !seen.insert(st.clone()) {
                stats.duplicates += 1;
                continue;
            }
            let d = n - len;
            let h = if config.heuristic_on || config.dead_end_prune {
                let key = (st.clone(), d);
                let cached = if config.cache_heuristic { h_cache.get(&key).copied() } else { None };
                let e = match cached {
                    Some(e) => {
                        stats.h_cache_hits += 1;
                        e
                    }
                    None => {
                        let e = estimate(bat, goal, d, len, &st)?;
                        if config.cache_heuristic {
                            h_cache.insert(key, e);
                        }
                        e
                    }
                };
                match e.kind {
                    GraphKind::Fixpoint => stats.fixpoints += 1,
                    GraphKind::DepthExceeded => stats.depth_exceeded += 1,
                    GraphKind::Reached => {}
                }
                if config.dead_end_prune && e.kind == GraphKind::Fixpoint {
                    stats.pruned += 1;
                    continue;
                }
                if config.heuristic_on {
                    e.value
                } else {
                    0
                }
            } else {
                0
            };
            let child = Node { situation: situation.then(a), state: config.cache_states.then_some(st) };
            nodes.push(child);
            frontier.push(Reverse((len + h, seq, nodes.len() - 1)));
            seq += 1;
        }
        stats.peak_frontier = stats.peak_frontier.max(frontier.len() as u64);
    }
    finish(Outcome::NoPlanWithinBound, stats)
}

/// Why a plan fails validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationFailure {
    /// The action at `step` is not known possible, or cannot be applied.
    Step { step: usize, action: String, reason: String },
    GoalUnsatisfied,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::Step { step, action, reason } => write!(f, "step {step} {action}: {reason}"),
            ValidationFailure::GoalUnsatisfied => f.write_str("goal unsatisfied"),
        }
    }
}

/// Checks that each action's precondition is known true in the state
/// before it and that the goal is known true at the end.
pub fn validate_plan(bat: &Bat, init: &FgpTheory, goal: &Ecq, plan: &[GroundAction]) -> Result<(), ValidationFailure> {
    let mut state = init.clone();
    for (step, a) in plan.iter().enumerate() {
        let fail = |reason: String| ValidationFailure::Step { step, action: a.to_string(), reason };
        let schema = bat.check_action(a).map_err(|e| fail(e.to_string()))?;
        let pre = schema.precondition.clone();
        let ok = precondition_holds(&state, &pre, &a.args).map_err(|e| fail(e.to_string()))?;
        if !ok {
            return Err(fail("precondition not known true".into()));
        }
        state = progress(&state, bat, a).map_err(|e| fail(e.to_string()))?;
    }
    match entails(&state, goal) {
        Ok(true) => Ok(()),
        Ok(false) => Err(ValidationFailure::GoalUnsatisfied),
        Err(e) => Err(ValidationFailure::Step { step: plan.len(), action: "goal".into(), reason: e.to_string() }),
    }
}

/// Whether the precondition, with its parameters bound to `args`, is
/// entailed by `state`.
fn precondition_holds(state: &FgpTheory, pre: &Ecq, args: &[crate::kb::Constant]) -> Result<bool, crate::kb::KbError> {
    use crate::kb::{Atom, Diseq, Term};
    let bind = |t: &Term| match t {
        Term::Var(v) => pre.vars.iter().position(|p| p == v).map(|i| args[i].clone()).expect("validated precondition"),
        Term::Const(c) => c.clone(),
    };
    for Diseq { left, right } in &pre.diseqs {
        if bind(&Term::Var(left.clone())) == bind(right) {
            return Ok(false);
        }
    }
    let atoms: Vec<Atom> = pre
        .atoms
        .iter()
        .map(|a| Atom::new(a.fluent, a.args.iter().map(|t| Term::Const(bind(t))).collect()))
        .collect();
    entails(state, &Ecq { vars: Vec::new(), atoms, diseqs: Vec::new() })
}
