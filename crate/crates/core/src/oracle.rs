//! Exhaustive breadth-first solver used as ground truth in tests.

use std::collections::VecDeque;

use crate::bat::{Bat, GroundAction};
use crate::grounding::find_possible_actions;
use crate::kb::{entails, Ecq, FgpTheory};
use crate::progression::progress;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub bound: usize,
    /// Maximum number of situations generated before giving up.
    pub node_limit: Option<u64>,
}

impl OracleConfig {
    pub fn new(bound: usize) -> Self {
        OracleConfig { bound, node_limit: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    /// A shortest plan.
    Plan(Vec<GroundAction>),
    NoPlan,
    ResourceLimit,
}

impl OracleResult {
    pub fn plan(&self) -> Option<&[GroundAction]> {
        match self {
            OracleResult::Plan(p) => Some(p),
            _ => None,
        }
    }
}

/// Enumerates every executable situation of length at most `bound` in
/// breadth-first order, without merging repeated states, and returns the
/// first one after which the goal is known true.
pub fn oracle_plan(bat: &Bat, init: &FgpTheory, goal: &Ecq, config: &OracleConfig) -> Result<OracleResult, Error> {
    if entails(init, goal)? {
        return Ok(OracleResult::Plan(Vec::new()));
    }
    let mut queue: VecDeque<(Vec<GroundAction>, FgpTheory)> = VecDeque::new();
    queue.push_back((Vec::new(), init.clone()));
    let mut generated = 0u64;
    while let Some((actions, state)) = queue.pop_front() {
        if actions.len() >= config.bound {
            continue;
        }
        for a in find_possible_actions(&state, bat)? {
            generated += 1;
            if config.node_limit.is_some_and(|l| generated > l) {
                return Ok(OracleResult::ResourceLimit);
            }
            let next = progress(&state, bat, &a)?;
            let mut seq = actions.clone();
            seq.push(a);
            if entails(&next, goal)? {
                return Ok(OracleResult::Plan(seq));
            }
            queue.push_back((seq, next));
        }
    }
    Ok(OracleResult::NoPlan)
}
