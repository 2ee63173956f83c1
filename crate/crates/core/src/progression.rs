//! Progression of finite grounded proper theories through ground actions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bat::{Bat, EvalError, GroundAction};
use crate::kb::{Constant, FgpTheory, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgressError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{action} both adds and deletes `{fluent}` on {tuples:?}")]
    EffectConflict { action: String, fluent: String, tuples: Vec<Tuple> },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<ProgressError>,
    },
}

/// A sequence of ground actions from the initial situation.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Situation {
    pub actions: Vec<GroundAction>,
}

impl Situation {
    pub fn root() -> Self {
        Situation::default()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// `do(action, self)`.
    pub fn then(&self, action: GroundAction) -> Self {
        let mut actions = Vec::with_capacity(self.actions.len() + 1);
        actions.extend(self.actions.iter().cloned());
        actions.push(action);
        Situation { actions }
    }
}

impl From<Vec<GroundAction>> for Situation {
    fn from(actions: Vec<GroundAction>) -> Self {
        Situation { actions }
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

/// Progresses `theory` through `action`: for every fluent,
/// `KF := (KF - dels) + adds` and `K~F := (K~F - adds) + dels`.
///
/// Possibility is not checked here.
pub fn progress(theory: &FgpTheory, bat: &Bat, action: &GroundAction) -> Result<FgpTheory, ProgressError> {
    bat.check_action(action)?;
    let mut next = theory.clone();
    let mut conflict = None;
    bat.for_each_effect(action, |fluent, adds, dels| {
        if conflict.is_some() {
            return;
        }
        let both: Vec<Tuple> = adds.intersection(&dels).cloned().collect();
        if !both.is_empty() {
            conflict = Some(ProgressError::EffectConflict {
                action: action.to_string(),
                fluent: bat.signature().fluent(fluent).name.to_string(),
                tuples: both,
            });
            return;
        }
        let rel = next.relation_mut(fluent);
        for t in &dels {
            rel.k_true.remove(t);
        }
        for t in &adds {
            rel.k_false.remove(t);
        }
        rel.k_true.extend(adds);
        rel.k_false.extend(dels);
    })?;
    match conflict {
        Some(e) => Err(e),
        None => Ok(next),
    }
}

/// Left fold of [`progress`] over the situation's actions.
pub fn progress_sequence(theory: &FgpTheory, bat: &Bat, situation: &Situation) -> Result<FgpTheory, ProgressError> {
    let mut state = theory.clone();
    for (step, a) in situation.actions.iter().enumerate() {
        state = progress(&state, bat, a).map_err(|e| ProgressError::AtStep { step, source: Box::new(e) })?;
    }
    Ok(state)
}

/// Objects that appear in or disappear from the theory across a step.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ObjectDiff {
    pub created: BTreeSet<Constant>,
    pub destroyed: BTreeSet<Constant>,
}

pub fn object_diff(before: &FgpTheory, after: &FgpTheory) -> ObjectDiff {
    let b = before.constants();
    let a = after.constants();
    ObjectDiff {
        created: a.difference(&b).cloned().collect(),
        destroyed: b.difference(&a).cloned().collect(),
    }
}
