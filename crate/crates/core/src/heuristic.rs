//! Delete-relaxation heuristic: a relaxed planning graph grown from the
//! current state, then a backward best-supporter count over its layers.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use crate::bat::{Bat, GroundAction};
use crate::grounding::find_possible_actions;
use crate::kb::{answer_ecq, entails, Ecq, FgpTheory, GroundAtom, Term};
use crate::Error;

/// One layer of the relaxed planning graph.
/// Indices into a layer's `new_actions` that add each atom.
type Achievers = HashMap<GroundAtom, Vec<usize>>;

#[derive(Clone, Debug)]
pub struct PgLayer {
    /// Actions first possible at this layer, in grounding order.
    pub new_actions: Vec<GroundAction>,
    /// Atoms first made true by this layer's actions.
    pub new_effects: BTreeSet<GroundAtom>,
    achievers: Achievers,
}

impl PgLayer {
    /// Indices into `new_actions` of the actions adding `atom`.
    pub fn achievers(&self, atom: &GroundAtom) -> &[usize] {
        self.achievers.get(atom).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Layers grown from `base`. The relaxed state after layer `k` is `base`
/// plus the new effects of layers `1..=k`; only the last one is stored.
#[derive(Clone, Debug)]
pub struct PlanningGraph {
    pub base: FgpTheory,
    pub layers: Vec<PgLayer>,
    state: FgpTheory,
}

impl PlanningGraph {
    /// The cumulative state after the last layer.
    pub fn last_state(&self) -> &FgpTheory {
        &self.state
    }

    /// The cumulative state after the first `k` layers.
    pub fn state_at(&self, k: usize) -> FgpTheory {
        let mut st = self.base.clone();
        for layer in &self.layers[..k] {
            for a in &layer.new_effects {
                st.relation_mut(a.fluent).k_true.insert(a.args.clone());
            }
        }
        st
    }
}

#[derive(Clone, Debug)]
pub enum GraphOutcome {
    /// The goal holds in the last layer; `goal_atoms` is the goal grounded
    /// by its first answer there.
    Reached { graph: PlanningGraph, goal_atoms: BTreeSet<GroundAtom> },
    /// No new actions became possible before the goal was reached.
    Fixpoint { graph: PlanningGraph },
    /// The depth bound ran out first.
    DepthExceeded { graph: PlanningGraph },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Reached,
    Fixpoint,
    DepthExceeded,
}

impl GraphOutcome {
    pub fn kind(&self) -> GraphKind {
        match self {
            GraphOutcome::Reached { .. } => GraphKind::Reached,
            GraphOutcome::Fixpoint { .. } => GraphKind::Fixpoint,
            GraphOutcome::DepthExceeded { .. } => GraphKind::DepthExceeded,
        }
    }

    pub fn graph(&self) -> &PlanningGraph {
        match self {
            GraphOutcome::Reached { graph, .. } | GraphOutcome::Fixpoint { graph } | GraphOutcome::DepthExceeded { graph } => graph,
        }
    }
}

fn relaxed_step(
    state: &mut FgpTheory,
    actions: &[GroundAction],
    bat: &Bat,
) -> Result<(BTreeSet<GroundAtom>, Achievers), Error> {
    let mut new_effects = BTreeSet::new();
    let mut adds_of: Vec<(usize, GroundAtom)> = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        bat.check_action(a)?;
        let applied = bat.for_each_add(a, |fl, t| adds_of.push((i, GroundAtom::new(fl, t))));
        // Relaxed layers compound arithmetic far beyond anything a real
        // situation within the bound reaches. An action whose effect would
        // overflow cannot be executed, so it contributes nothing.
        match applied {
            Err(e) if e.is_overflow() => {}
            r => r?,
        }
    }
    for (_, atom) in &adds_of {
        if !state.k_true(atom.fluent).contains(&atom.args) {
            state.relation_mut(atom.fluent).k_true.insert(atom.args.clone());
            new_effects.insert(atom.clone());
        }
    }
    let mut achievers: Achievers = HashMap::default();
    for (i, atom) in adds_of {
        if new_effects.contains(&atom) {
            let list = achievers.entry(atom).or_default();
            if list.last() != Some(&i) {
                list.push(i);
            }
        }
    }
    Ok((new_effects, achievers))
}

/// Applies the positive effects of `actions` to `state`, ignoring
/// deletions. Known-false tuples are left alone. Returns the new state and
/// the atoms that were not already known true.
pub fn relaxed_progress(
    state: &FgpTheory,
    actions: &[GroundAction],
    bat: &Bat,
) -> Result<(FgpTheory, BTreeSet<GroundAtom>), Error> {
    let mut next = state.clone();
    let (effs, _) = relaxed_step(&mut next, actions, bat)?;
    Ok((next, effs))
}

fn ground_goal(state: &FgpTheory, goal: &Ecq) -> Result<Option<BTreeSet<GroundAtom>>, Error> {
    let Some(b) = answer_ecq(state, goal)?.into_iter().next() else {
        return Ok(None);
    };
    let atoms = goal
        .atoms
        .iter()
        .map(|a| {
            let args = a
                .args
                .iter()
                .map(|t| match b.apply(t) {
                    Term::Const(c) => c,
                    Term::Var(v) => unreachable!("goal variable {v} unbound by its own answer"),
                })
                .collect();
            GroundAtom::new(a.fluent, args)
        })
        .collect();
    Ok(Some(atoms))
}

/// Grows relaxed layers from `state` while the goal is not known true and
/// the depth counter (starting at 0) is at most `d`.
pub fn build_graph(bat: &Bat, goal: &Ecq, d: usize, state: &FgpTheory) -> Result<GraphOutcome, Error> {
    let mut graph = PlanningGraph { base: state.clone(), layers: Vec::new(), state: state.clone() };
    let mut seen: HashSet<GroundAction> = HashSet::default();
    let mut depth = 0usize;
    while !entails(graph.last_state(), goal)? && depth <= d {
        let acts = find_possible_actions(graph.last_state(), bat)?;
        let new_actions: Vec<GroundAction> = acts.into_iter().filter(|a| seen.insert(a.clone())).collect();
        if new_actions.is_empty() {
            return Ok(GraphOutcome::Fixpoint { graph });
        }
        let (new_effects, achievers) = relaxed_step(&mut graph.state, &new_actions, bat)?;
        graph.layers.push(PgLayer { new_actions, new_effects, achievers });
        depth += 1;
    }
    // A goal reached on the last permitted layer counts as reached.
    match ground_goal(graph.last_state(), goal)? {
        Some(goal_atoms) => Ok(GraphOutcome::Reached { graph, goal_atoms }),
        None => Ok(GraphOutcome::DepthExceeded { graph }),
    }
}

/// A heuristic value with the graph outcome that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub value: usize,
    pub kind: GraphKind,
}

/// Heuristic value of a state reached by a situation of length `l`, with
/// `d` steps of bound left.
pub fn h_estimate(bat: &Bat, goal: &Ecq, d: usize, l: usize, state: &FgpTheory) -> Result<usize, Error> {
    estimate(bat, goal, d, l, state).map(|e| e.value)
}

pub fn estimate(bat: &Bat, goal: &Ecq, d: usize, l: usize, state: &FgpTheory) -> Result<Estimate, Error> {
    let outcome = build_graph(bat, goal, d, state)?;
    let kind = outcome.kind();
    let value = match &outcome {
        GraphOutcome::Fixpoint { .. } => l + d + 1,
        GraphOutcome::DepthExceeded { .. } => l + d,
        GraphOutcome::Reached { graph, goal_atoms } => reachability(bat, goal_atoms, graph)?,
    };
    Ok(Estimate { value, kind })
}

struct Reach<'a> {
    bat: &'a Bat,
    pg: &'a PlanningGraph,
    memo: HashMap<(usize, Vec<GroundAtom>), usize>,
    pre: HashMap<GroundAction, BTreeSet<GroundAtom>>,
}

impl Reach<'_> {
    fn pre(&mut self, a: &GroundAction) -> Result<BTreeSet<GroundAtom>, Error> {
        if let Some(p) = self.pre.get(a) {
            return Ok(p.clone());
        }
        let p: BTreeSet<GroundAtom> = self.bat.precondition_atoms(a)?.into_iter().collect();
        self.pre.insert(a.clone(), p.clone());
        Ok(p)
    }

    /// Score of `goals` on the graph truncated to its first `k` layers.
    fn score(&mut self, goals: &BTreeSet<GroundAtom>, k: usize) -> Result<usize, Error> {
        if k == 0 || goals.is_empty() {
            return Ok(0);
        }
        let key = (k, goals.iter().cloned().collect::<Vec<_>>());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let layer = &self.pg.layers[k - 1];
        let curr: Vec<&GroundAtom> = goals.iter().filter(|g| layer.new_effects.contains(*g)).collect();
        let mut new_goals = BTreeSet::new();
        let mut best_support = BTreeSet::new();
        for g in &curr {
            let mut best: Option<(usize, usize)> = None;
            for &i in layer.achievers(g) {
                let pre = self.pre(&layer.new_actions[i])?;
                let est = self.score(&pre, k - 1)?;
                if best.is_none_or(|(_, b)| est < b) {
                    best = Some((i, est));
                }
            }
            let (i, _) = best.ok_or_else(|| Error::Internal(format!("new effect {g:?} has no achiever")))?;
            new_goals.extend(self.pre(&layer.new_actions[i])?);
            best_support.insert(i);
        }
        let mut next: BTreeSet<GroundAtom> = goals.iter().filter(|g| !layer.new_effects.contains(*g)).cloned().collect();
        next.extend(new_goals);
        let v = best_support.len() + self.score(&next, k - 1)?;
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Counts best supporters of `goals` layer by layer, outermost first.
pub fn reachability(bat: &Bat, goals: &BTreeSet<GroundAtom>, pg: &PlanningGraph) -> Result<usize, Error> {
    let last = pg.last_state();
    if let Some(g) = goals.iter().find(|g| !last.k_true(g.fluent).contains(&g.args)) {
        return Err(Error::Internal(format!("goal atom {} is not in the planning graph", g.display(bat.signature()))));
    }
    Reach { bat, pg, memo: HashMap::default(), pre: HashMap::default() }.score(goals, pg.layers.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bat::{ActionSchema, ArgSpec, FunctionRegistry, Ssa, SsaDisjunct};
    use crate::dsl::{parse_domain, parse_problem};
    use crate::kb::{Atom, Constant, Signature, Var};
    use std::sync::Arc;
    
    const COUNTDOWN: &str = include_str!("../../../benchmarks/domains/countdown.bpd");

    fn ex(problem: &str) -> (Bat, FgpTheory, Ecq) {
        let bat = parse_domain(COUNTDOWN).unwrap();
        let p = parse_problem(problem, &bat).unwrap();
        let th = p.initial_theory(&bat).unwrap();
        (bat, th, p.goal)
    }

    fn ex1() -> (Bat, FgpTheory, Ecq) {
        ex(include_str!("../../../benchmarks/problems/countdown-ex1.bpp"))
    }

    /// Propositional toy: `make-p` needs nothing and adds p and q; `make-r`
    /// needs p and adds r.
    fn toy() -> (Bat, FgpTheory) {
        let mut sig = Signature::new();
        let seed = sig.declare("seed", 1).unwrap();
        let p = sig.declare("p", 1).unwrap();
        let q = sig.declare("q", 1).unwrap();
        let r = sig.declare("r", 1).unwrap();
        let sig = Arc::new(sig);
        let x = || vec![crate::kb::Term::Var(Var::new("x"))];
        let schemas = vec![
            ActionSchema::new("make-p", vec![Var::new("x")], vec![Atom::new(seed, x())], vec![]),
            ActionSchema::new("make-r", vec![Var::new("x")], vec![Atom::new(p, x())], vec![]),
        ];
        let eff = |a: &str| SsaDisjunct::new(a, vec![ArgSpec::Param(0)]);
        let ssas = vec![
            Ssa { fluent: p, positive: vec![eff("make-p")], negative: vec![] },
            Ssa { fluent: q, positive: vec![eff("make-p")], negative: vec![] },
            Ssa { fluent: r, positive: vec![eff("make-r")], negative: vec![] },
        ];
        let bat = Bat::new("toy", sig.clone(), schemas, ssas, FunctionRegistry::empty());
        let mut th = FgpTheory::new(sig);
        th.insert_true(seed, vec![Constant::Int(1)]).unwrap();
        (bat, th)
    }

    fn goal_of(bat: &Bat, names: &[&str]) -> Ecq {
        let sig = bat.signature();
        let atoms = names
            .iter()
            .map(|n| Atom::new(sig.lookup(n).unwrap(), vec![crate::kb::Term::Const(Constant::Int(1))]))
            .collect();
        Ecq::new(vec![], atoms, vec![]).unwrap()
    }

    #[test]
    fn relaxed_progress_keeps_deleted_atoms() {
        let (bat, th, _) = ex1();
        let mult = GroundAction::new("mult", vec![1.into(), 4.into(), 2.into(), 5.into()]);
        let (st, effs) = relaxed_progress(&th, &[mult], &bat).unwrap();
        let value = bat.signature().lookup("value").unwrap();
        let available = bat.signature().lookup("available").unwrap();
        assert!(st.k_true(value).contains(&vec![1.into(), 20.into()]));
        assert!(st.k_true(value).contains(&vec![1.into(), 4.into()]));
        assert!(st.k_true(available).contains(&vec![2.into()]));
        assert_eq!(effs.len(), 1);
        let (same, none) = relaxed_progress(&th, &[], &bat).unwrap();
        assert_eq!(same, th);
        assert!(none.is_empty());
    }

    #[test]
    fn overflowing_effects_are_dropped() {
        let big = 1i64 << 40;
        let (bat, th, goal) = ex(&format!(
            "(problem p (domain countdown) (init (available 1) (available 2) (value 1 {big}) (value 2 {big})) \
             (goal (exists (?c) (value ?c 7))) (bound 2))"
        ));
        let out = build_graph(&bat, &goal, 0, &th).unwrap();
        let value = bat.signature().lookup("value").unwrap();
        let st = out.graph().last_state();
        // One layer: both additions land, both multiplications overflow.
        assert!(st.k_true(value).contains(&vec![1.into(), (2 * big).into()]));
        assert_eq!(st.k_true(value).len(), 4);
    }

    #[test]
    fn graph_outcomes() {
        let (bat, th, goal) = ex1();
        let out = build_graph(&bat, &goal, 1, &th).unwrap();
        let GraphOutcome::Reached { graph, goal_atoms } = &out else { panic!("{:?}", out.kind()) };
        assert_eq!(graph.layers.len(), 1);
        assert!(graph.layers[0].new_actions.iter().any(|a| &*a.name == "mult"));
        assert_eq!(goal_atoms.len(), 1);

        let (bat2, th2, goal2) = ex(include_str!("../../../benchmarks/problems/countdown-ex2.bpp"));
        let out = build_graph(&bat2, &goal2, 3, &th2).unwrap();
        assert_eq!(out.kind(), GraphKind::Fixpoint);
        assert!(out.graph().layers.is_empty());
    }

    #[test]
    fn goal_already_true_has_no_layers() {
        let (bat, th) = toy();
        let out = build_graph(&bat, &goal_of(&bat, &["seed"]), 0, &th).unwrap();
        assert_eq!(out.kind(), GraphKind::Reached);
        assert!(out.graph().layers.is_empty());
        assert_eq!(h_estimate(&bat, &goal_of(&bat, &["seed"]), 0, 0, &th).unwrap(), 0);
    }

    #[test]
    fn penalties() {
        let (bat, th) = toy();
        let far = goal_of(&bat, &["r"]);
        // r needs two layers; with d = 0 only one is built.
        assert_eq!(build_graph(&bat, &far, 0, &th).unwrap().kind(), GraphKind::DepthExceeded);
        assert_eq!(h_estimate(&bat, &far, 0, 3, &th).unwrap(), 3);
        assert_eq!(build_graph(&bat, &far, 1, &th).unwrap().kind(), GraphKind::Reached);

        let (bat2, th2, goal2) = ex(include_str!("../../../benchmarks/problems/countdown-ex2.bpp"));
        assert_eq!(h_estimate(&bat2, &goal2, 2, 1, &th2).unwrap(), 4);
    }

    #[test]
    fn best_supporters() {
        let (bat, th) = toy();
        assert_eq!(h_estimate(&bat, &goal_of(&bat, &["p"]), 3, 0, &th).unwrap(), 1);
        // p and q share their only supporter.
        assert_eq!(h_estimate(&bat, &goal_of(&bat, &["p", "q"]), 3, 0, &th).unwrap(), 1);
        assert_eq!(h_estimate(&bat, &goal_of(&bat, &["r"]), 3, 0, &th).unwrap(), 2);
        let out = build_graph(&bat, &goal_of(&bat, &["r"]), 3, &th).unwrap();
        assert_eq!(reachability(&bat, &BTreeSet::new(), out.graph()).unwrap(), 0);
    }

    #[test]
    fn one_step_after_a_useless_action() {
        let (bat, th, goal) = ex1();
        let add = GroundAction::new("add", vec![1.into(), 4.into(), 2.into(), 5.into()]);
        let st = crate::progression::progress(&th, &bat, &add).unwrap();
        // Counter 1 holds 9 and counter 2 is retired: nothing reaches 20.
        assert_eq!(estimate(&bat, &goal, 2, 1, &st).unwrap().kind, GraphKind::Fixpoint);
        // With two spare counters, one mult away from 20.
        let p = parse_problem(
            "(problem t (domain countdown) (init (available 1) (available 2) (available 3) (available 4) \
             (value 1 4) (value 2 5) (value 3 7) (value 4 2)) (goal (exists (?c) (value ?c 20))) (bound 3))",
            &bat,
        )
        .unwrap();
        let th3 = p.initial_theory(&bat).unwrap();
        let useless = GroundAction::new("add", vec![3.into(), 7.into(), 4.into(), 2.into()]);
        let st3 = crate::progression::progress(&th3, &bat, &useless).unwrap();
        assert_eq!(h_estimate(&bat, &p.goal, 2, 1, &st3).unwrap(), 1);
    }
}
