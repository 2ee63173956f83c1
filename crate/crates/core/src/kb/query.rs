//! Extended conjunctive queries: existentially closed conjunctions of
//! positive atoms and safe disequalities.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use super::{Constant, FgpTheory, FluentId, KbError, Signature, TruthValue};

/// A query variable, stored without the leading `?`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name.trim_start_matches('?')))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Var),
    Const(Constant),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Const(c)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.fmt(f),
            Term::Const(c) => c.fmt(f),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Atom {
    pub fluent: FluentId,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(fluent: FluentId, args: Vec<Term>) -> Self {
        Atom { fluent, args }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

/// `left != right`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Diseq {
    pub left: Var,
    pub right: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EcqError {
    #[error("variable {0} is not quantified by the query")]
    FreeVariable(Var),
    #[error("variable {0} occurs in no positive atom")]
    UnsafeVariable(Var),
    #[error("variable {0} is quantified twice")]
    DuplicateVariable(Var),
}

/// `exists vars. atoms /\ diseqs`.
///
/// For action preconditions `vars` lists the action parameters: the
/// answers of the query are exactly the parameter tuples for which the
/// action is known to be possible.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Ecq {
    pub vars: Vec<Var>,
    pub atoms: Vec<Atom>,
    pub diseqs: Vec<Diseq>,
}

impl Ecq {
    pub fn new(vars: Vec<Var>, atoms: Vec<Atom>, diseqs: Vec<Diseq>) -> Result<Self, EcqError> {
        let q = Ecq { vars, atoms, diseqs };
        q.check()?;
        Ok(q)
    }

    /// Checks closedness and safety: every variable used is quantified, and
    /// every quantified variable occurs in some positive atom.
    pub fn check(&self) -> Result<(), EcqError> {
        let mut seen = BTreeSet::new();
        for v in &self.vars {
            if !seen.insert(v) {
                return Err(EcqError::DuplicateVariable(v.clone()));
            }
        }
        let mut in_atoms = BTreeSet::new();
        for a in &self.atoms {
            for v in a.vars() {
                if !seen.contains(v) {
                    return Err(EcqError::FreeVariable(v.clone()));
                }
                in_atoms.insert(v);
            }
        }
        for d in &self.diseqs {
            for v in std::iter::once(&d.left).chain(d.right.as_var()) {
                if !seen.contains(v) {
                    return Err(EcqError::FreeVariable(v.clone()));
                }
            }
        }
        for v in &self.vars {
            if !in_atoms.contains(v) {
                return Err(EcqError::UnsafeVariable(v.clone()));
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayEcq { q: self, sig }
    }
}

struct DisplayEcq<'a> {
    q: &'a Ecq,
    sig: &'a Signature,
}

impl fmt::Display for DisplayEcq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.q.vars.is_empty() {
            f.write_str("(exists (")?;
            for (i, v) in self.q.vars.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(") ")?;
        }
        f.write_str("(and")?;
        for a in &self.q.atoms {
            write!(f, " ({}", self.sig.fluent(a.fluent).name)?;
            for t in &a.args {
                write!(f, " {t}")?;
            }
            f.write_str(")")?;
        }
        for d in &self.q.diseqs {
            write!(f, " (neq {} {})", d.left, d.right)?;
        }
        f.write_str(")")?;
        if !self.q.vars.is_empty() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// One answer: a constant for every query variable, in query order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Binding {
    vars: Arc<[Var]>,
    values: Vec<Constant>,
}

impl Binding {
    pub fn get(&self, var: &Var) -> Option<&Constant> {
        self.vars.iter().position(|v| v == var).map(|i| &self.values[i])
    }

    pub fn values(&self) -> &[Constant] {
        &self.values
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn into_values(self) -> Vec<Constant> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Constant)> {
        self.vars.iter().zip(self.values.iter())
    }

    /// Applies the binding to a term. Unbound variables are returned as-is.
    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.get(v).cloned().map(Term::Const).unwrap_or_else(|| term.clone()),
            Term::Const(_) => term.clone(),
        }
    }
}

#[derive(Clone)]
enum Slot {
    Var(usize),
    Const(Constant),
}

struct Plan {
    nvars: usize,
    /// Atoms in join order.
    atoms: Vec<(FluentId, Vec<Slot>)>,
    diseqs: Vec<(usize, Slot)>,
}

fn compile(theory: &FgpTheory, q: &Ecq) -> Result<Plan, KbError> {
    q.check()?;
    let sig = theory.signature();
    let slot_of = |t: &Term| -> Slot {
        match t {
            Term::Var(v) => Slot::Var(q.vars.iter().position(|x| x == v).expect("checked")),
            Term::Const(c) => Slot::Const(c.clone()),
        }
    };
    let mut atoms = Vec::with_capacity(q.atoms.len());
    for a in &q.atoms {
        sig.check_arity(a.fluent, a.args.len())?;
        atoms.push((a.fluent, a.args.iter().map(slot_of).collect::<Vec<_>>()));
    }
    // Smallest relations first; the sort is stable so ties keep query order.
    atoms.sort_by_key(|(f, _)| theory.k_true(*f).len());
    let diseqs = q
        .diseqs
        .iter()
        .map(|d| (slot_of(&Term::Var(d.left.clone())), slot_of(&d.right)))
        .map(|(l, r)| match l {
            Slot::Var(i) => (i, r),
            Slot::Const(_) => unreachable!(),
        })
        .collect();
    Ok(Plan { nvars: q.vars.len(), atoms, diseqs })
}

fn value_of<'a>(slot: &'a Slot, assignment: &'a [Option<Constant>]) -> Option<&'a Constant> {
    match slot {
        Slot::Var(i) => assignment[*i].as_ref(),
        Slot::Const(c) => Some(c),
    }
}

fn diseqs_hold(plan: &Plan, assignment: &[Option<Constant>]) -> bool {
    plan.diseqs.iter().all(|(l, r)| match (assignment[*l].as_ref(), value_of(r, assignment)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    })
}

fn join<F>(
    theory: &FgpTheory,
    plan: &Plan,
    depth: usize,
    assignment: &mut Vec<Option<Constant>>,
    emit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[Option<Constant>]) -> ControlFlow<()>,
{
    let Some((fluent, slots)) = plan.atoms.get(depth) else {
        return emit(assignment);
    };
    let rel = theory.k_true(*fluent);

    // Longest bound prefix narrows the scan to a contiguous range.
    let mut prefix = Vec::new();
    for s in slots {
        match value_of(s, assignment) {
            Some(c) => prefix.push(c.clone()),
            None => break,
        }
    }

    let mut bound_here = Vec::with_capacity(slots.len());
    for tuple in rel.range(prefix.clone()..) {
        if !tuple.starts_with(&prefix) {
            break;
        }
        bound_here.clear();
        let mut ok = true;
        for (s, c) in slots.iter().zip(tuple.iter()).skip(prefix.len()) {
            match s {
                Slot::Const(k) => {
                    if k != c {
                        ok = false;
                        break;
                    }
                }
                Slot::Var(i) => match &assignment[*i] {
                    Some(b) => {
                        if b != c {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        assignment[*i] = Some(c.clone());
                        bound_here.push(*i);
                    }
                },
            }
        }
        if ok && diseqs_hold(plan, assignment) {
            join(theory, plan, depth + 1, assignment, emit)?;
        }
        for i in &bound_here {
            assignment[*i] = None;
        }
    }
    ControlFlow::Continue(())
}

/// All bindings of the query variables that make every atom known true and
/// every disequality hold, sorted by value tuple in variable order.
pub fn answer_ecq(theory: &FgpTheory, query: &Ecq) -> Result<Vec<Binding>, KbError> {
    let plan = compile(theory, query)?;
    let mut rows = BTreeSet::new();
    let mut assignment = vec![None; plan.nvars];
    let _ = join(theory, &plan, 0, &mut assignment, &mut |a| {
        rows.insert(a.iter().map(|c| c.clone().expect("safe query binds every variable")).collect::<Vec<_>>());
        ControlFlow::Continue(())
    });
    let vars: Arc<[Var]> = query.vars.clone().into();
    Ok(rows.into_iter().map(|values| Binding { vars: vars.clone(), values }).collect())
}

/// The least answer in the deterministic answer order, if any.
pub fn first_answer(theory: &FgpTheory, query: &Ecq) -> Result<Option<Binding>, KbError> {
    Ok(answer_ecq(theory, query)?.into_iter().next())
}

/// Whether the query is entailed (evaluates to known-true). Stops at the
/// first witness.
pub fn entails(theory: &FgpTheory, query: &Ecq) -> Result<bool, KbError> {
    let plan = compile(theory, query)?;
    let mut assignment = vec![None; plan.nvars];
    let found = join(theory, &plan, 0, &mut assignment, &mut |_| ControlFlow::Break(()));
    Ok(found.is_break())
}

/// Three-valued value of the existentially closed query.
///
/// Known true iff some binding over known-true constants satisfies the
/// query. Otherwise the query is known false only when one of its ground
/// atoms is known false; binding each variable to its own fresh constant
/// makes every non-ground atom unknown and every disequality true.
pub fn v_ecq(theory: &FgpTheory, query: &Ecq) -> Result<TruthValue, KbError> {
    if entails(theory, query)? {
        return Ok(TruthValue::KnownTrue);
    }
    for a in query.atoms.iter().filter(|a| a.is_ground()) {
        let args: Vec<Constant> = a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(_) => unreachable!(),
            })
            .collect();
        if theory.v_atom(a.fluent, &args)? == TruthValue::KnownFalse {
            return Ok(TruthValue::KnownFalse);
        }
    }
    Ok(TruthValue::Unknown)
}
