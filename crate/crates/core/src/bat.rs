//! Proper basic action theories: action schemas with quantifier-free ECQ
//! preconditions and weakly context-free successor state axioms.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kb::{Constant, Ecq, FluentId, Signature, Term, Tuple, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("function `{func}` is not registered")]
    UnknownFunction { func: String },
    #[error("function `{func}` expects {expected} arguments, found {found}")]
    FunctionArity { func: String, expected: usize, found: usize },
    #[error("function `{func}` is not defined on ({args})")]
    IllTyped { func: String, args: String },
    #[error("integer overflow in `{func}` on ({args})")]
    Overflow { func: String, args: String },
    #[error("parameter index {index} out of range for {arity} arguments")]
    ParamOutOfRange { index: usize, arity: usize },
    #[error("no action schema named `{0}`")]
    UnknownAction(String),
    #[error("action `{name}` expects {expected} arguments, found {found}")]
    ActionArity { name: String, expected: usize, found: usize },
    #[error("{source} (evaluating a {polarity} effect of `{fluent}` under {action})")]
    InDisjunct {
        fluent: String,
        polarity: Polarity,
        action: String,
        #[source]
        source: Box<EvalError>,
    },
}

impl EvalError {
    /// Whether the root cause is an integer overflow.
    pub fn is_overflow(&self) -> bool {
        match self {
            EvalError::Overflow { .. } => true,
            EvalError::InDisjunct { source, .. } => source.is_overflow(),
            _ => false,
        }
    }
}

type FnImpl = Arc<dyn Fn(&[Constant]) -> Result<Constant, EvalError> + Send + Sync>;

#[derive(Clone)]
pub struct FunctionDef {
    pub arity: usize,
    imp: FnImpl,
}

impl fmt::Debug for FunctionDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionDef").field("arity", &self.arity).finish()
    }
}

fn show_args(args: &[Constant]) -> String {
    args.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn int_args(name: &str, args: &[Constant]) -> Result<Vec<i64>, EvalError> {
    args.iter()
        .map(|a| {
            a.as_int().ok_or_else(|| EvalError::IllTyped { func: name.to_string(), args: show_args(args) })
        })
        .collect()
}

fn checked(name: &str, args: &[Constant], r: Option<i64>) -> Result<Constant, EvalError> {
    r.map(Constant::Int)
        .ok_or_else(|| EvalError::Overflow { func: name.to_string(), args: show_args(args) })
}

/// Situation-independent computable functions that may appear in effect
/// arguments. Deterministic and total on well-typed inputs.
#[derive(Clone, Debug)]
pub struct FunctionRegistry {
    fns: BTreeMap<String, FunctionDef>,
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PartialEq for FunctionRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.signatures().eq(other.signatures())
    }
}

impl FunctionRegistry {
    pub fn empty() -> Self {
        FunctionRegistry { fns: BTreeMap::new() }
    }

    /// `add`, `mul`, `sub` and `dec` on 64-bit integers with checked
    /// overflow; `concat` on identifiers.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("add", 2, |a| {
            let v = int_args("add", a)?;
            checked("add", a, v[0].checked_add(v[1]))
        });
        r.register("mul", 2, |a| {
            let v = int_args("mul", a)?;
            checked("mul", a, v[0].checked_mul(v[1]))
        });
        r.register("sub", 2, |a| {
            let v = int_args("sub", a)?;
            checked("sub", a, v[0].checked_sub(v[1]))
        });
        r.register("dec", 1, |a| {
            let v = int_args("dec", a)?;
            checked("dec", a, v[0].checked_sub(1))
        });
        r.register("concat", 2, |a| match (a[0].as_str(), a[1].as_str()) {
            (Some(x), Some(y)) => Ok(Constant::sym(&format!("{x}{y}"))),
            _ => Err(EvalError::IllTyped { func: "concat".into(), args: show_args(a) }),
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, arity: usize, f: F)
    where
        F: Fn(&[Constant]) -> Result<Constant, EvalError> + Send + Sync + 'static,
    {
        self.fns.insert(name.to_string(), FunctionDef { arity, imp: Arc::new(f) });
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.fns.get(name).map(|d| d.arity)
    }

    pub fn signatures(&self) -> impl Iterator<Item = (&str, usize)> {
        self.fns.iter().map(|(k, d)| (k.as_str(), d.arity))
    }

    /// Keeps only the named functions.
    pub fn restricted<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut r = Self::empty();
        for n in names {
            if let Some(d) = self.fns.get(n) {
                r.fns.insert(n.to_string(), d.clone());
            }
        }
        r
    }

    pub fn apply(&self, name: &str, args: &[Constant]) -> Result<Constant, EvalError> {
        let def = self.fns.get(name).ok_or_else(|| EvalError::UnknownFunction { func: name.to_string() })?;
        if def.arity != args.len() {
            return Err(EvalError::FunctionArity { func: name.to_string(), expected: def.arity, found: args.len() });
        }
        (def.imp)(args)
    }
}

/// How one fluent argument of an effect is computed from the action's
/// arguments.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ArgSpec {
    Param(usize),
    Const(Constant),
    Apply { func: String, args: Vec<ArgSpec> },
}

/// Evaluates an argument spec under the ground arguments of an action.
pub fn eval_argspec(registry: &FunctionRegistry, spec: &ArgSpec, args: &[Constant]) -> Result<Constant, EvalError> {
    match spec {
        ArgSpec::Param(i) => args
            .get(*i)
            .cloned()
            .ok_or(EvalError::ParamOutOfRange { index: *i, arity: args.len() }),
        ArgSpec::Const(c) => Ok(c.clone()),
        ArgSpec::Apply { func, args: inner } => {
            let vals = inner
                .iter()
                .map(|s| eval_argspec(registry, s, args))
                .collect::<Result<Vec<_>, _>>()?;
            registry.apply(func, &vals)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

/// One disjunct `exists z. a = A(u) /\ y = g(u)` of a positive or negative
/// effect formula.
///
/// `guard` pins action arguments to constants (as in `a = chop(t, 1)`): the
/// disjunct fires only when every guarded argument equals its constant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SsaDisjunct {
    pub action: String,
    pub guard: Vec<(usize, Constant)>,
    pub args: Vec<ArgSpec>,
}

impl SsaDisjunct {
    pub fn new(action: &str, args: Vec<ArgSpec>) -> Self {
        SsaDisjunct { action: action.to_string(), guard: Vec::new(), args }
    }

    pub fn with_guard(mut self, index: usize, value: Constant) -> Self {
        self.guard.push((index, value));
        self
    }

    fn fires(&self, action: &GroundAction) -> bool {
        *self.action == *action.name
            && self.guard.iter().all(|(i, c)| action.args.get(*i) == Some(c))
    }

    fn instantiate(&self, registry: &FunctionRegistry, action: &GroundAction) -> Result<Tuple, EvalError> {
        self.args.iter().map(|s| eval_argspec(registry, s, &action.args)).collect()
    }
}

/// Successor state axiom of one fluent. Empty disjunct lists make the fluent
/// rigid.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ssa {
    pub fluent: FluentId,
    pub positive: Vec<SsaDisjunct>,
    pub negative: Vec<SsaDisjunct>,
}

impl Ssa {
    pub fn rigid(fluent: FluentId) -> Self {
        Ssa { fluent, positive: Vec::new(), negative: Vec::new() }
    }

    pub fn is_rigid(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }
}

/// An action schema. The precondition's `vars` are the parameters; the
/// precondition has no other quantifiers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Var>,
    pub precondition: Ecq,
}

impl ActionSchema {
    pub fn new(name: &str, params: Vec<Var>, atoms: Vec<crate::kb::Atom>, diseqs: Vec<crate::kb::Diseq>) -> Self {
        ActionSchema {
            name: name.to_string(),
            params: params.clone(),
            precondition: Ecq { vars: params, atoms, diseqs },
        }
    }
}

/// A ground action term `A(c1, ..., ck)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    pub name: Arc<str>,
    pub args: Tuple,
}

impl GroundAction {
    pub fn new(name: &str, args: Tuple) -> Self {
        GroundAction { name: Arc::from(name), args }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A violation of the proper-BAT conditions found by [`validate_bat`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    /// Offending schema or `ssa <fluent>`.
    pub item: String,
    /// Action the violation belongs to, when there is one.
    pub action: Option<String>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.item, self.reason)
    }
}

#[derive(Clone, Copy, Debug)]
struct EffectRef {
    fluent: FluentId,
    polarity: Polarity,
    index: usize,
}

#[derive(Clone, Debug)]
pub struct Bat {
    pub name: String,
    signature: Arc<Signature>,
    schemas: Vec<ActionSchema>,
    ssas: Vec<Ssa>,
    registry: FunctionRegistry,
    schema_index: FxHashMap<String, usize>,
    effects_by_action: FxHashMap<String, Vec<EffectRef>>,
}

impl PartialEq for Bat {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.signature == other.signature
            && self.schemas == other.schemas
            && self.ssas == other.ssas
            && self.registry == other.registry
    }
}

impl Bat {
    /// Assembles a theory. `ssas` may omit fluents (they become rigid) and
    /// are reordered by fluent id. Schemas are kept in the given order.
    pub fn new(
        name: &str,
        signature: Arc<Signature>,
        schemas: Vec<ActionSchema>,
        ssas: Vec<Ssa>,
        registry: FunctionRegistry,
    ) -> Self {
        let mut by_fluent: Vec<Ssa> = signature.ids().map(Ssa::rigid).collect();
        for s in ssas {
            if s.fluent.0 < by_fluent.len() {
                let slot = &mut by_fluent[s.fluent.0];
                slot.positive.extend(s.positive);
                slot.negative.extend(s.negative);
            }
        }
        let schema_index = schemas.iter().enumerate().map(|(i, s)| (s.name.clone(), i)).collect();
        let mut effects_by_action: FxHashMap<String, Vec<EffectRef>> = FxHashMap::default();
        for ssa in &by_fluent {
            for (polarity, list) in [(Polarity::Positive, &ssa.positive), (Polarity::Negative, &ssa.negative)] {
                for (index, d) in list.iter().enumerate() {
                    effects_by_action
                        .entry(d.action.clone())
                        .or_default()
                        .push(EffectRef { fluent: ssa.fluent, polarity, index });
                }
            }
        }
        Bat {
            name: name.to_string(),
            signature,
            schemas,
            ssas: by_fluent,
            registry,
            schema_index,
            effects_by_action,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn schemas(&self) -> &[ActionSchema] {
        &self.schemas
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schema_index.get(name).map(|i| &self.schemas[*i])
    }

    pub fn ssas(&self) -> &[Ssa] {
        &self.ssas
    }

    pub fn ssa(&self, fluent: FluentId) -> &Ssa {
        &self.ssas[fluent.0]
    }

    pub fn registry(&self) -> &FunctionRegistry {
        &self.registry
    }

    pub fn check_action(&self, action: &GroundAction) -> Result<&ActionSchema, EvalError> {
        let schema = self.schema(&action.name).ok_or_else(|| EvalError::UnknownAction(action.name.to_string()))?;
        if schema.params.len() != action.args.len() {
            return Err(EvalError::ActionArity {
                name: schema.name.clone(),
                expected: schema.params.len(),
                found: action.args.len(),
            });
        }
        Ok(schema)
    }

    /// Ground positive atoms of an action's instantiated precondition.
    pub fn precondition_atoms(&self, action: &GroundAction) -> Result<Vec<crate::kb::GroundAtom>, EvalError> {
        let schema = self.check_action(action)?;
        Ok(schema
            .precondition
            .atoms
            .iter()
            .map(|a| {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => c.clone(),
                        Term::Var(v) => {
                            let i = schema.params.iter().position(|p| p == v).expect("validated precondition");
                            action.args[i].clone()
                        }
                    })
                    .collect();
                crate::kb::GroundAtom::new(a.fluent, args)
            })
            .collect())
    }

    /// Calls `f(fluent, tuple)` for every positive effect of the action, or
    /// not at all if evaluating any of them fails.
    pub(crate) fn for_each_add<F>(&self, action: &GroundAction, mut f: F) -> Result<(), EvalError>
    where
        F: FnMut(FluentId, Tuple),
    {
        let Some(refs) = self.effects_by_action.get(&*action.name) else {
            return Ok(());
        };
        let mut out = Vec::with_capacity(refs.len());
        for r in refs.iter().filter(|r| r.polarity == Polarity::Positive) {
            let d = &self.ssas[r.fluent.0].positive[r.index];
            if !d.fires(action) {
                continue;
            }
            let tuple = d.instantiate(&self.registry, action).map_err(|e| EvalError::InDisjunct {
                fluent: self.signature.fluent(r.fluent).name.to_string(),
                polarity: r.polarity,
                action: action.to_string(),
                source: Box::new(e),
            })?;
            out.push((r.fluent, tuple));
        }
        for (fl, t) in out {
            f(fl, t);
        }
        Ok(())
    }

    /// Calls `f(fluent, adds, dels)` for every fluent the action may touch.
    /// Fluents untouched by the action are skipped.
    pub(crate) fn for_each_effect<F>(&self, action: &GroundAction, mut f: F) -> Result<(), EvalError>
    where
        F: FnMut(FluentId, BTreeSet<Tuple>, BTreeSet<Tuple>),
    {
        let Some(refs) = self.effects_by_action.get(&*action.name) else {
            return Ok(());
        };
        let mut per_fluent: BTreeMap<FluentId, (BTreeSet<Tuple>, BTreeSet<Tuple>)> = BTreeMap::new();
        for r in refs {
            let ssa = &self.ssas[r.fluent.0];
            let d = match r.polarity {
                Polarity::Positive => &ssa.positive[r.index],
                Polarity::Negative => &ssa.negative[r.index],
            };
            if !d.fires(action) {
                continue;
            }
            let tuple = d.instantiate(&self.registry, action).map_err(|e| EvalError::InDisjunct {
                fluent: self.signature.fluent(r.fluent).name.to_string(),
                polarity: r.polarity,
                action: action.to_string(),
                source: Box::new(e),
            })?;
            let entry = per_fluent.entry(r.fluent).or_default();
            match r.polarity {
                Polarity::Positive => entry.0.insert(tuple),
                Polarity::Negative => entry.1.insert(tuple),
            };
        }
        for (fl, (adds, dels)) in per_fluent {
            f(fl, adds, dels);
        }
        Ok(())
    }
}

/// Instantiates the positive and negative effect formulas of `fluent` on a
/// ground action: the tuples that become true and those that become false.
pub fn gamma_sets(
    bat: &Bat,
    fluent: FluentId,
    action: &GroundAction,
) -> Result<(BTreeSet<Tuple>, BTreeSet<Tuple>), EvalError> {
    bat.check_action(action)?;
    let ssa = bat.ssa(fluent);
    let eval = |list: &[SsaDisjunct], polarity| -> Result<BTreeSet<Tuple>, EvalError> {
        list.iter()
            .filter(|d| d.fires(action))
            .map(|d| {
                d.instantiate(bat.registry(), action).map_err(|e| EvalError::InDisjunct {
                    fluent: bat.signature().fluent(fluent).name.to_string(),
                    polarity,
                    action: action.to_string(),
                    source: Box::new(e),
                })
            })
            .collect()
    };
    Ok((eval(&ssa.positive, Polarity::Positive)?, eval(&ssa.negative, Polarity::Negative)?))
}

fn check_argspec(bat: &Bat, spec: &ArgSpec, arity: usize, item: &str, action: &str, out: &mut Vec<Violation>) {
    match spec {
        ArgSpec::Param(i) if *i >= arity => out.push(Violation {
            item: item.to_string(),
            action: Some(action.to_string()),
            reason: format!("WCF: unbound fluent argument (parameter index {i} out of range)"),
        }),
        ArgSpec::Param(_) | ArgSpec::Const(_) => {}
        ArgSpec::Apply { func, args } => {
            match bat.registry().arity(func) {
                None => out.push(Violation { item: item.to_string(), action: Some(action.to_string()), reason: format!("unknown function `{func}`") }),
                Some(n) if n != args.len() => out.push(Violation {
                    item: item.to_string(),
                    action: Some(action.to_string()),
                    reason: format!("function `{func}` expects {n} arguments, found {}", args.len()),
                }),
                Some(_) => {}
            }
            for a in args {
                check_argspec(bat, a, arity, item, action, out);
            }
        }
    }
}

/// Checks the precondition and successor-state-axiom conditions of a proper
/// action theory. The initial-theory condition is checked at problem load.
pub fn validate_bat(bat: &Bat) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let sig = bat.signature();

    let mut names = BTreeSet::new();
    for s in bat.schemas() {
        let item = format!("action {}", s.name);
        if !names.insert(&s.name) {
            out.push(Violation { item: item.clone(), action: Some(s.name.clone()), reason: "duplicate action name".into() });
        }
        if s.precondition.vars != s.params {
            out.push(Violation {
                item: item.clone(),
                action: Some(s.name.clone()),
                reason: "precondition must be quantifier-free over the parameters".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for p in &s.params {
            if !seen.insert(p) {
                out.push(Violation { item: item.clone(), action: Some(s.name.clone()), reason: format!("parameter {p} declared twice") });
            }
        }
        let in_atoms: BTreeSet<&Var> = s.precondition.atoms.iter().flat_map(|a| a.vars()).collect();
        for a in &s.precondition.atoms {
            match sig.get(a.fluent) {
                None => out.push(Violation { item: item.clone(), action: Some(s.name.clone()), reason: format!("undeclared fluent id {}", a.fluent.0) }),
                Some(f) if f.arity != a.args.len() => out.push(Violation {
                    item: item.clone(),
                    action: Some(s.name.clone()),
                    reason: format!("fluent `{}` expects {} arguments, found {}", f.name, f.arity, a.args.len()),
                }),
                Some(_) => {}
            }
            for v in a.vars() {
                if !s.params.contains(v) {
                    out.push(Violation { item: item.clone(), action: Some(s.name.clone()), reason: format!("variable {v} is not a parameter") });
                }
            }
        }
        for d in &s.precondition.diseqs {
            for v in std::iter::once(&d.left).chain(d.right.as_var()) {
                if !s.params.contains(v) {
                    out.push(Violation { item: item.clone(), action: Some(s.name.clone()), reason: format!("variable {v} is not a parameter") });
                } else if !in_atoms.contains(v) {
                    out.push(Violation {
                        item: item.clone(),
                        action: Some(s.name.clone()),
                        reason: format!("unsafe disequality: {v} occurs in no positive atom"),
                    });
                }
            }
        }
        for p in &s.params {
            let in_diseq = s
                .precondition
                .diseqs
                .iter()
                .any(|d| &d.left == p || d.right.as_var() == Some(p));
            if !in_atoms.contains(p) && !in_diseq {
                out.push(Violation {
                    item: item.clone(),
                    action: Some(s.name.clone()),
                    reason: format!("parameter {p} occurs in no positive atom of the precondition"),
                });
            }
        }
    }

    for ssa in bat.ssas() {
        let fl = sig.fluent(ssa.fluent);
        for (polarity, list) in [(Polarity::Positive, &ssa.positive), (Polarity::Negative, &ssa.negative)] {
            for d in list {
                let item = format!("ssa {} ({polarity} disjunct for {})", fl.name, d.action);
                let Some(schema) = bat.schema(&d.action) else {
                    out.push(Violation { item, action: Some(d.action.clone()), reason: format!("unknown action `{}`", d.action) });
                    continue;
                };
                let arity = schema.params.len();
                if d.args.len() != fl.arity {
                    out.push(Violation {
                        item: item.clone(),
                        action: Some(d.action.clone()),
                        reason: format!("effect has {} arguments, fluent arity is {}", d.args.len(), fl.arity),
                    });
                }
                for (i, _) in &d.guard {
                    if *i >= arity {
                        out.push(Violation {
                            item: item.clone(),
                            action: Some(d.action.clone()),
                            reason: format!("guard on parameter index {i} out of range"),
                        });
                    }
                }
                for a in &d.args {
                    check_argspec(bat, a, arity, &item, &d.action, &mut out);
                }
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
