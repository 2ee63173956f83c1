//! Finite grounded proper theories.
//!
//! A theory records, per fluent, the tuples known to be true and the tuples
//! known to be false. Everything else is unknown: there is no closed-world
//! default and no fixed universe of objects.

mod query;

pub use query::{answer_ecq, entails, first_answer, v_ecq, Atom, Binding, Diseq, Ecq, EcqError, Term, Var};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An object name. Integers and identifiers share one namespace; two
/// constants are equal iff they print identically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Int(i64),
    Sym(Arc<str>),
}

impl Constant {
    pub fn sym(name: &str) -> Self {
        Constant::Sym(Arc::from(name))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Constant::Int(i) => Some(*i),
            Constant::Sym(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Constant::Sym(s) => Some(s),
            Constant::Int(_) => None,
        }
    }
}

impl From<i64> for Constant {
    fn from(v: i64) -> Self {
        Constant::Int(v)
    }
}

impl From<&str> for Constant {
    fn from(v: &str) -> Self {
        Constant::sym(v)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(i) => write!(f, "{i}"),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A ground argument tuple.
pub type Tuple = Vec<Constant>;

/// Index of a fluent inside its [`Signature`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FluentId(pub usize);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FluentSym {
    pub name: Arc<str>,
    pub arity: usize,
}

/// The declared fluents of a domain, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    fluents: Vec<FluentSym>,
    by_name: HashMap<Arc<str>, FluentId>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.fluents == other.fluents
    }
}

impl Eq for Signature {}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a fluent. Re-declaring a name is an error; names are unique
    /// and arities fixed.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<FluentId, KbError> {
        if self.by_name.contains_key(name) {
            return Err(KbError::DuplicateFluent(name.to_string()));
        }
        let id = FluentId(self.fluents.len());
        let name: Arc<str> = Arc::from(name);
        self.fluents.push(FluentSym { name: name.clone(), arity });
        self.by_name.insert(name, id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<FluentId> {
        self.by_name.get(name).copied()
    }

    pub fn fluent(&self, id: FluentId) -> &FluentSym {
        &self.fluents[id.0]
    }

    pub fn get(&self, id: FluentId) -> Option<&FluentSym> {
        self.fluents.get(id.0)
    }

    pub fn len(&self) -> usize {
        self.fluents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fluents.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FluentId> {
        (0..self.fluents.len()).map(FluentId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FluentId, &FluentSym)> {
        self.fluents.iter().enumerate().map(|(i, f)| (FluentId(i), f))
    }

    pub(crate) fn check_arity(&self, fluent: FluentId, arity: usize) -> Result<(), KbError> {
        let sym = self.get(fluent).ok_or(KbError::UnknownFluent(fluent.0))?;
        if sym.arity != arity {
            return Err(KbError::ArityMismatch {
                fluent: sym.name.to_string(),
                expected: sym.arity,
                found: arity,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("fluent `{fluent}` expects {expected} arguments, found {found}")]
    ArityMismatch { fluent: String, expected: usize, found: usize },
    #[error("fluent id {0} is not declared")]
    UnknownFluent(usize),
    #[error("fluent `{0}` declared twice")]
    DuplicateFluent(String),
    #[error(transparent)]
    Query(#[from] EcqError),
}

/// Three-valued answer of the evaluation procedure: 1, 0 or ½.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum TruthValue {
    KnownFalse,
    Unknown,
    KnownTrue,
}

impl TruthValue {
    pub fn complement(self) -> Self {
        match self {
            TruthValue::KnownTrue => TruthValue::KnownFalse,
            TruthValue::KnownFalse => TruthValue::KnownTrue,
            TruthValue::Unknown => TruthValue::Unknown,
        }
    }

    fn rank(self) -> u8 {
        match self {
            TruthValue::KnownFalse => 0,
            TruthValue::Unknown => 1,
            TruthValue::KnownTrue => 2,
        }
    }

    /// Conjunction.
    pub fn min(self, other: Self) -> Self {
        if self.rank() <= other.rank() {
            self
        } else {
            other
        }
    }

    /// Disjunction.
    pub fn max(self, other: Self) -> Self {
        if self.rank() >= other.rank() {
            self
        } else {
            other
        }
    }
}

/// A fully instantiated fluent atom.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroundAtom {
    pub fluent: FluentId,
    pub args: Tuple,
}

impl GroundAtom {
    pub fn new(fluent: FluentId, args: Tuple) -> Self {
        GroundAtom { fluent, args }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayAtom { atom: self, sig }
    }
}

struct DisplayAtom<'a> {
    atom: &'a GroundAtom,
    sig: &'a Signature,
}

impl fmt::Display for DisplayAtom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.sig.fluent(self.atom.fluent).name)?;
        for a in &self.atom.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A signed ground literal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub positive: bool,
    pub atom: GroundAtom,
}

/// Known-true and known-false tuples of one fluent.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Relation {
    pub k_true: BTreeSet<Tuple>,
    pub k_false: BTreeSet<Tuple>,
}

/// A fluent/tuple pair found in both the known-true and known-false sets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Inconsistency {
    pub fluent: FluentId,
    pub tuple: Tuple,
}

/// Finite grounded proper theory: a finite set of ground fluent literals.
///
/// Relations are shared between clones until written.
#[derive(Clone, Debug)]
pub struct FgpTheory {
    signature: Arc<Signature>,
    relations: Vec<Arc<Relation>>,
}

impl PartialEq for FgpTheory {
    fn eq(&self, other: &Self) -> bool {
        self.relations == other.relations && self.signature == other.signature
    }
}

impl Eq for FgpTheory {}

impl std::hash::Hash for FgpTheory {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.relations.hash(state);
    }
}

impl FgpTheory {
    /// The empty theory: nothing is known about anything.
    pub fn new(signature: Arc<Signature>) -> Self {
        let relations = std::iter::repeat_n(Arc::new(Relation::default()), signature.len()).collect();
        FgpTheory { signature, relations }
    }

    /// Builds a theory from signed literals. Does not check consistency;
    /// call [`FgpTheory::check_consistency`] for that.
    pub fn from_literals<'a>(
        signature: Arc<Signature>,
        literals: impl IntoIterator<Item = &'a Literal>,
    ) -> Result<Self, KbError> {
        let mut theory = FgpTheory::new(signature);
        for lit in literals {
            if lit.positive {
                theory.insert_true(lit.atom.fluent, lit.atom.args.clone())?;
            } else {
                theory.insert_false(lit.atom.fluent, lit.atom.args.clone())?;
            }
        }
        Ok(theory)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn insert_true(&mut self, fluent: FluentId, tuple: Tuple) -> Result<bool, KbError> {
        self.signature.check_arity(fluent, tuple.len())?;
        Ok(Arc::make_mut(&mut self.relations[fluent.0]).k_true.insert(tuple))
    }

    pub fn insert_false(&mut self, fluent: FluentId, tuple: Tuple) -> Result<bool, KbError> {
        self.signature.check_arity(fluent, tuple.len())?;
        Ok(Arc::make_mut(&mut self.relations[fluent.0]).k_false.insert(tuple))
    }

    pub fn relation(&self, fluent: FluentId) -> &Relation {
        &self.relations[fluent.0]
    }

    pub(crate) fn relation_mut(&mut self, fluent: FluentId) -> &mut Relation {
        Arc::make_mut(&mut self.relations[fluent.0])
    }

    pub fn k_true(&self, fluent: FluentId) -> &BTreeSet<Tuple> {
        &self.relations[fluent.0].k_true
    }

    pub fn k_false(&self, fluent: FluentId) -> &BTreeSet<Tuple> {
        &self.relations[fluent.0].k_false
    }

    /// Base case of the evaluation procedure on a ground atom.
    pub fn v_atom(&self, fluent: FluentId, args: &[Constant]) -> Result<TruthValue, KbError> {
        self.signature.check_arity(fluent, args.len())?;
        let rel = &self.relations[fluent.0];
        Ok(if rel.k_true.contains(args) {
            TruthValue::KnownTrue
        } else if rel.k_false.contains(args) {
            TruthValue::KnownFalse
        } else {
            TruthValue::Unknown
        })
    }

    /// Value of a signed literal: negation is complement.
    pub fn v_literal(&self, literal: &Literal) -> Result<TruthValue, KbError> {
        let v = self.v_atom(literal.atom.fluent, &literal.atom.args)?;
        Ok(if literal.positive { v } else { v.complement() })
    }

    /// Reports every tuple that is both known true and known false.
    pub fn check_consistency(&self) -> Result<(), Vec<Inconsistency>> {
        let mut report = Vec::new();
        for (i, rel) in self.relations.iter().enumerate() {
            for t in rel.k_true.intersection(&rel.k_false) {
                report.push(Inconsistency { fluent: FluentId(i), tuple: t.clone() });
            }
        }
        if report.is_empty() {
            Ok(())
        } else {
            Err(report)
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.relations
            .iter()
            .all(|r| r.k_true.intersection(&r.k_false).next().is_none())
    }

    /// Every constant mentioned by some literal.
    pub fn constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        for rel in &self.relations {
            for t in rel.k_true.iter().chain(rel.k_false.iter()) {
                out.extend(t.iter().cloned());
            }
        }
        out
    }

    /// Constants occurring in known-true tuples only.
    pub fn positive_constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        for rel in &self.relations {
            for t in &rel.k_true {
                out.extend(t.iter().cloned());
            }
        }
        out
    }

    /// All literals, positive first within each fluent, in a fixed order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.relations.iter().enumerate().flat_map(|(i, rel)| {
            let pos = rel.k_true.iter().map(move |t| Literal {
                positive: true,
                atom: GroundAtom::new(FluentId(i), t.clone()),
            });
            let neg = rel.k_false.iter().map(move |t| Literal {
                positive: false,
                atom: GroundAtom::new(FluentId(i), t.clone()),
            });
            pos.chain(neg)
        })
    }

    pub fn literal_count(&self) -> usize {
        self.relations.iter().map(|r| r.k_true.len() + r.k_false.len()).sum()
    }
}
