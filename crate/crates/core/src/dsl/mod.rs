//! Textual format for domains (`.bpd`), problems (`.bpp`) and plans.
//!
//! See `docs/format.md` for the grammar.

mod diag;
mod parse;
mod sexpr;
mod write;

use std::path::Path;

pub use diag::{ParseDiagnostic, Severity, SourceSpan};
pub use parse::{parse_domain_src, parse_plan_src, parse_problem_src};
pub use sexpr::{read_all, AtomKind, Sexpr};
pub use write::{serialize_domain, serialize_plan, serialize_problem};

use crate::bat::Bat;
use crate::kb::{Ecq, FgpTheory, Inconsistency, KbError, Literal};

/// A successfully parsed value together with any warnings.
#[derive(Clone, Debug)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<ParseDiagnostic>,
}

/// A bounded planning problem: initial literals, goal and plan-length bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: String,
    pub init: Vec<Literal>,
    pub goal: Ecq,
    pub bound: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum TheoryError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("initial theory is inconsistent on {} tuple(s)", .0.len())]
    Inconsistent(Vec<Inconsistency>),
}

impl ProblemSpec {
    /// The initial FGP theory described by the `init` literals.
    pub fn initial_theory(&self, bat: &Bat) -> Result<FgpTheory, TheoryError> {
        let th = FgpTheory::from_literals(bat.signature().clone(), &self.init)?;
        th.check_consistency().map_err(TheoryError::Inconsistent)?;
        Ok(th)
    }
}

pub fn parse_domain(text: &str) -> Result<Bat, Vec<ParseDiagnostic>> {
    parse_domain_src(text, None).map(|p| p.value)
}

pub fn parse_problem(text: &str, bat: &Bat) -> Result<ProblemSpec, Vec<ParseDiagnostic>> {
    parse_problem_src(text, None, bat).map(|p| p.value)
}

pub fn parse_plan(text: &str) -> Result<Vec<crate::bat::GroundAction>, Vec<ParseDiagnostic>> {
    parse_plan_src(text, None)
}

/// Errors from reading a file from disk and parsing it.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{}", render(.0))]
    Parse(Vec<ParseDiagnostic>),
}

fn render(diags: &[ParseDiagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })
}

pub fn load_domain(path: &Path) -> Result<Parsed<Bat>, LoadError> {
    let text = read(path)?;
    parse_domain_src(&text, Some(&path.display().to_string())).map_err(LoadError::Parse)
}

pub fn load_problem(path: &Path, bat: &Bat) -> Result<Parsed<ProblemSpec>, LoadError> {
    let text = read(path)?;
    parse_problem_src(&text, Some(&path.display().to_string()), bat).map_err(LoadError::Parse)
}

pub fn load_plan(path: &Path) -> Result<Vec<crate::bat::GroundAction>, LoadError> {
    let text = read(path)?;
    parse_plan_src(&text, Some(&path.display().to_string())).map_err(LoadError::Parse)
}
