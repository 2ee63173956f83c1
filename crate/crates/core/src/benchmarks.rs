//! Shipped benchmark domains and instance generators.

use std::path::{Path, PathBuf};

use crate::bat::Bat;
use crate::dsl::{parse_domain, ProblemSpec, TheoryError};
use crate::kb::{Atom, Constant, Diseq, Ecq, FgpTheory, GroundAtom, Literal, Term, Var};

pub const COUNTDOWN_DOMAIN: &str = include_str!("../../../benchmarks/domains/countdown.bpd");
pub const CHOPPING_DOMAIN: &str = include_str!("../../../benchmarks/domains/chopping.bpd");
pub const IBW_DOMAIN: &str = include_str!("../../../benchmarks/domains/ibw.bpd");
pub const MIXERS_DOMAIN: &str = include_str!("../../../benchmarks/domains/mixers.bpd");

/// A domain together with one problem over it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub domain: Bat,
    pub problem: ProblemSpec,
}

impl Instance {
    pub fn initial_theory(&self) -> Result<FgpTheory, TheoryError> {
        self.problem.initial_theory(&self.domain)
    }
}

fn shipped(text: &str) -> Bat {
    parse_domain(text).unwrap_or_else(|d| panic!("shipped domain does not parse: {d:?}"))
}

pub fn countdown_domain() -> Bat {
    shipped(COUNTDOWN_DOMAIN)
}

pub fn chopping_domain() -> Bat {
    shipped(CHOPPING_DOMAIN)
}

pub fn ibw_domain() -> Bat {
    shipped(IBW_DOMAIN)
}

/// The mixers domain with compound types computed by `type_fn`, one of
/// the binary integer functions `add` or `mul`.
pub fn mixers_domain(type_fn: &str) -> Bat {
    assert!(matches!(type_fn, "add" | "mul"), "unsupported type function `{type_fn}`");
    let text = MIXERS_DOMAIN
        .replace("(functions (add 2) (concat 2))", &format!("(functions ({type_fn} 2) (concat 2))"))
        .replace("(add ?t1 ?t2)", &format!("({type_fn} ?t1 ?t2)"));
    let mut bat = shipped(&text);
    if type_fn != "add" {
        bat.name = format!("mixers-{type_fn}");
    }
    bat
}

fn lit(bat: &Bat, positive: bool, fluent: &str, args: Vec<Constant>) -> Literal {
    let f = bat.signature().lookup(fluent).unwrap_or_else(|| panic!("no fluent `{fluent}`"));
    Literal { positive, atom: GroundAtom::new(f, args) }
}

fn atom(bat: &Bat, fluent: &str, args: Vec<Term>) -> Atom {
    Atom::new(bat.signature().lookup(fluent).unwrap_or_else(|| panic!("no fluent `{fluent}`")), args)
}

fn c(i: i64) -> Term {
    Term::Const(Constant::Int(i))
}

/// Counters `1..=values.len()` are available and hold `values`; the goal is
/// some counter holding `target`.
pub fn gen_countdown(values: &[i64], target: i64, bound: usize) -> Instance {
    let bat = countdown_domain();
    let mut init = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let counter = Constant::Int(i as i64 + 1);
        init.push(lit(&bat, true, "available", vec![counter.clone()]));
        init.push(lit(&bat, true, "value", vec![counter, Constant::Int(*v)]));
    }
    let goal = Ecq::new(vec![Var::new("c")], vec![atom(&bat, "value", vec![Term::var("c"), c(target)])], vec![])
        .expect("safe goal");
    let name = format!(
        "countdown-{}-{target}",
        values.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
    );
    Instance { problem: ProblemSpec { name, domain: bat.name.clone(), init, goal, bound }, domain: bat }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IbwGoal {
    /// Blocks stacked bottom to top, the bottom one anywhere.
    Tower(Vec<i64>),
    /// Blocks stacked bottom to top on some heavy block standing on the table.
    HeavyBase(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbwSpec {
    /// Initial towers, each listed bottom to top.
    pub towers: Vec<Vec<i64>>,
    pub available: Vec<i64>,
    pub light: Vec<i64>,
    pub goal: IbwGoal,
    pub bound: usize,
}

pub fn gen_ibw(spec: &IbwSpec) -> Instance {
    let bat = ibw_domain();
    let b = |x: i64| Constant::Int(x);
    let mut init = Vec::new();
    for tower in &spec.towers {
        for (i, x) in tower.iter().enumerate() {
            if i == 0 {
                init.push(lit(&bat, true, "ontable", vec![b(*x)]));
            } else {
                init.push(lit(&bat, true, "on", vec![b(*x), b(tower[i - 1])]));
            }
        }
        if let Some(top) = tower.last() {
            init.push(lit(&bat, true, "clear", vec![b(*top)]));
        }
    }
    for x in &spec.available {
        init.push(lit(&bat, true, "available", vec![b(*x)]));
    }
    for x in &spec.light {
        init.push(lit(&bat, true, "light", vec![b(*x)]));
    }
    let mut atoms = Vec::new();
    let mut vars = Vec::new();
    let blocks = match &spec.goal {
        IbwGoal::Tower(bs) => bs,
        IbwGoal::HeavyBase(bs) => {
            vars.push(Var::new("b"));
            atoms.push(atom(&bat, "heavy", vec![Term::var("b")]));
            atoms.push(atom(&bat, "ontable", vec![Term::var("b")]));
            if let Some(first) = bs.first() {
                atoms.push(atom(&bat, "on", vec![c(*first), Term::var("b")]));
            }
            bs
        }
    };
    for w in blocks.windows(2) {
        atoms.push(atom(&bat, "on", vec![c(w[1]), c(w[0])]));
    }
    let goal = Ecq::new(vars, atoms, Vec::<Diseq>::new()).expect("safe goal");
    let kind = match spec.goal {
        IbwGoal::Tower(_) => "tower",
        IbwGoal::HeavyBase(_) => "heavy",
    };
    let name = format!("ibw-{kind}-{}", spec.available.len());
    Instance { problem: ProblemSpec { name, domain: bat.name.clone(), init, goal, bound: spec.bound }, domain: bat }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixersSpec {
    pub locations: Vec<String>,
    /// (vehicle, starting location)
    pub vehicles: Vec<(String, String)>,
    /// (name, type, location)
    pub ingredients: Vec<(String, i64, String)>,
    /// (recipe id, first type, second type)
    pub recipes: Vec<(String, i64, i64)>,
    /// Type of the compound the goal asks for.
    pub goal_type: i64,
    pub bound: usize,
    /// `add` or `mul`.
    pub type_fn: String,
}

pub fn gen_mixers(spec: &MixersSpec) -> Instance {
    let bat = mixers_domain(&spec.type_fn);
    let s = |x: &str| Constant::sym(x);
    let mut init = Vec::new();
    for l in &spec.locations {
        init.push(lit(&bat, true, "loc", vec![s(l)]));
    }
    for (v, l) in &spec.vehicles {
        init.push(lit(&bat, true, "vat", vec![s(v), s(l)]));
        init.push(lit(&bat, true, "empty", vec![s(v)]));
    }
    for (name, ty, l) in &spec.ingredients {
        init.push(lit(&bat, true, "at", vec![s(name), s(l)]));
        init.push(lit(&bat, true, "available", vec![s(name)]));
        init.push(lit(&bat, true, "type", vec![s(name), Constant::Int(*ty)]));
    }
    for (id, t1, t2) in &spec.recipes {
        init.push(lit(&bat, true, "recipe", vec![s(id), Constant::Int(*t1), Constant::Int(*t2)]));
    }
    let goal = Ecq::new(
        vec![Var::new("x")],
        vec![
            atom(&bat, "type", vec![Term::var("x"), c(spec.goal_type)]),
            atom(&bat, "available", vec![Term::var("x")]),
        ],
        vec![],
    )
    .expect("safe goal");
    let name = format!("mixers-{}-{}", spec.ingredients.len(), spec.goal_type);
    Instance { problem: ProblemSpec { name, domain: bat.name.clone(), init, goal, bound: spec.bound }, domain: bat }
}

/// The two-location, three-ingredient mixers setup with one truck.
pub fn mixers_basic(goal_type: i64, bound: usize) -> MixersSpec {
    let st = |x: &str| x.to_string();
    MixersSpec {
        locations: vec![st("L1"), st("L2")],
        vehicles: vec![(st("truck"), st("L1"))],
        ingredients: vec![(st("salt"), 1, st("L1")), (st("sugar"), 2, st("L2")), (st("water"), 4, st("L1"))],
        recipes: vec![(st("r1"), 1, 2), (st("r2"), 2, 4), (st("r3"), 1, 4)],
        goal_type,
        bound,
        type_fn: st("add"),
    }
}

/// One line of a suite manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteEntry {
    pub name: String,
    pub domain: PathBuf,
    pub problem: PathBuf,
    pub bound: Option<usize>,
    pub time_limit_secs: Option<u64>,
}

/// Reads a suite manifest. Each non-blank line that is not a `#` comment
/// reads `NAME DOMAIN PROBLEM [bound=N] [timeout=SECS]`; paths are relative
/// to `base`.
pub fn parse_suite(text: &str, base: &Path) -> Result<Vec<SuiteEntry>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, domain, problem, opts @ ..] = fields.as_slice() else {
            return Err(format!("line {}: expected `NAME DOMAIN PROBLEM [bound=N] [timeout=SECS]`", i + 1));
        };
        let mut entry = SuiteEntry {
            name: name.to_string(),
            domain: base.join(domain),
            problem: base.join(problem),
            bound: None,
            time_limit_secs: None,
        };
        for o in opts {
            let bad = || format!("line {}: bad option `{o}`", i + 1);
            match o.split_once('=') {
                Some(("bound", v)) => entry.bound = Some(v.parse().map_err(|_| bad())?),
                Some(("timeout", v)) => entry.time_limit_secs = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        out.push(entry);
    }
    Ok(out)
}
