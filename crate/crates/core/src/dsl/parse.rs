use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::diag::{ParseDiagnostic, SourceSpan};
use super::sexpr::{read_all, AtomKind, Sexpr};
use super::{Parsed, ProblemSpec};
use crate::bat::{validate_bat, ActionSchema, ArgSpec, Bat, FunctionRegistry, GroundAction, Ssa, SsaDisjunct};
use crate::kb::{Atom, Constant, Diseq, Ecq, FluentId, GroundAtom, Literal, Signature, Term, Var};

#[derive(Default)]
struct Diags(Vec<ParseDiagnostic>);

impl Diags {
    fn err(&mut self, msg: impl Into<String>, span: &SourceSpan) {
        self.0.push(ParseDiagnostic::error(msg, span.clone()));
    }

    fn warn(&mut self, msg: impl Into<String>, span: &SourceSpan) {
        self.0.push(ParseDiagnostic::warning(msg, span.clone()));
    }

    fn has_errors(&self) -> bool {
        self.0.iter().any(ParseDiagnostic::is_error)
    }

    fn finish<T>(self, value: Option<T>) -> Result<Parsed<T>, Vec<ParseDiagnostic>> {
        match value {
            Some(value) if !self.has_errors() => Ok(Parsed { value, warnings: self.0 }),
            _ => Err(self.0),
        }
    }
}

fn constant_of(e: &Sexpr) -> Option<Constant> {
    match e {
        Sexpr::Atom { kind: AtomKind::Int(i), .. } => Some(Constant::Int(*i)),
        Sexpr::Atom { kind: AtomKind::Ident, text, .. } => Some(Constant::sym(text)),
        _ => None,
    }
}

fn term_of(e: &Sexpr) -> Option<Term> {
    match e {
        Sexpr::Atom { kind: AtomKind::Var, text, .. } => Some(Term::Var(Var::new(text))),
        _ => constant_of(e).map(Term::Const),
    }
}

/// Expects a single top-level `(head NAME ...)` form and returns its items
/// after the name.
fn top_form<'a>(forms: &'a [Sexpr], head: &str, text: &str, file: Option<&str>, d: &mut Diags) -> Option<(String, &'a [Sexpr], SourceSpan)> {
    let whole = SourceSpan { file: file.map(str::to_string), line: 1, column: 1, offset: 0, length: text.len() };
    let Some(first) = forms.first() else {
        d.err(format!("expected a `({head} ...)` form"), &whole);
        return None;
    };
    for extra in &forms[1..] {
        d.err("unexpected form after the end of the definition", extra.span());
    }
    if first.head() != Some(head) {
        d.err(format!("expected a `({head} ...)` form"), first.span());
        return None;
    }
    let items = first.as_list().expect("has head");
    let Some(name) = items.get(1).and_then(Sexpr::as_ident) else {
        d.err(format!("`{head}` needs a name"), first.span());
        return None;
    };
    Some((name.to_string(), &items[2..], first.span().clone()))
}

/// Parses `(name arity)` declarations.
fn declarations(items: &[Sexpr], what: &str, d: &mut Diags) -> Vec<(String, usize, SourceSpan)> {
    let mut out = Vec::new();
    for it in items {
        match it.as_list() {
            Some([name, arity]) => match (name.as_ident(), arity) {
                (Some(n), Sexpr::Atom { kind: AtomKind::Int(k), .. }) if *k >= 0 => {
                    out.push((n.to_string(), *k as usize, it.span().clone()))
                }
                _ => d.err(format!("malformed {what} declaration, expected `(name arity)`"), it.span()),
            },
            _ => d.err(format!("malformed {what} declaration, expected `(name arity)`"), it.span()),
        }
    }
    out
}

/// Parses one `(fluent term*)` atom, checking arity.
fn atom_of(e: &Sexpr, sig: &Signature, d: &mut Diags) -> Option<Atom> {
    let items = e.as_list()?;
    let name = items.first().and_then(Sexpr::as_ident)?;
    let Some(fluent) = sig.lookup(name) else {
        d.err(format!("unknown fluent `{name}`"), items[0].span());
        return None;
    };
    let arity = sig.fluent(fluent).arity;
    if items.len() - 1 != arity {
        d.err(format!("fluent `{name}` expects {arity} arguments, found {}", items.len() - 1), e.span());
        return None;
    }
    let mut args = Vec::with_capacity(arity);
    for a in &items[1..] {
        match term_of(a) {
            Some(t) => args.push(t),
            None => {
                d.err("expected a variable or a constant", a.span());
                return None;
            }
        }
    }
    Some(Atom::new(fluent, args))
}

/// `(and lit*)` or a single literal; literals are atoms or `(neq t t)`.
fn conjunction(e: &Sexpr, sig: &Signature, d: &mut Diags) -> Option<(Vec<Atom>, Vec<Diseq>)> {
    let parts: Vec<&Sexpr> = match e.head() {
        Some("and") => e.as_list().expect("list")[1..].iter().collect(),
        _ => vec![e],
    };
    let mut atoms = Vec::new();
    let mut diseqs = Vec::new();
    let mut ok = true;
    for p in parts {
        match p.head() {
            Some("neq") => {
                let items = p.as_list().expect("list");
                if items.len() != 3 {
                    d.err("`neq` takes exactly two terms", p.span());
                    ok = false;
                    continue;
                }
                match (term_of(&items[1]), term_of(&items[2])) {
                    (Some(Term::Var(l)), Some(r)) | (Some(r), Some(Term::Var(l))) => diseqs.push(Diseq { left: l, right: r }),
                    (Some(_), Some(_)) => {
                        d.err("disequality must mention a variable", p.span());
                        ok = false;
                    }
                    _ => {
                        d.err("expected terms in `neq`", p.span());
                        ok = false;
                    }
                }
            }
            Some("not") => {
                d.err("negative literals are not allowed in preconditions or goals", p.span());
                ok = false;
            }
            Some(_) => match atom_of(p, sig, d) {
                Some(a) => atoms.push(a),
                None => ok = false,
            },
            None => {
                d.err("expected a literal `(fluent args...)` or `(neq a b)`", p.span());
                ok = false;
            }
        }
    }
    ok.then_some((atoms, diseqs))
}

fn argspec_of(
    e: &Sexpr,
    params: &[Var],
    functions: &HashMap<String, usize>,
    d: &mut Diags,
) -> Option<ArgSpec> {
    match e {
        Sexpr::Atom { kind: AtomKind::Var, text, span } => {
            let v = Var::new(text);
            match params.iter().position(|p| *p == v) {
                Some(i) => Some(ArgSpec::Param(i)),
                None => {
                    d.err(format!("{v} is not a parameter of this action"), span);
                    None
                }
            }
        }
        Sexpr::Atom { .. } => constant_of(e).map(ArgSpec::Const),
        Sexpr::List { items, span } => {
            let Some(func) = items.first().and_then(Sexpr::as_ident) else {
                d.err("malformed term: a function application must start with a function name", span);
                return None;
            };
            let Some(&arity) = functions.get(func) else {
                d.err(format!("function `{func}` is not declared in `functions`"), items[0].span());
                return None;
            };
            if items.len() - 1 != arity {
                d.err(format!("function `{func}` expects {arity} arguments, found {}", items.len() - 1), span);
                return None;
            }
            let args = items[1..]
                .iter()
                .map(|a| argspec_of(a, params, functions, d))
                .collect::<Option<Vec<_>>>()?;
            Some(ArgSpec::Apply { func: func.to_string(), args })
        }
    }
}

/// One effect entry: `(fluent arg*)` or `(when GUARD (fluent arg*))`.
fn effect_of(
    e: &Sexpr,
    action: &str,
    params: &[Var],
    sig: &Signature,
    functions: &HashMap<String, usize>,
    d: &mut Diags,
) -> Option<(FluentId, SsaDisjunct)> {
    let Some(head) = e.head() else {
        d.err("expected an effect `(fluent args...)`", e.span());
        return None;
    };
    let items = e.as_list().expect("list");
    if head == "when" {
        if items.len() != 3 {
            d.err("`when` takes a guard and one effect", e.span());
            return None;
        }
        let (fluent, mut disj) = effect_of(&items[2], action, params, sig, functions, d)?;
        let guard = &items[1];
        let eqs: Vec<&Sexpr> = match guard.head() {
            Some("and") => guard.as_list().expect("list")[1..].iter().collect(),
            _ => vec![guard],
        };
        for g in eqs {
            match g.as_list() {
                Some([h, var, val]) if h.as_ident() == Some("eq") => {
                    let idx = match term_of(var) {
                        Some(Term::Var(v)) => params.iter().position(|p| *p == v),
                        _ => None,
                    };
                    match (idx, constant_of(val)) {
                        (Some(i), Some(c)) => disj.guard.push((i, c)),
                        _ => {
                            d.err("guard must be `(eq ?param constant)`", g.span());
                            return None;
                        }
                    }
                }
                _ => {
                    d.err("guard must be `(eq ?param constant)` or a conjunction of those", g.span());
                    return None;
                }
            }
        }
        return Some((fluent, disj));
    }
    let Some(fluent) = sig.lookup(head) else {
        d.err(format!("unknown fluent `{head}`"), items[0].span());
        return None;
    };
    let arity = sig.fluent(fluent).arity;
    if items.len() - 1 != arity {
        d.err(format!("fluent `{head}` expects {arity} arguments, found {}", items.len() - 1), e.span());
        return None;
    }
    let args = items[1..]
        .iter()
        .map(|a| argspec_of(a, params, functions, d))
        .collect::<Option<Vec<_>>>()?;
    Some((fluent, SsaDisjunct::new(action, args)))
}

/// Parses a domain file into a validated action theory.
pub fn parse_domain_src(text: &str, file: Option<&str>) -> Result<Parsed<Bat>, Vec<ParseDiagnostic>> {
    let forms = read_all(text, file)?;
    let mut d = Diags::default();
    let Some((name, sections, _)) = top_form(&forms, "domain", text, file, &mut d) else {
        return Err(d.0);
    };

    let mut functions: HashMap<String, usize> = HashMap::new();
    let mut function_order = Vec::new();
    let mut sig = Signature::new();
    let builtin = FunctionRegistry::builtin();
    let mut seen_sections = BTreeSet::new();

    for s in sections {
        match s.head() {
            Some(h @ ("functions" | "fluents")) => {
                if !seen_sections.insert(h) {
                    d.err(format!("duplicate `{h}` section"), s.span());
                }
                let decls = declarations(&s.as_list().expect("list")[1..], &h[..h.len() - 1], &mut d);
                for (n, k, span) in decls {
                    if h == "functions" {
                        match builtin.arity(&n) {
                            None => d.err(
                                format!(
                                    "unknown function `{n}`; available: {}",
                                    builtin.signatures().map(|(f, _)| f).collect::<Vec<_>>().join(", ")
                                ),
                                &span,
                            ),
                            Some(a) if a != k => d.err(format!("function `{n}` has arity {a}, declared {k}"), &span),
                            Some(_) => {
                                if functions.insert(n.clone(), k).is_some() {
                                    d.err(format!("function `{n}` declared twice"), &span);
                                } else {
                                    function_order.push(n);
                                }
                            }
                        }
                    } else if let Err(e) = sig.declare(&n, k) {
                        d.err(e.to_string(), &span);
                    }
                }
            }
            Some("action") => {}
            _ => d.err("expected `(functions ...)`, `(fluents ...)` or `(action ...)`", s.span()),
        }
    }

    let sig = Arc::new(sig);
    let mut schemas = Vec::new();
    let mut ssas: Vec<Ssa> = sig.ids().map(Ssa::rigid).collect();
    let mut action_spans: HashMap<String, SourceSpan> = HashMap::new();

    for s in sections.iter().filter(|s| s.head() == Some("action")) {
        let items = s.as_list().expect("list");
        let Some(aname) = items.get(1).and_then(Sexpr::as_ident) else {
            d.err("`action` needs a name", s.span());
            continue;
        };
        if action_spans.insert(aname.to_string(), s.span().clone()).is_some() {
            d.err(format!("action `{aname}` defined twice"), items[1].span());
            continue;
        }
        let mut params: Option<Vec<Var>> = None;
        let mut pre: Option<(Vec<Atom>, Vec<Diseq>)> = None;
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        let mut clauses = BTreeSet::new();
        let mut ok = true;
        for cl in &items[2..] {
            let Some(h) = cl.head() else {
                d.err("expected `(params ...)`, `(pre ...)`, `(add ...)` or `(del ...)`", cl.span());
                ok = false;
                continue;
            };
            if !clauses.insert(h.to_string()) {
                d.err(format!("duplicate `{h}` clause"), cl.span());
                ok = false;
                continue;
            }
            let body = &cl.as_list().expect("list")[1..];
            match h {
                "params" => {
                    let mut ps = Vec::new();
                    for p in body {
                        match p {
                            Sexpr::Atom { kind: AtomKind::Var, text, .. } => {
                                let v = Var::new(text);
                                if ps.contains(&v) {
                                    d.err(format!("parameter {v} declared twice"), p.span());
                                    ok = false;
                                }
                                ps.push(v);
                            }
                            _ => {
                                d.err("parameters must be variables like `?x`", p.span());
                                ok = false;
                            }
                        }
                    }
                    params = Some(ps);
                }
                "pre" => match body {
                    [] => pre = Some((Vec::new(), Vec::new())),
                    [c] => match conjunction(c, &sig, &mut d) {
                        Some(p) => pre = Some(p),
                        None => ok = false,
                    },
                    _ => {
                        d.err("`pre` takes one formula; wrap several literals in `(and ...)`", cl.span());
                        ok = false;
                    }
                },
                "add" | "del" => {
                    let target = if h == "add" { &mut adds } else { &mut dels };
                    target.extend(body.iter());
                }
                other => {
                    d.err(format!("unknown action clause `{other}`"), cl.span());
                    ok = false;
                }
            }
        }
        let params = params.unwrap_or_default();
        let (atoms, diseqs) = pre.unwrap_or_default();
        for a in &atoms {
            for v in a.vars() {
                if !params.contains(v) {
                    d.err(format!("{v} in the precondition of `{aname}` is not a parameter"), s.span());
                    ok = false;
                }
            }
        }
        for (list, positive) in [(&adds, true), (&dels, false)] {
            for e in list.iter() {
                match effect_of(e, aname, &params, &sig, &functions, &mut d) {
                    Some((fl, disj)) => {
                        let ssa = &mut ssas[fl.0];
                        if positive {
                            ssa.positive.push(disj);
                        } else {
                            ssa.negative.push(disj);
                        }
                    }
                    None => ok = false,
                }
            }
        }
        if ok {
            schemas.push(ActionSchema::new(aname, params, atoms, diseqs));
        }
    }

    if d.has_errors() {
        return Err(d.0);
    }
    let registry = builtin.restricted(function_order.iter().map(String::as_str));
    let bat = Bat::new(&name, sig, schemas, ssas, registry);
    if let Err(vs) = validate_bat(&bat) {
        for v in vs {
            let span = v
                .action
                .as_ref()
                .and_then(|a| action_spans.get(a))
                .cloned()
                .unwrap_or_else(|| forms[0].span().clone());
            d.err(format!("{}: {}", v.item, v.reason), &span);
        }
    }
    d.finish(Some(bat))
}

fn ground_atom(e: &Sexpr, sig: &Signature, d: &mut Diags) -> Option<GroundAtom> {
    let a = atom_of(e, sig, d)?;
    let mut args = Vec::with_capacity(a.args.len());
    for (t, src) in a.args.into_iter().zip(&e.as_list().expect("list")[1..]) {
        match t {
            Term::Const(c) => args.push(c),
            Term::Var(v) => {
                d.err(format!("initial literals must be ground, found {v}"), src.span());
                return None;
            }
        }
    }
    Some(GroundAtom::new(a.fluent, args))
}

/// Parses a problem file against a loaded domain.
pub fn parse_problem_src(text: &str, file: Option<&str>, bat: &Bat) -> Result<Parsed<ProblemSpec>, Vec<ParseDiagnostic>> {
    let forms = read_all(text, file)?;
    let mut d = Diags::default();
    let Some((name, sections, whole)) = top_form(&forms, "problem", text, file, &mut d) else {
        return Err(d.0);
    };
    let sig = bat.signature();
    let mut domain = None;
    let mut init: Option<Vec<Literal>> = None;
    let mut goal = None;
    let mut bound = None;

    for s in sections {
        let Some(h) = s.head() else {
            d.err("expected `(domain ...)`, `(init ...)`, `(goal ...)` or `(bound ...)`", s.span());
            continue;
        };
        let body = &s.as_list().expect("list")[1..];
        match h {
            "domain" => match body {
                [n] if n.as_ident().is_some() => {
                    let n = n.as_ident().expect("ident");
                    if n != bat.name {
                        d.warn(format!("problem names domain `{n}` but `{}` is loaded", bat.name), s.span());
                    }
                    domain = Some(n.to_string());
                }
                _ => d.err("expected `(domain NAME)`", s.span()),
            },
            "init" => {
                let mut lits: Vec<Literal> = Vec::new();
                let mut seen: HashMap<GroundAtom, (bool, SourceSpan)> = HashMap::new();
                for l in body {
                    let (positive, inner) = match l.head() {
                        Some("not") => match l.as_list().expect("list") {
                            [_, a] => (false, a),
                            _ => {
                                d.err("expected `(not (fluent args...))`", l.span());
                                continue;
                            }
                        },
                        _ => (true, l),
                    };
                    if inner.head().is_none() {
                        d.err("expected a ground literal", inner.span());
                        continue;
                    }
                    let Some(atom) = ground_atom(inner, sig, &mut d) else { continue };
                    match seen.get(&atom) {
                        Some((p, first)) if *p != positive => {
                            d.err(
                                format!(
                                    "inconsistent initial theory: {} is asserted both true and false (first at {}:{})",
                                    atom.display(sig),
                                    first.line,
                                    first.column
                                ),
                                l.span(),
                            );
                        }
                        Some(_) => d.warn(format!("duplicate literal {}", atom.display(sig)), l.span()),
                        None => {
                            seen.insert(atom.clone(), (positive, l.span().clone()));
                            lits.push(Literal { positive, atom });
                        }
                    }
                }
                init = Some(lits);
            }
            "goal" => {
                let parsed = match body {
                    [g] if g.head() == Some("exists") => match g.as_list().expect("list") {
                        [_, vars, bodyf] => {
                            let vs = vars.as_list().map(|vs| {
                                vs.iter()
                                    .map(|v| match v {
                                        Sexpr::Atom { kind: AtomKind::Var, text, .. } => Some(Var::new(text)),
                                        _ => None,
                                    })
                                    .collect::<Option<Vec<_>>>()
                            });
                            match vs.flatten() {
                                Some(vs) => conjunction(bodyf, sig, &mut d).map(|(a, q)| (vs, a, q)),
                                None => {
                                    d.err("expected a variable list like `(?x ?y)`", vars.span());
                                    None
                                }
                            }
                        }
                        _ => {
                            d.err("expected `(exists (?vars...) formula)`", g.span());
                            None
                        }
                    },
                    [g] => conjunction(g, sig, &mut d).map(|(a, q)| (Vec::new(), a, q)),
                    _ => {
                        d.err("`goal` takes one formula", s.span());
                        None
                    }
                };
                if let Some((vars, atoms, diseqs)) = parsed {
                    match Ecq::new(vars, atoms, diseqs) {
                        Ok(q) => goal = Some(q),
                        Err(e) => d.err(format!("goal is not a safe closed query: {e}"), s.span()),
                    }
                }
            }
            "bound" => match body {
                [Sexpr::Atom { kind: AtomKind::Int(n), .. }] if *n >= 0 => bound = Some(*n as usize),
                _ => d.err("expected `(bound N)` with N >= 0", s.span()),
            },
            other => d.err(format!("unknown problem section `{other}`"), s.span()),
        }
    }
    if domain.is_none() {
        d.err("missing `(domain NAME)`", &whole);
    }
    if goal.is_none() && !d.has_errors() {
        d.err("missing `(goal ...)`", &whole);
    }
    if bound.is_none() {
        d.err("missing `(bound N)`", &whole);
    }
    let spec = match (domain, goal, bound) {
        (Some(domain), Some(goal), Some(bound)) => Some(ProblemSpec { name, domain, init: init.unwrap_or_default(), goal, bound }),
        _ => None,
    };
    d.finish(spec)
}

/// Reads a plan: one `(action arg*)` form per action.
pub fn parse_plan_src(text: &str, file: Option<&str>) -> Result<Vec<GroundAction>, Vec<ParseDiagnostic>> {
    let forms = read_all(text, file)?;
    let mut d = Diags::default();
    let mut out = Vec::new();
    for f in &forms {
        let Some(name) = f.head() else {
            d.err("expected a ground action `(name args...)`", f.span());
            continue;
        };
        let args: Option<Vec<Constant>> = f.as_list().expect("list")[1..].iter().map(constant_of).collect();
        match args {
            Some(args) => out.push(GroundAction::new(name, args)),
            None => d.err("action arguments must be constants", f.span()),
        }
    }
    d.finish(Some(out)).map(|p| p.value)
}
