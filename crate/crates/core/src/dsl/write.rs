use std::fmt::Write as _;

use super::ProblemSpec;
use crate::bat::{ArgSpec, Bat, GroundAction, SsaDisjunct};
use crate::kb::FluentId;

fn argspec(out: &mut String, spec: &ArgSpec, params: &[crate::kb::Var]) {
    match spec {
        ArgSpec::Param(i) => match params.get(*i) {
            Some(v) => write!(out, "{v}").unwrap(),
            None => write!(out, "?_{i}").unwrap(),
        },
        ArgSpec::Const(c) => write!(out, "{c}").unwrap(),
        ArgSpec::Apply { func, args } => {
            write!(out, "({func}").unwrap();
            for a in args {
                out.push(' ');
                argspec(out, a, params);
            }
            out.push(')');
        }
    }
}

fn effect(out: &mut String, bat: &Bat, fluent: FluentId, d: &SsaDisjunct, params: &[crate::kb::Var]) {
    let mut body = format!("({}", bat.signature().fluent(fluent).name);
    for a in &d.args {
        body.push(' ');
        argspec(&mut body, a, params);
    }
    body.push(')');
    let eq = |(i, c): &(usize, crate::kb::Constant)| format!("(eq {} {c})", params[*i]);
    match d.guard.as_slice() {
        [] => out.push_str(&body),
        [g] => write!(out, "(when {} {body})", eq(g)).unwrap(),
        gs => write!(out, "(when (and {}) {body})", gs.iter().map(eq).collect::<Vec<_>>().join(" ")).unwrap(),
    }
}

/// Renders a domain in the format read by [`super::parse_domain`].
pub fn serialize_domain(bat: &Bat) -> String {
    let sig = bat.signature();
    let mut out = format!("(domain {}\n", bat.name);
    out.push_str("  (functions");
    for (f, n) in bat.registry().signatures() {
        write!(out, " ({f} {n})").unwrap();
    }
    out.push_str(")\n  (fluents");
    for (_, f) in sig.iter() {
        write!(out, " ({} {})", f.name, f.arity).unwrap();
    }
    out.push(')');
    for s in bat.schemas() {
        write!(out, "\n  (action {}\n    (params", s.name).unwrap();
        for p in &s.params {
            write!(out, " {p}").unwrap();
        }
        out.push_str(")\n    (pre (and");
        for a in &s.precondition.atoms {
            write!(out, " ({}", sig.fluent(a.fluent).name).unwrap();
            for t in &a.args {
                write!(out, " {t}").unwrap();
            }
            out.push(')');
        }
        for d in &s.precondition.diseqs {
            write!(out, " (neq {} {})", d.left, d.right).unwrap();
        }
        out.push_str("))");
        for (head, positive) in [("add", true), ("del", false)] {
            let mut entries = Vec::new();
            for ssa in bat.ssas() {
                let list = if positive { &ssa.positive } else { &ssa.negative };
                for d in list.iter().filter(|d| d.action == s.name) {
                    let mut e = String::new();
                    effect(&mut e, bat, ssa.fluent, d, &s.params);
                    entries.push(e);
                }
            }
            if !entries.is_empty() {
                write!(out, "\n    ({head}").unwrap();
                for e in entries {
                    write!(out, "\n      {e}").unwrap();
                }
                out.push(')');
            }
        }
        out.push(')');
    }
    out.push_str(")\n");
    out
}

/// Renders a problem in the format read by [`super::parse_problem`].
pub fn serialize_problem(spec: &ProblemSpec, bat: &Bat) -> String {
    let sig = bat.signature();
    let mut out = format!("(problem {}\n  (domain {})\n  (init", spec.name, spec.domain);
    for l in &spec.init {
        let atom = l.atom.display(sig);
        if l.positive {
            write!(out, "\n    {atom}").unwrap();
        } else {
            write!(out, "\n    (not {atom})").unwrap();
        }
    }
    write!(out, ")\n  (goal {})\n  (bound {}))\n", spec.goal.display(sig), spec.bound).unwrap();
    out
}

/// One action per line.
pub fn serialize_plan(plan: &[GroundAction]) -> String {
    plan.iter().map(|a| format!("{a}\n")).collect()
}
