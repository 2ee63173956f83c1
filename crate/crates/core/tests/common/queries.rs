//! Random theories and safe queries over three small fluents.

use std::collections::BTreeSet;
use std::sync::Arc;

use bpp_core::kb::{Atom, Diseq, Ecq, Term, Var};
use bpp_core::{Constant, FgpTheory, FluentId, GroundAtom, Signature, TruthValue};
use proptest::prelude::*;

pub const NCONST: i64 = 4;
pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn signature() -> Arc<Signature> {
    let mut s = Signature::new();
    s.declare("p", 1).unwrap();
    s.declare("q", 2).unwrap();
    s.declare("r", 2).unwrap();
    Arc::new(s)
}

pub fn all_tuples(arity: usize) -> Vec<Vec<Constant>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| (0..NCONST).map(move |c| [t.clone(), vec![Constant::Int(c)]].concat()))
            .collect();
    }
    out
}

/// Every ground atom over the constants, paired with 0 (unknown), 1 (true)
/// or 2 (false).
pub fn theory() -> impl Strategy<Value = FgpTheory> {
    let sig = signature();
    let atoms: Vec<GroundAtom> = sig
        .iter()
        .flat_map(|(id, f)| all_tuples(f.arity).into_iter().map(move |t| GroundAtom::new(id, t)))
        .collect();
    let n = atoms.len();
    proptest::collection::vec(prop_oneof![3 => Just(0u8), 2 => Just(1u8), 1 => Just(2u8)], n).prop_map(move |marks| {
        let mut th = FgpTheory::new(sig.clone());
        for (a, m) in atoms.iter().zip(marks) {
            match m {
                1 => th.insert_true(a.fluent, a.args.clone()).unwrap(),
                2 => th.insert_false(a.fluent, a.args.clone()).unwrap(),
                _ => false,
            };
        }
        th
    })
}

pub fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => (0..VARS.len()).prop_map(|i| Term::var(VARS[i])),
        1 => (0..NCONST).prop_map(|c| Term::Const(Constant::Int(c))),
    ]
}

pub fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        term().prop_map(|t| Atom::new(FluentId(0), vec![t])),
        (term(), term()).prop_map(|(a, b)| Atom::new(FluentId(1), vec![a, b])),
        (term(), term()).prop_map(|(a, b)| Atom::new(FluentId(2), vec![a, b])),
    ]
}

/// A safe query: its variables are exactly those occurring in its atoms.
pub fn ecq() -> impl Strategy<Value = Ecq> {
    (proptest::collection::vec(atom(), 1..4), proptest::collection::vec((0..VARS.len(), term()), 0..3)).prop_map(
        |(atoms, ds)| {
            let mut vars: Vec<Var> = Vec::new();
            for a in &atoms {
                for v in a.vars() {
                    if !vars.contains(v) {
                        vars.push(v.clone());
                    }
                }
            }
            let diseqs = ds
                .into_iter()
                .map(|(i, t)| (Var::new(VARS[i]), t))
                .filter(|(l, r)| vars.contains(l) && r.as_var().is_none_or(|v| vars.contains(v)))
                .map(|(left, right)| Diseq { left, right })
                .collect();
            Ecq { vars, atoms, diseqs }
        },
    )
}

pub fn assignments(nvars: usize) -> Vec<Vec<Constant>> {
    all_tuples(nvars)
}

pub fn ground(t: &Term, vars: &[Var], vals: &[Constant]) -> Constant {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => vals[vars.iter().position(|x| x == v).unwrap()].clone(),
    }
}

/// Direct reading of the answer definition: every atom known true and every
/// disequality holding under the assignment.
pub fn brute_answers(th: &FgpTheory, q: &Ecq) -> BTreeSet<Vec<Constant>> {
    assignments(q.vars.len())
        .into_iter()
        .filter(|vals| {
            q.atoms.iter().all(|a| {
                let args: Vec<_> = a.args.iter().map(|t| ground(t, &q.vars, vals)).collect();
                th.v_atom(a.fluent, &args).unwrap() == TruthValue::KnownTrue
            }) && q.diseqs.iter().all(|d| ground(&Term::Var(d.left.clone()), &q.vars, vals) != ground(&d.right, &q.vars, vals))
        })
        .collect()
}
