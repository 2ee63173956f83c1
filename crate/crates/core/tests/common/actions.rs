//! Random theories over shipped domains and brute-force grounding.

use std::collections::BTreeSet;

use bpp_core::kb::{Term, Var};
use bpp_core::{Bat, Constant, FgpTheory, FluentId, GroundAction, TruthValue};
use proptest::prelude::*;

pub fn pool() -> Vec<Constant> {
    vec![Constant::Int(1), Constant::Int(2), Constant::Int(3), Constant::sym("a"), Constant::sym("b")]
}

/// Random literals over the domain's fluents using constants from `pool`.
pub fn theory(bat: Bat) -> impl Strategy<Value = (Bat, FgpTheory)> {
    let arities: Vec<usize> = bat.signature().iter().map(|(_, f)| f.arity).collect();
    let nf = arities.len();
    let lit = (0..nf, proptest::collection::vec(0..pool().len(), 3), prop_oneof![3 => Just(true), 1 => Just(false)]);
    proptest::collection::vec(lit, 0..25).prop_map(move |lits| {
        let pool = pool();
        let mut th = FgpTheory::new(bat.signature().clone());
        for (f, idx, positive) in lits {
            let t: Vec<_> = idx[..arities[f]].iter().map(|&i| pool[i].clone()).collect();
            let fl = FluentId(f);
            if th.k_true(fl).contains(&t) || th.k_false(fl).contains(&t) {
                continue;
            }
            if positive {
                th.insert_true(fl, t).unwrap();
            } else {
                th.insert_false(fl, t).unwrap();
            }
        }
        (bat.clone(), th)
    })
}

pub fn tuples(consts: &[Constant], n: usize) -> Vec<Vec<Constant>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| consts.iter().map(move |c| [t.clone(), vec![c.clone()]].concat())).collect();
    }
    out
}

pub fn value(t: &Term, params: &[Var], args: &[Constant]) -> Constant {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => args[params.iter().position(|p| p == v).unwrap()].clone(),
    }
}

/// Every schema instance over the constants of the theory whose ground
/// precondition atoms are all known true and whose disequalities hold.
pub fn brute(bat: &Bat, th: &FgpTheory) -> BTreeSet<GroundAction> {
    let consts: Vec<_> = th.constants().into_iter().collect();
    let mut out = BTreeSet::new();
    for s in bat.schemas() {
        for args in tuples(&consts, s.params.len()) {
            let pre = &s.precondition;
            let atoms_ok = pre.atoms.iter().all(|a| {
                let g: Vec<_> = a.args.iter().map(|t| value(t, &s.params, &args)).collect();
                th.v_atom(a.fluent, &g).unwrap() == TruthValue::KnownTrue
            });
            let diseqs_ok =
                pre.diseqs.iter().all(|d| value(&Term::Var(d.left.clone()), &s.params, &args) != value(&d.right, &s.params, &args));
            if atoms_ok && diseqs_ok {
                out.insert(GroundAction::new(&s.name, args));
            }
        }
    }
    out
}
