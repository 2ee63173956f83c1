//! A small domain whose effects are also written out by hand.

use bpp_core::progression::progress;
use bpp_core::{parse_domain, Bat, Constant, FgpTheory, FluentId, GroundAction, ProgressError, TruthValue};
use proptest::prelude::*;

pub const DOMAIN: &str = "
(domain syn
  (functions (add 2))
  (fluents (p 1) (q 2) (r 1))
  (action mv
    (params ?x ?y)
    (pre (and (p ?x) (r ?y)))
    (add (q ?x ?y) (p (add ?x 1)))
    (del (p ?x) (when (eq ?y 0) (r ?x))))
  (action sw
    (params ?x ?y)
    (pre (and (p ?x) (p ?y)))
    (add (r ?x))
    (del (r ?y)))
  (action noop
    (params ?x)
    (pre (p ?x))))
";

pub const P: FluentId = FluentId(0);
pub const Q: FluentId = FluentId(1);
pub const R: FluentId = FluentId(2);

pub fn bat() -> Bat {
    parse_domain(DOMAIN).unwrap()
}

pub fn c(i: i64) -> Constant {
    Constant::Int(i)
}

pub type Atom = (FluentId, Vec<Constant>);

/// Adds and deletes of each action, read off the domain text by hand.
pub fn expected_effects(name: &str, x: i64, y: i64) -> (Vec<Atom>, Vec<Atom>) {
    match name {
        "mv" => {
            let adds = vec![(Q, vec![c(x), c(y)]), (P, vec![c(x + 1)])];
            let mut dels = vec![(P, vec![c(x)])];
            if y == 0 {
                dels.push((R, vec![c(x)]));
            }
            (adds, dels)
        }
        "sw" => (vec![(R, vec![c(x)])], vec![(R, vec![c(y)])]),
        _ => (Vec::new(), Vec::new()),
    }
}

pub fn theory(bat: &Bat) -> impl Strategy<Value = FgpTheory> {
    let sig = bat.signature().clone();
    let lit = (0usize..3, 0i64..5, 0i64..5, any::<bool>());
    proptest::collection::vec(lit, 0..20).prop_map(move |lits| {
        let mut th = FgpTheory::new(sig.clone());
        for (f, a, b, positive) in lits {
            let fl = FluentId(f);
            let t = if fl == Q { vec![c(a), c(b)] } else { vec![c(a)] };
            let clash = if positive { th.k_false(fl).contains(&t) } else { th.k_true(fl).contains(&t) };
            if clash {
                continue;
            }
            if positive {
                th.insert_true(fl, t).unwrap();
            } else {
                th.insert_false(fl, t).unwrap();
            }
        }
        th
    })
}

pub fn action() -> impl Strategy<Value = (&'static str, i64, i64)> {
    (prop_oneof![Just("mv"), Just("sw"), Just("noop")], 0i64..5, 0i64..5)
}

pub fn ground(name: &str, x: i64, y: i64) -> GroundAction {
    if name == "noop" {
        GroundAction::new(name, vec![c(x)])
    } else {
        GroundAction::new(name, vec![c(x), c(y)])
    }
}

/// Every atom over the constants 0..=6 (enough to cover `x + 1`).
pub fn universe() -> Vec<Atom> {
    let mut out = Vec::new();
    for a in 0..=6 {
        out.push((P, vec![c(a)]));
        out.push((R, vec![c(a)]));
        for b in 0..=6 {
            out.push((Q, vec![c(a), c(b)]));
        }
    }
    out
}

/// Progresses `th` through the action and compares every atom over the
/// constants against the hand-written effects.
pub fn check(th: &FgpTheory, name: &str, x: i64, y: i64) -> Result<(), String> {
    let bat = bat();
    let a = ground(name, x, y);
    let (adds, dels) = expected_effects(name, x, y);
    let clash = adds.iter().any(|t| dels.contains(t));
    match progress(th, &bat, &a) {
        Err(ProgressError::EffectConflict { .. }) if clash => Ok(()),
        Err(e) => Err(format!("{a}: unexpected error {e}")),
        Ok(_) if clash => Err(format!("{a}: conflicting effects accepted")),
        Ok(next) => {
            for (f, t) in universe() {
                let want = if adds.contains(&(f, t.clone())) {
                    TruthValue::KnownTrue
                } else if dels.contains(&(f, t.clone())) {
                    TruthValue::KnownFalse
                } else {
                    th.v_atom(f, &t).unwrap()
                };
                let got = next.v_atom(f, &t).unwrap();
                if got != want {
                    return Err(format!("{a}: {f:?} {t:?} is {got:?}, expected {want:?}"));
                }
            }
            if !next.is_consistent() {
                return Err(format!("{a}: inconsistent result"));
            }
            Ok(())
        }
    }
}
