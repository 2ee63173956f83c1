//! Run-time grounding: the finitely many ground actions known to be possible
//! in a theory.

use crate::bat::{Bat, GroundAction};
use crate::kb::{answer_ecq, FgpTheory, KbError};

/// Every ground action whose precondition is known true in `theory`,
/// ordered by schema name and then argument tuple.
///
/// Actions possible in only some models (precondition unknown) are never
/// returned.
pub fn find_possible_actions(theory: &FgpTheory, bat: &Bat) -> Result<Vec<GroundAction>, KbError> {
    let mut schemas: Vec<_> = bat.schemas().iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for s in schemas {
        let name: std::sync::Arc<str> = std::sync::Arc::from(s.name.as_str());
        for b in answer_ecq(theory, &s.precondition)? {
            out.push(GroundAction { name: name.clone(), args: b.into_values() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_domain, parse_problem};

    const COUNTDOWN: &str = include_str!("../../../benchmarks/domains/countdown.bpd");
    const CHOPPING: &str = include_str!("../../../benchmarks/domains/chopping.bpd");

    fn load(domain: &str, problem: &str) -> (Bat, FgpTheory) {
        let bat = parse_domain(domain).unwrap();
        let p = parse_problem(problem, &bat).unwrap();
        let th = p.initial_theory(&bat).unwrap();
        (bat, th)
    }

    fn names(acts: &[GroundAction]) -> Vec<String> {
        acts.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn countdown_example_one() {
        let (bat, th) = load(COUNTDOWN, include_str!("../../../benchmarks/problems/countdown-ex1.bpp"));
        let acts = find_possible_actions(&th, &bat).unwrap();
        assert_eq!(names(&acts), ["(add 1 4 2 5)", "(add 2 5 1 4)", "(mult 1 4 2 5)", "(mult 2 5 1 4)"]);
    }

    #[test]
    fn countdown_example_two_has_no_actions() {
        let (bat, th) = load(COUNTDOWN, include_str!("../../../benchmarks/problems/countdown-ex2.bpp"));
        assert!(find_possible_actions(&th, &bat).unwrap().is_empty());
    }

    #[test]
    fn chopping_single_tree() {
        let (bat, th) = load(CHOPPING, include_str!("../../../benchmarks/problems/chopping-t127.bpp"));
        assert_eq!(names(&find_possible_actions(&th, &bat).unwrap()), ["(chop T127 4)"]);
    }
}
