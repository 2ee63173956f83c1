//! Benchmark fixtures loaded from the shipped `benchmarks/` directory.

use std::path::{Path, PathBuf};

use bpp_core::dsl::{load_domain, load_problem, ProblemSpec};
use bpp_core::{Bat, FgpTheory};

pub struct Fixture {
    pub bat: Bat,
    pub problem: ProblemSpec,
    pub init: FgpTheory,
}

pub fn benchmarks_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

/// Loads `domains/<domain>.bpd` and `problems/<problem>.bpp`.
pub fn fixture(domain: &str, problem: &str) -> Fixture {
    let dir = benchmarks_dir();
    let bat = load_domain(&dir.join(format!("domains/{domain}.bpd"))).expect("domain loads").value;
    let problem = load_problem(&dir.join(format!("problems/{problem}.bpp")), &bat).expect("problem loads").value;
    let init = problem.initial_theory(&bat).expect("consistent init");
    Fixture { bat, problem, init }
}
