use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

fn domain(name: &str) -> PathBuf {
    root().join("domains").join(format!("{name}.bpd"))
}

fn problem(name: &str) -> PathBuf {
    root().join("problems").join(format!("{name}.bpp"))
}

fn bpp<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_bpp")).args(args).output().expect("run bpp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn plan_finds_single_multiplication() {
    let o =bpp([Path::new("plan").to_path_buf(), domain("countdown"), problem("countdown-ex1")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("(mult 1 4 2 5)\n"), "{out}");
    assert!(out.contains("; plan length: 1"));
}

#[test]
fn unsolvable_problem_exits_one() {
    let o = bpp([Path::new("plan").to_path_buf(), domain("countdown"), problem("countdown-ex2")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("; no plan within bound 3"));
}

#[test]
fn json_result_has_every_field() {
    let o = bpp([
        Path::new("plan").as_os_str(),
        domain("countdown").as_os_str(),
        problem("countdown-ex1").as_os_str(),
        "--json".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    for k in ["mode", "domain", "problem", "bound", "status", "plan", "plan_length", "stats", "wall_time_ms"] {
        assert!(keys.iter().any(|x| x == k), "missing {k}");
    }
    assert_eq!(v["mode"], "search");
    assert_eq!(v["domain"], "countdown");
    assert_eq!(v["problem"], "countdown-ex1");
    assert_eq!(v["bound"], 3);
    assert_eq!(v["status"], "plan");
    assert_eq!(v["plan"], serde_json::json!(["(mult 1 4 2 5)"]));
    assert_eq!(v["plan_length"], 1);
    for k in ["expansions", "generated", "peak_frontier", "duplicates", "pruned", "fixpoints", "depth_exceeded", "h_cache_hits"] {
        assert!(v["stats"][k].is_u64(), "stats.{k}");
    }
    assert!(v["stats"].get("pops").is_none());
    assert!(v["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn json_no_plan_has_null_plan() {
    let o = bpp([
        Path::new("plan").as_os_str(),
        domain("countdown").as_os_str(),
        problem("countdown-ex2").as_os_str(),
        "--json".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["status"], "no_plan");
    assert!(v["plan"].is_null());
    assert!(v["plan_length"].is_null());
}

#[test]
fn node_limit_reports_resource_limit() {
    let o = bpp([
        Path::new("plan").as_os_str(),
        domain("ibw").as_os_str(),
        problem("ibw-tower5").as_os_str(),
        "--node-limit".as_ref(),
        "3".as_ref(),
        "--json".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["status"], "resource_limit");
}

#[test]
fn bound_flag_overrides_problem() {
    let o = bpp([
        Path::new("plan").as_os_str(),
        domain("countdown").as_os_str(),
        problem("countdown-ex1").as_os_str(),
        "--bound".as_ref(),
        "0".as_ref(),
        "--json".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["bound"], 0);
    assert_eq!(v["status"], "no_plan");
}

#[test]
fn printed_plan_validates() {
    let o = bpp([Path::new("plan").to_path_buf(), domain("ibw"), problem("ibw-tower4")]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tower4.plan");
    std::fs::write(&file, stdout(&o)).unwrap();
    let v = bpp([Path::new("validate").to_path_buf(), domain("ibw"), problem("ibw-tower4"), file]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert_eq!(stdout(&v).trim(), "valid plan of length 7");
}

#[test]
fn invalid_plan_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.plan");
    std::fs::write(&file, "(add 1 4 2 5)\n").unwrap();
    let v = bpp([Path::new("validate").to_path_buf(), domain("countdown"), problem("countdown-ex1"), file]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).starts_with("invalid:"), "{}", stdout(&v));
}

#[test]
fn oracle_agrees_on_length() {
    let o = bpp([
        Path::new("oracle").as_os_str(),
        domain("mixers").as_os_str(),
        problem("mixers-truck-away").as_os_str(),
        "--json".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["mode"], "oracle");
    assert_eq!(v["plan_length"], 5);
    assert!(v["stats"].is_null());

    let text = bpp([Path::new("oracle").to_path_buf(), domain("countdown"), problem("countdown-ex2")]);
    assert_eq!(text.status.code(), Some(1));
    assert!(stdout(&text).starts_with("; mode: oracle\n"));
}

#[test]
fn check_accepts_shipped_domains() {
    for d in ["countdown", "chopping", "ibw", "mixers"] {
        let o = bpp([Path::new("check").to_path_buf(), domain(d)]);
        assert_eq!(o.status.code(), Some(0), "{d}: {}", stdout(&o));
        assert!(stdout(&o).starts_with(&format!("ok: domain {d} ")));
    }
}

#[test]
fn check_rejects_unsafe_domain() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.bpd");
    std::fs::write(
        &file,
        "(domain bad\n  (fluents (p 1))\n  (action a (params ?x ?y)\n    (pre (p ?x))\n    (add (p ?y))))\n",
    )
    .unwrap();
    let o = bpp([Path::new("check").to_path_buf(), file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stdout(&o).is_empty());
}

#[test]
fn parse_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.bpp");
    std::fs::write(&file, "(problem broken (domain countdown) (init (value 1 4)\n").unwrap();
    let o = bpp([Path::new("plan").to_path_buf(), domain("countdown"), file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_file_and_bad_usage_exit_two() {
    let o = bpp([Path::new("plan").to_path_buf(), domain("countdown"), PathBuf::from("/no/such/file.bpp")]);
    assert_eq!(o.status.code(), Some(2));
    let o = bpp(["plan", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_runs_suite() {
    let suite = root().join("suites/mixers-tiny.suite");
    let o = bpp([Path::new("bench").as_os_str(), suite.as_os_str(), "--json".as_ref()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json(&o);
    let rows = rows.as_array().unwrap();
    let names: Vec<_> = rows.iter().map(|r| r["problem"].as_str().unwrap()).collect();
    assert_eq!(names, ["one", "one-far", "truck-away"]);
    for r in rows {
        let n = r["plan_length"].as_u64().unwrap();
        assert!((4..=5).contains(&n), "{r}");
    }

    let text = bpp([Path::new("bench").as_os_str(), suite.as_os_str()]);
    let out = stdout(&text);
    assert!(out.lines().next().unwrap().starts_with("instance"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn bench_suite_with_local_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(domain("countdown"), dir.path().join("c.bpd")).unwrap();
    std::fs::copy(problem("countdown-ex1"), dir.path().join("ex1.bpp")).unwrap();
    let suite = dir.path().join("s.suite");
    std::fs::write(&suite, "# local\nfirst c.bpd ex1.bpp bound=0\nsecond c.bpd ex1.bpp\n").unwrap();
    let o = bpp([Path::new("bench").as_os_str(), suite.as_os_str(), "--json".as_ref()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    assert_eq!(rows[0]["status"], "no_plan");
    assert_eq!(rows[1]["status"], "plan");
}
