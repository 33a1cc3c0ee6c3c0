//! CLI contract tests.
//!
//! Two invariants are pinned here:
//! 1. Golden-file stability — every subcommand's output on the bundled model
//!    corpus is frozen byte-for-byte and must be identical across repeated runs.
//! 2. The exit-code contract is exhaustive — each documented code (0 success,
//!    2 infeasible, 3 assumption violated, 4 validation/usage, 5 numerical)
//!    is exercised by at least one invocation, and each error path maps to
//!    exactly one code.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

#[derive(Debug, Clone, PartialEq)]
struct BinRun {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_cmdp(args: &[&str]) -> BinRun {
    let output = Command::new(env!("CARGO_BIN_EXE_cmdp"))
        .args(args)
        .output()
        .expect("failed to launch cmdp binary");
    BinRun {
        code: output.status.code().expect("process terminated by signal"),
        stdout: String::from_utf8(output.stdout).expect("stdout not UTF-8"),
        stderr: String::from_utf8(output.stderr).expect("stderr not UTF-8"),
    }
}

fn model_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
        .to_str()
        .expect("model path not UTF-8")
        .to_owned()
}

fn assert_success(run: &BinRun, golden: &str, what: &str) {
    assert_eq!(run.code, 0, "{what}: expected exit 0, got {run:?}");
    assert_eq!(run.stderr, "", "{what}: expected empty stderr, got {run:?}");
    assert_eq!(run.stdout, golden, "{what}: stdout diverged from golden");
}

const GOLDEN_VALIDATE_TWOACT: &str = "model OK\n\
states: 1\n\
state-action pairs: 2\n\
cost tables: 2 (objective 'objective')\n\
constraints: 1\n\
initial state: s0\n";

const GOLDEN_SOLVE_TWOACT: &str = "status: optimal\n\
objective 'objective' = 0.5\n\
constraint 'budget' = 0.5 (bound 0.5)\n\
occupation measure:\n\
\x20 s0/a = 0.5\n\
\x20 s0/b = 0.5\n\
mixture (2 components):\n\
\x20 weight 0.5: { s0 -> a }\n\
\x20 weight 0.5: { s0 -> b }\n";

const GOLDEN_SOLVE_CHAIN2: &str = "status: optimal\n\
objective 'cost' = 4\n\
occupation measure:\n\
\x20 s0/m = 1\n\
\x20 s1/m = 1\n\
mixture (1 component):\n\
\x20 weight 1: { s0 -> m, s1 -> m }\n";

const GOLDEN_SOLVE_GEOMETRIC: &str = "status: optimal\n\
objective 'cost' = 2\n\
occupation measure:\n\
\x20 s0/a = 2\n\
mixture (1 component):\n\
\x20 weight 1: { s0 -> a }\n";

const GOLDEN_ENUMERATE_CHAIN2: &str = "deterministic strategies: 1\n\
\x20 { s0 -> m, s1 -> m }: finite; cost = 4\n";

const GOLDEN_FIND_FEASIBLE_TWOACT: &str = "feasible: yes\n\
minimal 'budget' = 0 (bound 0.5)\n\
objective 'objective' = 1\n\
constraint 'budget' = 0 (bound 0.5)\n\
occupation measure:\n\
\x20 s0/b = 1\n\
mixture (1 component):\n\
\x20 weight 1: { s0 -> b }\n";

const GOLDEN_ASSUMPTION_HOLDS: &str =
    "assumption holds: no reachable zero-cost end component\n";

const GOLDEN_ASSUMPTION_ZEROLOOP: &str = "assumption violated\n\
witness end component:\n\
\x20 s0: a\n";

const GOLDEN_OCC_TWOACT: &str = "kind = \"occupation\"\n\
\n\
[entries]\n\
\"s0/a\" = 0.5\n\
\"s0/b\" = 0.5\n";

const GOLDEN_STRAT_TWOACT: &str = "kind = \"mixed\"\n\
\n\
[[components]]\n\
weight = 0.5\n\
\n\
[components.choices]\n\
s0 = \"a\"\n\
\n\
[[components]]\n\
weight = 0.5\n\
\n\
[components.choices]\n\
s0 = \"b\"\n";

const GOLDEN_DECOMPOSE_TWOACT: &str = "flow residual: 0\n\
repair adjustment (sup norm): 0\n\
objective 'objective' = 0.5\n\
constraint 'budget' = 0.5 (bound 0.5)\n\
mixture (2 components):\n\
\x20 weight 0.5: { s0 -> a }\n\
\x20 weight 0.5: { s0 -> b }\n";

const GOLDEN_CHECK_EXTREME_TWOACT: &str = "extreme: no\n\
first state mixing actions: s0\n";

const GOLDEN_EVALUATE_MIXED_TWOACT: &str = "strategy kind: mixed\n\
total mass: 1\n\
occupation measure:\n\
\x20 s0/a = 0.5\n\
\x20 s0/b = 0.5\n\
objective 'objective' = 0.5\n\
constraint 'budget' = 0.5 (bound 0.5)\n";

const GOLDEN_EVALUATE_STATIONARY_TWOACT: &str = "strategy kind: stationary\n\
total mass: 1\n\
occupation measure:\n\
\x20 s0/a = 0.25\n\
\x20 s0/b = 0.75\n\
objective 'objective' = 0.75\n\
constraint 'budget' = 0.25 (bound 0.5)\n";

const STATIONARY_STRATEGY_DOC: &str = "kind = \"stationary\"\n\
\n\
[rows.s0]\n\
a = 0.25\n\
b = 0.75\n";

const ZEROLOOP_STAY_STRATEGY_DOC: &str = "kind = \"deterministic\"\n\
\n\
[choices]\n\
s0 = \"a\"\n";

#[test]
fn golden_validate() {
    let run = run_cmdp(&["validate", &model_path("twoact.model")]);
    assert_success(&run, GOLDEN_VALIDATE_TWOACT, "validate twoact");
}

#[test]
fn golden_solve() {
    let run = run_cmdp(&["solve", &model_path("twoact.model")]);
    assert_success(&run, GOLDEN_SOLVE_TWOACT, "solve twoact");
    let run = run_cmdp(&["solve", &model_path("chain2.model")]);
    assert_success(&run, GOLDEN_SOLVE_CHAIN2, "solve chain2");
    let run = run_cmdp(&["solve", &model_path("geometric.model")]);
    assert_success(&run, GOLDEN_SOLVE_GEOMETRIC, "solve geometric");
}

#[test]
fn golden_enumerate() {
    let run = run_cmdp(&["enumerate", &model_path("chain2.model")]);
    assert_success(&run, GOLDEN_ENUMERATE_CHAIN2, "enumerate chain2");
}

#[test]
fn golden_find_feasible() {
    let run = run_cmdp(&["find-feasible", &model_path("twoact.model")]);
    assert_success(&run, GOLDEN_FIND_FEASIBLE_TWOACT, "find-feasible twoact");
}

#[test]
fn golden_check_assumption() {
    let run = run_cmdp(&["check-assumption", &model_path("twoact.model")]);
    assert_success(&run, GOLDEN_ASSUMPTION_HOLDS, "check-assumption twoact");
    let run = run_cmdp(&["check-assumption", &model_path("stopping.model")]);
    assert_success(&run, GOLDEN_ASSUMPTION_HOLDS, "check-assumption stopping");

    let run = run_cmdp(&["check-assumption", &model_path("zeroloop.model")]);
    assert_eq!(run.code, 3, "check-assumption zeroloop: {run:?}");
    assert_eq!(run.stdout, GOLDEN_ASSUMPTION_ZEROLOOP);
    assert_eq!(
        run.stderr,
        "error: penalization assumption violated: reachable zero-cost end component {s0}\n"
    );
}

/// The solve artifacts feed straight back into decompose, check-extreme, and
/// evaluate, and every one of those outputs is frozen.
#[test]
fn golden_artifact_flow() {
    let dir = tempfile::tempdir().expect("tempdir");
    let occ = dir.path().join("twoact.occupation");
    let strat = dir.path().join("twoact.strategy");
    let occ_s = occ.to_str().unwrap();
    let strat_s = strat.to_str().unwrap();

    let run = run_cmdp(&[
        "solve",
        &model_path("twoact.model"),
        "--out-occupation",
        occ_s,
        "--out-strategy",
        strat_s,
    ]);
    assert_success(&run, GOLDEN_SOLVE_TWOACT, "solve with artifact flags");
    assert_eq!(fs::read_to_string(&occ).unwrap(), GOLDEN_OCC_TWOACT);
    assert_eq!(fs::read_to_string(&strat).unwrap(), GOLDEN_STRAT_TWOACT);

    let run = run_cmdp(&["decompose", &model_path("twoact.model"), occ_s]);
    assert_success(&run, GOLDEN_DECOMPOSE_TWOACT, "decompose artifact");

    let run = run_cmdp(&["check-extreme", &model_path("twoact.model"), occ_s]);
    assert_success(&run, GOLDEN_CHECK_EXTREME_TWOACT, "check-extreme artifact");

    let run = run_cmdp(&["evaluate", &model_path("twoact.model"), strat_s]);
    assert_success(&run, GOLDEN_EVALUATE_MIXED_TWOACT, "evaluate artifact");
}

#[test]
fn golden_evaluate_stationary() {
    let dir = tempfile::tempdir().expect("tempdir");
    let strat = dir.path().join("half.strategy");
    fs::write(&strat, STATIONARY_STRATEGY_DOC).unwrap();
    let run = run_cmdp(&[
        "evaluate",
        &model_path("twoact.model"),
        strat.to_str().unwrap(),
    ]);
    assert_success(&run, GOLDEN_EVALUATE_STATIONARY_TWOACT, "evaluate stationary");
}

/// Every subcommand, run twice over the bundled corpus with identical
/// arguments, must produce byte-identical stdout, stderr, and exit code.
/// Simulation is included with a fixed seed.
#[test]
fn outputs_are_stable_across_runs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let occ = dir.path().join("twoact.occupation");
    let strat = dir.path().join("twoact.strategy");
    let solve = run_cmdp(&[
        "solve",
        &model_path("twoact.model"),
        "--out-occupation",
        occ.to_str().unwrap(),
        "--out-strategy",
        strat.to_str().unwrap(),
    ]);
    assert_eq!(solve.code, 0, "artifact solve failed: {solve:?}");

    let models = ["twoact", "chain2", "geometric", "stopping", "zeroloop"];
    let mut paths: Vec<(String, PathBuf)> = Vec::new();
    for name in models {
        paths.push((name.to_owned(), PathBuf::from(model_path(&format!("{name}.model")))));
    }

    let mut invocations: Vec<Vec<String>> = Vec::new();
    for (_, path) in &paths {
        let p = path.to_str().unwrap().to_owned();
        for sub in ["validate", "solve", "find-feasible", "check-assumption", "enumerate"] {
            invocations.push(vec![sub.to_owned(), p.clone()]);
        }
        invocations.push(vec![
            "simulate".to_owned(),
            p.clone(),
            "--n".to_owned(),
            "500".to_owned(),
            "--seed".to_owned(),
            "7".to_owned(),
        ]);
    }
    let twoact = model_path("twoact.model");
    for sub in ["decompose", "check-extreme"] {
        invocations.push(vec![
            sub.to_owned(),
            twoact.clone(),
            occ.to_str().unwrap().to_owned(),
        ]);
    }
    invocations.push(vec![
        "evaluate".to_owned(),
        twoact.clone(),
        strat.to_str().unwrap().to_owned(),
    ]);
    invocations.push(vec![
        "simulate".to_owned(),
        twoact.clone(),
        strat.to_str().unwrap().to_owned(),
        "--n".to_owned(),
        "500".to_owned(),
        "--seed".to_owned(),
        "7".to_owned(),
    ]);

    for args in &invocations {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_cmdp(&argv);
        let second = run_cmdp(&argv);
        assert_eq!(first, second, "unstable output for cmdp {}", args.join(" "));
    }
}

/// A seeded simulation report is reproducible byte-for-byte, both on stdout
/// and through --out.
#[test]
fn golden_simulate_seeded() {
    const GOLDEN_REPORT_GEOMETRIC: &str = "kind = \"report\"\n\
n = 2000\n\
seed = 5\n\
step_cap = 100000\n\
capped = 0\n\
\n\
[entries]\n\
\"s0/a\" = 2.0675\n\
\n\
[standard_errors]\n\
\"s0/a\" = 0.03213235315160609\n\
\n\
[cost_means]\n\
cost = 2.0675\n\
\n\
[cost_standard_errors]\n\
cost = 0.03213235315160609\n\
\n\
[absorption_histogram]\n\
1 = 956\n\
2 = 501\n\
3 = 262\n\
4 = 140\n\
5 = 74\n\
6 = 35\n\
7 = 17\n\
8 = 8\n\
9 = 3\n\
10 = 3\n\
11 = 1\n";

    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("geometric.report");
    let run = run_cmdp(&[
        "simulate",
        &model_path("geometric.model"),
        "--n",
        "2000",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&run, GOLDEN_REPORT_GEOMETRIC, "simulate geometric seeded");
    assert_eq!(fs::read_to_string(&out).unwrap(), GOLDEN_REPORT_GEOMETRIC);
}

/// Exit code 0: success paths, including help and version.
#[test]
fn exit_code_0_success_paths() {
    let run = run_cmdp(&["--help"]);
    assert_eq!(run.code, 0, "--help: {run:?}");
    assert!(run.stdout.contains("Usage: cmdp"), "--help stdout: {run:?}");
    assert_eq!(run.stderr, "");

    let run = run_cmdp(&["--version"]);
    assert_eq!(run.code, 0, "--version: {run:?}");
    assert!(run.stdout.starts_with("cmdp "), "--version stdout: {run:?}");
    assert_eq!(run.stderr, "");

    let run = run_cmdp(&["solve", "--help"]);
    assert_eq!(run.code, 0, "solve --help: {run:?}");
    assert!(run.stdout.contains("Usage: cmdp solve"), "solve --help: {run:?}");
}

/// Exit code 2: the constrained problem is infeasible. A negative bound on a
/// nonnegative cost can never be met.
#[test]
fn exit_code_2_infeasible() {
    let dir = tempfile::tempdir().expect("tempdir");
    let text = fs::read_to_string(model_path("twoact.model")).unwrap();
    let tightened = text.replace("bound = 0.5", "bound = -1.0");
    assert_ne!(text, tightened, "fixture no longer contains the bound");
    let bad = dir.path().join("infeasible.model");
    fs::write(&bad, tightened).unwrap();
    let bad_s = bad.to_str().unwrap();

    for sub in ["solve", "find-feasible"] {
        let run = run_cmdp(&[sub, bad_s]);
        assert_eq!(run.code, 2, "{sub} infeasible: {run:?}");
        assert_eq!(run.stdout, "", "{sub} infeasible stdout: {run:?}");
        assert_eq!(run.stderr, "error: constrained problem is infeasible\n");
    }
}

/// Exit code 3: the penalization assumption fails, so optimality of a finite
/// mixture is not certified. solve refuses; check-assumption reports the
/// witness on stdout.
#[test]
fn exit_code_3_assumption_violated() {
    let run = run_cmdp(&["solve", &model_path("zeroloop.model")]);
    assert_eq!(run.code, 3, "solve zeroloop: {run:?}");
    assert_eq!(run.stdout, "");
    assert!(
        run.stderr.contains("penalization assumption violated"),
        "solve zeroloop stderr: {run:?}"
    );
    assert!(run.stderr.contains("{s0}"), "witness missing: {run:?}");

    let run = run_cmdp(&["check-assumption", &model_path("zeroloop.model")]);
    assert_eq!(run.code, 3, "check-assumption zeroloop: {run:?}");
    assert_eq!(run.stdout, GOLDEN_ASSUMPTION_ZEROLOOP);
}

/// Exit code 4: validation and usage errors — malformed documents, missing
/// files, unknown names, and bad command lines.
#[test]
fn exit_code_4_validation_and_usage() {
    let dir = tempfile::tempdir().expect("tempdir");

    let broken = dir.path().join("broken.model");
    fs::write(&broken, "not toml [[[\n").unwrap();
    let run = run_cmdp(&["validate", broken.to_str().unwrap()]);
    assert_eq!(run.code, 4, "broken TOML: {run:?}");
    assert_eq!(run.stdout, "");
    assert!(run.stderr.contains("parse error"), "broken TOML stderr: {run:?}");

    let missing = dir.path().join("missing.model");
    let run = run_cmdp(&["validate", missing.to_str().unwrap()]);
    assert_eq!(run.code, 4, "missing file: {run:?}");
    assert_eq!(run.stdout, "");
    assert!(run.stderr.contains("could not read"), "missing file stderr: {run:?}");

    let bad_strat = dir.path().join("bad.strategy");
    fs::write(&bad_strat, "kind = \"deterministic\"\n\n[choices]\nnope = \"a\"\n").unwrap();
    let run = run_cmdp(&["evaluate", &model_path("twoact.model"), bad_strat.to_str().unwrap()]);
    assert_eq!(run.code, 4, "unknown state: {run:?}");
    assert!(
        run.stderr.contains("unknown state 'nope'"),
        "unknown state stderr: {run:?}"
    );

    let run = run_cmdp(&["frobnicate"]);
    assert_eq!(run.code, 4, "unknown subcommand: {run:?}");
    assert!(
        run.stderr.contains("unrecognized subcommand"),
        "unknown subcommand stderr: {run:?}"
    );

    let run = run_cmdp(&["solve", &model_path("twoact.model"), "--frobnicate"]);
    assert_eq!(run.code, 4, "unknown flag: {run:?}");
    assert!(
        run.stderr.contains("unexpected argument"),
        "unknown flag stderr: {run:?}"
    );

    let run = run_cmdp(&[]);
    assert_eq!(run.code, 4, "bare invocation: {run:?}");
    assert!(
        run.stdout.contains("Usage: cmdp") || run.stderr.contains("Usage: cmdp"),
        "bare invocation usage text: {run:?}"
    );
}

/// Exit code 5: numerical failure — here, a strategy whose expected occupation
/// diverges, so no finite measure exists to report.
#[test]
fn exit_code_5_numerical() {
    let dir = tempfile::tempdir().expect("tempdir");
    let stay = dir.path().join("stay.strategy");
    fs::write(&stay, ZEROLOOP_STAY_STRATEGY_DOC).unwrap();
    let run = run_cmdp(&["evaluate", &model_path("zeroloop.model"), stay.to_str().unwrap()]);
    assert_eq!(run.code, 5, "evaluate diverging strategy: {run:?}");
    assert!(
        run.stderr.contains("infinite expected occupation"),
        "diverging strategy stderr: {run:?}"
    );
}
