use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semistream"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "p bipartite 3 3 5\ne 1 1 4\ne 1 2 2\ne 2 2 5\ne 3 3 1\ne 2 3 3\n";

#[test]
fn stats_counts_in_one_pass() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "g.graph",
        "p bipartite 2 2 2\ne 1 1 5\ne 2 2 7\n",
    );
    let out = run(&["stats", s(&g)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["command"], "stats");
    assert_eq!(r["passes"], 1);
    assert_eq!(r["result"]["n"], 4);
    assert_eq!(r["result"]["m"], 2);
    assert_eq!(r["result"]["w_max"], 7);
    assert!(r["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(r.get("wall_time").is_none());

    let empty = write(dir.path(), "e.graph", "p bipartite 3 2 0\n");
    let r = json(&run(&["stats", s(&empty)]));
    assert_eq!(
        (r["result"]["n"].as_u64(), r["result"]["m"].as_u64()),
        (Some(5), Some(0))
    );
}

#[test]
fn matching_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.graph", SMALL);
    let args = ["solve-matching", s(&g), "--seed", "7", "--profile", "fast"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["result"]["weight"], 10);
    assert_eq!(r["certified"], true);
    assert_eq!(r["passes"], r["result"]["analytic_passes"]);
    assert_eq!(r["profile"], "fast");
}

#[test]
fn parallel_trials_agree_with_sequential() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.graph", SMALL);
    let seq = json(&run(&[
        "solve-matching",
        s(&g),
        "--seed",
        "3",
        "--profile",
        "fast",
    ]));
    let par = json(&run(&[
        "solve-matching",
        s(&g),
        "--seed",
        "3",
        "--profile",
        "fast",
        "--trials-parallel",
        "2",
    ]));
    assert_eq!(seq["result"]["weight"], par["result"]["weight"]);
    assert_eq!(
        seq["result"]["matching_edges"],
        par["result"]["matching_edges"]
    );
}

#[test]
fn trace_and_timing() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.graph", SMALL);
    let t = dir.path().join("t.csv");
    let out = run(&[
        "solve-matching",
        s(&g),
        "--profile",
        "fast",
        "--trace",
        s(&t),
        "--timing",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    assert!(json(&out)["wall_time"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(&t).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("trial,phase,iteration,log2_t,decrement,passes")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert!(rows.iter().any(|r| r[1] == "2"));
}

#[test]
fn vertex_cover_with_and_without_demands() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "p4.graph",
        "p bipartite 2 2 3\ne 1 1 1\ne 2 1 1\ne 2 2 1\n",
    );
    let r = json(&run(&["solve-vertex-cover", s(&g), "--profile", "fast"]));
    assert_eq!(r["result"]["size"], 2);
    assert_eq!(r["certified"], true);
    for key in ["cover", "size", "phase1_iters", "phase2_iters", "seed"] {
        assert!(r["result"].get(key).is_some(), "{key}");
    }
    let d = write(dir.path(), "d.txt", "# u v demand\n1 1 2\n2 2 3\n");
    let r = json(&run(&[
        "solve-vertex-cover",
        s(&g),
        s(&d),
        "--profile",
        "fast",
    ]));
    assert_eq!(r["result"]["size"], 5);
    assert_eq!(r["result"]["certificate_matching"], 5);
}

#[test]
fn sdd_residual_is_within_tolerance() {
    let dir = TempDir::new().unwrap();
    // path Laplacian plus a little diagonal, one positive off-diagonal
    let a = write(
        dir.path(),
        "a.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n4 4 7\n1 1 2\n2 2 3\n3 3 3\n4 4 1.5\n2 1 -1\n3 2 1\n4 3 -1\n",
    );
    let b = write(dir.path(), "b.vec", "1\n-2\n0.5\n3\n");
    for profile in ["fast", "rigorous"] {
        let out = run(&[
            "solve-sdd",
            s(&a),
            s(&b),
            "--eps",
            "1e-6",
            "--profile",
            profile,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = json(&out);
        let res = r["result"]["residual_Anorm_rel"].as_f64().unwrap();
        assert!(res <= 1e-6, "{profile}: {res}");
        assert_eq!(r["passes"], r["result"]["passes"]);
        assert_eq!(r["result"]["x"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn sparsify_writes_matrix_market() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.graph", SMALL);
    let o = dir.path().join("h.mtx");
    let out = run(&["sparsify", s(&g), "--delta", "0.2", "--output", s(&o)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passes"], 1);
    assert!(r["result"]["edges"].as_u64().unwrap() <= r["result"]["budget"].as_u64().unwrap());
    let text = std::fs::read_to_string(&o).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["stats", "/definitely/missing.graph"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let g = write(dir.path(), "g.graph", SMALL);
    assert_eq!(
        run(&["solve-matching", s(&g), "--profile", "slow"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve-matching", s(&g), "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    let bad = write(dir.path(), "bad.graph", "p bipartite 2 2 1\ne 3 1 1\n");
    let out = run(&["stats", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    let a = write(
        dir.path(),
        "a.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 2 1\n",
    );
    let b = write(dir.path(), "b.vec", "1\n");
    assert_eq!(run(&["solve-sdd", s(&a), s(&b)]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["certified"], true);
    assert_eq!(r["result"]["passed"], r["result"]["total"]);
}
