//! A fast subset of the acceptance checks, runnable from an installed
//! binary.

use semistream::ipm::Profile;
use semistream::isolation::IsolationOracle;
use semistream::lp::UnitDemands;
use semistream::matching::{max_weight_matching, MatchingConfig};
use semistream::sdd::stream_ls::pass_count;
use semistream::sdd::{solve_sdd0, stream_ls, StreamLsConfig};
use semistream::stream::{stream_stats, GraphStream};
use semistream::vertex_cover::{solve_integral_mvc, MvcConfig};
use semistream_oracles::dense::{a_norm, lu_solve, pinv_solve};
use semistream_oracles::gen;
use semistream_oracles::matching::{hungarian_mwm, max_cardinality, WeightedEdge};
use serde::Serialize;
use serde_json::json;

use crate::{CliError, Outcome};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> Check {
    match f() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn stats_one_pass() -> Result<(bool, String), String> {
    let g = GraphStream::from_edges(2, 2, &[(0, 0, 5), (1, 1, 7)]).map_err(|e| e.to_string())?;
    let s = stream_stats(&g).map_err(|e| e.to_string())?;
    let ok = (s.n, s.m, s.w_max, g.passes()) == (4, 2, 7, 1);
    Ok((
        ok,
        format!(
            "n = {}, m = {}, w_max = {}, passes = {}",
            s.n,
            s.m,
            s.w_max,
            g.passes()
        ),
    ))
}

fn stream_ls_accuracy(seed: u64) -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for (k, &eps) in [1e-2, 1e-6].iter().enumerate() {
        let sys = gen::sddm(20, 30, seed.wrapping_add(k as u64));
        let dense = sys.to_dense_f64();
        let b = gen::consistent_rhs(&dense, seed ^ 0x55);
        let exact = lu_solve(&dense, &b).ok_or("dense solve failed")?;
        let rep = stream_ls(&sys, &b, eps, &StreamLsConfig::default(), None)
            .map_err(|e| e.to_string())?;
        let err: Vec<f64> = rep.x.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let rel = a_norm(&dense, &err) / a_norm(&dense, &exact);
        worst = worst.max(rel / eps);
        ok &= rel <= eps && (rep.retries > 0 || sys.passes() == pass_count(20, eps));
    }
    Ok((ok, format!("worst error / eps = {worst:.3}")))
}

fn isolation_k33(seed: u64) -> Result<(bool, String), String> {
    // perfect matchings of K_{3,3} as permutations; edge (u, v) has index 3u + v + 1
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let trials = 100u64;
    let mut unique = 0;
    for s in 0..trials {
        let iso = IsolationOracle::new(9, 6, 6, seed.wrapping_add(s)).map_err(|e| e.to_string())?;
        let mut w = Vec::new();
        for p in &perms {
            let mut tot = 0u128;
            for (u, &v) in p.iter().enumerate() {
                tot += iso
                    .query((3 * u + v + 1) as u64)
                    .map_err(|e| e.to_string())?;
            }
            w.push(tot);
        }
        let min = *w.iter().min().expect("six matchings");
        if w.iter().filter(|&&x| x == min).count() == 1 {
            unique += 1;
        }
    }
    let frac = unique as f64 / trials as f64;
    Ok((
        frac >= 0.25,
        format!("unique minimum on {unique}/{trials} seeds"),
    ))
}

fn matching_vs_hungarian(seed: u64) -> Result<(bool, String), String> {
    let cfg = MatchingConfig {
        mvc: MvcConfig::with_profile(Profile::Fast),
        ..MatchingConfig::default()
    };
    let mut agree = 0;
    let mut certified = 0;
    let runs = 3;
    for k in 0..runs {
        let n = 3 + k as u32;
        let edges = gen::bipartite(n, n, 0.6, 8, seed.wrapping_add(k));
        let g = GraphStream::from_edges(n, n, &edges).map_err(|e| e.to_string())?;
        let rep = max_weight_matching(&g, seed.wrapping_add(k), &cfg).map_err(|e| e.to_string())?;
        let oracle: Vec<WeightedEdge> = edges.iter().map(|&(u, v, w)| (u, v, w as i128)).collect();
        let h = hungarian_mwm(n as usize, n as usize, &oracle);
        if rep.matching.weight as i128 == h.weight {
            agree += 1;
        }
        if rep.certified {
            certified += 1;
        }
    }
    Ok((
        agree == runs && certified == runs,
        format!("{agree}/{runs} weights agree, {certified}/{runs} certified"),
    ))
}

fn konig(seed: u64) -> Result<(bool, String), String> {
    let cfg = MvcConfig::with_profile(Profile::Fast);
    let runs = 3;
    let mut ok = 0;
    for k in 0..runs {
        let edges = gen::bipartite(4, 4, 0.5, 1, seed.wrapping_add(100 + k));
        let g = GraphStream::from_edges(4, 4, &edges).map_err(|e| e.to_string())?;
        let c =
            solve_integral_mvc(&g, UnitDemands, seed, 3, &cfg, None).map_err(|e| e.to_string())?;
        let pairs: Vec<(u32, u32)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        if c.size == max_cardinality(4, 4, &pairs) as i128 && c.certified {
            ok += 1;
        }
    }
    Ok((
        ok == runs,
        format!("{ok}/{runs} covers equal the maximum matching size"),
    ))
}

fn disconnected_laplacian(seed: u64) -> Result<(bool, String), String> {
    let a = gen::sdd0(30, 3, 1.0, seed);
    let dense = a.to_dense_f64();
    let b = gen::consistent_rhs(&dense, seed ^ 0xaa);
    let eps = 1e-8;
    let rep = solve_sdd0(&a, &b, eps, &StreamLsConfig::default()).map_err(|e| e.to_string())?;
    let exact = pinv_solve(&dense, &b, 1e-12);
    let err: Vec<f64> = rep.x.iter().zip(&exact).map(|(x, y)| x - y).collect();
    let rel = a_norm(&dense, &err) / a_norm(&dense, &exact);
    Ok((
        rel <= eps,
        format!(
            "relative A-norm error {rel:.3e}, {} components",
            rep.components
        ),
    ))
}

pub fn run(seed: u64) -> Result<Outcome, CliError> {
    let checks = vec![
        check("stats", stats_one_pass),
        check("stream_ls", || stream_ls_accuracy(seed)),
        check("isolation", || isolation_k33(seed)),
        check("matching", || matching_vs_hungarian(seed)),
        check("vertex_cover", || konig(seed)),
        check("sdd0", || disconnected_laplacian(seed)),
    ];
    let passed = checks.iter().filter(|c| c.passed).count();
    let all = passed == checks.len();
    let summary = checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        input_digest: None,
        passes: 0,
        peak_words: 0,
        certified: Some(all),
        result: json!({ "checks": checks, "passed": passed, "total": checks.len() }),
        summary,
        failed: !all,
    })
}
