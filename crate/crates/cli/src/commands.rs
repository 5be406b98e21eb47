use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use semistream::error::Result as CoreResult;
use semistream::ipm::Profile;
use semistream::lp::{DemandOracle, TableDemands, UnitDemands};
use semistream::matching::{max_weight_matching, MatchingConfig, TrialStatus};
use semistream::scalar::{BigReal, Precision, Real};
use semistream::sdd::mtx::{
    read_matrix_market, read_vector, write_matrix_market, SymmetricEntries,
};
use semistream::sdd::{
    solve_sdd0, sparsify as sparsify_source, ExplicitSddm, Sdd0Matrix, SddmSource, SparseGraph,
};
use semistream::sdd::{SparsifyConfig, StreamLsConfig};
use semistream::stream::{stream_stats, GraphStream};
use semistream::vertex_cover::{solve_integral_mvc, MvcConfig, TraceRow};
use semistream_oracles::dense::{a_norm, pinv_solve, relative_spectrum};
use serde_json::json;

use crate::report::digest_files;
use crate::{CliError, Common, Outcome};

/// Dense checks inside reports are skipped above this dimension.
const DENSE_CHECK_LIMIT: usize = 1500;
const SPECTRUM_CHECK_LIMIT: usize = 400;
/// Working precision of `solve-sdd --profile rigorous`.
const SDD_RIGOROUS_BITS: u32 = 128;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn mvc_config(common: &Common) -> Result<MvcConfig, CliError> {
    let mut cfg = MvcConfig::with_profile(common.profile);
    if let Some(e) = common.eps {
        if !(e > 0.0 && e < 0.25) {
            return Err(usage(format!(
                "--eps {e}: centrality bound must lie in (0, 0.25)"
            )));
        }
        cfg.eps_phi = e;
    }
    cfg.solver.sparsify = cfg.solver.sparsify.with_seed(common.seed);
    Ok(cfg)
}

fn write_trace(path: &Path, rows: &[(usize, TraceRow)]) -> Result<(), CliError> {
    let mut w =
        BufWriter::new(File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?);
    writeln!(w, "trial,phase,iteration,log2_t,decrement,passes")?;
    for (trial, r) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            trial, r.phase, r.iteration, r.log2_t, r.decrement, r.passes
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn stats(path: &Path) -> Result<Outcome, CliError> {
    let digest = digest_files(&[path])?;
    let g = GraphStream::from_file(path)?;
    let s = stream_stats(&g)?;
    Ok(Outcome {
        input_digest: Some(digest),
        passes: g.passes(),
        peak_words: g.auditor().peak_words(),
        certified: None,
        result: json!(s),
        summary: format!("n = {}, m = {}, w_max = {}", s.n, s.m, s.w_max),
        failed: false,
    })
}

pub fn solve_matching(
    path: &Path,
    alpha: Option<u32>,
    max_trials: Option<usize>,
    parallel: usize,
    common: &Common,
) -> Result<Outcome, CliError> {
    let digest = digest_files(&[path])?;
    let cfg = MatchingConfig {
        mvc: mvc_config(common)?,
        alpha,
        max_trials,
        parallel: parallel.max(1),
        trace: common.trace.is_some(),
    };
    let g = GraphStream::from_file(path)?;
    let rep = max_weight_matching(&g, common.seed, &cfg)?;
    if let Some(t) = &common.trace {
        let rows: Vec<(usize, TraceRow)> = rep
            .trials
            .iter()
            .flat_map(|tr| tr.trace.iter().map(move |r| (tr.index, r.clone())))
            .collect();
        write_trace(t, &rows)?;
    }
    let edges: Vec<(u32, u32, u64)> = rep
        .matching
        .edges
        .iter()
        .map(|e| (e.u + 1, e.v + 1, e.w))
        .collect();
    let all_failed =
        !rep.trials.is_empty() && rep.trials.iter().all(|t| t.status == TrialStatus::Error);
    let summary = if all_failed {
        format!(
            "every trial failed; first error: {}",
            rep.trials[0].error.as_deref().unwrap_or("unknown")
        )
    } else {
        format!(
            "weight {} with {} edges, {} after {} trial(s), {} passes",
            rep.matching.weight,
            edges.len(),
            if rep.certified {
                "certified"
            } else {
                "not certified"
            },
            rep.trials.len(),
            rep.passes
        )
    };
    Ok(Outcome {
        input_digest: Some(digest),
        passes: rep.passes,
        peak_words: rep.peak_words.max(g.auditor().peak_words()),
        certified: Some(rep.certified),
        result: json!({
            "matching_edges": edges,
            "weight": rep.matching.weight,
            "trials": rep.trials.len(),
            "max_trials": rep.max_trials,
            "alpha": rep.alpha,
            "stats": rep.stats,
            "analytic_passes": rep.analytic_passes,
            "trial_reports": rep.trials,
        }),
        summary,
        failed: all_failed,
    })
}

fn cover_with<D: DemandOracle>(
    g: &GraphStream,
    demands: D,
    attempts: usize,
    common: &Common,
    cfg: &MvcConfig,
    unit: bool,
) -> Result<Outcome, CliError> {
    let mut rows: Vec<(usize, TraceRow)> = Vec::new();
    let mut sink = |k: usize, r: &TraceRow| rows.push((k, r.clone()));
    let trace = common
        .trace
        .is_some()
        .then_some(&mut sink as &mut dyn FnMut(usize, &TraceRow));
    let c = solve_integral_mvc(g, demands, common.seed, attempts, cfg, trace)?;
    if let Some(t) = &common.trace {
        write_trace(t, &rows)?;
    }
    let nl = g.n_left() as usize;
    let left: Vec<usize> = c.cover.iter().filter(|&&i| i < nl).map(|i| i + 1).collect();
    let right: Vec<usize> = c
        .cover
        .iter()
        .filter(|&&i| i >= nl)
        .map(|i| i - nl + 1)
        .collect();
    let mut result = json!({
        "cover": { "left": left, "right": right },
        "size": c.size,
        "certificate_matching": c.certificate_matching,
        "attempts": c.attempts,
        "phase1_iters": c.phase1_iters,
        "phase2_iters": c.phase2_iters,
        "seed": c.seed,
    });
    if !unit {
        result["y"] = json!(c.y);
    }
    Ok(Outcome {
        input_digest: None,
        passes: g.passes(),
        peak_words: g.auditor().peak_words(),
        certified: Some(c.certified),
        result,
        summary: format!(
            "cover of size {} ({}), {} passes",
            c.size,
            if c.certified {
                "certified"
            } else {
                "not certified"
            },
            g.passes()
        ),
        failed: false,
    })
}

pub fn solve_vertex_cover(
    path: &Path,
    demands: Option<&Path>,
    attempts: usize,
    common: &Common,
) -> Result<Outcome, CliError> {
    let cfg = mvc_config(common)?;
    let g = GraphStream::from_file(path)?;
    let mut o = match demands {
        None => {
            let mut o = cover_with(&g, UnitDemands, attempts, common, &cfg, true)?;
            o.input_digest = Some(digest_files(&[path])?);
            o
        }
        Some(d) => {
            let table = TableDemands::read(open(d)?)?;
            let mut o = cover_with(&g, table, attempts, common, &cfg, false)?;
            o.input_digest = Some(digest_files(&[path, d])?);
            o
        }
    };
    o.passes = g.passes();
    Ok(o)
}

fn sdd_matrix<T: Real>(m: &SymmetricEntries, prec: Precision) -> CoreResult<Sdd0Matrix<T>> {
    Sdd0Matrix::new(
        m.diag.iter().map(|&v| T::from_f64(v, prec)).collect(),
        m.upper
            .iter()
            .map(|&(i, j, v)| (i, j, T::from_f64(v, prec)))
            .collect(),
        prec,
    )
}

/// `||x - A^+ b||_A / ||A^+ b||_A` from a dense eigendecomposition.
fn dense_relative_error(dense: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let xs = pinv_solve(dense, b, 1e-13);
    let e: Vec<f64> = x.iter().zip(&xs).map(|(a, b)| a - b).collect();
    let base = a_norm(dense, &xs);
    let err = a_norm(dense, &e);
    if base == 0.0 {
        err
    } else {
        err / base
    }
}

fn solve_sdd_in<T: Real>(
    m: &SymmetricEntries,
    b: &[f64],
    eps: f64,
    prec: Precision,
    cfg: &StreamLsConfig,
) -> Result<(Vec<f64>, u64, u32, usize, usize, Vec<Vec<f64>>), CliError> {
    let a = sdd_matrix::<T>(m, prec)?;
    let bt: Vec<T> = b.iter().map(|&v| T::from_f64(v, prec)).collect();
    let rep = solve_sdd0(&a, &bt, eps, cfg)?;
    let x = rep.x.iter().map(|v| v.to_f64()).collect();
    let dense = if m.n <= DENSE_CHECK_LIMIT {
        a.to_dense_f64()
    } else {
        Vec::new()
    };
    Ok((
        x,
        a.passes(),
        rep.iterations,
        rep.components,
        rep.grounded.len(),
        dense,
    ))
}

pub fn solve_sdd(matrix: &Path, rhs: &Path, common: &Common) -> Result<Outcome, CliError> {
    let digest = digest_files(&[matrix, rhs])?;
    let m = read_matrix_market(open(matrix)?)?;
    let b = read_vector(open(rhs)?)?;
    if b.len() != m.n {
        return Err(usage(format!(
            "right-hand side has {} entries, matrix is {}x{}",
            b.len(),
            m.n,
            m.n
        )));
    }
    let eps = common.eps.unwrap_or(1e-6);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(usage(format!("--eps {eps}: tolerance must lie in (0, 1)")));
    }
    let mut cfg = StreamLsConfig::default();
    cfg.sparsify = cfg.sparsify.with_seed(common.seed);
    let (x, passes, iterations, components, grounded, dense) = match common.profile {
        Profile::Fast => solve_sdd_in::<f64>(&m, &b, eps, Precision::DOUBLE, &cfg)?,
        Profile::Rigorous => {
            solve_sdd_in::<BigReal>(&m, &b, eps, Precision(SDD_RIGOROUS_BITS), &cfg)?
        }
    };
    let residual = (!dense.is_empty()).then(|| dense_relative_error(&dense, &b, &x));
    Ok(Outcome {
        input_digest: Some(digest),
        passes,
        peak_words: 0,
        certified: residual.map(|r| r <= eps),
        result: json!({
            "x": x,
            "passes": passes,
            "iterations": iterations,
            "residual_Anorm_rel": residual,
            "components": components,
            "grounded": grounded,
        }),
        summary: match residual {
            Some(r) => format!(
                "{iterations} refinement steps, {passes} passes, relative A-norm error {r:.3e}"
            ),
            None => format!("{iterations} refinement steps, {passes} passes"),
        },
        failed: false,
    })
}

/// The Laplacian of a bipartite graph stream, vertices in left-then-right
/// order. Zero-weight edges are skipped.
struct GraphLaplacian<'g> {
    graph: &'g GraphStream,
    diag: Vec<f64>,
}

impl SddmSource<f64> for GraphLaplacian<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }
    fn diagonal(&self) -> &[f64] {
        &self.diag
    }
    fn edge_count_hint(&self) -> u64 {
        self.graph.m()
    }
    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, &f64)) -> CoreResult<()> {
        let nl = self.graph.n_left() as usize;
        self.graph.for_each_edge(|e| {
            if e.w > 0 {
                f(e.u as usize, nl + e.v as usize, &(e.w as f64));
            }
            Ok(())
        })
    }
}

fn laplacian(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][u] += w;
        a[v][v] += w;
        a[u][v] -= w;
        a[v][u] -= w;
    }
    a
}

fn is_matrix_market(path: &Path) -> Result<bool, CliError> {
    let mut first = String::new();
    open(path)?.read_line(&mut first)?;
    Ok(first
        .trim_start()
        .to_lowercase()
        .starts_with("%%matrixmarket"))
}

pub fn sparsify(input: &Path, output: Option<&Path>, common: &Common) -> Result<Outcome, CliError> {
    let digest = digest_files(&[input])?;
    let delta = common.delta.unwrap_or(0.1);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(usage(format!(
            "--delta {delta}: quality must lie in (0, 1)"
        )));
    }
    let cfg = SparsifyConfig::default().with_seed(common.seed);
    let (h, diag, original, input_edges, passes, peak): (
        SparseGraph<f64>,
        Vec<f64>,
        Vec<(usize, usize, f64)>,
        usize,
        u64,
        u64,
    ) = if is_matrix_market(input)? {
        let m = read_matrix_market(open(input)?)?;
        if let Some(&(i, j, v)) = m.upper.iter().find(|e| e.2 > 0.0) {
            return Err(usage(format!(
                "entry ({}, {}) = {v} is positive; sparsify takes SDDM matrices",
                i + 1,
                j + 1
            )));
        }
        let mut diag = m.diag.clone();
        let edges: Vec<(usize, usize, f64)> = m
            .upper
            .iter()
            .filter(|e| e.2 < 0.0)
            .map(|&(i, j, v)| (i, j, -v))
            .collect();
        for &(i, j, w) in &edges {
            diag[i] -= w;
            diag[j] -= w;
        }
        if let Some(i) = diag
            .iter()
            .position(|d| *d < -1e-12 * m.diag.iter().fold(1.0f64, |a, b| a.max(b.abs())))
        {
            return Err(usage(format!("row {} is not diagonally dominant", i + 1)));
        }
        let diag: Vec<f64> = diag.into_iter().map(|d| d.max(0.0)).collect();
        let sys = ExplicitSddm::new(diag.clone(), edges.clone(), Precision::DOUBLE);
        let h = sparsify_source(&sys, delta, &cfg)?;
        let count = edges.len();
        (h, diag, edges, count, sys.passes(), 0)
    } else {
        let g = GraphStream::from_file(input)?;
        let src = GraphLaplacian {
            graph: &g,
            diag: vec![0.0; g.n()],
        };
        let h = sparsify_source(&src, delta, &cfg)?;
        let passes = g.passes();
        let nl = g.n_left() as usize;
        // read for the dense check on a separate counter
        let original = if g.n() <= SPECTRUM_CHECK_LIMIT {
            g.detached()
                .collect_edges()?
                .iter()
                .filter(|e| e.w > 0)
                .map(|e| (e.u as usize, nl + e.v as usize, e.w as f64))
                .collect()
        } else {
            Vec::new()
        };
        let n = g.n();
        (
            h,
            vec![0.0; n],
            original,
            g.m() as usize,
            passes,
            g.auditor().peak_words(),
        )
    };
    let n = h.n;
    let bounds = (n <= SPECTRUM_CHECK_LIMIT && !original.is_empty())
        .then(|| relative_spectrum(&laplacian(n, &original), &laplacian(n, &h.edges), 1e-10));
    if let Some(out) = output {
        let mut full = diag.clone();
        let mut upper = Vec::with_capacity(h.edges.len());
        for &(u, v, w) in &h.edges {
            full[u] += w;
            full[v] += w;
            upper.push((u.min(v), u.max(v), -w));
        }
        upper.sort_by_key(|a| (a.0, a.1));
        let f = File::create(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
        write_matrix_market(
            BufWriter::new(f),
            &SymmetricEntries {
                n,
                diag: full,
                upper,
            },
        )?;
    }
    let edges: Vec<(usize, usize, f64)> =
        h.edges.iter().map(|&(u, v, w)| (u + 1, v + 1, w)).collect();
    Ok(Outcome {
        input_digest: Some(digest),
        passes,
        peak_words: peak,
        certified: bounds.map(|(lo, hi)| lo >= 1.0 - delta && hi <= 1.0 + delta),
        result: json!({
            "n": n,
            "input_edges": input_edges,
            "edges": h.edges.len(),
            "budget": h.budget,
            "delta": delta,
            "reductions": h.reductions,
            "samples_capped": h.capped,
            "spectral_bounds": bounds.map(|(lo, hi)| [lo, hi]),
            "sparsifier": edges,
        }),
        summary: format!(
            "{} edges kept (budget {}), {} reduction(s), {} pass(es)",
            h.edges.len(),
            h.budget,
            h.reductions,
            passes
        ),
        failed: false,
    })
}
