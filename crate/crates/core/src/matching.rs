//! Exact maximum-weight bipartite matching through the cover LP.
//!
//! Each trial draws an isolating perturbation `b = iso + n^alpha w`, solves
//! the perturbed-objective cover LP, keeps the at most `n` tight edge rows
//! and matches exactly on them. A trial is certified when the matching's
//! `b`-weight meets the cover's value.

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isolation::IsolationOracle;
use crate::lp::DemandOracle;
use crate::stream::{stream_stats, EdgeRecord, GraphStream, StreamStats};
use crate::vertex_cover::{cover_objective, mvc_tight_set, MvcConfig, TightEdge, TraceRow};

/// Demands `b_e = iso(id_e + 1) + n^alpha w_e`.
#[derive(Clone, Debug)]
pub struct PerturbedDemands {
    iso: IsolationOracle,
    alpha: u32,
    scale: i128,
}

/// Isolation parameters for a graph: ground set `n_L n_R` (edge ids),
/// family size bound `n^n`.
fn iso_params(graph: &GraphStream) -> (u64, u64, u64) {
    let ground = (graph.n_left() as u64 * graph.n_right() as u64).max(2);
    let n = (graph.n() as u64).max(2);
    (ground, n, n)
}

impl PerturbedDemands {
    /// Smallest `alpha` with `n^alpha > 2 m B`, `B` the largest value the
    /// isolation oracle can return.
    pub fn min_alpha(graph: &GraphStream) -> Result<u32> {
        let (ground, zb, ze) = iso_params(graph);
        let bound = BigUint::from(2u32)
            * BigUint::from(graph.m().max(1))
            * IsolationOracle::weight_bound(ground, zb, ze)?;
        let n = BigUint::from((graph.n() as u64).max(2));
        let mut a = 0u32;
        let mut p = BigUint::one();
        while p <= bound {
            p *= &n;
            a += 1;
        }
        Ok(a)
    }

    /// `alpha = None` picks [`PerturbedDemands::min_alpha`].
    pub fn new(
        graph: &GraphStream,
        seed: u64,
        alpha: Option<u32>,
        w_max: u64,
    ) -> Result<PerturbedDemands> {
        let min = Self::min_alpha(graph)?;
        let alpha = alpha.unwrap_or(min);
        if alpha < min {
            return Err(Error::Parameter(format!(
                "alpha = {alpha} is too small: need n^alpha > 2 m B, which holds from alpha = {min}"
            )));
        }
        let (ground, zb, ze) = iso_params(graph);
        let iso = IsolationOracle::new(ground, zb, ze, seed)?;
        let n = BigInt::from((graph.n() as u64).max(2));
        let scale = num_traits::pow(n, alpha as usize);
        let top = &scale * BigInt::from(w_max)
            + BigInt::from(IsolationOracle::weight_bound(ground, zb, ze)?);
        if top.bits() > 126 {
            return Err(Error::Parameter(format!(
                "demands need {} bits; at most 126 are supported",
                top.bits()
            )));
        }
        Ok(PerturbedDemands {
            iso,
            alpha,
            scale: scale.to_i128().expect("checked above"),
        })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }
    pub fn oracle(&self) -> &IsolationOracle {
        &self.iso
    }
    pub fn scale(&self) -> i128 {
        self.scale
    }
}

impl DemandOracle for PerturbedDemands {
    fn demand(&self, e: &EdgeRecord) -> Result<i128> {
        let iso = self.iso.query(e.id + 1)? as i128;
        Ok(iso + self.scale * e.w as i128)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchedEdge {
    pub id: u64,
    pub u: u32,
    pub v: u32,
    pub w: u64,
    pub b: i128,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub edges: Vec<MatchedEdge>,
    pub weight: u128,
    pub b_weight: i128,
}

impl Matching {
    fn from_edges(mut edges: Vec<MatchedEdge>) -> Matching {
        edges.sort_by_key(|e| e.id);
        Matching {
            weight: edges.iter().map(|e| e.w as u128).sum(),
            b_weight: edges.iter().map(|e| e.b).sum(),
            edges,
        }
    }
}

/// Maximum-weight matching on an explicit edge list by successive longest
/// augmenting paths. Edges are `(id, a, b, weight)` with `a` and `b` on
/// opposite sides of a bipartition of `0..n`. Returns indices into `edges`.
pub fn max_weight_on_edges(n: usize, edges: &[(u64, usize, usize, i128)]) -> Vec<usize> {
    // mate[v] = edge index matched at v
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let left: HashSet<usize> = edges.iter().map(|e| e.1).collect();
    loop {
        // Bellman-Ford from all free left vertices; dist is the gain so far.
        let mut dist: Vec<Option<i128>> = vec![None; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        for &a in &left {
            if mate[a].is_none() {
                dist[a] = Some(0);
            }
        }
        for _ in 0..=n {
            let mut changed = false;
            for (k, &(_, a, b, w)) in edges.iter().enumerate() {
                let matched = mate[a] == Some(k);
                // unmatched edges go left to right, matched right to left
                let (from, to, gain) = if matched { (b, a, -w) } else { (a, b, w) };
                if let Some(d) = dist[from] {
                    let nd = d + gain;
                    if dist[to].is_none_or(|x| nd > x) {
                        dist[to] = Some(nd);
                        pred[to] = Some(k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let best = (0..n)
            .filter(|v| !left.contains(v) && mate[*v].is_none())
            .filter_map(|v| dist[v].map(|d| (d, v)))
            .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        let Some((gain, end)) = best else { break };
        if gain <= 0 {
            break;
        }
        // Walk back, flipping edges along the path.
        let mut v = end;
        let mut path = Vec::new();
        let mut seen = HashSet::new();
        while let Some(k) = pred[v] {
            if !seen.insert(k) {
                break;
            }
            path.push(k);
            let (_, a, b, _) = edges[k];
            v = if v == b { a } else { b };
            if left.contains(&v) && mate[v].is_none() {
                break;
            }
        }
        let was_matched: Vec<bool> = path.iter().map(|&k| mate[edges[k].1] == Some(k)).collect();
        for (&k, matched) in path.iter().zip(was_matched) {
            if !matched {
                let (_, a, b, _) = edges[k];
                mate[a] = Some(k);
                mate[b] = Some(k);
            }
        }
    }
    let mut out: Vec<usize> = mate
        .iter()
        .flatten()
        .copied()
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    out.sort_unstable();
    out
}

/// Exact maximum-`b` matching among the given tight edges.
pub fn restricted_matching(n_left: usize, n: usize, edges: &[TightEdge]) -> Matching {
    let list: Vec<(u64, usize, usize, i128)> = edges
        .iter()
        .map(|t| {
            (
                t.edge.id,
                t.edge.u as usize,
                n_left + t.edge.v as usize,
                t.demand,
            )
        })
        .collect();
    let chosen = max_weight_on_edges(n, &list);
    Matching::from_edges(
        chosen
            .into_iter()
            .map(|k| {
                let t = edges[k];
                MatchedEdge {
                    id: t.edge.id,
                    u: t.edge.u,
                    v: t.edge.v,
                    w: t.edge.w,
                    b: t.demand,
                }
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certificate {
    /// `b(M) >= 1^T y - 1/2` with `y` a feasible cover.
    Pass {
        gap: f64,
    },
    Fail {
        gap: f64,
    },
    InvalidInput {
        reason: String,
    },
}

impl Certificate {
    pub fn passed(&self) -> bool {
        matches!(self, Certificate::Pass { .. })
    }
}

/// Weak-duality check in one pass. `y` is indexed left then right and must
/// satisfy `y >= 0` and `y_u + y_v >= b_e` for every edge.
pub fn verify_optimality<D: DemandOracle>(
    graph: &GraphStream,
    demands: &D,
    matching: &Matching,
    y: &[BigRational],
) -> Result<Certificate> {
    let nl = graph.n_left() as usize;
    if y.len() != graph.n() {
        return Ok(Certificate::InvalidInput {
            reason: format!("cover has length {}, expected {}", y.len(), graph.n()),
        });
    }
    if let Some(i) = y.iter().position(|v| v.is_negative()) {
        return Ok(Certificate::InvalidInput {
            reason: format!("cover value at vertex {i} is negative"),
        });
    }
    let mut used = HashSet::new();
    for e in &matching.edges {
        if !used.insert((0, e.u as usize)) || !used.insert((1, e.v as usize)) {
            return Ok(Certificate::InvalidInput {
                reason: format!("edge {} shares an endpoint", e.id),
            });
        }
    }
    let mut wanted: HashMap<u64, (u32, u32)> =
        matching.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
    let mut b_m = BigInt::zero();
    let mut violated: Option<u64> = None;
    graph.for_each_edge(|e| {
        let b = demands.demand(e)?;
        if wanted.remove(&e.id).is_some() {
            b_m += b;
        }
        if violated.is_none() {
            let lhs = &y[e.u as usize] + &y[nl + e.v as usize];
            if lhs < BigRational::from_integer(BigInt::from(b)) {
                violated = Some(e.id);
            }
        }
        Ok(())
    })?;
    if let Some((id, _)) = wanted.into_iter().next() {
        return Ok(Certificate::InvalidInput {
            reason: format!("matched edge {id} is not in the stream"),
        });
    }
    if let Some(id) = violated {
        return Ok(Certificate::InvalidInput {
            reason: format!("cover misses the demand of edge {id}"),
        });
    }
    let total: BigRational = y.iter().fold(BigRational::zero(), |a, b| a + b);
    let gap = total - BigRational::from_integer(b_m);
    let gap_f = gap.to_f64().unwrap_or(f64::INFINITY);
    if gap <= BigRational::new(BigInt::one(), BigInt::from(2)) {
        Ok(Certificate::Pass { gap: gap_f })
    } else {
        Ok(Certificate::Fail { gap: gap_f })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchingConfig {
    pub mvc: MvcConfig,
    /// `None` uses the smallest valid exponent.
    pub alpha: Option<u32>,
    /// `None` uses `ceil(8 (log2 n + log2 n^2))`.
    pub max_trials: Option<usize>,
    /// Trials run concurrently in batches of this size.
    pub parallel: usize,
    /// Keep per-iteration trace rows in the trial reports.
    pub trace: bool,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        MatchingConfig {
            mvc: MvcConfig::default(),
            alpha: None,
            max_trials: None,
            parallel: 1,
            trace: false,
        }
    }
}

pub fn default_trials(n: usize) -> usize {
    let ln = (n.max(2) as f64).log2();
    (8.0 * (ln + 2.0 * ln)).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Certified,
    Uncertified,
    /// More than `n` tight edge rows.
    TooManyTight,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub index: usize,
    pub isolation_seed: u64,
    pub perturbation_seed: u64,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub bit_complexity: u32,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub passes: u64,
    /// `None` when the trial stopped on an error.
    pub analytic_passes: Option<u64>,
    pub halvings: usize,
    /// Peak audited words on the stream this trial ran on.
    pub peak_words: u64,
    pub tight_edges: usize,
    pub slack_edge_rows: u64,
    pub magnitude_ratio: f64,
    pub weight: u128,
    pub b_weight: i128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip)]
    pub matching: Matching,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub tight_support: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchingReport {
    pub matching: Matching,
    pub certified: bool,
    pub alpha: u32,
    pub stats: StreamStats,
    /// Passes over the stream, summed over the global pass and the reported trials.
    pub passes: u64,
    pub analytic_passes: Option<u64>,
    pub trials: Vec<TrialReport>,
    pub max_trials: usize,
    pub seed: u64,
    /// Largest audited footprint of any trial.
    pub peak_words: u64,
}

/// `(isolation seed, perturbation seed)` of each trial.
pub fn trial_seeds(seed: u64, count: usize) -> Vec<(u64, u64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.next_u64(), rng.next_u64()))
        .collect()
}

fn run_trial(
    graph: &GraphStream,
    index: usize,
    seeds: (u64, u64),
    alpha: u32,
    w_max: u64,
    cfg: &MatchingConfig,
) -> TrialReport {
    let start = graph.passes();
    let mut rep = TrialReport {
        index,
        isolation_seed: seeds.0,
        perturbation_seed: seeds.1,
        status: TrialStatus::Error,
        error: None,
        bit_complexity: 0,
        phase1_iters: 0,
        phase2_iters: 0,
        passes: 0,
        analytic_passes: None,
        halvings: 0,
        peak_words: 0,
        tight_edges: 0,
        slack_edge_rows: 0,
        magnitude_ratio: 0.0,
        weight: 0,
        b_weight: 0,
        certificate: None,
        matching: Matching::default(),
        trace: Vec::new(),
        tight_support: Vec::new(),
    };
    let res = (|| -> Result<()> {
        let demands = PerturbedDemands::new(graph, seeds.0, Some(alpha), w_max)?;
        let _iso = graph.auditor().track(demands.oracle().storage_words());
        let c = cover_objective(graph);
        let mut trace = Vec::new();
        let mut sink = |r: &TraceRow| trace.push(r.clone());
        let tight = mvc_tight_set(
            graph,
            &demands,
            &c,
            seeds.1,
            &cfg.mvc,
            if cfg.trace { Some(&mut sink) } else { None },
        )?;
        rep.trace = trace;
        rep.bit_complexity = tight.bit_complexity;
        rep.phase1_iters = tight.phase1_iters;
        rep.phase2_iters = tight.phase2_iters;
        rep.halvings = tight.halvings;
        rep.tight_edges = tight.tight.edges.len();
        rep.slack_edge_rows = tight.tight.slack_edge_rows;
        rep.magnitude_ratio = tight.magnitude_ratio;
        rep.tight_support = tight.tight.edges.iter().map(|t| t.edge.id).collect();
        let _tight = graph
            .auditor()
            .track(5 * tight.tight.edges.len() + tight.tight.x.len());
        let mut analytic = tight.analytic_passes;
        if tight.tight.edges.len() > graph.n() {
            rep.status = TrialStatus::TooManyTight;
            rep.analytic_passes = Some(analytic);
            return Ok(());
        }
        let m = restricted_matching(graph.n_left() as usize, graph.n(), &tight.tight.edges);
        let y: Vec<BigRational> = tight
            .tight
            .y(graph.n_left() as usize)
            .into_iter()
            .map(|v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        let cert = verify_optimality(graph, &demands, &m, &y)?;
        analytic += 1;
        rep.status = if cert.passed() {
            TrialStatus::Certified
        } else {
            TrialStatus::Uncertified
        };
        rep.certificate = Some(cert);
        rep.weight = m.weight;
        rep.b_weight = m.b_weight;
        rep.matching = m;
        rep.analytic_passes = Some(analytic);
        Ok(())
    })();
    if let Err(e) = res {
        rep.status = TrialStatus::Error;
        rep.error = Some(e.to_string());
        rep.analytic_passes = None;
    }
    rep.passes = graph.passes() - start;
    rep.peak_words = graph.auditor().peak_words();
    rep
}

/// Maximum-weight matching of a bipartite graph with non-negative integer
/// weights. Stops at the first certified trial; otherwise returns the best
/// matching seen, uncertified.
pub fn max_weight_matching(
    graph: &GraphStream,
    seed: u64,
    cfg: &MatchingConfig,
) -> Result<MatchingReport> {
    let start = graph.passes();
    let stats = stream_stats(graph)?;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None if stats.m == 0 => 0,
        None => PerturbedDemands::min_alpha(graph)?,
    };
    let max_trials = cfg.max_trials.unwrap_or_else(|| default_trials(graph.n()));
    let mut report = MatchingReport {
        matching: Matching::default(),
        certified: stats.m == 0,
        alpha,
        stats,
        passes: 0,
        analytic_passes: Some(1),
        trials: Vec::new(),
        max_trials,
        seed,
        peak_words: 0,
    };
    if stats.m == 0 {
        report.passes = graph.passes() - start;
        return Ok(report);
    }
    if let Some(a) = cfg.alpha {
        // report a bad exponent up front instead of once per trial
        PerturbedDemands::new(graph, 0, Some(a), stats.w_max)?;
    }
    let seeds = trial_seeds(seed, max_trials);
    let batch = cfg.parallel.max(1);
    let mut trial_passes = 0u64;
    'outer: for chunk in seeds.chunks(batch).enumerate().map(|(b, c)| (b * batch, c)) {
        let (offset, chunk) = chunk;
        let results: Vec<TrialReport> = if batch == 1 {
            vec![run_trial(graph, offset, chunk[0], alpha, stats.w_max, cfg)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .enumerate()
                    .map(|(k, &sd)| {
                        let g = graph.detached();
                        s.spawn(move || run_trial(&g, offset + k, sd, alpha, stats.w_max, cfg))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("trial thread panicked"))
                    .collect()
            })
        };
        for t in results {
            trial_passes += t.passes;
            report.peak_words = report.peak_words.max(t.peak_words);
            report.analytic_passes = match (report.analytic_passes, t.analytic_passes) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            let better = (t.matching.weight, t.matching.b_weight)
                > (report.matching.weight, report.matching.b_weight);
            let certified = t.status == TrialStatus::Certified;
            if certified || better {
                report.matching = t.matching.clone();
            }
            report.trials.push(t);
            if certified {
                report.certified = true;
                break 'outer;
            }
        }
    }
    report.passes = if batch == 1 {
        graph.passes() - start
    } else {
        1 + trial_passes
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight(list: &[(u32, u32, u64, i128)]) -> Vec<TightEdge> {
        list.iter()
            .enumerate()
            .map(|(k, &(u, v, w, b))| TightEdge {
                edge: EdgeRecord {
                    id: k as u64,
                    u,
                    v,
                    w,
                },
                demand: b,
            })
            .collect()
    }

    #[test]
    fn restricted_disjoint_and_conflicting() {
        let m = restricted_matching(2, 4, &tight(&[(0, 0, 5, 5), (1, 1, 7, 7)]));
        assert_eq!(m.weight, 12);
        let m = restricted_matching(2, 4, &tight(&[(0, 0, 5, 5), (0, 1, 7, 7)]));
        assert_eq!(m.weight, 7);
        assert_eq!(m.edges.len(), 1);
    }

    #[test]
    fn augmenting_through_matched_edge() {
        // greedy would take the 3-edge; the optimum is 2 + 2
        let m = restricted_matching(2, 4, &tight(&[(0, 0, 3, 3), (0, 1, 2, 2), (1, 0, 2, 2)]));
        assert_eq!(m.weight, 4);
    }

    #[test]
    fn alpha_bound() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 1), (1, 1, 1)]).unwrap();
        let a = PerturbedDemands::min_alpha(&g).unwrap();
        let (ground, zb, ze) = iso_params(&g);
        let b = IsolationOracle::weight_bound(ground, zb, ze).unwrap();
        let lhs = num_traits::pow(BigUint::from(4u32), a as usize);
        assert!(lhs > BigUint::from(4u32) * &b);
        assert!(num_traits::pow(BigUint::from(4u32), a as usize - 1) <= BigUint::from(4u32) * b);
        let err = PerturbedDemands::new(&g, 1, Some(a - 1), 1).unwrap_err();
        assert!(err.to_string().contains(&format!("alpha = {a}")));
    }

    #[test]
    fn zero_weights_give_isolation_values() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 0), (1, 1, 0)]).unwrap();
        let d = PerturbedDemands::new(&g, 5, None, 0).unwrap();
        g.for_each_edge(|e| {
            assert_eq!(
                d.demand(e).unwrap(),
                d.oracle().query(e.id + 1).unwrap() as i128
            );
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn empty_graph() {
        let g = GraphStream::from_edges(2, 2, &[]).unwrap();
        let r = max_weight_matching(&g, 1, &MatchingConfig::default()).unwrap();
        assert!(r.certified);
        assert_eq!(r.matching.weight, 0);
        assert_eq!(r.passes, 1);
        let cert = verify_optimality(
            &g,
            &crate::lp::UnitDemands,
            &Matching::default(),
            &vec![BigRational::zero(); 4],
        )
        .unwrap();
        assert!(cert.passed());
    }

    #[test]
    fn certificate_detects_gap() {
        // path a0 - b0 - a1 with unit demands: matching {} against cover y_b0 = 1
        let g = GraphStream::from_edges(2, 1, &[(0, 0, 1), (1, 0, 1)]).unwrap();
        let y: Vec<BigRational> = [0, 0, 1]
            .iter()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        let none =
            verify_optimality(&g, &crate::lp::UnitDemands, &Matching::default(), &y).unwrap();
        assert_eq!(none, Certificate::Fail { gap: 1.0 });
        let one = Matching::from_edges(vec![MatchedEdge {
            id: 0,
            u: 0,
            v: 0,
            w: 1,
            b: 1,
        }]);
        assert!(verify_optimality(&g, &crate::lp::UnitDemands, &one, &y)
            .unwrap()
            .passed());
        let y_bad: Vec<BigRational> = [0, 0, 0]
            .iter()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        assert!(matches!(
            verify_optimality(&g, &crate::lp::UnitDemands, &one, &y_bad).unwrap(),
            Certificate::InvalidInput { .. }
        ));
    }

    #[test]
    fn single_edge_fast() {
        let g = GraphStream::from_edges(1, 1, &[(0, 0, 9)]).unwrap();
        let cfg = MatchingConfig {
            mvc: MvcConfig::with_profile(crate::ipm::Profile::Fast),
            ..MatchingConfig::default()
        };
        let r = max_weight_matching(&g, 7, &cfg).unwrap();
        assert!(r.certified);
        assert_eq!(r.matching.weight, 9);
        assert_eq!(Some(r.passes), r.analytic_passes);
    }
}
