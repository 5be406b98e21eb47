//! Generalized minimum vertex cover on a bipartite graph:
//!
//! ```text
//! min c^T x   s.t.  x_u - x_v >= b_e  (e = (u, v)),  x_L >= 0,  x_R <= 0
//! ```
//!
//! Substituting `y_v = -x_v` on the right side gives the usual cover LP
//! `y_u + y_v >= b_e, y >= 0`. The solver walks the central path down from
//! a point where it is exactly centred, switches to a randomly perturbed
//! objective whose optimum is unique and integral, walks up until the
//! iterate is within `1/n` of it, and rounds.

use num_bigint::{BigInt, RandBigInt};
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ipm::{
    self, barrier_gradient, path_follow, IpmParams, IterationInfo, Magnitudes, Profile,
};
use crate::lp::{bit_complexity, ConstraintRows, CoverRows, DemandOracle, RowId};
use crate::scalar::{BigReal, Precision, Real};
use crate::sdd::StreamLsConfig;
use crate::stream::{EdgeRecord, GraphStream};

/// Centrality target of the second phase; the first runs at a quarter of it.
pub const EPS_PHI: f64 = 0.01;

const IPM_VECTORS: usize = 5;

/// Solver settings shared by the cover and matching drivers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MvcConfig {
    pub profile: Profile,
    pub eps_phi: f64,
    /// Working precision; `8L + 64` bits when unset.
    pub precision: Option<Precision>,
    pub solver: StreamLsConfig,
}

impl Default for MvcConfig {
    fn default() -> Self {
        MvcConfig {
            profile: Profile::Rigorous,
            eps_phi: EPS_PHI,
            precision: None,
            solver: StreamLsConfig::default(),
        }
    }
}

impl MvcConfig {
    pub fn with_profile(profile: Profile) -> MvcConfig {
        MvcConfig {
            profile,
            ..MvcConfig::default()
        }
    }

    fn params(&self, eps_phi: f64, num_rows: usize, l: u32) -> IpmParams {
        let mut p = self.profile.params(eps_phi, num_rows);
        p.solver = self.solver;
        p.norm_bound_log2 = Some(norm_bound_log2(l));
        p
    }
}

/// Iterate-norm ceiling used to report an unbounded LP. The box rows keep
/// iterates far below it; it guards against numerical blow-up.
pub fn norm_bound_log2(l: u32) -> i64 {
    4 * l as i64 + 16
}

/// One row of the iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub phase: u8,
    pub iteration: usize,
    pub log2_t: f64,
    pub decrement: f64,
    pub passes: u64,
}

pub type TraceSink<'a> = Option<&'a mut dyn FnMut(&TraceRow)>;

/// `c_3 = 2^{2L+3} n c + r` with `r_i` uniform in `[-2^{L+1} n, 2^{L+1} n]`.
pub fn perturb_objective(c: &[i128], l: u32, n: usize, seed: u64) -> Vec<BigInt> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = (BigInt::one() << (2 * l + 3)) * BigInt::from(n);
    let r_max = (BigInt::one() << (l + 1)) * BigInt::from(n);
    let lo = -r_max.clone();
    let hi = r_max + 1;
    c.iter()
        .map(|&ci| &scale * BigInt::from(ci) + rng.gen_bigint_range(&lo, &hi))
        .collect()
}

/// A tight edge row of the rounded point, with its demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TightEdge {
    pub edge: EdgeRecord,
    pub demand: i128,
}

/// Rows tight at an integral point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TightSet {
    /// The rounded point, in the `x` (signed) form.
    pub x: Vec<i128>,
    /// Pass-order indices of all tight rows.
    pub indices: Vec<usize>,
    /// The tight edge rows.
    pub edges: Vec<TightEdge>,
    pub edge_rows: u64,
    /// Edge rows with non-zero slack.
    pub slack_edge_rows: u64,
    /// Rows of any kind with non-zero slack.
    pub slack_rows: u64,
}

impl TightSet {
    /// The point with `y_v = -x_v` on the right side.
    pub fn y(&self, n_left: usize) -> Vec<i128> {
        to_y_form(&self.x, n_left)
    }
}

pub fn to_y_form(x: &[i128], n_left: usize) -> Vec<i128> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i < n_left { v } else { -v })
        .collect()
}

/// Rounds `x` coordinatewise and collects the rows tight at the rounded
/// point using exact integers, in one pass. Tight edge rows are held in
/// memory.
pub fn extract_tight<T: Real>(rows: &dyn ConstraintRows, x: &[T]) -> Result<TightSet> {
    let third = 1.0 / 3.0;
    let mut xs = Vec::with_capacity(x.len());
    for (coord, xi) in x.iter().enumerate() {
        let r = xi.round_to_bigint().ok_or(Error::ExtractionAmbiguity {
            coord,
            value: xi.to_f64(),
        })?;
        let prec = xi.precision();
        let dist = (xi.clone() - T::from_bigint(&r, prec)).abs().to_f64();
        if dist >= third {
            return Err(Error::ExtractionAmbiguity {
                coord,
                value: xi.to_f64(),
            });
        }
        xs.push(r.to_i128().ok_or_else(|| {
            Error::Parameter(format!("coordinate {coord} does not fit 127 bits"))
        })?);
    }
    let mut out = TightSet {
        x: xs,
        indices: Vec::new(),
        edges: Vec::new(),
        edge_rows: 0,
        slack_edge_rows: 0,
        slack_rows: 0,
    };
    let mut k = 0usize;
    rows.for_each_row(&mut |row| {
        let s = row
            .slack_exact(&out.x)
            .ok_or_else(|| Error::Parameter("slack overflows 127 bits".into()))?;
        if s < 0 {
            return Err(Error::RoundedInfeasible { row: k });
        }
        let is_edge = matches!(row.id, RowId::Edge(_)) || row.edge.is_some();
        if is_edge {
            out.edge_rows += 1;
        }
        if s == 0 {
            out.indices.push(k);
            if let Some(edge) = row.edge {
                out.edges.push(TightEdge {
                    edge,
                    demand: row.rhs,
                });
            }
        } else {
            out.slack_rows += 1;
            if is_edge {
                out.slack_edge_rows += 1;
            }
        }
        k += 1;
        Ok(())
    })?;
    Ok(out)
}

/// Outcome of the two-phase solve.
#[derive(Clone, Debug, Serialize)]
pub struct TightSetReport {
    pub tight: TightSet,
    pub bit_complexity: u32,
    pub precision_bits: u32,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub centring_steps: usize,
    /// Passes consumed, as counted by the stream.
    pub passes: u64,
    /// Passes predicted from the iteration schedule.
    pub analytic_passes: u64,
    pub halvings: usize,
    pub magnitudes: Magnitudes,
    /// `max log2 |scalar| / L` over the run.
    pub magnitude_ratio: f64,
}

struct Setup<T> {
    l: u32,
    prec: Precision,
    x_init: Vec<T>,
    m_rows: usize,
}

/// The setup pass (max `|b|`, then `L`) followed by the boxed row system.
/// `L` is taken over all `m + 2n` rows; every vertex of the unboxed LP has
/// `|x_v| < 2^{L-1}`, so the box `|x_v| <= 2^{L+1}` cuts none of them off,
/// and all slacks stay below `2^{L+3}`.
fn setup<'g, T: Real, D: DemandOracle>(
    graph: &'g GraphStream,
    demands: D,
    c: &[i128],
    cfg: &MvcConfig,
) -> Result<(CoverRows<'g, D>, Setup<T>)> {
    let n = graph.n();
    if c.len() != n {
        return Err(Error::Parameter(format!(
            "objective has length {}, expected {n}",
            c.len()
        )));
    }
    let plain = CoverRows::new(graph, demands);
    let mut max_abs: u128 = c.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    plain.for_each_row(&mut |row| {
        max_abs = max_abs.max(row.rhs.unsigned_abs());
        Ok(())
    })?;
    let m_rows = graph.m() as usize + 2 * n;
    let l = bit_complexity(m_rows, max_abs);
    let rows = plain.with_box(l + 1)?;
    let prec = cfg.precision.unwrap_or(Precision::for_bit_complexity(l));
    let nl = graph.n_left() as usize;
    let big = T::pow2(l as i64, prec);
    let x_init = (0..n)
        .map(|i| if i < nl { big.clone() } else { -big.clone() })
        .collect();
    Ok((
        rows,
        Setup {
            l,
            prec,
            x_init,
            m_rows,
        },
    ))
}

fn t1_value(cfg: &MvcConfig, m_rows: usize, l: u32, prec: Precision) -> BigReal {
    BigReal::from_f64(cfg.eps_phi, prec)
        / BigReal::from_i128(m_rows as i128, prec)
        / BigReal::pow2(4 * l as i64 + 10, prec)
}

fn trace_adapter<'s, T: Real>(
    phase: u8,
    sink: &'s mut TraceSink<'_>,
) -> Option<Box<dyn FnMut(&IterationInfo<T>) + 's>> {
    let sink = sink.as_mut()?;
    Some(Box::new(move |info: &IterationInfo<T>| {
        let lt = info.t.ln().to_f64() / std::f64::consts::LN_2;
        sink(&TraceRow {
            phase,
            iteration: info.k,
            log2_t: lt,
            decrement: info.decrement,
            passes: info.passes,
        })
    }))
}

/// Both phases of the path following on the boxed cover LP of `graph` with
/// objective `c`, ending at a point whose rounding is returned.
pub fn mvc_tight_set<D: DemandOracle>(
    graph: &GraphStream,
    demands: D,
    c: &[i128],
    seed: u64,
    cfg: &MvcConfig,
    mut trace: TraceSink<'_>,
) -> Result<TightSetReport> {
    let start = graph.passes();
    let (
        rows,
        Setup {
            l,
            prec,
            x_init,
            m_rows,
        },
    ) = setup::<BigReal, D>(graph, demands, c, cfg)?;
    let rows = &rows;
    let n = rows.num_vars();
    let one = BigReal::one(prec);
    // x, the previous x, gradient, step and Hessian diagonal
    let _space = graph.auditor().track(IPM_VECTORS * n * prec.words());

    // c_init = -g(x_init) makes x_init the exact centre at t = 1.
    let c_init: Vec<BigReal> = barrier_gradient(rows, &x_init)?
        .into_iter()
        .map(|g| -g)
        .collect();
    let eps1 = cfg.eps_phi / 4.0;
    let p1 = cfg.params(eps1, m_rows, l);
    let t1 = t1_value(cfg, m_rows, l, prec);
    let mut obs1 = trace_adapter::<BigReal>(1, &mut trace);
    let r1 = path_follow(
        rows,
        &c_init,
        x_init,
        &one,
        &t1,
        &p1,
        obs1.as_mut()
            .map(|b| b.as_mut() as &mut dyn FnMut(&IterationInfo<BigReal>)),
    )?;
    drop(obs1);

    let c3: Vec<BigReal> = perturb_objective(c, l, n, seed)
        .iter()
        .map(|v| BigReal::from_bigint(v, prec))
        .collect();
    let p2 = cfg.params(cfg.eps_phi, m_rows, l);
    let t2 =
        BigReal::from_i128((n * m_rows) as i128, prec) * BigReal::pow2(3 * l as i64 + 10, prec);
    let mut obs2 = trace_adapter::<BigReal>(2, &mut trace);
    let r2 = path_follow(
        rows,
        &c3,
        r1.x,
        &t1,
        &t2,
        &p2,
        obs2.as_mut()
            .map(|b| b.as_mut() as &mut dyn FnMut(&IterationInfo<BigReal>)),
    )?;
    drop(obs2);

    let tight = extract_tight(rows, &r2.x)?;
    // The box only binds when the unboxed LP has no optimum.
    let bound = rows.bound().expect("boxed rows");
    if tight.x.iter().any(|v| v.abs() >= bound) {
        return Err(Error::Unbounded {
            log2_bound: l as u64 + 1,
        });
    }
    let analytic = analytic_passes(
        n,
        r1.iterations + r1.centring,
        r2.iterations + r2.centring,
        &p1,
        &p2,
    ) + (r1.halvings + r2.halvings) as u64;
    let mut mags = r1.magnitudes.clone();
    mags.merge(&r2.magnitudes);
    let worst = [
        mags.max_log2_x,
        mags.max_log2_t,
        -mags.min_log2_t,
        -mags.min_log2_slack,
    ]
    .into_iter()
    .filter(|v| v.abs() < i64::MAX / 2)
    .max()
    .unwrap_or(0);
    Ok(TightSetReport {
        tight,
        bit_complexity: l,
        precision_bits: prec.0,
        phase1_iters: r1.iterations,
        phase2_iters: r2.iterations,
        centring_steps: r1.centring + r2.centring,
        passes: graph.passes() - start,
        analytic_passes: analytic,
        halvings: r1.halvings + r2.halvings,
        magnitudes: mags,
        magnitude_ratio: worst as f64 / l.max(1) as f64,
    })
}

/// Passes of `mvc_tight_set` without halvings: setup, initial gradient,
/// the two phases and the extraction pass.
pub fn analytic_passes(n: usize, k1: usize, k2: usize, p1: &IpmParams, p2: &IpmParams) -> u64 {
    1 + 1 + k1 as u64 * p1.passes_per_iteration(n) + k2 as u64 * p2.passes_per_iteration(n) + 1
}

/// `c = 1_L - 1_R`, the objective of the plain cover.
pub fn cover_objective(graph: &GraphStream) -> Vec<i128> {
    let nl = graph.n_left() as usize;
    (0..graph.n())
        .map(|i| if i < nl { 1 } else { -1 })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FractionalCover {
    /// Non-negative cover values `y` in vertex order (left then right).
    pub y: Vec<f64>,
    pub value: f64,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub passes: u64,
}

/// A feasible fractional cover `y` with `c^T y <= OPT + gap`.
pub fn solve_fractional_mvc<D: DemandOracle>(
    graph: &GraphStream,
    demands: D,
    gap: f64,
    cfg: &MvcConfig,
) -> Result<FractionalCover> {
    if gap <= 0.0 || !gap.is_finite() {
        return Err(Error::Parameter(format!("gap must be positive, got {gap}")));
    }
    let start = graph.passes();
    let c = cover_objective(graph);
    let (
        rows,
        Setup {
            l,
            prec,
            x_init,
            m_rows,
        },
    ) = setup::<BigReal, D>(graph, demands, &c, cfg)?;
    let one = BigReal::one(prec);
    let c_init: Vec<BigReal> = barrier_gradient(&rows, &x_init)?
        .into_iter()
        .map(|g| -g)
        .collect();
    let p1 = cfg.params(cfg.eps_phi / 4.0, m_rows, l);
    let t1 = t1_value(cfg, m_rows, l, prec);
    let r1 = path_follow(&rows, &c_init, x_init, &one, &t1, &p1, None)?;
    let cb: Vec<BigReal> = c.iter().map(|&v| BigReal::from_i128(v, prec)).collect();
    let p2 = cfg.params(cfg.eps_phi, m_rows, l);
    let t_final = BigReal::from_f64(m_rows as f64 * (1.0 + 2.0 * cfg.eps_phi) / gap, prec);
    let r2 = path_follow(&rows, &cb, r1.x, &t1, &t_final, &p2, None)?;
    let nl = graph.n_left() as usize;
    let y: Vec<f64> =
        r2.x.iter()
            .enumerate()
            .map(|(i, v)| if i < nl { v.to_f64() } else { -v.to_f64() })
            .collect();
    let value = dot_i(&c, &r2.x).to_f64();
    Ok(FractionalCover {
        y,
        value,
        phase1_iters: r1.iterations,
        phase2_iters: r2.iterations,
        passes: graph.passes() - start,
    })
}

fn dot_i(c: &[i128], x: &[BigReal]) -> BigReal {
    let prec = x
        .first()
        .map(|v| v.precision())
        .unwrap_or(Precision::DOUBLE);
    let mut s = BigReal::zero(prec);
    for (ci, xi) in c.iter().zip(x) {
        s += BigReal::from_i128(*ci, prec) * xi;
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralCover {
    /// Cover vertices, 0-based in vertex order (left then right).
    pub cover: Vec<usize>,
    /// Integral cover values `y`, same order.
    pub y: Vec<i128>,
    /// `sum y`; the number of cover vertices under unit demands.
    pub size: i128,
    /// Demand weight of a matching on tight edges; equal to `size`
    /// certifies optimality.
    pub certificate_matching: i128,
    pub certified: bool,
    pub seed: u64,
    pub attempts: usize,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub passes: u64,
}

/// Minimum integral cover `y >= 0`, `y_u + y_v >= b_e`, of a bipartite
/// graph (a minimum vertex cover under unit demands). Retries with fresh
/// perturbations until the cover is certified by a matching on its tight
/// edges of equal demand weight, up to `max_attempts` times.
pub fn solve_integral_mvc<D: DemandOracle>(
    graph: &GraphStream,
    demands: D,
    seed: u64,
    max_attempts: usize,
    cfg: &MvcConfig,
    mut trace: Option<&mut dyn FnMut(usize, &TraceRow)>,
) -> Result<IntegralCover> {
    let c = cover_objective(graph);
    let nl = graph.n_left() as usize;
    let start = graph.passes();
    let mut last_err = None;
    let mut best: Option<IntegralCover> = None;
    for attempt in 0..max_attempts.max(1) {
        let s = seed.wrapping_add(attempt as u64);
        let mut sink = trace
            .as_deref_mut()
            .map(|f| move |r: &TraceRow| f(attempt, r));
        let sink = sink.as_mut().map(|f| f as &mut dyn FnMut(&TraceRow));
        let rep = match mvc_tight_set(graph, &demands, &c, s, cfg, sink) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let y = rep.tight.y(nl);
        let cover: Vec<usize> = (0..y.len()).filter(|&i| y[i] != 0).collect();
        // Weak duality: any matching weighs at most sum y, so a matching on
        // tight edges of that weight proves both optimal.
        let tight: Vec<(u64, usize, usize, i128)> = rep
            .tight
            .edges
            .iter()
            .map(|t| {
                (
                    t.edge.id,
                    t.edge.u as usize,
                    nl + t.edge.v as usize,
                    t.demand,
                )
            })
            .collect();
        let m = crate::matching::max_weight_on_edges(graph.n(), &tight);
        let weight: i128 = m.iter().map(|&k| tight[k].3).sum();
        let size: i128 = y.iter().sum();
        let out = IntegralCover {
            certified: weight == size && y.iter().all(|v| *v >= 0),
            cover,
            y,
            size,
            certificate_matching: weight,
            seed: s,
            attempts: attempt + 1,
            phase1_iters: rep.phase1_iters,
            phase2_iters: rep.phase2_iters,
            passes: graph.passes() - start,
        };
        if out.certified {
            return Ok(out);
        }
        if best.as_ref().is_none_or(|b| out.size < b.size) {
            best = Some(out);
        }
    }
    match best {
        Some(mut b) => {
            b.passes = graph.passes() - start;
            b.attempts = max_attempts.max(1);
            Ok(b)
        }
        None => {
            Err(last_err.unwrap_or_else(|| Error::NoSolution("no attempt produced a cover".into())))
        }
    }
}

/// Path-following pass formula for one `mvc_tight_set` call, from the
/// schedule alone. Matches `TightSetReport::analytic_passes` when no step
/// was halved.
pub fn predicted_passes(n: usize, m_rows: usize, l: u32, cfg: &MvcConfig) -> u64 {
    let p1 = cfg.params(cfg.eps_phi / 4.0, m_rows, l);
    let p2 = cfg.params(cfg.eps_phi, m_rows, l);
    let ln2 = std::f64::consts::LN_2;
    let ln_t1 = cfg.eps_phi.ln() - (m_rows as f64).ln() - (4 * l + 10) as f64 * ln2;
    let ln_t2 = ((n * m_rows) as f64).ln() + (3 * l + 10) as f64 * ln2;
    let k1 = ipm::schedule_len(ln_t1, p1.eps_t);
    let k2 = ipm::schedule_len(ln_t2 - ln_t1, p2.eps_t);
    analytic_passes(n, k1, k2, &p1, &p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::UnitDemands;

    #[test]
    fn perturbation_range() {
        let c = [1i128, -1, 0, 2];
        for seed in 0..50 {
            let c3 = perturb_objective(&c, 5, 4, seed);
            let scale = BigInt::from(1u64 << 13) * BigInt::from(4);
            let rmax = BigInt::from(1u64 << 6) * BigInt::from(4);
            for (ci, v) in c.iter().zip(&c3) {
                let r = v - &scale * BigInt::from(*ci);
                assert!(r <= rmax && r >= -rmax.clone());
            }
        }
        assert_eq!(
            perturb_objective(&c, 5, 4, 9),
            perturb_objective(&c, 5, 4, 9)
        );
    }

    #[test]
    fn rounding_and_tight_rows() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 1), (1, 1, 1), (0, 1, 1)]).unwrap();
        let rows = CoverRows::new(&g, UnitDemands);
        // y = (1, 1, 0, 0): every edge tight, right vertex rows tight
        let x = [1.1, 0.95, -0.01, 0.2];
        let t = extract_tight(&rows, &x).unwrap();
        assert_eq!(t.x, vec![1, 1, 0, 0]);
        assert_eq!(t.indices, vec![0, 1, 2, 5, 6]);
        assert_eq!(t.edges.len(), 3);
        assert_eq!(t.slack_edge_rows, 0);
        assert_eq!(t.slack_rows, 2);
        // idempotent on the integral point
        let xi: Vec<f64> = t.x.iter().map(|v| *v as f64).collect();
        assert_eq!(extract_tight(&rows, &xi).unwrap(), t);
    }

    #[test]
    fn rounding_ambiguity() {
        let g = GraphStream::from_edges(1, 1, &[(0, 0, 1)]).unwrap();
        let rows = CoverRows::new(&g, UnitDemands);
        let err = extract_tight(&rows, &[0.5, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ExtractionAmbiguity { coord: 0, .. }));
        let err = extract_tight(&rows, &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::RoundedInfeasible { row: 0 }));
    }

    #[test]
    fn single_edge_cover_fast() {
        let g = GraphStream::from_edges(1, 1, &[(0, 0, 1)]).unwrap();
        let r = solve_integral_mvc(
            &g,
            UnitDemands,
            1,
            3,
            &MvcConfig::with_profile(Profile::Fast),
            None,
        )
        .unwrap();
        assert_eq!(r.size, 1);
        assert!(r.certified);
    }

    #[test]
    fn weighted_demands_cover() {
        // path u1-v1-u2 with demands 3 and 2: y(v1) = 3 covers both
        let g = GraphStream::from_edges(2, 1, &[(0, 0, 3), (1, 0, 2)]).unwrap();
        let r = solve_integral_mvc(
            &g,
            crate::lp::WeightDemands,
            5,
            3,
            &MvcConfig::with_profile(Profile::Fast),
            None,
        )
        .unwrap();
        assert!(r.certified);
        assert_eq!(r.size, 3);
        assert_eq!(r.y, vec![0, 0, 3]);
    }

    #[test]
    fn star_fractional() {
        let g =
            GraphStream::from_edges(1, 4, &[(0, 0, 1), (0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        let f = solve_fractional_mvc(
            &g,
            UnitDemands,
            1e-3,
            &MvcConfig::with_profile(Profile::Fast),
        )
        .unwrap();
        assert!(
            f.value >= 1.0 - 1e-9 && f.value <= 1.0 + 1e-3,
            "{}",
            f.value
        );
    }

    #[test]
    fn prediction_matches_run() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 1), (1, 1, 1), (0, 1, 1)]).unwrap();
        let cfg = MvcConfig::with_profile(Profile::Fast);
        let rep = mvc_tight_set(&g, UnitDemands, &cover_objective(&g), 3, &cfg, None).unwrap();
        assert_eq!(rep.passes, rep.analytic_passes);
        if rep.halvings == 0 && rep.centring_steps == 0 {
            assert_eq!(
                rep.passes,
                predicted_passes(4, 11, rep.bit_complexity, &cfg)
            );
        }
    }
}
