//! Short-step path following on `f_t(x) = t c^T x - sum_i ln s_i(x)`.
//!
//! Gradient and Hessian are only ever touched through passes over the rows:
//! an iteration costs one pass for the gradient, one for the diagonal part of
//! the Hessian, and `1 + T` inside the linear solver.

use crate::error::{Error, Result};
use crate::lp::{slack_stream, ConstraintRows, RowShape};
use crate::scalar::{dot, Precision, Real};
use crate::sdd::stream_ls::{self, stream_ls, StreamLsConfig};
use crate::sdd::SddmSource;

/// Cap on the centring steps appended to a damped run.
pub const MAX_CENTRING: usize = 50;

/// Decrement above which the fast profile keeps `t` fixed for another step.
pub const HOLD_DECREMENT: f64 = 0.5;

/// `t` step of the fast profile.
pub const FAST_EPS_T: f64 = 0.5;
/// Newton solve accuracy of the fast profile.
pub const FAST_EPS_X: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Step sizes from the short-step analysis.
    #[default]
    Rigorous,
    /// Long steps; results are certified after the fact.
    Fast,
}

impl Profile {
    pub fn params(self, eps_phi: f64, num_rows: usize) -> IpmParams {
        match self {
            Profile::Rigorous => IpmParams::rigorous(eps_phi, num_rows),
            Profile::Fast => IpmParams::fast(eps_phi, num_rows),
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Profile> {
        match s {
            "rigorous" => Ok(Profile::Rigorous),
            "fast" => Ok(Profile::Fast),
            _ => Err(Error::Parameter(format!("unknown profile `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IpmParams {
    /// Centrality the path follower maintains.
    pub eps_phi: f64,
    /// Multiplicative step of `t`.
    pub eps_t: f64,
    /// Relative accuracy of each Newton solve.
    pub eps_x: f64,
    /// Roll back and halve a step that lands outside the feasible region.
    /// Off for the rigorous schedule, where it cannot happen.
    pub step_halving: bool,
    /// Shorten steps with Newton decrement `lambda > 1/4` to `1/(1 + lambda)`
    /// of their length.
    pub damping: bool,
    /// Abort once some `|x_i|` exceeds `2^bound`.
    pub norm_bound_log2: Option<i64>,
    pub solver: StreamLsConfig,
}

impl IpmParams {
    /// Parameters tied to a centrality target: `eps_x = eps_phi / 100`,
    /// `eps_t = eps_phi / (4 sqrt(M))`. For `eps_phi = 1/100` this is
    /// `eps_x = 1e-4`, `eps_t = 1/(400 sqrt(M))`.
    pub fn rigorous(eps_phi: f64, num_rows: usize) -> IpmParams {
        IpmParams {
            eps_phi,
            eps_t: eps_phi / (4.0 * (num_rows.max(1) as f64).sqrt()),
            eps_x: eps_phi / 100.0,
            step_halving: false,
            damping: false,
            norm_bound_log2: None,
            solver: StreamLsConfig::default(),
        }
    }

    /// Long steps with damping and step halving. Not covered by the
    /// short-step analysis; correctness of the end result is checked
    /// separately by the callers.
    pub fn fast(eps_phi: f64, num_rows: usize) -> IpmParams {
        IpmParams {
            eps_t: FAST_EPS_T,
            eps_x: FAST_EPS_X,
            step_halving: true,
            damping: true,
            ..IpmParams::rigorous(eps_phi, num_rows)
        }
    }

    /// Left side of `16 (1 + eps_t) eps_phi^2 + 16 eps_x + sqrt(M) eps_t <= eps_phi`.
    pub fn assumption_lhs(&self, num_rows: usize) -> f64 {
        16.0 * (1.0 + self.eps_t) * self.eps_phi * self.eps_phi
            + 16.0 * self.eps_x
            + (num_rows as f64).sqrt() * self.eps_t
    }

    pub fn satisfies_assumption(&self, num_rows: usize) -> bool {
        self.assumption_lhs(num_rows) <= self.eps_phi
    }

    /// Passes one Newton step costs on an `n`-variable problem.
    pub fn passes_per_iteration(&self, n: usize) -> u64 {
        2 + stream_ls::pass_count(n, self.eps_x)
    }
}

/// `t c - sum_i a_i / s_i(x)` in one pass. Also reports the smallest slack
/// seen, as a base-2 exponent.
pub fn gradient_with_slack<T: Real>(
    rows: &dyn ConstraintRows,
    c: &[T],
    x: &[T],
    t: &T,
) -> Result<(Vec<T>, Option<i64>)> {
    let prec = t.precision();
    let mut g: Vec<T> = c.iter().map(|ci| ci.clone() * t).collect();
    let mut inv = T::zero(prec);
    let one = T::one(prec);
    let mut min_slack: Option<i64> = None;
    slack_stream(rows, x, &mut |row, s| {
        if let Some(e) = s.log2_magnitude() {
            min_slack = Some(min_slack.map_or(e, |m| m.min(e)));
        }
        inv.clone_from(&one);
        inv /= s;
        match row.shape {
            RowShape::Edge { pos, neg } => {
                g[pos] -= &inv;
                g[neg] += &inv;
            }
            RowShape::Single { var, positive } => {
                if positive {
                    g[var] -= &inv;
                } else {
                    g[var] += &inv;
                }
            }
        }
        Ok(())
    })?;
    Ok((g, min_slack))
}

/// `t c - sum_i a_i / s_i(x)` in one pass.
pub fn gradient<T: Real>(rows: &dyn ConstraintRows, c: &[T], x: &[T], t: &T) -> Result<Vec<T>> {
    Ok(gradient_with_slack(rows, c, x, t)?.0)
}

/// Barrier gradient `g(x) = -sum_i a_i / s_i(x)`.
pub fn barrier_gradient<T: Real>(rows: &dyn ConstraintRows, x: &[T]) -> Result<Vec<T>> {
    let prec = x
        .first()
        .map(|v| v.precision())
        .unwrap_or(Precision::DOUBLE);
    let zeros = vec![T::zero(prec); x.len()];
    gradient(rows, &zeros, x, &T::zero(prec))
}

/// `H(x) = sum_i a_i a_i^T / s_i(x)^2` as a Laplacian over edge rows plus a
/// stored diagonal from single-variable rows.
pub struct HessianSystem<'a, T> {
    rows: &'a dyn ConstraintRows,
    x: &'a [T],
    diag: Vec<T>,
    edge_rows: u64,
    prec: Precision,
}

/// Builds the Hessian view; the diagonal costs one pass.
pub fn hessian_view<'a, T: Real>(
    rows: &'a dyn ConstraintRows,
    x: &'a [T],
) -> Result<HessianSystem<'a, T>> {
    let prec = x
        .first()
        .map(|v| v.precision())
        .unwrap_or(Precision::DOUBLE);
    let mut diag = vec![T::zero(prec); x.len()];
    let mut w = T::zero(prec);
    let mut edge_rows = 0u64;
    slack_stream(rows, x, &mut |row, s| {
        match row.shape {
            RowShape::Single { var, .. } => {
                w.clone_from(s);
                w *= s;
                diag[var] += &w.recip();
            }
            RowShape::Edge { .. } => edge_rows += 1,
        }
        Ok(())
    })?;
    Ok(HessianSystem {
        rows,
        x,
        diag,
        edge_rows,
        prec,
    })
}

impl<T: Real> SddmSource<T> for HessianSystem<'_, T> {
    fn dim(&self) -> usize {
        self.x.len()
    }
    fn diagonal(&self) -> &[T] {
        &self.diag
    }
    fn edge_count_hint(&self) -> u64 {
        self.edge_rows
    }
    fn precision(&self) -> Precision {
        self.prec
    }
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, &T)) -> Result<()> {
        let mut w = T::zero(self.prec);
        let one = T::one(self.prec);
        slack_stream(self.rows, self.x, &mut |row, s| {
            if let RowShape::Edge { pos, neg } = row.shape {
                w.clone_from(&one);
                w /= s;
                w /= s;
                f(pos, neg, &w);
            }
            Ok(())
        })
    }
}

#[derive(Clone, Debug)]
pub struct NewtonStep<T> {
    pub delta: Vec<T>,
    /// `sqrt(-grad^T delta)`, an estimate of the Newton decrement.
    pub decrement: f64,
    pub passes: u64,
    pub min_slack_log2: Option<i64>,
}

/// Approximate Newton step `-H(x)^{-1} grad f_t(x)`.
pub fn newton_step<T: Real>(
    rows: &dyn ConstraintRows,
    c: &[T],
    x: &[T],
    t: &T,
    params: &IpmParams,
) -> Result<NewtonStep<T>> {
    let start = rows.passes();
    let (g, min_slack_log2) = gradient_with_slack(rows, c, x, t)?;
    let h = hessian_view(rows, x)?;
    let neg: Vec<T> = g.iter().map(|v| -v.clone()).collect();
    let sol = stream_ls(&h, &neg, params.eps_x, &params.solver, None)?;
    drop(rows.auditor().track(sol.peak_words as usize));
    let prec = t.precision();
    let dec = dot(&neg, &sol.x, prec).to_f64().max(0.0).sqrt();
    Ok(NewtonStep {
        delta: sol.x,
        decrement: dec,
        passes: rows.passes() - start,
        min_slack_log2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Decrease,
    Increase,
}

/// Progress record handed to a path-following observer after each step.
pub struct IterationInfo<'a, T> {
    /// 1-based iteration index.
    pub k: usize,
    /// Path parameter the step centred on.
    pub t: &'a T,
    /// The iterate after the step.
    pub x: &'a [T],
    pub decrement: f64,
    /// Pass counter of the rows after the step.
    pub passes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct Magnitudes {
    pub max_log2_x: i64,
    pub max_log2_t: i64,
    pub min_log2_t: i64,
    pub min_log2_slack: i64,
}

impl Magnitudes {
    fn new() -> Magnitudes {
        Magnitudes {
            max_log2_x: i64::MIN,
            max_log2_t: i64::MIN,
            min_log2_t: i64::MAX,
            min_log2_slack: i64::MAX,
        }
    }
    pub fn merge(&mut self, o: &Magnitudes) {
        self.max_log2_x = self.max_log2_x.max(o.max_log2_x);
        self.max_log2_t = self.max_log2_t.max(o.max_log2_t);
        self.min_log2_t = self.min_log2_t.min(o.min_log2_t);
        self.min_log2_slack = self.min_log2_slack.min(o.min_log2_slack);
    }
}

#[derive(Clone, Debug)]
pub struct PathResult<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Extra centring steps at `t_final` (damped runs only).
    pub centring: usize,
    pub passes: u64,
    pub direction: Direction,
    /// Steps that were halved after landing outside the feasible region.
    pub halvings: usize,
    pub magnitudes: Magnitudes,
}

/// Number of `t` updates between `t_start` and `t_final`.
pub fn schedule_updates(log_ratio: f64, eps_t: f64) -> usize {
    (log_ratio.abs() / eps_t.ln_1p()).ceil() as usize
}

/// Newton steps `path_follow` takes: one per `t` value visited, including
/// `t_start` and `t_final`.
pub fn schedule_len(log_ratio: f64, eps_t: f64) -> usize {
    if log_ratio == 0.0 {
        0
    } else {
        schedule_updates(log_ratio, eps_t) + 1
    }
}

/// Follows the central path from `(x_start, t_start)` to `t_final`.
///
/// Each iteration takes one Newton step at the current `t` and then moves
/// `t` by a factor `1 + eps_t` (up or down); the last move lands exactly on
/// `t_final` and is followed by one more centring step.
pub fn path_follow<T: Real>(
    rows: &dyn ConstraintRows,
    c: &[T],
    x_start: Vec<T>,
    t_start: &T,
    t_final: &T,
    params: &IpmParams,
    mut observer: Option<&mut dyn FnMut(&IterationInfo<T>)>,
) -> Result<PathResult<T>> {
    let prec = t_start.precision();
    let start = rows.passes();
    let log_ratio = (t_final.clone() / t_start).ln().to_f64();
    let direction = if log_ratio < 0.0 {
        Direction::Decrease
    } else {
        Direction::Increase
    };
    let mut mags = Magnitudes::new();
    let note_t = |m: &mut Magnitudes, t: &T| {
        if let Some(e) = t.log2_magnitude() {
            m.max_log2_t = m.max_log2_t.max(e);
            m.min_log2_t = m.min_log2_t.min(e);
        }
    };
    if log_ratio == 0.0 {
        return Ok(PathResult {
            x: x_start,
            iterations: 0,
            centring: 0,
            passes: 0,
            direction,
            halvings: 0,
            magnitudes: mags,
        });
    }
    let updates = schedule_updates(log_ratio, params.eps_t);
    let factor = T::from_f64(1.0 + params.eps_t, prec);
    let mut t = t_start.clone();
    let mut x = x_start;
    let mut halvings = 0;
    let mut prev: Option<(Vec<T>, Vec<T>, T)> = None;
    let half = T::from_f64(0.5, prec);
    let mut k = 0;
    // t updates done so far, and steps spent at the current t
    let mut u = 0;
    let mut held = 0;
    let mut last_decrement = 0.0;
    while u <= updates {
        note_t(&mut mags, &t);
        let step = match newton_step(rows, c, &x, &t, params) {
            Ok(s) => s,
            Err(Error::Infeasible { .. })
                if params.step_halving && prev.is_some() && halvings < 64 * (k + 1) =>
            {
                // The previous step overshot; retry it at half length.
                let (x_old, delta, _) = prev.as_mut().expect("checked");
                for d in delta.iter_mut() {
                    *d *= &half;
                }
                x = x_old
                    .iter()
                    .zip(delta.iter())
                    .map(|(a, b)| a.clone() + b)
                    .collect();
                halvings += 1;
                continue;
            }
            Err(e) => return Err(e.at_iteration(k)),
        };
        if let Some(e) = step.min_slack_log2 {
            mags.min_log2_slack = mags.min_log2_slack.min(e);
        }
        let x_old = x.clone();
        let mut step = step;
        if params.damping && step.decrement > 0.25 {
            let f = T::from_f64(1.0 / (1.0 + step.decrement), prec);
            for d in step.delta.iter_mut() {
                *d *= &f;
            }
        }
        for (xi, di) in x.iter_mut().zip(&step.delta) {
            *xi += di;
        }
        for xi in &x {
            if let Some(e) = xi.log2_magnitude() {
                mags.max_log2_x = mags.max_log2_x.max(e);
            }
        }
        if let Some(bound) = params.norm_bound_log2 {
            if mags.max_log2_x > bound {
                return Err(Error::Unbounded {
                    log2_bound: bound as u64,
                }
                .at_iteration(k));
            }
        }
        k += 1;
        last_decrement = step.decrement;
        if let Some(obs) = observer.as_mut() {
            obs(&IterationInfo {
                k,
                t: &t,
                x: &x,
                decrement: step.decrement,
                passes: rows.passes(),
            });
        }
        prev = Some((x_old, step.delta, t.clone()));
        // A damped step only shrinks the decrement by a bounded amount, so
        // long t steps would outrun it; recentre before moving on.
        if params.damping && step.decrement > HOLD_DECREMENT && held < MAX_CENTRING {
            held += 1;
            continue;
        }
        held = 0;
        u += 1;
        if u == updates {
            t = t_final.clone();
        } else if u < updates {
            match direction {
                Direction::Increase => t *= &factor,
                Direction::Decrease => t /= &factor,
            }
        }
    }
    // Damped steps can leave the last iterate off-centre; finish with full
    // centring steps at t_final.
    let mut centring = 0;
    while params.damping && last_decrement > params.eps_phi && centring < MAX_CENTRING {
        let step =
            newton_step(rows, c, &x, &t, params).map_err(|e| e.at_iteration(k + centring))?;
        let mut delta = step.delta;
        if step.decrement > 0.25 {
            let f = T::from_f64(1.0 / (1.0 + step.decrement), prec);
            for d in delta.iter_mut() {
                *d *= &f;
            }
        }
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        last_decrement = step.decrement;
        centring += 1;
    }
    Ok(PathResult {
        x,
        iterations: k,
        centring,
        passes: rows.passes() - start,
        direction,
        halvings,
        magnitudes: mags,
    })
}

/// `||grad f_t(x)||_{H(y)^{-1}}`, solved to relative accuracy `tol`.
/// Costs its own passes; meant for diagnostics.
pub fn potential_phi<T: Real>(
    rows: &dyn ConstraintRows,
    c: &[T],
    x: &[T],
    t: &T,
    y: &[T],
    tol: f64,
    solver: &StreamLsConfig,
) -> Result<T> {
    let g = gradient(rows, c, x, t)?;
    dual_norm(rows, &g, y, tol, solver)
}

/// `||g(x)||_{H(y)^{-1}}`
pub fn potential_psi<T: Real>(
    rows: &dyn ConstraintRows,
    x: &[T],
    y: &[T],
    tol: f64,
    solver: &StreamLsConfig,
) -> Result<T> {
    let g = barrier_gradient(rows, x)?;
    dual_norm(rows, &g, y, tol, solver)
}

fn dual_norm<T: Real>(
    rows: &dyn ConstraintRows,
    g: &[T],
    y: &[T],
    tol: f64,
    solver: &StreamLsConfig,
) -> Result<T> {
    let prec = y
        .first()
        .map(|v| v.precision())
        .unwrap_or(Precision::DOUBLE);
    let h = hessian_view(rows, y)?;
    let z = stream_ls(&h, g, tol, solver, None)?;
    Ok(dot(g, &z.x, prec).abs().sqrt())
}
