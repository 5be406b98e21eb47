//! Implicit constraint rows `a_i^T x >= b_i` read one pass at a time.
//!
//! Every row has at most two nonzeros: an edge row `x_pos - x_neg >= b` or
//! a single-variable row `+-x_var >= b`. That shape is what makes the barrier
//! Hessian a Laplacian plus a diagonal.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stream::{EdgeRecord, GraphStream, PassCounter, SpaceAuditor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowShape {
    /// `x_pos - x_neg`
    Edge { pos: usize, neg: usize },
    /// `x_var` or `-x_var`
    Single { var: usize, positive: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowId {
    Edge(u64),
    Vertex(usize),
    /// Box row keeping a vertex variable away from infinity.
    Bound(usize),
    Other(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Row {
    pub id: RowId,
    pub shape: RowShape,
    pub rhs: i128,
    /// The stream edge behind an edge row, when there is one.
    pub edge: Option<EdgeRecord>,
}

impl Row {
    /// `a^T x - b` written into `out`.
    pub fn slack_into<T: Real>(&self, x: &[T], out: &mut T) {
        match self.shape {
            RowShape::Edge { pos, neg } => {
                out.clone_from(&x[pos]);
                *out -= &x[neg];
            }
            RowShape::Single { var, positive } => {
                out.clone_from(&x[var]);
                if !positive {
                    *out = -out.clone();
                }
            }
        }
        if self.rhs != 0 {
            *out -= T::from_i128(self.rhs, out.precision());
        }
    }

    /// Exact `a^T x - b` on an integer point.
    pub fn slack_exact(&self, x: &[i128]) -> Option<i128> {
        let ax = match self.shape {
            RowShape::Edge { pos, neg } => x[pos].checked_sub(x[neg])?,
            RowShape::Single { var, positive } => {
                if positive {
                    x[var]
                } else {
                    x[var].checked_neg()?
                }
            }
        };
        ax.checked_sub(self.rhs)
    }
}

/// A constraint system whose rows can only be enumerated by passes.
pub trait ConstraintRows: Sync {
    fn num_vars(&self) -> usize;
    fn num_rows(&self) -> usize;
    /// One counted pass over all rows.
    fn for_each_row(&self, f: &mut dyn FnMut(&Row) -> Result<()>) -> Result<()>;
    fn passes(&self) -> u64;
    fn auditor(&self) -> &Arc<SpaceAuditor>;
}

/// Edge demands `b_i` for the cover rows.
pub trait DemandOracle: Sync {
    fn demand(&self, e: &EdgeRecord) -> Result<i128>;
}

impl<D: DemandOracle + ?Sized> DemandOracle for &D {
    fn demand(&self, e: &EdgeRecord) -> Result<i128> {
        (**self).demand(e)
    }
}

/// `b_i = 1`: ordinary vertex cover.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitDemands;

impl DemandOracle for UnitDemands {
    fn demand(&self, _: &EdgeRecord) -> Result<i128> {
        Ok(1)
    }
}

/// `b_i = w_i`
#[derive(Clone, Copy, Debug, Default)]
pub struct WeightDemands;

impl DemandOracle for WeightDemands {
    fn demand(&self, e: &EdgeRecord) -> Result<i128> {
        Ok(e.w as i128)
    }
}

/// Demands read from a file, keyed by 0-based `(u, v)`. Holds O(m) words, so
/// it sits outside the semi-streaming budget; it exists for the CLI.
#[derive(Clone, Debug, Default)]
pub struct TableDemands {
    by_edge: HashMap<(u32, u32), i128>,
}

impl TableDemands {
    /// Lines `<u> <v> <demand>` with 1-based vertex ids; `#` starts a comment.
    /// Edges not listed get demand 0.
    pub fn read(reader: impl BufRead) -> Result<TableDemands> {
        let mut by_edge = HashMap::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                line: k + 1,
                msg: "expected `<u> <v> <demand>`".into(),
            };
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let u: u32 = f[0].parse().map_err(|_| bad())?;
            let v: u32 = f[1].parse().map_err(|_| bad())?;
            let d: i128 = f[2].parse().map_err(|_| bad())?;
            if u == 0 || v == 0 {
                return Err(bad());
            }
            by_edge.insert((u - 1, v - 1), d);
        }
        Ok(TableDemands { by_edge })
    }

    pub fn len(&self) -> usize {
        self.by_edge.len()
    }
    pub fn is_empty(&self) -> bool {
        self.by_edge.is_empty()
    }
}

impl DemandOracle for TableDemands {
    fn demand(&self, e: &EdgeRecord) -> Result<i128> {
        Ok(self.by_edge.get(&(e.u, e.v)).copied().unwrap_or(0))
    }
}

/// The cover LP of a bipartite graph: `x_u - x_v >= b_e` for every edge,
/// `x_u >= 0` on the left, `-x_v >= 0` on the right. `M = m + n` rows, or
/// `m + 2n` with box rows `|x_v| <= 2^k`.
///
/// Rows come in pass order: edges in stream order, then the sign rows by
/// vertex, then the box rows by vertex.
pub struct CoverRows<'g, D> {
    graph: &'g GraphStream,
    demands: D,
    bound: Option<i128>,
}

impl<'g, D: DemandOracle> CoverRows<'g, D> {
    pub fn new(graph: &'g GraphStream, demands: D) -> CoverRows<'g, D> {
        CoverRows {
            graph,
            demands,
            bound: None,
        }
    }

    /// Adds `x_u <= 2^k` on the left and `x_v >= -2^k` on the right.
    pub fn with_box(mut self, k: u32) -> Result<CoverRows<'g, D>> {
        if k > 125 {
            return Err(Error::Parameter(format!("box 2^{k} does not fit 127 bits")));
        }
        self.bound = Some(1i128 << k);
        Ok(self)
    }

    pub fn bound(&self) -> Option<i128> {
        self.bound
    }
    pub fn graph(&self) -> &GraphStream {
        self.graph
    }
    pub fn demands(&self) -> &D {
        &self.demands
    }
}

impl<D: DemandOracle> ConstraintRows for CoverRows<'_, D> {
    fn num_vars(&self) -> usize {
        self.graph.n()
    }
    fn num_rows(&self) -> usize {
        let per_vertex = if self.bound.is_some() { 2 } else { 1 };
        self.graph.m() as usize + per_vertex * self.graph.n()
    }
    fn for_each_row(&self, f: &mut dyn FnMut(&Row) -> Result<()>) -> Result<()> {
        let nl = self.graph.n_left() as usize;
        self.graph.for_each_edge(|e| {
            f(&Row {
                id: RowId::Edge(e.id),
                shape: RowShape::Edge {
                    pos: e.u as usize,
                    neg: nl + e.v as usize,
                },
                rhs: self.demands.demand(e)?,
                edge: Some(*e),
            })
        })?;
        for var in 0..self.graph.n() {
            f(&Row {
                id: RowId::Vertex(var),
                shape: RowShape::Single {
                    var,
                    positive: var < nl,
                },
                rhs: 0,
                edge: None,
            })?;
        }
        if let Some(bound) = self.bound {
            for var in 0..self.graph.n() {
                f(&Row {
                    id: RowId::Bound(var),
                    shape: RowShape::Single {
                        var,
                        positive: var >= nl,
                    },
                    rhs: -bound,
                    edge: None,
                })?;
            }
        }
        Ok(())
    }
    fn passes(&self) -> u64 {
        self.graph.passes()
    }
    fn auditor(&self) -> &Arc<SpaceAuditor> {
        self.graph.auditor()
    }
}

/// Rows held in memory, for small hand-built LPs. Passes are still counted.
#[derive(Clone, Debug)]
pub struct ExplicitRows {
    n: usize,
    rows: Vec<Row>,
    counter: Arc<PassCounter>,
    auditor: Arc<SpaceAuditor>,
}

impl ExplicitRows {
    pub fn new(n: usize, rows: Vec<(RowShape, i128)>) -> Result<ExplicitRows> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, (shape, rhs))| {
                let ok = match shape {
                    RowShape::Edge { pos, neg } => pos < n && neg < n && pos != neg,
                    RowShape::Single { var, .. } => var < n,
                };
                if ok {
                    Ok(Row {
                        id: RowId::Other(i),
                        shape,
                        rhs,
                        edge: None,
                    })
                } else {
                    Err(Error::Parameter(format!(
                        "row {i} references a missing variable"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Ok(ExplicitRows {
            n,
            rows,
            counter: PassCounter::new(),
            auditor: SpaceAuditor::new(),
        })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }
}

impl ConstraintRows for ExplicitRows {
    fn num_vars(&self) -> usize {
        self.n
    }
    fn num_rows(&self) -> usize {
        self.rows.len()
    }
    fn for_each_row(&self, f: &mut dyn FnMut(&Row) -> Result<()>) -> Result<()> {
        self.counter.tick();
        for r in &self.rows {
            f(r)?;
        }
        Ok(())
    }
    fn passes(&self) -> u64 {
        self.counter.get()
    }
    fn auditor(&self) -> &Arc<SpaceAuditor> {
        &self.auditor
    }
}

/// One pass computing every slack at `x`. Fails on the first row whose slack
/// is not strictly positive, before handing it to `f`.
pub fn slack_stream<T: Real>(
    rows: &dyn ConstraintRows,
    x: &[T],
    f: &mut dyn FnMut(&Row, &T) -> Result<()>,
) -> Result<()> {
    let mut s = x
        .first()
        .map(|v| T::zero(v.precision()))
        .unwrap_or_else(|| T::zero(crate::scalar::Precision::DOUBLE));
    let mut k = 0usize;
    rows.for_each_row(&mut |row| {
        row.slack_into(x, &mut s);
        if !s.is_positive() {
            return Err(Error::Infeasible {
                row: k,
                slack: s.to_f64(),
            });
        }
        k += 1;
        f(row, &s)
    })
}

/// Bit complexity `L = ceil(log2 M + log2(1 + d_max) + log2(1 + max(|c|, |b|)))`
/// with `d_max = 1` for rows with entries in `{-1, 0, 1}`.
pub fn bit_complexity(num_rows: usize, max_abs_entry: u128) -> u32 {
    let lm = (num_rows.max(1) as f64).log2();
    let lv = ((max_abs_entry as f64) + 1.0).log2();
    (lm + 1.0 + lv).ceil() as u32
}
