//! Streaming solver for SDDM systems `A = L_G + D` and the reductions that
//! extend it to SDD₀ and singular Laplacian systems.

use std::sync::Arc;

use crate::error::Result;
use crate::scalar::{Precision, Real};
use crate::stream::PassCounter;

pub mod mtx;
pub mod precond;
pub mod reduction;
pub mod sparsify;
pub mod stream_ls;

pub use precond::Preconditioner;
pub use reduction::{solve_sdd0, Sdd0Matrix, Sdd0Report};
pub use sparsify::{sparsify, SparseGraph, SparsifyConfig};
pub use stream_ls::{stream_ls, StreamLsConfig, StreamLsReport};

/// A system `L_G + D` whose Laplacian part is only reachable through passes.
pub trait SddmSource<T: Real> {
    fn dim(&self) -> usize;
    /// The stored diagonal `D`, entries `>= 0`.
    fn diagonal(&self) -> &[T];
    /// Upper bound on the number of edges a pass yields.
    fn edge_count_hint(&self) -> u64;
    fn precision(&self) -> Precision;
    /// One pass over the weighted edges `(u, v, w)` with `w > 0`.
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, &T)) -> Result<()>;
}

/// `out = A y`, one pass.
pub fn apply<T: Real>(sys: &dyn SddmSource<T>, y: &[T], out: &mut [T]) -> Result<()> {
    let d = sys.diagonal();
    for i in 0..y.len() {
        out[i].clone_from(&d[i]);
        out[i] *= &y[i];
    }
    let mut diff = T::zero(sys.precision());
    sys.for_each_edge(&mut |u, v, w| {
        diff.clone_from(&y[u]);
        diff -= &y[v];
        diff *= w;
        out[u] += &diff;
        out[v] -= &diff;
    })
}

/// SDDM system held in memory. Every `for_each_edge` call still counts as a
/// pass so that pass accounting can be checked on it.
#[derive(Clone, Debug)]
pub struct ExplicitSddm<T> {
    n: usize,
    diag: Vec<T>,
    edges: Vec<(usize, usize, T)>,
    prec: Precision,
    counter: Arc<PassCounter>,
}

impl<T: Real> ExplicitSddm<T> {
    /// Edge weights must be positive and the diagonal non-negative.
    pub fn new(diag: Vec<T>, edges: Vec<(usize, usize, T)>, prec: Precision) -> ExplicitSddm<T> {
        let n = diag.len();
        debug_assert!(edges
            .iter()
            .all(|(u, v, w)| *u < n && *v < n && u != v && w.is_positive()));
        ExplicitSddm {
            n,
            diag,
            edges,
            prec,
            counter: PassCounter::new(),
        }
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }
    pub fn passes(&self) -> u64 {
        self.counter.get()
    }
    pub fn counter(&self) -> &Arc<PassCounter> {
        &self.counter
    }

    /// Row-major dense copy as `f64`.
    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            a[i][i] = self.diag[i].to_f64();
        }
        for (u, v, w) in &self.edges {
            let w = w.to_f64();
            a[*u][*u] += w;
            a[*v][*v] += w;
            a[*u][*v] -= w;
            a[*v][*u] -= w;
        }
        a
    }
}

impl<T: Real> SddmSource<T> for ExplicitSddm<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn diagonal(&self) -> &[T] {
        &self.diag
    }
    fn edge_count_hint(&self) -> u64 {
        self.edges.len() as u64
    }
    fn precision(&self) -> Precision {
        self.prec
    }
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, &T)) -> Result<()> {
        self.counter.tick();
        for (u, v, w) in &self.edges {
            f(*u, *v, w);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_matches_dense() {
        let p = Precision::DOUBLE;
        let sys = ExplicitSddm::new(vec![1.0, 0.0, 2.0], vec![(0, 1, 3.0), (1, 2, 0.5)], p);
        let y = [1.0, -2.0, 4.0];
        let mut out = vec![0.0; 3];
        apply(&sys, &y, &mut out).unwrap();
        let dense = sys.to_dense_f64();
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| dense[i][j] * y[j]).sum();
            assert!((out[i] - want).abs() < 1e-12);
        }
        assert_eq!(sys.passes(), 1);
    }
}
