//! In-memory solver for the preconditioner `P = L_H + D`.
//!
//! Small systems are factored by Gaussian elimination written in graph form:
//! eliminating a vertex adds fill edges between its neighbours and passes a
//! share of its excess diagonal on to them. Every update is a sum of
//! positive terms, so the factorization loses no accuracy to cancellation.
//! Large systems fall back to Jacobi-preconditioned conjugate gradients.

use std::collections::BTreeMap;

use super::sparsify::SparseGraph;
use crate::error::{Error, Result};
use crate::scalar::{dot, Precision, Real};

/// Above this size the preconditioner is solved iteratively.
pub const DIRECT_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
struct Eliminated<T> {
    vertex: usize,
    pivot: T,
    /// Neighbours still present when `vertex` was eliminated.
    nbrs: Vec<(usize, T)>,
}

#[derive(Clone, Debug)]
enum Backend<T> {
    Direct(Vec<Eliminated<T>>),
    Cg {
        diag: Vec<T>,
        edges: Vec<(usize, usize, T)>,
    },
}

#[derive(Clone, Debug)]
pub struct Preconditioner<T> {
    n: usize,
    prec: Precision,
    backend: Backend<T>,
    /// Nonzeros held, for space accounting.
    stored: usize,
}

impl<T: Real> Preconditioner<T> {
    /// Factors `L_H + D`. Fails when some connected component of `H` has no
    /// positive entry of `D`.
    pub fn new(h: &SparseGraph<T>, d: &[T], prec: Precision) -> Result<Preconditioner<T>> {
        let n = d.len();
        if n > DIRECT_LIMIT {
            let mut diag: Vec<T> = d.to_vec();
            for (u, v, w) in &h.edges {
                diag[*u] += w;
                diag[*v] += w;
            }
            if diag.iter().any(|x| !x.is_positive()) {
                return Err(Error::SingularPreconditioner);
            }
            let stored = n + h.edges.len();
            return Ok(Preconditioner {
                n,
                prec,
                backend: Backend::Cg {
                    diag: d.to_vec(),
                    edges: h.edges.clone(),
                },
                stored,
            });
        }
        let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
        for (u, v, w) in &h.edges {
            if u == v {
                continue;
            }
            *adj[*u].entry(*v).or_insert_with(|| T::zero(prec)) += w;
            *adj[*v].entry(*u).or_insert_with(|| T::zero(prec)) += w;
        }
        let mut excess: Vec<T> = d.to_vec();
        let mut alive = vec![true; n];
        let mut steps = Vec::with_capacity(n);
        let mut stored = 0;
        for _ in 0..n {
            // minimum degree
            let k = (0..n)
                .filter(|&i| alive[i])
                .min_by_key(|&i| adj[i].len())
                .expect("vertex left");
            alive[k] = false;
            let nbrs: Vec<(usize, T)> = std::mem::take(&mut adj[k]).into_iter().collect();
            let mut pivot = excess[k].clone();
            for (_, w) in &nbrs {
                pivot += w;
            }
            if !pivot.is_positive() {
                return Err(Error::SingularPreconditioner);
            }
            for (i, wi) in &nbrs {
                adj[*i].remove(&k);
                let mut share = wi.clone() * &excess[k];
                share /= &pivot;
                excess[*i] += &share;
            }
            for a in 0..nbrs.len() {
                for b in a + 1..nbrs.len() {
                    let (i, wi) = &nbrs[a];
                    let (j, wj) = &nbrs[b];
                    let mut fill = wi.clone() * wj;
                    fill /= &pivot;
                    *adj[*i].entry(*j).or_insert_with(|| T::zero(prec)) += &fill;
                    *adj[*j].entry(*i).or_insert_with(|| T::zero(prec)) += &fill;
                }
            }
            stored += nbrs.len() + 1;
            steps.push(Eliminated {
                vertex: k,
                pivot,
                nbrs,
            });
        }
        Ok(Preconditioner {
            n,
            prec,
            backend: Backend::Direct(steps),
            stored,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Scalars held by the factorization or the CG context.
    pub fn stored_entries(&self) -> usize {
        self.stored
    }

    /// Approximately solves `P y = r`. The direct path is exact up to
    /// rounding; CG stops at relative residual `tol^2 / 10`.
    pub fn solve(&self, r: &[T], tol: f64) -> Result<Vec<T>> {
        match &self.backend {
            Backend::Direct(steps) => Ok(self.solve_direct(steps, r)),
            Backend::Cg { diag, edges } => self.solve_cg(diag, edges, r, tol),
        }
    }

    fn solve_direct(&self, steps: &[Eliminated<T>], r: &[T]) -> Vec<T> {
        let mut z: Vec<T> = r.to_vec();
        let mut tmp = T::zero(self.prec);
        for s in steps {
            for (i, w) in &s.nbrs {
                tmp.clone_from(w);
                tmp *= &z[s.vertex];
                tmp /= &s.pivot;
                z[*i] += &tmp;
            }
        }
        let mut y: Vec<T> = vec![T::zero(self.prec); self.n];
        for s in steps.iter().rev() {
            let mut acc = z[s.vertex].clone();
            for (i, w) in &s.nbrs {
                tmp.clone_from(w);
                tmp *= &y[*i];
                acc += &tmp;
            }
            acc /= &s.pivot;
            y[s.vertex] = acc;
        }
        y
    }

    fn apply(&self, diag: &[T], edges: &[(usize, usize, T)], y: &[T], out: &mut [T]) {
        for i in 0..self.n {
            out[i].clone_from(&diag[i]);
            out[i] *= &y[i];
        }
        let mut d = T::zero(self.prec);
        for (u, v, w) in edges {
            d.clone_from(&y[*u]);
            d -= &y[*v];
            d *= w;
            out[*u] += &d;
            out[*v] -= &d;
        }
    }

    fn solve_cg(
        &self,
        diag: &[T],
        edges: &[(usize, usize, T)],
        r: &[T],
        tol: f64,
    ) -> Result<Vec<T>> {
        let p = self.prec;
        let n = self.n;
        let mut jac: Vec<T> = diag.to_vec();
        for (u, v, w) in edges {
            jac[*u] += w;
            jac[*v] += w;
        }
        let target = T::from_f64(tol * tol / 10.0, p);
        let rnorm0 = dot(r, r, p).sqrt();
        let mut x = vec![T::zero(p); n];
        if !rnorm0.is_positive() {
            return Ok(x);
        }
        let mut res: Vec<T> = r.to_vec();
        let mut z: Vec<T> = res.iter().zip(&jac).map(|(a, b)| a.clone() / b).collect();
        let mut dir = z.clone();
        let mut rz = dot(&res, &z, p);
        let mut ad = vec![T::zero(p); n];
        for _ in 0..(10 * n).max(100) {
            self.apply(diag, edges, &dir, &mut ad);
            let alpha = rz.clone() / &dot(&dir, &ad, p);
            for i in 0..n {
                x[i] += alpha.clone() * &dir[i];
                res[i] -= alpha.clone() * &ad[i];
            }
            if dot(&res, &res, p).sqrt() / &rnorm0 <= target {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = res[i].clone() / &jac[i];
            }
            let rz_new = dot(&res, &z, p);
            let beta = rz_new.clone() / &rz;
            rz = rz_new;
            for i in 0..n {
                let mut nd = beta.clone() * &dir[i];
                nd += &z[i];
                dir[i] = nd;
            }
        }
        Err(Error::SolverDivergence(format!(
            "conjugate gradients did not reach {} within the iteration cap",
            target
        )))
    }
}
