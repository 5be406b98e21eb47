//! SDD₀ systems: Gremban's doubling turns positive off-diagonals into
//! edges between two copies of the vertex set, and singular Laplacian
//! components are grounded by deleting one vertex each.

use std::sync::Arc;

use super::stream_ls::{stream_ls, StreamLsConfig};
use super::SddmSource;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::stream::PassCounter;

/// Symmetric, weakly diagonally dominant matrix given by its diagonal and
/// the off-diagonal entries `(i, j, a_ij)` with `i < j`. Reading the
/// off-diagonal entries is a counted pass.
#[derive(Clone, Debug)]
pub struct Sdd0Matrix<T> {
    n: usize,
    diag: Vec<T>,
    entries: Vec<(usize, usize, T)>,
    prec: Precision,
    counter: Arc<PassCounter>,
}

impl<T: Real> Sdd0Matrix<T> {
    /// Entries may be given in either triangle; `(i, j)` and `(j, i)` must
    /// not both appear.
    pub fn new(
        diag: Vec<T>,
        entries: Vec<(usize, usize, T)>,
        prec: Precision,
    ) -> Result<Sdd0Matrix<T>> {
        let n = diag.len();
        let mut out = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if i >= n || j >= n || i == j {
                return Err(Error::Parameter(format!(
                    "off-diagonal entry ({i}, {j}) invalid for n = {n}"
                )));
            }
            if v.is_positive() || v.is_negative() {
                out.push((i.min(j), i.max(j), v));
            }
        }
        Ok(Sdd0Matrix {
            n,
            diag,
            entries: out,
            prec,
            counter: PassCounter::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }
    pub fn passes(&self) -> u64 {
        self.counter.get()
    }
    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, &T)) {
        self.counter.tick();
        for (i, j, v) in &self.entries {
            f(*i, *j, v);
        }
    }

    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            a[i][i] = self.diag[i].to_f64();
        }
        for (i, j, v) in &self.entries {
            a[*i][*j] += v.to_f64();
            a[*j][*i] += v.to_f64();
        }
        a
    }
}

/// Calls `f(p, q, w)` for the two Gremban edges of entry `a_ij`.
fn gremban_edges<T: Real>(
    n: usize,
    i: usize,
    j: usize,
    v: &T,
    f: &mut impl FnMut(usize, usize, &T),
) {
    if v.is_negative() {
        let w = -v.clone();
        f(i, j, &w);
        f(i + n, j + n, &w);
    } else {
        f(i, j + n, v);
        f(i + n, j, v);
    }
}

struct Grounded<'a, T> {
    a: &'a Sdd0Matrix<T>,
    /// Doubled vertex -> position in the reduced system.
    map: Vec<Option<usize>>,
    diag: Vec<T>,
}

impl<T: Real> SddmSource<T> for Grounded<'_, T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn diagonal(&self) -> &[T] {
        &self.diag
    }
    fn edge_count_hint(&self) -> u64 {
        2 * self.a.entries.len() as u64
    }
    fn precision(&self) -> Precision {
        self.a.prec
    }
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, &T)) -> Result<()> {
        let n = self.a.n;
        let map = &self.map;
        self.a.for_each_entry(&mut |i, j, v| {
            gremban_edges(n, i, j, v, &mut |p, q, w| {
                if let (Some(p), Some(q)) = (map[p], map[q]) {
                    f(p, q, w);
                }
            })
        });
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Sdd0Report<T> {
    pub x: Vec<T>,
    pub passes: u64,
    pub iterations: u32,
    /// Doubled-system vertices fixed to zero.
    pub grounded: Vec<usize>,
    /// Connected components of the doubled system.
    pub components: usize,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Solves a consistent SDD₀ system `A x = b` to relative `A`-norm error
/// `eps`. For singular `A` any solution is returned; they all share the
/// same `A`-norm distance to each other (zero).
pub fn solve_sdd0<T: Real>(
    a: &Sdd0Matrix<T>,
    b: &[T],
    eps: f64,
    cfg: &StreamLsConfig,
) -> Result<Sdd0Report<T>> {
    let n = a.n;
    let prec = a.prec;
    if b.len() != n {
        return Err(Error::Parameter(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    let start = a.passes();

    // Pass 1: absolute row sums and components of the doubled graph.
    let mut absrow = vec![T::zero(prec); n];
    let mut parent: Vec<usize> = (0..2 * n).collect();
    a.for_each_entry(&mut |i, j, v| {
        let av = v.abs();
        absrow[i] += &av;
        absrow[j] += &av;
        gremban_edges(n, i, j, v, &mut |p, q, _| {
            let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
            if rp != rq {
                parent[rp.max(rq)] = rp.min(rq);
            }
        });
    });
    let mut excess = Vec::with_capacity(2 * n);
    for i in 0..n {
        let e = a.diag[i].clone() - &absrow[i];
        let scale = a.diag[i].abs().to_f64().max(absrow[i].to_f64());
        if e.is_negative() && -e.to_f64() > 1e3 * T::unit_roundoff(prec) * scale {
            return Err(Error::Parameter(format!(
                "row {i} is not diagonally dominant"
            )));
        }
        excess.push(if e.is_negative() { T::zero(prec) } else { e });
    }
    let excess: Vec<T> = excess.iter().chain(excess.iter()).cloned().collect();
    let bhat: Vec<T> = b
        .iter()
        .cloned()
        .chain(b.iter().map(|v| -v.clone()))
        .collect();

    let roots: Vec<usize> = (0..2 * n).map(|p| find(&mut parent, p)).collect();
    let mut has_excess = vec![false; 2 * n];
    for p in 0..2 * n {
        if excess[p].is_positive() {
            has_excess[roots[p]] = true;
        }
    }
    let components = (0..2 * n).filter(|&p| roots[p] == p).count();
    // The root is the smallest vertex of its component.
    let grounded: Vec<usize> = (0..2 * n)
        .filter(|&p| roots[p] == p && !has_excess[p])
        .collect();
    for &g in &grounded {
        let mut sum = T::zero(prec);
        let mut mag = 0.0f64;
        for p in 0..2 * n {
            if roots[p] == g {
                sum += &bhat[p];
                mag += bhat[p].to_f64().abs();
            }
        }
        let tol = 1e3 * (2 * n) as f64 * T::unit_roundoff(prec) * mag;
        if sum.to_f64().abs() > tol {
            return Err(Error::NoSolution(format!(
                "component containing vertex {} has zero row sums but rhs sums to {}",
                g % n,
                sum.to_f64()
            )));
        }
    }

    let mut map = vec![None; 2 * n];
    let mut next = 0;
    for p in 0..2 * n {
        if roots[p] != p || has_excess[p] {
            map[p] = Some(next);
            next += 1;
        }
    }
    let mut diag: Vec<T> = (0..2 * n)
        .filter(|&p| map[p].is_some())
        .map(|p| excess[p].clone())
        .collect();
    let rhs: Vec<T> = (0..2 * n)
        .filter(|&p| map[p].is_some())
        .map(|p| bhat[p].clone())
        .collect();

    // Pass 2, only when something was grounded: edges into a deleted vertex
    // turn into diagonal mass on the other endpoint.
    if !grounded.is_empty() {
        a.for_each_entry(&mut |i, j, v| {
            gremban_edges(n, i, j, v, &mut |p, q, w| match (map[p], map[q]) {
                (Some(p), None) | (None, Some(p)) => diag[p] += w,
                _ => {}
            })
        });
    }

    let sys = Grounded { a, map, diag };
    let (xhat, iterations) = if sys.dim() == 0 {
        (Vec::new(), 0)
    } else {
        let rep = stream_ls(&sys, &rhs, eps, cfg, None)?;
        (rep.x, rep.iterations)
    };
    let mut full = vec![T::zero(prec); 2 * n];
    for p in 0..2 * n {
        if let Some(k) = sys.map[p] {
            full[p] = xhat[k].clone();
        }
    }
    let half = T::from_f64(0.5, prec);
    let x = (0..n)
        .map(|i| (full[i].clone() - &full[i + n]) * &half)
        .collect();
    Ok(Sdd0Report {
        x,
        passes: a.passes() - start,
        iterations,
        grounded,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_off_diagonal() {
        let p = Precision::DOUBLE;
        let a = Sdd0Matrix::new(vec![2.0, 2.0], vec![(0, 1, 1.0)], p).unwrap();
        // doubled matrix from the construction
        let mut dense = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            dense[i][i] = 2.0 - 1.0;
        }
        a.entries.iter().for_each(|(i, j, v)| {
            gremban_edges(2, *i, *j, v, &mut |p, q, w| {
                dense[p][p] += w;
                dense[q][q] += w;
                dense[p][q] -= w;
                dense[q][p] -= w;
            })
        });
        assert_eq!(
            dense,
            vec![
                vec![2.0, 0.0, 0.0, -1.0],
                vec![0.0, 2.0, -1.0, 0.0],
                vec![0.0, -1.0, 2.0, 0.0],
                vec![-1.0, 0.0, 0.0, 2.0]
            ]
        );
        let rep = solve_sdd0(&a, &[3.0, 3.0], 1e-10, &StreamLsConfig::default()).unwrap();
        assert!((rep.x[0] - 1.0).abs() < 1e-9 && (rep.x[1] - 1.0).abs() < 1e-9);
        assert!(rep.grounded.is_empty());
    }

    #[test]
    fn path_laplacian_is_grounded() {
        let p = Precision::DOUBLE;
        let a = Sdd0Matrix::new(vec![1.0, 2.0, 1.0], vec![(0, 1, -1.0), (1, 2, -1.0)], p).unwrap();
        let rep = solve_sdd0(&a, &[1.0, 0.0, -1.0], 1e-10, &StreamLsConfig::default()).unwrap();
        // solutions are (c+1, c, c-1)
        assert!((rep.x[0] - rep.x[1] - 1.0).abs() < 1e-9);
        assert!((rep.x[1] - rep.x[2] - 1.0).abs() < 1e-9);
        assert_eq!(rep.grounded, vec![0, 3]);
        // component pass, grounding pass, then the solver
        assert_eq!(
            rep.passes,
            2 + super::super::stream_ls::pass_count(4, 1e-10)
        );
    }

    #[test]
    fn inconsistent_rhs() {
        let p = Precision::DOUBLE;
        let a = Sdd0Matrix::new(vec![1.0, 1.0, 1.0], vec![(0, 1, -1.0)], p).unwrap();
        // {0,1} is a Laplacian block; rhs there must sum to zero
        let err = solve_sdd0(&a, &[1.0, 0.0, 5.0], 1e-8, &StreamLsConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn not_dominant() {
        let p = Precision::DOUBLE;
        let a = Sdd0Matrix::new(vec![1.0, 1.0], vec![(0, 1, 2.0)], p).unwrap();
        assert!(solve_sdd0(&a, &[1.0, 1.0], 1e-8, &StreamLsConfig::default()).is_err());
    }
}
