//! Dense barrier calculus for small LPs `min c^T x, A x >= b`: gradient,
//! Hessian, the centrality potentials and exact Newton steps, all computed
//! from an explicit matrix.

use semistream::error::Result;
use semistream::lp::{ConstraintRows, RowShape};
use semistream::scalar::{Precision, Real};

use crate::dense::{lu_solve, Dense};

#[derive(Clone, Debug)]
pub struct DenseLp<T> {
    pub a: Dense<T>,
    pub b: Vec<T>,
    pub prec: Precision,
}

impl<T: Real> DenseLp<T> {
    /// Materialises a row system (one pass).
    pub fn from_rows(rows: &dyn ConstraintRows, prec: Precision) -> Result<DenseLp<T>> {
        let n = rows.num_vars();
        let mut a = Vec::new();
        let mut b = Vec::new();
        rows.for_each_row(&mut |row| {
            let mut r = vec![T::zero(prec); n];
            match row.shape {
                RowShape::Edge { pos, neg } => {
                    r[pos] = T::one(prec);
                    r[neg] = -T::one(prec);
                }
                RowShape::Single { var, positive } => {
                    r[var] = if positive {
                        T::one(prec)
                    } else {
                        -T::one(prec)
                    };
                }
            }
            a.push(r);
            b.push(T::from_i128(row.rhs, prec));
            Ok(())
        })?;
        Ok(DenseLp { a, b, prec })
    }

    pub fn num_vars(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    pub fn slacks(&self, x: &[T]) -> Vec<T> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let mut s = T::zero(self.prec);
                for (aij, xj) in row.iter().zip(x) {
                    s += aij.clone() * xj;
                }
                s - bi
            })
            .collect()
    }

    pub fn is_interior(&self, x: &[T]) -> bool {
        self.slacks(x).iter().all(|s| s.is_positive())
    }

    /// `t c - A^T s^{-1}`
    pub fn gradient(&self, c: &[T], x: &[T], t: &T) -> Vec<T> {
        let s = self.slacks(x);
        let mut g: Vec<T> = c.iter().map(|ci| ci.clone() * t).collect();
        for (row, si) in self.a.iter().zip(&s) {
            for (gj, aij) in g.iter_mut().zip(row) {
                *gj -= aij.clone() / si;
            }
        }
        g
    }

    /// `A^T S^{-2} A`
    pub fn hessian(&self, x: &[T]) -> Dense<T> {
        let n = self.num_vars();
        let s = self.slacks(x);
        let mut h = vec![vec![T::zero(self.prec); n]; n];
        for (row, si) in self.a.iter().zip(&s) {
            let w = (si.clone() * si).recip();
            for i in 0..n {
                if row[i].is_positive() || row[i].is_negative() {
                    let wi = w.clone() * &row[i];
                    for j in 0..n {
                        if row[j].is_positive() || row[j].is_negative() {
                            h[i][j] += wi.clone() * &row[j];
                        }
                    }
                }
            }
        }
        h
    }

    /// `||g||_{H(y)^{-1}}`
    fn dual_norm(&self, g: &[T], y: &[T]) -> T {
        let h = self.hessian(y);
        let z = lu_solve(&h, g).expect("Hessian of a full-rank LP is invertible");
        let mut s = T::zero(self.prec);
        for (a, b) in g.iter().zip(&z) {
            s += a.clone() * b;
        }
        s.abs().sqrt()
    }

    /// `Phi_t(x, y) = ||t c + g(x)||_{H(y)^{-1}}`
    pub fn phi(&self, c: &[T], x: &[T], t: &T, y: &[T]) -> T {
        self.dual_norm(&self.gradient(c, x, t), y)
    }

    /// `Psi(x, y) = ||g(x)||_{H(y)^{-1}}`
    pub fn psi(&self, x: &[T], y: &[T]) -> T {
        let zeros = vec![T::zero(self.prec); x.len()];
        self.dual_norm(&self.gradient(&zeros, x, &T::zero(self.prec)), y)
    }

    /// `x - H(x)^{-1} (t c + g(x))`
    pub fn newton(&self, c: &[T], x: &[T], t: &T) -> Vec<T> {
        let g = self.gradient(c, x, t);
        let d = lu_solve(&self.hessian(x), &g).expect("invertible Hessian");
        x.iter().zip(d).map(|(a, b)| a.clone() - b).collect()
    }

    /// The minimiser of `t c^T x - sum ln s_i(x)`, by damped Newton from an
    /// interior `x0` until the Newton decrement is below `tol`.
    pub fn central_path_reference(&self, c: &[T], t: &T, x0: &[T], tol: f64) -> Option<Vec<T>> {
        let mut x = x0.to_vec();
        for _ in 0..10_000 {
            let g = self.gradient(c, &x, t);
            let d = lu_solve(&self.hessian(&x), &g)?;
            let mut lam2 = T::zero(self.prec);
            for (a, b) in g.iter().zip(&d) {
                lam2 += a.clone() * b;
            }
            let lam = lam2.abs().sqrt().to_f64();
            if lam < tol {
                return Some(x);
            }
            let step = if lam > 0.25 { 1.0 / (1.0 + lam) } else { 1.0 };
            let f = T::from_f64(step, self.prec);
            let next: Vec<T> = x
                .iter()
                .zip(&d)
                .map(|(a, b)| a.clone() - f.clone() * b)
                .collect();
            if !self.is_interior(&next) {
                return None;
            }
            x = next;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semistream::lp::ExplicitRows;

    fn interval() -> DenseLp<f64> {
        let rows = ExplicitRows::new(
            1,
            vec![
                (
                    RowShape::Single {
                        var: 0,
                        positive: true,
                    },
                    0,
                ),
                (
                    RowShape::Single {
                        var: 0,
                        positive: false,
                    },
                    -1,
                ),
            ],
        )
        .unwrap();
        DenseLp::from_rows(&rows, Precision::DOUBLE).unwrap()
    }

    #[test]
    fn centre_of_interval() {
        let lp = interval();
        let x = lp
            .central_path_reference(&[1.0], &0.0, &[0.9], 1e-13)
            .unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12);
        // t = 1: 1 - 1/x + 1/(1-x) = 0
        let x = lp
            .central_path_reference(&[1.0], &1.0, &[0.5], 1e-13)
            .unwrap();
        assert!((x[0] - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(lp.phi(&[1.0], &x, &1.0, &x) < 1e-12);
        // Psi at the centre of an interval with two rows is sqrt(M) at most
        assert!(lp.psi(&x, &x) <= 2f64.sqrt());
    }
}
