//! Dense linear algebra over any `Real`, plus an eigenvalue-based
//! pseudoinverse for singular symmetric systems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use semistream::scalar::{Precision, Real};

pub type Dense<T> = Vec<Vec<T>>;

pub fn zeros<T: Real>(n: usize, m: usize, prec: Precision) -> Dense<T> {
    vec![vec![T::zero(prec); m]; n]
}

pub fn mat_vec<T: Real>(a: &Dense<T>, x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            let prec = x
                .first()
                .map(|v| v.precision())
                .unwrap_or(Precision::DOUBLE);
            let mut s = T::zero(prec);
            for (aij, xj) in row.iter().zip(x) {
                s += aij.clone() * xj;
            }
            s
        })
        .collect()
}

/// `x^T A x`
pub fn quad_form<T: Real>(a: &Dense<T>, x: &[T]) -> T {
    let ax = mat_vec(a, x);
    let prec = x
        .first()
        .map(|v| v.precision())
        .unwrap_or(Precision::DOUBLE);
    let mut s = T::zero(prec);
    for (u, v) in ax.iter().zip(x) {
        s += u.clone() * v;
    }
    s
}

/// Gaussian elimination with partial pivoting. `None` for a singular matrix.
pub fn lu_solve<T: Real>(a: &Dense<T>, b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Dense<T> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(m[piv][col].is_positive() || m[piv][col].is_negative()) {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col].clone() / &m[col][col];
            if !(f.is_positive() || f.is_negative()) {
                continue;
            }
            for k in col..n {
                let d = f.clone() * &m[col][k];
                m[r][k] -= &d;
            }
            let d = f * &rhs[col];
            rhs[r] -= &d;
        }
    }
    let mut x = rhs;
    for col in (0..n).rev() {
        for k in col + 1..n {
            let d = m[col][k].clone() * &x[k];
            x[col] -= &d;
        }
        x[col] /= &m[col][col];
    }
    Some(x)
}

/// Lower-triangular `L` with `A = L L^T`; `None` unless `A` is positive definite.
pub fn cholesky<T: Real>(a: &Dense<T>) -> Option<Dense<T>> {
    let n = a.len();
    let prec = a.first()?.first()?.precision();
    let mut l = zeros::<T>(n, n, prec);
    for j in 0..n {
        let mut d = a[j][j].clone();
        for k in 0..j {
            d -= l[j][k].clone() * &l[j][k];
        }
        if !d.is_positive() {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let mut s = a[i][j].clone();
            for k in 0..j {
                s -= l[i][k].clone() * &l[j][k];
            }
            l[i][j] = s / &l[j][j];
        }
    }
    Some(l)
}

pub fn cholesky_solve<T: Real>(l: &Dense<T>, b: &[T]) -> Vec<T> {
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let d = l[i][k].clone() * &y[k];
            y[i] -= &d;
        }
        y[i] /= &l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let d = l[k][i].clone() * &y[k];
            y[i] -= &d;
        }
        y[i] /= &l[i][i];
    }
    y
}

pub fn to_nalgebra(a: &[Vec<f64>]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i][j])
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(to_nalgebra(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

/// `A^+ b` for symmetric `A`, dropping eigenvalues below `rel_tol * max`.
pub fn pinv_solve(a: &[Vec<f64>], b: &[f64], rel_tol: f64) -> Vec<f64> {
    let eig = SymmetricEigen::new(to_nalgebra(a));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bv = DVector::from_column_slice(b);
    let mut x = DVector::zeros(b.len());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > rel_tol * top {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&bv) / lam);
        }
    }
    x.iter().copied().collect()
}

/// `sqrt(x^T A x)` in f64.
pub fn a_norm(a: &[Vec<f64>], x: &[f64]) -> f64 {
    let a: Dense<f64> = a.to_vec();
    quad_form(&a, x).max(0.0).sqrt()
}

/// Extreme generalized eigenvalues of `(B, A)` on the range of `A`: the
/// tightest `lo, hi` with `lo x^T A x <= x^T B x <= hi x^T A x`. Both
/// matrices are assumed to share a null space.
pub fn relative_spectrum(a: &[Vec<f64>], b: &[Vec<f64>], rel_tol: f64) -> (f64, f64) {
    let eig = SymmetricEigen::new(to_nalgebra(a));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..a.len())
        .filter(|&k| eig.eigenvalues[k] > rel_tol * top)
        .collect();
    let r = keep.len();
    if r == 0 {
        return (1.0, 1.0);
    }
    // W = V_r diag(lambda^{-1/2}); spectrum of W^T B W
    let n = a.len();
    let w = DMatrix::from_fn(n, r, |i, j| {
        let k = keep[j];
        eig.eigenvectors[(i, k)] / eig.eigenvalues[k].sqrt()
    });
    let m = w.transpose() * to_nalgebra(b) * &w;
    let m = (&m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(m).eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
