//! Exact LP solving over the rationals.
//!
//! `min c^T x s.t. A x >= b` with free `x` is solved through its dual
//! `max b^T y s.t. A^T y = c, y >= 0`, which is already in standard form.
//! Two-phase tableau simplex with Bland's rule, so it terminates on
//! degenerate problems. The primal optimum is read off the final basis.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: i128) -> Q {
    Q::from_integer(BigInt::from(v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lp {
    /// Dense rows `a_i`.
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    /// The dual is infeasible: the primal is unbounded, or infeasible too.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: Q,
    /// A basic optimal primal point.
    pub x: Vec<Q>,
    /// An optimal dual point, `y >= 0`, `A^T y = c`.
    pub y: Vec<Q>,
    /// Rows in the final basis; all are tight at `x`.
    pub basis: Vec<usize>,
}

impl Lp {
    pub fn from_i128(a: &[Vec<i128>], b: &[i128], c: &[i128]) -> Lp {
        Lp {
            a: a.iter()
                .map(|r| r.iter().map(|&v| q(v)).collect())
                .collect(),
            b: b.iter().map(|&v| q(v)).collect(),
            c: c.iter().map(|&v| q(v)).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn slacks(&self, x: &[Q]) -> Vec<Q> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| row.iter().zip(x).fold(Q::zero(), |s, (a, v)| s + a * v) - bi)
            .collect()
    }

    pub fn tight_rows(&self, x: &[Q]) -> Vec<usize> {
        self.slacks(x)
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn objective(&self, x: &[Q]) -> Q {
        self.c.iter().zip(x).fold(Q::zero(), |s, (c, v)| s + c * v)
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars();
        let m = self.a.len();
        // Equality rows j = 0..n: sum_i a_ij y_i = c_j; columns: y (m), artificials (n).
        let cols = m + n;
        let mut t: Vec<Vec<Q>> = Vec::with_capacity(n);
        for j in 0..n {
            let neg = self.c[j].is_negative();
            let mut row: Vec<Q> = (0..m)
                .map(|i| {
                    if neg {
                        -self.a[i][j].clone()
                    } else {
                        self.a[i][j].clone()
                    }
                })
                .collect();
            row.extend((0..n).map(|k| if k == j { Q::one() } else { Q::zero() }));
            row.push(self.c[j].abs());
            t.push(row);
        }
        let mut basis: Vec<usize> = (m..m + n).collect();

        // Phase 1: minimise the artificials, i.e. maximise -sum a.
        let phase1_cost: Vec<Q> = (0..cols)
            .map(|k| if k >= m { -Q::one() } else { Q::zero() })
            .collect();
        run_simplex(&mut t, &mut basis, &phase1_cost, cols);
        let infeas: Q = basis
            .iter()
            .zip(&t)
            .filter(|(b, _)| **b >= m)
            .fold(Q::zero(), |s, (_, r)| s + &r[cols]);
        if infeas.is_positive() {
            return LpOutcome::Unbounded;
        }
        // Drive zero-level artificials out; drop rows that cannot be.
        let mut r = 0;
        while r < t.len() {
            if basis[r] >= m {
                if let Some(k) = (0..m).find(|&k| !t[r][k].is_zero()) {
                    pivot(&mut t, &mut basis, r, k);
                } else {
                    t.remove(r);
                    basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
        for row in t.iter_mut() {
            for k in m..cols {
                row[k] = Q::zero();
            }
        }
        // Phase 2 over the y columns only.
        let cost: Vec<Q> = (0..cols)
            .map(|k| if k < m { self.b[k].clone() } else { Q::zero() })
            .collect();
        if !run_simplex_limited(&mut t, &mut basis, &cost, m) {
            // dual unbounded: primal infeasible
            return LpOutcome::Infeasible;
        }
        let mut y = vec![Q::zero(); m];
        for (r, &bv) in basis.iter().enumerate() {
            y[bv] = t[r][cols].clone();
        }
        let value: Q = y.iter().zip(&self.b).fold(Q::zero(), |s, (a, b)| s + a * b);
        // Primal point: a_i^T x = b_i on basis rows.
        let x = solve_rows(&self.a, &self.b, &basis, n).expect("basis rows are independent");
        LpOutcome::Optimal(LpSolution { value, x, y, basis })
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, k: usize) {
    let p = t[r][k].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[k].is_zero() {
            let f = row[k].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= &f * pv;
            }
        }
    }
    basis[r] = k;
}

/// Maximises `cost^T z` with Bland's rule. Returns false if unbounded.
fn run_simplex(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], cols: usize) -> bool {
    run_simplex_limited(t, basis, cost, cols)
}

fn run_simplex_limited(
    t: &mut [Vec<Q>],
    basis: &mut [usize],
    cost: &[Q],
    enter_cols: usize,
) -> bool {
    let rhs = t.first().map(|r| r.len() - 1).unwrap_or(0);
    loop {
        // reduced cost of column k: cost_k - sum_r cost_{basis r} t[r][k]
        let entering = (0..enter_cols).find(|&k| {
            if basis.contains(&k) {
                return false;
            }
            let mut red = cost[k].clone();
            for (r, &bv) in basis.iter().enumerate() {
                red -= &cost[bv] * &t[r][k];
            }
            red.is_positive()
        });
        let Some(k) = entering else { return true };
        let mut best: Option<(Q, usize)> = None;
        for r in 0..t.len() {
            if t[r][k].is_positive() {
                let ratio = &t[r][rhs] / &t[r][k];
                let better = match &best {
                    None => true,
                    Some((b, br)) => ratio < *b || (ratio == *b && basis[r] < basis[*br]),
                };
                if better {
                    best = Some((ratio, r));
                }
            }
        }
        let Some((_, r)) = best else { return false };
        pivot(t, basis, r, k);
    }
}

/// Solves `a_i^T x = b_i` for `i` in `rows` exactly, free variables at zero.
fn solve_rows(a: &[Vec<Q>], b: &[Q], rows: &[usize], n: usize) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|&i| {
            let mut r = a[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let pv = m[row][col].clone();
        for v in m[row].iter_mut() {
            *v /= &pv;
        }
        let prow = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let f = r[col].clone();
                for (v, pv) in r.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = m[r][n].clone();
    }
    Some(x)
}

/// Every vertex of `{x : A x >= b}`, by trying each `n`-subset of rows.
/// Exponential; for tiny systems only.
pub fn enumerate_vertices(lp: &Lp) -> Vec<Vec<Q>> {
    let n = lp.num_vars();
    let m = lp.a.len();
    let mut out: Vec<Vec<Q>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    if n > m {
        return out;
    }
    loop {
        let sub: Vec<Vec<Q>> = idx.iter().map(|&i| lp.a[i].clone()).collect();
        if rank(&sub) == n {
            if let Some(x) = solve_rows(&lp.a, &lp.b, &idx, n) {
                if lp.slacks(&x).iter().all(|s| !s.is_negative()) && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let prow = m[r].clone();
                for (v, pv) in m[i].iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_lp() {
        // min x s.t. x >= 1, -x >= -3
        let lp = Lp::from_i128(&[vec![1], vec![-1]], &[1, -3], &[1]);
        let LpOutcome::Optimal(s) = lp.solve() else {
            panic!()
        };
        assert_eq!(s.value, q(1));
        assert_eq!(s.x, vec![q(1)]);
        assert_eq!(s.y, vec![q(1), q(0)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = Lp::from_i128(&[vec![1], vec![-1]], &[3, -1], &[1]);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let lp = Lp::from_i128(&[vec![1]], &[0], &[-1]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn two_dimensional() {
        // min x + y s.t. x + 2y >= 4 is not two-nonzero; any rows are fine here
        let lp = Lp::from_i128(
            &[vec![1, 2], vec![3, 1], vec![1, 0], vec![0, 1]],
            &[4, 6, 0, 0],
            &[1, 1],
        );
        let LpOutcome::Optimal(s) = lp.solve() else {
            panic!()
        };
        // vertices (0,6), (8/5, 6/5), (4,0); best is 14/5
        assert_eq!(s.value, Q::new(BigInt::from(14), BigInt::from(5)));
        assert_eq!(lp.objective(&s.x), s.value);
        let verts = enumerate_vertices(&lp);
        assert_eq!(verts.len(), 3);
    }
}
