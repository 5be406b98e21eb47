//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use semistream::lp::{ExplicitRows, RowShape};
use semistream::scalar::Precision;
use semistream::sdd::{ExplicitSddm, Sdd0Matrix};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random bipartite graph: each of the `n_left * n_right` pairs present
/// with probability `p`, weights uniform in `1..=w_max`.
pub fn bipartite(n_left: u32, n_right: u32, p: f64, w_max: u64, seed: u64) -> Vec<(u32, u32, u64)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for u in 0..n_left {
        for v in 0..n_right {
            if r.gen_bool(p) {
                out.push((u, v, r.gen_range(1..=w_max.max(1))));
            }
        }
    }
    out
}

/// Random connected SDDM matrix: a spanning tree plus extra edges with
/// weights spread over a few orders of magnitude, and positive excess on a
/// random subset of the diagonal.
pub fn sddm(n: usize, extra_edges: usize, seed: u64) -> ExplicitSddm<f64> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    for k in 1..n {
        let j = order[r.gen_range(0..k)];
        edges.push((order[k], j, 10f64.powf(r.gen_range(-2.0..2.0))));
    }
    for _ in 0..extra_edges {
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i != j {
            edges.push((i, j, 10f64.powf(r.gen_range(-2.0..2.0))));
        }
    }
    let mut diag = vec![0.0; n];
    for &(i, j, w) in &edges {
        diag[i] += w;
        diag[j] += w;
    }
    let mut any = false;
    for d in diag.iter_mut() {
        if r.gen_bool(0.3) {
            *d += 10f64.powf(r.gen_range(-2.0..1.0));
            any = true;
        }
    }
    if !any && n > 0 {
        diag[0] += 1.0;
    }
    ExplicitSddm::new(diag, edges, Precision::DOUBLE)
}

/// Random SDD₀ matrix on `n` vertices split into `components` blocks, with
/// off-diagonals of both signs. Each block is a Laplacian-like system
/// (zero excess) with probability `laplacian_p`.
pub fn sdd0(n: usize, components: usize, laplacian_p: f64, seed: u64) -> Sdd0Matrix<f64> {
    let mut r = rng(seed);
    let comps = components.clamp(1, n.max(1));
    let mut block: Vec<usize> = (0..n).map(|i| i % comps).collect();
    block.shuffle(&mut r);
    let mut entries = Vec::new();
    let mut absrow = vec![0.0; n];
    for c in 0..comps {
        let members: Vec<usize> = (0..n).filter(|&i| block[i] == c).collect();
        for k in 1..members.len() {
            let j = members[r.gen_range(0..k)];
            let i = members[k];
            let mag = 10f64.powf(r.gen_range(-1.0..1.0));
            let v = if r.gen_bool(0.3) { mag } else { -mag };
            entries.push((i, j, v));
            absrow[i] += mag;
            absrow[j] += mag;
        }
        for _ in 0..members.len() {
            if members.len() < 2 {
                break;
            }
            let i = *members.choose(&mut r).expect("non-empty");
            let j = *members.choose(&mut r).expect("non-empty");
            if i != j
                && !entries
                    .iter()
                    .any(|&(a, b, _)| (a, b) == (i, j) || (a, b) == (j, i))
            {
                let mag = 10f64.powf(r.gen_range(-1.0..1.0));
                let v = if r.gen_bool(0.3) { mag } else { -mag };
                entries.push((i, j, v));
                absrow[i] += mag;
                absrow[j] += mag;
            }
        }
    }
    let lap: Vec<bool> = (0..comps).map(|_| r.gen_bool(laplacian_p)).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            if lap[block[i]] {
                absrow[i]
            } else {
                absrow[i] + 10f64.powf(r.gen_range(-1.0..0.5))
            }
        })
        .collect();
    Sdd0Matrix::new(diag, entries, Precision::DOUBLE).expect("valid indices")
}

/// Random right-hand side in the range of `A`: `b = A z` for random `z`.
pub fn consistent_rhs(a: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let z: Vec<f64> = (0..a.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
    a.iter()
        .map(|row| row.iter().zip(&z).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn gaussian_vector(n: usize, r: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            // Box-Muller
            let u: f64 = r.gen_range(f64::EPSILON..1.0);
            let v: f64 = r.gen_range(0.0..1.0);
            (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
        })
        .collect()
}

/// A bounded, feasible LP with two-nonzero rows: box rows `|x_i| <= B` on
/// every variable plus random difference rows made feasible at a hidden
/// interior point. Returns the rows, an objective and the interior point.
pub fn small_lp(n: usize, extra_rows: usize, seed: u64) -> (ExplicitRows, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let bound = 8i128;
    let x0: Vec<f64> = (0..n).map(|_| r.gen_range(-4i32..=4) as f64).collect();
    let mut rows = Vec::new();
    for var in 0..n {
        rows.push((
            RowShape::Single {
                var,
                positive: true,
            },
            -bound,
        ));
        rows.push((
            RowShape::Single {
                var,
                positive: false,
            },
            -bound,
        ));
    }
    let mut added = 0;
    while added < extra_rows && n >= 2 {
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i == j {
            continue;
        }
        let gap = r.gen_range(1..=3) as f64;
        let rhs = (x0[i] - x0[j] - gap) as i128;
        rows.push((RowShape::Edge { pos: i, neg: j }, rhs));
        added += 1;
    }
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-3i32..=3) as f64).collect();
    (ExplicitRows::new(n, rows).expect("valid rows"), c, x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(bipartite(4, 4, 0.5, 8, 3), bipartite(4, 4, 0.5, 8, 3));
        let a = sddm(10, 5, 1).to_dense_f64();
        for i in 0..10 {
            let off: f64 = (0..10).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
            assert!(a[i][i] >= off - 1e-12);
        }
    }

    #[test]
    fn lp_point_is_interior() {
        let (rows, _, x0) = small_lp(5, 10, 4);
        for row in rows.rows() {
            let mut s = 0.0;
            row.slack_into(&x0, &mut s);
            assert!(s > 0.0);
        }
    }
}
