//! One-pass spectral sparsification by merge-and-reduce.
//!
//! Edges are buffered in chunks of `2 * budget`. A full chunk is reduced to a
//! reweighted sample drawn with probability proportional to `w_e R_e`
//! (weight times effective resistance, computed exactly on the chunk). Two
//! reduced blocks of the same level are merged and reduced again, so at most
//! `log(m / budget)` levels are ever live.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::SddmSource;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparsifyConfig {
    /// `c_s` in `budget = ceil(c_s * delta^-2 * n * log2(n)^2)`.
    pub budget_constant: f64,
    /// `c_q` in `q = ceil(c_q * delta'^-2 * n * ln n)` samples per reduction.
    pub sample_constant: f64,
    pub seed: u64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            budget_constant: 1.0,
            sample_constant: 9.0,
            seed: 0x5eed,
        }
    }
}

impl SparsifyConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        SparsifyConfig { seed, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct SparseGraph<T> {
    pub n: usize,
    pub edges: Vec<(usize, usize, T)>,
    pub delta: f64,
    pub budget: usize,
    /// Number of reductions that actually sampled.
    pub reductions: usize,
    /// The per-reduction sample count was cut to the budget, so the quality
    /// bound is no longer backed by the sampling analysis.
    pub capped: bool,
}

pub fn budget(delta: f64, n: usize, budget_constant: f64) -> usize {
    let lg = (n.max(2) as f64).log2();
    (budget_constant * n as f64 * lg * lg / (delta * delta))
        .ceil()
        .max(1.0) as usize
}

struct Reducer {
    budget: usize,
    samples: usize,
    rng: ChaCha20Rng,
    reductions: usize,
}

/// Sums weights of repeated pairs.
fn coalesce<T: Real>(edges: Vec<(usize, usize, T)>) -> Vec<(usize, usize, T)> {
    let mut at: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
    let mut out: Vec<(usize, usize, T)> = Vec::with_capacity(edges.len());
    for (u, v, w) in edges {
        let key = (u.min(v), u.max(v));
        match at.get(&key) {
            Some(&i) => out[i].2 += &w,
            None => {
                at.insert(key, out.len());
                out.push((key.0, key.1, w));
            }
        }
    }
    out
}

impl Reducer {
    fn reduce<T: Real>(&mut self, edges: Vec<(usize, usize, T)>) -> Vec<(usize, usize, T)> {
        let edges = coalesce(edges);
        if edges.len() <= self.budget || self.samples >= edges.len() {
            // Sampling could not shrink the chunk; keeping it is exact.
            return edges;
        }
        let lev = leverage_scores(&edges);
        let total: f64 = lev.iter().sum();
        let dist = match WeightedIndex::new(&lev) {
            Ok(d) => d,
            Err(_) => return edges,
        };
        let mut counts = vec![0u32; edges.len()];
        for _ in 0..self.samples {
            counts[dist.sample(&mut self.rng)] += 1;
        }
        self.reductions += 1;
        let q = self.samples as f64;
        let prec = edges[0].2.precision();
        edges
            .into_iter()
            .zip(lev)
            .zip(counts)
            .filter(|(_, c)| *c > 0)
            .map(|(((u, v, w), l), c)| {
                let scale = c as f64 * total / (q * l);
                (u, v, w * T::from_f64(scale, prec))
            })
            .collect()
    }
}

/// `w_e R_e` for every edge, computed in `f64` on the vertices the chunk
/// touches. Weights are normalised by the largest one first; leverage scores
/// are scale-free.
fn leverage_scores<T: Real>(edges: &[(usize, usize, T)]) -> Vec<f64> {
    let mut idx: HashMap<usize, usize> = HashMap::new();
    for (u, v, _) in edges {
        let k = idx.len();
        idx.entry(*u).or_insert(k);
        let k = idx.len();
        idx.entry(*v).or_insert(k);
    }
    let k = idx.len();
    let w_max = edges
        .iter()
        .map(|e| e.2.clone())
        .fold(edges[0].2.clone(), T::max_of);
    let ws: Vec<f64> = edges
        .iter()
        .map(|e| (e.2.clone() / &w_max).to_f64())
        .collect();

    // Components, so that K = L + sum_c 1_c 1_c^T / |c| is positive definite.
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut kmat = vec![0.0; k * k];
    for ((u, v, _), w) in edges.iter().zip(&ws) {
        let (a, b) = (idx[u], idx[v]);
        kmat[a * k + a] += w;
        kmat[b * k + b] += w;
        kmat[a * k + b] -= w;
        kmat[b * k + a] -= w;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let roots: Vec<usize> = (0..k).map(|i| find(&mut parent, i)).collect();
    let mut size = vec![0usize; k];
    for &r in &roots {
        size[r] += 1;
    }
    for i in 0..k {
        for j in 0..k {
            if roots[i] == roots[j] {
                kmat[i * k + j] += 1.0 / size[roots[i]] as f64;
            }
        }
    }
    let inv = spd_inverse(kmat, k);
    edges
        .iter()
        .zip(&ws)
        .map(|((u, v, _), w)| {
            let (a, b) = (idx[u], idx[v]);
            let r = inv[a * k + a] + inv[b * k + b] - 2.0 * inv[a * k + b];
            (w * r).max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
fn spd_inverse(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= a[j * n + p] * a[j * n + p];
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = s / d;
        }
    }
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        col.iter_mut().for_each(|x| *x = 0.0);
        col[c] = 1.0;
        for i in 0..n {
            let mut s = col[i];
            for p in 0..i {
                s -= a[i * n + p] * col[p];
            }
            col[i] = s / a[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for p in i + 1..n {
                s -= a[p * n + i] * col[p];
            }
            col[i] = s / a[i * n + i];
        }
        for i in 0..n {
            inv[i * n + c] = col[i];
        }
    }
    inv
}

/// One pass over `source`, returning a `delta`-spectral sparsifier of its
/// Laplacian part with high probability.
pub fn sparsify<T: Real>(
    source: &dyn SddmSource<T>,
    delta: f64,
    cfg: &SparsifyConfig,
) -> Result<SparseGraph<T>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "sparsifier quality {delta} outside (0, 1)"
        )));
    }
    let n = source.dim();
    let budget = budget(delta, n, cfg.budget_constant);
    let m = source.edge_count_hint().max(1) as f64;
    let levels = (m / budget as f64).log2().ceil().max(0.0);
    let delta_level = delta / (2.0 * levels + 2.0);
    let ln_n = (n.max(2) as f64).ln();
    let wanted = (cfg.sample_constant * n as f64 * ln_n / (delta_level * delta_level)).ceil();
    // A reduction must end within the budget, which caps its sample count.
    let capped = m > budget as f64 && wanted > budget as f64;
    let samples = if wanted > budget as f64 {
        budget
    } else {
        wanted as usize
    };
    let mut red = Reducer {
        budget,
        samples,
        rng: ChaCha20Rng::seed_from_u64(cfg.seed),
        reductions: 0,
    };
    let chunk = 2 * budget;
    let mut buffer: Vec<(usize, usize, T)> = Vec::new();
    let mut levels: Vec<Option<Vec<(usize, usize, T)>>> = Vec::new();

    fn carry<T: Real>(
        red: &mut Reducer,
        levels: &mut Vec<Option<Vec<(usize, usize, T)>>>,
        mut block: Vec<(usize, usize, T)>,
    ) {
        let mut lvl = 0;
        loop {
            if lvl == levels.len() {
                levels.push(None);
            }
            match levels[lvl].take() {
                None => {
                    levels[lvl] = Some(block);
                    return;
                }
                Some(mut other) => {
                    other.append(&mut block);
                    block = red.reduce(other);
                    lvl += 1;
                }
            }
        }
    }

    source.for_each_edge(&mut |u, v, w| {
        buffer.push((u, v, w.clone()));
        if buffer.len() >= chunk {
            let full = std::mem::take(&mut buffer);
            let reduced = red.reduce(full);
            carry(&mut red, &mut levels, reduced);
        }
    })?;

    let mut all = buffer;
    for block in levels.into_iter().flatten() {
        all.extend(block);
    }
    let mut edges = coalesce(all);
    if edges.len() > budget {
        edges = red.reduce(edges);
    }
    Ok(SparseGraph {
        n,
        edges,
        delta,
        budget,
        reductions: red.reductions,
        capped,
    })
}

impl<T: Real> SparseGraph<T> {
    /// `x^T L_H x`
    pub fn quadratic_form(&self, x: &[T], prec: Precision) -> T {
        let mut acc = T::zero(prec);
        for (u, v, w) in &self.edges {
            let d = x[*u].clone() - &x[*v];
            acc += d.clone() * &d * w;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdd::ExplicitSddm;

    #[test]
    fn within_budget_is_identity() {
        let p = Precision::DOUBLE;
        let edges = vec![(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)];
        let sys = ExplicitSddm::new(vec![0.0; 3], edges.clone(), p);
        let h = sparsify(&sys, 0.5, &SparsifyConfig::default()).unwrap();
        assert_eq!(h.edges, edges);
        assert_eq!(h.reductions, 0);
        assert_eq!(sys.passes(), 1);
    }

    #[test]
    fn over_budget_input_ends_within_budget() {
        let n = 40;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, 1.0 + ((i + 2 * j) % 3) as f64));
            }
        }
        let sys = ExplicitSddm::new(vec![0.0; n], edges, Precision::DOUBLE);
        let cfg = SparsifyConfig {
            budget_constant: 0.02,
            ..SparsifyConfig::default()
        };
        let h = sparsify(&sys, 0.5, &cfg).unwrap();
        assert!(h.budget < 780);
        assert!(
            h.edges.len() <= h.budget,
            "{} > {}",
            h.edges.len(),
            h.budget
        );
        assert!(h.capped && h.reductions > 0);
        assert!(h.edges.iter().all(|e| e.2 > 0.0));
    }

    #[test]
    fn rejects_bad_quality() {
        let sys = ExplicitSddm::new(vec![1.0], vec![], Precision::DOUBLE);
        assert!(sparsify(&sys, 0.0, &SparsifyConfig::default()).is_err());
        assert!(sparsify(&sys, 1.0, &SparsifyConfig::default()).is_err());
    }

    #[test]
    fn leverage_scores_sum_to_rank() {
        // Sum of w_e R_e over a connected graph is n - 1.
        let edges: Vec<(usize, usize, f64)> = vec![
            (0, 1, 1.0),
            (1, 2, 3.0),
            (2, 0, 2.0),
            (2, 3, 1.0),
            (4, 5, 7.0),
        ];
        let lev = leverage_scores(&edges);
        let s: f64 = lev.iter().sum();
        // two components on 4 and 2 vertices: rank 3 + 1
        assert!((s - 4.0).abs() < 1e-9, "{s}");
        // bridges have leverage 1
        assert!((lev[3] - 1.0).abs() < 1e-9);
        assert!((lev[4] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(budget(0.5, 4, 1.0), 64);
        assert_eq!(budget(0.1, 100, 1.0), 441_409);
    }
}
