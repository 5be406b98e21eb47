//! Exact maximum-weight bipartite matching: Hungarian algorithm and
//! exhaustive enumeration.

/// Edges are `(u, v, w)` with `u < n_left`, `v < n_right`.
pub type WeightedEdge = (u32, u32, i128);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleMatching {
    pub weight: i128,
    /// Indices into the edge list, ascending.
    pub edges: Vec<usize>,
}

/// Maximum-weight matching (not necessarily perfect) with non-negative
/// weights, via the O(n^3) Hungarian algorithm on the square matrix padded
/// with zero-weight non-edges.
pub fn hungarian_mwm(n_left: usize, n_right: usize, edges: &[WeightedEdge]) -> OracleMatching {
    let n = n_left.max(n_right);
    if n == 0 || edges.is_empty() {
        return OracleMatching {
            weight: 0,
            edges: Vec::new(),
        };
    }
    // cost = -weight, best edge per pair
    let mut best: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
    for (k, &(u, v, w)) in edges.iter().enumerate() {
        assert!(w >= 0, "weights must be non-negative");
        let cell = &mut best[u as usize][v as usize];
        if cell.is_none_or(|j| edges[j].2 < w) {
            *cell = Some(k);
        }
    }
    let cost = |i: usize, j: usize| -> i128 { best[i][j].map_or(0, |k| -edges[k].2) };
    // Classic potentials formulation, 1-based with a sentinel column 0.
    let inf = i128::MAX / 4;
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut chosen = Vec::new();
    for j in 1..=n {
        let i = p[j];
        if i > 0 {
            if let Some(k) = best[i - 1][j - 1] {
                if edges[k].2 > 0 {
                    chosen.push(k);
                }
            }
        }
    }
    chosen.sort_unstable();
    OracleMatching {
        weight: chosen.iter().map(|&k| edges[k].2).sum(),
        edges: chosen,
    }
}

/// Every matching of the graph, as sorted edge-index lists (the empty one
/// included).
pub fn all_matchings(n_left: usize, n_right: usize, edges: &[WeightedEdge]) -> Vec<Vec<usize>> {
    fn rec(
        k: usize,
        edges: &[WeightedEdge],
        used_l: &mut Vec<bool>,
        used_r: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == edges.len() {
            out.push(cur.clone());
            return;
        }
        rec(k + 1, edges, used_l, used_r, cur, out);
        let (u, v, _) = edges[k];
        if !used_l[u as usize] && !used_r[v as usize] {
            used_l[u as usize] = true;
            used_r[v as usize] = true;
            cur.push(k);
            rec(k + 1, edges, used_l, used_r, cur, out);
            cur.pop();
            used_l[u as usize] = false;
            used_r[v as usize] = false;
        }
    }
    let mut out = Vec::new();
    rec(
        0,
        edges,
        &mut vec![false; n_left],
        &mut vec![false; n_right],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Exhaustive maximum-weight matching. Also reports how many matchings
/// attain the maximum.
pub fn brute_force_mwm(
    n_left: usize,
    n_right: usize,
    edges: &[WeightedEdge],
) -> (OracleMatching, usize) {
    let mut best = OracleMatching {
        weight: 0,
        edges: Vec::new(),
    };
    let mut ties = 0;
    for m in all_matchings(n_left, n_right, edges) {
        let w: i128 = m.iter().map(|&k| edges[k].2).sum();
        if w > best.weight || (best.edges.is_empty() && ties == 0) {
            best = OracleMatching {
                weight: w,
                edges: m,
            };
            ties = 1;
        } else if w == best.weight {
            ties += 1;
        }
    }
    (best, ties)
}

/// Maximum matching size via the Hungarian solver on unit weights.
pub fn max_cardinality(n_left: usize, n_right: usize, edges: &[(u32, u32)]) -> usize {
    let e: Vec<WeightedEdge> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
    hungarian_mwm(n_left, n_right, &e).edges.len()
}
