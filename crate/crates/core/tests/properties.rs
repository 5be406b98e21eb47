use proptest::prelude::*;
use semistream::ipm::{path_follow, IpmParams, IterationInfo, Profile};
use semistream::lp::{
    slack_stream, ConstraintRows, CoverRows, DemandOracle, UnitDemands, WeightDemands,
};
use semistream::matching::{max_weight_matching, MatchingConfig};
use semistream::scalar::Precision;
use semistream::sdd::{stream_ls, StreamLsConfig};
use semistream::stream::GraphStream;
use semistream::vertex_cover::{
    cover_objective, extract_tight, mvc_tight_set, to_y_form, MvcConfig,
};
use semistream_oracles::central::DenseLp;
use semistream_oracles::dense::{a_norm, lu_solve};
use semistream_oracles::gen;

fn fast() -> MvcConfig {
    MvcConfig::with_profile(Profile::Fast)
}

fn graph(nl: u32, nr: u32, p: f64, w: u64, seed: u64) -> Option<GraphStream> {
    let edges = gen::bipartite(nl, nr, p, w, seed);
    (!edges.is_empty()).then(|| GraphStream::from_edges(nl, nr, &edges).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counted_passes_match_the_schedule(seed in 0u64..1000, n in 2u32..6) {
        let Some(g) = graph(n, n, 0.6, 5, seed) else { return Ok(()) };
        let rep = mvc_tight_set(&g, WeightDemands, &cover_objective(&g), seed, &fast(), None).unwrap();
        prop_assert_eq!(rep.passes, rep.analytic_passes);
        // Scalars must fit the default working precision. The ratio itself
        // tends to about 5 but exceeds 8 for L <= 7, where the constant
        // offsets of the t range dominate.
        let l = rep.bit_complexity as f64;
        prop_assert!(rep.magnitude_ratio * l <= 8.0 * l + 64.0, "{}", rep.magnitude_ratio);
    }

    #[test]
    fn rounding_is_stable_near_the_optimum(seed in 0u64..1000, n in 2u32..5, noise in prop::collection::vec(-1.0f64..1.0, 10)) {
        let Some(g) = graph(n, n, 0.7, 3, seed) else { return Ok(()) };
        let rep = mvc_tight_set(&g, WeightDemands, &cover_objective(&g), seed, &fast(), None).unwrap();
        let rows = CoverRows::new(&g, WeightDemands).with_box(rep.bit_complexity + 1).unwrap();
        let dim = 2 * n as usize;
        let exact: Vec<f64> = rep.tight.x.iter().map(|&v| v as f64).collect();
        prop_assert_eq!(&extract_tight(&rows, &exact).unwrap(), &rep.tight);
        let near: Vec<f64> = exact.iter().zip(&noise).map(|(v, e)| v + e * 0.2 / dim as f64).collect();
        prop_assert_eq!(&extract_tight(&rows, &near).unwrap(), &rep.tight);
        // y form is a feasible cover
        let y = to_y_form(&rep.tight.x, n as usize);
        prop_assert_eq!(to_y_form(&y, n as usize), rep.tight.x.clone());
        for e in g.collect_edges().unwrap() {
            let b = WeightDemands.demand(&e).unwrap();
            prop_assert!(y[e.u as usize] + y[n as usize + e.v as usize] >= b);
        }
        prop_assert!(y.iter().all(|v| *v >= 0));
    }

    #[test]
    fn infeasible_points_are_rejected(seed in 0u64..1000, pick in 0usize..100) {
        let Some(g) = graph(3, 3, 0.7, 1, seed) else { return Ok(()) };
        let rows = CoverRows::new(&g, UnitDemands);
        let edges = g.collect_edges().unwrap();
        let e = &edges[pick % edges.len()];
        // feasible everywhere except at the chosen edge
        let mut x = vec![2.0; 3];
        x.extend(vec![-2.0; 3]);
        x[e.u as usize] = 0.5;
        x[3 + e.v as usize] = 0.0;
        let mut seen = 0;
        let r = slack_stream(&rows, &x, &mut |_, s: &f64| {
            assert!(*s > 0.0);
            seen += 1;
            Ok(())
        });
        prop_assert!(r.is_err());
        prop_assert!(seen < rows.num_rows());
    }

    #[test]
    fn centrality_shifts_with_t(seed in 0u64..1000, t in 0.5f64..20.0, ratio in 0.5f64..2.0) {
        let (rows, c, x0) = gen::small_lp(4, 6, seed);
        let lp = DenseLp::<f64>::from_rows(&rows, Precision::DOUBLE).unwrap();
        let t2 = t * ratio;
        let lhs = lp.phi(&c, &x0, &t2, &x0);
        let rhs = ratio * lp.phi(&c, &x0, &t, &x0) + (ratio - 1.0).abs() * lp.psi(&x0, &x0);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn solver_error_contracts(seed in 0u64..1000, n in 5usize..40) {
        let sys = gen::sddm(n, 3 * n, seed);
        let dense = sys.to_dense_f64();
        let b = gen::gaussian_vector(n, &mut gen::rng(seed));
        let exact = lu_solve(&dense, &b).unwrap();
        let cfg = StreamLsConfig::default();
        let mut errs = Vec::new();
        let mut obs = |_: u32, x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(p, q)| p - q).collect();
            errs.push(a_norm(&dense, &e));
        };
        let rep = stream_ls(&sys, &b, 1e-6, &cfg, Some(&mut obs)).unwrap();
        let bound = 4.0 * rep.delta;
        let scale = a_norm(&dense, &exact);
        for (k, e) in errs.iter().enumerate() {
            prop_assert!(*e <= bound.powi(k as i32) * scale * (1.0 + 1e-9) + 1e-12 * scale);
        }
        prop_assert!(*errs.last().unwrap() <= 1e-6 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn best_matching_is_kept(seed in 0u64..1000, n in 2u32..5) {
        let Some(g) = graph(n, n, 0.6, 9, seed) else { return Ok(()) };
        let cfg = MatchingConfig { mvc: fast(), max_trials: Some(3), ..MatchingConfig::default() };
        let r = max_weight_matching(&g, seed, &cfg).unwrap();
        for t in &r.trials {
            prop_assert!(r.matching.weight >= t.weight);
        }
    }
}

#[test]
fn each_rigorous_step_costs_the_same_passes() {
    let (rows, c, x0) = gen::small_lp(3, 4, 9);
    let p = IpmParams::rigorous(0.01, rows.num_rows());
    let lp = DenseLp::<f64>::from_rows(&rows, Precision::DOUBLE).unwrap();
    let start = lp.central_path_reference(&c, &1.0, &x0, 1e-12).unwrap();
    let mut seen = Vec::new();
    let mut obs = |info: &IterationInfo<f64>| seen.push(info.passes);
    path_follow(&rows, &c, start, &1.0, &1.2, &p, Some(&mut obs)).unwrap();
    assert!(seen.len() > 10);
    let each = p.passes_per_iteration(3);
    for w in seen.windows(2) {
        assert_eq!(w[1] - w[0], each);
    }
}

#[test]
fn fast_profile_recentres_after_long_steps() {
    // Used to fall off the path in phase 2 and round from x_0 = 0.36.
    let g = graph(16, 16, 0.6, 1, 1).unwrap();
    let rep = mvc_tight_set(&g, WeightDemands, &cover_objective(&g), 1, &fast(), None).unwrap();
    assert_eq!(rep.passes, rep.analytic_passes);
    let y = rep.tight.y(16);
    for e in g.collect_edges().unwrap() {
        assert!(y[e.u as usize] + y[16 + e.v as usize] >= 1);
    }
}
