//! Property-based invariants: multigraph contraction, serialization,
//! generator determinism, walk-engine structure, and the statistical
//! faithfulness of the red sub-walk.

mod common;

use proptest::prelude::*;

use eproc_core::generators;
use eproc_core::graph::{Graph, VertexSet};
use eproc_core::processes::{
    CheckMode, PhaseKind, ProcessKind, RuleKind, RunConfig, StopRule, run_process,
};
use eproc_core::spectral;

/// Arbitrary small multigraph: up to 10 vertices, up to 16 edges, loops and
/// parallels allowed.
fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..=10).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 1..=16)
            .prop_map(move |edges| Graph::build(n, &edges).unwrap())
    })
}

fn arb_vertex_set(n: usize) -> impl Strategy<Value = VertexSet> {
    proptest::collection::btree_set(0..n, 1..=n).prop_map(VertexSet::new)
}

proptest! {
    #[test]
    fn contraction_preserves_edge_count_and_degree_sum(
        (g, s) in arb_graph().prop_flat_map(|g| {
            let n = g.n();
            (Just(g), arb_vertex_set(n))
        })
    ) {
        let (c, map) = g.contract(&s).unwrap();
        prop_assert_eq!(c.m(), g.m());
        let sum_g: usize = (0..g.n()).map(|v| g.degree(v)).sum();
        let sum_c: usize = (0..c.n()).map(|v| c.degree(v)).sum();
        prop_assert_eq!(sum_g, sum_c);
        prop_assert_eq!(c.degree(map.gamma), g.set_degree(&s));
        c.check_invariants().unwrap();
        if g.is_connected() {
            prop_assert!(c.is_connected());
        }
    }

    #[test]
    fn edge_list_round_trips_exactly(g in arb_graph()) {
        let text = g.to_edge_list();
        let back = Graph::from_edge_list(&text).unwrap();
        prop_assert_eq!(g, back);
    }

    #[test]
    fn girth_matches_brute_force(g in arb_graph()) {
        if g.m() <= 16 {
            prop_assert_eq!(g.girth(), common::brute_force_girth(&g));
        }
    }

    #[test]
    fn random_regular_is_deterministic_and_valid(
        seed in any::<u64>(),
        pick in 0usize..4,
    ) {
        let (n, r) = [(8, 2), (10, 3), (12, 4), (9, 4)][pick];
        let a = generators::random_regular(n, r, seed).unwrap();
        let b = generators::random_regular(n, r, seed).unwrap();
        prop_assert_eq!(a.to_edge_list(), b.to_edge_list());
        prop_assert!(a.is_connected());
        for v in 0..n {
            prop_assert_eq!(a.degree(v), r);
        }
        if r % 2 == 0 {
            prop_assert!(a.all_even_degree());
        }
    }

    /// Structural walk invariants on random even-degree graphs under every
    /// rule: phases close, the blue budget holds, reruns are identical.
    #[test]
    fn e_process_structure_on_random_even_graphs(
        seed in any::<u64>(),
        rule_pick in 0usize..4,
        n_pick in 0usize..3,
    ) {
        let n = [16, 30, 48][n_pick];
        let g = generators::random_regular(n, 4, seed ^ 0xabcd).unwrap();
        let rule = [
            RuleKind::Uniform,
            RuleKind::Fixed,
            RuleKind::RoundRobin,
            RuleKind::Script("default 2\n4 1\n9 3\n".into()),
        ][rule_pick].clone();
        let cfg = RunConfig::new(0, seed)
            .stop(StopRule::EdgeCover)
            .checks(CheckMode::Strict);
        let rec = run_process(&g, ProcessKind::EdgeProcess, &rule, &cfg).unwrap();
        prop_assert!(!rec.timed_out);
        prop_assert!(rec.blue_steps <= g.m() as u64);
        prop_assert_eq!(rec.total_steps, rec.red_steps + rec.blue_steps);
        for phase in &rec.phase_log {
            if phase.kind == PhaseKind::Blue {
                prop_assert!(phase.closed);
                prop_assert_eq!(phase.start_vertex, phase.end_vertex);
            }
        }
        let rerun = run_process(&g, ProcessKind::EdgeProcess, &rule, &cfg).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            serde_json::to_string(&rerun).unwrap()
        );
    }

    /// Hitting a set from stationarity equals hitting the
    /// contracted vertex, for arbitrary proper subsets of small connected
    /// graphs.
    #[test]
    fn set_hitting_equals_contraction(seed in any::<u64>(), size in 1usize..4) {
        let g = generators::random_regular(12, 4, seed).unwrap();
        let members: Vec<usize> = (0..size).map(|i| (seed as usize + 3 * i) % 12).collect();
        let s = VertexSet::new(members);
        if s.len() < g.n() {
            let direct = spectral::hitting_exact(&g, &s, true).unwrap();
            let (cg, map) = g.contract(&s).unwrap();
            let via_gamma =
                spectral::hitting_exact(&cg, &VertexSet::singleton(map.gamma), true).unwrap();
            let rel = (direct.exact - via_gamma.exact).abs() / via_gamma.exact.max(1e-30);
            prop_assert!(rel < 1e-8, "direct {} vs contracted {}", direct.exact, via_gamma.exact);
        }
    }
}

/// Extracting only the red transitions of a long E-process run yields
/// per-vertex next-step frequencies consistent with the simple-random-walk
/// kernel (chi-square at the 0.001 level over >= 1e5 red steps).
#[test]
fn red_subwalk_matches_transition_kernel() {
    use eproc_core::processes::{UniformRandom, WalkState, e_step};
    use rand::SeedableRng;

    let g = generators::random_regular(30, 4, 5).unwrap();
    let mut st = WalkState::new_undirected(&g, 0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314159);
    let mut rule = UniformRandom;

    // counts[v][neighbor slot target] over red transitions only.
    let mut counts: Vec<std::collections::HashMap<usize, u64>> = vec![Default::default(); g.n()];
    let mut red_total = 0u64;
    let steps = 130_000;
    for _ in 0..steps {
        let from = st.position;
        let red_before = st.red_steps;
        e_step(&g, &mut st, &mut rule, &mut rng).unwrap();
        if st.red_steps > red_before {
            *counts[from].entry(st.position).or_insert(0) += 1;
            red_total += 1;
        }
    }
    assert!(red_total >= 100_000, "only {red_total} red steps");

    let mut chi2 = 0.0;
    let mut df = 0.0;
    for (v, bucket) in counts.iter().enumerate() {
        let total: u64 = bucket.values().sum();
        if total == 0 {
            continue;
        }
        let d = g.degree(v) as f64;
        let mut cells = 0;
        for slot_target in g.slots(v).iter().map(|s| s.to).collect::<std::collections::BTreeSet<_>>() {
            let multiplicity = g.multiplicity(v, slot_target)
                * if slot_target == v { 2 } else { 1 };
            let expected = total as f64 * multiplicity as f64 / d;
            if expected < 5.0 {
                continue;
            }
            let observed = *bucket.get(&slot_target).unwrap_or(&0) as f64;
            chi2 += (observed - expected).powi(2) / expected;
            cells += 1;
        }
        if cells > 1 {
            df += (cells - 1) as f64;
        }
    }
    let critical = common::chi_square_quantile(df, 3.090232);
    assert!(
        chi2 < critical,
        "chi2 {chi2:.1} >= critical {critical:.1} at df {df}"
    );
}

/// Kac's formula through the engine's transition kernel on a multigraph
/// with loops and parallel edges.
#[test]
fn kac_on_contracted_multigraph() {
    let g = generators::torus_grid(9).unwrap();
    let (cg, map) = g.contract(&VertexSet::new([0, 1, 2])).unwrap();
    let pi = spectral::stationary(&cg).unwrap();
    let mean =
        eproc_core::processes::mean_return_time(&cg, map.gamma, 50_000, 7).unwrap();
    let want = 1.0 / pi[map.gamma];
    assert!(
        (mean - want).abs() / want < 0.05,
        "mean {mean} vs 1/pi {want}"
    );
}

/// The walk spectrum of a regular graph is the adjacency spectrum divided by
/// the degree, linking the near-Ramanujan certificate to the walk gap.
#[test]
fn p1_gap_linkage() {
    let g = generators::random_regular(64, 6, 99).unwrap();
    let rep = eproc_core::structure::p1_check(&g, 0.1).unwrap();
    let walk_l2 = spectral::spectrum(&g, false).unwrap()[1];
    assert!((rep.lambda2_adjacency / 6.0 - walk_l2).abs() < 1e-9);
}

/// Edge-density at the small-s threshold implies goodness beyond it: a
/// 4-regular graph where no set of size <= s* induces more than its own
/// size in edges cannot have a vertex whose minimal even subgraph fits in
/// s* vertices. Both checks run for real and the implication is verified.
#[test]
fn density_threshold_implies_goodness() {
    use eproc_core::structure::{DensityMode, density_check, graph_l_good};
    // Large enough that the threshold floor(ln n / (2 ln 4e)) reaches 2.
    let n = 20_000;
    let g = generators::random_regular(n, 4, 0xC0_11_A9).unwrap();
    let rep = density_check(&g, 2, DensityMode::Exhaustive).unwrap();
    let threshold = rep.small_s_threshold.unwrap().floor() as usize;
    assert_eq!(threshold, 2);
    assert_eq!(rep.small_s_ok, Some(true), "worst {:?}", rep.worst_excess);

    let goodness = graph_l_good(&g, threshold + 1, None).unwrap();
    match goodness.min_ell {
        None => {} // every vertex exceeds the cap: good
        Some(ell) => assert!(
            ell > threshold,
            "density held at s <= {threshold} but vertex {:?} has ell = {ell}",
            goodness.argmin
        ),
    }
}

/// The probability that a fixed vertex is still unvisited decays roughly
/// geometrically in multiples of the hitting time from stationarity: a
/// qualitative check of the tail behavior behind the cover-time analysis
/// (the constants themselves are not asserted).
#[test]
fn unvisit_probability_decays_geometrically() {
    use eproc_core::processes::random_neighbor;
    use rand::SeedableRng;

    let g = generators::random_regular(64, 4, 4242).unwrap();
    let target = 17usize;
    let h = spectral::hitting_exact(&g, &VertexSet::singleton(target), false)
        .unwrap()
        .exact;
    let horizon = |mult: f64| (mult * h) as u64;
    let trials = 3000;
    let mut unvisited = [0u64; 3]; // at 1h, 2h, 4h
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271828);
    for _ in 0..trials {
        let mut pos = 0usize;
        let mut hit_at: Option<u64> = None;
        for t in 1..=horizon(4.0) {
            pos = random_neighbor(&g, pos, &mut rng).0;
            if pos == target {
                hit_at = Some(t);
                break;
            }
        }
        for (i, mult) in [1.0, 2.0, 4.0].into_iter().enumerate() {
            if hit_at.is_none_or(|t| t > horizon(mult)) {
                unvisited[i] += 1;
            }
        }
    }
    let p: Vec<f64> = unvisited.iter().map(|&c| c as f64 / trials as f64).collect();
    assert!(p[0] > p[1] && p[1] > p[2], "not decreasing: {p:?}");
    // Doubling the horizon should at least square-ish the tail; allow slack.
    assert!(p[1] < 0.75 * p[0], "weak decay 1h -> 2h: {p:?}");
    assert!(p[2] < 0.75 * p[1], "weak decay 2h -> 4h: {p:?}");
}

/// Sweeps with invariant re-assertion enabled run clean end to end.
#[test]
fn sweep_with_checks_enabled() {
    let mut spec = eproc_core::experiments::SweepSpec::new(vec![4], vec![64, 128]);
    spec.trials = 3;
    spec.seed = 5;
    spec.stop = StopRule::EdgeCover;
    spec.checks = true;
    let result = eproc_core::experiments::sweep(&spec).unwrap();
    assert!(!result.any_timeout());
    for row in &result.rows {
        assert!(row.blue_steps <= (row.n * 4 / 2) as u64);
    }
}
