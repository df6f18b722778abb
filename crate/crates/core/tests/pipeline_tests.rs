//! End-to-end pipeline checks on small instances: the cut sandwich, the
//! closed-form expected cut as an unbiasedness reference, and scheme
//! behavior on the five-cycle.

use stickycut::{
    brute_force_maxcut, cut_value, expected_cut_arcsin, run_pipeline, sdp_objective,
    solve_maxcut_sdp, verify_identity, DiffusionConfig, RngStream, RoundingScheme, SdpConfig,
    SpeedFunction, WeightedGraph,
};

fn fast_cfg() -> DiffusionConfig {
    DiffusionConfig {
        step_h: 5e-3,
        t_max: 10.0,
        ..Default::default()
    }
}

#[test]
fn c5_hyperplane_pipeline_finds_the_optimum() {
    let g = WeightedGraph::cycle(5).unwrap();
    let result = run_pipeline(
        &g,
        &RoundingScheme::Hyperplane,
        200,
        &SdpConfig::for_vertices(5),
        &fast_cfg(),
        11,
    )
    .unwrap();
    assert_eq!(result.cut_value, 4.0);
    assert_eq!(result.exact_value, Some(4.0));
    assert_eq!(result.ratio_vs_exact, Some(1.0));
    assert!(result.sdp_value >= 4.0);
    assert!((result.sdp_value - 4.522542485937369).abs() < 1e-4);
    // Integrality ratio of C5 ~ 0.8845.
    assert!((result.cut_value / result.sdp_value - 0.8845).abs() < 1e-3);
}

#[test]
fn c5_sticky_pipeline_matches_the_expected_cut() {
    let g = WeightedGraph::cycle(5).unwrap();
    let result = run_pipeline(
        &g,
        &RoundingScheme::Xi,
        200,
        &SdpConfig::for_vertices(5),
        &fast_cfg(),
        23,
    )
    .unwrap();
    assert_eq!(result.cut_value, 4.0);
    assert_eq!(result.ratio_vs_exact, Some(1.0));
    let dev = (result.mean_cut - result.expected_cut_arcsin).abs();
    assert!(
        dev <= 3.0 * result.mean_cut_std_error + 0.02,
        "mean {} vs expected {} ({} SE)",
        result.mean_cut,
        result.expected_cut_arcsin,
        dev / result.mean_cut_std_error
    );
}

#[test]
fn single_edge_pipeline_is_exact_for_every_scheme() {
    let g = WeightedGraph::from_edges(vec![(0, 1, 2.0)]).unwrap();
    for scheme in [
        RoundingScheme::Xi,
        RoundingScheme::Power(1.0),
        RoundingScheme::Hyperplane,
    ] {
        let result = run_pipeline(
            &g,
            &scheme,
            8,
            &SdpConfig {
                rank_r: 2,
                ..SdpConfig::for_vertices(2)
            },
            &fast_cfg(),
            5,
        )
        .unwrap();
        // Antipodal vectors absorb to opposite signs (or project to opposite
        // halves) in every trial.
        assert_eq!(result.cut_value, 2.0, "scheme {}", scheme.label());
        assert!((result.ratio_vs_sdp - 1.0).abs() < 1e-9);
        assert!((result.mean_cut - 2.0).abs() < 1e-12);
    }
}

#[test]
fn sandwich_holds_on_random_graphs() {
    let mut stream = RngStream::new(60, 0);
    for trial in 0..6 {
        let n = 5 + trial % 4;
        let g = WeightedGraph::random_gnp(n, 0.5, &mut stream).unwrap();
        let sdp_cfg = SdpConfig {
            init_seed: trial as u64,
            ..SdpConfig::for_vertices(n)
        };
        let result = run_pipeline(
            &g,
            &RoundingScheme::Xi,
            40,
            &sdp_cfg,
            &fast_cfg(),
            trial as u64,
        )
        .unwrap();
        let (exact, _) = brute_force_maxcut(&g).unwrap();
        assert!(result.cut_value <= exact + 1e-12);
        assert!(exact <= result.sdp_value + 1e-6);
        assert!(result.cut_value <= g.total_weight() + 1e-12);
        assert!(result.cut_value >= 0.0);
    }
}

#[test]
fn unbiasedness_of_the_sticky_scheme_on_a_fixed_embedding() {
    // Mean single-trial cut over 10^4 replicas must sit within 3 SE of the
    // closed-form expectation. Small graph keeps this quick.
    let g = WeightedGraph::complete(3).unwrap();
    let sdp_cfg = SdpConfig {
        rank_r: 3,
        ..SdpConfig::for_vertices(3)
    };
    let cfg = DiffusionConfig::default();
    let result = run_pipeline(&g, &RoundingScheme::Xi, 10_000, &sdp_cfg, &cfg, 77).unwrap();
    let dev = (result.mean_cut - result.expected_cut_arcsin).abs();
    assert!(
        dev <= 3.0 * result.mean_cut_std_error,
        "mean {} vs expected {}: {} SE",
        result.mean_cut,
        result.expected_cut_arcsin,
        dev / result.mean_cut_std_error
    );
}

#[test]
fn identity_smoke_run_with_power_speed() {
    let cfg = DiffusionConfig {
        step_h: 0.02,
        t_max: 8.0,
        ..Default::default()
    };
    // The power-family speeds satisfy the admissibility conditions but are
    // NOT expected to reproduce the arcsine law exactly; this only checks
    // the harness runs them and produces sane estimates.
    let speed = SpeedFunction::power(1.0).unwrap();
    let report = verify_identity(&[0.0, 0.6], 2000, &speed, &cfg, 3).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert!(row.estimate.abs() <= 1.0);
        assert!(row.std_error > 0.0);
    }
    // At rho = 0 every symmetric scheme gives zero correlation.
    assert!(report.rows[0].estimate.abs() < 0.08);
}

#[test]
fn solver_embedding_feeds_expected_cut() {
    let g = WeightedGraph::cycle(5).unwrap();
    let sol = solve_maxcut_sdp(&g, &SdpConfig::for_vertices(5)).unwrap();
    let expected = expected_cut_arcsin(&g, &sol.embedding).unwrap();
    // alpha_GW * sdp is a lower bound on the expected cut.
    let alpha = stickycut::gw_constant();
    let sdp = sdp_objective(&g, &sol.embedding).unwrap();
    assert!(expected >= alpha * sdp - 1e-9);
    assert!(expected <= sdp + 1e-9);
}

#[test]
fn pipeline_rejects_zero_trials_and_propagates_graph_errors() {
    let g = WeightedGraph::cycle(5).unwrap();
    assert!(run_pipeline(
        &g,
        &RoundingScheme::Xi,
        0,
        &SdpConfig::for_vertices(5),
        &fast_cfg(),
        0
    )
    .is_err());

    let zero = WeightedGraph::new(3, vec![(0, 1, 0.0)]).unwrap();
    assert!(run_pipeline(
        &zero,
        &RoundingScheme::Xi,
        4,
        &SdpConfig::for_vertices(3),
        &fast_cfg(),
        0
    )
    .is_err());
}

#[test]
fn best_of_trials_dominates_the_mean() {
    let g = WeightedGraph::cycle(7).unwrap();
    let result = run_pipeline(
        &g,
        &RoundingScheme::Hyperplane,
        64,
        &SdpConfig::for_vertices(7),
        &fast_cfg(),
        1,
    )
    .unwrap();
    assert!(result.cut_value >= result.mean_cut - 1e-12);
    let recomputed = cut_value(&g, &result.signs).unwrap();
    assert_eq!(recomputed, result.cut_value);
}
