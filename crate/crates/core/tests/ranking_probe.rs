//! Regression probe for the frontier-ranking fixtures: each cue type must
//! fool exactly the scorer variant it was designed to fool.

use semnav_core::geom::Vec2;
use semnav_core::memory::MergeConfig;
use semnav_core::oracle::{Instruction, MockOracle, SemanticOracle};
use semnav_core::sim::scenegen::{divergence_tables, ranking, RankingCue};
use semnav_core::utility::{build_sources, score_all_seq, UtilityConfig};
use semnav_core::world::extract_frontiers;

/// Does the variant rank a correct-side frontier first?
fn ranks_correct(fx: &semnav_core::sim::scenegen::RankingFixture, ucfg: &UtilityConfig) -> bool {
    let oracle = MockOracle::new(divergence_tables(), 0.8);
    let instruction = Instruction::new(&fx.instruction, "rank");
    let decomposition = oracle.decompose(&instruction).unwrap();
    let (grid, graph) = fx.build_state(&MergeConfig::default());
    let frontiers = extract_frontiers(&grid, 0.2, 5.0);
    assert!(frontiers.len() >= 2, "need both arms: got {}", frontiers.len());
    let sources = build_sources(&graph, &instruction, &decomposition, &oracle, ucfg);
    let scores = score_all_seq(&frontiers, &sources, &graph, &oracle, &instruction, ucfg);
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] + 1e-12 {
            best = i;
        }
    }
    let pick = frontiers[best].centroid;
    let detail: Vec<String> = frontiers
        .iter()
        .zip(&scores)
        .map(|(f, s)| format!("({:.1},{:.1})={:.3}", f.centroid.x, f.centroid.y, s))
        .collect();
    println!(
        "  l1={} l2={} pick=({:.1},{:.1}) | {}",
        ucfg.lambda_struct,
        ucfg.lambda_vis,
        pick.x,
        pick.y,
        detail.join(" ")
    );
    pick.dist(fx.correct) < pick.dist(fx.wrong)
}

fn variants() -> (UtilityConfig, UtilityConfig, UtilityConfig) {
    let full = UtilityConfig::default();
    let mut no_struct = UtilityConfig::default();
    no_struct.lambda_struct = 0.0;
    let mut no_vis = UtilityConfig::default();
    no_vis.lambda_vis = 0.0;
    (full, no_struct, no_vis)
}

#[test]
fn struct_correct_fixtures_fool_the_no_struct_variant() {
    let (full, no_struct, no_vis) = variants();
    for seed in 0..5 {
        println!("struct-correct seed {seed}");
        let fx = ranking(RankingCue::StructCorrect, seed);
        assert!(ranks_correct(&fx, &full), "full wrong on seed {seed}");
        assert!(ranks_correct(&fx, &no_vis), "no-vis wrong on seed {seed}");
        assert!(!ranks_correct(&fx, &no_struct), "no-struct saw through seed {seed}");
    }
}

#[test]
fn vis_correct_fixtures_fool_the_no_vis_variant() {
    let (full, no_struct, no_vis) = variants();
    for seed in 0..5 {
        println!("vis-correct seed {seed}");
        let fx = ranking(RankingCue::VisCorrect, seed);
        assert!(ranks_correct(&fx, &full), "full wrong on seed {seed}");
        assert!(ranks_correct(&fx, &no_struct), "no-struct wrong on seed {seed}");
        assert!(!ranks_correct(&fx, &no_vis), "no-vis saw through seed {seed}");
    }
}

#[test]
fn both_correct_fixtures_are_easy_for_everyone() {
    let (full, no_struct, no_vis) = variants();
    for seed in 0..5 {
        println!("both-correct seed {seed}");
        let fx = ranking(RankingCue::BothCorrect, seed);
        assert!(ranks_correct(&fx, &full));
        assert!(ranks_correct(&fx, &no_struct));
        assert!(ranks_correct(&fx, &no_vis));
    }
}

#[test]
fn frontier_anchor_association_separates_the_arms() {
    // the left and right frontiers must carry different anchors, otherwise
    // the visual cue cannot differ between them
    let fx = ranking(RankingCue::VisCorrect, 1);
    let (grid, _) = fx.build_state(&MergeConfig::default());
    let frontiers = extract_frontiers(&grid, 0.2, 5.0);
    let near = |m: Vec2| {
        frontiers
            .iter()
            .min_by(|a, b| a.centroid.dist(m).total_cmp(&b.centroid.dist(m)))
            .unwrap()
    };
    let right = near(fx.correct);
    let left = near(fx.wrong);
    assert_ne!(right.anchor_id, left.anchor_id);
}
