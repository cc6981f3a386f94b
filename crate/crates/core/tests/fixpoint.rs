mod common;

use common::*;
use rand::SeedableRng;
use rustlight::dataflow::{check_fixpoint, solve, solve_with, WorklistOrder};

#[test]
fn every_analysis_reaches_a_post_fixpoint_on_the_corpus() {
    let checked = corpus_fixpoints().unwrap();
    assert!(checked >= 40);
}

#[test]
fn worklist_matches_chaotic_iteration_on_gen_kill() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 8);
        let a = GenKill::random(&mut rng, g.succ.len());
        let k = solve(&g, &a).unwrap();
        assert_eq!(k, chaotic(&g, &a, &mut rng));
        assert_eq!(k, solve_with(&g, &a, WorklistOrder::Lifo).unwrap());
        check_fixpoint(&g, &a, &k).unwrap();
    }
}

#[test]
fn worklist_matches_chaotic_iteration_on_loan_states() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 8);
        let a = LoanOps::random(&mut rng, g.succ.len());
        let k = solve(&g, &a).unwrap();
        assert_eq!(k, chaotic(&g, &a, &mut rng));
        check_fixpoint(&g, &a, &k).unwrap();
    }
}
