//! Fixture-level checks that cut across modules: the rounded measured-ratio
//! matrix, scalar oracles for the measures, and agreement between the
//! aggregation and diagnostics views of the 1-medoid problem.

mod common;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pcmclust::synthetic::random_pcm_with;
use pcmclust::{
    agglomerate, aggregate_by_medoid, aggregate_geometric, dissim, elbow, DissimilarityMatrix,
    HeightTransform, Linkage, Measure, Pcm,
};

#[test]
fn measured_ratio_matrix_is_consistent_up_to_print_rounding() {
    let matrix = common::measured_ratio_matrix();
    assert!(matrix.is_consistent(5e-3).unwrap());
    assert!(!matrix.is_consistent(1e-6).unwrap());
    // Strict validation rejects the printed reciprocals; repair accepts.
    let rows: Vec<Vec<f64>> = matrix
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(Option::unwrap).collect())
        .collect();
    let mut printed = rows.clone();
    printed[1][0] = 0.591;
    printed[2][0] = 3.544;
    printed[2][1] = 5.991;
    printed[3][0] = 1.300;
    printed[3][1] = 2.198;
    printed[3][2] = 0.367;
    assert!(Pcm::from_rows("strict", &printed).is_err());
    assert!(Pcm::from_rows_repaired("repaired", &printed).is_ok());
}

#[test]
fn d1_matches_an_independent_scalar_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let a = random_pcm_with("a", 4, 9.0, &mut rng);
        let b = random_pcm_with("b", 4, 9.0, &mut rng);
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let d = a.get(i, j).unwrap().ln() - b.get(i, j).unwrap().ln();
                sum += d * d;
            }
        }
        let got = dissim(&a, &b, Measure::D1).unwrap();
        assert!((got - sum.sqrt()).abs() <= 1e-12);
    }
}

#[test]
fn geometric_mean_is_a_fixed_point_on_shared_preferences() {
    // Consistent matrices generated by the same weight vector aggregate to
    // that very matrix.
    let weights = [0.42, 0.28, 0.18, 0.12];
    let copies: Vec<Pcm> = (0..5)
        .map(|i| Pcm::consistent_from_weights(format!("dm{i}"), &weights).unwrap())
        .collect();
    let outcome = aggregate_geometric(&copies).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = weights[i] / weights[j];
            assert!((outcome.aggregate.get(i, j).unwrap() - want).abs() <= 1e-12);
        }
    }
    for (got, want) in outcome.weights.weights().iter().zip(weights.iter()) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn medoid_aggregation_objective_equals_the_elbow_at_k1() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let pcms: Vec<Pcm> = (0..7)
            .map(|i| random_pcm_with(format!("dm{i}"), 4, 9.0, &mut rng))
            .collect();
        let outcome = aggregate_by_medoid(&pcms, Measure::D3).unwrap();
        assert!(pcms.iter().any(|p| p == &outcome.aggregate));

        let delta = DissimilarityMatrix::build(&pcms, Measure::D3).unwrap();
        let series = elbow(&delta, 1, &BTreeSet::new()).unwrap();
        let medoid_index = pcms
            .iter()
            .position(|p| p == &outcome.aggregate)
            .expect("aggregate is an input");
        let objective: f64 = (0..pcms.len()).map(|i| delta.get(i, medoid_index)).sum();
        assert!((series.points[0].1 - objective).abs() <= 1e-12);
    }
}

#[test]
fn square_transform_commutes_with_single_linkage() {
    // min is monotone, so single linkage on squared dissimilarities merges
    // in the same order with squared heights throughout the tree.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let pcms: Vec<Pcm> = (0..8)
        .map(|i| random_pcm_with(format!("dm{i}"), 5, 9.0, &mut rng))
        .collect();
    let delta = DissimilarityMatrix::build(&pcms, Measure::D1).unwrap();
    let plain = agglomerate(&delta, Linkage::Single, HeightTransform::Identity);
    let squared = agglomerate(&delta, Linkage::Single, HeightTransform::Square);
    for (p, s) in plain.merges.iter().zip(&squared.merges) {
        assert_eq!((p.a, p.b), (s.a, s.b));
        assert!((s.height - p.height * p.height).abs() <= 1e-12);
    }
}
