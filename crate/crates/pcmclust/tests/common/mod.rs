//! Shared fixtures: reference matrices with independently verified
//! consistency ratios and weight vectors, plus the 3x3 triple that breaks
//! the triangle inequality for the cross-product measures.
//!
//! The reference matrices are transcribed from three-decimal tables, so they
//! are built in repair mode and every expected value carries a tolerance
//! covering that rounding.

// Each test binary uses a different subset of the fixtures.
#![allow(dead_code)]

use pcmclust::Pcm;

pub fn pcm(label: &str, rows: &[&[f64]]) -> Pcm {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Pcm::from_rows_repaired(label, &rows).expect("fixture matrix is valid")
}

/// The triple where the cross-product measures violate the triangle
/// inequality: only entry (0,1) varies, taking 2, 3, 4.
pub fn triangle_counterexample() -> (Pcm, Pcm, Pcm) {
    let mk = |label: &str, v: f64| {
        Pcm::from_rows(
            label,
            &[
                vec![1.0, v, 1.0],
                vec![1.0 / v, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        )
        .expect("fixture matrix is valid")
    };
    (mk("A", 2.0), mk("B", 3.0), mk("C", 4.0))
}

/// 4x4 reference matrices with known consistency ratios (set A).
pub fn cr_reference_set_a() -> Vec<(Pcm, f64)> {
    vec![
        (
            pcm(
                "a1",
                &[
                    &[1.0, 2.0, 7.0, 3.0],
                    &[0.5, 1.0, 5.0, 2.0],
                    &[0.143, 0.2, 1.0, 0.5],
                    &[0.333, 0.5, 2.0, 1.0],
                ],
            ),
            0.007,
        ),
        (
            pcm(
                "a2",
                &[
                    &[1.0, 1.5, 0.5, 0.333],
                    &[0.667, 1.0, 0.333, 0.333],
                    &[2.0, 3.0, 1.0, 0.667],
                    &[3.0, 3.0, 1.5, 1.0],
                ],
            ),
            0.008,
        ),
        (
            pcm(
                "a3",
                &[
                    &[1.0, 3.0, 5.0, 0.4],
                    &[0.333, 1.0, 3.0, 0.143],
                    &[0.2, 0.333, 1.0, 0.111],
                    &[2.5, 7.0, 9.0, 1.0],
                ],
            ),
            0.028,
        ),
        (
            pcm(
                "a4",
                &[
                    &[1.0, 6.0, 3.0, 3.0],
                    &[0.167, 1.0, 0.2, 0.2],
                    &[0.333, 5.0, 1.0, 0.5],
                    &[0.333, 5.0, 2.0, 1.0],
                ],
            ),
            0.063,
        ),
    ]
}

/// 4x4 reference matrices with known consistency ratios (set B; the first
/// matrix coincides with set A's).
pub fn cr_reference_set_b() -> Vec<(Pcm, f64)> {
    vec![
        (cr_reference_set_a().remove(0).0, 0.007),
        (
            pcm(
                "b2",
                &[
                    &[1.0, 1.5, 0.333, 0.2],
                    &[0.667, 1.0, 0.333, 0.2],
                    &[3.0, 3.0, 1.0, 0.5],
                    &[5.0, 5.0, 2.0, 1.0],
                ],
            ),
            0.009,
        ),
        (
            pcm(
                "b3",
                &[
                    &[1.0, 4.0, 1.5, 2.0],
                    &[0.25, 1.0, 0.333, 0.667],
                    &[0.667, 3.0, 1.0, 3.0],
                    &[0.5, 1.5, 0.333, 1.0],
                ],
            ),
            0.022,
        ),
        (
            pcm(
                "b4",
                &[
                    &[1.0, 5.0, 3.0, 1.0],
                    &[0.2, 1.0, 0.5, 0.143],
                    &[0.333, 2.0, 1.0, 0.2],
                    &[1.0, 7.0, 5.0, 1.0],
                ],
            ),
            0.013,
        ),
    ]
}

/// Reference group representatives with known weight vectors.
pub fn one_cluster_reference_a() -> (Pcm, [f64; 4]) {
    (
        pcm(
            "rep-a",
            &[
                &[1.0, 2.0, 3.0, 1.5],
                &[0.5, 1.0, 2.0, 0.5],
                &[0.333, 0.5, 1.0, 0.25],
                &[0.667, 2.0, 4.0, 1.0],
            ],
        ),
        [0.381, 0.185, 0.099, 0.334],
    )
}

pub fn one_cluster_reference_b() -> (Pcm, [f64; 4]) {
    (
        pcm(
            "rep-b",
            &[
                &[1.0, 2.0, 1.5, 1.0],
                &[0.5, 1.0, 0.667, 0.667],
                &[0.667, 1.5, 1.0, 0.667],
                &[1.0, 1.5, 1.5, 1.0],
            ],
        ),
        [0.319, 0.166, 0.219, 0.296],
    )
}

/// A matrix built from measured quantity ratios: consistent up to the
/// three-decimal rounding of its entries.
pub fn measured_ratio_matrix() -> Pcm {
    pcm(
        "measured",
        &[
            &[1.0, 1.691, 0.282, 0.770],
            &[0.591, 1.0, 0.167, 0.455],
            &[3.544, 5.991, 1.0, 2.725],
            &[1.300, 2.198, 0.367, 1.0],
        ],
    )
}
