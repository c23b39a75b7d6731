// SPDX-License-Identifier: Apache-2.0

use nlf_core::graph::{Budgets, Completeness, ExchangeGraph};
use nlf_core::nlf::{verify_nlf, NlfConfig};
use nlf_core::seed::ExchangeMatrix;

fn graph(rows: Vec<Vec<i64>>) -> ExchangeGraph {
    ExchangeGraph::enumerate(&ExchangeMatrix::from_rows(rows).unwrap(), Budgets::default()).unwrap()
}

fn a4() -> Vec<Vec<i64>> {
    vec![
        vec![0, 1, 0, 0],
        vec![-1, 0, 1, 0],
        vec![0, -1, 0, 1],
        vec![0, 0, -1, 0],
    ]
}

fn d4() -> Vec<Vec<i64>> {
    vec![
        vec![0, 1, 0, 0],
        vec![-1, 0, 1, 1],
        vec![0, -1, 0, 0],
        vec![0, -1, 0, 0],
    ]
}

// vertex counts are the type-specific Catalan numbers; every vertex has degree n
#[test]
fn rank_three_and_four_counts() {
    let cases = [
        (vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -2, 0]], 20),
        (vec![vec![0, 1, 0], vec![-1, 0, 2], vec![0, -1, 0]], 20),
        (a4(), 42),
        (d4(), 50),
    ];
    for (rows, vertices) in cases {
        let n = rows.len();
        let g = graph(rows);
        assert!(g.is_complete());
        assert_eq!(g.num_vertices(), vertices);
        assert_eq!(g.num_edges(), vertices * n / 2);
        assert!(g.structure_report().is_clean());
    }
}

#[test]
fn orientation_does_not_change_the_graph_shape() {
    // A_3 with a sink in the middle
    let g = graph(vec![vec![0, 1, 0], vec![-1, 0, -1], vec![0, 1, 0]]);
    assert_eq!((g.num_vertices(), g.num_edges()), (14, 21));
}

#[test]
fn nlf_holds_on_a4_and_d4() {
    for rows in [a4(), d4()] {
        let g = graph(rows);
        let r = verify_nlf(&g, NlfConfig::default()).unwrap();
        let n = g.num_vertices();
        assert_eq!(r.pairs_checked, n * (n - 1) / 2);
        assert!(r.holds(), "{}", r.summary());
    }
}

#[test]
fn disconnected_rank_two_is_a_square() {
    // A_1 x A_1
    let g = graph(vec![vec![0, 0], vec![0, 0]]);
    assert_eq!((g.num_vertices(), g.num_edges()), (4, 4));
    assert!(verify_nlf(&g, NlfConfig::default()).unwrap().holds());
}

#[test]
fn affine_type_exceeds_vertex_budget() {
    let m = ExchangeMatrix::from_rows(vec![vec![0, 2], vec![-2, 0]]).unwrap();
    let g = ExchangeGraph::enumerate(
        &m,
        Budgets {
            max_vertices: 50,
            max_depth: 1000,
        },
    )
    .unwrap();
    assert_eq!(g.completeness(), Completeness::VertexBudgetExceeded);
    assert!(verify_nlf(&g, NlfConfig::default()).is_err());
}
