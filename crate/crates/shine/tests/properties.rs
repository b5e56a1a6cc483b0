//! Randomized invariant checks over the public API.

use std::collections::BTreeSet;

use proptest::prelude::*;

use shine::config::TrainConfig;
use shine::eval::{accuracy, micro_f1};
use shine::graph::{cold_start_split, split_links, HeteroGraph, NodeTable, SentimentNetwork};
use shine::model::adagrad_step;
use shine::sentiext::{build_lexicon, senticircle_score, EmoticonMap, Lexicon, LexiconMeta, Tweet};

fn graph_from_edges(n: usize, edges: &[(u32, u32, i8)]) -> HeteroGraph {
    let mut nodes = NodeTable::new();
    for i in 0..n {
        nodes.intern(&format!("u{i}"));
    }
    let mut net = SentimentNetwork::with_nodes(n);
    for &(i, j, s) in edges {
        net.set_sign(i, j, s);
    }
    HeteroGraph {
        nodes,
        sentiment: net,
        social: None,
        profile: None,
    }
}

/// Random signed edge list over n nodes, deduplicated, no self-loops.
fn edges_strategy(n: usize) -> impl Strategy<Value = Vec<(u32, u32, i8)>> {
    proptest::collection::vec(
        (0..n as u32, 0..n as u32, prop_oneof![Just(1i8), Just(-1i8)]),
        2..n * (n - 1),
    )
    .prop_map(|raw| {
        let mut seen = BTreeSet::new();
        raw.into_iter()
            .filter(|&(i, j, _)| i != j && seen.insert((i, j)))
            .collect()
    })
    .prop_filter("need at least 2 edges", |v: &Vec<_>| v.len() >= 2)
}

proptest! {
    #[test]
    fn split_links_partitions_edges(
        n in 4usize..12,
        edges in (4usize..12).prop_flat_map(edges_strategy),
        seed in 0u64..1000,
    ) {
        let g = graph_from_edges(n.max(12), &edges);
        let m = g.sentiment.n_edges();
        let (train, test) = match split_links(&g, 0.4, false, seed) {
            Ok(r) => r,
            Err(_) => return Ok(()), // degenerate split, rejected by contract
        };
        // hidden count is round(fraction * m) and nothing is lost or invented
        prop_assert_eq!(test.len(), ((m as f64) * 0.4).round() as usize);
        prop_assert_eq!(train.sentiment.n_edges() + test.len(), m);
        for &(i, j, s) in &test {
            prop_assert_eq!(g.sentiment.sign(i, j), s);
            prop_assert_eq!(train.sentiment.sign(i, j), 0);
        }
        // determinism under the same seed
        let (_, test2) = split_links(&g, 0.4, false, seed).unwrap();
        prop_assert_eq!(test, test2);
    }

    #[test]
    fn cold_start_sources_have_zero_degree(
        edges in (6usize..12).prop_flat_map(edges_strategy),
        seed in 0u64..1000,
    ) {
        let g = graph_from_edges(12, &edges);
        let (train, test) = match cold_start_split(&g, 0.3, seed) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        for &(i, j, s) in &test {
            prop_assert_eq!(g.sentiment.sign(i, j), s);
            prop_assert_eq!(train.sentiment.out_degree(i), 0);
            prop_assert_eq!(train.sentiment.in_edges(i).count(), 0);
        }
        prop_assert!(train.sentiment.n_edges() > 0);
    }

    #[test]
    fn adagrad_descends_and_accumulates(
        grads in proptest::collection::vec(-10.0f64..10.0, 1..20),
        lr in 0.001f64..1.0,
    ) {
        let mut acc = vec![0.0; grads.len()];
        let before = acc.clone();
        let deltas = adagrad_step(&mut acc, &grads, lr, 1e-8);
        for ((d, g), (a, b)) in deltas.iter().zip(&grads).zip(acc.iter().zip(&before)) {
            // delta opposes the gradient; accumulator never decreases
            prop_assert!(d * g <= 0.0);
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn micro_f1_is_accuracy_for_binary_predictions(
        pairs in proptest::collection::vec((prop_oneof![Just(1i8), Just(-1i8)], prop_oneof![Just(1i8), Just(-1i8)]), 1..60),
    ) {
        let preds: Vec<i8> = pairs.iter().map(|&(p, _)| p).collect();
        let labels: Vec<i8> = pairs.iter().map(|&(_, l)| l).collect();
        let acc = accuracy(&preds, &labels).unwrap();
        let f1 = micro_f1(&preds, &labels).unwrap();
        prop_assert!((acc - f1).abs() < 1e-12);
    }

    #[test]
    fn lexicon_scores_are_normalized(
        corpus_spec in proptest::collection::vec(
            (proptest::collection::vec(0usize..8, 1..6), any::<bool>()),
            4..30,
        ),
    ) {
        let vocab = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"];
        let mut map = EmoticonMap::new();
        map.insert(":)", true).unwrap();
        map.insert(":(", false).unwrap();
        let corpus: Vec<Tweet> = corpus_spec
            .iter()
            .enumerate()
            .map(|(i, (words, positive))| {
                let mut tokens: Vec<String> =
                    words.iter().map(|&w| vocab[w].to_string()).collect();
                tokens.push(if *positive { ":)" } else { ":(" }.to_string());
                Tweet {
                    id: format!("t{i}"),
                    user: None,
                    tokens,
                    mentions: vec![],
                    deps: vec![],
                }
            })
            .collect();
        let lexicon = match build_lexicon(&corpus, &map, 1, usize::MAX, 1.0) {
            Ok(l) => l,
            Err(_) => return Ok(()), // single-class corpus, rejected by contract
        };
        if lexicon.scores.is_empty() {
            return Ok(());
        }
        let max_abs = lexicon
            .scores
            .values()
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        for &v in lexicon.scores.values() {
            prop_assert!((-1.0..=1.0).contains(&v));
        }
        // after max-abs normalization some word sits at exactly ±1, unless
        // every raw score was zero
        prop_assert!(max_abs == 1.0 || lexicon.scores.values().all(|&v| v == 0.0));
    }

    #[test]
    fn senticircle_scores_are_bounded(
        word_scores in proptest::collection::vec(-1.0f64..1.0, 3..12),
        chain_len in 3usize..12,
    ) {
        let n = chain_len.min(word_scores.len());
        let tokens: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let lexicon = Lexicon {
            scores: word_scores
                .iter()
                .take(n)
                .enumerate()
                .map(|(i, &s)| (format!("w{i}"), s))
                .collect(),
            meta: LexiconMeta {
                n_pos_tweets: 1,
                n_neg_tweets: 1,
                min_freq: 1,
                max_freq: usize::MAX,
                smoothing: 1.0,
                count_space: "tweet-level".into(),
                max_abs_raw_score: 1.0,
            },
        };
        let tweet = Tweet {
            id: "t".into(),
            user: None,
            tokens,
            mentions: vec![(0, "e".into())],
            deps: (0..n - 1).map(|i| (i, i + 1)).collect(),
        };
        let score = senticircle_score(&tweet, 0, &lexicon).unwrap();
        // every point has radius 1/d ≤ 1 and |sin| ≤ 1, so the mean y is in [-1, 1]
        prop_assert!((-1.0..=1.0).contains(&score));
    }

    #[test]
    fn layer_plan_is_palindromic(n_in in 1usize..3000, hidden in 1usize..1200, emb in 1usize..200) {
        let cfg = TrainConfig {
            hidden_dim: hidden,
            embedding_dim: emb.min(hidden),
            ..TrainConfig::default()
        };
        let dims = cfg.layer_dims(n_in);
        prop_assert_eq!(dims.len(), 5);
        prop_assert_eq!(dims[0], n_in);
        prop_assert_eq!(dims[4], n_in);
        prop_assert_eq!(dims[1], dims[3]);
        prop_assert!(dims[2] <= dims[1]);
        prop_assert!(dims.iter().all(|&d| d >= 1));
    }
}
