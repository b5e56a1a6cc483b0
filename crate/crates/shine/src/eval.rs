//! Experiment harness: link sign prediction (standard and cold-start splits)
//! and liked/disliked node recommendation, with accuracy, micro-F1, per-class
//! F1, and precision/recall at K.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::config::TrainConfig;
use crate::error::{Result, ShineError};
use crate::graph::{cold_start_split, split_links, HeteroGraph};
use crate::model::{train, Polarity, ShineModel};
use crate::rng::sub_rng;

/// Fraction of exact matches.
pub fn accuracy(preds: &[i8], labels: &[i8]) -> Result<f64> {
    if preds.is_empty() || preds.len() != labels.len() {
        return Err(ShineError::DimMismatch {
            expected: labels.len().max(1),
            actual: preds.len(),
        });
    }
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Micro-averaged F1 over the two classes: TP/FP/FN aggregated across classes,
/// F1 = 2PR/(P+R). For single-label binary prediction this equals accuracy.
pub fn micro_f1(preds: &[i8], labels: &[i8]) -> Result<f64> {
    if preds.is_empty() || preds.len() != labels.len() {
        return Err(ShineError::DimMismatch {
            expected: labels.len().max(1),
            actual: preds.len(),
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fns = 0usize;
    for class in [1i8, -1] {
        for (&p, &l) in preds.iter().zip(labels) {
            match (p == class, l == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fns += 1,
                _ => {}
            }
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    // 2PR/(P+R) in the algebraically identical one-division form, so that
    // single-label binary inputs give bit-exact equality with accuracy
    Ok(2.0 * tp as f64 / (2 * tp + fp + fns) as f64)
}

/// Per-class F1 for the given class label.
pub fn class_f1(preds: &[i8], labels: &[i8], class: i8) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fns = 0usize;
    for (&p, &l) in preds.iter().zip(labels) {
        match (p == class, l == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fns += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fns) as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Precision and recall of the top-K ranked list against the relevant set.
pub fn precision_recall_at_k(
    ranked: &[u32],
    relevant: &BTreeSet<u32>,
    k: usize,
) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(ShineError::InvalidConfig("K must be >= 1".into()));
    }
    if relevant.is_empty() {
        return Err(ShineError::InvalidConfig("empty relevant set".into()));
    }
    let top = &ranked[..ranked.len().min(k)];
    let hits = top.iter().filter(|j| relevant.contains(j)).count();
    Ok((hits as f64 / k as f64, hits as f64 / relevant.len() as f64))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub split: String,
    pub param_name: String,
    pub param_value: f64,
    pub metrics: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub config_fingerprint: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Standard,
    ColdStart,
}

impl SplitKind {
    pub fn name(&self) -> &'static str {
        match self {
            SplitKind::Standard => "standard",
            SplitKind::ColdStart => "cold_start",
        }
    }
}

/// Balance a test set by downsampling the majority sign under the seed.
fn balance_test(test: &[(u32, u32, i8)], seed: u64) -> Result<Vec<(u32, u32, i8)>> {
    let mut pos: Vec<_> = test.iter().copied().filter(|&(_, _, s)| s > 0).collect();
    let mut neg: Vec<_> = test.iter().copied().filter(|&(_, _, s)| s < 0).collect();
    let k = pos.len().min(neg.len());
    if k == 0 {
        return Err(ShineError::InvalidSplit(
            "test set has zero links of some sign; cannot balance".into(),
        ));
    }
    let mut rng = sub_rng(seed, "balance_test");
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out: Vec<_> = pos[..k].iter().chain(neg[..k].iter()).copied().collect();
    out.sort_unstable();
    Ok(out)
}

/// Predict signs for test pairs with one embedding pass over the train graph.
pub fn predict_test_links(
    model: &ShineModel,
    train_graph: &HeteroGraph,
    test: &[(u32, u32, i8)],
) -> Result<(Vec<i8>, Vec<i8>)> {
    let table = model.embed_all(train_graph)?;
    let mut preds = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    for &(i, j, s) in test {
        let score = model.similarity(
            &table.source.row(i as usize),
            &table.target.row(j as usize),
        )?;
        preds.push(if score >= 0.0 { 1 } else { -1 });
        labels.push(s);
    }
    Ok((preds, labels))
}

/// Baseline: predict the sign of the target's (positive − negative) incoming
/// degree in the training graph; ties predict +1.
pub fn degree_heuristic_preds(train_graph: &HeteroGraph, test: &[(u32, u32, i8)]) -> Vec<i8> {
    test.iter()
        .map(|&(_, j, _)| {
            let mut net = 0i64;
            for (_, s) in train_graph.sentiment.in_edges(j) {
                net += s as i64;
            }
            if net >= 0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

fn link_metrics(preds: &[i8], labels: &[i8]) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    m.insert("accuracy".into(), accuracy(preds, labels)?);
    m.insert("micro_f1".into(), micro_f1(preds, labels)?);
    m.insert("positive_f1".into(), class_f1(preds, labels, 1));
    m.insert("negative_f1".into(), class_f1(preds, labels, -1));
    Ok(m)
}

/// Link sign prediction over a list of training fractions.
///
/// Hides 20% of sentiment links (balanced test), then for each fraction
/// subsamples the remaining training links, trains, and evaluates on the fixed
/// test set. The cold-start variant holds out whole source users instead and
/// balances their links; all its test links are new-user links.
pub fn run_link_prediction(
    g: &HeteroGraph,
    cfg: &TrainConfig,
    split: SplitKind,
    training_fractions: &[f64],
) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let seed = cfg.seed;
    let (train_graph, test) = match split {
        SplitKind::Standard => split_links(g, 0.2, true, seed)?,
        SplitKind::ColdStart => {
            let (tg, test) = cold_start_split(g, 0.2, seed)?;
            (tg, balance_test(&test, seed)?)
        }
    };
    let all_train_links = train_graph.sentiment.edges();
    let mut reports = Vec::new();
    for &fraction in training_fractions {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(ShineError::InvalidSplit(format!(
                "training fraction {fraction} not in (0, 1]"
            )));
        }
        let sub_graph = if fraction < 1.0 {
            let mut links = all_train_links.clone();
            let mut rng = sub_rng(seed, &format!("train_fraction:{fraction}"));
            links.shuffle(&mut rng);
            let keep = ((links.len() as f64) * fraction).round().max(1.0) as usize;
            links.truncate(keep);
            train_graph.with_sentiment_links(&links)
        } else {
            train_graph.clone()
        };
        let outcome = train(&sub_graph, cfg)?;
        let (preds, labels) = predict_test_links(&outcome.model, &sub_graph, &test)?;
        let mut metrics = link_metrics(&preds, &labels)?;
        let heur = degree_heuristic_preds(&sub_graph, &test);
        metrics.insert("degree_heuristic_accuracy".into(), accuracy(&heur, &labels)?);
        let mut counts = BTreeMap::new();
        counts.insert("test_links".into(), test.len() as u64);
        counts.insert(
            "train_links".into(),
            sub_graph.sentiment.n_edges() as u64,
        );
        reports.push(EvalReport {
            task: "link_prediction".into(),
            split: split.name().into(),
            param_name: "fraction".into(),
            param_value: fraction,
            metrics,
            counts,
            config_fingerprint: cfg.fingerprint(),
            seed,
        });
    }
    Ok(reports)
}

/// Evaluate externally supplied scores (TSV `i<TAB>j<TAB>score`, external ids)
/// on a test set; thresholds at zero.
pub fn evaluate_score_file(
    g: &HeteroGraph,
    test: &[(u32, u32, i8)],
    path: &Path,
) -> Result<BTreeMap<String, f64>> {
    let content = std::fs::read_to_string(path)?;
    let mut scores: HashMap<(u32, u32), f64> = HashMap::new();
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(ShineError::MalformedLine {
                path: path.display().to_string(),
                line: lineno + 1,
                reason: "expected i<TAB>j<TAB>score".into(),
            });
        }
        let i = g.nodes.get(fields[0]).ok_or_else(|| ShineError::UnknownNode {
            id: fields[0].to_string(),
        })?;
        let j = g.nodes.get(fields[1]).ok_or_else(|| ShineError::UnknownNode {
            id: fields[1].to_string(),
        })?;
        let score: f64 = fields[2].parse().map_err(|_| ShineError::MalformedLine {
            path: path.display().to_string(),
            line: lineno + 1,
            reason: "bad score".into(),
        })?;
        scores.insert((i, j), score);
    }
    let mut preds = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    for &(i, j, s) in test {
        let score = scores
            .get(&(i, j))
            .copied()
            .ok_or_else(|| ShineError::InvalidConfig(format!("missing score for pair ({i}, {j})")))?;
        preds.push(if score >= 0.0 { 1 } else { -1 });
        labels.push(s);
    }
    link_metrics(&preds, &labels)
}

/// Node recommendation: mean precision@K and recall@K per polarity over
/// evaluable users, with train-observed targets excluded from candidates.
/// Users with no held-out relevant node for a polarity are skipped and
/// counted.
pub fn run_node_recommendation(
    g: &HeteroGraph,
    cfg: &TrainConfig,
    k_values: &[usize],
) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let seed = cfg.seed;
    let (train_graph, test) = split_links(g, 0.2, false, seed)?;
    let outcome = train(&train_graph, cfg)?;
    let table = outcome.model.embed_all(&train_graph)?;

    let mut held: HashMap<u32, (BTreeSet<u32>, BTreeSet<u32>)> = HashMap::new();
    for &(i, j, s) in &test {
        let entry = held.entry(i).or_default();
        if s > 0 {
            entry.0.insert(j);
        } else {
            entry.1.insert(j);
        }
    }
    let mut users: Vec<u32> = held.keys().copied().collect();
    users.sort_unstable();

    let mut reports = Vec::new();
    for &k in k_values {
        for polarity in [Polarity::Positive, Polarity::Negative] {
            let mut p_sum = 0.0;
            let mut r_sum = 0.0;
            let mut evaluable = 0u64;
            let mut skipped = 0u64;
            for &u in &users {
                let relevant = match polarity {
                    Polarity::Positive => &held[&u].0,
                    Polarity::Negative => &held[&u].1,
                };
                if relevant.is_empty() {
                    skipped += 1;
                    continue;
                }
                let rec = outcome
                    .model
                    .recommend_with(&table, &train_graph, u, k, polarity, true)?;
                let ranked: Vec<u32> = rec.items.iter().map(|&(j, _)| j).collect();
                let (p, r) = precision_recall_at_k(&ranked, relevant, k)?;
                p_sum += p;
                r_sum += r;
                evaluable += 1;
            }
            let mut metrics = BTreeMap::new();
            let pol_name = match polarity {
                Polarity::Positive => "positive",
                Polarity::Negative => "negative",
            };
            if evaluable > 0 {
                metrics.insert(
                    format!("{pol_name}_precision_at_k"),
                    p_sum / evaluable as f64,
                );
                metrics.insert(format!("{pol_name}_recall_at_k"), r_sum / evaluable as f64);
            }
            let mut counts = BTreeMap::new();
            counts.insert(format!("{pol_name}_evaluable_users"), evaluable);
            counts.insert(format!("{pol_name}_skipped_users"), skipped);
            reports.push(EvalReport {
                task: "node_recommendation".into(),
                split: "standard".into(),
                param_name: "k".into(),
                param_value: k as f64,
                metrics,
                counts,
                config_fingerprint: cfg.fingerprint(),
                seed,
            });
        }
    }
    Ok(reports)
}

/// Companion TSV: one row per report, suitable for external plotting.
pub fn write_report_tsv<W: Write>(reports: &[EvalReport], mut w: W) -> Result<()> {
    let mut names: BTreeSet<&str> = BTreeSet::new();
    for r in reports {
        names.extend(r.metrics.keys().map(String::as_str));
    }
    write!(w, "task\tsplit\tparam\tvalue")?;
    for n in &names {
        write!(w, "\t{n}")?;
    }
    writeln!(w)?;
    for r in reports {
        write!(
            w,
            "{}\t{}\t{}\t{}",
            r.task, r.split, r.param_name, r.param_value
        )?;
        for n in &names {
            match r.metrics.get(*n) {
                Some(v) => write!(w, "\t{v}")?,
                None => write!(w, "\t")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn accuracy_basics() {
        assert_abs_diff_eq!(
            accuracy(&[1, -1, 1], &[1, 1, 1]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(accuracy(&[1, -1], &[1, -1]).unwrap(), 1.0);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn micro_f1_equals_accuracy_on_random_vectors() {
        let mut rng = sub_rng(3, "micro");
        for _ in 0..1000 {
            let n = rng.gen_range(1..40);
            let preds: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
            let labels: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
            let acc = accuracy(&preds, &labels).unwrap();
            let f1 = micro_f1(&preds, &labels).unwrap();
            assert_abs_diff_eq!(acc, f1, epsilon = 1e-12);
        }
    }

    #[test]
    fn micro_f1_all_positive_half_wrong() {
        let preds = vec![1i8; 4];
        let labels = vec![1, 1, -1, -1];
        assert_abs_diff_eq!(micro_f1(&preds, &labels).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(micro_f1(&labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn metrics_permutation_invariant() {
        let preds = vec![1i8, -1, 1, -1, 1];
        let labels = vec![1i8, 1, -1, -1, 1];
        let perm = [4usize, 2, 0, 3, 1];
        let p2: Vec<i8> = perm.iter().map(|&i| preds[i]).collect();
        let l2: Vec<i8> = perm.iter().map(|&i| labels[i]).collect();
        assert_eq!(accuracy(&preds, &labels).unwrap(), accuracy(&p2, &l2).unwrap());
        assert_eq!(micro_f1(&preds, &labels).unwrap(), micro_f1(&p2, &l2).unwrap());
    }

    #[test]
    fn precision_recall_counting() {
        let relevant: BTreeSet<u32> = [0, 2, 3].into_iter().collect();
        let (p, r) = precision_recall_at_k(&[0, 1, 2], &relevant, 3).unwrap();
        assert_abs_diff_eq!(p, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 2.0 / 3.0, epsilon = 1e-15);
        let (p, r) = precision_recall_at_k(&[5, 6], &relevant, 2).unwrap();
        assert_eq!((p, r), (0.0, 0.0));
        assert!(precision_recall_at_k(&[0], &BTreeSet::new(), 1).is_err());
    }

    #[test]
    fn constant_predictor_on_balanced_test_is_half() {
        let labels: Vec<i8> = (0..100).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let preds = vec![1i8; 100];
        assert_eq!(accuracy(&preds, &labels).unwrap(), 0.5);
    }

    #[test]
    fn report_tsv_layout() {
        let mut metrics = BTreeMap::new();
        metrics.insert("accuracy".to_string(), 0.9);
        let r = EvalReport {
            task: "link_prediction".into(),
            split: "standard".into(),
            param_name: "fraction".into(),
            param_value: 1.0,
            metrics,
            counts: BTreeMap::new(),
            config_fingerprint: "abc".into(),
            seed: 0,
        };
        let mut buf = Vec::new();
        write_report_tsv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("task\tsplit\tparam\tvalue\taccuracy\n"));
        assert!(text.contains("link_prediction\tstandard\tfraction\t1\t0.9\n"));
    }
}
