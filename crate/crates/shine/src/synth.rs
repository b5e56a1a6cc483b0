//! Synthetic planted-sign heterogeneous graph generator.
//!
//! Sentiment relations are sampled per unordered pair and materialized in
//! both directions with the same sign: +1 inside a community and −1 across
//! communities, flipped with probability `noise`. Social edges are drawn
//! directed with homophily; one profile attribute reveals the community label
//! with probability `profile_informativeness`. The planted labels give tests
//! a verifiable ground truth.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShineError};
use crate::graph::{HeteroGraph, NodeTable, ProfileNetwork, SentimentNetwork, SocialNetwork};
use crate::rng::sub_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_nodes: usize,
    pub n_communities: usize,
    /// Probability of a +1 relation for an intra-community pair.
    pub intra_positive_prob: f64,
    /// Probability of a −1 relation for an inter-community pair.
    pub inter_negative_prob: f64,
    /// Probability a social link stays intra-community.
    pub social_homophily: f64,
    /// Probability a node's attribute value equals its community label.
    pub profile_informativeness: f64,
    /// Sign-flip probability on sentiment edges.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_communities == 0 || self.n_communities > self.n_nodes {
            return Err(ShineError::InvalidConfig(
                "need 1 <= n_communities <= n_nodes".into(),
            ));
        }
        for (name, p) in [
            ("intra_positive_prob", self.intra_positive_prob),
            ("inter_negative_prob", self.inter_negative_prob),
            ("social_homophily", self.social_homophily),
            ("profile_informativeness", self.profile_informativeness),
            ("noise", self.noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ShineError::InvalidConfig(format!(
                    "{name} must be in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub struct SyntheticData {
    pub graph: HeteroGraph,
    /// Planted community label per node index.
    pub labels: Vec<usize>,
    pub spec: SyntheticSpec,
}

/// Generate a planted-sign heterogeneous graph.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let n = spec.n_nodes;
    let labels: Vec<usize> = (0..n).map(|i| i % spec.n_communities).collect();

    let mut nodes = NodeTable::new();
    for i in 0..n {
        nodes.intern(&format!("u{i}"));
    }

    let mut rng = sub_rng(spec.seed, "synth:sentiment");
    let mut sentiment = SentimentNetwork::with_nodes(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let intra = labels[i] == labels[j];
            let (p, base_sign) = if intra {
                (spec.intra_positive_prob, 1i8)
            } else {
                (spec.inter_negative_prob, -1i8)
            };
            if rng.gen_bool(p) {
                // one reciprocal relation per pair; noise flips the pair
                let sign = if rng.gen_bool(spec.noise) {
                    -base_sign
                } else {
                    base_sign
                };
                sentiment.set_sign(i as u32, j as u32, sign);
                sentiment.set_sign(j as u32, i as u32, sign);
            }
        }
    }

    // Social density mirrors the sentiment edge rate; destination community
    // follows the homophily probability.
    let mut rng = sub_rng(spec.seed, "synth:social");
    let mut social = SocialNetwork::with_nodes(n);
    let base = spec.intra_positive_prob;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let intra = labels[i] == labels[j];
            let p = if intra {
                2.0 * base * spec.social_homophily
            } else {
                2.0 * base * (1.0 - spec.social_homophily)
            };
            if rng.gen_bool(p.min(1.0)) {
                social.add(i as u32, j as u32);
            }
        }
    }

    let mut rng = sub_rng(spec.seed, "synth:profile");
    let mut profile = ProfileNetwork::with_nodes(n);
    // value vocabulary in label order so value id == community label
    for c in 0..spec.n_communities {
        profile.intern_value("community", &c.to_string());
    }
    for i in 0..n {
        let value = if rng.gen_bool(spec.profile_informativeness) {
            labels[i]
        } else if spec.n_communities > 1 {
            // uniform among the other labels
            let mut v = rng.gen_range(0..spec.n_communities - 1);
            if v >= labels[i] {
                v += 1;
            }
            v
        } else {
            labels[i]
        };
        profile.add(i as u32, value as u32)?;
    }

    Ok(SyntheticData {
        graph: HeteroGraph {
            nodes,
            sentiment,
            social: Some(social),
            profile: Some(profile),
        },
        labels,
        spec: spec.clone(),
    })
}

/// Write sentiment.tsv, social.tsv, profile.tsv, and ground_truth.tsv.
pub fn write_to_dir(data: &SyntheticData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = &data.graph;
    let mut f = fs::File::create(dir.join("sentiment.tsv"))?;
    for (i, j, s) in g.sentiment.edges() {
        writeln!(
            f,
            "{}\t{}\t{}",
            g.nodes.external_id(i),
            g.nodes.external_id(j),
            if s > 0 { "+1" } else { "-1" }
        )?;
    }
    let mut f = fs::File::create(dir.join("social.tsv"))?;
    if let Some(social) = &g.social {
        for i in 0..g.n_nodes() as u32 {
            for j in social.out_edges(i) {
                writeln!(f, "{}\t{}", g.nodes.external_id(i), g.nodes.external_id(j))?;
            }
        }
    }
    let mut f = fs::File::create(dir.join("profile.tsv"))?;
    if let Some(profile) = &g.profile {
        for i in 0..g.n_nodes() as u32 {
            for v in profile.values_of(i) {
                let (attr, value) = profile.value(v);
                writeln!(f, "{}\t{}\t{}", g.nodes.external_id(i), attr, value)?;
            }
        }
    }
    let mut f = fs::File::create(dir.join("ground_truth.tsv"))?;
    for (i, &label) in data.labels.iter().enumerate() {
        writeln!(f, "{}\t{}", g.nodes.external_id(i as u32), label)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            n_nodes: 60,
            n_communities: 2,
            intra_positive_prob: 0.2,
            inter_negative_prob: 0.2,
            social_homophily: 0.9,
            profile_informativeness: 1.0,
            noise: 0.0,
            seed: 11,
        }
    }

    #[test]
    fn zero_noise_signs_follow_communities() {
        let data = generate(&spec()).unwrap();
        for (i, j, s) in data.graph.sentiment.edges() {
            let intra = data.labels[i as usize] == data.labels[j as usize];
            assert_eq!(s > 0, intra);
        }
    }

    #[test]
    fn full_informativeness_reveals_community() {
        let data = generate(&spec()).unwrap();
        let profile = data.graph.profile.as_ref().unwrap();
        for i in 0..data.graph.n_nodes() as u32 {
            let values: Vec<u32> = profile.values_of(i).collect();
            assert_eq!(values, vec![data.labels[i as usize] as u32]);
        }
    }

    #[test]
    fn majority_vote_recovers_labels_at_zero_noise() {
        // community oracle: seed each node's label from edge signs relative
        // to node 0
        let data = generate(&spec()).unwrap();
        let n = data.graph.n_nodes();
        let mut guess = vec![None; n];
        guess[0] = Some(data.labels[0]);
        // propagate: +1 edge → same community, −1 → different (2 communities)
        for _ in 0..n {
            for (i, j, s) in data.graph.sentiment.edges() {
                let (i, j) = (i as usize, j as usize);
                if let Some(gi) = guess[i] {
                    let expected = if s > 0 { gi } else { 1 - gi };
                    guess[j].get_or_insert(expected);
                }
                if let Some(gj) = guess[j] {
                    let expected = if s > 0 { gj } else { 1 - gj };
                    guess[i].get_or_insert(expected);
                }
            }
        }
        for (g, &l) in guess.iter().zip(&data.labels) {
            if let Some(g) = g {
                assert_eq!(*g, l);
            }
        }
    }

    #[test]
    fn sentiment_relations_are_reciprocal() {
        let mut s = spec();
        s.noise = 0.3;
        let data = generate(&s).unwrap();
        for (i, j, sign) in data.graph.sentiment.edges() {
            assert_eq!(data.graph.sentiment.sign(j, i), sign);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&spec()).unwrap();
        let b = generate(&spec()).unwrap();
        assert_eq!(a.graph.sentiment.edges(), b.graph.sentiment.edges());
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn invalid_probabilities_rejected() {
        let mut s = spec();
        s.noise = 1.5;
        assert!(generate(&s).is_err());
    }
}
