//! The full SHINE model: embedding aggregation, similarity scoring, the
//! composite training objective with exact gradients, AdaGrad mini-batch
//! training, sign prediction, and recommendation scoring.

use std::collections::{BTreeSet, HashMap};

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;

use crate::autoencoder::{recon_loss_grad_sparse, Activation, AeGrads, Autoencoder, BatchTrace};
use crate::config::{AggregationKind, SimilarityKind, TrainConfig};
use crate::error::{Result, ShineError};
use crate::graph::{AdjacencyVector, HeteroGraph};
use crate::rng::{sub_rng, sub_rng_indexed};

pub mod serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NetKind {
    Sentiment,
    Social,
    Profile,
}

/// Trainable parameters of the similarity function f.
#[derive(Debug, Clone)]
pub struct SimilarityParams {
    /// Present for logistic regression only; length 2 × dim(e).
    pub weights: Option<Array1<f64>>,
    pub bias: f64,
}

/// Source autoencoder plus an optional distinct target-side copy
/// (asymmetric mode).
#[derive(Debug, Clone)]
pub struct AePair {
    pub source: Autoencoder,
    pub target: Option<Autoencoder>,
}

impl AePair {
    fn for_side(&self, side: Side) -> &Autoencoder {
        match side {
            Side::Source => &self.source,
            Side::Target => self.target.as_ref().unwrap_or(&self.source),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShineModel {
    pub sent: AePair,
    pub social: Option<AePair>,
    pub profile: Option<AePair>,
    pub aggregation: AggregationKind,
    pub similarity: SimilarityKind,
    pub sim_params: SimilarityParams,
    pub config: TrainConfig,
}

/// Gradients (or AdaGrad accumulators) shaped like the model's trainable
/// tensors.
#[derive(Debug, Clone)]
pub struct PairGrads {
    pub source: AeGrads,
    pub target: Option<AeGrads>,
}

#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub sent: PairGrads,
    pub social: Option<PairGrads>,
    pub profile: Option<PairGrads>,
    pub sim_weights: Option<Array1<f64>>,
    pub sim_bias: f64,
}

impl ModelGrads {
    pub fn zeros_like(m: &ShineModel) -> Self {
        let pair = |p: &AePair| PairGrads {
            source: AeGrads::zeros_like(&p.source),
            target: p.target.as_ref().map(AeGrads::zeros_like),
        };
        ModelGrads {
            sent: pair(&m.sent),
            social: m.social.as_ref().map(pair),
            profile: m.profile.as_ref().map(pair),
            sim_weights: m
                .sim_params
                .weights
                .as_ref()
                .map(|w| Array1::zeros(w.len())),
            sim_bias: 0.0,
        }
    }

    /// Flat views over every tensor, in the same fixed order as
    /// [`ShineModel::tensor_slices_mut`].
    pub fn tensor_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        fn push_ae<'a>(out: &mut Vec<&'a mut [f64]>, g: &'a mut AeGrads) {
            for (w, b) in g.d_weights.iter_mut().zip(g.d_biases.iter_mut()) {
                out.push(w.as_slice_mut().expect("contiguous"));
                out.push(b.as_slice_mut().expect("contiguous"));
            }
        }
        fn push_pair<'a>(out: &mut Vec<&'a mut [f64]>, p: &'a mut PairGrads) {
            push_ae(out, &mut p.source);
            if let Some(t) = p.target.as_mut() {
                push_ae(out, t);
            }
        }
        push_pair(&mut out, &mut self.sent);
        if let Some(p) = self.social.as_mut() {
            push_pair(&mut out, p);
        }
        if let Some(p) = self.profile.as_mut() {
            push_pair(&mut out, p);
        }
        if let Some(w) = self.sim_weights.as_mut() {
            out.push(w.as_slice_mut().expect("contiguous"));
        }
        out.push(std::slice::from_mut(&mut self.sim_bias));
        out
    }
}

/// AdaGrad: accumulate squared gradients and return the parameter delta
/// −lr · g / √(acc + ε).
pub fn adagrad_step(accumulator: &mut [f64], gradient: &[f64], lr: f64, eps: f64) -> Vec<f64> {
    assert_eq!(accumulator.len(), gradient.len(), "shape mismatch");
    accumulator
        .iter_mut()
        .zip(gradient)
        .map(|(acc, &g)| {
            *acc += g * g;
            -lr * g / (*acc + eps).sqrt()
        })
        .collect()
}

/// In-place AdaGrad update of a parameter slice.
pub fn adagrad_apply(param: &mut [f64], gradient: &[f64], accumulator: &mut [f64], lr: f64, eps: f64) {
    assert_eq!(param.len(), gradient.len(), "shape mismatch");
    for ((p, &g), acc) in param.iter_mut().zip(gradient).zip(accumulator.iter_mut()) {
        *acc += g * g;
        *p -= lr * g / (*acc + eps).sqrt();
    }
}

#[derive(Debug, Clone)]
pub struct Recommendation {
    /// (node, score) ranked best-first for the requested polarity.
    pub items: Vec<(u32, f64)>,
    /// True when fewer candidates than K were available.
    pub short_list: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Precomputed heterogeneous embeddings for every node, one row per node.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub source: Array2<f64>,
    pub target: Array2<f64>,
}

pub struct TrainOutcome {
    pub model: ShineModel,
    pub epoch_losses: Vec<f64>,
}

impl ShineModel {
    /// Initialize a model for `graph` under `cfg`. Social/profile autoencoders
    /// exist only when the network is present and its balance coefficient is
    /// non-zero.
    pub fn init(graph: &HeteroGraph, cfg: &TrainConfig) -> Result<ShineModel> {
        cfg.validate()?;
        let n = graph.n_nodes();
        if n == 0 {
            return Err(ShineError::InvalidConfig("empty graph".into()));
        }
        let act = Activation::Tanh;
        let make_pair = |dims: &[usize], label: &str| -> Result<AePair> {
            let mut rng = sub_rng(cfg.seed, &format!("init:{label}"));
            let source = Autoencoder::init_with_rng(dims, act, &mut rng)?;
            let target = if cfg.asymmetric {
                Some(Autoencoder::init_with_rng(dims, act, &mut rng)?)
            } else {
                None
            };
            Ok(AePair { source, target })
        };

        let sent = make_pair(&cfg.layer_dims(2 * n), "sent")?;
        let social = match (&graph.social, cfg.lambda1 > 0.0) {
            (Some(_), true) => Some(make_pair(&cfg.layer_dims(2 * n), "social")?),
            _ => None,
        };
        let profile = match (&graph.profile, cfg.lambda2 > 0.0) {
            (Some(p), true) if p.n_values() > 0 => {
                Some(make_pair(&cfg.layer_dims(p.n_values()), "profile")?)
            }
            _ => None,
        };

        let model = ShineModel {
            sent,
            social,
            profile,
            aggregation: cfg.aggregation,
            similarity: cfg.similarity,
            sim_params: SimilarityParams {
                weights: None,
                bias: 0.0,
            },
            config: cfg.clone(),
        };
        let agg_dim = model.aggregated_dim()?;
        let sim_params = SimilarityParams {
            weights: match cfg.similarity {
                SimilarityKind::LogisticRegression => Some(Array1::zeros(2 * agg_dim)),
                _ => None,
            },
            bias: 0.0,
        };
        Ok(ShineModel { sim_params, ..model })
    }

    fn enabled_pairs(&self) -> Vec<(NetKind, &AePair)> {
        let mut v = vec![(NetKind::Sentiment, &self.sent)];
        if let Some(p) = &self.social {
            v.push((NetKind::Social, p));
        }
        if let Some(p) = &self.profile {
            v.push((NetKind::Profile, p));
        }
        v
    }

    fn embedding_dims(&self) -> Vec<usize> {
        self.enabled_pairs()
            .iter()
            .map(|(_, p)| p.source.embedding_dim())
            .collect()
    }

    /// Output dimension of the aggregation function.
    pub fn aggregated_dim(&self) -> Result<usize> {
        let dims = self.embedding_dims();
        if dims.is_empty() {
            return Err(ShineError::NoNetworksEnabled);
        }
        match self.aggregation {
            AggregationKind::Concatenation => Ok(dims.iter().sum()),
            AggregationKind::Summation | AggregationKind::MaxPooling => {
                if dims.windows(2).any(|w| w[0] != w[1]) {
                    Err(ShineError::InvalidConfig(format!(
                        "summation/max_pooling require equal embedding dims, got {dims:?}"
                    )))
                } else {
                    Ok(dims[0])
                }
            }
        }
    }

    fn adjacency(&self, graph: &HeteroGraph, kind: NetKind, i: u32) -> Result<AdjacencyVector> {
        match kind {
            NetKind::Sentiment => graph.sentiment_adjacency(i),
            NetKind::Social => graph.social_adjacency(i),
            NetKind::Profile => graph.profile_adjacency(i),
        }
    }

    fn aggregate_views(&self, parts: &[ArrayView1<f64>]) -> Array1<f64> {
        match self.aggregation {
            AggregationKind::Concatenation => {
                let total: usize = parts.iter().map(|p| p.len()).sum();
                let mut out = Array1::zeros(total);
                let mut off = 0;
                for p in parts {
                    out.slice_mut(ndarray::s![off..off + p.len()]).assign(p);
                    off += p.len();
                }
                out
            }
            AggregationKind::Summation => {
                let mut out = parts[0].to_owned();
                for p in &parts[1..] {
                    out += p;
                }
                out
            }
            AggregationKind::MaxPooling => {
                let mut out = parts[0].to_owned();
                for p in &parts[1..] {
                    for (o, &v) in out.iter_mut().zip(p.iter()) {
                        if v > *o {
                            *o = v;
                        }
                    }
                }
                out
            }
        }
    }

    /// Heterogeneous embedding of node `i` on the given side; in symmetric
    /// mode the side is ignored.
    pub fn embed_user(&self, graph: &HeteroGraph, i: u32, side: Side) -> Result<Array1<f64>> {
        let pairs = self.enabled_pairs();
        if pairs.is_empty() {
            return Err(ShineError::NoNetworksEnabled);
        }
        let mut embs: Vec<Array1<f64>> = Vec::with_capacity(pairs.len());
        for (kind, pair) in &pairs {
            let x = self.adjacency(graph, *kind, i)?;
            let trace = pair.for_side(side).forward(&x)?;
            embs.push(trace.embedding().clone());
        }
        let views: Vec<ArrayView1<f64>> = embs.iter().map(|e| e.view()).collect();
        Ok(self.aggregate_views(&views))
    }

    /// Raw similarity score s̄_ij of two heterogeneous embeddings.
    pub fn similarity(&self, e_i: &ArrayView1<f64>, e_j: &ArrayView1<f64>) -> Result<f64> {
        if e_i.len() != e_j.len() {
            return Err(ShineError::DimMismatch {
                expected: e_i.len(),
                actual: e_j.len(),
            });
        }
        let b = self.sim_params.bias;
        Ok(match self.similarity {
            SimilarityKind::InnerProduct => e_i.dot(e_j) + b,
            SimilarityKind::Euclidean => {
                let d2: f64 = e_i
                    .iter()
                    .zip(e_j.iter())
                    .map(|(&a, &c)| (a - c) * (a - c))
                    .sum();
                -d2.sqrt() + b
            }
            SimilarityKind::LogisticRegression => {
                let w = self.sim_params.weights.as_ref().ok_or_else(|| {
                    ShineError::InvalidConfig("logistic_regression weights missing".into())
                })?;
                if w.len() != e_i.len() + e_j.len() {
                    return Err(ShineError::DimMismatch {
                        expected: w.len(),
                        actual: e_i.len() + e_j.len(),
                    });
                }
                let d = e_i.len();
                let mut s = b;
                for (k, &v) in e_i.iter().enumerate() {
                    s += w[k] * v;
                }
                for (k, &v) in e_j.iter().enumerate() {
                    s += w[d + k] * v;
                }
                s
            }
        })
    }

    /// Embeddings for all nodes, computed in batches.
    pub fn embed_all(&self, graph: &HeteroGraph) -> Result<EmbeddingTable> {
        let n = graph.n_nodes();
        let users: Vec<u32> = (0..n as u32).collect();
        let source = self.embed_users(graph, &users, Side::Source)?;
        let target = if self.config.asymmetric {
            self.embed_users(graph, &users, Side::Target)?
        } else {
            source.clone()
        };
        Ok(EmbeddingTable { source, target })
    }

    fn embed_users(&self, graph: &HeteroGraph, users: &[u32], side: Side) -> Result<Array2<f64>> {
        let pairs = self.enabled_pairs();
        if pairs.is_empty() {
            return Err(ShineError::NoNetworksEnabled);
        }
        let agg_dim = self.aggregated_dim()?;
        let mut out = Array2::zeros((users.len(), agg_dim));
        const CHUNK: usize = 512;
        for (ci, chunk) in users.chunks(CHUNK).enumerate() {
            let mut per_net: Vec<Array2<f64>> = Vec::with_capacity(pairs.len());
            for (kind, pair) in &pairs {
                let rows: Result<Vec<AdjacencyVector>> = chunk
                    .iter()
                    .map(|&u| self.adjacency(graph, *kind, u))
                    .collect();
                let trace = pair.for_side(side).forward_batch(&rows?)?;
                per_net.push(trace.embedding().clone());
            }
            for (r, _) in chunk.iter().enumerate() {
                let views: Vec<ArrayView1<f64>> = per_net.iter().map(|m| m.row(r)).collect();
                let agg = self.aggregate_views(&views);
                out.row_mut(ci * CHUNK + r).assign(&agg);
            }
        }
        Ok(out)
    }

    /// Predicted sign for the ordered pair (i, j); score-zero ties resolve
    /// to +1.
    pub fn predict_sign(&self, graph: &HeteroGraph, i: u32, j: u32) -> Result<(i8, f64)> {
        let e_i = self.embed_user(graph, i, Side::Source)?;
        let e_j = self.embed_user(graph, j, Side::Target)?;
        let score = self.similarity(&e_i.view(), &e_j.view())?;
        Ok((if score >= 0.0 { 1 } else { -1 }, score))
    }

    /// Rank candidates for user `i`: positive polarity by descending score,
    /// negative by ascending; ties break by ascending node index.
    pub fn recommend(
        &self,
        graph: &HeteroGraph,
        i: u32,
        k: usize,
        polarity: Polarity,
        exclude_observed: bool,
    ) -> Result<Recommendation> {
        let table = self.embed_all(graph)?;
        self.recommend_with(&table, graph, i, k, polarity, exclude_observed)
    }

    pub fn recommend_with(
        &self,
        table: &EmbeddingTable,
        graph: &HeteroGraph,
        i: u32,
        k: usize,
        polarity: Polarity,
        exclude_observed: bool,
    ) -> Result<Recommendation> {
        if (i as usize) >= graph.n_nodes() {
            return Err(ShineError::NodeOutOfRange {
                index: i,
                n_nodes: graph.n_nodes(),
            });
        }
        if k == 0 {
            return Err(ShineError::InvalidConfig("K must be >= 1".into()));
        }
        let e_i = table.source.row(i as usize);
        let mut scored: Vec<(u32, f64)> = Vec::new();
        for j in 0..graph.n_nodes() as u32 {
            if j == i {
                continue;
            }
            if exclude_observed && graph.sentiment.sign(i, j) != 0 {
                continue;
            }
            let score = self.similarity(&e_i, &table.target.row(j as usize))?;
            scored.push((j, score));
        }
        scored.sort_by(|a, b| {
            let ord = match polarity {
                Polarity::Positive => b.1.partial_cmp(&a.1).unwrap(),
                Polarity::Negative => a.1.partial_cmp(&b.1).unwrap(),
            };
            ord.then(a.0.cmp(&b.0))
        });
        let short_list = scored.len() < k;
        scored.truncate(k);
        Ok(Recommendation {
            items: scored,
            short_list,
        })
    }

    /// Loss and gradients of the composite objective on one batch of signed
    /// links. Reconstruction terms cover exactly the distinct users appearing
    /// as endpoints in the batch.
    pub fn objective(
        &self,
        graph: &HeteroGraph,
        batch: &[(u32, u32, i8)],
    ) -> Result<(f64, ModelGrads)> {
        if batch.is_empty() {
            return Err(ShineError::EmptyBatch);
        }
        for &(i, j, s) in batch {
            if s != 1 && s != -1 {
                return Err(ShineError::UnsignedLink { i, j });
            }
        }
        let cfg = &self.config;
        let pairs = self.enabled_pairs();
        let agg_dim = self.aggregated_dim()?;

        // Per-side forward state.
        struct SideState {
            users: Vec<u32>,
            index: HashMap<u32, usize>,
            rows: Vec<Vec<AdjacencyVector>>,
            traces: Vec<BatchTrace>,
            agg: Array2<f64>,
            d_agg: Array2<f64>,
        }

        let sides: Vec<Side> = if cfg.asymmetric {
            vec![Side::Source, Side::Target]
        } else {
            vec![Side::Source]
        };

        let mut states: Vec<SideState> = Vec::with_capacity(sides.len());
        for &side in &sides {
            let set: BTreeSet<u32> = if cfg.asymmetric {
                match side {
                    Side::Source => batch.iter().map(|&(i, _, _)| i).collect(),
                    Side::Target => batch.iter().map(|&(_, j, _)| j).collect(),
                }
            } else {
                batch.iter().flat_map(|&(i, j, _)| [i, j]).collect()
            };
            let users: Vec<u32> = set.into_iter().collect();
            let index: HashMap<u32, usize> =
                users.iter().enumerate().map(|(r, &u)| (u, r)).collect();
            let mut rows = Vec::with_capacity(pairs.len());
            let mut traces = Vec::with_capacity(pairs.len());
            for (kind, pair) in &pairs {
                let net_rows: Result<Vec<AdjacencyVector>> = users
                    .iter()
                    .map(|&u| self.adjacency(graph, *kind, u))
                    .collect();
                let net_rows = net_rows?;
                traces.push(pair.for_side(side).forward_batch(&net_rows)?);
                rows.push(net_rows);
            }
            let mut agg = Array2::zeros((users.len(), agg_dim));
            for r in 0..users.len() {
                let views: Vec<ArrayView1<f64>> =
                    traces.iter().map(|t| t.embedding().row(r)).collect();
                agg.row_mut(r).assign(&self.aggregate_views(&views));
            }
            let d_agg = Array2::zeros((users.len(), agg_dim));
            states.push(SideState {
                users,
                index,
                rows,
                traces,
                agg,
                d_agg,
            });
        }
        let (src_si, tgt_si) = if cfg.asymmetric { (0, 1) } else { (0, 0) };

        let mut loss = 0.0;
        let mut grads = ModelGrads::zeros_like(self);

        // Supervised term: λ3 Σ (f(e_i, e_j) − s)².
        if cfg.lambda3 > 0.0 {
            for &(i, j, s) in batch {
                let ri = states[src_si].index[&i];
                let rj = states[tgt_si].index[&j];
                let e_i = states[src_si].agg.row(ri).to_owned();
                let e_j = states[tgt_si].agg.row(rj).to_owned();
                let score = self.similarity(&e_i.view(), &e_j.view())?;
                let diff = score - s as f64;
                loss += cfg.lambda3 * diff * diff;
                let dscore = 2.0 * cfg.lambda3 * diff;
                grads.sim_bias += dscore;
                match self.similarity {
                    SimilarityKind::InnerProduct => {
                        states[src_si]
                            .d_agg
                            .row_mut(ri)
                            .scaled_add(dscore, &e_j.view());
                        states[tgt_si]
                            .d_agg
                            .row_mut(rj)
                            .scaled_add(dscore, &e_i.view());
                    }
                    SimilarityKind::Euclidean => {
                        let delta = &e_i - &e_j;
                        let dist = delta.dot(&delta).sqrt();
                        if dist > 0.0 {
                            // d(−‖e_i − e_j‖)/de_i = −(e_i − e_j)/‖·‖
                            states[src_si]
                                .d_agg
                                .row_mut(ri)
                                .scaled_add(-dscore / dist, &delta.view());
                            states[tgt_si]
                                .d_agg
                                .row_mut(rj)
                                .scaled_add(dscore / dist, &delta.view());
                        }
                    }
                    SimilarityKind::LogisticRegression => {
                        let w = self.sim_params.weights.as_ref().unwrap();
                        let d = agg_dim;
                        {
                            let mut row = states[src_si].d_agg.row_mut(ri);
                            for k in 0..d {
                                row[k] += dscore * w[k];
                            }
                        }
                        {
                            let mut row = states[tgt_si].d_agg.row_mut(rj);
                            for k in 0..d {
                                row[k] += dscore * w[d + k];
                            }
                        }
                        let gw = grads.sim_weights.as_mut().unwrap();
                        for k in 0..d {
                            gw[k] += dscore * e_i[k];
                            gw[d + k] += dscore * e_j[k];
                        }
                    }
                }
            }
        }

        // Backprop through the aggregation and the autoencoders, adding the
        // weighted reconstruction terms per side.
        for (si, state) in states.iter().enumerate() {
            let side = sides[si];
            let n_users = state.users.len();
            // Un-aggregate d_agg into per-network embedding gradients.
            let emb_dims = self.embedding_dims();
            let mut d_embs: Vec<Array2<f64>> = emb_dims
                .iter()
                .map(|&d| Array2::zeros((n_users, d)))
                .collect();
            match self.aggregation {
                AggregationKind::Concatenation => {
                    let mut off = 0;
                    for (ni, &d) in emb_dims.iter().enumerate() {
                        d_embs[ni].assign(&state.d_agg.slice(ndarray::s![.., off..off + d]));
                        off += d;
                    }
                }
                AggregationKind::Summation => {
                    for d_emb in d_embs.iter_mut() {
                        d_emb.assign(&state.d_agg);
                    }
                }
                AggregationKind::MaxPooling => {
                    // route each element's gradient to the first network
                    // attaining the maximum
                    for r in 0..n_users {
                        for c in 0..emb_dims[0] {
                            let mut win = 0usize;
                            let mut best = state.traces[0].embedding()[[r, c]];
                            for ni in 1..state.traces.len() {
                                let v = state.traces[ni].embedding()[[r, c]];
                                if v > best {
                                    best = v;
                                    win = ni;
                                }
                            }
                            d_embs[win][[r, c]] = state.d_agg[[r, c]];
                        }
                    }
                }
            }

            for (ni, (kind, pair)) in pairs.iter().enumerate() {
                let coef = match kind {
                    NetKind::Sentiment => 1.0,
                    NetKind::Social => cfg.lambda1,
                    NetKind::Profile => cfg.lambda2,
                };
                let (recon_loss, mut d_recon) = recon_loss_grad_sparse(
                    &state.rows[ni],
                    state.traces[ni].reconstruction(),
                    cfg.alpha,
                );
                loss += coef * recon_loss;
                d_recon.mapv_inplace(|v| coef * v);
                let ae = pair.for_side(side);
                let ae_grads = ae.backward_batch(
                    &state.rows[ni],
                    &state.traces[ni],
                    &d_recon,
                    Some(&d_embs[ni]),
                )?;
                let target_pair = match kind {
                    NetKind::Sentiment => &mut grads.sent,
                    NetKind::Social => grads.social.as_mut().unwrap(),
                    NetKind::Profile => grads.profile.as_mut().unwrap(),
                };
                let slot = match side {
                    Side::Source => &mut target_pair.source,
                    Side::Target => target_pair
                        .target
                        .as_mut()
                        .unwrap_or(&mut target_pair.source),
                };
                slot.add_assign(&ae_grads);
            }
        }

        // λ4 regularization over all autoencoder weight matrices plus the
        // logistic-regression weights (biases unregularized).
        if cfg.lambda4 > 0.0 {
            let mut reg = 0.0;
            let mut reg_ae = |ae: &Autoencoder, g: &mut AeGrads| {
                for (layer, dw) in ae.layers.iter().zip(g.d_weights.iter_mut()) {
                    reg += layer.weight.iter().map(|&w| w * w).sum::<f64>();
                    dw.scaled_add(2.0 * cfg.lambda4, &layer.weight);
                }
            };
            reg_ae(&self.sent.source, &mut grads.sent.source);
            if let (Some(t), Some(gt)) = (&self.sent.target, grads.sent.target.as_mut()) {
                reg_ae(t, gt);
            }
            if let (Some(p), Some(gp)) = (&self.social, grads.social.as_mut()) {
                reg_ae(&p.source, &mut gp.source);
                if let (Some(t), Some(gt)) = (&p.target, gp.target.as_mut()) {
                    reg_ae(t, gt);
                }
            }
            if let (Some(p), Some(gp)) = (&self.profile, grads.profile.as_mut()) {
                reg_ae(&p.source, &mut gp.source);
                if let (Some(t), Some(gt)) = (&p.target, gp.target.as_mut()) {
                    reg_ae(t, gt);
                }
            }
            if let (Some(w), Some(gw)) = (&self.sim_params.weights, grads.sim_weights.as_mut()) {
                reg += w.iter().map(|&x| x * x).sum::<f64>();
                gw.scaled_add(2.0 * cfg.lambda4, w);
            }
            loss += cfg.lambda4 * reg;
        }

        Ok((loss, grads))
    }

    /// Flat views over every trainable tensor, in the fixed walker order
    /// shared with [`ModelGrads::tensor_slices_mut`].
    pub fn tensor_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        fn push_ae<'a>(out: &mut Vec<&'a mut [f64]>, ae: &'a mut Autoencoder) {
            for layer in ae.layers.iter_mut() {
                out.push(layer.weight.as_slice_mut().expect("contiguous"));
                out.push(layer.bias.as_slice_mut().expect("contiguous"));
            }
        }
        fn push_pair<'a>(out: &mut Vec<&'a mut [f64]>, p: &'a mut AePair) {
            push_ae(out, &mut p.source);
            if let Some(t) = p.target.as_mut() {
                push_ae(out, t);
            }
        }
        push_pair(&mut out, &mut self.sent);
        if let Some(p) = self.social.as_mut() {
            push_pair(&mut out, p);
        }
        if let Some(p) = self.profile.as_mut() {
            push_pair(&mut out, p);
        }
        if let Some(w) = self.sim_params.weights.as_mut() {
            out.push(w.as_slice_mut().expect("contiguous"));
        }
        out.push(std::slice::from_mut(&mut self.sim_params.bias));
        out
    }

    /// Read-only flat views in the same walker order.
    pub fn tensor_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        fn push_ae<'a>(out: &mut Vec<&'a [f64]>, ae: &'a Autoencoder) {
            for layer in ae.layers.iter() {
                out.push(layer.weight.as_slice().expect("contiguous"));
                out.push(layer.bias.as_slice().expect("contiguous"));
            }
        }
        fn push_pair<'a>(out: &mut Vec<&'a [f64]>, p: &'a AePair) {
            push_ae(out, &p.source);
            if let Some(t) = p.target.as_ref() {
                push_ae(out, t);
            }
        }
        push_pair(&mut out, &self.sent);
        if let Some(p) = self.social.as_ref() {
            push_pair(&mut out, p);
        }
        if let Some(p) = self.profile.as_ref() {
            push_pair(&mut out, p);
        }
        if let Some(w) = self.sim_params.weights.as_ref() {
            out.push(w.as_slice().expect("contiguous"));
        }
        out.push(std::slice::from_ref(&self.sim_params.bias));
        out
    }
}

/// Train a SHINE model on the sentiment links of `graph`.
///
/// Runs epochs of shuffled mini-batches; each step computes the objective on
/// the batch and applies an AdaGrad update to every trainable tensor. Stops at
/// `max_epochs` or when the relative change of the epoch mean loss drops below
/// `convergence_tol`.
pub fn train(graph: &HeteroGraph, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut model = ShineModel::init(graph, cfg)?;
    let links = graph.sentiment.edges();
    if links.is_empty() {
        return Err(ShineError::InvalidConfig(
            "sentiment network has no signed links".into(),
        ));
    }
    let mut acc = ModelGrads::zeros_like(&model);
    let mut epoch_losses: Vec<f64> = Vec::new();
    let mut shuffled = links;
    for epoch in 0..cfg.max_epochs {
        let mut rng = sub_rng_indexed(cfg.seed, "shuffle", epoch as u64);
        shuffled.shuffle(&mut rng);
        let mut total = 0.0;
        let mut n_batches = 0usize;
        for (bi, batch) in shuffled.chunks(cfg.batch_size).enumerate() {
            let (loss, mut grads) = model.objective(graph, batch)?;
            if !loss.is_finite() {
                return Err(ShineError::Divergence { epoch, batch: bi });
            }
            let g_slices = grads.tensor_slices_mut();
            let a_slices = acc.tensor_slices_mut();
            let p_slices = model.tensor_slices_mut();
            for ((p, g), a) in p_slices.into_iter().zip(g_slices).zip(a_slices) {
                adagrad_apply(p, g, a, cfg.learning_rate, cfg.adagrad_epsilon);
            }
            total += loss;
            n_batches += 1;
        }
        let epoch_loss = total / n_batches as f64;
        if let Some(&prev) = epoch_losses.last() {
            let rel = (prev - epoch_loss).abs() / prev.abs().max(1e-12);
            epoch_losses.push(epoch_loss);
            if rel < cfg.convergence_tol {
                break;
            }
        } else {
            epoch_losses.push(epoch_loss);
        }
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}
