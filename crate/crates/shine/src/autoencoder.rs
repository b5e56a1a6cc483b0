//! Feed-forward deep autoencoder with element-weighted squared reconstruction
//! loss and exact analytic gradients.
//!
//! The layer plan is a palindrome `[input, hidden.., embedding, hidden.., input]`
//! with an even layer count K; the embedding is the output of layer K/2.
//! Training works on batches of sparse adjacency rows: the first-layer product
//! touches only non-zero input positions, while the reconstruction loss is
//! evaluated over all output positions.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ShineError};
use crate::graph::AdjacencyVector;
use crate::rng::sub_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            other => Err(ShineError::InvalidConfig(format!(
                "unknown activation '{other}'"
            ))),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        x.tanh()
    }

    /// Derivative expressed in terms of the activation value a = σ(z).
    #[inline]
    pub fn deriv_from_output(&self, a: f64) -> f64 {
        1.0 - a * a
    }
}

#[derive(Debug, Clone)]
pub struct LayerParams {
    /// out_dim × in_dim
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct Autoencoder {
    pub layers: Vec<LayerParams>,
    pub dims: Vec<usize>,
    pub activation: Activation,
}

/// Per-layer activations for a batch of rows (layer k at index k-1).
#[derive(Debug, Clone)]
pub struct BatchTrace {
    pub activations: Vec<Array2<f64>>,
    k_half: usize,
}

impl BatchTrace {
    pub fn embedding(&self) -> &Array2<f64> {
        &self.activations[self.k_half - 1]
    }

    pub fn reconstruction(&self) -> &Array2<f64> {
        self.activations.last().unwrap()
    }
}

/// Single-sample trace; `layers[0]` is the dense input, `layers[k]` the
/// activation of layer k.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub layers: Vec<Array1<f64>>,
    k_half: usize,
}

impl ForwardTrace {
    pub fn embedding(&self) -> &Array1<f64> {
        &self.layers[self.k_half]
    }

    pub fn reconstruction(&self) -> &Array1<f64> {
        self.layers.last().unwrap()
    }
}

/// Parameter gradients, shaped like the autoencoder's layers.
#[derive(Debug, Clone)]
pub struct AeGrads {
    pub d_weights: Vec<Array2<f64>>,
    pub d_biases: Vec<Array1<f64>>,
}

impl AeGrads {
    pub fn zeros_like(ae: &Autoencoder) -> Self {
        AeGrads {
            d_weights: ae
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weight.raw_dim()))
                .collect(),
            d_biases: ae
                .layers
                .iter()
                .map(|l| Array1::zeros(l.bias.raw_dim()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &AeGrads) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a += b;
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            *a += b;
        }
    }
}

fn validate_dims(dims: &[usize]) -> Result<usize> {
    let k = dims.len().saturating_sub(1);
    if k < 2 || k % 2 != 0 {
        return Err(ShineError::InvalidDims {
            dims: dims.to_vec(),
            reason: format!("layer count {k} must be even and >= 2"),
        });
    }
    for i in 0..dims.len() {
        if dims[i] == 0 {
            return Err(ShineError::InvalidDims {
                dims: dims.to_vec(),
                reason: "zero-width layer".into(),
            });
        }
        if dims[i] != dims[dims.len() - 1 - i] {
            return Err(ShineError::InvalidDims {
                dims: dims.to_vec(),
                reason: "not palindromic".into(),
            });
        }
    }
    Ok(k)
}

impl Autoencoder {
    /// Glorot-uniform weights, zero biases, deterministic under `rng`.
    pub fn init_with_rng(dims: &[usize], activation: Activation, rng: &mut ChaCha8Rng) -> Result<Self> {
        let _k = validate_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weight =
                    Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-limit..=limit));
                LayerParams {
                    weight,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Autoencoder {
            layers,
            dims: dims.to_vec(),
            activation,
        })
    }

    pub fn init(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut rng = sub_rng(seed, "init");
        Self::init_with_rng(dims, activation, &mut rng)
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn embedding_dim(&self) -> usize {
        self.dims[self.n_layers() / 2]
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// Forward pass over a batch of sparse rows (one row per sample).
    pub fn forward_batch(&self, rows: &[AdjacencyVector]) -> Result<BatchTrace> {
        let n = rows.len();
        let k = self.n_layers();
        for r in rows {
            if r.len != self.input_dim() {
                return Err(ShineError::DimMismatch {
                    expected: self.input_dim(),
                    actual: r.len,
                });
            }
        }
        let mut activations = Vec::with_capacity(k);
        // First layer: bias plus a scatter of W's columns at non-zero inputs.
        let l0 = &self.layers[0];
        let mut pre = Array2::zeros((n, l0.bias.len()));
        for (r, row) in rows.iter().enumerate() {
            let mut out = pre.row_mut(r);
            out.assign(&l0.bias);
            for &(pos, val) in &row.entries {
                out.scaled_add(val, &l0.weight.column(pos));
            }
        }
        pre.mapv_inplace(|x| self.activation.apply(x));
        activations.push(pre);
        for layer in &self.layers[1..] {
            let prev = activations.last().unwrap();
            let mut pre = prev.dot(&layer.weight.t());
            pre += &layer.bias;
            pre.mapv_inplace(|x| self.activation.apply(x));
            activations.push(pre);
        }
        Ok(BatchTrace {
            activations,
            k_half: k / 2,
        })
    }

    /// Single-sample forward pass; the trace includes the dense input.
    pub fn forward(&self, x: &AdjacencyVector) -> Result<ForwardTrace> {
        let batch = self.forward_batch(std::slice::from_ref(x))?;
        let mut layers = Vec::with_capacity(self.n_layers() + 1);
        layers.push(Array1::from_vec(x.dense()));
        for a in &batch.activations {
            layers.push(a.row(0).to_owned());
        }
        Ok(ForwardTrace {
            layers,
            k_half: self.n_layers() / 2,
        })
    }

    /// Backpropagate `d_recon` (gradient of the loss w.r.t. the reconstruction)
    /// plus an optional gradient injected at the embedding layer. Parameter
    /// gradients are summed over the batch.
    pub fn backward_batch(
        &self,
        rows: &[AdjacencyVector],
        trace: &BatchTrace,
        d_recon: &Array2<f64>,
        d_embed: Option<&Array2<f64>>,
    ) -> Result<AeGrads> {
        let k = self.n_layers();
        if trace.activations.len() != k || rows.len() != trace.activations[0].nrows() {
            return Err(ShineError::DimMismatch {
                expected: k,
                actual: trace.activations.len(),
            });
        }
        let mut grads = AeGrads::zeros_like(self);
        // delta for layer K
        let a_last = &trace.activations[k - 1];
        let mut delta = d_recon * &a_last.mapv(|a| self.activation.deriv_from_output(a));
        for layer_idx in (0..k).rev() {
            grads.d_biases[layer_idx] = delta.sum_axis(Axis(0));
            if layer_idx == 0 {
                // dW1 over non-zero input positions only
                let dw = &mut grads.d_weights[0];
                for (r, row) in rows.iter().enumerate() {
                    for &(pos, val) in &row.entries {
                        dw.column_mut(pos).scaled_add(val, &delta.row(r));
                    }
                }
            } else {
                let a_prev = &trace.activations[layer_idx - 1];
                grads.d_weights[layer_idx] = delta.t().dot(a_prev);
                let mut d_act = delta.dot(&self.layers[layer_idx].weight);
                if layer_idx == trace.k_half {
                    if let Some(de) = d_embed {
                        d_act += de;
                    }
                }
                delta = d_act * &a_prev.mapv(|a| self.activation.deriv_from_output(a));
            }
        }
        Ok(grads)
    }

    /// Single-sample backward pass for the total weighted reconstruction loss,
    /// with an optional upstream gradient at the embedding. Also returns the
    /// gradient with respect to the input vector.
    pub fn backward(
        &self,
        x: &AdjacencyVector,
        trace: &ForwardTrace,
        weights: &Array1<f64>,
        upstream_embedding_grad: Option<&Array1<f64>>,
    ) -> Result<(AeGrads, Array1<f64>)> {
        let rows = std::slice::from_ref(x);
        let batch = self.forward_batch(rows)?;
        let recon = batch.reconstruction();
        let x_dense = Array1::from_vec(x.dense());
        if weights.len() != x_dense.len() || trace.layers.len() != self.n_layers() + 1 {
            return Err(ShineError::DimMismatch {
                expected: x_dense.len(),
                actual: weights.len(),
            });
        }
        let resid = &recon.row(0).to_owned() - &x_dense;
        let d_recon_row = 2.0 * &(&resid * &weights.mapv(|w| w * w));
        let d_recon = d_recon_row.insert_axis(Axis(0));
        let d_embed = upstream_embedding_grad.map(|g| g.clone().insert_axis(Axis(0)));
        let grads = self.backward_batch(rows, &batch, &d_recon, d_embed.as_ref())?;
        // input-side gradient: rerun the delta chain all the way down to layer 1
        let k = self.n_layers();
        let a_last = &batch.activations[k - 1];
        let mut delta = &d_recon * &a_last.mapv(|a| self.activation.deriv_from_output(a));
        for layer_idx in (1..k).rev() {
            let a_prev = &batch.activations[layer_idx - 1];
            let mut d_act = delta.dot(&self.layers[layer_idx].weight);
            if layer_idx == k / 2 {
                if let Some(de) = d_embed.as_ref() {
                    d_act += de;
                }
            }
            delta = d_act * &a_prev.mapv(|a| self.activation.deriv_from_output(a));
        }
        let d_input = delta.dot(&self.layers[0].weight).row(0).to_owned();
        Ok((grads, d_input))
    }
}

/// Reconstruction weight rule: penalty `alpha` at non-zero input positions,
/// 1 elsewhere.
pub fn recon_weights(x: &AdjacencyVector, alpha: f64) -> Array1<f64> {
    debug_assert!(alpha >= 1.0);
    let mut w = Array1::ones(x.len);
    for &(pos, _) in &x.entries {
        w[pos] = alpha;
    }
    w
}

/// Σ_j (w_j · (x_j − x'_j))² — the weight multiplies the residual before
/// squaring.
pub fn weighted_recon_loss(x: &Array1<f64>, x_rec: &Array1<f64>, w: &Array1<f64>) -> Result<f64> {
    if x.len() != x_rec.len() || x.len() != w.len() {
        return Err(ShineError::DimMismatch {
            expected: x.len(),
            actual: x_rec.len().max(w.len()),
        });
    }
    Ok(x.iter()
        .zip(x_rec)
        .zip(w)
        .map(|((&a, &b), &wj)| {
            let d = wj * (a - b);
            d * d
        })
        .sum())
}

/// Batch reconstruction loss and its gradient w.r.t. the reconstruction,
/// computed directly from sparse input rows.
///
/// loss = Σ_r Σ_j (w_rj (x_rj − x'_rj))² with w_rj = alpha at non-zero inputs,
/// 1 elsewhere; d_recon = 2 w² (x' − x).
pub fn recon_loss_grad_sparse(
    rows: &[AdjacencyVector],
    recon: &Array2<f64>,
    alpha: f64,
) -> (f64, Array2<f64>) {
    let mut resid = recon.clone();
    for (r, row) in rows.iter().enumerate() {
        for &(pos, val) in &row.entries {
            resid[[r, pos]] -= val;
        }
    }
    let alpha_sq = alpha * alpha;
    let mut loss = resid.iter().map(|&d| d * d).sum::<f64>();
    for (r, row) in rows.iter().enumerate() {
        for &(pos, _) in &row.entries {
            let d = resid[[r, pos]];
            loss += (alpha_sq - 1.0) * d * d;
        }
    }
    let mut d_recon = resid;
    d_recon.mapv_inplace(|d| 2.0 * d);
    for (r, row) in rows.iter().enumerate() {
        for &(pos, _) in &row.entries {
            d_recon[[r, pos]] *= alpha_sq;
        }
    }
    (loss, d_recon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn sparse(len: usize, entries: &[(usize, f64)]) -> AdjacencyVector {
        AdjacencyVector {
            len,
            entries: entries.to_vec(),
        }
    }

    fn identity_net(dim: usize) -> Autoencoder {
        let layer = || LayerParams {
            weight: Array2::eye(dim),
            bias: Array1::zeros(dim),
        };
        Autoencoder {
            layers: vec![layer(), layer()],
            dims: vec![dim; 3],
            activation: Activation::Tanh,
        }
    }

    #[test]
    fn init_structure() {
        let ae = Autoencoder::init(&[4, 3, 2, 3, 4], Activation::Tanh, 0).unwrap();
        assert_eq!(ae.n_layers(), 4);
        assert_eq!(ae.embedding_dim(), 2);
        let ae = Autoencoder::init(&[4, 3, 4], Activation::Tanh, 0).unwrap();
        assert_eq!(ae.n_layers(), 2);
        assert_eq!(ae.embedding_dim(), 3);
        assert!(Autoencoder::init(&[4, 3, 2], Activation::Tanh, 0).is_err());
        assert!(Autoencoder::init(&[4, 3, 3, 4], Activation::Tanh, 0).is_err());
    }

    #[test]
    fn init_is_deterministic() {
        let a = Autoencoder::init(&[4, 3, 2, 3, 4], Activation::Tanh, 5).unwrap();
        let b = Autoencoder::init(&[4, 3, 2, 3, 4], Activation::Tanh, 5).unwrap();
        assert_eq!(a.layers[0].weight, b.layers[0].weight);
        assert!(a.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn forward_identity_tanh() {
        let ae = identity_net(2);
        let t = ae.forward(&sparse(2, &[])).unwrap();
        assert_eq!(t.embedding().to_vec(), vec![0.0, 0.0]);
        assert_eq!(t.reconstruction().to_vec(), vec![0.0, 0.0]);

        let t = ae.forward(&sparse(2, &[(0, 1.0)])).unwrap();
        assert_abs_diff_eq!(t.embedding()[0], 1.0_f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            t.reconstruction()[0],
            1.0_f64.tanh().tanh(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(t.embedding()[0], 0.76159, epsilon = 1e-5);
        assert_abs_diff_eq!(t.reconstruction()[0], 0.64201, epsilon = 1e-5);
        assert!(t.layers[1..]
            .iter()
            .all(|l| l.iter().all(|&v| v.abs() < 1.0)));
    }

    #[test]
    fn recon_weight_rule() {
        let x = sparse(3, &[(0, 1.0), (2, -1.0)]);
        assert_eq!(recon_weights(&x, 10.0).to_vec(), vec![10.0, 1.0, 10.0]);
        assert_eq!(recon_weights(&x, 1.0).to_vec(), vec![1.0, 1.0, 1.0]);
        assert_eq!(recon_weights(&sparse(3, &[]), 10.0).to_vec(), vec![1.0; 3]);
    }

    #[test]
    fn weighted_loss_values() {
        let x = Array1::from_vec(vec![1.0, 0.0]);
        let xr = Array1::from_vec(vec![0.5, 0.2]);
        let w = Array1::from_vec(vec![10.0, 1.0]);
        assert_abs_diff_eq!(
            weighted_recon_loss(&x, &xr, &w).unwrap(),
            25.04,
            epsilon = 1e-12
        );
        assert_eq!(weighted_recon_loss(&x, &x, &w).unwrap(), 0.0);
        let ones = Array1::ones(2);
        assert_abs_diff_eq!(
            weighted_recon_loss(&x, &xr, &ones).unwrap(),
            0.25 + 0.04,
            epsilon = 1e-12
        );
        assert!(weighted_recon_loss(&x, &xr, &Array1::ones(3)).is_err());
    }

    #[test]
    fn sparse_loss_matches_dense_formula() {
        let ae = Autoencoder::init(&[5, 3, 2, 3, 5], Activation::Tanh, 1).unwrap();
        let rows = vec![sparse(5, &[(1, 1.0), (4, -1.0)]), sparse(5, &[])];
        let trace = ae.forward_batch(&rows).unwrap();
        let (loss, _) = recon_loss_grad_sparse(&rows, trace.reconstruction(), 3.0);
        let mut expect = 0.0;
        for (r, row) in rows.iter().enumerate() {
            let x = Array1::from_vec(row.dense());
            let w = recon_weights(row, 3.0);
            let xr = trace.reconstruction().row(r).to_owned();
            expect += weighted_recon_loss(&x, &xr, &w).unwrap();
        }
        assert_abs_diff_eq!(loss, expect, epsilon = 1e-12);
    }

    #[test]
    fn alpha_one_equals_plain_squared_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n: usize = 6;
            let x = Array1::from_shape_fn(n, |_| {
                [-1.0, 0.0, 1.0][rng.gen_range(0..3)]
            });
            let xr = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
            let w = Array1::ones(n);
            let plain: f64 = x
                .iter()
                .zip(&xr)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            assert_abs_diff_eq!(
                weighted_recon_loss(&x, &xr, &w).unwrap(),
                plain,
                epsilon = 1e-12
            );
        }
    }

    /// Central finite-difference check of the analytic gradients of the total
    /// weighted reconstruction loss plus a linear term on the embedding.
    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-5;
        for seed in 0..20u64 {
            let dims = [6usize, 4, 2, 4, 6];
            let mut ae = Autoencoder::init(&dims, Activation::Tanh, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let x = sparse(
                6,
                &[(0, 1.0), (2, -1.0), (5, 1.0)]
                    .iter()
                    .filter(|_| rng.gen_bool(0.8))
                    .copied()
                    .collect::<Vec<_>>(),
            );
            let alpha = 4.0;
            let w = recon_weights(&x, alpha);
            let up = Array1::from_shape_fn(2, |_| rng.gen_range(-1.0..1.0));

            let loss_of = |ae: &Autoencoder| {
                let t = ae.forward(&x).unwrap();
                let rec = t.reconstruction();
                let xd = Array1::from_vec(x.dense());
                weighted_recon_loss(&xd, rec, &w).unwrap() + up.dot(t.embedding())
            };

            let trace = ae.forward(&x).unwrap();
            let (grads, _) = ae.backward(&x, &trace, &w, Some(&up)).unwrap();

            let mut max_rel: f64 = 0.0;
            for li in 0..ae.n_layers() {
                let shape = ae.layers[li].weight.raw_dim();
                for r in 0..shape[0] {
                    for c in 0..shape[1] {
                        let orig = ae.layers[li].weight[[r, c]];
                        ae.layers[li].weight[[r, c]] = orig + h;
                        let lp = loss_of(&ae);
                        ae.layers[li].weight[[r, c]] = orig - h;
                        let lm = loss_of(&ae);
                        ae.layers[li].weight[[r, c]] = orig;
                        let fd = (lp - lm) / (2.0 * h);
                        let an = grads.d_weights[li][[r, c]];
                        let denom = fd.abs().max(an.abs()).max(1e-6);
                        max_rel = max_rel.max((fd - an).abs() / denom);
                    }
                }
                for b in 0..ae.layers[li].bias.len() {
                    let orig = ae.layers[li].bias[b];
                    ae.layers[li].bias[b] = orig + h;
                    let lp = loss_of(&ae);
                    ae.layers[li].bias[b] = orig - h;
                    let lm = loss_of(&ae);
                    ae.layers[li].bias[b] = orig;
                    let fd = (lp - lm) / (2.0 * h);
                    let an = grads.d_biases[li][b];
                    let denom = fd.abs().max(an.abs()).max(1e-6);
                    max_rel = max_rel.max((fd - an).abs() / denom);
                }
            }
            assert!(max_rel < 1e-4, "seed {seed}: max rel err {max_rel}");
        }
    }

    #[test]
    fn weight_scaling_is_quadratic() {
        let ae = Autoencoder::init(&[4, 2, 4], Activation::Tanh, 9).unwrap();
        let x = sparse(4, &[(1, 1.0), (3, -1.0)]);
        let trace = ae.forward(&x).unwrap();
        let w = recon_weights(&x, 2.0);
        let (g1, _) = ae.backward(&x, &trace, &w, None).unwrap();
        let c = 3.0;
        let (g2, _) = ae.backward(&x, &trace, &(&w * c), None).unwrap();
        for (a, b) in g1.d_weights.iter().zip(&g2.d_weights) {
            for (x1, x2) in a.iter().zip(b) {
                assert_abs_diff_eq!(x2, &(c * c * x1), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_and_batch_forward_agree() {
        let ae = Autoencoder::init(&[6, 4, 2, 4, 6], Activation::Tanh, 11).unwrap();
        let rows = vec![
            sparse(6, &[(0, 1.0), (3, -1.0)]),
            sparse(6, &[(5, 1.0)]),
            sparse(6, &[]),
        ];
        let batch = ae.forward_batch(&rows).unwrap();
        for (r, row) in rows.iter().enumerate() {
            let t = ae.forward(row).unwrap();
            for (a, b) in t.reconstruction().iter().zip(batch.reconstruction().row(r)) {
                assert_eq!(a, b);
            }
            for (a, b) in t.embedding().iter().zip(batch.embedding().row(r)) {
                assert_eq!(a, b);
            }
        }
    }
}
