//! Self-describing binary model container.
//!
//! Layout: 8-byte magic, a length-prefixed JSON metadata header, then every
//! trainable tensor in the fixed walker order, each as a u64 element count
//! followed by row-major little-endian f64 values. Save → load → save is
//! byte-identical.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::autoencoder::{Activation, Autoencoder, LayerParams};
use crate::config::TrainConfig;
use crate::error::{Result, ShineError};
use crate::model::{AePair, ShineModel, SimilarityParams};

const MAGIC: &[u8; 8] = b"SHINEM01";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelMeta {
    format_version: u32,
    activation: String,
    config: TrainConfig,
    sent_dims: Vec<usize>,
    social_dims: Option<Vec<usize>>,
    profile_dims: Option<Vec<usize>>,
    sim_weights_len: Option<usize>,
    /// Fingerprint of the training graph's node table.
    node_table_hash: String,
}

pub fn save_model<W: Write>(model: &ShineModel, node_table_hash: &str, mut w: W) -> Result<()> {
    let meta = ModelMeta {
        format_version: FORMAT_VERSION,
        activation: model.sent.source.activation.name().to_string(),
        config: model.config.clone(),
        sent_dims: model.sent.source.dims.clone(),
        social_dims: model.social.as_ref().map(|p| p.source.dims.clone()),
        profile_dims: model.profile.as_ref().map(|p| p.source.dims.clone()),
        sim_weights_len: model.sim_params.weights.as_ref().map(|v| v.len()),
        node_table_hash: node_table_hash.to_string(),
    };
    let meta_json = serde_json::to_vec(&meta)?;
    w.write_all(MAGIC)?;
    w.write_all(&(meta_json.len() as u64).to_le_bytes())?;
    w.write_all(&meta_json)?;
    for slice in model.tensor_slices() {
        w.write_all(&(slice.len() as u64).to_le_bytes())?;
        for &v in slice {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact_vec<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let b = read_exact_vec(r, 8)?;
    Ok(u64::from_le_bytes(b.try_into().unwrap()))
}

fn read_tensor<R: Read>(r: &mut R, expected: usize) -> Result<Vec<f64>> {
    let n = read_u64(r)? as usize;
    if n != expected {
        return Err(ShineError::ModelFormat(format!(
            "tensor length {n}, expected {expected}"
        )));
    }
    let bytes = read_exact_vec(r, n * 8)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_autoencoder<R: Read>(r: &mut R, dims: &[usize], activation: Activation) -> Result<Autoencoder> {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for w in dims.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let wv = read_tensor(r, n_out * n_in)?;
        let bv = read_tensor(r, n_out)?;
        layers.push(LayerParams {
            weight: Array2::from_shape_vec((n_out, n_in), wv)
                .map_err(|e| ShineError::ModelFormat(e.to_string()))?,
            bias: Array1::from_vec(bv),
        });
    }
    Ok(Autoencoder {
        layers,
        dims: dims.to_vec(),
        activation,
    })
}

fn read_pair<R: Read>(
    r: &mut R,
    dims: &[usize],
    activation: Activation,
    asymmetric: bool,
) -> Result<AePair> {
    let source = read_autoencoder(r, dims, activation)?;
    let target = if asymmetric {
        Some(read_autoencoder(r, dims, activation)?)
    } else {
        None
    };
    Ok(AePair { source, target })
}

/// Load a model and the node-table hash it was trained against.
pub fn load_model<R: Read>(mut r: R) -> Result<(ShineModel, String)> {
    let magic = read_exact_vec(&mut r, 8)?;
    if magic != MAGIC {
        return Err(ShineError::ModelFormat("bad magic".into()));
    }
    let meta_len = read_u64(&mut r)? as usize;
    let meta: ModelMeta = serde_json::from_slice(&read_exact_vec(&mut r, meta_len)?)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(ShineError::ModelFormat(format!(
            "unsupported format version {}",
            meta.format_version
        )));
    }
    let activation = Activation::from_name(&meta.activation)?;
    let asym = meta.config.asymmetric;
    let sent = read_pair(&mut r, &meta.sent_dims, activation, asym)?;
    let social = match &meta.social_dims {
        Some(dims) => Some(read_pair(&mut r, dims, activation, asym)?),
        None => None,
    };
    let profile = match &meta.profile_dims {
        Some(dims) => Some(read_pair(&mut r, dims, activation, asym)?),
        None => None,
    };
    let weights = match meta.sim_weights_len {
        Some(len) => Some(Array1::from_vec(read_tensor(&mut r, len)?)),
        None => None,
    };
    let bias = read_tensor(&mut r, 1)?[0];
    Ok((
        ShineModel {
            sent,
            social,
            profile,
            aggregation: meta.config.aggregation,
            similarity: meta.config.similarity,
            sim_params: SimilarityParams { weights, bias },
            config: meta.config,
        },
        meta.node_table_hash,
    ))
}
