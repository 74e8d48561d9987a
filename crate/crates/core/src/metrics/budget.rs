use serde::{Deserialize, Serialize};

/// Architecture of a GPT-style decoder and its memory footprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelBudget {
    pub layers: u64,
    pub hidden_dim: u64,
    pub heads: u64,
    pub vocab: u64,
    pub context_len: u64,
    pub tied_embeddings: bool,
    pub param_count: u64,
    pub bytes_per_param: u64,
    pub ram_bytes: u64,
}

impl ModelBudget {
    pub fn new(
        layers: u64,
        hidden_dim: u64,
        heads: u64,
        vocab: u64,
        context_len: u64,
        tied_embeddings: bool,
        bytes_per_param: u64,
    ) -> Self {
        let param_count = estimate_params(layers, hidden_dim, heads, vocab, context_len, tied_embeddings);
        ModelBudget {
            layers,
            hidden_dim,
            heads,
            vocab,
            context_len,
            tied_embeddings,
            param_count,
            bytes_per_param,
            ram_bytes: estimate_ram(param_count, bytes_per_param),
        }
    }
}

/// Parameter count of a decoder-only transformer with learned positions.
///
/// Token and position embeddings, per layer `12d² + 13d` (attention and MLP
/// weights with biases, two layer norms), a final layer norm, and an output
/// projection unless it is tied to the token embedding. Head count does not
/// change the total.
pub fn estimate_params(
    layers: u64,
    hidden_dim: u64,
    _heads: u64,
    vocab: u64,
    context_len: u64,
    tied_embeddings: bool,
) -> u64 {
    let d = hidden_dim;
    let embeddings = vocab * d + context_len * d;
    let blocks = layers * (12 * d * d + 13 * d);
    let head = if tied_embeddings { 0 } else { vocab * d };
    embeddings + blocks + 2 * d + head
}

pub fn estimate_ram(param_count: u64, bytes_per_param: u64) -> u64 {
    param_count * bytes_per_param
}

/// Decimal gigabytes with one fractional digit, e.g. `3.6 GB`.
pub fn format_gb(bytes: u64) -> String {
    format!("{:.1} GB", bytes as f64 / 1e9)
}
