"""
Transformer building blocks over (batch, positions, hidden) tensors.

Blocks are post-layer-norm: each sub-layer output is added to its input
and then normalized.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from model.params import ModelParams
from numcore import ops
from numcore.tensor import DiffTensor


MASK_BIAS = -1e9


def key_bias(key_mask: Optional[np.ndarray], dtype) -> Optional[np.ndarray]:
    """Additive (batch, 1, 1, keys) bias that hides padded keys."""
    if key_mask is None:
        return None
    mask = np.asarray(key_mask)
    return np.where(mask[:, None, None, :] > 0, 0.0, MASK_BIAS).astype(dtype)


def linear(x: DiffTensor, params: ModelParams, prefix: str, weight: str = "w", bias: str = "b") -> DiffTensor:
    return ops.matmul(x, params[f"{prefix}.{weight}"]) + params[f"{prefix}.{bias}"]


def layer_norm(x: DiffTensor, params: ModelParams, prefix: str) -> DiffTensor:
    return ops.layer_norm(x, params[f"{prefix}.gamma"], params[f"{prefix}.beta"])


def _split_heads(x: DiffTensor, heads: int) -> DiffTensor:
    batch, positions, hidden = x.shape
    return ops.transpose(ops.reshape(x, (batch, positions, heads, hidden // heads)), (0, 2, 1, 3))


def _merge_heads(x: DiffTensor) -> DiffTensor:
    batch, heads, positions, dim = x.shape
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (batch, positions, heads * dim))


def multi_head_attention(
    query: DiffTensor,
    memory: DiffTensor,
    params: ModelParams,
    prefix: str,
    heads: int,
    key_mask: Optional[np.ndarray] = None,
) -> Tuple[DiffTensor, np.ndarray]:
    """
    Scaled dot-product attention of `query` positions over `memory` positions.

    No causal mask is ever applied: every query position sees every
    unpadded key. Returns the projected output and the attention weights
    (batch, heads, queries, keys) as a plain array.
    """
    q = _split_heads(linear(query, params, prefix, "wq", "bq"), heads)
    k = _split_heads(linear(memory, params, prefix, "wk", "bk"), heads)
    v = _split_heads(linear(memory, params, prefix, "wv", "bv"), heads)

    scale = 1.0 / math.sqrt(q.shape[-1])
    scores = ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))) * scale
    bias = key_bias(key_mask, scores.dtype)
    if bias is not None:
        scores = scores + bias
    weights = ops.softmax(scores, axis=-1)
    context = _merge_heads(ops.matmul(weights, v))
    return linear(context, params, prefix, "wo", "bo"), weights.values


def feed_forward(x: DiffTensor, params: ModelParams, prefix: str) -> DiffTensor:
    hidden = ops.gelu(linear(x, params, prefix, "w1", "b1"))
    return linear(hidden, params, prefix, "w2", "b2")


def encoder_block(
    x: DiffTensor,
    params: ModelParams,
    index: int,
    heads: int,
    key_mask: Optional[np.ndarray],
    dropout: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> DiffTensor:
    prefix = f"encoder.{index}"
    attended, _ = multi_head_attention(x, x, params, f"{prefix}.attn", heads, key_mask)
    x = layer_norm(x + ops.dropout(attended, dropout, rng), params, f"{prefix}.attn_norm")
    x = layer_norm(x + ops.dropout(feed_forward(x, params, f"{prefix}.ffn"), dropout, rng), params, f"{prefix}.ffn_norm")
    return x


def decoder_block(
    q: DiffTensor,
    memory: DiffTensor,
    params: ModelParams,
    index: int,
    heads: int,
    key_mask: Optional[np.ndarray],
    dropout: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[DiffTensor, List[np.ndarray]]:
    """
    Label-query decoder block: full self-attention over the query stream,
    cross-attention onto the encoder memory, then the feed-forward layer.

    Returns the block output and [self-attention, cross-attention] weights.
    """
    prefix = f"asc.{index}"
    attended, self_weights = multi_head_attention(q, q, params, f"{prefix}.self_attn", heads, key_mask)
    q = layer_norm(q + ops.dropout(attended, dropout, rng), params, f"{prefix}.self_norm")
    crossed, cross_weights = multi_head_attention(q, memory, params, f"{prefix}.cross_attn", heads, key_mask)
    q = layer_norm(q + ops.dropout(crossed, dropout, rng), params, f"{prefix}.cross_norm")
    q = layer_norm(q + ops.dropout(feed_forward(q, params, f"{prefix}.ffn"), dropout, rng), params, f"{prefix}.ffn_norm")
    return q, [self_weights, cross_weights]
