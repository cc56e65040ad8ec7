"""
The cascaded aspect-term / aspect-sentiment tagger.

The encoder produces L layer outputs. The ATE head reads the top layer;
the ASC branch reads layer l (the last shared layer) as decoder memory and
a query stream built from term labels (gold during training, the ATE
prediction at inference).
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from data.schema import SCHEMA, TERM_O
from data.vocab import CLS_ID, SEP_ID
from decoding.spans import repair_bio_ids
from model.config import EncoderConfig
from model.layers import decoder_block, encoder_block, layer_norm, linear
from model.params import ModelParams, init_params, initial_value, param_shapes
from numcore import ops
from numcore.tensor import DiffTensor, no_grad
from utils.errors import DataError, ShapeError
from utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class BranchOutput:
    """Hidden states, logits and softmax rows of one tagging branch."""
    hidden: DiffTensor
    logits: DiffTensor
    probs: DiffTensor
    attention: List[np.ndarray] = field(default_factory=list)


@dataclass
class ForwardOutput:
    layers: List[DiffTensor]
    ate: BranchOutput
    asc: BranchOutput
    q_labels: np.ndarray


class GraceModel:
    """
    Forward computation over a ModelParams collection.

    The model holds no state besides its parameters, so any number of
    instances may share one read-only ModelParams for inference.
    """

    def __init__(self, config: EncoderConfig, params: ModelParams):
        self.config = config
        self.params = params

    @classmethod
    def initialize(cls, config: EncoderConfig, seed: int) -> "GraceModel":
        return cls(config, init_params(config, seed))

    # --- input checks ---

    def _check_ids(self, token_ids: np.ndarray) -> np.ndarray:
        token_ids = np.atleast_2d(np.asarray(token_ids, dtype=np.int64))
        if token_ids.shape[1] > self.config.max_len:
            raise ShapeError(f"sequence of length {token_ids.shape[1]} exceeds max_len {self.config.max_len}")
        if token_ids.size and (token_ids.min() < 0 or token_ids.max() >= self.config.vocab_size):
            raise DataError(f"token id outside vocabulary of size {self.config.vocab_size}")
        return token_ids

    # --- encoder ---

    def embed(self, token_ids: np.ndarray) -> DiffTensor:
        """Token embeddings E (batch, positions, hidden), before positions are added."""
        return ops.take(self.params["embed.token"], self._check_ids(token_ids))

    def encode(
        self,
        token_ids: Optional[np.ndarray] = None,
        perturbation: Optional[DiffTensor] = None,
        attention_mask: Optional[np.ndarray] = None,
        embeddings: Optional[DiffTensor] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> List[DiffTensor]:
        """
        Run the encoder and return all L layer outputs.

        Either token_ids or precomputed token embeddings must be given; a
        perturbation is added to the token embeddings before position
        embeddings and the first layer.
        """
        if embeddings is None:
            if token_ids is None:
                raise ValueError("encode needs token_ids or embeddings")
            embeddings = self.embed(token_ids)
        x = embeddings
        if perturbation is not None:
            if perturbation.shape != x.shape:
                raise ShapeError(f"perturbation shape {perturbation.shape} does not match embeddings {x.shape}")
            x = x + perturbation
        positions = x.shape[1]
        if positions > self.config.max_len:
            raise ShapeError(f"sequence of length {positions} exceeds max_len {self.config.max_len}")

        dropout = self.config.dropout if train else 0.0
        x = x + ops.take(self.params["embed.position"], np.arange(positions))
        x = ops.dropout(layer_norm(x, self.params, "embed.norm"), dropout, rng)

        layers = []
        for k in range(self.config.layers):
            x = encoder_block(x, self.params, k, self.config.heads, attention_mask, dropout, rng)
            layers.append(x)
        return layers

    # --- heads ---

    def ate_branch(self, layers: List[DiffTensor]) -> BranchOutput:
        if len(layers) != self.config.layers:
            raise ShapeError(f"expected {self.config.layers} encoder layers, got {len(layers)}")
        hidden = layers[-1]
        logits = linear(hidden, self.params, "ate_head")
        return BranchOutput(hidden, logits, ops.softmax(logits, axis=-1))

    def asc_memory(self, layers: List[DiffTensor]) -> DiffTensor:
        """H_c, the output of shared layer l."""
        if len(layers) != self.config.layers:
            raise ShapeError(f"expected {self.config.layers} encoder layers, got {len(layers)}")
        return layers[self.config.shared_layers - 1]

    def decode_labels(
        self,
        memory: DiffTensor,
        q_labels: np.ndarray,
        attention_mask: Optional[np.ndarray] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[DiffTensor, List[np.ndarray]]:
        """G_c from the memory and the term-label query stream."""
        q_labels = np.atleast_2d(np.asarray(q_labels, dtype=np.int64))
        if q_labels.shape != memory.shape[:2]:
            raise ShapeError(f"q_labels shape {q_labels.shape} does not match positions {memory.shape[:2]}")
        if q_labels.size and (q_labels.min() < 0 or q_labels.max() >= SCHEMA.n_term):
            raise DataError(f"term label id outside 0..{SCHEMA.n_term - 1}")
        if not self.config.asc_layers:
            return memory, []

        dropout = self.config.dropout if train else 0.0
        q = ops.take(self.params["asc.label_embed"], q_labels)
        q = q + ops.take(self.params["asc.position"], np.arange(q_labels.shape[1]))
        q = ops.dropout(layer_norm(q, self.params, "asc.norm"), dropout, rng)

        attention: List[np.ndarray] = []
        for k in range(self.config.asc_layers):
            q, weights = decoder_block(q, memory, self.params, k, self.config.heads, attention_mask, dropout, rng)
            attention.extend(weights)
        return q, attention

    def asc_branch(
        self,
        layers: List[DiffTensor],
        q_labels: np.ndarray,
        attention_mask: Optional[np.ndarray] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> BranchOutput:
        hidden, attention = self.decode_labels(self.asc_memory(layers), q_labels, attention_mask, train, rng)
        logits = linear(hidden, self.params, "asc_head")
        return BranchOutput(hidden, logits, ops.softmax(logits, axis=-1), attention)

    # --- full passes ---

    def forward(
        self,
        token_ids: np.ndarray,
        attention_mask: Optional[np.ndarray] = None,
        q_labels: Optional[np.ndarray] = None,
        perturbation: Optional[DiffTensor] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> ForwardOutput:
        """
        Encode, tag terms, then tag polarities.

        With q_labels the ASC queries are the given term
        labels; otherwise they are the ATE argmax after BIO repair, with
        special and padded positions forced to `O`.
        """
        layers = self.encode(token_ids, perturbation, attention_mask, train=train, rng=rng)
        ate = self.ate_branch(layers)
        if q_labels is None:
            q_labels = predicted_term_labels(ate.logits.values, attention_mask, _special_mask(token_ids))
        asc = self.asc_branch(layers, q_labels, attention_mask, train, rng)
        return ForwardOutput(layers, ate, asc, np.atleast_2d(q_labels))


def _special_mask(token_ids: np.ndarray) -> np.ndarray:
    token_ids = np.atleast_2d(np.asarray(token_ids))
    return (token_ids == CLS_ID) | (token_ids == SEP_ID)


def predicted_term_labels(
    ate_logits: np.ndarray,
    attention_mask: Optional[np.ndarray] = None,
    special_mask: Optional[np.ndarray] = None,
) -> np.ndarray:
    """ATE argmax, BIO-repaired per sentence, `O` at specials and padding."""
    labels = np.asarray(ate_logits).argmax(axis=-1)
    if special_mask is not None:
        labels = np.where(special_mask, TERM_O, labels)
    if attention_mask is not None:
        labels = np.where(np.asarray(attention_mask) > 0, labels, TERM_O)
    return np.stack([np.asarray(repair_bio_ids(row), dtype=np.int64) for row in labels])


def init_asc_from_ate(params: ModelParams, config: EncoderConfig, seed: int) -> ModelParams:
    """
    Initialize the ASC decoder from the top encoder layers.

    Decoder block k takes the self-attention, feed-forward and both layer
    norms of encoder layer L - asc_layers + k. Cross-attention, its norm,
    the label embedding, the query positions and the query norm are drawn
    fresh from `seed`. Returns a new collection; the input is untouched.
    """
    result = params.copy()
    shapes = param_shapes(config)
    with no_grad():
        for k in range(config.asc_layers):
            source = config.layers - config.asc_layers + k
            if not 0 <= source < config.layers:
                raise ShapeError(f"decoder block {k} has no encoder layer to copy from")
            pairs = [
                (f"encoder.{source}.attn", f"asc.{k}.self_attn"),
                (f"encoder.{source}.attn_norm", f"asc.{k}.self_norm"),
                (f"encoder.{source}.ffn", f"asc.{k}.ffn"),
                (f"encoder.{source}.ffn_norm", f"asc.{k}.ffn_norm"),
            ]
            for src_prefix, dst_prefix in pairs:
                for name, tensor in params.select(src_prefix).items():
                    target = dst_prefix + name[len(src_prefix):]
                    if shapes[target] != tensor.shape:
                        raise ShapeError(f"cannot copy '{name}' {tensor.shape} into '{target}' {shapes[target]}")
                    result.assign(target, tensor.values)

        fresh_prefixes = ["asc.label_embed", "asc.position", "asc.norm"]
        fresh_prefixes += [f"asc.{k}.cross_attn" for k in range(config.asc_layers)]
        fresh_prefixes += [f"asc.{k}.cross_norm" for k in range(config.asc_layers)]
        rng = np.random.default_rng(seed)
        for name in shapes:
            if any(name == p or name.startswith(p + ".") for p in fresh_prefixes):
                result.assign(name, initial_value(name, shapes[name], rng))

    logger.debug(f"Initialized {config.asc_layers} ASC decoder blocks from encoder layers (seed={seed})")
    return result
