"""
Named parameter collection and initialization.

Naming scheme (layer indices are 0-based):

    embed.token, embed.position, embed.norm.{gamma,beta}
    encoder.{k}.attn.{wq,bq,wk,bk,wv,bv,wo,bo}, encoder.{k}.attn_norm.*
    encoder.{k}.ffn.{w1,b1,w2,b2}, encoder.{k}.ffn_norm.*
    asc.label_embed, asc.position, asc.norm.*
    asc.{k}.self_attn.*, asc.{k}.self_norm.*, asc.{k}.cross_attn.*,
    asc.{k}.cross_norm.*, asc.{k}.ffn.*, asc.{k}.ffn_norm.*
    ate_head.{w,b}, asc_head.{w,b}, polarity_head.{w,b}
"""

from collections import OrderedDict
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from data.schema import SCHEMA
from model.config import EncoderConfig
from numcore.tensor import DiffTensor
from utils.errors import ShapeError


INIT_STD = 0.02
PARAM_DTYPE = np.float32

ATTENTION_NAMES = ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo")
FFN_NAMES = ("w1", "b1", "w2", "b2")
NORM_NAMES = ("gamma", "beta")


def _attention_shapes(prefix: str, h: int) -> List[Tuple[str, Tuple[int, ...]]]:
    return [
        (f"{prefix}.{name}", (h, h) if name.startswith("w") else (h,))
        for name in ATTENTION_NAMES
    ]


def _ffn_shapes(prefix: str, h: int, ffn: int) -> List[Tuple[str, Tuple[int, ...]]]:
    return [
        (f"{prefix}.w1", (h, ffn)),
        (f"{prefix}.b1", (ffn,)),
        (f"{prefix}.w2", (ffn, h)),
        (f"{prefix}.b2", (h,)),
    ]


def _norm_shapes(prefix: str, h: int) -> List[Tuple[str, Tuple[int, ...]]]:
    return [(f"{prefix}.{name}", (h,)) for name in NORM_NAMES]


def param_shapes(config: EncoderConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Every parameter name with its shape, in canonical order."""
    h, ffn = config.hidden, config.ffn
    shapes: List[Tuple[str, Tuple[int, ...]]] = [
        ("embed.token", (config.vocab_size, h)),
        ("embed.position", (config.max_len, h)),
    ]
    shapes += _norm_shapes("embed.norm", h)
    for k in range(config.layers):
        shapes += _attention_shapes(f"encoder.{k}.attn", h)
        shapes += _norm_shapes(f"encoder.{k}.attn_norm", h)
        shapes += _ffn_shapes(f"encoder.{k}.ffn", h, ffn)
        shapes += _norm_shapes(f"encoder.{k}.ffn_norm", h)
    if config.asc_layers:
        shapes += [
            ("asc.label_embed", (SCHEMA.n_term, h)),
            ("asc.position", (config.max_len, h)),
        ]
        shapes += _norm_shapes("asc.norm", h)
        for k in range(config.asc_layers):
            shapes += _attention_shapes(f"asc.{k}.self_attn", h)
            shapes += _norm_shapes(f"asc.{k}.self_norm", h)
            shapes += _attention_shapes(f"asc.{k}.cross_attn", h)
            shapes += _norm_shapes(f"asc.{k}.cross_norm", h)
            shapes += _ffn_shapes(f"asc.{k}.ffn", h, ffn)
            shapes += _norm_shapes(f"asc.{k}.ffn_norm", h)
    shapes += [
        ("ate_head.w", (h, SCHEMA.n_term)),
        ("ate_head.b", (SCHEMA.n_term,)),
        ("asc_head.w", (h, SCHEMA.n_polarity)),
        ("asc_head.b", (SCHEMA.n_polarity,)),
        ("polarity_head.w", (h, h)),
        ("polarity_head.b", (h,)),
    ]
    return OrderedDict(shapes)


def initial_value(name: str, shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Normal(0, 0.02) for matrices and embeddings, ones for gammas, zeros for biases."""
    leaf = name.rsplit(".", 1)[-1]
    if leaf == "gamma":
        return np.ones(shape, dtype=PARAM_DTYPE)
    if len(shape) == 1:
        return np.zeros(shape, dtype=PARAM_DTYPE)
    return (rng.standard_normal(shape) * INIT_STD).astype(PARAM_DTYPE)


class ModelParams:
    """
    Ordered, uniquely named tensors of one model.

    Iteration order is the canonical order of param_shapes, which is also
    the checkpoint order.
    """

    def __init__(self, tensors: "OrderedDict[str, DiffTensor]"):
        self._tensors = OrderedDict(tensors)

    # --- mapping protocol ---

    def __getitem__(self, name: str) -> DiffTensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise KeyError(f"no parameter named '{name}'") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> List[str]:
        return list(self._tensors)

    def items(self) -> Iterable[Tuple[str, DiffTensor]]:
        return self._tensors.items()

    def values(self) -> Iterable[DiffTensor]:
        return self._tensors.values()

    @property
    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: t.shape for name, t in self._tensors.items()}

    @property
    def size(self) -> int:
        return int(sum(t.values.size for t in self._tensors.values()))

    # --- selections and copies ---

    def select(self, *prefixes: str) -> "OrderedDict[str, DiffTensor]":
        """Tensors whose name starts with any prefix."""
        return OrderedDict(
            (name, t) for name, t in self._tensors.items()
            if any(name == p or name.startswith(p + ".") for p in prefixes)
        )

    def restricted(self, *prefixes: str) -> "ModelParams":
        """View sharing every buffer, in which only the selected tensors stay trainable."""
        chosen = self.select(*prefixes)
        return ModelParams(OrderedDict(
            (name, t if name in chosen else t.detach())
            for name, t in self._tensors.items()
        ))

    def copy(self, dtype: Optional[np.dtype] = None, trainable: bool = True) -> "ModelParams":
        """Deep copy, optionally cast; trainable=False gives constants."""
        return ModelParams(OrderedDict(
            (name, DiffTensor(
                np.array(t.values, dtype=dtype or t.dtype, copy=True),
                requires_grad=trainable,
            ))
            for name, t in self._tensors.items()
        ))

    def frozen(self, dtype: Optional[np.dtype] = None) -> "ModelParams":
        """Constant copy that never accumulates gradient."""
        return self.copy(dtype=dtype, trainable=False)

    def zero_grad(self) -> None:
        for t in self._tensors.values():
            t.zero_grad()

    def assign(self, name: str, values: np.ndarray) -> None:
        """Overwrite a tensor's values in place, keeping its dtype."""
        target = self[name]
        values = np.asarray(values)
        if values.shape != target.shape:
            raise ShapeError(f"cannot assign shape {values.shape} to '{name}' of shape {target.shape}")
        target.values = values.astype(target.dtype, copy=True)

    def check_shapes(self, config: EncoderConfig) -> None:
        """Raise ShapeError unless names and shapes match config exactly."""
        expected = param_shapes(config)
        if list(expected) != self.names():
            missing = [n for n in expected if n not in self._tensors]
            extra = [n for n in self._tensors if n not in expected]
            raise ShapeError(f"parameter names differ from config (missing={missing[:5]}, extra={extra[:5]})")
        for name, shape in expected.items():
            if self._tensors[name].shape != shape:
                raise ShapeError(f"parameter '{name}' has shape {self._tensors[name].shape}, expected {shape}")


def init_params(config: EncoderConfig, seed: int) -> ModelParams:
    """Fresh trainable parameters drawn in canonical name order."""
    rng = np.random.default_rng(seed)
    return ModelParams(OrderedDict(
        (name, DiffTensor(initial_value(name, shape, rng), requires_grad=True))
        for name, shape in param_shapes(config).items()
    ))
