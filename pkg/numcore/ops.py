"""
Differentiable kernels over DiffTensor.

Broadcasting is supported for elementwise arithmetic and for leading
(batch) dimensions of matmul; everything else is shaped exactly as the
model needs it.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from numcore.tensor import DiffTensor, Function
from utils.errors import NumericDomainError, ShapeError


PROB_FLOOR = 1e-12
LOG_PROB_FLOOR = math.log(PROB_FLOOR)
GELU_C = math.sqrt(2.0 / math.pi)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _require_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericDomainError(f"{what} received non-finite input")


def log_softmax_array(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-shifted log-softmax on a plain array (shared by the kernels below)."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


# --- elementwise arithmetic ---

class Add(Function):
    def forward(self, x, y):
        self.shapes = (x.shape, y.shape)
        return x + y

    def backward(self, grad):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(grad, self.shapes[1])


class Sub(Function):
    def forward(self, x, y):
        self.shapes = (x.shape, y.shape)
        return x - y

    def backward(self, grad):
        return unbroadcast(grad, self.shapes[0]), unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x * y

    def backward(self, grad):
        return unbroadcast(grad * self.y, self.x.shape), unbroadcast(grad * self.x, self.y.shape)


class Div(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x / y

    def backward(self, grad):
        gx = grad / self.y
        gy = -grad * self.x / (self.y * self.y)
        return unbroadcast(gx, self.x.shape), unbroadcast(gy, self.y.shape)


class Neg(Function):
    def forward(self, x):
        return -x

    def backward(self, grad):
        return (-grad,)


class MatMul(Function):
    def forward(self, a, b):
        if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
            raise ShapeError(f"matmul shapes {a.shape} and {b.shape} are incompatible")
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        ga = grad @ np.swapaxes(self.b, -1, -2)
        gb = np.swapaxes(self.a, -1, -2) @ grad
        return unbroadcast(ga, self.a.shape), unbroadcast(gb, self.b.shape)


# --- reductions and reshaping ---

class Sum(Function):
    def forward(self, x, axis=None, keepdims=False):
        self.shape, self.axis, self.keepdims = x.shape, axis, keepdims
        return np.sum(x, axis=axis, keepdims=keepdims)

    def backward(self, grad):
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, self.shape).copy(),)


class Mean(Function):
    def forward(self, x, axis=None, keepdims=False):
        self.shape, self.axis, self.keepdims = x.shape, axis, keepdims
        out = np.mean(x, axis=axis, keepdims=keepdims)
        self.count = x.size // max(np.size(out), 1)
        return out

    def backward(self, grad):
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad / self.count, self.shape).copy(),)


class Reshape(Function):
    def forward(self, x, shape=()):
        self.in_shape = x.shape
        return x.reshape(shape)

    def backward(self, grad):
        return (grad.reshape(self.in_shape),)


class Transpose(Function):
    def forward(self, x, axes=None):
        self.axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
        return np.transpose(x, self.axes)

    def backward(self, grad):
        return (np.transpose(grad, np.argsort(self.axes)),)


class Take(Function):
    """Row gather along axis 0 (embedding lookup)."""

    def forward(self, table, indices=None):
        self.table_shape = table.shape
        self.indices = np.asarray(indices, dtype=np.int64)
        return table[self.indices]

    def backward(self, grad):
        gt = np.zeros(self.table_shape, dtype=grad.dtype)
        np.add.at(gt, self.indices, grad)
        return (gt,)


# --- activations and normalization ---

class Softmax(Function):
    def forward(self, x, axis=-1):
        _require_finite(x, "softmax")
        self.axis = axis
        shifted = np.exp(x - np.max(x, axis=axis, keepdims=True))
        self.y = shifted / np.sum(shifted, axis=axis, keepdims=True)
        return self.y

    def backward(self, grad):
        y = self.y
        return (y * (grad - np.sum(grad * y, axis=self.axis, keepdims=True)),)


class LogSoftmax(Function):
    def forward(self, x, axis=-1):
        _require_finite(x, "log_softmax")
        self.axis = axis
        out = log_softmax_array(x, axis)
        self.p = np.exp(out)
        return out

    def backward(self, grad):
        return (grad - self.p * np.sum(grad, axis=self.axis, keepdims=True),)


class Relu(Function):
    def forward(self, x):
        self.positive = x > 0
        return x * self.positive

    def backward(self, grad):
        return (grad * self.positive,)


class Gelu(Function):
    """tanh approximation of GELU."""

    def forward(self, x):
        self.x = x
        self.t = np.tanh(GELU_C * (x + 0.044715 * x ** 3))
        return 0.5 * x * (1.0 + self.t)

    def backward(self, grad):
        x, t = self.x, self.t
        inner = GELU_C * (1.0 + 3 * 0.044715 * x * x)
        local = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * inner
        return (grad * local,)


class LayerNorm(Function):
    """Normalization over the last axis followed by an affine map."""

    def forward(self, x, gamma, beta, eps=1e-5):
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        self.inv = 1.0 / np.sqrt(var + eps)
        self.xhat = centered * self.inv
        self.gamma = gamma
        self.beta_shape = beta.shape
        return self.xhat * gamma + beta

    def backward(self, grad):
        n = self.xhat.shape[-1]
        gxhat = grad * self.gamma
        gx = (self.inv / n) * (
            n * gxhat
            - gxhat.sum(axis=-1, keepdims=True)
            - self.xhat * (gxhat * self.xhat).sum(axis=-1, keepdims=True)
        )
        reduce_axes = tuple(range(grad.ndim - 1))
        ggamma = (grad * self.xhat).sum(axis=reduce_axes)
        gbeta = grad.sum(axis=reduce_axes)
        return gx, ggamma.reshape(self.gamma.shape), gbeta.reshape(self.beta_shape)


class SpanMax(Function):
    """
    Elementwise max over a half-open row span, per position.

    x is (batch, positions, features); begins/ends are (batch, positions)
    and give each position the span it pools over.
    """

    def forward(self, x, begins=None, ends=None):
        begins = np.asarray(begins, dtype=np.int64)
        ends = np.asarray(ends, dtype=np.int64)
        if begins.shape != x.shape[:2] or ends.shape != x.shape[:2]:
            raise ShapeError(f"span bounds {begins.shape} do not match positions {x.shape[:2]}")
        if np.any(ends <= begins):
            raise ShapeError("every span must be non-empty")
        self.x_shape = x.shape
        out = np.empty_like(x)
        self.argmax = np.empty(x.shape, dtype=np.int64)
        for b in range(x.shape[0]):
            for span in set(zip(begins[b].tolist(), ends[b].tolist())):
                lo, hi = span
                seg = x[b, lo:hi]
                where = (begins[b] == lo) & (ends[b] == hi)
                out[b, where] = seg.max(axis=0)
                self.argmax[b, where] = lo + seg.argmax(axis=0)
        return out

    def backward(self, grad):
        gx = np.zeros(self.x_shape, dtype=grad.dtype)
        batch, positions, features = self.x_shape
        b_idx = np.arange(batch)[:, None, None]
        f_idx = np.arange(features)[None, None, :]
        np.add.at(gx, (np.broadcast_to(b_idx, grad.shape), self.argmax, np.broadcast_to(f_idx, grad.shape)), grad)
        return (gx,)


# --- losses ---

class NllLoss(Function):
    """
    -(1/n) * sum_i w_i * log p_i[t_i], with log-probabilities floored at
    log(1e-12). Weights are constants.
    """

    def forward(self, log_probs, targets=None, weights=None, normalizer=None):
        rows = np.arange(log_probs.shape[0])
        self.targets = np.asarray(targets, dtype=np.int64)
        self.weights = np.ones(log_probs.shape[0]) if weights is None else np.asarray(weights)
        self.n = float(log_probs.shape[0] if normalizer is None else normalizer)
        self.shape = log_probs.shape
        picked = log_probs[rows, self.targets]
        self.live = picked > LOG_PROB_FLOOR
        clamped = np.where(self.live, picked, LOG_PROB_FLOOR)
        return np.asarray(-(self.weights * clamped).sum() / self.n, dtype=log_probs.dtype)

    def backward(self, grad):
        g = np.zeros(self.shape, dtype=np.result_type(grad, np.float32))
        rows = np.arange(self.shape[0])
        g[rows, self.targets] = -grad * self.weights * self.live / self.n
        return (g,)


def _row_scale(n_rows: int, row_weights: Optional[np.ndarray]) -> np.ndarray:
    if row_weights is None:
        return np.full(n_rows, 1.0 / max(n_rows, 1))
    row_weights = np.asarray(row_weights, dtype=np.float64)
    total = row_weights.sum()
    return row_weights / total if total > 0 else np.zeros_like(row_weights)


class KLDivergence(Function):
    """Mean over rows of sum p log(p / q), q floored at 1e-12."""

    def forward(self, p, q, row_weights=None):
        if p.shape != q.shape:
            raise ShapeError(f"KL operands have shapes {p.shape} and {q.shape}")
        self.p, self.q = p, q
        self.qf = np.maximum(q, PROB_FLOOR)
        self.scale = _row_scale(int(np.prod(p.shape[:-1])), row_weights).reshape(p.shape[:-1] + (1,))
        positive = p > 0
        safe_p = np.where(positive, p, 1.0)
        self.log_ratio = np.where(positive, np.log(safe_p) - np.log(self.qf), 0.0)
        return np.asarray((p * self.log_ratio * self.scale).sum(), dtype=p.dtype)

    def backward(self, grad):
        gp = grad * np.where(self.p > 0, self.log_ratio + 1.0, 0.0) * self.scale
        gq = -grad * (self.p / self.qf) * (self.q > PROB_FLOOR) * self.scale
        return gp, gq


class KLWithLogits(Function):
    """
    KL(p || softmax(logits)) with p constant.

    Rows of p must sum to 1; the logit gradient is then exactly
    softmax(logits) - p, so identical distributions give an exactly zero
    gradient. Passing log_p computed by log_softmax_array from the same
    logits makes the value exactly zero as well.
    """

    def forward(self, p, logits, row_weights=None, log_p=None):
        if p.shape != logits.shape:
            raise ShapeError(f"KL operands have shapes {p.shape} and {logits.shape}")
        _require_finite(logits, "kl_with_logits")
        log_q = log_softmax_array(logits)
        self.p, self.q = p, np.exp(log_q)
        self.scale = _row_scale(int(np.prod(p.shape[:-1])), row_weights).reshape(p.shape[:-1] + (1,))
        positive = p > 0
        if log_p is None:
            log_p = np.log(np.where(positive, p, 1.0))
        terms = np.where(positive, p * (np.asarray(log_p, dtype=logits.dtype) - log_q), 0.0)
        return np.asarray((terms * self.scale).sum(), dtype=logits.dtype)

    def backward(self, grad):
        return None, grad * (self.q - self.p) * self.scale


# --- functional wrappers ---

def add(x, y) -> DiffTensor:
    return Add.apply(x, y)


def sub(x, y) -> DiffTensor:
    return Sub.apply(x, y)


def mul(x, y) -> DiffTensor:
    return Mul.apply(x, y)


def div(x, y) -> DiffTensor:
    return Div.apply(x, y)


def neg(x) -> DiffTensor:
    return Neg.apply(x)


def matmul(a, b) -> DiffTensor:
    return MatMul.apply(a, b)


def sum(x, axis=None, keepdims: bool = False) -> DiffTensor:  # noqa: A001 - mirrors numpy
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x, axis=None, keepdims: bool = False) -> DiffTensor:
    return Mean.apply(x, axis=axis, keepdims=keepdims)


def reshape(x, shape: Sequence[int]) -> DiffTensor:
    return Reshape.apply(x, shape=tuple(shape))


def transpose(x, axes: Optional[Sequence[int]] = None) -> DiffTensor:
    return Transpose.apply(x, axes=axes)


def take(table: DiffTensor, indices: np.ndarray) -> DiffTensor:
    return Take.apply(table, indices=indices)


def softmax(x, axis: int = -1) -> DiffTensor:
    return Softmax.apply(x, axis=axis)


def log_softmax(x, axis: int = -1) -> DiffTensor:
    return LogSoftmax.apply(x, axis=axis)


def relu(x) -> DiffTensor:
    return Relu.apply(x)


def gelu(x) -> DiffTensor:
    return Gelu.apply(x)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> DiffTensor:
    return LayerNorm.apply(x, gamma, beta, eps=eps)


def span_max(x: DiffTensor, begins: np.ndarray, ends: np.ndarray) -> DiffTensor:
    return SpanMax.apply(x, begins=begins, ends=ends)


def dropout(x: DiffTensor, rate: float, rng: Optional[np.random.Generator]) -> DiffTensor:
    """Inverted dropout; identity when rate is 0 or no generator is given."""
    if rate <= 0 or rng is None:
        return x
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return mul(x, keep)


def nll_loss(
    log_probs: DiffTensor,
    targets: np.ndarray,
    weights: Optional[np.ndarray] = None,
    normalizer: Optional[float] = None,
) -> DiffTensor:
    return NllLoss.apply(log_probs, targets=targets, weights=weights, normalizer=normalizer)


def kl_divergence(p, q, row_weights: Optional[np.ndarray] = None) -> DiffTensor:
    """Mean over rows of KL(p_row || q_row); weighted mean when row_weights is given."""
    return KLDivergence.apply(p, q, row_weights=row_weights)


def kl_with_logits(
    p: np.ndarray,
    logits: DiffTensor,
    row_weights: Optional[np.ndarray] = None,
    log_p: Optional[np.ndarray] = None,
) -> DiffTensor:
    return KLWithLogits.apply(p, logits, row_weights=row_weights, log_p=log_p)


def cross_entropy_grad_identity(p: np.ndarray, onehot: np.ndarray) -> np.ndarray:
    """
    Gradient of cross-entropy w.r.t. the logits of a softmax: p - onehot.

    This is the quantity whose magnitude the gradient-harmonizing loss
    bins; the tape reproduces it for log_softmax followed by nll_loss.
    """
    p = np.asarray(p, dtype=np.float64)
    onehot = np.asarray(onehot, dtype=np.float64)
    if p.shape != onehot.shape:
        raise ShapeError(f"probabilities {p.shape} and targets {onehot.shape} differ in shape")
    return p - onehot
