"""
Dense tensors with define-by-run reverse-mode differentiation.

Every differentiable kernel is a Function subclass. Applying one to tensors
that require gradients creates an output tensor whose `node` is a
TapeRecord; record indices grow monotonically, so sorting records by index
gives a topological order of the graph. `backward` replays the reachable
records in reverse index order.

References only point from outputs to inputs, so a graph is freed by
reference counting as soon as its root is dropped. `backward` also releases
the saved forward state of every record it replays unless asked to retain
the graph.
"""

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import GraceError, ShapeError


_state = threading.local()


def _thread_state() -> threading.local:
    if not hasattr(_state, "counter"):
        _state.counter = itertools.count()
        _state.grad_enabled = True
        _state.tapes = []
    return _state


def grad_enabled() -> bool:
    """Whether new operations are recorded for differentiation."""
    return _thread_state().grad_enabled


@contextmanager
def no_grad() -> Iterator[None]:
    """Run operations as constants (nothing is recorded)."""
    state = _thread_state()
    previous = state.grad_enabled
    state.grad_enabled = False
    try:
        yield
    finally:
        state.grad_enabled = previous


@dataclass(eq=False)
class TapeRecord:
    """One recorded operation: its inputs and the local-gradient rule."""
    index: int
    name: str
    function: Optional["Function"]
    inputs: Tuple["DiffTensor", ...]

    @property
    def released(self) -> bool:
        return self.function is None

    def release(self) -> None:
        """Drop the saved forward state and the links to the inputs."""
        self.function = None
        self.inputs = ()


class Tape:
    """
    Ordered operation records for one forward pass.

    Entering a Tape makes it the recording target for the current thread;
    records are also reachable from their output tensors, so backward works
    whether or not a Tape is active.
    """

    def __init__(self):
        self.records: List[TapeRecord] = []

    def __enter__(self) -> "Tape":
        _thread_state().tapes.append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        _thread_state().tapes.pop()

    def __len__(self) -> int:
        return len(self.records)

    @staticmethod
    def record(function: "Function", inputs: Tuple["DiffTensor", ...]) -> TapeRecord:
        state = _thread_state()
        rec = TapeRecord(next(state.counter), type(function).__name__, function, inputs)
        if state.tapes:
            state.tapes[-1].records.append(rec)
        return rec


class DiffTensor:
    """
    Dense real-valued array with an accumulated gradient buffer.

    Leaves are tensors without a node; parameters are leaves with
    requires_grad set. Constants never accumulate gradient.
    """

    def __init__(
        self,
        values: Any,
        requires_grad: bool = False,
        node: Optional[TapeRecord] = None,
        dtype: Optional[np.dtype] = None,
    ):
        array = np.asarray(values, dtype=dtype)
        if dtype is None and not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.values: np.ndarray = array
        self.requires_grad = requires_grad
        self.node = node
        self._grad: Optional[np.ndarray] = None

    # --- buffers ---

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            return np.zeros_like(self.values)
        return self._grad

    @grad.setter
    def grad(self, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=self.values.dtype)
        if value.shape != self.values.shape:
            raise ShapeError(f"gradient shape {value.shape} does not match {self.values.shape}")
        self._grad = value

    @property
    def is_leaf(self) -> bool:
        return self.node is None

    def accumulate(self, grad: np.ndarray) -> None:
        """Add a gradient contribution (no-op for constants)."""
        if not self.requires_grad:
            return
        grad = np.asarray(grad, dtype=self.values.dtype)
        if self._grad is None:
            self._grad = grad.copy()
        else:
            self._grad = self._grad + grad

    def zero_grad(self) -> None:
        self._grad = None

    def detach(self) -> "DiffTensor":
        """Constant view sharing the value buffer."""
        return DiffTensor(self.values)

    def item(self) -> float:
        return float(self.values)

    def numpy(self) -> np.ndarray:
        return self.values

    def __repr__(self) -> str:
        return f"DiffTensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    # --- operators (kernels live in numcore.ops) ---

    def __add__(self, other):
        from numcore import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from numcore import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from numcore import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from numcore import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from numcore import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from numcore import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from numcore import ops
        return ops.div(self, other)

    def __neg__(self):
        from numcore import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from numcore import ops
        return ops.matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False) -> "DiffTensor":
        from numcore import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "DiffTensor":
        from numcore import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "DiffTensor":
        from numcore import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes) -> "DiffTensor":
        from numcore import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)


def constant(values: Any, dtype: Optional[np.dtype] = None) -> DiffTensor:
    """A tensor that never accumulates gradient."""
    return DiffTensor(values, requires_grad=False, dtype=dtype)


def parameter(values: Any, dtype: Optional[np.dtype] = None) -> DiffTensor:
    """A trainable leaf tensor."""
    return DiffTensor(values, requires_grad=True, dtype=dtype)


class Function:
    """
    A differentiable kernel.

    Subclasses implement `forward` on raw arrays (saving whatever the
    backward rule needs on `self`) and `backward`, which maps the output
    adjoint to one adjoint (or None) per input.
    """

    def forward(self, *arrays: np.ndarray, **kwargs) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: Any, **kwargs) -> DiffTensor:
        function = cls()
        dtype = next(
            (x.dtype for x in inputs if isinstance(x, DiffTensor)),
            np.dtype(np.float64),
        )
        tensors = tuple(
            x if isinstance(x, DiffTensor) else DiffTensor(x, dtype=dtype)
            for x in inputs
        )
        out_values = function.forward(*(t.values for t in tensors), **kwargs)
        needs_grad = grad_enabled() and any(t.requires_grad for t in tensors)
        out = DiffTensor(out_values, requires_grad=needs_grad)
        if needs_grad:
            out.node = Tape.record(function, tensors)
        return out


def _reachable_records(root: DiffTensor) -> List[TapeRecord]:
    records: Dict[int, TapeRecord] = {}
    stack = [root]
    while stack:
        tensor = stack.pop()
        rec = tensor.node
        if rec is None or rec.index in records:
            continue
        if rec.released:
            raise GraceError(
                f"graph through {rec.name} was released by an earlier backward; "
                "pass retain_graph=True to differentiate it twice"
            )
        records[rec.index] = rec
        stack.extend(rec.inputs)
    return [records[k] for k in sorted(records, reverse=True)]


def backward(root: DiffTensor, retain_graph: bool = False) -> None:
    """
    Accumulate d(root)/d(leaf) into every leaf that requires gradients.

    Repeated calls without zero_grad accumulate. The root's own grad is
    set to 1. Unless retain_graph is set, every replayed record is released
    afterwards, so a second backward through the same graph raises.
    """
    if root.values.size != 1 or root.values.ndim > 1:
        raise ShapeError(f"backward needs a scalar root, got shape {root.shape}")
    if root.node is None:
        raise GraceError("backward root is not on the tape (no recorded operation produced it)")

    # Adjoints of intermediate tensors are keyed by the record that produced them
    adjoints: Dict[int, np.ndarray] = {root.node.index: np.ones_like(root.values)}
    for rec in _reachable_records(root):
        grad = adjoints.pop(rec.index, None)
        if grad is not None:
            input_grads = rec.function.backward(grad)
            for tensor, g in zip(rec.inputs, input_grads):
                if g is None or not tensor.requires_grad:
                    continue
                if tensor.node is None:
                    tensor.accumulate(g)
                else:
                    key = tensor.node.index
                    adjoints[key] = adjoints[key] + g if key in adjoints else g
        if not retain_graph:
            rec.release()

    root._grad = np.ones_like(root.values)
