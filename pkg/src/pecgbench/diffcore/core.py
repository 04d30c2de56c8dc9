"""Tensor values, the gradient tape, and elementwise primitives.

Define-by-run: a ``Tape`` is (re)built on every forward pass. Primitives
append one entry per application, in creation order, which is already a
topological order of the computation. ``backward`` walks the entries once,
in reverse, accumulating gradients additively into per-tensor buffers, so
a value used twice receives the sum of both contributions.

Tensors are immutable values once created; a tape must stay on the thread
that created it.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

import numpy as np

_FLOAT_DTYPES = (np.float32, np.float64)

_state = threading.local()


class ShapeError(ValueError):
    """Raised when operand shapes violate a primitive's contract."""


def _tape_stack() -> list:
    stack = getattr(_state, "stack", None)
    if stack is None:
        stack = []
        _state.stack = stack
    return stack


def active_tape():
    """The innermost open tape on this thread, or None."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """A dense real array, optionally tracked for differentiation.

    ``grad`` is lazily allocated as a zeros buffer the first time a backward
    rule contributes to this tensor; rules add into it in place (possibly
    into slices of it), which keeps repeated-use accumulation cheap.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_tape")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(np.float64)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self._tape = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        """A new untracked leaf sharing this tensor's values."""
        return Tensor(self.data, requires_grad=False)

    def grad_buffer(self) -> np.ndarray:
        """The gradient accumulation buffer, allocated on first use."""
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        return self.grad

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"

    # Arithmetic sugar; scalars are lifted to untracked constants.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_lift(other, self.data.dtype), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)


class Tape:
    """Ordered record of primitive applications for one forward pass.

    Supports a single backward traversal; build a fresh tape per step.
    """

    def __init__(self):
        self._nodes: list[Tensor] = []
        self._consumed = False

    def __len__(self):
        return len(self._nodes)

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _tape_stack().pop()
        assert popped is self
        return False


@contextmanager
def tape():
    """Open a fresh tape as the innermost recording context."""
    with Tape() as t:
        yield t


def record(out: Tensor, parents: tuple, backward_fn) -> Tensor:
    """Register an op application on the active tape.

    Recording is skipped when no tape is open or when no parent is tracked,
    in which case the op degenerates to a plain forward evaluation.
    """
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        t = active_tape()
        if t is not None:
            out._parents = parents
            out._backward = backward_fn
            out._tape = t
            t._nodes.append(out)
    return out


def backward(t: Tape, loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every tracked leaf's ``grad``.

    The root must be scalar. Each tape entry is visited exactly once, in
    reverse creation order; entries off every path to the root are skipped.
    """
    if loss.data.size != 1:
        raise ShapeError(
            f"backward root must be scalar, got shape {loss.data.shape}"
        )
    if loss._backward is not None and loss._tape is not t:
        raise RuntimeError("loss was recorded on a different tape")
    if t._consumed:
        raise RuntimeError("tape already consumed by a previous backward pass")
    t._consumed = True
    loss.grad_buffer()[...] += 1.0
    for node in reversed(t._nodes):
        if node.grad is None:
            continue
        node._backward(node.grad)
        # Intermediate buffers are dead after their entry is processed.
        if node._parents:
            node.grad = None


def accumulate(p: Tensor, value: np.ndarray) -> None:
    """Add a gradient contribution to ``p`` if it is tracked."""
    if p.requires_grad:
        p.grad_buffer()[...] += value


def _lift(value, dtype) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` down to ``shape``, inverting numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    squeezed = tuple(
        i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1
    )
    if squeezed:
        g = g.sum(axis=squeezed, keepdims=True)
    return g


def _check_broadcast(a: np.ndarray, b: np.ndarray, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(
            f"{op}: operand shapes {a.shape} and {b.shape} are incompatible"
        ) from None


# ---------------------------------------------------------------------------
# Binary elementwise primitives


def add(a: Tensor, b) -> Tensor:
    b = _lift(b, a.data.dtype)
    _check_broadcast(a.data, b.data, "add")
    out = Tensor(a.data + b.data)

    def bw(g):
        if a.requires_grad:
            accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            accumulate(b, _unbroadcast(g, b.data.shape))

    return record(out, (a, b), bw)


def sub(a: Tensor, b) -> Tensor:
    b = _lift(b, a.data.dtype)
    _check_broadcast(a.data, b.data, "sub")
    out = Tensor(a.data - b.data)

    def bw(g):
        if a.requires_grad:
            accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            accumulate(b, -_unbroadcast(g, b.data.shape))

    return record(out, (a, b), bw)


def mul(a: Tensor, b) -> Tensor:
    b = _lift(b, a.data.dtype)
    _check_broadcast(a.data, b.data, "mul")
    out = Tensor(a.data * b.data)

    def bw(g):
        if a.requires_grad:
            accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return record(out, (a, b), bw)


def div(a: Tensor, b) -> Tensor:
    b = _lift(b, a.data.dtype)
    _check_broadcast(a.data, b.data, "div")
    out = Tensor(a.data / b.data)

    def bw(g):
        if a.requires_grad:
            accumulate(a, _unbroadcast(g / b.data, a.data.shape))
        if b.requires_grad:
            accumulate(b, _unbroadcast(-g * out.data / b.data, b.data.shape))

    return record(out, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    out = Tensor(-a.data)

    def bw(g):
        accumulate(a, -g)

    return record(out, (a,), bw)


# ---------------------------------------------------------------------------
# Unary elementwise primitives


def exp(a: Tensor) -> Tensor:
    out = Tensor(np.exp(a.data))

    def bw(g):
        accumulate(a, g * out.data)

    return record(out, (a,), bw)


def sqrt(a: Tensor) -> Tensor:
    out = Tensor(np.sqrt(a.data))

    def bw(g):
        accumulate(a, g * (0.5 / out.data))

    return record(out, (a,), bw)


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0))

    def bw(g):
        accumulate(a, g * (a.data > 0))

    return record(out, (a,), bw)


def _sigmoid_values(x: np.ndarray) -> np.ndarray:
    # Evaluated without exp overflow on either sign.
    pos = x >= 0
    z = np.exp(np.where(pos, -x, x))
    return np.where(pos, 1.0 / (1.0 + z), z / (1.0 + z))


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(_sigmoid_values(a.data))

    def bw(g):
        accumulate(a, g * out.data * (1.0 - out.data))

    return record(out, (a,), bw)


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data))

    def bw(g):
        accumulate(a, g * (1.0 - out.data * out.data))

    return record(out, (a,), bw)


def log1p_exp(a: Tensor) -> Tensor:
    """x -> log(1 + e^x) in the overflow-safe form max(x,0) + log1p(e^-|x|)."""
    x = a.data
    out = Tensor(np.maximum(x, 0) + np.log1p(np.exp(-np.abs(x))))

    def bw(g):
        accumulate(a, g * _sigmoid_values(a.data))

    return record(out, (a,), bw)
