"""Structured primitives: contractions, convolutions, reductions, reshapes.

Convolutions follow the cross-correlation convention (no kernel flip) and
lower onto a single GEMM per application; their backward rules are GEMMs
plus a kernel-position scatter, so the whole training path stays BLAS-bound.
"""

from __future__ import annotations

import numpy as np

from .core import ShapeError, Tensor, _unbroadcast, accumulate, mul, record


def _as_axes(axis, ndim: int, op: str) -> tuple:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    norm = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise ShapeError(f"{op}: axis {ax} invalid for {ndim}-d input")
        norm.append(ax % ndim)
    if len(set(norm)) != len(norm):
        raise ShapeError(f"{op}: repeated axis in {axes}")
    return tuple(sorted(norm))


# ---------------------------------------------------------------------------
# Contractions


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy batching over leading axes."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(
            f"matmul: operands must be at least 2-d, got {a.shape} and {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(
            f"matmul: inner extents differ, got {a.shape} and {b.shape}"
        )
    out = Tensor(np.matmul(a.data, b.data))

    def bw(g):
        if a.requires_grad:
            accumulate(a, _unbroadcast(np.matmul(g, b.data.swapaxes(-1, -2)), a.shape))
        if b.requires_grad:
            accumulate(b, _unbroadcast(np.matmul(a.data.swapaxes(-1, -2), g), b.shape))

    return record(out, (a, b), bw)


def einsum2(subscripts: str, a: Tensor, b: Tensor) -> Tensor:
    """Two-operand einsum whose gradient is the label-swapped einsum.

    Each operand's labels must be repetition-free and covered by the output
    plus the other operand, which is exactly the regime where swapping the
    output labels with an operand's labels yields its gradient.
    """
    lhs, out_sub = subscripts.replace(" ", "").split("->")
    sub_a, sub_b = lhs.split(",")
    for name, sub, other in (("first", sub_a, sub_b), ("second", sub_b, sub_a)):
        if len(set(sub)) != len(sub):
            raise ShapeError(f"einsum2: repeated label in {name} operand '{sub}'")
        if not set(sub) <= set(out_sub) | set(other):
            raise ShapeError(
                f"einsum2: {name} operand '{sub}' has labels outside '{out_sub}'/'{other}'"
            )
    out = Tensor(np.einsum(subscripts, a.data, b.data, optimize=True))

    def bw(g):
        if a.requires_grad:
            accumulate(
                a, np.einsum(f"{out_sub},{sub_b}->{sub_a}", g, b.data, optimize=True)
            )
        if b.requires_grad:
            accumulate(
                b, np.einsum(f"{out_sub},{sub_a}->{sub_b}", g, a.data, optimize=True)
            )

    return record(out, (a, b), bw)


# ---------------------------------------------------------------------------
# Convolutions and pooling


def conv1d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlate (B, C_in, L) with (C_out, C_in, K).

    Output length is floor((L + 2*padding - K)/stride) + 1.
    """
    if x.ndim != 3 or w.ndim != 3:
        raise ShapeError(f"conv1d: need 3-d operands, got {x.shape} and {w.shape}")
    batch, c_in, length = x.shape
    c_out, c_in_w, kernel = w.shape
    if c_in != c_in_w:
        raise ShapeError(
            f"conv1d: input has {c_in} channels but kernel expects {c_in_w}"
        )
    padded = length + 2 * padding
    if kernel > padded:
        raise ShapeError(
            f"conv1d: kernel length {kernel} exceeds padded input length {padded}"
        )
    l_out = (padded - kernel) // stride + 1

    xp = x.data
    if padding:
        xp = np.zeros((batch, c_in, padded), dtype=x.data.dtype)
        xp[:, :, padding : padding + length] = x.data
    col = np.empty((batch, c_in, kernel, l_out), dtype=x.data.dtype)
    for k in range(kernel):
        col[:, :, k, :] = xp[:, :, k : k + stride * l_out : stride]
    # (C_in*K, B*L_out) so the forward is one GEMM.
    cm = col.reshape(batch, c_in * kernel, l_out).transpose(1, 0, 2).reshape(
        c_in * kernel, batch * l_out
    )
    w_mat = w.data.reshape(c_out, c_in * kernel)
    out_mat = w_mat @ cm
    out = Tensor(out_mat.reshape(c_out, batch, l_out).transpose(1, 0, 2))

    def bw(g):
        gm = g.transpose(1, 0, 2).reshape(c_out, batch * l_out)
        if w.requires_grad:
            accumulate(w, (gm @ cm.T).reshape(c_out, c_in, kernel))
        if x.requires_grad:
            dcol = (w_mat.T @ gm).reshape(c_in, kernel, batch, l_out)
            dxp = np.zeros((batch, c_in, padded), dtype=g.dtype)
            for k in range(kernel):
                dxp[:, :, k : k + stride * l_out : stride] += dcol[:, k].transpose(
                    1, 0, 2
                )
            accumulate(x, dxp[:, :, padding : padding + length])

    return record(out, (x, w), bw)


def depthwise_conv1d_causal(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Per-channel kernel with left zero-padding of K-1 samples.

    x is (B, T, C) channel-last, w is (C, K), b is (C,). Output at step t
    depends only on inputs at steps <= t.
    """
    if x.ndim != 3 or w.ndim != 2:
        raise ShapeError(
            f"depthwise_conv1d_causal: got shapes {x.shape} and {w.shape}"
        )
    batch, steps, channels = x.shape
    c_w, kernel = w.shape
    if channels != c_w:
        raise ShapeError(
            f"depthwise_conv1d_causal: input has {channels} channels, kernel {c_w}"
        )
    xp = np.zeros((batch, steps + kernel - 1, channels), dtype=x.data.dtype)
    xp[:, kernel - 1 :, :] = x.data
    acc = np.zeros((batch, steps, channels), dtype=x.data.dtype)
    for k in range(kernel):
        acc += xp[:, k : k + steps, :] * w.data[:, k]
    out = Tensor(acc + b.data)

    def bw(g):
        if b.requires_grad:
            accumulate(b, g.sum(axis=(0, 1)))
        if w.requires_grad:
            dw = w.grad_buffer()
            for k in range(kernel):
                dw[:, k] += np.einsum(
                    "btc,btc->c", g, xp[:, k : k + steps, :], optimize=True
                )
        if x.requires_grad:
            dxp = np.zeros_like(xp)
            for k in range(kernel):
                dxp[:, k : k + steps, :] += g * w.data[:, k]
            accumulate(x, dxp[:, kernel - 1 :, :])

    return record(out, (x, w, b), bw)


def maxpool1d(x: Tensor, kernel: int = 3, stride: int = 2, padding: int = 1) -> Tensor:
    """Temporal max pooling over (B, C, L); padding counts as -inf."""
    if x.ndim != 3:
        raise ShapeError(f"maxpool1d: need a 3-d input, got {x.shape}")
    batch, channels, length = x.shape
    padded = length + 2 * padding
    if kernel > padded:
        raise ShapeError(
            f"maxpool1d: kernel {kernel} exceeds padded input length {padded}"
        )
    l_out = (padded - kernel) // stride + 1
    xp = np.full((batch, channels, padded), -np.inf, dtype=x.data.dtype)
    xp[:, :, padding : padding + length] = x.data
    windows = np.empty((batch, channels, kernel, l_out), dtype=x.data.dtype)
    for k in range(kernel):
        windows[:, :, k, :] = xp[:, :, k : k + stride * l_out : stride]
    arg = windows.argmax(axis=2)
    out = Tensor(np.take_along_axis(windows, arg[:, :, None, :], axis=2)[:, :, 0, :])

    def bw(g):
        if not x.requires_grad:
            return
        dxp = np.zeros((batch, channels, padded), dtype=g.dtype)
        for k in range(kernel):
            dxp[:, :, k : k + stride * l_out : stride] += g * (arg == k)
        accumulate(x, dxp[:, :, padding : padding + length])

    return record(out, (x,), bw)


# ---------------------------------------------------------------------------
# Reductions


def reduce_sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _as_axes(axis, x.ndim, "reduce_sum")
    out = Tensor(x.data.sum(axis=axes, keepdims=keepdims))

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        accumulate(x, np.broadcast_to(g, x.shape))

    return record(out, (x,), bw)


def reduce_mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _as_axes(axis, x.ndim, "reduce_mean")
    count = int(np.prod([x.shape[ax] for ax in axes])) if axes else 1
    out = Tensor(x.data.mean(axis=axes, keepdims=keepdims))

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        accumulate(x, np.broadcast_to(g / count, x.shape))

    return record(out, (x,), bw)


def reduce_max(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _as_axes(axis, x.ndim, "reduce_max")
    kept = x.data.max(axis=axes, keepdims=True)
    out = Tensor(kept if keepdims else kept.reshape(
        tuple(s for i, s in enumerate(x.shape) if i not in axes)
    ))

    def bw(g):
        if not x.requires_grad:
            return
        if not keepdims:
            g = np.expand_dims(g, axes)
        mask = x.data == kept
        # Ties split the gradient evenly, matching central differences.
        accumulate(x, g * mask / mask.sum(axis=axes, keepdims=True))

    return record(out, (x,), bw)


def cumsum(x: Tensor, axis: int) -> Tensor:
    (ax,) = _as_axes(axis, x.ndim, "cumsum")
    out = Tensor(np.cumsum(x.data, axis=ax))

    def bw(g):
        accumulate(x, np.flip(np.cumsum(np.flip(g, ax), axis=ax), ax))

    return record(out, (x,), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    (ax,) = _as_axes(axis, x.ndim, "softmax")
    shifted = x.data - x.data.max(axis=ax, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=ax, keepdims=True)
    out = Tensor(y)

    def bw(g):
        if x.requires_grad:
            accumulate(x, y * (g - (g * y).sum(axis=ax, keepdims=True)))

    return record(out, (x,), bw)


# ---------------------------------------------------------------------------
# Shape manipulation


def reshape(x: Tensor, shape) -> Tensor:
    out = Tensor(x.data.reshape(shape))

    def bw(g):
        accumulate(x, g.reshape(x.shape))

    return record(out, (x,), bw)


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out = Tensor(x.data.transpose(axes))

    def bw(g):
        accumulate(x, g.transpose(inverse))

    return record(out, (x,), bw)


def select(x: Tensor, index: int, axis: int) -> Tensor:
    """Pick one slice along ``axis``, dropping that axis."""
    (ax,) = _as_axes(axis, x.ndim, "select")
    if not -x.shape[ax] <= index < x.shape[ax]:
        raise ShapeError(f"select: index {index} out of range for {x.shape}")
    idx = (slice(None),) * ax + (index,)
    out = Tensor(x.data[idx])

    def bw(g):
        if x.requires_grad:
            x.grad_buffer()[idx] += g

    return record(out, (x,), bw)


def slice_axis(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    (ax,) = _as_axes(axis, x.ndim, "slice_axis")
    idx = (slice(None),) * ax + (slice(start, stop),)
    out = Tensor(x.data[idx])

    def bw(g):
        if x.requires_grad:
            x.grad_buffer()[idx] += g

    return record(out, (x,), bw)


def concat(xs, axis: int) -> Tensor:
    xs = tuple(xs)
    (ax,) = _as_axes(axis, xs[0].ndim, "concat")
    out = Tensor(np.concatenate([x.data for x in xs], axis=ax))
    offsets = np.cumsum([0] + [x.shape[ax] for x in xs])

    def bw(g):
        for x, start, stop in zip(xs, offsets[:-1], offsets[1:]):
            if x.requires_grad:
                idx = (slice(None),) * ax + (slice(start, stop),)
                accumulate(x, g[idx])

    return record(out, xs, bw)


def stack(xs, axis: int) -> Tensor:
    xs = tuple(xs)
    out = Tensor(np.stack([x.data for x in xs], axis=axis))
    ax = axis % out.ndim

    def bw(g):
        for i, x in enumerate(xs):
            if x.requires_grad:
                idx = (slice(None),) * ax + (i,)
                accumulate(x, g[idx])

    return record(out, xs, bw)


# ---------------------------------------------------------------------------
# Regularization


def dropout(x: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted-scaling dropout; call only on the training path."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    if p == 0.0:
        return x
    keep = 1.0 - p
    mask = (rng.random(x.shape) < keep).astype(x.data.dtype) / x.data.dtype.type(keep)
    return mul(x, Tensor(mask))
