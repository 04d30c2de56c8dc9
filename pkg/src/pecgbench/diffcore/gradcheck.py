"""Central finite-difference verification of recorded gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Tape, Tensor, backward


@dataclass
class GradCheckResult:
    """Outcome of one finite-difference sweep."""

    passed: bool
    max_rel_err: float
    checked: int
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _rel_err(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def grad_check(
    f,
    xs,
    h: float = 1e-5,
    tol: float = 1e-4,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckResult:
    """Compare recorded gradients of ``f(*xs)`` against central differences.

    ``f`` must return a scalar Tensor and ``xs`` must be float64 leaves;
    finite differences at h=1e-5 are meaningless in float32. Every input
    coordinate is perturbed unless ``max_coords`` subsamples them. Returns
    a report rather than raising, so negative controls can assert failure.
    """
    xs = [xs] if isinstance(xs, Tensor) else list(xs)
    for x in xs:
        if x.data.dtype != np.float64:
            raise TypeError(
                f"grad_check requires float64 inputs, got {x.data.dtype}"
            )
        # Perturbations go through a flat view, which needs contiguity.
        x.data = np.ascontiguousarray(x.data)
        x.requires_grad = True
        x.grad = None

    with Tape() as t:
        out = f(*xs)
    if out.data.size != 1:
        raise ValueError(f"grad_check target must be scalar, got {out.shape}")
    backward(t, out)

    coords = []
    for i, x in enumerate(xs):
        for j in range(x.data.size):
            coords.append((i, j))
    if max_coords is not None and len(coords) > max_coords:
        pick_rng = rng if rng is not None else np.random.default_rng(0)
        picked = pick_rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[int(k)] for k in picked]

    result = GradCheckResult(passed=True, max_rel_err=0.0, checked=len(coords))
    for i, j in coords:
        flat = xs[i].data.reshape(-1)
        saved = flat[j]
        flat[j] = saved + h
        f_plus = float(f(*xs).data)
        flat[j] = saved - h
        f_minus = float(f(*xs).data)
        flat[j] = saved
        numeric = (f_plus - f_minus) / (2.0 * h)
        analytic = 0.0 if xs[i].grad is None else float(xs[i].grad.reshape(-1)[j])
        err = _rel_err(analytic, numeric)
        if err > result.max_rel_err:
            result.max_rel_err = err
        if err > tol:
            result.passed = False
            result.failures.append((i, j, analytic, numeric, err))
    return result
