"""Parameter containers and initialization helpers.

Learnable arrays are fan-in-scaled uniform unless an architecture's cited
design dictates otherwise; biases start at zero (LSTM forget gates at +1).
Non-learnable state (batch-norm running statistics) lives alongside the
learnables so checkpoints capture the full inference behavior.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import Tensor


def uniform_fan_in(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class ModelParams:
    """Named learnable tensors plus non-learnable running state."""

    def __init__(self, config, dtype=np.float32):
        self.config = config
        self.dtype = np.dtype(dtype)
        self.learnable: dict[str, Tensor] = {}
        self.state: dict[str, np.ndarray] = {}

    def add(self, name: str, values: np.ndarray) -> Tensor:
        if name in self.learnable:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(values, dtype=self.dtype), requires_grad=True)
        self.learnable[name] = t
        return t

    def add_state(self, name: str, values: np.ndarray) -> np.ndarray:
        if name in self.state:
            raise ValueError(f"duplicate state name {name!r}")
        arr = np.asarray(values, dtype=self.dtype)
        self.state[name] = arr
        return arr

    def __getitem__(self, name: str) -> Tensor:
        return self.learnable[name]

    def tensors(self) -> list[Tensor]:
        return list(self.learnable.values())

    def census(self) -> dict[str, int]:
        """Exact element count per learnable array, plus 'total'."""
        counts = {name: int(t.data.size) for name, t in self.learnable.items()}
        counts["total"] = sum(counts.values())
        return counts

    def snapshot(self) -> dict:
        """Deep copy of all values, for best-checkpoint retention."""
        return {
            "learnable": {k: t.data.copy() for k, t in self.learnable.items()},
            "state": {k: v.copy() for k, v in self.state.items()},
        }

    def load_snapshot(self, snap: dict) -> None:
        for k, v in snap["learnable"].items():
            self.learnable[k].data = v.copy()
        for k, v in snap["state"].items():
            self.state[k] = v.copy()

    def zero_grads(self) -> None:
        for t in self.learnable.values():
            t.grad = None

    def astype(self, dtype) -> "ModelParams":
        """Copy with every array cast to ``dtype``."""
        out = ModelParams(self.config, dtype=dtype)
        for k, t in self.learnable.items():
            out.add(k, t.data)
        for k, v in self.state.items():
            out.add_state(k, v)
        return out
