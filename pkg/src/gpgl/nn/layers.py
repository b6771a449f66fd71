"""Layer objects wiring the ops into a trainable stack.

Each layer caches what its backward pass needs during forward and
releases the cache afterwards. Parameters use assignment semantics:
backward overwrites ``Param.grad``, it does not accumulate.
"""

from __future__ import annotations

import numpy as np

from . import ops

__all__ = [
    "Param",
    "Conv3x3",
    "MsmConv",
    "MaxPool2",
    "GlobalPool",
    "Dense",
    "ReLU",
    "Dropout",
]


class Param:
    """A named weight array plus its current gradient."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray) -> None:
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)

    def __repr__(self) -> str:
        return f"Param({self.name}, shape={self.value.shape})"


class Conv3x3:
    """Single 3x3 same-padded convolution, Kaiming fan-in init."""

    def __init__(
        self,
        cin: int,
        cout: int,
        rng: np.random.Generator,
        name: str,
        dtype: np.dtype = np.float32,
    ) -> None:
        std = np.sqrt(2.0 / (9 * cin))
        self.w = Param(f"{name}.w", rng.normal(0.0, std, (3, 3, cin, cout)).astype(dtype))
        self.b = Param(f"{name}.b", np.zeros(cout, dtype=dtype))
        self._cols: np.ndarray | None = None
        self._x_shape: tuple[int, int, int, int] | None = None

    def params(self) -> list[Param]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out, cols = ops.conv2d_forward(x, self.w.value, self.b.value)
        self._cols = cols
        self._x_shape = x.shape
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx, self.w.grad, self.b.grad = ops.conv2d_backward(
            dout, self._cols, self.w.value, self._x_shape
        )
        self._cols = None
        return dx


class MsmConv:
    """Multi-scale maxout convolution block.

    Branch s (s = 0..scales-1) chains s+1 plain 3x3 convolutions, so the
    branches see receptive fields of radius 1..scales; the block output
    is the elementwise max over branches. The convolutions are purely
    linear: maxout is the only nonlinearity in the block, so on any
    element the block output equals the dominating branch's output.
    """

    def __init__(
        self,
        cin: int,
        cout: int,
        scales: int,
        rng: np.random.Generator,
        name: str,
        dtype: np.dtype = np.float32,
    ) -> None:
        if scales < 1:
            raise ValueError(f"scales must be >= 1, got {scales}")
        self.scales = scales
        self.branches: list[list[Conv3x3]] = []
        for s in range(scales):
            chain = []
            c_prev = cin
            for depth in range(s + 1):
                chain.append(
                    Conv3x3(c_prev, cout, rng, f"{name}.b{s}.conv{depth}", dtype)
                )
                c_prev = cout
            self.branches.append(chain)
        self._winner: np.ndarray | None = None

    def params(self) -> list[Param]:
        return [p for chain in self.branches for conv in chain for p in conv.params()]

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        outs = []
        for chain in self.branches:
            h = x
            for conv in chain:
                h = conv.forward(h, train)
            outs.append(h)
        out, self._winner = ops.maxout_forward(np.stack(outs))
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dstack = ops.maxout_backward(dout, self._winner, self.scales)
        self._winner = None
        dx = None
        for s, chain in enumerate(self.branches):
            d = dstack[s]
            for conv in reversed(chain):
                d = conv.backward(d)
            dx = d if dx is None else dx + d
        return dx


class MaxPool2:
    def __init__(self) -> None:
        self._idx: np.ndarray | None = None
        self._x_shape: tuple[int, int, int, int] | None = None

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out, self._idx = ops.maxpool2_forward(x)
        self._x_shape = x.shape
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx = ops.maxpool2_backward(dout, self._idx, self._x_shape)
        self._idx = None
        return dx


class GlobalPool:
    def __init__(self, mode: str) -> None:
        if mode not in ("max", "mean"):
            raise ValueError(f"mode must be 'max' or 'mean', got {mode!r}")
        self.mode = mode
        self._cache: np.ndarray | None = None
        self._x_shape: tuple[int, int, int, int] | None = None

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out, self._cache = ops.global_pool_forward(x, self.mode)
        self._x_shape = x.shape
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx = ops.global_pool_backward(dout, self._cache, self._x_shape, self.mode)
        self._cache = None
        return dx


class Dense:
    def __init__(
        self,
        din: int,
        dout: int,
        rng: np.random.Generator,
        name: str,
        dtype: np.dtype = np.float32,
    ) -> None:
        std = np.sqrt(2.0 / din)
        self.w = Param(f"{name}.w", rng.normal(0.0, std, (din, dout)).astype(dtype))
        self.b = Param(f"{name}.b", np.zeros(dout, dtype=dtype))
        self._x: np.ndarray | None = None

    def params(self) -> list[Param]:
        return [self.w, self.b]

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out, self._x = ops.dense_forward(x, self.w.value, self.b.value)
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx, self.w.grad, self.b.grad = ops.dense_backward(dout, self._x, self.w.value)
        self._x = None
        return dx


class ReLU:
    def __init__(self) -> None:
        self._mask: np.ndarray | None = None

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out, self._mask = ops.relu_forward(x)
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dx = ops.relu_backward(dout, self._mask)
        self._mask = None
        return dx


class Dropout:
    """Inverted dropout; the identity when rate is 0 or train is False."""

    def __init__(self, rate: float, rng: np.random.Generator) -> None:
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._rng = rng
        self._mask: np.ndarray | None = None

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        out, self._mask = ops.dropout_forward(x, self.rate, self._rng)
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return dout
        dx = dout * self._mask
        self._mask = None
        return dx
