"""Two-layer and deep networks, Gaussian initialization, typicality diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from antisym.activations import ActivationSpec, evaluate
from antisym.envelope import make_rng

#: Constant in the max-entry typicality test. The theory only asks for some C > 1.
TYPICAL_C = 3.0


def as_blocks(w: np.ndarray, n: int | None = None, d: int | None = None) -> np.ndarray:
    """View weights as particle blocks of shape ``(..., n, d)``.

    A flat vector needs ``d`` (and optionally ``n``) to be split; arrays that
    already end in ``(n, d)`` pass through unchanged.
    """
    w = np.asarray(w, dtype=float)
    if d is None:
        if w.ndim < 2:
            raise ValueError("pass d (and n) for flat weight vectors")
        return w
    if w.ndim >= 2 and w.shape[-1] == d and (n is None or w.shape[-2] == n):
        return w
    if n is None:
        if w.shape[-1] % d:
            raise ValueError(f"length {w.shape[-1]} is not a multiple of d={d}")
        n = w.shape[-1] // d
    if w.shape[-1] != n * d:
        raise ValueError(f"expected trailing length {n * d} = n*d, got shape {w.shape}")
    return w.reshape(*w.shape[:-1], n, d)


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Weights of ``x -> sum_k a_k tau(w_k . x + b_k)``, optionally with hidden layers.

    ``W`` has shape ``(m, n*d)`` with row ``k`` the flattened particle blocks of
    ``w_k``. ``depth_weights`` holds square ``(m, m)`` hidden matrices applied
    between the first layer and the output.
    """

    n: int
    d: int
    m: int
    W: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c_init: float = 2.0
    seed: int | None = None
    depth_weights: tuple[np.ndarray, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        for name in ("W", "a", "b"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float))
        if self.depth_weights is not None:
            object.__setattr__(self, "depth_weights", tuple(np.array(H, dtype=float) for H in self.depth_weights))
        if self.W.shape != (self.m, self.n * self.d):
            raise ValueError(f"W must have shape {(self.m, self.n * self.d)}, got {self.W.shape}")
        if self.a.shape != (self.m,) or self.b.shape != (self.m,):
            raise ValueError("a and b must have length m")
        for H in self.depth_weights or ():
            if H.shape != (self.m, self.m):
                raise ValueError("hidden layers must be m x m")
        for arr in (self.W, self.a, self.b, *(self.depth_weights or ())):
            arr.setflags(write=False)

    @property
    def depth(self) -> int:
        """Number of weight layers including the output vector."""
        return 2 + len(self.depth_weights or ())

    def blocks(self) -> np.ndarray:
        """First-layer weights as particle blocks, shape ``(m, n, d)``."""
        return self.W.reshape(self.m, self.n, self.d)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "d": self.d,
            "m": self.m,
            "c_init": self.c_init,
            "seed": self.seed,
            "W": self.W.ravel().tolist(),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
        }
        if self.depth_weights:
            out["depth_weights"] = [H.ravel().tolist() for H in self.depth_weights]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> NetworkParams:
        n, d, m = int(data["n"]), int(data["d"]), int(data["m"])
        hidden = data.get("depth_weights")
        return cls(
            n=n,
            d=d,
            m=m,
            W=np.array(data["W"], dtype=float).reshape(m, n * d),
            a=np.array(data["a"], dtype=float),
            b=np.array(data["b"], dtype=float),
            c_init=float(data["c_init"]),
            seed=data.get("seed"),
            depth_weights=tuple(np.array(H, dtype=float).reshape(m, m) for H in hidden) if hidden else None,
        )


def dump_network(params: NetworkParams, path: str | Path) -> None:
    """Write parameters as JSON. Python's float repr round-trips exactly."""
    Path(path).write_text(json.dumps(params.to_dict()))


def load_network(path: str | Path) -> NetworkParams:
    return NetworkParams.from_dict(json.loads(Path(path).read_text()))


def _check_sizes(**sizes: int) -> None:
    for name, value in sizes.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")


def init_network(n: int, d: int, m: int, c_init: float = 2.0, seed: int | np.random.Generator = 0) -> NetworkParams:
    """Gaussian initialization: ``w_k ~ N(0, c/(n d) I)``, ``a_k ~ N(0, c/m)``, zero biases.

    ``c_init = 1`` is Xavier, ``c_init = 2`` is He.
    """
    _check_sizes(n=n, d=d, m=m)
    if c_init not in (1, 2):
        raise ValueError("c_init must be 1 (Xavier) or 2 (He)")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    W = rng.normal(0.0, math.sqrt(c_init / (n * d)), size=(m, n * d))
    a = rng.normal(0.0, math.sqrt(c_init / m), size=m)
    return NetworkParams(
        n=n, d=d, m=m, W=W, a=a, b=np.zeros(m), c_init=float(c_init),
        seed=seed if isinstance(seed, int) else None,
    )


def init_deep_network(
    n: int, d: int, depth: int, seed: int | np.random.Generator = 0, width: int | None = None
) -> NetworkParams:
    """Network with ``depth`` weight layers (``depth >= 2``), all of width ``3n`` by default.

    Every layer is drawn with variance ``1 / fan_in``.
    """
    width = 3 * n if width is None else width
    _check_sizes(n=n, d=d, width=width)
    if depth < 2:
        raise ValueError("depth counts weight layers including the output and must be >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    W = rng.normal(0.0, math.sqrt(1.0 / (n * d)), size=(width, n * d))
    hidden = tuple(rng.normal(0.0, math.sqrt(1.0 / width), size=(width, width)) for _ in range(depth - 2))
    a = rng.normal(0.0, math.sqrt(1.0 / width), size=width)
    return NetworkParams(
        n=n, d=d, m=width, W=W, a=a, b=np.zeros(width), c_init=1.0,
        seed=seed if isinstance(seed, int) else None, depth_weights=hidden or None,
    )


def hidden_features(params: NetworkParams, spec: ActivationSpec, preact: np.ndarray) -> np.ndarray:
    """Last hidden layer, given first-layer pre-activations of shape ``(..., m)``."""
    h = evaluate(spec, preact)
    for H in params.depth_weights or ():
        h = evaluate(spec, h @ H.T)
    return h


def forward(params: NetworkParams, spec: ActivationSpec, x: np.ndarray):
    """Network output at ``x`` of shape ``(n, d)``, ``(n*d,)`` or a batch ``(S, n, d)``."""
    x = np.asarray(x, dtype=float)
    nd = params.n * params.d
    if x.shape[-1] == params.d and x.ndim >= 2 and x.shape[-2] == params.n:
        flat = x.reshape(*x.shape[:-2], nd)
    elif x.shape[-1] == nd:
        flat = x
    else:
        raise ValueError(f"configuration shape {x.shape} does not match n={params.n}, d={params.d}")
    pre = flat @ params.W.T + params.b
    out = hidden_features(params, spec, pre) @ params.a
    return float(out) if np.ndim(out) == 0 else out


# --- separation and typicality ---------------------------------------------------------------


def pair_separation(blocks: np.ndarray) -> np.ndarray:
    """Half the smallest ``|w_i - w_j|`` or ``|w_i + w_j|`` over pairs, for blocks ``(..., n, d)``.

    Infinite when there are no pairs.
    """
    blocks = np.asarray(blocks, dtype=float)
    n = blocks.shape[-2]
    if n < 2:
        return np.full(blocks.shape[:-2], np.inf)
    i, j = np.triu_indices(n, k=1)
    wi, wj = blocks[..., i, :], blocks[..., j, :]
    minus = np.sum((wi - wj) ** 2, axis=-1)
    plus = np.sum((wi + wj) ** 2, axis=-1)
    return 0.5 * np.sqrt(np.minimum(minus, plus).min(axis=-1))


def separation_threshold(n: int, d: int) -> float:
    """Typical separation scale ``n^-(1/2 + 2/d) / sqrt(log n)``; 0 for ``n = 1``."""
    if n < 2:
        return 0.0
    return n ** -(0.5 + 2.0 / d) / math.sqrt(math.log(n))


def max_entry_threshold(n: int, d: int, C: float = TYPICAL_C) -> float:
    nd = n * d
    return C * math.sqrt(math.log(nd) / nd) if nd > 1 else C


@dataclass(frozen=True)
class SeparationReport:
    delta_w: float
    threshold: float
    is_typical_sep: bool
    norm_sq: float
    max_abs: float
    is_typical: bool


def separation(
    w: np.ndarray, n: int | None = None, d: int | None = None, c_init: float = 2.0, C: float = TYPICAL_C
) -> SeparationReport:
    """Separation and typicality diagnostics of one weight vector."""
    blocks = as_blocks(w, n, d)
    if blocks.ndim != 2:
        raise ValueError("separation takes a single weight vector")
    n, d = blocks.shape
    delta = float(pair_separation(blocks))
    thr = separation_threshold(n, d)
    norm_sq = float(np.sum(blocks**2))
    max_abs = float(np.max(np.abs(blocks)))
    typical = (c_init / 2 <= norm_sq <= 2 * c_init) and max_abs <= max_entry_threshold(n, d, C)
    return SeparationReport(
        delta_w=delta, threshold=thr, is_typical_sep=delta >= thr,
        norm_sq=norm_sq, max_abs=max_abs, is_typical=bool(typical),
    )


def is_typical_batch(blocks: np.ndarray, c_init: float, C: float = TYPICAL_C) -> np.ndarray:
    """Vectorized typicality test for weights of shape ``(..., n, d)``."""
    blocks = np.asarray(blocks, dtype=float)
    n, d = blocks.shape[-2:]
    norm_sq = np.sum(blocks**2, axis=(-2, -1))
    max_abs = np.max(np.abs(blocks), axis=(-2, -1))
    return (norm_sq >= c_init / 2) & (norm_sq <= 2 * c_init) & (max_abs <= max_entry_threshold(n, d, C))


def unit_ball_volume(d: int) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(d / 2 + 1))


def separation_probability_bound(n: int, d: int, delta: float, c_init: float) -> float:
    """Union bound on ``P(delta_w < delta)`` for ``w ~ N(0, c/(n d) I)``.

    Each of the ``2 C(n, 2)`` vectors ``w_i +- w_j`` must land in a ball of
    radius ``2 delta``, whose probability is at most its volume times the peak
    Gaussian density.
    """
    pairs = n * (n - 1) // 2
    return 2 * pairs * (2 * n * d * delta**2 / (c_init * math.pi)) ** (d / 2) * unit_ball_volume(d)
