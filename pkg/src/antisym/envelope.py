"""Standard Gaussian envelope, its Fourier transform, and reproducible sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def envelope_ft(v: np.ndarray) -> np.ndarray | float:
    """Un-normalized Fourier transform of the standard Gaussian, ``exp(-|v|^2/2)``.

    The norm is taken over the last axis, so a batch of vectors is accepted.
    """
    v = np.asarray(v, dtype=float)
    out = np.exp(-0.5 * np.sum(v * v, axis=-1))
    return float(out) if out.ndim == 0 else out


def envelope_tail(theta: float | np.ndarray) -> float | np.ndarray:
    """Largest Fourier magnitude outside the ball of radius ``theta``: ``exp(-theta^2/2)``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    out = np.exp(-0.5 * theta * theta)
    return float(out) if out.ndim == 0 else out


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream labelled by ``key`` under ``seed``.

    Streams for different keys are statistically independent (``SeedSequence``
    spawn keys), and each stream is reproducible on its own, so parallel workers
    can draw without coordination.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key)))


def sample_envelope(n: int, d: int, count: int, seed: int | np.random.Generator) -> np.ndarray:
    """Draw ``count`` configurations of ``n`` particles in ``R^d`` from the envelope.

    Returns an array of shape ``(count, n, d)``.
    """
    if n < 1 or d < 1 or count < 1:
        raise ValueError(f"sizes must be positive, got n={n}, d={d}, count={count}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return rng.standard_normal((count, n, d))


@dataclass(frozen=True)
class GaussianEnvelope:
    """Standard normal density on ``R^(n*d)``, viewed as ``n`` particles in ``R^d``."""

    dim: int
    total_dim: int

    def __post_init__(self) -> None:
        if self.dim < 1 or self.total_dim < 1 or self.total_dim % self.dim:
            raise ValueError("total_dim must be a positive multiple of dim")

    @property
    def n_particles(self) -> int:
        return self.total_dim // self.dim

    def density(self, x: np.ndarray) -> np.ndarray | float:
        """Density at ``x`` given as ``(..., total_dim)`` or ``(..., n, d)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.total_dim:
            x = x.reshape(*x.shape[:-2], self.total_dim)
        out = (2 * np.pi) ** (-self.total_dim / 2) * np.exp(-0.5 * np.sum(x * x, axis=-1))
        return float(out) if out.ndim == 0 else out

    def ft(self, v: np.ndarray) -> np.ndarray | float:
        return envelope_ft(v)

    def tail(self, theta: float) -> float | np.ndarray:
        return envelope_tail(theta)

    def sample(self, count: int, seed: int | np.random.Generator) -> np.ndarray:
        return sample_envelope(self.n_particles, self.dim, count, seed)


@dataclass(frozen=True)
class InducedScalarDistribution:
    """Law of ``w . X`` for ``X`` drawn from the envelope: centered normal with variance ``|w|^2``."""

    variance: float

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")

    @classmethod
    def from_weights(cls, w: np.ndarray) -> InducedScalarDistribution:
        w = np.asarray(w, dtype=float)
        return cls(float(np.sum(w * w)))

    def ft(self, theta: float | np.ndarray) -> float | np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.exp(-0.5 * self.variance * theta * theta)
        return float(out) if out.ndim == 0 else out
