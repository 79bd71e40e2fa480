"""Explicit antisymmetrization by summing over all permutations, and Monte-Carlo norms.

These routines cost ``O(n!)`` per point and serve as the reference that every
faster method is tested against.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from antisym.activations import ActivationSpec, evaluate
from antisym.envelope import make_rng, sample_envelope
from antisym.network import NetworkParams, as_blocks, hidden_features
from antisym.permutations import ENUMERATION_CAP, CapacityError, iter_permutations

#: Two-sided 90% normal quantile.
Z90 = float(norm.ppf(0.95))

# Bound on the number of floats materialized per permutation block.
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class AntisymEvaluation:
    value: complex
    n_permutations: int
    log_scale_factor: float


@dataclass(frozen=True)
class NormEstimate:
    """Mean of a nonnegative quantity with a 90% confidence interval."""

    mean: float
    ci90_low: float
    ci90_high: float
    n_samples: int
    stderr: float = 0.0


def log_inv_sqrt_factorial(n: int) -> float:
    return -0.5 * float(gammaln(n + 1))


def _check_cap(n: int) -> None:
    if n > ENUMERATION_CAP:
        raise CapacityError(f"explicit antisymmetrization is capped at n = {ENUMERATION_CAP}, got {n}")


def brute_antisymmetrize(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, n: int | None = None, d: int | None = None
) -> AntisymEvaluation:
    """``(1/sqrt(n!)) * sum over permutations pi of sign(pi) f(x_pi)``.

    ``f`` receives a batch of permuted configurations of shape ``(B, n, d)``
    and must return ``B`` values. ``x`` is one configuration, ``(n, d)`` or flat
    with ``n`` and ``d`` given.
    """
    x = as_blocks(x, n, d)
    if x.ndim != 2:
        raise ValueError("x must be a single configuration")
    n = x.shape[0]
    _check_cap(n)
    chunk = max(1, _BLOCK_ELEMENTS // max(1, x.size))
    total = 0.0
    for perms, signs in iter_permutations(n, chunk):
        vals = np.asarray(f(x[perms]))
        total = total + signs @ vals
    log_scale = log_inv_sqrt_factorial(n)
    return AntisymEvaluation(complex(total * math.exp(log_scale)), math.factorial(n), log_scale)


def signed_permutation_sum(
    pair_terms: np.ndarray, fn: Callable[[np.ndarray], np.ndarray], out_width: int | None = None
) -> np.ndarray:
    """``sum_pi sign(pi) fn(sum_i pair_terms[..., i, pi(i), :])`` for batched inputs.

    ``pair_terms`` has shape ``(S, n, n, m)``: entry ``[s, i, j, k]`` is the
    contribution of weight block ``i`` of unit ``k`` meeting particle ``j`` of
    sample ``s`` (typically ``w_ki . x_sj``). Only these ``n^2`` numbers are
    formed per sample and unit; each permutation then costs ``O(n)`` additions.
    ``fn`` maps ``(..., m)`` to ``(..., q)``; the result has shape ``(S, q)``.
    The ``1/sqrt(n!)`` factor is not applied. ``out_width`` (default ``m``)
    sizes the permutation blocks when ``q`` is larger than ``m``.
    """
    S, n, _, m = pair_terms.shape
    _check_cap(n)
    out = None
    per_perm = max(1, S * max(m, out_width or 0))
    chunk = max(1, _BLOCK_ELEMENTS // per_perm)
    rows = np.arange(n)
    for perms, signs in iter_permutations(n, chunk):
        z = pair_terms[:, 0, perms[:, 0], :].copy()
        for i in rows[1:]:
            z += pair_terms[:, i, perms[:, i], :]
        part = np.einsum("b,sbq->sq", signs, fn(z))
        out = part if out is None else out + part
    return out


def _pair_terms(blocks: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``w_ki . x_sj`` arranged as ``(S, n, n, m)``."""
    return np.einsum("kid,sjd->sijk", blocks, X)


def antisymmetrize_units(
    blocks: np.ndarray, X: np.ndarray, fn: Callable[[np.ndarray], np.ndarray], out_width: int | None = None
) -> np.ndarray:
    """Antisymmetrize ``fn(w_k . x)`` for all units ``k`` at every sample, scaled by ``1/sqrt(n!)``.

    ``blocks`` is ``(m, n, d)``, ``X`` is ``(S, n, d)`` and ``fn`` maps
    pre-activations ``(..., m)`` to outputs ``(..., q)``. Samples are processed
    in groups sized to bound memory. Returns ``(S, q)``.
    """
    m, n, _ = blocks.shape
    width = max(m, out_width or 0)
    perms_per_block = min(math.factorial(n), max(1, _BLOCK_ELEMENTS // width))
    step = max(1, _BLOCK_ELEMENTS // (perms_per_block * width))
    parts = [
        signed_permutation_sum(_pair_terms(blocks, X[s : s + step]), fn, out_width)
        for s in range(0, X.shape[0], step)
    ]
    return np.concatenate(parts) * math.exp(log_inv_sqrt_factorial(n))


def _batch(X: np.ndarray, n: int, d: int) -> np.ndarray:
    X = as_blocks(X, n, d)
    return X[None] if X.ndim == 2 else X


def antisymmetrize_neurons(
    spec: ActivationSpec | Callable, W: np.ndarray, X: np.ndarray, bias: np.ndarray | float = 0.0,
    n: int | None = None, d: int | None = None,
) -> np.ndarray:
    """Antisymmetrized single neurons ``A[tau(w_k . x + b_k)]`` at every sample.

    ``W`` is ``(m, n, d)`` (or ``(n, d)`` for a single neuron), ``X`` is
    ``(S, n, d)``. Returns shape ``(S, m)``.
    """
    blocks = as_blocks(W, n, d)
    if blocks.ndim == 2:
        blocks = blocks[None]
    _, n, d = blocks.shape
    X = _batch(X, n, d)
    act = spec if callable(spec) and not isinstance(spec, ActivationSpec) else (lambda z: evaluate(spec, z))
    bias = np.broadcast_to(np.asarray(bias, dtype=float), (blocks.shape[0],))
    return antisymmetrize_units(blocks, X, lambda z: act(z + bias))


def antisymmetrize_hidden(params: NetworkParams, spec: ActivationSpec, X: np.ndarray) -> np.ndarray:
    """Antisymmetrization of every unit of the last hidden layer, shape ``(S, m)``."""
    X = _batch(X, params.n, params.d)
    blocks = params.blocks()
    fn = lambda z: hidden_features(params, spec, z + params.b)  # noqa: E731
    return antisymmetrize_units(blocks, X, fn)


def antisymmetrize_network(params: NetworkParams, spec: ActivationSpec, X: np.ndarray) -> np.ndarray:
    """``A f`` for the network ``f`` at each sample, shape ``(S,)``."""
    return antisymmetrize_hidden(params, spec, X) @ params.a


def slater_exponential(w: np.ndarray, theta: float, x: np.ndarray, n: int | None = None, d: int | None = None):
    """Antisymmetrized plane wave ``exp(i theta w . x)`` as a scaled determinant.

    ``x`` may carry leading batch axes; the determinant is LAPACK's pivoted LU.
    """
    w = as_blocks(w, n, d)
    n, d = w.shape
    x = as_blocks(x, n, d)
    M = np.einsum("id,...jd->...ij", w, x)
    val = np.linalg.det(np.exp(1j * theta * M)) * math.exp(log_inv_sqrt_factorial(n))
    return complex(val) if np.ndim(val) == 0 else val


def estimate_mean(values: np.ndarray, ci: str = "normal", seed: int = 0, n_boot: int = 2000) -> NormEstimate:
    """Mean with a 90% interval: normal approximation, or percentile bootstrap."""
    values = np.asarray(values, dtype=float).ravel()
    k = values.size
    if k < 2:
        raise ValueError("need at least two values for an interval")
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(k))
    if ci == "normal":
        lo, hi = mean - Z90 * se, mean + Z90 * se
    elif ci == "bootstrap":
        rng = make_rng(seed, 0xB007)
        means = values[rng.integers(0, k, size=(n_boot, k))].mean(axis=1)
        lo, hi = (float(q) for q in np.quantile(means, [0.05, 0.95]))
        lo, hi = min(lo, mean), max(hi, mean)
    else:
        raise ValueError(f"unknown interval method {ci!r}")
    return NormEstimate(mean, float(lo), float(hi), k, se)


def mc_norm_sq(
    g: Callable[[np.ndarray], np.ndarray], n: int, d: int, n_samples: int, seed: int, ci: str = "normal"
) -> NormEstimate:
    """Monte-Carlo estimate of ``E|g(X)|^2`` for ``X`` from the envelope.

    ``g`` is called once on the full batch of shape ``(n_samples, n, d)``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    X = sample_envelope(n, d, n_samples, seed)
    vals = np.asarray(g(X))
    return estimate_mean(np.abs(vals) ** 2, ci=ci, seed=seed)


def _exp_gram_logdet_mp(G: np.ndarray) -> float:
    digits = 30
    prev = None
    while True:
        with mpmath.workdps(digits):
            A = mpmath.matrix([[mpmath.exp(mpmath.mpf(float(v))) for v in row] for row in G])
            det = mpmath.det(A)
            cur = mpmath.log(det) if det > 0 else -mpmath.inf
        if prev is not None and (cur == prev or (mpmath.isfinite(cur) and abs(cur - prev) < 1e-12 * max(1, abs(cur)))):
            return float(cur)
        if digits > 2000:
            return float(cur)
        prev = cur
        digits *= 2


def exp_norm_closed_form(w: np.ndarray, n: int | None = None, d: int | None = None, log: bool = False) -> float:
    """Squared norm of the antisymmetrized real exponential ``x -> exp(w . x)``.

    It is the Gram determinant ``det(E[exp((w_i + w_j) . X)]) = det(exp(|w_i + w_j|^2 / 2))``,
    evaluated as ``|w|^2 + logdet(exp(w_i . w_j))``. Ill-conditioned Gram
    matrices are redone in extended precision. With ``log=True`` the natural
    logarithm is returned (``-inf`` for a singular Gram matrix).
    """
    blocks = as_blocks(w, n, d)
    n = blocks.shape[0]
    if n > 30:
        raise CapacityError("closed form limited to n <= 30")
    G = blocks @ blocks.T
    offset = float(np.sum(blocks**2))
    E = np.exp(G)
    sign, logdet = np.linalg.slogdet(E)
    cond = np.linalg.cond(E)
    if sign <= 0 or not np.isfinite(cond) or cond * np.finfo(float).eps > 1e-7:
        logdet = _exp_gram_logdet_mp(G)
    out = offset + logdet
    if log:
        return out
    return math.exp(out) if np.isfinite(out) else 0.0


def expected_norm_over_outputs(
    W: np.ndarray,
    spec: ActivationSpec,
    n: int | None = None,
    d: int | None = None,
    c_init: float = 2.0,
    neuron_norm: Callable[[np.ndarray], float] | None = None,
) -> float:
    """Average of ``|A f|^2`` over output weights ``a ~ N(0, c/m)``: ``(c/m) sum_k |A tau_k|^2``.

    ``neuron_norm`` maps one weight block array ``(n, d)`` to its squared
    antisymmetrized norm. By default the exponential uses its closed form and
    the other activations use the Fourier double integral.
    """
    blocks = as_blocks(W, n, d)
    if blocks.ndim == 2:
        blocks = blocks[None]
    m, n, _ = blocks.shape
    if neuron_norm is None:
        if spec.kind == "exp":
            neuron_norm = exp_norm_closed_form
        else:
            from antisym.kernel import norm_sq_via_double_integral

            if n < spec.min_particles:
                raise ValueError(
                    f"the Fourier formula needs n >= {spec.min_particles} for {spec.kind}; pass neuron_norm"
                )
            neuron_norm = lambda wb: norm_sq_via_double_integral(wb, spec)  # noqa: E731
    return c_init / m * float(sum(neuron_norm(wb) for wb in blocks))
