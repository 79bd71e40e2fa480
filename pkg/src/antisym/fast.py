"""Polynomial-time antisymmetrized neurons as sums of Slater determinants.

A neuron ``tau(w . x + b)`` is written through Fourier inversion as a
superposition of plane waves ``exp(i theta (w . x + b))``. Keeping only the
frequencies ``t <= |theta| <= T`` and discretizing with nodes ``theta_p`` and
weights ``c_p`` gives

    S_w(x) = (2 pi n!)^(-1/2) sum_p c_p exp(i theta_p b) det(exp(i theta_p w_i . x_j)),

where each determinant is the exact antisymmetrization of one plane wave. The
cost is ``O(N n^3)`` per point instead of ``O(n! n)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from antisym.activations import ActivationSpec, ft_density, ft_integral, tail_sum
from antisym.kernel import kernel_grad_bound
from antisym.network import NetworkParams, as_blocks
from antisym.oracle import log_inv_sqrt_factorial
from antisym.permutations import parity

SCHEMES = ("midpoint_exact_coeff", "gauss_legendre")

# Bound on complex entries materialized per determinant batch.
_BATCH_ENTRIES = 1 << 21


@dataclass(frozen=True, eq=False)
class QuadraturePlan:
    """Frequency nodes and weights for one neuron.

    ``nodes`` and ``coeffs`` hold the ``N`` positive nodes followed by their
    ``N`` mirror images; for real activations ``coeffs[N + p] = conj(coeffs[p])``.
    ``activation`` is the spec actually integrated, i.e. already rescaled by
    ``rescale_r``.
    """

    activation: ActivationSpec
    t: float
    T: float
    N: int
    scheme: str
    rescale_r: float
    nodes: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "activation": self.activation.kind,
                "kappa": self.activation.kappa,
                "activation_scale": self.activation.scale,
                "t": self.t,
                "T": self.T,
                "N": self.N,
                "scheme": self.scheme,
                "rescale_r": self.rescale_r,
                "nodes": self.nodes.tolist(),
                "coeffs_re": self.coeffs.real.tolist(),
                "coeffs_im": self.coeffs.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> QuadraturePlan:
        data = json.loads(text)
        spec = ActivationSpec(
            data["activation"], kappa=data.get("kappa", 1.0), scale=data.get("activation_scale", data["rescale_r"])
        )
        return cls(
            activation=spec,
            t=data["t"],
            T=data["T"],
            N=data["N"],
            scheme=data["scheme"],
            rescale_r=data["rescale_r"],
            nodes=np.array(data["nodes"], dtype=float),
            coeffs=np.array(data["coeffs_re"], dtype=float) + 1j * np.array(data["coeffs_im"], dtype=float),
        )


@dataclass(frozen=True)
class FastEvalResult:
    """``value`` is complex; its real part is the answer for real activations."""

    value: complex | np.ndarray
    per_term_log_magnitudes: np.ndarray | None = None


@lru_cache(maxsize=8)
def _legendre(N: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(N)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def infrared_cutoff(w: np.ndarray, n: int | None = None, d: int | None = None, rescale_r: float = 1.0) -> float:
    """``max(1 / (2 sqrt(d) |w|_inf), 1) / r``."""
    blocks = as_blocks(w, n, d)
    d = blocks.shape[-1]
    max_abs = float(np.max(np.abs(blocks)))
    base = 1.0 / (2 * math.sqrt(d) * max_abs) if max_abs > 0 else math.inf
    return max(base, 1.0) / rescale_r


def _ultraviolet_cutoff(spec: ActivationSpec, epsilon: float, t: float) -> float:
    if spec.is_rough:
        return epsilon ** (-1.0 / spec.tail_decay_K)
    # smooth (rescaled) activation: stop where the remaining tail is a fraction epsilon of the band
    target = epsilon * tail_sum(spec, t)
    hi = 2 * t
    while tail_sum(spec, hi) > target:
        hi *= 2
    lo = hi / 2
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if tail_sum(spec, mid) > target else (lo, mid)
    return hi


def plan(
    spec: ActivationSpec,
    w: np.ndarray,
    n: int | None = None,
    d: int | None = None,
    epsilon: float | None = None,
    N: int | None = None,
    *,
    t: float | None = None,
    T: float | None = None,
    scheme: str = "midpoint_exact_coeff",
    rescale_r: float = 1.0,
) -> QuadraturePlan:
    """Build the frequency discretization for the neuron with weights ``w``.

    Defaults: ``t = max(1/(2 sqrt(d) |w|_inf), 1) / r``, ``T = epsilon^(-1/K)``,
    ``N = ceil(T)``. ``t`` and ``T`` may be given directly instead. The
    midpoint scheme splits ``[t, T]`` into ``N`` equal panels with the node at
    each panel center and the exact panel integral of the density as weight;
    the Gauss-Legendre scheme uses one ``N``-point rule on ``[t, T]``.
    """
    if spec.kind == "exp":
        raise ValueError("exp has no Fourier density to discretize")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    if not spec.is_rough and not rescale_r > 1:
        raise ValueError(
            f"{spec.kind} is smooth: its antisymmetrized norm decays faster than any power of n, so a "
            "relative error target cannot be met by frequency truncation. Rescale the first layer "
            "(rescale_r > 1, see rescaled_plan_for_smooth)."
        )
    if not rescale_r >= 1:
        raise ValueError("rescale_r must be at least 1")
    if epsilon is not None and not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    eff = spec.rescaled(rescale_r) if rescale_r != 1 else spec
    blocks = as_blocks(w, n, d)
    t = infrared_cutoff(blocks, rescale_r=rescale_r) if t is None else float(t)
    if T is None:
        if epsilon is None:
            raise ValueError("give either epsilon or T")
        T = _ultraviolet_cutoff(eff, epsilon, t)
    T = float(T)
    if not T > t > 0:
        raise ValueError(f"need 0 < t < T, got t={t}, T={T}")
    N = math.ceil(T) if N is None else int(N)
    if N < 1:
        raise ValueError("N must be positive")

    if scheme == "midpoint_exact_coeff":
        edges = np.linspace(t, T, N + 1)
        pos = 0.5 * (edges[:-1] + edges[1:])
        c_pos = ft_integral(eff, edges[:-1], edges[1:])
        c_neg = ft_integral(eff, -edges[1:], -edges[:-1])
    else:
        x, wq = _legendre(N)
        pos = 0.5 * (t + T) + 0.5 * (T - t) * x
        weights = 0.5 * (T - t) * wq
        c_pos = weights * ft_density(eff, pos)
        c_neg = weights * ft_density(eff, -pos)
    nodes = np.concatenate([pos, -pos])
    coeffs = np.concatenate([np.atleast_1d(c_pos), np.atleast_1d(c_neg)]).astype(complex)
    nodes.setflags(write=False)
    coeffs.setflags(write=False)
    return QuadraturePlan(eff, t, T, N, scheme, float(rescale_r), nodes, coeffs)


def rescaled_plan_for_smooth(
    spec: ActivationSpec,
    r: float,
    w: np.ndarray,
    n: int | None = None,
    d: int | None = None,
    epsilon: float | None = None,
    N: int | None = None,
    **kwargs,
) -> QuadraturePlan:
    """Plan for the neuron ``tau(r w . x)``.

    The density becomes ``F(theta / r) / r`` and the default infra-red cutoff
    becomes ``t / r``; everything else is the ordinary pipeline.
    """
    if not r >= 1:
        raise ValueError("r must be at least 1")
    return plan(spec, w, n, d, epsilon, N, rescale_r=r, **kwargs)


def _canonical_order(x: np.ndarray) -> tuple[np.ndarray, int, bool]:
    """Lexicographic particle order, its sign, and whether two particles coincide."""
    order = np.lexsort(x.T[::-1])
    xs = x[order]
    duplicate = bool(np.any(np.all(xs[1:] == xs[:-1], axis=1))) if len(xs) > 1 else False
    return order, parity(order), duplicate


def evaluate_neuron(
    plan: QuadraturePlan,
    w: np.ndarray,
    bias: float,
    x: np.ndarray,
    n: int | None = None,
    d: int | None = None,
    diagnostics: bool = False,
) -> FastEvalResult:
    """Evaluate ``S_w`` at one configuration ``(n, d)`` or a batch ``(S, n, d)``.

    Particles are first put in lexicographic order and the result multiplied by
    the sign of that reordering. The determinants are therefore always formed
    from the same matrix for any relabelling of the particles, and swapping two
    particles flips the sign of the output bit for bit.
    """
    blocks = as_blocks(w, n, d)
    n, d = blocks.shape
    x = as_blocks(x, n, d)
    single = x.ndim == 2
    X = x[None] if single else x
    S = X.shape[0]

    signs = np.empty(S)
    Xs = np.empty_like(X)
    for s in range(S):
        order, sgn, dup = _canonical_order(X[s])
        Xs[s] = X[s][order]
        signs[s] = 0.0 if dup else sgn

    M = np.einsum("id,sjd->sij", blocks, Xs)
    coeffs = plan.coeffs * np.exp(1j * plan.nodes * bias)
    total = np.zeros(S, dtype=complex)
    logs = np.empty((S, plan.nodes.size)) if diagnostics else None
    step = max(1, _BATCH_ENTRIES // (S * n * n))
    for start in range(0, plan.nodes.size, step):
        theta = plan.nodes[start : start + step]
        dets = np.linalg.det(np.exp(1j * theta[None, :, None, None] * M[:, None, :, :]))
        total += dets @ coeffs[start : start + step]
        if diagnostics:
            with np.errstate(divide="ignore"):
                logs[:, start : start + step] = np.log(np.abs(coeffs[start : start + step])) + np.log(np.abs(dets))
    scale = math.exp(log_inv_sqrt_factorial(n)) / math.sqrt(2 * math.pi)
    value = total * signs * scale
    return FastEvalResult(complex(value[0]) if single else value, logs[0] if (single and diagnostics) else logs)


def plan_network(params: NetworkParams, spec: ActivationSpec, epsilon: float | None = None, **kwargs) -> list[QuadraturePlan]:
    """One plan per first-layer neuron."""
    return [plan(spec, wb, epsilon=epsilon, **kwargs) for wb in params.blocks()]


def evaluate_network(
    params: NetworkParams, spec: ActivationSpec, plans: list[QuadraturePlan], x: np.ndarray
) -> complex | np.ndarray:
    """``sum_k a_k S_{w_k, b_k}(x)`` for a two-layer network."""
    if params.depth_weights:
        raise ValueError("the determinant expansion applies to two-layer networks")
    if len(plans) != params.m:
        raise ValueError("need one plan per neuron")
    total = 0.0
    for k, (wb, pl) in enumerate(zip(params.blocks(), plans)):
        if params.a[k] == 0:
            continue
        total = total + params.a[k] * evaluate_neuron(pl, wb, params.b[k], x).value
    if np.ndim(total) == 0:
        return complex(total)
    return total


def band_l1_norm(spec: ActivationSpec, t: float, T: float) -> float:
    """``integral over t <= |theta| <= T`` of ``|F(theta)|``."""
    val, _ = integrate.quad(lambda s: abs(ft_density(spec, s)), t, T, limit=1000, epsrel=1e-10)
    return 2 * val


def discretization_error_bound(plan: QuadraturePlan, w: np.ndarray, n: int | None = None, d: int | None = None) -> float:
    """``(2/pi) (T/N) |grad D_w| (integral |F|)^2`` with the gradient replaced by its explicit bound."""
    grad = kernel_grad_bound(w, n, d)
    return 2 / math.pi * plan.T / plan.N * grad * band_l1_norm(plan.activation, plan.t, plan.T) ** 2
