"""Overlap kernel ``D(v, w) = det(B)``, ``B_ij = exp(-|v_i - w_j|^2 / 2)``, and what is built on it.

``D(v, w)`` is the envelope inner product of the antisymmetrized plane waves
``exp(i v . x)`` and ``exp(i w . x)``. Along a single weight direction,
``D_w(theta, theta') = D(theta w, theta' w)`` factors as

    exp(-|w|^2 (|theta| - |theta'|)^2 / 2) * Psi(theta theta'),

where ``Psi(s) = det(exp(-s |w_i - w_j|^2 / 2))`` for ``s >= 0`` and
``Psi(-u) = det(exp(-u |w_i + w_j|^2 / 2))`` for ``u > 0``. Both determinants
have entries in ``(0, 1]``, which is how the kernel is evaluated here: the
exponentially large and small factors of the textbook form cancel analytically
instead of numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss

from antisym.activations import ActivationSpec, ft_density, tail_sum
from antisym.network import as_blocks, pair_separation


class QuadratureError(ArithmeticError):
    """The double integral produced an imaginary residue above tolerance."""


@dataclass(frozen=True)
class KernelEval:
    value: complex
    abs_bound_ok: bool


def _signed_exp_det(logdet: np.ndarray, sign: np.ndarray) -> np.ndarray:
    return sign * np.exp(logdet)


def overlap_matrix(v: np.ndarray, w: np.ndarray, n: int | None = None, d: int | None = None) -> np.ndarray:
    """``B_ij = exp(-|v_i - w_j|^2 / 2)``, the envelope transform at block differences."""
    v, w = as_blocks(v, n, d), as_blocks(w, n, d)
    if v.shape != w.shape:
        raise ValueError("v and w must have the same shape")
    diff = v[..., :, None, :] - w[..., None, :, :]
    return np.exp(-0.5 * np.sum(diff * diff, axis=-1))


def kernel(v: np.ndarray, w: np.ndarray, n: int | None = None, d: int | None = None) -> KernelEval:
    """``D(v, w) = det B``."""
    sign, logdet = np.linalg.slogdet(overlap_matrix(v, w, n, d))
    value = float(sign * np.exp(logdet))
    return KernelEval(value=value, abs_bound_ok=abs(value) <= 1.0 + 1e-12)


def kernel_exponential_form(v: np.ndarray, w: np.ndarray, n: int | None = None, d: int | None = None) -> float:
    """Same kernel as ``exp(-(|v|^2 + |w|^2)/2) det(exp(v_i . w_j))``, evaluated in the log domain."""
    v, w = as_blocks(v, n, d), as_blocks(w, n, d)
    sign, logdet = np.linalg.slogdet(np.exp(v @ w.T))
    return float(sign * np.exp(logdet - 0.5 * (np.sum(v * v) + np.sum(w * w))))


def gram_matrix(vs: np.ndarray) -> np.ndarray:
    """``(D(v_r, v_s))_rs`` for a stack of weight arrays of shape ``(R, n, d)``."""
    vs = np.asarray(vs, dtype=float)
    R = vs.shape[0]
    out = np.empty((R, R))
    for r in range(R):
        diff = vs[r][None, :, None, :] - vs[:, None, :, :]
        sign, logdet = np.linalg.slogdet(np.exp(-0.5 * np.sum(diff * diff, axis=-1)))
        out[r] = sign * np.exp(logdet)
    return out


# --- kernel along one direction ----------------------------------------------------------------


def _pair_sq_distances(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    minus = np.sum((blocks[:, None, :] - blocks[None, :, :]) ** 2, axis=-1)
    plus = np.sum((blocks[:, None, :] + blocks[None, :, :]) ** 2, axis=-1)
    return minus, plus


def product_kernel(w: np.ndarray, s, n: int | None = None, d: int | None = None) -> np.ndarray:
    """``Psi(s)`` for real ``s`` (array allowed): the kernel's dependence on ``theta theta'``."""
    blocks = as_blocks(w, n, d)
    minus, plus = _pair_sq_distances(blocks)
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    dist = np.where(flat[:, None, None] >= 0, minus[None], plus[None])
    with np.errstate(divide="ignore"):
        sign, logdet = np.linalg.slogdet(np.exp(-0.5 * np.abs(flat)[:, None, None] * dist))
    return _signed_exp_det(logdet, sign).reshape(s.shape)


def kernel_2d(w: np.ndarray, theta, theta_t, n: int | None = None, d: int | None = None):
    """``D_w(theta, theta') = D(theta w, theta' w)``; broadcasts over array arguments."""
    blocks = as_blocks(w, n, d)
    theta, theta_t = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(theta_t, dtype=float))
    norm_sq = float(np.sum(blocks * blocks))
    ridge = np.exp(-0.5 * norm_sq * (np.abs(theta) - np.abs(theta_t)) ** 2)
    out = ridge * product_kernel(blocks, theta * theta_t)
    return float(out) if out.ndim == 0 else out


def kernel_2d_exponential_form(w: np.ndarray, theta: float, theta_t: float, n: int | None = None, d: int | None = None) -> float:
    """``exp(-(theta^2 + theta'^2)|w|^2/2) det(exp(theta theta' w_i . w_j))`` in the log domain."""
    blocks = as_blocks(w, n, d)
    sign, logdet = np.linalg.slogdet(np.exp(theta * theta_t * (blocks @ blocks.T)))
    return float(sign * np.exp(logdet - 0.5 * (theta**2 + theta_t**2) * np.sum(blocks * blocks)))


def kernel_grad_bound(w: np.ndarray, n: int | None = None, d: int | None = None) -> float:
    """Lipschitz constant ``n^(3/2) |w| / sqrt(e)`` of ``D_w`` in each argument."""
    blocks = as_blocks(w, n, d)
    n = blocks.shape[0]
    return n**1.5 * math.sqrt(float(np.sum(blocks * blocks))) / math.sqrt(math.e)


# --- norm as a double integral in frequency -----------------------------------------------------


@dataclass(frozen=True)
class DoubleIntegralConfig:
    """Quadrature layout for :func:`norm_sq_via_double_integral`.

    The integral runs over ``theta_min <= |theta|, |theta'| <= theta_max``. It
    is computed in the coordinates ``theta = g e^lam``, ``theta' = g e^-lam``,
    in which the kernel is ``Psi(+-g^2)`` times a Gaussian in ``sinh(lam)``:
    Gauss-Legendre panels spaced logarithmically in ``g`` and uniformly in
    ``lam``, with the ``lam`` range cut where the Gaussian drops below
    ``exp(-ridge_cut)``. ``theta_max = None`` picks the point where the
    activation's frequency tail falls below ``tail_tol``.
    """

    theta_min: float = 1e-7
    theta_max: float | None = None
    g_panels_per_decade: int = 3
    g_order: int = 16
    lambda_panels: int = 4
    lambda_order: int = 24
    ridge_cut: float = 40.0
    tail_tol: float = 1e-12
    imag_tol: float = 1e-8


@lru_cache(maxsize=64)
def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def _default_theta_max(spec: ActivationSpec, tol: float) -> float:
    if not math.isfinite(spec.tail_decay_K):
        hi = 1.0
        while tail_sum(spec, hi) > tol and hi < 1e6:
            hi *= 2
        return max(hi, 10.0)
    # tail_sum ~ C t^-K: solve from the value at 1
    scale = tail_sum(spec, 1.0)
    return max(10.0, (scale / tol) ** (1.0 / spec.tail_decay_K))


def _log_panels(lo: float, hi: float, per_decade: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    count = max(1, math.ceil(math.log10(hi / lo) * per_decade))
    edges = np.geomspace(lo, hi, count + 1)
    x, wq = _gl(order)
    a, b = edges[:-1, None], edges[1:, None]
    return ((a + b) / 2 + (b - a) / 2 * x).ravel(), ((b - a) / 2 * wq).ravel()


def _frequency_integral(
    blocks: np.ndarray,
    spec: ActivationSpec,
    cfg: DoubleIntegralConfig,
    theta_min: float,
    theta_max: float,
    mode: str,
) -> complex:
    """``(1/2 pi) sum over the four sign quadrants of the double integral``.

    ``mode="antisym"`` uses the overlap kernel; ``mode="plain"`` uses the
    kernel of the un-antisymmetrized neuron, ``exp(-|w|^2 (theta - theta')^2 / 2)``.
    """
    norm_sq = float(np.sum(blocks * blocks))
    if norm_sq == 0.0:
        return 0.0j
    g, wg = _log_panels(theta_min, theta_max, cfg.g_panels_per_decade, cfg.g_order)
    # half-width of the lambda window for each g
    ridge = np.arcsinh(np.sqrt(cfg.ridge_cut / (2 * norm_sq * g**2)))
    half = np.minimum(ridge, np.minimum(np.log(g / theta_min), np.log(theta_max / g)))
    keep = half > 0
    g, wg, half = g[keep], wg[keep], half[keep]

    x, wq = _gl(cfg.lambda_order)
    edges = np.linspace(-1.0, 1.0, cfg.lambda_panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    u = ((a + b) / 2 + (b - a) / 2 * x).ravel()
    wu = ((b - a) / 2 * wq).ravel()
    lam = half[:, None] * u[None, :]
    wl = half[:, None] * wu[None, :]

    th = g[:, None] * np.exp(lam)
    th_t = g[:, None] * np.exp(-lam)
    same = np.exp(-2.0 * norm_sq * (g[:, None] * np.sinh(lam)) ** 2)
    F_pos, F_neg = ft_density(spec, th), ft_density(spec, -th)
    Ft_pos, Ft_neg = ft_density(spec, th_t), ft_density(spec, -th_t)

    if mode == "antisym":
        psi_same = product_kernel(blocks, g**2)
        psi_opp = product_kernel(blocks, -(g**2))
        opp = same
    elif mode == "plain":
        psi_same = np.ones_like(g)
        psi_opp = np.ones_like(g)
        opp = np.exp(-2.0 * norm_sq * (g[:, None] * np.cosh(lam)) ** 2)
    else:
        raise ValueError(mode)

    same_sign = np.sum((np.conj(F_pos) * Ft_pos + np.conj(F_neg) * Ft_neg) * same * wl, axis=1)
    opp_sign = np.sum((np.conj(F_pos) * Ft_neg + np.conj(F_neg) * Ft_pos) * opp * wl, axis=1)
    terms = wg * 2 * g * (psi_same * same_sign + psi_opp * opp_sign)
    total = np.sum(terms) / (2 * math.pi)
    scale = np.sum(np.abs(terms)) / (2 * math.pi)
    if abs(total.imag) > cfg.imag_tol * max(scale, np.finfo(float).tiny):
        raise QuadratureError(
            f"imaginary residue {total.imag:.3e} exceeds tolerance relative to {scale:.3e}; refine the grid"
        )
    return complex(total)


def norm_sq_via_double_integral(
    w: np.ndarray,
    spec: ActivationSpec,
    grid: DoubleIntegralConfig | None = None,
    n: int | None = None,
    d: int | None = None,
) -> float:
    """Squared norm of the antisymmetrized neuron ``x -> tau(w . x)`` from its Fourier representation.

    ``(1/2 pi) double integral of conj(F(theta)) F(theta') D_w(theta, theta')``.
    Requires ``n >= spec.min_particles``; below that the singular part of the
    transform at zero carries a polynomial that does not cancel.
    """
    cfg = grid or DoubleIntegralConfig()
    blocks = as_blocks(w, n, d)
    if blocks.ndim != 2:
        raise ValueError("w must be a single weight vector")
    n = blocks.shape[0]
    if not spec.has_closed_form_ft:
        raise ValueError(f"{spec.kind} has no Fourier density; use the closed form instead")
    if n < spec.min_particles:
        raise ValueError(f"the frequency integral for {spec.kind} requires n >= {spec.min_particles}, got n={n}")
    theta_max = cfg.theta_max if cfg.theta_max is not None else _default_theta_max(spec, cfg.tail_tol)
    return _frequency_integral(blocks, spec, cfg, cfg.theta_min, theta_max, "antisym").real


@dataclass(frozen=True)
class HighPassCheck:
    lhs: float
    rhs: float
    error_bound: float


def highpass_isometry_check(
    w: np.ndarray,
    spec: ActivationSpec,
    T: float,
    n: int | None = None,
    d: int | None = None,
    grid: DoubleIntegralConfig | None = None,
) -> HighPassCheck:
    """Compare ``|A h|^2`` with ``|h|^2`` for the high-pass ``h`` of a neuron at threshold ``T``.

    ``lhs`` integrates the overlap kernel over ``|theta|, |theta'| >= T``;
    ``rhs`` integrates the plain kernel over the same region. The bound is
    ``(4/pi) sup_{|theta|>=T} |F|^2 n! exp(-delta^2 T^2 / 2) / delta^2`` with
    ``delta`` the pair separation of ``w``, zero when ``n = 1``.
    """
    if not T > 1:
        raise ValueError("T must exceed 1")
    if not spec.is_rough:
        raise ValueError("the high-pass comparison is stated for rough activations")
    cfg = grid or DoubleIntegralConfig()
    blocks = as_blocks(w, n, d)
    n = blocks.shape[0]
    theta_max = cfg.theta_max if cfg.theta_max is not None else max(_default_theta_max(spec, cfg.tail_tol), 100 * T)
    lhs = _frequency_integral(blocks, spec, cfg, T, theta_max, "antisym").real
    rhs = _frequency_integral(blocks, spec, cfg, T, theta_max, "plain").real
    delta = float(pair_separation(blocks))
    if not math.isfinite(delta):
        bound = 0.0
    elif delta == 0:
        bound = math.inf
    else:
        probe = np.geomspace(T, 100 * T, 400)
        sup_f = float(np.max(np.abs(ft_density(spec, probe)) ** 2))
        log_bound = math.log(4 / math.pi * sup_f) + math.lgamma(n + 1) - 0.5 * delta**2 * T**2 - 2 * math.log(delta)
        bound = math.exp(log_bound)
    return HighPassCheck(lhs=lhs, rhs=rhs, error_bound=bound)


# --- determinant bounds at low frequency ---------------------------------------------------------


def admissible_p(n: int, d: int) -> int | None:
    """Smallest integer p with ``C(p+d-1, d) <= n/2`` and ``p! >= 4 n^2``, or None."""
    p = 0
    while math.comb(p + d - 1, d) <= n / 2:
        if math.factorial(p) >= 4 * n * n:
            return p
        p += 1
    return None


def _log_abs_det_mp(M: np.ndarray) -> float:
    """``log|det(exp(M))|`` in extended precision, refined until two precisions agree."""
    digits = 40
    prev = None
    while True:
        with mpmath.workdps(digits):
            A = mpmath.matrix([[mpmath.exp(mpmath.mpf(float(v))) for v in row] for row in M])
            det = mpmath.det(A)
            cur = float(mpmath.log(abs(det))) if det != 0 else -math.inf
        if prev is not None and (cur == prev or abs(cur - prev) <= 1e-10 * max(1.0, abs(cur))):
            return cur
        if digits >= 4000:
            return cur
        prev = cur
        digits *= 2


@dataclass(frozen=True)
class DetBoundResult:
    """``lhs = |det(exp(v_i . w_j))|``, ``rhs = (nu/2)^(p n)``; ``ok`` is None when no p is admissible."""

    lhs: float
    rhs: float
    ok: bool | None
    p: int | None
    nu: float
    log_lhs: float
    log_rhs: float

    @property
    def applicable(self) -> bool:
        return self.p is not None


def detbound_check(
    v: np.ndarray, w: np.ndarray, p: int | None = None, n: int | None = None, d: int | None = None
) -> DetBoundResult:
    """Check ``|det(exp(v_i . w_j))| <= (nu/2)^(p n)`` with ``nu = 2 sqrt(d |v|_inf |w|_inf)``.

    The determinant is evaluated in extended precision since it sits many
    orders of magnitude below its entries. Raises ``ValueError`` if ``nu > 1``
    or if an explicit ``p`` violates the admissibility conditions.
    """
    v, w = as_blocks(v, n, d), as_blocks(w, n, d)
    if v.shape != w.shape or v.ndim != 2:
        raise ValueError("v and w must be single weight vectors of the same shape")
    n, d = v.shape
    nu = 2 * math.sqrt(d * float(np.max(np.abs(v))) * float(np.max(np.abs(w))))
    if nu > 1:
        raise ValueError(f"precondition nu <= 1 violated (nu = {nu:.4f})")
    if p is None:
        p = admissible_p(n, d)
    elif not (math.comb(p + d - 1, d) <= n / 2 and math.factorial(p) >= 4 * n * n):
        raise ValueError(f"p = {p} is not admissible for n = {n}, d = {d}")
    log_lhs = _log_abs_det_mp(v @ w.T)
    lhs = math.exp(log_lhs) if log_lhs > -745 else 0.0
    if p is None:
        return DetBoundResult(lhs, math.nan, None, None, nu, log_lhs, math.nan)
    log_rhs = p * n * math.log(nu / 2) if nu > 0 else -math.inf
    rhs = math.exp(log_rhs) if log_rhs > -745 else 0.0
    return DetBoundResult(lhs, rhs, bool(log_lhs <= log_rhs), p, nu, log_lhs, log_rhs)


@dataclass(frozen=True)
class EigBoundResult:
    singular_value: float
    bound: float
    ok: bool
    index: int


def eigbound_check(v: np.ndarray, w: np.ndarray, p: int, n: int | None = None, d: int | None = None) -> EigBoundResult:
    """Check that singular value number ``L = C(p+d-1, d)`` (counting from 0) of ``exp(v_i . w_j)``
    is at most ``(2n/p!) mu^p`` with ``mu = d |v|_inf |w|_inf <= 1/2``."""
    v, w = as_blocks(v, n, d), as_blocks(w, n, d)
    n, d = v.shape
    mu = d * float(np.max(np.abs(v))) * float(np.max(np.abs(w)))
    if mu > 0.5:
        raise ValueError(f"precondition mu <= 1/2 violated (mu = {mu:.4f})")
    L = math.comb(p + d - 1, d)
    if L >= n:
        raise ValueError(f"index L = {L} must be below n = {n}")
    bound = 2 * n / math.factorial(p) * mu**p
    M = v @ w.T
    with mpmath.workdps(60 + 2 * n * max(p, 1)):
        A = mpmath.matrix([[mpmath.exp(mpmath.mpf(float(x))) for x in row] for row in M])
        sv = sorted((abs(s) for s in mpmath.svd_r(A, compute_uv=False)), reverse=True)
        value = float(sv[L])
    return EigBoundResult(value, bound, value <= bound, L)
