"""Activation functions and their Fourier-side data.

Fourier transforms use the unitary convention
``F[tau](theta) = (2 pi)^(-1/2) * integral tau(y) exp(-i theta y) dy``. Only the
absolutely continuous part of each transform is represented. Distributional
pieces supported at ``theta = 0`` (the ``delta'`` of ReLU, the ``delta`` of the
Heaviside step) correspond to polynomials of low degree, which vanish under
antisymmetrization once there are enough particles; see
:attr:`ActivationSpec.min_particles`.

Every spec carries an input ``scale`` ``r``: the activation it describes is
``y -> tau(r * y)``, whose transform is ``theta -> F[tau](theta / r) / r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import integrate
from scipy.special import sici

KINDS = ("relu", "tanh", "heaviside", "exp", "drelu")

#: Upper frequency used when a high/low-pass has to be computed by quadrature.
THETA_MAX = 200.0

_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class ActivationSpec:
    """Immutable description of an activation ``y -> tau(scale * y)``.

    ``kappa`` is the output factor of the clamped ("double") ReLU and is
    ignored by the other kinds.
    """

    kind: str
    kappa: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown activation {self.kind!r}; expected one of {KINDS}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    @property
    def name(self) -> str:
        return self.kind

    @property
    def tail_decay_K(self) -> float:
        """Exponent K in ``tail_sum(t) = O(t^-K)``; infinite for smooth activations."""
        return {"relu": 3.0, "drelu": 3.0, "heaviside": 1.0}.get(self.kind, math.inf)

    @property
    def is_rough(self) -> bool:
        return math.isfinite(self.tail_decay_K)

    @property
    def has_closed_form_ft(self) -> bool:
        return self.kind != "exp"

    @property
    def polynomial_degree(self) -> int | None:
        """Degree of the polynomial hidden in the singular part of the transform, if any."""
        return {"relu": 1, "heaviside": 0}.get(self.kind)

    @property
    def min_particles(self) -> int:
        """Smallest n for which the Fourier-side norm formula is absolutely convergent.

        The density has a pole at zero that the overlap kernel only cancels for
        n >= 2, and a hidden polynomial of degree k only disappears for n >= k + 2.
        """
        deg = self.polynomial_degree
        return max(2, deg + 2) if deg is not None else 2

    def rescaled(self, r: float) -> ActivationSpec:
        """Spec for ``y -> tau(r * y)`` on top of the current scale."""
        return replace(self, scale=self.scale * r)

    def __call__(self, y):
        return evaluate(self, y)


def get_activation(name: str, kappa: float | None = None) -> ActivationSpec:
    """Spec by CLI name. ``drelu`` defaults to the variance-matched ``kappa``."""
    name = name.strip().lower()
    if name == "drelu":
        return ActivationSpec("drelu", kappa=normalize_drelu() if kappa is None else kappa)
    return ActivationSpec(name)


def evaluate(spec: ActivationSpec, y):
    """Pointwise value of the activation."""
    y = np.asarray(y, dtype=float) * spec.scale
    kind = spec.kind
    if kind == "relu":
        out = np.maximum(y, 0.0)
    elif kind == "tanh":
        out = np.tanh(y)
    elif kind == "heaviside":
        out = (y > 0).astype(float)
    elif kind == "drelu":
        out = spec.kappa * np.clip(y, -1.0, 1.0)
    else:
        with np.errstate(over="raise"):
            try:
                out = np.exp(y)
            except FloatingPointError as exc:
                raise OverflowError("exp activation overflows double precision") from exc
    return float(out) if out.ndim == 0 else out


def _csch(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return np.sign(x) * 2.0 * np.exp(-ax) / -np.expm1(-2.0 * ax)


def _ft_unscaled(kind: str, kappa: float, theta: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return (-1.0 / (_SQRT_2PI * theta**2)).astype(complex)
    if kind == "tanh":
        return -1j * math.sqrt(math.pi / 2) * _csch(math.pi * theta / 2)
    if kind == "heaviside":
        return 1.0 / (1j * _SQRT_2PI * theta)
    if kind == "drelu":
        return -1j * kappa * math.sqrt(2 / math.pi) * np.sin(theta) / theta**2
    raise ValueError("exp has no tempered Fourier transform density")


def ft_density(spec: ActivationSpec, theta):
    """Absolutely continuous part of the Fourier transform at nonzero ``theta``."""
    if spec.kind == "exp":
        raise ValueError("exp has no tempered Fourier transform density")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta == 0):
        raise ValueError("the density is only defined away from theta = 0")
    r = spec.scale
    out = np.asarray(_ft_unscaled(spec.kind, spec.kappa, theta / r) / r)
    return complex(out) if out.ndim == 0 else out


def _antiderivative(kind: str, kappa: float, theta: np.ndarray) -> np.ndarray:
    """A primitive of the unscaled density on theta > 0."""
    if kind == "relu":
        return (1.0 / (_SQRT_2PI * theta)).astype(complex)
    if kind == "tanh":
        q = np.exp(-math.pi * theta / 2)
        log_tanh = np.log1p(-q) - np.log1p(q)
        return -1j * math.sqrt(2 / math.pi) * log_tanh
    if kind == "heaviside":
        return -1j * np.log(theta) / _SQRT_2PI
    if kind == "drelu":
        _, ci = sici(theta)
        return -1j * kappa * math.sqrt(2 / math.pi) * (ci - np.sin(theta) / theta)
    raise ValueError("exp has no tempered Fourier transform density")


def ft_integral(spec: ActivationSpec, lo, hi):
    """Exact integral of the density over ``[lo, hi]`` (both ends of one sign, not 0)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo * hi <= 0) or np.any(hi < lo):
        raise ValueError("panels must satisfy lo < hi with both ends on the same side of 0")
    r = spec.scale
    negative = hi < 0
    a = np.where(negative, -hi, lo) / r
    b = np.where(negative, -lo, hi) / r
    val = _antiderivative(spec.kind, spec.kappa, b) - _antiderivative(spec.kind, spec.kappa, a)
    # real activations: density on the negative axis is the conjugate mirror image
    out = np.asarray(np.where(negative, np.conj(val), val))
    return complex(out) if out.ndim == 0 else out


def _tail_unscaled(spec: ActivationSpec, t: float) -> float:
    kind = spec.kind
    if kind == "relu":
        return 1.0 / (3 * math.pi * t**3)
    if kind == "tanh":
        return 4.0 / math.expm1(math.pi * t) if math.pi * t < 700 else 0.0
    if kind == "heaviside":
        return 1.0 / (math.pi * t)
    if kind == "drelu":
        # sin^2 = (1 - cos 2 theta) / 2; the cosine part is a Fourier integral
        cos_part, _ = integrate.quad(
            lambda s: s**-4.0, t, np.inf, weight="cos", wvar=2.0, epsabs=1e-13 / t**3, limlst=200
        )
        one_sided = 1.0 / (6 * t**3) - 0.5 * cos_part
        return 4.0 * spec.kappa**2 / math.pi * one_sided
    raise ValueError("exp has no tempered Fourier transform density")


def tail_sum(spec: ActivationSpec, t: float) -> float:
    """Frequency tail ``integral over |theta| >= t`` of ``|F[tau](theta)|^2``."""
    if not t > 0:
        raise ValueError("t must be positive")
    r = spec.scale
    return _tail_unscaled(spec, t / r) / r


def _relu_hp(t: float, y: np.ndarray) -> np.ndarray:
    si, _ = sici(t * y)
    return np.abs(y) / 2 - np.cos(t * y) / (math.pi * t) - y * si / math.pi


def _relu_lp(t: float, y: np.ndarray) -> np.ndarray:
    si, _ = sici(t * y)
    return y / 2 + np.cos(t * y) / (math.pi * t) + y * si / math.pi


def _tanh_band(lo: float, hi: float, y: float) -> float:
    """``integral_lo^hi sin(theta y) / sinh(pi theta / 2) dtheta``."""
    if y == 0 or hi <= lo:
        return 0.0

    def integrand(s: float) -> float:
        if s == 0.0:
            return 2.0 * y / math.pi
        return math.sin(s * y) * float(_csch(np.array(math.pi * s / 2)))

    val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)
    return val


def high_pass_eval(spec: ActivationSpec, t: float, y):
    """High-pass part: inverse transform restricted to ``|theta| >= t``.

    Closed forms for ReLU, the Heaviside step and the clamped ReLU (the latter
    via ``clamp(y) = relu(y + 1) - relu(y - 1) - 1``). For tanh the band
    ``[t, THETA_MAX]`` is integrated numerically; the neglected part is below
    ``exp(-pi * THETA_MAX / 2)``. Real activations give real values.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    r = spec.scale
    ts = t / r
    yy = np.asarray(y, dtype=float) * r
    kind = spec.kind
    if kind == "relu":
        out = _relu_hp(ts, yy)
    elif kind == "heaviside":
        si, _ = sici(ts * yy)
        out = np.sign(yy) / 2 - si / math.pi
    elif kind == "drelu":
        out = spec.kappa * (_relu_hp(ts, yy + 1) - _relu_hp(ts, yy - 1))
    elif kind == "tanh":
        out = np.vectorize(lambda v: _tanh_band(ts, max(THETA_MAX, ts), v))(yy)
    else:
        raise ValueError("exp has no tempered Fourier transform density")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def low_pass_eval(spec: ActivationSpec, t: float, y):
    """Low-pass part ``tau - high_pass``, each kind evaluated from its own formula.

    At a jump (Heaviside at ``y = 0``) Fourier inversion gives the midpoint
    value, so ``high + low`` there is 1/2 rather than the activation value.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    r = spec.scale
    ts = t / r
    yy = np.asarray(y, dtype=float) * r
    kind = spec.kind
    if kind == "relu":
        out = _relu_lp(ts, yy)
    elif kind == "heaviside":
        si, _ = sici(ts * yy)
        out = 0.5 + si / math.pi
    elif kind == "drelu":
        out = spec.kappa * (_relu_lp(ts, yy + 1) - _relu_lp(ts, yy - 1) - 1.0)
    elif kind == "tanh":
        out = np.vectorize(lambda v: _tanh_band(0.0, ts, v))(yy)
    else:
        raise ValueError("exp has no tempered Fourier transform density")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def clamp_second_moment() -> float:
    """``E[clamp(Z)^2]`` for standard normal Z, equal to ``1 - 2 phi(1)``."""
    return 1.0 - 2.0 * math.exp(-0.5) / _SQRT_2PI


@lru_cache(maxsize=None)
def tanh_second_moment(nodes: int = 200) -> float:
    """``E[tanh(Z)^2]`` by Gauss-Hermite quadrature (probabilists' weight)."""
    x, w = hermegauss(nodes)
    return float(np.sum(w * np.tanh(x) ** 2) / _SQRT_2PI)


@lru_cache(maxsize=None)
def normalize_drelu() -> float:
    """Output factor kappa that gives the clamped ReLU the second moment of tanh under N(0, 1)."""
    return math.sqrt(tanh_second_moment() / clamp_second_moment())
