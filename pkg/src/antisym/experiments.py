"""Experiment drivers: norm decay with n, fast-evaluator convergence, depth, kernel heatmap.

Every driver maps an :class:`ExperimentConfig` to a list of :class:`ResultRow`
in a fixed order. Random streams are keyed by ``(master_seed, experiment, n,
draw)`` so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from antisym.activations import ActivationSpec, evaluate, get_activation, normalize_drelu
from antisym.envelope import make_rng, sample_envelope
from antisym.fast import evaluate_neuron, plan
from antisym.kernel import kernel_2d, norm_sq_via_double_integral
from antisym.network import init_deep_network, init_network
from antisym.oracle import Z90, antisymmetrize_neurons, antisymmetrize_units, exp_norm_closed_form
from antisym.permutations import ENUMERATION_CAP, CapacityError

log = logging.getLogger(__name__)

EXPERIMENTS = ("fig1", "approx_error", "depth", "kernel_diag")
METHODS = ("brute_mc", "eiint", "closed_form", "fast_approx")
CSV_HEADER = (
    "experiment", "n", "d", "depth", "activation", "method",
    "estimate", "ci90_low", "ci90_high", "samples", "seeds", "wall_ms",
)
THREADS_ENV = "ANTISYM_THREADS"

# Stream labels for make_rng, one per experiment.
_STREAM = {"fig1": 1, "approx_error": 2, "depth": 3, "kernel_diag": 4}

_COMMON: dict = dict(
    m_rule="nd", T_values=[100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0], N_fixed=10_000,
    depths=[3, 4, 5], grid_size=41,
)

_DEFAULTS: dict[str, dict] = {
    "fig1": dict(
        n_range=(1, 12), activations=["exp", "tanh", "relu", "heaviside"], samples=10_000, seeds=20, c_init=1.0,
        per_n={7: {"samples": 2000}, 8: {"samples": 300}},
    ),
    "approx_error": dict(n_range=(8, 8), activations=["relu"], samples=100, seeds=1, c_init=2.0),
    "depth": dict(
        n_range=(4, 10), activations=["tanh", "drelu"], samples=20, seeds=20, m_rule="3n", c_init=1.0,
        per_n={8: {"samples": 10, "seeds": 10}, 9: {"samples": 4, "seeds": 6}, 10: {"samples": 2, "seeds": 4}},
    ),
    "kernel_diag": dict(n_range=(2, 2), activations=[], samples=0, seeds=1000, c_init=2.0),
}

_QUICK: dict[str, dict] = {
    "fig1": dict(n_range=(1, 7), samples=300, seeds=4, per_n={7: {"samples": 40}}),
    "approx_error": dict(n_range=(6, 6), samples=30, T_values=[50.0, 100.0, 200.0, 400.0], N_fixed=2000),
    "depth": dict(n_range=(4, 7), samples=6, seeds=4, per_n={7: {"samples": 2, "seeds": 3}}),
    "kernel_diag": dict(seeds=100, grid_size=21),
}


@dataclass
class ExperimentConfig:
    """Settings for one experiment run. JSON config files use these field names.

    ``m_rule`` is ``"nd"``, ``"3n"`` or ``"fixed:<m>"``. ``per_n`` overrides
    ``samples`` and ``seeds`` for particular ``n`` (brute force grows like
    ``n!``). Fields left as ``None`` take per-experiment defaults.
    """

    experiment: str
    n_range: tuple[int, int] | None = None
    d: int = 3
    m_rule: str | None = None
    activations: list[str] | None = None
    samples: int | None = None
    seeds: int | None = None
    out_path: str | None = None
    threads: int = 1
    quick: bool = False
    master_seed: int = 0
    c_init: float | None = None
    per_n: dict[int, dict] | None = None
    brute_n_max: int = 8
    analytic_n_min: int = 2
    record_timing: bool = True
    # approx_error
    T_values: list[float] | None = None
    N_fixed: int | None = None
    t: float = 0.1
    scheme: str = "gauss_legendre"
    # depth
    depths: list[int] | None = None
    # kernel_diag
    grid_max: float = 4.0
    grid_size: int | None = None
    plot_spec: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        defaults = {**_COMMON, **_DEFAULTS[self.experiment], **(_QUICK[self.experiment] if self.quick else {})}
        for key, value in defaults.items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        self.T_values = [float(T) for T in self.T_values]
        self.depths = [int(L) for L in self.depths]
        self.n_range = (int(self.n_range[0]), int(self.n_range[1]))
        self.per_n = {int(k): dict(v) for k, v in (self.per_n or {}).items()}
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid n_range {self.n_range}")
        if self.experiment in ("approx_error", "depth") and hi > ENUMERATION_CAP:
            raise CapacityError(f"{self.experiment} needs the brute-force oracle, capped at n = {ENUMERATION_CAP}")
        if self.brute_n_max > ENUMERATION_CAP:
            raise CapacityError(f"brute_n_max cannot exceed {ENUMERATION_CAP}")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        m_for(self.m_rule, 1, self.d)  # validate

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> ExperimentConfig:
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def ns(self) -> range:
        return range(self.n_range[0], self.n_range[1] + 1)

    def samples_for(self, n: int) -> int:
        return int(self.per_n.get(n, {}).get("samples", self.samples))

    def seeds_for(self, n: int) -> int:
        return int(self.per_n.get(n, {}).get("seeds", self.seeds))

    def worker_count(self) -> int:
        env = os.environ.get(THREADS_ENV)
        return max(1, int(env)) if env else self.threads


def m_for(rule: str, n: int, d: int) -> int:
    """Hidden width under ``rule``."""
    if rule == "nd":
        return n * d
    if rule == "3n":
        return 3 * n
    if rule.startswith("fixed:"):
        m = int(rule.split(":", 1)[1])
        if m < 1:
            raise ValueError("fixed width must be positive")
        return m
    raise ValueError(f"unknown m_rule {rule!r}")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    n: int
    d: int
    depth: int
    activation: str
    method: str
    estimate: float
    ci90_low: float
    ci90_high: float
    samples: int
    seeds: int
    wall_ms: int = 0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        finite = all(math.isfinite(v) for v in (self.estimate, self.ci90_low, self.ci90_high))
        if finite and not self.ci90_low <= self.estimate <= self.ci90_high:
            raise ValueError(f"interval [{self.ci90_low}, {self.ci90_high}] does not contain {self.estimate}")

    def csv_fields(self) -> list[str]:
        return [
            self.experiment, str(self.n), str(self.d), str(self.depth), self.activation, self.method,
            repr(float(self.estimate)), repr(float(self.ci90_low)), repr(float(self.ci90_high)),
            str(self.samples), str(self.seeds), str(int(self.wall_ms)),
        ]


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def write_csv(rows: Iterable[ResultRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="utf-8", newline="")


def read_csv(path_or_text: str | Path) -> list[dict]:
    text = Path(path_or_text).read_text(encoding="utf-8") if Path(str(path_or_text)).exists() else str(path_or_text)
    return list(csv.DictReader(io.StringIO(text)))


def _interval(values: Sequence[float]) -> tuple[float, float, float]:
    """Mean and normal-theory 90% interval over independent draws."""
    vals = np.asarray(values, dtype=float)
    mean = float(vals.mean())
    if vals.size < 2:
        return mean, mean, mean
    half = Z90 * float(vals.std(ddof=1)) / math.sqrt(vals.size)
    return mean, mean - half, mean + half


def _run_tasks(tasks: Sequence[Callable[[], object]], workers: int) -> list:
    """Run thunks on a pool and return results in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), tasks))


def _ms(seconds: float, cfg: ExperimentConfig) -> int:
    return int(round(seconds * 1000)) if cfg.record_timing else 0


# --- norm decay in n ----------------------------------------------------------------------------


def _neuron_norms(blocks: np.ndarray, spec: ActivationSpec) -> np.ndarray:
    if spec.kind == "exp":
        return np.array([exp_norm_closed_form(wb) for wb in blocks])
    return np.array([norm_sq_via_double_integral(wb, spec) for wb in blocks])


def _fig1_draw(cfg: ExperimentConfig, n: int, draw: int, specs: list[ActivationSpec]) -> dict:
    """Per-draw ``(c/m) sum_k |A tau_k|^2`` for every activation and method."""
    m = m_for(cfg.m_rule, n, cfg.d)
    params = init_network(n, cfg.d, m, cfg.c_init, seed=make_rng(cfg.master_seed, _STREAM["fig1"], n, draw))
    blocks = params.blocks()
    out: dict[tuple[str, str], tuple[float, float]] = {}

    if n <= cfg.brute_n_max:
        X = sample_envelope(n, cfg.d, cfg.samples_for(n), make_rng(cfg.master_seed, _STREAM["fig1"], n, draw, 1))
        start = time.perf_counter()
        try:
            fn = lambda z: np.concatenate([evaluate(s, z) for s in specs], axis=-1)  # noqa: E731
            A = antisymmetrize_units(blocks, X, fn, out_width=m * len(specs))
            columns = {s.name: A[:, i * m : (i + 1) * m] for i, s in enumerate(specs)}
        except OverflowError:
            columns = {}
            for s in specs:
                try:
                    columns[s.name] = antisymmetrize_neurons(s, blocks, X)
                except OverflowError as exc:
                    log.warning("n=%d draw=%d %s: %s", n, draw, s.name, exc)
                    columns[s.name] = None
        share = (time.perf_counter() - start) / len(specs)
        for s in specs:
            A = columns[s.name]
            value = math.nan if A is None else cfg.c_init / m * float(np.sum(np.mean(A**2, axis=0)))
            out[(s.name, "brute_mc")] = (value, share)

    if n >= cfg.analytic_n_min:
        for s in specs:
            if s.kind != "exp" and n < s.min_particles:
                continue
            start = time.perf_counter()
            try:
                value = cfg.c_init / m * float(np.sum(_neuron_norms(blocks, s)))
            except (ArithmeticError, ValueError) as exc:
                log.warning("n=%d draw=%d %s analytic: %s", n, draw, s.name, exc)
                value = math.nan
            method = "closed_form" if s.kind == "exp" else "eiint"
            out[(s.name, method)] = (value, time.perf_counter() - start)
    return out


def run_fig1(cfg: ExperimentConfig) -> list[ResultRow]:
    """Expected squared norm of the antisymmetrized two-layer network versus ``n``.

    The average over output weights is done exactly, ``E_a |A f|^2 = (c/m)
    sum_k |A tau_k|^2``, so each weight draw contributes one number per
    activation and method. Brute-force Monte Carlo covers ``n <= brute_n_max``;
    the Fourier double integral (closed form for exp) covers
    ``n >= analytic_n_min``. Intervals are over weight draws.
    """
    specs = [get_activation(a) for a in cfg.activations]
    keys = [(n, draw) for n in cfg.ns() for draw in range(cfg.seeds_for(n))]
    results = _run_tasks([lambda n=n, k=k: _fig1_draw(cfg, n, k, specs) for n, k in keys], cfg.worker_count())
    by_n: dict[int, list[dict]] = {}
    for (n, _), res in zip(keys, results):
        by_n.setdefault(n, []).append(res)

    rows = []
    for n in cfg.ns():
        draws = by_n[n]
        for s in specs:
            for method in ("brute_mc", "eiint", "closed_form"):
                vals = [r[(s.name, method)] for r in draws if (s.name, method) in r]
                if not vals:
                    continue
                est = [v for v, _ in vals]
                mean, lo, hi = _interval(est) if all(math.isfinite(v) for v in est) else (math.nan,) * 3
                rows.append(ResultRow(
                    "fig1", n, cfg.d, 2, s.name, method, mean, lo, hi,
                    cfg.samples_for(n) if method == "brute_mc" else 0, len(vals),
                    _ms(sum(t for _, t in vals), cfg),
                ))
    return rows


# --- fast evaluator error versus the ultraviolet cutoff ------------------------------------------


def _ratio_interval(num: np.ndarray, den: np.ndarray) -> tuple[float, float, float]:
    """``sum(num)/sum(den)`` with a delta-method 90% interval."""
    ratio = float(num.sum() / den.sum())
    k = num.size
    if k < 2:
        return ratio, ratio, ratio
    resid = (num - ratio * den) / den.mean()
    half = Z90 * float(resid.std(ddof=1)) / math.sqrt(k)
    return ratio, max(0.0, ratio - half), ratio + half


def _slope_interval(T: np.ndarray, err: np.ndarray) -> tuple[float, float, float]:
    fit = stats.linregress(np.log(T), np.log(err))
    if T.size < 3:
        return float(fit.slope), float(fit.slope), float(fit.slope)
    half = float(stats.t.ppf(0.95, T.size - 2)) * float(fit.stderr)
    return float(fit.slope), float(fit.slope) - half, float(fit.slope) + half


def approx_error_variants(cfg: ExperimentConfig) -> list[tuple[str, Callable[[float], int]]]:
    """Labelled rules for the number of quadrature nodes at cutoff ``T``."""
    return [(f"N={cfg.N_fixed}", lambda T: cfg.N_fixed), ("N=T", lambda T: max(1, math.ceil(T)))]


def run_approx_error(cfg: ExperimentConfig) -> list[ResultRow]:
    """Squared relative L2 error of the fast evaluator against brute force, per cutoff ``T``.

    One neuron per draw with ``w ~ N(0, c/(nd))``; the error is
    ``sum_x |S_w(x) - A tau_w(x)|^2 / sum_x |A tau_w(x)|^2`` over a shared set of
    envelope samples. Experiment ids read ``approx_error:N=<rule>:T=<T>``, and a
    ``...:slope`` row per variant holds the least-squares slope of
    ``log(error)`` against ``log(T)``.
    """
    if len(cfg.activations) != 1:
        raise ValueError("approx_error takes a single activation")
    spec = get_activation(cfg.activations[0])
    rows = []
    workers = cfg.worker_count()
    variants = approx_error_variants(cfg)
    for n in cfg.ns():
        seeds = cfg.seeds_for(n)
        setups = []
        for draw in range(seeds):
            rng = make_rng(cfg.master_seed, _STREAM["approx_error"], n, draw)
            w = rng.normal(0.0, math.sqrt(cfg.c_init / (n * cfg.d)), size=(n, cfg.d))
            X = sample_envelope(n, cfg.d, cfg.samples_for(n), make_rng(cfg.master_seed, _STREAM["approx_error"], n, draw, 1))
            exact = antisymmetrize_neurons(spec, w, X)[:, 0]
            setups.append((w, X, exact))

        def task(draw: int, T: float, N: int):
            w, X, exact = setups[draw]
            start = time.perf_counter()
            pl = plan(spec, w, t=cfg.t, T=T, N=N, scheme=cfg.scheme)
            approx = evaluate_neuron(pl, w, 0.0, X).value.real
            return (approx - exact) ** 2, exact**2, time.perf_counter() - start

        keys = [(label, T, draw, rule(T)) for label, rule in variants for T in cfg.T_values for draw in range(seeds)]
        results = _run_tasks([lambda k=k: task(k[2], k[1], k[3]) for k in keys], workers)
        table = {(label, T, draw): res for (label, T, draw, _), res in zip(keys, results)}

        for label, _ in variants:
            means = []
            for T in cfg.T_values:
                parts = [table[(label, T, draw)] for draw in range(seeds)]
                if seeds == 1:
                    est, lo, hi = _ratio_interval(parts[0][0], parts[0][1])
                else:
                    est, lo, hi = _interval([float(e.sum() / a.sum()) for e, a, _ in parts])
                means.append(est)
                rows.append(ResultRow(
                    f"approx_error:{label}:T={T:g}", n, cfg.d, 2, spec.name, "fast_approx", est, lo, hi,
                    cfg.samples_for(n), seeds, _ms(sum(p[2] for p in parts), cfg),
                ))
            if len(cfg.T_values) >= 2:
                slope, lo, hi = _slope_interval(np.asarray(cfg.T_values, dtype=float), np.asarray(means))
                rows.append(ResultRow(
                    f"approx_error:{label}:slope", n, cfg.d, 2, spec.name, "fast_approx", slope, lo, hi,
                    cfg.samples_for(n), seeds, 0,
                ))
    return rows


# --- depth --------------------------------------------------------------------------------------


def _resolve_activation(name: str) -> ActivationSpec:
    return get_activation(name, normalize_drelu()) if name == "drelu" else get_activation(name)


def _depth_draw(cfg: ExperimentConfig, n: int, draw: int, specs: list[ActivationSpec]) -> tuple[dict, float]:
    """Per-draw ``(1/m) sum_k mean_x |A h_k^{(L)}|^2`` for every activation and depth.

    All depths share the first layers of one deepest network, and both
    activations see the same weights and samples.
    """
    depths = sorted(cfg.depths)
    m = m_for(cfg.m_rule, n, cfg.d)
    params = init_deep_network(n, cfg.d, max(depths), make_rng(cfg.master_seed, _STREAM["depth"], n, draw), width=m)
    X = sample_envelope(n, cfg.d, cfg.samples_for(n), make_rng(cfg.master_seed, _STREAM["depth"], n, draw, 1))
    hidden = params.depth_weights or ()

    def fn(z: np.ndarray) -> np.ndarray:
        cols = []
        for s in specs:
            h = evaluate(s, z)
            level = 2
            if level in depths:
                cols.append(h)
            for H in hidden:
                h = evaluate(s, h @ H.T)
                level += 1
                if level in depths:
                    cols.append(h)
        return np.concatenate(cols, axis=-1)

    start = time.perf_counter()
    A = antisymmetrize_units(params.blocks(), X, fn, out_width=m * len(specs) * len(depths))
    elapsed = time.perf_counter() - start
    out = {}
    col = 0
    for s in specs:
        for L in depths:
            out[(s.name, L)] = float(np.sum(np.mean(A[:, col : col + m] ** 2, axis=0))) / m
            col += m
    return out, elapsed


def run_depth(cfg: ExperimentConfig) -> list[ResultRow]:
    """Expected squared norm of antisymmetrized networks with ``L`` weight layers.

    All layers have width ``m`` (``3n`` by default) and variance ``1/fan_in``.
    The Gaussian output layer is averaged exactly, ``E_a |A f|^2 = (1/m) sum_k
    |A h_k|^2``. ``drelu`` uses the normalizing constant from
    :func:`normalize_drelu`.
    """
    if any(L < 2 for L in cfg.depths):
        raise ValueError("depth counts weight layers and must be at least 2")
    specs = [_resolve_activation(a) for a in cfg.activations]
    keys = [(n, draw) for n in cfg.ns() for draw in range(cfg.seeds_for(n))]
    results = _run_tasks([lambda n=n, k=k: _depth_draw(cfg, n, k, specs) for n, k in keys], cfg.worker_count())
    rows = []
    for n in cfg.ns():
        draws = [res for (nn, _), res in zip(keys, results) if nn == n]
        share = sum(t for _, t in draws) / (len(specs) * len(cfg.depths))
        for L in sorted(cfg.depths):
            for s in specs:
                mean, lo, hi = _interval([r[(s.name, L)] for r, _ in draws])
                rows.append(ResultRow(
                    "depth", n, cfg.d, L, s.name, "brute_mc", mean, lo, hi,
                    cfg.samples_for(n), len(draws), _ms(share, cfg),
                ))
    return rows


# --- kernel heatmap -----------------------------------------------------------------------------


def kernel_diag_grid(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``theta`` grid and the mean of ``D_w(theta, theta')`` over weight draws with its 90% interval.

    Returns ``(theta, mean, low, high)`` with the three arrays indexed ``[i, j]``
    for ``(theta[i], theta[j])``.
    """
    n = cfg.n_range[0]
    theta = np.linspace(-cfg.grid_max, cfg.grid_max, cfg.grid_size)
    TH, TT = np.meshgrid(theta, theta, indexing="ij")
    rng = make_rng(cfg.master_seed, _STREAM["kernel_diag"], n)
    W = rng.normal(0.0, math.sqrt(cfg.c_init / (n * cfg.d)), size=(cfg.seeds, n, cfg.d))
    vals = np.stack([kernel_2d(w, TH, TT) for w in W])
    mean = vals.mean(axis=0)
    if cfg.seeds < 2:
        return theta, mean, mean.copy(), mean.copy()
    half = Z90 * vals.std(axis=0, ddof=1) / math.sqrt(cfg.seeds)
    return theta, mean, mean - half, mean + half


def run_kernel_diag(cfg: ExperimentConfig) -> list[ResultRow]:
    """Heatmap rows ``kernel_diag:theta=<a>:theta_t=<b>`` of the averaged kernel."""
    start = time.perf_counter()
    theta, mean, lo, hi = kernel_diag_grid(cfg)
    per_cell = _ms((time.perf_counter() - start) / mean.size, cfg)
    n = cfg.n_range[0]
    rows = []
    for i, a in enumerate(theta):
        for j, b in enumerate(theta):
            rows.append(ResultRow(
                f"kernel_diag:theta={a:.6g}:theta_t={b:.6g}", n, cfg.d, 0, "none", "closed_form",
                float(mean[i, j]), float(min(lo[i, j], mean[i, j])), float(max(hi[i, j], mean[i, j])),
                0, cfg.seeds, per_cell,
            ))
    return rows


RUNNERS: dict[str, Callable[[ExperimentConfig], list[ResultRow]]] = {
    "fig1": run_fig1,
    "approx_error": run_approx_error,
    "depth": run_depth,
    "kernel_diag": run_kernel_diag,
}


def run(cfg: ExperimentConfig) -> list[ResultRow]:
    return RUNNERS[cfg.experiment](cfg)


def vega_lite_spec(cfg: ExperimentConfig, csv_path: str) -> dict:
    """Plot description for the CSV written by ``cfg``; rendering happens elsewhere."""
    if cfg.experiment == "kernel_diag":
        return {
            "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
            "data": {"url": csv_path, "format": {"type": "csv"}},
            "transform": [
                {"calculate": "split(datum.experiment, ':')", "as": "parts"},
                {"calculate": "toNumber(split(datum.parts[1], '=')[1])", "as": "theta"},
                {"calculate": "toNumber(split(datum.parts[2], '=')[1])", "as": "theta_t"},
            ],
            "mark": "rect",
            "encoding": {
                "x": {"field": "theta", "type": "ordinal"},
                "y": {"field": "theta_t", "type": "ordinal", "sort": "descending"},
                "color": {"field": "estimate", "type": "quantitative", "scale": {"scheme": "redblue", "domainMid": 0}},
            },
        }
    x_field = "n"
    color = "activation"
    if cfg.experiment == "approx_error":
        transform = [
            {"filter": "indexof(datum.experiment, 'slope') < 0"},
            {"calculate": "toNumber(split(split(datum.experiment, ':')[2], '=')[1])", "as": "T"},
            {"calculate": "split(datum.experiment, ':')[1]", "as": "variant"},
        ]
        x_field, color = "T", "variant"
    else:
        transform = [{"calculate": "datum.activation + ' ' + datum.method + ' L=' + datum.depth", "as": "series"}]
        color = "series"
    enc = {
        "x": {"field": x_field, "type": "quantitative", "scale": {"type": "log"} if x_field == "T" else {}},
        "color": {"field": color, "type": "nominal"},
    }
    return {
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "data": {"url": csv_path, "format": {"type": "csv"}},
        "transform": transform,
        "layer": [
            {"mark": "errorband", "encoding": {**enc, "y": {"field": "ci90_low", "type": "quantitative"},
                                               "y2": {"field": "ci90_high"}}},
            {"mark": {"type": "line", "point": True},
             "encoding": {**enc, "y": {"field": "estimate", "type": "quantitative", "scale": {"type": "log"}}}},
        ],
    }
