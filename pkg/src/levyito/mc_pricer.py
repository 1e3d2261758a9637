"""Monte Carlo pricing of the up-and-out call by its Feynman-Kac representation.

Under the risk-neutral pure-jump model ``S_s = S_t exp(r (s - t) + X_s - X_t)``
with martingale drift, the price is

    P(t, S) = e^{-r(T-t)} E[H(S_{T ^ tau_D}) | S_t = S],    H(x) = (x - K)^+ 1{x < D},

where ``tau_D`` is the first time the asset reaches ``D``.  Between jumps the
log-asset is affine, so its running maximum on a segment is attained at an
endpoint and barrier monitoring is exact.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .levy_core import (
    LevyMeasureSpec,
    LevyModel,
    SamplePath,
    simulate_batch,
    truncation_bias_bound,
)

#: Paths simulated per batch (and per worker task).
BATCH = 4096


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int
    delta: float
    bias_bound: float = 0.0


def martingale_drift(measure: LevyMeasureSpec, sigma: float = 0.0) -> float:
    """``gamma* = -sigma^2/2 - int (e^y - 1) nu(dy)``, making ``e^{X_t}`` a martingale.

    Raises
    ------
    DomainError
        "martingale correction impossible" when ``int_{y > 1} e^y nu(dy)``
        diverges (for CGMY-class measures: ``M <= 1``).
    """
    p = measure.params
    if measure.family in ("cgmy", "variance_gamma") and p["M"] <= 1.0:
        raise DomainError(f"martingale correction impossible: exponential moment needs M > 1, got M={p['M']}")
    if measure.family == "custom":
        probe = measure.integrate(lambda y: math.exp(y), inner=1.0)
        if not math.isfinite(probe):
            raise DomainError("martingale correction impossible: int_{y>1} e^y nu(dy) diverges")
    if measure.family == "compound_poisson" and not measure.atoms:
        lam, mu, sd = p["lam"], p.get("jump_mean", 0.0), p.get("jump_sd", 1.0)
        corr = lam * math.expm1(mu + 0.5 * sd * sd)
    elif measure.family in ("cgmy", "variance_gamma"):
        C, G, M, Y = p["C"], p["G"], p["M"], p.get("Y", 0.0)
        if Y == 0.0:
            corr = C * (math.log(M / (M - 1.0)) - math.log((G + 1.0) / G))
        else:
            corr = C * math.gamma(-Y) * ((M - 1.0) ** Y - M ** Y + (G + 1.0) ** Y - G ** Y)
    else:
        corr = measure.integrate(math.expm1)
    return -0.5 * sigma * sigma - corr


def risk_neutral_model(measure: LevyMeasureSpec, sigma: float = 0.0) -> LevyModel:
    return LevyModel(measure, martingale_drift(measure, sigma), sigma)


def _check_martingale(model: LevyModel, tol: float = 1e-8) -> None:
    target = martingale_drift(model.measure, model.sigma)
    if abs(model.gamma - target) > tol * max(1.0, abs(target)):
        raise ConfigError(
            f"model drift {model.gamma!r} is not the martingale drift {target!r}; "
            "use gamma = martingale")


def default_workers() -> int:
    """Worker count from ``LEVYITO_WORKERS`` (default 1, i.e. in-process)."""
    try:
        return max(1, int(os.environ.get("LEVYITO_WORKERS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# per-batch kernels
# ---------------------------------------------------------------------------


def _batch_log_extremes(model: LevyModel, delta: float, tau: float, seed: int, start: int, count: int):
    """Per path: ``X`` at maturity, running max of ``X`` with continuous and with discrete monitoring.

    ``X`` starts at 0 and moves with drift ``model.gamma``.  Discrete
    monitoring looks only at post-jump values and at maturity.
    """
    counts, times, sizes = simulate_batch(model, delta, tau, seed, start, count)
    g = model.gamma
    offsets = _offsets(counts)
    csum = np.concatenate([[0.0], np.cumsum(sizes)])
    final = g * tau + (csum[offsets[1:]] - csum[offsets[:-1]])
    run_c = np.maximum(0.0, final)
    run_d = final.copy()
    has = counts > 0
    if np.any(has):
        pre = g * times + csum[:-1] - np.repeat(csum[offsets[:-1]], counts)
        post = pre + sizes
        starts = offsets[:-1][has]
        # affine between jumps: the segment maxima sit at its endpoints
        run_c[has] = np.maximum(run_c[has], np.maximum(np.maximum.reduceat(post, starts),
                                                       np.maximum.reduceat(pre, starts)))
        run_d[has] = np.maximum(run_d[has], np.maximum.reduceat(post, starts))
    return final, run_c, run_d


def _offsets(counts: np.ndarray) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)


@dataclass(frozen=True)
class _Task:
    model: LevyModel
    delta: float
    tau: float
    seed: int
    start: int
    count: int
    K: float
    barriers: tuple[float, ...]
    spots: tuple[float, ...]
    discrete: bool


def _run_task(task: _Task):
    final, run_c, run_d = _batch_log_extremes(task.model, task.delta, task.tau, task.seed,
                                              task.start, task.count)
    run = run_d if task.discrete else run_c
    out = np.empty((len(task.spots), len(task.barriers), task.count))
    for i, S in enumerate(task.spots):
        s_T = S * np.exp(final)
        peak = S * np.exp(run)
        for j, D in enumerate(task.barriers):
            out[i, j] = np.where(peak < D, np.maximum(s_T - task.K, 0.0), 0.0)
    return out


def _pricing_model(model: LevyModel, r: float) -> LevyModel:
    """Fold the interest rate into the drift: ``log(S_s/S_t) = (r + gamma)(s - t) + jumps``."""
    return LevyModel(model.measure, model.gamma + r, model.sigma)


def _simulate_payoffs(model: LevyModel, r: float, tau: float, K: float, barriers, spots,
                      n_paths: int, delta: float, seed: int, discrete: bool, workers: int):
    pm = _pricing_model(model, r)
    tasks = [
        _Task(pm, delta, tau, seed, start, min(BATCH, n_paths - start), K,
              tuple(barriers), tuple(spots), discrete)
        for start in range(0, n_paths, BATCH)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_task, tasks))
    else:
        parts = [_run_task(t) for t in tasks]
    return np.concatenate(parts, axis=2)


def _aggregate(payoffs: np.ndarray, disc: float, seed: int, delta: float, bias: float) -> MCEstimate:
    n = payoffs.size
    vals = disc * payoffs
    mean = math.fsum(vals.tolist()) / n
    if n > 1:
        var = math.fsum(((vals - mean) ** 2).tolist()) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = math.nan
    return MCEstimate(mean, se, n, seed, delta, bias)


def price_bias_bound(model: LevyModel, D: float, tau: float, delta: float) -> float:
    """First-order bound on the price error from dropping jumps below ``delta``.

    ``H`` is 1-Lipschitz below the barrier in the asset, and the asset is at
    most ``D`` while alive, so dropping jumps of total size ``b`` moves the
    payoff by at most ``D (e^b - 1)`` with ``b = truncation_bias_bound``.
    """
    b = truncation_bias_bound(model.measure, delta, tau)
    return D * math.expm1(b) if math.isfinite(b) else math.inf


def _validate(model, r, T, K, D, t, n_paths, delta):
    if model.sigma != 0.0:
        raise ConfigError("Monte Carlo pricing requires sigma = 0")
    if not (0 <= K < D):
        raise ConfigError(f"need 0 <= K < D, got K={K}, D={D}")
    if not 0.0 <= t < T:
        raise ConfigError(f"need 0 <= t < T, got t={t}, T={T}")
    if r < 0:
        raise ConfigError(f"r must be >= 0, got {r}")
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    if delta < 0:
        raise ConfigError("delta must be >= 0")


def barrier_payoffs(model: LevyModel, r: float, T: float, K: float, D: float, spot: float,
                    n_paths: int, delta: float, seed: int, t: float = 0.0,
                    discrete: bool = False) -> np.ndarray:
    """Undiscounted payoffs per path (common random numbers across calls with the same seed)."""
    _validate(model, r, T, K, D, t, n_paths, delta)
    return _simulate_payoffs(model, r, T - t, K, [D], [spot], n_paths, delta, seed, discrete, 1)[0, 0]


def price_barrier_mc(model: LevyModel, r: float, T: float, K: float, D: float, spot: float,
                     t: float = 0.0, n_paths: int = 100_000, delta: float = 1e-4, seed: int = 0,
                     discrete: bool = False, workers: int | None = None,
                     check_martingale: bool = True) -> MCEstimate:
    """Up-and-out call price ``e^{-r(T-t)} E[H(S_{T ^ tau_D})]`` by simulation.

    Parameters
    ----------
    model : LevyModel
        Pure-jump model whose drift is the martingale drift.
    r, T, K, D : float
        Rate, maturity, strike and barrier (``0 <= K < D``).
    spot : float
        Asset level at time ``t``.
    n_paths, delta, seed : int, float, int
        Sample size, jump truncation and RNG key.
    discrete : bool
        Monitor the barrier only at jump times and at maturity.
    workers : int, optional
        Process count; defaults to ``LEVYITO_WORKERS``.  Results do not
        depend on it.
    """
    _validate(model, r, T, K, D, t, n_paths, delta)
    if check_martingale:
        _check_martingale(model)
    if not spot > 0:
        raise ConfigError(f"spot must be > 0, got {spot}")
    tau = T - t
    if spot >= D:
        return MCEstimate(0.0, 0.0, n_paths, seed, delta, 0.0)
    workers = default_workers() if workers is None else workers
    pay = _simulate_payoffs(model, r, tau, K, [D], [spot], n_paths, delta, seed, discrete, workers)[0, 0]
    return _aggregate(pay, math.exp(-r * tau), seed, delta, price_bias_bound(model, D, tau, delta))


def price_barrier_curve(model: LevyModel, r: float, T: float, K: float, D: float,
                        spots: Sequence[float], t: float = 0.0, n_paths: int = 100_000,
                        delta: float = 1e-4, seed: int = 0, workers: int | None = None,
                        check_martingale: bool = True) -> list[MCEstimate]:
    """Prices at several spots from one set of simulated log-paths."""
    _validate(model, r, T, K, D, t, n_paths, delta)
    if check_martingale:
        _check_martingale(model)
    tau = T - t
    workers = default_workers() if workers is None else workers
    live = [S for S in spots if 0 < S < D]
    pay = _simulate_payoffs(model, r, tau, K, [D], live, n_paths, delta, seed, False, workers) if live else None
    bias = price_bias_bound(model, D, tau, delta)
    out = []
    for S in spots:
        if not S > 0:
            raise ConfigError(f"spot must be > 0, got {S}")
        if S >= D:
            out.append(MCEstimate(0.0, 0.0, n_paths, seed, delta, 0.0))
        else:
            out.append(_aggregate(pay[live.index(S), 0], math.exp(-r * tau), seed, delta, bias))
    return out


def martingale_diagnostic(model: LevyModel, T: float, n_paths: int, delta: float, seed: int,
                          workers: int | None = None) -> MCEstimate:
    """Estimate ``E[e^{X_T}]`` with ``X_0 = 0``, which equals 1 under the martingale drift.

    ``bias_bound`` is ``E-scale * truncation_bias_bound * e^delta``: dropping
    jumps of total size ``b`` changes ``e^{X_T}`` by at most a factor ``e^b``,
    applied to the sample mean as the scale.
    """
    if model.sigma != 0.0:
        raise ConfigError("martingale diagnostic requires sigma = 0")
    workers = default_workers() if workers is None else workers
    starts = list(range(0, n_paths, BATCH))
    args = [(model, delta, T, seed, s, min(BATCH, n_paths - s)) for s in starts]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_final_values, args))
    else:
        parts = [_final_values(a) for a in args]
    vals = np.exp(np.concatenate(parts))
    est = _aggregate(vals, 1.0, seed, delta, 0.0)
    b = truncation_bias_bound(model.measure, delta, T)
    bias = est.mean * b * math.exp(delta)
    return MCEstimate(est.mean, est.std_error, n_paths, seed, delta, bias)


def _final_values(args) -> np.ndarray:
    model, delta, T, seed, start, count = args
    counts, _, sizes = simulate_batch(model, delta, T, seed, start, count)
    offsets = _offsets(counts)
    csum = np.concatenate([[0.0], np.cumsum(sizes)])
    return model.gamma * T + (csum[offsets[1:]] - csum[offsets[:-1]])


def first_passage_time(path: SamplePath, level: float, t0: float = 0.0) -> float:
    """First ``s >= t0`` with ``X_s >= level`` (``inf`` if none before ``T``).

    Between jumps ``X`` is affine, so a crossing inside a segment solves a
    linear equation; a jump to or above ``level`` triggers at its time.
    """
    if path.value(t0) >= level:
        return t0
    k0 = int(np.searchsorted(path.jump_times, t0, side="right"))
    seg_start = t0
    x = path.value(t0)
    g = path.gamma
    for i in range(k0, path.n_jumps + 1):
        seg_end = path.jump_times[i] if i < path.n_jumps else path.T
        if g > 0 and x + g * (seg_end - seg_start) >= level:
            return seg_start + (level - x) / g
        if i == path.n_jumps:
            break
        x = x + g * (seg_end - seg_start) + path.jump_sizes[i]
        if x >= level:
            return float(seg_end)
        seg_start = seg_end
    return math.inf
