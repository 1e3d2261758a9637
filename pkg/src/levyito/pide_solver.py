"""Up-and-out call PIDE on a log-price grid with an implicit-explicit scheme.

In log price ``z = ln S`` and time to maturity ``tau = T - t`` the price
``P = e^{-r tau} V`` where

    V_tau = (carry - sigma^2/2) V_z + sigma^2/2 V_zz
            + int nu(dy) [V(z + y) - V(z) - (e^y - 1) V_z],

``V(0, z) = (e^z - K)^+`` below the barrier and ``V = 0`` for ``z >= ln D``.
Jumps smaller than the cutoff ``eps`` are replaced by their second-order
Taylor expansion, i.e. an extra diffusion ``int_{|y|<eps} y^2 nu(dy)`` and a
drift correction.  Local terms are implicit (tridiagonal solve), the jump
integral explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded, toeplitz

from .errors import ConfigError, StabilityError
from .levy_core import LevyMeasureSpec, LevyModel, tail_intensity
from .mc_pricer import martingale_drift
from .quadrature import gauss_panels


@dataclass(frozen=True)
class PIDEParams:
    """Contract and grid for :func:`solve_pide`.

    ``carry`` is the asset drift in the PIDE (defaults to ``r``); setting it
    to 0 freezes the asset so that only discounting acts.  ``jump_cutoff``
    defaults to the grid step.  With ``extrapolate`` the lattice is the
    Richardson combination ``2 P_fine - P_coarse`` with a half-resolution
    solve, which removes the first-order error of the knock-out
    discontinuity at the barrier.
    """

    model: LevyModel
    r: float
    T: float
    K: float
    D: float
    n_x: int = 400
    n_t: int = 400
    carry: float | None = None
    x_min: float | None = None
    jump_cutoff: float | None = None
    width: float = 6.0
    check_martingale: bool = True
    extrapolate: bool = False

    def __post_init__(self):
        if not (0 < self.K < self.D):
            raise ConfigError(f"need 0 < K < D, got K={self.K}, D={self.D}")
        if self.r < 0:
            raise ConfigError(f"r must be >= 0, got {self.r}")
        if not self.T > 0:
            raise ConfigError(f"T must be > 0, got {self.T}")
        if self.n_x < 4 or self.n_t < 1:
            raise ConfigError("grid needs n_x >= 4 and n_t >= 1")
        if self.extrapolate and (self.n_x % 2 or self.n_t % 2 or self.n_x < 8):
            raise ConfigError("extrapolation needs even n_x >= 8 and even n_t")
        if self.x_min is not None and not self.x_min < math.log(self.K):
            raise ConfigError("x_min must lie below ln K")

    @property
    def sigma(self) -> float:
        return self.model.sigma


@dataclass(frozen=True, eq=False)
class PIDESolution:
    """Prices ``P(t_i, S_j)``; rows follow increasing ``t`` from 0 to ``T``."""

    params: PIDEParams
    times: np.ndarray
    x: np.ndarray
    spots: np.ndarray
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def row(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.values[i]


def strike_cells(K: float, D: float, n_x: int, x_min_target: float) -> int:
    """Number of grid cells between ``ln K`` and ``ln D`` for a grid reaching down to about ``x_min_target``."""
    lk, ld = math.log(K), math.log(D)
    return min(max(1, round(n_x * (ld - lk) / (ld - x_min_target))), n_x - 1)


def log_grid(K: float, D: float, n_x: int, x_min_target: float, n_k: int | None = None):
    """Uniform grid on ``[x_min, ln D]`` with ``ln K`` and ``ln D`` exactly on nodes.

    Returns ``(x, spots, k_index)``; ``spots`` holds ``exp(x)`` except that
    the strike and barrier nodes are set to ``K`` and ``D`` exactly.
    """
    lk, ld = math.log(K), math.log(D)
    if n_k is None:
        n_k = strike_cells(K, D, n_x, x_min_target)
    dx = (ld - lk) / n_k
    x = ld - dx * np.arange(n_x, -1, -1, dtype=float)
    k_index = n_x - n_k
    x[k_index] = lk
    x[-1] = ld
    spots = np.exp(x)
    spots[k_index] = K
    spots[-1] = D
    return x, spots, k_index


def _scale(model: LevyModel, T: float) -> float:
    var_rate = model.sigma ** 2
    if not model.measure.is_null:
        var_rate += model.measure.integrate(lambda y: y * y)
    return math.sqrt(T * var_rate)


def jump_weights(measure: LevyMeasureSpec, dx: float, eps: float, n_max: int, order: int = 16) -> np.ndarray:
    """Weights ``W_m``, ``m = -n_max..n_max``, of the jump integral on the grid.

    ``W_m = int_{|y| >= eps} nu(y) hat((y - m dx)/dx) dy`` so that
    ``sum_m W_m V_{j+m}`` integrates the piecewise-linear interpolant of ``V``
    against ``nu``.  Each half-cell is integrated with Gauss-Legendre,
    starting exactly at ``eps``.
    """
    m = np.arange(-n_max, n_max + 1)
    w = np.zeros(m.size)
    if measure.is_null:
        return w
    # half-cells [k dx, (k+1) dx] for k in -n_max .. n_max-1
    k = np.arange(-n_max, n_max)
    a = np.maximum(k * dx, -np.inf)
    b = (k + 1) * dx
    # clip away the band |y| < eps
    pos = a >= 0
    a_c = np.where(pos, np.maximum(a, eps), a)
    b_c = np.where(pos, b, np.minimum(b, -eps))
    valid = b_c > a_c
    y, wy = gauss_panels(a_c[valid], b_c[valid], order)
    dens = np.asarray(measure.density(y.ravel())).reshape(y.shape) * wy
    left = k[valid]
    # within [k dx, (k+1) dx]: hat of node k falls, hat of node k+1 rises
    frac = (y - left[:, None] * dx) / dx
    np.add.at(w, left + n_max, np.sum(dens * (1.0 - frac), axis=1))
    np.add.at(w, left + 1 + n_max, np.sum(dens * frac, axis=1))
    for loc, mass in measure.atoms:
        if abs(loc) >= eps and abs(loc) < n_max * dx:
            j = math.floor(loc / dx)
            frac = loc / dx - j
            w[j + n_max] += mass * (1.0 - frac)
            w[j + 1 + n_max] += mass * frac
    return w


def solve_pide(params: PIDEParams) -> PIDESolution:
    """Backward solution of the barrier PIDE.

    Raises
    ------
    ConfigError
        If the model drift is not the martingale drift (with
        ``check_martingale``).
    StabilityError
        If ``dt * nu(|y| >= eps) > 1``, which would break the positivity of
        the explicit jump step; increase ``n_t``.
    """
    p = params
    model = p.model
    if p.check_martingale:
        target = martingale_drift(model.measure, model.sigma)
        if abs(model.gamma - target) > 1e-8 * max(1.0, abs(target)):
            raise ConfigError(
                f"model drift {model.gamma!r} differs from the martingale drift {target!r}")
    x_min_target = p.x_min if p.x_min is not None else math.log(p.K) - max(p.width * _scale(model, p.T), 1.0)
    times = np.linspace(0.0, p.T, p.n_t + 1)
    if not p.extrapolate:
        x, spots, k_index = log_grid(p.K, p.D, p.n_x, x_min_target)
        values, diag = _march(p, x, spots, k_index, p.n_t)
        return PIDESolution(p, times, x, spots, values, diag)

    n_k_c = strike_cells(p.K, p.D, p.n_x // 2, x_min_target)
    xc, sc, kc = log_grid(p.K, p.D, p.n_x // 2, x_min_target, n_k_c)
    x, spots, k_index = log_grid(p.K, p.D, p.n_x, x_min_target, 2 * n_k_c)
    coarse, _ = _march(p, xc, sc, kc, p.n_t // 2)
    fine, diag = _march(p, x, spots, k_index, p.n_t)
    # coarse lattice on fine nodes: rows averaged, columns interpolated linearly in S
    rows = np.empty((p.n_t + 1, coarse.shape[1]))
    rows[0::2] = coarse
    rows[1::2] = 0.5 * (coarse[:-1] + coarse[1:])
    lifted = np.empty_like(fine)
    for i in range(p.n_t + 1):
        lifted[i] = np.interp(spots, sc, rows[i])
    values = 2.0 * fine - lifted
    negative = int(np.sum(values < 0.0))
    np.maximum(values, 0.0, out=values)
    values[-1] = fine[-1]
    values[:, -1] = 0.0
    diag = dict(diag, extrapolated=True, clipped_negative=negative,
                max_correction=float(np.max(np.abs(fine - lifted))))
    return PIDESolution(p, times, x, spots, values, diag)


def _march(p: PIDEParams, x: np.ndarray, spots: np.ndarray, k_index: int, n_t: int):
    """Time-march on one grid; returns the lattice (rows by increasing ``t``) and diagnostics."""
    model = p.model
    measure = model.measure
    carry = p.r if p.carry is None else p.carry
    n = x.size - 1
    dx = (x[-1] - x[k_index]) / (n - k_index)
    dt = p.T / n_t

    eps = p.jump_cutoff if p.jump_cutoff is not None else dx
    if measure.is_null:
        lam = 0.0
        sig_eps2 = small_drift = big_drift = 0.0
        J = None
    else:
        lam = tail_intensity(measure, eps)
        sig_eps2 = measure.integrate(lambda y: y * y, outer=eps) if eps > 0 else 0.0
        small_drift = measure.integrate(lambda y: math.expm1(y) - y, outer=eps) if eps > 0 else 0.0
        big_drift = measure.integrate(math.expm1, inner=eps)
        W = jump_weights(measure, dx, eps, n)
        # J[j, i] = W_{i - j}
        J = toeplitz(W[n::-1], W[n:])
    growth = dt * lam
    if growth > 1.0:
        raise StabilityError(
            f"explicit jump step unstable: dt * lambda_eps = {growth:.4g} > 1; increase n_t "
            f"to at least {math.ceil(p.T * lam)}")
    mu = carry - 0.5 * model.sigma ** 2 - big_drift - small_drift
    a = 0.5 * (model.sigma ** 2 + sig_eps2)

    # implicit local operator on interior nodes 1..n-1; central differences
    # unless the cell Peclet number exceeds 1, then upwind
    peclet = abs(mu) * dx / (2.0 * a) if a > 0 else math.inf
    if peclet <= 1.0:
        lo = a / dx ** 2 - mu / (2 * dx)
        up = a / dx ** 2 + mu / (2 * dx)
    elif mu > 0:
        lo = a / dx ** 2
        up = a / dx ** 2 + mu / dx
    else:
        lo = a / dx ** 2 - mu / dx
        up = a / dx ** 2
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = -dt * up
    ab[1, :] = 1.0 + dt * (lo + up)
    ab[2, :-1] = -dt * lo

    payoff = np.where(spots < p.D, np.maximum(spots - p.K, 0.0), 0.0)
    left_value = payoff[0]
    V = payoff.copy()
    values = np.empty((n_t + 1, n + 1))
    values[-1] = payoff
    for step in range(1, n_t + 1):
        rhs = V[1:-1].copy()
        if J is not None:
            rhs += dt * ((J @ V)[1:-1] - lam * V[1:-1])
        rhs[0] += dt * lo * left_value
        V_new = np.empty_like(V)
        V_new[1:-1] = solve_banded((1, 1), ab, rhs)
        V_new[0] = left_value
        V_new[-1] = 0.0
        V = V_new
        values[n_t - step] = math.exp(-p.r * step * dt) * V
    values[-1] = payoff
    values[:, -1] = 0.0

    tail_mass = 0.0 if measure.is_null else tail_intensity(measure, n * dx)
    diagnostics = {
        "dx": float(dx),
        "dt": dt,
        "x_min": float(x[0]),
        "jump_cutoff": float(eps),
        "lambda_eps": lam,
        "explicit_growth": growth,
        "peclet": float(peclet),
        "drift": mu,
        "diffusion": a,
        "small_jump_variance": sig_eps2,
        "range_tail_mass": tail_mass,
    }
    return values, diagnostics


def interpolate_price(solution: PIDESolution, t: float, spot: float) -> float:
    """Price at ``(t, spot)``: linear in ``t`` between levels and linear in ``S`` between nodes.

    Spots at or above the barrier return exactly 0; grid nodes return their
    lattice value.
    """
    p = solution.params
    if not 0.0 <= t <= p.T:
        raise ConfigError(f"t must lie in [0, T={p.T}], got {t}")
    if spot >= p.D:
        return 0.0
    S = solution.spots
    if spot < S[0]:
        raise ConfigError(f"spot {spot} below the grid (minimum {S[0]:.6g})")
    j = min(int(np.searchsorted(S, spot, side="right")) - 1, S.size - 2)
    ws = (spot - S[j]) / (S[j + 1] - S[j])
    times = solution.times
    i = min(int(np.searchsorted(times, t, side="right")) - 1, times.size - 2)
    wt = (t - times[i]) / (times[i + 1] - times[i])

    def at(row):
        return row[j] if ws == 0.0 else (1.0 - ws) * row[j] + ws * row[j + 1]

    v0 = at(solution.values[i])
    if wt == 0.0:
        return float(v0)
    return float((1.0 - wt) * v0 + wt * at(solution.values[i + 1]))


def integral_operator(row: np.ndarray, spots: np.ndarray, measure: LevyMeasureSpec, j: int,
                      inner: float = 1e-6, outer: float | None = None, order: int = 16,
                      barrier: float | None = None, strike: float | None = None) -> float:
    """``int nu(dy) [P(x e^y) - P(x) - x (e^y - 1) dP/dx(x)]`` at ``x = spots[j]``.

    ``P`` off the grid is the linear interpolant of ``row`` in the spot
    variable; ``dP/dx`` is a centred difference.  With ``barrier`` set,
    ``P`` is 0 at and above it and follows the payoff ``(x - strike)^+``
    below the grid; otherwise the row is extrapolated linearly.
    """
    row = np.asarray(row, dtype=float)
    spots = np.asarray(spots, dtype=float)
    xj = spots[j]
    if 0 < j < spots.size - 1:
        deriv = (row[j + 1] - row[j - 1]) / (spots[j + 1] - spots[j - 1])
    elif j == 0:
        deriv = (row[1] - row[0]) / (spots[1] - spots[0])
    else:
        deriv = (row[-1] - row[-2]) / (spots[-1] - spots[-2])
    if outer is None:
        outer = max(math.log(spots[-1] / xj), math.log(xj / spots[0])) + 1.0
    # panel edges at every kink of the interpolant, seen from x_j
    kinks = [spots[spots != xj]]
    if barrier is not None:
        kinks.append(np.array([barrier, 0.0 if strike is None else strike]))
    kinks = np.concatenate(kinks)
    splits = np.log(kinks[kinks > 0] / xj)
    y, w = measure.quadrature_nodes(inner, outer, splits=splits[splits != 0.0], order=order)
    target = xj * np.exp(y)
    vals = np.interp(target, spots, row)
    lo_slope = (row[1] - row[0]) / (spots[1] - spots[0])
    hi_slope = (row[-1] - row[-2]) / (spots[-1] - spots[-2])
    below = target < spots[0]
    above = target > spots[-1]
    if barrier is not None:
        K = 0.0 if strike is None else strike
        vals = np.where(below, np.maximum(target - K, 0.0), vals)
        vals = np.where(target >= barrier, 0.0, vals)
    else:
        vals = np.where(below, row[0] + lo_slope * (target - spots[0]), vals)
        vals = np.where(above, row[-1] + hi_slope * (target - spots[-1]), vals)
    integrand = vals - row[j] - xj * np.expm1(y) * deriv
    return float(np.sum(w * integrand))
