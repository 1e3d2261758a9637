"""Both sides of the pathwise Itô identity for finite-variation Lévy paths.

For a path ``X`` with drift ``gamma`` and jumps ``(T_i, J_i)``

    f(t, X_t) = f(0, X_0) + int_0^t df/ds(s, X_s) ds + gamma int_0^t df/dx(s, X_s) ds
                + sum_{T_i <= t} [f(T_i, X_{T_i-} + J_i) - f(T_i, X_{T_i-})].

Between jumps ``s -> X_s`` is affine, so the two time integrals reduce to
one-dimensional quadratures on each inter-jump segment.  The module also
computes the generator ``A f``, the compensated martingale part of ``f(t, X_t)``
and occupation times of intervals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, QuadratureError
from .levy_core import (
    LevyMeasureSpec,
    LevyModel,
    SamplePath,
    check_assumption_ac,
    simulate_path,
    truncation_bias_bound,
)
from .quadrature import adaptive_simpson, gauss_legendre
from .weakfn import WeakFunction, _oscillatory_integral, _quad_1d

EPS = np.finfo(float).eps

#: Default inner cutoff of the generator's jump integral.
GENERATOR_INNER_CUTOFF = 1e-6


@dataclass(frozen=True)
class ItoDecomposition:
    """Terms of the identity at one time ``t``; ``residual = lhs - rhs`` (signed)."""

    t: float
    lhs: float
    f0: float
    time_integral: float
    drift_integral: float
    jump_sum: float
    n_jumps: int
    quad_error_estimate: float

    @property
    def rhs(self) -> float:
        return math.fsum([self.f0, self.time_integral, self.drift_integral, self.jump_sum])

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class GeneratorValue:
    """``A f(s, x)`` and its parts; ``value`` is the sum of ``components``."""

    value: float
    integral_truncation: float
    components: tuple[float, float, float]
    inner_cutoff: float
    error_estimate: float
    omitted_inner_bound: float
    omitted_outer_estimate: float


@dataclass(frozen=True)
class Decomposition:
    """``f(t, X_t) = f(0, X_0) + M_t + int_0^t A f(s, X_s) ds`` on one path."""

    t: float
    lhs: float
    f0: float
    martingale: float
    compensator_integral: float
    generator_integral: float
    error_estimate: float

    @property
    def residual(self) -> float:
        return self.lhs - math.fsum([self.f0, self.martingale, self.generator_integral])


# ---------------------------------------------------------------------------
# path geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Segments:
    """Inter-jump segments on ``[0, t]``: ``X_s = base + gamma (s - start)`` on ``[start, end)``."""

    start: np.ndarray
    end: np.ndarray
    base: np.ndarray
    gamma: float

    def x_at(self, s, owner):
        return self.base[owner] + self.gamma * (s - self.start[owner])


def _jumps_until(path: SamplePath, t: float) -> int:
    return int(np.searchsorted(path.jump_times, t, side="right"))


def _segments(path: SamplePath, t: float) -> _Segments:
    k = _jumps_until(path, t)
    times = path.jump_times[:k]
    start = np.concatenate([[0.0], times])
    end = np.concatenate([times, [t]])
    base = path.x0 + path.gamma * start + np.concatenate([[0.0], np.cumsum(path.jump_sizes[:k])])
    return _Segments(start, end, base, path.gamma)


def _split_at_breaks(seg: _Segments, f: WeakFunction) -> _Segments:
    """Cut segments where the affine path crosses an ``x``-breakpoint or meets a ``t``-breakpoint."""
    extra_s, extra_owner = [], []
    if seg.gamma != 0.0:
        for c in f.x_breaks:
            s_cross = seg.start + (c - seg.base) / seg.gamma
            hit = (s_cross > seg.start) & (s_cross < seg.end)
            extra_s.append(s_cross[hit])
            extra_owner.append(np.nonzero(hit)[0])
    for tau in f.t_breaks:
        hit = (tau > seg.start) & (tau < seg.end)
        extra_s.append(np.full(int(hit.sum()), tau))
        extra_owner.append(np.nonzero(hit)[0])
    if not extra_s or sum(a.size for a in extra_s) == 0:
        return seg
    pts_s = np.concatenate([seg.start, seg.end, *extra_s])
    pts_o = np.concatenate([np.arange(seg.start.size), np.arange(seg.start.size), *extra_owner])
    order = np.lexsort((pts_s, pts_o))
    pts_s, pts_o = pts_s[order], pts_o[order]
    same = pts_o[1:] == pts_o[:-1]
    new_start = pts_s[:-1][same]
    new_end = pts_s[1:][same]
    owner = pts_o[:-1][same]
    keep = new_end > new_start
    owner = owner[keep]
    new_start, new_end = new_start[keep], new_end[keep]
    base = seg.x_at(new_start, owner)
    return _Segments(new_start, new_end, base, seg.gamma)


def _inner_range(seg: _Segments, breaks) -> tuple[np.ndarray, np.ndarray]:
    """Range of ``x`` on each piece, pulled a few ulps inside.

    Piece ends within rounding of a breakpoint are first snapped onto it, so
    the pulled-in range lies on one side of every breakpoint.
    """
    x0 = seg.base.copy()
    x1 = seg.base + seg.gamma * (seg.end - seg.start)
    for c in breaks:
        tol = 64 * EPS * max(1.0, abs(c))
        x0[np.abs(x0 - c) <= tol] = c
        x1[np.abs(x1 - c) <= tol] = c
    lo, hi = np.minimum(x0, x1), np.maximum(x0, x1)
    pad = 4 * EPS * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    wide = hi - lo > 4 * pad
    return np.where(wide, lo + pad, lo), np.where(wide, hi - pad, hi)


def _check_domain(f: WeakFunction, values: np.ndarray) -> None:
    if values.size and not np.all(f.in_domain(values)):
        bad = values[~f.in_domain(values)][0]
        raise DomainError(f"domain exit: path value {bad:.17g} leaves U={f.domain}")


def path_range(path: SamplePath, t: float) -> tuple[float, float]:
    """Smallest and largest of ``X_s`` and ``X_{s-}`` over ``s in [0, t]``."""
    seg = _segments(path, t)
    ends = seg.base + seg.gamma * (seg.end - seg.start)
    vals = np.concatenate([seg.base, ends])
    return float(vals.min()), float(vals.max())


# ---------------------------------------------------------------------------
# Itô identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Assembly:
    t: float
    lhs: float
    f0: float
    time_integral: float
    drift_integral: float
    jump_terms: np.ndarray
    jump_sizes: np.ndarray
    quad_error: float

    def decomposition(self, threshold: float = 0.0) -> ItoDecomposition:
        keep = np.abs(self.jump_sizes) >= threshold
        jump_sum = math.fsum(self.jump_terms[keep].tolist())
        # rounding allowance for the final sum of the terms
        scale = abs(self.lhs) + abs(self.f0) + abs(self.time_integral) + abs(self.drift_integral) \
            + math.fsum(np.abs(self.jump_terms[keep]).tolist())
        return ItoDecomposition(self.t, self.lhs, self.f0, self.time_integral, self.drift_integral,
                                jump_sum, int(keep.sum()), self.quad_error + 8 * EPS * scale)


def jump_terms(f: WeakFunction, path: SamplePath, t: float) -> np.ndarray:
    """``f(T_i, X_{T_i-} + J_i) - f(T_i, X_{T_i-})`` for each jump in ``(0, t]``, one at a time."""
    k = _jumps_until(path, t)
    pre = path.pre_jump_values()[:k]
    out = np.empty(k)
    for i in range(k):
        s = float(path.jump_times[i])
        out[i] = float(f(s, pre[i] + path.jump_sizes[i])) - float(f(s, pre[i]))
    return out


def _near_oscillation(seg: _Segments, f: WeakFunction, reach: float = 0.1) -> np.ndarray:
    """Sloped pieces passing within ``reach`` of the oscillation centre of ``f``."""
    if f.oscillation is None or seg.gamma == 0.0:
        return np.zeros(seg.start.size, dtype=bool)
    c = f.oscillation.center
    x_end = seg.base + seg.gamma * (seg.end - seg.start)
    lo, hi = np.minimum(seg.base, x_end), np.maximum(seg.base, x_end)
    gap = np.maximum(np.maximum(lo - c, c - hi), 0.0)
    return gap < reach


def _oscillatory_piece(f: WeakFunction, seg: _Segments, i: int):
    """Both time integrals over one sloped piece, integrated in ``x = X_s``.

    ``ds = dx / gamma``; the ``dx`` part uses the Fourier-weighted rule of
    the declared oscillation, the ``dt`` part (smooth in ``x``) plain
    adaptive quadrature.
    """
    g = seg.gamma
    s0, x0 = float(seg.start[i]), float(seg.base[i])
    x1 = x0 + g * (float(seg.end[i]) - s0)
    a, b = min(x0, x1), max(x0, x1)
    sign = 1.0 if x1 >= x0 else -1.0
    osc = f.oscillation
    vx, ex = _oscillatory_integral(osc.parts["dx"], osc.center, lambda x: 1.0, a, b, return_error=True)
    vt, et = _quad_1d(lambda x: float(f.dt(s0 + (x - x0) / g, x)), a, b, (osc.center,), return_error=True)
    return sign * vt / g, sign * vx / g, (ex + et) / abs(g)


def _assemble(f: WeakFunction, path: SamplePath, t: float, quad_tol: float) -> _Assembly:
    if not 0.0 <= t <= path.T:
        raise ConfigError(f"t must lie in [0, T={path.T}], got {t}")
    if not quad_tol > 0:
        raise ConfigError(f"quad_tol must be > 0, got {quad_tol}")
    seg = _segments(path, t)
    ends = seg.base + seg.gamma * (seg.end - seg.start)
    _check_domain(f, np.concatenate([seg.base, ends]))
    lhs = float(f(t, path.value(t)))
    f0 = float(f(0.0, path.x0))
    terms = jump_terms(f, path, t)
    sizes = np.array(path.jump_sizes[: terms.size])

    time_int = drift_int = 0.0
    q_err = 0.0
    if t > 0.0:
        pieces = _split_at_breaks(seg, f)
        near = _near_oscillation(pieces, f)
        regular = _Segments(pieces.start[~near], pieces.end[~near], pieces.base[~near], pieces.gamma)
        tol = quad_tol * (regular.end - regular.start) / t

        lo, hi = _inner_range(regular, f.x_breaks)

        def integrand(s, owner):
            # one-sided values at piece ends that sit on a breakpoint
            x = np.clip(regular.x_at(s, owner), lo[owner], hi[owner])
            return np.stack([f.dt(s, x), f.dx(s, x)])

        try:
            vals, errs = adaptive_simpson(integrand, regular.start, regular.end, tol)
        except QuadratureError as exc:
            raise QuadratureError(f"time integral: {exc}") from exc
        dt_parts, dx_parts = vals[0].tolist(), vals[1].tolist()
        q_err = float(np.sum(errs))
        for i in np.nonzero(near)[0]:
            vt, vx, e = _oscillatory_piece(f, pieces, i)
            dt_parts.append(vt)
            dx_parts.append(vx)
            q_err += e
        time_int = math.fsum(dt_parts)
        drift_int = path.gamma * math.fsum(dx_parts)
        q_err *= max(1.0, abs(path.gamma))
    return _Assembly(t, lhs, f0, time_int, drift_int, terms, sizes, q_err)


def ito_rhs(f: WeakFunction, path: SamplePath, t: float, quad_tol: float = 1e-10,
            jump_threshold: float = 0.0) -> ItoDecomposition:
    """Assemble both sides of the Itô identity on ``path`` at time ``t``.

    Parameters
    ----------
    f : WeakFunction
    path : SamplePath
    t : float
        Evaluation time in ``[0, path.T]``.
    quad_tol : float
        Absolute tolerance for the two time integrals, split over the
        inter-jump segments in proportion to their length.
    jump_threshold : float
        Only jumps with ``|J| >= jump_threshold`` enter ``jump_sum``; the
        time integrals always follow the full path.  With the default 0 the
        identity is exact up to quadrature error.

    Raises
    ------
    DomainError
        If the path leaves the domain of ``f``.
    QuadratureError
        If a segment integral fails to converge.
    """
    return _assemble(f, path, t, quad_tol).decomposition(jump_threshold)


# ---------------------------------------------------------------------------
# truncation study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StudyRow:
    delta: float
    n_paths: int
    mean_abs_residual: float
    max_abs_residual: float
    mean_quad_error: float
    bias_bound: float
    std_error: float

    @property
    def within_bound(self) -> bool:
        return self.mean_abs_residual <= self.bias_bound + 10.0 * self.mean_quad_error


@dataclass(frozen=True)
class StudyResult:
    rows: list[StudyRow]
    reference_delta: float
    lipschitz: float
    inversions: int = field(default=0)

    @property
    def monotone(self) -> bool:
        means = [r.mean_abs_residual for r in sorted(self.rows, key=lambda r: -r.delta)]
        return all(b <= a for a, b in zip(means, means[1:]))


def ito_residual_study(f: WeakFunction, model: LevyModel, deltas: Sequence[float], t: float,
                       n_paths: int, seed: int, quad_tol: float = 1e-8,
                       reference_delta: float | None = None) -> StudyResult:
    """Residual of the Itô identity when the jump sum keeps only jumps above ``delta``.

    Each path is simulated once at ``reference_delta`` (default: a tenth of
    the smallest ``delta``).  Its time integrals and left-hand side are fixed;
    for every ``delta`` the jump sum keeps only ``|J| >= delta``, so the
    residual is the contribution of the dropped small jumps.  The reported
    ``bias_bound`` is ``L * truncation_bias_bound(delta, t)``, with ``L`` the
    largest spatial Lipschitz bound of ``f`` over the visited ranges.
    """
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if not deltas or min(deltas) <= 0:
        raise ConfigError("delta ladder must contain positive values")
    if not model.measure.finite_activity:
        verdict = check_assumption_ac(model)
        if not verdict.satisfied:
            raise ConfigError(f"absolute-continuity assumption not established: {verdict.reason.value}")
    ref = reference_delta if reference_delta is not None else min(deltas) / 10.0
    residuals = np.zeros((len(deltas), n_paths))
    qerr = np.zeros((len(deltas), n_paths))
    lipschitz = 0.0
    for i in range(n_paths):
        path = simulate_path(model, ref, t, seed, path_index=i)
        asm = _assemble(f, path, t, quad_tol)
        lo, hi = path_range(path, t)
        lipschitz = max(lipschitz, f.lipschitz(0.0, t, lo, hi))
        for j, d in enumerate(deltas):
            dec = asm.decomposition(d)
            residuals[j, i] = abs(dec.residual)
            qerr[j, i] = dec.quad_error_estimate
    rows = []
    for j, d in enumerate(deltas):
        r = residuals[j]
        rows.append(StudyRow(
            d, n_paths, math.fsum(r.tolist()) / n_paths, float(r.max()),
            math.fsum(qerr[j].tolist()) / n_paths,
            lipschitz * truncation_bias_bound(model.measure, d, t),
            float(r.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.nan,
        ))
    means = [r.mean_abs_residual for r in rows]
    inversions = sum(b > a for a, b in zip(means, means[1:]))
    return StudyResult(rows, ref, lipschitz, inversions)


# ---------------------------------------------------------------------------
# generator and martingale part
# ---------------------------------------------------------------------------


def _require_pure_jump(model: LevyModel) -> None:
    if model.sigma != 0.0:
        raise ConfigError("sigma must be 0 for Itô verification and the generator")


def _increment_integral(f, s, x, measure: LevyMeasureSpec, inner, outer, splits=(), order=16):
    """``int (f(s, x+y) - f(s, x)) nu(dy)`` over ``inner <= |y| <= outer`` for arrays ``s, x``."""
    y, w = measure.quadrature_nodes(inner, outer, splits=splits, order=order)
    if y.size == 0:
        return np.zeros(np.shape(x))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    shifted = x[:, None] + y[None, :]
    _check_domain(f, shifted.ravel())
    vals = f(s[:, None], shifted) - f(s, x)[:, None]
    return vals @ w


def _outer_cutoff(f, s, x, measure: LevyMeasureSpec, inner: float, quad_tol: float,
                  start: float = 1.0, max_doublings: int = 40):
    """Double the outer cutoff until the next shell contributes less than ``quad_tol / 10``."""
    lo, hi = measure.support
    reach = max(-lo, hi)
    atom_reach = max((abs(a) for a, _ in measure.atoms), default=0.0)
    R = max(start, inner * 2.0, atom_reach)
    if math.isfinite(reach) and R >= reach:
        return reach, 0.0
    for _ in range(max_doublings):
        R2 = 2.0 * R
        if math.isfinite(reach):
            R2 = min(R2, reach)
        shell = _increment_integral(f, s, x, measure, R, R2)
        shell_abs = float(np.max(np.abs(shell)))
        if shell_abs < 0.1 * quad_tol or R2 >= reach:
            return R2, shell_abs
        R = R2
    raise QuadratureError(f"outer cutoff did not converge below quad_tol={quad_tol} (reached {R})")


def generator_apply(f: WeakFunction, model: LevyModel, s: float, x: float,
                    outer_cutoff: float | None = None, quad_tol: float = 1e-8,
                    inner_cutoff: float = GENERATOR_INNER_CUTOFF) -> GeneratorValue:
    """``A f(s, x) = df/ds + gamma df/dx + int (f(s, x+y) - f(s, x)) nu(dy)``.

    The jump integral runs over ``inner_cutoff <= |y| <= outer_cutoff``.  The
    omitted inner part is bounded by the local Lipschitz constant times the
    small-jump mass; the outer cutoff is found by doubling unless given, in
    which case the next shell must already be below ``quad_tol``.
    """
    _require_pure_jump(model)
    m = model.measure
    dt = float(f.dt(s, x))
    dr = model.gamma * float(f.dx(s, x))
    if m.is_null:
        return GeneratorValue(dt + dr, 0.0, (dt, dr, 0.0), 0.0, 0.0, 0.0, 0.0)
    inner = 0.0 if m.finite_activity and inner_cutoff == 0.0 else inner_cutoff
    if inner == 0.0:
        inner = 1e-12
    if outer_cutoff is None:
        outer, tail = _outer_cutoff(f, s, x, m, inner, quad_tol)
    else:
        outer = float(outer_cutoff)
        lo, hi = m.support
        reach = max(-lo, hi)
        tail = 0.0
        if outer < reach:
            tail = float(abs(_increment_integral(f, s, x, m, outer, min(2 * outer, reach))[0]))
        if tail > quad_tol:
            raise QuadratureError(
                f"outer cutoff {outer} too small: next shell contributes {tail:.3g} > quad_tol={quad_tol}")
    splits = [c - x for c in f.x_breaks]
    hi_rule = float(_increment_integral(f, s, x, m, inner, outer, splits, order=32)[0])
    lo_rule = float(_increment_integral(f, s, x, m, inner, outer, splits, order=16)[0])
    lip = f.lipschitz(s, s, x - inner, x + inner)
    omitted = lip * truncation_bias_bound(m, inner, 1.0) if math.isfinite(lip) else math.inf
    err = abs(hi_rule - lo_rule) + tail + omitted + 8 * EPS * (abs(dt) + abs(dr) + abs(hi_rule))
    return GeneratorValue(dt + dr + hi_rule, outer, (dt, dr, hi_rule), inner, err, omitted, tail)


def _compensator(f: WeakFunction, path: SamplePath, model: LevyModel, t: float, quad_tol: float):
    """``int_0^t int_{|y| >= delta} (f(s, X_s + y) - f(s, X_s)) nu(dy) ds`` and an error estimate.

    Gauss-Legendre with 5 nodes per inter-jump segment; the 3-node rule
    gives the error estimate.
    """
    m = model.measure
    if m.is_null or t == 0.0:
        return 0.0, 0.0
    inner = path.delta if path.delta > 0 else 1e-12
    seg = _segments(path, t)
    xs5, ws5 = gauss_legendre(5)
    xs3, ws3 = gauss_legendre(3)
    half = 0.5 * (seg.end - seg.start)
    mid = 0.5 * (seg.end + seg.start)
    s5 = (mid[:, None] + half[:, None] * xs5[None, :]).ravel()
    s3 = (mid[:, None] + half[:, None] * xs3[None, :]).ravel()
    owner5 = np.repeat(np.arange(seg.start.size), 5)
    owner3 = np.repeat(np.arange(seg.start.size), 3)
    x5 = seg.x_at(s5, owner5)
    x3 = seg.x_at(s3, owner3)
    outer, tail = _outer_cutoff(f, s5, x5, m, inner, quad_tol)
    g5 = _increment_integral(f, s5, x5, m, inner, outer)
    g5_lo = _increment_integral(f, s5, x5, m, inner, outer, order=8)
    g3 = _increment_integral(f, s3, x3, m, inner, outer)
    w5 = (half[:, None] * ws5[None, :]).ravel()
    w3 = (half[:, None] * ws3[None, :]).ravel()
    total = math.fsum((w5 * g5).tolist())
    time_err = abs(total - math.fsum((w3 * g3).tolist()))
    nu_err = float(np.sum(w5 * np.abs(g5 - g5_lo)))
    round_err = 8 * EPS * float(np.sum(w5 * np.abs(g5)))
    return total, time_err + nu_err + tail * t + round_err


def martingale_part(f: WeakFunction, path: SamplePath, model: LevyModel, t: float,
                    quad_tol: float = 1e-8) -> float:
    """``M_t = jump_sum - int_0^t int (f(s, X_{s-} + y) - f(s, X_{s-})) nu(dy) ds``.

    The compensator uses ``nu`` restricted to the path's truncation level,
    which makes ``M`` a martingale for the simulated process.
    """
    return decomposition_check(f, path, model, t, quad_tol).martingale


def decomposition_check(f: WeakFunction, path: SamplePath, model: LevyModel, t: float,
                        quad_tol: float = 1e-8) -> Decomposition:
    """Assemble ``f(0, X_0) + M_t + int_0^t A f(s, X_s) ds`` and compare with ``f(t, X_t)``."""
    _require_pure_jump(model)
    if path.gamma != model.gamma:
        raise ConfigError("path drift differs from the model drift")
    asm = _assemble(f, path, t, quad_tol)
    dec = asm.decomposition(0.0)
    comp, comp_err = _compensator(f, path, model, t, quad_tol)
    martingale = dec.jump_sum - comp
    gen_int = math.fsum([dec.time_integral, dec.drift_integral, comp])
    scale = abs(dec.lhs) + abs(dec.f0) + abs(dec.jump_sum) + abs(comp) + abs(gen_int)
    err = dec.quad_error_estimate + comp_err + 16 * EPS * scale
    return Decomposition(t, dec.lhs, dec.f0, martingale, comp, gen_int, err)


def compensator_error(f: WeakFunction, path: SamplePath, model: LevyModel, t: float,
                      quad_tol: float = 1e-8) -> float:
    """Quadrature error estimate of the compensator integral (and hence of ``M_t``)."""
    return _compensator(f, path, model, t, quad_tol)[1]


# ---------------------------------------------------------------------------
# occupation time
# ---------------------------------------------------------------------------


def occupation_time(path: SamplePath, t: float, lo: float, hi: float | None = None) -> float:
    """Lebesgue measure of ``{s in [0, t] : X_s in [lo, hi]}``.

    With ``hi`` omitted the set is the single point ``lo``.  Computed exactly
    segment by segment: a sloped segment spends ``(hi - lo)/|gamma|`` at most
    in the set, a flat one either all or none of its length.
    """
    hi = lo if hi is None else hi
    if hi < lo:
        raise ConfigError("occupation interval needs lo <= hi")
    if not 0.0 <= t <= path.T:
        raise ConfigError(f"t must lie in [0, T={path.T}]")
    seg = _segments(path, t)
    if seg.gamma == 0.0:
        inside = (seg.base >= lo) & (seg.base <= hi)
        return math.fsum((seg.end - seg.start)[inside].tolist())
    s1 = seg.start + (lo - seg.base) / seg.gamma
    s2 = seg.start + (hi - seg.base) / seg.gamma
    a = np.maximum(np.minimum(s1, s2), seg.start)
    b = np.minimum(np.maximum(s1, s2), seg.end)
    return math.fsum(np.maximum(b - a, 0.0).tolist())
