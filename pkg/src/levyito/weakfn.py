"""Continuous, weakly differentiable functions f(t, x) and mollification.

A :class:`WeakFunction` carries classical partial derivatives that are valid
off a finite set of breakpoint lines ``x = c`` and ``t = tau``.  On top of it
this module provides the even reflection in time, the standard mollifier,
convolution smoothing of ``f`` and of its derivatives, the derivative bound
for mollified functions, and an integration-by-parts check of the weak
derivatives against compactly supported bump functions.
"""
from __future__ import annotations

import functools
import math
import re
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError
from .quadrature import gauss_legendre, gauss_panels

Array = np.ndarray
INF = math.inf

#: Gauss-Legendre nodes per axis and sub-panel used by :func:`mollify`.
MOLLIFY_NODES = 64


def _zero(t, x):
    return np.zeros(np.broadcast(np.asarray(t, float), np.asarray(x, float)).shape)


@dataclass(frozen=True, eq=False)
class WeakFunction:
    """``f : [0, inf) x U -> R`` with derivative evaluators off breakpoints.

    Parameters
    ----------
    f, dt, dx : callable
        Vectorised ``(t, x) -> array``.  ``dt`` and ``dx`` are the classical
        partials wherever they exist; their values on breakpoints are
        arbitrary but finite.
    domain : (float, float)
        Open interval ``U`` for ``x``.
    time_domain : (float, float)
        Closed lower end for ``t``; ``(0, inf)`` before reflection.
    x_breaks, t_breaks : tuple of float
        Lines where the derivatives may fail to exist.
    bound : callable, optional
        ``bound(t0, t1, x0, x1)`` returning an upper bound for
        ``max(|dt|, |dx|)`` on the rectangle.  Without it the bound is probed.
    """

    name: str
    f: Callable
    dt: Callable = _zero
    dx: Callable = _zero
    domain: tuple[float, float] = (-INF, INF)
    time_domain: tuple[float, float] = (0.0, INF)
    x_breaks: tuple[float, ...] = ()
    t_breaks: tuple[float, ...] = ()
    bound: Callable | None = None
    params: tuple = ()
    oscillation: "Oscillation | None" = None

    def __call__(self, t, x):
        return self.f(np.asarray(t, dtype=float), np.asarray(x, dtype=float))

    def partial(self, which: str) -> Callable:
        if which in ("t", "dt"):
            return self.dt
        if which in ("x", "dx"):
            return self.dx
        raise ValueError(f"which must be 't' or 'x', got {which!r}")

    def in_domain(self, x) -> np.ndarray:
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        return (x > lo) & (x < hi)

    def local_bound(self, t0: float, t1: float, x0: float, x1: float) -> float:
        """Upper bound for ``max(|df/dt|, |df/dx|)`` on ``[t0, t1] x [x0, x1]``.

        Uses the analytic bound when one is attached, otherwise the maximum
        over a 101 x 101 probe grid inflated by 5%.
        """
        if self.bound is not None:
            return float(self.bound(t0, t1, x0, x1))
        tt = np.linspace(t0, t1, 101)
        xx = np.linspace(x0, x1, 101)
        T, X = np.meshgrid(tt, xx, indexing="ij")
        inside = self.in_domain(X)
        if not np.all(inside):
            return INF
        peak = max(np.max(np.abs(self.dt(T, X))), np.max(np.abs(self.dx(T, X))))
        return 1.05 * float(peak)

    def lipschitz(self, t0: float, t1: float, x0: float, x1: float) -> float:
        """Spatial Lipschitz constant on the rectangle (the same bound as :meth:`local_bound`)."""
        return self.local_bound(t0, t1, x0, x1)


@dataclass(frozen=True)
class Oscillation:
    """Structure ``g(x) = smooth(x) + a_cos(x) cos(1/(x-c)) + a_sin(x) sin(1/(x-c))``.

    Declared for ``f`` and ``df/dx`` of functions that oscillate infinitely
    fast at ``x = c``, so integrals against test functions can use a
    Fourier-weighted rule after the substitution ``u = 1/(x-c)``.  Each
    entry maps ``"f"`` or ``"dx"`` to ``(smooth, a_cos, a_sin)``.
    """

    center: float
    parts: dict


# ---------------------------------------------------------------------------
# bundled functions
# ---------------------------------------------------------------------------


def _sup_abs(x0: float, x1: float) -> float:
    return max(abs(x0), abs(x1))


def _inf_abs(t0: float, t1: float) -> float:
    return 0.0 if t0 <= 0.0 <= t1 else min(abs(t0), abs(t1))


def xsq_sin_inv() -> WeakFunction:
    """``x^2 sin(1/x)`` with value 0 at the origin.

    Differentiable everywhere but with a discontinuous derivative at 0, and
    not a difference of two convex functions.
    """

    def f(t, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = x * x * np.sin(1.0 / x)
        return np.where(x == 0.0, 0.0, out) + 0.0 * t

    def dx(t, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * x * np.sin(1.0 / x) - np.cos(1.0 / x)
        return np.where(x == 0.0, 0.0, out) + 0.0 * t

    osc = Oscillation(0.0, {
        "f": (_zero_x, _zero_x, _square),
        "dx": (_zero_x, _minus_one, _twice),
    })
    return WeakFunction("xsq_sin_inv", f, _zero, dx, x_breaks=(0.0,),
                        bound=lambda t0, t1, x0, x1: 2.0 * _sup_abs(x0, x1) + 1.0,
                        oscillation=osc)


def _zero_x(x):
    return 0.0 * x


def _minus_one(x):
    return -1.0 + 0.0 * x


def _twice(x):
    return 2.0 * x


def _square(x):
    return x * x


def abs_fn() -> WeakFunction:
    """``|x|``."""
    return WeakFunction(
        "abs",
        lambda t, x: np.abs(x) + 0.0 * t,
        _zero,
        lambda t, x: np.sign(x) + 0.0 * t,
        x_breaks=(0.0,),
        bound=lambda t0, t1, x0, x1: 1.0,
    )


def call_payoff(K: float) -> WeakFunction:
    """``(x - K)^+``."""
    K = float(K)
    return WeakFunction(
        "call_payoff",
        lambda t, x: np.maximum(x - K, 0.0) + 0.0 * t,
        _zero,
        lambda t, x: np.where(x > K, 1.0, 0.0) + 0.0 * t,
        x_breaks=(K,),
        bound=lambda t0, t1, x0, x1: 1.0 if x1 > K else 0.0,
        params=(K,),
    )


def barrier_payoff(K: float, D: float) -> WeakFunction:
    """``(x - K)^+`` on the open domain ``x < D`` (the knock-out region is excluded)."""
    K, D = float(K), float(D)
    if not D > K:
        raise ConfigError(f"barrier_payoff needs D > K, got K={K}, D={D}")
    base = call_payoff(K)
    return replace(base, name="barrier_payoff", domain=(-INF, D), params=(K, D))


def affine(a: float, b: float, c: float) -> WeakFunction:
    """``a + b t + c x``."""
    a, b, c = float(a), float(b), float(c)
    return WeakFunction(
        "affine",
        lambda t, x: a + b * t + c * x,
        lambda t, x: b + 0.0 * (t + x),
        lambda t, x: c + 0.0 * (t + x),
        bound=lambda t0, t1, x0, x1: max(abs(b), abs(c)),
        params=(a, b, c),
    )


def smooth_exp() -> WeakFunction:
    """``e^{-t} x^2``."""

    def bound(t0, t1, x0, x1):
        s = _sup_abs(x0, x1)
        return math.exp(-_inf_abs(t0, t1)) * max(s * s, 2.0 * s)

    return WeakFunction(
        "smooth_exp",
        lambda t, x: np.exp(-t) * x * x,
        lambda t, x: -np.exp(-t) * x * x,
        lambda t, x: 2.0 * np.exp(-t) * x,
        bound=bound,
    )


def constant(value: float) -> WeakFunction:
    v = float(value)
    return WeakFunction("constant", lambda t, x: v + 0.0 * (t + x), bound=lambda *r: 0.0, params=(v,))


def identity() -> WeakFunction:
    """``f(t, x) = x``."""
    return affine(0.0, 0.0, 1.0)


REGISTRY: dict[str, Callable[..., WeakFunction]] = {
    "xsq_sin_inv": xsq_sin_inv,
    "abs": abs_fn,
    "call_payoff": call_payoff,
    "barrier_payoff": barrier_payoff,
    "affine": affine,
    "smooth_exp": smooth_exp,
    "constant": constant,
    "identity": identity,
}

_SPEC_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_function_spec(text: str) -> WeakFunction:
    """Look up a bundled function by a spec such as ``"call_payoff(100)"``."""
    m = _SPEC_RE.match(text)
    if not m or m.group(1) not in REGISTRY:
        raise ConfigError(f"unknown function {text!r}; choose from {', '.join(REGISTRY)}")
    args = m.group(2)
    try:
        values = [float(a) for a in args.split(",")] if args and args.strip() else []
        return REGISTRY[m.group(1)](*values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad arguments for function {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# reflection
# ---------------------------------------------------------------------------


def extend_reflect(fn: WeakFunction) -> WeakFunction:
    """Even extension in time: ``f~(t, x) = f(|t|, x)``.

    ``df~/dt(t, x) = -df/dt(-t, x)`` for ``t < 0`` while ``df~/dx`` is even
    in ``t``.  The line ``t = 0`` becomes a breakpoint.
    """
    f, dt, dx, bnd = fn.f, fn.dt, fn.dx, fn.bound

    def ef(t, x):
        return f(np.abs(t), x)

    def edt(t, x):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0, -1.0, 1.0) * dt(np.abs(t), x)

    def edx(t, x):
        return dx(np.abs(np.asarray(t, dtype=float)), x)

    ebound = None
    if bnd is not None:
        def ebound(t0, t1, x0, x1):
            if t0 <= 0.0 <= t1:
                return bnd(0.0, max(-t0, t1), x0, x1)
            return bnd(min(abs(t0), abs(t1)), max(abs(t0), abs(t1)), x0, x1)

    t_breaks = tuple(sorted({0.0, *fn.t_breaks, *(-b for b in fn.t_breaks)}))
    return replace(fn, name=f"{fn.name}~", f=ef, dt=edt, dx=edx,
                   time_domain=(-INF, INF), t_breaks=t_breaks, bound=ebound)


# ---------------------------------------------------------------------------
# mollifier
# ---------------------------------------------------------------------------


def _bump(r2):
    """``exp(-1/(1-r^2))`` on ``r^2 < 1``, zero outside."""
    r2 = np.asarray(r2, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.exp(-1.0 / (1.0 - r2))
    return np.where(r2 < 1.0, out, 0.0)


@functools.lru_cache(maxsize=4)
def mollifier_constant(d: int) -> float:
    """``c`` with ``c * int_{|x|<1} exp(-1/(1-|x|^2)) dx = 1``."""
    if d == 1:
        half, _ = integrate.quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), 0.0, 1.0,
                                 epsabs=1e-15, epsrel=1e-13, limit=200)
        mass = 2.0 * half
    elif d == 2:
        radial, _ = integrate.quad(lambda r: r * math.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0,
                                   epsabs=1e-15, epsrel=1e-13, limit=200)
        mass = 2.0 * math.pi * radial
    else:
        raise ValueError(f"mollifier dimension must be 1 or 2, got {d}")
    return 1.0 / mass


@dataclass(frozen=True)
class Mollifier:
    """Standard mollifier ``eta^eps(x) = eps^{-d} c exp(-1/(1-|x/eps|^2))``.

    ``nodes``/``weights`` integrate over the unit ball: Gauss-Legendre on
    ``[-1, 1]`` for ``d = 1``; for ``d = 2`` Gauss-Legendre in the radius
    times the trapezoidal rule in the angle, which is spectrally accurate
    for the rotation-invariant kernel.
    """

    epsilon: float
    d: int
    c: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        r2 = (y * y if self.d == 1 else np.sum(y * y, axis=-1)) / self.epsilon ** 2
        return self.c * _bump(r2) / self.epsilon ** self.d

    def unit(self, z) -> np.ndarray:
        """Kernel on the unit ball (``epsilon = 1``)."""
        z = np.asarray(z, dtype=float)
        r2 = z * z if self.d == 1 else np.sum(z * z, axis=-1)
        return self.c * _bump(r2)

    def mass(self) -> float:
        """Quadrature value of ``int eta^eps`` (scaled back to physical units)."""
        return float(np.sum(self.weights * self.unit(self.nodes)))


def mollifier_kernel(epsilon: float, d: int = 1, n_nodes: int = MOLLIFY_NODES) -> Mollifier:
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    c = mollifier_constant(d)
    x, w = gauss_legendre(n_nodes)
    if d == 1:
        nodes, weights = np.array(x), np.array(w)
    else:
        r, wr = 0.5 * (x + 1.0), 0.5 * w
        theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        R, TH = np.meshgrid(r, theta, indexing="ij")
        nodes = np.stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()], axis=-1)
        weights = (np.outer(wr * r, np.full(n_nodes, 2.0 * np.pi / n_nodes))).ravel()
    return Mollifier(float(epsilon), d, c, nodes, weights)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


def _axis_rule(center: float, eps: float, breaks: Sequence[float], n: int, panels: int):
    """Offsets ``z`` in [-1, 1] and weights, split at breakpoints and into equal panels."""
    cuts = [(b - center) / eps for b in breaks if abs(b - center) < eps]
    edges = np.unique(np.concatenate([np.linspace(-1.0, 1.0, panels + 1), cuts]))
    z, w = gauss_panels(edges[:-1], edges[1:], n)
    z, w = z.ravel(), w.ravel()
    # nodes landing exactly on a breakpoint are nudged off it
    for b in breaks:
        hit = center + eps * z == b
        z = np.where(hit, z + 1e-12, z)
    return z, w


def _check_ball(fn: WeakFunction, eps: float, t: float, x: float, d: int) -> None:
    lo, hi = fn.domain
    if not (x - eps > lo and x + eps < hi):
        raise DomainError(f"domain violation: x-ball [{x - eps}, {x + eps}] leaves U={fn.domain}")
    t_lo = t - eps if d == 2 else t
    if t_lo < fn.time_domain[0]:
        raise DomainError(
            f"domain violation: t-ball reaches {t_lo} < {fn.time_domain[0]}; apply extend_reflect first")


def _convolve(g: Callable, fn: WeakFunction, eps: float, t: float, x: float, d: int,
              n: int, panels: int) -> float:
    c = mollifier_constant(d)
    zx, wx = _axis_rule(x, eps, fn.x_breaks, n, panels)
    if d == 1:
        k = c * _bump(zx * zx)
        vals = g(np.full_like(zx, t), x + eps * zx)
        norm = np.sum(wx * k)
        return float(np.sum(wx * k * vals) / norm)
    zt, wt = _axis_rule(t, eps, fn.t_breaks, n, panels)
    ZT, ZX = np.meshgrid(zt, zx, indexing="ij")
    W = np.outer(wt, wx)
    k = c * _bump(ZT * ZT + ZX * ZX)
    vals = g(t + eps * ZT, x + eps * ZX)
    norm = np.sum(W * k)
    return float(np.sum(W * k * vals) / norm)


def _adaptive_convolve(g, fn, eps, t, x, d, n, tol=1e-10, max_panels=None):
    """Convolution with a self-check: compare ``n`` and ``n/2`` nodes, add panels until they agree."""
    max_panels = max_panels or (64 if d == 1 else 8)
    panels = 1
    while True:
        hi = _convolve(g, fn, eps, t, x, d, n, panels)
        lo = _convolve(g, fn, eps, t, x, d, n // 2, panels)
        err = abs(hi - lo)
        if err <= tol * max(1.0, abs(hi)) or panels >= max_panels:
            return hi, err
        panels *= 2


def mollify(fn: WeakFunction, epsilon: float, point, d: int = 1, n_nodes: int = MOLLIFY_NODES,
            return_error: bool = False):
    """``f^eps(p) = int eta^eps(p - y) f(y) dy``.

    ``d = 1`` smooths in ``x`` at fixed ``t``; ``d = 2`` smooths jointly in
    ``(t, x)`` and needs ``t >= eps`` unless ``fn`` was reflected.  The
    kernel's discrete mass is renormalised to one, and the quadrature is
    split at breakpoints so every panel integrates a smooth function.
    """
    t, x = float(point[0]), float(point[1])
    _check_ball(fn, epsilon, t, x, d)
    val, err = _adaptive_convolve(fn.f, fn, epsilon, t, x, d, n_nodes)
    return (val, err) if return_error else val


def mollify_derivative(fn: WeakFunction, epsilon: float, point, which: str = "x", d: int = 1,
                       n_nodes: int = MOLLIFY_NODES, return_error: bool = False):
    """``eta^eps * (partial f)`` at ``point``, which equals ``partial (f^eps)``."""
    t, x = float(point[0]), float(point[1])
    _check_ball(fn, epsilon, t, x, d)
    val, err = _adaptive_convolve(fn.partial(which), fn, epsilon, t, x, d, n_nodes)
    return (val, err) if return_error else val


@dataclass(frozen=True)
class KeyBound:
    lhs: float
    rhs: float
    holds: bool
    slack: float


def key_bound_check(fn: WeakFunction, epsilon: float, point, which: str = "x", d: int = 1) -> KeyBound:
    """Check ``|partial(f^eps)(p)| <= sup |partial f|`` over the eps-neighbourhood of ``p``.

    ``slack`` is the quadrature error estimate plus a rounding allowance;
    an infinite right-hand side holds trivially.
    """
    t, x = float(point[0]), float(point[1])
    val, err = mollify_derivative(fn, epsilon, point, which, d, return_error=True)
    lhs = abs(val)
    t0, t1 = (t - epsilon, t + epsilon) if d == 2 else (t, t)
    rhs = fn.local_bound(t0, t1, x - epsilon, x + epsilon)
    slack = err + 1e-12 * max(1.0, rhs if math.isfinite(rhs) else 0.0)
    holds = (not math.isfinite(rhs)) or lhs <= rhs + slack
    return KeyBound(lhs, rhs, holds, slack)


# ---------------------------------------------------------------------------
# test functions and the integration-by-parts check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BumpFunction:
    """Smooth compactly supported ``phi(x) = p((x-c)/w) exp(-1/(1-((x-c)/w)^2))``.

    ``p`` is the polynomial with coefficients ``coef`` (lowest degree first).
    """

    center: float
    width: float
    coef: tuple[float, ...] = (1.0,)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def __call__(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        return np.polynomial.polynomial.polyval(z, self.coef) * _bump(z * z)

    def derivative(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        p = np.polynomial.polynomial.polyval(z, self.coef)
        dp = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(self.coef))
        with np.errstate(divide="ignore", invalid="ignore"):
            dlog = np.where(z * z < 1.0, -2.0 * z / (1.0 - z * z) ** 2, 0.0)
        return (dp + p * dlog) * _bump(z * z) / self.width


def bundled_test_functions(n: int = 20, seed: int = 7, around: float = 0.0, spread: float = 1.0):
    """``n`` reproducible bumps centred in ``around +- spread`` with random polynomial factors."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        c = around + spread * rng.uniform(-1.0, 1.0)
        w = spread * rng.uniform(0.3, 1.0)
        coef = tuple(rng.normal(size=rng.integers(1, 4)))
        out.append(BumpFunction(float(c), float(w), coef))
    return out


@dataclass(frozen=True)
class IBPResult:
    derivative_side: float
    parts_side: float

    @property
    def error(self) -> float:
        return abs(self.derivative_side - self.parts_side)


def _quad_1d(g, a, b, points=(), return_error=False):
    pts = [p for p in points if a < p < b]
    val, err = integrate.quad(g, a, b, points=pts or None, limit=5000, epsabs=1e-13, epsrel=1e-12)
    return (val, err) if return_error else val


def _oscillatory_integral(parts, c: float, weight: Callable, a: float, b: float,
                          near: float = 0.05, return_error: bool = False):
    """``int_a^b g(x) weight(x) dx`` for ``g`` in :class:`Oscillation` form around ``c``.

    The smooth part uses ordinary adaptive quadrature.  Unless both ends lie
    beyond ``near`` on the same side of ``c``, the oscillating part is taken
    as a difference of integrals from ``c`` outwards; within ``near`` of
    ``c`` the substitution ``x = c + s/u`` turns ``cos(1/(x-c))`` into
    ``cos(u)`` on ``[1/h, inf)``, handled by QUADPACK's Fourier rule.
    """
    smooth, a_cos, a_sin = parts
    total, err = _quad_1d(lambda x: float(smooth(x) * weight(x)), a, b, (c,), return_error=True)

    def osc(x):
        z = 1.0 / (x - c)
        return float((a_cos(x) * np.cos(z) + a_sin(x) * np.sin(z)) * weight(x))

    def from_center(end):
        # int_c^end of the oscillating part
        if end == c:
            return 0.0, 0.0
        s = 1.0 if end > c else -1.0
        h = min(near, abs(end - c))
        far, e = 0.0, 0.0
        if abs(end - c) > h:
            far, e = _quad_1d(osc, *sorted((c + s * h, end)), return_error=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            # on [c, c+h] (or [c-h, c]) 1/(x-c) = s*u: cos -> cos(u), sin -> s*sin(u)
            vc, ec = integrate.quad(lambda u: float(a_cos(c + s / u) * weight(c + s / u)) / (u * u),
                                    1.0 / h, np.inf, weight="cos", wvar=1.0, limlst=200, epsabs=1e-14)
            vs, es = integrate.quad(lambda u: float(a_sin(c + s / u) * weight(c + s / u)) / (u * u),
                                    1.0 / h, np.inf, weight="sin", wvar=1.0, limlst=200, epsabs=1e-14)
        return s * (far + vc + s * vs), e + ec + es

    if (a - c) * (b - c) > 0 and min(abs(a - c), abs(b - c)) > near:
        v, e = _quad_1d(osc, a, b, return_error=True)
    else:
        vb, eb = from_center(b)
        va, ea = from_center(a)
        v, e = vb - va, eb + ea
    total += v
    err += e
    return (total, err) if return_error else total


def integration_by_parts_check(fn: WeakFunction, phi: BumpFunction, t: float = 0.0) -> IBPResult:
    """Compare ``int (df/dx) phi dx`` with ``-int f phi' dx`` at fixed ``t``."""
    a, b = phi.support
    lo, hi = fn.domain
    if not (a > lo and b < hi):
        raise DomainError("domain violation: test function support leaves U")
    osc = fn.oscillation
    if osc is not None:
        lhs = _oscillatory_integral(osc.parts["dx"], osc.center, phi, a, b)
        rhs = -_oscillatory_integral(osc.parts["f"], osc.center, phi.derivative, a, b)
        return IBPResult(lhs, rhs)
    lhs = _quad_1d(lambda x: float(fn.dx(t, x)) * float(phi(x)), a, b, fn.x_breaks)
    rhs = -_quad_1d(lambda x: float(fn.f(t, x)) * float(phi.derivative(x)), a, b, fn.x_breaks)
    return IBPResult(lhs, rhs)


def integration_by_parts_check_2d(fn: WeakFunction, phi_t: BumpFunction, phi_x: BumpFunction,
                                  which: str = "x", n_nodes: int = 64, panels: int = 16) -> IBPResult:
    """Two-dimensional check with ``phi(t, x) = phi_t(t) phi_x(x)`` on a tensor Gauss-Legendre grid."""
    ta, tb = phi_t.support
    xa, xb = phi_x.support
    if ta < fn.time_domain[0] or not (xa > fn.domain[0] and xb < fn.domain[1]):
        raise DomainError("domain violation: test function support leaves the domain")

    def rule(a, b, breaks):
        edges = np.unique(np.concatenate([np.linspace(a, b, panels + 1), [c for c in breaks if a < c < b]]))
        z, w = gauss_panels(edges[:-1], edges[1:], n_nodes)
        return z.ravel(), w.ravel()

    tt, wt = rule(ta, tb, fn.t_breaks)
    xx, wx = rule(xa, xb, fn.x_breaks)
    T, X = np.meshgrid(tt, xx, indexing="ij")
    W = np.outer(wt, wx)
    if which == "x":
        dphi = phi_t(T) * phi_x.derivative(X)
    else:
        dphi = phi_t.derivative(T) * phi_x(X)
    lhs = float(np.sum(W * fn.partial(which)(T, X) * phi_t(T) * phi_x(X)))
    rhs = -float(np.sum(W * fn.f(T, X) * dphi))
    return IBPResult(lhs, rhs)
