"""Small quadrature toolkit used across the package.

Two rules are provided:

* fixed Gauss-Legendre rules on many panels at once (``gauss_panels``),
* adaptive Simpson with Richardson correction, vectorised over a batch of
  independent segments (``adaptive_simpson``).  Each segment keeps its own
  tolerance; only segments that fail their local test are bisected again.
"""
from __future__ import annotations

import functools
from typing import Callable

import numpy as np

from .errors import QuadratureError


@functools.lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_panels(a, b, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map an ``n``-point rule onto each panel ``[a[i], b[i]]``.

    Returns arrays of shape ``(len(a), n)`` with nodes and weights.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


def adaptive_simpson(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a,
    b,
    tol,
    max_depth: int = 48,
    min_depth: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a batch of segments with adaptive Simpson quadrature.

    Parameters
    ----------
    func : callable
        ``func(s, owner)`` evaluates the integrand at abscissae ``s`` where
        ``owner[i]`` is the index of the segment that ``s[i]`` belongs to.
        It returns an array of shape ``(k, len(s))`` for a ``k``-component
        integrand (or ``(len(s),)`` for a scalar one).
    a, b : array_like
        Segment endpoints, ``a <= b``.
    tol : float or array_like
        Absolute tolerance per segment.  Bisection halves the tolerance.
    max_depth : int
        Maximum bisection depth before :class:`QuadratureError` is raised.
    min_depth : int
        Number of forced bisections before a panel may be accepted, which
        guards against the coarse and refined estimates agreeing by accident.

    Returns
    -------
    integrals : ndarray, shape ``(k, n)``
    errors : ndarray, shape ``(n,)``
        Sum of the per-panel Richardson error estimates (max over components).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n_seg = a.size
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (n_seg,)).copy()

    def call(s, owner):
        out = np.asarray(func(s, owner), dtype=float)
        return out[None, :] if out.ndim == 1 else out

    owner = np.arange(n_seg)
    m = 0.5 * (a + b)
    fa, fm, fb = call(a, owner), call(m, owner), call(b, owner)
    k = fa.shape[0]
    total = np.zeros((k, n_seg))
    errors = np.zeros(n_seg)
    if n_seg == 0:
        return total, errors
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    for depth in range(max_depth + 1):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = call(lm, owner), call(rm, owner)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        diff = left + right - whole
        err = np.max(np.abs(diff), axis=0) / 15.0
        ok = err <= tol if depth >= min_depth else np.zeros(a.size, dtype=bool)
        # panels too short to split further are accepted as-is
        ok |= (m <= a) | (b <= m)
        if np.any(ok):
            contrib = left[:, ok] + right[:, ok] + diff[:, ok] / 15.0
            for c in range(k):
                np.add.at(total[c], owner[ok], contrib[c])
            np.add.at(errors, owner[ok], err[ok])
        keep = ~ok
        if not np.any(keep):
            return total, errors
        if depth == max_depth:
            worst = owner[keep][np.argmax(err[keep])]
            raise QuadratureError(
                f"adaptive Simpson did not converge on segment {worst} "
                f"[{a[keep][np.argmax(err[keep])]:.17g}, {b[keep][np.argmax(err[keep])]:.17g}]"
            )
        # children: left halves then right halves
        a_k, m_k, b_k = a[keep], m[keep], b[keep]
        a = np.concatenate([a_k, m_k])
        b = np.concatenate([m_k, b_k])
        fa = np.concatenate([fa[:, keep], fm[:, keep]], axis=1)
        fb = np.concatenate([fm[:, keep], fb[:, keep]], axis=1)
        fm = np.concatenate([flm[:, keep], frm[:, keep]], axis=1)
        whole = np.concatenate([left[:, keep], right[:, keep]], axis=1)
        tol = np.concatenate([tol[keep], tol[keep]]) * 0.5
        owner = np.concatenate([owner[keep], owner[keep]])
        m = 0.5 * (a + b)
    return total, errors  # pragma: no cover
