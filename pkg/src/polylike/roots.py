"""Bracketed root finding shared by every module.

Roots are located by bisection (``scipy.optimize.bisect``) to an absolute
tolerance and then polished with a single damped Newton step that is only
accepted when it stays inside the bracket and reduces the residual.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import optimize

from .errors import NoRoot

BISECT_XTOL = 1e-13
DOUBLE_ROOT_TOL = 1e-8


def _numeric_derivative(func: Callable[[float], float], x: float) -> float:
    h = 1e-7 * max(1.0, abs(x))
    return (func(x + h) - func(x - h)) / (2.0 * h)


def newton_polish(func, x, lo, hi, dfunc=None, damping=1.0):
    """One damped Newton step from ``x``; returns ``x`` if the step does not help."""
    fx = func(x)
    if fx == 0.0:
        return x
    d = dfunc(x) if dfunc is not None else _numeric_derivative(func, x)
    if not np.isfinite(d) or d == 0.0:
        return x
    step = damping * fx / d
    for _ in range(8):
        y = x - step
        if lo <= y <= hi:
            fy = func(y)
            if np.isfinite(fy) and abs(fy) < abs(fx):
                return y
        step *= 0.5
    return x


def bisect_root(func, a, b, xtol=BISECT_XTOL, dfunc=None):
    """Root of ``func`` in ``[a, b]`` by bisection plus a Newton polish.

    Raises :class:`NoRoot` when the endpoints do not bracket a sign change.
    """
    lo, hi = (a, b) if a <= b else (b, a)
    flo, fhi = func(lo), func(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoRoot(f"no sign change on [{lo!r}, {hi!r}]")
    x = optimize.bisect(func, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(newton_polish(func, x, lo, hi, dfunc=dfunc))


def bisect_predicate(pred, good, bad, xtol=BISECT_XTOL, max_iter=200):
    """Boundary between ``good`` (pred true) and ``bad`` (pred false) by bisection.

    Returns the last point known to satisfy the predicate.
    """
    if not pred(good):
        raise NoRoot("predicate false at the good end")
    for _ in range(max_iter):
        if abs(bad - good) <= xtol:
            break
        mid = 0.5 * (good + bad)
        if mid == good or mid == bad:
            break
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


def scan_roots(func, a, b, step=1e-4, dfunc=None, double_tol=DOUBLE_ROOT_TOL):
    """All roots of a vectorised ``func`` on ``[a, b]``.

    A uniform grid of the given step is scanned for sign changes, each of which
    is refined by :func:`bisect_root`.  Tangential (double) roots are found from
    sign changes of the derivative where ``|func|`` is below ``double_tol``;
    they appear twice in the returned list.
    """
    n = max(2, int(np.ceil((b - a) / step)) + 1)
    xs = np.linspace(a, b, n)
    with np.errstate(all="ignore"):
        ys = np.asarray(func(xs), dtype=float)
    scalar = lambda x: float(func(np.asarray(x, dtype=float)))
    roots: list[float] = []
    for i in np.nonzero(ys == 0.0)[0]:
        roots.append(float(xs[i]))
    sgn = np.sign(ys)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        roots.append(bisect_root(scalar, xs[i], xs[i + 1]))

    if dfunc is not None:
        with np.errstate(all="ignore"):
            ds = np.asarray(dfunc(xs), dtype=float)
        dscalar = lambda x: float(dfunc(np.asarray(x, dtype=float)))
    else:
        ds = np.gradient(ys, xs)
        dscalar = lambda x: _numeric_derivative(scalar, x)
    doubles: list[float] = []
    dsg = np.sign(ds)
    candidates = [float(xs[i]) for i in np.nonzero(ds == 0.0)[0]]
    for i in np.nonzero(dsg[:-1] * dsg[1:] < 0)[0]:
        try:
            candidates.append(bisect_root(dscalar, xs[i], xs[i + 1]))
        except NoRoot:
            continue
    for x in sorted(candidates):
        if abs(scalar(x)) <= double_tol and all(abs(x - d) > step for d in doubles):
            doubles.append(x)
    if doubles:
        roots = [r for r in roots if min(abs(r - d) for d in doubles) > 2 * step]
        for d in doubles:
            roots.extend([d, d])
    return sorted(roots)
