"""Parameters with prescribed combinatorics.

Superstable parameters are roots of ``c -> f_c^p(0)``; windows are found by a
coarse scan and refined by bisection.  The Fibonacci parameter is found by
bisection in the kneading order, which is monotone in ``c`` for this family,
and is then certified with :func:`~polylike.returns.fibonacci_return_times`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PolynomialFamily, RealInterval
from .errors import DepthExhausted, DomainError, NoParameterInBracket, NoRoot, WrongMinimalPeriod
from .returns import fibonacci_return_times
from .roots import bisect_root

log = logging.getLogger(__name__)

SCAN_POINTS = 10_000
RESIDUAL_TOL = 1e-12


def parameter_bounds(degree: int) -> RealInterval:
    """Real ``c_1`` with bounded critical orbit: ``[-2^(1/(l-1)), (l-1) l^(-l/(l-1))]``."""
    if degree < 2 or degree % 2:
        raise DomainError(f"degree must be an even integer >= 2, got {degree}")
    lo = -(2.0 ** (1.0 / (degree - 1)))
    hi = (degree - 1) * degree ** (-degree / (degree - 1))
    return RealInterval(lo, hi)


@dataclass(frozen=True)
class ParameterQuery:
    """``target`` is ``"superstable"``, ``"cascade"`` or ``"fibonacci"``; ``order`` is
    the period or the depth."""

    degree: int
    target: str
    order: int
    bracket: Optional[RealInterval] = None

    def __post_init__(self):
        if self.target not in ("superstable", "cascade", "fibonacci"):
            raise DomainError(f"unknown target {self.target!r}")
        full = parameter_bounds(self.degree)
        if self.bracket is not None and not full.contains_interval(self.bracket, tol=1e-12):
            raise DomainError(f"bracket {self.bracket.as_tuple()} leaves {full.as_tuple()}")

    @classmethod
    def parse(cls, text: str, degree: int) -> "ParameterQuery":
        """``superstable:3``, ``cascade:6``, ``fibonacci:9`` or with ``@lo,hi``."""
        head, _, br = text.partition("@")
        target, _, order = head.partition(":")
        bracket = None
        if br:
            lo, hi = (float(v) for v in br.split(","))
            bracket = RealInterval(lo, hi)
        return cls(degree, target.strip(), int(order), bracket)

    def solve(self) -> float:
        if self.target == "superstable":
            return superstable_parameter(self.degree, self.order, self.bracket)
        if self.target == "cascade":
            return cascade_limit(self.degree, self.order)
        return fibonacci_parameter(self.degree, self.order, self.bracket)


def _critical_iterate(degree: int, c, n: int):
    x = np.zeros_like(np.asarray(c, dtype=float))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n):
            x = np.clip(x, -1e6, 1e6) ** degree + c
    return x


def minimal_period(degree: int, c: float, p: int, tol: float = 1e-9) -> int:
    """Least divisor ``q`` of ``p`` with ``|f^q(0)| <= tol``, or ``p``."""
    for q in range(1, p):
        if p % q == 0 and abs(float(_critical_iterate(degree, c, q))) <= tol:
            return q
    return p


def superstable_parameters(degree: int, period: int, bracket: Optional[RealInterval] = None,
                           scan_points: int = SCAN_POINTS) -> list:
    """All roots of ``f^p(0) = 0`` of minimal period ``p`` found by the scan."""
    if period < 1:
        raise DomainError("period must be >= 1")
    br = bracket or parameter_bounds(degree)
    cs = np.linspace(br.lo, br.hi, scan_points)
    vals = _critical_iterate(degree, cs, period)
    sg = np.sign(vals)
    out = []
    for i in range(len(cs) - 1):
        if sg[i] == 0.0:
            cands = [float(cs[i])]
        elif sg[i] * sg[i + 1] < 0:
            try:
                cands = [bisect_root(lambda c: float(_critical_iterate(degree, c, period)),
                                     float(cs[i]), float(cs[i + 1]), xtol=1e-16)]
            except NoRoot:
                continue
        else:
            continue
        for c in cands:
            if c != 0.0 and minimal_period(degree, c, period) == period:
                out.append(c)
    return sorted(set(out))


def superstable_parameter(degree: int, period: int, bracket: Optional[RealInterval] = None,
                          scan_points: int = SCAN_POINTS) -> float:
    """The rightmost superstable parameter of minimal period ``period`` in ``bracket``.

    In the default bracket the rightmost root of period ``2^d`` is the one in
    the period doubling cascade.
    """
    br = bracket or parameter_bounds(degree)
    roots = superstable_parameters(degree, period, br, scan_points)
    if not roots:
        cs = np.linspace(br.lo, br.hi, scan_points)
        if np.all(np.sign(_critical_iterate(degree, cs, period)) == np.sign(_critical_iterate(degree, cs[0], period))):
            raise NoRoot(f"no sign change of f^{period}(0) in {br.as_tuple()}")
        raise WrongMinimalPeriod(f"every root of f^{period}(0) in {br.as_tuple()} has a smaller period")
    c = roots[-1]
    res = abs(float(_critical_iterate(degree, c, period)))
    if res > RESIDUAL_TOL:
        log.warning("superstable residual %.3g at c=%r", res, c)
    return c


def cascade_parameters(degree: int, depth: int, scan_points: int = SCAN_POINTS) -> list:
    """Superstable parameters of periods ``1, 2, 4, ..., 2^depth`` in the doubling cascade."""
    out = [0.0]
    if depth >= 1:
        out.append(-1.0)
    floor = parameter_bounds(degree).lo
    for d in range(2, depth + 1):
        prev, gap = out[-1], out[-2] - out[-1]
        hi = prev - 1e-9 * gap
        lo = max(floor, prev - gap)
        c = superstable_parameter(degree, 2 ** d, RealInterval(lo, hi), scan_points)
        out.append(c)
    return out


def cascade_limit(degree: int, depth: int, scan_points: int = SCAN_POINTS) -> float:
    """Superstable period-``2^depth`` parameter, used as a proxy for the cascade limit.

    The error decreases geometrically in ``depth``; no extrapolation is done.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    return cascade_parameters(degree, depth, scan_points)[-1]


# ---------------------------------------------------------------------------
# Fibonacci combinatorics


def fibonacci_numbers(n_max: int) -> list:
    S = [1, 2]
    while S[-1] < n_max:
        S.append(S[-1] + S[-2])
    return S


def fibonacci_kneading(n: int) -> str:
    """Itinerary ``c_1 c_2 ... c_n`` (letters L/R) of the Fibonacci combinatorics.

    The symbol at a closest return ``S_k`` is the opposite of the one at
    ``S_{k-2}``, and between closest returns the itinerary repeats the one
    started at ``c_1``.
    """
    S = fibonacci_numbers(n + 5)
    sym = {1: "L"}
    flip = {"L": "R", "R": "L"}
    for k in range(1, len(S)):
        for i in range(S[k - 1] + 1, S[k]):
            sym[i] = sym[i - S[k - 1]]
        sym[S[k]] = flip[sym[S[max(k - 2, 0)]]]
    return "".join(sym[i] for i in range(1, n + 1))


def itinerary(degree: int, c: float, n: int) -> str:
    x, out = c, []
    for _ in range(n):
        out.append("L" if x < 0 else ("R" if x > 0 else "C"))
        x = x ** degree + c
        if abs(x) > 1e6:
            out.extend("E" * (n - len(out)))
            break
    return "".join(out[:n])


_RANK = {"L": 0, "C": 1, "R": 2, "E": 3}


def kneading_compare(a: str, b: str) -> int:
    """Order of two itineraries for a map decreasing on the left branch."""
    flips = 0
    for x, y in zip(a, b):
        if x != y:
            s = -1 if _RANK[x] < _RANK[y] else 1
            return -s if flips % 2 else s
        if x == "L":
            flips += 1
    return 0


def fibonacci_parameter(degree: int, depth: int, bracket: Optional[RealInterval] = None,
                        kneading_length: int = 60) -> float:
    """Parameter whose closest return times are ``1, 2, 3, 5, 8, ...`` to ``depth`` terms."""
    if depth < 4:
        raise DomainError("depth must be >= 4")
    target = fibonacci_kneading(kneading_length)
    full = parameter_bounds(degree)
    br = bracket or RealInterval(full.lo + 1e-12, -0.5)
    lo, hi = br.lo, br.hi
    s_lo = kneading_compare(itinerary(degree, lo, kneading_length), target)
    s_hi = kneading_compare(itinerary(degree, hi, kneading_length), target)
    if s_lo == s_hi or s_lo == 0 or s_hi == 0:
        raise NoParameterInBracket(f"Fibonacci kneading is not bracketed by {br.as_tuple()}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        sm = kneading_compare(itinerary(degree, mid, kneading_length), target)
        if sm == 0:
            lo = hi = mid
            break
        if sm == s_lo:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    fam = PolynomialFamily(degree, c)
    try:
        S = fibonacci_return_times(fam, depth)
    except DepthExhausted as exc:
        raise NoParameterInBracket(str(exc)) from exc
    expected = tuple(fibonacci_numbers(10 ** 9)[:depth])
    if S != expected:
        raise NoParameterInBracket(f"closest returns {S} differ from {expected}")
    return c
