"""The unicritical family f(z) = z**degree + c1 and its basic dynamics.

Everything downstream derives from :class:`PolynomialFamily`.  The critical
point is always 0 and the symmetry of the family is ``tau(z) = -z``.
Complex points are plain Python/numpy ``complex`` values; functions that accept
points are vectorised over numpy arrays where that is cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BranchAmbiguity, DomainError, NoSuchFixedPoint
from .roots import bisect_root

ComplexPoint = complex

AMBIGUITY_TOL = 1e-8
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class PolynomialFamily:
    """``f(z) = z**degree + critical_value`` with an even degree >= 2."""

    degree: int
    critical_value: float

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2 or self.degree % 2:
            raise DomainError(f"degree must be an even integer >= 2, got {self.degree!r}")
        if not math.isfinite(self.critical_value):
            raise DomainError("critical value must be finite")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "critical_value", float(self.critical_value))

    @property
    def c1(self) -> float:
        return self.critical_value

    @property
    def escape_radius(self) -> float:
        """Orbits leaving the disc of this radius tend to infinity."""
        return max(2.0, abs(self.critical_value)) + 1.0

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        return self.degree * ipow(z, self.degree - 1)

    def iterate(self, z, n: int):
        for _ in range(n):
            z = evaluate(self, z)
        return z


@dataclass(frozen=True)
class RealInterval:
    """A non-degenerate closed interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    @classmethod
    def symmetric(cls, a: float) -> "RealInterval":
        return cls(-abs(a), abs(a))

    @classmethod
    def hull(cls, *points: float) -> "RealInterval":
        return cls(min(points), max(points))

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interior(self, x: float, margin: float = 0.0) -> bool:
        return self.lo + margin < x < self.hi - margin

    def contains_interval(self, other: "RealInterval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def overlap(self, other: "RealInterval") -> float:
        """Length of the intersection (0 when disjoint)."""
        return max(0.0, min(self.hi, other.hi) - max(self.lo, other.lo))

    def scaled(self, factor: float) -> "RealInterval":
        c, r = self.center, self.radius * factor
        return RealInterval(c - r, c + r)

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class OrbitSegment:
    """Orbit points ``(x, f(x), ..., f^n(x))`` plus an escape flag."""

    points: tuple
    escaped: bool = False
    escape_index: int | None = None

    @property
    def length(self) -> int:
        return len(self.points) - 1

    def __getitem__(self, k):
        return self.points[k]

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


def ipow(z, n: int):
    """Integer power by repeated squaring.

    Unlike ``z ** n`` through ``exp(n log z)`` this keeps
    ``ipow(conj(z), n) == conj(ipow(z, n))`` bit for bit.
    """
    result = None
    base = z
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def evaluate(fam: PolynomialFamily, z, report_escape: bool = False):
    """``z**degree + c1``; real input gives real output.

    With ``report_escape`` the pair ``(value, escaped)`` is returned, where
    ``escaped`` says the value lies beyond the escape radius.  Escape is a
    state, not an error.
    """
    w = ipow(z, fam.degree) + fam.critical_value
    if report_escape:
        return w, bool(np.any(np.abs(w) > fam.escape_radius))
    return w


def tau(fam: PolynomialFamily, w):
    """The symmetry ``tau(w) = -w``; ``f(tau(w)) = f(w)``."""
    return -w


def orbit(fam: PolynomialFamily, x, n: int) -> OrbitSegment:
    """Forward orbit ``(x, f(x), ..., f^n(x))``, stopping early on escape."""
    pts = [x]
    R = fam.escape_radius
    for k in range(n):
        x = evaluate(fam, x)
        pts.append(x)
        if abs(x) > R:
            return OrbitSegment(tuple(pts), escaped=True, escape_index=k + 1)
    return OrbitSegment(tuple(pts))


def critical_orbit(fam: PolynomialFamily, n: int) -> OrbitSegment:
    """``(c_1, ..., c_n)`` with ``c_{k+1} = f(c_k)``; escape is flagged."""
    if n < 1:
        raise DomainError("n must be >= 1")
    seg = orbit(fam, fam.critical_value, n - 1)
    if seg.escaped:
        return OrbitSegment(seg.points, True, seg.escape_index + 1)
    if abs(fam.critical_value) > fam.escape_radius:
        return OrbitSegment(seg.points, True, 1)
    return seg


def orientation_reversing_fixed_point(fam: PolynomialFamily) -> float:
    """The real fixed point with negative derivative (it lies on the negative axis).

    ``x**l + c1 - x`` is strictly decreasing on ``(-inf, 0]`` so there is such a
    point exactly when ``c1 < 0``.
    """
    c1 = fam.critical_value
    if not c1 < 0.0:
        raise NoSuchFixedPoint(f"c1={c1} has no orientation reversing fixed point")
    g = lambda x: x**fam.degree + c1 - x
    dg = lambda x: fam.degree * x ** (fam.degree - 1) - 1.0
    q = bisect_root(g, -fam.escape_radius, 0.0, dfunc=dg)
    if fam.derivative(q) >= 0.0:
        raise NoSuchFixedPoint("fixed point found has non-negative derivative")
    return q


def inverse_branch_real(fam: PolynomialFamily, w: float, side: int) -> float:
    """``side * (w - c1)**(1/degree)``: the real preimage of ``w`` on the given side."""
    if w < fam.critical_value:
        raise DomainError(f"{w} < c1 = {fam.critical_value} has no real preimage")
    r = (w - fam.critical_value) ** (1.0 / fam.degree)
    return r if side >= 0 else -r


def _all_roots(fam: PolynomialFamily, w: np.ndarray) -> np.ndarray:
    """The ``degree`` preimages of each entry of ``w``; shape ``(degree, len(w))``."""
    rho = np.abs(w - fam.critical_value) ** (1.0 / fam.degree)
    phi = np.angle(w - fam.critical_value)
    k = np.arange(fam.degree)[:, None]
    return rho[None, :] * np.exp(1j * (phi[None, :] + 2.0 * np.pi * k) / fam.degree)


def pullback_complex_along_orbit(fam: PolynomialFamily, target, reference: Sequence[float]):
    """Preimage of ``target`` under ``f^n`` following a real reference orbit.

    ``reference`` is ``x_0, ..., x_n`` with ``f(x_k) = x_{k+1}``.  Each inverse
    step picks the ``degree``-th root nearest to the matching reference point.
    Raises :class:`BranchAmbiguity` when the two nearest roots are equally close
    (relative tolerance 1e-8), which happens near critical preimages.
    """
    ref = [float(x) for x in reference]
    scalar = np.ndim(target) == 0
    w = np.atleast_1d(np.asarray(target, dtype=complex)).copy()
    for k in range(len(ref) - 2, -1, -1):
        roots = _all_roots(fam, w)
        dist = np.abs(roots - ref[k])
        order = np.argsort(dist, axis=0)
        d1 = np.take_along_axis(dist, order[:1], axis=0)[0]
        d2 = np.take_along_axis(dist, order[1:2], axis=0)[0]
        if np.any(d2 - d1 <= AMBIGUITY_TOL * np.maximum(d2, 1e-300)):
            raise BranchAmbiguity(f"two roots equidistant from reference point x_{k}={ref[k]}")
        w = np.take_along_axis(roots, order[:1], axis=0)[0]
    return complex(w[0]) if scalar else w


def continue_inverse_branch(fam: PolynomialFamily, target, reference: Sequence[float]):
    """Univalent continuation of a monotone real inverse branch of ``f^n``.

    At each step the preimage is ``sign(x_k) * principal_root(w - c1)``.  On the
    slit plane of the real pullback interval this is the analytic extension of
    the real branch, so it is the map used to pull back whole domains.  Real
    inputs whose radicand is negative are outside the slit plane and raise
    :class:`DomainError`.
    """
    ref = [float(x) for x in reference]
    scalar = np.ndim(target) == 0
    w = np.atleast_1d(np.asarray(target, dtype=complex)).copy()
    for k in range(len(ref) - 2, -1, -1):
        if ref[k] == 0.0:
            raise DomainError("reference orbit passes through the critical point")
        rad = w - fam.critical_value
        if np.any((rad.imag == 0.0) & (rad.real < 0.0)):
            raise DomainError(f"real point left of c1 at inverse step {k}")
        w = np.sign(ref[k]) * rad ** (1.0 / fam.degree)
    return complex(w[0]) if scalar else w


def interval_image(fam: PolynomialFamily, J: RealInterval) -> RealInterval:
    """Exact image of a real interval under ``f``."""
    a, b = J.lo ** fam.degree, J.hi ** fam.degree
    if J.lo <= 0.0 <= J.hi:
        lo, hi = fam.critical_value, max(a, b) + fam.critical_value
    else:
        lo, hi = min(a, b) + fam.critical_value, max(a, b) + fam.critical_value
    if hi <= lo:
        hi = np.nextafter(lo, np.inf)
    return RealInterval(lo, hi)


def interval_orbit(fam: PolynomialFamily, J: RealInterval, n: int) -> list:
    """``[J, f(J), ..., f^n(J)]`` using :func:`interval_image`."""
    out = [J]
    for _ in range(n):
        out.append(interval_image(fam, out[-1]))
    return out


def interval_preimage_component(fam: PolynomialFamily, J: RealInterval, x: float, tol: float = 1e-12):
    """Component of ``f^{-1}(J)`` containing ``x``; returns ``(interval, folds)``.

    ``folds`` is true when the component contains the critical point.
    """
    c1 = fam.critical_value
    if J.hi <= c1:
        raise DomainError("interval lies left of the critical value")
    rb = (J.hi - c1) ** (1.0 / fam.degree)
    if J.lo <= c1:
        comp, folds = RealInterval(-rb, rb), True
    else:
        ra = (J.lo - c1) ** (1.0 / fam.degree)
        if rb <= ra:
            rb = np.nextafter(ra, np.inf)
        comp = RealInterval(ra, rb) if x >= 0 else RealInterval(-rb, -ra)
        folds = False
    if not comp.contains(x, tol=tol * max(1.0, abs(x))):
        raise DomainError(f"{x} is not in a preimage of [{J.lo}, {J.hi}]")
    return comp, folds


def pull_back_interval_along_orbit(fam: PolynomialFamily, J: RealInterval, reference: Sequence[float]):
    """Maximal interval around ``x_0`` mapped by ``f^n`` into ``J`` along the orbit.

    Returns ``(interval, fold_steps)`` where ``fold_steps`` lists the indices
    ``k`` whose pulled-back interval contains the critical point.
    """
    ref = [float(x) for x in reference]
    comp = J
    folds = []
    for k in range(len(ref) - 2, -1, -1):
        comp, folded = interval_preimage_component(fam, comp, ref[k])
        if folded:
            folds.append(k)
    return comp, sorted(folds)


def derivative_along_orbit(fam: PolynomialFamily, x: float, n: int) -> float:
    """``(f^n)'(x)`` by the chain rule."""
    d = 1.0
    for _ in range(n):
        d *= fam.derivative(x)
        x = evaluate(fam, x)
    return d
