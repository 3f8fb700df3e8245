"""Poincare neighbourhoods, power-map images and logarithmic spirals.

A Poincare neighbourhood ``D(T; theta)`` of a real interval ``T = (a, b)`` is
the set of points seeing ``T`` under an angle larger than ``pi - theta``.  It
is the union of two discs of radius ``h / sin(theta)`` centred at
``m +- i h cot(theta)`` (``m`` the midpoint, ``h`` the half length of ``T``);
its boundary consists of the two major arcs, which meet the real line at the
ends of ``T`` with external angle ``theta``.  At ``theta = pi/2`` both discs
coincide with the round disc on the diameter ``T``.

The root solvers at the bottom handle the one-variable equations that the
containment questions for spirals and sectors reduce to.  All of them scan a grid and refine sign changes
with :func:`polylike.roots.scan_roots`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import RealInterval
from .errors import DomainError, NoIntersection, SamplingTooCoarse
from .roots import bisect_root, scan_roots

ROOT_SCAN_STEP = 1e-4
DEFAULT_SAMPLES = 4096


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """An ordered polyline of complex samples; ``closed`` joins last to first."""

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if pts.size == 0:
            raise DomainError("a sampled curve needs at least one point")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    def steps(self) -> np.ndarray:
        """Lengths of consecutive segments (including the closing one)."""
        p = self.points
        if self.closed:
            return np.abs(np.roll(p, -1) - p)
        return np.abs(np.diff(p))

    @property
    def max_step(self) -> float:
        s = self.steps()
        return float(s.max()) if s.size else 0.0

    def conjugate(self) -> "SampledCurve":
        return SampledCurve(np.conj(self.points), self.closed)

    def negate(self) -> "SampledCurve":
        return SampledCurve(-self.points, self.closed)

    def map(self, func) -> "SampledCurve":
        return SampledCurve(func(self.points), self.closed)

    def concat(self, other: "SampledCurve", closed: Optional[bool] = None) -> "SampledCurve":
        return SampledCurve(np.concatenate([self.points, other.points]),
                            self.closed if closed is None else closed)

    def bounding_box(self) -> tuple[float, float, float, float]:
        p = self.points
        return float(p.real.min()), float(p.real.max()), float(p.imag.min()), float(p.imag.max())


def clustered_angles(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` Chebyshev points on ``[lo, hi]`` (dense near both ends, endpoints included)."""
    k = np.arange(n)
    t = 0.5 * (1.0 - np.cos(np.pi * k / max(n - 1, 1)))
    return lo + (hi - lo) * t


# ---------------------------------------------------------------------------
# Poincare neighbourhoods


@dataclass(frozen=True)
class PoincareNeighborhood:
    """``D(interval; angle)``; ``angle = pi/2`` gives the round disc ``D_*``."""

    interval: RealInterval
    angle: float

    def __post_init__(self):
        if not (0.0 < self.angle <= math.pi / 2 + 1e-15):
            raise DomainError(f"external angle must lie in (0, pi/2], got {self.angle}")

    @classmethod
    def round_disc(cls, interval: RealInterval) -> "PoincareNeighborhood":
        return cls(interval, math.pi / 2)

    @classmethod
    def of(cls, lo: float, hi: float, angle: float) -> "PoincareNeighborhood":
        return cls(RealInterval(lo, hi), angle)

    @property
    def is_round(self) -> bool:
        return abs(self.angle - math.pi / 2) < 1e-15

    @property
    def radius(self) -> float:
        return self.interval.radius / math.sin(self.angle)

    @property
    def offset(self) -> float:
        """Distance of the disc centres from the real axis."""
        return 0.0 if self.is_round else self.interval.radius / math.tan(self.angle)

    @property
    def upper_center(self) -> complex:
        """Centre of the circle carrying the upper boundary arc."""
        return complex(self.interval.center, self.offset)

    @property
    def lower_center(self) -> complex:
        return complex(self.interval.center, -self.offset)

    def extent(self) -> float:
        """Largest modulus of a point of the closure."""
        return abs(self.upper_center) + self.radius

    def diameter(self) -> float:
        top = self.offset + self.radius
        return max(2.0 * top, 2.0 * self.radius)

    # membership ------------------------------------------------------------

    def _arc_distance(self, z: np.ndarray, center: complex, upper: bool) -> np.ndarray:
        """Distance from ``z`` to the major arc around ``center``."""
        w = z - center
        r = np.abs(w)
        psi = np.angle(w)
        # the excluded minor arc is centred on the direction pointing back
        # across the real axis: -pi/2 for the upper circle, +pi/2 for the lower
        ref = -np.pi / 2 if upper else np.pi / 2
        dev = np.abs(np.angle(np.exp(1j * (psi - ref))))
        on_arc = dev >= self.angle
        a, b = self.interval.lo, self.interval.hi
        ends = np.minimum(np.abs(z - a), np.abs(z - b))
        return np.where(on_arc, np.abs(r - self.radius), ends)

    def margin(self, z) -> np.ndarray:
        """Signed Euclidean distance to the boundary (positive inside)."""
        z = np.asarray(z, dtype=complex)
        R = self.radius
        inside = (np.abs(z - self.upper_center) < R) | (np.abs(z - self.lower_center) < R)
        if self.is_round:
            d = np.abs(np.abs(z - self.upper_center) - R)
        else:
            d = np.minimum(self._arc_distance(z, self.upper_center, True),
                           self._arc_distance(z, self.lower_center, False))
        return np.where(inside, d, -d)

    def contains(self, z, tol: float = 0.0):
        """``(inside, margin)`` for a single point; ``inside`` means margin > -tol."""
        m = float(self.margin(complex(z)))
        return m > -tol, m

    # boundary --------------------------------------------------------------

    def alpha_range(self) -> float:
        """Upper end of the arc parameter ``alpha`` on the upper arc."""
        return 2.0 * math.pi - 2.0 * self.angle

    def boundary_point(self, alpha, lower: bool = False):
        """Point of the upper (or lower) boundary arc at arc parameter ``alpha``.

        For ``(-1, 1)``: ``z = 1 + i e^{i theta} (1 - e^{i alpha}) / sin(theta)``,
        ``alpha`` running from 0 (right end) to ``2 pi - 2 theta`` (left end).
        """
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0.0) or np.any(a > self.alpha_range() + 1e-12):
            raise DomainError(f"alpha outside [0, {self.alpha_range()}]")
        th = self.angle
        z = _b1(th, a)
        z = self.interval.center + self.interval.radius * z
        if lower:
            z = np.conj(z)
        return complex(z) if np.ndim(alpha) == 0 else z

    def sample_boundary(self, n: int = DEFAULT_SAMPLES) -> SampledCurve:
        """Closed curve: upper arc right-to-left, then lower arc left-to-right."""
        alpha = clustered_angles(0.0, self.alpha_range(), n)
        up = self.boundary_point(alpha)
        down = np.conj(up[::-1])
        return SampledCurve(np.concatenate([up, down[1:-1]]), closed=True)

    def argument_point(self, arg: float) -> complex:
        """The upper-arc point with the given argument, for intervals ``(a, b)``, ``a < 0 < b``."""
        if not (self.interval.lo < 0.0 < self.interval.hi):
            raise DomainError("argument parametrisation needs 0 inside the interval")
        if not (0.0 <= arg <= math.pi):
            raise DomainError("argument must lie in [0, pi]")
        if arg == 0.0:
            return complex(self.interval.hi)
        return self.boundary_point(_alpha_at_argument(self, arg))


def _b1(theta: float, alpha):
    """``1 + i e^{i theta} (1 - e^{i alpha}) / sin(theta)`` without cancellation.

    Uses ``1 - e^{i alpha} = -2i sin(alpha/2) e^{i alpha/2}``, so the point is
    ``1 + 2 sin(alpha/2) e^{i(theta + alpha/2)} / sin(theta)``.
    """
    a = np.asarray(alpha, dtype=float)
    return 1.0 + 2.0 * np.sin(a / 2.0) * np.exp(1j * (theta + a / 2.0)) / math.sin(theta)


def _alpha_at_argument(D: PoincareNeighborhood, arg: float) -> float:
    """Arc parameter ``alpha`` of the upper-arc point with the given argument.

    The argument increases along the upper arc because the region is convex
    and has the origin on its real trace.
    """
    def g(a):
        z = D.boundary_point(a)
        return math.atan2(z.imag, z.real) - arg

    return bisect_root(g, 0.0, D.alpha_range(), xtol=1e-15)


def boundary_point(D: PoincareNeighborhood, alpha, lower: bool = False):
    """Functional form of :meth:`PoincareNeighborhood.boundary_point`."""
    return D.boundary_point(alpha, lower=lower)


def contains(D: PoincareNeighborhood, z, tol: float = 0.0):
    return D.contains(z, tol=tol)


def union_margin(components: Sequence[PoincareNeighborhood], z) -> np.ndarray:
    """Signed distance to the boundary of a union of neighbourhoods.

    Exact outside the union.  Inside it is the largest per-component depth,
    which is a lower bound for the distance to the boundary of the union.
    """
    z = np.asarray(z, dtype=complex)
    out = None
    for D in components:
        m = D.margin(z)
        out = m if out is None else np.maximum(out, m)
    return out


# ---------------------------------------------------------------------------
# the intersection point Z(K, theta)


@dataclass(frozen=True)
class IntersectionZ:
    point: complex
    alpha: float
    phi: float
    residual: float


def intersection_Z(K: float, theta: float, detail: bool = False):
    """Upper intersection of ``P_2(boundary D((-1,1);theta))`` with ``boundary D((-K,1);theta)``.

    ``alpha`` solves ``tan(alpha/2) = (K-1)/2 tan(theta)``; the point lies on
    the boundary of ``D((-K,1);theta)`` at arc parameter ``phi = 2 alpha``.
    The matching point ``z_2`` on the unit arc must lie in the open first
    quadrant and square to the returned point.
    """
    if not K > 1.0:
        raise DomainError("K must exceed 1")
    if not (0.0 < theta < math.pi / 2):
        raise DomainError("theta must lie in (0, pi/2)")
    alpha = 2.0 * math.atan(0.5 * (K - 1.0) * math.tan(theta))
    phi = 2.0 * alpha
    z2 = complex(_b1(theta, alpha))
    z1 = complex(1.0 + 0.5 * (K + 1.0) * (_b1(theta, phi) - 1.0))
    res = abs(z2 * z2 - z1) / max(1.0, abs(z1))
    admissible = alpha < math.pi - theta / 2 and z2.real > 0.0 and z2.imag > 0.0 and z1.imag > 0.0
    if not admissible or res > 1e-10:
        raise NoIntersection(f"no admissible intersection for K={K}, theta={theta} (residual {res:.2e})")
    out = IntersectionZ(complex(z1), alpha, phi, res)
    return out if detail else out.point


def empirical_theta0(K: float, tol: float = 1e-10) -> float:
    """Largest ``theta`` at which :func:`intersection_Z` succeeds (bisection)."""
    ok = lambda th: _z_ok(K, th)
    lo, hi = 1e-9, math.pi / 2 - 1e-12
    if not ok(lo):
        raise NoIntersection(f"no admissible intersection even for tiny theta (K={K})")
    if ok(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _z_ok(K: float, theta: float) -> bool:
    try:
        intersection_Z(K, theta)
        return True
    except NoIntersection:
        return False


# ---------------------------------------------------------------------------
# logarithmic spirals


@dataclass(frozen=True)
class SpiralArc:
    """``A exp(L cot(theta)) exp(i L)`` for ``lam_lo <= L <= lam_hi``.

    Amplitudes ``A >= 1`` are the interesting ones; smaller amplitudes are accepted so that the
    threshold ``A_*(K)`` can be probed from below when ``A_*(K)`` is close to 1.
    """

    amplitude: float
    angle: float
    lam_lo: float = 0.0
    lam_hi: float = math.pi

    def __post_init__(self):
        if not self.amplitude > 0.0:
            raise DomainError("spiral amplitude must be positive")
        if not (0.0 < self.angle < math.pi / 2):
            raise DomainError("spiral angle must lie in (0, pi/2)")
        if not (0.0 <= self.lam_lo < self.lam_hi):
            raise DomainError("need 0 <= lam_lo < lam_hi")

    def point(self, lam):
        return spiral_point(self, lam)

    def sample(self, n: int = DEFAULT_SAMPLES, max_modulus: Optional[float] = None) -> SampledCurve:
        """Samples, truncated where the modulus would exceed ``max_modulus``."""
        hi = self.lam_hi
        cot = 1.0 / math.tan(self.angle)
        if max_modulus is not None and max_modulus > self.amplitude:
            hi = min(hi, self.lam_lo + max(0.0, math.log(max_modulus / self.amplitude) / cot - self.lam_lo) + 1e-12)
            hi = max(hi, self.lam_lo + 1e-15)
        lam = np.linspace(self.lam_lo, hi, n)
        return SampledCurve(self.amplitude * np.exp(lam * cot + 1j * lam))


def spiral_point(arc: SpiralArc, lam):
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < arc.lam_lo - 1e-15) or np.any(lam_arr > arc.lam_hi + 1e-15):
        raise DomainError("Lambda outside the arc")
    z = arc.amplitude * np.exp(lam_arr / math.tan(arc.angle) + 1j * lam_arr)
    return complex(z) if np.ndim(lam) == 0 else z


def power_boundary_point(degree: int, theta: float, lam: float, C: float = 0.0, K: float = 1.0) -> complex:
    """``P_l`` of the point of ``boundary D((-(1+C/l)K, 1+C/l); theta)`` with argument ``lam/l``.

    As ``l`` grows this tends to the spiral point ``e^C e^{lam cot(theta)} e^{i lam}``.
    """
    s = 1.0 + C / degree
    D = PoincareNeighborhood.of(-s * K, s, theta)
    z = D.argument_point(lam / degree)
    return complex(z**degree)


def spiral_margin_in(arc: SpiralArc, D: PoincareNeighborhood, n: int = 20000) -> float:
    """Largest signed depth of the sampled arc inside ``D`` (> 0 means they meet)."""
    curve = arc.sample(n, max_modulus=2.0 * D.extent())
    return float(np.max(D.margin(curve.points)))


def A_star(K: float) -> float:
    """``A_*(K) = K / exp(2 (K-1)/(K+1))``."""
    if K < 1.0:
        raise DomainError("A_star needs K >= 1")
    return K / math.exp(2.0 * (K - 1.0) / (K + 1.0))


# ---------------------------------------------------------------------------
# one-variable root problems


def c1_equation(A: float, K: float):
    """``A exp{x(1+x/(K+1))/(1+x)} - (1 + x)`` and its derivative as vectorised callables."""
    def g(x):
        return x * (1.0 + x / (K + 1.0)) / (1.0 + x)

    def dg(x):
        return 1.0 / (K + 1.0) + K / ((K + 1.0) * (1.0 + x) ** 2)

    func = lambda x: A * np.exp(g(x)) - (1.0 + x)
    dfunc = lambda x: A * np.exp(g(x)) * dg(x) - 1.0
    return func, dfunc


def solve_C1(A: float, K: float, x_max: Optional[float] = None, step: float = ROOT_SCAN_STEP) -> list:
    """Non-negative roots of ``A exp{x(1+x/(K+1))/(1+x)} = 1 + x`` (double roots twice)."""
    if not (A > 0.0 and K > 1.0):
        raise DomainError("solve_C1 needs A > 0 and K > 1")
    func, dfunc = c1_equation(A, K)
    if x_max is None:
        x_max = 20.0 * (K + 1.0)
    return scan_roots(func, 0.0, x_max, step=step, dfunc=dfunc)


def d15_equation(A: float, K0: float, degree: int):
    k = 0.5 * (K0 + 1.0)

    def func(B):
        inner = 1.0 + (k * B * (1.0 + B / 2.0) / (1.0 + k * B)) / degree
        return 1.0 + k * B - A * inner**degree

    return func


def solve_D15(A: float, K0: float, degree: int, step: float = ROOT_SCAN_STEP) -> list:
    """Roots of ``1 + kB = A (1 + kB(1 + B/2) / ((1 + kB) l))^l``, ``k = (K0+1)/2``, on ``[0, 2(K0 - 1)]``."""
    if not (A > 0.0 and K0 > 1.0):
        raise DomainError("solve_D15 needs A > 0 and K0 > 1")
    return scan_roots(d15_equation(A, K0, degree), 0.0, 2.0 * (K0 - 1.0), step=step)


def d15_threshold(K0: float, degree: int = 4) -> float:
    """The ``A_0`` at which ``B = 2(K0 - 1)`` solves the equation of :func:`solve_D15`."""
    return K0**2 / (1.0 + (K0**2 - 1.0) / (degree * K0)) ** degree


H_COEFFS = (1.0, -4.12 / 1.47, 2.12 / 1.47, 4.12 / 1.47, -3.12 / 1.47**2)


def h_polynomial(y):
    """``h(y) = y^4 - (4.12/1.47) y^3 + (2.12/1.47) y^2 + (4.12/1.47) y - 3.12/1.47^2``."""
    return np.polyval(H_COEFFS, y)


@dataclass(frozen=True)
class HRootReport:
    roots: tuple
    second_derivative_roots: tuple
    derivative_at_right_inflection: float
    value_at_one: float
    roots_at_least_one: tuple
    scan: tuple


def h_root_report(lo: float = -5.0, hi: float = 5.0, step: float = ROOT_SCAN_STEP) -> HRootReport:
    """Real roots of ``h`` and ``h''`` by scan and bisection on ``[lo, hi]``.

    The default window contains every real root: all roots of ``h`` satisfy
    ``|y| <= 1 + max|coefficient| < 4``.
    """
    c = np.array(H_COEFFS)
    d1 = np.polyder(c)
    d2 = np.polyder(c, 2)
    h = lambda y: np.polyval(c, y)
    roots = scan_roots(h, lo, hi, step=step, dfunc=lambda y: np.polyval(d1, y))
    r2 = scan_roots(lambda y: np.polyval(d2, y), lo, hi, step=step)
    right = max(r2) if r2 else float("nan")
    return HRootReport(
        roots=tuple(roots),
        second_derivative_roots=tuple(r2),
        derivative_at_right_inflection=float(np.polyval(d1, right)),
        value_at_one=float(h(1.0)),
        roots_at_least_one=tuple(r for r in roots if r >= 1.0),
        scan=(lo, hi, step),
    )


# ---------------------------------------------------------------------------
# power images of sectors


def unit_neighborhood(theta: float) -> PoincareNeighborhood:
    return PoincareNeighborhood.of(-1.0, 1.0, theta)


def sector_boundary(degree: int, theta: float, n: int = DEFAULT_SAMPLES,
                    D: Optional[PoincareNeighborhood] = None) -> SampledCurve:
    """Boundary of the sector ``{z in D : 0 <= arg z <= pi/degree}`` (D defaults to ``D((-1,1);theta)``)."""
    D = D or unit_neighborhood(theta)
    alpha_top = _alpha_at_argument(D, math.pi / degree)
    arc = D.boundary_point(clustered_angles(0.0, alpha_top, n))
    ray = np.linspace(1.0, 0.0, n // 4 + 2)[1:] * arc[-1]
    base = np.linspace(0.0, D.interval.hi, n // 4 + 2)[1:-1]
    return SampledCurve(np.concatenate([arc, ray, base]), closed=True)


def power_image_boundary(degree: int, theta: float, n: int = DEFAULT_SAMPLES,
                         D: Optional[PoincareNeighborhood] = None) -> SampledCurve:
    """Boundary of ``P_l(Pi_l(theta))`` as a polyline."""
    return sector_boundary(degree, theta, n, D).map(lambda z: z**degree)


@dataclass(frozen=True)
class SectorContainment:
    contained: bool
    min_margin: float
    corrected_margin: float
    samples: int


def folded_root(degree: int, z) -> np.ndarray:
    """The ``degree``-th root with argument ``|arg z| / degree`` in ``[0, pi/degree]``."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z) ** (1.0 / degree) * np.exp(1j * np.abs(np.angle(z)) / degree)


def sector_image_contains(degree: int, theta: float, outer: Optional[Iterable[PoincareNeighborhood]],
                          inner_region: SampledCurve, tol: float = 1e-12) -> SectorContainment:
    """Whether all samples lie in the power image of the sector of ``outer``.

    A point ``z`` of the upper half plane lies in ``P_l(S)``, ``S`` the part of
    ``outer`` with ``0 <= arg <= pi/l``, exactly when its folded root does; the
    lower half plane is handled by conjugation symmetry.  Margins are measured
    in the root plane.  Each polyline segment is credited with the smaller of
    its end margins minus half its length in the root plane; if all samples
    pass but a segment does not, the sampling is too coarse to decide.
    """
    comps = list(outer) if outer is not None else [unit_neighborhood(theta)]
    w = folded_root(degree, inner_region.points)
    m = union_margin(comps, w)
    # a sample on the sector's edge rays still belongs to the closed sector
    min_margin = float(m.min())
    if inner_region.closed:
        gaps = np.abs(np.roll(w, -1) - w)
        pair = np.minimum(m, np.roll(m, -1))
    else:
        gaps = np.abs(np.diff(w))
        pair = np.minimum(m[:-1], m[1:])
    corrected = float((pair - 0.5 * gaps).min()) if gaps.size else min_margin
    contained = min_margin > -tol
    if contained and corrected < -tol and min_margin > tol:
        raise SamplingTooCoarse(
            f"samples pass (margin {min_margin:.3e}) but a segment may cross the boundary ({corrected:.3e})")
    return SectorContainment(contained, min_margin, corrected, int(w.size))
