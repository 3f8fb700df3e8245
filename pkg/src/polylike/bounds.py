"""Real bounds: cross-ratios, the K-functions, space ratios and the expansion point.

Two ratio operators are used.  For ``J`` strictly inside ``T`` with
complementary components ``L`` and ``R``::

    C(T, J) = |J| |T| / (|L| |R|)          B(T, J) = |T| |J| / (|L u J| |R u J|)

Both are non-decreasing under maps with negative Schwarzian derivative, which
is what the property tests check on sampled branches of ``f^n``.

The space measurements are *measured* quantities: given a renormalization
level or a nice interval, the relevant intervals are computed exactly by
interval arithmetic and the ratio ``|L| / |f(V)|`` is returned together with
the bound that applies to the level's combinatorics.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    PolynomialFamily,
    RealInterval,
    critical_orbit,
    evaluate,
    interval_image,
    interval_orbit,
    orbit,
    pull_back_interval_along_orbit,
)
from .errors import DomainError, EmptyInterval, NoRoot, SearchFailed
from .returns import (
    GeneralizedFirstReturn,
    RenormalizationLevel,
    classify_return,
    first_return_map,
    nice_interval,
)
from .roots import bisect_predicate, bisect_root

log = logging.getLogger(__name__)

BOUND_RENORMALIZABLE = 0.6
BOUND_HALF_PERIOD = 0.5
BOUND_HIGH_RETURN = 1.0 / 3.0


# ---------------------------------------------------------------------------
# cross-ratios


@dataclass(frozen=True)
class CrossRatioFrame:
    """An interval ``T`` with a subinterval ``J`` strictly inside it."""

    T: RealInterval
    J: RealInterval

    def __post_init__(self):
        if not (self.T.lo < self.J.lo and self.J.hi < self.T.hi):
            raise DomainError("J must lie strictly inside T")

    @property
    def L(self) -> RealInterval:
        return RealInterval(self.T.lo, self.J.lo)

    @property
    def R(self) -> RealInterval:
        return RealInterval(self.J.hi, self.T.hi)


def cross_ratio_C(frame: CrossRatioFrame) -> float:
    return frame.J.length * frame.T.length / (frame.L.length * frame.R.length)


def cross_ratio_B(t: RealInterval, j: RealInterval) -> float:
    """``|t||j| / (|l u j| |r u j|)``; equal to 1 when ``j = t``."""
    if not t.contains_interval(j):
        raise DomainError("j must be contained in t")
    left = j.hi - t.lo
    right = t.hi - j.lo
    return t.length * j.length / (left * right)


# ---------------------------------------------------------------------------
# the explicit bound functions


def _check_degree(degree: int) -> None:
    if degree < 2 or degree % 2:
        raise DomainError(f"degree must be an even integer >= 2, got {degree}")


def K_bound(degree: int, t: float, y: float) -> float:
    """Upper bound for ``K_l(a)`` at ``t`` and ``y``, valid for ``0 < t < y < 1``."""
    _check_degree(degree)
    if not (0.0 < t < y < 1.0):
        raise DomainError(f"need 0 < t < y < 1, got t={t}, y={y}")
    e = 1.0 / degree
    return t * (y ** e - t ** e) / (t ** e * y * (1.0 - y ** e))


def K_star(degree: int, y: float) -> float:
    """Supremum over ``t`` of :func:`K_bound`."""
    _check_degree(degree)
    if not (0.0 < y < 1.0):
        raise DomainError(f"need 0 < y < 1, got {y}")
    e = 1.0 / degree
    # 1 - y**e loses digits for large degree; expm1 keeps them.
    return (1.0 - e) ** (degree - 1) / (degree * -math.expm1(e * math.log(y)))


def K_star_limit(y: float) -> float:
    """``lim K_star(l, y)`` as ``l -> infinity``."""
    if not (0.0 < y < 1.0):
        raise DomainError(f"need 0 < y < 1, got {y}")
    return 1.0 / (math.e * math.log(1.0 / y))


def y_from_space(space: float) -> float:
    """The ``y`` of the K-functions for a space ratio ``|L| / |f(V)|``."""
    if not space > 0.0:
        raise DomainError("space must be positive")
    return 1.0 / (1.0 + space)


# ---------------------------------------------------------------------------
# monotone extensions


def _images_avoid_critical(fam: PolynomialFamily, J: RealInterval, n: int) -> bool:
    """No ``f^i(J)``, ``0 <= i < n``, contains ``c`` in its interior."""
    for i in range(n):
        if J.contains_interior(0.0):
            return False
        if i + 1 < n:
            J = interval_image(fam, J)
    return True


def invariant_interval(fam: PolynomialFamily) -> RealInterval:
    """``[-beta, beta]`` with ``beta`` the largest real fixed point.

    Every bounded real orbit stays in it, so monotone extensions are capped
    there; without a real fixed point the escape disc is used instead.
    """
    ell, c1 = fam.degree, fam.critical_value
    g = lambda x: x ** ell - x + c1
    x_min = (1.0 / ell) ** (1.0 / (ell - 1))
    R = fam.escape_radius
    if g(x_min) > 0.0:
        return RealInterval.symmetric(R)
    return RealInterval.symmetric(bisect_root(g, x_min, R))


def maximal_monotone_interval(fam: PolynomialFamily, adjacent_to: RealInterval, iterate: int,
                              direction: int, domain: Optional[RealInterval] = None,
                              xtol: float = 1e-15) -> RealInterval:
    """Largest ``l`` on one side of ``adjacent_to`` with ``f^iterate`` monotone on it.

    ``l`` shares exactly one endpoint with ``adjacent_to``.  Its far end is
    located by bisection on "no ``f^i(l)``, ``i < iterate``, contains c" and is
    capped at the boundary of ``domain`` (default :func:`invariant_interval`).
    """
    if iterate < 1:
        raise DomainError("iterate must be >= 1")
    if direction not in (1, -1):
        raise DomainError("direction must be +1 or -1")
    dom = invariant_interval(fam) if domain is None else domain
    e = adjacent_to.hi if direction > 0 else adjacent_to.lo
    cap = dom.hi - e if direction > 0 else e - dom.lo
    if not cap > 0.0:
        raise EmptyInterval("adjacent interval already reaches the domain boundary")

    def piece(d: float) -> RealInterval:
        return RealInterval(e, e + d) if direction > 0 else RealInterval(e - d, e)

    def ok(d: float) -> bool:
        return _images_avoid_critical(fam, piece(d), iterate)

    tiny = min(cap, max(abs(e), adjacent_to.length)) * 1e-13 or 1e-300
    if not ok(tiny):
        raise EmptyInterval("endpoint is already a critical preimage")
    if ok(cap):
        return piece(cap)
    d = bisect_predicate(ok, tiny, cap, xtol=xtol * max(1.0, abs(e)))
    return piece(d)


def monotone_hull(fam: PolynomialFamily, J: RealInterval, iterate: int) -> RealInterval:
    """Maximal interval containing ``J`` on which ``f^iterate`` is monotone."""
    left = maximal_monotone_interval(fam, J, iterate, -1)
    right = maximal_monotone_interval(fam, J, iterate, +1)
    return RealInterval(left.lo, right.hi)


# ---------------------------------------------------------------------------
# level data and space ratios


@dataclass(frozen=True)
class LevelData:
    """Intervals describing one scale of the map.

    ``V`` is the central domain whose image ``f(V)`` the space is compared
    with, ``U`` the central domain of the return to ``V`` with iterate ``s``.
    ``kind`` is ``"renormalizable"`` (``U = V``) or ``"high_return"``.
    """

    family: PolynomialFamily
    level: int
    V: RealInterval
    U: RealInterval
    s: int
    kind: str
    half_period: bool = False
    return_label: str = ""

    @classmethod
    def from_renormalization(cls, fam: PolynomialFamily, lv: RenormalizationLevel,
                             level: int = 0) -> "LevelData":
        V = lv.interval
        return cls(fam, level, V, V, lv.period, "renormalizable", lv.half_period, "renormalizable")

    @classmethod
    def from_nice_interval(cls, fam: PolynomialFamily, endpoint: float, level: int = 0,
                           horizon: int = 200, max_returns: int = 16) -> "LevelData":
        """``W = [-endpoint, endpoint]``, ``V`` the central domain of ``R_W``,
        ``U`` the central domain of ``R_V``."""
        W = nice_interval(fam, endpoint, horizon)
        V = first_return_map(fam, W, max_returns=max_returns).central.domain
        rms_v = first_return_map(fam, nice_interval(fam, V.hi, horizon), max_returns=max_returns)
        cls_v = classify_return(rms_v)
        br = rms_v.central
        return cls(fam, level, V, br.domain, br.iterate, "high_return" if cls_v.high else "low_return",
                   False, cls_v.label)

    @property
    def bound_class(self) -> float:
        if self.kind == "renormalizable":
            return BOUND_HALF_PERIOD if self.half_period else BOUND_RENORMALIZABLE
        if self.kind == "high_return":
            return BOUND_HIGH_RETURN
        raise DomainError(f"no space bound for a level of kind {self.kind!r}")


@dataclass(frozen=True)
class SpaceMeasurement:
    level: int
    ratio: float
    bound_class: float
    margin: float
    fV: RealInterval
    L: RealInterval
    l: RealInterval
    U_hat: RealInterval
    details: tuple = ()

    @property
    def satisfied(self) -> bool:
        return self.margin >= -1e-6

    @property
    def y(self) -> float:
        return y_from_space(self.ratio)


def pulled_back_image(fam: PolynomialFamily, U: RealInterval, V: RealInterval, s: int) -> RealInterval:
    """``U_hat``: the interval around ``f(U)`` mapped monotonically onto ``V`` by ``f^{s-1}``."""
    ref = critical_orbit(fam, s).points  # c_1, ..., c_s
    if not V.contains(ref[-1], tol=1e-12 * V.length):
        raise DomainError(f"c_{s} is not in V")
    U_hat, folds = pull_back_interval_along_orbit(fam, V, ref)
    if folds:
        raise DomainError("f^(s-1) is not monotone on the pullback of V")
    return U_hat


def _outer_l(fam: PolynomialFamily, U_hat: RealInterval, s: int) -> RealInterval:
    # Take the side outside [c_1, c_2]; c_1 < c_2 for every map considered here.
    c1, c2 = fam.critical_value, fam.iterate(fam.critical_value, 1)
    direction = -1 if c1 <= c2 else 1
    return maximal_monotone_interval(fam, U_hat, s, direction)


def _image(fam: PolynomialFamily, J: RealInterval, n: int) -> RealInterval:
    for _ in range(n):
        J = interval_image(fam, J)
    return J


def measure_space_ratio(fam: PolynomialFamily, data: LevelData) -> SpaceMeasurement:
    """``|L| / |f(V)|`` at one level, with the bound that applies to it.

    Renormalizable levels use ``L = f^s(l)``.  At a high-return level ``L`` is
    ``L_0 = T_0 - f(V)`` where ``T_0`` is the hull of ``f(V)`` and the nearest
    disjoint ``f^i(V)``, ``2 <= i <= s''``; ``f^s(l)`` is then reported in
    ``details`` together with whether it covers ``L_0``.
    """
    bound = data.bound_class
    fV = interval_image(fam, data.V)
    U_hat = pulled_back_image(fam, data.U, data.V, data.s)
    l = _outer_l(fam, U_hat, data.s)
    Ls = _image(fam, l, data.s)
    if data.kind == "renormalizable":
        ratio = Ls.length / fV.length
        return SpaceMeasurement(data.level, ratio, bound, ratio - bound, fV, Ls, l, U_hat)

    s2 = second_return_index(fam, data.V)
    imgs = interval_orbit(fam, data.V, s2)
    best = None
    for i in range(2, s2 + 1):
        J = imgs[i]
        if J.overlap(fV) > 0.0 or J.lo == fV.hi or J.hi == fV.lo:
            continue
        T0 = RealInterval.hull(fV.lo, fV.hi, J.lo, J.hi)
        if best is None or T0.length < best[1].length:
            best = (i, T0)
    if best is None:
        raise SearchFailed("no iterate of V disjoint from f(V) before it covers c",
                           {"s_second": s2})
    i, T0 = best
    L0 = RealInterval(fV.hi, T0.hi) if T0.hi > fV.hi else RealInterval(T0.lo, fV.lo)
    ratio = L0.length / fV.length
    covers = Ls.contains_interval(L0, tol=1e-12 * L0.length)
    details = (("iterate_index", i), ("s_second", s2), ("fs_l_length_ratio", Ls.length / fV.length),
               ("fs_l_covers_L0", covers))
    return SpaceMeasurement(data.level, ratio, bound, ratio - bound, fV, L0, l, U_hat, details)


def second_return_index(fam: PolynomialFamily, V: RealInterval, cap: int = 100000) -> int:
    """Smallest ``s''`` with ``c`` in ``f^{s''-1}(V)`` (``s'' >= 2``)."""
    J = V
    for n in range(2, cap + 2):
        J = interval_image(fam, J)
        if J.contains(0.0):
            return n
    raise SearchFailed(f"no iterate of V covers c within {cap} steps")


# ---------------------------------------------------------------------------
# the expansion point


@dataclass(frozen=True)
class ExpansionPoint:
    """Output of :func:`find_expansion_point`; the constants are measured."""

    u_tilde: float
    fs_u_tilde: float
    u_star: Optional[float]
    C0: float
    C1: float
    C2: float
    uc_margin: float
    ud_ratio: Optional[float]
    T1: RealInterval
    T: RealInterval

    @property
    def disc_radius(self) -> float:
        """Radius of the round disc ``D_*((-f^s(u~), f^s(u~)))``."""
        return abs(self.fs_u_tilde)


def find_expansion_point(fam: PolynomialFamily, renorm, shrink: float = 0.9, attempts: int = 80,
                         scan: int = 257) -> ExpansionPoint:
    """Search ``u~`` beyond the repelling fixed point of ``f^s`` and locate ``u_*``.

    ``renorm`` is a :class:`RenormalizationLevel` or a pair ``(s, p)`` where
    ``p`` is the fixed point of ``f^s`` on the boundary of the periodic
    interval.  ``C1`` starts at the measured one-sided space ``C0`` and is
    shrunk by ``shrink`` until the band search succeeds; ``C2`` is the best
    expansion found in the band.
    """
    if isinstance(renorm, RenormalizationLevel):
        s, p = renorm.period, renorm.periodic_point
    else:
        s, p = renorm
    s, p = int(s), float(p)
    ell = fam.degree
    u = abs(p)
    if s < 2:
        raise DomainError("period must be >= 2")
    if abs(fam.iterate(p, s) - p) > 1e-8 * max(1.0, u):
        raise DomainError("p is not a fixed point of f^s")

    fU = interval_image(fam, RealInterval.symmetric(u))
    T1 = monotone_hull(fam, fU, s - 1)
    image = _image(fam, T1, s - 1)
    comps = [u - image.lo if image.lo < -u else 0.0, image.hi - u if image.hi > u else 0.0]
    C0 = ell * min(comps) / u
    if not T1.lo < fam.critical_value:
        raise SearchFailed("monotone extension does not reach past c_1", {"T1": T1.as_tuple()})
    b = (T1.hi - fam.critical_value) ** (1.0 / ell)
    side = 1.0 if p > 0 else -1.0
    T = RealInterval(0.0, b) if side > 0 else RealInterval(-b, 0.0)

    def dist(x: float) -> float:
        return abs(fam.iterate(x, s) - p)

    far = side * b * (1.0 - 1e-12)
    reach = dist(far)
    C1 = C0 if C0 > 0 else ell * reach / u
    diag = {"C0": C0, "reach": reach, "T1": T1.as_tuple()}
    for _ in range(attempts):
        lo_t, hi_t = C1 / (2 * ell) * u, C1 / ell * u
        if hi_t < reach:
            try:
                x1 = bisect_root(lambda x: dist(x) - lo_t, p, far)
                x2 = bisect_root(lambda x: dist(x) - hi_t, p, far)
            except NoRoot:
                C1 *= shrink
                continue
            xs = np.linspace(x1, x2, scan)
            with np.errstate(all="ignore"):
                ratio = np.abs(fam.iterate(xs, s)) / np.abs(xs)
            k = int(np.argmax(ratio))
            if ratio[k] > 1.0:
                ut = float(xs[k])
                fsu = float(fam.iterate(ut, s))
                C2 = ell * ell * (float(ratio[k]) - 1.0)
                u_star, ud = _locate_u_star(fam, T1, s, -fsu, u)
                return ExpansionPoint(ut, fsu, u_star, C0, C1, C2, float(ratio[k]) - 1.0, ud, T1, T)
        C1 *= shrink
    diag["C1_final"] = C1
    raise SearchFailed("no point in the scanned band satisfies the expansion inequality", diag)


def _locate_u_star(fam: PolynomialFamily, T1: RealInterval, s: int, target: float, u: float):
    g = lambda x: fam.iterate(x, s - 1) - target
    eps = 1e-13 * T1.length
    lo, hi = T1.lo + eps, T1.hi - eps
    try:
        x = bisect_root(g, lo, hi)
    except NoRoot:
        return None, None
    c1 = fam.critical_value
    fu = evaluate(fam, u)
    return x, abs(x - c1) / abs(fu - c1)


# ---------------------------------------------------------------------------
# the |R'| / |I'| ratio of a low-return cascade


@dataclass(frozen=True)
class RIRatio:
    ratio: float
    comparison: float
    R_prime: RealInterval
    I_prime: RealInterval
    A: RealInterval
    m: int
    depth: int

    @property
    def exceeds_comparison(self) -> bool:
        return self.ratio >= self.comparison


def measure_RI_ratio(fam: PolynomialFamily, cascade: Sequence[GeneralizedFirstReturn]) -> RIRatio:
    """``|R'| / |I'|`` for the last map of ``cascade = [g, R g, ..., R^k g]``.

    ``T^0`` is the domain of ``g`` and ``T^{k+1}`` the central domain of the
    last map, whose central branch is ``f^m``.  ``A`` is the interval around
    ``f(T^{k+1})`` mapped onto ``T^0`` by ``f^{m-1}``, ``R' = f(T^{k+1})`` and
    ``I'`` is the part of ``A`` on the other side of ``c_1``.
    """
    if not cascade:
        raise DomainError("empty cascade")
    T0 = cascade[0].base
    last = cascade[-1]
    Tk = last.central.domain
    m = last.central.iterate
    if m < 2:
        raise DomainError("central branch must have iterate >= 2")
    A, folds = pull_back_interval_along_orbit(fam, T0, critical_orbit(fam, m).points)
    if folds:
        raise DomainError("f^(m-1) folds on the pullback of T^0")
    c1 = fam.critical_value
    R_prime = interval_image(fam, Tk)
    if not A.lo < c1:
        raise DomainError("A does not extend past c_1")
    I_prime = RealInterval(A.lo, c1)
    ratio = R_prime.length / I_prime.length
    comparison = (Tk.length / T0.length) ** fam.degree
    return RIRatio(ratio, comparison, R_prime, I_prime, A, m, len(cascade) - 1)
