"""Nice intervals, first return maps, renormalization and the operators R and W.

Branch domains are computed by exact real pullback: the domain of the branch
through ``x`` with iterate ``k`` is the component of ``f^{-k}(base)`` that
follows the orbit of ``x``.  The bisection-on-entry-time locator
:func:`locate_entry_boundary` is kept as an independent check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    PolynomialFamily,
    RealInterval,
    derivative_along_orbit,
    evaluate,
    interval_image,
    interval_orbit,
    orbit,
    orientation_reversing_fixed_point,
    pull_back_interval_along_orbit,
)
from .errors import (
    AttractorDetected,
    BudgetExhausted,
    Degenerate,
    DepthExhausted,
    DomainError,
    HighReturn,
    NoRoot,
    PeriodicAttractor,
    Renormalizable,
)
from .roots import bisect_predicate, bisect_root

log = logging.getLogger(__name__)

NICE_MARGIN = 1e-12
DEGENERATE_TOL = 1e-10


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class SymmetricNiceInterval:
    """``[-endpoint, endpoint]`` whose endpoint orbit was checked to stay out."""

    endpoint: float
    niceness_horizon: int

    @property
    def interval(self) -> RealInterval:
        return RealInterval.symmetric(self.endpoint)


@dataclass(frozen=True)
class Branch:
    domain: RealInterval
    iterate: int
    kind: str  # "monotone" | "central"
    orientation: str  # "preserving" | "reversing" | "folding"

    @property
    def is_central(self) -> bool:
        return self.kind == "central"


@dataclass(frozen=True)
class ReturnMapStructure:
    family: PolynomialFamily
    base: SymmetricNiceInterval
    branches: tuple
    central_index: int

    @property
    def central(self) -> Branch:
        return self.branches[self.central_index]


@dataclass(frozen=True)
class ReturnClassification:
    high: bool
    central: bool
    margin: float
    image: RealInterval

    @property
    def label(self) -> str:
        return f"{'high' if self.high else 'low'}/{'central' if self.central else 'non_central'}"


@dataclass(frozen=True)
class RenormalizationLevel:
    period: int
    endpoint: float
    periodic_point: float
    multiplier: float
    half_period: bool = False

    @property
    def interval(self) -> RealInterval:
        return RealInterval.symmetric(self.endpoint)


# ---------------------------------------------------------------------------
# niceness


def is_nice(fam: PolynomialFamily, endpoint: float, horizon: int, margin: float = NICE_MARGIN) -> bool:
    """``f^i(endpoint)`` stays out of ``(-endpoint, endpoint)`` for ``i <= horizon``.

    Once the orbit lands (to 1e-9) on a point it visited before it is periodic
    from then on; the check stops there because rounding would otherwise push
    the orbit off a repelling cycle.
    """
    x = endpoint
    tol = margin * max(1.0, abs(endpoint))
    R = fam.escape_radius
    seen = [x]
    for _ in range(horizon):
        x = evaluate(fam, x)
        if abs(x) > R:
            return True
        if abs(x) < abs(endpoint) - tol:
            return False
        if min(abs(x - y) for y in seen) < 1e-9 * max(1.0, abs(x)):
            return True
        seen.append(x)
    return True


def nice_interval(fam: PolynomialFamily, endpoint: float, horizon: int = 200) -> SymmetricNiceInterval:
    """Validated :class:`SymmetricNiceInterval`; raises DomainError if not nice."""
    endpoint = abs(float(endpoint))
    if not is_nice(fam, endpoint, horizon):
        raise DomainError(f"{endpoint} is not nice up to {horizon} iterates")
    return SymmetricNiceInterval(endpoint, horizon)


def _attracting_cycle(fam: PolynomialFamily, transient: int = 4000, max_period: int = 512):
    """Period and multiplier of an attracting cycle seen by the critical orbit, if any."""
    x = 0.0
    for _ in range(transient):
        x = evaluate(fam, x)
        if abs(x) > fam.escape_radius:
            return None
    start = x
    y = x
    for p in range(1, max_period + 1):
        y = evaluate(fam, y)
        if abs(y - start) < 1e-10:
            mult = derivative_along_orbit(fam, start, p)
            if abs(mult) < 1.0:
                return p, mult
            return None
    return None


def nice_point_sequence(fam: PolynomialFamily, n_max: int, depth_cap: int = 2000) -> list:
    """Nice points ``u_0 > u_1 > ...`` built from preimages of the reversing fixed point.

    ``u_n`` is the preimage of ``u_0`` in ``(-u_{n-1}, u_{n-1})`` nearest to the
    critical point among preimages of the least order that enter the interval.
    Preimages of order ``i`` enter ``(-a, a)`` exactly when the fixed point lies
    in ``f^i([0, a))``, so the search uses exact interval images and a bisection
    in ``x`` for the nearest preimage of each order.
    """
    q = orientation_reversing_fixed_point(fam)
    us = [abs(q)]

    def hits(x: float, i: int) -> bool:
        J = RealInterval(0.0, x)
        for _ in range(i):
            J = interval_image(fam, J)
        return J.contains(q)

    while len(us) <= n_max:
        a = us[-1]
        inner = a * (1.0 - 1e-12)
        orders = []
        J = RealInterval(0.0, inner)
        for i in range(1, depth_cap + 1):
            J = interval_image(fam, J)
            if J.contains(q):
                orders.append(i)
                break
        if not orders:
            cyc = _attracting_cycle(fam)
            if cyc is not None:
                raise PeriodicAttractor(f"attracting cycle of period {cyc[0]} (multiplier {cyc[1]:.3g})")
            raise Renormalizable(f"no preimage of the fixed point enters (-{a}, {a}) within {depth_cap} steps")
        k = orders[0]
        best = inner
        for i in range(1, k + 1):
            if not hits(inner, i):
                continue
            x = bisect_predicate(lambda x: hits(x, i), inner, 0.0, xtol=1e-15 * max(1.0, a))
            best = min(best, x)
        if not best < a:
            raise Degenerate("nice point sequence stalled")
        us.append(best)
    return us[: n_max + 1]


# ---------------------------------------------------------------------------
# first return maps


def first_entry_time(fam: PolynomialFamily, x: float, W: RealInterval, budget: int) -> Optional[int]:
    """Least ``k >= 1`` with ``f^k(x)`` in ``W`` (closed), or ``None``."""
    R = fam.escape_radius
    for k in range(1, budget + 1):
        x = evaluate(fam, x)
        if abs(x) > R:
            return None
        if W.contains(x):
            return k
    return None


def locate_entry_boundary(fam: PolynomialFamily, inside: float, outside: float, W: RealInterval,
                          budget: int, tol: float = 1e-12) -> float:
    """Bisection on the integer first-entry time between two points."""
    k_in = first_entry_time(fam, inside, W, budget)
    return bisect_predicate(lambda x: first_entry_time(fam, x, W, budget) == k_in, inside, outside, xtol=tol)


def _branch_through(fam: PolynomialFamily, x: float, k: int, target: RealInterval) -> Branch:
    seg = orbit(fam, x, k)
    dom, folds = pull_back_interval_along_orbit(fam, target, seg.points)
    if folds and folds != [0]:
        raise Degenerate(f"pullback folds at steps {folds}; base is not nice")
    if folds:
        return Branch(dom, k, "central", "folding")
    d = derivative_along_orbit(fam, x, k)
    return Branch(dom, k, "monotone", "preserving" if d > 0 else "reversing")


def first_return_map(fam: PolynomialFamily, W: SymmetricNiceInterval, orbit_budget: int = 5000,
                     max_returns: int = 16) -> ReturnMapStructure:
    """Branches of the first return map to ``W`` that meet the critical orbit.

    Only the first ``max_returns`` returns of the critical orbit are followed:
    at a numerically located parameter the critical orbit is reliable for a
    few dozen iterates, after which it visits spurious branches.
    """
    base = W.interval
    branches: list[Branch] = []
    central_index = None
    x, t = 0.0, 0
    for _ in range(max_returns):
        if t >= orbit_budget:
            break
        k = first_entry_time(fam, x, base, orbit_budget - t)
        if k is None:
            if t == 0:
                raise BudgetExhausted(f"critical point does not return to W within {orbit_budget} steps")
            break
        if not any(b.domain.contains(x) for b in branches):
            br = _branch_through(fam, x, k, base)
            branches.append(br)
            if br.is_central:
                central_index = len(branches) - 1
        x = fam.iterate(x, k)
        t += k
    if central_index is None:
        raise BudgetExhausted("central branch not found")
    return ReturnMapStructure(fam, W, tuple(branches), central_index)


def classify_return(rms: ReturnMapStructure) -> ReturnClassification:
    """High/low and central/non-central type of the central branch."""
    fam = rms.family
    br = rms.central
    s = br.iterate
    b = br.domain.hi
    cs = fam.iterate(0.0, s)
    edge = fam.iterate(b, s)
    if min(abs(cs - br.domain.lo), abs(cs - br.domain.hi)) < DEGENERATE_TOL:
        raise Degenerate("f^s(c) is on the central branch boundary")
    image = RealInterval.hull(cs, edge)
    high = image.contains(0.0)
    central = br.domain.contains_interior(cs)
    return ReturnClassification(high, central, abs(cs), image)


# ---------------------------------------------------------------------------
# renormalization


def _images_avoid_center(fam: PolynomialFamily, x: float, s: int) -> bool:
    J = RealInterval(0.0, x)
    for _ in range(1, s):
        J = interval_image(fam, J)
        if J.contains_interior(0.0) or J.lo == 0.0 or J.hi == 0.0:
            return False
    return True


def _valid_periodic_interval(fam: PolynomialFamily, u: float, s: int, tol: float = 1e-9) -> bool:
    V = RealInterval.symmetric(u)
    imgs = interval_orbit(fam, V, s)
    for J in imgs[1:s]:
        if J.overlap(V) > tol * u:
            return False
    return V.contains_interval(imgs[s], tol=tol * u)


def detect_renormalization(fam: PolynomialFamily, max_period: int, scan_points: int = 4000) -> list:
    """Periodic central intervals ``[-u, u]`` with ``f^s`` mapping them into themselves.

    For each period the search is confined to ``[0, x_max]`` where no earlier
    image of ``[0, x]`` reaches the critical point; ``f^s`` is monotone there and
    the endpoint solves ``f^s(u) = +u`` or ``-u``.
    """
    if critical_orbit_escapes(fam):
        return []
    levels: list[RenormalizationLevel] = []
    R = fam.escape_radius
    for s in range(2, max_period + 1):
        if not _images_avoid_center(fam, 1e-300, s):
            continue
        x_max = bisect_predicate(lambda x: _images_avoid_center(fam, x, s), 1e-300, R, xtol=1e-15)
        xs = np.linspace(x_max * 1e-6, x_max, scan_points)
        with np.errstate(all="ignore"):
            ys = fam.iterate(xs, s)
        best = None
        for sg in (1.0, -1.0):
            g = ys - sg * xs
            sgn = np.sign(g)
            for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
                try:
                    u = bisect_root(lambda x: fam.iterate(x, s) - sg * x, xs[i], xs[i + 1])
                except NoRoot:
                    continue
                mult = derivative_along_orbit(fam, u, s)
                if abs(mult) < 1.0 - 1e-9:
                    continue
                if _valid_periodic_interval(fam, u, s) and (best is None or u > best[0]):
                    best = (u, sg * u, mult)
        if best is not None:
            levels.append(RenormalizationLevel(s, best[0], best[1], best[2]))
    periods = {lv.period for lv in levels}
    return [
        RenormalizationLevel(lv.period, lv.endpoint, lv.periodic_point, lv.multiplier,
                             half_period=(lv.period % 2 == 0 and lv.period // 2 in periods))
        for lv in levels
    ]


def critical_orbit_escapes(fam: PolynomialFamily, n: int = 2000) -> bool:
    return orbit(fam, 0.0, n).escaped


def fibonacci_return_times(fam: PolynomialFamily, depth: int, max_iter: int = 20000) -> tuple:
    """Closest-return times ``S_0 = 1 < S_1 < ...`` of the critical point.

    ``S_i`` is the least ``k`` whose closest precritical point of order ``k`` is
    nearer to ``c`` than the one of order ``S_{i-1}``.  The nearest precritical
    point of order ``k`` inside ``(0, d)`` exists iff ``0`` lies in
    ``f^k([0, d))``, which is checked with exact interval images.
    """
    c1 = fam.critical_value
    if not c1 < 0.0:
        raise DepthExhausted("critical value is not negative; no precritical points")
    d = (-c1) ** (1.0 / fam.degree)
    S = [1]

    def reaches(x: float, k: int) -> bool:
        J = RealInterval(0.0, x)
        for _ in range(k):
            J = interval_image(fam, J)
        return J.contains(0.0)

    k = 1
    while len(S) < depth:
        k += 1
        if k > max_iter:
            raise DepthExhausted(f"only {len(S)} closest returns within {max_iter} iterates")
        inner = d * (1.0 - 1e-13)
        if reaches(inner, k):
            d = _nearest_precritical(reaches, k, inner)
            S.append(k)
    return tuple(S)


def fibonacci_nice_points(fam: PolynomialFamily, depth: int) -> list:
    """Signed points ``u_0 = q`` and ``u_{n+1}`` nearest to c in ``f^{-S_n}(u_n)``.

    ``u_{n+1}`` is put on the side of ``c_{S_{n+1}}``.  Every ``|u_n|`` is one of
    the nice points of :func:`nice_point_sequence`; this sequence skips the
    intermediate ones.
    """
    S = fibonacci_return_times(fam, depth + 1)
    q = orientation_reversing_fixed_point(fam)
    us = [q]

    def hits(x: float, k: int, t: float) -> bool:
        J = RealInterval(0.0, x)
        for _ in range(k):
            J = interval_image(fam, J)
        return J.contains(t)

    for n in range(depth):
        k, t = S[n], us[-1]
        x = bisect_predicate(lambda x: hits(x, k, t), abs(q), 1e-300, xtol=1e-16)
        side = 1.0 if fam.iterate(0.0, S[n + 1]) >= 0.0 else -1.0
        us.append(side * x)
    return us


def _nearest_precritical(reaches, k: int, upper: float) -> float:
    lo, hi = 0.0, upper
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if reaches(mid, k):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# generalized first return maps and the operators R and W


@dataclass(frozen=True)
class ReturnRule:
    """How a generalized return map evaluates points.

    ``first_return`` returns to ``base`` under ``f`` (no parent) or under the
    parent map; ``renorm_low`` is the low-return renormalization of the parent
    with central cascade data ``T1``, ``T2``, ``s0``, ``s``.
    """

    kind: str
    parent: Optional["GeneralizedFirstReturn"] = None
    T1: Optional[RealInterval] = None
    T2: Optional[RealInterval] = None
    s0: int = 0
    s: int = 0


@dataclass(frozen=True)
class GeneralizedFirstReturn:
    """A map in the class E(base, outer): finitely many branches of iterates of f.

    ``branches`` lists the branches met by the critical orbit of the map and
    ``witnesses[i]`` is the interval ``H_i`` around ``f`` of the branch that the
    remaining iterate maps monotonically onto ``outer`` (``None`` when that
    extension fails).
    """

    family: PolynomialFamily
    outer: RealInterval
    base: RealInterval
    rule: ReturnRule
    branches: tuple = ()
    central_index: int = 0
    witnesses: tuple = ()
    budget: int = 5000

    @property
    def central(self) -> Branch:
        return self.branches[self.central_index]

    # evaluation -----------------------------------------------------------

    def step(self, x: float):
        """``(g(x), n)`` with ``g(x) = f^n(x)``, or ``None`` when undefined at x."""
        fam, rule = self.family, self.rule
        if not self.base.contains(x):
            return None
        if rule.kind == "first_return":
            if rule.parent is None:
                k = first_entry_time(fam, x, self.base, self.budget)
                return None if k is None else (fam.iterate(x, k), k)
            y, n = x, 0
            for _ in range(self.budget):
                r = rule.parent.step(y)
                if r is None:
                    return None
                y, n = r[0], n + r[1]
                if self.base.contains(y):
                    return y, n
            return None
        if rule.kind == "renorm_low":
            g = rule.parent
            if rule.T2.contains(x):
                return g.iterate(x, rule.s)
            if rule.T1.contains(x):
                sx = self.split_time(x)
                return None if sx is None else g.iterate(x, sx + 1)
            return g.step(x)
        raise DomainError(f"unknown rule {rule.kind!r}")

    def iterate(self, x: float, k: int):
        n = 0
        for _ in range(k):
            r = self.step(x)
            if r is None:
                return None
            x, n = r[0], n + r[1]
        return x, n

    def split_time(self, x: float) -> Optional[int]:
        """``s(x)``: first time the parent orbits of x and c sit in
        different parent branches (the central branch counts as a component)."""
        g = self.rule.parent
        y, z = x, 0.0
        for i in range(self.rule.s + 1):
            by, bz = g.branch_at(y), g.branch_at(z)
            if by is None:
                return None
            if bz is None or not _same_domain(by.domain, bz.domain):
                return i
            ry, rz = g.step(y), g.step(z)
            if ry is None or rz is None:
                return None
            y, z = ry[0], rz[0]
        return None

    def branch_at(self, x: float) -> Optional[Branch]:
        """The branch whose domain contains ``x`` (computed by exact pullback)."""
        for br in self.branches:
            if br.domain.contains_interior(x):
                return br
        r = self.step(x)
        if r is None:
            return None
        try:
            return _branch_through(self.family, x, r[1], self.base)
        except (DomainError, Degenerate):
            return None

    def has_low_return(self) -> bool:
        c = self.central
        gc = self.family.iterate(0.0, c.iterate)
        edge = self.family.iterate(c.domain.hi, c.iterate)
        return not RealInterval.hull(gc, edge).contains(0.0)

    def critical_orbit(self, n: int) -> list:
        pts = [0.0]
        x = 0.0
        for _ in range(n):
            r = self.step(x)
            if r is None:
                break
            x = r[0]
            pts.append(x)
        return pts


def _same_domain(a: RealInterval, b: RealInterval, tol: float = 1e-9) -> bool:
    scale = max(a.length, b.length)
    return abs(a.lo - b.lo) <= tol * scale and abs(a.hi - b.hi) <= tol * scale


def _witness(fam: PolynomialFamily, br: Branch, outer: RealInterval, base: RealInterval):
    x = 0.0 if br.is_central else br.domain.center
    if br.iterate < 2:
        return None
    seg = orbit(fam, evaluate(fam, x), br.iterate - 1)
    try:
        H, folds = pull_back_interval_along_orbit(fam, outer, seg.points)
    except DomainError:
        return None
    if folds:
        return None
    return H


def _finalise(g: GeneralizedFirstReturn, orbit_steps: int = 64) -> GeneralizedFirstReturn:
    """Attach branches met by the critical orbit of ``g`` and their witnesses."""
    from dataclasses import replace

    branches: list[Branch] = []
    central_index = None
    x = 0.0
    for _ in range(orbit_steps):
        if not any(b.domain.contains(x) for b in branches):
            br = g.branch_at(x)
            if br is None:
                break
            branches.append(br)
            if br.is_central:
                central_index = len(branches) - 1
        r = g.step(x)
        if r is None:
            break
        x = r[0]
    if central_index is None:
        raise BudgetExhausted("generalized return map has no central branch")
    witnesses = tuple(_witness(g.family, b, g.outer, g.base) for b in branches)
    return replace(g, branches=tuple(branches), central_index=central_index, witnesses=witnesses)


def generalized_first_return(fam: PolynomialFamily, base: RealInterval, outer: RealInterval,
                             budget: int = 5000, orbit_steps: int = 64) -> GeneralizedFirstReturn:
    """First return map to ``base`` viewed as a member of E(base, outer)."""
    g = GeneralizedFirstReturn(fam, outer, base, ReturnRule("first_return"), budget=budget)
    return _finalise(g, orbit_steps)


def from_return_map(rms: ReturnMapStructure, outer: RealInterval, orbit_steps: int = 64) -> GeneralizedFirstReturn:
    return generalized_first_return(rms.family, rms.base.interval, outer, orbit_steps=orbit_steps)


def _first_exit(g: GeneralizedFirstReturn, budget: int):
    """``s0`` and the g-orbit of c up to the first exit from the central domain."""
    T1 = g.central.domain
    pts, ns = [0.0], [0]
    for i in range(1, budget + 1):
        r = g.step(pts[-1])
        if r is None:
            raise BudgetExhausted("g-orbit of c left the branch domains")
        pts.append(r[0])
        ns.append(ns[-1] + r[1])
        if not T1.contains_interior(r[0]):
            return i + 1, pts, ns
    raise AttractorDetected(f"central orbit stays in T1 for {budget} steps")


def renorm_low(g: GeneralizedFirstReturn, budget: int = 500, orbit_steps: int = 64) -> GeneralizedFirstReturn:
    """The low-return renormalization R g (new central interval T2)."""
    if not g.has_low_return():
        raise HighReturn("g(T1) contains the critical point")
    fam = g.family
    T1 = g.central.domain
    s0, pts, ns = _first_exit(g, budget)
    s = None
    for i in range(s0, budget + 1):
        while len(pts) <= i:
            r = g.step(pts[-1])
            if r is None:
                raise BudgetExhausted("g-orbit of c left the branch domains")
            pts.append(r[0])
            ns.append(ns[-1] + r[1])
        comp, _ = pull_back_interval_along_orbit(fam, g.base, orbit(fam, 0.0, ns[i]).points)
        edge = fam.iterate(comp.hi, ns[i])
        if RealInterval.hull(pts[i], edge).overlap(T1) > 0.0:
            s, T2 = i, comp
            break
    if s is None:
        raise BudgetExhausted(f"no return of the central cascade to T1 within {budget} steps")
    rule = ReturnRule("renorm_low", parent=g, T1=T1, T2=T2, s0=s0, s=s)
    Rg = GeneralizedFirstReturn(fam, g.base, g.base, rule, budget=g.budget)
    return _finalise(Rg, orbit_steps)


def escape_chain(g: GeneralizedFirstReturn, budget: int = 500):
    """Fixed point ``x`` of the central branch, the chain ``z_0, z_1, ...`` and minimal ``k``."""
    if g.has_low_return():
        raise DomainError("escape interval needs a high return")
    fam = g.family
    T1 = g.central.domain
    j = g.central.iterate
    b = T1.hi
    gc = fam.iterate(0.0, j)
    x = None
    for side in (1.0, -1.0):
        h = lambda y: fam.iterate(y, j) - y
        lo, hi = side * 1e-300, side * b
        try:
            y = bisect_root(h, lo, hi)
        except NoRoot:
            continue
        if derivative_along_orbit(fam, y, j) > 0:
            x = y
            break
    if x is None:
        raise Renormalizable("central branch has no orientation preserving fixed point")
    side = np.sign(x)
    zs = [side * g.base.hi, side * b]
    if not (np.sign(gc) == -side and abs(gc) > abs(x)):
        raise Renormalizable("central branch maps [x, tau(x)] into itself")
    k = 1
    while not abs(gc) >= abs(zs[k]):
        target = zs[-1]
        z = bisect_root(lambda y: fam.iterate(y, j) - target, x, zs[-1])
        zs.append(z)
        k += 1
        if k > budget:
            raise Renormalizable(f"no escape interval within {budget} preimages")
    return x, zs, k


def escape_interval(g: GeneralizedFirstReturn, budget: int = 500, orbit_steps: int = 64):
    """``(W1, Wg)``: the escape interval and the first return of g to it."""
    _, zs, k = escape_chain(g, budget)
    W1 = RealInterval.symmetric(zs[k])
    rule = ReturnRule("first_return", parent=g)
    Wg = GeneralizedFirstReturn(g.family, g.base, W1, rule, budget=g.budget)
    return W1, _finalise(Wg, orbit_steps)


def central_cascade_intervals(g: GeneralizedFirstReturn, budget: int = 500) -> list:
    """Nested intervals ``T^{2,i}``, ``i = 1, ..., s0 - 2``, around c."""
    if not g.has_low_return():
        raise HighReturn("central cascade needs a low return")
    s0, _, _ = _first_exit(g, budget)
    fam = g.family
    j = g.central.iterate
    out = []
    for i in range(1, s0 - 1):
        comp, _ = pull_back_interval_along_orbit(fam, g.base, orbit(fam, 0.0, (i + 1) * j).points)
        out.append(comp)
    return out
