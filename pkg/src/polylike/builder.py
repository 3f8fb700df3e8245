"""Candidate ranges Omega, their pullbacks and the assembled polynomial-like maps.

Given a level (``V`` central, ``U`` the central domain of the return to ``V``
with iterate ``s``) the central branch of the return map is ``f^s = f o f^{s-1}``
and ``F`` denotes the inverse branch of ``f^{s-1}`` which sends ``c_s`` to
``c_1``.  A range ``Omega`` works when ``f^{-1}(F(boundary of Omega))`` lies
inside ``Omega``; the curve is computed by continuing ``F`` analytically off
the real line and then taking all ``degree`` roots of the last step.

Every ``Omega`` built here is star-shaped about 0, so its boundary is sampled
from the component boundaries and ordered by argument.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .bounds import LevelData, find_expansion_point, monotone_hull, pulled_back_image
from .core import (
    PolynomialFamily,
    RealInterval,
    continue_inverse_branch,
    critical_orbit,
    interval_image,
    orbit,
)
from .errors import (
    DomainError,
    DomainOverlap,
    ExtensionTooShort,
    FitinViolated,
    PolylikeError,
    VariantMismatch,
)
from .geometry import DEFAULT_SAMPLES, PoincareNeighborhood, SampledCurve, union_margin
from .returns import RenormalizationLevel, first_return_map, nice_interval

log = logging.getLogger(__name__)

VARIANTS = ("round_disc_8", "quadratic_9", "large_degree_11", "general_12", "doubling_13")
DEFAULT_THETA = {"quadratic_9": 0.05, "doubling_13": 0.05, "large_degree_11": 0.05, "general_12": 0.05}
THETA_SCAN = (0.3, 0.2, 0.1, 0.05, 0.02)
MAX_SAMPLES = 1 << 17
EPSILON_FRACTION = 1e-3
EPSILON_HALVINGS = 10


def extension_factor(variant: str, degree: int) -> float:
    """Right end of ``I`` divided by the endpoint of ``V``."""
    if variant == "quadratic_9":
        return 6.0 / 5.0
    if variant == "large_degree_11":
        return 1.0 + math.log(1.1) / degree
    if variant == "general_12":
        return 1.07 ** (1.0 / degree)
    if variant == "doubling_13":
        return 1.09 ** 0.5
    raise VariantMismatch(f"variant {variant!r} has no interval I")


# ---------------------------------------------------------------------------
# the range


@dataclass(frozen=True)
class OmegaDomain:
    components: tuple
    variant: str
    theta: float
    parameters: tuple = ()

    @property
    def trace(self) -> RealInterval:
        """``Omega`` intersected with the real line."""
        return RealInterval(min(c.interval.lo for c in self.components),
                            max(c.interval.hi for c in self.components))

    def margin(self, z) -> np.ndarray:
        return union_margin(self.components, z)

    def contains(self, z, tol: float = 0.0) -> bool:
        return bool(np.all(self.margin(z) > -tol))

    def diameter(self) -> float:
        pts = self.sample_boundary(2048).points
        return float(max(np.ptp(pts.real), 2 * np.abs(pts.imag).max()))

    def sample_boundary(self, n: int = DEFAULT_SAMPLES) -> SampledCurve:
        """Boundary of the union, ordered by argument (``n`` samples per component)."""
        scale = self.trace.length
        keep = []
        for i, D in enumerate(self.components):
            pts = D.sample_boundary(n).points
            others = [C for j, C in enumerate(self.components) if j != i]
            if others:
                pts = pts[union_margin(others, pts) <= 1e-13 * scale]
            keep.append(pts)
        pts = np.concatenate(keep)
        arg = np.mod(np.angle(pts), 2 * np.pi)
        order = np.argsort(arg, kind="stable")
        pts = pts[order]
        _, first = np.unique(np.round(pts / (1e-14 * scale)), return_index=True)
        pts = pts[np.sort(first)]
        return SampledCurve(pts, closed=True)

    def inner_radius(self, n: int = DEFAULT_SAMPLES) -> float:
        """Distance from 0 to the boundary."""
        return float(np.abs(self.sample_boundary(n).points).min())


def build_omega(fam: PolynomialFamily, data: LevelData, variant: str, theta: Optional[float] = None,
                expansion=None) -> OmegaDomain:
    """The range ``Omega`` of the given variant at one level.

    ``round_disc_8`` needs ``degree >= 4`` and a renormalizable level; its disc
    is ``D_*((-f^s(u~), f^s(u~)))`` with ``u~`` from
    :func:`~polylike.bounds.find_expansion_point` (computed if not given).
    ``quadratic_9`` and ``doubling_13`` need ``degree == 2``; ``general_12``
    needs ``degree >= 4``.
    """
    if variant not in VARIANTS:
        raise VariantMismatch(f"unknown variant {variant!r}; choose one of {VARIANTS}")
    ell = fam.degree
    v = data.V.hi
    if variant == "round_disc_8":
        if ell < 4:
            raise VariantMismatch("the round disc range needs degree >= 4")
        if data.kind != "renormalizable":
            raise VariantMismatch("the round disc range needs a renormalizable level")
        if expansion is None:
            p = _periodic_point(fam, data)
            expansion = find_expansion_point(fam, (data.s, p))
        r = expansion.disc_radius
        D = PoincareNeighborhood.round_disc(RealInterval.symmetric(r))
        return OmegaDomain((D,), variant, math.pi / 2, (("u_tilde", expansion.u_tilde), ("radius", r)))
    if variant in ("quadratic_9", "doubling_13") and ell != 2:
        raise VariantMismatch(f"variant {variant} is for degree 2")
    if variant == "general_12" and ell < 4:
        raise VariantMismatch("variant general_12 is for degree >= 4")
    th = DEFAULT_THETA[variant] if theta is None else float(theta)
    k = extension_factor(variant, ell)
    right = k * v
    DV = PoincareNeighborhood(data.V, th)
    if variant == "quadratic_9":
        DI = PoincareNeighborhood.round_disc(RealInterval(0.0, right))
        DJ = PoincareNeighborhood.round_disc(RealInterval(-right, 0.0))
    else:
        DI = PoincareNeighborhood(RealInterval(0.0, right), th)
        DJ = PoincareNeighborhood(RealInterval(-right, 0.0), th)
    return OmegaDomain((DV, DI, DJ), variant, th, (("factor", k), ("v", v)))


def _periodic_point(fam: PolynomialFamily, data: LevelData) -> float:
    """The endpoint of ``V`` fixed by ``f^s``."""
    v = data.V.hi
    for p in (v, -v):
        if abs(fam.iterate(p, data.s) - p) <= 1e-8 * max(1.0, v):
            return p
    raise VariantMismatch("no endpoint of V is fixed by f^s")


# ---------------------------------------------------------------------------
# pullbacks


def extension_interval(fam: PolynomialFamily, data: LevelData) -> RealInterval:
    """Image under ``f^{s-1}`` of the maximal monotone extension of ``U_hat``."""
    U_hat = pulled_back_image(fam, data.U, data.V, data.s)
    H = monotone_hull(fam, U_hat, data.s - 1)
    for _ in range(data.s - 1):
        H = interval_image(fam, H)
    return H


def _F(fam: PolynomialFamily, data: LevelData, w):
    ref = critical_orbit(fam, data.s).points
    return continue_inverse_branch(fam, w, ref)


def pullback_boundary(fam: PolynomialFamily, omega: OmegaDomain, data: LevelData,
                      samples: int = DEFAULT_SAMPLES) -> SampledCurve:
    """``f^{-1}(F(boundary of Omega))`` as a closed curve around 0."""
    trace = omega.trace
    T = extension_interval(fam, data)
    if not (T.lo < trace.lo and trace.hi < T.hi):
        raise ExtensionTooShort(
            f"real trace {trace.as_tuple()} of Omega is not inside the monotone extension {T.as_tuple()}")
    bd = omega.sample_boundary(samples).points
    w = _F(fam, data, bd) - fam.critical_value
    phi = np.unwrap(np.angle(w))
    turns = (phi[-1] - phi[0] + np.angle(w[0] / w[-1])) / (2 * np.pi)
    sigma = int(round(turns))
    if abs(sigma) != 1:
        raise DomainError(f"F(boundary) winds {turns:.3f} times around c_1")
    rho = np.abs(w) ** (1.0 / fam.degree)
    sheets = [rho * np.exp(1j * (phi + 2 * np.pi * sigma * k) / fam.degree) for k in range(fam.degree)]
    return SampledCurve(np.concatenate(sheets), closed=True)


def central_trace(fam: PolynomialFamily, omega: OmegaDomain, data: LevelData) -> RealInterval:
    """Real trace ``f^{-1}(F(trace of Omega))`` of the central domain."""
    ends = _F(fam, data, np.array(omega.trace.as_tuple(), dtype=complex))
    a = max(float(np.max(ends.real)) - fam.critical_value, 0.0) ** (1.0 / fam.degree)
    return RealInterval.symmetric(a)


# ---------------------------------------------------------------------------
# containment


@dataclass(frozen=True)
class ContainmentReport:
    contained: bool
    min_margin: float
    corrected_margin: float
    modulus_lower_bound: float
    round_bound: float
    extremal_bound: float
    samples: int
    refinements: int = 0

    def as_dict(self) -> dict:
        return {
            "contained": self.contained,
            "min_margin": self.min_margin,
            "corrected_margin": self.corrected_margin,
            "modulus_lower_bound": self.modulus_lower_bound,
            "round_bound": self.round_bound,
            "extremal_bound": self.extremal_bound,
            "samples": self.samples,
            "refinements": self.refinements,
        }


def check_containment(curve: SampledCurve, omega: OmegaDomain, center: complex = 0.0) -> ContainmentReport:
    """Whether ``curve`` lies inside ``Omega``, with a lower bound for the modulus between them.

    Two lower bounds are computed and the larger is reported: the round
    annulus bound ``log(r_out / r_in) / 2 pi`` around ``center``, and the
    extremal-length bound ``d^2 / ((w + 2d)(h + 2d))`` where ``d`` is the
    corrected margin and ``w x h`` the bounding box of the curve (every curve
    joining the two boundaries crosses the ``d``-neighbourhood of the inner
    one, whose area is at most that of the inflated box).
    """
    pts = curve.points
    m = omega.margin(pts)
    min_margin = float(m.min())
    half = 0.5 * curve.steps()
    pair = np.minimum(m, np.roll(m, -1)) if curve.closed else np.minimum(m[:-1], m[1:])
    corrected = float((pair - half[: pair.size]).min())
    contained = min_margin > 0.0
    r_out = omega.inner_radius(max(DEFAULT_SAMPLES, len(pts) // 4))
    r_in = float(np.abs(pts - center).max())
    round_bound = math.log(r_out / r_in) / (2 * math.pi) if r_in < r_out else 0.0
    extremal = 0.0
    if corrected > 0.0:
        x0, x1, y0, y1 = curve.bounding_box()
        d = corrected
        extremal = d * d / ((x1 - x0 + 2 * d) * (y1 - y0 + 2 * d))
    modulus = max(round_bound, extremal) if contained else 0.0
    return ContainmentReport(contained, min_margin, corrected, modulus, round_bound, extremal, int(pts.size))


def verify_containment(fam: PolynomialFamily, omega: OmegaDomain, data: LevelData,
                       samples: int = DEFAULT_SAMPLES, max_samples: int = MAX_SAMPLES):
    """Double the boundary sampling until the verdict agrees across two refinements.

    Returns ``(curve, report)`` for the finest sampling used.
    """
    n = samples
    history = []
    while True:
        curve = pullback_boundary(fam, omega, data, n)
        rep = check_containment(curve, omega)
        history.append(rep.contained and rep.corrected_margin > 0.0)
        stable = len(history) >= 3 and history[-1] == history[-2] == history[-3]
        if stable or 2 * n > max_samples:
            return curve, replace(rep, refinements=len(history) - 1)
        n *= 2


def scan_theta(fam: PolynomialFamily, data: LevelData, variant: str = "general_12",
               thetas: Sequence[float] = THETA_SCAN, samples: int = DEFAULT_SAMPLES):
    """Largest ``theta`` in ``thetas`` for which the containment holds, and all reports."""
    reports = []
    best = None
    for th in sorted(thetas, reverse=True):
        omega = build_omega(fam, data, variant, th)
        try:
            _, rep = verify_containment(fam, omega, data, samples)
        except PolylikeError as exc:
            log.info("theta=%g: %s", th, exc)
            reports.append((th, None))
            continue
        reports.append((th, rep))
        if rep.contained and best is None:
            best = th
    return best, reports


# ---------------------------------------------------------------------------
# assembled maps


@dataclass(frozen=True)
class Region:
    """A domain of the polynomial-like map: a boundary polygon and its real trace.

    The map on it is ``f^iterate``.
    """

    boundary: SampledCurve
    trace: RealInterval
    iterate: int
    kind: str

    def contains(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        x0, x1, y0, y1 = self._box
        near = (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)
        out = np.zeros(z.shape, dtype=bool)
        if near.any():
            out[near] = _inside_polygon(self.boundary.points, z[near])
        return out

    @property
    def _box(self):
        return self.boundary.bounding_box()


def _inside_polygon(poly: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Even-odd ray casting, vectorised over the query points."""
    x, y = z.real[:, None], z.imag[:, None]
    a, b = poly[None, :], np.roll(poly, -1)[None, :]
    cond = (a.imag > y) != (b.imag > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    crossings = np.sum(cond & (x < xc), axis=1)
    return crossings % 2 == 1


@dataclass(frozen=True)
class PolyLikeMap:
    family: PolynomialFamily
    range: OmegaDomain
    central: Region
    off_central: tuple = ()
    containment: Optional[ContainmentReport] = None
    fitin_ratio: float = float("nan")
    epsilon: float = 0.0

    @property
    def degree(self) -> int:
        return self.family.degree

    def domains(self) -> list:
        return [self.central, *self.off_central]

    def step(self, z: complex):
        """``(R(z), region)`` or ``None`` when ``z`` is in no domain."""
        for reg in self.domains():
            if reg.contains(z)[0]:
                return complex(self.family.iterate(complex(z), reg.iterate)), reg
        return None


def fitin_ratio(fam: PolynomialFamily, data: LevelData) -> float:
    """``|u_hat^f - c_1| / |v^f - c_1|`` for the central branch."""
    U_hat = pulled_back_image(fam, data.U, data.V, data.s)
    c1 = fam.critical_value
    vf = fam(data.V.hi)
    return abs(U_hat.lo - c1) / abs(vf - c1)


def _off_central_regions(fam: PolynomialFamily, data: LevelData, omega: OmegaDomain,
                         samples: int) -> list:
    rms = first_return_map(fam, nice_interval(fam, data.V.hi))
    DV = next(c for c in omega.components if abs(c.interval.lo + c.interval.hi) < 1e-15 * c.interval.length)
    bd = DV.sample_boundary(samples).points
    out = []
    for i, br in enumerate(rms.branches):
        if br.is_central:
            continue
        x = br.domain.center
        ref = orbit(fam, x, br.iterate).points
        pts = continue_inverse_branch(fam, bd, ref)
        ends = continue_inverse_branch(fam, np.array(DV.interval.as_tuple(), dtype=complex), ref).real
        out.append(Region(SampledCurve(pts, closed=True), RealInterval.hull(*ends), br.iterate, "monotone"))
    return out


def assemble_polylike(fam: PolynomialFamily, data: LevelData, omega: OmegaDomain,
                      samples: int = DEFAULT_SAMPLES, report: Optional[ContainmentReport] = None,
                      curve: Optional[SampledCurve] = None) -> PolyLikeMap:
    """Central and off-central domains of the polynomial-like map with range ``Omega``.

    Off-central domains are pullbacks of the component of ``Omega`` on ``V``
    along the monotone branches of the first return map to ``V``, so their
    real traces are the branch intervals.
    """
    ratio = fitin_ratio(fam, data)
    if not ratio < 1.0:
        raise FitinViolated(f"fit-in ratio {ratio:.6g} is not below 1", ratio)
    if curve is None or report is None:
        curve, report = verify_containment(fam, omega, data, samples)
    if not report.contained:
        raise DomainError(f"central pullback leaves Omega (margin {report.min_margin:.3e})")
    central = Region(curve, central_trace(fam, omega, data), data.s, "central")
    off = _off_central_regions(fam, data, omega, samples) if data.kind != "renormalizable" else []
    traces = sorted([central.trace, *(r.trace for r in off)], key=lambda t: t.lo)
    for a, b in zip(traces, traces[1:]):
        if a.hi > b.lo + 1e-12 * max(a.length, b.length):
            raise DomainOverlap(f"real traces {a.as_tuple()} and {b.as_tuple()} overlap")
    return PolyLikeMap(fam, omega, central, tuple(off), report, ratio)


def epsilon_enlargement(data: LevelData, check, fraction: float = EPSILON_FRACTION,
                        halvings: int = EPSILON_HALVINGS):
    """Replace ``V`` by its ``eps``-neighbourhood, halving ``eps`` until ``check`` passes.

    ``check`` receives the enlarged level and returns a truthy value on
    success.  Returns ``(eps, enlarged_level, result)``.
    """
    eps = fraction * data.V.length
    last = None
    for _ in range(halvings + 1):
        V = RealInterval(data.V.lo - eps, data.V.hi + eps)
        enlarged = replace(data, V=V, U=V if data.kind == "renormalizable" else data.U)
        try:
            res = check(enlarged)
        except PolylikeError as exc:
            res, last = None, exc
        if res:
            return eps, enlarged, res
        eps *= 0.5
    raise VariantMismatch(f"no eps-enlargement of V passed the check ({last})")


# ---------------------------------------------------------------------------
# filled Julia set


@dataclass(frozen=True)
class JuliaMembership:
    state: str  # "inside" | "escaped"
    steps: int
    budget_limited: bool

    @property
    def inside(self) -> bool:
        return self.state == "inside"


def filled_julia_membership(plm: PolyLikeMap, z: complex, max_iter: int = 100) -> JuliaMembership:
    """Iterate the polynomial-like map until the orbit leaves every domain.

    An orbit still inside after ``max_iter`` steps is reported ``inside`` with
    ``budget_limited`` set.
    """
    z = complex(z)
    for k in range(max_iter):
        r = plm.step(z)
        if r is None:
            return JuliaMembership("escaped", k, False)
        z = r[0]
    return JuliaMembership("inside", max_iter, True)


def level_from_renormalization(fam: PolynomialFamily, lv: RenormalizationLevel, index: int = 0) -> LevelData:
    return LevelData.from_renormalization(fam, lv, index)
