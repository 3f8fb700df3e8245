"""Run configuration, report documents and the command implementations.

A report is one JSON document per run.  Every numeric result is stored as a
``{"value", "tol", "provenance"}`` record where provenance is ``formula``,
``measurement`` or ``search``.  Checks against reference values are collected
separately so the CLI can turn them into an exit code.  The only wall-clock
content lives under ``"metadata"``, which :meth:`Report.canonical` drops.

Tables go to CSV and curves to SVG with a fixed view box.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import bounds as B
from . import builder as P
from . import geometry as G
from .core import PolynomialFamily, RealInterval
from .errors import PolylikeError
from .returns import (
    _attracting_cycle,
    classify_return,
    critical_orbit_escapes,
    detect_renormalization,
    fibonacci_return_times,
    first_return_map,
    nice_interval,
    nice_point_sequence,
)
from .search import ParameterQuery, fibonacci_numbers

log = logging.getLogger(__name__)

SCHEMA_VERSION = "polylike-report/1"
OUT_DIR_ENV = "POLYLIKE_OUT_DIR"
VIEWBOX = (-2.5, -2.5, 2.5, 2.5)
FORMATS = ("json", "csv", "svg")

DEFAULT_DEGREES = (2, 4, 6, 8)
DEFAULT_Y_GRID = (0.5, 0.6, 0.625, 2.0 / 3.0, 0.75, 0.8025)
DEFAULT_K_GRID = (1.5, 2.0, 2.2, 3.0)
DEFAULT_Z_THETAS = (0.1, 0.03, 0.01, 0.003, 0.001)

# (label, callable, expected, tolerance) for the published constants
BOUND_REFERENCES = (
    ("K_star(2, 0.625)", lambda: B.K_star(2, 0.625), 1.19371, 1e-4),
    ("K_star(4, 0.625)", lambda: B.K_star(4, 0.625), 0.951366, 1e-4),
    ("K_star(2, 2/3)", lambda: B.K_star(2, 2.0 / 3.0), 1.36237, 1e-4),
    ("K_star(4, 2/3)", lambda: B.K_star(4, 2.0 / 3.0), 1.0941, 1e-4),
    ("K_star(6, 2/3)", lambda: B.K_star(6, 2.0 / 3.0), 1.02502, 1e-4),
    ("K_star(8, 2/3)", lambda: B.K_star(8, 2.0 / 3.0), 0.993, 1e-4),
    ("K_star(2, 3/4)", lambda: B.K_star(2, 0.75), 1.8660, 1e-4),
    ("K_star_limit(3/4)", lambda: B.K_star_limit(0.75), 1.2788, 1e-4),
    ("K_bound(4, 0.51, 3/4)", lambda: B.K_bound(4, 0.51, 0.75), 0.991818, 1e-4),
    ("K_star(4, 0.8025)", lambda: B.K_star(4, 0.8025), 1.97063, 1e-4),
    ("K_star(4, 3/4)", lambda: B.K_star(4, 0.75), 1.51983, 1e-4),
)


class ConfigError(PolylikeError, ValueError):
    """A run configuration that cannot be used."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    degree: int = 2
    c1: Optional[float] = None
    param_query: Optional[str] = None
    variant: Optional[str] = None
    thetas: tuple = ()
    levels: tuple = ()
    samples: int = G.DEFAULT_SAMPLES
    tol: float = 1e-4
    out_dir: str = "."
    formats: tuple = ("json",)
    y_grid: tuple = DEFAULT_Y_GRID
    K_grid: tuple = DEFAULT_K_GRID
    degrees: tuple = DEFAULT_DEGREES
    max_period: int = 64
    depth: int = 8
    jobs: int = 1

    def __post_init__(self):
        if self.degree < 2 or self.degree % 2:
            raise ConfigError(f"degree must be an even integer >= 2, got {self.degree}")
        if not self.tol > 0.0:
            raise ConfigError("tolerances must be positive")
        if self.samples < 16:
            raise ConfigError("samples must be at least 16")
        for th in self.thetas:
            if not (0.0 < th <= math.pi / 2):
                raise ConfigError(f"theta must lie in (0, pi/2], got {th}")
        for fmt in self.formats:
            if fmt not in FORMATS:
                raise ConfigError(f"unknown format {fmt!r}; choose from {FORMATS}")
        if any(lv < 0 for lv in self.levels):
            raise ConfigError("levels are non-negative indices")
        if self.variant is not None and self.variant not in P.VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {P.VARIANTS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        for key in ("thetas", "levels", "formats", "y_grid", "K_grid", "degrees"):
            if key in kw and kw[key] is not None:
                kw[key] = tuple(kw[key])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str, overrides: Optional[dict] = None) -> "RunConfig":
        """Read a JSON config file; entries of ``overrides`` that are not ``None`` win."""
        data = read_config_file(path)
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(data)

    def family(self) -> PolynomialFamily:
        """The map selected by ``c1`` or by solving ``param_query``."""
        if self.c1 is not None:
            return PolynomialFamily(self.degree, float(self.c1))
        if self.param_query:
            return PolynomialFamily(self.degree, ParameterQuery.parse(self.param_query, self.degree).solve())
        raise ConfigError("need --c1 or --param-query")

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


# ---------------------------------------------------------------------------
# report documents


def quantity(value, tol: float = 0.0, provenance: str = "measurement") -> dict:
    """A numeric entry with its tolerance and provenance."""
    return {"value": _plain(value), "tol": tol, "provenance": provenance}


def _plain(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, RealInterval):
        return [v.lo, v.hi]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


@dataclass(frozen=True)
class Check:
    name: str
    value: Any
    expected: Any
    tol: float
    passed: bool
    provenance: str = "formula"

    def as_dict(self) -> dict:
        return {"name": self.name, "value": _plain(self.value), "expected": _plain(self.expected),
                "tol": self.tol, "passed": bool(self.passed), "provenance": self.provenance}


def close_check(name: str, value: float, expected: float, tol: float, provenance: str = "formula") -> Check:
    return Check(name, value, expected, tol, abs(value - expected) <= tol, provenance)


@dataclass
class Report:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    usable: bool = True

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def canonical(self) -> dict:
        """The report without the wall-clock metadata."""
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": _plain(self.config),
            "results": _plain(self.results),
            "checks": [c.as_dict() for c in self.checks],
            "errors": list(self.errors),
            "artifacts": list(self.artifacts),
            "usable": self.usable,
            "passed": self.passed,
        }

    def as_dict(self) -> dict:
        out = self.canonical()
        out["metadata"] = dict(self.metadata)
        return out

    def to_json(self, canonical: bool = False) -> str:
        return json.dumps(self.canonical() if canonical else self.as_dict(), indent=2) + "\n"


def _ensure_dir(path: str) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    return p


def write_text(path: Path, text: str) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return str(path)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in row])
    return buf.getvalue()


def finish(report: Report, config: RunConfig, stem: str, csv_tables: Optional[dict] = None,
           svgs: Optional[dict] = None) -> Report:
    """Write the requested formats to ``config.out_dir`` and record the paths."""
    out = _ensure_dir(config.out_dir)
    if "csv" in config.formats:
        for name, text in sorted((csv_tables or {}).items()):
            report.artifacts.append(Path(write_text(out / f"{stem}_{name}.csv", text)).name)
    if "svg" in config.formats:
        for name, text in sorted((svgs or {}).items()):
            report.artifacts.append(Path(write_text(out / f"{stem}_{name}.svg", text)).name)
    report.metadata["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    if "json" in config.formats:
        path = out / f"{stem}.json"
        report.artifacts.append(path.name)
        write_text(path, report.to_json())
    return report


# ---------------------------------------------------------------------------
# SVG


class SvgCanvas:
    """Polylines in a fixed square view box; ``y`` is flipped so up is ``+Im``."""

    def __init__(self, viewbox=VIEWBOX, size: int = 800):
        self.x0, self.y0, self.x1, self.y1 = viewbox
        self.size = size
        self.items: list[str] = []

    def _xy(self, z) -> tuple:
        z = complex(z)
        return z.real, -z.imag

    def polyline(self, points, stroke: str, closed: bool = False, width: float = 0.004,
                 label: str = "", max_points: int = 4000, **attrs) -> None:
        pts = np.asarray(points, dtype=complex)
        if pts.size > max_points:
            pts = pts[np.linspace(0, pts.size - 1, max_points).astype(int)]
        coords = " ".join(f"{z.real:.6g},{-z.imag:.6g}" for z in pts)
        tag = "polygon" if closed else "polyline"
        extra = "".join(f' {k.replace("_", "-")}="{v}"' for k, v in sorted(attrs.items()))
        title = f"<title>{label}</title>" if label else ""
        self.items.append(f'<{tag} points="{coords}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{width}"{extra}>{title}</{tag}>')

    def segment(self, a: float, b: float, stroke: str, label: str = "", width: float = 0.012) -> None:
        """A real-axis segment ``[a, b]`` whose exact endpoints are kept as attributes."""
        title = f"<title>{label}</title>" if label else ""
        self.items.append(f'<line x1="{a!r}" y1="0" x2="{b!r}" y2="0" stroke="{stroke}" '
                          f'stroke-width="{width}" data-lo="{a!r}" data-hi="{b!r}">{title}</line>')

    def render(self) -> str:
        w, h = self.x1 - self.x0, self.y1 - self.y0
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
                f'viewBox="{self.x0} {self.y0} {w} {h}">')
        axes = (f'<line x1="{self.x0}" y1="0" x2="{self.x1}" y2="0" stroke="#bbb" stroke-width="0.002"/>'
                f'<line x1="0" y1="{self.y0}" x2="0" y2="{self.y1}" stroke="#bbb" stroke-width="0.002"/>')
        return "\n".join([head, axes, *self.items, "</svg>"]) + "\n"


def scaled_viewbox(extent: float) -> tuple:
    """A square view box of half-width ``extent`` centred at 0."""
    return (-extent, -extent, extent, extent)


# ---------------------------------------------------------------------------
# bounds


def bound_rows(degrees: Sequence[int], y_grid: Sequence[float], K_grid: Sequence[float]) -> list:
    rows = []
    for ell in degrees:
        for y in y_grid:
            rows.append(("K_star", ell, y, B.K_star(ell, y), B.K_star_limit(y), None, None))
    for K in K_grid:
        rows.append(("A_star", None, None, None, None, K, G.A_star(K)))
    return rows


BOUND_HEADER = ("table", "degree", "y", "K_star", "K_star_limit", "K", "A_star")


def cmd_bounds(config: RunConfig) -> Report:
    rows = bound_rows(config.degrees, config.y_grid, config.K_grid)
    rep = Report("bounds", config.as_dict())
    rep.results["K_star"] = [
        {"degree": r[1], "y": r[2], "K_star": quantity(r[3], 1e-15, "formula"),
         "K_star_limit": quantity(r[4], 1e-15, "formula")} for r in rows if r[0] == "K_star"]
    rep.results["A_star"] = [{"K": r[5], "A_star": quantity(r[6], 1e-12, "formula")}
                             for r in rows if r[0] == "A_star"]
    rep.results["space_bounds"] = {
        "renormalizable": quantity(B.BOUND_RENORMALIZABLE, 0.0, "formula"),
        "half_period": quantity(B.BOUND_HALF_PERIOD, 0.0, "formula"),
        "high_return": quantity(B.BOUND_HIGH_RETURN, 0.0, "formula"),
    }
    for name, fn, expected, tol in BOUND_REFERENCES:
        rep.checks.append(close_check(name, fn(), expected, tol))
    return finish(rep, config, "bounds", {"table": csv_text(BOUND_HEADER, rows)})


# ---------------------------------------------------------------------------
# analyze


def _space_entry(fam: PolynomialFamily, data: B.LevelData) -> dict:
    m = B.measure_space_ratio(fam, data)
    return {
        "ratio": quantity(m.ratio, 1e-9),
        "bound": quantity(m.bound_class, 0.0, "formula"),
        "y": quantity(m.y, 1e-9),
        "f_V": m.fV, "L": m.L, "l": m.l, "U_hat": m.U_hat,
        "details": {k: v for k, v in m.details},
        "satisfied": m.satisfied,
    }


def classify_parameter(fam: PolynomialFamily, config: RunConfig, rep: Report) -> str:
    """Fill ``rep.results`` with the classification; returns its label."""
    if critical_orbit_escapes(fam):
        rep.results["classification"] = "escaping"
        return "escaping"
    cyc = _attracting_cycle(fam)
    if cyc is not None:
        rep.results["attracting_cycle"] = {"period": cyc[0], "multiplier": quantity(cyc[1], 1e-9)}
    levels = detect_renormalization(fam, config.max_period)
    if levels:
        rep.results["classification"] = "renormalizable"
        rep.results["periods"] = [lv.period for lv in levels]
        entries = []
        for i, lv in enumerate(levels):
            entry = {"level": i, "period": lv.period, "endpoint": quantity(lv.endpoint, 1e-13, "search"),
                     "multiplier": quantity(lv.multiplier, 1e-9), "half_period": lv.half_period}
            try:
                entry["space"] = _space_entry(fam, B.LevelData.from_renormalization(fam, lv, i))
            except PolylikeError as exc:
                entry["error"] = f"{type(exc).__name__}: {exc}"
            entries.append(entry)
        rep.results["levels"] = entries
        return "renormalizable"
    if cyc is not None:
        rep.results["classification"] = "attracting"
        return "attracting"
    rep.results["classification"] = "non_renormalizable"
    try:
        S = fibonacci_return_times(fam, config.depth)
        rep.results["closest_returns"] = list(S)
        rep.results["fibonacci"] = tuple(S) == tuple(fibonacci_numbers(10 ** 9)[: config.depth])
    except PolylikeError as exc:
        rep.results["closest_returns_error"] = f"{type(exc).__name__}: {exc}"
        rep.results["fibonacci"] = False
    entries = []
    try:
        us = nice_point_sequence(fam, config.depth)
    except PolylikeError as exc:
        rep.errors.append(f"nice points: {type(exc).__name__}: {exc}")
        us = []
    for n, u in enumerate(us[: config.depth]):
        entry = {"level": n, "nice_point": quantity(u, 1e-13, "search")}
        try:
            rms = first_return_map(fam, nice_interval(fam, u))
            cls_ = classify_return(rms)
            entry["return"] = cls_.label
            entry["central_iterate"] = rms.central.iterate
            entry["branches"] = len(rms.branches)
            data = B.LevelData.from_nice_interval(fam, u, n)
            entry["next_return"] = data.return_label
            if data.kind == "high_return":
                entry["space"] = _space_entry(fam, data)
        except PolylikeError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        entries.append(entry)
    rep.results["levels"] = entries
    return "non_renormalizable"


def cmd_analyze(config: RunConfig) -> Report:
    fam = config.family()
    rep = Report("analyze", config.as_dict())
    rep.results["degree"] = fam.degree
    rep.results["c1"] = quantity(fam.critical_value, 0.0, "search" if config.c1 is None else "formula")
    classify_parameter(fam, config, rep)
    for entry in rep.results.get("levels", []):
        sp = entry.get("space")
        if sp is not None:
            rep.checks.append(Check(f"space ratio level {entry['level']}", sp["ratio"]["value"],
                                    f">= {sp['bound']['value']}", 1e-6, sp["satisfied"], "measurement"))
    rows = [(e["level"], e.get("period", ""), e.get("return", "renormalizable" if "period" in e else ""),
             e["space"]["ratio"]["value"] if "space" in e else None,
             e["space"]["bound"]["value"] if "space" in e else None)
            for e in rep.results.get("levels", [])]
    table = csv_text(("level", "period", "return", "space_ratio", "bound"), rows)
    return finish(rep, config, "analyze", {"levels": table})


# ---------------------------------------------------------------------------
# construct


def default_variant(degree: int, kind: str) -> str:
    if degree == 2:
        return "doubling_13" if kind == "renormalizable" else "quadratic_9"
    return "general_12"


def level_data(fam: PolynomialFamily, config: RunConfig) -> list:
    """``LevelData`` for the requested level indices (all found levels when none are given)."""
    lvs = detect_renormalization(fam, config.max_period)
    if lvs:
        idx = config.levels or tuple(range(len(lvs)))
        out = []
        for i in idx:
            if i >= len(lvs):
                out.append((i, f"DepthExhausted: only {len(lvs)} renormalization levels"))
            else:
                out.append((i, B.LevelData.from_renormalization(fam, lvs[i], i)))
        return out
    idx = config.levels or tuple(range(min(config.depth, 5)))
    us = nice_point_sequence(fam, max(idx) + 1)
    return [(i, B.LevelData.from_nice_interval(fam, us[i], i)) for i in idx]


def construct_level(fam: PolynomialFamily, data: B.LevelData, variant: Optional[str],
                    thetas: Sequence[float], samples: int) -> dict:
    """Build, verify and assemble one level; failures become an ``error`` entry."""
    var = variant or default_variant(fam.degree, data.kind)
    entry: dict = {"level": data.level, "period": data.s, "kind": data.kind, "variant": var,
                   "V": data.V, "U": data.U}
    try:
        if var == "round_disc_8":
            cands = [None]
        elif thetas:
            cands = list(thetas)
        elif var == "general_12":
            cands = list(P.THETA_SCAN)
        else:
            cands = [P.DEFAULT_THETA[var]]
        attempts = []
        chosen = None
        for th in sorted(cands, key=lambda t: -1.0 if t is None else -t):
            omega = P.build_omega(fam, data, var, th)
            try:
                curve, rep = P.verify_containment(fam, omega, data, samples)
            except PolylikeError as exc:
                attempts.append({"theta": th, "error": f"{type(exc).__name__}: {exc}"})
                continue
            attempts.append({"theta": th, "contained": rep.contained})
            if rep.contained:
                chosen = (th, omega, curve, rep)
                break
        entry["theta_attempts"] = attempts
        if chosen is None:
            entry["contained"] = False
            entry["error"] = "no theta gave a contained pullback"
            return entry
        th, omega, curve, rep = chosen
        entry["theta"] = omega.theta
        entry["contained"] = True
        entry["containment"] = {k: (quantity(v, 0.5 * curve.max_step, "measurement")
                                    if isinstance(v, float) else v) for k, v in rep.as_dict().items()}
        entry["omega"] = {"trace": omega.trace, "diameter": quantity(omega.diameter(), 1e-12, "formula"),
                          "parameters": {k: v for k, v in omega.parameters}}
        plm = P.assemble_polylike(fam, data, omega, samples, report=rep, curve=curve)
        entry["fitin_ratio"] = quantity(plm.fitin_ratio, 1e-12, "measurement")
        entry["central_trace"] = plm.central.trace
        entry["off_central"] = [{"trace": r.trace, "iterate": r.iterate} for r in plm.off_central]
        entry["svg"] = _construct_svg(plm)
    except PolylikeError as exc:
        entry["error"] = f"{type(exc).__name__}: {exc}"
    return entry


def _construct_svg(plm: P.PolyLikeMap) -> str:
    omega_curve = plm.range.sample_boundary(2048)
    x0, x1, y0, y1 = omega_curve.bounding_box()
    extent = max(abs(x0), abs(x1), abs(y0), abs(y1))
    # the fixed box is used whenever the range fits in it
    canvas = SvgCanvas(VIEWBOX if extent <= 2.5 else scaled_viewbox(1.05 * extent))
    canvas.polyline(omega_curve.points, "#1f77b4", closed=True, label="Omega")
    canvas.polyline(plm.central.boundary.points, "#d62728", closed=True, label="pullback of boundary")
    for r in plm.off_central:
        canvas.polyline(r.boundary.points, "#2ca02c", closed=True, label=f"branch f^{r.iterate}")
    canvas.segment(plm.range.trace.lo, plm.range.trace.hi, "#1f77b4", "trace of Omega")
    for r in plm.off_central:
        canvas.segment(r.trace.lo, r.trace.hi, "#2ca02c", "branch trace")
    canvas.segment(plm.central.trace.lo, plm.central.trace.hi, "#d62728", "central trace")
    return canvas.render()


def _construct_job(args):
    fam, data, variant, thetas, samples = args
    return construct_level(fam, data, variant, thetas, samples)


def cmd_construct(config: RunConfig) -> Report:
    fam = config.family()
    rep = Report("construct", config.as_dict())
    rep.results["c1"] = quantity(fam.critical_value, 0.0, "search" if config.c1 is None else "formula")
    if critical_orbit_escapes(fam):
        rep.errors.append("DomainError: the critical orbit escapes; there is no level to build")
        rep.usable = False
        return finish(rep, config, "construct")
    jobs = []
    entries = []
    for i, data in level_data(fam, config):
        if isinstance(data, str):
            entries.append((i, {"level": i, "error": data}))
        else:
            jobs.append((i, (fam, data, config.variant, config.thetas, config.samples)))
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            done = list(ex.map(_construct_job, [a for _, a in jobs]))
    else:
        done = [_construct_job(a) for _, a in jobs]
    entries += [(i, e) for (i, _), e in zip(jobs, done)]
    entries.sort(key=lambda t: t[0])
    svgs = {}
    levels = []
    for i, e in entries:
        svg = e.pop("svg", None)
        if svg is not None:
            svgs[f"level{i}"] = svg
        levels.append(e)
        rep.checks.append(Check(f"containment level {i}", e.get("contained", False), True, 0.0,
                                bool(e.get("contained", False)), "measurement"))
        if "error" in e:
            rep.errors.append(f"level {i}: {e['error']}")
    rep.results["levels"] = levels
    rows = [(e["level"], e.get("period"), e.get("variant"), e.get("theta"), e.get("contained", False),
             e["containment"]["min_margin"]["value"] if "containment" in e else None,
             e["containment"]["modulus_lower_bound"]["value"] if "containment" in e else None,
             e["fitin_ratio"]["value"] if "fitin_ratio" in e else None) for e in levels]
    table = csv_text(("level", "period", "variant", "theta", "contained", "min_margin",
                      "modulus_lower_bound", "fitin_ratio"), rows)
    return finish(rep, config, "construct", {"levels": table}, svgs)


# ---------------------------------------------------------------------------
# geometry


def cmd_geometry(config: RunConfig) -> Report:
    rep = Report("geometry", config.as_dict())
    thetas = config.thetas or DEFAULT_Z_THETAS
    z_rows = []
    for K in config.K_grid:
        for th in thetas:
            try:
                z = G.intersection_Z(K, th)
                z_rows.append((K, th, z.real, z.imag, abs(z - K * K)))
            except PolylikeError as exc:
                z_rows.append((K, th, None, None, None))
                rep.errors.append(f"Z({K}, {th}): {type(exc).__name__}: {exc}")
    rep.results["Z"] = [{"K": r[0], "theta": r[1], "point": quantity(None if r[2] is None else [r[2], r[3]], 1e-10),
                         "distance_to_K2": quantity(r[4], 1e-10)} for r in z_rows]
    z15 = G.intersection_Z(1.5, 1e-3)
    rep.checks.append(Check("|Z(1.5, 1e-3) - 2.25|", abs(z15 - 2.25), "< 1e-2", 1e-2, abs(z15 - 2.25) < 1e-2,
                            "measurement"))

    a_rows = [(K, G.A_star(K)) for K in config.K_grid]
    rep.results["A_star"] = [{"K": K, "A_star": quantity(a, 1e-12, "formula")} for K, a in a_rows]
    a22 = G.A_star(2.2)
    rep.checks.append(Check("A_star(2.2)", a22, "1.04 and < 1.1", 0.01, abs(a22 - 1.04) <= 0.01 and a22 < 1.1))

    c1 = []
    for K in (1.5, 2.0, 3.0):
        roots = G.solve_C1(G.A_star(K), K)
        ok = any(abs(r - (K - 1.0)) <= 1e-6 for r in roots)
        c1.append({"K": K, "roots": quantity(roots, 1e-6, "search")})
        rep.checks.append(Check(f"solve_C1 double root at K-1, K={K}", roots, K - 1.0, 1e-6, ok, "search"))
    rep.results["solve_C1"] = c1

    empty = [r for r in G.solve_D15(1.07, 1.52, 4) if 0.0 <= r <= 1.04]
    rep.results["solve_D15"] = {
        "A=1.07": quantity(empty, 1e-4, "search"),
        "A=1.05835": quantity(G.solve_D15(1.05835, 1.52, 4), 1e-4, "search"),
        "threshold": quantity(G.d15_threshold(1.52), 1e-8, "search"),
    }
    rep.checks.append(Check("solve_D15(1.07, 1.52, 4) empty on [0, 1.04]", empty, [], 0.0, not empty, "search"))
    near = G.solve_D15(1.05835, 1.52, 4)
    rep.checks.append(Check("solve_D15(1.05835, 1.52, 4) root at 1.04", near, 1.04, 1e-3,
                            any(abs(r - 1.04) <= 1e-3 for r in near), "search"))

    h = G.h_root_report()
    rep.results["h_polynomial"] = {
        "roots": quantity(list(h.roots), 1e-10, "search"),
        "second_derivative_roots": quantity(list(h.second_derivative_roots), 1e-10, "search"),
        "roots_at_least_one": list(h.roots_at_least_one),
        "value_at_one": quantity(h.value_at_one, 1e-15, "formula"),
        "derivative_at_right_inflection": quantity(h.derivative_at_right_inflection, 1e-12, "formula"),
    }
    rep.checks.append(Check("h has no root >= 1", list(h.roots_at_least_one), [], 0.0, not h.roots_at_least_one,
                            "search"))
    for want in (0.2000905878, 1.201269956):
        got = min(h.second_derivative_roots, key=lambda r: abs(r - want))
        rep.checks.append(close_check(f"h'' root near {want}", got, want, 1e-6, "search"))

    spiral_svg, spiral_rows = spiral_overlay()
    rep.results["spiral_vs_power"] = [{"degree": d, "max_distance": quantity(e, 1e-9)} for d, e in spiral_rows]
    tables = {
        "Z": csv_text(("K", "theta", "re", "im", "distance_to_K2"), z_rows),
        "A_star": csv_text(("K", "A_star"), a_rows),
    }
    return finish(rep, config, "geometry", tables, {"spiral": spiral_svg})


def spiral_overlay(theta: float = 0.3, degrees: Sequence[int] = (2, 4, 8, 16, 32), n: int = 400):
    """Spiral arc against power images of the Poincare boundary; returns ``(svg, [(degree, max distance)])``.

    The spiral and the curves are scaled by ``exp(-pi cot(theta))`` so the arc
    fits the unit disc.
    """
    lam = np.linspace(0.0, math.pi, n)
    arc = G.SpiralArc(1.0, theta)
    spiral = arc.point(lam)
    scale = 2.0 / float(np.abs(spiral).max())
    canvas = SvgCanvas()
    canvas.polyline(spiral * scale, "#000000", label="spiral")
    rows = []
    palette = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
    for k, d in enumerate(degrees):
        pts = np.array([G.power_boundary_point(d, theta, float(x)) for x in lam])
        rows.append((d, float(np.max(np.abs(pts - spiral) / np.abs(spiral)))))
        canvas.polyline(pts * scale, palette[k % len(palette)], label=f"degree {d}")
    return canvas.render(), rows


# ---------------------------------------------------------------------------
# search


def cmd_search(config: RunConfig) -> Report:
    if not config.param_query:
        raise ConfigError("search needs --param-query")
    q = ParameterQuery.parse(config.param_query, config.degree)
    rep = Report("search", config.as_dict())
    c = q.solve()
    rep.results["query"] = {"target": q.target, "order": q.order,
                            "bracket": None if q.bracket is None else q.bracket}
    rep.results["c1"] = quantity(c, 1e-12, "search")
    fam = PolynomialFamily(config.degree, c)
    if q.target in ("superstable", "cascade"):
        p = q.order if q.target == "superstable" else 2 ** q.order
        res = abs(float(fam.iterate(0.0, p)))
        rep.results["period"] = p
        rep.results["residual"] = quantity(res, 0.0, "measurement")
        rep.checks.append(Check(f"|f^{p}(0)|", res, 0.0, config.tol, res <= config.tol, "search"))
    else:
        S = fibonacci_return_times(fam, q.order)
        rep.results["closest_returns"] = list(S)
        want = fibonacci_numbers(10 ** 9)[: q.order]
        rep.checks.append(Check("closest returns are Fibonacci", list(S), want, 0.0, list(S) == want, "search"))
    return finish(rep, config, "search")


COMMANDS = {
    "bounds": cmd_bounds,
    "analyze": cmd_analyze,
    "construct": cmd_construct,
    "geometry": cmd_geometry,
    "search": cmd_search,
}
