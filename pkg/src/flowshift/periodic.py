"""Periodic flows: return times, period functions, circle actions, linear parts."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import flow as _flow
from .errors import CertificateFailed, DomainEscape, NotGloballyPeriodic, PreconditionError
from .fields import (SampleGrid, ScalarFieldSpec, VectorFieldSpec, finite_difference_jacobian,
                     scale_field)
from .flow import DEFAULT_CONFIG, Escape, IntegratorConfig, integrate
from .reparam import beta_of, check_positive_on_grid, make_pair
from .reports import VerificationReport, merge, summarize

SINGULAR_TOL = 1e-10
RETURN_TOL = 1e-7
SECTION_TOL = 1e-12
CIRCLE_TOL = 1e-5
EIG_TOL = 1e-6
RATIO_TOL = 1e-2


@dataclass(frozen=True)
class PeriodResult:
    """Outcome of a return-time search from one point."""

    kind: str  # "periodic", "non_periodic" or "singular"
    period: Optional[float] = None
    escaped: bool = False
    crossings: tuple = ()  # (time, distance) of every section crossing examined

    @property
    def is_periodic(self):
        return self.kind == "periodic"

    def label(self):
        if self.kind == "periodic":
            return self.period
        return "Singular" if self.kind == "singular" else "NonPeriodic"


def _interp(t, ts, ys, qs, i):
    s = (t - ts[i]) / (ts[i + 1] - ts[i])
    return ys[i] + qs[i] @ np.array([s, s * s, s ** 3, s ** 4])


def detect_period(F: VectorFieldSpec, x, t_max, cfg: IntegratorConfig = DEFAULT_CONFIG,
                  return_tol=RETURN_TOL) -> PeriodResult:
    """Smallest positive return time of ``x`` under the flow of ``F``.

    Returns are sought on the hyperplane through ``x`` normal to F(x): the
    dense trajectory is scanned for upward crossings of the signed section
    coordinate, each crossing near ``x`` is located by bisection and then
    polished with a Newton step on a fresh integration. The first crossing
    that comes back within ``return_tol`` of ``x`` is the period.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    x = np.asarray(x, dtype=float)
    fx = F(x)
    speed = float(np.linalg.norm(fx))
    if speed <= SINGULAR_TOL:
        return PeriodResult("singular")
    normal = fx / speed
    space = F.space

    # cap the step so a near-linear flow cannot jump over a whole return
    scale = min(space.torus_periods) if space.is_torus else max(1.0, float(np.linalg.norm(x)))
    scan_cfg = cfg.with_(max_step=min(cfg.max_step, 0.05 * scale / speed))
    _, stats, ts, ys, qs = _flow._solve(F.evaluate, x, t_max, scan_cfg, x.size, dense=True)
    ts = np.asarray(ts)
    ys = np.asarray(ys)
    escaped = stats.status is not Escape.REACHED_HORIZON

    def sigma(y):
        return float(normal @ space.displacement(x, y))

    sig = np.array([sigma(y) for y in ys])
    dist = np.array([space.distance(x, y) for y in ys])
    reach = np.maximum.accumulate(dist)
    crossings = []
    for i in range(len(ts) - 1):
        if not (sig[i] < 0.0 <= sig[i + 1]):
            continue
        # injectivity guess: half of the farthest excursion so far
        if min(dist[i], dist[i + 1]) > 0.5 * reach[i]:
            continue
        lo, hi = ts[i], ts[i + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            sm = sigma(_interp(mid, ts, ys, qs, i))
            if abs(sm) <= SECTION_TOL or hi - lo <= 1e-15 * max(1.0, hi):
                break
            if sm < 0:
                lo = mid
            else:
                hi = mid
        t_star = mid
        try:
            for _ in range(2):
                y_star = integrate(F, x, t_star, cfg)
                rate = float(normal @ F(y_star))
                if rate <= 0:
                    break
                t_star -= sigma(y_star) / rate
            y_star = integrate(F, x, t_star, cfg)
        except DomainEscape:
            break
        d = space.distance(x, y_star)
        crossings.append((float(t_star), d))
        if d <= return_tol:
            return PeriodResult("periodic", float(t_star), escaped, tuple(crossings))
    return PeriodResult("non_periodic", None, escaped, tuple(crossings))


@dataclass
class PeriodReport:
    grid: SampleGrid
    results: list
    per_point_period: list
    theta_candidate: np.ndarray
    multiplicity_hints: list
    orbit_constancy_residual: float
    verdict: str  # "periodic", "non_periodic" or "mixed"
    extrapolated: list = field(default_factory=list)

    @property
    def globally_periodic(self):
        return self.verdict == "periodic"

    def require_periodic(self):
        if not self.globally_periodic:
            raise NotGloballyPeriodic(f"shift map is not periodic on the grid ({self.verdict})")
        return self

    def to_dict(self):
        return {
            "grid": [p.tolist() for p in self.grid],
            "per_point_period": self.per_point_period,
            "theta_candidate": [float(v) if math.isfinite(v) else None for v in self.theta_candidate],
            "multiplicity_hints": self.multiplicity_hints,
            "orbit_constancy_residual": self.orbit_constancy_residual,
            "verdict": "GloballyPeriodic" if self.globally_periodic else "NotGloballyPeriodic",
            "kind": self.verdict,
            "extrapolated": self.extrapolated,
        }


def _nearest(grid_pts, i, candidates, k, space):
    d = [(space.distance(grid_pts[i], grid_pts[j]), j) for j in candidates if j != i]
    d.sort()
    return [j for _, j in d[:k]]


def period_function(F: VectorFieldSpec, grid: SampleGrid, t_max, cfg: IntegratorConfig = DEFAULT_CONFIG,
                    orbit_samples=(0.31, 0.62), probe=1e-3, seed=0) -> PeriodReport:
    """Minimal periods on the grid and the candidate period function.

    theta(x) = n_x Per(x). To find n_x the period is re-detected at a point
    displaced from x by ``probe`` (relative) in a random direction: off an
    exceptional orbit the displaced period is close to Per(x), while next to
    one (e.g. where only some rotation blocks are active) it is a
    near-integer multiple of it. At singular points theta is
    extrapolated from the three nearest non-singular points. Orbit constancy
    is measured by re-detecting the period at F(x, s) for a few fractions of
    the period.
    """
    results = [detect_period(F, x, t_max, cfg) for x in grid]
    pts = list(grid)
    space = F.space
    periodic = [i for i, r in enumerate(results) if r.is_periodic]
    nonper = [i for i, r in enumerate(results) if r.kind == "non_periodic"]
    if periodic and not nonper:
        verdict = "periodic"
    elif nonper and not periodic:
        verdict = "non_periodic"
    else:
        # mixed grid, or only singular points (nothing certifies periodicity)
        verdict = "mixed"

    n_hint = [1] * len(pts)
    rng = np.random.default_rng(seed)
    for i in periodic:
        v = rng.standard_normal(space.dimension)
        v *= probe * max(1.0, float(np.linalg.norm(pts[i]))) / np.linalg.norm(v)
        near = detect_period(F, space.reduce(pts[i] + v), t_max, cfg)
        if not near.is_periodic:
            continue
        ratio = near.period / results[i].period
        m = round(ratio)
        if m >= 2 and abs(ratio - m) <= RATIO_TOL * m:
            n_hint[i] = int(m)

    theta = np.full(len(pts), np.nan)
    for i in periodic:
        theta[i] = n_hint[i] * results[i].period
    extrapolated = []
    if periodic:
        for i, r in enumerate(results):
            if r.kind == "singular":
                near = _nearest(pts, i, periodic, 3, space)
                theta[i] = float(np.mean([theta[j] for j in near]))
                extrapolated.append(i)

    residual = 0.0
    if verdict == "periodic":
        for i in periodic:
            for frac in orbit_samples:
                y = integrate(F, pts[i], frac * results[i].period, cfg)
                ry = detect_period(F, y, t_max, cfg)
                if not ry.is_periodic:
                    residual = math.inf
                    continue
                residual = max(residual, abs(theta[i] - n_hint[i] * ry.period))

    return PeriodReport(grid, results, [r.label() for r in results], theta, n_hint,
                        float(residual), verdict, extrapolated)


def kernel_certificate(F: VectorFieldSpec, theta, grid: SampleGrid, cfg: IntegratorConfig = DEFAULT_CONFIG,
                       multiples=(1, 2, 3), tol=1e-6) -> VerificationReport:
    """dist(F(x, n theta(x)), x) <= n * tol for every sampled multiple n."""
    theta = _theta_samples(theta, grid)
    parts = []
    for n in multiples:
        res = [F.space.distance(integrate(F, x, n * th, cfg), x) for x, th in zip(grid, theta)]
        parts.append(summarize(f"n={n}", [f"x{i}" for i in range(len(grid))], list(grid), res, n * tol))
    return merge("kernel", parts, identity="F(x, n theta(x)) = x for n = 1, 2, 3")


def _theta_samples(theta, grid):
    if isinstance(theta, PeriodReport):
        return np.asarray(theta.theta_candidate, dtype=float)
    if isinstance(theta, ScalarFieldSpec) or callable(theta):
        return np.array([float(theta(p)) for p in grid])
    arr = np.asarray(theta, dtype=float)
    return np.full(len(grid), float(arr)) if arr.ndim == 0 else arr


def transformed_period(F: VectorFieldSpec, mu: ScalarFieldSpec, theta, grid: SampleGrid,
                       cfg: IntegratorConfig = DEFAULT_CONFIG, orbit_constant=False, tol=1e-6):
    """Period function of mu F: x -> int_0^theta(x) dtau / mu(F(x, tau)).

    With ``orbit_constant`` the shortcut theta / mu is computed as well and
    must agree within ``tol``; otherwise ``CertificateFailed`` is raised.
    """
    th = _theta_samples(theta, grid)
    check_positive_on_grid(mu, grid)
    pair = make_pair(F, mu)
    bar = np.array([beta_of(pair, x, t, cfg) for x, t in zip(grid, th)])
    if orbit_constant:
        short = np.array([t / mu(x) for x, t in zip(grid, th)])
        gap = np.abs(bar - short)
        if np.max(gap) > tol:
            i = int(np.argmax(gap))
            raise CertificateFailed(f"theta/mu shortcut differs by {gap[i]:.3g} at {grid.points[i].tolist()}",
                                    [{"point": grid.points[i].tolist(), "gap": float(gap[i])}])
    return bar


def verify_period_transform(F: VectorFieldSpec, mu: ScalarFieldSpec, theta, grid: SampleGrid,
                            cfg: IntegratorConfig = DEFAULT_CONFIG, orbit_constant=False,
                            expect_constant=None, return_tol=CIRCLE_TOL, tol=1e-6,
                            suite_name="period-transform") -> VerificationReport:
    t0 = time.perf_counter()
    th = _theta_samples(theta, grid)
    bar = transformed_period(F, mu, th, grid, cfg)
    G = scale_field(F, mu)
    labels = [f"x{i}" for i in range(len(grid))]
    parts = [summarize("return", labels, list(grid),
                       [F.space.distance(integrate(G, x, b, cfg), x) for x, b in zip(grid, bar)],
                       return_tol)]
    if orbit_constant:
        parts.append(summarize("theta/mu", labels, list(grid),
                               np.abs(bar - np.array([t / mu(x) for x, t in zip(grid, th)])), tol))
    if expect_constant is not None:
        parts.append(summarize(f"== {expect_constant:g}", labels, list(grid),
                               np.abs(bar - expect_constant), tol))
    rep = merge(suite_name, parts,
                identity="theta_bar(x) = int_0^theta(x) dtau / mu(F(x,tau)) and G(x, theta_bar(x)) = x",
                extra={"theta_bar": bar.tolist()})
    rep.wall_time = time.perf_counter() - t0
    return rep


def interpolate_theta(report: PeriodReport, scheme="radial", center=None) -> ScalarFieldSpec:
    """Scalar field through the sampled theta values."""
    pts = report.grid.as_array()
    vals = np.asarray(report.theta_candidate, dtype=float)
    ok = np.isfinite(vals)
    pts, vals = pts[ok], vals[ok]
    space_dim = pts.shape[1]
    from .fields import AmbientSpace
    space = AmbientSpace.euclidean(space_dim)
    if scheme == "radial":
        c = np.zeros(space_dim) if center is None else np.asarray(center, dtype=float)
        r = np.linalg.norm(pts - c, axis=1)
        ru, inv = np.unique(np.round(r, 12), return_inverse=True)
        vu = np.array([vals[inv == k].mean() for k in range(len(ru))])

        def evaluate(x):
            return float(np.interp(np.linalg.norm(np.asarray(x) - c), ru, vu))
    elif scheme in ("linear", "nearest"):
        from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator
        near = NearestNDInterpolator(pts, vals)
        lin = LinearNDInterpolator(pts, vals) if scheme == "linear" and len(pts) > space_dim else None

        def evaluate(x):
            x = np.asarray(x, dtype=float).reshape(1, -1)
            if lin is not None:
                v = float(lin(x)[0])
                if math.isfinite(v):
                    return v
            return float(near(x)[0])
    else:
        raise ValueError(f"unknown interpolation scheme {scheme!r}")
    return ScalarFieldSpec(space, evaluate, f"theta~[{scheme}]", positive=True)


def theta_field(F: VectorFieldSpec, report: Optional[PeriodReport] = None, scheme="auto"):
    """Closed-form theta when the catalog has one, else an interpolant."""
    if scheme in ("auto", "closed_form") and F.period_function is not None:
        return ScalarFieldSpec(F.space, F.period_function, f"theta[{F.name}]", positive=True), True
    if scheme == "closed_form":
        raise PreconditionError(f"{F.name} has no closed-form period function")
    if report is None:
        raise PreconditionError("interpolated theta needs a period report")
    th = interpolate_theta(report, "radial" if scheme == "auto" else scheme)
    return ScalarFieldSpec(F.space, th.evaluate, th.name, positive=True), False


def normalize_to_circle_action(F: VectorFieldSpec, theta_report: PeriodReport, grid: SampleGrid,
                               cfg: IntegratorConfig = DEFAULT_CONFIG, scheme="auto", tol=CIRCLE_TOL,
                               suite_name="circle-normalize"):
    """Build G = theta F and certify that its time-1 map is the identity on the grid.

    Raises ``NotGloballyPeriodic`` when the report does not certify a
    periodic shift map, and ``CertificateFailed`` (carrying the report) when
    the time-1 residual exceeds ``tol``.
    """
    t0 = time.perf_counter()
    theta_report.require_periodic()
    if not np.all(np.asarray(theta_report.theta_candidate) > 0):
        raise NotGloballyPeriodic("theta must be positive on the grid")
    theta, closed = theta_field(F, theta_report, scheme)
    G = scale_field(F, theta)
    res = [F.space.distance(integrate(G, x, 1.0, cfg), x) for x in grid]
    linear = []
    for z in grid:
        if np.linalg.norm(F(z)) <= SINGULAR_TOL:
            lp = linear_part_analysis(F, z, periodic_certified=True, theta=theta)
            linear.append({"point": z.tolist(), "passed": lp.passed, "rates": lp.rotation_rates,
                           "zero_block_dim": lp.zero_block_dim})
    rep = summarize(suite_name, [f"x{i}" for i in range(len(grid))], list(grid), res, tol,
                    identity="G = theta F satisfies G(x, 1) = x",
                    extra={"theta_source": "closed_form" if closed else "interpolated",
                           "theta_samples": [theta(x) for x in grid], "linear_parts": linear,
                           "field": G.name})
    rep.wall_time = time.perf_counter() - t0
    if not rep.passed:
        exc = CertificateFailed(f"time-1 residual {rep.max_residual:.3g} exceeds {tol:g}", rep.worst_cases)
        exc.report = rep
        raise exc
    return G, rep


@dataclass
class LinearPartReport:
    point: list
    jacobian: list
    eigenvalues: list
    rotation_rates: list
    zero_block_dim: int
    passed: bool
    periodic_certified: bool = False
    scaling_residual: Optional[float] = None
    max_real_part: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.rotation_rates)

    def to_dict(self):
        return {
            "point": self.point,
            "jacobian": self.jacobian,
            "eigenvalues": [[float(np.real(v)), float(np.imag(v))] for v in self.eigenvalues],
            "rotation_rates": self.rotation_rates,
            "k": self.k,
            "zero_block_dim": self.zero_block_dim,
            "passed": self.passed,
            "periodic_certified": self.periodic_certified,
            "scaling_residual": self.scaling_residual,
            "max_real_part": self.max_real_part,
            "notes": self.notes,
        }


def linear_part_analysis(F: VectorFieldSpec, z, periodic_certified=False, theta: Optional[ScalarFieldSpec] = None,
                         tol=EIG_TOL) -> LinearPartReport:
    """Spectrum of the linear part of F at a singular point ``z``.

    Passes iff the eigenvalues are {+-i A_1, ..., +-i A_k} with nonzero A_j
    together with l zeros, 2k + l = dim. With ``theta`` the Jacobian of
    theta F at z is also compared against theta(z) times that of F.
    """
    z = np.asarray(z, dtype=float)
    if np.linalg.norm(F(z)) > SINGULAR_TOL:
        raise PreconditionError(f"{z.tolist()} is not a singular point of {F.name}")
    J = F.jacobian_at(z)
    eig = np.linalg.eigvals(J)
    eig = eig[np.lexsort((np.imag(eig), np.real(eig)))]
    notes = []
    zero = [v for v in eig if abs(v) <= tol]
    rest = [v for v in eig if abs(v) > tol]
    pos = sorted(float(np.imag(v)) for v in rest if np.imag(v) > 0)
    neg = sorted(float(-np.imag(v)) for v in rest if np.imag(v) < 0)
    max_re = max((abs(float(np.real(v))) for v in rest), default=0.0)
    ok = True
    if max_re > tol:
        ok = False
        notes.append(f"eigenvalue off the imaginary axis (|Re| = {max_re:.3g})")
    if len(pos) != len(neg) or any(abs(a - b) > tol for a, b in zip(pos, neg)):
        ok = False
        notes.append("nonzero eigenvalues are not conjugate imaginary pairs")
    if 2 * len(pos) + len(zero) != z.size:
        ok = False
        notes.append("2k + l does not match the dimension")
    scaling = None
    if theta is not None:
        G = scale_field(F, theta)
        scaling = float(np.max(np.abs(finite_difference_jacobian(G, z) - theta(z) * J)))
        if scaling > tol:
            ok = False
            notes.append(f"j1(theta F) != theta(z) j1 F (gap {scaling:.3g})")
    return LinearPartReport(z.tolist(), J.tolist(), list(eig), pos, len(zero), ok,
                            periodic_certified, scaling, max_re, notes)
