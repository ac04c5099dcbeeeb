"""Verification suites: named, config-driven checks that each yield a report."""

from __future__ import annotations

import math
import time

import numpy as np

from .config import _number, _numbers
from .errors import (CertificateFailed, ConfigError, DomainEscape, FlowshiftError, NotGloballyPeriodic,
                     NumericalDomainError, PositivityViolated)
from .fields import constant_scalar
from .flow import integrate
from .periodic import (kernel_certificate, linear_part_analysis, normalize_to_circle_action,
                       period_function, theta_field, verify_period_transform)
from .pushforward import induced_factor, induced_field, verify_pushforward
from .reparam import make_pair, verify_bridge, verify_image_equality
from .reports import VerificationReport, merge, summarize
from .shiftmap import ShiftFunction, identity_map, maps_equal, shift_on_grid

# kind -> (allowed parameters, required parameters, {parameter: table it names})
SUITE_KINDS = {
    "flow_oracle": ({"fields", "n_samples", "box", "t_range", "tol"}, {"fields"}, {"fields": "fields"}),
    "bridge": ({"pair", "grid", "s_values", "tol"}, {"pair", "grid"}, {"pair": "pairs", "grid": "grids"}),
    "image_equality": ({"pair", "grid", "gammas", "tol", "expect"}, {"pair", "grid", "gammas"},
                       {"pair": "pairs", "grid": "grids"}),
    "pushforward": ({"case", "tol", "step"}, {"case"}, {"case": "cases"}),
    "pushforward_image": ({"case", "gammas", "tol"}, {"case", "gammas"}, {"case": "cases"}),
    "period": ({"field", "grid", "t_max", "expect", "tol", "closed_form_tol"}, {"field", "grid"},
               {"field": "fields", "grid": "grids"}),
    "kernel": ({"field", "grid", "t_max", "multiples", "tol"}, {"field", "grid"},
               {"field": "fields", "grid": "grids"}),
    "period_transform": ({"field", "mu", "grid", "t_max", "theta", "orbit_constant", "expect_constant",
                          "tol", "return_tol"}, {"field", "mu", "grid"}, {"field": "fields", "grid": "grids"}),
    "circle_normalize": ({"field", "grid", "t_max", "scheme", "expect", "tol"}, {"field", "grid"},
                         {"field": "fields", "grid": "grids"}),
    "linear_part": ({"field", "points", "rates", "zero_dim", "certify_grid", "t_max", "tol"},
                    {"field", "points"}, {"field": "fields", "certify_grid": "grids"}),
    "shift_compare": ({"field", "alpha", "grid", "expect", "tol"}, {"field", "alpha", "grid"},
                      {"field": "fields", "grid": "grids"}),
}

BASE_KEYS = {"name", "kind", "description"}


NUMBER_KEYS = {"tol", "t_max", "closed_form_tol", "return_tol", "step", "expect_constant"}
NUMBER_LIST_KEYS = {"box", "t_range", "s_values", "rates", "multiples"}


def validate_suite(scenario, suite):
    """Check keys and references of one suite; returns a copy with numbers resolved."""
    name, kind = suite["name"], suite["kind"]
    if kind not in SUITE_KINDS:
        raise ConfigError(f"suite {name!r}: unknown kind {kind!r}")
    allowed, required, refs = SUITE_KINDS[kind]
    extra = set(suite) - allowed - BASE_KEYS
    if extra:
        raise ConfigError(f"suite {name!r}: unknown parameter(s) {sorted(extra)}")
    missing = required - set(suite)
    if missing:
        raise ConfigError(f"suite {name!r}: missing parameter(s) {sorted(missing)}")
    for key, table in refs.items():
        if key not in suite:
            continue
        values = suite[key] if isinstance(suite[key], list) else [suite[key]]
        for v in values:
            if v not in getattr(scenario, table):
                raise ConfigError(f"suite {name!r}: {key} refers to undefined {table[:-1]} {v!r}")
    out = dict(suite)
    where = f"suite {name!r}"
    for key in NUMBER_KEYS & set(out):
        out[key] = _number(out[key], f"{where}.{key}")
    for key in NUMBER_LIST_KEYS & set(out):
        out[key] = _numbers(out[key], f"{where}.{key}")
    if "n_samples" in out:
        out["n_samples"] = int(out["n_samples"])
    if "points" in out:
        out["points"] = [_numbers(p, f"{where}.points") for p in out["points"]]
    for key in ("gammas", "alpha", "mu"):
        if key not in out:
            continue
        resolved = [_scalar_ref(scenario, v, f"{where}.{key}", allow_theta=(key == "mu"))
                    for v in (out[key] if isinstance(out[key], list) else [out[key]])]
        out[key] = resolved if isinstance(out[key], list) else resolved[0]
    return out


def _scalar_ref(scenario, v, where, allow_theta=False):
    """A scalar name stays a name; anything else must read as a number."""
    if isinstance(v, str) and (v in scenario.scalars or (allow_theta and v == "theta")):
        return v
    return _number(v, where)


def _scalar_or_number(scenario, v, space):
    if isinstance(v, str):
        return scenario.scalar(v)
    return constant_scalar(space, float(v))


def _refusal(name, identity, reason, expected):
    rows = [("refusal", [], 0.0)]
    rep = VerificationReport(name, expected, 0.0, 0.0, 0.0, 0, 0.0, identity,
                             failures=[] if expected else [{"error": reason}],
                             extra={"refused": True, "reason": reason}, rows=rows)
    return rep


def run_flow_oracle(sc, s, rng):
    tol = float(s.get("tol", 1e-6))
    n_total = int(s.get("n_samples", 200))
    lo, hi = s.get("box", [-1.5, 1.5])
    t_lo, t_hi = s.get("t_range", [-10.0, 10.0])
    names = s["fields"]
    parts = []
    per_field = int(math.ceil(n_total / len(names)))
    for fname in names:
        F = sc.field(fname)
        if F.analytic_flow is None:
            raise ConfigError(f"suite {s['name']!r}: field {fname!r} has no analytic flow")
        labels, pts, res = [], [], []
        tries = 0
        while len(res) < per_field:
            tries += 1
            if tries > 100 * per_field:
                raise ConfigError(f"suite {s['name']!r}: cannot sample admissible (x, t) for {fname!r}")
            x = F.space.reduce(rng.uniform(lo, hi, size=F.dimension))
            t = float(rng.uniform(t_lo, t_hi))
            try:
                exact = F.analytic_flow(x, t)
            except NumericalDomainError:
                continue
            if not F.space.is_torus and np.linalg.norm(exact) > 10 * max(1.0, np.linalg.norm(x)):
                continue
            y = integrate(F, x, t, sc.integrator)
            labels.append(f"t={t:.12g}")
            pts.append(x)
            res.append(F.space.distance(y, exact))
        parts.append(summarize(fname, labels, pts, res, tol))
    return merge(s["name"], parts, identity="integrated F(x,t) = closed-form flow",
                 extra={"n_samples": sum(p.n_points for p in parts)})


def run_bridge(sc, s, rng):
    s_values = [float(v) for v in s.get("s_values", [0.1, 1.0, math.pi])]
    return verify_bridge(sc.pair(s["pair"]), sc.grid(s["grid"]), s_values, sc.integrator,
                         float(s.get("tol", 1e-6)), s["name"])


def run_image_equality(sc, s, rng):
    pair = sc.pair(s["pair"])
    gammas = [_scalar_or_number(sc, g, pair.F.space) for g in s["gammas"]]
    expect = s.get("expect", "equal")
    identity = "shift_G(gamma) = shift_F(xi(gamma)) and shift_F(delta) = shift_G(xi^-1(delta))"
    try:
        rep = verify_image_equality(pair, gammas, sc.grid(s["grid"]), sc.integrator,
                                    float(s.get("tol", 1e-6)), s["name"])
    except PositivityViolated as exc:
        return _refusal(s["name"], identity, f"PositivityViolated: {exc}", expect == "refused")
    if expect == "refused":
        rep.passed = False
        rep.failures.append({"error": "expected a positivity refusal"})
    return rep


def run_pushforward(sc, s, rng):
    case = sc.case(s["case"])
    return verify_pushforward(case, sc.integrator, s.get("step"), float(s.get("tol", 5e-5)), s["name"])


def run_pushforward_image(sc, s, rng):
    case = sc.case(s["case"])
    induced_field(case)  # refuses unless 1 + F(alpha) > 0 on the grid
    pair = make_pair(case.F, induced_factor(case.F, case.alpha), f"{case.name}:induced")
    gammas = [_scalar_or_number(sc, g, case.F.space) for g in s["gammas"]]
    rep = verify_image_equality(pair, gammas, case.grid, sc.integrator, float(s.get("tol", 1e-6)), s["name"])
    rep.identity = "shifts along (1 + F(alpha)) F and along F give the same maps"
    return rep


def run_period(sc, s, rng):
    F = sc.field(s["field"])
    grid = sc.grid(s["grid"])
    expect = s.get("expect", "periodic")
    t_max = float(s.get("t_max", 20.0))
    t0 = time.perf_counter()
    rep = period_function(F, grid, t_max, sc.integrator)
    identity = "F(x, theta(x)) = x with theta(x) = n_x Per(x), theta constant along orbits"
    if expect != "periodic":
        ok = not rep.globally_periodic
        out = _refusal(s["name"], identity, f"verdict {rep.verdict}", ok)
        out.extra.update(rep.to_dict())
        return out
    labels = [f"x{i}" for i in range(len(grid))]
    parts = []
    if not rep.globally_periodic:
        out = _refusal(s["name"], identity, f"verdict {rep.verdict}", False)
        out.extra.update(rep.to_dict())
        return out
    tol = float(s.get("tol", 1e-6))
    parts.append(summarize("orbit-constancy", ["all"], [grid.points[0]], [rep.orbit_constancy_residual], tol))
    ret = [F.space.distance(integrate(F, x, th, sc.integrator), x) for x, th in zip(grid, rep.theta_candidate)]
    parts.append(summarize("return", labels, list(grid), ret, 1e-6))
    if F.period_function is not None:
        ctol = float(s.get("closed_form_tol", 1e-6))
        idx = [i for i in range(len(grid)) if i not in rep.extrapolated]
        parts.append(summarize("closed-form", [labels[i] for i in idx], [grid.points[i] for i in idx],
                               [abs(rep.theta_candidate[i] - F.period_function(grid.points[i])) for i in idx], ctol))
    out = merge(s["name"], parts, identity=identity, extra=rep.to_dict())
    out.wall_time = time.perf_counter() - t0
    return out


def run_kernel(sc, s, rng):
    F = sc.field(s["field"])
    grid = sc.grid(s["grid"])
    rep = period_function(F, grid, float(s.get("t_max", 20.0)), sc.integrator, orbit_samples=())
    if not rep.globally_periodic:
        return _refusal(s["name"], "kernel", f"verdict {rep.verdict}", False)
    out = kernel_certificate(F, rep, grid, sc.integrator, tuple(s.get("multiples", (1, 2, 3))),
                             float(s.get("tol", 1e-6)))
    out.suite_name = s["name"]
    return out


def _theta_for(sc, s, F, grid):
    source = s.get("theta", "closed_form")
    if source == "closed_form":
        th, _ = theta_field(F, None, "closed_form")
        return th, [th(x) for x in grid]
    rep = period_function(F, grid, float(s.get("t_max", 20.0)), sc.integrator, orbit_samples=()).require_periodic()
    th, _ = theta_field(F, rep, "radial")
    return th, list(rep.theta_candidate)


def run_period_transform(sc, s, rng):
    F = sc.field(s["field"])
    grid = sc.grid(s["grid"])
    theta, samples = _theta_for(sc, s, F, grid)
    mu = theta if s["mu"] == "theta" else sc.scalar(s["mu"])
    expect_constant = s.get("expect_constant")
    if s["mu"] == "theta" and expect_constant is None:
        expect_constant = 1.0
    return verify_period_transform(F, mu, samples, grid, sc.integrator, bool(s.get("orbit_constant", False)),
                                   expect_constant, float(s.get("return_tol", 1e-5)), float(s.get("tol", 1e-6)),
                                   s["name"])


def run_circle_normalize(sc, s, rng):
    F = sc.field(s["field"])
    grid = sc.grid(s["grid"])
    expect = s.get("expect", "certified")
    identity = "G = theta F satisfies G(x, 1) = x"
    rep = period_function(F, grid, float(s.get("t_max", 20.0)), sc.integrator, orbit_samples=())
    try:
        _, cert = normalize_to_circle_action(F, rep, grid, sc.integrator, s.get("scheme", "auto"),
                                             float(s.get("tol", 1e-5)), s["name"])
    except NotGloballyPeriodic as exc:
        return _refusal(s["name"], identity, f"NotGloballyPeriodic: {exc}", expect == "refused")
    except CertificateFailed as exc:
        cert = exc.report
    if expect == "refused":
        cert.passed = False
        cert.failures.append({"error": "expected the criterion to refuse"})
    return cert


def run_linear_part(sc, s, rng):
    F = sc.field(s["field"])
    tol = float(s.get("tol", 1e-6))
    certified = False
    theta = None
    extra = {}
    if "certify_grid" in s:
        grid = sc.grid(s["certify_grid"])
        rep = period_function(F, grid, float(s.get("t_max", 20.0)), sc.integrator, orbit_samples=())
        _, cert = normalize_to_circle_action(F, rep, grid, sc.integrator)
        certified = cert.passed
        theta, _ = theta_field(F, rep)
        extra["certificate_max_residual"] = cert.max_residual
    labels, pts, res, failures, reports = [], [], [], [], []
    for k, z in enumerate(s["points"]):
        z = np.asarray(z, dtype=float)
        lp = linear_part_analysis(F, z, certified, theta, tol)
        reports.append(lp.to_dict())
        if not lp.passed:
            failures.append({"point": z.tolist(), "notes": lp.notes})
        r = lp.max_real_part
        if "rates" in s:
            want = sorted(abs(float(a)) for a in s["rates"])
            if len(want) != lp.k:
                failures.append({"point": z.tolist(), "error": f"k={lp.k}, expected {len(want)}"})
            else:
                r = max(r, max((abs(a - b) for a, b in zip(lp.rotation_rates, want)), default=0.0))
        if "zero_dim" in s and int(s["zero_dim"]) != lp.zero_block_dim:
            failures.append({"point": z.tolist(), "error": f"l={lp.zero_block_dim}, expected {s['zero_dim']}"})
        if lp.scaling_residual is not None:
            r = max(r, lp.scaling_residual)
        labels.append(f"z{k}")
        pts.append(z)
        res.append(r)
    extra.update({"reports": reports, "periodic_certified": certified})
    return summarize(s["name"], labels, pts, res, tol, identity="spec(j1 F) = {+-i A_j} + {0}^l",
                     failures=failures, extra=extra)


def run_shift_compare(sc, s, rng):
    F = sc.field(s["field"])
    grid = sc.grid(s["grid"])
    alpha = s["alpha"]
    a = sc.scalar(alpha) if isinstance(alpha, str) else float(alpha)
    tol = float(s.get("tol", 1e-6))
    img = shift_on_grid(ShiftFunction(a, F), grid, sc.integrator)
    v = maps_equal(img, identity_map(grid, F.space), tol)
    labels = [f"x{i}" for i in range(len(grid))]
    rep = summarize(s["name"], labels, list(grid), v.distances, tol,
                    identity="F(x, alpha(x)) = x (alpha in the kernel)")
    if s.get("expect", "equal") == "different":
        rep.passed = v.max_distance > tol
        rep.extra["expected"] = "different"
    return rep


RUNNERS = {
    "flow_oracle": run_flow_oracle,
    "bridge": run_bridge,
    "image_equality": run_image_equality,
    "pushforward": run_pushforward,
    "pushforward_image": run_pushforward_image,
    "period": run_period,
    "kernel": run_kernel,
    "period_transform": run_period_transform,
    "circle_normalize": run_circle_normalize,
    "linear_part": run_linear_part,
    "shift_compare": run_shift_compare,
}


def execute(scenario, suite, seed=0) -> VerificationReport:
    """Run one suite; numerical failures become a failing report."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    try:
        rep = RUNNERS[suite["kind"]](scenario, suite, rng)
    except NotGloballyPeriodic as exc:
        # a numerical verdict, even though it subclasses the precondition errors
        rep = VerificationReport(suite["name"], False, math.inf, math.inf, math.inf, 0, 0.0,
                                 failures=[{"error": f"{type(exc).__name__}: {exc}"}])
    except ConfigError:
        raise
    except (FlowshiftError, DomainEscape) as exc:
        rep = VerificationReport(suite["name"], False, math.inf, math.inf, math.inf, 0, 0.0,
                                 failures=[{"error": f"{type(exc).__name__}: {exc}"}])
    rep.suite_name = suite["name"]
    rep.extra.setdefault("kind", suite["kind"])
    if "description" in suite:
        rep.extra["description"] = suite["description"]
    rep.wall_time = time.perf_counter() - t0
    return rep
