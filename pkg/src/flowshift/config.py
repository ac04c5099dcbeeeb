"""Scenario configuration: YAML files naming fields, scalars, grids and suites."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import fields as fl
from .errors import ConfigError
from .flow import IntegratorConfig
from .pushforward import PushforwardCase
from .reparam import ReparamPair, make_pair

TOP_KEYS = {"integrator", "output_dir", "fields", "scalars", "grids", "pairs", "cases", "suites"}
INTEGRATOR_KEYS = {"rtol", "atol", "max_step", "max_steps", "blowup_norm", "min_step"}


def default_config_path() -> Path:
    return Path(str(resources.files("flowshift") / "data" / "default.yaml"))


_EXPR = re.compile(r"(?:pi|sqrt|[0-9.eE+\-*/() ])+")


def _strict(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {missing}")
    return d


def _number(v, where):
    if isinstance(v, str):
        # symbolic constants such as "pi", "2*pi", "pi/2", "sqrt(2)"
        if not _EXPR.fullmatch(v.strip()):
            raise ConfigError(f"{where}: cannot read number {v!r}")
        try:
            return float(eval(v, {"__builtins__": {}}, {"pi": math.pi, "sqrt": math.sqrt}))
        except Exception:
            raise ConfigError(f"{where}: cannot read number {v!r}") from None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {v!r}") from None


def _numbers(vs, where):
    if not isinstance(vs, (list, tuple)):
        vs = [vs]
    return [_number(v, where) for v in vs]


def _param(v, where):
    if isinstance(v, (list, tuple)):
        return tuple(_param(u, where) for u in v)
    if isinstance(v, bool) or isinstance(v, int):
        return v
    return _number(v, where)


def parse_space(d, where="space"):
    _strict(d, {"kind", "dimension", "periods"}, where, required=("kind",))
    kind = str(d["kind"]).lower()
    if kind in ("torus", "flat_torus", "flattorus"):
        if "periods" not in d:
            raise ConfigError(f"{where}: torus needs periods")
        space = fl.AmbientSpace.torus(_numbers(d["periods"], where))
        if "dimension" in d and int(d["dimension"]) != space.dimension:
            raise ConfigError(f"{where}: dimension does not match periods")
        return space
    if kind == "euclidean":
        if "periods" in d:
            raise ConfigError(f"{where}: periods given for a Euclidean space")
        if "dimension" not in d:
            raise ConfigError(f"{where}: missing dimension")
        return fl.AmbientSpace.euclidean(int(d["dimension"]))
    raise ConfigError(f"{where}: unknown space kind {d['kind']!r}")


@dataclass
class Scenario:
    """A resolved configuration. Every name used by a suite is checked up front."""

    integrator: IntegratorConfig
    output_dir: Path
    fields: dict
    scalars: dict
    grids: dict
    pairs: dict
    cases: dict
    suites: list
    source: str = ""
    raw: dict = dc_field(default_factory=dict, repr=False)

    def field(self, name) -> fl.VectorFieldSpec:
        return _lookup(self.fields, name, "field")

    def scalar(self, name) -> fl.ScalarFieldSpec:
        return _lookup(self.scalars, name, "scalar")

    def grid(self, name) -> fl.SampleGrid:
        return _lookup(self.grids, name, "grid")

    def pair(self, name) -> ReparamPair:
        return _lookup(self.pairs, name, "pair")

    def case(self, name) -> PushforwardCase:
        return _lookup(self.cases, name, "case")

    def suite(self, name) -> dict:
        for s in self.suites:
            if s["name"] == name:
                return s
        raise ConfigError(f"undefined suite {name!r}")


def _lookup(table, name, kind):
    try:
        return table[name]
    except KeyError:
        raise ConfigError(f"undefined {kind} {name!r}") from None


def _parse_field(name, d):
    where = f"fields.{name}"
    _strict(d, {"name", "polynomial", "params", "space"}, where)
    if ("name" in d) == ("polynomial" in d):
        raise ConfigError(f"{where}: give exactly one of 'name' or 'polynomial'")
    space = parse_space(d["space"], f"{where}.space") if "space" in d else None
    if "name" in d:
        params = {k: _param(v, f"{where}.params.{k}") for k, v in (d.get("params") or {}).items()}
        F = fl.make_field(str(d["name"]), **params)
        if space is not None and space != F.space:
            if F.space.dimension != space.dimension:
                raise ConfigError(f"{where}: space does not match catalog field {d['name']}")
            from dataclasses import replace
            F = replace(F, space=space)
        return F
    poly = _strict(d["polynomial"], {"dim", "terms"}, f"{where}.polynomial", required=("dim", "terms"))
    if d.get("params"):
        raise ConfigError(f"{where}: params only apply to catalog fields")
    terms = []
    for k, t in enumerate(poly["terms"]):
        if not (isinstance(t, (list, tuple)) and len(t) == 2):
            raise ConfigError(f"{where}.terms[{k}]: expected [coeffs, exponents]")
        terms.append((_numbers(t[0], where), [int(e) for e in t[1]]))
    return fl.polynomial_field(int(poly["dim"]), terms, space=space, name=name)


SCALAR_KINDS = {"constant", "polynomial", "linear", "radial", "sine", "period_of"}


def _scalar_space(d, fields_, where, default_dim=None):
    s = d.get("space")
    if s is None:
        if default_dim is None:
            raise ConfigError(f"{where}: need a space")
        return fl.AmbientSpace.euclidean(default_dim)
    if isinstance(s, str):
        return _lookup(fields_, s, "field").space
    return parse_space(s, f"{where}.space")


def _parse_scalar(name, d, fields_):
    where = f"scalars.{name}"
    _strict(d, SCALAR_KINDS | {"space"}, where)
    kinds = [k for k in d if k in SCALAR_KINDS]
    if len(kinds) != 1:
        raise ConfigError(f"{where}: give exactly one of {sorted(SCALAR_KINDS)}")
    kind = kinds[0]
    body = d[kind]
    if kind == "constant":
        space = _scalar_space(d, fields_, where, 2)
        return fl.constant_scalar(space, _number(body, where), name)
    if kind == "polynomial":
        _strict(body, {"dim", "terms"}, f"{where}.polynomial", required=("dim", "terms"))
        space = _scalar_space(d, fields_, where, int(body["dim"]))
        terms = [(_number(c, where), [int(e) for e in ex]) for c, ex in body["terms"]]
        return fl.polynomial_scalar(space, terms, name)
    if kind == "linear":
        _strict(body, {"coeffs", "offset"}, f"{where}.linear", required=("coeffs",))
        coeffs = _numbers(body["coeffs"], where)
        space = _scalar_space(d, fields_, where, len(coeffs))
        return fl.linear_scalar(space, coeffs, _number(body.get("offset", 0.0), where), name)
    if kind == "radial":
        _strict(body, {"a", "b"}, f"{where}.radial")
        if "space" in d:
            raise ConfigError(f"{where}: radial scalars live on the plane")
        return fl.radial_scalar(_number(body.get("a", 1.0), where), _number(body.get("b", 1.0), where), name)
    if kind == "sine":
        _strict(body, {"offset", "amplitude", "coord"}, f"{where}.sine")
        space = _scalar_space(d, fields_, where, 1)
        return fl.sine_scalar(space, _number(body.get("offset", 2.0), where),
                              _number(body.get("amplitude", 1.0), where), int(body.get("coord", 0)), name)
    if kind == "period_of":
        sc = fl.period_scalar(_lookup(fields_, str(body), "field"))
        return fl.ScalarFieldSpec(sc.space, sc.evaluate, name, positive=True)


GRID_KINDS = {"points", "circles", "box"}


def _parse_grid(name, d, fields_, jitter_rng=None):
    where = f"grids.{name}"
    _strict(d, GRID_KINDS | {"space", "jitter"}, where)
    kinds = [k for k in d if k in GRID_KINDS]
    if len(kinds) != 1:
        raise ConfigError(f"{where}: give exactly one of {sorted(GRID_KINDS)}")
    kind = kinds[0]
    body = d[kind]
    if kind == "circles":
        _strict(body, {"radii", "n_angles", "center", "include_center", "phase"}, f"{where}.circles",
                required=("radii", "n_angles"))
        g = fl.circle_grid(_numbers(body["radii"], where), int(body["n_angles"]),
                           tuple(_numbers(body.get("center", [0.0, 0.0]), where)),
                           bool(body.get("include_center", False)), _number(body.get("phase", 0.0), where))
        space = fl.AmbientSpace.euclidean(2)
    elif kind == "box":
        _strict(body, {"dim", "lo", "hi", "n"}, f"{where}.box", required=("lo", "hi", "n"))
        if "space" in d:
            space = _scalar_space(d, fields_, where)
        else:
            space = fl.AmbientSpace.euclidean(int(body.get("dim", 2)))
        g = fl.box_grid(space, _numbers(body["lo"], where), _numbers(body["hi"], where), int(body["n"]))
    else:
        if "space" in d:
            space = _scalar_space(d, fields_, where)
        else:
            if not body:
                raise ConfigError(f"{where}: empty point list")
            space = fl.AmbientSpace.euclidean(len(np.atleast_1d(body[0])))
        g = fl.make_grid(space, [_numbers(p, where) for p in body], f"{len(body)} points")
    jitter = _number(d.get("jitter", 0.0), where)
    if jitter > 0 and jitter_rng is not None:
        pts = [p + jitter_rng.uniform(-jitter, jitter, size=p.size) for p in g.points]
        g = fl.make_grid(space, pts, g.description + f" jitter={jitter:g}")
    return fl.SampleGrid(g.points, g.description or name)


def parse_config(data: dict, source="", overrides=None) -> Scenario:
    """Validate and resolve a configuration mapping."""
    overrides = overrides or {}
    _strict(data, TOP_KEYS, "config")
    integ = dict(_strict(data.get("integrator") or {}, INTEGRATOR_KEYS, "integrator"))
    for k in ("rtol", "atol"):
        if overrides.get(k) is not None:
            integ[k] = overrides[k]
    try:
        cfg = IntegratorConfig(**{k: (int(v) if k == "max_steps" else _number(v, "integrator"))
                                  for k, v in integ.items()})
    except TypeError as exc:
        raise ConfigError(f"integrator: {exc}") from None
    out_dir = Path(overrides.get("output_dir") or data.get("output_dir") or "flowshift-out")
    rng = np.random.default_rng(overrides.get("seed", 0) or 0)

    fields_ = {n: _parse_field(n, d) for n, d in (data.get("fields") or {}).items()}
    scalars = {n: _parse_scalar(n, d, fields_) for n, d in (data.get("scalars") or {}).items()}
    grids = {n: _parse_grid(n, d, fields_, rng) for n, d in (data.get("grids") or {}).items()}

    pairs = {}
    for n, d in (data.get("pairs") or {}).items():
        _strict(d, {"field", "mu"}, f"pairs.{n}", required=("field", "mu"))
        pairs[n] = make_pair(_lookup(fields_, d["field"], "field"), _lookup(scalars, d["mu"], "scalar"), n)

    cases = {}
    for n, d in (data.get("cases") or {}).items():
        _strict(d, {"field", "alpha", "grid"}, f"cases.{n}", required=("field", "alpha", "grid"))
        cases[n] = PushforwardCase(_lookup(fields_, d["field"], "field"), _lookup(scalars, d["alpha"], "scalar"),
                                   _lookup(grids, d["grid"], "grid"), n)

    from .suites import validate_suite
    suites = []
    names = set()
    for k, s in enumerate(data.get("suites") or []):
        if not isinstance(s, dict) or "name" not in s or "kind" not in s:
            raise ConfigError(f"suites[{k}]: each suite needs a name and a kind")
        if s["name"] in names:
            raise ConfigError(f"suites[{k}]: duplicate suite name {s['name']!r}")
        names.add(s["name"])
        suites.append(s)
    scenario = Scenario(cfg, out_dir, fields_, scalars, grids, pairs, cases, suites, source, data)
    scenario.suites = [validate_suite(scenario, s) for s in suites]
    return scenario


def load_config(path=None, overrides=None) -> Scenario:
    path = Path(path) if path else default_config_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data, str(path), overrides)
