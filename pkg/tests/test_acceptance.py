"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary (see conftest.py) and when this file is run as a script.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from flowshift import fields as fl
from flowshift.config import load_config
from flowshift.periodic import (detect_period, linear_part_analysis, normalize_to_circle_action,
                                period_function, theta_field)
from flowshift.suites import execute

RESULTS = []
TWO_PI = 2 * math.pi


def record(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    RESULTS.append(line)
    return ok


@pytest.fixture(scope="module")
def sc():
    return load_config()


@pytest.fixture(scope="module")
def cfg(sc):
    return sc.integrator


def run(sc, name):
    return execute(sc, sc.suite(name))


def test_flow_correctness(sc):
    t0 = time.perf_counter()
    rep = run(sc, "flow-oracle")
    wall = time.perf_counter() - t0
    fields_used = set(sc.suite("flow-oracle")["fields"])
    ok = (rep.passed and rep.max_residual <= 1e-6 and rep.n_points >= 200 and wall < 5.0
          and fields_used == {"rotation", "nonlinear", "translation", "blowup"})
    assert record("flow correctness", ok,
                  f"max discrepancy {rep.max_residual:.2e} <= 1e-6 over {rep.n_points} samples, {wall:.2f}s < 5s")


def test_bridge(sc):
    t0 = time.perf_counter()
    reps = [run(sc, n) for n in ("bridge-rotation", "bridge-blowup", "bridge-torus")]
    wall = time.perf_counter() - t0
    worst = max(r.max_residual for r in reps)
    ok = all(r.passed for r in reps) and worst <= 1e-6 and wall < 10.0
    assert record("reparametrization bridge", ok,
                  f"max dist(G(x,s), F(x,alpha(x,s))) {worst:.2e} <= 1e-6 on 3 pairs, {wall:.2f}s < 10s")


def test_image_equality(sc):
    reps = [run(sc, n) for n in ("image-rotation", "image-blowup", "image-torus")]
    worst_rt = 0.0
    ok = True
    for r in reps:
        n_gamma = r.extra["n_gamma"]
        parts = r.extra["parts"]
        ok &= n_gamma >= 3 and all(parts.values()) and r.tolerance == 1e-6
        for lab, _, v in r.rows:
            if "xi_inv(xi)" in lab or "xi(xi_inv)" in lab:
                worst_rt = max(worst_rt, v)
    worst = max(r.max_residual for r in reps)
    ok &= worst <= 1e-6 and worst_rt <= 1e-6
    assert record("image equality", ok,
                  f"roundtrip {worst_rt:.2e} and both directions {worst:.2e} <= 1e-6, >= 3 gammas per pair")


def test_pushforward(sc):
    reps = [run(sc, n) for n in ("pushforward-translation", "pushforward-rotation", "pushforward-constant")]
    factors = reps[0].extra["factor"]
    worst = max(r.max_residual for r in reps)
    ok = all(r.passed for r in reps) and worst <= 5e-5 and all(f == 2.0 for f in factors)
    assert record("pushforward identity", ok,
                  f"max residual {worst:.2e} <= 5e-5 on x1-shift (factor 2), 0.1x rotation, constant shift")


def test_period_detection(cfg):
    rot = detect_period(fl.rigid_rotation(), [1.0, 0.0], 10.0, cfg)
    errs = [abs(rot.period - TWO_PI)]
    ok = errs[0] <= 1e-7
    nl = fl.nonlinear_rotation()
    nl_err = 0.0
    for r in (0.5, 1.0, 2.0):
        for a in (0.0, 2.0):
            x = [r * math.cos(a), r * math.sin(a)]
            p = detect_period(nl, x, 10.0, cfg)
            nl_err = max(nl_err, abs(p.period - TWO_PI / (1 + r * r)) if p.is_periodic else math.inf)
    tr = detect_period(fl.translation(), [0.0, 0.0], 100.0, cfg)
    ok &= nl_err <= 1e-6 and tr.label() == "NonPeriodic"
    assert record("period detection", ok,
                  f"rotation |Per-2pi| {errs[0]:.2e} <= 1e-7, nonlinear {nl_err:.2e} <= 1e-6, "
                  f"translation {tr.label()}")


def test_period_transform(sc):
    rot = run(sc, "period-transform-rotation")
    theta = run(sc, "period-transform-theta-nonlinear")
    ret = max(v for r in (rot, theta) for lab, _, v in r.rows if lab.startswith("return"))
    short = max(v for lab, _, v in rot.rows if lab.startswith("theta/mu"))
    unit = max(v for lab, _, v in theta.rows if lab.startswith("=="))
    ok = rot.passed and theta.passed and ret <= 1e-5 and short <= 1e-6 and unit <= 1e-6
    assert record("period transform", ok,
                  f"certificate {ret:.2e} <= 1e-5, |bar-theta/mu| {short:.2e} <= 1e-6, "
                  f"mu=theta |bar-1| {unit:.2e} <= 1e-6")


def test_circle_action_criterion(sc):
    rot = run(sc, "circle-rotation")
    nl = run(sc, "circle-nonlinear")
    tr = run(sc, "circle-translation")
    worst = max(rot.max_residual, nl.max_residual)
    ok = rot.passed and nl.passed and worst <= 1e-5 and tr.passed and tr.extra.get("refused") is True
    assert record("circle-action criterion", ok,
                  f"|G(x,1)-x| {worst:.2e} <= 1e-5 on rotation and nonlinear rotation; translation refused")


def test_linear_part(cfg):
    grid = fl.circle_grid([0.5, 1, 2], 8)
    blocks = fl.rotation_blocks((1, 3), 1)
    bgrid = fl.make_grid(blocks.space, [[1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0.5, 0, 0.5, 0, 0.3]])
    worst = 0.0
    ok = True
    for F, g, rates, l in ((fl.rigid_rotation(), grid, [1.0], 0), (fl.nonlinear_rotation(), grid, [1.0], 0),
                           (blocks, bgrid, [1.0, 3.0], 1)):
        rep = period_function(F, g, 10.0, cfg, orbit_samples=())
        _, cert = normalize_to_circle_action(F, rep, g, cfg)
        theta, _ = theta_field(F, rep)
        lp = linear_part_analysis(F, np.zeros(F.dimension), cert.passed, theta)
        expected = sorted([1j * a for a in rates] + [-1j * a for a in rates] + [0.0] * l, key=lambda v: v.imag)
        got = sorted(lp.eigenvalues, key=lambda v: v.imag)
        eig_err = max(abs(a - b) for a, b in zip(got, expected))
        rate_err = max(abs(a - b) for a, b in zip(lp.rotation_rates, rates))
        worst = max(worst, eig_err, rate_err)
        ok &= cert.passed and lp.passed and lp.zero_block_dim == l and len(got) == len(expected)
    ok &= worst <= 1e-6
    assert record("linear-part structure", ok,
                  f"eigenvalue and rate error {worst:.2e} <= 1e-6 (rotation, nonlinear, blocks A=(1,3) l=1)")


def test_full_default_suite(tmp_path):
    walls, codes = [], []
    for d in ("run1", "run2"):
        t0 = time.perf_counter()
        r = subprocess.run([sys.executable, "-m", "flowshift", "--output-dir", str(tmp_path / d), "all"],
                           capture_output=True, text=True)
        walls.append(time.perf_counter() - t0)
        codes.append(r.returncode)
    csv1 = sorted(p.name for p in (tmp_path / "run1").glob("*.csv"))
    same = csv1 and all((tmp_path / "run1" / n).read_bytes() == (tmp_path / "run2" / n).read_bytes() for n in csv1)
    ok = codes == [0, 0] and max(walls) < 60.0 and bool(same)
    assert record("full default suite", ok,
                  f"exit codes {codes}, wall {max(walls):.1f}s < 60s, {len(csv1)} CSV tables byte-identical")


if __name__ == "__main__":
    # the criterion lines are printed by the terminal-summary hook in conftest.py
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
