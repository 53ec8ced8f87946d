"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line outcome in ``conftest.ACCEPTANCE``; the terminal
summary prints them after the run.
"""
from __future__ import annotations

import json
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE, FIXTURES
from zeroloc.cli import main
from zeroloc.entire import Polynomial
from zeroloc.experiments import (ExperimentConfig, Weight, check_tech_condition,
                                 legendre_transform, log_grid, ordering_verdict,
                                 run_experiment)
from zeroloc.kernel import make_context
from zeroloc.zerofind import Rect, scan_region

import oracles


def record(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[k] = (bool(ok), detail)


def load(name: str) -> ExperimentConfig:
    return ExperimentConfig.load(FIXTURES / name)


def _random_roots(rng, degree, sep=0.1):
    roots: list[complex] = []
    while len(roots) < degree:
        z = complex(*rng.uniform(-5, 5, 2))
        if all(abs(z - r) >= sep for r in roots):
            roots.append(z)
    return roots


def test_zero_finder_matches_polynomial_oracle():
    rng = np.random.default_rng(2024)
    ctx = make_context(256)
    region = Rect(-6, 6, -6, 6)
    worst, mismatched, t0 = 0.0, [], time.time()
    for trial in range(50):
        degree = int(rng.integers(1, 9))
        # the polynomial is fixed by its (double) coefficients; both sides solve that one
        coeffs = [complex(c) for c in oracles.poly_from_roots(_random_roots(rng, degree))]
        ref = [complex(r) for r in oracles.polyroots(coeffs)]
        res = scan_region(Polynomial(coeffs=coeffs, bits=256), region, ctx)
        got = [z.z for z in res.zeros]
        total = sum(z.multiplicity for z in res.zeros)
        ok = total == res.winding == degree and len(got) == degree
        for r in ref:
            d = min(abs(r - g) for g in got) if got else np.inf
            worst = max(worst, d)
            ok = ok and d <= 1e-10
        if not ok:
            mismatched.append(trial)
    elapsed = time.time() - t0
    passed = not mismatched and worst <= 1e-10
    record(1, passed, f"50 polynomials, worst root distance {worst:.1e}, "
                      f"winding mismatches {mismatched}, {elapsed:.0f}s")
    assert passed, mismatched


def test_interpolation_series_residual():
    v = run_experiment(load("hk_sin_cross.json"))
    r12, r24 = v.ledger["rows"]
    ok = v.status == "pass" and r12["residual"] < 1e-4 and r24["shrink"] >= 1e3
    record(2, ok, f"residual {r12['residual']:.1e} at R=12, {r24['residual']:.1e} at R=24")
    assert ok


def test_moment_orthogonality():
    v = run_experiment(load("moments_dyadic.json"))
    rows = v.ledger["moments"]
    ok = (v.status == "pass" and len(rows) == 11 and all(r["within"] for r in rows)
          and all(r["ratio"] <= 10 for r in rows))
    worst = max(r["ratio"] for r in rows)
    record(3, ok, f"k=0..10 within tail bound, worst radius-ratio {worst:.2f}")
    assert ok


@pytest.fixture(scope="module")
def strong_verdict():
    t0 = time.time()
    v = run_experiment(load("strong_cubes.json"))
    return v, time.time() - t0


@pytest.fixture(scope="module")
def type2_verdict():
    t0 = time.time()
    v = run_experiment(load("type2_cross.json"))
    return v, time.time() - t0


def test_strong_localization(strong_verdict):
    v, elapsed = strong_verdict
    trials = v.ledger["trials"]
    ok = (v.status == "pass" and len(trials) == 5 and v.budget <= 6
          and all(t["status"] == "pass" and not t["late_failures"] for t in trials))
    worst = max(t.get("exceptions", 99) for t in trials)
    record(4, ok, f"5 trials, max exceptions {worst} (budget {v.budget:g}), {elapsed:.0f}s")
    assert ok


def test_type2_localization(type2_verdict):
    v, elapsed = type2_verdict
    sub = v.ledger["subchecks"]
    ok = v.status == "pass"
    bits = v.ledger.get("bits")
    record(5, ok, f"status {v.status} at {bits} bits (generic {sub['generic']}, structured "
                  f"{sub['structured']}, interpolation {sub['hamburger_krein']}), {elapsed:.0f}s")
    assert ok, v.ledger


def test_ordering(strong_verdict, type2_verdict):
    vs, _ = strong_verdict
    vt, _ = type2_verdict
    strong_sets = {k: set(r.attraction_set) for k, r in vs.reports.items()}
    type2_sets = {k: set(r.attraction_set) for k, r in vt.reports.items()}
    a = ordering_verdict(strong_sets, vs.budget)
    b = ordering_verdict(type2_sets, vt.budget, expect_chain=2)
    # the smaller class must be the structured trials, nested in the generic class
    classes = b.ledger["classes"]
    nested = (len(classes) == 2 and all(n.startswith("generic") for n in classes[0])
              and all(n.startswith("structured") for n in classes[1]))
    ok = a.status == "pass" and b.status == "pass" and nested
    record(6, ok, f"strong run {a.ledger['chain_length']} class, type-2 chain length "
                  f"{b.ledger['chain_length']}")
    assert ok, (a.ledger, b.ledger)


def test_legendre_closed_form():
    t0 = time.time()
    worst = 0.0
    with mpmath.workdps(60):
        for beta in (1.0, 2.0):
            w = Weight("exp", beta)
            for x in log_grid(beta, 1e6, 100):
                exact = oracles.legendre_exp(mpmath.mpf(x), beta)
                num = legendre_transform(w, x, "numeric")
                worst = max(worst, float(abs(mpmath.mpf(num) - exact)))
    tech = [check_tech_condition(w).status
            for w in (Weight("exp", 1.0), Weight("exp", 2.0), Weight("quadratic", 1.0))]
    v = run_experiment(load("legendre.json"))
    ok = worst <= 1e-12 and all(s == "pass" for s in tech) and v.status == "pass"
    record(7, ok, f"max error {worst:.1e} vs closed form, technical condition {tech}, "
                  f"{time.time() - t0:.1f}s")
    assert ok


WEIGHT_RULES = {
    "dyadic e^-|t|": ({"family": "geometric", "params": {"ratio": 2}}, 2 ** 20,
                      {"rule": "stretched_exp", "gamma": 1}, None),
    # 2^(-n^2) decay only overtakes |t|^20 past n ~ 20, so this rule needs a longer truncation
    "dyadic |t|^2|A'|^-2": ({"family": "geometric", "params": {"ratio": 2}}, 2 ** 40,
                            {"rule": "derivative_power", "N": 1}, {"form": "canonical_genus0"}),
    "cubes |t|^-12|A'|^-2": ({"family": "power", "params": {"alpha": 3}}, 1e6,
                             {"rule": "derivative_inverse_power", "N": 12},
                             {"form": "canonical_genus0"}),
    "i k^(1/2), e^-|t|": ({"family": "imaginary_power", "params": {"beta": 0.5}}, 100,
                          {"rule": "stretched_exp", "gamma": 1}, None),
}


def _decay_config(nodes, radius, rule, entire) -> ExperimentConfig:
    space = {"nodes": nodes, "radius": radius, "measure": rule}
    if entire is not None:
        space["entire"] = entire
    return ExperimentConfig.from_dict({"kind": "weight_decay", "space": space})


def _from_fixture(name: str) -> ExperimentConfig:
    d = json.loads((FIXTURES / name).read_text())
    d["kind"] = "weight_decay"
    for key in ("trials", "seeds", "M", "params"):
        d.pop(key, None)
    d["space"].pop("region", None)
    return ExperimentConfig.from_dict(d)


def test_weight_decay():
    t0 = time.time()
    results = {name: run_experiment(_decay_config(*spec)).status
               for name, spec in WEIGHT_RULES.items()}
    results["cross lattices (piecewise)"] = run_experiment(_from_fixture("type2_cross.json")).status
    results["square lattices (piecewise)"] = run_experiment(_from_fixture("type2_sigma.json")).status
    poly = run_experiment(_decay_config({"family": "geometric", "params": {"ratio": 2}}, 2 ** 20,
                                        {"rule": "poly_exp", "M": -3, "c": 0}, None))
    ok = all(s == "pass" for s in results.values()) and poly.status == "fail"
    failing = [n for n, s in results.items() if s != "pass"]
    record(8, ok, f"{len(results)} example rules pass{'' if not failing else f' except {failing}'}"
                  f", |t|^-3 {poly.status} ({', '.join(poly.ledger['failing'][:2])}), "
                  f"{time.time() - t0:.1f}s")
    assert ok, (results, poly.ledger["failing"])


def test_reruns_are_byte_identical(tmp_path, capsys):
    same = []
    for name in ("strong_dyadic_basis.json", "weight_decay_minimal.json", "hk_sin_cross.json"):
        outs = []
        for k in range(2):
            out = tmp_path / f"run{k}"
            assert main(["run", str(FIXTURES / name), "--out", str(out)]) == 0
            run_id = json.loads(capsys.readouterr().out)["run_id"]
            d = out / run_id
            outs.append({p.name: p.read_bytes() for p in d.iterdir()
                         if p.name == "verdict.json" or p.suffix == ".csv"})
        same.append(outs[0] == outs[1] and "zeros.csv" in outs[0])
    ok = all(same)
    record(9, ok, "verdict.json and zeros CSVs identical across reruns of 3 fixtures")
    assert ok
