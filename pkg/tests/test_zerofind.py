from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest
from gmpy2 import mpc
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroloc.entire import Polynomial, canonical_genus0, sin_cross
from zeroloc.kernel import make_context
from zeroloc.nodes import attach_measure, generate_nodes
from zeroloc.space import make_coefficients, make_element, orthogonal_coefficients
from zeroloc.zerofind import (CSV_COLUMNS, Disk, DisksOverlap, Rect, ZeroRecord,
                              classify_zeros, compare_attraction_sets, default_budget,
                              disk_radii, find_zeros, min_modulus_profile, region_from_config,
                              report_csv, scan_region, winding_number, zeros_csv)

CTX = make_context(256)


@pytest.fixture(scope="module")
def dyadic():
    ns = generate_nodes("geometric", {"ratio": 2}, 256)
    A = canonical_genus0(ns)
    mu = attach_measure(ns, {"rule": "stretched_exp", "gamma": 1})
    return ns, mu, A


def test_winding_simple_zero():
    assert winding_number(Polynomial(roots=[0]), Disk(0j, 1)) == 1


def test_winding_double_zero():
    assert winding_number(Polynomial(roots=[1, 1]), Disk(0j, 2)) == 2


def test_winding_sin_cross_box():
    assert winding_number(sin_cross(), Rect(-2.5, 2.5, -2.5, 2.5)) == 9


def test_scan_two_roots():
    zs = find_zeros(Polynomial(coeffs=[-1, 0, 1]), Rect(-2, 2, -2, 2), CTX)
    got = sorted(z.z.real for z in zs)
    assert got == pytest.approx([-1, 1], abs=1e-60)
    assert all(z.multiplicity == 1 for z in zs)


def test_scan_reports_double_root_once():
    res = scan_region(Polynomial(roots=[0.3 + 0.1j, 0.3 + 0.1j, -1]), Rect(-2, 2, -2, 2), CTX)
    assert res.winding == 3
    assert sum(z.multiplicity for z in res.zeros) == 3
    assert any(z.multiplicity == 2 for z in res.zeros)


def test_scan_sin_cross_finds_lattice_points():
    res = scan_region(sin_cross(), Rect(-2.5, 2.5, -2.5, 2.5), CTX)
    pts = sorted((round(z.z.real), round(z.z.imag)) for z in res.zeros)
    assert pts == sorted([(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1), (0, 2),
                          (0, -2)])


def test_single_node_element_zeros_are_other_nodes(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(0)", ns), ns, mu, A)
    zs = find_zeros(el, Rect(0, 40, -1, 1))
    assert sorted(z.z.real for z in zs) == pytest.approx([4, 8, 16, 32], abs=1e-100)
    rep = classify_zeros(zs, ns, 2, Rect(0, 40, -1, 1))
    assert rep.attraction_set == frozenset({1, 2, 3, 4})
    assert rep.strays == []
    assert rep.node_status[0] == ("empty",)
    assert rep.exceptional_count == 0


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=5))
def test_winding_equals_total_multiplicity(roots):
    rs = [complex(x, y) for x, y in roots]
    if any(abs(abs(r.real) - 4) < 0.05 for r in rs):
        return
    P = Polynomial(roots=rs, bits=256)
    res = scan_region(P, Rect(-4, 4, -4, 4), CTX)
    assert res.winding == len(rs)
    assert sum(z.multiplicity for z in res.zeros) == res.winding


def test_classify_zeros_at_nodes():
    ns = generate_nodes("geometric", {"ratio": 2}, 64)
    zs = [ZeroRecord(t, 1, 0.0, 0.1) for t in ns]
    rep = classify_zeros(zs, ns, 2)
    assert all(s[0] == "one_zero" for s in rep.node_status.values())
    assert rep.strays == [] and rep.attraction_set == frozenset(range(len(ns)))


def test_classify_no_zeros():
    ns = generate_nodes("geometric", {"ratio": 2}, 64)
    rep = classify_zeros([], ns, 2)
    assert all(s == ("empty",) for s in rep.node_status.values())
    assert rep.attraction_set == frozenset()


def test_classify_stray_and_multiple():
    ns = generate_nodes("geometric", {"ratio": 2}, 64)
    zs = [ZeroRecord(mpc(z), 1, 0, 0.1) for z in (2, 2.001, 3)]
    rep = classify_zeros(zs, ns, 2)
    assert rep.node_status[0][0] == "multiple_zeros"
    assert len(rep.strays) == 1
    assert rep.exceptional_count == 2


def test_disks_overlap_detected():
    ns = generate_nodes("explicit", {"values": [2, 2.001]}, 4)
    ns_tight = type(ns)(**{**ns.__dict__, "sep_C": math.inf})
    with pytest.raises(DisksOverlap):
        classify_zeros([], ns_tight, 0.0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["geometric", "cross_lattice", "square_lattice", "power"]),
       st.floats(0, 6))
def test_disks_are_pairwise_disjoint(kind, M):
    params = {"geometric": {"ratio": 2}, "power": {"alpha": 2}}.get(kind, {})
    ns = generate_nodes(kind, params, 30)
    r = disk_radii(ns, M)
    a = ns.array
    for i in range(len(ns)):
        d = np.abs(a - a[i])
        d[i] = np.inf
        assert np.all(r + r[i] < d)


def test_radii_shrink_with_M():
    ns = generate_nodes("power", {"alpha": 2}, 100)
    assert np.all(disk_radii(ns, 3) <= disk_radii(ns, 2))


def test_compare_subset():
    c = compare_attraction_sets({1, 2}, {1, 2, 3})
    assert str(c) == "S1 ⊆ S2 up to 0 exceptions" and c.comparable


def test_compare_equal():
    c = compare_attraction_sets({1, 2}, {1, 2})
    assert c.relation == "equal" and (c.k12, c.k21) == (0, 0)


def test_compare_disjoint():
    c = compare_attraction_sets(range(0, 20, 2), range(1, 20, 2), budget=5)
    assert str(c) == "incomparable(10, 10)"


def test_default_budget():
    assert default_budget(100) == pytest.approx(6.0)


def test_profile_of_A_itself(dyadic):
    ns, _, A = dyadic
    prof = min_modulus_profile(A, A, ns, 2, 1, Disk(0j, 30))
    assert all(m > 0 and math.isfinite(m) for m in prof.minima)
    # f = 1, so the minimum on each annulus is (inner probe radius + 1)^M
    edges = prof.edges
    for a, b, m in zip(edges, edges[1:], prof.minima):
        assert m == pytest.approx(a + (b - a) / 6 + 1, rel=1e-9)


def test_profile_of_single_node_element(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(0)", ns), ns, mu, A)
    prof = min_modulus_profile(el, A, ns, 2, 1, Disk(0j, 30))
    assert min(prof.minima) > 0.1 * float(mu.sqrt_values[0])


def test_profile_of_orthogonal_element_collapses():
    ns = generate_nodes("geometric", {"ratio": 2}, 1024)
    A = canonical_genus0(ns)
    mu = attach_measure(ns, {"rule": "derivative_power", "N": 1}, A)
    el = make_element(orthogonal_coefficients(ns, mu, A).element_coeffs(), ns, mu, A)
    prof = min_modulus_profile(el, A, ns, 2, 0, Disk(0j, 250))
    assert prof.minima[-1] < 1e-8


def test_csv_columns_and_precision(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(0)", ns), ns, mu, A)
    zs = find_zeros(el, Rect(0, 40, -1, 1))
    rep = classify_zeros(zs, ns, 2, Rect(0, 40, -1, 1))
    text = report_csv(rep)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert rows[0]["re"].startswith("4.0000000000")
    assert len(rows[0]["re"].split("e")[0]) > 100
    assert zeros_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_region_config_round_trip():
    for spec in ({"rect": [-1, 2, -3, 4]}, {"disk": [0.5, -0.5, 2]}):
        assert region_from_config(region_from_config(spec).to_config()) == region_from_config(spec)
    assert region_from_config({"disk": 6}) == Disk(0j, 6)
    with pytest.raises(ValueError):
        region_from_config({"circle": 1})
