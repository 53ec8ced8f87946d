from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroloc.entire import canonical_genus0, derivative_at_node, sin_cross
from zeroloc.kernel import make_context, to_mpc
from zeroloc.nodes import attach_measure, explicit_measure, generate_nodes
from zeroloc.space import (TooCloseToNode, direct_split_value, evaluate_F, evaluate_f,
                           make_coefficients, make_element, membership_check, moment,
                           orthogonal_coefficients, split_entire_part, structured_element,
                           tilde_measure)
from zeroloc.zerofind import CallableEvaluable

import oracles


@pytest.fixture(scope="module")
def dyadic():
    ns = generate_nodes("geometric", {"ratio": 2}, 1024)
    A = canonical_genus0(ns)
    mu = attach_measure(ns, {"rule": "derivative_power", "N": 1}, A)
    return ns, mu, A


@pytest.fixture(scope="module")
def cross():
    ns = generate_nodes("cross_lattice", {}, 16)
    A = sin_cross()
    mu = attach_measure(ns, {"rule": "poly_exp", "M": 1, "c": "2*pi"})
    return ns, mu, A


def test_basis_element_is_single_term(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(2)", ns), ns, mu, A)
    assert el.support == (2,)
    assert el.norm == 1
    z = 3.7 + 0.4j
    with make_context(512).local():
        zz = to_mpc(z)
        ref = mu.sqrt_values[2] * A.value(zz) / (zz - ns.nodes[2])
    assert complex(evaluate_F(el, z).value) == pytest.approx(complex(ref), rel=1e-30)


def test_zero_element(dyadic):
    ns, mu, A = dyadic
    el = make_element([0] * len(ns), ns, mu, A)
    assert el.is_zero and el.norm == 0
    assert complex(evaluate_F(el, 1.5).value) == 0
    assert complex(evaluate_f(el, 1.5).value) == 0


def test_random_norm_matches_direct_sum():
    ns = generate_nodes("cross_lattice", {}, 25).subset(range(100))
    mu = attach_measure(ns, {"rule": "poly_exp", "M": 1, "c": "2*pi"})
    coeffs = make_coefficients("random_gaussian(7)", ns)
    el = make_element(coeffs, ns, mu, sin_cross())
    ref = math.sqrt(math.fsum(abs(complex(c)) ** 2 for c in coeffs))
    assert el.norm == pytest.approx(ref, rel=1e-14)


def test_random_coefficients_are_seeded(cross):
    ns = cross[0]
    a = make_coefficients("random_gaussian(3)", ns)
    b = make_coefficients("random_gaussian(3)", ns)
    c = make_coefficients("random_gaussian(4)", ns)
    assert a == b and a != c


def test_residue_at_node(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(1)", ns), ns, mu, A)
    v = complex(evaluate_F(el, ns.nodes[1]).value)
    d = complex(derivative_at_node(A, ns.nodes[1]).value)
    assert v == pytest.approx(float(mu.sqrt_values[1]) * d, rel=1e-30)


def test_random_element_against_high_precision_oracle(cross):
    ns, mu, A = cross
    el = make_element(make_coefficients("random_gaussian(1)", ns), ns, mu, A)
    with mpmath.mp.workdps(200):
        nodes = [mpmath.mpc(complex(t)) for t in ns]
        ws = [mpmath.mpc(str(c.real), str(c.imag)) * mpmath.sqrt(mpmath.mpf(str(m)))
              for c, m in zip(el.coeffs, mu.values)]
    for k in range(6):
        z = 4 * complex(math.cos(k + 0.3), math.sin(k + 0.3))
        got = evaluate_F(el, z)
        with mpmath.mp.workdps(200):
            ref = oracles.cauchy_element(z, nodes, ws, lambda u: oracles.sin_cross(u, dps=200))
        assert abs(complex(got.value) - complex(ref)) <= 1e-25 * abs(complex(ref))


def test_evaluate_f_refuses_node(dyadic):
    ns, mu, A = dyadic
    el = make_element(make_coefficients("basis(0)", ns), ns, mu, A)
    with pytest.raises(TooCloseToNode):
        evaluate_f(el, 2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 20), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, x, y):
    ns = generate_nodes("cross_lattice", {}, 6)
    mu = attach_measure(ns, {"rule": "poly_exp", "M": 1, "c": "2*pi"})
    A = sin_cross()
    a = make_element(make_coefficients(f"random_gaussian({seed})", ns), ns, mu, A)
    b = make_element(make_coefficients(f"random_gaussian({seed + 100})", ns), ns, mu, A)
    z = complex(x, y) + 0.123 + 0.0456j
    s = evaluate_F(a + b.scaled(2j), z).value
    with make_context(512).local():
        ref = evaluate_F(a, z).value + 2j * evaluate_F(b, z).value
        assert abs(s - ref) <= 1e-100 * (abs(ref) + 1)


def test_moment_of_zero_coefficients(dyadic):
    ns, mu, _ = dyadic
    r = moment([0] * len(ns), ns, mu, 3)
    assert r.value.value == 0 and r.tail_bound == 0


def test_moment_with_unit_coefficients():
    ns = generate_nodes("geometric", {"ratio": 2}, 1024)
    mu = attach_measure(ns, {"rule": "stretched_exp", "gamma": 1})
    r = moment([1] * len(ns), ns, mu, 0)
    with mpmath.mp.workdps(40):
        ref = mpmath.nsum(lambda n: mpmath.exp(-mpmath.mpf(2) ** n), [1, mpmath.inf])
    assert complex(r.value.value).real == pytest.approx(float(ref), rel=1e-15)
    assert float(ref) == pytest.approx(0.15399, abs=1e-5)


def test_orthogonal_moments_within_tail(dyadic):
    ns, mu, A = dyadic
    oc = orthogonal_coefficients(ns, mu, A)
    for k in range(11):
        r = moment(oc, ns, mu, k)
        assert r.within_tail, k


def test_orthogonal_coefficients_norm_converges():
    ns = generate_nodes("geometric", {"ratio": 2}, 2 ** 16)
    A = canonical_genus0(ns)
    mu = attach_measure(ns, {"rule": "derivative_power", "N": 2}, A)
    oc = orthogonal_coefficients(ns, mu, A)
    assert math.isfinite(oc.norm_sq)
    assert oc.partial_norms[-1] - oc.partial_norms[9] < 1e-6 * oc.partial_norms[-1]


def test_single_node_orthogonal_coefficient():
    ns = generate_nodes("explicit", {"values": [1]}, 2)
    A = sin_cross()
    mu = explicit_measure(ns, [3])
    oc = orthogonal_coefficients(ns, mu, A)
    d = complex(derivative_at_node(A, 1).value)
    assert complex(oc.values[0]) == pytest.approx(1 / (3 * d), rel=1e-30)


def test_membership_single_node(cross):
    ns, mu, A = cross
    el = make_element(make_coefficients("basis(3)", ns), ns, mu, A)
    rep = membership_check(el, ns, mu, A, grid=24)
    assert rep.verdicts == {"i": "pass", "ii": "pass", "iii": "pass"}
    assert rep.growth["N_prime"] == 0


def test_membership_polynomial_multiple_fails_smallness(cross):
    ns, mu, A = cross
    F = CallableEvaluable(lambda z: A.value(z) * z)
    rep = membership_check(F, ns, mu, A, grid=24)
    assert rep.verdicts["iii"] == "fail"


def test_membership_orthogonal_element_is_small(dyadic):
    ns, mu, A = dyadic
    oc = orthogonal_coefficients(ns, mu, A)
    el = make_element(oc.element_coeffs(), ns, mu, A)
    rep = membership_check(el, ns, mu, A, grid=24)
    assert rep.verdicts["iii"] == "pass"
    assert rep.smallness["fraction"] >= 0.9


def test_split_part_single_node():
    ns = generate_nodes("explicit", {"values": [[0.5, 0.5]]}, 2)
    A2 = sin_cross()
    mu = explicit_measure(ns, [1])
    H = split_entire_part([1], ns, A2, mu)
    with make_context(512).local():
        t = ns.nodes[0]
        for z in (1.3 + 0.2j, -0.7j):
            zz = to_mpc(z)
            ref = (A2.value(zz) - A2.value(t)) / (zz - t)
            assert complex(H.value(zz)) == pytest.approx(complex(ref), rel=1e-30)
        assert complex(H.value(t)) == pytest.approx(complex(A2.value(t) * A2.logderiv(t)),
                                                    rel=1e-30)


def test_split_part_zero_coefficients(cross):
    ns, mu, A = cross
    H = split_entire_part([0] * len(ns), ns, A, mu)
    assert complex(H.value(1.5 + 0.5j)) == 0


def test_split_part_matches_direct_difference():
    T1 = generate_nodes("rotated_cross_lattice", {"angle": "pi/4"}, 8)
    mu = attach_measure(T1, {"rule": "poly_exp", "M": -2, "c": "(2*sqrt(2)+2)*pi"})
    A2 = sin_cross()
    coeffs = make_coefficients("random_gaussian(5)", T1)
    H = split_entire_part(coeffs, T1, A2, mu)
    rng = np.random.default_rng(2)
    pts = rng.uniform(-2, 2, (20, 2))
    for x, y in pts:
        z = complex(x, y)
        with make_context(512).local():
            got = H.value(to_mpc(z))
        with make_context(2048).local():
            ref = direct_split_value(coeffs, T1, A2, mu, to_mpc(z))
            assert abs(got - ref) <= 1e-100 * abs(ref)


def test_structured_element_vanishes_on_first_part_complement():
    T1 = generate_nodes("rotated_cross_lattice", {"angle": "pi/4"}, 6)
    T = generate_nodes("cross_lattice", {}, 6)
    mu_t1 = attach_measure(T1, {"rule": "poly_exp", "M": -2, "c": "(2*sqrt(2)+2)*pi"})
    A1 = sin_cross("pi/4", origin=False)
    mt = tilde_measure(mu_t1, T1, list(range(len(T1))), sin_cross())
    el = structured_element(make_coefficients("basis(0)", T1), T1, mt, A1)
    # F = A1·w/(z - t_0) vanishes at every other node of T1 and nowhere on Z u iZ
    with make_context(512).local():
        assert abs(el.value(T1.nodes[5])) < 1e-100
        assert abs(el.value(T.nodes[3])) > 1e-10
