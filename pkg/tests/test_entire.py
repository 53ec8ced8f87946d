from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroloc.entire import (Polynomial, TailDominates, build_entire,
                            build_rational_modification, canonical_genus0, derivative_at_node,
                            evaluate, eventually_decreasing, hamburger_krein_check,
                            log_derivative, sin_cross, weierstrass_sigma)
from zeroloc.kernel import make_context, to_mpc
from zeroloc.nodes import generate_nodes

import oracles

DYADIC = generate_nodes("geometric", {"ratio": 2}, 1024)
CUBES = generate_nodes("power", {"alpha": 3}, 1000)


def test_sin_cross_vanishes_at_node():
    v = evaluate(sin_cross(), 1)
    assert abs(complex(v.value)) <= float(v.abs_error) < 1e-140


def test_sin_cross_near_origin_series():
    v = complex(evaluate(sin_cross(), 1e-30).value)
    assert v == pytest.approx(math.pi ** 2 * 1j * 1e-30, rel=1e-12)


def test_sin_cross_derivatives_at_nodes():
    d1 = complex(derivative_at_node(sin_cross(), 1).value)
    assert d1 == pytest.approx(-1j * math.pi * math.sinh(math.pi), rel=1e-14)
    assert abs(d1) == pytest.approx(36.28143472298, abs=1e-10)
    d0 = complex(derivative_at_node(sin_cross(), 0).value)
    assert d0 == pytest.approx(1j * math.pi ** 2, rel=1e-14)


def test_sin_cross_log_derivative_at_half():
    # pi cot(pi/2) + pi coth(pi/2) - 1/z at z = 1/2
    v = complex(log_derivative(sin_cross(), 0.5).value)
    assert v == pytest.approx(math.pi / math.tanh(math.pi / 2) - 2, abs=1e-14)
    assert v.real == pytest.approx(1.42538, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6), st.sampled_from([0.0, math.pi / 4, 0.3]),
       st.booleans())
def test_sin_cross_matches_closed_form(x, y, angle, origin):
    z = complex(x, y)
    if abs(z) < 1e-3:
        return
    A = sin_cross(angle, origin)
    got = complex(evaluate(A, z).value)
    ref = complex(oracles.sin_cross(z, angle, origin))
    assert abs(got - ref) <= 1e-13 * max(abs(ref), 1e-300) + 1e-300


def test_genus0_dyadic_at_one():
    v = complex(evaluate(canonical_genus0(DYADIC), 1).value)
    assert v == pytest.approx(0.288788095086602421, rel=1e-15)


def test_genus0_dyadic_derivative_at_two():
    d = complex(derivative_at_node(canonical_genus0(DYADIC), 2).value)
    assert d == pytest.approx(-0.5 * 0.288788095086602421, rel=1e-14)


def test_genus0_dyadic_log_derivative_at_zero():
    v = complex(log_derivative(canonical_genus0(DYADIC), 0).value)
    assert v == pytest.approx(-1, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(-200, 200), st.floats(-200, 200))
def test_genus0_dyadic_matches_direct_product(x, y):
    z = complex(x, y)
    got = complex(evaluate(canonical_genus0(DYADIC), z).value)
    ref = complex(oracles.dyadic_product(z))
    assert abs(got - ref) <= 1e-12 * abs(ref) + 1e-300


@pytest.mark.parametrize("z", [5.5 + 2j, -30 + 40j, 200j])
def test_genus0_cubes_matches_hurwitz_tail_oracle(z):
    got = complex(evaluate(canonical_genus0(CUBES), z).value)
    ref = complex(oracles.power_product(z, 3, 20000))
    assert abs(got - ref) <= 1e-12 * abs(ref)


def test_genus0_refuses_points_beyond_truncation_reach():
    with pytest.raises(TailDominates):
        evaluate(canonical_genus0(generate_nodes("geometric", {"ratio": 2}, 16)), 1e6)


@pytest.mark.parametrize("z", [0.7 + 0.4j, -0.6 + 0.5j, 0.2 - 0.9j])
def test_sigma_matches_lattice_product(z):
    got = complex(evaluate(weierstrass_sigma(), z).value)
    ref = complex(oracles.sigma_product(z, 40))
    assert abs(got - ref) <= 1e-5 * abs(ref)


def test_sigma_quasi_periodicity():
    # sigma(z + w) = -exp(eta (z + w/2)) sigma(z); eta = pi w-bar for Z + iZ
    S = weierstrass_sigma()
    z = 0.31 + 0.17j
    b = complex(evaluate(S, z).value)
    for w, eta in ((1, math.pi), (1j, -1j * math.pi), (2 + 1j, math.pi * (2 - 1j))):
        a = complex(evaluate(S, z + w).value)
        sign = 1 if (w.real + w.imag + w.real * w.imag) % 2 == 0 else -1
        assert a == pytest.approx(sign * np.exp(eta * (z + w / 2)) * b, rel=1e-12)


def test_sigma_zeros_and_oddness():
    S = weierstrass_sigma()
    assert complex(evaluate(S, 2 + 3j).value) == 0
    z = 0.4 + 0.9j
    assert complex(evaluate(S, -z).value) == pytest.approx(-complex(evaluate(S, z).value),
                                                           rel=1e-15)


def test_polynomial_log_derivative():
    P = Polynomial(coeffs=[0, 0, 1])
    assert complex(log_derivative(P, 3).value) == pytest.approx(2 / 3, rel=1e-15)


def test_polynomial_from_roots():
    P = Polynomial(roots=[1, 2, -3j])
    assert P.degree == 3
    for r in (1, 2, -3j):
        assert complex(evaluate(P, r).value) == 0
    assert complex(evaluate(P, 1j).value) == pytest.approx((1j - 1) * (1j - 2) * 4j)


def test_rational_modification_empty_is_identity():
    A = sin_cross()
    assert build_rational_modification(A, []) is A


def test_rational_modification_moves_zero():
    A = sin_cross()
    s = 1 + 1e-6
    B = build_rational_modification(A, [(s, 1)])
    assert complex(evaluate(B, s).value) == 0
    v1 = complex(evaluate(B, 1).value)
    d1 = complex(derivative_at_node(A, 1).value)
    assert v1 == pytest.approx(-d1 * 1e-6, rel=1e-5)
    assert abs(complex(evaluate(B, 3).value)) == pytest.approx(
        abs(complex(evaluate(A, 3).value)), abs=1e-30)


def test_build_entire_forms():
    ns = generate_nodes("geometric", {"ratio": 2}, 64)
    A = build_entire({"form": "product", "factors": [{"form": "sin_cross"},
                                                     {"form": "polynomial", "roots": [[0.5, 0]]}]},
                     ns)
    z = 0.3 + 0.2j
    ref = complex(oracles.sin_cross(z)) * (z - 0.5)
    assert complex(evaluate(A, z).value) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        build_entire({"form": "mystery"})


def test_hamburger_krein_sin_cross_residual_shrinks():
    samples = [5.3 * complex(math.cos(a), math.sin(a))
               for a in 2 * math.pi * (np.arange(20) + 0.5) / 20]
    small = hamburger_krein_check(sin_cross(), generate_nodes("cross_lattice", {}, 12), samples)
    large = hamburger_krein_check(sin_cross(), generate_nodes("cross_lattice", {}, 24), samples)
    assert small.residual < 1e-6
    assert large.residual < small.residual * 1e-3
    assert small.decreasing_tail


def test_hamburger_krein_polynomial_fails_decay():
    P = Polynomial(roots=[1])
    rep = hamburger_krein_check(P, generate_nodes("explicit", {"values": [1]}, 2), [3j])
    assert not rep.decreasing_tail


def test_hamburger_krein_sigma_decay():
    S = weierstrass_sigma()
    rep = hamburger_krein_check(S, generate_nodes("square_lattice", {}, 8), [])
    assert all(rep.decay_verdict[M] for M in range(11))


def test_eventually_decreasing():
    assert eventually_decreasing([5, 4, 6, 3, 2, 1])
    assert not eventually_decreasing([1, 2, 3])
    assert not eventually_decreasing([1, 2])


def test_log_derivative_matches_finite_difference():
    A = canonical_genus0(CUBES)
    z = 3.3 + 1.1j
    h = 1e-20
    ctx = make_context(512)
    with ctx.local():
        zz = to_mpc(z)
        fd = (A.value(zz + h) - A.value(zz - h)) / (2 * h) / A.value(zz)
    assert complex(log_derivative(A, z).value) == pytest.approx(complex(fd), rel=1e-20)
