"""Entire functions with prescribed simple zeros.

Every function exposes the same small set of raw methods, evaluated at the
active gmpy2 precision:

``value(z)``
    A(z).
``logderiv(z)``
    A'(z)/A(z).
``divided(z, t)``
    A(z)/(z - t) for a zero t, stable for all z including z = t, where it
    equals A'(t).
``divided_logderiv(z, t)``
    Logarithmic derivative of A(z)/(z - t).

Using ``divided`` lets callers evaluate quantities such as A(z)·c/(z - t)
near t without cancellation.  The public functions at the bottom wrap the
raw methods into :class:`BoundedValue` results under a precision context.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping, Sequence

import gmpy2
import mpmath
import numpy as np
from gmpy2 import mpc, mpfr

from .kernel import (DEFAULT_CONTEXT, BoundedValue, PrecisionContext, ZerolocError,
                     current_bits, make_context, parse_number, pi_here, to_mpc)
from .nodes import NodeSet, generate_nodes, node_derivative

NEAR = 0.25  # below this distance to a zero the deflated formulas are used


class TailDominates(ZerolocError):
    """The point is too far out for the truncated product to be trusted."""


class TooCloseToZero(ZerolocError):
    pass


def _eps() -> mpfr:
    return gmpy2.mul_2exp(mpfr(1), -current_bits())


@lru_cache(maxsize=None)
def _pow2(bits: int, e: int) -> mpfr:
    return gmpy2.mul_2exp(mpfr(1, bits), e)


def _sinc(a: mpfr, d: mpc) -> mpc:
    """sin(a·d)/d, equal to a at d = 0."""
    if d == 0:
        return mpc(a)
    return gmpy2.sin(a * d) / d


def _sinhc(a: mpfr, d: mpc) -> mpc:
    if d == 0:
        return mpc(a)
    return gmpy2.sinh(a * d) / d


def _pole_free(fn, d: mpc) -> mpc:
    """fn(d) - 1/d where fn has a simple pole with residue 1 at 0.

    The difference tends to 0 at d = 0 and is evaluated with enough guard
    bits to absorb the cancellation.
    """
    if d == 0:
        return mpc(0)
    bits = current_bits()
    a = abs(d)
    guard = 16 + (max(0, int(-2 * float(gmpy2.log2(a)))) if a < 1 else 0)
    with gmpy2.context(gmpy2.get_context(), precision=bits + guard):
        dd = mpc(d)
        r = fn(dd) - 1 / dd
    return mpc(r)


class EntireFunction:
    form: str = "entire"
    order_estimate: float = 0.0

    def value(self, z: mpc) -> mpc:
        raise NotImplementedError

    def logderiv(self, z: mpc) -> mpc:
        raise NotImplementedError

    def has_zero(self, t) -> bool:
        raise NotImplementedError

    def divided(self, z: mpc, t: mpc) -> mpc:
        return self.value(z) / (z - t)

    def divided_logderiv(self, z: mpc, t: mpc) -> mpc:
        return self.logderiv(z) - 1 / (z - t)

    def zero_distance(self, z) -> float:
        """Distance (double precision) from z to the nearest declared zero."""
        raise NotImplementedError

    def check_domain(self, z: mpc) -> None:
        """Raise TailDominates if z lies outside the trusted evaluation range."""

    def relative_error(self, z: mpc) -> mpfr:
        return _eps() * 64

    def abs_error(self, z: mpc, value: mpc) -> mpfr:
        """Heuristic absolute error of ``value(z)`` at the active precision.

        Combines the relative rounding error with the effect of a rounding
        sized perturbation of the argument, which dominates near zeros.
        """
        return (abs(value) + self.envelope(z) * (abs(z) + 1) * 4) * self.relative_error(z)

    def envelope(self, z: mpc) -> mpfr:
        """A cheap magnitude scale of |A| and |A'| near z."""
        return abs(self.value(z))

    def to_config(self) -> dict:
        return {"form": self.form}


# ---------------------------------------------------------------------------
# genus zero canonical products


@dataclass
class _TailGroup:
    """Nodes u·n**alpha (n >= n0) or u·r**n (n >= n0) beyond the explicit factors."""

    kind: str  # "power" or "geometric"
    u: mpc
    base: mpfr  # alpha or ratio
    n0: int
    first: mpfr  # modulus of the first excluded node
    cache: dict = field(default_factory=dict)

    def P(self, j: int, bits: int) -> mpfr:
        key = (j, bits)
        v = self.cache.get(key)
        if v is None:
            if self.kind == "geometric":
                with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
                    r = mpfr(self.base)
                    v = r ** (-self.n0 * j) / (1 - r ** (-j))
            else:
                with mpmath.workprec(bits + 20):
                    s = mpmath.mpf(_to_mpmath(self.base)) * j
                    h = mpmath.zeta(s, self.n0)
                man, exp = h.man_exp
                with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
                    v = gmpy2.mul_2exp(mpfr(int(man)), int(exp))
            self.cache[key] = v
        return v

    def Pdiv(self, j: int, bits: int) -> mpfr:
        key = ("div", j, bits)
        v = self.cache.get(key)
        if v is None:
            with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
                v = self.P(j, bits) / j
            self.cache[key] = v
        return v


def _to_mpmath(x: mpfr):
    m, e = x.as_mantissa_exp()
    return mpmath.mpf((int(m), int(e)))


class CanonicalProduct(EntireFunction):
    """z^m · ∏ (1 - z/t) over a genus zero node family.

    The family is multiplied out explicitly up to ``extension`` times the
    node set radius; the remaining infinite tail is added analytically via
    log ∏(1 - z/t) = -Σ_j (z^j/j) Σ t^{-j}, with the power sums given by
    Hurwitz zeta values (power families) or geometric series.
    """

    order_estimate = 0.0

    def __init__(self, ns: NodeSet, lacunary: bool = False, extension: float = 16.0):
        self.ns = ns
        self.form = "lacunary" if lacunary else "canonical_genus0"
        kind, p = ns.kind, ns.params
        groups: list[_TailGroup] = []
        bits = ns.bits
        ctx = make_context(bits)
        if kind == "explicit" or kind not in ("geometric", "power", "signed_power",
                                               "imaginary_power"):
            if kind != "explicit":
                raise ValueError(f"no genus zero product for node family {kind!r}")
            factors = list(ns.nodes)
            self.internal_radius = math.inf
        else:
            if kind != "geometric":
                with ctx.local():
                    a = parse_number(p.get("beta" if kind == "imaginary_power" else "alpha")).real
                if not a > 1:
                    raise ValueError("genus zero product needs a summable family (exponent > 1)")
            R_int = ns.radius * extension
            ext = generate_nodes(kind, p, R_int, ctx)
            factors = list(ext.nodes)
            self.internal_radius = R_int
            with ctx.local():
                if kind == "geometric":
                    r = parse_number(p["ratio"]).real
                    n0 = int(p.get("start", 1)) + len(factors)
                    groups.append(_TailGroup("geometric", mpc(1), r, n0, r ** n0))
                else:
                    units = {"power": [mpc(1)], "signed_power": [mpc(1), mpc(-1)],
                             "imaginary_power": [mpc(0, 1)]}[kind]
                    n0 = len(factors) // len(units) + 1
                    for u in units:
                        groups.append(_TailGroup("power", u, a, n0, mpfr(n0) ** a))
        if lacunary:
            mods = sorted(float(abs(t)) for t in factors if t != 0)
            ratios = [b / a for a, b in zip(mods, mods[1:])]
            if ratios and min(ratios) <= 1.0 + 1e-12:
                raise ValueError("node set is not lacunary")
        self.origin = any(t == 0 for t in factors)
        self.factors = [t for t in factors if t != 0]
        self.inv = None
        self._inv_bits = None
        self.groups = groups
        self._arr = np.array([complex(t) for t in self.factors])
        self._index = {(c.real, c.imag): i for i, c in enumerate(self._arr)}

    def _inverses(self):
        bits = current_bits()
        if self._inv_bits != bits:
            self.inv = [1 / t for t in self.factors]
            self._inv_bits = bits
        return self.inv

    def _J(self, z: mpc, g: _TailGroup) -> int:
        rho = float(abs(z) / g.first)
        if rho == 0:
            return 1
        if rho >= 0.5:
            raise TailDominates(f"|z| = {float(abs(z)):.4g} too large for the product truncation")
        return int(math.ceil((current_bits() + 8) * math.log(2) / -math.log(rho))) + 1

    def check_domain(self, z: mpc) -> None:
        if 4 * float(abs(z)) > self.internal_radius:
            raise TailDominates(f"truncation radius {self.internal_radius:g} < 4|z|")

    def _log_tail(self, z: mpc) -> mpc:
        bits = current_bits()
        s = mpc(0)
        for g in self.groups:
            w = z / g.u
            J = self._J(z, g)
            # Horner in w over the coefficients P_j / j
            acc = mpc(0)
            for j in range(J, 0, -1):
                acc = (acc + g.Pdiv(j, bits)) * w
            s -= acc
        return s

    def _tail_logderiv(self, z: mpc) -> mpc:
        bits = current_bits()
        s = mpc(0)
        for g in self.groups:
            w = z / g.u
            J = self._J(z, g)
            acc = mpc(0)
            for j in range(J, 0, -1):
                acc = acc * w + g.P(j, bits)
            s -= acc / g.u
        return s

    def _product(self, z: mpc, skip: int = -1) -> mpc:
        v = mpc(1)
        for i, inv in enumerate(self._inverses()):
            if i != skip:
                v *= 1 - z * inv
        if self.groups:
            v *= gmpy2.exp(self._log_tail(z))
        return v

    def value(self, z):
        v = self._product(z)
        return v * z if self.origin else v

    def logderiv(self, z):
        s = sum((1 / (z - t) for t in self.factors), mpc(0))
        if self.origin:
            s += 1 / z
        return s + self._tail_logderiv(z)

    def _find(self, t) -> int | None:
        """Index of the factor equal to t, -1 for the origin, None if absent."""
        if t == 0:
            return -1 if self.origin else None
        c = complex(t)
        i = self._index.get((c.real, c.imag))
        if i is not None and abs(self.factors[i] - t) <= abs(t) * gmpy2.mul_2exp(mpfr(1), -40):
            return i
        return None

    def has_zero(self, t) -> bool:
        return self._find(to_mpc(t)) is not None

    def divided(self, z, t):
        k = self._find(t)
        if k is None:
            raise ValueError(f"{complex(t)} is not a zero of this product")
        if k == -1:
            return self._product(z)
        v = -self._product(z, skip=k) * self._inverses()[k]
        return v * z if self.origin else v

    def divided_logderiv(self, z, t):
        k = self._find(t)
        if k is None:
            raise ValueError(f"{complex(t)} is not a zero of this product")
        s = sum((1 / (z - u) for i, u in enumerate(self.factors) if i != k), mpc(0))
        if self.origin and k != -1:
            s += 1 / z
        return s + self._tail_logderiv(z)

    def zero_distance(self, z) -> float:
        c = complex(z)
        d = float(np.min(np.abs(self._arr - c))) if len(self._arr) else math.inf
        return min(d, abs(c)) if self.origin else d

    def relative_error(self, z):
        return _eps() * (8 * (len(self.factors) + 8) + 64)

    def envelope(self, z):
        a = abs(z)
        v = mpfr(1)
        for t in self.factors:
            v *= 1 + a / abs(t)
        return v * (a if self.origin else 1)

    def to_config(self):
        return {"form": self.form}


# ---------------------------------------------------------------------------
# closed forms


class SinCross(EntireFunction):
    """sin(πw)·sin(πiw)/w^p with w = e^{-iθ}z.

    Zeros: e^{iθ}(Z ∪ iZ), including 0 when ``origin`` (p = 1) and excluding
    it otherwise (p = 2).  θ = 0 with the origin is the plain cross lattice
    function.
    """

    form = "sin_cross"
    order_estimate = 1.0

    def __init__(self, angle=0, origin: bool = True, bits: int = 512):
        self.angle_spec = angle
        self.origin = bool(origin)
        self.p = 1 if origin else 2
        with make_context(bits).local():
            theta = parse_number(angle).real if isinstance(angle, str) else mpfr(angle)
        self.theta = theta
        self.rotated = theta != 0
        self._rot_cache: dict = {}
        self._theta_f = float(theta)

    def _rot(self):
        bits = current_bits()
        r = self._rot_cache.get(bits)
        if r is None:
            th = mpfr(self.theta)
            if isinstance(self.angle_spec, str):
                th = parse_number(self.angle_spec).real
            r = mpc(gmpy2.cos(th), -gmpy2.sin(th))  # e^{-iθ}
            self._rot_cache[bits] = r
        return r

    def _w(self, z):
        return z * self._rot() if self.rotated else z

    def _scale(self):
        return self._rot() if self.rotated else 1

    def value(self, z):
        w = self._w(z)
        pi = pi_here()
        if self.p == 1:
            return gmpy2.sin(pi * w) * _sinhc(pi, w) * 1j
        return _sinc(pi, w) * _sinhc(pi, w) * 1j

    def logderiv(self, z):
        w = self._w(z)
        pi = pi_here()
        if self.p == 2:
            s = (_pole_free(lambda d: pi / gmpy2.tan(pi * d), w)
                 + _pole_free(lambda d: pi / gmpy2.tanh(pi * d), w))
        else:
            s = pi / gmpy2.tan(pi * w) + _pole_free(lambda d: pi / gmpy2.tanh(pi * d), w)
        return s * self._scale()

    def _classify(self, t):
        """('origin', 0), ('re', k) or ('im', k) for a zero t, else None."""
        w = self._w(to_mpc(t))
        tol = max(abs(w), mpfr(1)) * gmpy2.mul_2exp(mpfr(1), -current_bits() // 2)
        if abs(w) <= tol:
            return ("origin", 0) if self.origin else None
        kr = int(gmpy2.rint(w.real))
        if abs(w - kr) <= tol and kr != 0:
            return ("re", kr)
        ki = int(gmpy2.rint(w.imag))
        if abs(w - mpc(0, ki)) <= tol and ki != 0:
            return ("im", ki)
        return None

    def has_zero(self, t) -> bool:
        return self._classify(t) is not None

    def divided(self, z, t):
        c = self._classify(t)
        if c is None:
            raise ValueError(f"{complex(t)} is not a zero of sin_cross")
        if abs(z - t) >= NEAR:
            return self.value(z) / (z - t)
        w = self._w(z)
        pi = pi_here()
        kind, k = c
        sign = -1 if k % 2 else 1
        if kind == "origin":
            v = _sinc(pi, w) * _sinhc(pi, w) * 1j
        elif kind == "re":
            v = sign * _sinc(pi, w - k) * gmpy2.sinh(pi * w) * 1j / w ** self.p
        else:
            d = w - mpc(0, k)
            v = sign * gmpy2.sin(pi * w) * _sinhc(pi, d) * 1j / w ** self.p
        return v * self._scale()

    def divided_logderiv(self, z, t):
        c = self._classify(t)
        if c is None:
            raise ValueError(f"{complex(t)} is not a zero of sin_cross")
        if abs(z - t) >= NEAR:
            return self.logderiv(z) - 1 / (z - t)
        w = self._w(z)
        pi = pi_here()
        cot = lambda d: pi / gmpy2.tan(pi * d)  # noqa: E731
        coth = lambda d: pi / gmpy2.tanh(pi * d)  # noqa: E731
        kind, k = c
        if kind == "origin":
            s = _pole_free(cot, w) + _pole_free(coth, w)
        elif kind == "re":
            s = _pole_free(cot, w - k) + coth(w) - self.p / w
        else:
            s = cot(w) + _pole_free(coth, w - mpc(0, k)) - self.p / w
        return s * self._scale()

    def zero_distance(self, z) -> float:
        w = complex(z)
        if self.rotated:
            w *= complex(math.cos(self._theta_f), -math.sin(self._theta_f))
        kr, ki = round(w.real), round(w.imag)
        if not self.origin:
            kr = kr or (1 if w.real >= 0 else -1)
            ki = ki or (1 if w.imag >= 0 else -1)
        return min(abs(w - kr), abs(w - 1j * ki))

    def envelope(self, z):
        w = self._w(z)
        pi = pi_here()
        return gmpy2.cosh(pi * w.imag) * gmpy2.cosh(pi * w.real) * pi / max(abs(w), mpfr(1)) ** (self.p - 1)

    def relative_error(self, z):
        return _eps() * (64 + 16 * abs(z))

    def to_config(self):
        return {"form": "sin_cross", "angle": self.angle_spec, "origin": self.origin}


class _ThetaData:
    """q-series coefficients of θ1 with nome e^{-π} at one precision."""

    def __init__(self, bits: int):
        with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
            pi = gmpy2.const_pi()
            q = gmpy2.exp(-pi)
            coeffs = []
            n = 0
            while True:
                c = q ** ((n + mpfr(1) / 2) ** 2)
                # terms are multiplied by at most e^{(2n+1)π/2}·(a few) after reduction
                if n > 2 and float(gmpy2.log2(c)) + (2 * n + 1) * 2.3 < -(bits + 16):
                    break
                coeffs.append(c if n % 2 == 0 else -c)
                n += 1
            self.coeffs = coeffs
            self.dtheta0 = 2 * sum(cf * (2 * i + 1) for i, cf in enumerate(coeffs))


@lru_cache(maxsize=16)
def _theta_data(bits: int) -> _ThetaData:
    return _ThetaData(bits)


class WeierstrassSigma(EntireFunction):
    """Weierstrass σ for the lattice Z + iZ, shifted: A(z) = σ(z - shift).

    Evaluated through σ(v) = π^{-1} e^{πv²/2} θ1(πv)/θ1'(0) with nome
    q = e^{-π}, after reducing z - shift to the fundamental square with the
    quasi-periodicity σ(v + ω) = ±e^{η(ω)(v + ω/2)} σ(v), η(m + in) = π(m - in).
    """

    form = "weierstrass_sigma"
    order_estimate = 2.0

    def __init__(self, shift=0, bits: int = 512):
        self.shift_spec = shift
        with make_context(bits).local():
            self.shift = parse_number(shift) if isinstance(shift, str) else to_mpc(shift)
        self._shift_c = complex(self.shift)

    def _shift(self):
        if isinstance(self.shift_spec, str):
            return parse_number(self.shift_spec)
        return mpc(self.shift)

    @staticmethod
    def _theta(x: mpc, with_derivative: bool):
        """θ1(x) and θ1'(x)."""
        td = _theta_data(current_bits())
        e = gmpy2.exp(mpc(0, 1) * x)
        einv = 1 / e
        e2, einv2 = e * e, einv * einv
        a, b = e, einv
        th = mpc(0)
        dth = mpc(0)
        for n, c in enumerate(td.coeffs):
            th += c * (a - b)
            if with_derivative:
                dth += c * (2 * n + 1) * (a + b)
            a *= e2
            b *= einv2
        # sin = (a - b)/(2i), cos = (a + b)/2
        return th * mpc(0, -1), dth, td

    def _sigma0_over(self, v: mpc, divide: bool) -> mpc:
        """σ(v), or σ(v)/v when ``divide``."""
        pi = pi_here()
        if divide and v == 0:
            return mpc(1)
        th, _, td = self._theta(pi * v, False)
        s = gmpy2.exp(pi * v * v / 2) * th / (pi * td.dtheta0)
        return s / v if divide else s

    def _reduce(self, u: mpc, center=None):
        if center is None:
            m, n = int(gmpy2.rint(u.real)), int(gmpy2.rint(u.imag))
        else:
            m, n = center
        v = u - mpc(m, n)
        return m, n, v

    def _factor(self, m: int, n: int, v: mpc) -> mpc:
        pi = pi_here()
        eta = mpc(pi * m, -pi * n)
        om = mpc(m, n)
        sign = -1 if (m + n + m * n) % 2 else 1
        return sign * gmpy2.exp(eta * (v + om / 2))

    def value(self, z):
        m, n, v = self._reduce(z - self._shift())
        return self._factor(m, n, v) * self._sigma0_over(v, False)

    def _zeta0(self, v: mpc, deflate: bool) -> mpc:
        pi = pi_here()

        def zf(d):
            th, dth, _ = self._theta(pi * d, True)
            return pi * dth / th

        if deflate:
            return pi * v + _pole_free(zf, v)
        return pi * v + zf(v)

    def logderiv(self, z):
        m, n, v = self._reduce(z - self._shift())
        pi = pi_here()
        return mpc(pi * m, -pi * n) + self._zeta0(v, False)

    def _lattice_index(self, t):
        u = to_mpc(t) - self._shift()
        m, n = int(gmpy2.rint(u.real)), int(gmpy2.rint(u.imag))
        tol = max(abs(u), mpfr(1)) * gmpy2.mul_2exp(mpfr(1), -current_bits() // 2)
        if abs(u - mpc(m, n)) <= tol:
            return m, n
        return None

    def has_zero(self, t) -> bool:
        return self._lattice_index(t) is not None

    def divided(self, z, t):
        idx = self._lattice_index(t)
        if idx is None:
            raise ValueError(f"{complex(t)} is not a lattice point")
        if abs(z - t) >= NEAR:
            return self.value(z) / (z - t)
        m, n, v = self._reduce(z - self._shift(), idx)
        return self._factor(m, n, v) * self._sigma0_over(v, True)

    def divided_logderiv(self, z, t):
        idx = self._lattice_index(t)
        if idx is None:
            raise ValueError(f"{complex(t)} is not a lattice point")
        if abs(z - t) >= NEAR:
            return self.logderiv(z) - 1 / (z - t)
        m, n, v = self._reduce(z - self._shift(), idx)
        pi = pi_here()
        return mpc(pi * m, -pi * n) + self._zeta0(v, True)

    def zero_distance(self, z) -> float:
        u = complex(z) - self._shift_c
        return abs(u - complex(round(u.real), round(u.imag)))

    def envelope(self, z):
        pi = pi_here()
        return gmpy2.exp(pi * gmpy2.norm(z - self._shift()) / 2) * 4

    def relative_error(self, z):
        return _eps() * (128 + 16 * gmpy2.norm(z))

    def to_config(self):
        return {"form": "weierstrass_sigma", "shift": self.shift_spec}


class Polynomial(EntireFunction):
    """A polynomial given by ascending coefficients or by its roots."""

    form = "polynomial"
    order_estimate = 0.0

    def __init__(self, coeffs: Sequence | None = None, roots: Sequence | None = None,
                 lead=1, bits: int = 512):
        with make_context(bits).local():
            if roots is not None:
                self.roots = [to_mpc(r) for r in roots]
                c = [to_mpc(lead)]
                for r in self.roots:
                    c = [mpc(0)] + c
                    for i in range(len(c) - 1):
                        c[i] -= r * c[i + 1]
                self.coeffs = c
            else:
                self.coeffs = [parse_number(a) if isinstance(a, str) else to_mpc(a)
                               for a in coeffs]
                while len(self.coeffs) > 1 and self.coeffs[-1] == 0:
                    self.coeffs.pop()
                self.roots = None
        if not any(c != 0 for c in self.coeffs):
            raise ValueError("zero polynomial")
        self.lead = to_mpc(lead)
        self._roots_c = np.array([complex(r) for r in self.roots]) if self.roots else None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def value(self, z):
        if self.roots is not None:
            v = mpc(self.lead)
            for r in self.roots:
                v *= z - r
            return v
        v = mpc(0)
        for c in reversed(self.coeffs):
            v = v * z + c
        return v

    def derivative(self, z):
        v = mpc(0)
        for k in range(len(self.coeffs) - 1, 0, -1):
            v = v * z + k * self.coeffs[k]
        return v

    def logderiv(self, z):
        if self.roots is not None:
            return sum((1 / (z - r) for r in self.roots), mpc(0))
        return self.derivative(z) / self.value(z)

    def _root_index(self, t):
        if self.roots is None:
            return None
        for i, r in enumerate(self.roots):
            if r == t:
                return i
        return None

    def has_zero(self, t) -> bool:
        t = to_mpc(t)
        if self.roots is not None:
            return self._root_index(t) is not None
        scale = sum((abs(c) * abs(t) ** k for k, c in enumerate(self.coeffs)), mpfr(0))
        return abs(self.value(t)) <= scale * gmpy2.mul_2exp(mpfr(1), -current_bits() // 2)

    def divided(self, z, t):
        i = self._root_index(t)
        if i is not None:
            v = mpc(self.lead)
            for j, r in enumerate(self.roots):
                if j != i:
                    v *= z - r
            return v
        # synthetic division by (z - t); exact quotient when t is a root
        q = mpc(0)
        b = mpc(0)
        for c in reversed(self.coeffs[1:]):
            b = b * t + c
            q = q * z + b
        return q

    def divided_logderiv(self, z, t):
        i = self._root_index(t)
        if i is not None:
            return sum((1 / (z - r) for j, r in enumerate(self.roots) if j != i), mpc(0))
        return super().divided_logderiv(z, t)

    def zero_distance(self, z) -> float:
        if self._roots_c is not None and len(self._roots_c):
            return float(np.min(np.abs(self._roots_c - complex(z))))
        cs = [complex(c) for c in reversed(self.coeffs)]
        if len(cs) < 2:
            return math.inf
        return float(np.min(np.abs(np.roots(cs) - complex(z))))

    def envelope(self, z):
        a = abs(z)
        return sum((abs(c) * (a + 1) ** k for k, c in enumerate(self.coeffs)), mpfr(0))

    def relative_error(self, z):
        return _eps() * (16 * len(self.coeffs) + 16)

    def to_config(self):
        if self.roots is not None:
            return {"form": "polynomial", "roots": [[float(r.real), float(r.imag)] for r in self.roots]}
        return {"form": "polynomial", "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}


class Product(EntireFunction):
    form = "product"

    def __init__(self, factors: Sequence[EntireFunction]):
        if not factors:
            raise ValueError("product needs at least one factor")
        self.factors = list(factors)
        self.order_estimate = max(f.order_estimate for f in self.factors)

    def _owner(self, t) -> int:
        for i, f in enumerate(self.factors):
            if f.has_zero(t):
                return i
        raise ValueError(f"{complex(t)} is not a zero of any factor")

    def value(self, z):
        v = mpc(1)
        for f in self.factors:
            v *= f.value(z)
        return v

    def logderiv(self, z):
        return sum((f.logderiv(z) for f in self.factors), mpc(0))

    def has_zero(self, t) -> bool:
        return any(f.has_zero(t) for f in self.factors)

    def divided(self, z, t):
        k = self._owner(t)
        v = self.factors[k].divided(z, t)
        for i, f in enumerate(self.factors):
            if i != k:
                v *= f.value(z)
        return v

    def divided_logderiv(self, z, t):
        k = self._owner(t)
        s = self.factors[k].divided_logderiv(z, t)
        for i, f in enumerate(self.factors):
            if i != k:
                s += f.logderiv(z)
        return s

    def zero_distance(self, z) -> float:
        return min(f.zero_distance(z) for f in self.factors)

    def check_domain(self, z):
        for f in self.factors:
            f.check_domain(z)

    def envelope(self, z):
        v = mpfr(1)
        for f in self.factors:
            v *= f.envelope(z)
        return v

    def relative_error(self, z):
        return sum((f.relative_error(z) for f in self.factors), mpfr(0))

    def to_config(self):
        return {"form": "product", "factors": [f.to_config() for f in self.factors]}


class RationalModification(EntireFunction):
    """base(z)·∏ (z - s_k)/(z - t_k): zeros t_k of base moved to s_k."""

    form = "rational_mod"

    def __init__(self, base: EntireFunction, pairs: Sequence[tuple], bits: int = 512):
        self.base = base
        self.order_estimate = base.order_estimate
        with make_context(bits).local():
            self.new = [to_mpc(s) for s, _ in pairs]
            self.old = [to_mpc(t) for _, t in pairs]
            for s, t in zip(self.new, self.old):
                if not base.has_zero(t):
                    raise ValueError(f"{complex(t)} is not a zero of the base function")
                if abs(s - t) > 1 / (abs(t) + 1) ** 2:
                    raise ValueError(f"new zero {complex(s)} is too far from {complex(t)}")
                if s == t or base.has_zero(s):
                    raise ValueError(f"new zero {complex(s)} coincides with an existing zero")
            if len(set((complex(s) for s in self.new))) != len(self.new):
                raise ValueError("new zeros must be distinct")
            if len(set((complex(t) for t in self.old))) != len(self.old):
                raise ValueError("old zeros must be distinct")
        self._old_c = np.array([complex(t) for t in self.old])

    def _nearest_old(self, z) -> int:
        return int(np.argmin(np.abs(self._old_c - complex(z))))

    def value(self, z):
        if not self.old:
            return self.base.value(z)
        j = self._nearest_old(z)
        v = self.base.divided(z, self.old[j]) * (z - self.new[j])
        for k, (s, t) in enumerate(zip(self.new, self.old)):
            if k != j:
                v *= (z - s) / (z - t)
        return v

    def logderiv(self, z):
        if not self.old:
            return self.base.logderiv(z)
        j = self._nearest_old(z)
        s = self.base.divided_logderiv(z, self.old[j]) + 1 / (z - self.new[j])
        for k, (a, b) in enumerate(zip(self.new, self.old)):
            if k != j:
                s += 1 / (z - a) - 1 / (z - b)
        return s

    def _moved(self, t) -> int | None:
        for k, s in enumerate(self.new):
            if s == t:
                return k
        return None

    def has_zero(self, t) -> bool:
        t = to_mpc(t)
        if self._moved(t) is not None:
            return True
        return self.base.has_zero(t) and all(t != o for o in self.old)

    def divided(self, z, t):
        t = to_mpc(t)
        if not self.has_zero(t):
            raise ValueError(f"{complex(t)} is not a zero of the modified function")
        if abs(z - t) >= NEAR:
            return self.value(z) / (z - t)
        k = self._moved(t)
        if k is not None:
            v = self.base.divided(z, self.old[k])
            for i, (s, o) in enumerate(zip(self.new, self.old)):
                if i != k:
                    v *= (z - s) / (z - o)
            return v
        v = self.base.divided(z, t)
        for s, o in zip(self.new, self.old):
            v *= (z - s) / (z - o)
        return v

    def divided_logderiv(self, z, t):
        t = to_mpc(t)
        if abs(z - t) >= NEAR:
            return self.logderiv(z) - 1 / (z - t)
        k = self._moved(t)
        if k is not None:
            s = self.base.divided_logderiv(z, self.old[k])
            for i, (a, b) in enumerate(zip(self.new, self.old)):
                if i != k:
                    s += 1 / (z - a) - 1 / (z - b)
            return s
        s = self.base.divided_logderiv(z, t)
        for a, b in zip(self.new, self.old):
            s += 1 / (z - a) - 1 / (z - b)
        return s

    def zero_distance(self, z) -> float:
        c = complex(z)
        d = self.base.zero_distance(z)
        if not self.old:
            return d
        d_new = min(abs(complex(s) - c) for s in self.new)
        if float(np.min(np.abs(self._old_c - c))) <= d * (1 + 1e-9):
            # the closest base zero was moved; its replacement is within reach
            return d_new
        return min(d, d_new)

    def check_domain(self, z):
        self.base.check_domain(z)

    def envelope(self, z):
        return self.base.envelope(z) * 4

    def relative_error(self, z):
        return self.base.relative_error(z) + _eps() * 8 * (len(self.old) + 1)

    def to_config(self):
        return {"form": "rational_mod", "base": self.base.to_config(),
                "pairs": [[[float(s.real), float(s.imag)], [float(t.real), float(t.imag)]]
                          for s, t in zip(self.new, self.old)]}


# ---------------------------------------------------------------------------
# construction


def canonical_genus0(ns: NodeSet, lacunary: bool = False) -> CanonicalProduct:
    return CanonicalProduct(ns, lacunary=lacunary)


def sin_cross(angle=0, origin: bool = True, bits: int = 512) -> SinCross:
    return SinCross(angle, origin, bits)


def weierstrass_sigma(shift=0, bits: int = 512) -> WeierstrassSigma:
    return WeierstrassSigma(shift, bits)


def build_rational_modification(base: EntireFunction, pairs: Sequence[tuple],
                                bits: int = 512) -> EntireFunction:
    """Move zeros t_k of ``base`` to nearby points s_k (pairs are (s_k, t_k))."""
    if not pairs:
        return base
    return RationalModification(base, pairs, bits)


def build_entire(spec: Mapping[str, Any], ns: NodeSet | None = None,
                 parts: Mapping[str, NodeSet] | None = None, bits: int = 512) -> EntireFunction:
    """Construct an entire function from a config dictionary.

    Product-type forms (``canonical_genus0``, ``lacunary``) use ``ns``, or
    the union part named by ``"nodes"`` when given.
    """
    spec = dict(spec)
    form = spec.get("form")
    if form in ("canonical_genus0", "lacunary"):
        target = ns
        if "nodes" in spec:
            if not parts or spec["nodes"] not in parts:
                raise ValueError(f"unknown node part {spec['nodes']!r}")
            target = parts[spec["nodes"]]
        if target is None:
            raise ValueError(f"{form} needs a node set")
        return CanonicalProduct(target, lacunary=form == "lacunary")
    if form == "sin_cross":
        return SinCross(spec.get("angle", 0), spec.get("origin", True), bits)
    if form == "weierstrass_sigma":
        return WeierstrassSigma(spec.get("shift", 0), bits)
    if form == "polynomial":
        if "roots" in spec:
            return Polynomial(roots=[_num(r) for r in spec["roots"]], bits=bits)
        return Polynomial(coeffs=[_num(c) for c in spec["coeffs"]], bits=bits)
    if form == "product":
        return Product([build_entire(f, ns, parts, bits) for f in spec["factors"]])
    if form == "rational_mod":
        base = build_entire(spec["base"], ns, parts, bits)
        pairs = [(_num(s), _num(t)) for s, t in spec["pairs"]]
        return build_rational_modification(base, pairs, bits)
    raise ValueError(f"unknown entire function form {form!r}")


def _num(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return v


# ---------------------------------------------------------------------------
# bounded evaluation


def evaluate(A: EntireFunction, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BoundedValue:
    with ctx.local():
        z = mpc(to_mpc(z))
        A.check_domain(z)
        v = A.value(z)
        err = A.abs_error(z, v)
    return BoundedValue(v, err, bits=ctx.bits)


def derivative_at_node(A: EntireFunction, t, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BoundedValue:
    with ctx.local():
        t = mpc(to_mpc(t))
        if not A.has_zero(t):
            raise ValueError(f"{complex(t)} is not a declared zero")
        d, err = node_derivative(A, t, ctx)
    return BoundedValue(d, err, bits=ctx.bits)


def log_derivative(A: EntireFunction, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BoundedValue:
    with ctx.local():
        z = mpc(to_mpc(z))
        A.check_domain(z)
        if A.zero_distance(z) < max(1.0, abs(complex(z))) * 2.0 ** (-ctx.bits / 2):
            raise TooCloseToZero(f"{complex(z)} is too close to a zero")
        v = A.logderiv(z)
        err = (abs(v) + 1) * A.relative_error(z) * 4
    return BoundedValue(v, err, bits=ctx.bits)


@dataclass
class HKReport:
    residual: float
    tail_estimate: float
    residuals: list
    decay: dict  # M -> list of shell maxima of |A'(t)|^{-1} max(|t|,1)^M
    decay_verdict: dict  # M -> bool
    decreasing_tail: bool
    min_modulus: float
    samples: int

    def to_dict(self) -> dict:
        return {"residual": self.residual, "tail_estimate": self.tail_estimate,
                "decreasing_tail": "yes" if self.decreasing_tail else "no",
                "decay_verdict": {str(k): v for k, v in self.decay_verdict.items()},
                "min_modulus": self.min_modulus, "samples": self.samples}


def shell_maxima(moduli: np.ndarray, log_values: np.ndarray, per_octave: int = 4) -> list[float]:
    """Maxima of log-values over consecutive shells 2^{j/per_octave} <= |t|."""
    shells: dict[int, float] = {}
    for m, v in zip(moduli, log_values):
        k = int(math.floor(per_octave * math.log2(max(float(m), 1.0)) + 1e-9))
        shells[k] = max(shells.get(k, -math.inf), float(v))
    return [shells[k] for k in sorted(shells)]


def eventually_decreasing(seq: Sequence[float]) -> bool:
    """The last third of ``seq`` is strictly decreasing and ends below its start."""
    if len(seq) < 3:
        return False
    tail = list(seq[len(seq) - max(2, len(seq) // 3):])
    return all(b < a for a, b in zip(tail, tail[1:])) and seq[-1] < seq[0]


def hamburger_krein_check(A: EntireFunction, ns: NodeSet, samples: Sequence, M_max: int = 10,
                          ctx: PrecisionContext = DEFAULT_CONTEXT) -> HKReport:
    """Interpolation-series residual, derivative decay and min modulus of A."""
    moduli = ns.moduli
    arr = ns.array
    for z in samples:
        c = complex(z)
        d = np.abs(arr - c)
        if np.any(d <= (moduli + 1) ** -2):
            raise ValueError(f"sample {c} lies inside a node disk")
    with ctx.local():
        inv_d = []
        log_abs = []
        for t in ns.nodes:
            d, _ = node_derivative(A, t, ctx)
            inv_d.append(1 / d)
            log_abs.append(float(gmpy2.log(abs(d))))
        log_abs = np.array(log_abs)
        outer = moduli >= 0.9 * float(np.max(moduli)) if len(moduli) else moduli
        residuals, tails, mins = [], [], []
        for z in samples:
            z = to_mpc(z)
            a = A.value(z)
            s = mpc(0)
            tail = mpfr(0)
            for i, (t, w) in enumerate(zip(ns.nodes, inv_d)):
                term = w / (z - t)
                s += term
                if outer[i]:
                    tail += abs(term)
            residuals.append(float(abs(1 / a - s)))
            tails.append(float(tail))
            mins.append(float(abs(a)))
    decay, verdict = {}, {}
    logm = np.log(np.maximum(moduli, 1.0))
    for M in range(M_max + 1):
        seq = shell_maxima(moduli, -log_abs + M * logm)
        decay[M] = seq
        verdict[M] = eventually_decreasing(seq)
    return HKReport(residual=max(residuals) if residuals else 0.0,
                    tail_estimate=max(tails) if tails else 0.0, residuals=residuals,
                    decay=decay, decay_verdict=verdict,
                    decreasing_tail=all(verdict.values()) if verdict else False,
                    min_modulus=min(mins) if mins else math.inf, samples=len(samples))
