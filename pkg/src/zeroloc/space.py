"""Elements F = A·f of a Cauchy–de Branges space, f(z) = Σ a_n μ_n^{1/2}/(z - t_n).

Near a node t_k the product A·f is rewritten as

    F(z) = D_k(z)·[w_k + (z - t_k)·Σ_{n≠k} w_n/(z - t_n)],   D_k = A/(z - t_k),

with w_n = a_n μ_n^{1/2}.  This is exact everywhere and removes the
0·∞ cancellation at the nodes, where zeros of F typically sit within
(|t|+1)^{-M} of t_k.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .entire import CanonicalProduct, EntireFunction
from .kernel import (DEFAULT_CONTEXT, BoundedValue, PrecisionContext, PrecisionExhausted,
                     ZerolocError, compensated_sum, current_bits, make_context, to_mpc)
from .nodes import Measure, NodeSet, explicit_measure, generate_nodes, node_derivative


class TooCloseToNode(ZerolocError):
    pass


def _bits_ctx(bits: int) -> PrecisionContext:
    return make_context(max(64, bits))


@dataclass(frozen=True, eq=False)
class SpaceElement:
    coeffs: tuple
    ns: NodeSet
    mu: Measure
    A: EntireFunction
    norm: float
    label: str = ""

    def __post_init__(self) -> None:
        with _bits_ctx(self.ns.bits).local():
            w = tuple(a * s for a, s in zip(self.coeffs, self.mu.sqrt_values))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "support", tuple(i for i, a in enumerate(self.coeffs) if a != 0))

    @property
    def is_zero(self) -> bool:
        return not self.support

    @property
    def hazards(self) -> tuple:
        """Points near which zeros are expected: the nodes."""
        return self.ns.nodes

    def zero_distance(self, z) -> float:
        return self.ns.nearest(z)[1]

    def check_domain(self, z) -> None:
        self.A.check_domain(z)

    # raw evaluation at the active precision ------------------------------

    def _nearest(self, z: mpc) -> int:
        return self.ns.nearest(z)[0]

    def cauchy(self, z: mpc, skip: int = -1, derivative: bool = False):
        """Σ_{n≠skip} w_n/(z - t_n) and optionally its derivative."""
        s = mpc(0)
        ds = mpc(0)
        nodes, w = self.ns.nodes, self.weights
        for i in self.support:
            if i == skip:
                continue
            d = 1 / (z - nodes[i])
            term = w[i] * d
            s += term
            if derivative:
                ds -= term * d
        return (s, ds) if derivative else s

    def f(self, z: mpc) -> mpc:
        return self.cauchy(z)

    def value(self, z: mpc) -> mpc:
        if self.is_zero:
            return mpc(0)
        k = self._nearest(z)
        t = self.ns.nodes[k]
        s = self.cauchy(z, skip=k)
        return self.A.divided(z, t) * (self.weights[k] + (z - t) * s)

    def value_logderiv(self, z: mpc) -> tuple[mpc, mpc]:
        """F(z) and F'(z)/F(z) from one pass over the nodes."""
        k = self._nearest(z)
        t = self.ns.nodes[k]
        s, ds = self.cauchy(z, skip=k, derivative=True)
        g = self.weights[k] + (z - t) * s
        dg = s + (z - t) * ds
        D = self.A.divided(z, t)
        if g == 0:
            return mpc(0), mpc("inf")
        return D * g, self.A.divided_logderiv(z, t) + dg / g

    def logderiv(self, z: mpc) -> mpc:
        return self.value_logderiv(z)[1]

    def magnitude(self, z: mpc) -> mpfr:
        """|D_k|·(|w_k| + |z - t_k| Σ|w_n|/|z - t_n|): the scale that rounding acts on."""
        k = self._nearest(z)
        t = self.ns.nodes[k]
        acc = abs(self.weights[k])
        for i in self.support:
            if i != k:
                acc += abs(z - t) * abs(self.weights[i]) / abs(z - self.ns.nodes[i])
        return abs(self.A.divided(z, t)) * acc

    def __add__(self, other: SpaceElement) -> SpaceElement:
        if other.ns is not self.ns or other.mu is not self.mu or other.A is not self.A:
            raise ValueError("elements live in different spaces")
        with _bits_ctx(self.ns.bits).local():
            return make_element([a + b for a, b in zip(self.coeffs, other.coeffs)],
                                self.ns, self.mu, self.A)

    def scaled(self, c) -> SpaceElement:
        with _bits_ctx(self.ns.bits).local():
            c = to_mpc(c)
            return make_element([c * a for a in self.coeffs], self.ns, self.mu, self.A, self.label)


def make_element(coeffs: Sequence, ns: NodeSet, mu: Measure, A: EntireFunction,
                 label: str = "") -> SpaceElement:
    if len(coeffs) != len(ns):
        raise ValueError(f"length mismatch: {len(coeffs)} coefficients for {len(ns)} nodes")
    if len(mu) != len(ns):
        raise ValueError("measure does not match the node set")
    with _bits_ctx(ns.bits).local():
        cs = tuple(mpc(to_mpc(a)) for a in coeffs)
        norm2 = sum((gmpy2.norm(a) for a in cs), mpfr(0))
        norm = float(gmpy2.sqrt(norm2))
    return SpaceElement(cs, ns, mu, A, norm, label)


def evaluate_f(el: SpaceElement, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BoundedValue:
    with ctx.local():
        z = mpc(to_mpc(z))
        if el.is_zero:
            return BoundedValue(mpc(0), mpfr(0), bits=ctx.bits)
        i, d = el.ns.nearest(z)
        if abs(z - el.ns.nodes[i]) <= max(1.0, abs(complex(z))) * 2.0 ** (-ctx.bits / 2):
            raise TooCloseToNode(f"{complex(z)} is too close to node {complex(el.ns.nodes[i])}")
        v = el.f(z)
        scale = sum((abs(el.weights[j]) / abs(z - el.ns.nodes[j]) for j in el.support), mpfr(0))
        err = scale * len(el.support) * 4 * ctx.eps
    return BoundedValue(v, err, bits=ctx.bits)


def evaluate_F(el: SpaceElement, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> BoundedValue:
    with ctx.local():
        z = mpc(to_mpc(z))
        if el.is_zero:
            return BoundedValue(mpc(0), mpfr(0), bits=ctx.bits)
        el.check_domain(z)
        v = el.value(z)
        err = el.magnitude(z) * (len(el.support) * 4 * ctx.eps + el.A.relative_error(z))
    return BoundedValue(v, err, bits=ctx.bits)


# ---------------------------------------------------------------------------
# coefficient sequences


@dataclass
class OrthogonalCoefficients:
    """c_n = 1/(A'(t_n) μ_n), orthogonal to all polynomials in L²(μ)."""

    values: list
    ns: NodeSet
    mu: Measure
    A: EntireFunction
    norm_sq: float  # Σ |c_n|² μ_n over the truncation
    partial_norms: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def element_coeffs(self) -> list:
        """ℓ² coefficients a_n = c_n μ_n^{1/2} of the corresponding element."""
        with _bits_ctx(self.ns.bits).local():
            return [c * s for c, s in zip(self.values, self.mu.sqrt_values)]


def orthogonal_coefficients(ns: NodeSet, mu: Measure, A: EntireFunction,
                            ctx: PrecisionContext | None = None) -> OrthogonalCoefficients:
    ctx = ctx or _bits_ctx(ns.bits)
    vals, partial = [], []
    with ctx.local():
        acc = mpfr(0)
        for t, m in zip(ns.nodes, mu.values):
            d, _ = node_derivative(A, t, ctx)
            c = 1 / (d * m)
            vals.append(c)
            acc += gmpy2.norm(c) * m
            partial.append(float(acc))
    return OrthogonalCoefficients(vals, ns, mu, A, float(acc), partial)


def coefficient_generator(spec) -> dict:
    """Normalize "basis(3)"-style strings or dicts into ``{"gen": name, ...}``."""
    if isinstance(spec, Mapping):
        return dict(spec)
    s = str(spec).strip()
    name, _, rest = s.partition("(")
    rest = rest.rstrip(")").strip()
    name = name.strip()
    if name == "basis":
        return {"gen": "basis", "k": int(rest)}
    if name == "random_gaussian":
        return {"gen": "random_gaussian", "seed": int(rest) if rest else 0}
    if name == "orthogonal":
        return {"gen": "orthogonal"}
    if name == "explicit":
        return {"gen": "explicit", "values": json.loads(rest or "[]")}
    if name == "supported_on":
        subset, _, inner = rest.partition(",")
        return {"gen": "supported_on", "subset": subset.strip(), "of": coefficient_generator(inner.strip())}
    raise ValueError(f"unknown coefficient generator {spec!r}")


def make_coefficients(spec, ns: NodeSet, mu: Measure | None = None,
                      A: EntireFunction | None = None) -> list:
    g = coefficient_generator(spec)
    kind = g.get("gen")
    n = len(ns)
    with _bits_ctx(ns.bits).local():
        if kind == "basis":
            k = int(g["k"])
            if not 0 <= k < n:
                raise ValueError(f"basis index {k} out of range")
            return [mpc(1) if i == k else mpc(0) for i in range(n)]
        if kind == "random_gaussian":
            rng = np.random.default_rng(int(g.get("seed", 0)))
            x = rng.standard_normal((n, 2)) / math.sqrt(2)
            return [mpc(mpfr(float(a)), mpfr(float(b))) for a, b in x]
        if kind == "orthogonal":
            if mu is None or A is None:
                raise ValueError("orthogonal coefficients need a measure and an entire function")
            return orthogonal_coefficients(ns, mu, A).element_coeffs()
        if kind == "explicit":
            vals = g["values"]
            if len(vals) != n:
                raise ValueError("explicit coefficients must match the node count")
            return [to_mpc(complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v)
                    for v in vals]
        if kind == "supported_on":
            subset = g["subset"]
            if isinstance(subset, str):
                keep = set(ns.part_indices(subset))
                if not keep:
                    raise ValueError(f"no nodes labelled {subset!r}")
            else:
                keep = set(int(i) for i in subset)
            base = make_coefficients(g["of"], ns, mu, A)
            return [a if i in keep else mpc(0) for i, a in enumerate(base)]
    raise ValueError(f"unknown coefficient generator {kind!r}")


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentReport:
    k: int
    value: BoundedValue
    tail_bound: float

    @property
    def within_tail(self) -> bool:
        return float(abs(self.value.value)) <= self.tail_bound


def moment(coeffs, ns: NodeSet, mu: Measure, k: int,
           ctx: PrecisionContext = DEFAULT_CONTEXT) -> MomentReport:
    """Σ c_n μ_n t_n^k over the truncation.

    Plain coefficient lists are finitely supported, so their tail is zero.
    For :class:`OrthogonalCoefficients` the excluded terms are t^k/A'(t); the
    bound sums their moduli over the family out to four times the radius and
    extrapolates the rest geometrically.
    """
    if not 0 <= k <= 64:
        raise ValueError("moment order must lie in 0..64")
    if len(coeffs) != len(ns):
        raise ValueError("coefficient length mismatch")
    with ctx.local():
        terms = [to_mpc(c) * m * t ** k for c, m, t in zip(coeffs, mu.values, ns.nodes)]
    tail = 0.0
    if isinstance(coeffs, OrthogonalCoefficients):
        tail = orthogonal_tail_bound(coeffs.A, ns, k, ctx)
    v = compensated_sum(terms, tail, ctx)
    return MomentReport(k, v, tail)


def excluded_terms(A: EntireFunction, ns: NodeSet, k: int, outer: float,
                   ctx: PrecisionContext) -> tuple[np.ndarray, list[float]]:
    """Moduli and |t^k/A'(t)| for family nodes with radius < |t| <= outer."""
    if ns.kind in ("explicit", "union"):
        return np.array([]), []
    ext = generate_nodes(ns.kind, ns.params, outer, ctx)
    if isinstance(A, CanonicalProduct) and 4 * outer > A.internal_radius:
        # same infinite product, truncated further out so |t| stays in its domain
        A = CanonicalProduct(ext, lacunary=A.form == "lacunary")
    mods, vals = [], []
    with ctx.local():
        for t in ext.nodes:
            if abs(t) <= ns.radius:
                continue
            d, _ = node_derivative(A, t, ctx)
            mods.append(float(abs(t)))
            vals.append(float(abs(t) ** k / abs(d)))
    return np.array(mods), vals


def _shell_sums(mods: np.ndarray, vals: list[float]) -> list[float]:
    shells: dict[int, float] = {}
    for m, v in zip(mods, vals):
        j = int(math.floor(math.log2(m)))
        shells[j] = shells.get(j, 0.0) + v
    return [shells[j] for j in sorted(shells)]


def orthogonal_tail_bound(A: EntireFunction, ns: NodeSet, k: int,
                          ctx: PrecisionContext = DEFAULT_CONTEXT, factor: float = 4.0) -> float:
    """Σ |t^k/A'(t)| over the excluded nodes.

    Terms are summed explicitly out to ``factor`` times the radius, extended
    by factors of four (at most four times) while the outermost dyadic shells
    still shrink by less than half; the remainder is extrapolated
    geometrically from the last two shells.
    """
    outer = ns.radius * factor
    for _ in range(5):
        mods, vals = excluded_terms(A, ns, k, outer, ctx)
        shells = _shell_sums(mods, vals)
        if len(shells) < 2 or shells[-2] == 0 or shells[-1] / shells[-2] < 0.5:
            break
        outer *= 4
    if not vals:
        return 0.0
    total = math.fsum(vals)
    if len(shells) >= 2 and shells[-2] > 0:
        q = shells[-1] / shells[-2]
        total += shells[-1] * q / (1 - q) if q < 1 else math.inf
    else:
        total *= 2
    return total


# ---------------------------------------------------------------------------
# membership at finite scale


@dataclass
class MembershipReport:
    node_sum: dict
    growth: dict
    smallness: dict
    verdicts: dict

    def to_dict(self) -> dict:
        return {"verdicts": self.verdicts, "node_sum": self.node_sum,
                "growth": self.growth, "smallness": self.smallness}


def _candidate_value(F, z: mpc) -> mpc:
    if hasattr(F, "value"):
        return F.value(z)
    return to_mpc(F(z))


def membership_check(F, ns: NodeSet, mu: Measure, A: EntireFunction,
                     ctx: PrecisionContext = DEFAULT_CONTEXT, R: float | None = None,
                     circles: int = 8, per_circle: int = 24, grid: int = 64,
                     small_ratio: float = 0.1, density: float = 0.2,
                     max_degree: int = 16) -> MembershipReport:
    """Finite-scale versions of the three membership conditions.

    (i) node sum Σ|F(t_n)|²/(|A'(t_n)|² μ_n); (ii) smallest N' <= 16 for
    which |F|/(|z|^{N'}|A|) stops growing over log-spaced circles; (iii) the
    fraction of a uniform grid on D(0, R) where |F| < ``small_ratio``·|A|.
    """
    R = float(R if R is not None else ns.radius / 4)
    verdicts = {}
    C, N = ns.sep_C, ns.sep_N
    with ctx.local():
        # (i)
        if isinstance(F, SpaceElement):
            terms = [gmpy2.norm(a) for a in F.coeffs]
            total = float(sum(terms, mpfr(0)))
            node_sum = {"total": total, "norm_sq": F.norm ** 2, "terms": len(terms),
                        "consistent": math.isclose(total, F.norm ** 2, rel_tol=1e-12, abs_tol=1e-300)}
            verdicts["i"] = "pass" if node_sum["consistent"] else "fail"
        else:
            terms, last = [], 0.0
            for t, m in zip(ns.nodes, mu.values):
                d, _ = node_derivative(A, t, ctx)
                terms.append(float(gmpy2.norm(_candidate_value(F, t)) / (gmpy2.norm(d) * m)))
            total = math.fsum(terms)
            outer = [v for v, r in zip(terms, ns.moduli) if r > ns.radius / 10]
            last = math.fsum(outer)
            node_sum = {"total": total, "last_decade": last, "terms": len(terms)}
            if not math.isfinite(total):
                verdicts["i"] = "fail"
            elif total == 0 or last < 0.01 * total:
                verdicts["i"] = "pass"
            else:
                verdicts["i"] = "inconclusive"

        # (ii)
        radii = np.geomspace(2.0, R, circles)
        logs = []  # per circle: list of log|F/A| and log|z|
        for r in radii:
            vals = []
            for j in range(per_circle):
                z = complex(r * math.cos(2 * math.pi * (j + 0.5) / per_circle),
                            r * math.sin(2 * math.pi * (j + 0.5) / per_circle))
                i, d = ns.nearest(z)
                tn = max(float(ns.moduli[i]), 1.0)
                if d < C * tn ** (-N) / 2:
                    continue
                zz = to_mpc(z)
                a = A.value(zz)
                fv = _candidate_value(F, zz)
                if a == 0:
                    continue
                ratio = abs(fv / a)
                vals.append(float(gmpy2.log(ratio)) if ratio > 0 else -math.inf)
            logs.append((math.log(r), max(vals) if vals else -math.inf))
        chosen = None
        maxima = {}
        for Np in range(max_degree + 1):
            seq = [v - Np * lr for lr, v in logs]
            maxima[Np] = seq
            half = len(seq) // 2
            inner, outer_ = max(seq[:half] or [-math.inf]), max(seq[half:] or [-math.inf])
            if outer_ <= inner + 1e-9 or all(v == -math.inf for v in seq):
                chosen = Np
                break
        growth = {"radii": [float(r) for r in radii], "N_prime": chosen,
                  "log_max_ratio": maxima.get(chosen, maxima[max(maxima)])}
        verdicts["ii"] = "pass" if chosen is not None else "fail"

        # (iii)
        def grid_stats(RR):
            xs = np.linspace(-RR, RR, grid)
            small, count, witness = 0, 0, -math.inf
            for x in xs:
                for y in xs:
                    z = complex(x, y)
                    if abs(z) > RR or abs(z) < 1e-12:
                        continue
                    i, d = ns.nearest(z)
                    tn = max(float(ns.moduli[i]), 1.0)
                    if d < C * tn ** (-N) / 2:
                        continue
                    zz = to_mpc(z)
                    a = A.value(zz)
                    if a == 0:
                        continue
                    q = abs(_candidate_value(F, zz) / a)
                    count += 1
                    if q < small_ratio:
                        small += 1
                        if q > 0:
                            witness = max(witness, float(gmpy2.log(q)) + 10 * math.log(abs(z)))
            return small, count, witness

        small, count, witness = grid_stats(R)
        _, _, witness_half = grid_stats(R / 2)
        frac = small / count if count else 0.0
        smallness = {"fraction": frac, "threshold": density, "points": count,
                     "log_witness": witness, "log_witness_half": witness_half,
                     "witness_decreases": witness < witness_half}
        verdicts["iii"] = "pass" if frac >= density else "fail"
    return MembershipReport(node_sum, growth, smallness, verdicts)


# ---------------------------------------------------------------------------
# type-2 machinery


class SplitPart:
    """H(z) = Σ c_n μ_n^{1/2} (A₂(z) - A₂(t_n))/(z - t_n) over a node subset.

    This is the entire function left after moving the residues of
    A₂·Σ c_n μ_n^{1/2}/(z - t_n) onto the nodes.  Each difference quotient is
    computed with enough extra bits to absorb its cancellation; at z = t_n it
    is A₂'(t_n).
    """

    def __init__(self, coeffs, ns: NodeSet, A2: EntireFunction, mu: Measure,
                 ctx: PrecisionContext = DEFAULT_CONTEXT):
        if len(coeffs) != len(ns):
            raise ValueError("coefficient length mismatch")
        self.ns, self.A2, self.ctx = ns, A2, ctx
        with ctx.local():
            self.support = [i for i, c in enumerate(coeffs) if to_mpc(c) != 0]
            for i in self.support:
                if A2.has_zero(ns.nodes[i]):
                    raise ValueError("coefficient support meets a zero of A2")
            self.weights = {i: to_mpc(coeffs[i]) * mu.sqrt_values[i] for i in self.support}
        self._a2_nodes: dict = {}

    def _a2_at(self, i: int, bits: int) -> mpc:
        key = (i, bits)
        v = self._a2_nodes.get(key)
        if v is None:
            v = self.A2.value(self.ns.nodes[i])
            self._a2_nodes[key] = v
        return v

    def _quotient(self, z: mpc, i: int) -> mpc:
        t = self.ns.nodes[i]
        if z == t:
            a = self.A2.value(t)
            return a * self.A2.logderiv(t)
        bits = current_bits()
        guard = 8
        while True:
            prec = bits + guard
            if prec > self.ctx.max_bits + bits:
                raise PrecisionExhausted("cancellation in the difference quotient exceeds max_bits")
            with gmpy2.context(gmpy2.get_context(), precision=prec):
                zz = mpc(z)
                a_z = self.A2.value(zz)
                a_t = self._a2_at(i, prec)
                diff = a_z - a_t
                scale = max(abs(a_z), abs(a_t))
                lost = float(gmpy2.log2(scale / abs(diff))) if diff != 0 else math.inf
                if lost + 16 <= guard:
                    q = diff / (zz - t)
                    break
            guard = int(min(max(2 * guard, lost + 32), 4 * self.ctx.max_bits))
        return mpc(q)

    def value(self, z) -> mpc:
        z = to_mpc(z)
        s = mpc(0)
        for i in self.support:
            s += self.weights[i] * self._quotient(z, i)
        return s


def split_entire_part(coeffs, ns: NodeSet, A2: EntireFunction, mu: Measure,
                      ctx: PrecisionContext = DEFAULT_CONTEXT) -> SplitPart:
    return SplitPart(coeffs, ns, A2, mu, ctx)


def direct_split_value(coeffs, ns: NodeSet, A2: EntireFunction, mu: Measure, z) -> mpc:
    """A₂(z)·Σ w_n/(z - t_n) - Σ A₂(t_n) w_n/(z - t_n), evaluated naively."""
    z = to_mpc(z)
    s1 = mpc(0)
    s2 = mpc(0)
    for c, m, t in zip(coeffs, mu.sqrt_values, ns.nodes):
        c = to_mpc(c)
        if c == 0:
            continue
        w = c * m / (z - t)
        s1 += w
        s2 += A2.value(t) * w
    return A2.value(z) * s1 - s2


def tilde_measure(mu: Measure, part: NodeSet, indices: Sequence[int], A2: EntireFunction,
                  ctx: PrecisionContext | None = None) -> Measure:
    """μ̃_n = μ_n |A₂(t_n)|² restricted to a node subset."""
    ctx = ctx or _bits_ctx(part.bits)
    with ctx.local():
        vals = [mu.values[i] * gmpy2.norm(A2.value(mu.ns.nodes[i])) for i in indices]
    return explicit_measure(part, vals, label="tilde")


def structured_element(d_coeffs, part: NodeSet, mu_tilde: Measure, A1: EntireFunction,
                       label: str = "structured") -> SpaceElement:
    """F = A₁·Σ d_n μ̃_n^{1/2}/(z - t_n) over the first part of a partition."""
    return make_element(d_coeffs, part, mu_tilde, A1, label)


def lift_structured(d_coeffs, part_indices: Sequence[int], ns: NodeSet, mu: Measure,
                    A: EntireFunction, A2: EntireFunction,
                    ctx: PrecisionContext | None = None) -> list:
    """Coefficients over the whole node set representing a structured element.

    On the first part a_n = d_n |A₂(t_n)|/A₂(t_n); on the zeros s of A₂ the
    coefficient is g(s)/(A₂'(s) μ_s^{1/2}) with g = Σ d_n μ_n^{1/2}|A₂(t_n)|/(z - t_n).
    """
    ctx = ctx or _bits_ctx(ns.bits)
    part = set(part_indices)
    with ctx.local():
        a = [mpc(0)] * len(ns)
        gw = {}
        for d, i in zip(d_coeffs, part_indices):
            v = A2.value(ns.nodes[i])
            a[i] = to_mpc(d) * abs(v) / v
            gw[i] = to_mpc(d) * mu.sqrt_values[i] * abs(v)
        for j, s in enumerate(ns.nodes):
            if j in part:
                continue
            g = sum((w / (s - ns.nodes[i]) for i, w in gw.items()), mpc(0))
            dA2, _ = node_derivative(A2, s, ctx)
            a[j] = g / (dA2 * mu.sqrt_values[j])
    return a
