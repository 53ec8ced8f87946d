"""Node sequences truncated to a disk, their separation constants, and weights."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.spatial import cKDTree

from .kernel import (DEFAULT_CONTEXT, BoundedValue, PrecisionContext, ZerolocError,
                     make_context, parse_number, to_mpc)

FAMILIES = ("geometric", "power", "signed_power", "imaginary_power", "cross_lattice",
            "square_lattice", "shifted_square_lattice", "rotated_cross_lattice",
            "explicit", "union")
MAX_SEPARATION_N = 8


class DerivativeUnderflow(ZerolocError):
    """|A'(t)| is too small to resolve even at the maximal precision."""


@dataclass(frozen=True, eq=False)
class NodeSet:
    """A finite, sorted truncation of a node family.

    ``labels`` names the operand each node came from (for unions) and is the
    key used by piecewise weight rules.
    """

    kind: str
    params: Mapping[str, Any]
    nodes: tuple
    radius: float
    sep_C: float
    sep_N: int
    bits: int
    labels: tuple = ()
    start_modulus: float = 0.0

    def __post_init__(self) -> None:
        if not self.labels:
            object.__setattr__(self, "labels", (self.kind,) * len(self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __getitem__(self, i):
        return self.nodes[i]

    @cached_property
    def array(self) -> np.ndarray:
        """Nodes rounded to complex128, for geometric queries."""
        return np.array([complex(t) for t in self.nodes], dtype=complex)

    @cached_property
    def moduli(self) -> np.ndarray:
        return np.abs(self.array)

    @cached_property
    def tree(self) -> cKDTree:
        a = self.array
        return cKDTree(np.column_stack([a.real, a.imag]) if len(a) else np.zeros((0, 2)))

    @cached_property
    def _index(self) -> dict:
        return {(z.real, z.imag): i for i, z in enumerate(self.array)}

    def index_of(self, t) -> int | None:
        c = complex(t)
        return self._index.get((c.real, c.imag))

    @property
    def part_names(self) -> tuple:
        seen: list = []
        for lab in self.labels:
            if lab not in seen:
                seen.append(lab)
        return tuple(seen)

    def part_indices(self, name) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == name]

    def subset(self, indices: Sequence[int], kind: str = "explicit") -> NodeSet:
        idx = sorted(indices)
        return _build(kind, {"parent": self.kind}, [self.nodes[i] for i in idx], self.radius,
                      self.bits, [self.labels[i] for i in idx], self.start_modulus)

    def nearest(self, z) -> tuple[int, float]:
        """Index of the closest node and its (double precision) distance."""
        c = complex(z)
        d, i = self.tree.query([c.real, c.imag])
        return int(i), float(d)

    def indices_within(self, z, r: float) -> list[int]:
        c = complex(z)
        return sorted(self.tree.query_ball_point([c.real, c.imag], r))

    def in_disk(self, r: float) -> list[int]:
        return [i for i, m in enumerate(self.moduli) if m <= r]

    def to_config(self) -> dict:
        return {"kind": self.kind, **dict(self.params), "radius": self.radius}


def _sort_key(t: mpc) -> tuple:
    return (float(abs(t)), float(gmpy2.phase(t)) if t != 0 else 0.0)


def _build(kind, params, nodes, radius, bits, labels=None, start=0.0) -> NodeSet:
    order = sorted(range(len(nodes)), key=lambda i: _sort_key(nodes[i]))
    nodes = tuple(nodes[i] for i in order)
    labels = tuple(labels[i] for i in order) if labels else ()
    arr = np.array([complex(t) for t in nodes], dtype=complex)
    if len(arr) > 1:
        d, _ = cKDTree(np.column_stack([arr.real, arr.imag])).query(
            np.column_stack([arr.real, arr.imag]), k=2)
        if np.min(d[:, 1]) == 0.0:
            raise ValueError("node set contains coincident nodes")
        C, N = _separation(arr, d[:, 1])
    else:
        C, N = math.inf, 0
    return NodeSet(kind=kind, params=dict(params), nodes=nodes, radius=float(radius),
                   sep_C=C, sep_N=N, bits=bits, labels=labels, start_modulus=float(start))


def _separation(arr: np.ndarray, nn: np.ndarray) -> tuple[float, int]:
    scale = np.maximum(np.abs(arr), 1.0)
    best = None
    for N in range(MAX_SEPARATION_N + 1):
        cmax = float(np.min(nn * scale ** N))
        grid = math.floor(8 * cmax * (1 + 1e-12)) / 8
        if grid >= 0.125:
            return grid, N
        best = cmax
    return best, MAX_SEPARATION_N


def check_power_separation(ns: NodeSet) -> tuple[float, int]:
    """Least N and largest C (on a 1/8 grid) with dist(t_n, T) >= C max(|t_n|,1)^-N.

    The result is also what ``ns.sep_C``/``ns.sep_N`` hold, since node sets
    compute it when they are built.
    """
    if len(ns) < 2:
        raise ValueError("separation needs at least two nodes")
    a = ns.array
    pts = np.column_stack([a.real, a.imag])
    d, _ = cKDTree(pts).query(pts, k=2)
    return _separation(a, d[:, 1])


def _param(params, key, default=None):
    v = params.get(key, default)
    if v is None:
        raise ValueError(f"missing parameter {key!r}")
    return parse_number(v) if isinstance(v, str) else to_mpc(v)


def _real_param(params, key, default=None) -> mpfr:
    v = _param(params, key, default)
    if v.imag != 0:
        raise ValueError(f"parameter {key!r} must be real")
    return v.real


def generate_nodes(kind: str, params: Mapping[str, Any] | None = None, radius: float = 16.0,
                   ctx: PrecisionContext | None = None) -> NodeSet:
    """Every node of the family with modulus at most ``radius``.

    Families and their parameters:

    ``geometric`` (ratio, start=1): ratio**n for n >= start.
    ``power`` (alpha): n**alpha, n >= 1.  ``signed_power``: +-n**alpha.
    ``imaginary_power`` (beta): i*k**beta, k >= 1.
    ``cross_lattice`` (origin=True): Z u iZ.  ``square_lattice``: Z + iZ.
    ``shifted_square_lattice`` (shift=1/2): Z + iZ + shift.
    ``rotated_cross_lattice`` (angle, origin=False): e^{i angle}(Z u iZ).
    ``explicit`` (values): the given points.
    """
    params = dict(params or {})
    ctx = ctx or DEFAULT_CONTEXT
    if kind not in FAMILIES or kind == "union":
        raise ValueError(f"unknown node family {kind!r}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    with ctx.local():
        R = mpfr(radius)
        nodes: list[mpc] = []
        start = 0.0
        if kind == "geometric":
            r = _real_param(params, "ratio")
            if not r > 1:
                raise ValueError("ratio must exceed 1")
            n = int(params.get("start", 1))
            if n < 1:
                raise ValueError("start must be at least 1")
            t = r ** n
            start = float(t)
            while t <= R:
                nodes.append(mpc(t))
                n += 1
                t = r ** n
        elif kind in ("power", "signed_power", "imaginary_power"):
            a = _real_param(params, "beta" if kind == "imaginary_power" else "alpha")
            if not a > 0:
                raise ValueError("exponent must be positive")
            start = 1.0
            n = 1
            t = mpfr(1)
            while t <= R:
                if kind == "power":
                    nodes.append(mpc(t))
                elif kind == "signed_power":
                    nodes += [mpc(t), mpc(-t)]
                else:
                    nodes.append(mpc(0, t))
                n += 1
                t = mpfr(n) ** a
        elif kind in ("cross_lattice", "rotated_cross_lattice"):
            with_origin = bool(params.get("origin", kind == "cross_lattice"))
            rot = mpc(1)
            if kind == "rotated_cross_lattice":
                theta = _real_param(params, "angle")
                rot = mpc(gmpy2.cos(theta), gmpy2.sin(theta))
            if with_origin:
                nodes.append(mpc(0))
            for k in range(1, int(gmpy2.floor(R)) + 1):
                for u in (mpc(k), mpc(-k), mpc(0, k), mpc(0, -k)):
                    nodes.append(u * rot if kind == "rotated_cross_lattice" else u)
        elif kind in ("square_lattice", "shifted_square_lattice"):
            s = _param(params, "shift", "1/2") if kind == "shifted_square_lattice" else mpc(0)
            m = int(gmpy2.floor(R)) + 2
            for x in range(-m, m + 1):
                for y in range(-m, m + 1):
                    t = mpc(x, y) + s
                    if gmpy2.norm(t) <= R * R:
                        nodes.append(t)
        elif kind == "explicit":
            vals = params.get("values")
            if vals is None:
                raise ValueError("explicit node set needs 'values'")
            for v in vals:
                t = parse_number(v) if isinstance(v, str) else to_mpc(_complex_from_json(v))
                if abs(t) > R:
                    raise ValueError(f"explicit node {v!r} lies outside the radius")
                nodes.append(mpc(t))
    return _build(kind, params, nodes, radius, ctx.bits, start=start)


def _complex_from_json(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return v


def union(*parts: NodeSet, names: Sequence[str] | None = None) -> NodeSet:
    """Interleave node sets by modulus, remembering which operand each node came from."""
    if len(parts) < 2:
        raise ValueError("union needs at least two node sets")
    names = list(names) if names else [f"T{i + 1}" for i in range(len(parts))]
    if len(names) != len(parts) or len(set(names)) != len(names):
        raise ValueError("union needs one distinct name per operand")
    nodes, labels = [], []
    for name, p in zip(names, parts):
        nodes += list(p.nodes)
        labels += [name] * len(p)
    params = {"parts": {n: p.to_config() for n, p in zip(names, parts)}}
    return _build("union", params, nodes, max(p.radius for p in parts),
                  max(p.bits for p in parts), labels,
                  min(p.start_modulus for p in parts))


# ---------------------------------------------------------------------------
# weights

RULES = ("derivative_power", "derivative_inverse_power", "stretched_exp", "poly_exp",
         "piecewise", "explicit")


@dataclass(frozen=True)
class MeasureRule:
    """A weight rule.  See :func:`measure_rule` for the accepted dictionaries."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    parts: Mapping[str, "MeasureRule"] = field(default_factory=dict)

    @property
    def needs_derivative(self) -> bool:
        if self.kind == "piecewise":
            return any(p.needs_derivative for p in self.parts.values())
        return self.kind in ("derivative_power", "derivative_inverse_power")

    def to_config(self) -> dict:
        if self.kind == "piecewise":
            return {"rule": "piecewise", "parts": {k: v.to_config() for k, v in self.parts.items()}}
        return {"rule": self.kind, **dict(self.params)}


def measure_rule(spec) -> MeasureRule:
    """Parse ``{"rule": name, ...params}`` (or pass a MeasureRule through).

    ``derivative_power`` N: |t|^{2N}|A'(t)|^{-2}
    ``derivative_inverse_power`` N: |t|^{-N}|A'(t)|^{-2}
    ``stretched_exp`` gamma: exp(-|t|^gamma)
    ``poly_exp`` M, c: |t|^M exp(-c|t|)
    ``piecewise`` parts: {label: rule}
    ``explicit`` values: list of positive numbers
    """
    if isinstance(spec, MeasureRule):
        return spec
    spec = dict(spec)
    kind = spec.pop("rule", None)
    if kind not in RULES:
        raise ValueError(f"unknown measure rule {kind!r}")
    if kind == "piecewise":
        parts = {str(k): measure_rule(v) for k, v in dict(spec.get("parts", {})).items()}
        if not parts:
            raise ValueError("piecewise rule needs parts")
        return MeasureRule("piecewise", {}, parts)
    required = {"derivative_power": ("N",), "derivative_inverse_power": ("N",),
                "stretched_exp": ("gamma",), "poly_exp": ("M", "c"), "explicit": ("values",)}
    for key in required[kind]:
        if key not in spec:
            raise ValueError(f"rule {kind} needs parameter {key!r}")
    if kind == "stretched_exp" and not float(parse_number(spec["gamma"]).real) > 0:
        raise ValueError("gamma must be positive")
    if kind == "poly_exp" and float(parse_number(spec["c"]).real) < 0:
        raise ValueError("c must be nonnegative")
    return MeasureRule(kind, spec)


@dataclass(frozen=True, eq=False)
class Measure:
    """Weights attached to a node set, cached at the node set's precision."""

    rule: MeasureRule
    ns: NodeSet
    values: tuple
    errors: tuple = ()

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i) -> mpfr:
        return self.values[i]

    def bounded(self, i) -> BoundedValue:
        err = self.errors[i] if self.errors else mpfr(0)
        return BoundedValue(mpc(self.values[i]), err, bits=self.ns.bits)

    @cached_property
    def sqrt_values(self) -> tuple:
        with make_context(self.ns.bits).local():
            return tuple(gmpy2.sqrt(v) for v in self.values)

    @cached_property
    def log_values(self) -> np.ndarray:
        """Natural logs of the weights as doubles (weights may underflow doubles)."""
        return np.array([float(gmpy2.log(v)) for v in self.values])

    def weighted_mass(self) -> BoundedValue:
        """Sum of mu_n/(|t_n|^2+1) with a tail estimate from the last two shells."""
        ctx = make_context(self.ns.bits)
        with ctx.local():
            terms = [v / (gmpy2.norm(t) + 1) for v, t in zip(self.values, self.ns.nodes)]
        tail = _shell_tail(self.ns.moduli, terms)
        return BoundedValue(sum_mpfr(terms, ctx), mpfr(tail), bits=ctx.bits)


def sum_mpfr(terms, ctx: PrecisionContext) -> mpc:
    with ctx.local():
        s = mpfr(0)
        for t in terms:
            s += t
        return mpc(s)


def _shell_tail(moduli: np.ndarray, terms) -> float:
    """Extrapolate a remaining tail from dyadic shell sums (inf if not decaying)."""
    if len(terms) == 0:
        return 0.0
    shells: dict[int, float] = {}
    for m, v in zip(moduli, terms):
        k = int(math.floor(math.log2(max(m, 1.0))))
        shells[k] = shells.get(k, 0.0) + float(v)
    keys = sorted(shells)
    if len(keys) < 2:
        return float(shells[keys[-1]])
    last, prev = shells[keys[-1]], shells[keys[-2]]
    if prev <= 0:
        return math.inf if last > 0 else 0.0
    q = last / prev
    return last * q / (1 - q) if q < 1 else math.inf


def _log_scale(t: mpc) -> mpfr:
    """log max(|t|, 1): node 0 has no meaningful |t|^p weight factor."""
    a = abs(t)
    return gmpy2.log(a) if a > 1 else mpfr(0)


def _rule_value(rule: MeasureRule, t: mpc, A, ctx: PrecisionContext):
    p = rule.params
    if rule.kind == "stretched_exp":
        g = parse_number(p["gamma"]).real
        return gmpy2.exp(-(abs(t) ** g)), mpfr(0)
    if rule.kind == "poly_exp":
        M = parse_number(p["M"]).real
        c = parse_number(p["c"]).real
        return gmpy2.exp(M * _log_scale(t) - c * abs(t)), mpfr(0)
    if rule.kind in ("derivative_power", "derivative_inverse_power"):
        if A is None:
            raise ValueError(f"rule {rule.kind} needs an entire function")
        N = parse_number(p["N"]).real
        dA, err = node_derivative(A, t, ctx)
        expo = 2 * N if rule.kind == "derivative_power" else -N
        v = gmpy2.exp(expo * _log_scale(t)) / gmpy2.norm(dA)
        return v, v * 2 * err / abs(dA)
    raise ValueError(f"rule {rule.kind} cannot be evaluated pointwise")


def node_derivative(A, t: mpc, ctx: PrecisionContext):
    """A'(t) at a zero t of A with its error, escalating when it underflows."""
    cur = ctx
    while True:
        with cur.local():
            d = A.divided(t, t)
            if d != 0 and gmpy2.is_finite(d) and float(gmpy2.log2(abs(d))) > -cur.max_bits:
                return d, abs(d) * A.relative_error(t)
        nxt = cur.escalated()
        if nxt is None:
            raise DerivativeUnderflow(f"|A'({complex(t)})| underflows at max precision")
        cur = nxt


def attach_measure(ns: NodeSet, rule, A=None, ctx: PrecisionContext | None = None) -> Measure:
    """Evaluate a weight rule on every node.

    ``A`` is an entire function for derivative-based rules; for piecewise
    rules it may be a mapping from part label to entire function.  Weights
    use max(|t|, 1) wherever |t| appears so that a node at 0 gets a finite,
    positive weight.
    """
    rule = measure_rule(rule)
    ctx = ctx or make_context(ns.bits)
    values, errors = [], []
    with ctx.local():
        if rule.kind == "explicit":
            vals = rule.params["values"]
            if len(vals) != len(ns):
                raise ValueError("explicit weights must match the node count")
            for v in vals:
                v = parse_number(v).real if isinstance(v, str) else mpfr(v)
                values.append(v)
                errors.append(mpfr(0))
        else:
            for t, lab in zip(ns.nodes, ns.labels):
                r, fn = rule, A
                if rule.kind == "piecewise":
                    if lab not in rule.parts:
                        raise ValueError(f"piecewise rule has no part for label {lab!r}")
                    r = rule.parts[lab]
                    if isinstance(A, Mapping):
                        fn = A.get(lab)
                elif isinstance(A, Mapping):
                    raise ValueError("per-part entire functions need a piecewise rule")
                v, e = _rule_value(r, t, fn, ctx)
                values.append(v)
                errors.append(e)
    for v in values:
        if not v > 0:
            raise ValueError("weights must be positive")
    return Measure(rule=rule, ns=ns, values=tuple(values), errors=tuple(errors))


def explicit_measure(ns: NodeSet, values, label: str = "explicit") -> Measure:
    vals = tuple(mpfr(v) if not isinstance(v, mpfr) else v for v in values)
    if len(vals) != len(ns):
        raise ValueError("weights must match the node count")
    if any(not v > 0 for v in vals):
        raise ValueError("weights must be positive")
    return Measure(MeasureRule("explicit", {"source": label}), ns, vals,
                   tuple(mpfr(0) for _ in vals))
