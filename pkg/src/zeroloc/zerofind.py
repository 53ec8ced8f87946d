"""All zeros of an analytic function in a rectangle, by the argument principle.

The region is subdivided as a quadtree.  Each cell's winding number is the
integral of F'/F over its boundary (adaptive Gauss–Legendre per edge, edges
shared between neighbours are integrated once).  Cells without zeros are
dropped, cells with one zero are polished by Newton's method and certified
by an isolation circle.

Functions whose zeros are expected near known points (the nodes of a space
element) expose them as ``hazards``.  Newton is started from each hazard
first and every certified zero is credited to the cells containing it, so
only the remaining zeros need subdivision.  Split lines are nudged away from
hazards and known zeros.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .kernel import DEFAULT_CONTEXT, PrecisionContext, ZerolocError, to_mpc
from .nodes import NodeSet

MAX_CELLS = 200_000
TWO_PI = 2 * math.pi


class ContourTooClose(ZerolocError):
    """A zero lies too close to the contour for reliable quadrature."""


class NonIntegerWinding(ZerolocError):
    pass


class BudgetExceeded(ZerolocError):
    pass


class DisksOverlap(ZerolocError, ValueError):
    pass


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("degenerate rectangle")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def diam(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def corners(self) -> list[complex]:
        return [complex(self.x0, self.y0), complex(self.x1, self.y0),
                complex(self.x1, self.y1), complex(self.x0, self.y1)]

    def contains(self, z) -> bool:
        c = complex(z)
        return self.x0 <= c.real <= self.x1 and self.y0 <= c.imag <= self.y1

    def strictly_contains(self, z) -> bool:
        c = complex(z)
        return self.x0 < c.real < self.x1 and self.y0 < c.imag < self.y1

    def boundary_distance(self, z) -> float:
        c = complex(z)
        return min(c.real - self.x0, self.x1 - c.real, c.imag - self.y0, self.y1 - c.imag)

    def expanded(self, frac: float) -> Rect:
        dx, dy = self.width * frac / 2, self.height * frac / 2
        return Rect(self.x0 - dx, self.x1 + dx, self.y0 - dy, self.y1 + dy)

    def bounding(self) -> Rect:
        return self

    def to_config(self) -> dict:
        return {"rect": [self.x0, self.x1, self.y0, self.y1]}


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z) -> bool:
        return abs(complex(z) - self.center) <= self.radius

    def bounding(self) -> Rect:
        c, r = self.center, self.radius
        return Rect(c.real - r, c.real + r, c.imag - r, c.imag + r)

    def to_config(self) -> dict:
        return {"disk": [self.center.real, self.center.imag, self.radius]}


def region_from_config(spec) -> Rect | Disk:
    if isinstance(spec, (Rect, Disk)):
        return spec
    spec = dict(spec)
    if "rect" in spec:
        x0, x1, y0, y1 = (float(v) for v in spec["rect"])
        return Rect(x0, x1, y0, y1)
    if "disk" in spec:
        d = spec["disk"]
        if isinstance(d, (int, float)):
            return Disk(0j, float(d))
        if len(d) == 1:
            return Disk(0j, float(d[0]))
        return Disk(complex(float(d[0]), float(d[1])), float(d[2]))
    raise ValueError("region needs 'rect' or 'disk'")


# ---------------------------------------------------------------------------
# evaluables


class CallableEvaluable:
    """Wraps a plain function; F'/F by central differences at step 2^{-bits/4}."""

    hazards: tuple = ()

    def __init__(self, fn: Callable, dfn: Callable | None = None):
        self.fn, self.dfn = fn, dfn

    def value(self, z):
        return to_mpc(self.fn(z))

    def logderiv(self, z):
        v = self.value(z)
        if self.dfn is not None:
            return to_mpc(self.dfn(z)) / v
        h = gmpy2.mul_2exp(mpfr(1), -(gmpy2.get_context().precision // 4))
        return (self.value(z + h) - self.value(z - h)) / (2 * h * v)


def as_evaluable(F):
    if hasattr(F, "value") and hasattr(F, "logderiv"):
        return F
    if callable(F):
        return CallableEvaluable(F)
    raise TypeError("object cannot be evaluated")


def _value_logderiv(F, z):
    if hasattr(F, "value_logderiv"):
        return F.value_logderiv(z)
    v = F.value(z)
    if v == 0:
        return v, mpc("inf")
    return v, F.logderiv(z)


# ---------------------------------------------------------------------------
# contour integrals


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _integrand(F, z: complex, ctx: PrecisionContext) -> complex:
    with ctx.local():
        L = F.logderiv(mpc(z))
    c = complex(L)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ContourTooClose(f"F vanishes on the contour near {z}")
    return c


class _EdgeIntegrator:
    """Adaptive Gauss–Legendre for ∫ F'/F dz along segments, with caching."""

    def __init__(self, F, ctx: PrecisionContext, tol: float = 0.02, max_depth: int = 24):
        self.F, self.ctx = F, ctx
        self.tol, self.max_depth = tol, max_depth
        self.cache: dict = {}
        self.evaluations = 0

    def _gl(self, a: complex, b: complex, n: int) -> tuple[complex, float]:
        x, w = _gauss_legendre(n)
        half = (b - a) / 2
        mid = (a + b) / 2
        s = 0j
        dmin = math.inf
        for xi, wi in zip(x, w):
            L = _integrand(self.F, mid + half * xi, self.ctx)
            self.evaluations += 1
            s += wi * L
            aL = abs(L)
            if aL > 0:
                dmin = min(dmin, 1 / aL)
        return s * half, dmin

    def _segment(self, a: complex, b: complex, depth: int, tol: float, full: float) -> complex:
        """Integral over [a, b]; accepted once the 32- and 64-point rules agree
        and the nearest zero (estimated by 1/|F'/F|) is at least two node
        spacings away.  Otherwise bisect, which concentrates points near
        zeros close to the contour."""
        length = abs(b - a)
        lo, d1 = self._gl(a, b, 32)
        hi, d2 = self._gl(a, b, 64)
        dmin = min(d1, d2)
        if dmin < full * 2.0 ** -14:
            raise ContourTooClose(f"zero too close to segment {a}..{b}")
        if abs(hi - lo) / TWO_PI < tol and dmin >= length / 32:
            return hi
        if depth >= self.max_depth:
            raise ContourTooClose(f"quadrature failed on segment {a}..{b}")
        m = (a + b) / 2
        return (self._segment(a, m, depth + 1, tol / 2, full)
                + self._segment(m, b, depth + 1, tol / 2, full))

    def edge(self, a: complex, b: complex) -> complex:
        key = (a, b)
        if key in self.cache:
            return self.cache[key]
        if (b, a) in self.cache:
            return -self.cache[(b, a)]
        v = self._segment(a, b, 0, self.tol, abs(b - a))
        self.cache[key] = v
        return v

    def rect(self, r: Rect) -> complex:
        c = r.corners()
        return sum((self.edge(c[i], c[(i + 1) % 4]) for i in range(4)), 0j)


def _to_integer(total: complex, what: str) -> int:
    w = total / (2j * math.pi)
    n = round(w.real)
    if abs(w - n) > 0.25:
        raise NonIntegerWinding(f"{what}: winding {w:.4f} is not near an integer")
    return int(n)


def circle_winding(F, center, radius: float, ctx: PrecisionContext = DEFAULT_CONTEXT,
                   start: int = 16, max_points: int = 2048) -> int:
    """Winding number of F around a circle by the trapezoid rule (doubling points)."""
    F = as_evaluable(F)
    c = complex(center)
    with ctx.local():
        cm = to_mpc(center)

        def total(n):
            s = 0j
            for j in range(n):
                e = complex(math.cos(TWO_PI * j / n), math.sin(TWO_PI * j / n))
                L = complex(F.logderiv(cm + to_mpc(radius * e)))
                if not (math.isfinite(L.real) and math.isfinite(L.imag)):
                    raise ContourTooClose(f"F vanishes on the circle around {c}")
                s += L * e
            return s * 1j * radius * TWO_PI / n

        n = start
        prev = total(n)
        while n < max_points:
            n *= 2
            cur = total(n)
            if abs(cur - prev) / TWO_PI < 0.1:
                return _to_integer(cur, "circle")
            prev = cur
    raise NonIntegerWinding("circle quadrature did not converge")


def winding_number(F, contour, ctx: PrecisionContext = DEFAULT_CONTEXT) -> int:
    """Number of zeros (with multiplicity) of F inside a Rect or Disk contour."""
    F = as_evaluable(F)
    if isinstance(contour, Disk):
        return circle_winding(F, contour.center, contour.radius, ctx)
    contour = region_from_config(contour) if not isinstance(contour, Rect) else contour
    return _to_integer(_EdgeIntegrator(F, ctx).rect(contour), "rectangle")


# ---------------------------------------------------------------------------
# Newton and certification


@dataclass
class ZeroRecord:
    location: mpc
    multiplicity: int
    residual: float
    isolation_radius: float
    polished: bool = True

    @property
    def z(self) -> complex:
        return complex(self.location)


def newton(F, z0, ctx: PrecisionContext, max_iter: int = 80, center=None,
           radius: float | None = None) -> mpc | None:
    """Newton iteration z ← z - F/F'; None when it leaves the allowed disk or stalls."""
    with ctx.local():
        z = mpc(to_mpc(z0))
        c = to_mpc(center) if center is not None else None
        prev = None
        for _ in range(max_iter):
            v, L = _value_logderiv(F, z)
            if v == 0 or not gmpy2.is_finite(L):
                return z
            if L == 0:
                return None
            step = 1 / L
            z = z - step
            if c is not None and radius is not None and abs(z - c) > radius:
                return None
            a = abs(step)
            scale = max(abs(z), mpfr(1))
            if a <= scale * gmpy2.mul_2exp(mpfr(1), 16 - ctx.bits):
                return z
            if prev is not None and a >= prev and a <= scale * gmpy2.mul_2exp(mpfr(1), -ctx.bits // 2):
                return z
            prev = a
    return None


def _certify(F, z: mpc, r: float, ctx: PrecisionContext, expected: int = 1) -> float | None:
    """Shrink r until the circle around z winds exactly ``expected`` times."""
    for _ in range(5):
        try:
            w = circle_winding(F, z, r, ctx)
        except (ContourTooClose, NonIntegerWinding):
            w = None
        if w == expected:
            return r
        r /= 8
    return None


def _residual(F, z: mpc, ctx: PrecisionContext) -> float:
    with ctx.local():
        return float(abs(F.value(z)))


# ---------------------------------------------------------------------------
# quadtree scan


@dataclass
class ScanResult:
    zeros: list
    rect: Rect
    winding: int
    cells: int
    evaluations: int
    seeded: int


def _point_segment_distance(p: np.ndarray, a: complex, b: complex) -> float:
    if len(p) == 0:
        return math.inf
    ab = b - a
    t = np.clip(((p - a) * np.conj(ab)).real / abs(ab) ** 2, 0, 1)
    return float(np.min(np.abs(p - (a + t * ab))))


def _choose_split(lo: float, hi: float, pts: np.ndarray, axis: str, other: tuple[float, float]
                  ) -> float:
    """A split coordinate near the middle that keeps clear of ``pts``."""
    w = hi - lo
    mid = (lo + hi) / 2
    best, best_score = mid, -1.0
    for k in [0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5, 6, -6, 7, -7]:
        c = mid + k * w / 28
        if axis == "x":
            a, b = complex(c, other[0]), complex(c, other[1])
        else:
            a, b = complex(other[0], c), complex(other[1], c)
        score = _point_segment_distance(pts, a, b)
        if score >= w / 32:
            return c
        if score > best_score:
            best, best_score = c, score
    return best


def _adjust_region(rect: Rect, hazards: np.ndarray) -> Rect:
    """Grow the rectangle by up to 10% so its boundary keeps clear of hazards."""
    if len(hazards) == 0:
        return rect
    margin = min(rect.width, rect.height) / 64
    best, best_d = rect, -1.0
    for k in range(0, 11):
        r = rect.expanded(k / 100)
        d = min(_point_segment_distance(hazards, *e) for e in
                zip(r.corners(), r.corners()[1:] + r.corners()[:1]))
        if d >= margin:
            return r
        if d > best_d:
            best, best_d = r, d
    return best


def _known_inside(known: list[ZeroRecord], r: Rect) -> int:
    return sum(z.multiplicity for z in known if r.strictly_contains(z.z))


def scan_region(F, region, ctx: PrecisionContext = DEFAULT_CONTEXT, max_cells: int = MAX_CELLS,
                min_size_rel: float = 2.0 ** -40, seeds: Iterable | None = None) -> ScanResult:
    """Find every zero in ``region`` (a Rect, or a Disk via its bounding square)."""
    F = as_evaluable(F)
    rect = region_from_config(region).bounding()
    if min(rect.width, rect.height) < 2.0 ** -20:
        raise ValueError("region is too small")
    hz = list(seeds) if seeds is not None else list(getattr(F, "hazards", ()) or ())
    hz_c = np.array([complex(h) for h in hz]) if hz else np.zeros(0, dtype=complex)
    rect = _adjust_region(rect, hz_c)
    if len(hz_c):
        inside = [i for i, h in enumerate(hz_c) if rect.contains(h)]
        hz = [hz[i] for i in inside]
        hz_c = hz_c[inside]
    integ = _EdgeIntegrator(F, ctx)
    total = _to_integer(integ.rect(rect), "region")

    known: list[ZeroRecord] = []
    known_c: list[complex] = []

    def add(z: mpc, mult: int, r: float, polished: bool = True) -> None:
        known.append(ZeroRecord(z, mult, _residual(F, z, ctx), r, polished))
        known_c.append(complex(z))

    def is_known(z: complex) -> bool:
        return any(abs(z - k.z) < k.isolation_radius for k in known)

    # seeded Newton from hazards
    seeded = 0
    if len(hz_c) > 1:
        from scipy.spatial import cKDTree
        tree = cKDTree(np.column_stack([hz_c.real, hz_c.imag]))
        spacing = tree.query(np.column_stack([hz_c.real, hz_c.imag]), k=2)[0][:, 1]
    else:
        spacing = np.full(len(hz_c), rect.diam)
    for h, hc, sp in zip(hz, hz_c, spacing):
        rho = min(float(sp) / 2, rect.diam / 4)
        z = newton(F, h, ctx, center=h, radius=rho)
        if z is None:
            continue
        zc = complex(z)
        if not rect.strictly_contains(zc) or rect.boundary_distance(zc) < rho / 4 or is_known(zc):
            continue
        r = _certify(F, z, rho / 2, ctx)
        if r is None:
            continue
        add(z, 1, r)
        seeded += 1
    if sum(k.multiplicity for k in known) > total:
        raise NonIntegerWinding("seeded zeros exceed the region winding")

    cells = 1
    min_size = rect.diam * min_size_rel
    stack: list[tuple[Rect, int]] = [(rect, total)]
    while stack:
        cell, w = stack.pop()
        k = _known_inside(known, cell)
        surplus = w - k
        if surplus == 0:
            continue
        if surplus < 0:
            raise NonIntegerWinding(f"cell {cell} winds {w} but holds {k} known zeros")
        if k == 0 and surplus == 1:
            c = cell.center
            z = newton(F, c, ctx, center=c, radius=cell.diam)
            if z is not None and cell.expanded(0.02).contains(complex(z)) and not is_known(complex(z)):
                r = _certify(F, z, max(cell.diam / 2, 1e-300), ctx)
                if r is not None:
                    add(z, 1, r)
                    if _known_inside(known, cell) == w:
                        continue
        if max(cell.width, cell.height) < min_size:
            add(to_mpc(cell.center), surplus, cell.diam, polished=False)
            continue
        pts = np.array(list(hz_c) + known_c, dtype=complex)
        children = None
        for attempt in range(5):
            xs = _choose_split(cell.x0, cell.x1, pts, "x", (cell.y0, cell.y1))
            ys = _choose_split(cell.y0, cell.y1, pts, "y", (cell.x0, cell.x1))
            if attempt:
                xs += (attempt % 2 * 2 - 1) * cell.width / 7 * ((attempt + 1) // 2) / 2
                ys += (attempt % 2 * 2 - 1) * cell.height / 7 * ((attempt + 1) // 2) / 2
            if cell.width > 2 * cell.height:
                kids = [Rect(cell.x0, xs, cell.y0, cell.y1), Rect(xs, cell.x1, cell.y0, cell.y1)]
            elif cell.height > 2 * cell.width:
                kids = [Rect(cell.x0, cell.x1, cell.y0, ys), Rect(cell.x0, cell.x1, ys, cell.y1)]
            else:
                kids = [Rect(cell.x0, xs, cell.y0, ys), Rect(xs, cell.x1, cell.y0, ys),
                        Rect(cell.x0, xs, ys, cell.y1), Rect(xs, cell.x1, ys, cell.y1)]
            try:
                ws = [_to_integer(integ.rect(kid), "cell") for kid in kids]
            except ContourTooClose:
                continue
            if sum(ws) != w:
                raise NonIntegerWinding(f"child windings {ws} do not sum to {w}")
            children = list(zip(kids, ws))
            break
        if children is None:
            raise ContourTooClose(f"could not split cell {cell} away from zeros")
        cells += len(children)
        if cells > max_cells:
            raise BudgetExceeded(f"more than {max_cells} cells")
        for kid, kw in reversed(children):
            if kw:
                stack.append((kid, kw))

    if sum(z.multiplicity for z in known) != total:
        raise NonIntegerWinding("zero count does not match the region winding")
    known.sort(key=lambda r: (r.z.real, r.z.imag))
    return ScanResult(known, rect, total, cells, integ.evaluations, seeded)


def find_zeros(F, region, ctx: PrecisionContext = DEFAULT_CONTEXT, max_cells: int = MAX_CELLS
               ) -> list[ZeroRecord]:
    return scan_region(F, region, ctx, max_cells=max_cells).zeros


# ---------------------------------------------------------------------------
# classification against localization disks


def disk_radii(ns: NodeSet, M: float) -> np.ndarray:
    """(|t|+1)^{-M}, capped at 0.45·C·max(|t|,1)^{-N} so disks never touch."""
    m = ns.moduli
    r = (m + 1.0) ** (-float(M))
    if math.isfinite(ns.sep_C):
        r = np.minimum(r, 0.45 * ns.sep_C * np.maximum(m, 1.0) ** (-float(ns.sep_N)))
    return r


def default_M(ns: NodeSet) -> float:
    return float(ns.sep_N + 2)


def default_budget(n_nodes: int) -> float:
    return 0.1 * math.sqrt(n_nodes) + 5


@dataclass
class LocalizationReport:
    zeros: list
    node_status: dict
    strays: list
    M: float
    region: Any
    attraction_set: frozenset
    exceptional_count: int
    radii: dict
    assignment: list  # per zero: node index or "stray"
    dropped: int = 0
    ns: NodeSet | None = field(default=None, repr=False)

    @property
    def region_nodes(self) -> list[int]:
        return sorted(self.node_status)

    def status_counts(self) -> dict:
        out = {"empty": 0, "one_zero": 0, "multiple_zeros": 0}
        for s in self.node_status.values():
            out[s[0]] += 1
        return out

    def to_dict(self) -> dict:
        return {"M": self.M, "region": self.region.to_config(),
                "zeros": len(self.zeros), "strays": len(self.strays), "dropped": self.dropped,
                "exceptional_count": self.exceptional_count,
                "attraction_set": sorted(self.attraction_set),
                "status_counts": self.status_counts()}


def classify_zeros(zeros: Sequence[ZeroRecord], ns: NodeSet, M: float | None = None,
                   region=None) -> LocalizationReport:
    """Assign each zero to the node disk containing it, or call it a stray.

    Only nodes inside ``region`` get a status.  Zeros outside the region that
    are not inside a region node's disk are dropped (and counted).
    """
    M = default_M(ns) if M is None else float(M)
    region = region_from_config(region) if region is not None else Disk(0j, ns.radius)
    radii = disk_radii(ns, M)
    if len(ns) > 1:
        pairs = ns.tree.query_pairs(2 * float(np.max(radii)) + 1e-12)
        for i, j in pairs:
            if radii[i] + radii[j] >= abs(ns.array[i] - ns.array[j]):
                raise DisksOverlap(f"disks overlap at this M (nodes {i}, {j})")
    region_nodes = [i for i in range(len(ns)) if region.contains(ns.array[i])]
    in_region = set(region_nodes)
    members: dict[int, list[int]] = {i: [] for i in region_nodes}
    kept, strays, assignment = [], [], []
    dropped = 0
    for zr in zeros:
        zc = zr.z
        owner = None
        if len(ns):
            i, d = ns.nearest(zc)
            if d < 2 * radii[i] + 1e-300:
                if abs(zr.location - ns.nodes[i]) < radii[i]:
                    owner = i
        if owner is not None and owner in in_region:
            members[owner].append(len(kept))
            assignment.append(owner)
            kept.append(zr)
        elif owner is None and region.contains(zc):
            strays.append(len(kept))
            assignment.append("stray")
            kept.append(zr)
        else:
            dropped += 1
    status = {}
    multi = 0
    for i in region_nodes:
        idx = members[i]
        count = sum(kept[j].multiplicity for j in idx)
        if count == 0:
            status[i] = ("empty",)
        elif count == 1:
            status[i] = ("one_zero", idx[0])
        else:
            status[i] = ("multiple_zeros", list(idx))
            multi += 1
    attraction = frozenset(i for i, s in status.items() if s[0] != "empty")
    return LocalizationReport(kept, status, strays, M, region, attraction, len(strays) + multi,
                              {i: float(radii[i]) for i in region_nodes}, assignment, dropped, ns)


@dataclass(frozen=True)
class Comparison:
    relation: str  # "equal", "subset", "superset" or "incomparable"
    k12: int
    k21: int
    budget: float

    def __str__(self) -> str:
        if self.relation == "equal":
            return "S1 = S2 up to 0 exceptions"
        if self.relation == "subset":
            return f"S1 ⊆ S2 up to {self.k12} exceptions"
        if self.relation == "superset":
            return f"S2 ⊆ S1 up to {self.k21} exceptions"
        return f"incomparable({self.k12}, {self.k21})"

    @property
    def comparable(self) -> bool:
        return self.relation != "incomparable"


def compare_attraction_sets(S1: Iterable[int], S2: Iterable[int], budget: float | None = None
                            ) -> Comparison:
    a, b = set(S1), set(S2)
    k12, k21 = len(a - b), len(b - a)
    if budget is None:
        budget = default_budget(len(a | b))
    if k12 == 0 and k21 == 0:
        return Comparison("equal", 0, 0, budget)
    if min(k12, k21) > budget:
        return Comparison("incomparable", k12, k21, budget)
    return Comparison("subset" if k12 <= k21 else "superset", k12, k21, budget)


@dataclass
class ModulusProfile:
    edges: list
    minima: list
    probes: list

    def to_dict(self) -> dict:
        return {"edges": self.edges, "minima": self.minima, "probes": self.probes}


def min_modulus_profile(F, A, ns: NodeSet, K: float, M: float, region,
                        ctx: PrecisionContext = DEFAULT_CONTEXT, annuli: int = 8,
                        circles: int = 3, per_circle: int = 32) -> ModulusProfile:
    """min |F/A|·(|z|+1)^M over probe circles in each annulus, off the node disks."""
    F = as_evaluable(F)
    region = region_from_config(region)
    R = region.radius if isinstance(region, Disk) else min(region.width, region.height) / 2
    c0 = region.center
    edges = list(np.linspace(0, R, annuli + 1))
    rk = (ns.moduli + 1.0) ** (-float(K))
    minima, probes = [], []
    with ctx.local():
        for a, b in zip(edges, edges[1:]):
            best, count = math.inf, 0
            for ci in range(circles):
                r = a + (b - a) * (ci + 0.5) / circles
                for j in range(per_circle):
                    th = TWO_PI * (j + 0.5 * ci / circles) / per_circle
                    z = c0 + r * complex(math.cos(th), math.sin(th))
                    if len(ns):
                        i, d = ns.nearest(z)
                        if d <= rk[i]:
                            continue
                    zz = to_mpc(z)
                    av = A.value(zz)
                    if av == 0:
                        continue
                    v = float(abs(F.value(zz) / av)) * (abs(z) + 1) ** M
                    best = min(best, v)
                    count += 1
            minima.append(best)
            probes.append(count)
    return ModulusProfile([float(e) for e in edges], minima, probes)


# ---------------------------------------------------------------------------
# export

CSV_COLUMNS = ["re", "im", "multiplicity", "residual", "nearest_node", "dist_to_node", "assigned"]


def _fmt(x: mpfr, digits: int) -> str:
    """Scientific notation with ``digits`` digits after the point."""
    if x == 0:
        return "0"
    m, e, _ = x.digits(10, digits + 1)
    sign = "-" if m.startswith("-") else ""
    m = m.lstrip("-")
    return f"{sign}{m[0]}.{m[1:]}e{e - 1:+d}"


def zeros_csv(zeros: Sequence[ZeroRecord], ns: NodeSet | None = None,
              assignment: Sequence | None = None, digits: int | None = None) -> str:
    """CSV text with the fixed columns; numbers in full working precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for j, zr in enumerate(zeros):
        loc = zr.location
        dg = digits or max(17, int(loc.real.precision * 0.30103))
        if ns is not None and len(ns):
            i, _ = ns.nearest(zr.z)
            dist = _fmt(abs(loc - ns.nodes[i]), 6)
            near = str(i)
        else:
            near, dist = "", ""
        assigned = "" if assignment is None else str(assignment[j])
        w.writerow([_fmt(loc.real, dg), _fmt(loc.imag, dg), zr.multiplicity,
                    f"{zr.residual:.6e}", near, dist, assigned])
    return buf.getvalue()


def report_csv(report: LocalizationReport, digits: int | None = None) -> str:
    return zeros_csv(report.zeros, report.ns, report.assignment, digits)
