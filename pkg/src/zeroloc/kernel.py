"""Working precision, bounded values and exact summation.

Everything numeric in the package runs on gmpy2 (MPFR/MPC).  A
:class:`PrecisionContext` fixes the number of bits; ``ctx.local()`` makes it
the active gmpy2 context for a block of code.
"""
from __future__ import annotations

import ast
import math
import operator
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Iterator

import gmpy2
from gmpy2 import mpc, mpfr

MIN_BITS = 64
BITS_CEILING = 16384


class ZerolocError(Exception):
    """Base class for numerical failures raised by this package."""


class InsufficientPrecision(ZerolocError, ValueError):
    pass


class PrecisionExhausted(ZerolocError):
    """Raised when escalation reached ``max_bits`` without meeting tolerance."""


@dataclass(frozen=True)
class PrecisionContext:
    bits: int
    target_tol: float
    max_bits: int

    def __post_init__(self) -> None:
        if self.bits < MIN_BITS:
            raise InsufficientPrecision(f"insufficient precision: {self.bits} bits < {MIN_BITS}")
        if self.max_bits < self.bits:
            raise ValueError("max_bits must be at least bits")
        if not self.target_tol > 0:
            raise ValueError("target_tol must be positive")

    @contextmanager
    def local(self, extra_bits: int = 0) -> Iterator[None]:
        """Run a block with gmpy2 precision set to ``bits + extra_bits``."""
        with gmpy2.context(gmpy2.get_context(), precision=self.bits + extra_bits,
                           real_prec=self.bits + extra_bits, imag_prec=self.bits + extra_bits,
                           emin=-(1 << 30), emax=1 << 30):
            yield

    @property
    def eps(self) -> mpfr:
        return gmpy2.mul_2exp(mpfr(1), -self.bits)

    def escalated(self, factor: int = 2) -> PrecisionContext | None:
        """Context with ``factor`` times the bits, or None past ``max_bits``."""
        new_bits = self.bits * factor
        if new_bits > self.max_bits:
            return None
        return replace(self, bits=new_bits)

    def with_bits(self, bits: int) -> PrecisionContext:
        return make_context(bits, self.target_tol)


def make_context(bits: int = 512, target_tol: float = 1e-40) -> PrecisionContext:
    if bits < MIN_BITS:
        raise InsufficientPrecision(f"insufficient precision: {bits} bits < {MIN_BITS}")
    return PrecisionContext(bits=int(bits), target_tol=float(target_tol),
                            max_bits=max(min(16 * bits, BITS_CEILING), int(bits)))


DEFAULT_CONTEXT = make_context(512, 1e-40)


@dataclass(frozen=True)
class BoundedValue:
    """A value with an absolute error bound.

    ``rigorous`` is only set when the bound comes from an explicit tail
    formula plus rounding analysis; otherwise the bound is a heuristic.
    """

    value: mpc
    abs_error: mpfr
    rigorous: bool = False
    converged: bool = True
    bits: int = field(default=0, compare=False)

    def __complex__(self) -> complex:
        return complex(self.value)

    @property
    def real(self) -> mpfr:
        return self.value.real

    @property
    def imag(self) -> mpfr:
        return self.value.imag

    def __abs__(self) -> mpfr:
        return abs(self.value)

    def contains(self, other, slack: float = 0.0) -> bool:
        """True when ``other`` lies within ``abs_error (+ slack)`` of the value."""
        return abs(self.value - to_mpc(other)) <= self.abs_error + slack


def to_mpc(x) -> mpc:
    """Convert numbers (including numpy scalars and BoundedValue) to mpc.

    Floats and ints convert exactly; existing mpfr/mpc values keep their
    precision.
    """
    if isinstance(x, BoundedValue):
        return x.value
    if isinstance(x, mpc):
        return x
    if isinstance(x, mpfr):
        return mpc(x, 0)
    if isinstance(x, (int, type(gmpy2.mpz(0)))):
        return mpc(mpfr(x, max(64, int(abs(x)).bit_length() + 1)), 0)
    if isinstance(x, str):
        return mpc(parse_number(x))
    c = complex(x)
    return mpc(mpfr(c.real, 53), mpfr(c.imag, 53))


def to_mpfr(x) -> mpfr:
    if isinstance(x, mpfr):
        return x
    if isinstance(x, str):
        return parse_number(x).real
    if isinstance(x, int):
        return mpfr(x)
    return mpfr(float(x))


def _split_exact(x: mpfr) -> tuple[int, int] | None:
    if x == 0:
        return None
    m, e = x.as_mantissa_exp()
    return int(m), int(e)


def _exact_total(parts: list[tuple[int, int]]) -> mpfr:
    """Round the exact sum of ``m * 2**e`` terms once, at the active precision."""
    if not parts:
        return mpfr(0)
    emin = min(e for _, e in parts)
    total = 0
    for m, e in parts:
        total += m << (e - emin)
    return gmpy2.mul_2exp(mpfr(total), emin)


def compensated_sum(terms: Iterable, tail_bound=0, ctx: PrecisionContext = DEFAULT_CONTEXT
                    ) -> BoundedValue:
    """Sum ``terms`` exactly and round once at ``ctx.bits``.

    The real and imaginary parts are accumulated as integers after aligning
    binary exponents, so the only error is the final rounding.  If that
    rounding error exceeds ``target_tol`` the rounding is repeated at doubled
    precision up to ``max_bits``.
    """
    re_parts: list[tuple[int, int]] = []
    im_parts: list[tuple[int, int]] = []
    finite = True
    for t in terms:
        t = to_mpc(t)
        if not gmpy2.is_finite(t):
            finite = False
            break
        r = _split_exact(t.real)
        if r:
            re_parts.append(r)
        i = _split_exact(t.imag)
        if i:
            im_parts.append(i)
    tail = mpfr(tail_bound)
    if not finite:
        return BoundedValue(mpc("nan"), mpfr("inf"), converged=False, bits=ctx.bits)
    cur = ctx
    while True:
        with cur.local():
            value = mpc(_exact_total(re_parts), _exact_total(im_parts))
            rounding = gmpy2.mul_2exp(abs(value), 1 - cur.bits)
            err = rounding + tail
        if rounding <= ctx.target_tol:
            break
        nxt = cur.escalated()
        if nxt is None:
            break
        cur = nxt
    converged = bool(gmpy2.is_finite(value)) and rounding <= ctx.target_tol
    return BoundedValue(value, err, rigorous=True, converged=converged, bits=cur.bits)


@lru_cache(maxsize=64)
def const_pi(bits: int) -> mpfr:
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return gmpy2.const_pi()


def pi_here() -> mpfr:
    """pi at the active gmpy2 precision."""
    return const_pi(gmpy2.get_context().precision)


def current_bits() -> int:
    return gmpy2.get_context().precision


def tiny_here() -> mpfr:
    return gmpy2.mul_2exp(mpfr(1), -current_bits())


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": gmpy2.sqrt, "exp": gmpy2.exp, "log": gmpy2.log,
          "sin": gmpy2.sin, "cos": gmpy2.cos}


def parse_number(expr) -> mpc:
    """Evaluate a small arithmetic expression such as ``"(2*sqrt(2)+2)*pi"``.

    Supports numbers, ``pi``, ``e``, ``i``/``j``, + - * / ** and a few
    functions, at the active precision.  Anything else is rejected.
    """
    if not isinstance(expr, str):
        return to_mpc(expr)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            v = node.value
            if isinstance(v, complex):
                return mpc(mpfr(v.real), mpfr(v.imag))
            if isinstance(v, float):
                # reparse the literal so "0.1" means 1/10 at full precision
                return mpc(mpfr(repr(v)))
            return mpc(v)
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return mpc(gmpy2.const_pi())
            if node.id == "e":
                return mpc(gmpy2.exp(mpfr(1)))
            if node.id in ("i", "j"):
                return mpc(0, 1)
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            arg = ev(node.args[0])
            if arg.imag == 0:
                return mpc(_FUNCS[node.func.id](arg.real))
            return _FUNCS[node.func.id](arg)
        raise ValueError(f"unsupported expression: {ast.dump(node)}")

    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {expr!r}") from exc
    return ev(tree)


def as_float(x) -> float:
    """Nearest double; huge/tiny values saturate instead of raising."""
    if isinstance(x, (mpfr, mpc)):
        if isinstance(x, mpc):
            x = abs(x)
        return float(x)
    return float(x)


def log2_abs(x) -> float:
    """log2|x| without overflow, -inf for zero."""
    a = abs(to_mpc(x))
    if a == 0:
        return -math.inf
    return float(gmpy2.log2(a))
