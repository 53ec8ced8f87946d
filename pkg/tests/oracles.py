"""Independent reference computations in plain mpmath.

Nothing here imports zeroloc; each function recomputes a quantity from its
defining formula so tests can compare the package against it.
"""
from __future__ import annotations

import mpmath
from mpmath import mp, mpc, mpf


def sin_cross(z, angle=0, origin=True, dps=60):
    """sin(pi w)·sin(pi i w)/w^p with w = e^{-i angle} z, p = 1 or 2."""
    with mp.workdps(dps):
        w = mpmath.exp(-1j * mpf(angle)) * mpc(z)
        p = 1 if origin else 2
        return mpmath.sin(mp.pi * w) * mpmath.sin(mp.pi * 1j * w) / w ** p


def sin_cross_derivative(z, angle=0, origin=True, dps=60):
    with mp.workdps(dps):
        return mpmath.diff(lambda u: sin_cross(u, angle, origin, dps + 20), mpc(z))


def dyadic_product(z, n_terms=400, dps=60):
    """prod_{n>=1} (1 - z/2^n), truncated where the factors are 1 to working precision."""
    with mp.workdps(dps):
        z = mpc(z)
        v = mpc(1)
        for n in range(1, n_terms + 1):
            v *= 1 - z / mpf(2) ** n
        return v


def power_product(z, alpha, n_terms=200000, dps=30):
    """prod_{n>=1} (1 - z/n^alpha) with the tail bounded by |z|·ζ(alpha, N+1)."""
    with mp.workdps(dps):
        z = mpc(z)
        s = mpc(0)
        for n in range(1, n_terms + 1):
            s += mpmath.log(1 - z / mpf(n) ** alpha)
        tail = -z * mpmath.zeta(alpha, n_terms + 1)
        return mpmath.exp(s + tail)


def sigma_product(z, R=60, dps=40):
    """Weierstrass product for σ over Z + iZ, truncated to |ω| <= R (genus 2)."""
    with mp.workdps(dps):
        z = mpc(z)
        v = z
        for m in range(-R, R + 1):
            for n in range(-R, R + 1):
                if m == 0 and n == 0 or m * m + n * n > R * R:
                    continue
                w = mpc(m, n)
                u = z / w
                v *= (1 - u) * mpmath.exp(u + u * u / 2)
        return v


def poly_from_roots(roots, dps=80):
    """Ascending coefficients of prod (z - r)."""
    with mp.workdps(dps):
        c = [mpc(1)]
        for r in roots:
            r = mpc(r)
            c = [mpc(0)] + c
            for i in range(len(c) - 1):
                c[i] -= r * c[i + 1]
        return c


def polyroots(coeffs, dps=80):
    """Roots of an ascending coefficient list via mpmath's Durand–Kerner with
    extra precision and a cleanup Newton pass."""
    with mp.workdps(dps):
        desc = [mpc(c) for c in reversed(coeffs)]
        return mpmath.polyroots(desc, maxsteps=400, extraprec=4 * dps)


def cauchy_element(z, nodes, weights, A):
    """A(z)·Σ w_n/(z - t_n) with all arguments already mpmath numbers."""
    z = mpc(z)
    return A(z) * sum(w / (z - t) for t, w in zip(nodes, weights))


def legendre_exp(x, beta):
    """(x/β)(log(x/β) - 1), the transform of e^{βt} for x >= β."""
    x, beta = mpf(x), mpf(beta)
    return x / beta * (mpmath.log(x / beta) - 1)
