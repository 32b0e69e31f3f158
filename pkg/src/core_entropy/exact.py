"""Exact integer linear algebra used as an independent check on float routes."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Gaussian elimination."""
    a = [[int(x) for x in row] for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact by Sylvester's identity
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def charpoly(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Coefficients of det(x I - A), lowest degree first.

    Evaluates the determinant at x = 0..n with Bareiss and interpolates in
    the Newton basis; all intermediate values stay exact.
    """
    a = np.asarray(matrix, dtype=object)
    n = a.shape[0]
    values = []
    for x in range(n + 1):
        m = [[(x if i == j else 0) - int(a[i][j]) for j in range(n)] for i in range(n)]
        values.append(Fraction(bareiss_det(m)))
    # divided differences on nodes 0..n
    coef = list(values)
    for level in range(1, n + 1):
        for i in range(n, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / level
    # expand Newton form sum coef[k] * prod_{m<k} (x - m)
    poly = [Fraction(0)] * (n + 1)
    basis = [Fraction(1)]
    for k in range(n + 1):
        for d, b in enumerate(basis):
            poly[d] += coef[k] * b
        nxt = [Fraction(0)] * (len(basis) + 1)
        for d, b in enumerate(basis):
            nxt[d + 1] += b
            nxt[d] -= k * b
        basis = nxt
    out = []
    for c in poly:
        if c.denominator != 1:
            raise ArithmeticError("characteristic polynomial is not integral")
        out.append(int(c))
    return out


def det_one_minus_tA(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Coefficients of det(I - t A), lowest degree first: the reversed charpoly."""
    return list(reversed(charpoly(matrix)))


def poly_eval(coeffs: Sequence[int | Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def largest_real_root(coeffs: Sequence[int], tol: Fraction = Fraction(1, 10**15)) -> Fraction | None:
    """Largest real root of an integer polynomial, refined by exact bisection.

    Candidates come from numpy; each is confirmed by an exact sign change, so
    a returned value always brackets a genuine root to within ``tol``.
    """
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    if len(c) <= 1:
        return None
    # a root of even multiplicity has no sign change; strip repeated factors
    c = squarefree_part(c)
    roots = np.roots([float(x) for x in reversed(c)])
    reals = sorted((r.real for r in roots if abs(r.imag) <= 1e-6 * max(1.0, abs(r))), reverse=True)
    for r in reals:
        found = _bracket(c, r, tol)
        if found is not None:
            return found
    return None


def _poly_divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    num = list(num)
    quot = [Fraction(0)] * max(1, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        shift = len(num) - len(den)
        factor = num[-1] / den[-1]
        quot[shift] = factor
        for k, d in enumerate(den):
            num[k + shift] -= factor * d
        num.pop()
        while num and num[-1] == 0:
            num.pop()
    return quot, num


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    return a


def squarefree_part(coeffs: Sequence[int]) -> list[int]:
    """p / gcd(p, p'), scaled back to primitive integer coefficients."""
    p = [Fraction(x) for x in coeffs]
    dp = [k * p[k] for k in range(1, len(p))]
    while dp and dp[-1] == 0:
        dp.pop()
    if not dp:
        return [int(x) for x in coeffs]
    g = _poly_gcd(p, dp)
    if len(g) <= 1:
        return [int(x) for x in coeffs]
    q, r = _poly_divmod(p, g)
    assert not r
    scale = 1
    for x in q:
        scale = scale * x.denominator // gcd(scale, x.denominator)
    ints = [int(x * scale) for x in q]
    g_int = 0
    for x in ints:
        g_int = gcd(g_int, x)
    return [x // g_int for x in ints]


def _bracket(c: Sequence[int], guess: float, tol: Fraction) -> Fraction | None:
    # rational roots (e.g. 1 or 2) are returned exactly
    near = Fraction(guess).limit_denominator(64)
    if abs(float(near) - guess) < 1e-6 and poly_eval(c, near) == 0:
        return near
    for width in (1e-12, 1e-9, 1e-6, 1e-3):
        lo = Fraction(guess - width * max(1.0, abs(guess)))
        hi = Fraction(guess + width * max(1.0, abs(guess)))
        flo, fhi = poly_eval(c, lo), poly_eval(c, hi)
        if flo == 0:
            return lo
        if fhi == 0:
            return hi
        if (flo > 0) != (fhi > 0):
            while hi - lo > tol:
                mid = (lo + hi) / 2
                fm = poly_eval(c, mid)
                if fm == 0:
                    return mid
                if (fm > 0) == (flo > 0):
                    lo = mid
                else:
                    hi = mid
            return (lo + hi) / 2
    return None
