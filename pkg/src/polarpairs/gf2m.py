"""Arithmetic in GF(2^m) for 4 <= m <= 16 via log/antilog tables.

Elements are integers in ``[0, 2**m)`` read as polynomials over GF(2);
addition is XOR.  Each field is fixed by one primitive polynomial from the
standard table below so that codes built on top are reproducible bit for bit.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exceptions import InvalidInputError

# Primitive polynomials, bit i = coefficient of x^i.
PRIMITIVE_POLYNOMIALS = {
    4: 0x13,  # x^4 + x + 1
    5: 0x25,  # x^5 + x^2 + 1
    6: 0x43,  # x^6 + x + 1
    7: 0x89,  # x^7 + x^3 + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


def clmul_mod(a: int, b: int, m: int, poly: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly`` (bitwise reference)."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


class GF2m:
    """The field GF(2^m) with vectorised multiplication over numpy arrays."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLYNOMIALS:
            raise InvalidInputError(f"GF(2^m) supported for m in 4..16, got m={m}")
        self.m = m
        self.order = 1 << m
        self.poly = PRIMITIVE_POLYNOMIALS[m]
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.poly
        if x != 1:
            raise InvalidInputError(f"polynomial {self.poly:#x} is not primitive for m={m}")
        exp[q1:] = exp[:q1]
        self.exp = exp
        self.log = log

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def poly_eval(self, coeffs, points):
        """Evaluate polynomials (rows of ``coeffs``, low degree first) at ``points``.

        Returns an array of shape ``(len(coeffs), len(points))``.
        """
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.int64))
        points = np.asarray(points, dtype=np.int64)
        acc = np.zeros((coeffs.shape[0], points.size), dtype=np.int64)
        for j in range(coeffs.shape[1] - 1, -1, -1):
            acc = self.mul(acc, points[None, :]) ^ coeffs[:, j : j + 1]
        return acc


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)
