"""Exact univariate polynomials with non-negative integer coefficients.

Coefficient lists are little-endian (``p[k]`` multiplies ``x**k``). Products
of many such polynomials are done by Kronecker substitution: a polynomial is
packed into one big integer by evaluating it at ``2**bits``, which turns
polynomial multiplication into a single big-integer multiplication. ``bits``
must exceed the bit length of every coefficient that can arise.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def pack(coeffs: Sequence[int], bits: int) -> int:
    out = 0
    for c in reversed(coeffs):
        if c < 0 or c.bit_length() >= bits:
            raise ValueError("coefficient does not fit the packing width")
        out = (out << bits) | c
    return out


def unpack(value: int, bits: int) -> list[int]:
    if value < 0:
        raise ValueError("packed polynomials are non-negative")
    mask = (1 << bits) - 1
    out = []
    while value:
        out.append(value & mask)
        value >>= bits
    return out or [0]


def trim(coeffs: Sequence[int]) -> list[int]:
    out = list(coeffs)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def degree(coeffs: Sequence[int]) -> int:
    """Degree; -1 for the zero polynomial."""
    for k in range(len(coeffs) - 1, -1, -1):
        if coeffs[k]:
            return k
    return -1


def lowest_degree(coeffs: Sequence[int]) -> int:
    for k, c in enumerate(coeffs):
        if c:
            return k
    return -1


def evaluate(coeffs: Sequence[int], x):
    """Horner evaluation; exact for int/Fraction ``x``."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def add(p: Sequence[int], q: Sequence[int]) -> list[int]:
    out = [0] * max(len(p), len(q))
    for k, c in enumerate(p):
        out[k] += c
    for k, c in enumerate(q):
        out[k] += c
    return out


def mul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    if not p or not q:
        return [0]
    bits = max(max(p).bit_length(), 1) + max(max(q).bit_length(), 1) + min(len(p), len(q)).bit_length() + 1
    return trim(unpack(pack(p, bits) * pack(q, bits), bits)[: len(p) + len(q) - 1])


def dominated_by_monomial(p: Sequence[int], coeff: int | Fraction, exponent) -> bool:
    """Whether ``p(x) <= coeff * x**exponent`` for every ``x >= 1``.

    Sufficient condition used throughout: total mass at most ``coeff`` and no
    term of degree above ``exponent``. This is also necessary when the mass
    bound is checked at ``x = 1``.
    """
    return sum(p) <= coeff and degree(p) <= exponent


def dominates_monomial(p: Sequence[int], coeff: int, exponent: int) -> bool:
    """Whether ``p(x) >= coeff * x**exponent`` termwise (hence for all x >= 0)."""
    return 0 <= exponent < len(p) and p[exponent] >= coeff
