"""Exact Ising and hard-core partition functions.

The Ising model here is antiferromagnetic: a configuration ``sigma`` has
weight ``mu ** |cut sigma|``. Everything exact is kept as integer cut
polynomials so a single enumeration serves every ``mu``, including values
like ``2**3067`` that overflow a double.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import mpmath
import numpy as np

from . import polynomials as poly
from .enumeration import (
    DEFAULT_ENUMERATION_CAP,
    all_cut_sizes,
    check_cap,
    cut_histogram,
    plus_cut_histogram,
)
from .graphs import Graph

Spins = np.ndarray

LOG_TOLERANCE = 2.0 ** -40
IMAG_TOLERANCE = 1e-7


def as_spins(sigma: Sequence[int], n: int | None = None) -> Spins:
    """Validate and convert a +/-1 sequence (or '+-' string)."""
    if isinstance(sigma, str):
        sigma = [1 if c == "+" else -1 if c == "-" else 0 for c in sigma]
    arr = np.asarray(sigma, dtype=np.int8)
    if arr.ndim != 1 or not np.all(np.abs(arr) == 1):
        raise ValueError("spins must be a 1-d sequence of +1/-1")
    if n is not None and arr.size != n:
        raise ValueError(f"configuration has {arr.size} spins, graph has {n} vertices")
    return arr


def spins_to_str(sigma: Spins) -> str:
    return "".join("+" if s > 0 else "-" for s in sigma)


def parse_mu(value) -> Fraction | float:
    """Exact ``Fraction`` for ints, Fractions and strings like ``2^76``, ``3/2``, ``1.5``."""
    if isinstance(value, bool):
        raise TypeError("mu must be numeric")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip().replace("**", "^")
        if "^" in text:
            base, exp = text.split("^", 1)
            e = int(exp)
            b = Fraction(base.strip())
            return b ** e
        return Fraction(text)
    raise TypeError(f"cannot interpret mu={value!r}")


def mu_to_str(mu) -> str:
    mu = parse_mu(mu)
    if isinstance(mu, Fraction):
        if mu.denominator == 1 and mu.numerator > 1 and mu.numerator & (mu.numerator - 1) == 0:
            return f"2^{mu.numerator.bit_length() - 1}"
        return str(mu)
    return repr(mu)


def log_of(x) -> float:
    """Natural log of a positive int/Fraction/float without overflow."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class WeightValue:
    """A positive weight, exact when possible, always with its log."""

    log_value: float
    exact: Fraction | None = None

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @classmethod
    def from_exact(cls, value) -> WeightValue:
        value = Fraction(value)
        if value <= 0:
            return cls(-math.inf, value)
        return cls(log_of(value), value)

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log_value)


def _check_mu(mu):
    mu = parse_mu(mu)
    if mu <= 0:
        raise ValueError("mu must be positive")
    return mu


# -- configurations and cuts --------------------------------------------------

def cut_edges(g: Graph, sigma) -> list[tuple[int, int]]:
    s = as_spins(sigma, g.n)
    return [(u, v) for u, v in g.edges if s[u] != s[v]]


def cut_size(g: Graph, sigma) -> int:
    s = as_spins(sigma, g.n)
    if g.m == 0:
        return 0
    e = g.edge_array
    return int(np.count_nonzero(s[e[:, 0]] != s[e[:, 1]]))


@dataclass(frozen=True)
class CutPolynomial:
    """``Z(mu) = sum_k coeffs[k] * mu**k`` with ``coeffs[k]`` configurations of cut k."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return poly.degree(self.coeffs)

    @property
    def mass(self) -> int:
        return sum(self.coeffs)

    def __call__(self, mu) -> WeightValue:
        return partition_eval(self, mu)

    def to_json(self) -> str:
        return json.dumps({"coefficients": [str(c) for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> CutPolynomial:
        return cls(tuple(int(c) for c in json.loads(text)["coefficients"]))


def cut_polynomial(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> CutPolynomial:
    return CutPolynomial(tuple(cut_histogram(g, cap)))


def partition_eval(p: CutPolynomial | Sequence[int], mu) -> WeightValue:
    """Evaluate exactly for rational mu, otherwise by log-sum-exp."""
    coeffs = p.coeffs if isinstance(p, CutPolynomial) else tuple(p)
    mu = _check_mu(mu)
    if isinstance(mu, Fraction):
        return WeightValue.from_exact(poly.evaluate(coeffs, mu))
    return WeightValue(log_partition(coeffs, math.log(mu)))


def log_partition(coeffs: Sequence[int], log_mu: float) -> float:
    terms = np.array([math.log(c) + k * log_mu for k, c in enumerate(coeffs) if c > 0])
    if terms.size == 0:
        return -math.inf
    top = terms.max()
    return float(top + math.log(math.fsum(np.exp(terms - top))))


def gibbs_probability(g: Graph, mu, sigma, cap: int = DEFAULT_ENUMERATION_CAP):
    """``wt(sigma) / Z``: a Fraction for rational mu, else a float."""
    mu = _check_mu(mu)
    p = cut_polynomial(g, cap)
    c = cut_size(g, sigma)
    if isinstance(mu, Fraction):
        return mu ** c / poly.evaluate(p.coeffs, mu)
    return math.exp(c * math.log(mu) - log_partition(p.coeffs, math.log(mu)))


def gibbs_vector(g: Graph, mu, cap: int = 20) -> np.ndarray:
    """Gibbs probabilities of all configurations (float64, by config index)."""
    check_cap(g.n, cap)
    cuts = all_cut_sizes(g, cap)
    log_w = cuts * log_of(_check_mu(mu))
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def exact_gibbs_sample(g: Graph, mu, seed=None, size: int | None = None, cap: int = 22):
    """Inverse-CDF sample(s) from the Gibbs distribution.

    Returns a spin array, or a ``(size, n)`` array when ``size`` is given.
    """
    pi = gibbs_vector(g, mu, cap)
    cdf = np.cumsum(pi)
    rng = np.random.default_rng(seed)
    u = rng.random(1 if size is None else size) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    spins = np.where((idx[:, None] >> np.arange(g.n)) & 1, 1, -1).astype(np.int8)
    return spins[0] if size is None else spins


# -- external field -----------------------------------------------------------

@dataclass(frozen=True)
class FieldPolynomial:
    """``Z(mu, z) = sum_{k,j} coeffs[k][j] * z**k * mu**j`` (k plus spins, cut j)."""

    coeffs: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def cut_polynomial(self) -> CutPolynomial:
        return CutPolynomial(tuple(sum(col) for col in zip(*self.coeffs)))

    def univariate(self, mu) -> list:
        """Coefficients in z (index = power of z) at fixed mu."""
        mu = _check_mu(mu)
        return [poly.evaluate(row, mu) for row in self.coeffs]

    def evaluate(self, mu, z):
        return poly.evaluate(self.univariate(mu), z)

    def to_json(self) -> str:
        return json.dumps({"coefficients": [[str(c) for c in row] for row in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> FieldPolynomial:
        rows = json.loads(text)["coefficients"]
        return cls(tuple(tuple(int(c) for c in row) for row in rows))


def field_polynomial(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> FieldPolynomial:
    return FieldPolynomial(tuple(tuple(r) for r in plus_cut_histogram(g, cap)))


def field_partition(g: Graph, mu, z: Sequence, cap: int = 20):
    """Multivariate ``Z(G, mu, z)`` at numeric per-vertex fields ``z``."""
    check_cap(g.n, cap)
    mu = _check_mu(mu)
    if len(z) != g.n:
        raise ValueError("need one field value per vertex")
    total = 0
    cuts = all_cut_sizes(g, cap)
    for idx in range(1 << g.n):
        term = mu ** int(cuts[idx])
        for v in range(g.n):
            if (idx >> v) & 1:
                term *= z[v]
        total += term
    return total


@dataclass(frozen=True)
class Root:
    value: complex
    residual: float
    converged: bool

    @property
    def is_real(self) -> bool:
        return abs(self.value.imag) < IMAG_TOLERANCE


def univariate_roots_in_z(p: FieldPolynomial, mu, dps: int = 60) -> list[Root]:
    """All complex roots of ``z -> Z(G, mu, z)``.

    Roots are found at ``dps`` decimal digits so that repeated roots do not
    split into spurious complex pairs; each carries its relative residual.
    """
    coeffs = p.univariate(mu)
    if poly.degree(coeffs) < 1:
        raise ValueError("polynomial in z has no roots")
    coeffs = poly.trim(coeffs)
    with mpmath.workdps(dps):
        mp_coeffs = [mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(c)
                     for c in reversed(coeffs)]
        try:
            found = mpmath.polyroots(mp_coeffs, maxsteps=400, extraprec=4 * dps)
            converged = True
        except mpmath.libmp.NoConvergence:
            found = [mpmath.mpc(r) for r in np.roots([float(c) for c in mp_coeffs])]
            converged = False
        out = []
        for r in found:
            r = mpmath.mpc(r)
            val = mpmath.polyval(mp_coeffs, r)
            scale = mpmath.polyval([abs(c) for c in mp_coeffs], abs(r))
            residual = float(abs(val) / scale)
            out.append(Root(complex(r), residual, converged and residual < 1e-8))
    return sorted(out, key=lambda r: (r.value.real, r.value.imag))


# -- hard-core model ----------------------------------------------------------

def independence_polynomial(g: Graph, cap: int = 60) -> list[int]:
    """Coefficients ``I[k]`` = number of independent sets of size k.

    Branching ``I(G) = I(G - v) + x I(G - N[v])`` over vertex bitmasks,
    memoised on the remaining vertex set.
    """
    check_cap(g.n, cap)
    nbr_mask = [sum(1 << u for u in g.adj[v]) for v in range(g.n)]
    memo: dict[int, list[int]] = {0: [1]}

    def count(mask: int) -> list[int]:
        if mask in memo:
            return memo[mask]
        # branch on the highest-degree remaining vertex
        v = max((u for u in range(g.n) if mask >> u & 1), key=lambda u: (nbr_mask[u] & mask).bit_count())
        if not nbr_mask[v] & mask:
            rest = count(mask & ~(1 << v))
            res = poly.add(rest, [0] + rest)
        else:
            res = poly.add(count(mask & ~(1 << v)), [0] + count(mask & ~(1 << v) & ~nbr_mask[v]))
        memo[mask] = res
        return res

    return poly.trim(count((1 << g.n) - 1))


def hardcore_partition(g: Graph, lam, cap: int = 60) -> tuple[WeightValue, list[int]]:
    lam = _check_mu(lam)
    coeffs = independence_polynomial(g, cap)
    return partition_eval(coeffs, lam), coeffs
