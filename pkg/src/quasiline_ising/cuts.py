"""Max-cut solvers, the Gibbs decoder and the partition-function distinguisher."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import polynomials as poly
from .enumeration import LOW_BITS, GrayBlocks, check_cap, spins_from_index
from .gadgets import all_z_sigma, build_gstar, fiber_count
from .graphs import Graph
from .spin_models import _check_mu, as_spins, cut_size, log_partition, mu_to_str

MAXCUT_CAP = 30
DECODE_RATIO = Fraction(997, 1000)


@dataclass(frozen=True)
class CutResult:
    config: np.ndarray
    cut_size: int
    method: str  # "exact" or "local-search"
    certificate: str

    def __post_init__(self):
        if self.method not in ("exact", "local-search"):
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self) -> dict:
        return {
            "config": "".join("+" if s > 0 else "-" for s in self.config),
            "cut_size": self.cut_size,
            "method": self.method,
            "certificate": self.certificate,
        }


def maxcut_exact(g: Graph, cap: int = MAXCUT_CAP) -> CutResult:
    """Optimal cut by exhaustive enumeration (half the space, by flip symmetry)."""
    check_cap(g.n, cap, "max-cut instance")
    if g.n == 0:
        return CutResult(np.zeros(0, dtype=np.int8), 0, "exact", "empty graph")
    best, arg = -1, 0
    blocks = GrayBlocks(g, half=g.n > LOW_BITS)
    size = 1 << blocks.k
    visited = 0
    for high, cuts in blocks:
        i = int(np.argmax(cuts))
        visited += cuts.size
        if cuts[i] > best:
            best, arg = int(cuts[i]), high * size + i
    config = spins_from_index(arg, g.n)
    cert = f"enumerated {visited} of {1 << g.n} configurations (rest are global flips)" \
        if visited < (1 << g.n) else f"enumerated all {visited} configurations"
    out = CutResult(config, best, "exact", cert)
    assert cut_size(g, config) == best
    return out


def _gains(g: Graph, s: np.ndarray) -> np.ndarray:
    """Cut change from flipping each vertex."""
    gain = np.zeros(g.n, dtype=np.int64)
    for u, v in g.edges:
        d = 1 if s[u] == s[v] else -1
        gain[u] += d
        gain[v] += d
    return gain


def flip_local_search(g: Graph, start, seed: int | None = None, max_flips: int | None = None) -> CutResult:
    """Flip improving vertices until none remains.

    Scans in index order and flips the first improving vertex; with a
    ``seed`` the scan order is a fresh random permutation after each flip.
    """
    s = as_spins(start, g.n).copy()
    rng = None if seed is None else np.random.default_rng(seed)
    cut = cut_size(g, s)
    gain = _gains(g, s)
    flips = 0
    limit = g.m + 1 if max_flips is None else max_flips
    while flips < limit:
        order = range(g.n) if rng is None else rng.permutation(g.n)
        v = next((int(u) for u in order if gain[u] > 0), None)
        if v is None:
            break
        cut += int(gain[v])
        s[v] = -s[v]
        gain[v] = -gain[v]
        for u in g.adj[v]:
            gain[u] += 2 if s[u] == s[v] else -2
        flips += 1
    assert cut == cut_size(g, s)
    return CutResult(s, cut, "local-search", f"local optimum after {flips} flips")


def is_local_optimum(g: Graph, sigma) -> bool:
    return bool(np.all(_gains(g, as_spins(sigma, g.n)) <= 0))


# -- decoder ------------------------------------------------------------------

@dataclass
class DecodeReport:
    instance_hash: str
    maxcut: int
    threshold_cut: Fraction
    mu: str
    exact_probability: Fraction | float
    samples: int
    empirical_probability: float
    stderr: float
    sweep: list[tuple[str, float]] = field(default_factory=list)
    minimal_mu: Fraction | None = None
    fiber_count: int = 0

    @property
    def within_3_sigma(self) -> bool:
        p = float(self.exact_probability)
        se = math.sqrt(max(p * (1 - p), 1e-300) / max(self.samples, 1))
        return abs(self.empirical_probability - p) <= 3 * se + 1e-12

    def to_dict(self) -> dict:
        ep = self.exact_probability
        return {
            "instance_hash": self.instance_hash,
            "C": self.maxcut,
            "c": str(self.threshold_cut),
            "mu": self.mu,
            "exact_probability": str(ep) if isinstance(ep, Fraction) else ep,
            "exact_probability_float": float(ep),
            "samples": self.samples,
            "empirical_probability": self.empirical_probability,
            "stderr": self.stderr,
            "sweep": [{"mu": m, "probability": p} for m, p in self.sweep],
            "minimal_mu_for_three_quarters": None if self.minimal_mu is None else str(self.minimal_mu),
            "fiber_count": self.fiber_count,
        }


class Decoder:
    """Exact law of ``phi(sigma*)`` for Gibbs-distributed ``sigma*`` on G*(base).

    Holds ``Z_sigma`` for every base configuration as an integer polynomial,
    so each ``mu`` costs only evaluations.
    """

    def __init__(self, base: Graph, ratio=DECODE_RATIO, cap: int = 10):
        self.base = base
        self.out = build_gstar(base, "H")
        self.zs = all_z_sigma(self.out.layout, cap)
        self.C = maxcut_exact(base).cut_size
        self.ratio = Fraction(ratio)
        self.threshold = self.ratio * self.C
        self.good = {i for i in self.zs if cut_size(base, spins_from_index(i, base.n)) > self.threshold}

    def log_weights(self, mu) -> np.ndarray:
        lm = math.log(_check_mu(mu))
        return np.array([log_partition(self.zs[i], lm) for i in range(len(self.zs))])

    def success_probability(self, mu):
        """Exact Fraction for rational ``mu``, float otherwise."""
        mu = _check_mu(mu)
        if isinstance(mu, Fraction):
            vals = {i: poly.evaluate(p, mu) for i, p in self.zs.items()}
            return sum(vals[i] for i in self.good) / sum(vals.values())
        lw = self.log_weights(mu)
        w = np.exp(lw - lw.max())
        return float(w[sorted(self.good)].sum() / w.sum())

    def sample(self, mu, samples: int, seed: int = 0) -> np.ndarray:
        lw = self.log_weights(mu)
        w = np.exp(lw - lw.max())
        rng = np.random.default_rng(seed)
        return rng.choice(len(w), size=samples, p=w / w.sum())

    def minimal_mu(self, target=Fraction(3, 4), limit: int = 2 ** 4096) -> Fraction | None:
        """Least integer ``mu >= 1`` with success probability at least ``target``."""
        if self.success_probability(1) >= target:
            return Fraction(1)
        lo, hi = 1, 2
        while self.success_probability(hi) < target:
            lo, hi = hi, hi * 2
            if hi > limit:
                return None
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.success_probability(mid) >= target:
                hi = mid
            else:
                lo = mid
        return Fraction(hi)


def decode_experiment(base: Graph, mu="16", samples: int = 4000, seed: int = 0,
                      sweep: Sequence = ("1", "2", "4", "16", "2^8", "2^16", "2^32"),
                      ratio=DECODE_RATIO) -> DecodeReport:
    dec = Decoder(base, ratio)
    p = dec.success_probability(mu)
    draws = dec.sample(mu, samples, seed)
    hits = np.isin(draws, sorted(dec.good))
    emp = float(hits.mean()) if samples else float("nan")
    se = float(hits.std(ddof=0) / math.sqrt(samples)) if samples else float("nan")
    return DecodeReport(
        instance_hash=base.content_hash(),
        maxcut=dec.C,
        threshold_cut=dec.threshold,
        mu=mu_to_str(mu),
        exact_probability=p,
        samples=samples,
        empirical_probability=emp,
        stderr=se,
        sweep=[(mu_to_str(m), float(dec.success_probability(m))) for m in sweep],
        minimal_mu=dec.minimal_mu(),
        fiber_count=fiber_count(dec.out.layout),
    )


# -- distinguisher ------------------------------------------------------------

class SeparationError(ValueError):
    """``mu`` is too small for a factor-2 estimate to separate the two cases."""

    def __init__(self, message: str, minimal_mu: Fraction):
        super().__init__(message)
        self.minimal_mu = minimal_mu


@dataclass(frozen=True)
class Verdict:
    above: bool  # maxcut > c
    c: int
    mu: str
    estimate_log2: float
    threshold_log2: float

    @property
    def label(self) -> str:
        return f"maxcut > {self.c}" if self.above else f"maxcut <= {self.c}"


def separation_mu(n: int) -> Fraction:
    """Least integer ``mu`` with ``2^(9n+1) mu^k < mu^(k+1) / 2``."""
    return Fraction(2 ** (9 * n + 2) + 1)


def exact_partition_oracle(base: Graph, cap: int = 10) -> Callable:
    """``mu -> Z(G*(base), mu)`` exactly, from the summed ``Z_sigma`` polynomials."""
    out = build_gstar(base, "H")
    total = [0]
    for p in all_z_sigma(out.layout, cap).values():
        total = poly.add(total, p)

    def oracle(mu):
        return poly.evaluate(total, Fraction(mu))

    return oracle


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def distinguisher(base: Graph, mu, c: int, oracle: Callable) -> Verdict:
    """Decide ``maxcut(base) > c`` from any ``Z~`` within a factor 2 of ``Z(G*, mu)``.

    If maxcut > c then ``Z >= mu^(18n+c+1)``; if maxcut <= c then
    ``Z <= 2^(9n) mu^(18n+c)``. The threshold ``mu^(18n+c+1) / 2`` separates
    the two factor-2 windows once ``mu > 2^(9n+2)``.
    """
    if not base.is_cubic():
        raise ValueError("base graph must be cubic")
    mu = _check_mu(mu)
    if not isinstance(mu, Fraction):
        raise ValueError("mu must be exact")
    n = base.n
    lo_side = 2 ** (9 * n + 1) * mu ** (18 * n + c)
    hi_side = mu ** (18 * n + c + 1) / 2
    if not lo_side < hi_side:
        need = separation_mu(n)
        raise SeparationError(f"mu={mu_to_str(mu)} does not separate; need mu >= {need}", need)
    est = Fraction(oracle(mu))
    return Verdict(est >= hi_side, c, mu_to_str(mu), _log2(est), _log2(hi_side))
