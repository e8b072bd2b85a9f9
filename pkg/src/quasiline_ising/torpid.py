"""Magnifier certification and the torpid-mixing bottleneck on G*_n.

The base is a cubic bipartite graph with sides L and R of size ``n`` each.
Base configurations split into Omega_= / Omega_+ / Omega_- by comparing the
number of ``+`` spins on L with the number on R.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import polynomials as poly
from .enumeration import check_cap, spins_from_index
from .gadgets import ReductionOutput, all_z_sigma, build_gstar, perfect_config
from .glauber import ConductanceReport, MajorityGroups, run_chain
from .graphs import Graph, GenerationError, line_graph, random_bipartite_cubic, random_cubic
from .spin_models import _check_mu, as_spins, cut_size, mu_to_str

MAGNIFIER_CAP = 28
BOTTLENECK_CAP = 10  # base vertices


# -- magnifiers ---------------------------------------------------------------

@dataclass(frozen=True)
class MagnifierCertificate:
    c: Fraction
    min_ratio: Fraction
    worst_set: tuple[int, ...]

    @property
    def is_c_magnifier(self) -> bool:
        return self.min_ratio >= self.c


def _external_neighbourhood(g: Graph, subset: Sequence[int]) -> set[int]:
    inside = set(subset)
    return {u for v in subset for u in g.adj[v]} - inside


def certify_magnifier(g: Graph, c=Fraction(1, 8), cap: int = MAGNIFIER_CAP) -> MagnifierCertificate:
    """Exact minimum of ``|N(U) - U| / |U|`` over all ``1 <= |U| <= |V|/2``."""
    check_cap(g.n, cap, "magnifier candidate")
    c = Fraction(c)
    n = g.n
    nbr = np.array([sum(1 << u for u in g.adj[v]) for v in range(n)], dtype=np.int64)
    half = n // 2
    best: tuple[Fraction, int] | None = None
    chunk = 1 << min(n, 20)
    for lo in range(1, 1 << n, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        size = np.bitwise_count(masks).astype(np.int64)
        keep = size <= half
        masks, size = masks[keep], size[keep]
        if masks.size == 0:
            continue
        reach = np.zeros_like(masks)
        for v in range(n):
            reach |= np.where((masks >> v) & 1, nbr[v], 0)
        boundary = np.bitwise_count(reach & ~masks).astype(np.int64)
        # minimise boundary / size via cross-multiplication against the best so far
        i = int(np.argmin(boundary / size))
        cand = (Fraction(int(boundary[i]), int(size[i])), int(masks[i]))
        if best is None or cand[0] < best[0]:
            best = cand
    if best is None:
        raise ValueError("graph too small to certify")
    worst = tuple(v for v in range(n) if (best[1] >> v) & 1)
    ratio = Fraction(len(_external_neighbourhood(g, worst)), len(worst))
    if ratio != best[0]:
        raise AssertionError("worst-set ratio failed recomputation")
    return MagnifierCertificate(c, ratio, worst)


def algebraic_connectivity(g: Graph) -> float:
    lap = np.diag([len(a) for a in g.adj]).astype(float)
    for u, v in g.edges:
        lap[u, v] = lap[v, u] = -1.0
    return float(np.sort(np.linalg.eigvalsh(lap))[1]) if g.n > 1 else 0.0


def find_magnifier_base(
    n_per_side: int, seed: int = 0, c=Fraction(1, 8), max_tries: int = 1000
) -> tuple[Graph, MagnifierCertificate, int]:
    """First random bipartite cubic graph (seeds ``seed, seed+1, ...``) that
    certifies as a ``c``-magnifier. Disconnected candidates are skipped by a
    spectral pre-filter. Returns ``(graph, certificate, seed_used)``."""
    for s in range(seed, seed + max_tries):
        g = random_bipartite_cubic(n_per_side, s)
        if algebraic_connectivity(g) < 1e-9:
            continue
        cert = certify_magnifier(g, c)
        if cert.is_c_magnifier:
            return g, cert, s
    raise GenerationError(f"no {c}-magnifier found in {max_tries} candidates")


# -- Omega classes ------------------------------------------------------------

class Omega(enum.Enum):
    EQUAL = "="
    PLUS = "+"
    MINUS = "-"


def _sides(g: Graph) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if g.bipartition is None:
        raise ValueError("graph has no bipartition labels")
    return g.bipartition


def omega_classify(g: Graph, sigma) -> Omega:
    left, right = _sides(g)
    s = as_spins(sigma, g.n)
    diff = int(np.sum(s[list(left)] > 0)) - int(np.sum(s[list(right)] > 0))
    return Omega.EQUAL if diff == 0 else Omega.PLUS if diff > 0 else Omega.MINUS


def omega_partition(g: Graph) -> dict[Omega, list[int]]:
    """Configuration indices of each class, over all ``2^|V|`` configurations."""
    check_cap(g.n, 24, "omega partition")
    left, right = _sides(g)
    idx = np.arange(1 << g.n, dtype=np.int64)
    lp = sum(((idx >> v) & 1) for v in left)
    rp = sum(((idx >> v) & 1) for v in right)
    return {
        Omega.EQUAL: idx[lp == rp].tolist(),
        Omega.PLUS: idx[lp > rp].tolist(),
        Omega.MINUS: idx[lp < rp].tolist(),
    }


def equatorial_cut_bound(g: Graph, sigma, cert: MagnifierCertificate) -> Fraction:
    """Slack ``(m - n/4) - |cut sigma|`` for ``sigma`` in Omega_=.

    ``n`` is the side size; requires a certified 1/8-magnifier.
    """
    if not (cert.is_c_magnifier and cert.c >= Fraction(1, 8)):
        raise ValueError("base is not a certified 1/8-magnifier")
    if omega_classify(g, sigma) is not Omega.EQUAL:
        raise ValueError("configuration is not in Omega_=")
    n = len(_sides(g)[0])
    return Fraction(g.m) - Fraction(n, 4) - cut_size(g, sigma)


# -- exact bottleneck sums ----------------------------------------------------

@dataclass
class BottleneckReport:
    n: int
    m: int
    mu: Fraction
    equal: list[int]
    plus: list[int]
    minus: list[int]
    equal_value: Fraction = field(init=False)
    plus_value: Fraction = field(init=False)
    minus_value: Fraction = field(init=False)

    def __post_init__(self):
        self.equal_value = poly.evaluate(self.equal, self.mu)
        self.plus_value = poly.evaluate(self.plus, self.mu)
        self.minus_value = poly.evaluate(self.minus, self.mu)

    @property
    def equal_bound_ok(self) -> bool:
        """sum_{Omega_=} Z <= 2^(18n) mu^(36n + m - n/4) for all mu >= 1."""
        exponent = Fraction(36 * self.n + self.m) - Fraction(self.n, 4)
        return poly.dominated_by_monomial(self.equal, 2 ** (18 * self.n), exponent)

    @property
    def side_bound_ok(self) -> bool:
        """sum over each of Omega_+, Omega_- is >= mu^(36n + m) for all mu >= 0."""
        top = 36 * self.n + self.m
        return poly.dominates_monomial(self.plus, 1, top) and poly.dominates_monomial(self.minus, 1, top)

    def separation_holds(self, mu=None) -> bool:
        """``2^n * sum_{Omega_=} Z <= sum_{Omega_+} Z`` at ``mu`` (exact)."""
        if mu is None:
            return 2 ** self.n * self.equal_value <= self.plus_value
        mu = Fraction(mu)
        return 2 ** self.n * poly.evaluate(self.equal, mu) <= poly.evaluate(self.plus, mu)

    @property
    def symmetric(self) -> bool:
        return self.plus == self.minus

    @property
    def total_mass(self) -> int:
        return sum(self.equal) + sum(self.plus) + sum(self.minus)

    def threshold_mu(self, upper=None) -> Fraction:
        """Smallest integer mu >= 1 from which the separation holds, found by
        doubling then bisection (the separation is monotone in mu here)."""
        hi = 1
        while not self.separation_holds(hi):
            hi *= 2
            if upper is not None and hi > upper:
                raise ValueError("separation does not hold below the given upper limit")
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.separation_holds(mid):
                hi = mid
            else:
                lo = mid
        return Fraction(hi)

    def conductance_report(self) -> ConductanceReport:
        """Bottleneck ratio for A = phi^-1(Omega_+), bounded through M = phi^-1(Omega_=).

        Every single-spin move leaving A lands in M, so the flow out of A is
        at most pi(M); ``ratio`` is the resulting upper bound pi(M) / pi(A).
        """
        z = self.equal_value + self.plus_value + self.minus_value
        pi_a, pi_m = self.plus_value / z, self.equal_value / z
        return ConductanceReport(pi_a, pi_m, pi_m / pi_a, "phi^-1(Omega_+) via phi^-1(Omega_=)",
                                 boundary_is_bound=True, separator_weight=pi_m)


def class_polynomials(out: ReductionOutput, cap: int = BOTTLENECK_CAP) -> dict[Omega, list[int]]:
    base = out.base
    check_cap(base.n, cap, "bottleneck base")
    zs = all_z_sigma(out.layout, cap)
    sums: dict[Omega, list[int]] = {o: [0] for o in Omega}
    for i, p in zs.items():
        o = omega_classify(base, spins_from_index(i, base.n))
        sums[o] = poly.add(sums[o], p)
    return {o: poly.trim(p) for o, p in sums.items()}


def bottleneck_sums(base: Graph, mu="2^76", cert: MagnifierCertificate | None = None,
                    cap: int = BOTTLENECK_CAP) -> BottleneckReport:
    """Exact per-class sums of ``Z_sigma`` over the H-kind reduction of ``base``."""
    if cert is not None and not cert.is_c_magnifier:
        raise ValueError("base is not a certified magnifier")
    out = build_gstar(base, "H")
    sums = class_polynomials(out, cap)
    mu = _check_mu(mu)
    if not isinstance(mu, Fraction):
        raise ValueError("bottleneck sums are evaluated exactly; give mu as a rational")
    n = len(_sides(base)[0])
    return BottleneckReport(n, base.m, mu, sums[Omega.EQUAL], sums[Omega.PLUS], sums[Omega.MINUS])


# -- escape-time experiment ---------------------------------------------------

@dataclass
class EscapeConfig:
    sizes: tuple[int, ...] = (3, 4)
    mu: str = "16"
    replicates: int = 20
    step_cap: int = 10 ** 8
    seed: int = 0
    control: bool = True
    control_burn: int = 10 ** 6

    @classmethod
    def from_dict(cls, d: dict) -> EscapeConfig:
        d = dict(d)
        if "sizes" in d:
            d["sizes"] = tuple(d["sizes"])
        d["mu"] = str(d.get("mu", cls.mu))
        return cls(**d)

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "mu": self.mu, "replicates": self.replicates,
                "step_cap": self.step_cap, "seed": self.seed, "control": self.control,
                "control_burn": self.control_burn}


@dataclass(frozen=True)
class EscapeRow:
    kind: str  # "gstar" or "control"
    size: int
    replicate: int
    hit_time: int
    censored: bool


def escape_instance(n_per_side: int, seed: int) -> tuple[ReductionOutput, MagnifierCertificate, int]:
    base, cert, used = find_magnifier_base(n_per_side, seed)
    return build_gstar(base, "H"), cert, used


def escape_groups(out: ReductionOutput) -> MajorityGroups:
    """Terminal groups weighted +1 on L and -1 on R: balance < 0 iff phi in Omega_-."""
    left, _ = _sides(out.base)
    left = set(left)
    return MajorityGroups(
        tuple(tuple(t) for t in out.layout.terminals),
        (2,) * out.base.n,
        tuple(1 if v in left else -1 for v in range(out.base.n)),
    )


def omega_plus_extreme(base: Graph) -> np.ndarray:
    """All ``+`` on L and all ``-`` on R."""
    left, _ = _sides(base)
    s = -np.ones(base.n, dtype=np.int8)
    s[list(left)] = 1
    return s


def escape_time(out: ReductionOutput, mu, step_cap: int, seed: int, replicate: int) -> EscapeRow:
    start = perfect_config(out.layout, omega_plus_extreme(out.base))
    run = run_chain(out.gstar, mu, start, step_cap, seed=seed, observables=(), stride=0,
                    groups=escape_groups(out), until="balance<0", stream=(1, out.base.n, replicate))
    n = out.base.n // 2
    if run.hitting_time is None:
        return EscapeRow("gstar", n, replicate, step_cap, True)
    return EscapeRow("gstar", n, replicate, run.hitting_time, False)


def control_graph(n_per_side: int, seed: int) -> Graph:
    """Line graph of a random cubic graph with as many vertices as G*_n (18n)."""
    return line_graph(random_cubic(12 * n_per_side, seed))


def control_time(g: Graph, mu, step_cap: int, burn: int, seed: int, n_per_side: int, replicate: int) -> EscapeRow:
    """Steps from all-``+`` until the cut first reaches its equilibrium median.

    The median is estimated from the second half of a ``burn``-step run.
    """
    ref = run_chain(g, mu, np.ones(g.n), burn, seed=seed, observables=("cut",),
                    stride=max(1, burn // 10_000), stream=(2, n_per_side, replicate))
    cuts = ref.columns["cut"]
    target = int(np.median(cuts[len(cuts) // 2:]))
    run = run_chain(g, mu, np.ones(g.n), step_cap, seed=seed, observables=(), stride=0,
                    until=f"cut>={target}", stream=(3, n_per_side, replicate))
    if run.hitting_time is None:
        return EscapeRow("control", n_per_side, replicate, step_cap, True)
    return EscapeRow("control", n_per_side, replicate, run.hitting_time, False)


def _escape_task(args):
    kind, n, r, cfg = args
    if kind == "gstar":
        out, _, _ = escape_instance(n, cfg.seed)
        return escape_time(out, cfg.mu, cfg.step_cap, cfg.seed, r)
    g = control_graph(n, cfg.seed)
    return control_time(g, cfg.mu, cfg.step_cap, cfg.control_burn, cfg.seed, n, r)


def escape_time_experiment(cfg: EscapeConfig, workers: int = 1) -> list[EscapeRow]:
    """Omega_- hitting times from a perfect Omega_+ start, per size and replicate.

    Rows come back in deterministic (kind, size, replicate) order regardless
    of ``workers``.
    """
    if _check_mu(cfg.mu) < 1:
        raise ValueError("escape experiment needs mu >= 1")
    tasks = [("gstar", n, r, cfg) for n in cfg.sizes for r in range(cfg.replicates)]
    if cfg.control:
        tasks += [("control", n, r, cfg) for n in cfg.sizes for r in range(cfg.replicates)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_escape_task, tasks))
    return [_escape_task(t) for t in tasks]


@dataclass(frozen=True)
class EscapeSummary:
    kind: str
    size: int
    median: float
    q25: float
    q75: float
    censored: int
    count: int


def summarise(rows: Sequence[EscapeRow]) -> list[EscapeSummary]:
    out = []
    for key in sorted({(r.kind, r.size) for r in rows}):
        times = np.array([r.hit_time for r in rows if (r.kind, r.size) == key], dtype=float)
        cens = sum(r.censored for r in rows if (r.kind, r.size) == key)
        q25, med, q75 = np.quantile(times, [0.25, 0.5, 0.75])
        out.append(EscapeSummary(key[0], key[1], float(med), float(q25), float(q75), cens, len(times)))
    return out


def sign_test(smaller: Sequence[int], larger: Sequence[int]) -> tuple[int, int, float]:
    """One-sided paired sign test that ``larger`` exceeds ``smaller``.

    Ties are dropped. Returns ``(wins, trials, p_value)``.
    """
    from scipy.stats import binomtest

    wins = sum(b > a for a, b in zip(smaller, larger))
    losses = sum(b < a for a, b in zip(smaller, larger))
    trials = wins + losses
    if trials == 0:
        return 0, 0, 1.0
    return wins, trials, float(binomtest(wins, trials, 0.5, alternative="greater").pvalue)


def rows_to_csv(rows: Sequence[EscapeRow]) -> str:
    lines = ["kind,size,replicate,hit_time,censored"]
    lines += [f"{r.kind},{r.size},{r.replicate},{r.hit_time},{int(r.censored)}" for r in rows]
    return "\n".join(lines) + "\n"


def mu_label(mu) -> str:
    return mu_to_str(mu)


def log2_mu(mu) -> float:
    mu = _check_mu(mu)
    return math.log2(mu.numerator) - math.log2(mu.denominator)
