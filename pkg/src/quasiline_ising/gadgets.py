"""Gadget reductions from cubic graphs to quasi-line Ising instances.

Each base vertex ``v`` of a cubic graph is replaced by a gadget:

* H-kind (9 vertices): terminals T_v, middle A_v, outer B_v, with a clique
  on ``T_v + A_v`` and a clique on ``A_v + B_v`` (27 edges).
* J-kind (6 vertices): the complete bipartite graph between T_v and A_v.

Each base edge ``e = {u, v}`` becomes the external edge ``{t_u^e, t_v^e}``.
Vertex numbering: gadget ``v`` occupies ``block*v .. block*v + block-1``
with terminals first (ranked by neighbour index in the base), then A, then B.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import polynomials as poly
from .enumeration import DEFAULT_ENUMERATION_CAP, GrayBlocks, check_cap, cut_histogram, spins_from_index
from .graphs import Graph, KrauszCover, validate_krausz_cover
from .spin_models import WeightValue, as_spins, cut_size, partition_eval

Z_SIGMA_CAP = 10


@dataclass(frozen=True)
class GadgetSpec:
    kind: str
    block: int
    perfect_cut: int  # internal cut of a perfect gadget
    fiber_bits: int  # log2 of configurations per gadget with a fixed terminal majority

    @property
    def has_b(self) -> bool:
        return self.block == 9


SPECS = {"H": GadgetSpec("H", 9, 18, 8), "J": GadgetSpec("J", 6, 9, 5)}


def _spec(kind: str) -> GadgetSpec:
    try:
        return SPECS[kind.upper()]
    except KeyError:
        raise ValueError(f"unknown gadget kind {kind!r}; use 'H' or 'J'") from None


def build_h_gadget() -> tuple[Graph, list[str]]:
    t, a, b = range(0, 3), range(3, 6), range(6, 9)
    edges = set(combinations([*t, *a], 2)) | set(combinations([*a, *b], 2))
    roles = [f"T{i}" for i in range(3)] + [f"A{i}" for i in range(3)] + [f"B{i}" for i in range(3)]
    return Graph.from_edges(9, sorted(edges), labels=roles), roles


def build_j_gadget() -> tuple[Graph, list[str]]:
    edges = [(i, 3 + j) for i in range(3) for j in range(3)]
    roles = [f"T{i}" for i in range(3)] + [f"A{i}" for i in range(3)]
    return Graph.from_edges(6, edges, labels=roles), roles


def build_gadget(kind: str) -> Graph:
    return build_h_gadget()[0] if _spec(kind).kind == "H" else build_j_gadget()[0]


@dataclass(frozen=True)
class GadgetLayout:
    kind: str
    base: Graph
    terminals: tuple[tuple[int, int, int], ...]
    a_sets: tuple[tuple[int, int, int], ...]
    b_sets: tuple[tuple[int, int, int], ...]
    external: tuple[tuple[int, int], ...]  # aligned with base.edges

    @property
    def spec(self) -> GadgetSpec:
        return _spec(self.kind)

    @property
    def n_base(self) -> int:
        return self.base.n

    def terminal(self, v: int, u: int) -> int:
        """Index of t_v^e for the base edge e = {v, u}."""
        return self.terminals[v][self.base.adj[v].index(u)]

    def gadget_vertices(self, v: int) -> range:
        s = self.spec.block
        return range(s * v, s * v + s)

    def roles(self) -> list[dict]:
        out = []
        for v in range(self.n_base):
            for r, t in enumerate(self.terminals[v]):
                out.append({"vertex": t, "role": "T", "base_vertex": v,
                            "base_edge": sorted((v, self.base.adj[v][r]))})
            for x in self.a_sets[v]:
                out.append({"vertex": x, "role": "A", "base_vertex": v})
            for x in self.b_sets[v]:
                out.append({"vertex": x, "role": "B", "base_vertex": v})
        return sorted(out, key=lambda d: d["vertex"])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "roles": self.roles(),
                "external": [list(p) for p in self.external]}


@dataclass(frozen=True)
class ReductionOutput:
    gstar: Graph
    layout: GadgetLayout
    krausz: KrauszCover | None
    base: Graph

    def to_dict(self) -> dict:
        d = self.gstar.to_dict()
        d["layout"] = self.layout.to_dict()
        if self.krausz is not None:
            d["krausz"] = [sorted(c) for c in self.krausz.cliques]
        return d


def build_gstar(base: Graph, kind: str = "H") -> ReductionOutput:
    """Replace every vertex of a cubic base by a gadget (G* for H, G-dagger for J)."""
    spec = _spec(kind)
    if not base.is_cubic():
        raise ValueError("gadget reductions need a cubic base graph")
    s = spec.block
    terminals, a_sets, b_sets = [], [], []
    edges: list[tuple[int, int]] = []
    gadget, _ = build_h_gadget() if spec.has_b else build_j_gadget()
    for v in range(base.n):
        off = s * v
        terminals.append((off, off + 1, off + 2))
        a_sets.append((off + 3, off + 4, off + 5))
        b_sets.append((off + 6, off + 7, off + 8) if spec.has_b else ())
        edges += [(off + x, off + y) for x, y in gadget.edges]
    external = []
    for u, v in base.edges:
        pair = (terminals[u][base.adj[u].index(v)], terminals[v][base.adj[v].index(u)])
        external.append(pair)
        edges.append(pair)
    labels = []
    for v in range(base.n):
        labels += [f"T[{v};{v}-{u}]" for u in base.adj[v]]
        labels += [f"A[{v};{i}]" for i in range(3)]
        if spec.has_b:
            labels += [f"B[{v};{i}]" for i in range(3)]
    gstar = Graph.from_edges(s * base.n, edges, labels=labels)
    layout = GadgetLayout(spec.kind, base, tuple(terminals), tuple(a_sets), tuple(b_sets), tuple(external))

    internal = 27 if spec.has_b else 9
    if gstar.m != internal * base.n + base.m:
        raise AssertionError("edge count invariant violated")
    # G-dagger itself has degree 4; its line supergraph reaches 6
    if (spec.has_b and gstar.max_degree != 8) or gstar.max_degree > 8:
        raise AssertionError("maximum degree invariant violated")
    if not spec.has_b and gstar.max_degree > 6:
        raise AssertionError("maximum degree invariant violated")
    krausz = None
    if spec.has_b:
        cliques = []
        for v in range(base.n):
            cliques.append(terminals[v] + a_sets[v])
            cliques.append(a_sets[v] + b_sets[v])
        cliques += list(external)
        krausz = KrauszCover.of(cliques)
        if not validate_krausz_cover(gstar, krausz):
            raise AssertionError("canonical Krausz cover failed validation")
    return ReductionOutput(gstar, layout, krausz, base)


def line_supergraph(out: ReductionOutput) -> tuple[Graph, KrauszCover]:
    """A line graph containing G-dagger as a spanning subgraph (J-kind).

    Completing each ``T_v + A_v`` into a clique gives cliques in which every
    vertex lies in at most two cliques and any two cliques share at most one
    vertex, i.e. the line graph of a simple graph.
    """
    lay = out.layout
    if lay.kind != "J":
        raise ValueError("line_supergraph is for J-kind reductions")
    cliques = [lay.terminals[v] + lay.a_sets[v] for v in range(lay.n_base)] + list(lay.external)
    edges = {tuple(sorted(p)) for c in cliques for p in combinations(c, 2)}
    return Graph.from_edges(out.gstar.n, sorted(edges)), KrauszCover.of(cliques)


# -- projection and perfect configurations ------------------------------------

def phi(layout: GadgetLayout, sigma_star) -> np.ndarray:
    """Base configuration by terminal majority in every gadget."""
    s = as_spins(sigma_star)
    t = np.asarray(layout.terminals)
    return np.where(s[t].sum(axis=1) > 0, 1, -1).astype(np.int8)


def perfect_config(layout: GadgetLayout, sigma) -> np.ndarray:
    """T_v = sigma(v), A_v = -sigma(v), B_v = sigma(v) for every base vertex."""
    sigma = as_spins(sigma, layout.n_base)
    out = np.zeros(layout.spec.block * layout.n_base, dtype=np.int8)
    for v in range(layout.n_base):
        out[list(layout.terminals[v])] = sigma[v]
        out[list(layout.a_sets[v])] = -sigma[v]
        if layout.b_sets[v]:
            out[list(layout.b_sets[v])] = sigma[v]
    return out


# -- gadget tables ------------------------------------------------------------

@dataclass(frozen=True)
class GadgetAudit:
    kind: str
    max_cut: int
    argmax: tuple[str, ...]
    second_best: int
    histogram: tuple[int, ...]


def gadget_internal_audit(kind: str = "H") -> GadgetAudit:
    """Enumerate every gadget configuration and rank internal cut sizes."""
    g = build_gadget(kind)
    cuts = [cut_size(g, spins_from_index(i, g.n)) for i in range(1 << g.n)]
    best = max(cuts)
    argmax = tuple(
        "".join("+" if x > 0 else "-" for x in spins_from_index(i, g.n)) for i, c in enumerate(cuts) if c == best
    )
    second = max(c for c in cuts if c < best)
    return GadgetAudit(_spec(kind).kind, best, argmax, second, tuple(cut_histogram(g)))


def gadget_table(kind: str = "H") -> dict[int, list[int]]:
    """Terminal pattern -> internal cut polynomial over all completions.

    Pattern bit ``i`` is set iff terminal ``i`` has spin ``+``.
    """
    g = build_gadget(kind)
    table: dict[int, list[int]] = {t: [0] * (g.m + 1) for t in range(8)}
    for i in range(1 << g.n):
        table[i & 7][cut_size(g, spins_from_index(i, g.n))] += 1
    return {t: poly.trim(p) for t, p in table.items()}


def majority_count(kind: str, sign: int = 1) -> int:
    """Gadget configurations whose terminal majority is ``sign`` (by enumeration)."""
    g = build_gadget(kind)
    return sum(
        1 for i in range(1 << g.n) if ((i & 7).bit_count() >= 2) == (sign > 0)
    )


def fiber_count(layout: GadgetLayout, sigma=None) -> int:
    """``|phi^{-1}(sigma)|``; the same for every sigma, a product over gadgets."""
    if sigma is not None:
        sigma = as_spins(sigma, layout.n_base)
        return int(np.prod([majority_count(layout.kind, int(s)) for s in sigma], dtype=object))
    return majority_count(layout.kind) ** layout.n_base


# -- Z_sigma by gadget marginalisation ----------------------------------------

def _contract(factors: list[tuple[tuple[int, ...], np.ndarray]]):
    """Sum-product over binary variables by greedy variable elimination.

    Factors are ``(variables, object-array of shape (2,)*len(variables))``.
    """
    factors = list(factors)
    variables = {x for vs, _ in factors for x in vs}
    while variables:
        def scope(x):
            return set().union(*(vs for vs, _ in factors if x in vs))
        x = min(sorted(variables), key=lambda y: len(scope(y)))
        new_vars = tuple(sorted(scope(x)))
        involved = [f for f in factors if x in f[0]]
        factors = [f for f in factors if x not in f[0]]
        prod = None
        for vs, arr in involved:
            aligned = np.transpose(arr, [vs.index(y) for y in new_vars if y in vs])
            shape = [2 if y in vs else 1 for y in new_vars]
            aligned = aligned.reshape(shape)
            prod = aligned if prod is None else prod * aligned
        summed = prod.sum(axis=new_vars.index(x))
        rest = tuple(y for y in new_vars if y != x)
        factors.append((rest, np.asarray(summed, dtype=object).reshape((2,) * len(rest))))
        variables.discard(x)
    total = 1
    for _, arr in factors:
        total *= arr.item()
    return total


def _zsigma_factors(layout: GadgetLayout, sigma: np.ndarray, table: dict[int, int], x_cut):
    factors = []
    for v in range(layout.n_base):
        arr = np.zeros((2, 2, 2), dtype=object)
        for t in range(8):
            maj = 1 if t.bit_count() >= 2 else -1
            arr[t & 1, (t >> 1) & 1, (t >> 2) & 1] = table[t] if maj == sigma[v] else 0
        factors.append((tuple(layout.terminals[v]), arr))
    for a, b in layout.external:
        arr = np.array([[1, x_cut], [x_cut, 1]], dtype=object)
        factors.append((tuple(sorted((a, b))), arr))
    return factors


def z_sigma_polynomial(layout: GadgetLayout, sigma, cap: int = Z_SIGMA_CAP) -> list[int]:
    """Exact ``Z_sigma(mu)`` as cut-polynomial coefficients.

    Each gadget's internal spins are summed out into its table (keyed by
    the terminal pattern, zeroed unless the majority matches ``sigma(v)``);
    the remaining sum over terminal spins and external edges is contracted
    by variable elimination. Polynomials travel Kronecker-packed.
    """
    check_cap(layout.n_base, cap, "base graph")
    sigma = as_spins(sigma, layout.n_base)
    bits = layout.spec.block * layout.n_base + 2
    table = {t: poly.pack(p, bits) for t, p in gadget_table(layout.kind).items()}
    packed = _contract(_zsigma_factors(layout, sigma, table, 1 << bits))
    return poly.trim(poly.unpack(packed, bits))


def z_sigma(layout: GadgetLayout, mu, sigma, cap: int = Z_SIGMA_CAP) -> WeightValue:
    return partition_eval(z_sigma_polynomial(layout, sigma, cap), mu)


def all_z_sigma(layout: GadgetLayout, cap: int = Z_SIGMA_CAP) -> dict[int, list[int]]:
    """Base configuration index -> ``Z_sigma`` polynomial, for every sigma."""
    return {i: z_sigma_polynomial(layout, spins_from_index(i, layout.n_base), cap)
            for i in range(1 << layout.n_base)}


def z_sigma_enumerated(out: ReductionOutput, cap: int = DEFAULT_ENUMERATION_CAP) -> dict[int, list[int]]:
    """Brute-force oracle: histogram all configurations of the reduced graph
    by (phi, cut) with no use of gadget tables."""
    g, lay = out.gstar, out.layout
    check_cap(g.n, cap)
    nb, m = lay.n_base, g.m
    blocks = GrayBlocks(g)
    k = blocks.k
    counts = np.zeros((1 << nb) * (m + 1), dtype=np.int64)
    low_terms = []
    for v in range(nb):
        vec = np.zeros(1 << k, dtype=np.int32)
        for t in lay.terminals[v]:
            if t < k:
                vec += blocks.bits[t]
        low_terms.append(vec)
    for high, cuts in blocks:
        key = np.zeros(1 << k, dtype=np.int64)
        for v in range(nb):
            hi = sum((high >> (t - k)) & 1 for t in lay.terminals[v] if t >= k)
            key |= ((low_terms[v] + hi) >= 2).astype(np.int64) << v
        counts += np.bincount(key * (m + 1) + cuts, minlength=counts.size)
    table = counts.reshape(1 << nb, m + 1)
    return {i: poly.trim([int(c) for c in table[i]]) for i in range(1 << nb)}


@dataclass(frozen=True)
class SandwichReport:
    sigma: str
    cut: int
    lower_ok: bool
    upper_ok: bool
    degree: int
    expected_degree: int
    mass: int
    expected_mass: int
    witness: str | None = None

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def sandwich_check(layout: GadgetLayout, sigma, coeffs: list[int] | None = None) -> SandwichReport:
    """Check ``mu^(P n + c) <= Z_sigma <= F^n mu^(P n + c)`` for all ``mu >= 1``.

    ``P`` is the perfect internal cut (18 for H) and ``F`` the per-gadget
    fiber size (2^8 for H). Lower: the monomial is present. Upper: mass at
    most ``F^n`` and degree at most ``P n + c``.
    """
    sigma = as_spins(sigma, layout.n_base)
    spec = layout.spec
    if coeffs is None:
        coeffs = z_sigma_polynomial(layout, sigma)
    c = cut_size(layout.base, sigma)
    top = spec.perfect_cut * layout.n_base + c
    bound = 2 ** (spec.fiber_bits * layout.n_base)
    lower_ok = poly.dominates_monomial(coeffs, 1, top)
    upper_ok = poly.dominated_by_monomial(coeffs, bound, top)
    witness = None
    if not lower_ok:
        witness = f"coefficient of mu^{top} is {coeffs[top] if top < len(coeffs) else 0}"
    elif not upper_ok:
        witness = f"degree {poly.degree(coeffs)} / mass {sum(coeffs)} exceed mu^{top}, {bound}"
    return SandwichReport(
        "".join("+" if x > 0 else "-" for x in sigma), c, lower_ok, upper_ok,
        poly.degree(coeffs), top, sum(coeffs), bound, witness,
    )


def weight_gain_from_perfecting(kind: str = "H") -> int:
    """Smallest change in (internal + external) cut from making one gadget perfect.

    Enumerates every gadget configuration with terminal majority ``+`` and
    every spin pattern on the three external neighbours; a non-negative
    result means perfecting a gadget never lowers the weight.
    """
    g = build_gadget(kind)
    spec = _spec(kind)
    worst = None
    for i in range(1 << g.n):
        if (i & 7).bit_count() < 2:
            continue
        s = spins_from_index(i, g.n)
        internal = cut_size(g, s)
        for ext in range(8):
            outside = [1 if (ext >> r) & 1 else -1 for r in range(3)]
            before = internal + sum(s[r] != outside[r] for r in range(3))
            after = spec.perfect_cut + sum(1 != outside[r] for r in range(3))
            gain = after - before
            worst = gain if worst is None else min(worst, gain)
    return worst
