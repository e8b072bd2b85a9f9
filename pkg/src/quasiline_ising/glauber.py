"""Single-site Glauber (heat-bath) dynamics and exact small-chain analysis.

Random numbers come from SplitMix64 used in counter mode: draw ``i`` of a
stream is ``mix64(key + (i + 1) * GAMMA)``. A stream key is derived from
``(seed, chain_id, replicate)`` with ``numpy.random.SeedSequence`` so
replicates never share draws. Each step uses one draw for the vertex and one
or more for the accept decision (see ``_event``), identically in the Python
step and the compiled kernel, so both produce the same trajectory.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .enumeration import all_cut_sizes, check_cap
from .graphs import Graph
from .spin_models import _check_mu, as_spins, cut_size, gibbs_vector, log_of, mu_to_str

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_GAMMA_U64 = np.uint64(GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
SHIFT_BITS = 30
SHIFT = 2.0 ** -SHIFT_BITS
TRANSITION_CAP = 14
ALL_STARTS_CAP = 10


# -- RNG ----------------------------------------------------------------------

def stream_key(seed: int, *ids: int) -> int:
    """64-bit key of the stream for ``(seed, *ids)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(ids))
    return int(ss.generate_state(1, np.uint64)[0])


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class CounterRNG:
    """Python side of the SplitMix64 counter stream."""

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self.key + self.counter * GAMMA) & MASK64)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def below(self, n: int) -> int:
        return ((self.next_u64() >> 32) * n) >> 32


# -- acceptance ---------------------------------------------------------------

def acceptance_probability(mu, delta: int):
    """Probability of accepting a flip that changes the cut by ``delta``.

    Exact Fraction for rational mu.
    """
    mu = _check_mu(mu)
    if delta == 0:
        return Fraction(1, 2) if isinstance(mu, Fraction) else 0.5
    if isinstance(mu, Fraction):
        w = mu ** delta
        return w / (1 + w)
    return 1.0 / (1.0 + mu ** (-delta))


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


@dataclass(frozen=True)
class AcceptTable:
    """Per-delta event probability ``residual * 2**(-30 * shift)``.

    The flip is accepted when the event occurs (delta <= 0) or when it does
    not (delta > 0); the event is always the less likely outcome, so tiny
    probabilities like ``2**-76`` are decided without rounding to 0 or 1.
    """

    dmax: int
    shift: np.ndarray
    residual: np.ndarray
    accept_on_event: np.ndarray

    @classmethod
    def build(cls, mu, dmax: int) -> AcceptTable:
        log_mu = log_of(_check_mu(mu))
        size = 2 * dmax + 1
        shift = np.zeros(size, dtype=np.int64)
        residual = np.zeros(size, dtype=np.float64)
        accept = np.zeros(size, dtype=np.bool_)
        step = SHIFT_BITS * math.log(2)
        for i in range(size):
            x = (i - dmax) * log_mu
            # p(accept) = 1 / (1 + exp(-x)); the event has probability 1 / (1 + exp(|x|))
            log_s = -_softplus(abs(x))
            k = 0
            while log_s < -step:
                log_s += step
                k += 1
            shift[i] = k
            residual[i] = math.exp(log_s)
            accept[i] = x <= 0
        return cls(dmax, shift, residual, accept)


def _event(rng: CounterRNG, shift: int, residual: float) -> bool:
    for _ in range(shift):
        if rng.uniform() >= SHIFT:
            return False
    return rng.uniform() < residual


# -- chain state and single step ----------------------------------------------

@dataclass
class ChainState:
    config: np.ndarray
    time: int = 0
    key: int = 0
    counter: int = 0

    def copy(self) -> ChainState:
        return ChainState(self.config.copy(), self.time, self.key, self.counter)


def local_delta(g: Graph, spins: np.ndarray, v: int) -> int:
    """Cut change from flipping ``v``: same-spin neighbours minus opposite ones."""
    same = sum(1 for u in g.adj[v] if spins[u] == spins[v])
    return 2 * same - len(g.adj[v])


def glauber_step(g: Graph, mu, state: ChainState, table: AcceptTable | None = None) -> ChainState:
    table = table or AcceptTable.build(mu, max(g.max_degree, 1))
    rng = CounterRNG(state.key, state.counter)
    new = state.copy()
    v = rng.below(g.n)
    i = local_delta(g, new.config, v) + table.dmax
    if _event(rng, int(table.shift[i]), float(table.residual[i])) == bool(table.accept_on_event[i]):
        new.config[v] = -new.config[v]
    new.time += 1
    new.counter = rng.counter
    return new


# -- compiled kernel ----------------------------------------------------------

@numba.njit(cache=True)
def _mix64_nb(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _uniform_nb(key, counter):
    x = _mix64_nb(key + counter * _GAMMA_U64)
    return (x >> np.uint64(11)) * (2.0 ** -53)


@numba.njit(cache=True)
def _glauber_kernel(
    indptr, indices, spins, key, counter, steps,
    shift, residual, accept_on_event, dmax,
    group_of, group_count, group_thresh, group_weight,
    stop_kind, stop_arg, stride, out_t, out_cut, out_plus, out_balance, out_groups, out_state,
):
    n = spins.shape[0]
    track_state = out_state.shape[0] > 0
    cut = 0
    plus = 0
    state = 0
    for v in range(n):
        if spins[v] > 0:
            plus += 1
            if track_state:
                state |= 1 << v
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            if u > v and spins[u] != spins[v]:
                cut += 1
    balance = 0
    for gi in range(group_count.shape[0]):
        if group_count[gi] >= group_thresh[gi]:
            balance += group_weight[gi]

    nrec = 0
    hit = -1
    one = np.uint64(1)
    nn = np.uint64(n)
    t = 0
    while True:
        if stride > 0 and t % stride == 0 and nrec < out_t.shape[0]:
            out_t[nrec] = t
            out_cut[nrec] = cut
            out_plus[nrec] = plus
            out_balance[nrec] = balance
            if track_state:
                out_state[nrec] = state
            for gi in range(group_count.shape[0]):
                out_groups[nrec, gi] = group_count[gi]
            nrec += 1
        if stop_kind == 1 and ((balance > 0 and stop_arg > 0) or (balance == 0 and stop_arg == 0)
                               or (balance < 0 and stop_arg < 0)):
            hit = t
            break
        if stop_kind == 2 and cut >= stop_arg:
            hit = t
            break
        if t >= steps:
            break

        counter += one
        x = _mix64_nb(key + counter * _GAMMA_U64)
        v = np.int64(((x >> np.uint64(32)) * nn) >> np.uint64(32))
        sv = spins[v]
        same = 0
        deg = indptr[v + 1] - indptr[v]
        for p in range(indptr[v], indptr[v + 1]):
            if spins[indices[p]] == sv:
                same += 1
        delta = 2 * same - deg
        i = delta + dmax
        event = True
        for _ in range(shift[i]):
            counter += one
            if _uniform_nb(key, counter) >= SHIFT:
                event = False
                break
        if event:
            counter += one
            event = _uniform_nb(key, counter) < residual[i]
        if event == accept_on_event[i]:
            spins[v] = -sv
            cut += delta
            plus += 1 if sv < 0 else -1
            if track_state:
                state ^= 1 << v
            gi = group_of[v]
            if gi >= 0:
                before = group_count[gi] >= group_thresh[gi]
                group_count[gi] += 1 if sv < 0 else -1
                after = group_count[gi] >= group_thresh[gi]
                if before and not after:
                    balance -= group_weight[gi]
                elif after and not before:
                    balance += group_weight[gi]
        t += 1
    return t, counter, cut, hit, nrec


# -- chain runs ---------------------------------------------------------------

@dataclass(frozen=True)
class MajorityGroups:
    """Disjoint vertex groups; ``balance = sum(weight * [plus count >= threshold])``."""

    members: tuple[tuple[int, ...], ...]
    thresholds: tuple[int, ...]
    weights: tuple[int, ...]


OBSERVABLES = ("cut", "plus", "balance", "block_plus", "state")
STATE_MAX_N = 62


@dataclass
class ChainRun:
    times: np.ndarray
    columns: dict[str, np.ndarray]
    final: ChainState
    hitting_time: int | None
    until: str | None
    metadata: dict = field(default_factory=dict)

    @property
    def censored(self) -> bool:
        return self.until is not None and self.hitting_time is None

    def to_csv(self, path) -> None:
        names = list(self.columns)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *names])
            for r in range(len(self.times)):
                w.writerow([int(self.times[r]), *(int(self.columns[c][r]) for c in names)])

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, sort_keys=True)


def _parse_until(until: str | None, groups: MajorityGroups | None) -> tuple[int, int]:
    if until is None:
        return 0, 0
    text = until.replace(" ", "")
    if text.startswith("balance"):
        if groups is None:
            raise ValueError("balance events need majority groups")
        sign = {"balance<0": -1, "balance=0": 0, "balance==0": 0, "balance>0": 1}.get(text)
        if sign is None:
            raise ValueError(f"unknown event {until!r}")
        return 1, sign
    if text.startswith("cut>="):
        return 2, int(text[5:])
    raise ValueError(f"unknown event {until!r}")


def run_chain(
    g: Graph,
    mu,
    start,
    steps: int,
    seed: int = 0,
    observables: Sequence[str] = ("cut",),
    stride: int = 1,
    groups: MajorityGroups | None = None,
    until: str | None = None,
    stream: Sequence[int] = (0, 0),
) -> ChainRun:
    """Run Glauber dynamics for ``steps`` steps (or until the ``until`` event).

    ``observables`` are recorded every ``stride`` steps (``stride=0``: none).
    Events: ``"balance<0"``, ``"balance=0"``, ``"balance>0"``, ``"cut>=K"``.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    for name in observables:
        if name not in OBSERVABLES:
            raise ValueError(f"unknown observable {name!r}; choose from {OBSERVABLES}")
        if name in ("balance", "block_plus") and groups is None:
            raise ValueError(f"observable {name!r} needs majority groups")
        if name == "state" and g.n > STATE_MAX_N:
            raise ValueError(f"state observable needs n <= {STATE_MAX_N}")
    stop_kind, stop_arg = _parse_until(until, groups)
    mu = _check_mu(mu)
    spins = as_spins(start, g.n).copy()
    dmax = max(g.max_degree, 1)
    table = AcceptTable.build(mu, dmax)
    indptr, indices = g.csr

    group_of = np.full(g.n, -1, dtype=np.int64)
    if groups is not None:
        for gi, mem in enumerate(groups.members):
            group_of[list(mem)] = gi
        group_count = np.array([int(np.sum(spins[list(m)] > 0)) for m in groups.members], dtype=np.int64)
        group_thresh = np.array(groups.thresholds, dtype=np.int64)
        group_weight = np.array(groups.weights, dtype=np.int64)
    else:
        group_count = np.zeros(0, dtype=np.int64)
        group_thresh = group_weight = group_count

    nrec_max = steps // stride + 1 if stride > 0 else 0
    out_t = np.zeros(nrec_max, dtype=np.int64)
    out_cut = np.zeros(nrec_max, dtype=np.int64)
    out_plus = np.zeros(nrec_max, dtype=np.int64)
    out_balance = np.zeros(nrec_max, dtype=np.int64)
    out_groups = np.zeros((nrec_max, group_count.shape[0]), dtype=np.int64)
    out_state = np.zeros(nrec_max if "state" in observables else 0, dtype=np.int64)

    key = stream_key(seed, *stream)
    t, counter, _, hit, nrec = _glauber_kernel(
        indptr, indices, spins, np.uint64(key), np.uint64(0), steps,
        table.shift, table.residual, table.accept_on_event, dmax,
        group_of, group_count, group_thresh, group_weight,
        stop_kind, stop_arg, stride, out_t, out_cut, out_plus, out_balance, out_groups, out_state,
    )
    columns: dict[str, np.ndarray] = {}
    for name in observables:
        if name == "cut":
            columns["cut"] = out_cut[:nrec]
        elif name == "plus":
            columns["plus"] = out_plus[:nrec]
        elif name == "balance":
            columns["balance"] = out_balance[:nrec]
        elif name == "state":
            columns["state"] = out_state[:nrec]
        else:
            for gi in range(group_count.shape[0]):
                columns[f"block{gi}_plus"] = out_groups[:nrec, gi]
    meta = {
        "seed": seed,
        "stream": list(stream),
        "mu": mu_to_str(mu),
        "graph_hash": g.content_hash(),
        "steps": int(t),
        "until": until,
        "rng": "splitmix64-counter",
    }
    return ChainRun(
        out_t[:nrec], columns, ChainState(spins, int(t), key, int(counter)),
        None if hit < 0 else int(hit), until, meta,
    )


# -- exact analysis -----------------------------------------------------------

class TransitionMatrix:
    """Glauber transition matrix on all ``2**n`` configurations.

    ``deltas[x, v]`` is the cut change from flipping ``v`` in configuration
    ``x``; ``P(x, x ^ (1 << v)) = accept(deltas[x, v]) / n``.
    """

    def __init__(self, g: Graph, mu, cap: int = TRANSITION_CAP):
        check_cap(g.n, cap, "transition matrix graph")
        if g.n == 0:
            raise ValueError("empty state space")
        self.graph = g
        self.mu = _check_mu(mu)
        self.n = g.n
        self.dim = 1 << g.n
        idx = np.arange(self.dim, dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(g.n)) & 1).astype(np.int8)
        self.deltas = np.zeros((self.dim, g.n), dtype=np.int64)
        for v in range(g.n):
            for u in g.adj[v]:
                self.deltas[:, v] += np.where(bits[:, u] == bits[:, v], 1, -1)
        dmax = max(g.max_degree, 1)
        self.exact = isinstance(self.mu, Fraction)
        self.accept = {d: acceptance_probability(self.mu, d) for d in range(-dmax, dmax + 1)}
        self.cuts = all_cut_sizes(g)

    def entry(self, x: int, y: int):
        """Exact (rational mu) or float transition probability."""
        diff = x ^ y
        if diff == 0:
            return 1 - sum(self.entry(x, x ^ (1 << v)) for v in range(self.n))
        if diff & (diff - 1):
            return 0
        v = diff.bit_length() - 1
        return self.accept[int(self.deltas[x, v])] / self.n

    def row_sum(self, x: int):
        return sum(self.entry(x, y) for y in [x] + [x ^ (1 << v) for v in range(self.n)])

    def offdiagonal(self) -> sp.csr_matrix:
        acc = np.vectorize(lambda d: float(self.accept[int(d)]))(self.deltas) / self.n
        rows = np.repeat(np.arange(self.dim), self.n)
        cols = (np.arange(self.dim)[:, None] ^ (1 << np.arange(self.n))[None, :]).ravel()
        return sp.csr_matrix((acc.ravel(), (rows, cols)), shape=(self.dim, self.dim))

    def to_sparse(self) -> sp.csr_matrix:
        off = self.offdiagonal()
        diag = 1.0 - np.asarray(off.sum(axis=1)).ravel()
        return (off + sp.diags(diag)).tocsr()

    def gibbs(self) -> np.ndarray:
        return gibbs_vector(self.graph, self.mu, cap=TRANSITION_CAP)


def transition_matrix(g: Graph, mu, cap: int = TRANSITION_CAP) -> TransitionMatrix:
    return TransitionMatrix(g, mu, cap)


def detailed_balance_violations(t: TransitionMatrix) -> list[tuple[int, int]]:
    """Pairs where ``wt(x) P(x,y) != wt(y) P(y,x)`` exactly (rational mu only)."""
    if not t.exact:
        raise ValueError("exact detailed balance needs rational mu")
    bad = []
    for x in range(t.dim):
        wx = t.mu ** int(t.cuts[x])
        for v in range(t.n):
            y = x ^ (1 << v)
            if y < x:
                continue
            wy = t.mu ** int(t.cuts[y])
            if wx * t.entry(x, y) != wy * t.entry(y, x):
                bad.append((x, y))
    return bad


def stationary_distribution(t: TransitionMatrix) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` directly from the matrix."""
    p = t.to_sparse()
    a = (p.T - sp.identity(t.dim)).tolil()
    a[t.dim - 1, :] = np.ones(t.dim)
    b = np.zeros(t.dim)
    b[-1] = 1.0
    return spla.spsolve(a.tocsc(), b)


def spectral_gap(t: TransitionMatrix) -> float:
    """``1 - lambda_2`` from the symmetrised generator ``I - D^1/2 P D^-1/2``.

    For a reversible chain the symmetrised off-diagonal entries are
    ``sqrt(P(x,y) P(y,x))``, so the Gibbs weights are never formed.
    """
    off = t.offdiagonal()
    sym = off.multiply(off.T).sqrt()
    lap = sp.diags(np.asarray(off.sum(axis=1)).ravel()) - sym
    if t.dim <= 4096:
        vals = scipy.linalg.eigvalsh(lap.toarray())
    else:
        vals = spla.eigsh(lap.tocsc(), k=2, sigma=-1e-6, which="LM", return_eigenvectors=False)
    vals = np.sort(vals)
    return float(vals[1]) if t.dim > 1 else 1.0


def mixing_time_exact(
    t: TransitionMatrix,
    threshold=Fraction(1, 4),
    starts: Sequence[int] | None = None,
    max_steps: int = 10 ** 6,
) -> int:
    """Smallest ``t`` with ``max_start TV(P^t(start, .), pi) <= threshold``."""
    if starts is None:
        if t.n > ALL_STARTS_CAP:
            raise ValueError(f"n > {ALL_STARTS_CAP}: pass representative starts")
        starts = range(t.dim)
    starts = list(starts)
    pt = t.to_sparse().T.tocsr()
    pi = t.gibbs()
    dist = np.zeros((t.dim, len(starts)))
    dist[starts, np.arange(len(starts))] = 1.0
    thr = float(threshold)
    for step in range(max_steps + 1):
        tv = 0.5 * np.abs(dist - pi[:, None]).sum(axis=0).max()
        if tv <= thr:
            return step
        dist = pt @ dist
    raise RuntimeError(f"not mixed within {max_steps} steps")


@dataclass
class ConductanceReport:
    """Bottleneck data for a set ``A`` of configurations."""

    set_weight: Fraction | float
    boundary_weight: Fraction | float
    ratio: Fraction | float
    description: str
    boundary_is_bound: bool = False
    separator_weight: Fraction | float | None = None

    def mixing_lower_bound(self):
        """``1 / (4 * ratio)``: mixing time lower bound from the bottleneck ratio."""
        return 1 / (4 * self.ratio)


def bottleneck_ratio(
    g: Graph,
    mu,
    in_set: Callable[[np.ndarray], bool],
    description: str = "A",
    in_separator: Callable[[np.ndarray], bool] | None = None,
    cap: int = TRANSITION_CAP,
) -> ConductanceReport:
    """Exact ``pi(A)``, flow ``Q(A, A^c)`` and ratio ``Q / pi(A)`` by enumeration."""
    t = TransitionMatrix(g, mu, cap)
    idx = np.arange(t.dim)
    spins = np.where((idx[:, None] >> np.arange(g.n)) & 1, 1, -1).astype(np.int8)
    member = np.array([bool(in_set(s)) for s in spins])
    if not member.any():
        raise ValueError("set A is empty")
    mu = t.mu
    weights = [mu ** int(c) for c in t.cuts]
    z = sum(weights)
    set_w = sum(w for w, a in zip(weights, member) if a)
    flow = 0
    for x in np.flatnonzero(member):
        for v in range(g.n):
            y = int(x) ^ (1 << v)
            if not member[y]:
                flow += weights[x] * t.entry(int(x), y)
    pi_a, q = set_w / z, flow / z
    sep = None
    if in_separator is not None:
        sep = sum(w for w, s in zip(weights, spins) if in_separator(s)) / z
    return ConductanceReport(pi_a, q, q / pi_a, description, False, sep)
