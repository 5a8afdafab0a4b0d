"""Combinatorial layer for kidney exchange programs.

Compatibility graphs over donor-recipient pairs and non-directed donors
(NDDs), enumeration of transplant cycles and NDD-rooted chains, the
position-indexed arc set used by the PICEF encoding, attack patterns, and
the recourse-aware objective (pairs covered by both the initial and the
post-attack solution).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

Arc = Tuple[int, int]


class Policy(Enum):
    """Recourse policy: unrestricted re-matching, or fixing unharmed exchanges."""

    FULL_RECOURSE = "fr"
    FIX_SUCCESSFUL = "fse"


class ExchangeKind(Enum):
    CYCLE = "cycle"
    CHAIN = "chain"


@dataclass(frozen=True)
class CompatibilityGraph:
    """Directed compatibility graph.

    Vertices 0..num_pairs-1 are incompatible donor-recipient pairs; vertices
    num_pairs..num_pairs+num_ndds-1 are non-directed donors.  An arc (i, j)
    means the donor at i can donate to the recipient of pair j; arcs never
    enter an NDD.
    """

    num_pairs: int
    num_ndds: int
    arcs: Tuple[Arc, ...]

    def __post_init__(self):
        n = self.num_pairs + self.num_ndds
        seen = set()
        for (i, j) in self.arcs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"arc ({i},{j}) out of range for {n} vertices")
            if j >= self.num_pairs:
                raise ValueError(f"arc ({i},{j}) enters an NDD")
            if i == j:
                raise ValueError(f"self-loop ({i},{j})")
            if (i, j) in seen:
                raise ValueError(f"duplicate arc ({i},{j})")
            seen.add((i, j))

    @property
    def num_vertices(self) -> int:
        return self.num_pairs + self.num_ndds

    @property
    def pairs(self) -> range:
        return range(self.num_pairs)

    @property
    def ndds(self) -> range:
        return range(self.num_pairs, self.num_vertices)

    def is_pair(self, v: int) -> bool:
        return 0 <= v < self.num_pairs

    def is_ndd(self, v: int) -> bool:
        return self.num_pairs <= v < self.num_vertices

    @cached_property
    def arc_set(self) -> FrozenSet[Arc]:
        return frozenset(self.arcs)

    @cached_property
    def out_adj(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {v: [] for v in range(self.num_vertices)}
        for (i, j) in self.arcs:
            adj[i].append(j)
        for v in adj:
            adj[v].sort()
        return adj

    @cached_property
    def in_adj(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {v: [] for v in range(self.num_vertices)}
        for (i, j) in self.arcs:
            adj[j].append(i)
        for v in adj:
            adj[v].sort()
        return adj


@dataclass(frozen=True)
class Exchange:
    """A transplant cycle (pairs only) or an NDD-rooted chain.

    Cycles are stored in canonical rotation (smallest vertex id first); the
    closing arc back to the first vertex is implicit.  ``index`` is the
    exchange's position in its pool's enumeration order, or -1 when the
    exchange is free-standing.
    """

    kind: ExchangeKind
    vertices: Tuple[int, ...]
    index: int = -1

    @property
    def num_arcs(self) -> int:
        if self.kind is ExchangeKind.CYCLE:
            return len(self.vertices)
        return len(self.vertices) - 1

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        vs = self.vertices
        path = tuple(zip(vs, vs[1:]))
        if self.kind is ExchangeKind.CYCLE:
            return path + ((vs[-1], vs[0]),)
        return path

    def key(self) -> Tuple[ExchangeKind, Tuple[int, ...]]:
        return (self.kind, self.vertices)

    def validate(self, graph: CompatibilityGraph, K: int, L: int) -> None:
        """Raise ValueError unless this exchange is feasible on ``graph``."""
        vs = self.vertices
        if len(set(vs)) != len(vs):
            raise ValueError(f"repeated vertex in {self}")
        for arc in self.arcs:
            if arc not in graph.arc_set:
                raise ValueError(f"missing arc {arc} for {self}")
        if self.kind is ExchangeKind.CYCLE:
            if not all(graph.is_pair(v) for v in vs):
                raise ValueError(f"cycle {self} visits an NDD")
            if not 2 <= len(vs) <= K:
                raise ValueError(f"cycle {self} violates length bound {K}")
        else:
            if not graph.is_ndd(vs[0]):
                raise ValueError(f"chain {self} does not start at an NDD")
            if not all(graph.is_pair(v) for v in vs[1:]):
                raise ValueError(f"chain {self} revisits an NDD")
            if not 1 <= self.num_arcs <= L:
                raise ValueError(f"chain {self} violates length bound {L}")


def enumerate_cycles(graph: CompatibilityGraph, K: int) -> List[Exchange]:
    """All simple directed cycles through pairs with at most K arcs.

    Each cycle appears once, rotated so its smallest vertex comes first.
    Ordered by (length, vertex list); K < 2 yields no cycles.
    """
    cycles: List[Tuple[int, ...]] = []
    adj = graph.out_adj

    def extend(start: int, path: List[int]) -> None:
        v = path[-1]
        for w in adj[v]:
            if w == start and len(path) >= 2:
                cycles.append(tuple(path))
            elif (
                w > start
                and graph.is_pair(w)
                and w not in path
                and len(path) < K
            ):
                path.append(w)
                extend(start, path)
                path.pop()

    for s in graph.pairs:
        extend(s, [s])
    cycles.sort(key=lambda vs: (len(vs), vs))
    return [Exchange(ExchangeKind.CYCLE, vs) for vs in cycles]


def enumerate_chains(graph: CompatibilityGraph, L: int) -> List[Exchange]:
    """All simple NDD-rooted paths with between 1 and L arcs.

    Ordered by (arc count, vertex list).
    """
    chains: List[Tuple[int, ...]] = []
    adj = graph.out_adj

    def extend(path: List[int]) -> None:
        if len(path) >= 2:
            chains.append(tuple(path))
        if len(path) - 1 >= L:
            return
        for w in adj[path[-1]]:
            if w not in path:
                path.append(w)
                extend(path)
                path.pop()

    if L >= 1:
        for n in graph.ndds:
            extend([n])
    chains.sort(key=lambda vs: (len(vs), vs))
    return [Exchange(ExchangeKind.CHAIN, vs) for vs in chains]


@dataclass(frozen=True)
class PicefArc:
    """Arc (src, dst) usable at chain position ``pos`` (1 = out of the NDD)."""

    src: int
    dst: int
    pos: int


def picef_positions(graph: CompatibilityGraph, L: int) -> List[PicefArc]:
    """Position-indexed arcs: (i, j, l) such that some NDD-rooted simple path
    of length l-1 reaches i while avoiding j, and (i, j) is an arc.

    Ordered by (pos, src, dst).
    """
    found: Set[Tuple[int, int, int]] = set()
    adj = graph.out_adj

    def walk(path: List[int]) -> None:
        i = path[-1]
        pos = len(path)  # arcs out of `i` would sit at this position
        if pos > L:
            return
        for j in adj[i]:
            if j not in path:
                found.add((i, j, pos))
                walk(path + [j])

    for n in graph.ndds:
        walk([n])
    return [PicefArc(i, j, p) for (i, j, p) in sorted(found, key=lambda t: (t[2], t[0], t[1]))]


@dataclass
class ExchangePool:
    """Index over all enumerated exchanges: cycles first, then chains.

    ``per_vertex[j]`` lists the indices of exchanges whose vertex set
    contains j.
    """

    cycles: List[Exchange]
    chains: List[Exchange]
    per_vertex: Dict[int, List[int]] = field(default_factory=dict)

    def __post_init__(self):
        reindexed_cycles = []
        for i, c in enumerate(self.cycles):
            reindexed_cycles.append(Exchange(c.kind, c.vertices, i))
        off = len(self.cycles)
        reindexed_chains = []
        for i, d in enumerate(self.chains):
            reindexed_chains.append(Exchange(d.kind, d.vertices, off + i))
        self.cycles = reindexed_cycles
        self.chains = reindexed_chains
        self._by_key = {e.key(): e.index for e in self.exchanges}
        if not self.per_vertex:
            per_vertex: Dict[int, List[int]] = {}
            for e in self.exchanges:
                for v in e.vertices:
                    per_vertex.setdefault(v, []).append(e.index)
            self.per_vertex = per_vertex

    @property
    def exchanges(self) -> List[Exchange]:
        return self.cycles + self.chains

    def __len__(self) -> int:
        return len(self.cycles) + len(self.chains)

    def exchange(self, index: int) -> Exchange:
        if index < len(self.cycles):
            return self.cycles[index]
        return self.chains[index - len(self.cycles)]

    def index_of(self, e: Exchange) -> int:
        """Pool index of an exchange given by kind and vertex tuple."""
        try:
            return self._by_key[e.key()]
        except KeyError:
            raise KeyError(f"exchange {e.kind.value} {e.vertices} not in pool") from None

    def involving(self, v: int) -> List[int]:
        return self.per_vertex.get(v, [])


def build_pool(graph: CompatibilityGraph, K: int, L: int) -> ExchangePool:
    return ExchangePool(enumerate_cycles(graph, K), enumerate_chains(graph, L))


@dataclass(frozen=True)
class KepSolution:
    """A set of pairwise vertex-disjoint exchanges, stored by pool index."""

    selected: FrozenSet[int]

    @staticmethod
    def empty() -> "KepSolution":
        return KepSolution(frozenset())

    @staticmethod
    def of(indices: Iterable[int]) -> "KepSolution":
        return KepSolution(frozenset(indices))

    def exchanges(self, pool: ExchangePool) -> List[Exchange]:
        return [pool.exchange(i) for i in sorted(self.selected)]

    def vertices(self, pool: ExchangePool) -> Set[int]:
        vs: Set[int] = set()
        for e in self.exchanges(pool):
            vs.update(e.vertices)
        return vs

    def initial_pairs(self, pool: ExchangePool, graph: CompatibilityGraph) -> Set[int]:
        """Pairs covered by this solution (the recipients it serves)."""
        return {v for v in self.vertices(pool) if graph.is_pair(v)}

    def is_feasible(self, pool: ExchangePool) -> bool:
        seen: Set[int] = set()
        for e in self.exchanges(pool):
            for v in e.vertices:
                if v in seen:
                    return False
                seen.add(v)
        return True


@dataclass(frozen=True)
class Attack:
    """A set of withdrawn vertices, at most ``budget`` of them."""

    attacked: FrozenSet[int]
    budget: int

    def __post_init__(self):
        if len(self.attacked) > self.budget:
            raise ValueError(
                f"attack of size {len(self.attacked)} exceeds budget {self.budget}"
            )

    @staticmethod
    def of(vertices: Iterable[int], budget: int) -> "Attack":
        return Attack(frozenset(vertices), budget)

    def hits(self, e: Exchange) -> bool:
        return any(v in self.attacked for v in e.vertices)


def subchain_to(chain: Exchange, j: int) -> Exchange:
    """Smallest nonempty prefix of ``chain`` containing vertex j.

    For the chain's NDD this is the first arc; for a pair j it is the prefix
    ending at j.
    """
    if chain.kind is not ExchangeKind.CHAIN:
        raise ValueError("subchain_to expects a chain")
    if j not in chain.vertices:
        raise ValueError(f"vertex {j} not in chain {chain.vertices}")
    if j == chain.vertices[0]:
        return Exchange(ExchangeKind.CHAIN, chain.vertices[:2])
    end = chain.vertices.index(j)
    return Exchange(ExchangeKind.CHAIN, chain.vertices[: end + 1])


def prefix_subchains(chain: Exchange) -> List[Exchange]:
    """sub(d): the prefixes of ``chain`` ending at each of its pairs."""
    return [subchain_to(chain, j) for j in chain.vertices[1:]]


def enforceable_set(initial: KepSolution, pool: ExchangePool) -> List[Exchange]:
    """Initial cycles plus every prefix subchain of the initial chains.

    Exchanges carry their pool index.  Deterministic order (by pool index).
    """
    out: Dict[Tuple[ExchangeKind, Tuple[int, ...]], Exchange] = {}
    for e in initial.exchanges(pool):
        if e.kind is ExchangeKind.CYCLE:
            out[e.key()] = e
        else:
            for p in prefix_subchains(e):
                out[p.key()] = pool.exchange(pool.index_of(p))
    return sorted(out.values(), key=lambda e: e.index)


def surviving_structures(
    pool: ExchangePool, initial: KepSolution, u: Attack
) -> Tuple[Set[int], Dict[int, Set[int]]]:
    """(E_u, I_u): surviving exchange indices, and per vertex j the exchanges
    that would leave an enforced (partial) structure covering j under u.

    I_u[j] contains surviving cycles through j plus chains d through j whose
    prefix up to j has no attacked vertex.
    """
    survivors = {e.index for e in pool.exchanges if not u.hits(e)}
    per_vertex: Dict[int, Set[int]] = {}
    for e in pool.exchanges:
        for j in e.vertices:
            if e.kind is ExchangeKind.CYCLE:
                ok = e.index in survivors
            else:
                ok = not any(v in u.attacked for v in subchain_to(e, j).vertices)
            if ok:
                per_vertex.setdefault(j, set()).add(e.index)
    return survivors, per_vertex


def exchange_weight(e: Exchange, initial_pairs: Set[int]) -> int:
    """w_e(x): number of this exchange's vertices that are initially covered pairs."""
    return len(set(e.vertices) & initial_pairs)


def arc_weight(dst: int, initial_pairs: Set[int]) -> int:
    """PICEF arc weight: 1 iff the recipient is an initially covered pair."""
    return 1 if dst in initial_pairs else 0


def longest_unattacked_prefix(chain: Exchange, u: Attack) -> Optional[Exchange]:
    """Longest prefix subchain of ``chain`` with no attacked vertex, or None.

    This is the part of an initial chain that the FSE policy enforces.
    """
    best: Optional[Exchange] = None
    if chain.vertices[0] in u.attacked:
        return None
    for p in prefix_subchains(chain):
        if any(v in u.attacked for v in p.vertices):
            break
        best = p
    return best


def enforced_under_attack(
    initial: KepSolution, u: Attack, pool: ExchangePool
) -> List[Exchange]:
    """Structures the FSE policy fixes into the recourse solution under u:
    unattacked initial cycles and each initial chain's longest unattacked prefix.
    """
    enforced: List[Exchange] = []
    for e in initial.exchanges(pool):
        if e.kind is ExchangeKind.CYCLE:
            if not u.hits(e):
                enforced.append(e)
        else:
            p = longest_unattacked_prefix(e, u)
            if p is not None:
                enforced.append(pool.exchange(pool.index_of(p)))
    return enforced


def objective_value(
    initial: KepSolution,
    u: Attack,
    recourse: KepSolution,
    pool: ExchangePool,
    graph: CompatibilityGraph,
) -> int:
    """|P(x) ∩ P(x,u,y)|: pairs covered by both initial and recourse solutions."""
    for e in recourse.exchanges(pool):
        if u.hits(e):
            raise ValueError(f"recourse exchange {e.vertices} uses an attacked vertex")
    initial_pairs = initial.initial_pairs(pool, graph)
    recourse_pairs = recourse.initial_pairs(pool, graph)
    return len(initial_pairs & recourse_pairs)
