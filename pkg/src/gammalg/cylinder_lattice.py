"""Set algebra for closed sofic sets of tails and their Boolean refinements.

Two kinds of tail sets live here.

:class:`TailSet` is a closed set given by the canonical acceptor of its
prefix language.  It is closed under intersection, union, left quotient,
shift image and closure of differences.

:class:`Region` is an exact, not necessarily closed, set built from the
follower sets of one automaton.  Every tail ``y`` has a *profile*, the set
of automaton states ``q`` with ``y`` in ``F(q)``; the nonempty profile
classes (atoms) partition the shift, and a region is a finite union of
atoms.  Regions are what the dense *-algebra uses for term supports: they
admit exact complements, so disjoint-atom refinement never needs a
topological closure.
"""

from __future__ import annotations

import random
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any

import networkx as nx

from . import _automata
from ._automata import Table
from .errors import AlphabetMismatch, BadLength
from .shift_kernel import FollowerAutomaton, UPPoint, Word, in_follower, state_counts

Profile = frozenset[int]


# ---------------------------------------------------------------------------
# closed tail sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailSet:
    """A closed set of sequences, by the canonical acceptor of its prefixes.

    ``table is None`` is the distinguished empty set.
    """

    symbols: tuple[str, ...]
    table: Table | None

    @classmethod
    def empty(cls, symbols: tuple[str, ...]) -> TailSet:
        return cls(symbols, None)

    @classmethod
    def whole(cls, aut: FollowerAutomaton) -> TailSet:
        return cls(aut.symbols, aut.table)

    @classmethod
    def of_state(cls, aut: FollowerAutomaton, q: int | None) -> TailSet:
        if q is None:
            return cls.empty(aut.symbols)
        return cls(aut.symbols, _automata.rooted_at(aut.table, q))

    @classmethod
    def follower(cls, aut: FollowerAutomaton, w) -> TailSet:
        """``F(w) = {y : w y in S}``."""
        return cls.of_state(aut, aut.state_of(w))

    @property
    def n_letters(self) -> int:
        return len(self.symbols)

    @property
    def n_states(self) -> int:
        return 0 if self.table is None else len(self.table)

    def is_empty(self) -> bool:
        return self.table is None

    def _check(self, other: TailSet) -> None:
        if self.symbols != other.symbols:
            raise AlphabetMismatch(f"{self.symbols} vs {other.symbols}")

    def _succ(self, q: int):
        return ((a, t) for a, t in enumerate(self.table[q]) if t is not None)

    def intersect(self, other: TailSet) -> TailSet:
        self._check(other)
        if self.is_empty() or other.is_empty():
            return TailSet.empty(self.symbols)
        a, b = self.table, other.table

        def succ(pair):
            p, q = pair
            return [
                (x, (a[p][x], b[q][x]))
                for x in range(self.n_letters)
                if a[p][x] is not None and b[q][x] is not None
            ]

        return TailSet(self.symbols, _automata.canonical_table(self.n_letters, (0, 0), succ))

    def union(self, other: TailSet) -> TailSet:
        self._check(other)
        if self.is_empty():
            return other
        if other.is_empty():
            return self
        a, b = self.table, other.table

        def succ(pair):
            p, q = pair
            out = []
            for x in range(self.n_letters):
                s = None if p is None else a[p][x]
                t = None if q is None else b[q][x]
                if s is not None or t is not None:
                    out.append((x, (s, t)))
            return out

        return TailSet(self.symbols, _automata.canonical_table(self.n_letters, (0, 0), succ))

    def relative_complement(self, other: TailSet) -> TailSet:
        """Closure of ``self \\ other``."""
        self._check(other)
        if self.is_empty() or other.is_empty():
            return self
        a, b = self.table, other.table
        # product with the second component allowed to die; keep nodes that can reach a dead one
        nodes, edges = _explore(
            (0, 0),
            lambda pr: [
                (x, (a[pr[0]][x], None if pr[1] is None else b[pr[1]][x]))
                for x in range(self.n_letters)
                if a[pr[0]][x] is not None
            ],
        )
        g = nx.DiGraph()
        g.add_nodes_from(range(len(nodes)))
        g.add_edges_from((i, j) for i, row in enumerate(edges) for _, j in row)
        targets = {i for i, n in enumerate(nodes) if n[1] is None}
        good = set(targets)
        for t in targets:
            good |= nx.ancestors(g, t)
        if 0 not in good:
            return TailSet.empty(self.symbols)
        return TailSet(self.symbols, _restricted_table(self.n_letters, edges, good))

    def equals(self, other: TailSet) -> bool:
        self._check(other)
        return self.table == other.table

    def is_subset(self, other: TailSet) -> bool:
        return self.intersect(other).equals(self)

    def derivative(self, word: Word) -> TailSet:
        """Left quotient ``{y : w y in self}``."""
        if self.is_empty():
            return self
        q = _automata.step(self.table, 0, word)
        if q is None:
            return TailSet.empty(self.symbols)
        return TailSet(self.symbols, _automata.rooted_at(self.table, q))

    def shift_image(self) -> TailSet:
        """``sigma(E)``, via subset construction over the first-letter successors."""
        if self.is_empty():
            return self
        t = self.table
        start = frozenset(s for s in t[0] if s is not None)

        def succ(subset):
            out = []
            for x in range(self.n_letters):
                nxt = frozenset(t[q][x] for q in subset if t[q][x] is not None)
                if nxt:
                    out.append((x, nxt))
            return out

        return TailSet(self.symbols, _automata.canonical_table(self.n_letters, start, succ))

    def prepend(self, word: Word) -> TailSet:
        """The closed set ``w . E``."""
        if self.is_empty() or not word:
            return self
        n = len(word)

        def succ(state):
            kind, i = state
            if kind == "w":
                nxt = ("w", i + 1) if i + 1 < n else ("e", 0)
                return [(word[i], nxt)]
            return [(x, ("e", s)) for x, s in enumerate(self.table[i]) if s is not None]

        return TailSet(self.symbols, _automata.canonical_table(self.n_letters, ("w", 0), succ))

    def contains(self, p: UPPoint) -> bool:
        if self.is_empty():
            return False
        return _automata.accepts_periodic(self.table, 0, p.transient, p.period)

    def has_prefix(self, word: Word) -> bool:
        return not self.is_empty() and _automata.step(self.table, 0, word) is not None

    def prefixes(self, n: int) -> set[Word]:
        if self.is_empty():
            return set()
        layer = [((), 0)]
        for _ in range(n):
            layer = [(w + (x,), s) for w, q in layer for x, s in enumerate(self.table[q]) if s is not None]
        return {w for w, _ in layer}

    def shortest_missing(self, universe: TailSet) -> Word | None:
        """Shortest prefix of ``universe`` that is not a prefix of ``self``."""
        if universe.is_empty():
            return None
        start = (0, None if self.is_empty() else 0)
        seen = {start}
        queue = deque([((), start)])
        while queue:
            w, (p, q) = queue.popleft()
            if q is None:
                return w
            for x, s in enumerate(universe.table[p]):
                if s is None:
                    continue
                nxt = (s, self.table[q][x])
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((w + (x,), nxt))
        return None

    def to_dict(self) -> dict[str, Any]:
        if self.table is None:
            return {"empty": True, "states": 0, "transitions": []}
        return {
            "empty": False,
            "states": len(self.table),
            "transitions": [list(row) for row in self.table],
        }

    # set-style operators
    __and__ = intersect
    __or__ = union

    def __le__(self, other: TailSet) -> bool:
        return self.is_subset(other)


def intersect(e: TailSet, g: TailSet) -> TailSet:
    return e.intersect(g)


def union(e: TailSet, g: TailSet) -> TailSet:
    return e.union(g)


def is_empty(e: TailSet) -> bool:
    return e.is_empty()


def equals(e: TailSet, g: TailSet) -> bool:
    return e.equals(g)


def is_subset(e: TailSet, g: TailSet) -> bool:
    return e.is_subset(g)


def relative_complement(e: TailSet, g: TailSet) -> TailSet:
    return e.relative_complement(g)


def shift_image(e: TailSet) -> TailSet:
    return e.shift_image()


def derivative(e: TailSet, w: Word) -> TailSet:
    return e.derivative(w)


def membership(e: TailSet, p: UPPoint) -> bool:
    return e.contains(p)


def _explore(root, succ):
    index = {root: 0}
    nodes = [root]
    edges: list[list[tuple[int, int]]] = []
    i = 0
    while i < len(nodes):
        row = []
        for x, t in succ(nodes[i]):
            j = index.get(t)
            if j is None:
                j = index[t] = len(nodes)
                nodes.append(t)
            row.append((x, j))
        edges.append(row)
        i += 1
    return nodes, edges


def _restricted_table(n_letters: int, edges, keep: set[int]) -> Table | None:
    return _automata.canonical_table(
        n_letters, 0, lambda i: [(x, j) for x, j in edges[i] if j in keep]
    )


# ---------------------------------------------------------------------------
# profile atoms
# ---------------------------------------------------------------------------


class Atoms:
    """The profile structure of a follower automaton.

    Nodes are the transformations ``q -> delta(q, z)`` for legal words
    ``z`` (``None`` where undefined).  Along any path the set of live
    coordinates only shrinks; the profile of an infinite legal sequence is
    the eventual live set.
    """

    def __init__(self, aut: FollowerAutomaton):
        self.aut = aut
        n = aut.n_states
        table = aut.table
        start = tuple(range(n))

        def succ(vec):
            out = []
            for x in range(aut.n_letters):
                if table[vec[0]][x] is None:
                    continue
                out.append((x, tuple(None if q is None else table[q][x] for q in vec)))
            return out

        self.nodes, self.edges = _explore(start, succ)
        self.live = [frozenset(q for q, t in enumerate(v) if t is not None) for v in self.nodes]
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.nodes)))
        flat = nx.DiGraph()
        flat.add_nodes_from(range(len(self.nodes)))
        for i, row in enumerate(self.edges):
            for _, j in row:
                graph.add_edge(i, j)
                if self.live[i] == self.live[j]:
                    flat.add_edge(i, j)
        self.graph = graph
        self.flat = flat
        # stable nodes carry an infinite path on which the live set stays constant
        cyclic = set()
        for comp in nx.strongly_connected_components(flat):
            v = next(iter(comp))
            if len(comp) > 1 or flat.has_edge(v, v):
                cyclic |= comp
        stable = set(cyclic)
        for v in cyclic:
            stable |= nx.ancestors(flat, v)
        self.stable = stable
        self.profiles: tuple[Profile, ...] = tuple(
            sorted({self.live[i] for i in stable}, key=profile_key)
        )
        self.profile_set = frozenset(self.profiles)
        self._pre: dict[tuple[int, Profile], Profile] = {}
        self._profiles_seen: dict[UPPoint, Profile] = {}
        self.children: dict[tuple[int, Profile], tuple[Profile, ...]] = {}
        for x in range(aut.n_letters):
            for p in self.profiles:
                pre = self.pre(x, p)
                if pre in self.profile_set:
                    self.children.setdefault((x, pre), ())
                    self.children[(x, pre)] += (p,)

    def pre(self, x: int, p: Profile) -> Profile:
        """Profile of ``x . y`` given the profile ``p`` of ``y``."""
        key = (x, p)
        out = self._pre.get(key)
        if out is None:
            table = self.aut.table
            out = frozenset(q for q in range(self.aut.n_states) if table[q][x] in p)
            self._pre[key] = out
        return out

    def pre_word(self, word: Word, p: Profile) -> Profile:
        for x in reversed(word):
            p = self.pre(x, p)
        return p

    def profile_of(self, y: UPPoint) -> Profile:
        out = self._profiles_seen.get(y)
        if out is None:
            out = frozenset(q for q in range(self.aut.n_states) if in_follower(self.aut, q, y))
            self._profiles_seen[y] = out
        return out

    def refine(self, p: Profile) -> list[tuple[int, Profile]]:
        """Atoms of ``{y : x y in A_p}`` for each letter ``x``."""
        return [
            (x, c)
            for x in range(self.aut.n_letters)
            for c in self.children.get((x, p), ())
        ]

    def good_nodes(self, profiles: frozenset[Profile]) -> set[int]:
        return {i for i in self.stable if self.live[i] in profiles}

    def useful_nodes(self, profiles: frozenset[Profile]) -> set[int]:
        good = self.good_nodes(profiles)
        out = set(good)
        for i in good:
            out |= nx.ancestors(self.graph, i)
        return out


@lru_cache(maxsize=64)
def atoms_of(aut: FollowerAutomaton) -> Atoms:
    return Atoms(aut)


def profile_key(p: Profile) -> tuple[int, tuple[int, ...]]:
    return (len(p), tuple(sorted(p)))


@dataclass(frozen=True)
class Region:
    """A finite union of profile atoms of ``aut`` (exact, possibly non-closed)."""

    aut: FollowerAutomaton
    profiles: frozenset[Profile]

    @property
    def atoms(self) -> Atoms:
        return atoms_of(self.aut)

    @classmethod
    def whole(cls, aut: FollowerAutomaton) -> Region:
        return cls(aut, atoms_of(aut).profile_set)

    @classmethod
    def empty(cls, aut: FollowerAutomaton) -> Region:
        return cls(aut, frozenset())

    @classmethod
    def of_states(cls, aut: FollowerAutomaton, states: Iterable[int | None]) -> Region:
        """The closed set ``F(q_1) & ... & F(q_r)``."""
        states = set(states)
        if None in states:
            return cls.empty(aut)
        return cls(aut, frozenset(p for p in atoms_of(aut).profiles if states <= p))

    @classmethod
    def follower(cls, aut: FollowerAutomaton, *words) -> Region:
        return cls.of_states(aut, [aut.state_of(w) for w in words] or [0])

    def _check(self, other: Region) -> None:
        if self.aut != other.aut:
            raise AlphabetMismatch("regions over different automata")

    def __and__(self, other: Region) -> Region:
        self._check(other)
        return Region(self.aut, self.profiles & other.profiles)

    def __or__(self, other: Region) -> Region:
        self._check(other)
        return Region(self.aut, self.profiles | other.profiles)

    def __sub__(self, other: Region) -> Region:
        self._check(other)
        return Region(self.aut, self.profiles - other.profiles)

    def complement(self) -> Region:
        return Region.whole(self.aut) - self

    def is_empty(self) -> bool:
        return not self.profiles

    def __le__(self, other: Region) -> bool:
        return self.profiles <= other.profiles

    def derivative(self, word) -> Region:
        word = self.aut.word(word)
        atoms = self.atoms
        return Region(
            self.aut,
            frozenset(p for p in atoms.profiles if atoms.pre_word(word, p) in self.profiles),
        )

    def contains(self, y: UPPoint) -> bool:
        return self.atoms.profile_of(y) in self.profiles

    def closure(self) -> TailSet:
        atoms = self.atoms
        useful = atoms.useful_nodes(self.profiles)
        if 0 not in useful:
            return TailSet.empty(self.aut.symbols)
        return TailSet(self.aut.symbols, _restricted_table(self.aut.n_letters, atoms.edges, useful))

    def is_closed(self) -> bool:
        """Whether the region equals its closure."""
        return _region_of_closed(self.closure(), self.aut) == self.profiles

    def points(self, limit: int = 10_000) -> list[UPPoint] | None:
        """All points if the region is finite (and has at most ``limit``), else ``None``."""
        return _finite_points(self, limit)

    def sample(self, rng: random.Random, walk: int = 6) -> UPPoint:
        return _sample_point(self, rng, walk)

    def sort_key(self) -> tuple:
        return tuple(profile_key(p) for p in sorted(self.profiles, key=profile_key))

    def to_dict(self) -> list[list[int]]:
        return [sorted(p) for p in sorted(self.profiles, key=profile_key)]


def _region_of_closed(tail: TailSet, aut: FollowerAutomaton) -> frozenset[Profile]:
    """Profiles whose atom meets ``tail`` (a superset description)."""
    atoms = atoms_of(aut)
    if tail.is_empty():
        return frozenset()
    out = set()
    # product of the profile graph with the tail acceptor
    nodes, edges = _explore(
        (0, 0),
        lambda pr: [
            (x, (j, tail.table[pr[1]][x]))
            for x, j in atoms.edges[pr[0]]
            if tail.table[pr[1]][x] is not None
        ],
    )
    g = nx.DiGraph()
    g.add_nodes_from(range(len(nodes)))
    for i, row in enumerate(edges):
        for _, j in row:
            if atoms.live[nodes[i][0]] == atoms.live[nodes[j][0]]:
                g.add_edge(i, j)
    for comp in nx.strongly_connected_components(g):
        v = next(iter(comp))
        if len(comp) > 1 or g.has_edge(v, v):
            out.add(atoms.live[nodes[v][0]])
    return frozenset(out)


def _finite_points(region: Region, limit: int) -> list[UPPoint] | None:
    atoms = region.atoms
    useful = atoms.useful_nodes(region.profiles)
    if 0 not in useful:
        return []
    good = atoms.good_nodes(region.profiles)
    sub = atoms.graph.subgraph(useful)
    cond = nx.condensation(sub)
    cyclic = {}
    for c, data in cond.nodes(data=True):
        members = data["members"]
        n_edges = sub.subgraph(members).number_of_edges()
        if n_edges > len(members):
            return None
        if n_edges == len(members):
            if not members <= good:
                return None
            cyclic[c] = members
    for c in cyclic:
        if set(cyclic) & nx.descendants(cond, c):
            return None
    in_cycle = {}
    for c, members in cyclic.items():
        for v in members:
            in_cycle[v] = c
    letter_of = {(i, j): x for i, row in enumerate(atoms.edges) for x, j in row}
    out: list[UPPoint] = []
    stack = [(0, ())]
    while stack:
        v, word = stack.pop()
        if v in in_cycle:
            cycle, u = [], v
            while True:
                nxt = next(j for _, j in atoms.edges[u] if j in useful and in_cycle.get(j) == in_cycle[v])
                cycle.append(letter_of[(u, nxt)])
                u = nxt
                if u == v:
                    break
            out.append(UPPoint(word, tuple(cycle)))
            if len(out) > limit:
                return None
            continue
        for x, j in atoms.edges[v]:
            if j in useful:
                stack.append((j, word + (x,)))
    return sorted(set(out))


def _sample_point(region: Region, rng: random.Random, walk: int) -> UPPoint:
    atoms = region.atoms
    useful = atoms.useful_nodes(region.profiles)
    if 0 not in useful:
        raise ValueError("cannot sample from an empty region")
    good = atoms.good_nodes(region.profiles)
    v, word = 0, []
    for _ in range(rng.randrange(walk + 1)):
        options = [(x, j) for x, j in atoms.edges[v] if j in useful]
        x, v = rng.choice(options)
        word.append(x)
    # steer into a good node
    if v not in good:
        parent: dict[int, tuple[int, int] | None] = {v: None}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            if u in good:
                break
            for x, j in atoms.edges[u]:
                if j in useful and j not in parent:
                    parent[j] = (u, x)
                    queue.append(j)
        path = []
        v = u
        while parent[u] is not None:
            u, x = parent[u]
            path.append(x)
        word.extend(reversed(path))
    # random walk inside the constant-live stable part until a node repeats
    seen = {v: len(word)}
    while True:
        options = [
            (x, j)
            for x, j in atoms.edges[v]
            if j in good and atoms.live[j] == atoms.live[v]
        ]
        x, v = rng.choice(options)
        word.append(x)
        if v in seen:
            i = seen[v]
            return UPPoint(tuple(word[:i]), tuple(word[i:]))
        seen[v] = len(word)


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrefixedSet:
    """``prefix . tail``; the empty set has an empty tail."""

    prefix: Word
    tail: TailSet

    def is_empty(self) -> bool:
        return self.tail.is_empty()

    def as_tailset(self) -> TailSet:
        return self.tail.prepend(self.prefix)


def _follower_states(aut: FollowerAutomaton, u: Word, words: Iterable[Word]) -> list[int | None]:
    return [aut.state_of(u)] + [aut.state_of(v) for v in words]


def gen_cylinder_unrestricted(aut: FollowerAutomaton, u, words) -> PrefixedSet:
    """``C'(u; F)``: points of ``C(u)`` whose tail may follow every word of ``F``."""
    u = aut.word(u)
    words = [aut.word(v) for v in words]
    tail = TailSet.whole(aut)
    for q in _follower_states(aut, u, words):
        tail = tail.intersect(TailSet.of_state(aut, q))
        if tail.is_empty():
            break
    return PrefixedSet(u, tail)


def gen_cylinder(aut: FollowerAutomaton, u, words) -> PrefixedSet:
    """Generalized cylinder ``C(u; F)``; all words of ``F`` must have length ``|u|``."""
    u = aut.word(u)
    words = [aut.word(v) for v in words]
    for v in words:
        if len(v) != len(u):
            raise BadLength(f"|{aut.render(v)}| != |{aut.render(u)}|")
    return gen_cylinder_unrestricted(aut, u, words)


def cylinder_region(aut: FollowerAutomaton, u, words=()) -> Region:
    """Tail region of ``C'(u; F)`` as an intersection of follower sets."""
    u = aut.word(u)
    return Region.of_states(aut, _follower_states(aut, u, [aut.word(v) for v in words]))


def fiber_count(aut: FollowerAutomaton, k: int, p: Profile) -> int:
    """``#{w in W_k : w y in S}`` for any tail ``y`` of profile ``p``."""
    counts = _counts(aut, k)
    return sum(counts[q] for q in p)


@lru_cache(maxsize=256)
def _counts(aut: FollowerAutomaton, k: int) -> tuple[int, ...]:
    return tuple(state_counts(aut, k))


def skl_tail_partition(aut: FollowerAutomaton, k: int) -> dict[int, Region]:
    """Map ``l -> {y : #{w in W_k : w y in S} = l}``.

    The pieces are exact regions; they are pairwise disjoint and cover the
    shift.  Counts are arbitrary-precision integers.
    """
    if k < 1:
        raise ValueError("level must be at least 1")
    out: dict[int, set[Profile]] = {}
    for p in atoms_of(aut).profiles:
        out.setdefault(fiber_count(aut, k, p), set()).add(p)
    return {l: Region(aut, frozenset(ps)) for l, ps in sorted(out.items())}


def max_fiber(aut: FollowerAutomaton, k: int) -> int:
    """``K_k = max #sigma^-k(sigma^k x)``."""
    return max(skl_tail_partition(aut, k))
