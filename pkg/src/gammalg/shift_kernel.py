"""Subshift presentations, follower-set automata and ultimately periodic points.

Words are tuples of letter indices into the (lexicographically sorted)
alphabet.  Public entry points also accept strings, which are split into
symbols by :meth:`FollowerAutomaton.word`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import networkx as nx

from . import _automata
from ._automata import Table
from .errors import EmptyShift, InvalidSpec, WrongPresentation

log = logging.getLogger(__name__)

Word = tuple[int, ...]

KINDS = ("full", "sft_forbidden", "sft_matrix", "sofic")


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubshiftSpec:
    """A finite presentation of a one-sided subshift.

    Exactly one of ``forbidden``, ``matrix`` or ``graph`` is set, matching
    ``kind`` (``"full"`` carries no payload).  ``graph`` is a pair
    ``(vertices, edges)`` with edges ``(source, target, label)``.
    """

    alphabet: tuple[str, ...]
    kind: str
    forbidden: tuple[str, ...] | None = None
    matrix: tuple[tuple[int, ...], ...] | None = None
    graph: tuple[tuple[str, ...], tuple[tuple[str, str, str], ...]] | None = None

    def __post_init__(self):
        if not self.alphabet:
            raise InvalidSpec("alphabet must be nonempty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InvalidSpec("alphabet symbols must be distinct")
        if any(not isinstance(s, str) or not s for s in self.alphabet):
            raise InvalidSpec("alphabet symbols must be nonempty strings")
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown presentation type {self.kind!r}")
        payloads = {
            "sft_forbidden": self.forbidden,
            "sft_matrix": self.matrix,
            "sofic": self.graph,
        }
        present = [k for k, v in payloads.items() if v is not None]
        expected = [] if self.kind == "full" else [self.kind]
        if present != expected:
            raise InvalidSpec(f"type {self.kind!r} needs exactly its own payload, got {present}")
        if self.kind == "sft_forbidden":
            for w in self.forbidden:
                if not w:
                    raise InvalidSpec("forbidden words must be nonempty")
                self.split(w)
        elif self.kind == "sft_matrix":
            n = len(self.alphabet)
            if len(self.matrix) != n or any(len(r) != n for r in self.matrix):
                raise InvalidSpec("adjacency matrix must be square and alphabet-indexed")
            if any(x not in (0, 1) for r in self.matrix for x in r):
                raise InvalidSpec("adjacency matrix entries must be 0 or 1")
        elif self.kind == "sofic":
            vertices, edges = self.graph
            vs = set(vertices)
            if len(vs) != len(vertices):
                raise InvalidSpec("graph vertices must be distinct")
            for s, t, lab in edges:
                if s not in vs or t not in vs:
                    raise InvalidSpec(f"edge {s}->{t} uses an unknown vertex")
                if lab not in self.alphabet:
                    raise InvalidSpec(f"edge label {lab!r} not in alphabet")

    @cached_property
    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self.alphabet))

    def split(self, text: str) -> Word:
        return split_word(text, self.symbols)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SubshiftSpec:
        if not isinstance(data, dict):
            raise InvalidSpec("spec must be a JSON object")
        try:
            alphabet = tuple(str(s) for s in data["alphabet"])
            kind = data["type"]
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"missing field: {exc}") from None
        forbidden = matrix = graph = None
        try:
            if "forbidden" in data:
                forbidden = tuple(str(w) for w in data["forbidden"])
            if "matrix" in data:
                matrix = tuple(tuple(int(x) for x in row) for row in data["matrix"])
            if "graph" in data:
                g = data["graph"]
                graph = (
                    tuple(str(v) for v in g["vertices"]),
                    tuple((str(e["from"]), str(e["to"]), str(e["label"])) for e in g["edges"]),
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed payload: {exc}") from None
        return cls(alphabet, kind, forbidden, matrix, graph)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"alphabet": list(self.alphabet), "type": self.kind}
        if self.forbidden is not None:
            out["forbidden"] = list(self.forbidden)
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.graph is not None:
            vertices, edges = self.graph
            out["graph"] = {
                "vertices": list(vertices),
                "edges": [{"from": s, "to": t, "label": lab} for s, t, lab in edges],
            }
        return out


def load_spec(path: str | Path) -> SubshiftSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpec(f"cannot read spec {path}: {exc}") from None
    return SubshiftSpec.from_dict(data)


def split_word(text: str, symbols: tuple[str, ...]) -> Word:
    """Split ``text`` into letter indices.

    Single-character alphabets use plain concatenation; otherwise symbols
    are separated by ``.``.
    """
    index = {s: i for i, s in enumerate(symbols)}
    if not text:
        return ()
    if all(len(s) == 1 for s in symbols):
        parts = list(text)
    else:
        parts = text.split(".")
    try:
        return tuple(index[p] for p in parts)
    except KeyError as exc:
        raise InvalidSpec(f"symbol {exc} not in alphabet") from None


def render_word(word: Word, symbols: tuple[str, ...]) -> str:
    sep = "" if all(len(s) == 1 for s in symbols) else "."
    return sep.join(symbols[a] for a in word)


# ---------------------------------------------------------------------------
# ultimately periodic points
# ---------------------------------------------------------------------------


def _primitive_root(period: Word) -> Word:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True, order=True)
class UPPoint:
    """The sequence ``transient . period^inf`` in canonical form.

    The period is reduced to its primitive root and the transient is then
    trimmed while its last letter matches the last letter of the period
    (rotating the period right), so equality is syntactic.
    """

    transient: Word
    period: Word

    def __post_init__(self):
        t, p = tuple(self.transient), tuple(self.period)
        if not p:
            raise ValueError("period must be nonempty")
        p = _primitive_root(p)
        while t and t[-1] == p[-1]:
            t = t[:-1]
            p = p[-1:] + p[:-1]
        object.__setattr__(self, "transient", t)
        object.__setattr__(self, "period", p)

    def letter_at(self, i: int) -> int:
        """The ``i``-th letter, 1-based."""
        if i < 1:
            raise IndexError("positions are 1-based")
        i -= 1
        if i < len(self.transient):
            return self.transient[i]
        return self.period[(i - len(self.transient)) % len(self.period)]

    def prefix(self, n: int) -> Word:
        return tuple(self.letter_at(i) for i in range(1, n + 1))

    def shifted(self, n: int = 1) -> UPPoint:
        t = len(self.transient)
        if n <= t:
            return UPPoint(self.transient[n:], self.period)
        r = (n - t) % len(self.period)
        return UPPoint((), self.period[r:] + self.period[:r])

    def prepend(self, word: Word) -> UPPoint:
        return UPPoint(tuple(word) + self.transient, self.period)

    def eventually_equal_shift(self, other: UPPoint) -> bool:
        """Whether the periodic parts are rotations of each other."""
        p, q = self.period, other.period
        return len(p) == len(q) and any(p[r:] + p[:r] == q for r in range(len(p)))

    def render(self, symbols: tuple[str, ...]) -> str:
        return f"{render_word(self.transient, symbols)}({render_word(self.period, symbols)})"


def arrow_exists(x: UPPoint, k: int, y: UPPoint) -> bool:
    """Whether ``(x, k, y)`` is an arrow: ``sigma^a x = sigma^b y`` with ``a - b = k``."""
    a = max(len(x.transient), len(y.transient) + k, 0, k)
    b = a - k
    return x.shifted(a) == y.shifted(b)


# ---------------------------------------------------------------------------
# follower automaton
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FollowerAutomaton:
    """Minimal deterministic acceptor of the language of a subshift.

    States are the distinct follower sets; state 0 is the root, i.e. the
    follower set of the empty word, which is the whole shift.  ``table``
    is in canonical breadth-first form.
    """

    symbols: tuple[str, ...]
    table: Table
    warnings: tuple[str, ...] = field(default=())
    spec: SubshiftSpec | None = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, FollowerAutomaton):
            return NotImplemented
        return self.symbols == other.symbols and self.table == other.table

    def __hash__(self):
        return hash((self.symbols, self.table))

    @property
    def n_states(self) -> int:
        return len(self.table)

    @property
    def n_letters(self) -> int:
        return len(self.symbols)

    @property
    def root(self) -> int:
        return 0

    def delta(self, q: int | None, word) -> int | None:
        return _automata.step(self.table, q, self.word(word))

    def state_of(self, word) -> int | None:
        """The follower-set state of ``word``, ``None`` if illegal."""
        return _automata.step(self.table, 0, self.word(word))

    def word(self, w) -> Word:
        if isinstance(w, str):
            return split_word(w, self.symbols)
        return tuple(w)

    def render(self, w: Word) -> str:
        return render_word(w, self.symbols)

    def point(self, transient, period) -> UPPoint:
        return UPPoint(self.word(transient), self.word(period))

    def contains(self, p: UPPoint) -> bool:
        return in_follower(self, 0, p)

    def transitions(self) -> list[tuple[int, int, int]]:
        return [
            (q, a, t)
            for q, row in enumerate(self.table)
            for a, t in enumerate(row)
            if t is not None
        ]

    def to_spec(self) -> SubshiftSpec:
        """Read the automaton back as a sofic presentation."""
        vertices = tuple(f"q{q}" for q in range(self.n_states))
        edges = tuple((f"q{q}", f"q{t}", self.symbols[a]) for q, a, t in self.transitions())
        return SubshiftSpec(self.symbols, "sofic", graph=(vertices, edges))

    def summary(self) -> dict[str, Any]:
        return {
            "states": self.n_states,
            "alphabet": list(self.symbols),
            "transitions": [
                {"from": q, "label": self.symbols[a], "to": t} for q, a, t in self.transitions()
            ],
        }


def in_follower(aut: FollowerAutomaton, q: int | None, p: UPPoint) -> bool:
    """Whether ``p`` lies in the follower set of state ``q``."""
    return _automata.accepts_periodic(aut.table, q, p.transient, p.period)


def _presentation_graph(spec: SubshiftSpec) -> tuple[list[Any], list[tuple[Any, Any, int]]]:
    idx = {s: i for i, s in enumerate(spec.symbols)}
    n = len(spec.symbols)
    if spec.kind == "full":
        return [0], [(0, 0, a) for a in range(n)]
    if spec.kind == "sft_matrix":
        order = [idx[s] for s in spec.alphabet]
        edges = []
        for i, row in enumerate(spec.matrix):
            for j, x in enumerate(row):
                if x:
                    edges.append((order[i], order[j], order[j]))
        return list(range(n)), edges
    if spec.kind == "sofic":
        vertices, raw = spec.graph
        return list(vertices), [(s, t, idx[lab]) for s, t, lab in raw]
    # forbidden words: states are the longest suffixes that are proper prefixes of a forbidden word
    words = [spec.split(w) for w in spec.forbidden]
    prefixes = {w[:i] for w in words for i in range(len(w))}

    def advance(s: Word, a: int) -> Word | None:
        t = s + (a,)
        if any(t[len(t) - len(w):] == w for w in words if len(w) <= len(t)):
            return None
        for i in range(len(t) + 1):
            if t[i:] in prefixes:
                return t[i:]
        return ()

    vertices, edges, stack, seen = [], [], [()], {()}
    while stack:
        s = stack.pop()
        vertices.append(s)
        for a in range(n):
            t = advance(s, a)
            if t is None:
                continue
            edges.append((s, t, a))
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return vertices, edges


def _cyclic_closure(vertices, edges) -> tuple[set, set]:
    """Vertices that can reach a cycle, and those reachable from a cycle."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(vertices)
    g.add_edges_from((s, t) for s, t, _ in edges)
    cyclic = set()
    for comp in nx.strongly_connected_components(g):
        v = next(iter(comp))
        if len(comp) > 1 or g.has_edge(v, v):
            cyclic |= comp
    forward = set(cyclic)
    for v in cyclic:
        forward |= nx.descendants(g, v)
    backward = set(cyclic)
    for v in cyclic:
        backward |= nx.ancestors(g, v)
    return backward, forward


def _subset_table(n_letters: int, keep: set, edges) -> Table | None:
    out: dict[Any, list[tuple[int, Any]]] = {}
    for s, t, a in edges:
        if s in keep and t in keep:
            out.setdefault(s, []).append((a, t))
    start = frozenset(keep)

    def succ(subset):
        by_letter: dict[int, set] = {}
        for s in subset:
            for a, t in out.get(s, ()):
                by_letter.setdefault(a, set()).add(t)
        return [(a, frozenset(ts)) for a, ts in sorted(by_letter.items())]

    if not start:
        return None
    return _automata.canonical_table(n_letters, start, succ)


def compile_spec(spec: SubshiftSpec) -> FollowerAutomaton:
    """Compile a presentation into the minimal follower-set automaton.

    Vertices with no infinite forward path are discarded, and so are
    vertices not reachable from a cycle, which enforces ``sigma(S) = S``.
    If the latter pruning changes the language a warning is recorded.
    """
    vertices, edges = _presentation_graph(spec)
    n = len(spec.symbols)
    backward, forward = _cyclic_closure(vertices, edges)
    table = _subset_table(n, backward & forward, edges)
    if table is None:
        raise EmptyShift("presentation has no bi-infinitely extendable path")
    warnings = []
    loose = _subset_table(n, backward, edges)
    if loose != table:
        msg = "pruned vertices unreachable from a cycle; language changed to enforce sigma(S) = S"
        log.warning(msg)
        warnings.append(msg)
    return FollowerAutomaton(spec.symbols, table, tuple(warnings), spec)


compile = compile_spec  # noqa: A001 - exported under the conventional name


def word_in_language(aut: FollowerAutomaton, w) -> bool:
    return aut.state_of(w) is not None


def words_of_length(aut: FollowerAutomaton, n: int, start: int = 0) -> list[tuple[Word, int]]:
    """All legal words of length ``n`` read from ``start`` with their end states, lexicographic."""
    layer: list[tuple[Word, int]] = [((), start)]
    for _ in range(n):
        layer = [
            (w + (a,), t)
            for w, q in layer
            for a, t in enumerate(aut.table[q])
            if t is not None
        ]
    return layer


def state_counts(aut: FollowerAutomaton, n: int) -> list[int]:
    """``N_n(q)``: number of legal words of length ``n`` whose follower state is ``q``."""
    counts = [0] * aut.n_states
    counts[0] = 1
    for _ in range(n):
        nxt = [0] * aut.n_states
        for q, c in enumerate(counts):
            if c:
                for t in aut.table[q]:
                    if t is not None:
                        nxt[t] += c
        counts = nxt
    return counts


def count_words(aut: FollowerAutomaton, n: int) -> tuple[int, list[int]]:
    """Exact ``|W_n(S)|`` together with the per-state counts."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    per_state = state_counts(aut, n)
    return sum(per_state), per_state


def is_valid(aut: FollowerAutomaton, p: UPPoint) -> bool:
    return aut.contains(p)


def shift(p: UPPoint) -> UPPoint:
    return p.shifted(1)


def points_equal(p: UPPoint, q: UPPoint) -> bool:
    return p == q


def letter_at(p: UPPoint, i: int) -> int:
    return p.letter_at(i)


def periodic_points(aut: FollowerAutomaton, n: int) -> set[UPPoint]:
    """Points with ``sigma^n(x) = x``, in canonical form."""
    if n < 1:
        raise ValueError("period must be at least 1")
    return {
        p
        for w, _ in words_of_length(aut, n)
        if aut.contains(p := UPPoint((), w))
    }


def _transition_digraph(aut: FollowerAutomaton) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    g.add_nodes_from(range(aut.n_states))
    for q, a, t in aut.transitions():
        g.add_edge(q, t, label=a)
    return g


def exists_aperiodic(aut: FollowerAutomaton) -> bool:
    """Whether some point is not ultimately periodic.

    Equivalent to: a strongly connected component carries more edges than
    vertices (i.e. it is not a single simple cycle).  All states are
    reachable from the root in a canonical table.
    """
    g = _transition_digraph(aut)
    for comp in nx.strongly_connected_components(g):
        n_edges = g.subgraph(comp).number_of_edges()
        if n_edges > len(comp):
            return True
    return False


def is_finite(aut: FollowerAutomaton) -> bool:
    """Whether the shift has finitely many points."""
    g = _transition_digraph(aut)
    cond = nx.condensation(g)
    cyclic = set()
    for c, data in cond.nodes(data=True):
        members = data["members"]
        n_edges = g.subgraph(members).number_of_edges()
        if n_edges > len(members):
            return False
        if n_edges == len(members):
            cyclic.add(c)
    for c in cyclic:
        if cyclic & nx.descendants(cond, c):
            return False
    return True


def sft_irreducible(spec: SubshiftSpec) -> bool:
    """Strong connectivity of the transition graph of a 0/1-matrix SFT."""
    if spec.kind != "sft_matrix":
        raise WrongPresentation("irreducibility is only decided for matrix presentations")
    g = nx.DiGraph()
    g.add_nodes_from(range(len(spec.alphabet)))
    for i, row in enumerate(spec.matrix):
        for j, x in enumerate(row):
            if x:
                g.add_edge(i, j)
    return nx.is_strongly_connected(g)


def point_ops(aut: FollowerAutomaton, p: UPPoint) -> dict[str, Any]:
    """Bundle of the basic point queries for ``p``."""
    return {
        "is_valid": aut.contains(p),
        "shift": p.shifted(1),
        "equal": lambda q: p == q,
        "letter_at": p.letter_at,
    }
