"""Deterministic prefix-language acceptors in canonical form.

Every acceptor used in the package recognizes a prefix-closed language
with no maximal words, i.e. the prefix language of a closed set of
one-sided sequences.  All states are accepting, transitions are partial,
and a missing transition means "leaves the language".

A canonical table is a tuple with one row per state; row ``q`` holds the
target state for each letter index (``None`` if undefined).  State 0 is
the root and states are numbered in breadth-first discovery order with
letters scanned in alphabet order, so two acceptors of the same language
have identical tables.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Hashable, Iterable

Table = tuple[tuple[int | None, ...], ...]


def canonical_table(
    n_letters: int,
    root: Hashable,
    succ: Callable[[Hashable], Iterable[tuple[int, Hashable]]],
) -> Table | None:
    """Explore, trim, minimize and renumber an implicitly given acceptor.

    ``succ(state)`` yields ``(letter_index, target)`` pairs.  Returns
    ``None`` when the root has no infinite path (empty set).
    """
    index = {root: 0}
    order = [root]
    edges: list[list[tuple[int, int]]] = []
    i = 0
    while i < len(order):
        row = []
        for a, t in succ(order[i]):
            j = index.get(t)
            if j is None:
                j = index[t] = len(order)
                order.append(t)
            row.append((a, j))
        edges.append(row)
        i += 1
    return _finish(n_letters, edges)


def table_from_edges(n_letters: int, edges: list[list[tuple[int, int]]]) -> Table | None:
    """Canonicalize an explicit edge list whose root is state 0."""
    return _finish(n_letters, edges)


def _finish(n_letters: int, edges: list[list[tuple[int, int]]]) -> Table | None:
    n = len(edges)
    alive = _infinite_states(edges)
    if not alive[0]:
        return None
    rows = [[None] * n_letters for _ in range(n)]
    for q in range(n):
        if alive[q]:
            for a, t in edges[q]:
                if alive[t]:
                    rows[q][a] = t
    return _minimize(n_letters, rows)


def _infinite_states(edges: list[list[tuple[int, int]]]) -> list[bool]:
    n = len(edges)
    outdeg = [len({t for _, t in row}) for row in edges]
    preds: list[set[int]] = [set() for _ in range(n)]
    for q, row in enumerate(edges):
        for _, t in row:
            preds[t].add(q)
    alive = [True] * n
    queue = deque(q for q in range(n) if outdeg[q] == 0)
    while queue:
        q = queue.popleft()
        if not alive[q]:
            continue
        alive[q] = False
        for p in preds[q]:
            if alive[p]:
                outdeg[p] -= 1
                if outdeg[p] == 0:
                    queue.append(p)
    return alive


def _minimize(n_letters: int, rows: list[list[int | None]]) -> Table:
    # restrict to states reachable from the root first
    reach = {0}
    stack = [0]
    while stack:
        q = stack.pop()
        for t in rows[q]:
            if t is not None and t not in reach:
                reach.add(t)
                stack.append(t)
    states = sorted(reach)
    block = {q: 0 for q in states}
    n_blocks = 1
    while True:
        sigs: dict[tuple, int] = {}
        new_block = {}
        for q in states:
            sig = (block[q],) + tuple(-1 if t is None else block[t] for t in rows[q])
            new_block[q] = sigs.setdefault(sig, len(sigs))
        block = new_block
        if len(sigs) == n_blocks:
            break
        n_blocks = len(sigs)
    rep: dict[int, int] = {}
    for q in states:
        rep.setdefault(block[q], q)
    # breadth-first renumbering from the root block
    number = {block[0]: 0}
    queue = deque([block[0]])
    out: list[tuple[int | None, ...]] = []
    while queue:
        b = queue.popleft()
        row = []
        for t in rows[rep[b]]:
            if t is None:
                row.append(None)
                continue
            tb = block[t]
            if tb not in number:
                number[tb] = len(number)
                queue.append(tb)
            row.append(number[tb])
        out.append(tuple(row))
    return tuple(out)


def step(table: Table, q: int | None, word: Iterable[int]) -> int | None:
    for a in word:
        if q is None:
            return None
        q = table[q][a]
    return q


def rooted_at(table: Table, q: int) -> Table:
    """Canonical table of the language read from state ``q``."""
    n_letters = len(table[0])
    return canonical_table(
        n_letters, q, lambda s: ((a, t) for a, t in enumerate(table[s]) if t is not None)
    )


def accepts_periodic(table: Table, q: int | None, transient: Iterable[int], period: tuple[int, ...]) -> bool:
    """Whether ``transient . period^inf`` is readable from ``q``."""
    q = step(table, q, transient)
    seen = set()
    while q is not None:
        if q in seen:
            return True
        seen.add(q)
        q = step(table, q, period)
    return False
