"""Simplicity deciders for the groupoid algebra and its AF core.

Every generalized cylinder ``C(u; F)`` equals ``u . E`` where the tail
``E = F(u) & F(v_1) & ...`` depends only on the follower states of the
words involved.  The states reachable in exactly ``n`` steps form an
eventually periodic sequence, so finitely many tails occur, and each is
tested for covering ``S`` under forward shift iterates.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

from .cylinder_lattice import TailSet, max_fiber
from .errors import ClassExplosion, NotApplicable
from .shift_kernel import FollowerAutomaton, Word, is_finite, render_word

log = logging.getLogger(__name__)

DEFAULT_CLASS_CAP = 1 << 16
EXTENSION_BUDGET = 512

SIMPLE = "simple"
NOT_SIMPLE = "not_simple"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class CylinderClass:
    """A realized tail with its witnesses.

    ``witnesses`` lists every ``(u, F)`` found with this tail and length
    residue; the first one is the canonical witness.
    """

    witness_u: Word
    witness_F: tuple[Word, ...]
    tail: TailSet
    states: tuple[int, ...]
    residue: int
    witnesses: tuple[tuple[Word, tuple[Word, ...]], ...] = ()
    nonempty: bool = True

    def to_dict(self, symbols: tuple[str, ...]) -> dict[str, Any]:
        return {
            "u": render_word(self.witness_u, symbols),
            "F": [render_word(v, symbols) for v in self.witness_F],
            "tail_states": list(self.states),
        }


@dataclass
class Verdict:
    algebra: str
    status: str
    symbols: tuple[str, ...]
    classes: list[tuple[CylinderClass, int | None]]
    witness: dict[str, Any] | None
    caps: dict[str, Any]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        classes = []
        for c, m in self.classes:
            d = c.to_dict(self.symbols)
            d["m"] = m
            classes.append(d)
        return {
            "algebra": self.algebra,
            "status": self.status,
            "classes": classes,
            "witness": self.witness,
            "caps": dict(self.caps),
            "notes": list(self.notes),
        }


# -- reachable-state orbit -------------------------------------------------


def state_orbit(aut: FollowerAutomaton) -> tuple[list[frozenset[int]], int, int]:
    """``(D, t, p)`` with ``D[n]`` the states reached by words of length ``n``.

    ``D`` is listed up to index ``t + p - 1``; ``D[t + p] == D[t]``.
    """
    seen: dict[frozenset[int], int] = {}
    orbit: list[frozenset[int]] = []
    cur = frozenset({0})
    while cur not in seen:
        seen[cur] = len(orbit)
        orbit.append(cur)
        cur = frozenset(s for q in cur for s in aut.table[q] if s is not None)
    t = seen[cur]
    return orbit, t, len(orbit) - t


def _representatives(aut: FollowerAutomaton, n_max: int) -> list[dict[int, Word]]:
    """Lexicographically least word of each length reaching each state."""
    reps: list[dict[int, Word]] = [{0: ()}]
    for _ in range(n_max):
        nxt: dict[int, Word] = {}
        for q, w in sorted(reps[-1].items(), key=lambda kv: kv[1]):
            for x, s in enumerate(aut.table[q]):
                if s is None:
                    continue
                cand = w + (x,)
                if s not in nxt or cand < nxt[s]:
                    nxt[s] = cand
        reps.append(nxt)
    return reps


def _tail_of(aut: FollowerAutomaton, states) -> TailSet:
    e = TailSet.whole(aut)
    for q in states:
        e = e & TailSet.of_state(aut, q)
    return e


def _subsets(states: list[int], cap: int, rng: random.Random | None):
    """All nonempty subsets, or a deterministic subfamily when sampling."""
    if rng is None:
        for r in range(1, len(states) + 1):
            yield from combinations(states, r)
        return
    seen = set()
    for r in (1, 2):
        for g in combinations(states, r):
            seen.add(g)
            yield g
    for _ in range(cap):
        g = tuple(q for q in states if rng.random() < 0.5)
        if g and g not in seen:
            seen.add(g)
            yield g


def _collect(aut: FollowerAutomaton, class_cap: int, rng: random.Random | None) -> tuple[list[CylinderClass], int, int]:
    orbit, t, p = state_orbit(aut)
    orbit = orbit + [orbit[t]]
    reps = _representatives(aut, t + p)
    found: dict[tuple, list] = {}
    order: list[tuple] = []
    # lengths 1 .. t + p meet every residue of the eventual period
    for n in range(1, t + p + 1):
        states = sorted(orbit[n])
        for g in _subsets(states, class_cap, rng):
            tail = _tail_of(aut, g)
            if tail.is_empty():
                continue
            key = (tail.table, n % p)
            for q in g:
                u = reps[n][q]
                fam = tuple(sorted(reps[n][s] for s in g if s != q))
                if key not in found:
                    found[key] = [tail, g, []]
                    order.append(key)
                found[key][2].append((u, fam))
    classes = []
    for key in order:
        tail, g, wits = found[key]
        u, fam = wits[0]
        classes.append(CylinderClass(u, fam, tail, tuple(g), key[1], tuple(wits)))
    return classes, t, p


def realized_classes(aut: FollowerAutomaton, class_cap: int = DEFAULT_CLASS_CAP) -> list[CylinderClass]:
    """One class per realized (tail, length residue), in discovery order.

    Raises
    ------
    ClassExplosion
        If some ``2 ** |D_n|`` exceeds ``class_cap``.
    """
    orbit, _, _ = state_orbit(aut)
    widest = max(len(d) for d in orbit)
    if 2**widest > class_cap:
        raise ClassExplosion(f"2^{widest} subsets exceed the class cap {class_cap}")
    return _collect(aut, class_cap, None)[0]


def _classes_or_sample(aut: FollowerAutomaton, class_cap: int, seed: int) -> tuple[list[CylinderClass], bool, int, int]:
    orbit, _, _ = state_orbit(aut)
    sampled = 2 ** max(len(d) for d in orbit) > class_cap
    if sampled:
        log.warning("class cap %d exceeded; falling back to a sampled subfamily", class_cap)
    classes, t, p = _collect(aut, class_cap, random.Random(seed) if sampled else None)
    return classes, sampled, t, p


# -- covering ---------------------------------------------------------------


def shift_orbit(e: TailSet) -> list[TailSet]:
    """``E, sigma(E), sigma^2(E), ...`` up to the first repeat."""
    out: list[TailSet] = []
    seen = set()
    while e.table not in seen:
        seen.add(e.table)
        out.append(e)
        e = e.shift_image()
    return out


def covering_index(aut: FollowerAutomaton, e: TailSet) -> int | None:
    """Least ``m`` with ``E | sigma(E) | ... | sigma^m(E) == S``, or None."""
    whole = TailSet.whole(aut)
    acc = TailSet.empty(aut.symbols)
    for m, it in enumerate(shift_orbit(e)):
        acc = acc | it
        if acc.equals(whole):
            return m
    return None


def exact_index(aut: FollowerAutomaton, e: TailSet) -> int | None:
    """Least ``j`` with ``sigma^j(E) == S``, or None."""
    whole = TailSet.whole(aut)
    for j, it in enumerate(shift_orbit(e)):
        if it.equals(whole):
            return j
    return None


def stabilized_union(aut: FollowerAutomaton, u: Word, e: TailSet) -> TailSet:
    """Union of all forward iterates of ``u . E``."""
    acc = TailSet.empty(aut.symbols)
    for it in shift_orbit(e):
        acc = acc | it
    for k in range(len(u)):
        acc = acc | e.prepend(u[k:])
    return acc


def _check_applicable(aut: FollowerAutomaton) -> None:
    if is_finite(aut):
        raise NotApplicable("the shift space is finite")
    if max_fiber(aut, 1) == 1:
        raise NotApplicable("the shift map is injective")


def cylinder_tail(aut: FollowerAutomaton, u: Word, fam) -> TailSet:
    return _tail_of(aut, [aut.state_of(u)] + [aut.state_of(v) for v in fam])


def gamma_certificate(aut: FollowerAutomaton, u: Word, fam) -> dict[str, Any] | None:
    """Evidence that ``C(u; F)`` does not cover ``S``, or None if it does or is empty."""
    fam = tuple(fam)
    if any(len(v) != len(u) for v in fam):
        return None
    e = cylinder_tail(aut, u, fam)
    if e.is_empty():
        return None
    whole = TailSet.whole(aut)
    acc = stabilized_union(aut, u, e)
    if acc.equals(whole):
        return None
    missing = acc.shortest_missing(whole)
    sym = aut.symbols
    return {
        "u": render_word(u, sym),
        "F": [render_word(v, sym) for v in fam],
        "tail": e.to_dict(),
        "union": acc.to_dict(),
        "uncovered_word": render_word(missing, sym),
    }


def af_certificate(aut: FollowerAutomaton, u: Word, fam) -> dict[str, Any] | None:
    """Evidence that no single iterate of ``C(u; F)`` equals ``S``."""
    fam = tuple(fam)
    e = cylinder_tail(aut, u, fam)
    if e.is_empty() or exact_index(aut, e) is not None:
        return None
    whole = TailSet.whole(aut)
    sym = aut.symbols
    return {
        "u": render_word(u, sym),
        "F": [render_word(v, sym) for v in fam],
        "tail": e.to_dict(),
        "iterates": [
            {"acceptor": it.to_dict(), "uncovered_word": render_word(it.shortest_missing(whole), sym)}
            for it in shift_orbit(e)
        ],
    }


def verify_certificate(aut: FollowerAutomaton, algebra: str, witness: dict[str, Any]) -> bool:
    """Re-run the covering test for a NotSimple witness from its words alone."""
    sym = aut.symbols
    u = aut.word(witness["u"]) if witness["u"] else ()
    fam = tuple(aut.word(v) if v else () for v in witness["F"])
    if aut.state_of(u) is None or any(aut.state_of(v) is None for v in fam):
        return False
    if algebra == "O_S":
        again = gamma_certificate(aut, u, fam)
        if again is None:
            return False
        missing = aut.word(witness["uncovered_word"])
        acc = stabilized_union(aut, u, cylinder_tail(aut, u, fam))
        return aut.state_of(missing) is not None and not acc.has_prefix(missing)
    again = af_certificate(aut, u, fam)
    return again is not None and render_word(u, sym) == witness["u"]


def _extensions(aut: FollowerAutomaton, u: Word, fam, max_len: int, budget: list[int]):
    """``(u w, F w)`` for growing ``w`` with a nonempty tail, breadth first."""
    e = cylinder_tail(aut, u, fam)
    layer = [()]
    for _ in range(max_len - len(u)):
        nxt = []
        for w in layer:
            for x in range(len(aut.symbols)):
                w2 = w + (x,)
                if e.derivative(w2).is_empty():
                    continue
                if budget[0] <= 0:
                    return
                budget[0] -= 1
                nxt.append(w2)
                yield u + w2, tuple(v + w2 for v in fam)
        layer = nxt


def witness_len_cap(aut: FollowerAutomaton) -> int:
    _, t, p = state_orbit(aut)
    return 2 * (t + p) * aut.n_states


def decide_gamma_simple(
    aut: FollowerAutomaton,
    class_cap: int = DEFAULT_CLASS_CAP,
    length_cap: int | None = None,
    seed: int = 0xC0FFEE,
) -> Verdict:
    """Three-valued decision for simplicity of the groupoid algebra.

    Simple when every realized tail covers ``S`` under finitely many shift
    iterates; NotSimple when some concrete generalized cylinder, prefixed
    parts included, has a forward orbit union different from ``S``.
    """
    _check_applicable(aut)
    cap = witness_len_cap(aut) if length_cap is None else length_cap
    classes, sampled, t, p = _classes_or_sample(aut, class_cap, seed)
    caps = {"class_cap": class_cap, "witness_len_cap": cap, "sampled": sampled, "transient": t, "period": p}
    results = [(c, covering_index(aut, c.tail)) for c in classes]
    failing = [c for c, m in results if m is None]
    if not failing and not sampled:
        return Verdict("O_S", SIMPLE, aut.symbols, results, None, caps)
    for c in failing:
        for u, fam in c.witnesses:
            cert = gamma_certificate(aut, u, fam)
            if cert is not None:
                return Verdict("O_S", NOT_SIMPLE, aut.symbols, results, cert, caps)
    budget = [EXTENSION_BUDGET]
    for c in failing:
        for u2, fam2 in _extensions(aut, c.witness_u, c.witness_F, cap, budget):
            cert = gamma_certificate(aut, u2, fam2)
            if cert is not None:
                return Verdict("O_S", NOT_SIMPLE, aut.symbols, results, cert, caps)
    caps["extension_budget"] = EXTENSION_BUDGET
    reason = "class family was sampled" if sampled and not failing else (
        f"{len(failing)} tail(s) fail to cover but every witness up to length {cap} does"
    )
    log.warning("UNKNOWN simplicity verdict: %s", reason)
    return Verdict("O_S", UNKNOWN, aut.symbols, results, None, caps, [reason])


def decide_af_simple(
    aut: FollowerAutomaton,
    class_cap: int = DEFAULT_CLASS_CAP,
    seed: int = 0xC0FFEE,
) -> Verdict:
    """Exact decision for simplicity of the AF core.

    Simple iff every realized tail has a single shift iterate equal to ``S``.
    Only a sampled class family (cap exceeded) can yield Unknown.
    """
    _check_applicable(aut)
    classes, sampled, t, p = _classes_or_sample(aut, class_cap, seed)
    caps = {"class_cap": class_cap, "sampled": sampled, "transient": t, "period": p}
    results = [(c, exact_index(aut, c.tail)) for c in classes]
    for c, m in results:
        if m is None:
            cert = af_certificate(aut, c.witness_u, c.witness_F)
            return Verdict("AF_core", NOT_SIMPLE, aut.symbols, results, cert, caps)
    if sampled:
        reason = "class family was sampled"
        log.warning("UNKNOWN simplicity verdict: %s", reason)
        return Verdict("AF_core", UNKNOWN, aut.symbols, results, None, caps, [reason])
    return Verdict("AF_core", SIMPLE, aut.symbols, results, None, caps)
