"""Seeded generators of points, arrows and elements.

Used for default fiber samples and by the property and acceptance tests.
Every generator takes an explicit :class:`random.Random`.
"""

from __future__ import annotations

import random

from .cylinder_lattice import Region, atoms_of
from .shift_kernel import FollowerAutomaton, UPPoint, Word, words_of_length
from .star_algebra import Element, PointTerm, Term, element


def random_word(aut: FollowerAutomaton, rng: random.Random, max_len: int = 3, start: int = 0) -> Word:
    n = rng.randint(0, max_len)
    q, w = start, []
    for _ in range(n):
        options = [(a, t) for a, t in enumerate(aut.table[q]) if t is not None]
        a, q = rng.choice(options)
        w.append(a)
    return tuple(w)


def random_point(aut: FollowerAutomaton, rng: random.Random, walk: int = 6) -> UPPoint:
    return Region.whole(aut).sample(rng, walk)


def random_arrow(aut: FollowerAutomaton, rng: random.Random, max_len: int = 3) -> tuple[UPPoint, int, UPPoint]:
    """``(u y, |u| - |v|, v y)`` for a random tail ``y`` and legal prefixes."""
    y = random_point(aut, rng)
    atoms = atoms_of(aut)
    p = atoms.profile_of(y)
    prefixes = [w for n in range(max_len + 1) for w, q in words_of_length(aut, n) if q in p]
    u, v = rng.choice(prefixes), rng.choice(prefixes)
    if rng.random() < 0.25:
        v = u
    return y.prepend(u), len(u) - len(v), y.prepend(v)


def random_isotropy_arrow(aut: FollowerAutomaton, rng: random.Random, max_len: int = 2) -> tuple[UPPoint, int, UPPoint]:
    """An arrow ``(x, k, x)``, possibly with ``k != 0`` when ``x`` is ultimately periodic."""
    x = random_point(aut, rng)
    k = rng.choice([0, len(x.period), -len(x.period), 2 * len(x.period)])
    return x, k, x


def _random_tail(aut: FollowerAutomaton, rng: random.Random) -> Region:
    atoms = atoms_of(aut)
    r = rng.random()
    if r < 0.4:
        return Region.whole(aut)
    if r < 0.7:
        return Region.of_states(aut, rng.sample(range(aut.n_states), rng.randint(1, aut.n_states)))
    chosen = [p for p in atoms.profiles if rng.random() < 0.5]
    return Region(aut, frozenset(chosen or atoms.profiles[:1]))


def _random_coef(rng: random.Random, integer: bool) -> complex:
    if integer:
        return complex(rng.randint(-3, 3), rng.randint(-2, 2)) or 1
    return complex(rng.uniform(-2, 2), rng.uniform(-2, 2))


def random_element(
    aut: FollowerAutomaton,
    rng: random.Random,
    n_terms: int = 3,
    max_len: int = 2,
    points: bool = True,
    integer: bool = False,
) -> Element:
    """A random sum of terms, with an occasional point mass."""
    pieces = []
    for _ in range(rng.randint(1, n_terms)):
        u = random_word(aut, rng, max_len)
        v = random_word(aut, rng, max_len)
        pieces.append((_random_coef(rng, integer), Term(u, v, _random_tail(aut, rng))))
    if points and rng.random() < 0.3:
        x, k, y = random_arrow(aut, rng) if rng.random() < 0.5 else random_isotropy_arrow(aut, rng)
        pieces.append((_random_coef(rng, integer), PointTerm(x, k, y)))
    return element(aut, pieces)


def random_core_element(
    aut: FollowerAutomaton,
    rng: random.Random,
    n_terms: int = 3,
    max_len: int = 2,
    integer: bool = False,
) -> Element:
    """A random degree-zero element without point masses."""
    pieces = []
    for _ in range(rng.randint(1, n_terms)):
        n = rng.randint(0, max_len)
        u = random_word_of_length(aut, rng, n)
        v = random_word_of_length(aut, rng, n)
        pieces.append((_random_coef(rng, integer), Term(u, v, _random_tail(aut, rng))))
    return element(aut, pieces)


def random_diagonal(aut: FollowerAutomaton, rng: random.Random, n_terms: int = 3, max_len: int = 2, integer: bool = False) -> Element:
    pieces = []
    for _ in range(rng.randint(1, n_terms)):
        u = random_word(aut, rng, max_len)
        pieces.append((_random_coef(rng, integer), Term(u, u, _random_tail(aut, rng))))
    return element(aut, pieces)


def random_word_of_length(aut: FollowerAutomaton, rng: random.Random, n: int) -> Word:
    words = words_of_length(aut, n)
    return rng.choice(words)[0]


def random_single_term(aut: FollowerAutomaton, rng: random.Random, max_len: int = 2) -> Element:
    """``1_{u . E} t_u t_v^*`` for random legal ``u, v`` and tail ``E``; a partial isometry."""
    while True:
        u = random_word(aut, rng, max_len)
        v = random_word(aut, rng, max_len)
        e = element(aut, [(1, Term(u, v, _random_tail(aut, rng)))])
        if not e.is_zero():
            return e
