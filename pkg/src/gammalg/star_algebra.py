"""The dense *-algebra of the groupoid of a one-sided subshift.

An arrow is a triple ``(x, k, y)`` with ``sigma^a x = sigma^b y`` and
``a - b = k``.  Elements are finite sums of

* terms ``T(u, v, A)``: the indicator of ``{(u y, |u| - |v|, v y) : y in A}``
  where ``A`` is a single profile atom, and
* point masses at single arrows ``(x, k, y)`` of ultimately periodic points.

Canonical form: within each degree every term has the same ``|u|`` (the
largest one present, reached by splitting ``T(u, v, A)`` into
``sum_a T(ua, va, A_a)``), coefficients of equal keys are summed and
zeros dropped.  Distinct term keys then have disjoint supports, so the
coefficients are the values of the function.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Union

from .cylinder_lattice import Profile, Region, atoms_of, cylinder_region, fiber_count, profile_key
from .errors import IdentityViolation, NotAnArrow, NotCoreElement, NotUnitModulus
from .shift_kernel import FollowerAutomaton, UPPoint, Word, arrow_exists

DROP_EPS = 1e-12
TOLERANCE = 1e-9

TermKey = tuple[Word, Word, Profile]
PointKey = tuple[UPPoint, int, UPPoint]


@dataclass(frozen=True)
class Term:
    """``T(u, v, E)``; ``tail`` is a region, intersected with ``F(u) & F(v)`` on use."""

    u: Word
    v: Word
    tail: Region

    @property
    def degree(self) -> int:
        return len(self.u) - len(self.v)


@dataclass(frozen=True)
class PointTerm:
    """Indicator of the single arrow ``(x, k, y)``; ``y`` defaults to ``x`` (isotropy)."""

    x: UPPoint
    k: int
    y: UPPoint | None = None

    @property
    def target(self) -> UPPoint:
        return self.x if self.y is None else self.y


Piece = Union[Term, PointTerm]


def _is_gaussian_integer(c: complex) -> bool:
    c = complex(c)
    return c.real.is_integer() and c.imag.is_integer()


def term_sort_key(key: TermKey) -> tuple:
    u, v, p = key
    return (len(u) - len(v), len(u), u, v, profile_key(p))


def point_sort_key(key: PointKey) -> tuple:
    x, k, y = key
    return (k, x, y)


@dataclass(frozen=True, eq=False)
class Element:
    """A canonical element; build with :func:`canonicalize` or the helpers below."""

    aut: FollowerAutomaton
    terms: Mapping[TermKey, complex]
    points: Mapping[PointKey, complex] = field(default_factory=dict)
    exact: bool = True

    # -- structure ---------------------------------------------------------
    @property
    def lengths(self) -> dict[int, int]:
        """Common ``|u|`` per degree."""
        out: dict[int, int] = {}
        for u, v, _ in self.terms:
            out[len(u) - len(v)] = len(u)
        return out

    def degrees(self) -> set[int]:
        return {len(u) - len(v) for u, v, _ in self.terms} | {k for _, k, _ in self.points}

    def is_zero(self) -> bool:
        return not self.terms and not self.points

    def is_core(self) -> bool:
        return not self.points and all(len(u) == len(v) for u, v, _ in self.terms)

    def is_diagonal(self) -> bool:
        return all(u == v for u, v, _ in self.terms) and all(
            k == 0 and x == y for x, k, y in self.points
        )

    def max_length(self) -> int:
        return max((len(u) for u, _, _ in self.terms), default=0)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: Element) -> Element:
        return add(self, other)

    def __sub__(self, other: Element) -> Element:
        return add(self, scale(other, -1))

    def __neg__(self) -> Element:
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, Element):
            return multiply(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    @property
    def star(self) -> Element:
        return adjoint(self)

    def close_to(self, other: Element, tol: float = TOLERANCE) -> bool:
        return sup_norm(self - other) <= tol

    def __repr__(self) -> str:
        return f"Element({len(self.terms)} terms, {len(self.points)} points)"


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


def _valid_term(aut: FollowerAutomaton, key: TermKey) -> bool:
    u, v, p = key
    if p not in atoms_of(aut).profile_set:
        return False
    return aut.state_of(u) in p and aut.state_of(v) in p


def _refine(aut: FollowerAutomaton, key: TermKey, length: int) -> list[TermKey]:
    atoms = atoms_of(aut)
    out = [key]
    for _ in range(length - len(key[0])):
        out = [
            (u + (x,), v + (x,), c)
            for u, v, p in out
            for x, c in atoms.refine(p)
        ]
    return out


def canonicalize(
    aut: FollowerAutomaton,
    terms: Iterable[tuple[TermKey, complex]] = (),
    points: Iterable[tuple[PointKey, complex]] = (),
    exact: bool = True,
    drop_eps: float = DROP_EPS,
) -> Element:
    raw = [(k, complex(c)) for k, c in terms if c != 0 and _valid_term(aut, k)]
    length: dict[int, int] = {}
    for (u, v, _), _c in raw:
        d = len(u) - len(v)
        length[d] = max(length.get(d, 0), len(u))
    acc: dict[TermKey, complex] = defaultdict(complex)
    for key, c in raw:
        d = len(key[0]) - len(key[1])
        for k in _refine(aut, key, length[d]):
            acc[k] += c
    pts: dict[PointKey, complex] = defaultdict(complex)
    for key, c in points:
        if c != 0:
            pts[key] += complex(c)
    exact = exact and all(_is_gaussian_integer(c) for c in acc.values()) and all(
        _is_gaussian_integer(c) for c in pts.values()
    )
    eps = 0.0 if exact else drop_eps

    def keep(c: complex) -> bool:
        return abs(c) > eps if not exact else c != 0

    out_terms = {k: acc[k] for k in sorted(acc, key=term_sort_key) if keep(acc[k])}
    out_points = {k: pts[k] for k in sorted(pts, key=point_sort_key) if keep(pts[k])}
    return Element(aut, out_terms, out_points, exact)


def recanonicalize(e: Element) -> Element:
    return canonicalize(e.aut, e.terms.items(), e.points.items(), e.exact)


def element(aut: FollowerAutomaton, pieces: Iterable[tuple[complex, Piece]]) -> Element:
    """Build a canonical element from ``(coefficient, Term | PointTerm)`` pairs."""
    terms: list[tuple[TermKey, complex]] = []
    points: list[tuple[PointKey, complex]] = []
    exact = True
    for c, piece in pieces:
        exact = exact and _is_gaussian_integer(c)
        if isinstance(piece, Term):
            u, v = aut.word(piece.u), aut.word(piece.v)
            region = piece.tail & Region.of_states(aut, [aut.state_of(u), aut.state_of(v)])
            for p in sorted(region.profiles, key=profile_key):
                terms.append(((u, v, p), c))
        else:
            x, y = piece.x, piece.target
            if not (aut.contains(x) and aut.contains(y) and arrow_exists(x, piece.k, y)):
                raise NotAnArrow(f"({x}, {piece.k}, {y}) is not an arrow")
            points.append(((x, piece.k, y), c))
    return canonicalize(aut, terms, points, exact)


def zero(aut: FollowerAutomaton) -> Element:
    return Element(aut, {}, {}, True)


def one(aut: FollowerAutomaton) -> Element:
    return element(aut, [(1, Term((), (), Region.whole(aut)))])


def t(aut: FollowerAutomaton, u) -> Element:
    """The generator ``t_u``: indicator of ``{(u y, |u|, y)}``."""
    u = aut.word(u)
    return element(aut, [(1, Term(u, (), Region.whole(aut)))])


def partial(aut: FollowerAutomaton, u, v) -> Element:
    """``1_{A(u, v)} = t_u t_v^*``."""
    return element(aut, [(1, Term(aut.word(u), aut.word(v), Region.whole(aut)))])


def diagonal(aut: FollowerAutomaton, u, region: Region | None = None) -> Element:
    """Indicator of ``u . region`` on the unit space."""
    u = aut.word(u)
    return element(aut, [(1, Term(u, u, region or Region.whole(aut)))])


def add(f: Element, g: Element) -> Element:
    return canonicalize(
        f.aut,
        list(f.terms.items()) + list(g.terms.items()),
        list(f.points.items()) + list(g.points.items()),
        f.exact and g.exact,
    )


def scale(f: Element, c: complex) -> Element:
    return canonicalize(
        f.aut,
        [(k, c * a) for k, a in f.terms.items()],
        [(k, c * a) for k, a in f.points.items()],
        f.exact and _is_gaussian_integer(c),
    )


def linear_combination(aut: FollowerAutomaton, parts: Iterable[tuple[complex, Element]]) -> Element:
    terms, points, exact = [], [], True
    for c, e in parts:
        exact = exact and e.exact and _is_gaussian_integer(c)
        terms += [(k, c * a) for k, a in e.terms.items()]
        points += [(k, c * a) for k, a in e.points.items()]
    return canonicalize(aut, terms, points, exact)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def _term_times_term(aut, f: TermKey, g: TermKey) -> TermKey | None:
    atoms = atoms_of(aut)
    u, v, p = f
    w, z, q = g
    if len(v) >= len(w):
        if v[: len(w)] != w:
            return None
        vbar = v[len(w):]
        if atoms.pre_word(vbar, p) != q:
            return None
        return (u, z + vbar, p)
    if w[: len(v)] != v:
        return None
    wbar = w[len(v):]
    if atoms.pre_word(wbar, q) != p:
        return None
    return (u + wbar, z, q)


def _term_times_point(aut, f: TermKey, g: PointKey) -> PointKey | None:
    u, v, p = f
    y, k, y2 = g
    if y.prefix(len(v)) != v:
        return None
    s = y.shifted(len(v))
    if atoms_of(aut).profile_of(s) != p:
        return None
    return (s.prepend(u), len(u) - len(v) + k, y2)


def _point_times_term(aut, f: PointKey, g: TermKey) -> PointKey | None:
    x, k, y = f
    w, z, q = g
    if y.prefix(len(w)) != w:
        return None
    s = y.shifted(len(w))
    if atoms_of(aut).profile_of(s) != q:
        return None
    return (x, k + len(w) - len(z), s.prepend(z))


def multiply(f: Element, g: Element) -> Element:
    """Convolution product."""
    aut = f.aut
    by_w: dict[Word, list[tuple[TermKey, complex]]] = defaultdict(list)
    by_prefix: dict[Word, list[tuple[TermKey, complex]]] = defaultdict(list)
    w_lengths = sorted({len(w) for w, _, _ in g.terms})
    for key, c in g.terms.items():
        w = key[0]
        by_w[w].append((key, c))
        for i in range(len(w)):
            by_prefix[w[:i]].append((key, c))
    terms: list[tuple[TermKey, complex]] = []
    for fk, fc in f.terms.items():
        v = fk[1]
        candidates = []
        for n in w_lengths:
            if n <= len(v):
                candidates += by_w.get(v[:n], [])
        candidates += by_prefix.get(v, [])
        for gk, gc in candidates:
            r = _term_times_term(aut, fk, gk)
            if r is not None:
                terms.append((r, fc * gc))
    points: list[tuple[PointKey, complex]] = []
    for fk, fc in f.terms.items():
        for gk, gc in g.points.items():
            r = _term_times_point(aut, fk, gk)
            if r is not None:
                points.append((r, fc * gc))
    for fk, fc in f.points.items():
        for gk, gc in g.terms.items():
            r = _point_times_term(aut, fk, gk)
            if r is not None:
                points.append((r, fc * gc))
        for gk, gc in g.points.items():
            x, k, y = fk
            y2, l, z = gk
            if y == y2:
                points.append(((x, k + l, z), fc * gc))
    return canonicalize(aut, terms, points, f.exact and g.exact)


def product(*factors: Element) -> Element:
    out = factors[0]
    for e in factors[1:]:
        out = multiply(out, e)
    return out


def adjoint(e: Element) -> Element:
    return canonicalize(
        e.aut,
        [((v, u, p), c.conjugate()) for (u, v, p), c in e.terms.items()],
        [((y, -k, x), c.conjugate()) for (x, k, y), c in e.points.items()],
        e.exact,
    )


# ---------------------------------------------------------------------------
# evaluation and norms
# ---------------------------------------------------------------------------


def evaluate(e: Element, x: UPPoint, k: int, y: UPPoint) -> complex:
    """The value of ``e`` at the arrow ``(x, k, y)``."""
    aut = e.aut
    if not (aut.contains(x) and aut.contains(y) and arrow_exists(x, k, y)):
        raise NotAnArrow(f"({x}, {k}, {y}) is not an arrow")
    return _evaluate(e, x, k, y)


def _evaluate(e: Element, x: UPPoint, k: int, y: UPPoint) -> complex:
    total = 0j
    n = e.lengths.get(k)
    if n is not None and n - k >= 0:
        s = x.shifted(n)
        if y.shifted(n - k) == s:
            key = (x.prefix(n), y.prefix(n - k), atoms_of(e.aut).profile_of(s))
            total += e.terms.get(key, 0)
    total += e.points.get((x, k, y), 0)
    return total


def sup_norm(e: Element) -> float:
    """``sup |e(gamma)|`` over all arrows, computed exactly from the canonical form."""
    aut = e.aut
    atoms = atoms_of(aut)
    values = [abs(_evaluate(e, x, k, y)) for x, k, y in e.points]
    hit: dict[TermKey, list[PointKey]] = defaultdict(list)
    lengths = e.lengths
    for x, k, y in e.points:
        n = lengths.get(k)
        if n is None or n - k < 0:
            continue
        s = x.shifted(n)
        if y.shifted(n - k) == s:
            hit[(x.prefix(n), y.prefix(n - k), atoms.profile_of(s))].append((x, k, y))
    for key, c in e.terms.items():
        if key not in hit:
            values.append(abs(c))
            continue
        u, v, p = key
        pts = Region(aut, frozenset([p])).points(limit=len(hit[key]) + 1)
        covered = set(hit[key])
        if pts is None or any((s.prepend(u), len(u) - len(v), s.prepend(v)) not in covered for s in pts):
            values.append(abs(c))
    return max(values, default=0.0)


# ---------------------------------------------------------------------------
# expectations and grading
# ---------------------------------------------------------------------------


def diag_expectation(e: Element) -> Element:
    """Restriction to the unit space."""
    return canonicalize(
        e.aut,
        [(k, c) for k, c in e.terms.items() if k[0] == k[1]],
        [(k, c) for k, c in e.points.items() if k[1] == 0 and k[0] == k[2]],
        e.exact,
    )


def isotropy_expectation(e: Element) -> Element:
    """Restriction to the isotropy; off-unit isotropy arrows become point masses."""
    aut = e.aut
    atoms = atoms_of(aut)
    terms = [(k, c) for k, c in e.terms.items() if k[0] == k[1]]
    points = [(k, c) for k, c in e.points.items() if k[0] == k[2]]
    for (u, v, p), c in e.terms.items():
        if len(v) > len(u) and v[: len(u)] == u:
            w = v[len(u):]
            s = UPPoint((), w)
            if atoms.profile_of(s) == p:
                x = s.prepend(u)
                points.append(((x, -len(w), x), c))
        elif len(u) > len(v) and u[: len(v)] == v:
            w = u[len(v):]
            s = UPPoint((), w)
            if atoms.profile_of(s) == p:
                x = s.prepend(v)
                points.append(((x, len(w), x), c))
    return canonicalize(aut, terms, points, e.exact)


def gauge_act(z: complex, e: Element) -> Element:
    """``beta_z``: scale the degree-``k`` part by ``z^k``."""
    if abs(abs(z) - 1) > 1e-12:
        raise NotUnitModulus(f"|{z}| != 1")
    z = complex(z)
    exact = e.exact and z in (1, -1, 1j, -1j)
    return canonicalize(
        e.aut,
        [(k, c * z ** (len(k[0]) - len(k[1]))) for k, c in e.terms.items()],
        [(k, c * z ** k[1]) for k, c in e.points.items()],
        exact,
    )


def degree_component(d: int, e: Element) -> Element:
    return canonicalize(
        e.aut,
        [(k, c) for k, c in e.terms.items() if len(k[0]) - len(k[1]) == d],
        [(k, c) for k, c in e.points.items() if k[1] == d],
        e.exact,
    )


def gauge_average(e: Element, n: int) -> Element:
    """``(1/n) sum_r beta_{exp(2 pi i r / n)}(e)``."""
    parts = [(1 / n, gauge_act(cmath.exp(2j * math.pi * r / n), e)) for r in range(n)]
    return linear_combination(e.aut, parts)


# ---------------------------------------------------------------------------
# multiplicity, central projections, the isometry and the endomorphism
# ---------------------------------------------------------------------------


def _level_one_diagonal(aut: FollowerAutomaton, value) -> Element:
    """``sum_b sum_A value(m) T(b, b, A)`` where ``m`` is the level-1 fiber size on ``b A``."""
    terms = []
    for b in range(aut.n_letters):
        qb = aut.table[0][b]
        if qb is None:
            continue
        for p in atoms_of(aut).profiles:
            if qb in p:
                terms.append((((b,), (b,), p), value(fiber_count(aut, 1, p))))
    return canonicalize(aut, terms, exact=all(_is_gaussian_integer(c) for _, c in terms))


def mult_element_m(aut: FollowerAutomaton) -> Element:
    """``m(x) = #sigma^-1(sigma(x))`` as a diagonal element."""
    return _level_one_diagonal(aut, lambda m: m)


def m_power(aut: FollowerAutomaton, exponent: float) -> Element:
    return _level_one_diagonal(aut, lambda m: float(m) ** exponent)


def central_projection_pj(aut: FollowerAutomaton, j: int) -> Element:
    """Indicator of the locus ``m = j``."""
    return _level_one_diagonal(aut, lambda m: 1 if m == j else 0)


def isometry_v(aut: FollowerAutomaton) -> Element:
    """``v(x, 1, sigma x) = m(x)^(-1/2)``."""
    terms = []
    for b in range(aut.n_letters):
        qb = aut.table[0][b]
        if qb is None:
            continue
        for p in atoms_of(aut).profiles:
            if qb in p:
                m = fiber_count(aut, 1, p)
                terms.append((((b,), (), p), 1.0 if m == 1 else m ** -0.5))
    return canonicalize(aut, terms, exact=all(c == 1 for _, c in terms))


def endo_phi_hat(e: Element) -> Element:
    """``phi_hat(f)(x, y) = m(x)^(-1/2) m(y)^(-1/2) f(sigma x, sigma y)`` on core elements."""
    if e.points or any(len(u) != len(v) for u, v, _ in e.terms):
        raise NotCoreElement("phi_hat is defined on degree-zero elements without point masses")
    aut = e.aut
    lifted = []
    for (u, v, p), c in e.terms.items():
        for a in range(aut.n_letters):
            if aut.state_of((a,) + u) not in p:
                continue
            for b in range(aut.n_letters):
                if aut.state_of((b,) + v) in p:
                    lifted.append((((a,) + u, (b,) + v, p), c))
    body = canonicalize(aut, lifted, exact=e.exact)
    half = m_power(aut, -0.5)
    return multiply(multiply(half, body), half)


def cylinder_projection(aut: FollowerAutomaton, u, words: Iterable, tol: float = TOLERANCE) -> Element:
    """``P(1_A(u,v1) 1_A(v1,v2) ... 1_A(vN,u))``, checked against ``1_{C'(u;F)}``."""
    u = aut.word(u)
    words = [aut.word(w) for w in words]
    chain = [u] + words + [u]
    prod = one(aut)
    for a, b in zip(chain, chain[1:]):
        prod = multiply(prod, partial(aut, a, b))
    lhs = diag_expectation(prod)
    rhs = diagonal(aut, u, cylinder_region(aut, u, words))
    if sup_norm(lhs - rhs) > tol:
        raise IdentityViolation("P(1_A(u,v1) ... 1_A(vN,u)) != 1_{C'(u;F)}")
    return lhs


form200_projection = cylinder_projection
