"""Finite matrix representations of algebra elements.

``represent`` restricts a degree-zero element to the finite fiber
``sigma^-k(a)``; ``truncated_pi_x`` compresses the regular representation
at ``x`` to finitely many arrows with source ``x``.  Both give matrices
whose spectral norms are lower bounds for the C*-norm, and the level-``k``
fiber bound gives an upper bound ``K_k * sup_norm``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .cylinder_lattice import max_fiber
from .errors import BasisOverflow, InvalidPoint, LevelTooLow, NotCoreElement
from .sampling import random_point
from .shift_kernel import FollowerAutomaton, UPPoint, in_follower, periodic_points, words_of_length
from .star_algebra import Element, _evaluate, sup_norm

DEFAULT_SEED = 0xC0FFEE
BASIS_CAP = 5000


@dataclass(frozen=True)
class Fiber:
    base: UPPoint
    level: int
    points: tuple[UPPoint, ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FiberMatrix:
    fiber: Fiber
    entries: np.ndarray

    def norm(self) -> float:
        return spectral_norm(self.entries)


def fiber(aut: FollowerAutomaton, a: UPPoint, k: int) -> Fiber:
    """``{w a : |w| = k, w a in S}`` in lexicographic order of ``w``."""
    if k < 1:
        raise ValueError("level must be at least 1")
    if not aut.contains(a):
        raise InvalidPoint(f"{a.render(aut.symbols)} is not in the shift")
    pts = tuple(a.prepend(w) for w, q in words_of_length(aut, k) if in_follower(aut, q, a))
    return Fiber(a, k, pts)


def _check_core(e: Element, level: int) -> None:
    if not e.is_core():
        raise NotCoreElement("fiber representations need degree-zero elements without point masses")
    if e.max_length() > level:
        raise LevelTooLow(f"element has |u| = {e.max_length()} > level {level}")


def represent(f: Fiber, e: Element) -> FiberMatrix:
    """The matrix ``[e(x, 0, y)]`` over fiber points ``x, y``."""
    _check_core(e, f.level)
    n = len(f.points)
    m = np.zeros((n, n), dtype=complex)
    for i, x in enumerate(f.points):
        for j, y in enumerate(f.points):
            m[i, j] = _evaluate(e, x, 0, y)
    return FiberMatrix(f, m)


def spectral_norm(m: np.ndarray, rtol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on ``M^* M`` from the all-ones vector.

    The returned value is a Rayleigh-quotient estimate, hence never above
    the true norm.
    """
    if m.size == 0:
        return 0.0
    a = m.conj().T @ m
    x = np.ones(a.shape[0], dtype=complex)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = a @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(np.real(np.vdot(x, y)))
        x = y / ny
        if abs(new - lam) <= rtol * max(abs(new), 1e-300):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(float(np.real(np.vdot(x, a @ x))), 0.0)))


def default_samples(aut: FollowerAutomaton, seed: int = DEFAULT_SEED, n_random: int = 8) -> list[UPPoint]:
    """Periodic points of period at most 4, then pseudorandom valid points."""
    out: list[UPPoint] = []
    for n in range(1, 5):
        for p in sorted(periodic_points(aut, n)):
            if p not in out:
                out.append(p)
    rng = random.Random(seed)
    for _ in range(n_random):
        out.append(random_point(aut, rng))
    return out


def norm_bounds(
    aut: FollowerAutomaton,
    e: Element,
    k: int,
    samples: list[UPPoint] | None = None,
) -> tuple[float, float]:
    """``(lower, upper)`` with ``lower <= ||e|| <= upper``."""
    _check_core(e, k)
    if samples is None:
        samples = default_samples(aut)
    upper = max_fiber(aut, k) * sup_norm(e)
    lower = 0.0
    for a in samples:
        lower = max(lower, represent(fiber(aut, a, k), e).norm())
    return lower, upper


@dataclass(frozen=True)
class Compression:
    basis: tuple[tuple[UPPoint, int], ...]
    entries: np.ndarray

    def norm(self) -> float:
        return spectral_norm(self.entries)


def regular_basis(aut: FollowerAutomaton, x: UPPoint, level_cap: int, degree_cap: int) -> list[tuple[UPPoint, int]]:
    """Arrows ``(y, d, x)`` with ``sigma^j y = sigma^(j-d) x``, ``j <= L``, ``|d| <= D``."""
    seen: set[tuple[UPPoint, int]] = set()
    out: list[tuple[UPPoint, int]] = []
    for j in range(level_cap + 1):
        for d in range(-degree_cap, degree_cap + 1):
            if j - d < 0:
                continue
            b = x.shifted(j - d)
            for w, q in words_of_length(aut, j):
                if not in_follower(aut, q, b):
                    continue
                key = (b.prepend(w), d)
                if key not in seen:
                    seen.add(key)
                    out.append(key)
                    if len(out) > BASIS_CAP:
                        raise BasisOverflow(f"more than {BASIS_CAP} basis arrows")
    return out


def truncated_pi_x(e: Element, x: UPPoint, level_cap: int, degree_cap: int) -> Compression:
    """Compression of the regular representation at ``x``; entry ``[g, h] = e(g h^-1)``."""
    aut = e.aut
    if not aut.contains(x):
        raise InvalidPoint(f"{x.render(aut.symbols)} is not in the shift")
    basis = regular_basis(aut, x, level_cap, degree_cap)
    n = len(basis)
    m = np.zeros((n, n), dtype=complex)
    for i, (y, d) in enumerate(basis):
        for j, (y2, d2) in enumerate(basis):
            m[i, j] = _evaluate(e, y, d - d2, y2)
    return Compression(tuple(basis), m)
