"""Occupation-number bases for fixed particle-number sectors.

Configurations are stored as integer bit words; bit ``j`` is the
occupation of site (or mode) ``j``, counting from zero.  For spinful
bases the global fermionic mode order is all spin-up modes on sites
``0..L-1`` followed by all spin-down modes on the same sites.  Every
sign convention in the package follows from that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .errors import CapacityError, DomainError

MAX_SITES = 12
MAX_MODES = 24


def popcount(word: int) -> int:
    return bin(word).count("1")


def words_with_popcount(n_bits: int, n_set: int) -> list[int]:
    """All ``n_bits``-bit words with ``n_set`` bits set, in increasing order."""
    words = [sum(1 << i for i in idx) for idx in combinations(range(n_bits), n_set)]
    words.sort()
    return words


def hop_sign(word: int, i: int, j: int) -> int:
    """Jordan-Wigner sign of ``c_i^dagger c_j`` acting on ``word``.

    Counts occupied modes strictly between ``i`` and ``j`` in ``word``.
    The caller guarantees ``j`` is occupied and ``i`` empty (or ``i == j``).
    """
    lo, hi = (i, j) if i < j else (j, i)
    mask = ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1) if hi > lo + 1 else 0
    return -1 if popcount(word & mask) % 2 else 1


@dataclass(frozen=True)
class SectorBasis:
    """Spinful basis with ``n_up`` spin-up and ``n_down`` spin-down fermions on ``L`` sites."""

    L: int
    n_up: int
    n_down: int
    states: tuple[tuple[int, int], ...]
    index_of: dict = field(repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def n_particles(self) -> int:
        return self.n_up + self.n_down

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class SpinlessBasis:
    """Spinless basis of ``n`` fermions on ``M`` modes."""

    M: int
    n: int
    states: tuple[int, ...]
    index_of: dict = field(repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def n_particles(self) -> int:
        return self.n

    def __len__(self) -> int:
        return len(self.states)


def build_sector_basis(L: int, n_up: int, n_down: int) -> SectorBasis:
    """Enumerate the ``(n_up, n_down)`` sector of an ``L``-site chain.

    States are sorted lexicographically on ``(up_word, down_word)``.

    Raises
    ------
    DomainError
        If a particle count is negative or exceeds ``L``, or ``L < 1``.
    CapacityError
        If ``L`` exceeds the desk-scale limit of 12 sites.
    """
    L, n_up, n_down = int(L), int(n_up), int(n_down)
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    if not (0 <= n_up <= L and 0 <= n_down <= L):
        raise DomainError(f"particle counts ({n_up}, {n_down}) out of range for L={L}")
    if L > MAX_SITES:
        raise CapacityError(
            f"L={L} exceeds the {MAX_SITES}-site limit "
            f"(dimension would be {comb(L, n_up) * comb(L, n_down)})"
        )
    ups = words_with_popcount(L, n_up)
    downs = words_with_popcount(L, n_down)
    states = tuple((u, d) for u in ups for d in downs)
    return SectorBasis(L, n_up, n_down, states, {s: i for i, s in enumerate(states)})


def build_spinless_basis(M: int, n: int) -> SpinlessBasis:
    """Enumerate ``n`` spinless fermions on ``M`` modes in increasing word order."""
    M, n = int(M), int(n)
    if not (0 <= n <= M):
        raise DomainError(f"need 0 <= n <= M, got n={n}, M={M}")
    if M > MAX_MODES:
        raise DomainError(f"M={M} exceeds the {MAX_MODES}-mode limit")
    states = tuple(words_with_popcount(M, n))
    return SpinlessBasis(M, n, states, {s: i for i, s in enumerate(states)})
