"""Dense sector matrices for the Hubbard chain, free chains and the spinless auxiliary model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .errors import DegeneracyError, DomainError
from .hilbert import SectorBasis, SpinlessBasis, hop_sign, popcount

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class HubbardParams:
    J: float
    U: float
    v: tuple[float, ...]
    boundary: Literal["open", "periodic"] = "open"

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))
        if not math.isfinite(self.J):
            raise DomainError(f"J must be finite, got {self.J}")
        if self.boundary not in ("open", "periodic"):
            raise DomainError(f"unknown boundary {self.boundary!r}")

    @property
    def L(self) -> int:
        return len(self.v)


@dataclass(frozen=True)
class AuxParams:
    """Two decoupled spinless two-site chains, modes (1,3) and (2,4), with ``-mu/2`` on mode 1."""

    J: float
    mu: float

    def __post_init__(self):
        if not math.isfinite(self.J) or self.J == 0:
            raise DomainError(f"J must be finite and nonzero, got {self.J}")


@dataclass(frozen=True)
class OperatorMatrix:
    basis: Union[SectorBasis, SpinlessBasis]
    data: np.ndarray

    def __post_init__(self):
        n = self.basis.dimension
        if self.data.shape != (n, n):
            raise DomainError(f"matrix shape {self.data.shape} does not match basis dimension {n}")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def hermiticity_error(self) -> float:
        if self.data.size == 0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T)))


def bonds(L: int, boundary: str) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds ``(j, j+1)``, plus ``(L-1, 0)`` when periodic."""
    out = [(j, j + 1) for j in range(L - 1)]
    if boundary == "periodic":
        if L == 2:
            # the wrap bond would duplicate (0, 1) and silently double J
            raise DomainError("periodic boundary is not allowed for L=2")
        if L > 2:
            out.append((L - 1, 0))
    return out


def _hop(word: int, i: int, j: int):
    """Apply ``c_i^dagger c_j`` to a single-species word; None if it annihilates."""
    if not (word >> j) & 1 or (i != j and (word >> i) & 1):
        return None
    return word ^ (1 << j) ^ (1 << i), hop_sign(word, i, j)


def build_hubbard(p: HubbardParams, b: SectorBasis) -> OperatorMatrix:
    """Hubbard Hamiltonian ``-J sum (c^dag c + h.c.) + sum v_j n_j + U sum n_up n_down`` in ``b``."""
    if p.L != b.L:
        raise DomainError(f"potential has {p.L} entries but basis has L={b.L}")
    dim = b.dimension
    H = np.zeros((dim, dim))
    v = np.asarray(p.v)
    site_bits = [1 << j for j in range(b.L)]
    links = bonds(b.L, p.boundary)
    for k, (up, dn) in enumerate(b.states):
        diag = 0.0
        for j, bit in enumerate(site_bits):
            n_up, n_dn = bool(up & bit), bool(dn & bit)
            diag += v[j] * (n_up + n_dn) + p.U * (n_up and n_dn)
        H[k, k] = diag
        if p.J == 0:
            continue
        for i, j in links:
            for a, c in ((i, j), (j, i)):
                hopped = _hop(up, a, c)
                if hopped is not None:
                    H[b.index_of[(hopped[0], dn)], k] += -p.J * hopped[1]
                hopped = _hop(dn, a, c)
                if hopped is not None:
                    H[b.index_of[(up, hopped[0])], k] += -p.J * hopped[1]
    return OperatorMatrix(b, H)


def build_free_spinful(J: float, v: Sequence[float], b: SectorBasis, boundary: str = "open") -> OperatorMatrix:
    """Non-interacting chain with the same kinetic operator as :func:`build_hubbard`."""
    return build_hubbard(HubbardParams(J=J, U=0.0, v=tuple(v), boundary=boundary), b)


def build_aux_dimer(p: AuxParams, b: SpinlessBasis) -> OperatorMatrix:
    """Auxiliary Hamiltonian ``-J(c1^dag c3 + h.c.) - J(c2^dag c4 + h.c.) - (mu/2) n1``.

    Modes 1..4 are bits 0..3 of the basis words.
    """
    if b.M != 4:
        raise DomainError(f"auxiliary dimer needs 4 modes, basis has {b.M}")
    dim = b.dimension
    H = np.zeros((dim, dim))
    for k, word in enumerate(b.states):
        H[k, k] = -0.5 * p.mu * (word & 1)
        for i, j in ((0, 2), (2, 0), (1, 3), (3, 1)):
            hopped = _hop(word, i, j)
            if hopped is not None:
                H[b.index_of[hopped[0]], k] += -p.J * hopped[1]
    return OperatorMatrix(b, H)


def number_operator(b: Union[SectorBasis, SpinlessBasis]) -> np.ndarray:
    """Diagonal of the total particle-number operator in ``b``."""
    if isinstance(b, SectorBasis):
        return np.array([popcount(u) + popcount(d) for u, d in b.states], dtype=float)
    return np.array([popcount(w) for w in b.states], dtype=float)


def ground_state(op: OperatorMatrix, degeneracy_tol: float | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of ``op`` by dense diagonalisation.

    The eigenvector sign is fixed so its largest-magnitude component is
    positive.  With ``degeneracy_tol`` set, a gap below the tolerance
    raises :class:`DegeneracyError`.
    """
    w, V = np.linalg.eigh(op.data)
    if degeneracy_tol is not None and len(w) > 1 and w[1] - w[0] < degeneracy_tol:
        raise DegeneracyError(f"ground state is degenerate (gap {w[1] - w[0]:.3e})")
    psi = V[:, 0]
    k = int(np.argmax(np.abs(psi)))
    if psi[k] < 0:
        psi = -psi
    return float(w[0]), psi
