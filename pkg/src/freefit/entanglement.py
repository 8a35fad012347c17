"""Partial traces, entanglement spectra, trace distances and local densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, SpectrumParseError, UnsupportedPartitionError
from .hilbert import SectorBasis, SpinlessBasis

ZERO_CLAMP = 1e-14
NORM_TOL = 1e-10
FILE_NORM_TOL = 1e-6


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Probabilities of a reduced density matrix in descending order."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1 or p.size == 0:
            raise DomainError("spectrum must be a non-empty vector")
        if np.any(p < -NORM_TOL) or np.any(p > 1 + NORM_TOL):
            raise DomainError("spectrum entries must lie in [0, 1]")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise DomainError(f"spectrum sums to {p.sum():.15g}, not 1")
        if np.any(np.diff(p) > 0):
            raise DomainError("spectrum must be sorted in descending order")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "EntanglementSpectrum":
        """Sort descending and clamp numerical noise below 1e-14 to zero."""
        p = np.asarray(list(values), dtype=float)
        p = np.where(p < ZERO_CLAMP, 0.0, p)
        return cls(-np.sort(-p))

    def __len__(self) -> int:
        return self.probs.size

    def __iter__(self):
        return iter(self.probs.tolist())

    def padded(self, n: int) -> np.ndarray:
        if n < self.probs.size:
            raise DomainError(f"cannot pad a length-{self.probs.size} spectrum to {n}")
        return np.concatenate([self.probs, np.zeros(n - self.probs.size)])


@dataclass(frozen=True)
class DensityMatrixBlock:
    """Reduced density matrix of subsystem A.

    ``labels`` enumerate the local occupation configurations of A:
    ``(up_word, down_word)`` pairs for spinful bases, plain words for
    spinless ones, with bit 0 the first site of A.
    """

    labels: tuple
    matrix: np.ndarray
    spinful: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape != (len(self.labels), len(self.labels)):
            raise DomainError("matrix shape does not match labels")
        if abs(np.trace(m).real - 1.0) > NORM_TOL:
            raise DomainError(f"density matrix trace is {np.trace(m).real:.15g}")
        if np.linalg.eigvalsh(m)[0] < -NORM_TOL:
            raise DomainError("density matrix is not positive semidefinite")

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def site_number_operator(self, j: int) -> np.ndarray:
        """Diagonal operator counting fermions on site ``j`` of A (summed over spin)."""
        bit = 1 << j
        if self.spinful:
            occ = [bool(u & bit) + bool(d & bit) for u, d in self.labels]
        else:
            occ = [bool(w & bit) for w in self.labels]
        return np.diag(np.asarray(occ, dtype=float))

    def expectation(self, op: np.ndarray) -> float:
        return float(np.trace(op @ self.matrix).real)


Basis = Union[SectorBasis, SpinlessBasis]


def _as_cut(cut, n_sites: int) -> list[int]:
    if isinstance(cut, (int, np.integer)):
        sites = list(range(int(cut)))
    else:
        sites = sorted(int(s) for s in cut)
    if not sites or sites[0] < 0 or sites[-1] >= n_sites or len(set(sites)) != len(sites):
        raise DomainError(f"cut {cut!r} is not a valid site set for {n_sites} sites")
    if sites != list(range(sites[0], sites[-1] + 1)):
        raise UnsupportedPartitionError(f"cut {sites} is not contiguous")
    return sites


def _reorder_sign(occupied_keys: list[tuple[int, int]]) -> int:
    """Parity of the permutation that sorts modes from global order into A-first order."""
    inversions = 0
    for x in range(len(occupied_keys)):
        for y in range(x + 1, len(occupied_keys)):
            if occupied_keys[x] > occupied_keys[y]:
                inversions += 1
    return -1 if inversions % 2 else 1


def reduced_density_matrix(state: np.ndarray, b: Basis, cut) -> DensityMatrixBlock:
    """Trace out everything but the contiguous site block ``cut``.

    ``cut`` is either an int (the leading ``cut`` sites) or a collection of
    contiguous site indices.  Fermionic signs come from moving the A modes
    to the front of the global mode order before the tensor-factor trace.
    """
    state = np.asarray(state)
    if state.shape != (b.dimension,):
        raise DomainError(f"state has shape {state.shape}, basis dimension is {b.dimension}")
    spinful = isinstance(b, SectorBasis)
    n_sites = b.L if spinful else b.M
    sites = _as_cut(cut, n_sites)
    lo, n_a = sites[0], len(sites)
    a_mask = ((1 << n_a) - 1) << lo

    if spinful:
        labels = tuple((u, d) for u in range(1 << n_a) for d in range(1 << n_a))
    else:
        labels = tuple(range(1 << n_a))
    a_index = {lab: i for i, lab in enumerate(labels)}
    b_index: dict = {}
    rows, cols, vals = [], [], []
    for k, conf in enumerate(b.states):
        amp = state[k]
        if amp == 0:
            continue
        words = conf if spinful else (conf,)
        keys = []
        for species, w in enumerate(words):
            for m in range(n_sites):
                if (w >> m) & 1:
                    in_a = bool(a_mask >> m & 1)
                    # A-first order: A modes by (species, site), then B modes by (species, site)
                    keys.append((0 if in_a else 1, species, m))
        sign = _reorder_sign(keys)
        a_part = tuple((w & a_mask) >> lo for w in words)
        b_part = tuple(w & ~a_mask for w in words)
        a_lab = a_part if spinful else a_part[0]
        rows.append(a_index[a_lab])
        cols.append(b_index.setdefault(b_part, len(b_index)))
        vals.append(sign * amp)
    psi = np.zeros((len(labels), max(len(b_index), 1)), dtype=state.dtype)
    psi[rows, cols] = vals
    rho = psi @ psi.conj().T
    if not np.iscomplexobj(rho):
        rho = rho.real
    return DensityMatrixBlock(labels, rho, spinful)


def spectrum_of(block: Union[DensityMatrixBlock, np.ndarray]) -> EntanglementSpectrum:
    m = block.matrix if isinstance(block, DensityMatrixBlock) else np.asarray(block)
    return EntanglementSpectrum.from_values(np.linalg.eigvalsh(m))


def entropy(s: Union[EntanglementSpectrum, Sequence[float]]) -> float:
    """Von Neumann entropy ``-sum p ln p``; zero entries contribute nothing."""
    p = s.probs if isinstance(s, EntanglementSpectrum) else np.asarray(s, dtype=float)
    p = p[p > ZERO_CLAMP]
    return float(-np.sum(p * np.log(p)))


def trace_distance_matrices(r, s) -> float:
    """Half the trace norm of ``r - s``."""
    a = r.matrix if isinstance(r, DensityMatrixBlock) else np.asarray(r)
    b = s.matrix if isinstance(s, DensityMatrixBlock) else np.asarray(s)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def trace_distance_spectra(p, q) -> float:
    """Trace distance between two spectra, both sorted descending and zero-padded."""
    a = p.probs if isinstance(p, EntanglementSpectrum) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, EntanglementSpectrum) else np.asarray(q, dtype=float)
    n = max(a.size, b.size)
    a = -np.sort(-np.concatenate([a, np.zeros(n - a.size)]))
    b = -np.sort(-np.concatenate([b, np.zeros(n - b.size)]))
    return float(0.5 * np.sum(np.abs(a - b)))


def local_densities(state: np.ndarray, b: Basis) -> np.ndarray:
    """Site occupations ``<n_j>`` summed over spin (per mode for spinless bases)."""
    w = np.abs(np.asarray(state)) ** 2
    if isinstance(b, SectorBasis):
        n = np.zeros(b.L)
        for k, (u, d) in enumerate(b.states):
            for j in range(b.L):
                n[j] += w[k] * (((u >> j) & 1) + ((d >> j) & 1))
        return n
    n = np.zeros(b.M)
    for k, word in enumerate(b.states):
        for j in range(b.M):
            n[j] += w[k] * ((word >> j) & 1)
    return n


def natural_metric(n: Sequence[float], m: Sequence[float]) -> float:
    """Sum over sites of absolute density differences."""
    a, c = np.asarray(n, dtype=float), np.asarray(m, dtype=float)
    if a.shape != c.shape:
        raise DomainError(f"length mismatch: {a.size} vs {c.size}")
    return float(np.sum(np.abs(a - c)))


def parse_spectrum(text: str) -> EntanglementSpectrum:
    """Parse one probability per line; ``#`` lines and blank lines are skipped.

    Entries may be decimals or fractions such as ``1/3``.  A total within
    1e-6 of one is renormalised, anything further off is rejected.
    """
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value = Fraction(line)
        except (ValueError, ZeroDivisionError):
            raise SpectrumParseError(f"line {lineno}: cannot parse {line!r}") from None
        if value < 0:
            raise SpectrumParseError(f"line {lineno}: negative probability {line}")
        values.append(value)
    if not values:
        raise SpectrumParseError("spectrum file contains no values")
    total = sum(values)
    if abs(float(total) - 1.0) > FILE_NORM_TOL:
        raise SpectrumParseError(f"probabilities sum to {float(total):.12g}, not 1")
    return EntanglementSpectrum.from_values(float(v / total) for v in values)


def read_spectrum(path: Union[str, Path]) -> EntanglementSpectrum:
    return parse_spectrum(Path(path).read_text())


def format_spectrum(s: EntanglementSpectrum, comment: str | None = None) -> str:
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines += [f"{p:.17g}" for p in s.probs]
    return "\n".join(lines) + "\n"


def max_entropy(n_levels: int) -> float:
    return math.log(n_levels)
