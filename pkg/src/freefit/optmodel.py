"""Optimal free state, the auxiliary dimer model, and bound checks.

The optimal density matrix keeps the eigenvectors of the interacting
reduced density matrix and swaps in the optimal free eigenvalues in
sorted correspondence, which attains the spectral trace distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    DensityMatrixBlock,
    EntanglementSpectrum,
    reduced_density_matrix,
    spectrum_of,
    trace_distance_matrices,
)
from .errors import DomainError, SingularityError
from .hamiltonians import AuxParams, build_aux_dimer
from .hilbert import SpinlessBasis, build_spinless_basis, popcount
from .idistance import DfResult

BOUND_TOL = 1e-12
TRIANGLE_TOL = 1e-10
DIVERGING_RATIO = 100.0
ZERO_DISTANCE = 1e-12

CHAIN_1 = 0b0101  # modes 1 and 3
CHAIN_2 = 0b1010  # modes 2 and 4


@dataclass(frozen=True)
class OptimalState:
    spectrum: EntanglementSpectrum
    matrix: DensityMatrixBlock


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    ratio: float | None = None
    flag: str = "ok"
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def _descending_eigh(m: np.ndarray):
    w, V = np.linalg.eigh(m)
    # eigh returns ascending order; reverse with a stable tie order
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def embed_spectrum(rho: DensityMatrixBlock, levels) -> DensityMatrixBlock:
    """Replace the eigenvalues of ``rho`` by ``levels``, matched in descending order.

    Within a degenerate eigenspace of ``rho`` any basis gives the same
    trace distance; the order returned by the eigensolver is kept.
    """
    probs = np.asarray(levels, dtype=float)
    dim = rho.dimension
    if probs.size > dim:
        if np.any(probs[dim:] > 1e-14):
            raise DomainError(f"{probs.size} nonzero levels do not fit a {dim}-dimensional block")
        probs = probs[:dim]
    probs = np.concatenate([-np.sort(-probs), np.zeros(dim - probs.size)])
    _, V = _descending_eigh(rho.matrix)
    m = (V * probs) @ V.conj().T
    m = 0.5 * (m + m.conj().T)
    if not np.iscomplexobj(rho.matrix):
        m = m.real
    return DensityMatrixBlock(rho.labels, m, rho.spinful)


def optimal_state(rho_int: DensityMatrixBlock, df: DfResult) -> OptimalState:
    return OptimalState(df.free_spectrum, embed_spectrum(rho_int, df.free_spectrum.probs))


def pair_levels(spectrum: EntanglementSpectrum) -> tuple[float, float]:
    """The two distinct levels of a doubly degenerate four-level spectrum.

    For a spectrum that is not doubly degenerate this returns the pair
    averages, which give the auxiliary spectrum closest in trace distance.
    """
    p = spectrum.padded(4) if len(spectrum) < 4 else spectrum.probs
    if p.size != 4:
        raise DomainError(f"need a four-level spectrum, got {p.size} levels")
    return 0.5 * (p[0] + p[1]), 0.5 * (p[2] + p[3])


def mu_from_levels(r1: float, r2: float, J: float, scale_by_J: bool = True) -> float:
    """Chemical potential ``2 J [sqrt(r1/r2) - sqrt(r2/r1)]`` that reproduces level ratio ``r1/r2``.

    ``scale_by_J=False`` drops the factor ``J`` (identical at ``J = 1``).
    """
    if r2 <= 0:
        raise SingularityError("lower level is zero; the potential would be infinite")
    if r1 < r2:
        raise DomainError(f"need r1 >= r2, got {r1} < {r2}")
    mu = 2.0 * (math.sqrt(r1 / r2) - math.sqrt(r2 / r1))
    return mu * J if scale_by_J else mu


def aux_ground_state(p: AuxParams) -> tuple[SpinlessBasis, np.ndarray]:
    """Ground state with one fermion on each chain, as a vector on 4 modes / 2 particles.

    The chains are decoupled, so the projected block is exactly the
    ground sector with one particle per chain.
    """
    basis = build_spinless_basis(4, 2)
    H = build_aux_dimer(p, basis).data
    keep = [i for i, w in enumerate(basis.states) if popcount(w & CHAIN_1) == 1 and popcount(w & CHAIN_2) == 1]
    w, V = np.linalg.eigh(H[np.ix_(keep, keep)])
    psi = np.zeros(basis.dimension)
    psi[keep] = V[:, 0]
    k = int(np.argmax(np.abs(psi)))
    return basis, psi if psi[k] > 0 else -psi


def aux_reduced_density_matrix(p: AuxParams) -> DensityMatrixBlock:
    basis, psi = aux_ground_state(p)
    return reduced_density_matrix(psi, basis, 2)


def aux_ground_spectrum(p: AuxParams) -> EntanglementSpectrum:
    """Entanglement spectrum of modes {1, 2} in the auxiliary ground state."""
    return spectrum_of(aux_reduced_density_matrix(p))


def aux_chain_densities(p: AuxParams) -> np.ndarray:
    """Mode occupations summed as ``(n1 + n2, n3 + n4)``."""
    basis, psi = aux_ground_state(p)
    w = psi**2
    occ = np.array([[popcount(s & 0b0011), popcount(s & 0b1100)] for s in basis.states], dtype=float)
    return w @ occ


def aux_density_matrix(p: AuxParams, rho_int: DensityMatrixBlock) -> DensityMatrixBlock:
    """Auxiliary subsystem state carried into the interacting eigenbasis.

    The auxiliary A block (two spinless modes) and the interacting site-1
    block both have dimension four; the states are identified through the
    descending order of their eigenvalues, as for the optimal state.
    """
    return embed_spectrum(rho_int, aux_ground_spectrum(p).probs)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random complex Hermitian matrix with a random scale and identity offset."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (g + g.conj().T)
    return math.exp(rng.normal()) * h + rng.normal() * np.eye(dim)


def observable_bound(o: np.ndarray, rho: DensityMatrixBlock, sigma: DensityMatrixBlock) -> BoundReport:
    """``|<O>_rho - <O>_sigma| <= |O_max| tr|rho - sigma|``."""
    diff = rho.matrix - sigma.matrix
    lhs = abs(np.trace(o @ diff))
    eig_o = np.linalg.eigvalsh(o)
    o_max = float(np.max(np.abs(eig_o)))
    trace_norm = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    rhs = o_max * trace_norm
    return BoundReport(
        "observable",
        float(lhs),
        rhs,
        bool(lhs <= rhs + BOUND_TOL),
        detail={"o_max": o_max, "o_spread": float(eig_o[-1] - eig_o[0]), "d_tr": 0.5 * trace_norm},
    )


def verify_observable_bound(
    rho_int: DensityMatrixBlock, rho_opt: OptimalState | DensityMatrixBlock, n_samples: int, seed: int = 0
) -> list[BoundReport]:
    """Check the expectation-value bound on the identity plus ``n_samples`` random observables."""
    sigma = rho_opt.matrix if isinstance(rho_opt, OptimalState) else rho_opt
    if sigma.dimension != rho_int.dimension:
        raise DomainError("density matrices have different dimensions")
    rng = np.random.default_rng(seed)
    reports = [observable_bound(np.eye(rho_int.dimension), rho_int, sigma)]
    for _ in range(n_samples):
        reports.append(observable_bound(random_hermitian(rho_int.dimension, rng), rho_int, sigma))
    return reports


def density_bound_constant(n_sites: int, max_occupation: int = 2) -> float:
    """Sum over sites of the per-site constant ``2 |n_max|`` in ``|<n_j>_rho - <n_j>_sigma| <= 2 |n_max| D_tr``."""
    return 2.0 * max_occupation * n_sites


def verify_density_bound(n_int, n_other, df: float, constant: float) -> BoundReport:
    """``D_n(int, other) <= C * D_F``."""
    lhs = float(np.sum(np.abs(np.asarray(n_int, dtype=float) - np.asarray(n_other, dtype=float))))
    rhs = constant * df
    return BoundReport("density", lhs, rhs, bool(lhs <= rhs + BOUND_TOL), detail={"constant": constant})


def verify_triangle(rho_int: DensityMatrixBlock, rho_ks: DensityMatrixBlock, df: float) -> BoundReport:
    """Optimality lower bound ``D_F <= D_tr(int, KS)`` plus the ratio ``D_tr(int, KS) / D_F``.

    The ratio has no a priori bound away from weak coupling; a ratio
    above 100 (or a zero ``D_F`` with nonzero distance) is flagged
    ``"diverging"``.
    """
    d_int_ks = trace_distance_matrices(rho_int, rho_ks)
    satisfied = df <= d_int_ks + TRIANGLE_TOL
    if df > ZERO_DISTANCE:
        ratio = d_int_ks / df
    elif d_int_ks > TRIANGLE_TOL:
        ratio = math.inf
    else:
        # both states coincide with rho_int; the ratio carries no information
        ratio = math.nan
    flag = "diverging" if ratio > DIVERGING_RATIO else "ok"
    return BoundReport("triangle", float(df), d_int_ks, bool(satisfied), ratio, flag)
