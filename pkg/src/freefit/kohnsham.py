"""Kohn-Sham inversion: the free potential whose ground state has given site densities.

The KS Hamiltonian keeps the kinetic term of the interacting chain
(same ``J``, open boundary) and only the site potential is tuned.
Potentials are gauge fixed to zero mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entanglement import DensityMatrixBlock, local_densities, reduced_density_matrix
from .errors import ConvergenceError, DegeneracyError, DomainError, UnattainableDensityError
from .hamiltonians import HubbardParams, build_hubbard
from .hilbert import SectorBasis, build_sector_basis

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class KsSolution:
    v_ks: tuple[float, ...]
    state: np.ndarray
    residual: float
    basis: SectorBasis
    J: float
    iterations: int = 0

    @property
    def densities(self) -> np.ndarray:
        return local_densities(self.state, self.basis)

    @property
    def dv(self) -> float:
        return self.v_ks[0] - self.v_ks[-1]


@dataclass(frozen=True)
class InversionOptions:
    tol: float = 1e-8
    max_iter: int = 10000
    alpha: float = 1.0
    min_alpha: float = 1e-12


class _FreeChain:
    """Kinetic matrix and number diagonals cached for repeated potential updates."""

    def __init__(self, J: float, b: SectorBasis):
        self.basis = b
        self.kinetic = build_hubbard(HubbardParams(J=J, U=0.0, v=(0.0,) * b.L), b).data
        self.site_occ = np.array(
            [[((u >> j) & 1) + ((d >> j) & 1) for j in range(b.L)] for u, d in b.states], dtype=float
        )

    def solve(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        H = self.kinetic + np.diag(self.site_occ @ v)
        w, V = np.linalg.eigh(H)
        if len(w) > 1 and w[1] - w[0] < DEGENERACY_TOL:
            raise DegeneracyError(f"free ground state is degenerate at v={v.tolist()} (gap {w[1] - w[0]:.3e})")
        psi = V[:, 0]
        k = int(np.argmax(np.abs(psi)))
        if psi[k] < 0:
            psi = -psi
        return psi, (psi**2) @ self.site_occ


def analytic_dimer_dv(n1: float, J: float) -> float:
    """Closed-form potential difference reproducing ``n1`` on site 1 of the free dimer.

    From the bonding orbital of ``[[dv/2, -J], [-J, -dv/2]]``:
    ``n1 = 1 - dv / sqrt(dv**2 + 4 J**2)``.
    """
    if not 0 < n1 < 2:
        raise UnattainableDensityError(f"n1={n1} needs an infinite potential")
    return 2 * abs(J) * (1 - n1) / math.sqrt(n1 * (2 - n1))


def invert_dimer(n_target: Sequence[float], J: float, tol: float = 1e-13) -> KsSolution:
    """Bisect on ``dv = v1 - v2`` until the free dimer reproduces ``n_target``.

    ``n1`` falls strictly as ``dv`` grows, so a bracket that straddles the
    target always exists for ``0 < n1 < 2``.
    """
    n1, n2 = (float(x) for x in n_target)
    if abs(n1 + n2 - 2.0) > 1e-10:
        raise DomainError(f"dimer densities must sum to 2, got {n1 + n2}")
    if not 0 < n1 < 2:
        raise UnattainableDensityError(f"n1={n1} needs an infinite potential")
    if J == 0:
        raise DomainError("J must be nonzero")
    chain = _FreeChain(J, build_sector_basis(2, 1, 1))

    def n1_of(dv):
        return chain.solve(np.array([dv / 2, -dv / 2]))

    width = 4 * abs(J)
    while n1_of(width)[1][0] > n1:
        width *= 2
    while n1_of(-width)[1][0] < n1:
        width *= 2
    lo, hi = -width, width
    iterations = 0
    while True:
        iterations += 1
        dv = 0.5 * (lo + hi)
        psi, dens = n1_of(dv)
        if abs(dens[0] - n1) < tol or hi - lo < 1e-15 * width or iterations >= 200:
            break
        if dens[0] > n1:
            lo = dv
        else:
            hi = dv
    residual = float(np.max(np.abs(dens - np.array([n1, n2]))))
    return KsSolution((dv / 2, -dv / 2), psi, residual, chain.basis, J, iterations)


def invert_iterative(
    n_target: Sequence[float],
    J: float,
    b: SectorBasis,
    opts: InversionOptions | None = None,
) -> KsSolution:
    """Damped fixed point ``v <- v + alpha (n_KS[v] - n_target)`` with zero-mean gauge.

    A step that raises the residual is rejected and ``alpha`` halved.

    Raises
    ------
    ConvergenceError
        When ``max_iter`` is reached or ``alpha`` underflows; the residual
        history is attached.
    DegeneracyError
        When an iterate has a degenerate free ground state.
    """
    opts = opts or InversionOptions()
    target = np.asarray(n_target, dtype=float)
    if target.shape != (b.L,):
        raise DomainError(f"target has {target.size} entries, basis has L={b.L}")
    if abs(target.sum() - b.n_particles) > 1e-10:
        raise DomainError(f"target sums to {target.sum()}, sector holds {b.n_particles} particles")
    chain = _FreeChain(J, b)
    v = np.zeros(b.L)
    psi, dens = chain.solve(v)
    residual = float(np.max(np.abs(dens - target)))
    trace = [residual]
    alpha = opts.alpha
    it = 0
    while residual >= opts.tol:
        if it >= opts.max_iter:
            raise ConvergenceError(f"no convergence after {it} iterations (residual {residual:.3e})", trace)
        if alpha < opts.min_alpha:
            raise ConvergenceError(f"step size underflow (residual {residual:.3e})", trace)
        it += 1
        trial = v + alpha * (dens - target)
        trial -= trial.mean()
        psi_t, dens_t = chain.solve(trial)
        res_t = float(np.max(np.abs(dens_t - target)))
        if res_t > residual:
            alpha *= 0.5
            continue
        v, psi, dens, residual = trial, psi_t, dens_t, res_t
        trace.append(residual)
    return KsSolution(tuple(v.tolist()), psi, residual, b, J, it)


def ks_reduced_density_matrix(sol: KsSolution, cut) -> DensityMatrixBlock:
    return reduced_density_matrix(sol.state, sol.basis, cut)
