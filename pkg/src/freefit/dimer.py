"""Closed-form ground state of the half-filled, S_z = 0 Hubbard dimer.

Energies are measured after the constant shift ``H -> H - (v1 + v2)``,
so the four configurations carry diagonal energies ``U + dv``, ``0``,
``0``, ``U - dv`` with ``dv = v1 - v2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import EntanglementSpectrum
from .errors import DomainError, SingularityError
from .hilbert import SectorBasis, build_sector_basis

# Configurations in the order |updown,0>, |up,down>, |down,up>, |0,updown>,
# each written as creation operators (site, spin) applied right to left.
DIMER_CONFIGS = (
    ((0, 0), (0, 1)),
    ((0, 0), (1, 1)),
    ((0, 1), (1, 0)),
    ((1, 0), (1, 1)),
)


@dataclass(frozen=True)
class DimerSolution:
    J: float
    U: float
    dv: float
    E: float
    A: float
    theta: float
    a: float
    b_coef: float
    norm: float
    amps: tuple[float, float, float, float]

    @property
    def normalized_amps(self) -> np.ndarray:
        return np.asarray(self.amps) / math.sqrt(self.norm)

    def energy(self, v1: float, v2: float) -> float:
        """Ground energy of the unshifted Hamiltonian with potentials ``(v1, v2)``."""
        return self.E + v1 + v2


def dimer_closed_form(J: float, U: float, dv: float) -> DimerSolution:
    """Ground energy and unnormalised amplitudes from the trigonometric cubic root.

    Raises
    ------
    DomainError
        If ``J == 0``; the amplitude construction divides by the hopping.
    """
    if J == 0:
        raise DomainError("J must be nonzero")
    A = math.sqrt(U * U + 3 * dv * dv + 12 * J * J)
    cos3 = U * (36 * J * J - 18 * dv * dv + 2 * U * U) / (2 * A**3)
    # principal branch gives the lowest of the three roots
    theta = math.acos(min(1.0, max(-1.0, cos3))) / 3
    E = -2.0 / 3.0 * A * math.cos(theta) + 2.0 * U / 3.0
    a = U + dv - E
    b = U - dv - E
    if b == 0:
        raise SingularityError(f"U - dv - E vanishes at J={J}, U={U}, dv={dv}")
    amps = (2 * J, a, -a, 2 * J * a / b)
    norm = 4 * J * J + 2 * a * a + 4 * J * J * a * a / (b * b)
    return DimerSolution(J, U, dv, E, A, theta, a, b, norm, amps)


def configuration_sign(creators, L: int = 2) -> int:
    """Sign relating a product of creators to the canonical ascending-mode state.

    ``creators`` lists ``(site, spin)`` with spin 0 = up, 1 = down, leftmost
    operator first.  Mode index is ``spin * L + site``.
    """
    modes = [spin * L + site for site, spin in creators]
    inversions = sum(1 for i in range(len(modes)) for j in range(i + 1, len(modes)) if modes[i] > modes[j])
    return -1 if inversions % 2 else 1


def dimer_state_vector(sol: DimerSolution, basis: SectorBasis | None = None) -> np.ndarray:
    """Normalised closed-form ground state expressed in a ``(2, 1, 1)`` sector basis."""
    basis = basis or build_sector_basis(2, 1, 1)
    if (basis.L, basis.n_up, basis.n_down) != (2, 1, 1):
        raise DomainError("dimer state lives in the L=2, (1, 1) sector")
    psi = np.zeros(basis.dimension)
    for amp, creators in zip(sol.normalized_amps, DIMER_CONFIGS):
        up = sum(1 << site for site, spin in creators if spin == 0)
        dn = sum(1 << site for site, spin in creators if spin == 1)
        psi[basis.index_of[(up, dn)]] = configuration_sign(creators) * amp
    return psi


def dimer_entanglement_spectrum(sol: DimerSolution) -> EntanglementSpectrum:
    """Site-1 spectrum: the squared amplitudes over the norm, sorted.

    Each configuration has a distinct site-1 occupation, so the site-1
    reduced density matrix is diagonal in the occupation basis.
    """
    weights = np.asarray(sol.amps) ** 2 / sol.norm
    return EntanglementSpectrum.from_values(weights / weights.sum())


def df_dimer_closed(J: float, U: float, dv: float) -> float:
    """Strong-coupling interaction distance ``(2J^2/N) |(b^2 - a^2) / b^2|``.

    The expression matches the four-level solver only when that solver
    matches the two largest levels; see :func:`closed_form_valid`.
    """
    sol = dimer_closed_form(J, U, dv)
    a, b = sol.a, sol.b_coef
    # b^2 - a^2 = (b - a)(b + a) = -2 dv (b + a); avoids cancellation at large U
    return 2 * J * J / sol.norm * abs(-2 * dv * (a + b) / (b * b))


def closed_form_valid(J: float, U: float, dv: float) -> bool:
    """True when the closed-form distance equals the exact four-level result.

    That holds when the doubly weighted singly-occupied level ``a^2/N``
    leads the spectrum and the lowest two levels can be matched.
    """
    sol = dimer_closed_form(J, U, dv)
    p = dimer_entanglement_spectrum(sol).probs
    single = sol.a**2 / sol.norm
    leading_pair = abs(p[0] - single) < 1e-12 and abs(p[1] - single) < 1e-12
    return bool(leading_pair and p[0] < (p[0] + p[1]) ** 2)


def df_dimer_asymptotic(J: float, U: float, dv: float) -> float:
    """Leading large-U behaviour ``4 J^2 |dv| / U^3``."""
    if U <= 0:
        raise DomainError(f"U must be positive, got {U}")
    return 4 * J * J * abs(dv) / U**3
