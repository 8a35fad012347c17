"""Single-point analysis: interacting, KS, optimal and auxiliary states side by side."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entanglement import (
    DensityMatrixBlock,
    entropy,
    local_densities,
    natural_metric,
    reduced_density_matrix,
    spectrum_of,
    trace_distance_matrices,
)
from .hamiltonians import AuxParams, HubbardParams, build_hubbard, ground_state
from .hilbert import build_sector_basis
from .idistance import DfResult, MinimizerOptions, df_four_level, df_numeric
from .kohnsham import KsSolution, invert_dimer, invert_iterative, ks_reduced_density_matrix
from .optmodel import (
    OptimalState,
    aux_density_matrix,
    aux_ground_spectrum,
    mu_from_levels,
    optimal_state,
    pair_levels,
)

CSV_COLUMNS = (
    "U", "E", "DF", "Dtr_int_ks", "Dtr_int_opt", "Dtr_ks_opt",
    "Dn_int_ks", "Dn_int_opt", "Dn_int_aux",
    "S_int", "S_ks", "S_opt", "S_aux", "mu", "dv_ks",
)


@dataclass
class PointAnalysis:
    U: float
    E: float
    cut: tuple[int, ...]
    n_particles: int
    rho_int: DensityMatrixBlock
    rho_ks: DensityMatrixBlock
    df: DfResult
    opt: OptimalState
    ks: KsSolution
    n_int: np.ndarray
    rho_aux: DensityMatrixBlock | None = None
    aux: AuxParams | None = None
    values: dict = field(default_factory=dict)

    def row(self) -> list[float]:
        return [self.values[c] for c in CSV_COLUMNS]


def ramp_potential(L: int, dv: float) -> tuple[float, ...]:
    """Zero-mean linear potential with ``v_1 - v_L = dv``; ``(dv/2, -dv/2)`` for the dimer."""
    if L == 1:
        return (0.0,)
    return tuple(dv * (0.5 - j / (L - 1)) for j in range(L))


def block_densities(block: DensityMatrixBlock, cut: Sequence[int], full: np.ndarray, n_particles: int) -> np.ndarray:
    """Site densities implied by a subsystem state.

    Sites in ``cut`` come from ``block``.  For a two-site chain the other
    site follows from particle-number conservation; for longer chains the
    sites outside the cut keep the values in ``full``.
    """
    out = np.array(full, dtype=float)
    for k, site in enumerate(cut):
        out[site] = block.expectation(block.site_number_operator(k))
    if out.size == 2 and len(cut) == 1:
        other = 1 - cut[0]
        out[other] = n_particles - out[cut[0]]
    return out


def analyze_point(
    J: float,
    U: float,
    dv: float = 0.0,
    L: int = 2,
    n_up: int | None = None,
    n_down: int | None = None,
    v: Sequence[float] | None = None,
    minimizer: MinimizerOptions | None = None,
) -> PointAnalysis:
    """Run the whole comparison at one parameter point.

    The cut is the leading half of the chain.  The four-level solver is
    used whenever the reduced spectrum has at most four levels, otherwise
    the numerical minimiser with two modes per site of the cut.  The
    auxiliary model columns are only defined for the half-filled dimer
    and are NaN elsewhere.
    """
    n_up = L // 2 if n_up is None else n_up
    n_down = L // 2 if n_down is None else n_down
    basis = build_sector_basis(L, n_up, n_down)
    potential = tuple(v) if v is not None else ramp_potential(L, dv)
    H = build_hubbard(HubbardParams(J=J, U=U, v=potential), basis)
    E, psi = ground_state(H)
    cut = tuple(range(max(1, L // 2)))
    rho_int = reduced_density_matrix(psi, basis, cut)
    spec_int = spectrum_of(rho_int)
    if len(spec_int) <= 4:
        df = df_four_level(spec_int)
    else:
        df = df_numeric(spec_int, 2 * len(cut), minimizer)
    n_int = local_densities(psi, basis)
    dimer = (L, n_up, n_down) == (2, 1, 1)
    ks = invert_dimer(n_int, J) if dimer else invert_iterative(n_int, J, basis)
    rho_ks = ks_reduced_density_matrix(ks, cut)
    opt = optimal_state(rho_int, df)
    N = basis.n_particles

    n_ks = ks.densities
    n_opt = block_densities(opt.matrix, cut, n_int, N)
    values = {
        "U": float(U),
        "E": E,
        "DF": df.df,
        "Dtr_int_ks": trace_distance_matrices(rho_int, rho_ks),
        "Dtr_int_opt": trace_distance_matrices(rho_int, opt.matrix),
        "Dtr_ks_opt": trace_distance_matrices(rho_ks, opt.matrix),
        "Dn_int_ks": natural_metric(n_int, n_ks),
        "Dn_int_opt": natural_metric(n_int, n_opt),
        "S_int": entropy(spec_int),
        "S_ks": entropy(spectrum_of(rho_ks)),
        "S_opt": entropy(opt.spectrum),
        "dv_ks": ks.dv,
        "Dn_int_aux": math.nan,
        "S_aux": math.nan,
        "mu": math.nan,
    }
    result = PointAnalysis(float(U), E, cut, N, rho_int, rho_ks, df, opt, ks, n_int, values=values)
    if dimer:
        r1, r2 = pair_levels(opt.spectrum)
        aux = AuxParams(J=J, mu=mu_from_levels(r1, r2, J))
        rho_aux = aux_density_matrix(aux, rho_int)
        values["mu"] = aux.mu
        values["S_aux"] = entropy(aux_ground_spectrum(aux))
        values["Dn_int_aux"] = natural_metric(n_int, block_densities(rho_aux, cut, n_int, N))
        result.aux, result.rho_aux = aux, rho_aux
    return result
