"""Interaction distance: exact four-level solution and a multi-start numerical minimiser.

A free spectrum on ``M`` modes is the set of ``2**M`` products
``prod_i (1/2 +- b_i)`` with ``0 <= b_i <= 1/2``.  The interaction
distance of a spectrum is its smallest trace distance to any such set,
both sides sorted descending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numba import njit
from scipy.stats import qmc

from .entanglement import EntanglementSpectrum, NORM_TOL, trace_distance_spectra
from .errors import DomainError

BRANCH_MATCHED = "matched-low-levels"
BRANCH_DIAGONAL = "diagonal-b1-eq-b2"
BRANCH_NUMERIC = "numeric"
BRANCH_SLACK = 1e-14


@dataclass(frozen=True)
class FreeSpectrumParams:
    """Mode parameters, stored in ascending order."""

    b: tuple[float, ...]

    def __post_init__(self):
        vals = []
        for x in self.b:
            x = float(x)
            if not (-1e-12 <= x <= 0.5 + 1e-12):
                raise DomainError(f"mode parameter {x} outside [0, 1/2]")
            vals.append(min(0.5, max(0.0, x)))
        object.__setattr__(self, "b", tuple(sorted(vals)))

    @property
    def n_modes(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class DfResult:
    df: float
    params: FreeSpectrumParams
    branch: str
    free_spectrum: EntanglementSpectrum
    log: tuple = field(default=(), compare=False)


def _product_levels(b: np.ndarray) -> np.ndarray:
    """Unsorted product levels for a batch of parameter rows, shape ``(P, 2**M)``."""
    levels = np.ones((b.shape[0], 1))
    for i in range(b.shape[1]):
        col = b[:, i : i + 1]
        levels = np.concatenate([levels * (0.5 + col), levels * (0.5 - col)], axis=1)
    return levels


def free_spectrum_from_params(p: Union[FreeSpectrumParams, Sequence[float]]) -> EntanglementSpectrum:
    if not isinstance(p, FreeSpectrumParams):
        p = FreeSpectrumParams(tuple(p))
    levels = _product_levels(np.asarray(p.b, dtype=float)[None, :])[0]
    return EntanglementSpectrum.from_values(levels)


def _as_probs(s) -> np.ndarray:
    if isinstance(s, EntanglementSpectrum):
        return s.probs
    p = np.asarray(s, dtype=float)
    if p.ndim != 1:
        raise DomainError("spectrum must be a vector")
    return p


def df_four_level(s) -> DfResult:
    """Exact interaction distance of a spectrum with at most four levels.

    If ``r1 >= (r1 + r2)**2`` the optimum sits on ``b1 == b2`` and the
    distance is ``2 sqrt(r1) - 2 r1 - r2 - r3``; otherwise the two largest
    levels are matched and the distance is ``|r1 r4 - r2 r3| / (r1 + r2)``.
    Within 1e-14 of the branch boundary both are evaluated and the smaller
    is kept, preferring the matched branch on a tie.
    """
    p = _as_probs(s)
    if p.size > 4:
        raise DomainError(f"four-level solver got {p.size} levels")
    p = np.concatenate([p, np.zeros(4 - p.size)])
    if np.any(p < -NORM_TOL) or abs(p.sum() - 1.0) > NORM_TOL:
        raise DomainError(f"spectrum is not normalised (sum {p.sum():.15g})")
    if np.any(np.diff(p) > 0):
        raise DomainError("spectrum must be sorted in descending order")
    r1, r2, r3, r4 = (float(x) for x in p)

    def diagonal():
        root = math.sqrt(r1)
        return 2 * root - 2 * r1 - r2 - r3, (root - 0.5, root - 0.5), BRANCH_DIAGONAL

    def matched():
        top = r1 + r2
        return abs(r1 * r4 - r2 * r3) / top, ((r1 - r2) / (2 * top), top - 0.5), BRANCH_MATCHED

    gap = r1 - (r1 + r2) ** 2
    if abs(gap) <= BRANCH_SLACK:
        cands = [matched(), diagonal()]
        best = min(cands, key=lambda c: c[0])
    elif gap > 0:
        best = diagonal()
    else:
        best = matched()
    df, b, branch = best
    params = FreeSpectrumParams(b)
    return DfResult(max(df, 0.0), params, branch, free_spectrum_from_params(params))


@dataclass(frozen=True)
class MinimizerOptions:
    """Settings for :func:`df_numeric`.

    ``restarts`` starting points are drawn from a scrambled Sobol sequence
    seeded with ``seed`` and sorted into the ordered region.
    """

    restarts: int = 32
    seed: int = 0
    initial_step: float = 0.05
    xatol: float = 1e-10
    fatol: float = 1e-13
    max_iter: int = 2000
    polish: bool = True


@njit(cache=True)
def _distance(x, target, n_modes, levels):
    """Sorted trace distance between ``target`` and the levels generated by ``x``.

    ``levels`` is scratch space of length ``len(target)``; entries beyond
    ``2**n_modes`` stay zero.  Coordinates are mirrored at 0 (the level set
    is invariant under ``b -> -b``) and clipped at 1/2.
    """
    levels[:] = 0.0
    levels[0] = 1.0
    width = 1
    for i in range(n_modes):
        b = min(abs(x[i]), 0.5)
        for k in range(width):
            if width + k < levels.size:
                levels[width + k] = levels[k] * (0.5 - b)
            levels[k] *= 0.5 + b
        width *= 2
    ordered = np.sort(levels)
    total = 0.0
    n = target.size
    for k in range(n):
        total += abs(ordered[n - 1 - k] - target[k])
    return 0.5 * total


@njit(cache=True)
def _nelder_mead(x0, step, target, n_modes, xatol, fatol, max_iter):
    """Nelder-Mead from one start with standard coefficients (1, 2, 1/2, 1/2).

    Stops once every vertex is within ``xatol`` of the best in each
    coordinate and within ``fatol`` in value.
    """
    M = n_modes
    levels = np.zeros(target.size)
    sim = np.empty((M + 1, M))
    fsim = np.empty(M + 1)
    for j in range(M + 1):
        for i in range(M):
            sim[j, i] = x0[i]
        if j > 0:
            # step inward so the initial simplex stays inside [0, 1/2]
            sim[j, j - 1] += step if x0[j - 1] + step <= 0.5 else -step
        fsim[j] = _distance(sim[j], target, M, levels)
    xbar = np.empty(M)
    xr = np.empty(M)
    xe = np.empty(M)
    xc = np.empty(M)
    it = 0
    while it < max_iter:
        order = np.argsort(fsim, kind="mergesort")
        sim = sim[order]
        fsim = fsim[order]
        xspread = 0.0
        fspread = 0.0
        for j in range(1, M + 1):
            fspread = max(fspread, fsim[j] - fsim[0])
            for i in range(M):
                xspread = max(xspread, abs(sim[j, i] - sim[0, i]))
        if xspread <= xatol and fspread <= fatol:
            break
        it += 1
        for i in range(M):
            acc = 0.0
            for j in range(M):
                acc += sim[j, i]
            xbar[i] = acc / M
            xr[i] = 2.0 * xbar[i] - sim[M, i]
        fr = _distance(xr, target, M, levels)
        shrink = False
        if fr < fsim[0]:
            for i in range(M):
                xe[i] = 3.0 * xbar[i] - 2.0 * sim[M, i]
            fe = _distance(xe, target, M, levels)
            if fe < fr:
                sim[M, :] = xe
                fsim[M] = fe
            else:
                sim[M, :] = xr
                fsim[M] = fr
        elif fr < fsim[M - 1]:
            sim[M, :] = xr
            fsim[M] = fr
        else:
            if fr < fsim[M]:
                for i in range(M):
                    xc[i] = 1.5 * xbar[i] - 0.5 * sim[M, i]
                fc = _distance(xc, target, M, levels)
                if fc <= fr:
                    sim[M, :] = xc
                    fsim[M] = fc
                else:
                    shrink = True
            else:
                for i in range(M):
                    xc[i] = 0.5 * xbar[i] + 0.5 * sim[M, i]
                fc = _distance(xc, target, M, levels)
                if fc < fsim[M]:
                    sim[M, :] = xc
                    fsim[M] = fc
                else:
                    shrink = True
        if shrink:
            for j in range(1, M + 1):
                for i in range(M):
                    sim[j, i] = sim[0, i] + 0.5 * (sim[j, i] - sim[0, i])
                fsim[j] = _distance(sim[j], target, M, levels)
    k = np.argmin(fsim)
    return sim[k].copy(), fsim[k], it


def df_numeric(s, M: int | None = None, opts: MinimizerOptions | None = None, allow_fewer_modes: bool = False) -> DfResult:
    """Interaction distance by multi-start derivative-free search over ``[0, 1/2]**M``.

    The objective has non-differentiable seams wherever a free level
    crosses a target level, so each start runs a Nelder-Mead simplex; the
    best vertex is then re-polished from small fresh simplices.  Starts
    are independent and run one after another.  There is
    no optimality certificate beyond four levels.

    ``M`` defaults to the smallest mode count whose ``2**M`` levels cover
    the spectrum.  Fewer modes require ``allow_fewer_modes=True``; the
    free spectrum is then zero-padded.
    """
    opts = opts or MinimizerOptions()
    p = _as_probs(s)
    if abs(p.sum() - 1.0) > NORM_TOL or np.any(p < -NORM_TOL):
        raise DomainError("spectrum is not normalised")
    p = -np.sort(-p)
    need = max(1, math.ceil(math.log2(p.size))) if p.size > 1 else 1
    M = need if M is None else int(M)
    if M < 1:
        raise DomainError(f"mode count must be >= 1, got {M}")
    if 2**M < p.size and not allow_fewer_modes:
        raise DomainError(f"{p.size} levels need at least {need} modes, got {M}")
    if opts.restarts < 1:
        raise DomainError("need at least one restart")

    n_levels = max(p.size, 2**M)
    target = np.concatenate([p, np.zeros(n_levels - p.size)])
    sampler = qmc.Sobol(M, scramble=True, seed=opts.seed)
    starts = 0.5 * sampler.random(opts.restarts)
    starts.sort(axis=1)
    log = []
    best_x, best_f = None, math.inf
    for i, x0 in enumerate(starts):
        x, f, iters = _nelder_mead(x0, opts.initial_step, target, M, opts.xatol, opts.fatol, opts.max_iter)
        log.append({"start": i, "x0": x0.tolist(), "df": float(f), "iterations": int(iters)})
        if f < best_f:
            best_x, best_f = x, f
    if opts.polish:
        for step in (1e-3, 1e-6):
            x, f, _ = _nelder_mead(np.minimum(np.abs(best_x), 0.5), step, target, M, opts.xatol, opts.fatol, opts.max_iter)
            if f <= best_f:
                best_x, best_f = x, f
    params = FreeSpectrumParams(tuple(np.minimum(np.abs(best_x), 0.5)))
    free = free_spectrum_from_params(params)
    df = trace_distance_spectra(p, free)
    return DfResult(df, params, BRANCH_NUMERIC, free, tuple(log))
