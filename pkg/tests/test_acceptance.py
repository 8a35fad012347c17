"""The eleven acceptance criteria, each at its stated tolerance.

Every test records a single PASS/FAIL line, shown in the pytest terminal
summary under "acceptance criteria".
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from freefit.analysis import analyze_point
from freefit.dimer import df_dimer_closed, dimer_closed_form, dimer_entanglement_spectrum
from freefit.entanglement import EntanglementSpectrum, natural_metric
from freefit.hamiltonians import AuxParams, HubbardParams, build_hubbard
from freefit.hilbert import build_sector_basis
from freefit.idistance import df_four_level, df_numeric
from freefit.optmodel import (
    aux_ground_spectrum,
    mu_from_levels,
    pair_levels,
    verify_observable_bound,
    verify_triangle,
)

J, DV = 1.0, 0.5
SWEEP_U = np.linspace(0.0, 50.0, 200)


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    points = [analyze_point(J, float(U), DV) for U in SWEEP_U]
    return points, time.perf_counter() - t0


def test_criterion_01_appendix_exactness(record):
    spec = [1 / 3, 1 / 3, 1 / 3, 0.0]
    df_four_level(spec)
    n = 1000
    t0 = time.perf_counter()
    for _ in range(n):
        r = df_four_level(spec)
    per_call = (time.perf_counter() - t0) / n
    err = max(abs(r.df - 1 / 6), abs(r.params.b[0]), abs(r.params.b[1] - 1 / 6))
    ok = err <= 1e-12 and per_call < 1e-3
    record(1, ok, f"df={r.df:.17g} b={r.params.b} max err={err:.1e} time/call={per_call * 1e6:.1f} us")
    assert ok


def test_criterion_02_closed_form_energy(record):
    Us = np.linspace(0.0, 50.0, 20)
    dvs = np.linspace(0.0, 2.0, 20)
    Js = (0.5, 1.0, 2.0, 4.0, 8.0)
    basis = build_sector_basis(2, 1, 1)
    t0 = time.perf_counter()
    worst = 0.0
    for j in Js:
        for U in Us:
            for dv in dvs:
                E_closed = dimer_closed_form(j, U, dv).E
                H = build_hubbard(HubbardParams(J=j, U=U, v=(dv / 2, -dv / 2)), basis)
                E_num = np.linalg.eigvalsh(H.data)[0]
                worst = max(worst, abs(E_closed - E_num))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 1.0
    record(2, ok, f"2000 points, max |dE|={worst:.2e}, {elapsed:.3f} s")
    assert ok


def test_criterion_03_large_u_asymptote(record):
    t0 = time.perf_counter()
    r1000 = df_dimer_closed(J, 1000.0, DV) * 1000.0**3 / (4 * J * J * DV)
    elapsed = time.perf_counter() - t0
    r100 = df_dimer_closed(J, 100.0, DV) * 100.0**3 / (4 * J * J * DV)
    ok = 0.99 <= r1000 <= 1.01 and 0.95 <= r100 <= 1.05 and elapsed < 1e-3
    record(3, ok, f"ratio(U=1000)={r1000:.6f} ratio(U=100)={r100:.6f} time={elapsed * 1e6:.0f} us")
    assert ok


def test_criterion_04_solver_equivalence(record):
    df_numeric([0.4, 0.3, 0.2, 0.1], 2)  # compile the kernel outside the timing
    rng = np.random.default_rng(2024)
    spectra = [EntanglementSpectrum.from_values(rng.dirichlet(np.ones(4))) for _ in range(1000)]
    t0 = time.perf_counter()
    errors = [abs(df_numeric(s, 2).df - df_four_level(s).df) for s in spectra]
    elapsed = time.perf_counter() - t0
    failures = sum(e > 1e-6 for e in errors)
    ok = failures == 0 and elapsed < 30.0
    record(4, ok, f"1000 spectra, failures={failures}, max err={max(errors):.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_05_ks_defining_property(record, sweep):
    points, elapsed = sweep
    worst = max(natural_metric(p.n_int, p.ks.densities) for p in points)
    ok = worst < 1e-8 and elapsed < 10.0
    record(5, ok, f"200 points, max D_n(int, KS)={worst:.2e}, {elapsed:.2f} s (full point analysis)")
    assert ok


def test_criterion_06_entropy_limits(record):
    v = analyze_point(J, 50.0, DV).values
    errs = {
        "S_ks": abs(v["S_ks"] - math.log(4)),
        "S_int": abs(v["S_int"] - math.log(2)),
        "S_opt": abs(v["S_opt"] - math.log(2)),
        "S_aux": abs(v["S_aux"] - math.log(2)),
    }
    ok = errs["S_ks"] < 0.05 and all(errs[k] < 0.02 for k in ("S_int", "S_opt", "S_aux"))
    detail = " ".join(f"{k}={v[k]:.5f}" for k in errs)
    record(6, ok, f"U=50: {detail}")
    assert ok


def test_criterion_07_mu_scaling(record):
    Us = np.linspace(10.0, 50.0, 41)
    mus = [analyze_point(J, float(U), DV).values["mu"] for U in Us]
    slope = np.polyfit(Us, mus, 1)[0]
    ok = abs(slope - J) <= 0.05 * J
    record(7, ok, f"least-squares slope of mu(U) on [10, 50] = {slope:.6f} (J={J})")
    assert ok


def test_criterion_08_aux_round_trip(record):
    Us = np.linspace(2.0, 50.0, 50)  # above the crossover the optimum has b1 = 0
    worst = 0.0
    for U in Us:
        df = df_four_level(dimer_entanglement_spectrum(dimer_closed_form(J, float(U), DV)))
        mu = mu_from_levels(*pair_levels(df.free_spectrum), J)
        aux = aux_ground_spectrum(AuxParams(J=J, mu=mu))
        worst = max(worst, float(np.abs(aux.probs - df.free_spectrum.probs).max()))
    ok = worst < 1e-10
    record(8, ok, f"50 points on U in [2, 50], max level error={worst:.1e}")
    assert ok


def test_criterion_09_observable_bound(record):
    grid = [(float(U), float(dv)) for U in (0.5, 2.0, 5.0, 20.0, 50.0) for dv in (0.1, 0.5, 1.0, 2.0)]
    violations, total = 0, 0
    literal_half, literal_dtr = 0, 0
    for k, (U, dv) in enumerate(grid):
        pt = analyze_point(J, U, dv)
        reports = verify_observable_bound(pt.rho_int, pt.opt, 500, seed=k)[1:]
        total += len(reports)
        violations += sum(not r.satisfied for r in reports)
        df = pt.df.df
        # diagnostics only: the constant |O_max|/2 times D_F, and |O_max| times D_tr
        literal_half += sum(r.lhs > 0.5 * r.detail["o_max"] * df + 1e-12 for r in reports)
        literal_dtr += sum(r.lhs > r.detail["o_max"] * r.detail["d_tr"] + 1e-12 for r in reports)
    ok = total == 10_000 and violations == 0
    record(
        9,
        ok,
        f"{total} observables on 20 points, violations of |O_max| tr|rho-sigma| = {violations} "
        f"(diagnostic: |O_max|/2*D_F exceeded {literal_half}x, |O_max|*D_tr exceeded {literal_dtr}x)",
    )
    assert ok


def test_criterion_10_triangle(record, sweep):
    points, _ = sweep
    reports = [verify_triangle(p.rho_int, p.rho_ks, p.df.df) for p in points]
    lower_ok = all(r.satisfied for r in reports)
    window = [r.ratio for U, r in zip(SWEEP_U, reports) if 20.0 <= U <= 50.0]
    peak = max(window)
    ok = lower_ok and peak > 100
    record(10, ok, f"D_F <= D_tr(int, KS) + 1e-10 at all 200 points: {lower_ok}; max ratio on [20, 50] = {peak:.0f}")
    assert ok


def test_criterion_11_determinism(record, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        cmd = [sys.executable, "-m", "freefit", "sweep", "--J", "1", "--dv", "0.5", "--U-min", "0", "--U-max", "50",
               "--U-count", "51", "--seed", "3", "--out", str(path)]
        subprocess.run(cmd, check=True)
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    record(11, ok, f"two independent sweep runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")
    assert ok
