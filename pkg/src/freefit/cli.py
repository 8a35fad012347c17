"""freefit command line.

Subcommands::

    freefit dimer  --J 1 --U 8 --dv 0.5
    freefit sweep  --J 1 --dv 0.5 --U-min 0 --U-max 50 --U-count 200 --out fig3.csv
    freefit df     spectrum.txt [--modes 3]
    freefit ks     --J 1 --U 5 --dv 0.5
    freefit aux    --J 1 --mu 3
    freefit verify --U-min 0 --U-max 50 --U-count 20

Exit codes: 0 success, 1 bound violation, 2 domain or parse error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import CSV_COLUMNS, analyze_point, block_densities
from .dimer import (
    closed_form_valid,
    df_dimer_asymptotic,
    df_dimer_closed,
    dimer_closed_form,
    dimer_entanglement_spectrum,
)
from .entanglement import entropy, read_spectrum
from .errors import FreefitError
from .hamiltonians import AuxParams
from .idistance import MinimizerOptions, df_four_level, df_numeric
from .optmodel import (
    aux_chain_densities,
    aux_ground_spectrum,
    density_bound_constant,
    mu_from_levels,
    pair_levels,
    verify_density_bound,
    verify_observable_bound,
    verify_triangle,
)

EXIT_OK, EXIT_VIOLATION, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3


class UsageError(FreefitError):
    pass


def default_seed() -> int:
    raw = os.environ.get("FREEFIT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FREEFIT_SEED must be an integer, got {raw!r}") from None


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepConfig:
    J: float = 1.0
    dv: float = 0.5
    U_grid: tuple[float, ...] = ()
    L: int = 2
    n_up: int | None = None
    n_down: int | None = None
    columns: tuple[str, ...] = CSV_COLUMNS
    seed: int = 0

    def __post_init__(self):
        if not self.U_grid:
            raise UsageError("U grid is empty")
        if any(b <= a for a, b in zip(self.U_grid, self.U_grid[1:])):
            raise UsageError("U grid must be strictly increasing")
        if self.L < 1:
            raise UsageError(f"L must be >= 1, got {self.L}")
        for n in (self.n_up, self.n_down):
            if n is not None and not 0 <= n <= self.L:
                raise UsageError(f"particle count {n} inconsistent with L={self.L}")
        unknown = [c for c in self.columns if c not in CSV_COLUMNS]
        if unknown:
            raise UsageError(f"unknown columns: {', '.join(unknown)}")
        if "U" not in self.columns:
            raise UsageError("column selection must include U")


def expand_grid(u_min: float, u_max: float, count: int, scale: str = "linear") -> tuple[float, ...]:
    if count < 1:
        raise UsageError("U count must be >= 1")
    if count == 1:
        return (float(u_min),)
    if scale == "log":
        if u_min <= 0:
            raise UsageError("log grid needs U-min > 0")
        return tuple(np.geomspace(u_min, u_max, count).tolist())
    if scale != "linear":
        raise UsageError(f"unknown grid scale {scale!r}")
    return tuple(np.linspace(u_min, u_max, count).tolist())


GRID_KEYS = ("U_min", "U_max", "U_count", "U_scale")
DEFAULT_GRID = {"U_min": 0.0, "U_max": 50.0, "U_count": 101, "U_scale": "linear"}


def load_config(args: argparse.Namespace) -> SweepConfig:
    """Merge a JSON config file with command-line flags; flags win."""
    settings: dict = {}
    if getattr(args, "config", None):
        try:
            settings = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(settings, dict):
            raise UsageError("config must be a JSON object")
    for key in ("J", "dv", "L", "n_up", "n_down", "seed", "U_min", "U_max", "U_count", "U_scale"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "U_values", None):
        settings["U"] = args.U_values
        for key in GRID_KEYS:
            settings.pop(key, None)
    if getattr(args, "columns", None):
        settings["columns"] = args.columns

    if "U" in settings:
        u = settings["U"]
        grid = tuple(float(x) for x in (u if isinstance(u, list) else [u]))
    else:
        g = {k: settings.get(k, DEFAULT_GRID[k]) for k in GRID_KEYS}
        grid = expand_grid(float(g["U_min"]), float(g["U_max"]), int(g["U_count"]), str(g["U_scale"]))
    columns = settings.get("columns", CSV_COLUMNS)
    if isinstance(columns, str):
        columns = [c.strip() for c in columns.split(",") if c.strip()]
    return SweepConfig(
        J=float(settings.get("J", 1.0)),
        dv=float(settings.get("dv", 0.5)),
        U_grid=grid,
        L=int(settings.get("L", 2)),
        n_up=None if settings.get("n_up") is None else int(settings["n_up"]),
        n_down=None if settings.get("n_down") is None else int(settings["n_down"]),
        columns=tuple(columns),
        seed=int(settings.get("seed", default_seed())),
    )


def _sweep_point(cfg: SweepConfig, U: float):
    opts = MinimizerOptions(seed=cfg.seed)
    return analyze_point(cfg.J, U, cfg.dv, cfg.L, cfg.n_up, cfg.n_down, minimizer=opts)


def _sweep_row(cfg: SweepConfig, U: float) -> list[float]:
    values = _sweep_point(cfg, U).values
    return [values[c] for c in cfg.columns]


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[list[float]]:
    """Evaluate every grid point; rows come back in grid order."""
    if jobs > 1 and len(cfg.U_grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, [cfg] * len(cfg.U_grid), cfg.U_grid))
    return [_sweep_row(cfg, U) for U in cfg.U_grid]


def render_csv(cfg: SweepConfig, rows: Sequence[Sequence[float]]) -> str:
    echo = asdict(cfg)
    echo["U_grid"] = [fmt(u) for u in cfg.U_grid]
    lines = [
        f"# freefit {__version__} sweep",
        "# config: " + json.dumps(echo, sort_keys=True),
        ",".join(cfg.columns),
    ]
    lines += [",".join(fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def plot_script(csv_path: str, columns: Sequence[str]) -> str:
    """Gnuplot script drawing trace distances, natural metrics and entropies against U."""
    index = {c: i + 1 for i, c in enumerate(columns)}
    panels = [
        ("trace distance", ["DF", "Dtr_int_ks", "Dtr_int_opt", "Dtr_ks_opt"]),
        ("natural metric", ["Dn_int_ks", "Dn_int_opt", "Dn_int_aux"]),
        ("entanglement entropy", ["S_int", "S_ks", "S_opt", "S_aux"]),
    ]
    out = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set xlabel 'U'",
        f"set multiplot layout {len(panels)},1",
    ]
    for title, cols in panels:
        present = [c for c in cols if c in index]
        if not present or "U" not in index:
            continue
        out.append(f"set ylabel '{title}'")
        series = ", ".join(f"'{csv_path}' using {index['U']}:{index[c]} with lines title '{c}'" for c in present)
        out.append(f"plot {series}")
    out.append("unset multiplot")
    return "\n".join(out) + "\n"


def write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_dimer(args) -> int:
    J, U, dv = args.J, args.U, args.dv
    if J == 0:
        raise UsageError("J must be nonzero")
    sol = dimer_closed_form(J, U, dv)
    spec = dimer_entanglement_spectrum(sol)
    four = df_four_level(spec)
    point = analyze_point(J, U, dv)
    r1, r2 = pair_levels(four.free_spectrum)
    report = {
        "J": J,
        "U": U,
        "dv": dv,
        "E": sol.E,
        "E_numeric": point.E,
        "spectrum": spec.probs.tolist(),
        "entropy": entropy(spec),
        "DF_four_level": four.df,
        "DF_branch": four.branch,
        "DF_closed": df_dimer_closed(J, U, dv),
        "DF_closed_valid": closed_form_valid(J, U, dv),
        "DF_asymptotic": df_dimer_asymptotic(J, U, dv) if U > 0 else None,
        "optimal_spectrum": four.free_spectrum.probs.tolist(),
        "mu": mu_from_levels(r1, r2, J),
        "dv_ks": point.ks.dv,
    }
    emit(report, args.json)
    return EXIT_OK


def emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=False, default=float))
        return
    width = max(len(k) for k in report)
    for key, value in report.items():
        if isinstance(value, float):
            value = fmt(value)
        elif isinstance(value, list) and value and isinstance(value[0], float):
            value = " ".join(fmt(x) for x in value)
        print(f"{key:<{width}}  {value}")


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    rows = run_sweep(cfg, args.jobs)
    text = render_csv(cfg, rows)
    if args.out:
        write_text(args.out, text)
        if args.plot_script:
            write_text(args.plot_script, plot_script(args.out, cfg.columns))
    else:
        if args.plot_script:
            raise UsageError("--plot-script needs --out")
        sys.stdout.write(text)
    return EXIT_OK


def cmd_df(args) -> int:
    if args.file:
        spec = read_spectrum(args.file)
    elif args.U is not None:
        spec = dimer_entanglement_spectrum(dimer_closed_form(args.J, args.U, args.dv))
    else:
        raise UsageError("give a spectrum file or --U for the dimer model")
    seed = default_seed() if args.seed is None else args.seed
    numeric = args.numeric or (args.modes is not None and args.modes != 2) or len(spec) > 4
    if numeric:
        opts = MinimizerOptions(restarts=args.restarts, seed=seed)
        result = df_numeric(spec, args.modes, opts, allow_fewer_modes=args.allow_fewer_modes)
    else:
        result = df_four_level(spec)
    report = {
        "levels": len(spec),
        "df": result.df,
        "branch": result.branch,
        "b": list(result.params.b),
        "optimal_spectrum": result.free_spectrum.probs.tolist(),
    }
    emit(report, args.json)
    if result.log and args.log:
        print("# restart log", file=sys.stderr)
        for entry in result.log:
            print(
                f"# start {entry['start']:3d}  x0={','.join(fmt(x) for x in entry['x0'])}  "
                f"df={fmt(entry['df'])}  iterations={entry['iterations']}",
                file=sys.stderr,
            )
    return EXIT_OK


def cmd_ks(args) -> int:
    point = analyze_point(args.J, args.U, args.dv, args.L, args.n_up, args.n_down)
    ks = point.ks
    report = {
        "J": args.J,
        "U": args.U,
        "dv": args.dv,
        "v_ks": list(ks.v_ks),
        "dv_ks": ks.dv,
        "densities_int": point.n_int.tolist(),
        "densities_ks": ks.densities.tolist(),
        "residual": ks.residual,
        "iterations": ks.iterations,
        "S_int": point.values["S_int"],
        "S_ks": point.values["S_ks"],
        "Dtr_int_ks": point.values["Dtr_int_ks"],
    }
    emit(report, args.json)
    return EXIT_OK


def cmd_aux(args) -> int:
    if args.mu is not None:
        mu = args.mu
    elif args.U is not None:
        four = df_four_level(dimer_entanglement_spectrum(dimer_closed_form(args.J, args.U, args.dv)))
        mu = mu_from_levels(*pair_levels(four.free_spectrum), args.J)
    else:
        raise UsageError("give --mu or --U (with --dv) to derive mu from the dimer")
    p = AuxParams(J=args.J, mu=mu)
    spec = aux_ground_spectrum(p)
    report = {
        "J": args.J,
        "mu": mu,
        "spectrum": spec.probs.tolist(),
        "entropy": entropy(spec),
        "chain_densities": aux_chain_densities(p).tolist(),
    }
    emit(report, args.json)
    return EXIT_OK


def verify_point(cfg: SweepConfig, U: float, n_observables: int, seed: int) -> dict:
    point = _sweep_point(cfg, U)
    df = point.df.df
    observable = verify_observable_bound(point.rho_int, point.opt, n_observables, seed)
    n_cut = len(point.cut)
    constant = density_bound_constant(n_cut if cfg.L > 2 else cfg.L)
    if cfg.L == 2:
        n_opt = block_densities(point.opt.matrix, point.cut, point.n_int, point.n_particles)
        n_ks = point.ks.densities
        n_int = point.n_int
    else:
        # beyond the dimer only the cut sites are constrained by the subsystem state
        sites = list(point.cut)
        n_int = point.n_int[sites]
        n_opt = block_densities(point.opt.matrix, point.cut, point.n_int, point.n_particles)[sites]
        n_ks = point.ks.densities[sites]
    density = verify_density_bound(n_int, n_opt, df, constant)
    density_ks = verify_density_bound(n_ks, n_opt, df, constant)
    triangle = verify_triangle(point.rho_int, point.rho_ks, df)
    worst = max(observable, key=lambda r: r.lhs - r.rhs)
    ks_opt = point.values["Dtr_ks_opt"]
    return {
        "U": U,
        "DF": df,
        "observable_violations": sum(not r.satisfied for r in observable),
        "observable_min_slack": worst.slack,
        "density_slack": density.slack,
        "density_satisfied": density.satisfied,
        "density_ks_slack": density_ks.slack,
        "density_ks_satisfied": density_ks.satisfied,
        "triangle_slack": triangle.slack,
        "triangle_satisfied": triangle.satisfied,
        "triangle_ratio": triangle.ratio,
        "triangle_flag": triangle.flag,
        "ks_opt_ratio": ks_opt / df if df > 1e-12 else (math.inf if ks_opt > 1e-10 else math.nan),
    }


def cmd_verify(args) -> int:
    cfg = load_config(args)
    failures = []
    print(
        "# U  DF  obs_violations  obs_min_slack  density_slack  density_ks_slack  "
        "triangle_slack  triangle_ratio  flag  Dtr_ks_opt/DF"
    )
    for k, U in enumerate(cfg.U_grid):
        r = verify_point(cfg, U, args.observables, cfg.seed + k)
        print(
            f"{fmt(U)}  {fmt(r['DF'])}  {r['observable_violations']}  {fmt(r['observable_min_slack'])}  "
            f"{fmt(r['density_slack'])}  {fmt(r['density_ks_slack'])}  {fmt(r['triangle_slack'])}  "
            f"{fmt(r['triangle_ratio'])}  {r['triangle_flag']}  {fmt(r['ks_opt_ratio'])}"
        )
        hard = r["observable_violations"] or not (
            r["density_satisfied"] and r["density_ks_satisfied"] and r["triangle_satisfied"]
        )
        if hard:
            failures.append(r)
    if failures:
        for r in failures:
            print(f"bound violation at J={fmt(cfg.J)} dv={fmt(cfg.dv)} U={fmt(r['U'])}", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"# all hard bounds hold at {len(cfg.U_grid)} points")
    return EXIT_OK


def _add_model_flags(p: argparse.ArgumentParser, U_required: bool = True) -> None:
    p.add_argument("--J", type=float, default=1.0, help="hopping amplitude")
    p.add_argument("--U", type=float, required=U_required, default=None, help="on-site interaction")
    p.add_argument("--dv", type=float, default=0.0, help="potential asymmetry v1 - v2")


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with sweep settings; flags override it")
    p.add_argument("--J", type=float)
    p.add_argument("--dv", type=float)
    p.add_argument("--U-min", dest="U_min", type=float)
    p.add_argument("--U-max", dest="U_max", type=float)
    p.add_argument("--U-count", dest="U_count", type=int)
    p.add_argument("--U-scale", dest="U_scale", choices=("linear", "log"))
    p.add_argument("--U-values", dest="U_values", type=_float_list, help="explicit comma-separated U grid")
    p.add_argument("--L", type=int)
    p.add_argument("--n-up", dest="n_up", type=int)
    p.add_argument("--n-down", dest="n_down", type=int)
    p.add_argument("--seed", type=int, help="random seed (default: $FREEFIT_SEED or 0)")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freefit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"freefit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dimer", help="closed-form analysis of the Hubbard dimer")
    _add_model_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dimer)

    p = sub.add_parser("sweep", help="scan U and write a CSV")
    _add_sweep_flags(p)
    p.add_argument("--columns", help="comma-separated subset of " + ",".join(CSV_COLUMNS))
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--plot-script", dest="plot_script", help="write a gnuplot script for the CSV")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("df", help="interaction distance of a spectrum")
    p.add_argument("file", nargs="?", help="spectrum file, one probability per line")
    _add_model_flags(p, U_required=False)
    p.add_argument("--modes", type=int, help="number of free modes (forces the numerical solver if != 2)")
    p.add_argument("--numeric", action="store_true", help="use the numerical minimiser")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-fewer-modes", dest="allow_fewer_modes", action="store_true")
    p.add_argument("--no-log", dest="log", action="store_false", help="suppress the restart log")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_df)

    p = sub.add_parser("ks", help="Kohn-Sham inversion at one point")
    _add_model_flags(p)
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--n-up", dest="n_up", type=int)
    p.add_argument("--n-down", dest="n_down", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("aux", help="auxiliary spinless model")
    _add_model_flags(p, U_required=False)
    p.add_argument("--mu", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_aux)

    p = sub.add_parser("verify", help="check the bounds over a U grid")
    _add_sweep_flags(p)
    p.add_argument("--observables", type=int, default=500, help="random observables per point")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FreefitError as exc:
        print(f"freefit: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"freefit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
