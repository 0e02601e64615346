"""Command-line front end: generate, evaluate, sweep, fit, emit.

Exit codes: 0 success, 2 configuration error, 3 experiment failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import rng
from .cutset import CUTSET_CSV_HEADER, evaluate_cutset
from .harness import (ConfigError, Constants, ExperimentConfig, emit_phase_diagram,
                      emit_sweep, fit_exponent, params_for_snr)
from .network import generate_network
from .percolation import (CROSSING_CSV_HEADER, build_occupancy_grid,
                          crossing_probability, extract_cut, find_open_crossing)
from .schemes import (SCHEME_CSV_HEADER, hc_throughput, hybrid_cell_size,
                      multihop_throughput, scheme_csv_row, simulate_hybrid)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=256, help="number of S-D pairs")
    p.add_argument("--alpha", type=float, default=3.0, help="path-loss exponent")
    p.add_argument("--beta", type=float, default=0.0,
                   help="nearest-neighbor SNR exponent; snr_s = n^beta")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out", type=str, default=None, help="output file")


def _add_constants(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=1.0)
    p.add_argument("--k3", type=float, default=1.0)
    p.add_argument("--k4", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.25,
                   help="percolation cell-size fraction")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="netregime", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a network instance as JSON")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--area", type=float, default=None,
                   help="network area A (default n, unit density)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("cutset", help="evaluate the cutset bound on one instance")
    _add_common(p)
    _add_constants(p)
    p.add_argument("--mode", choices=("idealized", "percolation"),
                   default="idealized")

    p = sub.add_parser("scheme", help="closed-form scheme throughput over n")
    _add_common(p)
    _add_constants(p)
    p.add_argument("--name", choices=("multihop", "hc", "bursty_hc"),
                   default="multihop")
    p.add_argument("--n-list", type=int, nargs="+", default=None)

    p = sub.add_parser("hybrid", help="simulate the cooperate-locally scheme")
    _add_common(p)
    _add_constants(p)
    p.add_argument("--seeds", type=int, default=5, help="instance draws")

    p = sub.add_parser("percolation", help="crossing-probability study")
    _add_common(p)
    _add_constants(p)
    p.add_argument("--export-cut", type=str, default=None,
                   help="also export one certified cut as JSON")

    p = sub.add_parser("phase-diagram", help="emit the regime classification grid")
    p.add_argument("--alpha-range", type=float, nargs=2, default=(2.0, 6.0))
    p.add_argument("--beta-range", type=float, nargs=2, default=(-1.0, 3.0))
    p.add_argument("--resolution", type=int, nargs=2, default=(100, 100))
    p.add_argument("--out", type=str, required=True)

    p = sub.add_parser("fit", help="fit a scaling exponent to a CSV of n,metric")
    p.add_argument("csv", type=str)
    p.add_argument("--theory", type=float, default=math.nan)

    p = sub.add_parser("sweep", help="run an experiment described by a config file")
    p.add_argument("--config", type=str, required=True)
    p.add_argument("--workers", type=int, default=1)
    return top


def _constants(args) -> Constants:
    return Constants(K1=args.k1, K2=args.k2, K3=args.k3, K4=args.k4,
                     epsilon=args.eps, delta=args.delta, c=args.c)


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    area = float(args.n) if args.area is None else args.area
    inst = generate_network(args.n, area, args.seed)
    _emit([inst.to_json()], args.out)
    return 0


def cmd_cutset(args) -> int:
    snr_s = float(args.n) ** args.beta
    params, area = params_for_snr(snr_s, args.alpha, args.n)
    inst = generate_network(args.n, area, args.seed)
    report = evaluate_cutset(inst, params, trials=args.trials,
                             phase_seed=rng.derived_seed(args.seed, rng.PHASES),
                             mode=args.mode, c=args.c, delta=args.delta,
                             epsilon=args.eps, K1=args.k1)
    _emit([CUTSET_CSV_HEADER, report.csv_row()], args.out)
    return 0


def cmd_scheme(args) -> int:
    n_list = args.n_list or [args.n]
    rows = []
    for n in n_list:
        snr_s = float(n) ** args.beta
        if args.name == "multihop":
            est, m = multihop_throughput(n, snr_s, args.k2), 1
        elif args.name == "hc":
            est, m = hc_throughput(n, snr_s, args.alpha, args.eps, args.k3), n
        else:
            est, m = hc_throughput(n, snr_s, args.alpha, args.eps, args.k3,
                                   bursty=True), n
        rows.append(scheme_csv_row(n, args.alpha, args.beta, est, m, 0, 0,
                                   args.seed))
    _emit([SCHEME_CSV_HEADER] + rows, args.out)
    return 0


def cmd_hybrid(args) -> int:
    n = args.n
    snr_s = float(n) ** args.beta
    m = hybrid_cell_size(snr_s, args.alpha, n)
    params, area = params_for_snr(snr_s, args.alpha, n)
    rows = []
    for t in range(args.seeds):
        seed = rng.derived_seed(args.seed, rng.EXPERIMENT, t)
        inst = generate_network(n, area, seed)
        est, plan, _ = simulate_hybrid(inst, snr_s, args.alpha, args.eps,
                                       args.k3, args.k4, M=m, route_seed=seed)
        rows.append(scheme_csv_row(n, args.alpha, args.beta, est, m,
                                   plan.max_cell_load, plan.reroutes, seed))
    _emit([SCHEME_CSV_HEADER] + rows, args.out)
    return 0


def cmd_percolation(args) -> int:
    study = crossing_probability(args.n, args.c, args.trials, args.seed)
    _emit([CROSSING_CSV_HEADER, study.csv_row()], args.out)
    if args.export_cut:
        inst = generate_network(args.n, float(args.n),
                                rng.derived_seed(args.seed, rng.EXPERIMENT, 0))
        grid = build_occupancy_grid(inst, args.c)
        crossing = find_open_crossing(grid)
        if crossing is None:
            print("no open crossing for the first seed; nothing exported",
                  file=sys.stderr)
            return 3
        cut = extract_cut(crossing, grid, inst)
        with open(args.export_cut, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(cut.to_json() + "\n")
    return 0


def cmd_phase_diagram(args) -> int:
    config = ExperimentConfig(kind="phase-diagram",
                              alpha_range=tuple(args.alpha_range),
                              beta_range=tuple(args.beta_range),
                              resolution=tuple(args.resolution),
                              out=args.out)
    emit_phase_diagram(config)
    return 0


def cmd_fit(args) -> int:
    table = []
    with open(args.csv, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            n_col, m_col = header.index("n"), header.index("metric")
        except ValueError as exc:
            raise ConfigError(f"CSV must have 'n' and 'metric' columns: {exc}")
        for line in fh:
            parts = line.strip().split(",")
            if parts and parts[0]:
                table.append((int(parts[n_col]), float(parts[m_col])))
    result = fit_exponent(table, args.theory)
    sys.stdout.write(json.dumps(result.to_dict(), indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = ExperimentConfig.from_json(fh.read())
    if config.kind == "phase-diagram":
        emit_phase_diagram(config)
    else:
        emit_sweep(config, workers=args.workers)
    return 0


_HANDLERS = {
    "gen": cmd_gen,
    "cutset": cmd_cutset,
    "scheme": cmd_scheme,
    "hybrid": cmd_hybrid,
    "percolation": cmd_percolation,
    "phase-diagram": cmd_phase_diagram,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:    # experiment failure
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
