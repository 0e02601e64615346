"""Experiment orchestration: sweeps over n, exponent fits, file outputs.

An experiment is a pure function of its configuration.  Per-point seeds
are derived from (master_seed, point index, trial index) on counter-based
substreams, so running trials concurrently, or changing the worker count,
cannot change any output byte.  For regime sweeps the nearest-neighbor
SNR is pinned to n^beta exactly at every point, with the physical
parameters back-solved so the SNR definition stays consistent.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from . import rng
from .cutset import evaluate_cutset
from .network import PhysicalParams, generate_network
from .percolation import crossing_probability
from .regimes import phase_diagram, phase_diagram_csv_rows, PHASE_DIAGRAM_HEADER
from .schemes import hc_throughput, multihop_throughput, simulate_hybrid

KINDS = ("cutset", "scheme", "percolation", "phase-diagram")


class ConfigError(ValueError):
    """The experiment configuration is malformed."""


class ExperimentError(RuntimeError):
    """An experiment could not produce a usable result."""


@dataclass
class Constants:
    """Scheme and bound constants; they shift intercepts, not slopes."""

    K1: float = 1.0
    K2: float = 1.0
    K3: float = 1.0
    K4: float | None = None     # defaults to K3/4
    epsilon: float = 0.05
    delta: float = 0.05
    c: float = 0.25

    @property
    def k4(self) -> float:
        return self.K3 / 4.0 if self.K4 is None else self.K4


@dataclass
class ExperimentConfig:
    kind: str
    n_list: list[int] = field(default_factory=list)
    alpha: float = 3.0
    beta: float = 0.0
    scheme: str = "multihop"            # for kind="scheme": multihop|hc|bursty_hc|hybrid
    trials: int = 20
    instances: int = 3                  # instance draws per cutset point
    constants: Constants = field(default_factory=Constants)
    master_seed: int = 0
    mode: str = "idealized"             # cutset cut mode
    alpha_range: tuple = (2.0, 6.0)     # phase-diagram only
    beta_range: tuple = (-1.0, 3.0)
    resolution: tuple = (100, 100)
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.alpha < 2:
            raise ConfigError(f"alpha must be >= 2, got {self.alpha}")
        if self.kind != "phase-diagram":
            if not self.n_list:
                raise ConfigError("n_list must be non-empty")
            if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
                raise ConfigError("n_list must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        consts = Constants(**doc.pop("constants", {}))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("alpha_range", "beta_range", "resolution"):
            if key in doc:
                doc[key] = tuple(doc[key])
        try:
            return cls(constants=consts, **doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        doc = asdict(self)
        for key in ("alpha_range", "beta_range", "resolution"):
            doc[key] = list(doc[key])
        return doc


def params_for_snr(snr_s: float, alpha: float, n: int) -> tuple[PhysicalParams, float]:
    """Unit-power parameters and an area that realize the requested snr_s.

    With G = P = N0 = W = 1 the nearest-neighbor SNR is (A/n)^(-alpha/2),
    so A = n * snr_s^(-2/alpha) gives snr_short = snr_s exactly.
    """
    if snr_s <= 0:
        raise ValueError("snr_s must be positive")
    area = n * snr_s ** (-2.0 / alpha)
    return PhysicalParams(1.0, 1.0, 1.0, alpha, 1.0), area


@dataclass(frozen=True)
class PointRow:
    n: int
    metric: float
    stderr: float
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> str:
        return f"{self.n},{self.metric:.17g},{self.stderr:.17g}"


SWEEP_CSV_HEADER = "n,metric,stderr"


def _cutset_unit(config: ExperimentConfig, i_point: int, n: int, i_inst: int):
    snr_s = float(n) ** config.beta
    params, area = params_for_snr(snr_s, config.alpha, n)
    seed = rng.derived_seed(config.master_seed, rng.EXPERIMENT, i_point, i_inst)
    inst = generate_network(n, area, seed)
    report = evaluate_cutset(
        inst, params, trials=config.trials,
        phase_seed=rng.derived_seed(config.master_seed, rng.PHASES, i_point, i_inst),
        mode=config.mode, c=config.constants.c,
        delta=config.constants.delta, epsilon=config.constants.epsilon,
        K1=config.constants.K1)
    return report.mc_logdet, report.mc_stderr


def _scheme_unit(config: ExperimentConfig, i_point: int, n: int, i_trial: int):
    snr_s = float(n) ** config.beta
    k = config.constants
    if config.scheme == "multihop":
        return multihop_throughput(n, snr_s, k.K2).aggregate_T
    if config.scheme == "hc":
        return hc_throughput(n, snr_s, config.alpha, k.epsilon, k.K3).aggregate_T
    if config.scheme == "bursty_hc":
        return hc_throughput(n, snr_s, config.alpha, k.epsilon, k.K3,
                             bursty=True).aggregate_T
    if config.scheme == "hybrid":
        seed = rng.derived_seed(config.master_seed, rng.EXPERIMENT, i_point, i_trial)
        snr = float(n) ** config.beta
        params, area = params_for_snr(snr, config.alpha, n)
        inst = generate_network(n, area, seed)
        est, _, _ = simulate_hybrid(inst, snr, config.alpha, k.epsilon, k.K3,
                                    k.k4, route_seed=seed)
        return est.aggregate_T
    raise ConfigError(f"unknown scheme {config.scheme!r}")


def run_scaling_experiment(config: ExperimentConfig,
                           workers: int = 1) -> list[PointRow]:
    """One aggregated row per n; deterministic for any worker count.

    Points where more than 10% of trials fail are skipped with a stderr
    of NaN recorded; a fully failing experiment raises.
    """
    if config.kind == "phase-diagram":
        raise ConfigError("phase-diagram configs are emitted, not swept")

    tasks = []
    if config.kind == "cutset":
        for i, n in enumerate(config.n_list):
            for j in range(config.instances):
                tasks.append((i, n, j, _cutset_unit))
    elif config.kind == "scheme":
        deterministic = config.scheme in ("multihop", "hc", "bursty_hc")
        per_point = 1 if deterministic else config.trials
        for i, n in enumerate(config.n_list):
            for j in range(per_point):
                tasks.append((i, n, j, _scheme_unit))
    elif config.kind == "percolation":
        for i, n in enumerate(config.n_list):
            tasks.append((i, n, 0, None))

    def run_task(task):
        i, n, j, fn = task
        if config.kind == "percolation":
            study = crossing_probability(
                n, config.constants.c, config.trials,
                rng.derived_seed(config.master_seed, rng.EXPERIMENT, i))
            return (i, j), study
        try:
            return (i, j), fn(config, i, n, j)
        except Exception as exc:   # per-unit failure, tallied below
            return (i, j), exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(run_task, tasks))
    else:
        results = dict(map(run_task, tasks))

    rows = []
    for i, n in enumerate(config.n_list):
        units = [results[key] for key in sorted(results) if key[0] == i]
        if config.kind == "percolation":
            study = units[0]
            se = math.sqrt(max(study.empirical_rate * (1 - study.empirical_rate), 0.0)
                           / study.trials)
            rows.append(PointRow(n, study.empirical_rate, se, {
                "analytic_bound": study.analytic_bound,
                "decay_ok": study.decay_ok}))
            continue
        failures = [u for u in units if isinstance(u, Exception)]
        good = [u for u in units if not isinstance(u, Exception)]
        if len(failures) > 0.1 * len(units) or not good:
            rows.append(PointRow(n, math.nan, math.nan,
                                 {"failed": len(failures)}))
            continue
        if config.kind == "cutset":
            means = [g[0] for g in good]
            metric = math.fsum(means) / len(means)
            if len(means) >= 2:
                var = math.fsum((m - metric) ** 2 for m in means) / (len(means) - 1)
                stderr = math.sqrt(var / len(means))
            else:
                stderr = good[0][1]
        else:
            vals = [float(g) for g in good]
            metric = math.fsum(vals) / len(vals)
            if len(vals) >= 2:
                var = math.fsum((v - metric) ** 2 for v in vals) / (len(vals) - 1)
                stderr = math.sqrt(var / len(vals))
            else:
                stderr = 0.0
        rows.append(PointRow(n, metric, stderr))
    if all(math.isnan(r.metric) for r in rows):
        raise ExperimentError("every point of the experiment failed")
    return rows


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    theory_exponent: float
    residuals: tuple

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared,
                "theory_exponent": self.theory_exponent,
                "residuals": list(self.residuals)}


def fit_exponent(table, theory_exponent: float = math.nan) -> FitResult:
    """Ordinary least squares of ln(metric) on ln(n); the slope is the exponent."""
    pts = [(int(n), float(m)) for n, m in table]
    if len(pts) < 3:
        raise ValueError("need at least 3 points for a fit")
    if any(m <= 0 or not math.isfinite(m) for _, m in pts):
        raise ValueError("metrics must be positive and finite")
    x = np.log([n for n, _ in pts])
    y = np.log([m for _, m in pts])
    xbar, ybar = x.mean(), y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    if sxx == 0.0:
        raise ValueError("n values must not be all equal")
    slope = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = float(ybar - slope * xbar)
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(slope, intercept, max(0.0, min(1.0, r2)),
                     theory_exponent, tuple(float(r) for r in resid))


def tail_points(table) -> list:
    """Largest max(4, len-2) points when at least 6 are present, else all.

    Small-n transients bias finite-range fits; dropping the smallest
    points when enough remain gives a steadier exponent estimate.
    """
    pts = sorted(table, key=lambda t: t[0])
    if len(pts) >= 6:
        keep = max(4, len(pts) - 2)
        return pts[-keep:]
    return pts


def fit_full_and_tail(table, theory_exponent: float = math.nan):
    """(full-range fit, tail fit) of the same table."""
    return (fit_exponent(table, theory_exponent),
            fit_exponent(tail_points(table), theory_exponent))


def write_lines(path: str, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def write_manifest(out_path: str, config: ExperimentConfig) -> str:
    """Record config, package version and a content hash next to the output."""
    with open(out_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "content_sha256": digest,
    }
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_sweep(config: ExperimentConfig, workers: int = 1) -> str:
    if not config.out:
        raise ConfigError("config.out must name an output file")
    rows = run_scaling_experiment(config, workers=workers)
    write_lines(config.out, SWEEP_CSV_HEADER, [r.csv_row() for r in rows])
    write_manifest(config.out, config)
    return config.out


def emit_phase_diagram(config: ExperimentConfig) -> tuple[str, str]:
    """Write the classification CSV plus a regime-id grid for plotting.

    The grid file holds one row per alpha value (ascending), one integer
    regime id (1..4) per beta value (ascending), space separated.
    """
    if config.kind != "phase-diagram":
        raise ConfigError("emit_phase_diagram needs kind='phase-diagram'")
    if not config.out:
        raise ConfigError("config.out must name an output file")
    cells = phase_diagram(config.alpha_range, config.beta_range, config.resolution)
    write_lines(config.out, PHASE_DIAGRAM_HEADER, phase_diagram_csv_rows(cells))
    n_alpha, n_beta = config.resolution
    ids = {"I": 1, "II": 2, "III": 3, "IV": 4}
    grid_path = config.out + ".grid.txt"
    with open(grid_path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(n_alpha):
            row = cells[i * n_beta:(i + 1) * n_beta]
            fh.write(" ".join(str(ids[c.point.regime.value]) for c in row) + "\n")
    write_manifest(config.out, config)
    return config.out, grid_path
