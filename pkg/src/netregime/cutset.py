"""Cutset upper-bound machinery for the network midline.

Traffic crossing the vertical bisection is bounded by the capacity of the
MIMO channel between the left node set S and the right node set D.  In
rescaled coordinates the right half splits into a high-SNR strip V_D of
width w_hat - 1 next to the cut, whose transfer is degrees-of-freedom
limited, and the remainder, whose transfer is bounded by its total
received SNR:

    snr_total = snr_s * sum_{i in far} d_hat_i,   d_hat_i = sum_{k in S} rhat_ik^(-alpha)

The strip width is picked so every V_D node has received SNR >= 1 under
independent unit-power signalling from the left:

    w_hat = sqrt(n)                if snr_s >= n^(alpha/2 - 1)
    w_hat = 1                      if snr_s < 1
    w_hat = sqrt(n)                if alpha == 2, otherwise
    w_hat = snr_s^(1/(alpha - 2))  for 1 <= snr_s < n^(alpha/2 - 1)

Two cut modes are supported.  The "idealized" mode clears the unit strip
immediately right of the cut (those nodes are excluded and reported); the
"percolation" mode uses a node-free polyline cut from
:mod:`netregime.percolation` and accounts the slab's right-side nodes (the
B set) on the power side.

Monte-Carlo evaluation uses the identity transmit covariance, which is an
achievable value for the power transfer and sits below the analytic
degrees-of-freedom plus power envelope on every fading realization.
Rates are bits/s/Hz; the polylog factors in the closed forms use natural
logarithms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from math import fsum
from typing import NamedTuple

import numpy as np

from . import percolation as perc
from . import rng
from .network import (NetworkInstance, PhysicalParams, channel_matrix,
                      snr_short)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class PathologicalCutError(ValueError):
    """A cut left one side of the network empty."""


@dataclass
class CutPartition:
    """Node sets induced by a vertical cut and a strip width w_hat.

    ``far_D`` collects every right-side node whose information transfer is
    accounted by received power, including the slab B set in percolation
    mode.  ``excluded_E`` holds idealized-mode strip nodes dropped from D.
    """

    cut_x: float
    w_hat: float
    left_S: np.ndarray
    strip_VD: np.ndarray
    far_D: np.ndarray
    excluded_E: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    b_set: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    mode: str = "idealized"

    @property
    def right_D(self) -> np.ndarray:
        return np.sort(np.concatenate([self.strip_VD, self.far_D]))


def select_cut_width(snr_s: float, n: int, alpha: float) -> float:
    """Rescaled strip width w_hat for the given nearest-neighbor SNR."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    root_n = math.sqrt(n)
    if snr_s >= n ** (alpha / 2.0 - 1.0):
        return root_n
    if snr_s < 1.0:
        return 1.0
    if alpha == 2.0:
        return root_n
    return snr_s ** (1.0 / (alpha - 2.0))


def partition_nodes(instance: NetworkInstance, w_hat: float,
                    mode: str = "idealized",
                    cut: "perc.CutPolyline | None" = None,
                    grid: "perc.PercolationGrid | None" = None) -> CutPartition:
    """Split nodes into S, V_D and the power-accounted remainder.

    Idealized mode cuts at the midline x = sqrt(A) and drops right-side
    nodes at rescaled distance < 1 (the assumed-empty strip).  Percolation
    mode classifies nodes against the polyline cut; B-set nodes stay in
    ``far_D`` and are reported separately.
    """
    n = instance.n_pairs
    if not 1.0 <= w_hat <= math.sqrt(n) * (1 + 1e-12):
        raise ValueError(f"w_hat must lie in [1, sqrt(n)], got {w_hat}")
    scale = instance.nn_scale
    mid = instance.side

    if mode == "idealized":
        xhat = (instance.positions[:, 0] - mid) / scale
        left = np.nonzero(xhat < 0.0)[0]
        excluded = np.nonzero((xhat >= 0.0) & (xhat < 1.0))[0]
        vd = np.nonzero((xhat >= 1.0) & (xhat <= w_hat))[0]
        far = np.nonzero(xhat > w_hat)[0]
        part = CutPartition(mid, w_hat, left, vd, far, excluded_E=excluded)
    elif mode == "percolation":
        if cut is None or grid is None:
            raise ValueError("percolation mode needs a cut polyline and its grid")
        left, b_set, right_out = perc.split_by_cut(grid, cut, instance)
        xhat = (instance.positions[right_out, 0] - mid) / scale
        in_strip = (xhat >= 1.0) & (xhat <= w_hat)
        vd = right_out[in_strip]
        far = np.sort(np.concatenate([right_out[~in_strip], b_set]))
        part = CutPartition(mid, w_hat, left, vd, far, b_set=b_set,
                            mode="percolation")
    else:
        raise ValueError(f"unknown cut mode {mode!r}")

    if part.left_S.size == 0 or part.right_D.size == 0:
        raise PathologicalCutError("draw left one side of the cut empty")
    if part.excluded_E.size:
        logger.debug("excluded %d strip nodes from D", part.excluded_E.size)
    return part


def _dhat(instance: NetworkInstance, alpha: float, targets: np.ndarray,
          sources: np.ndarray) -> np.ndarray:
    """Received power profile d_hat_i = sum_k rhat_ik^(-alpha), phase free."""
    if len(targets) == 0:
        return np.empty(0)
    diff = (instance.positions[targets][:, None, :]
            - instance.positions[sources][None, :, :])
    rhat = np.sqrt(np.sum(diff * diff, axis=2)) / instance.nn_scale
    if np.any(rhat == 0.0):
        raise PathologicalCutError("coincident nodes across the cut")
    return np.sum(rhat ** (-alpha), axis=1)


class ProfileEntry(NamedTuple):
    node: int
    d_hat: float
    d_hat_approx: float


def power_profile(instance: NetworkInstance, alpha: float, target_ids,
                  source_ids=None, cut_x: float | None = None) -> list[ProfileEntry]:
    """Exact d_hat for each target plus the xhat^(2-alpha) approximation.

    ``source_ids`` defaults to all nodes left of the midline; ``cut_x``
    defaults to the midline itself.
    """
    targets = np.asarray(target_ids, dtype=np.intp)
    mid = instance.side if cut_x is None else cut_x
    if source_ids is None:
        sources = np.nonzero(instance.positions[:, 0] < mid)[0]
    else:
        sources = np.asarray(source_ids, dtype=np.intp)
    d = _dhat(instance, alpha, targets, sources)
    xhat = (instance.positions[targets, 0] - mid) / instance.nn_scale
    approx = xhat ** (2.0 - alpha) if alpha != 2.0 else np.ones_like(xhat)
    return [ProfileEntry(int(i), float(dh), float(ap))
            for i, dh, ap in zip(targets, d, approx)]


def snr_total(instance: NetworkInstance, partition: CutPartition,
              snr_s: float, alpha: float) -> float:
    """Total received SNR of the power-limited right-side nodes, exactly summed."""
    if partition.far_D.size == 0:
        return 0.0
    d = _dhat(instance, alpha, partition.far_D, partition.left_S)
    return snr_s * fsum(d.tolist())


def closed_form_snr_total_bound(snr_s: float, n: int, alpha: float,
                                w_hat: float, K1: float = 1.0) -> float:
    """Closed-form bound on snr_total; natural-log polylog factors.

    Not applicable when w_hat = sqrt(n) (the far set is empty there).
    """
    if K1 <= 0:
        raise ValueError("K1 must be positive")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    if abs(w_hat - math.sqrt(n)) <= 1e-12 * math.sqrt(n):
        raise ValueError("bound does not apply at w_hat = sqrt(n)")
    ln_n = math.log(n)
    if alpha == 2.0:
        return K1 * snr_s * n * ln_n ** 3
    if alpha < 3.0:
        return K1 * snr_s * n ** (2.0 - alpha / 2.0) * ln_n ** 2
    if alpha == 3.0:
        return K1 * snr_s * math.sqrt(n) * ln_n ** 3
    return K1 * snr_s * w_hat ** (3.0 - alpha) * math.sqrt(n) * ln_n ** 2


def dof_term(partition: CutPartition, snr_s: float, n: int, alpha: float,
             delta: float = 0.05) -> float:
    """High-probability strip bound (w-1)*sqrt(n)*ln(n)*log2(1 + n^(1+alpha(1/2+delta))*snr_s).

    Zero when the strip is empty.  The count factor (w-1)*sqrt(n)*ln(n) is
    a with-high-probability bound; for per-realization chains use
    :func:`dof_term_realized`.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if partition.strip_VD.size == 0:
        return 0.0
    count = (partition.w_hat - 1.0) * math.sqrt(n) * math.log(n)
    level = n ** (1.0 + alpha * (0.5 + delta)) * snr_s
    return count * math.log2(1.0 + level)


def dof_term_realized(instance: NetworkInstance, partition: CutPartition,
                      snr_s: float, alpha: float) -> float:
    """Realized strip bound sum_i log2(1 + n * snr_s * d_hat_i) over V_D.

    The factor n covers any admissible transmit covariance with unit
    per-node power, so this dominates the identity-covariance log-det of
    the strip block on every realization.
    """
    if partition.strip_VD.size == 0:
        return 0.0
    n = instance.n_pairs
    d = _dhat(instance, alpha, partition.strip_VD, partition.left_S)
    return fsum(math.log2(1.0 + n * snr_s * float(di)) for di in d)


def upper_bound_exponent(alpha: float, beta: float) -> float:
    """Scaling exponent of the cutset upper bound at (alpha, beta)."""
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    if beta >= alpha / 2.0 - 1.0:
        return 1.0
    if alpha < 3.0:
        return 2.0 - alpha / 2.0 + beta
    if beta <= 0.0:
        return 0.5 + beta
    return 0.5 + beta / (alpha - 2.0)


def identity_logdet(entries: np.ndarray, snr_s: float) -> float:
    """log2 det(I + snr_s * H H*) via Hermitian eigenvalues of the smaller Gram."""
    m, k = entries.shape
    if m <= k:
        gram = entries @ entries.conj().T
    else:
        gram = entries.conj().T @ entries
    lam = np.linalg.eigvalsh(gram)
    lam = np.clip(lam.real, 0.0, None)
    return fsum(math.log2(1.0 + snr_s * float(v)) for v in lam)


@dataclass(frozen=True)
class MCLogdet:
    mean: float
    stderr: float
    values: tuple
    trials_requested: int
    discarded: int

    @property
    def trials_used(self) -> int:
        return len(self.values)


def mc_cutset_logdet(instance: NetworkInstance, partition: CutPartition,
                     params: PhysicalParams, trials: int,
                     phase_seed: int) -> MCLogdet:
    """Identity-covariance cutset value, averaged over fading redraws.

    Each trial redraws every pairwise phase from an independent substream
    of ``phase_seed``, so trial t is reproducible regardless of execution
    order.  Non-finite trial values are discarded and counted.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    snr_s = snr_short(params, instance.n_pairs, instance.area_A)
    tx = np.sort(partition.left_S)
    rx = partition.right_D
    values = []
    discarded = 0
    for t in range(trials):
        h = channel_matrix(instance, params, tx, rx,
                           phase_seed=rng.derived_seed(phase_seed, t),
                           rescaled=True)
        v = identity_logdet(h.entries, snr_s)
        if math.isfinite(v):
            values.append(v)
        else:
            discarded += 1
            logger.warning("discarded non-finite log-det trial %d", t)
    if not values:
        raise ArithmeticError("every Monte-Carlo trial was non-finite")
    mean = fsum(values) / len(values)
    if len(values) >= 2:
        var = fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
        stderr = math.sqrt(var / len(values))
    else:
        stderr = math.nan
    return MCLogdet(mean, stderr, tuple(values), trials, discarded)


@dataclass
class CutsetReport:
    """Everything measured for one cut: analytic terms, bound, and Monte-Carlo value.

    ``dof_term`` is the realized strip sum used in per-realization chains;
    ``dof_term_whp`` is the closed-form high-probability count bound.
    ``power_term`` is n^epsilon * snr_total / ln 2, in bits;
    ``closed_form_bound`` is NaN when w_hat = sqrt(n).
    """

    n: int
    alpha: float
    beta: float
    w_hat: float
    size_VD: int
    dof_term: float
    dof_term_whp: float
    snr_total: float
    power_term: float
    mc_logdet: float
    mc_stderr: float
    closed_form_bound: float
    trials: int
    seed: int
    size_B: int = 0
    excluded: int = 0
    discarded: int = 0
    mode: str = "idealized"

    def csv_row(self) -> str:
        cols = [str(self.n)]
        for v in (self.alpha, self.beta, self.w_hat):
            cols.append(f"{v:.17g}")
        cols.append(str(self.size_VD))
        for v in (self.dof_term, self.snr_total, self.power_term,
                  self.mc_logdet, self.mc_stderr, self.closed_form_bound):
            cols.append(f"{v:.17g}")
        cols.append(str(self.trials))
        cols.append(str(self.seed))
        return ",".join(cols)


CUTSET_CSV_HEADER = ("n,alpha,beta,w_hat,size_VD,dof_term,snr_total,power_term,"
                     "mc_logdet,mc_stderr,closed_form_bound,trials,seed")


def evaluate_cutset(instance: NetworkInstance, params: PhysicalParams,
                    trials: int = 20, phase_seed: int = 0,
                    mode: str = "idealized", c: float = 0.25,
                    delta: float = 0.05, epsilon: float = 0.05,
                    K1: float = 1.0) -> CutsetReport:
    """Full cutset evaluation of one instance: partition, terms and Monte-Carlo."""
    n = instance.n_pairs
    snr_s = snr_short(params, n, instance.area_A)
    w_hat = select_cut_width(snr_s, n, params.alpha)
    if mode == "percolation":
        grid = perc.build_occupancy_grid(instance, c)
        crossing = perc.find_open_crossing(grid)
        if crossing is None:
            raise PathologicalCutError("no node-free crossing in the slab")
        cut = perc.extract_cut(crossing, grid, instance)
        part = partition_nodes(instance, w_hat, mode="percolation",
                               cut=cut, grid=grid)
    else:
        part = partition_nodes(instance, w_hat, mode="idealized")

    snr_tot = snr_total(instance, part, snr_s, params.alpha)
    dof_real = dof_term_realized(instance, part, snr_s, params.alpha)
    dof_whp = dof_term(part, snr_s, n, params.alpha, delta)
    power = n ** epsilon * snr_tot / LN2
    try:
        bound = closed_form_snr_total_bound(snr_s, n, params.alpha, w_hat, K1)
    except ValueError:
        bound = math.nan
    mc = mc_cutset_logdet(instance, part, params, trials, phase_seed)
    return CutsetReport(
        n=n, alpha=params.alpha, beta=math.log(snr_s) / math.log(n) if n > 1 else 0.0,
        w_hat=w_hat, size_VD=int(part.strip_VD.size),
        dof_term=dof_real, dof_term_whp=dof_whp,
        snr_total=snr_tot, power_term=power,
        mc_logdet=mc.mean, mc_stderr=mc.stderr,
        closed_form_bound=bound, trials=mc.trials_used,
        seed=instance.seed, size_B=int(part.b_set.size),
        excluded=int(part.excluded_E.size), discarded=mc.discarded,
        mode=mode)
