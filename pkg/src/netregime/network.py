"""Random network instances and the phase-fading channel model.

Geometry: 2n nodes are dropped i.i.d. uniform on a 2*sqrt(A) x sqrt(A)
rectangle.  n of them are sources, paired one-to-one with the n
destinations by a uniformly random bijection that ignores location.

Channel: the gain between nodes i and k has magnitude
sqrt(G) * r_ik^(-alpha/2) and a uniform random phase, independent across
node pairs and redrawn independently for every fading realization.  In
rescaled coordinates, where distances are measured in units of the typical
nearest-neighbor spacing sqrt(A/n), the magnitude is rhat_ik^(-alpha/2).

Two SNR summaries drive everything downstream:

    snr_short = G * P / (N0 * W * (A/n)^(alpha/2))      nearest-neighbor SNR
    snr_long  = n^(1 - alpha/2) * snr_short             network-diameter SNR
                (n times the SNR between nodes separated by the diameter)

Rates are in bits (log base 2) throughout; positions in meters, powers in
Watts.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import rng

logger = logging.getLogger(__name__)


class DegenerateInstanceError(ValueError):
    """Raised when node geometry makes a channel quantity undefined."""


@dataclass(frozen=True)
class PhysicalParams:
    """Transmit power, noise level, bandwidth and path-loss environment."""

    power_P: float
    noise_N0: float
    bandwidth_W: float
    alpha: float
    gain_G: float = 1.0

    def __post_init__(self):
        for name in ("power_P", "noise_N0", "bandwidth_W", "gain_G"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.alpha < 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")


@dataclass
class NetworkInstance:
    """One random draw of node positions, roles and source-destination pairing.

    ``source_ids[j]`` talks to ``dest_ids[j]``.  Instances are immutable
    after construction; the position array is write-protected.
    """

    n_pairs: int
    area_A: float
    seed: int
    positions: np.ndarray          # shape (2n, 2)
    source_ids: np.ndarray         # shape (n,)
    dest_ids: np.ndarray           # shape (n,)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=float)
        self.source_ids = np.asarray(self.source_ids, dtype=np.intp)
        self.dest_ids = np.asarray(self.dest_ids, dtype=np.intp)
        n = self.n_pairs
        if self.positions.shape != (2 * n, 2):
            raise ValueError("positions must have shape (2*n_pairs, 2)")
        if len(self.source_ids) != n or len(self.dest_ids) != n:
            raise ValueError("need exactly n sources and n destinations")
        if set(self.source_ids) & set(self.dest_ids):
            raise ValueError("source and destination sets overlap")
        if len(set(self.source_ids) | set(self.dest_ids)) != 2 * n:
            raise ValueError("roles must cover every node exactly once")
        side = math.sqrt(self.area_A)
        eps = 1e-9 * side
        if (np.any(self.positions < -eps)
                or np.any(self.positions[:, 0] > 2 * side + eps)
                or np.any(self.positions[:, 1] > side + eps)):
            raise ValueError("positions must lie inside the 2*sqrt(A) x sqrt(A) rectangle")
        self.positions.setflags(write=False)
        self.source_ids.setflags(write=False)
        self.dest_ids.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_pairs

    @property
    def side(self) -> float:
        """Height sqrt(A) of the rectangle; the width is twice this."""
        return math.sqrt(self.area_A)

    @property
    def nn_scale(self) -> float:
        """Typical nearest-neighbor distance sqrt(A/n)."""
        return math.sqrt(self.area_A / self.n_pairs)

    @property
    def is_source(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[self.source_ids] = True
        return mask

    def to_json(self) -> str:
        doc = {
            "n": self.n_pairs,
            "area_A": self.area_A,
            "seed": self.seed,
            "positions": self.positions.tolist(),
            "roles": [1 if s else 0 for s in self.is_source],
            "pairing": [[int(s), int(d)] for s, d in zip(self.source_ids, self.dest_ids)],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "NetworkInstance":
        doc = json.loads(text)
        pairing = np.asarray(doc["pairing"], dtype=np.intp)
        return cls(
            n_pairs=int(doc["n"]),
            area_A=float(doc["area_A"]),
            seed=int(doc["seed"]),
            positions=np.asarray(doc["positions"], dtype=float),
            source_ids=pairing[:, 0],
            dest_ids=pairing[:, 1],
        )


def _has_coincident_nodes(positions: np.ndarray) -> bool:
    order = np.lexsort(positions.T)
    p = positions[order]
    return bool(np.any(np.all(p[1:] == p[:-1], axis=1)))


def generate_network(n_pairs: int, area_A: float, seed: int,
                     max_retries: int = 16) -> NetworkInstance:
    """Draw a random instance: 2n uniform positions, n sources, a uniform pairing.

    Deterministic given ``seed``.  Draws with exactly coincident nodes (a
    probability-zero event that floating point makes merely improbable) are
    rejected and retried with an offset seed.
    """
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    if area_A <= 0:
        raise ValueError(f"area_A must be positive, got {area_A}")
    side = math.sqrt(area_A)
    for attempt in range(max_retries):
        s = seed + attempt
        gen = rng.substream(s, rng.POSITIONS)
        positions = gen.uniform((0.0, 0.0), (2 * side, side), size=(2 * n_pairs, 2))
        if _has_coincident_nodes(positions):
            logger.warning("coincident nodes for seed %d, retrying with seed %d", s, s + 1)
            continue
        role_perm = rng.substream(s, rng.ROLES).permutation(2 * n_pairs)
        source_ids = np.sort(role_perm[:n_pairs])
        dest_pool = np.sort(role_perm[n_pairs:])
        dest_ids = rng.substream(s, rng.PAIRING).permutation(dest_pool)
        return NetworkInstance(n_pairs, float(area_A), seed, positions,
                               source_ids, dest_ids)
    raise DegenerateInstanceError(
        f"could not draw distinct positions after {max_retries} attempts")


def snr_short(params: PhysicalParams, n: int, area_A: float) -> float:
    """Average SNR between nearest-neighbor nodes, G*P / (N0*W*(A/n)^(alpha/2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if area_A <= 0:
        raise ValueError("area_A must be positive")
    spacing = area_A / n
    return params.gain_G * params.power_P / (
        params.noise_N0 * params.bandwidth_W * spacing ** (params.alpha / 2.0))


def snr_long(snr_s: float, n: int, alpha: float) -> float:
    """Total SNR transferable across the network diameter, n^(1-alpha/2) * snr_s."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return n ** (1.0 - alpha / 2.0) * snr_s


def beta_of(snr_s: float, n: int) -> float:
    """Finite-n exponent ln(snr_s)/ln(n) of the nearest-neighbor SNR."""
    if n < 2:
        raise ValueError("n must be >= 2 for a meaningful exponent")
    if snr_s <= 0:
        raise ValueError("snr_s must be positive")
    return math.log(snr_s) / math.log(n)


@dataclass
class ChannelMatrix:
    """Complex gains between a transmit and a receive node set.

    ``entries[i, k]`` is the gain from ``tx_ids[k]`` to ``rx_ids[i]``.  The
    ``rescaled`` flag selects between physical-unit magnitudes
    sqrt(G) * r^(-alpha/2) and rescaled magnitudes rhat^(-alpha/2).
    """

    entries: np.ndarray
    phase_seed: int
    rescaled: bool
    tx_ids: np.ndarray = field(repr=False, default=None)
    rx_ids: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.entries.setflags(write=False)


def node_phases(n_nodes: int, phase_seed: int) -> np.ndarray:
    """Uniform [0, 2pi) phases for every ordered node pair.

    The phase of pair (i, k) is a pure function of (phase_seed, i, k), so
    any submatrix sliced from it is consistent across calls.  A fresh
    phase_seed models a fresh fading realization.
    """
    gen = rng.substream(phase_seed, rng.PHASES)
    return gen.uniform(0.0, 2.0 * math.pi, size=(n_nodes, n_nodes))


def channel_matrix(instance: NetworkInstance, params: PhysicalParams,
                   tx_set, rx_set, phase_seed: int,
                   rescaled: bool = True) -> ChannelMatrix:
    """Channel matrix between two disjoint node sets for one fading draw."""
    tx = np.asarray(tx_set, dtype=np.intp)
    rx = np.asarray(rx_set, dtype=np.intp)
    if tx.size == 0 or rx.size == 0:
        raise ValueError("tx_set and rx_set must be non-empty")
    if np.intersect1d(tx, rx).size:
        raise ValueError("tx_set and rx_set must be disjoint")

    diff = instance.positions[rx][:, None, :] - instance.positions[tx][None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    if np.any(r == 0.0):
        raise DegenerateInstanceError("coincident transmitter/receiver positions")

    alpha = params.alpha
    if rescaled:
        magnitude = (r / instance.nn_scale) ** (-alpha / 2.0)
    else:
        magnitude = math.sqrt(params.gain_G) * r ** (-alpha / 2.0)

    theta = node_phases(instance.n_nodes, phase_seed)[np.ix_(rx, tx)]
    entries = magnitude * np.exp(1j * theta)
    return ChannelMatrix(entries, phase_seed, rescaled, tx, rx)


def min_separation(instance: NetworkInstance, rescaled: bool = True) -> float:
    """Smallest pairwise node distance (rescaled by sqrt(A/n) by default)."""
    tree = cKDTree(instance.positions)
    d, _ = tree.query(instance.positions, k=2)
    dmin = float(d[:, 1].min())
    return dmin / instance.nn_scale if rescaled else dmin


def separation_diagnostic(instance: NetworkInstance, delta: float = 0.05):
    """Check the rescaled minimum separation against n^-(1/2+delta).

    The bound holds with high probability but is not enforced; callers get
    the observed value, the threshold and a pass flag.
    """
    r_hat_min = min_separation(instance, rescaled=True)
    threshold = instance.n_pairs ** (-(0.5 + delta))
    ok = r_hat_min >= threshold
    if not ok:
        logger.info("rescaled min separation %.3g below n^-(1/2+delta) = %.3g",
                    r_hat_min, threshold)
    return r_hat_min, threshold, ok
