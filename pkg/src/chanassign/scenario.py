"""Random problem instances and labeled datasets.

Users are dropped uniformly in a square cell with the base station at the
center; the channel combines log-distance path loss with unit-mean
exponential small-scale fading drawn independently per (user, subchannel).
Every sample is a pure function of (master seed, sample index), so datasets
can be generated in parallel chunks and still come out bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle, solver, surrogate
from .errors import (DataFormatError, DimensionError, ParameterError,
                     SizeGuardError, SplitError)


@dataclass(frozen=True)
class ChannelParams:
    """Cell geometry and radio constants used to draw instances.

    Path loss follows ``offset + slope*log10(d_km)`` in dB; the defaults are
    the standard macro-cell values with 0.1 W terminals, 1 MHz subchannels
    and -174 dBm/Hz noise density.
    """

    cell_side_m: float = 500.0
    pathloss_offset_db: float = 128.1
    pathloss_slope_db: float = 37.6
    tx_power_w: float = 0.1
    bandwidth_hz: float = 1.0e6
    noise_density_w_hz: float = 10.0 ** (-20.4)
    min_distance_m: float = 1.0

    def validate(self):
        for name in ("cell_side_m", "pathloss_offset_db", "pathloss_slope_db",
                     "tx_power_w", "bandwidth_hz", "noise_density_w_hz",
                     "min_distance_m"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be positive and finite, got {v}")
        if self.min_distance_m >= self.cell_side_m / 2:
            raise ParameterError("min_distance_m must fit inside the cell")


@dataclass
class Scenario:
    """One physical problem instance."""

    num_users: int
    num_subchannels: int
    per_channel_quota: int
    bandwidth: float  # Hz per subchannel
    noise_density: float  # W/Hz
    tx_power: np.ndarray  # (M,) W
    channel_gain: np.ndarray  # (M, N) linear power gain

    def __post_init__(self):
        m, n, a = self.num_users, self.num_subchannels, self.per_channel_quota
        if n < 1 or m < n:
            raise DimensionError(f"need M >= N >= 1, got M={m}, N={n}")
        if m != a * n:
            raise DimensionError(f"need M = A*N, got M={m}, N={n}, A={a}")
        self.tx_power = np.asarray(self.tx_power, dtype=float)
        self.channel_gain = np.asarray(self.channel_gain, dtype=float)
        if self.tx_power.shape != (m,):
            raise DimensionError(f"tx_power must have shape ({m},)")
        if self.channel_gain.shape != (m, n):
            raise DimensionError(f"channel_gain must have shape ({m}, {n})")
        for name, v in (("bandwidth", self.bandwidth),
                        ("noise_density", self.noise_density)):
            if not np.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be positive and finite")
        if not (np.isfinite(self.tx_power).all() and (self.tx_power > 0).all()):
            raise ParameterError("tx powers must be positive and finite")
        if not (np.isfinite(self.channel_gain).all()
                and (self.channel_gain > 0).all()):
            raise ParameterError("channel gains must be positive and finite")

    @property
    def dims(self):
        return (self.num_users, self.num_subchannels, self.per_channel_quota)

    @property
    def noise_power(self):
        """Total noise power per subchannel, sigma^2 * B, in W."""
        return self.noise_density * self.bandwidth


def _sample_seed(seed, index=None):
    if index is None:
        return np.random.SeedSequence(seed)
    return np.random.SeedSequence(entropy=seed, spawn_key=(int(index),))


def pathloss_gain(distance_m, params):
    """Linear power gain of the log-distance path loss at ``distance_m``."""
    pl_db = (params.pathloss_offset_db
             + params.pathloss_slope_db * np.log10(distance_m / 1000.0))
    return 10.0 ** (-pl_db / 10.0)


def generate_scenario(seed, num_users, num_subchannels, quota, params=None):
    """Draw one instance; identical seeds reproduce it bit for bit.

    ``seed`` may be an int or a numpy SeedSequence (used internally to
    derive per-sample streams from a dataset master seed).
    """
    params = params or ChannelParams()
    params.validate()
    if num_users != quota * num_subchannels:
        raise DimensionError(
            f"need M = A*N, got M={num_users}, N={num_subchannels}, A={quota}")
    if num_subchannels < 1:
        raise DimensionError("need at least one subchannel")

    rng = np.random.default_rng(
        seed if isinstance(seed, np.random.SeedSequence) else _sample_seed(seed))
    half = params.cell_side_m / 2.0
    pos = rng.uniform(-half, half, size=(num_users, 2))
    dist = np.hypot(pos[:, 0], pos[:, 1])
    while True:
        bad = dist <= params.min_distance_m
        if not bad.any():
            break
        pos[bad] = rng.uniform(-half, half, size=(int(bad.sum()), 2))
        dist[bad] = np.hypot(pos[bad, 0], pos[bad, 1])

    fading = rng.exponential(1.0, size=(num_users, num_subchannels))
    gain = pathloss_gain(dist, params)[:, None] * fading
    return Scenario(
        num_users=num_users,
        num_subchannels=num_subchannels,
        per_channel_quota=quota,
        bandwidth=params.bandwidth_hz,
        noise_density=params.noise_density_w_hz,
        tx_power=np.full(num_users, params.tx_power_w),
        channel_gain=gain,
    )


def scenario_for_sample(seed, index, dims, params=None):
    """The instance behind sample ``index`` of a dataset seeded with ``seed``."""
    m, n, a = dims
    return generate_scenario(_sample_seed(seed, index), m, n, a, params)


def effective_gains(scenario):
    """Effective gain matrix r_ij = p_i * h_ij, in W."""
    return scenario.tx_power[:, None] * scenario.channel_gain


@dataclass
class NormalizationStats:
    means: np.ndarray
    stds: np.ndarray


@dataclass
class Dataset:
    """Flattened effective-gain features with label-vector targets."""

    features: np.ndarray  # (count, M*N) float64, row-major per user
    targets: np.ndarray  # (count, M) int64, labels in 1..N
    dims: tuple
    bandwidth: float
    noise_density: float
    seed: int | None = None
    normalization_stats: NormalizationStats | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.features)

    def subset(self, idx):
        return Dataset(features=self.features[idx], targets=self.targets[idx],
                       dims=self.dims, bandwidth=self.bandwidth,
                       noise_density=self.noise_density, seed=self.seed,
                       normalization_stats=self.normalization_stats,
                       metadata=dict(self.metadata))


@dataclass
class SplitDataset:
    train: Dataset
    validation: Dataset
    test: Dataset


def _compute_stats(features):
    means = features.mean(axis=0)
    stds = features.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return NormalizationStats(means=means, stds=stds)


def generate_dataset(seed, count, dims, params=None, solver_cfg=None,
                     chunk=2048):
    """Generate, solve and label ``count`` instances.

    Labels come from the dual solver; any sample whose solve did not
    converge cleanly (or needed repair) is re-solved by the enumeration
    oracle and counted in the metadata -- samples are never dropped.
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    m, n, a = dims
    if m != a * n:
        raise DimensionError(f"need M = A*N, got M={m}, N={n}, A={a}")
    params = params or ChannelParams()
    if solver_cfg is None:
        # capped iterations: stragglers are handed to the oracle anyway
        solver_cfg = solver.SolverConfig(max_iters=400)

    features = np.empty((count, m * n))
    targets = np.empty((count, m), dtype=np.int64)
    rates = np.empty(count)
    fallback = []
    repaired = 0
    converged = 0

    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        gains = np.empty((stop - start, m, n))
        noise = np.empty(stop - start)
        bandw = params.bandwidth_hz
        for k, i in enumerate(range(start, stop)):
            sc = scenario_for_sample(seed, i, dims, params)
            gains[k] = effective_gains(sc)
            noise[k] = sc.noise_power
        batch = solver.solve_batch(gains, noise, bandw, solver_cfg)
        labels = surrogate.encode_labels(batch.assignments)
        converged += int(batch.converged.sum())
        repaired += int(batch.repair_used.sum())
        redo = ~batch.converged | batch.repair_used
        for k in np.flatnonzero(redo):
            try:
                lab, rate = oracle.brute_force_rate(gains[k], noise[k], bandw, a)
            except SizeGuardError:
                continue  # beyond the oracle guard: keep the solver's answer
            labels[k] = lab
            batch.sum_rates[k] = rate
            fallback.append(start + k)
        features[start:stop] = gains.reshape(stop - start, m * n)
        targets[start:stop] = labels
        rates[start:stop] = batch.sum_rates

    ds = Dataset(
        features=features, targets=targets, dims=(m, n, a),
        bandwidth=params.bandwidth_hz, noise_density=params.noise_density_w_hz,
        seed=int(seed),
        metadata={
            "solver_converged": converged,
            "solver_repaired": repaired,
            "oracle_fallback": len(fallback),
            "fallback_indices": fallback,
            "sum_rates": rates,
        },
    )
    # canonical split statistics so the saved sidecar matches what training
    # (which splits with the same seed) will use
    if count >= 10:
        ds.normalization_stats = split_dataset(ds, seed).train.normalization_stats
    else:
        ds.normalization_stats = _compute_stats(features)
    return ds


def split_dataset(dataset, seed):
    """Shuffle by seed, split 70/20/10 (remainder to train), and attach
    normalization statistics computed on the train part only."""
    count = len(dataset)
    if count < 10:
        raise SplitError(f"need at least 10 samples to split, got {count}")
    perm = np.random.default_rng(_sample_seed(seed)).permutation(count)
    n_train = int(0.7 * count)
    n_val = int(0.2 * count)
    n_test = int(0.1 * count)
    n_train += count - (n_train + n_val + n_test)
    parts = (perm[:n_train], perm[n_train:n_train + n_val],
             perm[n_train + n_val:])
    train, val, test = (dataset.subset(p) for p in parts)
    stats = _compute_stats(train.features)
    for part in (train, val, test):
        part.normalization_stats = stats
    return SplitDataset(train=train, validation=val, test=test)


def _fmt(value):
    return repr(float(value))


def save_dataset(dataset, path):
    """Write the dataset file and its ``.norm`` sidecar.

    Format: one header line ``M,N,A,B,sigma2,count,seed`` then one line per
    record holding M*N feature values followed by M integer labels. The
    sidecar holds the normalization means and standard deviations as two
    comma-separated lines.
    """
    m, n, a = dataset.dims
    lines = [",".join([str(m), str(n), str(a), _fmt(dataset.bandwidth),
                       _fmt(dataset.noise_density), str(len(dataset)),
                       str(dataset.seed if dataset.seed is not None else 0)])]
    for feat, lab in zip(dataset.features, dataset.targets):
        lines.append(",".join([_fmt(v) for v in feat]
                              + [str(int(v)) for v in lab]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    stats = dataset.normalization_stats or _compute_stats(dataset.features)
    with open(str(path) + ".norm", "w") as fh:
        fh.write(",".join(_fmt(v) for v in stats.means) + "\n")
        fh.write(",".join(_fmt(v) for v in stats.stds) + "\n")


def load_dataset(path):
    """Read a dataset file written by `save_dataset`."""
    with open(path) as fh:
        header = fh.readline().strip()
        fields = header.split(",")
        if len(fields) != 7:
            raise DataFormatError(f"bad dataset header: {header!r}")
        try:
            m, n, a = int(fields[0]), int(fields[1]), int(fields[2])
            bandwidth, sigma2 = float(fields[3]), float(fields[4])
            count, seed = int(fields[5]), int(fields[6])
        except ValueError as exc:
            raise DataFormatError(f"bad dataset header: {header!r}") from exc
        if m != a * n:
            raise DimensionError(f"header dims inconsistent: M={m}, N={n}, A={a}")
        features = np.empty((count, m * n))
        targets = np.empty((count, m), dtype=np.int64)
        for i in range(count):
            row = fh.readline().strip().split(",")
            if len(row) != m * n + m:
                raise DataFormatError(f"record {i} has {len(row)} fields, "
                                      f"expected {m * n + m}")
            features[i] = [float(v) for v in row[:m * n]]
            targets[i] = [int(v) for v in row[m * n:]]
    ds = Dataset(features=features, targets=targets, dims=(m, n, a),
                 bandwidth=bandwidth, noise_density=sigma2, seed=seed)
    try:
        with open(str(path) + ".norm") as fh:
            means = np.asarray([float(v) for v in fh.readline().strip().split(",")])
            stds = np.asarray([float(v) for v in fh.readline().strip().split(",")])
        if means.shape != (m * n,) or stds.shape != (m * n,):
            raise DataFormatError("normalization sidecar has the wrong width")
        ds.normalization_stats = NormalizationStats(means=means, stds=stds)
    except FileNotFoundError:
        pass
    return ds
