"""Exhaustive enumeration of feasible assignments for small instances.

Ground truth for the dual solver and for surrogate labels: every way of
packing M users into N subchannels of quota A is visited in lexicographic
label order, so ties resolve to the lexicographically smallest label vector
and the optimum is a unique function of the gain matrix.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, SizeGuardError

# 12!/(2!)^6 is about 7.5M candidates; beyond that enumeration stops being
# a desk-scale tool.
MAX_ENUM_USERS = 12


def count_assignments(num_users, num_subchannels, quota):
    """Number of feasible assignments: M! / (A!)^N."""
    return math.factorial(num_users) // math.factorial(quota) ** num_subchannels


def _check_dims(num_users, num_subchannels, quota):
    if num_users != quota * num_subchannels:
        raise DimensionError(
            f"need M = A*N, got M={num_users}, N={num_subchannels}, A={quota}")
    if num_users > MAX_ENUM_USERS:
        raise SizeGuardError(
            f"M={num_users} exceeds the enumeration guard ({MAX_ENUM_USERS})")


def _label_vectors(num_users, num_subchannels, quota):
    """Yield every feasible label vector (1-based) in lexicographic order."""
    counts = [quota] * num_subchannels
    buf = [0] * num_users

    def rec(pos):
        if pos == num_users:
            yield tuple(buf)
            return
        for j in range(num_subchannels):
            if counts[j]:
                counts[j] -= 1
                buf[pos] = j + 1
                yield from rec(pos + 1)
                counts[j] += 1

    yield from rec(0)


def enumerate_assignments(num_users, num_subchannels, quota):
    """Iterate all feasible 0/1 assignment matrices, lexicographic in the
    label-vector encoding."""
    _check_dims(num_users, num_subchannels, quota)
    eye = np.eye(num_subchannels, dtype=np.int8)
    for labels in _label_vectors(num_users, num_subchannels, quota):
        yield eye[np.asarray(labels) - 1]


def _label_chunks(num_users, num_subchannels, quota, chunk):
    buf = []
    for labels in _label_vectors(num_users, num_subchannels, quota):
        buf.append(labels)
        if len(buf) == chunk:
            yield np.asarray(buf, dtype=np.int64)
            buf = []
    if buf:
        yield np.asarray(buf, dtype=np.int64)


def brute_force_rate(r, noise_power, bandwidth, quota, chunk=8192):
    """Best (labels, rate) over all feasible assignments of a gain matrix."""
    m, n = r.shape
    _check_dims(m, n, quota)
    best_rate = -np.inf
    best_labels = None
    for block in _label_chunks(m, n, quota, chunk):
        onehot = block[:, :, None] == np.arange(1, n + 1)
        col = (onehot * r).sum(axis=1)
        rates = np.log2(1.0 + col / noise_power).sum(axis=1)
        i = int(rates.argmax())
        if rates[i] > best_rate:
            best_rate = float(rates[i])
            best_labels = block[i].copy()
    return best_labels, float(bandwidth * best_rate)


def brute_force_solve(scenario):
    """Optimal (assignment, sum rate in bit/s); ties resolve to the
    lexicographically smallest label vector."""
    r = scenario.tx_power[:, None] * scenario.channel_gain
    labels, rate = brute_force_rate(r, scenario.noise_power,
                                    scenario.bandwidth,
                                    scenario.per_channel_quota)
    eye = np.eye(scenario.num_subchannels, dtype=np.int8)
    return eye[labels - 1], rate
