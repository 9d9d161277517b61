"""Dual-decomposition solver for uplink subchannel assignment.

The integer program -- maximize the total rate
``B * log2(1 + selected_gain_sum / (sigma^2 B))`` summed over subchannels,
subject to one subchannel per user and exactly ``A`` users per subchannel --
is attacked by relaxing the per-user constraints with multipliers ``lam``.
Each per-subchannel subproblem then has a closed-form solution: take the
``A`` users with the largest ``r_ij + kappa * lam_i`` where ``kappa`` is the
fixed point of ``kappa = ln2 * (selected gain sum + sigma^2 B)``, found by
bisection (the selected gain sum is non-increasing in ``kappa``, so the
fixed point is unique). The multipliers follow a diminishing-step
subgradient update until the objective stabilizes on a feasible assignment.

Rates are computed with the bandwidth factored out, so the multipliers are
dimensionless and the same bisection applies at any bandwidth; reported
rates and dual values are scaled back to bit/s at the end.

The batch engine (`solve_batch`) runs many independent instances in
lockstep with vectorized numpy; `solve` is the single-instance wrapper and
produces bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DimensionError, ParameterError

LN2 = math.log(2.0)


@dataclass
class SolverConfig:
    """Tuning knobs for the dual method.

    ``eta0 = None`` picks a per-instance initial step so that one subgradient
    step can move a score ``r_ij + kappa * lam_i`` by roughly one typical
    within-column gain gap.
    """

    bisection_tol: float = 1e-12
    max_iters: int = 5000
    eta0: float | None = None
    step_decay: str = "sqrt"  # "sqrt": eta_t = eta0/sqrt(t), or "constant"
    convergence_tol: float = 1e-8
    repair_enabled: bool = True

    def validate(self):
        if self.bisection_tol <= 0 or self.convergence_tol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.eta0 is not None and self.eta0 <= 0:
            raise ParameterError("eta0 must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")
        if self.step_decay not in ("sqrt", "constant"):
            raise ParameterError(f"unknown step decay {self.step_decay!r}")


@dataclass
class SolveResult:
    assignment: np.ndarray  # (M, N) int8 with entries in {0, 1}
    sum_rate: float  # bit/s
    iterations: int
    converged: bool
    repair_used: bool
    dual_trace: np.ndarray  # (iterations,) dual objective per iteration, bit/s
    bisection_steps: int = 0


@dataclass
class BatchSolveResult:
    assignments: np.ndarray  # (S, M, N) int8
    sum_rates: np.ndarray  # (S,)
    iterations: np.ndarray  # (S,) int
    converged: np.ndarray  # (S,) bool
    repair_used: np.ndarray  # (S,) bool
    min_dual: np.ndarray  # (S,) smallest dual objective seen, bit/s
    bisection_steps: np.ndarray  # (S,) int
    dual_traces: list | None = field(default=None, repr=False)


def rate_from_selection(x, r, noise_power, bandwidth=1.0):
    """Sum rate in bit/s of a 0/1 selection matrix ``x`` against gains ``r``.

    Accepts any 0/1 matrix (feasible or not); callers that need invariant
    checking go through `sum_rate`.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    col = (x * r).sum(axis=0)
    return float(bandwidth * np.log2(1.0 + col / noise_power).sum())


def check_assignment(x, num_users, num_subchannels, quota):
    """Raise DimensionError unless ``x`` is a feasible 0/1 assignment."""
    x = np.asarray(x)
    if x.shape != (num_users, num_subchannels):
        raise DimensionError(
            f"assignment shape {x.shape} != ({num_users}, {num_subchannels})")
    if not np.isin(x, (0, 1)).all():
        raise DimensionError("assignment entries must be 0 or 1")
    if not (x.sum(axis=1) == 1).all():
        raise DimensionError("every user must occupy exactly one subchannel")
    if not (x.sum(axis=0) == quota).all():
        raise DimensionError(f"every subchannel must carry exactly {quota} users")
    return x


def sum_rate(assignment, scenario):
    """Objective value of a feasible assignment, in bit/s."""
    x = check_assignment(assignment, scenario.num_users,
                         scenario.num_subchannels, scenario.per_channel_quota)
    r = scenario.tx_power[:, None] * scenario.channel_gain
    return rate_from_selection(x, r, scenario.noise_power, scenario.bandwidth)


def subchannel_score(i, j, kappa, lam, r):
    """Selection score ``r_ij + kappa * lam_i`` of user ``i`` in subchannel ``j``."""
    return float(r[i, j] + kappa * lam[i])


def _top_quota_mask(scores, quota):
    """Boolean mask of the ``quota`` largest entries per row, ties to the
    lowest user index."""
    order = np.argsort(-scores, axis=1, kind="stable")
    mask = np.zeros(scores.shape, dtype=bool)
    np.put_along_axis(mask, order[:, :quota], True, axis=1)
    return mask


def select_top_a(j, kappa, lam, scenario):
    """0/1 column selecting the quota users with the largest scores in ``j``."""
    m = scenario.num_users
    quota = scenario.per_channel_quota
    if quota > m:
        raise DimensionError(f"quota {quota} exceeds user count {m}")
    r = scenario.tx_power[:, None] * scenario.channel_gain
    scores = (r[:, j] + kappa * np.asarray(lam, dtype=float))[None, :]
    return _top_quota_mask(scores, quota)[0].astype(np.int8)


def _bisect_columns(r_cols, lam_cols, noise, quota, tol):
    """Per-column kappa fixed point for K columns at once.

    r_cols, lam_cols: (K, M); noise: (K,) total noise power per column.

    Returns (kappa, exact, sel, sel_lo, sel_hi, steps). Where ``exact`` is
    True the fixed point was hit exactly (the selection at the returned
    kappa reproduces it bitwise); elsewhere the bracket collapsed onto a
    selection change and ``sel_lo``/``sel_hi`` are the selections on either
    side of the crossing.
    """
    K, m = r_cols.shape
    lo = LN2 * noise
    kth = m - quota
    top_sums = np.partition(r_cols, kth, axis=1)[:, kth:].sum(axis=1)
    hi = LN2 * (top_sums + noise)

    sel_lo = _top_quota_mask(r_cols + lo[:, None] * lam_cols, quota)
    sel_hi = _top_quota_mask(r_cols + hi[:, None] * lam_cols, quota)

    kappa = 0.5 * (lo + hi)
    sel = sel_lo.copy()
    exact = np.zeros(K, dtype=bool)
    steps = np.zeros(K, dtype=np.int64)
    active = np.flatnonzero(hi - lo > tol * lo)

    while active.size:
        lo_a, hi_a = lo[active], hi[active]
        r_a, lam_a, noise_a = r_cols[active], lam_cols[active], noise[active]
        mid = 0.5 * (lo_a + hi_a)
        sel_mid = _top_quota_mask(r_a + mid[:, None] * lam_a, quota)
        v = LN2 * ((r_a * sel_mid).sum(axis=1) + noise_a)
        # v is itself a fixed point iff the selection at kappa=v matches.
        sel_v = _top_quota_mask(r_a + v[:, None] * lam_a, quota)
        hit = (v >= lo_a) & (v <= hi_a) & (sel_v == sel_mid).all(axis=1)
        steps[active] += 1

        idx_hit = active[hit]
        kappa[idx_hit] = v[hit]
        sel[idx_hit] = sel_mid[hit]
        exact[idx_hit] = True

        rest = ~hit
        up = rest & (v > mid)
        down = rest & ~up
        idx_up, idx_down = active[up], active[down]
        lo[idx_up] = mid[up]
        sel_lo[idx_up] = sel_mid[up]
        hi[idx_down] = mid[down]
        sel_hi[idx_down] = sel_mid[down]
        # stop when the bracket is narrower than tol or floats stop splitting
        keep = rest & (hi[active] - lo[active] > tol * lo[active])
        keep &= (lo[active] < mid) & (mid < hi[active])
        active = active[keep]

    rows = np.flatnonzero(~exact)
    if rows.size:
        kappa[rows] = 0.5 * (lo[rows] + hi[rows])
        # generic crossing: the two bracket selections differ by one swap, so
        # the change point is exactly where those two users' scores tie
        out_m = sel_lo[rows] & ~sel_hi[rows]
        in_m = sel_hi[rows] & ~sel_lo[rows]
        swap = (out_m.sum(axis=1) == 1) & (in_m.sum(axis=1) == 1)
        a = out_m.argmax(axis=1)
        b = in_m.argmax(axis=1)
        dl = lam_cols[rows, b] - lam_cols[rows, a]
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = (r_cols[rows, a] - r_cols[rows, b]) / dl
        use = swap & (dl != 0.0) & (cross >= lo[rows]) & (cross <= hi[rows])
        kappa[rows[use]] = cross[use]
    return kappa, exact, sel, sel_lo, sel_hi, steps


def _column_value(r_cols, lam_cols, noise, sel):
    """Relaxed column objective log2(1 + sum/noise) + lam-sum of a selection."""
    s = (r_cols * sel).sum(axis=1)
    return np.log2(1.0 + s / noise) + (lam_cols * sel).sum(axis=1)


def _swap_improve(r_cols, lam_cols, noise, sel):
    """Greedy single-swap ascent of the column objective, in place.

    Only used on columns whose bisection ended at a selection crossing;
    keeps the reported column maximizer from landing on the wrong side.
    """
    K, m = r_cols.shape
    rows = np.arange(K)
    cur_sum = (r_cols * sel).sum(axis=1)
    cur_lam = (lam_cols * sel).sum(axis=1)
    for _ in range(m * m):
        # value after swapping out a (axis 1, selected) and in b (axis 2, not)
        new_sum = cur_sum[:, None, None] - r_cols[:, :, None] + r_cols[:, None, :]
        new_lam = cur_lam[:, None, None] - lam_cols[:, :, None] + lam_cols[:, None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.log2(1.0 + new_sum / noise[:, None, None]) + new_lam
        val = np.where(sel[:, :, None] & ~sel[:, None, :], val, -np.inf)
        flat = val.reshape(K, m * m)
        pick = flat.argmax(axis=1)
        best = flat[rows, pick]
        cur = np.log2(1.0 + cur_sum / noise) + cur_lam
        do = best > cur
        if not do.any():
            break
        a, b = pick[do] // m, pick[do] % m
        idx = rows[do]
        sel[idx, a] = False
        sel[idx, b] = True
        cur_sum[idx] += r_cols[idx, b] - r_cols[idx, a]
        cur_lam[idx] += lam_cols[idx, b] - lam_cols[idx, a]
    return sel


def _solve_columns(r_cols, lam_cols, noise, quota, tol):
    """Solve K per-subchannel subproblems.

    Returns (kappa, sel, dual_value, steps, exact). ``dual_value`` is the
    relaxed column maximum: at an exact fixed point that is the value of the
    binary selection itself; at a crossing it is the fractional blend of the
    two bracketing selections (the exact relaxed optimum there), so dual
    objectives built from it always dominate any feasible assignment.
    """
    kappa, exact, sel, sel_lo, sel_hi, steps = _bisect_columns(
        r_cols, lam_cols, noise, quota, tol)
    dual = np.empty(len(kappa))
    dual[exact] = _column_value(r_cols[exact], lam_cols[exact],
                                noise[exact], sel[exact])
    jump = np.flatnonzero(~exact)
    if jump.size:
        r_j, lam_j, n_j = r_cols[jump], lam_cols[jump], noise[jump]
        v_lo = _column_value(r_j, lam_j, n_j, sel_lo[jump])
        v_hi = _column_value(r_j, lam_j, n_j, sel_hi[jump])
        # exact relaxed value: interpolate the two selections so the blended
        # gain sum hits the fixed point kappa/ln2 - noise
        t = np.maximum(kappa[jump] / LN2 - n_j, 0.0)
        s_lo = (r_j * sel_lo[jump]).sum(axis=1)
        s_hi = (r_j * sel_hi[jump]).sum(axis=1)
        gap = s_lo - s_hi
        with np.errstate(divide="ignore", invalid="ignore"):
            theta = np.where(gap > 0, (t - s_hi) / np.where(gap > 0, gap, 1.0), 1.0)
        theta = np.clip(theta, 0.0, 1.0)
        lam_lo = (lam_j * sel_lo[jump]).sum(axis=1)
        lam_hi = (lam_j * sel_hi[jump]).sum(axis=1)
        blend = np.log2(1.0 + t / n_j) + theta * lam_lo + (1.0 - theta) * lam_hi
        dual[jump] = np.maximum(blend, np.maximum(v_lo, v_hi))
        # binary selection reported for the primal side: better bracket side,
        # then greedy swap ascent
        pick_hi = v_hi > v_lo
        chosen = np.where(pick_hi[:, None], sel_hi[jump], sel_lo[jump])
        chosen = _swap_improve(r_j, lam_j, n_j, chosen.copy())
        sel[jump] = chosen
        dual[jump] = np.maximum(dual[jump],
                                _column_value(r_j, lam_j, n_j, chosen))
    return kappa, sel, dual, steps, exact


def solve_kappa(j, lam, scenario, tol=1e-12):
    """Fixed point of ``kappa = ln2 * (selected gain sum + noise)`` for
    subchannel ``j`` at multipliers ``lam``."""
    if tol <= 0:
        raise ParameterError("bisection tolerance must be positive")
    r = scenario.tx_power[:, None] * scenario.channel_gain
    kappa, _, _, _, _ = _solve_columns(
        r[:, j][None, :], np.asarray(lam, dtype=float)[None, :],
        np.array([scenario.noise_power]), scenario.per_channel_quota, tol)
    return float(kappa[0])


def solve_subproblem(j, lam, scenario, tol=1e-12):
    """Optimal 0/1 column for subchannel ``j`` at multipliers ``lam``."""
    if tol <= 0:
        raise ParameterError("bisection tolerance must be positive")
    r = scenario.tx_power[:, None] * scenario.channel_gain
    _, sel, _, _, _ = _solve_columns(
        r[:, j][None, :], np.asarray(lam, dtype=float)[None, :],
        np.array([scenario.noise_power]), scenario.per_channel_quota, tol)
    return sel[0].astype(np.int8)


def dual_update(lam, columns, eta):
    """One subgradient step: ``lam_i <- lam_i - eta * (row_sum_i - 1)``."""
    if eta <= 0:
        raise ParameterError("step size must be positive")
    x = np.asarray(columns)
    residual = x.sum(axis=1) - 1.0
    return np.asarray(lam, dtype=float) - eta * residual


def dual_objective(lam, scenario, tol=1e-12):
    """Dual function value at ``lam`` in bit/s; upper-bounds every feasible
    assignment's sum rate."""
    lam = np.asarray(lam, dtype=float)
    r = scenario.tx_power[:, None] * scenario.channel_gain
    n = scenario.num_subchannels
    r_cols = r.T.copy()
    lam_cols = np.broadcast_to(lam, (n, lam.size)).copy()
    noise = np.full(n, scenario.noise_power)
    _, _, dual, _, _ = _solve_columns(r_cols, lam_cols, noise,
                                      scenario.per_channel_quota, tol)
    return float(scenario.bandwidth * (dual.sum() - lam.sum()))


def repair_feasibility(columns, scenario):
    """Turn per-subchannel selections into a feasible assignment.

    Every over-assigned user keeps the subchannel where removing it would
    lose the most rate; the freed slots are filled with unassigned users in
    decreasing order of marginal rate gain. Ties go to the lowest index.
    """
    x = np.asarray(columns, dtype=np.int8)
    m, n = scenario.num_users, scenario.num_subchannels
    quota = scenario.per_channel_quota
    if x.shape != (m, n):
        raise DimensionError(f"columns shape {x.shape} != ({m}, {n})")
    if not (x.sum(axis=0) == quota).all():
        raise DimensionError("every input column must sum to the quota")
    r = scenario.tx_power[:, None] * scenario.channel_gain
    out = _repair_batch(x[None].astype(bool), r[None],
                        np.array([scenario.noise_power]), quota)
    return out[0].astype(np.int8)


def _repair_batch(x, r, noise, quota):
    """Batched greedy repair; see `repair_feasibility`. x: (K, M, N) bool."""
    x = x.copy()
    K, m, n = x.shape
    rows = np.arange(K)
    noise3 = noise[:, None, None]

    multi = x.sum(axis=2) > 1
    if multi.any():
        col = (r * x).sum(axis=1)[:, None, :]
        loss = np.log2(col + noise3) - np.log2(col - r * x + noise3)
        loss = np.where(x & multi[:, :, None], loss, -np.inf)
        keep = loss.argmax(axis=2)
        x[multi] = False
        k_idx, i_idx = np.nonzero(multi)
        x[k_idx, i_idx, keep[multi]] = True

    col_sums = (r * x).sum(axis=1)
    open_slots = quota - x.sum(axis=1)
    unassigned = x.sum(axis=2) == 0
    while unassigned.any():
        gain = (np.log2(col_sums[:, None, :] + r + noise3)
                - np.log2(col_sums[:, None, :] + noise3))
        gain = np.where(unassigned[:, :, None] & (open_slots[:, None, :] > 0),
                        gain, -np.inf)
        flat = gain.reshape(K, m * n)
        pick = flat.argmax(axis=1)
        do = ~np.isneginf(flat[rows, pick])
        i, j = pick[do] // n, pick[do] % n
        idx = rows[do]
        x[idx, i, j] = True
        col_sums[idx, j] += r[idx, i, j]
        open_slots[idx, j] -= 1
        unassigned[idx, i] = False
    return x


def _auto_eta0(r_norm, noise_norm, quota):
    """Per-instance initial subgradient step.

    Scores are ``r + kappa*lam`` with ``kappa ~ ln2 * column gain sum``, so a
    multiplier change of order ``1/(A*ln2)`` re-ranks typical users; start a
    factor of a few below that and let the 1/sqrt(t) decay refine.
    """
    s = r_norm.shape[0]
    return np.full(s, 0.5 / (LN2 * quota))


def solve_batch(r, noise_power, bandwidth, cfg=None, record_trace=False):
    """Run the dual method on a batch of independent instances.

    r: (S, M, N) effective gains; noise_power: scalar or (S,); bandwidth:
    scalar. Instances are normalized by their largest gain (which leaves the
    objective unchanged) so the bisection works at unit scale.
    """
    cfg = cfg or SolverConfig()
    cfg.validate()
    r = np.asarray(r, dtype=float)
    s_count, m, n = r.shape
    quota = m // n
    if quota * n != m:
        raise DimensionError(f"user count {m} is not quota*subchannels")
    noise = np.broadcast_to(np.asarray(noise_power, dtype=float), (s_count,)).copy()

    scale = r.max(axis=(1, 2))
    rn = r / scale[:, None, None]
    noisen = noise / scale

    if cfg.eta0 is not None:
        eta0 = np.full(s_count, float(cfg.eta0))
    else:
        eta0 = _auto_eta0(rn, noisen, quota)

    lam = np.zeros((s_count, m))
    best_rate = np.full(s_count, -np.inf)
    best_x = np.zeros((s_count, m, n), dtype=np.int8)
    best_rep = np.zeros(s_count, dtype=bool)
    last_rate = np.full(s_count, np.nan)
    last_feas = np.zeros(s_count, dtype=bool)
    min_dual = np.full(s_count, np.inf)
    iterations = np.zeros(s_count, dtype=np.int64)
    converged = np.zeros(s_count, dtype=bool)
    bis_steps = np.zeros(s_count, dtype=np.int64)
    traces = [[] for _ in range(s_count)] if record_trace else None

    act = np.ones(s_count, dtype=bool)
    for t in range(1, cfg.max_iters + 1):
        idx = np.flatnonzero(act)
        if idx.size == 0:
            break
        k = idx.size
        r_cols = rn[idx].transpose(0, 2, 1).reshape(k * n, m)
        lam_cols = np.repeat(lam[idx], n, axis=0)
        noise_cols = np.repeat(noisen[idx], n)
        _, sel, dual, steps, _ = _solve_columns(r_cols, lam_cols, noise_cols,
                                                quota, cfg.bisection_tol)
        bis_steps[idx] += steps.reshape(k, n).sum(axis=1)
        x = sel.reshape(k, n, m).transpose(0, 2, 1)
        d_val = dual.reshape(k, n).sum(axis=1) - lam[idx].sum(axis=1)
        min_dual[idx] = np.minimum(min_dual[idx], d_val)
        if record_trace:
            for pos, i in enumerate(idx):
                traces[i].append(d_val[pos])

        row_sums = x.sum(axis=2)
        feas = (row_sums == 1).all(axis=1)
        col = (rn[idx] * x).sum(axis=1)
        rate = np.log2(1.0 + col / noisen[idx, None]).sum(axis=1)

        cand_x = x
        cand_rate = np.where(feas, rate, -np.inf)
        cand_rep = np.zeros(k, dtype=bool)
        bad = ~feas
        if bad.any() and cfg.repair_enabled:
            xr = _repair_batch(x[bad].astype(bool), rn[idx[bad]],
                               noisen[idx[bad]], quota)
            col_r = (rn[idx[bad]] * xr).sum(axis=1)
            rate_r = np.log2(1.0 + col_r / noisen[idx[bad], None]).sum(axis=1)
            cand_x = x.copy()
            cand_x[bad] = xr
            cand_rate[bad] = rate_r
            cand_rep[bad] = True

        improve = cand_rate > best_rate[idx]
        gi = idx[improve]
        best_rate[gi] = cand_rate[improve]
        best_x[gi] = cand_x[improve]
        best_rep[gi] = cand_rep[improve]

        prev = last_rate[idx]
        conv = feas & last_feas[idx] & (
            np.abs(rate - prev) <= cfg.convergence_tol * np.abs(prev))
        iterations[idx] = t
        ci = idx[conv]
        converged[ci] = True
        # a converged iterate wins ties against the best historical one
        take = rate[conv] >= best_rate[ci]
        ti = ci[take]
        best_rate[ti] = rate[conv][take]
        best_x[ti] = x[conv][take]
        best_rep[ti] = False
        act[ci] = False

        last_rate[idx[feas]] = rate[feas]
        last_feas[idx] = feas

        cont = ~conv
        if cont.any():
            ui = idx[cont]
            eta = eta0[ui] if cfg.step_decay == "constant" else eta0[ui] / math.sqrt(t)
            lam[ui] -= eta[:, None] * (row_sums[cont] - 1.0)

    if not cfg.repair_enabled and not converged.all():
        partial = _finish_batch(best_x, best_rate, r, noise, bandwidth, scale,
                                iterations, converged, best_rep, min_dual,
                                bis_steps, traces)
        raise ConvergenceError(
            f"{int((~converged).sum())} instance(s) did not converge with repair disabled",
            result=partial)

    return _finish_batch(best_x, best_rate, r, noise, bandwidth, scale,
                         iterations, converged, best_rep, min_dual,
                         bis_steps, traces)


def _finish_batch(best_x, best_rate, r, noise, bandwidth, scale, iterations,
                  converged, best_rep, min_dual, bis_steps, traces):
    feasible = best_rate > -np.inf
    rates = np.zeros(len(best_rate))
    col = (r * best_x).sum(axis=1)
    rates[feasible] = bandwidth * np.log2(
        1.0 + col[feasible] / noise[feasible, None]).sum(axis=1)
    rates[~feasible] = np.nan
    trace_arrays = None
    if traces is not None:
        trace_arrays = [bandwidth * np.asarray(tr) for tr in traces]
    return BatchSolveResult(
        assignments=best_x,
        sum_rates=rates,
        iterations=iterations,
        converged=converged,
        repair_used=best_rep,
        min_dual=bandwidth * min_dual,
        bisection_steps=bis_steps,
        dual_traces=trace_arrays,
    )


def solve(scenario, cfg=None):
    """Solve one instance; see `solve_batch` for the algorithm."""
    r = scenario.tx_power[:, None] * scenario.channel_gain
    try:
        batch = solve_batch(r[None], np.array([scenario.noise_power]),
                            scenario.bandwidth, cfg, record_trace=True)
    except ConvergenceError as err:
        err.result = _single_result(err.result, scenario)
        raise
    return _single_result(batch, scenario)


def _single_result(batch, scenario):
    if batch is None:
        return None
    assignment = batch.assignments[0]
    feasible = np.isfinite(batch.sum_rates[0])
    return SolveResult(
        assignment=assignment,
        sum_rate=sum_rate(assignment, scenario) if feasible else float("nan"),
        iterations=int(batch.iterations[0]),
        converged=bool(batch.converged[0]),
        repair_used=bool(batch.repair_used[0]),
        dual_trace=batch.dual_traces[0],
        bisection_steps=int(batch.bisection_steps[0]),
    )
