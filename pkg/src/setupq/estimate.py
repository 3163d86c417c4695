"""Replicated estimation with Student-t confidence intervals.

estimate() runs independent replications (sequentially by default, or in a
process pool when workers > 1), averages the per-replication means, and
attaches 95% t-intervals. Results are merged in replication order, so the
worker count never changes the numbers. Queue-length and waiting-time
estimates from the same runs are cross-checked through Little's law.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import (
    InsufficientReplications,
    ParameterError,
    SimulationError,
    ZeroReference,
)
from .model import SetupPolicy, SystemParams, validate
from .simengine import (
    CycleStats,
    ReplicationResult,
    SimConfig,
    run_renewal_cycles,
    run_replication,
)

WORKERS_ENV = "SETUPQ_MAX_WORKERS"

MEAN_QUEUE_LENGTH = "mean_queue_length"
MEAN_WAIT = "mean_wait"
MEAN_JOBS = "mean_jobs"
MEAN_CYCLE_LENGTH = "mean_cycle_length"
MEAN_ACCUMULATION_TIME = "mean_accumulation_time"
MEAN_FIRST_LONG_EPOCH = "mean_first_long_epoch"
MEAN_JOBS_AT_ACCUMULATION = "mean_jobs_at_accumulation"


@dataclass(frozen=True)
class SimEstimate:
    """A point estimate with its 95% confidence half-width."""

    quantity: str
    mean: float
    ci_half_width: float
    n: int
    total_events: int = 0


def t_ci_half_width(values: Sequence[float]) -> float:
    """95% Student-t half-width for the mean of iid samples (n >= 2)."""
    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    if n < 2:
        raise InsufficientReplications(
            f"confidence intervals need at least 2 samples, got {n}"
        )
    crit = float(stats.t.ppf(0.975, n - 1))
    return crit * float(arr.std(ddof=1)) / math.sqrt(n)


def from_samples(
    quantity: str, values: Sequence[float], total_events: int = 0
) -> SimEstimate:
    """Estimate the mean of iid samples with a t-interval."""
    arr = np.asarray(values, dtype=np.float64)
    return SimEstimate(
        quantity=quantity,
        mean=float(arr.mean()),
        ci_half_width=t_ci_half_width(arr),
        n=int(arr.size),
        total_events=total_events,
    )


def resolve_workers(max_workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, else SETUPQ_MAX_WORKERS, else 1."""
    if max_workers is not None:
        value = int(max_workers)
    else:
        env = os.environ.get(WORKERS_ENV)
        value = int(env) if env else 1
    if value < 1:
        raise ParameterError(f"worker count must be positive, got {value}")
    return value


@dataclass(frozen=True)
class EstimatePair:
    """Queue-length and waiting-time estimates from one batch of runs.

    little_gap is |mean_queue - rate * mean_wait|; little_tol is the
    acceptance threshold derived from the joint confidence widths. The
    per-replication results are kept for inspection.
    """

    queue: SimEstimate
    wait: SimEstimate
    little_gap: float
    little_tol: float
    replications: tuple


def _one_replication(args) -> ReplicationResult:
    params, policy, cfg = args
    return run_replication(params, policy, cfg)


def estimate(
    params: SystemParams,
    policy: SetupPolicy,
    base_cfg: SimConfig,
    n_replications: int,
    max_workers: Optional[int] = None,
) -> EstimatePair:
    """Run independent replications and estimate queue length and wait.

    Replication i uses substream i of base_cfg.seed; base_cfg.replication_index
    is the offset of the first one. Raises InsufficientReplications for
    n_replications < 2 and SimulationError if the runs cross-contradict
    Little's law beyond three joint confidence widths.
    """
    validate(params)
    if n_replications < 2:
        raise InsufficientReplications(
            f"need at least 2 replications, got {n_replications}"
        )
    workers = resolve_workers(max_workers)
    jobs = [
        (
            params,
            policy,
            dataclasses.replace(
                base_cfg, replication_index=base_cfg.replication_index + i
            ),
        )
        for i in range(n_replications)
    ]
    if workers == 1:
        results = [_one_replication(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_replication, jobs))
    results.sort(key=lambda r: r.replication_index)

    events = sum(r.events for r in results)
    queue = from_samples(
        MEAN_QUEUE_LENGTH, [r.mean_queue_length for r in results], events
    )
    waits = [r.mean_wait for r in results]
    if any(math.isnan(w) for w in waits):
        raise InsufficientReplications(
            "a replication recorded no waits; lengthen the horizon"
        )
    wait = from_samples(MEAN_WAIT, waits, events)

    rate = params.total_arrival_rate
    gap = abs(queue.mean - rate * wait.mean)
    tol = 3.0 * (queue.ci_half_width + rate * wait.ci_half_width) + 1e-9 * max(
        1.0, queue.mean
    )
    if gap > tol:
        # estimates from the same sample paths must agree through
        # queue = rate * wait up to boundary effects inside the CI
        raise SimulationError(
            f"queue and wait estimates contradict Little's law: "
            f"|{queue.mean:.6g} - {rate:.6g} * {wait.mean:.6g}| = {gap:.6g} "
            f"exceeds {tol:.6g}; lengthen the horizon"
        )
    return EstimatePair(
        queue=queue,
        wait=wait,
        little_gap=gap,
        little_tol=tol,
        replications=tuple(results),
    )


def relative_error(estimate_or_mean, reference: float) -> float:
    """|estimate - reference| / |reference|; rejects reference == 0."""
    mean = getattr(estimate_or_mean, "mean", estimate_or_mean)
    if reference == 0 or not math.isfinite(reference):
        raise ZeroReference(
            f"relative error needs a nonzero finite reference, got {reference}"
        )
    return abs(mean - reference) / abs(reference)


def _one_chunk(args) -> CycleStats:
    params, cfg, n_cycles = args
    return run_renewal_cycles(params, cfg, n_cycles)


def collect_renewal_cycles(
    params: SystemParams,
    base_cfg: SimConfig,
    n_cycles: int,
    n_chunks: int = 1,
    max_workers: Optional[int] = None,
) -> CycleStats:
    """Collect regeneration cycles, optionally split over parallel chunks.

    Chunk i runs on substream i and contributes an equal share of cycles
    (the first chunk absorbs the remainder); merging follows chunk order, so
    results do not depend on the worker count.
    """
    if n_chunks < 1:
        raise ParameterError(f"n_chunks must be positive, got {n_chunks}")
    if n_cycles < n_chunks:
        raise ParameterError(
            f"cannot split {n_cycles} cycles into {n_chunks} chunks"
        )
    share = n_cycles // n_chunks
    counts = [share] * n_chunks
    counts[0] += n_cycles - share * n_chunks
    jobs = [
        (
            params,
            dataclasses.replace(
                base_cfg, replication_index=base_cfg.replication_index + i
            ),
            counts[i],
        )
        for i in range(n_chunks)
    ]
    workers = resolve_workers(max_workers)
    if workers == 1 or n_chunks == 1:
        parts = [_one_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_one_chunk, jobs))
    return CycleStats.merge(parts)
