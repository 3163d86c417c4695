"""Exact discrete-event simulation of the multiserver station with setups.

One replication is a single tight loop over three competing event sources:

* arrivals: Poisson with rate k * lam;
* departures: the n_busy running services race as one exponential clock at
  rate mu * n_busy, redrawn whenever n_busy changes (valid by memorylessness);
* setup completions: a FIFO deque of absolute finish times under the
  deterministic policy, or one more exponential race under the memoryless
  policy.

Bookkeeping is three integers (jobs n, servers on, servers in setup) plus a
queue of arrival times for waiting jobs. The policy invariant is
on + setting == min(k, n + m): each arrival starts at most one setup, each
departure removes at most one surplus server, cancelling the youngest
pending setup before switching off an idle server. Every random quantity
comes from one counter-based stream per replication, so runs are exactly
reproducible and independent across replication indices.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import (
    BufferTooLarge,
    CycleTimeout,
    EventCapExceeded,
    InvariantViolation,
    NonFiniteTime,
    ParameterError,
)
from .model import (
    DeterministicSetup,
    ExponentialSetup,
    NoSetup,
    SetupPolicy,
    SystemParams,
    validate,
)

_BUF = 1 << 16

ARRIVAL = "arrival"
DEPARTURE = "departure"
SETUP_COMPLETE = "setup_complete"
SETUP_CANCEL = "setup_cancel"
SERVER_OFF = "server_off"

EVENT_KINDS = (ARRIVAL, DEPARTURE, SETUP_COMPLETE, SETUP_CANCEL, SERVER_OFF)

TRACE_HEADER = ("time", "kind", "n_jobs", "n_busy", "n_setup")


class EventRecord(NamedTuple):
    """State of the station immediately after one event."""

    time: float
    kind: str
    n_jobs: int
    n_busy: int
    n_setup: int


def _make_stream(seed, index: int) -> np.random.Generator:
    """Independent reproducible stream for one replication or chunk.

    Tuple seeds are length-prefixed before hashing: SeedSequence strips
    trailing zeros from entropy vectors, so (s, 0) would otherwise collide
    with the bare seed s.
    """
    if isinstance(seed, (tuple, list)):
        entropy = (len(seed), *(int(s) for s in seed))
    else:
        entropy = int(seed)
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimConfig:
    """Run-length and reproducibility settings for one replication.

    warmup = None picks max(10 * beta, 100 / (mu * (1 - rho))), enough for
    the cold-start transient at moderate loads; statistics cover
    [warmup, horizon]. seed may be an int or a tuple of ints (useful to
    derive per-row streams in sweeps); replication_index selects the
    independent substream.
    """

    horizon: float
    warmup: Optional[float] = None
    seed: Union[int, tuple] = 0
    replication_index: int = 0
    record_trace: bool = False
    max_events: int = 2_000_000_000


def default_warmup(params: SystemParams) -> float:
    return max(10.0 * params.beta, 100.0 / (params.mu * (1.0 - params.rho)))


def _resolve_warmup(params: SystemParams, cfg: SimConfig) -> float:
    if not (cfg.horizon > 0 and math.isfinite(cfg.horizon)):
        raise ParameterError(f"horizon must be positive and finite, got {cfg.horizon}")
    if cfg.max_events < 1:
        raise ParameterError(f"max_events must be positive, got {cfg.max_events}")
    warmup = default_warmup(params) if cfg.warmup is None else cfg.warmup
    if not (0.0 <= warmup and math.isfinite(warmup)):
        raise ParameterError(f"warmup must be nonnegative and finite, got {warmup}")
    if warmup >= cfg.horizon:
        raise ParameterError(
            f"warmup {warmup:.6g} must be below horizon {cfg.horizon:.6g}; "
            "pass warmup explicitly for short runs"
        )
    return warmup


@dataclass(frozen=True)
class SimState:
    """Snapshot of the station when a replication stops."""

    now: float
    n_jobs: int
    n_busy: int
    n_setup: int
    pending_setups: Union[tuple, int]


@dataclass(frozen=True)
class ReplicationResult:
    """Summary statistics of one replication over [warmup, horizon].

    mean_queue_length and mean_jobs are time averages of the waiting count
    and the total job count; mean_wait averages the waits of the n_waits
    jobs that arrived inside the window and entered service (nan if none
    did). trace is populated only when the config asked for it.
    """

    mean_queue_length: float
    mean_wait: float
    mean_jobs: float
    n_waits: int
    window: float
    arrivals: int
    departures: int
    events: int
    replication_index: int
    state: SimState
    trace: Optional[tuple]


def run_replication(
    params: SystemParams, policy: SetupPolicy, cfg: SimConfig
) -> ReplicationResult:
    """Simulate one independent replication and return its statistics."""
    validate(params)
    warmup = _resolve_warmup(params, cfg)
    if isinstance(policy, DeterministicSetup):
        if policy.m > params.k:
            raise BufferTooLarge(
                f"reserve allowance m={policy.m} exceeds k={params.k}"
            )
        return _run_deterministic(params, policy.m, cfg, warmup)
    if isinstance(policy, ExponentialSetup):
        return _run_exponential(params, policy.mean_setup, cfg, warmup)
    if isinstance(policy, NoSetup):
        return _run_nosetup(params, cfg, warmup)
    raise ParameterError(f"unknown policy object: {policy!r}")


def _run_deterministic(
    params: SystemParams, m: int, cfg: SimConfig, warmup: float
) -> ReplicationResult:
    k = params.k
    mu = params.mu
    beta = params.beta
    inv_rate = 1.0 / params.total_arrival_rate
    horizon = float(cfg.horizon)
    max_events = cfg.max_events
    record = cfg.record_trace
    trace = [] if record else None

    rng = _make_stream(cfg.seed, cfg.replication_index)
    buf = rng.standard_exponential(_BUF)
    bi = 0

    inf = math.inf
    now = 0.0
    n = 0
    on = m if m < k else k  # reserve servers start warm
    setting = 0
    busy = 0
    setups = deque()  # absolute completion times, oldest first
    queue = deque()  # arrival times of jobs not yet in service

    t_arr = buf[0] * inv_rate
    bi = 1
    t_dep = inf

    events = 0
    arrivals = 0
    departures = 0
    q_int = 0.0
    n_int = 0.0
    q_mark = 0.0
    n_mark = 0.0
    warmed = warmup <= 0.0
    wait_sum = 0.0
    wait_n = 0

    while True:
        t_set = setups[0] if setting else inf
        t_next = t_arr
        kind = 0
        if t_dep <= t_next:
            t_next = t_dep
            kind = 1
        if t_set <= t_next:
            t_next = t_set
            kind = 2
        if t_next >= horizon:
            dt = horizon - now
            q_int += (n - busy) * dt
            n_int += n * dt
            now = horizon
            break
        if events >= max_events:
            raise EventCapExceeded(
                f"event budget {max_events} exhausted at t={now:.6g} "
                f"(horizon {horizon:.6g})"
            )
        events += 1
        if not warmed and t_next >= warmup:
            dt = warmup - now
            q_int += (n - busy) * dt
            n_int += n * dt
            q_mark = q_int
            n_mark = n_int
            now = warmup
            warmed = True
        dt = t_next - now
        q_int += (n - busy) * dt
        n_int += n * dt
        now = t_next

        if kind == 0:
            n += 1
            arrivals += 1
            limit = n + m
            if limit > k:
                limit = k
            if on + setting < limit:
                setups.append(now + beta)
                setting += 1
            if busy < on:
                # an idle warm server takes the job at once (m > 0 only)
                busy += 1
                if now >= warmup:
                    wait_n += 1
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * busy)
                bi += 1
            else:
                queue.append(now)
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_arr = now + buf[bi] * inv_rate
            bi += 1
            if record:
                trace.append(EventRecord(now, ARRIVAL, n, busy, setting))
        elif kind == 1:
            n -= 1
            departures += 1
            if queue:
                # the freed server takes the queue head; busy is unchanged
                t0 = queue.popleft()
                if t0 >= warmup:
                    wait_sum += now - t0
                    wait_n += 1
            else:
                busy -= 1
            if record:
                trace.append(EventRecord(now, DEPARTURE, n, busy, setting))
            limit = n + m
            if limit > k:
                limit = k
            if on + setting > limit:
                if setting:
                    setups.pop()  # youngest setup is abandoned first
                    setting -= 1
                    if record:
                        trace.append(EventRecord(now, SETUP_CANCEL, n, busy, setting))
                else:
                    on -= 1
                    if record:
                        trace.append(EventRecord(now, SERVER_OFF, n, busy, setting))
            if busy:
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * busy)
                bi += 1
            else:
                t_dep = inf
        else:
            setups.popleft()
            setting -= 1
            on += 1
            if queue:
                t0 = queue.popleft()
                if t0 >= warmup:
                    wait_sum += now - t0
                    wait_n += 1
                busy += 1
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * busy)
                bi += 1
            if record:
                trace.append(EventRecord(now, SETUP_COMPLETE, n, busy, setting))

    if not math.isfinite(now):
        raise NonFiniteTime(f"simulation clock became non-finite: {now}")

    window = horizon - warmup
    return ReplicationResult(
        mean_queue_length=(q_int - q_mark) / window,
        mean_wait=wait_sum / wait_n if wait_n else math.nan,
        mean_jobs=(n_int - n_mark) / window,
        n_waits=wait_n,
        window=window,
        arrivals=arrivals,
        departures=departures,
        events=events,
        replication_index=cfg.replication_index,
        state=SimState(now, n, busy, setting, tuple(setups)),
        trace=tuple(trace) if record else None,
    )


def _run_exponential(
    params: SystemParams, mean_setup: float, cfg: SimConfig, warmup: float
) -> ReplicationResult:
    k = params.k
    mu = params.mu
    setup_rate = 1.0 / mean_setup
    inv_rate = 1.0 / params.total_arrival_rate
    horizon = float(cfg.horizon)
    max_events = cfg.max_events
    record = cfg.record_trace
    trace = [] if record else None

    rng = _make_stream(cfg.seed, cfg.replication_index)
    buf = rng.standard_exponential(_BUF)
    bi = 0

    inf = math.inf
    now = 0.0
    n = 0
    on = 0  # with no reserve, every on server is busy
    setting = 0
    queue = deque()

    t_arr = buf[0] * inv_rate
    bi = 1
    t_dep = inf
    t_set = inf

    events = 0
    arrivals = 0
    departures = 0
    q_int = 0.0
    n_int = 0.0
    q_mark = 0.0
    n_mark = 0.0
    warmed = warmup <= 0.0
    wait_sum = 0.0
    wait_n = 0

    while True:
        t_next = t_arr
        kind = 0
        if t_dep <= t_next:
            t_next = t_dep
            kind = 1
        if t_set <= t_next:
            t_next = t_set
            kind = 2
        if t_next >= horizon:
            dt = horizon - now
            q_int += (n - on) * dt
            n_int += n * dt
            now = horizon
            break
        if events >= max_events:
            raise EventCapExceeded(
                f"event budget {max_events} exhausted at t={now:.6g} "
                f"(horizon {horizon:.6g})"
            )
        events += 1
        if not warmed and t_next >= warmup:
            dt = warmup - now
            q_int += (n - on) * dt
            n_int += n * dt
            q_mark = q_int
            n_mark = n_int
            now = warmup
            warmed = True
        dt = t_next - now
        q_int += (n - on) * dt
        n_int += n * dt
        now = t_next

        if kind == 0:
            n += 1
            arrivals += 1
            queue.append(now)
            limit = n if n < k else k
            if on + setting < limit:
                setting += 1
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_set = now + buf[bi] / (setting * setup_rate)
                bi += 1
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_arr = now + buf[bi] * inv_rate
            bi += 1
            if record:
                trace.append(EventRecord(now, ARRIVAL, n, on, setting))
        elif kind == 1:
            n -= 1
            departures += 1
            if queue:
                t0 = queue.popleft()
                if t0 >= warmup:
                    wait_sum += now - t0
                    wait_n += 1
                limit = n if n < k else k
                if on + setting > limit:
                    setting -= 1
                    if setting:
                        if bi == _BUF:
                            buf = rng.standard_exponential(_BUF)
                            bi = 0
                        t_set = now + buf[bi] / (setting * setup_rate)
                        bi += 1
                    else:
                        t_set = inf
                    if record:
                        trace.append(EventRecord(now, DEPARTURE, n, on, setting + 1))
                        trace.append(EventRecord(now, SETUP_CANCEL, n, on, setting))
                elif record:
                    trace.append(EventRecord(now, DEPARTURE, n, on, setting))
            else:
                on -= 1
                if record:
                    trace.append(EventRecord(now, DEPARTURE, n, on, setting))
                    trace.append(EventRecord(now, SERVER_OFF, n, on, setting))
            if on:
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * on)
                bi += 1
            else:
                t_dep = inf
        else:
            setting -= 1
            on += 1
            # with no reserve a setup can only be pending while jobs wait
            t0 = queue.popleft()
            if t0 >= warmup:
                wait_sum += now - t0
                wait_n += 1
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_dep = now + buf[bi] / (mu * on)
            bi += 1
            if setting:
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_set = now + buf[bi] / (setting * setup_rate)
                bi += 1
            else:
                t_set = inf
            if record:
                trace.append(EventRecord(now, SETUP_COMPLETE, n, on, setting))

    if not math.isfinite(now):
        raise NonFiniteTime(f"simulation clock became non-finite: {now}")

    window = horizon - warmup
    return ReplicationResult(
        mean_queue_length=(q_int - q_mark) / window,
        mean_wait=wait_sum / wait_n if wait_n else math.nan,
        mean_jobs=(n_int - n_mark) / window,
        n_waits=wait_n,
        window=window,
        arrivals=arrivals,
        departures=departures,
        events=events,
        replication_index=cfg.replication_index,
        state=SimState(now, n, on, setting, setting),
        trace=tuple(trace) if record else None,
    )


def _run_nosetup(
    params: SystemParams, cfg: SimConfig, warmup: float
) -> ReplicationResult:
    k = params.k
    mu = params.mu
    inv_rate = 1.0 / params.total_arrival_rate
    horizon = float(cfg.horizon)
    max_events = cfg.max_events
    record = cfg.record_trace
    trace = [] if record else None

    rng = _make_stream(cfg.seed, cfg.replication_index)
    buf = rng.standard_exponential(_BUF)
    bi = 0

    inf = math.inf
    now = 0.0
    n = 0
    busy = 0
    queue = deque()

    t_arr = buf[0] * inv_rate
    bi = 1
    t_dep = inf

    events = 0
    arrivals = 0
    departures = 0
    q_int = 0.0
    n_int = 0.0
    q_mark = 0.0
    n_mark = 0.0
    warmed = warmup <= 0.0
    wait_sum = 0.0
    wait_n = 0

    while True:
        t_next = t_arr
        kind = 0
        if t_dep <= t_next:
            t_next = t_dep
            kind = 1
        if t_next >= horizon:
            dt = horizon - now
            q_int += (n - busy) * dt
            n_int += n * dt
            now = horizon
            break
        if events >= max_events:
            raise EventCapExceeded(
                f"event budget {max_events} exhausted at t={now:.6g} "
                f"(horizon {horizon:.6g})"
            )
        events += 1
        if not warmed and t_next >= warmup:
            dt = warmup - now
            q_int += (n - busy) * dt
            n_int += n * dt
            q_mark = q_int
            n_mark = n_int
            now = warmup
            warmed = True
        dt = t_next - now
        q_int += (n - busy) * dt
        n_int += n * dt
        now = t_next

        if kind == 0:
            n += 1
            arrivals += 1
            if n <= k:
                busy += 1
                if now >= warmup:
                    wait_n += 1
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * busy)
                bi += 1
            else:
                queue.append(now)
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_arr = now + buf[bi] * inv_rate
            bi += 1
            if record:
                trace.append(EventRecord(now, ARRIVAL, n, busy, 0))
        else:
            n -= 1
            departures += 1
            if queue:
                t0 = queue.popleft()
                if t0 >= warmup:
                    wait_sum += now - t0
                    wait_n += 1
            else:
                busy -= 1
            if busy:
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * busy)
                bi += 1
            else:
                t_dep = inf
            if record:
                trace.append(EventRecord(now, DEPARTURE, n, busy, 0))

    if not math.isfinite(now):
        raise NonFiniteTime(f"simulation clock became non-finite: {now}")

    window = horizon - warmup
    return ReplicationResult(
        mean_queue_length=(q_int - q_mark) / window,
        mean_wait=wait_sum / wait_n if wait_n else math.nan,
        mean_jobs=(n_int - n_mark) / window,
        n_waits=wait_n,
        window=window,
        arrivals=arrivals,
        departures=departures,
        events=events,
        replication_index=cfg.replication_index,
        state=SimState(now, n, busy, 0, 0),
        trace=tuple(trace) if record else None,
    )


@dataclass(frozen=True)
class CycleStats:
    """Per-cycle samples from the regenerative view of the base policy.

    A cycle runs between consecutive instants at which the busy-server count
    drops from ceil(R) + 1 to ceil(R) with an empty queue. Inside a cycle,
    the accumulation phase ends at the first setup completion that lifts the
    busy count above ceil(R).

    Arrays (one entry per cycle):
        cycle_lengths: total cycle durations.
        accumulation_times: duration of the accumulation phase.
        jobs_at_accumulation: job count when the accumulation phase ends.
        first_long_epoch: index of the first dip epoch longer than beta
            (-1 when no epoch qualified; counted in anomalies).
        excess_integrals: integral of (n - R) dt over the cycle.
    """

    cycle_lengths: np.ndarray
    accumulation_times: np.ndarray
    jobs_at_accumulation: np.ndarray
    first_long_epoch: np.ndarray
    excess_integrals: np.ndarray
    n_cycles: int
    anomalies: int
    events: int

    @classmethod
    def merge(cls, parts: Sequence["CycleStats"]) -> "CycleStats":
        if not parts:
            raise ParameterError("nothing to merge")
        return cls(
            cycle_lengths=np.concatenate([p.cycle_lengths for p in parts]),
            accumulation_times=np.concatenate([p.accumulation_times for p in parts]),
            jobs_at_accumulation=np.concatenate(
                [p.jobs_at_accumulation for p in parts]
            ),
            first_long_epoch=np.concatenate([p.first_long_epoch for p in parts]),
            excess_integrals=np.concatenate([p.excess_integrals for p in parts]),
            n_cycles=sum(p.n_cycles for p in parts),
            anomalies=sum(p.anomalies for p in parts),
            events=sum(p.events for p in parts),
        )


def run_renewal_cycles(
    params: SystemParams,
    cfg: SimConfig,
    n_cycles: int,
    cycle_timeout: Optional[float] = None,
) -> CycleStats:
    """Collect n_cycles regeneration cycles under the base policy.

    The station warms up from empty until the first regeneration point, then
    records per-cycle statistics. Requires beta > 0, R >= 2, and
    k >= ceil(R) + 1 so the regeneration level is reachable.
    """
    validate(params)
    if n_cycles < 1:
        raise ParameterError(f"n_cycles must be positive, got {n_cycles}")
    if params.beta <= 0:
        raise ParameterError("regeneration cycles need beta > 0")
    R = params.offered_load
    if R < 2.0:
        raise ParameterError(f"regeneration analysis needs R >= 2, got R={R:.6g}")
    k = params.k
    thresh = math.ceil(R)
    if k < thresh + 1:
        raise ParameterError(
            f"regeneration level needs k >= ceil(R) + 1, got k={k}, R={R:.6g}"
        )
    mu = params.mu
    beta = params.beta
    if cycle_timeout is None:
        surplus = k - R
        cycle_timeout = 1000.0 * (
            beta
            + (mu * beta * math.sqrt(R) + R) / (mu * surplus)
            + 1.0 / (mu * (1.0 - params.rho))
        )

    inv_rate = 1.0 / params.total_arrival_rate
    max_events = cfg.max_events

    rng = _make_stream(cfg.seed, cfg.replication_index)
    buf = rng.standard_exponential(_BUF)
    bi = 0

    inf = math.inf
    now = 0.0
    n = 0
    on = 0
    setting = 0
    setups = deque()

    t_arr = buf[0] * inv_rate
    bi = 1
    t_dep = inf

    events = 0
    in_cycle = False
    cycle_start = 0.0
    accum_at = -1.0  # negative while the accumulation phase is running
    n_at_accum = 0
    min_level = thresh
    epoch_start = 0.0
    long_epoch = -1
    xint = 0.0

    lengths: list = []
    accums: list = []
    jobs_at: list = []
    longs: list = []
    xints: list = []
    anomalies = 0
    done = 0

    while done < n_cycles:
        t_set = setups[0] if setting else inf
        t_next = t_arr
        kind = 0
        if t_dep <= t_next:
            t_next = t_dep
            kind = 1
        if t_set <= t_next:
            t_next = t_set
            kind = 2
        if events >= max_events:
            raise EventCapExceeded(
                f"event budget {max_events} exhausted after {done} cycles"
            )
        events += 1
        dt = t_next - now
        if in_cycle:
            xint += (n - R) * dt
            if t_next - cycle_start > cycle_timeout:
                raise CycleTimeout(
                    f"cycle open for more than {cycle_timeout:.6g} time units "
                    f"after {done} cycles"
                )
        now = t_next

        if kind == 0:
            n += 1
            limit = n if n < k else k
            if on + setting < limit:
                setups.append(now + beta)
                setting += 1
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_arr = now + buf[bi] * inv_rate
            bi += 1
        elif kind == 1:
            if n > on:
                # a waiting job takes the freed server
                n -= 1
                limit = n if n < k else k
                if on + setting > limit:
                    setups.pop()
                    setting -= 1
                if in_cycle and accum_at < 0.0 and n < min_level:
                    if long_epoch < 0 and now - epoch_start > beta:
                        long_epoch = thresh - min_level
                    min_level = n
                    epoch_start = now
            else:
                # queue empty: the finishing server switches off
                n -= 1
                on -= 1
                if on == thresh:
                    if in_cycle:
                        lengths.append(now - cycle_start)
                        accums.append(accum_at)
                        jobs_at.append(n_at_accum)
                        longs.append(long_epoch)
                        xints.append(xint)
                        if long_epoch < 0:
                            anomalies += 1
                        done += 1
                    in_cycle = True
                    cycle_start = now
                    accum_at = -1.0
                    n_at_accum = 0
                    min_level = thresh
                    epoch_start = now
                    long_epoch = -1
                    xint = 0.0
                elif in_cycle and accum_at < 0.0 and n < min_level:
                    if long_epoch < 0 and now - epoch_start > beta:
                        long_epoch = thresh - min_level
                    min_level = n
                    epoch_start = now
            if on:
                if bi == _BUF:
                    buf = rng.standard_exponential(_BUF)
                    bi = 0
                t_dep = now + buf[bi] / (mu * on)
                bi += 1
            else:
                t_dep = inf
        else:
            setups.popleft()
            setting -= 1
            on += 1
            if in_cycle and accum_at < 0.0 and on == thresh + 1:
                accum_at = now - cycle_start
                n_at_accum = n
                if long_epoch < 0 and now - epoch_start > beta:
                    long_epoch = thresh - min_level
            if bi == _BUF:
                buf = rng.standard_exponential(_BUF)
                bi = 0
            t_dep = now + buf[bi] / (mu * on)
            bi += 1

    if not math.isfinite(now):
        raise NonFiniteTime(f"simulation clock became non-finite: {now}")

    return CycleStats(
        cycle_lengths=np.asarray(lengths, dtype=np.float64),
        accumulation_times=np.asarray(accums, dtype=np.float64),
        jobs_at_accumulation=np.asarray(jobs_at, dtype=np.int64),
        first_long_epoch=np.asarray(longs, dtype=np.int64),
        excess_integrals=np.asarray(xints, dtype=np.float64),
        n_cycles=done,
        anomalies=anomalies,
        events=events,
    )


def assert_sample_path_invariants(
    trace: Sequence[EventRecord], params: SystemParams, policy: SetupPolicy
) -> bool:
    """Replay a trace against the policy rules; raise InvariantViolation on
    the first contradiction.

    Checks at every record: the (n_jobs, n_busy, n_setup) triple matches an
    independent integer replay of the policy bookkeeping; counts stay within
    bounds; surplus removal happens immediately and cancels setups before
    switching servers off; times never decrease. For the deterministic
    policy with m = 0 it additionally checks the pathwise identity

        n_busy(t) == min(k, min over s in [t - beta, t] of n_jobs(s))

    at the end of every event group, using a sliding-window minimum over the
    recorded step function (with a tiny tolerance on the window edge for
    float rounding).
    """
    validate(params)
    if isinstance(policy, DeterministicSetup):
        m = policy.m
        if m > params.k:
            raise BufferTooLarge(f"reserve allowance m={m} exceeds k={params.k}")
        allowed = EVENT_KINDS
    elif isinstance(policy, ExponentialSetup):
        m = 0
        allowed = EVENT_KINDS
    elif isinstance(policy, NoSetup):
        m = 0
        allowed = (ARRIVAL, DEPARTURE)
    else:
        raise ParameterError(f"unknown policy object: {policy!r}")

    k = params.k
    beta = params.beta
    nosetup = isinstance(policy, NoSetup)
    check_window = (
        isinstance(policy, DeterministicSetup) and m == 0 and beta > 0.0
    )
    edge_eps = 1e-9 * (beta + 1.0)

    def fail(i, rec, msg):
        raise InvariantViolation(f"record {i}: {msg}", index=i, record=rec)

    n = 0
    on = min(m, k) if isinstance(policy, DeterministicSetup) else 0
    setting = 0
    pending_excess = False
    prev_time = 0.0

    # sliding-window minimum over the n_jobs step function
    run_value = 0
    segments: deque = deque()  # (value, end_time), values increasing

    total = len(trace)
    for i, rec in enumerate(trace):
        t, kind, rn, rb, rs = rec
        if kind not in allowed:
            fail(i, rec, f"unexpected event kind {kind!r} for this policy")
        if t < prev_time:
            fail(i, rec, f"time went backwards: {t} after {prev_time}")
        if pending_excess and t != prev_time:
            fail(i, rec, "surplus server not removed at the departure instant")
        prev_time = t

        if kind == ARRIVAL:
            if pending_excess:
                fail(i, rec, "arrival interleaved with surplus removal")
            n += 1
            limit = min(k, n + m)
            if not nosetup and on + setting < limit:
                setting += 1
            if nosetup:
                on = min(k, n)
        elif kind == DEPARTURE:
            if pending_excess:
                fail(i, rec, "departure interleaved with surplus removal")
            if n <= 0:
                fail(i, rec, "departure from an empty system")
            n -= 1
            if nosetup:
                on = min(k, n)
            else:
                pending_excess = on + setting > min(k, n + m)
        elif kind == SETUP_CANCEL:
            if not pending_excess:
                fail(i, rec, "setup cancelled without a surplus")
            if setting <= 0:
                fail(i, rec, "setup cancelled with none pending")
            setting -= 1
            pending_excess = False
        elif kind == SERVER_OFF:
            if not pending_excess:
                fail(i, rec, "server switched off without a surplus")
            if setting != 0:
                fail(i, rec, "server switched off while setups were pending")
            on -= 1
            pending_excess = False
        else:  # SETUP_COMPLETE
            if pending_excess:
                fail(i, rec, "setup completion interleaved with surplus removal")
            if setting <= 0:
                fail(i, rec, "setup completed with none pending")
            setting -= 1
            on += 1

        busy = n if n < on else on
        if (rn, rb, rs) != (n, busy, setting):
            fail(
                i,
                rec,
                f"replayed state (n={n}, busy={busy}, setup={setting}) does not "
                f"match recorded ({rn}, {rb}, {rs})",
            )
        if n < 0 or on < 0 or setting < 0 or on + setting > k:
            fail(i, rec, f"counts out of range: n={n}, on={on}, setup={setting}")
        if not pending_excess and not nosetup:
            if on + setting != min(k, n + m):
                fail(
                    i,
                    rec,
                    f"on + setup = {on + setting} differs from "
                    f"min(k, n + m) = {min(k, n + m)}",
                )

        group_end = i + 1 == total or trace[i + 1].time != t
        if check_window and group_end and not pending_excess:
            if n != run_value:
                while segments and segments[-1][0] >= run_value:
                    segments.pop()
                segments.append((run_value, t))
                run_value = n
            cutoff = t - beta + edge_eps
            while segments and segments[0][1] <= cutoff:
                segments.popleft()
            wmin = run_value
            if segments and segments[0][0] < wmin:
                wmin = segments[0][0]
            expected = wmin if wmin < k else k
            if rb != expected:
                fail(
                    i,
                    rec,
                    f"busy count {rb} differs from the windowed minimum "
                    f"min(k, min n over [t - beta, t]) = {expected}",
                )

    if pending_excess:
        raise InvariantViolation(
            "trace ended in the middle of a surplus removal",
            index=total - 1,
            record=trace[-1] if total else None,
        )
    return True


def write_trace(records: Sequence[EventRecord], target) -> None:
    """Write records as CSV (time,kind,n_jobs,n_busy,n_setup).

    target may be a path or an open text file. Times use round-trip
    precision.
    """
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="") as fh:
            write_trace(records, fh)
        return
    writer = csv.writer(target)
    writer.writerow(TRACE_HEADER)
    for rec in records:
        writer.writerow(
            ("%.17g" % rec.time, rec.kind, rec.n_jobs, rec.n_busy, rec.n_setup)
        )


def read_trace(source) -> list:
    """Read a trace CSV written by write_trace."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", newline="") as fh:
            return read_trace(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(header) != TRACE_HEADER:
        raise ParameterError(f"unexpected trace header: {header}")
    out = []
    for row in reader:
        if len(row) != 5:
            raise ParameterError(f"malformed trace row: {row}")
        out.append(
            EventRecord(float(row[0]), row[1], int(row[2]), int(row[3]), int(row[4]))
        )
    return out
