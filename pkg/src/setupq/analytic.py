"""Closed-form performance formulas for stations with setup times.

The deterministic-setup station admits a fluid-style approximation for the
mean queue length together with proven upper and lower bounds, all built
from two ingredients: the rate at which work piles up while servers are
setting up, and the time a fixed surplus of serving capacity needs to drain
a backlog (the busy-period formulas below).

Every formula is scale covariant: replacing (mu, beta) by (a * mu, beta / a)
leaves all queue-length quantities unchanged and divides all waiting-time
quantities by a. Mean waits follow from queue lengths by Little's law,
wait = queue / (k * lam).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import (
    BufferTooLarge,
    DegenerateDrift,
    HypothesisViolated,
    InvalidLevel,
    NegativeSetup,
    NoSurplusServers,
    NonPositiveRate,
    ParameterError,
    UnstableLoad,
)
from .model import (
    AssumptionRegion,
    SystemParams,
    in_assumption_region,
    validate,
)


@dataclass(frozen=True)
class BoundConstants:
    """Numeric constants appearing in the bound formulas.

    Defaults are the published values. Overriding individual fields is
    supported for sensitivity runs (CLI flag --constant NAME=VALUE). All
    fields must be positive, and the two queue-growth coefficients must
    satisfy L1 < C_apx.

    Fields:
        L1: queue-growth coefficient in the lower bound (2/3 of C_apx).
        C_apx: queue-growth coefficient in the approximation, sqrt(pi/2).
        F1: scale of the job surplus at the end of the accumulation phase.
        F2: small-setup correction to that surplus.
        b1: leading coefficient of the random-walk hitting-time tail.
        b2: second-order coefficient of the same tail.
        D1, D2, D3: coefficients of the cycle-length correction terms in
            the lower-bound denominator (D2 also caps the infinite-server
            passage time, D2 / (mu * sqrt(R))).
        mpol_F2, mpol_F3, mpol_F4: counterparts of L1 and the denominator
            coefficients for the reserve (m > 0) policy bound.
    """

    L1: float = 2.0 / 3.0 * math.sqrt(math.pi / 2.0)
    C_apx: float = math.sqrt(math.pi / 2.0)
    F1: float = 2.12
    F2: float = 3.645
    b1: float = math.sqrt(2.0 / math.pi)
    b2: float = 1.0 + 2.5 / (math.sqrt(2.0 / math.pi) * math.sqrt(2.0))
    D1: float = math.sqrt(2.0 / math.pi)
    D2: float = 7.0
    D3: float = 6.0
    mpol_F2: float = 0.23
    mpol_F3: float = 2.6
    mpol_F4: float = 7.2

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not (value > 0 and math.isfinite(value)):
                raise ParameterError(
                    f"constant {field.name} must be positive and finite, got {value}"
                )
        if not self.L1 < self.C_apx:
            raise ParameterError(
                f"L1 must stay below C_apx, got L1={self.L1}, C_apx={self.C_apx}"
            )


DEFAULT_CONSTANTS = BoundConstants()


def busy_period_length(n: float, j: float, mu: float) -> float:
    """Mean time for a backlog of n jobs to drain at surplus capacity j.

    j is the number of servers in excess of the offered load; the backlog
    shrinks at net rate mu * j.
    """
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    if not j > 0:
        raise DegenerateDrift(f"surplus capacity must be positive, got {j}")
    if not n >= 0:
        raise ParameterError(f"backlog must be nonnegative, got {n}")
    return n / (mu * j)


def busy_period_integral(n: float, j: float, R: float, mu: float) -> float:
    """Mean time-integral of the backlog while n jobs drain at surplus j.

    Equals the drain time n / (mu * j) multiplied by the mean backlog seen
    along the way, (n + 1) / 2 + R / j + 1; the trailing terms account for
    arrivals landing during the drain.
    """
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    if not j > 0:
        raise DegenerateDrift(f"surplus capacity must be positive, got {j}")
    if not n >= 0:
        raise ParameterError(f"backlog must be nonnegative, got {n}")
    if not R >= 0:
        raise ParameterError(f"offered load must be nonnegative, got {R}")
    return (n / (mu * j)) * ((n + 1.0) / 2.0 + R / j + 1.0)


def q_approx(
    params: SystemParams, constants: BoundConstants | None = None
) -> float:
    """Approximate mean queue length under the deterministic setup policy.

    Averages the backlog over a regeneration cycle: during a setup window of
    length beta the queue climbs to about mu * beta * C_apx * sqrt(R) jobs,
    which then drain at surplus rate mu * k * (1 - rho). Intended for R > 1
    (bounds_report flags smaller R); beta = 0 gives 0.
    """
    c = constants or DEFAULT_CONSTANTS
    validate(params)
    k, rho, mu, beta = params.k, params.rho, params.mu, params.beta
    if beta == 0.0:
        return 0.0
    R = params.offered_load
    peak = mu * beta * c.C_apx * math.sqrt(R)
    drain = peak / (mu * k * (1.0 - rho))
    num = 0.5 * beta * peak + drain * ((peak + 1.0) / 2.0 + 1.0 / (1.0 - rho))
    return num / (beta + drain)


def q_low_r(params: SystemParams) -> float:
    """Mean queue length in the low-load regime (R well below 1).

    With at most one setup in flight the station behaves like a single
    wake-on-arrival server: mean wait (beta / 2) * (2 + mu*R*beta) /
    (1 + mu*R*beta), converted to a queue length by Little's law.
    """
    validate(params)
    mrb = params.mu * params.offered_load * params.beta
    mean_wait = 0.5 * params.beta * (2.0 + mrb) / (1.0 + mrb)
    return params.total_arrival_rate * mean_wait


def _upper_overflow_term(x: float, y: float, z: float, R: float, mu: float) -> float:
    # x jobs of quadratic backlog plus y jobs of linear backlog draining at
    # surplus z servers
    return x / (2.0 * mu * z) + y * (R / (mu * z * z) + 3.0 / (2.0 * mu * z))


def q_upper(
    params: SystemParams, constants: BoundConstants | None = None
) -> float:
    """Proven upper bound on the mean queue length (deterministic setups)."""
    c = constants or DEFAULT_CONSTANTS
    validate(params)
    k, rho, mu, beta = params.k, params.rho, params.mu, params.beta
    R = params.offered_load
    sqrt_r = math.sqrt(R)
    base = 3.6 * math.sqrt(mu * beta * R) + 2.04 * rho / (1.0 - rho)
    if beta == 0.0:
        return base
    z = k * (1.0 - rho)
    g = _upper_overflow_term(
        9.0 * (mu * beta) ** 2 * R, 3.0 * mu * beta * sqrt_r, z, R, mu
    )
    num = 4.05 * (mu * beta) * beta * sqrt_r + g
    den = beta + c.L1 * mu * beta * sqrt_r / (mu * k * (1.0 - rho))
    return base + num / den


def _lower_num_den(
    params: SystemParams, c: BoundConstants
) -> tuple[float, float]:
    """Numerator and unclamped denominator of the lower-bound ratio."""
    k, mu, beta = params.k, params.mu, params.beta
    R = params.offered_load
    j = k - R
    if not j > 0:
        raise NoSurplusServers(
            f"lower bound needs k > R, got k={k}, R={R}"
        )
    sqrt_r = math.sqrt(R)
    mb = mu * beta
    overshoot = max(0.0, c.L1 * mb * sqrt_r - j)
    num = c.L1 * mb * beta * sqrt_r + busy_period_integral(overshoot, j, R, mu)
    den = (
        2.08 * beta
        + c.F1 * beta * sqrt_r / j
        + 1.5 * math.log(mb) / mu
        + math.log(c.F1 * c.D1) / mu
        + 2.0 / mu
        + (c.D2 + c.D3 / sqrt_r)
        * max(1.0 / (c.D1 * math.sqrt(mb)), 1.0 / sqrt_r)
        / mu
    )
    return num, den


def q_lower(
    params: SystemParams, constants: BoundConstants | None = None
) -> float:
    """Proven lower bound on the mean queue length (deterministic setups).

    Ratio of the mean backlog area per regeneration cycle to an upper bound
    on the mean cycle length. Outside the supported region the cycle-length
    expression can dip below beta (its hard floor); the denominator is
    clamped there, which bounds_report reports as a flag.
    """
    c = constants or DEFAULT_CONSTANTS
    validate(params)
    if params.beta == 0.0:
        return 0.0
    num, den = _lower_num_den(params, c)
    return num / max(den, params.beta)


def q_lower_mpolicy(
    params: SystemParams, m: int, constants: BoundConstants | None = None
) -> float:
    """Lower bound on the mean queue length when m servers are held warm.

    Valid for reserve allowances up to sqrt(R); beyond that the cycle
    structure behind the bound breaks down and BufferTooLarge is raised.
    m = 0 does not reduce to q_lower: the reserve-policy bound trades
    tightness for uniformity in m.
    """
    c = constants or DEFAULT_CONSTANTS
    validate(params)
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise ParameterError(f"m must be a nonnegative integer, got {m!r}")
    R = params.offered_load
    sqrt_r = math.sqrt(R)
    if m > sqrt_r:
        raise BufferTooLarge(
            f"reserve bound supports m <= sqrt(R) = {sqrt_r:.6g}, got m={m}"
        )
    k, mu, beta = params.k, params.mu, params.beta
    j = k - R
    if not j > 0:
        raise NoSurplusServers(f"reserve bound needs k > R, got k={k}, R={R}")
    if beta == 0.0:
        return 0.0
    mb = mu * beta
    overshoot = max(0.0, c.mpol_F2 * mb * sqrt_r - j)
    num = c.mpol_F2 * mb * beta * sqrt_r + busy_period_integral(overshoot, j, R, mu)
    den = c.mpol_F3 * beta + c.mpol_F4 * mb * sqrt_r / (mu * min(j, sqrt_r))
    return num / den


def erlang_c_delay_probability(k: int, rho: float) -> float:
    """Probability that an arrival waits in an M/M/k queue."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    if not 0.0 < rho < 1.0:
        raise UnstableLoad(f"rho must lie in (0, 1), got {rho}")
    # blocking-probability recurrence, numerically stable for any k
    a = k * rho
    b = 1.0
    for i in range(1, k + 1):
        b = a * b / (i + a * b)
    return b / (1.0 - rho * (1.0 - b))


def erlang_c_wait(k: int, rho: float, mu: float) -> float:
    """Mean wait in an M/M/k queue with no setup times."""
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    return erlang_c_delay_probability(k, rho) / (k * mu * (1.0 - rho))


def welch_mm1_setup_wait(lam: float, mu: float, beta: float) -> float:
    """Exact mean wait for a single wake-on-arrival server (M/M/1 with a
    deterministic setup before each busy period)."""
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    if not (lam > 0 and math.isfinite(lam)):
        raise NonPositiveRate(f"lam must be a positive finite rate, got {lam}")
    if not lam < mu:
        raise UnstableLoad(f"need lam < mu, got lam={lam}, mu={mu}")
    if not (beta >= 0 and math.isfinite(beta)):
        raise NegativeSetup(f"beta must be nonnegative and finite, got {beta}")
    return lam / (mu * (mu - lam)) + 0.5 * beta * (2.0 + lam * beta) / (
        1.0 + lam * beta
    )


def hitting_tail_upper(
    nu: float, constants: BoundConstants | None = None
) -> float:
    """Upper bound on P(a critical +-1 walk started at 1 stays positive
    after nu combined steps' worth of time), nu = 2 * R * mu * t. Valid for
    nu >= 3."""
    c = constants or DEFAULT_CONSTANTS
    if not nu >= 3.0:
        raise HypothesisViolated(f"tail bound needs nu >= 3, got {nu}")
    return (c.b1 / math.sqrt(2.0)) * (1.0 / math.sqrt(nu) + c.b2 / nu**1.5)


def hitting_tail_lower(
    nu: float, constants: BoundConstants | None = None
) -> float:
    """Matching lower bound on the same hitting-time tail, nu >= 3."""
    c = constants or DEFAULT_CONSTANTS
    if not nu >= 3.0:
        raise HypothesisViolated(f"tail bound needs nu >= 3, got {nu}")
    return (
        (c.b1 / math.sqrt(2.0))
        * math.exp(-1.0 / (3.0 * (nu - 1.0)))
        / math.sqrt(nu + 2.0)
    )


def stopped_busy_mean_upper(
    beta: float, R: float, mu: float, constants: BoundConstants | None = None
) -> float:
    """Upper bound on E[min(beta, tau)] where tau is the absorption time of
    a critical walk at rates R * mu."""
    c = constants or DEFAULT_CONSTANTS
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    if not R > 0:
        raise ParameterError(f"offered load must be positive, got {R}")
    if not (beta >= 0 and math.isfinite(beta)):
        raise NegativeSetup(f"beta must be nonnegative and finite, got {beta}")
    return c.b1 * math.sqrt(beta / (mu * R)) + 6.0 / (mu * R)


def mminf_passage_mean(R: float, h: int, mu: float = 1.0) -> float:
    """Mean passage time of an infinite-server station from ceil(R) + h jobs
    down to ceil(R) + h - 1, for integer levels 1 <= h <= sqrt(R).

    Computed in log space from the Poisson cdf/pmf, so large R is safe.
    """
    if not (mu > 0 and math.isfinite(mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
    if not (R > 0 and math.isfinite(R)):
        raise ParameterError(f"offered load must be positive and finite, got {R}")
    if not isinstance(h, int) or isinstance(h, bool):
        raise InvalidLevel(f"level h must be an integer, got {h!r}")
    if not 1 <= h <= math.sqrt(R):
        raise InvalidLevel(
            f"level h must satisfy 1 <= h <= sqrt(R) = {math.sqrt(R):.6g}, got {h}"
        )
    n = math.ceil(R) + h
    log_pmf = stats.poisson.logpmf(n, R)
    return float(stats.poisson.cdf(n, R) * math.exp(-log_pmf) / (mu * n))


def catalan_hitting_pmf(p: float, ell):
    """P(a +-1 walk started at 1, stepping up with probability p, first hits
    0 on step 2 * ell + 1). Accepts a scalar or integer array for ell.

    Sums to 1 over ell when p <= 1/2 and to (1 - p) / p when p > 1/2.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    ell_arr = np.asarray(ell)
    if not np.issubdtype(ell_arr.dtype, np.integer):
        raise ParameterError(f"ell must be integer-valued, got dtype {ell_arr.dtype}")
    if np.any(ell_arr < 0):
        raise ParameterError("ell must be nonnegative")
    q = 1.0 - p
    if p == 0.0:
        out = np.where(ell_arr == 0, 1.0, 0.0)
    elif p == 1.0:
        out = np.zeros(ell_arr.shape)
    else:
        # q * (q p)^ell * Catalan(ell), assembled in log space
        log_catalan = (
            special.gammaln(2 * ell_arr + 1)
            - special.gammaln(ell_arr + 1)
            - special.gammaln(ell_arr + 2)
        )
        out = np.exp(math.log(q) + ell_arr * math.log(q * p) + log_catalan)
    if np.ndim(ell) == 0:
        return float(out)
    return out


def tightness_simplified(params: SystemParams) -> float:
    """Scale of the gap between the upper and lower bounds:
    mu * beta * sqrt(R) + 1 / (1 - rho)."""
    validate(params)
    return params.mu * params.beta * math.sqrt(params.offered_load) + 1.0 / (
        1.0 - params.rho
    )


@dataclass(frozen=True)
class BoundsReport:
    """All closed-form quantities for one parameter point.

    Queue lengths (q_*) are mean job counts; waits (t_*) follow by Little's
    law. flags collects degeneracies: approx_outside_validity (R <= 1) and
    lower_denominator_clamped (cycle-length expression fell below beta).
    """

    params: SystemParams
    q_approx: float
    q_upper: float
    q_lower: float
    q_low_r: float
    t_approx: float
    t_upper: float
    t_lower: float
    tightness_ratio: float
    in_region: bool
    flags: tuple[str, ...]


def bounds_report(
    params: SystemParams,
    constants: BoundConstants | None = None,
    region: AssumptionRegion | None = None,
) -> BoundsReport:
    """Evaluate approximation, bounds, and diagnostics at one point."""
    c = constants or DEFAULT_CONSTANTS
    validate(params)
    flags = []
    if params.offered_load <= 1.0:
        flags.append("approx_outside_validity")
    qa = q_approx(params, c)
    qu = q_upper(params, c)
    if params.beta == 0.0:
        ql = 0.0
    else:
        num, den = _lower_num_den(params, c)
        if den < params.beta:
            flags.append("lower_denominator_clamped")
            den = params.beta
        ql = num / den
    qlr = q_low_r(params)
    rate = params.total_arrival_rate
    ratio = qu / ql if ql > 0 else math.inf
    return BoundsReport(
        params=params,
        q_approx=qa,
        q_upper=qu,
        q_lower=ql,
        q_low_r=qlr,
        t_approx=qa / rate,
        t_upper=qu / rate,
        t_lower=ql / rate,
        tightness_ratio=ratio,
        in_region=in_assumption_region(params, region),
        flags=tuple(flags),
    )
