"""Model parameters and server wake-up policies.

A station has k identical servers, each serving at rate mu, fed by a single
Poisson arrival stream of rate k * lam where lam = rho * mu. rho in (0, 1)
is the long-run utilization of each server and R = k * rho is the offered
load, i.e. the mean number of busy servers. Service is FCFS from a central
queue. A server with nothing to do switches off; a switched-off server must
run a setup before it can serve again, with the setup duration governed by
the policy in effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import (
    NegativeSetup,
    NonPositiveRate,
    ParameterError,
    UnstableLoad,
    ZeroServers,
)


@dataclass(frozen=True)
class SystemParams:
    """Static description of one station.

    Attributes:
        k: number of servers.
        rho: per-server utilization; must lie in (0, 1) for stability.
        mu: per-server service rate.
        beta: setup duration used by the deterministic policy.
    """

    k: int
    rho: float
    mu: float
    beta: float

    @property
    def offered_load(self) -> float:
        """R = k * rho, the mean number of busy servers."""
        return self.k * self.rho

    @property
    def arrival_rate(self) -> float:
        """Per-server arrival rate lam = rho * mu."""
        return self.rho * self.mu

    @property
    def total_arrival_rate(self) -> float:
        """System arrival rate k * lam."""
        return self.k * self.rho * self.mu

    @property
    def setup_work(self) -> float:
        """mu * beta, the setup duration in units of mean service times."""
        return self.mu * self.beta

    @classmethod
    def from_arrival_rate(
        cls, k: int, total_rate: float, mu: float, beta: float
    ) -> "SystemParams":
        """Build params from the system arrival rate instead of rho."""
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ZeroServers(f"k must be a positive integer, got {k!r}")
        if not (mu > 0 and math.isfinite(mu)):
            raise NonPositiveRate(f"mu must be a positive finite rate, got {mu}")
        if not (total_rate > 0 and math.isfinite(total_rate)):
            raise NonPositiveRate(
                f"total arrival rate must be positive and finite, got {total_rate}"
            )
        return validate(cls(k=k, rho=total_rate / (k * mu), mu=mu, beta=beta))


def validate(params: SystemParams) -> SystemParams:
    """Check a parameter set and return it unchanged.

    Raises:
        ZeroServers: k is not a positive integer.
        NonPositiveRate: mu is not a positive finite number.
        UnstableLoad: rho is outside the open interval (0, 1).
        NegativeSetup: beta is negative or not finite.
    """
    if (
        not isinstance(params.k, int)
        or isinstance(params.k, bool)
        or params.k < 1
    ):
        raise ZeroServers(f"k must be a positive integer, got {params.k!r}")
    if not (params.mu > 0 and math.isfinite(params.mu)):
        raise NonPositiveRate(f"mu must be a positive finite rate, got {params.mu}")
    if not 0.0 < params.rho < 1.0:
        raise UnstableLoad(f"rho must lie in (0, 1), got {params.rho}")
    if not (params.beta >= 0 and math.isfinite(params.beta)):
        raise NegativeSetup(
            f"beta must be a nonnegative finite duration, got {params.beta}"
        )
    return params


@dataclass(frozen=True)
class AssumptionRegion:
    """Parameter region in which the closed-form bounds are supported.

    Both the offered load R and the normalized setup duration mu * beta must
    clear their thresholds.
    """

    min_offered_load: float = 100.0
    min_setup_work: float = 100.0

    def contains(self, params: SystemParams) -> bool:
        return (
            params.offered_load >= self.min_offered_load
            and params.setup_work >= self.min_setup_work
        )


DEFAULT_REGION = AssumptionRegion()


def in_assumption_region(
    params: SystemParams, region: AssumptionRegion | None = None
) -> bool:
    """True when params lie inside the supported bound region."""
    return (region or DEFAULT_REGION).contains(params)


@dataclass(frozen=True)
class DeterministicSetup:
    """Fixed-duration setup (duration = params.beta).

    m is the reserve allowance: a server finishing a job stays on as long as
    fewer than m servers would otherwise sit idle, so up to m servers can be
    held warm for future arrivals. m = 0 is the plain rule where a server
    with no job to take switches off immediately.
    """

    m: int = 0

    def __post_init__(self):
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 0:
            raise ParameterError(
                f"reserve allowance m must be a nonnegative integer, got {self.m!r}"
            )


@dataclass(frozen=True)
class ExponentialSetup:
    """Memoryless setup with the given mean duration."""

    mean_setup: float

    def __post_init__(self):
        if not (self.mean_setup > 0 and math.isfinite(self.mean_setup)):
            raise NegativeSetup(
                f"mean setup must be positive and finite, got {self.mean_setup}"
            )


@dataclass(frozen=True)
class NoSetup:
    """Servers wake instantly: the classic multiserver queue."""


SetupPolicy = Union[DeterministicSetup, ExponentialSetup, NoSetup]


def policy_label(policy: SetupPolicy) -> str:
    """Stable label used in CSV output: det, det-m<m>, exp, or none."""
    if isinstance(policy, DeterministicSetup):
        return "det" if policy.m == 0 else f"det-m{policy.m}"
    if isinstance(policy, ExponentialSetup):
        return "exp"
    if isinstance(policy, NoSetup):
        return "none"
    raise ParameterError(f"unknown policy object: {policy!r}")
