"""
Queueing model of the reception process.

The single-receptor M/M/1/1 analysis yields the rejection rate gamma as the
positive root of gamma^2 + mu*gamma - lambda^2 = 0. The reception space is
then an M/M/N_r/N_m birth-death chain: births at the constant enter rate
lambda, deaths in state i at mu_i + gamma_i, where

    mu_i    = i(i+1)/2 * mu                    for i <= N_r
            = N_r(N_r+1)/2 * mu                for i >  N_r
    gamma_i = i(i+1)/2 * gamma                 for i <= N_r
            = ((N_r+1) i - N_r(N_r+1)/2) gamma for i >  N_r

which are the closed forms of the triangular sums over receptor
activation scenarios. Note mu_i grows like i^2/2 rather than i*mu as for
independent receptors; the sums are kept as written.
"""
import logging
import math
import os
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from reception.diffusion import enter_rate
from reception.params import SystemParams, capacity
from utils.errors import ConfigError, DomainError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 10_000_000


def max_states_limit() -> int:
    """Largest chain accepted, read from RECEPTION_MAX_STATES when a chain is built."""
    raw = os.getenv("RECEPTION_MAX_STATES", str(DEFAULT_MAX_STATES))
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"RECEPTION_MAX_STATES must be an integer, got '{raw}'")


# Largest chain solved with the dense global-balance system
DENSE_STATE_LIMIT = 2000


def _check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if not value >= 0 or math.isinf(value):
            raise DomainError(f"{name} must be finite and non-negative, got {value}")


# ============ Single receptor (M/M/1/1) ============

def rejection_rate(lam: float, mu: float) -> float:
    """Non-negative root of gamma^2 + mu*gamma - lambda^2 = 0.

    Evaluated as 2 lambda^2 / (sqrt(mu^2 + 4 lambda^2) + mu), which avoids
    the cancellation of the textbook form when mu >> lambda.
    """
    _check_nonnegative(lam=lam, mu=mu)
    if lam == 0:
        return 0.0
    return 2.0 * lam * lam / (math.hypot(mu, 2.0 * lam) + mu)


def rejection_rate_naive(lam: float, mu: float) -> float:
    """(sqrt(mu^2 + 4 lambda^2) - mu) / 2 as written; loses digits when mu >> lambda."""
    _check_nonnegative(lam=lam, mu=mu)
    return 0.5 * (math.sqrt(mu * mu + 4.0 * lam * lam) - mu)


def rejection_probability(lam: float, mu: float, gamma: float) -> float:
    """P_rej = (gamma + lambda) / (mu + gamma + lambda)."""
    _check_nonnegative(lam=lam, mu=mu, gamma=gamma)
    total = mu + gamma + lam
    if total == 0:
        raise DomainError("rejection probability undefined when mu + gamma + lambda = 0")
    return (gamma + lam) / total


def rejection_probability_from_p0(lam: float, mu: float, p0: float) -> float:
    """Flow-balance form P_rej = 1 - mu (1 - P_0) / lambda."""
    _check_nonnegative(mu=mu)
    if not lam > 0:
        raise DomainError("rejection probability from P_0 needs lambda > 0")
    return 1.0 - mu * (1.0 - p0) / lam


def p0_single(lam: float, mu: float, gamma: float) -> float:
    """Empty-system probability of the M/M/1/1 queue: (mu+gamma)/(mu+gamma+lambda)."""
    _check_nonnegative(lam=lam, mu=mu, gamma=gamma)
    total = mu + gamma + lam
    if total == 0:
        raise DomainError("P_0 undefined when mu + gamma + lambda = 0")
    return (mu + gamma) / total


def gamma_prime(lam: float, mu: float) -> float:
    """Comparison rate lambda^2 / (mu + lambda) that ignores non-receptor rejection."""
    _check_nonnegative(lam=lam, mu=mu)
    if lam + mu == 0:
        raise DomainError("gamma' undefined when mu + lambda = 0")
    return lam * lam / (mu + lam)


def split_gamma(gamma: float, alpha: float) -> Tuple[float, float]:
    """(gamma_a, gamma_b): the active-receptor share alpha and the remainder."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    gamma_a = alpha * gamma
    return gamma_a, gamma - gamma_a


@dataclass(frozen=True)
class RateSet:
    lam: float
    mu: float
    gamma: float
    gamma_prime: float
    gamma_a: float
    gamma_b: float
    Nm: int

    @property
    def gap(self) -> float:
        return self.gamma - self.gamma_prime


def rate_set(lam: float, mu: float, alpha: float, Nm: int) -> RateSet:
    gamma = rejection_rate(lam, mu)
    gamma_a, gamma_b = split_gamma(gamma, alpha)
    return RateSet(
        lam=lam,
        mu=mu,
        gamma=gamma,
        gamma_prime=gamma_prime(lam, mu) if lam + mu > 0 else 0.0,
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        Nm=Nm,
    )


def rate_set_for(params: SystemParams) -> RateSet:
    return rate_set(enter_rate(params), params.mu, params.alpha, capacity(params))


# ============ State-dependent rates ============

def state_rates(i: int, Nr: int, mu: float, gamma: float, Nm: Optional[int] = None) -> Tuple[float, float]:
    """(mu_i, gamma_i) for a chain with Nr receptors, in closed form."""
    if Nr < 1:
        raise DomainError(f"Nr must be at least 1, got {Nr}")
    if i < 1 or (Nm is not None and i > Nm):
        raise DomainError(f"state index {i} outside 1..{Nm if Nm is not None else 'N_m'}")
    if i <= Nr:
        weight = i * (i + 1) // 2
        return weight * mu, weight * gamma
    plateau = Nr * (Nr + 1) // 2
    return plateau * mu, ((Nr + 1) * i - plateau) * gamma


def state_rate_weights(Nr: int, Nm: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer multipliers of mu and gamma for states 1..Nm."""
    i = np.arange(1, Nm + 1, dtype=np.int64)
    triangle = i * (i + 1) // 2
    plateau = Nr * (Nr + 1) // 2
    mu_weight = np.where(i <= Nr, triangle, plateau)
    gamma_weight = np.where(i <= Nr, triangle, (Nr + 1) * i - plateau)
    return mu_weight, gamma_weight


@dataclass(frozen=True)
class ChainSpec:
    """Finite birth-death chain on states 0..Nm.

    Per-state rates are derived on demand; the vectors are cached on first
    use and are immutable afterwards.
    """

    lam: float
    mu: float
    gamma: float
    Nr: int
    Nm: int
    max_states: int = field(default_factory=max_states_limit, compare=False, repr=False)

    def __post_init__(self):
        _check_nonnegative(lam=self.lam, mu=self.mu, gamma=self.gamma)
        if self.Nr < 1:
            raise DomainError(f"Nr must be at least 1, got {self.Nr}")
        if self.Nm < 1:
            raise DomainError(f"Nm must be at least 1, got {self.Nm}")
        if self.mu == 0 and self.gamma == 0:
            raise DomainError("absorbing chain: mu = gamma = 0 leaves no death events")
        if self.Nm + 1 > self.max_states:
            raise DomainError(
                f"chain has {self.Nm + 1} states, above the limit of {self.max_states} "
                f"(set RECEPTION_MAX_STATES to raise it)"
            )

    @classmethod
    def from_rates(cls, lam: float, mu: float, Nr: int, Nm: int, gamma: Optional[float] = None) -> "ChainSpec":
        if gamma is None:
            gamma = rejection_rate(lam, mu)
        return cls(lam=lam, mu=mu, gamma=gamma, Nr=Nr, Nm=Nm)

    @property
    def n_states(self) -> int:
        return self.Nm + 1

    def mu_i(self, i: int) -> float:
        return state_rates(i, self.Nr, self.mu, self.gamma, self.Nm)[0]

    def gamma_i(self, i: int) -> float:
        return state_rates(i, self.Nr, self.mu, self.gamma, self.Nm)[1]

    def death_rate(self, i: int) -> float:
        mu_i, gamma_i = state_rates(i, self.Nr, self.mu, self.gamma, self.Nm)
        return mu_i + gamma_i

    @cached_property
    def _weights(self) -> Tuple[np.ndarray, np.ndarray]:
        return state_rate_weights(self.Nr, self.Nm)

    def mu_rates(self) -> np.ndarray:
        """mu_i for i = 1..Nm."""
        return self._weights[0] * self.mu

    def gamma_rates(self) -> np.ndarray:
        """gamma_i for i = 1..Nm."""
        return self._weights[1] * self.gamma

    def death_rates(self) -> np.ndarray:
        """d_i = mu_i + gamma_i for i = 1..Nm."""
        return self.mu_rates() + self.gamma_rates()

    def perturbed(self, factor: float) -> "ChainSpec":
        """Copy whose death rates are all scaled by (1 + factor)."""
        return replace(self, mu=self.mu * (1.0 + factor), gamma=self.gamma * (1.0 + factor))

    def as_payload(self) -> dict:
        return {"lam": self.lam, "mu": self.mu, "gamma": self.gamma, "Nr": self.Nr, "Nm": self.Nm}


def build_chain(params: SystemParams) -> ChainSpec:
    """Chain for a configuration: lambda from the channel, gamma from lambda and mu."""
    lam = enter_rate(params)
    Nm = capacity(params)
    chain = ChainSpec.from_rates(lam, params.mu, params.Nr, Nm)
    logger.info(f"Built chain: lambda={lam:.6g}/s gamma={chain.gamma:.6g}/s Nr={params.Nr} Nm={Nm}")
    return chain


# ============ Steady state ============

@dataclass(frozen=True)
class SteadyState:
    probs: np.ndarray
    lam: float
    blocking: float
    unbind_throughput: float
    reject_throughput: float
    mean_occupancy: float

    @property
    def effective_arrival(self) -> float:
        return self.lam * (1.0 - self.blocking)

    @property
    def mean_sojourn(self) -> float:
        """Little's law W = L / lambda_eff."""
        rate = self.effective_arrival
        return self.mean_occupancy / rate if rate > 0 else 0.0

    @property
    def rejection_fraction(self) -> float:
        """Share of admitted molecules that leave without binding."""
        departures = self.unbind_throughput + self.reject_throughput
        return self.reject_throughput / departures if departures > 0 else math.nan

    def balance_residuals(self, chain: ChainSpec) -> np.ndarray:
        """|lambda P_{n-1} - d_n P_n| for n = 1..Nm."""
        return np.abs(chain.lam * self.probs[:-1] - chain.death_rates() * self.probs[1:])


def _summarize(chain: ChainSpec, probs: np.ndarray) -> SteadyState:
    tail = probs[1:]
    return SteadyState(
        probs=probs,
        lam=chain.lam,
        blocking=float(probs[-1]),
        unbind_throughput=math.fsum(chain.mu_rates() * tail),
        reject_throughput=math.fsum(chain.gamma_rates() * tail),
        mean_occupancy=math.fsum(np.arange(chain.n_states) * probs),
    )


def steady_state(chain: ChainSpec) -> SteadyState:
    """Product-form stationary distribution, evaluated in log space.

    P_n is proportional to prod_{k<=n} lambda/d_k; the log-weights are
    shifted by their maximum before exponentiating and normalized with a
    compensated sum, so chains with millions of states neither overflow
    nor underflow to an all-zero vector.
    """
    probs = np.zeros(chain.n_states)
    if chain.lam == 0:
        probs[0] = 1.0
        return _summarize(chain, probs)

    deaths = chain.death_rates()
    if np.any(deaths <= 0):
        first = int(np.argmax(deaths <= 0)) + 1
        raise NumericalError(f"death rate of state {first} is zero; no stationary distribution")

    log_weights = np.empty(chain.n_states)
    log_weights[0] = 0.0
    np.cumsum(math.log(chain.lam) - np.log(deaths), out=log_weights[1:])
    if not np.all(np.isfinite(log_weights)):
        raise NumericalError(
            f"non-finite log-weights for lambda={chain.lam:.6g}, mu={chain.mu:.6g}, gamma={chain.gamma:.6g}"
        )
    weights = np.exp(log_weights - log_weights.max())
    total = math.fsum(weights)
    if not (total > 0 and math.isfinite(total)):
        raise NumericalError(f"normalization constant is {total}")
    probs = weights / total
    logger.debug(f"Steady state solved for {chain.n_states} states, P_0={probs[0]:.6g}")
    return _summarize(chain, probs)


def steady_state_dense(chain: ChainSpec) -> SteadyState:
    """Stationary distribution from a direct solve of the global balance equations."""
    n = chain.n_states
    if n > DENSE_STATE_LIMIT:
        raise DomainError(f"dense solve limited to {DENSE_STATE_LIMIT} states, chain has {n}")
    generator = np.zeros((n, n))
    deaths = chain.death_rates()
    for state in range(n):
        if state < n - 1:
            generator[state, state + 1] = chain.lam
        if state > 0:
            generator[state, state - 1] = deaths[state - 1]
        generator[state, state] = -generator[state].sum()
    system = generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    probs = np.linalg.solve(system, rhs)
    return _summarize(chain, probs)
