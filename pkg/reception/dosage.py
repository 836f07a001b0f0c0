"""
Occupancy factor and the allowable release interval [Q_min, Q_max].

Rates are per second (Q/dt); counts are per release step dt. The lower
bound has a closed form only while f < f_star = K+/(1+K+); at or above the
boundary no finite release rate reaches the requested occupancy.
"""
import logging
import math
from dataclasses import dataclass

from reception.diffusion import enter_rate
from reception.params import SystemParams, capacity
from reception.queue import rejection_rate
from utils.errors import DomainError, EmptyDoseIntervalError, InfeasibleDoseError

logger = logging.getLogger(__name__)

VERDICT_BELOW = "below: does not affect the target"
VERDICT_WITHIN = "within"
VERDICT_ABOVE = "above: would cause side effects"
VERDICT_INFEASIBLE = "infeasible: f at or above f_star"
VERDICT_EMPTY = "empty: Q_min exceeds Q_max"


@dataclass(frozen=True)
class DoseBounds:
    q_min_rate: float
    q_max_rate: float
    q_min: float
    q_max: float
    feasible: bool
    f_star: float
    q_rate: float
    baseline_q_min_rate: float
    verdict: str


def feasibility_boundary(Kplus: float) -> float:
    """f_star = K+/(1+K+): the largest occupancy factor the lower bound can reach."""
    if not Kplus > 0:
        raise DomainError(f"K+ must be positive, got {Kplus}")
    return Kplus / (1.0 + Kplus)


def occupancy_factor(C: float, Kplus: float, mu: float, gamma: float) -> float:
    """f = K+ C / (K+ C + mu + gamma)."""
    for name, value in (("C", C), ("Kplus", Kplus), ("mu", mu), ("gamma", gamma)):
        if not value >= 0:
            raise DomainError(f"{name} must be non-negative, got {value}")
    if math.isinf(C):
        return 1.0
    bound = Kplus * C
    denominator = bound + mu + gamma
    if denominator == 0:
        raise DomainError("occupancy factor undefined when K+ C + mu + gamma = 0")
    return bound / denominator


def min_effective_concentration(f: float, Kplus: float, mu: float, gamma: float) -> float:
    """C = f (mu + gamma) / (K+ (1 - f)); inverse of occupancy_factor in C."""
    if f >= 1:
        raise DomainError(f"f must lie strictly below 1, got {f}")
    if f < 0:
        raise DomainError(f"f must be non-negative, got {f}")
    if not Kplus > 0:
        raise DomainError(f"K+ must be positive, got {Kplus}")
    return f * (mu + gamma) / (Kplus * (1.0 - f))


def _channel_factor(params: SystemParams) -> float:
    return 4.0 * math.pi * params.D * params.R


def q_min_given_gamma(params: SystemParams, gamma: float) -> float:
    """Q_min/dt = 4 pi D R f (mu + gamma) / (K+ (1 - f)) for a known gamma."""
    return _channel_factor(params) * min_effective_concentration(params.f, params.Kplus, params.mu, gamma)


def q_min_baseline(params: SystemParams) -> float:
    """Lower bound of a reception model without rejection (gamma = 0)."""
    return q_min_given_gamma(params, 0.0)


def q_min(params: SystemParams) -> float:
    """Q_min/dt with gamma eliminated through its own dependence on the release rate."""
    f, k = params.f, params.Kplus
    f_star = feasibility_boundary(k)
    if f >= f_star:
        raise InfeasibleDoseError(f, f_star)
    denominator = k * (1.0 - f) ** 2 - f * f / k
    if not denominator > 0:
        raise InfeasibleDoseError(f, f_star)
    return _channel_factor(params) * params.mu * f * (1.0 - f) / denominator


def q_max(params: SystemParams) -> float:
    """Q_max/dt = 4 pi D R N_m: the release rate that fills the reception space."""
    return _channel_factor(params) * capacity(params)


def dose_interval(params: SystemParams) -> DoseBounds:
    """Both bounds and where the configured release Q/dt falls relative to them."""
    f_star = feasibility_boundary(params.Kplus)
    upper = q_max(params)
    q_rate = params.Q / params.dt
    baseline = q_min_baseline(params)
    try:
        lower = q_min(params)
    except InfeasibleDoseError:
        logger.warning(f"f={params.f} is at or above f_star={f_star:.6g}; no lower bound exists")
        return DoseBounds(
            q_min_rate=math.nan,
            q_max_rate=upper,
            q_min=math.nan,
            q_max=upper * params.dt,
            feasible=False,
            f_star=f_star,
            q_rate=q_rate,
            baseline_q_min_rate=baseline,
            verdict=VERDICT_INFEASIBLE,
        )

    if lower > upper:
        verdict = VERDICT_EMPTY
    elif q_rate < lower:
        verdict = VERDICT_BELOW
    elif q_rate > upper:
        verdict = VERDICT_ABOVE
    else:
        verdict = VERDICT_WITHIN

    bounds = DoseBounds(
        q_min_rate=lower,
        q_max_rate=upper,
        q_min=lower * params.dt,
        q_max=upper * params.dt,
        feasible=True,
        f_star=f_star,
        q_rate=q_rate,
        baseline_q_min_rate=baseline,
        verdict=verdict,
    )
    if verdict == VERDICT_EMPTY:
        raise EmptyDoseIntervalError(bounds)
    logger.info(f"Dose interval [{lower:.6g}, {upper:.6g}]/s, configured {q_rate:.6g}/s: {verdict}")
    return bounds


def fixed_point_residual(params: SystemParams) -> float:
    """Relative deviation of the occupancy reached at Q_min from the requested f."""
    rate = q_min(params)
    lam = enter_rate(params.model_copy(update={"Q": rate * params.dt}))
    gamma = rejection_rate(lam, params.mu)
    reached = occupancy_factor(lam, params.Kplus, params.mu, gamma)
    return abs(reached - params.f) / params.f
