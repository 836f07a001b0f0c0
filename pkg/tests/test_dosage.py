import math

import numpy as np
import pytest

from reception.diffusion import enter_rate
from reception.dosage import (
    VERDICT_ABOVE,
    VERDICT_BELOW,
    VERDICT_EMPTY,
    VERDICT_INFEASIBLE,
    VERDICT_WITHIN,
    dose_interval,
    feasibility_boundary,
    fixed_point_residual,
    min_effective_concentration,
    occupancy_factor,
    q_max,
    q_min,
    q_min_baseline,
    q_min_given_gamma,
)
from reception.params import capacity, with_overrides
from reception.queue import rejection_rate
from utils.errors import DomainError, EmptyDoseIntervalError, InfeasibleDoseError


def test_feasibility_boundary():
    assert feasibility_boundary(0.5) == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        feasibility_boundary(0.0)


def test_occupancy_factor_limits():
    assert occupancy_factor(0.0, 0.5, 1000.0, 10.0) == 0.0
    assert occupancy_factor(math.inf, 0.5, 1000.0, 10.0) == 1.0
    with pytest.raises(DomainError):
        occupancy_factor(0.0, 0.5, 0.0, 0.0)


def test_min_effective_concentration_inverts_occupancy():
    C = min_effective_concentration(0.2, 0.5, 1000.0, 333.0)
    assert occupancy_factor(C, 0.5, 1000.0, 333.0) == pytest.approx(0.2, rel=1e-12)


def test_q_min_worked_example(reference):
    rate = q_min(reference)
    assert rate == pytest.approx(8.3776e6, rel=1e-4)
    lam = enter_rate(with_overrides(reference, Q=rate * reference.dt))
    assert lam == pytest.approx(666.67, rel=1e-4)
    assert rejection_rate(lam, reference.mu) == pytest.approx(333.33, rel=1e-4)


def test_q_min_is_a_fixed_point(reference):
    assert fixed_point_residual(reference) < 1e-12
    for f in (0.05, 0.1, 0.3):
        assert fixed_point_residual(with_overrides(reference, f=f)) < 1e-10


def test_q_min_agrees_with_the_bound_at_its_own_gamma(reference):
    rate = q_min(reference)
    gamma = rejection_rate(rate / (4 * math.pi * reference.D * reference.R), reference.mu)
    assert q_min_given_gamma(reference, gamma) == pytest.approx(rate, rel=1e-12)


def test_infeasible_occupancy_raises(reference):
    with pytest.raises(InfeasibleDoseError) as excinfo:
        q_min(with_overrides(reference, f=0.4))
    assert excinfo.value.f_star == pytest.approx(1 / 3)
    assert excinfo.value.exit_code == 2
    with pytest.raises(InfeasibleDoseError):
        q_min(with_overrides(reference, f=1 / 3))


def test_q_max_reference(reference):
    assert q_max(reference) == pytest.approx(4 * math.pi * 100 * 10 * 4_167_000, rel=1e-12)
    assert q_max(reference) == pytest.approx(5.2364e10, rel=1e-4)


def test_q_max_is_independent_of_f(reference):
    assert q_max(with_overrides(reference, f=0.05)) == q_max(with_overrides(reference, f=0.3))


def test_q_min_is_linear_in_distance(reference):
    assert q_min(with_overrides(reference, R=20.0)) == pytest.approx(2 * q_min(reference), rel=1e-12)
    assert q_min(with_overrides(reference, R=35.0)) == pytest.approx(3.5 * q_min(reference), rel=1e-12)


def test_baseline_gap_grows_with_f(reference):
    gaps = []
    for f in (0.05, 0.1, 0.2, 0.3):
        point = with_overrides(reference, f=f)
        gaps.append(q_min(point) - q_min_baseline(point))
    assert all(gap > 0 for gap in gaps)
    assert gaps == sorted(gaps)


def test_dose_interval_verdicts(reference):
    assert dose_interval(reference).verdict == VERDICT_ABOVE
    assert dose_interval(with_overrides(reference, Q=1e6)).verdict == VERDICT_WITHIN
    assert dose_interval(with_overrides(reference, Q=1e2)).verdict == VERDICT_BELOW


def test_dose_interval_fields(reference):
    bounds = dose_interval(reference)
    assert bounds.feasible
    assert bounds.q_rate == pytest.approx(1e12)
    assert bounds.q_min == pytest.approx(bounds.q_min_rate * reference.dt)
    assert bounds.q_max == pytest.approx(bounds.q_max_rate * reference.dt)
    assert bounds.baseline_q_min_rate < bounds.q_min_rate


def test_dose_interval_reports_infeasible_f(reference):
    bounds = dose_interval(with_overrides(reference, f=0.5))
    assert not bounds.feasible
    assert math.isnan(bounds.q_min_rate)
    assert bounds.verdict == VERDICT_INFEASIBLE
    assert bounds.q_max_rate == q_max(reference)


def test_empty_interval_is_reported(reference):
    # Re=3, Rr=2, Ra=2.6 leaves room for a single molecule
    tiny = with_overrides(reference, Re=3.0, Ra=2.6)
    with pytest.raises(EmptyDoseIntervalError) as excinfo:
        dose_interval(tiny)
    bounds = excinfo.value.bounds
    assert bounds.verdict == VERDICT_EMPTY
    assert bounds.q_min_rate > bounds.q_max_rate
    assert excinfo.value.exit_code == 2


def test_q_min_fixed_point_over_random_configurations(reference):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        kplus = float(rng.uniform(0.1, 5.0))
        point = with_overrides(
            reference,
            Kplus=kplus,
            f=float(rng.uniform(0.01, 0.95) * feasibility_boundary(kplus)),
            mu=float(10 ** rng.uniform(0, 4)),
            D=float(rng.uniform(10, 1000)),
            R=float(rng.uniform(1, 100)),
        )
        assert fixed_point_residual(point) < 1e-10


@pytest.mark.parametrize("kplus", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_infeasibility_tracks_kplus(reference, kplus):
    f_star = kplus / (1 + kplus)
    assert feasibility_boundary(kplus) == pytest.approx(f_star, rel=1e-15)
    assert q_min(with_overrides(reference, Kplus=kplus, f=0.99 * f_star)) > 0
    for f in (f_star, (1 + f_star) / 2):
        with pytest.raises(InfeasibleDoseError):
            q_min(with_overrides(reference, Kplus=kplus, f=f))


def test_q_max_release_fills_the_reception_space(reference):
    full = with_overrides(reference, Q=q_max(reference) * reference.dt)
    assert enter_rate(full) == pytest.approx(capacity(reference), rel=1e-12)


def test_q_min_increases_with_f(reference):
    rates = [q_min(with_overrides(reference, f=float(f))) for f in np.linspace(0.01, 0.33, 50)]
    assert all(a < b for a, b in zip(rates, rates[1:]))
