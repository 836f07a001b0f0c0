"""
Cross-check of the analytical steady state against simulation.

The analytical side is always the unperturbed chain; `perturb` scales the
simulated death rates so a deliberately wrong model can be shown to fail.
"""
import logging
import math
from typing import List, Optional

import numpy as np

from reception.params import SystemParams
from reception.queue import ChainSpec, SteadyState, build_chain, steady_state
from schemas import SimConfig, StateDeviation, ValidationReport, ValidationSettings
from simulation.ctmc_sim import simulate

logger = logging.getLogger(__name__)

# States below this analytic probability and never visited are left out of per-state rows
NEGLIGIBLE_PROBABILITY = 1e-15


def total_variation(p, q) -> float:
    """Half the L1 distance between two probability vectors."""
    return 0.5 * math.fsum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)))


def _rel_error(observed: float, expected: float) -> float:
    if not math.isfinite(observed) or not math.isfinite(expected) or expected == 0:
        return math.nan
    return abs(observed - expected) / abs(expected)


def _per_state(analytic: SteadyState, occupancy: List[float], std_error: List[float]) -> List[StateDeviation]:
    rows = []
    for n, (expected, observed, se) in enumerate(zip(analytic.probs.tolist(), occupancy, std_error)):
        if observed == 0 and expected < NEGLIGIBLE_PROBABILITY:
            continue
        deviation = observed - expected
        rows.append(
            StateDeviation(
                n=n,
                analytic=expected,
                empirical=observed,
                std_error=se,
                deviation=deviation,
                z_score=deviation / se if se > 0 else None,
            )
        )
    return rows


def validate_chain(chain: ChainSpec, settings: ValidationSettings, trajectory_path: Optional[str] = None) -> ValidationReport:
    """Simulate `chain` (optionally perturbed) and score it against steady_state(chain)."""
    analytic = steady_state(chain)
    simulated = chain.perturbed(settings.perturb) if settings.perturb else chain
    config = SimConfig(
        chain=simulated,
        max_events=settings.events,
        warmup_events=settings.warmup_events,
        seed=settings.seed,
        replications=settings.replications,
    )
    result = simulate(config, backend=settings.backend, max_workers=settings.workers, trajectory_path=trajectory_path)

    replication_tv = [total_variation(rep.occupancy, analytic.probs) for rep in result.replications]
    tv_median = float(np.median(replication_tv))
    tv_merged = total_variation(result.occupancy, analytic.probs)

    analytic_fraction = analytic.rejection_fraction
    empirical_fraction = result.rejection_fraction_of_departures
    rejection_error = _rel_error(empirical_fraction, analytic_fraction)

    expected_mean = 1.0 / chain.lam if chain.lam > 0 else math.nan
    expected_var = expected_mean ** 2
    mean_error = _rel_error(result.interarrival_mean, expected_mean)
    var_error = _rel_error(result.interarrival_var, expected_var)
    per_state = _per_state(analytic, result.occupancy, result.std_error)

    failures = []
    if tv_median >= settings.tv_tolerance:
        worst = max(per_state, key=lambda row: abs(row.deviation))
        failures.append(
            f"total variation {tv_median:.4g} >= {settings.tv_tolerance:g}; "
            f"largest deviation at state {worst.n}: empirical {worst.empirical:.6g} vs analytic {worst.analytic:.6g}"
        )
    if math.isfinite(rejection_error) and rejection_error > settings.rejection_tolerance:
        failures.append(
            f"rejection fraction {empirical_fraction:.6g} vs analytic {analytic_fraction:.6g} "
            f"(relative error {rejection_error:.3g} > {settings.rejection_tolerance:g})"
        )
    if math.isfinite(mean_error) and mean_error > settings.interarrival_mean_tolerance:
        failures.append(
            f"interarrival mean {result.interarrival_mean:.6g} vs 1/lambda {expected_mean:.6g} "
            f"(relative error {mean_error:.3g})"
        )
    if math.isfinite(var_error) and var_error > settings.interarrival_var_tolerance:
        failures.append(
            f"interarrival variance {result.interarrival_var:.6g} vs 1/lambda^2 {expected_var:.6g} "
            f"(relative error {var_error:.3g})"
        )

    report = ValidationReport(
        passed=not failures,
        failures=failures,
        seed=settings.seed,
        events=settings.events,
        replications=settings.replications,
        states=chain.n_states,
        tv_distance=tv_merged,
        tv_median=tv_median,
        replication_tv=replication_tv,
        per_state=per_state,
        analytic_rejection_fraction=analytic_fraction,
        empirical_rejection_fraction=empirical_fraction,
        rejection_rel_error=rejection_error,
        expected_interarrival_mean=expected_mean,
        interarrival_mean=result.interarrival_mean,
        interarrival_mean_rel_error=mean_error,
        expected_interarrival_var=expected_var,
        interarrival_var=result.interarrival_var,
        interarrival_var_rel_error=var_error,
        perturb=settings.perturb,
    )
    if report.passed:
        logger.info(f"Validation passed: TV median {tv_median:.4g}")
    else:
        logger.warning(f"Validation failed: {'; '.join(failures)}")
    return report


def validate(params: SystemParams, settings: ValidationSettings) -> ValidationReport:
    return validate_chain(build_chain(params), settings)


def render_report(report: ValidationReport) -> str:
    """Plain-text summary of a validation run."""
    lines = [
        f"validation: {'PASS' if report.passed else 'FAIL'}",
        f"  states={report.states} events={report.events} replications={report.replications} seed={report.seed}",
        f"  total variation: merged={report.tv_distance:.6g} median={report.tv_median:.6g}",
        f"  rejection fraction: empirical={report.empirical_rejection_fraction:.6g} "
        f"analytic={report.analytic_rejection_fraction:.6g}",
        f"  interarrival mean: {report.interarrival_mean:.6g} (1/lambda={report.expected_interarrival_mean:.6g})",
        f"  interarrival variance: {report.interarrival_var:.6g} (1/lambda^2={report.expected_interarrival_var:.6g})",
    ]
    if report.perturb:
        lines.append(f"  death rates perturbed by {report.perturb:+g}")
    lines.extend(f"  failure: {failure}" for failure in report.failures)
    return "\n".join(lines)
