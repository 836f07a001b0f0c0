"""
Exact event-driven simulation of the reception birth-death chain.

In state n the next event occurs after an exponential time with rate
lambda + mu_n + gamma_n; the event is an arrival with probability
lambda/total, an unbinding with mu_n/total, a rejection otherwise. Arrivals
in the full state N_m are lost (counted as blocked, state unchanged).
Blocked molecules do not retry.

Replication k draws from the stream SeedSequence(seed, spawn_key=(k,)),
which is the k-th child of SeedSequence(seed).spawn(...), so a replication
can be rerun in isolation on any worker and still reproduce bit for bit.
Occupancy is time-weighted and excludes the warmup events; the full-run
event counts start from the empty state so that

    arrivals = unbinds + rejects + blocked + (molecules present at the end)

holds exactly.
"""
import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

import numpy as np

from reception.queue import ChainSpec
from schemas import EVENT_TYPES, ReplicationSummary, SimConfig, SimResult
from utils.errors import BackendError, DeadlockError, DomainError

logger = logging.getLogger(__name__)

RANDOM_BATCH = 1 << 16

# Seconds to wait for a Celery result beyond the task time limit
RESULT_WAIT_MARGIN = 60


def replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _empty_counts() -> Dict[str, int]:
    return {event: 0 for event in EVENT_TYPES}


def simulate_replication(
    payload: dict,
    seed: int,
    index: int,
    max_events: int,
    warmup_events: int,
    trajectory_path: Optional[str] = None,
) -> ReplicationSummary:
    """Run one trajectory of `max_events` events from the empty state."""
    chain = ChainSpec(**payload)
    lam = float(chain.lam)
    Nm = chain.Nm
    mu_rates = [0.0] + chain.mu_rates().tolist()
    death_rates = [0.0] + chain.death_rates().tolist()

    counts = _empty_counts()
    measured = _empty_counts()
    time_in_state = [0.0] * (Nm + 1)

    if lam == 0:
        # nothing ever arrives: the empty state is occupied forever
        time_in_state[0] = 1.0
        return ReplicationSummary(
            index=index, seed=seed, occupancy=time_in_state, counts=counts,
            measured_counts=measured, final_state=0, measured_time=0.0,
            interarrival_count=0, interarrival_mean=math.nan, interarrival_m2=math.nan,
        )

    rng = replication_rng(seed, index)
    waits = rng.standard_exponential(RANDOM_BATCH).tolist()
    picks = rng.random(RANDOM_BATCH).tolist()
    cursor = 0

    trajectory_file = open(trajectory_path, "w", newline="", encoding="utf-8") if trajectory_path else None
    trajectory = csv.writer(trajectory_file, lineterminator="\n") if trajectory_file else None
    if trajectory:
        trajectory.writerow(["time", "state", "event_type"])

    n = 0
    clock = 0.0
    since_arrival = 0.0
    gaps = 0
    gap_mean = 0.0
    gap_m2 = 0.0
    try:
        for event in range(max_events):
            total = lam + death_rates[n]
            if not total > 0:
                raise DeadlockError(f"state {n} has no outgoing transitions")
            if cursor == RANDOM_BATCH:
                waits = rng.standard_exponential(RANDOM_BATCH).tolist()
                picks = rng.random(RANDOM_BATCH).tolist()
                cursor = 0
            dt = waits[cursor] / total
            pick = picks[cursor] * total
            cursor += 1
            clock += dt

            measuring = event >= warmup_events
            if measuring:
                time_in_state[n] += dt
                since_arrival += dt

            if pick < lam:
                kind = "arrival"
                counts["arrival"] += 1
                if measuring:
                    measured["arrival"] += 1
                    # Welford update of the interarrival moments
                    gaps += 1
                    delta = since_arrival - gap_mean
                    gap_mean += delta / gaps
                    gap_m2 += delta * (since_arrival - gap_mean)
                    since_arrival = 0.0
                if n == Nm:
                    kind = "blocked"
                    counts["blocked"] += 1
                    if measuring:
                        measured["blocked"] += 1
                else:
                    n += 1
            else:
                kind = "unbind" if pick < lam + mu_rates[n] else "reject"
                n -= 1
                counts[kind] += 1
                if measuring:
                    measured[kind] += 1

            if trajectory:
                trajectory.writerow([format(clock, ".17g"), n, kind])
    finally:
        if trajectory_file:
            trajectory_file.close()

    measured_time = math.fsum(time_in_state)
    if not measured_time > 0:
        raise DomainError("no time accumulated after warmup")
    occupancy = (np.asarray(time_in_state) / measured_time).tolist()

    logger.debug(f"Replication {index}: {max_events} events, final state {n}, counts {counts}")
    return ReplicationSummary(
        index=index,
        seed=seed,
        occupancy=occupancy,
        counts=counts,
        measured_counts=measured,
        final_state=n,
        measured_time=measured_time,
        interarrival_count=gaps,
        interarrival_mean=gap_mean if gaps else math.nan,
        interarrival_m2=gap_m2 if gaps else math.nan,
    )


def _run_local(config: SimConfig, max_workers: Optional[int], trajectory_path: Optional[str]) -> List[ReplicationSummary]:
    payload = config.chain.as_payload()
    args = [
        (payload, config.seed, k, config.max_events, config.warmup_events, trajectory_path if k == 0 else None)
        for k in range(config.replications)
    ]
    if config.replications == 1 or max_workers == 1:
        return [simulate_replication(*a) for a in args]
    with ProcessPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(simulate_replication, *a) for a in args]
        return [future.result() for future in futures]


def _run_celery(config: SimConfig, trajectory_path: Optional[str]) -> List[ReplicationSummary]:
    from celery.exceptions import TimeoutError as ResultTimeout

    from celery_app import celery_app
    from celery_app.tasks import run_replication

    timeout = celery_app.conf.task_time_limit + RESULT_WAIT_MARGIN
    payload = config.chain.as_payload()
    pending = [
        run_replication.apply_async(
            args=[payload, config.seed, k, config.max_events, config.warmup_events,
                  trajectory_path if k == 0 else None]
        )
        for k in range(config.replications)
    ]
    summaries = []
    for k, result in enumerate(pending):
        try:
            summaries.append(ReplicationSummary.model_validate(result.get(timeout=timeout)))
        except ResultTimeout:
            raise BackendError(
                f"replication {k} returned no result within {timeout}s; is a Celery worker running?"
            )
    return summaries


def _pooled_interarrival(reps: List[ReplicationSummary]):
    """Combine per-replication Welford moments (parallel variance formula)."""
    count, mean, m2 = 0, 0.0, 0.0
    for rep in reps:
        if rep.interarrival_count == 0:
            continue
        delta = rep.interarrival_mean - mean
        combined = count + rep.interarrival_count
        mean += delta * rep.interarrival_count / combined
        m2 += rep.interarrival_m2 + delta * delta * count * rep.interarrival_count / combined
        count = combined
    if count == 0:
        return 0, math.nan, math.nan
    return count, mean, (m2 / (count - 1) if count > 1 else math.nan)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else math.nan


def merge_replications(seed: int, reps: List[ReplicationSummary]) -> SimResult:
    """Merge replications in index order into a single result."""
    reps = sorted(reps, key=lambda rep: rep.index)
    matrix = np.asarray([rep.occupancy for rep in reps])
    occupancy = matrix.mean(axis=0)
    occupancy /= math.fsum(occupancy)
    if len(reps) > 1:
        std_error = matrix.std(axis=0, ddof=1) / math.sqrt(len(reps))
    else:
        std_error = np.zeros_like(occupancy)

    counts = _empty_counts()
    measured = _empty_counts()
    for rep in reps:
        for event in EVENT_TYPES:
            counts[event] += rep.counts[event]
            measured[event] += rep.measured_counts[event]

    gaps, gap_mean, gap_var = _pooled_interarrival(reps)
    rejects = measured["reject"]
    return SimResult(
        seed=seed,
        occupancy=occupancy.tolist(),
        std_error=std_error.tolist(),
        counts=counts,
        measured_counts=measured,
        empirical_rejection_fraction=_ratio(rejects, rejects + measured["unbind"] + measured["blocked"]),
        rejection_per_arrival=_ratio(rejects, measured["arrival"]),
        rejection_fraction_of_departures=_ratio(rejects, rejects + measured["unbind"]),
        interarrival_count=gaps,
        interarrival_mean=gap_mean,
        interarrival_var=gap_var,
        replications=reps,
    )


def simulate(
    config: SimConfig,
    backend: str = "local",
    max_workers: Optional[int] = None,
    trajectory_path: Optional[str] = None,
) -> SimResult:
    """Run all replications of `config` and merge them by replication index."""
    logger.info(
        f"Simulating {config.chain.n_states}-state chain: {config.replications} x {config.max_events} events "
        f"(warmup {config.warmup_events}), seed={config.seed}, backend={backend}"
    )
    if backend == "local":
        reps = _run_local(config, max_workers, trajectory_path)
    elif backend == "celery":
        reps = _run_celery(config, trajectory_path)
    else:
        raise DomainError(f"unknown simulation backend '{backend}'")
    result = merge_replications(config.seed, reps)
    logger.info(f"Simulation finished: counts {result.counts}")
    return result
