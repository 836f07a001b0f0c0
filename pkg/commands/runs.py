"""
Single-configuration runs: dosage interval, steady state, simulation and
validation against the analytical steady state.
"""
import logging
import sys
from dataclasses import asdict
from typing import List, Optional

from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

import database
from commands.common import add_config_argument, add_output_argument, load_config, resolve_seed
from models import RunRecord
from reception.diffusion import enter_rate
from reception.dosage import DoseBounds, dose_interval
from reception.params import capacity, describe_errors
from reception.queue import ChainSpec, steady_state
from schemas import SimConfig, ValidationReport, ValidationSettings
from simulation.ctmc_sim import simulate
from simulation.validation import render_report, validate_chain
from utils.csv_writer import open_output, write_table
from utils.errors import EmptyDoseIntervalError, ReceptionError, UsageError, ValidationFailure

logger = logging.getLogger(__name__)

# M/M/1/1 chain used when no configuration is given
DEFAULT_LAMBDA = 2.0
DEFAULT_MU = 1.0

DOSE_HEADER = (
    "q_rate", "q_min_rate", "q_max_rate", "q_min", "q_max",
    "feasible", "f_star", "baseline_q_min_rate", "verdict",
)
STEADY_HEADER = ("n", "probability")
SIMULATE_HEADER = ("n", "occupancy", "std_error")
VALIDATE_HEADER = ("n", "analytic", "empirical", "std_error", "deviation", "z_score")


def resolve_chain(args) -> ChainSpec:
    """Chain from --config with --lam/--mu/--nr/--nm overrides, else M/M/1/1."""
    if args.config:
        params = load_config(args)
        lam = args.lam if args.lam is not None else enter_rate(params)
        mu = args.mu if args.mu is not None else params.mu
        Nr = args.nr if args.nr is not None else params.Nr
        Nm = args.nm if args.nm is not None else capacity(params)
    else:
        lam = args.lam if args.lam is not None else DEFAULT_LAMBDA
        mu = args.mu if args.mu is not None else DEFAULT_MU
        Nr = args.nr if args.nr is not None else 1
        Nm = args.nm if args.nm is not None else 1
    chain = ChainSpec.from_rates(lam, mu, Nr, Nm)
    logger.info(f"Chain: lambda={chain.lam:.6g} mu={chain.mu:.6g} gamma={chain.gamma:.6g} Nr={Nr} Nm={Nm}")
    return chain


def dose_row(bounds: DoseBounds) -> tuple:
    values = asdict(bounds)
    return tuple(values[column] for column in DOSE_HEADER)


def steady_rows(probs) -> List[tuple]:
    """(n, P_n) for every state with positive probability."""
    return [(n, p) for n, p in enumerate(probs.tolist()) if p > 0]


def record_run(
    command: str,
    seed: int,
    replications: int,
    events: int,
    states: int,
    tv_distance: Optional[float] = None,
    passed: Optional[bool] = None,
    report: Optional[dict] = None,
    session_factory=None,
) -> int:
    """Store a run summary in the ledger and return its id."""
    db = (session_factory or database.SessionLocal)()
    try:
        database.init_db(bind=db.get_bind())
        record = RunRecord(
            command=command,
            seed=str(seed),
            replications=replications,
            events=events,
            states=states,
            tv_distance=tv_distance,
            passed=passed,
            report=report,
        )
        db.add(record)
        db.commit()
        db.refresh(record)
        logger.info(f"Recorded {command} run #{record.id}")
        return record.id
    except SQLAlchemyError as e:
        db.rollback()
        logger.error(f"Failed to record {command} run: {str(e)}")
        raise ReceptionError(f"could not record run: {e}") from e
    finally:
        db.close()


def cmd_dose(args) -> int:
    params = load_config(args)
    try:
        bounds = dose_interval(params)
    except EmptyDoseIntervalError as exc:
        with open_output(args.out) as stream:
            write_table(stream, DOSE_HEADER, [dose_row(exc.bounds)])
        raise
    with open_output(args.out) as stream:
        write_table(stream, DOSE_HEADER, [dose_row(bounds)])
    return 0


def cmd_steady(args) -> int:
    chain = resolve_chain(args)
    solution = steady_state(chain)
    with open_output(args.out) as stream:
        write_table(stream, STEADY_HEADER, steady_rows(solution.probs))
    logger.info(
        f"Steady state: blocking={solution.blocking:.6g} L={solution.mean_occupancy:.6g} "
        f"W={solution.mean_sojourn:.6g} unbind={solution.unbind_throughput:.6g}/s "
        f"reject={solution.reject_throughput:.6g}/s"
    )
    return 0


def _check_runs(args) -> None:
    if args.events is not None and args.events < 1:
        raise UsageError("--events must be positive")
    if args.reps is not None and args.reps < 1:
        raise UsageError("--reps must be positive")
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be positive")


def cmd_simulate(args) -> int:
    _check_runs(args)
    chain = resolve_chain(args)
    seed = resolve_seed(args.seed)
    try:
        config = SimConfig(
            chain=chain,
            max_events=args.events if args.events is not None else 1_000_000,
            warmup_events=args.warmup,
            seed=seed,
            replications=args.reps if args.reps is not None else 1,
        )
    except ValidationError as exc:
        raise UsageError(f"invalid simulation settings: {describe_errors(exc)}") from exc
    result = simulate(config, backend=args.backend, max_workers=args.workers, trajectory_path=args.trajectory)
    rows = [
        (n, occupancy, se)
        for n, (occupancy, se) in enumerate(zip(result.occupancy, result.std_error))
        if occupancy > 0
    ]
    with open_output(args.out) as stream:
        write_table(stream, SIMULATE_HEADER, rows)
    logger.info(
        f"Counts {result.counts}, in system at end {result.in_system_at_end}, "
        f"rejection fraction {result.rejection_fraction_of_departures:.6g}"
    )
    if args.record:
        record_run("simulate", seed, config.replications, config.max_events, chain.n_states)
    return 0


def validation_rows(report: ValidationReport) -> List[tuple]:
    return [
        (row.n, row.analytic, row.empirical, row.std_error, row.deviation, row.z_score)
        for row in report.per_state
    ]


def cmd_validate(args) -> int:
    _check_runs(args)
    chain = resolve_chain(args)
    overrides = {
        key: value
        for key, value in (
            ("events", args.events),
            ("warmup_events", args.warmup),
            ("replications", args.reps),
            ("tv_tolerance", args.tv_tol),
            ("perturb", args.perturb),
            ("workers", args.workers),
        )
        if value is not None
    }
    try:
        settings = ValidationSettings(seed=resolve_seed(args.seed), backend=args.backend, **overrides)
    except ValidationError as exc:
        raise UsageError(f"invalid validation settings: {describe_errors(exc)}") from exc
    report = validate_chain(chain, settings, trajectory_path=args.trajectory)
    with open_output(args.out) as stream:
        write_table(stream, VALIDATE_HEADER, validation_rows(report))
    print(render_report(report), file=sys.stderr)
    if args.record:
        record_run(
            "validate",
            settings.seed,
            settings.replications,
            settings.events,
            report.states,
            tv_distance=report.tv_median,
            passed=report.passed,
            report=report.model_dump(mode="json", exclude={"per_state"}),
        )
    if not report.passed:
        raise ValidationFailure("; ".join(report.failures), report)
    return 0


def _add_chain_arguments(parser) -> None:
    add_config_argument(parser, required=False)
    parser.add_argument("--lam", type=float, default=None, help="arrival rate lambda (1/s)")
    parser.add_argument("--mu", type=float, default=None, help="unbinding rate mu (1/s)")
    parser.add_argument("--nr", type=int, default=None, help="number of receptors")
    parser.add_argument("--nm", type=int, default=None, help="capacity of the reception space")


def _add_run_arguments(parser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (default RECEPTION_SEED or 0)")
    parser.add_argument("--events", type=int, default=None, help="events per replication")
    parser.add_argument("--warmup", type=int, default=None, help="discarded events (default 10%%)")
    parser.add_argument("--reps", type=int, default=None, help="independent replications")
    parser.add_argument("--backend", choices=("local", "celery"), default="local")
    parser.add_argument("--workers", type=int, default=None, help="local process pool size")
    parser.add_argument("--trajectory", default=None, help="write replication 0's events to this CSV")
    parser.add_argument("--record", action="store_true", help="store the run in the ledger")


def register(subparsers) -> None:
    dose = subparsers.add_parser("dose", help="allowable release interval for one configuration")
    add_config_argument(dose, required=True)
    add_output_argument(dose)
    dose.set_defaults(handler=cmd_dose)

    steady = subparsers.add_parser("steady", help="steady-state distribution of the reception chain")
    _add_chain_arguments(steady)
    add_output_argument(steady)
    steady.set_defaults(handler=cmd_steady)

    sim = subparsers.add_parser("simulate", help="event-driven simulation of the reception chain")
    _add_chain_arguments(sim)
    _add_run_arguments(sim)
    add_output_argument(sim)
    sim.set_defaults(handler=cmd_simulate)

    check = subparsers.add_parser("validate", help="compare simulation with the analytical steady state")
    _add_chain_arguments(check)
    _add_run_arguments(check)
    check.add_argument("--perturb", type=float, default=None, help="scale simulated death rates by 1+x")
    check.add_argument("--tv-tol", dest="tv_tol", type=float, default=None, help="total variation tolerance")
    add_output_argument(check)
    check.set_defaults(handler=cmd_validate)
