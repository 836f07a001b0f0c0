"""
Parameter sweeps behind the rate, state-rate and dose-bound figures.

Each table builder returns (header, rows) so it can be tested without the
command line; the handlers only load the configuration and write CSV.
"""
import logging
from typing import List, Optional, Sequence, Tuple

from commands.common import (
    add_config_argument,
    add_output_argument,
    add_sweep_argument,
    load_config,
    parse_list,
    parse_sweep,
)
from reception.diffusion import enter_rate
from reception.dosage import feasibility_boundary, q_max, q_min, q_min_baseline
from reception.params import SystemParams, capacity, with_overrides
from reception.queue import rate_set, rejection_rate, state_rates
from schemas import SweepSpec
from utils.csv_writer import open_output, write_table
from utils.errors import InfeasibleDoseError

logger = logging.getLogger(__name__)

RATES_HEADER = ("value", "lambda", "gamma", "gamma_prime", "gap", "gamma_a", "gamma_b")
STATE_RATES_HEADER = ("Nr", "i", "mu_i", "gamma_i")
BOUNDS_HEADER = (
    "value", "f", "f_star", "feasible", "q_min_rate", "q_max_rate", "baseline_q_min_rate", "gap",
)

Table = Tuple[Sequence[str], List[tuple]]


def rates_table(params: SystemParams, sweep: SweepSpec) -> Table:
    """lambda, gamma, gamma', their gap and the gamma split over one swept variable."""
    Nm = capacity(params)
    rows = []
    for value in sweep.values():
        point = with_overrides(params, **{sweep.variable: value})
        rates = rate_set(enter_rate(point), point.mu, point.alpha, Nm)
        rows.append((value, rates.lam, rates.gamma, rates.gamma_prime, rates.gap, rates.gamma_a, rates.gamma_b))
    return RATES_HEADER, rows


def state_rates_table(params: SystemParams, sweep: SweepSpec, nr_values: Optional[List[int]] = None) -> Table:
    """(mu_i, gamma_i) over the state index for one or more receptor counts."""
    lam = enter_rate(params)
    gamma = rejection_rate(lam, params.mu)
    Nm = capacity(params)
    rows = []
    for Nr in nr_values or [params.Nr]:
        for i in sweep.values():
            mu_i, gamma_i = state_rates(int(i), Nr, params.mu, gamma, Nm)
            rows.append((Nr, int(i), mu_i, gamma_i))
    return STATE_RATES_HEADER, rows


def _bounds_row(value: float, point: SystemParams) -> tuple:
    f_star = feasibility_boundary(point.Kplus)
    upper = q_max(point)
    baseline = q_min_baseline(point)
    try:
        lower = q_min(point)
    except InfeasibleDoseError:
        logger.warning(f"Row {value:g}: f={point.f:g} infeasible (f_star={f_star:.6g})")
        return (value, point.f, f_star, False, None, upper, baseline, None)
    return (value, point.f, f_star, True, lower, upper, baseline, lower - baseline)


def bounds_table(params: SystemParams, sweep: SweepSpec, f_values: Optional[List[float]] = None) -> Table:
    """Q_min/dt per occupancy factor, Q_max/dt and the gap to the rejection-free bound."""
    rows = []
    if sweep.variable == "f":
        if f_values:
            logger.warning("--f is ignored when sweeping f")
        for value in sweep.values():
            rows.append(_bounds_row(value, with_overrides(params, f=value)))
        return BOUNDS_HEADER, rows
    for value in sweep.values():
        for f in f_values or [params.f]:
            rows.append(_bounds_row(value, with_overrides(params, **{sweep.variable: value, "f": f})))
    return BOUNDS_HEADER, rows


def _emit(args, table: Table) -> int:
    header, rows = table
    with open_output(args.out) as stream:
        count = write_table(stream, header, rows)
    logger.info(f"Wrote {count} rows for '{args.command}'")
    return 0


def cmd_rates(args) -> int:
    params = load_config(args)
    return _emit(args, rates_table(params, parse_sweep(args, ("R", "Q", "mu", "alpha"))))


def cmd_state_rates(args) -> int:
    params = load_config(args)
    nr_values = parse_list(args.nr, int) if args.nr else None
    return _emit(args, state_rates_table(params, parse_sweep(args, ("i",)), nr_values))


def cmd_bounds(args) -> int:
    params = load_config(args)
    f_values = parse_list(args.f, float) if args.f else None
    return _emit(args, bounds_table(params, parse_sweep(args, ("R", "f")), f_values))


def register(subparsers) -> None:
    rates = subparsers.add_parser("rates", help="lambda, gamma, gamma' and the gamma split over a sweep")
    add_config_argument(rates, required=True)
    add_sweep_argument(rates)
    rates.add_argument("--alpha", type=float, default=None, help="override the active-receptor share")
    add_output_argument(rates)
    rates.set_defaults(handler=cmd_rates)

    per_state = subparsers.add_parser("state-rates", help="mu_i and gamma_i over the state index")
    add_config_argument(per_state, required=True)
    add_sweep_argument(per_state)
    per_state.add_argument("--nr", default=None, help="comma separated receptor counts")
    add_output_argument(per_state)
    per_state.set_defaults(handler=cmd_state_rates)

    bounds = subparsers.add_parser("bounds", help="Q_min/dt and Q_max/dt over R or f")
    add_config_argument(bounds, required=True)
    add_sweep_argument(bounds)
    bounds.add_argument("--f", default=None, help="comma separated occupancy factors")
    add_output_argument(bounds)
    bounds.set_defaults(handler=cmd_bounds)
