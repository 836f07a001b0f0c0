"""Argument helpers shared by the subcommand groups."""
import os
from typing import Callable, List, Optional

from reception.params import SystemParams, load_params_file, with_overrides
from schemas import SweepSpec
from utils.errors import UsageError


def parse_list(text: str, convert: Callable = float) -> List:
    try:
        values = [convert(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid list '{text}': {exc}") from exc
    if not values:
        raise UsageError(f"empty list '{text}'")
    return values


def add_output_argument(parser) -> None:
    parser.add_argument("--out", default=None, help="output CSV path (default stdout)")


def add_config_argument(parser, required: bool) -> None:
    parser.add_argument("--config", required=required, help="JSON system configuration")


def add_sweep_argument(parser, required: bool = True) -> None:
    parser.add_argument(
        "--sweep",
        required=required,
        help="var=start:stop:steps[:log] with var one of R, Q, mu, i, f, alpha",
    )


def load_config(args) -> SystemParams:
    params = load_params_file(args.config)
    alpha = getattr(args, "alpha", None)
    if alpha is not None:
        params = with_overrides(params, alpha=alpha)
    return params


def parse_sweep(args, allowed: tuple) -> SweepSpec:
    sweep = SweepSpec.parse(args.sweep)
    if sweep.variable not in allowed:
        raise UsageError(f"'{args.command}' cannot sweep '{sweep.variable}'; choose one of {', '.join(allowed)}")
    return sweep


def resolve_seed(seed: Optional[int]) -> int:
    """Explicit flag first, then RECEPTION_SEED, then 0."""
    if seed is not None:
        return seed
    try:
        return int(os.getenv("RECEPTION_SEED", "0"))
    except ValueError as exc:
        raise UsageError(f"RECEPTION_SEED is not an integer: {exc}") from exc
