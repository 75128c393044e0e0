"""Certificate records and their canonical JSON form.

Every numeric output is tagged with how it was obtained:

* ``rational``: exact, serialised as ``"p/q"``;
* ``interval``: a certified enclosure, endpoints written as decimal strings
  rounded outward (floor for ``lo``, ceiling for ``hi``) at 17 significant digits;
* ``float-diagnostic``: an ordinary float that carries no guarantee;
* ``data``: integers, booleans, strings and nested lists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .certnum import Interval, format_rational

STATUSES = ("certified", "failed", "incomplete", "diagnostic")
EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

_FLOOR = Context(prec=17, rounding=ROUND_FLOOR)
_CEIL = Context(prec=17, rounding=ROUND_CEILING)


def _decimal(x: float, ctx: Context) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(ctx.create_decimal(Decimal(x)))


def rational(x) -> dict:
    return {"kind": "rational", "value": format_rational(Fraction(x))}


def interval(iv: Interval) -> dict:
    return {"kind": "interval", "lo": _decimal(iv.lo, _FLOOR), "hi": _decimal(iv.hi, _CEIL)}


def lower(x: float) -> dict:
    """A certified lower bound given as a single float."""
    return {"kind": "interval", "lo": _decimal(x, _FLOOR), "hi": "inf"}


def upper(x: float) -> dict:
    return {"kind": "interval", "lo": "-inf", "hi": _decimal(x, _CEIL)}


def diagnostic(x: float) -> dict:
    return {"kind": "float-diagnostic", "value": repr(float(x))}


def data(x: Any) -> dict:
    return {"kind": "data", "value": _plain(x)}


def _plain(x: Any) -> Any:
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Mapping):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, float):
        return repr(x)
    return x


@dataclass
class Certificate:
    claim_id: str
    inputs: dict
    outputs: dict
    status: str
    tool_version: str
    seed: int | None = None
    wall_time_ms: int = 0
    extra: dict = field(default_factory=dict)  # top-level fields required by a subcommand's schema

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        for name, value in self.outputs.items():
            if not (isinstance(value, dict) and "kind" in value):
                raise ValueError(f"output {name!r} carries no representation kind")

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.status in ("certified", "diagnostic") else EXIT_FAILED

    def to_dict(self, *, timing: bool = False) -> dict:
        d = {
            "claim_id": self.claim_id,
            "inputs": _plain(self.inputs),
            "outputs": self.outputs,
            "status": self.status,
            "tool_version": self.tool_version,
            "seed": self.seed,
        }
        d.update(self.extra)
        if timing:
            d["wall_time_ms"] = self.wall_time_ms
        return d

    def to_json(self, *, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing=timing), sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n"

    def write(self, path: str | Path, *, timing: bool = False) -> None:
        Path(path).write_text(self.to_json(timing=timing), encoding="utf-8")
