"""Experiment configuration: a flat TOML file, validated into a frozen dataclass.

Keys (all optional except ``experiment``)::

    experiment     = "blip-differentiator"
    J              = 8
    seed           = 0
    budget         = 64            # rows / terms / stages, per experiment
    output_dir     = "runs/blip"
    schedule       = [[1, 11], [2, 8]]   # (j, nu) pairs
    schedule_file  = "a.sched"           # alternative to schedule
    machine        = "m.rm"              # alternative: halting set of a machine on input p
    precision_sweep = [[1.0, 0.001953125], ...]   # (bound, resolution) pairs
    upper_limits   = [1.0, 2.0]          # richardson-K only
    max_steps      = 2000                # growth-trial only
    agreement_depth = 22                 # growth-trial only (default budget + 2)

Missing sweeps are filled with experiment defaults when the config is
built, so the echoed config always lists the exact grid that was run.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["ConfigInvalid", "ExperimentConfig", "load_config"]


class ConfigInvalid(ValueError):
    pass


_KNOWN_KEYS = {
    "experiment",
    "J",
    "seed",
    "budget",
    "output_dir",
    "schedule",
    "schedule_file",
    "machine",
    "precision_sweep",
    "upper_limits",
    "max_steps",
    "agreement_depth",
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    J: int = 8
    seed: int = 0
    budget: int | None = None
    output_dir: str = "runs"
    schedule: tuple[tuple[int, int], ...] | None = None
    schedule_file: str | None = None
    machine: str | None = None
    precision_sweep: tuple[tuple[float, float], ...] = ()
    upper_limits: tuple[float, ...] = ()
    max_steps: int = 2000
    agreement_depth: int | None = None

    def __post_init__(self):
        if not isinstance(self.experiment, str) or not self.experiment:
            raise ConfigInvalid("experiment must be a non-empty string")
        for name in ("J", "seed", "max_steps"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigInvalid(f"{name} must be an integer")
        if self.J < 1:
            raise ConfigInvalid("J must be >= 1")
        if self.seed < 0:
            raise ConfigInvalid("seed must be >= 0")
        if self.budget is not None and (not isinstance(self.budget, int) or self.budget < 1):
            raise ConfigInvalid("budget must be an integer >= 1")
        if self.max_steps < 1:
            raise ConfigInvalid("max_steps must be >= 1")
        if self.agreement_depth is not None and (not isinstance(self.agreement_depth, int) or self.agreement_depth < 1):
            raise ConfigInvalid("agreement_depth must be an integer >= 1")
        sources = [s for s in (self.schedule, self.schedule_file, self.machine) if s is not None]
        if len(sources) > 1:
            raise ConfigInvalid("give at most one of schedule, schedule_file, machine")
        if self.schedule is not None:
            try:
                pairs = tuple((int(j), int(nu)) for j, nu in self.schedule)
            except (TypeError, ValueError) as exc:
                raise ConfigInvalid(f"schedule must be a list of [j, nu] pairs: {exc}") from None
            object.__setattr__(self, "schedule", pairs)
        try:
            sweep = tuple((float(b), float(e)) for b, e in self.precision_sweep)
            limits = tuple(float(b) for b in self.upper_limits)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed sweep: {exc}") from None
        for bound, eps in sweep:
            if not (math.isfinite(bound) and eps > 0 and bound >= eps):
                raise ConfigInvalid(f"precision pair ({bound}, {eps}) needs bound >= resolution > 0")
        if any(not (math.isfinite(b) and b >= 1) for b in limits):
            raise ConfigInvalid("upper limits must be finite and >= 1")
        object.__setattr__(self, "precision_sweep", sweep)
        object.__setattr__(self, "upper_limits", limits)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "experiment" not in data:
            raise ConfigInvalid("missing key: experiment")
        kwargs = dict(data)
        for key in ("precision_sweep", "upper_limits"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
            elif key in kwargs:
                kwargs[key] = ()
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["schedule"] = None if self.schedule is None else [list(p) for p in self.schedule]
        out["precision_sweep"] = [list(p) for p in self.precision_sweep]
        out["upper_limits"] = list(self.upper_limits)
        return out

    def with_overrides(self, **changes: Any) -> ExperimentConfig:
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from None
    base = path.parent
    # relative file references resolve against the config file
    for key in ("schedule_file", "machine"):
        if key in data and not Path(data[key]).is_absolute():
            data[key] = str(base / data[key])
    return ExperimentConfig.from_dict(data)
