"""Run configuration: JSON specs for streams, suites and engine runs.

Stream spec (a JSON object); rationals are "p/q" strings:

  {"kind": "constant_target", "limit": "1/2", "rate": "1/2"}
  {"kind": "tracker", "lag": 1, "start": "1/8"}          (engines only)
  {"kind": "omega", "machine": "pair", "max_length": 8,
   "offset": "1/4", "scale": "1/2",
   "plus": {"limit": "1/8", "rate": "1/2"}}   (optional, increasing only)

The direction is implied by where the spec is used: alpha and eta are
increasing; a suite entry with role "L" is increasing, role "R" decreasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .rationals import Rational, parse_rational
from .streams import (
    AdversarySuite,
    ApproxStream,
    Direction,
    EngineView,
    SuiteEntry,
    make_constant_target,
    make_tracker,
)
from .omega import bundled_machines, omega_stream, parse_machine, translate_omega

DEFAULT_HARD_CAP = 10_000

ENGINES = ("lemma2", "prop3")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    engine: str
    stages: int
    suite_specs: list[dict]
    alpha_spec: Optional[dict] = None
    eta_spec: Optional[dict] = None
    hard_cap: int = DEFAULT_HARD_CAP

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if not (1 <= self.stages <= self.hard_cap):
            raise ConfigError(
                f"stage budget {self.stages} outside 1..{self.hard_cap}"
            )
        if self.engine == "lemma2":
            if self.alpha_spec is None or self.eta_spec is None:
                raise ConfigError("engine lemma2 needs 'alpha' and 'eta' stream specs")


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    try:
        return RunConfig(
            engine=raw["engine"],
            stages=int(raw["stages"]),
            suite_specs=list(raw.get("suite", [])),
            alpha_spec=raw.get("alpha"),
            eta_spec=raw.get("eta"),
            hard_cap=int(raw.get("hard_cap", DEFAULT_HARD_CAP)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad config: {e}") from None


def _rational_field(spec: dict, key: str, default: Optional[str] = None) -> Rational:
    value = spec.get(key, default)
    if value is None:
        raise ConfigError(f"stream spec {spec} missing field {key!r}")
    try:
        return parse_rational(str(value))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"bad rational {value!r} for {key}: {e}") from None


def _load_machine(spec: dict):
    name = spec.get("machine", "pair")
    bundled = bundled_machines()
    if name in bundled:
        return bundled[name]
    path = Path(name)
    if path.exists():
        try:
            return parse_machine(path.read_text())
        except ValueError as e:
            raise ConfigError(f"bad machine file {name}: {e}") from None
    raise ConfigError(f"unknown machine {name!r} (not bundled, not a file)")


def build_stream(
    spec: dict,
    direction: Direction,
    view: Optional[EngineView] = None,
    label: str = "",
) -> ApproxStream:
    kind = spec.get("kind")
    if kind == "constant_target":
        try:
            return make_constant_target(
                _rational_field(spec, "limit"),
                direction,
                _rational_field(spec, "rate"),
                label=label,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if kind == "tracker":
        if view is None:
            raise ConfigError("tracker streams are only valid inside an engine run")
        try:
            return make_tracker(
                view,
                direction,
                int(spec.get("lag", 0)),
                _rational_field(spec, "start"),
                label=label,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if kind == "omega":
        machine = _load_machine(spec)
        if direction is Direction.INCREASING:
            offset = _rational_field(spec, "offset", "1/4")
            scale = _rational_field(spec, "scale", "1/2")
        else:
            offset = _rational_field(spec, "offset", "3/4")
            scale = _rational_field(spec, "scale", "-1/2")
        try:
            stream = omega_stream(
                machine, int(spec.get("max_length", 8)), offset, scale, label=label
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if stream.direction is not direction:
            raise ConfigError(
                f"omega spec {spec} has scale of the wrong sign for a "
                f"{direction.value} stream"
            )
        plus = spec.get("plus")
        if plus is not None:
            if direction is not Direction.INCREASING:
                raise ConfigError("omega 'plus' only applies to increasing streams")
            extra = make_constant_target(
                _rational_field(plus, "limit"),
                Direction.INCREASING,
                _rational_field(plus, "rate", "1/2"),
            )
            try:
                stream = translate_omega(stream, extra, label=label)
            except ValueError as e:
                raise ConfigError(str(e)) from None
        return stream
    raise ConfigError(f"unknown stream kind {kind!r}")


def build_suite(specs: list[dict], view: EngineView) -> AdversarySuite:
    entries = []
    for n, spec in enumerate(specs):
        role = spec.get("role")
        if role not in ("L", "R"):
            raise ConfigError(f"suite entry {n}: role must be 'L' or 'R'")
        index = spec.get("index")
        if not isinstance(index, int) or index < 0:
            raise ConfigError(f"suite entry {n}: bad index {index!r}")
        direction = Direction.INCREASING if role == "L" else Direction.DECREASING
        stream = build_stream(spec, direction, view, label=f"suite[{index}/{role}]")
        try:
            entries.append(SuiteEntry(index, role, stream,
                                      provenance=spec.get("kind", "")))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    try:
        return AdversarySuite(entries)
    except ValueError as e:
        raise ConfigError(str(e)) from None
