"""Run configuration shared by all CLI commands.

A config is a flat JSON object.  Unknown keys are rejected so that a typo in
an archived sweep config fails loudly instead of silently using a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, asdict, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .fock import FockBasis
from .protocol import LossBudget, ProtocolParams, fair_y, no_abort_z
from .solver import LinkModel, distance_grid, link_budget

FORMATS = ("table", "csv", "json")

DEFAULT_X = 1.0 - 1.0 / math.sqrt(2.0)
DEFAULT_SOLVER_Z = 0.57
DEFAULT_DETECTOR_EFF = 0.95


@dataclass(frozen=True)
class RunConfig:
    # protocol; y and z are derived from x when omitted
    x: float = DEFAULT_X
    y: float | None = None
    z: float | None = None
    # explicit loss budget
    eta_t: float = 1.0
    eta_f_a: float = 1.0
    eta_f_b: float = 1.0
    eta_d_a: float = 1.0
    eta_d_b: float = 1.0
    p_dc: float = 0.0
    # both detector efficiencies at once (overrides eta_d_a / eta_d_b)
    detector_eff: float | None = None
    # link model; when distance_km is set it replaces eta_t and eta_f_*
    distance_km: float | None = None
    attenuation_db_per_km: float = 0.2
    switch_time_ns: float = 500.0
    group_velocity_km_per_s: float = 2.0e5
    # sweep grid; explicit distances win over the range
    distances: tuple[float, ...] | None = None
    d_min: float = 0.0
    d_max: float = 2.0
    d_step: float = 0.05
    truncation: int | None = None
    oracle: bool = False
    # None picks the command's default: csv for sweep, table otherwise
    format: str | None = None
    out: str | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name in ("format", "out", "distances"):
                continue
            want = bool if f.name == "oracle" else int if f.name == "truncation" else float
            ok = isinstance(v, want) if want is bool else (
                isinstance(v, (int, float)) and not isinstance(v, bool)
                and (want is float or isinstance(v, int))
            )
            if not ok:
                raise ConfigError(f"{f.name} must be {want.__name__}, got {v!r}")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.truncation is not None and self.truncation < 1:
            raise ConfigError("truncation must be >= 1")
        if self.distances is not None:
            object.__setattr__(self, "distances", tuple(float(d) for d in self.distances))
        if self.d_step <= 0:
            raise ConfigError("d_step must be positive")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if d["distances"] is not None:
            d["distances"] = list(d["distances"])
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_overrides(self, **overrides: Any) -> RunConfig:
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # -- derived objects ---------------------------------------------------

    def protocol_params(self) -> ProtocolParams:
        try:
            y = fair_y(self.x) if self.y is None else self.y
            z = no_abort_z(self.x, y) if self.z is None else self.z
            return ProtocolParams(self.x, y, z)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def link_model(self, distance_km: float | None = None) -> LinkModel:
        return LinkModel(
            distance_km=self.distance_km if distance_km is None else distance_km,
            attenuation_db_per_km=self.attenuation_db_per_km,
            switch_time_ns=self.switch_time_ns,
            group_velocity_km_per_s=self.group_velocity_km_per_s,
        )

    def loss_budget(self) -> LossBudget:
        eta_d_a = self.eta_d_a if self.detector_eff is None else self.detector_eff
        eta_d_b = self.eta_d_b if self.detector_eff is None else self.detector_eff
        try:
            if self.distance_km is not None:
                return replace(link_budget(self.link_model(), eta_d_a, eta_d_b), p_dc=self.p_dc)
            return LossBudget(
                eta_t=self.eta_t,
                eta_f_a=self.eta_f_a,
                eta_f_b=self.eta_f_b,
                eta_d_a=eta_d_a,
                eta_d_b=eta_d_b,
                p_dc=self.p_dc,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def output_format(self, default: str = "table") -> str:
        return default if self.format is None else self.format

    def solver_z(self) -> float:
        return DEFAULT_SOLVER_Z if self.z is None else self.z

    def sweep_detector_eff(self) -> float:
        return DEFAULT_DETECTOR_EFF if self.detector_eff is None else self.detector_eff

    def sweep_distances(self) -> list[float]:
        if self.distances is not None:
            return list(self.distances)
        return distance_grid(self.d_min, self.d_max, self.d_step)

    def honest_basis(self) -> FockBasis:
        return FockBasis(3, self.truncation or 1)
