"""Standardized flexibility envelopes: firm, pause, shift.

An envelope is a contractible 24-hour load obligation; construction fails
hard on ramp violations rather than silently reshaping what would be
certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import HOURS_PER_DAY

FIRM = "firm"
PAUSE = "pause"
SHIFT = "shift"
KINDS = (FIRM, PAUSE, SHIFT)

DEFAULT_PEAK_WINDOW = (16, 17, 18, 19)


class EnvelopeError(ValueError):
    pass


class RampViolation(EnvelopeError):
    def __init__(self, hour: int, step: float, bound: float):
        self.hour = hour
        self.step = step
        self.bound = bound
        super().__init__(
            f"ramp violation between hours {hour - 1} and {hour}: "
            f"step {step:g} MW/h exceeds bound {bound:g} MW/h")


@dataclass(frozen=True)
class EnvelopeSpec:
    """Parameterization of one envelope kind for a given nameplate size.

    utilization: fraction of nameplate drawn in non-curtailed hours.
    curtailment: peak-hour depth (pause/shift); makeup: off-peak make-up
    fraction (shift only; 1 restores the full daily energy).
    ramp_bound: max hour-to-hour step, MW/h.
    """

    kind: str
    nameplate_mw: float
    utilization: float = 0.8
    peak_window: tuple[int, ...] = DEFAULT_PEAK_WINDOW
    curtailment: float = 0.0
    makeup: float = 1.0
    ramp_bound: float | None = None   # None -> 20% of nameplate
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise EnvelopeError(f"unknown envelope kind {self.kind!r}")
        if not 0 < self.utilization <= 1:
            raise EnvelopeError("utilization must lie in (0, 1]")
        if not 0 <= self.curtailment < 1:
            raise EnvelopeError("curtailment must lie in [0, 1)")
        if not 0 <= self.makeup <= 1:
            raise EnvelopeError("makeup must lie in [0, 1]")
        if self.nameplate_mw <= 0:
            raise EnvelopeError("nameplate must be positive")
        window = tuple(sorted(set(int(h) for h in self.peak_window)))
        object.__setattr__(self, "peak_window", window)
        if any(h < 1 or h > HOURS_PER_DAY for h in window):
            raise EnvelopeError("peak window hours must lie in 1..24")
        if self.kind == SHIFT:
            if not window:
                raise EnvelopeError("shift requires a nonempty peak window")
            if len(window) == HOURS_PER_DAY:
                raise EnvelopeError("shift peak window cannot cover all 24 hours")
        if self.ramp_bound is not None and self.ramp_bound < 0:
            raise EnvelopeError("ramp bound must be >= 0")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    @property
    def gamma(self) -> float:
        """Effective ramp bound (default 20% of nameplate)."""
        if self.ramp_bound is None:
            return 0.2 * self.nameplate_mw
        return self.ramp_bound


@dataclass(frozen=True)
class LoadTrajectory:
    """24 hourly MW values satisfying the spec's ramp bound."""

    values: np.ndarray
    spec: EnvelopeSpec = field(repr=False, default=None)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != (HOURS_PER_DAY,):
            raise EnvelopeError(f"trajectory needs {HOURS_PER_DAY} hourly values")
        if np.any(arr < 0):
            raise EnvelopeError("trajectory values must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def at_hour(self, t: int, horizon: int = 8760) -> float:
        return float(self.values[map_hour(t, horizon) - 1])

    def scaled(self, factor: float) -> "LoadTrajectory":
        return LoadTrajectory(values=self.values * factor, spec=self.spec)


def map_hour(t: int, horizon: int = 8760) -> int:
    """Year-hour t (1-based) -> within-day hour in 1..24."""
    if not 1 <= t <= horizon:
        raise ValueError(f"hour {t} outside 1..{horizon}")
    return 1 + (t - 1) % HOURS_PER_DAY


def build_envelope(spec: EnvelopeSpec) -> LoadTrajectory:
    """Hourly trajectory for the envelope; raises RampViolation if infeasible."""
    base = spec.utilization * spec.nameplate_mw
    values = np.full(HOURS_PER_DAY, base)
    peak = np.array([h - 1 for h in spec.peak_window], dtype=int)
    if spec.kind == PAUSE and peak.size:
        values[peak] = (1.0 - spec.curtailment) * base
    elif spec.kind == SHIFT:
        values[peak] = (1.0 - spec.curtailment) * base
        off = np.setdiff1d(np.arange(HOURS_PER_DAY), peak)
        makeup = (spec.makeup * spec.curtailment * base * peak.size
                  / (HOURS_PER_DAY - peak.size))
        values[off] = base + makeup

    ok, step, hour = _worst_step(values)
    if step > spec.gamma + 1e-9:
        raise RampViolation(hour, step, spec.gamma)
    return LoadTrajectory(values=values, spec=spec)


def _worst_step(values: np.ndarray) -> tuple[bool, float, int]:
    steps = np.abs(np.diff(values))
    if steps.size == 0:
        return True, 0.0, 2
    k = int(np.argmax(steps))
    return True, float(steps[k]), k + 2    # step k is between hours k+1 and k+2


def check_ramp(traj: LoadTrajectory, gamma: float) -> tuple[bool, float, int]:
    """(passes, worst step MW/h, hour of worst step).

    Consecutive steps only (hours 2..24); the wrap-around from hour 24 back
    to hour 1 of the next day is intentionally not checked.
    """
    _, step, hour = _worst_step(np.asarray(traj.values))
    return step <= gamma + 1e-12, step, hour


def default_menu(nameplate_mw: float) -> list[EnvelopeSpec]:
    """The study's three standard envelopes at one nameplate size."""
    return [
        EnvelopeSpec(kind=FIRM, nameplate_mw=nameplate_mw),
        EnvelopeSpec(kind=PAUSE, nameplate_mw=nameplate_mw, curtailment=0.15),
        EnvelopeSpec(kind=SHIFT, nameplate_mw=nameplate_mw, curtailment=0.20,
                     makeup=1.0),
    ]


def menu_from_json(doc: list[dict], nameplate_mw: float | None = None) -> list[EnvelopeSpec]:
    """Envelope menu from a JSON array of spec records."""
    specs = []
    allowed = {"kind", "nameplate_mw", "utilization", "peak_window",
               "curtailment", "makeup", "ramp_bound", "name"}
    for k, rec in enumerate(doc):
        unknown = sorted(set(rec) - allowed)
        if unknown:
            raise EnvelopeError(f"menu[{k}]: unknown keys {unknown}")
        kwargs = dict(rec)
        if "peak_window" in kwargs:
            kwargs["peak_window"] = tuple(kwargs["peak_window"])
        if nameplate_mw is not None:
            kwargs.setdefault("nameplate_mw", nameplate_mw)
        specs.append(EnvelopeSpec(**kwargs))
    return specs
