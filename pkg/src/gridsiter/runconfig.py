"""Run configuration: TOML parsing, validation, canonical form for hashing."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:         # Python 3.10
    import tomli as tomllib

from .envelopes import (
    DEFAULT_PEAK_WINDOW, EnvelopeSpec, default_menu, menu_from_json,
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    case_path: str
    output_dir: str = "gridsiter_out"
    sizes_mw: tuple[float, ...] = (200.0,)
    tau_pr: float = 0.95
    eps_mu: float = 1e-4
    voltage_band: tuple[float, float] = (24.0, 500.0)
    top_k: int = 20
    hour_sampling: str = "every4+peak"
    days: int = 2
    reserve_fraction: float = 0.03
    peak_window: tuple[int, ...] = DEFAULT_PEAK_WINDOW
    utilization: float = 0.8
    alpha_pause: float = 0.15
    alpha_shift: float = 0.20
    beta_shift: float = 1.0
    ramp_fraction: float = 0.2          # envelope ramp bound as share of nameplate
    menu_path: str | None = None
    jobs: int = 1
    strict_entropy: bool = False
    pooled_scores: bool = False
    seed: int = 0               # recorded for audit; the pipeline is deterministic
    dump_lp_dir: str | None = None

    def __post_init__(self):
        self.sizes_mw = tuple(float(s) for s in self.sizes_mw)
        self.voltage_band = (float(self.voltage_band[0]),
                             float(self.voltage_band[1]))
        self.peak_window = tuple(int(h) for h in self.peak_window)
        problems = []
        if not Path(self.case_path).exists():
            problems.append(f"case file {self.case_path!r} does not exist")
        if self.menu_path is not None and not Path(self.menu_path).exists():
            problems.append(f"menu file {self.menu_path!r} does not exist")
        if not self.sizes_mw or any(s <= 0 for s in self.sizes_mw):
            problems.append("sizes_mw must be positive")
        if self.tau_pr < 0:
            problems.append("tau_pr must be >= 0")
        if self.eps_mu < 0:
            problems.append("eps_mu must be >= 0")
        if self.voltage_band[0] >= self.voltage_band[1]:
            problems.append("voltage_band must satisfy vmin < vmax")
        if self.top_k < 1:
            problems.append("top_k must be >= 1")
        if self.days < 1:
            problems.append("days must be >= 1")
        if not 0 <= self.reserve_fraction < 1:
            problems.append("reserve_fraction must lie in [0, 1)")
        if not self.peak_window or any(not 1 <= h <= 24 for h in self.peak_window):
            problems.append("peak_window hours must lie in 1..24")
        if not 0 < self.utilization <= 1:
            problems.append("utilization must lie in (0, 1]")
        for name in ("alpha_pause", "alpha_shift"):
            if not 0 <= getattr(self, name) < 1:
                problems.append(f"{name} must lie in [0, 1)")
        if not 0 <= self.beta_shift <= 1:
            problems.append("beta_shift must lie in [0, 1]")
        if self.ramp_fraction <= 0:
            problems.append("ramp_fraction must be positive")
        if self.jobs < 1:
            problems.append("jobs must be >= 1")
        if problems:
            raise ConfigError("invalid run config:\n  " + "\n  ".join(problems))

    def canonical(self) -> dict:
        """JSON-stable dict for hashing and the manifest."""
        doc = asdict(self)
        doc["sizes_mw"] = list(self.sizes_mw)
        doc["voltage_band"] = list(self.voltage_band)
        doc["peak_window"] = list(self.peak_window)
        return {k: doc[k] for k in sorted(doc)}

    def menu_for_size(self, size_mw: float,
                      multi_size: bool | None = None) -> list[EnvelopeSpec]:
        """Envelope instances at one nameplate size.

        When several sizes run together, instance names carry the size so
        each (size, envelope) ranks in its own universe.
        """
        if self.menu_path is not None:
            doc = json.loads(Path(self.menu_path).read_text())
            specs = menu_from_json(doc, nameplate_mw=size_mw)
        else:
            from dataclasses import replace
            gamma = self.ramp_fraction * size_mw
            specs = [
                EnvelopeSpec(kind="firm", nameplate_mw=size_mw,
                             utilization=self.utilization,
                             peak_window=self.peak_window, ramp_bound=gamma),
                EnvelopeSpec(kind="pause", nameplate_mw=size_mw,
                             utilization=self.utilization,
                             peak_window=self.peak_window,
                             curtailment=self.alpha_pause, ramp_bound=gamma),
                EnvelopeSpec(kind="shift", nameplate_mw=size_mw,
                             utilization=self.utilization,
                             peak_window=self.peak_window,
                             curtailment=self.alpha_shift,
                             makeup=self.beta_shift, ramp_bound=gamma),
            ]
        multi = len(self.sizes_mw) > 1 if multi_size is None else multi_size
        if multi:
            from dataclasses import replace
            specs = [replace(s, name=f"{s.name}_{size_mw:g}mw") for s in specs]
        return specs


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    if "case_path" not in doc:
        raise ConfigError(f"{path}: missing required key 'case_path'")
    # paths in the config are relative to the config file's directory
    for key in ("case_path", "menu_path", "output_dir", "dump_lp_dir"):
        if key in doc and doc[key] is not None and not Path(doc[key]).is_absolute():
            doc[key] = str((path.parent / doc[key]).resolve())
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
