"""Grid case data model: buses, branches, generators, chronological series."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

HOURS_PER_DAY = 24


class CaseValidationError(ValueError):
    """Raised with the full list of violated case invariants."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid case:\n  " + "\n  ".join(self.problems))


class ContingencyError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    base_kv: float
    zone: str = ""
    coord: tuple[float, float] | None = None    # (longitude, latitude), degrees
    load_profile_ref: str | None = None


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    susceptance: float      # per-unit 1/x
    flow_limit: float       # MW
    status: str = "in"      # "in" | "out"

    @property
    def in_service(self) -> bool:
        return self.status == "in"


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    pmin: float
    pmax: float
    ramp_up: float          # MW/h
    ramp_down: float        # MW/h
    min_up: int = 1         # hours
    min_down: int = 1
    cost_quad: tuple[float, float, float] = (0.0, 0.0, 0.0)   # (c2, c1, c0)
    no_load_cost: float = 0.0
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    renewable_profile_ref: str | None = None    # hourly MW cap on pmax

    def marginal_cost(self, p: float) -> float:
        c2, c1, _ = self.cost_quad
        return 2.0 * c2 * p + c1

    def production_cost(self, p: float) -> float:
        c2, c1, c0 = self.cost_quad
        return c2 * p * p + c1 * p + c0


@dataclass(frozen=True)
class GridCase:
    base_mva: float
    slack_bus: int
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    series: dict[str, np.ndarray] = field(default_factory=dict)

    # -- index helpers ---------------------------------------------------

    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    def bus_index(self) -> dict[int, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(f"no bus {bus_id}")

    def branch(self, branch_id: int) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise KeyError(f"no branch {branch_id}")

    def generator(self, gen_id: int) -> Generator:
        for g in self.generators:
            if g.id == gen_id:
                return g
        raise KeyError(f"no generator {gen_id}")

    def in_service_branches(self) -> list[Branch]:
        return [br for br in self.branches if br.in_service]

    @property
    def horizon(self) -> int:
        """Hours covered by the chronological series (24 when none exist)."""
        for arr in self.series.values():
            return len(arr)
        return HOURS_PER_DAY

    @property
    def n_days(self) -> int:
        return self.horizon // HOURS_PER_DAY

    # -- hourly data -----------------------------------------------------

    def demand_matrix(self) -> np.ndarray:
        """(horizon, n_buses) MW demand from the referenced load series."""
        out = np.zeros((self.horizon, len(self.buses)))
        for k, b in enumerate(self.buses):
            if b.load_profile_ref is not None:
                out[:, k] = self.series[b.load_profile_ref]
        return out

    def pmax_matrix(self) -> np.ndarray:
        """(horizon, n_gens) effective hourly pmax, renewable caps applied."""
        out = np.empty((self.horizon, len(self.generators)))
        for k, g in enumerate(self.generators):
            if g.renewable_profile_ref is not None:
                out[:, k] = np.minimum(g.pmax, self.series[g.renewable_profile_ref])
            else:
                out[:, k] = g.pmax
        return out


def validate_case(case: GridCase) -> None:
    """Check every invariant; raises CaseValidationError listing all failures."""
    problems: list[str] = []
    if case.base_mva <= 0:
        problems.append(f"base_mva must be positive, got {case.base_mva}")

    seen_bus: set[int] = set()
    for b in case.buses:
        if b.id in seen_bus:
            problems.append(f"duplicate bus id {b.id}")
        seen_bus.add(b.id)
        if b.base_kv <= 0:
            problems.append(f"bus {b.id}: base_kv must be positive")
        if b.load_profile_ref is not None and b.load_profile_ref not in case.series:
            problems.append(f"bus {b.id}: unknown load series {b.load_profile_ref!r}")

    if case.slack_bus not in seen_bus:
        problems.append(f"slack bus {case.slack_bus} does not exist")

    seen_br: set[int] = set()
    for br in case.branches:
        if br.id in seen_br:
            problems.append(f"duplicate branch id {br.id}")
        seen_br.add(br.id)
        if br.from_bus == br.to_bus:
            problems.append(f"branch {br.id}: from_bus equals to_bus")
        for end in (br.from_bus, br.to_bus):
            if end not in seen_bus:
                problems.append(f"branch {br.id}: unknown bus {end}")
        if br.flow_limit <= 0:
            problems.append(f"branch {br.id}: flow_limit must be positive")
        if br.susceptance == 0:
            problems.append(f"branch {br.id}: susceptance must be nonzero")
        if br.status not in ("in", "out"):
            problems.append(f"branch {br.id}: status must be 'in' or 'out'")

    seen_g: set[int] = set()
    for g in case.generators:
        if g.id in seen_g:
            problems.append(f"duplicate generator id {g.id}")
        seen_g.add(g.id)
        if g.bus not in seen_bus:
            problems.append(f"generator {g.id}: unknown bus {g.bus}")
        if not 0 <= g.pmin <= g.pmax:
            problems.append(f"generator {g.id}: need 0 <= pmin <= pmax")
        if g.ramp_up < 0 or g.ramp_down < 0:
            problems.append(f"generator {g.id}: ramp rates must be >= 0")
        if g.min_up < 1 or g.min_down < 1:
            problems.append(f"generator {g.id}: min up/down times must be >= 1 h")
        if g.cost_quad[0] < 0:
            problems.append(f"generator {g.id}: quadratic cost term must be >= 0")
        if g.renewable_profile_ref is not None:
            if g.renewable_profile_ref not in case.series:
                problems.append(
                    f"generator {g.id}: unknown renewable series "
                    f"{g.renewable_profile_ref!r}")
            if g.pmin > 0:
                problems.append(
                    f"generator {g.id}: renewable units must have pmin = 0")
            if g.cost_quad[0] != 0:
                problems.append(
                    f"generator {g.id}: renewable units need a linear cost "
                    "(hourly caps apply to a single dispatch segment)")

    length = None
    for name, arr in case.series.items():
        if length is None:
            length = len(arr)
        elif len(arr) != length:
            problems.append(
                f"series {name!r}: length {len(arr)} differs from {length}")
        if len(arr) % HOURS_PER_DAY != 0 or len(arr) == 0:
            problems.append(f"series {name!r}: length must be a positive "
                            f"multiple of {HOURS_PER_DAY}")
        if not np.all(np.isfinite(arr)):
            problems.append(f"series {name!r}: values must be finite")
        elif np.any(np.asarray(arr) < 0):
            problems.append(f"series {name!r}: values must be non-negative")

    if case.buses and not _connected(case):
        problems.append("graph not connected (islanded buses present)")

    if problems:
        raise CaseValidationError(problems)


def _connected(case: GridCase) -> bool:
    adj: dict[int, set[int]] = {b.id: set() for b in case.buses}
    for br in case.in_service_branches():
        if br.from_bus in adj and br.to_bus in adj:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
    start = case.buses[0].id
    seen = {start}
    stack = [start]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(case.buses)


def freeze_series(series: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    for name, values in series.items():
        arr = np.asarray(values, dtype=float)
        arr.flags.writeable = False
        out[name] = arr
    return out


@dataclass(frozen=True)
class Contingency:
    """Single-element outage: kind 'branch' or 'generator'."""

    kind: str
    element: int

    def __post_init__(self):
        if self.kind not in ("branch", "generator"):
            raise ValueError(f"unknown contingency kind {self.kind!r}")

    def label(self) -> str:
        return f"{self.kind}:{self.element}"


def apply_contingency(case: GridCase, cont: Contingency,
                      island_formers: set[int] | None = None) -> GridCase:
    """Read-only case view with one element out of service.

    Branch outages on island-forming branches are rejected; pass the
    precomputed bridge set to skip recomputing it per call.
    """
    from .network import island_forming_branches  # local import breaks the cycle

    if cont.kind == "branch":
        br = case.branch(cont.element)
        if not br.in_service:
            raise ContingencyError(f"branch {br.id} is already out of service")
        formers = (island_formers if island_formers is not None
                   else island_forming_branches(case))
        if br.id in formers:
            raise ContingencyError(
                f"branch {br.id} is island-forming; outage would split the grid")
        branches = tuple(replace(b, status="out") if b.id == br.id else b
                         for b in case.branches)
        return replace(case, branches=branches)

    gen = case.generator(cont.element)
    gens = tuple(replace(g, pmin=0.0, pmax=0.0, renewable_profile_ref=None)
                 if g.id == gen.id else g for g in case.generators)
    return replace(case, generators=gens)
