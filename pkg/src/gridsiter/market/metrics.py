"""Scenario market metrics over time windows, and median[IQR] summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sced import HourlyMarketLog

WINDOW_ALL = "all"
WINDOW_ON = "on_peak"
WINDOW_OFF = "off_peak"
WINDOWS = (WINDOW_ALL, WINDOW_ON, WINDOW_OFF)

METRIC_NAMES = ("mean_lmp", "p95_p5", "lmp_std", "binding_hours",
                "congestion_rent")


@dataclass(frozen=True)
class MetricRecord:
    bus: int
    envelope: str
    window: str
    mean_lmp: float          # $/MWh, time mean of cross-bus means
    p95_p5: float            # $/MWh, time mean of cross-bus P95-P5 spread
    lmp_std: float           # $/MWh, sample std of hourly cross-bus means
    binding_hours: int
    congestion_rent: float   # $M/day

    def value(self, metric: str) -> float:
        return float(getattr(self, metric))


@dataclass(frozen=True)
class SummaryRow:
    envelope: str
    window: str
    metric: str
    median: float
    iqr: float               # P75 - P25, linear interpolation
    n: int


def percentile(values, q: float) -> float:
    """Linear interpolation between order statistics at rank q(n-1)+1."""
    return float(np.percentile(np.asarray(values, dtype=float), q,
                               method="linear"))


def compute_metrics(logs: list[HourlyMarketLog], window_hours: set[int],
                    fmax: np.ndarray, bus: int, envelope: str,
                    window: str) -> MetricRecord:
    """The five absolute metrics over one window of the logged hours."""
    sel = [lg for lg in logs if lg.t in window_hours]
    if len(sel) < 2:
        raise ValueError(
            f"window {window!r} has {len(sel)} hours; the LMP standard "
            "deviation needs at least 2")
    bus_means = np.array([lg.lmp.mean() for lg in sel])
    spread = np.array([percentile(lg.lmp, 95) - percentile(lg.lmp, 5)
                       for lg in sel])
    rent_dollars = sum(float((lg.mu_plus + lg.mu_minus) @ fmax) for lg in sel)
    n_binding = sum(1 for lg in sel if lg.binding)
    return MetricRecord(
        bus=bus,
        envelope=envelope,
        window=window,
        mean_lmp=float(bus_means.mean()),
        p95_p5=float(spread.mean()),
        lmp_std=float(bus_means.std(ddof=1)),
        binding_hours=int(n_binding),
        congestion_rent=(24.0 / len(sel)) * rent_dollars / 1e6,
    )


def summarize(records: list[MetricRecord], envelope: str) -> list[SummaryRow]:
    """Median [IQR] across qualified buses, one row per (window, metric)."""
    rows: list[SummaryRow] = []
    for window in WINDOWS:
        vals = [r for r in records if r.envelope == envelope and r.window == window]
        for metric in METRIC_NAMES:
            if not vals:
                rows.append(SummaryRow(envelope, window, metric,
                                       float("nan"), float("nan"), 0))
                continue
            data = [v.value(metric) for v in vals]
            rows.append(SummaryRow(
                envelope=envelope,
                window=window,
                metric=metric,
                median=percentile(data, 50),
                iqr=percentile(data, 75) - percentile(data, 25),
                n=len(vals),
            ))
    return rows
