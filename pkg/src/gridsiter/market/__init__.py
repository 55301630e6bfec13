"""Stage 2: SCUC/SCED market-impact simulation and metrics."""

from .metrics import (
    METRIC_NAMES, WINDOW_ALL, WINDOW_OFF, WINDOW_ON, WINDOWS,
    MetricRecord, SummaryRow, compute_metrics, percentile, summarize,
)
from .sced import BINDING_EPS_MU, HourlyMarketLog, ScedInfeasible, run_sced_hour
from .simulate import (
    DemandOverlay, Exclusion, MarketConfig, ScenarioResult, ScucDay,
    ScucInfeasible, insert_load, run_scenario, run_scuc, select_days,
    window_hours,
)
from .uc import (
    FlowCut, UcModel, UnitState, build_uc, commitment_cost,
    commitment_required, cost_segments,
)

__all__ = [
    "BINDING_EPS_MU", "METRIC_NAMES", "WINDOWS", "WINDOW_ALL", "WINDOW_OFF",
    "WINDOW_ON", "DemandOverlay", "Exclusion", "FlowCut", "HourlyMarketLog",
    "MarketConfig", "MetricRecord", "ScedInfeasible", "ScenarioResult",
    "ScucDay", "ScucInfeasible", "SummaryRow", "UcModel", "UnitState",
    "build_uc", "commitment_cost", "commitment_required", "compute_metrics",
    "cost_segments", "insert_load", "percentile", "run_scenario", "run_scuc",
    "run_sced_hour", "select_days", "summarize", "window_hours",
]
