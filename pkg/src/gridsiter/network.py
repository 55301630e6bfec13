"""DC network matrices (B, PTDF) and connectivity analysis."""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .model import GridCase


class IslandedNetworkError(ValueError):
    pass


def build_b_matrix(case: GridCase) -> np.ndarray:
    """Bus susceptance matrix over all buses (in-service branches only).

    Entries are per-unit branch susceptances; row sums are zero before slack
    reduction.  Raises if the slack-reduced matrix is singular.
    """
    idx = case.bus_index()
    n = len(case.buses)
    B = np.zeros((n, n))
    for br in case.in_service_branches():
        i, j = idx[br.from_bus], idx[br.to_bus]
        b = abs(br.susceptance)
        B[i, i] += b
        B[j, j] += b
        B[i, j] -= b
        B[j, i] -= b
    _reduced_inverse(B, idx[case.slack_bus])  # singularity check
    return B


def _reduced_inverse(B: np.ndarray, slack_pos: int) -> np.ndarray:
    keep = [k for k in range(B.shape[0]) if k != slack_pos]
    Bred = B[np.ix_(keep, keep)]
    try:
        inv = np.linalg.inv(Bred)
    except np.linalg.LinAlgError:
        raise IslandedNetworkError("islanded or degenerate network") from None
    if Bred.shape[0] and not np.all(np.isfinite(inv)):
        raise IslandedNetworkError("islanded or degenerate network")
    # a connected network yields a strictly diagonally-dominant reduced matrix;
    # an absurd condition number signals hidden islands
    if Bred.shape[0] and np.abs(Bred @ inv - np.eye(len(keep))).max() > 1e-6:
        raise IslandedNetworkError("islanded or degenerate network")
    return inv


@dataclass(frozen=True)
class PtdfMatrix:
    """Injection-shift factors: rows = in-service branches, cols = buses.

    matrix[l, n] is the MW flow induced on branch l (oriented from->to) by a
    1 MW injection at bus n withdrawn at the slack; the slack column is zero.
    """

    matrix: np.ndarray
    branch_ids: tuple[int, ...]
    bus_ids: tuple[int, ...]
    slack_bus: int

    def flows(self, injection: np.ndarray) -> np.ndarray:
        return self.matrix @ injection


def build_ptdf(case: GridCase, slack: int | None = None) -> PtdfMatrix:
    slack = case.slack_bus if slack is None else slack
    idx = case.bus_index()
    if slack not in idx:
        raise KeyError(f"slack bus {slack} not in case")
    branches = case.in_service_branches()
    n = len(case.buses)
    B = np.zeros((n, n))
    A = np.zeros((len(branches), n))
    bvec = np.empty(len(branches))
    for row, br in enumerate(branches):
        i, j = idx[br.from_bus], idx[br.to_bus]
        b = abs(br.susceptance)
        bvec[row] = b
        A[row, i] = 1.0
        A[row, j] = -1.0
        B[i, i] += b
        B[j, j] += b
        B[i, j] -= b
        B[j, i] -= b
    spos = idx[slack]
    inv = _reduced_inverse(B, spos)
    keep = [k for k in range(n) if k != spos]
    phi = np.zeros((len(branches), n))
    phi[:, keep] = (bvec[:, None] * A[:, keep]) @ inv
    return PtdfMatrix(
        matrix=phi,
        branch_ids=tuple(br.id for br in branches),
        bus_ids=tuple(b.id for b in case.buses),
        slack_bus=slack,
    )


def btheta_flows(case: GridCase, injection: np.ndarray,
                 slack: int | None = None) -> np.ndarray:
    """Branch flows from solving B theta = p with theta_slack = 0.

    Reference implementation used to cross-check PTDF products; injection is
    MW per bus in case bus order and must balance to zero.
    """
    slack = case.slack_bus if slack is None else slack
    idx = case.bus_index()
    B = build_b_matrix(case)
    spos = idx[slack]
    keep = [k for k in range(len(case.buses)) if k != spos]
    theta = np.zeros(len(case.buses))
    theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], injection[keep])
    branches = case.in_service_branches()
    flows = np.empty(len(branches))
    for row, br in enumerate(branches):
        flows[row] = abs(br.susceptance) * (theta[idx[br.from_bus]]
                                            - theta[idx[br.to_bus]])
    return flows


def island_forming_branches(case: GridCase) -> set[int]:
    """Branch ids whose outage would split the in-service graph.

    Parallel branches between the same bus pair are never island-forming.
    """
    graph = nx.Graph()
    graph.add_nodes_from(b.id for b in case.buses)
    multiplicity: dict[tuple[int, int], list[int]] = {}
    for br in case.in_service_branches():
        key = (min(br.from_bus, br.to_bus), max(br.from_bus, br.to_bus))
        multiplicity.setdefault(key, []).append(br.id)
        graph.add_edge(*key)
    bridges = {(min(u, v), max(u, v)) for u, v in nx.bridges(graph)}
    out: set[int] = set()
    for key, ids in multiplicity.items():
        if key in bridges and len(ids) == 1:
            out.add(ids[0])
    return out
