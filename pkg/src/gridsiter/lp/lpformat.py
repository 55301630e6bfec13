"""Text dump of models in CPLEX LP interchange format for external cross-checks."""

from __future__ import annotations

import numpy as np

from .model import EQUAL, GREATER, LinearProgram, MixedIntegerProgram


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    return f"{sign} {mag:.12g} {name} ".replace("- ", "-" if first else "- ")


def _expr(coefs: np.ndarray, names: list[str]) -> str:
    parts = []
    first = True
    for c, name in zip(coefs, names):
        if c == 0:
            continue
        parts.append(_term(float(c), name, first))
        first = False
    return "".join(parts).strip() or "0 " + names[0]


def write_lp_text(lp: LinearProgram, binaries: tuple[int, ...] = ()) -> str:
    names = lp.var_names or [f"x{j}" for j in range(lp.n_vars)]
    out = ["Minimize", " obj: " + _expr(lp.c, names), "Subject To"]
    for i in range(lp.n_rows):
        tag = lp.row_tags[i] or f"c{i}"
        op = {EQUAL: "=", GREATER: ">="}.get(lp.senses[i], "<=")
        out.append(f" {tag}: " + _expr(lp.A[i], names) + f" {op} {lp.rhs[i]:.12g}")
    out.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = lp.lb[j], lp.ub[j]
        lo_s = "-inf" if not np.isfinite(lo) else f"{lo:.12g}"
        hi_s = "+inf" if not np.isfinite(hi) else f"{hi:.12g}"
        out.append(f" {lo_s} <= {name} <= {hi_s}")
    if binaries:
        out.append("Binaries")
        out.append(" " + " ".join(names[j] for j in binaries))
    out.append("End")
    return "\n".join(out) + "\n"


def dump_lp(path, problem) -> None:
    if isinstance(problem, MixedIntegerProgram):
        text = write_lp_text(problem.lp, problem.binaries)
    else:
        text = write_lp_text(problem)
    with open(path, "w") as fh:
        fh.write(text)
