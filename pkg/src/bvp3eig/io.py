"""JSON and CSV forms of the results.

Every JSON document carries ``schema_version`` and a ``generated_at``
timestamp; nothing else in it depends on the clock, so two identical runs
differ only in that field.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone

import numpy as np

from bvp3eig.operator import OperatorContext
from bvp3eig.quadrature import gauss_rule
from bvp3eig.solver import BranchTable, Eigenpair

SCHEMA_VERSION = 1


def envelope(kind: str, body: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **body,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def strip_timestamps(doc):
    """Copy of a JSON document without its ``generated_at`` fields."""
    if isinstance(doc, dict):
        return {k: strip_timestamps(v) for k, v in doc.items() if k != "generated_at"}
    if isinstance(doc, list):
        return [strip_timestamps(v) for v in doc]
    return doc


def eigenpair_summary(pair: Eigenpair) -> dict:
    return {
        "lambda": pair.lam,
        "sign": "+" if pair.lam > 0 else "-",
        "rho": pair.rho,
        "method": pair.method,
        "iterations": pair.iterations,
        "fixed_point_residual": pair.fixed_point_residual,
        "norm_residual": pair.norm_residual,
        "norm": {"value": pair.norm.value, "derivative": pair.norm.derivative, "point": pair.norm.point},
    }


def eigenpair_to_dict(pair: Eigenpair, problem_text: str) -> dict:
    """Summary plus the nodal layers, enough to rebuild the pair."""
    return {
        **eigenpair_summary(pair),
        "problem": problem_text,
        "order": pair.u.rule.order,
        "nodes": pair.u.nodes.tolist(),
        "u": pair.u.layers.tolist(),
    }


def eigenpair_from_dict(doc: dict, ctx: OperatorContext) -> Eigenpair:
    """Rebuild an eigenpair as lam * T(stored layers), with fresh residuals.

    The context must use the quadrature rule the pair was computed on.
    """
    try:
        order = int(doc["order"])
        lam = float(doc["lambda"])
        rho = float(doc["rho"])
        layers = np.asarray(doc["u"], dtype=float)
        nodes = np.asarray(doc["nodes"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed eigenpair document: {exc}") from None
    if order != ctx.n:
        raise ValueError(f"eigenpair has order {order}, context has {ctx.n}")
    if layers.shape != (3, order) or nodes.shape != (order,):
        raise ValueError("eigenpair layers do not match its order")
    if not np.allclose(nodes, gauss_rule(order).nodes, rtol=0, atol=1e-13):
        raise ValueError("eigenpair nodes are not the Gauss-Legendre nodes of its order")
    if lam == 0 or not np.isfinite(lam) or not rho > 0:
        raise ValueError("eigenpair needs a nonzero lambda and a positive rho")
    return Eigenpair.build(ctx, layers, lam, rho, int(doc.get("iterations", 0)), doc.get("method", "picard"))


def certificate_to_dict(cert) -> dict:
    return {
        "verdict": cert.verdict,
        "ode_residual": cert.ode_residual,
        "layer_defects": list(cert.layer_defects),
        "bc_residuals": {
            "u0_minus_lam_H1": cert.bc_residuals[0],
            "u1_minus_lam_H2": cert.bc_residuals[1],
            "integral_u": cert.bc_residuals[2],
        },
        "thresholds": {"ode": cert.thresholds[0], "bc": cert.thresholds[1]},
        "grid": cert.grid,
    }


def branch_table_to_dict(table: BranchTable) -> dict:
    return {
        "entries": [
            {
                "rho": rho,
                "plus": None if plus is None else eigenpair_summary(plus),
                "minus": None if minus is None else eigenpair_summary(minus),
            }
            for rho, plus, minus in table.entries
        ],
        "failures": [{"rho": rho, "sign": sign, "reason": reason} for rho, sign, reason in table.failures],
    }


def write_samples(path, pair: Eigenpair, points: int) -> None:
    """u, u', u'' of the computed eigenfunction at ``points`` uniform t values."""
    t = np.linspace(0.0, 1.0, points)
    vals = pair.u.values(t)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "u", "du", "d2u"])
        for k in range(points):
            out.writerow([repr(float(t[k]))] + [repr(float(vals[j, k])) for j in range(3)])
