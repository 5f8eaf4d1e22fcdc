"""Versioned JSON output with sorted keys and 17-significant-digit floats."""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

import numpy as np

from .circuits import BeamSplitterConfig
from .klm import GateReport, Stage
from .measurement import OVERFLOW, OutcomeDistribution, outcome_key

VERSION = 1


def _float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    text = format(x, ".17g")
    if all(c not in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj: Any) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: Mapping) -> bytes:
    return (_encode(doc) + "\n").encode("utf-8")


def _base(kind: str, seed=None, truncation=None, residual=0.0) -> dict:
    return {"version": VERSION, "kind": kind, "seed": seed, "truncation": truncation,
            "entries": [], "residual": float(residual)}


def distribution_doc(dist: OutcomeDistribution, truncation: int | None = None,
                     postselection_probability: float | None = None) -> dict:
    doc = _base("distribution", truncation=truncation, residual=dist.residual)
    doc["entries"] = [{"outcome": list(k), "probability": p} for k, p in dist.entries.items()]
    if postselection_probability is not None:
        doc["postselection_probability"] = postselection_probability
    return doc


def histogram_doc(counts: Mapping, seed: int, truncation: int | None, residual: float,
                  kind: str = "histogram") -> dict:
    doc = _base(kind, seed=seed, truncation=truncation, residual=residual)
    keys = sorted((k for k in counts if k != OVERFLOW), key=outcome_key)
    doc["entries"] = [{"outcome": list(k), "count": int(counts[k])} for k in keys]
    # the overflow bucket is always present, as the empty outcome
    doc["entries"].append({"outcome": [], "count": int(counts.get(OVERFLOW, 0))})
    return doc


def element_doc(n_in, n_out, value: complex) -> dict:
    doc = _base("element")
    doc["entries"] = [{"input": list(n_in), "outcome": list(n_out), "re": value.real, "im": value.imag,
                       "probability": abs(value) ** 2}]
    return doc


def _config_doc(c: BeamSplitterConfig) -> dict:
    return {"theta": c.theta, "gamma": c.gamma, "rho": c.rho, "tau": c.tau}


def gate_report_doc(report: GateReport) -> dict:
    doc = _base("gate_report")
    doc["name"] = report.name
    labels = report.labels or [(m,) for m in range(len(report.coefficients))]
    doc["entries"] = [{"outcome": list(label), "re": complex(c).real, "im": complex(c).imag,
                       "probability": abs(c) ** 2} for label, c in zip(labels, report.coefficients)]
    doc["success_probability"] = report.success_probability
    doc["deviations"] = dict(report.deviations)
    doc["configs"] = [dict(_config_doc(s.config), n_minus=s.n_minus, n_plus=s.n_plus)
                      if isinstance(s, Stage) else _config_doc(s) for s in report.configs]
    return doc


def emit_json(result) -> bytes:
    """Serialize an outcome distribution, gate report or prebuilt document."""
    if isinstance(result, OutcomeDistribution):
        return dumps(distribution_doc(result))
    if isinstance(result, GateReport):
        return dumps(gate_report_doc(result))
    if isinstance(result, Mapping):
        return dumps(result)
    raise TypeError(f"cannot serialize {type(result).__name__}")
