"""Trace CSV and run-report JSON.

Floats are written with ``repr``, the shortest decimal that round-trips, so
reading a file back reproduces every value bit for bit.  Non-finite values
appear as ``inf``/``nan`` in CSV and as ``Infinity``/``NaN`` in JSON (the
tokens Python's ``json`` module reads and writes).
"""

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import RateReport
from .solver import IterationRecord, SolveReport, SolverConfig, Status

TRACE_HEADER = ("k", "psi", "gamma", "inner_iters", "step_norm", "residual")


def write_trace_csv(trace, path):
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for rec in sorted(trace, key=lambda r: r.k):
                writer.writerow((rec.k, repr(float(rec.psi)), repr(float(rec.gamma)),
                                 rec.inner_iters, repr(float(rec.step_norm)),
                                 repr(float(rec.residual))))
    except OSError as err:
        raise OSError(f"cannot write trace {path}: {err.strerror or err}") from err


def read_trace_csv(path):
    """Inverse of ``write_trace_csv``; snapshots and ``gamma0`` are not stored."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise OSError(f"cannot read trace {path}: {err.strerror or err}") from err
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ValueError(f"{path}: header must be {','.join(TRACE_HEADER)}")
    trace = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRACE_HEADER):
            raise ValueError(f"{path}:{line}: expected {len(TRACE_HEADER)} fields")
        k, psi, gamma, inner, step, res = row
        trace.append(IterationRecord(int(k), float(psi), float(gamma), int(inner),
                                     float(step), float(res)))
    return trace


def _vec(x):
    return None if x is None else [float(v) for v in np.asarray(x).ravel()]


def record_to_dict(rec):
    return {
        "k": rec.k, "psi": float(rec.psi), "gamma": float(rec.gamma),
        "inner_iters": rec.inner_iters, "step_norm": float(rec.step_norm),
        "residual": float(rec.residual), "gamma0": float(rec.gamma0),
        "x_snapshot": _vec(rec.x_snapshot),
    }


def record_from_dict(d):
    snap = d.get("x_snapshot")
    return IterationRecord(
        int(d["k"]), float(d["psi"]), float(d["gamma"]), int(d["inner_iters"]),
        float(d["step_norm"]), float(d["residual"]), float(d.get("gamma0", 0.0)),
        None if snap is None else np.array(snap, dtype=float))


@dataclass
class RunArtifact:
    """Everything needed to inspect or replay one run."""

    report: SolveReport
    config_echo: SolverConfig
    problem_echo: dict
    rate: Optional[RateReport] = None

    def to_dict(self):
        r = self.report
        return {
            "status": r.status.value,
            "final_x": _vec(r.final_x),
            "final_psi": float(r.final_psi),
            "wall_time": float(r.wall_time),
            "iterations": r.iterations,
            "trace": [record_to_dict(rec) for rec in r.trace],
            "config_echo": self.config_echo.to_dict(),
            "problem_echo": self.problem_echo,
            "rate": None if self.rate is None else self.rate.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        report = SolveReport(Status(d["status"]), np.array(d["final_x"], dtype=float),
                             float(d["final_psi"]),
                             [record_from_dict(t) for t in d["trace"]],
                             float(d["wall_time"]))
        rate = d.get("rate")
        if rate is not None:
            rate = RateReport(rate["q_factor_psi"], rate["r_factor_x"], rate["tail_window"],
                              rate["psi_star_proxy"],
                              np.array(rate["x_star_proxy"], dtype=float))
        return cls(report, SolverConfig(**d["config_echo"]), d["problem_echo"], rate)


def problem_echo(spec):
    return {"name": spec.name, "seed": spec.seed, "digest": spec.digest(),
            "spec": spec.to_dict()}


def write_report_json(artifact, path):
    try:
        with open(path, "w") as fh:
            json.dump(artifact.to_dict(), fh, indent=1)
            fh.write("\n")
    except OSError as err:
        raise OSError(f"cannot write report {path}: {err.strerror or err}") from err


def read_report_json(path):
    try:
        with open(path) as fh:
            return RunArtifact.from_dict(json.load(fh))
    except OSError as err:
        raise OSError(f"cannot read report {path}: {err.strerror or err}") from err
