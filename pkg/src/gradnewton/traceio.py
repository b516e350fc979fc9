"""Trace CSV and run-summary JSON."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from gradnewton.solver import ExitCondition, IterationRecord, SolveResult

TRACE_COLUMNS = ("k", "grad_norm", "lambda_sq", "step", "halvings", "exit_condition", "energy")


def with_energies(result: SolveResult, oracle) -> tuple[IterationRecord, ...]:
    """Copy of the trace with ``energy`` filled in at each iterate.

    Runs after the solve and bumps the oracle's energy counter, never the
    counter snapshot already stored in ``result``.
    """
    if not oracle.has_energy:
        return result.trace
    return tuple(
        IterationRecord(r.k, r.grad_norm, r.lambda_sq, r.step, r.halvings, r.exit_condition,
                        oracle.energy(result.path[r.k]))
        for r in result.trace
    )


def format_trace_csv(trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in trace:
        writer.writerow([
            r.k,
            repr(float(r.grad_norm)),
            repr(float(r.lambda_sq)),
            repr(float(r.step)),
            r.halvings,
            r.exit_condition.value,
            "" if r.energy is None else repr(float(r.energy)),
        ])
    return buf.getvalue()


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_trace_csv(trace))


def parse_trace_csv(text: str) -> tuple[IterationRecord, ...]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace columns {reader.fieldnames}")
    return tuple(
        IterationRecord(
            k=int(row["k"]),
            grad_norm=float(row["grad_norm"]),
            lambda_sq=float(row["lambda_sq"]),
            step=float(row["step"]),
            halvings=int(row["halvings"]),
            exit_condition=ExitCondition(row["exit_condition"]),
            energy=float(row["energy"]) if row["energy"] else None,
        )
        for row in reader
    )


def read_trace_csv(path) -> tuple[IterationRecord, ...]:
    with open(path, newline="") as fh:
        return parse_trace_csv(fh.read())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        # JSON has no infinities
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def summary_dict(result: SolveResult, diagnostics: dict | None = None, **extra) -> dict:
    out = {
        "status": result.status.value,
        "iterations": result.iterations,
        "final_point": result.final_point,
        "final_grad_norm": result.final_grad_norm,
        "counters": result.counters.as_dict(),
        "failed_at": result.failed_at,
        "message": result.message,
        "diagnostics": diagnostics,
    }
    out.update(extra)
    return _jsonable(out)


def dump_summary(summary: dict, path=None) -> str:
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
