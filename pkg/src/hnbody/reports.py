"""Bit-stable serialization of reports and sample files.

All floating-point values are rendered with 17 significant digits (enough
to round-trip IEEE doubles) and object keys are emitted sorted, so a fixed
configuration and seed always produce byte-identical output.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import Trajectory, conserved
from .errors import DomainError


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise DomainError("reports may not contain NaN or infinite values")
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Render a report tree deterministically; returns text ending in a newline."""
    pieces = []
    _write_json(obj, pieces)
    return "".join(pieces) + "\n"


def _write_json(obj, out: list, indent: int = 0):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise DomainError(f"report keys must be strings, got {key!r}")
            out.append(f'{pad}  "{key}": ')
            _write_json(obj[key], out, indent + 1)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(pad + "  ")
            _write_json(item, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, bool) or obj is None:
        out.append({True: "true", False: "false", None: "null"}[obj])
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(obj))
    else:
        raise DomainError(f"cannot serialize {type(obj).__name__} into a report")


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# Trajectory export
# ---------------------------------------------------------------------------

def trajectory_csv(traj: Trajectory) -> str:
    """CSV body with header t,k,re,im,vre,vim, one row per node and body."""
    lines = ["t,k,re,im,vre,vim"]
    n = traj.n
    for t, y in zip(traj.times, traj.ys):
        for k in range(n):
            w, v = y[k], y[n + k]
            lines.append(
                ",".join(
                    [fmt_float(t), str(k), fmt_float(w.real), fmt_float(w.imag),
                     fmt_float(v.real), fmt_float(v.imag)]
                )
            )
    return "\n".join(lines) + "\n"


def trajectory_sidecar(traj: Trajectory) -> dict:
    """JSON sidecar: masses, R, conserved-quantity series, integrator stats."""
    series = {"t": [], "energy": [], "momentum_normal": [], "momentum_nilpotent": [],
              "momentum_rotation": []}
    for state in traj.samples:
        q = conserved(state)
        series["t"].append(state.t)
        for key, val in q.as_dict().items():
            series[key].append(val)
    energies = series["energy"]
    scale = max(1.0, abs(energies[0]))
    drift = max(abs(e - energies[0]) for e in energies) / scale
    return {
        "masses": [float(m) for m in traj.masses],
        "R": float(traj.R),
        "conserved": series,
        "energy_drift": drift,
        "stats": {
            "steps": traj.stats.steps,
            "rejected_steps": traj.stats.rejected,
            "min_theta": None if math.isinf(traj.stats.min_theta) else traj.stats.min_theta,
        },
    }


def flow_csv(rows) -> str:
    """CSV body with header t,s,k,re,im for flow samples."""
    lines = ["t,s,k,re,im"]
    for t, s, k, re, im in rows:
        lines.append(",".join([fmt_float(t), fmt_float(s), str(k), fmt_float(re), fmt_float(im)]))
    return "\n".join(lines) + "\n"
