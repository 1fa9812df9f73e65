"""Field and report files.

A field file is CSV with the header ``r,theta,value`` and one row per node,
radius-major (all angles of r0 first). Numbers use ``%.17g`` so a read-back
reproduces every double exactly. Reports are JSON with sorted keys.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import AnnulusGrid, ScalarField

HEADER = "r,theta,value"


def write_field(path, field):
    g = field.grid
    table = np.column_stack([g.rr.ravel(), g.tt.ravel(), field.values.ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=HEADER, comments="")


def read_field(path, r0=None, r1=None):
    """Read a field file back; the grid is rebuilt from the node coordinates."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    r = np.unique(table[:, 0])
    nt = table.shape[0] // r.size
    grid = AnnulusGrid(r0 if r0 is not None else r[0], r1 if r1 is not None else r[-1], r.size, nt)
    return ScalarField(grid, table[:, 2].reshape(grid.shape))


def write_report(path, report):
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_report(path):
    return json.loads(Path(path).read_text())


def write_solution(out_dir, sol, prefix=""):
    """Emit u_r, u_theta, p (and omega or phi when present) plus report.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = sol.u.grid
    files = {
        "u_r": ScalarField(g, sol.u.vr),
        "u_theta": ScalarField(g, sol.u.vtheta),
        "p": sol.p,
    }
    for key in ("omega", "phi"):
        if key in sol.extra:
            files[key] = sol.extra[key]
    written = []
    for name, f in files.items():
        path = out / f"{prefix}{name}.csv"
        write_field(path, f)
        written.append(path)
    return written
