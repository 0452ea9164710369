"""Containers and text exports for grid functions, operators, symbols and reports.

All writers go through a temporary file in the target directory followed by
``os.replace`` so readers never observe half-written output.
"""
import csv
import io as _io
import json
import os
import tempfile

import numpy as np

from .deform import Dense
from .grid import POSITION, GridFunction, TorusGrid

FORMAT = "deformquant/1"


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` atomically."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode, newline="" if mode == "w" else None) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _npz_bytes(**arrays):
    buf = _io.BytesIO()
    np.savez(buf, **arrays)
    return buf.getvalue()


def _meta(grid, k, space, kind):
    return dict(
        format=np.array(FORMAT), kind=np.array(kind), n=np.array(grid.n), N=np.array(grid.N),
        L=np.array(grid.L), k=np.array(k), space=np.array(space),
    )


def save_grid_function(path, f):
    atomic_write(path, _npz_bytes(values=f.values, **_meta(f.grid, f.k, f.space, "GridFunction")))


def _open(path, kind):
    with np.load(path, allow_pickle=False) as z:
        data = {key: z[key] for key in z.files}
    if str(data.get("format")) != FORMAT or str(data.get("kind")) != kind:
        raise ValueError(f"{path} is not a {kind} container")
    grid = TorusGrid(int(data["n"]), int(data["N"]), float(data["L"]))
    return grid, data


def load_grid_function(path):
    grid, data = _open(path, "GridFunction")
    return GridFunction(grid, data["values"], str(data["space"]))


def save_dense_operator(path, A):
    if not isinstance(A, Dense):
        raise TypeError("only Dense operators can be stored; materialize with to_dense")
    atomic_write(path, _npz_bytes(matrix=A.matrix, **_meta(A.grid, A.k, POSITION, "Dense")))


def load_dense_operator(path):
    grid, data = _open(path, "Dense")
    return Dense(grid, int(data["k"]), data["matrix"])


def _num(v):
    return repr(float(v))


def _entry_columns(k):
    return [f"{part}_{i}{j}" for i in range(k) for j in range(k) for part in ("re", "im")]


def _entries(M):
    flat = np.asarray(M).reshape(-1)
    return [_num(p) for z in flat for p in (z.real, z.imag)]


def _csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def grid_function_csv(f):
    """One row per grid point: coordinates, then entries as re/im pairs."""
    g = f.grid
    name = "x" if f.space == POSITION else "xi"
    coords = g.points() if f.space == POSITION else g.frequencies()
    header = [f"{name}{a + 1}" for a in range(g.n)] + _entry_columns(f.k)
    rows = [
        [_num(c) for c in coords[idx]] + _entries(f.values[idx]) for idx in np.ndindex(*g.shape)
    ]
    return _csv_text(header, rows)


def phase_space_csv(a):
    """One row per (x, xi) pair: coordinates, frequencies, entries."""
    g = a.grid
    pts = g.points()
    header = (
        [f"x{i + 1}" for i in range(g.n)] + [f"xi{i + 1}" for i in range(g.n)] + _entry_columns(a.k)
    )
    rows = []
    for idx in np.ndindex(*g.shape):
        for q, mode in enumerate(a.modes):
            rows.append(
                [_num(c) for c in pts[idx]]
                + [_num(c) for c in mode * g.dxi]
                + _entries(a.values[idx + (q,)])
            )
    return _csv_text(header, rows)


def table_csv(rows, columns=None):
    """Rows of dicts as CSV with a fixed column order."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    out = [[_fmt(r.get(c, "")) for c in columns] for r in rows]
    return _csv_text(columns, out)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return str(v)


def to_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")
