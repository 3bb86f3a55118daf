"""Artifact serialization: CSV fields, raw binary space-time blocks, P6 images.

All writers are deterministic: identical inputs produce identical bytes, so
artifact files can be compared bit for bit across reruns.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bifurcation import Branch, TwoParamMap
from .errors import HeterosimError

FLOAT_FMT = "%.17g"  # round-trips IEEE-754 doubles exactly


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def write_field_csv(path, xs: np.ndarray, times, values: np.ndarray) -> Path:
    """Rows of field values over the grid, one per time.

    First row is ``x`` followed by the node positions; each following row is
    the time then the field values, all with 17 significant digits.
    """
    path = Path(path)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if values.shape != (len(times), len(xs)):
        raise ValueError(f"values shape {values.shape} != ({len(times)}, {len(xs)})")
    try:
        with path.open("w", newline="\n") as fh:
            fh.write("x," + ",".join(_fmt(x) for x in xs) + "\n")
            for t, row in zip(times, values):
                fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise HeterosimError(f"failed writing CSV to {path}: {exc}") from exc
    return path


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`: returns (xs, times, values)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "x":
            raise HeterosimError(f"{path}: not a field CSV (missing x header row)")
        xs = np.array([float(v) for v in header[1:]])
        times = []
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            times.append(float(parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return xs, np.array(times), np.array(rows)


def write_spacetime_binary(path, array: np.ndarray) -> Path:
    """Row-major (time x space) little-endian float64 block plus a sidecar.

    The sidecar ``<file>.meta`` records the dimensions and layout needed to
    reread the block.
    """
    path = Path(path)
    array = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    if array.ndim != 2:
        raise ValueError(f"expected a 2D (time x space) array, got shape {array.shape}")
    try:
        path.write_bytes(array.tobytes(order="C"))
        meta = (
            f"rows={array.shape[0]}\n"
            f"cols={array.shape[1]}\n"
            "dtype=float64\n"
            "byteorder=little\n"
            "order=row-major (time x space)\n"
        )
        Path(str(path) + ".meta").write_text(meta)
    except OSError as exc:
        raise HeterosimError(f"failed writing binary to {path}: {exc}") from exc
    return path


def read_spacetime_binary(path) -> np.ndarray:
    path = Path(path)
    meta = {}
    for line in Path(str(path) + ".meta").read_text().splitlines():
        if "=" in line:
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
    rows, cols = int(meta["rows"]), int(meta["cols"])
    data = np.frombuffer(path.read_bytes(), dtype="<f8")
    if data.size != rows * cols:
        raise HeterosimError(f"{path}: payload has {data.size} values, expected {rows * cols}")
    return data.reshape(rows, cols)


def colormap_blue_white_red(normed: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to RGB bytes: blue at 0, white at 0.5, red at 1.

    NaN cells are painted black so "no data" stands apart from the ramp.
    """
    t = np.asarray(normed, dtype=float)
    nan_mask = np.isnan(t)
    t = np.clip(np.where(nan_mask, 0.0, t), 0.0, 1.0)
    lower = t <= 0.5
    u = np.where(lower, 2.0 * t, 2.0 * (t - 0.5))
    r = np.where(lower, 255.0 * u, 255.0)
    g = np.where(lower, 255.0 * u, 255.0 * (1.0 - u))
    b = np.where(lower, 255.0, 255.0 * (1.0 - u))
    rgb = np.stack([r, g, b], axis=-1)
    rgb[nan_mask] = 0.0
    return np.rint(rgb).astype(np.uint8)


def render_heatmap(path, array: np.ndarray, vmin: float | None = None,
                   vmax: float | None = None) -> Path:
    """Binary P6 pixmap of a 2D array under the blue-white-red ramp.

    The value range [vmin, vmax] (defaulting to the finite data range) maps
    linearly onto the ramp; a constant array renders mid-scale white.
    """
    path = Path(path)
    array = np.asarray(array, dtype=float)
    if array.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {array.shape}")
    finite = array[np.isfinite(array)]
    lo = float(finite.min()) if vmin is None and finite.size else (vmin or 0.0)
    hi = float(finite.max()) if vmax is None and finite.size else (vmax or 1.0)
    if hi > lo:
        normed = (array - lo) / (hi - lo)
    else:
        normed = np.full_like(array, 0.5)
        normed[~np.isfinite(array)] = np.nan
    rgb = colormap_blue_white_red(normed)
    height, width = array.shape
    try:
        with path.open("wb") as fh:
            fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
            fh.write(rgb.tobytes())
    except OSError as exc:
        raise HeterosimError(f"failed writing pixmap to {path}: {exc}") from exc
    return path


def write_branch_csv(path, branch: Branch, grid=None) -> Path:
    """One row per branch point: parameter, state summary, stability, events.

    Nonspatial states (up to 4 components) are written in full; spatial
    states are summarized by the L1 norm of their first (grass) field, whose
    full profile is saved separately by the caller.
    """
    path = Path(path)
    events_by_index = {}
    for ev in branch.events:
        events_by_index.setdefault(ev.index, []).append(ev.kind.value)
    with path.open("w", newline="\n") as fh:
        dim = branch.points[0].state.size if branch.points else 0
        if dim <= 4:
            cols = ",".join(f"state_{i}" for i in range(dim))
        else:
            cols = "l1_grass"
        fh.write(f"parameter,{cols},max_re_eigenvalue,stability,event\n")
        for i, pt in enumerate(branch.points):
            if pt.state.size <= 4:
                state_part = ",".join(_fmt(v) for v in np.atleast_1d(pt.state))
            else:
                field = pt.state if pt.state.ndim == 1 else pt.state[0]
                if grid is not None:
                    l1 = float(np.trapezoid(np.abs(field), grid.nodes))
                else:
                    l1 = float(np.trapezoid(np.abs(field), dx=1.0 / (len(field) - 1)))
                state_part = _fmt(l1)
            ev = ";".join(events_by_index.get(i, []))
            fh.write(f"{_fmt(pt.parameter)},{state_part},"
                     f"{_fmt(pt.max_real_eigenvalue)},{pt.stability.value},{ev}\n")
    return path


def write_two_param_csv(path, result: TwoParamMap) -> Path:
    """Cell rows: alpha, beta, stable equilibrium count, oscillation flag."""
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write("alpha,beta,stable_count,oscillating\n")
        for i, a in enumerate(result.alpha_values):
            for j, b in enumerate(result.beta_values):
                fh.write(f"{_fmt(a)},{_fmt(b)},{int(result.stable_count[i, j])},"
                         f"{int(result.oscillating[i, j])}\n")
    return path


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path
