"""CSV and JSON formats used by the command line.

Data CSV: header row, then ``y``, ``x1..xp``, ``z1..zq``. Ranking-valued
covariates or instruments use a single ``x_rank`` / ``z_rank`` column of
pipe-delimited rank strings such as ``3|1|2``.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import InputError
from .estimator import Dataset
from .kernels import format_ranking, parse_ranking

_NUMBERED = re.compile(r"^([xz])(\d+)$")


def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_float(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError as exc:
        raise InputError(f"{where}: {tok!r} is not a number") from exc
    if not math.isfinite(v):
        raise InputError(f"{where}: non-finite value {tok!r}")
    return v


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise InputError(f"{path}: malformed CSV ({exc})") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise InputError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return header, body


def _block(header, body, prefix: str, path, required: bool = True) -> np.ndarray | None:
    """Extract the x.. or z.. block: numbered numeric columns or one rank column."""
    rank_col = f"{prefix}_rank"
    numbered = sorted(
        ((int(m.group(2)), j) for j, h in enumerate(header) if (m := _NUMBERED.match(h)) and m.group(1) == prefix)
    )
    if rank_col in header and numbered:
        raise InputError(f"{path}: both {rank_col} and numbered {prefix} columns present")
    if rank_col in header:
        j = header.index(rank_col)
        ranks = [parse_ranking(r[j]) for r in body]
        if len({len(r) for r in ranks}) > 1:
            raise InputError(f"{path}: rankings in {rank_col} have different lengths")
        return np.vstack(ranks) if ranks else np.zeros((0, 2), dtype=np.int64)
    if not numbered:
        if required:
            raise InputError(f"{path}: no {prefix}1.. or {rank_col} columns")
        return None
    idx = [k for k, _ in numbered]
    if idx != list(range(1, len(idx) + 1)):
        raise InputError(f"{path}: {prefix} columns must be numbered 1..{len(idx)}")
    cols = [j for _, j in numbered]
    return np.array(
        [[_parse_float(r[j], f"{path}:{i}") for j in cols] for i, r in enumerate(body, start=2)],
        dtype=np.float64,
    ).reshape(len(body), len(cols))


def read_dataset(path) -> Dataset:
    header, body = _read_rows(path)
    if "y" not in header:
        raise InputError(f"{path}: missing 'y' column")
    jy = header.index("y")
    Y = np.array([_parse_float(r[jy], f"{path}:{i}") for i, r in enumerate(body, start=2)])
    X = _block(header, body, "x", path)
    Z = _block(header, body, "z", path)
    return Dataset(Z, X, Y)


def read_grid(path) -> np.ndarray:
    """Evaluation points: columns x1..xp or x_rank."""
    header, body = _read_rows(path)
    if not body:
        raise InputError(f"{path}: grid has no rows")
    return _block(header, body, "x", path)


def _point_columns(X: np.ndarray, prefix: str, ranking: bool):
    if ranking:
        return [f"{prefix}_rank"], [[format_ranking(r)] for r in X]
    names = [f"{prefix}{j + 1}" for j in range(X.shape[1])]
    return names, [[_fmt(v) for v in row] for row in X]


def write_dataset(path, data: Dataset, x_ranking: bool = False, z_ranking: bool = False) -> None:
    xn, xv = _point_columns(np.asarray(data.X), "x", x_ranking)
    zn, zv = _point_columns(np.asarray(data.Z), "z", z_ranking)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", *xn, *zn])
        for y, xr, zr in zip(data.Y, xv, zv):
            w.writerow([_fmt(y), *xr, *zr])


def write_table(path, columns: dict) -> None:
    """Write equal-length columns; floats in shortest round-trip form."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(len(cols[0]) if cols else 0):
            w.writerow(
                [str(int(c[i])) if np.issubdtype(c.dtype, np.integer) else _fmt(c[i]) for c in cols]
            )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
