"""JSON/CSV serialization.  Complex numbers are written as ``[re, im]`` pairs."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields, is_dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


def _float(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def encode(obj):
    """Convert numpy arrays, complex scalars and dataclasses to JSON-ready values."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 0:
            return encode(obj[()])
        return [encode(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(x) for x in obj]
    if is_dataclass(obj):
        return {f.name: encode(getattr(obj, f.name)) for f in fields(obj)
                if not f.name.startswith("_")}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def decode_complex(x, what: str = "value") -> complex:
    if isinstance(x, bool):
        raise ConfigError(f"{what}: expected a number or [re, im] pair")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in x):
        return complex(float(x[0]), float(x[1]))
    raise ConfigError(f"{what}: expected a number or [re, im] pair, got {x!r}")


def decode_vector(x, n: int | None = None, what: str = "vector") -> np.ndarray:
    if not isinstance(x, (list, tuple)):
        raise ConfigError(f"{what}: expected an array of [re, im] pairs")
    out = np.array([decode_complex(c, what) for c in x], dtype=complex)
    if n is not None and out.shape[0] != n:
        raise ConfigError(f"{what}: length {out.shape[0]} does not match dimension {n}")
    return out


def decode_matrix(x, what: str = "matrix") -> np.ndarray:
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(f"{what}: expected a nested array")
    rows = [decode_vector(r, what=what) for r in x]
    if len({r.shape[0] for r in rows}) != 1:
        raise ConfigError(f"{what}: rows have different lengths")
    return np.array(rows)


def dumps_json(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=True) + "\n"


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(c) for c in row])
    return buf.getvalue()


def _cell(c):
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    return c


def complex_columns(prefix: str, n: int) -> list[str]:
    cols = []
    for k in range(1, n + 1):
        cols += [f"{prefix}{k}_re", f"{prefix}{k}_im"]
    return cols


def complex_cells(vec) -> list[float]:
    out = []
    for c in np.asarray(vec).reshape(-1):
        out += [float(c.real), float(c.imag)]
    return out


def tensor_rows(name: str, arr) -> list[list]:
    """``[name, index, re, im]`` rows for every entry of ``arr``."""
    arr = np.asarray(arr)
    rows = []
    for idx in np.ndindex(arr.shape):
        c = complex(arr[idx])
        rows.append([name, " ".join(str(i) for i in idx), c.real, c.imag])
    return rows
