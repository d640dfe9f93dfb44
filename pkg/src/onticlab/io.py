"""JSON encoding of complex vectors and matrices ([re, im] pairs, row-major)."""

from __future__ import annotations

import hashlib
import json
import numbers
from typing import Any

import numpy as np

from .errors import ScenarioFormatError

SCHEMA_VERSION = 1


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v: np.ndarray) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(v)]


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(m)]


def decode_complex(obj: Any, path: str) -> complex:
    if isinstance(obj, numbers.Real) and not isinstance(obj, bool):
        return complex(float(obj))
    if (
        isinstance(obj, (list, tuple))
        and len(obj) == 2
        and all(isinstance(x, numbers.Real) and not isinstance(x, bool) for x in obj)
    ):
        return complex(float(obj[0]), float(obj[1]))
    raise ScenarioFormatError(path, f"expected a complex number [re, im], got {obj!r}")


def decode_vector(obj: Any, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ScenarioFormatError(path, "expected a non-empty list of [re, im] entries")
    v = np.array([decode_complex(z, f"{path}[{i}]") for i, z in enumerate(obj)], dtype=np.complex128)
    v.setflags(write=False)
    return v


def decode_matrix(obj: Any, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ScenarioFormatError(path, "expected a non-empty list of rows")
    rows = [decode_vector(r, f"{path}[{i}]") for i, r in enumerate(obj)]
    if len({len(r) for r in rows}) != 1:
        raise ScenarioFormatError(path, "rows have different lengths")
    m = np.array(rows, dtype=np.complex128)
    m.setflags(write=False)
    return m


def digest(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
