"""Small dense complex linear algebra.

Vectors and matrices are plain ``numpy.complex128`` arrays.  Everything here is
a pure function; inputs are never mutated and outputs are marked read-only so
they can be shared between workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonOrthonormalBasis,
    NonUnitary,
    NotOrthonormal,
    Overconstrained,
)


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-10
    norm: float = 1e-12
    zero: float = 1e-9
    zero_guard: float = 1e-6
    residual: float = 1e-8  # Gram-Schmidt candidates below this are skipped

    def as_dict(self) -> dict:
        return {
            "tol_unitary": self.unitary,
            "tol_norm": self.norm,
            "tol_zero": self.zero,
            "tol_zero_guard": self.zero_guard,
            "tol_residual": self.residual,
        }


DEFAULT_TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def vector(entries: Iterable[complex]) -> np.ndarray:
    v = np.array(list(entries), dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch("a vector needs a non-empty 1-d list of entries")
    return _frozen(v)


def matrix(rows: Iterable[Iterable[complex]]) -> np.ndarray:
    m = np.array([list(r) for r in rows], dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch("a matrix needs a non-empty rectangular list of rows")
    return _frozen(m)


def basis_vector(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return _frozen(v)


def dagger(m: np.ndarray) -> np.ndarray:
    return _frozen(np.conj(np.asarray(m)).T.copy())


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugate-linear in the first slot."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"inner product of shapes {a.shape} and {b.shape}")
    return complex(np.vdot(a, b))


def norm_defect(v: np.ndarray) -> float:
    return abs(float(np.vdot(v, v).real) - 1.0)


def is_normalized(v: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    return norm_defect(v) <= tol.norm


def unitarity_defect(u: np.ndarray) -> float:
    """max-entry norm of U^dagger U - I."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return float("inf")
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    return unitarity_defect(u) <= tol.unitary


def gram_defect(vectors: Sequence[np.ndarray]) -> float:
    g = np.array([[np.vdot(a, b) for b in vectors] for a in vectors])
    return float(np.max(np.abs(g - np.eye(len(vectors)))))


def apply_unitary(u: np.ndarray, v: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 2 or u.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {u.shape} matrix to vector of length {v.shape[0]}")
    if not is_unitary(u, tol):
        raise NonUnitary(f"unitarity defect {unitarity_defect(u):.3e}")
    return _frozen(u @ v)


def born_probabilities(
    state: np.ndarray, basis: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL
) -> list[float]:
    """|<basis_k|state>|^2 for an orthonormal, complete basis."""
    state = np.asarray(state)
    dim = state.shape[0]
    if len(basis) != dim or any(np.shape(b) != (dim,) for b in basis):
        raise DimensionMismatch(f"basis of {len(basis)} vectors for dimension {dim}")
    if gram_defect(basis) > tol.unitary:
        raise NonOrthonormalBasis(f"Gram defect {gram_defect(basis):.3e}")
    if not is_normalized(state, tol):
        raise DimensionMismatch(f"state is not normalized (defect {norm_defect(state):.3e})")
    probs = [abs(np.vdot(b, state)) ** 2 for b in basis]
    return [min(max(float(p), 0.0), 1.0) for p in probs]


def fixes_state(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """True when U v = e^{i theta} v for some global phase."""
    w = np.asarray(u) @ np.asarray(v)
    overlap = abs(np.vdot(v, w))
    return abs(overlap - 1.0) <= tol and float(np.linalg.norm(w - np.vdot(v, w) * v)) <= np.sqrt(tol)


def complete_to_unitary(
    fixed_columns: Mapping[int, np.ndarray] | Sequence[tuple[int, np.ndarray]],
    dim: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Unitary matrix whose listed columns are the given vectors.

    Free columns are filled in ascending index order from standard basis
    candidates e_0, e_1, ... by modified Gram-Schmidt against everything
    already placed.  The result depends only on the input, so repeated calls
    are bit-identical.
    """
    items = sorted(dict(fixed_columns).items())
    if dim is None:
        if not items:
            raise DimensionMismatch("dimension unknown without fixed columns")
        dim = len(items[0][1])
    if len(items) > dim:
        raise Overconstrained(f"{len(items)} fixed columns for dimension {dim}")
    cols = []
    for idx, v in items:
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != (dim,):
            raise DimensionMismatch(f"column {idx} has shape {v.shape}, expected ({dim},)")
        if not 0 <= idx < dim:
            raise Overconstrained(f"column index {idx} outside 0..{dim - 1}")
        cols.append(v)
    if cols and gram_defect(cols) > tol.unitary:
        raise NotOrthonormal(f"fixed columns have Gram defect {gram_defect(cols):.3e}")

    placed = list(cols)
    free = []
    for k in range(dim):
        if len(placed) == dim:
            break
        w = np.zeros(dim, dtype=np.complex128)
        w[k] = 1.0
        for _ in range(2):  # second pass re-orthogonalizes
            for q in placed:
                w = w - np.vdot(q, w) * q
        r = np.linalg.norm(w)
        if r < tol.residual:
            continue
        w = w / r
        placed.append(w)
        free.append(w)

    out = np.zeros((dim, dim), dtype=np.complex128)
    fixed_idx = {idx for idx, _ in items}
    for idx, v in items:
        out[:, idx] = v
    free_iter = iter(free)
    for j in range(dim):
        if j not in fixed_idx:
            out[:, j] = next(free_iter)
    return _frozen(out)


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return _frozen(v / np.linalg.norm(v))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return _frozen(q * (d / np.abs(d)))
