"""The unitary/measurement construction that forces non-overlapping supports.

Given |phi> = |a0> and |psi> = alpha|a0> + beta|a1> in dimension N + 1, we
build a family U[m] fixing |a0> and a measurement basis {|d_n>} such that for
every n either <d_n|a0> = 0 or <d_n|U[n] psi> = 0.  Everything is expressed
in the d-basis, which is the standard basis of the working coordinates.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    ConditionViolated,
    DimensionMismatch,
    Infeasible,
    OutOfRange,
    PreconditionNotApplicable,
)
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    basis_vector,
    complete_to_unitary,
    dagger,
    fixes_state,
    is_normalized,
    unitarity_defect,
)
from .scenario import Measurement, QuantumScenario, standard_measurement, tensor_scenario

BOUND_NOTE = (
    "feasibility region is alpha^2 <= (N-1)/N, from M = ceil(1/beta^2) <= N; "
    "the source text states the finite-N bound with the opposite inequality"
)


def smallest_M(beta: float) -> int:
    """Smallest integer M with M >= 1/beta^2, snapping to k when 1/beta^2 is within 1e-12 of k."""
    if not 0 < beta <= 1:
        raise OutOfRange(f"beta must lie in (0, 1], got {beta!r}")
    inv = 1.0 / (beta * beta)
    k = round(inv)
    if abs(inv - k) <= 1e-12:
        return max(int(k), 1)
    return math.ceil(inv)


def feasible_overlap_bound(N: int | float) -> float:
    """Largest |<phi|psi>|^2 for which the construction fits in dimension N + 1."""
    if N == math.inf:
        return 1.0
    if N < 1:
        raise OutOfRange("N must be >= 1")
    return (N - 1) / N


@dataclass(frozen=True)
class DisjunctRecord:
    n: int
    kind: str  # "first", "second" or "both"
    a0_overlap: float  # |<d_n|a0>|
    c_overlap: float  # |<d_n|U[n] psi>|


@dataclass(frozen=True)
class ConditionCertificate:
    per_n: tuple[DisjunctRecord, ...]
    notes: tuple[str, ...] = (BOUND_NOTE,)

    def kinds(self) -> list[str]:
        return [r.kind for r in self.per_n]

    def to_dict(self) -> dict:
        return {
            "per_n": [
                {"n": r.n, "disjunct": r.kind, "a0_overlap": r.a0_overlap, "c_overlap": r.c_overlap}
                for r in self.per_n
            ],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class UnitaryConstruction:
    alpha: float
    beta: float
    N: int
    M: int
    a0: np.ndarray
    a1: np.ndarray
    d_basis: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]
    b_bar: tuple[np.ndarray, ...]
    c: tuple[np.ndarray, ...]
    U: tuple[np.ndarray, ...]
    gamma: float
    delta: float
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def phi(self) -> np.ndarray:
        return self.a0

    @property
    def psi(self) -> np.ndarray:
        return self.alpha * self.a0 + self.beta * self.a1

    def scenario(self) -> QuantumScenario:
        """phi, psi; family U with members m=0..N; measurement D in the d-basis."""
        meas = Measurement(tuple(f"D{n}" for n in range(self.dim)), self.d_basis)
        return QuantumScenario(
            dim=self.dim,
            preparations={"phi": self.phi, "psi": self.psi},
            families={"U": {f"m={m}": u for m, u in enumerate(self.U)}},
            measurements={"D": meas},
            tol=self.tol,
        )

    def invariant_defects(self) -> dict[str, float]:
        psi = self.psi
        return {
            "unitarity": max(unitarity_defect(u) for u in self.U),
            "fixes_a0": max(float(np.max(np.abs(u @ self.a0 - self.a0))) for u in self.U),
            "a0_b_orthogonality": max(abs(np.vdot(self.a0, bm)) for bm in self.b),
            "b_norm": max(abs(np.linalg.norm(bm) - 1) for bm in self.b),
            "c_is_U_psi": max(float(np.max(np.abs(u @ psi - cm))) for u, cm in zip(self.U, self.c)),
            "c_decomposition": max(
                float(np.max(np.abs(cm - (self.alpha * self.a0 + self.beta * bm)))) for cm, bm in zip(self.c, self.b)
            ),
        }

    def to_dict(self, certificate: ConditionCertificate | None = None) -> dict:
        doc = {
            "schema_version": io.SCHEMA_VERSION,
            "alpha": self.alpha,
            "beta": self.beta,
            "N": self.N,
            "M": self.M,
            "gamma": self.gamma,
            "delta": self.delta,
            "a0": io.encode_vector(self.a0),
            "a1": io.encode_vector(self.a1),
            "d_basis": [io.encode_vector(v) for v in self.d_basis],
            "b": [io.encode_vector(v) for v in self.b],
            "b_bar": [io.encode_vector(v) for v in self.b_bar],
            "c": [io.encode_vector(v) for v in self.c],
            "U": [io.encode_matrix(u) for u in self.U],
        }
        if certificate is not None:
            doc["certificate"] = certificate.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict, tol: Tolerances = DEFAULT_TOL) -> "UnitaryConstruction":
        vecs = lambda key: tuple(io.decode_vector(v, f"{key}[{i}]") for i, v in enumerate(doc[key]))
        return cls(
            alpha=float(doc["alpha"]),
            beta=float(doc["beta"]),
            N=int(doc["N"]),
            M=int(doc["M"]),
            a0=io.decode_vector(doc["a0"], "a0"),
            a1=io.decode_vector(doc["a1"], "a1"),
            d_basis=vecs("d_basis"),
            b=vecs("b"),
            b_bar=vecs("b_bar"),
            c=vecs("c"),
            U=tuple(io.decode_matrix(u, f"U[{i}]") for i, u in enumerate(doc["U"])),
            gamma=float(doc["gamma"]),
            delta=float(doc["delta"]),
            tol=tol,
        )

    def save(self, path: str | Path, certificate: ConditionCertificate | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(certificate), indent=2))


def _frozen(v: np.ndarray) -> np.ndarray:
    v.setflags(write=False)
    return v


def build_construction(alpha: float, beta: float, N: int, tol: Tolerances = DEFAULT_TOL) -> UnitaryConstruction:
    if alpha < 0 or beta <= 0 or abs(alpha * alpha + beta * beta - 1) > 1e-12:
        raise OutOfRange(f"need alpha >= 0, beta > 0 and alpha^2 + beta^2 = 1 (got {alpha}, {beta})")
    if N < 1:
        raise OutOfRange("N must be >= 1")
    M = smallest_M(beta)
    if M == 1 and alpha > 0:
        M = 2  # 1/beta^2 snapped to 1 although alpha is not exactly 0
    if M > N:
        raise Infeasible(M, N)
    dim = N + 1

    a0 = np.zeros(dim, dtype=np.complex128)
    a0[1 : M + 1] = 1 / math.sqrt(M)

    if M == 1:
        # orthogonal pair: psi = d0 already separates, no b-bar needed
        gamma = beta
        x = 0.0
    else:
        x = alpha * math.sqrt(M) / (M - 1)
        g2 = beta * beta - alpha * alpha / (M - 1)
        if g2 < -1e-12:
            raise AssertionError(f"negative gamma^2 {g2} despite M >= 1/beta^2")
        gamma = math.sqrt(max(g2, 0.0))
    delta = gamma / beta

    c_hole = []
    for m in range(1, M + 1):
        cm = np.zeros(dim, dtype=np.complex128)
        cm[0] = gamma
        cm[1 : M + 1] = x
        cm[m] = 0.0
        c_hole.append(cm)
    c = [c_hole[0]] + c_hole + [c_hole[0]] * (N - M)  # m = 0 and m > M reuse m = 1
    b = [(cm - alpha * a0) / beta for cm in c]
    if M == 1:
        b_bar: list[np.ndarray] = []
    else:
        d0 = basis_vector(dim, 0)
        b_bar = [math.sqrt(M - 1) * (cm - gamma * d0 - alpha * a0) / alpha for cm in c]

    a_basis = complete_to_unitary({0: a0}, dim, tol)
    a1 = np.array(a_basis[:, 1])
    P_dag = dagger(complete_to_unitary({0: a0, 1: a1}, dim, tol))
    U = []
    for bm in b:
        Q = complete_to_unitary({0: a0, 1: bm}, dim, tol)
        U.append(_frozen(Q @ P_dag))

    con = UnitaryConstruction(
        alpha=float(alpha),
        beta=float(beta),
        N=int(N),
        M=int(M),
        a0=_frozen(a0),
        a1=_frozen(a1),
        d_basis=tuple(basis_vector(dim, n) for n in range(dim)),
        b=tuple(_frozen(v) for v in b),
        b_bar=tuple(_frozen(v) for v in b_bar),
        c=tuple(_frozen(v) for v in c),
        U=tuple(U),
        gamma=float(gamma),
        delta=float(delta),
        tol=tol,
    )
    bad = {k: v for k, v in con.invariant_defects().items() if v > tol.unitary}
    if bad:
        raise AssertionError(f"construction invariants violated: {bad}")
    return con


def verify_condition(construction: UnitaryConstruction) -> ConditionCertificate:
    """Certify, for every n, which side of the either-or condition holds."""
    con = construction
    tol = con.tol.zero
    psi = con.psi
    records = []
    for n in range(con.dim):
        d = con.d_basis[n]
        first = abs(np.vdot(d, con.a0))
        second = abs(np.vdot(d, con.U[n] @ psi))
        ok1, ok2 = first <= tol, second <= tol
        if not (ok1 or ok2):
            raise ConditionViolated(n, float(first), float(second))
        kind = "both" if ok1 and ok2 else ("first" if ok1 else "second")
        records.append(DisjunctRecord(n, kind, float(first), float(second)))
    return ConditionCertificate(tuple(records))


def verify_bundle(doc: dict, tol: Tolerances = DEFAULT_TOL) -> ConditionCertificate:
    """Re-verify a serialized construction from its stored vectors and matrices."""
    con = UnitaryConstruction.from_dict(doc, tol)
    bad = {k: v for k, v in con.invariant_defects().items() if v > tol.unitary}
    if bad:
        raise ConditionViolated(-1, max(bad.values()), 0.0)
    return verify_condition(con)


@dataclass(frozen=True)
class RestrictedProtocol:
    """W, then W U[m] W^dagger, then W^dagger, then measure in the d-basis."""

    W: np.ndarray
    U_tilde: tuple[np.ndarray, ...]
    phi: np.ndarray
    zero_state: np.ndarray
    d_basis: tuple[np.ndarray, ...]

    @property
    def W_dag(self) -> np.ndarray:
        return dagger(self.W)

    def steps(self, m: int) -> list[np.ndarray]:
        return [self.W, self.U_tilde[m], self.W_dag]

    def composite(self, m: int) -> np.ndarray:
        return self.W_dag @ self.U_tilde[m] @ self.W

    def statistics(self, state: np.ndarray, m: int) -> np.ndarray:
        out = state
        for step in self.steps(m):
            out = step @ out
        return np.array([abs(np.vdot(d, out)) ** 2 for d in self.d_basis])


def transport_unitary(phi: np.ndarray, zero_state: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Canonical unitary W with W phi = zero_state."""
    if phi.shape != zero_state.shape:
        raise DimensionMismatch("phi and zero_state differ in dimension")
    if np.array_equal(phi, zero_state):
        return _frozen(np.eye(len(phi), dtype=np.complex128))
    dim = len(phi)
    Z = complete_to_unitary({0: zero_state}, dim, tol)
    P = complete_to_unitary({0: phi}, dim, tol)
    return _frozen(Z @ dagger(P))


def build_restricted_protocol(
    phi: np.ndarray, zero_state: np.ndarray, construction: UnitaryConstruction
) -> RestrictedProtocol:
    con = construction
    phi = np.asarray(phi, dtype=np.complex128)
    zero_state = np.asarray(zero_state, dtype=np.complex128)
    if phi.shape != (con.dim,) or zero_state.shape != (con.dim,):
        raise DimensionMismatch(f"states must have dimension {con.dim}")
    if not (is_normalized(phi, con.tol) and is_normalized(zero_state, con.tol)):
        raise DimensionMismatch("phi and zero_state must be normalized")
    if not all(fixes_state(u, phi, con.tol.zero) for u in con.U):
        raise PreconditionNotApplicable("the construction's U[m] do not all fix phi")
    W = transport_unitary(phi, zero_state, con.tol)
    Wd = dagger(W)
    U_tilde = tuple(_frozen(W @ u @ Wd) for u in con.U)
    return RestrictedProtocol(W, U_tilde, _frozen(phi.copy()), _frozen(zero_state.copy()), con.d_basis)


def ancilla_scenario(scenario_a: QuantumScenario, ancilla_dim: int, ancilla_state_name: str = "1") -> QuantumScenario:
    """Joint scenario with preparations |x>_A |k>_B for the chosen ancilla basis state k."""
    k = int(ancilla_state_name)
    if not 0 <= k < ancilla_dim:
        raise OutOfRange(f"ancilla state {k} outside 0..{ancilla_dim - 1}")
    anc = QuantumScenario(
        dim=ancilla_dim,
        preparations={ancilla_state_name: basis_vector(ancilla_dim, k)},
        measurements={"B": standard_measurement(ancilla_dim)},
    )
    return tensor_scenario(scenario_a, anc)


# scans ------------------------------------------------------------------------------


def feasibility_row(N: int, alpha2: float) -> dict:
    """Build and certify one grid point; feasible means both succeeded."""
    beta = math.sqrt(1 - alpha2)
    row = {"N": N, "alpha2": alpha2, "M": smallest_M(beta), "feasible": False, "bound": feasible_overlap_bound(N)}
    try:
        verify_condition(build_construction(math.sqrt(alpha2), beta, N))
        row["feasible"] = True
    except Infeasible:
        pass
    return row


def _row_star(args):
    return feasibility_row(*args)


def scan_feasibility(N_values, alpha2_values, workers: int | None = None) -> list[dict]:
    grid = [(N, a2) for N in N_values for a2 in alpha2_values]
    if workers is None:
        workers = int(os.environ.get("ONTICLAB_THREADS", "1"))
    if workers <= 1:
        return [feasibility_row(*p) for p in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_row_star, grid, chunksize=8))


def empirical_boundary(rows: list[dict]) -> dict[int, float | None]:
    """Largest feasible alpha^2 per N."""
    out: dict[int, float | None] = {}
    for r in rows:
        best = out.get(r["N"])
        if r["feasible"] and (best is None or r["alpha2"] > best):
            out[r["N"]] = r["alpha2"]
        else:
            out.setdefault(r["N"], None)
    return out
