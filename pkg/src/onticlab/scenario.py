"""Finite-dimensional quantum scenarios and their possibilistic (zero) structure.

A scenario is a set of named preparations, finite families of unitaries
(members are addressed by string ids such as ``"phi=0"`` or ``"m=3"``), and
maximal projective measurements.  A run is always prepare -> one family
member -> measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from . import io
from .errors import AmbiguousZero, DimensionMismatch, ScenarioFormatError, UnknownName
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    born_probabilities,
    gram_defect,
    norm_defect,
    unitarity_defect,
)


@dataclass(frozen=True)
class Measurement:
    outcomes: tuple[str, ...]
    basis: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "basis", tuple(np.asarray(b, dtype=np.complex128) for b in self.basis))


class Event(NamedTuple):
    preparation: str
    member: str | None
    measurement: str
    outcome: str


@dataclass(frozen=True)
class QuantumScenario:
    dim: int
    preparations: dict[str, np.ndarray] = field(default_factory=dict)
    families: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    measurements: dict[str, Measurement] = field(default_factory=dict)
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Raise ScenarioFormatError naming the first violated invariant."""
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ScenarioFormatError("dim", f"must be a positive integer, got {self.dim!r}")
        for name, v in self.preparations.items():
            path = f"preparations.{name}"
            if np.shape(v) != (self.dim,):
                raise ScenarioFormatError(path, f"length {np.shape(v)} != dim {self.dim}")
            if norm_defect(v) > self.tol.norm:
                raise ScenarioFormatError(path, f"not normalized (defect {norm_defect(v):.3e})")
        seen: dict[str, str] = {}
        for fam, members in self.families.items():
            for mid, u in members.items():
                path = f"families.{fam}.{mid}"
                if mid in seen:
                    raise ScenarioFormatError(path, f"member id also used in family {seen[mid]!r}")
                seen[mid] = fam
                if np.shape(u) != (self.dim, self.dim):
                    raise ScenarioFormatError(path, f"shape {np.shape(u)} != ({self.dim}, {self.dim})")
                if unitarity_defect(u) > self.tol.unitary:
                    raise ScenarioFormatError(path, f"not unitary (defect {unitarity_defect(u):.3e})")
        for name, meas in self.measurements.items():
            path = f"measurements.{name}"
            if len(meas.outcomes) != self.dim or len(meas.basis) != self.dim:
                raise ScenarioFormatError(path, "a maximal measurement needs dim outcomes and dim basis vectors")
            if len(set(meas.outcomes)) != len(meas.outcomes):
                raise ScenarioFormatError(f"{path}.outcomes", "outcome labels must be distinct")
            for i, b in enumerate(meas.basis):
                if np.shape(b) != (self.dim,):
                    raise ScenarioFormatError(f"{path}.basis[{i}]", "wrong length")
            if gram_defect(meas.basis) > self.tol.unitary:
                raise ScenarioFormatError(f"{path}.basis", f"not orthonormal (Gram defect {gram_defect(meas.basis):.3e})")

    # lookups -------------------------------------------------------------

    def member_ids(self) -> list[str]:
        return [mid for members in self.families.values() for mid in members]

    def member(self, member_id: str | None) -> np.ndarray:
        if member_id is None:
            return np.eye(self.dim, dtype=np.complex128)
        for members in self.families.values():
            if member_id in members:
                return members[member_id]
        raise UnknownName(f"unknown family member {member_id!r}")

    def family_of(self, member_id: str) -> str:
        for fam, members in self.families.items():
            if member_id in members:
                return fam
        raise UnknownName(f"unknown family member {member_id!r}")

    def preparation(self, name: str) -> np.ndarray:
        try:
            return self.preparations[name]
        except KeyError:
            raise UnknownName(f"unknown preparation {name!r}") from None

    def measurement(self, name: str) -> Measurement:
        try:
            return self.measurements[name]
        except KeyError:
            raise UnknownName(f"unknown measurement {name!r}") from None

    def contexts(self) -> Iterator[tuple[str | None, str]]:
        """All (member, measurement) pairs; member None when there are no families."""
        members: list[str | None] = self.member_ids() or [None]
        for m in members:
            for meas in self.measurements:
                yield m, meas

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": io.SCHEMA_VERSION,
            "dim": self.dim,
            "preparations": {k: io.encode_vector(v) for k, v in self.preparations.items()},
            "families": {
                f: {m: io.encode_matrix(u) for m, u in ms.items()} for f, ms in self.families.items()
            },
            "measurements": {
                k: {"outcomes": list(m.outcomes), "basis": [io.encode_vector(b) for b in m.basis]}
                for k, m in self.measurements.items()
            },
        }

    @classmethod
    def from_dict(cls, doc: dict, tol: Tolerances = DEFAULT_TOL) -> "QuantumScenario":
        if not isinstance(doc, dict):
            raise ScenarioFormatError("$", "scenario document must be an object")
        if "dim" not in doc:
            raise ScenarioFormatError("dim", "missing")
        preps = {
            k: io.decode_vector(v, f"preparations.{k}") for k, v in _obj(doc, "preparations").items()
        }
        fams = {}
        for f, ms in _obj(doc, "families").items():
            if not isinstance(ms, dict):
                raise ScenarioFormatError(f"families.{f}", "expected an object of members")
            fams[f] = {m: io.decode_matrix(u, f"families.{f}.{m}") for m, u in ms.items()}
        meas = {}
        for k, spec in _obj(doc, "measurements").items():
            path = f"measurements.{k}"
            if not isinstance(spec, dict) or "outcomes" not in spec or "basis" not in spec:
                raise ScenarioFormatError(path, "expected {'outcomes': [...], 'basis': [...]}")
            if not isinstance(spec["basis"], list):
                raise ScenarioFormatError(f"{path}.basis", "expected a list of vectors")
            basis = [io.decode_vector(b, f"{path}.basis[{i}]") for i, b in enumerate(spec["basis"])]
            meas[k] = Measurement(tuple(str(o) for o in spec["outcomes"]), tuple(basis))
        return cls(dim=doc["dim"], preparations=preps, families=fams, measurements=meas, tol=tol)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path, tol: Tolerances = DEFAULT_TOL) -> "QuantumScenario":
        return cls.from_dict(json.loads(Path(path).read_text()), tol)


def _obj(doc: dict, key: str) -> dict:
    val = doc.get(key, {})
    if not isinstance(val, dict):
        raise ScenarioFormatError(key, "expected an object")
    return val


@dataclass(frozen=True)
class ZeroStructure:
    """Events whose quantum probability is zero (within tol_zero)."""

    entries: frozenset[Event]

    def triples(self) -> set[tuple[str, str | None, str]]:
        return {(e.preparation, e.member, e.outcome) for e in self.entries}

    def __contains__(self, item) -> bool:
        item = tuple(item)
        if len(item) == 4:
            return Event(*item) in self.entries
        return item in self.triples()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries, key=lambda e: tuple(str(x) for x in e)))


def _raw_probabilities(scenario: QuantumScenario, preparation: str, member: str | None, measurement: str):
    state = scenario.member(member) @ scenario.preparation(preparation)
    meas = scenario.measurement(measurement)
    return [(label, float(abs(np.vdot(b, state)) ** 2)) for label, b in zip(meas.outcomes, meas.basis)]


def evaluate(
    scenario: QuantumScenario, preparation: str, family_member: str | None, measurement: str
) -> list[tuple[str, float]]:
    """Outcome probabilities for prepare -> member -> measure."""
    state = scenario.preparation(preparation)
    u = scenario.member(family_member)
    meas = scenario.measurement(measurement)
    if u.shape[1] != state.shape[0]:
        raise DimensionMismatch("member and preparation dimensions differ")
    probs = born_probabilities(u @ state, meas.basis, scenario.tol)
    return list(zip(meas.outcomes, probs))


def zero_structure(scenario: QuantumScenario, tol: Tolerances | None = None) -> ZeroStructure:
    tol = tol or scenario.tol
    zeros = set()
    for prep in scenario.preparations:
        for member, meas in scenario.contexts():
            for label, p in _raw_probabilities(scenario, prep, member, meas):
                ev = Event(prep, member, meas, label)
                if p <= tol.zero:
                    zeros.add(ev)
                elif p < tol.zero_guard:
                    raise AmbiguousZero(ev, p)
    return ZeroStructure(frozenset(zeros))


def possible_outcomes(
    scenario: QuantumScenario, zeros: ZeroStructure, preparation: str, member: str | None, measurement: str
) -> frozenset[str]:
    outcomes = scenario.measurement(measurement).outcomes
    return frozenset(o for o in outcomes if Event(preparation, member, measurement, o) not in zeros.entries)


def tensor_scenario(a: QuantumScenario, b: QuantumScenario, sep: str = "*") -> QuantumScenario:
    """Product scenario: all preparation pairs, local members, product measurements."""
    preps = {f"{x}{sep}{y}": np.kron(u, v) for x, u in a.preparations.items() for y, v in b.preparations.items()}
    fams: dict[str, dict[str, np.ndarray]] = {}
    for f, ms in a.families.items():
        fams[f"A:{f}"] = {f"A:{m}": np.kron(u, np.eye(b.dim)) for m, u in ms.items()}
    for f, ms in b.families.items():
        fams[f"B:{f}"] = {f"B:{m}": np.kron(np.eye(a.dim), u) for m, u in ms.items()}
    meas = {}
    for ka, ma in a.measurements.items():
        for kb, mb in b.measurements.items():
            outcomes = tuple(f"{oa}{sep}{ob}" for oa in ma.outcomes for ob in mb.outcomes)
            basis = tuple(np.kron(x, y) for x in ma.basis for y in mb.basis)
            meas[f"{ka}{sep}{kb}"] = Measurement(outcomes, basis)
    return QuantumScenario(a.dim * b.dim, preps, fams, meas, a.tol)


def standard_measurement(dim: int, prefix: str = "") -> Measurement:
    eye = np.eye(dim, dtype=np.complex128)
    return Measurement(tuple(f"{prefix}{k}" for k in range(dim)), tuple(eye[k] for k in range(dim)))
