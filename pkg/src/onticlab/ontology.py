"""Finite ontological models and the assumption checkers.

All possibilistic reasoning here is exact set arithmetic on ontic labels: a
response, transition or preparation is "possible" iff its stored probability
is strictly positive.  Floating tolerances only enter on the quantum side
(zero structure, whether a unitary fixes a state).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ScenarioFormatError, PreconditionNotApplicable, UnknownName
from .numerics import DEFAULT_TOL, fixes_state
from .scenario import Event, QuantumScenario, tensor_scenario, zero_structure


def _check_distribution(dist: Mapping, labels: Iterable, path: str, tol: float) -> dict:
    labels = set(labels)
    out = {}
    for k, p in dist.items():
        if k not in labels:
            raise ScenarioFormatError(f"{path}.{k}", "unknown label")
        p = float(p)
        if p < 0:
            raise ScenarioFormatError(f"{path}.{k}", f"negative probability {p}")
        out[k] = p
    total = sum(out.values())
    if abs(total - 1.0) > tol:
        raise ScenarioFormatError(path, f"probabilities sum to {total!r}, not 1")
    return out


@dataclass(frozen=True)
class OnticSpace:
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ScenarioFormatError("ontic_states", "ontic space must be non-empty")
        if len(set(self.states)) != len(self.states):
            raise ScenarioFormatError("ontic_states", "labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class EpistemicState:
    distribution: dict[str, float]

    @property
    def support(self) -> frozenset[str]:
        return frozenset(k for k, p in self.distribution.items() if p > 0)

    @classmethod
    def uniform(cls, labels: Iterable[str]) -> "EpistemicState":
        labels = list(labels)
        return cls({k: 1.0 / len(labels) for k in labels})


@dataclass(frozen=True)
class TransitionMap:
    """Stochastic kernel on ontic states; rows that are absent mean "stay put"."""

    kernel: dict[str, dict[str, float]]

    def successors(self, lam: str) -> frozenset[str]:
        row = self.kernel.get(lam)
        if row is None:
            return frozenset([lam])
        return frozenset(k for k, p in row.items() if p > 0)

    def image(self, labels: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for lam in labels:
            out |= self.successors(lam)
        return frozenset(out)

    @classmethod
    def deterministic(cls, mapping: Mapping[str, str]) -> "TransitionMap":
        return cls({a: {b: 1.0} for a, b in mapping.items()})

    @classmethod
    def identity(cls) -> "TransitionMap":
        return cls({})


@dataclass(frozen=True)
class ResponseFunction:
    xi: dict[str, dict[str, float]]

    def possible(self, lam: str) -> frozenset[str]:
        return frozenset(o for o, p in self.xi.get(lam, {}).items() if p > 0)


@dataclass(frozen=True)
class OntologicalModel:
    space: OnticSpace
    prep_map: dict[str, EpistemicState]
    trans_map: dict[str, TransitionMap] = field(default_factory=dict)
    resp_map: dict[str, ResponseFunction] = field(default_factory=dict)
    scenario: QuantumScenario | None = None
    lossy: bool = False  # allow response rows that are identically zero (no outcome at all)

    def __post_init__(self):
        labels = self.space.states
        tol = DEFAULT_TOL.norm
        for name, st in self.prep_map.items():
            _check_distribution(st.distribution, labels, f"preparations.{name}", tol)
        for mid, tm in self.trans_map.items():
            for lam, row in tm.kernel.items():
                if lam not in labels:
                    raise ScenarioFormatError(f"transitions.{mid}.{lam}", "unknown label")
                _check_distribution(row, labels, f"transitions.{mid}.{lam}", tol)
        for meas, rf in self.resp_map.items():
            for lam in labels:
                row = rf.xi.get(lam)
                if row is None:
                    raise ScenarioFormatError(f"responses.{meas}.{lam}", "missing response row")
                total = sum(row.values())
                if self.lossy and total == 0:
                    continue
                if abs(total - 1.0) > tol or any(p < 0 for p in row.values()):
                    raise ScenarioFormatError(f"responses.{meas}.{lam}", "not a probability distribution")
        sc = self.scenario
        if sc is None:
            return
        for name in self.prep_map:
            if name not in sc.preparations:
                raise ScenarioFormatError(f"preparations.{name}", "not a preparation of the scenario")
        members = set(sc.member_ids())
        for mid in self.trans_map:
            if mid not in members:
                raise ScenarioFormatError(f"transitions.{mid}", "not a member of the scenario")
        for mid in members - set(self.trans_map):
            raise ScenarioFormatError(f"transitions.{mid}", "scenario member has no transition map")
        for meas, rf in self.resp_map.items():
            if meas not in sc.measurements:
                raise ScenarioFormatError(f"responses.{meas}", "not a measurement of the scenario")
            outcomes = set(sc.measurements[meas].outcomes)
            for lam, row in rf.xi.items():
                bad = set(row) - outcomes
                if bad:
                    raise ScenarioFormatError(f"responses.{meas}.{lam}", f"unknown outcomes {sorted(bad)}")
        for meas in set(sc.measurements) - set(self.resp_map):
            raise ScenarioFormatError(f"responses.{meas}", "scenario measurement has no response function")

    # lookups -------------------------------------------------------------

    def support(self, preparation: str) -> frozenset[str]:
        try:
            return self.prep_map[preparation].support
        except KeyError:
            raise UnknownName(f"unknown preparation {preparation!r}") from None

    def transition(self, member: str | None) -> TransitionMap:
        if member is None:
            return TransitionMap.identity()
        try:
            return self.trans_map[member]
        except KeyError:
            raise UnknownName(f"unknown family member {member!r}") from None

    def response(self, measurement: str) -> ResponseFunction:
        try:
            return self.resp_map[measurement]
        except KeyError:
            raise UnknownName(f"unknown measurement {measurement!r}") from None

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "ontic_states": list(self.space.states),
            "preparations": {k: dict(v.distribution) for k, v in self.prep_map.items()},
            "transitions": {k: {a: dict(r) for a, r in v.kernel.items()} for k, v in self.trans_map.items()},
            "responses": {k: {a: dict(r) for a, r in v.xi.items()} for k, v in self.resp_map.items()},
        }
        if self.lossy:
            doc["lossy"] = True
        if self.scenario is not None:
            doc["scenario"] = self.scenario.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict, scenario: QuantumScenario | None = None) -> "OntologicalModel":
        if not isinstance(doc, dict) or "ontic_states" not in doc:
            raise ScenarioFormatError("ontic_states", "missing")
        if scenario is None and "scenario" in doc:
            scenario = QuantumScenario.from_dict(doc["scenario"])
        space = OnticSpace(tuple(str(s) for s in doc["ontic_states"]))
        preps = {k: EpistemicState(dict(v)) for k, v in doc.get("preparations", {}).items()}
        trans = {k: TransitionMap({a: dict(r) for a, r in v.items()}) for k, v in doc.get("transitions", {}).items()}
        resps = {k: ResponseFunction({a: dict(r) for a, r in v.items()}) for k, v in doc.get("responses", {}).items()}
        return cls(space, preps, trans, resps, scenario, bool(doc.get("lossy", False)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "OntologicalModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


# supports --------------------------------------------------------------------


def outcome_support(
    model: OntologicalModel, preparation: str, family_member: str | None, measurement: str, outcome: str
) -> frozenset[str]:
    """Ontic states of the preparation that can lead to ``outcome`` in this context."""
    support = model.support(preparation)
    trans = model.transition(family_member)
    resp = model.response(measurement)
    return frozenset(
        lam for lam in support if any(outcome in resp.possible(mu) for mu in trans.successors(lam))
    )


def supports_overlap(model: OntologicalModel, prep_a: str, prep_b: str) -> frozenset[str]:
    return model.support(prep_a) & model.support(prep_b)


@dataclass(frozen=True)
class PsiOntic:
    kind = "psi-ontic"


@dataclass(frozen=True)
class PsiEpistemic:
    pair: tuple[str, str]
    overlap: frozenset[str]
    kind = "psi-epistemic"


def _same_ray(model: OntologicalModel, a: str, b: str) -> bool:
    sc = model.scenario
    if sc is None or a not in sc.preparations or b not in sc.preparations:
        return False
    return abs(abs(np.vdot(sc.preparations[a], sc.preparations[b])) - 1.0) <= sc.tol.zero


def classify_model(model: OntologicalModel) -> PsiOntic | PsiEpistemic:
    """psi-epistemic iff two preparations of distinct quantum states share an ontic state."""
    for a, b in combinations(model.prep_map, 2):
        if _same_ray(model, a, b):
            continue
        ov = supports_overlap(model, a, b)
        if ov:
            return PsiEpistemic((a, b), ov)
    return PsiOntic()


# assumption checkers ------------------------------------------------------------


@dataclass(frozen=True)
class CompletenessViolation:
    event: Event
    direction: str  # "model-allows-forbidden" or "model-forbids-allowed"


def check_possibilistic_completeness(model: OntologicalModel) -> list[CompletenessViolation]:
    """Empty list iff the model's possible outcomes match the quantum zero structure."""
    sc = model.scenario
    if sc is None:
        raise PreconditionNotApplicable("model is not bound to a scenario")
    zeros = zero_structure(sc)
    violations = []
    for prep in model.prep_map:
        for member, meas in sc.contexts():
            for outcome in sc.measurements[meas].outcomes:
                ev = Event(prep, member, meas, outcome)
                quantum_zero = ev in zeros.entries
                model_empty = not outcome_support(model, prep, member, meas, outcome)
                if quantum_zero and not model_empty:
                    violations.append(CompletenessViolation(ev, "model-allows-forbidden"))
                elif model_empty and not quantum_zero:
                    violations.append(CompletenessViolation(ev, "model-forbids-allowed"))
    return violations


@dataclass(frozen=True)
class IndifferenceCheck:
    ok: bool
    witness: str | None = None
    image: frozenset[str] = frozenset()

    def __bool__(self) -> bool:
        return self.ok


def check_ontic_indifference(
    model: OntologicalModel, family_member: str, preparation: str, set_preserving_only: bool = False
) -> IndifferenceCheck:
    """Does the member's implementation leave the preparation's support untouched?

    The default is the pointwise reading (every supported ontic state is mapped
    to itself with certainty).  ``set_preserving_only`` relaxes this to "the
    support is mapped onto itself".
    """
    sc = model.scenario
    if sc is not None:
        u = sc.member(family_member)
        if not fixes_state(u, sc.preparation(preparation), sc.tol.zero):
            raise PreconditionNotApplicable(
                f"{family_member!r} does not leave preparation {preparation!r} invariant"
            )
    support = model.support(preparation)
    trans = model.transition(family_member)
    if set_preserving_only:
        image = trans.image(support)
        if image == support:
            return IndifferenceCheck(True)
        moved = sorted(image - support) or sorted(support - image)
        return IndifferenceCheck(False, moved[0], image)
    for lam in model.space.states:
        if lam in support and trans.successors(lam) != frozenset([lam]):
            return IndifferenceCheck(False, lam, trans.successors(lam))
    return IndifferenceCheck(True)


def indifference_violations(model: OntologicalModel, set_preserving_only: bool = False) -> list[tuple[str, str, str]]:
    """(member, preparation, witness) for every applicable pair that fails."""
    sc = model.scenario
    if sc is None:
        raise PreconditionNotApplicable("model is not bound to a scenario")
    out = []
    for member in sc.member_ids():
        for prep in model.prep_map:
            if not fixes_state(sc.member(member), sc.preparation(prep), sc.tol.zero):
                continue
            res = check_ontic_indifference(model, member, prep, set_preserving_only)
            if not res:
                out.append((member, prep, res.witness))
    return out


# products -----------------------------------------------------------------------

SEP = "*"


def _pair(a: str, b: str) -> str:
    return f"{a}{SEP}{b}"


def product_embed(model_a: OntologicalModel, model_b: OntologicalModel) -> OntologicalModel:
    """Cartesian-product model with factorized preparations and local dynamics."""
    states = tuple(_pair(a, b) for a in model_a.space.states for b in model_b.space.states)
    preps = {}
    for x, sx in model_a.prep_map.items():
        for y, sy in model_b.prep_map.items():
            preps[_pair(x, y)] = EpistemicState(
                {_pair(a, b): pa * pb for a, pa in sx.distribution.items() for b, pb in sy.distribution.items() if pa * pb > 0}
            )
    trans = {}
    for mid, tm in model_a.trans_map.items():
        kernel = {}
        for a in model_a.space.states:
            row = tm.kernel.get(a, {a: 1.0})
            for b in model_b.space.states:
                kernel[_pair(a, b)] = {_pair(a2, b): p for a2, p in row.items()}
        trans[f"A:{mid}"] = TransitionMap(kernel)
    for mid, tm in model_b.trans_map.items():
        kernel = {}
        for b in model_b.space.states:
            row = tm.kernel.get(b, {b: 1.0})
            for a in model_a.space.states:
                kernel[_pair(a, b)] = {_pair(a, b2): p for b2, p in row.items()}
        trans[f"B:{mid}"] = TransitionMap(kernel)
    resps = {}
    for ka, ra in model_a.resp_map.items():
        for kb, rb in model_b.resp_map.items():
            xi = {}
            for a in model_a.space.states:
                for b in model_b.space.states:
                    xi[_pair(a, b)] = {
                        _pair(oa, ob): pa * pb
                        for oa, pa in ra.xi[a].items()
                        for ob, pb in rb.xi[b].items()
                    }
            resps[_pair(ka, kb)] = ResponseFunction(xi)
    scenario = None
    if model_a.scenario is not None and model_b.scenario is not None:
        scenario = tensor_scenario(model_a.scenario, model_b.scenario, sep=SEP)
    return OntologicalModel(OnticSpace(states), preps, trans, resps, scenario, model_a.lossy or model_b.lossy)


def project_support(labels: Iterable[str], factor: int) -> frozenset[str]:
    """Project product labels ``a*b`` onto factor 0 (A) or 1 (B)."""
    return frozenset(lab.split(SEP, 1)[factor] for lab in labels)


def is_separable(product: OntologicalModel, model_a: OntologicalModel, model_b: OntologicalModel) -> bool:
    """Every product preparation's support is the cartesian product of the factor supports."""
    for x in model_a.prep_map:
        for y in model_b.prep_map:
            expected = {_pair(a, b) for a in model_a.support(x) for b in model_b.support(y)}
            if product.support(_pair(x, y)) != expected:
                return False
    return True


def factor_overlap_from_product(
    product: OntologicalModel,
    model_a: OntologicalModel,
    model_b: OntologicalModel,
    phi: str,
    psi: str,
    ancilla: str,
) -> frozenset[str]:
    """Overlap of the A supports of phi and psi, recovered from the product model.

    Requires ontic product separability; with it the product overlap equals
    (overlap_A) x support(ancilla), so its A-projection is exactly overlap_A.
    """
    if not is_separable(product, model_a, model_b):
        raise PreconditionNotApplicable("product supports do not factorize")
    if not model_b.support(ancilla):
        raise PreconditionNotApplicable("ancilla support is empty")
    joint = supports_overlap(product, _pair(phi, ancilla), _pair(psi, ancilla))
    return project_support(joint, 0)
