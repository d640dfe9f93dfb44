"""Proof traces for non-overlap of ontic supports, and an independent checker.

The engine writes the argument out step by step; ``check_trace`` re-validates
every step against its rule using only earlier steps and quantum facts it
recomputes from the scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import io
from ..construction import UnitaryConstruction, transport_unitary, verify_condition
from ..errors import (
    ConditionNotMet,
    ConditionViolated,
    OnticLabError,
    PreconditionNotApplicable,
    TraceSyntaxError,
)
from ..interfero import MziConfig, build_mzi
from ..numerics import basis_vector, dagger, fixes_state, is_unitary
from ..scenario import Event, QuantumScenario, zero_structure
from .setexpr import Assertion, Atom, Empty, Inter, Union_, entails, inter, parse_assertion, union

RULES = (
    "OnticIndifference",
    "PossibilisticCompleteness",
    "OutcomeCoverage",
    "SetAlgebra",
    "QuantumZero",
    "Transport",
)

ZERO = "zero"


@dataclass(frozen=True)
class Step:
    assertion: str
    rule: str
    refs: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {"assert": self.assertion, "rule": self.rule, "refs": list(self.refs)}


@dataclass(frozen=True)
class ProofTrace:
    steps: tuple[Step, ...]
    conclusion: str
    variant: str = "plain"
    preparations: tuple[str, str] = ("phi", "psi")
    measurement: str = "D"
    branches: dict = field(default_factory=dict)
    transport: dict | None = None  # {"zero_state": vector, "W": matrix} in the restricted variant

    def to_dict(self) -> dict:
        doc = {
            "schema_version": io.SCHEMA_VERSION,
            "variant": self.variant,
            "preparations": list(self.preparations),
            "measurement": self.measurement,
            "steps": [s.to_dict() for s in self.steps],
            "conclusion": self.conclusion,
            "branches": self.branches,
        }
        if self.transport is not None:
            doc["transport"] = {
                "zero_state": io.encode_vector(self.transport["zero_state"]),
                "W": io.encode_matrix(self.transport["W"]),
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ProofTrace":
        transport = None
        if doc.get("transport"):
            transport = {
                "zero_state": io.decode_vector(doc["transport"]["zero_state"], "transport.zero_state"),
                "W": io.decode_matrix(doc["transport"]["W"], "transport.W"),
            }
        return cls(
            steps=tuple(Step(s["assert"], s["rule"], tuple(s.get("refs", ()))) for s in doc["steps"]),
            conclusion=doc["conclusion"],
            variant=doc.get("variant", "plain"),
            preparations=tuple(doc.get("preparations", ("phi", "psi"))),
            measurement=doc.get("measurement", "D"),
            branches=doc.get("branches", {}),
            transport=transport,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def render(self) -> str:
        lines = [f"{i:>3}. {s.assertion}    [{s.rule}{'; ' + ', '.join(map(str, s.refs)) if s.refs else ''}]"
                 for i, s in enumerate(self.steps)]
        lines.append(f"  => {self.conclusion}")
        return "\n".join(lines)


# derivation ------------------------------------------------------------------------------


class _Writer:
    def __init__(self):
        self.steps: list[Step] = []
        self.index: dict[str, int] = {}

    def add(self, assertion: Assertion, rule: str, refs=()) -> int:
        text = str(assertion)
        if text in self.index:
            return self.index[text]
        self.steps.append(Step(text, rule, tuple(refs)))
        self.index[text] = len(self.steps) - 1
        return self.index[text]


def _witnesses(scenario, zeros, phi, psi, measurement, members):
    """For each outcome: a member under which phi or psi has a quantum zero."""
    out = {}
    for o in scenario.measurement(measurement).outcomes:
        found = None
        for kind, prep in (("first", phi), ("second", psi)):
            for m in members:
                if Event(prep, m, measurement, o) in zeros.entries:
                    found = (m, kind)
                    break
            if found:
                break
        if found is None:
            raise ConditionNotMet(f"no member makes outcome {o!r} impossible for {phi!r} or {psi!r}")
        out[o] = found
    return out


def derive_nonoverlap(
    scenario: QuantumScenario | None = None,
    source: UnitaryConstruction | MziConfig | None = None,
    variant: str = "plain",
    phi: str = "phi",
    psi: str = "psi",
    measurement: str | None = None,
    zero_state: np.ndarray | None = None,
) -> ProofTrace:
    """Write out the argument that the supports of ``phi`` and ``psi`` are disjoint.

    With a construction as ``source`` the member used for outcome D_n is
    U[n] and the branch follows its certificate.  Otherwise members are found
    from the scenario's zero structure.  ``variant="restricted"`` only uses
    indifference for a distinguished state reached from ``phi`` by a unitary W.
    """
    if variant not in ("plain", "restricted"):
        raise ValueError(f"unknown variant {variant!r}")
    if scenario is None:
        if isinstance(source, UnitaryConstruction):
            scenario = source.scenario()
        elif isinstance(source, MziConfig):
            scenario = build_mzi(source)
        else:
            raise ValueError("need a scenario or a construction/interferometer source")
    if measurement is None:
        measurement = next(iter(scenario.measurements))
    outcomes = scenario.measurement(measurement).outcomes
    members = scenario.member_ids()
    if not members:
        raise ConditionNotMet("the argument needs at least one transformation family")
    zeros = zero_structure(scenario)

    if isinstance(source, UnitaryConstruction):
        try:
            cert = verify_condition(source)
        except ConditionViolated as exc:
            raise ConditionNotMet(str(exc)) from exc
        wit = {}
        for rec, o in zip(cert.per_n, outcomes):
            kind = "first" if rec.kind in ("first", "both") else "second"
            wit[o] = (f"m={rec.n}", kind)
            prep = phi if kind == "first" else psi
            if Event(prep, f"m={rec.n}", measurement, o) not in zeros.entries:
                raise ConditionNotMet(f"certificate branch for {o} not reflected in the zero structure")
    else:
        fixing = [m for m in members if fixes_state(scenario.member(m), scenario.preparation(phi), scenario.tol.zero)]
        wit = _witnesses(scenario, zeros, phi, psi, measurement, fixing)

    ref = members[0]
    used = {m for m, _ in wit.values()} | {ref}
    if variant == "plain":
        used = {x for m in used for x in scenario.families[scenario.family_of(m)]}
    for m in sorted(used):
        if not fixes_state(scenario.member(m), scenario.preparation(phi), scenario.tol.zero):
            raise PreconditionNotApplicable(f"member {m!r} does not leave {phi!r} unchanged")
    w = _Writer()
    L = lambda p, o=None, m=None: Atom(p, o, m)
    transport = None

    # outcome sets are well defined subsets of the support
    for o in outcomes:
        for m in dict.fromkeys([ref, wit[o][0]]):
            w.add(Assertion(L(phi, o, m), "⊆", L(phi)), "PossibilisticCompleteness")

    # member-independence of the outcome sets
    same: dict[tuple[str, str], int | None] = {}  # (o, m) -> step proving L[phi;o;m] = canonical atom
    if variant == "plain":
        canon = {o: L(phi, o) for o in outcomes}
        for o in outcomes:
            for m in dict.fromkeys([ref, wit[o][0]]):
                same[(o, m)] = w.add(Assertion(L(phi, o, m), "=", L(phi, o)), "OnticIndifference")
    else:
        if zero_state is None:
            zero_state = basis_vector(scenario.dim, 0)
        W = transport_unitary(scenario.preparation(phi), np.asarray(zero_state, dtype=np.complex128))
        transport = {"zero_state": np.asarray(zero_state, dtype=np.complex128), "W": W}
        canon = {o: L(phi, o, ref) for o in outcomes}
        for o in outcomes:
            m = wit[o][0]
            if m == ref:
                same[(o, m)] = None
                continue
            t_m = w.add(Assertion(L(phi, o, m), "⟶", L(ZERO, o, m)), "Transport")
            t_r = w.add(Assertion(L(phi, o, ref), "⟶", L(ZERO, o, ref)), "Transport")
            ri = w.add(Assertion(L(ZERO, o, m), "=", L(ZERO, o, ref)), "OnticIndifference")
            same[(o, m)] = w.add(Assertion(L(phi, o, m), "=", L(phi, o, ref)), "Transport", (t_m, t_r, ri))

    # some outcome always occurs
    cov = w.add(
        Assertion(union(*(L(phi, o, ref) for o in outcomes)), "=", L(phi)), "OutcomeCoverage"
    )
    if variant == "plain":
        cov = w.add(
            Assertion(union(*(canon[o] for o in outcomes)), "=", L(phi)),
            "SetAlgebra",
            (cov, *(same[(o, ref)] for o in outcomes)),
        )

    # each outcome set misses the support of psi
    empties = []
    branches = {}
    for o in outcomes:
        m, kind = wit[o]
        branches[o] = {"member": m, "disjunct": kind}
        link = [same[(o, m)]] if same[(o, m)] is not None else []
        target = Assertion(inter(canon[o], L(psi)), "=", Empty())
        if kind == "first":
            qz = w.add(Assertion(L(phi, o, m), "=", Empty()), "QuantumZero")
            empties.append(w.add(target, "SetAlgebra", (*link, qz)))
        else:
            qz = w.add(Assertion(L(psi, o, m), "=", Empty()), "QuantumZero")
            pc = w.add(
                Assertion(inter(L(phi, o, m), L(psi)), "⊆", L(psi, o, m)), "PossibilisticCompleteness"
            )
            empties.append(w.add(target, "SetAlgebra", (*link, pc, qz)))

    split = union(*(inter(canon[o], L(psi)) for o in outcomes))
    dist = w.add(Assertion(inter(L(phi), L(psi)), "=", split), "SetAlgebra", (cov,))
    final = Assertion(inter(L(phi), L(psi)), "=", Empty())
    w.add(final, "SetAlgebra", (dist, *empties))

    return ProofTrace(
        steps=tuple(w.steps),
        conclusion=str(final),
        variant=variant,
        preparations=(phi, psi),
        measurement=measurement,
        branches=branches,
        transport=transport,
    )


# checking -------------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceCheck:
    ok: bool
    first_invalid: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Invalid(Exception):
    pass


class _Checker:
    def __init__(self, trace: ProofTrace, scenario: QuantumScenario):
        self.trace = trace
        self.sc = scenario
        self.zeros = zero_structure(scenario)
        self.meas = scenario.measurement(trace.measurement)
        self.verified: dict[int, Assertion] = {}
        self.U_tilde = None
        if trace.variant == "restricted":
            t = trace.transport
            if not t:
                raise _Invalid("restricted trace without transport data")
            self.W = np.asarray(t["W"])
            self.zero_state = np.asarray(t["zero_state"])
            if self.W.shape != (scenario.dim, scenario.dim) or not is_unitary(self.W, scenario.tol):
                raise _Invalid("transport W is not a unitary of the scenario dimension")
            Wd = dagger(self.W)
            self.U_tilde = {m: self.W @ scenario.member(m) @ Wd for m in scenario.member_ids()}
        elif trace.variant != "plain":
            raise _Invalid(f"unknown variant {trace.variant!r}")

    # name resolution
    def atom(self, e, *, full=True, allow_zero=False) -> Atom:
        if not isinstance(e, Atom):
            raise _Invalid(f"{e} is not an atom")
        if e.prep == ZERO:
            if not (allow_zero and self.U_tilde is not None):
                raise _Invalid("the distinguished state is only available to transport steps")
        elif e.prep not in self.sc.preparations:
            raise _Invalid(f"unknown preparation {e.prep!r}")
        if full and (e.outcome is None or e.member is None):
            raise _Invalid(f"{e} needs an outcome and a member")
        if e.outcome is not None and e.outcome not in self.meas.outcomes:
            raise _Invalid(f"unknown outcome {e.outcome!r}")
        if e.member is not None and e.member not in self.sc.member_ids():
            raise _Invalid(f"unknown member {e.member!r}")
        return e

    def support_atom(self, e) -> Atom:
        a = self.atom(e, full=False)
        if a.outcome is not None or a.member is not None:
            raise _Invalid(f"{e} is not a support atom")
        return a

    def no_refs(self, step: Step):
        if step.refs:
            raise _Invalid(f"rule {step.rule} takes no references")

    # rules
    def quantum_zero(self, a: Assertion, step: Step):
        self.no_refs(step)
        if a.rel != "=" or not isinstance(a.rhs, Empty):
            raise _Invalid("QuantumZero asserts X = ∅")
        x = self.atom(a.lhs)
        if Event(x.prep, x.member, self.trace.measurement, x.outcome) not in self.zeros.entries:
            raise _Invalid(f"outcome {x.outcome} is possible for {x.prep} under {x.member}")

    def completeness(self, a: Assertion, step: Step):
        self.no_refs(step)
        if a.rel != "⊆":
            raise _Invalid("PossibilisticCompleteness asserts an inclusion")
        if isinstance(a.lhs, Atom):
            x = self.atom(a.lhs)
            y = self.support_atom(a.rhs)
            if x.prep != y.prep:
                raise _Invalid("an outcome set lies inside its own preparation's support")
            return
        if not (isinstance(a.lhs, Inter) and len(a.lhs.args) == 2):
            raise _Invalid("expected L[q;o;m] ∩ L[p] ⊆ L[p;o;m]")
        x = self.atom(a.lhs.args[0])
        p = self.support_atom(a.lhs.args[1])
        y = self.atom(a.rhs)
        if (y.prep, y.outcome, y.member) != (p.prep, x.outcome, x.member):
            raise _Invalid("outcome/member/preparation do not line up")

    def coverage(self, a: Assertion, step: Step):
        self.no_refs(step)
        if a.rel != "=":
            raise _Invalid("OutcomeCoverage asserts an equality")
        p = self.support_atom(a.rhs)
        parts = a.lhs.args if isinstance(a.lhs, Union_) else (a.lhs,)
        atoms = [self.atom(x) for x in parts]
        if {x.prep for x in atoms} != {p.prep} or len({x.member for x in atoms}) != 1:
            raise _Invalid("coverage is over one preparation in one context")
        if sorted(x.outcome for x in atoms) != sorted(self.meas.outcomes):
            raise _Invalid("coverage must list every outcome of the measurement exactly once")

    def _fixes(self, member: str, prep: str) -> bool:
        if prep == ZERO:
            return fixes_state(self.U_tilde[member], self.zero_state, self.sc.tol.zero)
        return fixes_state(self.sc.member(member), self.sc.preparation(prep), self.sc.tol.zero)

    def indifference(self, a: Assertion, step: Step):
        self.no_refs(step)
        if a.rel != "=":
            raise _Invalid("OnticIndifference asserts an equality")
        restricted = self.U_tilde is not None
        x = self.atom(a.lhs, full=False, allow_zero=restricted)
        y = self.atom(a.rhs, full=False, allow_zero=restricted)
        if x.prep != y.prep or x.outcome != y.outcome or x.outcome is None:
            raise _Invalid("both sides must concern the same preparation and outcome")
        if restricted and x.prep != ZERO:
            raise _Invalid("restricted indifference only applies to the distinguished state")
        if x.member is not None and y.member is not None:
            members = [x.member, y.member]
        elif (x.member is None) != (y.member is None):
            m = x.member or y.member
            members = list(self.sc.families[self.sc.family_of(m)])
        else:
            raise _Invalid("at least one side must name a member")
        for m in members:
            if not self._fixes(m, x.prep):
                raise _Invalid(f"member {m} does not leave {x.prep} unchanged")

    def transport(self, a: Assertion, step: Step):
        if self.U_tilde is None:
            raise _Invalid("Transport needs the restricted variant")
        if a.rel == "⟶":
            self.no_refs(step)
            x = self.atom(a.lhs)
            z = self.atom(a.rhs, allow_zero=True)
            if x.prep == ZERO or z.prep != ZERO or (x.outcome, x.member) != (z.outcome, z.member):
                raise _Invalid("expected L[p;o;m] ⟶ L[zero;o;m]")
            image = self.W @ self.sc.preparation(x.prep)
            if abs(abs(np.vdot(self.zero_state, image)) - 1) > self.sc.tol.zero:
                raise _Invalid(f"W does not take {x.prep} to the distinguished state")
            return
        if a.rel != "=" or len(step.refs) != 3:
            raise _Invalid("a transported equality cites two transports and one equality")
        prem = [self.verified[r] for r in step.refs]
        arrows = {p.lhs: p.rhs for p in prem if p.rel == "⟶"}
        eqs = [p for p in prem if p.rel == "="]
        if a.lhs not in arrows or a.rhs not in arrows or len(eqs) != 1:
            raise _Invalid("missing transport of one side")
        e = eqs[0]
        if {e.lhs, e.rhs} != {arrows[a.lhs], arrows[a.rhs]}:
            raise _Invalid("the cited equality does not relate the transported sets")

    def set_algebra(self, a: Assertion, step: Step):
        if a.rel not in ("=", "⊆"):
            raise _Invalid("SetAlgebra handles = and ⊆ only")
        prem = [self.verified[r] for r in step.refs]
        if any(p.rel not in ("=", "⊆") for p in prem):
            raise _Invalid("SetAlgebra cannot use transport assertions")
        if not entails(prem, a):
            raise _Invalid("assertion does not follow from the cited steps")

    def check_step(self, i: int, step: Step):
        try:
            a = parse_assertion(step.assertion)
        except TraceSyntaxError as exc:
            raise _Invalid(str(exc)) from exc
        if any(r >= i or r < 0 or r not in self.verified for r in step.refs):
            raise _Invalid("references must point to earlier steps")
        if len(set(step.refs)) != len(step.refs):
            raise _Invalid("duplicate reference")
        handler = {
            "QuantumZero": self.quantum_zero,
            "PossibilisticCompleteness": self.completeness,
            "OutcomeCoverage": self.coverage,
            "OnticIndifference": self.indifference,
            "Transport": self.transport,
            "SetAlgebra": self.set_algebra,
        }.get(step.rule)
        if handler is None:
            raise _Invalid(f"unknown rule {step.rule!r}")
        handler(a, step)
        self.verified[i] = a

    def check_conclusion(self):
        try:
            c = parse_assertion(self.trace.conclusion)
        except TraceSyntaxError as exc:
            raise _Invalid(str(exc)) from exc
        p, q = self.trace.preparations
        wanted = {
            Assertion(Inter((Atom(p), Atom(q))), "=", Empty()),
            Assertion(Inter((Atom(q), Atom(p))), "=", Empty()),
        }
        if c not in wanted:
            raise _Invalid("conclusion must state that the two supports are disjoint")
        if c not in self.verified.values():
            raise _Invalid("conclusion is not established by any step")


def check_trace(trace: ProofTrace, scenario: QuantumScenario) -> TraceCheck:
    """Validate every step; report the first one whose assertion is not licensed.

    The conclusion is reported at index ``len(trace.steps)``.
    """
    try:
        chk = _Checker(trace, scenario)
    except (_Invalid, OnticLabError) as exc:
        return TraceCheck(False, 0, str(exc))
    for i, step in enumerate(trace.steps):
        try:
            chk.check_step(i, step)
        except (_Invalid, OnticLabError, ValueError) as exc:
            return TraceCheck(False, i, str(exc))
    try:
        chk.check_conclusion()
    except _Invalid as exc:
        return TraceCheck(False, len(trace.steps), str(exc))
    return TraceCheck(True)
