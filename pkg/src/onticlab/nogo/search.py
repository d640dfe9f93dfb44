"""Exhaustive search for small possibilistic models of a scenario.

An ontic state is described by which preparation supports contain it and by
the set of outcomes it makes possible for each measurement.  Because ontic
labels are interchangeable, a space of K states is a multiset of such
descriptions; multisets are enumerated in sorted order so no permutation is
visited twice.  Given the states, each family member needs a deterministic
map lambda -> lambda, and members are independent of each other, so each is
solved by a small backtracking search of its own.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement

from ..errors import BudgetExceeded, InvalidConfig
from ..numerics import fixes_state
from ..ontology import (
    EpistemicState,
    OnticSpace,
    OntologicalModel,
    ResponseFunction,
    TransitionMap,
)
from ..scenario import QuantumScenario, possible_outcomes, zero_structure

AXIOMS = ("OnticIndifference", "PossibilisticCompleteness", "OutcomeCoverage", "ProductSeparability")
FULL_AXIOMS = frozenset(AXIOMS)

KERNEL_NOTE = (
    "transition kernels restricted to deterministic maps; an Unsat verdict is "
    "relative to that restriction and to the ontic budget K"
)


@dataclass(frozen=True)
class FeasibilityProblem:
    scenario: QuantumScenario
    axioms: frozenset[str] = FULL_AXIOMS
    K: int = 4
    overlap: tuple[str, str] | None = ("phi", "psi")
    set_preserving: bool = False
    budget: int = 10_000_000
    propagate: bool = True  # unary pruning of state descriptions before enumeration

    def __post_init__(self):
        object.__setattr__(self, "axioms", frozenset(self.axioms))
        unknown = self.axioms - FULL_AXIOMS
        if unknown:
            raise InvalidConfig(f"unknown axioms {sorted(unknown)}; choose from {AXIOMS}")
        if self.K < 1:
            raise InvalidConfig("the ontic budget K must be >= 1")
        if self.overlap is not None:
            for p in self.overlap:
                self.scenario.preparation(p)

    @classmethod
    def from_scenario(cls, scenario: QuantumScenario, axioms=FULL_AXIOMS, K: int = 4, **kw) -> "FeasibilityProblem":
        return cls(scenario, frozenset(axioms), K, **kw)


@dataclass(frozen=True)
class Sat:
    model: OntologicalModel
    explored: int
    violated: tuple[str, ...] = ()  # axioms (among those checkable) the witness breaks

    verdict = "sat"


@dataclass(frozen=True)
class Unsat:
    explored: int
    lemmas: dict = field(default_factory=dict)
    assumption: str = KERNEL_NOTE

    verdict = "unsat"


# precomputation -------------------------------------------------------------------------


@dataclass(frozen=True)
class _Tables:
    preps: tuple[str, ...]
    measurements: tuple[str, ...]
    outcomes: dict  # meas -> tuple of outcomes
    contexts: tuple  # (member or None, ...) in scenario order
    poss: dict  # (prep, member, meas) -> frozenset of possible outcomes
    fixes: dict  # (member, prep) -> bool


def _tables(sc: QuantumScenario) -> _Tables:
    zeros = zero_structure(sc)
    members = tuple(sc.member_ids()) or (None,)
    poss = {
        (p, m, k): possible_outcomes(sc, zeros, p, m, k)
        for p in sc.preparations
        for m in members
        for k in sc.measurements
    }
    fixes = {
        (m, p): fixes_state(sc.member(m), sc.preparation(p), sc.tol.zero)
        for m in members
        for p in sc.preparations
    }
    return _Tables(
        tuple(sc.preparations),
        tuple(sc.measurements),
        {k: sc.measurements[k].outcomes for k in sc.measurements},
        members,
        poss,
        fixes,
    )


def _subsets(items: tuple[str, ...], nonempty: bool) -> list[frozenset[str]]:
    out = []
    for r in range(0 if not nonempty else 1, len(items) + 1):
        out.extend(frozenset(c) for c in combinations(items, r))
    return out


def _value_domain(problem: FeasibilityProblem, t: _Tables, lemmas: dict) -> list[tuple]:
    """All state descriptions (membership, responses) that survive unary pruning.

    A value is dropped when a member that must act as the identity on it
    (pointwise indifference) would leave it with an outcome the quantum zero
    structure forbids for one of its preparations.
    """
    ax = problem.axioms
    nonempty = "OutcomeCoverage" in ax
    resp_choices = [_subsets(t.outcomes[k], nonempty) for k in t.measurements]
    memberships = [frozenset(c) for r in range(len(t.preps) + 1) for c in combinations(t.preps, r)]
    domain = []

    def responses(i):
        if i == len(resp_choices):
            yield ()
            return
        for r in resp_choices[i]:
            for rest in responses(i + 1):
                yield (r, *rest)

    all_resp = list(responses(0))
    pointwise = "OnticIndifference" in ax and not problem.set_preserving
    complete = "PossibilisticCompleteness" in ax
    for mem in memberships:
        for resp in all_resp:
            ok = True
            if problem.propagate and pointwise and complete and mem:
                for m in t.contexts:
                    if m is not None and not any(t.fixes[(m, p)] for p in mem):
                        continue
                    for q in mem:
                        for k, r in zip(t.measurements, resp):
                            if not r <= t.poss[(q, m, k)]:
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        break
            if ok:
                domain.append((tuple(sorted(mem)), resp))
            else:
                lemmas["fixed-point response"] = lemmas.get("fixed-point response", 0) + 1
    domain.sort(key=lambda v: (-len(v[0]), v[0], [sorted(r) for r in v[1]]))
    return domain


# per-member search ---------------------------------------------------------------------


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.n = 0

    def tick(self, stats_fn):
        self.n += 1
        if self.n > self.budget:
            raise BudgetExceeded(self.n, stats_fn())


def _solve_member(problem, t: _Tables, states: list[tuple], member, counter: _Counter, lemmas) -> dict | None:
    """A deterministic map for ``member`` meeting completeness and indifference, or None."""
    ax = problem.axioms
    complete = "PossibilisticCompleteness" in ax
    indifferent = "OnticIndifference" in ax
    K = len(states)
    in_supp = [set(s[0]) for s in states]
    relevant = [i for i in range(K) if in_supp[i]]
    fixed_preps = [p for p in t.preps if member is None or t.fixes[(member, p)]]

    def allowed(i, j) -> bool:
        # may state i be sent to state j?
        if member is None and j != i:
            return False
        if indifferent:
            if not problem.set_preserving:
                if any(p in in_supp[i] for p in fixed_preps) and j != i:
                    return False
            else:
                if any(p in in_supp[i] and p not in in_supp[j] for p in fixed_preps):
                    return False
        if complete:
            for q in in_supp[i]:
                for k, r in zip(t.measurements, states[j][1]):
                    if not r <= t.poss[(q, member, k)]:
                        return False
        return True

    cands = {}
    for i in relevant:
        opts, seen = [], set()
        for j in range(K):
            # targets with identical descriptions are interchangeable unless identity matters
            key = states[j] if not (indifferent and problem.set_preserving) else j
            if key in seen and j != i:
                continue
            if allowed(i, j):
                seen.add(key)
                opts.append(j)
        if not opts:
            lemmas["no admissible target"] = lemmas.get("no admissible target", 0) + 1
            return None
        cands[i] = opts

    needs = []
    if complete:
        for q in t.preps:
            for k in t.measurements:
                needs.append((q, k, t.poss[(q, member, k)]))
    order = sorted(relevant, key=lambda i: len(cands[i]))
    choice: dict[int, int] = {}

    def covered() -> bool:
        for q, k, want in needs:
            got = set()
            ki = t.measurements.index(k)
            for i in relevant:
                if q in in_supp[i]:
                    got |= states[choice[i]][1][ki]
            if got != want:
                return False
        if indifferent and problem.set_preserving:
            for p in fixed_preps:
                supp = {i for i in relevant if p in in_supp[i]}
                if {choice[i] for i in supp} != supp:
                    return False
        return True

    def dfs(pos: int) -> bool:
        counter.tick(lambda: {"lemmas": dict(lemmas)})
        if pos == len(order):
            return covered()
        i = order[pos]
        for j in cands[i]:
            choice[i] = j
            if dfs(pos + 1):
                return True
        del choice[i]
        return False

    if dfs(0):
        return {i: choice.get(i, i) for i in range(K)}
    lemmas["member unsatisfiable"] = lemmas.get("member unsatisfiable", 0) + 1
    return None


def _check_states(problem, t, states, counter, lemmas):
    if any(not any(p in s[0] for s in states) for p in t.preps):
        return None  # every preparation needs a non-empty support
    if problem.overlap is not None:
        a, b = problem.overlap
        if not any(a in s[0] and b in s[0] for s in states):
            return None
    maps = {}
    for m in t.contexts:
        sol = _solve_member(problem, t, states, m, counter, lemmas)
        if sol is None:
            return None
        maps[m] = sol
    return maps


def _witness(problem: FeasibilityProblem, t: _Tables, states, maps) -> OntologicalModel:
    labels = [f"l{i}" for i in range(len(states))]
    preps = {}
    for p in t.preps:
        supp = [labels[i] for i, s in enumerate(states) if p in s[0]]
        preps[p] = EpistemicState.uniform(supp)
    trans = {}
    for m, sol in maps.items():
        if m is not None:
            trans[m] = TransitionMap.deterministic({labels[i]: labels[j] for i, j in sol.items()})
    resps = {}
    lossy = False
    for ki, k in enumerate(t.measurements):
        xi = {}
        for i, s in enumerate(states):
            r = s[1][ki]
            lossy |= not r
            xi[labels[i]] = {o: (1.0 / len(r) if o in r else 0.0) for o in t.outcomes[k]}
        resps[k] = ResponseFunction(xi)
    return OntologicalModel(OnticSpace(tuple(labels)), preps, trans, resps, problem.scenario, lossy)


def _violated_axioms(problem: FeasibilityProblem, model: OntologicalModel) -> tuple[str, ...]:
    from ..ontology import check_possibilistic_completeness, indifference_violations

    out = []
    if indifference_violations(model, problem.set_preserving):
        out.append("OnticIndifference")
    if check_possibilistic_completeness(model):
        out.append("PossibilisticCompleteness")
    if model.lossy:
        out.append("OutcomeCoverage")
    return tuple(out)


def _run_partition(problem: FeasibilityProblem, first: int | None):
    """Search all sorted K-multisets whose first element is ``first`` (all if None)."""
    lemmas: dict[str, int] = {}
    t = _tables(problem.scenario)
    domain = _value_domain(problem, t, lemmas)
    counter = _Counter(problem.budget)
    if problem.overlap is not None:
        a, b = problem.overlap
        if not any(a in v[0] and b in v[0] for v in domain):
            lemmas["no admissible overlap state"] = lemmas.get("no admissible overlap state", 0) + 1
            return None, counter.n, lemmas
    starts = range(len(domain)) if first is None else [first]
    for s in starts:
        for rest in combinations_with_replacement(range(s, len(domain)), problem.K - 1):
            counter.tick(lambda: {"lemmas": dict(lemmas)})
            states = [domain[s]] + [domain[j] for j in rest]
            maps = _check_states(problem, t, states, counter, lemmas)
            if maps is not None:
                return (states, maps), counter.n, lemmas
    return None, counter.n, lemmas


def _partition_star(args):
    return _run_partition(*args)


def feasibility_search(problem: FeasibilityProblem, workers: int | None = None) -> Sat | Unsat:
    """Sat with a witness model, or Unsat with the number of nodes explored.

    ``ProductSeparability`` constrains nothing on a single scenario and is
    accepted for completeness of the axiom menu.  With ``workers > 1`` the
    top-level choice of the first ontic state is split across processes.
    """
    if workers is None:
        workers = int(os.environ.get("ONTICLAB_THREADS", "1"))
    t = _tables(problem.scenario)
    if workers <= 1:
        found, explored, lemmas = _run_partition(problem, None)
    else:
        n = len(_value_domain(problem, t, {}))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_partition_star, [(problem, s) for s in range(n)]))
        explored = sum(r[1] for r in results)
        if explored > problem.budget:
            raise BudgetExceeded(explored, {})
        lemmas: dict[str, int] = {}
        found = None
        for r in results:
            for k, v in r[2].items():
                lemmas[k] = lemmas.get(k, 0) + v
            if found is None and r[0] is not None:
                found = r[0]
    if found is None:
        return Unsat(explored, lemmas)
    model = _witness(problem, t, *found)
    return Sat(model, explored, _violated_axioms(problem, model))
