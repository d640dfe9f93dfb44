import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onticlab.errors import BudgetExceeded, InvalidConfig
from onticlab.interfero import MziConfig, build_mzi
from onticlab.nogo import FULL_AXIOMS, FeasibilityProblem, check_trace, derive_nonoverlap, feasibility_search
from onticlab.nogo.search import KERNEL_NOTE
from onticlab.numerics import fixes_state
from onticlab.ontology import (
    PsiEpistemic,
    PsiOntic,
    check_possibilistic_completeness,
    classify_model,
    indifference_violations,
)
from onticlab.scenario import possible_outcomes, zero_structure
from onticlab.toymodels import toy_bit_scenario

import oracles

NO_OI = frozenset({"PossibilisticCompleteness", "OutcomeCoverage"})


def brute_verdict(sc, pointwise_oi, K, overlap=("phi", "psi")):
    zeros = zero_structure(sc)
    members = sc.member_ids()
    meas = {k: sc.measurements[k].outcomes for k in sc.measurements}
    poss = {(p, m, k): set(possible_outcomes(sc, zeros, p, m, k)) for p in sc.preparations for m in members for k in meas}
    fixes = {(m, p): fixes_state(sc.member(m), sc.preparation(p)) for m in members for p in sc.preparations}
    for model in oracles.brute_force_models(tuple(sc.preparations), members, meas, K, nonempty=True):
        if overlap and not (model["supports"][overlap[0]] & model["supports"][overlap[1]]):
            continue
        if oracles.model_satisfies(model, poss, fixes, pointwise_oi, complete=True):
            return "sat"
    return "unsat"


@pytest.mark.parametrize("fig", [1, 4])
@pytest.mark.parametrize("axioms", [FULL_AXIOMS, NO_OI])
@pytest.mark.parametrize("K", [1, 2])
def test_search_agrees_with_brute_force(fig, axioms, K):
    sc = build_mzi(MziConfig.figure(fig))
    want = brute_verdict(sc, "OnticIndifference" in axioms, K)
    for propagate in (True, False):
        got = feasibility_search(FeasibilityProblem(sc, axioms, K, propagate=propagate)).verdict
        assert got == want


def test_search_agrees_with_brute_force_without_overlap(mzi1):
    for K in (1, 2):
        want = brute_verdict(mzi1, True, K, overlap=None)
        assert feasibility_search(FeasibilityProblem(mzi1, FULL_AXIOMS, K, overlap=None)).verdict == want


@pytest.mark.parametrize("K", range(1, 6))
def test_full_axioms_unsat_for_mzi(mzi1, K):
    res = feasibility_search(FeasibilityProblem(mzi1, FULL_AXIOMS, K, propagate=False))
    assert res.verdict == "unsat"
    assert res.assumption == KERNEL_NOTE
    assert res.explored > 0


def test_dropping_indifference_gives_checked_epistemic_witness(mzi1):
    res = feasibility_search(FeasibilityProblem(mzi1, NO_OI, 4))
    assert res.verdict == "sat"
    m = res.model
    assert check_possibilistic_completeness(m) == []
    assert isinstance(classify_model(m), PsiEpistemic)
    assert indifference_violations(m)
    assert res.violated == ("OnticIndifference",)


def test_overlap_not_required_gives_ontic_witness(mzi1, half_construction):
    for sc in (mzi1, half_construction.scenario()):
        res = feasibility_search(FeasibilityProblem(sc, FULL_AXIOMS, 4, overlap=None))
        assert res.verdict == "sat"
        assert isinstance(classify_model(res.model), PsiOntic)
        assert res.violated == ()


def test_set_preserving_reading_admits_toy_bit_like_witness():
    sc = toy_bit_scenario()
    strict = feasibility_search(FeasibilityProblem(sc, FULL_AXIOMS, 4, overlap=("0", "+")))
    loose = feasibility_search(FeasibilityProblem(sc, FULL_AXIOMS, 4, overlap=("0", "+"), set_preserving=True))
    assert strict.verdict == "unsat"
    assert loose.verdict == "sat"
    assert indifference_violations(loose.model, set_preserving_only=True) == []
    assert check_possibilistic_completeness(loose.model) == []


def test_lossy_witness_without_coverage(mzi1):
    # an overlap state that never produces any outcome escapes the argument
    res = feasibility_search(FeasibilityProblem(mzi1, {"PossibilisticCompleteness", "OnticIndifference"}, 4))
    assert res.verdict == "sat"
    assert check_possibilistic_completeness(res.model) == []
    assert indifference_violations(res.model) == []
    assert res.model.lossy and res.violated == ("OutcomeCoverage",)


axiom_sets = st.sets(st.sampled_from(sorted(FULL_AXIOMS)))


@settings(max_examples=15)
@given(axiom_sets, axiom_sets, st.integers(1, 3))
def test_monotone_in_axioms(a, b, K):
    sc = build_mzi(MziConfig.figure(1))
    small, big = frozenset(a), frozenset(a | b)
    r_big = feasibility_search(FeasibilityProblem(sc, big, K))
    r_small = feasibility_search(FeasibilityProblem(sc, small, K))
    if r_small.verdict == "unsat":
        assert r_big.verdict == "unsat"


def test_search_and_trace_never_disagree(half_construction, mzi4):
    for sc, src in ((half_construction.scenario(), half_construction), (mzi4, MziConfig.figure(4))):
        assert check_trace(derive_nonoverlap(sc, src), sc).ok
        for K in range(1, 5):
            assert feasibility_search(FeasibilityProblem(sc, FULL_AXIOMS, K, propagate=False)).verdict == "unsat"


def test_budget_exceeded(mzi4):
    with pytest.raises(BudgetExceeded) as exc:
        feasibility_search(FeasibilityProblem(mzi4, FULL_AXIOMS, 4, budget=100, propagate=False))
    assert exc.value.explored > 100


def test_parallel_matches_serial(mzi4):
    p = FeasibilityProblem(mzi4, NO_OI, 3)
    serial, par = feasibility_search(p, workers=1), feasibility_search(p, workers=2)
    assert serial.verdict == par.verdict == "sat"
    p = FeasibilityProblem(mzi4, FULL_AXIOMS, 3, propagate=False)
    assert feasibility_search(p, workers=2).verdict == "unsat"


def test_problem_validation(mzi1):
    with pytest.raises(InvalidConfig):
        FeasibilityProblem(mzi1, {"Realism"}, 2)
    with pytest.raises(InvalidConfig):
        FeasibilityProblem(mzi1, FULL_AXIOMS, 0)
    p = FeasibilityProblem.from_scenario(mzi1, ["OutcomeCoverage"], K=2)
    assert p.axioms == {"OutcomeCoverage"}
