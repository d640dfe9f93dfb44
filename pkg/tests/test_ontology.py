import pytest

from onticlab.errors import PreconditionNotApplicable, ScenarioFormatError, UnknownName
from onticlab.ontology import (
    EpistemicState,
    OnticSpace,
    OntologicalModel,
    PsiEpistemic,
    PsiOntic,
    ResponseFunction,
    TransitionMap,
    check_ontic_indifference,
    check_possibilistic_completeness,
    classify_model,
    factor_overlap_from_product,
    indifference_violations,
    is_separable,
    outcome_support,
    product_embed,
    project_support,
)
from onticlab.toymodels import spekkens_toy_bit


def tiny(lossy=False, resp=None):
    return OntologicalModel(
        OnticSpace(("a", "b")),
        {"p": EpistemicState.uniform(["a"]), "q": EpistemicState.uniform(["a", "b"])},
        {},
        {"M": ResponseFunction(resp or {"a": {"0": 1.0}, "b": {"1": 1.0}})},
        lossy=lossy,
    )


def test_space_validation():
    with pytest.raises(ScenarioFormatError):
        OnticSpace(())
    with pytest.raises(ScenarioFormatError):
        OnticSpace(("a", "a"))


def test_distributions_are_checked():
    with pytest.raises(ScenarioFormatError, match="preparations.p"):
        OntologicalModel(OnticSpace(("a",)), {"p": EpistemicState({"a": 0.5})})
    with pytest.raises(ScenarioFormatError, match="responses.M.b"):
        tiny(resp={"a": {"0": 1.0}, "b": {"1": 0.0}})
    with pytest.raises(ScenarioFormatError, match="transitions.t.z"):
        OntologicalModel(OnticSpace(("a",)), {}, {"t": TransitionMap({"z": {"a": 1.0}})})


def test_lossy_rows_allowed_only_when_flagged():
    m = tiny(lossy=True, resp={"a": {"0": 1.0}, "b": {"1": 0.0}})
    assert m.response("M").possible("b") == frozenset()
    assert OntologicalModel.from_dict(m.to_dict()).lossy


def test_supports_and_outcome_sets():
    m = tiny()
    assert m.support("q") == {"a", "b"}
    assert outcome_support(m, "q", None, "M", "1") == {"b"}
    with pytest.raises(UnknownName):
        m.support("zz")
    with pytest.raises(UnknownName):
        m.transition("zz")


def test_classification_without_scenario():
    res = classify_model(tiny())
    assert isinstance(res, PsiEpistemic) and res.overlap == {"a"}
    disjoint = OntologicalModel(
        OnticSpace(("a", "b")), {"p": EpistemicState.uniform("a"), "q": EpistemicState.uniform("b")}
    )
    assert isinstance(classify_model(disjoint), PsiOntic)


def test_same_quantum_state_is_not_evidence_of_overlap():
    import dataclasses

    m = spekkens_toy_bit()
    sc = m.scenario
    sc2 = dataclasses.replace(sc, preparations={**sc.preparations, "0b": sc.preparations["0"]})
    twin = OntologicalModel(m.space, {**m.prep_map, "0b": m.prep_map["0"]}, m.trans_map, m.resp_map, sc2)
    res = classify_model(twin)
    assert isinstance(res, PsiEpistemic) and set(res.pair) != {"0", "0b"}
    only_twins = OntologicalModel(
        m.space, {"0": m.prep_map["0"], "0b": m.prep_map["0"]}, m.trans_map, m.resp_map, sc2
    )
    assert isinstance(classify_model(only_twins), PsiOntic)


def test_completeness_detects_both_directions():
    m = spekkens_toy_bit()
    assert check_possibilistic_completeness(m) == []
    broken = OntologicalModel(
        m.space,
        {**m.prep_map, "0": EpistemicState.uniform(["l1", "l3"]), "+": EpistemicState.uniform(["l2"])},
        m.trans_map,
        m.resp_map,
        m.scenario,
    )
    kinds = {v.direction for v in check_possibilistic_completeness(broken)}
    assert kinds == {"model-allows-forbidden", "model-forbids-allowed"}


def test_indifference_precondition():
    m = spekkens_toy_bit()
    with pytest.raises(PreconditionNotApplicable):
        check_ontic_indifference(m, "swap", "+")  # Z does not fix |+>
    assert check_ontic_indifference(m, "id", "+")


def test_indifference_violations_list():
    assert indifference_violations(spekkens_toy_bit()) == [("swap", "0", "l1")]
    assert indifference_violations(spekkens_toy_bit(), set_preserving_only=True) == []


def test_model_round_trip(tmp_path):
    m = spekkens_toy_bit()
    m.save(tmp_path / "m.json")
    back = OntologicalModel.load(tmp_path / "m.json")
    assert back.to_dict() == m.to_dict()
    assert back.scenario is not None


def test_scenario_binding_is_enforced():
    m = spekkens_toy_bit()
    with pytest.raises(ScenarioFormatError, match="transitions.swap"):
        OntologicalModel(m.space, m.prep_map, {"id": m.trans_map["id"]}, m.resp_map, m.scenario)
    with pytest.raises(ScenarioFormatError, match="responses.X"):
        OntologicalModel(m.space, m.prep_map, m.trans_map, {"Z": m.resp_map["Z"]}, m.scenario)


def _factor(states, preps):
    return OntologicalModel(
        OnticSpace(states),
        {k: EpistemicState.uniform(v) for k, v in preps.items()},
        {},
        {"M": ResponseFunction({s: {"o": 1.0} for s in states})},
    )


def test_product_embedding_is_separable_and_projects():
    a = _factor(("x", "y"), {"phi": ["x"], "psi": ["x", "y"]})
    b = _factor(("u", "v", "w"), {"1": ["u", "w"]})
    prod = product_embed(a, b)
    assert prod.space.size == 6
    assert is_separable(prod, a, b)
    assert factor_overlap_from_product(prod, a, b, "phi", "psi", "1") == {"x"}
    assert project_support(prod.support("psi*1"), 1) == {"u", "w"}


def test_non_separable_product_is_refused():
    a = _factor(("x", "y"), {"phi": ["x"], "psi": ["y"]})
    b = _factor(("u",), {"1": ["u"]})
    prod = product_embed(a, b)
    tampered = OntologicalModel(
        prod.space, {**prod.prep_map, "phi*1": EpistemicState.uniform(["y*u"])}, {}, prod.resp_map
    )
    assert not is_separable(tampered, a, b)
    with pytest.raises(PreconditionNotApplicable):
        factor_overlap_from_product(tampered, a, b, "phi", "psi", "1")
