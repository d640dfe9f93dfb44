from onticlab.interfero import MziConfig, build_mzi
from onticlab.ontology import (
    PsiEpistemic,
    check_ontic_indifference,
    check_possibilistic_completeness,
    classify_model,
    outcome_support,
)
from onticlab.toymodels import BS2_UPDATE, field_label, martin_spekkens_mzi, single_particle_sector, spekkens_toy_bit


def test_toy_bit_overlap_and_indifference():
    m = spekkens_toy_bit()
    res = classify_model(m)
    assert isinstance(res, PsiEpistemic) and res.overlap == {"l2"}
    assert check_possibilistic_completeness(m) == []
    v = check_ontic_indifference(m, "swap", "0")
    assert not v and v.witness == "l1"
    assert m.transition("swap").image(m.support("0")) == m.support("0")  # distribution unchanged
    assert check_ontic_indifference(m, "swap", "0", set_preserving_only=True)


def test_field_table_is_total_and_conserves_single_particles():
    assert len(BS2_UPDATE) == 16
    for (o0, p0, o1, p1), (b1, _, b2, _) in BS2_UPDATE.items():
        if o0 + o1 == 1:
            assert b1 + b2 == 1
    assert len(single_particle_sector()) == 8


def test_field_model_reproduces_balanced_interferometer():
    m = martin_spekkens_mzi()
    assert m.scenario.to_dict() == build_mzi(MziConfig.figure(1)).to_dict()
    assert check_possibilistic_completeness(m) == []
    assert isinstance(classify_model(m), PsiEpistemic)
    v = check_ontic_indifference(m, "phi=pi", "phi")
    assert not v
    assert check_ontic_indifference(m, "phi=0", "phi")


def test_empty_path_phase_decides_detector():
    m = martin_spekkens_mzi()
    lam = field_label(1, "0", 0, "0")
    assert outcome_support(m, "phi", "phi=0", "detectors", "B1") >= {lam}
    assert lam not in outcome_support(m, "phi", "phi=pi", "detectors", "B1")
