import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from onticlab.errors import InvalidConfig
from onticlab.interfero import MziConfig, beamsplitter_matrix, build_mzi, detector_unitary, mzi_zero_table, output_state
from onticlab.numerics import is_unitary
from onticlab.scenario import Event, evaluate

from oracles import mzi_probabilities


@pytest.mark.parametrize("fig", [1, 2, 3, 4])
@pytest.mark.parametrize("prep", ["phi", "psi"])
@pytest.mark.parametrize("member", ["phi=0", "phi=pi"])
def test_figures_match_path_by_path_amplitudes(fig, prep, member):
    config = MziConfig.figure(fig)
    sc = build_mzi(config)
    got = dict(evaluate(sc, prep, member, "detectors"))
    alpha2 = 0.5 if fig < 3 else 0.2
    want = mzi_probabilities(alpha2, prep, math.pi if member == "phi=pi" else 0.0, config.with_bs3)
    for k, v in want.items():
        assert got[k] == pytest.approx(v, abs=1e-12)


@given(st.floats(0.0, 0.5), st.sampled_from([0.0, math.pi]), st.sampled_from(["phi", "psi"]))
def test_bs3_variant_matches_oracle(alpha2, phase, prep):
    config = MziConfig.figure(3, alpha2)
    amps = output_state(config, prep, phase)
    want = mzi_probabilities(alpha2, prep, phase, True)
    for k, o in enumerate(config.outcomes):
        assert abs(amps[k]) ** 2 == pytest.approx(want[o], abs=1e-12)


@given(st.floats(0.0, 0.5))
def test_bs3_balances_the_arms(alpha2):
    config = MziConfig.figure(4, alpha2)
    # psi exits only at B0 and one of B1/B2
    for phase, dark in ((0.0, 2), (math.pi, 1)):
        assert abs(output_state(config, "psi", phase)[dark]) < 1e-9
    assert abs(output_state(config, "phi", 0.0)[0]) < 1e-12


def test_fig1_zero_table():
    z = mzi_zero_table(MziConfig.figure(1))
    assert z.entries == {Event("psi", "phi=0", "detectors", "B2"), Event("psi", "phi=pi", "detectors", "B1")}


def test_t_equal_one_reduces_to_balanced():
    t = mzi_zero_table(MziConfig.figure(3, 0.5))
    assert {e for e in t.entries if e.outcome != "B0"} == mzi_zero_table(MziConfig.figure(1)).entries


def test_unitaries():
    assert is_unitary(beamsplitter_matrix(0.6, 0.8))
    for fig in (1, 3):
        assert is_unitary(detector_unitary(MziConfig.figure(fig)))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha=0.5, beta=0.5),
        dict(phase=1.0),
        dict(with_bs3=True),
        dict(alpha=math.sqrt(0.8), beta=math.sqrt(0.2), with_bs3=True, transmissivity=1.0),
        dict(with_bs3=True, transmissivity=0.3),
        dict(transmissivity=0.5),
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(InvalidConfig):
        MziConfig(**kwargs)


def test_config_round_trip():
    c = MziConfig.figure(4, 0.3, math.pi)
    assert MziConfig.from_dict(c.to_dict()) == c
    with pytest.raises(InvalidConfig):
        MziConfig.figure(7)
    with pytest.raises(InvalidConfig):
        MziConfig.from_dict({"alpha": "x"})
