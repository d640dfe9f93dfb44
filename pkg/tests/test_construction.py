import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from onticlab.construction import (
    BOUND_NOTE,
    UnitaryConstruction,
    ancilla_scenario,
    build_construction,
    build_restricted_protocol,
    empirical_boundary,
    feasibility_row,
    feasible_overlap_bound,
    scan_feasibility,
    smallest_M,
    transport_unitary,
    verify_bundle,
    verify_condition,
)
from onticlab.errors import ConditionViolated, DimensionMismatch, Infeasible, OutOfRange, PreconditionNotApplicable
from onticlab.numerics import basis_vector, random_unit_vector
from onticlab.scenario import evaluate, zero_structure

import oracles


def build(alpha2, N):
    return build_construction(math.sqrt(alpha2), math.sqrt(1 - alpha2), N)


@pytest.mark.parametrize("alpha2", [0.01, 0.2, 0.5, 0.6, 0.75, 0.9])
def test_M_matches_counting_oracle(alpha2):
    assert smallest_M(math.sqrt(1 - alpha2)) == oracles.smallest_M(alpha2)


def test_M_snaps_to_integer():
    assert smallest_M(math.sqrt(0.5)) == 2
    assert smallest_M(math.sqrt(0.25)) == 4
    with pytest.raises(OutOfRange):
        smallest_M(0.0)


def test_bound_values():
    assert feasible_overlap_bound(2) == 0.5
    assert feasible_overlap_bound(math.inf) == 1.0
    with pytest.raises(OutOfRange):
        feasible_overlap_bound(0)


alpha2s = st.floats(0.01, 0.95)


@given(alpha2s, st.integers(1, 14))
def test_feasible_iff_M_fits(alpha2, N):
    M = oracles.smallest_M(alpha2)
    if max(M, 2) > N:
        with pytest.raises(Infeasible) as exc:
            build(alpha2, N)
        assert exc.value.minimal_N == max(M, 2)
        return
    con = build(alpha2, N)
    assert con.M == max(M, 2)
    assert con.gamma ** 2 == pytest.approx(oracles.gamma_squared(alpha2), abs=1e-12)
    assert max(con.invariant_defects().values()) <= 1e-10


@given(alpha2s, st.integers(2, 12))
def test_certificate_matches_predicted_disjuncts(alpha2, N):
    assume(max(oracles.smallest_M(alpha2), 2) <= N)
    con = build(alpha2, N)
    cert = verify_condition(con)
    for rec, allowed in zip(cert.per_n, oracles.expected_disjuncts(alpha2, N)):
        assert rec.kind in allowed
    assert BOUND_NOTE in cert.notes


def test_every_U_fixes_phi_and_maps_psi_to_c(half_construction):
    con = half_construction
    for u, c in zip(con.U, con.c):
        assert np.allclose(u @ con.phi, con.phi, atol=1e-12)
        assert np.allclose(u @ con.psi, c, atol=1e-12)
    assert abs(np.vdot(con.phi, con.psi)) ** 2 == pytest.approx(0.5)


def test_quantum_zeros_agree_with_certificate(half_construction):
    con = half_construction
    sc = con.scenario()
    zeros = zero_structure(sc)
    for rec in verify_condition(con).per_n:
        prep = "phi" if rec.kind in ("first", "both") else "psi"
        assert (prep, f"m={rec.n}", "D", f"D{rec.n}") in zeros
    probs = dict(evaluate(sc, "psi", "m=1", "D"))
    assert probs["D1"] == pytest.approx(0, abs=1e-20)


def test_degenerate_orthogonal_pair():
    con = build_construction(0.0, 1.0, 1)
    assert con.M == 1 and con.b_bar == ()
    assert verify_condition(con).kinds()[0] in ("first", "both")


def test_broken_construction_is_reported(half_construction):
    doc = half_construction.to_dict()
    doc["U"][1] = [[[1.0, 0.0] if i == j else [0.0, 0.0] for j in range(3)] for i in range(3)]
    with pytest.raises(ConditionViolated):
        verify_condition(UnitaryConstruction.from_dict(doc))


def test_bundle_round_trip(tmp_path, half_construction):
    cert = verify_condition(half_construction)
    path = tmp_path / "c.json"
    half_construction.save(path, cert)
    import json

    doc = json.loads(path.read_text())
    assert verify_bundle(doc).kinds() == cert.kinds()
    assert doc["certificate"]["per_n"][1]["disjunct"] == "second"


@given(st.integers(0, 2**32 - 1), alpha2s, st.integers(2, 8))
def test_restricted_protocol_reproduces_statistics(seed, alpha2, N):
    assume(max(oracles.smallest_M(alpha2), 2) <= N)
    con = build(alpha2, N)
    rng = np.random.default_rng(seed)
    zero = random_unit_vector(rng, con.dim)
    proto = build_restricted_protocol(con.phi, zero, con)
    assert np.allclose(proto.W @ con.phi, zero, atol=1e-12)
    for m in range(con.dim):
        for state in (con.phi, con.psi, random_unit_vector(rng, con.dim)):
            direct = np.abs(con.U[m] @ state) ** 2
            assert np.max(np.abs(proto.statistics(state, m) - direct)) <= 1e-10
        assert np.allclose(proto.U_tilde[m] @ zero, zero, atol=1e-10)


def test_restricted_protocol_preconditions(half_construction):
    con = half_construction
    with pytest.raises(PreconditionNotApplicable):
        build_restricted_protocol(con.psi, basis_vector(3, 0), con)
    with pytest.raises(DimensionMismatch):
        build_restricted_protocol(con.phi, basis_vector(4, 0), con)
    assert np.array_equal(transport_unitary(con.phi, con.phi), np.eye(3))


def test_ancilla_scenario_shapes(half_construction):
    joint = ancilla_scenario(half_construction.scenario(), 3, "1")
    assert joint.dim == 9
    assert set(joint.preparations) == {"phi*1", "psi*1"}
    with pytest.raises(OutOfRange):
        ancilla_scenario(half_construction.scenario(), 2, "5")


def test_scan_boundary_small():
    rows = scan_feasibility([2, 3, 4], [k / 20 for k in range(1, 20)], workers=1)
    b = empirical_boundary(rows)
    assert b == {2: 0.5, 3: 0.65, 4: 0.75}
    assert feasibility_row(2, 0.55)["feasible"] is False


def test_scan_parallel_matches_serial():
    grid = [0.1, 0.5, 0.7]
    assert scan_feasibility([2, 3], grid, workers=2) == scan_feasibility([2, 3], grid, workers=1)
