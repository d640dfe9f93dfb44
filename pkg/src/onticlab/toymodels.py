"""Two psi-epistemic models that break ontic indifference.

* the toy bit: four ontic states, each state of knowledge uniform on two of them;
* a field-style interferometer model in which every path carries an occupation
  number and a phase, so an empty path still responds to a phase shifter.
"""

from __future__ import annotations

import math
from itertools import product

from .interfero import MziConfig, build_mzi
from .numerics import matrix, vector
from .ontology import EpistemicState, OnticSpace, OntologicalModel, ResponseFunction, TransitionMap
from .scenario import Measurement, QuantumScenario

TOY_STATES = ("l1", "l2", "l3", "l4")

# states of knowledge: which pair of ontic states is occupied
TOY_PREPARATIONS = {
    "0": ("l1", "l2"),
    "+": ("l2", "l3"),
    "-": ("l1", "l4"),
}

# permutations of the ontic states
TOY_TRANSFORMATIONS = {
    "id": {"l1": "l1", "l2": "l2", "l3": "l3", "l4": "l4"},
    "swap": {"l1": "l2", "l2": "l1", "l3": "l4", "l4": "l3"},
}

# coarse-grained measurements: outcome -> pair of ontic states
TOY_MEASUREMENTS = {
    "Z": {"0": ("l1", "l2"), "1": ("l3", "l4")},
    "X": {"+": ("l2", "l3"), "-": ("l1", "l4")},
}


def toy_bit_scenario() -> QuantumScenario:
    """The qubit fragment the toy bit imitates; ``swap`` plays the role of Z."""
    s = 1 / math.sqrt(2)
    return QuantumScenario(
        dim=2,
        preparations={"0": vector([1, 0]), "+": vector([s, s]), "-": vector([s, -s])},
        families={"gates": {"id": matrix([[1, 0], [0, 1]]), "swap": matrix([[1, 0], [0, -1]])}},
        measurements={
            "Z": Measurement(("0", "1"), (vector([1, 0]), vector([0, 1]))),
            "X": Measurement(("+", "-"), (vector([s, s]), vector([s, -s]))),
        },
    )


def _pair_response(table: dict[str, tuple[str, ...]], states) -> ResponseFunction:
    xi = {}
    for lam in states:
        xi[lam] = {o: (1.0 if lam in pair else 0.0) for o, pair in table.items()}
    return ResponseFunction(xi)


def spekkens_toy_bit() -> OntologicalModel:
    """Measurements are deterministic on ontic states; the post-measurement
    remixing only matters for sequential measurements, which scenarios here do
    not contain."""
    return OntologicalModel(
        space=OnticSpace(TOY_STATES),
        prep_map={k: EpistemicState.uniform(v) for k, v in TOY_PREPARATIONS.items()},
        trans_map={k: TransitionMap.deterministic(v) for k, v in TOY_TRANSFORMATIONS.items()},
        resp_map={k: _pair_response(v, TOY_STATES) for k, v in TOY_MEASUREMENTS.items()},
        scenario=toy_bit_scenario(),
    )


# field-style interferometer model ------------------------------------------------------

PI = "pi"
PHASE_VALUES = ("0", PI)


def _flip(p: str) -> str:
    return PI if p == "0" else "0"


def _add(p: str, q: str) -> str:
    return "0" if p == q else PI


def _bs2_rule(o0: int, p0: str, o1: int, p1: str) -> tuple[int, str, int, str]:
    """BS2 acting on paths (a0, a1) -> (b1, b2).

    A single excitation exits towards b1 when the two incoming phases agree and
    towards b2 otherwise; b1 inherits the a0 phase and b2 the relative phase.
    Vacuum and double occupation pass to both outputs unchanged in number.
    """
    rel = _add(p0, p1)
    n = o0 + o1
    if n == 1:
        ob1, ob2 = (1, 0) if rel == "0" else (0, 1)
    else:
        ob1 = ob2 = n // 2
    return ob1, p0, ob2, rel


# the full 16-entry update table on (occupation, phase) of both paths
BS2_UPDATE: dict[tuple[int, str, int, str], tuple[int, str, int, str]] = {
    (o0, p0, o1, p1): _bs2_rule(o0, p0, o1, p1)
    for o0, p0, o1, p1 in product((0, 1), PHASE_VALUES, (0, 1), PHASE_VALUES)
}


def field_label(o0: int, p0: str, o1: int, p1: str) -> str:
    return f"occ={o0}{o1};ph={p0},{p1}"


def single_particle_sector() -> list[tuple[int, str, int, str]]:
    return [s for s in BS2_UPDATE if s[0] + s[2] == 1]


def martin_spekkens_mzi() -> OntologicalModel:
    """Eight single-particle ontic states, bound to the balanced interferometer."""
    sector = single_particle_sector()
    labels = tuple(field_label(*s) for s in sector)
    phi = [field_label(*s) for s in sector if s[0] == 1]
    psi = [field_label(*s) for s in sector if s[1] == s[3]]
    shift = {field_label(*s): field_label(s[0], s[1], s[2], _flip(s[3])) for s in sector}
    xi = {}
    for s in sector:
        ob1, _, ob2, _ = BS2_UPDATE[s]
        xi[field_label(*s)] = {"B1": float(ob1), "B2": float(ob2)}
    return OntologicalModel(
        space=OnticSpace(labels),
        prep_map={"phi": EpistemicState.uniform(phi), "psi": EpistemicState.uniform(psi)},
        trans_map={"phi=0": TransitionMap.identity(), "phi=pi": TransitionMap.deterministic(shift)},
        resp_map={"detectors": ResponseFunction(xi)},
        scenario=build_mzi(MziConfig.figure(1)),
    )
